//! Divergences and distances between distributions, natural logarithm
//! throughout. Functions take plain slices so they apply equally to
//! [`ProbVector`](crate::repr::ProbVector) and dense embedding averages.

use alloc::vec::Vec;
use core::f64::consts::LN_2;

use crate::{Error, Result};

/// Additive smoothing used where a raw formula is undefined for zero mass.
pub const DEFAULT_EPSILON: f64 = 1e-10;

fn same_dim(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    Ok(())
}

/// Adds `epsilon` to every entry and renormalizes.
pub fn smooth(p: &[f64], epsilon: f64) -> Vec<f64> {
    let total: f64 = p.iter().sum::<f64>() + epsilon * p.len() as f64;
    p.iter().map(|x| (x + epsilon) / total).collect()
}

/// `Σ p_i ln(p_i / q_i)`, with `0 · ln(0 / x) = 0`. Infinite when `q_i = 0 < p_i`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    same_dim(p, q)?;
    Ok(p.iter()
        .zip(q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| pi * libm::log(pi / qi))
        .sum())
}

/// `½ [KL(P‖M) + KL(Q‖M)]` with `M = ½(P + Q)`; lies in `[0, ln 2]`.
pub fn jensen_shannon(p: &[f64], q: &[f64]) -> Result<f64> {
    same_dim(p, q)?;
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        let m = 0.5 * (pi + qi);
        if pi > 0.0 {
            total += pi * libm::log(pi / m);
        }
        if qi > 0.0 {
            total += qi * libm::log(qi / m);
        }
    }
    Ok((0.5 * total).clamp(0.0, LN_2))
}

/// `1/(α−1) · ln Σ p_i^α / q_i^(α−1)` on epsilon-smoothed copies of `P` and `Q`.
pub fn renyi_divergence(p: &[f64], q: &[f64], alpha: f64, epsilon: f64) -> Result<f64> {
    same_dim(p, q)?;
    if alpha == 1.0 || !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::invalid("Renyi order must be positive, finite and different from 1"));
    }
    let ps = smooth(p, epsilon);
    let qs = smooth(q, epsilon);
    let sum: f64 = ps
        .iter()
        .zip(&qs)
        .map(|(&pi, &qi)| libm::exp(alpha * libm::log(pi) + (1.0 - alpha) * libm::log(qi)))
        .sum();
    Ok(libm::log(sum) / (alpha - 1.0))
}

/// `ln Σ sqrt(P_i Q_i)`: zero for identical distributions, negative otherwise.
/// The value is floored at `ln(epsilon)`, which is also what fully disjoint
/// supports (coefficient 0) map to.
pub fn bhattacharyya(p: &[f64], q: &[f64], epsilon: f64) -> Result<f64> {
    same_dim(p, q)?;
    let coefficient: f64 = p.iter().zip(q).map(|(&pi, &qi)| libm::sqrt(pi * qi)).sum();
    let floor = libm::log(epsilon);
    if coefficient <= 0.0 {
        return Ok(floor);
    }
    Ok(libm::log(coefficient).clamp(floor, 0.0))
}

pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    same_dim(u, v)?;
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (&a, &b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot / (libm::sqrt(nu) * libm::sqrt(nv))).clamp(-1.0, 1.0))
}

pub fn euclidean_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    same_dim(u, v)?;
    Ok(libm::sqrt(u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()))
}

pub fn variational_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    same_dim(u, v)?;
    Ok(u.iter().zip(v).map(|(a, b)| libm::fabs(a - b)).sum())
}

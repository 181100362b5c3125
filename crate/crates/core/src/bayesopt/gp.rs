//! Zero-mean Gaussian-process regression with an isotropic Matérn 5/2 kernel.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::linalg::{cholesky, solve_lower, solve_upper_transposed};
use super::Observation;
use crate::{Error, Result};

/// Largest diagonal jitter tried before giving up on a factorization.
pub const MAX_JITTER: f64 = 1e-6;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Kernel and noise hyperparameters, all on the standardized output scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpHyper {
    pub length_scale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl GpHyper {
    /// A reasonable starting point for inputs in `[-1, 1]^dim`.
    pub fn initial(dim: usize) -> Self {
        GpHyper {
            length_scale: 0.5 * libm::sqrt(dim.max(1) as f64),
            signal_variance: 1.0,
            noise_variance: 1e-3,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.length_scale > 0.0
            && self.signal_variance > 0.0
            && self.noise_variance >= 0.0
            && self.length_scale.is_finite()
            && self.signal_variance.is_finite()
            && self.noise_variance.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("GP hyperparameters must be positive and finite"))
        }
    }
}

fn matern52(h: &GpHyper, a: &[f64], b: &[f64]) -> f64 {
    let r2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let s = libm::sqrt(5.0 * r2) / h.length_scale;
    h.signal_variance * (1.0 + s + s * s / 3.0) * libm::exp(-s)
}

/// A GP conditioned on a set of observations.
#[derive(Clone, Debug)]
pub struct GpModel {
    hyper: GpHyper,
    dim: usize,
    inputs: Vec<f64>,
    chol: Vec<f64>,
    alpha: Vec<f64>,
    y_mean: f64,
    y_std: f64,
    jitter: f64,
}

fn standardize(values: &[f64]) -> (Vec<f64>, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = libm::sqrt(var);
    let std = if std > 1e-12 { std } else { 1.0 };
    (values.iter().map(|v| (v - mean) / std).collect(), mean, std)
}

/// Conditions a GP on `observations`. Outputs are standardized internally
/// (mean subtracted, divided by their standard deviation). When the kernel
/// matrix plus noise cannot be factored, increasing diagonal jitter up to
/// [`MAX_JITTER`] is added.
pub fn gp_fit(observations: &[Observation], hyper: GpHyper) -> Result<GpModel> {
    hyper.validate()?;
    let n = observations.len();
    if n == 0 {
        return Err(Error::invalid("cannot fit a GP without observations"));
    }
    let dim = observations[0].input.len();
    let mut inputs = Vec::with_capacity(n * dim);
    for o in observations {
        if o.input.len() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: o.input.len(),
            });
        }
        inputs.extend_from_slice(&o.input);
    }
    let values: Vec<f64> = observations.iter().map(|o| o.value).collect();
    let (y, y_mean, y_std) = standardize(&values);

    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let k = matern52(&hyper, &inputs[i * dim..(i + 1) * dim], &inputs[j * dim..(j + 1) * dim]);
            gram[i * n + j] = k;
            gram[j * n + i] = k;
        }
        gram[i * n + i] += hyper.noise_variance;
    }

    let mut jitter = 0.0;
    let chol = loop {
        let attempt = if jitter == 0.0 {
            cholesky(&gram, n)
        } else {
            let mut g = gram.clone();
            for i in 0..n {
                g[i * n + i] += jitter;
            }
            cholesky(&g, n)
        };
        match attempt {
            Some(l) => break l,
            None if jitter < MAX_JITTER => {
                jitter = if jitter == 0.0 { 1e-12 } else { jitter * 10.0 };
            }
            None => return Err(Error::NotPositiveDefinite { jitter }),
        }
    };
    let alpha = solve_upper_transposed(&chol, n, &solve_lower(&chol, n, &y));
    Ok(GpModel {
        hyper,
        dim,
        inputs,
        chol,
        alpha,
        y_mean,
        y_std,
        jitter,
    })
}

impl GpModel {
    pub fn hyper(&self) -> GpHyper {
        self.hyper
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_observations(&self) -> usize {
        self.alpha.len()
    }

    /// Diagonal jitter that was needed for the factorization (0 if none).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    fn cross_covariance(&self, x: &[f64]) -> Vec<f64> {
        self.inputs
            .chunks_exact(self.dim)
            .map(|xi| matern52(&self.hyper, xi, x))
            .collect()
    }

    /// Predictive mean and variance of the latent function at `x`, in the
    /// original output units. Variance is clamped at zero.
    pub fn posterior(&self, x: &[f64]) -> Result<(f64, f64)> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: x.len(),
            });
        }
        let (m, v) = self.posterior_standardized(x);
        Ok((m * self.y_std + self.y_mean, v * self.y_std * self.y_std))
    }

    fn posterior_standardized(&self, x: &[f64]) -> (f64, f64) {
        let n = self.n_observations();
        let ks = self.cross_covariance(x);
        let mean = ks.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        let v = solve_lower(&self.chol, n, &ks);
        let var = self.hyper.signal_variance - v.iter().map(|a| a * a).sum::<f64>();
        (mean, var.max(0.0))
    }

    /// Log marginal likelihood of the standardized observations.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.n_observations();
        // y = K α, and yᵀ K⁻¹ y = yᵀ α; recover y from L Lᵀ α.
        let mut lt_alpha = vec![0.0; n];
        for i in 0..n {
            lt_alpha[i] = (i..n).map(|k| self.chol[k * n + i] * self.alpha[k]).sum();
        }
        let fit: f64 = lt_alpha.iter().map(|v| v * v).sum();
        let log_det: f64 = (0..n).map(|i| libm::log(self.chol[i * n + i])).sum();
        -0.5 * fit - log_det - 0.5 * n as f64 * LN_2PI
    }
}

/// Log marginal likelihood of `observations` under `hyper`, or `None` when
/// the kernel matrix cannot be factored.
pub fn log_marginal_likelihood(observations: &[Observation], hyper: GpHyper) -> Option<f64> {
    gp_fit(observations, hyper)
        .ok()
        .map(|m| m.log_marginal_likelihood())
        .filter(|v| v.is_finite())
}

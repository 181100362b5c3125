use alloc::vec::Vec;
use core::ops::Deref;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::acquisition::expected_improvement;
use super::gp::{gp_fit, log_marginal_likelihood, GpHyper, GpModel};
use crate::metrics::WeightVector;
use crate::rng::{seeded_rng, standard_normal, SeededRng};
use crate::{Error, Result};

/// One evaluated input. `penalized` marks values substituted for a
/// non-finite objective result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub input: WeightVector,
    pub value: f64,
    #[serde(default)]
    pub penalized: bool,
}

impl Observation {
    /// Entries of `input` outside `[-1, 1]` are clamped.
    pub fn new(input: Vec<f64>, value: f64) -> Self {
        Observation {
            input: WeightVector::clamped(input),
            value,
            penalized: false,
        }
    }
}

/// Observations in evaluation order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet(Vec<Observation>);

impl ObservationSet {
    pub fn new() -> Self {
        ObservationSet(Vec::new())
    }

    pub fn push(&mut self, obs: Observation) {
        self.0.push(obs);
    }

    /// Best observation; the earliest one wins ties.
    pub fn best(&self, maximize: bool) -> Option<&Observation> {
        let mut best: Option<&Observation> = None;
        for o in &self.0 {
            let better = match best {
                None => true,
                Some(b) if maximize => o.value > b.value,
                Some(b) => o.value < b.value,
            };
            if better {
                best = Some(o);
            }
        }
        best
    }

    /// Running best value after each evaluation.
    pub fn best_so_far(&self, maximize: bool) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut cur: Option<f64> = None;
        for o in &self.0 {
            let next = match cur {
                None => o.value,
                Some(c) if maximize => c.max(o.value),
                Some(c) => c.min(o.value),
            };
            cur = Some(next);
            out.push(next);
        }
        out
    }

    pub fn into_inner(self) -> Vec<Observation> {
        self.0
    }
}

impl Deref for ObservationSet {
    type Target = [Observation];
    fn deref(&self) -> &[Observation] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoConfig {
    /// Total number of objective evaluations, initial designs included.
    pub iterations: usize,
    pub initial: usize,
    pub candidates: usize,
    pub perturbations: usize,
    pub perturbation_scale: f64,
    pub refit_every: usize,
    pub hyper_restarts: usize,
    pub maximize: bool,
    pub seed: u64,
}

impl Default for BoConfig {
    fn default() -> Self {
        BoConfig {
            iterations: 300,
            initial: 10,
            candidates: 5000,
            perturbations: 50,
            perturbation_scale: 0.1,
            refit_every: 10,
            hyper_restarts: 32,
            maximize: true,
            seed: 0,
        }
    }
}

impl BoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.initial == 0 {
            return Err(Error::invalid("at least one initial design is required"));
        }
        if self.iterations < self.initial {
            return Err(Error::invalid("iterations must be at least the number of initial designs"));
        }
        if self.candidates == 0 {
            return Err(Error::invalid("candidate count must be at least 1"));
        }
        if self.refit_every == 0 {
            return Err(Error::invalid("refit interval must be at least 1"));
        }
        if !(self.perturbation_scale >= 0.0 && self.perturbation_scale.is_finite()) {
            return Err(Error::invalid("perturbation scale must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoResult {
    pub best: Observation,
    pub history: ObservationSet,
    /// Kernel hyperparameters in use at the end of the run.
    pub hyper: GpHyper,
}

fn uniform_point(rng: &mut SeededRng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Index of the candidate with the largest EI; the lowest index wins ties.
pub fn argmax_expected_improvement(
    model: &GpModel,
    candidates: &[Vec<f64>],
    best: f64,
    maximize: bool,
) -> Result<Option<usize>> {
    let mut arg = None;
    let mut top = f64::NEG_INFINITY;
    for (i, c) in candidates.iter().enumerate() {
        let (m, v) = model.posterior(c)?;
        let ei = expected_improvement(m, v, best, maximize);
        if ei > top {
            top = ei;
            arg = Some(i);
        }
    }
    Ok(arg)
}

/// Proposes the next input: `candidates` uniform points in `[-1, 1]^l` plus
/// `perturbations` Gaussian moves around the incumbent, scored by EI.
pub fn propose_next(
    model: &GpModel,
    observations: &ObservationSet,
    config: &BoConfig,
    rng: &mut SeededRng,
) -> Result<WeightVector> {
    let incumbent = observations
        .best(config.maximize)
        .ok_or_else(|| Error::invalid("cannot propose without observations"))?;
    let dim = model.dim();
    let mut candidates: Vec<Vec<f64>> = (0..config.candidates).map(|_| uniform_point(rng, dim)).collect();
    for _ in 0..config.perturbations {
        candidates.push(
            incumbent
                .input
                .iter()
                .map(|&x| (x + config.perturbation_scale * standard_normal(rng)).clamp(-1.0, 1.0))
                .collect(),
        );
    }
    let i = argmax_expected_improvement(model, &candidates, incumbent.value, config.maximize)?
        .unwrap_or(0);
    Ok(WeightVector::clamped(candidates.swap_remove(i)))
}

struct HyperBounds {
    lo: [f64; 3],
    hi: [f64; 3],
}

impl HyperBounds {
    fn for_dim(dim: usize) -> Self {
        let root = libm::sqrt(dim.max(1) as f64);
        HyperBounds {
            lo: [libm::log(0.02 * root), libm::log(0.05), libm::log(1e-6)],
            hi: [libm::log(4.0 * root), libm::log(20.0), 0.0],
        }
    }

    fn hyper(&self, p: &[f64; 3]) -> GpHyper {
        GpHyper {
            length_scale: libm::exp(p[0]),
            signal_variance: libm::exp(p[1]),
            noise_variance: libm::exp(p[2]),
        }
    }

    fn clamp(&self, p: &mut [f64; 3]) {
        for k in 0..3 {
            p[k] = p[k].clamp(self.lo[k], self.hi[k]);
        }
    }
}

/// Point estimate of the kernel hyperparameters by maximizing the log
/// marginal likelihood: random multi-start over log-uniform boxes, then a
/// coordinate pattern search from the best start. `current` is always
/// included as a start so refits never get worse.
pub fn fit_hyperparameters(
    observations: &[Observation],
    current: GpHyper,
    restarts: usize,
    rng: &mut SeededRng,
) -> GpHyper {
    let dim = observations.first().map_or(1, |o| o.input.len());
    let bounds = HyperBounds::for_dim(dim);
    let score = |p: &[f64; 3]| log_marginal_likelihood(observations, bounds.hyper(p)).unwrap_or(f64::NEG_INFINITY);

    let mut best = [
        libm::log(current.length_scale),
        libm::log(current.signal_variance),
        libm::log(current.noise_variance.max(1e-6)),
    ];
    bounds.clamp(&mut best);
    let mut best_score = score(&best);
    for _ in 0..restarts {
        let mut p = [0.0; 3];
        for k in 0..3 {
            p[k] = rng.random_range(bounds.lo[k]..=bounds.hi[k]);
        }
        let s = score(&p);
        if s > best_score {
            best = p;
            best_score = s;
        }
    }

    let mut step = 0.5;
    while step > 0.02 {
        let mut improved = false;
        for k in 0..3 {
            for dir in [1.0, -1.0] {
                let mut p = best;
                p[k] += dir * step;
                bounds.clamp(&mut p);
                let s = score(&p);
                if s > best_score {
                    best = p;
                    best_score = s;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    bounds.hyper(&best)
}

fn penalty(observations: &ObservationSet, maximize: bool) -> f64 {
    let finite: Vec<f64> = observations.iter().filter(|o| !o.penalized).map(|o| o.value).collect();
    if finite.is_empty() {
        return if maximize { -1.0 } else { 1.0 };
    }
    let n = finite.len() as f64;
    let mean = finite.iter().sum::<f64>() / n;
    let std = libm::sqrt(finite.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n);
    let std = if std > 0.0 { std } else { 1.0 };
    if maximize {
        finite.iter().copied().fold(f64::INFINITY, f64::min) - std
    } else {
        finite.iter().copied().fold(f64::NEG_INFINITY, f64::max) + std
    }
}

/// Runs Bayesian optimization of `objective` over `[-1, 1]^dim`.
///
/// The first `initial` inputs are uniform random; after that each step fits
/// the GP, maximizes EI over a candidate set and evaluates the proposal.
/// Hyperparameters are refit every `refit_every` model-based steps.
pub fn optimize<F>(mut objective: F, dim: usize, config: &BoConfig) -> Result<BoResult>
where
    F: FnMut(&WeightVector) -> Result<f64>,
{
    config.validate()?;
    if dim == 0 {
        return Err(Error::invalid("cannot optimize over zero dimensions"));
    }
    let mut rng = seeded_rng(config.seed);
    let mut history = ObservationSet::new();
    let mut hyper = GpHyper::initial(dim);

    let mut evaluate = |w: WeightVector, history: &mut ObservationSet| -> Result<()> {
        let y = objective(&w)?;
        let obs = if y.is_finite() {
            Observation {
                input: w,
                value: y,
                penalized: false,
            }
        } else {
            Observation {
                input: w,
                value: penalty(history, config.maximize),
                penalized: true,
            }
        };
        history.push(obs);
        Ok(())
    };

    for _ in 0..config.initial {
        let w = WeightVector::clamped(uniform_point(&mut rng, dim));
        evaluate(w, &mut history)?;
    }
    for step in 0..config.iterations - config.initial {
        if step % config.refit_every == 0 {
            hyper = fit_hyperparameters(&history, hyper, config.hyper_restarts, &mut rng);
        }
        let model = gp_fit(&history, hyper)?;
        let w = propose_next(&model, &history, config, &mut rng)?;
        evaluate(w, &mut history)?;
    }
    let best = history
        .best(config.maximize)
        .cloned()
        .ok_or_else(|| Error::invalid("no evaluations were made"))?;
    Ok(BoResult { best, history, hyper })
}

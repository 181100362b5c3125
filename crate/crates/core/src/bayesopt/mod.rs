//! Gaussian-process Bayesian optimization with Expected Improvement over the
//! weight hypercube `[-1, 1]^l`.

mod acquisition;
mod gp;
mod linalg;
mod optimize;

pub use acquisition::{expected_improvement, normal_cdf, normal_pdf};
pub use gp::{gp_fit, log_marginal_likelihood, GpHyper, GpModel, MAX_JITTER};
pub use optimize::{
    argmax_expected_improvement, fit_hyperparameters, optimize, propose_next, BoConfig, BoResult, Observation, ObservationSet,
};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * libm::exp(-0.5 * z * z)
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / core::f64::consts::SQRT_2)
}

/// Expected improvement over `best` of a Gaussian with the given mean and
/// variance. When minimizing, the improvement is measured downwards.
/// Zero variance reduces to the plain improvement `max(mean - best, 0)`.
pub fn expected_improvement(mean: f64, variance: f64, best: f64, maximize: bool) -> f64 {
    let gain = if maximize { mean - best } else { best - mean };
    if !(variance > 0.0) {
        return gain.max(0.0);
    }
    let sigma = libm::sqrt(variance);
    let z = gain / sigma;
    (gain * normal_cdf(z) + sigma * normal_pdf(z)).max(0.0)
}

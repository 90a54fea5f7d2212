//! Jacobson/Karels RTT estimation and its closed-form trajectories.
//!
//! [`RttEstimate::update`] is the classic iterative estimator:
//!
//! ```text
//! delta  = x - mu
//! mu'    = mu + g * delta
//! sigma' = sigma + h * (|delta| - sigma)
//! rto'   = mu' + 4 * sigma'
//! ```
//!
//! Two sample patterns have closed forms when `g = 1/8` and `h = 1/4`:
//!
//! * every sample equals the current RTO (`x_i = rto_{i-1}`), which is what a
//!   sender sees when each ACK is held until the edge of its timeout, see
//!   [`phase1_closed_form`];
//! * every sample equals a constant `theta`, see [`phase2_closed_form`].
//!
//! All arithmetic is continuous: no clock ticks, no RTO clamping.

use thiserror::Error;

/// Default mean gain.
pub const DEFAULT_GAIN_G: f64 = 0.125;
/// Default deviation gain.
pub const DEFAULT_GAIN_H: f64 = 0.25;

/// Multiplier on the deviation in `rto = mu + K * sigma`.
pub const DEVIATION_MULTIPLIER: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("RTT sample must be finite and non-negative, got {0}")]
    InvalidSample(f64),
    #[error("estimator state must be finite with mu >= 0 and sigma >= 0 (mu={mu}, sigma={sigma})")]
    InvalidState { mu: f64, sigma: f64 },
    #[error("gains must lie strictly between 0 and 1 (g={g}, h={h})")]
    InvalidGain { g: f64, h: f64 },
    #[error("closed forms require g = 1/8 and h = 1/4 (g={g}, h={h})")]
    NonDefaultGains { g: f64, h: f64 },
    #[error("constant sample theta must be finite and non-negative, got {0}")]
    InvalidTheta(f64),
}

/// Smoothed RTT `mu`, mean deviation `sigma`, and the two gains.
///
/// The RTO is always derived from `mu` and `sigma`; it is never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RttEstimate {
    mu: f64,
    sigma: f64,
    gain_g: f64,
    gain_h: f64,
}

impl RttEstimate {
    /// Estimator with the default gains.
    pub fn new(mu: f64, sigma: f64) -> Result<Self, EstimatorError> {
        Self::with_gains(mu, sigma, DEFAULT_GAIN_G, DEFAULT_GAIN_H)
    }

    pub fn with_gains(mu: f64, sigma: f64, gain_g: f64, gain_h: f64) -> Result<Self, EstimatorError> {
        if !(mu.is_finite() && sigma.is_finite() && mu >= 0.0 && sigma >= 0.0) {
            return Err(EstimatorError::InvalidState { mu, sigma });
        }
        let in_unit = |v: f64| v > 0.0 && v < 1.0;
        if !(in_unit(gain_g) && in_unit(gain_h)) {
            return Err(EstimatorError::InvalidGain { g: gain_g, h: gain_h });
        }
        Ok(Self { mu, sigma, gain_g, gain_h })
    }

    /// Initial state after the first measurement: `mu = x`, `sigma = x / 2`.
    pub fn from_first_sample(sample: f64) -> Result<Self, EstimatorError> {
        check_sample(sample)?;
        Self::new(sample, sample / 2.0)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn gain_g(&self) -> f64 {
        self.gain_g
    }

    pub fn gain_h(&self) -> f64 {
        self.gain_h
    }

    pub fn rto(&self) -> f64 {
        self.mu + DEVIATION_MULTIPLIER * self.sigma
    }

    pub fn has_default_gains(&self) -> bool {
        self.gain_g == DEFAULT_GAIN_G && self.gain_h == DEFAULT_GAIN_H
    }

    /// One estimator iteration with RTT sample `sample`.
    pub fn update(&self, sample: f64) -> Result<Self, EstimatorError> {
        check_sample(sample)?;
        let delta = sample - self.mu;
        let mu = self.mu + self.gain_g * delta;
        let sigma = self.sigma + self.gain_h * (delta.abs() - self.sigma);
        Ok(Self { mu, sigma, ..*self })
    }

    fn require_default_gains(&self) -> Result<(), EstimatorError> {
        if self.has_default_gains() {
            Ok(())
        } else {
            Err(EstimatorError::NonDefaultGains { g: self.gain_g, h: self.gain_h })
        }
    }
}

fn check_sample(sample: f64) -> Result<(), EstimatorError> {
    if sample.is_finite() && sample >= 0.0 {
        Ok(())
    } else {
        Err(EstimatorError::InvalidSample(sample))
    }
}

/// Estimator state after `n` samples that each equal the previous RTO, and the
/// total time those samples span.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseOneResult {
    pub mu_n: f64,
    pub sigma_n: f64,
    pub rto_n: f64,
    /// `S(n)`: sum of `rto_0 .. rto_{n-1}`.
    pub elapsed: f64,
}

impl PhaseOneResult {
    pub fn estimate(&self) -> RttEstimate {
        RttEstimate { mu: self.mu_n, sigma: self.sigma_n, gain_g: DEFAULT_GAIN_G, gain_h: DEFAULT_GAIN_H }
    }
}

/// Closed form for `n` samples with `x_i = rto_{i-1}`, starting from `start`.
///
/// With `x = mu + 4 sigma` the innovation is `4 sigma`, so sigma grows by 7/4
/// per step and mu by `sigma / 2`:
///
/// ```text
/// sigma_n = (7/4)^n sigma_0
/// mu_n    = mu_0 + (2/3) sigma_0 ((7/4)^n - 1)
/// rto_n   = mu_0 + sigma_0 ((14/3)(7/4)^n - 2/3)
/// S(n)    = n mu_0 + sigma_0 ((56/9)((7/4)^n - 1) - 2n/3)
/// ```
pub fn phase1_closed_form(n: u32, start: &RttEstimate) -> Result<PhaseOneResult, EstimatorError> {
    start.require_default_gains()?;
    let mu0 = start.mu;
    let sigma0 = start.sigma;
    let growth = 1.75_f64.powi(n as i32);
    let nf = f64::from(n);

    let sigma_n = growth * sigma0;
    let mu_n = mu0 + (2.0 / 3.0) * sigma0 * (growth - 1.0);
    let rto_n = mu0 + sigma0 * ((14.0 / 3.0) * growth - 2.0 / 3.0);
    let elapsed = nf * mu0 + sigma0 * ((56.0 / 9.0) * (growth - 1.0) - 2.0 * nf / 3.0);

    Ok(PhaseOneResult { mu_n, sigma_n, rto_n, elapsed })
}

/// Closed form for `steps` samples that all equal `theta`, starting from
/// `start`.
///
/// ```text
/// mu_N    = (7/8)^k (mu_n - theta) + theta
/// sigma_N = (3/4)^k sigma_n + 2 ((7/8)^k - (3/4)^k) |mu_n - theta|
/// ```
///
/// mu approaches theta monotonically, so the sign of `theta - mu` never flips
/// and the absolute value can be taken once.
pub fn phase2_closed_form(steps: u32, theta: f64, start: &RttEstimate) -> Result<RttEstimate, EstimatorError> {
    start.require_default_gains()?;
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(EstimatorError::InvalidTheta(theta));
    }
    if steps == 0 {
        return Ok(*start);
    }
    let k = steps as i32;
    let mean_decay = 0.875_f64.powi(k);
    let dev_decay = 0.75_f64.powi(k);
    let gap = (start.mu - theta).abs();

    let mu = mean_decay * (start.mu - theta) + theta;
    let sigma = dev_decay * start.sigma + 2.0 * (mean_decay - dev_decay) * gap;
    Ok(RttEstimate { mu, sigma, ..*start })
}

/// The four-term expression for the final RTO after phase two.
///
/// Algebraically identical to `phase2_closed_form(..).rto()`; kept separate
/// so the two can be checked against each other.
pub fn phase2_final_rto(steps: u32, theta: f64, start: &RttEstimate) -> Result<f64, EstimatorError> {
    start.require_default_gains()?;
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(EstimatorError::InvalidTheta(theta));
    }
    let k = steps as i32;
    let a = 0.875_f64.powi(k);
    let b = 0.75_f64.powi(k);
    Ok(a * start.mu + 4.0 * b * start.sigma + (1.0 - a) * theta + 8.0 * (a - b) * (start.mu - theta).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn est(mu: f64, sigma: f64) -> RttEstimate {
        RttEstimate::new(mu, sigma).unwrap()
    }

    #[test]
    fn zero_innovation_update() {
        let next = est(1.0, 0.3).update(1.0).unwrap();
        assert_relative_eq!(next.mu(), 1.0);
        assert_relative_eq!(next.sigma(), 0.225);
        assert_relative_eq!(next.rto(), 1.9);
    }

    #[test]
    fn update_at_rto_edge() {
        let next = est(1.0, 0.3).update(2.2).unwrap();
        assert_relative_eq!(next.mu(), 1.15, max_relative = 1e-12);
        assert_relative_eq!(next.sigma(), 0.525, max_relative = 1e-12);
        assert_relative_eq!(next.rto(), 3.25, max_relative = 1e-12);
    }

    #[test]
    fn update_below_mean() {
        let next = est(1.4125, 0.91875).update(0.5).unwrap();
        assert_relative_eq!(next.mu(), 1.298_437_5, max_relative = 1e-12);
        assert_relative_eq!(next.sigma(), 0.917_187_5, max_relative = 1e-12);
    }

    #[test]
    fn negative_sample_rejected() {
        assert_eq!(est(1.0, 0.3).update(-0.1), Err(EstimatorError::InvalidSample(-0.1)));
        assert!(est(1.0, 0.3).update(f64::NAN).is_err());
    }

    #[test]
    fn invalid_construction() {
        assert!(RttEstimate::new(-1.0, 0.0).is_err());
        assert!(RttEstimate::new(1.0, -0.1).is_err());
        assert!(RttEstimate::with_gains(1.0, 0.1, 0.0, 0.25).is_err());
        assert!(RttEstimate::with_gains(1.0, 0.1, 0.125, 1.0).is_err());
    }

    #[test]
    fn first_sample_initialisation() {
        let e = RttEstimate::from_first_sample(0.2).unwrap();
        assert_eq!(e.mu(), 0.2);
        assert_eq!(e.sigma(), 0.1);
    }

    #[test]
    fn phase_one_identity_and_two_steps() {
        let start = est(1.0, 0.3);
        let p0 = phase1_closed_form(0, &start).unwrap();
        assert_eq!((p0.mu_n, p0.sigma_n, p0.elapsed), (1.0, 0.3, 0.0));
        assert_relative_eq!(p0.rto_n, 2.2, max_relative = 1e-15);

        let p2 = phase1_closed_form(2, &start).unwrap();
        assert_relative_eq!(p2.mu_n, 1.4125, max_relative = 1e-12);
        assert_relative_eq!(p2.sigma_n, 0.918_75, max_relative = 1e-12);
        assert_relative_eq!(p2.rto_n, 5.0875, max_relative = 1e-12);
        assert_relative_eq!(p2.elapsed, 5.45, max_relative = 1e-12);
    }

    #[test]
    fn phase_two_identity_and_steady_mean() {
        let start = est(1.4125, 0.918_75);
        let same = phase2_closed_form(0, 7.0, &start).unwrap();
        assert_eq!(same, start);

        let s = 0.4;
        let at_mean = phase2_closed_form(3, 1.2, &est(1.2, s)).unwrap();
        assert_relative_eq!(at_mean.mu(), 1.2, max_relative = 1e-15);
        assert_relative_eq!(at_mean.sigma(), 0.75_f64.powi(3) * s, max_relative = 1e-12);
    }

    #[test]
    fn phase_two_two_steps() {
        let out = phase2_closed_form(2, 0.5, &est(1.4125, 0.918_75)).unwrap();
        assert_relative_eq!(out.mu(), 1.198_632_812_5, max_relative = 1e-12);
        assert_relative_eq!(out.sigma(), 0.8875, max_relative = 1e-12);
        assert_relative_eq!(out.rto(), 4.748_632_812_5, max_relative = 1e-12);
    }

    #[test]
    fn four_term_form_matches() {
        let start = est(3.0, 0.7);
        for k in [0, 1, 5, 40] {
            for theta in [0.5, 3.0, 9.0] {
                let a = phase2_closed_form(k, theta, &start).unwrap().rto();
                let b = phase2_final_rto(k, theta, &start).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn closed_forms_reject_custom_gains() {
        let custom = RttEstimate::with_gains(1.0, 0.3, 0.2, 0.25).unwrap();
        assert!(matches!(phase1_closed_form(3, &custom), Err(EstimatorError::NonDefaultGains { .. })));
        assert!(matches!(phase2_closed_form(3, 1.0, &custom), Err(EstimatorError::NonDefaultGains { .. })));
        assert!(phase2_closed_form(1, -1.0, &est(1.0, 0.1)).is_err());
    }
}

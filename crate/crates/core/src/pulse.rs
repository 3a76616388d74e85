//! Root-raised-cosine pulse, its sampled autocorrelation, the zero-ISI
//! target `eta` and the circulant windowing matrix built from it.
//!
//! Time is measured in symbol durations throughout (`T = 1`).

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::linalg::RMat;

/// Quadrature nodes per symbol duration used for the autocorrelation.
pub const QUAD_PER_SYMBOL: usize = 64;

const SINGULAR_EPS: f64 = 1e-10;

/// Unnormalized textbook root-raised-cosine impulse response at `t` (in
/// symbols), truncated to `|t| <= lag`.
fn rrc_raw(t: f64, beta: f64, lag: usize) -> f64 {
    if t.abs() > lag as f64 {
        return 0.0;
    }
    if t.abs() < SINGULAR_EPS {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    let edge = 1.0 / (4.0 * beta);
    if (t.abs() - edge).abs() < SINGULAR_EPS {
        let arg = PI / (4.0 * beta);
        return beta / SQRT_2 * ((1.0 + 2.0 / PI) * arg.sin() + (1.0 - 2.0 / PI) * arg.cos());
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
    num / den
}

fn check_params(beta: f64, lag: usize) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain(format!(
            "roll-off must lie in (0, 1), got {beta}"
        )));
    }
    if lag < 1 {
        return Err(Error::Domain("pulse lag must be at least 1".into()));
    }
    Ok(())
}

/// Trapezoidal autocorrelation of the raw truncated pulse at integer lags
/// `0..=max_lag`.
fn raw_autocorr(beta: f64, lag: usize, max_lag: usize) -> Vec<f64> {
    let per = QUAD_PER_SYMBOL as i64;
    let half = per * lag as i64;
    let h = 1.0 / per as f64;
    let samples: Vec<f64> = (-half..=half)
        .map(|j| rrc_raw(j as f64 * h, beta, lag))
        .collect();
    (0..=max_lag)
        .map(|tau| {
            let shift = tau * QUAD_PER_SYMBOL;
            if shift >= samples.len() {
                return 0.0;
            }
            let prods: Vec<f64> = samples[..samples.len() - shift]
                .iter()
                .zip(&samples[shift..])
                .map(|(a, b)| a * b)
                .collect();
            let ends = (prods[0] + prods[prods.len() - 1]) / 2.0;
            h * (prods.iter().sum::<f64>() - ends)
        })
        .collect()
}

/// Sampled root-raised-cosine pulse model. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseModel {
    beta: f64,
    lag: usize,
    oversample: usize,
    energy_norm: f64,
    /// `R_g(tau)` for `tau = 0..=2*lag`; negative lags by evenness.
    autocorr: Vec<f64>,
}

impl PulseModel {
    pub fn new(beta: f64, lag: usize, oversample: usize) -> Result<Self> {
        check_params(beta, lag)?;
        if oversample < 1 {
            return Err(Error::Domain(
                "oversampling factor must be at least 1".into(),
            ));
        }
        let raw = raw_autocorr(beta, lag, 2 * lag);
        let energy = raw[0];
        let autocorr = raw.iter().map(|r| r / energy).collect();
        Ok(Self {
            beta,
            lag,
            oversample,
            energy_norm: energy.sqrt().recip(),
            autocorr,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn lag(&self) -> usize {
        self.lag
    }

    pub fn oversample(&self) -> usize {
        self.oversample
    }

    /// Scale applied to the textbook pulse so that `R_g(0) = 1`.
    pub fn energy_norm(&self) -> f64 {
        self.energy_norm
    }

    /// Normalized pulse value at `t` symbols.
    pub fn sample(&self, t: f64) -> f64 {
        self.energy_norm * rrc_raw(t, self.beta, self.lag)
    }

    pub fn autocorrelation(&self, tau: i64) -> f64 {
        let a = tau.unsigned_abs() as usize;
        self.autocorr.get(a).copied().unwrap_or(0.0)
    }

    pub fn eta(&self, l0: usize) -> Vec<f64> {
        build_eta(self, l0)
    }
}

/// Normalized root-raised-cosine sample at `t_norm` symbols.
///
/// Builds the normalization by quadrature on every call; hold a
/// [`PulseModel`] when sampling repeatedly.
pub fn rrc_sample(t_norm: f64, beta: f64, lag: usize) -> Result<f64> {
    check_params(beta, lag)?;
    let energy = raw_autocorr(beta, lag, 0)[0];
    Ok(rrc_raw(t_norm, beta, lag) / energy.sqrt())
}

pub fn autocorrelation(p: &PulseModel, tau: i64) -> f64 {
    p.autocorrelation(tau)
}

/// `[R(-Lg) .. R(0) .. R(Lg), 0 x (l0 - 1)]`, of length `2 Lg + l0`.
pub fn build_eta(p: &PulseModel, l0: usize) -> Vec<f64> {
    let lg = p.lag as i64;
    let mut eta: Vec<f64> = (-lg..=lg).map(|tau| p.autocorrelation(tau)).collect();
    eta.resize(2 * p.lag + l0.max(1), 0.0);
    eta
}

/// Circulant window `T[m, n] = eta[(n - m) mod L]` with `l0` rows.
pub fn build_window_matrix(eta: &[f64], l0: usize) -> Result<RMat> {
    let l = eta.len();
    if l0 > l {
        return Err(Error::Dimension(format!(
            "window has {l0} rows but eta has only {l} entries"
        )));
    }
    Ok(RMat::from_fn(l0, l, |m, n| eta[(n + l - m) % l]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_pulse() -> PulseModel {
        PulseModel::new(0.3, 4, 2).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PulseModel::new(0.0, 4, 2).is_err());
        assert!(PulseModel::new(1.0, 4, 2).is_err());
        assert!(PulseModel::new(0.3, 0, 2).is_err());
        assert!(rrc_sample(0.0, 1.5, 4).is_err());
    }

    #[test]
    fn truncated_outside_lag() {
        assert_eq!(rrc_sample(5.0, 0.3, 4).unwrap(), 0.0);
        assert_eq!(default_pulse().sample(-4.01), 0.0);
    }

    #[test]
    fn even_symmetry() {
        let p = default_pulse();
        for &t in &[0.1, 0.5, 0.8333333333333334, 1.0, 2.7, 3.99] {
            assert_eq!(p.sample(t), p.sample(-t));
        }
        for tau in 0..=8 {
            assert_eq!(p.autocorrelation(tau), p.autocorrelation(-tau));
        }
    }

    #[test]
    fn singular_points_match_limits() {
        let beta = 0.3;
        let edge = 1.0 / (4.0 * beta);
        for &t in &[edge, 0.0] {
            let at = rrc_raw(t, beta, 4);
            let near = rrc_raw(t + 1e-6, beta, 4);
            assert!((at - near).abs() < 1e-5, "t={t}: {at} vs {near}");
        }
    }

    #[test]
    fn normalization_is_exact() {
        assert_eq!(default_pulse().autocorrelation(0), 1.0);
    }

    #[test]
    fn leakage_is_small() {
        let p = default_pulse();
        assert!(p.autocorrelation(1).abs() <= 0.02);
        for tau in 1..=8 {
            assert!(p.autocorrelation(tau).abs() <= 0.05);
        }
        assert_eq!(p.autocorrelation(9), 0.0);
    }

    #[test]
    fn eta_layout() {
        let p = default_pulse();
        let eta = build_eta(&p, 12);
        assert_eq!(eta.len(), 20);
        assert_eq!(eta[4], 1.0);
        assert!(eta[9..].iter().all(|&v| v == 0.0));
        assert_eq!(build_eta(&p, 1).len(), 9);
    }

    #[test]
    fn window_rows_shift_right() {
        let t = build_window_matrix(&[1.0, 2.0, 3.0, 4.0], 2).unwrap();
        assert_eq!(
            t.row(0).iter().cloned().collect::<Vec<_>>(),
            vec![1.0, 2.0, 3.0, 4.0]
        );
        assert_eq!(
            t.row(1).iter().cloned().collect::<Vec<_>>(),
            vec![4.0, 1.0, 2.0, 3.0]
        );
        assert!(build_window_matrix(&[1.0, 2.0], 3).is_err());
    }

    #[test]
    fn ideal_window_selects_shifted_symbols() {
        let lg = 3;
        let l0 = 5;
        let mut eta = vec![0.0; 2 * lg + l0];
        eta[lg] = 1.0;
        let t = build_window_matrix(&eta, l0).unwrap();
        let s: Vec<f64> = (0..eta.len()).map(|i| i as f64 * 1.5 - 2.0).collect();
        let out = &t * nalgebra::DVector::from_vec(s.clone());
        for m in 0..l0 {
            assert_eq!(out[m], s[m + lg]);
        }
    }
}

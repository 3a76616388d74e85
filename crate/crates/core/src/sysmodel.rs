//! Asynchronous multi-RIS signal model.
//!
//! The cascaded channel `H_eq = blk[c_1^T, .., c_K^T] (x) I_L` and the phase
//! expansion `Theta = theta (x) I_L` are never materialized; both are carried
//! as their generating vectors. Dense expansions live in [`crate::oracle`].

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{complex_gaussian, ChannelRealization, NX};
use crate::error::{Error, Result};
use crate::linalg::{to_complex, CMat, RMat};
use crate::mm::StopMetric;
use crate::pulse::{build_eta, build_window_matrix, PulseModel};

/// Tolerance on `|theta_i| = 1` for inputs to the model.
pub const UNIT_MODULUS_TOL: f64 = 1e-9;

/// Scalar parameters of one simulated link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Number of surfaces K.
    pub k_ris: usize,
    /// Elements per surface N; must be a multiple of 4.
    pub n_elems: usize,
    /// Detection block length L0 in symbols.
    pub l0: usize,
    /// Pulse lag Lg in symbols.
    pub lg: usize,
    /// Samples per symbol.
    pub q: usize,
    pub beta: f64,
    pub snr_db: f64,
    pub sigma2: f64,
    /// Multipath components on each RIS -> destination link.
    pub np: usize,
    pub tol: f64,
    pub stop_metric: StopMetric,
    pub max_iters: usize,
    pub quant_bits: Option<u32>,
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            k_ris: 4,
            n_elems: 32,
            l0: 12,
            lg: 4,
            q: 2,
            beta: 0.3,
            snr_db: 0.0,
            sigma2: 1.0,
            np: 10,
            tol: 1e-4,
            stop_metric: StopMetric::MseBar,
            max_iters: 500,
            quant_bits: None,
            seed: 1,
        }
    }
}

impl SystemConfig {
    /// Transmitted block length `L = 2 Lg + L0`.
    pub fn l(&self) -> usize {
        2 * self.lg + self.l0
    }

    /// Symbol energy from `SNR = Es / sigma2`.
    pub fn es(&self) -> f64 {
        self.sigma2 * 10f64.powf(self.snr_db / 10.0)
    }

    pub fn ny(&self) -> usize {
        self.n_elems / NX
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.k_ris < 1 {
            return bad("k_ris must be at least 1".into());
        }
        if self.n_elems == 0 || self.n_elems % NX != 0 {
            return bad(format!(
                "n_elems = {} is not a positive multiple of {NX}",
                self.n_elems
            ));
        }
        if self.l0 < 1 || self.lg < 1 || self.q < 1 {
            return bad("l0, lg and q must be at least 1".into());
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad(format!("beta = {} outside (0, 1)", self.beta));
        }
        if !(self.sigma2 > 0.0) || !self.sigma2.is_finite() {
            return bad("sigma2 must be positive and finite".into());
        }
        if !self.snr_db.is_finite() {
            return bad("snr_db must be finite".into());
        }
        if self.np < 1 {
            return bad("np must be at least 1".into());
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive".into());
        }
        if self.max_iters < 1 {
            return bad("max_iters must be at least 1".into());
        }
        if self.quant_bits == Some(0) {
            return bad("quant_bits must be at least 1 when set".into());
        }
        Ok(())
    }

    pub fn pulse(&self) -> Result<PulseModel> {
        PulseModel::new(self.beta, self.lg, self.q)
    }

    pub fn draw_channel(&self, seed: u64) -> ChannelRealization {
        ChannelRealization::draw(seed, self.k_ris, NX, self.ny(), self.np)
    }
}

/// `A_{eps}` for one surface: `L0 Q x L`, column of symbol `i` in
/// `-Lg..L0+Lg` holds `g(m / Q - i - eps)` for `m = 0..L0 Q`.
pub fn build_delay_matrix(p: &PulseModel, eps: f64, l0: usize, lg: usize, q: usize) -> CMat {
    to_complex(&delay_matrix_real(p, eps, l0, lg, q))
}

fn delay_matrix_real(p: &PulseModel, eps: f64, l0: usize, lg: usize, q: usize) -> RMat {
    let l = 2 * lg + l0;
    RMat::from_fn(l0 * q, l, |m, c| {
        let i = c as f64 - lg as f64;
        p.sample(m as f64 / q as f64 - i - eps)
    })
}

/// Horizontal concatenation `[A_1, .., A_K]`.
pub fn assemble_a_eps(blocks: &[CMat]) -> Result<CMat> {
    let first = blocks
        .first()
        .ok_or_else(|| Error::Dimension("no delay blocks".into()))?;
    let (rows, cols) = first.shape();
    if let Some(b) = blocks.iter().find(|b| b.shape() != (rows, cols)) {
        return Err(Error::Dimension(format!(
            "delay block {:?} differs from {:?}",
            b.shape(),
            (rows, cols)
        )));
    }
    let mut out = CMat::zeros(rows, cols * blocks.len());
    for (k, b) in blocks.iter().enumerate() {
        out.view_mut((0, k * cols), (rows, cols)).copy_from(b);
    }
    Ok(out)
}

/// Structured `H_eq`: the cascaded row vectors `c_k[n] = conj(h_k[n]) f_k[n]`
/// and the block size of the identity factor.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadedChannel {
    pub rows: Vec<Vec<Complex64>>,
    pub l: usize,
}

impl CascadedChannel {
    pub fn num_ris(&self) -> usize {
        self.rows.len()
    }

    pub fn num_elements(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Per-surface gain `g_k = sum_n c_k[n] theta_{k,n}`.
    pub fn gains(&self, theta: &[Complex64]) -> Vec<Complex64> {
        let n = self.num_elements();
        self.rows
            .iter()
            .enumerate()
            .map(|(k, c)| {
                c.iter()
                    .zip(&theta[k * n..(k + 1) * n])
                    .map(|(c, t)| c * t)
                    .sum()
            })
            .collect()
    }
}

pub fn build_h_eq(ch: &ChannelRealization, l: usize) -> CascadedChannel {
    CascadedChannel {
        rows: ch.cascade(),
        l,
    }
}

/// Structured `Theta = theta (x) I_L`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaExpansion {
    pub theta: Vec<Complex64>,
    pub l: usize,
}

impl ThetaExpansion {
    /// `||Theta||_F^2 = L * sum |theta_i|^2`.
    pub fn frob2(&self) -> f64 {
        self.l as f64 * self.theta.iter().map(|t| t.norm_sqr()).sum::<f64>()
    }
}

pub fn check_unit_modulus(theta: &[Complex64]) -> Result<()> {
    for (index, t) in theta.iter().enumerate() {
        let modulus = t.norm();
        if !((modulus - 1.0).abs() <= UNIT_MODULUS_TOL) {
            return Err(Error::Constraint { index, modulus });
        }
    }
    Ok(())
}

pub fn expand_theta(theta: &[Complex64], l: usize) -> Result<ThetaExpansion> {
    check_unit_modulus(theta)?;
    Ok(ThetaExpansion {
        theta: theta.to_vec(),
        l,
    })
}

/// Everything the optimizer needs about one channel realization.
#[derive(Debug, Clone)]
pub struct SystemModel {
    pub l0: usize,
    pub lg: usize,
    pub q: usize,
    pub es: f64,
    pub sigma2: f64,
    /// Window `T(eta)`, `L0 x L`.
    pub window: CMat,
    /// `A_{eps_k}` per surface, each `L0 Q x L`.
    pub delay: Vec<CMat>,
    pub h_eq: CascadedChannel,
    pub eps: Vec<f64>,
}

impl SystemModel {
    pub fn new(cfg: &SystemConfig, pulse: &PulseModel, ch: &ChannelRealization) -> Result<Self> {
        cfg.validate()?;
        ch.validate()?;
        if ch.num_ris() != cfg.k_ris || ch.num_elements() != cfg.n_elems {
            return Err(Error::Dimension(format!(
                "channel has K={} N={}, config expects K={} N={}",
                ch.num_ris(),
                ch.num_elements(),
                cfg.k_ris,
                cfg.n_elems
            )));
        }
        Self::from_parts(
            pulse,
            &ch.eps,
            ch.cascade(),
            cfg.l0,
            cfg.q,
            cfg.es(),
            cfg.sigma2,
        )
    }

    /// Builds a model from cascaded rows directly; used for hand-made
    /// instances and the synchronized-receiver variant.
    pub fn from_parts(
        pulse: &PulseModel,
        eps: &[f64],
        cascade: Vec<Vec<Complex64>>,
        l0: usize,
        q: usize,
        es: f64,
        sigma2: f64,
    ) -> Result<Self> {
        if eps.len() != cascade.len() || cascade.is_empty() {
            return Err(Error::Dimension(
                "offsets and cascaded rows disagree".into(),
            ));
        }
        if !(sigma2 > 0.0) || !(es >= 0.0) {
            return Err(Error::Domain("need sigma2 > 0 and Es >= 0".into()));
        }
        let lg = pulse.lag();
        let l = 2 * lg + l0;
        let window = to_complex(&build_window_matrix(&build_eta(pulse, l0), l0)?);
        let delay = eps
            .iter()
            .map(|&e| build_delay_matrix(pulse, e, l0, lg, q))
            .collect();
        Ok(Self {
            l0,
            lg,
            q,
            es,
            sigma2,
            window,
            delay,
            h_eq: CascadedChannel { rows: cascade, l },
            eps: eps.to_vec(),
        })
    }

    /// Same channel and window, but every delay block built for zero offset.
    pub fn synchronized(&self, pulse: &PulseModel) -> Result<Self> {
        let zeros = vec![0.0; self.num_ris()];
        Self::from_parts(
            pulse,
            &zeros,
            self.h_eq.rows.clone(),
            self.l0,
            self.q,
            self.es,
            self.sigma2,
        )
    }

    pub fn num_ris(&self) -> usize {
        self.h_eq.num_ris()
    }

    pub fn num_elements(&self) -> usize {
        self.h_eq.num_elements()
    }

    pub fn l(&self) -> usize {
        2 * self.lg + self.l0
    }

    pub fn samples(&self) -> usize {
        self.l0 * self.q
    }

    /// Number of phase variables `N K`.
    pub fn num_phases(&self) -> usize {
        self.num_ris() * self.num_elements()
    }

    /// `MSE_0 = tr(T R_s T^H) = Es ||T||_F^2`.
    pub fn mse0(&self) -> f64 {
        self.es * self.window.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// `sum_k g_k A_k` without the `sqrt(Es)` factor.
    pub fn combined_response(&self, theta: &[Complex64]) -> CMat {
        let mut y = CMat::zeros(self.samples(), self.l());
        for (g, a) in self.h_eq.gains(theta).into_iter().zip(&self.delay) {
            y.zip_apply(a, |acc, v| *acc += g * v);
        }
        y
    }

    /// `X = A_eps H_eq Theta R_s^{1/2}`.
    pub fn effective_channel(&self, theta: &[Complex64]) -> CMat {
        self.combined_response(theta) * Complex64::new(self.es.sqrt(), 0.0)
    }

    /// `y = sum_k g_k A_k s + v` with `v ~ CN(0, sigma2 I)`.
    pub fn simulate_received<R: Rng + ?Sized>(
        &self,
        symbols: &[Complex64],
        theta: &[Complex64],
        rng: &mut R,
    ) -> Result<Vec<Complex64>> {
        check_unit_modulus(theta)?;
        if symbols.len() != self.l() {
            return Err(Error::Dimension(format!(
                "expected {} symbols, got {}",
                self.l(),
                symbols.len()
            )));
        }
        let s = nalgebra::DVector::from_column_slice(symbols);
        let clean = self.combined_response(theta) * s;
        let sd = self.sigma2.sqrt();
        Ok(clean
            .iter()
            .map(|y| y + sd * complex_gaussian(rng))
            .collect())
    }
}

/// Unit-power QPSK symbols scaled by `sqrt(es)`.
pub fn qpsk_symbols<R: Rng + ?Sized>(rng: &mut R, len: usize, es: f64) -> Vec<Complex64> {
    let a = (es / 2.0).sqrt();
    (0..len)
        .map(|_| {
            let re = if rng.random::<bool>() { a } else { -a };
            let im = if rng.random::<bool>() { a } else { -a };
            Complex64::new(re, im)
        })
        .collect()
}

/// Circular complex Gaussian symbols with variance `es`.
pub fn gaussian_symbols<R: Rng + ?Sized>(rng: &mut R, len: usize, es: f64) -> Vec<Complex64> {
    let a = es.sqrt();
    (0..len).map(|_| a * complex_gaussian(rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_cfg() -> SystemConfig {
        SystemConfig {
            k_ris: 2,
            n_elems: 4,
            l0: 2,
            lg: 1,
            q: 2,
            ..SystemConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(SystemConfig::default().validate().is_ok());
        let mut c = SystemConfig::default();
        c.n_elems = 30;
        assert!(c.validate().is_err());
        c = SystemConfig::default();
        c.quant_bits = Some(0);
        assert!(c.validate().is_err());
        assert_eq!(SystemConfig::default().l(), 20);
        let mut c = SystemConfig::default();
        c.snr_db = 10.0;
        assert!((c.es() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn delay_entries_are_pulse_samples() {
        let p = PulseModel::new(0.3, 4, 2).unwrap();
        let eps = 0.37;
        let a = build_delay_matrix(&p, eps, 12, 4, 2);
        assert_eq!(a.shape(), (24, 20));
        for m in 0..24 {
            for c in 0..20 {
                let i = c as f64 - 4.0;
                let t = m as f64 / 2.0 - i - eps;
                assert_eq!(a[(m, c)].re, p.sample(t));
                assert_eq!(a[(m, c)].im, 0.0);
                if t.abs() > 4.0 {
                    assert_eq!(a[(m, c)].re, 0.0);
                }
            }
        }
    }

    #[test]
    fn zero_offset_symbol_spaced_peaks_on_band() {
        let p = PulseModel::new(0.3, 2, 1).unwrap();
        let a = build_delay_matrix(&p, 0.0, 4, 2, 1);
        for m in 0..4 {
            // symbol i = m sits in column m + lg
            assert_eq!(a[(m, m + 2)].re, p.sample(0.0));
        }
    }

    #[test]
    fn assemble_concatenates_in_order() {
        let p = PulseModel::new(0.3, 1, 2).unwrap();
        let a1 = build_delay_matrix(&p, 0.2, 2, 1, 2);
        let a2 = build_delay_matrix(&p, -0.5, 2, 1, 2);
        let a = assemble_a_eps(&[a1.clone(), a2.clone()]).unwrap();
        assert_eq!(a.shape(), (4, 8));
        for c in 0..4 {
            assert_eq!(a.column(4 + c), a2.column(c));
            assert_eq!(a.column(c), a1.column(c));
        }
        assert_eq!(assemble_a_eps(&[a1.clone()]).unwrap(), a1);
        let bad = CMat::zeros(3, 4);
        assert!(assemble_a_eps(&[a1, bad]).is_err());
    }

    #[test]
    fn scalar_cascade() {
        let ch = ChannelRealization {
            f: vec![vec![Complex64::new(0.0, 3.0)]],
            h: vec![vec![Complex64::new(2.0, 0.0)]],
            eps: vec![0.0],
            seed: 0,
        };
        let heq = build_h_eq(&ch, 3);
        assert_eq!(heq.rows[0][0], Complex64::new(0.0, 6.0));
    }

    #[test]
    fn expand_theta_rejects_non_unit() {
        assert!(expand_theta(&[Complex64::new(1.0, 0.0)], 2).is_ok());
        let err = expand_theta(&[Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)], 2);
        assert!(matches!(err, Err(Error::Constraint { index: 1, .. })));
    }

    #[test]
    fn global_phase_rotates_effective_channel() {
        let cfg = small_cfg();
        let p = cfg.pulse().unwrap();
        let ch = cfg.draw_channel(4);
        let model = SystemModel::new(&cfg, &p, &ch).unwrap();
        let theta: Vec<Complex64> = (0..8)
            .map(|i| Complex64::from_polar(1.0, i as f64))
            .collect();
        let rot = Complex64::from_polar(1.0, 0.7);
        let turned: Vec<Complex64> = theta.iter().map(|t| t * rot).collect();
        let x = model.effective_channel(&theta);
        let xr = model.effective_channel(&turned);
        assert!((x * rot - xr).norm() < 1e-12);
    }

    #[test]
    fn noiseless_reception_matches_model() {
        let cfg = SystemConfig {
            k_ris: 1,
            sigma2: 1e-300,
            ..small_cfg()
        };
        let p = cfg.pulse().unwrap();
        let ch = cfg.draw_channel(8);
        let model = SystemModel::new(&cfg, &p, &ch).unwrap();
        let theta: Vec<Complex64> = model.h_eq.rows[0]
            .iter()
            .map(|c| Complex64::from_polar(1.0, -c.arg()))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = qpsk_symbols(&mut rng, model.l(), 1.0);
        let y = model.simulate_received(&s, &theta, &mut rng).unwrap();
        let g1: Complex64 = model.h_eq.gains(&theta)[0];
        let expect = &model.delay[0] * nalgebra::DVector::from_column_slice(&s) * g1;
        for (a, b) in y.iter().zip(expect.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!((g1.im).abs() < 1e-12 && g1.re > 0.0);
    }
}

//! MSE objective, closed-form equalizer and the majorization-minimization
//! phase design.
//!
//! With `X = A_eps H_eq Theta R_s^{1/2}`, `P = X X^H + R_v` and
//! `W = X R_s^{1/2} T^H`, the recovered-data MSE under the optimal equalizer
//! is `MSE_0 - tr(W^H P^{-1} W)`. The optimizer maximizes the second term
//! by repeatedly maximizing a linear minorizer of it over unit-modulus
//! phases. Every surrogate quantity is evaluated through the per-surface
//! blocks of `A_eps` and the cascaded rows of `H_eq`; nothing of size
//! `N K L` is formed.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::{Cholesky, Dyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    frob2, hpd_factor, inner, lambda_max_hermitian, lambda_min_hermitian, norm1, real_part, trace,
    CMat,
};
use crate::sysmodel::{check_unit_modulus, SystemModel};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Unit-modulus phase vector, flattened RIS-major (`k * N + n`).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSolution {
    pub theta: Vec<Complex64>,
    /// Bit depth when every phase sits on the `2^B`-point grid.
    pub quantized: Option<u32>,
}

impl PhaseSolution {
    pub fn new(theta: Vec<Complex64>) -> Result<Self> {
        check_unit_modulus(&theta)?;
        Ok(Self {
            theta,
            quantized: None,
        })
    }

    pub fn from_phases(phases: impl IntoIterator<Item = f64>) -> Self {
        Self {
            theta: phases
                .into_iter()
                .map(|p| Complex64::from_polar(1.0, p))
                .collect(),
            quantized: None,
        }
    }

    pub fn ones(len: usize) -> Self {
        Self {
            theta: vec![Complex64::new(1.0, 0.0); len],
            quantized: None,
        }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

fn check_finite(m: &CMat, what: &str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric(format!("{what} has non-finite entries")))
    }
}

fn covariance(x: &CMat, sigma2: f64) -> Result<Cholesky<Complex64, Dyn>> {
    let mut p = x * x.adjoint();
    for i in 0..p.nrows() {
        p[(i, i)] += sigma2;
    }
    hpd_factor(p)
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Wiener equalizer `G = T R_s^{H/2} X^H (X X^H + sigma2 I)^{-1}` with
/// `R_s = es I`; `x` already carries one `R_s^{1/2}` factor.
pub fn optimal_equalizer(x: &CMat, window: &CMat, es: f64, sigma2: f64) -> Result<CMat> {
    check_finite(x, "effective channel")?;
    if !(sigma2 > 0.0) {
        return Err(Error::Domain("noise variance must be positive".into()));
    }
    if x.ncols() != window.ncols() {
        return Err(Error::Dimension(format!(
            "X has {} columns, window has {}",
            x.ncols(),
            window.ncols()
        )));
    }
    let chol = covariance(x, sigma2)?;
    // P is Hermitian, so G^H = P^{-1} X R_s^{1/2} T^H.
    let gh = chol.solve(&(x * window.adjoint() * real(es.sqrt())));
    Ok(gh.adjoint())
}

/// Four-term MSE for an arbitrary equalizer `g`.
pub fn mse_full(model: &SystemModel, theta: &[Complex64], g: &CMat) -> Result<f64> {
    if g.shape() != (model.l0, model.samples()) {
        return Err(Error::Dimension(format!(
            "equalizer is {:?}, expected {:?}",
            g.shape(),
            (model.l0, model.samples())
        )));
    }
    let x = model.effective_channel(theta);
    let t = &model.window;
    let signal = trace(&(t * t.adjoint())) * real(model.es);
    let cross = trace(&(g * &x * t.adjoint())) * real(model.es.sqrt());
    let gx = g * &x;
    let power = trace(&(&gx * gx.adjoint()));
    let noise = trace(&(g * g.adjoint())) * real(model.sigma2);
    let total = real_part(signal, "tr(T Rs T^H)")? - 2.0 * cross.re
        + real_part(power, "tr(G X X^H G^H)")?
        + real_part(noise, "tr(G Rv G^H)")?;
    Ok(total.max(0.0))
}

/// `tr(T R_s^{H/2} X^H P^{-1} X R_s^{1/2} T^H)`, the phase-dependent part of
/// the optimally-equalized MSE.
pub fn mse_bar(model: &SystemModel, theta: &[Complex64]) -> Result<f64> {
    Ok(Linearization::at(model, theta)?.mse_bar)
}

/// `F_t = (X_t X_t^H + R_v)^{-1} X_t R_s^{1/2} T^H`.
pub fn lemma1_linearization(x_t: &CMat, model: &SystemModel) -> Result<CMat> {
    check_finite(x_t, "X_t")?;
    let chol = covariance(x_t, model.sigma2)?;
    Ok(chol.solve(&(x_t * model.window.adjoint() * real(model.es.sqrt()))))
}

/// Right side of the first-order minorizer built from `f_t`, evaluated at
/// `theta`: `2 Re tr(F_t^H W) - tr(F_t^H P F_t)`.
///
/// Equals `mse_bar(theta_t)` when `theta = theta_t` and never exceeds
/// `mse_bar(theta)`.
pub fn lemma1_bound(model: &SystemModel, f_t: &CMat, theta: &[Complex64]) -> f64 {
    let x = model.effective_channel(theta);
    let w = &x * model.window.adjoint() * real(model.es.sqrt());
    let xf = x.adjoint() * f_t;
    2.0 * inner(f_t, &w).re - frob2(&xf) - model.sigma2 * frob2(f_t)
}

/// Quantities shared by the objective and the surrogate at one point.
#[derive(Debug, Clone)]
pub struct Linearization {
    /// `X_t`, `L0 Q x L`.
    pub x: CMat,
    /// `F_t`, `L0 Q x L0`.
    pub f: CMat,
    pub mse_bar: f64,
}

impl Linearization {
    pub fn at(model: &SystemModel, theta: &[Complex64]) -> Result<Self> {
        let x = model.effective_channel(theta);
        check_finite(&x, "effective channel")?;
        let chol = covariance(&x, model.sigma2)?;
        let w = &x * model.window.adjoint() * real(model.es.sqrt());
        let f = chol.solve(&w);
        let mse_bar = real_part(inner(&w, &f), "mse_bar")?;
        Ok(Self { x, f, mse_bar })
    }
}

/// Quadratic majorizer of `tr(Z X M X^H)` around `X_t`:
/// `-2 Re tr(C^H X) + lambda ||X||_F^2 + constant`.
#[derive(Debug, Clone)]
pub struct Majorizer {
    pub lambda: f64,
    /// `C = lambda X_t - Z X_t M`.
    pub linear_coeff: CMat,
    /// `lambda ||X_t||_F^2 - tr(Z X_t M X_t^H)`.
    pub constant: f64,
}

impl Majorizer {
    pub fn bound(&self, x: &CMat) -> f64 {
        -2.0 * inner(&self.linear_coeff, x).re + self.lambda * frob2(x) + self.constant
    }
}

fn check_psd(m: &CMat, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("{what} is not square")));
    }
    let asym = (m - m.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if asym > 1e-9 * scale {
        return Err(Error::Domain(format!("{what} is not Hermitian")));
    }
    let min = lambda_min_hermitian(m);
    if min < -1e-9 {
        return Err(Error::Domain(format!(
            "{what} has negative eigenvalue {min:e}"
        )));
    }
    Ok(())
}

/// Builds the majorizer with `lambda = ||M||_1 ||Z||_1` (induced 1-norms).
pub fn lemma2_majorizer(m: &CMat, z: &CMat, x_t: &CMat) -> Result<Majorizer> {
    check_psd(m, "M")?;
    check_psd(z, "Z")?;
    if x_t.nrows() != z.nrows() || x_t.ncols() != m.nrows() {
        return Err(Error::Dimension(format!(
            "X_t is {:?}, Z is {:?}, M is {:?}",
            x_t.shape(),
            z.shape(),
            m.shape()
        )));
    }
    let lambda = norm1(m) * norm1(z);
    let zxm = z * x_t * m;
    let linear_coeff = x_t * real(lambda) - &zxm;
    let quad = real_part(inner(x_t, &zxm), "tr(Z X_t M X_t^H)")?;
    Ok(Majorizer {
        lambda,
        linear_coeff,
        constant: lambda * frob2(x_t) - quad,
    })
}

/// `U_k = A_k^H F_t` for every surface.
fn projected(model: &SystemModel, f_t: &CMat) -> Vec<CMat> {
    model.delay.iter().map(|a| a.adjoint() * f_t).collect()
}

fn lambda_from_projections(model: &SystemModel, u: &[CMat]) -> f64 {
    let rows = &model.h_eq.rows;
    let l = model.l();
    let c_norm1: Vec<f64> = rows
        .iter()
        .map(|c| c.iter().map(|v| v.norm()).sum())
        .collect();
    let c_max: Vec<f64> = rows
        .iter()
        .map(|c| c.iter().map(|v| v.norm()).fold(0.0, f64::max))
        .collect();
    // Column (k', n', l') of Z = H_eq^H A^H F F^H A H_eq has absolute sum
    // |c_k'n'| * sum_k ||c_k||_1 * sum_l |(U_k U_k'^H)[l, l']|.
    let mut best = 0.0f64;
    for (kp, ukp) in u.iter().enumerate() {
        let mut col = vec![0.0; l];
        for (k, uk) in u.iter().enumerate() {
            let s = uk * ukp.adjoint();
            for (lp, acc) in col.iter_mut().enumerate() {
                *acc += c_norm1[k] * s.column(lp).iter().map(|z| z.norm()).sum::<f64>();
            }
        }
        let peak = col.iter().cloned().fold(0.0, f64::max);
        best = best.max(c_max[kp] * peak);
    }
    model.es * best
}

/// `E_s lambda_max(Z)`, via the `L0 x L0` matrix `sum_k ||c_k||^2 U_k^H U_k`
/// that shares the nonzero spectrum of `Z`.
fn spectral_lambda(model: &SystemModel, u: &[CMat]) -> f64 {
    let l0 = u.first().map_or(0, |m| m.ncols());
    if l0 == 0 {
        return 0.0;
    }
    let mut acc = CMat::zeros(l0, l0);
    for (uk, ck) in u.iter().zip(&model.h_eq.rows) {
        let w: f64 = ck.iter().map(|c| c.norm_sqr()).sum();
        acc += uk.adjoint() * uk * real(w);
    }
    model.es * lambda_max_hermitian(&acc).max(0.0)
}

/// `lambda_t = ||R_s||_1 ||H_eq^H A^H F_t F_t^H A H_eq||_1`.
pub fn compute_lambda_t(model: &SystemModel, f_t: &CMat) -> f64 {
    lambda_from_projections(model, &projected(model, f_t))
}

/// `D_k = R_s T^H F_t^H A_k - R_s^{H/2} X_t^H F_t F_t^H A_k`, so that block
/// `(k, n)` of `B_t` is `lambda conj(theta_kn) I + c_kn D_k`.
fn surface_blocks(model: &SystemModel, lin: &Linearization, u: &[CMat]) -> Vec<CMat> {
    let th = model.window.adjoint() * real(model.es);
    let xf = lin.x.adjoint() * &lin.f * real(model.es.sqrt());
    u.iter()
        .map(|uk| {
            let uh = uk.adjoint();
            &th * &uh - &xf * &uh
        })
        .collect()
}

/// Dense `B_t` (`L x N K L`), assembled block by block.
pub fn build_b_t(model: &SystemModel, theta_t: &[Complex64], f_t: &CMat, lambda_t: f64) -> CMat {
    let lin = Linearization {
        x: model.effective_channel(theta_t),
        f: f_t.clone(),
        mse_bar: 0.0,
    };
    let u = projected(model, f_t);
    let d = surface_blocks(model, &lin, &u);
    let l = model.l();
    let n = model.num_elements();
    let mut b = CMat::zeros(l, model.num_phases() * l);
    for (k, (dk, ck)) in d.iter().zip(&model.h_eq.rows).enumerate() {
        for (j, c) in ck.iter().enumerate() {
            let mut block = dk * *c;
            for i in 0..l {
                block[(i, i)] += lambda_t * theta_t[k * n + j].conj();
            }
            b.view_mut((0, (k * n + j) * l), (l, l)).copy_from(&block);
        }
    }
    b
}

fn phase_from_trace(tr: Complex64, prev: Complex64, bits: Option<u32>) -> Complex64 {
    if tr == ZERO {
        return prev;
    }
    let phase = -tr.arg();
    match bits {
        Some(b) => quantize_one(phase, b),
        None => Complex64::from_polar(1.0, phase),
    }
}

/// `theta_{i,j} = exp(-j arg tr(B_t[i, j]))` over the `L x L` column blocks of
/// `b_t`. A zero trace keeps the previous phase.
pub fn update_theta(b_t: &CMat, prev: &[Complex64]) -> Result<PhaseSolution> {
    let l = b_t.nrows();
    if l == 0 || b_t.ncols() != prev.len() * l {
        return Err(Error::Dimension(format!(
            "B_t is {:?} but {} phases were given",
            b_t.shape(),
            prev.len()
        )));
    }
    let theta = prev
        .iter()
        .enumerate()
        .map(|(idx, &p)| {
            let tr = (0..l).map(|i| b_t[(i, idx * l + i)]).sum();
            phase_from_trace(tr, p, None)
        })
        .collect();
    Ok(PhaseSolution {
        theta,
        quantized: None,
    })
}

fn quantize_one(phase: f64, bits: u32) -> Complex64 {
    let levels = 1u64 << bits;
    let step = 2.0 * PI / levels as f64;
    let x = phase.rem_euclid(2.0 * PI) / step;
    let frac = x - x.floor();
    // exact ties go to the smaller grid angle
    let m = if (frac - 0.5).abs() < 1e-9 {
        x.floor()
    } else {
        x.round()
    };
    let m = (m as u64) % levels;
    Complex64::from_polar(1.0, m as f64 * step)
}

/// Nearest point of `{2 pi m / 2^B}` for every phase.
pub fn quantize_phases(theta: &[Complex64], bits: u32) -> PhaseSolution {
    let bits = bits.max(1);
    PhaseSolution {
        theta: theta.iter().map(|t| quantize_one(t.arg(), bits)).collect(),
        quantized: Some(bits),
    }
}

/// The MM surrogate `g_MSE(., Theta_t)` with all constants kept, so its value
/// can be compared against `mse_bar` directly.
#[derive(Debug, Clone)]
pub struct Surrogate {
    pub theta_t: Vec<Complex64>,
    pub lin: Linearization,
    pub lambda: f64,
    /// `tr(B_t[k, n])` in RIS-major order.
    pub block_traces: Vec<Complex64>,
    constant: f64,
    l: usize,
}

impl Surrogate {
    pub fn at(model: &SystemModel, theta_t: &[Complex64]) -> Result<Self> {
        Self::at_scaled(model, theta_t, 1.0)
    }

    /// As [`Surrogate::at`] with the majorizer constant multiplied by
    /// `lambda_scale`. Anything below 1 voids the minorization guarantee; the
    /// knob exists for fault injection.
    pub fn at_scaled(
        model: &SystemModel,
        theta_t: &[Complex64],
        lambda_scale: f64,
    ) -> Result<Self> {
        Self::with_bound(model, theta_t, MajorizerBound::Norm1, lambda_scale)
    }

    pub fn with_bound(
        model: &SystemModel,
        theta_t: &[Complex64],
        bound: MajorizerBound,
        lambda_scale: f64,
    ) -> Result<Self> {
        let lin = Linearization::at(model, theta_t)?;
        let u = projected(model, &lin.f);
        let lambda = match bound {
            MajorizerBound::Norm1 => lambda_from_projections(model, &u),
            MajorizerBound::Spectral => spectral_lambda(model, &u),
        } * lambda_scale;
        let d = surface_blocks(model, &lin, &u);
        let l = model.l();
        let lf = l as f64;
        let n = model.num_elements();
        let mut block_traces = Vec::with_capacity(model.num_phases());
        for (k, (dk, ck)) in d.iter().zip(&model.h_eq.rows).enumerate() {
            let td = trace(dk);
            for (j, c) in ck.iter().enumerate() {
                block_traces.push(lambda * lf * theta_t[k * n + j].conj() + c * td);
            }
        }
        let theta_norm = lf * theta_t.iter().map(|t| t.norm_sqr()).sum::<f64>();
        let xf = lin.x.adjoint() * &lin.f;
        let constant = -lambda * theta_norm + frob2(&xf) - model.sigma2 * frob2(&lin.f);
        Ok(Self {
            theta_t: theta_t.to_vec(),
            lin,
            lambda,
            block_traces,
            constant,
            l,
        })
    }

    pub fn mse_bar(&self) -> f64 {
        self.lin.mse_bar
    }

    /// `g_MSE(Theta, Theta_t)`.
    pub fn value(&self, theta: &[Complex64]) -> f64 {
        let lin: f64 = self
            .block_traces
            .iter()
            .zip(theta)
            .map(|(b, t)| (b * t).re)
            .sum();
        let norm = self.l as f64 * theta.iter().map(|t| t.norm_sqr()).sum::<f64>();
        2.0 * lin - self.lambda * norm + self.constant
    }

    /// Exact maximizer over the unit-modulus set, or over the `2^B` grid when
    /// `bits` is given.
    pub fn maximize(&self, bits: Option<u32>) -> PhaseSolution {
        PhaseSolution {
            theta: self
                .block_traces
                .iter()
                .zip(&self.theta_t)
                .map(|(&tr, &p)| phase_from_trace(tr, p, bits))
                .collect(),
            quantized: bits,
        }
    }
}

/// Which upper bound on `lambda_max(R_s^T (x) Z)` scales the quadratic term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MajorizerBound {
    /// `||R_s||_1 ||Z||_1` with induced 1-norms.
    #[default]
    Norm1,
    /// The eigenvalue itself.
    Spectral,
}

/// Quantity whose relative per-step change is compared with the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopMetric {
    /// The maximized objective `mse_bar`.
    #[default]
    MseBar,
    /// `MSE = MSE_0 - mse_bar`.
    Mse,
}

/// Stopping rule and discrete-phase settings for [`run_mm`].
#[derive(Debug, Clone, PartialEq)]
pub struct MmOptions {
    /// Relative change of `mse_bar` below which the iteration stops.
    pub tol: f64,
    pub max_iters: usize,
    pub stop: StopMetric,
    /// Project every update onto the `2^B` grid.
    pub quant_bits: Option<u32>,
    pub bound: MajorizerBound,
    /// Multiplier on the majorizer constant; 1 for the sound algorithm.
    pub lambda_scale: f64,
}

impl Default for MmOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iters: 500,
            stop: StopMetric::MseBar,
            quant_bits: None,
            bound: MajorizerBound::Norm1,
            lambda_scale: 1.0,
        }
    }
}

impl MmOptions {
    /// Tight stopping rule for runs compared against brute force.
    pub fn converged() -> Self {
        Self {
            tol: 1e-12,
            max_iters: 50_000,
            ..Self::default()
        }
    }
}

impl From<&crate::sysmodel::SystemConfig> for MmOptions {
    fn from(cfg: &crate::sysmodel::SystemConfig) -> Self {
        Self {
            tol: cfg.tol,
            max_iters: cfg.max_iters,
            stop: cfg.stop_metric,
            quant_bits: cfg.quant_bits,
            bound: MajorizerBound::Norm1,
            lambda_scale: 1.0,
        }
    }
}

/// Emitted once per evaluated iterate (including the start point).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub mse_bar: f64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub theta_final: PhaseSolution,
    /// `L0 x L0 Q` equalizer for the final phases.
    pub equalizer: CMat,
    /// `mse_bar` of every iterate, starting with the initial point.
    pub trace: Vec<f64>,
    pub mse_final: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn run_mm(
    init: &PhaseSolution,
    model: &SystemModel,
    opts: &MmOptions,
) -> Result<OptimizationResult> {
    run_mm_observed(init, model, opts, |_| {})
}

pub fn run_mm_observed(
    init: &PhaseSolution,
    model: &SystemModel,
    opts: &MmOptions,
    mut observe: impl FnMut(&IterationRecord),
) -> Result<OptimizationResult> {
    if init.len() != model.num_phases() {
        return Err(Error::Dimension(format!(
            "initial point has {} phases, model needs {}",
            init.len(),
            model.num_phases()
        )));
    }
    check_unit_modulus(&init.theta)?;
    let start = Instant::now();
    let mse0 = model.mse0();
    let mut current = match opts.quant_bits {
        Some(b) => quantize_phases(&init.theta, b),
        None => init.clone(),
    };
    let mut surrogate =
        Surrogate::with_bound(model, &current.theta, opts.bound, opts.lambda_scale)?;
    let mut trace = vec![surrogate.mse_bar()];
    observe(&IterationRecord {
        iteration: 0,
        mse_bar: surrogate.mse_bar(),
        elapsed: start.elapsed(),
    });
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        iterations += 1;
        let next = surrogate.maximize(opts.quant_bits);
        let next_surrogate =
            Surrogate::with_bound(model, &next.theta, opts.bound, opts.lambda_scale).map_err(
                |e| match e {
                    Error::Numeric(_) => Error::NonFinite {
                        iteration: iterations,
                    },
                    other => other,
                },
            )?;
        let prev = surrogate.mse_bar();
        let value = next_surrogate.mse_bar();
        if !value.is_finite() {
            return Err(Error::NonFinite {
                iteration: iterations,
            });
        }
        trace.push(value);
        observe(&IterationRecord {
            iteration: iterations,
            mse_bar: value,
            elapsed: start.elapsed(),
        });
        current = next;
        surrogate = next_surrogate;
        let (a, b) = match opts.stop {
            StopMetric::MseBar => (prev, value),
            StopMetric::Mse => (mse0 - prev, mse0 - value),
        };
        if (b - a).abs() / a.abs().max(f64::EPSILON) < opts.tol {
            converged = true;
            break;
        }
    }
    let equalizer = optimal_equalizer(&surrogate.lin.x, &model.window, model.es, model.sigma2)?;
    Ok(OptimizationResult {
        theta_final: current,
        equalizer,
        mse_final: mse0 - surrogate.mse_bar(),
        trace,
        iterations,
        converged,
    })
}

//! Dense reference implementations of the structured operators.
//!
//! Everything here materializes the Kronecker factors explicitly and is
//! only meant for small instances: cross-checking the fast path, the
//! validation suite, and brute-force searches.

use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::linalg::{frob2, kron, norm1, real_part, trace, CMat};
use crate::mm::mse_bar;
use crate::sysmodel::{assemble_a_eps, SystemModel};

fn identity(l: usize) -> CMat {
    CMat::identity(l, l)
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Block-diagonal stack of row vectors: row `k` holds `rows[k]` in columns
/// `k N .. (k + 1) N`.
fn block_rows(rows: &[Vec<Complex64>]) -> CMat {
    let k = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    let mut out = CMat::zeros(k, k * n);
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            out[(i, i * n + j)] = *v;
        }
    }
    out
}

/// `H = blk[h_1^H, .., h_K^H] (x) I_L`.
pub fn dense_h(ch: &ChannelRealization, l: usize) -> CMat {
    let rows: Vec<Vec<Complex64>> =
        ch.h.iter()
            .map(|h| h.iter().map(|v| v.conj()).collect())
            .collect();
    kron(&block_rows(&rows), &identity(l))
}

/// `F = [f_1^T, .., f_K^T]^T (x) I_L`.
pub fn dense_f(ch: &ChannelRealization, l: usize) -> CMat {
    let stacked: Vec<Complex64> = ch.f.iter().flatten().copied().collect();
    kron(
        &CMat::from_column_slice(stacked.len(), 1, &stacked),
        &identity(l),
    )
}

/// `W = blk[diag(theta_1), .., diag(theta_K)] (x) I_L`.
pub fn dense_w(theta: &[Complex64], l: usize) -> CMat {
    let d = CMat::from_diagonal(&nalgebra::DVector::from_column_slice(theta));
    kron(&d, &identity(l))
}

/// `H_eq = blk[c_1^T, .., c_K^T] (x) I_L`.
pub fn dense_h_eq(cascade: &[Vec<Complex64>], l: usize) -> CMat {
    kron(&block_rows(cascade), &identity(l))
}

/// `Theta = theta (x) I_L`.
pub fn dense_theta(theta: &[Complex64], l: usize) -> CMat {
    kron(
        &CMat::from_column_slice(theta.len(), 1, theta),
        &identity(l),
    )
}

pub fn dense_a_eps(model: &SystemModel) -> Result<CMat> {
    assemble_a_eps(&model.delay)
}

/// `A_eps H_eq Theta sqrt(Es)` by dense products.
pub fn dense_effective_channel(model: &SystemModel, theta: &[Complex64]) -> Result<CMat> {
    let a = dense_a_eps(model)?;
    let heq = dense_h_eq(&model.h_eq.rows, model.l());
    Ok(a * heq * dense_theta(theta, model.l()) * real(model.es.sqrt()))
}

/// `Z = H_eq^H A^H F F^H A H_eq`.
pub fn dense_gram(model: &SystemModel, f_t: &CMat) -> Result<CMat> {
    let aheq = dense_a_eps(model)? * dense_h_eq(&model.h_eq.rows, model.l());
    let g = f_t.adjoint() * &aheq;
    Ok(g.adjoint() * g)
}

pub fn dense_lambda(model: &SystemModel, f_t: &CMat) -> Result<f64> {
    Ok(model.es * norm1(&dense_gram(model, f_t)?))
}

/// `B_t = lambda Theta^H + R_s T^H F^H A H_eq - R_s^{H/2} X^H F F^H A H_eq`.
pub fn dense_b_t(
    model: &SystemModel,
    theta_t: &[Complex64],
    f_t: &CMat,
    lambda_t: f64,
) -> Result<CMat> {
    let l = model.l();
    let aheq = dense_a_eps(model)? * dense_h_eq(&model.h_eq.rows, l);
    let theta = dense_theta(theta_t, l);
    let x = &aheq * &theta * real(model.es.sqrt());
    let t = &model.window;
    let fa = f_t.adjoint() * &aheq;
    Ok(
        theta.adjoint() * real(lambda_t) + t.adjoint() * &fa * real(model.es)
            - x.adjoint() * f_t * &fa * real(model.es.sqrt()),
    )
}

/// `mse_bar` through an explicit inverse.
pub fn dense_mse_bar(model: &SystemModel, theta: &[Complex64]) -> Result<f64> {
    let x = dense_effective_channel(model, theta)?;
    let p = &x * x.adjoint() + identity(x.nrows()) * real(model.sigma2);
    let pinv = p
        .try_inverse()
        .ok_or_else(|| Error::Numeric("singular covariance".into()))?;
    let w = &x * model.window.adjoint() * real(model.es.sqrt());
    real_part(trace(&(w.adjoint() * pinv * w)), "dense mse_bar")
}

/// Relative Frobenius distance `||a - b|| / max(||b||, tiny)`.
pub fn rel_err(a: &CMat, b: &CMat) -> f64 {
    frob2(&(a - b)).sqrt() / frob2(b).sqrt().max(f64::MIN_POSITIVE)
}

/// Best `mse_bar` over every combination of `levels` uniformly spaced phases
/// per element. The first element is pinned to phase 0 (the objective is
/// invariant to a common rotation), so `levels^(NK - 1)` points are visited.
pub fn grid_search(model: &SystemModel, levels: usize) -> Result<(f64, Vec<Complex64>)> {
    let n = model.num_phases();
    let free = n.saturating_sub(1) as u32;
    let total = (levels as u64)
        .checked_pow(free)
        .filter(|&t| t <= 50_000_000);
    let total = total.ok_or_else(|| Error::Domain("grid too large".into()))?;
    let step = 2.0 * std::f64::consts::PI / levels as f64;
    let mut best = (f64::NEG_INFINITY, vec![]);
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let theta: Vec<Complex64> = idx
            .iter()
            .map(|&m| Complex64::from_polar(1.0, m as f64 * step))
            .collect();
        let v = mse_bar(model, &theta)?;
        if v > best.0 {
            best = (v, theta);
        }
        for d in idx.iter_mut().skip(1) {
            *d += 1;
            if *d < levels {
                break;
            }
            *d = 0;
        }
    }
    Ok(best)
}

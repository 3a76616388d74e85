use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;

use crate::error::Result;
use crate::linalg::CMat;
use crate::sysmodel::{qpsk_symbols, SystemModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub draws: usize,
}

/// Sample mean of `||G y - T s||^2` over `draws` independent QPSK blocks
/// and noise vectors pushed through [`SystemModel::simulate_received`].
pub fn empirical_mse<R: Rng + ?Sized>(
    model: &SystemModel,
    theta: &[Complex64],
    g: &CMat,
    draws: usize,
    rng: &mut R,
) -> Result<MonteCarloEstimate> {
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..draws {
        let s = qpsk_symbols(rng, model.l(), model.es);
        let y = model.simulate_received(&s, theta, rng)?;
        let err = g * DVector::from_vec(y) - &model.window * DVector::from_vec(s);
        let e = err.norm_squared();
        sum += e;
        sum_sq += e * e;
    }
    let n = draws as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(MonteCarloEstimate {
        mean,
        stderr: (var / n).sqrt(),
        draws,
    })
}

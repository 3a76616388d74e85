//! Seeded channel generation for the source -> RIS -> destination links.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Elements along the horizontal axis of every surface.
pub const NX: usize = 4;

/// One draw of every per-surface channel plus the timing offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    /// Source -> RIS k, one length-N vector per surface.
    pub f: Vec<Vec<Complex64>>,
    /// Destination -> RIS k.
    pub h: Vec<Vec<Complex64>>,
    /// Cascaded timing offsets in symbol units, each in (-1, 1).
    pub eps: Vec<f64>,
    pub seed: u64,
}

impl ChannelRealization {
    /// Draws `k` surfaces of `nx * ny` elements. All `f` are drawn first,
    /// then all `h`, then the offsets, from a single stream keyed by `seed`.
    pub fn draw(seed: u64, k: usize, nx: usize, ny: usize, num_paths: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = (0..k).map(|_| draw_los_channel(&mut rng, nx, ny)).collect();
        let h = (0..k)
            .map(|_| draw_multipath_channel(&mut rng, nx, ny, num_paths))
            .collect();
        let eps = draw_offsets(&mut rng, k);
        Self { f, h, eps, seed }
    }

    pub fn num_ris(&self) -> usize {
        self.f.len()
    }

    pub fn num_elements(&self) -> usize {
        self.f.first().map_or(0, Vec::len)
    }

    /// Cascaded coefficients `conj(h_k[n]) * f_k[n]` per surface.
    pub fn cascade(&self) -> Vec<Vec<Complex64>> {
        self.h
            .iter()
            .zip(&self.f)
            .map(|(h, f)| h.iter().zip(f).map(|(h, f)| h.conj() * f).collect())
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.f.len();
        if k == 0 || self.h.len() != k || self.eps.len() != k {
            return Err(Error::Dimension(format!(
                "{} f vectors, {} h vectors, {} offsets",
                self.f.len(),
                self.h.len(),
                self.eps.len()
            )));
        }
        let n = self.num_elements();
        if self.f.iter().chain(&self.h).any(|v| v.len() != n) || n == 0 {
            return Err(Error::Dimension(
                "per-surface vectors differ in length".into(),
            ));
        }
        if let Some(e) = self.eps.iter().find(|e| !(e.abs() < 1.0)) {
            return Err(Error::Domain(format!("timing offset {e} outside (-1, 1)")));
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Numeric(format!("serializing channel: {e}")))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ch: Self = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        ch.validate()?;
        Ok(ch)
    }
}

pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * FRAC_1_SQRT_2
}

fn draw_angles<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let azimuth = rng.random_range(0.0..2.0 * PI);
    let elevation = rng.random_range(-PI / 2.0..PI / 2.0);
    (azimuth, elevation)
}

/// Half-wavelength uniform rectangular array response, unit norm.
///
/// Element `(p, q)` sits at flat index `p * ny + q`.
pub fn ura_steering(azimuth: f64, elevation: f64, nx: usize, ny: usize) -> Vec<Complex64> {
    let n = nx * ny;
    let scale = 1.0 / (n as f64).sqrt();
    let ux = elevation.sin() * azimuth.cos();
    let uy = elevation.sin() * azimuth.sin();
    let mut out = Vec::with_capacity(n);
    for p in 0..nx {
        for q in 0..ny {
            let phase = PI * (p as f64 * ux + q as f64 * uy);
            out.push(Complex64::from_polar(scale, phase));
        }
    }
    out
}

/// Rank-one line-of-sight channel `sqrt(N) * lambda * alpha(az, el)`.
pub fn draw_los_channel<R: Rng + ?Sized>(rng: &mut R, nx: usize, ny: usize) -> Vec<Complex64> {
    let gain = complex_gaussian(rng);
    let (az, el) = draw_angles(rng);
    let amp = ((nx * ny) as f64).sqrt() * gain;
    ura_steering(az, el, nx, ny)
        .into_iter()
        .map(|a| amp * a)
        .collect()
}

/// Multipath channel with `h^H = sqrt(N / Np) * sum_l lambda_l * alpha_l^H`.
pub fn draw_multipath_channel<R: Rng + ?Sized>(
    rng: &mut R,
    nx: usize,
    ny: usize,
    num_paths: usize,
) -> Vec<Complex64> {
    let n = nx * ny;
    let scale = (n as f64 / num_paths.max(1) as f64).sqrt();
    let mut h = vec![Complex64::new(0.0, 0.0); n];
    for _ in 0..num_paths.max(1) {
        let gain = complex_gaussian(rng);
        let (az, el) = draw_angles(rng);
        // conj of (lambda * alpha^H) gives the column vector h.
        for (hn, a) in h.iter_mut().zip(ura_steering(az, el, nx, ny)) {
            *hn += scale * gain.conj() * a;
        }
    }
    h
}

/// I.i.d. offsets uniform on the open interval (-1, 1).
pub fn draw_offsets<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    (0..k)
        .map(|_| loop {
            let e: f64 = rng.random_range(-1.0..1.0);
            if e > -1.0 {
                break e;
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(v: &[Complex64]) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn broadside_is_flat() {
        let a = ura_steering(1.3, 0.0, 4, 8);
        let expect = 1.0 / 32f64.sqrt();
        assert!(a
            .iter()
            .all(|z| (z.re - expect).abs() < 1e-15 && z.im.abs() < 1e-15));
    }

    #[test]
    fn steering_unit_norm() {
        for &(az, el) in &[(0.0, 0.3), (2.0, -1.2), (5.9, 1.5)] {
            assert!((norm(&ura_steering(az, el, 4, 8)) - 1.0).abs() < 1e-12);
        }
        let single = ura_steering(0.7, 0.4, 1, 1);
        assert!((single[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn los_channel_is_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = draw_los_channel(&mut rng, 4, 2);
        // all entries share the same modulus sqrt(N)|lambda|/sqrt(N)
        let m0 = f[0].norm();
        assert!(f.iter().all(|z| (z.norm() - m0).abs() < 1e-12));
        // ratios to element 0 are pure phases of a steering vector
        let a: Vec<Complex64> = f.iter().map(|z| z / f[0] / 8f64.sqrt()).collect();
        assert!((norm(&a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_path_matches_los_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = draw_multipath_channel(&mut rng, 4, 1, 1);
        let m0 = h[0].norm();
        assert!(h.iter().all(|z| (z.norm() - m0).abs() < 1e-12));
    }

    #[test]
    fn draws_are_deterministic() {
        let a = ChannelRealization::draw(42, 3, 4, 2, 10);
        let b = ChannelRealization::draw(42, 3, 4, 2, 10);
        assert_eq!(a, b);
        let c = ChannelRealization::draw(43, 3, 4, 2, 10);
        assert_ne!(a, c);
    }

    #[test]
    fn multipath_energy_mean_is_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 20_000;
        let e: Vec<f64> = (0..draws)
            .map(|_| norm(&draw_multipath_channel(&mut rng, 4, 2, 10)).powi(2))
            .collect();
        let mean = e.iter().sum::<f64>() / draws as f64;
        let var = e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        let se = (var / draws as f64).sqrt();
        assert!((mean - 8.0).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn los_energy_mean_is_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let draws = 20_000;
        let mean = (0..draws)
            .map(|_| norm(&draw_los_channel(&mut rng, 4, 4)).powi(2))
            .sum::<f64>()
            / draws as f64;
        // |lambda|^2 is Exp(1): se = N / sqrt(draws)
        assert!((mean - 16.0).abs() < 3.0 * 16.0 / (draws as f64).sqrt());
    }

    #[test]
    fn offsets_in_open_interval_with_zero_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let e = draw_offsets(&mut rng, 100_000);
        assert!(e.iter().all(|x| x.abs() < 1.0));
        let mean = e.iter().sum::<f64>() / e.len() as f64;
        assert!(mean.abs() < 0.01);
    }

    #[test]
    fn fixture_roundtrip() {
        let ch = ChannelRealization::draw(7, 2, 4, 1, 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ch.json");
        ch.save(&path).unwrap();
        assert_eq!(ChannelRealization::load(&path).unwrap(), ch);
    }
}

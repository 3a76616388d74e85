//! Property suite run at desk-scale dimensions. Each property is checked
//! against an independent route (dense Kronecker algebra, eigen-solvers,
//! brute force or Monte Carlo) and reported once with its worst margin.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::montecarlo::empirical_mse;
use super::sweep::derive_seed;
use crate::baselines::perfect_sync_alignment;
use crate::channel::{complex_gaussian, ChannelRealization};
use crate::error::Result;
use crate::linalg::{frob2, lambda_max_hermitian, CMat};
use crate::mm::{
    build_b_t, lemma1_bound, lemma2_majorizer, mse_bar, mse_full, optimal_equalizer, run_mm,
    MmOptions, PhaseSolution, Surrogate,
};
use crate::oracle;
use crate::pulse::PulseModel;
use crate::sysmodel::SystemModel;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateOptions {
    pub seed: u64,
    /// Random instances per property.
    pub instances: usize,
    /// Symbol/noise draws per Monte-Carlo comparison.
    pub mc_draws: usize,
    /// Multiplier on every majorizer constant used by the optimizer paths.
    /// Values other than 1 are fault injection.
    pub lambda_scale: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            instances: 20,
            mc_draws: 20_000,
            lambda_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub properties: Vec<PropertyOutcome>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyOutcome> {
        self.properties.iter().find(|p| p.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.properties {
            writeln!(
                f,
                "[{}] {:<28} measured {:>12.4e}  threshold {:>10.3e}  {}",
                if p.passed { "PASS" } else { "FAIL" },
                p.name,
                p.measured,
                p.threshold,
                p.detail
            )?;
        }
        Ok(())
    }
}

/// Seeded small instance with `nx = n`, `ny = 1`, three paths, and
/// unconstrained element count.
pub fn small_instance(
    seed: u64,
    n: usize,
    k: usize,
    l0: usize,
    lg: usize,
    q: usize,
    snr_db: f64,
) -> Result<(ChannelRealization, SystemModel)> {
    let pulse = PulseModel::new(0.3, lg, q)?;
    let ch = ChannelRealization::draw(seed, k, n, 1, 3);
    let es = 10f64.powf(snr_db / 10.0);
    let model = SystemModel::from_parts(&pulse, &ch.eps, ch.cascade(), l0, q, es, 1.0)?;
    Ok((ch, model))
}

fn random_theta<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI)))
        .collect()
}

fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let rank = rng.random_range(1..=n);
    let a = random_matrix(rng, n, rank);
    &a * a.adjoint()
}

struct Suite {
    opts: ValidateOptions,
    out: Vec<PropertyOutcome>,
}

impl Suite {
    fn rng(&self, stream: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(derive_seed(self.opts.seed, stream, 0))
    }

    fn instance(&self, stream: u64, i: usize) -> Result<(ChannelRealization, SystemModel)> {
        small_instance(
            derive_seed(self.opts.seed, stream, i as u64 + 1),
            2,
            2,
            2,
            1,
            2,
            5.0,
        )
    }

    fn push_max(&mut self, name: &'static str, worst: f64, threshold: f64, detail: &str) {
        self.out.push(PropertyOutcome {
            name,
            passed: worst <= threshold,
            measured: worst,
            threshold,
            detail: detail.to_string(),
        });
    }

    fn pulse(&mut self) -> Result<()> {
        let p = PulseModel::new(0.3, 4, 2)?;
        let mut worst_even = 0.0f64;
        let mut leak = 0.0f64;
        for tau in 1..=8 {
            worst_even = worst_even.max((p.autocorrelation(tau) - p.autocorrelation(-tau)).abs());
            leak = leak.max(p.autocorrelation(tau).abs());
        }
        let norm_err = (p.autocorrelation(0) - 1.0).abs();
        let ok = worst_even == 0.0 && norm_err <= 1e-12;
        self.out.push(PropertyOutcome {
            name: "pulse_autocorrelation",
            passed: ok && leak <= 0.05,
            measured: leak,
            threshold: 0.05,
            detail: format!(
                "max off-peak |R_g|; R_g(0) error {norm_err:.1e}, evenness {worst_even:.1e}"
            ),
        });
        Ok(())
    }

    fn model_equivalence(&mut self) -> Result<()> {
        let mut rng = self.rng(1);
        let (mut worst_hwf, mut worst_fast) = (0.0f64, 0.0f64);
        for i in 0..self.opts.instances {
            let (ch, model) = self.instance(1, i)?;
            let l = model.l();
            let theta = random_theta(&mut rng, model.num_phases());
            let hwf =
                oracle::dense_h(&ch, l) * oracle::dense_w(&theta, l) * oracle::dense_f(&ch, l);
            let heq = oracle::dense_h_eq(&ch.cascade(), l) * oracle::dense_theta(&theta, l);
            worst_hwf = worst_hwf.max(oracle::rel_err(&hwf, &heq));
            let dense = oracle::dense_effective_channel(&model, &theta)?;
            worst_fast = worst_fast.max(oracle::rel_err(&model.effective_channel(&theta), &dense));
        }
        self.push_max(
            "model_equivalence",
            worst_hwf,
            1e-12,
            "rel. Frobenius |HWF - H_eq Theta|",
        );
        self.push_max(
            "structured_effective_channel",
            worst_fast,
            1e-12,
            "rel. Frobenius vs dense A H_eq Theta",
        );
        Ok(())
    }

    fn structured_surrogate(&mut self) -> Result<()> {
        let mut rng = self.rng(2);
        let (mut worst_b, mut worst_lam) = (0.0f64, 0.0f64);
        for i in 0..self.opts.instances {
            let (_, model) = self.instance(2, i)?;
            let theta = random_theta(&mut rng, model.num_phases());
            let s = Surrogate::at(&model, &theta)?;
            let dense_lambda = oracle::dense_lambda(&model, &s.lin.f)?;
            worst_lam = worst_lam.max((s.lambda - dense_lambda).abs() / dense_lambda.max(1e-300));
            let b = build_b_t(&model, &theta, &s.lin.f, s.lambda);
            let bd = oracle::dense_b_t(&model, &theta, &s.lin.f, s.lambda)?;
            worst_b = worst_b.max(oracle::rel_err(&b, &bd));
        }
        self.push_max(
            "structured_lambda",
            worst_lam,
            1e-10,
            "rel. error vs dense Gram 1-norm",
        );
        self.push_max(
            "structured_b_t",
            worst_b,
            1e-10,
            "rel. Frobenius vs dense B_t",
        );
        Ok(())
    }

    fn equalizer(&mut self) -> Result<()> {
        let mut rng = self.rng(3);
        let mut min_gain = f64::INFINITY;
        let mut worst_identity = 0.0f64;
        for i in 0..self.opts.instances {
            let (_, model) = self.instance(3, i)?;
            let theta = random_theta(&mut rng, model.num_phases());
            let x = model.effective_channel(&theta);
            let g = optimal_equalizer(&x, &model.window, model.es, model.sigma2)?;
            let base = mse_full(&model, &theta, &g)?;
            worst_identity =
                worst_identity.max((base + mse_bar(&model, &theta)? - model.mse0()).abs());
            for _ in 0..100 {
                let d = random_matrix(&mut rng, g.nrows(), g.ncols());
                let d = &d * Complex64::new(1e-3 / frob2(&d).sqrt(), 0.0);
                min_gain = min_gain.min(mse_full(&model, &theta, &(&g + d))? - base);
            }
        }
        self.out.push(PropertyOutcome {
            name: "equalizer_stationarity",
            passed: min_gain > 0.0,
            measured: min_gain,
            threshold: 0.0,
            detail: "min MSE increase under |dG|_F = 1e-3 (must be > 0)".into(),
        });
        self.push_max(
            "mse_decomposition",
            worst_identity,
            1e-9,
            "|MSE(G*) + mse_bar - MSE_0|",
        );
        Ok(())
    }

    fn lemma1(&mut self) -> Result<()> {
        let mut rng = self.rng(4);
        let mut worst = f64::NEG_INFINITY;
        let mut tangency = 0.0f64;
        for i in 0..self.opts.instances {
            let (_, model) = self.instance(4, i)?;
            let theta_t = random_theta(&mut rng, model.num_phases());
            let s = Surrogate::at(&model, &theta_t)?;
            tangency = tangency.max((lemma1_bound(&model, &s.lin.f, &theta_t) - s.mse_bar()).abs());
            for _ in 0..50 {
                let theta = random_theta(&mut rng, model.num_phases());
                worst =
                    worst.max(lemma1_bound(&model, &s.lin.f, &theta) - mse_bar(&model, &theta)?);
            }
        }
        self.out.push(PropertyOutcome {
            name: "lemma1_minorizer",
            passed: worst <= 1e-9 && tangency <= 1e-9,
            measured: worst,
            threshold: 1e-9,
            detail: format!("max(bound - mse_bar); tangency gap {tangency:.1e}"),
        });
        Ok(())
    }

    fn lemma2(&mut self) -> Result<()> {
        let mut rng = self.rng(5);
        let mut worst = f64::NEG_INFINITY;
        let mut tangency = 0.0f64;
        let mut worst_eig = f64::NEG_INFINITY;
        for _ in 0..self.opts.instances.max(1) * 5 {
            let (rows, cols) = (rng.random_range(1..=4), rng.random_range(1..=4));
            let m = random_psd(&mut rng, cols);
            let z = random_psd(&mut rng, rows);
            let x_t = random_matrix(&mut rng, rows, cols);
            let mut maj = lemma2_majorizer(&m, &z, &x_t)?;
            maj.lambda *= self.opts.lambda_scale;
            maj.linear_coeff = &x_t * Complex64::new(maj.lambda, 0.0) - &z * &x_t * &m;
            maj.constant =
                maj.lambda * frob2(&x_t) - crate::linalg::inner(&x_t, &(&z * &x_t * &m)).re;
            let f = |x: &CMat| crate::linalg::inner(x, &(&z * x * &m)).re;
            tangency = tangency.max((maj.bound(&x_t) - f(&x_t)).abs());
            for _ in 0..20 {
                let x = random_matrix(&mut rng, rows, cols);
                let scale = 1.0 + f(&x).abs();
                worst = worst.max((f(&x) - maj.bound(&x)) / scale);
            }
            let eig = lambda_max_hermitian(&m) * lambda_max_hermitian(&z);
            worst_eig = worst_eig.max(eig - maj.lambda);
        }
        self.out.push(PropertyOutcome {
            name: "lemma2_majorizer",
            passed: worst <= 1e-9 && tangency <= 1e-9 && worst_eig <= 1e-9,
            measured: worst,
            threshold: 1e-9,
            detail: format!(
                "max rel(f - bound); tangency {tangency:.1e}; max(lmax(M)lmax(Z) - lambda) {worst_eig:.1e}"
            ),
        });
        Ok(())
    }

    fn majorizer_constant(&mut self) -> Result<()> {
        let mut rng = self.rng(6);
        let mut worst_rel = 0.0f64;
        let mut worst_eig = f64::NEG_INFINITY;
        for i in 0..self.opts.instances {
            let (_, model) = self.instance(6, i)?;
            let theta = random_theta(&mut rng, model.num_phases());
            let s = Surrogate::at_scaled(&model, &theta, self.opts.lambda_scale)?;
            let gram = oracle::dense_gram(&model, &s.lin.f)?;
            let expect = model.es * crate::linalg::norm1(&gram);
            worst_rel = worst_rel.max((s.lambda - expect).abs() / expect.max(1e-300));
            worst_eig = worst_eig.max(model.es * lambda_max_hermitian(&gram) - s.lambda);
        }
        self.out.push(PropertyOutcome {
            name: "majorizer_constant",
            passed: worst_rel <= 1e-10 && worst_eig <= 1e-9,
            measured: worst_rel,
            threshold: 1e-10,
            detail: format!(
                "rel. error vs ||R_s||_1 ||Z||_1; max(Es lmax(Z) - lambda_t) {worst_eig:.1e}"
            ),
        });
        Ok(())
    }

    fn surrogate(&mut self) -> Result<()> {
        let mut rng = self.rng(7);
        let mut worst = f64::NEG_INFINITY;
        let mut tangency = 0.0f64;
        for i in 0..self.opts.instances {
            let (_, model) = self.instance(7, i)?;
            let theta_t = random_theta(&mut rng, model.num_phases());
            let s = Surrogate::at_scaled(&model, &theta_t, self.opts.lambda_scale)?;
            tangency = tangency.max((s.value(&theta_t) - s.mse_bar()).abs());
            for _ in 0..50 {
                let theta = random_theta(&mut rng, model.num_phases());
                worst = worst.max(s.value(&theta) - mse_bar(&model, &theta)?);
            }
        }
        self.out.push(PropertyOutcome {
            name: "surrogate_soundness",
            passed: worst <= 1e-9 && tangency <= 1e-9,
            measured: worst,
            threshold: 1e-9,
            detail: format!("max(g_MSE - mse_bar); tangency gap {tangency:.1e}"),
        });
        Ok(())
    }

    fn convergence(&mut self) -> Result<()> {
        let mut rng = self.rng(8);
        let mut worst_drop = f64::NEG_INFINITY;
        let mut worst_chain = f64::NEG_INFINITY;
        let opts = MmOptions {
            lambda_scale: self.opts.lambda_scale,
            ..MmOptions::default()
        };
        for i in 0..self.opts.instances {
            let (_, model) = self.instance(8, i)?;
            let init = PhaseSolution::new(random_theta(&mut rng, model.num_phases()))?;
            let res = run_mm(&init, &model, &opts)?;
            for w in res.trace.windows(2) {
                worst_drop = worst_drop.max(w[0] - w[1]);
            }
            // replay the iterates to check every link of the sandwich chain
            let mut theta = init.theta.clone();
            for _ in 0..res.iterations.min(25) {
                let s = Surrogate::at_scaled(&model, &theta, self.opts.lambda_scale)?;
                let next = s.maximize(None).theta;
                let g_next = s.value(&next);
                let g_prev = s.value(&theta);
                let links = [
                    g_next - mse_bar(&model, &next)?,
                    g_prev - g_next,
                    (g_prev - s.mse_bar()).abs(),
                ];
                worst_chain = links.iter().cloned().fold(worst_chain, f64::max);
                theta = next;
            }
        }
        self.push_max(
            "monotone_convergence",
            worst_drop,
            1e-9,
            "max per-step decrease of mse_bar",
        );
        self.push_max(
            "sandwich_chain",
            worst_chain,
            1e-9,
            "max violation over the three chain links",
        );
        Ok(())
    }

    fn monte_carlo(&mut self) -> Result<()> {
        let mut rng = self.rng(9);
        let mut worst = 0.0f64;
        for i in 0..self.opts.instances.min(3) {
            let (ch, model) = self.instance(9, i)?;
            let theta = perfect_sync_alignment(&ch).theta;
            let x = model.effective_channel(&theta);
            let g = optimal_equalizer(&x, &model.window, model.es, model.sigma2)?;
            let analytic = mse_full(&model, &theta, &g)?;
            let est = empirical_mse(&model, &theta, &g, self.opts.mc_draws, &mut rng)?;
            worst = worst.max((est.mean - analytic).abs() / est.stderr);
        }
        self.push_max(
            "analytic_vs_empirical",
            worst,
            3.0,
            "max |MC - analytic| in standard errors",
        );
        Ok(())
    }

    fn brute_force(&mut self) -> Result<()> {
        let mut rng = self.rng(10);
        let mut worst = f64::INFINITY;
        let opts = MmOptions {
            lambda_scale: self.opts.lambda_scale,
            ..MmOptions::converged()
        };
        for i in 0..self.opts.instances.min(10) {
            let seed = derive_seed(self.opts.seed, 10, i as u64 + 1);
            let (_, model) = small_instance(seed, 2, 1, 2, 1, 2, 5.0)?;
            let (best, _) = oracle::grid_search(&model, 64)?;
            let init = PhaseSolution::new(random_theta(&mut rng, model.num_phases()))?;
            let res = run_mm(&init, &model, &opts)?;
            worst = worst.min(res.trace.last().copied().unwrap_or(0.0) / best);
        }
        self.out.push(PropertyOutcome {
            name: "grid_near_optimality",
            passed: worst >= 0.999,
            measured: worst,
            threshold: 0.999,
            detail: "min MM / 64-level grid optimum (must be >= threshold)".into(),
        });
        Ok(())
    }
}

/// Runs every property once and collects the outcomes.
pub fn validate(opts: &ValidateOptions) -> Result<ValidationReport> {
    let mut suite = Suite {
        opts: opts.clone(),
        out: Vec::new(),
    };
    suite.pulse()?;
    suite.model_equivalence()?;
    suite.structured_surrogate()?;
    suite.equalizer()?;
    suite.lemma1()?;
    suite.lemma2()?;
    suite.majorizer_constant()?;
    suite.surrogate()?;
    suite.convergence()?;
    suite.monte_carlo()?;
    suite.brute_force()?;
    Ok(ValidationReport {
        properties: suite.out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(lambda_scale: f64) -> ValidationReport {
        validate(&ValidateOptions {
            instances: 4,
            mc_draws: 4_000,
            lambda_scale,
            ..ValidateOptions::default()
        })
        .unwrap()
    }

    #[test]
    fn default_suite_passes() {
        let r = quick(1.0);
        assert!(r.all_passed(), "{r}");
    }

    #[test]
    fn properties_listed_once() {
        let r = quick(1.0);
        let mut names: Vec<_> = r.properties.iter().map(|p| p.name).collect();
        let n = names.len();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), n);
        assert_eq!(n, 15);
    }

    #[test]
    fn halved_lambda_is_caught() {
        let r = quick(0.5);
        assert!(!r.get("majorizer_constant").unwrap().passed);
        assert!(!r.all_passed());
    }
}

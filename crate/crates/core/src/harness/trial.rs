use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, InitStrategy};
use super::sweep::derive_seed;
use crate::baselines::{perfect_sync_alignment, random_phases, sync_naive_equalizer};
use crate::error::{Error, Result};
use crate::mm::{mse_full, optimal_equalizer, quantize_phases, run_mm, MmOptions, PhaseSolution};
use crate::pulse::PulseModel;
use crate::sysmodel::{SystemConfig, SystemModel};

/// Stream index for the random-phase baseline within a trial.
const RANDOM_STREAM: u64 = 0x5eed_0001;
const INIT_STREAM: u64 = 0x5eed_0002;
const RESTART_STREAM: u64 = 0x5eed_0003;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// The MM phase design with the optimal equalizer.
    Mm,
    /// Perfect-synchronization alignment with the optimal equalizer.
    Sync,
    /// Perfect-synchronization alignment with an equalizer that also
    /// assumes zero offsets.
    SyncNaiveEq,
    /// Uniform random phases with the optimal equalizer.
    Random,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Mm,
        Scheme::Sync,
        Scheme::SyncNaiveEq,
        Scheme::Random,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Scheme::Mm => "mm",
            Scheme::Sync => "sync",
            Scheme::SyncNaiveEq => "sync_naive_eq",
            Scheme::Random => "random",
        }
    }

    pub fn continuous(self) -> SchemeKey {
        SchemeKey {
            scheme: self,
            bits: None,
        }
    }

    pub fn quantized(self, bits: u32) -> SchemeKey {
        SchemeKey {
            scheme: self,
            bits: Some(bits),
        }
    }

    /// Whether the scheme is also evaluated on quantized phases.
    fn has_discrete_variant(self) -> bool {
        matches!(self, Scheme::Mm | Scheme::Sync)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.id() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown scheme {s:?}")))
    }
}

/// A scheme at a given phase resolution (`None` = continuous).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SchemeKey {
    pub scheme: Scheme,
    pub bits: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutcome {
    pub key: SchemeKey,
    pub mse: f64,
    /// MM iterations; 0 for the closed-form schemes.
    pub iterations: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub seed: u64,
    pub outcomes: Vec<SchemeOutcome>,
}

impl TrialRecord {
    pub fn get(&self, scheme: Scheme, bits: Option<u32>) -> Option<&SchemeOutcome> {
        self.outcomes
            .iter()
            .find(|o| o.key == SchemeKey { scheme, bits })
    }
}

/// Scheme/resolution pairs a trial evaluates, in output order.
pub(super) fn scheme_keys(cfg: &ExperimentConfig) -> Vec<SchemeKey> {
    let mut schemes = cfg.schemes.clone();
    schemes.sort();
    schemes.dedup();
    let mut bits = cfg.bits.clone();
    bits.sort();
    bits.dedup();
    let mut keys = Vec::new();
    for s in schemes {
        keys.push(SchemeKey {
            scheme: s,
            bits: None,
        });
        if s.has_discrete_variant() {
            keys.extend(bits.iter().map(|&b| SchemeKey {
                scheme: s,
                bits: Some(b),
            }));
        }
    }
    keys
}

fn optimal_mse(model: &SystemModel, theta: &PhaseSolution) -> Result<f64> {
    let x = model.effective_channel(&theta.theta);
    let g = optimal_equalizer(&x, &model.window, model.es, model.sigma2)?;
    mse_full(model, &theta.theta, &g)
}

fn evaluate(
    key: SchemeKey,
    cfg: &ExperimentConfig,
    system: &SystemConfig,
    pulse: &PulseModel,
    model: &SystemModel,
    baseline: &PhaseSolution,
    seed: u64,
) -> Result<(f64, usize)> {
    let maybe_quantized = |theta: &PhaseSolution| match key.bits {
        Some(b) => quantize_phases(&theta.theta, b),
        None => theta.clone(),
    };
    match key.scheme {
        Scheme::Mm => {
            let init = match cfg.init {
                InitStrategy::Baseline => baseline.clone(),
                InitStrategy::Random => {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, INIT_STREAM, 0));
                    random_phases(&mut rng, model.num_phases())
                }
            };
            let opts = MmOptions {
                quant_bits: key.bits,
                ..MmOptions::from(system)
            };
            let res = run_mm(&init, model, &opts)?;
            let mut best = mse_full(model, &res.theta_final.theta, &res.equalizer)?;
            let mut iterations = res.iterations;
            let n = model.num_elements();
            for r in 0..cfg.restarts {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(seed, RESTART_STREAM, r as u64));
                let rot = random_phases(&mut rng, model.num_ris());
                let theta = baseline
                    .theta
                    .iter()
                    .enumerate()
                    .map(|(i, t)| t * rot.theta[i / n])
                    .collect();
                let res = run_mm(&PhaseSolution::new(theta)?, model, &opts)?;
                iterations += res.iterations;
                best = best.min(mse_full(model, &res.theta_final.theta, &res.equalizer)?);
            }
            Ok((best, iterations))
        }
        Scheme::Sync => Ok((optimal_mse(model, &maybe_quantized(baseline))?, 0)),
        Scheme::SyncNaiveEq => {
            let g = sync_naive_equalizer(model, pulse, &baseline.theta)?;
            Ok((mse_full(model, &baseline.theta, &g)?, 0))
        }
        Scheme::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, RANDOM_STREAM, 0));
            let theta = random_phases(&mut rng, model.num_phases());
            Ok((optimal_mse(model, &theta)?, 0))
        }
    }
}

/// One channel draw evaluated under every configured scheme. Deterministic
/// in `trial_seed`.
pub fn run_trial(cfg: &ExperimentConfig, trial_seed: u64) -> Result<TrialRecord> {
    let pulse = cfg.system.pulse()?;
    run_trial_with(cfg, &cfg.system, &pulse, trial_seed)
}

pub(super) fn run_trial_with(
    cfg: &ExperimentConfig,
    system: &SystemConfig,
    pulse: &PulseModel,
    trial_seed: u64,
) -> Result<TrialRecord> {
    let wrap = |e: Error| Error::Trial {
        seed: trial_seed,
        source: Box::new(e),
    };
    let channel = system.draw_channel(trial_seed);
    let model = SystemModel::new(system, pulse, &channel).map_err(wrap)?;
    let baseline = perfect_sync_alignment(&channel);
    let mut outcomes = Vec::new();
    for key in scheme_keys(cfg) {
        let start = Instant::now();
        let (mse, iterations) =
            evaluate(key, cfg, system, pulse, &model, &baseline, trial_seed).map_err(wrap)?;
        let wall_ms = if cfg.timing {
            start.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        };
        outcomes.push(SchemeOutcome {
            key,
            mse,
            iterations,
            wall_ms,
        });
    }
    Ok(TrialRecord {
        seed: trial_seed,
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::snr_sweep();
        cfg.system.n_elems = 8;
        cfg.system.k_ris = 3;
        cfg
    }

    #[test]
    fn deterministic_and_complete() {
        let cfg = quick();
        let a = run_trial(&cfg, 99).unwrap();
        let b = run_trial(&cfg, 99).unwrap();
        assert_eq!(a, b);
        // mm, mm/2, sync, sync/2, sync_naive_eq, random
        assert_eq!(a.outcomes.len(), 6);
        assert_eq!(a.outcomes.len(), scheme_keys(&cfg).len());
    }

    #[test]
    fn mm_no_worse_than_its_start() {
        let cfg = quick();
        for seed in 0..4 {
            let r = run_trial(&cfg, seed).unwrap();
            let mm = r.get(Scheme::Mm, None).unwrap().mse;
            let sync = r.get(Scheme::Sync, None).unwrap().mse;
            assert!(mm <= sync + 1e-9, "seed {seed}: {mm} > {sync}");
            let mm2 = r.get(Scheme::Mm, Some(2)).unwrap().mse;
            let sync2 = r.get(Scheme::Sync, Some(2)).unwrap().mse;
            assert!(mm2 <= sync2 + 1e-9);
        }
    }

    #[test]
    fn scheme_ids_roundtrip() {
        for s in Scheme::ALL {
            assert_eq!(s.id().parse::<Scheme>().unwrap(), s);
        }
        assert!("nope".parse::<Scheme>().is_err());
    }
}

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::trial::Scheme;
use crate::error::{Error, Result};
use crate::mm::StopMetric;
use crate::sysmodel::SystemConfig;

/// Starting point of the MM iteration inside a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    /// Perfect-synchronization phase alignment.
    #[default]
    Baseline,
    /// Uniform random phases from the trial's auxiliary stream.
    Random,
}

/// A [`SystemConfig`] plus everything a sweep needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub snr_list_db: Vec<f64>,
    pub k_list: Vec<usize>,
    pub trials: usize,
    /// Bit depths evaluated in addition to continuous phases.
    pub bits: Vec<u32>,
    pub schemes: Vec<Scheme>,
    pub init: InitStrategy,
    /// Extra MM runs per trial started from the baseline with each surface
    /// rotated by a random common phase; the lowest MSE is kept.
    pub restarts: usize,
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
    /// Record wall-clock time per scheme. Off by default because timings
    /// make the CSV output non-reproducible.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::snr_sweep()
    }
}

impl ExperimentConfig {
    /// MSE versus SNR with `N = 32`, `K = 4`.
    pub fn snr_sweep() -> Self {
        Self {
            system: SystemConfig {
                stop_metric: StopMetric::Mse,
                ..SystemConfig::default()
            },
            snr_list_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
            k_list: vec![1, 2, 4, 6, 8],
            trials: 200,
            bits: vec![2],
            schemes: Scheme::ALL.to_vec(),
            init: InitStrategy::Baseline,
            restarts: 1,
            workers: 0,
            timing: false,
        }
    }

    /// MSE versus the number of surfaces with `N = 16` at 0 dB.
    pub fn k_sweep() -> Self {
        let mut cfg = Self::snr_sweep();
        cfg.system.n_elems = 16;
        cfg.system.snr_db = 0.0;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if self.trials < 1 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("no schemes selected".into()));
        }
        if self.bits.contains(&0) || self.bits.iter().any(|&b| b > 16) {
            return Err(Error::Config("bit depths must lie in 1..=16".into()));
        }
        if self.snr_list_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("SNR list has non-finite entries".into()));
        }
        if self.k_list.contains(&0) {
            return Err(Error::Config("K list entries must be at least 1".into()));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str, base: Self) -> Result<Self> {
        let file: FileConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        let cfg = file.apply(base);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a TOML file; keys not present keep the values of `base`.
    pub fn load(path: impl AsRef<Path>, base: Self) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, base).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

/// On-disk layout: the `SystemConfig` fields plus the sweep lists, flat.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    k_ris: Option<usize>,
    n_elems: Option<usize>,
    l0: Option<usize>,
    lg: Option<usize>,
    q: Option<usize>,
    beta: Option<f64>,
    snr_db: Option<f64>,
    sigma2: Option<f64>,
    np: Option<usize>,
    tol: Option<f64>,
    stop_metric: Option<StopMetric>,
    max_iters: Option<usize>,
    quant_bits: Option<u32>,
    seed: Option<u64>,
    snr_list_db: Option<Vec<f64>>,
    k_list: Option<Vec<usize>>,
    trials: Option<usize>,
    bits: Option<Vec<u32>>,
    schemes: Option<Vec<Scheme>>,
    init: Option<InitStrategy>,
    restarts: Option<usize>,
    workers: Option<usize>,
    timing: Option<bool>,
}

impl FileConfig {
    fn apply(self, mut cfg: ExperimentConfig) -> ExperimentConfig {
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        let s = &mut cfg.system;
        set!(s.k_ris, self.k_ris);
        set!(s.n_elems, self.n_elems);
        set!(s.l0, self.l0);
        set!(s.lg, self.lg);
        set!(s.q, self.q);
        set!(s.beta, self.beta);
        set!(s.snr_db, self.snr_db);
        set!(s.sigma2, self.sigma2);
        set!(s.np, self.np);
        set!(s.tol, self.tol);
        set!(s.stop_metric, self.stop_metric);
        set!(s.max_iters, self.max_iters);
        set!(s.seed, self.seed);
        if self.quant_bits.is_some() {
            s.quant_bits = self.quant_bits;
        }
        set!(cfg.snr_list_db, self.snr_list_db);
        set!(cfg.k_list, self.k_list);
        set!(cfg.trials, self.trials);
        set!(cfg.bits, self.bits);
        set!(cfg.schemes, self.schemes);
        set!(cfg.init, self.init);
        set!(cfg.restarts, self.restarts);
        set!(cfg.workers, self.workers);
        set!(cfg.timing, self.timing);
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_partial_file() {
        let cfg = ExperimentConfig::from_toml_str(
            "n_elems = 8\ntrials = 3\nschemes = [\"mm\", \"sync\"]\nbits = []\n",
            ExperimentConfig::default(),
        )
        .unwrap();
        assert_eq!(cfg.system.n_elems, 8);
        assert_eq!(cfg.system.k_ris, 4);
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.schemes, vec![Scheme::Mm, Scheme::Sync]);
        assert!(cfg.bits.is_empty());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let base = ExperimentConfig::default;
        assert!(matches!(
            ExperimentConfig::from_toml_str("n_elements = 8", base()),
            Err(Error::Config(_))
        ));
        assert!(ExperimentConfig::from_toml_str("n_elems = 6", base()).is_err());
        assert!(ExperimentConfig::from_toml_str("trials = 0", base()).is_err());
        assert!(ExperimentConfig::from_toml_str("schemes = [\"best\"]", base()).is_err());
    }

    #[test]
    fn presets() {
        let k = ExperimentConfig::k_sweep();
        assert_eq!((k.system.n_elems, k.system.snr_db), (16, 0.0));
        let s = ExperimentConfig::snr_sweep();
        assert_eq!((s.system.n_elems, s.system.k_ris), (32, 4));
    }
}

//! Cooperative phase-shift design for distributed multi-RIS links whose
//! reflected copies reach the receiver with different fractional timing
//! offsets.
//!
//! The crate builds the oversampled asynchronous signal model, the
//! closed-form MMSE timing-offset equalizer, and a majorization-minimization
//! solver for the unit-modulus phase shifts whose objective is
//! non-decreasing at every iteration. [`harness`] runs seeded Monte-Carlo
//! sweeps against the perfect-synchronization baseline.
//!
//! ```
//! use risync::{baselines, mm, SystemConfig, SystemModel};
//!
//! let cfg = SystemConfig { k_ris: 2, n_elems: 8, ..SystemConfig::default() };
//! let pulse = cfg.pulse().unwrap();
//! let channel = cfg.draw_channel(7);
//! let model = SystemModel::new(&cfg, &pulse, &channel).unwrap();
//!
//! let start = baselines::perfect_sync_alignment(&channel);
//! let result = mm::run_mm(&start, &model, &mm::MmOptions::from(&cfg)).unwrap();
//! assert!(result.trace.windows(2).all(|w| w[1] >= w[0] - 1e-9));
//! ```

pub mod baselines;
pub mod channel;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod mm;
pub mod oracle;
pub mod pulse;
pub mod sysmodel;

pub use channel::ChannelRealization;
pub use error::{Error, Result};
pub use mm::{MmOptions, OptimizationResult, PhaseSolution};
pub use pulse::PulseModel;
pub use sysmodel::{SystemConfig, SystemModel};

//! Reference phase designs the optimizer is compared against.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::ChannelRealization;
use crate::error::Result;
use crate::linalg::CMat;
use crate::mm::{optimal_equalizer, PhaseSolution};
use crate::pulse::PulseModel;
use crate::sysmodel::SystemModel;

/// Co-phases every cascaded coefficient:
/// `theta_{k,n} = exp(-j arg(conj(h_k[n]) f_k[n]))`, ignoring timing offsets.
/// A zero coefficient gets phase 0.
pub fn perfect_sync_alignment(ch: &ChannelRealization) -> PhaseSolution {
    align_to_cascade(&ch.cascade())
}

pub fn align_to_cascade(rows: &[Vec<Complex64>]) -> PhaseSolution {
    PhaseSolution::from_phases(rows.iter().flatten().map(|c| {
        if *c == Complex64::new(0.0, 0.0) {
            0.0
        } else {
            -c.arg()
        }
    }))
}

/// I.i.d. uniform phases.
pub fn random_phases<R: Rng + ?Sized>(rng: &mut R, n_total: usize) -> PhaseSolution {
    PhaseSolution::from_phases((0..n_total).map(|_| rng.random_range(0.0..2.0 * PI)))
}

/// Equalizer a receiver would design if it believed every offset were zero.
pub fn sync_naive_equalizer(
    model: &SystemModel,
    pulse: &PulseModel,
    theta: &[Complex64],
) -> Result<CMat> {
    let assumed = model.synchronized(pulse)?;
    let x = assumed.effective_channel(theta);
    optimal_equalizer(&x, &assumed.window, assumed.es, assumed.sigma2)
}

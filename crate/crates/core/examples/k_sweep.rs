// A reduced MSE-versus-K sweep with the MM-to-baseline gap per point.

use risync::harness::{sweep_k, ExperimentConfig, Scheme};

fn main() -> risync::Result<()> {
    let mut cfg = ExperimentConfig::k_sweep();
    cfg.system.n_elems = 8;
    cfg.trials = 6;
    cfg.bits = vec![];
    cfg.schemes = vec![Scheme::Mm, Scheme::Sync];
    let ks = [1, 2, 3];
    let result = sweep_k(&cfg, &ks, 0.0)?;
    println!("   K        mm      sync       gap");
    for k in ks {
        let v = k as f64;
        let mm = result
            .row(v, Scheme::Mm.continuous())
            .map_or(f64::NAN, |r| r.mse_mean);
        let sync = result
            .row(v, Scheme::Sync.continuous())
            .map_or(f64::NAN, |r| r.mse_mean);
        println!("{k:>4} {mm:>9.3e} {sync:>9.3e} {:>9.3e}", sync - mm);
    }
    Ok(())
}

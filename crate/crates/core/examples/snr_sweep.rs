// A reduced MSE-versus-SNR sweep written as CSV to stdout. The full-size run
// is `risync sweep-snr`.

use risync::harness::{sweep_snr, write_csv, ExperimentConfig, Scheme};

fn main() -> risync::Result<()> {
    let mut cfg = ExperimentConfig::snr_sweep();
    cfg.system.n_elems = 8;
    cfg.system.k_ris = 2;
    cfg.trials = 6;
    cfg.schemes = vec![Scheme::Mm, Scheme::Sync, Scheme::SyncNaiveEq];
    let result = sweep_snr(&cfg, &[-10.0, 0.0, 10.0])?;
    write_csv(&result, std::io::stdout().lock()).map_err(|e| risync::Error::Io {
        path: "<stdout>".into(),
        source: e.into(),
    })?;
    for snr in [-10.0, 0.0, 10.0] {
        let mm = result.row(snr, Scheme::Mm.continuous()).map(|r| r.mse_mean);
        let sync = result
            .row(snr, Scheme::Sync.continuous())
            .map(|r| r.mse_mean);
        if let (Some(mm), Some(sync)) = (mm, sync) {
            eprintln!("{snr:>6} dB  mm/sync = {:.3}", mm / sync);
        }
    }
    Ok(())
}

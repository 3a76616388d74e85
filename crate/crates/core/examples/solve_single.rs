// One channel draw at the default link settings: MM from the perfect-sync
// alignment and from a rotated start, compared with the baselines.

use num_complex::Complex64;
use risync::baselines::{perfect_sync_alignment, sync_naive_equalizer};
use risync::mm::{mse_full, optimal_equalizer, run_mm, MmOptions, PhaseSolution, StopMetric};
use risync::{SystemConfig, SystemModel};

fn main() -> risync::Result<()> {
    let cfg = SystemConfig::default();
    let pulse = cfg.pulse()?;
    let ch = cfg.draw_channel(1);
    let model = SystemModel::new(&cfg, &pulse, &ch)?;
    let baseline = perfect_sync_alignment(&ch);

    let x = model.effective_channel(&baseline.theta);
    let g = optimal_equalizer(&x, &model.window, model.es, model.sigma2)?;
    let sync = mse_full(&model, &baseline.theta, &g)?;
    let naive = sync_naive_equalizer(&model, &pulse, &baseline.theta)?;
    let sync_naive = mse_full(&model, &baseline.theta, &naive)?;

    let opts = MmOptions {
        stop: StopMetric::Mse,
        ..MmOptions::from(&cfg)
    };
    let from_baseline = run_mm(&baseline, &model, &opts)?;

    // each surface turned by a fixed common phase
    let n = model.num_elements();
    let rotated: Vec<Complex64> = baseline
        .theta
        .iter()
        .enumerate()
        .map(|(i, t)| t * Complex64::from_polar(1.0, 1.3 * (i / n) as f64))
        .collect();
    let from_rotated = run_mm(&PhaseSolution::new(rotated)?, &model, &opts)?;

    println!("MSE_0 (no equalization)        {:.4e}", model.mse0());
    println!("perfect-sync, naive equalizer  {sync_naive:.4e}");
    println!("perfect-sync, optimal equalizer {sync:.4e}");
    println!(
        "MM from perfect-sync           {:.4e}  ({} iterations)",
        from_baseline.mse_final, from_baseline.iterations
    );
    println!(
        "MM from rotated start          {:.4e}  ({} iterations)",
        from_rotated.mse_final, from_rotated.iterations
    );
    let trace = &from_rotated.trace;
    println!(
        "objective trace {:.6} -> {:.6}, never decreasing: {}",
        trace[0],
        trace[trace.len() - 1],
        trace.windows(2).all(|w| w[1] >= w[0] - 1e-9)
    );
    Ok(())
}

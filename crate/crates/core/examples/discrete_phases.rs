// MM restricted to 2^B phase levels against continuous phases.

use risync::baselines::perfect_sync_alignment;
use risync::mm::{quantize_phases, run_mm, MmOptions, StopMetric};
use risync::{SystemConfig, SystemModel};

fn main() -> risync::Result<()> {
    let cfg = SystemConfig {
        n_elems: 16,
        ..SystemConfig::default()
    };
    let pulse = cfg.pulse()?;
    let ch = cfg.draw_channel(3);
    let model = SystemModel::new(&cfg, &pulse, &ch)?;
    let start = perfect_sync_alignment(&ch);

    let continuous = MmOptions {
        stop: StopMetric::Mse,
        ..MmOptions::default()
    };
    let cont = run_mm(&start, &model, &continuous)?;
    println!("continuous  MSE {:.4e}", cont.mse_final);
    for bits in 1..=4 {
        let opts = MmOptions {
            quant_bits: Some(bits),
            ..continuous.clone()
        };
        let init = quantize_phases(&start.theta, bits);
        let res = run_mm(&init, &model, &opts)?;
        println!(
            "B = {bits}       MSE {:.4e}  ratio {:.3}  ({} iterations)",
            res.mse_final,
            res.mse_final / cont.mse_final,
            res.iterations
        );
    }
    Ok(())
}

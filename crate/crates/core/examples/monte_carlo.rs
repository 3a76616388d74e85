// Closed-form MSE against simulated QPSK blocks through the same link.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use risync::baselines::perfect_sync_alignment;
use risync::harness::empirical_mse;
use risync::mm::{mse_full, optimal_equalizer};
use risync::{SystemConfig, SystemModel};

fn main() -> risync::Result<()> {
    let cfg = SystemConfig {
        n_elems: 8,
        k_ris: 2,
        snr_db: 5.0,
        ..SystemConfig::default()
    };
    let pulse = cfg.pulse()?;
    let ch = cfg.draw_channel(11);
    let model = SystemModel::new(&cfg, &pulse, &ch)?;
    let theta = perfect_sync_alignment(&ch).theta;
    let x = model.effective_channel(&theta);
    let g = optimal_equalizer(&x, &model.window, model.es, model.sigma2)?;

    let analytic = mse_full(&model, &theta, &g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let est = empirical_mse(&model, &theta, &g, 20_000, &mut rng)?;
    println!("analytic  {analytic:.5e}");
    println!(
        "simulated {:.5e} +/- {:.1e} ({} blocks)",
        est.mean, est.stderr, est.draws
    );
    println!(
        "deviation {:.2} standard errors",
        (est.mean - analytic).abs() / est.stderr
    );
    Ok(())
}

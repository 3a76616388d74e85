// Root-raised-cosine pulse, its autocorrelation, and the circulant window.

use risync::pulse::{build_window_matrix, rrc_sample};
use risync::PulseModel;

fn main() -> risync::Result<()> {
    let pulse = PulseModel::new(0.3, 4, 2)?;

    println!("g(t), normalized so R_g(0) = 1:");
    for i in 0..=8 {
        let t = i as f64 * 0.25;
        println!("  t = {t:>4.2}  g = {:+.6}", pulse.sample(t));
    }
    println!("rrc_sample(0, 0.3, 4) = {:.6}", rrc_sample(0.0, 0.3, 4)?);

    println!("autocorrelation at integer lags:");
    for tau in 0..=4 {
        println!("  R_g({tau}) = {:+.3e}", pulse.autocorrelation(tau));
    }

    let l0 = 4;
    let eta = pulse.eta(l0);
    let t = build_window_matrix(&eta, l0)?;
    println!(
        "eta has {} taps; window T is {} x {}",
        eta.len(),
        t.nrows(),
        t.ncols()
    );
    for row in t.row_iter() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:+.2}")).collect();
        println!("  [{}]", line.join(" "));
    }
    Ok(())
}

// The property suite behind `risync validate`, once as shipped and once with
// the majorizer constant halved.

use risync::harness::{validate, ValidateOptions};

fn main() -> risync::Result<()> {
    let opts = ValidateOptions {
        instances: 5,
        mc_draws: 5_000,
        ..ValidateOptions::default()
    };
    let report = validate(&opts)?;
    print!("{report}");
    println!("all passed: {}", report.all_passed());

    let broken = validate(&ValidateOptions {
        lambda_scale: 0.5,
        ..opts
    })?;
    let failed: Vec<_> = broken
        .properties
        .iter()
        .filter(|p| !p.passed)
        .map(|p| p.name)
        .collect();
    println!("with lambda halved, failing: {failed:?}");
    Ok(())
}

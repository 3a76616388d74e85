use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use risync::baselines::perfect_sync_alignment;
use risync::harness::{
    emit_csv, sweep_k, sweep_snr, validate, write_gnuplot, ExperimentConfig, Scheme, SweepResult,
    ValidateOptions,
};
use risync::mm::{quantize_phases, run_mm_observed, MmOptions};
use risync::{Error, Result, SystemModel};

#[derive(Parser)]
#[command(
    name = "risync",
    version,
    about = "Cooperative multi-RIS phase design under timing offsets"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Optimize one channel draw and print the MM trace.
    Solve(Common),
    /// MSE versus SNR.
    SweepSnr(Common),
    /// MSE versus the number of surfaces.
    SweepK(Common),
    /// Run the property suite at small dimensions.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// TOML file; unset keys keep the preset for the subcommand.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output file (CSV for sweeps and solve); stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated scheme ids: mm, sync, sync_naive_eq, random.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    /// Comma-separated phase bit depths.
    #[arg(long, value_delimiter = ',')]
    bits: Option<Vec<u32>>,
    /// Worker threads, 0 for automatic.
    #[arg(long)]
    workers: Option<usize>,
    /// Also write a gnuplot script next to the CSV.
    #[arg(long)]
    plot: bool,
    /// Record per-scheme wall time.
    #[arg(long)]
    timing: bool,
}

impl Common {
    fn experiment(&self, preset: ExperimentConfig) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p, preset)?,
            None => preset,
        };
        if let Some(s) = self.seed {
            cfg.system.seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(list) = &self.schemes {
            cfg.schemes = list
                .iter()
                .map(|s| s.parse())
                .collect::<Result<Vec<Scheme>>>()?;
        }
        if let Some(b) = &self.bits {
            cfg.bits = b.clone();
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        cfg.timing |= self.timing;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| io_err(p, e))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn io_err(p: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: p.display().to_string(),
        source: e,
    }
}

fn solve(args: &Common) -> Result<u8> {
    let cfg = args.experiment(ExperimentConfig::snr_sweep())?;
    let sys = &cfg.system;
    let pulse = sys.pulse()?;
    let ch = sys.draw_channel(sys.seed);
    let model = SystemModel::new(sys, &pulse, &ch)?;
    let mut opts = MmOptions::from(sys);
    if let Some(&b) = args.bits.as_ref().and_then(|b| b.first()) {
        opts.quant_bits = Some(b);
    }
    let init = perfect_sync_alignment(&ch);
    let init = match opts.quant_bits {
        Some(b) => quantize_phases(&init.theta, b),
        None => init,
    };
    let mut w = sink(&args.out)?;
    let path = args.out.clone().unwrap_or_else(|| "<stdout>".into());
    let wr = |e| io_err(&path, e);
    writeln!(w, "iteration,mse_bar,mse").map_err(wr)?;
    let mse0 = model.mse0();
    let mut failed = None;
    let res = run_mm_observed(&init, &model, &opts, |rec| {
        if failed.is_none() {
            failed = writeln!(
                w,
                "{},{:e},{:e}",
                rec.iteration,
                rec.mse_bar,
                mse0 - rec.mse_bar
            )
            .err();
        }
    })?;
    if let Some(e) = failed {
        return Err(wr(e));
    }
    eprintln!(
        "mse {:.6e} after {} iterations ({})",
        res.mse_final,
        res.iterations,
        if res.converged {
            "converged"
        } else {
            "iteration cap"
        }
    );
    Ok(0)
}

fn sweep(args: &Common, by_k: bool) -> Result<u8> {
    let preset = if by_k {
        ExperimentConfig::k_sweep()
    } else {
        ExperimentConfig::snr_sweep()
    };
    let cfg = args.experiment(preset)?;
    let res: SweepResult = if by_k {
        sweep_k(&cfg, &cfg.k_list, cfg.system.snr_db)?
    } else {
        sweep_snr(&cfg, &cfg.snr_list_db)?
    };
    match &args.out {
        Some(p) => {
            emit_csv(&res, p)?;
            if args.plot {
                let script = p.with_extension("gp");
                let xlabel = if by_k { "K" } else { "SNR (dB)" };
                write_gnuplot(&res, &p.display().to_string(), xlabel, script)?;
            }
        }
        None => {
            let stdout = std::io::stdout().lock();
            risync::harness::write_csv(&res, stdout)
                .map_err(|e| io_err(Path::new("<stdout>"), e.into()))?;
        }
    }
    Ok(0)
}

fn run_validate(args: &Common) -> Result<u8> {
    let mut opts = ValidateOptions::default();
    if let Some(s) = args.seed {
        opts.seed = s;
    }
    if let Some(t) = args.trials {
        opts.instances = t.max(1);
    }
    let report = validate(&opts)?;
    let mut w = sink(&args.out)?;
    let path = args.out.clone().unwrap_or_else(|| "<stdout>".into());
    write!(w, "{report}").map_err(|e| io_err(&path, e))?;
    Ok(if report.all_passed() { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match &cli.cmd {
        Cmd::Solve(a) => solve(a),
        Cmd::SweepSnr(a) => sweep(a, false),
        Cmd::SweepK(a) => sweep(a, true),
        Cmd::Validate(a) => run_validate(a),
    };
    match out {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 3 } else { 2 })
        }
    }
}

use std::io::Write;
use std::path::Path;

use super::sweep::{SweepResult, SweepRow};
use super::trial::SchemeKey;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 8] = [
    "sweep_var",
    "scheme",
    "bits",
    "mse_mean",
    "mse_stderr",
    "trials",
    "mean_iters",
    "mean_ms",
];

fn bits_field(bits: Option<u32>) -> String {
    bits.map_or_else(|| "cont".to_string(), |b| b.to_string())
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Config(format!("{}: {other:?}", path.display())),
    }
}

/// Writes the sweep as CSV. Floats use Rust's shortest round-trip
/// scientific form, so equal inputs give byte-identical files.
pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &result.rows {
        w.write_record([
            format!("{:e}", r.value),
            r.key.scheme.id().to_string(),
            bits_field(r.key.bits),
            format!("{:e}", r.mse_mean),
            format!("{:e}", r.mse_stderr),
            r.trials.to_string(),
            format!("{:e}", r.mean_iters),
            format!("{:e}", r.mean_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(result: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(result, std::io::BufWriter::new(file)).map_err(|e| csv_err(path, e))
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<SweepResult> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let bad = |what: &str| Error::Config(format!("{}: bad {what}", path.display()));
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if rec.len() != CSV_HEADER.len() {
            return Err(bad("column count"));
        }
        let num = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(CSV_HEADER[i]));
        let bits = match &rec[2] {
            "cont" => None,
            b => Some(b.parse().map_err(|_| bad("bits"))?),
        };
        rows.push(SweepRow {
            value: num(0)?,
            key: SchemeKey {
                scheme: rec[1].parse()?,
                bits,
            },
            mse_mean: num(3)?,
            mse_stderr: num(4)?,
            trials: rec[5].parse().map_err(|_| bad("trials"))?,
            mean_iters: num(6)?,
            mean_ms: num(7)?,
        });
    }
    Ok(SweepResult { rows })
}

/// Companion gnuplot script plotting every scheme from `csv_path` on a
/// log-scale MSE axis.
pub fn write_gnuplot(
    result: &SweepResult,
    csv_path: &str,
    xlabel: &str,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut keys: Vec<SchemeKey> = result.rows.iter().map(|r| r.key).collect();
    keys.sort();
    keys.dedup();
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set logscale y\n");
    s.push_str(&format!(
        "set xlabel '{xlabel}'\nset ylabel 'MSE'\nset key outside\n"
    ));
    let plots: Vec<String> = keys
        .iter()
        .map(|k| {
            let style = if k.bits.is_some() {
                "dashtype 2"
            } else {
                "dashtype 1"
            };
            format!(
                "'{csv_path}' using 1:(strcol(2) eq '{}' && strcol(3) eq '{}' ? $4 : 1/0) \
                 with linespoints {style} title '{} ({})'",
                k.scheme.id(),
                bits_field(k.bits),
                k.scheme.id(),
                bits_field(k.bits)
            )
        })
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

//! Persistence of experiment results: per-run CSVs, the cross-run summary,
//! learning-curve plots and the provenance echo of the resolved config.
//!
//! All numbers are written with Rust's shortest round-trip float
//! formatting, so reruns of the same config produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::config::ResolvedConfig;
use crate::harness::plot::render_gamma_plot;
use crate::harness::{RunRecord, SweepSummary};

/// File name of one run's learning curve.
pub fn run_file_name(gamma: f64, seed: u64) -> String {
    format!("run_{gamma}_{seed}.csv")
}

/// Parses `(gamma, seed)` back out of a run CSV file name.
pub fn parse_run_file_name(name: &str) -> Option<(f64, u64)> {
    let stem = name.strip_prefix("run_")?.strip_suffix(".csv")?;
    let (gamma, seed) = stem.rsplit_once('_')?;
    Some((gamma.parse().ok()?, seed.parse().ok()?))
}

pub fn run_csv(record: &RunRecord) -> String {
    let mut out = String::from("batch,erf_mean,irf,combined,baseline,max\n");
    for row in &record.rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.batch, row.erf_mean, row.irf, row.combined, row.baseline, row.max_reward
        )
        .expect("string write");
    }
    out
}

pub fn summary_csv(summary: &SweepSummary) -> String {
    let mut out = String::from("gamma,batch,erf_mean,erf_std,irf_mean,irf_std\n");
    for row in &summary.rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.gamma, row.batch, row.erf_mean, row.erf_std, row.irf_mean, row.irf_std
        )
        .expect("string write");
    }
    out
}

fn thresholds_csv(summary: &SweepSummary) -> String {
    let mut out = String::from("threshold,gamma,seed,batches_to_threshold\n");
    for c in &summary.crossings {
        let reached = c
            .batches_to_threshold
            .map(|b| b.to_string())
            .unwrap_or_default();
        writeln!(out, "{},{},{},{}", c.threshold, c.gamma, c.seed, reached)
            .expect("string write");
    }
    out
}

/// Writes every artifact of a finished experiment into its output
/// directory: one CSV per completed run (plus a `.diag.txt` per aborted
/// run), `summary.csv`, `thresholds.csv` when thresholds are configured,
/// one learning-curve SVG per gamma, and `provenance.toml` echoing the
/// fully resolved config.
///
/// Returns the paths written. With zero runs nothing is written.
pub fn emit_outputs(
    config: &ResolvedConfig,
    records: &[RunRecord],
    summary: &SweepSummary,
) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Ok(Vec::new());
    }
    let dir = &config.output_dir;
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    for record in records {
        if let Some(diag) = &record.abort {
            let path = dir.join(format!("run_{}_{}.diag.txt", record.gamma, record.seed));
            let body = format!(
                "run aborted\ngamma = {}\nseed = {}\ncompleted batches = {}\nerror: {}\n",
                record.gamma,
                record.seed,
                record.rows.len(),
                diag
            );
            write_file(&path, body.as_bytes())?;
            written.push(path);
        } else {
            let path = dir.join(run_file_name(record.gamma, record.seed));
            write_file(&path, run_csv(record).as_bytes())?;
            written.push(path);
        }
    }

    let summary_path = dir.join("summary.csv");
    write_file(&summary_path, summary_csv(summary).as_bytes())?;
    written.push(summary_path);

    if !config.thresholds.is_empty() {
        let path = dir.join("thresholds.csv");
        write_file(&path, thresholds_csv(summary).as_bytes())?;
        written.push(path);
    }

    for &gamma in &config.gammas {
        let path = dir.join(format!("plot_{gamma}.svg"));
        let svg = render_gamma_plot(summary, gamma, config.mean_only_plots)?;
        write_file(&path, svg.as_bytes())?;
        written.push(path);
    }

    let provenance = toml::to_string_pretty(config)
        .map_err(|e| Error::Parse(format!("provenance serialization: {e}")))?;
    let provenance_path = dir.join("provenance.toml");
    write_file(&provenance_path, provenance.as_bytes())?;
    written.push(provenance_path);

    Ok(written)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("writing {}: {e}", path.display()),
        ))
    })
}

/// Reads one run CSV back into rows. Used by the `summarize` subcommand.
pub fn parse_run_csv(text: &str) -> Result<Vec<crate::harness::BatchRow>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty run CSV".into()))?;
    if header != "batch,erf_mean,irf,combined,baseline,max" {
        return Err(Error::Parse(format!("unexpected run CSV header: {header}")));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Parse(format!(
                "run CSV line {} has {} fields",
                idx + 2,
                fields.len()
            )));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Parse(format!("bad number '{s}' on line {}", idx + 2)))
        };
        rows.push(crate::harness::BatchRow {
            batch: fields[0]
                .parse()
                .map_err(|_| Error::Parse(format!("bad batch index '{}'", fields[0])))?,
            erf_mean: num(fields[1])?,
            irf: num(fields[2])?,
            combined: num(fields[3])?,
            baseline: num(fields[4])?,
            max_reward: num(fields[5])?,
        });
    }
    Ok(rows)
}

/// Loads all run CSVs of an output directory, ordered by (gamma, seed).
pub fn load_run_records(dir: &Path) -> Result<Vec<RunRecord>> {
    let mut records = Vec::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        let Some((gamma, seed)) = parse_run_file_name(name) else {
            continue;
        };
        let rows = parse_run_csv(&fs::read_to_string(entry.path())?)?;
        records.push(RunRecord {
            gamma_index: 0,
            gamma,
            seed,
            rows,
            final_mu: Vec::new(),
            abort: None,
        });
    }
    if records.is_empty() {
        return Err(Error::Parse(format!(
            "no run_<gamma>_<seed>.csv files found in {}",
            dir.display()
        )));
    }
    records.sort_by(|a, b| {
        a.gamma
            .partial_cmp(&b.gamma)
            .expect("finite gammas")
            .then(a.seed.cmp(&b.seed))
    });
    // Re-derive gamma indices from the sorted distinct gammas.
    let mut gammas: Vec<f64> = records.iter().map(|r| r.gamma).collect();
    gammas.dedup();
    for record in &mut records {
        record.gamma_index = gammas
            .iter()
            .position(|&g| g == record.gamma)
            .expect("gamma present");
    }
    Ok(records)
}

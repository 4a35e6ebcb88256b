//! CSV sensor-trace files for the `measure` debug subcommand.
//!
//! Format: one column per channel, comma separated. The header row names
//! each channel and declares its binning range as `name[min;max]`, e.g.
//!
//! ```text
//! theta[-3.14159;3.14159],theta_dot[-25;25]
//! 0.01,-0.4
//! 0.02,-0.38
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::infotheory::SensorTrace;

/// A parsed trace file: channel names plus the trace itself.
#[derive(Debug, Clone)]
pub struct TraceFile {
    pub names: Vec<String>,
    pub trace: SensorTrace,
}

fn parse_header_cell(cell: &str) -> Result<(String, (f64, f64))> {
    let cell = cell.trim();
    let open = cell.find('[').ok_or_else(|| {
        Error::Parse(format!("header cell '{cell}' is missing its [min;max] range"))
    })?;
    let close = cell.rfind(']').ok_or_else(|| {
        Error::Parse(format!("header cell '{cell}' has an unterminated range"))
    })?;
    let name = cell[..open].trim().to_string();
    if name.is_empty() {
        return Err(Error::Parse(format!("header cell '{cell}' has no name")));
    }
    let range = &cell[open + 1..close];
    let (lo, hi) = range.split_once(';').ok_or_else(|| {
        Error::Parse(format!(
            "range '{range}' must be 'min;max' (semicolon separated)"
        ))
    })?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad range minimum '{lo}'")))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad range maximum '{hi}'")))?;
    Ok((name, (lo, hi)))
}

impl TraceFile {
    /// Parses a trace file. A leading column named exactly `step` (as
    /// written by [`format_trace_csv`]) is treated as an index and
    /// skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty trace file".into()))?;
        let mut cells = header.split(',').peekable();
        let has_step_column = cells.peek().map(|c| c.trim()) == Some("step");
        if has_step_column {
            cells.next();
        }
        let mut names = Vec::new();
        let mut ranges = Vec::new();
        for cell in cells {
            let (name, range) = parse_header_cell(cell)?;
            names.push(name);
            ranges.push(range);
        }
        let mut trace = SensorTrace::new(ranges)?;
        for (idx, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut readings = Vec::with_capacity(names.len());
            for (col, cell) in line.split(',').enumerate() {
                if col == 0 && has_step_column {
                    continue;
                }
                let v: f64 = cell.trim().parse().map_err(|_| {
                    Error::Parse(format!("bad value '{cell}' on data line {}", idx + 1))
                })?;
                readings.push(v);
            }
            if readings.len() != names.len() {
                return Err(Error::Parse(format!(
                    "data line {} has {} values for {} channels",
                    idx + 1,
                    readings.len(),
                    names.len()
                )));
            }
            trace.push_step(&readings)?;
        }
        if trace.len() < 2 {
            return Err(Error::Parse(
                "trace needs at least 2 data rows for one-step statistics".into(),
            ));
        }
        Ok(Self { names, trace })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Renders an episode trace as CSV: a step index column followed by one
/// column per sensor channel, with the binning ranges in the header.
pub fn format_trace_csv(names: &[String], trace: &SensorTrace) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("step");
    for (name, (lo, hi)) in names.iter().zip(trace.ranges()) {
        let _ = write!(out, ",{name}[{lo};{hi}]");
    }
    out.push('\n');
    for t in 0..trace.len() {
        let _ = write!(out, "{t}");
        for c in 0..trace.channels() {
            let _ = write!(out, ",{}", trace.channel(c).expect("channel exists")[t]);
        }
        out.push('\n');
    }
    out
}

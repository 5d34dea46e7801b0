//! Sweep CSV files.
//!
//! A sweep file starts with the schema line `# mzi-sweep v1` followed by
//!
//! ```text
//! phi0,x_mode,n0_plus,n1_plus,n0_minus,n1_minus,f0_plus,f0_minus,f0_ungrouped
//! ```
//!
//! A staged file starts with `# mzi-stages v1` and prepends a `stage`
//! column (index into the configured stage list, not execution order).
//! Numbers use Rust's shortest round-trip formatting; empty groups write
//! `NaN`. Unknown schedules write `unknown`.

use std::io::{self, BufRead, Write};

use crate::analysis::{DetectionTally, FrequencyPoint};
use crate::error::ExperimentError;
use crate::schedule::ScheduleKind;

pub const SWEEP_SCHEMA: &str = "# mzi-sweep v1";
pub const STAGES_SCHEMA: &str = "# mzi-stages v1";
pub const SWEEP_COLUMNS: &str =
    "phi0,x_mode,n0_plus,n1_plus,n0_minus,n1_minus,f0_plus,f0_minus,f0_ungrouped";

/// One grid point of a sweep or of one stage.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub stage: Option<usize>,
    pub point_index: usize,
    pub mode: Option<ScheduleKind>,
    pub point: FrequencyPoint,
}

fn opt(v: Option<f64>) -> String {
    v.unwrap_or(f64::NAN).to_string()
}

pub fn write_sweep_csv<W: Write>(mut out: W, rows: &[SweepRow]) -> io::Result<()> {
    let staged = rows.iter().any(|r| r.stage.is_some());
    if staged {
        writeln!(out, "{STAGES_SCHEMA}")?;
        writeln!(out, "stage,{SWEEP_COLUMNS}")?;
    } else {
        writeln!(out, "{SWEEP_SCHEMA}")?;
        writeln!(out, "{SWEEP_COLUMNS}")?;
    }
    for row in rows {
        if staged {
            write!(out, "{},", row.stage.unwrap_or(0))?;
        }
        let p = &row.point;
        let c = &p.counts;
        let mode = row
            .mode
            .map_or_else(|| "unknown".to_string(), |m| m.to_string());
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            p.phi0,
            mode,
            c.n0_plus,
            c.n1_plus,
            c.n0_minus,
            c.n1_minus,
            opt(p.f0_plus),
            opt(p.f0_minus),
            opt(p.f0_ungrouped)
        )?;
    }
    Ok(())
}

/// Reads a sweep or staged CSV. Frequencies are recomputed from the counts.
pub fn read_sweep_csv<R: BufRead>(input: R) -> Result<Vec<SweepRow>, ExperimentError> {
    let mut lines = input.lines().enumerate();
    let err = |line: usize, message: String| ExperimentError::Parse { line, message };
    let schema = match lines.next() {
        Some((_, l)) => l?,
        None => return Err(err(1, "empty file".into())),
    };
    let staged = match schema.trim_end() {
        SWEEP_SCHEMA => false,
        STAGES_SCHEMA => true,
        other => return Err(err(1, format!("unknown schema line '{other}'"))),
    };
    let expected_header = if staged {
        format!("stage,{SWEEP_COLUMNS}")
    } else {
        SWEEP_COLUMNS.to_string()
    };
    let header = match lines.next() {
        Some((_, l)) => l?,
        None => String::new(),
    };
    if header.trim_end() != expected_header {
        return Err(err(2, format!("expected header '{expected_header}'")));
    }

    let mut rows = Vec::new();
    let mut points_in_stage = std::collections::HashMap::<Option<usize>, usize>::new();
    for (n, line) in lines {
        let line = line?;
        let lineno = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields: Vec<&str> = line.split(',').collect();
        let stage = if staged {
            if fields.is_empty() {
                return Err(err(lineno, "missing stage".into()));
            }
            let s = fields.remove(0);
            Some(
                s.parse::<usize>()
                    .map_err(|_| err(lineno, format!("stage '{s}' is not an index")))?,
            )
        } else {
            None
        };
        if fields.len() != 9 {
            return Err(err(
                lineno,
                format!("expected 9 columns, got {}", fields.len()),
            ));
        }
        let phi0: f64 = fields[0]
            .parse()
            .map_err(|_| err(lineno, format!("phi0 '{}' is not a number", fields[0])))?;
        let mode = match fields[1] {
            "unknown" => None,
            m => Some(m.parse::<ScheduleKind>().map_err(|e| err(lineno, e))?),
        };
        let count = |i: usize| -> Result<u64, ExperimentError> {
            fields[i]
                .parse()
                .map_err(|_| err(lineno, format!("count '{}' is not an integer", fields[i])))
        };
        let counts = DetectionTally {
            n0_plus: count(2)?,
            n1_plus: count(3)?,
            n0_minus: count(4)?,
            n1_minus: count(5)?,
        };
        let idx = points_in_stage.entry(stage).or_insert(0);
        rows.push(SweepRow {
            stage,
            point_index: *idx,
            mode,
            point: FrequencyPoint::new(phi0, counts),
        });
        *idx += 1;
    }
    Ok(rows)
}

//! Per-event record files.
//!
//! ```text
//! #mzi-events v1
//! #segment point=0 phi0=0 mode=fixed:+1
//! 1,1,0,1,1
//! 2,1,1,0,1
//! ```
//!
//! One event per line, `i,x,d0,d1,d`, LF endings, decimal integers. `i` is
//! the pulse index since the network was last reset, `x` is `1` or `-1`,
//! `d0`/`d1` flag which detector fired and `d` is the source-side herald
//! (always 1 for simulated data). `#segment` lines open a new segment and
//! carry `point`, optional `stage`, `phi0` and `mode`; other `#` lines are
//! comments. On replay, records with `d0 = d1 = 1` are rejected, and
//! records with no detection or no herald are skipped.

use std::io::{self, BufRead, Write};

use crate::analysis::DetectionTally;
use crate::engine::{Channel, DetectionEvent};
use crate::error::ExperimentError;
use crate::schedule::{ScheduleKind, Setting};

pub const RECORD_HEADER: &str = "#mzi-events v1";

/// Identity of a run of events sharing one phase and schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub point: usize,
    pub stage: Option<usize>,
    pub phi0: Option<f64>,
    pub mode: Option<ScheduleKind>,
}

impl Segment {
    fn header_line(&self) -> String {
        let mut line = format!("#segment point={}", self.point);
        if let Some(stage) = self.stage {
            line += &format!(" stage={stage}");
        }
        if let Some(phi0) = self.phi0 {
            line += &format!(" phi0={phi0}");
        }
        if let Some(mode) = self.mode {
            line += &format!(" mode={mode}");
        }
        line
    }
}

/// Receives events as they are produced.
pub trait EventSink {
    fn begin_segment(&mut self, segment: &Segment) -> io::Result<()>;
    fn record(&mut self, event: &DetectionEvent) -> io::Result<()>;
}

pub struct RecordWriter<W: Write> {
    out: W,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(mut out: W) -> io::Result<Self> {
        writeln!(out, "{RECORD_HEADER}")?;
        Ok(RecordWriter { out })
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> EventSink for RecordWriter<W> {
    fn begin_segment(&mut self, segment: &Segment) -> io::Result<()> {
        writeln!(self.out, "{}", segment.header_line())
    }

    #[inline]
    fn record(&mut self, event: &DetectionEvent) -> io::Result<()> {
        let (d0, d1) = match event.detector {
            Channel::Zero => (1, 0),
            Channel::One => (0, 1),
        };
        writeln!(self.out, "{},{},{d0},{d1},1", event.index, event.x.value())
    }
}

/// Tallied events of one segment read back from a record file.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplaySegment {
    pub segment: Segment,
    pub tally: DetectionTally,
    /// Records without a detection or without a herald.
    pub skipped: u64,
}

/// Reads a record file. Events before the first `#segment` line form an
/// implicit segment at point 0 with phase `default_phi0`.
pub fn read_records<R: BufRead>(
    input: R,
    default_phi0: Option<f64>,
) -> Result<Vec<ReplaySegment>, ExperimentError> {
    let mut segments: Vec<ReplaySegment> = Vec::new();
    let mut saw_header = false;
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        if !saw_header {
            if line.trim_end() != RECORD_HEADER {
                return Err(parse_err(
                    lineno,
                    format!("expected header '{RECORD_HEADER}'"),
                ));
            }
            saw_header = true;
            continue;
        }
        if let Some(attrs) = line.strip_prefix("#segment") {
            let segment = parse_segment(attrs, lineno)?;
            segments.push(ReplaySegment {
                segment,
                tally: DetectionTally::default(),
                skipped: 0,
            });
            continue;
        }
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let current = match segments.last_mut() {
            Some(s) => s,
            None => {
                segments.push(ReplaySegment {
                    segment: Segment {
                        point: 0,
                        stage: None,
                        phi0: default_phi0,
                        mode: None,
                    },
                    tally: DetectionTally::default(),
                    skipped: 0,
                });
                segments.last_mut().expect("just pushed")
            }
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(parse_err(
                lineno,
                format!("expected 5 fields, got {}", fields.len()),
            ));
        }
        let int = |i: usize| -> Result<i64, ExperimentError> {
            fields[i].trim().parse::<i64>().map_err(|_| {
                parse_err(
                    lineno,
                    format!("field {} '{}' is not an integer", i + 1, fields[i]),
                )
            })
        };
        let flag = |i: usize| -> Result<bool, ExperimentError> {
            match int(i)? {
                0 => Ok(false),
                1 => Ok(true),
                v => Err(parse_err(
                    lineno,
                    format!("field {} must be 0 or 1, got {v}", i + 1),
                )),
            }
        };
        let index = int(0)?;
        if index < 1 {
            return Err(parse_err(
                lineno,
                format!("pulse index {index} must be positive"),
            ));
        }
        let x = Setting::from_value(int(1)?)
            .ok_or_else(|| parse_err(lineno, format!("x must be 1 or -1, got '{}'", fields[1])))?;
        let (d0, d1, herald) = (flag(2)?, flag(3)?, flag(4)?);
        match (d0, d1) {
            (true, true) => return Err(ExperimentError::Coincidence { line: lineno }),
            (false, false) => current.skipped += 1,
            _ if !herald => current.skipped += 1,
            (true, false) => current.tally.record(x, Channel::Zero),
            (false, true) => current.tally.record(x, Channel::One),
        }
    }
    if !saw_header {
        return Err(parse_err(1, "empty record file".into()));
    }
    Ok(segments)
}

fn parse_err(line: usize, message: String) -> ExperimentError {
    ExperimentError::Parse { line, message }
}

fn parse_segment(attrs: &str, lineno: usize) -> Result<Segment, ExperimentError> {
    let mut seg = Segment {
        point: 0,
        stage: None,
        phi0: None,
        mode: None,
    };
    for item in attrs.split_whitespace() {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| parse_err(lineno, format!("segment attribute '{item}' lacks '='")))?;
        let bad = |what: &str| parse_err(lineno, format!("segment {what} '{v}' is invalid"));
        match k {
            "point" => seg.point = v.parse().map_err(|_| bad("point"))?,
            "stage" => seg.stage = Some(v.parse().map_err(|_| bad("stage"))?),
            "phi0" => seg.phi0 = Some(v.parse().map_err(|_| bad("phi0"))?),
            "mode" => seg.mode = Some(v.parse().map_err(|_| bad("mode"))?),
            _ => {
                return Err(parse_err(
                    lineno,
                    format!("unknown segment attribute '{k}'"),
                ))
            }
        }
    }
    Ok(seg)
}

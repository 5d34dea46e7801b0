//! Sweeps, staged runs and replay.
//!
//! Grid point `j` of a sweep draws from stream `(seed, j, 0)` on a freshly
//! reset network. In a staged run each grid point gets one network, reset
//! once; the three stages then run back to back on it in the configured
//! order, stage `s` drawing from stream `(seed, j, s + 1)`. Beam-splitter
//! state carries over from one stage to the next.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::csv::SweepRow;
use super::records::{EventSink, ReplaySegment, Segment};
use crate::analysis::{
    compare_stages, fit_sinusoid_weighted, DetectionTally, FitPoint, FitResult, FrequencyPoint,
    StageFit, StageReport, VerdictTolerance,
};
use crate::engine::MziNetwork;
use crate::error::{AnalysisError, ExperimentError};
use crate::rng::stream;
use crate::schedule::{ScheduleKind, Setting};

/// Frequency column of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Column {
    F0Plus,
    F0Minus,
    F0Ungrouped,
}

impl Column {
    pub const ALL: [Column; 3] = [Column::F0Plus, Column::F0Minus, Column::F0Ungrouped];

    pub fn name(self) -> &'static str {
        match self {
            Column::F0Plus => "f0_plus",
            Column::F0Minus => "f0_minus",
            Column::F0Ungrouped => "f0_ungrouped",
        }
    }

    /// Group behind a grouped column.
    pub fn setting(self) -> Option<Setting> {
        match self {
            Column::F0Plus => Some(Setting::Plus),
            Column::F0Minus => Some(Setting::Minus),
            Column::F0Ungrouped => None,
        }
    }

    fn value(self, p: &FrequencyPoint) -> Option<(f64, f64)> {
        match self.setting() {
            Some(x) => p.f0(x).zip(p.f0_variance(x)),
            None => p.f0_ungrouped.zip(p.f0_ungrouped_variance()),
        }
    }
}

/// Fits one column over the rows that have data in it, using binomial
/// variances for the standard errors.
pub fn fit_column(rows: &[SweepRow], column: Column) -> Result<FitResult, AnalysisError> {
    let points: Vec<FitPoint> = rows
        .iter()
        .filter_map(|r| {
            column.value(&r.point).map(|(value, variance)| FitPoint {
                phi0: r.point.phi0,
                value,
                variance: Some(variance),
            })
        })
        .collect();
    fit_sinusoid_weighted(&points)
}

/// Runs `photons` messengers through `net` under `kind`, streaming events
/// to `sink` when given.
fn run_segment(
    cfg: &ExperimentConfig,
    net: &mut MziNetwork,
    kind: ScheduleKind,
    point: usize,
    stage: u64,
    mut sink: Option<&mut dyn EventSink>,
) -> Result<DetectionTally, ExperimentError> {
    let schedule = cfg.schedule_for(kind, stage)?;
    let mut rng = stream(cfg.seed, point as u64, stage);
    let mut counts = DetectionTally::default();
    for x in schedule.iter().take(cfg.photons as usize) {
        let event = net.run_photon(x, &mut rng)?;
        counts.record(event.x, event.detector);
        if let Some(sink) = sink.as_deref_mut() {
            sink.record(&event)?;
        }
    }
    Ok(counts)
}

fn reborrow<'a>(sink: &'a mut Option<&mut dyn EventSink>) -> Option<&'a mut dyn EventSink> {
    match sink {
        Some(s) => Some(&mut **s),
        None => None,
    }
}

fn new_network(cfg: &ExperimentConfig, phi0: f64) -> Result<MziNetwork, ExperimentError> {
    Ok(MziNetwork::new(cfg.alpha, phi0, cfg.phases(), cfg.init)?)
}

fn sweep_point(
    cfg: &ExperimentConfig,
    j: usize,
    sink: Option<&mut dyn EventSink>,
) -> Result<SweepRow, ExperimentError> {
    let phi0 = cfg.grid.phase(j);
    let mut net = new_network(cfg, phi0)?;
    let counts = run_segment(cfg, &mut net, cfg.schedule, j, 0, sink)?;
    Ok(SweepRow {
        stage: None,
        point_index: j,
        mode: Some(cfg.schedule),
        point: FrequencyPoint::new(phi0, counts),
    })
}

/// Runs `cfg.schedule` over the grid. Points run in parallel unless events
/// are being recorded; results do not depend on the choice.
pub fn run_sweep(
    cfg: &ExperimentConfig,
    sink: Option<&mut dyn EventSink>,
) -> Result<Vec<SweepRow>, ExperimentError> {
    cfg.validate()?;
    match sink {
        None => (0..cfg.grid.points)
            .into_par_iter()
            .map(|j| sweep_point(cfg, j, None))
            .collect(),
        Some(sink) => (0..cfg.grid.points)
            .map(|j| {
                sink.begin_segment(&Segment {
                    point: j,
                    stage: None,
                    phi0: Some(cfg.grid.phase(j)),
                    mode: Some(cfg.schedule),
                })?;
                sweep_point(cfg, j, Some(&mut *sink))
            })
            .collect(),
    }
}

/// Rows of a staged run with its per-stage fits and verdict.
#[derive(Clone, Debug)]
pub struct StagedRun {
    /// Ordered by stage, then grid point.
    pub rows: Vec<SweepRow>,
    pub fits: [StageFit; 3],
    pub report: StageReport,
}

fn staged_point(
    cfg: &ExperimentConfig,
    j: usize,
    mut sink: Option<&mut dyn EventSink>,
) -> Result<[SweepRow; 3], ExperimentError> {
    let plan = cfg
        .stages
        .as_ref()
        .ok_or_else(|| ExperimentError::Config("no stages configured".into()))?;
    let phi0 = cfg.grid.phase(j);
    let mut net = new_network(cfg, phi0)?;
    let mut counts = [DetectionTally::default(); 3];
    for &s in &plan.order {
        let kind = plan.stages[s];
        if let Some(sink) = sink.as_mut() {
            sink.begin_segment(&Segment {
                point: j,
                stage: Some(s),
                phi0: Some(phi0),
                mode: Some(kind),
            })?;
        }
        counts[s] = run_segment(cfg, &mut net, kind, j, s as u64 + 1, reborrow(&mut sink))?;
    }
    Ok([0, 1, 2].map(|s| SweepRow {
        stage: Some(s),
        point_index: j,
        mode: Some(plan.stages[s]),
        point: FrequencyPoint::new(phi0, counts[s]),
    }))
}

/// Runs the configured three-stage protocol.
pub fn run_stages(
    cfg: &ExperimentConfig,
    sink: Option<&mut dyn EventSink>,
) -> Result<StagedRun, ExperimentError> {
    cfg.validate()?;
    let plan = cfg
        .stages
        .as_ref()
        .ok_or_else(|| ExperimentError::Config("no stages configured".into()))?;
    let per_point: Vec<[SweepRow; 3]> = match sink {
        None => (0..cfg.grid.points)
            .into_par_iter()
            .map(|j| staged_point(cfg, j, None))
            .collect::<Result<_, _>>()?,
        Some(sink) => (0..cfg.grid.points)
            .map(|j| staged_point(cfg, j, Some(&mut *sink)))
            .collect::<Result<_, _>>()?,
    };
    let mut rows: Vec<SweepRow> = per_point.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.stage, r.point_index));
    let (fits, report) = analyze_stages(&rows, plan.stages, cfg)?;
    Ok(StagedRun { rows, fits, report })
}

/// Fits each stage and compares them. A `fixed:-1` stage is fitted on its
/// `x = −1` group, every other stage on its `x = +1` group; shifts are
/// taken relative to `φ₁` of the fitted group.
pub fn analyze_stages(
    rows: &[SweepRow],
    kinds: [ScheduleKind; 3],
    cfg: &ExperimentConfig,
) -> Result<([StageFit; 3], StageReport), ExperimentError> {
    let phases = cfg.phases();
    let mut fits = Vec::with_capacity(3);
    for (s, kind) in kinds.iter().enumerate() {
        let stage_rows: Vec<SweepRow> = rows
            .iter()
            .filter(|r| r.stage == Some(s))
            .cloned()
            .collect();
        let column = match kind {
            ScheduleKind::Fixed(Setting::Minus) => Column::F0Minus,
            _ => Column::F0Plus,
        };
        let setting = column.setting().expect("grouped column");
        fits.push(StageFit {
            label: format!("{kind} {}", column.name()),
            fit: fit_column(&stage_rows, column)?,
            reference_phase: phases.phase_for(setting),
        });
    }
    let fits: [StageFit; 3] = fits.try_into().expect("three stages");
    let tolerance = cfg.verdict_tolerance(VerdictTolerance::from_standard_errors(&fits));
    let report = compare_stages(&fits, cfg.delta, cfg.reference_e(kinds[2]), Some(tolerance));
    Ok((fits, report))
}

/// Turns replayed segments into rows, merging segments that share a
/// `(stage, point)`. Every segment needs a phase.
pub fn replay_rows(segments: &[ReplaySegment]) -> Result<Vec<SweepRow>, ExperimentError> {
    let mut merged: BTreeMap<(Option<usize>, usize), SweepRow> = BTreeMap::new();
    for seg in segments {
        let s = &seg.segment;
        let phi0 = s.phi0.ok_or_else(|| {
            ExperimentError::Config(format!(
                "segment for point {} has no phi0; supply one",
                s.point
            ))
        })?;
        let row = merged
            .entry((s.stage, s.point))
            .or_insert_with(|| SweepRow {
                stage: s.stage,
                point_index: s.point,
                mode: s.mode,
                point: FrequencyPoint::new(phi0, DetectionTally::default()),
            });
        if row.point.phi0 != phi0 || row.mode != s.mode {
            return Err(ExperimentError::Config(format!(
                "segments for point {} disagree on phi0 or mode",
                s.point
            )));
        }
        let mut counts = row.point.counts;
        counts.merge(&seg.tally);
        row.point = FrequencyPoint::new(phi0, counts);
    }
    Ok(merged.into_values().collect())
}

/// Stage schedules recorded in replayed rows, falling back to `fallback`.
pub fn stage_kinds(
    rows: &[SweepRow],
    fallback: Option<[ScheduleKind; 3]>,
) -> Result<[ScheduleKind; 3], ExperimentError> {
    let mut kinds: [Option<ScheduleKind>; 3] = fallback.map_or([None; 3], |f| f.map(Some));
    for r in rows {
        match (r.stage, r.mode) {
            (Some(s), Some(m)) if s < 3 => kinds[s] = Some(m),
            (Some(s), _) if s >= 3 => {
                return Err(ExperimentError::Config(format!(
                    "stage index {s} out of range"
                )))
            }
            _ => {}
        }
    }
    match kinds {
        [Some(a), Some(b), Some(c)] => Ok([a, b, c]),
        _ => Err(ExperimentError::Config(
            "stage schedules unknown; configure stages".into(),
        )),
    }
}

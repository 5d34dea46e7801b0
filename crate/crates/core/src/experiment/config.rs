//! Experiment configuration and its flat `key = value` file grammar.
//!
//! ```text
//! file    := { line "\n" }
//! line    := blank | "#" comment | key ws* "=" ws* value
//! angle   := float | ["-"] [float "*"] "pi" ["/" float]
//! ```
//!
//! | key                | value                                   | default        |
//! |--------------------|-----------------------------------------|----------------|
//! | `grid_start`       | angle                                   | `0`            |
//! | `grid_stop`        | angle (exclusive)                       | `2*pi`         |
//! | `grid_points`      | integer ≥ 4                             | `32`           |
//! | `delta`            | angle, `φ₁(−1)` with `φ₁(+1) = 0`       | `-pi/2`        |
//! | `alpha`            | real in (0, 1)                          | `0.99`         |
//! | `photons`          | photons per grid point (per stage)      | `1000000`      |
//! | `schedule`         | `fixed:±1`, `systematic:K`, `random:K`  | `fixed:+1`     |
//! | `seed`             | unsigned integer                        | `1`            |
//! | `init`             | `default` or `random:SEED`              | `default`      |
//! | `stages`           | three schedules, comma separated        | unset          |
//! | `stage_order`      | permutation of `0,1,2`                  | `0,1,2`        |
//! | `expected_e`       | real in [0, 1]                          | from schedule  |
//! | `verdict_visibility_tol`, `verdict_shift_tol`, `verdict_rate_tol` | real | 3 SE   |
//! | `output`, `events`, `svg` | paths                            | unset          |
//!
//! Later assignments override earlier ones; command-line flags are applied
//! after the file. Environment variables are never consulted.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::PathBuf;

use crate::analysis::VerdictTolerance;
use crate::engine::InitPolicy;
use crate::error::{ExperimentError, ModelError};
use crate::rng::stream_seed;
use crate::schedule::{PhaseSetting, ScheduleKind, Setting, SettingSchedule};
use crate::theory::{e_random_approx, systematic_e_reference};

/// `points` equally spaced phases in `[start, stop)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Default for PhaseGrid {
    fn default() -> Self {
        PhaseGrid {
            start: 0.0,
            stop: TAU,
            points: 32,
        }
    }
}

impl PhaseGrid {
    pub fn phase(&self, j: usize) -> f64 {
        self.start + (self.stop - self.start) * j as f64 / self.points as f64
    }

    pub fn phases(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.phase(j)).collect()
    }
}

/// Three stages run back to back on the same network at each grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StagePlan {
    pub stages: [ScheduleKind; 3],
    /// Execution order as indices into `stages`.
    pub order: [usize; 3],
}

impl Default for StagePlan {
    fn default() -> Self {
        StagePlan {
            stages: [
                ScheduleKind::Fixed(Setting::Minus),
                ScheduleKind::Fixed(Setting::Plus),
                ScheduleKind::Systematic(1),
            ],
            order: [0, 1, 2],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub grid: PhaseGrid,
    pub delta: f64,
    pub alpha: f64,
    pub photons: u64,
    pub schedule: ScheduleKind,
    pub seed: u64,
    pub init: InitPolicy,
    pub stages: Option<StagePlan>,
    pub expected_e: Option<f64>,
    pub tolerance_visibility: Option<f64>,
    pub tolerance_shift: Option<f64>,
    pub tolerance_rate: Option<f64>,
    pub outputs: OutputPaths,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            grid: PhaseGrid::default(),
            delta: -FRAC_PI_2,
            alpha: 0.99,
            photons: 1_000_000,
            schedule: ScheduleKind::Fixed(Setting::Plus),
            seed: 1,
            init: InitPolicy::Default,
            stages: None,
            expected_e: None,
            tolerance_visibility: None,
            tolerance_shift: None,
            tolerance_rate: None,
            outputs: OutputPaths::default(),
        }
    }
}

/// Stream index reserved for the coin sequence of random schedules.
const SCHEDULE_STREAM: u64 = u64::MAX - 1;

impl ExperimentConfig {
    /// Parses a config file on top of the defaults.
    pub fn from_kv(text: &str) -> Result<Self, ExperimentError> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_kv(text)?;
        Ok(cfg)
    }

    pub fn apply_kv(&mut self, text: &str) -> Result<(), ExperimentError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ExperimentError::Parse {
                line: n + 1,
                message: format!("expected 'key = value', got '{line}'"),
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|message| ExperimentError::Parse {
                    line: n + 1,
                    message,
                })?;
        }
        Ok(())
    }

    /// Assigns one key. Used for config files and command-line overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let real = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| format!("{key}: '{v}' is not a number"))
        };
        let path = |v: &str| Some(PathBuf::from(v));
        match key {
            "grid_start" => self.grid.start = parse_angle(value)?,
            "grid_stop" => self.grid.stop = parse_angle(value)?,
            "grid_points" => {
                self.grid.points = value
                    .parse()
                    .map_err(|_| format!("grid_points: '{value}' is not an integer"))?
            }
            "delta" => self.delta = parse_angle(value)?,
            "alpha" => self.alpha = real(value)?,
            "photons" => {
                self.photons = value
                    .parse()
                    .map_err(|_| format!("photons: '{value}' is not an integer"))?
            }
            "schedule" => self.schedule = value.parse()?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| format!("seed: '{value}' is not an unsigned integer"))?
            }
            "init" => self.init = parse_init(value)?,
            "stages" => {
                let kinds = value
                    .split(',')
                    .map(str::parse::<ScheduleKind>)
                    .collect::<Result<Vec<_>, _>>()?;
                let stages: [ScheduleKind; 3] = kinds
                    .try_into()
                    .map_err(|_| "stages: expected exactly three schedules".to_string())?;
                let order = self.stages.map_or([0, 1, 2], |p| p.order);
                self.stages = Some(StagePlan { stages, order });
            }
            "stage_order" => {
                let idx = value
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| format!("stage_order: '{value}' is not a list of integers"))?;
                let order: [usize; 3] = idx
                    .try_into()
                    .map_err(|_| "stage_order: expected three indices".to_string())?;
                let mut plan = self.stages.unwrap_or_default();
                plan.order = order;
                self.stages = Some(plan);
            }
            "expected_e" => self.expected_e = Some(real(value)?),
            "verdict_visibility_tol" => self.tolerance_visibility = Some(real(value)?),
            "verdict_shift_tol" => self.tolerance_shift = Some(real(value)?),
            "verdict_rate_tol" => self.tolerance_rate = Some(real(value)?),
            "output" => self.outputs.csv = path(value),
            "events" => self.outputs.events = path(value),
            "svg" => self.outputs.svg = path(value),
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.grid.points < 4 {
            return bad(format!(
                "grid_points = {} (need at least 4)",
                self.grid.points
            ));
        }
        if self.grid.stop <= self.grid.start
            || !self.grid.start.is_finite()
            || !self.grid.stop.is_finite()
        {
            return bad("grid_stop must exceed grid_start".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ModelError::InvalidAlpha(self.alpha).into());
        }
        if self.photons < 1 {
            return bad("photons must be at least 1".into());
        }
        if !self.delta.is_finite() {
            return bad("delta must be finite".into());
        }
        if let Some(e) = self.expected_e {
            if !(0.0..=1.0).contains(&e) {
                return Err(ModelError::RateOutOfRange(e).into());
            }
        }
        if let Some(plan) = &self.stages {
            let mut seen = plan.order;
            seen.sort_unstable();
            if seen != [0, 1, 2] {
                return bad(format!(
                    "stage_order {:?} is not a permutation of 0,1,2",
                    plan.order
                ));
            }
        }
        Ok(())
    }

    pub fn phases(&self) -> PhaseSetting {
        PhaseSetting::with_delta(self.delta)
    }

    /// Binds a schedule kind to the coin stream of `stage` (0 for sweeps).
    pub fn schedule_for(
        &self,
        kind: ScheduleKind,
        stage: u64,
    ) -> Result<SettingSchedule, ModelError> {
        kind.build(stream_seed(self.seed, SCHEDULE_STREAM, stage))
    }

    /// Rate the corpuscular model is expected to show under `kind`:
    /// `expected_e` if configured, otherwise the reference table for
    /// systematic switching or `1/(2+2K)` for random switching.
    pub fn reference_e(&self, kind: ScheduleKind) -> Option<f64> {
        self.expected_e.or(match kind {
            ScheduleKind::Fixed(_) => Some(0.0),
            ScheduleKind::Systematic(k) => systematic_e_reference(k),
            ScheduleKind::Random(k) => e_random_approx(k).ok(),
        })
    }

    /// Config windows where set, `default` elsewhere.
    pub fn verdict_tolerance(&self, default: VerdictTolerance) -> VerdictTolerance {
        VerdictTolerance {
            visibility: self.tolerance_visibility.unwrap_or(default.visibility),
            psi: self.tolerance_shift.unwrap_or(default.psi),
            rate: self.tolerance_rate.or(default.rate),
        }
    }
}

fn parse_init(value: &str) -> Result<InitPolicy, String> {
    match value {
        "default" => Ok(InitPolicy::Default),
        _ => value
            .strip_prefix("random:")
            .and_then(|s| s.parse().ok())
            .map(|seed| InitPolicy::Random { seed })
            .ok_or_else(|| format!("init: '{value}' is not 'default' or 'random:SEED'")),
    }
}

/// Parses `1.5`, `pi`, `-pi/2`, `2*pi`, `0.5*pi/3`.
pub fn parse_angle(value: &str) -> Result<f64, String> {
    let v = value.trim();
    if let Ok(x) = v.parse::<f64>() {
        return Ok(x);
    }
    let err = || format!("'{value}' is not an angle");
    let (sign, body) = match v.strip_prefix('-') {
        Some(rest) => (-1.0, rest.trim()),
        None => (1.0, v),
    };
    let (numer, denom) = match body.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().map_err(|_| err())?),
        None => (body, 1.0),
    };
    let factor = match numer.split_once('*') {
        Some((f, p)) if p.trim() == "pi" => f.trim().parse::<f64>().map_err(|_| err())?,
        None if numer == "pi" => 1.0,
        _ => return Err(err()),
    };
    Ok(sign * factor * PI / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0.25").unwrap(), 0.25);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("-pi/2").unwrap(), -FRAC_PI_2);
        assert_eq!(parse_angle("2*pi").unwrap(), TAU);
        assert!((parse_angle("3 * pi / 4").unwrap() - 0.75 * PI).abs() < 1e-15);
        assert!(parse_angle("tau").is_err());
        assert!(parse_angle("2*e").is_err());
    }

    #[test]
    fn grid_is_half_open() {
        let g = PhaseGrid::default();
        let p = g.phases();
        assert_eq!(p.len(), 32);
        assert_eq!(p[0], 0.0);
        assert!((p[31] - TAU * 31.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn parses_file_and_overrides() {
        let text = "\
# three-stage run
grid_points = 16
delta = -pi/2
alpha=0.9
photons = 5000
schedule = random:3
seed = 42
init = random:7
stages = fixed:-1, fixed:+1, systematic:1
stage_order = 2,0,1
output = out.csv
";
        let mut cfg = ExperimentConfig::from_kv(text).unwrap();
        assert_eq!(cfg.grid.points, 16);
        assert_eq!(cfg.alpha, 0.9);
        assert_eq!(cfg.photons, 5000);
        assert_eq!(cfg.schedule, ScheduleKind::Random(3));
        assert_eq!(cfg.init, InitPolicy::Random { seed: 7 });
        let plan = cfg.stages.unwrap();
        assert_eq!(plan.order, [2, 0, 1]);
        assert_eq!(plan.stages[2], ScheduleKind::Systematic(1));
        assert_eq!(cfg.outputs.csv, Some(PathBuf::from("out.csv")));
        cfg.validate().unwrap();
        cfg.set("photons", "10").unwrap();
        assert_eq!(cfg.photons, 10);
    }

    #[test]
    fn reports_bad_lines() {
        let err = ExperimentConfig::from_kv("seed = 1\nbogus\n").unwrap_err();
        assert!(matches!(err, ExperimentError::Parse { line: 2, .. }));
        let err = ExperimentConfig::from_kv("colour = blue\n").unwrap_err();
        assert!(matches!(err, ExperimentError::Parse { line: 1, .. }));
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        cfg.grid.points = 3;
        assert!(cfg.validate().is_err());
        for bad in [
            ExperimentConfig {
                alpha: 1.0,
                ..ExperimentConfig::default()
            },
            ExperimentConfig {
                photons: 0,
                ..ExperimentConfig::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
        let mut cfg = ExperimentConfig::default();
        cfg.set("stage_order", "0,0,1").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn reference_rates() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.reference_e(ScheduleKind::Systematic(1)), Some(0.333));
        assert_eq!(cfg.reference_e(ScheduleKind::Random(1)), Some(0.25));
        assert_eq!(cfg.reference_e(ScheduleKind::Systematic(3)), None);
    }
}

//! Plain-text fit reports.
//!
//! A report is a list of `key = value` lines headed by `# mzi-fit v1`, one
//! block per frequency column. Grouped columns use the per-group
//! normalization `N₀(x)/(N₀(x)+N₁(x))`; `i0_offset` rescales the fitted
//! offset by the mean group occupancy to the joint-probability convention.
//! `e_hat` inverts the shift of each group relative to its own `φ₁(x)`.

use std::fmt::Write;

use super::csv::SweepRow;
use super::runner::{fit_column, Column};
use crate::analysis::{estimate_e, FitResult, StageFit, StageReport};
use crate::schedule::{wrap_pi, PhaseSetting, Setting};

pub const FIT_SCHEMA: &str = "# mzi-fit v1";

/// Fits every column with data and formats the results. `delta` is used to
/// invert the grouped shifts.
pub fn fit_report(rows: &[SweepRow], delta: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{FIT_SCHEMA}");
    for column in Column::ALL {
        let _ = writeln!(out, "[{}]", column.name());
        let fit = match fit_column(rows, column) {
            Ok(fit) => fit,
            Err(e) => {
                let _ = writeln!(out, "status = {e}");
                continue;
            }
        };
        let _ = writeln!(out, "points = {}", fit.points);
        let _ = writeln!(out, "C = {:.6}", fit.c);
        let _ = writeln!(out, "se_C = {:.6}", fit.se_c);
        let _ = writeln!(out, "visibility = {:.6}", fit.visibility);
        let _ = writeln!(out, "se_visibility = {:.6}", fit.se_visibility);
        let _ = writeln!(out, "psi = {:.6}", fit.psi);
        let _ = writeln!(out, "se_psi = {:.6}", fit.se_psi);
        let _ = writeln!(out, "rms_residual = {:.6}", fit.rms_residual);
        let Some(x) = column.setting() else { continue };
        let occupancy: Vec<f64> = rows
            .iter()
            .filter(|r| r.point.f0(x).is_some())
            .filter_map(|r| r.point.counts.occupancy(x))
            .collect();
        let mean_occupancy = occupancy.iter().sum::<f64>() / occupancy.len() as f64;
        let _ = writeln!(out, "occupancy = {mean_occupancy:.6}");
        let _ = writeln!(out, "i0_offset = {:.6}", mean_occupancy * fit.c);
        // Shift of group x relative to φ₁(x); the other arm sits at ∓δ from it.
        let phases = PhaseSetting::with_delta(delta);
        let relative = FitResult {
            psi: wrap_pi(fit.psi - phases.phase_for(x)),
            ..fit
        };
        let step = match x {
            Setting::Plus => delta,
            Setting::Minus => -delta,
        };
        let _ = writeln!(out, "psi_relative = {:.6}", relative.psi);
        match estimate_e(&relative, step) {
            Ok(est) => {
                let _ = writeln!(out, "e_hat = {:.6}", est.e);
                let _ = writeln!(out, "se_e = {:.6}", est.se_e);
                let _ = writeln!(out, "visibility_model = {:.6}", est.visibility_model);
                let _ = writeln!(
                    out,
                    "visibility_discrepancy = {:.6}",
                    est.visibility_discrepancy
                );
            }
            Err(e) => {
                let _ = writeln!(out, "e_hat = none ({e})");
            }
        }
    }
    out
}

/// Per-stage fit blocks followed by the stage comparison.
pub fn stage_report(fits: &[StageFit; 3], report: &StageReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{FIT_SCHEMA}");
    for (s, stage) in fits.iter().enumerate() {
        let f = &stage.fit;
        let _ = writeln!(out, "[stage {s}: {}]", stage.label);
        let _ = writeln!(out, "points = {}", f.points);
        let _ = writeln!(out, "C = {:.6}", f.c);
        let _ = writeln!(out, "visibility = {:.6}", f.visibility);
        let _ = writeln!(out, "se_visibility = {:.6}", f.se_visibility);
        let _ = writeln!(out, "psi = {:.6}", f.psi);
        let _ = writeln!(out, "se_psi = {:.6}", f.se_psi);
        let _ = writeln!(out, "rms_residual = {:.6}", f.rms_residual);
    }
    let _ = writeln!(out, "[comparison]");
    let _ = write!(out, "{report}");
    out
}

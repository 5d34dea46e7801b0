//! Comparison of a switched-setting stage against two fixed-setting stages.

use std::fmt;

use super::{estimate::invert_shift, FitResult};
use crate::error::AnalysisError;
use crate::schedule::wrap_pi;
use crate::theory::{visibility_shift, CorpuscularParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    QuantumLike,
    CorpuscularLike,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::QuantumLike => "QUANTUM-LIKE",
            Verdict::CorpuscularLike => "CORPUSCULAR-LIKE",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Fitted fringe of one stage. `reference_phase` is `φ₁(x)` of the group
/// that was fitted; shifts are compared relative to it.
#[derive(Clone, Debug, PartialEq)]
pub struct StageFit {
    pub label: String,
    pub fit: FitResult,
    pub reference_phase: f64,
}

impl StageFit {
    pub fn relative_shift(&self) -> f64 {
        wrap_pi(self.fit.psi - self.reference_phase)
    }
}

/// Acceptance windows for the verdict.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerdictTolerance {
    pub visibility: f64,
    pub psi: f64,
    /// Window on `|Ê − E_expected|`. `None` leaves the expected rate
    /// informational.
    pub rate: Option<f64>,
}

const TOLERANCE_FLOOR: f64 = 1e-9;

impl VerdictTolerance {
    /// Three combined standard errors of the test stage and the mean of
    /// the two reference stages.
    pub fn from_standard_errors(stages: &[StageFit; 3]) -> Self {
        let [r1, r2, t] = [&stages[0].fit, &stages[1].fit, &stages[2].fit];
        let combine = |a: f64, b: f64, c: f64| {
            let ref_var = 0.25 * (a * a + b * b);
            (3.0 * (ref_var + c * c).sqrt()).max(TOLERANCE_FLOOR)
        };
        VerdictTolerance {
            visibility: combine(r1.se_visibility, r2.se_visibility, t.se_visibility),
            psi: combine(r1.se_psi, r2.se_psi, t.se_psi),
            rate: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageSummary {
    pub label: String,
    pub visibility: f64,
    pub se_visibility: f64,
    pub relative_shift: f64,
    pub se_psi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageReport {
    pub stages: [StageSummary; 3],
    pub reference_visibility: f64,
    pub reference_shift: f64,
    /// Reference minus test-stage visibility.
    pub visibility_drop: f64,
    /// Test-stage minus reference shift.
    pub shift_difference: f64,
    /// `(Ê, se)` inverted from the shift difference, when consistent.
    pub e_hat: Option<(f64, f64)>,
    pub expected_e: Option<f64>,
    pub tolerance: VerdictTolerance,
    pub verdict: Verdict,
}

/// Stages 1 and 2 are the fixed-setting references, stage 3 the test stage.
///
/// The verdict is QUANTUM-LIKE when the test stage reproduces the reference
/// visibility and shift. It is CORPUSCULAR-LIKE when some `E ∈ [0, 1]`
/// explains both: the shift difference equals `ψ(E)` and the visibility
/// equals the reference visibility times `Δ(E)` (and `E` matches
/// `expected_e` when given). Otherwise INCONCLUSIVE.
pub fn compare_stages(
    stages: &[StageFit; 3],
    delta: f64,
    expected_e: Option<f64>,
    tolerance: Option<VerdictTolerance>,
) -> StageReport {
    let tolerance = tolerance.unwrap_or_else(|| VerdictTolerance::from_standard_errors(stages));
    let summaries = stages.clone().map(|s| StageSummary {
        visibility: s.fit.visibility,
        se_visibility: s.fit.se_visibility,
        relative_shift: s.relative_shift(),
        se_psi: s.fit.se_psi,
        label: s.label,
    });
    let reference_visibility = 0.5 * (summaries[0].visibility + summaries[1].visibility);
    let reference_shift = circular_mean(summaries[0].relative_shift, summaries[1].relative_shift);
    let test = &summaries[2];
    let visibility_drop = reference_visibility - test.visibility;
    let shift_difference = wrap_pi(test.relative_shift - reference_shift);

    let quantum =
        visibility_drop.abs() <= tolerance.visibility && shift_difference.abs() <= tolerance.psi;

    let se_shift = (tolerance.psi / 3.0).max(test.se_psi);
    let inverted: Result<(f64, f64), AnalysisError> =
        invert_shift(shift_difference, se_shift, delta);
    let e_hat = inverted.ok();
    let corpuscular = e_hat.is_some_and(|(e, _)| {
        let params = CorpuscularParams::new(e.clamp(0.0, 1.0), delta).expect("clamped");
        let (vis_model, _) = visibility_shift(&params);
        let vis_ok =
            (reference_visibility * vis_model - test.visibility).abs() <= tolerance.visibility;
        let rate_ok = match (expected_e, tolerance.rate) {
            (Some(x), Some(tol)) => (e - x).abs() <= tol,
            _ => true,
        };
        vis_ok && rate_ok
    });

    let verdict = if quantum {
        Verdict::QuantumLike
    } else if corpuscular {
        Verdict::CorpuscularLike
    } else {
        Verdict::Inconclusive
    };

    StageReport {
        stages: summaries,
        reference_visibility,
        reference_shift,
        visibility_drop,
        shift_difference,
        e_hat,
        expected_e,
        tolerance,
        verdict,
    }
}

fn circular_mean(a: f64, b: f64) -> f64 {
    (a.sin() + b.sin()).atan2(a.cos() + b.cos())
}

impl fmt::Display for StageReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.stages.iter().enumerate() {
            writeln!(
                f,
                "stage{} = {} visibility={} se_visibility={} shift={} se_shift={}",
                i + 1,
                s.label,
                s.visibility,
                s.se_visibility,
                s.relative_shift,
                s.se_psi
            )?;
        }
        writeln!(f, "reference_visibility = {}", self.reference_visibility)?;
        writeln!(f, "reference_shift = {}", self.reference_shift)?;
        writeln!(f, "visibility_drop = {}", self.visibility_drop)?;
        writeln!(f, "shift_difference = {}", self.shift_difference)?;
        match self.e_hat {
            Some((e, se)) => writeln!(f, "e_hat = {e} se_e = {se}")?,
            None => writeln!(f, "e_hat = none")?,
        }
        if let Some(e) = self.expected_e {
            writeln!(f, "expected_e = {e}")?;
        }
        write!(
            f,
            "tolerance visibility={} shift={}",
            self.tolerance.visibility, self.tolerance.psi
        )?;
        match self.tolerance.rate {
            Some(rate) => writeln!(f, " rate={rate}")?,
            None => writeln!(f)?,
        }
        writeln!(f, "verdict = {}", self.verdict)
    }
}

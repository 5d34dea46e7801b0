//! Inversion of the fringe shift for the wrong-association rate.
//!
//! From `tan ψ = E sin δ / (1 − E + E cos δ)` it follows that
//! `E = tan ψ / (sin δ + tan ψ (1 − cos δ))`. The visibility is not used
//! for the inversion, since experimental imperfections also reduce it; it
//! is compared against the model value and the discrepancy reported.

use super::FitResult;
use crate::error::AnalysisError;
use crate::schedule::wrap_pi;
use crate::theory::{visibility_shift, CorpuscularParams};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EEstimate {
    pub e: f64,
    /// Standard error propagated from the fitted shift.
    pub se_e: f64,
    /// Visibility the corpuscular closed form assigns to `e` (clamped to [0, 1]).
    pub visibility_model: f64,
    /// Fitted minus model visibility.
    pub visibility_discrepancy: f64,
}

const SLACK: f64 = 1e-9;

/// Returns `(E, se_E)` for a shift `psi` with standard error `se_psi`.
pub fn invert_shift(psi: f64, se_psi: f64, delta: f64) -> Result<(f64, f64), AnalysisError> {
    let psi = wrap_pi(psi);
    let (s, c) = delta.sin_cos();
    if s.abs() < 1e-12 {
        return if psi.abs() <= SLACK.max(3.0 * se_psi) {
            Ok((0.0, f64::INFINITY))
        } else {
            Err(AnalysisError::Unidentifiable)
        };
    }
    let t = psi.tan();
    let denom = s + t * (1.0 - c);
    if denom.abs() < 1e-300 {
        return Err(AnalysisError::Unidentifiable);
    }
    let e = t / denom;
    let de_dpsi = s / (denom * denom) / (psi.cos() * psi.cos());
    let se_e = (de_dpsi * se_psi).abs();

    let slack = SLACK.max(3.0 * se_e);
    if !(e >= -slack && e <= 1.0 + slack) {
        return Err(AnalysisError::Inconsistent { e });
    }
    // tan ψ does not fix the quadrant; the forward shift must reproduce ψ
    let params = CorpuscularParams::new(e.clamp(0.0, 1.0), delta).expect("clamped");
    let (_, psi_model) = visibility_shift(&params);
    if wrap_pi(psi_model - psi).abs() > 1e-6_f64.max(3.0 * se_psi) {
        return Err(AnalysisError::Inconsistent { e });
    }
    Ok((e, se_e))
}

/// Infers `E` from the shift of a fitted `x = +1` fringe, with
/// `δ = φ₁(−1) − φ₁(+1)`.
pub fn estimate_e(fit: &FitResult, delta: f64) -> Result<EEstimate, AnalysisError> {
    let (e, se_e) = invert_shift(fit.psi, fit.se_psi, delta)?;
    let params = CorpuscularParams::new(e.clamp(0.0, 1.0), delta).expect("clamped");
    let (visibility_model, _) = visibility_shift(&params);
    Ok(EEstimate {
        e,
        se_e,
        visibility_model,
        visibility_discrepancy: fit.visibility - visibility_model,
    })
}

//! Closed-form predictions.
//!
//! None of the quantum-theory functions takes a schedule: the predicted
//! grouped intensities do not depend on how `x` is switched. Only the
//! corpuscular closed form carries the sequence dependence, through the
//! wrong-association rate `E`.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::ModelError;
use crate::schedule::{PhaseSetting, Setting};

/// Output amplitudes of the interferometer for input `(a0, a1) = (1, 0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplitudePair {
    pub b0: Complex64,
    pub b1: Complex64,
}

/// Applies `i e^{iφ'} [[sin φ, cos φ], [cos φ, −sin φ]]` to `(1, 0)` with
/// `φ = (φ₀ − φ₁)/2`, `φ' = (φ₀ + φ₁)/2`.
pub fn mzi_amplitudes(phi0: f64, phi1: f64) -> AmplitudePair {
    let half_diff = 0.5 * (phi0 - phi1);
    let half_sum = 0.5 * (phi0 + phi1);
    let prefactor = Complex64::i() * Complex64::from_polar(1.0, half_sum);
    AmplitudePair {
        b0: prefactor * half_diff.sin(),
        b1: prefactor * half_diff.cos(),
    }
}

fn sin_sqr_half(theta: f64) -> f64 {
    let s = (0.5 * theta).sin();
    s * s
}

/// `sin²((φ₀ − φ₁(x))/2)`: D₀ intensity when `x` never changes.
pub fn qt_fixed(phi0: f64, x: Setting, phases: &PhaseSetting) -> f64 {
    sin_sqr_half(phi0 - phases.phase_for(x))
}

/// D₀ intensity for events grouped under `x`, with both settings equally
/// frequent: `½ sin²((φ₀ − φ₁(x))/2)`.
pub fn qt_grouped(phi0: f64, x: Setting, phases: &PhaseSetting) -> f64 {
    0.5 * qt_fixed(phi0, x, phases)
}

/// D₁ counterpart of [`qt_grouped`].
pub fn qt_grouped_d1(phi0: f64, x: Setting, phases: &PhaseSetting) -> f64 {
    0.5 - qt_grouped(phi0, x, phases)
}

/// D₀ intensity with events not grouped by `x`.
pub fn qt_ungrouped(phi0: f64, phases: &PhaseSetting) -> f64 {
    qt_grouped(phi0, Setting::Plus, phases) + qt_grouped(phi0, Setting::Minus, phases)
}

/// Grouped D₀ intensity computed from the ensemble density matrix
/// `Σ_y ρ(y)` and the projector `diag(1, 0) δ_{x,y}`.
pub fn qt_density_check(phi0: f64, phases: &PhaseSetting, x: Setting) -> f64 {
    let projector = Matrix2::new(
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
    );
    let zero = Matrix2::zeros();
    [Setting::Plus, Setting::Minus]
        .into_iter()
        .map(|y| {
            let amp = mzi_amplitudes(phi0, phases.phase_for(y));
            let b = Vector2::new(amp.b0, amp.b1);
            // ρ_ij = b_i* b_j, weighted by the occupancy 1/2 of each setting
            let rho = b.conjugate() * b.transpose() * Complex64::new(0.5, 0.0);
            let proj = if y == x { projector } else { zero };
            (rho * proj).trace().re
        })
        .sum()
}

/// Parameters of the corpuscular closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorpuscularParams {
    e: f64,
    delta: f64,
}

impl CorpuscularParams {
    /// `e` is the wrong-association rate, `delta = φ₁(−1) − φ₁(+1)`.
    pub fn new(e: f64, delta: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&e) {
            return Err(ModelError::RateOutOfRange(e));
        }
        Ok(CorpuscularParams { e, delta })
    }

    pub fn e(&self) -> f64 {
        self.e
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Grouped D₀ frequency predicted by the corpuscular model, with
/// `φ₁(+1) = 0` and `φ₁(−1) = δ`.
///
/// A fraction `E` of the events labelled `x` is generated from the phase
/// difference of the other setting.
pub fn corpuscular_grouped(phi0: f64, x: Setting, params: &CorpuscularParams) -> f64 {
    let e = params.e;
    let own_plus = sin_sqr_half(phi0);
    let own_minus = sin_sqr_half(phi0 - params.delta);
    let (own, other) = match x {
        Setting::Plus => (own_plus, own_minus),
        Setting::Minus => (own_minus, own_plus),
    };
    0.5 * (1.0 - e) * own + 0.5 * e * other
}

/// Visibility `Δ` and shift `ψ` of the `x = +1` corpuscular curve, which
/// equals `(1 − Δ cos(φ₀ − ψ))/4`.
///
/// `ψ = atan2(E sin δ, 1 − E + E cos δ)` lies in `(−π, π]`.
pub fn visibility_shift(params: &CorpuscularParams) -> (f64, f64) {
    let e = params.e;
    let (s, c) = params.delta.sin_cos();
    let along = 1.0 - e + e * c;
    let across = e * s;
    let delta_sq = 2.0 * e * e - 2.0 * e + 1.0 + 2.0 * e * (1.0 - e) * c;
    // clamp rounding below zero at E = 1/2, δ = π
    (delta_sq.max(0.0).sqrt(), across.atan2(along))
}

/// `E ≈ 1/(2 + 2K)` for the random switching procedure.
pub fn e_random_approx(k: u64) -> Result<f64, ModelError> {
    if k == 0 {
        return Err(ModelError::InvalidBlockLength(k));
    }
    Ok(1.0 / (2.0 + 2.0 * k as f64))
}

/// Reference fitted rates for the systematic procedure, `(K, E)`. There is
/// no closed form.
pub const SYSTEMATIC_E_REFERENCE: [(u64, f64); 2] = [(1, 0.333), (10, 0.100)];

pub fn systematic_e_reference(k: u64) -> Option<f64> {
    SYSTEMATIC_E_REFERENCE
        .iter()
        .find(|(kk, _)| *kk == k)
        .map(|(_, e)| *e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

    const EPS: f64 = 1e-12;
    fn defaults() -> PhaseSetting {
        PhaseSetting::default()
    }

    #[test]
    fn amplitude_examples() {
        let a = mzi_amplitudes(0.7, 0.7);
        assert!(a.b0.norm_sqr() < EPS);
        assert!((a.b1.norm_sqr() - 1.0).abs() < EPS);
        assert!((mzi_amplitudes(PI, 0.0).b0.norm_sqr() - 1.0).abs() < EPS);
        assert!((mzi_amplitudes(FRAC_PI_2 + 0.3, 0.3).b0.norm_sqr() - 0.5).abs() < EPS);
    }

    #[test]
    fn grouped_examples() {
        let p = defaults();
        assert!((qt_grouped(PI, Setting::Plus, &p) - 0.5).abs() < EPS);
        assert!((qt_grouped(0.0, Setting::Minus, &p) - 0.25).abs() < EPS);
        assert!(qt_grouped(0.0, Setting::Plus, &p).abs() < EPS);
    }

    #[test]
    fn ungrouped_examples() {
        let p = defaults();
        assert!((qt_ungrouped(0.0, &p) - 0.25).abs() < EPS);
        assert!((qt_ungrouped(PI, &p) - 0.75).abs() < EPS);
    }

    #[test]
    fn fixed_examples() {
        let p = defaults();
        assert!((qt_fixed(PI, Setting::Plus, &p) - 1.0).abs() < EPS);
        assert!((qt_fixed(0.0, Setting::Minus, &p) - 0.5).abs() < EPS);
    }

    #[test]
    fn density_examples() {
        let p = defaults();
        assert!((qt_density_check(PI, &p, Setting::Plus) - 0.5).abs() < EPS);
        assert!((qt_density_check(0.0, &p, Setting::Minus) - 0.25).abs() < EPS);
    }

    #[test]
    fn corpuscular_examples() {
        let params = CorpuscularParams::new(1.0 / 3.0, -FRAC_PI_2).unwrap();
        let v = corpuscular_grouped(0.0, Setting::Plus, &params);
        assert!((v - 1.0 / 12.0).abs() < EPS);
        // Δ = √5/3, ψ = arctan(−1/2)
        let (d, psi) = visibility_shift(&params);
        assert!((d - 5f64.sqrt() / 3.0).abs() < EPS);
        assert!((psi - (-0.5f64).atan()).abs() < EPS);
        for i in 0..64 {
            let phi0 = TAU * i as f64 / 64.0;
            let lhs = corpuscular_grouped(phi0, Setting::Plus, &params);
            let rhs = (1.0 - d * (phi0 - psi).cos()) / 4.0;
            assert!((lhs - rhs).abs() < EPS);
        }
    }

    #[test]
    fn corpuscular_rejects_bad_rate() {
        assert!(CorpuscularParams::new(-0.01, 0.0).is_err());
        assert!(CorpuscularParams::new(1.01, 0.0).is_err());
        assert!(CorpuscularParams::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn visibility_examples() {
        for delta in [-2.0, 0.0, 1.0, PI] {
            let (d, psi) = visibility_shift(&CorpuscularParams::new(0.0, delta).unwrap());
            assert!((d - 1.0).abs() < EPS && psi.abs() < EPS);
        }
        let (d, psi) = visibility_shift(&CorpuscularParams::new(0.5, FRAC_PI_2).unwrap());
        assert!((d - 0.5f64.sqrt()).abs() < EPS);
        assert!((psi - FRAC_PI_4).abs() < EPS);
    }

    #[test]
    fn random_rate_approximation() {
        assert_eq!(e_random_approx(1).unwrap(), 0.25);
        assert!((e_random_approx(10).unwrap() - 1.0 / 22.0).abs() < EPS);
        assert!(e_random_approx(0).is_err());
        let rates: Vec<f64> = (1..100).map(|k| e_random_approx(k).unwrap()).collect();
        assert!(rates.windows(2).all(|w| w[1] < w[0]));
        assert!(e_random_approx(1 << 40).unwrap() < 1e-12);
    }

    #[test]
    fn systematic_reference_table() {
        assert_eq!(systematic_e_reference(1), Some(0.333));
        assert_eq!(systematic_e_reference(10), Some(0.100));
        assert_eq!(systematic_e_reference(2), None);
    }

    fn setting() -> impl Strategy<Value = Setting> {
        prop_oneof![Just(Setting::Plus), Just(Setting::Minus)]
    }

    proptest! {
        #[test]
        fn normalization(phi0 in -10.0f64..10.0, delta in -PI..PI) {
            let p = PhaseSetting::with_delta(delta);
            let total: f64 = [Setting::Plus, Setting::Minus]
                .iter()
                .map(|&x| qt_grouped(phi0, x, &p) + qt_grouped_d1(phi0, x, &p))
                .sum();
            prop_assert!((total - 1.0).abs() < EPS);
        }

        #[test]
        fn unitarity(phi0 in -10.0f64..10.0, phi1 in -10.0f64..10.0) {
            let a = mzi_amplitudes(phi0, phi1);
            prop_assert!((a.b0.norm_sqr() + a.b1.norm_sqr() - 1.0).abs() < EPS);
            prop_assert!((a.b0.norm_sqr() - sin_sqr_half(phi0 - phi1)).abs() < EPS);
        }

        #[test]
        fn fixed_is_twice_grouped(phi0 in -10.0f64..10.0, delta in -PI..PI, x in setting()) {
            let p = PhaseSetting::with_delta(delta);
            prop_assert!((qt_fixed(phi0, x, &p) - 2.0 * qt_grouped(phi0, x, &p)).abs() < EPS);
        }

        #[test]
        fn density_matches_grouped(phi0 in -10.0f64..10.0, delta in -PI..PI, x in setting()) {
            let p = PhaseSetting::with_delta(delta);
            prop_assert!((qt_density_check(phi0, &p, x) - qt_grouped(phi0, x, &p)).abs() < EPS);
        }

        #[test]
        fn corpuscular_closed_form(e in 0.0f64..=1.0, delta in -PI..PI, phi0 in -10.0f64..10.0) {
            let params = CorpuscularParams::new(e, delta).unwrap();
            let (d, psi) = visibility_shift(&params);
            prop_assert!((0.0..=1.0 + EPS).contains(&d));
            let lhs = corpuscular_grouped(phi0, Setting::Plus, &params);
            prop_assert!((lhs - (1.0 - d * (phi0 - psi).cos()) / 4.0).abs() < EPS);
        }

        #[test]
        fn corpuscular_sum_is_ungrouped(e in 0.0f64..=1.0, delta in -PI..PI, phi0 in -10.0f64..10.0) {
            let params = CorpuscularParams::new(e, delta).unwrap();
            let sum = corpuscular_grouped(phi0, Setting::Plus, &params)
                + corpuscular_grouped(phi0, Setting::Minus, &params);
            prop_assert!((sum - qt_ungrouped(phi0, &PhaseSetting::with_delta(delta))).abs() < EPS);
        }

        #[test]
        fn zero_rate_is_quantum(phi0 in -10.0f64..10.0, delta in -PI..PI, x in setting()) {
            let params = CorpuscularParams::new(0.0, delta).unwrap();
            let p = PhaseSetting::with_delta(delta);
            prop_assert!((corpuscular_grouped(phi0, x, &params) - qt_grouped(phi0, x, &p)).abs() < EPS);
        }
    }
}

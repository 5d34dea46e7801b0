//! Linear least-squares fit of `f(φ₀) = C + a cos φ₀ + b sin φ₀`.
//!
//! The same curve written as `C (1 − Δ cos(φ₀ − ψ))` has amplitude
//! `A = √(a² + b²)`, visibility `Δ = A/C` and shift `ψ = atan2(−b, −a)`.
//! Uniform weights are used for the estimate; standard errors come either
//! from supplied per-point variances (sandwich form) or from the residuals.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::engine::reduce_phase;
use crate::error::AnalysisError;

/// One sample for [`fit_sinusoid_weighted`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitPoint {
    pub phi0: f64,
    pub value: f64,
    /// Sampling variance of `value`, when known.
    pub variance: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult {
    pub c: f64,
    pub a: f64,
    pub b: f64,
    pub amplitude: f64,
    pub visibility: f64,
    /// In `(−π, π]`; zero when the amplitude vanishes.
    pub psi: f64,
    pub rms_residual: f64,
    pub se_c: f64,
    pub se_visibility: f64,
    pub se_psi: f64,
    /// Wrong-association rate, when one has been inferred.
    pub e_hat: Option<f64>,
    pub points: usize,
}

impl FitResult {
    /// Noise-free result for the curve `C (1 − Δ cos(φ₀ − ψ))`.
    pub fn from_shape(c: f64, visibility: f64, psi: f64) -> Self {
        let amplitude = c * visibility;
        FitResult {
            c,
            a: -amplitude * psi.cos(),
            b: -amplitude * psi.sin(),
            amplitude,
            visibility,
            psi,
            rms_residual: 0.0,
            se_c: 0.0,
            se_visibility: 0.0,
            se_psi: 0.0,
            e_hat: None,
            points: 0,
        }
    }

    pub fn evaluate(&self, phi0: f64) -> f64 {
        self.c + self.a * phi0.cos() + self.b * phi0.sin()
    }

    pub fn with_e_hat(mut self, e: f64) -> Self {
        self.e_hat = Some(e);
        self
    }
}

pub fn fit_sinusoid(points: &[(f64, f64)]) -> Result<FitResult, AnalysisError> {
    let points: Vec<FitPoint> = points
        .iter()
        .map(|&(phi0, value)| FitPoint {
            phi0,
            value,
            variance: None,
        })
        .collect();
    fit_sinusoid_weighted(&points)
}

/// Fits with standard errors propagated from per-point variances. Points
/// without a variance fall back to the residual estimate for all points.
pub fn fit_sinusoid_weighted(points: &[FitPoint]) -> Result<FitResult, AnalysisError> {
    check_coverage(points.iter().map(|p| p.phi0))?;

    let rows: Vec<Vector3<f64>> = points
        .iter()
        .map(|p| Vector3::new(1.0, p.phi0.cos(), p.phi0.sin()))
        .collect();
    let mut normal = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for (x, p) in rows.iter().zip(points) {
        normal += x * x.transpose();
        rhs += x * p.value;
    }

    let eig = SymmetricEigen::new(normal).eigenvalues;
    if eig.min() <= 1e-12 * eig.max().max(f64::MIN_POSITIVE) {
        return Err(AnalysisError::RankDeficient);
    }
    let inv = normal.try_inverse().ok_or(AnalysisError::RankDeficient)?;
    let beta = inv * rhs;
    let (c, a, b) = (beta[0], beta[1], beta[2]);
    if c <= 0.0 {
        return Err(AnalysisError::NonPhysical(c));
    }

    let n = points.len();
    let rss: f64 = rows
        .iter()
        .zip(points)
        .map(|(x, p)| {
            let r = p.value - x.dot(&beta);
            r * r
        })
        .sum();
    let rms_residual = (rss / n as f64).sqrt();

    let cov = if points.iter().all(|p| p.variance.is_some()) {
        let mut meat = Matrix3::zeros();
        for (x, p) in rows.iter().zip(points) {
            meat += x * x.transpose() * p.variance.unwrap_or(0.0);
        }
        inv * meat * inv
    } else {
        inv * (rss / (n - 3) as f64)
    };

    let amplitude = a.hypot(b);
    let visibility = amplitude / c;
    let psi = if amplitude > 0.0 {
        crate::schedule::wrap_pi((-b).atan2(-a))
    } else {
        0.0
    };

    // delta-method gradients w.r.t. (C, a, b)
    let (se_visibility, se_psi) = if amplitude > 0.0 {
        let g_vis = Vector3::new(
            -amplitude / (c * c),
            a / (amplitude * c),
            b / (amplitude * c),
        );
        let a2 = amplitude * amplitude;
        let g_psi = Vector3::new(0.0, -b / a2, a / a2);
        (
            g_vis.dot(&(cov * g_vis)).max(0.0).sqrt(),
            g_psi.dot(&(cov * g_psi)).max(0.0).sqrt(),
        )
    } else {
        (
            cov[(1, 1)].max(cov[(2, 2)]).max(0.0).sqrt() / c,
            f64::INFINITY,
        )
    };

    Ok(FitResult {
        c,
        a,
        b,
        amplitude,
        visibility,
        psi,
        rms_residual,
        se_c: cov[(0, 0)].max(0.0).sqrt(),
        se_visibility,
        se_psi,
        e_hat: None,
        points: n,
    })
}

/// At least 4 distinct phases mod 2π, with no circular gap wider than π.
fn check_coverage(phases: impl Iterator<Item = f64>) -> Result<(), AnalysisError> {
    let mut reduced: Vec<f64> = phases.map(reduce_phase).collect();
    reduced.sort_by(f64::total_cmp);
    reduced.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if reduced.len() > 1 && reduced[0] + TAU - reduced[reduced.len() - 1] < 1e-9 {
        reduced.pop();
    }
    let distinct = reduced.len();
    if distinct < 4 {
        return Err(AnalysisError::InsufficientCoverage { distinct });
    }
    let wrap_gap = reduced[0] + TAU - reduced[distinct - 1];
    let max_gap = reduced
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(wrap_gap, f64::max);
    if max_gap > PI + 1e-9 {
        return Err(AnalysisError::InsufficientCoverage { distinct });
    }
    Ok(())
}

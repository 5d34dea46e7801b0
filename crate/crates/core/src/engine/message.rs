use std::f64::consts::TAU;

/// Reduces a phase to `[0, 2π)`.
#[inline]
pub fn reduce_phase(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Position of the photon's clock hand, `(cos ωt, sin ωt)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Message {
    pub e0: f64,
    pub e1: f64,
}

impl Message {
    /// Clock at time zero.
    pub const ZERO_TIME: Message = Message { e0: 1.0, e1: 0.0 };

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = reduce_phase(theta).sin_cos();
        Message { e0: c, e1: s }
    }

    /// Scales `(e0, e1)` to unit length. Returns `None` for the zero vector.
    pub fn normalized(e0: f64, e1: f64) -> Option<Self> {
        let norm = e0.hypot(e1);
        (norm > 0.0).then(|| Message {
            e0: e0 / norm,
            e1: e1 / norm,
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.e0 * self.e0 + self.e1 * self.e1
    }

    /// Advances the clock hand by `phi` radians.
    pub fn rotate(self, phi: f64) -> Self {
        let (s, c) = reduce_phase(phi).sin_cos();
        self.rotate_by(c, s)
    }

    /// Rotation with a precomputed `(cos φ, sin φ)`.
    #[inline]
    pub(crate) fn rotate_by(self, cos: f64, sin: f64) -> Self {
        Message {
            e0: self.e0 * cos - self.e1 * sin,
            e1: self.e0 * sin + self.e1 * cos,
        }
    }
}

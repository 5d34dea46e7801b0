use std::f64::consts::FRAC_1_SQRT_2;

use super::{Channel, Message};
use crate::error::ModelError;

/// Largest tolerated deviation of `|w|^2 + |z|^2` from one.
pub const INTEGRITY_TOLERANCE: f64 = 1e-9;

/// `u · α`, flushed to zero once it leaves the normal range. A subnormal
/// `u` can be a fixed point of the product and would stall every later
/// multiplication on slow subnormal arithmetic.
#[inline]
fn decay(u: f64, alpha: f64) -> f64 {
    let v = u * alpha;
    if v < f64::MIN_POSITIVE {
        0.0
    } else {
        v
    }
}

/// Output of the transformation stage: the two candidate out-messages
/// before normalization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Routing {
    pub w: [f64; 2],
    pub z: [f64; 2],
}

impl Routing {
    /// Probability of leaving through channel 0.
    pub fn w_sqr(&self) -> f64 {
        self.w[0] * self.w[0] + self.w[1] * self.w[1]
    }

    pub fn z_sqr(&self) -> f64 {
        self.z[0] * self.z[0] + self.z[1] * self.z[1]
    }
}

/// Adaptive beam-splitter processor.
///
/// The input stage stores the last message seen on each input channel in
/// `y0`/`y1` and tracks the arrival frequencies of the channels in the
/// learning vector `(u0, u1)`. The transformation stage mixes the registers
/// weighted by `√u`, and the output stage routes the messenger to channel 0
/// with probability `|w|^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamSplitter {
    pub y0: Message,
    pub y1: Message,
    pub u0: f64,
    pub u1: f64,
    alpha: f64,
}

impl BeamSplitter {
    /// Registers at `(1, 0)`, `u = (1/2, 1/2)`.
    pub fn new(alpha: f64) -> Result<Self, ModelError> {
        Self::with_state(Message::ZERO_TIME, Message::ZERO_TIME, 0.5, alpha)
    }

    pub fn with_state(y0: Message, y1: Message, u0: f64, alpha: f64) -> Result<Self, ModelError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(ModelError::InvalidAlpha(alpha));
        }
        if !(0.0..=1.0).contains(&u0) {
            return Err(ModelError::Integrity { total: u0 });
        }
        Ok(BeamSplitter {
            y0,
            y1,
            u0,
            u1: 1.0 - u0,
            alpha,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Learning rule `u_i ← α u_i + (1 − α) δ_ik` for an arrival on `k`.
    ///
    /// The component that decays is updated multiplicatively and the other
    /// one is taken as its complement, so `u0 + u1 = 1` holds to one rounding
    /// and `u_k = 1 − αⁿ(1 − u_k(0))` after `n` arrivals on `k`.
    pub fn learn(&mut self, channel: Channel) {
        match channel {
            Channel::Zero => {
                self.u1 = decay(self.u1, self.alpha);
                self.u0 = 1.0 - self.u1;
            }
            Channel::One => {
                self.u0 = decay(self.u0, self.alpha);
                self.u1 = 1.0 - self.u0;
            }
        }
    }

    /// Transformation stage on the current registers and learning vector.
    #[inline]
    pub fn transform(&self) -> Routing {
        let s0 = self.u0.sqrt();
        let s1 = self.u1.sqrt();
        let (y00, y10) = (self.y0.e0, self.y0.e1);
        let (y01, y11) = (self.y1.e0, self.y1.e1);
        Routing {
            w: [
                (y00 * s0 - y11 * s1) * FRAC_1_SQRT_2,
                (y01 * s1 + y10 * s0) * FRAC_1_SQRT_2,
            ],
            z: [
                (y01 * s1 - y10 * s0) * FRAC_1_SQRT_2,
                (y00 * s0 + y11 * s1) * FRAC_1_SQRT_2,
            ],
        }
    }

    /// Processes one messenger arriving on `input` with message `msg`.
    ///
    /// `r` is a uniform deviate in `[0, 1)`. The messenger leaves through
    /// channel 0 carrying `w/|w|` when `|w|^2 > r`, otherwise through
    /// channel 1 carrying `z/|z|`.
    #[inline]
    pub fn process(
        &mut self,
        input: Channel,
        msg: Message,
        r: f64,
    ) -> Result<(Channel, Message), ModelError> {
        match input {
            Channel::Zero => self.y0 = msg,
            Channel::One => self.y1 = msg,
        }
        self.learn(input);

        let routing = self.transform();
        let w_sqr = routing.w_sqr();
        let z_sqr = routing.z_sqr();
        let total = w_sqr + z_sqr;
        if (total - 1.0).abs() > INTEGRITY_TOLERANCE {
            return Err(ModelError::Integrity { total });
        }

        let (channel, [a, b], weight) = if w_sqr > r {
            (Channel::Zero, routing.w, w_sqr)
        } else {
            (Channel::One, routing.z, z_sqr)
        };
        // the chosen vector has positive weight: w when w_sqr > r >= 0,
        // z when w_sqr <= r < 1
        if weight <= 0.0 {
            return Err(ModelError::Integrity { total });
        }
        let scale = weight.sqrt().recip();
        let out = Message {
            e0: a * scale,
            e1: b * scale,
        };
        Ok((channel, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, uniform};
    use proptest::prelude::*;

    #[test]
    fn learning_rule_single_step() {
        let mut bs = BeamSplitter::new(0.99).unwrap();
        bs.learn(Channel::Zero);
        assert!((bs.u0 - 0.505).abs() < 1e-15);
        assert!((bs.u1 - 0.495).abs() < 1e-15);
    }

    #[test]
    fn learning_rule_closed_form() {
        let alpha = 0.97;
        let mut bs =
            BeamSplitter::with_state(Message::ZERO_TIME, Message::ZERO_TIME, 0.3, alpha).unwrap();
        for n in 1..=2000 {
            bs.learn(Channel::One);
            let expect = 1.0 - alpha.powi(n) * (1.0 - 0.7);
            assert!((bs.u1 - expect).abs() < 1e-12, "n = {n}");
            assert!((bs.u0 + bs.u1 - 1.0).abs() < 1e-12);
            assert!(bs.u0 >= 0.0 && bs.u1 <= 1.0);
        }
    }

    #[test]
    fn exclusive_traffic_saturates_exactly() {
        let mut bs = BeamSplitter::new(0.99).unwrap();
        for _ in 0..100_000 {
            bs.learn(Channel::Zero);
        }
        assert_eq!((bs.u0, bs.u1), (1.0, 0.0));
    }

    #[test]
    fn cancelling_registers_route_to_one() {
        let bs =
            BeamSplitter::with_state(Message::ZERO_TIME, Message { e0: 0.0, e1: 1.0 }, 0.5, 0.99)
                .unwrap();
        let routing = bs.transform();
        assert!(routing.w[0].abs() < 1e-15 && routing.w[1].abs() < 1e-15);
        assert!(routing.z[0].abs() < 1e-15 && (routing.z[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn process_overwrites_only_the_arrival_register() {
        let y1 = Message::from_angle(1.1);
        let mut bs = BeamSplitter::with_state(Message::ZERO_TIME, y1, 0.5, 0.9).unwrap();
        let msg = Message::from_angle(2.0);
        bs.process(Channel::Zero, msg, 0.3).unwrap();
        assert_eq!(bs.y0, msg);
        assert_eq!(bs.y1, y1);
    }

    #[test]
    fn cancelling_registers_always_exit_one() {
        // After writing (1,0) on channel 0 with Y1 = (0,1), the post-update
        // u must be (1/2, 1/2) for exact cancellation: u0 = (0.5 - (1 - α)) / α.
        let alpha = 0.99;
        for r in [1e-12, 0.5, 0.999_999] {
            let u0 = (0.5 - (1.0 - alpha)) / alpha;
            let mut bs = BeamSplitter::with_state(
                Message::ZERO_TIME,
                Message { e0: 0.0, e1: 1.0 },
                u0,
                alpha,
            )
            .unwrap();
            let (ch, out) = bs.process(Channel::Zero, Message::ZERO_TIME, r).unwrap();
            assert_eq!(ch, Channel::One);
            assert!(out.e0.abs() < 1e-12 && (out.e1 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tie_routes_to_channel_one() {
        // u pinned at (1, 0) gives |w|^2 = 1/2 exactly.
        let mut bs =
            BeamSplitter::with_state(Message::ZERO_TIME, Message::ZERO_TIME, 1.0, 0.5).unwrap();
        let w_sqr = {
            let mut probe = bs.clone();
            probe.learn(Channel::Zero);
            probe.transform().w_sqr()
        };
        let (ch, _) = bs
            .process(Channel::Zero, Message::ZERO_TIME, w_sqr)
            .unwrap();
        assert_eq!(ch, Channel::One);
    }

    #[test]
    fn saturated_learning_vector_is_fair_coin() {
        let mut bs =
            BeamSplitter::with_state(Message::from_angle(0.8), Message::ZERO_TIME, 1.0, 0.99)
                .unwrap();
        let mut rng = stream(11, 0, 0);
        let n = 100_000;
        let mut zeros = 0;
        for _ in 0..n {
            let msg = Message::from_angle(6.0 * uniform(&mut rng));
            let (ch, _) = bs.process(Channel::Zero, msg, uniform(&mut rng)).unwrap();
            assert!((bs.transform().w_sqr() - 0.5).abs() < 1e-15);
            if ch == Channel::Zero {
                zeros += 1;
            }
        }
        let frac = zeros as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.01, "channel-0 fraction {frac}");
    }

    #[test]
    fn broken_register_is_an_integrity_error() {
        let mut bs = BeamSplitter::new(0.9).unwrap();
        bs.y1 = Message { e0: 3.0, e1: 0.0 };
        let err = bs.process(Channel::Zero, Message::ZERO_TIME, 0.5);
        assert!(matches!(err, Err(ModelError::Integrity { .. })));
    }

    #[test]
    fn rejects_bad_alpha() {
        assert!(BeamSplitter::new(1.0).is_err());
        assert!(BeamSplitter::new(0.0).is_err());
        assert!(BeamSplitter::new(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn routing_probability_is_conserved(
            t0 in 0.0f64..std::f64::consts::TAU,
            t1 in 0.0f64..std::f64::consts::TAU,
            u0 in 0.0f64..=1.0,
        ) {
            let bs = BeamSplitter::with_state(Message::from_angle(t0), Message::from_angle(t1), u0, 0.5)
                .unwrap();
            let routing = bs.transform();
            prop_assert!((routing.w_sqr() + routing.z_sqr() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn process_keeps_invariants(
            t0 in 0.0f64..std::f64::consts::TAU,
            t1 in 0.0f64..std::f64::consts::TAU,
            u0 in 0.0f64..=1.0,
            alpha in 0.01f64..0.999,
            r in 0.0f64..1.0,
            on_one in any::<bool>(),
        ) {
            let mut bs = BeamSplitter::with_state(Message::from_angle(t0), Message::from_angle(t1), u0, alpha)
                .unwrap();
            let input = if on_one { Channel::One } else { Channel::Zero };
            let (_, out) = bs.process(input, Message::from_angle(t0 + t1), r).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
            prop_assert!((bs.u0 + bs.u1 - 1.0).abs() < 1e-12);
            prop_assert!(bs.u0 >= 0.0 && bs.u1 >= 0.0);
        }
    }
}

use rand::RngCore;

use super::{BeamSplitter, Channel, Message};
use crate::error::ModelError;
use crate::rng::{stream, uniform};
use crate::schedule::{PhaseSetting, Setting};

/// One detector click, labelled with the setting known at emission.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DetectionEvent {
    /// Emission index since the last reset, starting at 1.
    pub index: u64,
    pub x: Setting,
    pub detector: Channel,
}

/// Initial state of both beam splitters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InitPolicy {
    /// `u = (1/2, 1/2)`, both registers at `(1, 0)`.
    #[default]
    Default,
    /// `u = (1/2, 1/2)`, registers at angles drawn from a stream seeded by `seed`.
    Random { seed: u64 },
}

/// Two beam splitters around a fixed lower arm and a switched upper arm.
///
/// BS1 output 0 feeds the lower arm (phase `phi0`) into BS2 input 0, BS1
/// output 1 feeds the upper arm (phase `φ₁(x)`) into BS2 input 1. BS2
/// output `k` is detector `D_k`. Every messenger enters BS1 on input 0 with
/// its clock at zero.
#[derive(Clone, Debug)]
pub struct MziNetwork {
    pub bs1: BeamSplitter,
    pub bs2: BeamSplitter,
    phi0: f64,
    phases: PhaseSetting,
    lower: (f64, f64),
    upper_plus: (f64, f64),
    upper_minus: (f64, f64),
    emitted: u64,
}

fn cos_sin(phi: f64) -> (f64, f64) {
    let (s, c) = super::reduce_phase(phi).sin_cos();
    (c, s)
}

impl MziNetwork {
    pub fn new(
        alpha: f64,
        phi0: f64,
        phases: PhaseSetting,
        policy: InitPolicy,
    ) -> Result<Self, ModelError> {
        let mut net = MziNetwork {
            bs1: BeamSplitter::new(alpha)?,
            bs2: BeamSplitter::new(alpha)?,
            phi0,
            phases,
            lower: cos_sin(phi0),
            upper_plus: cos_sin(phases.phi1_plus),
            upper_minus: cos_sin(phases.phi1_minus),
            emitted: 0,
        };
        net.reset(policy);
        Ok(net)
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    pub fn phases(&self) -> &PhaseSetting {
        &self.phases
    }

    /// Messengers emitted since the last reset.
    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    /// Restores both beam splitters to `policy` and restarts emission numbering.
    pub fn reset(&mut self, policy: InitPolicy) {
        let alpha = self.bs1.alpha();
        let y = match policy {
            InitPolicy::Default => [Message::ZERO_TIME; 4],
            InitPolicy::Random { seed } => {
                let mut rng = stream(seed, u64::MAX, u64::MAX);
                [(); 4].map(|_| Message::from_angle(std::f64::consts::TAU * uniform(&mut rng)))
            }
        };
        self.bs1 =
            BeamSplitter::with_state(y[0], y[1], 0.5, alpha).expect("alpha already validated");
        self.bs2 =
            BeamSplitter::with_state(y[2], y[3], 0.5, alpha).expect("alpha already validated");
        self.emitted = 0;
    }

    /// Emits one messenger under setting `x` and follows it to a detector.
    #[inline]
    pub fn run_photon<R: RngCore + ?Sized>(
        &mut self,
        x: Setting,
        rng: &mut R,
    ) -> Result<DetectionEvent, ModelError> {
        self.emitted += 1;
        let (arm, msg) = self
            .bs1
            .process(Channel::Zero, Message::ZERO_TIME, uniform(rng))?;
        let (c, s) = match (arm, x) {
            (Channel::Zero, _) => self.lower,
            (Channel::One, Setting::Plus) => self.upper_plus,
            (Channel::One, Setting::Minus) => self.upper_minus,
        };
        let (detector, _) = self.bs2.process(arm, msg.rotate_by(c, s), uniform(rng))?;
        Ok(DetectionEvent {
            index: self.emitted,
            x,
            detector,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn d0_frequency(phi0: f64, n: usize, seed: u64) -> f64 {
        let mut net =
            MziNetwork::new(0.99, phi0, PhaseSetting::default(), InitPolicy::Default).unwrap();
        let mut rng = stream(seed, 0, 0);
        let mut d0 = 0usize;
        for _ in 0..n {
            if net.run_photon(Setting::Plus, &mut rng).unwrap().detector == Channel::Zero {
                d0 += 1;
            }
        }
        d0 as f64 / n as f64
    }

    #[test]
    fn stationary_fringe_extremes_and_midpoint() {
        let n = 1_000_000;
        assert!(d0_frequency(0.0, n, 1) < 0.005);
        assert!(d0_frequency(PI, n, 2) > 0.995);
        assert!((d0_frequency(FRAC_PI_2, n, 3) - 0.5).abs() < 0.005);
    }

    #[test]
    fn default_reset_state() {
        let net = MziNetwork::new(0.9, 1.0, PhaseSetting::default(), InitPolicy::Default).unwrap();
        for bs in [&net.bs1, &net.bs2] {
            assert_eq!((bs.u0, bs.u1), (0.5, 0.5));
            assert_eq!(bs.y0, Message::ZERO_TIME);
            assert_eq!(bs.y1, Message::ZERO_TIME);
        }
    }

    #[test]
    fn random_reset_is_reproducible() {
        let policy = InitPolicy::Random { seed: 17 };
        let a = MziNetwork::new(0.9, 1.0, PhaseSetting::default(), policy).unwrap();
        let b = MziNetwork::new(0.9, 1.0, PhaseSetting::default(), policy).unwrap();
        let c = MziNetwork::new(
            0.9,
            1.0,
            PhaseSetting::default(),
            InitPolicy::Random { seed: 18 },
        )
        .unwrap();
        assert_eq!(a.bs1, b.bs1);
        assert_eq!(a.bs2, b.bs2);
        assert_ne!(a.bs1, c.bs1);
        for bs in [&a.bs1, &a.bs2] {
            assert!((bs.y0.norm_sqr() - 1.0).abs() < 1e-12);
            assert!((bs.y1.norm_sqr() - 1.0).abs() < 1e-12);
            assert_eq!((bs.u0, bs.u1), (0.5, 0.5));
        }
    }

    #[test]
    fn reset_restarts_numbering_and_state() {
        let mut net =
            MziNetwork::new(0.9, 0.3, PhaseSetting::default(), InitPolicy::Default).unwrap();
        let mut rng = stream(3, 0, 0);
        for _ in 0..100 {
            net.run_photon(Setting::Minus, &mut rng).unwrap();
        }
        assert_eq!(net.emitted(), 100);
        net.reset(InitPolicy::Default);
        assert_eq!(net.emitted(), 0);
        assert_eq!(net.bs2.u0, 0.5);
        let ev = net.run_photon(Setting::Plus, &mut rng).unwrap();
        assert_eq!(ev.index, 1);
    }

    #[test]
    fn identical_seeds_give_identical_events() {
        let run = |seed| {
            let mut net =
                MziNetwork::new(0.99, 1.3, PhaseSetting::default(), InitPolicy::Default).unwrap();
            let mut rng = stream(seed, 0, 0);
            let sched = crate::schedule::SettingSchedule::Systematic { k: 3 };
            sched
                .iter()
                .take(5000)
                .map(|x| net.run_photon(x, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5), run(6));
    }

    #[test]
    fn registers_and_learning_vector_stay_valid() {
        let mut net = MziNetwork::new(
            0.95,
            2.1,
            PhaseSetting::with_delta(0.7),
            InitPolicy::Random { seed: 2 },
        )
        .unwrap();
        let mut rng = stream(8, 0, 0);
        let sched = crate::schedule::SettingSchedule::Random { k: 2, seed: 4 };
        for x in sched.iter().take(20_000) {
            net.run_photon(x, &mut rng).unwrap();
            for bs in [&net.bs1, &net.bs2] {
                assert!((bs.y0.norm_sqr() - 1.0).abs() < 1e-12);
                assert!((bs.y1.norm_sqr() - 1.0).abs() < 1e-12);
                assert!((bs.u0 + bs.u1 - 1.0).abs() < 1e-12);
                assert!((0.0..=1.0).contains(&bs.u0));
            }
        }
    }
}

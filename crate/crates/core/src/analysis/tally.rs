use crate::engine::{Channel, DetectionEvent};
use crate::schedule::Setting;

/// The four counters `N_k(x)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DetectionTally {
    pub n0_plus: u64,
    pub n0_minus: u64,
    pub n1_plus: u64,
    pub n1_minus: u64,
}

impl DetectionTally {
    #[inline]
    pub fn record(&mut self, x: Setting, detector: Channel) {
        let slot = match (detector, x) {
            (Channel::Zero, Setting::Plus) => &mut self.n0_plus,
            (Channel::Zero, Setting::Minus) => &mut self.n0_minus,
            (Channel::One, Setting::Plus) => &mut self.n1_plus,
            (Channel::One, Setting::Minus) => &mut self.n1_minus,
        };
        *slot += 1;
    }

    pub fn merge(&mut self, other: &DetectionTally) {
        self.n0_plus += other.n0_plus;
        self.n0_minus += other.n0_minus;
        self.n1_plus += other.n1_plus;
        self.n1_minus += other.n1_minus;
    }

    pub fn total(&self) -> u64 {
        self.n0_plus + self.n0_minus + self.n1_plus + self.n1_minus
    }

    pub fn n0(&self, x: Setting) -> u64 {
        match x {
            Setting::Plus => self.n0_plus,
            Setting::Minus => self.n0_minus,
        }
    }

    pub fn n1(&self, x: Setting) -> u64 {
        match x {
            Setting::Plus => self.n1_plus,
            Setting::Minus => self.n1_minus,
        }
    }

    pub fn group_total(&self, x: Setting) -> u64 {
        self.n0(x) + self.n1(x)
    }

    /// `F₀(x) = N₀(x) / (N₀(x) + N₁(x))`, `None` for an empty group.
    pub fn f0(&self, x: Setting) -> Option<f64> {
        ratio(self.n0(x), self.group_total(x))
    }

    pub fn f1(&self, x: Setting) -> Option<f64> {
        ratio(self.n1(x), self.group_total(x))
    }

    /// D₀ frequency ignoring `x`.
    pub fn f0_ungrouped(&self) -> Option<f64> {
        ratio(self.n0_plus + self.n0_minus, self.total())
    }

    /// Fraction of events labelled `x`.
    pub fn occupancy(&self, x: Setting) -> Option<f64> {
        ratio(self.group_total(x), self.total())
    }

    /// `N₀(x) / N`: the grouped frequency in the convention that keeps the
    /// occupancy prefactor, `occupancy(x) · F₀(x)`.
    pub fn i0(&self, x: Setting) -> Option<f64> {
        ratio(self.n0(x), self.total())
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn tally<'a, I>(events: I) -> DetectionTally
where
    I: IntoIterator<Item = &'a DetectionEvent>,
{
    let mut t = DetectionTally::default();
    for ev in events {
        t.record(ev.x, ev.detector);
    }
    t
}

/// Frequencies measured at one lower-arm phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyPoint {
    pub phi0: f64,
    pub f0_plus: Option<f64>,
    pub f0_minus: Option<f64>,
    pub f0_ungrouped: Option<f64>,
    pub counts: DetectionTally,
}

impl FrequencyPoint {
    pub fn new(phi0: f64, counts: DetectionTally) -> Self {
        FrequencyPoint {
            phi0,
            f0_plus: counts.f0(Setting::Plus),
            f0_minus: counts.f0(Setting::Minus),
            f0_ungrouped: counts.f0_ungrouped(),
            counts,
        }
    }

    pub fn f0(&self, x: Setting) -> Option<f64> {
        match x {
            Setting::Plus => self.f0_plus,
            Setting::Minus => self.f0_minus,
        }
    }

    /// Binomial variance `F₀(1 − F₀)/n` of the grouped frequency.
    pub fn f0_variance(&self, x: Setting) -> Option<f64> {
        let n = self.counts.group_total(x);
        self.f0(x).map(|f| f * (1.0 - f) / n as f64)
    }

    pub fn f0_ungrouped_variance(&self) -> Option<f64> {
        let n = self.counts.total();
        self.f0_ungrouped.map(|f| f * (1.0 - f) / n as f64)
    }
}

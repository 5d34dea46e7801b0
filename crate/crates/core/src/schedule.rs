//! The external two-valued setting `x` and the procedures that change it.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use crate::engine::reduce_phase;
use crate::error::ModelError;
use crate::rng::mix64;

/// Value of the control parameter `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Setting {
    Plus,
    Minus,
}

impl Setting {
    pub fn value(self) -> i8 {
        match self {
            Setting::Plus => 1,
            Setting::Minus => -1,
        }
    }

    pub fn from_value(v: i64) -> Option<Self> {
        match v {
            1 => Some(Setting::Plus),
            -1 => Some(Setting::Minus),
            _ => None,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Setting::Plus => Setting::Minus,
            Setting::Minus => Setting::Plus,
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Setting::Plus => "+1",
            Setting::Minus => "-1",
        })
    }
}

/// Upper-arm phase for each setting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseSetting {
    pub phi1_plus: f64,
    pub phi1_minus: f64,
}

impl Default for PhaseSetting {
    fn default() -> Self {
        PhaseSetting {
            phi1_plus: 0.0,
            phi1_minus: -FRAC_PI_2,
        }
    }
}

impl PhaseSetting {
    /// `φ₁(+1) = 0`, `φ₁(−1) = δ`.
    pub fn with_delta(delta: f64) -> Self {
        PhaseSetting {
            phi1_plus: 0.0,
            phi1_minus: delta,
        }
    }

    pub fn phase_for(&self, x: Setting) -> f64 {
        match x {
            Setting::Plus => self.phi1_plus,
            Setting::Minus => self.phi1_minus,
        }
    }

    /// `φ₁(−1) − φ₁(+1)` reduced to `(−π, π]`.
    pub fn delta(&self) -> f64 {
        wrap_pi(self.phi1_minus - self.phi1_plus)
    }
}

/// Reduces an angle to `(−π, π]`.
pub fn wrap_pi(theta: f64) -> f64 {
    let r = reduce_phase(theta);
    if r > std::f64::consts::PI {
        r - std::f64::consts::TAU
    } else {
        r
    }
}

/// How `x` evolves over the emitted photons.
///
/// Photon indices start at 1 and block `b = ⌈i/K⌉` holds photons
/// `(b−1)K+1 ..= bK`. Both switching procedures start at `x = +1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SettingSchedule {
    Fixed(Setting),
    /// Sign flips at every block boundary.
    Systematic {
        k: u64,
    },
    /// Sign flips at each block boundary with probability 1/2, decided by a
    /// coin derived from `(seed, block)`.
    Random {
        k: u64,
        seed: u64,
    },
}

impl SettingSchedule {
    pub fn systematic(k: u64) -> Result<Self, ModelError> {
        if k == 0 {
            return Err(ModelError::InvalidBlockLength(k));
        }
        Ok(SettingSchedule::Systematic { k })
    }

    pub fn random(k: u64, seed: u64) -> Result<Self, ModelError> {
        if k == 0 {
            return Err(ModelError::InvalidBlockLength(k));
        }
        Ok(SettingSchedule::Random { k, seed })
    }

    /// Setting for photon `i` (1-based). Pure in `(self, i)`.
    pub fn x_at(&self, i: u64) -> Setting {
        assert!(i >= 1, "photon indices start at 1");
        match *self {
            SettingSchedule::Fixed(x) => x,
            SettingSchedule::Systematic { k } => {
                if block_of(i, k) % 2 == 1 {
                    Setting::Plus
                } else {
                    Setting::Minus
                }
            }
            SettingSchedule::Random { k, seed } => {
                if flip_parity(seed, block_of(i, k)) {
                    Setting::Minus
                } else {
                    Setting::Plus
                }
            }
        }
    }

    /// Settings for photons `1, 2, 3, …` in order, in O(1) per photon.
    pub fn iter(&self) -> ScheduleIter {
        ScheduleIter {
            schedule: *self,
            next_index: 1,
            current: Setting::Plus,
        }
    }
}

impl fmt::Display for SettingSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SettingSchedule::Fixed(x) => write!(f, "fixed:{x}"),
            SettingSchedule::Systematic { k } => write!(f, "systematic:{k}"),
            SettingSchedule::Random { k, .. } => write!(f, "random:{k}"),
        }
    }
}

fn block_of(i: u64, k: u64) -> u64 {
    (i - 1) / k + 1
}

fn coin_word(seed: u64, word: u64) -> u64 {
    mix64(mix64(seed ^ 0xD1B5_4A32_D192_ED03) ^ word)
}

/// Coin for the boundary entering `block` (`block ≥ 2`): bit `block % 64`
/// of word `block / 64`.
fn flips_into(seed: u64, block: u64) -> bool {
    coin_word(seed, block / 64) >> (block % 64) & 1 == 1
}

/// Parity of the number of flips over boundaries into blocks `2..=block`.
fn flip_parity(seed: u64, block: u64) -> bool {
    let last_word = block / 64;
    let mut ones = 0u32;
    for word in 0..=last_word {
        let mut bits = coin_word(seed, word);
        if word == 0 {
            bits &= !0b11;
        }
        if word == last_word {
            let keep = block % 64;
            if keep < 63 {
                bits &= (1u64 << (keep + 1)) - 1;
            }
        }
        ones += bits.count_ones();
    }
    ones % 2 == 1
}

/// Sequential view of a [`SettingSchedule`].
#[derive(Clone, Debug)]
pub struct ScheduleIter {
    schedule: SettingSchedule,
    next_index: u64,
    current: Setting,
}

impl Iterator for ScheduleIter {
    type Item = Setting;

    #[inline]
    fn next(&mut self) -> Option<Setting> {
        let i = self.next_index;
        self.next_index += 1;
        let x = match self.schedule {
            SettingSchedule::Fixed(x) => x,
            SettingSchedule::Systematic { k } => {
                if i > 1 && (i - 1).is_multiple_of(k) {
                    self.current = self.current.flipped();
                }
                self.current
            }
            SettingSchedule::Random { k, seed } => {
                if i > 1 && (i - 1).is_multiple_of(k) && flips_into(seed, block_of(i, k)) {
                    self.current = self.current.flipped();
                }
                self.current
            }
        };
        Some(x)
    }
}

/// Textual schedule kind as written in configs and CSV files:
/// `fixed:+1`, `fixed:-1`, `systematic:K`, `random:K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleKind {
    Fixed(Setting),
    Systematic(u64),
    Random(u64),
}

impl ScheduleKind {
    /// Binds the kind to a coin seed (used by `random` only).
    pub fn build(self, seed: u64) -> Result<SettingSchedule, ModelError> {
        match self {
            ScheduleKind::Fixed(x) => Ok(SettingSchedule::Fixed(x)),
            ScheduleKind::Systematic(k) => SettingSchedule::systematic(k),
            ScheduleKind::Random(k) => SettingSchedule::random(k, seed),
        }
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, ScheduleKind::Fixed(_))
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleKind::Fixed(x) => write!(f, "fixed:{x}"),
            ScheduleKind::Systematic(k) => write!(f, "systematic:{k}"),
            ScheduleKind::Random(k) => write!(f, "random:{k}"),
        }
    }
}

impl FromStr for ScheduleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, arg) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| format!("schedule '{s}' is not of the form kind:arg"))?;
        let block = |arg: &str| -> Result<u64, String> {
            match arg.parse::<u64>() {
                Ok(k) if k >= 1 => Ok(k),
                _ => Err(format!("block length '{arg}' must be a positive integer")),
            }
        };
        match kind {
            "fixed" => match arg {
                "+1" | "1" => Ok(ScheduleKind::Fixed(Setting::Plus)),
                "-1" => Ok(ScheduleKind::Fixed(Setting::Minus)),
                _ => Err(format!("fixed setting '{arg}' must be +1 or -1")),
            },
            "systematic" => block(arg).map(ScheduleKind::Systematic),
            "random" => block(arg).map(ScheduleKind::Random),
            _ => Err(format!("unknown schedule kind '{kind}'")),
        }
    }
}

//! Event-by-event simulation of a Mach-Zehnder interferometer whose upper
//! arm is switched by an external two-valued setting `x`.
//!
//! - [`engine`]: messengers, adaptive beam splitters, the two-splitter network.
//! - [`schedule`]: the setting `x` and the fixed, systematic and random
//!   procedures that change it.
//! - [`theory`]: closed-form wave and corpuscular predictions.
//! - [`analysis`]: tallies, sinusoid fits, inversion for the
//!   wrong-association rate, stage comparison.
//! - [`experiment`]: configuration, sweeps, staged runs and file formats.

pub mod analysis;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod rng;
pub mod schedule;
pub mod theory;

pub use engine::{Channel, DetectionEvent, InitPolicy, Message, MziNetwork};
pub use error::{AnalysisError, ExperimentError, ModelError};
pub use schedule::{PhaseSetting, ScheduleKind, Setting, SettingSchedule};

//! From detection events to fitted fringes.

mod estimate;
mod fit;
mod stages;
mod tally;

pub use estimate::{estimate_e, invert_shift, EEstimate};
pub use fit::{fit_sinusoid, fit_sinusoid_weighted, FitPoint, FitResult};
pub use stages::{compare_stages, StageFit, StageReport, StageSummary, Verdict, VerdictTolerance};
pub use tally::{tally, DetectionTally, FrequencyPoint};

//! Configuration, orchestration and file formats.

pub mod config;
pub mod csv;
pub mod records;
pub mod report;
pub mod runner;

pub use config::{parse_angle, ExperimentConfig, OutputPaths, PhaseGrid, StagePlan};
pub use csv::{read_sweep_csv, write_sweep_csv, SweepRow};
pub use records::{read_records, EventSink, RecordWriter, ReplaySegment, Segment, RECORD_HEADER};
pub use report::{fit_report, stage_report};
pub use runner::{
    analyze_stages, fit_column, replay_rows, run_stages, run_sweep, stage_kinds, Column, StagedRun,
};

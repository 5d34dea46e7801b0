use std::io::BufReader;

use mzisim_core::experiment::{
    analyze_stages, fit_report, read_records, read_sweep_csv, replay_rows, run_stages, run_sweep,
    stage_kinds, stage_report, write_sweep_csv, ExperimentConfig, PhaseGrid, RecordWriter,
    StagePlan,
};
use mzisim_core::{ExperimentError, ScheduleKind};

fn small() -> ExperimentConfig {
    ExperimentConfig {
        photons: 5_000,
        grid: PhaseGrid {
            points: 12,
            ..PhaseGrid::default()
        },
        schedule: ScheduleKind::Systematic(1),
        ..ExperimentConfig::default()
    }
}

#[test]
fn sweep_report_survives_replay() {
    let cfg = small();
    let mut writer = RecordWriter::new(Vec::new()).unwrap();
    let live = run_sweep(&cfg, Some(&mut writer)).unwrap();
    let records = writer.into_inner();

    let replayed =
        replay_rows(&read_records(BufReader::new(records.as_slice()), None).unwrap()).unwrap();
    assert_eq!(
        fit_report(&live, cfg.delta),
        fit_report(&replayed, cfg.delta)
    );

    let mut live_csv = Vec::new();
    write_sweep_csv(&mut live_csv, &live).unwrap();
    let mut replay_csv = Vec::new();
    write_sweep_csv(&mut replay_csv, &replayed).unwrap();
    assert_eq!(live_csv, replay_csv);
}

#[test]
fn staged_report_survives_replay() {
    let mut cfg = small();
    cfg.stages = Some(StagePlan {
        order: [1, 2, 0],
        ..StagePlan::default()
    });
    let mut writer = RecordWriter::new(Vec::new()).unwrap();
    let live = run_stages(&cfg, Some(&mut writer)).unwrap();
    let records = writer.into_inner();

    let rows = replay_rows(&read_records(records.as_slice(), None).unwrap()).unwrap();
    let kinds = stage_kinds(&rows, None).unwrap();
    let (fits, report) = analyze_stages(&rows, kinds, &cfg).unwrap();
    assert_eq!(
        stage_report(&live.fits, &live.report),
        stage_report(&fits, &report)
    );
}

#[test]
fn csv_round_trip_preserves_analysis() {
    let cfg = small();
    let rows = run_sweep(&cfg, None).unwrap();
    let mut csv = Vec::new();
    write_sweep_csv(&mut csv, &rows).unwrap();
    let back = read_sweep_csv(csv.as_slice()).unwrap();
    assert_eq!(back, rows);
    assert_eq!(fit_report(&back, cfg.delta), fit_report(&rows, cfg.delta));
}

#[test]
fn hand_written_records() {
    let text = "#mzi-events v1\n1,1,1,0,1\n2,1,0,1,1\n3,-1,1,0,1\n";
    let segments = read_records(text.as_bytes(), Some(0.0)).unwrap();
    let t = segments[0].tally;
    assert_eq!((t.n0_plus, t.n1_plus, t.n0_minus, t.n1_minus), (1, 1, 1, 0));
}

#[test]
fn coincidence_names_the_line() {
    let text = "#mzi-events v1\n1,1,1,0,1\n2,1,1,1,1\n";
    match read_records(text.as_bytes(), Some(0.0)) {
        Err(e @ ExperimentError::Coincidence { line: 3 }) => assert!(e.to_string().contains('3')),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn golden_event_file_prefix() {
    let mut cfg = small();
    cfg.photons = 3;
    cfg.grid.points = 4;
    let mut writer = RecordWriter::new(Vec::new()).unwrap();
    run_sweep(&cfg, Some(&mut writer)).unwrap();
    let text = String::from_utf8(writer.into_inner()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("#mzi-events v1"));
    assert_eq!(
        lines.next(),
        Some("#segment point=0 phi0=0 mode=systematic:1")
    );
    let events: Vec<&str> = lines.by_ref().take(3).collect();
    assert!(events[0].starts_with("1,1,"));
    assert!(events[1].starts_with("2,-1,"));
    assert!(events[2].starts_with("3,1,"));
    assert!(events
        .iter()
        .all(|e| e.ends_with(",1") && (e.contains(",1,0,") || e.contains(",0,1,"))));
}

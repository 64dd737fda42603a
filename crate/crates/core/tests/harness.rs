use std::path::Path;

use bitdiss::analyzer::classify;
use bitdiss::harness::{
    emit_report, fit_scaling, sweep, write_csv, ExperimentSpec, FitError, HarnessError, ResultRow, Statistic,
    CSV_HEADER,
};
use bitdiss::protocol::{Builtin, Protocol};

fn spec(text: &str) -> ExperimentSpec {
    ExperimentSpec::parse(text, Path::new(".")).unwrap()
}

fn csv_without_wall(rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).unwrap();
    String::from_utf8(buf)
        .unwrap()
        .lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

const MINORITY: &str = r#"
name = "minority"
builtin = "minority"
ell = 3
n = [16, 24, 32]
z = "adversarial"
x0 = "adversarial"
trials = 20
seed = 99
max_rounds = 2000
"#;

#[test]
fn reruns_are_identical_and_worker_independent() {
    let s = spec(MINORITY);
    let a = sweep(&s, Some(1), |_| {}).unwrap();
    let b = sweep(&s, Some(3), |_| {}).unwrap();
    assert_eq!(csv_without_wall(&a), csv_without_wall(&b));
    let keys: Vec<(u64, u64, u64)> = a.iter().map(|r| (r.n, r.x0, r.trial)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn single_trial_rerun() {
    let s = spec("builtin = \"voter\"\nell = 1\nn = [50]\nz = 1\nx0 = 1\ntrials = 1\nseed = 5\n");
    let a = sweep(&s, None, |_| {}).unwrap();
    let b = sweep(&s, None, |_| {}).unwrap();
    assert_eq!(csv_without_wall(&a), csv_without_wall(&b));
}

#[test]
fn adversarial_x0_matches_classifier() {
    let s = spec(MINORITY);
    let class = classify(&Protocol::builtin(Builtin::Minority, 3).unwrap()).unwrap();
    let mut emitted = 0;
    let rows = sweep(&s, None, |rows| {
        emitted += 1;
        assert!(rows.windows(2).all(|w| w[0].trial < w[1].trial));
    })
    .unwrap();
    assert_eq!(emitted, 3);
    for r in &rows {
        assert_eq!(r.x0, class.suggested_x0(r.n));
        assert_eq!(r.z, 1);
        assert_eq!(r.censored, r.tau.is_none());
        assert!(r.tau.is_none_or(|t| t <= 2000.0));
    }
}

#[test]
fn voter_from_one_never_censored_and_scales_linearly() {
    let s = spec(
        "builtin = \"voter\"\nell = 1\nn = [64, 128, 256, 512, 1024]\nz = 1\nx0 = 1\ntrials = 200\nseed = 7\n",
    );
    let rows = sweep(&s, None, |_| {}).unwrap();
    assert!(rows.iter().all(|r| !r.censored));
    let fit = fit_scaling(&rows, Statistic::Median, 0.1).unwrap();
    assert!((fit.slope - 1.0).abs() <= 0.15, "slope {}", fit.slope);
}

#[test]
fn synthetic_log_squared_fit() {
    let rows: Vec<ResultRow> = (10..=14)
        .map(|k| {
            let n = 1u64 << k;
            ResultRow {
                n,
                ell: 1,
                protocol: "synthetic".into(),
                z: 1,
                x0: 1,
                seed: 0,
                trial: 0,
                tau: Some((n as f64).ln().powi(2)),
                censored: false,
                activations: 0,
                wall_ms: 0.0,
            }
        })
        .collect();
    let fit = fit_scaling(&rows, Statistic::Median, 0.1).unwrap();
    // d ln(ln^2 n) / d ln n = 2 / ln n, between 0.206 and 0.289 on this range
    assert!(fit.slope > 0.2 && fit.slope < 0.29, "slope {}", fit.slope);
    let wider: Vec<ResultRow> = (20..=24)
        .map(|k| ResultRow { n: 1 << k, tau: Some(((1u64 << k) as f64).ln().powi(2)), ..rows[0].clone() })
        .collect();
    assert!(fit_scaling(&wider, Statistic::Median, 0.1).unwrap().slope < fit.slope);
}

#[test]
fn report_files() {
    let s = spec("builtin = \"voter\"\nell = 1\nn = [16, 32, 64]\nz = 1\nx0 = 1\ntrials = 20\nseed = 3\n");
    let rows = sweep(&s, None, |_| {}).unwrap();
    let fit = fit_scaling(&rows, Statistic::Median, 0.1);
    let dir = tempfile::tempdir().unwrap();
    let files = emit_report(&rows, &fit, Statistic::Median, &s.hash, dir.path(), true).unwrap();
    let csv = std::fs::read_to_string(&files.csv).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "n,ell,protocol,z,x0,seed,trial,tau,censored,activations,wall_ms");
    assert_eq!(CSV_HEADER.join(","), csv.lines().next().unwrap());
    assert_eq!(csv.lines().count(), rows.len() + 1);
    let fit_txt = std::fs::read_to_string(&files.fit).unwrap();
    assert!(fit_txt.contains(&format!("spec_sha256: {}", s.hash)));
    let svg = std::fs::read_to_string(files.plot.unwrap()).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("class=\"point\"").count(), 3);
    assert!(fit.is_ok());
    assert_eq!(svg.matches("class=\"fit\"").count(), 1);
}

#[test]
fn censored_sweeps_refuse_to_fit() {
    let s = spec(
        "builtin = \"minority\"\nell = 3\nn = [64, 96, 128]\nz = 1\nx0 = 0.75\ntrials = 10\nseed = 1\nmax_rounds = 50\n",
    );
    let rows = sweep(&s, None, |_| {}).unwrap();
    assert!(rows.iter().all(|r| r.censored));
    assert!(matches!(fit_scaling(&rows, Statistic::Median, 0.1), Err(FitError::OverCensored { .. })));
    let dir = tempfile::tempdir().unwrap();
    let fit = fit_scaling(&rows, Statistic::Median, 0.1);
    let files = emit_report(&rows, &fit, Statistic::Median, &s.hash, dir.path(), true).unwrap();
    assert!(std::fs::read_to_string(files.fit).unwrap().contains("fit refused"));
}

#[test]
fn protocol_files_resolve_relative_to_spec() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("m.toml"), Protocol::builtin(Builtin::Minority, 3).unwrap().to_toml()).unwrap();
    let spec_path = dir.path().join("spec.toml");
    std::fs::write(&spec_path, "protocol = \"m.toml\"\nn = [8]\nz = 1\nx0 = 6\ntrials = 2\nseed = 1\n").unwrap();
    let s = ExperimentSpec::load(&spec_path).unwrap();
    assert_eq!(s.points().unwrap()[0].protocol.ell(), 3);
    std::fs::write(&spec_path, "protocol = \"missing.toml\"\nn = [8]\nz = 1\nx0 = 6\ntrials = 2\nseed = 1\n").unwrap();
    assert!(matches!(ExperimentSpec::load(&spec_path), Err(HarnessError::Spec(_))));
}

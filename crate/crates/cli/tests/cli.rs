use std::path::{Path, PathBuf};
use std::process::Command as Process;

use proptest::prelude::*;
use tsxplain::Sample;
use tsxplain_cli::commands::{cmd_replay, ReplayArgs};
use tsxplain_cli::csv_io::{read_csv, read_csv_file, write_csv, write_csv_file, Table};
use tsxplain_cli::docs::{AttributionDoc, EvalDoc, RunManifest, SegmentMapDoc};
use tsxplain_cli::run;

fn run_args(args: &[&str]) -> Result<(), tsxplain_cli::CliError> {
    run(std::iter::once("tsxplain").chain(args.iter().copied()))
}

fn write_series(dir: &Path, name: &str, columns: &[&str], rows: &[Vec<f64>]) -> PathBuf {
    let sample = Sample::from_rows(rows).unwrap();
    let table = Table::new(columns.iter().map(|c| c.to_string()).collect(), sample);
    let path = dir.join(name);
    write_csv_file(&table, &path).unwrap();
    path
}

fn read<T: serde::de::DeserializeOwned>(path: &Path) -> T {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn ramp(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| vec![(i as f64 * 0.7).sin() + 2.0]).collect()
}

#[test]
fn uniform_window_four_on_24_rows() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_series(dir.path(), "s.csv", &["x"], &ramp(24));
    let out = dir.path().join("out");
    run_args(&["segment", input.to_str().unwrap(), "--algo", "uniform", "--window-size", "4", "--out", out.to_str().unwrap()]).unwrap();
    let doc: SegmentMapDoc = read(&out.join("segments-uniform.json"));
    doc.validate().unwrap();
    assert_eq!(doc.num_segments, 6);
    assert_eq!(doc.shape, [24, 1]);
    let manifest: RunManifest = read(&out.join("manifest.json"));
    assert_eq!(manifest.command, "segment");
    assert_eq!(manifest.outputs.len(), 1);
}

#[test]
fn sax_symbol_pattern_four_segments() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<Vec<f64>> = [0.0, 0.0, 0.0, 5.0, 5.0, 0.0, 10.0, 10.0, 10.0].iter().map(|&v| vec![v]).collect();
    let input = write_series(dir.path(), "p.csv", &["x"], &rows);
    let out = dir.path().join("out");
    run_args(&["segment", input.to_str().unwrap(), "--algo", "sax", "--partitions", "4", "--out", out.to_str().unwrap()]).unwrap();
    let doc: SegmentMapDoc = read(&out.join("segments-sax.json"));
    assert_eq!(doc.num_segments, 4);
}

#[test]
fn all_algorithms_with_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i as f64 * 0.4).sin() + if i > 20 { 3.0 } else { 0.0 }, i as f64 * 0.1]).collect();
    let input = write_series(dir.path(), "s.csv", &["a", "b"], &rows);
    let out = dir.path().join("out");
    run_args(&["segment", input.to_str().unwrap(), "--algo", "all", "--svg", "--out", out.to_str().unwrap()]).unwrap();
    for algorithm in tsxplain::Algorithm::ALL {
        let doc: SegmentMapDoc = read(&out.join(format!("segments-{algorithm}.json")));
        assert_eq!(doc.algorithm, algorithm.name());
        doc.validate().unwrap();
        assert!(out.join(format!("segments-{algorithm}.svg")).exists());
    }
    let svg = std::fs::read_to_string(out.join("comparison.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 12);
}

#[test]
fn explain_linear_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![1.0 + i as f64 * 0.25]).collect();
    let input = write_series(dir.path(), "s.csv", &["x"], &rows);
    let coefs: Vec<f64> = (0..12).map(|i| 0.5 + (i % 4) as f64 * 0.3).collect();
    let coef_list = coefs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("|");
    let out = dir.path().join("out");
    let model = format!("builtin:linear:coef={coef_list},bias=2");
    run_args(&[
        "explain", input.to_str().unwrap(), "--model", &model, "--algo", "uniform", "--window-size", "3",
        "--replacement", "zero", "--svg", "--out", out.to_str().unwrap(),
    ])
    .unwrap();
    let doc: AttributionDoc = read(&out.join("attribution.json"));
    let attribution = doc.validate().unwrap();
    for (s, &coef) in attribution.segment_coefficients().iter().enumerate() {
        let expected: f64 = (3 * s..3 * s + 3).map(|t| coefs[t] * rows[t][0]).sum();
        assert!((coef - expected).abs() / expected <= 0.05, "segment {s}: {coef} vs {expected}");
    }
    assert!(out.join("attribution.svg").exists());
}

#[test]
fn explain_is_byte_identical_and_process_equals_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![(i as f64).sqrt(), (i as f64 * 0.3).cos()]).collect();
    let input = write_series(dir.path(), "s.csv", &["a", "b"], &rows);
    let fixture: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "tests", "fixtures", "last_value_server.py"].iter().collect();
    let process = format!("process:python3 {} normal", fixture.display());
    let mut outputs = Vec::new();
    for (i, model) in ["builtin:last_value", "builtin:last_value", process.as_str()].iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        run_args(&[
            "explain", input.to_str().unwrap(), "--model", model, "--algo", "slopes", "--seed", "7",
            "--masks", "300", "--out", out.to_str().unwrap(),
        ])
        .unwrap();
        outputs.push(std::fs::read(out.join("attribution.json")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

fn evaluate(dir: &Path, extra: &[&str]) -> PathBuf {
    let input = dir.join("series.csv");
    let table = Table::new(vec!["signal".into(), "drift".into()], tsxplain::synthetic::seasonal_series(64, 2, 3));
    write_csv_file(&table, &input).unwrap();
    let out = dir.join(format!("eval{}", extra.len()));
    let mut args = vec![
        "evaluate", input.to_str().unwrap(), "--model", "builtin:masked_motif:t0=10,t1=15", "--window-length", "24",
        "--masks", "200", "--out", out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    run_args(&args).unwrap();
    out
}

#[test]
fn evaluate_table_and_scores() {
    let dir = tempfile::tempdir().unwrap();
    let out = evaluate(dir.path(), &["--algos", "all"]);
    let doc: EvalDoc = read(&out.join("eval-m1-zero.json"));
    doc.validate().unwrap();
    assert_eq!(doc.per_algo.len(), 6);
    assert_eq!(doc.config.num_windows, 40);
    for (name, r) in &doc.per_algo {
        assert!(r.score.unwrap() > 1.0, "{name}: {:?}", r.score);
    }
    let table = std::fs::read_to_string(out.join("table.txt")).unwrap();
    let rows: Vec<&str> = table.lines().filter(|l| tsxplain::Algorithm::ALL.iter().any(|a| l.starts_with(a.title()))).collect();
    assert_eq!(rows.len(), 6);
}

#[test]
fn mirrored_baseline_gives_unit_scores() {
    let dir = tempfile::tempdir().unwrap();
    let out = evaluate(dir.path(), &["--mirror-baseline", "--algos", "uniform,sax,bins-min"]);
    let doc: EvalDoc = read(&out.join("eval-m1-zero.json"));
    assert_eq!(doc.per_algo.len(), 3);
    assert!(doc.per_algo.values().all(|r| r.score == Some(1.0)));
}

#[test]
fn evaluate_is_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = evaluate(dir.path(), &["--workers", "1", "--algos", "exponential,slopes"]);
    let b = evaluate(dir.path(), &["--workers", "3", "--algos", "exponential,slopes", "--seed", "0"]);
    assert_eq!(
        std::fs::read(a.join("eval-m1-zero.json")).unwrap(),
        std::fs::read(b.join("eval-m1-zero.json")).unwrap()
    );
}

#[test]
fn demo_outputs_validate_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("demo");
    let started = std::time::Instant::now();
    run_args(&["demo", "--out", out.to_str().unwrap(), "--windows", "40", "--masks", "200"]).unwrap();
    assert!(started.elapsed().as_secs() < 60);
    read::<AttributionDoc>(&out.join("explain/attribution.json")).validate().unwrap();
    for algorithm in tsxplain::Algorithm::ALL {
        read::<SegmentMapDoc>(&out.join(format!("segment/segments-{algorithm}.json"))).validate().unwrap();
    }
    for name in ["eval-m1-zero", "eval-m2-zero", "eval-m1-mean", "eval-m2-mean"] {
        read::<EvalDoc>(&out.join(format!("evaluate/{name}.json"))).validate().unwrap();
    }
    let table = read_csv_file(&out.join("dataset.csv")).unwrap();
    assert_eq!(table.sample.shape(), (64, 2));
    assert_eq!(table.timestamps.as_ref().unwrap()[0], "t0000");

    let outcome = cmd_replay(&ReplayArgs {
        manifest: out.join("manifest.json"),
        out: dir.path().join("again"),
    })
    .unwrap();
    assert!(outcome.mismatched.is_empty(), "{:?}", outcome.mismatched);
    assert!(outcome.checked > 20);
}

#[test]
fn replay_refuses_changed_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_series(dir.path(), "s.csv", &["x"], &ramp(16));
    let out = dir.path().join("out");
    run_args(&["segment", input.to_str().unwrap(), "--algo", "slopes", "--out", out.to_str().unwrap()]).unwrap();
    write_series(dir.path(), "s.csv", &["x"], &ramp(17));
    let err = cmd_replay(&ReplayArgs {
        manifest: out.join("manifest.json"),
        out: dir.path().join("again"),
    })
    .unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_series(dir.path(), "s.csv", &["x"], &ramp(16));
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x\n1\nnope\n").unwrap();
    let bin = env!("CARGO_BIN_EXE_tsxplain");
    let out = dir.path().join("o");
    let code = |args: &[&str]| Process::new(bin).args(args).output().unwrap().status.code().unwrap();
    assert_eq!(code(&["segment", input.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    assert_eq!(code(&["segment", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]), 2);
    assert_eq!(code(&["segment", input.to_str().unwrap(), "--algo", "wavelet", "--out", out.to_str().unwrap()]), 2);
    assert_eq!(code(&["explain", input.to_str().unwrap(), "--model", "builtin:oracle", "--out", out.to_str().unwrap()]), 2);
    assert_eq!(code(&["explain", input.to_str().unwrap(), "--model", "process:exit 1", "--out", out.to_str().unwrap()]), 3);
    assert_eq!(code(&["explain", input.to_str().unwrap(), "--model", "http://127.0.0.1:9", "--timeout", "2", "--out", out.to_str().unwrap()]), 3);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["models"]), 0);
}

fn table_strategy() -> impl Strategy<Value = Table> {
    (2usize..12, 1usize..4, any::<bool>()).prop_flat_map(|(t, f, stamped)| {
        let values = prop::collection::vec(
            prop_oneof![any::<f64>().prop_filter("finite", |v| v.is_finite()), -1e3f64..1e3, Just(0.0), Just(-0.0)],
            t * f,
        );
        values.prop_map(move |v| Table {
            timestamps: stamped.then(|| (0..t).map(|i| format!("2024-01-{:02} 00:00", i + 1)).collect()),
            names: (0..f).map(|i| format!("feature {i}")).collect(),
            sample: Sample::from_flat(t, f, v).unwrap(),
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn csv_round_trip_is_lossless(table in table_strategy()) {
        let mut buffer = Vec::new();
        write_csv(&table, &mut buffer).unwrap();
        let back = read_csv(buffer.as_slice()).unwrap();
        prop_assert_eq!(&back.names, &table.names);
        prop_assert_eq!(&back.timestamps, &table.timestamps);
        let bits = |s: &Sample| s.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back.sample), bits(&table.sample));
    }
}

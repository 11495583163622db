use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::Path;
use std::process::Command;

use irl_elicit::harness::{
    aggregate_path, emit_plot_data, read_aggregate, read_results, replay_run, run_batch,
    run_batch_to_file, write_results, ExperimentConfig, Method, SweepAxis,
};

const SMALL: &[(&str, &str)] = &[
    ("states", "8"),
    ("eta", "1,4"),
    ("horizon", "60"),
    ("runs", "3"),
    ("samples", "400"),
    ("burn-in", "100"),
    ("mwal-max-rounds", "40"),
    ("seed", "77"),
];

fn settings(extra: &[(&str, &str)]) -> BTreeMap<String, String> {
    SMALL
        .iter()
        .chain(extra)
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn config(extra: &[(&str, &str)]) -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.apply(&settings(extra)).unwrap();
    c
}

fn write_config(dir: &Path, extra: &[(&str, &str)]) -> std::path::PathBuf {
    let path = dir.join("batch.conf");
    let text: String = settings(extra)
        .iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect();
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn every_run_and_method_has_a_record() {
    let c = config(&[]);
    let outcome = run_batch(&c).unwrap();
    assert_eq!(outcome.records.len(), 2 * 3 * Method::ALL.len());
    assert_eq!(outcome.error_count(), 0);
    for (i, chunk) in outcome.records.chunks(Method::ALL.len()).enumerate() {
        let methods: Vec<Method> = chunk.iter().map(|r| r.method).collect();
        assert_eq!(methods, Method::ALL.to_vec());
        assert!(chunk.iter().all(|r| r.run_id == i as u64));
        assert!(chunk.iter().all(|r| r.loss.unwrap() >= 0.0));
        assert!(chunk.iter().all(|r| r.sweep_axis == SweepAxis::Eta));
        assert!(chunk.iter().all(|r| r.wall_time_ms.is_none()));
    }
}

#[test]
fn aggregate_recomputes_from_records() {
    let outcome = run_batch(&config(&[])).unwrap();
    for row in &outcome.aggregate {
        let losses: Vec<f64> = outcome
            .records
            .iter()
            .filter(|r| r.method == row.method && r.sweep_value == row.sweep_value)
            .map(|r| r.loss.unwrap())
            .collect();
        let n = losses.len() as f64;
        let mean = losses.iter().sum::<f64>() / n;
        let var = losses.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert_eq!(row.n, losses.len());
        assert!((row.mean_loss - mean).abs() <= 1e-12);
        assert!((row.stderr - (var / n).sqrt()).abs() <= 1e-12);
    }
    assert_eq!(outcome.aggregate.len(), 2 * Method::ALL.len());
}

#[test]
fn results_are_byte_identical_across_runs_and_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let first = config(&[("workers", "1")]);
    run_batch_to_file(&first, &a).unwrap();
    run_batch_to_file(&config(&[("workers", "3")]), &b).unwrap();
    let bytes = fs::read(&a).unwrap();
    // the worker count is echoed in the header, everything else must match
    let strip = |text: Vec<u8>| -> String {
        String::from_utf8(text)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("# workers"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(bytes.clone()), strip(fs::read(&b).unwrap()));
    assert!(!bytes.contains(&b'\r'));
    assert!(!dir.path().join("a.csv.partial").exists());
    assert!(aggregate_path(&a).exists());

    // reading and rewriting is lossless
    let parsed = read_results(BufReader::new(fs::File::open(&a).unwrap())).unwrap();
    let mut again = Vec::new();
    write_results(&mut again, &first.settings(), &parsed.records).unwrap();
    assert_eq!(again, bytes);
    assert_eq!(parsed.settings["seed"], "77");
}

#[test]
fn replay_reproduces_every_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    run_batch_to_file(&config(&[("runs", "2")]), &out).unwrap();
    let file = read_results(BufReader::new(fs::File::open(&out).unwrap())).unwrap();
    for run_id in 0..4 {
        let replay = replay_run(&file, run_id).unwrap();
        assert!(replay.matches(), "run {run_id}");
        assert_eq!(replay.recorded.len(), Method::ALL.len());
    }
    assert!(replay_run(&file, 99).is_err());
}

#[test]
fn plot_data_has_one_file_per_axis() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    run_batch_to_file(
        &config(&[("eta", "4"), ("horizon", "20,40"), ("methods", "soft,mh")]),
        &out,
    )
    .unwrap();
    let plot = dir.path().join("plot.csv");
    let written = emit_plot_data(&out, &plot).unwrap();
    assert_eq!(written, vec![plot.clone()]);
    let rows = read_aggregate(BufReader::new(fs::File::open(&plot).unwrap())).unwrap();
    assert!(rows.iter().all(|r| r.sweep_axis == SweepAxis::Horizon));
    assert_eq!(rows.len(), 4);
    assert_eq!(
        fs::read(&plot).unwrap(),
        fs::read(aggregate_path(&out)).unwrap()
    );
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_irl-elicit"))
}

#[test]
fn cli_run_aggregate_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(dir.path(), &[("runs", "1"), ("methods", "soft,lp,mh")]);
    let out = dir.path().join("cli.csv");
    let status = cli()
        .args(["run", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&out)
        .arg("--eta")
        .arg("2")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("# eta = 2"), "flag overrides the file");

    let plot = dir.path().join("plot.csv");
    let status = cli()
        .args(["aggregate", "--in"])
        .arg(&out)
        .arg("--out")
        .arg(&plot)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(plot.exists());

    let dump = dir.path().join("setup.json");
    let status = cli()
        .args(["replay", "--run-id", "0", "--in"])
        .arg(&out)
        .arg("--dump")
        .arg(&dump)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let setup: serde_json::Value = serde_json::from_slice(&fs::read(&dump).unwrap()).unwrap();
    assert!(setup.get("demonstration").is_some());

    // a tampered loss no longer replays
    let lines: Vec<String> = text.lines().map(String::from).collect();
    let row = lines.iter().position(|l| l.starts_with("0,")).unwrap();
    let mut fields: Vec<String> = lines[row].split(',').map(String::from).collect();
    fields[4] = "1.0000000000000000e0".into();
    let mut tampered = lines.clone();
    tampered[row] = fields.join(",");
    let bad = dir.path().join("tampered.csv");
    fs::write(&bad, tampered.join("\n") + "\n").unwrap();
    let status = cli().args(["replay", "--in"]).arg(&bad).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn cli_config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    for args in [
        vec!["run", "--states", "2"],
        vec!["run", "--methods", "soft,oracle"],
        vec!["run", "--gamma", "1.5"],
        vec!["run", "--burn-in", "500", "--samples", "400"],
    ] {
        let status = cli().args(&args).arg("--out").arg(&out).status().unwrap();
        assert_eq!(status.code(), Some(1), "{args:?}");
    }
    let status = cli().args(["run", "--states", "8"]).status().unwrap();
    assert_eq!(status.code(), Some(1), "missing --out");
    let garbage = dir.path().join("garbage.csv");
    fs::write(&garbage, "not,a,results\nfile\n").unwrap();
    let status = cli()
        .args(["aggregate", "--in"])
        .arg(&garbage)
        .arg("--out")
        .arg(dir.path().join("p.csv"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

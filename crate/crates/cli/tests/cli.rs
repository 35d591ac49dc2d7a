use std::process::{Command, Output};

fn tcnot(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tcnot"));
    cmd.args(args).env_remove("TCNOT_WORKERS").env_remove("RUST_LOG");
    if let Some(w) = workers {
        cmd.env("TCNOT_WORKERS", w);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

const CHAIN: &[&str] = &[
    "cnot-chain", "--d", "3", "--p", "0.003,0.006", "--cnots", "2", "--shots", "3000", "--seed", "5", "--baseline",
];

#[test]
fn csv_has_header_and_one_row_per_cell() {
    let out = stdout(&tcnot(CHAIN, None));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], tcnot::experiment::CSV_HEADER);
    // two probabilities, each with its baseline row
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("cnot_chain-baseline,3,0.003,1,0,3000,"));
    assert!(lines[2].starts_with("cnot_chain,3,0.003,1,2,3000,"));
    for l in &lines[1..] {
        assert_eq!(l.split(',').count(), 12);
    }
}

#[test]
fn output_is_identical_across_worker_counts() {
    let one = stdout(&tcnot(CHAIN, Some("1")));
    let three = stdout(&tcnot(CHAIN, Some("3")));
    let flag = {
        let mut args = CHAIN.to_vec();
        args.extend(["--workers", "2"]);
        stdout(&tcnot(&args, None))
    };
    assert_eq!(one, three);
    assert_eq!(one, flag);
}

#[test]
fn writes_json_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = tcnot(
        &["memory", "--d", "3", "--p", "0", "--shots", "100", "--format", "json", "--out", path.to_str().unwrap()],
        None,
    );
    assert!(stdout(&o).is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.trim_start().starts_with('['));
    assert!(text.contains("\"failures\": 0"));
}

#[test]
fn sweep_reads_toml() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    std::fs::write(
        &path,
        "experiment = \"memory\"\nfamily = \"repetition\"\nnoise = \"phenomenological\"\n\
         shots = 500\ndistances = [3, 5]\nprobabilities = [0.01]\n",
    )
    .unwrap();
    let out = stdout(&tcnot(&["sweep", "--config", path.to_str().unwrap()], None));
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("memory,3,0.01,3,0,500,"));
    assert!(rows[1].starts_with("memory,5,0.01,5,0,500,"));
}

#[test]
fn bundled_sweep_config_parses() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/cnot_chain_sweep.toml");
    let text = std::fs::read_to_string(path).unwrap();
    let sweep: tcnot::experiment::SweepConfig = toml::from_str(&text).unwrap();
    assert_eq!(sweep.expand().len(), 16);
}

#[test]
fn config_errors_exit_nonzero() {
    for args in [
        &["memory", "--d", "4"][..],
        &["memory", "--shots", "0"],
        &["memory", "--family", "repetition", "--basis", "X"],
        &["cnot-chain", "--p", "1.5"],
        &["memory", "--workers", "0"],
    ] {
        let o = tcnot(args, None);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "distance = 3\n").unwrap();
    assert_eq!(tcnot(&["sweep", "--config", path.to_str().unwrap()], None).status.code(), Some(1));
    assert_eq!(tcnot(&["sweep", "--config", "/nonexistent.toml"], None).status.code(), Some(1));
}

#[test]
fn argument_errors_exit_with_usage_code() {
    assert_eq!(tcnot(&["memory", "--family", "toric"], None).status.code(), Some(2));
    assert_eq!(tcnot(&["teleport"], None).status.code(), Some(2));
}

#[test]
fn circuit_dump_parses_back() {
    let text = stdout(&tcnot(&["circuit", "--d", "3", "--p", "0.001", "--cnots", "1"], None));
    let c = tcnot::circuit::parse_circuit(&text).unwrap();
    assert_eq!(c.num_observables(), 2);
}

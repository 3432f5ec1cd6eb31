//! End-to-end runs of the compiled binary: byte-level determinism across
//! reruns and thread counts, exit-code contract, file products, and the
//! stderr/stdout split.

use std::fs;
use std::io::BufReader;
use std::process::{Command, Output};

use tempfile::tempdir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mutperc"))
        .args(args)
        .output()
        .expect("binary spawns")
}

const SWEEP_CFG: &str = r#"
topology = "lattice"
side = 32
map = "rewired"
q = 0.3
realizations = 8
master_seed = 7

[p_grid]
start = 0.45
stop = 0.85
step = 0.05
"#;

#[test]
fn sweep_is_byte_identical_across_reruns_and_thread_counts() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, SWEEP_CFG).unwrap();
    let cfg = cfg.to_str().unwrap();

    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    for (path, threads) in [(&a, None), (&b, None), (&c, Some("1"))] {
        let mut args = vec!["sweep", "--config", cfg, "--out", path.to_str().unwrap()];
        if let Some(t) = threads {
            args.extend(["--threads", t]);
        }
        let out = run(&args);
        assert!(out.status.success(), "sweep failed: {:?}", out);
    }
    let bytes_a = fs::read(&a).unwrap();
    assert_eq!(bytes_a, fs::read(&b).unwrap(), "rerun changed the CSV");
    assert_eq!(bytes_a, fs::read(&c).unwrap(), "thread count changed the CSV");

    let text = String::from_utf8(bytes_a).unwrap();
    assert!(text.starts_with("# command=sweep topology=lattice L=32"));
    assert!(text.contains("jump_threshold=0.1"), "defaults missing from header");
    assert!(text.contains("q,p,mean_pinf,std_pinf,mean_noi,realizations,N"));
}

#[test]
fn sweep_keeps_data_on_stdout_and_progress_on_stderr() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, SWEEP_CFG).unwrap();
    let out = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stdout.starts_with("# command=sweep"));
    assert!(stdout.contains("q,p,mean_pinf"));
    assert!(stderr.contains("sweep:"), "progress must go to stderr");
    assert!(!stdout.contains("sweep: done"), "progress leaked into the data stream");
}

#[test]
fn out_of_range_q_exits_with_config_error() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, SWEEP_CFG.replace("q = 0.3", "q = 1.5")).unwrap();
    let out = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("error:"), "stderr should explain: {stderr}");
}

#[test]
fn contradictory_or_missing_plans_exit_with_config_error() {
    let dir = tempdir().unwrap();

    let both = dir.path().join("both.toml");
    fs::write(
        &both,
        SWEEP_CFG.to_string() + "\n[bisection]\ntarget = \"pc\"\ntol = 0.002\n",
    )
    .unwrap();
    assert_eq!(run(&["sweep", "--config", both.to_str().unwrap()]).status.code(), Some(2));

    // A bisection-only config is valid, but sweep cannot use it.
    let bisect_only = dir.path().join("bisect.toml");
    let text: String = SWEEP_CFG
        .lines()
        .take_while(|l| !l.starts_with("[p_grid]"))
        .collect::<Vec<_>>()
        .join("\n")
        + "\n[bisection]\ntarget = \"pc\"\ntol = 0.002\n";
    fs::write(&bisect_only, text).unwrap();
    assert_eq!(
        run(&["sweep", "--config", bisect_only.to_str().unwrap()]).status.code(),
        Some(2)
    );

    // No config at all.
    assert_eq!(run(&["sweep"]).status.code(), Some(2));
}

#[test]
fn absent_transition_exits_3() {
    // Mean degree 1.2 cannot sustain a mutual giant component anywhere in
    // (0, 1]: the scan window finds the system dead at the top.
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        r#"
topology = "er"
n = 2500
mean_degree = 1.2
map = "rewired"
q = 1.0
realizations = 20
master_seed = 7

[bisection]
target = "pc"
tol = 0.01
"#,
    )
    .unwrap();
    let out = run(&["critical", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stderr).unwrap().contains("no percolation transition"));
}

#[test]
fn generate_writes_files_that_parse_back() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        r#"
topology = "lattice"
side = 3
map = "identity"
realizations = 1
master_seed = 5

[p_grid]
start = 0.5
stop = 0.5
step = 0.1
"#,
    )
    .unwrap();
    let base = dir.path().join("tiny");
    let out = run(&[
        "generate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        base.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{:?}", out);

    let edges = fs::File::open(base.with_extension("edges")).unwrap();
    let graph = mutperc::graphs::read_edge_list(BufReader::new(edges)).unwrap();
    assert_eq!(graph.node_count(), 9);
    assert_eq!(graph.edge_count(), 18);

    let map_file = fs::File::open(base.with_extension("map")).unwrap();
    let map = mutperc::depmap::read_map(BufReader::new(map_file)).unwrap();
    assert_eq!(map.targets(), (0..9u32).collect::<Vec<_>>().as_slice());
}

#[test]
fn critical_pc_reports_a_plausible_lattice_threshold() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        r#"
topology = "lattice"
side = 24
map = "rewired"
q = 1.0
realizations = 10
master_seed = 42

[bisection]
target = "pc"
tol = 0.005
"#,
    )
    .unwrap();
    let out = run(&["critical", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{:?}", out);
    let text = String::from_utf8(out.stdout).unwrap();
    let data = text
        .lines()
        .find(|l| l.starts_with("lattice,"))
        .expect("critical row present");
    let p_c: f64 = data.split(',').nth(2).unwrap().parse().unwrap();
    assert!((0.5..0.95).contains(&p_c), "implausible p_c {p_c}");
}

#[test]
fn apen_and_noi_emit_one_row_per_grid_point() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        r#"
topology = "lattice"
side = 32
map = "rewired"
q = 1.0
realizations = 3
master_seed = 9

[p_grid]
start = 0.5
stop = 0.5
step = 0.1

[q_grid]
start = 0.0
stop = 1.0
step = 0.5
"#,
    )
    .unwrap();
    let out = run(&["apen", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{:?}", out);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "param,mean_apen,se_apen,realizations");
    assert_eq!(rows.len(), 4, "three grid points expected: {text}");

    // Same config drives the NOI scan at a single q.
    let noi_cfg = dir.path().join("noi.toml");
    fs::write(
        &noi_cfg,
        fs::read_to_string(&cfg)
            .unwrap()
            .replace("side = 32", "side = 24")
            .replace("realizations = 3", "realizations = 10")
            .replace("start = 0.0", "start = 1.0"),
    )
    .unwrap();
    let out = run(&["noi", "--config", noi_cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{:?}", out);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "q,noi_at_pc");
    assert_eq!(rows.len(), 2, "single q point expected: {text}");
}

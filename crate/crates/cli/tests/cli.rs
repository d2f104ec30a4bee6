use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qcertify_cli::commands::{CERTIFY_HEADER, CHERNOFF_HEADER, CONVERGENCE_HEADER, FIT_HEADER};

fn qcertify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcertify"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn qcertify")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    qcertify(&args)
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

const CHERNOFF: &str = r#"
[chernoff]
bound = "dephasing"
sweep = "tau"
range = { start = 0.5, stop = 1.5, step = 0.5 }
eps = [0.1, 0.3]
iterations = [1, 2]
"#;

#[test]
fn chernoff_schema_and_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CHERNOFF);
    let out = dir.path().join("sub/xi.csv");
    let status = run("chernoff", &cfg, &out, &[]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert_eq!(header(&out), CHERNOFF_HEADER.join(","));
    assert_eq!(header(&out), "bound,parameter,value,eps,n_iterations,alpha,beta,xi,xi_per_iteration,s_min");
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 2 * 2);
    let first: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[0], "dephasing");
    assert_eq!(first[1], "tau");
    assert_eq!(first[2].parse::<f64>().unwrap(), 0.5);

    let meta = std::fs::read_to_string(dir.path().join("sub/xi.csv.meta.toml")).unwrap();
    assert!(meta.contains("command = \"chernoff\""));
    assert!(meta.contains("seed = 0"));
}

#[test]
fn certify_and_convergence_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
seed = 5

[certify]
model = "phase-gate"
x_true = 0.3
half_width = 0.2
centers = { start = 0.0, stop = 0.6, step = 0.3 }
n0 = 20
m = [1, 2]
criterion = ["mean", "hpd"]
particles = 200
trials = 3

[convergence]
model = "phase-gate"
x_true = 0.3
n0 = [4, 8, 12, 16]
m = [1, 2]
particles = 200
trials = 2
fit_min_n0 = 4
"#,
    );
    let out = dir.path().join("cert.csv");
    assert!(run("certify", &cfg, &out, &[]).status.success());
    assert_eq!(header(&out), CERTIFY_HEADER.join(","));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 2 * 2);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",3")));

    let out = dir.path().join("conv.csv");
    assert!(run("convergence", &cfg, &out, &["--trials", "3"]).status.success());
    assert_eq!(header(&out), CONVERGENCE_HEADER.join(","));
    assert_eq!(header(&dir.path().join("conv.fit.csv")), FIT_HEADER.join(","));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1 + 4 * 2);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",3")));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
seed = 1

[certify]
model = "phase-gate"
x_true = 0.3
half_width = 0.05
centers = [0.3]
n0 = 10
m = [1]
particles = 100
trials = 40
"#,
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(run("certify", &cfg, &a, &[]).status.success());
    assert!(run("certify", &cfg, &b, &["--seed", "1"]).status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let meta = std::fs::read_to_string(dir.path().join("b.csv.meta.toml")).unwrap();
    assert!(meta.contains("seed = 1"));
}

fn assert_config_error(text: &str, needle: &str) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), text);
    let out = dir.path().join("x.csv");
    let cmd = text.lines().find_map(|l| l.strip_prefix('[')).unwrap().trim_end_matches(']');
    let result = run(cmd, &cfg, &out, &[]);
    assert_eq!(result.status.code(), Some(2), "{}", String::from_utf8_lossy(&result.stderr));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains(needle), "{stderr}");
    assert!(!out.exists());
}

#[test]
fn empty_range_is_config_error() {
    assert_config_error(
        "[chernoff]\nbound = \"dephasing\"\nsweep = \"tau\"\nrange = { start = 2.0, stop = 1.0, step = 0.1 }\neps = [0.1]\n",
        "empty range",
    );
}

#[test]
fn unknown_key_is_config_error() {
    assert_config_error(
        "[chernoff]\nbound = \"dephasing\"\nsweep = \"tau\"\nrange = { start = 1.0, stop = 2.0, step = 0.1 }\neps = [0.1]\nepsilon = 3\n",
        "epsilon",
    );
}

#[test]
fn zero_trials_is_config_error() {
    assert_config_error(
        "[certify]\nmodel = \"phase-gate\"\nx_true = 0.3\nhalf_width = 0.1\ncenters = [0.3]\nm = [1]\ntrials = 0\n",
        "trials",
    );
}

#[test]
fn indivisible_budget_is_config_error() {
    assert_config_error(
        "[certify]\nmodel = \"phase-gate\"\nx_true = 0.3\nhalf_width = 0.1\ncenters = [0.3]\nn0 = 10\nm = [3]\n",
        "m",
    );
}

#[test]
fn missing_section_and_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CHERNOFF);
    let out = dir.path().join("x.csv");
    assert_eq!(run("certify", &cfg, &out, &[]).status.code(), Some(2));
    let missing = dir.path().join("nope.toml");
    assert_eq!(run("chernoff", &missing, &out, &[]).status.code(), Some(2));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        let file = qcertify_cli::config::ConfigFile::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        if let Some(c) = &file.chernoff {
            c.validate().unwrap();
        }
        if let Some(c) = &file.certify {
            c.validate().unwrap();
        }
        if let Some(c) = &file.convergence {
            c.validate().unwrap();
        }
        n += 1;
    }
    assert!(n >= 8);
}

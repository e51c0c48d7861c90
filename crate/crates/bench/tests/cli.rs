use std::fs;
use std::path::Path;

use otacal_bench::cli::cli_main;
use otacal_bench::{run_trials, ExperimentConfig};

const SMALL: &str = r#"
m = 10
g = 5
scheme = "FC_I"
snr_db = [10, 30]
trials = 12
estimators = ["LS", "AVALANCHE", "AML"]
constraint = "NPC"
seed = 3
"#;

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("otacal").chain(args.iter().copied());
    let code = cli_main(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn check_reports_the_equation_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "a.toml",
        "m = 64\ng = 12\nscheme = \"FC_I\"\nsnr_db = [30]\nestimators = [\"LS\"]\nconstraint = \"NPC\"\n",
    );
    let (code, out, _) = run(&["check", &cfg]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "rows=66 needed=63 ok");
}

#[test]
fn unidentifiable_configuration_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "a.toml",
        "m = 68\ng = 12\nscheme = \"FC_I\"\nsnr_db = [30]\nestimators = [\"LS\"]\nconstraint = \"NPC\"\n",
    );
    let (code, out, _) = run(&["check", &cfg]);
    assert_eq!(code, 3);
    assert!(out.contains("needed=67"));
    let csv = dir.path().join("o.csv");
    let (code, _, err) = run(&["run", &cfg, "--out", csv.to_str().unwrap()]);
    assert_eq!(code, 3, "{err}");
    assert!(!csv.exists());
}

#[test]
fn malformed_configuration_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "m = 10\nscheme = \"FC_I\"\nbogus = 1\n");
    assert_eq!(run(&["check", &bad]).0, 2);
    let broken = write(dir.path(), "broken.toml", "m = = 10");
    assert_eq!(run(&["check", &broken]).0, 2);
    let neg = write(dir.path(), "neg.toml", &SMALL.replace("trials = 12", "trials = 0"));
    assert_eq!(run(&["run", &neg, "--out", "/dev/null"]).0, 2);
    // Rogalin needs single-antenna groups
    let wrong = write(dir.path(), "wrong.toml", &SMALL.replace("\"AML\"", "\"ROGALIN\""));
    assert_eq!(run(&["check", &wrong]).0, 2);
}

#[test]
fn same_seed_gives_identical_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SMALL);
    let paths: Vec<_> = (0..3).map(|k| dir.path().join(format!("o{k}.csv"))).collect();
    for (k, p) in paths.iter().enumerate() {
        let seed = if k == 2 { "4" } else { "3" };
        let (code, _, err) = run(&["run", &cfg, "--out", p.to_str().unwrap(), "--seed", seed]);
        assert_eq!(code, 0, "{err}");
    }
    let read = |p: &Path| fs::read_to_string(p).unwrap();
    assert_eq!(read(&paths[0]), read(&paths[1]));
    assert_ne!(read(&paths[0]), read(&paths[2]));
    let text = read(&paths[0]);
    assert!(text.starts_with("estimator,constraint,snr_db,mse,crb_trace,trials,wall_time,skipped"));
    assert_eq!(text.lines().count(), 1 + 3 * 2);
}

#[test]
fn thread_count_does_not_change_results() {
    let cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    let with = |n: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        pool.install(|| run_trials(&cfg).unwrap())
    };
    let (a, b) = (with(1), with(3));
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.trial, y.trial);
        assert_eq!(x.f_true, y.f_true);
        assert_eq!(x.crb_unit, y.crb_unit);
        assert_eq!(x.estimates, y.estimates);
    }
}

#[test]
fn crb_and_schemes_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SMALL);
    let (code, out, err) = run(&["crb", &cfg]);
    assert_eq!(code, 0, "{err}");
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1..].iter().all(|r| r.starts_with("CRB,NPC,")));

    let (code, out, _) = run(&["schemes", "--list"]);
    assert_eq!(code, 0);
    for name in ["FC_I", "FC_II", "SINGLETON", "ARGOS", "AVALANCHE", "INTERLEAVED", "NON_INTERLEAVED", "CUSTOM"] {
        assert!(out.contains(name));
    }
    assert_eq!(run(&["frobnicate"]).0, 2);
}

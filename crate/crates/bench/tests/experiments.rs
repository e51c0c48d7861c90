use otacal_bench::{run_experiment, ExperimentConfig};

fn table(text: &str) -> otacal_bench::ResultTable {
    run_experiment(&ExperimentConfig::from_toml(text).unwrap()).unwrap()
}

#[test]
fn noiseless_runs_are_exact() {
    let single = table(
        r#"
m = 8
scheme = "SINGLETON"
snr_db = [inf]
trials = 5
estimators = ["LS", "ARGOS", "ROGALIN", "DAISY_CHAIN", "AML"]
constraint = "FCC"
"#,
    );
    let grouped = table(
        r#"
m = 10
g = 5
scheme = "FC_I"
snr_db = [inf]
trials = 5
estimators = ["LS", "AVALANCHE", "AML"]
constraint = "NPC"
"#,
    );
    for row in single.rows.iter().chain(&grouped.rows) {
        assert_eq!(row.skipped, 0, "{}", row.estimator);
        assert!(row.mse < 1e-16, "{} {}", row.estimator, row.mse);
        assert_eq!(row.crb_trace, Some(0.0));
    }
}

#[test]
fn daisy_chain_accumulates_error() {
    let t = table(
        r#"
m = 16
scheme = "SINGLETON"
snr_db = [20]
trials = 200
estimators = ["DAISY_CHAIN", "ROGALIN"]
constraint = "FCC"
seed = 21
crb = false
"#,
    );
    let (chain, rogalin) = (t.get("DAISY_CHAIN", 20.0).unwrap().mse, t.get("ROGALIN", 20.0).unwrap().mse);
    assert!(chain >= rogalin, "daisy chain {chain} vs Rogalin {rogalin}");
}

#[test]
fn avalanche_trails_joint_ls_at_30_db() {
    let t = table(
        r#"
m = 64
g = 12
scheme = "FC_I"
snr_db = [30]
trials = 200
estimators = ["LS", "AVALANCHE"]
constraint = "NPC"
seed = 30
crb = false
"#,
    );
    assert!(t.get("AVALANCHE", 30.0).unwrap().mse >= t.get("LS", 30.0).unwrap().mse);
}

use std::path::Path;
use std::process::{Command, Output};

fn balancelab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_balancelab"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("experiment.toml");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const AP_CONFIG: &str = r#"
seed = 7

[model]
model = "euler-friction"

[run-ap]
cells = 32
epsilon = 0.05
t-final = 0.01
"#;

#[test]
fn minimal_ap_run_writes_table_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), AP_CONFIG);
    let o = balancelab(dir.path(), &["run-ap", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("run-ap.csv")).unwrap();
    assert!(csv.starts_with("x,u_0\n"));
    assert_eq!(csv.lines().count(), 33);
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run-ap.json")).unwrap()).unwrap();
    assert_eq!(sidecar["schema_version"], 1);
    assert_eq!(sidecar["seed"], 7);
    assert_eq!(sidecar["config"]["run-ap"]["safety"], 0.9);
}

#[test]
fn zero_epsilon_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), AP_CONFIG);
    let o = balancelab(dir.path(), &["run-ap", "--config", &cfg, "--epsilon", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("epsilon"));
}

#[test]
fn small_fixed_wave_speed_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), AP_CONFIG);
    let o = balancelab(dir.path(), &["run-ap", "--config", &cfg, "--b-fixed", "0.01"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[run-ap]\ncells = 32\nepsilonn = 0.1\n");
    let o = balancelab(dir.path(), &["run-ap", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("epsilonn"));
}

#[test]
fn parameter_of_another_model_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = balancelab(
        dir.path(),
        &["run-hll", "--model", "m1", "--gamma", "2", "--cells", "16", "--t-final", "0.1"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("gamma"));
}

#[test]
fn same_seed_gives_identical_tables() {
    let args = [
        "run-ap", "--model", "shallow-water-friction", "--cells", "24", "--epsilon", "0.1", "--t-final", "0.02",
        "--initial", "random", "--seed", "11",
    ];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(balancelab(a.path(), &args).status.success());
    assert!(balancelab(b.path(), &args).status.success());
    for f in ["run-ap.csv", "run-ap-state.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn spacetime_run_with_contraction() {
    let dir = tempfile::tempdir().unwrap();
    let o = balancelab(
        dir.path(),
        &[
            "run-spacetime", "--preset", "variable-coefficient", "--elements", "24", "--slabs", "24", "--t-final",
            "0.5", "--jitter", "0.3", "--contraction", "true", "--slice-stride", "4",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let diag = std::fs::read_to_string(dir.path().join("run-spacetime-diagnostics.csv")).unwrap();
    let contraction: Vec<f64> =
        diag.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(contraction.len(), 25);
    for w in contraction.windows(2) {
        assert!(w[1] <= w[0] + 1e-12);
    }
    let slices = std::fs::read_to_string(dir.path().join("run-spacetime.csv")).unwrap();
    assert_eq!(slices.lines().count(), 1 + 7 * 24);
}

#[test]
fn heat_convergence_order_is_about_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = balancelab(dir.path(), &["convergence", "--study", "heat", "--cells", "16,32,64"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    for line in csv.lines().skip(2) {
        let order: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((0.8..=2.2).contains(&order), "{order}");
    }
}

#[test]
fn convergence_needs_three_resolutions() {
    let dir = tempfile::tempdir().unwrap();
    let o = balancelab(dir.path(), &["convergence", "--cells", "16,32"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn mismatched_reference_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = balancelab(
        dir.path(),
        &["convergence", "--study", "ap", "--model", "m1", "--cells", "16,30,64", "--reference-cells", "256"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("mismatched domains"));
}

#[test]
fn models_check_passes_for_all_models() {
    let dir = tempfile::tempdir().unwrap();
    let o = balancelab(dir.path(), &["models-check", "--samples", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("models-check.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.contains(",true,true,") || l.contains(",false,true,")));
}

#[test]
fn ap_errors_decrease_with_grid_spacing() {
    let dir = tempfile::tempdir().unwrap();
    let o = balancelab(
        dir.path(),
        &[
            "convergence", "--study", "ap", "--model", "euler-friction", "--cells", "16,32,64", "--reference-cells",
            "512", "--t-final", "0.02", "--epsilon", "1e-4",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    let errors: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
}

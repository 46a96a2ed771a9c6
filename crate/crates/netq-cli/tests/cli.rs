//! End-to-end tests of the `netq` binary: exit codes, stdout shapes,
//! written artifacts, and seed reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn netq() -> Command {
    Command::new(env!("CARGO_BIN_EXE_netq"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn simulate_writes_trajectory_report_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let decoy = dir.path().join("decoy");
    let out = dir.path().join("out");
    let config = write_config(
        dir.path(),
        "sim.json",
        &format!(
            r#"{{
                "game": {{"family": "sato"}},
                "network": {{"model": "complete", "n": 3}},
                "dynamics": {{"temperature": 3.0, "steps": 500, "tail": 100}},
                "output": {{"dir": {:?}, "prefix": "demo"}}
            }}"#,
            decoy.to_string_lossy()
        ),
    );
    let output = netq()
        .args(["simulate", "--config", &config, "--seed", "11"])
        .arg("--out")
        .arg(&out)
        .arg("--render")
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    // --out wins over output.dir from the config.
    assert!(!decoy.exists());

    let csv = std::fs::read_to_string(out.join("demo_trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 500 * 9);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("demo_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["converged"], serde_json::Value::Bool(true));
    let svg = std::fs::read_to_string(out.join("demo_trajectory.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("demo_manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["base_seed"], 11);
    // The manifest echoes the config with the *resolved* output dir.
    assert_eq!(
        manifest["config"]["output"]["dir"],
        serde_json::Value::String(out.to_string_lossy().into_owned())
    );
    let outputs = manifest["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 4); // csv, json, svg, manifest itself
    assert!(outputs
        .iter()
        .any(|v| v.as_str().unwrap().ends_with("demo_trajectory.csv")));
}

#[test]
fn simulate_minimal_config_uses_documented_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "min.json",
        r#"{
            "game": {"family": "sato"},
            "network": {"model": "complete", "n": 3}
        }"#,
    );
    let out = dir.path().join("out");
    let output = netq()
        .args(["simulate", "--config", &config])
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    // Default run length 4000 on a triangle of three-action agents.
    let csv = std::fs::read_to_string(out.join("run_trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4000 * 3 * 3);
    assert!(stdout(&output).contains("T: 1"));
}

#[test]
fn missing_config_file_exits_two() {
    let output = netq()
        .args(["simulate", "--config", "/definitely/not/here.json"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "stderr: {}", stderr(&output));
}

#[test]
fn invalid_temperature_exits_two_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "bad.json",
        r#"{
            "game": {"family": "sato"},
            "network": {"model": "complete", "n": 3},
            "dynamics": {"temperature": -1.0}
        }"#,
    );
    let output = netq()
        .args(["simulate", "--config", &config])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(
        stderr(&output).contains("temperature"),
        "stderr: {}",
        stderr(&output)
    );
}

#[test]
fn diverging_payoffs_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    // Two neighbors each feed in rewards near f64::MAX; their sum
    // overflows on the first update.
    let config = write_config(
        dir.path(),
        "huge.json",
        r#"{
            "game": {
                "family": "custom",
                "a": [[1e308, 1e308], [1e308, 1e308]],
                "b": [[1e308, 1e308], [1e308, 1e308]]
            },
            "network": {"model": "complete", "n": 3}
        }"#,
    );
    let output = netq()
        .args(["simulate", "--config", &config])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3), "stderr: {}", stderr(&output));
}

#[test]
fn bounds_table_matches_the_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let er = write_config(
        dir.path(),
        "er.json",
        r#"{"network": {"model": "er", "n": 10, "p": 0.1}}"#,
    );
    let output = netq().args(["bounds", "--config", &er]).output().unwrap();
    assert!(output.status.success());
    let text = stdout(&output);
    let row = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[0], "er");
    assert_eq!(fields[2], "0.9"); // (n - 1) p leading term
    assert!(fields[3].starts_with("8.009"), "rho bound was {}", fields[3]);
    // Coupling scale 0.2 for the default three-action cyclic family.
    let rho: f64 = fields[3].parse().unwrap();
    let sato: f64 = fields[5].parse().unwrap();
    assert!((sato - 0.2 * rho).abs() < 1e-12);

    // With the bare-threshold flag both family columns collapse to rho.
    let literal = netq()
        .args(["bounds", "--config", &er, "--literal-theorem-threshold"])
        .output()
        .unwrap();
    let text = stdout(&literal);
    let fields: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(fields[3], fields[4]);
    assert_eq!(fields[3], fields[5]);
}

#[test]
fn single_community_block_model_collapses_to_er_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let er = write_config(
        dir.path(),
        "er.json",
        r#"{"network": {"model": "er", "n": 10, "p": 0.1}}"#,
    );
    let sb = write_config(
        dir.path(),
        "sb.json",
        r#"{"network": {"model": "sb", "community_sizes": [10], "p_within": [0.1], "q_between": 0.0}}"#,
    );
    let er_out = netq().args(["bounds", "--config", &er]).output().unwrap();
    let sb_out = netq().args(["bounds", "--config", &sb]).output().unwrap();
    let er_row: Vec<String> = stdout(&er_out)
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(str::to_owned)
        .collect();
    let sb_row: Vec<String> = stdout(&sb_out)
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(str::to_owned)
        .collect();
    // Same digits in every numeric column, only the model label differs.
    assert_eq!(er_row[0], "er");
    assert_eq!(sb_row[0], "sb");
    assert_eq!(er_row[1..], sb_row[1..]);
}

#[test]
fn qre_single_start_reports_na_and_isolated_agents_mix_uniformly() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "qre.json",
        r#"{
            "game": {"family": "sato"},
            "network": {"model": "empty", "n": 3},
            "dynamics": {"temperature": 1.0}
        }"#,
    );
    let output = netq()
        .args(["qre", "--config", &config, "--starts", "1"])
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("max pairwise disagreement: n/a"), "{text}");
    // No neighbors means zero rewards, so the equilibrium is uniform.
    for line in text.lines().filter(|l| l.starts_with("agent ")) {
        let values = line.split_once(": ").unwrap().1;
        for value in values.split_whitespace() {
            let v: f64 = value.parse().unwrap();
            assert!((v - 1.0 / 3.0).abs() < 1e-8, "coordinate {v}");
        }
    }
}

#[test]
fn qre_starts_agree_when_the_equilibrium_is_unique() {
    let dir = tempfile::tempdir().unwrap();
    // Zero-sum pair (b = -a^T) on a triangle: above-threshold
    // temperature gives a unique fixed point, so every start must land
    // on the same strategy.
    let config = write_config(
        dir.path(),
        "zs.json",
        r#"{
            "game": {
                "family": "custom",
                "a": [[0.05, -0.08, 0.03], [0.1, 0.02, -0.12], [-0.07, 0.06, 0.01]],
                "b": [[-0.05, -0.1, 0.07], [0.08, -0.02, -0.06], [-0.03, 0.12, -0.01]]
            },
            "network": {"model": "complete", "n": 3},
            "dynamics": {"temperature": 0.5}
        }"#,
    );
    let output = netq()
        .args(["qre", "--config", &config, "--starts", "10", "--seed", "17"])
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let text = stdout(&output);
    let line = text
        .lines()
        .find(|l| l.starts_with("max pairwise disagreement:"))
        .unwrap();
    let worst: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(worst < 1e-5, "starts disagreed by {worst}");
    assert!(text.contains("converged: true"), "{text}");
}

#[test]
fn sweep_heatmap_covers_the_grid_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "heat.json",
        r#"{
            "game": {"family": "sato"},
            "experiment": {
                "kind": "heatmap",
                "t_grid": [0.1, 2.0],
                "p_grid": [0.2, 0.8],
                "n_values": [8],
                "runs_per_cell": 3
            }
        }"#,
    );
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let output = netq()
            .args(["sweep", "--config", &config, "--seed", "3"])
            .arg("--out")
            .arg(out)
            .output()
            .unwrap();
        assert!(output.status.success(), "stderr: {}", stderr(&output));
    }
    let a = std::fs::read_to_string(out_a.join("run_heatmap.csv")).unwrap();
    let b = std::fs::read_to_string(out_b.join("run_heatmap.csv")).unwrap();
    assert_eq!(a, b);
    // One row per (N, p, T) cell plus the header.
    assert_eq!(a.lines().count(), 1 + 2 * 2);
    for line in a.lines().skip(1) {
        assert!(line.starts_with("8,"), "unexpected row {line}");
    }
}

#[test]
fn sweep_boundary_writes_theory_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "bound.json",
        r#"{
            "game": {"family": "sato"},
            "experiment": {
                "kind": "boundary",
                "t_grid": [0.25, 0.5, 1.0, 2.0, 4.0],
                "p_grid": [0.3],
                "n_values": [10],
                "runs_per_cell": 5
            }
        }"#,
    );
    let out = dir.path().join("out");
    let output = netq()
        .args(["sweep", "--config", &config, "--seed", "9"])
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let boundary = std::fs::read_to_string(out.join("run_boundary.csv")).unwrap();
    assert!(boundary.starts_with("N,p,q,min_T"));
    let theory = std::fs::read_to_string(out.join("run_theory.csv")).unwrap();
    assert!(theory.starts_with("N,p,q,empirical_min_T,threshold,literal_threshold,ratio"));
    assert_eq!(theory.lines().count(), 2);
}

#[test]
fn conflict_boundary_skips_theory_but_still_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "conf.json",
        r#"{
            "game": {"family": "conflict", "actions": 2},
            "experiment": {
                "kind": "boundary",
                "t_grid": [0.25, 1.0],
                "p_grid": [0.3],
                "n_values": [6],
                "runs_per_cell": 2
            }
        }"#,
    );
    let out = dir.path().join("out");
    let output = netq()
        .args(["sweep", "--config", &config])
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    assert!(out.join("run_boundary.csv").exists());
    assert!(!out.join("run_theory.csv").exists());
}

#[test]
fn sweep_histogram_emits_one_row_per_agent_draw() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "hist.json",
        r#"{
            "game": {"family": "sato"},
            "experiment": {
                "kind": "histogram",
                "p_communities": [0.1, 0.3],
                "community_size": 5,
                "simulations": 4
            }
        }"#,
    );
    let out = dir.path().join("out");
    let output = netq()
        .args(["sweep", "--config", &config, "--seed", "2"])
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let csv = std::fs::read_to_string(out.join("run_histogram.csv")).unwrap();
    // 4 simulations x (2 communities x 5 agents each).
    assert_eq!(csv.lines().count(), 1 + 4 * 10);
}

#[test]
fn out_dir_env_var_is_honored_when_no_flag_or_config_sets_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "er.json",
        r#"{"network": {"model": "er", "n": 10, "p": 0.1}}"#,
    );
    let out = dir.path().join("from_env");
    let output = netq()
        .args(["bounds", "--config", &config])
        .env("NETQ_OUT_DIR", &out)
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    assert!(out.join("run_bounds.csv").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("run_manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "bounds");
    assert_eq!(manifest["epsilon"], 0.05);
}

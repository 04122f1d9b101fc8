//! End-to-end pipeline run on a small synthetic dataset, exercising every
//! subcommand, the exit-code contract, and report determinism.

use std::fs;
use std::path::Path;
use std::process::Command;

fn loadseg(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_loadseg"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_success(out: &std::process::Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

const CONFIG: &str = r#"
seed = 42
bootstrap_iterations = 200

[paths]
data_dir = "data"
output_dir = "out"

[preprocess]
r = 5
q_lower = 10.0
q_upper = 90.0

[grid]
spc_quantiles = [[15.0, 85.0]]
spc_strategies = ["Symmetrical"]
if_n_estimators = [50]
if_pooled_quantiles = [[15.0, 85.0]]
bs_beta = [0.008]
bs_min_size = [200]
bs_jump = [10]
bs_quantiles = [[10.0, 90.0]]
bs_reference = ["Mean"]
bs_strategies = ["Asymmetrical"]
ensembles = ["sequential"]

[generate]
count = 9
base_seed = 900

[generate.spec]
n_points = 4000
annual_amplitude = 0.0
daily_amplitude = 0.0
noise_sigma = 15.0
bottom_up_noise_sigma = 0.5
n_spikes = 4
spike_amplitude = 25.0
n_short_events = 1
short_event_amplitude = 5.0
n_long_events = 1
n_very_long_events = 0
switch_amplitude = 1.5
"#;

#[test]
fn full_pipeline_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    fs::write(root.join("loadseg.toml"), CONFIG).unwrap();

    assert_success(&loadseg(root, &["generate"]), "generate");
    assert!(root.join("data/st0000.csv").exists());
    assert!(root.join("data/st0008.csv").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(root.join("out/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["stations"].as_array().unwrap().len(), 9);
    assert!(root.join("out/resolved-config.toml").exists());

    let split_out = loadseg(root, &["split"]);
    assert_success(&split_out, "split");
    let split_csv = fs::read_to_string(root.join("out/split.csv")).unwrap();
    assert_eq!(split_csv.lines().count(), 10); // header + 9 stations
    for split in ["train", "validation", "test"] {
        assert_eq!(
            split_csv.lines().filter(|l| l.ends_with(split)).count(),
            3,
            "{split} should hold 3 of 9 stations"
        );
    }

    assert_success(&loadseg(root, &["preprocess"]), "preprocess");
    let delta = fs::read_to_string(root.join("out/delta/st0000.csv")).unwrap();
    assert!(delta.starts_with("timestamp,delta,s_signed,label\n"));
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(root.join("out/delta/st0000.json")).unwrap())
            .unwrap();
    for key in ["m", "c", "sign_corrected", "removed_count"] {
        assert!(sidecar.get(key).is_some(), "sidecar missing {key}");
    }

    assert_success(&loadseg(root, &["optimize"]), "optimize");
    let model: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(root.join("out/model.json")).unwrap()).unwrap();
    let methods = model["methods"].as_object().unwrap();
    for family in ["spc", "if_per_station", "if_pooled", "bs", "ensemble_sequential"] {
        assert!(methods.contains_key(family), "model missing {family}");
    }
    let selection: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(root.join("out/selection.json")).unwrap())
            .unwrap();
    assert!(selection["spc"]["validation_average_f"].as_f64().unwrap() >= 0.0);

    assert_success(&loadseg(root, &["evaluate"]), "evaluate");
    let report_bytes = fs::read(root.join("out/report.json")).unwrap();
    let report: serde_json::Value = serde_json::from_slice(&report_bytes).unwrap();
    assert!(report["methods"]["ensemble_sequential"]["average_f"].is_number());
    let plot = fs::read_to_string(root.join("out/plot_data.csv")).unwrap();
    assert!(plot.starts_with("method,category,metric,mean,std\n"));
    assert!(plot.lines().count() > 1);

    // Same config, same seed: byte-identical report.
    assert_success(&loadseg(root, &["evaluate"]), "evaluate (rerun)");
    assert_eq!(fs::read(root.join("out/report.json")).unwrap(), report_bytes);

    assert_success(&loadseg(root, &["annotate"]), "annotate");
    let annotated = fs::read_to_string(root.join("out/annotated/st0003.csv")).unwrap();
    assert!(annotated.starts_with("timestamp,delta,prediction\n"));
    assert!(annotated.lines().nth(1).unwrap().ends_with(",0")
        || annotated.lines().nth(1).unwrap().ends_with(",1"));

    assert_success(&loadseg(root, &["estimate-loads"]), "estimate-loads");
    let estimates = fs::read_to_string(root.join("out/estimates.csv")).unwrap();
    assert!(estimates.starts_with("station_id,source,max_load,min_load\n"));
    // 9 stations x 3 sources.
    assert_eq!(estimates.lines().count(), 28);

    // Unknown method name is a configuration error.
    let bad_method = loadseg(root, &["annotate", "--method", "nope"]);
    assert_eq!(bad_method.status.code(), Some(2));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    // Missing config file.
    assert_eq!(loadseg(root, &["split"]).status.code(), Some(2));
    // Unknown key.
    fs::write(root.join("loadseg.toml"), "sede = 7").unwrap();
    assert_eq!(loadseg(root, &["split"]).status.code(), Some(2));
    // Empty grid list.
    fs::write(root.join("loadseg.toml"), "[grid]\nbs_beta = []").unwrap();
    assert_eq!(loadseg(root, &["optimize"]).status.code(), Some(2));
}

#[test]
fn data_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    fs::write(root.join("loadseg.toml"), "[paths]\ndata_dir = \"data\"").unwrap();
    // No station CSVs.
    assert_eq!(loadseg(root, &["split"]).status.code(), Some(3));
    // Stations exist but the split file does not.
    fs::write(root.join("loadseg.toml"), CONFIG).unwrap();
    assert_success(&loadseg(root, &["generate"]), "generate");
    assert_eq!(loadseg(root, &["optimize"]).status.code(), Some(3));
}

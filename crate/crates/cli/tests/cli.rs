use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pcdenoise(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcdenoise"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = pcdenoise(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn frames(dir: &Path, names: &[&str]) -> Vec<PathBuf> {
    names.iter().map(|n| dir.join(n)).collect()
}

/// synth -> noise for a small three-frame sequence; returns (clean, noisy) paths.
fn noisy_sequence(root: &Path) -> (Vec<PathBuf>, Vec<PathBuf>) {
    let clean_dir = root.join("clean");
    let noisy_dir = root.join("noisy");
    ok(&["synth", "--points", "1000", "--frames", "3", "--seed", "3", "--out", s(&clean_dir)]);
    let clean = frames(&clean_dir, &["frame_000.ply", "frame_001.ply", "frame_002.ply"]);
    let mut args = vec!["noise", "--relative-sigma", "0.02", "--seed", "9", "--out", s(&noisy_dir)];
    args.extend(clean.iter().map(|p| s(p)));
    ok(&args);
    (clean, frames(&noisy_dir, &["frame_000.ply", "frame_001.ply", "frame_002.ply"]))
}

fn denoise_args<'a>(out: &'a Path, inputs: &'a [PathBuf], extra: &[&'a str]) -> Vec<&'a str> {
    let mut args = vec!["denoise", "--out", s(out)];
    args.extend_from_slice(extra);
    args.extend(inputs.iter().map(|p| s(p)));
    args
}

fn parse_csv(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn full_pipeline_lowers_error() {
    let dir = tempfile::tempdir().unwrap();
    let (clean, noisy) = noisy_sequence(dir.path());
    let out = dir.path().join("den");
    ok(&denoise_args(&out, &noisy, &["--set", "k_s=1", "--set", "lambda1=0.1", "--set", "lambda2=2"]));
    let denoised = frames(&out, &["frame_000.ply", "frame_001.ply", "frame_002.ply"]);
    assert!(out.join("manifest.json").exists());

    let eval = |test: &[PathBuf]| {
        let mut args = vec!["eval", "--clean"];
        args.extend(clean.iter().map(|p| s(p)));
        args.push("--test");
        args.extend(test.iter().map(|p| s(p)));
        let out = ok(&args);
        parse_csv(&String::from_utf8(out.stdout).unwrap())
            .iter()
            .map(|row| row[1].parse::<f64>().unwrap())
            .collect::<Vec<_>>()
    };
    let before = eval(&noisy);
    let after = eval(&denoised);
    assert_eq!(before.len(), 3);
    for (b, a) in before.iter().zip(&after) {
        assert!(a < b, "denoised {a} not below noisy {b}");
    }

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "denoise");
    assert_eq!(manifest["frames"].as_array().unwrap().len(), 3);
    assert_eq!(manifest["frames"][0]["temporal_active"], false);
    assert_eq!(manifest["frames"][1]["temporal_active"], true);
    assert_eq!(manifest["config"]["k_s"], 1);
}

#[test]
fn zero_weights_return_the_input_files() {
    let dir = tempfile::tempdir().unwrap();
    let (_, noisy) = noisy_sequence(dir.path());
    let out = dir.path().join("same");
    ok(&denoise_args(&out, &noisy, &["--set", "lambda1=0", "--set", "lambda2=0"]));
    for p in &noisy {
        let copy = out.join(p.file_name().unwrap());
        assert_eq!(fs::read(p).unwrap(), fs::read(copy).unwrap());
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let (_, noisy) = noisy_sequence(dir.path());
    let (one, four) = (dir.path().join("t1"), dir.path().join("t4"));
    ok(&denoise_args(&one, &noisy, &["--threads", "1"]));
    ok(&denoise_args(&four, &noisy, &["--threads", "4"]));
    for name in ["frame_000.ply", "frame_001.ply", "frame_002.ply"] {
        assert_eq!(fs::read(one.join(name)).unwrap(), fs::read(four.join(name)).unwrap());
    }
}

#[test]
fn identical_sequences_have_infinite_gpsnr() {
    let dir = tempfile::tempdir().unwrap();
    let (clean, _) = noisy_sequence(dir.path());
    let csv = dir.path().join("metrics.csv");
    ok(&["eval", "--clean", s(&clean[0]), "--test", s(&clean[0]), "--csv", s(&csv)]);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("frame,mse_nn,mse_index,gpsnr_db\n"));
    let row = &parse_csv(&text)[0];
    assert_eq!(row[1].parse::<f64>().unwrap(), 0.0);
    assert_eq!(row[3], "inf");
}

#[test]
fn match_dumps_one_row_per_patch() {
    let dir = tempfile::tempdir().unwrap();
    let (_, noisy) = noisy_sequence(dir.path());
    let out = ok(&["match", s(&noisy[0]), s(&noisy[1])]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("target_patch,target_center,matched_patch,matched_center,distance,initial_weight"));
    // M = 0.5 N patches by default
    assert_eq!(parse_csv(&text).len(), 500);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.ply");
    let out = dir.path().join("o");
    assert_eq!(pcdenoise(&["--help"]).status.code(), Some(0));
    assert_eq!(pcdenoise(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(pcdenoise(&["denoise", "--out", s(&out)]).status.code(), Some(1));
    assert_eq!(
        pcdenoise(&["denoise", "--set", "no_such_key=1", "--out", s(&out), s(&missing)]).status.code(),
        Some(1)
    );
    assert_eq!(pcdenoise(&["denoise", "--set", "k=0", "--out", s(&out), s(&missing)]).status.code(), Some(1));
    assert_eq!(pcdenoise(&["denoise", "--out", s(&out), s(&missing)]).status.code(), Some(2));

    let bad = dir.path().join("bad.xyz");
    fs::write(&bad, "0 0 0\n1 2\n").unwrap();
    assert_eq!(pcdenoise(&["denoise", "--out", s(&out), s(&bad)]).status.code(), Some(2));
}

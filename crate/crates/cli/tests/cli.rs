use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("neumann-lab-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neumann-lab")).args(args).env_remove("NEUMANN_LAB_OUT").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn only_run_dir(out: &Path) -> PathBuf {
    std::fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.file_name().unwrap() != "cache")
        .unwrap()
}

#[test]
fn beam_sharpness_exit_codes() {
    let dir = scratch("beam");
    let out = dir.join("out");
    let good = write_config(&dir, "good.toml", "kind = \"sharpness\"\n[sharpness]\nmodel = \"beam\"\n");
    let o = lab(&["sharpness", "--config", &good, "--out", out.to_str().unwrap(), "--workers", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("PASS") && stdout.contains("slope"), "{stdout}");

    let run = only_run_dir(&out);
    assert_eq!(code(&lab(&["report", run.to_str().unwrap()])), 0);
    let svg = dir.join("replot.svg");
    let o = lab(&["plot", run.join("sharpness.json").to_str().unwrap(), "--out", svg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("slope 0.5"));

    let narrow = write_config(&dir, "strict.toml", "kind = \"sharpness\"\n[sharpness]\nmodel = \"beam\"\ntube = 0.01\n");
    let o = lab(&["sharpness", "--config", &narrow, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8(o.stdout).unwrap().contains("FAIL"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn errors_exit_one() {
    let dir = scratch("errors");
    let bad = write_config(&dir, "bad.toml", "kind = \"eigens\"\n[domain]\nbuiltin = \"unit_square\"\n[mesh]\nh = \"x\"\n");
    let o = lab(&["solve", "--config", &bad]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 5") && err.contains("mesh.h"), "{err}");
    assert_eq!(code(&lab(&["solve", "--config", dir.join("missing.toml").to_str().unwrap()])), 1);
    assert_eq!(code(&lab(&["frobnicate"])), 1);
    assert_eq!(code(&lab(&["solve"])), 1);
    let ok = write_config(&dir, "ok.toml", "kind = \"eigens\"\n[domain]\nbuiltin = \"unit_square\"\n[eigen]\nwindow = [3.0, 5.0]\n");
    assert_eq!(code(&lab(&["solve", "--config", &ok, "--order", "3"])), 1);
    let empty = write_config(&dir, "empty.json", "[]");
    assert_eq!(code(&lab(&["plot", &empty])), 1);
    assert_eq!(code(&lab(&["--help"])), 0);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn mesh_and_solve_use_the_cache() {
    let dir = scratch("solve");
    let out = dir.join("out");
    let cfg = write_config(
        &dir,
        "square.toml",
        "kind = \"eigens\"\n[domain]\nbuiltin = \"unit_square\"\n[mesh]\nh = 0.1\n[eigen]\nwindow = [3.0, 7.0]\n",
    );
    let outs = out.to_str().unwrap();
    let o = lab(&["mesh", "--config", &cfg, "--out", outs]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().contains("hash "));
    let o = lab(&["solve", "--config", &cfg, "--out", outs, "--order", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("(cached)") && stdout.contains("eigen.csv"), "{stdout}");
    let o = lab(&["solve", "--config", &cfg, "--out", outs, "--order", "2", "--no-cache"]);
    assert!(!String::from_utf8(o.stdout).unwrap().contains("(cached)"));
    let _ = std::fs::remove_dir_all(&dir);
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dnagan_core::data::pgm::read_pgm;
use tempfile::TempDir;

fn dnagan(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dnagan"))
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = dnagan(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn small_config(dir: &Path) -> PathBuf {
    let path = dir.join("small.cfg");
    fs::write(&path, "census = 16,16,16,16\nseed = 5\n").unwrap();
    path
}

/// First image in the attribute list carrying `label` (e.g. "1 -1").
fn image_with(data: &Path, label: &str) -> PathBuf {
    let list = fs::read_to_string(data.join("list_attr.txt")).unwrap();
    let name = list
        .lines()
        .skip(2)
        .find(|l| l.split_once(' ').unwrap().1 == label)
        .unwrap()
        .split(' ')
        .next()
        .unwrap()
        .to_string();
    data.join(name)
}

/// Generates the small dataset and a short training run; returns (data dir, checkpoint).
fn trained(dir: &Path) -> (PathBuf, PathBuf) {
    let cfg = small_config(dir);
    let cfg = cfg.to_str().unwrap();
    ok(dir, &["--config", cfg, "generate", "--out", "data"]);
    ok(dir, &["--config", cfg, "train", "--steps", "20", "--out", "run"]);
    (dir.join("data"), dir.join("run/final.ckpt"))
}

fn tiles(path: &Path, rows: usize, cols: usize, side: usize) -> Vec<Vec<f32>> {
    let g = read_pgm(path).unwrap();
    assert_eq!((g.height, g.width), (rows * side + rows - 1, cols * side + cols - 1));
    let mut out = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let (y0, x0) = (r * (side + 1), c * (side + 1));
            out.push(
                (0..side)
                    .flat_map(|y| g.pixels[(y0 + y) * g.width + x0..(y0 + y) * g.width + x0 + side].to_vec())
                    .collect(),
            );
        }
    }
    out
}

#[test]
fn generate_writes_counted_dataset_deterministically() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path());
    let cfg = cfg.to_str().unwrap();
    ok(tmp.path(), &["--config", cfg, "generate", "--out", "d1"]);
    ok(tmp.path(), &["--config", cfg, "generate", "--out", "d2"]);
    let d1 = tmp.path().join("d1");
    let images = fs::read_dir(&d1)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().unwrap() == "pgm")
        .count();
    assert_eq!(images, 64);
    let list = fs::read_to_string(d1.join("list_attr.txt")).unwrap();
    assert_eq!(list.lines().next(), Some("64"));
    for entry in fs::read_dir(&d1).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            fs::read(d1.join(&name)).unwrap(),
            fs::read(tmp.path().join("d2").join(&name)).unwrap()
        );
    }
}

#[test]
fn unknown_config_key_exits_two() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("bad.cfg"), "steps = 3\nlearning_speed = 9\n").unwrap();
    let out = dnagan(tmp.path(), &["--config", "bad.cfg", "generate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("learning_speed"));
}

#[test]
fn usage_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(dnagan(tmp.path(), &["simulate"]).status.code(), Some(2));
    assert_eq!(dnagan(tmp.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn missing_checkpoint_is_runtime_error() {
    let tmp = TempDir::new().unwrap();
    let out = dnagan(
        tmp.path(),
        &["swap", "--checkpoint", "nope.ckpt", "--a", "a.pgm", "--b", "b.pgm", "--attribute", "1"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.ckpt"));
}

#[test]
fn analyze_unbalanced_census() {
    let tmp = TempDir::new().unwrap();
    let stdout = ok(tmp.path(), &["analyze", "--census", "1,1,100,100", "--out", "t.csv"]);
    assert!(stdout.contains("rho 100.0000"));
    assert!(stdout.contains("rho 1.0000"));
    assert!(stdout.contains("criterion value 2.0000"));
    assert!(stdout.contains("satisfies"));
    let csv = fs::read_to_string(tmp.path().join("t.csv")).unwrap();
    assert!(csv.starts_with("quantity,attribute,value\n"));
    assert!(csv.contains("rho,1,100\n"));
    assert!(csv.contains("holds,,true\n"));
}

#[test]
fn analyze_uniform_census_reports_expectations() {
    let tmp = TempDir::new().unwrap();
    let stdout = ok(tmp.path(), &["analyze", "--census", "1,1,1,1"]);
    assert!(stdout.contains("49.6514"), "{stdout}");
    assert!(stdout.contains("43.4857"), "{stdout}");
    let single = ok(tmp.path(), &["analyze", "--census", "1,1"]);
    assert!(single.contains("6.0000"), "{single}");
}

#[test]
fn analyze_reports_degenerate_attribute_without_failing() {
    let tmp = TempDir::new().unwrap();
    let stdout = ok(tmp.path(), &["analyze", "--census", "3,0,4,0"]);
    assert!(stdout.contains("2 (attr2): with 0, without 7, degenerate"), "{stdout}");
}

#[test]
fn analyze_reads_attribute_list() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("attrs.txt"),
        "3\nSmiling Male Young\na.jpg 1 -1 1\nb.jpg -1 -1 1\nc.jpg 1 1 -1\n",
    )
    .unwrap();
    let stdout = ok(
        tmp.path(),
        &["analyze", "--attr-file", "attrs.txt", "--select", "Male,Smiling"],
    );
    assert!(stdout.contains("1 (Male): with 1, without 2"), "{stdout}");
    assert!(stdout.contains("2 (Smiling): with 2, without 1"), "{stdout}");
}

#[test]
fn simulate_matches_closed_form_and_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let args = ["--seed", "3", "simulate", "--census", "1,1", "--strategy", "random", "--runs", "100000"];
    let first = ok(tmp.path(), &args);
    let mean: f64 = first.split_whitespace().skip_while(|w| *w != "mean").nth(1).unwrap().parse().unwrap();
    assert!((mean - 6.0).abs() < 0.12, "{first}");
    assert_eq!(first, ok(tmp.path(), &args));
}

#[test]
fn simulate_iterative_beats_random_on_unbalanced_census() {
    let tmp = TempDir::new().unwrap();
    ok(
        tmp.path(),
        &["simulate", "--census", "1,1,10,10", "--runs", "2000", "--out", "sim.csv"],
    );
    let csv = fs::read_to_string(tmp.path().join("sim.csv")).unwrap();
    let mean = |name: &str| -> f64 {
        csv.lines()
            .find(|l| l.starts_with(name))
            .unwrap()
            .split(',')
            .nth(2)
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(mean("iterative") < mean("random"), "{csv}");
}

#[test]
fn swap_and_interpolate_on_trained_checkpoint() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let (data, ckpt) = trained(dir);
    let ckpt = ckpt.to_str().unwrap();
    let with = image_with(&data, "1 1");
    let without = image_with(&data, "-1 1");
    let (with, without) = (with.to_str().unwrap(), without.to_str().unwrap());

    // Oracle orientation puts the attribute carrier first whatever the argument order.
    let swap = |a: &str, b: &str, out: &str, extra: &[&str]| {
        let mut args = vec!["swap", "--checkpoint", ckpt, "--a", a, "--b", b, "--attribute", "1", "--out", out];
        args.extend_from_slice(extra);
        dnagan(dir, &args)
    };
    assert!(swap(without, with, "s1.pgm", &[]).status.success());
    assert!(swap(with, without, "s2.pgm", &[]).status.success());
    assert_eq!(fs::read(dir.join("s1.pgm")).unwrap(), fs::read(dir.join("s2.pgm")).unwrap());
    let strip = tiles(&dir.join("s1.pgm"), 1, 6, 16);

    let same = swap(with, with, "s3.pgm", &[]);
    assert_eq!(same.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&same.stderr).contains("--force"));
    assert!(swap(with, with, "s3.pgm", &["--force"]).status.success());

    let interp = |attrs: &str, out: &str| {
        ok(
            dir,
            &[
                "interpolate", "--checkpoint", ckpt, "--a", with, "--b", without, "--attrs", attrs, "--grid", "4",
                "--out", out,
            ],
        )
    };
    interp("1", "i1.pgm");
    let row = tiles(&dir.join("i1.pgm"), 1, 4, 16);
    assert_eq!(row[0], strip[4], "alpha 0 is the reconstruction A1");
    assert_eq!(row[3], strip[2], "alpha 1 is the swap child A2");

    interp("1,2", "i2.pgm");
    let grid = tiles(&dir.join("i2.pgm"), 4, 4, 16);
    assert_eq!(grid[0], strip[4]);
    assert_eq!(grid[12], row[3], "rows sweep the first attribute");

    let bad = dnagan(
        dir,
        &["interpolate", "--checkpoint", ckpt, "--a", with, "--b", without, "--attrs", "3", "--out", "x.pgm"],
    );
    assert_eq!(bad.status.code(), Some(1));
}

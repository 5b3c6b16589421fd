// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const K4: &str =
    "K 3\nSPACING 120\nALPHA 0.1\nRECT 0 0 0 40 40\nRECT 1 80 0 120 40\nRECT 2 0 80 40 120\nRECT 3 80 80 120 120\n";

// bar split between two end neighbors
const BAR: &str = "K 2\nRECT 0 0 0 400 40\nRECT 1 0 150 150 190\nRECT 2 250 150 400 190\n";

fn mpld(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpld")).args(args).output().expect("run mpld")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

#[test]
fn decompose_writes_colored_stats_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "k4.lay", K4);
    let (out, stats, svg) = (dir.path().join("k4.col"), dir.path().join("k4.csv"), dir.path().join("k4.svg"));
    let o = mpld(&[
        "decompose",
        "--input",
        &input,
        "--k",
        "3",
        "--engine",
        "sequential",
        "--out",
        &s(&out),
        "--stats",
        &s(&stats),
        "--svg",
        &s(&svg),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let colored = fs::read_to_string(&out).unwrap();
    assert_eq!(colored, "COLOR 0 0\nCOLOR 1 0\nCOLOR 2 1\nCOLOR 3 2\nCONFLICT 0 1\n");
    let csv = fs::read_to_string(&stats).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "name,vertices,edges,time_s,stitches,conflicts");
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!((row[0], row[1], row[2], row[4], row[5]), ("k4", "4", "6", "0", "1"));
    let svg = fs::read_to_string(&svg).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.matches("<rect").count() >= 4);
}

#[test]
fn decompose_to_stdout_and_engines_agree() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bar.lay", BAR);
    let run = |engine: &str| {
        let o = mpld(&["decompose", "--input", &input, "--engine", engine, "--workers", "2"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap()
    };
    let seq = run("sequential");
    assert_eq!(seq, run("parallel"));
    assert_eq!(seq, run("oracle"));
    assert!(seq.contains("STITCH 0 200 "), "{seq}");
    assert!(!seq.contains("CONFLICT"));
}

#[test]
fn single_rect_gets_mask_zero() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "one.lay", "RECT 0 0 0 100 40\n");
    let stats = dir.path().join("one.csv");
    let o = mpld(&["decompose", "--input", &input, "--stats", &s(&stats)]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "COLOR 0 0\n");
    let csv = fs::read_to_string(&stats).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((row[4], row[5]), ("0", "0"));
}

#[test]
fn several_inputs_write_into_directories() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.lay", K4);
    let b = write(dir.path(), "b.lay", BAR);
    let out = dir.path().join("colored");
    let stats = dir.path().join("all.csv");
    let o = mpld(&["decompose", "--input", &a, &b, "--out", &s(&out), "--stats", &s(&stats)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("a.col").exists() && out.join("b.col").exists());
    assert_eq!(fs::read_to_string(&stats).unwrap().lines().count(), 3);
}

#[test]
fn verify_accepts_own_output_and_rejects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "k4.lay", K4);
    let out = dir.path().join("k4.col");
    assert!(mpld(&["decompose", "--input", &input, "--out", &s(&out)]).status.success());
    let ok = mpld(&["verify", "--input", &input, "--colored", &s(&out)]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));

    // rect 2 moved onto rect 3's mask while the CONFLICT lines stay as written
    let text = fs::read_to_string(&out).unwrap().replace("COLOR 2 1", "COLOR 2 2");
    let tampered = write(dir.path(), "tampered.col", &text);
    let bad = mpld(&["verify", "--input", &input, "--colored", &tampered]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("violation"));

    let missing = write(dir.path(), "missing.col", "COLOR 0 0\nCOLOR 1 1\nCOLOR 2 2\n");
    assert_eq!(mpld(&["verify", "--input", &input, "--colored", &missing]).status.code(), Some(1));
    let range = write(dir.path(), "range.col", "COLOR 0 0\nCOLOR 1 1\nCOLOR 2 2\nCOLOR 3 5\n");
    assert_eq!(mpld(&["verify", "--input", &input, "--colored", &range]).status.code(), Some(1));
}

#[test]
fn verify_rebuilds_stitches_from_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bar.lay", BAR);
    let out = dir.path().join("bar.col");
    assert!(mpld(&["decompose", "--input", &input, "--out", &s(&out)]).status.success());
    assert_eq!(mpld(&["verify", "--input", &input, "--colored", &s(&out)]).status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap().replace("STITCH 0 200", "STITCH 0 900");
    let moved = write(dir.path(), "moved.col", &text);
    assert_eq!(mpld(&["verify", "--input", &input, "--colored", &moved]).status.code(), Some(1));
}

#[test]
fn usage_and_parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write(dir.path(), "broken.lay", "RECT 0 0 0 10\n");
    let o = mpld(&["decompose", "--input", &broken]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
    assert_eq!(mpld(&["decompose"]).status.code(), Some(2));
    assert_eq!(mpld(&["decompose", "--input", &broken, "--engine", "gpu"]).status.code(), Some(2));
    assert_eq!(mpld(&["decompose", "--input", &broken, "--workers", "0"]).status.code(), Some(2));
    assert_eq!(mpld(&["decompose", "--input", &s(&dir.path().join("absent.lay"))]).status.code(), Some(2));
    let overlap = write(dir.path(), "overlap.lay", "RECT 0 0 0 50 50\nRECT 1 10 10 60 60\n");
    assert_eq!(mpld(&["decompose", "--input", &overlap]).status.code(), Some(2));
    assert_eq!(mpld(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(mpld(&["--help"]).status.code(), Some(0));
}

#[test]
fn bench_emits_results_and_timing_with_ratio_row() {
    let dir = tempfile::tempdir().unwrap();
    let (out, timing) = (dir.path().join("r.csv"), dir.path().join("t.csv"));
    let o = mpld(&[
        "bench",
        "--sizes",
        "100,1000",
        "--trials",
        "3",
        "--seed",
        "9",
        "--out",
        &s(&out),
        "--timing",
        &s(&timing),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let results = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = results.lines().collect();
    assert!(lines[0].starts_with("# generator=synth-v1 seed=9"));
    assert_eq!(
        lines[1],
        "name,rects,vertices,edges,components,largest_component,stitches,conflicts,cost,oracle_cost,nodes"
    );
    assert!(lines[2].starts_with("synth-100,") && lines[3].starts_with("synth-1000,"));
    assert_eq!(lines.len(), 4);

    let timing = fs::read_to_string(&timing).unwrap();
    let lines: Vec<&str> = timing.lines().collect();
    assert_eq!(lines[1], "name,sequential_s,parallel_s,oracle_s");
    let ratio: Vec<&str> = lines.last().unwrap().split(',').collect();
    assert_eq!((ratio[0], ratio[1]), ("ratio", "1.0000"));
    assert!(ratio[2].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn log_variable_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "k4.lay", K4);
    let o = Command::new(env!("CARGO_BIN_EXE_mpld"))
        .args(["decompose", "--input", &input])
        .env("MPLD_LOG", "info")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("cost 1"));
}

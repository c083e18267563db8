use std::path::Path;
use std::process::Command;

use flexsolve::io::{read_flo, read_pgm, write_pgm, PgmImage};

fn flexsolve(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_flexsolve")).args(args).output().unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

fn save(dir: &Path, name: &str, width: usize, height: usize, samples: Vec<f64>) -> String {
    let p = path(dir, name);
    write_pgm(&PgmImage::from_samples(width, height, 255, samples).unwrap(), &p).unwrap();
    p
}

#[test]
fn rof_with_tiny_weight_keeps_the_image() {
    let dir = tempfile::tempdir().unwrap();
    let samples: Vec<f64> = (0..64).map(|p| ((p * 37) % 256) as f64 / 255.0).collect();
    let input = save(dir.path(), "in.pgm", 8, 8, samples);
    let output = path(dir.path(), "out.pgm");
    let out = flexsolve(&["rof", &input, &output, "--alpha", "1e-8"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("converged=true"));
    assert_eq!(read_pgm(&output).unwrap().levels(), read_pgm(&input).unwrap().levels());
}

#[test]
fn rof_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let samples: Vec<f64> = (0..100).map(|p| ((p * 53) % 97) as f64 / 97.0).collect();
    let input = save(dir.path(), "in.pgm", 10, 10, samples);
    let (a, b) = (path(dir.path(), "a.pgm"), path(dir.path(), "b.pgm"));
    let first = flexsolve(&["rof", &input, &a, "--max-iters", "300", "--check-every", "50"]);
    let second = flexsolve(&["rof", &input, &b, "--max-iters", "300", "--check-every", "50"]);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn flow_writes_flo_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let frame: Vec<f64> = (0..48).map(|p| (p % 8) as f64 / 8.0).collect();
    let f1 = save(dir.path(), "f1.pgm", 8, 6, frame.clone());
    let f2 = save(dir.path(), "f2.pgm", 8, 6, frame);
    let flo = path(dir.path(), "out.flo");
    assert!(flexsolve(&["flow", &f1, &f2, &flo]).status.success());
    let flow = read_flo(&flo).unwrap();
    assert_eq!((flow.width, flow.height), (8, 6));
    assert!(flow.u.iter().chain(&flow.v).all(|&c| c == 0.0));

    let csv = path(dir.path(), "out.csv");
    assert!(flexsolve(&["flow", &f1, &f2, &csv, "--csv"]).status.success());
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 48);
    assert!(text.lines().all(|l| l == "0,0"));
}

#[test]
fn segment_writes_masks_and_label_map() {
    let dir = tempfile::tempdir().unwrap();
    let samples: Vec<f64> = (0..64).map(|p| if p % 8 < 4 { 0.2 } else { 0.8 }).collect();
    let input = save(dir.path(), "in.pgm", 8, 8, samples);
    let prefix = path(dir.path(), "seg");
    let out = flexsolve(&["segment", &input, &prefix, "-k", "2", "--labels", "0.2,0.8"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let map = read_pgm(format!("{prefix}_labels.pgm")).unwrap();
    assert_eq!(map.maxval, 1);
    let expected: Vec<u16> = (0..64).map(|p| u16::from(p % 8 >= 4)).collect();
    assert_eq!(map.levels(), expected);
    for i in 0..2 {
        assert!(Path::new(&format!("{prefix}_{i}.pgm")).exists());
    }

    // a single label covers everything
    let out = flexsolve(&["segment", &input, &path(dir.path(), "one"), "-k", "1", "--seed", "4"]);
    assert!(out.status.success());
    assert!(read_pgm(path(dir.path(), "one_labels.pgm")).unwrap().levels().iter().all(|&l| l == 0));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = path(dir.path(), "missing.pgm");
    let out = path(dir.path(), "out.pgm");
    assert_eq!(flexsolve(&["rof", &missing, &out]).status.code(), Some(2));

    let bad = path(dir.path(), "bad.pgm");
    std::fs::write(&bad, b"P6\n1 1\n255\n\x00").unwrap();
    let run = flexsolve(&["rof", &bad, &out]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("at byte 0"));

    let a = save(dir.path(), "a.pgm", 4, 4, vec![0.5; 16]);
    let b = save(dir.path(), "b.pgm", 4, 5, vec![0.5; 20]);
    assert_eq!(flexsolve(&["flow", &a, &b, &path(dir.path(), "x.flo")]).status.code(), Some(2));
    assert_eq!(flexsolve(&["segment", &a, &path(dir.path(), "s"), "-k", "0"]).status.code(), Some(2));
    assert_eq!(flexsolve(&["rof", &a, &out, "--check-every", "0"]).status.code(), Some(2));
    assert_eq!(flexsolve(&["rof", &a, &out, "--alpha", "-1"]).status.code(), Some(2));
    assert_eq!(flexsolve(&["bogus"]).status.code(), Some(2));
}

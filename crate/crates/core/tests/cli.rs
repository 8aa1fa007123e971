use std::path::Path;
use std::process::{Command, Output};

use radarsr::harness::parse_pgm;

/// Run the binary in `dir` with whitespace-separated `args`.
fn radarsr(dir: &Path, args: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radarsr"))
        .current_dir(dir)
        .args(args.split_whitespace())
        .output()
        .expect("binary runs")
}

fn code(dir: &Path, args: &str) -> i32 {
    radarsr(dir, args).status.code().expect("exited normally")
}

fn ok(dir: &Path, args: &str) -> String {
    let out = radarsr(dir, args);
    assert!(out.status.success(), "{args}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

const SIMULATE: &str =
    "simulate --out data --seed 3 --train 1 --test-same 1 --test-similar 0 --test-different 0 --frames 6";
const FRAME: &str = "--ckpt m.ckpt --frame data/test_same_000.rhd";

#[test]
fn full_command_cycle() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(dir, SIMULATE);
    assert!(dir.join("data/manifest.json").exists());

    ok(dir, "train --data data --epochs 1 --out m.ckpt");
    assert!(dir.join("m.ckpt").exists());
    assert!(dir.join("m.loss.csv").exists());

    ok(
        dir,
        "eval --data data --split test_same --ckpt m.ckpt --cfar 1,2,4,8 --tau 0.5 --report rep",
    );
    let summary = read(dir.join("rep/summary.csv"));
    let methods: Vec<&str> = summary.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(methods, ["model", "cfar_1db", "cfar_2db", "cfar_4db", "cfar_8db"]);
    assert!(dir.join("rep/cdf.csv").exists());

    ok(dir, &format!("infer {FRAME} --out p.pgm"));
    let pgm = parse_pgm(&read(dir.join("p.pgm"))).unwrap();
    assert_eq!((pgm.height, pgm.width), (64, 128));

    ok(dir, &format!("saliency {FRAME} --pixel 10,20 --out sal"));
    for ch in 0..5 {
        let map = parse_pgm(&read(dir.join(format!("sal/saliency_ch{ch:02}.pgm")))).unwrap();
        assert_eq!((map.height, map.width), (64, 16));
    }
    let csv = read(dir.join("sal/saliency.csv"));
    assert_eq!(csv.lines().count(), 1 + 5 * 64 * 16);
    let finite = |l: &str| l.rsplit(',').next().unwrap().parse::<f64>().unwrap().is_finite();
    assert!(csv.lines().skip(1).all(finite));
}

#[test]
fn gradcheck_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let stdout = ok(tmp.path(), "gradcheck --seed 1");
    assert!(stdout.lines().any(|l| l.starts_with("PASS")));
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert_eq!(code(dir, ""), 1);
    assert_eq!(code(dir, "simulate"), 1);
    assert_eq!(
        code(dir, "eval --data nowhere --split test_same --ckpt m --report r"),
        2
    );

    ok(dir, SIMULATE);
    assert_eq!(code(dir, "eval --data data --split nope --ckpt m --report r"), 1);
    ok(dir, "train --data data --epochs 1 --out m.ckpt");
    assert_eq!(code(dir, &format!("saliency {FRAME} --pixel 1 --out s")), 1);
    assert_eq!(code(dir, &format!("infer {FRAME} --index 99 --out q.pgm")), 2);

    std::fs::write(dir.join("bad.json"), r#"{"adam": {"lr": 1e38}}"#).unwrap();
    let out = radarsr(dir, "train --data data --config bad.json --epochs 2 --out bad.ckpt");
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("batch"));

    std::fs::write(dir.join("neg.json"), r#"{"adam": {"lr": -1.0}}"#).unwrap();
    assert_eq!(code(dir, "train --data data --config neg.json --out n.ckpt"), 1);
}

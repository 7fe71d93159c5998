use std::fs;
use std::process::{Command, Output};

fn lmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lmap"))
        .args(args)
        .env_remove("LMAP_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn synth_prints_structure() {
    let o = lmap(&["synth", "--code", "7,5", "--rsc"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("I=({2},{1,2},{1})"), "{s}");
    assert!(s.contains("J=({2},{1})"));
    assert!(s.contains("S={1,2}"));
}

#[test]
fn usage_and_config_errors_exit_2() {
    assert_eq!(lmap(&["synth", "--bogus"]).status.code(), Some(2));
    assert_eq!(lmap(&["frobnicate"]).status.code(), Some(2));
    // Non-primitive parity numerator.
    assert_eq!(lmap(&["synth", "--code", "5,7"]).status.code(), Some(2));
    assert_eq!(lmap(&["synth", "--code", "7"]).status.code(), Some(2));
    assert_eq!(lmap(&["ber", "--code", "7,5", "--snr", "1:0:3"]).status.code(), Some(2));
    assert_eq!(lmap(&["ber", "--snr", "1"]).status.code(), Some(2));
}

#[test]
fn ber_csv_is_thread_independent() {
    let run = |threads: &str| {
        let o = lmap(&[
            "ber", "--code", "7,5", "--rsc", "--snr", "0:1:3", "--mode", "bidir", "--seed", "1", "--min-errors", "300",
            "--threads", threads, "--no-timing",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        stdout(&o)
    };
    let a = run("1");
    assert_eq!(a, run("4"));
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "snr_db,frames,bits,bit_errors,ber,block_errors,bler,ms_per_frame");
    assert_eq!(lines.len(), 5);
    // BER falls with SNR on this grid.
    let ber: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(4).unwrap().parse().unwrap()).collect();
    assert!(ber.windows(2).all(|w| w[1] < w[0]), "{ber:?}");
}

#[test]
fn ber_json_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# test\ncode=rsc:13,15\nsnr=0,1\nmin_bit_errors=100\nlen=50\nseed=3\n").unwrap();
    let out = dir.path().join("r.json");
    let o = lmap(&[
        "ber",
        "--config",
        cfg.to_str().unwrap(),
        "--snr",
        "2",
        "--json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts.len(), 1);
    assert_eq!(pts[0]["snr_db"].as_f64(), Some(2.0));
    assert_eq!(pts[0]["bits"].as_u64().unwrap(), pts[0]["frames"].as_u64().unwrap() * 50);
    fs::write(&cfg, "code=rsc:7,5\nwat=1\n").unwrap();
    assert_eq!(lmap(&["ber", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn equiv_summary() {
    let o = lmap(&["equiv", "--code", "23,25", "--rsc", "--frames", "20"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 1);
    assert!(s.contains("max_abs_dev=") && s.contains("sign_disagreements=0"), "{s}");
}

#[test]
fn decode_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let sse = dir.path().join("frame.txt");
    fs::write(&sse, "0.9 0.8\n-0.7 0.2\n0.1 -0.95\n0.5 0.5\n").unwrap();
    let run = |extra: &[&str]| {
        let mut args = vec!["decode", "--code", "7,5", "--input", sse.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = lmap(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        stdout(&o).lines().map(|l| l.parse::<f64>().unwrap()).collect::<Vec<_>>()
    };
    let lmap_llr = run(&[]);
    let bcjr_llr = run(&["--decoder", "bcjr"]);
    assert_eq!(lmap_llr.len(), 4);
    for (a, b) in lmap_llr.iter().zip(&bcjr_llr) {
        assert!((a - b).abs() < 1e-9);
    }
    let fwd = run(&["--mode", "forward"]);
    assert_eq!(fwd.len(), 4);

    // A spec written by `synth` decodes identically.
    let spec = dir.path().join("spec.txt");
    assert!(lmap(&["synth", "--code", "7,5", "--out", spec.to_str().unwrap()]).status.success());
    assert_eq!(run(&["--spec", spec.to_str().unwrap()]), lmap_llr);

    // Channel outputs with a noise level.
    fs::write(&sse, "1.1 0.9\n-1.2 0.3\n").unwrap();
    assert_eq!(run(&["--received", "--snr", "2"]).len(), 2);

    fs::write(&sse, "0.1 0.2 0.3\n").unwrap();
    let o = lmap(&["decode", "--code", "7,5", "--input", sse.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    fs::write(&sse, "0.1 zz\n").unwrap();
    let o = lmap(&["decode", "--code", "7,5", "--input", sse.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn decode_tailbiting() {
    let dir = tempfile::tempdir().unwrap();
    let sse = dir.path().join("frame.txt");
    fs::write(&sse, "0.9 0.8\n-0.7 0.2\n0.1 -0.95\n0.5 0.5\n0.3 0.3\n").unwrap();
    let o = lmap(&["decode", "--code", "7,5", "--nsc", "--tb", "--input", sse.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 5);
    let o = lmap(&["decode", "--code", "7,5", "--nsc", "--tb", "--mode", "bidir", "--input", sse.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_table() {
    let o = lmap(&["bench", "--code", "13,15", "--frames", "20", "--len", "32"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("code,m,frames,lmap_ms_per_frame"));
    assert!(lines[1].starts_with("rsc:13,15,3,"));
    assert_eq!(lmap(&["bench", "--code", "7,5", "--frames", "1"]).status.code(), Some(2));
}

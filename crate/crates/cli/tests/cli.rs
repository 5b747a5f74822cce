use std::fs;
use std::path::Path;

use meminductor_cli::run;

const STAIRCASE_LOOP: &str = "\
V1 in 0 PULSE(0 1 10m 1m 10m 3)
R1 in n1 10
ML1 n1 out MLSTAIR(l0=2, delta=0.2)
C1 out 0 2.474u
.tran 1e-5 0.07
.print v_out l_eff
";

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn cli(args: &[&str]) -> i32 {
    run(std::iter::once("meminductor").chain(args.iter().copied()))
}

#[test]
fn simulate_writes_trace_metrics_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(dir.path(), "loop.cir", STAIRCASE_LOOP);
    let out = dir.path().join("out");
    assert_eq!(cli(&["simulate", &net, "-o", out.to_str().unwrap()]), 0);
    let csv = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(csv.starts_with("time,v_in,i,v_out,q,l_eff\n"));
    assert_eq!(csv.lines().count(), 7002);
    let metrics: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["stages"].as_array().unwrap().len(), 4);
    assert!(out.join("trace.gp").exists());
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(dir.path(), "loop.cir", STAIRCASE_LOOP);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(cli(&["simulate", &net, "-o", a.to_str().unwrap()]), 0);
    assert_eq!(cli(&["simulate", &net, "-o", b.to_str().unwrap()]), 0);
    for f in ["trace.csv", "metrics.json", "trace.gp"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn parse_errors_exit_2_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(dir.path(), "broken.cir", "R1 a b 1\nr1 c d 2\n");
    let out = dir.path().join("out");
    assert_eq!(cli(&["simulate", &net, "-o", out.to_str().unwrap()]), 2);
    assert!(!out.exists());
    let missing = dir.path().join("missing.cir");
    assert_eq!(
        cli(&[
            "simulate",
            missing.to_str().unwrap(),
            "-o",
            out.to_str().unwrap()
        ]),
        2
    );
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(cli(&["frobnicate"]), 1);
    assert_eq!(cli(&["simulate"]), 1);
    assert_eq!(cli(&["rho-q", "--no-such-flag"]), 1);
    let dir = tempfile::tempdir().unwrap();
    let net = write(dir.path(), "loop.cir", STAIRCASE_LOOP);
    let out = dir.path().join("out");
    assert_eq!(
        cli(&[
            "simulate",
            &net,
            "--set",
            "nonsense=1",
            "-o",
            out.to_str().unwrap()
        ]),
        1
    );
    assert!(!out.exists());
}

#[test]
fn simulation_errors_exit_3_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(
        dir.path(),
        "stiff.cir",
        "V1 a 0 1\nR1 a b 0\nM1 b c MLCORE(flux_scale=1m, sw=1u, m0=0.999999999)\nC1 c 0 1u\n.tran 1u 100u\n",
    );
    let out = dir.path().join("out");
    assert_eq!(
        cli(&[
            "simulate",
            &net,
            "--floor",
            "1",
            "-o",
            out.to_str().unwrap()
        ]),
        3
    );
    assert!(!out.exists());
}

#[test]
fn overrides_apply_after_parsing() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(dir.path(), "loop.cir", STAIRCASE_LOOP);
    let out = dir.path().join("out");
    let code = cli(&[
        "simulate",
        &net,
        "--set",
        "delta=0",
        "--set",
        "stop=20m",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let metrics: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["inductive"]["delta"], 0.0);
    assert_eq!(metrics["samples"], 2001);
    // a staircase has no `henries`
    let out2 = dir.path().join("out2");
    assert_eq!(
        cli(&[
            "simulate",
            &net,
            "--set",
            "henries=1",
            "-o",
            out2.to_str().unwrap()
        ]),
        2
    );
}

#[test]
fn rho_q_curve_starts_at_zero_and_increases() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rq");
    let code = cli(&[
        "rho-q",
        "--flux-scale",
        "1",
        "--sw",
        "1",
        "--m0",
        "-0.964",
        "--i0",
        "1",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(out.join("rho_q.csv")).unwrap();
    let rho: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(rho[0], 0.0);
    assert!(rho.windows(2).all(|w| w[1] > w[0]));
    assert!(out.join("rho_q.gp").exists());
    assert_eq!(
        cli(&["rho-q", "--m0", "1.5", "-o", out.to_str().unwrap()]),
        2
    );
}

#[test]
fn hysteresis_writes_loop_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("hy");
    assert_eq!(
        cli(&["hysteresis", "--m0", "-0.99", "-o", out.to_str().unwrap()]),
        0
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("loop_metrics.json")).unwrap()).unwrap();
    assert!(report["metrics"]["area"].as_f64().unwrap() > 0.0);
    assert!(fs::read_to_string(out.join("loop.csv"))
        .unwrap()
        .starts_with("h,m\n"));
    assert!(out.join("loop.gp").exists());
}

#[test]
fn amoeba_report_and_template() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("am");
    assert_eq!(cli(&["amoeba", "-o", out.to_str().unwrap()]), 0);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("sps_report.json")).unwrap()).unwrap();
    for key in [
        "l_sequence",
        "f0_sequence",
        "s_events",
        "c_events",
        "anticipation_detected",
        "timing_errors",
    ] {
        assert!(report.get(key).is_some(), "{key}");
    }
    assert_eq!(report["anticipation_detected"], true);
    assert!(out.join("trace.csv").exists() && out.join("trace.gp").exists());

    let net = write(dir.path(), "loop.cir", STAIRCASE_LOOP);
    let out2 = dir.path().join("am2");
    assert_eq!(
        cli(&[
            "amoeba",
            &net,
            "--set",
            "delta=0",
            "-o",
            out2.to_str().unwrap()
        ]),
        0
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out2.join("sps_report.json")).unwrap()).unwrap();
    assert_eq!(report["anticipation_detected"], false);
    assert_eq!(report["config"]["capacitance"], 2.474e-6);

    let linear = write(
        dir.path(),
        "lin.cir",
        "V1 a 0 1\nR1 a b 1\nL1 b c 1\nC1 c 0 1u\n.tran 1u 1m\n",
    );
    assert_eq!(
        cli(&[
            "amoeba",
            &linear,
            "-o",
            dir.path().join("am3").to_str().unwrap()
        ]),
        2
    );
}

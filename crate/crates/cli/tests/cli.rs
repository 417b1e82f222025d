use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lrosc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lrosc"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const DAMPED: &[&str] = &[
    "--model",
    "pulsating",
    "--m0",
    "1",
    "--Omega",
    "1",
    "--gamma",
    "0.1",
    "--mu",
    "4",
    "--nu",
    "0.333333333",
    "--state",
    "coherent:3.5355339,0",
    "--t0",
    "0",
    "--t1",
    "40",
    "--dt",
    "0.05",
];

fn simulate(force: &str, extra: &[&str]) -> Output {
    let mut args = vec!["simulate"];
    args.extend_from_slice(DAMPED);
    args.extend_from_slice(&["--force", force]);
    args.extend_from_slice(extra);
    lrosc(&args)
}

/// Data rows of the trajectory table.
fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip_while(|l| !l.starts_with("t,q_mean"))
        .skip(1)
        .take_while(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn damped_forced_run() {
    let out = simulate("sin(t)", &["--ellipse-every", "4"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = stdout(&out);
    assert!(csv.starts_with("# lrosc "));
    assert!(csv.contains(
        "\nt,q_mean,p_mean,var_q,var_p,cov_qp,theta,re_beta,im_beta,omega_I_sq,energy\n"
    ));
    assert!(!csv.contains('\r'));
    let data = rows(&csv);
    assert_eq!(data.len(), 801);
    assert_eq!(data[800][0], 40.0);
    assert!((data[0][1] - 5.0).abs() < 1e-7);
    for r in &data {
        assert_eq!(r.len(), 11);
        assert!(
            (r[9] - 1.0).abs() < 1e-9,
            "omega_I_sq drifted at t={}",
            r[0]
        );
    }
    let ellipses: Vec<&str> = csv
        .lines()
        .skip_while(|l| *l != "# ellipses")
        .skip(1)
        .collect();
    assert_eq!(ellipses[0], "t,axis_major,axis_minor,tilt");
    assert_eq!(ellipses.len(), 12);
    // every number carries 17 significant digits
    assert!(ellipses[1].split(',').all(|x| x
        .split('e')
        .next()
        .unwrap()
        .trim_start_matches('-')
        .len()
        == 18));
}

#[test]
fn unforced_run_has_the_same_variances() {
    let forced = rows(&stdout(&simulate("sin(t)", &[])));
    let free = rows(&stdout(&simulate("0", &[])));
    assert_eq!(forced.len(), free.len());
    let mut moved = 0.0f64;
    for (a, b) in forced.iter().zip(&free) {
        assert!(
            (a[3] - b[3]).abs() < 1e-12
                && (a[4] - b[4]).abs() < 1e-12
                && (a[5] - b[5]).abs() < 1e-12
        );
        moved = moved.max((a[1] - b[1]).abs());
    }
    assert!(moved > 1.0);
}

#[test]
fn output_is_deterministic() {
    let a = simulate("sin(t)", &["--ellipse-every", "4"]);
    let b = simulate("sin(t)", &["--ellipse-every", "4"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn empty_interval_is_rejected() {
    let out = lrosc(&[
        "simulate", "--model", "constant", "--m", "1", "--omega", "1", "--t0", "0", "--t1", "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("t1: must be greater than t0"));
}

#[test]
fn malformed_expression_reports_the_offset() {
    let mut args = vec!["verify"];
    args.extend_from_slice(DAMPED);
    args.extend_from_slice(&["--force", "sin(t) * (1 +"]);
    let out = lrosc(&args);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("force: syntax error at offset 13"), "{err}");
    assert!(err.contains("\n  sin(t) * (1 +\n               ^"), "{err}");
}

#[test]
fn verify_passes_at_working_tolerance_and_fails_below_the_floor() {
    let mut args = vec!["verify"];
    args.extend_from_slice(DAMPED);
    args.extend_from_slice(&["--force", "sin(t)"]);
    let pass = lrosc(&[&args[..], &["--tol", "1e-6"]].concat());
    assert_eq!(
        pass.status.code(),
        Some(0),
        "{}{}",
        stdout(&pass),
        stderr(&pass)
    );
    let table = stdout(&pass);
    assert!(table
        .contains("quantity,max_abs_deviation,t_at_max,max_scaled_deviation,criterion,tol,pass\n"));
    for q in ["q_mean", "p_mean", "var_q", "var_p", "cov_qp", "energy"] {
        assert!(
            table
                .lines()
                .any(|l| l.starts_with(&format!("{q},")) && l.ends_with(",true")),
            "{q}"
        );
    }
    let fail = lrosc(&[&args[..], &["--tol", "1e-12"]].concat());
    assert_eq!(fail.status.code(), Some(1));
    assert!(stdout(&fail).contains(",false"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("damped.conf");
    fs::write(
        &conf,
        "[model]\nmodel = pulsating\nm0 = 1\nOmega = 1\ngamma = 0.1\nmu = 4\nnu = 1/3\nforce = sin(t)\n\n\
         [run]\nstate = coherent:5/sqrt(2),0\nt1 = 8\ndt = 0.5\n",
    )
    .unwrap();
    let conf = conf.to_str().unwrap();
    let out_path = dir.path().join("run.csv");
    let out = lrosc(&[
        "simulate",
        "--config",
        conf,
        "--force",
        "0",
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let csv = fs::read_to_string(&out_path).unwrap();
    assert!(csv.contains("# force = 0\n"));
    assert!(csv.contains("# nu = 1/3\n"));
    let data = rows(&csv);
    assert_eq!(data.len(), 17);
    // unforced and beta0 = 0: beta stays zero
    assert!(data.iter().all(|r| r[7] == 0.0 && r[8] == 0.0));

    let bad = dir.path().join("bad.conf");
    fs::write(&bad, "model = pulsating\ncolour = red\n").unwrap();
    let out = lrosc(&["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bad.conf:2"));
}

#[test]
fn ellipses_to_their_own_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ellipses.csv");
    let out = simulate(
        "sin(t)",
        &[
            "--ellipse-every",
            "4",
            "--ellipse-out",
            path.to_str().unwrap(),
        ],
    );
    assert!(out.status.success());
    assert!(!stdout(&out).contains("# ellipses"));
    let table = fs::read_to_string(&path).unwrap();
    let body: Vec<&str> = table.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "t,axis_major,axis_minor,tilt");
    assert_eq!(body.len(), 12);
}

#[test]
fn sweep_writes_one_file_per_config() {
    let dir = tempfile::tempdir().unwrap();
    let mut confs = Vec::new();
    for (name, f) in [("one", "1"), ("two", "2")] {
        let p = dir.path().join(format!("{name}.conf"));
        fs::write(&p, format!("model = constant\nm = 1\nomega = 1\nF = {f}\nt1 = 5\ndt = 1\ninvariant = hamiltonian\n")).unwrap();
        confs.push(p.to_str().unwrap().to_string());
    }
    let out_dir = dir.path().join("out");
    fs::create_dir(&out_dir).unwrap();
    let out = lrosc(&[
        "simulate",
        "--sweep",
        &confs[0],
        &confs[1],
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    for (name, center) in [("one", 1.0), ("two", 2.0)] {
        let data =
            rows(&fs::read_to_string(Path::new(&out_dir).join(format!("{name}.csv"))).unwrap());
        assert_eq!(data.len(), 6);
        // vacuum of the matched forced invariant sits at the shifted center
        assert!(data.iter().all(|r| (r[1] - center).abs() < 1e-9));
    }
}

#[test]
fn expression_model() {
    let out = lrosc(&[
        "simulate",
        "--model",
        "expr",
        "--mass",
        "m*exp(0.2*t)",
        "--omega-sq",
        "w2",
        "--param",
        "m=2",
        "--param",
        "w2=1/4",
        "--state",
        "number:1",
        "--t1",
        "3",
        "--dt",
        "1",
        "--basis",
        "numeric",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let data = rows(&stdout(&out));
    assert_eq!(data.len(), 4);
    for r in &data {
        // n = 1: uncertainty product is (3/2)^2
        assert!((r[3] * r[4] - r[5] * r[5] - 2.25).abs() < 1e-8);
    }
    let missing = lrosc(&["simulate", "--model", "expr", "--mass", "1", "--t1", "1"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn catalog_and_help() {
    let out = lrosc(&["catalog", "list"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(
        text.contains("constant")
            && text.contains("pulsating")
            && text.contains("m0, gamma, mu, nu, Omega")
    );

    let help = stdout(&lrosc(&["simulate", "--help"]));
    for column in [
        "q_mean",
        "p_mean",
        "var_q",
        "var_p",
        "cov_qp",
        "theta",
        "re_beta",
        "im_beta",
        "omega_I_sq",
        "energy",
        "axis_major",
        "axis_minor",
        "tilt",
    ] {
        assert!(
            help.contains(&format!("  {column} ")),
            "{column} missing from --help"
        );
    }
}

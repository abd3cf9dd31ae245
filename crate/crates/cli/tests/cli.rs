use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sbp-npp"));
    cmd.env_remove("SBP_NPP_OUT_DIR");
    cmd
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v = Vec::new();
    for e in walk(dir) {
        v.push((
            e.strip_prefix(dir).unwrap().display().to_string(),
            fs::read(&e).unwrap(),
        ));
    }
    v.sort();
    v
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn experiment_output_is_reproducible() {
    for pipeline in ["sbp", "npp"] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let args = [
            "experiment",
            "--pipeline",
            pipeline,
            "--n",
            "2",
            "--override-m",
            "10",
            "--trials",
            "6",
            "--seed",
            "7",
        ];
        let (ra, rb) = (run(&args, a.path()), run(&args, b.path()));
        assert_eq!(code(&ra), 0, "{}", String::from_utf8_lossy(&ra.stderr));
        assert_eq!(code(&rb), 0);
        let (fa, fb) = (files(a.path()), files(b.path()));
        assert!(fa.iter().any(|(n, _)| n == "trials.csv"));
        assert!(fa.iter().any(|(n, _)| n == "summary.json"));
        assert_eq!(fa, fb, "{pipeline}");
    }
}

#[test]
fn gen_solve_reduce_verify() {
    for pipeline in ["sbp", "npp"] {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path();
        let common = [
            "--pipeline",
            pipeline,
            "--n",
            "2",
            "--override-m",
            "10",
            "--seed",
            "3",
        ];
        let with = |verb: &str, extra: &[&str]| {
            let mut args = vec![verb];
            args.extend_from_slice(&common);
            args.extend_from_slice(extra);
            run(&args, d)
        };
        assert_eq!(code(&with("gen", &[])), 0);
        assert!(d.join("instance.json").exists() && d.join("problem.json").exists());
        let problem = d.join("problem.json");
        let solved = with("solve", &["--input", problem.to_str().unwrap()]);
        assert_eq!(
            code(&solved),
            0,
            "{}",
            String::from_utf8_lossy(&solved.stdout)
        );
        let reduced = with("reduce", &[]);
        assert_eq!(
            code(&reduced),
            0,
            "{}",
            String::from_utf8_lossy(&reduced.stderr)
        );
        let replay = d.join("replay.json");
        let ok = bin().arg("verify").arg(&replay).output().unwrap();
        assert_eq!(code(&ok), 0);
        let again = bin()
            .arg("verify")
            .arg(&replay)
            .arg("--solution")
            .arg(d.join("solution.json"))
            .output()
            .unwrap();
        assert_eq!(
            code(&again),
            0,
            "{}",
            String::from_utf8_lossy(&again.stdout)
        );

        // all-ones is not a solution of the stored problem
        let mut sol: serde_json::Value =
            serde_json::from_slice(&fs::read(d.join("solution.json")).unwrap()).unwrap();
        sol["x"] = serde_json::json!(vec![1; 10]);
        fs::write(d.join("bad.json"), sol.to_string()).unwrap();
        let bad = bin()
            .arg("verify")
            .arg(&replay)
            .arg("--solution")
            .arg(d.join("bad.json"))
            .output()
            .unwrap();
        assert_eq!(code(&bad), 1, "{pipeline}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // the solver that never succeeds
    let fail = run(
        &[
            "reduce",
            "--n",
            "2",
            "--override-m",
            "8",
            "--solver",
            "always_fail",
        ],
        dir.path(),
    );
    assert_eq!(code(&fail), 1);
    let unreachable = run(
        &[
            "experiment",
            "--n",
            "2",
            "--override-m",
            "8",
            "--trials",
            "3",
            "--solver",
            "always_fail",
            "--min-success-rate",
            "0.5",
        ],
        dir.path(),
    );
    assert_eq!(code(&unreachable), 1);
    // invalid configurations and unreadable inputs are errors
    assert_eq!(code(&run(&["reduce", "--n", "0"], dir.path())), 2);
    assert_eq!(
        code(&run(
            &["solve", "--input", "/nonexistent/problem.json"],
            dir.path()
        )),
        2
    );
    assert_eq!(
        code(
            &bin()
                .args(["verify", "/nonexistent/replay.json"])
                .output()
                .unwrap()
        ),
        2
    );
    assert_ne!(code(&bin().arg("frobnicate").output().unwrap()), 0);
}

#[test]
fn unbounded_target_replays() {
    let dir = tempfile::tempdir().unwrap();
    for pipeline in ["sbp", "npp"] {
        let out = dir.path().join(pipeline);
        let reduced = run(
            &[
                "reduce",
                "--pipeline",
                pipeline,
                "--n",
                "3",
                "--override-m",
                "14",
                "--kappa",
                "unbounded",
            ],
            &out,
        );
        assert_eq!(
            code(&reduced),
            0,
            "{}",
            String::from_utf8_lossy(&reduced.stderr)
        );
        let problem = out.join("problem.json");
        assert_eq!(
            code(&run(
                &[
                    "gen",
                    "--pipeline",
                    pipeline,
                    "--n",
                    "3",
                    "--override-m",
                    "14",
                    "--kappa",
                    "unbounded"
                ],
                &out
            )),
            0
        );
        assert_eq!(
            code(&run(&["solve", "--input", problem.to_str().unwrap()], &out)),
            0
        );
        let v = bin()
            .arg("verify")
            .arg(out.join("replay.json"))
            .arg("--solution")
            .arg(out.join("solution.json"))
            .output()
            .unwrap();
        assert_eq!(
            code(&v),
            0,
            "{pipeline}: {}",
            String::from_utf8_lossy(&v.stderr)
        );
    }
}

#[test]
fn stats_rounding_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["stats", "--suite", "rounding", "--seed", "1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("stats_rounding.json")).unwrap()).unwrap();
    let reports = json.as_array().unwrap();
    assert!(!reports.is_empty());
    assert!(reports.iter().all(|r| r["pass"] == true));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from_env");
    let out = bin()
        .env("SBP_NPP_OUT_DIR", &target)
        .args(["gen", "--n", "2", "--override-m", "8"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(target.join("problem.json").exists());
}

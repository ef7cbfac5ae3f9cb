use std::process::{Command, Output};

fn regretlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regretlab"))
        .args(args)
        .env_remove("REGRETLAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn small_realizable_run_exits_zero() {
    let o = regretlab(&[
        "--case",
        "realizable",
        "--T",
        "8",
        "--d",
        "4",
        "--learners",
        "wm,wm_halving",
        "--perm",
        "exhaustive",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("learner,case,eta,T,permutations,|H|,M(h*),"));
    assert!(lines[1].starts_with("WM,realizable,sqrt8,8,40320,4,0,"));
    assert!(lines[2].starts_with("WM_Halving,realizable,sqrt8,8,40320,4,0,"));
}

#[test]
fn d_above_t_is_a_usage_error() {
    let o = regretlab(&["--T", "4", "--d", "8"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    assert_eq!(stderr(&o).lines().count(), 1);
}

#[test]
fn usage_errors_exit_one_with_one_line() {
    for args in [
        &["--bogus"][..],
        &["--learners", "perceptron"],
        &["--perm", "sampled:0"],
        &["--format", "xml"],
        &["--T", "10", "--perm", "exhaustive"],
        &["--case", "unrealizable", "--learners", "halving"],
        &["--config", "/nonexistent/regretlab.json"],
        &["gen", "--T", "2", "--d", "3"],
    ] {
        let o = regretlab(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert_eq!(stderr(&o).lines().count(), 1, "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn bad_seed_env_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_regretlab"))
        .args(["--T", "4"])
        .env("REGRETLAB_SEED", "seven")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("REGRETLAB_SEED"));
}

#[test]
fn help_exits_zero() {
    let o = regretlab(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("--eta-variant"));
}

#[test]
fn gen_realizable_sequence() {
    let o = regretlab(&["gen", "--T", "8", "--case", "realizable"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "t,x,y\n1,-3,0\n2,-2,0\n3,-1,0\n4,0,0\n5,1,1\n6,2,1\n7,3,1\n8,4,1\n"
    );
}

#[test]
fn gen_unrealizable_sequence() {
    let o = regretlab(&["gen", "--T", "8", "--case", "unrealizable"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "t,x,y\n1,-3,1\n2,-2,1\n3,-1,1\n4,0,1\n5,1,1\n6,2,1\n7,3,1\n8,4,1\n"
    );
}

#[test]
fn gen_single_hypothesis_class() {
    let o = regretlab(&["gen", "--T", "2", "--d", "1", "--emit", "class"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["table"].as_array().unwrap().len(), 1);
    assert_eq!(v["domain"], serde_json::json!([0, 1]));
}

#[test]
fn gen_out_dir_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("case");
    let o = regretlab(&[
        "gen",
        "--T",
        "2",
        "--d",
        "1",
        "--out-dir",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let class = regretlab::FiniteHypothesisClass::from_json(
        &std::fs::read_to_string(path.join("class.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(class.size(), 1);
    let seq =
        regretlab::Sequence::from_csv(&std::fs::read_to_string(path.join("sequence.csv")).unwrap())
            .unwrap();
    assert_eq!(seq.len(), 2);
}

#[test]
fn dump_config_round_trips_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let o = regretlab(&[
        "--case",
        "unrealizable",
        "--T",
        "9",
        "--d",
        "3",
        "--learners",
        "wm,wm_soa",
        "--seed",
        "11",
        "--mode",
        "sampled:5",
        "--eta-variant",
        "sqrt2",
        "--dump-config",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let first = stdout(&o);
    std::fs::write(&cfg, &first).unwrap();

    let again = regretlab(&["--config", cfg.to_str().unwrap(), "--dump-config"]);
    assert_eq!(stdout(&again), first);

    let overridden = regretlab(&[
        "--config",
        cfg.to_str().unwrap(),
        "--d",
        "2",
        "--dump-config",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&overridden)).unwrap();
    assert_eq!(v["d"], 2);
    assert_eq!(v["seed"], 11);
}

#[test]
fn env_seed_is_the_fallback() {
    let dump = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_regretlab"));
        c.arg("--dump-config")
            .args(extra)
            .env_remove("REGRETLAB_SEED");
        if let Some(s) = env {
            c.env("REGRETLAB_SEED", s);
        }
        let v: serde_json::Value = serde_json::from_slice(&c.output().unwrap().stdout).unwrap();
        v["seed"].as_u64().unwrap()
    };
    assert_eq!(dump(None, &[]), 0);
    assert_eq!(dump(Some("99"), &[]), 99);
    assert_eq!(dump(Some("99"), &["--seed", "3"]), 3);
}

#[test]
fn formats_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = regretlab(&[
        "--T",
        "6",
        "--d",
        "3",
        "--learners",
        "wm,wm_halving,halving",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(
        regretlab::experiments::parse_json_report(&text)
            .unwrap()
            .len(),
        3
    );

    let md = stdout(&regretlab(&[
        "--T", "6", "--d", "3", "--format", "markdown",
    ]));
    assert!(md.lines().next().unwrap().contains("Diff (1) - (2)"));
}

#[test]
fn sampled_mode_adds_columns_and_is_reproducible() {
    let args = [
        "--case",
        "unrealizable",
        "--T",
        "7",
        "--d",
        "3",
        "--mode",
        "sampled:20",
        "--seed",
        "5",
        "--jobs",
        "2",
    ];
    let a = regretlab(&args);
    let b = regretlab(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a)
        .lines()
        .next()
        .unwrap()
        .ends_with(",sampled_trials,sampled_mean,sampled_max"));
}

#[test]
fn check_bounds_can_be_disabled() {
    let o = regretlab(&["--T", "5", "--d", "2", "--check-bounds=false"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().nth(1).unwrap().ends_with(",unchecked"));
}

#[test]
fn worker_count_does_not_change_output() {
    let base = [
        "--T",
        "8",
        "--d",
        "4",
        "--learners",
        "wm,wm_consistent,wm_soa",
    ];
    let one = regretlab(&[&base[..], &["--jobs", "1"]].concat());
    let four = regretlab(&[&base[..], &["--jobs", "4"]].concat());
    assert_eq!(one.stdout, four.stdout);
}

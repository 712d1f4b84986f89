use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hsb(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsb"))
        .args(args)
        .current_dir(dir)
        .env_remove("HSB_WORKERS")
        .output()
        .expect("running hsb")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn verify_random_and_all_minus() {
    let dir = tempfile::tempdir().unwrap();
    let o = hsb(
        &[
            "verify",
            "--n",
            "6",
            "--signs",
            "random",
            "--seed",
            "42",
            "--samples",
            "100",
            "--out",
            "v.jsonl",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("v.jsonl")).unwrap();
    let headers: Vec<Value> = text
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .filter(|v| v.get("v").is_some())
        .collect();
    assert_eq!(headers.len(), 100);
    for h in &headers {
        assert_eq!(h["passed"], true);
        assert_eq!(h["totalQ"], 1793);
        assert_eq!(h["config"]["seed"], 42);
        assert_eq!(h["signsDigest"].as_str().unwrap().len(), 16);
    }
    assert_eq!(
        code(&hsb(&["verify", "--n", "3", "--signs", "all-minus"], dir.path())),
        0
    );
}

#[test]
fn malformed_sign_file_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.sgn"), "n=1 d=2\n+-?+\n").unwrap();
    let o = hsb(&["verify", "--n", "1", "--signs", "file:bad.sgn"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    fs::write(dir.path().join("bad.sgn"), "n=1\n++++\n").unwrap();
    let o = hsb(&["verify", "--signs", "file:bad.sgn"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["verify", "--signs", "random"][..],
        &["verify", "--n", "1", "--signs", "bogus"],
        &["verify", "--n", "1", "--d", "3"],
        &["hist", "--n", "1", "--q", "1,1,0"],
        &["hist", "--n", "1", "--q", "3,0,0,0"],
        &["hist", "--n", "1", "--q", "1,1,2,0"],
        &["hist", "--n", "19"],
        &["classes", "--n", "3", "--d", "2", "--mode", "exhaustive"],
        &["lp", "--p", "3", "--n-max", "2"],
        &["bench", "--n", "9", "--spot", "9"],
        &["--workers", "0", "gen", "--n", "1"],
        &["frobnicate"],
    ] {
        assert_eq!(code(&hsb(args, dir.path())), 2, "{args:?}");
    }
    let o = hsb(&["classes", "--n", "3", "--d", "2"], dir.path());
    assert!(stderr(&o).contains("2^24"), "{}", stderr(&o));
}

#[test]
fn hist_rows_and_format_parity() {
    let dir = tempfile::tempdir().unwrap();
    let o = hsb(&["hist", "--n", "1", "--format", "csv"], dir.path());
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "value,count\n-2,4\n0,8\n2,4\n");
    let o = hsb(&["hist", "--n", "0", "--q", "1,1,0,0", "--format", "csv"], dir.path());
    assert_eq!(stdout(&o), "value,count\n1,1\n");

    let args = ["hist", "--n", "5", "--signs", "random", "--seed", "3", "--q", "1,2,1,3"];
    let csv = stdout(&hsb(&[&args[..], &["--format", "csv"]].concat(), dir.path()));
    let json: Value = serde_json::from_str(&stdout(&hsb(&args, dir.path()))).unwrap();
    let from_json: String = json["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| format!("{},{}\n", r["value"], r["count"]))
        .collect();
    assert_eq!(csv, format!("value,count\n{from_json}"));
    assert_eq!(json["v"], 1);
    assert_eq!(json["config"]["q"]["levels"], serde_json::json!([1, 2]));
    assert_eq!(json["rows"][0]["measure"], "1/512");
}

#[test]
fn normalize_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let o = hsb(
        &[
            "normalize",
            "--n",
            "4",
            "--signs",
            "random",
            "--seed",
            "7",
            "--out",
            "w.json",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("verdict: OK"));
    let w: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("w.json")).unwrap()).unwrap();
    assert_eq!(w["v"], 1);
    assert!(!w["moves"].as_array().unwrap().is_empty());

    let o = hsb(
        &["replay", "--signs", "random", "--seed", "7", "--witness", "w.json"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["mismatchedCells"], 0);
    assert_eq!(r["cellsInQ"], 1024);

    // The same witness applied to a different input does not reach all-ones.
    let o = hsb(
        &["replay", "--signs", "random", "--seed", "8", "--witness", "w.json"],
        dir.path(),
    );
    assert_eq!(code(&o), 1);

    let o = hsb(&["normalize", "--n", "4"], dir.path());
    assert_eq!(code(&o), 0);
    let w: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(w["moves"], serde_json::json!([]));

    let o = hsb(&["normalize", "--n", "2", "--q", "2,2,0,0"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("tight"));
}

#[test]
fn sign_files_round_trip_through_every_command() {
    let dir = tempfile::tempdir().unwrap();
    let o = hsb(
        &["gen", "--n", "3", "--signs", "random", "--seed", "11", "--out", "s.sgn"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let by_file = stdout(&hsb(&["hist", "--signs", "file:s.sgn", "--format", "csv"], dir.path()));
    let by_seed = stdout(&hsb(
        &[
            "hist", "--n", "3", "--signs", "random", "--seed", "11", "--format", "csv",
        ],
        dir.path(),
    ));
    assert_eq!(by_file, by_seed);
    assert_eq!(code(&hsb(&["verify", "--signs", "file:s.sgn"], dir.path())), 0);
    assert_eq!(
        code(&hsb(
            &["normalize", "--signs", "file:s.sgn", "--out", "w.json"],
            dir.path()
        )),
        0
    );
    assert_eq!(
        code(&hsb(
            &["replay", "--signs", "file:s.sgn", "--witness", "w.json"],
            dir.path()
        )),
        0
    );
    let o = hsb(&["gen", "--signs", "file:s.sgn"], dir.path());
    assert_eq!(stdout(&o), fs::read_to_string(dir.path().join("s.sgn")).unwrap());
    assert_eq!(
        code(&hsb(&["verify", "--n", "2", "--signs", "file:s.sgn"], dir.path())),
        2
    );
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    for (name, args) in [
        (
            "verify",
            &[
                "verify",
                "--n",
                "4",
                "--signs",
                "random",
                "--seed",
                "5",
                "--samples",
                "3",
            ][..],
        ),
        (
            "classes",
            &[
                "classes",
                "--n",
                "2",
                "--d",
                "3",
                "--mode",
                "sampled",
                "--samples",
                "300",
            ],
        ),
        ("hist", &["hist", "--n", "6", "--signs", "random", "--seed", "1"]),
    ] {
        let mut outputs = Vec::new();
        for workers in ["1", "3"] {
            let path = format!("{name}-{workers}.out");
            let mut full = vec!["--workers", workers];
            full.extend_from_slice(args);
            full.extend_from_slice(&["--out", &path]);
            assert_eq!(code(&hsb(&full, dir.path())), 0, "{full:?}");
            outputs.push(fs::read(dir.path().join(&path)).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{name}");
    }
    let o = Command::new(env!("CARGO_BIN_EXE_hsb"))
        .args(["hist", "--n", "1"])
        .env("HSB_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn classes_divergent_tightness_lp() {
    let dir = tempfile::tempdir().unwrap();
    let o = hsb(&["classes", "--n", "1", "--d", "3", "--mode", "exhaustive"], dir.path());
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["enumerated"], 64);
    assert_eq!(r["classCount"], 1);
    let o = hsb(
        &[
            "classes",
            "--n",
            "2",
            "--d",
            "3",
            "--mode",
            "sampled",
            "--samples",
            "500",
        ],
        dir.path(),
    );
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(r["classCount"].as_u64().unwrap() >= 2);

    let o = hsb(&["divergent", "--n", "2", "--d", "3", "--budget", "100"], dir.path());
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["found"], true);
    assert_ne!(r["first"]["histogram"], r["second"]["histogram"]);
    let o = hsb(&["divergent", "--n", "2", "--d", "2", "--budget", "5000"], dir.path());
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["found"], false);
    assert_eq!(r["examined"], 4096);

    let o = hsb(&["tightness", "--n", "3"], dir.path());
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let levels: Vec<u64> = r["region"]["levels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert_eq!(levels.iter().sum::<u64>(), 5);

    let o = hsb(&["lp", "--p", "2", "--n-max", "10", "--format", "csv"], dir.path());
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|l| l.ends_with(",1")));
    let o = hsb(
        &["lp", "--p", "4", "--n-max", "6", "--signs", "random", "--samples", "4"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["rows"][1]["momentNumerator"], "32");
    assert_eq!(r["rows"][1]["momentDenominator"], "4");
}

#[test]
fn bench_digests_agree() {
    let dir = tempfile::tempdir().unwrap();
    let o = hsb(&["bench", "--n", "10", "--spot", "6", "--dump", "f.bin"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["spot"]["referenceDigest"], r["spot"]["fastDigest"]);
    assert_eq!(r["allones"]["closedFormDigest"], r["allones"]["fastDigest"]);
    let dump = fs::read(dir.path().join("f.bin")).unwrap();
    assert_eq!(&dump[..4], b"HSBF");
    assert_eq!(dump.len(), 16 + (1 << 22));
    let field = hsb_core::GridField::read_dump(&dump[..]).unwrap();
    assert_eq!(
        format!("{:016x}", field.digest()),
        r["full"]["fastDigest"].as_str().unwrap()
    );
}

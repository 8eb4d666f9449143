use std::path::Path;
use std::process::{Command, Output};

/// Runs the binary with whitespace-separated `args`.
fn untangle(args: &str, dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_untangle"))
        .args(args.split_whitespace())
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// Small dataset plus a briefly trained model in `dir`.
fn fixture(dir: &Path) {
    let gen = untangle(
        "gen --n 3 --len 6 --crossings 4 --mix 6 --count 100 --seed 5 --out d.jsonl",
        dir,
    );
    assert_eq!(code(&gen), 0, "{}", String::from_utf8_lossy(&gen.stderr));
    let train = untangle(
        "--quiet train --data d.jsonl --iters 200 --eval-every 100 --out m.ckpt --metrics m.csv",
        dir,
    );
    assert_eq!(
        code(&train),
        0,
        "{}",
        String::from_utf8_lossy(&train.stderr)
    );
}

#[test]
fn check_verdicts_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = untangle("check [1,-1] --n 2", dir.path());
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "trivial");

    let o = untangle("check [1,1] --n 2", dir.path());
    assert_eq!(code(&o), 1);
    assert_eq!(stdout(&o).trim(), "nontrivial");

    let o = untangle("check [1,3] --n 2", dir.path());
    assert_eq!(code(&o), 2);

    let o = untangle("check [1,-1", dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn check_reports_resource_limit() {
    let dir = tempfile::tempdir().unwrap();
    let o = untangle(
        "check [1,2,1,2,1,2,1,2,1,2] --n 3 --letter-limit 8",
        dir.path(),
    );
    assert_eq!(code(&o), 2);
    assert_eq!(stdout(&o).trim(), "resource-limit");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&untangle(
            "gen --n 4 --len 6 --crossings 2 --count 1",
            dir.path()
        )),
        2
    );
    assert_eq!(code(&untangle("frobnicate", dir.path())), 2);
    assert_eq!(code(&untangle("check [1] --n 2 --bogus", dir.path())), 2);
    // Odd crossing counts are rejected before the output file is created.
    let o = untangle(
        "gen --n 4 --len 6 --crossings 3 --count 1 --out x.jsonl",
        dir.path(),
    );
    assert_eq!(code(&o), 2);
    assert!(!dir.path().join("x.jsonl").exists());
}

#[test]
fn gen_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.jsonl", "b.jsonl"] {
        let o = untangle(
            &format!("gen --n 4 --len 10 --crossings 10 --count 50 --seed 7 --out {name}"),
            dir.path(),
        );
        assert_eq!(code(&o), 0);
    }
    let a = std::fs::read(dir.path().join("a.jsonl")).unwrap();
    let b = std::fs::read(dir.path().join("b.jsonl")).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.iter().filter(|&&c| c == b'\n').count(), 50);
}

#[test]
fn train_eval_solve_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());

    let csv = std::fs::read_to_string(dir.path().join("m.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("iteration,untangle_rate,mean_steps,mean_return,elapsed_s")
    );
    let its: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(its, ["0", "100", "200"]);

    let o = untangle("--json eval --model m.ckpt --data d.jsonl", dir.path());
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    let rate = v["untangle_rate"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&rate));

    let o = untangle("solve --model m.ckpt [0,0,0] --n 3", dir.path());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("solved in 0 steps"));

    let o = untangle("solve --model m.ckpt [1,-1] --n 3 --trace", dir.path());
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().next(), Some("CANCEL@0 [0,0,0,0,0,0]"));

    // Wrong strand count for the model.
    let o = untangle("solve --model m.ckpt [1,-1] --n 4", dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("n=3"));

    // A budget of one move cannot untangle a word needing more.
    let o = untangle(
        "solve --model m.ckpt [1,0,-1] --n 3 --max-steps 1",
        dir.path(),
    );
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("unsolved"));
}

#[test]
fn eval_rejects_mismatched_dataset() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let o = untangle(
        "gen --n 4 --len 6 --crossings 2 --count 5 --out other.jsonl",
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let o = untangle("eval --model m.ckpt --data other.jsonl", dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn json_lines_parse_independently() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let o = untangle(
        "--json solve --model m.ckpt --data d.jsonl --trace",
        dir.path(),
    );
    assert!(code(&o) <= 1);
    let text = stdout(&o);
    assert!(text.lines().count() > 100);
    for line in text.lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap();
    }

    let o = untangle(
        "--json bench --model m.ckpt --crossings 2,4 --samples 5 --mix 4",
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0]["bench"]["crossings"], 2);
}

#[test]
fn bench_writes_one_row_per_crossing_count() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let o = untangle(
        "--quiet bench --model m.ckpt --crossings 0,2,4 --samples 10 --mix 4 --out b.csv",
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(
        rows[0],
        "crossings,samples,nn_mean_us,nn_median_us,oracle_mean_us,oracle_median_us,nn_solve_rate"
    );
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("0,10,"));
    assert!(rows[1].ends_with(",1"));

    // Crossing counts beyond the model's slots are a contract error.
    let o = untangle("bench --model m.ckpt --crossings 8", dir.path());
    assert_eq!(code(&o), 2);
}

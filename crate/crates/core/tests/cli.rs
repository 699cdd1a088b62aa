use gamefibers::cli::run;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str], stdin: &str) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("gamefibers").chain(args.iter().copied());
    let code = run(argv, &mut stdin.as_bytes(), &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn builtin(name: &str) -> String {
    let out = cli(&["gen", "--builtin", name], "");
    assert_eq!(out.code, 0, "{}", out.stderr);
    out.stdout
}

#[test]
fn bar_analysis() {
    let out = cli(&["analyze"], &builtin("bar"));
    assert_eq!(out.code, 0);
    for line in [
        "zero-sum: yes",
        "jointly affine: yes",
        "generic rank k: 1 (samples 64, seed 0)",
        "generic fiber dimension N-n-k: 1",
        "affine rank: 1",
        "level-set dimension bound: 1 (N-2n+1)",
        "bound satisfied: yes",
    ] {
        assert!(
            out.stdout.lines().any(|l| l == line),
            "missing {line:?} in\n{}",
            out.stdout
        );
    }
}

#[test]
fn rps_analysis() {
    let out = cli(
        &["analyze", "--samples", "64", "--seed", "7"],
        &builtin("rps"),
    );
    assert_eq!(out.code, 0);
    assert!(out
        .stdout
        .contains("generic rank k: 1 (samples 64, seed 7)\n"));
    assert!(out.stdout.contains("generic fiber dimension N-n-k: 3\n"));
    assert!(out.stdout.contains("jointly affine: no\n"));
}

#[test]
fn analyze_reports_agree_on_affine_games() {
    let doc = cli(
        &["gen", "--random", "n=3", "m=2,3,2", "seed=4", "--affine"],
        "",
    )
    .stdout;
    let out = cli(&["--json", "analyze"], &doc);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let report: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(report["jointly_affine"], true);
    assert_eq!(report["generic_rank"], report["affine"]["rank"]);
}

#[test]
fn bar_equilibria() {
    let out = cli(&["equilibria"], &builtin("bar"));
    assert_eq!(out.code, 0);
    let first = out.stdout.lines().next().unwrap();
    assert_eq!(first, "pure (M, M) profile 1,0;1,0 epsilon 0");
    assert!(out.stdout.lines().all(|l| l.contains(" epsilon ")));
}

#[test]
fn rps_equilibria_have_no_pure_solution() {
    let out = cli(&["equilibria", "--seed", "3"], &builtin("rps"));
    assert_eq!(out.code, 0);
    assert!(out.stdout.starts_with("pure: none\nsupport profile "));
    assert!(out.stdout.contains("nash_map converged"));
}

#[test]
fn eval_bar_profile() {
    let out = cli(
        &["eval", "--profile", "0.75,0.25;0.25,0.75"],
        &builtin("bar"),
    );
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout, "man 1: 0.5\nman 2: -0.5\n");
    let uniform = cli(&["eval", "-", "--profile", "uniform"], &builtin("rps"));
    assert_eq!(uniform.stdout, "player 1: 0\nplayer 2: 0\n");
}

#[test]
fn eval_rejects_unnormalized_profiles() {
    let out = cli(&["eval", "--profile", "0.7,0.2;0.5,0.5"], &builtin("bar"));
    assert_eq!(out.code, 1);
    assert!(out.stdout.is_empty());
    let close = cli(
        &["eval", "--profile", "0.5000000001,0.5;0.5,0.5"],
        &builtin("bar"),
    );
    assert_eq!(close.code, 0, "{}", close.stderr);
    let malformed = cli(&["eval", "--profile", "half,half;1,0"], &builtin("bar"));
    assert_eq!(malformed.code, 2);
}

#[test]
fn validate_lists_defects() {
    let good = cli(&["validate"], &builtin("bar"));
    assert_eq!((good.code, good.stdout.as_str()), (0, "valid\n"));
    let dup = builtin("bar").replace("\"profile\": [1, 1]", "\"profile\": [0, 0]");
    let bad = cli(&["validate"], &dup);
    assert_eq!(bad.code, 1);
    let lines: Vec<&str> = bad.stdout.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines.iter().any(|l| l.contains("duplicate profile")));
    assert!(lines.iter().any(|l| l.contains("incomplete tensor")));
}

#[test]
fn syntax_errors_are_data_errors() {
    let out = cli(&["analyze"], "{\"players\": [");
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("line 1"), "{}", out.stderr);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(cli(&[], "").code, 2);
    assert_eq!(cli(&["frobnicate"], "").code, 2);
    assert_eq!(cli(&["gen"], "").code, 2);
    assert_eq!(
        cli(&["gen", "--builtin", "bar", "--random", "n=2"], "").code,
        2
    );
    assert_eq!(cli(&["gen", "--random", "n=2", "m=2,x"], "").code, 2);
    assert_eq!(cli(&["analyze", "--samples", "many"], "").code, 2);
    assert_eq!(cli(&["--help"], "").code, 0);
}

#[test]
fn unknown_builtin_and_bad_generator_arguments_are_data_errors() {
    assert_eq!(cli(&["gen", "--builtin", "chess"], "").code, 1);
    assert_eq!(cli(&["gen", "--random", "n=2", "m=1,3"], "").code, 1);
}

#[test]
fn trace_bar_diagonal() {
    let out = cli(
        &[
            "trace",
            "--start",
            "0.5,0.5;0.5,0.5",
            "--direction",
            "0",
            "--step",
            "0.05",
            "--steps",
            "100",
        ],
        &builtin("bar"),
    );
    assert_eq!(out.code, 0, "{}", out.stderr);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines[0], "0.5 0.5");
    for line in lines.iter().take_while(|l| !l.contains(':')) {
        let xy: Vec<f64> = line.split(' ').map(|v| v.parse().unwrap()).collect();
        assert!((xy[0] - xy[1]).abs() <= 1e-14, "{line}");
    }
    assert!(
        out.stdout.ends_with("drift: 0\nterminated: boundary\n"),
        "{}",
        out.stdout
    );
}

#[test]
fn trace_rejects_critical_starts() {
    let out = cli(&["trace", "--start", "uniform"], &builtin("rps"));
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("irregular start"));
    let direction = cli(
        &["trace", "--start", "uniform", "--direction", "1"],
        &builtin("bar"),
    );
    assert_eq!(direction.code, 1);
    assert!(
        direction.stderr.contains("direction"),
        "{}",
        direction.stderr
    );
}

#[test]
fn random_generation_is_deterministic() {
    let args = ["gen", "--random", "n=3", "m=2,3,2", "seed=11", "--zero-sum"];
    let a = cli(&args, "");
    let b = cli(&args, "");
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(
        a.stdout,
        cli(
            &["gen", "--random", "n=3", "m=2,3,2", "seed=12", "--zero-sum"],
            ""
        )
        .stdout
    );
    let analysis = cli(&["analyze"], &a.stdout);
    assert!(analysis.stdout.contains("zero-sum: yes\n"));
}

#[test]
fn every_report_is_deterministic() {
    let doc = cli(&["gen", "--random", "n=2", "m=3,3", "seed=5"], "").stdout;
    for args in [
        vec!["analyze", "--seed", "9"],
        vec!["--json", "analyze"],
        vec!["equilibria", "--seed", "2"],
        vec!["--json", "equilibria"],
        vec!["eval", "--profile", "uniform"],
    ] {
        let first = cli(&args, &doc);
        assert_eq!(first.code, 0, "{args:?}: {}", first.stderr);
        assert_eq!(first.stdout, cli(&args, &doc).stdout, "{args:?}");
    }
}

#[test]
fn json_output_parses() {
    let bar = builtin("bar");
    for args in [
        vec!["--json", "validate"],
        vec!["--json", "analyze"],
        vec!["--json", "equilibria"],
        vec!["--json", "eval", "--profile", "uniform"],
        vec![
            "--json",
            "trace",
            "--start",
            "0.3,0.7;0.4,0.6",
            "--steps",
            "3",
        ],
    ] {
        let out = cli(&args, &bar);
        assert_eq!(out.code, 0, "{args:?}: {}", out.stderr);
        serde_json::from_str::<serde_json::Value>(&out.stdout).unwrap();
    }
}

#[test]
fn reads_files_as_well_as_stdin() {
    let path = std::env::temp_dir().join(format!("gamefibers-cli-{}.json", std::process::id()));
    std::fs::write(&path, builtin("bar")).unwrap();
    let from_file = cli(&["analyze", path.to_str().unwrap()], "");
    std::fs::remove_file(&path).unwrap();
    assert_eq!(from_file.stdout, cli(&["analyze"], &builtin("bar")).stdout);
    assert_eq!(cli(&["analyze", "/nonexistent/game.json"], "").code, 1);
}

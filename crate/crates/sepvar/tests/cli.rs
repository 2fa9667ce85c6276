//! End-to-end checks of the installed binary: output formats, file
//! writing, and the exit-code contract.

use std::process::Command;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_sepvar"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).expect("utf-8 stdout"),
        String::from_utf8(out.stderr).expect("utf-8 stderr"),
    )
}

#[test]
fn help_prints_and_exits_zero() {
    let (code, stdout, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("poset"));
    assert!(stdout.contains("verify"));
}

#[test]
fn counts_cross_validate() {
    let (code, stdout, _) = run(&["counts", "--tk", "6"]);
    assert_eq!(code, 0);
    assert_eq!(stdout, "1 1 3 11 53 309 OK\n");

    let (code, stdout, _) = run(&["counts", "--hertzsprung", "5"]);
    assert_eq!(code, 0);
    assert_eq!(stdout, "1 0 0 2 14 OK\n");
}

#[test]
fn poset_writes_dot_and_json_files() {
    let dir = std::env::temp_dir().join(format!("sepvar-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let dot_path = dir.join("p32.dot");
    let json_path = dir.join("p32.json");
    let (code, stdout, _) = run(&[
        "poset",
        "--p",
        "3",
        "--n",
        "2",
        "--dot",
        dot_path.to_str().unwrap(),
        "--json",
        json_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());

    let dot = std::fs::read_to_string(&dot_path).unwrap();
    assert_eq!(dot.lines().filter(|l| l.contains("[label=")).count(), 11);
    assert_eq!(dot.lines().filter(|l| l.contains(" -> ")).count(), 10);
    assert!(dot.contains("P(3,2)"));
    assert!(dot.contains("1\u{b7}1\u{b7}1|[3,2,1]"));

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(json["p"], 3);
    assert_eq!(json["n"], 2);
    assert_eq!(json["total_dim"], 26);
    assert_eq!(json["sdim"], 25);
    assert_eq!(json["components"].as_array().unwrap().len(), 3);
    assert_eq!(json["counts_by_codim"]["1"], 2);
    // Key order is fixed by the report structure.
    let text = std::fs::read_to_string(&json_path).unwrap();
    let order = [
        "\"p\"",
        "\"n\"",
        "\"total_dim\"",
        "\"sdim\"",
        "\"components\"",
    ];
    let mut last = 0;
    for key in order {
        let pos = text.find(key).unwrap_or_else(|| panic!("missing {key}"));
        assert!(pos > last || last == 0, "key {key} out of order");
        last = pos;
    }

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn bounds_output_for_both_regimes() {
    let (code, stdout, _) = run(&["bounds", "--p", "4", "--n", "2"]);
    assert_eq!(code, 0);
    assert_eq!(
        stdout,
        "p=4 n=2\ndim=47\nsdim=44\nseparating_lower_bound=20\ninvariant_ring_dim=17\n\
         semi_invariant_dim=n/a\nsemi_invariant_lower_bound=n/a\n"
    );

    let (code, stdout, _) = run(&["bounds", "--p", "4", "--n", "3"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("sdim=60\n"));
    assert!(stdout.contains("semi_invariant_dim=18\n"));
    assert!(stdout.contains("semi_invariant_lower_bound=20\n"));
}

#[test]
fn verify_numeric_emits_json_records() {
    let (code, stdout, _) = run(&[
        "verify", "numeric", "--p", "2", "--n", "3", "--trials", "20", "--seed", "3",
    ]);
    assert_eq!(code, 0, "{stdout}");
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(*lines.last().unwrap(), "RESULT OK");
    let mut seen = Vec::new();
    for line in &lines[..lines.len() - 1] {
        let v: serde_json::Value = serde_json::from_str(line).expect("record is json");
        for key in [
            "check",
            "params",
            "seed",
            "trials",
            "failures",
            "max_residual",
        ] {
            assert!(v.get(key).is_some(), "missing {key} in {line}");
        }
        seen.push(v["check"].as_str().unwrap().to_string());
    }
    assert!(seen.iter().any(|c| c == "rank_condition_vacuous"));
    assert!(seen.iter().any(|c| c == "trace_match_constructed_pairs"));
    assert!(seen.iter().any(|c| c == "degeneration_linearity"));
}

#[test]
fn verify_poset_reports_every_property() {
    let (code, stdout, _) = run(&["verify", "poset", "--max-p", "4"]);
    assert_eq!(code, 0, "{stdout}");
    for needle in [
        "figures p=2 n>=3 OK",
        "figures p=3 n=2 OK",
        "gradedness p=4 n>=3 OK",
        "maximality-criterion p=4 n=2 OK",
        "count-formulas p=4 n>=3 OK",
        "order-axioms p=3 n=2 OK",
        "compatibility p=4 n>=3 OK",
    ] {
        assert!(stdout.contains(needle), "missing line: {needle}\n{stdout}");
    }
    assert!(stdout.ends_with("RESULT OK\n"));
}

#[test]
fn failing_verification_exits_one() {
    // A nonsensically loose tolerance collapses every numerical rank to
    // one, which breaks the generic rank-condition statistics.
    let (code, stdout, _) = run(&[
        "verify", "numeric", "--p", "2", "--n", "3", "--trials", "20", "--seed", "3", "--tol",
        "100.0",
    ]);
    assert_eq!(code, 1);
    assert!(stdout.ends_with("RESULT FAIL\n"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["counts"],
        vec!["counts", "--tk", "6", "--hertzsprung", "4"],
        vec!["components", "--p", "4", "--n", "1"],
        vec!["components", "--p", "1", "--n", "3"],
        vec!["poset", "--p", "8", "--n", "3"],
        vec!["no-such-command"],
        vec!["counts", "--tk", "40"],
    ] {
        let (code, _, stderr) = run(&args);
        assert_eq!(code, 2, "args {args:?} gave {code}: {stderr}");
        assert!(!stderr.is_empty());
    }
}

#[test]
fn components_table_is_stable() {
    let (code, stdout, _) = run(&["components", "--p", "3", "--n", "3"]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("p=3 n=3\ncodim count dim\n0 1 35\n1 2 34\n2 3 33\n"));
    assert!(stdout.contains("0 3 id\n"));
    assert!(stdout.contains("2 1\u{b7}1\u{b7}1 (123)\n"));
    assert!(stdout.ends_with("sdim=33, separating lower bound=21\n"));
}

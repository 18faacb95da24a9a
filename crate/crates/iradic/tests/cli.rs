use iradic::{parse_model, run_command_with, CommandOutcome, Env};

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> CommandOutcome {
    run_with(args, &Env::default())
}

fn run_with(args: &[&str], env: &Env) -> CommandOutcome {
    run_command_with(std::iter::once("iradic").chain(args.iter().copied()), env)
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let digital = fixture("rts_digital.json");
    for args in [
        vec!["cutsets", digital.as_str(), "--top", "RTS"],
        vec![
            "--format",
            "json",
            "importance",
            digital.as_str(),
            "--top",
            "RTS",
        ],
        vec!["integrate", digital.as_str(), "--top", "RTS"],
        vec!["bahamas", digital.as_str(), "--bbn", "BP-SW"],
    ] {
        let a = run(&args);
        assert_eq!(a.exit_code, 0, "{args:?}: {}", a.stderr);
        assert_eq!(a, run(&args));
    }
}

#[test]
fn compare_prints_the_reference_rows() {
    let out = run(&[
        "compare",
        &fixture("table1_original.json"),
        &fixture("table1_improved.json"),
        "--et",
        "INT-TRANS",
        "--end-state",
        "CD",
    ]);
    assert_eq!(out.exit_code, 0, "{}", out.stderr);
    let row = |id: &str| {
        out.stdout
            .lines()
            .find(|l| l.starts_with(&format!("INT-TRANS:{id} ")))
            .unwrap_or_else(|| panic!("no row {id} in\n{}", out.stdout))
            .split_whitespace()
            .map(str::to_string)
            .collect::<Vec<_>>()
    };
    assert_eq!(
        row("21-16"),
        [
            "INT-TRANS:21-16",
            "5.388E-07",
            "1.596E-07",
            "-70.38%",
            "51",
            "38",
            "24.87%"
        ]
    );
    assert_eq!(row("20")[3], "0");
    let total = out.stdout.lines().find(|l| l.starts_with("Total")).unwrap();
    assert!(
        total.contains("1.073E-06") && total.contains("6.418E-07"),
        "{total}"
    );
    assert!(total.contains("3590") && total.contains("3474"), "{total}");
}

#[test]
fn json_mirrors_the_text_report() {
    let args = [
        "quantify-ft",
        &fixture("rts_analog.json"),
        "--top",
        "RTS",
        "--all",
    ];
    let text = run(&args);
    let mut json_args = vec!["--format", "json"];
    json_args.extend(args);
    let json = run(&json_args);
    let v: serde_json::Value = serde_json::from_str(&json.stdout).unwrap();
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 3);
    for r in results {
        let p = r["probability"].as_f64().unwrap();
        let method = r["method"].as_str().unwrap();
        let line = format!("{method}\t{}", iradic::report::prob(p));
        assert!(
            text.stdout.contains(&line),
            "{line} not in\n{}",
            text.stdout
        );
    }
}

#[test]
fn exit_codes_follow_the_failure_class() {
    let digital = fixture("rts_digital.json");
    assert_eq!(run(&["--help"]).exit_code, 0);
    assert_eq!(run(&["frobnicate"]).exit_code, 2);
    assert_eq!(run(&["cutsets", &digital, "--top", "NOPE"]).exit_code, 2);
    assert_eq!(
        run(&["cutsets", "/nonexistent.json", "--top", "RTS"]).exit_code,
        2
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"fault_trees": [{"id": "T", "top": "G", "gates": [{"id": "G", "kind": "or", "inputs": ["A"]}], "events": [{"id": "A", "p": 1.5, "kind": "hardware"}]}]}"#).unwrap();
    let out = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.exit_code, 1);
    assert!(out.stdout.contains("error"), "{}", out.stdout);
    assert_eq!(
        run(&["cutsets", bad.to_str().unwrap(), "--top", "T"]).exit_code,
        1
    );

    let capped = Env {
        max_sets: Some("3".into()),
    };
    let out = run_with(&["cutsets", &digital, "--top", "RTS"], &capped);
    assert_eq!(out.exit_code, 3, "{}", out.stderr);
}

#[test]
fn integrate_writes_a_loadable_model() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("integrated.json");
    let out = run(&[
        "integrate",
        &fixture("rts_digital.json"),
        "--top",
        "RTS",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.exit_code, 0, "{}", out.stderr);
    assert!(
        out.stdout.contains("SW-BP-CCF-all\tsoftware-ccf:SW-BP"),
        "{}",
        out.stdout
    );
    let m = parse_model(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let ft = &m.fault_trees["RTS"];
    assert_eq!(ft.top, "RTS_FAIL");
    assert!(ft.event("UA-LCL-SW").is_some());
    assert!(ft.nodes.contains_key("DA_LCL_FAIL-INT"));

    let spof = run(&["spof", out_path.to_str().unwrap(), "--top", "RTS"]);
    assert!(
        spof.stdout.lines().any(|l| l == "SW-BP-CCF-all"),
        "{}",
        spof.stdout
    );
}

#[test]
fn evidence_changes_the_marginal() {
    let digital = fixture("rts_digital.json");
    let prior = run(&["--format", "json", "bbn-infer", &digital, "--bbn", "BP-SW"]);
    let given = run(&[
        "--format",
        "json",
        "bbn-infer",
        &digital,
        "--bbn",
        "BP-SW",
        "--evidence",
        "VV=fail",
    ]);
    let p = |o: &CommandOutcome| {
        serde_json::from_str::<serde_json::Value>(&o.stdout).unwrap()["probability"]
            .as_f64()
            .unwrap()
    };
    assert!(p(&given) > p(&prior));
    let bad = run(&[
        "bbn-infer",
        &digital,
        "--bbn",
        "BP-SW",
        "--evidence",
        "VV=maybe",
    ]);
    assert_eq!(bad.exit_code, 2);
}

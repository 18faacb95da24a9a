//! Acceptance run: one PASS/FAIL line per criterion, each with the measured
//! values and runtime. Failures are reported, not hidden; the process exits
//! normally so the rest of the suite still runs.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::{Duration, Instant};

use iradic::{parse_model, render_model, run_command_with, Env};
use iradic_core::bbn::{bahamas_configured, infer_marginal};
use iradic_core::{
    beta_split, compare_event_trees, exact_top_probability, find_spofs, mcub_probability,
    minimal_cut_sets, quantify_event_tree, rare_event_probability, AnalysisConfig, CutSetList,
    Method, Model, Node, State,
};
use iradic_testkit::{
    evaluate, oracle_cut_sets, oracle_marginal, oracle_probability, oracle_truncate, random_bbn,
    random_event_tree, random_fault_tree,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Verdict;

struct Verdict {
    pass: bool,
    detail: String,
}

fn fixture(name: &str) -> Model {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name);
    parse_model(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn fixture_path(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn cli(args: &[&str]) -> String {
    let out = run_command_with(
        std::iter::once("iradic").chain(args.iter().copied()),
        &Env::default(),
    );
    assert_eq!(out.exit_code, 0, "{args:?}: {}", out.stderr);
    out.stdout
}

fn untruncated() -> AnalysisConfig {
    AnalysisConfig {
        truncation_probability: 0.0,
        quantification_method: Method::Exact,
        ..AnalysisConfig::default()
    }
}

fn sorted_ids(list: &CutSetList) -> Vec<Vec<String>> {
    let mut v: Vec<Vec<String>> = list.cutsets.iter().map(|c| c.events.clone()).collect();
    v.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    v
}

fn within_budget(elapsed: Duration, budget: Duration, detail: &mut Vec<String>) -> bool {
    let ok = elapsed < budget;
    if !ok {
        detail.push(format!("runtime {elapsed:.2?} over {budget:?}"));
    }
    ok
}

fn table1() -> Verdict {
    let start = Instant::now();
    let a = quantify_event_tree(&fixture("table1_original.json"), "INT-TRANS", Some("CD")).unwrap();
    let b = quantify_event_tree(&fixture("table1_improved.json"), "INT-TRANS", Some("CD")).unwrap();
    let report = compare_event_trees(&a, &b).unwrap();
    let row = |id: &str| report.rows.iter().find(|r| r.sequence == id).unwrap();
    let pct = |f: Option<f64>| f.unwrap() * 100.0;

    let mut checks: Vec<(String, bool)> = Vec::new();
    let mut rel = |label: &str, got: f64, want: f64| {
        let err = (got - want).abs() / want;
        checks.push((format!("{label} {got:.4e} vs {want:.3e}"), err <= 5e-4));
    };
    rel("total original", report.total.original, 1.073e-6);
    rel("total improved", report.total.improved, 6.418e-7);
    let mut pp = |label: &str, got: f64, want: f64| {
        checks.push((
            format!("{label} {got:.2}% vs {want:.2}%"),
            (got - want).abs() <= 0.01 + 1e-9,
        ));
    };
    pp("Δ 21-16", pct(row("21-16").delta_fraction), -70.38);
    pp("Δ 21-14", pct(row("21-14").delta_fraction), -70.40);
    pp("Δ 21-15", pct(row("21-15").delta_fraction), -70.60);
    pp("Δ total", pct(report.total.delta_fraction), -40.19);
    pp("contribution 21-16", pct(row("21-16").contribution), 24.87);
    pp("contribution 21-14", pct(row("21-14").contribution), 3.35);

    let mut detail: Vec<String> = checks
        .iter()
        .map(|(s, ok)| format!("{s} {}", if *ok { "ok" } else { "MISMATCH" }))
        .collect();
    let timely = within_budget(start.elapsed(), Duration::from_secs(1), &mut detail);
    Verdict {
        pass: timely && checks.iter().all(|(_, ok)| *ok),
        detail: detail.join("; "),
    }
}

fn bahamas_triple() -> Verdict {
    let start = Instant::now();
    let m = fixture("rts_digital.json");
    let r = bahamas_configured(&m.bbns["BP-SW"]).unwrap();
    let sig4 = |v: f64| format!("{v:.3e}");
    let ccf: BTreeMap<&str, f64> = r
        .ccf_probabilities
        .iter()
        .map(|(l, p)| (l.as_str(), *p))
        .collect();
    let triple_ok = sig4(r.individual_probability) == "1.554e-4"
        && sig4(ccf["division"]) == "2.320e-5"
        && sig4(ccf["all"]) == "8.494e-6";

    // The same split straight from beta_split with the back-fitted betas.
    let cfg = m.bbns["BP-SW"].bahamas.as_ref().unwrap();
    let betas: Vec<f64> = cfg.levels.iter().map(|l| l.beta).collect();
    let split = beta_split(r.specific_failure_probability, &betas).unwrap();
    let conserves = split.total() == r.specific_failure_probability;
    let stated_sum = split.total() == 1.87194e-4;

    let mut detail = vec![
        format!(
            "individual {} division {} all {} ({})",
            sig4(r.individual_probability),
            sig4(ccf["division"]),
            sig4(ccf["all"]),
            if triple_ok { "ok" } else { "MISMATCH" }
        ),
        format!(
            "parts sum to specific {:e} exactly: {}",
            r.specific_failure_probability,
            if conserves { "ok" } else { "MISMATCH" }
        ),
        format!(
            "parts sum {:e} vs stated 1.87194e-4: {}",
            split.total(),
            if stated_sum {
                "ok"
            } else {
                "MISMATCH (the reference triple sums to 1.87094e-4)"
            }
        ),
    ];
    let timely = within_budget(start.elapsed(), Duration::from_secs(1), &mut detail);
    Verdict {
        pass: timely && triple_ok && conserves && stated_sum,
        detail: detail.join("; "),
    }
}

fn cut_set_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc_0003);
    let cfg = untruncated();
    let mut failures = Vec::new();
    let mut largest = 0;
    for i in 0..200 {
        let ft = random_fault_tree(&mut rng, 12, 8);
        largest = largest.max(ft.events().count());
        let cs = minimal_cut_sets(&ft, &cfg).unwrap();
        let exact = exact_top_probability(&ft, &cfg).unwrap();
        let (mcub, rare) = (mcub_probability(&cs), rare_event_probability(&cs));
        if sorted_ids(&cs) != oracle_cut_sets(&ft, "G0") {
            failures.push(format!("tree {i}: cut sets differ"));
        }
        if (exact - oracle_probability(&ft, "G0")).abs() > 1e-12 {
            failures.push(format!("tree {i}: exact probability differs"));
        }
        if exact > mcub + 1e-15 || mcub > rare + 1e-15 {
            failures.push(format!("tree {i}: bound chain broken"));
        }
    }
    let mut detail = vec![format!(
        "200 trees (up to {largest} events), {} mismatches",
        failures.len()
    )];
    detail.extend(failures.iter().take(3).cloned());
    let timely = within_budget(start.elapsed(), Duration::from_secs(60), &mut detail);
    Verdict {
        pass: timely && failures.is_empty(),
        detail: detail.join("; "),
    }
}

fn bbn_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc_0004);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let b = random_bbn(&mut rng, 10);
        let ids: Vec<String> = b.nodes.keys().cloned().collect();
        let query = ids.choose(&mut rng).unwrap().clone();
        let observed = ids.choose(&mut rng).unwrap().clone();
        let fail = rng.gen_bool(0.5);
        for evidence in [BTreeMap::new(), BTreeMap::from([(observed, fail)])] {
            let states = evidence
                .iter()
                .map(|(k, v)| (k.clone(), if *v { State::Fail } else { State::Ok }))
                .collect();
            let got = infer_marginal(&b, &query, &states).unwrap();
            let want = oracle_marginal(&b, &query, &evidence).unwrap();
            worst = worst.max((got - want).abs());
        }
    }
    let mut detail = vec![format!("100 networks, worst deviation {worst:.1e}")];
    let timely = within_budget(start.elapsed(), Duration::from_secs(30), &mut detail);
    Verdict {
        pass: timely && worst <= 1e-12,
        detail: detail.join("; "),
    }
}

fn partition_of_unity() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc_0005);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (et, ft) = random_event_tree(&mut rng, 5);
        let mut m = Model::default();
        let f = et.initiating_event.frequency;
        m.fault_trees.insert(ft.id.clone(), ft);
        m.event_trees.insert(et.id.clone(), et);
        let r = quantify_event_tree(&m, "ET", None).unwrap();
        worst = worst.max((r.total - f).abs());
    }
    let mut detail = vec![format!("100 event trees, worst |Σ − f| {worst:.1e}")];
    let timely = within_budget(start.elapsed(), Duration::from_secs(30), &mut detail);
    Verdict {
        pass: timely && worst <= 1e-12,
        detail: detail.join("; "),
    }
}

/// Integrates `m` through the command line and returns the resulting tree.
fn integrated_tree(m: &Model, dir: &Path, tag: &str) -> iradic_core::FaultTree {
    let input = dir.join(format!("{tag}-in.json"));
    let output = dir.join(format!("{tag}-out.json"));
    std::fs::write(&input, render_model(m).unwrap()).unwrap();
    cli(&[
        "integrate",
        input.to_str().unwrap(),
        "--top",
        "RTS",
        "--out",
        output.to_str().unwrap(),
    ]);
    let out = parse_model(&std::fs::read_to_string(output).unwrap()).unwrap();
    out.fault_trees["RTS"].clone()
}

fn spof_detection() -> Verdict {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let base = fixture("rts_digital.json");
    let cfg = untruncated();

    let ft = integrated_tree(&base, dir.path(), "coupled");
    let spofs = find_spofs(&minimal_cut_sets(&ft, &cfg).unwrap());
    let all_ccf = "SW-BP-CCF-all";
    let found = spofs.iter().any(|s| s == all_ccf);
    let alone = BTreeSet::from([all_ccf.to_string()]);
    let confirmed = evaluate(&ft, &ft.top, &alone);

    let mut uncoupled = base.clone();
    for g in uncoupled.ccf_groups.values_mut() {
        for level in &mut g.levels {
            level.beta = 0.0;
        }
    }
    let ft0 = integrated_tree(&uncoupled, dir.path(), "uncoupled");
    let cs0 = minimal_cut_sets(&ft0, &cfg).unwrap();
    let min_order = cs0
        .cutsets
        .iter()
        .map(|c| c.events.len())
        .min()
        .unwrap_or(0);
    // Oracle: no single failed event reaches the top.
    let single = ft0
        .events()
        .find(|e| evaluate(&ft0, &ft0.top, &BTreeSet::from([e.id.clone()])))
        .map(|e| e.id.clone());

    let mut detail = vec![
        format!("SPOFs {}", spofs.join(",")),
        format!("{all_ccf} alone fails the top: {confirmed}"),
        format!(
            "zero betas: minimum order {min_order}, single-event oracle {}",
            single.as_deref().unwrap_or("none")
        ),
    ];
    let timely = within_budget(start.elapsed(), Duration::from_secs(30), &mut detail);
    Verdict {
        pass: timely && found && confirmed && min_order >= 2 && single.is_none(),
        detail: detail.join("; "),
    }
}

fn truncation_accounting() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc_0007);
    let cfg = AnalysisConfig {
        truncation_probability: 1e-12,
        ..untruncated()
    };
    let (mut mismatches, mut dropped_total) = (0, 0);
    for _ in 0..150 {
        let mut ft = random_fault_tree(&mut rng, 10, 6);
        // Spread probabilities over 1E-1..1E-7 so some products straddle 1E-12.
        for node in ft.nodes.values_mut() {
            if let Node::Event(e) = node {
                e.probability = 10f64.powf(-rng.gen_range(1.0..7.0));
            }
        }
        let oracle = oracle_cut_sets(&ft, "G0");
        let (kept, dropped) = oracle_truncate(&ft, &oracle, 1e-12, None);
        let got = minimal_cut_sets(&ft, &cfg).unwrap();
        dropped_total += dropped;
        if sorted_ids(&got) != kept || got.truncated_count != dropped {
            mismatches += 1;
        }
    }
    let mut detail = vec![format!(
        "150 trees, {dropped_total} sets dropped below 1E-12, {mismatches} mismatches"
    )];
    let timely = within_budget(start.elapsed(), Duration::from_secs(30), &mut detail);
    Verdict {
        pass: timely && mismatches == 0 && dropped_total > 0,
        detail: detail.join("; "),
    }
}

fn mcub_of(stdout: &str) -> f64 {
    let v: serde_json::Value = serde_json::from_str(stdout).unwrap();
    v["results"][0]["probability"].as_f64().unwrap()
}

fn qualitative_ordering() -> Verdict {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let digital = dir.path().join("digital.json");
    let analog = dir.path().join("analog.json");
    cli(&[
        "integrate",
        &fixture_path("rts_digital.json"),
        "--top",
        "RTS",
        "--out",
        digital.to_str().unwrap(),
    ]);
    cli(&[
        "expand-ccf",
        &fixture_path("rts_analog.json"),
        "--out",
        analog.to_str().unwrap(),
    ]);
    let q = |p: &Path| {
        mcub_of(&cli(&[
            "--format",
            "json",
            "quantify-ft",
            p.to_str().unwrap(),
            "--top",
            "RTS",
        ]))
    };
    let (d, a) = (q(&digital), q(&analog));
    let mut detail = vec![
        format!("digital {d:.3e} < analog {a:.3e}"),
        String::from(
            "absolute plant values (1.270E-6, 4.288E-6, 3590/3474 cut sets) need a full plant model and are not checked",
        ),
    ];
    let timely = within_budget(start.elapsed(), Duration::from_secs(30), &mut detail);
    Verdict {
        pass: timely && d < a,
        detail: detail.join("; "),
    }
}

fn main() {
    // `cargo test` passes harness flags; a name filter limits the run.
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let criteria: [(u32, &str, Check); 8] = [
        (1, "Table-1 regression", table1),
        (2, "BAHAMAS triple", bahamas_triple),
        (3, "cut-set oracle equivalence", cut_set_oracle),
        (4, "BBN oracle equivalence", bbn_oracle),
        (5, "partition of unity", partition_of_unity),
        (6, "SPOF detection", spof_detection),
        (7, "truncation accounting", truncation_accounting),
        (8, "qualitative digital < analog", qualitative_ordering),
    ];
    let mut passed = 0;
    let mut run = 0;
    for (n, name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        run += 1;
        let v = check();
        passed += usize::from(v.pass);
        println!(
            "criterion {n} {}: {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!("acceptance: {passed}/{run} criteria pass");
}

//! Brute-force oracles and random model generators shared by the test
//! suites. Nothing here reuses the engine's own algorithms: fault trees are
//! evaluated by direct recursion over truth assignments, BBNs by full joint
//! enumeration.

use std::collections::{BTreeMap, BTreeSet};

use iradic_core::bbn::{Bbn, BbnNode};
use iradic_core::etree::{Branch, EventTree, FunctionalEvent, InitiatingEvent, Sequence};
use iradic_core::{BasicEvent, FaultTree, GateKind, Node, TopKind};
use rand::Rng;

/// Evaluates node `id` of `ft` under the assignment `failed` (event ids that
/// are true). House events use their fixed state.
pub fn evaluate(ft: &FaultTree, id: &str, failed: &BTreeSet<String>) -> bool {
    match &ft.nodes[id] {
        Node::Event(e) => match e.house_state {
            Some(s) => s,
            None => failed.contains(&e.id),
        },
        Node::Gate(g) => {
            let n = g.inputs.iter().filter(|i| evaluate(ft, i, failed)).count();
            match g.kind {
                GateKind::And => n == g.inputs.len(),
                GateKind::Or => n > 0,
                GateKind::AtLeast(k) => n >= k,
            }
        }
    }
}

/// Non-house basic events reachable from `id`, sorted.
pub fn reachable_events(ft: &FaultTree, id: &str) -> Vec<String> {
    fn walk(ft: &FaultTree, id: &str, out: &mut BTreeSet<String>) {
        match &ft.nodes[id] {
            Node::Event(e) if e.house_state.is_none() => {
                out.insert(e.id.clone());
            }
            Node::Event(_) => {}
            Node::Gate(g) => g.inputs.iter().for_each(|i| walk(ft, i, out)),
        }
    }
    let mut out = BTreeSet::new();
    walk(ft, id, &mut out);
    out.into_iter().collect()
}

fn assignment(vars: &[String], mask: u64) -> BTreeSet<String> {
    vars.iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, v)| v.clone())
        .collect()
}

/// Minimal cut sets as the minimal true points of the (coherent) structure
/// function, found by scanning every assignment. Sorted by order, then ids.
pub fn oracle_cut_sets(ft: &FaultTree, top: &str) -> Vec<Vec<String>> {
    let vars = reachable_events(ft, top);
    assert!(vars.len() <= 20, "oracle limited to 20 events");
    let mut masks: Vec<u64> = (0..1u64 << vars.len())
        .filter(|&m| evaluate(ft, top, &assignment(&vars, m)))
        .collect();
    masks.sort_by_key(|m| m.count_ones());
    let mut minimal: Vec<u64> = Vec::new();
    for m in masks {
        if !minimal.iter().any(|&k| k & !m == 0) {
            minimal.push(m);
        }
    }
    let mut sets: Vec<Vec<String>> = minimal
        .into_iter()
        .map(|m| assignment(&vars, m).into_iter().collect())
        .collect();
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sets
}

/// Exact top probability by summing over all assignments.
pub fn oracle_probability(ft: &FaultTree, top: &str) -> f64 {
    let vars = reachable_events(ft, top);
    assert!(vars.len() <= 20, "oracle limited to 20 events");
    let p: Vec<f64> = vars
        .iter()
        .map(|v| ft.event(v).expect("event").probability)
        .collect();
    let mut total = 0.0;
    for m in 0..1u64 << vars.len() {
        if evaluate(ft, top, &assignment(&vars, m)) {
            total += p
                .iter()
                .enumerate()
                .map(|(i, &pi)| if m >> i & 1 == 1 { pi } else { 1.0 - pi })
                .product::<f64>();
        }
    }
    total
}

/// Random coherent fault tree with gate fan-in at most 4. Gate `G0` is the
/// top; gate `Gi` draws inputs from the basic events and from gates with a
/// higher index, so the result is acyclic and may share subtrees. Every
/// gate and event is reachable from the top.
pub fn random_fault_tree<R: Rng>(rng: &mut R, max_events: usize, max_gates: usize) -> FaultTree {
    const FAN_IN: usize = 4;
    let n_gates = rng.gen_range(1..=max_gates.max(1));
    let n_events = rng.gen_range(1..=max_events.max(1).min(3 * n_gates + 1));
    let mut ft = FaultTree::new("FT", "G0", TopKind::FailureOnDemand);
    let events: Vec<String> = (0..n_events).map(|i| format!("E{i}")).collect();
    for e in &events {
        let p = match rng.gen_range(0..4) {
            0 => rng.gen_range(1e-6..1e-3),
            1 => rng.gen_range(1e-3..0.1),
            _ => rng.gen_range(0.05..0.6),
        };
        ft.insert(BasicEvent::hardware(e.clone(), p));
    }
    let mut inputs: Vec<Vec<String>> = vec![Vec::new(); n_gates];
    let pick_with_room = |rng: &mut R, inputs: &[Vec<String>], upto: usize| loop {
        let g = rng.gen_range(0..upto);
        if inputs[g].len() < FAN_IN {
            break g;
        }
    };
    // Connectivity first: each gate below the top gets a parent, each event
    // a gate. Capacity is 4·gates ≥ (gates − 1) + events, so this terminates.
    for g in 1..n_gates {
        let parent = pick_with_room(rng, &inputs, g);
        inputs[parent].push(format!("G{g}"));
    }
    for e in &events {
        let g = pick_with_room(rng, &inputs, n_gates);
        inputs[g].push(e.clone());
    }
    for (g, ins) in inputs.iter_mut().enumerate() {
        let target = rng.gen_range(ins.len().max(1)..=FAN_IN);
        for _ in 0..2 * FAN_IN {
            if ins.len() >= target {
                break;
            }
            let pick = if g + 1 < n_gates && rng.gen_bool(0.35) {
                format!("G{}", rng.gen_range(g + 1..n_gates))
            } else {
                events[rng.gen_range(0..n_events)].clone()
            };
            if !ins.contains(&pick) {
                ins.push(pick);
            }
        }
    }
    for (g, ins) in inputs.into_iter().enumerate() {
        let kind = match rng.gen_range(0..3) {
            0 => GateKind::And,
            1 => GateKind::Or,
            _ => GateKind::AtLeast(rng.gen_range(1..=ins.len())),
        };
        ft.insert(iradic_core::Gate::new(format!("G{g}"), kind, ins));
    }
    ft
}

/// Random DAG-shaped BBN over binary nodes `N0..Nn`; node `i` takes parents
/// only from lower indices.
pub fn random_bbn<R: Rng>(rng: &mut R, max_nodes: usize) -> Bbn {
    let n = rng.gen_range(1..=max_nodes.max(1));
    let mut b = Bbn::new("B");
    for i in 0..n {
        let id = format!("N{i}");
        let mut parents: Vec<String> = Vec::new();
        for j in 0..i {
            if parents.len() < 3 && rng.gen_bool(0.4) {
                parents.push(format!("N{j}"));
            }
        }
        if parents.is_empty() {
            b.insert(BbnNode::root(id, rng.gen_range(0.01..0.99)));
        } else {
            let cpt = (0..1usize << parents.len())
                .map(|_| rng.gen_range(0.01..0.99))
                .collect();
            b.insert(BbnNode::child(id, parents, cpt));
        }
    }
    b
}

/// P(node fails | parents) under the CPT convention: first parent is the
/// most significant bit, ok = 0 and fail = 1.
fn fail_given_parents(node: &BbnNode, states: &BTreeMap<String, bool>) -> f64 {
    let mut idx = 0usize;
    for p in &node.parents {
        idx = idx << 1 | usize::from(states[p]);
    }
    node.cpt[idx]
}

/// Joint probability of a complete assignment (true = fail).
pub fn joint_probability(b: &Bbn, states: &BTreeMap<String, bool>) -> f64 {
    b.nodes
        .values()
        .map(|n| {
            let p = fail_given_parents(n, states);
            if states[&n.id] {
                p
            } else {
                1.0 - p
            }
        })
        .product()
}

/// P(query fails | evidence) by enumerating the full joint distribution.
/// Returns `None` when the evidence has zero probability.
pub fn oracle_marginal(b: &Bbn, query: &str, evidence: &BTreeMap<String, bool>) -> Option<f64> {
    let ids: Vec<&String> = b.nodes.keys().collect();
    assert!(ids.len() <= 16, "oracle limited to 16 nodes");
    let (mut num, mut den) = (0.0, 0.0);
    for mask in 0..1u32 << ids.len() {
        let states: BTreeMap<String, bool> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| ((*id).clone(), mask >> i & 1 == 1))
            .collect();
        if evidence.iter().any(|(k, v)| states[k] != *v) {
            continue;
        }
        let p = joint_probability(b, &states);
        den += p;
        if states[query] {
            num += p;
        }
    }
    (den > 0.0).then(|| num / den)
}

/// Random event tree whose sequence paths partition the outcome space.
/// Functional event `j` links to gate `Tj` of fault tree `FT`; the returned
/// tree holds one basic event per top, with the given failure probabilities.
pub fn random_event_tree<R: Rng>(rng: &mut R, max_fes: usize) -> (EventTree, FaultTree) {
    let n = rng.gen_range(1..=max_fes.max(1));
    let mut ft = FaultTree::new("FT", "T0", TopKind::FailureOnDemand);
    let mut fes = Vec::new();
    for j in 0..n {
        let e = format!("X{j}");
        ft.insert(BasicEvent::hardware(e.clone(), rng.gen_range(1e-4..0.5)));
        ft.insert(iradic_core::Gate::or(format!("T{j}"), [e]));
        fes.push(FunctionalEvent {
            id: format!("F{j}"),
            fault_tree: "FT".into(),
            gate: format!("T{j}"),
        });
    }
    let mut paths: Vec<Vec<Branch>> = Vec::new();
    fn grow<R: Rng>(rng: &mut R, prefix: Vec<Branch>, n: usize, out: &mut Vec<Vec<Branch>>) {
        if prefix.len() == n {
            out.push(prefix);
            return;
        }
        // A bypassed event is not questioned; later events still branch.
        if !prefix.is_empty() && rng.gen_bool(0.2) {
            let mut p = prefix;
            p.push(Branch::Bypass);
            grow(rng, p, n, out);
            return;
        }
        for b in [Branch::Success, Branch::Failure] {
            let mut p = prefix.clone();
            p.push(b);
            grow(rng, p, n, out);
        }
    }
    grow(rng, Vec::new(), n, &mut paths);
    let sequences = paths
        .into_iter()
        .enumerate()
        .map(|(i, path)| Sequence {
            id: format!("S{i:02}"),
            end_state: if i % 2 == 0 { "OK".into() } else { "CD".into() },
            path,
            probability: None,
            cutset_count: None,
        })
        .collect();
    let et = EventTree {
        id: "ET".into(),
        initiating_event: InitiatingEvent {
            id: "IE".into(),
            frequency: rng.gen_range(1e-3..10.0),
        },
        functional_events: fes,
        sequences,
    };
    (et, ft)
}

/// Keeps the cut sets that survive truncation, computing probabilities by
/// direct product. Returns the survivors and how many were dropped.
pub fn oracle_truncate(
    ft: &FaultTree,
    sets: &[Vec<String>],
    threshold: f64,
    max_order: Option<usize>,
) -> (Vec<Vec<String>>, usize) {
    let mut kept = Vec::new();
    let mut dropped = 0;
    for s in sets {
        let p: f64 = s.iter().map(|e| ft.event(e).unwrap().probability).product();
        if p < threshold || max_order.is_some_and(|m| s.len() > m) {
            dropped += 1;
        } else {
            kept.push(s.clone());
        }
    }
    (kept, dropped)
}

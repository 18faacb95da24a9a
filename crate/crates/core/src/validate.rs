//! Structural validation of a whole [`Model`]. Findings are data: the
//! validator never fails, it reports.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bbn::validate_bbn;
use crate::etree::paths_overlap;
use crate::model::{EventKind, FaultTree, GateKind, Model, Node};
use crate::resha::UcaCategory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub severity: Severity,
    pub location: String,
    pub message: String,
}

impl Finding {
    pub fn error(location: String, message: String) -> Self {
        Self {
            severity: Severity::Error,
            location,
            message,
        }
    }

    pub fn warning(location: String, message: String) -> Self {
        Self {
            severity: Severity::Warning,
            location,
            message,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.findings.iter().any(Finding::is_error)
    }

    pub fn error(&mut self, location: String, message: String) {
        self.findings.push(Finding::error(location, message));
    }

    pub fn warning(&mut self, location: String, message: String) {
        self.findings.push(Finding::warning(location, message));
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.findings.extend(other.findings);
    }
}

/// Letters, digits, underscore and hyphen; non-empty.
pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

fn in_unit(p: f64) -> bool {
    (0.0..=1.0).contains(&p)
}

/// Every id reference that does not resolve, as `(location, id)`.
pub fn unresolved_references(m: &Model) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for ft in m.fault_trees.values() {
        if !ft.nodes.contains_key(&ft.top) {
            out.push((format!("ft {}/top", ft.id), ft.top.clone()));
        }
        for g in ft.gates() {
            for i in &g.inputs {
                if !ft.nodes.contains_key(i) {
                    out.push((format!("ft {}/{}", ft.id, g.id), i.clone()));
                }
            }
        }
        for e in ft.events() {
            if let Some(group) = &e.ccf_group {
                if !m.ccf_groups.contains_key(group) {
                    out.push((format!("ft {}/{}", ft.id, e.id), group.clone()));
                }
            }
        }
    }
    let in_any_tree = |id: &str| m.fault_trees.values().any(|ft| ft.nodes.contains_key(id));
    for g in m.ccf_groups.values() {
        for member in &g.members {
            let software = m
                .uca_catalog
                .iter()
                .any(|u| u.software_event_id() == *member);
            if !software && !in_any_tree(member) {
                out.push((format!("ccf {}", g.id), member.clone()));
            }
        }
    }
    for u in &m.uca_catalog {
        if !in_any_tree(&u.controller) {
            out.push((format!("uca {}", u.id), u.controller.clone()));
        }
    }
    for et in m.event_trees.values() {
        for fe in &et.functional_events {
            match m.fault_trees.get(&fe.fault_tree) {
                None => out.push((format!("et {}/{}", et.id, fe.id), fe.fault_tree.clone())),
                Some(ft) if !ft.nodes.contains_key(&fe.gate) => {
                    out.push((format!("et {}/{}", et.id, fe.id), fe.gate.clone()))
                }
                Some(_) => {}
            }
        }
    }
    for b in m.bbns.values() {
        for n in b.nodes.values() {
            for p in &n.parents {
                if !b.nodes.contains_key(p) {
                    out.push((format!("bbn {}/{}", b.id, n.id), p.clone()));
                }
            }
        }
        for q in &b.queries {
            if !b.nodes.contains_key(q) {
                out.push((format!("bbn {}", b.id), q.clone()));
            }
        }
    }
    out
}

/// Checks every model invariant. An empty report means the model is sound.
pub fn validate_model(m: &Model) -> ValidationReport {
    let mut r = ValidationReport::default();
    for (location, id) in unresolved_references(m) {
        r.error(location, format!("unknown id `{id}`"));
    }
    for ft in m.fault_trees.values() {
        check_tree(ft, &mut r);
    }
    check_shared_events(m, &mut r);
    check_ucas(m, &mut r);
    check_ccf_groups(m, &mut r);
    check_event_trees(m, &mut r);
    for b in m.bbns.values() {
        if !is_valid_id(&b.id) {
            r.error(format!("bbn {}", b.id), String::from("malformed id"));
        }
        for id in b.nodes.keys().filter(|id| !is_valid_id(id)) {
            r.error(format!("bbn {}/{}", b.id, id), String::from("malformed id"));
        }
        r.extend(validate_bbn(b));
    }
    let cfg = &m.config;
    if !(cfg.truncation_probability.is_finite() && cfg.truncation_probability >= 0.0) {
        r.error(
            String::from("config"),
            format!("truncation {} must be >= 0", cfg.truncation_probability),
        );
    }
    if cfg.max_cutset_order == Some(0) {
        r.error(
            String::from("config"),
            String::from("max order must be positive"),
        );
    }
    if cfg.low_order_threshold == 0 {
        r.error(
            String::from("config"),
            String::from("low order threshold must be positive"),
        );
    }
    r
}

fn check_tree(ft: &FaultTree, r: &mut ValidationReport) {
    let loc = |id: &str| format!("ft {}/{}", ft.id, id);
    if !is_valid_id(&ft.id) {
        r.error(format!("ft {}", ft.id), String::from("malformed id"));
    }
    if ft.event(&ft.top).is_some() {
        r.error(loc(&ft.top), String::from("top must be a gate"));
    }
    for node in ft.nodes.values() {
        if !is_valid_id(node.id()) {
            r.error(loc(node.id()), String::from("malformed id"));
        }
        match node {
            Node::Gate(g) => {
                if g.inputs.is_empty() {
                    r.error(loc(&g.id), String::from("gate has no inputs"));
                }
                if g.inputs.contains(&g.id) {
                    r.error(loc(&g.id), String::from("gate lists itself as input"));
                }
                if let GateKind::AtLeast(k) = g.kind {
                    if k < 1 || k > g.inputs.len() {
                        r.error(
                            loc(&g.id),
                            format!(
                                "at-least k = {} must satisfy 1 <= k <= {}",
                                k,
                                g.inputs.len()
                            ),
                        );
                    }
                }
            }
            Node::Event(e) => {
                if !in_unit(e.probability) {
                    r.error(
                        loc(&e.id),
                        format!("probability {} out of [0,1]", e.probability),
                    );
                }
                match (e.kind, e.house_state) {
                    (EventKind::House, None) => {
                        r.error(loc(&e.id), String::from("house event without state"))
                    }
                    (EventKind::House, Some(s)) => {
                        if e.probability != if s { 1.0 } else { 0.0 } {
                            r.error(
                                loc(&e.id),
                                String::from("house event probability must match its state"),
                            );
                        }
                    }
                    (_, Some(_)) => {
                        r.error(loc(&e.id), String::from("only house events carry a state"))
                    }
                    (_, None) => {}
                }
                if e.kind == EventKind::Ccf && e.ccf_group.is_none() {
                    r.error(loc(&e.id), String::from("CCF event without ccf_group"));
                }
            }
        }
    }
    for chain in find_cycles(ft) {
        r.error(loc(&chain[0]), format!("cycle: {}", chain.join("→")));
    }
    let reachable = reachable(ft);
    for id in ft
        .nodes
        .keys()
        .filter(|id| !reachable.contains(id.as_str()))
    {
        r.warning(loc(id), String::from("not reachable from top"));
    }
}

fn reachable(ft: &FaultTree) -> BTreeSet<&str> {
    let mut seen = BTreeSet::new();
    let mut todo = alloc::vec![ft.top.as_str()];
    while let Some(id) = todo.pop() {
        if !seen.insert(id) {
            continue;
        }
        if let Some(g) = ft.gate(id) {
            todo.extend(g.inputs.iter().map(String::as_str));
        }
    }
    seen
}

/// One chain per back edge found by a depth-first search in id order.
fn find_cycles(ft: &FaultTree) -> Vec<Vec<String>> {
    fn dfs<'a>(
        ft: &'a FaultTree,
        id: &'a str,
        mark: &mut BTreeMap<&'a str, u8>,
        path: &mut Vec<&'a str>,
        out: &mut Vec<Vec<String>>,
    ) {
        mark.insert(id, 1);
        path.push(id);
        if let Some(g) = ft.gate(id) {
            for input in &g.inputs {
                if *input == g.id {
                    continue;
                }
                match mark.get(input.as_str()) {
                    Some(1) => {
                        let start = path.iter().position(|p| p == input).unwrap_or(0);
                        let mut chain: Vec<String> =
                            path[start..].iter().map(|s| String::from(*s)).collect();
                        chain.push(input.clone());
                        out.push(chain);
                    }
                    Some(_) => {}
                    None => dfs(ft, input, mark, path, out),
                }
            }
        }
        path.pop();
        mark.insert(id, 2);
    }
    let mut mark = BTreeMap::new();
    let mut out = Vec::new();
    let mut path = Vec::new();
    for id in ft.nodes.keys() {
        if !mark.contains_key(id.as_str()) {
            dfs(ft, id, &mut mark, &mut path, &mut out);
        }
    }
    out
}

fn check_shared_events(m: &Model, r: &mut ValidationReport) {
    let mut seen: BTreeMap<&str, (&str, f64)> = BTreeMap::new();
    for ft in m.fault_trees.values() {
        for e in ft.events() {
            match seen.get(e.id.as_str()) {
                Some((first, p)) if p.to_bits() != e.probability.to_bits() => r.error(
                    format!("ft {}/{}", ft.id, e.id),
                    format!(
                        "probability {} differs from {} in fault tree {}",
                        e.probability, p, first
                    ),
                ),
                Some(_) => {}
                None => {
                    seen.insert(&e.id, (&ft.id, e.probability));
                }
            }
        }
    }
}

fn check_ucas(m: &Model, r: &mut ValidationReport) {
    let mut ids = BTreeSet::new();
    for u in &m.uca_catalog {
        let loc = format!("uca {}", u.id);
        if !is_valid_id(&u.id) {
            r.error(loc.clone(), String::from("malformed id"));
        }
        if !ids.insert(u.id.as_str()) {
            r.error(loc.clone(), String::from("duplicate id"));
        }
        if u.category == UcaCategory::WrongDuration && !u.continuous_action {
            r.error(
                loc.clone(),
                String::from("wrong-duration applies only to continuous control actions"),
            );
        }
        if let Some(p) = u.probability {
            if !in_unit(p) {
                r.error(loc, format!("probability {p} out of [0,1]"));
            }
        }
    }
}

fn check_ccf_groups(m: &Model, r: &mut ValidationReport) {
    for g in m.ccf_groups.values() {
        let loc = format!("ccf {}", g.id);
        if !is_valid_id(&g.id) {
            r.error(loc.clone(), String::from("malformed id"));
        }
        if g.members.is_empty() {
            r.error(loc.clone(), String::from("group has no members"));
        }
        let members: BTreeSet<&str> = g.members.iter().map(String::as_str).collect();
        if members.len() != g.members.len() {
            r.error(loc.clone(), String::from("duplicate member"));
        }
        if !in_unit(g.total_probability) {
            r.error(
                loc.clone(),
                format!("total probability {} out of [0,1]", g.total_probability),
            );
        }
        let mut labels = BTreeSet::new();
        let mut beta_sum = 0.0;
        for level in &g.levels {
            let lloc = format!("{}/{}", loc, level.label);
            if !is_valid_id(&level.label) {
                r.error(lloc.clone(), String::from("malformed level label"));
            }
            if !labels.insert(level.label.as_str()) {
                r.error(lloc.clone(), String::from("duplicate level label"));
            }
            if !in_unit(level.beta) {
                r.error(lloc.clone(), format!("beta {} out of [0,1]", level.beta));
            }
            beta_sum += level.beta;
            let mut placed = BTreeSet::new();
            for scope in &level.scope {
                if scope.is_empty() {
                    r.error(lloc.clone(), String::from("empty scope"));
                }
                for mbr in scope {
                    if !members.contains(mbr.as_str()) {
                        r.error(
                            lloc.clone(),
                            format!("scope member `{mbr}` is not a group member"),
                        );
                    }
                    if !placed.insert(mbr.as_str()) {
                        r.error(
                            lloc.clone(),
                            format!("`{mbr}` appears in more than one scope"),
                        );
                    }
                }
            }
        }
        if beta_sum > 1.0 {
            r.error(loc, format!("beta factors sum to {beta_sum}, exceeding 1"));
        }
    }
}

fn check_event_trees(m: &Model, r: &mut ValidationReport) {
    for et in m.event_trees.values() {
        let loc = format!("et {}", et.id);
        for id in [&et.id, &et.initiating_event.id] {
            if !is_valid_id(id) {
                r.error(loc.clone(), format!("malformed id `{id}`"));
            }
        }
        let f = et.initiating_event.frequency;
        if !(f.is_finite() && f >= 0.0) {
            r.error(
                loc.clone(),
                format!("initiating event frequency {f} must be >= 0"),
            );
        }
        let mut fe_ids = BTreeSet::new();
        for fe in &et.functional_events {
            if !is_valid_id(&fe.id) {
                r.error(loc.clone(), format!("malformed id `{}`", fe.id));
            }
            if !fe_ids.insert(fe.id.as_str()) {
                r.error(
                    loc.clone(),
                    format!("duplicate functional event `{}`", fe.id),
                );
            }
        }
        let mut seq_ids = BTreeSet::new();
        for (i, s) in et.sequences.iter().enumerate() {
            let sloc = format!("{}/{}", loc, s.id);
            if !is_valid_id(&s.id) {
                r.error(sloc.clone(), String::from("malformed id"));
            }
            if !seq_ids.insert(s.id.as_str()) {
                r.error(sloc.clone(), String::from("duplicate sequence id"));
            }
            if s.path.len() > et.functional_events.len() {
                r.error(
                    sloc.clone(),
                    format!(
                        "path has {} branches for {} functional events",
                        s.path.len(),
                        et.functional_events.len()
                    ),
                );
            }
            if let Some(p) = s.probability {
                if !(p.is_finite() && p >= 0.0) {
                    r.error(
                        sloc.clone(),
                        format!("injected probability {p} must be >= 0"),
                    );
                }
            }
            for other in &et.sequences[..i] {
                if paths_overlap(&s.path, &other.path) {
                    r.error(
                        sloc.clone(),
                        format!("path overlaps sequence `{}`", other.id),
                    );
                }
            }
        }
    }
}

//! Binary Bayesian belief networks for software failure estimation.
//!
//! Root nodes carry human error probabilities for software life-cycle
//! activities; child nodes carry conditional failure tables. Marginals are
//! computed exactly by variable elimination, and the estimate for a software
//! failure is split into individual and CCF parts with the beta-factor model.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::ccf::beta_split;
use crate::error::{Error, Result};
use crate::validate::{Finding, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum State {
    Ok,
    Fail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BbnNode {
    pub id: String,
    pub parents: Vec<String>,
    /// `P(fail | parents)`, one entry per parent-state combination. The first
    /// parent is the most significant position and `ok` sorts before `fail`.
    pub cpt: Vec<f64>,
}

impl BbnNode {
    pub fn root(id: impl Into<String>, prior: f64) -> Self {
        Self {
            id: id.into(),
            parents: Vec::new(),
            cpt: vec![prior],
        }
    }

    pub fn child<I, S>(id: impl Into<String>, parents: I, cpt: Vec<f64>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            id: id.into(),
            parents: parents.into_iter().map(Into::into).collect(),
            cpt,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaLevel {
    pub label: String,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BahamasConfig {
    pub query: String,
    /// Multiplier taking the generic estimate to the specific one.
    pub adjustment_factor: f64,
    pub levels: Vec<BetaLevel>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Bbn {
    pub id: String,
    pub nodes: BTreeMap<String, BbnNode>,
    /// Nodes designated as failure outputs.
    pub queries: Vec<String>,
    pub bahamas: Option<BahamasConfig>,
}

impl Bbn {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            ..Self::default()
        }
    }

    pub fn insert(&mut self, node: BbnNode) {
        self.nodes.insert(node.id.clone(), node);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BahamasResult {
    pub generic_failure_probability: f64,
    pub specific_failure_probability: f64,
    pub individual_probability: f64,
    /// CCF probability per level label, in level order.
    pub ccf_probabilities: Vec<(String, f64)>,
    /// Warnings, e.g. clamping of the specific probability.
    pub findings: Vec<Finding>,
}

/// Structural findings: missing parents, cycles, table sizes and ranges.
pub fn validate_bbn(b: &Bbn) -> ValidationReport {
    let mut r = ValidationReport::default();
    let loc = |node: &str| format!("bbn {}/{}", b.id, node);
    for node in b.nodes.values() {
        for p in &node.parents {
            if !b.nodes.contains_key(p) {
                r.error(loc(&node.id), format!("unknown parent `{p}`"));
            }
        }
        let distinct: BTreeSet<&String> = node.parents.iter().collect();
        if distinct.len() != node.parents.len() {
            r.error(loc(&node.id), String::from("duplicate parent"));
        }
        let expected = 1usize.checked_shl(node.parents.len() as u32).unwrap_or(0);
        if node.cpt.len() != expected {
            r.error(
                loc(&node.id),
                format!("cpt has {} entries, expected {}", node.cpt.len(), expected),
            );
        }
        for (i, p) in node.cpt.iter().enumerate() {
            if !(0.0..=1.0).contains(p) {
                r.error(
                    loc(&node.id),
                    format!("cpt[{i}] = {p}: probability out of [0,1]"),
                );
            }
        }
    }
    for q in &b.queries {
        if !b.nodes.contains_key(q) {
            r.error(format!("bbn {}", b.id), format!("unknown query node `{q}`"));
        }
    }
    if let Some(cfg) = &b.bahamas {
        if !b.nodes.contains_key(&cfg.query) {
            r.error(
                format!("bbn {}/bahamas", b.id),
                format!("unknown query node `{}`", cfg.query),
            );
        }
        if !(cfg.adjustment_factor.is_finite() && cfg.adjustment_factor >= 0.0) {
            r.error(
                format!("bbn {}/bahamas", b.id),
                format!("adjustment factor {} must be >= 0", cfg.adjustment_factor),
            );
        }
        let betas: Vec<f64> = cfg.levels.iter().map(|l| l.beta).collect();
        if let Err(e) = beta_split(0.0, &betas) {
            r.error(format!("bbn {}/bahamas", b.id), format!("{e}"));
        }
    }
    if let Some(chain) = find_cycle(b) {
        r.error(
            format!("bbn {}", b.id),
            format!("cycle: {}", chain.join("→")),
        );
    }
    r
}

fn find_cycle(b: &Bbn) -> Option<Vec<String>> {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut mark: BTreeMap<&str, u8> = BTreeMap::new();
    let mut path: Vec<&str> = Vec::new();
    fn dfs<'a>(
        b: &'a Bbn,
        id: &'a str,
        mark: &mut BTreeMap<&'a str, u8>,
        path: &mut Vec<&'a str>,
    ) -> Option<Vec<String>> {
        match mark.get(id) {
            Some(2) => return None,
            Some(1) => {
                let start = path.iter().position(|p| *p == id).unwrap_or(0);
                let mut chain: Vec<String> =
                    path[start..].iter().map(|s| String::from(*s)).collect();
                chain.push(String::from(id));
                return Some(chain);
            }
            _ => {}
        }
        mark.insert(id, 1);
        path.push(id);
        if let Some(node) = b.nodes.get(id) {
            for p in &node.parents {
                if b.nodes.contains_key(p) {
                    if let Some(c) = dfs(b, p, mark, path) {
                        return Some(c);
                    }
                }
            }
        }
        path.pop();
        mark.insert(id, 2);
        None
    }
    for id in b.nodes.keys() {
        if let Some(c) = dfs(b, id, &mut mark, &mut path) {
            return Some(c);
        }
    }
    None
}

/// A table over binary variables; bit `i` of a row index is the state of
/// `vars[i]` (1 = fail). `vars` is sorted.
#[derive(Debug, Clone)]
struct Factor {
    vars: Vec<usize>,
    table: Vec<f64>,
}

impl Factor {
    fn from_node(var: usize, parents: &[usize], cpt: &[f64]) -> Self {
        let mut vars: Vec<usize> = parents.to_vec();
        vars.push(var);
        vars.sort_unstable();
        let pos = |v: usize| vars.iter().position(|x| *x == v).unwrap();
        let own = pos(var);
        let parent_pos: Vec<usize> = parents.iter().map(|p| pos(*p)).collect();
        let k = parents.len();
        let table = (0..1usize << vars.len())
            .map(|row| {
                let mut cpt_index = 0;
                for (i, pp) in parent_pos.iter().enumerate() {
                    if row >> pp & 1 == 1 {
                        cpt_index |= 1 << (k - 1 - i);
                    }
                }
                let p_fail = cpt[cpt_index];
                if row >> own & 1 == 1 {
                    p_fail
                } else {
                    1.0 - p_fail
                }
            })
            .collect();
        Self { vars, table }
    }

    /// Row index in a factor over `onto`; variables not in `onto` are ignored.
    fn project(&self, row: usize, onto: &[usize]) -> usize {
        let mut out = 0;
        for (i, v) in self.vars.iter().enumerate() {
            if row >> i & 1 == 1 {
                if let Some(j) = onto.iter().position(|x| x == v) {
                    out |= 1 << j;
                }
            }
        }
        out
    }

    fn product(&self, other: &Factor) -> Factor {
        let vars: Vec<usize> = self
            .vars
            .iter()
            .chain(other.vars.iter())
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let map = |f: &Factor| -> Vec<usize> {
            f.vars
                .iter()
                .map(|v| vars.iter().position(|x| x == v).unwrap())
                .collect()
        };
        let (ma, mb) = (map(self), map(other));
        let pick = |row: usize, m: &[usize]| {
            m.iter()
                .enumerate()
                .fold(0, |acc, (i, bit)| acc | ((row >> bit & 1) << i))
        };
        let table = (0..1usize << vars.len())
            .map(|row| self.table[pick(row, &ma)] * other.table[pick(row, &mb)])
            .collect();
        Factor { vars, table }
    }

    fn sum_out(&self, var: usize) -> Factor {
        let vars: Vec<usize> = self.vars.iter().copied().filter(|v| *v != var).collect();
        let mut table = vec![0.0; 1 << vars.len()];
        for (row, value) in self.table.iter().enumerate() {
            table[self.project(row, &vars)] += value;
        }
        Factor { vars, table }
    }

    /// Fixes `var` to `state`, removing it from the scope.
    fn reduce(&self, var: usize, state: State) -> Factor {
        let Some(i) = self.vars.iter().position(|v| *v == var) else {
            return self.clone();
        };
        let want = usize::from(state == State::Fail);
        let vars: Vec<usize> = self.vars.iter().copied().filter(|v| *v != var).collect();
        let mut table = vec![0.0; 1 << vars.len()];
        for (row, value) in self.table.iter().enumerate() {
            if row >> i & 1 == want {
                table[self.project(row, &vars)] = *value;
            }
        }
        Factor { vars, table }
    }
}

struct Indexed<'a> {
    ids: Vec<&'a str>,
    parents: Vec<Vec<usize>>,
}

impl<'a> Indexed<'a> {
    fn new(b: &'a Bbn) -> Result<Self> {
        let ids: Vec<&str> = b.nodes.keys().map(String::as_str).collect();
        let index = |id: &str| {
            ids.binary_search(&id)
                .map_err(|_| Error::UnknownId(String::from(id)))
        };
        let parents = b
            .nodes
            .values()
            .map(|n| {
                n.parents
                    .iter()
                    .map(|p| index(p))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { ids, parents })
    }

    fn index(&self, id: &str) -> Result<usize> {
        self.ids
            .binary_search(&id)
            .map_err(|_| Error::UnknownId(String::from(id)))
    }

    /// `roots` and all their ancestors.
    fn ancestors(&self, roots: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut todo: Vec<usize> = roots.into_iter().collect();
        while let Some(v) = todo.pop() {
            if seen.insert(v) {
                todo.extend(self.parents[v].iter().copied());
            }
        }
        seen
    }
}

fn check_structure(b: &Bbn) -> Result<()> {
    let report = validate_bbn(b);
    match report.findings.into_iter().find(|f| f.is_error()) {
        Some(f) => Err(Error::Invalid(format!("{}: {}", f.location, f.message))),
        None => Ok(()),
    }
}

/// `P(query = fail | evidence)`, eliminating variables in min-degree order.
pub fn infer_marginal(b: &Bbn, query: &str, evidence: &BTreeMap<String, State>) -> Result<f64> {
    infer(b, query, evidence, None)
}

/// As [`infer_marginal`], with an explicit elimination order. Variables not
/// listed are eliminated afterwards in min-degree order.
pub fn infer_marginal_with_order(
    b: &Bbn,
    query: &str,
    evidence: &BTreeMap<String, State>,
    order: &[&str],
) -> Result<f64> {
    infer(b, query, evidence, Some(order))
}

fn infer(
    b: &Bbn,
    query: &str,
    evidence: &BTreeMap<String, State>,
    order: Option<&[&str]>,
) -> Result<f64> {
    check_structure(b)?;
    let ix = Indexed::new(b)?;
    let q = ix.index(query)?;
    let mut ev: Vec<(usize, State)> = Vec::with_capacity(evidence.len());
    for (id, s) in evidence {
        ev.push((ix.index(id)?, *s));
    }

    // only ancestors of the query and the evidence matter
    let relevant = ix.ancestors(core::iter::once(q).chain(ev.iter().map(|(v, _)| *v)));
    let nodes: Vec<&BbnNode> = b.nodes.values().collect();
    let mut factors: Vec<Factor> = relevant
        .iter()
        .map(|v| Factor::from_node(*v, &ix.parents[*v], &nodes[*v].cpt))
        .collect();
    for (v, s) in &ev {
        factors = factors.iter().map(|f| f.reduce(*v, *s)).collect();
    }

    let mut hidden: BTreeSet<usize> = relevant.clone();
    hidden.remove(&q);
    for (v, _) in &ev {
        hidden.remove(v);
    }
    let mut explicit: Vec<usize> = Vec::new();
    if let Some(order) = order {
        for id in order {
            let v = ix.index(id)?;
            if hidden.contains(&v) && !explicit.contains(&v) {
                explicit.push(v);
            }
        }
    }
    let mut explicit = explicit.into_iter();
    while !hidden.is_empty() {
        let var = explicit
            .next()
            .unwrap_or_else(|| min_degree(&factors, &hidden));
        hidden.remove(&var);
        let (with, without): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.vars.contains(&var));
        factors = without;
        if let Some(joint) = with.into_iter().reduce(|a, b| a.product(&b)) {
            factors.push(joint.sum_out(var));
        }
    }

    let joint = factors
        .into_iter()
        .reduce(|a, b| a.product(&b))
        .unwrap_or(Factor {
            vars: Vec::new(),
            table: vec![1.0],
        });
    let (p_ok, p_fail) = match joint.vars.as_slice() {
        [] => {
            // query was observed
            let state = ev.iter().find(|(v, _)| *v == q).map(|(_, s)| *s);
            let z = joint.table[0];
            match state {
                Some(State::Fail) => (0.0, z),
                _ => (z, 0.0),
            }
        }
        _ => (joint.table[0], joint.table[1]),
    };
    let z = p_ok + p_fail;
    if z.is_nan() || z <= 0.0 {
        return Err(Error::ZeroProbabilityEvidence);
    }
    Ok(p_fail / z)
}

fn min_degree(factors: &[Factor], hidden: &BTreeSet<usize>) -> usize {
    let mut best = (usize::MAX, usize::MAX);
    for v in hidden {
        let neighbours: BTreeSet<usize> = factors
            .iter()
            .filter(|f| f.vars.contains(v))
            .flat_map(|f| f.vars.iter().copied())
            .filter(|x| x != v)
            .collect();
        if (neighbours.len(), *v) < best {
            best = (neighbours.len(), *v);
        }
    }
    best.1
}

/// Generic estimate from the network, specific estimate by the adjustment
/// factor (clamped to 1 with a warning), then the beta-factor split.
pub fn bahamas_estimate(
    b: &Bbn,
    query: &str,
    adjustment_factor: f64,
    levels: &[BetaLevel],
) -> Result<BahamasResult> {
    if !(adjustment_factor.is_finite() && adjustment_factor >= 0.0) {
        return Err(Error::InvalidNumber {
            what: String::from("adjustment factor"),
            value: adjustment_factor,
        });
    }
    let generic = infer_marginal(b, query, &BTreeMap::new())?;
    let mut findings = Vec::new();
    let mut specific = generic * adjustment_factor;
    if specific > 1.0 {
        findings.push(Finding::warning(
            format!("bbn {}/{}", b.id, query),
            format!("specific probability {specific} clamped to 1"),
        ));
        specific = 1.0;
    }
    let betas: Vec<f64> = levels.iter().map(|l| l.beta).collect();
    let split = beta_split(specific, &betas)?;
    Ok(BahamasResult {
        generic_failure_probability: generic,
        specific_failure_probability: specific,
        individual_probability: split.independent,
        ccf_probabilities: levels
            .iter()
            .map(|l| l.label.clone())
            .zip(split.shares)
            .collect(),
        findings,
    })
}

/// Runs [`bahamas_estimate`] with the network's own configuration.
pub fn bahamas_configured(b: &Bbn) -> Result<BahamasResult> {
    let cfg = b
        .bahamas
        .as_ref()
        .ok_or_else(|| Error::Invalid(format!("bbn `{}` has no bahamas configuration", b.id)))?;
    bahamas_estimate(b, &cfg.query, cfg.adjustment_factor, &cfg.levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn or_net(p: f64) -> Bbn {
        let mut b = Bbn::new("N");
        b.insert(BbnNode::root("A", p));
        b.insert(BbnNode::root("B", p));
        b.insert(BbnNode::child("C", ["A", "B"], vec![0.0, 1.0, 1.0, 1.0]));
        b.queries.push(String::from("C"));
        b
    }

    #[test]
    fn root_prior() {
        let mut b = Bbn::new("N");
        b.insert(BbnNode::root("R", 0.01));
        assert!(validate_bbn(&b).is_empty());
        assert_eq!(infer_marginal(&b, "R", &BTreeMap::new()).unwrap(), 0.01);
    }

    #[test]
    fn deterministic_or() {
        let p = infer_marginal(&or_net(0.1), "C", &BTreeMap::new()).unwrap();
        assert!((p - 0.19).abs() < 1e-15);
    }

    #[test]
    fn evidence_conditions() {
        let b = or_net(0.1);
        let mut ev = BTreeMap::new();
        ev.insert(String::from("C"), State::Fail);
        let p = infer_marginal(&b, "A", &ev).unwrap();
        assert!((p - 0.1 / 0.19).abs() < 1e-15);
        assert_eq!(infer_marginal(&b, "C", &ev).unwrap(), 1.0);
    }

    #[test]
    fn zero_probability_evidence() {
        let b = or_net(0.0);
        let mut ev = BTreeMap::new();
        ev.insert(String::from("C"), State::Fail);
        assert_eq!(
            infer_marginal(&b, "A", &ev),
            Err(Error::ZeroProbabilityEvidence)
        );
    }

    #[test]
    fn asymmetric_cpt_order() {
        // P(C=fail | A=ok,B=fail) = 0.7, P(C=fail | A=fail,B=ok) = 0.2
        let mut b = Bbn::new("N");
        b.insert(BbnNode::root("A", 1.0));
        b.insert(BbnNode::root("B", 0.0));
        b.insert(BbnNode::child("C", ["A", "B"], vec![0.0, 0.7, 0.2, 0.9]));
        let p = infer_marginal(&b, "C", &BTreeMap::new()).unwrap();
        assert!((p - 0.2).abs() < 1e-15);
        // parents listed against id order
        b.insert(BbnNode::child("C", ["B", "A"], vec![0.0, 0.7, 0.2, 0.9]));
        let p = infer_marginal(&b, "C", &BTreeMap::new()).unwrap();
        assert!((p - 0.7).abs() < 1e-15);
    }

    #[test]
    fn validation_findings() {
        let mut b = Bbn::new("N");
        b.insert(BbnNode::child("X", ["X"], vec![0.1, 0.2]));
        let r = validate_bbn(&b);
        assert!(r.findings.iter().any(|f| f.message.starts_with("cycle")));

        let mut b = Bbn::new("N");
        b.insert(BbnNode::root("A", 0.1));
        b.insert(BbnNode::root("B", 0.1));
        b.insert(BbnNode::child("C", ["A", "B"], vec![0.0, 1.0, 1.0]));
        let r = validate_bbn(&b);
        assert_eq!(r.findings.len(), 1);
        assert!(r.findings[0].message.contains("expected 4"));
    }

    #[test]
    fn bahamas_identity_and_zero() {
        let b = or_net(0.1);
        let r = bahamas_estimate(&b, "C", 1.0, &[]).unwrap();
        assert_eq!(r.individual_probability, r.generic_failure_probability);

        let b = or_net(0.0);
        let levels = [BetaLevel {
            label: String::from("all"),
            beta: 0.05,
        }];
        let r = bahamas_estimate(&b, "C", 3.0, &levels).unwrap();
        assert_eq!(r.specific_failure_probability, 0.0);
        assert_eq!(r.individual_probability, 0.0);
        assert_eq!(r.ccf_probabilities[0].1, 0.0);
    }

    #[test]
    fn bahamas_clamps_with_warning() {
        let r = bahamas_estimate(&or_net(0.5), "C", 10.0, &[]).unwrap();
        assert_eq!(r.specific_failure_probability, 1.0);
        assert_eq!(r.findings.len(), 1);
        assert!(bahamas_estimate(&or_net(0.5), "C", -1.0, &[]).is_err());
    }
}

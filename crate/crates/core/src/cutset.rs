//! Minimal cut sets, top-event quantification and importance measures.
//!
//! Cut sets are generated top-down in the MOCUS style: each row holds the
//! basic events collected so far plus the gates still to expand. AND gates
//! expand in place, OR and at-least gates fork the row. A row whose events
//! already contain a finished cut set is discarded, and finished rows are
//! merged into the result with absorption, so the result is minimal.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::exact::exact_probability;
use crate::logic::{Input, Lit, Logic};
use crate::model::{AnalysisConfig, FaultTree, GateKind, Method};

/// At-least gates wider than this are refused by the expansion.
pub const MAX_AT_LEAST_INPUTS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct CutSet {
    /// Sorted, duplicate-free basic event ids.
    pub events: Vec<String>,
    /// Product of the member probabilities, multiplied in id order.
    pub probability: f64,
}

impl CutSet {
    pub fn order(&self) -> usize {
        self.events.len()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.events.binary_search_by(|e| e.as_str().cmp(id)).is_ok()
    }

    /// True when every event of `other` is in `self`.
    pub fn is_superset_of(&self, other: &[String]) -> bool {
        other.iter().all(|e| self.contains(e))
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.probability.total_cmp(&self.probability))
            .then_with(|| self.events.cmp(&other.events))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutSetList {
    pub cutsets: Vec<CutSet>,
    /// Minimal sets removed by the probability or order cutoff.
    pub truncated_count: usize,
    pub truncation_probability: f64,
    pub max_order: Option<usize>,
    pub source_top: String,
    /// Set when rows were pruned during expansion; `truncated_count` then
    /// only counts the final cutoff.
    pub expansion_pruned: bool,
}

impl CutSetList {
    pub fn new(source_top: impl Into<String>, cutsets: Vec<CutSet>) -> Self {
        let mut list = Self {
            cutsets,
            truncated_count: 0,
            truncation_probability: 0.0,
            max_order: None,
            source_top: source_top.into(),
            expansion_pruned: false,
        };
        list.sort_canonical();
        list
    }

    pub fn len(&self) -> usize {
        self.cutsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cutsets.is_empty()
    }

    /// Ascending order, then descending probability, then lexicographic ids.
    pub fn sort_canonical(&mut self) {
        self.cutsets.sort_by(CutSet::canonical_cmp);
    }

    /// Drops sets below `threshold` or above `max_order`, adding the number
    /// dropped to `truncated_count`.
    pub fn truncate(&mut self, threshold: f64, max_order: Option<usize>) {
        let before = self.cutsets.len();
        self.cutsets
            .retain(|c| c.probability >= threshold && max_order.is_none_or(|m| c.order() <= m));
        self.truncated_count += before - self.cutsets.len();
        self.truncation_probability = threshold;
        self.max_order = max_order;
    }

    /// Cut-set count per order.
    pub fn histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for c in &self.cutsets {
            *h.entry(c.order()).or_insert(0) += 1;
        }
        h
    }

    pub fn min_order(&self) -> Option<usize> {
        self.cutsets.iter().map(CutSet::order).min()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceResult {
    pub event: String,
    pub fussell_vesely: f64,
}

pub(crate) struct ExpansionLimits {
    pub max_rows: usize,
    /// In-expansion cutoff, when enabled.
    pub prune: Option<(f64, Option<usize>)>,
}

impl ExpansionLimits {
    pub fn from_config(cfg: &AnalysisConfig) -> Self {
        Self {
            max_rows: cfg.max_intermediate_sets,
            prune: cfg
                .prune_during_expansion
                .then_some((cfg.truncation_probability, cfg.max_cutset_order)),
        }
    }
}

struct Row {
    events: Vec<u32>,
    pending: Vec<u32>,
}

impl Row {
    fn add(&mut self, input: Input) {
        match input {
            Input::Event(e) => {
                if let Err(pos) = self.events.binary_search(&e) {
                    self.events.insert(pos, e);
                }
            }
            Input::Gate(g) => {
                if !self.pending.contains(&g) {
                    self.pending.push(g);
                }
            }
        }
    }
}

fn is_subset(small: &[u32], big: &[u32]) -> bool {
    if small.len() > big.len() {
        return false;
    }
    let mut it = big.iter();
    'outer: for s in small {
        for b in it.by_ref() {
            match b.cmp(s) {
                Ordering::Less => continue,
                Ordering::Equal => continue 'outer,
                Ordering::Greater => return false,
            }
        }
        return false;
    }
    true
}

fn absorbed(results: &[Vec<u32>], events: &[u32]) -> bool {
    results.iter().any(|r| is_subset(r, events))
}

fn insert_minimal(results: &mut Vec<Vec<u32>>, set: Vec<u32>) {
    if absorbed(results, &set) {
        return;
    }
    results.retain(|r| !is_subset(&set, r));
    results.push(set);
}

/// Minimal cut sets of `logic` as sorted event-index lists, plus whether any
/// partial row was pruned.
pub(crate) fn expand(logic: &Logic, limits: &ExpansionLimits) -> Result<(Vec<Vec<u32>>, bool)> {
    let start = match logic.root {
        Lit::False => return Ok((Vec::new(), false)),
        Lit::True => return Err(Error::TopAlwaysTrue(String::new())),
        Lit::Node(Input::Event(e)) => return Ok((alloc::vec![alloc::vec![e]], false)),
        Lit::Node(Input::Gate(g)) => g,
    };
    let probability = |events: &[u32]| {
        events
            .iter()
            .fold(1.0, |acc, e| acc * logic.events[*e as usize].probability)
    };

    let mut results: Vec<Vec<u32>> = Vec::new();
    let mut pruned = false;
    let mut stack = alloc::vec![Row {
        events: Vec::new(),
        pending: alloc::vec![start],
    }];
    while let Some(mut row) = stack.pop() {
        if absorbed(&results, &row.events) {
            continue;
        }
        if let Some((threshold, max_order)) = limits.prune {
            if probability(&row.events) < threshold
                || max_order.is_some_and(|m| row.events.len() > m)
            {
                pruned = true;
                continue;
            }
        }
        let Some(g) = row.pending.pop() else {
            insert_minimal(&mut results, row.events);
            continue;
        };
        let gate = &logic.gates[g as usize];
        match gate.kind {
            GateKind::And => {
                for input in &gate.inputs {
                    row.add(*input);
                }
                stack.push(row);
            }
            GateKind::Or => {
                // reversed so the first input is expanded first
                for input in gate.inputs.iter().rev() {
                    let mut fork = Row {
                        events: row.events.clone(),
                        pending: row.pending.clone(),
                    };
                    fork.add(*input);
                    stack.push(fork);
                }
            }
            GateKind::AtLeast(k) => {
                let n = gate.inputs.len();
                if n > MAX_AT_LEAST_INPUTS {
                    return Err(Error::GateTooWide {
                        gate: gate.id.clone(),
                        n,
                        limit: MAX_AT_LEAST_INPUTS,
                    });
                }
                let mut combos = Vec::new();
                combinations(n, k, &mut |c| combos.push(c.to_vec()));
                for combo in combos.iter().rev() {
                    let mut fork = Row {
                        events: row.events.clone(),
                        pending: row.pending.clone(),
                    };
                    for i in combo {
                        fork.add(gate.inputs[*i]);
                    }
                    stack.push(fork);
                }
            }
        }
        if stack.len() + results.len() > limits.max_rows {
            return Err(Error::ResourceLimit {
                cap: limits.max_rows,
            });
        }
    }
    Ok((results, pruned))
}

/// Calls `f` with every `k`-subset of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Untruncated minimal cut sets of `logic`, canonically ordered.
pub(crate) fn logic_cut_sets(
    logic: &Logic,
    top: &str,
    limits: &ExpansionLimits,
) -> Result<CutSetList> {
    let (sets, pruned) = expand(logic, limits).map_err(|e| match e {
        Error::TopAlwaysTrue(_) => Error::TopAlwaysTrue(String::from(top)),
        other => other,
    })?;
    let cutsets = sets
        .into_iter()
        .map(|idx| CutSet {
            probability: idx
                .iter()
                .fold(1.0, |acc, e| acc * logic.events[*e as usize].probability),
            events: idx
                .iter()
                .map(|e| logic.events[*e as usize].id.clone())
                .collect(),
        })
        .collect();
    let mut list = CutSetList::new(top, cutsets);
    list.expansion_pruned = pruned;
    Ok(list)
}

/// Minimal cut sets of the tree's top event, truncated per `cfg`.
pub fn minimal_cut_sets(ft: &FaultTree, cfg: &AnalysisConfig) -> Result<CutSetList> {
    minimal_cut_sets_at(ft, &ft.top, cfg)
}

/// Minimal cut sets of gate (or event) `top` within `ft`, truncated per `cfg`.
pub fn minimal_cut_sets_at(ft: &FaultTree, top: &str, cfg: &AnalysisConfig) -> Result<CutSetList> {
    let logic = Logic::from_tree(ft, top)?;
    let mut list = logic_cut_sets(&logic, top, &ExpansionLimits::from_config(cfg))?;
    list.truncate(cfg.truncation_probability, cfg.max_cutset_order);
    Ok(list)
}

/// Exact probability of the top event under independence. Refuses trees
/// with more basic events than `cfg.exact_event_limit`.
pub fn exact_top_probability(ft: &FaultTree, cfg: &AnalysisConfig) -> Result<f64> {
    exact_probability_at(ft, &ft.top, cfg)
}

pub fn exact_probability_at(ft: &FaultTree, top: &str, cfg: &AnalysisConfig) -> Result<f64> {
    let logic = Logic::from_tree(ft, top)?;
    exact_probability(&logic, cfg.exact_event_limit)
}

/// Sum of cut-set probabilities. Not clamped.
pub fn rare_event_probability(cs: &CutSetList) -> f64 {
    cs.cutsets.iter().map(|c| c.probability).sum()
}

/// Min-cut upper bound, `1 − Π(1 − P(cut set))`, accumulated as
/// `u + p − u·p` so small values keep their precision.
pub fn mcub_probability(cs: &CutSetList) -> f64 {
    cs.cutsets
        .iter()
        .fold(0.0, |u, c| u + c.probability - u * c.probability)
}

/// Probability of `top` in `ft` by the requested method. Cut-set methods
/// apply the configured truncation.
pub fn top_probability(
    ft: &FaultTree,
    top: &str,
    cfg: &AnalysisConfig,
    method: Method,
) -> Result<f64> {
    match method {
        Method::Exact => exact_probability_at(ft, top, cfg),
        Method::RareEvent => Ok(rare_event_probability(&minimal_cut_sets_at(ft, top, cfg)?)),
        Method::Mcub => Ok(mcub_probability(&minimal_cut_sets_at(ft, top, cfg)?)),
    }
}

/// Fussell-Vesely importance of every event in `cs`, largest first. Uses the
/// rare-event sum as denominator.
pub fn fussell_vesely(cs: &CutSetList) -> Result<Vec<ImportanceResult>> {
    let total = rare_event_probability(cs);
    if cs.is_empty() || total.is_nan() || total <= 0.0 {
        return Err(Error::EmptyCutSets);
    }
    let mut sums: BTreeMap<&str, f64> = BTreeMap::new();
    for c in &cs.cutsets {
        for e in &c.events {
            *sums.entry(e.as_str()).or_insert(0.0) += c.probability;
        }
    }
    let mut out: Vec<ImportanceResult> = sums
        .into_iter()
        .map(|(event, s)| ImportanceResult {
            event: String::from(event),
            fussell_vesely: s / total,
        })
        .collect();
    out.sort_by(|a, b| {
        b.fussell_vesely
            .total_cmp(&a.fussell_vesely)
            .then_with(|| a.event.cmp(&b.event))
    });
    Ok(out)
}

/// Events forming order-1 cut sets, in list order.
pub fn find_spofs(cs: &CutSetList) -> Vec<String> {
    cs.cutsets
        .iter()
        .filter(|c| c.order() == 1)
        .map(|c| c.events[0].clone())
        .collect()
}

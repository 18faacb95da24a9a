//! Event tree quantification and before/after comparison.
//!
//! Sequence frequencies use the independent-branch product model by
//! default: the initiating event frequency times the failure probability of
//! each failed branch and the success probability of each successful one.
//! Sequence cut sets are generated from the conjunction of the initiating
//! event marker and the failed branches' fault trees, with cut sets that
//! would also fail a successful branch deleted.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::cutset::{logic_cut_sets, top_probability, CutSetList, ExpansionLimits};
use crate::error::{Error, Result};
use crate::logic::{Lit, Logic, LogicBuilder};
use crate::model::{AnalysisConfig, GateKind, Method, Model};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    Success,
    Failure,
    /// The functional event is not questioned on this path.
    Bypass,
}

impl Branch {
    pub fn as_char(self) -> char {
        match self {
            Branch::Success => 'S',
            Branch::Failure => 'F',
            Branch::Bypass => '-',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'S' => Some(Branch::Success),
            'F' => Some(Branch::Failure),
            '-' => Some(Branch::Bypass),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitiatingEvent {
    pub id: String,
    /// Per reactor-year.
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalEvent {
    pub id: String,
    pub fault_tree: String,
    pub gate: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub id: String,
    /// One entry per functional event, in order; may stop early when later
    /// events are not questioned.
    pub path: Vec<Branch>,
    pub end_state: String,
    /// Frequency supplied directly instead of computed.
    pub probability: Option<f64>,
    /// Cut-set count supplied directly instead of computed.
    pub cutset_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventTree {
    pub id: String,
    pub initiating_event: InitiatingEvent,
    pub functional_events: Vec<FunctionalEvent>,
    pub sequences: Vec<Sequence>,
}

impl EventTree {
    pub fn sequence(&self, id: &str) -> Option<&Sequence> {
        self.sequences.iter().find(|s| s.id == id)
    }
}

/// Two paths overlap unless some functional event is questioned on both
/// and takes different branches.
pub fn paths_overlap(a: &[Branch], b: &[Branch]) -> bool {
    let n = a.len().max(b.len());
    !(0..n).any(|i| {
        matches!(
            (a.get(i), b.get(i)),
            (Some(Branch::Success), Some(Branch::Failure))
                | (Some(Branch::Failure), Some(Branch::Success))
        )
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceResult {
    pub id: String,
    /// Per reactor-year.
    pub probability: f64,
    pub cutset_count: Option<usize>,
    pub end_state: String,
    pub below_truncation: bool,
    /// Whether the sequence matches the end-state filter.
    pub included: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtResult {
    pub event_tree: String,
    pub end_state: Option<String>,
    /// Ordered by sequence id.
    pub sequences: Vec<SequenceResult>,
    /// Sum over included sequences.
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub sequence: String,
    pub original: f64,
    pub improved: f64,
    /// `(improved − original) / original`; zero when unchanged, `None` when
    /// the original is zero and the value changed.
    pub delta_fraction: Option<f64>,
    pub original_count: Option<usize>,
    pub improved_count: Option<usize>,
    /// Share of the improved total.
    pub contribution: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub event_tree: String,
    pub rows: Vec<ComparisonRow>,
    pub total: ComparisonRow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceCutSets {
    pub cutsets: CutSetList,
    /// Sets removed because they contain a cut set of a successful branch.
    pub deleted_by_success: usize,
}

fn tree_of<'a>(
    m: &'a Model,
    et: &EventTree,
    fe: usize,
) -> Result<(&'a crate::model::FaultTree, &'a str)> {
    let f = et.functional_events.get(fe).ok_or_else(|| {
        Error::Invalid(format!(
            "event tree `{}` has no functional event {fe}",
            et.id
        ))
    })?;
    let ft = m
        .fault_trees
        .get(&f.fault_tree)
        .ok_or_else(|| Error::UnknownId(f.fault_tree.clone()))?;
    let gate = ft
        .nodes
        .get_key_value(&f.gate)
        .map(|(k, _)| k.as_str())
        .ok_or_else(|| Error::UnknownId(f.gate.clone()))?;
    Ok((ft, gate))
}

fn event_tree<'a>(m: &'a Model, id: &str) -> Result<&'a EventTree> {
    m.event_trees
        .get(id)
        .ok_or_else(|| Error::UnknownId(String::from(id)))
}

/// Failure probability of functional event `fe` (its linked top) by `method`.
pub fn branch_probability(m: &Model, et: &EventTree, fe: usize, method: Method) -> Result<f64> {
    let (ft, gate) = tree_of(m, et, fe)?;
    top_probability(ft, gate, &m.config, method)
}

/// Product-model frequency of a path given per-event failure probabilities.
pub fn path_frequency(frequency: f64, path: &[Branch], failure: &[f64]) -> f64 {
    path.iter()
        .zip(failure)
        .fold(frequency, |acc, (b, p)| match b {
            Branch::Failure => acc * p,
            Branch::Success => acc * (1.0 - p),
            Branch::Bypass => acc,
        })
}

/// Frequency of `sequence`: the injected value when present, otherwise the
/// product model with the configured quantification method.
pub fn sequence_probability(m: &Model, et: &EventTree, sequence: &str) -> Result<f64> {
    let seq = et
        .sequence(sequence)
        .ok_or_else(|| Error::UnknownId(String::from(sequence)))?;
    if let Some(p) = seq.probability {
        return Ok(p);
    }
    let mut failure = Vec::with_capacity(seq.path.len());
    for (i, b) in seq.path.iter().enumerate() {
        failure.push(match b {
            Branch::Bypass => 0.0,
            _ => branch_probability(m, et, i, m.config.quantification_method)?,
        });
    }
    Ok(path_frequency(
        et.initiating_event.frequency,
        &seq.path,
        &failure,
    ))
}

/// Per-sequence frequencies of event tree `et_id`, with the total over
/// sequences whose end state matches `end_state` (all when `None`).
pub fn quantify_event_tree(m: &Model, et_id: &str, end_state: Option<&str>) -> Result<EtResult> {
    let et = event_tree(m, et_id)?;
    let mut cache: Vec<Option<f64>> = alloc::vec![None; et.functional_events.len()];
    let mut sequences = Vec::with_capacity(et.sequences.len());
    for seq in &et.sequences {
        let probability = match seq.probability {
            Some(p) => p,
            None => {
                let mut failure = Vec::with_capacity(seq.path.len());
                for (i, b) in seq.path.iter().enumerate() {
                    if *b == Branch::Bypass {
                        failure.push(0.0);
                        continue;
                    }
                    let p = match cache.get(i).copied().flatten() {
                        Some(p) => p,
                        None => {
                            let p = branch_probability(m, et, i, m.config.quantification_method)?;
                            cache[i] = Some(p);
                            p
                        }
                    };
                    failure.push(p);
                }
                path_frequency(et.initiating_event.frequency, &seq.path, &failure)
            }
        };
        sequences.push(SequenceResult {
            id: seq.id.clone(),
            probability,
            cutset_count: seq.cutset_count,
            end_state: seq.end_state.clone(),
            below_truncation: probability < m.config.truncation_probability,
            included: end_state.is_none_or(|s| s == seq.end_state),
        });
    }
    sequences.sort_by(|a, b| a.id.cmp(&b.id));
    let total = sequences
        .iter()
        .filter(|s| s.included)
        .map(|s| s.probability)
        .sum();
    Ok(EtResult {
        event_tree: String::from(et_id),
        end_state: end_state.map(String::from),
        sequences,
        total,
    })
}

/// Fills missing cut-set counts of included sequences by generating their
/// sequence cut sets.
pub fn count_sequence_cutsets(
    m: &Model,
    result: &mut EtResult,
    cfg: &AnalysisConfig,
) -> Result<()> {
    for s in result.sequences.iter_mut().filter(|s| s.included) {
        if s.cutset_count.is_none() {
            s.cutset_count = Some(
                sequence_cutsets(m, &result.event_tree, &s.id, cfg)?
                    .cutsets
                    .len(),
            );
        }
    }
    Ok(())
}

/// Minimal cut sets of one sequence: IE marker AND every failed branch top,
/// delete-term against successful branches, then truncation per `cfg`.
pub fn sequence_cutsets(
    m: &Model,
    et_id: &str,
    sequence: &str,
    cfg: &AnalysisConfig,
) -> Result<SequenceCutSets> {
    let et = event_tree(m, et_id)?;
    let seq = et
        .sequence(sequence)
        .ok_or_else(|| Error::UnknownId(String::from(sequence)))?;
    let name = format!("{}:{}", et.id, seq.id);
    let limits = ExpansionLimits {
        max_rows: cfg.max_intermediate_sets,
        prune: None,
    };
    let failed: Vec<usize> = seq
        .path
        .iter()
        .enumerate()
        .filter(|(_, b)| **b == Branch::Failure)
        .map(|(i, _)| i)
        .collect();
    if failed.is_empty() {
        let mut list = CutSetList::new(name, Vec::new());
        list.truncate(cfg.truncation_probability, cfg.max_cutset_order);
        return Ok(SequenceCutSets {
            cutsets: list,
            deleted_by_success: 0,
        });
    }

    let mut b = LogicBuilder::default();
    let mut lits = alloc::vec![b.event(&et.initiating_event.id, et.initiating_event.frequency)];
    for i in &failed {
        let (ft, gate) = tree_of(m, et, *i)?;
        lits.push(b.add_tree(ft, gate)?);
    }
    let root = b.combine(GateKind::And, &lits);
    let mut list = logic_cut_sets(&b.finish(root), &name, &limits)?;

    let mut success_sets: Vec<Vec<String>> = Vec::new();
    let mut success_certain = false;
    for (i, branch) in seq.path.iter().enumerate() {
        if *branch != Branch::Success {
            continue;
        }
        let (ft, gate) = tree_of(m, et, i)?;
        let logic = Logic::from_tree(ft, gate)?;
        if logic.root == Lit::True {
            success_certain = true;
            continue;
        }
        let cs = logic_cut_sets(&logic, gate, &limits)?;
        success_sets.extend(cs.cutsets.into_iter().map(|c| c.events));
    }
    let before = list.cutsets.len();
    if success_certain {
        list.cutsets.clear();
    } else {
        list.cutsets
            .retain(|c| !success_sets.iter().any(|s| c.is_superset_of(s)));
    }
    let deleted_by_success = before - list.cutsets.len();
    list.truncate(cfg.truncation_probability, cfg.max_cutset_order);
    Ok(SequenceCutSets {
        cutsets: list,
        deleted_by_success,
    })
}

/// Row-by-row comparison of two quantifications of the same event tree.
/// Rows cover the sequences included by both results' end-state filters.
pub fn compare_event_trees(original: &EtResult, improved: &EtResult) -> Result<ComparisonReport> {
    let ids_a: BTreeSet<&str> = original.sequences.iter().map(|s| s.id.as_str()).collect();
    let ids_b: BTreeSet<&str> = improved.sequences.iter().map(|s| s.id.as_str()).collect();
    if ids_a != ids_b {
        let diff: Vec<&str> = ids_a.symmetric_difference(&ids_b).copied().collect();
        return Err(Error::SequenceMismatch(diff.join(", ")));
    }
    let by_id: BTreeMap<&str, &SequenceResult> = improved
        .sequences
        .iter()
        .map(|s| (s.id.as_str(), s))
        .collect();
    let pairs: Vec<(&SequenceResult, &SequenceResult)> = original
        .sequences
        .iter()
        .filter(|a| a.included && by_id[a.id.as_str()].included)
        .map(|a| (a, by_id[a.id.as_str()]))
        .collect();

    let total_original: f64 = pairs.iter().map(|(a, _)| a.probability).sum();
    let total_improved: f64 = pairs.iter().map(|(_, b)| b.probability).sum();
    let contribution = |v: f64| (total_improved > 0.0).then(|| v / total_improved);
    let rows = pairs
        .iter()
        .map(|(a, b)| ComparisonRow {
            sequence: a.id.clone(),
            original: a.probability,
            improved: b.probability,
            delta_fraction: delta(a.probability, b.probability),
            original_count: a.cutset_count,
            improved_count: b.cutset_count,
            contribution: contribution(b.probability),
        })
        .collect();
    let count_sum = |f: &dyn Fn(&(&SequenceResult, &SequenceResult)) -> Option<usize>| {
        pairs.iter().map(f).sum::<Option<usize>>()
    };
    let total = ComparisonRow {
        sequence: String::from("Total"),
        original: total_original,
        improved: total_improved,
        delta_fraction: delta(total_original, total_improved),
        original_count: count_sum(&|(a, _)| a.cutset_count),
        improved_count: count_sum(&|(_, b)| b.cutset_count),
        contribution: contribution(total_improved),
    };
    Ok(ComparisonReport {
        event_tree: original.event_tree.clone(),
        rows,
        total,
    })
}

fn delta(original: f64, improved: f64) -> Option<f64> {
    if original == improved {
        Some(0.0)
    } else if original > 0.0 {
        Some((improved - original) / original)
    } else {
        None
    }
}

//! Beta-factor common cause failure model.
//!
//! A component's total failure probability is split into an independent
//! part and one shared part per coupling level. Expansion rewrites each
//! member event into an OR over its independent event and the shared CCF
//! events of the scopes it belongs to.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{BasicEvent, EventKind, FaultTree, Gate, Model, Node};
use crate::resha::UcaRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct CcfLevel {
    pub label: String,
    pub beta: f64,
    /// Redundancy layer the level is allowed to span. Without it, every
    /// scope must stay within one layer.
    pub layer: Option<String>,
    /// Member sets that share one CCF event at this level.
    pub scope: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcfGroup {
    pub id: String,
    pub members: Vec<String>,
    pub total_probability: f64,
    pub levels: Vec<CcfLevel>,
}

impl CcfGroup {
    pub fn betas(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.beta).collect()
    }

    pub fn split(&self) -> Result<SplitResult> {
        beta_split(self.total_probability, &self.betas())
    }

    pub fn independent_id(member: &str) -> String {
        format!("{member}-IND")
    }

    /// Id of the shared event for scope `scope` of level `level`. Levels with
    /// a single scope get `<group>-CCF-<label>`, others a 1-based suffix.
    pub fn ccf_event_id(&self, level: usize, scope: usize) -> String {
        let l = &self.levels[level];
        if l.scope.len() == 1 {
            format!("{}-CCF-{}", self.id, l.label)
        } else {
            format!("{}-CCF-{}-{}", self.id, l.label, scope + 1)
        }
    }

    /// Scope index of `member` within `level`, if any.
    pub fn scope_of(&self, level: usize, member: &str) -> Option<usize> {
        self.levels[level]
            .scope
            .iter()
            .position(|s| s.iter().any(|m| m == member))
    }

    /// Members are exactly the software events of catalog UCAs.
    pub fn is_software(&self, catalog: &[UcaRecord]) -> bool {
        !self.members.is_empty()
            && self
                .members
                .iter()
                .all(|m| catalog.iter().any(|u| u.software_event_id() == *m))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    pub independent: f64,
    /// One share per level, in level order.
    pub shares: Vec<f64>,
}

impl SplitResult {
    /// Shares summed in level order, then the independent part added.
    pub fn total(&self) -> f64 {
        self.shares.iter().sum::<f64>() + self.independent
    }
}

/// Splits `total` into per-level shares `beta_k · total` and the independent
/// remainder `total − Σ shares`. The remainder is nudged by at most a few ulps
/// so that `Σ shares + independent` reproduces `total` bit for bit whenever
/// some remainder can; otherwise the sum is off by one ulp.
pub fn beta_split(total: f64, betas: &[f64]) -> Result<SplitResult> {
    if !(0.0..=1.0).contains(&total) {
        return Err(Error::ProbabilityOutOfRange {
            what: String::from("total probability"),
            value: total,
        });
    }
    for (i, b) in betas.iter().enumerate() {
        if !(0.0..=1.0).contains(b) {
            return Err(Error::ProbabilityOutOfRange {
                what: format!("beta[{i}]"),
                value: *b,
            });
        }
    }
    let beta_sum: f64 = betas.iter().sum();
    if beta_sum > 1.0 {
        return Err(Error::BetaSumExceedsOne(beta_sum));
    }
    let shares: Vec<f64> = betas.iter().map(|b| b * total).collect();
    let shared: f64 = shares.iter().sum();
    let mut independent = (total - shared).max(0.0);
    for _ in 0..4 {
        let sum = shared + independent;
        if sum == total {
            break;
        }
        independent = if sum < total {
            independent.next_up()
        } else {
            independent.next_down().max(0.0)
        };
    }
    Ok(SplitResult {
        independent,
        shares,
    })
}

/// Replaces every member of `group` present in `ft` by its CCF expansion.
/// Returns the ids of the CCF events created or reused.
pub(crate) fn expand_group_in_tree(
    ft: &mut FaultTree,
    group: &CcfGroup,
    split: &SplitResult,
) -> Result<Vec<String>> {
    let mut ccf_events = BTreeSet::new();
    for member in &group.members {
        let original = match ft.nodes.get(member) {
            None => continue,
            Some(Node::Gate(_)) => return Err(Error::AlreadyExpanded(member.clone())),
            Some(Node::Event(e)) => e.clone(),
        };
        let independent_id = CcfGroup::independent_id(member);
        if !matches!(original.kind, EventKind::Hardware | EventKind::Software)
            || ft.nodes.contains_key(&independent_id)
        {
            return Err(Error::AlreadyExpanded(member.clone()));
        }
        let mut inputs = alloc::vec![independent_id.clone()];
        for level in 0..group.levels.len() {
            // A zero beta couples nothing; adding its event would only
            // create dead cut sets.
            if group.levels[level].beta == 0.0 {
                continue;
            }
            let Some(scope) = group.scope_of(level, member) else {
                continue;
            };
            let id = group.ccf_event_id(level, scope);
            match ft.nodes.get(&id) {
                Some(Node::Event(e)) if e.ccf_group.as_deref() == Some(group.id.as_str()) => {}
                Some(_) => return Err(Error::DuplicateId(id)),
                None => {
                    let mut e = BasicEvent::new(id.clone(), split.shares[level], EventKind::Ccf);
                    e.ccf_group = Some(group.id.clone());
                    e.label = format!("CCF of {} ({})", group.id, group.levels[level].label);
                    ft.insert(e);
                }
            }
            inputs.push(id.clone());
            ccf_events.insert(id);
        }
        let mut independent = BasicEvent::new(independent_id, split.independent, original.kind);
        independent.label = original.label.clone();
        ft.insert(independent);
        let mut gate = Gate::or(member.clone(), inputs);
        gate.label = original.label;
        ft.insert(gate);
    }
    Ok(ccf_events.into_iter().collect())
}

/// Expands every hardware CCF group of `m` into explicit CCF events and
/// returns the rewritten model. Groups over UCA software events are left to
/// the software integration step.
pub fn expand_ccf_groups(m: &Model) -> Result<Model> {
    let mut out = m.clone();
    for group in m.ccf_groups.values() {
        if group.is_software(&m.uca_catalog) {
            continue;
        }
        let split = group.split()?;
        for member in &group.members {
            if !m
                .fault_trees
                .values()
                .any(|ft| ft.nodes.contains_key(member))
            {
                return Err(Error::MemberNotFound {
                    group: group.id.clone(),
                    member: member.clone(),
                });
            }
        }
        for ft in out.fault_trees.values_mut() {
            expand_group_in_tree(ft, group, &split)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutset::exact_top_probability;
    use crate::model::{AnalysisConfig, TopKind};

    fn group(members: &[&str], total: f64, levels: Vec<CcfLevel>) -> CcfGroup {
        CcfGroup {
            id: String::from("G"),
            members: members.iter().map(|s| String::from(*s)).collect(),
            total_probability: total,
            levels,
        }
    }

    fn all_level(members: &[&str], beta: f64) -> CcfLevel {
        CcfLevel {
            label: String::from("all"),
            beta,
            layer: None,
            scope: alloc::vec![members.iter().map(|s| String::from(*s)).collect()],
        }
    }

    #[test]
    fn split_examples() {
        let s = beta_split(1e-3, &[]).unwrap();
        assert_eq!(s.independent, 1e-3);
        assert!(s.shares.is_empty());

        let s = beta_split(1e-3, &[1.0]).unwrap();
        assert_eq!(s.independent, 0.0);
        assert_eq!(s.shares, [1e-3]);
    }

    #[test]
    fn split_errors() {
        assert_eq!(
            beta_split(1e-3, &[0.6, 0.5]),
            Err(Error::BetaSumExceedsOne(1.1))
        );
        assert!(matches!(
            beta_split(1.5, &[0.1]),
            Err(Error::ProbabilityOutOfRange { .. })
        ));
        assert!(matches!(
            beta_split(0.1, &[-0.1]),
            Err(Error::ProbabilityOutOfRange { .. })
        ));
    }

    fn two_member_model(beta: f64) -> Model {
        let mut ft = FaultTree::new("T", "TOP", TopKind::FailureOnDemand);
        ft.insert(Gate::and("TOP", ["M1", "M2"]));
        ft.insert(BasicEvent::hardware("M1", 1e-3));
        ft.insert(BasicEvent::hardware("M2", 1e-3));
        let mut m = Model::default();
        m.fault_trees.insert(String::from("T"), ft);
        m.ccf_groups.insert(
            String::from("G"),
            group(
                &["M1", "M2"],
                1e-3,
                alloc::vec![all_level(&["M1", "M2"], beta)],
            ),
        );
        m
    }

    #[test]
    fn two_member_expansion() {
        let m = two_member_model(0.1);
        let x = expand_ccf_groups(&m).unwrap();
        let ft = &x.fault_trees["T"];
        assert_eq!(ft.event("G-CCF-all").unwrap().probability, 1e-4);
        assert_eq!(ft.event("M1-IND").unwrap().probability, 9e-4);
        assert_eq!(ft.gate("M1").unwrap().inputs, ["M1-IND", "G-CCF-all"]);
        let p = exact_top_probability(ft, &AnalysisConfig::default()).unwrap();
        let expected = 1e-4 + (1.0 - 1e-4) * 9e-4 * 9e-4;
        assert!((p - expected).abs() < 1e-18, "{p} vs {expected}");
        // original untouched
        assert!(m.fault_trees["T"].event("M1").is_some());
    }

    #[test]
    fn degenerate_group_keeps_probability() {
        let mut ft = FaultTree::new("T", "TOP", TopKind::FailureOnDemand);
        ft.insert(Gate::or("TOP", ["M1"]));
        ft.insert(BasicEvent::hardware("M1", 2e-3));
        let mut m = Model::default();
        m.fault_trees.insert(String::from("T"), ft);
        m.ccf_groups
            .insert(String::from("G"), group(&["M1"], 2e-3, Vec::new()));
        let x = expand_ccf_groups(&m).unwrap();
        let ft = &x.fault_trees["T"];
        assert_eq!(ft.gate("M1").unwrap().inputs, ["M1-IND"]);
        let cfg = AnalysisConfig::default();
        assert_eq!(exact_top_probability(ft, &cfg).unwrap(), 2e-3);
    }

    #[test]
    fn zero_beta_adds_no_event() {
        let x = expand_ccf_groups(&two_member_model(0.0)).unwrap();
        let ft = &x.fault_trees["T"];
        assert_eq!(ft.gate("M1").unwrap().inputs, ["M1-IND"]);
        assert!(ft.event("G-CCF-all").is_none());
    }

    #[test]
    fn double_expansion_rejected() {
        let m = two_member_model(0.1);
        let x = expand_ccf_groups(&m).unwrap();
        assert_eq!(
            expand_ccf_groups(&x),
            Err(Error::AlreadyExpanded(String::from("M1")))
        );
    }

    #[test]
    fn missing_member_rejected() {
        let mut m = two_member_model(0.1);
        m.ccf_groups
            .get_mut("G")
            .unwrap()
            .members
            .push(String::from("M9"));
        assert_eq!(
            expand_ccf_groups(&m),
            Err(Error::MemberNotFound {
                group: String::from("G"),
                member: String::from("M9")
            })
        );
    }

    #[test]
    fn multi_scope_level_ids() {
        let g = CcfGroup {
            id: String::from("BP"),
            members: Vec::new(),
            total_probability: 0.0,
            levels: alloc::vec![CcfLevel {
                label: String::from("division"),
                beta: 0.1,
                layer: None,
                scope: alloc::vec![
                    alloc::vec![String::from("A1"), String::from("A2")],
                    alloc::vec![String::from("B1"), String::from("B2")],
                ],
            }],
        };
        assert_eq!(g.ccf_event_id(0, 1), "BP-CCF-division-2");
        assert_eq!(g.scope_of(0, "B2"), Some(1));
        assert_eq!(g.scope_of(0, "C1"), None);
    }
}

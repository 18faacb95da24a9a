//! Integration of software failures into hardware fault trees.
//!
//! Unsafe control actions (UCAs) from the catalog are filtered by the kind
//! of top event, attached as software basic events next to the component
//! they control, and grouped into software CCF events. The hazard report
//! then lists single points of failure and low-order software contributors
//! by cause class.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::ccf::{expand_group_in_tree, CcfGroup};
use crate::cutset::{find_spofs, minimal_cut_sets, CutSetList};
use crate::error::{Error, LayeredMember, Result};
use crate::model::{
    AnalysisConfig, ApplicabilityMatrix, BasicEvent, EventKind, FaultTree, Gate, GateKind, Node,
    TopKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UcaCategory {
    /// Control action not provided when needed.
    NotProvided = 0,
    /// Control action provided when not needed.
    ProvidedUnneeded = 1,
    /// Provided too early, too late, or out of order.
    WrongTimingOrOrder = 2,
    /// Lasts too long or stops too soon. Continuous actions only.
    WrongDuration = 3,
}

impl UcaCategory {
    pub const ALL: [UcaCategory; 4] = [
        UcaCategory::NotProvided,
        UcaCategory::ProvidedUnneeded,
        UcaCategory::WrongTimingOrOrder,
        UcaCategory::WrongDuration,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            UcaCategory::NotProvided => "not-provided",
            UcaCategory::ProvidedUnneeded => "provided-unneeded",
            UcaCategory::WrongTimingOrOrder => "wrong-timing",
            UcaCategory::WrongDuration => "wrong-duration",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CauseClass {
    UnsafeControllerBehavior,
    InadequateFeedback,
}

impl CauseClass {
    pub fn as_str(self) -> &'static str {
        match self {
            CauseClass::UnsafeControllerBehavior => "controller",
            CauseClass::InadequateFeedback => "feedback",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UcaRecord {
    pub id: String,
    /// Gate or basic event the software failure attaches to.
    pub controller: String,
    pub control_action: String,
    pub category: UcaCategory,
    pub continuous_action: bool,
    pub cause_class: CauseClass,
    pub redundancy_layer: String,
    pub probability: Option<f64>,
}

impl UcaRecord {
    pub fn software_event_id(&self) -> String {
        format!("{}-SW", self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Origin {
    HardwareOriginal,
    SoftwareUca(String),
    SoftwareCcf(String),
    HardwareCcf(String),
}

impl Origin {
    pub fn is_software(&self) -> bool {
        matches!(self, Origin::SoftwareUca(_) | Origin::SoftwareCcf(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratedFaultTree {
    pub tree: FaultTree,
    /// Origin of every basic event in `tree`.
    pub provenance: BTreeMap<String, Origin>,
    /// Cause classes behind each software event.
    pub software_causes: BTreeMap<String, BTreeSet<CauseClass>>,
}

impl IntegratedFaultTree {
    /// Wraps a tree before any software is attached. CCF events already in
    /// the tree keep their group as hardware CCF provenance.
    pub fn from_hardware(ft: &FaultTree) -> Self {
        let provenance = ft
            .events()
            .map(|e| {
                let origin = match (&e.kind, &e.ccf_group) {
                    (EventKind::Ccf, Some(g)) => Origin::HardwareCcf(g.clone()),
                    _ => Origin::HardwareOriginal,
                };
                (e.id.clone(), origin)
            })
            .collect();
        Self {
            tree: ft.clone(),
            provenance,
            software_causes: BTreeMap::new(),
        }
    }

    pub fn software_events(&self) -> impl Iterator<Item = &str> {
        self.provenance
            .iter()
            .filter(|(_, o)| o.is_software())
            .map(|(id, _)| id.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HazardReport {
    pub cutsets: CutSetList,
    pub spofs: Vec<(String, Origin)>,
    pub cutset_histogram: BTreeMap<usize, usize>,
    pub by_cause_class: BTreeMap<CauseClass, Vec<String>>,
    pub low_order_threshold: usize,
}

/// UCAs applicable to a top event of kind `top_kind`, in catalog order.
pub fn filter_applicable_ucas(
    catalog: &[UcaRecord],
    top_kind: TopKind,
    matrix: &ApplicabilityMatrix,
) -> Vec<UcaRecord> {
    catalog
        .iter()
        .filter(|u| matrix.get(u.category, top_kind))
        .cloned()
        .collect()
}

/// Adds one software basic event `<uca>-SW` per UCA. An OR controller gate
/// gains the event as an input; any other controller is wrapped in a new OR
/// gate `<controller>-INT` that takes its place in the tree.
pub fn attach_software_failures(ft: &FaultTree, ucas: &[UcaRecord]) -> Result<IntegratedFaultTree> {
    let mut ift = IntegratedFaultTree::from_hardware(ft);
    for uca in ucas {
        let sw_id = uca.software_event_id();
        if ift.tree.nodes.contains_key(&sw_id) {
            return Err(Error::DuplicateAttachment(uca.id.clone()));
        }
        let target = uca.controller.as_str();
        let wrapper = format!("{target}-INT");
        match ift.tree.nodes.get(target) {
            None => {
                return Err(Error::ControllerNotFound {
                    uca: uca.id.clone(),
                    controller: uca.controller.clone(),
                })
            }
            Some(Node::Gate(g)) if g.kind == GateKind::Or => {
                if let Some(Node::Gate(g)) = ift.tree.nodes.get_mut(target) {
                    g.inputs.push(sw_id.clone());
                }
            }
            Some(_) => match ift.tree.nodes.get_mut(&wrapper) {
                Some(Node::Gate(w)) => w.inputs.push(sw_id.clone()),
                Some(Node::Event(_)) => return Err(Error::DuplicateId(wrapper)),
                None => {
                    ift.tree.redirect(target, &wrapper);
                    let mut g = Gate::or(wrapper.clone(), [target, sw_id.as_str()]);
                    g.label = format!("{target} with software failures");
                    ift.tree.insert(g);
                }
            },
        }
        let mut e = BasicEvent::new(
            sw_id.clone(),
            uca.probability.unwrap_or(0.0),
            EventKind::Software,
        );
        e.label = uca.control_action.clone();
        ift.tree.insert(e);
        ift.provenance
            .insert(sw_id.clone(), Origin::SoftwareUca(uca.id.clone()));
        ift.software_causes
            .entry(sw_id)
            .or_default()
            .insert(uca.cause_class);
    }
    Ok(ift)
}

fn check_layers(group: &CcfGroup, layer_of: &BTreeMap<&str, &str>) -> Result<()> {
    for level in &group.levels {
        for scope in &level.scope {
            let members: Vec<(&str, &str)> = scope
                .iter()
                .filter_map(|m| layer_of.get(m.as_str()).map(|l| (m.as_str(), *l)))
                .collect();
            match &level.layer {
                Some(allowed) => {
                    for (member, layer) in &members {
                        let inside = *layer == allowed.as_str()
                            || layer
                                .strip_prefix(allowed.as_str())
                                .is_some_and(|rest| rest.starts_with('/'));
                        if !inside {
                            return Err(Error::LayerOutsideLevel {
                                group: group.id.clone(),
                                level: level.label.clone(),
                                member: Box::new(LayeredMember {
                                    id: String::from(*member),
                                    layer: String::from(*layer),
                                }),
                                allowed: allowed.clone(),
                            });
                        }
                    }
                }
                None => {
                    if let Some((first, first_layer)) = members.first() {
                        if let Some((second, second_layer)) =
                            members.iter().find(|(_, l)| l != first_layer)
                        {
                            return Err(Error::LayerMismatch {
                                group: group.id.clone(),
                                level: level.label.clone(),
                                members: Box::new([
                                    LayeredMember {
                                        id: String::from(*first),
                                        layer: String::from(*first_layer),
                                    },
                                    LayeredMember {
                                        id: String::from(*second),
                                        layer: String::from(*second_layer),
                                    },
                                ]),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Expands software CCF groups whose members are `<uca>-SW` events of
/// `ift`. Scopes must respect the UCAs' redundancy layers.
pub fn attach_software_ccf(
    ift: &IntegratedFaultTree,
    groups: &[CcfGroup],
    catalog: &[UcaRecord],
) -> Result<IntegratedFaultTree> {
    let mut out = ift.clone();
    for group in groups {
        let mut layer_of: BTreeMap<&str, &str> = BTreeMap::new();
        for member in &group.members {
            let uca = match out.provenance.get(member) {
                Some(Origin::SoftwareUca(u)) => u.clone(),
                Some(_) => return Err(Error::AlreadyExpanded(member.clone())),
                None if out.tree.gate(member).is_some() => {
                    return Err(Error::AlreadyExpanded(member.clone()))
                }
                None => {
                    return Err(Error::MemberNotFound {
                        group: group.id.clone(),
                        member: member.clone(),
                    })
                }
            };
            let record = catalog
                .iter()
                .find(|r| r.id == uca)
                .ok_or_else(|| Error::UnknownId(uca.clone()))?;
            layer_of.insert(member.as_str(), record.redundancy_layer.as_str());
        }
        check_layers(group, &layer_of)?;

        let split = group.split()?;
        let ccf_events = expand_group_in_tree(&mut out.tree, group, &split)?;
        for member in &group.members {
            let origin = out
                .provenance
                .remove(member)
                .expect("member provenance checked above");
            let causes = out.software_causes.remove(member).unwrap_or_default();
            let ind = CcfGroup::independent_id(member);
            out.provenance.insert(ind.clone(), origin);
            out.software_causes.insert(ind, causes.clone());
            for level in 0..group.levels.len() {
                if let Some(scope) = group.scope_of(level, member) {
                    let id = group.ccf_event_id(level, scope);
                    out.software_causes
                        .entry(id)
                        .or_default()
                        .extend(causes.iter().copied());
                }
            }
        }
        for id in ccf_events {
            out.provenance
                .insert(id, Origin::SoftwareCcf(group.id.clone()));
        }
    }
    Ok(out)
}

/// Minimal cut sets, single points of failure and low-order software
/// contributors grouped by cause class.
pub fn hazard_report(ift: &IntegratedFaultTree, cfg: &AnalysisConfig) -> Result<HazardReport> {
    let cutsets = minimal_cut_sets(&ift.tree, cfg)?;
    let origin_of = |id: &str| {
        ift.provenance
            .get(id)
            .cloned()
            .unwrap_or(Origin::HardwareOriginal)
    };
    let spofs = find_spofs(&cutsets)
        .into_iter()
        .map(|id| {
            let o = origin_of(&id);
            (id, o)
        })
        .collect();
    let mut grouped: BTreeMap<CauseClass, BTreeSet<String>> = BTreeMap::new();
    for cs in cutsets
        .cutsets
        .iter()
        .filter(|c| c.order() <= cfg.low_order_threshold)
    {
        for e in &cs.events {
            if !origin_of(e).is_software() {
                continue;
            }
            for cause in ift.software_causes.get(e).into_iter().flatten() {
                grouped.entry(*cause).or_default().insert(e.clone());
            }
        }
    }
    Ok(HazardReport {
        cutset_histogram: cutsets.histogram(),
        spofs,
        by_cause_class: grouped
            .into_iter()
            .map(|(k, v)| (k, v.into_iter().collect()))
            .collect(),
        low_order_threshold: cfg.low_order_threshold,
        cutsets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccf::CcfLevel;
    use crate::cutset::exact_top_probability;

    fn uca(id: &str, controller: &str, category: UcaCategory, layer: &str) -> UcaRecord {
        UcaRecord {
            id: String::from(id),
            controller: String::from(controller),
            control_action: String::from("send trip signal"),
            category,
            continuous_action: false,
            cause_class: CauseClass::UnsafeControllerBehavior,
            redundancy_layer: String::from(layer),
            probability: Some(1e-3),
        }
    }

    fn hardware_tree() -> FaultTree {
        let mut ft = FaultTree::new("T", "TOP", TopKind::FailureOnDemand);
        ft.insert(Gate::or("TOP", ["G", "C"]));
        ft.insert(Gate::and("G", ["A", "B"]));
        ft.insert(BasicEvent::hardware("A", 1e-2));
        ft.insert(BasicEvent::hardware("B", 1e-2));
        ft.insert(BasicEvent::hardware("C", 1e-5));
        ft
    }

    #[test]
    fn applicability() {
        let m = ApplicabilityMatrix::default();
        let cat = [uca("U1", "G", UcaCategory::NotProvided, "x")];
        assert!(filter_applicable_ucas(&cat, TopKind::SpuriousActuation, &m).is_empty());
        assert_eq!(
            filter_applicable_ucas(&cat, TopKind::FailureOnDemand, &m).len(),
            1
        );
    }

    #[test]
    fn empty_attachment_is_identity() {
        let ft = hardware_tree();
        let ift = attach_software_failures(&ft, &[]).unwrap();
        assert_eq!(ift.tree, ft);
        assert!(ift
            .provenance
            .values()
            .all(|o| *o == Origin::HardwareOriginal));
    }

    #[test]
    fn attach_to_and_gate_wraps_it() {
        let ft = hardware_tree();
        let cfg = AnalysisConfig::default();
        let before = exact_top_probability(&ft, &cfg).unwrap();
        let ift = attach_software_failures(&ft, &[uca("U1", "G", UcaCategory::NotProvided, "x")])
            .unwrap();
        assert_eq!(ift.tree.gate("G-INT").unwrap().inputs, ["G", "U1-SW"]);
        assert_eq!(ift.tree.gate("TOP").unwrap().inputs, ["G-INT", "C"]);
        assert!(exact_top_probability(&ift.tree, &cfg).unwrap() > before);
        assert_eq!(
            ift.provenance["U1-SW"],
            Origin::SoftwareUca(String::from("U1"))
        );
    }

    #[test]
    fn attach_to_or_gate_and_event() {
        let ft = hardware_tree();
        let ift = attach_software_failures(
            &ft,
            &[
                uca("U1", "TOP", UcaCategory::NotProvided, "x"),
                uca("U2", "A", UcaCategory::NotProvided, "x"),
                uca("U3", "A", UcaCategory::NotProvided, "x"),
            ],
        )
        .unwrap();
        assert_eq!(ift.tree.gate("TOP").unwrap().inputs, ["G", "C", "U1-SW"]);
        assert_eq!(
            ift.tree.gate("A-INT").unwrap().inputs,
            ["A", "U2-SW", "U3-SW"]
        );
        assert_eq!(ift.tree.gate("G").unwrap().inputs, ["A-INT", "B"]);
        assert_eq!(ift.tree.event("A").unwrap().probability, 1e-2);
    }

    #[test]
    fn attachment_errors() {
        let ft = hardware_tree();
        let u = uca("U1", "G", UcaCategory::NotProvided, "x");
        assert_eq!(
            attach_software_failures(&ft, &[u.clone(), u]),
            Err(Error::DuplicateAttachment(String::from("U1")))
        );
        assert!(matches!(
            attach_software_failures(&ft, &[uca("U1", "NOPE", UcaCategory::NotProvided, "x")]),
            Err(Error::ControllerNotFound { .. })
        ));
    }

    fn division_tree() -> (FaultTree, Vec<UcaRecord>) {
        let mut ft = FaultTree::new("T", "TOP", TopKind::FailureOnDemand);
        ft.insert(Gate::and("TOP", ["DA", "DB"]));
        ft.insert(BasicEvent::hardware("DA", 1e-3));
        ft.insert(BasicEvent::hardware("DB", 1e-3));
        let ucas = alloc::vec![
            uca("UA", "DA", UcaCategory::NotProvided, "rts/div-A"),
            uca("UB", "DB", UcaCategory::NotProvided, "rts/div-B"),
        ];
        (ft, ucas)
    }

    fn sw_group(layer: Option<&str>, beta: f64) -> CcfGroup {
        CcfGroup {
            id: String::from("SW"),
            members: alloc::vec![String::from("UA-SW"), String::from("UB-SW")],
            total_probability: 1e-3,
            levels: alloc::vec![CcfLevel {
                label: String::from("all"),
                beta,
                layer: layer.map(String::from),
                scope: alloc::vec![alloc::vec![String::from("UA-SW"), String::from("UB-SW")]],
            }],
        }
    }

    #[test]
    fn software_ccf_becomes_spof() {
        let (ft, ucas) = division_tree();
        let ift = attach_software_failures(&ft, &ucas).unwrap();
        let ift = attach_software_ccf(&ift, &[sw_group(Some("rts"), 0.1)], &ucas).unwrap();
        assert_eq!(
            ift.provenance["SW-CCF-all"],
            Origin::SoftwareCcf(String::from("SW"))
        );
        let report = hazard_report(&ift, &AnalysisConfig::default()).unwrap();
        let spofs: Vec<&str> = report.spofs.iter().map(|(id, _)| id.as_str()).collect();
        assert_eq!(spofs, ["SW-CCF-all"]);
        assert_eq!(
            report.by_cause_class[&CauseClass::UnsafeControllerBehavior],
            ["SW-CCF-all", "UA-SW-IND", "UB-SW-IND"]
        );
        let total: usize = report.cutset_histogram.values().sum();
        assert_eq!(total, report.cutsets.len());
    }

    #[test]
    fn layer_mismatch_names_both() {
        let (ft, ucas) = division_tree();
        let ift = attach_software_failures(&ft, &ucas).unwrap();
        match attach_software_ccf(&ift, &[sw_group(None, 0.1)], &ucas) {
            Err(Error::LayerMismatch { members, .. }) => {
                assert_eq!(members[0].id, "UA-SW");
                assert_eq!(members[1].id, "UB-SW");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            attach_software_ccf(&ift, &[sw_group(Some("esfas"), 0.1)], &ucas),
            Err(Error::LayerOutsideLevel { .. })
        ));
    }

    #[test]
    fn zero_beta_keeps_probabilities() {
        let (ft, ucas) = division_tree();
        let ift = attach_software_failures(&ft, &ucas[..1]).unwrap();
        let g = CcfGroup {
            id: String::from("SW"),
            members: alloc::vec![String::from("UA-SW")],
            total_probability: 1e-3,
            levels: Vec::new(),
        };
        let out = attach_software_ccf(&ift, &[g], &ucas).unwrap();
        assert_eq!(out.tree.event("UA-SW-IND").unwrap().probability, 1e-3);
        let cfg = AnalysisConfig::default();
        assert_eq!(
            exact_top_probability(&out.tree, &cfg).unwrap(),
            exact_top_probability(&ift.tree, &cfg).unwrap()
        );
    }

    #[test]
    fn hardware_only_report() {
        let ift = IntegratedFaultTree::from_hardware(&hardware_tree());
        let r = hazard_report(&ift, &AnalysisConfig::default()).unwrap();
        assert!(r.by_cause_class.is_empty());
        assert_eq!(r.spofs, [(String::from("C"), Origin::HardwareOriginal)]);
    }
}

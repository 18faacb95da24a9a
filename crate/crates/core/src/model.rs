//! Shared domain model: fault trees, analysis configuration and the
//! top-level [`Model`] container.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bbn::Bbn;
use crate::ccf::CcfGroup;
use crate::etree::EventTree;
use crate::resha::{UcaCategory, UcaRecord};

/// Everything one model file carries. All maps iterate in bytewise id order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Model {
    pub fault_trees: BTreeMap<String, FaultTree>,
    pub event_trees: BTreeMap<String, EventTree>,
    pub ccf_groups: BTreeMap<String, CcfGroup>,
    pub uca_catalog: Vec<UcaRecord>,
    pub bbns: BTreeMap<String, Bbn>,
    pub config: AnalysisConfig,
}

impl Model {
    /// Finds the fault tree that contains node `id`, preferring a tree whose
    /// own id is `id` (in which case its top gate is meant).
    pub fn locate<'a>(&'a self, id: &'a str) -> Option<(&'a FaultTree, &'a str)> {
        if let Some(ft) = self.fault_trees.get(id) {
            return Some((ft, ft.top.as_str()));
        }
        self.fault_trees
            .values()
            .find(|ft| ft.nodes.contains_key(id))
            .map(|ft| (ft, id))
    }

    pub fn uca(&self, id: &str) -> Option<&UcaRecord> {
        self.uca_catalog.iter().find(|u| u.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TopKind {
    FailureOnDemand,
    SpuriousActuation,
}

impl TopKind {
    pub const ALL: [TopKind; 2] = [TopKind::FailureOnDemand, TopKind::SpuriousActuation];

    pub fn as_str(self) -> &'static str {
        match self {
            TopKind::FailureOnDemand => "failure-on-demand",
            TopKind::SpuriousActuation => "spurious-actuation",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaultTree {
    pub id: String,
    pub top: String,
    pub top_kind: TopKind,
    pub nodes: BTreeMap<String, Node>,
}

impl FaultTree {
    pub fn new(id: impl Into<String>, top: impl Into<String>, top_kind: TopKind) -> Self {
        Self {
            id: id.into(),
            top: top.into(),
            top_kind,
            nodes: BTreeMap::new(),
        }
    }

    /// Inserts a node, returning the node it replaced, if any.
    pub fn insert(&mut self, node: impl Into<Node>) -> Option<Node> {
        let node = node.into();
        self.nodes.insert(String::from(node.id()), node)
    }

    pub fn gate(&self, id: &str) -> Option<&Gate> {
        match self.nodes.get(id) {
            Some(Node::Gate(g)) => Some(g),
            _ => None,
        }
    }

    pub fn event(&self, id: &str) -> Option<&BasicEvent> {
        match self.nodes.get(id) {
            Some(Node::Event(e)) => Some(e),
            _ => None,
        }
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.nodes.values().filter_map(|n| match n {
            Node::Gate(g) => Some(g),
            Node::Event(_) => None,
        })
    }

    pub fn events(&self) -> impl Iterator<Item = &BasicEvent> {
        self.nodes.values().filter_map(|n| match n {
            Node::Event(e) => Some(e),
            Node::Gate(_) => None,
        })
    }

    /// Rewrites every reference to `from` (gate inputs and the top) to `to`.
    pub(crate) fn redirect(&mut self, from: &str, to: &str) {
        if self.top == from {
            self.top = String::from(to);
        }
        for node in self.nodes.values_mut() {
            if let Node::Gate(g) = node {
                for input in g.inputs.iter_mut().filter(|i| *i == from) {
                    *input = String::from(to);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Gate(Gate),
    Event(BasicEvent),
}

impl Node {
    pub fn id(&self) -> &str {
        match self {
            Node::Gate(g) => &g.id,
            Node::Event(e) => &e.id,
        }
    }
}

impl From<Gate> for Node {
    fn from(g: Gate) -> Self {
        Node::Gate(g)
    }
}

impl From<BasicEvent> for Node {
    fn from(e: BasicEvent) -> Self {
        Node::Event(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    And,
    Or,
    /// Fails when at least `k` inputs fail.
    AtLeast(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub id: String,
    pub kind: GateKind,
    pub inputs: Vec<String>,
    pub label: String,
}

impl Gate {
    pub fn new<I, S>(id: impl Into<String>, kind: GateKind, inputs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            id: id.into(),
            kind,
            inputs: inputs.into_iter().map(Into::into).collect(),
            label: String::new(),
        }
    }

    pub fn and<I: IntoIterator<Item = S>, S: Into<String>>(
        id: impl Into<String>,
        inputs: I,
    ) -> Self {
        Self::new(id, GateKind::And, inputs)
    }

    pub fn or<I: IntoIterator<Item = S>, S: Into<String>>(
        id: impl Into<String>,
        inputs: I,
    ) -> Self {
        Self::new(id, GateKind::Or, inputs)
    }

    pub fn at_least<I: IntoIterator<Item = S>, S: Into<String>>(
        id: impl Into<String>,
        k: usize,
        inputs: I,
    ) -> Self {
        Self::new(id, GateKind::AtLeast(k), inputs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    Hardware,
    Software,
    Ccf,
    House,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Hardware => "hardware",
            EventKind::Software => "software",
            EventKind::Ccf => "ccf",
            EventKind::House => "house",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasicEvent {
    pub id: String,
    pub probability: f64,
    pub kind: EventKind,
    /// Set only for house events; the probability mirrors it as 0 or 1.
    pub house_state: Option<bool>,
    pub ccf_group: Option<String>,
    pub label: String,
}

impl BasicEvent {
    pub fn new(id: impl Into<String>, probability: f64, kind: EventKind) -> Self {
        Self {
            id: id.into(),
            probability,
            kind,
            house_state: None,
            ccf_group: None,
            label: String::new(),
        }
    }

    pub fn hardware(id: impl Into<String>, probability: f64) -> Self {
        Self::new(id, probability, EventKind::Hardware)
    }

    pub fn house(id: impl Into<String>, state: bool) -> Self {
        Self {
            house_state: Some(state),
            ..Self::new(id, if state { 1.0 } else { 0.0 }, EventKind::House)
        }
    }
}

/// Top-event quantification method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    RareEvent,
    #[default]
    Mcub,
    Exact,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::RareEvent => "rare-event",
            Method::Mcub => "mcub",
            Method::Exact => "exact",
        }
    }
}

/// Which UCA categories apply to which kind of top event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ApplicabilityMatrix {
    cells: [[bool; 2]; 4],
}

impl ApplicabilityMatrix {
    pub fn get(&self, category: UcaCategory, top: TopKind) -> bool {
        self.cells[category as usize][top as usize]
    }

    pub fn set(&mut self, category: UcaCategory, top: TopKind, applicable: bool) {
        self.cells[category as usize][top as usize] = applicable;
    }
}

impl Default for ApplicabilityMatrix {
    fn default() -> Self {
        let mut m = Self {
            cells: [[false; 2]; 4],
        };
        m.set(UcaCategory::NotProvided, TopKind::FailureOnDemand, true);
        m.set(
            UcaCategory::WrongTimingOrOrder,
            TopKind::FailureOnDemand,
            true,
        );
        m.set(UcaCategory::WrongDuration, TopKind::FailureOnDemand, true);
        m.set(
            UcaCategory::ProvidedUnneeded,
            TopKind::SpuriousActuation,
            true,
        );
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub truncation_probability: f64,
    /// `None` means unlimited.
    pub max_cutset_order: Option<usize>,
    pub applicability: ApplicabilityMatrix,
    pub quantification_method: Method,
    /// Largest basic-event count accepted by exact quantification.
    pub exact_event_limit: usize,
    /// Cap on rows held by the cut-set expansion at any time.
    pub max_intermediate_sets: usize,
    /// Cut sets of this order or lower count as low order in hazard reports.
    pub low_order_threshold: usize,
    /// Drop partial expansion rows once they fall below the truncation
    /// limit. Off by default: `truncated_count` is then no longer exact.
    pub prune_during_expansion: bool,
}

impl AnalysisConfig {
    pub const DEFAULT_TRUNCATION: f64 = 1e-12;
    pub const DEFAULT_EXACT_LIMIT: usize = 25;
    pub const DEFAULT_MAX_SETS: usize = 5_000_000;
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            truncation_probability: Self::DEFAULT_TRUNCATION,
            max_cutset_order: None,
            applicability: ApplicabilityMatrix::default(),
            quantification_method: Method::default(),
            exact_event_limit: Self::DEFAULT_EXACT_LIMIT,
            max_intermediate_sets: Self::DEFAULT_MAX_SETS,
            low_order_threshold: 2,
            prune_during_expansion: false,
        }
    }
}

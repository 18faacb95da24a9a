//! JSON model files: strict parsing into a [`Model`] and the canonical
//! writer.
//!
//! Collections are written as arrays of objects carrying their own `id`, in
//! bytewise id order (the UCA catalog keeps its own order). Probabilities
//! and other real parameters accept JSON numbers or strings in decimal or
//! E-notation; the writer emits uppercase E-notation strings that parse back
//! to the identical `f64`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use iradic_core::bbn::{BahamasConfig, Bbn, BbnNode, BetaLevel};
use iradic_core::ccf::{CcfGroup, CcfLevel};
use iradic_core::etree::{Branch, EventTree, FunctionalEvent, InitiatingEvent, Sequence};
use iradic_core::prob::render_lossless;
use iradic_core::resha::{CauseClass, UcaCategory, UcaRecord};
use iradic_core::validate::unresolved_references;
use iradic_core::{
    AnalysisConfig, ApplicabilityMatrix, BasicEvent, EventKind, FaultTree, Gate, GateKind, Method,
    Model, Node, TopKind,
};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    /// Malformed JSON, an unknown field, a wrong type or an unreadable number.
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{namespace}: duplicate id `{id}`")]
    DuplicateId { namespace: String, id: String },
    #[error("{location}: unknown id `{id}`")]
    UnresolvedReference { location: String, id: String },
    #[error("{location}: {message}")]
    Invalid { location: String, message: String },
}

impl From<serde_json::Error> for ParseError {
    fn from(e: serde_json::Error) -> Self {
        // serde_json appends " at line L column C"; the position is kept in
        // dedicated fields instead.
        let text = e.to_string();
        let message = match text.rfind(" at line ") {
            Some(i) => text[..i].to_string(),
            None => text,
        };
        ParseError::Syntax {
            line: e.line(),
            column: e.column(),
            message,
        }
    }
}

fn invalid(location: impl Into<String>, message: impl Into<String>) -> ParseError {
    ParseError::Invalid {
        location: location.into(),
        message: message.into(),
    }
}

/// A real-valued parameter written as a JSON number or as a string.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Real(f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let text = render_lossless(self.0).map_err(serde::ser::Error::custom)?;
        s.serialize_str(&text)
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct RealVisitor;

        impl Visitor<'_> for RealVisitor {
            type Value = Real;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a numeric string such as \"5.388E-07\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Real, E> {
                if v.is_finite() {
                    Ok(Real(v))
                } else {
                    Err(E::custom("number out of range"))
                }
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Real, E> {
                parse_real(v).map(Real).map_err(E::custom)
            }
        }

        d.deserialize_any(RealVisitor)
    }
}

/// Decimal or E-notation, optionally signed. Rejects the spellings of
/// infinity and NaN that `f64::from_str` would otherwise accept.
pub(crate) fn parse_real(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let well_formed = !t.is_empty()
        && t.chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'))
        && t.chars().any(|c| c.is_ascii_digit());
    let value: f64 = match well_formed.then(|| t.parse::<f64>()) {
        Some(Ok(v)) => v,
        _ => return Err(format!("invalid number \"{text}\"")),
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("number out of range \"{text}\""))
    }
}

#[derive(Debug, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    #[serde(default)]
    fault_trees: Vec<FaultTreeDto>,
    #[serde(default)]
    event_trees: Vec<EventTreeDto>,
    #[serde(default)]
    ccf_groups: Vec<CcfGroupDto>,
    #[serde(default)]
    uca_catalog: Vec<UcaDto>,
    #[serde(default)]
    bbns: Vec<BbnDto>,
    #[serde(default)]
    config: ConfigDto,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FaultTreeDto {
    id: String,
    top: String,
    #[serde(default = "default_top_kind")]
    top_kind: TopKindDto,
    #[serde(default)]
    gates: Vec<GateDto>,
    #[serde(default)]
    events: Vec<EventDto>,
}

fn default_top_kind() -> TopKindDto {
    TopKindDto::FailureOnDemand
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
enum TopKindDto {
    FailureOnDemand,
    SpuriousActuation,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateDto {
    id: String,
    kind: GateKindDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    inputs: Vec<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    label: String,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum GateKindDto {
    And,
    Or,
    Atleast,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventDto {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<Real>,
    kind: EventKindDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    house_state: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ccf_group: Option<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    label: String,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum EventKindDto {
    Hardware,
    Software,
    Ccf,
    House,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CcfGroupDto {
    id: String,
    members: Vec<String>,
    total_p: Real,
    #[serde(default)]
    levels: Vec<CcfLevelDto>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CcfLevelDto {
    label: String,
    beta: Real,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    layer: Option<String>,
    scope: Vec<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UcaDto {
    id: String,
    controller: String,
    #[serde(default)]
    action: String,
    category: CategoryDto,
    #[serde(default)]
    continuous: bool,
    cause_class: CauseDto,
    #[serde(default)]
    layer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<Real>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
enum CategoryDto {
    NotProvided,
    ProvidedUnneeded,
    WrongTiming,
    WrongDuration,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum CauseDto {
    Controller,
    Feedback,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BbnDto {
    id: String,
    nodes: Vec<BbnNodeDto>,
    #[serde(default)]
    queries: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bahamas: Option<BahamasDto>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BbnNodeDto {
    id: String,
    #[serde(default)]
    parents: Vec<String>,
    cpt: Vec<Real>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BahamasDto {
    query: String,
    adjustment_factor: Real,
    #[serde(default)]
    levels: Vec<BetaLevelDto>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BetaLevelDto {
    label: String,
    beta: Real,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventTreeDto {
    id: String,
    initiating_event: InitiatorDto,
    functional_events: Vec<FunctionalEventDto>,
    sequences: Vec<SequenceDto>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitiatorDto {
    id: String,
    frequency: Real,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionalEventDto {
    id: String,
    fault_tree: String,
    gate: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceDto {
    id: String,
    /// One character per functional event: `S`, `F` or `-`.
    path: String,
    end_state: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frequency: Option<Real>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cutset_count: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDto {
    #[serde(default = "default_truncation")]
    truncation: Real,
    #[serde(default)]
    max_order: Option<usize>,
    #[serde(default = "default_method")]
    method: MethodDto,
    #[serde(default = "default_exact_limit")]
    exact_event_limit: usize,
    #[serde(default = "default_max_sets")]
    max_intermediate_sets: usize,
    #[serde(default = "default_low_order")]
    low_order_threshold: usize,
    #[serde(default)]
    prune_during_expansion: bool,
    /// UCA category → top kinds it applies to. Absent means the default
    /// matrix; present replaces it entirely.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    applicability: Option<BTreeMap<CategoryDto, Vec<TopKindDto>>>,
}

fn default_truncation() -> Real {
    Real(AnalysisConfig::DEFAULT_TRUNCATION)
}
fn default_method() -> MethodDto {
    MethodDto::Mcub
}
fn default_exact_limit() -> usize {
    AnalysisConfig::DEFAULT_EXACT_LIMIT
}
fn default_max_sets() -> usize {
    AnalysisConfig::DEFAULT_MAX_SETS
}
fn default_low_order() -> usize {
    AnalysisConfig::default().low_order_threshold
}

impl Default for ConfigDto {
    fn default() -> Self {
        Self {
            truncation: default_truncation(),
            max_order: None,
            method: default_method(),
            exact_event_limit: default_exact_limit(),
            max_intermediate_sets: default_max_sets(),
            low_order_threshold: default_low_order(),
            prune_during_expansion: false,
            applicability: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub(crate) enum MethodDto {
    Exact,
    RareEvent,
    Mcub,
}

impl From<MethodDto> for Method {
    fn from(m: MethodDto) -> Self {
        match m {
            MethodDto::Exact => Method::Exact,
            MethodDto::RareEvent => Method::RareEvent,
            MethodDto::Mcub => Method::Mcub,
        }
    }
}

impl From<Method> for MethodDto {
    fn from(m: Method) -> Self {
        match m {
            Method::Exact => MethodDto::Exact,
            Method::RareEvent => MethodDto::RareEvent,
            Method::Mcub => MethodDto::Mcub,
        }
    }
}

macro_rules! enum_map {
    ($from:ty => $to:ty { $($a:ident <=> $b:ident),* $(,)? }) => {
        impl From<$from> for $to {
            fn from(v: $from) -> Self {
                match v { $(<$from>::$a => <$to>::$b),* }
            }
        }
        impl From<$to> for $from {
            fn from(v: $to) -> Self {
                match v { $(<$to>::$b => <$from>::$a),* }
            }
        }
    };
}

enum_map!(TopKindDto => TopKind {
    FailureOnDemand <=> FailureOnDemand,
    SpuriousActuation <=> SpuriousActuation,
});
enum_map!(EventKindDto => EventKind {
    Hardware <=> Hardware,
    Software <=> Software,
    Ccf <=> Ccf,
    House <=> House,
});
enum_map!(CategoryDto => UcaCategory {
    NotProvided <=> NotProvided,
    ProvidedUnneeded <=> ProvidedUnneeded,
    WrongTiming <=> WrongTimingOrOrder,
    WrongDuration <=> WrongDuration,
});
enum_map!(CauseDto => CauseClass {
    Controller <=> UnsafeControllerBehavior,
    Feedback <=> InadequateFeedback,
});

/// Inserts into `map`, failing on a repeated id.
fn insert_unique<T>(
    map: &mut BTreeMap<String, T>,
    namespace: &str,
    id: String,
    value: T,
) -> Result<(), ParseError> {
    if map.contains_key(&id) {
        return Err(ParseError::DuplicateId {
            namespace: namespace.to_string(),
            id,
        });
    }
    map.insert(id, value);
    Ok(())
}

/// Parses and resolves a model file. Range checks on probabilities are left
/// to [`iradic_core::validate_model`], which reports them as findings.
pub fn parse_model(text: &str) -> Result<Model, ParseError> {
    let file: ModelFile = serde_json::from_str(text)?;
    let mut m = Model::default();

    for ft in file.fault_trees {
        let tree = fault_tree(ft)?;
        insert_unique(&mut m.fault_trees, "fault_trees", tree.id.clone(), tree)?;
    }
    for g in file.ccf_groups {
        let group = CcfGroup {
            id: g.id,
            members: g.members,
            total_probability: g.total_p.0,
            levels: g
                .levels
                .into_iter()
                .map(|l| CcfLevel {
                    label: l.label,
                    beta: l.beta.0,
                    layer: l.layer,
                    scope: l.scope,
                })
                .collect(),
        };
        insert_unique(&mut m.ccf_groups, "ccf_groups", group.id.clone(), group)?;
    }
    let mut uca_ids = BTreeSet::new();
    for u in file.uca_catalog {
        if !uca_ids.insert(u.id.clone()) {
            return Err(ParseError::DuplicateId {
                namespace: "uca_catalog".into(),
                id: u.id,
            });
        }
        m.uca_catalog.push(UcaRecord {
            id: u.id,
            controller: u.controller,
            control_action: u.action,
            category: u.category.into(),
            continuous_action: u.continuous,
            cause_class: u.cause_class.into(),
            redundancy_layer: u.layer,
            probability: u.p.map(|r| r.0),
        });
    }
    for b in file.bbns {
        let bbn = bbn(b)?;
        insert_unique(&mut m.bbns, "bbns", bbn.id.clone(), bbn)?;
    }
    for et in file.event_trees {
        let tree = event_tree(et)?;
        insert_unique(&mut m.event_trees, "event_trees", tree.id.clone(), tree)?;
    }
    m.config = config(file.config);

    if let Some((location, id)) = unresolved_references(&m).into_iter().next() {
        return Err(ParseError::UnresolvedReference { location, id });
    }
    Ok(m)
}

fn fault_tree(ft: FaultTreeDto) -> Result<FaultTree, ParseError> {
    let mut nodes: BTreeMap<String, Node> = BTreeMap::new();
    let namespace = format!("fault tree {}", ft.id);
    for g in ft.gates {
        let kind = match (g.kind, g.k) {
            (GateKindDto::And, None) => GateKind::And,
            (GateKindDto::Or, None) => GateKind::Or,
            (GateKindDto::Atleast, Some(k)) => GateKind::AtLeast(k),
            (GateKindDto::Atleast, None) => {
                return Err(invalid(
                    format!("ft {}/{}", ft.id, g.id),
                    "atleast gate needs `k`",
                ))
            }
            (_, Some(_)) => {
                return Err(invalid(
                    format!("ft {}/{}", ft.id, g.id),
                    "`k` is only allowed on atleast gates",
                ))
            }
        };
        let mut gate = Gate::new(g.id.clone(), kind, g.inputs);
        gate.label = g.label;
        insert_unique(&mut nodes, &namespace, g.id, Node::Gate(gate))?;
    }
    for e in ft.events {
        let location = format!("ft {}/{}", ft.id, e.id);
        let kind: EventKind = e.kind.into();
        let probability = match (kind, e.p, e.house_state) {
            (EventKind::House, p, Some(state)) => p.map_or(if state { 1.0 } else { 0.0 }, |r| r.0),
            (EventKind::House, _, None) => {
                return Err(invalid(location, "house event needs `house_state`"))
            }
            (_, _, Some(_)) => {
                return Err(invalid(
                    location,
                    "`house_state` is only allowed on house events",
                ))
            }
            (_, Some(p), None) => p.0,
            (_, None, None) => return Err(invalid(location, "missing probability `p`")),
        };
        let event = BasicEvent {
            id: e.id.clone(),
            probability,
            kind,
            house_state: e.house_state,
            ccf_group: e.ccf_group,
            label: e.label,
        };
        insert_unique(&mut nodes, &namespace, e.id, Node::Event(event))?;
    }
    Ok(FaultTree {
        id: ft.id,
        top: ft.top,
        top_kind: ft.top_kind.into(),
        nodes,
    })
}

fn bbn(b: BbnDto) -> Result<Bbn, ParseError> {
    let mut out = Bbn::new(b.id.clone());
    for n in b.nodes {
        let node = BbnNode {
            id: n.id.clone(),
            parents: n.parents,
            cpt: n.cpt.into_iter().map(|r| r.0).collect(),
        };
        insert_unique(&mut out.nodes, &format!("bbn {}", b.id), n.id, node)?;
    }
    out.queries = b.queries;
    out.bahamas = b.bahamas.map(|c| BahamasConfig {
        query: c.query,
        adjustment_factor: c.adjustment_factor.0,
        levels: c
            .levels
            .into_iter()
            .map(|l| BetaLevel {
                label: l.label,
                beta: l.beta.0,
            })
            .collect(),
    });
    Ok(out)
}

fn event_tree(et: EventTreeDto) -> Result<EventTree, ParseError> {
    let mut seen = BTreeSet::new();
    let mut sequences = Vec::with_capacity(et.sequences.len());
    for s in et.sequences {
        if !seen.insert(s.id.clone()) {
            return Err(ParseError::DuplicateId {
                namespace: format!("event tree {} sequences", et.id),
                id: s.id,
            });
        }
        let path = s
            .path
            .chars()
            .map(|c| {
                Branch::from_char(c).ok_or_else(|| {
                    invalid(
                        format!("et {}/{}", et.id, s.id),
                        format!("path character `{c}` is not S, F or -"),
                    )
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        sequences.push(Sequence {
            id: s.id,
            path,
            end_state: s.end_state,
            probability: s.frequency.map(|r| r.0),
            cutset_count: s.cutset_count,
        });
    }
    let mut fe_ids = BTreeSet::new();
    for fe in &et.functional_events {
        if !fe_ids.insert(fe.id.clone()) {
            return Err(ParseError::DuplicateId {
                namespace: format!("event tree {} functional events", et.id),
                id: fe.id.clone(),
            });
        }
    }
    Ok(EventTree {
        id: et.id,
        initiating_event: InitiatingEvent {
            id: et.initiating_event.id,
            frequency: et.initiating_event.frequency.0,
        },
        functional_events: et
            .functional_events
            .into_iter()
            .map(|f| FunctionalEvent {
                id: f.id,
                fault_tree: f.fault_tree,
                gate: f.gate,
            })
            .collect(),
        sequences,
    })
}

fn config(c: ConfigDto) -> AnalysisConfig {
    let applicability = match c.applicability {
        None => ApplicabilityMatrix::default(),
        Some(map) => {
            let mut matrix = ApplicabilityMatrix::default();
            for cat in UcaCategory::ALL {
                for top in TopKind::ALL {
                    matrix.set(cat, top, false);
                }
            }
            for (cat, tops) in map {
                for top in tops {
                    matrix.set(cat.into(), top.into(), true);
                }
            }
            matrix
        }
    };
    AnalysisConfig {
        truncation_probability: c.truncation.0,
        max_cutset_order: c.max_order,
        applicability,
        quantification_method: c.method.into(),
        exact_event_limit: c.exact_event_limit,
        max_intermediate_sets: c.max_intermediate_sets,
        low_order_threshold: c.low_order_threshold,
        prune_during_expansion: c.prune_during_expansion,
    }
}

#[derive(Debug, thiserror::Error)]
#[error("cannot write non-finite value at {location}")]
pub struct RenderError {
    pub location: String,
}

fn real(value: f64, location: impl FnOnce() -> String) -> Result<Real, RenderError> {
    if value.is_finite() {
        Ok(Real(value))
    } else {
        Err(RenderError {
            location: location(),
        })
    }
}

/// Canonical JSON text of `m`: two-space indentation, every configuration
/// field spelled out, trailing newline.
pub fn render_model(m: &Model) -> Result<String, RenderError> {
    let mut file = ModelFile::default();
    for ft in m.fault_trees.values() {
        let mut gates = Vec::new();
        let mut events = Vec::new();
        for node in ft.nodes.values() {
            match node {
                Node::Gate(g) => {
                    let (kind, k) = match g.kind {
                        GateKind::And => (GateKindDto::And, None),
                        GateKind::Or => (GateKindDto::Or, None),
                        GateKind::AtLeast(k) => (GateKindDto::Atleast, Some(k)),
                    };
                    gates.push(GateDto {
                        id: g.id.clone(),
                        kind,
                        k,
                        inputs: g.inputs.clone(),
                        label: g.label.clone(),
                    });
                }
                Node::Event(e) => events.push(EventDto {
                    id: e.id.clone(),
                    p: Some(real(e.probability, || format!("ft {}/{}", ft.id, e.id))?),
                    kind: e.kind.into(),
                    house_state: e.house_state,
                    ccf_group: e.ccf_group.clone(),
                    label: e.label.clone(),
                }),
            }
        }
        file.fault_trees.push(FaultTreeDto {
            id: ft.id.clone(),
            top: ft.top.clone(),
            top_kind: ft.top_kind.into(),
            gates,
            events,
        });
    }
    for et in m.event_trees.values() {
        let mut sequences = Vec::new();
        for s in &et.sequences {
            sequences.push(SequenceDto {
                id: s.id.clone(),
                path: s.path.iter().map(|b| b.as_char()).collect(),
                end_state: s.end_state.clone(),
                frequency: s
                    .probability
                    .map(|p| real(p, || format!("et {}/{}", et.id, s.id)))
                    .transpose()?,
                cutset_count: s.cutset_count,
            });
        }
        file.event_trees.push(EventTreeDto {
            id: et.id.clone(),
            initiating_event: InitiatorDto {
                id: et.initiating_event.id.clone(),
                frequency: real(et.initiating_event.frequency, || format!("et {}", et.id))?,
            },
            functional_events: et
                .functional_events
                .iter()
                .map(|f| FunctionalEventDto {
                    id: f.id.clone(),
                    fault_tree: f.fault_tree.clone(),
                    gate: f.gate.clone(),
                })
                .collect(),
            sequences,
        });
    }
    for g in m.ccf_groups.values() {
        let loc = || format!("ccf {}", g.id);
        file.ccf_groups.push(CcfGroupDto {
            id: g.id.clone(),
            members: g.members.clone(),
            total_p: real(g.total_probability, loc)?,
            levels: g
                .levels
                .iter()
                .map(|l| {
                    Ok(CcfLevelDto {
                        label: l.label.clone(),
                        beta: real(l.beta, loc)?,
                        layer: l.layer.clone(),
                        scope: l.scope.clone(),
                    })
                })
                .collect::<Result<_, RenderError>>()?,
        });
    }
    for u in &m.uca_catalog {
        file.uca_catalog.push(UcaDto {
            id: u.id.clone(),
            controller: u.controller.clone(),
            action: u.control_action.clone(),
            category: u.category.into(),
            continuous: u.continuous_action,
            cause_class: u.cause_class.into(),
            layer: u.redundancy_layer.clone(),
            p: u.probability
                .map(|p| real(p, || format!("uca {}", u.id)))
                .transpose()?,
        });
    }
    for b in m.bbns.values() {
        let loc = || format!("bbn {}", b.id);
        file.bbns.push(BbnDto {
            id: b.id.clone(),
            nodes: b
                .nodes
                .values()
                .map(|n| {
                    Ok(BbnNodeDto {
                        id: n.id.clone(),
                        parents: n.parents.clone(),
                        cpt: n
                            .cpt
                            .iter()
                            .map(|p| real(*p, loc))
                            .collect::<Result<_, _>>()?,
                    })
                })
                .collect::<Result<_, RenderError>>()?,
            queries: b.queries.clone(),
            bahamas: b
                .bahamas
                .as_ref()
                .map(|c| {
                    Ok(BahamasDto {
                        query: c.query.clone(),
                        adjustment_factor: real(c.adjustment_factor, loc)?,
                        levels: c
                            .levels
                            .iter()
                            .map(|l| {
                                Ok(BetaLevelDto {
                                    label: l.label.clone(),
                                    beta: real(l.beta, loc)?,
                                })
                            })
                            .collect::<Result<_, RenderError>>()?,
                    })
                })
                .transpose()?,
        });
    }
    let c = &m.config;
    let mut applicability = BTreeMap::new();
    for cat in UcaCategory::ALL {
        let tops: Vec<TopKindDto> = TopKind::ALL
            .into_iter()
            .filter(|t| c.applicability.get(cat, *t))
            .map(Into::into)
            .collect();
        applicability.insert(cat.into(), tops);
    }
    file.config = ConfigDto {
        truncation: real(c.truncation_probability, || "config".into())?,
        max_order: c.max_cutset_order,
        method: c.quantification_method.into(),
        exact_event_limit: c.exact_event_limit,
        max_intermediate_sets: c.max_intermediate_sets,
        low_order_threshold: c.low_order_threshold,
        prune_during_expansion: c.prune_during_expansion,
        applicability: Some(applicability),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("model DTOs always serialize");
    text.push('\n');
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_accept_numbers_and_strings() {
        assert_eq!(parse_real("5.388E-07"), Ok(5.388e-7));
        assert_eq!(parse_real("0.001"), Ok(1e-3));
        assert_eq!(parse_real("1e-3"), Ok(1e-3));
        assert!(parse_real("inf").is_err());
        assert!(parse_real("NaN").is_err());
        assert!(parse_real("").is_err());
        assert!(parse_real("1E999").unwrap_err().contains("out of range"));
    }

    #[test]
    fn gate_k_rules() {
        let text = r#"{"fault_trees":[{"id":"T","top":"G","gates":[{"id":"G","kind":"and","k":1,"inputs":["A"]}],"events":[{"id":"A","p":0.1,"kind":"hardware"}]}]}"#;
        assert!(matches!(parse_model(text), Err(ParseError::Invalid { .. })));
        let text = r#"{"fault_trees":[{"id":"T","top":"G","gates":[{"id":"G","kind":"atleast","inputs":["A"]}],"events":[{"id":"A","p":0.1,"kind":"hardware"}]}]}"#;
        assert!(matches!(parse_model(text), Err(ParseError::Invalid { .. })));
    }

    #[test]
    fn applicability_round_trips() {
        let mut m = Model::default();
        m.config.applicability.set(
            UcaCategory::WrongTimingOrOrder,
            TopKind::SpuriousActuation,
            true,
        );
        let back = parse_model(&render_model(&m).unwrap()).unwrap();
        assert_eq!(back.config, m.config);
    }
}

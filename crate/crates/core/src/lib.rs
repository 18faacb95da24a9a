//! Quantitative core of the iradic risk engine.
//!
//! The crate builds integrated fault trees (hardware failures, software
//! failures derived from unsafe control actions, and common cause failures),
//! enumerates their minimal cut sets, quantifies top events, estimates
//! software failure probabilities with a Bayesian belief network, and
//! quantifies event trees into per-sequence frequencies.
//!
//! Everything here is pure computation over an immutable [`Model`]. File
//! formats, reports and the command line live in the `iradic` crate.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod bbn;
pub mod ccf;
pub mod cutset;
pub mod error;
pub mod etree;
mod exact;
mod logic;
pub mod model;
pub mod prob;
pub mod resha;
pub mod validate;

pub use bbn::{
    bahamas_configured, bahamas_estimate, infer_marginal, validate_bbn, BahamasConfig,
    BahamasResult, Bbn, BbnNode, BetaLevel, State,
};
pub use ccf::{beta_split, expand_ccf_groups, CcfGroup, CcfLevel, SplitResult};
pub use cutset::{
    exact_top_probability, find_spofs, fussell_vesely, mcub_probability, minimal_cut_sets,
    minimal_cut_sets_at, rare_event_probability, top_probability, CutSet, CutSetList,
    ImportanceResult,
};
pub use error::{Error, LayeredMember, Result};
pub use etree::{
    branch_probability, compare_event_trees, quantify_event_tree, sequence_cutsets,
    sequence_probability, Branch, ComparisonReport, ComparisonRow, EtResult, EventTree,
    FunctionalEvent, InitiatingEvent, Sequence, SequenceResult,
};
pub use model::{
    AnalysisConfig, ApplicabilityMatrix, BasicEvent, EventKind, FaultTree, Gate, GateKind, Method,
    Model, Node, TopKind,
};
pub use prob::{render_percent, render_probability};
pub use resha::{
    attach_software_ccf, attach_software_failures, filter_applicable_ucas, hazard_report,
    CauseClass, HazardReport, IntegratedFaultTree, Origin, UcaCategory, UcaRecord,
};
pub use validate::{validate_model, Finding, Severity, ValidationReport};

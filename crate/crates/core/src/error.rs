use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("cycle: {0}")]
    Cycle(String),
    #[error("resource limit exceeded: more than {cap} intermediate cut sets")]
    ResourceLimit { cap: usize },
    #[error("exact quantification is limited to {limit} basic events, found {count}")]
    TooManyEvents { limit: usize, count: usize },
    #[error("at-least gate `{gate}` has {n} inputs, expansion is limited to {limit}")]
    GateTooWide {
        gate: String,
        n: usize,
        limit: usize,
    },
    #[error("top event `{0}` is always true under the house event settings")]
    TopAlwaysTrue(String),
    #[error("cut set list is empty or has zero total probability")]
    EmptyCutSets,
    #[error("beta factors sum to {0}, which exceeds 1")]
    BetaSumExceedsOne(f64),
    #[error("{what} = {value} is outside [0, 1]")]
    ProbabilityOutOfRange { what: String, value: f64 },
    #[error("{what} = {value} must be a finite non-negative number")]
    InvalidNumber { what: String, value: f64 },
    #[error("CCF group `{group}`: member `{member}` not found")]
    MemberNotFound { group: String, member: String },
    #[error("`{0}` has already been expanded into CCF parts")]
    AlreadyExpanded(String),
    #[error("UCA `{0}` is already attached")]
    DuplicateAttachment(String),
    #[error("UCA `{uca}`: controller `{controller}` not found in fault tree")]
    ControllerNotFound { uca: String, controller: String },
    #[error("CCF group `{group}` level `{level}` mixes redundancy layers: {} and {}", members[0], members[1])]
    LayerMismatch {
        group: String,
        level: String,
        members: Box<[LayeredMember; 2]>,
    },
    #[error("CCF group `{group}` level `{level}`: member {member} lies outside layer `{allowed}`")]
    LayerOutsideLevel {
        group: String,
        level: String,
        member: Box<LayeredMember>,
        allowed: String,
    },
    #[error("evidence has probability zero, the conditional is undefined")]
    ZeroProbabilityEvidence,
    #[error("sequence sets differ: {0}")]
    SequenceMismatch(String),
    #[error("value is not finite")]
    NonFinite,
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// A software event together with its redundancy layer, for layer errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayeredMember {
    pub id: String,
    pub layer: String,
}

impl fmt::Display for LayeredMember {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}` ({})", self.id, self.layer)
    }
}

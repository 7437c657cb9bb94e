use thiserror::Error;

use crate::tree::Subtree;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("edge list must not be empty")]
    EmptyTree,
    #[error("edge {0} has a nonpositive length")]
    NonpositiveLength(usize),
    #[error("edge list contains a cycle (closed by edge {0})")]
    CycleDetected(usize),
    #[error("tree is disconnected")]
    Disconnected,
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("point is not on the tree: {0}")]
    PointNotOnTree(String),
    #[error("invalid subtree: {0}")]
    InvalidSubtree(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("maps are defined on different trees")]
    DomainMismatch,
    #[error("composition exceeds the breakpoint budget of {0}")]
    BreakpointBudgetExceeded(usize),
    #[error("map fixes {} whole segment(s)", .0.len())]
    FixedSegmentPresent(Vec<Subtree>),
    #[error("requested period {requested} exceeds the cap {cap}")]
    PeriodCapExceeded { requested: usize, cap: usize },
    #[error("subtree is not invariant under the map")]
    NotInvariant,
    #[error("collapsing the whole tree leaves no edges")]
    DegenerateQuotient,
    #[error("epsilon must be positive")]
    NonpositiveEpsilon,
    #[error("iteration budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error("windowed liminf is empty")]
    EmptyLiminf,
    #[error("windowed limsup is disconnected")]
    DisconnectedLimsup,
    #[error("sequence is not consistent with the anchor point")]
    NotConsistent,
    #[error("the subcontinuum contains no fixed point")]
    NoFixedPointInA,
    #[error("a cut-point is fixed: {0}")]
    FixedCutPointFound(String),
    #[error("attracting fixed point descent stalled")]
    DescentStalled(Vec<crate::analysis::DescentStep>),
    #[error("grid resolution is too coarse: {0}")]
    GridTooCoarse(String),
    #[error("Lipschitz bound overflowed")]
    LipschitzOverflow,
    #[error("map is not Markov over the partition (piece {piece}): {reason}")]
    NotMarkov { piece: usize, reason: String },
    #[error("epsilon too large: K = floor(1/(2 eps)) - 1 < 1")]
    EpsilonTooLarge,
    #[error("cannot parse rational `{0}`")]
    BadRational(String),
    #[error("spec error: {0}")]
    Spec(String),
}

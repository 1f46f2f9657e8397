//! Ground evaluation over signed heaps and satisfaction matching against
//! concrete heaps.

mod eval;
mod lint;
mod matching;
mod signed;

use thiserror::Error;

use crate::heap::Edge;

pub(crate) use eval::instantiate;
pub use eval::{desugar, desugar_path, eval_ground, eval_ground_in};
pub use lint::lint;
pub use matching::{match_formula, Binding, MAX_MATCH_EDGES};
pub use signed::{conjoin, conjoin_chain, disjoin, EvalResultOf, HeapEdge, Sign, SignedHeapOf};

/// Signed heap over concrete edges.
pub type SignedHeap = SignedHeapOf<Edge>;
pub type EvalResult = EvalResultOf<Edge>;

/// Default unfolding depth for predicate calls.
pub const DEFAULT_FUEL: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("predicate `{0}` unfolded past the fuel limit")]
    FuelExhausted(String),
    #[error("undefined predicate `{0}`")]
    UndefinedPredicate(String),
    #[error("predicate `{pred}` takes {expected} argument(s), {given} given")]
    ArityMismatch {
        pred: String,
        given: usize,
        expected: usize,
    },
    #[error("inversion cannot be matched against a heap")]
    InversionNotMatchable,
    #[error("`{0}` only has meaning when matched against a heap")]
    NotGround(String),
    #[error("heap {0} breaks source uniqueness or label discipline")]
    MalformedHeap(String),
    #[error("heap has {0} edges; matching supports at most 64")]
    HeapTooLarge(usize),
}

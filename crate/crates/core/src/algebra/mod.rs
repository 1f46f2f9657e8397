//! Symbolic rewriting and decision procedures: inversion push-down,
//! normalization, edge subtraction, equivalence, the sub-heap order and the
//! law suite.

mod equiv;
mod laws;
mod order;
mod rewrite;
mod split;

use thiserror::Error;

use crate::heap::Edge;
use crate::oracle::OracleError;
use crate::semantics::SemanticsError;

pub use equiv::{decide, equivalent, Method, Verdict};
pub use laws::{check_laws, LawResult, LAW_BUDGET, LAW_NAMES};
pub use order::{is_maximal, leq, supremum};
pub use rewrite::{normalize, push_inversion};
pub use split::{components_without, conj_form, edge_formula, heap_formula, subtract_edge};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("edge `{0}` is not in the heap")]
    EdgeNotPresent(Edge),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl From<SemanticsError> for AlgebraError {
    fn from(e: SemanticsError) -> Self {
        AlgebraError::Oracle(OracleError::Semantics(e))
    }
}

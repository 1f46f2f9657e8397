//! A points-to heap logic with a strict connecting conjunction `∘`, an
//! independence disjunction `∥` and formal heap inversion.
//!
//! Heaps are finite sets of labelled edges between symbolic locations.
//! `h1 ∘ h2` is defined only when the two heaps meet in exactly one vertex and
//! is `false` otherwise; `h1 ∥ h2` requires them to share no vertex at all.
//! Inversion lives in [`SignedHeap`], an edge multiset with integer
//! multiplicities where `G ∘ G⁻¹ = emp`.

pub mod algebra;
pub mod formula;
pub mod heap;
pub mod oracle;
pub mod semantics;
pub mod verifier;

pub use algebra::{equivalent, leq, normalize, push_inversion, subtract_edge, AlgebraError};
pub use formula::{parse_defs, parse_formula, print_formula, Defs, Formula, PredicateDef, Term};
pub use heap::{Atom, Edge, FieldLabel, Heap, Location, StackEnv, Value};
pub use oracle::{enumerate_heaps, oracle_equiv, UniverseSpec};
pub use semantics::{
    conjoin, conjoin_chain, disjoin, eval_ground, match_formula, Binding, EvalResult, SignedHeap,
    DEFAULT_FUEL,
};
pub use verifier::{frame_apply, frame_split, Spec, VerifierError};

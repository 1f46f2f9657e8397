//! Frame-rule support: split a heap into the footprint a procedure
//! precondition describes and an independent frame, then replace the
//! footprint by the postcondition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::formula::{parse_spec_document, Defs, DefsError, Formula, Term};
use crate::heap::{components, Heap, Location, StackEnv, Value};
use crate::semantics::{
    disjoin, eval_ground_in, instantiate, match_formula, Binding, EvalResult, SemanticsError,
    SignedHeap,
};

/// Most components [`frame_split`] will search over; every subset of the
/// components is a candidate footprint.
pub const MAX_SPLIT_COMPONENTS: usize = 20;

/// A procedure contract `{pre} name {post}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spec {
    pub name: String,
    pub pre: Formula,
    pub post: Formula,
}

impl Spec {
    /// Rejects contracts that mention inversion, which may invalidate the
    /// frame rule.
    pub fn new(
        name: impl Into<String>,
        pre: Formula,
        post: Formula,
    ) -> Result<Self, VerifierError> {
        let name = name.into();
        if pre.contains_inv() || post.contains_inv() {
            return Err(VerifierError::InversionInSpec(name));
        }
        Ok(Spec { name, pre, post })
    }
}

impl fmt::Display for Spec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "spec {}: {{{}}} -> {{{}}}",
            self.name, self.pre, self.post
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailureCause {
    /// No part of the heap independent of the rest satisfies the
    /// precondition.
    NoSplit,
    /// The postcondition, or its union with the frame, is `false`.
    FalseResult(String),
}

impl fmt::Display for FailureCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureCause::NoSplit => {
                f.write_str("no independent footprint satisfies the precondition")
            }
            FailureCause::FalseResult(why) => write!(f, "{why} is false"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifierError {
    #[error("spec `{0}` uses heap inversion, which may invalidate the frame rule")]
    InversionInSpec(String),
    #[error("no independent footprint satisfies the precondition")]
    NoSplit,
    #[error("heap has {0} components, more than the {MAX_SPLIT_COMPONENTS} a split search covers")]
    TooManyComponents(usize),
    #[error("needed {needed} fresh locations, only {available} available")]
    FreshLocationExhausted { needed: usize, available: usize },
    #[error("verification failed: {0}")]
    VerificationFailure(FailureCause),
    #[error("no spec named `{0}`")]
    UnknownSpec(String),
    #[error(transparent)]
    Defs(#[from] DefsError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// Specs and definitions read from a spec file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpecFile {
    pub specs: Vec<Spec>,
    pub defs: Defs,
}

impl SpecFile {
    pub fn get(&self, name: &str) -> Result<&Spec, VerifierError> {
        self.specs
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| VerifierError::UnknownSpec(name.to_string()))
    }
}

/// Parses `spec name: {pre} -> {post}` lines and `def` lines.
pub fn parse_specs(text: &str) -> Result<SpecFile, VerifierError> {
    let doc = parse_spec_document(text)?;
    let specs = doc
        .specs
        .into_iter()
        .map(|(name, pre, post)| Spec::new(name, pre, post))
        .collect::<Result<_, _>>()?;
    Ok(SpecFile {
        specs,
        defs: doc.defs,
    })
}

/// A heap divided into a footprint and a vertex-disjoint frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub binding: Binding,
    pub footprint: Heap,
    pub frame: Heap,
}

/// Finds the smallest footprint of `h` that satisfies `p` and shares no
/// vertex with the rest of the heap.
///
/// Vertex-disjointness means the footprint is a union of whole components,
/// so candidates are the subsets of the components, tried in order of edge
/// count and then of their sorted edge lists. Among the bindings of the
/// winning footprint the least one is returned.
pub fn frame_split(
    h: &Heap,
    p: &Formula,
    s: &StackEnv,
    defs: &Defs,
    fuel: usize,
) -> Result<Split, VerifierError> {
    if p.contains_inv() {
        return Err(VerifierError::InversionInSpec(p.to_string()));
    }
    let parts = components(h);
    if parts.len() > MAX_SPLIT_COMPONENTS {
        return Err(VerifierError::TooManyComponents(parts.len()));
    }
    let mut candidates: Vec<Heap> = (0u32..1 << parts.len())
        .map(|mask| {
            parts
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .flat_map(|(_, c)| c.iter().cloned())
                .collect()
        })
        .collect();
    candidates.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    for footprint in candidates {
        let bindings = match_formula(p, &footprint, s, defs, fuel)?;
        if let Some(binding) = bindings.into_iter().next() {
            let frame = h.without(footprint.iter());
            return Ok(Split {
                binding,
                footprint,
                frame,
            });
        }
    }
    Err(VerifierError::NoSplit)
}

/// A successful procedure application.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Applied {
    pub split: Split,
    /// Locations invented for post-state symbols.
    pub fresh: Vec<Location>,
    /// The heap the postcondition describes.
    pub post: Heap,
    /// `post + frame`.
    pub result: Heap,
}

/// Applies `spec` to `h`: splits off a footprint satisfying the
/// precondition, builds the post-state heap and rejoins it with the
/// untouched frame.
///
/// Post symbols take their value from the precondition binding, then from
/// the stack; any other symbol, and every top-level existential of the
/// postcondition, gets a fresh location not used by `h`, the stack or the
/// binding.
pub fn frame_apply(
    spec: &Spec,
    h: &Heap,
    s: &StackEnv,
    defs: &Defs,
    fuel: usize,
) -> Result<Applied, VerifierError> {
    frame_apply_with(spec, h, s, defs, fuel, None)
}

/// [`frame_apply`] drawing fresh locations only from `pool` when given.
pub fn frame_apply_with(
    spec: &Spec,
    h: &Heap,
    s: &StackEnv,
    defs: &Defs,
    fuel: usize,
    pool: Option<&[Location]>,
) -> Result<Applied, VerifierError> {
    if spec.pre.contains_inv() || spec.post.contains_inv() {
        return Err(VerifierError::InversionInSpec(spec.name.clone()));
    }
    let split = match frame_split(h, &spec.pre, s, defs, fuel) {
        Err(VerifierError::NoSplit) => {
            return Err(VerifierError::VerificationFailure(FailureCause::NoSplit))
        }
        other => other?,
    };

    let mut env: BTreeMap<String, Value> = split.binding.env.clone();
    let mut used: BTreeSet<String> = h.vertices().iter().map(|l| l.name().to_string()).collect();
    used.extend(s.roots().values().map(|l| l.name().to_string()));
    used.extend(
        env.values()
            .filter_map(Value::as_loc)
            .map(|l| l.name().to_string()),
    );
    used.extend(spec.pre.all_names());
    used.extend(spec.post.all_names());

    let unbound: Vec<String> = spec
        .post
        .free_symbols()
        .into_iter()
        .filter(|v| !env.contains_key(v) && s.get(v).is_none())
        .collect();
    for (v, loc) in s.roots() {
        if !env.contains_key(v) {
            env.insert(v.clone(), Value::Loc(loc.clone()));
        }
    }
    let needed = unbound.len() + top_binders(&spec.post);
    let mut fresh = FreshSource::new(pool, &used);
    let mut taken = Vec::new();
    for v in unbound {
        let loc = fresh.next(needed)?;
        env.insert(v, Value::Loc(loc.clone()));
        taken.push(loc);
    }
    let post = strip_binders(
        &instantiate(&spec.post, &env),
        &mut fresh,
        &mut taken,
        needed,
    )?;

    // existentials inside predicate bodies range over unused locations
    // first, then the footprint, then nil
    let mut universe: Vec<Value> = (0..2)
        .map_while(|_| fresh.next(needed + 2).ok())
        .map(Value::Loc)
        .collect();
    universe.extend(split.footprint.vertices().into_iter().map(Value::Loc));
    universe.push(Value::nil());

    let post_heap = match eval_ground_in(&post, defs, fuel, &universe, &BTreeMap::new())? {
        EvalResult::Heap(p) => p,
        EvalResult::False => {
            return Err(VerifierError::VerificationFailure(
                FailureCause::FalseResult("the postcondition".into()),
            ))
        }
    };
    let result = match disjoin(&post_heap, &SignedHeap::from(&split.frame)) {
        EvalResult::Heap(r) => r,
        EvalResult::False => {
            return Err(VerifierError::VerificationFailure(
                FailureCause::FalseResult("the union of the post-state and the frame".into()),
            ))
        }
    };
    let positive = |x: SignedHeap| {
        x.to_heap()
            .expect("inversion-free formulas yield plain heaps")
    };
    Ok(Applied {
        split,
        fresh: taken,
        post: positive(post_heap),
        result: positive(result),
    })
}

/// Number of existentials outside predicate bodies.
fn top_binders(f: &Formula) -> usize {
    let mut n = 0;
    f.visit(&mut |g| {
        if matches!(g, Formula::Exists(..)) {
            n += 1;
        }
    });
    n
}

fn strip_binders(
    f: &Formula,
    fresh: &mut FreshSource,
    taken: &mut Vec<Location>,
    needed: usize,
) -> Result<Formula, VerifierError> {
    Ok(match f {
        Formula::Exists(v, body) => {
            let loc = fresh.next(needed)?;
            let map = BTreeMap::from([(v.clone(), Term::sym(loc.name()))]);
            taken.push(loc);
            strip_binders(&body.substitute(&map), fresh, taken, needed)?
        }
        Formula::Conj(l, r) => Formula::conj(
            strip_binders(l, fresh, taken, needed)?,
            strip_binders(r, fresh, taken, needed)?,
        ),
        Formula::Disj(l, r) => Formula::disj(
            strip_binders(l, fresh, taken, needed)?,
            strip_binders(r, fresh, taken, needed)?,
        ),
        Formula::Inv(x) => Formula::inv(strip_binders(x, fresh, taken, needed)?),
        other => other.clone(),
    })
}

/// Unused location names: from a fixed pool, or `n0`, `n1`, ... otherwise.
struct FreshSource<'a> {
    pool: Option<&'a [Location]>,
    used: BTreeSet<String>,
    at: usize,
    handed: usize,
}

impl<'a> FreshSource<'a> {
    fn new(pool: Option<&'a [Location]>, used: &BTreeSet<String>) -> Self {
        FreshSource {
            pool,
            used: used.clone(),
            at: 0,
            handed: 0,
        }
    }

    fn next(&mut self, needed: usize) -> Result<Location, VerifierError> {
        loop {
            let name = match self.pool {
                Some(pool) => match pool.get(self.at) {
                    Some(l) => l.name().to_string(),
                    None => {
                        return Err(VerifierError::FreshLocationExhausted {
                            needed,
                            available: self.handed,
                        })
                    }
                },
                None => format!("n{}", self.at),
            };
            self.at += 1;
            if self.used.insert(name.clone()) {
                self.handed += 1;
                return Ok(Location::new(name));
            }
        }
    }
}

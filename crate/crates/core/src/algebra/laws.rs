use std::fmt;

use super::AlgebraError;
use crate::oracle::{
    compact_heaps, for_each_compact_heap, heap_count, weighted_heap_count, CompactEdge,
    CompactUniverse, OracleError, UniverseSpec,
};
use crate::semantics::{conjoin, disjoin, EvalResultOf, SignedHeapOf};

type Ch = SignedHeapOf<CompactEdge>;
type Res = EvalResultOf<CompactEdge>;

/// Work limit for [`check_laws`]: ordered heap pairs plus three-way splits.
pub const LAW_BUDGET: u128 = 1_000_000_000;

/// Outcome of one law over every instance the universe offers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawResult {
    pub name: &'static str,
    pub checked: u64,
    pub failures: u64,
    /// The first failing instance, rendered.
    pub counterexample: Option<String>,
}

impl LawResult {
    fn new(name: &'static str) -> Self {
        LawResult {
            name,
            checked: 0,
            failures: 0,
            counterexample: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
            if self.counterexample.is_none() {
                self.counterexample = Some(describe());
            }
        }
    }
}

impl fmt::Display for LawResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {} ({} instances", self.name, self.checked)?;
        if self.failures > 0 {
            write!(f, ", {} failures", self.failures)?;
        }
        f.write_str(")")?;
        if let Some(c) = &self.counterexample {
            write!(f, ": {c}")?;
        }
        Ok(())
    }
}

pub const LAW_NAMES: [&str; 9] = [
    "identity of emp for *",
    "identity of emp for +",
    "commutativity of *",
    "commutativity of +",
    "associativity of * where both sides are defined",
    "associativity of + where both sides are defined",
    "inverse cancellation",
    "inversion distributes over *",
    "emp is its own inverse",
];

/// Checks the algebraic laws of `*`, `+` and inversion on every heap, pair
/// and defined triple over `u`.
///
/// Pairs are checked exhaustively. A triple can only be defined under both
/// groupings when its three parts are edge-disjoint pieces of one valid
/// heap, so triples are generated as the three-way splits of every valid
/// heap with at most three times `u.max_edges` edges.
pub fn check_laws(u: &UniverseSpec, budget: u128) -> Result<Vec<LawResult>, AlgebraError> {
    let n = heap_count(u);
    let wide = UniverseSpec {
        max_edges: u.max_edges.saturating_mul(3),
        ..u.clone()
    };
    let work = n
        .saturating_mul(n)
        .saturating_add(weighted_heap_count(&wide, 3));
    if work > budget {
        return Err(OracleError::UniverseTooLarge { work, budget }.into());
    }

    let cu = CompactUniverse::new(u);
    let show = |h: &Ch| cu.expand_signed(h).to_string();
    let show_res = |r: &Res| match r {
        EvalResultOf::Heap(h) => show(h),
        EvalResultOf::False => "false".to_string(),
    };
    let heaps: Vec<Ch> = compact_heaps(u).into_iter().map(Ch::positive).collect();
    let negs: Vec<Ch> = heaps.iter().map(Ch::negate).collect();
    let emp = Ch::emp();
    let mut r: Vec<LawResult> = LAW_NAMES.iter().map(|&name| LawResult::new(name)).collect();

    for (h, g) in heaps.iter().zip(&negs) {
        let same = Res::Heap(h.clone());
        let (a, b) = (conjoin(h, &emp), conjoin(&emp, h));
        r[0].record(a == same && b == same, || {
            format!("{} * emp = {}", show(h), show_res(&a))
        });
        let (a, b) = (disjoin(h, &emp), disjoin(&emp, h));
        r[1].record(a == same && b == same, || {
            format!("{} + emp = {}", show(h), show_res(&a))
        });
        let (a, b) = (conjoin(h, g), conjoin(g, h));
        let cancelled = Res::Heap(emp.clone());
        r[6].record(a == cancelled && b == cancelled, || {
            format!("{} * its inverse = {}", show(h), show_res(&a))
        });
    }
    r[8].record(emp.negate() == emp, || {
        format!("emp^-1 = {}", show(&emp.negate()))
    });

    for i in 0..heaps.len() {
        let (a, na) = (&heaps[i], &negs[i]);
        for j in i..heaps.len() {
            let (b, nb) = (&heaps[j], &negs[j]);
            let ab = conjoin(a, b);
            let ba = conjoin(b, a);
            r[2].record(ab == ba, || {
                format!(
                    "{} * {} = {} but reversed {}",
                    show(a),
                    show(b),
                    show_res(&ab),
                    show_res(&ba)
                )
            });
            let pab = disjoin(a, b);
            let pba = disjoin(b, a);
            r[3].record(pab == pba, || {
                format!(
                    "{} + {} = {} but reversed {}",
                    show(a),
                    show(b),
                    show_res(&pab),
                    show_res(&pba)
                )
            });
            for (x, y, nx, ny, xy) in [(a, b, na, nb, &ab), (b, a, nb, na, &ba)] {
                let lhs = xy.negate();
                let rhs = conjoin(nx, ny);
                r[7].record(lhs == rhs, || {
                    format!(
                        "({} * {})^-1 = {} but inverses conjoin to {}",
                        show(x),
                        show(y),
                        show_res(&lhs),
                        show_res(&rhs)
                    )
                });
                if i == j {
                    break;
                }
            }
        }
    }

    let cap = u.max_edges;
    for_each_compact_heap(&wide, |whole| {
        let m = whole.len();
        let mut part = vec![0u8; m];
        loop {
            let mut sides: [Vec<CompactEdge>; 3] = Default::default();
            for (e, &p) in whole.iter().zip(&part) {
                sides[p as usize].push(*e);
            }
            if sides.iter().all(|s| s.len() <= cap) {
                let [a, b, c] = sides.map(Ch::positive);
                associativity(&mut r[4], conjoin, " * ", &a, &b, &c, &show);
                associativity(&mut r[5], disjoin, " + ", &a, &b, &c, &show);
            }
            // next base-3 assignment
            let mut k = 0;
            while k < m && part[k] == 2 {
                part[k] = 0;
                k += 1;
            }
            if k == m {
                break;
            }
            part[k] += 1;
        }
    });
    Ok(r)
}

fn associativity(
    law: &mut LawResult,
    op: fn(&Ch, &Ch) -> Res,
    sym: &str,
    a: &Ch,
    b: &Ch,
    c: &Ch,
    show: &dyn Fn(&Ch) -> String,
) {
    let (EvalResultOf::Heap(ab), EvalResultOf::Heap(bc)) = (op(a, b), op(b, c)) else {
        return;
    };
    let (left, right) = (op(&ab, c), op(a, &bc));
    if let (EvalResultOf::Heap(l), EvalResultOf::Heap(r)) = (&left, &right) {
        law.record(l == r, || {
            format!(
                "({a}{sym}{b}){sym}{c} = {} but {a}{sym}({b}{sym}{c}) = {}",
                show(l),
                show(r),
                a = show(a),
                b = show(b),
                c = show(c),
            )
        });
    }
}

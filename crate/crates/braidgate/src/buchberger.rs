//! Reduced Groebner bases, sized for the solver's per-component systems.
//!
//! The solver only ever hands this module small systems — connected
//! components of the equations graph, capped by a variable limit — so the
//! implementation favors clarity and determinism over large-scale
//! engineering: classic Buchberger with the product and chain criteria,
//! normal pair selection by lowest lcm degree, then full interreduction.
//!
//! # Key operations
//!
//! * [`buchberger`] — a reduced Groebner basis of the input ideal under
//!   the given term order, or a [`GroebnerOutcome::Skipped`] signal when
//!   the component has more variables than the caller's limit.
//! * [`normal_form`] — the division-algorithm remainder, used both inside
//!   the completion loop and by callers as an ideal-membership test.
//!
//! # Design notes
//!
//! Degrevlex is the order of choice for shrinking a system; lex costs
//! more but comes out triangular, which is what turns the last few
//! multivariate relations of a component into solvable assignments.
//!
//! Oversized components are a *signal*, not an error: the caller defers
//! them to a later solving stage, mirroring the way the elimination
//! pipeline ignores large components early on.
//!
//! Everything here is deterministic: the pending-pair queue is an ordered
//! set keyed by (lcm degree, indices), and the finished basis is sorted
//! by leading monomial. Two runs on the same input give identical output.

use std::collections::{BTreeSet, HashSet};

use crate::sparsepoly::{ExpVec, SparsePoly, TermOrder};

/// Result of a Groebner run: a basis, or a refusal because the component
/// exceeds the variable budget.
#[derive(Debug, Clone)]
pub enum GroebnerOutcome {
    /// Reduced Groebner basis, leading monomials strictly decreasing.
    Basis(Vec<SparsePoly>),
    /// The system has more distinct variables than `var_limit` allows.
    Skipped { var_count: usize, var_limit: usize },
}

impl GroebnerOutcome {
    pub fn basis(self) -> Option<Vec<SparsePoly>> {
        match self {
            GroebnerOutcome::Basis(b) => Some(b),
            GroebnerOutcome::Skipped { .. } => None,
        }
    }
}

/// Remainder of `p` on division by `basis` under `order` (full reduction:
/// every term of the remainder is divisible by no basis leading monomial).
pub fn normal_form(p: &SparsePoly, basis: &[SparsePoly], order: TermOrder) -> SparsePoly {
    let mut remainder = SparsePoly::zero(p.nvars());
    let mut work = p.clone();
    'outer: while let Some((lm, lc)) = work.leading_in(order).cloned() {
        for g in basis {
            let Some((gm, gc)) = g.leading_in(order) else { continue };
            if let Some(q) = lm.div(gm) {
                let scale = lc.mul(&gc.inv().expect("leading coefficient nonzero"));
                work = work.sub(&g.mul_monomial(&q, &scale));
                continue 'outer;
            }
        }
        let head = SparsePoly::monomial(work.nvars(), lm, lc);
        remainder = remainder.add(&head);
        work = work.sub(&head);
    }
    remainder
}

fn s_poly(f: &SparsePoly, g: &SparsePoly, order: TermOrder) -> SparsePoly {
    let (fm, fc) = f.leading_in(order).expect("nonzero");
    let (gm, gc) = g.leading_in(order).expect("nonzero");
    let lcm = fm.lcm(gm);
    let qf = lcm.div(fm).expect("lcm divisible by both");
    let qg = lcm.div(gm).expect("lcm divisible by both");
    let left = f.mul_monomial(&qf, &fc.inv().expect("nonzero lead"));
    let right = g.mul_monomial(&qg, &gc.inv().expect("nonzero lead"));
    left.sub(&right)
}

/// Computes a reduced Groebner basis under `order` of the ideal generated
/// by `polys`, refusing systems with more than `var_limit` variables.
pub fn buchberger(polys: &[SparsePoly], var_limit: usize, order: TermOrder) -> GroebnerOutcome {
    let mut vars: BTreeSet<u32> = BTreeSet::new();
    for p in polys {
        vars.extend(p.support());
    }
    if vars.len() > var_limit {
        return GroebnerOutcome::Skipped {
            var_count: vars.len(),
            var_limit,
        };
    }

    let mut basis: Vec<SparsePoly> = Vec::new();
    for p in polys {
        let q = p.monic_in(order);
        if !q.is_zero() && !basis.contains(&q) {
            basis.push(q);
        }
    }
    if basis.is_empty() {
        return GroebnerOutcome::Basis(Vec::new());
    }

    // Pending pairs, ordered by (lcm total degree, index pair): the
    // classic normal selection strategy, and a deterministic one.
    let mut pending: BTreeSet<(u32, usize, usize)> = BTreeSet::new();
    let mut processed: HashSet<(usize, usize)> = HashSet::new();
    let pair_degree = |f: &SparsePoly, g: &SparsePoly| -> u32 {
        f.leading_in(order)
            .unwrap()
            .0
            .lcm(&g.leading_in(order).unwrap().0)
            .degree()
    };
    for i in 0..basis.len() {
        for j in (i + 1)..basis.len() {
            pending.insert((pair_degree(&basis[i], &basis[j]), i, j));
        }
    }

    while let Some(&entry) = pending.iter().next() {
        pending.remove(&entry);
        let (_, i, j) = entry;
        processed.insert((i, j));
        let lt_i = &basis[i].leading_in(order).unwrap().0;
        let lt_j = &basis[j].leading_in(order).unwrap().0;
        // Product criterion: coprime leading monomials never contribute.
        if lt_i.coprime_with(lt_j) {
            continue;
        }
        // Chain criterion: a third element dividing the lcm whose pairs
        // with both ends are already handled makes this pair redundant.
        let lcm = lt_i.lcm(lt_j);
        let chained = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && basis[k].leading_in(order).unwrap().0.divides(&lcm)
                && processed.contains(&ordered(i, k))
                && processed.contains(&ordered(k, j))
        });
        if chained {
            continue;
        }
        let remainder =
            normal_form(&s_poly(&basis[i], &basis[j], order), &basis, order).monic_in(order);
        if remainder.is_zero() {
            continue;
        }
        let new_idx = basis.len();
        basis.push(remainder);
        for t in 0..new_idx {
            pending.insert((pair_degree(&basis[t], &basis[new_idx]), t, new_idx));
        }
    }

    GroebnerOutcome::Basis(interreduce(basis, order))
}

fn ordered(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Minimalizes and tail-reduces a Groebner basis; output is monic with
/// strictly decreasing leading monomials under `order`.
fn interreduce(mut basis: Vec<SparsePoly>, order: TermOrder) -> Vec<SparsePoly> {
    // Drop elements whose leading monomial another element divides.
    let mut keep = vec![true; basis.len()];
    for i in 0..basis.len() {
        if !keep[i] {
            continue;
        }
        for j in 0..basis.len() {
            if i == j || !keep[j] {
                continue;
            }
            let lt_i = &basis[i].leading_in(order).unwrap().0;
            let lt_j = &basis[j].leading_in(order).unwrap().0;
            if lt_j.divides(lt_i) && (lt_i != lt_j || j < i) {
                keep[i] = false;
                break;
            }
        }
    }
    let mut minimal: Vec<SparsePoly> = basis
        .drain(..)
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect();

    // Reduce every element against the others until stable.
    loop {
        let mut changed = false;
        for i in 0..minimal.len() {
            let others: Vec<SparsePoly> = minimal
                .iter()
                .enumerate()
                .filter_map(|(j, p)| (j != i).then(|| p.clone()))
                .collect();
            let reduced = normal_form(&minimal[i], &others, order).monic_in(order);
            if reduced != minimal[i] {
                minimal[i] = reduced;
                changed = true;
            }
        }
        minimal.retain(|p| !p.is_zero());
        if !changed {
            break;
        }
    }

    minimal.sort_by(|a, b| {
        b.leading_in(order)
            .unwrap()
            .0
            .cmp_in(&a.leading_in(order).unwrap().0, order)
    });
    minimal
}

/// True when the basis proves the system inconsistent (contains a nonzero
/// constant, i.e. the whole ring).
pub fn is_inconsistent(basis: &[SparsePoly]) -> bool {
    basis
        .iter()
        .any(|p| !p.is_zero() && p.leading().map_or(false, |(m, _)| m.is_one()))
}

/// Leading monomials of a basis under `order`, handy for membership
/// pre-checks.
pub fn leading_monomials(basis: &[SparsePoly], order: TermOrder) -> Vec<ExpVec> {
    basis
        .iter()
        .filter_map(|p| p.leading_in(order).map(|(m, _)| m.clone()))
        .collect()
}

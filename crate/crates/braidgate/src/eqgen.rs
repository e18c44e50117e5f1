//! Constraint-system generation: pentagon, hexagon, and orthogonality
//! equations over the F-symbol variables.
//!
//! Every F-matrix entry met during generation resolves to one of three
//! things: the constant `0` (inadmissible index), the constant `1`
//! (admissible with the vacuum among the upper labels, fixed by the
//! triangle identity), or a polynomial variable numbered by the sextuple
//! enumeration. Equations that collapse to `0 = 0` are dropped; the rest
//! are normalized and deduplicated.
//!
//! # Key operations
//!
//! * [`gen_pentagon`] — one equation per nonuple, `LHS - RHS` of the
//!   pentagon identity, optionally reduced against solver tables the
//!   moment it is created.
//! * [`gen_hexagon`] — one equation per sextuple and sign family, with
//!   R-symbols baked in as exact cyclotomic constants.
//! * [`gen_orthogonality`] — `F^T F = I` per admissible block, one
//!   equation per unordered column pair.
//! * [`fixed_assignments`] — the triangle-identity entries (all `1`).
//!
//! # Design notes
//!
//! Generation is striped: worker `w` of `W` enumerates every tuple but
//! processes only ordinals congruent to `w` mod `W`, and the coordinator
//! reassembles results in ordinal order before deduplicating. The output
//! is therefore bit-identical for every worker count.
//!
//! Rigidity is deliberately not generated: orthogonal solutions satisfy
//! it automatically, so it lives in the verification pass instead, which
//! keeps the Groebner input small.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::catalog::{index_sextuples, FusionRingData, Label, SextupleIndex};
use crate::cyclo::CycloNumber;
use crate::sparsepoly::{ExpVec, SparsePoly};

/// Errors from equation generation.
#[derive(Debug, thiserror::Error)]
pub enum EqgenError {
    #[error("missing R-symbol for admissible triple ({0}, {1}; {2})")]
    MissingRSymbol(String, String, String),
}

/// Which hexagon family: the one with plain R factors or inverse ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HexSign {
    Plus,
    Minus,
}

/// The origin of a single generated equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquationKind {
    Hexagon(HexSign),
    Pentagon,
    Orthogonality,
}

/// Generation record for one polynomial: which identity produced it and
/// at which label tuple.
#[derive(Clone, Debug)]
pub struct Provenance {
    pub kind: EquationKind,
    pub tuple: Vec<usize>,
}

impl Provenance {
    pub fn describe(&self, ring: &FusionRingData) -> String {
        let names: Vec<&str> = self
            .tuple
            .iter()
            .map(|&i| ring.label_name(ring.label(i)))
            .collect();
        let kind = match self.kind {
            EquationKind::Hexagon(HexSign::Plus) => "hexagon(+)",
            EquationKind::Hexagon(HexSign::Minus) => "hexagon(-)",
            EquationKind::Pentagon => "pentagon",
            EquationKind::Orthogonality => "orthogonality",
        };
        format!("{kind} at ({})", names.join(","))
    }
}

/// A deduplicated polynomial system with per-equation provenance.
#[derive(Clone, Debug, Default)]
pub struct EquationSystem {
    pub polys: Vec<SparsePoly>,
    pub provenance: Vec<Provenance>,
}

impl EquationSystem {
    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    /// Merges another system into this one, re-deduplicating.
    pub fn merge(&mut self, other: EquationSystem) {
        let mut seen: HashSet<SparsePoly> = self.polys.iter().cloned().collect();
        for (p, prov) in other.polys.into_iter().zip(other.provenance) {
            if seen.insert(p.clone()) {
                self.polys.push(p);
                self.provenance.push(prov);
            }
        }
    }

    /// One polynomial per line in the debug rendering.
    pub fn dump(&self, name: &dyn Fn(u32) -> String) -> String {
        let mut out = String::new();
        for (p, prov) in self.polys.iter().zip(&self.provenance) {
            out.push_str(&format!("{:40} # {:?}\n", p.render(name), prov.tuple));
        }
        out
    }

    fn collect(items: Vec<(SparsePoly, Provenance)>) -> EquationSystem {
        let mut seen = HashSet::new();
        let mut sys = EquationSystem::default();
        for (p, prov) in items {
            if seen.insert(p.clone()) {
                sys.polys.push(p);
                sys.provenance.push(prov);
            }
        }
        sys
    }
}

/// Solver state snapshot used to reduce equations the moment they are
/// generated (pentagon creation in the elimination stage).
#[derive(Clone, Copy)]
pub struct ReduceTables<'a> {
    pub known_squares: &'a BTreeMap<u32, CycloNumber>,
    pub assignments: &'a BTreeMap<u32, SparsePoly>,
    pub nonzero: &'a BTreeSet<u32>,
}

/// An F-matrix entry as seen by the generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Entry {
    Zero,
    One,
    Var(u32),
}

fn f_entry(
    ring: &FusionRingData,
    index: &SextupleIndex,
    s: [Label; 6],
) -> Entry {
    if !ring.is_admissible_sextuple(&s) {
        return Entry::Zero;
    }
    let vac = ring.vacuum();
    if s[0] == vac || s[1] == vac || s[2] == vac {
        return Entry::One;
    }
    let idx = index
        .sextuple_to_idx(&s)
        .expect("admissible non-vacuum sextuple is enumerated");
    Entry::Var(idx as u32 + 1)
}

/// Multiplies entries into a monomial: `None` if any factor is zero.
fn entry_monomial(entries: &[Entry]) -> Option<ExpVec> {
    let mut pairs = Vec::new();
    for e in entries {
        match e {
            Entry::Zero => return None,
            Entry::One => {}
            Entry::Var(v) => pairs.push((*v, 1)),
        }
    }
    Some(ExpVec::from_pairs(pairs))
}

/// The triangle-identity values: every admissible sextuple with a vacuum
/// among the upper labels maps to the constant `1`. These entries never
/// become variables.
pub fn fixed_assignments(ring: &FusionRingData) -> BTreeMap<[Label; 6], CycloNumber> {
    let vac = ring.vacuum();
    let one = CycloNumber::one(ring.cyclo_order());
    let mut map = BTreeMap::new();
    for a in ring.labels() {
        for b in ring.labels() {
            for c in ring.labels() {
                if a != vac && b != vac && c != vac {
                    continue;
                }
                for e in ring.fuse(a, b) {
                    for d in ring.fuse(e, c) {
                        for f in ring.fuse(b, c) {
                            let s = [a, b, c, d, e, f];
                            if ring.is_admissible_sextuple(&s) {
                                map.insert(s, one.clone());
                            }
                        }
                    }
                }
            }
        }
    }
    map
}

/// Runs `job` over ordinals `0..total`, striped across `workers` threads,
/// and returns the survivors in ordinal order regardless of worker count.
fn striped<T, F>(total: u64, workers: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> Option<T> + Sync,
{
    if workers <= 1 || total < 2 {
        return (0..total).filter_map(job).collect();
    }
    let mut tagged: Vec<(u64, T)> = std::thread::scope(|scope| {
        let job = &job;
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    let mut local = Vec::new();
                    let mut i = w as u64;
                    while i < total {
                        if let Some(t) = job(i) {
                            local.push((i, t));
                        }
                        i += workers as u64;
                    }
                    local
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("generation worker panicked"))
            .collect()
    });
    tagged.sort_by_key(|&(i, _)| i);
    tagged.into_iter().map(|(_, t)| t).collect()
}

fn decode<const K: usize>(mut ordinal: u64, rank: usize) -> [usize; K] {
    let mut out = [0usize; K];
    for slot in (0..K).rev() {
        out[slot] = (ordinal % rank as u64) as usize;
        ordinal /= rank as u64;
    }
    out
}

/// Normalizes a raw equation: reduce against solver tables when given,
/// otherwise just make it monic. `None` when it collapses to zero.
fn normalize(p: SparsePoly, tables: Option<ReduceTables>) -> Option<SparsePoly> {
    let reduced = match tables {
        Some(t) => p.update_reduce(t.known_squares, t.assignments, t.nonzero),
        None => p.monic(),
    };
    if reduced.is_zero() {
        None
    } else {
        Some(reduced)
    }
}

/// Generates the pentagon system: for every nonuple `(a,b,c,d,e,f,g,k,l)`
/// the equation
///
/// ```text
/// [F^{fcd}_e]_{gl} [F^{abl}_e]_{fk}
///     = sum_h [F^{abc}_g]_{fh} [F^{ahd}_e]_{gk} [F^{bcd}_k]_{hl}
/// ```
///
/// as `LHS - RHS`, skipping tuples where both sides vanish structurally.
pub fn gen_pentagon(
    ring: &FusionRingData,
    index: &SextupleIndex,
    tables: Option<ReduceTables>,
    workers: usize,
) -> EquationSystem {
    let rank = ring.rank();
    let nvars = index.len();
    let order = ring.cyclo_order();
    let total = (rank as u64).pow(9);
    let items = striped(total, workers, |ordinal| {
        let t = decode::<9>(ordinal, rank);
        let [a, b, c, d, e, f, g, k, l] = t.map(Label);
        let mut terms: Vec<(ExpVec, CycloNumber)> = Vec::new();
        if let Some(m) = entry_monomial(&[
            f_entry(ring, index, [f, c, d, e, g, l]),
            f_entry(ring, index, [a, b, l, e, f, k]),
        ]) {
            terms.push((m, CycloNumber::one(order)));
        }
        for h in ring.labels() {
            if let Some(m) = entry_monomial(&[
                f_entry(ring, index, [a, b, c, g, f, h]),
                f_entry(ring, index, [a, h, d, e, g, k]),
                f_entry(ring, index, [b, c, d, k, h, l]),
            ]) {
                terms.push((m, CycloNumber::from_integer(order, -1)));
            }
        }
        if terms.is_empty() {
            return None;
        }
        let poly = SparsePoly::from_terms(nvars, terms);
        normalize(poly, tables).map(|p| {
            (
                p,
                Provenance {
                    kind: EquationKind::Pentagon,
                    tuple: t.to_vec(),
                },
            )
        })
    });
    EquationSystem::collect(items)
}

/// Generates one hexagon family: for every sextuple `(a,b,c,d,e,g)` the
/// equation
///
/// ```text
/// R^{ac}_e [F^{acb}_d]_{eg} R^{bc}_g
///     = sum_f [F^{cab}_d]_{ef} R^{fc}_d [F^{abc}_d]_{fg}
/// ```
///
/// with every R replaced by its inverse in the `Minus` family.
pub fn gen_hexagon(
    ring: &FusionRingData,
    index: &SextupleIndex,
    sign: HexSign,
    workers: usize,
) -> Result<EquationSystem, EqgenError> {
    let rank = ring.rank();
    let nvars = index.len();
    let total = (rank as u64).pow(6);
    let r_value = |a: Label, b: Label, c: Label| -> Result<CycloNumber, EqgenError> {
        let r = ring.r_symbol(a, b, c).ok_or_else(|| {
            EqgenError::MissingRSymbol(
                ring.label_name(a).into(),
                ring.label_name(b).into(),
                ring.label_name(c).into(),
            )
        })?;
        Ok(match sign {
            HexSign::Plus => r,
            HexSign::Minus => r.inv().expect("roots of unity are invertible"),
        })
    };
    let items: Vec<Result<(SparsePoly, Provenance), EqgenError>> =
        striped(total, workers, |ordinal| {
            let t = decode::<6>(ordinal, rank);
            let [a, b, c, d, e, g] = t.map(Label);
            let mut terms: Vec<(ExpVec, CycloNumber)> = Vec::new();
            if let Some(m) = entry_monomial(&[f_entry(ring, index, [a, c, b, d, e, g])]) {
                let coeff = match (r_value(a, c, e), r_value(b, c, g)) {
                    (Ok(x), Ok(y)) => x.mul(&y),
                    (Err(err), _) | (_, Err(err)) => return Some(Err(err)),
                };
                terms.push((m, coeff));
            }
            for f in ring.labels() {
                if let Some(m) = entry_monomial(&[
                    f_entry(ring, index, [c, a, b, d, e, f]),
                    f_entry(ring, index, [a, b, c, d, f, g]),
                ]) {
                    let coeff = match r_value(f, c, d) {
                        Ok(x) => x.neg(),
                        Err(err) => return Some(Err(err)),
                    };
                    terms.push((m, coeff));
                }
            }
            if terms.is_empty() {
                return None;
            }
            let poly = SparsePoly::from_terms(nvars, terms);
            normalize(poly, None).map(|p| {
                Ok((
                    p,
                    Provenance {
                        kind: EquationKind::Hexagon(sign),
                        tuple: t.to_vec(),
                    },
                ))
            })
        });
    let mut ok = Vec::with_capacity(items.len());
    for item in items {
        ok.push(item?);
    }
    Ok(EquationSystem::collect(ok))
}

/// Generates the orthogonality system: for every quadruple `(a,b,c,d)`
/// with a nonzero F-block and every column pair `f <= f'`, the equation
/// `sum_e F_{ef} F_{ef'} - delta_{ff'}`.
pub fn gen_orthogonality(
    ring: &FusionRingData,
    index: &SextupleIndex,
    workers: usize,
) -> EquationSystem {
    let rank = ring.rank();
    let nvars = index.len();
    let order = ring.cyclo_order();
    let total = (rank as u64).pow(4);
    let items = striped(total, workers, |ordinal| {
        let q = decode::<4>(ordinal, rank);
        let [a, b, c, d] = q.map(Label);
        let rows: Vec<Label> = ring
            .fuse(a, b)
            .into_iter()
            .filter(|&e| ring.n(e, c, d))
            .collect();
        let cols: Vec<Label> = ring
            .fuse(b, c)
            .into_iter()
            .filter(|&f| ring.n(a, f, d))
            .collect();
        if rows.is_empty() {
            return None;
        }
        debug_assert_eq!(rows.len(), cols.len(), "F-blocks are square");
        let mut local = Vec::new();
        for (i, &fi) in cols.iter().enumerate() {
            for &fj in &cols[i..] {
                let mut terms: Vec<(ExpVec, CycloNumber)> = Vec::new();
                for &e in &rows {
                    if let Some(m) = entry_monomial(&[
                        f_entry(ring, index, [a, b, c, d, e, fi]),
                        f_entry(ring, index, [a, b, c, d, e, fj]),
                    ]) {
                        terms.push((m, CycloNumber::one(order)));
                    }
                }
                if fi == fj {
                    terms.push((ExpVec::one(), CycloNumber::from_integer(order, -1)));
                }
                let poly = SparsePoly::from_terms(nvars, terms);
                if let Some(p) = normalize(poly, None) {
                    local.push((
                        p,
                        Provenance {
                            kind: EquationKind::Orthogonality,
                            tuple: vec![q[0], q[1], q[2], q[3], fi.index(), fj.index()],
                        },
                    ));
                }
            }
        }
        if local.is_empty() {
            None
        } else {
            Some(local)
        }
    });
    EquationSystem::collect(items.into_iter().flatten().collect())
}

/// Convenience: the full step-1 input — both hexagon families plus
/// orthogonality, merged and deduplicated.
pub fn gen_step1_system(
    ring: &FusionRingData,
    index: &SextupleIndex,
    workers: usize,
) -> Result<EquationSystem, EqgenError> {
    let mut sys = gen_hexagon(ring, index, HexSign::Plus, workers)?;
    sys.merge(gen_hexagon(ring, index, HexSign::Minus, workers)?);
    sys.merge(gen_orthogonality(ring, index, workers));
    Ok(sys)
}

/// Convenience wrapper building the sextuple enumeration internally.
pub fn variables_of(ring: &FusionRingData) -> SextupleIndex {
    index_sextuples(ring)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;
    use num_rational::BigRational;
    use num_traits::Zero;

    fn trivial_ring() -> FusionRingData {
        let mut r = BTreeMap::new();
        r.insert((0, 0, 0), BigRational::zero());
        FusionRingData::new(
            "trivial",
            vec!["one".into()],
            &[[0, 0, 0]],
            vec![0],
            4,
            r,
            vec![BigRational::zero()],
            vec![1],
        )
        .unwrap()
    }

    #[test]
    fn trivial_ring_generates_nothing() {
        let ring = trivial_ring();
        let idx = index_sextuples(&ring);
        assert_eq!(idx.len(), 0);
        assert!(gen_pentagon(&ring, &idx, None, 1).is_empty());
        assert!(gen_hexagon(&ring, &idx, HexSign::Plus, 1).unwrap().is_empty());
        assert!(gen_orthogonality(&ring, &idx, 1).is_empty());
        // Everything is fixed by the triangle identity.
        assert_eq!(fixed_assignments(&ring).len(), 1);
    }

    #[test]
    fn fixed_assignments_cover_vacuum_blocks() {
        let fib = builtin("fibonacci").unwrap();
        let one = fib.vacuum();
        let tau = fib.label_by_name("tau").unwrap();
        let fixed = fixed_assignments(&fib);
        // F^{1,tau,tau}_1 is the 1x1 identity.
        let val = fixed.get(&[one, tau, tau, one, tau, one]).unwrap();
        assert!(val.is_one());
        for (s, v) in &fixed {
            assert!(v.is_one());
            assert!(fib.is_admissible_sextuple(s));
            assert!(s[0] == one || s[1] == one || s[2] == one);
        }
    }

    #[test]
    fn pentagon_structure_and_determinism() {
        let fib = builtin("fibonacci").unwrap();
        let idx = index_sextuples(&fib);
        let sys = gen_pentagon(&fib, &idx, None, 1);
        assert!(!sys.is_empty());
        for p in &sys.polys {
            assert!(p.total_degree() <= 3, "degree bound: {p}");
            assert!(!p.is_zero());
        }
        // No duplicates.
        let set: HashSet<_> = sys.polys.iter().cloned().collect();
        assert_eq!(set.len(), sys.polys.len());
        // Worker count never changes the output.
        for workers in [2, 3, 8] {
            let other = gen_pentagon(&fib, &idx, None, workers);
            assert_eq!(sys.polys, other.polys);
        }
    }

    #[test]
    fn pentagon_count_matches_plain_enumeration() {
        // Independent single-threaded re-enumeration with list-based dedup.
        let fib = builtin("fibonacci").unwrap();
        let idx = index_sextuples(&fib);
        let sys = gen_pentagon(&fib, &idx, None, 1);
        let rank = fib.rank();
        let order = fib.cyclo_order();
        let mut plain: Vec<SparsePoly> = Vec::new();
        for ordinal in 0..(rank as u64).pow(9) {
            let t = decode::<9>(ordinal, rank);
            let [a, b, c, d, e, f, g, k, l] = t.map(Label);
            let mut terms = Vec::new();
            if let Some(m) = entry_monomial(&[
                f_entry(&fib, &idx, [f, c, d, e, g, l]),
                f_entry(&fib, &idx, [a, b, l, e, f, k]),
            ]) {
                terms.push((m, CycloNumber::one(order)));
            }
            for h in fib.labels() {
                if let Some(m) = entry_monomial(&[
                    f_entry(&fib, &idx, [a, b, c, g, f, h]),
                    f_entry(&fib, &idx, [a, h, d, e, g, k]),
                    f_entry(&fib, &idx, [b, c, d, k, h, l]),
                ]) {
                    terms.push((m, CycloNumber::from_integer(order, -1)));
                }
            }
            let p = SparsePoly::from_terms(idx.len(), terms).monic();
            if !p.is_zero() && !plain.contains(&p) {
                plain.push(p);
            }
        }
        assert_eq!(sys.len(), plain.len());
        assert_eq!(sys.polys, plain);
    }

    #[test]
    fn hexagon_structure() {
        let fib = builtin("fibonacci").unwrap();
        let idx = index_sextuples(&fib);
        for sign in [HexSign::Plus, HexSign::Minus] {
            let sys = gen_hexagon(&fib, &idx, sign, 1).unwrap();
            assert!(!sys.is_empty());
            for p in &sys.polys {
                assert!(p.total_degree() <= 2, "linear-plus-quadratic: {p}");
                for (_, coeff) in p.terms() {
                    assert_eq!(coeff.order(), fib.cyclo_order());
                }
            }
        }
        // Determinism across worker counts.
        let one_worker = gen_hexagon(&fib, &idx, HexSign::Plus, 1).unwrap();
        let eight = gen_hexagon(&fib, &idx, HexSign::Plus, 8).unwrap();
        assert_eq!(one_worker.polys, eight.polys);
    }

    #[test]
    fn orthogonality_blocks() {
        let fib = builtin("fibonacci").unwrap();
        let idx = index_sextuples(&fib);
        let sys = gen_orthogonality(&fib, &idx, 1);
        // The tau^3 -> tau block is 2x2: three equations carry its tuple.
        let tau = fib.label_by_name("tau").unwrap().index();
        let from_block = sys
            .provenance
            .iter()
            .filter(|p| p.tuple[..4] == [tau, tau, tau, tau])
            .count();
        assert_eq!(from_block, 3);
        // The tau^3 -> one block is 1x1 at F[t,t,t,1,t,t]: equation x^2 - 1.
        let one = fib.vacuum().index();
        let scalar = sys
            .polys
            .iter()
            .zip(&sys.provenance)
            .find(|(_, p)| p.tuple[..4] == [tau, tau, tau, one])
            .map(|(p, _)| p.clone())
            .unwrap();
        let v = idx
            .sextuple_to_idx(&[
                fib.label(tau),
                fib.label(tau),
                fib.label(tau),
                fib.label(one),
                fib.label(tau),
                fib.label(tau),
            ])
            .unwrap() as u32
            + 1;
        let expect = SparsePoly::from_terms(
            idx.len(),
            [
                (ExpVec::from_pairs([(v, 2)]), CycloNumber::one(10)),
                (ExpVec::one(), CycloNumber::from_integer(10, -1)),
            ],
        );
        assert_eq!(scalar, expect);
    }

    #[test]
    fn step1_system_merges_without_duplicates() {
        let fib = builtin("fibonacci").unwrap();
        let idx = index_sextuples(&fib);
        let sys = gen_step1_system(&fib, &idx, 2).unwrap();
        let set: HashSet<_> = sys.polys.iter().cloned().collect();
        assert_eq!(set.len(), sys.len());
        assert_eq!(sys.polys.len(), sys.provenance.len());
        let hex_plus = gen_hexagon(&fib, &idx, HexSign::Plus, 1).unwrap();
        assert!(sys.len() >= hex_plus.len());
    }
}

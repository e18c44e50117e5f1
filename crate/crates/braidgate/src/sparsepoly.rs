//! Sparse multivariate polynomials over cyclotomic coefficients with a
//! degree-reverse-lexicographic term order — the solver's workhorse.
//!
//! Variables are indices `1..=nvars` (index 0 is unused), ordered so that
//! a higher index is the larger variable. Monomials compare by total
//! degree first; ties break reverse-lexicographically (scanning variable
//! indices upward, the monomial with the *smaller* exponent at the first
//! difference is the larger one).
//!
//! # Key operations
//!
//! * [`SparsePoly::add`] / [`SparsePoly::mul`] / [`SparsePoly::scale`] —
//!   exact ring arithmetic in canonical order.
//! * [`SparsePoly::substitute`] — simultaneous replacement of assigned
//!   variables by polynomials in strictly smaller variables.
//! * [`SparsePoly::update_reduce`] — the solver's normal form: substitute,
//!   reduce known squares, cancel the common monomial factor, make monic.
//! * [`equations_graph`] — the variable-interaction graph whose connected
//!   components partition a system into independent subsystems.
//!
//! # Design notes
//!
//! Coefficients stay exact [`CycloNumber`]s end to end; the solver's pivot
//! logic depends on decidable zero tests, so no floating fallback exists
//! here. Polynomials are immutable values and all operations are pure,
//! which makes chunked parallel reduction safe by construction.
//!
//! Monomial cancellation in [`SparsePoly::update_reduce`] divides only by
//! variables the caller knows to be nonzero. Admissible F-matrix entries
//! *can* vanish — su2-4's middle `F^{YYY}_Y` entry is the classic case —
//! so the eligible set is an explicit argument, not an assumption. Entries
//! of 1x1 blocks square to one under orthogonality and are the reliable
//! members.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use crate::cyclo::CycloNumber;

/// Soft envelope on term counts; exceeding it is legal but noted once.
const TERM_ENVELOPE: usize = 20;

static LARGEST_POLY: AtomicUsize = AtomicUsize::new(0);
static ENVELOPE_NOTE: std::sync::Once = std::sync::Once::new();

/// The largest term count any polynomial has reached in this process.
pub fn largest_poly_seen() -> usize {
    LARGEST_POLY.load(AtomicOrdering::Relaxed)
}

fn note_size(len: usize) {
    LARGEST_POLY.fetch_max(len, AtomicOrdering::Relaxed);
    if len > TERM_ENVELOPE {
        ENVELOPE_NOTE.call_once(|| {
            eprintln!(
                "note: a polynomial reached {len} terms (soft envelope is {TERM_ENVELOPE}); \
                 arithmetic stays exact"
            );
        });
    }
}

// ---------------------------------------------------------------------------
// Exponent vectors
// ---------------------------------------------------------------------------

/// A sparse exponent vector: `(variable, power)` pairs with strictly
/// increasing variable indices and strictly positive powers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExpVec {
    pairs: Vec<(u32, u32)>,
}

impl ExpVec {
    /// The empty monomial `1`.
    pub fn one() -> Self {
        ExpVec { pairs: Vec::new() }
    }

    /// The single variable `x_j`.
    pub fn var(j: u32) -> Self {
        assert!(j > 0, "variable indices start at 1");
        ExpVec { pairs: vec![(j, 1)] }
    }

    /// Builds from `(variable, power)` pairs; merges duplicates, drops
    /// zero powers, sorts.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut map: BTreeMap<u32, u32> = BTreeMap::new();
        for (v, p) in pairs {
            assert!(v > 0, "variable indices start at 1");
            *map.entry(v).or_insert(0) += p;
        }
        ExpVec {
            pairs: map.into_iter().filter(|&(_, p)| p > 0).collect(),
        }
    }

    pub fn is_one(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.pairs.iter().map(|&(_, p)| p).sum()
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn power_of(&self, j: u32) -> u32 {
        self.pairs
            .binary_search_by_key(&j, |&(v, _)| v)
            .map(|i| self.pairs[i].1)
            .unwrap_or(0)
    }

    /// The largest variable index present, if any.
    pub fn max_var(&self) -> Option<u32> {
        self.pairs.last().map(|&(v, _)| v)
    }

    pub fn vars(&self) -> impl Iterator<Item = u32> + '_ {
        self.pairs.iter().map(|&(v, _)| v)
    }

    /// Product of monomials (exponents add).
    pub fn mul(&self, rhs: &ExpVec) -> ExpVec {
        let mut pairs = Vec::with_capacity(self.pairs.len() + rhs.pairs.len());
        let (mut i, mut j) = (0, 0);
        while i < self.pairs.len() || j < rhs.pairs.len() {
            match (self.pairs.get(i), rhs.pairs.get(j)) {
                (Some(&(va, ea)), Some(&(vb, eb))) => match va.cmp(&vb) {
                    Ordering::Less => {
                        pairs.push((va, ea));
                        i += 1;
                    }
                    Ordering::Greater => {
                        pairs.push((vb, eb));
                        j += 1;
                    }
                    Ordering::Equal => {
                        pairs.push((va, ea + eb));
                        i += 1;
                        j += 1;
                    }
                },
                (Some(&p), None) => {
                    pairs.push(p);
                    i += 1;
                }
                (None, Some(&p)) => {
                    pairs.push(p);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        ExpVec { pairs }
    }

    /// Exact division if `rhs` divides `self`.
    pub fn div(&self, rhs: &ExpVec) -> Option<ExpVec> {
        let mut pairs = Vec::with_capacity(self.pairs.len());
        let mut j = 0;
        for &(v, e) in &self.pairs {
            let eb = if j < rhs.pairs.len() && rhs.pairs[j].0 == v {
                let eb = rhs.pairs[j].1;
                j += 1;
                eb
            } else {
                0
            };
            if eb > e {
                return None;
            }
            if e - eb > 0 {
                pairs.push((v, e - eb));
            }
        }
        if j < rhs.pairs.len() {
            return None; // rhs has a variable self lacks
        }
        Some(ExpVec { pairs })
    }

    pub fn divides(&self, other: &ExpVec) -> bool {
        other.div(self).is_some()
    }

    /// Componentwise minimum (monomial GCD).
    pub fn gcd(&self, rhs: &ExpVec) -> ExpVec {
        let mut pairs = Vec::new();
        let mut j = 0;
        for &(v, e) in &self.pairs {
            while j < rhs.pairs.len() && rhs.pairs[j].0 < v {
                j += 1;
            }
            if j < rhs.pairs.len() && rhs.pairs[j].0 == v {
                pairs.push((v, e.min(rhs.pairs[j].1)));
            }
        }
        ExpVec { pairs }
    }

    /// Componentwise maximum (monomial LCM).
    pub fn lcm(&self, rhs: &ExpVec) -> ExpVec {
        let mut map: BTreeMap<u32, u32> = self.pairs.iter().copied().collect();
        for &(v, e) in &rhs.pairs {
            let slot = map.entry(v).or_insert(0);
            *slot = (*slot).max(e);
        }
        ExpVec {
            pairs: map.into_iter().collect(),
        }
    }

    pub fn coprime_with(&self, rhs: &ExpVec) -> bool {
        self.gcd(rhs).is_one()
    }
}

/// Monomial orders the Groebner machinery can run under. Polynomial
/// *storage* is always canonical degrevlex; the order only decides which
/// term counts as leading.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermOrder {
    /// Degree-reverse-lexicographic: the workhorse order, smallest bases.
    Degrevlex,
    /// Pure lexicographic: an elimination order, so reduced bases come out
    /// triangular — each element's lead isolates its largest variable.
    Lex,
}

impl ExpVec {
    /// Comparison under `order`, with `x_n > ... > x_1` in both orders.
    pub fn cmp_in(&self, other: &ExpVec, order: TermOrder) -> Ordering {
        match order {
            TermOrder::Degrevlex => self.cmp(other),
            TermOrder::Lex => {
                // Scan variable indices downward; the first difference
                // decides, and a variable the other side lacks wins.
                let (mut i, mut j) = (self.pairs.len(), other.pairs.len());
                loop {
                    match (i.checked_sub(1), j.checked_sub(1)) {
                        (None, None) => return Ordering::Equal,
                        (Some(_), None) => return Ordering::Greater,
                        (None, Some(_)) => return Ordering::Less,
                        (Some(a), Some(b)) => {
                            let (va, ea) = self.pairs[a];
                            let (vb, eb) = other.pairs[b];
                            match va.cmp(&vb).then(ea.cmp(&eb)) {
                                Ordering::Equal => {
                                    i = a;
                                    j = b;
                                }
                                ord => return ord,
                            }
                        }
                    }
                }
            }
        }
    }
}

impl Ord for ExpVec {
    /// Degree-reverse-lexicographic order with `x_n > ... > x_1`.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        // Scan variable indices upward; at the first difference the
        // monomial with the smaller exponent is the larger one.
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.pairs.get(i), other.pairs.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Less,
                (None, Some(_)) => return Ordering::Greater,
                (Some(&(va, ea)), Some(&(vb, eb))) => match va.cmp(&vb) {
                    Ordering::Less => return Ordering::Less,
                    Ordering::Greater => return Ordering::Greater,
                    Ordering::Equal => {
                        match ea.cmp(&eb) {
                            Ordering::Less => return Ordering::Greater,
                            Ordering::Greater => return Ordering::Less,
                            Ordering::Equal => {}
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

impl PartialOrd for ExpVec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// ---------------------------------------------------------------------------
// Polynomials
// ---------------------------------------------------------------------------

/// A sparse polynomial: terms in strictly decreasing degrevlex order,
/// with nonzero cyclotomic coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparsePoly {
    nvars: usize,
    terms: Vec<(ExpVec, CycloNumber)>,
}

impl SparsePoly {
    pub fn zero(nvars: usize) -> Self {
        SparsePoly {
            nvars,
            terms: Vec::new(),
        }
    }

    pub fn constant(nvars: usize, c: CycloNumber) -> Self {
        let mut terms = Vec::new();
        if !c.is_zero() {
            terms.push((ExpVec::one(), c));
        }
        SparsePoly { nvars, terms }
    }

    /// The monomial `c * m`.
    pub fn monomial(nvars: usize, m: ExpVec, c: CycloNumber) -> Self {
        if let Some(v) = m.max_var() {
            assert!((v as usize) <= nvars, "variable x{v} outside ambient ring");
        }
        let mut terms = Vec::new();
        if !c.is_zero() {
            terms.push((m, c));
        }
        SparsePoly { nvars, terms }
    }

    /// The variable `x_j` with coefficient `1` in `Q(zeta_order)`.
    pub fn var(nvars: usize, j: u32, order: u32) -> Self {
        SparsePoly::monomial(nvars, ExpVec::var(j), CycloNumber::one(order))
    }

    /// Builds from arbitrary terms: merges duplicates, drops zeros, sorts.
    pub fn from_terms(
        nvars: usize,
        terms: impl IntoIterator<Item = (ExpVec, CycloNumber)>,
    ) -> Self {
        let mut map: BTreeMap<ExpVec, CycloNumber> = BTreeMap::new();
        for (m, c) in terms {
            if let Some(v) = m.max_var() {
                assert!((v as usize) <= nvars, "variable x{v} outside ambient ring");
            }
            match map.entry(m) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    if !c.is_zero() {
                        e.insert(c);
                    }
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let sum = e.get().add(&c);
                    if sum.is_zero() {
                        e.remove();
                    } else {
                        *e.get_mut() = sum;
                    }
                }
            }
        }
        let terms: Vec<_> = map.into_iter().rev().collect();
        note_size(terms.len());
        SparsePoly { nvars, terms }
    }

    // -- accessors ----------------------------------------------------------

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(ExpVec, CycloNumber)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(c)` if the polynomial is the constant `c` (zero included).
    pub fn as_constant(&self) -> Option<CycloNumber> {
        match self.terms.as_slice() {
            [] => None, // caller decides the field order for zero
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    /// Leading (greatest) term under degrevlex.
    pub fn leading(&self) -> Option<&(ExpVec, CycloNumber)> {
        self.terms.first()
    }

    /// Leading (greatest) term under `order`.
    pub fn leading_in(&self, order: TermOrder) -> Option<&(ExpVec, CycloNumber)> {
        match order {
            TermOrder::Degrevlex => self.terms.first(),
            TermOrder::Lex => self
                .terms
                .iter()
                .max_by(|(ma, _), (mb, _)| ma.cmp_in(mb, TermOrder::Lex)),
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    /// All variables appearing in the polynomial, ascending.
    pub fn support(&self) -> BTreeSet<u32> {
        self.terms.iter().flat_map(|(m, _)| m.vars()).collect()
    }

    /// The largest variable index appearing, if any.
    pub fn max_var(&self) -> Option<u32> {
        self.terms.iter().filter_map(|(m, _)| m.max_var()).max()
    }

    // -- ring arithmetic ----------------------------------------------------

    pub fn add(&self, rhs: &SparsePoly) -> SparsePoly {
        assert_eq!(self.nvars, rhs.nvars, "ambient variable counts differ");
        let mut terms = Vec::with_capacity(self.terms.len() + rhs.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < rhs.terms.len() {
            let take_left = match (self.terms.get(i), rhs.terms.get(j)) {
                (Some((ma, _)), Some((mb, _))) => match ma.cmp(mb) {
                    Ordering::Greater => true,
                    Ordering::Less => false,
                    Ordering::Equal => {
                        let c = self.terms[i].1.add(&rhs.terms[j].1);
                        if !c.is_zero() {
                            terms.push((ma.clone(), c));
                        }
                        i += 1;
                        j += 1;
                        continue;
                    }
                },
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => unreachable!(),
            };
            if take_left {
                terms.push(self.terms[i].clone());
                i += 1;
            } else {
                terms.push(rhs.terms[j].clone());
                j += 1;
            }
        }
        note_size(terms.len());
        SparsePoly {
            nvars: self.nvars,
            terms,
        }
    }

    pub fn neg(&self) -> SparsePoly {
        SparsePoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &SparsePoly) -> SparsePoly {
        self.add(&rhs.neg())
    }

    /// Multiplies every coefficient by the scalar `c`.
    pub fn scale(&self, c: &CycloNumber) -> SparsePoly {
        if c.is_zero() {
            return SparsePoly::zero(self.nvars);
        }
        SparsePoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k.mul(c)))
                .collect(),
        }
    }

    /// Multiplies by the monomial `c * m`.
    pub fn mul_monomial(&self, m: &ExpVec, c: &CycloNumber) -> SparsePoly {
        if c.is_zero() {
            return SparsePoly::zero(self.nvars);
        }
        SparsePoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(mm, k)| (mm.mul(m), k.mul(c)))
                .collect(),
        }
    }

    pub fn mul(&self, rhs: &SparsePoly) -> SparsePoly {
        assert_eq!(self.nvars, rhs.nvars, "ambient variable counts differ");
        if self.is_zero() || rhs.is_zero() {
            return SparsePoly::zero(self.nvars);
        }
        let mut map: BTreeMap<ExpVec, CycloNumber> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let m = ma.mul(mb);
                let c = ca.mul(cb);
                match map.entry(m) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        if !c.is_zero() {
                            e.insert(c);
                        }
                    }
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        let sum = e.get().add(&c);
                        if sum.is_zero() {
                            e.remove();
                        } else {
                            *e.get_mut() = sum;
                        }
                    }
                }
            }
        }
        let terms: Vec<_> = map.into_iter().rev().collect();
        note_size(terms.len());
        SparsePoly {
            nvars: self.nvars,
            terms,
        }
    }

    // -- solver reductions --------------------------------------------------

    /// Simultaneously replaces each assigned variable by its polynomial.
    /// Assignments must be triangular: the replacement for `x_j` may only
    /// involve variables with index strictly below `j`, which rules out
    /// substitution cycles. One pass; repeat to a fixpoint if assignment
    /// values themselves contain assigned variables.
    pub fn substitute(&self, assignments: &BTreeMap<u32, SparsePoly>) -> SparsePoly {
        let mut touched = false;
        for (m, _) in &self.terms {
            if m.vars().any(|v| assignments.contains_key(&v)) {
                touched = true;
                break;
            }
        }
        if !touched {
            return self.clone();
        }
        let mut result = SparsePoly::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut kept = Vec::new();
            let mut factors: Vec<(&SparsePoly, u32)> = Vec::new();
            for &(v, e) in m.pairs() {
                if let Some(value) = assignments.get(&v) {
                    assert!(
                        value.max_var().map_or(true, |w| w < v),
                        "non-triangular assignment for x{v}"
                    );
                    factors.push((value, e));
                } else {
                    kept.push((v, e));
                }
            }
            let mut term = SparsePoly::monomial(
                self.nvars,
                ExpVec { pairs: kept },
                c.clone(),
            );
            for (value, e) in factors {
                for _ in 0..e {
                    term = term.mul(value);
                }
            }
            result = result.add(&term);
        }
        result
    }

    /// Divides through by the leading coefficient. Zero stays zero.
    pub fn monic(&self) -> SparsePoly {
        self.monic_in(TermOrder::Degrevlex)
    }

    /// Divides through by the coefficient leading under `order`.
    pub fn monic_in(&self, order: TermOrder) -> SparsePoly {
        match self.leading_in(order) {
            None => self.clone(),
            Some((_, lead)) if lead.is_one() => self.clone(),
            Some((_, lead)) => {
                let inv = lead.inv().expect("leading coefficient is nonzero");
                self.scale(&inv)
            }
        }
    }

    /// The solver's normal form:
    ///
    /// 1. substitute `assignments`;
    /// 2. reduce `x_j^(2k+r)` to `alpha^k * x_j^r` for each known square
    ///    `x_j^2 = alpha`;
    /// 3. divide out the part of the monomial GCD supported on variables
    ///    in `nonzero` (dividing by a possibly-zero variable would lose
    ///    solutions);
    /// 4. normalize the leading coefficient to 1.
    ///
    /// Idempotent for fixed tables.
    pub fn update_reduce(
        &self,
        known_squares: &BTreeMap<u32, CycloNumber>,
        assignments: &BTreeMap<u32, SparsePoly>,
        nonzero: &BTreeSet<u32>,
    ) -> SparsePoly {
        let mut poly = self
            .substitute(assignments)
            .square_reduce(known_squares);
        if poly.is_zero() {
            return poly;
        }
        // Common monomial factor, restricted to cancellable variables.
        let mut gcd = poly.terms[0].0.clone();
        for (m, _) in &poly.terms[1..] {
            if gcd.is_one() {
                break;
            }
            gcd = gcd.gcd(m);
        }
        gcd.pairs.retain(|(v, _)| nonzero.contains(v));
        if !gcd.is_one() {
            for (m, _) in poly.terms.iter_mut() {
                *m = m.div(&gcd).expect("gcd divides every term");
            }
        }
        // Monic normalization.
        let lead = poly.terms[0].1.clone();
        if !lead.is_one() {
            let inv = lead.inv().expect("leading coefficient is nonzero");
            for (_, c) in poly.terms.iter_mut() {
                *c = c.mul(&inv);
            }
        }
        poly
    }

    /// Reduction for *values* (assignment right-hand sides): substitute and
    /// fold known squares, but keep the scale — unlike [`update_reduce`],
    /// which may rescale because its input is equated to zero.
    ///
    /// [`update_reduce`]: SparsePoly::update_reduce
    pub fn reduce_value(
        &self,
        known_squares: &BTreeMap<u32, CycloNumber>,
        assignments: &BTreeMap<u32, SparsePoly>,
    ) -> SparsePoly {
        self.substitute(assignments).square_reduce(known_squares)
    }

    /// Folds `x_j^(2k+r)` to `alpha^k * x_j^r` for every known square
    /// `x_j^2 = alpha`, term by term.
    fn square_reduce(&self, known_squares: &BTreeMap<u32, CycloNumber>) -> SparsePoly {
        let mut reduced = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut pairs = Vec::with_capacity(m.pairs().len());
            for &(v, e) in m.pairs() {
                match known_squares.get(&v) {
                    Some(alpha) if e >= 2 => {
                        let alpha_k = alpha
                            .pow(i64::from(e / 2))
                            .expect("known-square constant is nonzero");
                        coeff = coeff.mul(&alpha_k);
                        if e % 2 == 1 {
                            pairs.push((v, 1));
                        }
                    }
                    _ => pairs.push((v, e)),
                }
            }
            reduced.push((ExpVec { pairs }, coeff));
        }
        SparsePoly::from_terms(self.nvars, reduced)
    }

    /// Renders with a caller-supplied variable namer (the solver prints
    /// `F[a,b,c,d,e,f]` names through this hook).
    pub fn render(&self, name: &dyn Fn(u32) -> String) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                out.push_str(" + ");
            }
            let coeff = format!("{c}");
            if m.is_one() {
                out.push_str(&coeff);
            } else {
                if coeff != "1" {
                    // Multi-term coefficients print with spaced operators.
                    if coeff.contains(' ') {
                        out.push_str(&format!("({coeff})*"));
                    } else {
                        out.push_str(&format!("{coeff}*"));
                    }
                }
                let mono: Vec<String> = m
                    .pairs()
                    .iter()
                    .map(|&(v, e)| {
                        if e == 1 {
                            name(v)
                        } else {
                            format!("{}^{e}", name(v))
                        }
                    })
                    .collect();
                out.push_str(&mono.join("*"));
            }
        }
        out
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&|v| format!("x{v}")))
    }
}

// ---------------------------------------------------------------------------
// Equations graph
// ---------------------------------------------------------------------------

/// Undirected graph on variable indices: a vertex for every variable that
/// appears in the system, an edge `{i, j}` whenever some term of some
/// polynomial is divisible by `x_i * x_j`.
#[derive(Debug, Clone, Default)]
pub struct VarGraph {
    adjacency: BTreeMap<u32, BTreeSet<u32>>,
}

impl VarGraph {
    pub fn vertices(&self) -> impl Iterator<Item = u32> + '_ {
        self.adjacency.keys().copied()
    }

    pub fn has_edge(&self, i: u32, j: u32) -> bool {
        self.adjacency.get(&i).is_some_and(|s| s.contains(&j))
    }

    pub fn neighbors(&self, i: u32) -> impl Iterator<Item = u32> + '_ {
        self.adjacency.get(&i).into_iter().flatten().copied()
    }

    /// Connected components, each sorted ascending, ordered by size with
    /// ties broken by smallest member.
    pub fn components(&self) -> Vec<Vec<u32>> {
        let mut seen = BTreeSet::new();
        let mut components = Vec::new();
        for &start in self.adjacency.keys() {
            if seen.contains(&start) {
                continue;
            }
            let mut stack = vec![start];
            let mut comp = BTreeSet::new();
            while let Some(v) = stack.pop() {
                if !comp.insert(v) {
                    continue;
                }
                seen.insert(v);
                for w in self.neighbors(v) {
                    if !comp.contains(&w) {
                        stack.push(w);
                    }
                }
            }
            components.push(comp.into_iter().collect::<Vec<_>>());
        }
        components.sort_by_key(|c: &Vec<u32>| (c.len(), c[0]));
        components
    }
}

/// Builds the equations graph of a polynomial system.
pub fn equations_graph<'a>(polys: impl IntoIterator<Item = &'a SparsePoly>) -> VarGraph {
    let mut graph = VarGraph::default();
    for p in polys {
        for (m, _) in p.terms() {
            let vars: Vec<u32> = m.vars().collect();
            for &v in &vars {
                graph.adjacency.entry(v).or_default();
            }
            for (i, &v) in vars.iter().enumerate() {
                for &w in &vars[i + 1..] {
                    graph.adjacency.entry(v).or_default().insert(w);
                    graph.adjacency.entry(w).or_default().insert(v);
                }
            }
        }
    }
    graph
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    const ORDER: u32 = 6;

    fn c(n: i64) -> CycloNumber {
        CycloNumber::from_integer(ORDER, n)
    }

    fn x(j: u32) -> SparsePoly {
        SparsePoly::var(24, j, ORDER)
    }

    fn assert_canonical(p: &SparsePoly) {
        for w in p.terms().windows(2) {
            assert!(w[0].0 > w[1].0, "terms out of order in {p}");
        }
        for (m, coeff) in p.terms() {
            assert!(!coeff.is_zero(), "zero coefficient stored in {p}");
            for pair in m.pairs().windows(2) {
                assert!(pair[0].0 < pair[1].0, "unsorted exponent vector");
            }
            assert!(m.pairs().iter().all(|&(_, e)| e > 0), "zero power stored");
        }
    }

    #[test]
    fn degrevlex_degree_dominates() {
        // x1^3*x9*x13^2 vs x21^7: total degree 6 vs 7.
        let low = ExpVec::from_pairs([(1, 3), (9, 1), (13, 2)]);
        let high = ExpVec::from_pairs([(21, 7)]);
        assert!(high > low);
        let p = SparsePoly::from_terms(
            24,
            [(low, c(2)), (high.clone(), c(5))],
        );
        assert_eq!(p.leading().unwrap().0, high);
    }

    #[test]
    fn degrevlex_tie_break() {
        // Degree-2 monomials in two variables: x2^2 > x1*x2 > x1^2.
        let a = ExpVec::from_pairs([(2, 2)]);
        let b = ExpVec::from_pairs([(1, 1), (2, 1)]);
        let d = ExpVec::from_pairs([(1, 2)]);
        assert!(a > b && b > d);
    }

    #[test]
    fn lex_ignores_degree() {
        use std::cmp::Ordering;
        // x3 beats any power of smaller variables under lex...
        let top = ExpVec::from_pairs([(3, 1)]);
        let bulk = ExpVec::from_pairs([(1, 4), (2, 5)]);
        assert_eq!(top.cmp_in(&bulk, TermOrder::Lex), Ordering::Greater);
        // ...but loses to it under degrevlex (degree 1 vs 9).
        assert_eq!(top.cmp_in(&bulk, TermOrder::Degrevlex), Ordering::Less);
        // Shared top variable: the tie falls to the next one down.
        let a = ExpVec::from_pairs([(2, 1), (3, 2)]);
        let b = ExpVec::from_pairs([(1, 7), (3, 2)]);
        assert_eq!(a.cmp_in(&b, TermOrder::Lex), Ordering::Greater);
        assert_eq!(a.cmp_in(&a, TermOrder::Lex), Ordering::Equal);

        // Leading term of x3 + x1^4 x2^5 depends on the order.
        let p = SparsePoly::from_terms(4, [(top.clone(), c(2)), (bulk.clone(), c(1))]);
        assert_eq!(p.leading_in(TermOrder::Lex).unwrap().0, top);
        assert_eq!(p.leading_in(TermOrder::Degrevlex).unwrap().0, bulk);
        assert_eq!(
            p.monic_in(TermOrder::Lex).leading_in(TermOrder::Lex).unwrap().1,
            c(1)
        );
    }

    #[test]
    fn product_of_conjugates() {
        let p = x(1).add(&x(2));
        let q = x(1).sub(&x(2));
        let expect = x(1).mul(&x(1)).sub(&x(2).mul(&x(2)));
        assert_eq!(p.mul(&q), expect);
        assert_canonical(&p.mul(&q));
    }

    #[test]
    fn additive_inverse_cancels() {
        let p = x(3).mul(&x(7)).add(&SparsePoly::constant(24, c(9)));
        let z = p.add(&p.scale(&c(-1)));
        assert!(z.is_zero());
        assert_eq!(z.terms().len(), 0);
    }

    #[test]
    fn substitution_examples() {
        // substitute(x3^2 - x1, {x3 -> 2 x1}) = 4 x1^2 - x1.
        let p = x(3).mul(&x(3)).sub(&x(1));
        let mut asg = BTreeMap::new();
        asg.insert(3, x(1).scale(&c(2)));
        let got = p.substitute(&asg);
        let expect = x(1).mul(&x(1)).scale(&c(4)).sub(&x(1));
        assert_eq!(got, expect);

        // Identity on empty assignments.
        assert_eq!(p.substitute(&BTreeMap::new()), p);

        // substitute(x2*x3, {x3 -> x1 + 1}) = x1*x2 + x2.
        let q = x(2).mul(&x(3));
        let mut asg = BTreeMap::new();
        asg.insert(3, x(1).add(&SparsePoly::constant(24, c(1))));
        assert_eq!(q.substitute(&asg), x(1).mul(&x(2)).add(&x(2)));
    }

    #[test]
    #[should_panic(expected = "non-triangular")]
    fn substitution_rejects_cycles() {
        let p = x(3).add(&x(1));
        let mut asg = BTreeMap::new();
        asg.insert(3, x(5)); // x5 is not strictly below x3
        let _ = p.substitute(&asg);
    }

    #[test]
    fn update_reduce_examples() {
        let all = BTreeSet::from_iter(1..=24u32);
        // x5^3 - 3 x5 with x5^2 = 3 collapses to zero.
        let p = x(5).mul(&x(5)).mul(&x(5)).sub(&x(5).scale(&c(3)));
        let mut squares = BTreeMap::new();
        squares.insert(5, c(3));
        assert!(p.update_reduce(&squares, &BTreeMap::new(), &all).is_zero());

        // 2 x1 x2 + 2 x1 x3 loses the common factor x1 and goes monic —
        // but only when x1 is known nonzero.
        let q = x(1).mul(&x(2)).scale(&c(2)).add(&x(1).mul(&x(3)).scale(&c(2)));
        let got = q.update_reduce(&BTreeMap::new(), &BTreeMap::new(), &all);
        assert_eq!(got, x(2).add(&x(3)));
        let kept = q.update_reduce(&BTreeMap::new(), &BTreeMap::new(), &BTreeSet::new());
        assert_eq!(kept, x(1).mul(&x(2)).add(&x(1).mul(&x(3))));

        // Fixed point: x7^2 - zeta6 is already reduced.
        let zeta = CycloNumber::zeta_pow(ORDER, 1);
        let r = x(7).mul(&x(7)).sub(&SparsePoly::constant(24, zeta));
        assert_eq!(r.update_reduce(&BTreeMap::new(), &BTreeMap::new(), &all), r);
    }

    #[test]
    fn equations_graph_examples() {
        // {x1 x2 + x3}: edge {1,2}, vertex 3 isolated.
        let p = x(1).mul(&x(2)).add(&x(3));
        let g = equations_graph([&p]);
        assert!(g.has_edge(1, 2) && g.has_edge(2, 1));
        assert!(!g.has_edge(1, 3) && !g.has_edge(2, 3));
        assert_eq!(g.components(), vec![vec![3], vec![1, 2]]);

        // {x1^2 - 5}: vertex 1, no edges.
        let q = x(1).mul(&x(1)).sub(&SparsePoly::constant(24, c(5)));
        let g = equations_graph([&q]);
        assert_eq!(g.components(), vec![vec![1]]);
        assert!(!g.has_edge(1, 1));

        // {x1 x2, x2 x3}: one component {1, 2, 3}.
        let g = equations_graph([&x(1).mul(&x(2)), &x(2).mul(&x(3))]);
        assert_eq!(g.components(), vec![vec![1, 2, 3]]);
    }

    #[test]
    fn graph_union_grows_edges() {
        let p = x(1).mul(&x(2));
        let q = x(4).mul(&x(5));
        let g1 = equations_graph([&p]);
        let g2 = equations_graph([&q]);
        let g = equations_graph([&p, &q]);
        for small in [&g1, &g2] {
            for v in small.vertices() {
                for w in small.neighbors(v) {
                    assert!(g.has_edge(v, w));
                }
            }
        }
    }

    // -- randomized ring axioms --------------------------------------------

    fn arb_coeff() -> impl Strategy<Value = CycloNumber> {
        (0u32..2, -3i64..4, 1i64..4).prop_map(|(e, n, d)| {
            CycloNumber::zeta_pow(ORDER, e)
                .scale(&BigRational::new(BigInt::from(n), BigInt::from(d)))
        })
    }

    fn arb_poly() -> impl Strategy<Value = SparsePoly> {
        proptest::collection::vec(
            (
                proptest::collection::vec((1u32..5, 1u32..3), 0..3),
                arb_coeff(),
            ),
            0..4,
        )
        .prop_map(|terms| {
            SparsePoly::from_terms(
                8,
                terms
                    .into_iter()
                    .map(|(pairs, c)| (ExpVec::from_pairs(pairs), c)),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn mul_is_associative(a in arb_poly(), b in arb_poly(), d in arb_poly()) {
            prop_assert_eq!(a.mul(&b).mul(&d), a.mul(&b.mul(&d)));
        }

        #[test]
        fn mul_distributes(a in arb_poly(), b in arb_poly(), d in arb_poly()) {
            prop_assert_eq!(a.mul(&b.add(&d)), a.mul(&b).add(&a.mul(&d)));
        }

        #[test]
        fn add_commutes_and_stays_canonical(a in arb_poly(), b in arb_poly()) {
            let s = a.add(&b);
            prop_assert_eq!(&s, &b.add(&a));
            assert_canonical(&s);
            assert_canonical(&a.mul(&b));
        }

        #[test]
        fn update_reduce_is_idempotent(a in arb_poly()) {
            let mut squares = BTreeMap::new();
            squares.insert(2u32, c(3));
            squares.insert(4u32, CycloNumber::zeta_pow(ORDER, 1));
            let empty = BTreeMap::new();
            let nonzero = BTreeSet::from_iter(1..=8u32);
            let once = a.update_reduce(&squares, &empty, &nonzero);
            let twice = once.update_reduce(&squares, &empty, &nonzero);
            prop_assert_eq!(once, twice);
        }
    }
}

//! Square-root towers over cyclotomic fields.
//!
//! The solver's final step can leave quadratic relations `x^2 = alpha`
//! whose roots lie outside `Q(zeta_m)`. Rather than computing a primitive
//! element for the splitting field, we adjoin the needed square roots one
//! at a time: a [`TowerContext`] records an ordered list of radicals
//! `y_1, ..., y_k` with `y_i^2 = alpha_i`, where each `alpha_i` is a value
//! over the *previous* radicals. A [`TowerNumber`] is then a multilinear
//! combination `Σ c_S * Π_{i in S} y_i` over subsets `S`, with cyclotomic
//! coefficients; every `y_i` appears with exponent 0 or 1 because squares
//! reduce to `alpha_i`.
//!
//! # Key operations
//!
//! * Exact field arithmetic; inversion clears one radical at a time by
//!   conjugation: `1/(u + v*y) = (u - v*y) / (u^2 - v^2*alpha)`.
//! * [`TowerNumber::sqrt`] — detects perfect squares of the monomial shape
//!   `beta * Π alpha_i` (cyclotomic `beta`), which is what keeps towers
//!   minimal: a candidate radical is only adjoined after this check fails.
//! * [`TowerContext::with_radical`] — extends the tower; existing values
//!   migrate with [`TowerNumber::lift`].
//! * [`TowerNumber::embed`] — complex embedding, taking the principal
//!   branch of each embedded `alpha_i` in tower order.
//!
//! # Design notes
//!
//! Contexts are immutable and shared behind an `Arc`; extending the tower
//! creates a new context whose radical list is a strict prefix extension,
//! so term bitmasks stay valid across [`TowerNumber::lift`].
//!
//! Adjoining only non-squares keeps every extension step proper (degree 2),
//! which makes the multilinear representation a basis: structural equality
//! of canonical forms coincides with value equality. A radical that were
//! secretly a square would create zero divisors; the square check prevents
//! the ones of monomial shape, and any other would surface as a division
//! failure during inversion rather than as a silent wrong answer.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_rational::BigRational;

use crate::cyclo::{CycloError, CycloNumber, CycloSer};
use crate::embed::FixedComplex;

/// Serialized terms of one tower value: `[bitmask, cyclo_terms]` pairs.
pub type TowerTermsSer = Vec<(u64, CycloSer)>;

/// An immutable tower description: the cyclotomic order of the coefficient
/// field and the defining constants of the adjoined radicals. `radicals[i]`
/// is `alpha_i` stored as tower terms whose masks only use bits `< i`.
#[derive(Debug, PartialEq, Eq)]
pub struct TowerContext {
    order: u32,
    radicals: Vec<BTreeMap<u64, CycloNumber>>,
}

impl TowerContext {
    /// The plain cyclotomic field `Q(zeta_order)` with no radicals.
    pub fn base(order: u32) -> Arc<TowerContext> {
        Arc::new(TowerContext {
            order,
            radicals: Vec::new(),
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn radical_count(&self) -> usize {
        self.radicals.len()
    }

    /// `alpha_i` as a value of this tower.
    pub fn radical_constant(self: &Arc<Self>, i: usize) -> TowerNumber {
        TowerNumber {
            ctx: Arc::clone(self),
            terms: self.radicals[i].clone(),
        }
    }

    /// Extends the tower with `y^2 = alpha`; returns the new context and
    /// `y` as a value of it. `alpha` must be a nonzero value of this tower.
    pub fn with_radical(
        self: &Arc<Self>,
        alpha: &TowerNumber,
    ) -> Result<(Arc<TowerContext>, TowerNumber), CycloError> {
        assert!(
            Arc::ptr_eq(&alpha.ctx, self) || alpha.ctx == *self,
            "radical constant belongs to a different tower"
        );
        if alpha.is_zero() {
            return Err(CycloError::DivisionByZero);
        }
        let k = self.radicals.len();
        assert!(k < 64, "tower limited to 64 radicals");
        let mut radicals = self.radicals.clone();
        radicals.push(alpha.terms.clone());
        let ctx = Arc::new(TowerContext {
            order: self.order,
            radicals,
        });
        let y = TowerNumber {
            ctx: Arc::clone(&ctx),
            terms: BTreeMap::from([(1u64 << k, CycloNumber::one(self.order))]),
        };
        Ok((ctx, y))
    }

    /// Principal-branch embeddings of `y_1 .. y_k`, computed in tower order
    /// so each `alpha_i` can use the radicals below it.
    fn radical_embeddings(self: &Arc<Self>, precision_bits: u32) -> Vec<FixedComplex> {
        let mut roots: Vec<FixedComplex> = Vec::with_capacity(self.radicals.len());
        for alpha in &self.radicals {
            let emb = embed_terms(alpha, &roots, precision_bits);
            roots.push(emb.sqrt_principal());
        }
        roots
    }
}

fn embed_terms(
    terms: &BTreeMap<u64, CycloNumber>,
    roots: &[FixedComplex],
    precision_bits: u32,
) -> FixedComplex {
    let mut acc = FixedComplex::zero(precision_bits);
    for (mask, c) in terms {
        let mut piece = c.embed(precision_bits);
        let mut bits = *mask;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            piece = piece.mul(&roots[i]);
        }
        acc = acc.add(&piece);
    }
    acc
}

/// An element of a square-root tower: `Σ_mask c_mask * Π_{i in mask} y_i`.
#[derive(Clone, Debug)]
pub struct TowerNumber {
    ctx: Arc<TowerContext>,
    terms: BTreeMap<u64, CycloNumber>,
}

impl PartialEq for TowerNumber {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.ctx, &other.ctx) || self.ctx == other.ctx) && self.terms == other.terms
    }
}

impl Eq for TowerNumber {}

impl Hash for TowerNumber {
    fn hash<H: Hasher>(&self, state: &mut H) {
        // Context is not hashed: values compared for equality always share
        // one, and equal terms then hash equal as required.
        self.terms.hash(state);
    }
}

impl TowerNumber {
    // -- constructors -------------------------------------------------------

    pub fn zero(ctx: &Arc<TowerContext>) -> Self {
        TowerNumber {
            ctx: Arc::clone(ctx),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ctx: &Arc<TowerContext>) -> Self {
        Self::from_cyclo(ctx, CycloNumber::one(ctx.order))
    }

    pub fn from_cyclo(ctx: &Arc<TowerContext>, c: CycloNumber) -> Self {
        let c = coerce_to_order(c, ctx.order);
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(0u64, c);
        }
        TowerNumber {
            ctx: Arc::clone(ctx),
            terms,
        }
    }

    pub fn from_rational(ctx: &Arc<TowerContext>, q: BigRational) -> Self {
        Self::from_cyclo(ctx, CycloNumber::from_rational(ctx.order, q))
    }

    // -- accessors ----------------------------------------------------------

    pub fn context(&self) -> &Arc<TowerContext> {
        &self.ctx
    }

    pub fn terms(&self) -> &BTreeMap<u64, CycloNumber> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).map(CycloNumber::is_one).unwrap_or(false)
    }

    /// The value as a plain cyclotomic number when no radical occurs.
    pub fn as_cyclo(&self) -> Option<CycloNumber> {
        match self.terms.len() {
            0 => Some(CycloNumber::zero(self.ctx.order)),
            1 => self.terms.get(&0).cloned(),
            _ => None,
        }
    }

    /// Reinterprets the value in an extended tower whose radical list starts
    /// with this one's (bitmasks carry over unchanged).
    pub fn lift(&self, new_ctx: &Arc<TowerContext>) -> Self {
        assert!(
            new_ctx.order == self.ctx.order
                && new_ctx.radicals.len() >= self.ctx.radicals.len()
                && new_ctx.radicals[..self.ctx.radicals.len()] == self.ctx.radicals[..],
            "lift target does not extend the source tower"
        );
        TowerNumber {
            ctx: Arc::clone(new_ctx),
            terms: self.terms.clone(),
        }
    }

    fn same_ctx(&self, rhs: &Self) -> &Arc<TowerContext> {
        assert!(
            Arc::ptr_eq(&self.ctx, &rhs.ctx) || self.ctx == rhs.ctx,
            "tower arithmetic across different contexts"
        );
        &self.ctx
    }

    // -- arithmetic ---------------------------------------------------------

    fn insert_term(terms: &mut BTreeMap<u64, CycloNumber>, mask: u64, c: &CycloNumber) {
        if c.is_zero() {
            return;
        }
        match terms.entry(mask) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(c);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let ctx = self.same_ctx(rhs);
        let mut terms = self.terms.clone();
        for (mask, c) in &rhs.terms {
            Self::insert_term(&mut terms, *mask, c);
        }
        TowerNumber {
            ctx: Arc::clone(ctx),
            terms,
        }
    }

    pub fn neg(&self) -> Self {
        TowerNumber {
            ctx: Arc::clone(&self.ctx),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (*m, c.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn scale_cyclo(&self, c: &CycloNumber) -> Self {
        let c = coerce_to_order(c.clone(), self.ctx.order);
        if c.is_zero() {
            return Self::zero(&self.ctx);
        }
        TowerNumber {
            ctx: Arc::clone(&self.ctx),
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (*m, v.mul(&c)))
                .collect(),
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        self.scale_cyclo(&CycloNumber::from_rational(self.ctx.order, q.clone()))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let ctx = self.same_ctx(rhs);
        let mut acc = Self::zero(ctx);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                let coeff = c1.mul(c2);
                if coeff.is_zero() {
                    continue;
                }
                let mut piece = TowerNumber {
                    ctx: Arc::clone(ctx),
                    terms: BTreeMap::from([(m1 ^ m2, coeff)]),
                };
                // Shared radicals square away into their defining constants.
                // Each alpha_i lives strictly below level i, so the recursion
                // terminates.
                let mut shared = m1 & m2;
                while shared != 0 {
                    let i = shared.trailing_zeros() as usize;
                    shared &= shared - 1;
                    piece = piece.mul(&ctx.radical_constant(i));
                }
                acc = acc.add(&piece);
            }
        }
        acc
    }

    /// Multiplicative inverse, clearing the highest radical by conjugation
    /// and recursing: `1/(u + v*y) = (u - v*y) * inv(u^2 - v^2*alpha)`.
    pub fn inv(&self) -> Result<Self, CycloError> {
        if self.is_zero() {
            return Err(CycloError::DivisionByZero);
        }
        let top = self
            .terms
            .keys()
            .map(|m| 64 - m.leading_zeros())
            .max()
            .unwrap();
        if top == 0 {
            // Pure cyclotomic value.
            let c = self.terms.get(&0).unwrap().inv()?;
            return Ok(Self::from_cyclo(&self.ctx, c));
        }
        let j = (top - 1) as usize;
        let bit = 1u64 << j;
        let mut u = Self::zero(&self.ctx);
        let mut v = Self::zero(&self.ctx);
        for (mask, c) in &self.terms {
            if mask & bit == 0 {
                Self::insert_term(&mut u.terms, *mask, c);
            } else {
                Self::insert_term(&mut v.terms, mask & !bit, c);
            }
        }
        let alpha = self.ctx.radical_constant(j);
        // u, v, and alpha only involve radicals below j, so the norm does
        // too — the recursion strictly shrinks the radical support. A zero
        // norm for a nonzero input would mean alpha is a square in the lower
        // tower, which the adjoining pipeline rules out.
        let norm = u.mul(&u).sub(&v.mul(&v).mul(&alpha));
        let norm_inv = norm.inv()?;
        let conjugate = {
            let mut terms = u.terms.clone();
            for (mask, c) in &v.terms {
                Self::insert_term(&mut terms, mask | bit, &c.neg());
            }
            TowerNumber {
                ctx: Arc::clone(&self.ctx),
                terms,
            }
        };
        Ok(conjugate.mul(&norm_inv))
    }

    // -- square roots -------------------------------------------------------

    /// An exact square root inside the tower, when the value has the shape
    /// `beta * Π_{i in S} alpha_i` with cyclotomic `beta` whose root exists
    /// in `Q(zeta_m)`: then `sqrt = sqrt(beta) * Π_{i in S} y_i`. Subsets are
    /// tried in ascending mask order, so the result is deterministic.
    pub fn sqrt(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(self.clone());
        }
        let k = self.ctx.radicals.len();
        for subset in 0u64..(1u64 << k) {
            let mut divisor = Self::one(&self.ctx);
            let mut bits = subset;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                divisor = divisor.mul(&self.ctx.radical_constant(i));
            }
            let beta = self.mul(&divisor.inv().expect("radical constants are nonzero"));
            if let Some(c) = beta.as_cyclo() {
                if let Some(s) = c.sqrt() {
                    let y_product = TowerNumber {
                        ctx: Arc::clone(&self.ctx),
                        terms: BTreeMap::from([(subset, CycloNumber::one(self.ctx.order))]),
                    };
                    return Some(y_product.scale_cyclo(&s));
                }
            }
        }
        None
    }

    // -- embedding ----------------------------------------------------------

    /// Complex value with each radical embedded on the principal branch.
    pub fn embed(&self, precision_bits: u32) -> FixedComplex {
        let roots = self.ctx.radical_embeddings(precision_bits);
        embed_terms(&self.terms, &roots, precision_bits)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        self.embed(96).to_f64()
    }

    // -- serialization ------------------------------------------------------

    pub fn to_terms_ser(&self) -> TowerTermsSer {
        self.terms
            .iter()
            .map(|(mask, c)| (*mask, c.to_ser()))
            .collect()
    }

    pub fn from_terms_ser(
        ctx: &Arc<TowerContext>,
        ser: &TowerTermsSer,
    ) -> Result<Self, CycloError> {
        let limit = 1u64
            .checked_shl(ctx.radicals.len() as u32)
            .unwrap_or(u64::MAX);
        let mut terms = BTreeMap::new();
        for (mask, cser) in ser {
            if *mask >= limit {
                return Err(CycloError::BadSerialization(format!(
                    "term mask {mask:#x} references a radical outside the tower"
                )));
            }
            let c = CycloNumber::from_ser(ctx.order, cser)?;
            Self::insert_term(&mut terms, *mask, &c);
        }
        Ok(TowerNumber {
            ctx: Arc::clone(ctx),
            terms,
        })
    }
}

/// Serialized context radicals, in adjoining order.
pub fn radicals_to_ser(ctx: &Arc<TowerContext>) -> Vec<TowerTermsSer> {
    (0..ctx.radical_count())
        .map(|i| ctx.radical_constant(i).to_terms_ser())
        .collect()
}

/// Rebuilds a context from serialized radicals over `Q(zeta_order)`.
pub fn radicals_from_ser(
    order: u32,
    radicals: &[TowerTermsSer],
) -> Result<Arc<TowerContext>, CycloError> {
    let mut ctx = TowerContext::base(order);
    for alpha_ser in radicals {
        let alpha = TowerNumber::from_terms_ser(&ctx, alpha_ser)?;
        let (next, _) = ctx.with_radical(&alpha)?;
        ctx = next;
    }
    Ok(ctx)
}

fn coerce_to_order(c: CycloNumber, order: u32) -> CycloNumber {
    if c.order() == order {
        c
    } else {
        c.promote(order)
    }
}

macro_rules! tower_binop {
    ($trait:ident, $method:ident, $imp:ident) => {
        impl std::ops::$trait for &TowerNumber {
            type Output = TowerNumber;
            fn $method(self, rhs: &TowerNumber) -> TowerNumber {
                TowerNumber::$imp(self, rhs)
            }
        }
        impl std::ops::$trait for TowerNumber {
            type Output = TowerNumber;
            fn $method(self, rhs: TowerNumber) -> TowerNumber {
                TowerNumber::$imp(&self, &rhs)
            }
        }
        impl std::ops::$trait<&TowerNumber> for TowerNumber {
            type Output = TowerNumber;
            fn $method(self, rhs: &TowerNumber) -> TowerNumber {
                TowerNumber::$imp(&self, rhs)
            }
        }
    };
}

tower_binop!(Add, add, add);
tower_binop!(Sub, sub, sub);
tower_binop!(Mul, mul, mul);

impl std::ops::Neg for &TowerNumber {
    type Output = TowerNumber;
    fn neg(self) -> TowerNumber {
        TowerNumber::neg(self)
    }
}

impl fmt::Display for TowerNumber {
    /// Terms in ascending mask order, radicals printed as `y1, y2, ...`;
    /// multi-term cyclotomic coefficients are parenthesized.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (mask, c)) in self.terms.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            let rendered = c.to_string();
            let needs_parens = rendered.contains(' ') && *mask != 0;
            let unit = c.is_one() && *mask != 0;
            if !unit {
                if needs_parens {
                    write!(f, "({rendered})")?;
                } else {
                    write!(f, "{rendered}")?;
                }
            }
            let mut bits = *mask;
            let mut first_factor = true;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                if !first_factor || !unit {
                    write!(f, "*")?;
                }
                first_factor = false;
                write!(f, "y{}", i + 1)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn tower_sqrt3() -> (Arc<TowerContext>, TowerNumber) {
        let base = TowerContext::base(4);
        let three = TowerNumber::from_rational(&base, rat(3, 1));
        base.with_radical(&three).unwrap()
    }

    #[test]
    fn difference_of_squares() {
        let (ctx, y) = tower_sqrt3();
        let one = TowerNumber::one(&ctx);
        let product = one.add(&y).mul(&one.sub(&y));
        assert_eq!(product, TowerNumber::from_rational(&ctx, rat(-2, 1)));
    }

    #[test]
    fn inversion_clears_radicals() {
        let (ctx, y) = tower_sqrt3();
        let x = TowerNumber::from_rational(&ctx, rat(2, 5)).add(&y.scale(&rat(-7, 3)));
        let inv = x.inv().unwrap();
        assert!(x.mul(&inv).is_one());
        assert!(TowerNumber::zero(&ctx).inv().is_err());
    }

    #[test]
    fn nested_radicals_multiply_out() {
        // y1 = sqrt(2) over Q(zeta_4); y2 = sqrt(1 + y1).
        let base = TowerContext::base(4);
        let two = TowerNumber::from_rational(&base, rat(2, 1));
        let (ctx1, y1) = base.with_radical(&two).unwrap();
        let alpha2 = TowerNumber::one(&ctx1).add(&y1);
        let (ctx2, y2) = ctx1.with_radical(&alpha2).unwrap();
        // y2^4 = (1 + y1)^2 = 3 + 2*y1.
        let y2_4 = y2.mul(&y2).mul(&y2).mul(&y2);
        let expected = TowerNumber::from_rational(&ctx2, rat(3, 1))
            .add(&y1.lift(&ctx2).scale(&rat(2, 1)));
        assert_eq!(y2_4, expected);
        // And its inverse multiplies back to one.
        let inv = y2_4.inv().unwrap();
        assert!(y2_4.mul(&inv).is_one());
    }

    #[test]
    fn embedding_principal_branches() {
        let base = TowerContext::base(4);
        let two = TowerNumber::from_rational(&base, rat(2, 1));
        let (ctx1, y1) = base.with_radical(&two).unwrap();
        let (re, im) = y1.to_f64();
        assert!((re - std::f64::consts::SQRT_2).abs() < 1e-12 && im.abs() < 1e-12);
        // sqrt(-2) embeds on the positive imaginary axis (principal branch).
        let minus_two = TowerNumber::from_rational(&base, rat(-2, 1));
        let (_, y) = base.with_radical(&minus_two).unwrap();
        let (re, im) = y.to_f64();
        assert!(re.abs() < 1e-12 && (im - std::f64::consts::SQRT_2).abs() < 1e-12);
        let _ = ctx1;
    }

    #[test]
    fn tower_square_detection() {
        let base = TowerContext::base(4);
        let five = TowerNumber::from_rational(&base, rat(5, 1));
        let (ctx, y) = base.with_radical(&five).unwrap();
        // 5 = y^2: a square with root y itself (beta = alpha / alpha = ... ).
        let five_in = TowerNumber::from_rational(&ctx, rat(5, 1));
        let r = five_in.sqrt().expect("5 is a square in Q(zeta_4, sqrt5)");
        assert_eq!(r.mul(&r), five_in);
        // 20 = (2y)^2 as well.
        let twenty = TowerNumber::from_rational(&ctx, rat(20, 1));
        let r = twenty.sqrt().expect("20 is a square");
        assert_eq!(r.mul(&r), twenty);
        // -5 = (i*y)^2 with i in Q(zeta_4).
        let m5 = TowerNumber::from_rational(&ctx, rat(-5, 1));
        let r = m5.sqrt().expect("-5 is a square over Q(zeta_4)");
        assert_eq!(r.mul(&r), m5);
        // 3 is not a square there.
        assert!(TowerNumber::from_rational(&ctx, rat(3, 1)).sqrt().is_none());
        // Non-monomial values are not recognized (by design).
        assert!(TowerNumber::one(&ctx).add(&y).sqrt().is_none());
    }

    #[test]
    fn serialization_round_trip() {
        let base = TowerContext::base(48);
        let alpha = TowerNumber::from_cyclo(&base, CycloNumber::zeta_pow(48, 8))
            .add(&TowerNumber::from_rational(&base, rat(1, 3)));
        let (ctx, y) = base.with_radical(&alpha).unwrap();
        let x = y.scale(&rat(-2, 7)).add(&TowerNumber::one(&ctx));
        let radicals = radicals_to_ser(&ctx);
        let terms = x.to_terms_ser();
        let ctx2 = radicals_from_ser(48, &radicals).unwrap();
        let back = TowerNumber::from_terms_ser(&ctx2, &terms).unwrap();
        assert_eq!(back, x.lift(&ctx2));
        // Out-of-range masks are rejected.
        let bad = vec![(4u64, CycloNumber::one(48).to_ser())];
        assert!(TowerNumber::from_terms_ser(&ctx2, &bad).is_err());
    }

    #[test]
    fn display_forms() {
        let (ctx, y) = tower_sqrt3();
        assert_eq!(TowerNumber::zero(&ctx).to_string(), "0");
        assert_eq!(y.to_string(), "y1");
        let x = TowerNumber::from_rational(&ctx, rat(1, 2)).add(&y.scale(&rat(-3, 1)));
        assert_eq!(x.to_string(), "1/2 + -3*y1");
    }
}

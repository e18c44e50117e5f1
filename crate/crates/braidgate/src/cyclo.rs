//! Exact arithmetic in cyclotomic fields `Q(zeta_m)`.
//!
//! A [`CycloNumber`] is a finite sum `Σ q_e * zeta_m^e` with rational
//! coefficients, kept in canonical form: exponents live in `[0, phi(m))`
//! and the value is reduced modulo the m-th cyclotomic polynomial, so
//! equality (and in particular zero-testing) is a plain structural
//! comparison. Zero-testing must be exact because the solver's pivot
//! and substitution steps branch on it.
//!
//! # Key operations
//!
//! * [`CycloNumber::root_of_unity`] — `e^(2*pi*i*q)` as an exact field
//!   element (requires `q*m` integral).
//! * Field arithmetic (`+`, `-`, `*`, [`CycloNumber::inv`]) with automatic
//!   coercion of mixed orders into `Q(zeta_lcm)`.
//! * [`CycloNumber::galois`] / [`CycloNumber::conj`] — Galois action
//!   `zeta -> zeta^k` and complex conjugation.
//! * [`CycloNumber::sqrt`] — exact square roots of the values that stay
//!   inside the field (rational multiples of roots of unity, via quadratic
//!   Gauss sums); returns `None` when the root lies outside, which is the
//!   signal to extend the field instead.
//! * [`CycloNumber::embed`] — controlled-precision complex embedding under
//!   `zeta_m -> e^(2*pi*i/m)`.
//!
//! # Design notes
//!
//! Reduction uses the cyclotomic polynomial `Phi_m` (not `x^m - 1`): the
//! quotient by `Phi_m` is a field, so canonical forms are unique. Per-order
//! reduction tables (the polynomial plus fold rows for every exponent in
//! `[phi(m), m)`) are built once and shared behind an `Arc`.
//!
//! Square roots of rationals are assembled from quadratic Gauss sums
//! `g_p = Σ_a legendre(a, p) * zeta_p^a = sqrt(±p)`, with a final factor of
//! `i` when the accumulated radicand has the wrong sign and a deterministic
//! branch normalization (prefer positive real part) applied via embedding.
//! Either branch squares to the radicand; the normalization only makes the
//! choice reproducible.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::embed::{embed_cyclo_terms, FixedComplex};
use crate::numutil::{legendre, squarefree_decompose};

/// Errors from cyclotomic (and tower) arithmetic.
#[derive(Debug, thiserror::Error)]
pub enum CycloError {
    /// `root_of_unity(m, q)` with `q*m` not an integer.
    #[error("e^(2*pi*i*{q}) is not an element of Q(zeta_{order})")]
    Unrepresentable { order: u32, q: BigRational },
    /// Inversion of zero.
    #[error("division by zero")]
    DivisionByZero,
    /// Galois map with `gcd(k, order) != 1`.
    #[error("galois exponent {k} is not coprime to the order {order}")]
    BadGalois { k: u32, order: u32 },
    /// Malformed serialized value.
    #[error("bad serialized value: {0}")]
    BadSerialization(String),
}

// ---------------------------------------------------------------------------
// Per-order reduction tables
// ---------------------------------------------------------------------------

/// Cached data for one cyclotomic order: the minimal polynomial `Phi_m` and
/// dense fold rows expressing `zeta^e` for `e` in `[phi, m)` in the power
/// basis `zeta^0 .. zeta^(phi-1)`.
struct CycloTables {
    phi: usize,
    /// `rows[e - phi]` = coefficients of `zeta^e` in the power basis.
    rows: Vec<Vec<BigInt>>,
    /// `Phi_m` as dense integer coefficients, length `phi + 1`, monic.
    min_poly: Vec<BigInt>,
}

fn tables(order: u32) -> Arc<CycloTables> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<CycloTables>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&order) {
        return Arc::clone(t);
    }
    let min_poly = cyclotomic_poly(order);
    let phi = min_poly.len() - 1;
    // Fold row for zeta^phi comes straight from Phi_m (monic): the rest are
    // shift-and-fold iterates up to zeta^(m-1).
    let fold: Vec<BigInt> = (0..phi).map(|i| -&min_poly[i]).collect();
    let mut rows = Vec::new();
    if (order as usize) > phi {
        rows.push(fold.clone());
        for _ in (phi + 1)..(order as usize) {
            let prev = rows.last().unwrap();
            let top = prev[phi - 1].clone();
            let mut next = vec![BigInt::zero(); phi];
            for i in 1..phi {
                next[i] = prev[i - 1].clone();
            }
            if !top.is_zero() {
                for i in 0..phi {
                    next[i] += &top * &fold[i];
                }
            }
            rows.push(next);
        }
    }
    let t = Arc::new(CycloTables {
        phi,
        rows,
        min_poly,
    });
    cache.lock().unwrap().insert(order, Arc::clone(&t));
    t
}

/// Dense integer coefficients of `Phi_m`, computed as `(x^m - 1)` divided by
/// `Phi_d` over all proper divisors `d | m`.
fn cyclotomic_poly(m: u32) -> Vec<BigInt> {
    assert!(m >= 1, "cyclotomic order must be positive");
    let divisors: Vec<u32> = (1..=m).filter(|d| m % d == 0).collect();
    let mut memo: HashMap<u32, Vec<BigInt>> = HashMap::new();
    for &d in &divisors {
        let mut q = x_pow_minus_one(d);
        for &e in &divisors {
            if e < d && d % e == 0 {
                q = int_poly_div_exact(&q, &memo[&e]);
            }
        }
        memo.insert(d, q);
    }
    memo.remove(&m).unwrap()
}

fn x_pow_minus_one(n: u32) -> Vec<BigInt> {
    let mut coeffs = vec![BigInt::zero(); n as usize + 1];
    coeffs[0] = BigInt::from(-1);
    coeffs[n as usize] = BigInt::one();
    coeffs
}

/// Exact division of integer polynomials with a monic divisor.
fn int_poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    debug_assert!(den.last().map(|c| c.is_one()).unwrap_or(false));
    let dn = num.len() - 1;
    let dd = den.len() - 1;
    let mut rem = num.to_vec();
    let mut quot = vec![BigInt::zero(); dn - dd + 1];
    for k in (0..=dn - dd).rev() {
        let c = rem[k + dd].clone();
        if !c.is_zero() {
            for j in 0..=dd {
                rem[k + j] -= &c * &den[j];
            }
        }
        quot[k] = c;
    }
    debug_assert!(rem.iter().all(|c| c.is_zero()), "non-exact division");
    quot
}

/// Euler's totient of `m`, read off the reduction tables.
pub fn euler_phi(m: u32) -> usize {
    tables(m).phi
}

// ---------------------------------------------------------------------------
// CycloNumber
// ---------------------------------------------------------------------------

/// Serialized form of a cyclotomic number: `[exponent, "num", "den"]` per
/// term, big integers rendered as decimal strings.
pub type CycloSer = Vec<(u32, String, String)>;

/// An element of `Q(zeta_order)` in canonical form: terms sorted by
/// ascending exponent, all exponents below `phi(order)`, no zero
/// coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycloNumber {
    order: u32,
    terms: Vec<(u32, BigRational)>,
}

impl CycloNumber {
    // -- constructors -------------------------------------------------------

    pub fn zero(order: u32) -> Self {
        CycloNumber {
            order,
            terms: Vec::new(),
        }
    }

    pub fn one(order: u32) -> Self {
        Self::from_rational(order, BigRational::one())
    }

    pub fn from_rational(order: u32, q: BigRational) -> Self {
        let mut terms = Vec::new();
        if !q.is_zero() {
            terms.push((0, q));
        }
        // phi(1) = 1 still admits exponent 0, so this is canonical for all orders.
        CycloNumber { order, terms }
    }

    pub fn from_integer(order: u32, n: i64) -> Self {
        Self::from_rational(order, BigRational::from_integer(BigInt::from(n)))
    }

    /// `zeta_order^e`, canonicalized.
    pub fn zeta_pow(order: u32, e: u32) -> Self {
        Self::canonicalize(order, vec![(e, BigRational::one())])
    }

    /// `e^(2*pi*i*q)` as an element of `Q(zeta_order)`.
    ///
    /// `q` is a number of **full turns**: `root_of_unity(m, q) = zeta_m^(q*m)`.
    /// Fails unless `q * order` is an integer.
    pub fn root_of_unity(order: u32, q: &BigRational) -> Result<Self, CycloError> {
        let qm = q * BigRational::from_integer(BigInt::from(order));
        if !qm.is_integer() {
            return Err(CycloError::Unrepresentable {
                order,
                q: q.clone(),
            });
        }
        let e = qm.to_integer().mod_floor(&BigInt::from(order));
        Ok(Self::zeta_pow(order, e.to_u32().expect("exponent fits u32")))
    }

    /// Builds the canonical form from raw `(exponent, coefficient)` terms;
    /// exponents may be arbitrary (they are reduced mod `order`, then modulo
    /// `Phi_order`).
    fn canonicalize(order: u32, raw: Vec<(u32, BigRational)>) -> Self {
        let t = tables(order);
        let mut dense: Vec<BigRational> = vec![BigRational::zero(); t.phi];
        for (e, c) in raw {
            if c.is_zero() {
                continue;
            }
            let e = (e % order) as usize;
            if e < t.phi {
                dense[e] += c;
            } else {
                let row = &t.rows[e - t.phi];
                for (i, r) in row.iter().enumerate() {
                    if !r.is_zero() {
                        dense[i] += &c * BigRational::from_integer(r.clone());
                    }
                }
            }
        }
        let terms = dense
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(e, c)| (e as u32, c))
            .collect();
        CycloNumber { order, terms }
    }

    // -- accessors ----------------------------------------------------------

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Canonical `(exponent, coefficient)` terms, ascending in exponent.
    pub fn terms(&self) -> &[(u32, BigRational)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == 0 && self.terms[0].1.is_one()
    }

    pub fn is_rational(&self) -> bool {
        self.as_rational().is_some()
    }

    /// The value as a rational if it is one (canonical forms make this a
    /// syntactic check).
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 if self.terms[0].0 == 0 => Some(self.terms[0].1.clone()),
            _ => None,
        }
    }

    // -- ring operations ----------------------------------------------------

    /// Re-expresses the value in `Q(zeta_new_order)`; `new_order` must be a
    /// multiple of the current order.
    pub fn promote(&self, new_order: u32) -> Self {
        assert!(
            new_order % self.order == 0,
            "promotion target {} is not a multiple of the order {}",
            new_order,
            self.order
        );
        if new_order == self.order {
            return self.clone();
        }
        let ratio = new_order / self.order;
        let raw = self
            .terms
            .iter()
            .map(|(e, c)| (e * ratio, c.clone()))
            .collect();
        Self::canonicalize(new_order, raw)
    }

    /// Brings two values into a common field `Q(zeta_lcm)`.
    fn coerced(&self, rhs: &Self) -> (Self, Self) {
        if self.order == rhs.order {
            return (self.clone(), rhs.clone());
        }
        let m = self.order.lcm(&rhs.order);
        (self.promote(m), rhs.promote(m))
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let (a, b) = self.coerced(rhs);
        let mut raw = a.terms;
        raw.extend(b.terms);
        Self::canonicalize(a.order, raw)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        CycloNumber {
            order: self.order,
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let (a, b) = self.coerced(rhs);
        if a.is_zero() || b.is_zero() {
            return Self::zero(a.order);
        }
        let t = tables(a.order);
        // Accumulate the product densely by exponent sum (bounded by
        // 2*(phi-1) < 2m), then fold once.
        let mut dense: Vec<BigRational> = vec![BigRational::zero(); 2 * t.phi.max(1) - 1];
        for (e1, c1) in &a.terms {
            for (e2, c2) in &b.terms {
                dense[(e1 + e2) as usize] += c1 * c2;
            }
        }
        let raw = dense
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(e, c)| (e as u32, c))
            .collect();
        Self::canonicalize(a.order, raw)
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::zero(self.order);
        }
        CycloNumber {
            order: self.order,
            terms: self.terms.iter().map(|(e, c)| (*e, c * q)).collect(),
        }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against
    /// `Phi_order` in `Q[x]`.
    pub fn inv(&self) -> Result<Self, CycloError> {
        if self.is_zero() {
            return Err(CycloError::DivisionByZero);
        }
        if let Some(q) = self.as_rational() {
            return Ok(Self::from_rational(self.order, q.recip()));
        }
        let t = tables(self.order);
        let modulus: Vec<BigRational> = t
            .min_poly
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        let mut f = vec![BigRational::zero(); t.phi];
        for (e, c) in &self.terms {
            f[*e as usize] = c.clone();
        }
        rat_poly_trim(&mut f);
        // Invariant: s_i * f == r_i (mod Phi). Ends with r a nonzero constant
        // because Phi is irreducible and deg f < deg Phi.
        let mut r0 = modulus;
        let mut r1 = f;
        let mut s0: Vec<BigRational> = Vec::new();
        let mut s1 = vec![BigRational::one()];
        while r1.len() > 1 {
            let (q, rem) = rat_poly_divmod(&r0, &r1);
            let s2 = rat_poly_sub(&s0, &rat_poly_mul(&q, &s1));
            r0 = r1;
            r1 = rem;
            s0 = s1;
            s1 = s2;
        }
        assert!(
            r1.len() == 1 && !r1[0].is_zero(),
            "nonzero element has a unit gcd with the irreducible modulus"
        );
        let c_inv = r1[0].recip();
        let raw = s1
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(e, c)| (e as u32, c * &c_inv))
            .collect();
        Ok(Self::canonicalize(self.order, raw))
    }

    /// Integer power; negative exponents invert first.
    pub fn pow(&self, k: i64) -> Result<Self, CycloError> {
        let (mut base, mut k) = if k < 0 {
            (self.inv()?, (-(k as i128)) as u64)
        } else {
            (self.clone(), k as u64)
        };
        let mut acc = Self::one(self.order);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        Ok(acc)
    }

    // -- Galois action ------------------------------------------------------

    /// The field automorphism `zeta -> zeta^k`; requires `gcd(k, order) = 1`.
    pub fn galois(&self, k: u32) -> Result<Self, CycloError> {
        let k = k % self.order;
        if BigInt::from(k).gcd(&BigInt::from(self.order)) != BigInt::one() {
            return Err(CycloError::BadGalois {
                k,
                order: self.order,
            });
        }
        let raw = self
            .terms
            .iter()
            .map(|(e, c)| (((*e as u64 * k as u64) % self.order as u64) as u32, c.clone()))
            .collect();
        Ok(Self::canonicalize(self.order, raw))
    }

    /// Complex conjugation (`zeta -> zeta^(-1)`).
    pub fn conj(&self) -> Self {
        if self.order == 1 {
            return self.clone();
        }
        self.galois(self.order - 1)
            .expect("m-1 is coprime to m")
    }

    // -- square roots -------------------------------------------------------

    /// Writes the value as `q * zeta^t` when it is a rational multiple of a
    /// root of unity (many such values have multi-term canonical forms, so
    /// this scans the full exponent range).
    pub fn as_root_multiple(&self) -> Option<(BigRational, u32)> {
        if let Some(q) = self.as_rational() {
            if q.is_zero() {
                return None;
            }
            return Some((q, 0));
        }
        for t in 1..self.order {
            let shifted = self.mul(&Self::zeta_pow(self.order, self.order - t));
            if let Some(q) = shifted.as_rational() {
                return Some((q, t));
            }
        }
        None
    }

    /// An exact square root inside `Q(zeta_order)`, when one exists for a
    /// value of the form `q * zeta^t`. Returns `None` if the value is not of
    /// that form or its root lies outside the field; callers then extend the
    /// field instead. The branch is deterministic: rational-root factors are
    /// normalized to positive real part via a 96-bit embedding.
    pub fn sqrt(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(self.clone());
        }
        let (q, t) = self.as_root_multiple()?;
        sqrt_monomial(self.order, &q, t)
    }

    // -- embedding ----------------------------------------------------------

    /// Complex value under `zeta_m -> e^(2*pi*i/m)`, accurate to
    /// `2^-precision_bits`.
    pub fn embed(&self, precision_bits: u32) -> FixedComplex {
        embed_cyclo_terms(self.order, &self.terms, precision_bits)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        self.embed(96).to_f64()
    }

    // -- serialization ------------------------------------------------------

    pub fn to_ser(&self) -> CycloSer {
        self.terms
            .iter()
            .map(|(e, c)| (*e, c.numer().to_string(), c.denom().to_string()))
            .collect()
    }

    pub fn from_ser(order: u32, ser: &CycloSer) -> Result<Self, CycloError> {
        let mut raw = Vec::with_capacity(ser.len());
        for (e, num, den) in ser {
            let n: BigInt = num
                .parse()
                .map_err(|_| CycloError::BadSerialization(format!("bad integer {num:?}")))?;
            let d: BigInt = den
                .parse()
                .map_err(|_| CycloError::BadSerialization(format!("bad integer {den:?}")))?;
            if d.is_zero() {
                return Err(CycloError::BadSerialization("zero denominator".into()));
            }
            raw.push((*e, BigRational::new(n, d)));
        }
        Ok(Self::canonicalize(order, raw))
    }
}

// ---------------------------------------------------------------------------
// Square-root machinery
// ---------------------------------------------------------------------------

/// Square root of `q * zeta^t` in `Q(zeta_m)`, with `q` rational nonzero.
fn sqrt_monomial(m: u32, q: &BigRational, t: u32) -> Option<CycloNumber> {
    if t % 2 == 0 {
        let root = sqrt_rational(m, q)?;
        return Some(root.mul(&CycloNumber::zeta_pow(m, t / 2)));
    }
    // Odd exponent: peel parity off using the structure of the unit group.
    if m % 2 == 1 {
        // zeta^t = (zeta^((t+m)/2))^2 since t+m is even.
        let root = sqrt_rational(m, q)?;
        return Some(root.mul(&CycloNumber::zeta_pow(m, (t + m) / 2)));
    }
    if m % 4 == 2 {
        // zeta^(m/2) = -1 with m/2 odd: shift the exponent to even parity.
        let q2 = -q;
        return sqrt_monomial(m, &q2, (t + m / 2) % m);
    }
    if m % 8 == 4 {
        // i = zeta^(m/4) with m/4 odd: q*zeta^t = (q*i)*zeta^u with u even,
        // and q*i = (q/2)*(1+i)^2.
        let u = (t + m - m / 4) % m;
        debug_assert!(u % 2 == 0);
        let half = q / BigRational::from_integer(BigInt::from(2));
        let root = sqrt_rational(m, &half)?;
        let one_plus_i =
            CycloNumber::one(m).add(&CycloNumber::zeta_pow(m, m / 4));
        return Some(root.mul(&one_plus_i).mul(&CycloNumber::zeta_pow(m, u / 2)));
    }
    // 8 | m with odd t: zeta^t has no square root in the field.
    None
}

/// Square root of a rational inside `Q(zeta_m)` via Gauss sums, or `None`
/// when it does not exist (or its squarefree part cannot be certified).
fn sqrt_rational(m: u32, q: &BigRational) -> Option<CycloNumber> {
    if q.is_zero() {
        return Some(CycloNumber::zero(m));
    }
    // q = n / den^2 with n = num * den, so sqrt(q) = sqrt(n) / |den|.
    let n = q.numer() * q.denom();
    let (root, sf, certified) = squarefree_decompose(&n.abs());
    if !certified {
        return None;
    }
    let scale = BigRational::new(root, q.denom().abs());
    let d = if n.is_negative() { -&sf } else { sf.clone() };
    if d.is_one() {
        return Some(CycloNumber::from_rational(m, scale));
    }
    // Conductor of Q(sqrt(d)): |d| when d = 1 mod 4, else 4|d|. The field
    // embeds in Q(zeta_m) exactly when the conductor divides m.
    let cond = if d.mod_floor(&BigInt::from(4)).is_one() {
        d.abs()
    } else {
        d.abs() * 4
    };
    if !(BigInt::from(m) % &cond).is_zero() {
        return None;
    }
    // All prime factors of sf divide m now, so sf is small; factor it.
    let sf_u = sf.to_u64().expect("squarefree part divides the order");
    let mut rest = sf_u;
    let has2 = rest % 2 == 0;
    if has2 {
        rest /= 2;
    }
    let mut odd_primes = Vec::new();
    let mut p = 3u64;
    while p * p <= rest {
        if rest % p == 0 {
            odd_primes.push(p);
            rest /= p;
        } else {
            p += 2;
        }
    }
    if rest > 1 {
        odd_primes.push(rest);
    }
    // Assemble sqrt(d) from Gauss sums: g_p^2 = p* = (-1)^((p-1)/2) * p.
    let mut acc = CycloNumber::one(m);
    let mut radicand = BigInt::one();
    if has2 {
        // sqrt(2) = zeta_8 + zeta_8^-1; d even forces 8 | conductor | m.
        let sqrt2 = CycloNumber::zeta_pow(m, m / 8)
            .add(&CycloNumber::zeta_pow(m, m - m / 8));
        acc = acc.mul(&sqrt2);
        radicand *= 2;
    }
    for &p in &odd_primes {
        let step = (m as u64 / p) as u32;
        let mut terms = Vec::with_capacity(p as usize - 1);
        for a in 1..p {
            let sign = legendre(a, p);
            terms.push((
                ((a * step as u64) % m as u64) as u32,
                BigRational::from_integer(BigInt::from(sign)),
            ));
        }
        let g = CycloNumber::canonicalize(m, terms);
        acc = acc.mul(&g);
        let p_star = if p % 4 == 1 {
            BigInt::from(p)
        } else {
            -BigInt::from(p)
        };
        radicand *= p_star;
    }
    if radicand != d {
        // Sign mismatch happens exactly when d != 1 mod 4, where 4 | cond | m.
        debug_assert_eq!(-&radicand, d);
        acc = acc.mul(&CycloNumber::zeta_pow(m, m / 4));
    }
    debug_assert_eq!(
        acc.mul(&acc),
        CycloNumber::from_rational(m, BigRational::from_integer(d))
    );
    Some(normalize_branch(acc).scale(&scale))
}

/// Deterministic branch choice: negate unless the embedded value has
/// positive real part, with imaginary part breaking the tie on the axis.
/// The true real part is either zero or at least 1 in absolute value here,
/// so a 2^-32 threshold at 96-bit precision cannot misclassify.
fn normalize_branch(x: CycloNumber) -> CycloNumber {
    let z = x.embed(96);
    let eps = BigInt::one() << (96 - 32);
    let keep = if z.re_fixed() > &eps {
        true
    } else if z.re_fixed() < &(-&eps) {
        false
    } else {
        z.im_fixed() > &BigInt::zero()
    };
    if keep {
        x
    } else {
        x.neg()
    }
}

// ---------------------------------------------------------------------------
// Dense rational polynomial helpers (for inv)
// ---------------------------------------------------------------------------

fn rat_poly_trim(p: &mut Vec<BigRational>) {
    while p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
}

fn rat_poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] -= c;
    }
    rat_poly_trim(&mut out);
    out
}

fn rat_poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, ca) in a.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (j, cb) in b.iter().enumerate() {
            out[i + j] += ca * cb;
        }
    }
    rat_poly_trim(&mut out);
    out
}

/// Division with remainder in `Q[x]`; the divisor must be nonzero.
fn rat_poly_divmod(num: &[BigRational], den: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    assert!(!den.is_empty(), "polynomial division by zero");
    if num.len() < den.len() {
        return (Vec::new(), num.to_vec());
    }
    let lead = den.last().unwrap();
    let mut rem = num.to_vec();
    let mut quot = vec![BigRational::zero(); num.len() - den.len() + 1];
    for k in (0..quot.len()).rev() {
        let c = &rem[k + den.len() - 1] / lead;
        if !c.is_zero() {
            for (j, dj) in den.iter().enumerate() {
                let delta = &c * dj;
                rem[k + j] -= delta;
            }
        }
        quot[k] = c;
    }
    rat_poly_trim(&mut quot);
    rat_poly_trim(&mut rem);
    (quot, rem)
}

// ---------------------------------------------------------------------------
// Operator sugar and display
// ---------------------------------------------------------------------------

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $imp:ident) => {
        impl std::ops::$trait for &CycloNumber {
            type Output = CycloNumber;
            fn $method(self, rhs: &CycloNumber) -> CycloNumber {
                CycloNumber::$imp(self, rhs)
            }
        }
        impl std::ops::$trait for CycloNumber {
            type Output = CycloNumber;
            fn $method(self, rhs: CycloNumber) -> CycloNumber {
                CycloNumber::$imp(&self, &rhs)
            }
        }
        impl std::ops::$trait<&CycloNumber> for CycloNumber {
            type Output = CycloNumber;
            fn $method(self, rhs: &CycloNumber) -> CycloNumber {
                CycloNumber::$imp(&self, rhs)
            }
        }
    };
}

forward_binop!(Add, add, add);
forward_binop!(Sub, sub, sub);
forward_binop!(Mul, mul, mul);

impl std::ops::Neg for &CycloNumber {
    type Output = CycloNumber;
    fn neg(self) -> CycloNumber {
        CycloNumber::neg(self)
    }
}

impl std::ops::Neg for CycloNumber {
    type Output = CycloNumber;
    fn neg(self) -> CycloNumber {
        CycloNumber::neg(&self)
    }
}

impl fmt::Display for CycloNumber {
    /// Renders as a sum over the power basis, highest exponent first, e.g.
    /// `z48^8 - 1` or `3/2*z10`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let unit_coeff = mag.is_one() && *e > 0;
            if !unit_coeff {
                write!(f, "{mag}")?;
            }
            if *e > 0 {
                if !unit_coeff {
                    write!(f, "*")?;
                }
                write!(f, "z{}", self.order)?;
                if *e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn phi48_reduction() {
        // Phi_48 = x^16 - x^8 + 1, so zeta^16 canonicalizes to zeta^8 - 1.
        let z16 = CycloNumber::zeta_pow(48, 16);
        let expected = CycloNumber::zeta_pow(48, 8).sub(&CycloNumber::one(48));
        assert_eq!(z16, expected);
        assert_eq!(euler_phi(48), 16);
    }

    #[test]
    fn root_of_unity_full_turns() {
        // One half turn in Q(zeta_4) is -1.
        let half = CycloNumber::root_of_unity(4, &rat(1, 2)).unwrap();
        assert_eq!(half, CycloNumber::from_integer(4, -1));
        // A twelfth of a turn in Q(zeta_48) is zeta_48^4.
        let twelfth = CycloNumber::root_of_unity(48, &rat(1, 12)).unwrap();
        assert_eq!(twelfth, CycloNumber::zeta_pow(48, 4));
        // A third of a turn is the primitive cube root zeta_48^16 = zeta^8 - 1.
        let omega = CycloNumber::root_of_unity(48, &rat(1, 3)).unwrap();
        assert_eq!(
            omega,
            CycloNumber::zeta_pow(48, 8).sub(&CycloNumber::one(48))
        );
        // Outside the field: one fifth of a turn is not in Q(zeta_48).
        assert!(CycloNumber::root_of_unity(48, &rat(1, 5)).is_err());
    }

    #[test]
    fn omega_cubes_to_one() {
        let omega = CycloNumber::root_of_unity(48, &rat(1, 3)).unwrap();
        let cube = omega.mul(&omega).mul(&omega);
        assert!(cube.is_one());
    }

    #[test]
    fn root_of_unity_power_law() {
        let m = 40;
        let q = rat(3, 8);
        let r = CycloNumber::root_of_unity(m, &q).unwrap();
        for k in 0..7i64 {
            let lhs = r.pow(k).unwrap();
            let rhs = CycloNumber::root_of_unity(m, &(q.clone() * rat(k, 1))).unwrap();
            assert_eq!(lhs, rhs, "power law at k={k}");
        }
    }

    #[test]
    fn inverse_round_trip() {
        let omega = CycloNumber::root_of_unity(48, &rat(1, 3)).unwrap();
        let x = omega.scale(&rat(3, 7)).add(&CycloNumber::from_integer(48, 2));
        let inv = x.inv().unwrap();
        assert!(x.mul(&inv).is_one());
        assert!(CycloNumber::zero(48).inv().is_err());
        assert!(CycloNumber::one(48).inv().unwrap().is_one());
    }

    #[test]
    fn mixed_order_coercion() {
        // zeta_6 = -zeta_3^2; adding values from Q(zeta_3) and Q(zeta_2).
        let z3 = CycloNumber::zeta_pow(3, 1);
        let minus_one = CycloNumber::from_integer(2, -1);
        let sum = z3.add(&minus_one);
        assert_eq!(sum.order(), 6);
        assert_eq!(sum, CycloNumber::zeta_pow(6, 2).sub(&CycloNumber::one(6)));
    }

    #[test]
    fn conjugation_is_an_automorphism() {
        let a = CycloNumber::zeta_pow(20, 3).scale(&rat(2, 5));
        let b = CycloNumber::zeta_pow(20, 7).add(&CycloNumber::one(20));
        assert_eq!(a.mul(&b).conj(), a.conj().mul(&b.conj()));
        assert_eq!(a.conj().conj(), a);
    }

    #[test]
    fn galois_rejects_non_coprime() {
        let a = CycloNumber::zeta_pow(12, 1);
        assert!(a.galois(3).is_err());
        assert!(a.galois(5).is_ok());
    }

    #[test]
    fn embedding_matches_known_values() {
        let omega = CycloNumber::root_of_unity(48, &rat(1, 3)).unwrap();
        let (re, im) = omega.to_f64();
        assert!((re + 0.5).abs() < 1e-12);
        assert!((im - 0.8660254037844386).abs() < 1e-12);
        let (re, im) = CycloNumber::one(4).to_f64();
        assert!((re - 1.0).abs() < 1e-12 && im.abs() < 1e-12);
    }

    #[test]
    fn embedding_is_multiplicative() {
        let a = CycloNumber::zeta_pow(16, 3).scale(&rat(5, 3));
        let b = CycloNumber::zeta_pow(16, 7).sub(&CycloNumber::from_integer(16, 2));
        let lhs = a.mul(&b).embed(80);
        let rhs = a.embed(80).mul(&b.embed(80));
        let diff = lhs.sub(&rhs).norm_sq();
        assert!(diff.to_f64().unwrap() < 1e-40);
    }

    #[test]
    fn sqrt_of_rationals() {
        // sqrt(1/2) exists in Q(zeta_16) (conductor 8 divides 16).
        let half = CycloNumber::from_rational(16, rat(1, 2));
        let r = half.sqrt().expect("sqrt(1/2) in Q(zeta_16)");
        assert_eq!(r.mul(&r), half);
        // sqrt(3) exists in Q(zeta_48) and embeds positively.
        let three = CycloNumber::from_integer(48, 3);
        let r = three.sqrt().expect("sqrt(3) in Q(zeta_48)");
        assert_eq!(r.mul(&r), three);
        assert!(r.to_f64().0 > 0.0);
        // sqrt(5) exists in Q(zeta_5).
        let five = CycloNumber::from_integer(5, 5);
        let r = five.sqrt().expect("sqrt(5) in Q(zeta_5)");
        assert_eq!(r.mul(&r), five);
        assert!(r.to_f64().0 > 0.0);
        // sqrt(-1) in Q(zeta_4) is i.
        let minus_one = CycloNumber::from_integer(4, -1);
        let r = minus_one.sqrt().expect("i in Q(zeta_4)");
        assert_eq!(r, CycloNumber::zeta_pow(4, 1));
        // sqrt(21) in Q(zeta_84): composite radicand with branch fix-up.
        let q21 = CycloNumber::from_integer(84, 21);
        let r = q21.sqrt().expect("sqrt(21) in Q(zeta_84)");
        assert_eq!(r.mul(&r), q21);
        assert!(r.to_f64().0 > 0.0);
        // sqrt(3) does not exist in Q(zeta_16) (conductor 12 does not divide 16).
        assert!(CycloNumber::from_integer(16, 3).sqrt().is_none());
    }

    #[test]
    fn sqrt_of_monomials() {
        // sqrt(2i) = 1 + i in Q(zeta_4).
        let two_i = CycloNumber::zeta_pow(4, 1).scale(&rat(2, 1));
        let r = two_i.sqrt().expect("sqrt(2i) in Q(zeta_4)");
        assert_eq!(r, CycloNumber::one(4).add(&CycloNumber::zeta_pow(4, 1)));
        // Odd order: sqrt(zeta_5) = zeta_5^3.
        let z5 = CycloNumber::zeta_pow(5, 1);
        let r = z5.sqrt().expect("sqrt(zeta_5)");
        assert_eq!(r.mul(&r), z5);
        // Multi-term canonical monomial: zeta_48^16 is omega, a square.
        let omega = CycloNumber::zeta_pow(48, 16);
        let r = omega.sqrt().expect("sqrt(omega) = zeta_48^8");
        assert_eq!(r.mul(&r), omega);
        // 8 | m with odd exponent has no root in the field.
        assert!(CycloNumber::zeta_pow(16, 3).sqrt().is_none());
        // Non-monomial values report None: 1/phi in Q(zeta_10).
        let sqrt5 = CycloNumber::from_integer(10, 5).sqrt().unwrap();
        let inv_phi = sqrt5
            .sub(&CycloNumber::one(10))
            .scale(&rat(1, 2));
        assert!(inv_phi.sqrt().is_none());
    }

    #[test]
    fn sqrt_negative_two() {
        let val = CycloNumber::from_integer(8, -2);
        let r = val.sqrt().expect("sqrt(-2) in Q(zeta_8)");
        assert_eq!(r.mul(&r), val);
        assert!(r.to_f64().1 > 0.0, "axis tie breaks to positive imaginary");
    }

    #[test]
    fn serialization_round_trip() {
        let x = CycloNumber::zeta_pow(48, 8)
            .scale(&rat(-7, 3))
            .add(&CycloNumber::from_rational(48, rat(22, 5)));
        let ser = x.to_ser();
        let back = CycloNumber::from_ser(48, &ser).unwrap();
        assert_eq!(x, back);
        assert!(CycloNumber::from_ser(48, &vec![(0, "x".into(), "1".into())]).is_err());
    }

    #[test]
    fn display_forms() {
        let omega = CycloNumber::root_of_unity(48, &rat(1, 3)).unwrap();
        assert_eq!(omega.to_string(), "z48^8 - 1");
        assert_eq!(omega.neg().to_string(), "-z48^8 + 1");
        assert_eq!(CycloNumber::zero(5).to_string(), "0");
        assert_eq!(
            CycloNumber::zeta_pow(10, 1).scale(&rat(3, 2)).to_string(),
            "3/2*z10"
        );
    }

    #[test]
    fn field_axioms_spot_checks() {
        // A tiny deterministic sample: associativity and distributivity.
        let vals = [
            CycloNumber::zeta_pow(12, 1).scale(&rat(2, 3)),
            CycloNumber::zeta_pow(12, 5).sub(&CycloNumber::one(12)),
            CycloNumber::from_rational(12, rat(-7, 4)),
        ];
        for a in &vals {
            for b in &vals {
                for c in &vals {
                    assert_eq!(a.add(b).add(c), a.add(&b.add(c)));
                    assert_eq!(a.mul(b).mul(c), a.mul(&b.mul(c)));
                    assert_eq!(a.mul(&b.add(c)), a.mul(b).add(&a.mul(c)));
                }
            }
        }
    }
}

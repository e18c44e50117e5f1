//! Controlled-precision complex embedding of exact numbers.
//!
//! Exact cyclotomic and tower values eventually need numeric coordinates:
//! for branch selection of square roots, for unitarity bounds, and for the
//! gate searches. This module provides [`FixedComplex`], a fixed-point
//! complex number `(re + i*im) / 2^prec` over big integers, together with
//! the transcendental kernels needed to embed roots of unity:
//!
//! * `pi` to arbitrary precision via the Machin formula,
//! * `e^(2*pi*i*q)` for rational `q` via scaled Taylor series plus
//!   repeated squaring,
//! * principal complex square roots via integer square roots.
//!
//! # Design notes
//!
//! All public entry points compute internally with `GUARD` extra bits and
//! truncate on return, so results are accurate to well under one unit in
//! the last place of the requested precision. Arithmetic is deterministic:
//! the same inputs produce bit-identical outputs on every run and worker.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::numutil::div_round;

/// Extra working bits used inside kernels before truncating to the
/// requested precision.
const GUARD: u32 = 64;

/// A complex number stored in fixed point: the value is
/// `(re + i * im) / 2^prec`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedComplex {
    re: BigInt,
    im: BigInt,
    prec: u32,
}

impl FixedComplex {
    pub fn new(re: BigInt, im: BigInt, prec: u32) -> Self {
        FixedComplex { re, im, prec }
    }

    pub fn zero(prec: u32) -> Self {
        FixedComplex::new(BigInt::zero(), BigInt::zero(), prec)
    }

    pub fn one(prec: u32) -> Self {
        FixedComplex::new(BigInt::from(1) << prec, BigInt::zero(), prec)
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        let scaled = q * BigRational::from_integer(BigInt::from(1) << prec);
        let re = div_round(scaled.numer(), &scaled.denom().abs())
            * if scaled.denom().is_negative() { -1 } else { 1 };
        FixedComplex::new(re, BigInt::zero(), prec)
    }

    /// Drops precision to `prec` bits (no-op when already at or below).
    pub fn truncate(&self, prec: u32) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        let shift = self.prec - prec;
        let half = BigInt::from(1) << (shift - 1);
        FixedComplex::new((&self.re + &half) >> shift, (&self.im + &half) >> shift, prec)
    }

    fn assert_same_prec(&self, rhs: &Self) {
        assert_eq!(self.prec, rhs.prec, "mixed fixed-point precisions");
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.assert_same_prec(rhs);
        FixedComplex::new(&self.re + &rhs.re, &self.im + &rhs.im, self.prec)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.assert_same_prec(rhs);
        FixedComplex::new(&self.re - &rhs.re, &self.im - &rhs.im, self.prec)
    }

    pub fn neg(&self) -> Self {
        FixedComplex::new(-&self.re, -&self.im, self.prec)
    }

    pub fn conj(&self) -> Self {
        FixedComplex::new(self.re.clone(), -&self.im, self.prec)
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        self.assert_same_prec(rhs);
        let scale = BigInt::from(1) << self.prec;
        let re = &self.re * &rhs.re - &self.im * &rhs.im;
        let im = &self.re * &rhs.im + &self.im * &rhs.re;
        FixedComplex::new(div_round(&re, &scale), div_round(&im, &scale), self.prec)
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        let num = q.numer();
        let den = q.denom();
        let (num, den) = if den.is_negative() {
            (-num, -den)
        } else {
            (num.clone(), den.clone())
        };
        FixedComplex::new(
            div_round(&(&self.re * &num), &den),
            div_round(&(&self.im * &num), &den),
            self.prec,
        )
    }

    /// Squared magnitude as an exact rational (of the stored fixed-point
    /// value, not of the ideal number it approximates).
    pub fn norm_sq(&self) -> BigRational {
        let num = &self.re * &self.re + &self.im * &self.im;
        BigRational::new(num, BigInt::from(1) << (2 * self.prec))
    }

    /// Magnitude in the same fixed-point scale (floor of the true value).
    pub fn mag_fixed(&self) -> BigInt {
        num_integer::Roots::sqrt(&(&self.re * &self.re + &self.im * &self.im))
    }

    pub fn re_fixed(&self) -> &BigInt {
        &self.re
    }

    pub fn im_fixed(&self) -> &BigInt {
        &self.im
    }

    pub fn re_rational(&self) -> BigRational {
        BigRational::new(self.re.clone(), BigInt::from(1) << self.prec)
    }

    pub fn im_rational(&self) -> BigRational {
        BigRational::new(self.im.clone(), BigInt::from(1) << self.prec)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (
            self.re_rational().to_f64().unwrap_or(f64::NAN),
            self.im_rational().to_f64().unwrap_or(f64::NAN),
        )
    }

    /// Principal square root: the branch with positive real part, and
    /// non-negative imaginary part on the branch cut (negative reals).
    pub fn sqrt_principal(&self) -> Self {
        let scale = BigInt::from(1) << self.prec;
        let mag = self.mag_fixed();
        // w = sqrt((|z| + re) / 2), v = sqrt((|z| - re) / 2), z = (w + i*sign(im)*v)^2
        let half_sum = (&mag + &self.re) * &scale;
        let half_diff = (&mag - &self.re) * &scale;
        let half_sum: BigInt = half_sum >> 1;
        let half_diff: BigInt = half_diff >> 1;
        let w = num_integer::Roots::sqrt(&half_sum);
        let v = num_integer::Roots::sqrt(&half_diff);
        let v = if self.im.is_negative() { -v } else { v };
        FixedComplex::new(w, v, self.prec)
    }
}

/// `pi * 2^prec`, rounded. Cached per precision.
pub fn pi_fixed(prec: u32) -> BigInt {
    static CACHE: OnceLock<Mutex<HashMap<u32, BigInt>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&prec) {
        return v.clone();
    }
    // Machin: pi = 16*atan(1/5) - 4*atan(1/239), in fixed point with guard bits.
    let work = prec + GUARD;
    let value: BigInt = (atan_inv_fixed(5, work) * 16 - atan_inv_fixed(239, work) * 4) >> GUARD;
    cache.lock().unwrap().insert(prec, value.clone());
    value
}

/// `atan(1/x) * 2^prec` by the alternating power series, exact integer ops.
fn atan_inv_fixed(x: u64, prec: u32) -> BigInt {
    let x = BigInt::from(x);
    let x2 = &x * &x;
    let mut power = (BigInt::from(1) << prec) / &x;
    let mut acc = power.clone();
    let mut k = 1u64;
    loop {
        power /= &x2;
        if power.is_zero() {
            break;
        }
        let term = &power / BigInt::from(2 * k + 1);
        if k % 2 == 1 {
            acc -= &term;
        } else {
            acc += &term;
        }
        k += 1;
    }
    acc
}

/// `e^(2*pi*i*q)` for rational `q`, accurate to the requested precision.
pub fn exp_2pi_i(q: &BigRational, prec: u32) -> FixedComplex {
    let work = prec + GUARD;
    // Reduce q mod 1 to keep the Taylor argument bounded.
    let q = q - q.floor();
    let pi = pi_fixed(work);
    // theta = 2*pi*q in fixed point at `work` bits.
    let theta_num = &pi * 2 * q.numer();
    let theta = div_round(&theta_num, q.denom());
    // Scale down so the Taylor argument is below 2^-4, then square back up.
    const HALVINGS: u32 = 7;
    let small = theta >> HALVINGS;
    let mut z = exp_i_taylor(&small, work);
    for _ in 0..HALVINGS {
        z = z.mul(&z);
    }
    z.truncate(prec)
}

/// `e^(i*t)` for a small fixed-point argument `t` (|t| < 1/16).
fn exp_i_taylor(t_fixed: &BigInt, prec: u32) -> FixedComplex {
    let mut acc = FixedComplex::one(prec);
    let mut term = FixedComplex::one(prec);
    let it = FixedComplex::new(BigInt::zero(), t_fixed.clone(), prec);
    let mut k = 1u64;
    loop {
        term = term.mul(&it);
        term = FixedComplex::new(
            div_round(&term.re, &BigInt::from(k)),
            div_round(&term.im, &BigInt::from(k)),
            prec,
        );
        if term.re.is_zero() && term.im.is_zero() {
            break;
        }
        acc = acc.add(&term);
        k += 1;
    }
    acc
}

/// Cached powers `zeta_m^0 .. zeta_m^(m-1)` at a given precision.
fn zeta_powers(order: u32, prec: u32) -> Arc<Vec<FixedComplex>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), Arc<Vec<FixedComplex>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&(order, prec)) {
        return Arc::clone(v);
    }
    let mut powers = Vec::with_capacity(order as usize);
    for e in 0..order {
        let q = BigRational::new(BigInt::from(e), BigInt::from(order));
        powers.push(exp_2pi_i(&q, prec));
    }
    let powers = Arc::new(powers);
    cache
        .lock()
        .unwrap()
        .insert((order, prec), Arc::clone(&powers));
    powers
}

/// Embeds a sum `Σ q_e * zeta_order^e` given as `(exponent, coefficient)`
/// terms, under the principal embedding `zeta_m -> e^(2*pi*i/m)`.
pub fn embed_cyclo_terms(order: u32, terms: &[(u32, BigRational)], prec: u32) -> FixedComplex {
    let work = prec + GUARD;
    let powers = zeta_powers(order, work);
    let mut acc = FixedComplex::zero(work);
    for (e, q) in terms {
        acc = acc.add(&powers[(*e % order) as usize].scale(q));
    }
    acc.truncate(prec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(value: &FixedComplex, re: f64, im: f64, tol: f64) {
        let (r, i) = value.to_f64();
        assert!((r - re).abs() < tol, "re {r} vs {re}");
        assert!((i - im).abs() < tol, "im {i} vs {im}");
    }

    #[test]
    fn pi_to_double_accuracy() {
        let p = pi_fixed(64);
        let approx_pi = BigRational::new(p, BigInt::from(1) << 64)
            .to_f64()
            .unwrap();
        assert!((approx_pi - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn quarter_turn_is_i() {
        let q = BigRational::new(BigInt::from(1), BigInt::from(4));
        let z = exp_2pi_i(&q, 96);
        approx(&z, 0.0, 1.0, 1e-25);
    }

    #[test]
    fn third_turn_matches_cosine() {
        let q = BigRational::new(BigInt::from(1), BigInt::from(3));
        let z = exp_2pi_i(&q, 96);
        approx(&z, -0.5, 0.8660254037844386, 1e-25);
    }

    #[test]
    fn embed_sum_of_roots() {
        // zeta_6 + zeta_6^5 = 2*cos(pi/3) = 1.
        let one = BigRational::from_integer(BigInt::from(1));
        let z = embed_cyclo_terms(6, &[(1, one.clone()), (5, one)], 96);
        approx(&z, 1.0, 0.0, 1e-25);
    }

    #[test]
    fn principal_sqrt_of_negative_real() {
        let minus_four = FixedComplex::from_rational(
            &BigRational::from_integer(BigInt::from(-4)),
            96,
        );
        let root = minus_four.sqrt_principal();
        approx(&root, 0.0, 2.0, 1e-20);
    }

    #[test]
    fn sqrt_squares_back() {
        let z = FixedComplex::new(BigInt::from(3) << 96, BigInt::from(7) << 90, 96);
        let w = z.sqrt_principal();
        let back = w.mul(&w);
        let diff = z.sub(&back);
        assert!(diff.norm_sq().to_f64().unwrap() < 1e-40);
    }

    #[test]
    fn exp_is_multiplicative() {
        let a = BigRational::new(BigInt::from(1), BigInt::from(7));
        let b = BigRational::new(BigInt::from(2), BigInt::from(5));
        let lhs = exp_2pi_i(&(a.clone() + b.clone()), 96);
        let rhs = exp_2pi_i(&a, 96).mul(&exp_2pi_i(&b, 96));
        let diff = lhs.sub(&rhs);
        assert!(diff.norm_sq().to_f64().unwrap() < 1e-50);
    }
}

//! Small integer-arithmetic helpers shared by the exact-number modules.
//!
//! Everything here operates on plain integers: deterministic primality
//! testing, trial-division factoring, Legendre symbols, and rounded
//! division for fixed-point conversions. The helpers are deliberately
//! conservative: whenever a classification cannot be certified (for
//! example a huge cofactor that resists factoring), callers receive a
//! `None`/failure answer and fall back to a safe code path.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

/// Trial-division bound for factoring squarefree parts. Solver constants
/// are tiny in practice; the bound only matters for pathological inputs.
const TRIAL_BOUND: u64 = 1 << 20;

/// Deterministic Miller-Rabin for `u64` inputs.
///
/// The witness set {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37} is known to
/// be exact for all 64-bit integers.
pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mod_mul_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub(crate) fn mod_mul_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn mod_pow_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mod_mul_u64(acc, base, m);
        }
        base = mod_mul_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Legendre symbol (a | p) for an odd prime `p`, via Euler's criterion.
pub(crate) fn legendre(a: u64, p: u64) -> i32 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    let e = mod_pow_u64(a, (p - 1) / 2, p);
    if e == 1 {
        1
    } else {
        -1
    }
}

/// Splits `|n|` into `(root, squarefree)` with `|n| = root^2 * squarefree`,
/// also returning whether the squarefree part was fully certified.
///
/// Factoring uses trial division up to a fixed bound plus a perfect-square
/// check and a primality test on the cofactor. When the cofactor cannot be
/// certified squarefree, the flag is `false` and callers should treat the
/// number as "not a recognizable square" rather than guess.
pub(crate) fn squarefree_decompose(n: &BigInt) -> (BigInt, BigInt, bool) {
    assert!(!n.is_negative(), "squarefree_decompose takes |n|");
    if n.is_zero() {
        return (BigInt::zero(), BigInt::zero(), true);
    }
    let mut root = BigInt::from(1);
    let mut squarefree = BigInt::from(1);
    let mut rest = n.clone();
    let mut p = 2u64;
    while p <= TRIAL_BOUND {
        let pb = BigInt::from(p);
        if (&pb * &pb) > rest {
            break;
        }
        let mut count = 0u32;
        while (&rest % &pb).is_zero() {
            rest /= &pb;
            count += 1;
        }
        if count > 0 {
            root *= pb.pow(count / 2);
            if count % 2 == 1 {
                squarefree *= &pb;
            }
        }
        p = if p == 2 { 3 } else { p + 2 };
    }
    if rest == BigInt::from(1) {
        return (root, squarefree, true);
    }
    // Cofactor left over: it has no factor below the trial bound.
    let s = num_integer::Roots::sqrt(&rest);
    if &s * &s == rest {
        // Perfect square; its root may itself be composite but that is fine.
        root *= s;
        return (root, squarefree, true);
    }
    if let Some(r64) = rest.to_u64() {
        if is_prime_u64(r64) {
            squarefree *= rest;
            return (root, squarefree, true);
        }
    }
    // Could not certify the cofactor; report it uncertified.
    squarefree *= rest;
    (root, squarefree, false)
}

/// Rounded integer division `a / b` (round half away from zero), `b > 0`.
pub(crate) fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    debug_assert!(b.is_positive());
    let two_a = a * 2;
    let adjusted = if a.is_negative() { &two_a - b } else { &two_a + b };
    adjusted / (b * 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_small_cases() {
        let primes = [2u64, 3, 5, 7, 11, 97, 65537, 4294967291];
        for p in primes {
            assert!(is_prime_u64(p), "{p} should be prime");
        }
        let composites = [1u64, 4, 9, 91, 561, 1105, 4294967295];
        for c in composites {
            assert!(!is_prime_u64(c), "{c} should be composite");
        }
    }

    #[test]
    fn legendre_matches_squares_mod_7() {
        let squares: Vec<u64> = (1..7).map(|x| (x * x) % 7).collect();
        for a in 1..7u64 {
            let expected = if squares.contains(&a) { 1 } else { -1 };
            assert_eq!(legendre(a, 7), expected);
        }
    }

    #[test]
    fn squarefree_split() {
        let (root, sf, ok) = squarefree_decompose(&BigInt::from(360));
        // 360 = 6^2 * 10
        assert_eq!(root, BigInt::from(6));
        assert_eq!(sf, BigInt::from(10));
        assert!(ok);

        let (root, sf, ok) = squarefree_decompose(&BigInt::from(1));
        assert_eq!(root, BigInt::from(1));
        assert_eq!(sf, BigInt::from(1));
        assert!(ok);
    }

    #[test]
    fn rounded_division() {
        assert_eq!(div_round(&BigInt::from(7), &BigInt::from(2)), BigInt::from(4));
        assert_eq!(div_round(&BigInt::from(-7), &BigInt::from(2)), BigInt::from(-4));
        assert_eq!(div_round(&BigInt::from(6), &BigInt::from(2)), BigInt::from(3));
    }
}

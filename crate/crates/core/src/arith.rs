// SPDX-License-Identifier: Apache-2.0

//! Exact integer and rational predicates shared by every other module.
//!
//! Everything here works on [`Int`] / [`Rat`]. Inputs that fit in a `u64`
//! are routed through machine-word fast paths (deterministic Miller-Rabin,
//! trial division plus Brent's variant of Pollard rho); larger inputs fall
//! back to slower but exact big-integer routines.

use num_bigint::{BigInt, Sign};
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::{Int, Rat};

/// Trial division limit before switching to Pollard rho.
pub const TRIAL_DIVISION_LIMIT: u64 = 1_000_000;

/// Witnesses making strong-pseudoprime testing deterministic below 2^64.
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("squarefreeness is undefined for zero")]
    ZeroNotSquarefree,
    #[error("cannot factor {0}: input must be at least 2")]
    FactorOutOfRange(Int),
}

/// `true` iff no prime square divides `n`.
pub fn squarefree(n: &Int) -> Result<bool, ArithError> {
    if n.is_zero() {
        return Err(ArithError::ZeroNotSquarefree);
    }
    let m = n.abs();
    if m.is_one() {
        return Ok(true);
    }
    Ok(factor(&m)?.iter().all(|(_, e)| *e == 1))
}

/// Exact square root of a perfect square, `None` for negatives and non-squares.
pub fn integer_sqrt(n: &Int) -> Option<Int> {
    if n.is_negative() {
        return None;
    }
    let s = n.sqrt();
    if &s * &s == *n {
        Some(s)
    } else {
        None
    }
}

/// `true` iff `q` is the square of a rational number.
pub fn is_square(q: &Rat) -> bool {
    // Rat is always reduced, so q is a square iff numerator and denominator are.
    integer_sqrt(q.numer()).is_some() && integer_sqrt(q.denom()).is_some()
}

pub fn is_prime(n: &Int) -> bool {
    if n.sign() != Sign::Plus {
        return false;
    }
    match n.to_u64() {
        Some(small) => is_prime_u64(small),
        None if n < &Int::from(MR_BIG_BOUND) => is_prime_mr_big(n),
        None => is_prime_mr_big(n) && is_prime_trial(n),
    }
}

/// Below this bound the strong-pseudoprime test to the first 13 prime bases
/// (up to 41) is deterministic.
const MR_BIG_BOUND: u128 = 3_317_044_064_679_887_385_961_981;

fn is_prime_mr_big(n: &Int) -> bool {
    let one = Int::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    'witness: for a in MR_WITNESSES.iter().copied().chain([41]) {
        let a = Int::from(a);
        if (n % &a).is_zero() {
            return n == &a;
        }
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = &x * &x % n;
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_WITNESSES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_WITNESSES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn is_prime_trial(n: &Int) -> bool {
    let two = BigInt::from(2u32);
    if n < &two {
        return false;
    }
    if n.is_even() {
        return n == &two;
    }
    let mut p = BigInt::from(3u32);
    while &p * &p <= *n {
        if (n % &p).is_zero() {
            return false;
        }
        p += 2u32;
    }
    true
}

/// Prime factorization with strictly increasing primes.
pub fn factor(n: &Int) -> Result<Vec<(Int, u32)>, ArithError> {
    if n < &BigInt::from(2u32) {
        return Err(ArithError::FactorOutOfRange(n.clone()));
    }
    if let Some(small) = n.to_u64() {
        return Ok(factor_u64(small)
            .into_iter()
            .map(|(p, e)| (Int::from(p), e))
            .collect());
    }
    let mut primes = Vec::new();
    let mut rest = n.clone();
    let mut p = 2u64;
    while p <= TRIAL_DIVISION_LIMIT {
        let bp = Int::from(p);
        if &bp * &bp > rest {
            break;
        }
        let mut e = 0;
        while (&rest % &bp).is_zero() {
            rest /= &bp;
            e += 1;
        }
        if e > 0 {
            primes.push((bp, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if !rest.is_one() {
        let mut stack = vec![rest];
        while let Some(m) = stack.pop() {
            if m.is_one() {
                continue;
            }
            if let Some(small) = m.to_u64() {
                primes.extend(factor_u64(small).into_iter().map(|(p, e)| (Int::from(p), e)));
            } else if is_prime(&m) {
                primes.push((m, 1));
            } else {
                let d = pollard_rho_big(&m);
                stack.push(&m / &d);
                stack.push(d);
            }
        }
    }
    Ok(merge_factors(primes))
}

fn merge_factors(mut primes: Vec<(Int, u32)>) -> Vec<(Int, u32)> {
    primes.sort();
    let mut out: Vec<(Int, u32)> = Vec::with_capacity(primes.len());
    for (p, e) in primes {
        match out.last_mut() {
            Some((q, f)) if *q == p => *f += e,
            _ => out.push((p, e)),
        }
    }
    out
}

/// Factorization of a machine word; empty for `n < 2`.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut p = 2u64;
    while p <= TRIAL_DIVISION_LIMIT && p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n == 1 {
        return out;
    }
    let mut pending = vec![n];
    let mut large = Vec::new();
    while let Some(m) = pending.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u64(m) {
            large.push(m);
            continue;
        }
        if let Some(r) = exact_sqrt_u64(m) {
            pending.push(r);
            pending.push(r);
            continue;
        }
        let d = pollard_rho_u64(m);
        pending.push(d);
        pending.push(m / d);
    }
    large.sort_unstable();
    for q in large {
        match out.last_mut() {
            Some((r, e)) if *r == q => *e += 1,
            _ => out.push((q, 1)),
        }
    }
    out
}

fn exact_sqrt_u64(n: u64) -> Option<u64> {
    let s = n.sqrt();
    (s.checked_mul(s) == Some(n)).then_some(s)
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Brent's cycle detection; `n` must be an odd composite that is not a prime power square.
fn pollard_rho_u64(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    for c in 1..n {
        let f = |x: u64| ((mul_mod_u64(x, x, n) as u128 + c as u128) % n as u128) as u64;
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        let mut q = 1u64;
        let mut r = 1u64;
        let mut ys = 0;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..(128.min(r - k)) {
                    y = f(y);
                    q = mul_mod_u64(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += 128;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!("pollard rho exhausted all increments for {n}")
}

fn pollard_rho_big(n: &Int) -> Int {
    if n.is_even() {
        return Int::from(2u32);
    }
    let mut c = Int::one();
    loop {
        let f = |x: &Int| (x * x + &c) % n;
        let mut x = Int::from(2u32);
        let mut y = x.clone();
        let mut g = Int::one();
        while g.is_one() {
            x = f(&x);
            y = f(&f(&y));
            g = (&x - &y).abs().gcd(n);
        }
        if &g != n {
            return g;
        }
        c += 1u32;
    }
}

/// Kronecker symbol `(a / n)`; agrees with the Jacobi symbol for odd positive `n`.
pub fn kronecker(a: &Int, n: &Int) -> i32 {
    const TAB2: [i32; 8] = [0, 1, 0, -1, 0, -1, 0, 1];
    if n.is_zero() {
        return if a.abs().is_one() { 1 } else { 0 };
    }
    if a.is_even() && n.is_even() {
        return 0;
    }
    let a8 = a.mod_floor(&Int::from(8u32)).to_usize().unwrap();
    let mut b = n.clone();
    let mut k = 1;
    let mut v = 0u32;
    while b.is_even() {
        b >>= 1u32;
        v += 1;
    }
    if v % 2 == 1 {
        k = TAB2[a8];
    }
    if b.is_negative() {
        b = -b;
        if a.is_negative() {
            k = -k;
        }
    }
    // b is now odd and positive: Jacobi symbol (a mod b / b).
    let mut a = a.mod_floor(&b);
    while !a.is_zero() {
        let mut v = 0u32;
        while a.is_even() {
            a >>= 1u32;
            v += 1;
        }
        if v % 2 == 1 {
            k *= TAB2[(&b % 8u32).to_usize().unwrap()];
        }
        if (&a % 4u32) == Int::from(3u32) && (&b % 4u32) == Int::from(3u32) {
            k = -k;
        }
        let r = a.clone();
        a = &b % &r;
        b = r;
    }
    if b.is_one() {
        k
    } else {
        0
    }
}

/// `base^exp mod m` for a nonnegative exponent; result in `[0, m)`.
pub fn pow_mod(base: &Int, exp: &Int, m: &Int) -> Int {
    base.mod_floor(m).modpow(exp, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn int(n: i64) -> Int {
        Int::from(n)
    }

    fn rat(n: i64, d: i64) -> Rat {
        BigRational::new(int(n), int(d))
    }

    fn binary_search_sqrt(n: i64) -> Option<i64> {
        if n < 0 {
            return None;
        }
        let (mut lo, mut hi) = (0i64, n.max(1));
        while lo <= hi {
            let mid = lo + (hi - lo) / 2;
            match (mid * mid).cmp(&n) {
                std::cmp::Ordering::Equal => return Some(mid),
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid - 1,
            }
        }
        None
    }

    #[test]
    fn squarefree_examples() {
        assert_eq!(squarefree(&int(-5)), Ok(true));
        assert_eq!(squarefree(&int(1)), Ok(true));
        assert_eq!(squarefree(&int(-12)), Ok(false));
        assert_eq!(squarefree(&int(0)), Err(ArithError::ZeroNotSquarefree));
    }

    #[test]
    fn is_square_examples() {
        assert!(is_square(&rat(4, 1)));
        assert!(!is_square(&rat(-5, 1)));
        assert!(is_square(&rat(49, 9)));
        assert!(is_square(&rat(0, 1)));
        assert!(is_square(&rat(8, 18)));
    }

    #[test]
    fn integer_sqrt_examples() {
        assert_eq!(binary_search_sqrt(4900), Some(70));
        assert_eq!(integer_sqrt(&int(4900)), Some(int(70)));
        assert_eq!(integer_sqrt(&int(0)), Some(int(0)));
        assert_eq!(binary_search_sqrt(5), None);
        assert_eq!(integer_sqrt(&int(5)), None);
        assert_eq!(integer_sqrt(&int(-4)), None);
    }

    #[test]
    fn integer_sqrt_of_squares() {
        for s in 0..=100_000i64 {
            assert_eq!(integer_sqrt(&int(s * s)), Some(int(s)));
        }
    }

    #[test]
    fn primality_examples() {
        assert!(is_prime(&int(2)));
        assert!(!is_prime(&int(1)));
        assert!(!is_prime(&int(1111)));
        assert!(!is_prime(&int(0)));
        assert!(!is_prime(&int(-7)));
        // strong pseudoprime to bases 2..=11
        assert!(!is_prime_u64(3_215_031_751));
        assert!(is_prime_u64(18_446_744_073_709_551_557));
        assert!(is_prime(&(Int::from(1u128 << 64) + 13u32)));
        assert!(!is_prime(&(Int::from(4_294_967_311u64) * Int::from(4_294_967_357u64))));
        // past the deterministic Miller-Rabin range: exact trial division
        assert!(!is_prime(&(Int::from(MR_BIG_BOUND) * Int::from(3))));
    }

    #[test]
    fn factor_examples() {
        assert_eq!(factor(&int(1111)).unwrap(), vec![(int(11), 1), (int(101), 1)]);
        assert_eq!(factor(&int(8)).unwrap(), vec![(int(2), 3)]);
        assert_eq!(factor(&int(4913)).unwrap(), vec![(int(17), 3)]);
        assert!(matches!(factor(&int(1)), Err(ArithError::FactorOutOfRange(_))));
    }

    #[test]
    fn factor_needs_rho() {
        let p = 1_000_003u64;
        let q = 1_000_033u64;
        assert_eq!(factor_u64(p * q), vec![(p, 1), (q, 1)]);
        assert_eq!(factor_u64(p * p), vec![(p, 2)]);
        let big = Int::from(p) * Int::from(q) * Int::from(18_446_744_073_709_551_557u64);
        assert_eq!(
            factor(&big).unwrap(),
            vec![
                (Int::from(p), 1),
                (Int::from(q), 1),
                (Int::from(18_446_744_073_709_551_557u64), 1)
            ]
        );
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(&int(-4), &int(3)), -1);
        assert_eq!(kronecker(&int(-4), &int(2)), 0);
        assert_eq!(kronecker(&int(-20), &int(11)), -1);
        assert_eq!(kronecker(&int(2), &int(7)), 1);
        assert_eq!(kronecker(&int(5), &int(-1)), 1);
        assert_eq!(kronecker(&int(-5), &int(-1)), -1);
        assert_eq!(kronecker(&int(1), &int(0)), 1);
        assert_eq!(kronecker(&int(3), &int(0)), 0);
    }

    /// Euler's criterion: independent route for odd prime moduli.
    #[test]
    fn kronecker_matches_euler_criterion() {
        for p in [3i64, 5, 7, 11, 13, 101, 997] {
            for a in -60i64..60 {
                let e = pow_mod(&int(a), &int((p - 1) / 2), &int(p));
                let expected = if e.is_zero() {
                    0
                } else if e.is_one() {
                    1
                } else {
                    -1
                };
                assert_eq!(kronecker(&int(a), &int(p)), expected, "a={a} p={p}");
            }
        }
    }

    proptest! {
        #[test]
        fn kronecker_multiplicative(a in -10_000i64..=10_000, b in -10_000i64..=10_000, n in -10_000i64..=10_000) {
            prop_assert_eq!(
                kronecker(&int(a), &int(n)) * kronecker(&int(b), &int(n)),
                kronecker(&int(a * b), &int(n))
            );
        }

        #[test]
        fn factor_large_reassembles(n in 2u64..u64::MAX / 2) {
            let f = factor_u64(n);
            prop_assert_eq!(f.iter().fold(1u128, |acc, &(p, e)| acc * (p as u128).pow(e)), n as u128);
            prop_assert!(f.iter().all(|&(p, _)| is_prime_u64(p)));
        }
    }
}

// SPDX-License-Identifier: Apache-2.0

use num_traits::ToPrimitive;
use qdescent::arith::{factor, factor_u64, integer_sqrt, is_prime, is_prime_u64, kronecker};
use qdescent::Int;

const LIMIT: usize = 1_000_000;

fn sieve(n: usize) -> Vec<bool> {
    let mut s = vec![true; n + 1];
    s[0] = false;
    s[1] = false;
    let mut i = 2;
    while i * i <= n {
        if s[i] {
            (i * i..=n).step_by(i).for_each(|j| s[j] = false);
        }
        i += 1;
    }
    s
}

#[test]
fn primality_matches_sieve() {
    let s = sieve(LIMIT);
    for (n, &p) in s.iter().enumerate().skip(2) {
        assert_eq!(is_prime_u64(n as u64), p, "n={n}");
    }
    for n in (2..LIMIT).step_by(997) {
        assert_eq!(is_prime(&Int::from(n)), s[n]);
    }
}

#[test]
fn factorization_reassembles() {
    let s = sieve(LIMIT);
    for n in 2..=LIMIT as u64 {
        let f = factor_u64(n);
        assert_eq!(f.iter().map(|&(p, e)| p.pow(e)).product::<u64>(), n);
        assert!(f.windows(2).all(|w| w[0].0 < w[1].0));
        assert!(f.iter().all(|&(p, e)| e >= 1 && s[p as usize]));
    }
}

#[test]
fn big_factorization_matches_word_factorization() {
    for n in (2u64..LIMIT as u64).step_by(7919) {
        let big: Vec<(u64, u32)> = factor(&Int::from(n)).unwrap().into_iter().map(|(p, e)| (p.to_u64().unwrap(), e)).collect();
        assert_eq!(big, factor_u64(n));
    }
}

#[test]
fn squares_and_quadratic_characters() {
    for n in 0..=2000i64 {
        let is_sq = integer_sqrt(&Int::from(n)).is_some();
        assert_eq!(is_sq, (0..=n).any(|k| k * k == n));
    }
    let s = sieve(2000);
    for p in (3..2000).filter(|&p| s[p]) {
        let p = p as i64;
        for a in 0..p {
            let residue = (1..p).any(|x| x * x % p == a);
            let expected = if a == 0 { 0 } else if residue { 1 } else { -1 };
            assert_eq!(kronecker(&Int::from(a), &Int::from(p)), expected);
        }
    }
}

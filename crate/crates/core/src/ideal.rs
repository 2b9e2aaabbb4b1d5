// SPDX-License-Identifier: Apache-2.0

//! Nonzero integral ideals of `Z[α]` in two-row Hermite normal form.
//!
//! An ideal is stored as the lattice with `Z`-basis `{n, c + m·α}` where
//! `n, m > 0`, `m | n`, `m | c` and `0 ≤ c < n`. This presentation is unique,
//! so ideal equality is field equality and the absolute norm is `n·m`.
//! Divisibility of ideals is containment (`J | I ⇔ I ⊆ J`), which is what the
//! valuations in [`factor_ideal`] rely on.

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::arith;
use crate::quad::{QuadElem, QuadParams};
use crate::{Int, IntScalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdealError {
    #[error("the zero ideal is not supported")]
    ZeroIdeal,
    #[error("generators live in different quadratic rings")]
    ParamsMismatch,
    #[error("not an ideal: {0}")]
    NotAnIdeal(String),
    #[error("unsupported order: {0}")]
    UnsupportedOrder(String),
    #[error("{0} is not prime")]
    NotPrime(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("factorization failed to reassemble {0}; the order is not maximal at some prime")]
    NotDedekind(String),
}

pub(crate) fn to_big<T: IntScalar>(x: &T) -> Int {
    x.to_bigint().expect("integer scalars convert to BigInt")
}

pub(crate) fn from_big<T: IntScalar>(x: &Int) -> T {
    T::from_str_radix(&x.to_str_radix(10), 10)
        .unwrap_or_else(|_| panic!("{x} does not fit in the scalar type"))
}

fn isqrt<T: IntScalar>(x: &T) -> T {
    from_big(&to_big(x).sqrt())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadIdeal<T> {
    params: QuadParams<T>,
    n: T,
    c: T,
    m: T,
    norm: T,
}

/// Reduce a spanning set of a full-rank lattice in `Z²` to `(n, c, m)`.
fn hnf<T: IntScalar>(mut rows: Vec<(T, T)>) -> Option<(T, T, T)> {
    // Euclid on the α-column until a single row has a nonzero entry there.
    loop {
        let pivot = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.1.is_zero())
            .min_by(|a, b| a.1 .1.abs().cmp(&b.1 .1.abs()))
            .map(|(i, _)| i)?;
        let (px, py) = rows[pivot].clone();
        let mut others_nonzero = false;
        for (i, r) in rows.iter_mut().enumerate() {
            if i == pivot || r.1.is_zero() {
                continue;
            }
            let q = r.1.div_floor(&py);
            r.0 = r.0.clone() - q.clone() * px.clone();
            r.1 = r.1.clone() - q * py.clone();
            others_nonzero |= !r.1.is_zero();
        }
        if !others_nonzero {
            let (mut cx, mut m) = rows.swap_remove(pivot);
            if m.is_negative() {
                cx = -cx;
                m = -m;
            }
            let n = rows.iter().fold(T::zero(), |g, r| g.gcd(&r.0));
            if n.is_zero() {
                return None;
            }
            let c = cx.mod_floor(&n);
            return Some((n, c, m));
        }
    }
}

impl<T: IntScalar> QuadIdeal<T> {
    /// Build from an HNF triple, checking the lattice is closed under `α`.
    pub fn from_hnf(params: QuadParams<T>, n: T, c: T, m: T) -> Result<Self, IdealError> {
        if !n.is_positive() || !m.is_positive() || c.is_negative() || c >= n {
            return Err(IdealError::NotAnIdeal(format!("({n}, {c}, {m}) is not in Hermite normal form")));
        }
        if !n.is_multiple_of(&m) || !c.is_multiple_of(&m) {
            return Err(IdealError::NotAnIdeal(format!("({n}, {c}, {m}) fails m | n, m | c")));
        }
        let norm = n.clone() * m.clone();
        let ideal = Self { params, n, c, m, norm };
        let alpha = QuadElem::alpha(ideal.params.clone());
        for g in ideal.basis() {
            if !ideal.contains(&(&alpha * &g)) {
                return Err(IdealError::NotAnIdeal(format!("lattice {ideal} is not closed under multiplication")));
            }
        }
        Ok(ideal)
    }

    /// Smallest ideal containing every generator.
    pub fn from_generators(params: &QuadParams<T>, gens: &[QuadElem<T>]) -> Result<Self, IdealError> {
        if gens.iter().any(|g| g.params() != params) {
            return Err(IdealError::ParamsMismatch);
        }
        let disc = to_big(&params.poly_discriminant());
        if arith::integer_sqrt(&disc).is_some() {
            return Err(IdealError::UnsupportedOrder(format!(
                "X^2 - ({})X - ({}) has an integer root",
                params.a, params.b
            )));
        }
        let alpha = QuadElem::alpha(params.clone());
        let mut rows = Vec::with_capacity(2 * gens.len());
        for g in gens.iter().filter(|g| !g.is_zero()) {
            let ag = &alpha * g;
            rows.push((g.b1.clone(), g.b2.clone()));
            rows.push((ag.b1, ag.b2));
        }
        Self::from_lattice(params, rows)
    }

    fn from_lattice(params: &QuadParams<T>, rows: Vec<(T, T)>) -> Result<Self, IdealError> {
        let (n, c, m) = hnf(rows).ok_or(IdealError::ZeroIdeal)?;
        let norm = n.clone() * m.clone();
        Ok(Self { params: params.clone(), n, c, m, norm })
    }

    pub fn principal(g: &QuadElem<T>) -> Result<Self, IdealError> {
        Self::from_generators(g.params(), std::slice::from_ref(g))
    }

    pub fn unit(params: &QuadParams<T>) -> Self {
        Self { params: params.clone(), n: T::one(), c: T::zero(), m: T::one(), norm: T::one() }
    }

    /// Principal ideal `⟨k⟩` of a nonzero rational integer.
    pub fn of_integer(params: &QuadParams<T>, k: &T) -> Result<Self, IdealError> {
        Self::principal(&QuadElem::from_base(k.clone(), params.clone()))
    }

    pub fn params(&self) -> &QuadParams<T> {
        &self.params
    }

    /// `(n, c, m)`.
    pub fn hnf(&self) -> (&T, &T, &T) {
        (&self.n, &self.c, &self.m)
    }

    pub fn abs_norm(&self) -> &T {
        &self.norm
    }

    pub fn is_unit(&self) -> bool {
        self.norm.is_one()
    }

    /// `Z`-basis `[n, c + m·α]`.
    pub fn basis(&self) -> [QuadElem<T>; 2] {
        [
            QuadElem::from_base(self.n.clone(), self.params.clone()),
            QuadElem::new(self.c.clone(), self.m.clone(), self.params.clone()),
        ]
    }

    pub fn contains(&self, x: &QuadElem<T>) -> bool {
        if x.params() != &self.params || !x.b2.is_multiple_of(&self.m) {
            return false;
        }
        let k = x.b2.clone() / self.m.clone();
        (x.b1.clone() - self.c.clone() * k).is_multiple_of(&self.n)
    }

    /// `self ⊆ other`, i.e. `other` divides `self`.
    pub fn is_contained_in(&self, other: &Self) -> bool {
        self.basis().iter().all(|g| other.contains(g))
    }

    fn check(&self, other: &Self) -> Result<(), IdealError> {
        if self.params == other.params {
            Ok(())
        } else {
            Err(IdealError::ParamsMismatch)
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, IdealError> {
        self.check(other)?;
        let mut rows = Vec::with_capacity(4);
        for x in self.basis() {
            for y in other.basis() {
                let p = &x * &y;
                rows.push((p.b1, p.b2));
            }
        }
        Self::from_lattice(&self.params, rows)
    }

    /// `I + J`, the greatest common divisor.
    pub fn sum(&self, other: &Self) -> Result<Self, IdealError> {
        self.check(other)?;
        let rows = self.basis().into_iter().chain(other.basis()).map(|g| (g.b1, g.b2)).collect();
        Self::from_lattice(&self.params, rows)
    }

    pub fn conj(&self) -> Self {
        let rows = self.basis().iter().map(|g| g.conj()).map(|g| (g.b1, g.b2)).collect();
        Self::from_lattice(&self.params, rows).expect("conjugate of a nonzero ideal is nonzero")
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::unit(&self.params);
        for _ in 0..k {
            acc = acc.mul(self).expect("same ring");
        }
        acc
    }

    /// Exact division of every element by the rational integer `k`, if `k` divides the ideal.
    pub fn div_integer(&self, k: &T) -> Option<Self> {
        let rows: Option<Vec<(T, T)>> = self
            .basis()
            .iter()
            .map(|g| {
                (g.b1.is_multiple_of(k) && g.b2.is_multiple_of(k))
                    .then(|| (g.b1.clone() / k.clone(), g.b2.clone() / k.clone()))
            })
            .collect();
        Self::from_lattice(&self.params, rows?).ok()
    }

    /// An element of minimal norm, for imaginary quadratic params (`a² + 4b < 0`).
    pub fn shortest_element(&self) -> Result<QuadElem<T>, IdealError> {
        if !self.params.poly_discriminant().is_negative() {
            return Err(IdealError::UnsupportedOrder("norm form is not positive definite".into()));
        }
        // Lagrange reduction with respect to N(x); B(x, y) = Tr(x·conj(y)) = 2<x, y>.
        let [mut u, mut v] = self.basis();
        if v.norm() < u.norm() {
            std::mem::swap(&mut u, &mut v);
        }
        loop {
            let nu = u.norm();
            let two = T::from_int(2);
            let t = (&u * &v.conj()).trace();
            // nearest integer to t / (2 N(u))
            let mu = (t + nu.clone()).div_floor(&(two * nu.clone()));
            if !mu.is_zero() {
                v = &v - &u.scale(&mu);
            }
            if v.norm() >= nu {
                return Ok(u);
            }
            std::mem::swap(&mut u, &mut v);
        }
    }
}

impl<T: IntScalar> fmt::Display for QuadIdeal<T> {
    /// `(n, c + m*sqrt(d))`, or `(n, c + m*w)` when `a ≠ 0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.params.is_sqrt_form() {
            write!(f, "({}, {} + {}*sqrt({}))", self.n, self.c, self.m, self.params.b)
        } else {
            write!(f, "({}, {} + {}*w)", self.n, self.c, self.m)
        }
    }
}

fn check_residue<T: IntScalar>(d: &T) -> Result<T, IdealError> {
    let r = d.mod_floor(&T::from_int(4));
    let dd = to_big(d);
    if dd.is_zero() || !arith::squarefree(&dd).unwrap_or(false) {
        return Err(IdealError::BadParameter(format!("{d} is not squarefree")));
    }
    Ok(r)
}

/// The ideal above 2 whose square is `⟨2⟩`: `⟨√d, 2⟩` for `d ≡ 2` and `⟨1 + √d, 2⟩` for `d ≡ 3 (mod 4)`.
pub fn sqrt_2<T: IntScalar>(d: &T) -> Result<QuadIdeal<T>, IdealError> {
    let r = check_residue(d)?;
    let params = QuadParams::sqrt(d.clone());
    let b1 = if r == T::from_int(2) {
        T::zero()
    } else if r == T::from_int(3) {
        T::one()
    } else {
        return Err(IdealError::BadParameter(format!("{d} is not 2 or 3 mod 4")));
    };
    let gens = [QuadElem::new(b1, T::one(), params.clone()), QuadElem::from_base(T::from_int(2), params.clone())];
    QuadIdeal::from_generators(&params, &gens)
}

/// Splitting of `⟨p⟩` in `Z[α]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimeDecomposition<T> {
    Inert(QuadIdeal<T>),
    Split(QuadIdeal<T>, QuadIdeal<T>),
    Ramified(QuadIdeal<T>),
}

impl<T: IntScalar> PrimeDecomposition<T> {
    /// Distinct primes above `p`.
    pub fn primes(&self) -> Vec<QuadIdeal<T>> {
        match self {
            Self::Inert(p) | Self::Ramified(p) => vec![p.clone()],
            Self::Split(p, q) => vec![p.clone(), q.clone()],
        }
    }
}

fn pow_mod<T: IntScalar>(base: &T, exp: &T, m: &T) -> T {
    from_big(&arith::pow_mod(&to_big(base), &to_big(exp), &to_big(m)))
}

/// Square root of a quadratic residue modulo an odd prime (Tonelli–Shanks).
fn sqrt_mod<T: IntScalar>(a: &T, p: &T) -> T {
    let (one, two) = (T::one(), T::from_int(2));
    let a = a.mod_floor(p);
    if a.is_zero() {
        return a;
    }
    let mut q = p.clone() - one.clone();
    let mut s = 0u32;
    while q.is_even() {
        q = q / two.clone();
        s += 1;
    }
    let mut z = two.clone();
    while pow_mod(&z, &((p.clone() - one.clone()) / two.clone()), p) != p.clone() - one.clone() {
        z = z + one.clone();
    }
    let mut m = s;
    let mut c = pow_mod(&z, &q, p);
    let mut t = pow_mod(&a, &q, p);
    let mut r = pow_mod(&a, &((q + one.clone()) / two), p);
    while !t.is_one() {
        let mut i = 0u32;
        let mut t2 = t.clone();
        while !t2.is_one() {
            t2 = (t2.clone() * t2).mod_floor(p);
            i += 1;
        }
        let mut b = c.clone();
        for _ in 0..(m - i - 1) {
            b = (b.clone() * b).mod_floor(p);
        }
        m = i;
        c = (b.clone() * b.clone()).mod_floor(p);
        t = (t * c.clone()).mod_floor(p);
        r = (r * b).mod_floor(p);
    }
    r
}

/// Roots of `X² - aX - b` modulo the prime `p`, ascending.
fn roots_mod_p<T: IntScalar>(params: &QuadParams<T>, p: &T) -> Vec<T> {
    let f = |x: &T| (x.clone() * x.clone() - params.a.clone() * x.clone() - params.b.clone()).mod_floor(p);
    if *p == T::from_int(2) {
        return [T::zero(), T::one()].into_iter().filter(|r| f(r).is_zero()).collect();
    }
    let disc = params.poly_discriminant().mod_floor(p);
    let half = pow_mod(&T::from_int(2), &(p.clone() - T::from_int(2)), p);
    if disc.is_zero() {
        return vec![(params.a.clone() * half).mod_floor(p)];
    }
    if pow_mod(&disc, &((p.clone() - T::one()) / T::from_int(2)), p) != T::one() {
        return vec![];
    }
    let s = sqrt_mod(&disc, p);
    let mut roots: Vec<T> = [params.a.clone() + s.clone(), params.a.clone() - s]
        .into_iter()
        .map(|x| (x * half.clone()).mod_floor(p))
        .collect();
    roots.sort();
    debug_assert!(roots.iter().all(|r| f(r).is_zero()));
    roots
}

/// Factor `⟨p⟩` by factoring `X² - aX - b` modulo `p`.
///
/// Valid at every prime because `Z[α]` is generated by `α` (index 1 in itself);
/// whether `Z[α]` is the maximal order is the caller's concern.
pub fn kummer_dedekind<T: IntScalar>(p: &T, params: &QuadParams<T>) -> Result<PrimeDecomposition<T>, IdealError> {
    if !arith::is_prime(&to_big(p)) {
        return Err(IdealError::NotPrime(p.to_string()));
    }
    let above = |r: &T| {
        let gens = [
            QuadElem::from_base(p.clone(), params.clone()),
            QuadElem::new(-r.clone(), T::one(), params.clone()),
        ];
        QuadIdeal::from_generators(params, &gens)
    };
    let roots = roots_mod_p(params, p);
    Ok(match roots.as_slice() {
        [] => PrimeDecomposition::Inert(QuadIdeal::of_integer(params, p)?),
        [r] => PrimeDecomposition::Ramified(above(r)?),
        [r, s] => PrimeDecomposition::Split(above(r)?, above(s)?),
        _ => unreachable!("a quadratic has at most two roots mod p"),
    })
}

/// A prime ideal has prime norm, or is an inert `⟨p⟩` of norm `p²`.
pub fn is_prime_ideal<T: IntScalar>(ideal: &QuadIdeal<T>) -> bool {
    let norm = to_big(ideal.abs_norm());
    if norm.is_one() {
        return false;
    }
    if arith::is_prime(&norm) {
        return true;
    }
    let Some(p) = arith::integer_sqrt(&norm) else {
        return false;
    };
    if !arith::is_prime(&p) {
        return false;
    }
    let p: T = from_big(&p);
    matches!(kummer_dedekind(&p, ideal.params()), Ok(PrimeDecomposition::Inert(q)) if &q == ideal)
}

/// A generator of `I` in `Z[√d]`, `d < 0`, or `None` when `I` is not principal.
///
/// Exhaustive over `|b2| ≤ √(N/|d|)`; among associated generators the one with
/// `b1 > 0` (or `b1 = 0, b2 > 0`), then `b2 ≥ 0`, is returned.
pub fn is_principal<T: IntScalar>(ideal: &QuadIdeal<T>) -> Result<Option<QuadElem<T>>, IdealError> {
    let params = ideal.params();
    if !params.a.is_zero() || !params.b.is_negative() {
        return Err(IdealError::UnsupportedOrder(format!(
            "principality search needs Z[sqrt(d)] with d < 0, got a = {}, b = {}",
            params.a, params.b
        )));
    }
    let norm = ideal.abs_norm().clone();
    let abs_d = -params.b.clone();
    let bound = isqrt(&(norm.clone() / abs_d.clone()));
    let mut found: Vec<QuadElem<T>> = Vec::new();
    let mut y = T::zero();
    while y <= bound {
        let rest = norm.clone() - abs_d.clone() * y.clone() * y.clone();
        let x = isqrt(&rest);
        if x.clone() * x.clone() == rest {
            for sx in [x.clone(), -x.clone()] {
                for sy in [y.clone(), -y.clone()] {
                    let g = QuadElem::new(sx.clone(), sy, params.clone());
                    if !found.contains(&g) && &QuadIdeal::principal(&g)? == ideal {
                        found.push(g);
                    }
                }
            }
        }
        y = y + T::one();
    }
    Ok(found.into_iter().min_by_key(|g| {
        let preferred = g.b1.is_positive() || (g.b1.is_zero() && g.b2.is_positive());
        (!preferred, g.b2.is_negative(), g.b1.abs(), g.b2.abs())
    }))
}

/// Prime ideal factorization with exponents, ordered by `(norm, n, c)`.
pub fn factor_ideal<T: IntScalar>(ideal: &QuadIdeal<T>) -> Result<Vec<(QuadIdeal<T>, u32)>, IdealError> {
    let norm = to_big(ideal.abs_norm());
    if norm.is_one() {
        return Ok(vec![]);
    }
    let mut out = Vec::new();
    for (p, e) in arith::factor(&norm).expect("norm is at least 2") {
        let p: T = from_big(&p);
        for prime in kummer_dedekind(&p, ideal.params())?.primes() {
            let mut k = 0;
            let mut power = prime.clone();
            while k < e && ideal.is_contained_in(&power) {
                k += 1;
                power = power.mul(&prime)?;
            }
            if k > 0 {
                out.push((prime, k));
            }
        }
    }
    out.sort_by(|(a, _), (b, _)| (&a.norm, &a.n, &a.c).cmp(&(&b.norm, &b.n, &b.c)));
    let product = out
        .iter()
        .try_fold(QuadIdeal::unit(ideal.params()), |acc, (p, k)| acc.mul(&p.pow(*k)))?;
    if &product != ideal {
        return Err(IdealError::NotDedekind(ideal.to_string()));
    }
    Ok(out)
}

// SPDX-License-Identifier: Apache-2.0

//! Class groups of `Z[√d]` for squarefree `d < 0`, `d ≡ 2, 3 (mod 4)`.
//!
//! Generators come either from a verified norm-estimate set `M` (every prime
//! dividing `∏ M`) or from the Minkowski bound. The group itself is built by
//! closing the generator classes under multiplication, with
//! `cls(I) = cls(J) ⇔ I·conj(J)` principal as the equality test.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith;
use crate::ideal::{is_principal, kummer_dedekind, IdealError};
use crate::{Ideal, Int, Rat, ZParams};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassGroupError {
    #[error("{0} is not squarefree")]
    NotSquarefree(Int),
    #[error("unsupported order: {0}")]
    UnsupportedOrder(String),
    #[error("M must contain only nonzero integers below 2^40")]
    BadMSet,
    #[error("M-set certificate is not verified")]
    Unverified,
    #[error("internal consistency violation: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Ideal(#[from] IdealError),
}

fn check_squarefree(d: &Int) -> Result<(), ClassGroupError> {
    match arith::squarefree(d) {
        Ok(true) if !d.is_one() => Ok(()),
        _ => Err(ClassGroupError::NotSquarefree(d.clone())),
    }
}

/// Field discriminant of `Q(√d)`.
pub fn discriminant(d: &Int) -> Result<Int, ClassGroupError> {
    check_squarefree(d)?;
    Ok(if d.mod_floor(&Int::from(4)) == Int::one() { d.clone() } else { d * 4 })
}

/// Checks `d < 0`, squarefree, `d ≡ 2, 3 (mod 4)`.
pub fn check_supported(d: &Int) -> Result<(), ClassGroupError> {
    check_squarefree(d)?;
    if !d.is_negative() {
        return Err(ClassGroupError::UnsupportedOrder(format!("d = {d} is not negative")));
    }
    let r = d.mod_floor(&Int::from(4));
    if r != Int::from(2) && r != Int::from(3) {
        return Err(ClassGroupError::UnsupportedOrder(format!("d = {d} is not 2 or 3 mod 4")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MSetStatus {
    /// Every cell at this resolution is covered by some `r ∈ M`.
    Verified { resolution: u32 },
    /// `γ = x + y√d` with `|N(rγ - q)| ≥ 1` for all `r ∈ M`, `q ∈ Z[√d]`.
    Refuted { x: Rat, y: Rat },
    Inconclusive { max_resolution: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MSetCertificate {
    pub d: Int,
    pub m: Vec<Int>,
    pub status: MSetStatus,
}

impl MSetCertificate {
    pub fn is_verified(&self) -> bool {
        matches!(self.status, MSetStatus::Verified { .. })
    }
}

pub const MSET_MAX_RESOLUTION: u32 = 256;

/// Distance from `k / (2L)` to the nearest integer, in units of `1 / (2L)`.
fn dist_num(k: i128, two_l: i128) -> i128 {
    let r = k.rem_euclid(two_l);
    r.min(two_l - r)
}

/// Supremum of the distance to `Z` over `[a, b] / (2L)`, same units.
fn sup_dist(a: i128, b: i128, l: i128) -> i128 {
    let mut odd = a.div_euclid(l) + i128::from(a.rem_euclid(l) != 0);
    if odd.rem_euclid(2) == 0 {
        odd += 1;
    }
    if odd * l <= b {
        l
    } else {
        dist_num(a, 2 * l).max(dist_num(b, 2 * l))
    }
}

/// Decide whether every `γ ∈ Q(√d)` admits `q ∈ Z[√d]`, `r ∈ M` with `|N(rγ - q)| < 1`.
///
/// `γ` is reduced to `[0, 1]²`, which is covered by exact rational cells. On a
/// cell the minimum over `q` of `N(rγ - q)` is `dist(rx, Z)² + |d|·dist(ry, Z)²`,
/// bounded above by the per-axis suprema. Uncovered cells are split until the
/// resolution reaches [`MSET_MAX_RESOLUTION`]; corners and centres of uncovered
/// cells are tested exactly for a refuting point along the way.
pub fn verify_m_set(d: &Int, m: &[Int]) -> Result<MSetCertificate, ClassGroupError> {
    check_supported(d)?;
    let rs: Vec<i128> = m
        .iter()
        .map(|r| r.abs().to_i128().filter(|&r| r != 0 && r < 1 << 40))
        .collect::<Option<_>>()
        .ok_or(ClassGroupError::BadMSet)?;
    let abs_d = (-d).to_i128().filter(|&v| v < 1 << 40).ok_or_else(|| {
        ClassGroupError::UnsupportedOrder(format!("|d| = {} too large for the cell search", -d))
    })?;
    let cert = |status| MSetCertificate { d: d.clone(), m: m.to_vec(), status };

    let point_fails = |px: i128, py: i128, two_l: i128| {
        rs.iter().all(|&r| {
            let (u, v) = (dist_num(r * px, two_l), dist_num(r * py, two_l));
            u * u + abs_d * v * v >= two_l * two_l
        })
    };
    let cell_covered = |i: i128, j: i128, l: i128| {
        rs.iter().any(|&r| {
            let sx = sup_dist(2 * r * i, 2 * r * (i + 1), l);
            let sy = sup_dist(2 * r * j, 2 * r * (j + 1), l);
            sx * sx + abs_d * sy * sy < 4 * l * l
        })
    };

    let mut pending: Vec<(i128, i128)> = vec![(0, 0)];
    let mut l: i128 = 1;
    loop {
        let two_l = 2 * l;
        let mut failing = Vec::new();
        for &(i, j) in &pending {
            if cell_covered(i, j, l) {
                continue;
            }
            for (px, py) in [(2 * i, 2 * j), (2 * i + 2, 2 * j), (2 * i, 2 * j + 2), (2 * i + 2, 2 * j + 2), (2 * i + 1, 2 * j + 1)] {
                if point_fails(px, py, two_l) {
                    let x = Rat::new(Int::from(px), Int::from(two_l));
                    let y = Rat::new(Int::from(py), Int::from(two_l));
                    return Ok(cert(MSetStatus::Refuted { x, y }));
                }
            }
            failing.push((i, j));
        }
        if failing.is_empty() {
            return Ok(cert(MSetStatus::Verified { resolution: l as u32 }));
        }
        if l >= i128::from(MSET_MAX_RESOLUTION) {
            return Ok(cert(MSetStatus::Inconclusive { max_resolution: MSET_MAX_RESOLUTION }));
        }
        pending = failing
            .into_iter()
            .flat_map(|(i, j)| [(2 * i, 2 * j), (2 * i + 1, 2 * j), (2 * i, 2 * j + 1), (2 * i + 1, 2 * j + 1)])
            .collect();
        l *= 2;
    }
}

fn primes_above(d: &Int, primes: impl IntoIterator<Item = Int>) -> Result<Vec<Ideal>, ClassGroupError> {
    let params = ZParams::sqrt(d.clone());
    let mut out = Vec::new();
    for p in primes {
        out.extend(kummer_dedekind(&p, &params)?.primes());
    }
    Ok(out)
}

/// Prime ideals dividing `⟨∏ M⟩`; their classes generate the class group.
pub fn generator_primes(d: &Int, cert: &MSetCertificate) -> Result<Vec<Ideal>, ClassGroupError> {
    if !cert.is_verified() || &cert.d != d {
        return Err(ClassGroupError::Unverified);
    }
    let product = cert.m.iter().fold(Int::one(), |acc, r| acc * r.abs());
    let primes: Vec<Int> = if product.is_one() {
        vec![]
    } else {
        arith::factor(&product).expect("product exceeds 1").into_iter().map(|(p, _)| p).collect()
    };
    primes_above(d, primes)
}

/// Rational upper bound on `(2/π)·√|Δ|`.
pub fn minkowski_bound(d: &Int) -> Result<Rat, ClassGroupError> {
    let delta = discriminant(d)?.abs();
    let scale = Int::from(1_000_000u32);
    let sqrt_upper = Rat::new((delta * &scale * &scale).sqrt() + 1, scale);
    // π > 3.14159265, so dividing by this underestimate rounds the bound up.
    let pi_lower = Rat::new(Int::from(314_159_265u32), Int::from(100_000_000u32));
    Ok(sqrt_upper * Rat::from_integer(Int::from(2)) / pi_lower)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Method {
    MSet(Vec<Int>),
    Minkowski,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorClass {
    /// Canonical representative of the class.
    pub ideal: Ideal,
    pub order: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassGroupDescriptor {
    pub d: Int,
    pub delta: Int,
    pub h: u64,
    /// Nontrivial generator classes, distinct and sorted.
    pub generators: Vec<GeneratorClass>,
    /// One canonical representative per class, sorted; `⟨1⟩` first.
    pub elements: Vec<Ideal>,
    pub method: Method,
}

fn sort_key(i: &Ideal) -> (Int, Int) {
    let (n, c, m) = i.hnf();
    (n * m, c.clone())
}

pub fn same_class(i: &Ideal, j: &Ideal) -> Result<bool, ClassGroupError> {
    Ok(is_principal(&i.mul(&j.conj())?)?.is_some())
}

/// Canonical class representative: the primitive ideal with least `(norm, c)` in the class.
pub fn canonical_representative(i: &Ideal) -> Result<Ideal, ClassGroupError> {
    let params = i.params().clone();
    let x = i.shortest_element()?;
    let reduced = Ideal::principal(&x.conj())?
        .mul(i)?
        .div_integer(i.abs_norm())
        .ok_or_else(|| ClassGroupError::Inconsistent(format!("{i} does not divide its shortest element")))?;
    let d = params.b.clone();
    let bound = reduced.abs_norm().clone();
    let mut n = Int::one();
    while n <= bound {
        let mut c = Int::zero();
        while c < n {
            if (&c * &c - &d).is_multiple_of(&n) {
                let cand = Ideal::from_hnf(params.clone(), n.clone(), c.clone(), Int::one())?;
                if same_class(&cand, &reduced)? {
                    return Ok(cand);
                }
            }
            c += 1;
        }
        n += 1;
    }
    Err(ClassGroupError::Inconsistent(format!("no primitive representative found for {i}")))
}

/// Class group of `Z[√d]`, generated by primes from the chosen method.
pub fn class_group(d: &Int, method: Method) -> Result<ClassGroupDescriptor, ClassGroupError> {
    check_supported(d)?;
    let primes = match &method {
        Method::MSet(m) => generator_primes(d, &verify_m_set(d, m)?)?,
        Method::Minkowski => {
            let bound = minkowski_bound(d)?.floor().to_integer();
            let mut ps = Vec::new();
            let mut p = Int::from(2);
            while p <= bound {
                if arith::is_prime(&p) {
                    ps.push(p.clone());
                }
                p += 1;
            }
            primes_above(d, ps)?
        }
    };
    let params = ZParams::sqrt(d.clone());
    let unit = Ideal::unit(&params);

    let mut gen_classes: Vec<Ideal> = Vec::new();
    for p in &primes {
        let c = canonical_representative(p)?;
        if c != unit && !gen_classes.contains(&c) {
            gen_classes.push(c);
        }
    }
    gen_classes.sort_by_key(sort_key);

    let mut elements = vec![unit.clone()];
    let mut seen: BTreeSet<(Int, Int)> = BTreeSet::from([sort_key(&unit)]);
    let mut frontier = 0;
    while frontier < elements.len() {
        let e = elements[frontier].clone();
        frontier += 1;
        for g in &gen_classes {
            let c = canonical_representative(&e.mul(g)?)?;
            if seen.insert(sort_key(&c)) {
                elements.push(c);
            }
        }
    }
    elements.sort_by_key(sort_key);

    let mut generators = Vec::new();
    for g in gen_classes {
        let mut order = 1u64;
        let mut acc = g.clone();
        while acc != unit {
            acc = canonical_representative(&acc.mul(&g)?)?;
            order += 1;
        }
        generators.push(GeneratorClass { ideal: g, order });
    }
    Ok(ClassGroupDescriptor {
        d: d.clone(),
        delta: discriminant(d)?,
        h: elements.len() as u64,
        generators,
        elements,
        method,
    })
}

/// Number of roots of unity in `Q(√d)`, `d < 0`.
pub fn roots_of_unity(d: &Int) -> u32 {
    match d.to_i64() {
        Some(-1) => 4,
        Some(-3) => 6,
        _ => 2,
    }
}

/// `h = w/(2Δ) · Σ_{a=1}^{|Δ|-1} (Δ/a)·a`.
pub fn class_number_analytic(d: &Int) -> Result<u64, ClassGroupError> {
    if !d.is_negative() {
        return Err(ClassGroupError::UnsupportedOrder(format!("d = {d} is not negative")));
    }
    let delta = discriminant(d)?;
    let bound = delta.abs().to_u64().ok_or_else(|| ClassGroupError::UnsupportedOrder("|Δ| too large".into()))?;
    let sum: Int = (1..bound)
        .map(|a| {
            let a = Int::from(a);
            Int::from(arith::kronecker(&delta, &a)) * a
        })
        .sum();
    let h = Rat::new(Int::from(roots_of_unity(d)) * sum, Int::from(2) * &delta);
    if !h.is_integer() || !h.is_positive() {
        return Err(ClassGroupError::Inconsistent(format!("analytic class number formula gave {h} for d = {d}")));
    }
    Ok(h.to_integer().to_u64().expect("class number fits in u64"))
}

/// Number of reduced primitive positive definite forms of discriminant `Δ`.
pub fn class_number_forms_oracle(d: &Int) -> Result<u64, ClassGroupError> {
    if !d.is_negative() {
        return Err(ClassGroupError::UnsupportedOrder(format!("d = {d} is not negative")));
    }
    let delta = discriminant(d)?.to_i64().ok_or_else(|| ClassGroupError::UnsupportedOrder("|Δ| too large".into()))?;
    let mut count = 0;
    let mut a = 1i64;
    while 3 * a * a <= -delta {
        for b in -a..=a {
            let num = b * b - delta;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || a.gcd(&b).gcd(&c) != 1 {
                continue;
            }
            if b < 0 && (-b == a || a == c) {
                continue;
            }
            count += 1;
        }
        a += 1;
    }
    Ok(count)
}

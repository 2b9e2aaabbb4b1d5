// SPDX-License-Identifier: Apache-2.0

//! Integral points on `y² = x³ + d` for squarefree `d < 0`, `d ≡ 2, 3 (mod 4)`
//! with `3 ∤ h(Q(√d))`.
//!
//! Under these hypotheses every solution has `y = ±m(3d + m²)` and
//! `d = ±1 - 3m²`, so [`solve`] is closed form. [`descent_trace`] replays the
//! ideal-theoretic argument on a concrete point, stage by stage.

use std::fmt;
use std::sync::OnceLock;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith;
use crate::class_group::{class_group, ClassGroupError, Method};
use crate::ideal::{factor_ideal, is_principal, IdealError};
use crate::quad::units;
use crate::{Ideal, Int, ZParams, ZQuad};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MordellError {
    #[error("hypotheses not met: {}", .0.join(", "))]
    HypothesesNotMet(Vec<&'static str>),
    #[error("({x}, {y}) is not a point on y^2 = x^3 + {d}")]
    NotASolution { d: Int, x: Int, y: Int },
    #[error("modulus must be at least 2")]
    BadModulus,
    #[error("internal consistency violation: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    ClassGroup(#[from] ClassGroupError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MordellInstance {
    pub d: Int,
    pub negative: bool,
    pub squarefree: bool,
    pub residue_23_mod4: bool,
    /// `gcd(3, h) = 1`; false whenever `h` could not be computed.
    pub class_gcd3: bool,
    /// Class number of `Z[√d]`, computed only when the other flags hold.
    pub h: Option<u64>,
}

impl MordellInstance {
    pub fn qualifies(&self) -> bool {
        self.negative && self.squarefree && self.residue_23_mod4 && self.class_gcd3
    }

    pub fn failed_flags(&self) -> Vec<&'static str> {
        [
            (self.negative, "negative"),
            (self.squarefree, "squarefree"),
            (self.residue_23_mod4, "residue_23_mod4"),
            (self.class_gcd3, "class_gcd3"),
        ]
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, name)| name)
        .collect()
    }
}

pub fn check_hypotheses(d: &Int) -> Result<MordellInstance, MordellError> {
    let negative = d.is_negative();
    let squarefree = !d.is_zero() && arith::squarefree(d).unwrap_or(false);
    let residue_23_mod4 = matches!(d.mod_floor(&Int::from(4)).to_u8(), Some(2 | 3));
    let h = if negative && squarefree && residue_23_mod4 {
        Some(class_group(d, Method::Minkowski)?.h)
    } else {
        None
    };
    Ok(MordellInstance {
        d: d.clone(),
        negative,
        squarefree,
        residue_23_mod4,
        class_gcd3: h.is_some_and(|h| h % 3 != 0),
        h,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Solution {
    pub m: Int,
    pub x: Int,
    pub y: Int,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NoSolutionReason {
    /// Neither `(1 - d)/3` nor `(-1 - d)/3` is a perfect square.
    NoIntegerM,
    /// Both `3t² + d - 1` and `3t² + d + 1` have no root modulo `n`.
    ModularObstruction(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MordellResult {
    Solutions(Vec<Solution>),
    NoSolutions(NoSolutionReason),
}

impl MordellResult {
    pub fn points(&self) -> Vec<(Int, Int)> {
        match self {
            Self::Solutions(s) => s.iter().map(|s| (s.x.clone(), s.y.clone())).collect(),
            Self::NoSolutions(_) => vec![],
        }
    }
}

pub fn verify_solution(d: &Int, x: &Int, y: &Int) -> bool {
    y * y == x * x * x + d
}

/// Largest modulus tried when looking for a modular obstruction.
pub const OBSTRUCTION_SEARCH_LIMIT: u64 = 1000;

/// All integral points, by the closed form valid under the hypotheses.
pub fn solve(inst: &MordellInstance) -> Result<MordellResult, MordellError> {
    if !inst.qualifies() {
        return Err(MordellError::HypothesesNotMet(inst.failed_flags()));
    }
    let d = &inst.d;
    let three = Int::from(3);
    let mut out: Vec<Solution> = Vec::new();
    for sign in [1, -1] {
        let num = Int::from(sign) - d;
        if !num.is_multiple_of(&three) {
            continue;
        }
        let Some(m) = arith::integer_sqrt(&(num / &three)) else {
            continue;
        };
        let x = &m * &m - d;
        let y: Int = &m * (d * 3 + &m * &m);
        for y in [y.clone(), -y] {
            let s = Solution { m: m.clone(), x: x.clone(), y };
            if !verify_solution(d, &s.x, &s.y) {
                return Err(MordellError::Inconsistent(format!("({}, {}) fails the curve equation", s.x, s.y)));
            }
            if !out.iter().any(|o| o.x == s.x && o.y == s.y) {
                out.push(s);
            }
        }
    }
    if out.is_empty() {
        let branches = [(three.clone(), Int::zero(), d - 1), (three, Int::zero(), d + 1)];
        let reason = match common_modulus(&branches, OBSTRUCTION_SEARCH_LIMIT) {
            Some(n) => NoSolutionReason::ModularObstruction(n),
            None => NoSolutionReason::NoIntegerM,
        };
        return Ok(MordellResult::NoSolutions(reason));
    }
    out.sort_by(|a, b| (&a.x, &a.y).cmp(&(&b.x, &b.y)));
    Ok(MordellResult::Solutions(out))
}

const X_ODD_RESIDUES: [u8; 5] = [2, 3, 5, 6, 7];

/// A counterexample `(d, x, y)` mod 8 to "x is odd", or `None` if the exhaustive check passes.
pub fn x_odd_residue_counterexample() -> Option<(u8, u8, u8)> {
    for d in X_ODD_RESIDUES {
        for x in (0..8u32).step_by(2) {
            for y in 0..8u32 {
                if (y * y + 64 - u32::from(d)) % 8 == (x * x * x) % 8 {
                    return Some((d, x as u8, y as u8));
                }
            }
        }
    }
    None
}

/// `d mod 8 ∈ {2, 3, 5, 6, 7}`, which forces odd `x` in every solution.
pub fn x_odd_certificate(d: &Int) -> bool {
    static SELF_TEST: OnceLock<bool> = OnceLock::new();
    let residue = d.mod_floor(&Int::from(8)).to_u8().expect("residue below 8");
    X_ODD_RESIDUES.contains(&residue) && *SELF_TEST.get_or_init(|| x_odd_residue_counterexample().is_none())
}

fn elem(x: Int, y: Int, d: &Int) -> ZQuad {
    ZQuad::new(x, y, ZParams::sqrt(d.clone()))
}

fn cube_root_of(d: &Int, y: &Int) -> Result<Int, MordellError> {
    let v = y * y - d;
    let x = v.cbrt();
    if &x * &x * &x == v {
        Ok(x)
    } else {
        Err(MordellError::NotASolution { d: d.clone(), x, y: y.clone() })
    }
}

/// `⟨y + √d⟩ + ⟨y - √d⟩ = ⟨1⟩` for a point `(x, y)` on the curve.
pub fn gcd_certificate(d: &Int, y: &Int) -> Result<bool, MordellError> {
    cube_root_of(d, y)?;
    let plus = Ideal::principal(&elem(y.clone(), Int::one(), d))?;
    let minus = Ideal::principal(&elem(y.clone(), -Int::one(), d))?;
    Ok(plus.sum(&minus)?.is_unit())
}

fn reduce_coeffs(c: &[&Int], n: u64) -> Vec<u128> {
    let nn = Int::from(n);
    c.iter().map(|v| v.mod_floor(&nn).to_u128().expect("reduced below n")).collect()
}

/// `c2·t² + c1·t + c0 ≢ 0 (mod n)` for every `t`.
pub fn quadratic_insoluble_mod(c2: &Int, c1: &Int, c0: &Int, n: u64) -> Result<bool, MordellError> {
    if n < 2 {
        return Err(MordellError::BadModulus);
    }
    let c = reduce_coeffs(&[c2, c1, c0], n);
    let n = u128::from(n);
    Ok((0..n).all(|t| !(c[0] * t % n * t + c[1] * t + c[2]).is_multiple_of(n)))
}

/// Least `n ≤ n_max` with no root of `c2·t² + c1·t + c0` modulo `n`.
pub fn search_modulus(c2: &Int, c1: &Int, c0: &Int, n_max: u64) -> Option<u64> {
    (2..=n_max).find(|&n| quadratic_insoluble_mod(c2, c1, c0, n).expect("n >= 2"))
}

/// Least `n ≤ n_max` at which every quadratic in `quads` is insoluble.
pub fn common_modulus(quads: &[(Int, Int, Int)], n_max: u64) -> Option<u64> {
    (2..=n_max).find(|&n| quads.iter().all(|(a, b, c)| quadratic_insoluble_mod(a, b, c, n).expect("n >= 2")))
}

/// Integral points with `|x| ≤ x_bound`, sorted by `x` then `y`.
pub fn brute_force_points(d: &Int, x_bound: u64) -> Vec<(Int, Int)> {
    let bound = Int::from(x_bound);
    let mut x = -bound.clone();
    let mut out = Vec::new();
    while x <= bound {
        let v = &x * &x * &x + d;
        if let Some(y) = arith::integer_sqrt(&v) {
            if !y.is_zero() {
                out.push((x.clone(), -y.clone()));
            }
            out.push((x.clone(), y));
        }
        x += 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescentStage {
    ProductIsCube,
    Coprime,
    CubeRootIdeal,
    Principal,
    UnitAdjustment,
    ComponentEquations,
}

impl fmt::Display for DescentStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ProductIsCube => "product-is-cube",
            Self::Coprime => "coprime",
            Self::CubeRootIdeal => "cube-root-ideal",
            Self::Principal => "principal",
            Self::UnitAdjustment => "unit-adjustment",
            Self::ComponentEquations => "component-equations",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("descent failed at stage {stage}: {message}")]
pub struct DescentError {
    pub stage: DescentStage,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescentTrace {
    pub d: Int,
    pub x: Int,
    pub y: Int,
    /// Prime factorization of `⟨y + √d⟩`.
    pub factorization: Vec<(Ideal, u32)>,
    /// `L₁` with `L₁³ = ⟨y + √d⟩`.
    pub cube_root: Ideal,
    /// Generator of `L₁` returned by the principality search.
    pub generator: ZQuad,
    /// Unit `u` with `(u·generator)³ = y + √d`.
    pub unit: ZQuad,
    /// `z = a + b√d = u·generator`, so `z³ = y + √d`.
    pub z: ZQuad,
    /// `a(a² + 3b²d) = y`.
    pub first_component: Int,
    /// `b(3a² + b²d) = 1`.
    pub second_component: Int,
    /// `b = ±1`, hence `d = b - 3a²`.
    pub b: i8,
    /// `m = |a|`.
    pub m: Int,
}

fn stage_err(stage: DescentStage, message: impl Into<String>) -> DescentError {
    DescentError { stage, message: message.into() }
}

/// Replay the descent on a point, failing with the first stage that does not hold.
///
/// At `y = 0` the ideal `⟨√d⟩` is a unit only for `d = -1`; the trace then runs
/// with `L₁ = ⟨1⟩` and the unit stage supplies the cube root of `√-1`.
pub fn descent_trace(d: &Int, x: &Int, y: &Int) -> Result<DescentTrace, DescentError> {
    use DescentStage::*;
    let ideal_err = |stage| move |e: IdealError| stage_err(stage, e.to_string());
    if !verify_solution(d, x, y) {
        return Err(stage_err(ProductIsCube, format!("({x}, {y}) is not on y^2 = x^3 + {d}")));
    }
    let params = ZParams::sqrt(d.clone());
    let target = elem(y.clone(), Int::one(), d);
    let plus = Ideal::principal(&target).map_err(ideal_err(ProductIsCube))?;
    let minus = Ideal::principal(&target.conj()).map_err(ideal_err(ProductIsCube))?;
    let product = plus.mul(&minus).map_err(ideal_err(ProductIsCube))?;
    let x_ideal = if x.is_zero() {
        return Err(stage_err(ProductIsCube, "x = 0 gives the zero ideal"));
    } else {
        Ideal::of_integer(&params, x).map_err(ideal_err(ProductIsCube))?
    };
    if product != x_ideal.pow(3) {
        return Err(stage_err(ProductIsCube, "⟨y+√d⟩⟨y-√d⟩ ≠ ⟨x⟩³"));
    }

    if !plus.sum(&minus).map_err(ideal_err(Coprime))?.is_unit() {
        return Err(stage_err(Coprime, "⟨y+√d⟩ + ⟨y-√d⟩ ≠ ⟨1⟩"));
    }

    let factorization = factor_ideal(&plus).map_err(ideal_err(CubeRootIdeal))?;
    if let Some((p, e)) = factorization.iter().find(|(_, e)| e % 3 != 0) {
        return Err(stage_err(CubeRootIdeal, format!("{p} has exponent {e}")));
    }
    let cube_root = factorization
        .iter()
        .try_fold(Ideal::unit(&params), |acc, (p, e)| acc.mul(&p.pow(e / 3)))
        .map_err(ideal_err(CubeRootIdeal))?;
    if cube_root.pow(3) != plus {
        return Err(stage_err(CubeRootIdeal, "L₁³ ≠ ⟨y+√d⟩"));
    }

    let generator = is_principal(&cube_root)
        .map_err(ideal_err(Principal))?
        .ok_or_else(|| stage_err(Principal, format!("{cube_root} is not principal")))?;

    let unit_list = units(d).map_err(|e| stage_err(UnitAdjustment, e.to_string()))?;
    let (unit, z) = unit_list
        .into_iter()
        .map(|u| {
            let z = &u * &generator;
            (u, z)
        })
        .find(|(_, z)| z.cube() == target)
        .ok_or_else(|| stage_err(UnitAdjustment, "no unit multiple of the generator cubes to y+√d"))?;

    let (a, b) = (&z.b1, &z.b2);
    let first_component = a * (a * a + Int::from(3) * b * b * d);
    let second_component = b * (Int::from(3) * a * a + b * b * d);
    if &first_component != y || !second_component.is_one() {
        return Err(stage_err(ComponentEquations, format!("components ({first_component}, {second_component}) ≠ ({y}, 1)")));
    }
    let b_sign = match b.to_i8() {
        Some(s @ (1 | -1)) => s,
        _ => return Err(stage_err(ComponentEquations, format!("b = {b} is not ±1"))),
    };
    if d != &(Int::from(b_sign) - Int::from(3) * a * a) {
        return Err(stage_err(ComponentEquations, "d ≠ b - 3a²"));
    }
    Ok(DescentTrace {
        d: d.clone(),
        x: x.clone(),
        y: y.clone(),
        factorization,
        cube_root,
        generator,
        unit,
        m: a.abs(),
        z,
        first_component,
        second_component,
        b: b_sign,
    })
}

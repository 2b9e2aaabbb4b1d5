// SPDX-License-Identifier: Apache-2.0

//! Quadratic extensions `R[α]` with `α² = a·α + b`.
//!
//! One element type covers both `Z[√d]` (params `(0, d)`) and
//! `Z[½(1 + √d)]` (params `(1, (d - 1)/4)`). Moving between the `√d`
//! presentation over `Q` and the `(1, α)` basis of a ring-of-integers model
//! is always an explicit call on [`RingOfIntegersModel`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arith::{self, integer_sqrt};
use crate::{Int, QQuad, Rat, Scalar, ZParams, ZQuad};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuadError {
    #[error("operands live in different quadratic rings")]
    ParamsMismatch,
    #[error("unsupported order: {0}")]
    UnsupportedOrder(String),
    #[error("{0} is not a squarefree integer different from 0 and 1")]
    BadDiscriminantParameter(Int),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// Defining data `α² = a·α + b` of a quadratic ring over the scalar type `T`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadParams<T> {
    pub a: T,
    pub b: T,
}

impl<T: Scalar> QuadParams<T> {
    pub fn new(a: T, b: T) -> Self {
        Self { a, b }
    }

    /// Params of `R[√d]`.
    pub fn sqrt(d: T) -> Self {
        Self { a: T::zero(), b: d }
    }

    /// Discriminant `a² + 4b` of the defining polynomial `X² - aX - b`.
    pub fn poly_discriminant(&self) -> T {
        self.a.clone() * self.a.clone() + T::from_int(4) * self.b.clone()
    }

    pub fn is_sqrt_form(&self) -> bool {
        self.a.is_zero()
    }
}

impl QuadParams<Int> {
    /// `true` when `X² - aX - b` has no integer (equivalently rational) root.
    pub fn is_number_ring(&self) -> bool {
        integer_sqrt(&self.poly_discriminant()).is_none()
    }

    pub fn to_rational(&self) -> QuadParams<Rat> {
        QuadParams::new(Rat::from(self.a.clone()), Rat::from(self.b.clone()))
    }
}

impl QuadParams<Rat> {
    pub fn is_number_field(&self) -> bool {
        !arith::is_square(&self.poly_discriminant())
    }
}

/// The element `b1 + b2·α`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadElem<T> {
    pub b1: T,
    pub b2: T,
    params: QuadParams<T>,
}

impl<T: Scalar> QuadElem<T> {
    pub fn new(b1: T, b2: T, params: QuadParams<T>) -> Self {
        Self { b1, b2, params }
    }

    pub fn from_base(c: T, params: QuadParams<T>) -> Self {
        Self::new(c, T::zero(), params)
    }

    pub fn zero(params: QuadParams<T>) -> Self {
        Self::from_base(T::zero(), params)
    }

    pub fn one(params: QuadParams<T>) -> Self {
        Self::from_base(T::one(), params)
    }

    /// The generator `α` itself.
    pub fn alpha(params: QuadParams<T>) -> Self {
        Self::new(T::zero(), T::one(), params)
    }

    pub fn params(&self) -> &QuadParams<T> {
        &self.params
    }

    pub fn is_zero(&self) -> bool {
        self.b1.is_zero() && self.b2.is_zero()
    }

    fn check(&self, other: &Self) -> Result<(), QuadError> {
        if self.params == other.params {
            Ok(())
        } else {
            Err(QuadError::ParamsMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, QuadError> {
        self.check(other)?;
        Ok(Self::new(
            self.b1.clone() + other.b1.clone(),
            self.b2.clone() + other.b2.clone(),
            self.params.clone(),
        ))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, QuadError> {
        self.check(other)?;
        Ok(Self::new(
            self.b1.clone() - other.b1.clone(),
            self.b2.clone() - other.b2.clone(),
            self.params.clone(),
        ))
    }

    /// `(x1 + x2α)(y1 + y2α) = x1y1 + x2y2·b + (x2y1 + x1y2 + x2y2·a)α`.
    pub fn try_mul(&self, other: &Self) -> Result<Self, QuadError> {
        self.check(other)?;
        let QuadParams { a, b } = &self.params;
        let x2y2 = self.b2.clone() * other.b2.clone();
        let b1 = self.b1.clone() * other.b1.clone() + x2y2.clone() * b.clone();
        let b2 = self.b2.clone() * other.b1.clone()
            + self.b1.clone() * other.b2.clone()
            + x2y2 * a.clone();
        Ok(Self::new(b1, b2, self.params.clone()))
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::new(self.b1.clone() * c.clone(), self.b2.clone() * c.clone(), self.params.clone())
    }

    /// Image under `α ↦ a - α`.
    pub fn conj(&self) -> Self {
        Self::new(
            self.b1.clone() + self.params.a.clone() * self.b2.clone(),
            -self.b2.clone(),
            self.params.clone(),
        )
    }

    pub fn norm(&self) -> T {
        let QuadParams { a, b } = &self.params;
        self.b1.clone() * self.b1.clone() + a.clone() * self.b1.clone() * self.b2.clone()
            - b.clone() * self.b2.clone() * self.b2.clone()
    }

    pub fn trace(&self) -> T {
        T::from_int(2) * self.b1.clone() + self.params.a.clone() * self.b2.clone()
    }

    pub fn pow(&self, mut exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.params.clone());
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            exp >>= 1;
            if exp > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// `x³`, using `a(a² + 3b²d) + b(3a² + b²d)√d` when the ring is `R[√d]`.
    pub fn cube(&self) -> Self {
        if !self.params.is_sqrt_form() {
            return &(self * self) * self;
        }
        let d = self.params.b.clone();
        let three = T::from_int(3);
        let (x, y) = (self.b1.clone(), self.b2.clone());
        let b1 = x.clone() * (x.clone() * x.clone() + three.clone() * y.clone() * y.clone() * d.clone());
        let b2 = y.clone() * (three * x.clone() * x + y.clone() * y * d);
        Self::new(b1, b2, self.params.clone())
    }
}

impl<T: Scalar> Add for &QuadElem<T> {
    type Output = QuadElem<T>;
    fn add(self, rhs: Self) -> QuadElem<T> {
        self.try_add(rhs).expect("quadratic ring mismatch in addition")
    }
}

impl<T: Scalar> Sub for &QuadElem<T> {
    type Output = QuadElem<T>;
    fn sub(self, rhs: Self) -> QuadElem<T> {
        self.try_sub(rhs).expect("quadratic ring mismatch in subtraction")
    }
}

impl<T: Scalar> Mul for &QuadElem<T> {
    type Output = QuadElem<T>;
    fn mul(self, rhs: Self) -> QuadElem<T> {
        self.try_mul(rhs).expect("quadratic ring mismatch in multiplication")
    }
}

impl<T: Scalar> Neg for &QuadElem<T> {
    type Output = QuadElem<T>;
    fn neg(self) -> QuadElem<T> {
        QuadElem::new(-self.b1.clone(), -self.b2.clone(), self.params.clone())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl<T: Scalar> $tr for QuadElem<T> {
            type Output = QuadElem<T>;
            fn $method(self, rhs: Self) -> QuadElem<T> {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<T: Scalar> Neg for QuadElem<T> {
    type Output = QuadElem<T>;
    fn neg(self) -> QuadElem<T> {
        -&self
    }
}

impl<T: Scalar + Signed> fmt::Display for QuadElem<T> {
    /// `b1 + b2*sqrt(d)` when `a = 0`, otherwise `b1 + b2*w` with `w = α`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.b2.is_negative() { '-' } else { '+' };
        write!(f, "{} {} {}*", self.b1, sign, self.b2.abs())?;
        if self.params.is_sqrt_form() {
            write!(f, "sqrt({})", self.params.b)
        } else {
            write!(f, "w")
        }
    }
}

/// Parse the textual element grammar in the given ring.
///
/// ```text
/// elem   := ['-'] term (('+' | '-') term)*
/// term   := number ['*' basis] | basis
/// basis  := 'sqrt(' ['-'] digits ')' | 'w'
/// number := digits ['/' digits]
/// ```
///
/// `sqrt(d)` is only accepted when the params are `(0, d)`.
pub fn parse_elem<T>(s: &str, params: &QuadParams<T>) -> Result<QuadElem<T>, QuadError>
where
    T: Scalar + FromStr,
{
    ElemParser { src: s.as_bytes(), pos: 0, params }.parse()
}

struct ElemParser<'a, T> {
    src: &'a [u8],
    pos: usize,
    params: &'a QuadParams<T>,
}

impl<T: Scalar + FromStr> ElemParser<'_, T> {
    fn err<R>(&self, msg: impl Into<String>) -> Result<R, QuadError> {
        Err(QuadError::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn digits(&mut self) -> Result<&str, QuadError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).unwrap())
    }

    fn number(&mut self) -> Result<T, QuadError> {
        let start = self.pos;
        let num = self.digits()?.to_owned();
        let text = if self.eat(b'/') {
            format!("{num}/{}", self.digits()?)
        } else {
            num
        };
        match text.parse::<T>() {
            Ok(v) => Ok(v),
            Err(_) => Err(QuadError::Parse { pos: start, msg: format!("invalid scalar {text}") }),
        }
    }

    /// Returns true when a basis symbol was consumed.
    fn basis(&mut self) -> Result<bool, QuadError> {
        match self.peek() {
            Some(b'w') => {
                self.pos += 1;
                Ok(true)
            }
            Some(b's') => {
                if !self.src[self.pos..].starts_with(b"sqrt") {
                    return self.err("expected sqrt");
                }
                self.pos += 4;
                if !self.eat(b'(') {
                    return self.err("expected '('");
                }
                let neg = self.eat(b'-');
                let d: T = self.number()?;
                let d = if neg { -d } else { d };
                if !self.eat(b')') {
                    return self.err("expected ')'");
                }
                if !self.params.is_sqrt_form() || d != self.params.b {
                    return self.err(format!("sqrt({d}) does not match the ring"));
                }
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    fn parse(mut self) -> Result<QuadElem<T>, QuadError> {
        let mut acc = QuadElem::zero(self.params.clone());
        let mut negate = self.eat(b'-');
        loop {
            let (coeff, is_alpha) = if self.basis()? {
                (T::one(), true)
            } else {
                let c = self.number()?;
                let alpha = if self.eat(b'*') {
                    if !self.basis()? {
                        return self.err("expected sqrt(d) or w after '*'");
                    }
                    true
                } else {
                    false
                };
                (c, alpha)
            };
            let coeff = if negate { -coeff } else { coeff };
            if is_alpha {
                acc.b2 = acc.b2 + coeff;
            } else {
                acc.b1 = acc.b1 + coeff;
            }
            if self.eat(b'+') {
                negate = false;
            } else if self.eat(b'-') {
                negate = true;
            } else if self.peek().is_none() {
                return Ok(acc);
            } else {
                return self.err("unexpected character");
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// `Z[√d]`, for `d ≡ 2, 3 (mod 4)`.
    Sqrt,
    /// `Z[½(1 + √d)]`, for `d ≡ 1 (mod 4)`.
    Half,
}

/// The ring of integers of `Q(√d)` presented as `Z[α]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingOfIntegersModel {
    pub d: Int,
    pub params: ZParams,
    pub kind: ModelKind,
}

pub fn ring_of_integers_model(d: &Int) -> Result<RingOfIntegersModel, QuadError> {
    if d.is_one() || d.is_zero() || !arith::squarefree(d).unwrap_or(false) {
        return Err(QuadError::BadDiscriminantParameter(d.clone()));
    }
    let r = d.mod_floor(&Int::from(4));
    if r == Int::one() {
        Ok(RingOfIntegersModel {
            d: d.clone(),
            params: ZParams::new(Int::one(), (d - 1) / 4),
            kind: ModelKind::Half,
        })
    } else {
        Ok(RingOfIntegersModel { d: d.clone(), params: ZParams::sqrt(d.clone()), kind: ModelKind::Sqrt })
    }
}

impl RingOfIntegersModel {
    /// Params of `Q(√d)` in the `√d` presentation.
    pub fn field_params(&self) -> QuadParams<Rat> {
        QuadParams::sqrt(Rat::from(self.d.clone()))
    }

    /// Coordinates of a `√d`-presented element in the model basis `(1, α)`.
    pub fn to_model_coords(&self, x: &QQuad) -> Result<(Rat, Rat), QuadError> {
        if x.params() != &self.field_params() {
            return Err(QuadError::ParamsMismatch);
        }
        Ok(match self.kind {
            ModelKind::Sqrt => (x.b1.clone(), x.b2.clone()),
            // √d = 2α - 1
            ModelKind::Half => (&x.b1 - &x.b2, &x.b2 * Rat::from(Int::from(2))),
        })
    }

    /// The model element as a `√d`-presented element of the field.
    pub fn to_field(&self, z: &ZQuad) -> Result<QQuad, QuadError> {
        if z.params() != &self.params {
            return Err(QuadError::ParamsMismatch);
        }
        let (u, v) = (Rat::from(z.b1.clone()), Rat::from(z.b2.clone()));
        Ok(match self.kind {
            ModelKind::Sqrt => QQuad::new(u, v, self.field_params()),
            ModelKind::Half => {
                let half = Rat::new(Int::one(), Int::from(2));
                QQuad::new(&u + &v * &half, v * half, self.field_params())
            }
        })
    }

    /// Membership in the model ring; `None` when `x` is not integral.
    pub fn to_model(&self, x: &QQuad) -> Result<Option<ZQuad>, QuadError> {
        let (u, v) = self.to_model_coords(x)?;
        Ok((u.is_integer() && v.is_integer())
            .then(|| ZQuad::new(u.to_integer(), v.to_integer(), self.params.clone())))
    }
}

/// `x` is integral over `Z` iff its trace and norm are integers.
pub fn is_integral(x: &QQuad, model: &RingOfIntegersModel) -> Result<bool, QuadError> {
    if x.params() != &model.field_params() {
        return Err(QuadError::ParamsMismatch);
    }
    Ok(x.trace().is_integer() && x.norm().is_integer())
}

/// The unit group of `Z[√d]` for squarefree `d ≤ -1`, `d ≡ 2, 3 (mod 4)`.
pub fn units(d: &Int) -> Result<Vec<ZQuad>, QuadError> {
    if !d.is_negative() {
        return Err(QuadError::UnsupportedOrder(format!(
            "unit group of Z[sqrt({d})] is infinite or undefined"
        )));
    }
    let r = d.mod_floor(&Int::from(4));
    if r != Int::from(2) && r != Int::from(3) {
        return Err(QuadError::UnsupportedOrder(format!("Z[sqrt({d})] with d = {r} mod 4")));
    }
    if !arith::squarefree(d).unwrap_or(false) {
        return Err(QuadError::BadDiscriminantParameter(d.clone()));
    }
    let params = ZParams::sqrt(d.clone());
    let mk = |x: i64, y: i64| ZQuad::new(Int::from(x), Int::from(y), params.clone());
    Ok(if d == &Int::from(-1) {
        vec![mk(1, 0), mk(-1, 0), mk(0, 1), mk(0, -1)]
    } else {
        vec![mk(1, 0), mk(-1, 0)]
    })
}

// SPDX-License-Identifier: Apache-2.0

//! Normal forms in a finite free extension `S = R·b_0 ⊕ … ⊕ R·b_{n-1}`.
//!
//! Multiplication in `S` is described by the tensor `t[i][j][k]` with
//! `b_i·b_j = Σ_k t[i][j][k]·b_k`. A ring variable `X` is split into
//! base-ring coordinates `X = Σ_i X.i·b_i`, so every expression in `S[X, Y, …]`
//! normalizes to one polynomial in the `X.i` per basis element. Polynomials
//! are sparse maps keyed by graded-lex ordered monomials, so two expressions
//! are equal iff their normal forms are syntactically equal.
//!
//! Normalization is bottom-up: every product is reduced through the table as
//! soon as it is formed, and powers go through repeated squaring.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::quad::QuadParams;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("times table must be a nonempty dim x dim x dim array")]
    Shape,
    #[error("b_{i} * b_{j} != b_{j} * b_{i}")]
    NotCommutative { i: usize, j: usize },
    #[error("basis element 0 does not act as the identity")]
    NoIdentity,
    #[error("(b_{i} * b_{j}) * b_{l} != b_{i} * (b_{j} * b_{l})")]
    NotAssociative { i: usize, j: usize, l: usize },
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("no value assigned to variable {0}")]
    Unassigned(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// Multiplication tensor of a commutative, associative, unital extension
/// whose basis element 0 is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct TimesTable<T> {
    dim: usize,
    table: Vec<T>,
}

impl<T: Scalar> TimesTable<T> {
    /// Validates symmetry, the identity row and associativity on all basis triples.
    pub fn new(table: Vec<Vec<Vec<T>>>) -> Result<Self, TableError> {
        let dim = table.len();
        if dim == 0 || table.iter().any(|row| row.len() != dim || row.iter().any(|v| v.len() != dim)) {
            return Err(TableError::Shape);
        }
        let tt = Self { dim, table: table.into_iter().flatten().flatten().collect() };
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    if tt.get(i, j, k) != tt.get(j, i, k) {
                        return Err(TableError::NotCommutative { i, j });
                    }
                }
            }
        }
        for j in 0..dim {
            for k in 0..dim {
                let want = if j == k { T::one() } else { T::zero() };
                if *tt.get(0, j, k) != want {
                    return Err(TableError::NoIdentity);
                }
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                for l in 0..dim {
                    let (bi, bj, bl) = (tt.unit(i), tt.unit(j), tt.unit(l));
                    let left = tt.mul_coords(&tt.mul_coords(&bi, &bj), &bl);
                    let right = tt.mul_coords(&bi, &tt.mul_coords(&bj, &bl));
                    if left != right {
                        return Err(TableError::NotAssociative { i, j, l });
                    }
                }
            }
        }
        Ok(tt)
    }

    /// Basis `{1, α}` with `α² = b + aα`.
    pub fn for_quad(params: &QuadParams<T>) -> Self {
        let (z, o) = (T::zero(), T::one());
        Self {
            dim: 2,
            table: vec![
                o.clone(), z.clone(), // 1·1
                z.clone(), o.clone(), // 1·α
                z, o, // α·1
                params.b.clone(), params.a.clone(), // α·α
            ],
        }
    }

    /// The base ring itself as a rank one extension.
    pub fn trivial() -> Self {
        Self { dim: 1, table: vec![T::one()] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &T {
        &self.table[(i * self.dim + j) * self.dim + k]
    }

    fn unit(&self, i: usize) -> Vec<T> {
        (0..self.dim).map(|k| if k == i { T::one() } else { T::zero() }).collect()
    }

    /// Product of two concrete coordinate vectors.
    pub fn mul_coords(&self, x: &[T], y: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                let c = xi.clone() * yj.clone();
                for (k, o) in out.iter_mut().enumerate() {
                    let t = self.get(i, j, k);
                    if !t.is_zero() {
                        *o = o.clone() + c.clone() * t.clone();
                    }
                }
            }
        }
        out
    }
}

/// The base-ring variable `name.coord`: coordinate `coord` of ring variable `name`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PolyVar {
    pub name: Arc<str>,
    pub coord: usize,
}

impl fmt::Display for PolyVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.name, self.coord)
    }
}

/// Power product with variables sorted ascending and positive exponents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(PolyVar, u32)>);

impl Monomial {
    pub fn var(v: PolyVar) -> Self {
        Self(vec![(v, 1)])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn factors(&self) -> &[(PolyVar, u32)] {
        &self.0
    }

    fn mul(&self, other: &Self) -> Self {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Self(out)
    }
}

impl Ord for Monomial {
    /// Graded lexicographic, with smaller variables taking precedence.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            for (a, b) in self.0.iter().zip(&other.0) {
                match a.0.cmp(&b.0) {
                    // `self` has a positive exponent where `other` has zero
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match a.1.cmp(&b.1) {
                        Ordering::Equal => {}
                        ord => return ord,
                    },
                }
            }
            self.0.len().cmp(&other.0.len())
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial over the base ring, no zero coefficients stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T> {
    terms: BTreeMap<Monomial, T>,
}

impl<T: Scalar> Poly<T> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn constant(c: T) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::default(), c);
        p
    }

    pub fn var(v: PolyVar) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::var(v), T::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &T)> {
        self.terms.iter()
    }

    fn add_term(&mut self, m: Monomial, c: T) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn eval(&self, value: &impl Fn(&PolyVar) -> Option<T>) -> Result<T, TableError> {
        let mut acc = T::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in &m.0 {
                let x = value(v).ok_or_else(|| TableError::Unassigned(v.to_string()))?;
                for _ in 0..*e {
                    t = t * x.clone();
                }
            }
            acc = acc + t;
        }
        Ok(acc)
    }
}

impl<T: Scalar> Add for &Poly<T> {
    type Output = Poly<T>;
    fn add(self, rhs: Self) -> Poly<T> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<T: Scalar> Neg for &Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }
}

impl<T: Scalar> Mul for &Poly<T> {
    type Output = Poly<T>;
    fn mul(self, rhs: Self) -> Poly<T> {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl<T: Scalar> fmt::Display for Poly<T> {
    /// Descending graded-lex order, e.g. `3*x.0^2*x.1 + -1*d.0 + 5`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (m, c)) in self.terms.iter().rev().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            if m.0.is_empty() {
                write!(f, "{c}")?;
                continue;
            }
            if !c.is_one() {
                write!(f, "({c})*")?;
            }
            for (k, (v, e)) in m.0.iter().enumerate() {
                if k > 0 {
                    write!(f, "*")?;
                }
                if *e == 1 {
                    write!(f, "{v}")?;
                } else {
                    write!(f, "{v}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Reified expression over the extension.
#[derive(Debug, Clone, PartialEq)]
pub enum RingExpr<T> {
    /// A ring variable ranging over the extension.
    Var(Arc<str>),
    /// A base-ring variable: coordinate `i` of a ring variable.
    Coord(Arc<str>, usize),
    Const(T),
    Basis(usize),
    Add(Box<RingExpr<T>>, Box<RingExpr<T>>),
    Mul(Box<RingExpr<T>>, Box<RingExpr<T>>),
    Neg(Box<RingExpr<T>>),
    Pow(Box<RingExpr<T>>, u32),
    ScalarMul(T, Box<RingExpr<T>>),
}

impl<T: Scalar> RingExpr<T> {
    pub fn var(name: &str) -> Self {
        Self::Var(name.into())
    }

    pub fn coord(name: &str, i: usize) -> Self {
        Self::Coord(name.into(), i)
    }

    pub fn int(v: i64) -> Self {
        Self::Const(T::from_int(v))
    }

    pub fn pow(self, e: u32) -> Self {
        Self::Pow(Box::new(self), e)
    }

    pub fn scaled(self, c: T) -> Self {
        Self::ScalarMul(c, Box::new(self))
    }

    /// Replace every occurrence of ring variable `name` by `value`.
    pub fn substitute(&self, name: &str, value: &RingExpr<T>) -> Self {
        use RingExpr::*;
        let sub = |e: &RingExpr<T>| Box::new(e.substitute(name, value));
        match self {
            Var(v) if &**v == name => value.clone(),
            Var(_) | Coord(..) | Const(_) | Basis(_) => self.clone(),
            Add(l, r) => Add(sub(l), sub(r)),
            Mul(l, r) => Mul(sub(l), sub(r)),
            Neg(e) => Neg(sub(e)),
            Pow(e, n) => Pow(sub(e), *n),
            ScalarMul(c, e) => ScalarMul(c.clone(), sub(e)),
        }
    }
}

impl<T: Scalar> Add for RingExpr<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::Add(Box::new(self), Box::new(rhs))
    }
}

impl<T: Scalar> Sub for RingExpr<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::Add(Box::new(self), Box::new(Self::Neg(Box::new(rhs))))
    }
}

impl<T: Scalar> Mul for RingExpr<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::Mul(Box::new(self), Box::new(rhs))
    }
}

impl<T: Scalar> Neg for RingExpr<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::Neg(Box::new(self))
    }
}

/// One canonical polynomial per basis coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm<T> {
    pub coords: Vec<Poly<T>>,
}

impl<T: Scalar> NormalForm<T> {
    fn zero(dim: usize) -> Self {
        Self { coords: vec![Poly::zero(); dim] }
    }

    fn in_coord(dim: usize, k: usize, p: Poly<T>) -> Self {
        let mut nf = Self::zero(dim);
        nf.coords[k] = p;
        nf
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Poly::is_zero)
    }

    fn add(&self, other: &Self) -> Self {
        Self { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect() }
    }

    fn neg(&self) -> Self {
        Self { coords: self.coords.iter().map(|p| -p).collect() }
    }

    fn scale(&self, c: &T) -> Self {
        Self { coords: self.coords.iter().map(|p| p.scale(c)).collect() }
    }

    /// `Σ_{i,j,k} c_i d_j t[i][j][k] b_k`.
    fn mul(&self, other: &Self, table: &TimesTable<T>) -> Self {
        let mut out = Self::zero(table.dim);
        for (i, ci) in self.coords.iter().enumerate() {
            if ci.is_zero() {
                continue;
            }
            for (j, dj) in other.coords.iter().enumerate() {
                if dj.is_zero() {
                    continue;
                }
                let prod = ci * dj;
                for k in 0..table.dim {
                    let t = table.get(i, j, k);
                    if !t.is_zero() {
                        out.coords[k] = &out.coords[k] + &prod.scale(t);
                    }
                }
            }
        }
        out
    }

    fn pow(&self, mut e: u32, table: &TimesTable<T>) -> Self {
        let mut acc = Self::in_coord(table.dim, 0, Poly::constant(T::one()));
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, table);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, table);
            }
        }
        acc
    }

    /// Evaluate at concrete extension elements given as coordinate vectors.
    pub fn eval(&self, assignment: &HashMap<String, Vec<T>>) -> Result<Vec<T>, TableError> {
        let value = |v: &PolyVar| assignment.get(&*v.name).and_then(|c| c.get(v.coord)).cloned();
        self.coords.iter().map(|p| p.eval(&value)).collect()
    }

    /// An expression whose normal form is `self`: `Σ_k b_k · poly_k(X.i)`.
    pub fn to_expr(&self) -> RingExpr<T> {
        let mut sum: Option<RingExpr<T>> = None;
        for (k, p) in self.coords.iter().enumerate() {
            for (m, c) in p.terms() {
                let mut term = RingExpr::Basis(k).scaled(c.clone());
                for (v, e) in m.factors() {
                    term = term * RingExpr::Coord(v.name.clone(), v.coord).pow(*e);
                }
                sum = Some(match sum {
                    Some(s) => s + term,
                    None => term,
                });
            }
        }
        sum.unwrap_or(RingExpr::Const(T::zero()))
    }
}

impl<T: Scalar> fmt::Display for NormalForm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, p) in self.coords.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

pub fn normalize<T: Scalar>(e: &RingExpr<T>, table: &TimesTable<T>) -> Result<NormalForm<T>, TableError> {
    let dim = table.dim;
    Ok(match e {
        RingExpr::Var(v) => NormalForm {
            coords: (0..dim).map(|i| Poly::var(PolyVar { name: v.clone(), coord: i })).collect(),
        },
        RingExpr::Coord(v, i) => {
            NormalForm::in_coord(dim, 0, Poly::var(PolyVar { name: v.clone(), coord: *i }))
        }
        RingExpr::Const(c) => NormalForm::in_coord(dim, 0, Poly::constant(c.clone())),
        RingExpr::Basis(k) => {
            if *k >= dim {
                return Err(TableError::IndexOutOfRange { index: *k, dim });
            }
            NormalForm::in_coord(dim, *k, Poly::constant(T::one()))
        }
        RingExpr::Add(l, r) => normalize(l, table)?.add(&normalize(r, table)?),
        RingExpr::Mul(l, r) => normalize(l, table)?.mul(&normalize(r, table)?, table),
        RingExpr::Neg(x) => normalize(x, table)?.neg(),
        RingExpr::Pow(x, n) => normalize(x, table)?.pow(*n, table),
        RingExpr::ScalarMul(c, x) => normalize(x, table)?.scale(c),
    })
}

/// Decides `lhs = rhs` for all values of the variables.
pub fn prove_eq<T: Scalar>(lhs: &RingExpr<T>, rhs: &RingExpr<T>, table: &TimesTable<T>) -> Result<bool, TableError> {
    Ok(normalize(lhs, table)? == normalize(rhs, table)?)
}

/// Direct evaluation of an expression at concrete elements, bypassing normal forms.
pub fn eval_expr<T: Scalar>(
    e: &RingExpr<T>,
    table: &TimesTable<T>,
    assignment: &HashMap<String, Vec<T>>,
) -> Result<Vec<T>, TableError> {
    let dim = table.dim;
    let scalar = |c: T| {
        let mut v = vec![T::zero(); dim];
        v[0] = c;
        v
    };
    Ok(match e {
        RingExpr::Var(v) => assignment.get(&**v).cloned().ok_or_else(|| TableError::Unassigned(v.to_string()))?,
        RingExpr::Coord(v, i) => scalar(
            assignment
                .get(&**v)
                .and_then(|c| c.get(*i))
                .cloned()
                .ok_or_else(|| TableError::Unassigned(format!("{v}.{i}")))?,
        ),
        RingExpr::Const(c) => scalar(c.clone()),
        RingExpr::Basis(k) => {
            if *k >= dim {
                return Err(TableError::IndexOutOfRange { index: *k, dim });
            }
            table.unit(*k)
        }
        RingExpr::Add(l, r) => {
            let (a, b) = (eval_expr(l, table, assignment)?, eval_expr(r, table, assignment)?);
            a.into_iter().zip(b).map(|(x, y)| x + y).collect()
        }
        RingExpr::Mul(l, r) => table.mul_coords(&eval_expr(l, table, assignment)?, &eval_expr(r, table, assignment)?),
        RingExpr::Neg(x) => eval_expr(x, table, assignment)?.into_iter().map(|v| -v).collect(),
        RingExpr::Pow(x, n) => {
            let base = eval_expr(x, table, assignment)?;
            let mut acc = table.unit(0);
            for _ in 0..*n {
                acc = table.mul_coords(&acc, &base);
            }
            acc
        }
        RingExpr::ScalarMul(c, x) => eval_expr(x, table, assignment)?.into_iter().map(|v| c.clone() * v).collect(),
    })
}

/// Parse an infix expression.
///
/// ```text
/// expr   := term (('+' | '-') term)*
/// term   := unary ('*' unary)*
/// unary  := '-' unary | power
/// power  := atom ['^' digits]
/// atom   := digits | 'sqrt' | ident ['.' digits] | '(' expr ')'
/// ident  := [A-Za-z_][A-Za-z0-9_]*
/// ```
///
/// `sqrt` is basis element 1; `x.i` is the base-ring coordinate `i` of `x`.
pub fn parse_expr<T: Scalar + FromStr>(s: &str) -> Result<RingExpr<T>, TableError> {
    let mut p = ExprParser { src: s.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl ExprParser<'_> {
    fn err<R>(&self, msg: &str) -> Result<R, TableError> {
        Err(TableError::Parse { pos: self.pos, msg: msg.to_owned() })
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn take_while(&mut self, f: impl Fn(u8) -> bool) -> &str {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|&c| f(c)) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap()
    }

    fn small(&mut self) -> Result<u32, TableError> {
        self.skip_ws();
        let at = self.pos;
        let digits = self.take_while(|c| c.is_ascii_digit());
        digits.parse().map_err(|_| TableError::Parse { pos: at, msg: "expected a small integer".into() })
    }

    fn expr<T: Scalar + FromStr>(&mut self) -> Result<RingExpr<T>, TableError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc + self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term<T: Scalar + FromStr>(&mut self) -> Result<RingExpr<T>, TableError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc * self.unary()?;
        }
        Ok(acc)
    }

    fn unary<T: Scalar + FromStr>(&mut self) -> Result<RingExpr<T>, TableError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.small()?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom<T: Scalar + FromStr>(&mut self) -> Result<RingExpr<T>, TableError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let at = self.pos;
                let digits = self.take_while(|c| c.is_ascii_digit());
                digits
                    .parse::<T>()
                    .map(RingExpr::Const)
                    .map_err(|_| TableError::Parse { pos: at, msg: "invalid literal".into() })
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let name = self.take_while(|c| c.is_ascii_alphanumeric() || c == b'_').to_owned();
                if name == "sqrt" {
                    return Ok(RingExpr::Basis(1));
                }
                if self.src.get(self.pos) == Some(&b'.') {
                    self.pos += 1;
                    let i = self.small()? as usize;
                    return Ok(RingExpr::coord(&name, i));
                }
                Ok(RingExpr::var(&name))
            }
            _ => self.err("expected a number, identifier, 'sqrt' or '('"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Int, Rat};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type E = RingExpr<Int>;

    fn quad(a: i64, b: i64) -> TimesTable<Int> {
        TimesTable::for_quad(&QuadParams::new(Int::from(a), Int::from(b)))
    }

    fn pv(name: &str, coord: usize) -> Poly<Int> {
        Poly::var(PolyVar { name: name.into(), coord })
    }

    fn c(v: i64) -> Poly<Int> {
        Poly::constant(Int::from(v))
    }

    #[test]
    fn quad_table_entries() {
        let t = quad(0, -7);
        assert_eq!((t.get(1, 1, 0), t.get(1, 1, 1)), (&Int::from(-7), &Int::from(0)));
        let t = quad(1, -3);
        assert_eq!((t.get(1, 1, 0), t.get(1, 1, 1)), (&Int::from(-3), &Int::from(1)));
        for j in 0..2 {
            for k in 0..2 {
                assert_eq!(*t.get(0, j, k), Int::from((j == k) as i64));
            }
        }
        let rebuilt = TimesTable::new(vec![
            vec![vec![Int::from(1), Int::from(0)], vec![Int::from(0), Int::from(1)]],
            vec![vec![Int::from(0), Int::from(1)], vec![Int::from(-3), Int::from(1)]],
        ])
        .unwrap();
        assert_eq!(rebuilt, t);
    }

    #[test]
    fn product_normal_form() {
        let t = quad(0, 5);
        let nf = normalize(&(E::var("x") * E::var("y")), &t).unwrap();
        let want0 = &(&pv("x", 0) * &pv("y", 0)) + &(&pv("x", 1) * &pv("y", 1)).scale(&Int::from(5));
        assert_eq!(nf.coords[0], want0);
        let want1 = &(&pv("x", 0) * &pv("y", 1)) + &(&pv("x", 1) * &pv("y", 0));
        assert_eq!(nf.coords[1], want1);
    }

    #[test]
    fn cancellation_gives_zero() {
        let t = quad(1, 2);
        assert!(normalize(&(E::var("x") + (-E::var("x"))), &t).unwrap().is_zero());
    }

    #[test]
    fn cube_normal_form_matches_closed_form() {
        let d = 6;
        let nf = normalize(&E::var("x").pow(3), &quad(0, d)).unwrap();
        let (x0, x1) = (pv("x", 0), pv("x", 1));
        let want = &(&(&x0 * &x0) * &x1).scale(&Int::from(3)) + &(&(&x1 * &x1) * &x1).scale(&Int::from(d));
        assert_eq!(nf.coords[1], want);
    }

    #[test]
    fn basis_index_checked() {
        assert_eq!(
            normalize(&E::Basis(2), &quad(0, 2)),
            Err(TableError::IndexOutOfRange { index: 2, dim: 2 })
        );
    }

    #[test]
    fn corrupted_tables_rejected() {
        let good = |a: i64, b: i64| {
            vec![
                vec![vec![Int::from(1), Int::from(0)], vec![Int::from(0), Int::from(1)]],
                vec![vec![Int::from(0), Int::from(1)], vec![Int::from(b), Int::from(a)]],
            ]
        };
        assert!(TimesTable::new(good(0, -5)).is_ok());
        let mut asym = good(0, -5);
        asym[0][1][1] = Int::from(2);
        assert_eq!(TimesTable::new(asym), Err(TableError::NotCommutative { i: 0, j: 1 }));
        assert_eq!(TimesTable::<Int>::new(vec![]), Err(TableError::Shape));
        // rank 3: b1^2 = b2, b2^2 = b1, b1 b2 = 1 is the group ring of Z/3
        let z3 = |corrupt: bool| {
            let v = |x: [i64; 3]| x.iter().map(|&n| Int::from(n)).collect::<Vec<_>>();
            let mut t = vec![
                vec![v([1, 0, 0]), v([0, 1, 0]), v([0, 0, 1])],
                vec![v([0, 1, 0]), v([0, 0, 1]), v([1, 0, 0])],
                vec![v([0, 0, 1]), v([1, 0, 0]), v([0, 1, 0])],
            ];
            if corrupt {
                t[1][1] = v([0, 0, 2]);
            }
            t
        };
        assert!(TimesTable::new(z3(false)).is_ok());
        assert!(matches!(TimesTable::new(z3(true)), Err(TableError::NotAssociative { .. })));
    }

    #[test]
    fn parse_examples() {
        let e: E = parse_expr("(x - y) * (x^2 + x*y + y^2)").unwrap();
        let rhs: E = parse_expr("x^3 - y^3").unwrap();
        assert!(prove_eq(&e, &rhs, &quad(0, -2)).unwrap());
        let s: E = parse_expr("sqrt^2").unwrap();
        let nf = normalize(&s, &quad(0, -13)).unwrap();
        assert_eq!(nf.coords, vec![c(-13), Poly::zero()]);
        let m: E = parse_expr("-x.1^2").unwrap();
        assert_eq!(normalize(&m, &quad(0, 3)).unwrap().coords[0], -&(&pv("x", 1) * &pv("x", 1)));
        assert!(matches!(parse_expr::<Int>("x + * y"), Err(TableError::Parse { pos: 4, .. })));
        assert!(matches!(parse_expr::<Int>("(x"), Err(TableError::Parse { .. })));
        assert!(parse_expr::<Rat>("x^2 + 3").is_ok());
    }

    #[test]
    fn commutative_ring_axioms_symbolically() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (x, y, z) = (E::var("x"), E::var("y"), E::var("z"));
        let zero = E::int(0);
        let one = E::int(1);
        for _ in 0..20 {
            let t = quad(rng.gen_range(-9..=9), rng.gen_range(-30..=30));
            let axioms = [
                ((x.clone() + y.clone()) + z.clone(), x.clone() + (y.clone() + z.clone())),
                (x.clone() + y.clone(), y.clone() + x.clone()),
                (zero.clone() + x.clone(), x.clone()),
                (x.clone() + (-x.clone()), zero.clone()),
                ((x.clone() * y.clone()) * z.clone(), x.clone() * (y.clone() * z.clone())),
                (x.clone() * y.clone(), y.clone() * x.clone()),
                (one.clone() * x.clone(), x.clone()),
                (x.clone() * (y.clone() + z.clone()), x.clone() * y.clone() + x.clone() * z.clone()),
            ];
            for (l, r) in &axioms {
                assert!(prove_eq(l, r, &t).unwrap());
            }
        }
        assert!(!prove_eq(&(x.clone() * y.clone()), &(x.clone() + y), &quad(0, -1)).unwrap());
    }

    fn arb_expr() -> impl Strategy<Value = E> {
        let leaf = prop_oneof![
            prop::sample::select(vec!["x", "y", "z"]).prop_map(E::var),
            (-5i64..=5).prop_map(E::int),
            Just(E::Basis(1)),
            (prop::sample::select(vec!["x", "y"]), 0usize..2).prop_map(|(n, i)| E::coord(n, i)),
        ];
        leaf.prop_recursive(6, 48, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
                inner.clone().prop_map(|a| -a),
                (inner.clone(), 0u32..4).prop_map(|(a, e)| a.pow(e)),
                (inner, -3i64..=3).prop_map(|(a, k)| a.scaled(Int::from(k))),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn normal_form_commutes_with_evaluation(
            e in arb_expr(), a in -3i64..=3, b in -10i64..=10,
            vals in prop::collection::vec(-6i64..=6, 6)
        ) {
            let t = quad(a, b);
            let mut env = HashMap::new();
            for (k, name) in ["x", "y", "z"].iter().enumerate() {
                env.insert(name.to_string(), vec![Int::from(vals[2 * k]), Int::from(vals[2 * k + 1])]);
            }
            let nf = normalize(&e, &t).unwrap();
            prop_assert_eq!(nf.eval(&env).unwrap(), eval_expr(&e, &t, &env).unwrap());
        }

        #[test]
        fn reification_is_idempotent(e in arb_expr(), a in -3i64..=3, b in -10i64..=10) {
            let t = quad(a, b);
            let nf = normalize(&e, &t).unwrap();
            prop_assert_eq!(normalize(&nf.to_expr(), &t).unwrap(), nf);
        }
    }
}

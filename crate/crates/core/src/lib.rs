// SPDX-License-Identifier: Apache-2.0

//! Exact class groups of imaginary quadratic orders and integral points on
//! Mordell curves `y^2 = x^3 + d` by ideal descent.
//!
//! The algebra is generic over the base scalar: [`quad::QuadElem`] and
//! [`times_table::TimesTable`] work over any [`Scalar`] (big integers, big
//! rationals, or machine integers for quick experiments), and ideal
//! arithmetic works over any [`IntScalar`]. The aliases below fix the
//! exact big-number instantiations used by the class group and Mordell
//! solvers.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::ops::Neg;

use num_bigint::ToBigInt;
use num_integer::Integer;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

pub mod arith;
pub mod certify;
pub mod class_group;
pub mod ideal;
pub mod mordell;
pub mod quad;
pub mod times_table;

/// Exact commutative base ring scalar.
pub trait Scalar:
    Clone + Debug + Display + PartialEq + Num + Neg<Output = Self> + FromPrimitive + Send + Sync + 'static
{
    fn from_int(v: i64) -> Self {
        <Self as FromPrimitive>::from_i64(v).expect("scalar must represent small integers")
    }
}

impl<T> Scalar for T where
    T: Clone + Debug + Display + PartialEq + Num + Neg<Output = T> + FromPrimitive + Send + Sync + 'static
{
}

/// Exact integer scalar (Euclidean, ordered) for lattice and ideal arithmetic.
pub trait IntScalar: Scalar + Integer + Signed + Ord + Hash + ToBigInt + ToPrimitive {}

impl<T> IntScalar for T where T: Scalar + Integer + Signed + Ord + Hash + ToBigInt + ToPrimitive {}

pub type Int = num_bigint::BigInt;
pub type Rat = num_rational::BigRational;

pub type ZParams = quad::QuadParams<Int>;
pub type QParams = quad::QuadParams<Rat>;
pub type ZQuad = quad::QuadElem<Int>;
pub type QQuad = quad::QuadElem<Rat>;
pub type Ideal = ideal::QuadIdeal<Int>;
pub type ZTable = times_table::TimesTable<Int>;
pub type QTable = times_table::TimesTable<Rat>;

pub use arith::{factor, integer_sqrt, is_prime, is_square, kronecker, squarefree};
pub use class_group::{class_group, ClassGroupDescriptor, Method};
pub use mordell::{check_hypotheses, solve, MordellInstance, MordellResult};

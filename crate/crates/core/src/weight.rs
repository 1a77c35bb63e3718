use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Mul, MulAssign};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::Error;

/// A natural number of unbounded size.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(BigUint);

impl Weight {
    pub fn zero() -> Weight {
        Weight(BigUint::zero())
    }

    pub fn one() -> Weight {
        Weight(BigUint::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }

    pub fn pow(&self, exp: u32) -> Weight {
        Weight(self.0.pow(exp))
    }
}

impl From<u64> for Weight {
    fn from(v: u64) -> Weight {
        Weight(BigUint::from(v))
    }
}

impl From<BigUint> for Weight {
    fn from(v: BigUint) -> Weight {
        Weight(v)
    }
}

impl Add for Weight {
    type Output = Weight;
    fn add(self, rhs: Weight) -> Weight {
        Weight(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a Weight> for Weight {
    type Output = Weight;
    fn add(self, rhs: &'a Weight) -> Weight {
        Weight(self.0 + &rhs.0)
    }
}

impl AddAssign<&Weight> for Weight {
    fn add_assign(&mut self, rhs: &Weight) {
        self.0 += &rhs.0;
    }
}

impl AddAssign for Weight {
    fn add_assign(&mut self, rhs: Weight) {
        self.0 += rhs.0;
    }
}

impl Mul for Weight {
    type Output = Weight;
    fn mul(self, rhs: Weight) -> Weight {
        Weight(self.0 * rhs.0)
    }
}

impl<'a> Mul<&'a Weight> for Weight {
    type Output = Weight;
    fn mul(self, rhs: &'a Weight) -> Weight {
        Weight(self.0 * &rhs.0)
    }
}

impl<'a> Mul<&'a Weight> for &'a Weight {
    type Output = Weight;
    fn mul(self, rhs: &'a Weight) -> Weight {
        Weight(&self.0 * &rhs.0)
    }
}

impl MulAssign<&Weight> for Weight {
    fn mul_assign(&mut self, rhs: &Weight) {
        self.0 *= &rhs.0;
    }
}

impl Sum for Weight {
    fn sum<I: Iterator<Item = Weight>>(iter: I) -> Weight {
        iter.fold(Weight::zero(), |a, b| a + b)
    }
}

impl<'a> Sum<&'a Weight> for Weight {
    fn sum<I: Iterator<Item = &'a Weight>>(iter: I) -> Weight {
        iter.fold(Weight::zero(), |a, b| a + b)
    }
}

impl Product for Weight {
    fn product<I: Iterator<Item = Weight>>(iter: I) -> Weight {
        iter.fold(Weight::one(), |a, b| a * b)
    }
}

impl<'a> Product<&'a Weight> for Weight {
    fn product<I: Iterator<Item = &'a Weight>>(iter: I) -> Weight {
        iter.fold(Weight::one(), |a, b| a * b)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Weight {
    type Err = Error;
    fn from_str(s: &str) -> Result<Weight, Error> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Validation(format!("invalid weight `{s}`")));
        }
        s.parse::<BigUint>()
            .map(Weight)
            .map_err(|_| Error::Validation(format!("invalid weight `{s}`")))
    }
}

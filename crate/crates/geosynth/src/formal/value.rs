//! Exact numeric values of the form `q + c*sqrt(r)`.
//!
//! This field fragment is closed under the operations the equation solver
//! actually performs: rational linear combinations, products, division,
//! and square roots of nonnegative rationals. Operations that would leave
//! the fragment (mixing distinct radicands) return `None`, and the caller
//! falls back to floating point or leaves the equation pending.

use std::fmt;

use num::{BigRational, One, Signed, ToPrimitive, Zero};

use super::expr::{ratio_to_f64, Expr};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExactValue {
    rat: BigRational,
    coef: BigRational,
    /// Squarefree radicand; 1 exactly when `coef` is zero.
    rad: u64,
}

impl ExactValue {
    pub fn zero() -> Self {
        ExactValue::from_rational(BigRational::zero())
    }

    pub fn from_rational(rat: BigRational) -> Self {
        ExactValue {
            rat,
            coef: BigRational::zero(),
            rad: 1,
        }
    }

    pub fn from_int(n: i64) -> Self {
        ExactValue::from_rational(BigRational::from_integer(n.into()))
    }

    fn compose(rat: BigRational, coef: BigRational, rad: u64) -> Self {
        if coef.is_zero() {
            ExactValue::from_rational(rat)
        } else if rad == 1 {
            // sqrt(1) collapses into the rational part.
            ExactValue::from_rational(rat + coef)
        } else {
            ExactValue { rat, coef, rad }
        }
    }

    pub fn is_rational(&self) -> bool {
        self.coef.is_zero()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.rat)
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.coef.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.rat) + ratio_to_f64(&self.coef) * (self.rad as f64).sqrt()
    }

    /// Exact sign test: `q + c*sqrt(r) > 0`, decided by comparing squares
    /// when the two parts pull in opposite directions.
    pub fn is_positive(&self) -> bool {
        if self.coef.is_zero() {
            return self.rat.is_positive();
        }
        if self.rat.is_zero() {
            return self.coef.is_positive();
        }
        if self.rat.is_positive() == self.coef.is_positive() {
            return self.rat.is_positive();
        }
        let rad = BigRational::from_integer(self.rad.into());
        let rat_sq = &self.rat * &self.rat;
        let root_sq = &self.coef * &self.coef * rad;
        if self.rat.is_positive() {
            rat_sq > root_sq
        } else {
            root_sq > rat_sq
        }
    }

    pub fn add(&self, other: &Self) -> Option<Self> {
        let rad = match (self.coef.is_zero(), other.coef.is_zero()) {
            (true, true) => 1,
            (false, true) => self.rad,
            (true, false) => other.rad,
            (false, false) if self.rad == other.rad => self.rad,
            _ => return None,
        };
        Some(ExactValue::compose(
            &self.rat + &other.rat,
            &self.coef + &other.coef,
            rad,
        ))
    }

    pub fn sub(&self, other: &Self) -> Option<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        ExactValue::compose(-self.rat.clone(), -self.coef.clone(), self.rad)
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        ExactValue::compose(&self.rat * k, &self.coef * k, self.rad)
    }

    pub fn mul(&self, other: &Self) -> Option<Self> {
        if self.is_rational() {
            return Some(other.scale(&self.rat));
        }
        if other.is_rational() {
            return Some(self.scale(&other.rat));
        }
        if self.rad != other.rad {
            return None;
        }
        let rad_rat = BigRational::from_integer(self.rad.into());
        let rat = &self.rat * &other.rat + &self.coef * &other.coef * rad_rat;
        let coef = &self.rat * &other.coef + &other.rat * &self.coef;
        Some(ExactValue::compose(rat, coef, self.rad))
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if self.is_rational() {
            return Some(ExactValue::from_rational(self.rat.recip()));
        }
        // 1/(q + c*sqrt(r)) rationalized by the conjugate.
        let rad_rat = BigRational::from_integer(self.rad.into());
        let denom = &self.rat * &self.rat - &self.coef * &self.coef * rad_rat;
        if denom.is_zero() {
            return None;
        }
        Some(ExactValue::compose(
            &self.rat / &denom,
            -&self.coef / &denom,
            self.rad,
        ))
    }

    pub fn div(&self, other: &Self) -> Option<Self> {
        self.mul(&other.inverse()?)
    }

    /// Principal square root; defined only for nonnegative rationals.
    pub fn sqrt(&self) -> Option<Self> {
        if !self.is_rational() || self.rat.is_negative() {
            return None;
        }
        // sqrt(n/d) = sqrt(n*d)/d; split n*d into k^2 * m with m squarefree.
        let product = self.rat.numer() * self.rat.denom();
        let product = product.to_u64()?;
        let (square, free) = split_square(product);
        let root = BigRational::new(square.into(), self.rat.denom().clone());
        if free == 1 {
            Some(ExactValue::from_rational(root))
        } else {
            Some(ExactValue::compose(BigRational::zero(), root, free))
        }
    }

    /// Rebuilds the value as an expression tree (for printable equations).
    pub fn to_expr<S>(&self) -> Expr<S> {
        let rat = Expr::Num(self.rat.clone());
        if self.coef.is_zero() {
            return rat;
        }
        let root = Expr::sqrt(Expr::Num(BigRational::from_integer(self.rad.into())));
        let sqrt_part = if self.coef.is_one() {
            root
        } else if self.coef == -BigRational::one() {
            // handled by the subtraction below
            root
        } else {
            Expr::mul(Expr::Num(self.coef.abs()), root)
        };
        if self.rat.is_zero() {
            if self.coef.is_negative() {
                Expr::sub(Expr::num_int(0), sqrt_part)
            } else {
                sqrt_part
            }
        } else if self.coef.is_negative() {
            Expr::sub(rat, sqrt_part)
        } else {
            Expr::add(rat, sqrt_part)
        }
    }
}

/// Splits n into (k, m) with n = k^2 * m and m squarefree.
fn split_square(mut n: u64) -> (u64, u64) {
    if n == 0 {
        return (0, 1);
    }
    let mut square_root = 1u64;
    let mut free = 1u64;
    let mut f = 2u64;
    while f * f <= n {
        let mut count = 0;
        while n % f == 0 {
            n /= f;
            count += 1;
        }
        square_root *= f.pow(count / 2);
        if count % 2 == 1 {
            free *= f;
        }
        f += 1;
    }
    free *= n; // leftover prime
    (square_root, free)
}

impl fmt::Display for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coef.is_zero() {
            return write!(f, "{}", self.rat);
        }
        let root = format!("sqrt({})", self.rad);
        let abs = self.coef.abs();
        let sqrt_part = if abs.is_one() {
            root
        } else {
            format!("{abs}*{root}")
        };
        if self.rat.is_zero() {
            if self.coef.is_negative() {
                write!(f, "-{sqrt_part}")
            } else {
                write!(f, "{sqrt_part}")
            }
        } else if self.coef.is_negative() {
            write!(f, "{} - {sqrt_part}", self.rat)
        } else {
            write!(f, "{} + {sqrt_part}", self.rat)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn sqrt_extracts_square_factors() {
        let v = ExactValue::from_int(12).sqrt().unwrap();
        assert_eq!(v.to_string(), "2*sqrt(3)");
        let v = ExactValue::from_int(25).sqrt().unwrap();
        assert_eq!(v.to_string(), "5");
        let v = ExactValue::from_rational(rat(1, 2)).sqrt().unwrap();
        assert_eq!(v.to_string(), "1/2*sqrt(2)");
        assert!(ExactValue::from_int(-4).sqrt().is_none());
    }

    #[test]
    fn arithmetic_stays_exact() {
        let a = ExactValue::from_int(8).sqrt().unwrap(); // 2*sqrt(2)
        let b = ExactValue::from_int(2).sqrt().unwrap(); // sqrt(2)
        let sum = a.add(&b).unwrap();
        assert_eq!(sum.to_string(), "3*sqrt(2)");
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod.to_string(), "4");
        let inv = b.inverse().unwrap();
        assert_eq!(inv.to_string(), "1/2*sqrt(2)");
    }

    #[test]
    fn mixing_radicands_is_refused() {
        let a = ExactValue::from_int(2).sqrt().unwrap();
        let b = ExactValue::from_int(3).sqrt().unwrap();
        assert!(a.add(&b).is_none());
        assert!(a.mul(&b).is_none());
    }

    #[test]
    fn division_rationalizes() {
        let one = ExactValue::from_int(1);
        let v = ExactValue::from_int(1)
            .add(&ExactValue::from_int(2).sqrt().unwrap())
            .unwrap(); // 1 + sqrt(2)
        let q = one.div(&v).unwrap();
        assert_eq!(q.to_string(), "-1 + sqrt(2)");
        let back = q.mul(&v).unwrap();
        assert_eq!(back, ExactValue::from_int(1));
    }
}

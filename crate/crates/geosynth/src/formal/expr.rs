//! Arithmetic expression trees over exchangeable symbol types.
//!
//! The same tree shape is used for measure expressions inside theorem
//! statements (`LengthOfLine(DE)*2`), for the coordinate constraint
//! templates attached to predicates (`x(M) = (x(A)+x(B))/2`), and for the
//! pattern forms of both (symbols over unbound variables). Constants are
//! exact rationals; `sqrt` stays symbolic until a numeric evaluation asks
//! for it.

use std::collections::BTreeSet;
use std::fmt;

use num::{BigRational, Signed, ToPrimitive, Zero};

use super::entity::PointRef;
use super::measure::MeasureKind;

#[derive(Clone, PartialEq, Eq, Debug, PartialOrd, Ord, Hash)]
pub enum Expr<S> {
    Num(BigRational),
    Sym(S),
    Add(Box<Expr<S>>, Box<Expr<S>>),
    Sub(Box<Expr<S>>, Box<Expr<S>>),
    Mul(Box<Expr<S>>, Box<Expr<S>>),
    Div(Box<Expr<S>>, Box<Expr<S>>),
    Sqrt(Box<Expr<S>>),
}

/// Evaluation failures. Division carries a nonzero-denominator obligation
/// that is only checkable once the denominator has a value.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("symbol `{0}` has no value")]
    UnknownSymbol(String),
    #[error("division by zero")]
    DivideByZero,
    #[error("square root of a negative value")]
    NegativeSqrt,
}

impl<S> Expr<S> {
    pub fn num_int(n: i64) -> Self {
        Expr::Num(BigRational::from_integer(n.into()))
    }

    pub fn add(a: Expr<S>, b: Expr<S>) -> Self {
        Expr::Add(Box::new(a), Box::new(b))
    }
    pub fn sub(a: Expr<S>, b: Expr<S>) -> Self {
        Expr::Sub(Box::new(a), Box::new(b))
    }
    pub fn mul(a: Expr<S>, b: Expr<S>) -> Self {
        Expr::Mul(Box::new(a), Box::new(b))
    }
    pub fn div(a: Expr<S>, b: Expr<S>) -> Self {
        Expr::Div(Box::new(a), Box::new(b))
    }
    pub fn sqrt(a: Expr<S>) -> Self {
        Expr::Sqrt(Box::new(a))
    }

    /// Rewrites every symbol leaf, keeping structure.
    pub fn map_sym<T>(&self, f: &mut impl FnMut(&S) -> Expr<T>) -> Expr<T> {
        match self {
            Expr::Num(n) => Expr::Num(n.clone()),
            Expr::Sym(s) => f(s),
            Expr::Add(a, b) => Expr::add(a.map_sym(f), b.map_sym(f)),
            Expr::Sub(a, b) => Expr::sub(a.map_sym(f), b.map_sym(f)),
            Expr::Mul(a, b) => Expr::mul(a.map_sym(f), b.map_sym(f)),
            Expr::Div(a, b) => Expr::div(a.map_sym(f), b.map_sym(f)),
            Expr::Sqrt(a) => Expr::sqrt(a.map_sym(f)),
        }
    }

    pub fn for_each_sym(&self, f: &mut impl FnMut(&S)) {
        match self {
            Expr::Num(_) => {}
            Expr::Sym(s) => f(s),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.for_each_sym(f);
                b.for_each_sym(f);
            }
            Expr::Sqrt(a) => a.for_each_sym(f),
        }
    }

    pub fn symbols(&self) -> BTreeSet<S>
    where
        S: Clone + Ord,
    {
        let mut out = BTreeSet::new();
        self.for_each_sym(&mut |s| {
            out.insert(s.clone());
        });
        out
    }

    /// Canonical form: constants are folded, and addition/multiplication
    /// chains are flattened and sorted, so any two renderings of the same
    /// commutative combination normalize to identical trees. Two facts are
    /// then the same exactly when their normalized texts match. `sqrt`
    /// folds only for perfect squares; division folds only when the
    /// denominator is a nonzero constant.
    pub fn normalize(self) -> Expr<S>
    where
        S: Ord,
    {
        // Normalizing a non-sum can still yield a sum (Mul(1, x + 1)
        // collapses to x + 1), so flattening must recurse into whatever
        // normalization returns, not just into syntactic Adds.
        fn flatten_add<S: Ord>(e: Expr<S>, out: &mut Vec<Expr<S>>) {
            match e {
                Expr::Add(a, b) => {
                    flatten_add(*a, out);
                    flatten_add(*b, out);
                }
                other => match other.normalize() {
                    again @ Expr::Add(..) => flatten_add(again, out),
                    flat => out.push(flat),
                },
            }
        }
        fn flatten_mul<S: Ord>(e: Expr<S>, out: &mut Vec<Expr<S>>) {
            match e {
                Expr::Mul(a, b) => {
                    flatten_mul(*a, out);
                    flatten_mul(*b, out);
                }
                other => match other.normalize() {
                    again @ Expr::Mul(..) => flatten_mul(again, out),
                    flat => out.push(flat),
                },
            }
        }
        match self {
            Expr::Num(_) | Expr::Sym(_) => self,
            Expr::Add(..) => {
                let mut terms = Vec::new();
                flatten_add(self, &mut terms);
                let mut constant = BigRational::from_integer(0.into());
                let mut rest = Vec::new();
                for t in terms {
                    match t {
                        Expr::Num(n) => constant += n,
                        other => rest.push(other),
                    }
                }
                rest.sort();
                let mut it = rest.into_iter();
                match it.next() {
                    None => Expr::Num(constant),
                    Some(first) => {
                        let folded = it.fold(first, Expr::add);
                        if constant.is_zero() {
                            folded
                        } else {
                            Expr::add(folded, Expr::Num(constant))
                        }
                    }
                }
            }
            Expr::Mul(..) => {
                let mut factors = Vec::new();
                flatten_mul(self, &mut factors);
                let mut constant = BigRational::from_integer(1.into());
                let mut rest = Vec::new();
                for f in factors {
                    match f {
                        Expr::Num(n) => constant *= n,
                        other => rest.push(other),
                    }
                }
                if constant.is_zero() {
                    return Expr::Num(constant);
                }
                rest.sort();
                let mut it = rest.into_iter();
                match it.next() {
                    None => Expr::Num(constant),
                    Some(first) => {
                        let folded = it.fold(first, Expr::mul);
                        if constant == BigRational::from_integer(1.into()) {
                            folded
                        } else {
                            Expr::mul(Expr::Num(constant), folded)
                        }
                    }
                }
            }
            Expr::Sub(a, b) => match (a.normalize(), b.normalize()) {
                (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
                (x, Expr::Num(y)) if y.is_zero() => x,
                (x, y) => Expr::sub(x, y),
            },
            Expr::Div(a, b) => match (a.normalize(), b.normalize()) {
                (Expr::Num(x), Expr::Num(y)) if !y.is_zero() => Expr::Num(x / y),
                (x, y) => Expr::div(x, y),
            },
            Expr::Sqrt(a) => match a.normalize() {
                Expr::Num(x) if !x.is_negative() => match rational_sqrt(&x) {
                    Some(root) => Expr::Num(root),
                    None => Expr::sqrt(Expr::Num(x)),
                },
                x => Expr::sqrt(x),
            },
        }
    }

    pub fn eval_f64(&self, resolve: &impl Fn(&S) -> Option<f64>) -> Result<f64, EvalError>
    where
        S: fmt::Display,
    {
        match self {
            Expr::Num(n) => Ok(ratio_to_f64(n)),
            Expr::Sym(s) => resolve(s).ok_or_else(|| EvalError::UnknownSymbol(s.to_string())),
            Expr::Add(a, b) => Ok(a.eval_f64(resolve)? + b.eval_f64(resolve)?),
            Expr::Sub(a, b) => Ok(a.eval_f64(resolve)? - b.eval_f64(resolve)?),
            Expr::Mul(a, b) => Ok(a.eval_f64(resolve)? * b.eval_f64(resolve)?),
            Expr::Div(a, b) => {
                let d = b.eval_f64(resolve)?;
                if d == 0.0 {
                    return Err(EvalError::DivideByZero);
                }
                Ok(a.eval_f64(resolve)? / d)
            }
            Expr::Sqrt(a) => {
                let v = a.eval_f64(resolve)?;
                if v < 0.0 {
                    return Err(EvalError::NegativeSqrt);
                }
                Ok(v.sqrt())
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            // A non-integer rational prints with a slash, so textually it
            // binds like a division, not like an atom.
            Expr::Num(n) if !n.is_integer() => 2,
            Expr::Num(_) | Expr::Sym(_) | Expr::Sqrt(_) => 3,
        }
    }
}

impl<S: fmt::Display> fmt::Display for Expr<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn side<S: fmt::Display>(
            f: &mut fmt::Formatter<'_>,
            child: &Expr<S>,
            parent_prec: u8,
            tighten: bool,
        ) -> fmt::Result {
            let need = child.precedence() < parent_prec
                || (tighten && child.precedence() == parent_prec)
                || matches!(child, Expr::Num(n) if n.is_negative());
            if need {
                write!(f, "({child})")
            } else {
                write!(f, "{child}")
            }
        }
        match self {
            Expr::Num(n) => write!(f, "{n}"),
            Expr::Sym(s) => write!(f, "{s}"),
            // Right operands of equal precedence are parenthesized because
            // parsing is left-associative: a + (b - c) and a*(b/c) would
            // otherwise read back reassociated.
            Expr::Add(a, b) => {
                side(f, a, 1, false)?;
                write!(f, " + ")?;
                side(f, b, 1, true)
            }
            Expr::Sub(a, b) => {
                side(f, a, 1, false)?;
                write!(f, " - ")?;
                side(f, b, 1, true)
            }
            Expr::Mul(a, b) => {
                side(f, a, 2, false)?;
                write!(f, "*")?;
                side(f, b, 2, true)
            }
            Expr::Div(a, b) => {
                side(f, a, 2, false)?;
                write!(f, "/")?;
                side(f, b, 2, true)
            }
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

/// Exact square root of a rational, if it is itself rational.
pub fn rational_sqrt(v: &BigRational) -> Option<BigRational> {
    if v.is_negative() {
        return None;
    }
    let num = v.numer().sqrt();
    let den = v.denom().sqrt();
    if &(&num * &num) == v.numer() && &(&den * &den) == v.denom() {
        Some(BigRational::new(num, den))
    } else {
        None
    }
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back to component division for ratios outside f64 integer range.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// `lhs = rhs` over whatever symbol type the context uses.
#[derive(Clone, PartialEq, Eq, Debug, PartialOrd, Ord, Hash)]
pub struct Equation<S> {
    pub lhs: Expr<S>,
    pub rhs: Expr<S>,
}

impl<S> Equation<S> {
    pub fn new(lhs: Expr<S>, rhs: Expr<S>) -> Self {
        Equation { lhs, rhs }
    }

    pub fn normalize(self) -> Self
    where
        S: Ord,
    {
        Equation {
            lhs: self.lhs.normalize(),
            rhs: self.rhs.normalize(),
        }
    }

    /// Normalizes and orders the two sides, so symmetric rewritings of one
    /// equality (`AB = CD` vs `CD = AB`) become a single fact. A bare symbol
    /// outranks a compound side and a compound side outranks a constant,
    /// which keeps facts in the shape people write them: `x = 4`, not
    /// `4 = x`, and `x + y = 180`, not `180 = x + y`.
    pub fn canonical(self) -> Self
    where
        S: Ord + fmt::Display,
    {
        fn side_rank<S>(e: &Expr<S>) -> u8 {
            match e {
                Expr::Sym(_) => 0,
                Expr::Num(_) => 2,
                _ => 1,
            }
        }
        let e = self.normalize();
        let lhs_key = (side_rank(&e.lhs), e.lhs.to_string());
        let rhs_key = (side_rank(&e.rhs), e.rhs.to_string());
        if rhs_key < lhs_key {
            Equation {
                lhs: e.rhs,
                rhs: e.lhs,
            }
        } else {
            e
        }
    }

    pub fn map_sym<T>(&self, f: &mut impl FnMut(&S) -> Expr<T>) -> Equation<T> {
        Equation {
            lhs: self.lhs.map_sym(f),
            rhs: self.rhs.map_sym(f),
        }
    }

    pub fn symbols(&self) -> BTreeSet<S>
    where
        S: Clone + Ord,
    {
        let mut out = self.lhs.symbols();
        out.extend(self.rhs.symbols());
        out
    }
}

impl<S: fmt::Display> fmt::Display for Equation<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

/// Coordinate axes used by constraint templates and the diagram solver.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Axis {
    X,
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
        })
    }
}

/// A coordinate of a concrete point, e.g. `x(M)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CoordVar {
    pub point: PointRef,
    pub axis: Axis,
}

impl fmt::Display for CoordVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.axis, self.point)
    }
}

/// A coordinate of a predicate slot letter, before instantiation.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TplCoord {
    pub letter: char,
    pub axis: Axis,
}

impl fmt::Display for TplCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.axis, self.letter)
    }
}

/// A measure over theorem pattern variables, e.g. `LengthOfLine(?d?e)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PatMeasure {
    pub kind: MeasureKind,
    pub vars: Vec<char>,
}

impl fmt::Display for PatMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.kind.name())?;
        for v in &self.vars {
            write!(f, "?{v}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type E = Expr<CoordVar>;

    #[test]
    fn normalize_folds_constants() {
        let e = E::div(E::add(E::num_int(1), E::num_int(3)), E::num_int(8)).normalize();
        assert_eq!(e, E::Num(BigRational::new(1.into(), 2.into())));
    }

    #[test]
    fn sqrt_folds_only_perfect_squares() {
        assert_eq!(E::sqrt(E::num_int(4)).normalize(), E::num_int(2));
        let kept = E::sqrt(E::num_int(3)).normalize();
        assert_eq!(kept.to_string(), "sqrt(3)");
    }

    #[test]
    fn display_parenthesizes_by_precedence() {
        let e = E::mul(E::add(E::num_int(1), E::num_int(2)), E::num_int(3));
        assert_eq!(e.to_string(), "(1 + 2)*3");
        let e = E::sub(E::num_int(1), E::sub(E::num_int(2), E::num_int(3)));
        assert_eq!(e.to_string(), "1 - (2 - 3)");
        let e = E::add(E::num_int(1), E::mul(E::num_int(2), E::num_int(3)));
        assert_eq!(e.to_string(), "1 + 2*3");
    }

    #[test]
    fn eval_checks_division_and_sqrt() {
        let zero_div = E::div(E::num_int(1), E::num_int(0));
        assert_eq!(zero_div.eval_f64(&|_| None), Err(EvalError::DivideByZero));
        let neg = E::sqrt(E::num_int(-1));
        assert_eq!(neg.eval_f64(&|_| None), Err(EvalError::NegativeSqrt));
    }
}

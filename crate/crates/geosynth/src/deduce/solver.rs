//! Exact equation solving over measure symbols.
//!
//! The solver keeps a triangular basis of linear rows over interned measure
//! symbols: rational coefficients, `q + c*sqrt(r)` right-hand sides. Every
//! row and every resolved value carries the set of fact ids it was combined
//! from, so a derived value can cite exactly the facts that produced it.
//!
//! Equations outside the linear fragment wait on a pending list and are
//! retried whenever new values appear. Substituting known values collapses
//! a pending fact into a ground identity, a linear row, or a single-unknown
//! quadratic whose positive root we take (measures are strictly positive).
//! A ground contradiction or a nonpositive resolved value means the fact
//! set contradicts itself; the solver reports that instead of guessing.

use std::collections::{BTreeMap, BTreeSet};
use std::collections::btree_map::Entry;

use num::{BigRational, Zero};
use thiserror::Error;

use crate::formal::{Equation, ExactValue, Expr, MeasureSymbol};

use super::FactId;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("equations contradict each other: {0}")]
    Inconsistent(String),
}

/// A value the solver has pinned down, with the facts that forced it.
#[derive(Debug, Clone)]
pub struct DerivedValue {
    pub symbol: MeasureSymbol,
    pub value: ExactValue,
    pub sources: BTreeSet<FactId>,
}

#[derive(Debug, Clone)]
struct Row {
    /// Includes the pivot column with coefficient 1; the pivot is the
    /// lowest column of the row.
    coeffs: BTreeMap<usize, BigRational>,
    rhs: ExactValue,
    sources: BTreeSet<FactId>,
}

#[derive(Debug, Clone)]
struct Known {
    value: ExactValue,
    sources: BTreeSet<FactId>,
}

#[derive(Debug, Clone)]
struct PendingFact {
    fact: FactId,
    expr: Expr<MeasureSymbol>,
}

#[derive(Debug, Default, Clone)]
pub struct EquationSolver {
    symbols: Vec<MeasureSymbol>,
    columns: BTreeMap<MeasureSymbol, usize>,
    rows: BTreeMap<usize, Row>,
    pending: Vec<PendingFact>,
    values: BTreeMap<usize, Known>,
    reported: BTreeSet<usize>,
}

enum Atom {
    Value(ExactValue),
    Col(usize),
}

enum Disposition {
    Settled,
    Pending,
}

enum RowOutcome {
    Inserted,
    Redundant,
    /// Reduction left the `q + c*sqrt(r)` fragment; the caller keeps the
    /// fact pending instead.
    Stuck,
}

impl EquationSolver {
    pub fn new() -> Self {
        EquationSolver::default()
    }

    /// Feeds one equation fact in. The equation may settle into the linear
    /// basis immediately or wait until propagation gives it values.
    pub fn add(&mut self, eq: &Equation<MeasureSymbol>, fact: FactId) -> Result<(), SolveError> {
        let expr = Expr::sub(eq.lhs.clone(), eq.rhs.clone());
        match self.try_fact(&expr, fact)? {
            Disposition::Settled => Ok(()),
            Disposition::Pending => {
                self.pending.push(PendingFact { fact, expr });
                Ok(())
            }
        }
    }

    /// Runs substitution to a fixpoint and returns values that became known
    /// since the last call, in a deterministic order.
    pub fn propagate(&mut self) -> Result<Vec<DerivedValue>, SolveError> {
        loop {
            let resolved = self.resolve_values()?;
            let retried = self.retry_pending()?;
            if !resolved && !retried {
                break;
            }
        }
        let fresh: Vec<usize> = self
            .values
            .keys()
            .copied()
            .filter(|col| !self.reported.contains(col))
            .collect();
        let mut out = Vec::new();
        for col in fresh {
            self.reported.insert(col);
            let known = &self.values[&col];
            out.push(DerivedValue {
                symbol: self.symbols[col].clone(),
                value: known.value.clone(),
                sources: known.sources.clone(),
            });
        }
        Ok(out)
    }

    pub fn value_of(&self, sym: &MeasureSymbol) -> Option<&ExactValue> {
        let col = self.columns.get(sym)?;
        self.values.get(col).map(|k| &k.value)
    }

    /// Is the equation a consequence of what the solver already holds?
    /// Returns the facts whose combination entails it.
    pub fn check(&self, eq: &Equation<MeasureSymbol>) -> Option<BTreeSet<FactId>> {
        let expr = Expr::sub(eq.lhs.clone(), eq.rhs.clone());
        let mut sources = BTreeSet::new();
        let poly = {
            let values = &self.values;
            let columns = &self.columns;
            let used = &mut sources;
            let mut atom = |sym: &MeasureSymbol| -> Option<Atom> {
                let col = *columns.get(sym)?;
                Some(match values.get(&col) {
                    Some(known) => {
                        used.extend(known.sources.iter().copied());
                        Atom::Value(known.value.clone())
                    }
                    None => Atom::Col(col),
                })
            };
            poly_of(&expr, &mut atom)?
        };
        match classify(poly) {
            Classified::Ground(v) => v.is_zero().then_some(sources),
            Classified::Linear { coeffs, constant } => {
                let (coeffs, rhs) = self.reduce(coeffs, constant.neg(), &mut sources)?;
                (coeffs.is_empty() && rhs.is_zero()).then_some(sources)
            }
            _ => None,
        }
    }

    fn column(&mut self, sym: &MeasureSymbol) -> usize {
        if let Some(&col) = self.columns.get(sym) {
            return col;
        }
        let col = self.symbols.len();
        self.symbols.push(sym.clone());
        self.columns.insert(sym.clone(), col);
        col
    }

    fn try_fact(&mut self, expr: &Expr<MeasureSymbol>, fact: FactId) -> Result<Disposition, SolveError> {
        let mut sources = BTreeSet::from([fact]);
        let poly = {
            let used = &mut sources;
            let mut atom = |sym: &MeasureSymbol| -> Option<Atom> {
                let col = self.column(sym);
                Some(match self.values.get(&col) {
                    Some(known) => {
                        used.extend(known.sources.iter().copied());
                        Atom::Value(known.value.clone())
                    }
                    None => Atom::Col(col),
                })
            };
            poly_of(expr, &mut atom)
        };
        let Some(poly) = poly else {
            return Ok(Disposition::Pending);
        };
        match classify(poly) {
            Classified::Ground(v) => {
                if v.is_zero() {
                    Ok(Disposition::Settled)
                } else {
                    Err(SolveError::Inconsistent(format!(
                        "fact #{fact} reduces to {v} = 0"
                    )))
                }
            }
            Classified::Linear { coeffs, constant } => {
                match self.insert_row(coeffs, constant.neg(), sources)? {
                    RowOutcome::Stuck => Ok(Disposition::Pending),
                    _ => Ok(Disposition::Settled),
                }
            }
            Classified::Quadratic { col, a, b, c } => {
                match solve_quadratic(&a, &b, &c).map_err(|msg| {
                    SolveError::Inconsistent(format!("{}: {msg}", self.symbols[col]))
                })? {
                    Some(root) => {
                        let coeffs = BTreeMap::from([(col, BigRational::from_integer(1.into()))]);
                        match self.insert_row(coeffs, root, sources)? {
                            RowOutcome::Stuck => Ok(Disposition::Pending),
                            _ => Ok(Disposition::Settled),
                        }
                    }
                    None => Ok(Disposition::Pending),
                }
            }
            Classified::Stuck => Ok(Disposition::Pending),
        }
    }

    /// Reduces a linear combination against the basis. `None` means the
    /// right-hand side arithmetic left the exact fragment.
    fn reduce(
        &self,
        mut coeffs: BTreeMap<usize, BigRational>,
        mut rhs: ExactValue,
        sources: &mut BTreeSet<FactId>,
    ) -> Option<(BTreeMap<usize, BigRational>, ExactValue)> {
        loop {
            let Some(col) = coeffs
                .keys()
                .copied()
                .find(|c| self.rows.contains_key(c))
            else {
                return Some((coeffs, rhs));
            };
            let factor = coeffs.remove(&col).expect("column came from the map");
            let row = &self.rows[&col];
            for (&c, rc) in &row.coeffs {
                if c == col {
                    continue;
                }
                let delta = &factor * rc;
                match coeffs.entry(c) {
                    Entry::Occupied(mut o) => {
                        *o.get_mut() -= delta;
                        if o.get().is_zero() {
                            o.remove();
                        }
                    }
                    Entry::Vacant(v) => {
                        v.insert(-delta);
                    }
                }
            }
            rhs = rhs.sub(&row.rhs.scale(&factor))?;
            sources.extend(row.sources.iter().copied());
        }
    }

    fn insert_row(
        &mut self,
        coeffs: BTreeMap<usize, BigRational>,
        rhs: ExactValue,
        mut sources: BTreeSet<FactId>,
    ) -> Result<RowOutcome, SolveError> {
        let Some((mut coeffs, rhs)) = self.reduce(coeffs, rhs, &mut sources) else {
            return Ok(RowOutcome::Stuck);
        };
        if coeffs.is_empty() {
            return if rhs.is_zero() {
                Ok(RowOutcome::Redundant)
            } else {
                Err(SolveError::Inconsistent(format!(
                    "facts {sources:?} reduce to 0 = {rhs}"
                )))
            };
        }
        let (&pivot, lead) = coeffs.iter().next().expect("checked non-empty");
        let inv = lead.clone().recip();
        for v in coeffs.values_mut() {
            *v *= &inv;
        }
        let rhs = rhs.scale(&inv);
        self.rows.insert(pivot, Row { coeffs, rhs, sources });
        Ok(RowOutcome::Inserted)
    }

    /// Back-substitution across the basis until no row yields a new value.
    fn resolve_values(&mut self) -> Result<bool, SolveError> {
        let mut progress = false;
        loop {
            let mut advanced = false;
            let pivots: Vec<usize> = self.rows.keys().copied().collect();
            for pivot in pivots {
                if self.values.contains_key(&pivot) {
                    continue;
                }
                let resolved = {
                    let row = &self.rows[&pivot];
                    let mut val = Some(row.rhs.clone());
                    let mut sources = row.sources.clone();
                    for (&c, coeff) in &row.coeffs {
                        if c == pivot {
                            continue;
                        }
                        let Some(known) = self.values.get(&c) else {
                            val = None;
                            break;
                        };
                        val = val.and_then(|v| v.sub(&known.value.scale(coeff)));
                        if val.is_none() {
                            break;
                        }
                        sources.extend(known.sources.iter().copied());
                    }
                    val.map(|v| (v, sources))
                };
                if let Some((value, sources)) = resolved {
                    if !value.is_positive() {
                        return Err(SolveError::Inconsistent(format!(
                            "{} = {value}, but measures are positive",
                            self.symbols[pivot]
                        )));
                    }
                    self.values.insert(pivot, Known { value, sources });
                    advanced = true;
                    progress = true;
                }
            }
            if !advanced {
                return Ok(progress);
            }
        }
    }

    fn retry_pending(&mut self) -> Result<bool, SolveError> {
        let mut progress = false;
        let mut keep = Vec::new();
        for p in std::mem::take(&mut self.pending) {
            match self.try_fact(&p.expr, p.fact)? {
                Disposition::Settled => progress = true,
                Disposition::Pending => keep.push(p),
            }
        }
        self.pending = keep;
        Ok(progress)
    }
}

/// Monomial: sorted symbol columns with repetition, so `x*x` is `[i, i]`
/// and the empty monomial is the constant term.
type Mono = Vec<usize>;

#[derive(Clone)]
struct Poly(BTreeMap<Mono, ExactValue>);

impl Poly {
    fn constant(v: ExactValue) -> Poly {
        let mut terms = BTreeMap::new();
        if !v.is_zero() {
            terms.insert(Vec::new(), v);
        }
        Poly(terms)
    }

    fn sym(col: usize) -> Poly {
        Poly(BTreeMap::from([(vec![col], ExactValue::from_int(1))]))
    }

    fn add_term(&mut self, mono: Mono, v: ExactValue) -> Option<()> {
        match self.0.entry(mono) {
            Entry::Occupied(mut o) => {
                let sum = o.get().add(&v)?;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
            Entry::Vacant(slot) => {
                if !v.is_zero() {
                    slot.insert(v);
                }
            }
        }
        Some(())
    }

    fn add(mut self, other: Poly) -> Option<Poly> {
        for (mono, v) in other.0 {
            self.add_term(mono, v)?;
        }
        Some(self)
    }

    fn neg(mut self) -> Poly {
        for v in self.0.values_mut() {
            *v = v.neg();
        }
        self
    }

    fn mul(self, other: &Poly) -> Option<Poly> {
        let mut out = Poly(BTreeMap::new());
        for (ma, va) in &self.0 {
            for (mb, vb) in &other.0 {
                if ma.len() + mb.len() > 4 {
                    return None;
                }
                let mut mono = ma.clone();
                mono.extend(mb.iter().copied());
                mono.sort_unstable();
                out.add_term(mono, va.mul(vb)?)?;
            }
        }
        Some(out)
    }

    fn scale(mut self, k: &ExactValue) -> Option<Poly> {
        let mut out = BTreeMap::new();
        for (mono, v) in std::mem::take(&mut self.0) {
            let scaled = v.mul(k)?;
            if !scaled.is_zero() {
                out.insert(mono, scaled);
            }
        }
        Some(Poly(out))
    }

    fn as_constant(&self) -> Option<ExactValue> {
        match self.0.len() {
            0 => Some(ExactValue::zero()),
            1 => {
                let (mono, v) = self.0.iter().next().expect("len checked");
                mono.is_empty().then(|| v.clone())
            }
            _ => None,
        }
    }
}

/// Expands an expression into a polynomial, substituting known values as
/// it goes. `None` means the expression leaves the fragment the solver
/// understands (symbolic divisor, symbolic radicand, mixed radicands, or
/// degree above 4).
fn poly_of(
    expr: &Expr<MeasureSymbol>,
    atom: &mut impl FnMut(&MeasureSymbol) -> Option<Atom>,
) -> Option<Poly> {
    match expr {
        Expr::Num(r) => Some(Poly::constant(ExactValue::from_rational(r.clone()))),
        Expr::Sym(s) => match atom(s)? {
            Atom::Value(v) => Some(Poly::constant(v)),
            Atom::Col(col) => Some(Poly::sym(col)),
        },
        Expr::Add(a, b) => poly_of(a, atom)?.add(poly_of(b, atom)?),
        Expr::Sub(a, b) => poly_of(a, atom)?.add(poly_of(b, atom)?.neg()),
        Expr::Mul(a, b) => {
            let b = poly_of(b, atom)?;
            poly_of(a, atom)?.mul(&b)
        }
        Expr::Div(a, b) => {
            let divisor = poly_of(b, atom)?.as_constant()?;
            let inv = divisor.inverse()?;
            poly_of(a, atom)?.scale(&inv)
        }
        Expr::Sqrt(a) => {
            let arg = poly_of(a, atom)?.as_constant()?;
            Some(Poly::constant(arg.sqrt()?))
        }
    }
}

enum Classified {
    Ground(ExactValue),
    /// `sum(coeffs) + constant = 0`.
    Linear {
        coeffs: BTreeMap<usize, BigRational>,
        constant: ExactValue,
    },
    /// `a*x^2 + b*x + c = 0` in the single column `col`.
    Quadratic {
        col: usize,
        a: BigRational,
        b: BigRational,
        c: ExactValue,
    },
    Stuck,
}

fn classify(poly: Poly) -> Classified {
    let mut constant = ExactValue::zero();
    let mut linear: BTreeMap<usize, BigRational> = BTreeMap::new();
    let mut quad: Option<(usize, BigRational)> = None;
    for (mono, v) in poly.0 {
        match mono.len() {
            0 => constant = v,
            1 => {
                let Some(r) = v.as_rational() else {
                    return Classified::Stuck;
                };
                linear.insert(mono[0], r.clone());
            }
            2 if mono[0] == mono[1] => {
                let Some(r) = v.as_rational() else {
                    return Classified::Stuck;
                };
                if quad.replace((mono[0], r.clone())).is_some() {
                    return Classified::Stuck;
                }
            }
            _ => return Classified::Stuck,
        }
    }
    if let Some((col, a)) = quad {
        if linear.keys().any(|&c| c != col) {
            return Classified::Stuck;
        }
        let b = linear
            .remove(&col)
            .unwrap_or_else(BigRational::zero);
        return Classified::Quadratic { col, a, b, c: constant };
    }
    if linear.is_empty() {
        Classified::Ground(constant)
    } else {
        Classified::Linear { coeffs: linear, constant }
    }
}

/// Solves `a*x^2 + b*x + c = 0` for the positive root. `Ok(None)` when the
/// root is not expressible or both roots are positive (ambiguous, so the
/// fact stays pending); `Err` when no positive real root exists.
fn solve_quadratic(
    a: &BigRational,
    b: &BigRational,
    c: &ExactValue,
) -> Result<Option<ExactValue>, String> {
    let b_sq = ExactValue::from_rational(b * b);
    let four_a = BigRational::from_integer(4.into()) * a;
    let Some(disc) = b_sq.sub(&c.scale(&four_a)) else {
        return Ok(None);
    };
    if !disc.is_positive() && !disc.is_zero() {
        return Err("square of a measure came out negative".into());
    }
    let Some(sqrt_disc) = disc.sqrt() else {
        return Ok(None);
    };
    let half = (BigRational::from_integer(2.into()) * a).recip();
    let neg_b = ExactValue::from_rational(-b);
    let Some(r1) = neg_b.add(&sqrt_disc).map(|v| v.scale(&half)) else {
        return Ok(None);
    };
    let Some(r2) = neg_b.sub(&sqrt_disc).map(|v| v.scale(&half)) else {
        return Ok(None);
    };
    match (r1.is_positive(), r2.is_positive()) {
        (true, true) => {
            if r1 == r2 {
                Ok(Some(r1))
            } else {
                Ok(None)
            }
        }
        (true, false) => Ok(Some(r1)),
        (false, true) => Ok(Some(r2)),
        (false, false) => Err("both candidate roots are nonpositive".into()),
    }
}

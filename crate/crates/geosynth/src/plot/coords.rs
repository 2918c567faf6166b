//! Numeric placement of scene points by constraint propagation.
//!
//! Coordinates are found in passes, preferring exact solving over
//! sampling so that every declared constraint is met to floating-point
//! accuracy rather than approximated:
//!
//!   1. any equation with a single unknown is solved directly; the
//!      registry's constraints are at most quadratic per variable, so
//!      evaluating at three probe values recovers the polynomial exactly,
//!   2. otherwise, connected groups of equations that are linear in all
//!      their unknowns go through Gaussian elimination,
//!   3. otherwise the first unsolved coordinate (sorted order) is drawn
//!      uniformly from the canvas interior and propagation resumes.
//!
//! A quadratic with two real roots picks one at random; that is where
//! diagram diversity such as a rhombus bulging up or down comes from. A
//! negative discriminant or a contradicted zero-unknown equation aborts
//! the attempt, and the caller samples a fresh scene.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::PlotOptions;
use crate::formal::{Axis, CoordVar, Equation, Expr, PointRef};

/// Residual at or below this is "satisfied"; the same bound is the
/// acceptance threshold for a finished diagram.
const TOLERANCE: f64 = 1e-6;
/// Coefficients smaller than this are treated as absent.
const COEFF_EPS: f64 = 1e-9;

pub(super) struct Placement {
    pub coords: BTreeMap<PointRef, (f64, f64)>,
    pub residual: f64,
}

pub(super) fn place(
    points: &[PointRef],
    constraints: &[Equation<CoordVar>],
    rng: &mut ChaCha8Rng,
    options: &PlotOptions,
) -> Option<Placement> {
    let mut vars: Vec<CoordVar> = Vec::with_capacity(points.len() * 2);
    for p in points {
        for axis in [Axis::X, Axis::Y] {
            vars.push(CoordVar {
                point: p.clone(),
                axis,
            });
        }
    }
    vars.sort();

    let residuals: Vec<Expr<CoordVar>> = constraints
        .iter()
        .map(|eq| Expr::sub(eq.lhs.clone(), eq.rhs.clone()))
        .collect();
    let mut retired = vec![false; residuals.len()];
    let mut values: BTreeMap<CoordVar, f64> = BTreeMap::new();

    loop {
        let mut progress = false;
        for (i, expr) in residuals.iter().enumerate() {
            if retired[i] {
                continue;
            }
            let unknowns = unknowns_of(expr, &values);
            match unknowns.len() {
                0 => {
                    if eval(expr, &values).abs() > TOLERANCE {
                        return None;
                    }
                    retired[i] = true;
                    progress = true;
                }
                1 => {
                    let var = unknowns.into_iter().next().unwrap();
                    match solve_single(expr, &var, &values, rng) {
                        Single::Solved(v) => {
                            values.insert(var, v);
                            retired[i] = true;
                            progress = true;
                        }
                        Single::Vacuous => {
                            retired[i] = true;
                            progress = true;
                        }
                        Single::NoRoot => return None,
                    }
                }
                _ => {}
            }
        }
        if progress {
            continue;
        }

        if solve_linear_groups(&residuals, &retired, &mut values) {
            continue;
        }

        match vars.iter().find(|v| !values.contains_key(*v)) {
            Some(var) => {
                let margin = options.min_separation.min(options.canvas / 4.0);
                let coord = margin + rng.gen::<f64>() * (options.canvas - 2.0 * margin);
                values.insert(var.clone(), coord);
            }
            None => break,
        }
    }

    let residual = residuals
        .iter()
        .map(|e| eval(e, &values).abs())
        .fold(0.0_f64, f64::max);
    if residual > TOLERANCE {
        return None;
    }

    let mut coords = BTreeMap::new();
    for p in points {
        let x = values[&CoordVar {
            point: p.clone(),
            axis: Axis::X,
        }];
        let y = values[&CoordVar {
            point: p.clone(),
            axis: Axis::Y,
        }];
        coords.insert(p.clone(), (x, y));
    }
    Some(Placement { coords, residual })
}

fn unknowns_of(expr: &Expr<CoordVar>, values: &BTreeMap<CoordVar, f64>) -> BTreeSet<CoordVar> {
    let mut out = BTreeSet::new();
    expr.for_each_sym(&mut |s| {
        if !values.contains_key(s) {
            out.insert(s.clone());
        }
    });
    out
}

fn eval(expr: &Expr<CoordVar>, values: &BTreeMap<CoordVar, f64>) -> f64 {
    expr.eval_f64(&|s| values.get(s).copied())
        .expect("every variable of the expression is assigned")
}

enum Single {
    Solved(f64),
    /// The variable cancels out and the rest is already satisfied.
    Vacuous,
    NoRoot,
}

/// Solves one equation for one variable. Constraints are polynomial with
/// degree at most two in any single coordinate, so three probes pin the
/// quadratic exactly.
fn solve_single(
    expr: &Expr<CoordVar>,
    var: &CoordVar,
    values: &BTreeMap<CoordVar, f64>,
    rng: &mut ChaCha8Rng,
) -> Single {
    let probe = |t: f64| {
        expr.eval_f64(&|s| {
            if s == var {
                Some(t)
            } else {
                values.get(s).copied()
            }
        })
        .expect("only `var` is unassigned")
    };
    let g0 = probe(0.0);
    let g1 = probe(1.0);
    let gm = probe(-1.0);
    let a = (g1 + gm) / 2.0 - g0;
    let b = (g1 - gm) / 2.0;
    let c = g0;

    if a.abs() < COEFF_EPS {
        if b.abs() < COEFF_EPS {
            return if c.abs() <= TOLERANCE {
                Single::Vacuous
            } else {
                Single::NoRoot
            };
        }
        return Single::Solved(-c / b);
    }

    let disc = b * b - 4.0 * a * c;
    if disc < -COEFF_EPS {
        return Single::NoRoot;
    }
    let s = disc.max(0.0).sqrt();
    let first = (-b + s) / (2.0 * a);
    let second = (-b - s) / (2.0 * a);
    if (first - second).abs() < COEFF_EPS || rng.gen_bool(0.5) {
        Single::Solved(first)
    } else {
        Single::Solved(second)
    }
}

/// Degree of the expression in its unassigned variables, or None when an
/// unknown sits under a square root or in a denominator.
fn degree(expr: &Expr<CoordVar>, values: &BTreeMap<CoordVar, f64>) -> Option<usize> {
    match expr {
        Expr::Num(_) => Some(0),
        Expr::Sym(s) => Some(if values.contains_key(s) { 0 } else { 1 }),
        Expr::Add(a, b) | Expr::Sub(a, b) => Some(degree(a, values)?.max(degree(b, values)?)),
        Expr::Mul(a, b) => Some(degree(a, values)? + degree(b, values)?),
        Expr::Div(a, b) => {
            if degree(b, values)? == 0 {
                degree(a, values)
            } else {
                None
            }
        }
        Expr::Sqrt(a) => {
            if degree(a, values)? == 0 {
                Some(0)
            } else {
                None
            }
        }
    }
}

/// Finds connected groups of pending equations that are linear in all
/// their unknowns and solves the fully determined ones by elimination.
/// Returns true when any variable got a value.
fn solve_linear_groups(
    residuals: &[Expr<CoordVar>],
    retired: &[bool],
    values: &mut BTreeMap<CoordVar, f64>,
) -> bool {
    struct Row {
        unknowns: BTreeSet<CoordVar>,
        index: usize,
    }
    let rows: Vec<Row> = residuals
        .iter()
        .enumerate()
        .filter(|(i, e)| {
            !retired[*i] && degree(e, values) == Some(1) && !unknowns_of(e, values).is_empty()
        })
        .map(|(index, e)| Row {
            unknowns: unknowns_of(e, values),
            index,
        })
        .collect();
    if rows.is_empty() {
        return false;
    }

    // Group rows into connected components over shared unknowns.
    let mut component = vec![usize::MAX; rows.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for start in 0..rows.len() {
        if component[start] != usize::MAX {
            continue;
        }
        let gid = groups.len();
        let mut queue = vec![start];
        let mut members = Vec::new();
        component[start] = gid;
        while let Some(r) = queue.pop() {
            members.push(r);
            for (other, row) in rows.iter().enumerate() {
                if component[other] == usize::MAX
                    && !row.unknowns.is_disjoint(&rows[r].unknowns)
                {
                    component[other] = gid;
                    queue.push(other);
                }
            }
        }
        members.sort();
        groups.push(members);
    }

    let mut assigned = false;
    for members in groups {
        let mut unknowns: BTreeSet<CoordVar> = BTreeSet::new();
        for &m in &members {
            unknowns.extend(rows[m].unknowns.iter().cloned());
        }
        let order: Vec<CoordVar> = unknowns.into_iter().collect();
        if members.len() < order.len() {
            continue;
        }
        // Row coefficients by probing: residuals are linear here, so the
        // unit probes are exact.
        let mut matrix: Vec<Vec<f64>> = Vec::with_capacity(members.len());
        for &m in &members {
            let expr = &residuals[rows[m].index];
            let base = expr
                .eval_f64(&|s| values.get(s).copied().or(Some(0.0)))
                .expect("all symbols resolved");
            let mut row = Vec::with_capacity(order.len() + 1);
            for v in &order {
                let shifted = expr
                    .eval_f64(&|s| {
                        if s == v {
                            Some(1.0)
                        } else {
                            values.get(s).copied().or(Some(0.0))
                        }
                    })
                    .expect("all symbols resolved");
                row.push(shifted - base);
            }
            row.push(-base);
            matrix.push(row);
        }
        if let Some(solution) = gaussian(&mut matrix, order.len()) {
            for (v, val) in order.iter().zip(solution) {
                values.insert(v.clone(), val);
            }
            assigned = true;
        }
    }
    assigned
}

/// Solves `matrix * x = rhs` (rhs stored as the last column) for `n`
/// unknowns with partial pivoting. None when the system is rank
/// deficient; extra consistent rows are fine.
fn gaussian(matrix: &mut [Vec<f64>], n: usize) -> Option<Vec<f64>> {
    let m = matrix.len();
    for col in 0..n {
        let pivot = (col..m).max_by(|&a, &b| {
            matrix[a][col]
                .abs()
                .total_cmp(&matrix[b][col].abs())
        })?;
        if matrix[pivot][col].abs() < COEFF_EPS {
            return None;
        }
        matrix.swap(col, pivot);
        for row in 0..m {
            if row == col {
                continue;
            }
            let factor = matrix[row][col] / matrix[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..=n {
                let sub = factor * matrix[col][k];
                matrix[row][k] -= sub;
            }
        }
    }
    Some((0..n).map(|i| matrix[i][n] / matrix[i][i]).collect())
}

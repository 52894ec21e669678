//! Membership in absolutely convex hulls by linear programming, with
//! certificates checked in plain arithmetic.
//!
//! Complex data are realified (`(re, im)` per coordinate) and the hull is taken
//! with real coefficients; membership in that hull implies membership in the
//! complex absolutely convex hull. Distances are max-abs distances between
//! realified vectors.

use microlp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::vector::Vector;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HullCertificate {
    /// `v ~ sum_k beta_k w_k` with `sum_k |beta_k| <= 1`.
    Member { coefficients: Vec<f64>, residual: f64 },
    /// A functional `y` (on realified vectors, `|y|_1 <= 1`) with
    /// `<y, v> - max_k |<y, w_k>| = margin`, so that the max-abs distance from
    /// `v` to the hull is at least `margin`.
    Separated { functional: Vec<f64>, margin: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HullVerdict {
    pub member: bool,
    pub certificate: HullCertificate,
}

impl HullVerdict {
    /// Recomputes the certificate against the data: the reconstruction error
    /// for members, the separation margin otherwise.
    pub fn verify(&self, v: &Vector, generators: &[Vector]) -> f64 {
        let target = v.realify();
        let gens: Vec<Vec<f64>> = generators.iter().map(Vector::realify).collect();
        match &self.certificate {
            HullCertificate::Member { coefficients, .. } => residual(&target, &gens, coefficients),
            HullCertificate::Separated { functional, .. } => margin(&target, &gens, functional),
        }
    }
}

fn lp_error(e: microlp::Error) -> Error {
    Error::Solver(format!("{e:?}"))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn residual(target: &[f64], gens: &[Vec<f64>], beta: &[f64]) -> f64 {
    (0..target.len())
        .map(|c| (gens.iter().zip(beta).map(|(w, b)| b * w[c]).sum::<f64>() - target[c]).abs())
        .fold(0.0, f64::max)
}

fn margin(target: &[f64], gens: &[Vec<f64>], y: &[f64]) -> f64 {
    dot(y, target) - gens.iter().map(|w| dot(y, w).abs()).fold(0.0, f64::max)
}

fn realified(v: &Vector, generators: &[Vector]) -> Result<(Vec<f64>, Vec<Vec<f64>>, f64)> {
    if generators.is_empty() {
        return invalid("hull of an empty generator set");
    }
    for w in generators {
        w.check_dim(v.dim())?;
    }
    if !v.is_finite() || generators.iter().any(|w| !w.is_finite()) {
        return invalid("non-finite data in hull membership");
    }
    let target = v.realify();
    let gens: Vec<Vec<f64>> = generators.iter().map(Vector::realify).collect();
    let scale = gens.iter().chain(std::iter::once(&target)).flatten().fold(0.0f64, |m, a| m.max(a.abs()));
    Ok((target, gens, if scale > 0.0 { scale } else { 1.0 }))
}

/// `min sum |beta_k|` subject to `sum beta_k w_k = v`, or `None` when `v` is
/// outside the span.
fn gauge_lp(target: &[f64], gens: &[Vec<f64>], scale: f64) -> Result<Option<Vec<f64>>> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<(Variable, Variable)> = gens
        .iter()
        .map(|_| (lp.add_var(1.0, (0.0, f64::INFINITY)), lp.add_var(1.0, (0.0, f64::INFINITY))))
        .collect();
    for c in 0..target.len() {
        let expr: Vec<(Variable, f64)> = gens
            .iter()
            .zip(&vars)
            .flat_map(|(w, (p, n))| [(*p, w[c] / scale), (*n, -w[c] / scale)])
            .filter(|(_, a)| *a != 0.0)
            .collect();
        lp.add_constraint(expr, ComparisonOp::Eq, target[c] / scale);
    }
    match lp.solve() {
        Ok(outcome) => {
            let sol = outcome.into_solution().map_err(|_| Error::Solver("interrupted".into()))?;
            Ok(Some(vars.iter().map(|(p, n)| sol.var_value(*p) - sol.var_value(*n)).collect()))
        }
        Err(microlp::Error::Infeasible) => Ok(None),
        Err(e) => Err(lp_error(e)),
    }
}

/// Re-solves the equality system on the support of `beta` so that the
/// reconstruction is exact to rounding.
fn polish(target: &[f64], gens: &[Vec<f64>], beta: &[f64]) -> Vec<f64> {
    let big = beta.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    let support: Vec<usize> = (0..beta.len()).filter(|&k| beta[k].abs() > 1e-12 * big.max(1e-300)).collect();
    if support.is_empty() {
        return beta.to_vec();
    }
    let a = DMatrix::from_fn(target.len(), support.len(), |c, j| gens[support[j]][c]);
    let rhs = DVector::from_column_slice(target);
    let Ok(sol) = a.clone().svd(true, true).solve(&rhs, 1e-14) else {
        return beta.to_vec();
    };
    let mut out = vec![0.0; beta.len()];
    for (j, &k) in support.iter().enumerate() {
        out[k] = sol[j];
    }
    let keep = |b: &[f64]| residual(target, gens, b);
    if keep(&out) <= keep(beta) && out.iter().map(|b| b.abs()).sum::<f64>() <= beta.iter().map(|b| b.abs()).sum::<f64>() * (1.0 + 1e-9) {
        out
    } else {
        beta.to_vec()
    }
}

/// `max <y, v> - u` subject to `|<y, w_k>| <= u`, `|y|_1 <= 1`.
fn separation_lp(target: &[f64], gens: &[Vec<f64>], scale: f64) -> Result<Vec<f64>> {
    let n = target.len();
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let ys: Vec<(Variable, Variable)> = (0..n)
        .map(|c| {
            let t = target[c] / scale;
            (lp.add_var(t, (0.0, 1.0)), lp.add_var(-t, (0.0, 1.0)))
        })
        .collect();
    let u = lp.add_var(-1.0, (0.0, f64::INFINITY));
    lp.add_constraint(ys.iter().flat_map(|(p, m)| [(*p, 1.0), (*m, 1.0)]).collect::<Vec<_>>(), ComparisonOp::Le, 1.0);
    for w in gens {
        let mut expr: Vec<(Variable, f64)> = (0..n)
            .flat_map(|c| [(ys[c].0, w[c] / scale), (ys[c].1, -w[c] / scale)])
            .filter(|(_, a)| *a != 0.0)
            .collect();
        expr.push((u, -1.0));
        lp.add_constraint(expr.clone(), ComparisonOp::Le, 0.0);
        let last = expr.len() - 1;
        for t in &mut expr[..last] {
            t.1 = -t.1;
        }
        lp.add_constraint(expr, ComparisonOp::Le, 0.0);
    }
    let sol = lp.solve().map_err(lp_error)?.into_solution().map_err(|_| Error::Solver("interrupted".into()))?;
    let mut y: Vec<f64> = ys.iter().map(|(p, m)| sol.var_value(*p) - sol.var_value(*m)).collect();
    let l1: f64 = y.iter().map(|a| a.abs()).sum();
    if l1 > 1.0 {
        y.iter_mut().for_each(|a| *a /= l1);
    }
    Ok(y)
}

/// Decides whether `v` lies in `{ sum_k beta_k w_k : sum_k |beta_k| <= 1 }` up
/// to max-abs distance `tol`.
pub fn hull_membership(v: &Vector, generators: &[Vector], tol: f64) -> Result<HullVerdict> {
    let (target, gens, scale) = realified(v, generators)?;
    if target.iter().all(|a| *a == 0.0) {
        let coefficients = vec![0.0; gens.len()];
        return Ok(HullVerdict { member: true, certificate: HullCertificate::Member { coefficients, residual: 0.0 } });
    }
    if let Some(beta) = gauge_lp(&target, &gens, scale)? {
        let mut beta = polish(&target, &gens, &beta);
        let mass: f64 = beta.iter().map(|b| b.abs()).sum();
        if mass > 1.0 {
            beta.iter_mut().for_each(|b| *b /= mass);
        }
        let r = residual(&target, &gens, &beta);
        if r <= tol {
            return Ok(HullVerdict {
                member: true,
                certificate: HullCertificate::Member { coefficients: beta, residual: r },
            });
        }
    }
    let y = separation_lp(&target, &gens, scale)?;
    let m = margin(&target, &gens, &y);
    Ok(HullVerdict { member: false, certificate: HullCertificate::Separated { functional: y, margin: m } })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZonotopeFit {
    /// Coefficients `c_j = a_j - b_j` with `0 <= a_j <= lambda`,
    /// `0 <= b_j <= mu`, `lambda + mu <= 1`.
    pub coefficients: Vec<f64>,
    pub lambda: f64,
    pub mu: f64,
    /// Max-abs distance `|sum_j c_j D_j - v|`, recomputed from the coefficients.
    pub residual: f64,
}

/// Nearest point of the absolutely convex hull of all subset sums of `parts`,
/// `{ sum_j (a_j - b_j) D_j : 0 <= a_j <= lambda, 0 <= b_j <= mu,
/// lambda + mu <= 1 }`, in the max-abs metric.
pub fn zonotope_fit(v: &Vector, parts: &[Vector]) -> Result<ZonotopeFit> {
    let (target, gens, scale) = realified(v, parts)?;
    let n = target.len();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let s = lp.add_var(1.0, (0.0, f64::INFINITY));
    let lambda = lp.add_var(0.0, (0.0, 1.0));
    let mu = lp.add_var(0.0, (0.0, 1.0));
    lp.add_constraint([(lambda, 1.0), (mu, 1.0)], ComparisonOp::Le, 1.0);
    let ab: Vec<(Variable, Variable)> =
        gens.iter().map(|_| (lp.add_var(0.0, (0.0, 1.0)), lp.add_var(0.0, (0.0, 1.0)))).collect();
    for (a, b) in &ab {
        lp.add_constraint([(*a, 1.0), (lambda, -1.0)], ComparisonOp::Le, 0.0);
        lp.add_constraint([(*b, 1.0), (mu, -1.0)], ComparisonOp::Le, 0.0);
    }
    for c in 0..n {
        let lin: Vec<(Variable, f64)> = gens
            .iter()
            .zip(&ab)
            .flat_map(|(w, (a, b))| [(*a, w[c] / scale), (*b, -w[c] / scale)])
            .filter(|(_, x)| *x != 0.0)
            .collect();
        let mut upper = lin.clone();
        upper.push((s, -1.0));
        lp.add_constraint(upper, ComparisonOp::Le, target[c] / scale);
        let mut lower = lin;
        lower.push((s, 1.0));
        lp.add_constraint(lower, ComparisonOp::Ge, target[c] / scale);
    }
    let sol = lp.solve().map_err(lp_error)?.into_solution().map_err(|_| Error::Solver("interrupted".into()))?;
    let (mut l, mut m) = (sol.var_value(lambda).max(0.0), sol.var_value(mu).max(0.0));
    if l + m > 1.0 {
        let t = l + m;
        l /= t;
        m /= t;
    }
    let coefficients: Vec<f64> = ab
        .iter()
        .map(|(a, b)| sol.var_value(*a).clamp(0.0, l) - sol.var_value(*b).clamp(0.0, m))
        .collect();
    let residual = residual(&target, &gens, &coefficients);
    Ok(ZonotopeFit { coefficients, lambda: l, mu: m, residual })
}

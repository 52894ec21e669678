//! Seeded random functions and functionals for tests and sampled checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::function::PiecewiseFunction;
use crate::poly::CPoly;
use crate::space::{DualVector, Field};
use crate::vector::{Scalar, Vector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn scalar<R: Rng>(rng: &mut R, field: Field) -> Scalar {
    match field {
        Field::Real => Scalar::new(rng.gen_range(-1.0..=1.0), 0.0),
        Field::Complex => Scalar::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)),
    }
}

/// Entries uniform in `[-1, 1]` (both parts for the complex field).
pub fn vector<R: Rng>(rng: &mut R, dim: usize, field: Field) -> Vector {
    Vector::from_scalars((0..dim).map(|_| scalar(rng, field)).collect())
}

pub fn dual<R: Rng>(rng: &mut R, dim: usize, field: Field) -> DualVector {
    DualVector(vector(rng, dim, field))
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return invalid(format!("need a finite interval with a < b, got [{a}, {b}]"));
    }
    Ok(())
}

/// `count` distinct sorted points strictly inside `(a, b)`.
pub fn interior_points<R: Rng>(rng: &mut R, a: f64, b: f64, count: usize) -> Vec<f64> {
    let mut pts: Vec<f64> = Vec::with_capacity(count);
    while pts.len() < count {
        let t = a + (b - a) * rng.gen_range(0.02..0.98);
        if pts.iter().all(|s| (s - t).abs() > 1e-3 * (b - a)) {
            pts.push(t);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts
}

/// Right-continuous step function with `jumps` jumps inside `(a, b)`.
pub fn step<R: Rng>(rng: &mut R, a: f64, b: f64, dim: usize, jumps: usize, field: Field) -> Result<PiecewiseFunction> {
    check_interval(a, b)?;
    let initial = vector(rng, dim, field);
    let js: Vec<(f64, Vector)> =
        interior_points(rng, a, b, jumps).into_iter().map(|t| (t, vector(rng, dim, field))).collect();
    PiecewiseFunction::step(a, b, &initial, &js)
}

/// One polynomial of the given degree per coordinate, coefficients of the
/// local variable `(t - a) / (b - a)` uniform in `[-1, 1]`.
pub fn polynomial<R: Rng>(rng: &mut R, a: f64, b: f64, dim: usize, degree: usize, field: Field) -> Result<PiecewiseFunction> {
    check_interval(a, b)?;
    let coords = (0..dim)
        .map(|_| {
            let local: Vec<Scalar> = (0..=degree).map(|_| scalar(rng, field)).collect();
            to_global(&local, a, b - a)
        })
        .collect();
    PiecewiseFunction::polynomial(a, b, coords)
}

/// `q((t - u) / h)` expanded in powers of `t`.
fn to_global(local: &[Scalar], u: f64, h: f64) -> CPoly {
    // Horner in the polynomial ring: acc = acc * (t - u) / h + c
    let lin = [Scalar::new(-u / h, 0.0), Scalar::new(1.0 / h, 0.0)];
    let mut acc: Vec<Scalar> = Vec::new();
    for &c in local.iter().rev() {
        let mut next = vec![Scalar::new(0.0, 0.0); acc.len() + 1];
        for (k, &z) in acc.iter().enumerate() {
            next[k] += z * lin[0];
            next[k + 1] += z * lin[1];
        }
        next[0] += c;
        acc = next;
    }
    CPoly::new(acc)
}

/// Piecewise cubic Hermite interpolant through `values` at `knots` with the
/// given slopes.
pub fn hermite(knots: &[f64], values: &[Vec<Scalar>], slopes: &[Vec<Scalar>]) -> Result<PiecewiseFunction> {
    if knots.len() < 2 || values.len() != knots.len() || slopes.len() != knots.len() {
        return invalid("hermite data need matching knots, values and slopes");
    }
    let pieces = knots
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let h = w[1] - w[0];
            (0..values[i].len())
                .map(|k| {
                    let (p0, p1) = (values[i][k], values[i + 1][k]);
                    let (m0, m1) = (slopes[i][k] * h, slopes[i + 1][k] * h);
                    // p(s) on s in [0, 1]
                    let c = [p0, m0, 3.0 * (p1 - p0) - 2.0 * m0 - m1, 2.0 * (p0 - p1) + m0 + m1];
                    to_global(&c, w[0], h)
                })
                .collect()
        })
        .collect();
    let end = Vector::from_scalars(values.last().expect("nonempty").clone());
    PiecewiseFunction::with_end_value(knots.to_vec(), pieces, end)
}

/// Continuous piecewise cubic with `pieces` cells of jittered widths, knot
/// values and slopes in `[-1, 1]`.
pub fn continuous<R: Rng>(rng: &mut R, a: f64, b: f64, dim: usize, pieces: usize, field: Field) -> Result<PiecewiseFunction> {
    check_interval(a, b)?;
    if pieces < 1 {
        return invalid("need at least one piece");
    }
    // jittered uniform knots keep every cell at least half the nominal width
    let h = (b - a) / pieces as f64;
    let mut knots: Vec<f64> = (0..pieces).map(|k| a + h * (k as f64 + if k == 0 { 0.0 } else { rng.gen_range(-0.25..0.25) })).collect();
    knots.push(b);
    let draw = |rng: &mut R| (0..knots.len()).map(|_| (0..dim).map(|_| scalar(rng, field)).collect()).collect::<Vec<_>>();
    let values = draw(rng);
    let slopes = draw(rng);
    hermite(&knots, &values, &slopes)
}

/// Scalar continuous piecewise cubic through random knot values, divided by
/// its exact sup-norm when that exceeds 1.
pub fn unit_ball_function<R: Rng>(rng: &mut R, a: f64, b: f64, pieces: usize, field: Field) -> Result<PiecewiseFunction> {
    let g = continuous(rng, a, b, 1, pieces, field)?;
    let sup = g.sup_norm();
    Ok(if sup > 1.0 { g.scale(Scalar::new(1.0 / sup, 0.0)) } else { g })
}

/// Random right-continuous integrator of one of four shapes (step,
/// polynomial, continuous, continuous plus step), chosen by `kind % 4`.
pub fn integrator<R: Rng>(rng: &mut R, kind: usize, a: f64, b: f64, dim: usize, field: Field) -> Result<PiecewiseFunction> {
    match kind % 4 {
        0 => {
            let m = rng.gen_range(1..=6);
            step(rng, a, b, dim, m, field)
        }
        1 => {
            let d = rng.gen_range(1..=4);
            polynomial(rng, a, b, dim, d, field)
        }
        2 => {
            let n = rng.gen_range(1..=4);
            continuous(rng, a, b, dim, n, field)
        }
        _ => {
            let n = rng.gen_range(1..=3);
            let m = rng.gen_range(1..=3);
            continuous(rng, a, b, dim, n, field)?.add(&step(rng, a, b, dim, m, field)?)
        }
    }
}

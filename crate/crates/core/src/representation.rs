//! The operator `Tg = ∫ g dx` on continuous functions, the four-part
//! decomposition of its unit ball, containment of the image in the absolutely
//! convex hull of the increment set, and the interval measure of an
//! integrator.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::function::PiecewiseFunction;
use crate::hull::{hull_membership, zonotope_fit, HullCertificate};
use crate::poly::{CPoly, Poly};
use crate::sample;
use crate::semivariation::{e_set, wcs_check, ESetMode, WcsReport};
use crate::space::{DualVector, SpaceModel};
use crate::stieltjes::{integrate_g_dx, IntegralOptions, IntegralResult};
use crate::vector::{re, PairwiseSum, Scalar, Vector};

/// Grid resolution used for the weak compactness check of non-step
/// integrators.
const WCS_GRID: usize = 16;

#[derive(Clone, Debug)]
pub struct StieltjesOperator {
    space: SpaceModel,
    integrator: PiecewiseFunction,
    wcs: WcsReport,
}

impl StieltjesOperator {
    pub fn new(space: SpaceModel, integrator: PiecewiseFunction) -> Result<Self> {
        if let Some(t) = integrator.right_discontinuity() {
            return Err(Error::NotRightContinuous { t });
        }
        let wcs = wcs_check(&space, &integrator, WCS_GRID)?;
        if !wcs.weakly_compact {
            return Err(Error::HypothesesFailed("integrator semivariation is not weakly compact".into()));
        }
        Ok(StieltjesOperator { space, integrator, wcs })
    }

    pub fn space(&self) -> &SpaceModel {
        &self.space
    }

    pub fn integrator(&self) -> &PiecewiseFunction {
        &self.integrator
    }

    pub fn domain(&self) -> (f64, f64) {
        self.integrator.domain()
    }

    pub fn wcs(&self) -> &WcsReport {
        &self.wcs
    }

    /// `∫ g dx` with the integration diagnostics.
    pub fn apply_detailed(&self, g: &PiecewiseFunction, tol: f64) -> Result<IntegralResult> {
        g.require_scalar()?;
        self.integrator.same_domain(g)?;
        if !(tol > 0.0) {
            return invalid("tolerance must be positive");
        }
        if !g.is_continuous() {
            return Err(Error::Discontinuous { points: g.discontinuities() });
        }
        let opts = IntegralOptions { tol, ..Default::default() };
        integrate_g_dx(&self.space, g, &self.integrator, &opts)
    }

    pub fn apply(&self, g: &PiecewiseFunction, tol: f64) -> Result<Vector> {
        Ok(self.apply_detailed(g, tol)?.value)
    }
}

/// Lifts a piece that dips below zero by rounding near a root.
fn nonnegative(p: Poly, lo: f64, hi: f64) -> CPoly {
    let mut q = p;
    for _ in 0..4 {
        let (min, _) = q.range(lo, hi);
        if min >= 0.0 {
            break;
        }
        q = q.add(&Poly::constant(-min));
    }
    CPoly::from_real(q.coefficients())
}

/// `(max(p, 0), max(-p, 0))` of a real polynomial on one sign-constant cell.
fn signed_parts(p: &Poly, lo: f64, hi: f64) -> (CPoly, CPoly) {
    let zero = CPoly::default();
    let mid = p.eval(0.5 * (lo + hi));
    if mid > 0.0 {
        (nonnegative(p.clone(), lo, hi), zero)
    } else if mid < 0.0 {
        let neg = Poly::new(p.coefficients().iter().map(|c| -c).collect());
        (zero, nonnegative(neg, lo, hi))
    } else {
        (zero.clone(), zero)
    }
}

/// Positive and negative parts of a real scalar function given piecewise by
/// `part`, split at the real roots of every piece.
fn split_parts(g: &PiecewiseFunction, part: impl Fn(&CPoly) -> Poly, value: impl Fn(Scalar) -> f64) -> Result<(PiecewiseFunction, PiecewiseFunction)> {
    let bps = g.breakpoints();
    let (mut points, mut pos, mut neg) = (vec![bps[0]], Vec::new(), Vec::new());
    let (mut pos_vals, mut neg_vals) = (Vec::new(), Vec::new());
    let push_val = |pv: &mut Vec<Vector>, nv: &mut Vec<Vector>, v: f64| {
        pv.push(Vector::scalar(re(v.max(0.0))));
        nv.push(Vector::scalar(re((-v).max(0.0))));
    };
    push_val(&mut pos_vals, &mut neg_vals, value(g.values()[0][0]));
    for (i, piece) in g.pieces().iter().enumerate() {
        let (lo, hi) = (bps[i], bps[i + 1]);
        let p = part(&piece[0]);
        let mut cuts = vec![lo];
        if !p.is_zero() {
            cuts.extend(p.roots_in(lo, hi).into_iter().filter(|r| *r > lo && *r < hi));
        }
        cuts.push(hi);
        cuts.dedup();
        for (j, w) in cuts.windows(2).enumerate() {
            let (u, v) = signed_parts(&p, w[0], w[1]);
            pos.push(vec![u]);
            neg.push(vec![v]);
            points.push(w[1]);
            let at = if j + 2 == cuts.len() { value(g.values()[i + 1][0]) } else { p.eval(w[1]) };
            push_val(&mut pos_vals, &mut neg_vals, at);
        }
    }
    Ok((
        PiecewiseFunction::with_values(points.clone(), pos, pos_vals)?,
        PiecewiseFunction::with_values(points, neg, neg_vals)?,
    ))
}

/// `g = g0 - g2 + i (g1 - g3)` with `0 <= g_r <= 1`: positive and negative
/// parts of the real and imaginary parts.
pub fn decompose(g: &PiecewiseFunction) -> Result<[PiecewiseFunction; 4]> {
    g.require_scalar()?;
    let sup = g.sup_norm();
    if sup > 1.0 + 1e-12 {
        return Err(Error::SupNormExceeded(sup));
    }
    let (g0, g2) = split_parts(g, CPoly::re, |z| z.re)?;
    let (g1, g3) = split_parts(g, CPoly::im, |z| z.im)?;
    Ok([g0, g1, g2, g3])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbelReport {
    /// `sum_i g_i D_i`
    pub lhs: Vector,
    /// `sum_s c_s (D_{i_s} + ... + D_{i_n})` with `g_{i_1} <= ... <= g_{i_n}`.
    pub rhs: Vector,
    pub gap: f64,
    /// Ascending order of the values.
    pub order: Vec<usize>,
    /// `c_1 = g_{i_1}`, `c_s = g_{i_s} - g_{i_{s-1}}`.
    pub coefficients: Vec<f64>,
    /// Tail sums `D_{i_s} + ... + D_{i_n}`, all members of the increment set.
    pub tails: Vec<Vector>,
    pub coefficient_sum: f64,
}

/// Summation by parts of `sum_i g_i D_i` after sorting the values.
pub fn abel_identity_check(g_values: &[f64], increments: &[Vector]) -> Result<AbelReport> {
    if g_values.len() != increments.len() {
        return invalid(format!("{} values for {} increments", g_values.len(), increments.len()));
    }
    if g_values.is_empty() {
        return invalid("need at least one term");
    }
    if g_values.iter().any(|g| !(0.0..=1.0).contains(g)) {
        return invalid("values must lie in [0, 1]");
    }
    let dim = increments[0].dim();
    for d in increments {
        d.check_dim(dim)?;
    }
    let mut lhs = PairwiseSum::new(dim);
    for (g, d) in g_values.iter().zip(increments) {
        lhs.push_scaled(re(*g), d);
    }
    let lhs = lhs.finish();
    let n = g_values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| g_values[i].total_cmp(&g_values[j]));
    let coefficients: Vec<f64> =
        (0..n).map(|s| g_values[order[s]] - if s == 0 { 0.0 } else { g_values[order[s - 1]] }).collect();
    let mut tails = vec![Vector::zeros(dim); n];
    let mut acc = Vector::zeros(dim);
    for s in (0..n).rev() {
        acc += &increments[order[s]];
        tails[s] = acc.clone();
    }
    let mut rhs = PairwiseSum::new(dim);
    for (c, t) in coefficients.iter().zip(&tails) {
        rhs.push_scaled(re(*c), t);
    }
    let rhs = rhs.finish();
    let gap = lhs.distance_max(&rhs);
    let coefficient_sum = coefficients.iter().sum();
    Ok(AbelReport { lhs, rhs, gap, order, coefficients, tails, coefficient_sum })
}

/// Per-coordinate bound on `|∫_(u,v] (g - c) dx|` over `0 <= g, c <= 1`
/// with `c` the mean of `g`, summed over the cells of `grid`.
fn grid_allowance(x: &PiecewiseFunction, grid: &[f64]) -> f64 {
    let bps = x.breakpoints();
    let jumps = x.jump_points();
    let mut per_coord = vec![0.0; x.dim()];
    for w in grid.windows(2) {
        let (u, v) = (w[0], w[1]);
        let h = v - u;
        let inner: Vec<f64> = bps.iter().copied().filter(|t| *t > u && *t < v).collect();
        let cell_jumps: Vec<&Vector> = jumps.iter().filter(|(t, _)| *t > u && *t <= v).map(|(_, j)| j).collect();
        let mut cuts = vec![u];
        cuts.extend(&inner);
        cuts.push(v);
        for (k, e) in per_coord.iter_mut().enumerate() {
            let mut var: f64 = cell_jumps.iter().map(|j| j[k].norm()).sum();
            for c in cuts.windows(2) {
                var += x.piece(x.locate(0.5 * (c[0] + c[1])))[k].variation(c[0], c[1]);
            }
            let smooth = if inner.is_empty() && cell_jumps.is_empty() {
                let q = &x.piece(x.locate(0.5 * (u + v)))[k];
                q.derivative().derivative().sup_abs(u, v) * h * h / 4.0
            } else {
                f64::INFINITY
            };
            *e += var.min(smooth);
        }
    }
    per_coord.into_iter().fold(0.0, f64::max)
}

fn grid_increments(x: &PiecewiseFunction, r: usize) -> Vec<Vector> {
    let (a, b) = x.domain();
    let pts: Vec<f64> = (0..=r).map(|k| if k == r { b } else { a + (b - a) * k as f64 / r as f64 }).collect();
    let vals: Vec<Vector> = pts.iter().map(|&t| x.evaluate_unchecked(t)).collect();
    vals.windows(2).map(|w| &w[1] - &w[0]).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HullMode {
    /// Explicit increment set of a step integrator.
    Exact { generators: usize },
    /// Subset sums of the jumps of a step integrator, as a zonotope.
    ExactZonotope { jumps: usize },
    /// Grid increments with a certified discretization allowance.
    Grid { resolution: usize, allowance: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartCheck {
    pub part: usize,
    pub image: Vector,
    pub member: bool,
    /// Max-abs distance from the image to the hull (an upper bound when
    /// `member`, a certified lower bound otherwise).
    pub distance: f64,
    /// Recomputed reconstruction error of the membership certificate.
    pub reconstruction_error: f64,
    pub mode: HullMode,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImageWitness {
    pub sample: usize,
    pub function: PiecewiseFunction,
    pub parts: Vec<PartCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImageCheckReport {
    pub verdict: bool,
    pub samples: usize,
    pub parts_checked: usize,
    pub max_reconstruction_error: f64,
    /// The failing sample, or the one with the largest reconstruction error.
    pub worst: Option<ImageWitness>,
}

struct HullOracle {
    exact_set: Option<Vec<Vector>>,
    jumps: Vec<Vector>,
    step: bool,
}

impl HullOracle {
    fn new(x: &PiecewiseFunction) -> Result<Self> {
        let jumps: Vec<Vector> = x.elementary_jumps().into_iter().map(|j| j.value).collect();
        let step = x.is_step();
        let exact_set = if step && jumps.len() <= 8 {
            Some(e_set(x, ESetMode::Exact)?)
        } else {
            None
        };
        Ok(HullOracle { exact_set, jumps, step })
    }

    fn check(&self, x: &PiecewiseFunction, part: usize, image: Vector, tol: f64) -> Result<PartCheck> {
        if let Some(set) = &self.exact_set {
            let verdict = hull_membership(&image, set, tol)?;
            let check = verdict.verify(&image, set);
            let (distance, reconstruction_error) = match verdict.certificate {
                HullCertificate::Member { .. } => (check, check),
                HullCertificate::Separated { .. } => (check, f64::INFINITY),
            };
            let mode = HullMode::Exact { generators: set.len() };
            return Ok(PartCheck { part, image, member: verdict.member, distance, reconstruction_error, mode });
        }
        if self.step {
            let parts = if self.jumps.is_empty() { vec![Vector::zeros(x.dim())] } else { self.jumps.clone() };
            let fit = zonotope_fit(&image, &parts)?;
            let mode = HullMode::ExactZonotope { jumps: self.jumps.len() };
            let member = fit.residual <= tol;
            return Ok(PartCheck { part, image, member, distance: fit.residual, reconstruction_error: fit.residual, mode });
        }
        let mut r = 16;
        loop {
            let fit = zonotope_fit(&image, &grid_increments(x, r))?;
            let (a, b) = x.domain();
            let grid: Vec<f64> = (0..=r).map(|k| if k == r { b } else { a + (b - a) * k as f64 / r as f64 }).collect();
            let allowance = grid_allowance(x, &grid);
            let member = fit.residual <= allowance + tol;
            if member || r >= 1024 {
                let mode = HullMode::Grid { resolution: r, allowance };
                let distance = (fit.residual - allowance).max(0.0);
                return Ok(PartCheck { part, image, member, distance, reconstruction_error: fit.residual, mode });
            }
            r *= 2;
        }
    }
}

/// Samples continuous `g` with `|g| <= 1`, decomposes each into four parts
/// with values in `[0, 1]` and checks that every image `T g_r` lies in the
/// closed absolutely convex hull of the increment set.
pub fn weakly_compact_image_check(op: &StieltjesOperator, sample_count: usize, seed: u64, tol: f64) -> Result<ImageCheckReport> {
    if sample_count < 1 {
        return invalid("need at least one sample");
    }
    let x = op.integrator();
    let (a, b) = op.domain();
    let oracle = HullOracle::new(x)?;
    let mut rng = sample::rng(seed);
    let mut report = ImageCheckReport { verdict: true, samples: sample_count, parts_checked: 0, max_reconstruction_error: 0.0, worst: None };
    for s in 0..sample_count {
        let g = sample::unit_ball_function(&mut rng, a, b, 4, op.space().field())?;
        let mut parts = Vec::with_capacity(4);
        for (r, gr) in decompose(&g)?.iter().enumerate() {
            let image = op.apply(gr, tol * 1e-2)?;
            parts.push(oracle.check(x, r, image, tol)?);
        }
        report.parts_checked += parts.len();
        let failed = parts.iter().any(|p| !p.member);
        let err = parts.iter().map(|p| p.reconstruction_error).fold(0.0, f64::max);
        let worse = err >= report.max_reconstruction_error;
        report.max_reconstruction_error = report.max_reconstruction_error.max(err);
        if failed || (report.verdict && worse) {
            report.worst = Some(ImageWitness { sample: s, function: g, parts });
        }
        if failed {
            report.verdict = false;
            break;
        }
    }
    Ok(report)
}

/// Finitely additive measure on half-open subintervals of `[a, b]`, held as
/// its cumulative function `y` with `y(a) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalMeasure {
    cumulative: PiecewiseFunction,
}

impl IntervalMeasure {
    pub fn cumulative(&self) -> &PiecewiseFunction {
        &self.cumulative
    }

    pub fn domain(&self) -> (f64, f64) {
        self.cumulative.domain()
    }
}

/// The measure `m((c, d]) = x(d) - x(c)` of a right-continuous integrator.
pub fn measure_from_function(x: &PiecewiseFunction) -> Result<IntervalMeasure> {
    if let Some(t) = x.right_discontinuity() {
        return Err(Error::NotRightContinuous { t });
    }
    let xa = x.evaluate_unchecked(x.domain().0);
    Ok(IntervalMeasure { cumulative: x.shift(&xa.scaled_real(-1.0))? })
}

/// `m((c, d]) = y(d) - y(c)`.
pub fn measure_of_interval(m: &IntervalMeasure, c: f64, d: f64) -> Result<Vector> {
    let y = &m.cumulative;
    y.check_domain(c)?;
    y.check_domain(d)?;
    if c > d {
        return invalid(format!("interval ({c}, {d}] has c > d"));
    }
    if c == d {
        return Ok(Vector::zeros(y.dim()));
    }
    Ok(&y.evaluate_unchecked(d) - &y.evaluate_unchecked(c))
}

/// `|m((c_0, c_k]) - sum_i m((c_{i-1}, c_i])|` in the max-abs norm.
pub fn additivity_check(m: &IntervalMeasure, cuts: &[f64]) -> Result<f64> {
    if cuts.len() < 2 {
        return invalid("need at least two cuts");
    }
    if cuts.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("cuts must be strictly increasing");
    }
    let whole = measure_of_interval(m, cuts[0], *cuts.last().expect("nonempty"))?;
    let mut acc = PairwiseSum::new(whole.dim());
    for w in cuts.windows(2) {
        acc.push(&measure_of_interval(m, w[0], w[1])?);
    }
    Ok(whole.distance_max(&acc.finish()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundtripOptions {
    pub probes: usize,
    pub duals: usize,
    pub functions: usize,
    /// Integration tolerance; also the verdict threshold for both gaps.
    pub tol: f64,
    pub seed: u64,
}

impl Default for RoundtripOptions {
    fn default() -> Self {
        RoundtripOptions { probes: 64, duals: 20, functions: 20, tol: 1e-6, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairingWitness {
    pub function: PiecewiseFunction,
    pub dual: DualVector,
    /// `<y, T g>`
    #[serde(with = "crate::vector::scalar_serde")]
    pub operator_side: Scalar,
    /// `∫ g d<y, m>`
    #[serde(with = "crate::vector::scalar_serde")]
    pub measure_side: Scalar,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundtripReport {
    pub verdict: bool,
    /// `max_t p(y(t) - y(a) - x(t) + x(a))` per seminorm.
    pub cumulative_gaps: Vec<f64>,
    pub cumulative_gap: f64,
    /// `max |<y, T g> - ∫ g d<y, m>|` over the sampled pairs.
    pub pairing_gap: f64,
    pub worst: Option<PairingWitness>,
}

/// `x -> T -> m -> y`: compares the cumulative function with the integrator
/// and the operator with the scalar measures `<y, m>`.
pub fn roundtrip(space: &SpaceModel, x: &PiecewiseFunction, opts: &RoundtripOptions) -> Result<RoundtripReport> {
    let op = StieltjesOperator::new(space.clone(), x.clone())?;
    let m = measure_from_function(x)?;
    let y = m.cumulative();
    let (a, b) = x.domain();
    let mut probes: Vec<f64> = x.breakpoints().to_vec();
    let n = opts.probes.max(1);
    probes.extend((0..=n).map(|k| if k == n { b } else { a + (b - a) * k as f64 / n as f64 }));
    let (xa, ya) = (x.evaluate_unchecked(a), y.evaluate_unchecked(a));
    let mut cumulative_gaps = vec![0.0f64; space.seminorms().len()];
    for &t in &probes {
        let d = &(&y.evaluate_unchecked(t) - &ya) - &(&x.evaluate_unchecked(t) - &xa);
        for (gap, p) in cumulative_gaps.iter_mut().zip(space.seminorms()) {
            *gap = gap.max(p.eval(&d)?);
        }
    }
    let cumulative_gap = cumulative_gaps.iter().copied().fold(0.0, f64::max);
    let field = space.field();
    let scalar_space = SpaceModel::scalar(field);
    let int_opts = IntegralOptions { tol: opts.tol * 0.25, ..Default::default() };
    let mut rng = sample::rng(opts.seed);
    let duals: Vec<DualVector> = (0..opts.duals).map(|_| sample::dual(&mut rng, x.dim(), field)).collect();
    let mut pairing_gap = 0.0f64;
    let mut worst = None;
    for _ in 0..opts.functions {
        let g = sample::unit_ball_function(&mut rng, a, b, 4, field)?;
        let tg = op.apply(&g, opts.tol * 0.25)?;
        for dual in &duals {
            let lhs = dual.pair(&tg)?;
            let rhs = integrate_g_dx(&scalar_space, &g, &y.compose_dual(dual)?, &int_opts)?.value[0];
            let gap = (lhs - rhs).norm();
            if gap >= pairing_gap {
                pairing_gap = gap;
                worst = Some(PairingWitness { function: g.clone(), dual: dual.clone(), operator_side: lhs, measure_side: rhs });
            }
        }
    }
    let verdict = cumulative_gap <= opts.tol && pairing_gap <= opts.tol;
    Ok(RoundtripReport { verdict, cumulative_gaps, cumulative_gap, pairing_gap, worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{real_poly, scalar_vector};
    use crate::space::{Field, Seminorm};

    fn plane() -> SpaceModel {
        SpaceModel::new(
            2,
            Field::Real,
            vec![Seminorm::weighted_one(vec![1.0, 1.0]).unwrap(), Seminorm::weighted_sup(vec![1.0, 2.0]).unwrap()],
        )
        .unwrap()
    }

    fn jump() -> PiecewiseFunction {
        PiecewiseFunction::step(0.0, 1.0, &Vector::zeros(2), &[(0.5, Vector::from_real(&[1.0, -2.0]))]).unwrap()
    }

    fn line(c: &[f64]) -> PiecewiseFunction {
        PiecewiseFunction::scalar(vec![0.0, 1.0], vec![real_poly(c)]).unwrap()
    }

    fn close(u: &Vector, v: &[f64], tol: f64) -> bool {
        u.distance_max(&Vector::from_real(v)) < tol
    }

    #[test]
    fn apply_examples() {
        let t = StieltjesOperator::new(plane(), jump()).unwrap();
        assert!(close(&t.apply(&line(&[1.0]), 1e-10).unwrap(), &[1.0, -2.0], 1e-14));
        assert!(close(&t.apply(&line(&[0.0, 1.0]), 1e-10).unwrap(), &[0.5, -1.0], 1e-14));
        assert!(t.apply(&line(&[0.0]), 1e-10).unwrap().is_zero());
        let h = PiecewiseFunction::step(0.0, 1.0, &scalar_vector(0.0), &[(0.3, scalar_vector(1.0))]).unwrap();
        assert!(matches!(t.apply(&h, 1e-10), Err(Error::Discontinuous { .. })));
    }

    #[test]
    fn operator_needs_right_continuity() {
        let x = PiecewiseFunction::with_values(
            vec![0.0, 0.5, 1.0],
            vec![vec![real_poly(&[0.0])], vec![real_poly(&[1.0])]],
            vec![scalar_vector(0.0), scalar_vector(0.0), scalar_vector(1.0)],
        )
        .unwrap();
        let s = SpaceModel::scalar(Field::Real);
        assert!(matches!(StieltjesOperator::new(s, x.clone()), Err(Error::NotRightContinuous { t }) if t == 0.5));
        assert!(matches!(measure_from_function(&x), Err(Error::NotRightContinuous { .. })));
    }

    #[test]
    fn decompose_examples() {
        let [g0, g1, g2, g3] = decompose(&line(&[-0.5])).unwrap();
        assert_eq!(g0.sup_norm(), 0.0);
        assert_eq!(g2.evaluate_scalar(0.3).unwrap(), re(0.5));
        assert_eq!(g1.sup_norm() + g3.sup_norm(), 0.0);

        let [g0, _, g2, _] = decompose(&line(&[-0.5, 1.0])).unwrap();
        assert!(g0.breakpoints().contains(&0.5));
        assert_eq!(g0.evaluate_scalar(0.25).unwrap(), re(0.0));
        assert_eq!(g0.evaluate_scalar(0.75).unwrap(), re(0.25));
        assert_eq!(g2.evaluate_scalar(0.25).unwrap(), re(0.25));
        assert!(g0.is_continuous() && g2.is_continuous());

        let i = PiecewiseFunction::scalar(vec![0.0, 1.0], vec![CPoly::constant(Scalar::new(0.0, 1.0))]).unwrap();
        let [g0, g1, g2, g3] = decompose(&i).unwrap();
        assert_eq!(g1.evaluate_scalar(0.6).unwrap(), re(1.0));
        assert_eq!(g0.sup_norm() + g2.sup_norm() + g3.sup_norm(), 0.0);

        assert!(matches!(decompose(&line(&[0.0, 2.0])), Err(Error::SupNormExceeded(s)) if s == 2.0));
    }

    #[test]
    fn abel_examples() {
        let d = [Vector::from_real(&[1.0, 0.0]), Vector::from_real(&[0.0, 1.0])];
        let r = abel_identity_check(&[0.2, 0.7], &d).unwrap();
        assert!(close(&r.lhs, &[0.2, 0.7], 1e-15));
        assert!(close(&r.rhs, &[0.2, 0.7], 1e-15));
        assert!(r.gap < 1e-15);
        assert!((r.coefficient_sum - 0.7).abs() < 1e-15);

        let r = abel_identity_check(&[0.0, 0.0], &d).unwrap();
        assert!(r.lhs.is_zero() && r.rhs.is_zero());

        let j = Vector::from_real(&[3.0, -1.0]);
        let r = abel_identity_check(&[1.0], std::slice::from_ref(&j)).unwrap();
        assert_eq!(r.lhs, j);
        assert_eq!(r.rhs, j);

        assert!(abel_identity_check(&[0.5], &d).is_err());
        assert!(abel_identity_check(&[1.5, 0.0], &d).is_err());
    }

    #[test]
    fn measure_examples() {
        let m = measure_from_function(&jump()).unwrap();
        assert_eq!(measure_of_interval(&m, 0.4, 0.6).unwrap(), Vector::from_real(&[1.0, -2.0]));
        assert!(measure_of_interval(&m, 0.1, 0.3).unwrap().is_zero());
        assert_eq!(measure_of_interval(&m, 0.0, 1.0).unwrap(), Vector::from_real(&[1.0, -2.0]));
        assert!(measure_of_interval(&m, 0.7, 0.7).unwrap().is_zero());
        assert!(measure_of_interval(&m, 0.0, 1.5).is_err());

        assert_eq!(additivity_check(&m, &[0.2, 0.9]).unwrap(), 0.0);
        assert_eq!(additivity_check(&m, &[0.0, 0.5, 1.0]).unwrap(), 0.0);
        let cubic = PiecewiseFunction::polynomial(0.0, 1.0, vec![real_poly(&[1.0, 0.0, 0.0, 1.0])]).unwrap();
        let m = measure_from_function(&cubic).unwrap();
        assert!(additivity_check(&m, &[0.0, 0.25, 0.5, 1.0]).unwrap() < 1e-15);
        assert!(additivity_check(&m, &[0.5, 0.25]).is_err());
    }

    #[test]
    fn measure_ignores_constants() {
        let shifted = jump().shift(&Vector::from_real(&[4.0, -0.5])).unwrap();
        assert_eq!(measure_from_function(&jump()).unwrap(), measure_from_function(&shifted).unwrap());
    }

    #[test]
    fn roundtrip_examples() {
        let r = roundtrip(&plane(), &jump(), &RoundtripOptions { functions: 3, duals: 3, ..Default::default() }).unwrap();
        assert!(r.verdict);
        assert!(r.cumulative_gap == 0.0);
        let c = PiecewiseFunction::constant(0.0, 1.0, &Vector::from_real(&[1.0, 2.0])).unwrap();
        let r = roundtrip(&plane(), &c, &RoundtripOptions { functions: 2, duals: 2, ..Default::default() }).unwrap();
        assert_eq!((r.cumulative_gap, r.pairing_gap), (0.0, 0.0));
    }

    #[test]
    fn image_check_examples() {
        let t = StieltjesOperator::new(plane(), jump()).unwrap();
        let r = weakly_compact_image_check(&t, 10, 1, 1e-9).unwrap();
        assert!(r.verdict);
        assert_eq!(r.parts_checked, 40);
        assert!(r.max_reconstruction_error < 1e-9);

        let zero = PiecewiseFunction::constant(0.0, 1.0, &Vector::zeros(2)).unwrap();
        let t = StieltjesOperator::new(plane(), zero).unwrap();
        assert!(weakly_compact_image_check(&t, 3, 0, 1e-9).unwrap().verdict);
    }

    #[test]
    fn full_increment_is_a_member() {
        let x = jump().add(&PiecewiseFunction::polynomial(0.0, 1.0, vec![real_poly(&[0.0, 1.0]), real_poly(&[0.0, 0.0, -1.0])]).unwrap()).unwrap();
        let t = StieltjesOperator::new(plane(), x.clone()).unwrap();
        let [g0, ..] = decompose(&line(&[1.0])).unwrap();
        let image = t.apply(&g0, 1e-12).unwrap();
        let oracle = HullOracle::new(&x).unwrap();
        assert!(oracle.check(&x, 0, image, 1e-9).unwrap().member);
    }

    #[test]
    fn smooth_integrator_image() {
        let x = PiecewiseFunction::polynomial(0.0, 1.0, vec![real_poly(&[0.0, 1.0, -3.0]), real_poly(&[1.0, 0.0, 0.0, 2.0])]).unwrap();
        let t = StieltjesOperator::new(plane(), x).unwrap();
        assert!(weakly_compact_image_check(&t, 4, 9, 1e-9).unwrap().verdict);
    }
}

//! Riemann-Stieltjes sums and integrals of a scalar against a vector function
//! and of a vector against a scalar function.
//!
//! Integration refines a fixed base partition (all breakpoints of both
//! functions plus a uniform grid of 8 cells): level `l` splits every base
//! cell into `2^l` equal subcells. On each base cell both functions are
//! single polynomials, so derivative suprema are available per cell and the
//! error of the Riemann-Stieltjes sum is bounded cell by cell:
//!
//! * smooth part, tag `s` in `[t_k, t_k+1]` of width `h`:
//!   `F1 H1 ((s - t_k)^2 + (t_k+1 - s)^2) / 2`, and for midpoint tags also
//!   `(F1 H2 / 12 + H1 F2 / 24) h^3`;
//! * integrator jumps: `F1 p(J) |s - tau|` for a jump at the cell end `tau`;
//! * integrand values at base points that differ from the piece limit:
//!   `p(F(s) - F(s+-)) H1 h`.
//!
//! Here `F1, F2` bound the first two derivatives of the integrand and `H1, H2`
//! those of the integrator, measured by the seminorm on the vector side and
//! by the modulus on the scalar side. The reported estimate is the smaller of
//! this local bound and the a-priori modulus-of-continuity bound
//! (`8 w_g(mesh) K_p` for `∫ g dx`, `2 w_x(mesh) var(g)` for `∫ x dg`), plus a
//! level-independent rounding allowance.
//!
//! Refinement stops once successive sums and the estimates are below the
//! tolerance, or unconverged once both the differences and the truncation
//! part are within the rounding allowance, since no level can do better.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::function::{merge_points, PiecewiseFunction, Side};
use crate::partition::{TagRule, TaggedPartition};
use crate::poly::CPoly;
use crate::semivariation::semivariation_upper_bound;
use crate::space::{Field, SpaceModel};
use crate::vector::{PairwiseSum, Scalar, Vector};

const BASE_GRID: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct IntegralOptions {
    pub tol: f64,
    pub max_levels: usize,
    /// Tag rule for every subcell; `None` tags at midpoints except that a
    /// subcell touching an integrator jump is tagged at the jump.
    pub tags: Option<TagRule>,
    pub max_cells: usize,
}

impl Default for IntegralOptions {
    fn default() -> Self {
        IntegralOptions { tol: 1e-8, max_levels: 20, tags: None, max_cells: 1 << 22 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub level: usize,
    pub cells: usize,
    pub mesh: f64,
    pub value: Vector,
    /// `p(S_l - S_{l-1})` per seminorm; absent on the first level.
    pub differences: Option<Vec<f64>>,
    pub estimates: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: Vector,
    /// Certified error estimate per seminorm.
    pub estimates: Vec<f64>,
    /// The modulus-of-continuity bound per seminorm at the final mesh.
    pub continuity_bounds: Vec<f64>,
    pub levels: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VectorSide {
    Integrand,
    Integrator,
}

fn scalar_times<'v>(f: &'v Vector, h: &'v Vector) -> (Scalar, &'v Vector) {
    if f.dim() == 1 {
        (f[0], h)
    } else {
        (h[0], f)
    }
}

fn check_partition(f: &PiecewiseFunction, p: &TaggedPartition) -> Result<()> {
    let (a0, b0) = f.domain();
    let (a1, b1) = p.domain();
    if a0 == a1 && b0 == b1 {
        Ok(())
    } else {
        Err(Error::DomainMismatch { a0, b0, a1, b1 })
    }
}

fn check_pair(f: &PiecewiseFunction, h: &PiecewiseFunction) -> Result<()> {
    f.same_domain(h)?;
    if f.dim() != 1 && h.dim() != 1 {
        return invalid("one of the two functions must be scalar");
    }
    Ok(())
}

/// `sum_i F(s_i) [H(t_i) - H(t_{i-1})]` in fixed pairwise order.
fn rs_sum(f: &PiecewiseFunction, h: &PiecewiseFunction, p: &TaggedPartition) -> Result<Vector> {
    check_pair(f, h)?;
    check_partition(f, p)?;
    let dim = f.dim().max(h.dim());
    let mut acc = PairwiseSum::new(dim);
    let pts = p.points();
    for (i, &s) in p.tags().iter().enumerate() {
        let dh = &h.evaluate_unchecked(pts[i + 1]) - &h.evaluate_unchecked(pts[i]);
        let fs = f.evaluate_unchecked(s);
        let (alpha, v) = scalar_times(&fs, &dh);
        acc.push_scaled(alpha, v);
    }
    Ok(acc.finish())
}

/// `S_d(x, g) = sum_i x(s_i) [g(t_i) - g(t_{i-1})]`.
pub fn sum_x_dg(x: &PiecewiseFunction, g: &PiecewiseFunction, p: &TaggedPartition) -> Result<Vector> {
    g.require_scalar()?;
    rs_sum(x, g, p)
}

/// `s_d(g, x) = sum_i g(s_i) [x(t_i) - x(t_{i-1})]`.
pub fn sum_g_dx(g: &PiecewiseFunction, x: &PiecewiseFunction, p: &TaggedPartition) -> Result<Vector> {
    g.require_scalar()?;
    rs_sum(g, x, p)
}

/// `x(b)g(b) - x(a)g(a) - sum_{i=0}^{n} g(t_i) [x(s_{i+1}) - x(s_i)]` with
/// `s_0 = a`, `s_{n+1} = b`: the summation-by-parts form of `S_d(x, g)`.
pub fn rearranged_sum(x: &PiecewiseFunction, g: &PiecewiseFunction, p: &TaggedPartition) -> Result<Vector> {
    g.require_scalar()?;
    check_pair(x, g)?;
    check_partition(x, p)?;
    let (a, b) = x.domain();
    let mut s = vec![a];
    s.extend_from_slice(p.tags());
    s.push(b);
    let mut acc = PairwiseSum::new(x.dim());
    acc.push_scaled(g.evaluate_unchecked(b)[0], &x.evaluate_unchecked(b));
    acc.push_scaled(-g.evaluate_unchecked(a)[0], &x.evaluate_unchecked(a));
    for (i, &t) in p.points().iter().enumerate() {
        let dx = &x.evaluate_unchecked(s[i + 1]) - &x.evaluate_unchecked(s[i]);
        acc.push_scaled(-g.evaluate_unchecked(t)[0], &dx);
    }
    Ok(acc.finish())
}

/// Points where both functions have a one-sided jump.
pub fn common_discontinuities(f: &PiecewiseFunction, h: &PiecewiseFunction) -> Vec<f64> {
    let hd = h.discontinuities();
    f.discontinuities().into_iter().filter(|t| hd.contains(t)).collect()
}

/// `sum_j g(tau_j) J_j` over the jumps of a step function `x`.
pub fn exact_step_integral(g: &PiecewiseFunction, x: &PiecewiseFunction) -> Result<Vector> {
    g.require_scalar()?;
    g.same_domain(x)?;
    if !x.is_step() {
        return Err(Error::NotStep);
    }
    let common = common_discontinuities(g, x);
    if !common.is_empty() {
        return Err(Error::CommonDiscontinuity { points: common });
    }
    let mut acc = PairwiseSum::new(x.dim());
    for j in x.elementary_jumps() {
        acc.push_scaled(g.evaluate_unchecked(j.t)[0], &j.value);
    }
    Ok(acc.finish())
}

struct BaseCell {
    u: f64,
    v: f64,
    pf: Vec<CPoly>,
    ph: Vec<CPoly>,
    fu: Vector,
    fv: Vector,
    hu: Vector,
    hv: Vector,
    /// Integrator jumps `H(u+) - H(u)` and `H(v) - H(v-)` when not negligible.
    jump_u: bool,
    jump_v: bool,
    /// Per seminorm.
    f1: Vec<f64>,
    f2: Vec<f64>,
    h1: Vec<f64>,
    h2: Vec<f64>,
    jump_u_size: Vec<f64>,
    jump_v_size: Vec<f64>,
    disc_u: Vec<f64>,
    disc_v: Vec<f64>,
}

fn eval_polys(q: &[CPoly], t: f64, out: &mut Vector) {
    for (k, p) in q.iter().enumerate() {
        out[k] = p.eval(t);
    }
}

fn derivatives(q: &[CPoly]) -> Vec<CPoly> {
    q.iter().map(CPoly::derivative).collect()
}

struct Engine<'a> {
    space: &'a SpaceModel,
    f: &'a PiecewiseFunction,
    h: &'a PiecewiseFunction,
    cells: Vec<BaseCell>,
    dim: usize,
    rounding: Vec<f64>,
    continuity: Box<dyn Fn(usize, f64) -> f64 + 'a>,
}

impl<'a> Engine<'a> {
    fn new(
        space: &'a SpaceModel,
        f: &'a PiecewiseFunction,
        h: &'a PiecewiseFunction,
        side: VectorSide,
    ) -> Result<Self> {
        check_pair(f, h)?;
        let (vec_fn, scal_fn) = match side {
            VectorSide::Integrand => (f, h),
            VectorSide::Integrator => (h, f),
        };
        scal_fn.require_scalar()?;
        if vec_fn.dim() != space.dimension() {
            return Err(Error::DimensionMismatch { expected: space.dimension(), found: vec_fn.dim() });
        }
        if space.field() == Field::Real && !(f.is_real() && h.is_real()) {
            return invalid("complex-valued data in a real space");
        }
        let common = common_discontinuities(f, h);
        if !common.is_empty() {
            return Err(Error::CommonDiscontinuity { points: common });
        }

        let (a, b) = f.domain();
        let grid: Vec<f64> = TaggedPartition::uniform(a, b, BASE_GRID, TagRule::Left)?.points().to_vec();
        let base = merge_points(&merge_points(f.breakpoints(), h.breakpoints()), &grid);
        let seminorms = space.seminorms();
        let measure_vec = |is_vec: bool, k: usize, v: &Vector| -> f64 {
            if is_vec {
                seminorms[k].eval_slice(v.as_slice())
            } else {
                v[0].norm()
            }
        };
        let measure_poly = |is_vec: bool, k: usize, q: &[CPoly], u: f64, v: f64| -> f64 {
            if is_vec {
                seminorms[k].bound_on(q, u, v)
            } else {
                q[0].sup_abs(u, v)
            }
        };
        let f_vec = side == VectorSide::Integrand;
        let h_jumps = h.elementary_jumps();
        let mut cells = Vec::with_capacity(base.len() - 1);
        for w in base.windows(2) {
            let (u, v) = (w[0], w[1]);
            let mid = 0.5 * (u + v);
            let pf = f.piece(f.locate(mid)).to_vec();
            let ph = h.piece(h.locate(mid)).to_vec();
            let (df, dh) = (derivatives(&pf), derivatives(&ph));
            let (ddf, ddh) = (derivatives(&df), derivatives(&dh));
            let fu = f.evaluate_unchecked(u);
            let fv = f.evaluate_unchecked(v);
            let hu = h.evaluate_unchecked(u);
            let hv = h.evaluate_unchecked(v);
            let mut tmp = Vector::zeros(h.dim());
            eval_polys(&ph, u, &mut tmp);
            let jr = &tmp - &hu;
            eval_polys(&ph, v, &mut tmp);
            let jl = &hv - &tmp;
            let mut ftmp = Vector::zeros(f.dim());
            eval_polys(&pf, u, &mut ftmp);
            let du = &fu - &ftmp;
            eval_polys(&pf, v, &mut ftmp);
            let dv = &fv - &ftmp;
            let jump_u = h_jumps.iter().any(|j| j.t == u && j.side == Side::Right);
            let jump_v = h_jumps.iter().any(|j| j.t == v && j.side == Side::Left);
            let n = seminorms.len();
            let per = |g: &dyn Fn(usize) -> f64| (0..n).map(g).collect::<Vec<f64>>();
            cells.push(BaseCell {
                u,
                v,
                f1: per(&|k| measure_poly(f_vec, k, &df, u, v)),
                f2: per(&|k| measure_poly(f_vec, k, &ddf, u, v)),
                h1: per(&|k| measure_poly(!f_vec, k, &dh, u, v)),
                h2: per(&|k| measure_poly(!f_vec, k, &ddh, u, v)),
                jump_u_size: per(&|k| measure_vec(!f_vec, k, &jr)),
                jump_v_size: per(&|k| measure_vec(!f_vec, k, &jl)),
                disc_u: per(&|k| measure_vec(f_vec, k, &du)),
                disc_v: per(&|k| measure_vec(f_vec, k, &dv)),
                jump_u,
                jump_v,
                pf,
                ph,
                fu,
                fv,
                hu,
                hv,
            });
        }

        let rounding = rounding_allowance(space, f, h, &cells)?;
        let continuity: Box<dyn Fn(usize, f64) -> f64 + 'a> = match side {
            VectorSide::Integrator => {
                // 8 w_g(d) K_p
                let g1 = cells.iter().fold(0.0f64, |m, c| m.max(derivatives(&c.pf)[0].sup_abs(c.u, c.v)));
                let g_jumps: f64 = f.elementary_jumps().iter().map(|j| j.value[0].norm()).sum();
                let kp: Vec<f64> =
                    (0..seminorms.len()).map(|k| semivariation_upper_bound(space, k, h)).collect::<Result<_>>()?;
                Box::new(move |k, d| 8.0 * (g1 * d + g_jumps) * kp[k])
            }
            VectorSide::Integrand => {
                // 2 w_{x,p}(d) var(g)
                let var_g = h.scalar_variation()?;
                let x1: Vec<f64> = (0..seminorms.len())
                    .map(|k| cells.iter().fold(0.0f64, |m, c| m.max(seminorms[k].bound_on(&derivatives(&c.pf), c.u, c.v))))
                    .collect();
                let x_jumps: Vec<f64> = (0..seminorms.len())
                    .map(|k| f.elementary_jumps().iter().map(|j| seminorms[k].eval_slice(j.value.as_slice())).sum())
                    .collect();
                Box::new(move |k, d| 2.0 * (x1[k] * d + x_jumps[k]) * var_g)
            }
        };
        let dim = f.dim().max(h.dim());
        Ok(Engine { space, f, h, cells, dim, rounding, continuity })
    }

    /// The tag of subcell `k` of `n`, and whether it is the midpoint.
    fn tag(&self, cell: &BaseCell, rule: Option<TagRule>, k: usize, n: usize, lo: f64, hi: f64) -> (f64, bool) {
        match rule {
            Some(r) => (r.tag(lo, hi), r == TagRule::Midpoint),
            None => {
                let first = k == 0 && cell.jump_u;
                let last = k + 1 == n && cell.jump_v;
                match (first, last) {
                    (true, false) => (lo, false),
                    (false, true) => (hi, false),
                    _ => (0.5 * (lo + hi), true),
                }
            }
        }
    }

    /// The Riemann-Stieltjes sum at a level, and the local error bound per
    /// seminorm.
    fn level(&self, level: usize, rule: Option<TagRule>) -> (Vector, Vec<f64>, f64) {
        let n = 1usize << level;
        let ns = self.space.seminorms().len();
        let mut acc = PairwiseSum::new(self.dim);
        let mut local = vec![0.0; ns];
        let mut mesh = 0.0f64;
        let mut h_prev = Vector::zeros(self.h.dim());
        let mut h_next = Vector::zeros(self.h.dim());
        let mut fs = Vector::zeros(self.f.dim());
        let mut dh = Vector::zeros(self.h.dim());
        for c in &self.cells {
            let width = c.v - c.u;
            let point = |k: usize| if k == n { c.v } else { c.u + width * (k as f64 / n as f64) };
            h_prev.clone_from(&c.hu);
            let mut lo = c.u;
            for k in 0..n {
                let hi = point(k + 1);
                if k + 1 == n {
                    h_next.clone_from(&c.hv);
                } else {
                    eval_polys(&c.ph, hi, &mut h_next);
                }
                let (s, midpoint) = self.tag(c, rule, k, n, lo, hi);
                if s == c.u {
                    fs.clone_from(&c.fu);
                } else if s == c.v {
                    fs.clone_from(&c.fv);
                } else {
                    eval_polys(&c.pf, s, &mut fs);
                }
                for (d, (a, b)) in dh.as_mut_slice().iter_mut().zip(h_next.iter().zip(h_prev.iter())) {
                    *d = a - b;
                }
                let (alpha, v) = scalar_times(&fs, &dh);
                acc.push_scaled(alpha, v);

                let hw = hi - lo;
                mesh = mesh.max(hw);
                let (dl, dr) = (s - lo, hi - s);
                for p in 0..ns {
                    let first = c.f1[p] * c.h1[p] * (dl * dl + dr * dr) / 2.0;
                    let mut e = if midpoint {
                        first.min((c.f1[p] * c.h2[p] / 12.0 + c.h1[p] * c.f2[p] / 24.0) * hw * hw * hw)
                    } else {
                        first
                    };
                    if k == 0 && c.jump_u {
                        e += c.f1[p] * c.jump_u_size[p] * (s - c.u);
                    }
                    if k + 1 == n && c.jump_v {
                        e += c.f1[p] * c.jump_v_size[p] * (c.v - s);
                    }
                    if s == c.u {
                        e += c.disc_u[p] * c.h1[p] * hw;
                    }
                    if s == c.v {
                        e += c.disc_v[p] * c.h1[p] * hw;
                    }
                    local[p] += e;
                }
                std::mem::swap(&mut h_prev, &mut h_next);
                lo = hi;
            }
        }
        (acc.finish(), local, mesh)
    }

    fn run(&self, opts: &IntegralOptions) -> Result<IntegralResult> {
        if !(opts.tol > 0.0) {
            return invalid("tolerance must be positive");
        }
        let ns = self.space.seminorms().len();
        let mut trace: Vec<TraceRow> = Vec::new();
        let mut converged = false;
        let mut continuity_bounds = vec![0.0; ns];
        let mut level = 0;
        loop {
            let (value, local, mesh) = self.level(level, opts.tags);
            continuity_bounds = (0..ns).map(|p| (self.continuity)(p, mesh)).collect();
            let estimates: Vec<f64> = (0..ns)
                .map(|p| continuity_bounds[p].min(local[p] * (1.0 + 1e-10)) + self.rounding[p])
                .collect();
            let differences = trace.last().map(|prev| {
                let d = &value - &prev.value;
                self.space.seminorms().iter().map(|p| p.eval_slice(d.as_slice())).collect::<Vec<f64>>()
            });
            let done = differences
                .as_ref()
                .is_some_and(|d| d.iter().zip(&estimates).all(|(d, e)| *d < opts.tol && *e < opts.tol));
            // refining cannot push the estimate under the rounding allowance
            let stalled = !done
                && differences.as_ref().is_some_and(|d| {
                    (0..ns).all(|p| d[p] <= self.rounding[p] && estimates[p] - self.rounding[p] <= self.rounding[p])
                });
            trace.push(TraceRow {
                level,
                cells: self.cells.len() << level,
                mesh,
                value,
                differences,
                estimates,
            });
            if done {
                converged = true;
                break;
            }
            if stalled {
                break;
            }
            if level >= opts.max_levels || (self.cells.len() << (level + 1)) > opts.max_cells {
                break;
            }
            level += 1;
        }
        let last = trace.last().expect("one level").clone();
        Ok(IntegralResult {
            value: last.value,
            estimates: last.estimates,
            continuity_bounds,
            levels: trace.len(),
            converged,
            trace,
        })
    }
}

/// Rounding allowance per seminorm, independent of the level: integrator
/// evaluation errors telescope against the integrand's variation, integrand
/// evaluation errors are weighted by the integrator's variation, and products
/// plus pairwise summation contribute a multiple of `sup|F| var(H)`.
fn rounding_allowance(
    space: &SpaceModel,
    f: &PiecewiseFunction,
    h: &PiecewiseFunction,
    cells: &[BaseCell],
) -> Result<Vec<f64>> {
    let coord_var = |x: &PiecewiseFunction| -> Result<f64> {
        (0..x.dim()).try_fold(0.0f64, |m, k| Ok(m.max(x.component(k)?.scalar_variation()?)))
    };
    let scale = |pick: &dyn Fn(&BaseCell) -> &Vec<CPoly>| {
        cells.iter().fold(0.0f64, |m, c| pick(c).iter().fold(m, |m, q| m.max(q.magnitude(c.u, c.v))))
    };
    let (vf, vh) = (coord_var(f)?, coord_var(h)?);
    let sup_f = f.sup_norm();
    let (deg_f, deg_h) = (f.degree() as f64, h.degree() as f64);
    let (scale_f, scale_h) = (scale(&|c| &c.pf), scale(&|c| &c.ph));
    let core = 112.0 * sup_f * vh
        + 4.0 * (deg_h + 2.0) * scale_h * (2.0 * sup_f + vf)
        + 4.0 * (deg_f + 2.0) * scale_f * vh;
    Ok(space.seminorms().iter().map(|p| p.sup_norm_factor() * f64::EPSILON * core).collect())
}

/// `∫ g dx` for a scalar integrand and a vector integrator.
pub fn integrate_g_dx(
    space: &SpaceModel,
    g: &PiecewiseFunction,
    x: &PiecewiseFunction,
    opts: &IntegralOptions,
) -> Result<IntegralResult> {
    Engine::new(space, g, x, VectorSide::Integrator)?.run(opts)
}

/// `∫ x dg` for a vector integrand and a scalar integrator.
pub fn integrate_x_dg(
    space: &SpaceModel,
    x: &PiecewiseFunction,
    g: &PiecewiseFunction,
    opts: &IntegralOptions,
) -> Result<IntegralResult> {
    Engine::new(space, x, g, VectorSide::Integrand)?.run(opts)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerPartesReport {
    /// `∫ x dg`
    pub lhs: Vector,
    /// `x(b) g(b) - x(a) g(a) - ∫ g dx`
    pub rhs: Vector,
    /// `p(lhs - rhs)` per seminorm.
    pub gaps: Vec<f64>,
    pub x_dg: IntegralResult,
    pub g_dx: IntegralResult,
}

/// Integration by parts. Both integrals exist when `x` or `g` is continuous;
/// each is computed directly and the identity is checked.
pub fn per_partes(
    space: &SpaceModel,
    x: &PiecewiseFunction,
    g: &PiecewiseFunction,
    opts: &IntegralOptions,
) -> Result<PerPartesReport> {
    g.require_scalar()?;
    x.same_domain(g)?;
    if !x.is_continuous() && !g.is_continuous() {
        return Err(Error::HypothesesFailed(format!(
            "x is discontinuous at {:?} and g at {:?}; neither integral is covered",
            x.discontinuities(),
            g.discontinuities()
        )));
    }
    let x_dg = integrate_x_dg(space, x, g, opts)?;
    let g_dx = integrate_g_dx(space, g, x, opts)?;
    let (a, b) = x.domain();
    let mut acc = PairwiseSum::new(x.dim());
    acc.push_scaled(g.evaluate_unchecked(b)[0], &x.evaluate_unchecked(b));
    acc.push_scaled(-g.evaluate_unchecked(a)[0], &x.evaluate_unchecked(a));
    acc.push_scaled(Scalar::new(-1.0, 0.0), &g_dx.value);
    let rhs = acc.finish();
    let lhs = x_dg.value.clone();
    let d = &lhs - &rhs;
    let gaps = space.seminorms().iter().map(|p| p.eval_slice(d.as_slice())).collect();
    Ok(PerPartesReport { lhs, rhs, gaps, x_dg, g_dx })
}

//! Semivariation of vector functions, the increment set `E(a, b)`, and the
//! dual-variation bounds.
//!
//! For a partition with increments `D_j = x(t_j) - x(t_{j-1})` the quantity of
//! interest is `sup_{|a_j| <= 1} p(sum_j a_j D_j)`. It is computed
//!
//! * exactly from a finite set `Y` of dual extreme points when the seminorm
//!   has one (`max_{y in Y} sum_j |<y, D_j>|`),
//! * exactly by sign enumeration over the real field,
//! * from below by a phase grid or by alternating ascent otherwise.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::function::{merge_points, PiecewiseFunction};
use crate::partition::{TagRule, TaggedPartition};
use crate::space::{polar_gauge, DualVector, Field, Seminorm, SeminormKind, SpaceModel};
use crate::vector::{phase, re, scalars_serde, Scalar, Vector};

/// Cells accepted by the brute-force enumerations.
pub const ENUMERATION_CAP: usize = 20;

/// Phase-grid combinations tried before falling back to ascent.
const PHASE_COMBINATIONS_CAP: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct SemivariationOptions {
    pub tol: f64,
    pub max_levels: usize,
    /// Phases per coefficient in the complex grid search.
    pub phases: usize,
    pub max_cells: usize,
}

impl Default for SemivariationOptions {
    fn default() -> Self {
        SemivariationOptions { tol: 1e-8, max_levels: 20, phases: 16, max_cells: 1 << 20 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    DualVertices,
    SignEnumeration,
    PhaseGrid,
    Ascent,
}

impl Method {
    /// Whether the method returns the exact supremum for one partition.
    pub fn is_exact(self) -> bool {
        matches!(self, Method::DualVertices | Method::SignEnumeration)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionValue {
    pub value: f64,
    #[serde(with = "scalars_serde")]
    pub coefficients: Vec<Scalar>,
    pub method: Method,
    /// Set when `value` is only known to be a lower bound for this partition.
    pub lower_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SemivariationReport {
    pub seminorm_index: usize,
    pub value: f64,
    pub exact: bool,
    pub converged: bool,
    pub method: Method,
    pub partition: Vec<f64>,
    /// One per cell of `partition`, then one per elementary jump.
    #[serde(with = "scalars_serde")]
    pub coefficients: Vec<Scalar>,
    pub trace: Vec<f64>,
    /// Certified upper bound from the dual route.
    pub upper_bound: f64,
}

fn increments(x: &PiecewiseFunction, points: &[f64]) -> Vec<Vector> {
    let vals: Vec<Vector> = points.iter().map(|&t| x.evaluate_unchecked(t)).collect();
    vals.windows(2).map(|w| &w[1] - &w[0]).collect()
}

/// Limits of partition increments as the partition closes in on the
/// breakpoints: the change of the piece across every cell of `points` (which
/// must contain all breakpoints), then every elementary jump.
fn limit_increments(x: &PiecewiseFunction, points: &[f64]) -> Vec<Vector> {
    let mut incs: Vec<Vector> = points
        .windows(2)
        .map(|w| {
            let i = x.locate(0.5 * (w[0] + w[1]));
            &x.eval_piece(i, w[1]) - &x.eval_piece(i, w[0])
        })
        .collect();
    incs.extend(x.elementary_jumps().into_iter().map(|j| j.value));
    incs
}

fn combine(dim: usize, alpha: &[Scalar], incs: &[Vector]) -> Vector {
    let mut v = Vector::zeros(dim);
    for (a, d) in alpha.iter().zip(incs) {
        v.axpy(*a, d);
    }
    v
}

fn check_space(space: &SpaceModel, index: usize, x: &PiecewiseFunction) -> Result<()> {
    space.seminorm(index)?;
    if x.dim() != space.dimension() {
        return Err(Error::DimensionMismatch { expected: space.dimension(), found: x.dim() });
    }
    if space.field() == Field::Real && !x.is_real() {
        return invalid("complex-valued function in a real space");
    }
    Ok(())
}

/// `max_{y in Y} sum_j |<y, D_j>|`, with the attaining coefficients.
fn by_vertices(ys: &[DualVector], incs: &[Vector], field: Field) -> (f64, Vec<Scalar>) {
    let mut best = (0.0, vec![re(1.0); incs.len()]);
    let mut best_val = -1.0;
    for y in ys {
        let pairs: Vec<Scalar> = incs.iter().map(|d| y.pair_unchecked(d)).collect();
        let val: f64 = pairs.iter().map(|z| z.norm()).sum();
        if val > best_val {
            best_val = val;
            best = (val, pairs.iter().map(|z| align(*z, field)).collect());
        }
    }
    best
}

/// Coefficient of modulus one turning `z` onto the positive real axis.
fn align(z: Scalar, field: Field) -> Scalar {
    match field {
        Field::Real => re(if z.re < 0.0 { -1.0 } else { 1.0 }),
        Field::Complex => phase(z).conj(),
    }
}

/// Exhaustive search over `a_j` in a finite set of unimodular values, the
/// first nonzero increment's coefficient fixed to 1.
fn enumerate(p: &Seminorm, incs: &[Vector], choices: &[Scalar]) -> (f64, Vec<Scalar>) {
    let dim = incs.first().map_or(0, Vector::dim);
    let nz: Vec<usize> = (0..incs.len()).filter(|&j| !incs[j].is_zero()).collect();
    let mut alpha = vec![re(1.0); incs.len()];
    if nz.is_empty() {
        return (0.0, alpha);
    }
    let base = choices.len();
    let free = nz.len() - 1;
    let total = base.pow(free as u32);
    let mut best_val = -1.0;
    let mut best_code = 0usize;
    let mut trial = alpha.clone();
    for code in 0..total {
        let mut c = code;
        for &j in &nz[1..] {
            trial[j] = choices[c % base];
            c /= base;
        }
        let val = p.eval_slice(combine(dim, &trial, incs).as_slice());
        if val > best_val {
            best_val = val;
            best_code = code;
        }
    }
    let mut c = best_code;
    for &j in &nz[1..] {
        alpha[j] = choices[c % base];
        c /= base;
    }
    (best_val, alpha)
}

fn ascend(p: &Seminorm, incs: &[Vector], field: Field, mut alpha: Vec<Scalar>) -> (f64, Vec<Scalar>) {
    let dim = incs.first().map_or(0, Vector::dim);
    let mut val = p.eval_slice(combine(dim, &alpha, incs).as_slice());
    for _ in 0..200 {
        let v = combine(dim, &alpha, incs);
        let y = p.subgradient(&v);
        let next: Vec<Scalar> = incs.iter().map(|d| align(y.pair_unchecked(d), field)).collect();
        let next_val = p.eval_slice(combine(dim, &next, incs).as_slice());
        if next_val <= val * (1.0 + 1e-15) {
            break;
        }
        alpha = next;
        val = next_val;
    }
    (val, alpha)
}

/// Multi-start alternating ascent: the warm start, all-ones, and one start per
/// linear row of the seminorm.
fn ascent(p: &Seminorm, incs: &[Vector], field: Field, warm: Option<&[Scalar]>) -> (f64, Vec<Scalar>) {
    let mut starts: Vec<Vec<Scalar>> = Vec::new();
    if let Some(w) = warm {
        starts.push(w.to_vec());
    }
    starts.push(vec![re(1.0); incs.len()]);
    for row in p.linear_rows() {
        let y = DualVector::from_real(&row);
        starts.push(incs.iter().map(|d| align(y.pair_unchecked(d), field)).collect());
    }
    let mut best = (-1.0, Vec::new());
    for s in starts {
        let r = ascend(p, incs, field, s);
        if r.0 > best.0 {
            best = r;
        }
    }
    best
}

fn unit_phases(m: usize) -> Vec<Scalar> {
    (0..m).map(|k| Scalar::from_polar(1.0, std::f64::consts::TAU * k as f64 / m as f64)).collect()
}

fn auto_value(
    p: &Seminorm,
    field: Field,
    incs: &[Vector],
    phases: usize,
    warm: Option<&[Scalar]>,
) -> PartitionValue {
    if let Some(ys) = p.dual_extreme_points(field) {
        let (value, coefficients) = by_vertices(&ys, incs, field);
        return PartitionValue { value: value.max(0.0), coefficients, method: Method::DualVertices, lower_bound: false };
    }
    let nz = incs.iter().filter(|d| !d.is_zero()).count();
    if field == Field::Real && nz <= ENUMERATION_CAP {
        let (value, coefficients) = enumerate(p, incs, &[re(1.0), re(-1.0)]);
        return PartitionValue { value, coefficients, method: Method::SignEnumeration, lower_bound: false };
    }
    if field == Field::Complex && phases >= 2 && combinations(phases, nz) <= PHASE_COMBINATIONS_CAP {
        let (value, coefficients) = enumerate(p, incs, &unit_phases(phases));
        let (av, ac) = ascend(p, incs, field, coefficients.clone());
        let (value, coefficients) = if av > value { (av, ac) } else { (value, coefficients) };
        return PartitionValue { value, coefficients, method: Method::PhaseGrid, lower_bound: true };
    }
    let (value, coefficients) = ascent(p, incs, field, warm);
    PartitionValue { value, coefficients, method: Method::Ascent, lower_bound: true }
}

fn combinations(phases: usize, nonzero: usize) -> usize {
    if nonzero == 0 {
        return 1;
    }
    phases.checked_pow((nonzero - 1) as u32).unwrap_or(usize::MAX)
}

/// `sup_{|a_j| <= 1} p(sum_j a_j [x(t_j) - x(t_{j-1})])` by brute force:
/// signs over the real field (exact), a phase grid over the complex field
/// (lower bound). Refuses more than 20 cells.
pub fn semivariation_on_partition(
    space: &SpaceModel,
    index: usize,
    x: &PiecewiseFunction,
    partition: &TaggedPartition,
    opts: &SemivariationOptions,
) -> Result<PartitionValue> {
    check_space(space, index, x)?;
    let (a, b) = x.domain();
    if partition.domain() != (a, b) {
        let (a1, b1) = partition.domain();
        return Err(Error::DomainMismatch { a0: a, b0: b, a1, b1 });
    }
    let cells = partition.cell_count();
    if cells > ENUMERATION_CAP {
        return Err(Error::EnumerationCap { what: "partition cells", count: cells, cap: ENUMERATION_CAP });
    }
    let p = space.seminorm(index)?;
    let incs = increments(x, partition.points());
    match space.field() {
        Field::Real => {
            let (value, coefficients) = enumerate(p, &incs, &[re(1.0), re(-1.0)]);
            Ok(PartitionValue { value, coefficients, method: Method::SignEnumeration, lower_bound: false })
        }
        Field::Complex => {
            let nz = incs.iter().filter(|d| !d.is_zero()).count();
            let combos = combinations(opts.phases.max(1), nz);
            if combos > PHASE_COMBINATIONS_CAP {
                return Err(Error::EnumerationCap {
                    what: "phase-grid combinations",
                    count: combos,
                    cap: PHASE_COMBINATIONS_CAP,
                });
            }
            let (value, coefficients) = enumerate(p, &incs, &unit_phases(opts.phases.max(1)));
            Ok(PartitionValue { value, coefficients, method: Method::PhaseGrid, lower_bound: true })
        }
    }
}

/// Breakpoints plus the midpoint of every cell, so that the two one-sided
/// jumps at a breakpoint fall into different cells.
pub fn separating_points(x: &PiecewiseFunction) -> Vec<f64> {
    let bps = x.breakpoints();
    let mut pts = Vec::with_capacity(2 * bps.len());
    for w in bps.windows(2) {
        pts.push(w[0]);
        pts.push(0.5 * (w[0] + w[1]));
    }
    pts.push(*bps.last().expect("nonempty"));
    pts
}

fn bisect(points: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * points.len());
    for w in points.windows(2) {
        out.push(w[0]);
        let mid = 0.5 * (w[0] + w[1]);
        if mid > w[0] && mid < w[1] {
            out.push(mid);
        }
    }
    out.push(*points.last().expect("nonempty"));
    out
}

/// Coefficients carried from a partition to a refinement of it; the jump
/// coefficients after the cells are kept.
fn inherit(old: &[f64], alpha: &[Scalar], new: &[f64]) -> Vec<Scalar> {
    let cells = old.len() - 1;
    let mut out: Vec<Scalar> = new
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let cell = old.partition_point(|&t| t <= mid).saturating_sub(1).min(cells - 1);
            alpha[cell]
        })
        .collect();
    out.extend_from_slice(&alpha[cells..]);
    out
}

/// Semivariation of `x` for one seminorm, refined from the breakpoint
/// partition until consecutive levels agree to `tol`.
///
/// Each level works with the limit of partitions that close in on the
/// breakpoints: the smooth change over every cell, and every one-sided jump
/// as a separate increment. The initial cells contain the critical points of
/// `<y, x>` for the functionals `y` that describe the seminorm; for step
/// functions this is already optimal. For seminorms with a finite set of dual
/// extreme points over a real space, the value equals `max_y var(<y, x>)` and
/// is exact.
pub fn semivariation(
    space: &SpaceModel,
    index: usize,
    x: &PiecewiseFunction,
    opts: &SemivariationOptions,
) -> Result<SemivariationReport> {
    check_space(space, index, x)?;
    if !(opts.tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let p = space.seminorm(index)?;
    let field = space.field();
    let upper_bound = semivariation_upper_bound(space, index, x)?;
    let vertices = p.dual_extreme_points(field);

    let mut points = separating_points(x);
    let functionals: Vec<DualVector> = match &vertices {
        Some(ys) => ys.clone(),
        None => p.linear_rows().iter().map(|r| DualVector::from_real(r)).collect(),
    };
    if !x.is_step() {
        let mut knots = x.critical_points();
        for y in &functionals {
            knots.extend(x.compose_dual(y)?.critical_points());
        }
        knots.sort_by(f64::total_cmp);
        points = merge_points(&points, &knots);
    }

    let mut trace = Vec::new();
    let mut best: Option<PartitionValue> = None;
    let mut best_points = points.clone();
    let mut converged = false;
    let mut level = 0;
    loop {
        let incs = limit_increments(x, &points);
        let warm = best.as_ref().map(|b| inherit(&best_points, &b.coefficients, &points));
        let pv = auto_value(p, field, &incs, opts.phases, warm.as_deref());
        let prev = trace.last().copied();
        let improved = best.as_ref().is_none_or(|b| pv.value >= b.value);
        if improved {
            best = Some(pv);
            best_points = points.clone();
        }
        let current = best.as_ref().expect("set above").value;
        trace.push(current);
        let exact_here = x.is_step() || (field == Field::Real && vertices.is_some());
        if exact_here && best.as_ref().is_some_and(|b| b.method.is_exact()) {
            converged = true;
            break;
        }
        if let Some(prev) = prev {
            if (current - prev).abs() < opts.tol {
                converged = true;
                break;
            }
        }
        if level >= opts.max_levels || 2 * points.len() > opts.max_cells {
            break;
        }
        level += 1;
        let mut next = bisect(&points);
        let b = best.as_ref().expect("set above");
        if b.lower_bound {
            let v = combine(x.dim(), &b.coefficients, &limit_increments(x, &best_points));
            let y = p.subgradient(&v);
            next = merge_points(&next, &x.compose_dual(&y)?.critical_points());
        }
        points = next;
    }
    let best = best.expect("at least one level");
    let exact = best.method.is_exact() && (x.is_step() || (field == Field::Real && vertices.is_some()));
    Ok(SemivariationReport {
        seminorm_index: index,
        value: best.value,
        exact,
        converged,
        method: best.method,
        partition: best_points,
        coefficients: best.coefficients,
        trace,
        upper_bound,
    })
}

/// `var(<y, x>)` of a scalar functional applied to `x`.
fn functional_variation(x: &PiecewiseFunction, y: &DualVector) -> Result<f64> {
    x.compose_dual(y)?.scalar_variation()
}

/// Certified upper bound `K_p` for the semivariation:
///
/// * weighted-sup: `max_k w_k var(x_k)` (exact),
/// * weighted-one: `max_y var(<y, x>)` over the sign vertices over the reals
///   (exact), `sum_k w_k var(x_k)` otherwise,
/// * quadratic: `sqrt(sum_i var(<l_i, x>)^2)` over the rows `l_i` of `M^{1/2}`.
pub fn semivariation_upper_bound(space: &SpaceModel, index: usize, x: &PiecewiseFunction) -> Result<f64> {
    check_space(space, index, x)?;
    let p = space.seminorm(index)?;
    let coord_vars = || -> Result<Vec<f64>> { (0..x.dim()).map(|k| x.component(k)?.scalar_variation()).collect() };
    match p.kind() {
        SeminormKind::WeightedSup => {
            let w = p.weights().expect("weighted");
            Ok(coord_vars()?.iter().zip(w).fold(0.0, |m, (v, wk)| if *wk == 0.0 { m } else { m.max(wk * v) }))
        }
        SeminormKind::WeightedOne => match p.dual_extreme_points(space.field()) {
            Some(ys) => ys.iter().try_fold(0.0f64, |m, y| Ok(m.max(functional_variation(x, y)?))),
            None => {
                let w = p.weights().expect("weighted");
                Ok(coord_vars()?.iter().zip(w).map(|(v, wk)| if *wk == 0.0 { 0.0 } else { wk * v }).sum())
            }
        },
        SeminormKind::Quadratic => {
            let mut acc = 0.0;
            for row in p.linear_rows() {
                acc += functional_variation(x, &DualVector::from_real(&row))?.powi(2);
            }
            Ok(acc.sqrt())
        }
    }
}

/// `max` over the supplied duals of `var(<y, x>)`, after checking
/// `polar_gauge(bounding, y) <= 1 + 1e-9` for each of them.
pub fn dual_variation_bound(x: &PiecewiseFunction, bounding: &[Vector], duals: &[DualVector]) -> Result<f64> {
    let mut best = 0.0f64;
    for (index, y) in duals.iter().enumerate() {
        let gauge = polar_gauge(bounding, y)?;
        if gauge > 1.0 + 1e-9 {
            return Err(Error::PolarConstraint { index, gauge });
        }
        best = best.max(functional_variation(x, y)?);
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ESetMode {
    /// Subset sums of the one-sided jumps of a step function.
    Exact,
    /// Subset sums of the increments over a uniform grid with this many cells.
    Grid(usize),
}

fn subset_sums(dim: usize, parts: &[Vector]) -> Vec<Vector> {
    let mut sums = vec![Vector::zeros(dim)];
    let key = |v: &Vector| -> Vec<u64> { v.iter().flat_map(|z| [(z.re + 0.0).to_bits(), (z.im + 0.0).to_bits()]).collect() };
    for d in parts {
        let mut seen: HashSet<Vec<u64>> = sums.iter().map(key).collect();
        let extra: Vec<Vector> = sums.iter().map(|s| s + d).collect();
        for e in extra {
            if seen.insert(key(&e)) {
                sums.push(e);
            }
        }
    }
    sums
}

/// The increment set `E(a, b) = { sum_i [x(d_i) - x(c_i)] }` over finitely
/// many disjoint intervals `(c_i, d_i]`, in its finite form: exact for step
/// functions, over a uniform grid otherwise. Duplicates are removed.
pub fn e_set(x: &PiecewiseFunction, mode: ESetMode) -> Result<Vec<Vector>> {
    match mode {
        ESetMode::Exact => {
            if !x.is_step() {
                return Err(Error::NotStep);
            }
            let jumps: Vec<Vector> = x.elementary_jumps().into_iter().map(|j| j.value).collect();
            if jumps.len() > ENUMERATION_CAP {
                return Err(Error::EnumerationCap {
                    what: "jumps for the exact E-set (use grid mode)",
                    count: jumps.len(),
                    cap: ENUMERATION_CAP,
                });
            }
            Ok(subset_sums(x.dim(), &jumps))
        }
        ESetMode::Grid(r) => {
            if r < 1 {
                return invalid("grid resolution must be at least 1");
            }
            if r > ENUMERATION_CAP {
                return Err(Error::EnumerationCap { what: "grid cells for the E-set", count: r, cap: ENUMERATION_CAP });
            }
            let (a, b) = x.domain();
            let grid = TaggedPartition::uniform(a, b, r, TagRule::Left)?;
            Ok(subset_sums(x.dim(), &increments(x, grid.points())))
        }
    }
}

/// Exact mode for step functions, grid mode at `resolution` otherwise.
pub fn e_set_auto(x: &PiecewiseFunction, resolution: usize) -> Result<Vec<Vector>> {
    if x.is_step() {
        e_set(x, ESetMode::Exact)
    } else {
        e_set(x, ESetMode::Grid(resolution))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WcsBound {
    pub seminorm_index: usize,
    /// `sup_{v in E(a,b)} p(v)`; a lower estimate unless `exact`.
    pub bound: f64,
    pub exact: bool,
    /// Certified upper bound (the semivariation bound `K_p`).
    pub upper_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WcsReport {
    pub weakly_compact: bool,
    pub seminorms: Vec<WcsBound>,
}

/// Positive and negative variation of a real scalar function.
fn signed_variations(f: &PiecewiseFunction) -> Result<(f64, f64)> {
    let tv = f.scalar_variation()?;
    let (a, b) = f.domain();
    let net = (f.evaluate_unchecked(b)[0] - f.evaluate_unchecked(a)[0]).re;
    Ok((0.5 * (tv + net), 0.5 * (tv - net)))
}

/// Weak compactness of the semivariation. In finite dimensions the increment
/// set is relatively weakly compact exactly when it is bounded, and it is
/// bounded for every piecewise polynomial; the per-seminorm bounds carry the
/// information.
pub fn wcs_check(space: &SpaceModel, x: &PiecewiseFunction, grid_resolution: usize) -> Result<WcsReport> {
    check_space(space, 0, x)?;
    let exact_set = if x.is_step() && x.elementary_jumps().len() <= ENUMERATION_CAP {
        Some(e_set(x, ESetMode::Exact)?)
    } else {
        None
    };
    let grid_set = match exact_set {
        Some(_) => None,
        None => Some(e_set(x, ESetMode::Grid(grid_resolution.clamp(1, ENUMERATION_CAP)))?),
    };
    let mut seminorms = Vec::new();
    for (index, p) in space.seminorms().iter().enumerate() {
        let upper_bound = semivariation_upper_bound(space, index, x)?;
        let set_max = |set: &[Vector]| set.iter().fold(0.0f64, |m, v| m.max(p.eval_slice(v.as_slice())));
        let (bound, exact) = if let Some(set) = &exact_set {
            (set_max(set), true)
        } else if let (Field::Real, Some(ys)) = (space.field(), p.dual_extreme_points(Field::Real)) {
            let mut best = 0.0f64;
            for y in &ys {
                let (pv, nv) = signed_variations(&x.compose_dual(y)?)?;
                best = best.max(pv).max(nv);
            }
            (best, true)
        } else {
            (set_max(grid_set.as_deref().expect("grid mode")), false)
        };
        seminorms.push(WcsBound { seminorm_index: index, bound, exact, upper_bound });
    }
    let weakly_compact = seminorms.iter().all(|s| s.bound.is_finite() && s.upper_bound.is_finite());
    Ok(WcsReport { weakly_compact, seminorms })
}

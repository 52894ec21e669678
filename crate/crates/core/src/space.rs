//! The target space: `R^n` or `C^n` with a finite family of seminorms, dual
//! vectors, and polar gauges of finite sets.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::poly::CPoly;
use crate::vector::{phase, re, Scalar, Vector};

/// Smallest eigenvalue tolerated in a quadratic seminorm's matrix.
pub const PSD_FLOOR: f64 = -1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeminormKind {
    WeightedSup,
    WeightedOne,
    Quadratic,
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    WeightedSup(Vec<f64>),
    WeightedOne(Vec<f64>),
    /// `p(v) = |L v|_2` with `L = M^{1/2}`.
    Quadratic { matrix: DMatrix<f64>, root: DMatrix<f64> },
}

/// A seminorm on the coordinate space.
///
/// * weighted-sup: `max_k w_k |v_k|`
/// * weighted-one: `sum_k w_k |v_k|`
/// * quadratic: `sqrt(v* M v)` for a symmetric positive-semidefinite `M`
#[derive(Clone, Debug, PartialEq)]
pub struct Seminorm {
    repr: Repr,
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return invalid("seminorm weights must be nonempty");
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return invalid(format!("seminorm weight {w} is not a finite nonnegative number"));
    }
    Ok(())
}

impl Seminorm {
    pub fn weighted_sup(weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights)?;
        Ok(Seminorm { repr: Repr::WeightedSup(weights) })
    }

    pub fn weighted_one(weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights)?;
        Ok(Seminorm { repr: Repr::WeightedOne(weights) })
    }

    /// Quadratic seminorm from the rows of a real symmetric PSD matrix.
    pub fn quadratic(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return invalid("quadratic seminorm needs a nonempty square matrix");
        }
        if rows.iter().flatten().any(|a| !a.is_finite()) {
            return invalid("quadratic seminorm matrix has non-finite entries");
        }
        let matrix = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        let scale = matrix.amax().max(1.0);
        if (&matrix - matrix.transpose()).amax() > 1e-12 * scale {
            return invalid("quadratic seminorm matrix is not symmetric");
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone());
        let min = eig.eigenvalues.min();
        if min < PSD_FLOOR {
            return invalid(format!("quadratic seminorm matrix is not positive semidefinite (eigenvalue {min})"));
        }
        let sqrt = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let root = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt) * eig.eigenvectors.transpose();
        Ok(Seminorm { repr: Repr::Quadratic { matrix: sym, root } })
    }

    pub fn kind(&self) -> SeminormKind {
        match self.repr {
            Repr::WeightedSup(_) => SeminormKind::WeightedSup,
            Repr::WeightedOne(_) => SeminormKind::WeightedOne,
            Repr::Quadratic { .. } => SeminormKind::Quadratic,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.repr {
            Repr::WeightedSup(w) | Repr::WeightedOne(w) => w.len(),
            Repr::Quadratic { matrix, .. } => matrix.nrows(),
        }
    }

    pub fn weights(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::WeightedSup(w) | Repr::WeightedOne(w) => Some(w),
            Repr::Quadratic { .. } => None,
        }
    }

    pub fn matrix(&self) -> Option<&DMatrix<f64>> {
        match &self.repr {
            Repr::Quadratic { matrix, .. } => Some(matrix),
            _ => None,
        }
    }

    /// Rows of `M^{1/2}` (quadratic kind only).
    pub fn root(&self) -> Option<&DMatrix<f64>> {
        match &self.repr {
            Repr::Quadratic { root, .. } => Some(root),
            _ => None,
        }
    }

    pub fn eval(&self, v: &Vector) -> Result<f64> {
        v.check_dim(self.dim())?;
        Ok(self.eval_slice(v.as_slice()))
    }

    pub(crate) fn eval_slice(&self, v: &[Scalar]) -> f64 {
        match &self.repr {
            Repr::WeightedSup(w) => w.iter().zip(v).fold(0.0, |m, (w, z)| m.max(w * z.norm())),
            Repr::WeightedOne(w) => w.iter().zip(v).map(|(w, z)| w * z.norm()).sum(),
            Repr::Quadratic { root, .. } => {
                let n = root.nrows();
                let mut acc = 0.0;
                for i in 0..n {
                    let mut row = Scalar::new(0.0, 0.0);
                    for (j, z) in v.iter().enumerate() {
                        row += z * root[(i, j)];
                    }
                    acc += row.norm_sqr();
                }
                acc.sqrt()
            }
        }
    }

    /// A dual vector `y` attaining `<y, v> = p(v)` with dual norm at most 1.
    pub fn subgradient(&self, v: &Vector) -> DualVector {
        let d = v.dim();
        let coeffs = match &self.repr {
            Repr::WeightedSup(w) => {
                let mut best = 0;
                let mut best_val = -1.0;
                for (k, (wk, z)) in w.iter().zip(v.iter()).enumerate() {
                    let val = wk * z.norm();
                    if val > best_val {
                        best_val = val;
                        best = k;
                    }
                }
                let mut y = Vector::zeros(d);
                y[best] = phase(v[best]) * w[best];
                y
            }
            Repr::WeightedOne(w) => {
                Vector::from_scalars(w.iter().zip(v.iter()).map(|(wk, z)| phase(*z) * *wk).collect())
            }
            Repr::Quadratic { matrix, .. } => {
                let pv = self.eval_slice(v.as_slice());
                let mut y = Vector::zeros(d);
                if pv > 0.0 {
                    for i in 0..d {
                        let mut acc = Scalar::new(0.0, 0.0);
                        for j in 0..d {
                            acc += v[j] * matrix[(i, j)];
                        }
                        y[i] = acc / pv;
                    }
                }
                y
            }
        };
        DualVector(coeffs)
    }

    /// A finite set `Y` of dual vectors with `p(v) = max_{y in Y} |<y, v>|`
    /// for every `v` of the given field, when such a set is available:
    /// weighted-sup over either field, weighted-one over the reals.
    pub fn dual_extreme_points(&self, field: Field) -> Option<Vec<DualVector>> {
        match (&self.repr, field) {
            (Repr::WeightedSup(w), _) => Some(
                w.iter()
                    .enumerate()
                    .filter(|(_, wk)| **wk > 0.0)
                    .map(|(k, wk)| DualVector(Vector::unit(w.len(), k).scaled_real(*wk)))
                    .collect(),
            ),
            (Repr::WeightedOne(w), Field::Real) => {
                let active: Vec<usize> = (0..w.len()).filter(|&k| w[k] > 0.0).collect();
                if active.len() > 16 {
                    return None;
                }
                if active.is_empty() {
                    return Some(Vec::new());
                }
                let count = 1usize << (active.len() - 1);
                Some(
                    (0..count)
                        .map(|mask| {
                            let mut y = Vector::zeros(w.len());
                            for (bit, &k) in active.iter().enumerate() {
                                let sign = if bit > 0 && mask >> (bit - 1) & 1 == 1 { -1.0 } else { 1.0 };
                                y[k] = re(sign * w[k]);
                            }
                            DualVector(y)
                        })
                        .collect(),
                )
            }
            _ => None,
        }
    }

    /// A finite set whose absolutely convex hull contains the closed unit
    /// ball `{p <= 1}` of the given field, so that `polar_gauge(set, y) <= 1`
    /// implies `|<y, v>| <= p(v)`. Exact (hull equals the ball) for
    /// weighted-one, and for weighted-sup over the reals.
    pub fn bounding_set(&self, field: Field) -> Result<Vec<Vector>> {
        let d = self.dim();
        let widen = if field == Field::Complex { 2.0 } else { 1.0 };
        let box_vertices = |inv: &dyn Fn(&Vector) -> Vector| -> Vec<Vector> {
            (0..1usize << (d - 1))
                .map(|mask| {
                    let s: Vec<f64> =
                        (0..d).map(|k| if k > 0 && mask >> (k - 1) & 1 == 1 { -1.0 } else { 1.0 }).collect();
                    inv(&Vector::from_real(&s)).scaled_real(widen)
                })
                .collect()
        };
        match &self.repr {
            Repr::WeightedOne(w) => {
                if w.contains(&0.0) {
                    return invalid("unit ball is unbounded (zero weight)");
                }
                Ok((0..d).map(|k| Vector::unit(d, k).scaled_real(1.0 / w[k])).collect())
            }
            Repr::WeightedSup(w) => {
                if w.contains(&0.0) {
                    return invalid("unit ball is unbounded (zero weight)");
                }
                if d > 16 {
                    return invalid("bounding set enumeration is limited to dimension 16");
                }
                Ok(box_vertices(&|s: &Vector| {
                    Vector::from_scalars(s.iter().zip(w).map(|(z, wk)| z / wk).collect())
                }))
            }
            Repr::Quadratic { root, .. } => {
                if d > 16 {
                    return invalid("bounding set enumeration is limited to dimension 16");
                }
                let inv = root
                    .clone()
                    .try_inverse()
                    .filter(|m| m.iter().all(|a| a.is_finite()))
                    .ok_or_else(|| Error::InvalidInput("unit ball is unbounded (singular matrix)".into()))?;
                Ok(box_vertices(&|s: &Vector| {
                    Vector::from_scalars(
                        (0..d)
                            .map(|i| (0..d).map(|j| s[j] * inv[(i, j)]).sum::<Scalar>())
                            .collect(),
                    )
                }))
            }
        }
    }

    /// `c` with `p(v) <= c * max_k |v_k|`.
    pub fn sup_norm_factor(&self) -> f64 {
        match &self.repr {
            Repr::WeightedSup(w) => w.iter().fold(0.0, |m: f64, x| m.max(*x)),
            Repr::WeightedOne(w) => w.iter().sum(),
            Repr::Quadratic { root, .. } => root
                .row_iter()
                .map(|r| r.iter().map(|a| a.abs()).sum::<f64>().powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Upper bound for `sup_{lo <= t <= hi} p(q(t))` where `q` lists the
    /// coordinate polynomials.
    pub fn bound_on(&self, q: &[CPoly], lo: f64, hi: f64) -> f64 {
        match &self.repr {
            Repr::WeightedSup(w) => {
                w.iter().zip(q).fold(0.0, |m, (wk, qk)| if *wk == 0.0 { m } else { m.max(wk * qk.sup_abs(lo, hi)) })
            }
            Repr::WeightedOne(w) => w
                .iter()
                .zip(q)
                .map(|(wk, qk)| if *wk == 0.0 { 0.0 } else { wk * qk.sup_abs(lo, hi) })
                .sum(),
            Repr::Quadratic { root, .. } => (0..root.nrows())
                .map(|i| {
                    let row = q
                        .iter()
                        .enumerate()
                        .fold(CPoly::default(), |acc, (j, qj)| acc.add(&qj.scale(re(root[(i, j)]))));
                    row.sup_abs(lo, hi).powi(2)
                })
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Coefficient rows `r_i` such that `p(v) <= sqrt(sum_i |<r_i, v>|^2)`
    /// (rows of `M^{1/2}`), or the weighted coordinate rows otherwise.
    pub(crate) fn linear_rows(&self) -> Vec<Vec<f64>> {
        match &self.repr {
            Repr::WeightedSup(w) | Repr::WeightedOne(w) => (0..w.len())
                .map(|k| {
                    let mut r = vec![0.0; w.len()];
                    r[k] = w[k];
                    r
                })
                .collect(),
            Repr::Quadratic { root, .. } => root.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }

    fn kernel_rows(&self) -> Vec<Vec<f64>> {
        self.linear_rows()
    }
}

/// A continuous linear functional, paired as `<y, v> = sum_k conj(y_k) v_k`
/// (linear in `v`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DualVector(pub Vector);

impl DualVector {
    pub fn new(coefficients: Vector) -> Self {
        DualVector(coefficients)
    }

    pub fn from_real(c: &[f64]) -> Self {
        DualVector(Vector::from_real(c))
    }

    pub fn coefficients(&self) -> &Vector {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn pair(&self, v: &Vector) -> Result<Scalar> {
        v.check_dim(self.dim())?;
        Ok(self.pair_unchecked(v))
    }

    pub(crate) fn pair_unchecked(&self, v: &Vector) -> Scalar {
        self.0.iter().zip(v.iter()).map(|(y, z)| y.conj() * z).sum()
    }

    /// Coefficients of the scalar polynomial `<y, q(t)>`.
    pub(crate) fn pair_polys(&self, q: &[CPoly]) -> CPoly {
        self.0
            .iter()
            .zip(q)
            .fold(CPoly::default(), |acc, (y, qk)| acc.add(&qk.scale(y.conj())))
    }
}

/// `sup_{a in A} |<y, a>|`: the polar seminorm of a finite set, evaluated at `y`.
pub fn polar_gauge(set: &[Vector], y: &DualVector) -> Result<f64> {
    if set.is_empty() {
        return invalid("polar gauge of an empty set");
    }
    set.iter().try_fold(0.0f64, |m, a| Ok(m.max(y.pair(a)?.norm())))
}

/// The space model: dimension, scalar field, and an ordered seminorm family.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceModel {
    dimension: usize,
    field: Field,
    seminorms: Vec<Seminorm>,
    separating: bool,
}

impl SpaceModel {
    pub fn new(dimension: usize, field: Field, seminorms: Vec<Seminorm>) -> Result<Self> {
        if dimension == 0 {
            return invalid("dimension must be at least 1");
        }
        if seminorms.is_empty() {
            return invalid("seminorm family must be nonempty");
        }
        for p in &seminorms {
            if p.dim() != dimension {
                return Err(Error::DimensionMismatch { expected: dimension, found: p.dim() });
            }
        }
        let separating = separates_points(dimension, &seminorms);
        Ok(SpaceModel { dimension, field, seminorms, separating })
    }

    /// The scalar field itself with `p(z) = |z|`.
    pub fn scalar(field: Field) -> Self {
        let p = Seminorm::weighted_one(vec![1.0]).expect("valid weights");
        SpaceModel { dimension: 1, field, seminorms: vec![p], separating: true }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn seminorms(&self) -> &[Seminorm] {
        &self.seminorms
    }

    pub fn seminorm(&self, index: usize) -> Result<&Seminorm> {
        self.seminorms
            .get(index)
            .ok_or_else(|| Error::InvalidInput(format!("no seminorm with index {index}")))
    }

    /// Whether `p_k(v) = 0` for every `k` forces `v = 0`.
    pub fn separating(&self) -> bool {
        self.separating
    }

    pub fn eval_all(&self, v: &Vector) -> Result<Vec<f64>> {
        self.seminorms.iter().map(|p| p.eval(v)).collect()
    }

    /// `max_{k in subset} p_k(v)`: an element of the directed closure of the
    /// family under pairwise maxima.
    pub fn directed_max(&self, subset: &[usize], v: &Vector) -> Result<f64> {
        if subset.is_empty() {
            return invalid("directed max over an empty subset");
        }
        subset.iter().try_fold(0.0f64, |m, &k| Ok(m.max(self.seminorm(k)?.eval(v)?)))
    }

    /// Checks the dimension, and that real-field vectors have no imaginary part.
    pub fn check_vector(&self, v: &Vector) -> Result<()> {
        v.check_dim(self.dimension)?;
        if self.field == Field::Real && !v.is_real() {
            return invalid("complex value in a real space");
        }
        Ok(())
    }

    /// Deterministic sample of the polar ball `{y : polar_gauge(set, y) <= 1}`.
    ///
    /// The coordinate axes come first, rescaled onto the boundary; then
    /// random directions, alternating between boundary radii in `[0.99, 1]`
    /// and interior radii in `[0, 1]`. Directions on which the gauge vanishes
    /// (unbounded directions of the polar) are kept at unit Euclidean length.
    pub fn sample_dual_ball(&self, set: &[Vector], count: usize, seed: u64) -> Result<Vec<DualVector>> {
        if count == 0 {
            return invalid("sample count must be at least 1");
        }
        if set.is_empty() {
            return invalid("bounding set is empty");
        }
        for a in set {
            a.check_dim(self.dimension)?;
        }
        let support: Vec<Vector> = set.iter().filter(|a| !a.is_zero()).cloned().collect();
        if support.is_empty() {
            return invalid("bounding set is all zero: its polar gauge vanishes identically");
        }
        let gauge = |y: &DualVector| support.iter().fold(0.0f64, |m, a| m.max(y.pair_unchecked(a).norm()));
        let d = self.dimension;
        let mut out = Vec::with_capacity(count);
        for k in 0..d.min(count) {
            let y = DualVector(Vector::unit(d, k));
            let g = gauge(&y);
            out.push(if g > 0.0 { DualVector(y.0.scaled_real(1.0 / g)) } else { y });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut i = 0usize;
        while out.len() < count {
            let u = Vector::from_scalars(
                (0..d)
                    .map(|_| match self.field {
                        Field::Real => re(rng.gen_range(-1.0..=1.0)),
                        Field::Complex => Scalar::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)),
                    })
                    .collect(),
            );
            let radius = if i % 2 == 0 { rng.gen_range(0.99..=1.0) } else { rng.gen_range(0.0..=1.0) };
            i += 1;
            let y = DualVector(u);
            let g = gauge(&y);
            if g > 0.0 {
                out.push(DualVector(y.0.scaled_real(radius / g)));
            } else {
                let n = y.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if n > 0.0 {
                    out.push(DualVector(y.0.scaled_real(1.0 / n)));
                }
            }
        }
        Ok(out)
    }
}

fn separates_points(dimension: usize, seminorms: &[Seminorm]) -> bool {
    let rows: Vec<Vec<f64>> = seminorms.iter().flat_map(|p| p.kernel_rows()).collect();
    let stacked = DMatrix::from_fn(rows.len(), dimension, |i, j| rows[i][j]);
    let svd = stacked.svd(false, false);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return false;
    }
    let rank = svd.singular_values.iter().filter(|s| **s > 1e-12 * smax).count();
    rank == dimension
}

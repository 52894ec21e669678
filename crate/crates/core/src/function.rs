//! Breakpoint-based piecewise polynomials with explicit breakpoint values.
//!
//! A function on `[a, b]` with breakpoints `a = b_0 < ... < b_m = b` stores one
//! polynomial per coordinate on each cell `[b_i, b_{i+1})`, written in the
//! global variable `t`, together with its value at every breakpoint. The
//! default values make the function right-continuous on `[a, b)` and
//! left-continuous at `b`; other values can be supplied explicitly, so that
//! removable and left-side discontinuities are representable too.
//!
//! At a breakpoint `b_i` three numbers matter: the left limit `L_i` (from the
//! piece on the left), the value `V_i` and the right limit `R_i`. The
//! elementary jumps are `V_i - L_i` and `R_i - V_i`.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::poly::CPoly;
use crate::space::DualVector;
use crate::vector::{re, Scalar, Vector};

pub const MAX_DEGREE: usize = 6;

/// Relative size below which a breakpoint mismatch counts as rounding.
pub const JUMP_RTOL: f64 = 1e-12;

/// Which side of a breakpoint an elementary jump sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `V_i - L_i`
    Left,
    /// `R_i - V_i`
    Right,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Jump {
    pub t: f64,
    pub side: Side,
    pub value: Vector,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiecewiseFunction {
    breakpoints: Vec<f64>,
    pieces: Vec<Vec<CPoly>>,
    values: Vec<Vector>,
}

fn negligible(delta: &Vector, a: &Vector, b: &Vector) -> bool {
    delta.max_abs() <= JUMP_RTOL * (1.0 + a.max_abs().max(b.max_abs()))
}

fn eval_polys(q: &[CPoly], t: f64) -> Vector {
    Vector::from_scalars(q.iter().map(|p| p.eval(t)).collect())
}

impl PiecewiseFunction {
    /// Right-continuous function from breakpoints and per-cell polynomials
    /// (`pieces[i][k]` is coordinate `k` on cell `i`).
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Vec<CPoly>>) -> Result<Self> {
        let values = Self::default_values(&breakpoints, &pieces)?;
        Self::with_values(breakpoints, pieces, values)
    }

    /// Like [`new`](Self::new) with the value at `b` given explicitly.
    pub fn with_end_value(breakpoints: Vec<f64>, pieces: Vec<Vec<CPoly>>, end: Vector) -> Result<Self> {
        let mut values = Self::default_values(&breakpoints, &pieces)?;
        *values.last_mut().expect("nonempty") = end;
        Self::with_values(breakpoints, pieces, values)
    }

    /// Fully explicit breakpoint values. The result need not be
    /// right-continuous.
    pub fn with_values(breakpoints: Vec<f64>, pieces: Vec<Vec<CPoly>>, values: Vec<Vector>) -> Result<Self> {
        Self::check_shape(&breakpoints, &pieces)?;
        let dim = pieces[0].len();
        if values.len() != breakpoints.len() {
            return invalid(format!("{} breakpoint values given for {} breakpoints", values.len(), breakpoints.len()));
        }
        for v in &values {
            v.check_dim(dim)?;
            if !v.is_finite() {
                return invalid("non-finite breakpoint value");
            }
        }
        Ok(PiecewiseFunction { breakpoints, pieces, values })
    }

    fn check_shape(breakpoints: &[f64], pieces: &[Vec<CPoly>]) -> Result<()> {
        if breakpoints.len() < 2 {
            return invalid("at least two breakpoints are required");
        }
        if breakpoints.iter().any(|t| !t.is_finite()) {
            return invalid("breakpoints must be finite");
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("breakpoints must be strictly increasing");
        }
        if pieces.len() + 1 != breakpoints.len() {
            return invalid(format!("{} pieces given for {} cells", pieces.len(), breakpoints.len() - 1));
        }
        let dim = pieces[0].len();
        if dim == 0 {
            return invalid("functions must have at least one coordinate");
        }
        for piece in pieces {
            if piece.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: piece.len() });
            }
            for p in piece {
                if p.degree() > MAX_DEGREE {
                    return invalid(format!("piece degree {} exceeds {MAX_DEGREE}", p.degree()));
                }
                if p.coefficients().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return invalid("non-finite polynomial coefficient");
                }
            }
        }
        Ok(())
    }

    fn default_values(breakpoints: &[f64], pieces: &[Vec<CPoly>]) -> Result<Vec<Vector>> {
        Self::check_shape(breakpoints, pieces)?;
        let m = pieces.len();
        let mut values: Vec<Vector> = (0..m).map(|i| eval_polys(&pieces[i], breakpoints[i])).collect();
        values.push(eval_polys(&pieces[m - 1], breakpoints[m]));
        Ok(values)
    }

    /// Scalar function from one polynomial per cell.
    pub fn scalar(breakpoints: Vec<f64>, pieces: Vec<CPoly>) -> Result<Self> {
        Self::new(breakpoints, pieces.into_iter().map(|p| vec![p]).collect())
    }

    /// Single-piece function.
    pub fn polynomial(a: f64, b: f64, coordinates: Vec<CPoly>) -> Result<Self> {
        Self::new(vec![a, b], vec![coordinates])
    }

    pub fn constant(a: f64, b: f64, value: &Vector) -> Result<Self> {
        Self::polynomial(a, b, value.iter().map(|z| CPoly::constant(*z)).collect())
    }

    /// Right-continuous step function equal to `initial` on `[a, t_1)` and
    /// jumping by each `J_j` at `t_j`. Jumps at `b` are allowed.
    pub fn step(a: f64, b: f64, initial: &Vector, jumps: &[(f64, Vector)]) -> Result<Self> {
        let mut bps = vec![a];
        let mut pieces = Vec::new();
        let mut level = initial.clone();
        let constant = |v: &Vector| v.iter().map(|z| CPoly::constant(*z)).collect::<Vec<_>>();
        let mut end = None;
        for (j, (t, jump)) in jumps.iter().enumerate() {
            jump.check_dim(initial.dim())?;
            if !(*t > a && *t <= b) || (j > 0 && *t <= jumps[j - 1].0) {
                return invalid("step jump locations must be strictly increasing inside (a, b]");
            }
            if *t == b {
                end = Some(&level + jump);
                continue;
            }
            pieces.push(constant(&level));
            bps.push(*t);
            level += jump;
        }
        pieces.push(constant(&level));
        bps.push(b);
        match end {
            Some(e) => Self::with_end_value(bps, pieces, e),
            None => Self::new(bps, pieces),
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().expect("nonempty"))
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].len()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Vec<CPoly>] {
        &self.pieces
    }

    pub fn piece(&self, i: usize) -> &[CPoly] {
        &self.pieces[i]
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    pub fn values(&self) -> &[Vector] {
        &self.values
    }

    /// Largest polynomial degree over all pieces and coordinates.
    pub fn degree(&self) -> usize {
        self.pieces.iter().flatten().map(CPoly::degree).max().unwrap_or(0)
    }

    pub fn is_real(&self) -> bool {
        self.pieces.iter().flatten().all(CPoly::is_real) && self.values.iter().all(Vector::is_real)
    }

    pub fn check_domain(&self, t: f64) -> Result<()> {
        let (a, b) = self.domain();
        if t >= a && t <= b {
            Ok(())
        } else {
            Err(Error::OutOfDomain { t, a, b })
        }
    }

    pub fn same_domain(&self, other: &PiecewiseFunction) -> Result<()> {
        let (a0, b0) = self.domain();
        let (a1, b1) = other.domain();
        if a0 == a1 && b0 == b1 {
            Ok(())
        } else {
            Err(Error::DomainMismatch { a0, b0, a1, b1 })
        }
    }

    /// Index of the cell `[b_i, b_{i+1})` holding `t`; the last cell for `t = b`.
    pub fn locate(&self, t: f64) -> usize {
        let m = self.pieces.len();
        match self.breakpoints.partition_point(|&x| x <= t) {
            0 => 0,
            k => (k - 1).min(m - 1),
        }
    }

    pub fn breakpoint_index(&self, t: f64) -> Option<usize> {
        self.breakpoints.binary_search_by(|x| x.total_cmp(&t)).ok()
    }

    pub fn eval_piece(&self, i: usize, t: f64) -> Vector {
        eval_polys(&self.pieces[i], t)
    }

    pub fn evaluate(&self, t: f64) -> Result<Vector> {
        self.check_domain(t)?;
        Ok(self.evaluate_unchecked(t))
    }

    pub(crate) fn evaluate_unchecked(&self, t: f64) -> Vector {
        match self.breakpoint_index(t) {
            Some(i) => self.values[i].clone(),
            None => self.eval_piece(self.locate(t), t),
        }
    }

    /// Value of a scalar function.
    pub fn evaluate_scalar(&self, t: f64) -> Result<Scalar> {
        self.require_scalar()?;
        Ok(self.evaluate(t)?[0])
    }

    pub fn require_scalar(&self) -> Result<()> {
        if self.dim() == 1 {
            Ok(())
        } else {
            invalid(format!("expected a scalar function, got dimension {}", self.dim()))
        }
    }

    /// `(x(t-), x(t+))`; the left limit is absent at `a`, the right one at `b`.
    pub fn one_sided_limits(&self, t: f64) -> Result<(Option<Vector>, Option<Vector>)> {
        self.check_domain(t)?;
        let (a, b) = self.domain();
        let left = (t > a).then(|| match self.breakpoint_index(t) {
            Some(i) => self.eval_piece(i - 1, t),
            None => self.eval_piece(self.locate(t), t),
        });
        let right = (t < b).then(|| self.eval_piece(self.locate(t), t));
        Ok((left, right))
    }

    fn left_limit_at(&self, i: usize) -> Option<Vector> {
        (i > 0).then(|| self.eval_piece(i - 1, self.breakpoints[i]))
    }

    fn right_limit_at(&self, i: usize) -> Option<Vector> {
        (i < self.pieces.len()).then(|| self.eval_piece(i, self.breakpoints[i]))
    }

    /// Breakpoints where the value differs from the left limit, with the jump
    /// `x(t) - x(t-)`.
    pub fn jump_points(&self) -> Vec<(f64, Vector)> {
        (1..self.breakpoints.len())
            .filter_map(|i| {
                let l = self.left_limit_at(i).expect("i > 0");
                let d = &self.values[i] - &l;
                (!negligible(&d, &l, &self.values[i])).then(|| (self.breakpoints[i], d))
            })
            .collect()
    }

    /// All nonzero one-sided jumps in increasing order of position, the left
    /// part before the right part at a shared breakpoint.
    pub fn elementary_jumps(&self) -> Vec<Jump> {
        let mut out = Vec::new();
        for (i, &t) in self.breakpoints.iter().enumerate() {
            let v = &self.values[i];
            if let Some(l) = self.left_limit_at(i) {
                let d = v - &l;
                if !negligible(&d, &l, v) {
                    out.push(Jump { t, side: Side::Left, value: d });
                }
            }
            if let Some(r) = self.right_limit_at(i) {
                let d = &r - v;
                if !negligible(&d, &r, v) {
                    out.push(Jump { t, side: Side::Right, value: d });
                }
            }
        }
        out
    }

    /// Breakpoints at which either one-sided limit differs from the value.
    pub fn discontinuities(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.elementary_jumps().into_iter().map(|j| j.t).collect();
        pts.dedup();
        pts
    }

    pub fn is_continuous(&self) -> bool {
        self.elementary_jumps().is_empty()
    }

    /// First point of `[a, b)` where the function is not right-continuous.
    pub fn right_discontinuity(&self) -> Option<f64> {
        self.elementary_jumps().into_iter().find(|j| j.side == Side::Right).map(|j| j.t)
    }

    pub fn is_right_continuous(&self) -> bool {
        self.right_discontinuity().is_none()
    }

    pub fn is_step(&self) -> bool {
        self.pieces.iter().flatten().all(CPoly::is_constant)
    }

    /// Exact total variation of a scalar function: arc variation of every
    /// piece plus the moduli of all elementary jumps.
    pub fn scalar_variation(&self) -> Result<f64> {
        self.require_scalar()?;
        let pieces: f64 = self
            .pieces
            .iter()
            .enumerate()
            .map(|(i, p)| p[0].variation(self.breakpoints[i], self.breakpoints[i + 1]))
            .sum();
        let jumps: f64 = self.elementary_jumps().iter().map(|j| j.value[0].norm()).sum();
        Ok(pieces + jumps)
    }

    /// Interior critical points of the real and imaginary parts of every
    /// coordinate, over all pieces, ascending.
    pub fn critical_points(&self) -> Vec<f64> {
        let mut pts = Vec::new();
        for (i, piece) in self.pieces.iter().enumerate() {
            let (lo, hi) = (self.breakpoints[i], self.breakpoints[i + 1]);
            for q in piece {
                for part in [q.re(), q.im()] {
                    let k = part.knots(lo, hi);
                    pts.extend_from_slice(&k[1..k.len() - 1]);
                }
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// `sup_t max_k |x_k(t)|`.
    pub fn sup_norm(&self) -> f64 {
        let pieces = self.pieces.iter().enumerate().fold(0.0f64, |m, (i, p)| {
            p.iter()
                .fold(m, |m, q| m.max(q.sup_abs(self.breakpoints[i], self.breakpoints[i + 1])))
        });
        self.values.iter().fold(pieces, |m, v| m.max(v.max_abs()))
    }

    /// The scalar function `t -> <y, x(t)>`.
    pub fn compose_dual(&self, y: &DualVector) -> Result<PiecewiseFunction> {
        if y.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: y.dim() });
        }
        Ok(PiecewiseFunction {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(|p| vec![y.pair_polys(p)]).collect(),
            values: self.values.iter().map(|v| Vector::scalar(y.pair_unchecked(v))).collect(),
        })
    }

    pub fn component(&self, k: usize) -> Result<PiecewiseFunction> {
        if k >= self.dim() {
            return invalid(format!("no coordinate {k} in dimension {}", self.dim()));
        }
        Ok(PiecewiseFunction {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(|p| vec![p[k].clone()]).collect(),
            values: self.values.iter().map(|v| Vector::scalar(v[k])).collect(),
        })
    }

    pub fn scale(&self, alpha: Scalar) -> PiecewiseFunction {
        PiecewiseFunction {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(|p| p.iter().map(|q| q.scale(alpha)).collect()).collect(),
            values: self.values.iter().map(|v| v.scaled(alpha)).collect(),
        }
    }

    /// `x + c` for a constant vector `c`.
    pub fn shift(&self, c: &Vector) -> Result<PiecewiseFunction> {
        c.check_dim(self.dim())?;
        Ok(PiecewiseFunction {
            breakpoints: self.breakpoints.clone(),
            pieces: self
                .pieces
                .iter()
                .map(|p| p.iter().zip(c.iter()).map(|(q, z)| q.shift(*z)).collect())
                .collect(),
            values: self.values.iter().map(|v| v + c).collect(),
        })
    }

    /// Pointwise sum over the merged breakpoints.
    pub fn add(&self, other: &PiecewiseFunction) -> Result<PiecewiseFunction> {
        self.same_domain(other)?;
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        let bps = merge_points(&self.breakpoints, &other.breakpoints);
        let pieces = bps
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let (p, q) = (&self.pieces[self.locate(mid)], &other.pieces[other.locate(mid)]);
                p.iter().zip(q).map(|(u, v)| u.add(v)).collect()
            })
            .collect();
        let values = bps
            .iter()
            .map(|&t| &self.evaluate_unchecked(t) + &other.evaluate_unchecked(t))
            .collect();
        Ok(PiecewiseFunction { breakpoints: bps, pieces, values })
    }

    /// The same function with extra breakpoints inserted (values unchanged).
    pub fn refine_at(&self, points: &[f64]) -> Result<PiecewiseFunction> {
        for &t in points {
            self.check_domain(t)?;
        }
        let bps = merge_points(&self.breakpoints, points);
        let pieces = bps.windows(2).map(|w| self.pieces[self.locate(0.5 * (w[0] + w[1]))].clone()).collect();
        let values = bps.iter().map(|&t| self.evaluate_unchecked(t)).collect();
        Ok(PiecewiseFunction { breakpoints: bps, pieces, values })
    }
}

/// Sorted union of two point lists without duplicates.
pub fn merge_points(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

/// Scalar polynomial helper: `c[0] + c[1] t + ...` with real coefficients.
pub fn real_poly(c: &[f64]) -> CPoly {
    CPoly::from_real(c)
}

/// Scalar constant as a one-coordinate vector.
pub fn scalar_vector(z: f64) -> Vector {
    Vector::scalar(re(z))
}

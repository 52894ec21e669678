//! Coordinate vectors over `C` and deterministic summation.

use std::ops::{Add, AddAssign, Index, IndexMut, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Scalar = Complex64;

/// A coordinate vector. Real vectors are stored with zero imaginary parts, so
/// real arithmetic is reproduced exactly.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Vector(Vec<Scalar>);

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        Vector(vec![Scalar::new(0.0, 0.0); dim])
    }

    pub fn from_real(values: &[f64]) -> Self {
        Vector(values.iter().map(|&v| Scalar::new(v, 0.0)).collect())
    }

    pub fn from_scalars(values: Vec<Scalar>) -> Self {
        Vector(values)
    }

    pub fn scalar(value: Scalar) -> Self {
        Vector(vec![value])
    }

    pub fn unit(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[k] = Scalar::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Scalar] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [Scalar] {
        &mut self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Scalar> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<Scalar> {
        self.0
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|z| z.im == 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Real parts, in order.
    pub fn re(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.re).collect()
    }

    /// `(re_0, im_0, re_1, im_1, ...)`: the realification used by the hull LP.
    pub fn realify(&self) -> Vec<f64> {
        self.0.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    /// Largest coordinate modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn scaled(&self, alpha: Scalar) -> Vector {
        Vector(self.0.iter().map(|z| alpha * z).collect())
    }

    pub fn scaled_real(&self, alpha: f64) -> Vector {
        Vector(self.0.iter().map(|z| z * alpha).collect())
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: Scalar, other: &Vector) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += alpha * b;
        }
    }

    pub fn conj(&self) -> Vector {
        Vector(self.0.iter().map(|z| z.conj()).collect())
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found: self.dim() })
        }
    }

    /// Max-abs distance over the common coordinates.
    pub fn distance_max(&self, other: &Vector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

impl From<Vec<Scalar>> for Vector {
    fn from(v: Vec<Scalar>) -> Self {
        Vector(v)
    }
}

impl Index<usize> for Vector {
    type Output = Scalar;
    fn index(&self, i: usize) -> &Scalar {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut Scalar {
        &mut self.0[i]
    }
}

impl AddAssign<&Vector> for Vector {
    fn add_assign(&mut self, rhs: &Vector) {
        debug_assert_eq!(self.dim(), rhs.dim());
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += b;
        }
    }
}

impl SubAssign<&Vector> for Vector {
    fn sub_assign(&mut self, rhs: &Vector) {
        debug_assert_eq!(self.dim(), rhs.dim());
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a -= b;
        }
    }
}

impl Add<&Vector> for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&Vector> for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        Vector(self.0.iter().map(|z| -z).collect())
    }
}

/// Serialized as a list of numbers when every coordinate is real, otherwise
/// as a list of `[re, im]` pairs.
impl Serialize for Vector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_real() {
            serializer.collect_seq(self.0.iter().map(|z| z.re))
        } else {
            serializer.collect_seq(self.0.iter().map(|z| [z.re, z.im]))
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Num {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Num> for Scalar {
    fn from(n: Num) -> Scalar {
        match n {
            Num::Real(r) => Scalar::new(r, 0.0),
            Num::Complex([re, im]) => Scalar::new(re, im),
        }
    }
}

impl<'de> Deserialize<'de> for Vector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<Num>::deserialize(deserializer)?;
        Ok(Vector(raw.into_iter().map(Scalar::from).collect()))
    }
}

/// Scalars serialize as a number when real, else as `[re, im]`.
pub mod scalar_serde {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Scalar, s: S) -> std::result::Result<S::Ok, S::Error> {
        if z.im == 0.0 {
            s.serialize_f64(z.re)
        } else {
            [z.re, z.im].serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Scalar, D::Error> {
        Ok(Num::deserialize(d)?.into())
    }
}

/// Sequence of scalars with the same real/complex convention as [`Vector`].
pub mod scalars_serde {
    use super::*;

    pub fn serialize<S: Serializer>(zs: &[Scalar], s: S) -> std::result::Result<S::Ok, S::Error> {
        Vector(zs.to_vec()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Scalar>, D::Error> {
        Ok(Vector::deserialize(d)?.0)
    }
}

const BLOCK: usize = 32;

/// Streaming pairwise summation with a fixed tree: terms are added
/// sequentially in blocks of 32, and block sums are combined like a binary
/// counter. The result depends only on the order of the pushed terms.
pub struct PairwiseSum {
    dim: usize,
    block: Vector,
    block_len: usize,
    stack: Vec<(u32, Vector)>,
}

impl PairwiseSum {
    pub fn new(dim: usize) -> Self {
        PairwiseSum { dim, block: Vector::zeros(dim), block_len: 0, stack: Vec::new() }
    }

    /// Adds `alpha * v`.
    pub fn push_scaled(&mut self, alpha: Scalar, v: &Vector) {
        self.block.axpy(alpha, v);
        self.bump();
    }

    pub fn push(&mut self, v: &Vector) {
        self.block += v;
        self.bump();
    }

    fn bump(&mut self) {
        self.block_len += 1;
        if self.block_len == BLOCK {
            let full = std::mem::replace(&mut self.block, Vector::zeros(self.dim));
            self.block_len = 0;
            self.carry(full);
        }
    }

    fn carry(&mut self, mut v: Vector) {
        let mut level = 0;
        while let Some((top, _)) = self.stack.last() {
            if *top != level {
                break;
            }
            let (_, prev) = self.stack.pop().expect("non-empty");
            let mut merged = prev;
            merged += &v;
            v = merged;
            level += 1;
        }
        self.stack.push((level, v));
    }

    pub fn finish(mut self) -> Vector {
        let mut acc = if self.block_len > 0 {
            std::mem::replace(&mut self.block, Vector::zeros(self.dim))
        } else {
            Vector::zeros(self.dim)
        };
        // fold from the most recent (smallest) partial sums toward the oldest
        while let Some((_, v)) = self.stack.pop() {
            let mut merged = v;
            merged += &acc;
            acc = merged;
        }
        acc
    }
}

/// Deterministic pairwise sum of a slice of vectors.
pub fn pairwise_sum(dim: usize, terms: &[Vector]) -> Vector {
    let mut acc = PairwiseSum::new(dim);
    for t in terms {
        acc.push(t);
    }
    acc.finish()
}

pub(crate) fn re(x: f64) -> Scalar {
    Scalar::new(x, 0.0)
}

/// Unit-modulus phase of `z`, with `phase(0) = 1`.
pub(crate) fn phase(z: Scalar) -> Scalar {
    let n = z.norm();
    if n == 0.0 {
        re(1.0)
    } else {
        z / n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_exact_data() {
        let terms: Vec<Vector> = (0..1000).map(|k| Vector::from_real(&[k as f64, 1.0])).collect();
        let s = pairwise_sum(2, &terms);
        assert_eq!(s, Vector::from_real(&[499500.0, 1000.0]));
    }

    #[test]
    fn pairwise_is_order_deterministic() {
        let terms: Vec<Vector> = (0..777).map(|k| Vector::from_real(&[(k as f64).sin() * 1e-3])).collect();
        assert_eq!(pairwise_sum(1, &terms), pairwise_sum(1, &terms));
    }
}

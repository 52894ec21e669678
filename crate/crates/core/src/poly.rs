//! Dense polynomials in the monomial basis, with exact-for-the-representation
//! range, root and variation computations on closed intervals.
//!
//! Real roots on an interval are isolated recursively: the critical points
//! (roots of the derivative) split the interval into monotone runs, and each
//! run with a sign change holds exactly one root, found by bisection.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::vector::{scalars_serde, Scalar};

/// Real polynomial `c[0] + c[1] t + ... + c[n] t^n`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly {
    c: Vec<f64>,
}

impl Poly {
    pub fn new(mut c: Vec<f64>) -> Self {
        while c.last() == Some(&0.0) {
            c.pop();
        }
        Poly { c }
    }

    pub fn constant(v: f64) -> Self {
        Poly::new(vec![v])
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    /// Degree, with the zero polynomial reported as 0.
    pub fn degree(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(self.c.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.c.len().max(other.c.len());
        Poly::new(
            (0..n)
                .map(|k| self.c.get(k).copied().unwrap_or(0.0) + other.c.get(k).copied().unwrap_or(0.0))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::default();
        }
        let mut out = vec![0.0; self.c.len() + other.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in other.c.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Real roots in `[lo, hi]`, ascending. Roots of even multiplicity are
    /// reported only when the polynomial evaluates to exactly zero there.
    pub fn roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        match self.degree() {
            _ if self.is_zero() => Vec::new(),
            0 => Vec::new(),
            1 => {
                let r = -self.c[0] / self.c[1];
                if r >= lo && r <= hi {
                    vec![r]
                } else {
                    Vec::new()
                }
            }
            _ => {
                let mut knots = vec![lo];
                knots.extend(self.derivative().roots_in(lo, hi));
                knots.push(hi);
                let mut roots: Vec<f64> = Vec::new();
                for w in knots.windows(2) {
                    let (u, v) = (w[0], w[1]);
                    let (fu, fv) = (self.eval(u), self.eval(v));
                    if fu == 0.0 {
                        roots.push(u);
                    } else if fv != 0.0 && (fu < 0.0) != (fv < 0.0) {
                        roots.push(self.bisect(u, v, fu));
                    }
                }
                if self.eval(hi) == 0.0 {
                    roots.push(hi);
                }
                roots.dedup();
                roots
            }
        }
    }

    fn bisect(&self, mut u: f64, mut v: f64, fu: f64) -> f64 {
        let neg_at_u = fu < 0.0;
        for _ in 0..200 {
            let m = 0.5 * (u + v);
            if m <= u || m >= v {
                break;
            }
            let fm = self.eval(m);
            if fm == 0.0 {
                return m;
            }
            if (fm < 0.0) == neg_at_u {
                u = m;
            } else {
                v = m;
            }
        }
        0.5 * (u + v)
    }

    /// `lo`, the critical points inside, and `hi`.
    pub fn knots(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut k = vec![lo];
        k.extend(self.derivative().roots_in(lo, hi).into_iter().filter(|&t| t > lo && t < hi));
        k.push(hi);
        k
    }

    /// `(min, max)` over `[lo, hi]`.
    pub fn range(&self, lo: f64, hi: f64) -> (f64, f64) {
        self.knots(lo, hi)
            .into_iter()
            .map(|t| self.eval(t))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(mn, mx), v| (mn.min(v), mx.max(v)))
    }

    pub fn sup_abs(&self, lo: f64, hi: f64) -> f64 {
        let (mn, mx) = self.range(lo, hi);
        mn.abs().max(mx.abs())
    }

    /// Total variation over `[lo, hi]`, summed over the monotone runs.
    pub fn variation(&self, lo: f64, hi: f64) -> f64 {
        let k = self.knots(lo, hi);
        k.windows(2).map(|w| (self.eval(w[1]) - self.eval(w[0])).abs()).sum()
    }
}

/// Complex-coefficient polynomial in a real variable.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CPoly {
    #[serde(with = "scalars_serde")]
    c: Vec<Scalar>,
}

impl CPoly {
    pub fn new(mut c: Vec<Scalar>) -> Self {
        while c.last().is_some_and(|z| z.re == 0.0 && z.im == 0.0) {
            c.pop();
        }
        CPoly { c }
    }

    pub fn from_real(c: &[f64]) -> Self {
        CPoly::new(c.iter().map(|&a| Scalar::new(a, 0.0)).collect())
    }

    pub fn constant(v: Scalar) -> Self {
        CPoly::new(vec![v])
    }

    pub fn coefficients(&self) -> &[Scalar] {
        &self.c
    }

    pub fn degree(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    pub fn is_real(&self) -> bool {
        self.c.iter().all(|z| z.im == 0.0)
    }

    pub fn eval(&self, t: f64) -> Scalar {
        self.c.iter().rev().fold(Scalar::new(0.0, 0.0), |acc, &a| acc * t + a)
    }

    pub fn derivative(&self) -> CPoly {
        CPoly::new(self.c.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect())
    }

    pub fn re(&self) -> Poly {
        Poly::new(self.c.iter().map(|z| z.re).collect())
    }

    pub fn im(&self) -> Poly {
        Poly::new(self.c.iter().map(|z| z.im).collect())
    }

    pub fn scale(&self, alpha: Scalar) -> CPoly {
        CPoly::new(self.c.iter().map(|&z| alpha * z).collect())
    }

    pub fn add(&self, other: &CPoly) -> CPoly {
        let n = self.c.len().max(other.c.len());
        let zero = Scalar::new(0.0, 0.0);
        CPoly::new(
            (0..n)
                .map(|k| self.c.get(k).copied().unwrap_or(zero) + other.c.get(k).copied().unwrap_or(zero))
                .collect(),
        )
    }

    /// Adds a constant to the zeroth coefficient.
    pub fn shift(&self, delta: Scalar) -> CPoly {
        let mut c = self.c.clone();
        if c.is_empty() {
            c.push(delta);
        } else {
            c[0] += delta;
        }
        CPoly::new(c)
    }

    /// `|q(t)|^2` as a real polynomial.
    pub fn modulus_squared(&self) -> Poly {
        let (r, i) = (self.re(), self.im());
        r.mul(&r).add(&i.mul(&i))
    }

    pub fn sup_abs(&self, lo: f64, hi: f64) -> f64 {
        if self.is_real() {
            self.re().sup_abs(lo, hi)
        } else {
            // |q|^2 locates the extrema; its expanded coefficients are too
            // cancellation-prone to evaluate there
            self.modulus_squared().knots(lo, hi).into_iter().fold(0.0, |m, t| m.max(self.eval(t).norm()))
        }
    }

    /// `sum_k |c_k| * max(|lo|, |hi|)^k`: the magnitude scale that governs
    /// rounding in Horner evaluation on `[lo, hi]`.
    pub fn magnitude(&self, lo: f64, hi: f64) -> f64 {
        let r = lo.abs().max(hi.abs());
        self.c.iter().rev().fold(0.0, |acc, z| acc * r + z.norm())
    }

    /// Total variation (arc length for complex values) over `[lo, hi]`.
    pub fn variation(&self, lo: f64, hi: f64) -> f64 {
        if self.is_real() {
            return self.re().variation(lo, hi);
        }
        let d = self.derivative();
        let speed2 = d.modulus_squared();
        let knots = speed2.knots(lo, hi);
        let speed = |t: f64| d.eval(t).norm();
        knots.windows(2).map(|w| adaptive_gauss(&speed, w[0], w[1], 0)).sum()
    }
}

fn legendre() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(20).expect("nonzero")))
}

fn adaptive_gauss(f: &dyn Fn(f64) -> f64, a: f64, b: f64, depth: u32) -> f64 {
    let rule = legendre();
    let whole = rule.integrate(a, b, f);
    let m = 0.5 * (a + b);
    let halves = rule.integrate(a, m, f) + rule.integrate(m, b, f);
    if depth >= 16 || (whole - halves).abs() <= 1e-14 * halves.abs() {
        halves
    } else {
        adaptive_gauss(f, a, m, depth + 1) + adaptive_gauss(f, m, b, depth + 1)
    }
}

//! Tagged divisions `a = t_0 < ... < t_n = b` with tags `t_{i-1} <= s_i <= t_i`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TagRule {
    Left,
    Right,
    Midpoint,
}

impl TagRule {
    pub fn tag(self, lo: f64, hi: f64) -> f64 {
        match self {
            TagRule::Left => lo,
            TagRule::Right => hi,
            TagRule::Midpoint => 0.5 * (lo + hi),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaggedPartition {
    points: Vec<f64>,
    tags: Vec<f64>,
    rule: Option<TagRule>,
}

impl TaggedPartition {
    /// Explicit points and tags.
    pub fn new(points: Vec<f64>, tags: Vec<f64>) -> Result<Self> {
        Self::check_points(&points)?;
        if tags.len() + 1 != points.len() {
            return invalid(format!("{} tags given for {} cells", tags.len(), points.len() - 1));
        }
        for (i, s) in tags.iter().enumerate() {
            if !(*s >= points[i] && *s <= points[i + 1]) {
                return invalid(format!("tag {s} lies outside its cell [{}, {}]", points[i], points[i + 1]));
            }
        }
        Ok(TaggedPartition { points, tags, rule: None })
    }

    /// Points tagged by a rule.
    pub fn with_rule(points: Vec<f64>, rule: TagRule) -> Result<Self> {
        Self::check_points(&points)?;
        let tags = points.windows(2).map(|w| rule.tag(w[0], w[1])).collect();
        Ok(TaggedPartition { points, tags, rule: Some(rule) })
    }

    pub fn uniform(a: f64, b: f64, n: usize, rule: TagRule) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return invalid(format!("need a finite interval with a < b, got [{a}, {b}]"));
        }
        if n < 1 {
            return invalid("need at least one cell");
        }
        let h = (b - a) / n as f64;
        let mut points: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
        points.push(b);
        Self::with_rule(points, rule)
    }

    fn check_points(points: &[f64]) -> Result<()> {
        if points.len() < 2 {
            return invalid("a partition needs at least two points");
        }
        if points.iter().any(|t| !t.is_finite()) {
            return invalid("partition points must be finite");
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("partition points must be strictly increasing");
        }
        Ok(())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn tags(&self) -> &[f64] {
        &self.tags
    }

    pub fn rule(&self) -> Option<TagRule> {
        self.rule
    }

    pub fn cell_count(&self) -> usize {
        self.tags.len()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.points[0], *self.points.last().expect("nonempty"))
    }

    pub fn mesh(&self) -> f64 {
        self.points.windows(2).fold(0.0, |m, w| m.max(w[1] - w[0]))
    }

    /// Bisects every cell. Rule-tagged partitions keep their rule; with
    /// explicit tags, the half holding an old tag keeps it and the other half
    /// is tagged at its midpoint.
    pub fn refine(&self) -> TaggedPartition {
        let mut points = Vec::with_capacity(2 * self.points.len() - 1);
        let mut tags = Vec::with_capacity(2 * self.tags.len());
        for (i, w) in self.points.windows(2).enumerate() {
            let mid = 0.5 * (w[0] + w[1]);
            points.push(w[0]);
            points.push(mid);
            match self.rule {
                Some(rule) => {
                    tags.push(rule.tag(w[0], mid));
                    tags.push(rule.tag(mid, w[1]));
                }
                None => {
                    let s = self.tags[i];
                    if s <= mid {
                        tags.push(s);
                        tags.push(0.5 * (mid + w[1]));
                    } else {
                        tags.push(0.5 * (w[0] + mid));
                        tags.push(s);
                    }
                }
            }
        }
        points.push(*self.points.last().expect("nonempty"));
        TaggedPartition { points, tags, rule: self.rule }
    }
}

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::round::{mul_down, mul_up, sub_down};
use super::Interval;
use crate::error::{Error, Result};

/// An axis-aligned box: one closed interval per coordinate.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntervalBox(Vec<Interval>);

impl IntervalBox {
    pub fn new(dims: Vec<Interval>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidSpec("a box needs at least one dimension".into()));
        }
        Ok(IntervalBox(dims))
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(lo: f64, hi: f64, dim: usize) -> Result<Self> {
        IntervalBox::new(vec![Interval::new(lo, hi)?; dim])
    }

    pub fn from_bounds(bounds: &[(f64, f64)]) -> Result<Self> {
        bounds
            .iter()
            .map(|&(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>>>()
            .and_then(IntervalBox::new)
    }

    /// The degenerate box `[x, x]`.
    pub fn point(x: &[f64]) -> Self {
        IntervalBox(x.iter().map(|&v| Interval::point(v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dims(&self) -> &[Interval] {
        &self.0
    }

    /// Product of side lengths, rounded up.
    pub fn volume(&self) -> f64 {
        self.0
            .iter()
            .fold(1.0, |acc, iv| mul_up(acc, iv.diameter()))
    }

    /// Guaranteed enclosure of the exact volume.
    pub fn volume_enclosure(&self) -> Interval {
        let lo = self
            .0
            .iter()
            .fold(1.0, |acc, iv| mul_down(acc, sub_down(iv.hi(), iv.lo()).max(0.0)));
        Interval::raw(lo, self.volume().max(lo))
    }

    /// Largest side length and the first axis attaining it.
    pub fn max_diameter(&self) -> (f64, usize) {
        self.0
            .iter()
            .enumerate()
            .fold((f64::NEG_INFINITY, 0), |(best, axis), (k, iv)| {
                let d = iv.diameter();
                if d > best {
                    (d, k)
                } else {
                    (best, axis)
                }
            })
    }

    /// Splits `axis` at its midpoint. Returns `None` when the side cannot be
    /// split into two nondegenerate halves.
    pub fn bisect(&self, axis: usize) -> Result<Option<(IntervalBox, IntervalBox)>> {
        let side = self.0[axis];
        let m = side.midpoint()?;
        if !(side.lo() < m && m < side.hi()) {
            return Ok(None);
        }
        let mut left = self.clone();
        let mut right = self.clone();
        left.0[axis] = Interval::raw(side.lo(), m);
        right.0[axis] = Interval::raw(m, side.hi());
        Ok(Some((left, right)))
    }

    pub fn midpoint(&self) -> Result<Vec<f64>> {
        self.0.iter().map(Interval::midpoint).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.0.iter().zip(x).all(|(iv, &v)| iv.contains(v))
    }

    /// Membership with lower-closed, upper-open sides, except that sides
    /// lying on the upper face of `domain` are closed.
    pub fn owns(&self, x: &[f64], domain: &IntervalBox) -> bool {
        x.len() == self.dim()
            && self
                .0
                .iter()
                .zip(domain.0.iter())
                .zip(x)
                .all(|((iv, outer), &v)| {
                    iv.lo() <= v && (v < iv.hi() || (v == iv.hi() && iv.hi() == outer.hi()))
                })
    }

    pub fn is_subset_of(&self, other: &IntervalBox) -> bool {
        self.dim() == other.dim()
            && self.0.iter().zip(&other.0).all(|(a, b)| a.is_subset_of(b))
    }

    pub fn hull(&self, other: &IntervalBox) -> IntervalBox {
        IntervalBox(self.0.iter().zip(&other.0).map(|(a, b)| a.hull(b)).collect())
    }

    pub fn is_bounded(&self) -> bool {
        self.0.iter().all(Interval::is_bounded)
    }
}

impl std::ops::Index<usize> for IntervalBox {
    type Output = Interval;
    fn index(&self, k: usize) -> &Interval {
        &self.0[k]
    }
}

impl fmt::Display for IntervalBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(Interval::to_text).collect();
        f.write_str(&parts.join("x"))
    }
}

impl fmt::Debug for IntervalBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for IntervalBox {
    type Err = Error;

    /// Accepts `[lo,hi]^D`, a list `[a,b],[c,d]` / `[a,b]x[c,d]`, or a single `[lo,hi]`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |msg: &str| Error::Parse {
            pos: 0,
            msg: format!("bad domain `{s}`: {msg}"),
        };
        if let Some((base, pow)) = s.rsplit_once('^') {
            let d: usize = pow.trim().parse().map_err(|_| bad("exponent must be a positive integer"))?;
            if d == 0 {
                return Err(bad("exponent must be a positive integer"));
            }
            let iv: Interval = base.parse()?;
            return IntervalBox::new(vec![iv; d]);
        }
        let mut dims = Vec::new();
        let mut rest = s;
        while !rest.is_empty() {
            let open = rest.find('[').ok_or_else(|| bad("expected `[`"))?;
            if !rest[..open].trim().trim_matches(|c| c == ',' || c == 'x').trim().is_empty() {
                return Err(bad("unexpected text between intervals"));
            }
            let close = rest.find(']').ok_or_else(|| bad("missing `]`"))?;
            dims.push(rest[open..=close].parse::<Interval>()?);
            rest = rest[close + 1..].trim_start();
        }
        IntervalBox::new(dims)
    }
}

use std::f64::consts::PI;

use super::WitchsHatSpec;
use crate::error::Result;
use crate::expr::ExprDag;
use crate::interval::{fmt_f64, Interval, IntervalBox};
use crate::shape::TargetShape;

/// Witch's hat: `m * 1{|x - c| <= R} * (1 - |x - c| / R) * H + (1 - m) / V`.
///
/// The indicator has no natural extension, so box enclosures split on the
/// enclosure of `|x - c|`: wholly inside the cone, wholly outside it, or
/// straddling, where the hull of both branches is returned.
#[derive(Debug, Clone)]
pub struct WitchsHat {
    norm: ExprDag,
    radius: f64,
    peak: f64,
    brim: f64,
}

/// Volume of the unit ball in `dim` dimensions.
fn unit_ball_volume(dim: usize) -> f64 {
    // V_0 = 1, V_1 = 2, V_d = 2 pi / d * V_{d-2}
    let mut v = if dim.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut d = if dim.is_multiple_of(2) { 2 } else { 3 };
    while d <= dim {
        v *= 2.0 * PI / d as f64;
        d += 2;
    }
    v
}

/// Cone height `H = Gamma(D/2) D (D+1) / (2 pi^{D/2} R^D)`, which makes the
/// cone integrate to one.
pub(crate) fn cone_height(dim: usize, radius: f64) -> f64 {
    (dim as f64 + 1.0) / (unit_ball_volume(dim) * radius.powi(dim as i32))
}

impl WitchsHat {
    pub fn new(spec: &WitchsHatSpec) -> Result<WitchsHat> {
        let terms: Vec<String> = spec
            .center
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let c = if c < 0.0 {
                    format!("({})", fmt_f64(c))
                } else {
                    fmt_f64(c)
                };
                format!("(x{} - {c})^2", k + 1)
            })
            .collect();
        let norm = ExprDag::parse(&format!("sqrt({})", terms.join(" + ")), spec.dim)?;
        let radius = 10f64.powi(-spec.radius_exp);
        let volume: f64 = spec.domain.dims().iter().map(|iv| iv.hi() - iv.lo()).product();
        Ok(WitchsHat {
            norm,
            radius,
            peak: spec.mix * cone_height(spec.dim, radius),
            brim: (1.0 - spec.mix) / volume,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Height of the cone above the brim at the center.
    pub fn peak(&self) -> f64 {
        self.peak
    }

    pub fn brim(&self) -> f64 {
        self.brim
    }

    fn cone(&self, dist: Interval) -> Result<Interval> {
        let frac = dist.checked_div(Interval::point(self.radius))?;
        Ok(Interval::point(self.peak) * (Interval::ONE - frac) + Interval::point(self.brim))
    }
}

impl TargetShape for WitchsHat {
    fn arity(&self) -> usize {
        self.norm.arity()
    }

    fn eval_point(&self, x: &[f64]) -> Result<f64> {
        let dist = self.norm.eval_point(x)?;
        if dist <= self.radius {
            Ok(self.peak * (1.0 - dist / self.radius) + self.brim)
        } else {
            Ok(self.brim)
        }
    }

    fn eval_box(&self, bx: &IntervalBox) -> Result<Interval> {
        let dist = self.norm.eval_interval(bx)?;
        let brim = Interval::point(self.brim);
        if dist.lo() > self.radius {
            return Ok(brim);
        }
        if dist.hi() <= self.radius {
            return self.cone(dist);
        }
        let inside = Interval::new(dist.lo(), self.radius)?;
        Ok(self.cone(inside)?.hull(&brim))
    }
}

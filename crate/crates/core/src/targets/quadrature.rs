//! Deterministic Gauss-Legendre quadrature for target means.

use super::{GaussianMixtureSpec, TargetSpec};
use crate::error::{Error, Result};
use crate::interval::IntervalBox;
use crate::shape::TargetShape;

const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Half-width, in standard deviations, of the window integrated around each
/// mixture component. Mass beyond it is below 1e-300.
const MIXTURE_WINDOW_SDS: f64 = 40.0;

/// Nodes and weights of composite 5-point Gauss-Legendre on `[a, b]` with
/// `panels` equal panels.
fn composite_rule(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * GL_NODES.len());
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (t, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            out.push((mid + 0.5 * h * t, 0.5 * h * w));
        }
    }
    out
}

/// `(integral of p*, integral of x * p*)` for a 1-D normal density restricted
/// to `[a, b]`. Integrates in standardized units so tiny `sd` stays accurate.
fn normal_moments(mean: f64, sd: f64, a: f64, b: f64, panels: usize) -> (f64, f64) {
    let lo = ((a - mean) / sd).max(-MIXTURE_WINDOW_SDS);
    let hi = ((b - mean) / sd).min(MIXTURE_WINDOW_SDS);
    if lo >= hi {
        return (0.0, 0.0);
    }
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let (m0, mz) = composite_rule(lo, hi, panels)
        .into_iter()
        .fold((0.0, 0.0), |(m0, m1), (z, w)| {
            let p = w * norm * (-0.5 * z * z).exp();
            (m0 + p, m1 + p * z)
        });
    (m0, mean * m0 + sd * mz)
}

fn mixture_mean(spec: &GaussianMixtureSpec, panels: usize) -> Vec<f64> {
    let dim = spec.domain.dim();
    let mut mass = 0.0;
    let mut first = vec![0.0; dim];
    for comp in &spec.components {
        let axes: Vec<(f64, f64)> = (0..dim)
            .map(|k| {
                let iv = spec.domain[k];
                normal_moments(comp.mean[k], comp.sd[k], iv.lo(), iv.hi(), panels)
            })
            .collect();
        let total: f64 = comp.weight * axes.iter().map(|a| a.0).product::<f64>();
        mass += total;
        for k in 0..dim {
            if axes[k].0 > 0.0 {
                first[k] += total * axes[k].1 / axes[k].0;
            }
        }
    }
    first.iter().map(|m| m / mass).collect()
}

/// Mass and mean of `shape` over `domain` by tensor-product Gauss-Legendre
/// with `panels` panels per axis.
pub fn grid_moments<S: TargetShape + ?Sized>(
    shape: &S,
    domain: &IntervalBox,
    panels: usize,
) -> Result<(f64, Vec<f64>)> {
    let dim = domain.dim();
    if dim > 3 {
        return Err(Error::DimensionTooLarge(dim));
    }
    let rules: Vec<Vec<(f64, f64)>> = domain
        .dims()
        .iter()
        .map(|iv| composite_rule(iv.lo(), iv.hi(), panels))
        .collect();
    let mut mass = 0.0;
    let mut first = vec![0.0; dim];
    let mut idx = vec![0usize; dim];
    let mut x = vec![0.0; dim];
    loop {
        let mut w = 1.0;
        for k in 0..dim {
            let (node, weight) = rules[k][idx[k]];
            x[k] = node;
            w *= weight;
        }
        let p = w * shape.eval_point(&x)?.max(0.0);
        mass += p;
        for k in 0..dim {
            first[k] += p * x[k];
        }
        // Odometer increment over the tensor grid.
        let mut k = 0;
        loop {
            if k == dim {
                let mean = first.iter().map(|m| m / mass).collect();
                return Ok((mass, mean));
            }
            idx[k] += 1;
            if idx[k] < rules[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Mean of the normalized target. Gaussian mixtures and the needle are
/// integrated per component and axis; other targets on a tensor grid with
/// `n_grid` panels per axis, which needs dimension at most 3.
pub fn true_mean_oracle(spec: &TargetSpec, n_grid: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    let panels = n_grid.max(1);
    if let Some(mix) = spec.as_mixture() {
        return Ok(mixture_mean(&mix, panels));
    }
    if spec.dim() > 3 {
        return Err(Error::DimensionTooLarge(spec.dim()));
    }
    let target = super::build_target(spec)?;
    Ok(grid_moments(&target, spec.domain(), panels)?.1)
}

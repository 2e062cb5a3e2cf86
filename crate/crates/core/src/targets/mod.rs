//! Built-in benchmark targets and their parameter records.
//!
//! Each spec builds into a [`Target`], which is either an expression DAG or,
//! for the witch's hat, a dedicated evaluator around its indicator term.

mod quadrature;
mod witch;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::ExprDag;
use crate::interval::{fmt_f64, Interval, IntervalBox};
use crate::shape::TargetShape;

pub use quadrature::{grid_moments, true_mean_oracle};
pub use witch::WitchsHat;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

/// Weighted sum of axis-aligned Gaussian densities truncated to `domain`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixtureSpec {
    pub components: Vec<GaussianComponent>,
    pub domain: IntervalBox,
}

/// `exp(-E(x1, x2) / T)` for the Levy energy `E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevySpec {
    pub temperature: f64,
    pub domain: IntervalBox,
}

/// Two isotropic trivariate Gaussian bumps, each scaled by `sigma^-3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeedleSpec {
    pub mu1: [f64; 3],
    pub mu2: [f64; 3],
    pub sigma1: f64,
    pub sigma2: f64,
    pub domain: IntervalBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosenbrockSpec {
    pub dim: usize,
    pub domain: IntervalBox,
}

/// A cone of radius `10^-radius_exp` on a uniform brim, mixed `mix : 1 - mix`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitchsHatSpec {
    pub dim: usize,
    pub center: Vec<f64>,
    pub radius_exp: i32,
    pub mix: f64,
    pub domain: IntervalBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulaSpec {
    pub formula: String,
    pub domain: IntervalBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetSpec {
    GaussianMixture(GaussianMixtureSpec),
    Levy(LevySpec),
    Needle(NeedleSpec),
    Rosenbrock(RosenbrockSpec),
    WitchsHat(WitchsHatSpec),
    Formula(FormulaSpec),
}

pub const DEFAULT_WITCH_MIX: f64 = 0.05;

/// Names accepted by [`TargetSpec::named`].
pub const BUILTIN_NAMES: [&str; 10] = [
    "g1", "g2", "g5", "g5p", "g5pp", "g5hat", "levy", "needle", "rosenbrock", "witch",
];

fn mixture_1d(means: &[f64], sds: &[f64], weights: &[f64], radius: f64) -> TargetSpec {
    let components = means
        .iter()
        .zip(sds)
        .zip(weights)
        .map(|((&m, &s), &w)| GaussianComponent {
            weight: w,
            mean: vec![m],
            sd: vec![s],
        })
        .collect();
    TargetSpec::GaussianMixture(GaussianMixtureSpec {
        components,
        domain: IntervalBox::cube(-radius, radius, 1).expect("valid domain"),
    })
}

const G5_MEANS: [f64; 5] = [-15.0, -5.0, 3.0, 6.0, 50.0];
// The listed weights sum to 0.5; the fifth component takes the remainder.
const G5_WEIGHTS: [f64; 5] = [0.15, 0.2, 0.05, 0.1, 0.5];

impl TargetSpec {
    /// The benchmark targets with their default parameters.
    pub fn named(name: &str) -> Result<TargetSpec> {
        let spec = match name {
            "g1" => mixture_1d(&[-5.0], &[1.0], &[1.0], 100.0),
            // Only w1 = 0.25 is listed; w2 completes the mixture.
            "g2" => mixture_1d(&[-5.0, 50.0], &[1.0, 0.25], &[0.25, 0.75], 100.0),
            "g5" => mixture_1d(&G5_MEANS, &[1.0, 1.0, 0.5, 1.0, 0.1], &G5_WEIGHTS, 100.0),
            "g5p" => mixture_1d(&G5_MEANS, &[0.1, 0.1, 0.05, 0.1, 0.01], &G5_WEIGHTS, 100.0),
            "g5pp" => mixture_1d(
                &G5_MEANS,
                &[0.01, 0.01, 0.005, 0.01, 0.001],
                &G5_WEIGHTS,
                100.0,
            ),
            "g5hat" => mixture_1d(&G5_MEANS, &[1.0, 1.0, 0.5, 1.0, 0.1], &G5_WEIGHTS, 1e100),
            "levy" => TargetSpec::levy(40.0),
            "needle" => TargetSpec::needle(0.006),
            "rosenbrock" => TargetSpec::rosenbrock(2),
            "witch" => TargetSpec::witchs_hat(2, 0, DEFAULT_WITCH_MIX),
            other => {
                return Err(Error::InvalidSpec(format!(
                    "unknown target `{other}` (known: {})",
                    BUILTIN_NAMES.join(", ")
                )))
            }
        };
        Ok(spec)
    }

    pub fn levy(temperature: f64) -> TargetSpec {
        TargetSpec::Levy(LevySpec {
            temperature,
            domain: IntervalBox::cube(-100.0, 100.0, 2).expect("valid domain"),
        })
    }

    pub fn needle(sigma2: f64) -> TargetSpec {
        TargetSpec::Needle(NeedleSpec {
            mu1: [0.0; 3],
            mu2: [1.0; 3],
            sigma1: 1.0,
            sigma2,
            domain: IntervalBox::cube(-10.0, 10.0, 3).expect("valid domain"),
        })
    }

    pub fn rosenbrock(dim: usize) -> TargetSpec {
        TargetSpec::Rosenbrock(RosenbrockSpec {
            dim,
            domain: IntervalBox::cube(-10.0, 10.0, dim.max(1)).expect("valid domain"),
        })
    }

    pub fn witchs_hat(dim: usize, radius_exp: i32, mix: f64) -> TargetSpec {
        TargetSpec::WitchsHat(WitchsHatSpec {
            dim,
            center: vec![2.0; dim],
            radius_exp,
            mix,
            domain: IntervalBox::cube(-10.0, 10.0, dim.max(1)).expect("valid domain"),
        })
    }

    pub fn formula(formula: &str, domain: IntervalBox) -> TargetSpec {
        TargetSpec::Formula(FormulaSpec {
            formula: formula.to_string(),
            domain,
        })
    }

    pub fn domain(&self) -> &IntervalBox {
        match self {
            TargetSpec::GaussianMixture(s) => &s.domain,
            TargetSpec::Levy(s) => &s.domain,
            TargetSpec::Needle(s) => &s.domain,
            TargetSpec::Rosenbrock(s) => &s.domain,
            TargetSpec::WitchsHat(s) => &s.domain,
            TargetSpec::Formula(s) => &s.domain,
        }
    }

    pub fn domain_mut(&mut self) -> &mut IntervalBox {
        match self {
            TargetSpec::GaussianMixture(s) => &mut s.domain,
            TargetSpec::Levy(s) => &mut s.domain,
            TargetSpec::Needle(s) => &mut s.domain,
            TargetSpec::Rosenbrock(s) => &mut s.domain,
            TargetSpec::WitchsHat(s) => &mut s.domain,
            TargetSpec::Formula(s) => &mut s.domain,
        }
    }

    pub fn dim(&self) -> usize {
        self.domain().dim()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        let domain = self.domain();
        for (k, iv) in domain.dims().iter().enumerate() {
            if !iv.is_bounded() || iv.lo() >= iv.hi() {
                return bad(format!("domain side {k} must be finite with lo < hi, got {iv}"));
            }
        }
        match self {
            TargetSpec::GaussianMixture(s) => {
                if s.components.is_empty() {
                    return bad("a mixture needs at least one component".into());
                }
                for (i, c) in s.components.iter().enumerate() {
                    if !(c.weight >= 0.0 && c.weight.is_finite()) {
                        return bad(format!("component {i}: weight must be >= 0"));
                    }
                    if c.mean.len() != domain.dim() || c.sd.len() != domain.dim() {
                        return bad(format!("component {i}: mean/sd length must match the domain"));
                    }
                    if c.sd.iter().any(|&s| !(s > 0.0 && s.is_finite()))
                        || c.mean.iter().any(|m| !m.is_finite())
                    {
                        return bad(format!("component {i}: sd must be > 0 and mean finite"));
                    }
                }
            }
            TargetSpec::Levy(s) => {
                if !(s.temperature > 0.0 && s.temperature.is_finite()) {
                    return bad("temperature must be finite and positive".into());
                }
                if domain.dim() != 2 {
                    return bad("the Levy target is bivariate".into());
                }
            }
            TargetSpec::Needle(s) => {
                if !(s.sigma1 > 0.0 && s.sigma2 > 0.0) {
                    return bad("needle scales must be positive".into());
                }
                if domain.dim() != 3 {
                    return bad("the needle target is trivariate".into());
                }
            }
            TargetSpec::Rosenbrock(s) => {
                if s.dim < 2 || domain.dim() != s.dim {
                    return bad("Rosenbrock needs dim >= 2 matching the domain".into());
                }
            }
            TargetSpec::WitchsHat(s) => {
                if s.dim == 0 || domain.dim() != s.dim || s.center.len() != s.dim {
                    return bad("witch's hat dim, center and domain must agree".into());
                }
                if !(0.0..=1.0).contains(&s.mix) {
                    return bad("mix must lie in [0, 1]".into());
                }
                if s.radius_exp.abs() > 300 {
                    return bad("radius exponent out of range".into());
                }
            }
            TargetSpec::Formula(_) => {}
        }
        Ok(())
    }

    /// Source text for the targets that are plain formulas.
    pub fn formula_text(&self) -> Option<String> {
        match self {
            TargetSpec::GaussianMixture(s) => Some(mixture_formula(s)),
            TargetSpec::Levy(s) => Some(levy_formula(s.temperature)),
            TargetSpec::Needle(s) => Some(needle_formula(s)),
            TargetSpec::Rosenbrock(s) => Some(rosenbrock_formula(s.dim)),
            TargetSpec::WitchsHat(_) => None,
            TargetSpec::Formula(s) => Some(s.formula.clone()),
        }
    }

    /// Mixture form of the separable targets, used by the quadrature oracle.
    pub(crate) fn as_mixture(&self) -> Option<GaussianMixtureSpec> {
        match self {
            TargetSpec::GaussianMixture(s) => Some(s.clone()),
            TargetSpec::Needle(s) => {
                // sigma^-3 * exp(..) is (2 pi)^{3/2} times a unit-mass Gaussian.
                let w = (2.0 * PI).powf(1.5);
                let comp = |mu: [f64; 3], sd: f64| GaussianComponent {
                    weight: w,
                    mean: mu.to_vec(),
                    sd: vec![sd; 3],
                };
                Some(GaussianMixtureSpec {
                    components: vec![comp(s.mu1, s.sigma1), comp(s.mu2, s.sigma2)],
                    domain: s.domain.clone(),
                })
            }
            _ => None,
        }
    }
}

fn lit(x: f64) -> String {
    if x < 0.0 {
        format!("({})", fmt_f64(x))
    } else {
        fmt_f64(x)
    }
}

fn mixture_formula(s: &GaussianMixtureSpec) -> String {
    let root_two_pi = (2.0 * PI).sqrt();
    let terms: Vec<String> = s
        .components
        .iter()
        .map(|c| {
            let coef = c.sd.iter().fold(c.weight, |acc, sd| acc / (sd * root_two_pi));
            let quad: Vec<String> = c
                .mean
                .iter()
                .zip(&c.sd)
                .enumerate()
                .map(|(k, (&m, &sd))| format!("((x{} - {})/{})^2", k + 1, lit(m), lit(sd)))
                .collect();
            format!("{} * exp(-0.5 * ({}))", lit(coef), quad.join(" + "))
        })
        .collect();
    terms.join(" + ")
}

fn levy_formula(temperature: f64) -> String {
    let sum = |var: &str, shift: i32| -> String {
        (1..=5)
            .map(|i| format!("{i} * cos({} * {var} + {i})", i + shift))
            .collect::<Vec<_>>()
            .join(" + ")
    };
    format!(
        "exp(-(({}) * ({}) + (x1 + 1.42513)^2 + (x2 + 0.80032)^2) / {})",
        sum("x1", -1),
        sum("x2", 1),
        lit(temperature)
    )
}

fn needle_formula(s: &NeedleSpec) -> String {
    let bump = |mu: &[f64; 3], sd: f64| {
        let quad: Vec<String> = mu
            .iter()
            .enumerate()
            .map(|(k, &m)| format!("((x{} - {})/{})^2", k + 1, lit(m), lit(sd)))
            .collect();
        format!("{} * exp(-0.5 * ({}))", lit(sd.powi(-3)), quad.join(" + "))
    };
    format!("{} + {}", bump(&s.mu1, s.sigma1), bump(&s.mu2, s.sigma2))
}

fn rosenbrock_formula(dim: usize) -> String {
    let terms: Vec<String> = (2..=dim)
        .map(|i| format!("100 * (x{i} - x{}^2)^2 + (1 - x{})^2", i - 1, i - 1))
        .collect();
    format!("exp(-({}))", terms.join(" + "))
}

/// A built target shape.
#[derive(Debug, Clone)]
pub enum Target {
    Formula(ExprDag),
    WitchsHat(WitchsHat),
}

impl Target {
    pub fn as_dag(&self) -> Option<&ExprDag> {
        match self {
            Target::Formula(d) => Some(d),
            Target::WitchsHat(_) => None,
        }
    }
}

impl TargetShape for Target {
    fn arity(&self) -> usize {
        match self {
            Target::Formula(d) => d.arity(),
            Target::WitchsHat(w) => w.arity(),
        }
    }

    fn eval_point(&self, x: &[f64]) -> Result<f64> {
        match self {
            Target::Formula(d) => d.eval_point(x),
            Target::WitchsHat(w) => w.eval_point(x),
        }
    }

    fn eval_box(&self, bx: &IntervalBox) -> Result<Interval> {
        match self {
            Target::Formula(d) => d.eval_interval(bx),
            Target::WitchsHat(w) => w.eval_box(bx),
        }
    }
}

pub fn build_target(spec: &TargetSpec) -> Result<Target> {
    spec.validate()?;
    match spec {
        TargetSpec::WitchsHat(s) => Ok(Target::WitchsHat(WitchsHat::new(s)?)),
        other => {
            let text = other.formula_text().expect("formula-backed target");
            Ok(Target::Formula(ExprDag::parse(&text, other.dim())?))
        }
    }
}

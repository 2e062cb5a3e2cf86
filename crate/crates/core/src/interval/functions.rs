use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use super::round::{libm_down, libm_up, sqrt_down, sqrt_up};
use super::Interval;
use crate::error::{Error, Result};

/// Arguments beyond this magnitude skip critical-point analysis for the
/// periodic functions; reduction error would exceed the slack below.
const TRIG_REDUCTION_LIMIT: f64 = 1.0e6;
/// Slack, in periods, when testing whether a critical point may be inside.
const PERIOD_SLACK: f64 = 1.0e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StdFn {
    Exp,
    Log,
    Sqrt,
    Abs,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Asin,
    Acos,
    Atan,
}

impl StdFn {
    pub const ALL: [StdFn; 13] = [
        StdFn::Exp,
        StdFn::Log,
        StdFn::Sqrt,
        StdFn::Abs,
        StdFn::Sin,
        StdFn::Cos,
        StdFn::Tan,
        StdFn::Sinh,
        StdFn::Cosh,
        StdFn::Tanh,
        StdFn::Asin,
        StdFn::Acos,
        StdFn::Atan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StdFn::Exp => "exp",
            StdFn::Log => "log",
            StdFn::Sqrt => "sqrt",
            StdFn::Abs => "abs",
            StdFn::Sin => "sin",
            StdFn::Cos => "cos",
            StdFn::Tan => "tan",
            StdFn::Sinh => "sinh",
            StdFn::Cosh => "cosh",
            StdFn::Tanh => "tanh",
            StdFn::Asin => "asin",
            StdFn::Acos => "acos",
            StdFn::Atan => "atan",
        }
    }

    pub fn from_name(name: &str) -> Option<StdFn> {
        StdFn::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Floating-point evaluation; `None` outside the real domain.
    pub fn apply_point(self, x: f64) -> Option<f64> {
        let y = match self {
            StdFn::Exp => x.exp(),
            StdFn::Log if x > 0.0 => x.ln(),
            StdFn::Sqrt if x >= 0.0 => x.sqrt(),
            StdFn::Abs => x.abs(),
            StdFn::Sin => x.sin(),
            StdFn::Cos => x.cos(),
            StdFn::Tan => x.tan(),
            StdFn::Sinh => x.sinh(),
            StdFn::Cosh => x.cosh(),
            StdFn::Tanh => x.tanh(),
            StdFn::Asin if (-1.0..=1.0).contains(&x) => x.asin(),
            StdFn::Acos if (-1.0..=1.0).contains(&x) => x.acos(),
            StdFn::Atan => x.atan(),
            _ => return None,
        };
        (!y.is_nan()).then_some(y)
    }

    pub fn apply_interval(self, x: Interval) -> Result<Interval> {
        let domain_err = || Error::DomainError {
            func: self.name(),
            interval: x,
        };
        let (lo, hi) = (x.lo(), x.hi());
        let r = match self {
            StdFn::Exp => {
                Interval::raw(libm_down(lo.exp()).max(0.0), libm_up(hi.exp()))
            }
            StdFn::Log => {
                if lo <= 0.0 {
                    return Err(domain_err());
                }
                Interval::raw(libm_down(lo.ln()), libm_up(hi.ln()))
            }
            StdFn::Sqrt => {
                if lo < 0.0 {
                    return Err(domain_err());
                }
                Interval::raw(sqrt_down(lo).max(0.0), sqrt_up(hi))
            }
            StdFn::Abs => Interval::raw(x.mignitude(), x.magnitude()),
            StdFn::Sin => periodic_range(x, f64::sin, FRAC_PI_2, -FRAC_PI_2),
            StdFn::Cos => periodic_range(x, f64::cos, 0.0, PI),
            StdFn::Tan => {
                if !x.is_bounded()
                    || lo.abs().max(hi.abs()) > TRIG_REDUCTION_LIMIT
                    || x.diameter() >= PI
                    || hits_lattice(x, FRAC_PI_2, PI)
                {
                    return Err(domain_err());
                }
                Interval::raw(libm_down(lo.tan()), libm_up(hi.tan()))
            }
            StdFn::Sinh => Interval::raw(libm_down(lo.sinh()), libm_up(hi.sinh())),
            StdFn::Cosh => Interval::raw(
                libm_down(x.mignitude().cosh()).max(1.0),
                libm_up(x.magnitude().cosh()),
            ),
            StdFn::Tanh => Interval::raw(
                libm_down(lo.tanh()).max(-1.0),
                libm_up(hi.tanh()).min(1.0),
            ),
            StdFn::Asin => {
                if lo < -1.0 || hi > 1.0 {
                    return Err(domain_err());
                }
                Interval::raw(
                    libm_down(lo.asin()).max(-FRAC_PI_2.next_up()),
                    libm_up(hi.asin()).min(FRAC_PI_2.next_up()),
                )
            }
            StdFn::Acos => {
                if lo < -1.0 || hi > 1.0 {
                    return Err(domain_err());
                }
                Interval::raw(
                    libm_down(hi.acos()).max(0.0),
                    libm_up(lo.acos()).min(PI.next_up()),
                )
            }
            StdFn::Atan => Interval::raw(
                libm_down(lo.atan()).max(-FRAC_PI_2.next_up()),
                libm_up(hi.atan()).min(FRAC_PI_2.next_up()),
            ),
        };
        Ok(r)
    }
}

impl fmt::Display for StdFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Whether `offset + k * period` may lie in `x` for some integer `k`.
/// Errs towards `true`.
fn hits_lattice(x: Interval, offset: f64, period: f64) -> bool {
    let t_lo = (x.lo() - offset) / period - PERIOD_SLACK;
    let t_hi = (x.hi() - offset) / period + PERIOD_SLACK;
    t_lo.ceil() <= t_hi.floor()
}

/// Range of sin or cos: hull of the endpoint values, widened to +-1 where an
/// extremum may be inside.
fn periodic_range(x: Interval, f: fn(f64) -> f64, max_at: f64, min_at: f64) -> Interval {
    let full = Interval::raw(-1.0, 1.0);
    if !x.is_bounded()
        || x.lo().abs().max(x.hi().abs()) > TRIG_REDUCTION_LIMIT
        || x.diameter() >= TAU
    {
        return full;
    }
    let (a, b) = (f(x.lo()), f(x.hi()));
    let mut lo = libm_down(a.min(b));
    let mut hi = libm_up(a.max(b));
    if hits_lattice(x, max_at, TAU) {
        hi = 1.0;
    }
    if hits_lattice(x, min_at, TAU) {
        lo = -1.0;
    }
    Interval::raw(lo.max(-1.0), hi.min(1.0))
}

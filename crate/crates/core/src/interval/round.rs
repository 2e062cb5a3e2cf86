//! Directed rounding on top of round-to-nearest.
//!
//! The arithmetic operations recover the exact rounding error with an
//! error-free transformation (TwoSum, FMA residuals) and step one ulp outward
//! only when the nearest result is on the wrong side of the exact value. When
//! the residual cannot be trusted (overflow, results deep in the subnormal
//! range) they fall back to an unconditional one-ulp step.
//!
//! Transcendental functions come from the platform libm, which is faithful
//! but not correctly rounded, so their endpoints are stepped two ulps.

/// Below this magnitude FMA residuals may be lost to gradual underflow.
const RESIDUAL_FLOOR: f64 = 1.0e-290;

/// Division operands below this magnitude are rescaled before the residual
/// is formed; `a - q*b` is otherwise finer than the subnormal grid.
const DIV_OPERAND_FLOOR: f64 = 1.0e-270;
/// Exponent of the power of two used for that rescaling.
const DIV_SCALE_EXP: i32 = 600;

#[inline]
pub fn next_up(x: f64) -> f64 {
    x.next_up()
}

#[inline]
pub fn next_down(x: f64) -> f64 {
    x.next_down()
}

#[inline]
fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

pub fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_nan() {
        return f64::NEG_INFINITY;
    }
    if s.is_infinite() {
        // +inf from finite operands is an overflow: the largest finite number
        // is still a valid lower bound.
        return if s > 0.0 && a.is_finite() && b.is_finite() {
            f64::MAX
        } else {
            s
        };
    }
    if two_sum_err(a, b, s) < 0.0 {
        next_down(s)
    } else {
        s
    }
}

pub fn add_up(a: f64, b: f64) -> f64 {
    -add_down(-a, -b)
}

#[inline]
pub fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

#[inline]
pub fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

pub fn mul_down(a: f64, b: f64) -> f64 {
    // 0 * inf is taken as 0: the zero is exact, the infinity a saturated bound.
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p.is_nan() {
        return f64::NEG_INFINITY;
    }
    if p.is_infinite() {
        return if p > 0.0 && a.is_finite() && b.is_finite() {
            f64::MAX
        } else {
            p
        };
    }
    if p.abs() < RESIDUAL_FLOOR {
        return next_down(p);
    }
    if a.mul_add(b, -p) < 0.0 {
        next_down(p)
    } else {
        p
    }
}

pub fn mul_up(a: f64, b: f64) -> f64 {
    -mul_down(-a, b)
}

/// `a / b` rounded down. `b` must be nonzero.
pub fn div_down(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    if b.is_infinite() {
        return if a.is_infinite() {
            f64::NEG_INFINITY
        } else if (a > 0.0) == (b > 0.0) {
            0.0
        } else {
            next_down(-0.0)
        };
    }
    let q = a / b;
    if q.is_nan() {
        return f64::NEG_INFINITY;
    }
    if q.is_infinite() {
        return if q > 0.0 && a.is_finite() { f64::MAX } else { q };
    }
    if q.abs() < RESIDUAL_FLOOR {
        return next_down(q);
    }
    let (a, b) = if a.abs() < DIV_OPERAND_FLOOR || b.abs() < DIV_OPERAND_FLOOR {
        let scale = 2f64.powi(DIV_SCALE_EXP);
        let (sa, sb) = (a * scale, b * scale);
        if !sa.is_finite() || !sb.is_finite() {
            return next_down(q);
        }
        (sa, sb)
    } else {
        (a, b)
    };
    // r = a - q*b exactly; the true quotient lies below q iff r/b < 0.
    let r = (-q).mul_add(b, a);
    if r != 0.0 && ((r < 0.0) != (b < 0.0)) {
        next_down(q)
    } else {
        q
    }
}

pub fn div_up(a: f64, b: f64) -> f64 {
    -div_down(-a, b)
}

pub fn sqrt_down(x: f64) -> f64 {
    let s = x.sqrt();
    if !s.is_finite() || s == 0.0 {
        return s;
    }
    if s < 1.0e-145 {
        return next_down(s).max(0.0);
    }
    if (-s).mul_add(s, x) < 0.0 {
        next_down(s)
    } else {
        s
    }
}

pub fn sqrt_up(x: f64) -> f64 {
    let s = x.sqrt();
    if !s.is_finite() {
        return s;
    }
    if s < 1.0e-145 {
        return next_up(s);
    }
    if (-s).mul_add(s, x) > 0.0 {
        next_up(s)
    } else {
        s
    }
}

/// Lower bound for a libm result.
#[inline]
pub fn libm_down(y: f64) -> f64 {
    next_down(next_down(y))
}

/// Upper bound for a libm result.
#[inline]
pub fn libm_up(y: f64) -> f64 {
    next_up(next_up(y))
}

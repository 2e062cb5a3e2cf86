use std::sync::Arc;

use crate::error::Result;
use crate::interval::{Interval, IntervalBox};

/// An unnormalized target density that can be evaluated at points and
/// enclosed over boxes.
///
/// `eval_box` must contain the value of the shape at every real point of
/// the box; the envelope and every guarantee built on it rest on that.
pub trait TargetShape: Send + Sync {
    fn arity(&self) -> usize;

    fn eval_point(&self, x: &[f64]) -> Result<f64>;

    fn eval_box(&self, bx: &IntervalBox) -> Result<Interval>;
}

impl<T: TargetShape + ?Sized> TargetShape for &T {
    fn arity(&self) -> usize {
        (**self).arity()
    }
    fn eval_point(&self, x: &[f64]) -> Result<f64> {
        (**self).eval_point(x)
    }
    fn eval_box(&self, bx: &IntervalBox) -> Result<Interval> {
        (**self).eval_box(bx)
    }
}

impl<T: TargetShape + ?Sized> TargetShape for Box<T> {
    fn arity(&self) -> usize {
        (**self).arity()
    }
    fn eval_point(&self, x: &[f64]) -> Result<f64> {
        (**self).eval_point(x)
    }
    fn eval_box(&self, bx: &IntervalBox) -> Result<Interval> {
        (**self).eval_box(bx)
    }
}

impl<T: TargetShape + ?Sized> TargetShape for Arc<T> {
    fn arity(&self) -> usize {
        (**self).arity()
    }
    fn eval_point(&self, x: &[f64]) -> Result<f64> {
        (**self).eval_point(x)
    }
    fn eval_box(&self, bx: &IntervalBox) -> Result<Interval> {
        (**self).eval_box(bx)
    }
}

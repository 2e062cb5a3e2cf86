//! Rejection sampling with envelopes verified by interval arithmetic.
//!
//! A target shape (an unnormalized density given as a formula) is enclosed
//! over the boxes of an adaptively refined partition of its domain. The
//! upper bounds of those enclosures form a piecewise-constant envelope that
//! provably dominates the target, so the accepted draws are exact
//! independent samples. The same proposal stream also yields importance
//! weights and an independent Metropolis-Hastings chain.
//!
//! ```
//! use mrs::envelope::{Partition, Scheme};
//! use mrs::expr::ExprDag;
//! use mrs::interval::IntervalBox;
//! use mrs::sampler::TrioSampler;
//!
//! let target = ExprDag::parse("exp(-x1^2/2)", 1).unwrap();
//! let domain = IntervalBox::cube(-5.0, 5.0, 1).unwrap();
//! let mut partition = Partition::new(target, domain, Scheme::Integral).unwrap();
//! partition.refine(63).unwrap();
//!
//! let bounds = partition.acceptance_bounds().unwrap();
//! assert!(bounds.lo() > 0.5);
//!
//! let mut sampler = TrioSampler::new(&partition, 7).unwrap();
//! let accepted = sampler.next_accepted(10_000).unwrap();
//! assert!(accepted.point[0].abs() <= 5.0);
//! ```

pub mod cli;
pub mod diagnostics;
pub mod envelope;
pub mod error;
pub mod expr;
pub mod interval;
pub mod sampler;
pub mod shape;
pub mod targets;

pub use error::{Error, Result};
pub use shape::TargetShape;

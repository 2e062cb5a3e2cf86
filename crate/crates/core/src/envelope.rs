//! Adaptive partitions of the domain and the piecewise-constant envelope
//! built from per-box range enclosures.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::round::{add_down, add_up, div_down, mul_down, mul_up};
use crate::interval::{fmt_f64, Interval, IntervalBox};
use crate::shape::TargetShape;

/// Which box the refinement splits next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Largest volume first; yields uniform partitions at powers of two.
    Volume,
    /// Widest enclosure first.
    Range,
    /// Largest volume times enclosure width first.
    Integral,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Volume, Scheme::Range, Scheme::Integral];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Volume => "volume",
            Scheme::Range => "range",
            Scheme::Integral => "integral",
        }
    }

    fn key(self, volume: f64, enclosure: Interval) -> f64 {
        match self {
            Scheme::Volume => volume,
            Scheme::Range => enclosure.diameter(),
            Scheme::Integral => mul_up(volume, enclosure.diameter()),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Scheme> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme `{s}`")))
    }
}

/// One cell of the partition with its enclosure data.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledBox {
    pub bbox: IntervalBox,
    /// Encloses the range of the target over `bbox`.
    pub enclosure: Interval,
    /// Encloses the exact volume of `bbox`.
    pub volume: Interval,
    /// Upper bound on the envelope mass over the box.
    pub upper_mass: f64,
    /// Lower bound on the target mass over the box.
    pub lower_mass: f64,
    pub key: f64,
    /// Creation order, used to break priority ties.
    pub seq: u64,
}

impl LabeledBox {
    /// Envelope height over the box.
    pub fn height(&self) -> f64 {
        self.enclosure.hi().max(0.0)
    }
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    key: f64,
    seq: u64,
    index: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// A tiling of the domain by boxes, refined by bisection.
#[derive(Debug, Clone)]
pub struct Partition<S> {
    shape: S,
    domain: IntervalBox,
    scheme: Scheme,
    boxes: Vec<LabeledBox>,
    heap: BinaryHeap<HeapEntry>,
    next_seq: u64,
}

impl<S: TargetShape> Partition<S> {
    /// The single-box partition of `domain`.
    pub fn new(shape: S, domain: IntervalBox, scheme: Scheme) -> Result<Partition<S>> {
        if domain.dim() != shape.arity() {
            return Err(Error::DimensionMismatch {
                expected: shape.arity(),
                got: domain.dim(),
            });
        }
        if !domain.is_bounded() {
            return Err(Error::UnboundedEnclosure(format!("domain {domain} is unbounded")));
        }
        let mut p = Partition {
            shape,
            domain: domain.clone(),
            scheme,
            boxes: Vec::new(),
            heap: BinaryHeap::new(),
            next_seq: 0,
        };
        let root = p.label(domain).map_err(|e| match e {
            Error::ExtensionUndefined(_) | Error::UnboundedEnclosure(_) => e,
            other => Error::ExtensionUndefined(other.to_string()),
        })?;
        if !root.enclosure.hi().is_finite() || !root.volume.hi().is_finite() {
            return Err(Error::UnboundedEnclosure(format!(
                "enclosure {} over volume {}",
                root.enclosure, root.volume
            )));
        }
        p.push(root);
        Ok(p)
    }

    fn label(&mut self, bbox: IntervalBox) -> Result<LabeledBox> {
        let enclosure = self.shape.eval_box(&bbox)?;
        let volume = bbox.volume_enclosure();
        let seq = self.next_seq;
        self.next_seq += 1;
        Ok(LabeledBox {
            upper_mass: mul_up(volume.hi(), enclosure.hi().max(0.0)),
            lower_mass: mul_down(volume.lo(), enclosure.lo().max(0.0)),
            key: self.scheme.key(volume.hi(), enclosure),
            bbox,
            enclosure,
            volume,
            seq,
        })
    }

    fn push(&mut self, b: LabeledBox) {
        let entry = HeapEntry {
            key: b.key,
            seq: b.seq,
            index: self.boxes.len(),
        };
        self.boxes.push(b);
        self.heap.push(entry);
    }

    /// Performs up to `steps` bisections and returns how many were done.
    /// Fewer happen only when every box has become too thin to split.
    pub fn refine(&mut self, steps: usize) -> Result<usize> {
        let mut done = 0;
        while done < steps {
            let Some(top) = self.heap.pop() else { break };
            let parent = &self.boxes[top.index];
            let (_, axis) = parent.bbox.max_diameter();
            // Thin boxes leave the queue but stay in the partition.
            let Some((left, right)) = parent.bbox.bisect(axis)? else {
                continue;
            };
            let left = self.label(left)?;
            let right = self.label(right)?;
            self.heap.push(HeapEntry {
                key: left.key,
                seq: left.seq,
                index: top.index,
            });
            self.boxes[top.index] = left;
            self.push(right);
            done += 1;
        }
        Ok(done)
    }

    /// Refines until the partition has `size` boxes or cannot grow.
    pub fn refine_to(&mut self, size: usize) -> Result<usize> {
        self.refine(size.saturating_sub(self.boxes.len()))
    }

    /// Index of the box the next refinement step would consider.
    pub fn peek(&self) -> Option<usize> {
        self.heap.peek().map(|e| e.index)
    }

    pub fn shape(&self) -> &S {
        &self.shape
    }

    pub fn domain(&self) -> &IntervalBox {
        &self.domain
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn boxes(&self) -> &[LabeledBox] {
        &self.boxes
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    /// Envelope value at `x`; on shared faces the lowest-indexed box wins.
    pub fn envelope_at(&self, x: &[f64]) -> Result<f64> {
        if !self.domain.contains(x) {
            return Err(Error::OutOfDomain(x.to_vec()));
        }
        self.boxes
            .iter()
            .find(|b| b.bbox.contains(x))
            .map(LabeledBox::height)
            .ok_or_else(|| Error::OutOfDomain(x.to_vec()))
    }

    /// Index of the box owning `x` under half-open semantics.
    pub fn owner(&self, x: &[f64]) -> Option<usize> {
        self.boxes.iter().position(|b| b.bbox.owns(x, &self.domain))
    }

    /// Upper bound on the envelope mass, summed with upward rounding.
    pub fn upper_sum(&self) -> f64 {
        self.boxes.iter().fold(0.0, |acc, b| add_up(acc, b.upper_mass))
    }

    /// Lower bound on the target mass, summed with downward rounding.
    pub fn lower_sum(&self) -> f64 {
        self.boxes.iter().fold(0.0, |acc, b| add_down(acc, b.lower_mass))
    }

    /// Encloses the acceptance probability of rejection sampling from this
    /// envelope. Only the lower endpoint carries information.
    pub fn acceptance_bounds(&self) -> Result<Interval> {
        let upper = self.upper_sum();
        if !(upper > 0.0 && upper.is_finite()) {
            return Err(Error::DegenerateMass);
        }
        let lower = div_down(self.lower_sum(), upper).clamp(0.0, 1.0);
        Interval::new(lower, 1.0)
    }

    /// Proposal probability of each box: its share of the envelope mass.
    pub fn box_probabilities(&self) -> Result<Vec<f64>> {
        let total: f64 = self.boxes.iter().map(|b| b.upper_mass).sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::DegenerateMass);
        }
        Ok(self.boxes.iter().map(|b| b.upper_mass / total).collect())
    }

    /// One CSV row per box: index, per-axis bounds, enclosure, priority key.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        let mut header = vec!["index".to_string()];
        for k in 1..=self.domain.dim() {
            header.push(format!("lo{k}"));
            header.push(format!("hi{k}"));
        }
        header.extend(["enc_lo", "enc_hi", "key"].map(String::from));
        writeln!(out, "{}", header.join(","))?;
        for (i, b) in self.boxes.iter().enumerate() {
            let mut row = vec![i.to_string()];
            for iv in b.bbox.dims() {
                row.push(fmt_f64(iv.lo()));
                row.push(fmt_f64(iv.hi()));
            }
            row.push(fmt_f64(b.enclosure.lo()));
            row.push(fmt_f64(b.enclosure.hi()));
            row.push(fmt_f64(b.key));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

use rand::Rng;

use crate::error::{Error, Result};

/// Walker's alias table: O(n) construction, two uniforms per draw.
#[derive(Debug, Clone, PartialEq)]
pub struct AliasTable {
    cutoff: Vec<f64>,
    alias: Vec<usize>,
    probs: Vec<f64>,
}

impl AliasTable {
    /// Table for the distribution proportional to `weights`.
    pub fn new(weights: &[f64]) -> Result<AliasTable> {
        let total: f64 = weights.iter().sum();
        if weights.is_empty()
            || weights.iter().any(|w| !(*w >= 0.0 && w.is_finite()))
            || !(total > 0.0 && total.is_finite())
        {
            return Err(Error::DegenerateMass);
        }
        let n = weights.len();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut scaled: Vec<f64> = probs.iter().map(|p| p * n as f64).collect();
        let mut cutoff = vec![0.0; n];
        let mut alias: Vec<usize> = (0..n).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| scaled[i] < 1.0);
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            cutoff[s] = scaled[s];
            alias[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        for i in large {
            cutoff[i] = 1.0;
        }
        // Leftovers here are rounding residue; route them to the heaviest cell.
        let heaviest = (0..n).fold(0, |best, i| if probs[i] > probs[best] { i } else { best });
        for i in small {
            cutoff[i] = scaled[i].min(1.0);
            alias[i] = heaviest;
        }
        Ok(AliasTable {
            cutoff,
            alias,
            probs,
        })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// The requested probability of cell `i`.
    pub fn probability(&self, i: usize) -> f64 {
        self.probs[i]
    }

    /// Probability of cell `i` as realized by the table.
    pub fn implied_probability(&self, i: usize) -> f64 {
        let n = self.len() as f64;
        let own = self.cutoff[i];
        let donated: f64 = (0..self.len())
            .filter(|&j| self.alias[j] == i && j != i)
            .map(|j| 1.0 - self.cutoff[j])
            .sum();
        (own + donated) / n
    }

    /// Draws a cell, consuming a column uniform and then a coin uniform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let coin: f64 = rng.random();
        let col = ((u * self.len() as f64) as usize).min(self.len() - 1);
        if coin < self.cutoff[col] {
            col
        } else {
            self.alias[col]
        }
    }
}

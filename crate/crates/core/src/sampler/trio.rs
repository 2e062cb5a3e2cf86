use rand::Rng;

use super::{rng_from_seed, AliasTable, RngSeed, SamplerRng};
use crate::envelope::Partition;
use crate::error::{Error, Result};
use crate::shape::TargetShape;

/// One proposal from the partition proposal and its three verdicts.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub point: Vec<f64>,
    pub box_index: usize,
    /// The height `H ~ U[0, envelope_value)` of the rejection test.
    pub proposed_height: f64,
    pub target_value: f64,
    pub envelope_value: f64,
    /// `max(target, 0) / envelope`, proportional to `p*(x) / q(x)`.
    pub importance_weight: f64,
    pub mrs_accepted: bool,
    pub imhs_accepted: bool,
}

/// A uniform point in box `index` of the partition, lower-closed and
/// upper-open on every side. Consumes one uniform per coordinate.
pub fn propose_in<S, R>(partition: &Partition<S>, index: usize, rng: &mut R) -> Vec<f64>
where
    S: TargetShape,
    R: Rng + ?Sized,
{
    partition.boxes()[index]
        .bbox
        .dims()
        .iter()
        .map(|iv| {
            let u: f64 = rng.random();
            let x = iv.lo() + u * (iv.hi() - iv.lo());
            if x < iv.hi() {
                x
            } else {
                iv.hi().next_down().max(iv.lo())
            }
        })
        .collect()
}

/// Draws a box from the alias table, then a uniform point inside it.
pub fn propose<S, R>(table: &AliasTable, partition: &Partition<S>, rng: &mut R) -> (Vec<f64>, usize)
where
    S: TargetShape,
    R: Rng + ?Sized,
{
    let index = table.sample(rng);
    (propose_in(partition, index, rng), index)
}

/// Rejection, importance and independent Metropolis-Hastings sampling on a
/// single proposal stream.
///
/// Per proposal the generator is consumed as: alias column, alias coin, one
/// uniform per coordinate, then the height uniform `u`. The rejection test
/// accepts when `u * f(x) <= p(x)`. The chain accepts when `u * w_cur <= w`,
/// with `w = p / f` the importance weight, so every rejection-accepted point
/// is also chain-accepted.
pub struct TrioSampler<'a, S> {
    partition: &'a Partition<S>,
    table: AliasTable,
    rng: SamplerRng,
    chain_weight: Option<f64>,
    proposals: u64,
    accepted: u64,
}

impl<'a, S: TargetShape> TrioSampler<'a, S> {
    pub fn new(partition: &'a Partition<S>, seed: RngSeed) -> Result<Self> {
        let weights: Vec<f64> = partition.boxes().iter().map(|b| b.upper_mass).collect();
        Ok(TrioSampler {
            partition,
            table: AliasTable::new(&weights)?,
            rng: rng_from_seed(seed),
            chain_weight: None,
            proposals: 0,
            accepted: 0,
        })
    }

    pub fn table(&self) -> &AliasTable {
        &self.table
    }

    /// Proposals made so far.
    pub fn proposals(&self) -> u64 {
        self.proposals
    }

    /// Rejection-accepted proposals so far.
    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    pub fn draw(&mut self) -> Result<SampleRecord> {
        let (point, box_index) = propose(&self.table, self.partition, &mut self.rng);
        let u: f64 = self.rng.random();
        let envelope_value = self.partition.boxes()[box_index].height();
        let target_value = self.partition.shape().eval_point(&point)?;
        if target_value > envelope_value {
            return Err(Error::EnvelopeViolation {
                point,
                target: target_value,
                envelope: envelope_value,
            });
        }
        let proposed_height = u * envelope_value;
        let importance_weight = target_value.max(0.0) / envelope_value;
        let mrs_accepted = proposed_height <= target_value;
        let imhs_accepted = match self.chain_weight {
            None => true,
            Some(current) => mrs_accepted || u * current <= importance_weight,
        };
        if imhs_accepted {
            self.chain_weight = Some(importance_weight);
        }
        self.proposals += 1;
        if mrs_accepted {
            self.accepted += 1;
        }
        Ok(SampleRecord {
            point,
            box_index,
            proposed_height,
            target_value,
            envelope_value,
            importance_weight,
            mrs_accepted,
            imhs_accepted,
        })
    }

    /// Proposes until one is rejection-accepted; fails after `max_trials`.
    pub fn next_accepted(&mut self, max_trials: u64) -> Result<SampleRecord> {
        for _ in 0..max_trials {
            let rec = self.draw()?;
            if rec.mrs_accepted {
                return Ok(rec);
            }
        }
        Err(Error::TrialCapExceeded(max_trials))
    }
}

impl<S: TargetShape> Iterator for TrioSampler<'_, S> {
    type Item = Result<SampleRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.draw())
    }
}

/// The first `n_proposals` records of the stream seeded by `seed`.
pub fn draw_trio<S: TargetShape>(
    partition: &Partition<S>,
    n_proposals: usize,
    seed: RngSeed,
) -> Result<Vec<SampleRecord>> {
    TrioSampler::new(partition, seed)?.take(n_proposals).collect()
}

use rand::Rng;

use super::{rng_from_seed, RngSeed, SamplerRng};
use crate::error::{Error, Result};
use crate::interval::IntervalBox;
use crate::shape::TargetShape;

/// State of a local random-walk Metropolis chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub point: Vec<f64>,
    pub value: f64,
    pub cube_side: f64,
    pub history: Vec<Vec<f64>>,
    pub accepted: u64,
}

/// Random-walk Metropolis with a uniform cube proposal centered at the
/// current state. Proposals outside the domain are rejected.
pub struct LocalChain<'a, S> {
    shape: &'a S,
    domain: &'a IntervalBox,
    rng: SamplerRng,
    state: ChainState,
    keep_history: bool,
}

impl<'a, S: TargetShape> LocalChain<'a, S> {
    pub fn new(
        shape: &'a S,
        domain: &'a IntervalBox,
        start: &[f64],
        cube_side: f64,
        seed: RngSeed,
    ) -> Result<Self> {
        if !domain.contains(start) {
            return Err(Error::OutOfDomain(start.to_vec()));
        }
        if !(cube_side > 0.0 && cube_side.is_finite()) {
            return Err(Error::Config(format!("cube side must be positive, got {cube_side}")));
        }
        let value = shape.eval_point(start)?;
        Ok(LocalChain {
            shape,
            domain,
            rng: rng_from_seed(seed),
            state: ChainState {
                point: start.to_vec(),
                value,
                cube_side,
                history: vec![start.to_vec()],
                accepted: 0,
            },
            keep_history: true,
        })
    }

    /// Stops recording visited points; the history is emptied.
    pub fn without_history(mut self) -> Self {
        self.keep_history = false;
        self.state.history = Vec::new();
        self
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn into_state(self) -> ChainState {
        self.state
    }

    /// One step; consumes one uniform per coordinate and one for the test.
    pub fn step(&mut self) -> Result<()> {
        let side = self.state.cube_side;
        let candidate: Vec<f64> = self
            .state
            .point
            .iter()
            .map(|&x| x + (self.rng.random::<f64>() - 0.5) * side)
            .collect();
        let u: f64 = self.rng.random();
        if self.domain.contains(&candidate) {
            let value = self.shape.eval_point(&candidate)?;
            if u * self.state.value <= value {
                self.state.point = candidate;
                self.state.value = value;
                self.state.accepted += 1;
            }
        }
        if self.keep_history {
            self.state.history.push(self.state.point.clone());
        }
        Ok(())
    }
}

/// Runs `n_steps` steps from `start`; the history holds `n_steps + 1` points.
pub fn lmhs_run<S: TargetShape>(
    shape: &S,
    domain: &IntervalBox,
    start: &[f64],
    cube_side: f64,
    n_steps: usize,
    seed: RngSeed,
) -> Result<ChainState> {
    let mut chain = LocalChain::new(shape, domain, start, cube_side, seed)?;
    for _ in 0..n_steps {
        chain.step()?;
    }
    Ok(chain.into_state())
}

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::generators::{Ctmc, State};
use crate::rng::StreamRng;

/// A piecewise-constant trajectory: `states[i]` holds on
/// `[times[i], times[i+1])`, the last one until the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub seed: u64,
}

impl PathSample {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> State {
        *self.states.last().expect("path has a start state")
    }

    /// State occupied at time `t`.
    pub fn at(&self, t: f64) -> State {
        let i = self.times.partition_point(|&s| s <= t);
        self.states[i.saturating_sub(1)]
    }
}

/// Holding time and next state index out of `i`, or `None` if absorbing.
pub fn first_jump<R: Rng + ?Sized>(chain: &Ctmc, i: usize, rng: &mut R) -> Option<(f64, usize)> {
    let q = chain.exit_rate(i);
    if !(q > 0.0) {
        return None;
    }
    let e: f64 = Exp1.sample(rng);
    let hold = e / q;
    let target = rng.random::<f64>() * q;
    let mut acc = 0.0;
    let mut last = i;
    for (j, r) in chain.jumps(i) {
        acc += r;
        last = j;
        if target < acc {
            return Some((hold, j));
        }
    }
    Some((hold, last))
}

/// Gillespie sample on `[0, horizon]`.
pub fn simulate(
    chain: &Ctmc,
    x0: impl Into<State>,
    horizon: f64,
    rng: &mut StreamRng,
) -> Result<PathSample> {
    if !(horizon >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "horizon {horizon} must be >= 0"
        )));
    }
    let x0 = x0.into();
    let mut i = chain
        .index_of(x0)
        .ok_or_else(|| Error::InvalidParams(format!("state {x0} not in chain")))?;
    let mut t = 0.0;
    let mut path = PathSample {
        times: vec![0.0],
        states: vec![x0],
        seed: rng.seed(),
    };
    while let Some((hold, j)) = first_jump(chain, i, rng) {
        t += hold;
        if t > horizon {
            break;
        }
        i = j;
        path.times.push(t);
        path.states.push(chain.states()[j]);
    }
    Ok(path)
}

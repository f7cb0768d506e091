//! Finite-state CTMC engine: stationary laws, absorption probabilities,
//! transient laws by uniformization and exact path simulation.

mod simulate;
mod solve;
mod structure;
mod transient;

use std::io::Write;

use crate::error::{Error, Result};
use crate::generators::{Ctmc, State};

pub use simulate::{first_jump, simulate, PathSample};
pub use solve::{
    absorption_probs, solve_tridiagonal, stationary, stationary_on_class, stationary_residual,
};
pub use structure::{closed_classes, reaches, BirthDeathView};
pub use transient::{transient, transient_observable, DEFAULT_TOL};

/// Probability vector over the states of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Dist {
    pub states: Vec<State>,
    pub p: Vec<f64>,
}

impl Dist {
    pub fn new(chain: &Ctmc, p: Vec<f64>) -> Result<Self> {
        if p.len() != chain.len() {
            return Err(Error::Dimension(format!(
                "distribution of length {} on {} states",
                p.len(),
                chain.len()
            )));
        }
        Ok(Self {
            states: chain.states().to_vec(),
            p,
        })
    }

    /// Point mass at state index `i`.
    pub fn delta(chain: &Ctmc, i: usize) -> Self {
        let mut p = vec![0.0; chain.len()];
        p[i] = 1.0;
        Self {
            states: chain.states().to_vec(),
            p,
        }
    }

    pub fn delta_at(chain: &Ctmc, s: impl Into<State>) -> Result<Self> {
        let s = s.into();
        let i = chain
            .index_of(s)
            .ok_or_else(|| Error::InvalidParams(format!("state {s} not in chain")))?;
        Ok(Self::delta(chain, i))
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn prob(&self, s: impl Into<State>) -> f64 {
        let s = s.into();
        self.states
            .iter()
            .position(|&x| x == s)
            .map_or(0.0, |i| self.p[i])
    }

    /// Clamps entries in `[-1e-14, 0)` to zero, rejects anything lower.
    pub fn clamp(mut self) -> Result<Self> {
        for (i, v) in self.p.iter_mut().enumerate() {
            if *v < 0.0 {
                if *v < -1e-14 {
                    return Err(Error::NegativeProbability {
                        index: i,
                        value: *v,
                    });
                }
                *v = 0.0;
            }
        }
        Ok(self)
    }

    pub fn tv_distance(&self, other: &Dist) -> f64 {
        0.5 * self
            .p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }

    /// CSV with header `state,probability`; the cemetery prints as `DELTA`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["state", "probability"])?;
        for (s, p) in self.states.iter().zip(&self.p) {
            out.write_record([s.to_string(), format!("{p:.17e}")])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `sum_x f(x) p(x)`.
pub fn expect(dist: &Dist, f: impl Fn(&State) -> f64) -> f64 {
    dist.states
        .iter()
        .zip(&dist.p)
        .filter(|(_, &p)| p != 0.0)
        .map(|(s, &p)| f(s) * p)
        .sum()
}

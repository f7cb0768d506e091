//! Generator matrices for every chain of the model, plus the combinatorial
//! coefficients and the max-line (Siegmund) transformation.

mod builders;
mod combinatorics;
mod descendant;
mod siegmund;
mod sparse;

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use builders::{
    build_q_l, build_q_r, build_q_siegmund, build_q_y_dom, build_q_y_ftw, build_q_ytilde,
    rates_q_l, rates_q_r, rates_q_siegmund, rates_q_y, rates_q_ytilde, BirthDeath, Scalar,
};
pub use combinatorics::{
    aux_identity_holds, branching_coeff, branching_coeff_big, branching_identity_holds,
    falling_factorial, stirling2, stirling2_big,
};
pub use descendant::{build_q_descendant, descendant_states, DescState, DEFAULT_DESCENDANT_CAP};
pub use siegmund::{
    build_t, build_t_exact, build_t_inv, build_t_inv_exact, conjugate, DenseMatrix,
};
pub use sparse::SparseMatrix;

/// A state of a line-counting or frequency chain. `Cemetery` is the
/// absorbing state that records a certainly fit sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StateLabel {
    Count(u32),
    Cemetery,
}

impl StateLabel {
    pub fn count(&self) -> Option<u32> {
        match self {
            StateLabel::Count(k) => Some(*k),
            StateLabel::Cemetery => None,
        }
    }

    pub fn is_cemetery(&self) -> bool {
        matches!(self, StateLabel::Cemetery)
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateLabel::Count(k) => write!(f, "{k}"),
            StateLabel::Cemetery => f.write_str("DELTA"),
        }
    }
}

/// Generic label for states of a chain. Plain counts are `Count`, the
/// descendant chain uses `Triple`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum State {
    Label(StateLabel),
    Triple(DescState),
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            State::Label(l) => l.fmt(f),
            State::Triple(t) => write!(f, "({};{};{})", t.k, t.d, t.b),
        }
    }
}

impl From<StateLabel> for State {
    fn from(l: StateLabel) -> Self {
        State::Label(l)
    }
}

/// Finite continuous-time Markov chain: labelled states plus a sparse
/// generator whose rows sum to zero.
#[derive(Debug, Clone)]
pub struct Ctmc {
    states: Vec<State>,
    q: SparseMatrix,
}

impl Ctmc {
    /// Assembles a chain from off-diagonal rates. Diagonal entries are
    /// computed so that rows sum to zero. Zero rates are dropped.
    pub fn from_rates(
        states: Vec<State>,
        rates: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let q = SparseMatrix::generator(states.len(), rates)?;
        Ok(Self { states, q })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn q(&self) -> &SparseMatrix {
        &self.q
    }

    pub fn index_of(&self, s: State) -> Option<usize> {
        self.states.iter().position(|&x| x == s)
    }

    pub fn index_of_label(&self, l: StateLabel) -> Option<usize> {
        self.index_of(State::Label(l))
    }

    pub fn label(&self, i: usize) -> StateLabel {
        match self.states[i] {
            State::Label(l) => l,
            State::Triple(_) => panic!("state {i} is not a plain label"),
        }
    }

    /// Rate from `i` to `j` (diagonal included).
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.q.get(i, j)
    }

    /// Off-diagonal row of `i` as `(j, rate)` pairs.
    pub fn jumps(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.q.row(i).filter(move |&(j, r)| j != i && r > 0.0)
    }

    pub fn exit_rate(&self, i: usize) -> f64 {
        -self.q.get(i, i)
    }

    pub fn is_absorbing(&self, i: usize) -> bool {
        self.jumps(i).next().is_none()
    }

    /// Largest absolute row sum and smallest off-diagonal entry.
    pub fn sanity(&self) -> (f64, f64) {
        let mut worst_row = 0.0f64;
        let mut min_off = f64::INFINITY;
        for i in 0..self.len() {
            let mut sum = 0.0;
            for (j, r) in self.q.row(i) {
                sum += r;
                if j != i {
                    min_off = min_off.min(r);
                }
            }
            worst_row = worst_row.max(sum.abs());
        }
        (worst_row, min_off)
    }

    pub fn dense(&self) -> DenseMatrix<f64> {
        self.q.to_dense()
    }

    /// Matrix-Market-style export: a header line, a size line, then
    /// `row col value` triplets with 0-based indices.
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        let states: Vec<String> = self.states.iter().map(|s| s.to_string()).collect();
        writeln!(w, "% states: {}", states.join(" "))?;
        writeln!(w, "{} {} {}", self.len(), self.len(), self.q.nnz())?;
        for i in 0..self.len() {
            for (j, r) in self.q.row(i) {
                writeln!(w, "{i} {j} {r:e}")?;
            }
        }
        Ok(())
    }
}

/// State lists used throughout: `[N]_0`, `[N]`, `[N]_{0,Delta}`.
pub fn counts(lo: u32, hi: u32) -> Vec<State> {
    (lo..=hi)
        .map(|k| State::Label(StateLabel::Count(k)))
        .collect()
}

pub fn counts_with_cemetery(n: u32) -> Vec<State> {
    let mut v = counts(0, n);
    v.push(State::Label(StateLabel::Cemetery));
    v
}

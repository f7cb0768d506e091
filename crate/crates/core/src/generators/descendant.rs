use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;

use super::builders::pressure;
use super::{Ctmc, State};

pub const DEFAULT_DESCENDANT_CAP: usize = 20;

/// `(Y, D, B)`: unfit count, unfit descendants and fit descendants of a
/// marked initial subpopulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DescState {
    pub k: u32,
    pub d: u32,
    pub b: u32,
}

/// All of `Theta` in lexicographic `(k, d, b)` order.
pub fn descendant_states(n: u32) -> Vec<DescState> {
    let mut v = Vec::new();
    for k in 0..=n {
        for d in 0..=k {
            for b in 0..=n - k {
                v.push(DescState { k, d, b });
            }
        }
    }
    v
}

/// Generator of `(Y, D, B)` read off the graphical rules: neutral arrows
/// copy type and descent, a selective event hitting an individual hands it
/// the type and descent of a uniformly chosen fit individual, mutations flip
/// the type only.
pub fn build_q_descendant(p: &ModelParams, cap: usize) -> Result<Ctmc> {
    if p.n > cap {
        return Err(Error::CapExceeded { n: p.n, cap });
    }
    let rates = p.ftw_rates();
    let n = p.n as i64;
    let nf = p.n as f64;
    let un0 = p.u * p.nu0;
    let un1 = p.u * p.nu1();
    let states = descendant_states(p.n as u32);
    let index: HashMap<DescState, usize> =
        states.iter().enumerate().map(|(i, &s)| (s, i)).collect();

    let mut out = Vec::new();
    for (i, st) in states.iter().enumerate() {
        let (k, d, b) = (st.k as i64, st.d as i64, st.b as i64);
        let (ud, un, fd, fneg) = (d as f64, (k - d) as f64, b as f64, (n - k - b) as f64);
        let sel = if k < n {
            pressure::<f64>(&rates, k as usize, p.n) / (nf - k as f64)
        } else {
            0.0
        };
        let mut push = |dk: i64, dd: i64, db: i64, r: f64| {
            if r <= 0.0 {
                return;
            }
            let t = DescState {
                k: (k + dk) as u32,
                d: (d + dd) as u32,
                b: (b + db) as u32,
            };
            out.push((i, index[&t], r));
        };
        // neutral: source category first, destination second
        push(0, 1, 0, ud * un / nf);
        push(1, 1, -1, ud * fd / nf);
        push(1, 1, 0, ud * fneg / nf);
        push(0, -1, 0, un * ud / nf);
        push(1, 0, -1, un * fd / nf);
        push(1, 0, 0, un * fneg / nf);
        push(-1, -1, 1, fd * ud / nf);
        push(-1, 0, 1, fd * un / nf);
        push(0, 0, 1, fd * fneg / nf);
        push(-1, -1, 0, fneg * ud / nf);
        push(-1, 0, 0, fneg * un / nf);
        push(0, 0, -1, fneg * fd / nf);
        // selection: destination category first, parent category second
        push(-1, -1, 1, ud * sel * fd);
        push(-1, -1, 0, ud * sel * fneg);
        push(-1, 0, 1, un * sel * fd);
        push(-1, 0, 0, un * sel * fneg);
        push(0, 0, -1, fd * sel * fneg);
        push(0, 0, 1, fneg * sel * fd);
        // mutation
        push(-1, -1, 1, ud * un0);
        push(-1, 0, 0, un * un0);
        push(1, 1, -1, fd * un1);
        push(1, 0, 0, fneg * un1);
    }
    Ctmc::from_rates(states.into_iter().map(State::Triple).collect(), out)
}

#![allow(dead_code)]

use std::collections::BTreeMap;

use moran_core::generators::{Ctmc, StateLabel};
use moran_core::graphical::{Event, EventKind, EventLog};
use moran_core::{DiffusionParams, ModelParams, SelectionSpec};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// FTW rates on 1..=3 distinct orders out of 1..=5.
pub fn ftw_rates<R: Rng>(rng: &mut R) -> Vec<(u32, f64)> {
    let k = rng.random_range(1..=3);
    sample(rng, 5, k)
        .into_iter()
        .map(|i| (i as u32 + 1, rng.random_range(0.01..1.0)))
        .collect()
}

/// Non-increasing DOM rates on orders 1..=M.
pub fn dom_rates<R: Rng>(rng: &mut R) -> Vec<(u32, f64)> {
    let m = rng.random_range(1..=5);
    let mut v: Vec<f64> = (0..m).map(|_| rng.random_range(0.01..1.0)).collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v.into_iter()
        .enumerate()
        .map(|(i, s)| (i as u32 + 1, s))
        .collect()
}

pub fn draw<R: Rng>(rng: &mut R, n: usize) -> ModelParams {
    let u = rng.random_range(0.05..2.0);
    let nu0 = rng.random_range(0.05..0.95);
    ModelParams::ftw(n, u, nu0, ftw_rates(rng)).unwrap()
}

pub fn draw_dom<R: Rng>(rng: &mut R, n: usize) -> ModelParams {
    let u = rng.random_range(0.0..2.0);
    let nu0 = rng.random_range(0.05..0.95);
    ModelParams::new(n, u, nu0, SelectionSpec::dom(dom_rates(rng))).unwrap()
}

pub fn draw_diffusion<R: Rng>(rng: &mut R) -> DiffusionParams {
    let theta = rng.random_range(0.1..3.0);
    let nu0 = rng.random_range(0.05..0.95);
    DiffusionParams::new(theta, nu0, ftw_rates(rng)).unwrap()
}

/// Jump counts `from -> to` between distinct consecutive states.
#[derive(Debug)]
pub struct Jumps<S: Ord> {
    pub counts: BTreeMap<(S, S), u64>,
}

impl<S: Ord> Default for Jumps<S> {
    fn default() -> Self {
        Self {
            counts: BTreeMap::new(),
        }
    }
}

impl<S: Ord + Clone> Jumps<S> {
    pub fn record(&mut self, path: &[S]) {
        for w in path.windows(2) {
            if w[0] != w[1] {
                *self.counts.entry((w[0].clone(), w[1].clone())).or_default() += 1;
            }
        }
    }

    pub fn merge(&mut self, other: Jumps<S>) {
        for (k, v) in other.counts {
            *self.counts.entry(k).or_default() += v;
        }
    }
}

/// Outcome of comparing empirical jump frequencies with a generator.
#[derive(Debug)]
pub struct JumpCheck {
    pub rows: usize,
    pub entries: usize,
    /// Largest `|p_hat - p| / sigma`.
    pub worst_z: f64,
    pub impossible: u64,
}

impl JumpCheck {
    pub fn passes(&self) -> bool {
        self.rows > 0 && self.worst_z <= 4.0 && self.impossible == 0
    }
}

/// Per-row multinomial check for rows visited at least `min_visits` times.
pub fn check_jumps<S: Ord + Clone>(
    jumps: &Jumps<S>,
    chain: &Ctmc,
    index: impl Fn(&S) -> usize,
    min_visits: u64,
) -> JumpCheck {
    let mut visits: BTreeMap<S, u64> = BTreeMap::new();
    for ((a, _), c) in &jumps.counts {
        *visits.entry(a.clone()).or_default() += c;
    }
    let mut out = JumpCheck {
        rows: 0,
        entries: 0,
        worst_z: 0.0,
        impossible: 0,
    };
    for (from, &n) in &visits {
        let i = index(from);
        let exit = chain.exit_rate(i);
        if n < min_visits {
            continue;
        }
        out.rows += 1;
        let observed: BTreeMap<usize, u64> = jumps
            .counts
            .iter()
            .filter(|((a, _), _)| a == from)
            .map(|((_, b), &c)| (index(b), c))
            .collect();
        for (&j, &c) in &observed {
            if chain.rate(i, j) <= 0.0 {
                out.impossible += c;
            }
        }
        for (j, rate) in chain.jumps(i) {
            let p = rate / exit;
            let c = observed.get(&j).copied().unwrap_or(0);
            let p_hat = c as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            let z = if sigma > 0.0 {
                (p_hat - p).abs() / sigma
            } else {
                0.0
            };
            out.entries += 1;
            out.worst_z = out.worst_z.max(z);
        }
    }
    out
}

pub fn label_index(chain: &Ctmc) -> impl Fn(&StateLabel) -> usize + '_ {
    move |l| chain.index_of_label(*l).expect("label in chain")
}

/// Every single event of the graphical construction with its rate.
pub fn all_events(p: &ModelParams) -> Vec<(EventKind, f64)> {
    let n = p.n as u32;
    let nf = p.n as f64;
    let mut out = Vec::new();
    for src in 0..n {
        for dst in 0..n {
            out.push((EventKind::Neutral { src, dst }, 1.0 / nf));
        }
    }
    for (&m, &s) in &p.ftw_rates() {
        if s == 0.0 {
            continue;
        }
        let rate = s / nf.powi(m as i32);
        let combos = (n as usize).pow(m);
        for c in 0..combos {
            let mut j = Vec::with_capacity(m as usize);
            let mut x = c;
            for _ in 0..m {
                j.push((x % n as usize) as u32);
                x /= n as usize;
            }
            for dst in 0..n {
                out.push((EventKind::Selective { j: j.clone(), dst }, rate));
            }
        }
    }
    for site in 0..n {
        out.push((EventKind::MutDel { site }, p.u * p.nu1()));
        out.push((EventKind::MutBen { site }, p.u * p.nu0));
    }
    out.retain(|&(_, r)| r > 0.0);
    out
}

pub fn one_event_log(n: usize, kind: EventKind) -> EventLog {
    EventLog {
        n,
        horizon: 1.0,
        seed: 0,
        events: vec![Event { t: 0.5, kind }],
    }
}

/// `k` unfit sites first.
pub fn colouring(n: usize, k: usize) -> Vec<u8> {
    (0..n).map(|i| (i < k) as u8).collect()
}

use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::generators::StateLabel;
use crate::rng::StreamRng;

use super::{EventKind, EventLog};

/// Line count over backward time `r = horizon - t`, recorded at changes.
#[derive(Debug, Clone, PartialEq)]
pub struct LinePath {
    pub times: Vec<f64>,
    pub values: Vec<StateLabel>,
}

impl LinePath {
    fn start(v: StateLabel) -> Self {
        Self {
            times: vec![0.0],
            values: vec![v],
        }
    }

    fn push(&mut self, r: f64, v: StateLabel) {
        if *self.values.last().unwrap() != v {
            self.times.push(r);
            self.values.push(v);
        }
    }

    pub fn at(&self, r: f64) -> StateLabel {
        let i = self.times.partition_point(|&s| s <= r);
        self.values[i.saturating_sub(1)]
    }

    pub fn last(&self) -> StateLabel {
        *self.values.last().unwrap()
    }
}

/// Site set of the killed ASG.
#[derive(Debug, Clone, PartialEq)]
pub struct KasgState {
    member: Vec<bool>,
    count: usize,
    killed: bool,
}

impl KasgState {
    pub fn new(n: usize, sites: &[u32]) -> Result<Self> {
        let mut member = vec![false; n];
        for &s in sites {
            let s = s as usize;
            if s >= n {
                return Err(Error::InvalidParams(format!("site {s} outside 0..{n}")));
            }
            member[s] = true;
        }
        let count = member.iter().filter(|&&b| b).count();
        Ok(Self {
            member,
            count,
            killed: false,
        })
    }

    pub fn label(&self) -> StateLabel {
        if self.killed {
            StateLabel::Cemetery
        } else {
            StateLabel::Count(self.count as u32)
        }
    }

    pub fn is_killed(&self) -> bool {
        self.killed
    }

    pub fn contains(&self, site: u32) -> bool {
        self.member[site as usize]
    }

    pub fn sites(&self) -> Vec<u32> {
        (0..self.member.len() as u32)
            .filter(|&s| self.member[s as usize])
            .collect()
    }

    /// Applies one event backward; returns `true` if the label changed.
    pub fn apply(&mut self, kind: &EventKind) -> bool {
        if self.killed || self.count == 0 {
            return false;
        }
        match kind {
            EventKind::Neutral { src, dst } => {
                let (s, d) = (*src as usize, *dst as usize);
                if s == d || !self.member[d] {
                    return false;
                }
                self.member[d] = false;
                if self.member[s] {
                    self.count -= 1;
                    true
                } else {
                    self.member[s] = true;
                    false
                }
            }
            EventKind::Selective { j, dst } => {
                if !self.member[*dst as usize] {
                    return false;
                }
                let before = self.count;
                for &x in j {
                    if !self.member[x as usize] {
                        self.member[x as usize] = true;
                        self.count += 1;
                    }
                }
                self.count != before
            }
            EventKind::MutDel { site } => {
                if self.member[*site as usize] {
                    self.member[*site as usize] = false;
                    self.count -= 1;
                    true
                } else {
                    false
                }
            }
            EventKind::MutBen { site } => {
                if self.member[*site as usize] {
                    self.killed = true;
                    true
                } else {
                    false
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KasgTrace {
    pub path: LinePath,
    pub last: KasgState,
}

/// Backward sweep of the killed ASG started from `sample` at the horizon.
pub fn extract_r_path(log: &EventLog, sample: &[u32]) -> Result<KasgTrace> {
    let mut st = KasgState::new(log.n, sample)?;
    let mut path = LinePath::start(st.label());
    for e in log.events.iter().rev() {
        if st.apply(&e.kind) {
            path.push(log.horizon - e.t, st.label());
        }
        if st.killed || st.count == 0 {
            break;
        }
    }
    Ok(KasgTrace { path, last: st })
}

/// Sites at finite levels (index 0 is level 1) and the level of the immune
/// line, 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PldState {
    pub levels: Vec<u32>,
    pub immune: usize,
}

impl PldState {
    pub fn new(site: u32) -> Self {
        Self {
            levels: vec![site],
            immune: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    fn level_of(&self, site: u32) -> Option<usize> {
        self.levels.iter().position(|&s| s == site)
    }

    /// Ancestral site under a colouring: lowest fit finite level, else the
    /// immune line.
    pub fn ancestral_site(&self, colouring: &[u8]) -> u32 {
        self.levels
            .iter()
            .copied()
            .find(|&s| colouring[s as usize] == 0)
            .unwrap_or(self.levels[self.immune])
    }

    /// Applies one event backward; returns `true` if the state changed.
    pub fn apply(&mut self, kind: &EventKind) -> bool {
        match kind {
            EventKind::Neutral { src, dst } => {
                if src == dst {
                    return false;
                }
                let Some(ld) = self.level_of(*dst) else {
                    return false;
                };
                match self.level_of(*src) {
                    Some(ls) => {
                        let (lo, hi) = (ls.min(ld), ls.max(ld));
                        self.levels[lo] = *src;
                        self.levels.remove(hi);
                        if self.immune == ls || self.immune == ld {
                            self.immune = lo;
                        } else if self.immune > hi {
                            self.immune -= 1;
                        }
                    }
                    None => self.levels[ld] = *src,
                }
                true
            }
            EventKind::Selective { j, dst } => {
                let Some(l) = self.level_of(*dst) else {
                    return false;
                };
                let immune_site = self.levels[self.immune];
                let mut next: Vec<u32> = self.levels[..l].to_vec();
                for &x in j.iter().chain(&self.levels[l..]) {
                    if !next.contains(&x) {
                        next.push(x);
                    }
                }
                if next == self.levels {
                    return false;
                }
                self.immune = next.iter().position(|&s| s == immune_site).unwrap();
                self.levels = next;
                true
            }
            EventKind::MutDel { site } => {
                let Some(l) = self.level_of(*site) else {
                    return false;
                };
                if l == self.immune {
                    if l + 1 == self.levels.len() {
                        return false;
                    }
                    self.levels.remove(l);
                    self.levels.push(*site);
                    self.immune = self.levels.len() - 1;
                } else {
                    self.levels.remove(l);
                    if self.immune > l {
                        self.immune -= 1;
                    }
                }
                true
            }
            EventKind::MutBen { site } => {
                let Some(l) = self.level_of(*site) else {
                    return false;
                };
                let changed = self.levels.len() != l + 1 || self.immune != l;
                self.levels.truncate(l + 1);
                self.immune = l;
                changed
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PldTrace {
    /// Backward times and states, recorded at every change.
    pub states: Vec<(f64, PldState)>,
    pub l: LinePath,
    pub last: PldState,
}

/// Backward sweep of the pruned lookdown ASG from a single sampled site.
pub fn extract_pld_path(log: &EventLog, sample: &[u32]) -> Result<PldTrace> {
    let &[site] = sample else {
        return Err(Error::InvalidParams(format!(
            "the pruned lookdown ASG starts from one site, got {}",
            sample.len()
        )));
    };
    if site as usize >= log.n {
        return Err(Error::InvalidParams(format!(
            "site {site} outside 0..{}",
            log.n
        )));
    }
    let mut st = PldState::new(site);
    let mut states = vec![(0.0, st.clone())];
    let mut l = LinePath::start(StateLabel::Count(1));
    for e in log.events.iter().rev() {
        if st.apply(&e.kind) {
            let r = log.horizon - e.t;
            states.push((r, st.clone()));
            l.push(r, StateLabel::Count(st.len() as u32));
        }
    }
    Ok(PldTrace {
        states,
        l,
        last: st,
    })
}

/// Type of the ancestor of site 0 at the start of the log, under a uniform
/// colouring with `k` unfit sites: unfit iff every finite level is unfit.
pub fn empirical_ancestral_type(log: &EventLog, k: usize, rng: &mut StreamRng) -> Result<u8> {
    if k > log.n {
        return Err(Error::InvalidParams(format!(
            "k = {k} exceeds N = {}",
            log.n
        )));
    }
    let mut st = PldState::new(0);
    for e in log.events.iter().rev() {
        st.apply(&e.kind);
    }
    let mut colouring = vec![0u8; log.n];
    for i in sample(rng, log.n, k) {
        colouring[i] = 1;
    }
    Ok(st.levels.iter().all(|&s| colouring[s as usize] == 1) as u8)
}

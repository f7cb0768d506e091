use crate::error::{Error, Result};
use crate::generators::DescState;

use super::{EventKind, EventLog};

fn check_colouring(log: &EventLog, colouring: &[u8]) -> Result<()> {
    if colouring.len() != log.n {
        return Err(Error::Dimension(format!(
            "colouring of length {} for N = {}",
            colouring.len(),
            log.n
        )));
    }
    if colouring.iter().any(|&c| c > 1) {
        return Err(Error::InvalidParams("colours must be 0 or 1".into()));
    }
    Ok(())
}

/// First fit entry of `j` under the current types.
fn first_fit(types: &[u8], j: &[u32]) -> Option<usize> {
    j.iter().map(|&x| x as usize).find(|&x| types[x] == 0)
}

/// Applies one event to the types and returns the parent of `dst` if the
/// event replaces it.
fn step(types: &mut [u8], kind: &EventKind) -> Option<(usize, usize)> {
    match kind {
        EventKind::Neutral { src, dst } => {
            let (s, d) = (*src as usize, *dst as usize);
            types[d] = types[s];
            Some((s, d))
        }
        EventKind::Selective { j, dst } => {
            let d = *dst as usize;
            let parent = first_fit(types, j);
            if parent.is_some() {
                types[d] = 0;
            }
            parent.map(|p| (p, d))
        }
        EventKind::MutDel { site } => {
            types[*site as usize] = 1;
            None
        }
        EventKind::MutBen { site } => {
            types[*site as usize] = 0;
            None
        }
    }
}

/// Final colouring after the forward sweep (0 fit, 1 unfit).
pub fn propagate_types(log: &EventLog, colouring: &[u8]) -> Result<Vec<u8>> {
    check_colouring(log, colouring)?;
    let mut types = colouring.to_vec();
    for e in &log.events {
        step(&mut types, &e.kind);
    }
    Ok(types)
}

/// Unfit count `Y` over forward time, recorded at every change.
#[derive(Debug, Clone, PartialEq)]
pub struct TypePath {
    pub times: Vec<f64>,
    pub unfit: Vec<u32>,
    pub last: Vec<u8>,
}

impl TypePath {
    pub fn at(&self, t: f64) -> u32 {
        let i = self.times.partition_point(|&s| s <= t);
        self.unfit[i.saturating_sub(1)]
    }
}

pub fn propagate_types_path(log: &EventLog, colouring: &[u8]) -> Result<TypePath> {
    check_colouring(log, colouring)?;
    let mut types = colouring.to_vec();
    let mut y: u32 = types.iter().map(|&c| c as u32).sum();
    let mut path = TypePath {
        times: vec![0.0],
        unfit: vec![y],
        last: Vec::new(),
    };
    for e in &log.events {
        step(&mut types, &e.kind);
        let now: u32 = types.iter().map(|&c| c as u32).sum();
        if now != y {
            y = now;
            path.times.push(e.t);
            path.unfit.push(y);
        }
    }
    path.last = types;
    Ok(path)
}

/// Site at the start of the log from which each site at the horizon
/// descends. A selective event hands its target the ancestry of the first
/// fit entry of `J`; if none is fit the target keeps its own line.
pub fn propagate_ancestry(log: &EventLog, colouring: &[u8]) -> Result<Vec<u32>> {
    check_colouring(log, colouring)?;
    let mut types = colouring.to_vec();
    let mut anc: Vec<u32> = (0..log.n as u32).collect();
    for e in &log.events {
        if let Some((p, d)) = step(&mut types, &e.kind) {
            anc[d] = anc[p];
        }
    }
    Ok(anc)
}

/// `(Y, D, B)` over forward time.
#[derive(Debug, Clone, PartialEq)]
pub struct DescendantPath {
    pub times: Vec<f64>,
    pub states: Vec<DescState>,
}

impl DescendantPath {
    pub fn at(&self, t: f64) -> DescState {
        let i = self.times.partition_point(|&s| s <= t);
        self.states[i.saturating_sub(1)]
    }
}

pub fn descendant_counts(
    log: &EventLog,
    starting: &[u32],
    colouring: &[u8],
) -> Result<DescendantPath> {
    check_colouring(log, colouring)?;
    if starting.iter().any(|&s| s as usize >= log.n) {
        return Err(Error::InvalidParams(
            "starting set has a site outside 0..N".into(),
        ));
    }
    let mut types = colouring.to_vec();
    let mut marked = vec![false; log.n];
    for &s in starting {
        marked[s as usize] = true;
    }
    let count = |types: &[u8], marked: &[bool]| {
        let mut st = DescState { k: 0, d: 0, b: 0 };
        for (&c, &m) in types.iter().zip(marked) {
            st.k += c as u32;
            if m {
                if c == 1 {
                    st.d += 1;
                } else {
                    st.b += 1;
                }
            }
        }
        st
    };
    let mut cur = count(&types, &marked);
    let mut path = DescendantPath {
        times: vec![0.0],
        states: vec![cur],
    };
    for e in &log.events {
        if let Some((p, d)) = step(&mut types, &e.kind) {
            marked[d] = marked[p];
        }
        let now = count(&types, &marked);
        if now != cur {
            cur = now;
            path.times.push(e.t);
            path.states.push(cur);
        }
    }
    Ok(path)
}

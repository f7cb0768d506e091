//! Event-level simulation of the graphical representation: Poisson event
//! logs, forward propagation of types and ancestry, and backward extraction
//! of the killed ASG and the pruned lookdown ASG from the same log.
//!
//! Sites are 0-based (`0..N`) here and in the serialised logs.

mod backward;
mod forward;

use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ModelParams, Rates};
use crate::rng::StreamRng;

pub use backward::{
    empirical_ancestral_type, extract_pld_path, extract_r_path, KasgState, KasgTrace, LinePath,
    PldState, PldTrace,
};
pub use forward::{
    descendant_counts, propagate_ancestry, propagate_types, propagate_types_path, DescendantPath,
    TypePath,
};

pub const LOG_FORMAT: &str = "moran-asg-events";
pub const LOG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    Neutral {
        src: u32,
        dst: u32,
    },
    /// `j` is kept in arrival order; its length is the order `m`.
    Selective {
        j: Vec<u32>,
        dst: u32,
    },
    MutDel {
        site: u32,
    },
    MutBen {
        site: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub n: usize,
    pub horizon: f64,
    pub seed: u64,
    pub events: Vec<Event>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
    #[serde(rename = "N")]
    n: usize,
    horizon: f64,
    seed: u64,
}

/// Single Poisson clock at rate `N(1 + u + sum_m s_m)`, thinned into event
/// kinds in proportion to their rates.
#[derive(Debug, Clone)]
pub struct EventSampler {
    n: u32,
    total: f64,
    // cumulative thresholds for neutral, each selective order, deleterious
    cut_neutral: f64,
    orders: Vec<(u32, f64)>,
    cut_del: f64,
}

impl EventSampler {
    pub fn new(p: &ModelParams) -> Self {
        Self::from_rates(p.n, p.u, p.nu0, &p.ftw_rates())
    }

    pub fn from_rates(n: usize, u: f64, nu0: f64, rates: &Rates) -> Self {
        let nf = n as f64;
        let mut acc = nf;
        let cut_neutral = acc;
        let mut orders = Vec::new();
        for (&m, &s) in rates {
            if s > 0.0 {
                acc += nf * s;
                orders.push((m, acc));
            }
        }
        acc += nf * u * (1.0 - nu0);
        let cut_del = acc;
        acc += nf * u * nu0;
        Self {
            n: n as u32,
            total: acc,
            cut_neutral,
            orders,
            cut_del,
        }
    }

    pub fn total_rate(&self) -> f64 {
        self.total
    }

    /// Waiting time to the next event and its kind.
    pub fn next<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, EventKind) {
        let e: f64 = Exp1.sample(rng);
        (e / self.total, self.kind(rng))
    }

    pub fn kind<R: Rng + ?Sized>(&self, rng: &mut R) -> EventKind {
        let x = rng.random::<f64>() * self.total;
        let n = self.n;
        if x < self.cut_neutral {
            return EventKind::Neutral {
                src: rng.random_range(0..n),
                dst: rng.random_range(0..n),
            };
        }
        for &(m, cut) in &self.orders {
            if x < cut {
                let j = (0..m).map(|_| rng.random_range(0..n)).collect();
                return EventKind::Selective {
                    j,
                    dst: rng.random_range(0..n),
                };
            }
        }
        let site = rng.random_range(0..n);
        if x < self.cut_del {
            EventKind::MutDel { site }
        } else {
            EventKind::MutBen { site }
        }
    }
}

pub fn sample_event_log(p: &ModelParams, horizon: f64, rng: &mut StreamRng) -> Result<EventLog> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidParams(format!(
            "horizon {horizon} must be > 0"
        )));
    }
    let sampler = EventSampler::new(p);
    let mut events = Vec::new();
    let mut t = 0.0;
    loop {
        let (dt, kind) = sampler.next(rng);
        t += dt;
        if t > horizon {
            break;
        }
        events.push(Event { t, kind });
    }
    Ok(EventLog {
        n: p.n,
        horizon,
        seed: rng.seed(),
        events,
    })
}

/// Copy of `log` in which every selective tuple is extended to length `m`
/// by uniform draws; existing entries are kept as a prefix.
pub fn extend_selective_order(log: &EventLog, m: u32, rng: &mut StreamRng) -> EventLog {
    let n = log.n as u32;
    let events = log
        .events
        .iter()
        .map(|e| match &e.kind {
            EventKind::Selective { j, dst } if (j.len() as u32) < m => {
                let mut j = j.clone();
                while (j.len() as u32) < m {
                    j.push(rng.random_range(0..n));
                }
                Event {
                    t: e.t,
                    kind: EventKind::Selective { j, dst: *dst },
                }
            }
            _ => e.clone(),
        })
        .collect();
    EventLog {
        events,
        ..log.clone()
    }
}

impl EventLog {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n as u32;
        let mut last = 0.0;
        for (i, e) in self.events.iter().enumerate() {
            if !(e.t > last || (i == 0 && e.t >= 0.0)) || e.t > self.horizon {
                return Err(Error::EventLog(format!(
                    "event {i} at time {} out of order",
                    e.t
                )));
            }
            last = e.t;
            let ok = match &e.kind {
                EventKind::Neutral { src, dst } => *src < n && *dst < n,
                EventKind::Selective { j, dst } => {
                    !j.is_empty() && *dst < n && j.iter().all(|&x| x < n)
                }
                EventKind::MutDel { site } | EventKind::MutBen { site } => *site < n,
            };
            if !ok {
                return Err(Error::EventLog(format!(
                    "event {i} has a site outside 0..{n}"
                )));
            }
        }
        Ok(())
    }

    /// JSON lines: a versioned header, then one event per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Header {
            format: LOG_FORMAT.into(),
            version: LOG_VERSION,
            n: self.n,
            horizon: self.horizon,
            seed: self.seed,
        };
        serde_json::to_writer(&mut w, &header)?;
        writeln!(w)?;
        for e in &self.events {
            serde_json::to_writer(&mut w, e)?;
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::EventLog("empty event log".into()))??;
        let header: Header = serde_json::from_str(&first)?;
        if header.format != LOG_FORMAT {
            return Err(Error::EventLog(format!(
                "unknown format {:?}",
                header.format
            )));
        }
        if header.version != LOG_VERSION {
            return Err(Error::EventLog(format!(
                "unsupported version {}",
                header.version
            )));
        }
        let mut events = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            events.push(serde_json::from_str(&line)?);
        }
        let log = Self {
            n: header.n,
            horizon: header.horizon,
            seed: header.seed,
            events,
        };
        log.validate()?;
        Ok(log)
    }
}

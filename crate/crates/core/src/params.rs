//! Model parameters for the finite Moran model and its diffusion limit.
//!
//! Selection rates are kept as sparse maps from the order `m` to a rate.
//! Under fittest-type-wins (FTW) an absent order has rate zero. Under
//! nonlinear dominance (DOM) the sequence is materialised densely up to the
//! largest key, absent entries read as zero, and must be non-increasing.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// Sparse selection-rate map, order `m >= 1` to rate.
pub type Rates = BTreeMap<u32, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Ftw,
    Dom,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionSpec {
    pub scheme: Scheme,
    #[serde(serialize_with = "ser_rates")]
    pub rates: Rates,
}

impl SelectionSpec {
    pub fn ftw(rates: impl IntoIterator<Item = (u32, f64)>) -> Self {
        Self {
            scheme: Scheme::Ftw,
            rates: rates.into_iter().collect(),
        }
    }

    pub fn dom(rates: impl IntoIterator<Item = (u32, f64)>) -> Self {
        Self {
            scheme: Scheme::Dom,
            rates: rates.into_iter().collect(),
        }
    }

    /// FTW form of the rates, converting from DOM when needed.
    pub fn ftw_rates(&self) -> Result<Rates> {
        match self.scheme {
            Scheme::Ftw => Ok(self.rates.clone()),
            Scheme::Dom => dom_to_ftw(&self.rates),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_entries(&self.rates)?;
        if self.scheme == Scheme::Dom {
            check_non_increasing(&self.rates)?;
        }
        let b: f64 = self.rates.iter().map(|(&m, &s)| m as f64 * s).sum();
        if !(b > 0.0) {
            return Err(Error::TrivialNeutral);
        }
        if !b.is_finite() {
            return Err(Error::InvalidParams("infinite offspring rate".into()));
        }
        Ok(())
    }
}

/// Validated finite-population parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelParams {
    #[serde(rename = "N")]
    pub n: usize,
    pub u: f64,
    pub nu0: f64,
    pub selection: SelectionSpec,
}

impl ModelParams {
    pub fn new(n: usize, u: f64, nu0: f64, selection: SelectionSpec) -> Result<Self> {
        Self {
            n,
            u,
            nu0,
            selection,
        }
        .validate()
    }

    /// Shorthand for an FTW model.
    pub fn ftw(
        n: usize,
        u: f64,
        nu0: f64,
        rates: impl IntoIterator<Item = (u32, f64)>,
    ) -> Result<Self> {
        Self::new(n, u, nu0, SelectionSpec::ftw(rates))
    }

    /// Returns the parameters unchanged if every invariant holds.
    pub fn validate(self) -> Result<Self> {
        if self.n == 0 {
            return Err(Error::InvalidParams("N must be at least 1".into()));
        }
        if !(self.nu0 > 0.0 && self.nu0 < 1.0) {
            return Err(Error::InvalidParams(format!(
                "nu0 = {} not in (0, 1)",
                self.nu0
            )));
        }
        if !(self.u >= 0.0) || !self.u.is_finite() {
            return Err(Error::InvalidParams(format!("u = {} must be >= 0", self.u)));
        }
        self.selection.validate()?;
        Ok(self)
    }

    pub fn nu1(&self) -> f64 {
        1.0 - self.nu0
    }

    /// FTW rates, the form every generator builder works with.
    pub fn ftw_rates(&self) -> Rates {
        // validated on construction, so conversion cannot fail
        self.selection
            .ftw_rates()
            .expect("selection validated on construction")
    }

    /// Copy of these parameters re-expressed in FTW form.
    pub fn to_ftw(&self) -> Self {
        Self {
            selection: SelectionSpec {
                scheme: Scheme::Ftw,
                rates: self.ftw_rates(),
            },
            ..self.clone()
        }
    }

    /// `sum_m s_m`, total rate at which a given line is affected by selection.
    pub fn total_selection_rate(&self) -> f64 {
        self.ftw_rates().values().sum()
    }

    pub fn effective_branching_rate(&self) -> f64 {
        effective_branching_rate(&self.ftw_rates())
    }

    /// `s(k) = sum_m s_m (1 - (k/N)^m)`, probability-weighted rate that a
    /// selective event hitting a given line finds a fit potential parent.
    pub fn selective_pressure(&self, k: usize) -> f64 {
        let x = k as f64 / self.n as f64;
        self.ftw_rates()
            .iter()
            .map(|(&m, &s)| s * (1.0 - x.powi(m as i32)))
            .sum()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: RawParams = serde_json::from_str(s)?;
        raw.into_params()
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("params serialise")
    }
}

/// Parameters of the Wright-Fisher diffusion limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffusionParams {
    pub theta: f64,
    pub nu0: f64,
    #[serde(serialize_with = "ser_rates")]
    pub sigma: Rates,
}

impl DiffusionParams {
    pub fn new(theta: f64, nu0: f64, sigma: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let p = Self {
            theta,
            nu0,
            sigma: sigma.into_iter().collect(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta >= 0.0) || !self.theta.is_finite() {
            return Err(Error::InvalidParams(format!(
                "theta = {} must be >= 0",
                self.theta
            )));
        }
        if !(self.nu0 > 0.0 && self.nu0 < 1.0) {
            return Err(Error::InvalidParams(format!(
                "nu0 = {} not in (0, 1)",
                self.nu0
            )));
        }
        check_entries(&self.sigma)?;
        Ok(())
    }

    pub fn nu1(&self) -> f64 {
        1.0 - self.nu0
    }

    pub fn max_order(&self) -> u32 {
        self.sigma.keys().next_back().copied().unwrap_or(0)
    }

    /// Finite-N Moran parameters under the weak-selection scaling
    /// `u = theta/N`, `s_m = sigma_m/N`.
    pub fn rescaled(&self, n: usize) -> Result<ModelParams> {
        let nf = n as f64;
        ModelParams::ftw(
            n,
            self.theta / nf,
            self.nu0,
            self.sigma.iter().map(|(&m, &s)| (m, s / nf)),
        )
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: RawDiffusion = serde_json::from_str(s)?;
        let p = Self {
            theta: raw.theta.0,
            nu0: raw.nu0.0,
            sigma: collect_rates(raw.sigma)?,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?;
        Self::from_json_str(&text)
    }
}

fn check_entries(rates: &Rates) -> Result<()> {
    for (&m, &s) in rates {
        if m == 0 {
            return Err(Error::InvalidParams("selection order must be >= 1".into()));
        }
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::InvalidParams(format!(
                "rate {s} at order {m} must be finite and >= 0"
            )));
        }
    }
    Ok(())
}

/// Dense view `rate(1), ..., rate(M)` of a sparse map, absent entries zero.
fn dense(rates: &Rates) -> Vec<f64> {
    let max = rates.keys().next_back().copied().unwrap_or(0) as usize;
    let mut v = vec![0.0; max];
    for (&m, &s) in rates {
        v[m as usize - 1] = s;
    }
    v
}

fn check_non_increasing(rates: &Rates) -> Result<()> {
    let v = dense(rates);
    for i in 1..v.len() {
        if v[i] > v[i - 1] {
            return Err(Error::NonIncreasing {
                prev_order: i as u32,
                prev: v[i - 1],
                order: i as u32 + 1,
                next: v[i],
            });
        }
    }
    Ok(())
}

/// FTW rates equivalent in distribution to the given DOM rates:
/// `s_m = s^_m - s^_{m+1}`, keeping only nonzero differences.
pub fn dom_to_ftw(dom: &Rates) -> Result<Rates> {
    check_entries(dom)?;
    check_non_increasing(dom)?;
    let v = dense(dom);
    let mut out = Rates::new();
    for i in 0..v.len() {
        let next = v.get(i + 1).copied().unwrap_or(0.0);
        let d = v[i] - next;
        if d != 0.0 {
            out.insert(i as u32 + 1, d);
        }
    }
    Ok(out)
}

/// DOM rates as tail sums `s^_m = sum_{n >= m} s_n`.
pub fn ftw_to_dom(ftw: &Rates) -> Rates {
    let v = dense(ftw);
    let mut out = Rates::new();
    let mut acc = 0.0;
    for i in (0..v.len()).rev() {
        acc += v[i];
        out.insert(i as u32 + 1, acc);
    }
    out
}

/// `b = sum_m m s_m` on FTW-form rates.
pub fn effective_branching_rate(ftw: &Rates) -> f64 {
    ftw.iter().map(|(&m, &s)| m as f64 * s).sum()
}

/// Parses a decimal number or a rational written as `"p/q"`.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: f64 = p
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let q: f64 = q
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if q == 0.0 {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        Ok(p / q)
    } else {
        s.parse()
            .map_err(|_| Error::Parse(format!("not a number: {s:?}")))
    }
}

#[derive(Debug, Clone, Copy)]
struct Num(f64);

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Either {
            F(f64),
            S(String),
        }
        match Either::deserialize(d)? {
            Either::F(x) => Ok(Num(x)),
            Either::S(s) => parse_number(&s).map(Num).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSelection {
    scheme: Scheme,
    rates: Vec<(u32, Num)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    #[serde(rename = "N")]
    n: usize,
    u: Num,
    nu0: Num,
    selection: RawSelection,
}

impl RawParams {
    fn into_params(self) -> Result<ModelParams> {
        ModelParams::new(
            self.n,
            self.u.0,
            self.nu0.0,
            SelectionSpec {
                scheme: self.selection.scheme,
                rates: collect_rates(self.selection.rates)?,
            },
        )
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiffusion {
    theta: Num,
    nu0: Num,
    sigma: Vec<(u32, Num)>,
}

fn collect_rates(v: Vec<(u32, Num)>) -> Result<Rates> {
    let mut out = Rates::new();
    for (m, r) in v {
        if out.insert(m, r.0).is_some() {
            return Err(Error::InvalidParams(format!("duplicate order {m}")));
        }
    }
    Ok(out)
}

fn ser_rates<S: serde::Serializer>(r: &Rates, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(r.len()))?;
    for (m, v) in r {
        seq.serialize_element(&(m, v))?;
    }
    seq.end()
}

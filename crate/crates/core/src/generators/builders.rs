use num_traits::{FromPrimitive, Num};

use crate::error::Result;
use crate::params::{ftw_to_dom, ModelParams, Rates, Scheme};

use super::combinatorics::branching_coeff;
use super::{counts, counts_with_cemetery, Ctmc};

/// Field the rate builders are generic over: `f64` for production use and
/// `BigRational` for exact conjugation checks.
pub trait Scalar: Clone + Num + FromPrimitive + PartialOrd {}

impl<T: Clone + Num + FromPrimitive + PartialOrd> Scalar for T {}

pub(crate) fn from_f64<S: Scalar>(x: f64) -> S {
    S::from_f64(x).expect("finite rate")
}

pub(crate) fn from_int<S: Scalar>(x: u128) -> S {
    S::from_u128(x).expect("integer fits scalar")
}

fn ratio<S: Scalar>(a: usize, b: usize) -> S {
    from_int::<S>(a as u128) / from_int::<S>(b as u128)
}

/// `s(k) = sum_m s_m (1 - (k/N)^m)` in the requested scalar.
pub(crate) fn pressure<S: Scalar>(rates: &Rates, k: usize, n: usize) -> S {
    let x: S = ratio(k, n);
    rates.iter().fold(S::zero(), |acc, (&m, &s)| {
        acc + from_f64::<S>(s) * (S::one() - num_traits::pow(x.clone(), m as usize))
    })
}

/// Nearest-neighbour rates of a birth-death chain on `{0, ..., N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthDeath {
    pub birth: Vec<f64>,
    pub death: Vec<f64>,
}

impl BirthDeath {
    /// Unfit-type frequency chain `Y` under FTW selection.
    pub fn y(p: &ModelParams) -> Self {
        let rates = p.ftw_rates();
        let n = p.n;
        let nf = n as f64;
        let (nu0, nu1) = (p.nu0, p.nu1());
        let mut birth = vec![0.0; n + 1];
        let mut death = vec![0.0; n + 1];
        for k in 0..=n {
            let kf = k as f64;
            let neutral = kf * (nf - kf) / nf;
            birth[k] = neutral + (nf - kf) * p.u * nu1;
            death[k] = neutral + kf * p.u * nu0 + kf * pressure::<f64>(&rates, k, n);
        }
        Self { birth, death }
    }

    /// `Y` with selection given by dominance rates `s^_m`.
    pub fn y_dom(p: &ModelParams) -> Self {
        let dom = match p.selection.scheme {
            Scheme::Dom => p.selection.rates.clone(),
            Scheme::Ftw => ftw_to_dom(&p.selection.rates),
        };
        let n = p.n;
        let nf = n as f64;
        let (nu0, nu1) = (p.nu0, p.nu1());
        let mut birth = vec![0.0; n + 1];
        let mut death = vec![0.0; n + 1];
        for k in 0..=n {
            let kf = k as f64;
            let x = kf / nf;
            let neutral = kf * (nf - kf) / nf;
            let sel: f64 = dom
                .iter()
                .map(|(&m, &s)| s * (nf - kf) * x.powi(m as i32))
                .sum();
            birth[k] = neutral + (nf - kf) * p.u * nu1;
            death[k] = neutral + kf * p.u * nu0 + sel;
        }
        Self { birth, death }
    }

    pub fn len(&self) -> usize {
        self.birth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.birth.is_empty()
    }

    pub fn to_ctmc(&self) -> Result<Ctmc> {
        let n = self.len();
        let rates = (0..n).flat_map(|k| {
            let up = (k + 1 < n).then(|| (k, k + 1, self.birth[k]));
            let down = (k > 0).then(|| (k, k - 1, self.death[k]));
            up.into_iter().chain(down)
        });
        Ctmc::from_rates(counts(0, n as u32 - 1), rates)
    }
}

/// Off-diagonal rates of `Y` on `[N]_0` (index `k`).
pub fn rates_q_y<S: Scalar>(p: &ModelParams) -> Vec<(usize, usize, S)> {
    let rates = p.ftw_rates();
    let n = p.n;
    let u: S = from_f64(p.u);
    let nu0: S = from_f64(p.nu0);
    let nu1: S = from_f64(p.nu1());
    let mut out = Vec::with_capacity(2 * n);
    for k in 0..=n {
        let kk: S = from_int(k as u128);
        let rest: S = from_int((n - k) as u128);
        let neutral = kk.clone() * rest.clone() / from_int(n as u128);
        if k < n {
            let up = neutral.clone() + rest * u.clone() * nu1.clone();
            out.push((k, k + 1, up));
        }
        if k > 0 {
            let down =
                neutral + kk.clone() * u.clone() * nu0.clone() + kk * pressure::<S>(&rates, k, n);
            out.push((k, k - 1, down));
        }
    }
    out
}

pub fn build_q_y_ftw(p: &ModelParams) -> Result<Ctmc> {
    BirthDeath::y(p).to_ctmc()
}

pub fn build_q_y_dom(p: &ModelParams) -> Result<Ctmc> {
    BirthDeath::y_dom(p).to_ctmc()
}

/// Coalescence and branching moves out of `n` lines, shared by `R` and `L`.
/// Targets are line counts, not indices.
fn lines_core<S: Scalar>(p: &ModelParams, rates: &Rates, n: usize) -> Result<Vec<(usize, S)>> {
    let big = p.n;
    let mut out = Vec::new();
    if n >= 2 {
        out.push((n - 1, ratio::<S>(n * (n - 1), big)));
    }
    let nn: S = from_int(n as u128);
    for (&m, &s) in rates {
        if s == 0.0 {
            continue;
        }
        let s: S = from_f64(s);
        let norm: S = num_traits::pow(from_int::<S>(big as u128), m as usize);
        let mut ff = S::one();
        for j in 1..=(m as usize).min(big - n) {
            ff = ff * from_int((big - n - j + 1) as u128);
            let c: S = from_int(branching_coeff(n as u64, m, j as u32)?);
            let r = s.clone() * nn.clone() * ff.clone() * c / norm.clone();
            out.push((n + j, r));
        }
    }
    Ok(out)
}

/// Off-diagonal rates of the killed line-counting process `R` on
/// `[N]_{0,Delta}`: index `n` for `n` lines, `N+1` for `Delta`.
pub fn rates_q_r<S: Scalar>(p: &ModelParams) -> Result<Vec<(usize, usize, S)>> {
    let rates = p.ftw_rates();
    let big = p.n;
    let delta = big + 1;
    let u: S = from_f64(p.u);
    let nu0: S = from_f64(p.nu0);
    let nu1: S = from_f64(p.nu1());
    let mut out = Vec::new();
    for n in 1..=big {
        for (to, r) in lines_core::<S>(p, &rates, n)? {
            out.push((n, to, r));
        }
        let nn: S = from_int(n as u128);
        out.push((n, n - 1, nn.clone() * u.clone() * nu1.clone()));
        out.push((n, delta, nn * u.clone() * nu0.clone()));
    }
    Ok(out)
}

pub fn build_q_r(p: &ModelParams) -> Result<Ctmc> {
    Ctmc::from_rates(counts_with_cemetery(p.n as u32), rates_q_r::<f64>(p)?)
}

/// Off-diagonal rates of the pruned lookdown line count `L` on `[N]`,
/// index `n - 1` for `n` lines.
pub fn rates_q_l<S: Scalar>(p: &ModelParams) -> Result<Vec<(usize, usize, S)>> {
    let rates = p.ftw_rates();
    let big = p.n;
    let u: S = from_f64(p.u);
    let ben = u.clone() * from_f64(p.nu0);
    let del = u * from_f64(p.nu1());
    let mut out = Vec::new();
    for n in 1..=big {
        for (to, r) in lines_core::<S>(p, &rates, n)? {
            out.push((n - 1, to - 1, r));
        }
        if n >= 2 {
            out.push((n - 1, n - 2, del.clone() * from_int((n - 1) as u128)));
            for j in 1..n {
                out.push((n - 1, j - 1, ben.clone()));
            }
        }
    }
    Ok(out)
}

pub fn build_q_l(p: &ModelParams) -> Result<Ctmc> {
    Ctmc::from_rates(counts(1, p.n as u32), rates_q_l::<f64>(p)?)
}

/// Off-diagonal rates of the auxiliary frequency process `Y~` on `[N]_0`.
pub fn rates_q_ytilde<S: Scalar>(p: &ModelParams) -> Vec<(usize, usize, S)> {
    let rates = p.ftw_rates();
    let big = p.n;
    let u: S = from_f64(p.u);
    let un0 = u.clone() * from_f64(p.nu0);
    let un1 = u * from_f64(p.nu1());
    let mut out = Vec::new();
    for k in 1..big {
        let kk: S = from_int(k as u128);
        let rest: S = from_int((big - k) as u128);
        let neutral = kk.clone() * rest.clone() / from_int(big as u128);
        out.push((k, k + 1, neutral.clone()));
        out.push((
            k,
            k - 1,
            neutral + kk.clone() * pressure::<S>(&rates, k, big),
        ));

        let gap: S = from_int((big - k + 1) as u128);
        out.push((
            k,
            k - 1,
            kk.clone() * un0.clone() * rest.clone() / gap.clone(),
        ));
        out.push((k, big, kk.clone() * un0.clone() / gap));
        let k1: S = from_int((k + 1) as u128);
        out.push((k, k + 1, rest.clone() * un1.clone() * kk / k1.clone()));
        out.push((k, 0, rest * un1.clone() / k1));
    }
    out
}

pub fn build_q_ytilde(p: &ModelParams) -> Result<Ctmc> {
    Ctmc::from_rates(counts(0, p.n as u32), rates_q_ytilde::<f64>(p))
}

/// Off-diagonal rates of the Siegmund dual on `[N+1]_0`.
pub fn rates_q_siegmund<S: Scalar>(p: &ModelParams) -> Vec<(usize, usize, S)> {
    let rates = p.ftw_rates();
    let big = p.n;
    let nf: S = from_int(big as u128);
    let u: S = from_f64(p.u);
    let un0 = u.clone() * from_f64(p.nu0);
    let un1 = u * from_f64(p.nu1());
    let mut out = Vec::new();
    for k in 1..=big {
        let kk: S = from_int(k as u128);
        let birth = kk
            * (from_int::<S>((big - k) as u128) / nf.clone()
                + un0.clone()
                + pressure::<S>(&rates, k, big));
        let death = from_int::<S>((big - k + 1) as u128)
            * (from_int::<S>((k - 1) as u128) / nf.clone() + un1.clone());
        out.push((k, k + 1, birth));
        out.push((k, k - 1, death));
    }
    out
}

pub fn build_q_siegmund(p: &ModelParams) -> Result<Ctmc> {
    Ctmc::from_rates(counts(0, p.n as u32 + 1), rates_q_siegmund::<f64>(p))
}

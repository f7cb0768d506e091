//! Ancestral type distributions `h_r(k)` and `h_inf(k)` by three routes
//! (line-counting law, three-term recursion, absorption of `Y~`) and the
//! stationary summaries over a mutation-rate scan.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ctmc::{absorption_probs, solve_tridiagonal, stationary, transient, Dist};
use crate::error::{Error, Result};
use crate::generators::{build_q_l, build_q_y_ftw, build_q_ytilde, StateLabel};
use crate::params::{ModelParams, Rates};

/// Largest `N` for the line-counting and `Y~` routes.
pub const ROUTE_CAP: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Route {
    LLaw,
    Recursion,
    Ytilde,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::LLaw => "L_LAW",
            Route::Recursion => "RECURSION",
            Route::Ytilde => "YTILDE",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AncestralResult {
    /// `h[k]` for `k = 0..=N`.
    pub h: Vec<f64>,
    pub route: Route,
    /// Time horizon; `None` for the stationary case.
    pub r: Option<f64>,
}

impl AncestralResult {
    pub fn max_diff(&self, other: &AncestralResult) -> f64 {
        self.h
            .iter()
            .zip(&other.h)
            .fold(0.0, |a, (x, y)| a.max((x - y).abs()))
    }

    pub fn is_monotone(&self) -> bool {
        self.h.windows(2).all(|w| w[1] >= w[0] - 1e-14)
    }

    /// CSV with header `k,h`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "k,h")?;
        for (k, v) in self.h.iter().enumerate() {
            writeln!(w, "{k},{v:.17e}")?;
        }
        Ok(())
    }
}

fn cap(p: &ModelParams) -> Result<()> {
    if p.n > ROUTE_CAP {
        return Err(Error::CapExceeded {
            n: p.n,
            cap: ROUTE_CAP,
        });
    }
    Ok(())
}

/// Clamps values within 1e-12 of `[0, 1]`; anything further out is an error.
pub(crate) fn clamp_unit(h: &mut [f64]) -> Result<()> {
    for (i, v) in h.iter_mut().enumerate() {
        if !(-1e-12..=1.0 + 1e-12).contains(v) {
            return Err(Error::OutOfUnitInterval {
                index: i,
                value: *v,
            });
        }
        *v = v.clamp(0.0, 1.0);
    }
    Ok(())
}

/// `sum_n law[n-1] k^(n)/N^(n)` for every `k`, where `law` is indexed by
/// `n - 1` over `n in [N]`.
fn factorial_expectation(law: &[f64], big: usize) -> Vec<f64> {
    (0..=big)
        .map(|k| {
            let mut ratio = 1.0;
            let mut acc = 0.0;
            for (i, &p) in law.iter().enumerate() {
                let n = i + 1;
                if n > k {
                    break;
                }
                ratio *= (k - i) as f64 / (big - i) as f64;
                acc += p * ratio;
            }
            acc
        })
        .collect()
}

/// `h_r(k) = E_1[k^(L_r)/N^(L_r)]`.
pub fn h_r_via_l(p: &ModelParams, r: f64, tol: f64) -> Result<AncestralResult> {
    cap(p)?;
    if !(r >= 0.0) {
        return Err(Error::InvalidParams(format!("time {r} must be >= 0")));
    }
    let l = build_q_l(p)?;
    let start = Dist::delta_at(&l, StateLabel::Count(1))?;
    let law = transient(&l, &start, r, tol)?;
    let mut h = factorial_expectation(&law.p, p.n);
    clamp_unit(&mut h)?;
    Ok(AncestralResult {
        h,
        route: Route::LLaw,
        r: Some(r),
    })
}

/// Stationary law of the pLD line count, indexed by `n - 1`.
pub fn stationary_l(p: &ModelParams) -> Result<Vec<f64>> {
    cap(p)?;
    Ok(stationary(&build_q_l(p)?)?.p)
}

pub fn h_inf_via_l(p: &ModelParams) -> Result<AncestralResult> {
    let law = stationary_l(p)?;
    let mut h = factorial_expectation(&law, p.n);
    clamp_unit(&mut h)?;
    Ok(AncestralResult {
        h,
        route: Route::LLaw,
        r: None,
    })
}

/// Bands of the three-term recursion for `k = 1..N-1`, written as
/// `-lo[k] h(k-1) + diag[k] h(k) - up[k] h(k+1) = rhs[k]`.
struct Recursion {
    lo: Vec<f64>,
    diag: Vec<f64>,
    up: Vec<f64>,
    rhs: Vec<f64>,
}

fn recursion(p: &ModelParams) -> Recursion {
    let big = p.n;
    let nf = big as f64;
    let (u0, u1) = (p.u * p.nu0, p.u * p.nu1());
    let mut rec = Recursion {
        lo: Vec::with_capacity(big - 1),
        diag: Vec::with_capacity(big - 1),
        up: Vec::with_capacity(big - 1),
        rhs: Vec::with_capacity(big - 1),
    };
    for k in 1..big {
        let kf = k as f64;
        let free = 1.0 - kf / nf;
        let s = p.selective_pressure(k);
        rec.diag.push(2.0 * free + (nf - kf) * u1 / kf + u0 + s);
        rec.up.push(free + (nf - kf) * u1 / (kf + 1.0));
        rec.lo.push(free + (nf - kf) * u0 / (nf - kf + 1.0) + s);
        rec.rhs.push(u0 / (nf - kf + 1.0));
    }
    rec
}

/// Solves the three-term difference equation with `h(0) = 0`, `h(N) = 1`.
pub fn h_inf_via_recursion(p: &ModelParams) -> Result<AncestralResult> {
    let big = p.n;
    let rec = recursion(p);
    let m = big - 1;
    let lower: Vec<f64> = rec.lo.iter().map(|v| -v).collect();
    let upper: Vec<f64> = rec.up.iter().map(|v| -v).collect();
    let mut rhs = rec.rhs.clone();
    if m > 0 {
        rhs[m - 1] += rec.up[m - 1];
    }
    let inner = solve_tridiagonal(&lower, &rec.diag, &upper, &rhs)?;
    let mut h = Vec::with_capacity(big + 1);
    h.push(0.0);
    h.extend(inner);
    h.push(1.0);
    clamp_unit(&mut h)?;
    Ok(AncestralResult {
        h,
        route: Route::Recursion,
        r: None,
    })
}

/// Infinity-norm residual of `h` plugged back into the recursion,
/// boundary rows included.
pub fn recursion_residual(p: &ModelParams, h: &[f64]) -> f64 {
    let big = p.n;
    let rec = recursion(p);
    let mut worst = h[0].abs().max((h[big] - 1.0).abs());
    for k in 1..big {
        let i = k - 1;
        let lhs = -rec.lo[i] * h[k - 1] + rec.diag[i] * h[k] - rec.up[i] * h[k + 1];
        worst = worst.max((lhs - rec.rhs[i]).abs());
    }
    worst
}

/// `P(Y~ is absorbed in N | Y~_0 = k)`.
pub fn h_inf_via_ytilde(p: &ModelParams) -> Result<AncestralResult> {
    cap(p)?;
    let yt = build_q_ytilde(p)?;
    let mut h = absorption_probs(&yt, StateLabel::Count(p.n as u32))?;
    clamp_unit(&mut h)?;
    Ok(AncestralResult {
        h,
        route: Route::Ytilde,
        r: None,
    })
}

/// Max over `k` of the gap between `1 - h_inf(k)` and
/// `((N-k)/N) sum_{n=0}^{N-1} P(L_inf > n) k^(n)/(N-1)^(n)`.
pub fn tail_representation_check(p: &ModelParams) -> Result<f64> {
    let big = p.n;
    let law = stationary_l(p)?;
    let h = factorial_expectation(&law, big);
    // P(L > n) = sum_{i >= n} law[i], law being indexed by n - 1
    let mut tail = law.clone();
    for n in (0..big.saturating_sub(1)).rev() {
        tail[n] += tail[n + 1];
    }
    let mut worst: f64 = 0.0;
    for k in 0..=big {
        let mut ratio = 1.0;
        let mut sum = 0.0;
        for (n, &t) in tail.iter().enumerate() {
            if n > 0 {
                if n > k {
                    break;
                }
                ratio *= (k - n + 1) as f64 / (big - n) as f64;
            }
            sum += t * ratio;
        }
        let rhs = (big - k) as f64 / big as f64 * sum;
        worst = worst.max((1.0 - h[k] - rhs).abs());
    }
    Ok(worst)
}

/// Stationary proportions of unfit individuals and of unfit ancestors.
pub fn fig7_point(p: &ModelParams) -> Result<(f64, f64)> {
    if !(p.u > 0.0) {
        return Err(Error::InvalidParams(
            "stationary summaries need u > 0".into(),
        ));
    }
    let pi = stationary(&build_q_y_ftw(p)?)?;
    let h = h_inf_via_recursion(p)?;
    let nf = p.n as f64;
    let mut unfit = 0.0;
    let mut ancestor = 0.0;
    for (k, &w) in pi.p.iter().enumerate() {
        unfit += w * k as f64 / nf;
        ancestor += w * h.h[k];
    }
    Ok((unfit, ancestor))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig7Config {
    pub label: String,
    /// FTW rates by order.
    pub rates: Rates,
}

/// Pure genic, pure order-3 and half/half mixture, all with effective
/// branching rate `b`.
pub fn fig7_configs(b: f64) -> Vec<Fig7Config> {
    vec![
        Fig7Config {
            label: "genic".into(),
            rates: [(1, b)].into(),
        },
        Fig7Config {
            label: "order3".into(),
            rates: [(3, b / 3.0)].into(),
        },
        Fig7Config {
            label: "mixture".into(),
            rates: [(1, b / 2.0), (3, b / 6.0)].into(),
        },
    ]
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig7Row {
    pub u_over_b: f64,
    pub mean_unfit: f64,
    pub mean_unfit_ancestor: f64,
    pub config_label: String,
}

/// Evaluates every config on the `u/b` grid; rows are ordered by config,
/// then by grid point.
pub fn fig7_scan(
    n: usize,
    nu0: f64,
    b: f64,
    grid: &[f64],
    configs: &[Fig7Config],
) -> Result<Vec<Fig7Row>> {
    let jobs: Vec<(&Fig7Config, f64)> = configs
        .iter()
        .flat_map(|c| grid.iter().map(move |&x| (c, x)))
        .collect();
    jobs.par_iter()
        .map(|&(c, x)| {
            let p = ModelParams::ftw(n, x * b, nu0, c.rates.clone())?;
            let (mean_unfit, mean_unfit_ancestor) = fig7_point(&p)?;
            Ok(Fig7Row {
                u_over_b: x,
                mean_unfit,
                mean_unfit_ancestor,
                config_label: c.label.clone(),
            })
        })
        .collect()
}

pub fn write_fig7_csv<W: Write>(rows: &[Fig7Row], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Linearly interpolated `u/b` at which `values` first reaches `level`.
pub fn crossing(grid: &[f64], values: &[f64], level: f64) -> Option<f64> {
    for i in 1..grid.len() {
        let (a, b) = (values[i - 1], values[i]);
        if (a - level) * (b - level) <= 0.0 && a != b {
            return Some(grid[i - 1] + (level - a) / (b - a) * (grid[i] - grid[i - 1]));
        }
    }
    None
}

/// Default tolerance used by the cross-route checks.
pub const ROUTE_TOL: f64 = 1e-10;

/// Max pairwise discrepancy between the three stationary routes.
pub fn three_route_discrepancy(p: &ModelParams) -> Result<(f64, f64, f64)> {
    let rec = h_inf_via_recursion(p)?;
    let l = h_inf_via_l(p)?;
    let yt = h_inf_via_ytilde(p)?;
    Ok((l.max_diff(&rec), rec.max_diff(&yt), l.max_diff(&yt)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, u: f64) -> ModelParams {
        ModelParams::ftw(n, u, 0.3, [(1, 0.4), (2, 0.2)]).unwrap()
    }

    #[test]
    fn h_at_time_zero_is_k_over_n() {
        let p = params(9, 0.5);
        let h = h_r_via_l(&p, 0.0, 1e-12).unwrap();
        for (k, v) in h.h.iter().enumerate() {
            assert!((v - k as f64 / 9.0).abs() < 1e-15);
        }
    }

    #[test]
    fn three_routes_agree() {
        for n in [2, 5, 30] {
            let p = params(n, 0.7);
            let (a, b, c) = three_route_discrepancy(&p).unwrap();
            assert!(a.max(b).max(c) <= 1e-10, "N={n}: {a} {b} {c}");
        }
    }

    #[test]
    fn boundaries_and_monotone() {
        let p = params(25, 0.2);
        for res in [
            h_inf_via_recursion(&p).unwrap(),
            h_inf_via_l(&p).unwrap(),
            h_inf_via_ytilde(&p).unwrap(),
        ] {
            assert_eq!(res.h[0], 0.0);
            assert!((res.h[25] - 1.0).abs() < 1e-12);
            assert!(res.is_monotone());
        }
    }

    #[test]
    fn no_mutation_is_fixation_probability() {
        let p = params(12, 0.0);
        let y = build_q_y_ftw(&p).unwrap();
        let fix = absorption_probs(&y, StateLabel::Count(12)).unwrap();
        for res in [h_inf_via_recursion(&p).unwrap(), h_inf_via_l(&p).unwrap()] {
            for k in 0..=12 {
                assert!((res.h[k] - fix[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn large_n_recursion_residual() {
        let p = ModelParams::ftw(10_000, 0.004, 0.005, [(1, 0.005)]).unwrap();
        let h = h_inf_via_recursion(&p).unwrap();
        assert!(recursion_residual(&p, &h.h) <= 1e-9);
        assert!(h.is_monotone());
    }

    #[test]
    fn tail_identity() {
        let p = params(20, 0.6);
        assert!(tail_representation_check(&p).unwrap() <= 1e-12);
    }

    #[test]
    fn crossing_interpolates() {
        assert_eq!(crossing(&[0.0, 1.0, 2.0], &[0.0, 0.4, 0.8], 0.6), Some(1.5));
        assert_eq!(crossing(&[0.0, 1.0], &[0.0, 0.4], 0.6), None);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(0.1, 10.0, 5);
        assert_eq!(g[0], 0.1);
        assert_eq!(g[4], 10.0);
        assert!((g[2] - 1.0).abs() < 1e-15);
    }
}

//! Diffusion-limit objects: truncated line-counting chains, the stationary
//! density of the Wright-Fisher diffusion with mutation and selection, and
//! finite-N convergence diagnostics.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::ctmc::{absorption_probs, stationary, transient, Dist};
use crate::dualities::{DualityReport, Residuals};
use crate::error::{Error, Result};
use crate::generators::{build_q_y_ftw, counts, counts_with_cemetery, Ctmc, StateLabel};
use crate::params::DiffusionParams;

pub const DEFAULT_N_MAX: usize = 200;
pub const N_MAX_CAP: usize = 3200;
/// Largest line count in the diffusion duality grid.
pub const DUALITY_GRID: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundaryPolicy {
    /// Upward jumps past `n_max` land on `n_max`.
    ReflectReport,
    /// Upward jumps past `n_max` go to the cemetery (or are dropped when
    /// the chain has none).
    AbsorbReport,
}

#[derive(Debug, Clone)]
pub struct TruncatedChain {
    pub chain: Ctmc,
    pub n_max: usize,
    pub policy: BoundaryPolicy,
    /// Observed change of the chain's headline quantity when `n_max` is
    /// doubled.
    pub leaked_mass_bound: f64,
}

fn check_n_max(dp: &DiffusionParams, n_max: usize) -> Result<()> {
    let need = dp.max_order() as usize + 2;
    if n_max < need {
        return Err(Error::Truncation(format!("n_max = {n_max} below {need}")));
    }
    if n_max > N_MAX_CAP {
        return Err(Error::CapExceeded {
            n: n_max,
            cap: N_MAX_CAP,
        });
    }
    Ok(())
}

/// Limit kASG line counter on `{0..n_max} u {Delta}`; Delta has index
/// `n_max + 1`.
pub fn rcal_chain(dp: &DiffusionParams, n_max: usize, policy: BoundaryPolicy) -> Result<Ctmc> {
    check_n_max(dp, n_max)?;
    let delta = n_max + 1;
    let (m0, m1) = (dp.theta * dp.nu0, dp.theta * dp.nu1());
    let mut rates = Vec::new();
    for n in 1..=n_max {
        let nf = n as f64;
        rates.push((n, n - 1, nf * (nf - 1.0) + nf * m1));
        rates.push((n, delta, nf * m0));
        for (&m, &s) in &dp.sigma {
            let to = n + m as usize;
            let dst = match (to > n_max, policy) {
                (false, _) => to,
                (true, BoundaryPolicy::ReflectReport) => n_max,
                (true, BoundaryPolicy::AbsorbReport) => delta,
            };
            if dst != n {
                rates.push((n, dst, nf * s));
            }
        }
    }
    rates.retain(|r| r.2 > 0.0);
    Ctmc::from_rates(counts_with_cemetery(n_max as u32), rates)
}

/// Limit pLD line counter on `{1..n_max}`, index `n - 1`.
pub fn lcal_chain(dp: &DiffusionParams, n_max: usize, policy: BoundaryPolicy) -> Result<Ctmc> {
    check_n_max(dp, n_max)?;
    let (m0, m1) = (dp.theta * dp.nu0, dp.theta * dp.nu1());
    let mut rates = Vec::new();
    for n in 1..=n_max {
        let nf = n as f64;
        let i = n - 1;
        if n > 1 {
            rates.push((i, i - 1, nf * (nf - 1.0) + (nf - 1.0) * m1));
            for j in 1..n {
                rates.push((i, j - 1, m0));
            }
        }
        for (&m, &s) in &dp.sigma {
            let to = n + m as usize;
            let dst = match (to > n_max, policy) {
                (false, _) => to,
                (true, BoundaryPolicy::ReflectReport) => n_max,
                (true, BoundaryPolicy::AbsorbReport) => continue,
            };
            if dst != n {
                rates.push((i, dst - 1, nf * s));
            }
        }
    }
    rates.retain(|r| r.2 > 0.0);
    Ctmc::from_rates(counts(1, n_max as u32), rates)
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `P(R absorbed at 0 | R_0 = n)` for `n = 0..=n_max`.
fn absorption_at_zero(chain: &Ctmc, n_max: usize) -> Result<Vec<f64>> {
    let mut h = absorption_probs(chain, StateLabel::Count(0))?;
    h.truncate(n_max + 1);
    Ok(h)
}

pub fn build_q_rcal(dp: &DiffusionParams, n_max: usize) -> Result<TruncatedChain> {
    let policy = BoundaryPolicy::ReflectReport;
    let chain = rcal_chain(dp, n_max, policy)?;
    let fine = rcal_chain(dp, 2 * n_max, policy)?;
    let grid = DUALITY_GRID.min(n_max);
    let a = absorption_at_zero(&chain, n_max)?;
    let b = absorption_at_zero(&fine, 2 * n_max)?;
    let leaked_mass_bound = max_gap(&a[..=grid], &b[..=grid]);
    Ok(TruncatedChain {
        chain,
        n_max,
        policy,
        leaked_mass_bound,
    })
}

pub fn build_q_lcal(dp: &DiffusionParams, n_max: usize) -> Result<TruncatedChain> {
    let policy = BoundaryPolicy::ReflectReport;
    let chain = lcal_chain(dp, n_max, policy)?;
    let fine = lcal_chain(dp, 2 * n_max, policy)?;
    let a = stationary(&chain)?.p;
    let mut b = stationary(&fine)?.p;
    let tail: f64 = b[n_max..].iter().sum();
    b.truncate(n_max);
    let leaked_mass_bound =
        0.5 * (a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() + tail);
    Ok(TruncatedChain {
        chain,
        n_max,
        policy,
        leaked_mass_bound,
    })
}

/// Normalising sum in the exponent of the stationary density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentForm {
    /// `sum_{k=1}^m y^k / k`
    Harmonic,
    /// `sum_{k=1}^m y^k / k!`
    Factorial,
}

/// Stationary density of the unfit proportion, up to its normalising
/// constant, with moments by quadrature.
#[derive(Debug, Clone)]
pub struct StationaryDensity {
    sigma: Vec<(u32, f64)>,
    a: f64,
    b: f64,
    form: ExponentForm,
    z: f64,
}

const QUAD_TOL: f64 = 1e-15;

/// Tanh-sinh on `[lo, hi]`, bisecting while the error estimate is large.
fn adaptive(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64, depth: u32) -> f64 {
    let out = quadrature::integrate(f, lo, hi, tol);
    if out.error_estimate <= tol || depth == 0 {
        return out.integral;
    }
    let mid = 0.5 * (lo + hi);
    adaptive(f, lo, mid, 0.5 * tol, depth - 1) + adaptive(f, mid, hi, 0.5 * tol, depth - 1)
}

impl StationaryDensity {
    pub fn new(dp: &DiffusionParams, form: ExponentForm) -> Result<Self> {
        dp.validate()?;
        let (a, b) = (dp.theta * dp.nu0, dp.theta * dp.nu1());
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::NonIntegrable(format!(
                "theta*nu0 = {a} and theta*nu1 = {b} must both be positive"
            )));
        }
        let mut d = Self {
            sigma: dp.sigma.iter().map(|(&m, &s)| (m, s)).collect(),
            a,
            b,
            form,
            z: 1.0,
        };
        d.z = d.integral(0);
        if !(d.z.is_finite() && d.z > 0.0) {
            return Err(Error::NonIntegrable(format!(
                "normalising constant {}",
                d.z
            )));
        }
        Ok(d)
    }

    fn exponent(&self, y: f64) -> f64 {
        let mut total = 0.0;
        for &(m, s) in &self.sigma {
            let mut pow = 1.0;
            let mut fact = 1.0;
            let mut acc = 0.0;
            for k in 1..=m {
                pow *= y;
                fact *= k as f64;
                acc += match self.form {
                    ExponentForm::Harmonic => pow / k as f64,
                    ExponentForm::Factorial => pow / fact,
                };
            }
            total += s * acc;
        }
        total
    }

    /// `int_0^1 y^n w(y) dy`, split at 1/2 with `y = z^(1/b)` on the left
    /// and `1 - y = z^(1/a)` on the right.
    fn integral(&self, n: u32) -> f64 {
        let (a, b) = (self.a, self.b);
        let left = |z: f64| {
            let y = z.powf(1.0 / b);
            y.powi(n as i32) * (-self.exponent(y)).exp() * (1.0 - y).powf(a - 1.0) / b
        };
        let right = |z: f64| {
            let y = 1.0 - z.powf(1.0 / a);
            y.powi(n as i32) * (-self.exponent(y)).exp() * y.powf(b - 1.0) / a
        };
        adaptive(&left, 0.0, 0.5f64.powf(b), QUAD_TOL, 12)
            + adaptive(&right, 0.0, 0.5f64.powf(a), QUAD_TOL, 12)
    }

    /// Unnormalised density `w(y)`.
    pub fn weight(&self, y: f64) -> f64 {
        (-self.exponent(y)).exp() * (1.0 - y).powf(self.a - 1.0) * y.powf(self.b - 1.0)
    }

    pub fn moment(&self, n: u32) -> f64 {
        if n == 0 {
            return 1.0;
        }
        self.integral(n) / self.z
    }
}

/// `E[Y_inf^n]` under the harmonic-exponent density.
pub fn pi_y_moments(dp: &DiffusionParams, n: u32) -> Result<f64> {
    Ok(StationaryDensity::new(dp, ExponentForm::Harmonic)?.moment(n))
}

/// `E[(Y_inf/N)^n]` for the rescaled Moran model, by the product formula.
pub fn moran_stationary_moments(
    dp: &DiffusionParams,
    big_n: usize,
    orders: &[u32],
) -> Result<Vec<f64>> {
    let p = dp.rescaled(big_n)?;
    let pi = stationary(&build_q_y_ftw(&p)?)?;
    Ok(orders
        .iter()
        .map(|&n| {
            pi.p.iter()
                .enumerate()
                .map(|(k, w)| w * (k as f64 / big_n as f64).powi(n as i32))
                .sum()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityRow {
    pub n: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Absorption at 0 of the truncated limit line counter against the
/// stationary moments, for `n = 0..=20` and `Delta`.
pub fn diffusion_duality_table(dp: &DiffusionParams, n_max: usize) -> Result<Vec<DualityRow>> {
    if !(dp.theta > 0.0) {
        return Err(Error::InvalidParams(
            "diffusion duality needs theta > 0".into(),
        ));
    }
    let chain = rcal_chain(dp, n_max, BoundaryPolicy::ReflectReport)?;
    let lhs = absorption_at_zero(&chain, n_max)?;
    let density = StationaryDensity::new(dp, ExponentForm::Harmonic)?;
    let grid = DUALITY_GRID.min(n_max);
    let rhs: Vec<f64> = (0..=grid as u32)
        .into_par_iter()
        .map(|n| density.moment(n))
        .collect();
    let mut rows: Vec<DualityRow> = (0..=grid)
        .map(|n| DualityRow {
            n: n.to_string(),
            lhs: lhs[n],
            rhs: rhs[n],
            residual: (lhs[n] - rhs[n]).abs(),
        })
        .collect();
    rows.push(DualityRow {
        n: StateLabel::Cemetery.to_string(),
        lhs: 0.0,
        rhs: 0.0,
        residual: 0.0,
    });
    Ok(rows)
}

pub fn check_diffusion_duality(dp: &DiffusionParams, n_max: usize) -> Result<DualityReport> {
    let rows = diffusion_duality_table(dp, n_max)?;
    let mut res = Residuals::default();
    for r in &rows {
        res.add(&r.n, "-", r.lhs, r.rhs);
    }
    Ok(res.report(
        "diffusion",
        n_max,
        serde_json::to_value(dp)?,
        None,
        format!("n in 0..={} and Delta", DUALITY_GRID.min(n_max)),
    ))
}

pub fn write_duality_csv<W: Write>(rows: &[DualityRow], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// `h_inf(y) = sum_n pi_L(n) y^n` for each grid point.
pub fn h_inf_diffusion(dp: &DiffusionParams, y_grid: &[f64], n_max: usize) -> Result<Vec<f64>> {
    if let Some(&y) = y_grid.iter().find(|y| !(0.0..=1.0).contains(*y)) {
        return Err(Error::InvalidParams(format!(
            "grid point {y} outside [0, 1]"
        )));
    }
    let chain = lcal_chain(dp, n_max, BoundaryPolicy::ReflectReport)?;
    let pi = stationary(&chain)?;
    Ok(y_grid
        .iter()
        .map(|&y| {
            pi.p.iter()
                .enumerate()
                .map(|(i, w)| w * y.powi(i as i32 + 1))
                .sum()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfConsistent {
    pub values: Vec<f64>,
    pub n_max: usize,
    pub leaked_mass_bound: f64,
}

/// Evaluates `f` at `n_max` and `2 n_max`, doubling until the two agree
/// within `tol`; fails past the hard cap.
pub fn self_consistent(
    n_max: usize,
    tol: f64,
    f: impl Fn(usize) -> Result<Vec<f64>>,
) -> Result<SelfConsistent> {
    let mut n = n_max;
    let mut coarse = f(n)?;
    loop {
        if 2 * n > N_MAX_CAP {
            return Err(Error::Truncation(format!(
                "no self-consistency within tolerance {tol} up to n_max = {N_MAX_CAP}"
            )));
        }
        let fine = f(2 * n)?;
        let gap = max_gap(&coarse, &fine);
        if gap <= tol {
            return Ok(SelfConsistent {
                values: fine,
                n_max: 2 * n,
                leaked_mass_bound: gap,
            });
        }
        coarse = fine;
        n *= 2;
    }
}

pub fn h_inf_diffusion_auto(
    dp: &DiffusionParams,
    y_grid: &[f64],
    tol: f64,
) -> Result<SelfConsistent> {
    self_consistent(DEFAULT_N_MAX, tol, |n| h_inf_diffusion(dp, y_grid, n))
}

pub fn write_h_inf_csv<W: Write>(grid: &[f64], values: &[f64], mut w: W) -> Result<()> {
    writeln!(w, "y,h_inf")?;
    for (y, h) in grid.iter().zip(values) {
        writeln!(w, "{y},{h:.17e}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    #[serde(rename = "N")]
    pub n: usize,
    /// Max over moment orders 1..=5 of the gap to the finest `N`.
    pub distance: f64,
}

/// Moments of order 1..=5 of `Y_{Nt}/N` from `Y_0 = round(y0 N)` for each
/// `N`, compared with the finest `N` in the list.
pub fn convergence_diagnostic(
    dp: &DiffusionParams,
    n_list: &[usize],
    t: f64,
    y0: f64,
    tol: f64,
) -> Result<Vec<ConvergenceRow>> {
    if n_list.windows(2).any(|w| w[1] < w[0]) || n_list.is_empty() {
        return Err(Error::InvalidParams(
            "N list must be non-empty and increasing".into(),
        ));
    }
    let moments: Vec<Vec<f64>> = n_list
        .par_iter()
        .map(|&n| {
            let p = dp.rescaled(n)?;
            let y = build_q_y_ftw(&p)?;
            let k0 = (y0 * n as f64).round() as u32;
            let law = transient(
                &y,
                &Dist::delta_at(&y, StateLabel::Count(k0))?,
                n as f64 * t,
                tol,
            )?;
            Ok((1..=5)
                .map(|j| {
                    law.p
                        .iter()
                        .enumerate()
                        .map(|(k, w)| w * (k as f64 / n as f64).powi(j))
                        .sum()
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let finest = moments.last().expect("non-empty");
    Ok(n_list
        .iter()
        .zip(&moments)
        .map(|(&n, m)| ConvergenceRow {
            n,
            distance: max_gap(m, finest),
        })
        .collect())
}

//! Fixation probability of a single fit individual under moderate
//! selection `s_m = sigma/N^alpha`, and the stationary kASG line count.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::ctmc::stationary_on_class;
use crate::error::{Error, Result};
use crate::generators::build_q_r;
use crate::params::ModelParams;

/// Largest `N` for the direct stationary route of `E[R_inf]`.
pub const DIRECT_CAP: usize = 100;

fn check(n: usize, sigma: f64, m: u32, alpha: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("N = {n} must be >= 2")));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParams(format!("sigma = {sigma} must be > 0")));
    }
    if m == 0 {
        return Err(Error::InvalidParams("order m must be >= 1".into()));
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidParams(format!(
            "alpha = {alpha} must be finite"
        )));
    }
    Ok(())
}

/// `q_k = (1 + s sum_{i<m} (k/N)^i)^{-1}`, the ratio of the up- and
/// down-rates of the unfit count at `k`.
fn q(k: usize, n: usize, s: f64, m: u32) -> f64 {
    let x = k as f64 / n as f64;
    let mut pow = 1.0;
    let mut geo = 0.0;
    for _ in 0..m {
        geo += pow;
        pow *= x;
    }
    1.0 / (1.0 + s * geo)
}

pub fn selection_strength(n: usize, sigma: f64, alpha: f64) -> f64 {
    sigma / (n as f64).powf(alpha)
}

/// `P(the fit type fixes | one fit individual)` with `u = 0`, as
/// `1/S` with `S = sum_l prod_{k=l}^{N-1} q_k` evaluated in Horner form,
/// `S <- 1 + q_l S` for `l = 1, ..., N-1`.
pub fn fixation_prob_exact(n: usize, sigma: f64, m: u32, alpha: f64) -> Result<f64> {
    check(n, sigma, m, alpha)?;
    let s = selection_strength(n, sigma, alpha);
    let mut acc = 1.0;
    for l in 1..n {
        acc = 1.0 + q(l, n, s, m) * acc;
    }
    Ok(1.0 / acc)
}

/// The same sum of products evaluated term by term.
pub fn fixation_prob_direct(n: usize, sigma: f64, m: u32, alpha: f64) -> Result<f64> {
    check(n, sigma, m, alpha)?;
    let s = selection_strength(n, sigma, alpha);
    let qs: Vec<f64> = (0..n).map(|k| q(k, n, s, m)).collect();
    let mut total = 0.0;
    for l in 1..=n {
        total += qs[l..n].iter().product::<f64>();
    }
    Ok(1.0 / total)
}

/// `m sigma / N^alpha`.
pub fn haldane_prediction(n: usize, sigma: f64, m: u32, alpha: f64) -> f64 {
    m as f64 * selection_strength(n, sigma, alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HaldaneRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub p_fix: f64,
    pub haldane_prediction: f64,
    pub ratio: f64,
}

pub fn haldane_scan(sigma: f64, m: u32, alpha: f64, n_list: &[usize]) -> Result<Vec<HaldaneRow>> {
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams(
            "N list must be strictly increasing".into(),
        ));
    }
    n_list
        .par_iter()
        .map(|&n| {
            let p_fix = fixation_prob_exact(n, sigma, m, alpha)?;
            let pred = haldane_prediction(n, sigma, m, alpha);
            Ok(HaldaneRow {
                n,
                p_fix,
                haldane_prediction: pred,
                ratio: p_fix / pred,
            })
        })
        .collect()
}

pub fn write_haldane_csv<W: Write>(rows: &[HaldaneRow], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// `E[R_inf] = N p_fix` with `u = 0`.
pub fn expected_r_inf(n: usize, sigma: f64, m: u32, alpha: f64) -> Result<f64> {
    Ok(n as f64 * fixation_prob_exact(n, sigma, m, alpha)?)
}

/// `sum_n n pi_R(n)` from the stationary law of the kASG line counter on
/// `[N]`, for `N <= 100`.
pub fn expected_r_inf_direct(n: usize, sigma: f64, m: u32, alpha: f64) -> Result<f64> {
    check(n, sigma, m, alpha)?;
    if n > DIRECT_CAP {
        return Err(Error::CapExceeded { n, cap: DIRECT_CAP });
    }
    let p = ModelParams::ftw(n, 0.0, 0.5, [(m, selection_strength(n, sigma, alpha))])?;
    let r = build_q_r(&p)?;
    let class: Vec<usize> = (1..=n).collect();
    let pi = stationary_on_class(&r, &class)?;
    Ok(pi.p.iter().enumerate().map(|(i, w)| i as f64 * w).sum())
}

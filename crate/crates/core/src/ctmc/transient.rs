use crate::error::{Error, Result};
use crate::generators::Ctmc;

use super::Dist;

pub const DEFAULT_TOL: f64 = 1e-12;

/// Poisson(`lt`) weights from log-weights, cut once the remaining tail is
/// below `tol / 2` and renormalised, so rounding in the log recurrence at
/// large `lt` cannot keep the accumulated mass short of `1 - tol`.
fn poisson_weights(lt: f64, tol: f64) -> Result<Vec<f64>> {
    let cap = (lt + 60.0 * lt.sqrt() + 1000.0) as usize;
    let log_lt = lt.ln();
    let mut log_w = -lt;
    let mut w = Vec::new();
    for n in 0..=cap {
        if n > 0 {
            log_w += log_lt - (n as f64).ln();
        }
        let x = log_w.exp();
        w.push(x);
        let ratio = lt / (n as f64 + 1.0);
        if ratio < 1.0 && x * ratio / (1.0 - ratio) < 0.5 * tol {
            let total: f64 = w.iter().sum();
            if !(total > 0.0) {
                break;
            }
            w.iter_mut().for_each(|v| *v /= total);
            return Ok(w);
        }
    }
    Err(Error::Numerical(format!(
        "uniformization did not reach mass 1 - {tol:e} by term {cap} (lt = {lt})"
    )))
}

fn check(t: f64, tol: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParams(format!("time t = {t} must be >= 0")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("tolerance {tol} must be > 0")));
    }
    Ok(())
}

fn uniformization_rate(chain: &Ctmc) -> f64 {
    (0..chain.len())
        .map(|i| chain.exit_rate(i))
        .fold(0.0, f64::max)
}

/// `p0 exp(Qt)` by uniformization at rate `max_i |Q_ii|`.
pub fn transient(chain: &Ctmc, p0: &Dist, t: f64, tol: f64) -> Result<Dist> {
    check(t, tol)?;
    if p0.p.len() != chain.len() {
        return Err(Error::Dimension(format!(
            "initial law of length {} on {} states",
            p0.p.len(),
            chain.len()
        )));
    }
    let lambda = uniformization_rate(chain);
    if lambda == 0.0 || t == 0.0 {
        return Dist::new(chain, p0.p.clone());
    }
    let mut v = p0.p.clone();
    let mut y = vec![0.0; v.len()];
    let mut acc = vec![0.0; v.len()];
    let mut first = true;
    for w in poisson_weights(lambda * t, tol)? {
        if !first {
            chain.q().left_mul_into(&v, &mut y);
            for (a, b) in v.iter_mut().zip(&y) {
                *a += b / lambda;
            }
        }
        first = false;
        if w > 0.0 {
            for (a, b) in acc.iter_mut().zip(&v) {
                *a += w * b;
            }
        }
    }
    Dist::new(chain, acc)?.clamp()
}

/// `x -> E_x[f(X_t)]` for every start state at once.
pub fn transient_observable(chain: &Ctmc, f: &[f64], t: f64, tol: f64) -> Result<Vec<f64>> {
    check(t, tol)?;
    if f.len() != chain.len() {
        return Err(Error::Dimension(format!(
            "observable of length {} on {} states",
            f.len(),
            chain.len()
        )));
    }
    let lambda = uniformization_rate(chain);
    if lambda == 0.0 || t == 0.0 {
        return Ok(f.to_vec());
    }
    let mut v = f.to_vec();
    let mut acc = vec![0.0; v.len()];
    let mut first = true;
    for w in poisson_weights(lambda * t, tol)? {
        if !first {
            let y = chain.q().right_mul(&v);
            for (a, b) in v.iter_mut().zip(&y) {
                *a += b / lambda;
            }
        }
        first = false;
        if w > 0.0 {
            for (a, b) in acc.iter_mut().zip(&v) {
                *a += w * b;
            }
        }
    }
    Ok(acc)
}

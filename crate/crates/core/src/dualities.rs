//! Duality functions and residual reports for every duality identity between
//! the frequency processes and the ancestral line-counting processes.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::ctmc::transient_observable;
use crate::error::{Error, Result};
use crate::generators::{
    build_q_descendant, build_q_l, build_q_r, build_q_siegmund, build_q_y_ftw, build_q_ytilde,
    build_t_exact, build_t_inv_exact, conjugate, rates_q_r, rates_q_siegmund, Ctmc, DenseMatrix,
    State, StateLabel, DEFAULT_DESCENDANT_CAP,
};
use crate::params::ModelParams;

/// Largest `N` for which conjugation is checked.
pub const CONJUGATION_CAP: usize = 25;

/// `k^(n)/N^(n)` as a running product, with `H_F(., 0) = 1` and
/// `H_F(., Delta) = 0`.
pub fn h_f(k: usize, n: StateLabel, big_n: usize) -> f64 {
    match n {
        StateLabel::Cemetery => 0.0,
        StateLabel::Count(n) => {
            let mut acc = 1.0;
            for i in 0..n as usize {
                if i >= k {
                    return 0.0;
                }
                acc *= (k - i) as f64 / (big_n - i) as f64;
            }
            acc
        }
    }
}

/// Siegmund duality function `1{x >= x*}`.
pub fn h_s(x: usize, x_star: usize) -> f64 {
    (x >= x_star) as u8 as f64
}

/// Moment duality function `y^n` with `y^Delta = 0`.
pub fn h_moment(y: f64, n: StateLabel) -> f64 {
    match n {
        StateLabel::Cemetery => 0.0,
        StateLabel::Count(n) => y.powi(n as i32),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualityReport {
    pub identity: String,
    pub n: usize,
    pub params: Value,
    pub t: Option<f64>,
    pub grid: String,
    pub max_abs_residual: f64,
    pub argmax: (String, String),
    pub mean_abs_residual: f64,
}

impl DualityReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_abs_residual <= tol
    }

    pub fn to_json(&self) -> Value {
        let coord = |s: &str| {
            s.parse::<u64>()
                .map(Value::from)
                .unwrap_or_else(|_| Value::from(s))
        };
        json!({
            "identity": self.identity,
            "N": self.n,
            "params": self.params,
            "t": self.t,
            "grid": self.grid,
            "max_abs_residual": self.max_abs_residual,
            "argmax": [coord(&self.argmax.0), coord(&self.argmax.1)],
            "mean_abs_residual": self.mean_abs_residual,
        })
    }
}

/// Running max/mean of absolute residuals over a grid.
#[derive(Debug, Default)]
pub(crate) struct Residuals {
    max: f64,
    argmax: (String, String),
    sum: f64,
    count: usize,
}

impl Residuals {
    pub(crate) fn add(&mut self, a: impl ToString, b: impl ToString, lhs: f64, rhs: f64) {
        let r = (lhs - rhs).abs();
        let r = if r.is_nan() { f64::INFINITY } else { r };
        if r > self.max || self.count == 0 {
            self.max = r;
            self.argmax = (a.to_string(), b.to_string());
        }
        self.sum += r;
        self.count += 1;
    }

    pub(crate) fn report(
        self,
        identity: &str,
        n: usize,
        params: Value,
        t: Option<f64>,
        grid: String,
    ) -> DualityReport {
        DualityReport {
            identity: identity.into(),
            n,
            params,
            t,
            grid,
            max_abs_residual: self.max,
            argmax: self.argmax,
            mean_abs_residual: if self.count == 0 {
                0.0
            } else {
                self.sum / self.count as f64
            },
        }
    }
}

fn label(chain: &Ctmc, i: usize) -> StateLabel {
    chain.label(i)
}

/// `E_k[f_col(X_t)]` for every column function, in parallel.
fn observables(chain: &Ctmc, cols: &[Vec<f64>], t: f64, tol: f64) -> Result<Vec<Vec<f64>>> {
    cols.par_iter()
        .map(|f| transient_observable(chain, f, t, tol))
        .collect()
}

/// `E[H_F(Y_t, n) | Y_0 = k]` against `E[H_F(k, R_t) | R_0 = n]` for all
/// `(k, n)` in `[N]_0 x [N]_{0,Delta}`.
pub fn check_factorial_duality(p: &ModelParams, t: f64, tol: f64) -> Result<DualityReport> {
    let big = p.n;
    let y = build_q_y_ftw(p)?;
    let r = build_q_r(p)?;
    let ns: Vec<StateLabel> = (0..r.len()).map(|i| label(&r, i)).collect();
    let lhs_cols: Vec<Vec<f64>> = ns
        .iter()
        .map(|&n| (0..=big).map(|k| h_f(k, n, big)).collect())
        .collect();
    let rhs_cols: Vec<Vec<f64>> = (0..=big)
        .map(|k| ns.iter().map(|&n| h_f(k, n, big)).collect())
        .collect();
    let lhs = observables(&y, &lhs_cols, t, tol)?;
    let rhs = observables(&r, &rhs_cols, t, tol)?;
    let mut res = Residuals::default();
    for k in 0..=big {
        for (ni, &n) in ns.iter().enumerate() {
            res.add(k, n, lhs[ni][k], rhs[k][ni]);
        }
    }
    Ok(res.report(
        "factorial",
        big,
        p.to_json(),
        Some(t),
        "k in [N]_0, n in [N]_{0,Delta}".into(),
    ))
}

/// `E[H_F(Y~_t, n) | Y~_0 = k]` against `E[H_F(k, L_t) | L_0 = n]` for all
/// `(k, n)` in `[N]_0 x [N]`.
pub fn check_ytilde_l_duality(p: &ModelParams, t: f64, tol: f64) -> Result<DualityReport> {
    let big = p.n;
    let yt = build_q_ytilde(p)?;
    let l = build_q_l(p)?;
    let ns: Vec<StateLabel> = (0..l.len()).map(|i| label(&l, i)).collect();
    let lhs_cols: Vec<Vec<f64>> = ns
        .iter()
        .map(|&n| (0..=big).map(|k| h_f(k, n, big)).collect())
        .collect();
    let rhs_cols: Vec<Vec<f64>> = (0..=big)
        .map(|k| ns.iter().map(|&n| h_f(k, n, big)).collect())
        .collect();
    let lhs = observables(&yt, &lhs_cols, t, tol)?;
    let rhs = observables(&l, &rhs_cols, t, tol)?;
    let mut res = Residuals::default();
    for k in 0..=big {
        for (ni, &n) in ns.iter().enumerate() {
            res.add(k, n, lhs[ni][k], rhs[k][ni]);
        }
    }
    Ok(res.report(
        "ytilde-L",
        big,
        p.to_json(),
        Some(t),
        "k in [N]_0, n in [N]".into(),
    ))
}

/// `P(Y_t >= x* | Y_0 = x)` against `P(x >= Y^S_t | Y^S_0 = x*)` on
/// `[N]_0 x [N+1]_0`.
pub fn check_siegmund_duality(p: &ModelParams, t: f64, tol: f64) -> Result<DualityReport> {
    let big = p.n;
    let y = build_q_y_ftw(p)?;
    let s = build_q_siegmund(p)?;
    let lhs_cols: Vec<Vec<f64>> = (0..=big + 1)
        .map(|xs| (0..=big).map(|x| h_s(x, xs)).collect())
        .collect();
    let rhs_cols: Vec<Vec<f64>> = (0..=big)
        .map(|x| (0..=big + 1).map(|xs| h_s(x, xs)).collect())
        .collect();
    let lhs = observables(&y, &lhs_cols, t, tol)?;
    let rhs = observables(&s, &rhs_cols, t, tol)?;
    let mut res = Residuals::default();
    for x in 0..=big {
        for xs in 0..=big + 1 {
            res.add(x, xs, lhs[xs][x], rhs[x][xs]);
        }
    }
    Ok(res.report(
        "siegmund",
        big,
        p.to_json(),
        Some(t),
        "x in [N]_0, x* in [N+1]_0".into(),
    ))
}

fn exact_gap(a: &DenseMatrix<BigRational>, b: &DenseMatrix<BigRational>, res: &mut Residuals) {
    let dim = a.rows();
    for i in 0..dim {
        for j in 0..dim {
            let d = (a[(i, j)].clone() - b[(i, j)].clone())
                .abs()
                .to_f64()
                .unwrap_or(f64::INFINITY);
            res.add(i, j, d, 0.0);
        }
    }
}

/// `T^{-1} Q_R T` against the Siegmund generator and `T Q_S T^{-1}`
/// against `Q_R`, entrywise in exact rational arithmetic (`Delta` is
/// index `N+1` in both spaces).
pub fn check_conjugation(p: &ModelParams) -> Result<DualityReport> {
    let big = p.n;
    if big > CONJUGATION_CAP {
        return Err(Error::CapExceeded {
            n: big,
            cap: CONJUGATION_CAP,
        });
    }
    let dim = big + 2;
    let q_r = DenseMatrix::generator(dim, rates_q_r::<BigRational>(p)?)?;
    let q_s = DenseMatrix::generator(dim, rates_q_siegmund::<BigRational>(p))?;
    let t = build_t_exact(big);
    let t_inv = build_t_inv_exact(big);
    let mut res = Residuals::default();
    exact_gap(&conjugate(&q_r, &t, &t_inv)?, &q_s, &mut res);
    exact_gap(&conjugate(&q_s, &t_inv, &t)?, &q_r, &mut res);
    Ok(res.report(
        "conjugation",
        big,
        p.to_json(),
        None,
        "all matrix entries, both directions".into(),
    ))
}

/// `E[D_t + B_t | (k, k, 0)]` against `E[Y~_t | Y~_0 = k]` for every `k`.
pub fn check_descendant_equality(p: &ModelParams, t: f64, tol: f64) -> Result<DualityReport> {
    let big = p.n;
    let desc = build_q_descendant(p, DEFAULT_DESCENDANT_CAP)?;
    let yt = build_q_ytilde(p)?;
    let f: Vec<f64> = desc
        .states()
        .iter()
        .map(|s| match s {
            State::Triple(x) => (x.d + x.b) as f64,
            State::Label(_) => unreachable!("descendant chain has triple states"),
        })
        .collect();
    let lhs = transient_observable(&desc, &f, t, tol)?;
    let g: Vec<f64> = (0..=big).map(|k| k as f64).collect();
    let rhs = transient_observable(&yt, &g, t, tol)?;
    let mut res = Residuals::default();
    for k in 0..=big as u32 {
        let i = desc
            .index_of(State::Triple(crate::generators::DescState {
                k,
                d: k,
                b: 0,
            }))
            .expect("state in Theta");
        res.add(k, "-", lhs[i], rhs[k as usize]);
    }
    Ok(res.report("descendant", big, p.to_json(), Some(t), "k in [N]_0".into()))
}

/// `h_t(k)` from the pLD line count against `E_k[Y~_t]/N`.
pub fn check_h_representation(p: &ModelParams, t: f64, tol: f64) -> Result<DualityReport> {
    let big = p.n;
    let via_l = crate::ancestral::h_r_via_l(p, t, tol)?;
    let yt = build_q_ytilde(p)?;
    let g: Vec<f64> = (0..=big).map(|k| k as f64 / big as f64).collect();
    let rhs = transient_observable(&yt, &g, t, tol)?;
    let mut res = Residuals::default();
    for k in 0..=big {
        res.add(k, "-", via_l.h[k], rhs[k]);
    }
    Ok(res.report(
        "h-representation",
        big,
        p.to_json(),
        Some(t),
        "k in [N]_0".into(),
    ))
}

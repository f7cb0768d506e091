use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::generators::{Ctmc, State};

use super::structure::{closed_classes, reaches, BirthDeathView};
use super::Dist;

/// Stationary law on the unique closed class.
pub fn stationary(chain: &Ctmc) -> Result<Dist> {
    let classes = closed_classes(chain);
    if classes.len() != 1 {
        return Err(Error::AmbiguousClosedClass(classes.len()));
    }
    stationary_on_class(chain, &classes[0])
}

/// Stationary law of the chain started inside `class`, which must be closed
/// and irreducible.
pub fn stationary_on_class(chain: &Ctmc, class: &[usize]) -> Result<Dist> {
    let mut p = vec![0.0; chain.len()];
    let local = match BirthDeathView::of_class(chain, class) {
        Some(view) => product_formula(&view.birth, &view.death)?,
        None => gth(chain, class)?,
    };
    for (&i, v) in class.iter().zip(local) {
        p[i] = v;
    }
    Dist::new(chain, p)
}

/// `max_j |(pi Q)_j|`.
pub fn stationary_residual(chain: &Ctmc, pi: &Dist) -> f64 {
    let mut y = vec![0.0; chain.len()];
    chain.q().left_mul_into(&pi.p, &mut y);
    y.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Detailed balance `pi_k ∝ prod_{j<=k} birth_{j-1}/death_j`, in logs.
fn product_formula(birth: &[f64], death: &[f64]) -> Result<Vec<f64>> {
    let n = birth.len();
    let mut logp = vec![0.0; n];
    for k in 1..n {
        if !(birth[k - 1] > 0.0 && death[k] > 0.0) {
            return Err(Error::Numerical(format!(
                "birth-death class not irreducible at offset {k}"
            )));
        }
        logp[k] = logp[k - 1] + birth[k - 1].ln() - death[k].ln();
    }
    let max = logp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logp.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / z).collect())
}

/// Grassmann-Taksar-Heyman elimination on the off-diagonal rates of an
/// irreducible class. Subtraction-free, so entries stay non-negative.
fn gth(chain: &Ctmc, class: &[usize]) -> Result<Vec<f64>> {
    let n = class.len();
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let mut pos = vec![usize::MAX; chain.len()];
    for (a, &i) in class.iter().enumerate() {
        pos[i] = a;
    }
    let mut a = vec![0.0; n * n];
    for (r, &i) in class.iter().enumerate() {
        for (j, rate) in chain.jumps(i) {
            let c = pos[j];
            if c == usize::MAX {
                return Err(Error::InvalidParams(format!(
                    "class is not closed at state {i}"
                )));
            }
            a[r * n + c] += rate;
        }
    }
    for k in (1..n).rev() {
        let s: f64 = a[k * n..k * n + k].iter().sum();
        if !(s > 0.0) {
            return Err(Error::Numerical("class is not irreducible".into()));
        }
        for i in 0..k {
            a[i * n + k] /= s;
        }
        for i in 0..k {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..k {
                a[i * n + j] += aik * a[k * n + j];
            }
        }
    }
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    for k in 1..n {
        pi[k] = (0..k).map(|i| pi[i] * a[i * n + k]).sum();
    }
    let z: f64 = pi.iter().sum();
    Ok(pi.into_iter().map(|x| x / z).collect())
}

/// Probability of eventual absorption in `target`, for every start state.
/// States with no path to `target` get 0, `target` itself gets 1.
pub fn absorption_probs(chain: &Ctmc, target: impl Into<State>) -> Result<Vec<f64>> {
    let target = target.into();
    let t = chain
        .index_of(target)
        .ok_or_else(|| Error::InvalidParams(format!("state {target} not in chain")))?;
    if !chain.is_absorbing(t) {
        return Err(Error::NotAbsorbing(target.to_string()));
    }
    let can = reaches(chain, t);
    let idx: Vec<usize> = (0..chain.len()).filter(|&i| can[i] && i != t).collect();
    let mut h = vec![0.0; chain.len()];
    h[t] = 1.0;
    if idx.is_empty() {
        return Ok(h);
    }
    let mut pos = vec![usize::MAX; chain.len()];
    for (a, &i) in idx.iter().enumerate() {
        pos[i] = a;
    }
    let m = idx.len();
    let rhs: Vec<f64> = idx.iter().map(|&i| chain.rate(i, t)).collect();

    let tridiagonal = idx.windows(2).all(|w| w[1] == w[0] + 1)
        && idx.iter().all(|&i| {
            chain
                .q()
                .row(i)
                .all(|(j, _)| j == t || pos[j] == usize::MAX || pos[j].abs_diff(pos[i]) <= 1)
        });
    let sol = if tridiagonal {
        // -Q_AA h = r_A
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        for (a, &i) in idx.iter().enumerate() {
            diag[a] = chain.exit_rate(i);
            if a > 0 {
                lower[a] = -chain.rate(i, idx[a - 1]);
            }
            if a + 1 < m {
                upper[a] = -chain.rate(i, idx[a + 1]);
            }
        }
        solve_tridiagonal(&lower, &diag, &upper, &rhs)?
    } else {
        let mut a = DMatrix::<f64>::zeros(m, m);
        for (r, &i) in idx.iter().enumerate() {
            for (j, v) in chain.q().row(i) {
                if pos[j] != usize::MAX {
                    a[(r, pos[j])] = -v;
                }
            }
        }
        let b = DVector::from_vec(rhs);
        let x = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::Numerical("singular absorption system".into()))?;
        x.iter().copied().collect()
    };
    for (a, &i) in idx.iter().enumerate() {
        let v = sol[a];
        if !(-1e-12..=1.0 + 1e-12).contains(&v) {
            return Err(Error::OutOfUnitInterval { index: i, value: v });
        }
        h[i] = v.clamp(0.0, 1.0);
    }
    Ok(h)
}

/// Thomas algorithm for `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`;
/// `lower[0]` and `upper[n-1]` are ignored.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(Error::Dimension(
            "tridiagonal system bands differ in length".into(),
        ));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(Error::Numerical("zero pivot in tridiagonal solve".into()));
    }
    c[0] = upper[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::Numerical("zero pivot in tridiagonal solve".into()));
        }
        c[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

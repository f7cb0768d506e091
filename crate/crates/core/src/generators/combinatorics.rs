//! Exact integer combinatorics behind the branching rates of the killed
//! ancestral graph.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Stirling number of the second kind via `S(l,j) = j S(l-1,j) + S(l-1,j-1)`.
/// Overflow is reported, never wrapped; see [`stirling2_big`] for the
/// arbitrary-precision version.
pub fn stirling2(l: u32, j: u32) -> Result<u128> {
    if j > l {
        return Ok(0);
    }
    // row of the triangle, s[i] = S(row, i)
    let mut s = vec![0u128; j as usize + 1];
    s[0] = 1;
    for row in 1..=l {
        let top = row.min(j) as usize;
        for i in (1..=top).rev() {
            let v = (i as u128)
                .checked_mul(s[i])
                .and_then(|x| x.checked_add(s[i - 1]))
                .ok_or(Error::Overflow("stirling2"))?;
            s[i] = v;
        }
        s[0] = 0;
    }
    Ok(s[j as usize])
}

pub fn stirling2_big(l: u32, j: u32) -> BigUint {
    if j > l {
        return BigUint::zero();
    }
    let mut s = vec![BigUint::zero(); j as usize + 1];
    s[0] = BigUint::one();
    for row in 1..=l {
        let top = row.min(j) as usize;
        for i in (1..=top).rev() {
            s[i] = &s[i] * BigUint::from(i) + &s[i - 1];
        }
        s[0] = BigUint::zero();
    }
    s[j as usize].clone()
}

pub(crate) fn binom(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or(Error::Overflow("binomial"))?
            / (i as u128 + 1);
    }
    Ok(acc)
}

pub(crate) fn binom_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `x (x-1) ... (x-j+1)`, zero once a factor hits zero.
pub fn falling_factorial(x: u64, j: u64) -> Result<u128> {
    let mut acc: u128 = 1;
    for i in 0..j {
        if i >= x {
            return Ok(0);
        }
        acc = acc
            .checked_mul((x - i) as u128)
            .ok_or(Error::Overflow("falling factorial"))?;
    }
    Ok(acc)
}

fn falling_factorial_big(x: u64, j: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..j {
        if i >= x {
            return BigUint::zero();
        }
        acc *= BigUint::from(x - i);
    }
    acc
}

/// `C^n_{mj} = sum_{l=j}^m binom(m,l) S(l,j) n^(m-l)`: number of ways an
/// ordered `m`-tuple of sites, `n` of them already in the graph, brings in
/// exactly `j` specific new sites (up to the falling factorial of choices).
pub fn branching_coeff(n: u64, m: u32, j: u32) -> Result<u128> {
    if j == 0 || j > m {
        return Err(Error::InvalidParams(format!(
            "branching coefficient needs 1 <= j <= m, got j={j}, m={m}"
        )));
    }
    let mut total: u128 = 0;
    for l in j..=m {
        let b = binom(m as u64, l as u64)?;
        let s = stirling2(l, j)?;
        let p = (n as u128)
            .checked_pow(m - l)
            .ok_or(Error::Overflow("branching coefficient"))?;
        let term = b
            .checked_mul(s)
            .and_then(|x| x.checked_mul(p))
            .ok_or(Error::Overflow("branching coefficient"))?;
        total = total
            .checked_add(term)
            .ok_or(Error::Overflow("branching coefficient"))?;
    }
    Ok(total)
}

pub fn branching_coeff_big(n: u64, m: u32, j: u32) -> BigUint {
    (j..=m)
        .map(|l| binom_big(m as u64, l as u64) * stirling2_big(l, j) * BigUint::from(n).pow(m - l))
        .sum()
}

/// `sum_{j=1}^m C^n_{mj} (N-n)^(j falling) == N^m - n^m`, checked exactly.
pub fn branching_identity_holds(n: u64, big_n: u64, m: u32) -> bool {
    let lhs: BigUint = (1..=m)
        .map(|j| branching_coeff_big(n, m, j) * falling_factorial_big(big_n - n, j as u64))
        .sum();
    let rhs = BigUint::from(big_n).pow(m) - BigUint::from(n).pow(m);
    lhs == rhs
}

fn ratio_ff(k: u64, big_n: u64, j: u64) -> BigRational {
    BigRational::new(
        BigInt::from(falling_factorial_big(k, j)),
        BigInt::from(falling_factorial_big(big_n, j)),
    )
}

/// Auxiliary binomial identity
/// `sum_{j=1}^{n-1} k^(j)/N^(j) = k/(N-k+1) - (N-n+1)/(N-k+1) k^(n)/N^(n)`
/// in exact rational arithmetic.
pub fn aux_identity_holds(n: u64, k: u64, big_n: u64) -> bool {
    let lhs: BigRational = (1..n)
        .map(|j| ratio_ff(k, big_n, j))
        .fold(BigRational::zero(), |a, b| a + b);
    let d = BigInt::from(big_n - k + 1);
    let rhs = BigRational::new(BigInt::from(k), d.clone())
        - BigRational::new(BigInt::from(big_n - n + 1), d) * ratio_ff(k, big_n, n);
    lhs == rhs
}

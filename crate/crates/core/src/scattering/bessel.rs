//! Bessel functions of integer order for real arguments.
//!
//! `J_n` comes from Miller's backward recurrence normalized with
//! `J₀ + 2ΣJ_{2k} = 1`. `Y₀` and `Y₁` follow from their Neumann series in the
//! same `J` values and higher orders from the (stable) forward recurrence.
//! Target accuracy is `1e-10` absolute for `n ≤ 50`, `0 < x ≤ 200`; for the
//! very large `|Y_n|` at small `x` the bound holds relative to the value.

use std::f64::consts::FRAC_2_PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const RESCALE_ABOVE: f64 = 1e250;

fn check_argument(x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!(
            "Bessel argument must be finite and >= 0, got {x}"
        )));
    }
    Ok(())
}

/// Starting index of the backward recurrence (even).
fn miller_start(nmax: usize, x: f64) -> usize {
    let top = (nmax as f64).max(x);
    let m = top + 30.0 + (50.0 * top).sqrt();
    2 * ((m as usize).div_ceil(2))
}

/// `J_0(x), …, J_{nmax}(x)`.
pub fn bessel_j_orders(nmax: usize, x: f64) -> Result<Vec<f64>> {
    check_argument(x)?;
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    let m = miller_start(nmax, x);
    // high orders are only needed for the normalization sum
    let mut next = 0.0; // f_{k+1}
    let mut cur = 1e-300; // f_k, k = m
    let mut norm = 0.0;
    let mut k = m;
    loop {
        if k <= nmax {
            out[k] = cur;
        }
        if k % 2 == 0 {
            norm += if k == 0 { cur } else { 2.0 * cur };
        }
        if k == 0 {
            break;
        }
        let prev = (2.0 * k as f64 / x) * cur - next;
        next = cur;
        cur = prev;
        k -= 1;
        if cur.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            cur *= s;
            next *= s;
            norm *= s;
            for v in out.iter_mut().skip(k + 1) {
                *v *= s;
            }
        }
    }
    for v in &mut out {
        *v /= norm;
    }
    Ok(out)
}

/// `Y_0(x), …, Y_{nmax}(x)` for `x > 0`.
pub fn bessel_y_orders(nmax: usize, x: f64) -> Result<Vec<f64>> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "Y_n requires a finite argument > 0, got {x}"
        )));
    }
    let m = miller_start(1, x);
    let j = bessel_j_orders(m, x)?;
    let log_term = (x / 2.0).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k + 1 <= m {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k as f64;
        k += 1;
    }
    let y0 = FRAC_2_PI * log_term * j[0] - 2.0 * FRAC_2_PI * s0;
    let y1 = FRAC_2_PI * log_term * j[1] - FRAC_2_PI * j[0] / x + FRAC_2_PI * s1;
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(y0);
    if nmax >= 1 {
        out.push(y1);
    }
    for n in 1..nmax {
        let y = (2.0 * n as f64 / x) * out[n] - out[n - 1];
        out.push(y);
    }
    Ok(out)
}

/// `(J_n(x), Y_n(x))`; fails for `x ≤ 0` because `Y_n` is singular there.
pub fn bessel_jy(order: usize, x: f64) -> Result<(f64, f64)> {
    let y = bessel_y_orders(order, x)?;
    let j = bessel_j_orders(order, x)?;
    Ok((j[order], y[order]))
}

pub fn bessel_j(order: usize, x: f64) -> Result<f64> {
    Ok(bessel_j_orders(order, x)?[order])
}

/// `H⁽¹⁾_n = J_n + iY_n` for `n = 0, …, nmax`.
pub fn hankel1_orders(nmax: usize, x: f64) -> Result<Vec<Complex64>> {
    let y = bessel_y_orders(nmax, x)?;
    let j = bessel_j_orders(nmax, x)?;
    Ok(j.into_iter()
        .zip(y)
        .map(|(j, y)| Complex64::new(j, y))
        .collect())
}

/// Derivatives `Z_n'(x) = Z_{n-1}(x) − (n/x)Z_n(x)` (with `Z_{-1} = −Z_1`)
/// for any cylinder function sequence `z = Z_0, …, Z_{nmax+1}`.
pub fn derivatives<T>(z: &[T], x: f64) -> Vec<T>
where
    T: Copy
        + std::ops::Sub<Output = T>
        + std::ops::Mul<f64, Output = T>
        + std::ops::Neg<Output = T>,
{
    let nmax = z.len() - 2;
    (0..=nmax)
        .map(|n| {
            if n == 0 {
                -z[1]
            } else {
                z[n - 1] - z[n] * (n as f64 / x)
            }
        })
        .collect()
}

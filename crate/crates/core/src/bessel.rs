//! Bessel functions of the first kind, orders 0 and 1.
//!
//! Below [`ASYMPTOTIC_THRESHOLD`] the values come from Miller's backward
//! recurrence normalised with `J0 + 2 Σ J2k = 1`; above it from the Hankel
//! asymptotic expansion, whose smallest term there is below 1e-20.

use crate::{Error, Result};

const ASYMPTOTIC_THRESHOLD: f64 = 25.0;

/// Order of the Bessel function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Zero,
    One,
}

impl TryFrom<u32> for Order {
    type Error = Error;

    fn try_from(order: u32) -> Result<Self> {
        match order {
            0 => Ok(Order::Zero),
            1 => Ok(Order::One),
            n => Err(Error::Domain(format!("Bessel order {n} not supported (0 or 1)"))),
        }
    }
}

/// `J_order(x)`. Errors on non-finite `x`.
pub fn bessel_j(order: Order, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("Bessel argument must be finite, got {x}")));
    }
    Ok(match order {
        Order::Zero => j0(x),
        Order::One => j1(x),
    })
}

/// `J0(x)` for finite `x`.
pub fn j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < ASYMPTOTIC_THRESHOLD {
        miller(ax).0
    } else {
        hankel(0.0, ax)
    }
}

/// `J1(x)` for finite `x`.
pub fn j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < ASYMPTOTIC_THRESHOLD { miller(ax).1 } else { hankel(1.0, ax) };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Both `(J0(x), J1(x))` for `0 <= x < 25` by backward recurrence.
fn miller(x: f64) -> (f64, f64) {
    if x < 1e-8 {
        // Leading series terms are exact to double precision here.
        return (1.0 - 0.25 * x * x, 0.5 * x);
    }
    let mut start = (x + 15.0 * x.cbrt() + 20.0).ceil() as usize;
    start += start % 2;

    let two_over_x = 2.0 / x;
    let mut above = 0.0_f64; // J_{k+1}
    let mut current = 1e-30_f64; // J_k
    let mut norm = 0.0_f64;
    let mut j1_unscaled = 0.0_f64;

    for k in (1..=start).rev() {
        let below = k as f64 * two_over_x * current - above;
        above = current;
        current = below;
        // `current` now holds J_{k-1}.
        if k - 1 == 1 {
            j1_unscaled = current;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * current;
        }
        if current.abs() > 1e250 {
            current *= 1e-250;
            above *= 1e-250;
            norm *= 1e-250;
            j1_unscaled *= 1e-250;
        }
    }
    norm += current;
    (current / norm, j1_unscaled / norm)
}

/// Hankel asymptotic expansion of `J_nu(x)` for large positive `x`.
fn hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        // Terms alternate between Q (odd k) and P (even k) with sign (-1)^floor(k/2).
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * std::f64::consts::PI;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

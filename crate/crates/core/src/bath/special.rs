//! Exponential integral and Gamma function on the real line.

use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this `|x|` the exponential integral uses its power series, above it
/// the continued fraction of `E1` (or the asymptotic series for `Ei(x > 0)`).
const SERIES_SWITCH: f64 = 1.0;
const ASYMPTOTIC_SWITCH: f64 = 40.0;

/// `Ei(x) = -PV ∫_{-x}^∞ e^{-t}/t dt`.
pub fn exp_integral_ei(x: f64) -> Result<f64> {
    if x == 0.0 || x.is_nan() {
        return Err(Error::Domain {
            function: "Ei",
            value: x,
            reason: "logarithmic singularity at 0",
        });
    }
    if x < 0.0 {
        let z = -x;
        if z <= SERIES_SWITCH {
            return Ok(-e1_series(z));
        }
        return Ok(-(-z).exp() * e1_continued_fraction(z));
    }
    if x <= ASYMPTOTIC_SWITCH {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..200 {
            let kf = k as f64;
            term *= x / kf;
            let add = term / kf;
            sum += add;
            if add.abs() < f64::EPSILON * sum.abs() {
                break;
            }
        }
        Ok(EULER_GAMMA + x.ln() + sum)
    } else {
        // e^x/x Σ k!/x^k, stopped at the smallest term.
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            let next = term * k as f64 / x;
            if next >= term || next < f64::EPSILON * sum {
                break;
            }
            term = next;
            sum += term;
        }
        Ok(x.exp() / x * sum)
    }
}

/// `e^z E1(z)` for `z > 0`; finite for arbitrarily large `z`, where `Ei(-z)`
/// itself underflows.
pub fn exp_scaled_e1(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain {
            function: "exp_scaled_e1",
            value: z,
            reason: "requires z > 0",
        });
    }
    if z <= SERIES_SWITCH {
        Ok(z.exp() * e1_series(z))
    } else {
        Ok(e1_continued_fraction(z))
    }
}

/// `E1(z) = -γ - ln z - Σ_{k≥1} (-z)^k / (k k!)`, for `0 < z <= 1`.
fn e1_series(z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..100 {
        let kf = k as f64;
        term *= -z / kf;
        let add = term / kf;
        sum += add;
        if add.abs() < 0.1 * f64::EPSILON * sum.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    -EULER_GAMMA - z.ln() - sum
}

/// `e^z E1(z)` from the continued fraction, modified Lentz evaluation.
fn e1_continued_fraction(z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = z + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 0.5 * f64::EPSILON {
            break;
        }
    }
    h
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for positive arguments (Lanczos, with reflection below 1/2).
pub fn gamma_fn(s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain {
            function: "Gamma",
            value: s,
            reason: "requires s > 0",
        });
    }
    Ok(gamma_positive(s))
}

fn gamma_positive(s: f64) -> f64 {
    use std::f64::consts::PI;
    if s < 0.5 {
        return PI / ((PI * s).sin() * gamma_positive(1.0 - s));
    }
    if s == s.floor() && s <= 23.0 {
        // exact factorials
        return (1..s as u64).map(|k| k as f64).product();
    }
    let x = s - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    // t^(x+1/2) split in two to delay overflow
    let half = t.powf(0.5 * (x + 0.5));
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * a
}

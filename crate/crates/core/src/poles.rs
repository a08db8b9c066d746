//! Localized mode below the bath continuum.
//!
//! A dissipationless oscillation survives when
//!
//! ```text
//! F(ω') = ω' - ω0 (ω'² + ω0² - δω²)/(ω'² + ω0² + δω²)
//!            - Σ(ω') (ω'² + ω0²)/(ω'² + ω0² + δω²)
//! ```
//!
//! has a root at negative `ω'`. Since `Σ(0⁻) = -2 α ω_c Γ(s)`, the root
//! appears at `α_c = (ω0² - δω²) / (2 ω_c ω0 Γ(s))`.

use rayon::prelude::*;

use crate::bath::gamma_fn;
use crate::model::ModelParams;
use crate::{Error, Result};

pub const SCAN_POINTS: usize = 200;
pub const F_TOL: f64 = 1e-12;
/// Closest approach of the scan grid to zero, in units of `ω0`.
pub const SCAN_NEAR_ZERO: f64 = 1e-9;
/// Far end of the scan grid, in units of `ω_c`.
pub const SCAN_FAR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleResult {
    pub omega_prime: Option<f64>,
    pub alpha_c: f64,
    pub localized: bool,
}

pub fn critical_coupling(p: &ModelParams) -> f64 {
    let (w0, dw) = (p.omega0(), p.delta_omega());
    let gamma = gamma_fn(p.s()).expect("s > 0");
    (w0 * w0 - dw * dw) / (2.0 * p.omega_c() * w0 * gamma)
}

/// The pole condition `F(ω')` for `ω' < 0`.
pub fn pole_function(p: &ModelParams, omega_p: f64) -> Result<f64> {
    let (w0, dw) = (p.omega0(), p.delta_omega());
    let sigma = p.spectral_density().self_energy(omega_p)?;
    let w2 = omega_p * omega_p;
    let d = w2 + w0 * w0 + dw * dw;
    Ok(omega_p - w0 * (w2 + w0 * w0 - dw * dw) / d - sigma * (w2 + w0 * w0) / d)
}

/// Scans `F` on a log grid over `[-10 ω_c, -1e-9 ω0]` and bisects the first
/// sign change found from the far end.
pub fn find_pole(p: &ModelParams) -> Result<PoleResult> {
    let alpha_c = critical_coupling(p);
    let lo = (SCAN_FAR * p.omega_c()).ln();
    let hi = (SCAN_NEAR_ZERO * p.omega0()).ln();
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| -(lo + (hi - lo) * i as f64 / (SCAN_POINTS - 1) as f64).exp())
        .collect();
    let mut prev = (grid[0], pole_function(p, grid[0])?);
    for &w in &grid[1..] {
        let f = pole_function(p, w)?;
        if f == 0.0 {
            return Ok(found(w, alpha_c));
        }
        if prev.1.signum() != f.signum() {
            return Ok(found(bisect(p, prev, (w, f))?, alpha_c));
        }
        prev = (w, f);
    }
    Ok(PoleResult {
        omega_prime: None,
        alpha_c,
        localized: false,
    })
}

fn found(w: f64, alpha_c: f64) -> PoleResult {
    PoleResult {
        omega_prime: Some(w),
        alpha_c,
        localized: true,
    }
}

fn bisect(p: &ModelParams, mut a: (f64, f64), mut b: (f64, f64)) -> Result<f64> {
    let tol = F_TOL * p.omega0();
    for _ in 0..200 {
        let mid = 0.5 * (a.0 + b.0);
        if mid == a.0 || mid == b.0 {
            break;
        }
        let f = pole_function(p, mid)?;
        if f.abs() <= tol {
            return Ok(mid);
        }
        if f.signum() == a.1.signum() {
            a = (mid, f);
        } else {
            b = (mid, f);
        }
    }
    Ok(if a.1.abs() < b.1.abs() { a.0 } else { b.0 })
}

/// Coupling at which [`find_pole`] starts reporting a pole, bisected on
/// `[lo, hi]` to width `tol`.
pub fn pole_onset(p: &ModelParams, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let has_pole = |a: f64| -> Result<bool> { Ok(find_pole(&p.with_alpha(a)?)?.localized) };
    let (at_lo, at_hi) = (has_pole(lo)?, has_pole(hi)?);
    if at_lo == at_hi {
        return Err(Error::NoBracket {
            lo,
            hi,
            verdict: at_lo,
        });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if has_pole(mid)? == at_hi {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub alphas: Vec<f64>,
    /// Detunings in units of `ω0`, each in `[0, 1)`.
    pub deltas: Vec<f64>,
    pub omega_c: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagram {
    pub alphas: Vec<f64>,
    pub deltas: Vec<f64>,
    /// `ω'/ω0` per cell, detuning-major; NaN where there is no pole.
    pub omega_prime: Vec<f64>,
    /// `(δω, α_c)` for every detuning.
    pub boundary: Vec<(f64, f64)>,
}

impl PhaseDiagram {
    pub fn cell(&self, i_delta: usize, i_alpha: usize) -> f64 {
        self.omega_prime[i_delta * self.alphas.len() + i_alpha]
    }
}

pub fn phase_diagram(grid: &PhaseGrid, workers: Option<usize>) -> Result<PhaseDiagram> {
    if grid.alphas.is_empty() || grid.deltas.is_empty() {
        return Err(Error::invalid(
            "grid",
            "alpha and delta_omega grids must be non-empty",
        ));
    }
    let cells: Vec<(f64, f64)> = grid
        .deltas
        .iter()
        .flat_map(|&d| grid.alphas.iter().map(move |&a| (d, a)))
        .collect();
    let solve = || -> Result<Vec<f64>> {
        cells
            .par_iter()
            .map(|&(d, a)| {
                let p = ModelParams::from_detuning(1.0, d, a, grid.omega_c, grid.s)?;
                Ok(find_pole(&p)?.omega_prime.unwrap_or(f64::NAN))
            })
            .collect()
    };
    let omega_prime = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(solve)?,
        None => solve()?,
    };
    let boundary = grid
        .deltas
        .iter()
        .map(|&d| {
            let p = ModelParams::from_detuning(1.0, d, 0.0, grid.omega_c, grid.s)?;
            Ok((d, critical_coupling(&p)))
        })
        .collect::<Result<_>>()?;
    Ok(PhaseDiagram {
        alphas: grid.alphas.clone(),
        deltas: grid.deltas.clone(),
        omega_prime,
        boundary,
    })
}

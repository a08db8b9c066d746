//! Spectral analysis of observable series, frequency locking and locking
//! boundaries.
//!
//! Dominant frequencies are the largest interior peak of the plain
//! (rectangular window) DFT magnitude, refined by a parabola through the
//! log-magnitudes of the peak bin and its neighbours. Two series count as
//! locked when their refined peaks differ by at most a tenth of a bin.

use std::f64::consts::TAU;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::coeffs::{default_step, solve_coeffs, CoeffTrajectory};
use crate::fockspace::{coherent_state, FockBasis};
use crate::master::{build_generator, evolve, Evolution, EvolveOptions, DEFAULT_D_MIN};
use crate::model::{InitialState, ModelParams};
use crate::{Error, Result, C64};

pub const MIN_SERIES_LEN: usize = 64;
/// Refined resolution as a fraction of the DFT bin width.
pub const REFINEMENT_GAIN: f64 = 0.1;
pub const BISECTION_WIDTH: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Angular frequency.
    pub freq: f64,
    pub amplitude: f64,
}

fn magnitudes(series: &[f64]) -> Result<Vec<f64>> {
    if series.len() < MIN_SERIES_LEN {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            min: MIN_SERIES_LEN,
        });
    }
    let n = series.len();
    let mut buf: Vec<C64> = series.iter().map(|&x| C64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    Ok(buf[..=n / 2].iter().map(|z| z.norm()).collect())
}

fn refine(mag: &[f64], k: usize, n: usize, dt: f64) -> Peak {
    let (a, b, c) = (mag[k - 1].ln(), mag[k].ln(), mag[k + 1].ln());
    let denom = a - 2.0 * b + c;
    let delta = if denom < 0.0 {
        (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    let log_peak = b - 0.25 * (a - c) * delta;
    Peak {
        freq: (k as f64 + delta) * TAU / (n as f64 * dt),
        amplitude: 2.0 * log_peak.exp() / n as f64,
    }
}

/// Largest positive-frequency DFT peak of `series` sampled every `dt`.
pub fn dominant_frequency(series: &[f64], dt: f64) -> Result<Peak> {
    let mag = magnitudes(series)?;
    let last = mag.len() - 1;
    let (k, _) = mag
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .expect("non-empty spectrum");
    if k == 0 || k == last {
        return Err(Error::NoPeak {
            bin: k,
            bins: mag.len(),
        });
    }
    // a zero neighbour (exactly periodic input) makes the log parabola undefined
    if mag[k - 1] == 0.0 || mag[k + 1] == 0.0 {
        return Ok(Peak {
            freq: k as f64 * TAU / (series.len() as f64 * dt),
            amplitude: 2.0 * mag[k] / series.len() as f64,
        });
    }
    Ok(refine(&mag, k, series.len(), dt))
}

/// The `count` largest interior local maxima of the DFT magnitude, refined,
/// in decreasing order of amplitude.
pub fn spectral_peaks(series: &[f64], dt: f64, count: usize) -> Result<Vec<Peak>> {
    let mag = magnitudes(series)?;
    let mut local: Vec<usize> = (1..mag.len() - 1)
        .filter(|&k| {
            mag[k] > mag[k - 1] && mag[k] >= mag[k + 1] && mag[k - 1] > 0.0 && mag[k + 1] > 0.0
        })
        .collect();
    local.sort_by(|&x, &y| mag[y].total_cmp(&mag[x]));
    Ok(local
        .into_iter()
        .take(count)
        .map(|k| refine(&mag, k, series.len(), dt))
        .collect())
}

/// DFT bin width `2π/T` of a window of `len` samples.
pub fn bin_width(len: usize, dt: f64) -> f64 {
    TAU / (len as f64 * dt)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncReport {
    pub dominant_freq_1: f64,
    pub dominant_freq_2: f64,
    pub locked: bool,
    pub freq_resolution: f64,
    pub peak_amplitudes: (f64, f64),
}

pub fn sync_report(x1: &[f64], x2: &[f64], dt: f64) -> Result<SyncReport> {
    let p1 = dominant_frequency(x1, dt)?;
    let p2 = dominant_frequency(x2, dt)?;
    let freq_resolution = REFINEMENT_GAIN * bin_width(x1.len(), dt);
    Ok(SyncReport {
        dominant_freq_1: p1.freq,
        dominant_freq_2: p2.freq,
        locked: (p1.freq - p2.freq).abs() <= freq_resolution,
        freq_resolution,
        peak_amplitudes: (p1.amplitude, p2.amplitude),
    })
}

/// Largest `|x|` over the trailing window `[t - window, t]`.
pub fn envelope(t: &[f64], series: &[f64], at: f64, window: f64) -> f64 {
    t.iter()
        .zip(series)
        .filter(|(&s, _)| s <= at + 1e-9 && s >= at - window - 1e-9)
        .map(|(_, x)| x.abs())
        .fold(0.0, f64::max)
}

/// Full coefficients → master equation run.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub params: ModelParams,
    pub init: InitialState,
    pub t_max: f64,
    pub n_cap: usize,
    /// Coefficient step; the default resolves both `ω0` and `ω_c`.
    pub dt_coeff: Option<f64>,
    /// Even multiple of the coefficient step; defaults to twice it.
    pub dt_master: Option<f64>,
    /// Master steps per recorded sample; the default gives at least 50
    /// samples per period of the faster oscillator.
    pub sample_stride: Option<usize>,
    /// Samples before this time are dropped from the spectral analysis.
    pub skip_transient: f64,
    pub min_eig: bool,
    pub logneg: bool,
}

impl Pipeline {
    pub fn new(params: ModelParams, init: InitialState) -> Self {
        Self {
            params,
            init,
            t_max: 100.0 / params.omega0(),
            n_cap: 12,
            dt_coeff: None,
            dt_master: None,
            sample_stride: None,
            skip_transient: 0.0,
            min_eig: false,
            logneg: false,
        }
    }

    pub fn with_params(&self, params: ModelParams) -> Self {
        Self {
            params,
            ..self.clone()
        }
    }

    pub fn coeff_step(&self) -> f64 {
        self.dt_coeff.unwrap_or_else(|| default_step(&self.params))
    }

    pub fn master_step(&self) -> f64 {
        self.dt_master.unwrap_or(2.0 * self.coeff_step())
    }

    pub fn stride(&self) -> usize {
        self.sample_stride.unwrap_or_else(|| {
            let fastest = self.params.omega1().max(self.params.omega2());
            let target = TAU / (50.0 * fastest);
            ((target / self.master_step()).floor() as usize).max(1)
        })
    }

    pub fn coefficients(&self) -> Result<CoeffTrajectory> {
        solve_coeffs(&self.params, self.coeff_step(), self.t_max)
    }

    pub fn evolve(&self, traj: &CoeffTrajectory) -> Result<Evolution> {
        let gen = build_generator(traj, DEFAULT_D_MIN)?;
        let (phi1, phi2) = self.init.to_relative_basis();
        let rho0 = coherent_state(&FockBasis::new(self.n_cap), phi1, phi2)?;
        let opts = EvolveOptions {
            dt_master: self.master_step(),
            stride: self.stride(),
            min_eig: self.min_eig,
            logneg: self.logneg,
        };
        evolve(&rho0, &gen, opts)
    }

    pub fn run(&self) -> Result<Evolution> {
        self.evolve(&self.coefficients()?)
    }

    /// Spectral locking analysis of `<x1>`, `<x2>` from a finished run.
    pub fn sync_of(&self, ev: &Evolution) -> Result<SyncReport> {
        let o = &ev.observables;
        let start =
            o.t.iter()
                .position(|&t| t >= self.skip_transient - 1e-12)
                .unwrap_or(o.len());
        sync_report(&o.x1[start..], &o.x2[start..], o.dt_sample())
    }

    pub fn sync(&self) -> Result<SyncReport> {
        self.sync_of(&self.run()?)
    }
}

fn with_workers<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(job),
        None => job(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub alpha: f64,
    pub report: SyncReport,
}

/// Locking analysis at every coupling in `alphas`, in input order.
pub fn alpha_sweep(
    base: &Pipeline,
    alphas: &[f64],
    workers: Option<usize>,
) -> Result<Vec<SweepPoint>> {
    let base = Arc::new(base.clone());
    with_workers(workers, || {
        alphas
            .par_iter()
            .map(|&alpha| {
                let run = base.with_params(base.params.with_alpha(alpha)?);
                Ok(SweepPoint {
                    alpha,
                    report: run.sync()?,
                })
            })
            .collect()
    })
}

/// Smallest locked coupling in `[lo, hi]`, by bisection to `BISECTION_WIDTH`.
///
/// Without detuning the oscillators are locked at any coupling and the
/// lower end is returned as is.
pub fn locking_threshold(base: &Pipeline, lo: f64, hi: f64) -> Result<f64> {
    if !(lo >= 0.0 && hi > lo) {
        return Err(Error::invalid(
            "alpha_range",
            format!("need 0 <= lo < hi, got [{lo}, {hi}]"),
        ));
    }
    if base.params.delta_omega() == 0.0 {
        return Ok(lo);
    }
    let locked = |alpha: f64| -> Result<bool> {
        Ok(base
            .with_params(base.params.with_alpha(alpha)?)
            .sync()?
            .locked)
    };
    let (lo_locked, hi_locked) = (locked(lo)?, locked(hi)?);
    if lo_locked == hi_locked {
        return Err(Error::NoBracket {
            lo,
            hi,
            verdict: lo_locked,
        });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > BISECTION_WIDTH {
        let mid = 0.5 * (a + b);
        if locked(mid)? == hi_locked {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Locking threshold for each detuning, in input order.
pub fn boundary_sweep(
    base: &Pipeline,
    deltas: &[f64],
    lo: f64,
    hi: f64,
    workers: Option<usize>,
) -> Result<Vec<(f64, f64)>> {
    with_workers(workers, || {
        deltas
            .par_iter()
            .map(|&d| {
                let run = base.with_params(base.params.with_delta_omega(d)?);
                Ok((d, locking_threshold(&run, lo, hi)?))
            })
            .collect()
    })
}

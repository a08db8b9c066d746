//! Propagator functions `u, v, w, x` of the two modes.
//!
//! The mean fields of the relative (`psi1`) and center-of-mass (`psi2`) modes
//! evolve linearly, `<psi1>(t) = u φ1 + v φ2` and `<psi2>(t) = w φ1 + x φ2`,
//! where the columns `(u, w)` and `(v, x)` both solve
//!
//! ```text
//! ḟ + i ω0 f + i δω g = -∫_0^t μ(t - t') f(t') dt'
//! ġ + i ω0 g + i δω f = 0
//! ```
//!
//! with `(u, w)(0) = (1, 0)` and `(v, x)(0) = (0, 1)`.
//!
//! Integration is classical fourth-order Runge–Kutta on a uniform grid of
//! step `dt`. The memory integral is evaluated by composite Simpson
//! quadrature (with a 3/8 panel for odd counts) on a history grid of step
//! `dt/2`, so that the Runge–Kutta midpoint stages land on history nodes.
//! Half-step history values are cubic Hermite interpolants of the two
//! neighbouring grid points, which keeps the scheme fourth order.

use std::f64::consts::{SQRT_2, TAU};

use crate::bath::MemoryKernel;
use crate::model::{InitialState, ModelParams};
use crate::{Error, Result, C64};

/// `|u|` above this is treated as a numerical blow-up.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// Sampled propagator functions and their time derivatives.
///
/// Derivatives come from the right-hand sides (memory integral included)
/// evaluated at the stored samples, not from finite differences.
#[derive(Debug, Clone)]
pub struct CoeffTrajectory {
    pub params: ModelParams,
    pub dt: f64,
    pub n_steps: usize,
    pub u: Vec<C64>,
    pub v: Vec<C64>,
    pub w: Vec<C64>,
    pub x: Vec<C64>,
    pub du: Vec<C64>,
    pub dv: Vec<C64>,
    pub dw: Vec<C64>,
    pub dx: Vec<C64>,
}

impl CoeffTrajectory {
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.time(self.n_steps)
    }

    /// `D = w v - x u`.
    pub fn determinant(&self, k: usize) -> C64 {
        self.w[k] * self.v[k] - self.x[k] * self.u[k]
    }

    /// Mean amplitudes `(<psi1>, <psi2>)` at sample `k` for initial mode
    /// amplitudes `(phi1, phi2)`.
    pub fn propagate(&self, k: usize, phi1: C64, phi2: C64) -> (C64, C64) {
        (
            self.u[k] * phi1 + self.v[k] * phi2,
            self.w[k] * phi1 + self.x[k] * phi2,
        )
    }
}

/// Default coefficient step: 200 points per bare period, and at most
/// `0.05/omega_c` to resolve the kernel decay.
pub fn default_step(params: &ModelParams) -> f64 {
    (TAU / (params.omega0() * 200.0)).min(0.05 / params.omega_c())
}

pub fn solve_coeffs(params: &ModelParams, dt: f64, t_max: f64) -> Result<CoeffTrajectory> {
    solve_with_limit(params, dt, t_max, DIVERGENCE_LIMIT)
}

/// State of one column `(f, g)`, i.e. `(u, w)` or `(v, x)`.
#[derive(Clone, Copy, Debug, Default)]
struct Column {
    top: C64,
    bottom: C64,
}

impl Column {
    fn axpy(self, h: f64, k: Column) -> Column {
        Column {
            top: self.top + k.top * h,
            bottom: self.bottom + k.bottom * h,
        }
    }
}

struct Rhs {
    omega0: f64,
    delta: f64,
}

impl Rhs {
    fn eval(&self, y: Column, memory: C64) -> Column {
        let i = C64::i();
        Column {
            top: -i * (self.omega0 * y.top + self.delta * y.bottom) - memory,
            bottom: -i * (self.omega0 * y.bottom + self.delta * y.top),
        }
    }
}

/// Quadrature weight (in units of the history step) of node `k` in the rule
/// over nodes `0..=m`.
fn weight(m: usize, k: usize) -> f64 {
    debug_assert!(m >= 1 && k <= m);
    if m == 1 {
        return 0.5;
    }
    let simpson = |j: usize, end: usize| -> f64 {
        if j == 0 || j == end {
            1.0 / 3.0
        } else if j % 2 == 1 {
            4.0 / 3.0
        } else {
            2.0 / 3.0
        }
    };
    if m % 2 == 0 {
        return simpson(k, m);
    }
    // 3/8 panel on nodes 0..=3, Simpson on 3..=m.
    let three_eighths = match k {
        0 | 3 => 3.0 / 8.0,
        1 | 2 => 9.0 / 8.0,
        _ => 0.0,
    };
    let tail = if k >= 3 && m > 3 {
        simpson(k - 3, m - 3)
    } else {
        0.0
    };
    three_eighths + tail
}

/// `g Σ_{k<m} w_k μ_{m-k} y_k` over the stored history nodes `0..m`.
fn history_sum(m: usize, step: f64, mu: &[C64], hist: &[C64]) -> C64 {
    // Irregular leading nodes go through `weight`; the rest alternate 4/3, 2/3.
    let (head, origin) = match m {
        1 => (1, 0),
        3 => (3, 3),
        _ if m % 2 == 0 => (1, 0),
        _ => (4, 3),
    };
    let mut acc = C64::new(0.0, 0.0);
    for (k, y) in hist.iter().enumerate().take(head) {
        acc += mu[m - k] * y * weight(m, k);
    }
    let mut odd = C64::new(0.0, 0.0);
    let mut even = C64::new(0.0, 0.0);
    for k in head..m {
        let term = mu[m - k] * hist[k];
        if (k - origin) % 2 == 1 {
            odd += term;
        } else {
            even += term;
        }
    }
    (acc + odd * (4.0 / 3.0) + even * (2.0 / 3.0)) * step
}

fn solve_with_limit(
    params: &ModelParams,
    dt: f64,
    t_max: f64,
    limit: f64,
) -> Result<CoeffTrajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
    }
    if !(t_max >= dt && t_max.is_finite()) {
        return Err(Error::invalid(
            "t_max",
            format!("must be >= dt = {dt}, got {t_max}"),
        ));
    }
    let scale = params.omega0().max(params.omega_c());
    if dt * scale > 1.0 {
        return Err(Error::StepSize {
            dt,
            scale,
            product: dt * scale,
        });
    }

    let n = ((t_max / dt).round() as usize).max(1);
    let kernel = MemoryKernel::new(params.spectral_density());
    let with_memory = !kernel.is_zero();
    let g = 0.5 * dt;
    let fine = 2 * n;
    let mu: Vec<C64> = if with_memory {
        (0..=fine).map(|m| kernel.at(m as f64 * g)).collect()
    } else {
        Vec::new()
    };
    let rhs = Rhs {
        omega0: params.omega0(),
        delta: params.delta_omega(),
    };

    let init = [
        Column {
            top: C64::new(1.0, 0.0),
            bottom: C64::new(0.0, 0.0),
        },
        Column {
            top: C64::new(0.0, 0.0),
            bottom: C64::new(1.0, 0.0),
        },
    ];

    let mut states: [Vec<Column>; 2] = [Vec::with_capacity(n + 1), Vec::with_capacity(n + 1)];
    let mut derivs: [Vec<Column>; 2] = [Vec::with_capacity(n + 1), Vec::with_capacity(n + 1)];
    // top-row history on the half-step grid
    let mut hist: [Vec<C64>; 2] = [Vec::new(), Vec::new()];
    for c in 0..2 {
        states[c].push(init[c]);
        derivs[c].push(rhs.eval(init[c], C64::new(0.0, 0.0)));
        if with_memory {
            hist[c] = Vec::with_capacity(fine + 1);
            hist[c].push(init[c].top);
        }
    }

    let mu0 = mu.first().copied().unwrap_or_default();
    for step in 0..n {
        let a = 2 * step;
        let (b, c_idx) = (a + 1, a + 2);
        for c in 0..2 {
            let y = states[c][step];
            let k1 = derivs[c][step];

            let (hb, wb) = if with_memory {
                (history_sum(b, g, &mu, &hist[c]), weight(b, b) * g * mu0)
            } else {
                Default::default()
            };
            let y2 = y.axpy(0.5 * dt, k1);
            let k2 = rhs.eval(y2, hb + wb * y2.top);
            let y3 = y.axpy(0.5 * dt, k2);
            let k3 = rhs.eval(y3, hb + wb * y3.top);

            let mid_guess = y.top + (k1.top * 0.25 + k2.top / 6.0 + k3.top / 12.0) * dt;
            let (mut hc, wc) = if with_memory {
                hist[c].push(mid_guess);
                (
                    history_sum(c_idx, g, &mu, &hist[c]),
                    weight(c_idx, c_idx) * g * mu0,
                )
            } else {
                Default::default()
            };
            let y4 = y.axpy(dt, k3);
            let k4 = rhs.eval(y4, hc + wc * y4.top);

            let next = Column {
                top: y.top + (k1.top + (k2.top + k3.top) * 2.0 + k4.top) * (dt / 6.0),
                bottom: y.bottom
                    + (k1.bottom + (k2.bottom + k3.bottom) * 2.0 + k4.bottom) * (dt / 6.0),
            };
            let mut f_next = rhs.eval(next, hc + wc * next.top);

            if with_memory {
                // Hermite midpoint from (y_n, F_n, y_{n+1}, F_{n+1})
                let mid = (y.top + next.top) * 0.5 + (k1.top - f_next.top) * (dt / 8.0);
                hc += mu[1] * (mid - mid_guess) * (weight(c_idx, b) * g);
                hist[c][b] = mid;
                hist[c].push(next.top);
                f_next = rhs.eval(next, hc + wc * next.top);
            }

            if !(next.top.norm() <= limit) {
                return Err(Error::Divergence {
                    t: (step + 1) as f64 * dt,
                    magnitude: next.top.norm(),
                });
            }
            states[c].push(next);
            derivs[c].push(f_next);
        }
    }

    let tops = |c: usize| states[c].iter().map(|s| s.top).collect::<Vec<_>>();
    let bottoms = |c: usize| states[c].iter().map(|s| s.bottom).collect::<Vec<_>>();
    let dtops = |c: usize| derivs[c].iter().map(|s| s.top).collect::<Vec<_>>();
    let dbottoms = |c: usize| derivs[c].iter().map(|s| s.bottom).collect::<Vec<_>>();
    Ok(CoeffTrajectory {
        params: *params,
        dt,
        n_steps: n,
        u: tops(0),
        w: bottoms(0),
        v: tops(1),
        x: bottoms(1),
        du: dtops(0),
        dw: dbottoms(0),
        dv: dtops(1),
        dx: dbottoms(1),
    })
}

/// Position and momentum expectations of the two oscillators.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeanSeries {
    pub t: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
}

impl MeanSeries {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            t: Vec::with_capacity(n),
            x1: Vec::with_capacity(n),
            x2: Vec::with_capacity(n),
            p1: Vec::with_capacity(n),
            p2: Vec::with_capacity(n),
        }
    }

    /// Appends a sample given the oscillator-mode amplitudes `<a1>, <a2>`.
    pub fn push(&mut self, t: f64, a1: C64, a2: C64) {
        self.t.push(t);
        self.x1.push(SQRT_2 * a1.re);
        self.x2.push(SQRT_2 * a2.re);
        self.p1.push(SQRT_2 * a1.im);
        self.p2.push(SQRT_2 * a2.im);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Oscillator-mode amplitudes from center-of-mass/relative amplitudes.
pub fn oscillator_amplitudes(psi1: C64, psi2: C64) -> (C64, C64) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    ((psi2 + psi1) * r, (psi2 - psi1) * r)
}

/// Exact mean positions and momenta implied by the propagator functions.
pub fn mean_values(traj: &CoeffTrajectory, init: &InitialState) -> MeanSeries {
    let (phi1, phi2) = init.to_relative_basis();
    let mut out = MeanSeries::with_capacity(traj.len());
    for k in 0..traj.len() {
        let (psi1, psi2) = traj.propagate(k, phi1, phi2);
        let (a1, a2) = oscillator_amplitudes(psi1, psi2);
        out.push(traj.time(k), a1, a2);
    }
    out
}

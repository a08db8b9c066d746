//! TOML run configuration.
//!
//! Frequencies may be given in any unit; everything is rescaled so that
//! `omega0 = 1`, and times are converted accordingly.

use std::path::Path;

use envsync::analysis::Pipeline;
use envsync::fockspace::{coherent_amplitudes, FockBasis};
use envsync::model::{InitialState, ModelParams};
use envsync::poles::PhaseGrid;
use envsync::{Error, C64};
use serde::Deserialize;

/// A configuration problem, reported with the offending key.
#[derive(Debug)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.key.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "`{}`: {}", self.key, self.message)
        }
    }
}

fn bad(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub omega0: Option<f64>,
    pub delta_omega: Option<f64>,
    pub omega1: Option<f64>,
    pub omega2: Option<f64>,
    pub alpha: Option<f64>,
    pub omega_c: Option<f64>,
    pub s: Option<f64>,
    pub beta1_re: Option<f64>,
    pub beta1_im: Option<f64>,
    pub beta2_re: Option<f64>,
    pub beta2_im: Option<f64>,
    pub t_max: Option<f64>,
    /// Coefficient step.
    pub dt: Option<f64>,
    pub dt_master: Option<f64>,
    pub n_cap: Option<usize>,
    pub sample_stride: Option<usize>,
    /// Start of the spectral-analysis window when transients are skipped.
    pub transient: Option<f64>,
    pub write_coeffs: Option<bool>,
    pub sweep: Option<SweepConfig>,
    pub phase_diagram: Option<PhaseConfig>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub alphas: Option<Vec<f64>>,
    pub delta_omegas: Option<Vec<f64>>,
    pub alpha_lo: Option<f64>,
    pub alpha_hi: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    pub alpha_max: Option<f64>,
    pub alpha_points: Option<usize>,
    pub delta_max: Option<f64>,
    pub delta_points: Option<usize>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub n_cap: Option<usize>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub logneg: bool,
    pub skip_transient: bool,
}

pub fn load(path: Option<&Path>) -> Result<RunConfig, ConfigError> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad("", format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    toml::from_str(text).map_err(|e| bad("", format!("invalid config: {}", e.message())))
}

/// Default analysis window start when `--skip-transient` is given without a
/// `transient` key, in units of `1/omega0`.
pub const DEFAULT_TRANSIENT: f64 = 20.0;

/// Validated model, initial state and integration controls, in units of
/// `omega0`.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: ModelParams,
    /// `omega0` in the units of the config file.
    pub scale: f64,
    pub pipeline: Pipeline,
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(bad(key, format!("must be a positive number, got {v}")))
    }
}

fn model_error(e: Error) -> ConfigError {
    match e {
        Error::InvalidParameter { name, reason } => bad(name, reason),
        other => bad("", other.to_string()),
    }
}

impl RunConfig {
    pub fn model(&self) -> Result<(ModelParams, f64), ConfigError> {
        let omega_c = self.omega_c.unwrap_or(3.0);
        let alpha = self.alpha.unwrap_or(0.01);
        let s = self.s.unwrap_or(1.0);
        let raw = match (self.omega1, self.omega2) {
            (Some(w1), Some(w2)) => {
                for key in ["omega0", "delta_omega"] {
                    let given = if key == "omega0" {
                        self.omega0
                    } else {
                        self.delta_omega
                    };
                    if given.is_some() {
                        return Err(bad(key, "give either omega1/omega2 or omega0/delta_omega"));
                    }
                }
                ModelParams::new(w1, w2, alpha, omega_c, s).map_err(model_error)?
            }
            (None, None) => ModelParams::from_detuning(
                self.omega0.unwrap_or(1.0),
                self.delta_omega.unwrap_or(0.1),
                alpha,
                omega_c,
                s,
            )
            .map_err(model_error)?,
            (Some(_), None) => return Err(bad("omega2", "required together with omega1")),
            (None, Some(_)) => return Err(bad("omega1", "required together with omega2")),
        };
        Ok(raw.normalized())
    }

    pub fn initial_state(&self) -> Result<InitialState, ConfigError> {
        let parts = [
            ("beta1_re", self.beta1_re),
            ("beta1_im", self.beta1_im),
            ("beta2_re", self.beta2_re),
            ("beta2_im", self.beta2_im),
        ];
        for (key, v) in parts {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(bad(key, "must be finite"));
                }
            }
        }
        let default = InitialState::default();
        let b1 = C64::new(
            self.beta1_re.unwrap_or(default.beta1.re),
            self.beta1_im.unwrap_or(0.0),
        );
        let b2 = C64::new(
            self.beta2_re.unwrap_or(default.beta2.re),
            self.beta2_im.unwrap_or(0.0),
        );
        Ok(InitialState::new(b1, b2))
    }

    /// Everything the pipeline needs, checked before any computation.
    pub fn resolve(&self, ov: &Overrides) -> Result<Resolved, ConfigError> {
        let (params, scale) = self.model()?;
        let init = self.initial_state()?;
        let mut run = Pipeline::new(params, init);

        let t_max = ov.t_max.or(self.t_max);
        let key_t = if ov.t_max.is_some() {
            "--tmax"
        } else {
            "t_max"
        };
        if let Some(t) = t_max {
            run.t_max = positive(key_t, t)? * scale;
        }
        let key_dt = if ov.dt.is_some() { "--dt" } else { "dt" };
        if let Some(dt) = ov.dt.or(self.dt) {
            run.dt_coeff = Some(positive(key_dt, dt)? * scale);
        }
        let fastest = params.omega0().max(params.omega_c());
        if run.coeff_step() * fastest > 1.0 {
            return Err(bad(
                key_dt,
                format!("step does not resolve omega_c (dt * {fastest} > 1)"),
            ));
        }
        if run.coeff_step() >= run.t_max {
            return Err(bad(key_t, "must exceed the time step"));
        }
        if let Some(dm) = self.dt_master {
            let dm = positive("dt_master", dm)? * scale;
            let ratio = dm / run.coeff_step();
            let half = (ratio / 2.0).round();
            if half < 1.0 || (ratio - 2.0 * half).abs() > 1e-9 * ratio {
                return Err(bad("dt_master", "must be an even multiple of dt"));
            }
            run.dt_master = Some(dm);
        }
        if let Some(stride) = self.sample_stride {
            if stride == 0 {
                return Err(bad("sample_stride", "must be >= 1"));
            }
            run.sample_stride = Some(stride);
        }
        let key_n = if ov.n_cap.is_some() {
            "--ncap"
        } else {
            "n_cap"
        };
        let n_cap = ov.n_cap.or(self.n_cap).unwrap_or(12);
        if n_cap == 0 {
            return Err(bad(key_n, "must be >= 1"));
        }
        run.n_cap = n_cap;
        let (phi1, phi2) = init.to_relative_basis();
        if let Err(e) = coherent_amplitudes(&FockBasis::new(n_cap), phi1, phi2) {
            return Err(bad(
                key_n,
                format!("too small for the initial amplitudes ({e})"),
            ));
        }
        if let Some(tr) = self.transient {
            if !(tr.is_finite() && tr >= 0.0) {
                return Err(bad("transient", "must be >= 0"));
            }
        }
        if ov.skip_transient {
            let skip = self.transient.unwrap_or(DEFAULT_TRANSIENT) * scale;
            if skip >= run.t_max {
                return Err(bad("transient", "must be shorter than t_max"));
            }
            run.skip_transient = skip;
        }
        run.logneg = ov.logneg;
        run.min_eig = true;
        Ok(Resolved {
            params,
            scale,
            pipeline: run,
        })
    }

    pub fn alpha_grid(&self) -> Result<Vec<f64>, ConfigError> {
        let grid = self
            .sweep
            .as_ref()
            .and_then(|s| s.alphas.clone())
            .unwrap_or_default();
        for &a in &grid {
            if !(a.is_finite() && a >= 0.0) {
                return Err(bad("sweep.alphas", format!("invalid coupling {a}")));
            }
        }
        Ok(grid)
    }

    /// Detunings (in units of `omega0`) and the bisection bracket.
    pub fn boundary_grid(&self) -> Result<(Vec<f64>, f64, f64), ConfigError> {
        let sweep = self.sweep.clone().unwrap_or_default();
        let grid = sweep.delta_omegas.unwrap_or_default();
        for &d in &grid {
            if !(d.is_finite() && (0.0..1.0).contains(&d.abs())) {
                return Err(bad(
                    "sweep.delta_omegas",
                    format!("need |delta_omega| < 1, got {d}"),
                ));
            }
        }
        let lo = sweep.alpha_lo.unwrap_or(0.0);
        let hi = sweep.alpha_hi.unwrap_or(0.06);
        if !(lo.is_finite() && lo >= 0.0) {
            return Err(bad("sweep.alpha_lo", "must be >= 0"));
        }
        if !(hi.is_finite() && hi > lo) {
            return Err(bad("sweep.alpha_hi", "must exceed alpha_lo"));
        }
        Ok((grid, lo, hi))
    }

    pub fn phase_grid(&self) -> Result<PhaseGrid, ConfigError> {
        let (params, _) = self.model()?;
        let pc = self.phase_diagram.clone().unwrap_or_default();
        let alpha_max = pc.alpha_max.unwrap_or(0.3);
        let delta_max = pc.delta_max.unwrap_or(0.95);
        let na = pc.alpha_points.unwrap_or(61);
        let nd = pc.delta_points.unwrap_or(39);
        positive("phase_diagram.alpha_max", alpha_max)?;
        if !(delta_max.is_finite() && (0.0..1.0).contains(&delta_max)) {
            return Err(bad("phase_diagram.delta_max", "must lie in [0, 1)"));
        }
        if na == 0 {
            return Err(bad("phase_diagram.alpha_points", "grid is empty"));
        }
        if nd == 0 {
            return Err(bad("phase_diagram.delta_points", "grid is empty"));
        }
        let line = |max: f64, n: usize| -> Vec<f64> {
            if n == 1 {
                vec![0.0]
            } else {
                (0..n).map(|i| max * i as f64 / (n - 1) as f64).collect()
            }
        };
        Ok(PhaseGrid {
            alphas: line(alpha_max, na),
            deltas: line(delta_max, nd),
            omega_c: params.omega_c(),
            s: params.s(),
        })
    }
}

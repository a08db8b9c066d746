//! Bath spectral density, memory kernel and self-energy.
//!
//! The spectral density is `J(ω) = π α ω_c^{1-s} ω^s e^{-ω/ω_c}`, ohmic at
//! `s = 1` (`J = π α ω e^{-ω/ω_c}`). The memory kernel entering the
//! coefficient equations is its Fourier transform
//!
//! ```text
//! μ(τ) = (2/π) ∫_0^∞ J(ω) e^{-iωτ} dω = 2 α Γ(s+1) ω_c² / (1 + i ω_c τ)^{s+1}
//! ```
//!
//! and the self-energy of a mode at negative frequency `ω'` is
//! `Σ(ω') = (2/π) ∫_0^∞ J(ω) / (ω' - ω) dω`, which for `s = 1` has the
//! closed form `2α [ω' e^{-ω'/ω_c} Ei(ω'/ω_c) - ω_c]`.

pub mod quad;
mod special;

pub use special::{exp_integral_ei, exp_scaled_e1, gamma_fn};

use std::f64::consts::{FRAC_2_PI, PI};

use crate::{Error, Result, C64};
use quad::QuadOptions;

/// Semi-infinite frequency integrals are cut at this multiple of `ω_c`.
pub const CUTOFF_MULTIPLE: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDensity {
    pub alpha: f64,
    pub omega_c: f64,
    pub s: f64,
}

impl SpectralDensity {
    pub fn ohmic(alpha: f64, omega_c: f64) -> Self {
        Self {
            alpha,
            omega_c,
            s: 1.0,
        }
    }

    pub fn is_ohmic(&self) -> bool {
        self.s == 1.0
    }

    /// `J(ω)` for `ω >= 0`.
    pub fn density(&self, omega: f64) -> Result<f64> {
        if !(omega >= 0.0) {
            return Err(Error::Domain {
                function: "spectral_density",
                value: omega,
                reason: "requires omega >= 0",
            });
        }
        Ok(self.density_unchecked(omega))
    }

    fn density_unchecked(&self, omega: f64) -> f64 {
        if omega == 0.0 {
            return 0.0;
        }
        let power = if self.is_ohmic() {
            omega
        } else {
            self.omega_c.powf(1.0 - self.s) * omega.powf(self.s)
        };
        PI * self.alpha * power * (-omega / self.omega_c).exp()
    }

    pub fn kernel(&self) -> MemoryKernel {
        MemoryKernel::new(*self)
    }

    /// `Σ(ω')` for `ω' < 0`: closed form when ohmic, quadrature otherwise.
    pub fn self_energy(&self, omega_p: f64) -> Result<f64> {
        check_negative(omega_p)?;
        if self.alpha == 0.0 {
            return Ok(0.0);
        }
        if self.is_ohmic() {
            let z = -omega_p / self.omega_c;
            Ok(2.0 * self.alpha * self.omega_c * (z * exp_scaled_e1(z)? - 1.0))
        } else {
            self.self_energy_quadrature(omega_p)
        }
    }

    /// `Σ(ω')` by adaptive quadrature, for any exponent.
    pub fn self_energy_quadrature(&self, omega_p: f64) -> Result<f64> {
        check_negative(omega_p)?;
        if self.alpha == 0.0 {
            return Ok(0.0);
        }
        let upper = CUTOFF_MULTIPLE * self.omega_c;
        // The integrand varies on the scale |ω'| near the origin.
        let mut breaks = Vec::new();
        let mut b = -omega_p;
        while b < upper {
            breaks.push(b);
            b *= 10.0;
        }
        breaks.push(self.omega_c);
        let (value, _) = quad::integrate_real(
            |w| self.density_unchecked(w) / (omega_p - w),
            0.0,
            upper,
            &breaks,
            QuadOptions::default(),
        );
        Ok(FRAC_2_PI * value)
    }
}

fn check_negative(omega_p: f64) -> Result<()> {
    if omega_p < 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            function: "self_energy",
            value: omega_p,
            reason: "requires omega' < 0 (principal value not supported)",
        })
    }
}

/// Complex bath correlation `μ(τ)`; satisfies `μ(-τ) = conj(μ(τ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryKernel {
    density: SpectralDensity,
    prefactor: f64,
}

impl MemoryKernel {
    pub fn new(density: SpectralDensity) -> Self {
        let gamma = if density.is_ohmic() {
            1.0
        } else {
            gamma_fn(density.s + 1.0).expect("s > 0")
        };
        Self {
            density,
            prefactor: 2.0 * density.alpha * gamma * density.omega_c * density.omega_c,
        }
    }

    pub fn density(&self) -> SpectralDensity {
        self.density
    }

    pub fn is_zero(&self) -> bool {
        self.prefactor == 0.0
    }

    pub fn at(&self, tau: f64) -> C64 {
        let denom = C64::new(1.0, self.density.omega_c * tau);
        if self.density.is_ohmic() {
            C64::new(self.prefactor, 0.0) / (denom * denom)
        } else {
            self.prefactor * denom.powf(-(self.density.s + 1.0))
        }
    }
}

//! Physical parameters, the center-of-mass/relative mode map and the initial
//! coherent state.
//!
//! The oscillator modes `a1, a2` are mapped onto the relative mode
//! `psi1 = (a1 - a2)/sqrt(2)` (the only one coupled to the bath) and the
//! center-of-mass mode `psi2 = (a1 + a2)/sqrt(2)`. In that basis the free
//! Hamiltonian reads `omega0 (n1 + n2) + delta_omega (psi1† psi2 + h.c.)` with
//! `omega0 = (omega1 + omega2)/2` and `delta_omega = (omega1 - omega2)/2`.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::bath::SpectralDensity;
use crate::{Error, Result, C64};

/// Two bare oscillator frequencies plus the bath parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    omega1: f64,
    omega2: f64,
    alpha: f64,
    omega_c: f64,
    s: f64,
}

impl ModelParams {
    pub fn new(omega1: f64, omega2: f64, alpha: f64, omega_c: f64, s: f64) -> Result<Self> {
        positive("omega1", omega1)?;
        positive("omega2", omega2)?;
        positive("omega_c", omega_c)?;
        positive("s", s)?;
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::invalid(
                "alpha",
                format!("must be >= 0, got {alpha}"),
            ));
        }
        Ok(Self {
            omega1,
            omega2,
            alpha,
            omega_c,
            s,
        })
    }

    /// Builds the parameter set from the mean frequency and the half detuning.
    pub fn from_detuning(
        omega0: f64,
        delta_omega: f64,
        alpha: f64,
        omega_c: f64,
        s: f64,
    ) -> Result<Self> {
        positive("omega0", omega0)?;
        if !delta_omega.is_finite() || delta_omega.abs() >= omega0 {
            return Err(Error::invalid(
                "delta_omega",
                format!("need |delta_omega| < omega0 = {omega0}, got {delta_omega}"),
            ));
        }
        Self::new(
            omega0 + delta_omega,
            omega0 - delta_omega,
            alpha,
            omega_c,
            s,
        )
    }

    /// Ohmic parameter set in units of `omega0`.
    pub fn ohmic(delta_omega: f64, alpha: f64, omega_c: f64) -> Result<Self> {
        Self::from_detuning(1.0, delta_omega, alpha, omega_c, 1.0)
    }

    /// Rescales every frequency by `omega0`, so that `omega0() == 1`.
    /// Returns the scale factor that was divided out.
    pub fn normalized(&self) -> (Self, f64) {
        let w0 = self.omega0();
        let p = Self {
            omega1: self.omega1 / w0,
            omega2: self.omega2 / w0,
            omega_c: self.omega_c / w0,
            ..*self
        };
        (p, w0)
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.omega1, self.omega2, alpha, self.omega_c, self.s)
    }

    pub fn with_delta_omega(&self, delta_omega: f64) -> Result<Self> {
        Self::from_detuning(self.omega0(), delta_omega, self.alpha, self.omega_c, self.s)
    }

    pub fn with_exponent(&self, s: f64) -> Result<Self> {
        Self::new(self.omega1, self.omega2, self.alpha, self.omega_c, s)
    }

    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    pub fn omega2(&self) -> f64 {
        self.omega2
    }

    pub fn omega0(&self) -> f64 {
        0.5 * (self.omega1 + self.omega2)
    }

    pub fn delta_omega(&self) -> f64 {
        0.5 * (self.omega1 - self.omega2)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn spectral_density(&self) -> SpectralDensity {
        SpectralDensity {
            alpha: self.alpha,
            omega_c: self.omega_c,
            s: self.s,
        }
    }
}

impl Default for ModelParams {
    /// `delta_omega = 0.1`, `omega_c = 3`, `alpha = 0.01`, ohmic bath.
    fn default() -> Self {
        Self {
            omega1: 1.1,
            omega2: 0.9,
            alpha: 0.01,
            omega_c: 3.0,
            s: 1.0,
        }
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be > 0, got {value}")))
    }
}

/// Coherent amplitudes of the two oscillator modes `a1, a2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub beta1: C64,
    pub beta2: C64,
}

impl InitialState {
    pub fn new(beta1: C64, beta2: C64) -> Self {
        Self { beta1, beta2 }
    }

    /// Zero-momentum coherent state with the given position expectations,
    /// using `<x_j> = sqrt(2) Re(beta_j)`.
    pub fn from_positions(x1: f64, x2: f64) -> Self {
        Self {
            beta1: C64::new(x1 * FRAC_1_SQRT_2, 0.0),
            beta2: C64::new(x2 * FRAC_1_SQRT_2, 0.0),
        }
    }

    /// Amplitudes `(phi1, phi2)` of the relative and center-of-mass modes.
    pub fn to_relative_basis(&self) -> (C64, C64) {
        (
            (self.beta1 - self.beta2) * FRAC_1_SQRT_2,
            (self.beta1 + self.beta2) * FRAC_1_SQRT_2,
        )
    }

    pub fn from_relative_basis(phi1: C64, phi2: C64) -> Self {
        Self {
            beta1: (phi2 + phi1) * FRAC_1_SQRT_2,
            beta2: (phi2 - phi1) * FRAC_1_SQRT_2,
        }
    }

    pub fn positions(&self) -> (f64, f64) {
        (
            std::f64::consts::SQRT_2 * self.beta1.re,
            std::f64::consts::SQRT_2 * self.beta2.re,
        )
    }
}

impl Default for InitialState {
    fn default() -> Self {
        Self::from_positions(0.5, 0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn symmetric_input_leaves_relative_mode_empty() {
        let b = 0.5 * FRAC_1_SQRT_2;
        let (phi1, phi2) =
            InitialState::new(C64::new(b, 0.0), C64::new(b, 0.0)).to_relative_basis();
        assert_eq!(phi1, C64::new(0.0, 0.0));
        assert_relative_eq!(phi2.re, 0.5, epsilon = 1e-15);
        assert_eq!(phi2.im, 0.0);
    }

    #[test]
    fn antisymmetric_input_leaves_center_of_mass_empty() {
        let b = 0.5 * FRAC_1_SQRT_2;
        let (phi1, phi2) =
            InitialState::new(C64::new(b, 0.0), C64::new(-b, 0.0)).to_relative_basis();
        assert_relative_eq!(phi1.re, 0.5, epsilon = 1e-15);
        assert_eq!(phi2, C64::new(0.0, 0.0));
    }

    #[test]
    fn single_mode_input_splits_equally() {
        let beta = C64::new(0.3, 0.1);
        let (phi1, phi2) = InitialState::new(beta, C64::new(0.0, 0.0)).to_relative_basis();
        let expected = beta * FRAC_1_SQRT_2;
        assert_relative_eq!((phi1 - expected).norm(), 0.0, epsilon = 1e-16);
        assert_relative_eq!((phi2 - expected).norm(), 0.0, epsilon = 1e-16);
    }

    #[test]
    fn positions_follow_real_part() {
        let st = InitialState::from_positions(0.5, -0.25);
        let (x1, x2) = st.positions();
        assert_relative_eq!(x1, 0.5, epsilon = 1e-15);
        assert_relative_eq!(x2, -0.25, epsilon = 1e-15);
    }

    #[test]
    fn detuning_constructor_and_normalization() {
        let p = ModelParams::from_detuning(2.0, 0.2, 0.1, 6.0, 1.0).unwrap();
        assert_relative_eq!(p.omega1(), 2.2);
        assert_relative_eq!(p.omega2(), 1.8);
        let (n, scale) = p.normalized();
        assert_eq!(scale, 2.0);
        assert_relative_eq!(n.omega0(), 1.0);
        assert_relative_eq!(n.delta_omega(), 0.1, epsilon = 1e-15);
        assert_relative_eq!(n.omega_c(), 3.0);
        assert_eq!(n.alpha(), 0.1);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(ModelParams::new(0.0, 1.0, 0.1, 3.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, -0.1, 3.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.1, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.1, 3.0, 0.0).is_err());
        assert!(ModelParams::from_detuning(1.0, 1.0, 0.1, 3.0, 1.0).is_err());
        match ModelParams::new(1.0, 1.0, f64::NAN, 3.0, 1.0) {
            Err(Error::InvalidParameter { name, .. }) => assert_eq!(name, "alpha"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn default_mirrors_synchronization_setup() {
        let p = ModelParams::default();
        assert_relative_eq!(p.omega0(), 1.0);
        assert_relative_eq!(p.delta_omega(), 0.1, epsilon = 1e-15);
        assert_eq!(p.omega_c(), 3.0);
        let (x1, x2) = InitialState::default().positions();
        assert_relative_eq!(x1, 0.5, epsilon = 1e-15);
        assert_relative_eq!(x2, 0.5, epsilon = 1e-15);
    }

    fn amplitude() -> impl Strategy<Value = C64> {
        (0.0..10.0f64, 0.0..std::f64::consts::TAU).prop_map(|(r, th)| C64::from_polar(r, th))
    }

    proptest! {
        #[test]
        fn relative_basis_round_trip(b1 in amplitude(), b2 in amplitude()) {
            let st = InitialState::new(b1, b2);
            let (phi1, phi2) = st.to_relative_basis();
            let back = InitialState::from_relative_basis(phi1, phi2);
            let scale = b1.norm().max(b2.norm()).max(1e-300);
            prop_assert!((back.beta1 - b1).norm() <= 1e-14 * scale);
            prop_assert!((back.beta2 - b2).norm() <= 1e-14 * scale);
        }

        #[test]
        fn relative_basis_preserves_norm(b1 in amplitude(), b2 in amplitude()) {
            let (phi1, phi2) = InitialState::new(b1, b2).to_relative_basis();
            let before = b1.norm_sqr() + b2.norm_sqr();
            let after = phi1.norm_sqr() + phi2.norm_sqr();
            prop_assert!((before - after).abs() <= 1e-13 * before.max(1.0));
        }
    }
}

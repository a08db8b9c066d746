//! Time-local master equation for the two-mode density matrix.
//!
//! With `D = w v - x u`, the generator coefficients
//!
//! ```text
//! Ω11 = i (w v̇ - x u̇) / D        Ω21 = i (u̇ v - u v̇) / D
//! Γ1  = -2 Im Ω11                 c   = i (Ω21 - δω)
//! ```
//!
//! define the non-Hermitian Hamiltonian
//! `H = Ω11 n1 + Ω21 psi1† psi2 + δω psi2† psi1 + ω0 n2` and
//!
//! ```text
//! ρ̇ = -i (H ρ - ρ H†) + Γ1 psi1 ρ psi1† + c psi2 ρ psi1† + c* psi1 ρ psi2†
//! ```
//!
//! The cross rate `c` is complex in general; its real part is `Γ2 / 2` with
//! `Γ2 = -2 Im Ω21`. Keeping the imaginary part is what makes the equation
//! trace preserving and reproduces the mean fields `<psi> = M φ` exactly.
//! The right-hand side is evaluated as `Z + Z†` with
//! `Z = -i H ρ + (Γ1/2 psi1 ρ + c psi2 ρ) psi1†`, which keeps ρ Hermitian by
//! construction.
//!
//! The propagation runs in the frame rotating at `ω0` per excitation. The
//! total-number rotation commutes with every term above except the bare
//! `ω0` parts of the diagonal, so the frame only removes the fast phase that
//! the Runge–Kutta step would otherwise have to resolve on the top shells.
//! States and observables are reported in the laboratory frame.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use nalgebra::DMatrix;

use crate::coeffs::CoeffTrajectory;
use crate::fockspace::{build_operators, DensityMatrix, FockBasis, ModeOperators, SparseOp};
use crate::{Error, Result, C64};

pub const DEFAULT_D_MIN: f64 = 1e-8;
pub const TRACE_TOL: f64 = 1e-6;
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Beam-splitter rotations whose norm changes by more than this are flagged.
pub const LOGNEG_DEFICIT_TOL: f64 = 1e-6;

const I: C64 = C64::new(0.0, 1.0);

/// Generator coefficients sampled on the coefficient grid.
#[derive(Debug, Clone)]
pub struct GeneratorCoeffs {
    pub dt: f64,
    pub omega11: Vec<C64>,
    pub omega21: Vec<C64>,
    pub gamma1: Vec<f64>,
    pub gamma2: Vec<f64>,
    pub cross: Vec<C64>,
    pub delta_omega: f64,
    pub omega0: f64,
}

impl GeneratorCoeffs {
    pub fn len(&self) -> usize {
        self.omega11.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega11.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
}

pub fn build_generator(traj: &CoeffTrajectory, d_min: f64) -> Result<GeneratorCoeffs> {
    let n = traj.len();
    let delta_omega = traj.params.delta_omega();
    let mut g = GeneratorCoeffs {
        dt: traj.dt,
        omega11: Vec::with_capacity(n),
        omega21: Vec::with_capacity(n),
        gamma1: Vec::with_capacity(n),
        gamma2: Vec::with_capacity(n),
        cross: Vec::with_capacity(n),
        delta_omega,
        omega0: traj.params.omega0(),
    };
    for k in 0..n {
        let d = traj.determinant(k);
        if d.norm() <= d_min {
            return Err(Error::SingularDeterminant {
                t: traj.time(k),
                magnitude: d.norm(),
                threshold: d_min,
            });
        }
        let (u, v, w, x) = (traj.u[k], traj.v[k], traj.w[k], traj.x[k]);
        let (du, dv) = (traj.du[k], traj.dv[k]);
        let o11 = I * (w * dv - x * du) / d;
        let o21 = I * (du * v - u * dv) / d;
        g.omega11.push(o11);
        g.omega21.push(o21);
        g.gamma1.push(-2.0 * o11.im);
        g.gamma2.push(-2.0 * o21.im);
        g.cross.push(I * (o21 - delta_omega));
    }
    Ok(g)
}

/// Precomputed operators for the right-hand side.
struct Liouvillian {
    ops: ModeOperators,
    n1: Vec<f64>,
    n2: Vec<f64>,
    total: Vec<f64>,
    hop12: SparseOp,
    hop21: SparseOp,
}

impl Liouvillian {
    fn new(basis: &FockBasis) -> Self {
        let ops = build_operators(basis);
        let n1 = basis.states().iter().map(|s| s.0 as f64).collect();
        let n2 = basis.states().iter().map(|s| s.1 as f64).collect();
        let total = basis.states().iter().map(|s| (s.0 + s.1) as f64).collect();
        Self {
            total,
            hop12: ops.psi1_dag.compose(&ops.psi2),
            hop21: ops.psi2_dag.compose(&ops.psi1),
            n1,
            n2,
            ops,
        }
    }

    fn rhs(&self, g: &GeneratorCoeffs, k: usize, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let dim = rho.nrows();
        let (o11, o21, gamma1, c) = (g.omega11[k], g.omega21[k], g.gamma1[k], g.cross[k]);
        let mut z = DMatrix::zeros(dim, dim);
        // -i H ρ, less the frame rotation ω0 (n1 + n2)
        let o11 = o11 - g.omega0;
        for i in 0..dim {
            let h = -I * o11 * self.n1[i];
            for j in 0..dim {
                z[(i, j)] = h * rho[(i, j)];
            }
        }
        self.hop12.mul_left_acc(-I * o21, rho, &mut z);
        self.hop21.mul_left_acc(-I * g.delta_omega, rho, &mut z);
        // (Γ1/2 ψ1 ρ + c ψ2 ρ) ψ1†
        let mut b = DMatrix::zeros(dim, dim);
        self.ops
            .psi1
            .mul_left_acc(C64::new(0.5 * gamma1, 0.0), rho, &mut b);
        self.ops.psi2.mul_left_acc(c, rho, &mut b);
        self.ops.psi1.mul_adjoint_right_acc(&b, &mut z);
        let adj = z.adjoint();
        z + adj
    }

    /// Rotating-frame state at time `t` mapped back to the laboratory frame.
    fn to_lab(&self, rho: &DensityMatrix, omega0: f64, t: f64) -> DensityMatrix {
        let mut out = rho.clone();
        for (i, &ni) in self.total.iter().enumerate() {
            for (j, &nj) in self.total.iter().enumerate() {
                if ni != nj {
                    out.data[(i, j)] *= C64::from_polar(1.0, -omega0 * (ni - nj) * t);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    /// Must be an even multiple of the coefficient step.
    pub dt_master: f64,
    /// Record observables every `stride` master steps.
    pub stride: usize,
    pub min_eig: bool,
    pub logneg: bool,
}

impl EvolveOptions {
    pub fn new(dt_master: f64) -> Self {
        Self {
            dt_master,
            stride: 1,
            min_eig: false,
            logneg: false,
        }
    }
}

/// Observables of the oscillator modes `a1, a2`, plus diagnostics.
#[derive(Debug, Clone, Default)]
pub struct Observables {
    pub t: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub n1: Vec<f64>,
    pub n2: Vec<f64>,
    pub trace: Vec<f64>,
    /// NaN when not requested.
    pub min_eig: Vec<f64>,
    pub logneg: Option<Vec<f64>>,
}

impl Observables {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Sampling interval of the recorded series.
    pub fn dt_sample(&self) -> f64 {
        if self.t.len() < 2 {
            0.0
        } else {
            self.t[1] - self.t[0]
        }
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub observables: Observables,
    pub final_state: DensityMatrix,
    pub max_trace_error: f64,
    /// Largest pre-symmetrization Hermiticity drift over all steps.
    pub max_hermiticity_drift: f64,
    pub logneg_warning: bool,
}

/// Records observables of the rotating-frame state `rho` at time `t`.
fn record(
    obs: &mut Observables,
    t: f64,
    rho: &DensityMatrix,
    lv: &Liouvillian,
    omega0: f64,
    opts: &EvolveOptions,
    warn: &mut bool,
) {
    let phase = C64::from_polar(1.0, -omega0 * t);
    let psi1 = lv.ops.psi1.expectation(rho) * phase;
    let psi2 = lv.ops.psi2.expectation(rho) * phase;
    let a1 = (psi2 + psi1) * FRAC_1_SQRT_2;
    let a2 = (psi2 - psi1) * FRAC_1_SQRT_2;
    let (mut nn1, mut nn2) = (0.0, 0.0);
    for (i, (&m1, &m2)) in lv.n1.iter().zip(&lv.n2).enumerate() {
        nn1 += m1 * rho.data[(i, i)].re;
        nn2 += m2 * rho.data[(i, i)].re;
    }
    let cross = lv.hop21.expectation(rho);
    obs.t.push(t);
    obs.x1.push(SQRT_2 * a1.re);
    obs.x2.push(SQRT_2 * a2.re);
    obs.p1.push(SQRT_2 * a1.im);
    obs.p2.push(SQRT_2 * a2.im);
    obs.n1.push(0.5 * (nn1 + nn2) + cross.re);
    obs.n2.push(0.5 * (nn1 + nn2) - cross.re);
    obs.trace.push(rho.trace().re);
    obs.min_eig.push(if opts.min_eig {
        rho.min_eigenvalue()
    } else {
        f64::NAN
    });
    if let Some(ln) = obs.logneg.as_mut() {
        let r = log_negativity(&lv.to_lab(rho, omega0, t));
        *warn |= r.truncation_warning();
        ln.push(r.value);
    }
}

/// Fourth-order Runge–Kutta propagation of `rho0` over the generator grid.
pub fn evolve(
    rho0: &DensityMatrix,
    gen: &GeneratorCoeffs,
    opts: EvolveOptions,
) -> Result<Evolution> {
    let ratio = opts.dt_master / gen.dt;
    let half = (ratio / 2.0).round() as usize;
    if !(opts.dt_master > 0.0) || half == 0 || (ratio - 2.0 * half as f64).abs() > 1e-9 * ratio {
        return Err(Error::StepMismatch {
            dt_master: opts.dt_master,
            dt_coeff: gen.dt,
        });
    }
    if opts.stride == 0 {
        return Err(Error::invalid("stride", "must be >= 1"));
    }
    let basis = FockBasis::new(rho0.n_cap);
    let lv = Liouvillian::new(&basis);
    let steps = (gen.len() - 1) / (2 * half);
    let h = 2.0 * half as f64 * gen.dt;

    let mut rho = rho0.clone();
    let mut obs = Observables {
        logneg: opts.logneg.then(Vec::new),
        ..Default::default()
    };
    let mut warn = false;
    let mut max_trace_error: f64 = (rho.trace().re - 1.0).abs();
    let mut max_drift: f64 = 0.0;
    record(&mut obs, 0.0, &rho, &lv, gen.omega0, &opts, &mut warn);

    let c = |x: f64| C64::new(x, 0.0);
    for step in 0..steps {
        let k = step * 2 * half;
        let r = &rho.data;
        let k1 = lv.rhs(gen, k, r);
        let k2 = lv.rhs(gen, k + half, &(r + &k1 * c(0.5 * h)));
        let k3 = lv.rhs(gen, k + half, &(r + &k2 * c(0.5 * h)));
        let k4 = lv.rhs(gen, k + 2 * half, &(r + &k3 * c(h)));
        rho.data = r + (k1 + (k2 + k3) * c(2.0) + k4) * c(h / 6.0);

        let t = (step + 1) as f64 * h;
        let drift = rho.hermiticity_drift();
        max_drift = max_drift.max(drift);
        if drift > HERMITICITY_TOL {
            return Err(Error::HermiticityDrift { t, drift });
        }
        rho.symmetrize();
        let trace = rho.trace().re;
        let err = (trace - 1.0).abs();
        max_trace_error = max_trace_error.max(err);
        if err > TRACE_TOL || !trace.is_finite() {
            return Err(Error::TraceDrift { t, trace });
        }
        if (step + 1) % opts.stride == 0 {
            record(&mut obs, t, &rho, &lv, gen.omega0, &opts, &mut warn);
        }
    }
    let final_state = lv.to_lab(&rho, gen.omega0, steps as f64 * h);
    Ok(Evolution {
        observables: obs,
        final_state,
        max_trace_error,
        max_hermiticity_drift: max_drift,
        logneg_warning: warn,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNegativity {
    pub value: f64,
    /// `|Tr ρ - Tr(U ρ U†)|` of the beam-splitter rotation.
    pub norm_deficit: f64,
}

impl LogNegativity {
    pub fn truncation_warning(&self) -> bool {
        self.norm_deficit > LOGNEG_DEFICIT_TOL
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Matrix taking `|n1, n2>` of the relative/center-of-mass modes to the
/// oscillator basis `|p, q>` (same ordering). It only mixes states within a
/// shell of fixed total excitation.
pub fn beam_splitter(basis: &FockBasis) -> DMatrix<f64> {
    let dim = basis.dim();
    let mut u = DMatrix::zeros(dim, dim);
    for (col, &(n1, n2)) in basis.states().iter().enumerate() {
        // psi1† = (a1† - a2†)/√2, psi2† = (a1† + a2†)/√2
        let norm =
            1.0 / ((2.0f64).powi((n1 + n2) as i32).sqrt() * (factorial(n1) * factorial(n2)).sqrt());
        for j in 0..=n1 {
            let sign = if (n1 - j) % 2 == 0 { 1.0 } else { -1.0 };
            for k in 0..=n2 {
                let p = j + k;
                let q = n1 + n2 - p;
                let row = basis.index(p, q).expect("same shell");
                u[(row, col)] += sign
                    * binomial(n1, j)
                    * binomial(n2, k)
                    * norm
                    * (factorial(p) * factorial(q)).sqrt();
            }
        }
    }
    u
}

/// Logarithmic negativity between the oscillators `a1` and `a2`.
pub fn log_negativity(rho: &DensityMatrix) -> LogNegativity {
    let basis = FockBasis::new(rho.n_cap);
    let u = beam_splitter(&basis).map(|v| C64::new(v, 0.0));
    let rotated = &u * &rho.data * u.adjoint();
    let norm_deficit = (rho.trace() - rotated.trace()).norm();

    // partial transpose over a2 in the product basis (p, q), p, q <= n_cap
    let side = basis.n_cap() + 1;
    let mut pt = DMatrix::<C64>::zeros(side * side, side * side);
    for (i, &(p, q)) in basis.states().iter().enumerate() {
        for (j, &(pp, qq)) in basis.states().iter().enumerate() {
            pt[(p * side + qq, pp * side + q)] = rotated[(i, j)];
        }
    }
    let eig = nalgebra::SymmetricEigen::new(pt);
    let trace_norm: f64 = eig.eigenvalues.iter().map(|e| e.abs()).sum();
    LogNegativity {
        value: trace_norm.log2(),
        norm_deficit,
    }
}

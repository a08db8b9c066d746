//! Truncated two-mode Fock space for the relative (`psi1`) and center-of-mass
//! (`psi2`) modes.
//!
//! States `|n1, n2>` with `n1 + n2 <= n_cap` are ordered by total excitation
//! and, within a shell, by decreasing `n1`:
//! `|00>, |10>, |01>, |20>, |11>, |02>, ...`.

use nalgebra::DMatrix;

use crate::{Error, Result, C64};

/// Largest norm deficit tolerated when truncating a coherent state.
pub const COHERENT_DEFICIT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    n_cap: usize,
    states: Vec<(usize, usize)>,
}

impl FockBasis {
    pub fn new(n_cap: usize) -> Self {
        let states = (0..=n_cap)
            .flat_map(|n| (0..=n).rev().map(move |n1| (n1, n - n1)))
            .collect();
        Self { n_cap, states }
    }

    pub fn n_cap(&self) -> usize {
        self.n_cap
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[(usize, usize)] {
        &self.states
    }

    /// Position of `|n1, n2>`, or `None` outside the truncation.
    pub fn index(&self, n1: usize, n2: usize) -> Option<usize> {
        let n = n1 + n2;
        (n <= self.n_cap).then(|| n * (n + 1) / 2 + n2)
    }
}

/// Sparse operator stored as `(row, col, value)` triplets.
///
/// Every operator built here (ladder operators and their bilinears) has at
/// most one entry per row and per column, so products with dense matrices
/// cost `O(dim)` per column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseOp {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect(),
        }
    }

    /// Operator product `self * other`.
    pub fn compose(&self, other: &SparseOp) -> SparseOp {
        let mut entries = Vec::new();
        for &(r, k, a) in &self.entries {
            for &(k2, c, b) in &other.entries {
                if k == k2 {
                    entries.push((r, c, a * b));
                }
            }
        }
        entries.sort_by_key(|&(r, c, _)| (c, r));
        SparseOp {
            dim: self.dim,
            entries,
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += C64::new(v, 0.0);
        }
        m
    }

    /// `out += scale * self * m`.
    pub fn mul_left_acc(&self, scale: C64, m: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        for &(r, k, v) in &self.entries {
            let f = scale * v;
            for j in 0..m.ncols() {
                out[(r, j)] += f * m[(k, j)];
            }
        }
    }

    /// `out += m * self†` (entries are real).
    pub fn mul_adjoint_right_acc(&self, m: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        for &(r, k, v) in &self.entries {
            // (self†)_{k r} = v
            let (src, dst) = (k, r);
            for i in 0..m.nrows() {
                out[(i, dst)] += m[(i, src)] * v;
            }
        }
    }

    /// `Tr(rho * self)`.
    pub fn expectation(&self, rho: &DensityMatrix) -> C64 {
        self.entries
            .iter()
            .map(|&(r, c, v)| rho.data[(c, r)] * v)
            .sum()
    }
}

/// Annihilation and creation operators of both modes.
#[derive(Debug, Clone)]
pub struct ModeOperators {
    pub psi1: SparseOp,
    pub psi2: SparseOp,
    pub psi1_dag: SparseOp,
    pub psi2_dag: SparseOp,
}

impl ModeOperators {
    pub fn number1(&self) -> SparseOp {
        self.psi1_dag.compose(&self.psi1)
    }

    pub fn number2(&self) -> SparseOp {
        self.psi2_dag.compose(&self.psi2)
    }
}

pub fn build_operators(basis: &FockBasis) -> ModeOperators {
    let dim = basis.dim();
    let mut e1 = Vec::new();
    let mut e2 = Vec::new();
    for (col, &(n1, n2)) in basis.states().iter().enumerate() {
        if n1 > 0 {
            let row = basis.index(n1 - 1, n2).expect("lower state in basis");
            e1.push((row, col, (n1 as f64).sqrt()));
        }
        if n2 > 0 {
            let row = basis.index(n1, n2 - 1).expect("lower state in basis");
            e2.push((row, col, (n2 as f64).sqrt()));
        }
    }
    let psi1 = SparseOp { dim, entries: e1 };
    let psi2 = SparseOp { dim, entries: e2 };
    ModeOperators {
        psi1_dag: psi1.adjoint(),
        psi2_dag: psi2.adjoint(),
        psi1,
        psi2,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub n_cap: usize,
    pub data: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn from_matrix(basis: &FockBasis, data: DMatrix<C64>) -> Result<Self> {
        if data.nrows() != basis.dim() || data.ncols() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: data.nrows().max(data.ncols()),
            });
        }
        Ok(Self {
            n_cap: basis.n_cap(),
            data,
        })
    }

    pub fn vacuum(basis: &FockBasis) -> Self {
        let mut data = DMatrix::zeros(basis.dim(), basis.dim());
        data[(0, 0)] = C64::new(1.0, 0.0);
        Self {
            n_cap: basis.n_cap(),
            data,
        }
    }

    /// `|c><c|` for a normalized amplitude vector.
    pub fn pure(basis: &FockBasis, amplitudes: &[C64]) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: amplitudes.len(),
            });
        }
        let dim = basis.dim();
        let data = DMatrix::from_fn(dim, dim, |i, j| amplitudes[i] * amplitudes[j].conj());
        Ok(Self {
            n_cap: basis.n_cap(),
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_ij|² for Hermitian ρ
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `max |ρ - ρ†|`.
    pub fn hermiticity_drift(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn symmetrize(&mut self) {
        let adj = self.data.adjoint();
        self.data = (&self.data + adj) * C64::new(0.5, 0.0);
    }

    /// Smallest eigenvalue, or NaN if the eigensolver breaks down.
    ///
    /// The solver is run on `rho + 1`: exactly degenerate spectra (pure
    /// states with real amplitudes) otherwise produce non-finite values.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.dim();
        let lowest = |m: DMatrix<C64>| {
            let eig = nalgebra::SymmetricEigen::new(m);
            if eig.eigenvalues.iter().all(|x| x.is_finite()) {
                eig.eigenvalues.iter().copied().reduce(f64::min)
            } else {
                None
            }
        };
        lowest(&self.data + DMatrix::<C64>::identity(n, n))
            .map(|x| x - 1.0)
            .or_else(|| lowest(self.data.clone()))
            .unwrap_or(f64::NAN)
    }
}

/// Truncated, renormalized product coherent state `|φ1, φ2>`.
pub fn coherent_state(basis: &FockBasis, phi1: C64, phi2: C64) -> Result<DensityMatrix> {
    let amps = coherent_amplitudes(basis, phi1, phi2)?;
    DensityMatrix::pure(basis, &amps)
}

/// Amplitude vector of the truncated coherent state (renormalized).
pub fn coherent_amplitudes(basis: &FockBasis, phi1: C64, phi2: C64) -> Result<Vec<C64>> {
    let prefactor = (-(phi1.norm_sqr() + phi2.norm_sqr()) / 2.0).exp();
    let single = |phi: C64| {
        let mut out = Vec::with_capacity(basis.n_cap() + 1);
        let mut c = C64::new(1.0, 0.0);
        for n in 0..=basis.n_cap() {
            if n > 0 {
                c *= phi / (n as f64).sqrt();
            }
            out.push(c);
        }
        out
    };
    let (s1, s2) = (single(phi1), single(phi2));
    let mut amps: Vec<C64> = basis
        .states()
        .iter()
        .map(|&(n1, n2)| s1[n1] * s2[n2] * prefactor)
        .collect();
    let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    let deficit = 1.0 - norm;
    if deficit > COHERENT_DEFICIT_TOL {
        return Err(Error::Truncation {
            n_cap: basis.n_cap(),
            deficit,
            tolerance: COHERENT_DEFICIT_TOL,
        });
    }
    let scale = 1.0 / norm.sqrt();
    amps.iter_mut().for_each(|c| *c *= scale);
    Ok(amps)
}

/// `Tr(rho * op)` for a dense operator.
pub fn expectation(rho: &DensityMatrix, op: &DMatrix<C64>) -> Result<C64> {
    if op.nrows() != rho.dim() || op.ncols() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: op.nrows().max(op.ncols()),
        });
    }
    Ok((&rho.data * op).trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn enumeration_and_dimension() {
        for n in 0..15 {
            let b = FockBasis::new(n);
            assert_eq!(b.dim(), (n + 1) * (n + 2) / 2);
            for (i, &(n1, n2)) in b.states().iter().enumerate() {
                assert_eq!(b.index(n1, n2), Some(i));
            }
        }
        let b = FockBasis::new(2);
        assert_eq!(
            b.states(),
            &[(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
        );
        assert_eq!(b.index(2, 1), None);
    }

    #[test]
    fn smallest_basis_ladder_entries() {
        let b = FockBasis::new(1);
        let ops = build_operators(&b);
        assert_eq!(ops.psi1.entries(), &[(0, 1, 1.0)]);
        assert_eq!(ops.psi2.entries(), &[(0, 2, 1.0)]);
        let d = ops.psi1.to_dense();
        assert_eq!(d[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(d.iter().filter(|z| z.norm() != 0.0).count(), 1);
    }

    #[test]
    fn number_operators_are_diagonal() {
        let b = FockBasis::new(6);
        let ops = build_operators(&b);
        let n1 = ops.number1().to_dense();
        let n2 = ops.number2().to_dense();
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                let (want1, want2) = if i == j {
                    (b.states()[i].0 as f64, b.states()[i].1 as f64)
                } else {
                    (0.0, 0.0)
                };
                assert!((n1[(i, j)].re - want1).abs() < 1e-12);
                assert!((n2[(i, j)].re - want2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn distinct_modes_commute() {
        let b = FockBasis::new(5);
        let ops = build_operators(&b);
        // annihilators commute on the whole truncated space
        let a = ops.psi1.to_dense() * ops.psi2.to_dense();
        let c = ops.psi2.to_dense() * ops.psi1.to_dense();
        assert!((a - c).iter().all(|z| z.norm() < 1e-12));
        // psi1 psi2† only below the top shell, where psi2† stays in the space
        let a = ops.psi1.to_dense() * ops.psi2_dag.to_dense();
        let c = ops.psi2_dag.to_dense() * ops.psi1.to_dense();
        let diff = a - c;
        for (j, &(n1, n2)) in b.states().iter().enumerate() {
            let col_ok = diff.column(j).iter().all(|z| z.norm() < 1e-12);
            assert_eq!(col_ok, n1 + n2 < b.n_cap() || n1 == 0, "state {n1},{n2}");
        }
    }

    #[test]
    fn canonical_commutator_below_the_cap() {
        let b = FockBasis::new(6);
        let ops = build_operators(&b);
        let pairs = [
            (&ops.psi1, &ops.psi1_dag, 1.0),
            (&ops.psi2, &ops.psi2_dag, 1.0),
            (&ops.psi1, &ops.psi2_dag, 0.0),
            (&ops.psi2, &ops.psi1_dag, 0.0),
        ];
        for (a, ad, delta) in pairs {
            let comm = a.to_dense() * ad.to_dense() - ad.to_dense() * a.to_dense();
            for (i, &(n1, n2)) in b.states().iter().enumerate() {
                if n1 + n2 >= b.n_cap() {
                    continue;
                }
                for j in 0..b.dim() {
                    let want = if i == j { delta } else { 0.0 };
                    // entries are sums of products of square roots of integers
                    assert_eq!(comm[(i, j)].re.round(), want);
                    assert!((comm[(i, j)].re - want).abs() < 1e-12);
                    assert_eq!(comm[(i, j)].im, 0.0);
                }
            }
        }
    }

    #[test]
    fn sparse_products_match_dense() {
        let b = FockBasis::new(4);
        let ops = build_operators(&b);
        let m = DMatrix::from_fn(b.dim(), b.dim(), |i, j| {
            C64::new((i * 3 + j) as f64 * 0.1, (i as f64 - j as f64) * 0.07)
        });
        let scale = C64::new(0.3, -1.2);
        let mut left = DMatrix::zeros(b.dim(), b.dim());
        ops.psi1.mul_left_acc(scale, &m, &mut left);
        let want = ops.psi1.to_dense() * &m * scale;
        assert!((left - want).iter().all(|z| z.norm() < 1e-13));
        let mut right = DMatrix::zeros(b.dim(), b.dim());
        ops.psi2.mul_adjoint_right_acc(&m, &mut right);
        let want = &m * ops.psi2_dag.to_dense();
        assert!((right - want).iter().all(|z| z.norm() < 1e-13));
        let hop = ops.psi1_dag.compose(&ops.psi2);
        let want = ops.psi1_dag.to_dense() * ops.psi2.to_dense();
        assert!((hop.to_dense() - want).iter().all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn vacuum_state_and_expectations() {
        let b = FockBasis::new(3);
        let ops = build_operators(&b);
        let rho = coherent_state(&b, C64::new(0.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        assert_eq!(rho, DensityMatrix::vacuum(&b));
        assert_eq!(
            expectation(&rho, &ops.number1().to_dense()).unwrap(),
            C64::new(0.0, 0.0)
        );
        let id = DMatrix::identity(b.dim(), b.dim());
        assert!((expectation(&rho, &id).unwrap() - 1.0).norm() < 1e-15);
        let wrong = DMatrix::identity(b.dim() + 1, b.dim() + 1);
        assert!(matches!(
            expectation(&rho, &wrong),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn coherent_state_needs_enough_excitations() {
        let b = FockBasis::new(3);
        assert!(matches!(
            coherent_state(&b, C64::new(1.5, 0.0), C64::new(0.0, 0.0)),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn pure_state_spectrum_is_finite() {
        let b = FockBasis::new(12);
        for phi in [
            C64::new(0.7071, 0.0),
            C64::new(0.5, 0.3),
            C64::new(0.0, 0.0),
        ] {
            let rho = coherent_state(&b, C64::new(0.0, 0.0), phi).unwrap();
            let m = rho.min_eigenvalue();
            assert!(m.is_finite() && m.abs() <= 1e-12, "{phi}: {m}");
        }
    }

    proptest! {
        #[test]
        fn coherent_state_eigenvalue_property(
            r1 in 0.0..0.5f64, t1 in 0.0..std::f64::consts::TAU,
            r2 in 0.0..0.5f64, t2 in 0.0..std::f64::consts::TAU,
        ) {
            let b = FockBasis::new(12);
            let ops = build_operators(&b);
            let (phi1, phi2) = (C64::from_polar(r1, t1), C64::from_polar(r2, t2));
            let rho = coherent_state(&b, phi1, phi2).unwrap();
            prop_assert!((ops.psi1.expectation(&rho) - phi1).norm() <= 1e-7);
            prop_assert!((ops.psi2.expectation(&rho) - phi2).norm() <= 1e-7);
            let dense = expectation(&rho, &ops.psi2.to_dense()).unwrap();
            prop_assert!((dense - phi2).norm() <= 1e-7);
            prop_assert!((rho.purity() - 1.0).abs() <= 1e-10);
            prop_assert!((rho.trace() - 1.0).norm() <= 1e-12);
        }
    }
}

//! Dense complex matrices on the 12-level register and the row-major
//! straightening used for superoperators.
//!
//! `vec(ρ)[a·12 + b] = ρ[a, b]`, so that `vec(AρB) = (A ⊗ Bᵀ) vec(ρ)` and in
//! particular `vec(EρE†) = (E ⊗ E*) vec(ρ)`.

use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use num_complex::Complex64;
use thiserror::Error;

pub const DIM: usize = 12;
pub const SUPER_DIM: usize = DIM * DIM;

pub type Matrix12 = SMatrix<Complex64, DIM, DIM>;
pub type Vector12 = SVector<Complex64, DIM>;
/// Heap-allocated: 144×144 complex is too large for the stack.
pub type SuperMatrix = DMatrix<Complex64>;

/// Tolerance on Hermiticity, trace and positivity when validating inputs.
pub const DENSITY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("density matrix is not Hermitian (max |ρ − ρ†| = {0:e})")]
    NotHermitian(f64),
    #[error("density matrix trace is {0}, expected 1")]
    TraceNotOne(f64),
    #[error("density matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("density matrix contains non-finite entries")]
    NonFinite,
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn vectorize(rho: &Matrix12) -> DVector<Complex64> {
    DVector::from_fn(SUPER_DIM, |i, _| rho[(i / DIM, i % DIM)])
}

pub fn unvectorize(v: &DVector<Complex64>) -> Matrix12 {
    assert_eq!(v.len(), SUPER_DIM, "expected a length-144 vector");
    Matrix12::from_fn(|a, b| v[a * DIM + b])
}

/// `A ⊗ conj(B)` in the row-major convention.
pub fn kron_conj(a: &Matrix12, b: &Matrix12) -> SuperMatrix {
    SuperMatrix::from_fn(SUPER_DIM, SUPER_DIM, |r, col| {
        a[(r / DIM, col / DIM)] * b[(r % DIM, col % DIM)].conj()
    })
}

pub fn projector(psi: &Vector12) -> Matrix12 {
    psi * psi.adjoint()
}

/// max |A − A†| over entries.
pub fn hermiticity_defect<R, C2, S>(m: &nalgebra::Matrix<Complex64, R, C2, S>) -> f64
where
    R: nalgebra::Dim,
    C2: nalgebra::Dim,
    S: nalgebra::RawStorage<Complex64, R, C2>,
{
    let (rows, cols) = m.shape();
    assert_eq!(rows, cols);
    let mut worst = 0.0f64;
    for i in 0..rows {
        for j in i..cols {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(m: &Matrix12) -> Matrix12 {
    (m + m.adjoint()).scale(0.5)
}

/// Smallest eigenvalue of the Hermitian part of a square matrix.
pub fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    let h = (m + m.adjoint()).scale(0.5);
    h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn max_abs_diff<R, C2, S1, S2>(
    a: &nalgebra::Matrix<Complex64, R, C2, S1>,
    b: &nalgebra::Matrix<Complex64, R, C2, S2>,
) -> f64
where
    R: nalgebra::Dim,
    C2: nalgebra::Dim,
    S1: nalgebra::RawStorage<Complex64, R, C2>,
    S2: nalgebra::RawStorage<Complex64, R, C2>,
{
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Checks Hermiticity, unit trace and positivity, each to [`DENSITY_TOL`].
pub fn validate_density(rho: &Matrix12) -> Result<(), DensityError> {
    if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(DensityError::NonFinite);
    }
    let herm = hermiticity_defect(rho);
    if herm > DENSITY_TOL {
        return Err(DensityError::NotHermitian(herm));
    }
    let tr = rho.trace();
    if (tr - Complex64::new(1.0, 0.0)).norm() > DENSITY_TOL {
        return Err(DensityError::TraceNotOne(tr.re));
    }
    let min = hermitian_part(rho)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min < -DENSITY_TOL {
        return Err(DensityError::NotPositive(min));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(seed: u64) -> Matrix12 {
        // small deterministic LCG, enough for algebraic identities
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        Matrix12::from_fn(|_, _| c(next(), next()))
    }

    #[test]
    fn vec_round_trip_is_row_major() {
        let m = sample(1);
        let v = vectorize(&m);
        assert_eq!(v[13], m[(1, 1)]);
        assert_eq!(v[1], m[(0, 1)]);
        assert_eq!(unvectorize(&v), m);
    }

    #[test]
    fn vec_of_conjugation_is_kron_with_conjugate() {
        let e = sample(2);
        let rho = sample(3);
        let lhs = vectorize(&(e * rho * e.adjoint()));
        let rhs = kron_conj(&e, &e) * vectorize(&rho);
        assert!(max_abs_diff(&lhs, &rhs) < 1e-13);
        // general two-sided product: vec(AρB) = (A ⊗ Bᵀ) vec(ρ)
        let b = sample(4);
        let lhs = vectorize(&(e * rho * b));
        let rhs = kron_conj(&e, &b.adjoint()) * vectorize(&rho);
        assert!(max_abs_diff(&lhs, &rhs) < 1e-13);
    }

    #[test]
    fn validation_names_the_violation() {
        let mut psi = Vector12::zeros();
        psi[3] = c(1.0, 0.0);
        assert!(validate_density(&projector(&psi)).is_ok());

        let mut bad = projector(&psi);
        bad[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(validate_density(&bad), Err(DensityError::NotHermitian(_))));

        let half = projector(&psi).scale(0.5);
        assert!(matches!(validate_density(&half), Err(DensityError::TraceNotOne(_))));

        let mut neg = Matrix12::zeros();
        neg[(0, 0)] = c(1.5, 0.0);
        neg[(1, 1)] = c(-0.5, 0.0);
        assert!(matches!(validate_density(&neg), Err(DensityError::NotPositive(_))));
    }
}

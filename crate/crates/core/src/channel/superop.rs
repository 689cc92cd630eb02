use super::kraus::KrausFamily;
use crate::field::CompensatedComplex;
use crate::linalg::{min_eigenvalue, unvectorize, vectorize, Matrix12, SuperMatrix, DIM, SUPER_DIM};
use num_complex::Complex64;

/// A linear map on 12×12 matrices acting on row-major `vec(ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    matrix: SuperMatrix,
}

impl Superoperator {
    pub fn identity() -> Self {
        Superoperator {
            matrix: SuperMatrix::identity(SUPER_DIM, SUPER_DIM),
        }
    }

    pub fn from_matrix(matrix: SuperMatrix) -> Self {
        assert_eq!(matrix.shape(), (SUPER_DIM, SUPER_DIM), "superoperators are 144×144");
        Superoperator { matrix }
    }

    /// Σ_k E_k ⊗ conj(E_k). Each entry is accumulated over k in ascending
    /// order with compensation.
    pub fn from_kraus(family: &KrausFamily) -> Self {
        let mut acc = vec![CompensatedComplex::default(); SUPER_DIM * SUPER_DIM];
        for (_, e) in family.iter() {
            for &(a, c, x) in &e.entries {
                for &(b, d, y) in &e.entries {
                    let row = a * DIM + b;
                    let col = c * DIM + d;
                    acc[row * SUPER_DIM + col].add(x * y.conj());
                }
            }
        }
        let matrix = SuperMatrix::from_fn(SUPER_DIM, SUPER_DIM, |r, c| acc[r * SUPER_DIM + c].value());
        Superoperator { matrix }
    }

    pub fn from_unitary(u: &Matrix12) -> Self {
        Self::from_kraus(&KrausFamily::from_unitary(u))
    }

    pub fn matrix(&self) -> &SuperMatrix {
        &self.matrix
    }

    /// `other ∘ self`: first `self`, then `other`.
    pub fn then(&self, other: &Superoperator) -> Superoperator {
        Superoperator {
            matrix: &other.matrix * &self.matrix,
        }
    }

    pub fn apply(&self, rho: &Matrix12) -> Matrix12 {
        unvectorize(&(&self.matrix * vectorize(rho)))
    }

    /// max over inputs |i⟩⟨j| of |Tr Φ(|i⟩⟨j|) − δᵢⱼ|.
    pub fn trace_preservation_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for col in 0..SUPER_DIM {
            let mut tr = Complex64::new(0.0, 0.0);
            for a in 0..DIM {
                tr += self.matrix[(a * DIM + a, col)];
            }
            let expected = if col / DIM == col % DIM { 1.0 } else { 0.0 };
            worst = worst.max((tr - expected).norm());
        }
        worst
    }

    /// J = Σᵢⱼ |i⟩⟨j| ⊗ Φ(|i⟩⟨j|), trace 12 for a trace-preserving map.
    pub fn choi_matrix(&self) -> SuperMatrix {
        SuperMatrix::from_fn(SUPER_DIM, SUPER_DIM, |r, c| {
            let (i, a) = (r / DIM, r % DIM);
            let (j, b) = (c / DIM, c % DIM);
            self.matrix[(a * DIM + b, i * DIM + j)]
        })
    }

    pub fn choi_min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.choi_matrix())
    }

    pub fn max_abs_diff(&self, other: &Superoperator) -> f64 {
        crate::linalg::max_abs_diff(&self.matrix, &other.matrix)
    }
}

use super::ChannelError;
use crate::dynamics::{pulse_action, BasisIndex, Pulse};
use crate::field::{CompensatedComplex, Window};
use crate::linalg::{Matrix12, DIM};
use num_complex::Complex64;

/// Nonzero entries `(row, col, value)` of a 12×12 operator.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseOp {
    pub entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOp {
    pub fn from_dense(m: &Matrix12) -> Self {
        let mut entries = Vec::new();
        for col in 0..DIM {
            for row in 0..DIM {
                let v = m[(row, col)];
                if v != Complex64::new(0.0, 0.0) {
                    entries.push((row, col, v));
                }
            }
        }
        SparseOp { entries }
    }

    pub fn to_dense(&self) -> Matrix12 {
        let mut m = Matrix12::zeros();
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds `E ρ E†` to `out`.
    pub fn conjugate_into(&self, rho: &Matrix12, out: &mut Matrix12) {
        let mut e_rho = Matrix12::zeros();
        for &(a, c, v) in &self.entries {
            for j in 0..DIM {
                e_rho[(a, j)] += v * rho[(c, j)];
            }
        }
        for &(b, d, v) in &self.entries {
            let w = v.conj();
            for i in 0..DIM {
                out[(i, b)] += e_rho[(i, d)] * w;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Pulse(Pulse),
    Unitary(Box<Matrix12>),
}

/// Kraus operators of one step, indexed by the final Fock number of the
/// step's field mode. Operators are regenerated on demand from the pulse, so
/// a family over a window of 10⁵ indices costs no storage.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausFamily {
    source: Source,
    indices: Window,
    completeness_defect: f64,
    tail_eps: f64,
}

impl KrausFamily {
    /// Traces the pulse's field mode out of the exact joint evolution.
    ///
    /// Fails when ΣE†E misses the identity by more than ten times the field's
    /// certified tail (plus rounding slack).
    pub fn from_pulse(pulse: &Pulse) -> Result<Self, ChannelError> {
        Self::from_pulse_with_budget(pulse, pulse.field.tail_eps())
    }

    /// As [`from_pulse`](Self::from_pulse) with the defect limited by
    /// `10 · budget` instead of the field's own tail bound.
    pub fn from_pulse_with_budget(pulse: &Pulse, budget: f64) -> Result<Self, ChannelError> {
        let w = pulse.field.window();
        let indices = Window::new(w.lo.saturating_sub(1), w.hi + 1);
        let mut family = KrausFamily {
            source: Source::Pulse(*pulse),
            indices,
            completeness_defect: 0.0,
            tail_eps: pulse.field.tail_eps(),
        };
        family.completeness_defect = family.measure_completeness();
        let allowed = 10.0 * budget + 100.0 * f64::EPSILON;
        if family.completeness_defect > allowed {
            return Err(ChannelError::IncompleteKraus {
                defect: family.completeness_defect,
                allowed,
            });
        }
        Ok(family)
    }

    /// Single-operator family of a unitary conjugation.
    pub fn from_unitary(u: &Matrix12) -> Self {
        let mut family = KrausFamily {
            source: Source::Unitary(Box::new(*u)),
            indices: Window::new(0, 0),
            completeness_defect: 0.0,
            tail_eps: 0.0,
        };
        family.completeness_defect = family.measure_completeness();
        family
    }

    pub fn is_unitary(&self) -> bool {
        matches!(self.source, Source::Unitary(_))
    }

    /// Range of Kraus indices; operators outside it vanish.
    pub fn indices(&self) -> Window {
        self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Operator-norm distance of ΣE†E from the identity.
    pub fn completeness_defect(&self) -> f64 {
        self.completeness_defect
    }

    pub fn tail_eps(&self) -> f64 {
        self.tail_eps
    }

    /// E_k = Σₙ cₙ ⟨k| U |n⟩; only n ∈ {k−1, k, k+1} contribute.
    pub fn operator(&self, k: u64) -> SparseOp {
        match &self.source {
            Source::Unitary(u) => {
                if k == self.indices.lo {
                    SparseOp::from_dense(u)
                } else {
                    SparseOp::default()
                }
            }
            Source::Pulse(pulse) => {
                let field = &pulse.field;
                let window = field.window();
                let mut e = Matrix12::zeros();
                for n in k.saturating_sub(1)..=k + 1 {
                    if !window.contains(n) {
                        continue;
                    }
                    let cn = field.amplitude(n);
                    for s in BasisIndex::all() {
                        let action = pulse_action(pulse, s, n);
                        for branch in std::iter::once(action.stay).chain(action.flip) {
                            if branch.n == k {
                                e[(branch.state.index(), s.index())] += branch.amplitude * cn;
                            }
                        }
                    }
                }
                SparseOp::from_dense(&e)
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, SparseOp)> + '_ {
        self.indices.iter().map(move |k| (k, self.operator(k)))
    }

    /// Σ_k E_k ρ E_k†.
    pub fn apply(&self, rho: &Matrix12) -> Matrix12 {
        let mut out = Matrix12::zeros();
        for (_, e) in self.iter() {
            e.conjugate_into(rho, &mut out);
        }
        out
    }

    /// Σ_k E_k†E_k, accumulated with compensation.
    pub fn completeness_sum(&self) -> Matrix12 {
        let mut acc = vec![CompensatedComplex::default(); DIM * DIM];
        for (_, e) in self.iter() {
            for &(a, c, x) in &e.entries {
                for &(a2, d, y) in &e.entries {
                    if a == a2 {
                        acc[c * DIM + d].add(x.conj() * y);
                    }
                }
            }
        }
        Matrix12::from_fn(|i, j| acc[i * DIM + j].value())
    }

    fn measure_completeness(&self) -> f64 {
        let defect = self.completeness_sum() - Matrix12::identity();
        let herm = (defect + defect.adjoint()).scale(0.5);
        herm.symmetric_eigenvalues().iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

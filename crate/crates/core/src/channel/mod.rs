//! Per-step Kraus families, their superoperators and the one-gate channel
//! `M = M₅M₄M₃M₂M₁`, plus its repeated application.

mod kraus;
mod superop;

pub use kraus::{KrausFamily, SparseOp};
pub use superop::Superoperator;

use crate::dynamics::{ideal_pulse, DynamicsError, Protocol};
use crate::field::Window;
use crate::linalg::{
    hermitian_part, hermiticity_defect, validate_density, vectorize, unvectorize, DensityError, Matrix12, DIM,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("Kraus family incomplete: defect {defect:e} exceeds {allowed:e}; widen the field window")]
    IncompleteKraus { defect: f64, allowed: f64 },
    #[error("invalid initial density matrix: {0}")]
    InvalidDensity(#[from] DensityError),
    #[error("invalid mask '{0}': expected five 0/1 flags such as 01110 or 0,1,1,1,0")]
    InvalidMask(String),
    #[error("protocol has {0} steps, the mask has 5")]
    StepCount(usize),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Per step: `true` uses the quantized-field channel, `false` the ideal
/// unitary conjugation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantizedMask(pub [bool; 5]);

impl QuantizedMask {
    pub const ALL_QUANTIZED: QuantizedMask = QuantizedMask([true; 5]);
    pub const ALL_IDEAL: QuantizedMask = QuantizedMask([false; 5]);
    /// Carrier steps ideal, sideband steps quantized.
    pub const SIDEBAND_LIMITED: QuantizedMask = QuantizedMask([false, true, true, true, false]);
}

impl FromStr for QuantizedMask {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quantized" | "all" => return Ok(Self::ALL_QUANTIZED),
            "ideal" | "none" => return Ok(Self::ALL_IDEAL),
            "sideband" | "sideband-limited" => return Ok(Self::SIDEBAND_LIMITED),
            _ => {}
        }
        let flags: Vec<char> = s.chars().filter(|c| !matches!(c, ',' | ' ')).collect();
        if flags.len() != 5 {
            return Err(ChannelError::InvalidMask(s.to_string()));
        }
        let mut mask = [false; 5];
        for (m, c) in mask.iter_mut().zip(&flags) {
            *m = match c {
                '1' => true,
                '0' => false,
                _ => return Err(ChannelError::InvalidMask(s.to_string())),
            };
        }
        Ok(QuantizedMask(mask))
    }
}

impl fmt::Display for QuantizedMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", b as u8)?;
        }
        Ok(())
    }
}

/// Kraus family of one protocol step under the mask.
pub fn step_families(protocol: &Protocol, mask: QuantizedMask) -> Result<Vec<KrausFamily>, ChannelError> {
    if protocol.steps.len() != 5 {
        return Err(ChannelError::StepCount(protocol.steps.len()));
    }
    protocol
        .steps
        .iter()
        .zip(mask.0)
        .map(|(pulse, quantized)| {
            if quantized {
                KrausFamily::from_pulse(pulse)
            } else {
                Ok(KrausFamily::from_unitary(&ideal_pulse(pulse)))
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StepMode {
    Ideal,
    Quantized,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepSummary {
    pub step: usize,
    pub mode: StepMode,
    pub nbar: f64,
    pub window: Option<Window>,
    pub tail_eps: f64,
    pub kraus_operators: usize,
    pub completeness_defect: f64,
}

/// The one-gate superoperator together with how each step was built.
#[derive(Debug, Clone)]
pub struct Gate {
    pub superop: Superoperator,
    pub steps: Vec<StepSummary>,
    pub mask: QuantizedMask,
}

pub fn build_gate(protocol: &Protocol, mask: QuantizedMask) -> Result<Gate, ChannelError> {
    let families = step_families(protocol, mask)?;
    let mut superop = Superoperator::identity();
    let mut steps = Vec::with_capacity(families.len());
    for (i, (family, pulse)) in families.iter().zip(&protocol.steps).enumerate() {
        superop = superop.then(&Superoperator::from_kraus(family));
        let quantized = !family.is_unitary();
        steps.push(StepSummary {
            step: i + 1,
            mode: if quantized { StepMode::Quantized } else { StepMode::Ideal },
            nbar: pulse.field.nbar(),
            window: quantized.then(|| pulse.field.window()),
            tail_eps: family.tail_eps(),
            kraus_operators: family.len(),
            completeness_defect: family.completeness_defect(),
        });
    }
    Ok(Gate { superop, steps, mask })
}

/// `M₅M₄M₃M₂M₁` from the per-step `Σ E ⊗ E*`.
pub fn gate_superop(protocol: &Protocol, mask: QuantizedMask) -> Result<Superoperator, ChannelError> {
    build_gate(protocol, mask).map(|g| g.superop)
}

/// Reconstructs the gate superoperator column by column: each matrix unit
/// |i⟩⟨j| is written as ¼ Σₚ iᵖ ρₚ with ρₚ the projector on |i⟩ + iᵖ|j⟩, and
/// every ρₚ is pushed through the step channels as a density matrix.
pub fn superop_by_coefficient_matching(
    protocol: &Protocol,
    mask: QuantizedMask,
) -> Result<Superoperator, ChannelError> {
    let families = step_families(protocol, mask)?;
    let propagate = |rho: Matrix12| families.iter().fold(rho, |r, f| f.apply(&r));
    let basis = |i: usize| {
        let mut v = crate::linalg::Vector12::zeros();
        v[i] = Complex64::new(1.0, 0.0);
        v
    };
    let powers = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    let mut m = crate::linalg::SuperMatrix::zeros(DIM * DIM, DIM * DIM);
    let mut set_column = |i: usize, j: usize, image: &Matrix12| {
        let col = vectorize(image);
        m.set_column(i * DIM + j, &col);
    };
    for i in 0..DIM {
        let e = basis(i);
        set_column(i, i, &propagate(e * e.adjoint()));
        for j in i + 1..DIM {
            let images: Vec<Matrix12> = powers
                .iter()
                .map(|&ph| {
                    let psi = basis(i) + basis(j) * ph;
                    propagate(psi * psi.adjoint())
                })
                .collect();
            let mut upper = Matrix12::zeros();
            let mut lower = Matrix12::zeros();
            for (img, &ph) in images.iter().zip(&powers) {
                upper += img * ph;
                lower += img * ph.conj();
            }
            set_column(i, j, &upper.scale(0.25));
            set_column(j, i, &lower.scale(0.25));
        }
    }
    Ok(Superoperator::from_matrix(m))
}

/// State after `t` gate applications with its numerical diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Evolved {
    pub t: u64,
    /// Hermitian part of the iterate.
    pub rho: Matrix12,
    /// |Tr ρ − 1|; the trace is never renormalized.
    pub trace_defect: f64,
    /// Largest anti-Hermitian residue removed so far.
    pub hermiticity_defect: f64,
}

/// Visits ρ⁽⁰⁾, ρ⁽¹⁾, …, ρ⁽ᵗ⁾ with ρ⁽ᵗ⁾ = unvec(Mᵗ vec ρ⁽⁰⁾), computed by
/// repeated multiplication. Each iterate is replaced by its Hermitian part.
pub fn evolve<F>(m: &Superoperator, rho0: &Matrix12, t_max: u64, mut visit: F) -> Result<Evolved, ChannelError>
where
    F: FnMut(&Evolved),
{
    validate_density(rho0)?;
    let mut state = Evolved {
        t: 0,
        rho: *rho0,
        trace_defect: (rho0.trace() - 1.0).norm(),
        hermiticity_defect: 0.0,
    };
    visit(&state);
    let mut v = vectorize(rho0);
    for t in 1..=t_max {
        v = m.matrix() * &v;
        let raw = unvectorize(&v);
        let herm = hermiticity_defect(&raw);
        let rho = hermitian_part(&raw);
        v = vectorize(&rho);
        state = Evolved {
            t,
            rho,
            trace_defect: (rho.trace() - 1.0).norm(),
            hermiticity_defect: state.hermiticity_defect.max(herm),
        };
        visit(&state);
    }
    Ok(state)
}

pub fn apply_n(m: &Superoperator, rho0: &Matrix12, t: u64) -> Result<Evolved, ChannelError> {
    evolve(m, rho0, t, |_| {})
}

/// Channel diagnostics in serializable form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelReport {
    pub protocol: String,
    pub mask: String,
    pub steps: Vec<StepSummary>,
    pub trace_preservation_defect: f64,
    pub choi_min_eigenvalue: f64,
    pub choi_trace: f64,
    pub max_completeness_defect: f64,
}

impl ChannelReport {
    pub fn new(protocol: &Protocol, gate: &Gate) -> Self {
        let choi = gate.superop.choi_matrix();
        ChannelReport {
            protocol: protocol.name.clone(),
            mask: gate.mask.to_string(),
            steps: gate.steps.clone(),
            trace_preservation_defect: gate.superop.trace_preservation_defect(),
            choi_min_eigenvalue: crate::linalg::min_eigenvalue(&choi),
            choi_trace: choi.trace().re,
            max_completeness_defect: gate.steps.iter().map(|s| s.completeness_defect).fold(0.0, f64::max),
        }
    }
}

//! Brute-force reference: the register evolved jointly with all five field
//! modes, then the fields traced out.
//!
//! Two evaluation strategies share the same per-mode amplitude tables, built
//! directly from [`pulse_action`]:
//!
//! * [`evolve_full`] keeps the dense joint state vector. Its size is the
//!   product of the mode dimensions, so it is capped at [`MAX_AMPLITUDES`].
//! * [`reduced_density_enumerated`] walks the final Fock configurations
//!   depth first. Each field mode interacts in exactly one step, so the
//!   register state conditioned on (k₁, …, kᵢ) is a 12-vector, and memory
//!   stays O(depth · window).

use crate::dynamics::{pulse_action, BasisIndex, PulseAction, Protocol};
use crate::channel::Superoperator;
use crate::field::{CompensatedComplex, Window};
use crate::linalg::{vectorize, Matrix12, SuperMatrix, Vector12, DIM, SUPER_DIM};
use num_complex::Complex64;
use thiserror::Error;

pub const MAX_AMPLITUDES: usize = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("joint state would hold {amplitudes} amplitudes, above the cap of {cap}")]
    TooLarge { amplitudes: u128, cap: usize },
}

/// Amplitudes of one pulse on `|s⟩|n⟩` for every retained n.
struct ModeTable {
    window: Window,
    /// Range of final Fock indices, one wider than the window on each side.
    out: Window,
    coeff: Vec<f64>,
    actions: Vec<[PulseAction<BasisIndex>; DIM]>,
}

impl ModeTable {
    fn new(pulse: &crate::dynamics::Pulse) -> Self {
        let window = pulse.field.window();
        let coeff = window.iter().map(|n| pulse.field.amplitude(n)).collect();
        let actions = window
            .iter()
            .map(|n| std::array::from_fn(|s| pulse_action(pulse, BasisIndex::from_index(s).unwrap(), n)))
            .collect();
        ModeTable {
            window,
            out: Window::new(window.lo.saturating_sub(1), window.hi + 1),
            coeff,
            actions,
        }
    }

    fn out_len(&self) -> usize {
        self.out.len() as usize
    }

    /// Register states conditioned on each final Fock index, given the
    /// register state `v` before the pulse and the mode in its coherent state.
    fn expand(&self, v: &Vector12, children: &mut [Vector12]) {
        for c in children.iter_mut() {
            c.fill(Complex64::new(0.0, 0.0));
        }
        for (cn, actions) in self.coeff.iter().zip(&self.actions) {
            for s in 0..DIM {
                let amp = v[s];
                if amp == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let a = &actions[s];
                let w = amp * *cn;
                children[(a.stay.n - self.out.lo) as usize][a.stay.state.index()] += a.stay.amplitude * w;
                if let Some(f) = a.flip {
                    children[(f.n - self.out.lo) as usize][f.state.index()] += f.amplitude * w;
                }
            }
        }
    }
}

/// Dense state of the register ⊗ five field modes. Layout: register index
/// fastest, then mode 1, …, mode 5, each over its output range.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    ranges: Vec<Window>,
    amplitudes: Vec<Complex64>,
}

impl JointState {
    pub fn mode_ranges(&self) -> &[Window] {
        &self.ranges
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Amplitude of `|s⟩|k₁ … k₅⟩`; zero outside the stored ranges.
    pub fn amplitude(&self, s: usize, ks: &[u64]) -> Complex64 {
        let mut idx = 0usize;
        let mut stride = DIM;
        for (k, r) in ks.iter().zip(&self.ranges) {
            if !r.contains(*k) {
                return Complex64::new(0.0, 0.0);
            }
            idx += (k - r.lo) as usize * stride;
            stride *= r.len() as usize;
        }
        self.amplitudes[s + idx]
    }
}

/// Evolves `initial` ⊗ (coherent states of the five pulse fields) through the
/// protocol as one state vector.
pub fn evolve_full(protocol: &Protocol, initial: &Vector12) -> Result<JointState, OracleError> {
    let tables: Vec<ModeTable> = protocol.steps.iter().map(ModeTable::new).collect();
    let size = tables.iter().fold(DIM as u128, |acc, t| acc * t.out_len() as u128);
    if size > MAX_AMPLITUDES as u128 {
        return Err(OracleError::TooLarge {
            amplitudes: size,
            cap: MAX_AMPLITUDES,
        });
    }
    let size = size as usize;
    let ranges: Vec<Window> = tables.iter().map(|t| t.out).collect();
    let mut strides = Vec::with_capacity(tables.len());
    let mut stride = DIM;
    for t in &tables {
        strides.push(stride);
        stride *= t.out_len();
    }

    // product initial state
    let mut amps = vec![Complex64::new(0.0, 0.0); size];
    for flat in (0..size).step_by(DIM) {
        let mut weight = 1.0;
        for (t, &st) in tables.iter().zip(&strides) {
            let k = t.out.lo + ((flat / st) % t.out_len()) as u64;
            weight *= if t.window.contains(k) { t.coeff[(k - t.window.lo) as usize] } else { 0.0 };
            if weight == 0.0 {
                break;
            }
        }
        if weight != 0.0 {
            for s in 0..DIM {
                amps[flat + s] = initial[s] * weight;
            }
        }
    }

    for (t, &st) in tables.iter().zip(&strides) {
        let mut next = vec![Complex64::new(0.0, 0.0); size];
        for (flat, &amp) in amps.iter().enumerate() {
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let s = flat % DIM;
            let k = t.out.lo + ((flat / st) % t.out_len()) as u64;
            // this mode is still in its coherent state: k lies in the window
            let a = &t.actions[(k - t.window.lo) as usize][s];
            let base = flat - s - (k - t.out.lo) as usize * st;
            let target = |n: u64, state: BasisIndex| base + (n - t.out.lo) as usize * st + state.index();
            next[target(a.stay.n, a.stay.state)] += a.stay.amplitude * amp;
            if let Some(f) = a.flip {
                next[target(f.n, f.state)] += f.amplitude * amp;
            }
        }
        amps = next;
    }
    Ok(JointState {
        ranges,
        amplitudes: amps,
    })
}

/// Partial trace over all field modes.
pub fn reduced_density(joint: &JointState) -> Matrix12 {
    let mut acc = vec![CompensatedComplex::default(); DIM * DIM];
    for chunk in joint.amplitudes.chunks_exact(DIM) {
        if chunk.iter().all(|a| *a == Complex64::new(0.0, 0.0)) {
            continue;
        }
        for a in 0..DIM {
            for b in 0..DIM {
                acc[a * DIM + b].add(chunk[a] * chunk[b].conj());
            }
        }
    }
    Matrix12::from_fn(|a, b| acc[a * DIM + b].value())
}

/// Same quantity as `reduced_density(evolve_full(..))` without materializing
/// the joint state.
pub fn reduced_density_enumerated(protocol: &Protocol, initial: &Vector12) -> Matrix12 {
    let tables: Vec<ModeTable> = protocol.steps.iter().map(ModeTable::new).collect();
    let mut buffers: Vec<Vec<Vector12>> = tables.iter().map(|t| vec![Vector12::zeros(); t.out_len()]).collect();
    let mut acc = vec![CompensatedComplex::default(); DIM * DIM];
    descend(&tables, 0, initial, &mut buffers, &mut acc);
    // only the upper triangle was accumulated
    Matrix12::from_fn(|a, b| {
        if a <= b {
            acc[a * DIM + b].value()
        } else {
            acc[b * DIM + a].value().conj()
        }
    })
}

fn descend(
    tables: &[ModeTable],
    depth: usize,
    v: &Vector12,
    buffers: &mut [Vec<Vector12>],
    acc: &mut [CompensatedComplex],
) {
    let (head, rest) = buffers.split_first_mut().expect("one buffer per mode");
    tables[depth].expand(v, head);
    if depth + 1 < tables.len() {
        for child in head.iter() {
            if child.iter().any(|z| *z != Complex64::new(0.0, 0.0)) {
                descend(tables, depth + 1, child, rest, acc);
            }
        }
        return;
    }
    // leaves of one parent are summed plainly, parents with compensation
    let mut local = Matrix12::zeros();
    for child in head.iter() {
        let support: Vec<usize> = (0..DIM).filter(|&s| child[s] != Complex64::new(0.0, 0.0)).collect();
        for (i, &a) in support.iter().enumerate() {
            for &b in &support[i..] {
                local[(a, b)] += child[a] * child[b].conj();
            }
        }
    }
    for a in 0..DIM {
        for b in a..DIM {
            acc[a * DIM + b].add(local[(a, b)]);
        }
    }
}

/// One-gate superoperator from the enumerated oracle, one matrix unit at a
/// time via the polarization identity.
pub fn oracle_superop(protocol: &Protocol) -> Superoperator {
    let propagate = |psi: Vector12| reduced_density_enumerated(protocol, &psi);
    let basis = |i: usize| {
        let mut v = Vector12::zeros();
        v[i] = Complex64::new(1.0, 0.0);
        v
    };
    let powers = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    let mut m = SuperMatrix::zeros(SUPER_DIM, SUPER_DIM);
    for i in 0..DIM {
        m.set_column(i * DIM + i, &vectorize(&propagate(basis(i))));
        for j in i + 1..DIM {
            let mut upper = Matrix12::zeros();
            let mut lower = Matrix12::zeros();
            for &ph in &powers {
                let img = propagate(basis(i) + basis(j) * ph);
                upper += img * ph;
                lower += img * ph.conj();
            }
            m.set_column(i * DIM + j, &vectorize(&upper.scale(0.25)));
            m.set_column(j * DIM + i, &vectorize(&lower.scale(0.25)));
        }
    }
    Superoperator::from_matrix(m)
}

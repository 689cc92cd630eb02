//! Ion-level figures of merit: phonon trace, the expected CNOT image and the
//! failure probability after repeated gate applications.

use crate::channel::{evolve, ChannelError, Superoperator};
use crate::linalg::{projector, Matrix12, Vector12};
use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

pub type Matrix6 = SMatrix<Complex64, 6, 6>;
pub type Vector6 = SVector<Complex64, 6>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("unknown initial state '{name}' (valid: {})", PRESETS.join(", "))]
    UnknownPreset { name: String },
    #[error("initial amplitudes must not all vanish")]
    ZeroAmplitudes,
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

pub const PRESETS: [&str; 6] = ["00", "10", "01", "11", "plus-x", "plus-y"];

/// α₁…α₄ on |00⟩, |10⟩, |01⟩, |11⟩ (control first), phonon in |0⟩.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialQubitState {
    pub label: String,
    #[serde(serialize_with = "serialize_amplitudes")]
    pub amplitudes: [Complex64; 4],
}

fn serialize_amplitudes<S: serde::Serializer>(a: &[Complex64; 4], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(4))?;
    for z in a {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

impl InitialQubitState {
    pub fn preset(name: &str) -> Result<Self, MetricsError> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let h = Complex64::new(r, 0.0);
        let amplitudes = match name {
            "00" => [one, zero, zero, zero],
            "10" => [zero, one, zero, zero],
            "01" => [zero, zero, one, zero],
            "11" => [zero, zero, zero, one],
            "plus-x" => [h, h, zero, zero],
            "plus-y" => [h, zero, h, zero],
            _ => return Err(MetricsError::UnknownPreset { name: name.to_string() }),
        };
        Ok(InitialQubitState {
            label: name.to_string(),
            amplitudes,
        })
    }

    pub fn presets() -> Vec<Self> {
        PRESETS.iter().map(|p| Self::preset(p).unwrap()).collect()
    }

    /// Normalizes `amplitudes`; also returns |‖α‖ − 1| of the input.
    pub fn from_amplitudes(label: &str, amplitudes: [Complex64; 4]) -> Result<(Self, f64), MetricsError> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(MetricsError::ZeroAmplitudes);
        }
        let state = InitialQubitState {
            label: label.to_string(),
            amplitudes: amplitudes.map(|a| a / norm),
        };
        Ok((state, (norm - 1.0).abs()))
    }

    /// Twelve-level embedding with phonon |0⟩ and no auxiliary population.
    pub fn embed(&self) -> Vector12 {
        let mut psi = Vector12::zeros();
        for (i, a) in self.amplitudes.iter().enumerate() {
            psi[i] = *a;
        }
        psi
    }

    pub fn density(&self) -> Matrix12 {
        projector(&self.embed())
    }
}

/// Partial trace over the phonon: ρ′[a, b] = ρ[a, b] + ρ[a+6, b+6].
pub fn trace_out_phonon(rho: &Matrix12) -> Matrix6 {
    Matrix6::from_fn(|a, b| rho[(a, b)] + rho[(a + 6, b + 6)])
}

/// Semiclassical image after `t` gates: identity for even t (t = 0
/// included), α₂ ↔ α₄ for odd t.
pub fn expected_state(initial: &InitialQubitState, t: u64) -> Vector6 {
    let a = initial.amplitudes;
    let ordered = if t.is_multiple_of(2) { a } else { [a[0], a[3], a[2], a[1]] };
    let mut v = Vector6::zeros();
    for (i, z) in ordered.iter().enumerate() {
        v[i] = *z;
    }
    v
}

/// 1 − ⟨ψₑ|Tr_ph ρ|ψₑ⟩.
pub fn failure_from_state(rho: &Matrix12, initial: &InitialQubitState, t: u64) -> f64 {
    let reduced = trace_out_phonon(rho);
    let e = expected_state(initial, t);
    1.0 - (e.adjoint() * reduced * e)[(0, 0)].re
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub t: u64,
    pub nbar: f64,
    pub initial: InitialQubitState,
    pub p_fail: f64,
    pub trace_defect: f64,
    pub hermiticity_defect: f64,
}

/// Failure probabilities for t = 0, 1, …, `t_max`, one gate at a time.
pub fn failure_curve(
    m: &Superoperator,
    nbar: f64,
    initial: &InitialQubitState,
    t_max: u64,
) -> Result<Vec<RunResult>, MetricsError> {
    let mut out = Vec::with_capacity(t_max as usize + 1);
    evolve(m, &initial.density(), t_max, |e| {
        out.push(RunResult {
            t: e.t,
            nbar,
            initial: initial.clone(),
            p_fail: failure_from_state(&e.rho, initial, e.t),
            trace_defect: e.trace_defect,
            hermiticity_defect: e.hermiticity_defect,
        })
    })?;
    Ok(out)
}

pub fn run(m: &Superoperator, nbar: f64, initial: &InitialQubitState, t: u64) -> Result<RunResult, MetricsError> {
    Ok(failure_curve(m, nbar, initial, t)?.pop().expect("curve includes t"))
}

pub fn failure_probability(m: &Superoperator, initial: &InitialQubitState, t: u64) -> Result<f64, MetricsError> {
    Ok(run(m, f64::NAN, initial, t)?.p_fail)
}

/// Least-squares line through the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OriginFit {
    pub slope: f64,
    /// ‖y − slope·x‖ / ‖y‖, zero when y vanishes.
    pub relative_residual: f64,
}

pub fn fit_through_origin(x: &[f64], y: &[f64]) -> Result<OriginFit, MetricsError> {
    if x.len() != y.len() || x.is_empty() {
        return Err(MetricsError::DegenerateGrid("fit needs equally many, nonzero, points".into()));
    }
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    if sxx == 0.0 {
        return Err(MetricsError::DegenerateGrid("all abscissae are zero".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let slope = sxy / sxx;
    let res: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let relative_residual = if norm == 0.0 { 0.0 } else { res / norm };
    Ok(OriginFit {
        slope,
        relative_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeFit {
    pub nbar: f64,
    pub p_fail: Vec<f64>,
    pub fit: OriginFit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioCheck {
    pub nbar_low: f64,
    pub nbar_high: f64,
    /// p_f(n̄_low) / p_f(n̄_high) at the largest t; n̄_high / n̄_low if p_f ∝ 1/n̄.
    pub p_fail_ratio: f64,
    pub nbar_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProportionalityReport {
    pub initial: String,
    pub t_grid: Vec<u64>,
    pub per_nbar: Vec<TimeFit>,
    /// p_f at the largest t against 1/n̄; needs two or more means.
    pub inverse_nbar: Option<OriginFit>,
    pub ratios: Vec<RatioCheck>,
}

/// Fits p_f ∝ t for each channel and p_f ∝ 1/n̄ across channels.
pub fn proportionality_report(
    family: &[(f64, Superoperator)],
    initial: &InitialQubitState,
    t_grid: &[u64],
) -> Result<ProportionalityReport, MetricsError> {
    if t_grid.is_empty() {
        return Err(MetricsError::DegenerateGrid("empty t grid".into()));
    }
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MetricsError::DegenerateGrid("t grid must be strictly ascending".into()));
    }
    if *t_grid.last().unwrap() == 0 {
        return Err(MetricsError::DegenerateGrid("t grid contains only t = 0".into()));
    }
    if family.is_empty() {
        return Err(MetricsError::DegenerateGrid("no channels given".into()));
    }
    let mut sorted: Vec<&(f64, Superoperator)> = family.iter().collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    if sorted.windows(2).any(|w| w[0].0 == w[1].0) || sorted.iter().any(|e| !(e.0 > 0.0)) {
        return Err(MetricsError::DegenerateGrid("means must be positive and distinct".into()));
    }
    let t_max = *t_grid.last().unwrap();
    let ts: Vec<f64> = t_grid.iter().map(|&t| t as f64).collect();
    let mut per_nbar = Vec::new();
    for (nbar, m) in sorted.iter().map(|e| (e.0, &e.1)) {
        let curve = failure_curve(m, nbar, initial, t_max)?;
        let p: Vec<f64> = t_grid.iter().map(|&t| curve[t as usize].p_fail).collect();
        let fit = fit_through_origin(&ts, &p)?;
        per_nbar.push(TimeFit { nbar, p_fail: p, fit });
    }
    let last = |f: &TimeFit| *f.p_fail.last().unwrap();
    let inverse_nbar = if per_nbar.len() >= 2 {
        let x: Vec<f64> = per_nbar.iter().map(|f| 1.0 / f.nbar).collect();
        let y: Vec<f64> = per_nbar.iter().map(last).collect();
        Some(fit_through_origin(&x, &y)?)
    } else {
        None
    };
    let ratios = per_nbar
        .windows(2)
        .map(|w| RatioCheck {
            nbar_low: w[0].nbar,
            nbar_high: w[1].nbar,
            p_fail_ratio: last(&w[0]) / last(&w[1]),
            nbar_ratio: w[1].nbar / w[0].nbar,
        })
        .collect();
    Ok(ProportionalityReport {
        initial: initial.label.clone(),
        t_grid: t_grid.to_vec(),
        per_nbar,
        inverse_nbar,
        ratios,
    })
}

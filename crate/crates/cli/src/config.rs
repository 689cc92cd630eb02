use anyhow::{anyhow, bail, Context, Result};
use czgate::channel::QuantizedMask;
use czgate::metrics::InitialQubitState;
use num_complex::Complex64;
use std::path::PathBuf;

/// Largest accepted gate count; keeps a typo from running for hours.
pub const MAX_T: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Precision {
    Double,
    Extended,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Ascending, without duplicates.
    pub nbar: Vec<f64>,
    /// Ascending, without duplicates.
    pub t: Vec<u64>,
    /// Sorted by label.
    pub initial: Vec<InitialQubitState>,
    pub mask: QuantizedMask,
    pub tail_eps: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl ExperimentConfig {
    pub fn new(
        nbar: &[f64],
        t: &str,
        initial: &str,
        mask: &str,
        tail_eps: f64,
        out: Option<PathBuf>,
        format: Format,
    ) -> Result<Self> {
        Ok(Self {
            nbar: parse_nbar(nbar)?,
            t: parse_times(t)?,
            initial: parse_initial(initial)?,
            mask: mask.parse()?,
            tail_eps: check_tail(tail_eps)?,
            out,
            format,
        })
    }
}

pub fn check_nbar(nbar: f64) -> Result<f64> {
    if nbar > 0.0 && nbar.is_finite() {
        Ok(nbar)
    } else {
        bail!("--nbar must be positive and finite, got {nbar}")
    }
}

pub fn check_tail(eps: f64) -> Result<f64> {
    if eps > 0.0 && eps < 1.0 {
        Ok(eps)
    } else {
        bail!("--tail-eps must lie in (0, 1), got {eps}")
    }
}

pub fn parse_nbar(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        bail!("--nbar needs at least one value");
    }
    let mut v = values.iter().map(|&n| check_nbar(n)).collect::<Result<Vec<_>>>()?;
    v.sort_by(f64::total_cmp);
    v.dedup();
    Ok(v)
}

/// Comma-separated gate counts and inclusive ranges: `100`, `1..100`,
/// `0,5,10..=20`.
pub fn parse_times(spec: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim) {
        let parse = |s: &str| -> Result<u64> {
            s.trim().parse().with_context(|| format!("invalid gate count '{s}' in --t '{spec}'"))
        };
        if let Some((a, b)) = item.split_once("..") {
            let (a, b) = (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?);
            if a > b {
                bail!("empty range '{item}' in --t");
            }
            if b > MAX_T {
                bail!("gate count {b} exceeds the limit {MAX_T}");
            }
            out.extend(a..=b);
        } else {
            let t = parse(item)?;
            if t > MAX_T {
                bail!("gate count {t} exceeds the limit {MAX_T}");
            }
            out.push(t);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Either eight reals (re, im of α₁…α₄, separated by commas or spaces) or a
/// comma-separated list of preset names.
pub fn parse_initial(spec: &str) -> Result<Vec<InitialQubitState>> {
    let fields: Vec<&str> = spec.split([',', ' ']).filter(|s| !s.is_empty()).collect();
    let reals: Vec<f64> = fields.iter().filter_map(|s| s.parse().ok()).collect();
    if fields.len() == 8 && reals.len() == 8 {
        let amps: [Complex64; 4] = std::array::from_fn(|i| Complex64::new(reals[2 * i], reals[2 * i + 1]));
        let (state, defect) = InitialQubitState::from_amplitudes("custom", amps)?;
        if defect > 1e-6 {
            eprintln!("warning: initial amplitudes have norm off by {defect:.3e}; normalized");
        }
        return Ok(vec![state]);
    }
    if fields.is_empty() {
        bail!("--initial needs a preset name or eight amplitudes");
    }
    let mut states = fields
        .iter()
        .map(|name| InitialQubitState::preset(name).map_err(|e| anyhow!(e)))
        .collect::<Result<Vec<_>>>()?;
    states.sort_by(|a, b| a.label.cmp(&b.label));
    states.dedup_by(|a, b| a.label == b.label);
    Ok(states)
}

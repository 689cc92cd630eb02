//! Poisson-weighted sums of the form
//!
//! ```text
//! S = scale · Σₙ wₙ · p(n) · f₁(c₁ π √(n+a)/√n̄) · f₂(c₂ π √(n+b)/√n̄)
//! ```
//!
//! with `f` ∈ {cos, sin} and one of a few algebraic prefactors `p`. This
//! closed family covers every sum that appears in the one-gate reduced state.

use super::{
    check_mean, lower_tail_bound, upper_tail_bound, choose_window, poisson_weight, CoherentField, CompensatedSum,
    FieldError, Window,
};
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Trig {
    Cos,
    Sin,
}

/// `trig(coeff · π · √(n + offset) / √n̄)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrigFactor {
    pub trig: Trig,
    pub coeff: f64,
    pub offset: u8,
}

impl TrigFactor {
    pub fn cos(coeff: f64, offset: u8) -> Self {
        TrigFactor {
            trig: Trig::Cos,
            coeff,
            offset,
        }
    }

    pub fn sin(coeff: f64, offset: u8) -> Self {
        TrigFactor {
            trig: Trig::Sin,
            coeff,
            offset,
        }
    }

    fn eval(&self, n: u64, nbar: f64) -> f64 {
        let ratio = (n + self.offset as u64) as f64 / nbar;
        let angle = self.coeff * PI * ratio.sqrt();
        match self.trig {
            Trig::Cos => angle.cos(),
            Trig::Sin => angle.sin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Prefactor {
    One,
    /// √(n/n̄)
    SqrtNOverMean,
    /// √(n̄/(n+1))
    SqrtMeanOverNPlusOne,
    /// √(n/(n+1))
    SqrtNOverNPlusOne,
}

impl Prefactor {
    fn eval(&self, n: u64, nbar: f64) -> f64 {
        let x = n as f64;
        match self {
            Prefactor::One => 1.0,
            Prefactor::SqrtNOverMean => (x / nbar).sqrt(),
            Prefactor::SqrtMeanOverNPlusOne => (nbar / (x + 1.0)).sqrt(),
            Prefactor::SqrtNOverNPlusOne => (x / (x + 1.0)).sqrt(),
        }
    }

    /// Bound on `Σ_{n ∉ window} wₙ |p(n)|` for a window containing ⌊n̄⌋.
    ///
    /// √(n/n̄) ≤ 1 + n/n̄ and wₙ·n/n̄ = wₙ₋₁, so above the window the neglected
    /// part is at most the tail mass plus the tail mass shifted down by one;
    /// √(n̄/(n+1)) is the mirror image below the window with wₙ·n̄/(n+1) = wₙ₊₁.
    /// On the other side of the mode each prefactor is at most 1.
    fn tail_bound(&self, nbar: f64, window: Window) -> f64 {
        let below = |b: u64| lower_tail_bound(nbar, b);
        let above = |a: u64| upper_tail_bound(nbar, a);
        let lower = if window.lo == 0 { 0.0 } else { below(window.lo - 1) };
        let upper = above(window.hi + 1);
        match self {
            Prefactor::One | Prefactor::SqrtNOverNPlusOne => lower + upper,
            Prefactor::SqrtNOverMean => lower + upper + above(window.hi),
            Prefactor::SqrtMeanOverNPlusOne => {
                let shifted = if window.lo == 0 { 0.0 } else { below(window.lo) };
                lower + shifted + upper
            }
        }
    }
}

/// One member of the sum family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumSpec {
    pub scale: f64,
    pub prefactor: Prefactor,
    pub factors: [Option<TrigFactor>; 2],
}

impl SumSpec {
    /// Σ wₙ = 1.
    pub fn unity() -> Self {
        SumSpec {
            scale: 1.0,
            prefactor: Prefactor::One,
            factors: [None, None],
        }
    }

    pub fn new(scale: f64, prefactor: Prefactor, f1: Option<TrigFactor>, f2: Option<TrigFactor>) -> Self {
        SumSpec {
            scale,
            prefactor,
            factors: [f1, f2],
        }
    }

    /// The ten tabulated sums S₁…S₁₀ (`index` is 1-based); `k` is the
    /// pulse-area multiplier of S₄.
    pub fn table(index: usize, k: u32) -> Option<Self> {
        use Prefactor::*;
        let q = 0.25;
        let c = TrigFactor::cos;
        let s = TrigFactor::sin;
        let spec = match index {
            1 => Self::new(1.0, One, Some(c(q, 0)), Some(c(q, 0))),
            2 => Self::new(1.0, SqrtMeanOverNPlusOne, Some(c(q, 0)), Some(s(q, 1))),
            3 => Self::new(1.0, One, Some(c(q, 0)), Some(c(q, 1))),
            4 => Self::new(0.5, SqrtNOverMean, Some(s(k as f64 / 4.0, 0)), None),
            5 => Self::new(1.0, One, Some(s(q, 0)), Some(s(q, 0))),
            6 => Self::new(0.5, SqrtMeanOverNPlusOne, Some(s(0.5, 1)), None),
            7 => Self::new(1.0, SqrtNOverNPlusOne, Some(s(q, 0)), Some(s(q, 1))),
            8 => Self::new(1.0, One, Some(c(q, 1)), Some(c(q, 1))),
            9 => Self::new(1.0, SqrtNOverMean, Some(c(q, 1)), Some(s(q, 0))),
            10 => Self::new(1.0, One, Some(s(q, 1)), Some(s(q, 1))),
            _ => return None,
        };
        Some(spec)
    }

    /// Summand without the Poisson weight.
    pub fn term(&self, n: u64, nbar: f64) -> f64 {
        let mut v = self.scale * self.prefactor.eval(n, nbar);
        for f in self.factors.iter().flatten() {
            v *= f.eval(n, nbar);
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumEstimate {
    pub value: f64,
    /// Certified truncation error plus a rounding allowance.
    pub error_bound: f64,
    pub window: Window,
}

/// Evaluates `spec` against the Poisson law of `field` to within `abs_err`.
///
/// The summation window is the union of the field's own window and one
/// certified for `abs_err`; terms are accumulated in ascending n with
/// compensated summation, so the result does not depend on scheduling.
pub fn evaluate_sum(spec: &SumSpec, field: &CoherentField, abs_err: f64) -> Result<SumEstimate, FieldError> {
    if !(abs_err > 0.0 && abs_err.is_finite()) {
        return Err(FieldError::InvalidTolerance(abs_err));
    }
    let nbar = field.nbar();
    check_mean(nbar)?;
    let scale = spec.scale.abs().max(f64::MIN_POSITIVE);
    let budget = (abs_err / (8.0 * scale)).min(0.5);
    let window = match choose_window(nbar, budget) {
        Ok(w) => w.union(&field.window()),
        // budget below what f64 Chernoff bounds can express
        Err(_) => {
            return Err(FieldError::PrecisionUnreachable {
                requested: abs_err,
                achievable: 8.0 * scale * f64::MIN_POSITIVE,
            })
        }
    };

    let mut acc = CompensatedSum::default();
    for n in window.iter() {
        acc.add(poisson_weight(nbar, n) * spec.term(n, nbar));
    }
    let truncation = scale * spec.prefactor.tail_bound(nbar, window);
    // weights carry a few ulps of relative error each; the sum itself is compensated
    let rounding = 32.0 * f64::EPSILON * acc.abs_total() + 4.0 * f64::EPSILON * acc.value().abs();
    let error_bound = truncation + rounding;
    if error_bound > abs_err {
        return Err(FieldError::PrecisionUnreachable {
            requested: abs_err,
            achievable: error_bound,
        });
    }
    Ok(SumEstimate {
        value: acc.value(),
        error_bound,
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(nbar: f64) -> CoherentField {
        CoherentField::new(nbar, 1e-16).unwrap()
    }

    #[test]
    fn unity_sums_to_one() {
        for &nbar in &[0.5, 4.0, 1e2, 1e4, 1e6] {
            let est = evaluate_sum(&SumSpec::unity(), &field(nbar), 1e-13).unwrap();
            assert!((est.value - 1.0).abs() <= 1e-13, "{nbar}: {}", est.value);
        }
    }

    #[test]
    fn termwise_pythagorean_identities() {
        for &nbar in &[1e2, 1e4] {
            let f = field(nbar);
            let get = |i| evaluate_sum(&SumSpec::table(i, 2).unwrap(), &f, 1e-13).unwrap().value;
            assert!((get(1) + get(5) - 1.0).abs() <= 2e-13);
            assert!((get(8) + get(10) - 1.0).abs() <= 2e-13);
        }
    }

    #[test]
    fn s4_equals_s6_for_k2() {
        for &nbar in &[3.0, 1e2, 1e4] {
            let f = field(nbar);
            let s4 = evaluate_sum(&SumSpec::table(4, 2).unwrap(), &f, 1e-13).unwrap().value;
            let s6 = evaluate_sum(&SumSpec::table(6, 2).unwrap(), &f, 1e-13).unwrap().value;
            assert!((s4 - s6).abs() < 1e-13, "{nbar}: {s4} {s6}");
        }
    }

    #[test]
    fn window_growth_changes_result_within_bound() {
        let spec = SumSpec::table(9, 2).unwrap();
        let f = field(1e4);
        let coarse = evaluate_sum(&spec, &f, 1e-6).unwrap();
        let fine = evaluate_sum(&spec, &f, 1e-14).unwrap();
        assert!(fine.window.len() >= coarse.window.len());
        assert!((coarse.value - fine.value).abs() <= coarse.error_bound + fine.error_bound);
    }

    #[test]
    fn rejects_bad_tolerance() {
        let f = field(10.0);
        assert!(matches!(
            evaluate_sum(&SumSpec::unity(), &f, 0.0),
            Err(FieldError::InvalidTolerance(_))
        ));
        assert!(matches!(
            evaluate_sum(&SumSpec::unity(), &f, 1e-30),
            Err(FieldError::PrecisionUnreachable { .. })
        ));
    }

    #[test]
    fn table_has_ten_entries() {
        assert!(SumSpec::table(0, 2).is_none());
        assert!((1..=10).all(|i| SumSpec::table(i, 2).is_some()));
        assert!(SumSpec::table(11, 2).is_none());
    }
}

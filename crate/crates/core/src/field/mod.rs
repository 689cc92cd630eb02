//! Coherent driving fields: Poisson photon statistics, certified Fock
//! truncation and the Poisson-weighted trigonometric sums.
//!
//! A coherent state of mean photon number n̄ has |c_n|² = e^{−n̄} n̄ⁿ / n!.
//! Every numerical path in this crate sums over a finite window of Fock
//! indices; the mass left outside that window is bounded with the Chernoff
//! bounds
//!
//! ```text
//! P(N ≥ a) ≤ e^{−n̄} (e n̄ / a)^a    (a > n̄)
//! P(N ≤ b) ≤ e^{−n̄} (e n̄ / b)^b    (b < n̄)
//! ```
//!
//! both of which equal `exp(−n̄ h(x/n̄))` with `h(x) = x ln x − x + 1`.

mod compensated;
#[cfg(feature = "extended")]
pub mod extended;
#[cfg(feature = "extended")]
pub mod dd;
mod sums;

pub use compensated::{CompensatedComplex, CompensatedSum};
pub use sums::{evaluate_sum, Prefactor, SumEstimate, SumSpec, Trig, TrigFactor};

use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("mean photon number must be positive and finite, got {0}")]
    InvalidMean(f64),
    #[error("tail budget must lie in (0, 1), got {0}")]
    InvalidTail(f64),
    #[error("absolute error target must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("window [{lo}, {hi}] does not contain the Poisson mode {mode}")]
    WindowMissesMode { lo: u64, hi: u64, mode: u64 },
    #[error("requested accuracy {requested:e} is below the achievable bound {achievable:e}")]
    PrecisionUnreachable { requested: f64, achievable: f64 },
}

/// Inclusive range of retained Fock indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Window {
    pub lo: u64,
    pub hi: u64,
}

impl Window {
    pub fn new(lo: u64, hi: u64) -> Self {
        assert!(lo <= hi, "empty window [{lo}, {hi}]");
        Window { lo, hi }
    }

    pub fn len(&self) -> u64 {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: u64) -> bool {
        self.lo <= n && n <= self.hi
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<u64> {
        self.lo..=self.hi
    }

    pub fn union(&self, other: &Window) -> Window {
        Window::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    /// Half-width of the window measured from `center`, the larger side.
    pub fn half_width(&self, center: u64) -> u64 {
        center.saturating_sub(self.lo).max(self.hi.saturating_sub(center))
    }
}

/// A single-mode coherent field together with its certified truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherentField {
    nbar: f64,
    window: Window,
    tail_eps: f64,
}

impl CoherentField {
    /// Field whose window is chosen by [`choose_window`] for the budget `tail_eps`.
    pub fn new(nbar: f64, tail_eps: f64) -> Result<Self, FieldError> {
        let window = choose_window(nbar, tail_eps)?;
        Ok(CoherentField {
            nbar,
            window,
            tail_eps: certified_tail(nbar, window),
        })
    }

    /// Field with an explicit window. `tail_eps` becomes the Chernoff bound of
    /// the mass outside it, which may be large for deliberately narrow windows.
    pub fn with_window(nbar: f64, window: Window) -> Result<Self, FieldError> {
        check_mean(nbar)?;
        let mode = nbar.floor() as u64;
        if !window.contains(mode) {
            return Err(FieldError::WindowMissesMode {
                lo: window.lo,
                hi: window.hi,
                mode,
            });
        }
        Ok(CoherentField {
            nbar,
            window,
            tail_eps: certified_tail(nbar, window).min(1.0),
        })
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// Certified upper bound on the probability mass outside the window.
    pub fn tail_eps(&self) -> f64 {
        self.tail_eps
    }

    pub fn weight(&self, n: u64) -> f64 {
        poisson_weight(self.nbar, n)
    }

    /// Coherent amplitude c_n, taken real and non-negative.
    pub fn amplitude(&self, n: u64) -> f64 {
        self.weight(n).sqrt()
    }

    /// Amplitude restricted to the window (zero outside).
    pub fn windowed_amplitude(&self, n: u64) -> f64 {
        if self.window.contains(n) {
            self.amplitude(n)
        } else {
            0.0
        }
    }
}

fn check_mean(nbar: f64) -> Result<(), FieldError> {
    if nbar.is_finite() && nbar > 0.0 {
        Ok(())
    } else {
        Err(FieldError::InvalidMean(nbar))
    }
}

/// `e^{−n̄} n̄ⁿ / n!`, evaluated in log space with Loader's saddle-point
/// decomposition so that it stays accurate to a few ulps for n̄ up to 1e9.
pub fn poisson_weight(nbar: f64, n: u64) -> f64 {
    if n == 0 {
        return (-nbar).exp();
    }
    let x = n as f64;
    let log_w = -stirling_error(x) - deviance(x, nbar);
    log_w.exp() / (2.0 * PI * x).sqrt()
}

/// `ln n! − ln(√(2πn) (n/e)ⁿ)` for integer n ≥ 1.
fn stirling_error(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        // n! is exact in f64 up to 22!
        let mut fact = 1.0f64;
        let mut k = 2.0;
        while k <= n {
            fact *= k;
            k += 1.0;
        }
        return fact.ln() - (n + 0.5) * n.ln() + n - 0.5 * (2.0 * PI).ln();
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// `x ln(x/m) + m − x`, summed as a series when x ≈ m to avoid cancellation.
fn deviance(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let mut v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// `h(x) = x ln x − x + 1`, accurate near x = 1.
fn rate(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let d = x - 1.0;
    if d.abs() < 0.5 {
        x * d.ln_1p() - d
    } else {
        x * x.ln() - x + 1.0
    }
}

/// Chernoff bound on `P(N ≥ a)`; trivially 1 when a ≤ n̄.
pub fn upper_tail_bound(nbar: f64, a: u64) -> f64 {
    let a = a as f64;
    if a <= nbar {
        1.0
    } else {
        (-nbar * rate(a / nbar)).exp()
    }
}

/// Chernoff bound on `P(N ≤ b)`; trivially 1 when b ≥ n̄.
pub fn lower_tail_bound(nbar: f64, b: u64) -> f64 {
    let b = b as f64;
    if b >= nbar {
        1.0
    } else {
        (-nbar * rate(b / nbar)).exp()
    }
}

/// Certified bound on the mass outside `window`.
pub fn certified_tail(nbar: f64, window: Window) -> f64 {
    let below = if window.lo == 0 {
        0.0
    } else {
        lower_tail_bound(nbar, window.lo - 1)
    };
    below + upper_tail_bound(nbar, window.hi + 1)
}

/// Smallest window around ⌊n̄⌋ whose two tails are each certified to carry at
/// most `tail_eps / 2` of the Poisson mass.
pub fn choose_window(nbar: f64, tail_eps: f64) -> Result<Window, FieldError> {
    check_mean(nbar)?;
    if !(tail_eps > 0.0 && tail_eps < 1.0) {
        return Err(FieldError::InvalidTail(tail_eps));
    }
    let half = tail_eps / 2.0;
    let mode = nbar.floor() as u64;

    // smallest a > n̄ with P(N ≥ a) ≤ ε/2; the bound decreases in a
    let first_above = mode + 1;
    let mut step = 1u64.max(nbar.sqrt() as u64);
    let mut bad = first_above - 1;
    let mut good = first_above;
    while upper_tail_bound(nbar, good) > half {
        bad = good;
        good += step;
        step *= 2;
    }
    while good - bad > 1 {
        let mid = bad + (good - bad) / 2;
        if upper_tail_bound(nbar, mid) <= half {
            good = mid;
        } else {
            bad = mid;
        }
    }
    let hi = (good - 1).max(mode);

    // largest b < n̄ with P(N ≤ b) ≤ ε/2, if any
    let lo = if lower_tail_bound(nbar, 0) > half {
        0
    } else {
        let top = if (mode as f64) < nbar { mode } else { mode - 1 };
        let (mut good, mut bad) = (0u64, top + 1);
        while bad - good > 1 {
            let mid = good + (bad - good) / 2;
            if lower_tail_bound(nbar, mid) <= half {
                good = mid;
            } else {
                bad = mid;
            }
        }
        (good + 1).min(mode)
    };
    Ok(Window::new(lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_upper_tail(nbar: f64, a: u64) -> f64 {
        (a..a + 20_000).map(|n| poisson_weight(nbar, n)).sum()
    }

    #[test]
    fn weight_closed_forms() {
        let e_inv = (-1.0f64).exp();
        assert!((poisson_weight(1.0, 0) - 0.3678794412).abs() < 1e-10);
        assert!((poisson_weight(1.0, 0) - e_inv).abs() < 1e-16);
        assert!((poisson_weight(1.0, 1) - e_inv).abs() < 1e-16);
        // 3^5 e^{-3} / 120
        let exact = 243.0 * (-3.0f64).exp() / 120.0;
        assert!(((poisson_weight(3.0, 5) - exact) / exact).abs() < 1e-14);
    }

    #[test]
    fn weight_matches_product_form_for_moderate_n() {
        // e^{-n̄} n̄ⁿ/n! by running product, safe for n̄ = 30
        let nbar = 30.0f64;
        let mut w = (-nbar).exp();
        for n in 1..120u64 {
            w *= nbar / n as f64;
            let got = poisson_weight(nbar, n);
            assert!(((got - w) / w).abs() < 1e-13, "n={n}: {got} vs {w}");
        }
    }

    #[test]
    fn weights_stay_finite_for_huge_means() {
        for &nbar in &[1e4f64, 1e6, 1e8, 1e9] {
            let s = nbar.sqrt();
            for &dev in &[-20.0, -3.0, 0.0, 3.0, 20.0] {
                let n = (nbar + dev * s).max(0.0) as u64;
                let w = poisson_weight(nbar, n);
                assert!(w.is_finite() && w >= 0.0);
            }
            let peak = poisson_weight(nbar, nbar as u64);
            let gauss = 1.0 / (2.0 * PI * nbar).sqrt();
            assert!((peak / gauss - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn window_mass_at_1e4_is_one() {
        let nbar = 1e4;
        let w = Window::new(9000, 11000);
        let mut acc = CompensatedSum::default();
        for n in w.iter() {
            acc.add(poisson_weight(nbar, n));
        }
        let tail = certified_tail(nbar, w);
        assert!(tail < 1e-20, "chernoff tail {tail}");
        assert!((acc.value() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn chosen_windows_match_direct_tails() {
        let w = choose_window(1e4, 1e-18).unwrap();
        assert!(w.half_width(10_000) <= 1000, "{w:?}");
        let w4 = choose_window(4.0, 1e-12).unwrap();
        assert_eq!(w4.lo, 0);
        assert!(w4.hi <= 40, "{w4:?}");
        assert!(direct_upper_tail(4.0, w4.hi + 1) <= 0.5e-12);
        let w = choose_window(1e4, 1e-18).unwrap();
        assert!(direct_upper_tail(1e4, w.hi + 1) <= 0.5e-18);
        let below: f64 = (0..w.lo).map(|n| poisson_weight(1e4, n)).sum();
        assert!(below <= 0.5e-18);
    }

    #[test]
    fn chernoff_dominates_direct_sums() {
        for &nbar in &[0.3f64, 4.0, 25.0, 400.0] {
            for a in (nbar as u64 + 1)..(nbar as u64 * 4 + 30) {
                assert!(direct_upper_tail(nbar, a) <= upper_tail_bound(nbar, a) * (1.0 + 1e-12));
            }
            for b in 0..(nbar.ceil() as u64) {
                let direct: f64 = (0..=b).map(|n| poisson_weight(nbar, n)).sum();
                assert!(direct <= lower_tail_bound(nbar, b) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn loose_budget_window_still_holds_half_the_mass() {
        for &nbar in &[0.7f64, 3.0, 50.0, 1e4] {
            let w = choose_window(nbar, 0.5).unwrap();
            let mass: f64 = w.iter().map(|n| poisson_weight(nbar, n)).sum();
            assert!(mass >= 0.5);
            let mode = nbar.floor() as u64;
            assert!(w.lo <= mode && mode <= w.hi);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(choose_window(4.0, 0.0), Err(FieldError::InvalidTail(0.0)));
        assert_eq!(choose_window(4.0, -1.0), Err(FieldError::InvalidTail(-1.0)));
        assert!(matches!(choose_window(0.0, 1e-3), Err(FieldError::InvalidMean(_))));
        assert!(matches!(
            CoherentField::with_window(100.0, Window::new(0, 10)),
            Err(FieldError::WindowMissesMode { .. })
        ));
    }
}

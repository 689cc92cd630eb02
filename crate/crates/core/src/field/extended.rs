//! Double-double (≈ 32 significant digits) evaluation of the sum family.
//!
//! Trigonometric factors are Taylor series on halved arguments followed by
//! double-angle steps. Poisson weights are generated
//! by the exact ratio recurrence wₙ₊₁/wₙ = n̄/(n+1) from the mode and then
//! normalized by their window total, which avoids any log-gamma evaluation.

use super::sums::{Prefactor, SumSpec, Trig};
use super::{certified_tail, choose_window, FieldError, Window};
use super::dd::{DoubleDouble, PI};

/// Tail mass neglected by the extended evaluation.
const EXTENDED_TAIL: f64 = 1e-34;

#[derive(Debug, Clone, Copy)]
pub struct ExtendedEstimate {
    pub value: DoubleDouble,
    pub error_bound: f64,
    pub window: Window,
}

fn dd(x: f64) -> DoubleDouble {
    DoubleDouble::from(x)
}

fn dd_u64(n: u64) -> DoubleDouble {
    // exact for n < 2^53
    DoubleDouble::from(n as f64)
}

/// sin and cos of `x` to double-double accuracy.
pub fn sin_cos(x: DoubleDouble) -> (DoubleDouble, DoubleDouble) {
    let mut halvings = 0;
    let mut r = x;
    while r.hi().abs() > 0.25 {
        r = r / dd(2.0);
        halvings += 1;
    }
    let r2 = r * r;
    let mut term = r;
    let mut sin = r;
    let mut k = 1.0;
    loop {
        term = -term * r2 / dd((k + 1.0) * (k + 2.0));
        k += 2.0;
        if term.hi().abs() < 1e-36 * sin.hi().abs().max(1e-300) {
            break;
        }
        sin += term;
    }
    let mut term = dd(1.0);
    let mut cos = dd(1.0);
    let mut k = 0.0;
    loop {
        term = -term * r2 / dd((k + 1.0) * (k + 2.0));
        k += 2.0;
        if term.hi().abs() < 1e-36 {
            break;
        }
        cos += term;
    }
    for _ in 0..halvings {
        let s2 = dd(2.0) * sin * cos;
        let c2 = cos * cos - sin * sin;
        sin = s2;
        cos = c2;
    }
    (sin, cos)
}

fn trig(kind: Trig, coeff: f64, offset: u8, n: u64, nbar: DoubleDouble) -> DoubleDouble {
    let ratio = (dd_u64(n + offset as u64) / nbar).sqrt();
    let angle = dd(coeff) * PI * ratio;
    let (s, c) = sin_cos(angle);
    match kind {
        Trig::Sin => s,
        Trig::Cos => c,
    }
}

fn prefactor(p: Prefactor, n: u64, nbar: DoubleDouble) -> DoubleDouble {
    let x = dd_u64(n);
    match p {
        Prefactor::One => dd(1.0),
        Prefactor::SqrtNOverMean => (x / nbar).sqrt(),
        Prefactor::SqrtMeanOverNPlusOne => (nbar / (x + dd(1.0))).sqrt(),
        Prefactor::SqrtNOverNPlusOne => (x / (x + dd(1.0))).sqrt(),
    }
}

/// Normalized Poisson weights over `window`, in ascending n.
fn weights(nbar: f64, window: Window) -> Vec<DoubleDouble> {
    let m = dd(nbar);
    let mode = (nbar.floor() as u64).clamp(window.lo, window.hi);
    let len = window.len() as usize;
    let mut w = vec![dd(0.0); len];
    let at = |n: u64| (n - window.lo) as usize;
    w[at(mode)] = dd(1.0);
    for n in mode..window.hi {
        w[at(n + 1)] = w[at(n)] * m / dd_u64(n + 1);
    }
    for n in (window.lo + 1..=mode).rev() {
        w[at(n - 1)] = w[at(n)] * dd_u64(n) / m;
    }
    let total = w.iter().fold(dd(0.0), |acc, &x| acc + x);
    w.iter().map(|&x| x / total).collect()
}

/// Evaluates `spec` at mean `nbar` in double-double arithmetic.
///
/// `nbar` is taken as an exact double (Table-style means such as 1e4 are).
pub fn evaluate_sum_extended(spec: &SumSpec, nbar: f64) -> Result<ExtendedEstimate, FieldError> {
    let window = choose_window(nbar, EXTENDED_TAIL)?;
    let m = dd(nbar);
    let w = weights(nbar, window);
    let mut acc = dd(0.0);
    let mut abs_total = 0.0;
    for (i, n) in window.iter().enumerate() {
        let mut term = dd(spec.scale) * prefactor(spec.prefactor, n, m);
        for f in spec.factors.iter().flatten() {
            term *= trig(f.trig, f.coeff, f.offset, n, m);
        }
        let t = w[i] * term;
        abs_total += t.hi().abs();
        acc += t;
    }
    // the shifted-tail argument of the double path, plus ~1e-31 relative rounding per term
    let truncation = 2.0 * spec.scale.abs() * (certified_tail(nbar, window) + EXTENDED_TAIL);
    let rounding = 64.0 * 1.2e-32 * abs_total;
    Ok(ExtendedEstimate {
        value: acc,
        error_bound: truncation + rounding,
        window,
    })
}

fn pow10(k: u32) -> DoubleDouble {
    (0..k).fold(dd(1.0), |acc, _| acc * dd(10.0))
}

fn from_i128(v: i128) -> DoubleDouble {
    let hi = v as f64;
    let rest = v - hi as i128;
    DoubleDouble::sum_of(hi, rest as f64)
}

fn to_i128(x: DoubleDouble) -> i128 {
    x.hi() as i128 + x.lo() as i128
}

/// Decimal rendering with `digits` digits after the point, correctly rounded
/// up to the double-double representation error. Valid for |x| < 1e6.
pub fn to_decimal(x: DoubleDouble, digits: u32) -> String {
    assert!(digits <= 30, "at most 30 fractional digits are representable");
    let scaled = (x * pow10(digits)).round();
    let v = to_i128(scaled);
    let sign = if v < 0 { "-" } else { "" };
    let v = v.unsigned_abs();
    let scale = 10u128.pow(digits);
    format!("{sign}{}.{:0width$}", v / scale, v % scale, width = digits as usize)
}

/// Parses a plain decimal literal such as `0.500009817401897928264355667147`.
pub fn parse_decimal(s: &str) -> Option<DoubleDouble> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits: String = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) || digits.len() > 38 {
        return None;
    }
    let mantissa: i128 = digits.parse().ok()?;
    let v = from_i128(mantissa) / pow10(frac_part.len() as u32);
    Some(if neg { -v } else { v })
}

/// Number of leading fractional digits on which `a` and `b` agree, judged by
/// |a − b| < 10^{-d}; capped at 32.
pub fn agreeing_digits(a: DoubleDouble, b: DoubleDouble) -> u32 {
    let diff = (a - b).hi().abs();
    if diff == 0.0 {
        return 32;
    }
    (-diff.log10()).floor().clamp(0.0, 32.0) as u32
}

use anyhow::Result;
use czgate::channel::{apply_n, build_gate, gate_superop, superop_by_coefficient_matching, QuantizedMask};
use czgate::dynamics::Protocol;
use czgate::field::extended::{agreeing_digits, evaluate_sum_extended, parse_decimal};
use czgate::field::{evaluate_sum, CoherentField, SumSpec};
use czgate::linalg::max_abs_diff;
use czgate::metrics::{failure_probability, InitialQubitState};
use czgate::oracle::reduced_density_enumerated;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Level {
    Fast,
    Full,
}

/// Reference values at n̄ = 10⁴, k = 2.
const TABLE: [&str; 10] = [
    "0.500009817401897928264355667147",
    "0.499997963670545683314749144417",
    "0.499990182422436977119909877501",
    "0.499978328996648238077753901338",
    "0.499990182598102071735644332853",
    "0.499978328996648238077753901338",
    "0.499984817654121934189482133164",
    "0.499970548214032003626335555500",
    "0.499958694533432311848321647856",
    "0.500029451785967996373664444500",
];

const TAIL_EPS: f64 = 1e-14;

type Check = (&'static str, fn() -> Result<(bool, String)>);

fn table_double() -> Result<(bool, String)> {
    let field = CoherentField::new(1e4, 1e-16)?;
    let mut worst = 0.0f64;
    for (i, text) in TABLE.iter().enumerate() {
        let v = evaluate_sum(&SumSpec::table(i + 1, 2).expect("ten sums"), &field, 1e-13)?.value;
        worst = worst.max((v - text.parse::<f64>()?).abs());
    }
    Ok((worst <= 1e-12, format!("max |err| {worst:.1e} (≤ 1e-12)")))
}

fn table_extended() -> Result<(bool, String)> {
    let mut digits = u32::MAX;
    for (i, text) in TABLE.iter().enumerate() {
        let v = evaluate_sum_extended(&SumSpec::table(i + 1, 2).expect("ten sums"), 1e4)?.value;
        digits = digits.min(agreeing_digits(v, parse_decimal(text).expect("table literal")));
    }
    Ok((digits >= 28, format!("{digits} agreeing digits (≥ 28)")))
}

fn ideal_limit() -> Result<(bool, String)> {
    let m = gate_superop(&Protocol::cz_cnot(1e4, TAIL_EPS)?, QuantizedMask::ALL_IDEAL)?;
    let mut worst_p = 0.0f64;
    let mut worst_back = 0.0f64;
    for s in InitialQubitState::presets() {
        for t in 1..=3 {
            worst_p = worst_p.max(failure_probability(&m, &s, t)?.abs());
        }
        worst_back = worst_back.max(max_abs_diff(&apply_n(&m, &s.density(), 2)?.rho, &s.density()));
    }
    Ok((
        worst_p <= 1e-12 && worst_back <= 1e-12,
        format!("max p_f {worst_p:.1e}, involution defect {worst_back:.1e} (≤ 1e-12)"),
    ))
}

fn matching(nbar: f64) -> Result<(bool, String)> {
    let p = Protocol::cz_cnot(nbar, TAIL_EPS)?;
    let a = gate_superop(&p, QuantizedMask::ALL_QUANTIZED)?;
    let b = superop_by_coefficient_matching(&p, QuantizedMask::ALL_QUANTIZED)?;
    let d = a.max_abs_diff(&b);
    Ok((d <= 1e-12, format!("n̄ = {nbar:e}: max diff {d:.1e} (≤ 1e-12)")))
}

fn matching_1e2() -> Result<(bool, String)> {
    matching(1e2)
}

fn matching_1e4() -> Result<(bool, String)> {
    matching(1e4)
}

fn oracle(nbar: f64) -> Result<(bool, String)> {
    let p = Protocol::cz_cnot(nbar, TAIL_EPS)?;
    let m = gate_superop(&p, QuantizedMask::ALL_QUANTIZED)?;
    let mut worst = 0.0f64;
    for s in InitialQubitState::presets() {
        worst = worst.max(max_abs_diff(&reduced_density_enumerated(&p, &s.embed()), &m.apply(&s.density())));
    }
    let w = p.steps[0].field.window();
    Ok((worst <= 1e-10, format!("n̄ = {nbar}, window [{}, {}]: max diff {worst:.1e} (≤ 1e-10)", w.lo, w.hi)))
}

fn oracle_small() -> Result<(bool, String)> {
    oracle(0.5)
}

fn oracle_full() -> Result<(bool, String)> {
    oracle(4.0)
}

fn channel_sanity() -> Result<(bool, String)> {
    let gate = build_gate(&Protocol::cz_cnot(1e4, TAIL_EPS)?, QuantizedMask::ALL_QUANTIZED)?;
    let tp = gate.superop.trace_preservation_defect();
    let choi = gate.superop.choi_min_eigenvalue();
    let kraus = gate.steps.iter().map(|s| s.completeness_defect).fold(0.0, f64::max);
    Ok((
        tp <= 1e-10 && choi >= -1e-10 && kraus <= 10.0 * TAIL_EPS,
        format!("trace defect {tp:.1e}, Choi min eig {choi:.1e}, Kraus defect {kraus:.1e}"),
    ))
}

pub fn checks(level: Level) -> Vec<Check> {
    let mut v: Vec<Check> = vec![
        ("table double", table_double),
        ("table extended", table_extended),
        ("ideal limit", ideal_limit),
        ("coefficient matching", matching_1e2),
        ("oracle equivalence", oracle_small),
    ];
    if level == Level::Full {
        v.pop();
        v.extend([
            ("coefficient matching", matching_1e4 as fn() -> _),
            ("channel sanity", channel_sanity),
            ("oracle equivalence", oracle_full),
        ]);
    }
    v
}

/// Runs every check, printing one line each; true when all pass.
pub fn run(level: Level) -> bool {
    let mut ok = true;
    for (name, check) in checks(level) {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e:#}")),
        };
        ok &= pass;
        let status = if pass { "PASS" } else { "FAIL" };
        println!("{status}  {name}: {detail} [{:.1} s]", start.elapsed().as_secs_f64());
    }
    ok
}

use crate::config::{check_nbar, check_tail, ExperimentConfig, Format, Precision};
use anyhow::{bail, Context, Result};
use czgate::channel::{build_gate, ChannelReport, QuantizedMask, StepMode};
use czgate::dynamics::Protocol;
use czgate::field::extended::{evaluate_sum_extended, to_decimal};
use czgate::field::{evaluate_sum, CoherentField, SumSpec, Window};
use czgate::metrics::failure_curve;
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::Path;

pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SumRow {
    name: String,
    value: Value,
    error_bound: f64,
    window: Window,
}

/// S₁…S₁₀ and the S₁ + S₅ normalization check.
pub fn sums(nbar: f64, k: u32, precision: Precision, abs_err: f64, format: Format) -> Result<String> {
    let nbar = check_nbar(nbar)?;
    let abs_err = check_tail(abs_err)?;
    let mut rows = Vec::new();
    match precision {
        Precision::Double => {
            let field = CoherentField::new(nbar, abs_err)?;
            let mut est = Vec::new();
            for i in 1..=10 {
                let e = evaluate_sum(&SumSpec::table(i, k).expect("ten sums"), &field, abs_err)?;
                rows.push(SumRow { name: format!("S{i}"), value: json!(e.value), error_bound: e.error_bound, window: e.window });
                est.push(e);
            }
            let (a, b) = (est[0], est[4]);
            rows.push(SumRow {
                name: "S1+S5".into(),
                value: json!(format!("{:.15}", a.value + b.value)),
                error_bound: a.error_bound + b.error_bound,
                window: a.window.union(&b.window),
            });
        }
        Precision::Extended => {
            let mut est = Vec::new();
            for i in 1..=10 {
                let e = evaluate_sum_extended(&SumSpec::table(i, k).expect("ten sums"), nbar)?;
                rows.push(SumRow { name: format!("S{i}"), value: json!(to_decimal(e.value, 30)), error_bound: e.error_bound, window: e.window });
                est.push(e);
            }
            let (a, b) = (est[0], est[4]);
            rows.push(SumRow {
                name: "S1+S5".into(),
                value: json!(to_decimal(a.value + b.value, 30)),
                error_bound: a.error_bound + b.error_bound,
                window: a.window.union(&b.window),
            });
        }
    }
    Ok(match format {
        Format::Json => {
            let precision = if precision == Precision::Double { "double" } else { "extended" };
            let doc = json!({ "nbar": nbar, "k": k, "precision": precision, "sums": rows });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
        Format::Csv => {
            let mut s = String::from("sum,value,error_bound,window_lo,window_hi\n");
            for r in &rows {
                let value = match &r.value {
                    Value::String(v) => v.clone(),
                    v => v.to_string(),
                };
                writeln!(s, "{},{value},{:e},{},{}", r.name, r.error_bound, r.window.lo, r.window.hi)?;
            }
            s
        }
    })
}

#[derive(Serialize)]
struct GateDoc {
    nbar: f64,
    tail_eps: f64,
    exact_unitary: bool,
    #[serde(flatten)]
    report: ChannelReport,
}

pub fn gate(nbar: f64, mask: QuantizedMask, tail_eps: f64) -> Result<String> {
    let protocol = Protocol::cz_cnot(check_nbar(nbar)?, check_tail(tail_eps)?)?;
    let gate = build_gate(&protocol, mask)?;
    let doc = GateDoc {
        nbar,
        tail_eps,
        exact_unitary: gate.steps.iter().all(|s| s.mode == StepMode::Ideal),
        report: ChannelReport::new(&protocol, &gate),
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Row {
    pub nbar: f64,
    pub t: u64,
    pub initial: String,
    pub p_fail: f64,
    pub trace_defect: f64,
}

/// One row per (n̄, initial, t), in that lexicographic order.
pub fn experiment(config: &ExperimentConfig) -> Result<Vec<Row>> {
    let Some(&t_max) = config.t.last() else { bail!("--t selects no gate counts") };
    let mut rows = Vec::new();
    for &nbar in &config.nbar {
        let protocol = Protocol::cz_cnot(nbar, config.tail_eps)?;
        let gate = build_gate(&protocol, config.mask)?;
        for initial in &config.initial {
            let curve = failure_curve(&gate.superop, nbar, initial, t_max)?;
            rows.extend(config.t.iter().map(|&t| {
                let r = &curve[t as usize];
                Row {
                    nbar,
                    t,
                    initial: initial.label.clone(),
                    // rounding can leave p_fail a few ulps below zero
                    p_fail: r.p_fail.max(0.0),
                    trace_defect: r.trace_defect,
                }
            }));
        }
    }
    Ok(rows)
}

pub fn render_rows(rows: &[Row], format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(rows)? + "\n",
        Format::Csv => {
            let mut s = String::from("nbar,t,initial,p_fail,trace_defect\n");
            for r in rows {
                writeln!(s, "{},{},{},{:e},{:e}", r.nbar, r.t, r.initial, r.p_fail, r.trace_defect)?;
            }
            s
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Format;

    fn config(nbar: &[f64], t: &str, initial: &str, mask: &str) -> ExperimentConfig {
        ExperimentConfig::new(nbar, t, initial, mask, 1e-14, None, Format::Csv).unwrap()
    }

    #[test]
    fn rows_are_ordered() {
        let rows = experiment(&config(&[200.0, 100.0], "2,0..1", "10,00", "11111")).unwrap();
        let keys: Vec<_> = rows.iter().map(|r| (r.nbar, r.initial.as_str(), r.t)).collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)).then(a.2.cmp(&b.2)));
        assert_eq!(keys, sorted);
        assert_eq!(rows.len(), 12);
        assert!(rows.iter().filter(|r| r.t == 0).all(|r| r.p_fail == 0.0));
    }

    #[test]
    fn ideal_mask_never_fails() {
        let rows = experiment(&config(&[1e4], "1..3", "plus-x,11", "00000")).unwrap();
        assert!(rows.iter().all(|r| r.p_fail < 1e-12));
    }

    #[test]
    fn csv_layout() {
        let rows = [Row { nbar: 1e4, t: 3, initial: "10".into(), p_fail: 0.25, trace_defect: 0.0 }];
        let s = render_rows(&rows, Format::Csv).unwrap();
        assert_eq!(s, "nbar,t,initial,p_fail,trace_defect\n10000,3,10,2.5e-1,0e0\n");
    }

    #[test]
    fn sums_check_row() {
        let s = sums(1e2, 2, Precision::Double, 1e-14, Format::Csv).unwrap();
        let last = s.lines().last().unwrap();
        assert!(last.starts_with("S1+S5,1.000000000000000,"), "{last}");
        assert_eq!(s.lines().count(), 12);
    }

    #[test]
    fn gate_report_echoes_mask() {
        let doc: Value = serde_json::from_str(&gate(1e2, QuantizedMask::SIDEBAND_LIMITED, 1e-14).unwrap()).unwrap();
        let modes: Vec<_> = doc["steps"].as_array().unwrap().iter().map(|s| s["mode"].as_str().unwrap()).collect();
        assert_eq!(modes, ["ideal", "quantized", "quantized", "quantized", "ideal"]);
        assert_eq!(doc["exact_unitary"], false);
    }
}

//! CSV and markdown writers.
//!
//! Every CSV opens with one `# config ...` comment line recording the full
//! run configuration, followed by a header row. Fields are comma separated,
//! lines end in LF and numbers carry 17 significant digits, so a value read
//! back parses to the same `f64`.

use std::fmt::Write;

use crate::meta::{MetaResult, MetaSensitivity, PooledSummary, RankingReport};
use crate::overlap::OverlapMatrix;
use crate::runs::{ConvergenceRow, IndexRow};

/// Formats like C's `%.17g`: fixed notation for decimal exponents in
/// `-4..17`, scientific otherwise, trailing zeros removed.
pub fn format_g17(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        strip_zeros(format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_zeros(mantissa.to_string()), exp.abs())
    }
}

fn strip_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Percentage with one decimal, e.g. `0.1049` becomes `10.5%`.
pub fn percent(v: f64) -> String {
    format!("{:.1}%", 100.0 * v)
}

/// The `# config` comment line, keys in the order given.
pub fn config_line(pairs: &[(&str, String)]) -> String {
    let mut s = String::from("# config");
    for (k, v) in pairs {
        let _ = write!(s, " {k}={v}");
    }
    s.push('\n');
    s
}

/// Joins a config line and a CSV body.
pub fn with_config(pairs: &[(&str, String)], body: &str) -> String {
    config_line(pairs) + body
}

/// One row per (meta row, model input).
pub fn meta_result_csv(results: &[MetaResult]) -> String {
    let mut s = String::from("setting,function,row_id,N,n,eps,theta,input_label,index_value,raw_value\n");
    for r in results {
        for (row, _, p) in r.design.points() {
            let n = p.intervals.map(|v| v.to_string()).unwrap_or_default();
            let eps = p.eps.map(|v| v.to_string()).unwrap_or_default();
            for (i, label) in r.input_labels.iter().enumerate() {
                let raw = r.values[row][i];
                let _ = writeln!(
                    s,
                    "{},{},{row},{},{n},{eps},{},{label},{},{}",
                    r.setting(),
                    r.function,
                    p.sample_size,
                    p.theta,
                    format_g17(raw.clamp(0.0, 1.0)),
                    format_g17(raw)
                );
            }
        }
    }
    s
}

/// Per-input estimates (`scope = input`, `stat = value`) followed by the
/// pooled summaries (`min`, `q1`, `median`, `q3`, `max`, `count`).
pub fn meta_sensitivity_csv(per_function: &[MetaSensitivity], pooled: &[PooledSummary]) -> String {
    let mut s = String::from("setting,scope,function,input_label,index,parameters,stat,value\n");
    for m in per_function {
        for (i, label) in m.input_labels.iter().enumerate() {
            for (kind, v) in m.entries(i) {
                let _ = writeln!(
                    s,
                    "{},input,{},{label},{},{},value,{}",
                    m.setting,
                    m.function,
                    kind.order_name(),
                    kind.parameters(&m.parameter_labels),
                    format_g17(v)
                );
            }
        }
    }
    let Some(first) = per_function.first() else {
        return s;
    };
    for p in pooled {
        let stats = [
            ("min", format_g17(p.min)),
            ("q1", format_g17(p.q1)),
            ("median", format_g17(p.median)),
            ("q3", format_g17(p.q3)),
            ("max", format_g17(p.max)),
            ("count", p.count.to_string()),
        ];
        for (stat, v) in stats {
            let _ = writeln!(
                s,
                "{},{},all,all,{},{},{stat},{v}",
                first.setting,
                p.pooling.key(),
                p.kind.order_name(),
                p.kind.parameters(&first.parameter_labels),
            );
        }
    }
    s
}

/// Overlap matrices as one labelled square. With several functions the
/// labels read `function:input` and cells across functions stay empty.
pub fn overlap_csv(matrices: &[(String, OverlapMatrix)]) -> String {
    let qualify = matrices.len() > 1;
    let mut labels = Vec::new();
    let mut owner = Vec::new();
    for (m, (function, om)) in matrices.iter().enumerate() {
        for (i, l) in om.labels.iter().enumerate() {
            labels.push(if qualify { format!("{function}:{l}") } else { l.clone() });
            owner.push((m, i));
        }
    }
    let mut s = String::from("label");
    for l in &labels {
        s.push(',');
        s.push_str(l);
    }
    s.push('\n');
    for (r, l) in labels.iter().enumerate() {
        s.push_str(l);
        let (mr, ir) = owner[r];
        for &(mc, ic) in &owner {
            s.push(',');
            if mr == mc {
                s.push_str(&format_g17(matrices[mr].1.values[[ir, ic]]));
            }
        }
        s.push('\n');
    }
    s
}

pub fn indices_csv(rows: &[IndexRow]) -> String {
    let mut s = String::from("method,input_label,value,raw_value\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            r.method,
            r.input_label,
            format_g17(r.value),
            format_g17(r.raw)
        );
    }
    s
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("N,method,input_label,mean,sd\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.sample_size,
            r.method,
            r.input_label,
            format_g17(r.mean),
            format_g17(r.sd)
        );
    }
    s
}

/// Human-readable digest of a meta run: index distributions, overlaps of
/// adjacent ranks and of influential against non-influential inputs, and
/// the pooled meta-level medians.
pub fn summary_markdown(
    results: &[MetaResult],
    reports: &[RankingReport],
    pooled: &[PooledSummary],
    parameter_labels: &[String],
) -> String {
    let mut s = String::from("# Meta-experiment summary\n");
    for (r, rep) in results.iter().zip(reports) {
        let _ = writeln!(s, "\n## {} ({}, {} rows)\n", r.function, r.setting(), r.design.rows);
        s.push_str("| input | q1 | median | q3 | outside [0, 1] |\n|---|---|---|---|---|\n");
        for i in &rep.inputs {
            let _ = writeln!(
                s,
                "| {} | {:.4} | {:.4} | {:.4} | {} |",
                i.label,
                i.q1,
                i.median,
                i.q3,
                percent(i.out_of_range)
            );
        }
        s.push_str("\nOverlap of inputs adjacent in the ranking:\n\n");
        for (a, b, v) in &rep.prioritization {
            let _ = writeln!(s, "- {a} / {b}: {}", percent(*v));
        }
        if !rep.screening.is_empty() {
            let lo = rep.screening.iter().map(|x| x.2).fold(f64::INFINITY, f64::min);
            let hi = rep.screening.iter().map(|x| x.2).fold(f64::NEG_INFINITY, f64::max);
            let _ = writeln!(
                s,
                "\nInfluential against non-influential inputs: overlap from {} to {} over {} pairs.",
                percent(lo),
                percent(hi),
                rep.screening.len()
            );
        }
    }
    if !pooled.is_empty() {
        s.push_str("\n## Pooled meta-level indices\n\n| index | parameters | pooling | median | max |\n|---|---|---|---|---|\n");
        for p in pooled {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {:.3} | {:.3} |",
                p.kind.order_name(),
                p.kind.parameters(parameter_labels),
                p.pooling.key(),
                p.median,
                p.max
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn g17_matches_c() {
        // Expected strings from printf("%.17g").
        let cases = [
            (0.1, "0.10000000000000001"),
            (1.0, "1"),
            (0.5, "0.5"),
            (1e-5, "1.0000000000000001e-05"),
            (123456.0, "123456"),
            (1e17, "1e+17"),
            (-2.5, "-2.5"),
            (0.0001, "0.0001"),
            (1.0 / 3.0, "0.33333333333333331"),
        ];
        for (v, want) in cases {
            assert_eq!(format_g17(v), want, "{v}");
        }
    }

    #[test]
    fn g17_round_trips() {
        for v in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e-9, 6.02e23, -7.5e-300] {
            assert_eq!(format_g17(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn percentages() {
        assert_eq!(percent(0.1049), "10.5%");
        assert_eq!(percent(0.0), "0.0%");
    }

    #[test]
    fn overlap_layout() {
        let m = OverlapMatrix {
            labels: vec!["X1".into(), "X2".into()],
            values: array![[1.0, 0.25], [0.25, 1.0]],
        };
        assert_eq!(overlap_csv(&[("liu".into(), m.clone())]), "label,X1,X2\nX1,1,0.25\nX2,0.25,1\n");
        let two = overlap_csv(&[("liu".into(), m.clone()), ("ishigami".into(), m)]);
        assert!(two.starts_with("label,liu:X1,liu:X2,ishigami:X1,ishigami:X2\n"));
        assert!(two.contains("\nliu:X1,1,0.25,,\n"));
    }

    #[test]
    fn config_comment() {
        let s = with_config(&[("seed", "1".into()), ("rows", "8".into())], "a\n");
        assert_eq!(s, "# config seed=1 rows=8\na\n");
    }
}

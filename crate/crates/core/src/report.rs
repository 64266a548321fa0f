//! Text tables in the usual layout for WTP comparisons: every number rounded
//! to three decimals, intervals in brackets after the point value, and
//! significance markers against a benchmark row.
//!
//! Markers: `a` mean differs (Welch t-test), `b` distribution differs (KS
//! test, or the likelihood-ratio test for DC data), `c` interval does not
//! overlap the benchmark's, `d` bootstrap difference test significant.

use serde::{Deserialize, Serialize};

use crate::model::{Interval, OptimumReport};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Markers {
    pub a: bool,
    pub b: bool,
    pub c: bool,
    pub d: bool,
}

impl Markers {
    pub fn render(&self) -> String {
        let letters: Vec<&str> = [(self.a, "a"), (self.b, "b"), (self.c, "c"), (self.d, "d")]
            .iter()
            .filter(|(on, _)| *on)
            .map(|(_, l)| *l)
            .collect();
        if letters.is_empty() {
            String::new()
        } else {
            format!("^{}", letters.join(","))
        }
    }
}

pub fn fmt3(x: f64) -> String {
    format!("{x:.3}")
}

/// `value^markers [lower, upper]`.
pub fn fmt_estimate(value: f64, interval: &Interval, markers: &Markers) -> String {
    format!(
        "{}{} [{}, {}]",
        fmt3(value),
        markers.render(),
        fmt3(interval.lower),
        fmt3(interval.upper)
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanRow {
    pub label: String,
    pub mean: f64,
    pub interval: Interval,
    pub markers: Markers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimumRow {
    pub label: String,
    pub report: OptimumReport,
    /// Markers for price, quantity, profit, and the percentage column.
    pub markers: [Markers; 4],
    pub is_benchmark: bool,
}

fn render_rows(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (i, cell) in r.iter().enumerate().take(cols) {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{c:<w$}", w = widths[i]))
            .collect::<Vec<_>>()
            .join(" | ")
            .trim_end()
            .to_string()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    out.push_str(
        &widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .join("-+-"),
    );
    out.push('\n');
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

/// Mean WTP per data source with intervals.
pub fn render_mean_table(rows: &[MeanRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.label.clone(),
                fmt_estimate(r.mean, &r.interval, &r.markers),
            ]
        })
        .collect();
    render_rows(&["Data Source", "Mean [Confidence Interval]"], &body)
}

/// Optimal price, quantity, and profit with the profit gap to the benchmark.
pub fn render_optimum_table(rows: &[OptimumRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let o = &r.report;
            let pct = if r.is_benchmark {
                "N.A.".to_string()
            } else {
                match o.profit_pct_diff_vs_benchmark {
                    Some(p) => format!("{p:.2}%{}", r.markers[3].render()),
                    None => "N.A.".to_string(),
                }
            };
            vec![
                r.label.clone(),
                fmt_estimate(o.optimal_price, &o.ci_price, &r.markers[0]),
                fmt_estimate(o.optimal_quantity, &o.ci_quantity, &r.markers[1]),
                fmt_estimate(o.optimal_profit, &o.ci_profit, &r.markers[2]),
                pct,
            ]
        })
        .collect();
    render_rows(
        &[
            "Data Source",
            "Optimal Price",
            "Optimal Quantity",
            "Optimal Profit",
            "Profit % Difference to Benchmark",
        ],
        &body,
    )
}

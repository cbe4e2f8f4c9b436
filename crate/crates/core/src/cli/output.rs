//! CSV and JSON renderings of sweep rows.

use std::fmt::Write as _;

use serde::Serialize;

use super::config::RunConfig;
use crate::qsl::{SweepRow, Variant};

pub const CSV_COLUMNS: [&str; 12] = [
    "tau",
    "k",
    "f",
    "purity_tau",
    "ml_denom",
    "mt_denom",
    "tau_ml",
    "tau_mt",
    "tau_qsl",
    "tau_qsl_paper_variant",
    "closed_form_dev",
    "tau_qsl_selected",
];

/// Twelve significant digits in scientific notation.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

fn row_values(row: &SweepRow, variant: Variant) -> [f64; 12] {
    let r = &row.result;
    [
        r.tau,
        row.k,
        r.f,
        r.purity_tau,
        r.ml_denom,
        r.mt_denom,
        r.tau_ml,
        r.tau_mt,
        r.tau_qsl,
        row.tau_qsl_paper,
        row.closed_form_dev,
        row.selected(variant),
    ]
}

/// Comment rows (`# key = value`) followed by the header and one line per row.
///
/// Stripping the leading `# ` from the comment rows yields a config file that
/// reproduces the table.
pub fn render_csv(cfg: &RunConfig, rows: &[SweepRow]) -> String {
    let mut out = String::new();
    for line in cfg.to_toml_lines() {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str(&CSV_COLUMNS.join(","));
    out.push('\n');
    for row in rows {
        let values = row_values(row, cfg.variant);
        let cells: Vec<String> = values.iter().map(|&v| fmt_num(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct JsonRow {
    tau: f64,
    k: f64,
    f: f64,
    purity_tau: f64,
    ml_denom: f64,
    mt_denom: f64,
    tau_ml: f64,
    tau_mt: f64,
    tau_qsl: f64,
    tau_qsl_paper_variant: f64,
    closed_form_dev: f64,
    tau_qsl_selected: f64,
}

#[derive(Serialize)]
struct JsonDoc {
    config: toml::Table,
    rows: Vec<JsonRow>,
}

pub fn render_json(cfg: &RunConfig, rows: &[SweepRow]) -> String {
    let config: toml::Table = toml::from_str(&cfg.to_toml_lines().join("\n")).unwrap_or_default();
    let rows = rows
        .iter()
        .map(|row| {
            let [tau, k, f, purity_tau, ml_denom, mt_denom, tau_ml, tau_mt, tau_qsl, paper, dev, sel] =
                row_values(row, cfg.variant);
            JsonRow {
                tau,
                k,
                f,
                purity_tau,
                ml_denom,
                mt_denom,
                tau_ml,
                tau_mt,
                tau_qsl,
                tau_qsl_paper_variant: paper,
                closed_form_dev: dev,
                tau_qsl_selected: sel,
            }
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&JsonDoc { config, rows }).unwrap_or_default();
    text.push('\n');
    text
}

/// Parsed numeric CSV body, for reading tables back.
pub fn parse_csv(text: &str) -> Option<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines.next()?.split(',').map(str::to_string).collect();
    let mut rows = Vec::new();
    for line in lines {
        let row: Option<Vec<f64>> = line.split(',').map(|c| c.parse().ok()).collect();
        rows.push(row?);
    }
    Some((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(0.25), "2.50000000000e-1");
        assert_eq!(fmt_num(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(fmt_num(0.0), "0.00000000000e0");
        assert_eq!("3.33333333333e-1".parse::<f64>().unwrap(), 0.333333333333);
    }
}

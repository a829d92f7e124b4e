//! Report rendering. Every format starts by echoing the effective
//! configuration: `#`-prefixed TOML for text and CSV, a leading
//! `{"config": ...}` object for JSON lines.

use std::fmt::Write;

use disttrans::criterion::NuMeasure;
use disttrans::hypothesis::TestResult;
use disttrans::simulation::RateTable;
use serde_json::json;

use crate::config::FileConfig;
use crate::Format;

/// Context printed above the per-`τ` rows of a test report.
pub struct TestSummary {
    pub command: &'static str,
    pub title: String,
    /// `(label, size)` for every sample, base first.
    pub samples: Vec<(String, usize)>,
}

fn comment_header(command: &str, cfg: &FileConfig) -> String {
    let mut out = format!("# disttrans {command}\n# effective configuration:\n");
    for line in cfg.to_toml().lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            let _ = writeln!(out, "#   {line}");
        }
    }
    out.push_str("#\n");
    out
}

fn config_line(command: &str, cfg: &FileConfig) -> String {
    let value = json!({ "command": command, "config": cfg });
    format!("{value}\n")
}

/// Up to six decimals, trailing zeros dropped, so lattice noise such as
/// `-0.6000000000000001` prints as `-0.6`.
fn short(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

pub fn fmt_theta(theta: &[Vec<f64>]) -> String {
    join_theta(theta, short)
}

fn join_theta(theta: &[Vec<f64>], cell: impl Fn(f64) -> String) -> String {
    theta
        .iter()
        .map(|t| format!("({})", t.iter().map(|v| cell(*v)).collect::<Vec<_>>().join(", ")))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn fmt_nu(nu: &NuMeasure) -> String {
    match nu {
        NuMeasure::Normal { mean, sd } => format!("normal(mean = {mean:.6}, sd = {sd:.6})"),
        NuMeasure::Explicit { nodes } => format!("{} explicit nodes", nodes.len()),
    }
}

fn decision(reject: bool) -> &'static str {
    if reject {
        "reject"
    } else {
        "fail to reject"
    }
}

pub fn render_test(
    format: Format,
    cfg: &FileConfig,
    summary: &TestSummary,
    results: &[TestResult],
) -> String {
    match format {
        Format::Text => test_text(cfg, summary, results),
        Format::Csv => test_csv(cfg, summary, results),
        Format::Jsonl => test_jsonl(cfg, summary, results),
    }
}

fn test_text(cfg: &FileConfig, summary: &TestSummary, results: &[TestResult]) -> String {
    let mut out = comment_header(summary.command, cfg);
    let first = &results[0];
    let _ = writeln!(out, "{}", summary.title);
    let sizes: Vec<String> = summary.samples.iter().map(|(l, n)| format!("{l} = {n}")).collect();
    let _ = writeln!(out, "{}, T_n = {:.6}", sizes.join(", "), first.t_n);
    let _ = writeln!(out, "nu = {}", fmt_nu(&first.nu));
    let _ = writeln!(out, "L = {:.6e} at theta_hat = {}", first.criterion, fmt_theta(&first.theta_hat));
    let _ = writeln!(out, "bootstrap draws = {}\n", first.boot_stats.len());
    let _ = writeln!(
        out,
        "{:>8}  {:>14}  {:>14}  {:>8}  {:<14}  theta_hat",
        "tau", "statistic", "critical", "p-value", "decision"
    );
    for r in results {
        let _ = writeln!(
            out,
            "{:>8}  {:>14.6}  {:>14.6}  {:>8.4}  {:<14}  {}",
            format!("{}", r.tau),
            r.statistic,
            r.critical_value,
            r.p_value,
            decision(r.reject),
            fmt_theta(&r.theta_hat)
        );
    }
    let mut notes: Vec<String> = Vec::new();
    for r in results {
        for d in &r.diagnostics {
            let line = format!("tau = {}: {d}", r.tau);
            if !notes.contains(&line) {
                notes.push(line);
            }
        }
    }
    if !notes.is_empty() {
        out.push_str("\ndiagnostics:\n");
        for n in notes {
            let _ = writeln!(out, "  - {n}");
        }
    }
    out
}

fn test_csv(cfg: &FileConfig, summary: &TestSummary, results: &[TestResult]) -> String {
    let mut out = comment_header(summary.command, cfg);
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record([
        "tau",
        "statistic",
        "critical_value",
        "p_value",
        "reject",
        "theta_hat",
        "t_n",
        "criterion",
        "n_boot",
    ]);
    for r in results {
        let _ = w.write_record([
            r.tau.to_string(),
            r.statistic.to_string(),
            r.critical_value.to_string(),
            r.p_value.to_string(),
            r.reject.to_string(),
            join_theta(&r.theta_hat, |v| v.to_string()),
            r.t_n.to_string(),
            r.criterion.to_string(),
            r.boot_stats.len().to_string(),
        ]);
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8"));
    out
}

fn test_jsonl(cfg: &FileConfig, summary: &TestSummary, results: &[TestResult]) -> String {
    let mut out = config_line(summary.command, cfg);
    for r in results {
        let value = json!({
            "tau": r.tau,
            "statistic": r.statistic,
            "critical_value": r.critical_value,
            "p_value": r.p_value,
            "reject": r.reject,
            "theta_hat": r.theta_hat,
            "t_n": r.t_n,
            "criterion": r.criterion,
            "mix": r.mix,
            "n_boot": r.boot_stats.len(),
            "nu": r.nu,
            "diagnostics": r.diagnostics,
        });
        let _ = writeln!(out, "{value}");
    }
    out
}

pub fn render_table(format: Format, cfg: &FileConfig, table: &RateTable) -> String {
    match format {
        Format::Text => comment_header("simulate", cfg) + &table.to_text(),
        Format::Csv => comment_header("simulate", cfg) + &table.to_csv(),
        Format::Jsonl => {
            let mut out = config_line("simulate", cfg);
            for row in &table.rows {
                for (i, tau) in table.taus.iter().enumerate() {
                    let value = json!({
                        "family": row.spec.family,
                        "pairing": row.spec.pairing,
                        "dgp": row.spec.dgp_id,
                        "n1": row.spec.n1,
                        "n2": row.spec.n2,
                        "tau": tau,
                        "rate": row.rates[i],
                        "critical_value": row.critical_values[i],
                    });
                    let _ = writeln!(out, "{value}");
                }
            }
            out
        }
    }
}

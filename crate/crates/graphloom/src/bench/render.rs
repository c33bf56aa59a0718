//! Report rendering. All three formats are deterministic for a given
//! report; the JSON form parses back into an equal [`ExperimentReport`].

use std::fmt::Write;

use crate::bench::ExperimentReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

pub fn render_report(report: &ExperimentReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Markdown => render_markdown(report),
    }
}

fn render_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("strategy,fraction,attribute_count,median_s,mean_s,stddev_s,triples,passes\n");
    for c in &report.cells {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:.6},{},{}",
            c.strategy,
            c.fraction,
            c.attribute_count,
            c.median_seconds,
            c.mean_seconds,
            c.stddev_seconds,
            c.triples_emitted,
            c.passes_performed
        );
    }
    out
}

fn render_markdown(report: &ExperimentReport) -> String {
    let mut out = String::from("# Benchmark report\n\n");
    let env = &report.environment;
    let cpus = match env.logical_cpus {
        Some(n) => format!("{n} logical CPUs"),
        None => "unknown CPU count".to_owned(),
    };
    let _ = writeln!(out, "- when: {}", env.timestamp);
    let _ = writeln!(out, "- machine: {} {}, {cpus}", env.os, env.arch);
    let _ = writeln!(
        out,
        "- measured runs: single-threaded {}",
        if env.single_thread { "(yes)" } else { "(NO)" }
    );
    out.push('\n');

    out.push_str("| strategy | fraction | attributes | median (s) | mean (s) | stddev (s) | triples | passes |\n");
    out.push_str("|---|---|---|---|---|---|---|---|\n");
    for c in &report.cells {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {:.6} | {:.6} | {:.6} | {} | {} |",
            c.strategy,
            c.fraction,
            c.attribute_count,
            c.median_seconds,
            c.mean_seconds,
            c.stddev_seconds,
            c.triples_emitted,
            c.passes_performed
        );
    }

    if !report.comparisons.is_empty() {
        out.push_str("\n## Class-based vs attribute-based\n\n");
        out.push_str("| fraction | attributes | class median (s) | attribute median (s) | time saved |\n");
        out.push_str("|---|---|---|---|---|\n");
        for c in &report.comparisons {
            let _ = writeln!(
                out,
                "| {} | {} | {:.6} | {:.6} | {:.1}% |",
                c.fraction,
                c.attribute_count,
                c.class_median_seconds,
                c.attribute_median_seconds,
                c.reduction_percent
            );
        }
    }
    out
}

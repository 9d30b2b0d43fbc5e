//! Output files and plain-text summaries.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::HarnessError;
use crate::pipeline::{ModelEvaluation, PipelineReport, RegimeReport};
use crate::simulate::{Statistic, Table4Report};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, HarnessError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(io_err(path))
}

pub fn ensure_dir(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| format!("{v:?}"))
}

/// `scenario,orig_eor,...,intadj`, one row per scenario, under the report's
/// diagonal convention.
pub fn table4_csv(report: &Table4Report) -> String {
    let mut out = String::from("scenario");
    for s in Statistic::ALL {
        out.push(',');
        out.push_str(s.column());
    }
    out.push('\n');
    for row in &report.rows {
        out.push_str(&row.scenario.name());
        for v in row.values(report.mad_diagonal) {
            let _ = write!(out, ",{v:?}");
        }
        out.push('\n');
    }
    out
}

/// Aligned table under both diagonal conventions.
pub fn table4_text(report: &Table4Report) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "n = {}, p = {}, M = {}, nu = {}, replications = {}, seed = {}",
        report.n, report.p, report.m_per_cell, report.mclor_nu, report.replications, report.master_seed
    );
    for diagonal in [false, true] {
        let marker = if diagonal == report.mad_diagonal { " (written to table4.csv)" } else { "" };
        let _ = writeln!(
            out,
            "\nmean |rho - 1|, {}{}",
            if diagonal { "all entries" } else { "off-diagonal entries" },
            marker
        );
        let _ = write!(out, "{:<24}", "scenario");
        for s in Statistic::ALL {
            let _ = write!(out, "{:>13}", s.column());
        }
        out.push('\n');
        for row in &report.rows {
            let _ = write!(out, "{:<24}", row.scenario.name());
            for v in row.values(diagonal) {
                let _ = write!(out, "{v:>13.4}");
            }
            out.push('\n');
        }
    }
    let nonconverged: usize = report.rows.iter().map(|r| r.nonconverged).sum();
    let _ = writeln!(out, "\nreplications with a fit short of tolerance: {nonconverged}");
    for row in report.rows.iter().filter(|r| r.nonconverged > 0) {
        let _ = writeln!(
            out,
            "  {}: {} (worst |g|/tol {:.3})",
            row.scenario.name(),
            row.nonconverged,
            row.worst_grad_ratio
        );
    }
    out
}

pub fn write_table4(report: &Table4Report, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    ensure_dir(dir)?;
    let csv = dir.join("table4.csv");
    let txt = dir.join("table4.txt");
    write_text(&csv, &table4_csv(report))?;
    write_text(&txt, &table4_text(report))?;
    Ok(vec![csv, txt])
}

fn metrics_rows(out: &mut String, e: &ModelEvaluation, group_names: &[String]) {
    let m = &e.metrics;
    for (a, name) in group_names.iter().enumerate() {
        let c = m.counts[a];
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            e.kind.name(),
            name,
            fmt_opt(m.sens[a]),
            fmt_opt(m.spec[a]),
            c.tp,
            c.fn_,
            c.fp,
            c.tn
        );
    }
    let _ = writeln!(out, "{},range,{:?},{:?},,,,", e.kind.name(), m.sens_range, m.spec_range);
}

pub fn metrics_csv(regime: &RegimeReport, group_names: &[String]) -> String {
    let mut out = String::from("model,group,sens,spec,tp,fn,fp,tn\n");
    for e in &regime.evaluations {
        metrics_rows(&mut out, e, group_names);
    }
    out
}

/// One row per (model, group, label, bin).
pub fn histograms_csv(regime: &RegimeReport, group_names: &[String]) -> String {
    let mut out = String::from("model,group,label,bin_lo,bin_hi,count\n");
    for e in &regime.evaluations {
        for h in &e.histograms {
            let bins = h.counts.len();
            for (b, c) in h.counts.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{:?},{:?},{}",
                    e.kind.name(),
                    group_names[h.group],
                    h.label,
                    b as f64 / bins as f64,
                    (b + 1) as f64 / bins as f64,
                    c
                );
            }
        }
    }
    out
}

/// Per-group sensitivity and specificity side by side for both regimes.
pub fn pipeline_text(report: &PipelineReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "M = {}, test rows = {}", report.m_per_cell, report.test_rows);
    let models: Vec<_> = report.regimes[0].evaluations.iter().map(|e| e.kind).collect();
    for kind in models {
        let _ = writeln!(out, "\n{}", kind.name());
        let _ = write!(out, "{:<16}", "group");
        for r in &report.regimes {
            let _ = write!(out, "{:>10}{:>10}", format!("{} sens", r.regime.name()), "spec");
        }
        out.push('\n');
        let evals: Vec<&ModelEvaluation> = report
            .regimes
            .iter()
            .filter_map(|r| r.evaluation(kind))
            .collect();
        let cell = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.2}"));
        for (a, name) in report.group_names.iter().enumerate() {
            let _ = write!(out, "{name:<16}");
            for e in &evals {
                let _ = write!(out, "{:>10}{:>10}", cell(e.metrics.sens[a]), cell(e.metrics.spec[a]));
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<16}", "range");
        for e in &evals {
            let _ = write!(out, "{:>10.2}{:>10.2}", e.metrics.sens_range, e.metrics.spec_range);
        }
        out.push('\n');
        let _ = write!(out, "{:<16}", "threshold");
        for e in &evals {
            let _ = write!(out, "{:>10.4}{:>10}", e.threshold, "");
        }
        out.push('\n');
    }
    out.push('\n');
    for r in &report.regimes {
        let _ = writeln!(
            out,
            "{}: training rows {}, EOR mad {:.4}, LOR mad {:.4}",
            r.regime.name(),
            r.train_rows,
            r.train_eor.mad_from_one,
            r.lor.mad_from_one
        );
    }
    for note in &report.notes {
        let _ = writeln!(out, "note: {note}");
    }
    out
}

pub fn write_pipeline(report: &PipelineReport, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    for r in &report.regimes {
        let name = r.regime.name();
        let metrics = dir.join(format!("metrics_{name}.csv"));
        write_text(&metrics, &metrics_csv(r, &report.group_names))?;
        let hist = dir.join(format!("histograms_{name}.csv"));
        write_text(&hist, &histograms_csv(r, &report.group_names))?;
        let model = dir.join(format!("models_{name}.txt"));
        write_text(&model, &r.logistic.to_text())?;
        for (label, m) in [("eor", &r.train_eor), ("lor", &r.lor)] {
            let path = dir.join(format!("odds_{label}_{name}.csv"));
            let mut w = create(&path)?;
            m.write_csv(&mut w)?;
            w.flush().map_err(io_err(&path))?;
            written.push(path);
        }
        written.extend([metrics, hist, model]);
    }
    let summary = dir.join("summary.txt");
    write_text(&summary, &pipeline_text(report))?;
    written.push(summary);
    Ok(written)
}

//! Report files for a finished grid.
//!
//! Every CSV is a pure function of the grid's metrics, so identical runs give
//! byte-identical CSVs. `report.md` also carries wall-clock timings.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use handcraft_core::classify::ClassifierKind;
use handcraft_core::features::FeatureMethod;

use crate::error::{BenchError, Result};
use crate::grid::{CellResult, GridResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Markdown,
    Csv,
}

pub const ALL_FORMATS: &[Format] = &[Format::Markdown, Format::Csv];

fn pct(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

fn num(v: f64) -> String {
    format!("{v:.6}")
}

/// Datasets in first-appearance order.
fn datasets(res: &GridResult) -> Vec<&str> {
    let mut out: Vec<&str> = Vec::new();
    for c in &res.cells {
        if !out.contains(&c.dataset.as_str()) {
            out.push(&c.dataset);
        }
    }
    out
}

fn classifiers(res: &GridResult) -> Vec<ClassifierKind> {
    let mut out = Vec::new();
    for c in &res.cells {
        if !out.contains(&c.classifier) {
            out.push(c.classifier);
        }
    }
    out
}

/// Highest-accuracy successful cell of `dataset`, raw pixels excluded unless
/// nothing else succeeded. Ties keep the earliest cell, i.e. the first feature
/// in config order.
pub fn best_cell<'a>(res: &'a GridResult, dataset: &str) -> Option<&'a CellResult> {
    let pick = |allow_raw: bool| {
        let mut best: Option<&CellResult> = None;
        for c in res.cells.iter().filter(|c| c.dataset == dataset && (allow_raw || c.feature != FeatureMethod::Raw)) {
            if let Some(acc) = c.accuracy() {
                if best.and_then(CellResult::accuracy).is_none_or(|b| acc > b) {
                    best = Some(c);
                }
            }
        }
        best
    };
    pick(false).or_else(|| pick(true))
}

/// For one classifier: its raw-pixel cell and its best feature cell.
pub fn with_without<'a>(
    res: &'a GridResult,
    dataset: &str,
    classifier: ClassifierKind,
) -> Option<(&'a CellResult, Option<&'a CellResult>)> {
    let mine = || res.cells.iter().filter(move |c| c.dataset == dataset && c.classifier == classifier);
    let raw = mine().find(|c| c.feature == FeatureMethod::Raw)?;
    let mut best: Option<&CellResult> = None;
    for c in mine().filter(|c| c.feature != FeatureMethod::Raw) {
        if let Some(acc) = c.accuracy() {
            if best.and_then(CellResult::accuracy).is_none_or(|b| acc > b) {
                best = Some(c);
            }
        }
    }
    Some((raw, best))
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// CSV files as `(file name, contents)`.
pub fn render_csvs(res: &GridResult) -> Vec<(&'static str, Vec<u8>)> {
    let mut files = Vec::new();

    let rows = res
        .cells
        .iter()
        .map(|c| {
            let mut r = vec![c.dataset.clone(), c.feature.name().into(), c.classifier.name().into()];
            match &c.outcome {
                Ok(m) => r.extend([
                    "ok".into(),
                    m.n_train.to_string(),
                    m.n_test.to_string(),
                    m.dim.to_string(),
                    num(m.report.accuracy),
                    num(m.report.macro_precision),
                    num(m.report.macro_recall),
                    num(m.report.macro_f1),
                    res.split_seed.to_string(),
                    m.tuned.clone().unwrap_or_default(),
                    String::new(),
                ]),
                Err(e) => {
                    r.extend(["failed".into()]);
                    r.extend(std::iter::repeat_n(String::new(), 7));
                    r.extend([res.split_seed.to_string(), String::new(), e.clone()]);
                }
            }
            r
        })
        .collect();
    files.push((
        "cells.csv",
        csv_bytes(
            &[
                "dataset", "feature", "classifier", "status", "n_train", "n_test", "dim", "accuracy",
                "macro_precision", "macro_recall", "macro_f1", "split_seed", "tuned", "error",
            ],
            rows,
        ),
    ));

    let rows = res
        .cells
        .iter()
        .map(|c| {
            vec![
                c.dataset.clone(),
                c.feature.name().into(),
                c.classifier.name().into(),
                c.accuracy().map(num).unwrap_or_default(),
            ]
        })
        .collect();
    files.push(("plot_data.csv", csv_bytes(&["dataset", "feature", "classifier", "accuracy"], rows)));

    let mut rows = Vec::new();
    for c in &res.cells {
        let Ok(m) = &c.outcome else { continue };
        let cm = &m.report.confusion;
        for k in 0..cm.n_classes() {
            let support: u64 = (0..cm.n_classes()).map(|p| cm.get(k, p)).sum();
            rows.push(vec![
                c.dataset.clone(),
                c.feature.name().into(),
                c.classifier.name().into(),
                k.to_string(),
                support.to_string(),
                num(m.report.precision[k]),
                num(m.report.recall[k]),
                num(m.report.f1[k]),
            ]);
        }
    }
    files.push((
        "per_class.csv",
        csv_bytes(&["dataset", "feature", "classifier", "class", "support", "precision", "recall", "f1"], rows),
    ));

    let mut rows = Vec::new();
    for c in &res.cells {
        let Ok(m) = &c.outcome else { continue };
        let cm = &m.report.confusion;
        for t in 0..cm.n_classes() {
            for p in 0..cm.n_classes() {
                rows.push(vec![
                    c.dataset.clone(),
                    c.feature.name().into(),
                    c.classifier.name().into(),
                    t.to_string(),
                    p.to_string(),
                    cm.get(t, p).to_string(),
                ]);
            }
        }
    }
    files.push(("confusion.csv", csv_bytes(&["dataset", "feature", "classifier", "true", "predicted", "count"], rows)));

    let rows = datasets(res)
        .into_iter()
        .filter_map(|d| best_cell(res, d))
        .map(|c| {
            vec![
                c.dataset.clone(),
                c.feature.name().into(),
                c.classifier.name().into(),
                c.accuracy().map(num).unwrap_or_default(),
            ]
        })
        .collect();
    files.push(("best_models.csv", csv_bytes(&["dataset", "feature", "classifier", "accuracy"], rows)));

    let mut rows = Vec::new();
    for d in datasets(res) {
        for k in classifiers(res) {
            let Some((raw, best)) = with_without(res, d, k) else { continue };
            let raw_acc = raw.accuracy();
            let best_acc = best.and_then(CellResult::accuracy);
            rows.push(vec![
                d.to_string(),
                k.name().into(),
                raw_acc.map(num).unwrap_or_default(),
                best.map(|b| b.feature.name().to_string()).unwrap_or_default(),
                best_acc.map(num).unwrap_or_default(),
                raw_acc.zip(best_acc).map(|(r, b)| num(b - r)).unwrap_or_default(),
            ]);
        }
    }
    if !rows.is_empty() {
        files.push((
            "with_without.csv",
            csv_bytes(&["dataset", "classifier", "raw_accuracy", "best_feature", "feature_accuracy", "delta"], rows),
        ));
    }
    files
}

pub fn render_markdown(res: &GridResult) -> String {
    let mut s = String::from("# Benchmark report\n\n");
    writeln!(s, "Split seed: {}. Figures are percentages on the test split; precision, recall and F1 are macro averages.\n", res.split_seed).unwrap();

    for d in datasets(res) {
        writeln!(s, "## Dataset `{d}`\n").unwrap();
        for k in classifiers(res) {
            writeln!(s, "### {k}\n").unwrap();
            s.push_str("| Feature | Accuracy | Precision | Recall | F1-Score |\n|---|---:|---:|---:|---:|\n");
            for c in res.cells.iter().filter(|c| c.dataset == d && c.classifier == k) {
                match &c.outcome {
                    Ok(m) => {
                        let r = &m.report;
                        let tuned = m.tuned.as_ref().map_or(String::new(), |t| format!(" ({t})"));
                        writeln!(
                            s,
                            "| {}{tuned} | {} | {} | {} | {} |",
                            c.feature,
                            pct(r.accuracy),
                            pct(r.macro_precision),
                            pct(r.macro_recall),
                            pct(r.macro_f1)
                        )
                        .unwrap();
                    }
                    Err(_) => writeln!(s, "| {} | failed | | | |", c.feature).unwrap(),
                }
            }
            s.push('\n');
        }
    }

    s.push_str("## Best performing models\n\n| Dataset | Model | Accuracy |\n|---|---|---:|\n");
    for d in datasets(res) {
        match best_cell(res, d) {
            Some(c) => writeln!(s, "| {d} | {}+{} | {} |", c.feature, c.classifier, pct(c.accuracy().unwrap_or(0.0))).unwrap(),
            None => writeln!(s, "| {d} | none succeeded | |").unwrap(),
        }
    }
    s.push('\n');

    let mut ww = String::new();
    for d in datasets(res) {
        for k in classifiers(res) {
            if let Some((raw, best)) = with_without(res, d, k) {
                let cell = |c: Option<&CellResult>| c.and_then(CellResult::accuracy).map_or("failed".to_string(), pct);
                let feature = best.map_or("-".to_string(), |b| b.feature.to_string());
                writeln!(ww, "| {d} | {k} | {} | {} ({feature}) |", cell(Some(raw)), cell(best)).unwrap();
            }
        }
    }
    if !ww.is_empty() {
        s.push_str("## Accuracy with and without feature extraction\n\n");
        s.push_str("| Dataset | Classifier | Raw pixels | Best feature |\n|---|---|---:|---:|\n");
        s.push_str(&ww);
        s.push('\n');
    }

    let failed: Vec<&CellResult> = res.cells.iter().filter(|c| c.outcome.is_err()).collect();
    if !failed.is_empty() {
        s.push_str("## Failed cells\n\n");
        for c in failed {
            writeln!(s, "- {} / {} / {}: {}", c.dataset, c.feature, c.classifier, c.outcome.as_ref().unwrap_err()).unwrap();
        }
        s.push('\n');
    }

    s.push_str("## Timings (wall clock, seconds)\n\n| Dataset | Stage | Seconds |\n|---|---|---:|\n");
    for t in &res.stages {
        writeln!(s, "| {} | {} | {:.3} |", t.dataset, t.stage, t.seconds).unwrap();
    }
    for c in &res.cells {
        writeln!(s, "| {} | fit {}+{} | {:.3} |", c.dataset, c.feature, c.classifier, c.fit_seconds).unwrap();
        writeln!(s, "| {} | predict {}+{} | {:.3} |", c.dataset, c.feature, c.classifier, c.predict_seconds).unwrap();
    }
    s.push_str("\n## Configuration\n\n```\n");
    s.push_str(&res.config_echo);
    s.push_str("```\n");
    s
}

/// Writes the requested formats into `dir`, returning the paths written.
pub fn emit_report(res: &GridResult, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    if res.cells.is_empty() {
        return Err(BenchError::Config { line: 0, msg: "grid produced no cells".into() });
    }
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    let mut written = Vec::new();
    let mut write = |name: &str, bytes: &[u8]| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| BenchError::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    if formats.contains(&Format::Csv) {
        for (name, bytes) in render_csvs(res) {
            write(name, &bytes)?;
        }
    }
    if formats.contains(&Format::Markdown) {
        write("report.md", render_markdown(res).as_bytes())?;
    }
    Ok(written)
}

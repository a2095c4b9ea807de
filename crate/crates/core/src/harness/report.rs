//! Table and CSV renderings of an experiment.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::experiment::{compare_models, CompareMetric, ComparisonTable, ExperimentResult};

pub const TABLE2_HEADER: [&str; 8] = ["Model", "Sens", "Spec", "PPV", "NPV", "F1", "Acc", "Acc p (adj)"];
pub const TABLE3_HEADER: [&str; 7] = ["Model", "FP", "FN", "n pos", "Diff pos", "p", "Pair. p"];

fn rate(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.2}"))
}

fn p_cell(table: Option<&ComparisonTable>, model: &str) -> String {
    let Some(t) = table else { return "NA".into() };
    match t.rows.iter().find(|r| r.model == model) {
        Some(r) if r.is_referent => "*".into(),
        Some(r) => r.adjusted_p.map_or_else(|| "NA".into(), |p| format!("{p:.3}")),
        None => "NA".into(),
    }
}

fn csv_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Comparisons on accuracy and on `diff_pos`, where they can be made.
pub struct Comparisons {
    pub accuracy: Option<ComparisonTable>,
    pub diff_pos: Option<ComparisonTable>,
}

impl Comparisons {
    pub fn of(result: &ExperimentResult) -> Self {
        Self {
            accuracy: compare_models(result, CompareMetric::Accuracy).ok(),
            diff_pos: compare_models(result, CompareMetric::DiffPos).ok(),
        }
    }
}

/// Rows of the classification table: rates then the adjusted p-value.
pub fn table2_rows(result: &ExperimentResult, cmp: &Comparisons) -> Vec<Vec<String>> {
    result
        .models
        .iter()
        .map(|m| match m.summary() {
            Some(s) => vec![
                m.name().to_string(),
                rate(s.sens),
                rate(s.spec),
                rate(s.ppv),
                rate(s.npv),
                rate(s.f1),
                rate(s.acc),
                p_cell(cmp.accuracy.as_ref(), m.name()),
            ],
            None => {
                let mut row = vec![m.name().to_string()];
                row.extend(std::iter::repeat_n("failed".to_string(), TABLE2_HEADER.len() - 1));
                row
            }
        })
        .collect()
}

/// Rows of the prevalence table.
pub fn table3_rows(result: &ExperimentResult, cmp: &Comparisons) -> Vec<Vec<String>> {
    result
        .models
        .iter()
        .map(|m| match m.summary() {
            Some(s) => {
                let one_sample = cmp
                    .diff_pos
                    .as_ref()
                    .and_then(|t| t.rows.iter().find(|r| r.model == m.name()))
                    .map_or_else(|| "NA".to_string(), |r| format!("{:.3}", r.diff_pos_p));
                vec![
                    m.name().to_string(),
                    format!("{:.1}", s.fp),
                    format!("{:.1}", s.fn_),
                    format!("{:.1}", s.n_pos),
                    format!("{:.1}", s.diff_pos),
                    one_sample,
                    p_cell(cmp.diff_pos.as_ref(), m.name()),
                ]
            }
            None => {
                let mut row = vec![m.name().to_string()];
                row.extend(std::iter::repeat_n("failed".to_string(), TABLE3_HEADER.len() - 1));
                row
            }
        })
        .collect()
}

/// Left-aligned first column, right-aligned others, two spaces apart.
pub fn render_aligned(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| if i == 0 { format!("{c:<w$}", w = widths[0]) } else { format!("{c:>w$}", w = widths[i]) })
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

fn to_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// One row per model and split.
pub fn results_csv(result: &ExperimentResult) -> Result<String> {
    let header = [
        "model", "split", "seed", "tp", "fp", "tn", "fn", "sens", "spec", "ppv", "npv", "f1", "acc", "n_pos", "diff_pos",
    ];
    let rows = result.models.iter().flat_map(|m| {
        m.cells.iter().map(move |c| {
            let (k, r) = (&c.confusion, &c.metrics);
            vec![
                m.name().to_string(),
                c.split.to_string(),
                c.seed.to_string(),
                k.tp.to_string(),
                k.fp.to_string(),
                k.tn.to_string(),
                k.fn_.to_string(),
                csv_opt(r.sens),
                csv_opt(r.spec),
                csv_opt(r.ppv),
                csv_opt(r.npv),
                csv_opt(r.f1),
                csv_opt(r.acc),
                r.n_pos.to_string(),
                r.diff_pos.to_string(),
            ]
        })
    });
    to_csv(&header, rows)
}

/// One row per model with split means; failed models carry the error.
pub fn summary_csv(result: &ExperimentResult) -> Result<String> {
    let header = ["model", "status", "sens", "spec", "ppv", "npv", "f1", "acc", "fp", "fn", "n_pos", "diff_pos"];
    let rows = result.models.iter().map(|m| match m.summary() {
        Some(s) => vec![
            m.name().to_string(),
            "ok".into(),
            csv_opt(s.sens),
            csv_opt(s.spec),
            csv_opt(s.ppv),
            csv_opt(s.npv),
            csv_opt(s.f1),
            csv_opt(s.acc),
            s.fp.to_string(),
            s.fn_.to_string(),
            s.n_pos.to_string(),
            s.diff_pos.to_string(),
        ],
        None => {
            let mut row =
                vec![m.name().to_string(), format!("failed: {}", m.failure.as_deref().unwrap_or("no splits"))];
            row.extend(std::iter::repeat_n(String::new(), header.len() - 2));
            row
        }
    });
    to_csv(&header, rows)
}

const COMPARISON_HEADER: [&str; 7] = ["metric", "model", "mean", "referent", "raw_p", "adjusted_p", "diff_pos_p"];

fn comparison_rows(t: &ComparisonTable) -> impl Iterator<Item = Vec<String>> + '_ {
    let metric = match t.metric {
        CompareMetric::Accuracy => "accuracy",
        CompareMetric::DiffPos => "diff_pos",
    };
    t.rows.iter().map(move |r| {
        vec![
            metric.to_string(),
            r.model.clone(),
            r.mean.to_string(),
            r.is_referent.to_string(),
            csv_opt(r.raw_p),
            csv_opt(r.adjusted_p),
            r.diff_pos_p.to_string(),
        ]
    })
}

/// Both comparisons, accuracy first.
pub fn comparison_csv(cmp: &Comparisons) -> Result<String> {
    to_csv(&COMPARISON_HEADER, [&cmp.accuracy, &cmp.diff_pos].into_iter().flatten().flat_map(comparison_rows))
}

pub fn comparison_table_csv(table: &ComparisonTable) -> Result<String> {
    to_csv(&COMPARISON_HEADER, comparison_rows(table))
}

/// Wall-clock seconds per cell; kept apart from the reproducible outputs.
pub fn timings_csv(result: &ExperimentResult) -> Result<String> {
    let rows = result.models.iter().flat_map(|m| {
        m.cells
            .iter()
            .map(move |c| vec![m.name().to_string(), c.split.to_string(), c.seed.to_string(), format!("{:.3}", c.seconds)])
    });
    to_csv(&["model", "split", "seed", "seconds"], rows)
}

pub fn table2_text(result: &ExperimentResult, cmp: &Comparisons) -> String {
    render_aligned(&TABLE2_HEADER, &table2_rows(result, cmp))
}

pub fn table3_text(result: &ExperimentResult, cmp: &Comparisons) -> String {
    render_aligned(&TABLE3_HEADER, &table3_rows(result, cmp))
}

/// Writes every output file into `dir` and returns their paths.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(Error::file(dir))?;
    let cmp = Comparisons::of(result);
    let files = [
        ("results.csv", results_csv(result)?),
        ("summary.csv", summary_csv(result)?),
        ("comparison.csv", comparison_csv(&cmp)?),
        ("table2.txt", table2_text(result, &cmp)),
        ("table3.txt", table3_text(result, &cmp)),
        ("timings.csv", timings_csv(result)?),
        ("result.json", serde_json::to_string_pretty(&strip_timings(result))?),
    ];
    let mut paths = Vec::new();
    for (name, body) in files {
        let p = dir.join(name);
        fs::write(&p, body).map_err(Error::file(&p))?;
        paths.push(p);
    }
    Ok(paths)
}

/// Copy with wall times zeroed, so the saved result is reproducible.
pub fn strip_timings(result: &ExperimentResult) -> ExperimentResult {
    let mut r = result.clone();
    for m in &mut r.models {
        for c in &mut m.cells {
            c.seconds = 0.0;
        }
    }
    r
}

pub fn parse_result(text: &str, path: &str) -> Result<ExperimentResult> {
    serde_json::from_str(text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

/// Reads a `result.json` written by [`write_outputs`].
pub fn read_result(path: &Path) -> Result<ExperimentResult> {
    parse_result(&fs::read_to_string(path).map_err(Error::file(path))?, &path.display().to_string())
}

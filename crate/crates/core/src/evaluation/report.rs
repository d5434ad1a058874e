use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{
    max_f1_sweep, optimal_threshold, rank_sum_test, roc_curve, Classification, EvalError, RankSumResult, RocPoint,
    ScoredPairs,
};
use crate::training::{PairLabel, PairSample};

pub const REPORT_HEADER: [&str; 9] = [
    "method",
    "u_stat",
    "neg_log10_p",
    "auc",
    "threshold",
    "precision",
    "recall",
    "f1",
    "f1_maxsweep",
];

#[derive(Debug, Clone, PartialEq)]
pub struct MethodReport {
    pub method: String,
    pub rank_sum: RankSumResult,
    pub roc: Vec<RocPoint>,
    pub auc: f64,
    pub youden: Classification,
    pub max_f1: Classification,
}

impl MethodReport {
    pub fn row(&self) -> ReportRow {
        ReportRow {
            method: self.method.clone(),
            u_stat: self.rank_sum.u,
            neg_log10_p: self.rank_sum.neg_log10_p,
            auc: self.auc,
            threshold: self.youden.threshold,
            precision: self.youden.precision,
            recall: self.youden.recall,
            f1: self.youden.f1,
            f1_maxsweep: self.max_f1.f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub methods: Vec<MethodReport>,
}

impl EvaluationReport {
    pub fn rows(&self) -> Vec<ReportRow> {
        self.methods.iter().map(MethodReport::row).collect()
    }
}

/// One line of `report.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub u_stat: f64,
    pub neg_log10_p: f64,
    pub auc: f64,
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub f1_maxsweep: f64,
}

impl ReportRow {
    fn values(&self) -> [f64; 8] {
        [
            self.u_stat,
            self.neg_log10_p,
            self.auc,
            self.threshold,
            self.precision,
            self.recall,
            self.f1,
            self.f1_maxsweep,
        ]
    }
}

fn pair_labels(s: &ScoredPairs) -> BTreeMap<&str, PairLabel> {
    s.entries.iter().map(|e| (e.pair_id.as_str(), e.label)).collect()
}

/// Compute every metric for each method, in the order given. All methods
/// must have scored the same labeled pairs.
pub fn build_report(scored: &[ScoredPairs]) -> Result<EvaluationReport, EvalError> {
    let first = scored.first().ok_or(EvalError::NoMethods)?;
    let reference = pair_labels(first);
    let mut methods = Vec::with_capacity(scored.len());
    for s in scored {
        let (pos, neg) = s.groups()?;
        let labels = pair_labels(s);
        if labels != reference {
            let detail = match reference.iter().find(|(k, v)| labels.get(*k) != Some(v)) {
                Some((k, _)) => format!("pair {k} missing or relabeled"),
                None => format!("{} extra pairs", labels.len() - reference.len()),
            };
            return Err(EvalError::PairSetMismatch {
                method: s.method.clone(),
                reference: first.method.clone(),
                detail,
            });
        }
        let rank_sum = rank_sum_test(&pos, &neg)?;
        let (roc, auc) = roc_curve(s)?;
        let youden = optimal_threshold(&roc, s)?;
        let max_f1 = max_f1_sweep(&roc, s)?;
        methods.push(MethodReport {
            method: s.method.clone(),
            rank_sum,
            roc,
            auc,
            youden,
            max_f1,
        });
    }
    Ok(EvaluationReport { methods })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, EvalError> {
    csv::Writer::from_path(path).map_err(|e| EvalError::file(path, e))
}

/// Numbers are written with 12 significant digits.
pub fn write_report_csv(path: &Path, report: &EvaluationReport) -> Result<(), EvalError> {
    let mut w = csv_writer(path)?;
    w.write_record(REPORT_HEADER).map_err(|e| EvalError::file(path, e))?;
    for row in report.rows() {
        let mut rec = vec![row.method.clone()];
        rec.extend(row.values().iter().map(|v| format!("{v:.11e}")));
        w.write_record(&rec).map_err(|e| EvalError::file(path, e))?;
    }
    w.flush().map_err(|e| EvalError::file(path, e))
}

pub fn read_report_csv(path: &Path) -> Result<Vec<ReportRow>, EvalError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| EvalError::file(path, e))?;
    let header = r.headers().map_err(|e| EvalError::file(path, e))?;
    if header.iter().ne(REPORT_HEADER) {
        return Err(EvalError::file(path, format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| EvalError::file(path, e))?;
        let mut v = [0.0; 8];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = rec[i + 1]
                .parse()
                .map_err(|e| EvalError::file(path, format!("column {}: {e}", REPORT_HEADER[i + 1])))?;
        }
        rows.push(ReportRow {
            method: rec[0].to_string(),
            u_stat: v[0],
            neg_log10_p: v[1],
            auc: v[2],
            threshold: v[3],
            precision: v[4],
            recall: v[5],
            f1: v[6],
            f1_maxsweep: v[7],
        });
    }
    Ok(rows)
}

/// File-system safe name for a method's ROC file.
pub fn roc_file_name(method: &str) -> String {
    let safe: String = method
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("roc_{safe}.csv")
}

/// Write `roc_<method>.csv` for every method; returns the paths.
pub fn write_roc_csv(dir: &Path, report: &EvaluationReport) -> Result<Vec<PathBuf>, EvalError> {
    let mut paths = Vec::new();
    for m in &report.methods {
        let path = dir.join(roc_file_name(&m.method));
        let mut w = csv_writer(&path)?;
        w.write_record(["fpr", "tpr", "threshold"]).map_err(|e| EvalError::file(&path, e))?;
        for p in &m.roc {
            w.write_record([p.fpr.to_string(), p.tpr.to_string(), p.threshold.to_string()])
                .map_err(|e| EvalError::file(&path, e))?;
        }
        w.flush().map_err(|e| EvalError::file(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Overlay all ROC curves and the chance diagonal in a standalone SVG.
pub fn write_roc_svg(path: &Path, report: &EvaluationReport) -> Result<(), EvalError> {
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    let (size, pad) = (400.0, 40.0);
    let x = |f: f64| pad + f * size;
    let y = |t: f64| pad + (1.0 - t) * size;
    let mut svg = String::new();
    let total = size + 2.0 * pad;
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = total + 160.0,
        h = total
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{pad}" y="{pad}" width="{size}" height="{size}" fill="none" stroke="#000"/>"##
    );
    let _ = writeln!(
        svg,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#888" stroke-dasharray="4 4"/>"##,
        x(0.0),
        y(0.0),
        x(1.0),
        y(1.0)
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">false positive rate</text>"#, pad + size / 2.0, total - 8.0);
    let _ = writeln!(
        svg,
        r#"<text x="12" y="{c}" font-size="12" text-anchor="middle" transform="rotate(-90 12 {c})">true positive rate</text>"#,
        c = pad + size / 2.0
    );
    for (i, m) in report.methods.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = m.roc.iter().map(|p| format!("{:.2},{:.2}", x(p.fpr), y(p.tpr))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = pad + 16.0 + 18.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{ly}" font-size="12" fill="{color}">{} (AUC {:.3})</text>"#,
            total + 4.0,
            xml_escape(&m.method),
            m.auc
        );
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg).map_err(|e| EvalError::file(path, e))
}

/// Per-method score file: `doc_a,doc_b,label,score`.
pub fn write_scores(path: &Path, pairs: &[PairSample], scores: &[f64]) -> Result<(), EvalError> {
    if pairs.len() != scores.len() {
        return Err(EvalError::file(path, format!("{} pairs but {} scores", pairs.len(), scores.len())));
    }
    let mut w = csv_writer(path)?;
    w.write_record(["doc_a", "doc_b", "label", "score"]).map_err(|e| EvalError::file(path, e))?;
    for (p, s) in pairs.iter().zip(scores) {
        let label = if p.label.is_positive() { "positive" } else { "negative" };
        w.write_record([p.doc_a.as_str(), p.doc_b.as_str(), label, &s.to_string()])
            .map_err(|e| EvalError::file(path, e))?;
    }
    w.flush().map_err(|e| EvalError::file(path, e))
}

#[derive(serde::Deserialize)]
struct ScoreRecord {
    doc_a: String,
    doc_b: String,
    label: PairLabel,
    score: f64,
}

pub fn read_scores(path: &Path, method: &str) -> Result<ScoredPairs, EvalError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| EvalError::file(path, e))?;
    let mut out = ScoredPairs::new(method);
    for rec in r.deserialize::<ScoreRecord>() {
        let rec = rec.map_err(|e| EvalError::file(path, e))?;
        let pair = PairSample::new(&rec.doc_a, &rec.doc_b, rec.label, "")
            .map_err(|e| EvalError::file(path, e))?;
        out.push(pair.key(), rec.label, rec.score);
    }
    Ok(out)
}

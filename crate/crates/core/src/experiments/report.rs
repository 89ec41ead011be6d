use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::{BlabError, Result};

/// Name of the column holding the sup-over-compact error.
pub const SUP_ERROR: &str = "sup_error";

/// Name of the L^p error column for exponent `p`.
pub fn lp_column(p: f64) -> String {
    format!("lp_{p}")
}

/// One row of a report: an exhaustion index `j` (or a radius `r`) and one
/// value per column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub label: String,
    pub index: f64,
    pub values: Vec<f64>,
}

/// A pass/fail rule evaluated from the rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Criterion {
    /// Strictly decreasing over the last `window` rows.
    DecreasingTail { column: String, window: usize },
    /// Strictly increasing over all rows.
    Increasing { column: String },
    /// Last row strictly below `tol`.
    FinalBelow { column: String, tol: f64 },
    /// Last row strictly above `value`.
    FinalAbove { column: String, value: f64 },
    /// Every row strictly below `tol`.
    AllBelow { column: String, tol: f64 },
    /// Every row strictly above `value`.
    AllAbove { column: String, value: f64 },
    /// `|value − target| < tol` in the row with the given index.
    NearAt { column: String, index: f64, target: f64, tol: f64 },
    /// Value strictly above `value` in the row with the given index.
    AboveAt { column: String, index: f64, value: f64 },
    /// Last row at most `factor` times the row `step` positions earlier.
    ShrinksBy { column: String, step: usize, factor: f64 },
    /// Value at index `numerator` at least `factor` times the value at index `denominator`.
    RatioAtLeast { column: String, numerator: f64, denominator: f64, factor: f64 },
    /// Every row's `column` strictly below its `tolerance_column`.
    BelowOwnTolerance { column: String, tolerance_column: String },
}

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    /// The quantity compared against the threshold.
    pub value: f64,
    pub threshold: f64,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{mark} {} (value {:e}, threshold {:e})", self.name, self.value, self.threshold)
    }
}

impl Criterion {
    pub fn name(&self) -> String {
        match self {
            Criterion::DecreasingTail { column, window } => format!("{column} strictly decreasing over last {window}"),
            Criterion::Increasing { column } => format!("{column} strictly increasing"),
            Criterion::FinalBelow { column, .. } => format!("final {column} below tolerance"),
            Criterion::FinalAbove { column, .. } => format!("final {column} above reference"),
            Criterion::AllBelow { column, .. } => format!("every {column} below tolerance"),
            Criterion::AllAbove { column, .. } => format!("every {column} above bound"),
            Criterion::NearAt { column, index, target, .. } => format!("{column} at {index} near {target}"),
            Criterion::AboveAt { column, index, value } => format!("{column} at {index} above {value}"),
            Criterion::ShrinksBy { column, step, factor } => {
                format!("{column} shrinks by factor {factor} over {step} indices")
            }
            Criterion::RatioAtLeast { column, numerator, denominator, .. } => {
                format!("{column} ratio at {numerator} over {denominator}")
            }
            Criterion::BelowOwnTolerance { column, .. } => format!("every {column} below its row tolerance"),
        }
    }

    fn column(&self) -> &str {
        match self {
            Criterion::DecreasingTail { column, .. }
            | Criterion::Increasing { column }
            | Criterion::FinalBelow { column, .. }
            | Criterion::FinalAbove { column, .. }
            | Criterion::AllBelow { column, .. }
            | Criterion::AllAbove { column, .. }
            | Criterion::NearAt { column, .. }
            | Criterion::AboveAt { column, .. }
            | Criterion::ShrinksBy { column, .. }
            | Criterion::RatioAtLeast { column, .. }
            | Criterion::BelowOwnTolerance { column, .. } => column,
        }
    }

    /// Evaluates against the report's rows. Missing data fails the criterion.
    pub fn evaluate(&self, report: &ConvergenceReport) -> Verdict {
        let values = report.column(self.column()).unwrap_or_default();
        let fail = |threshold: f64| Verdict { name: self.name(), passed: false, value: f64::NAN, threshold };
        let verdict = |passed: bool, value: f64, threshold: f64| Verdict { name: self.name(), passed, value, threshold };
        let last = values.last().copied();
        match self {
            Criterion::DecreasingTail { window, .. } => {
                if values.len() < *window || *window < 2 {
                    return fail(0.0);
                }
                let tail = &values[values.len() - window..];
                let ok = tail.windows(2).all(|w| w[1] < w[0]);
                verdict(ok, tail[tail.len() - 1], tail[0])
            }
            Criterion::Increasing { .. } => {
                if values.len() < 2 {
                    return fail(0.0);
                }
                let ok = values.windows(2).all(|w| w[1] > w[0]);
                verdict(ok, values[values.len() - 1], values[0])
            }
            Criterion::FinalBelow { tol, .. } => match last {
                Some(v) => verdict(v < *tol, v, *tol),
                None => fail(*tol),
            },
            Criterion::FinalAbove { value, .. } => match last {
                Some(v) => verdict(v > *value, v, *value),
                None => fail(*value),
            },
            Criterion::AllBelow { tol, .. } => {
                if values.is_empty() {
                    return fail(*tol);
                }
                let worst = values.iter().copied().fold(f64::NEG_INFINITY, nan_max);
                verdict(worst < *tol, worst, *tol)
            }
            Criterion::AllAbove { value, .. } => {
                if values.is_empty() {
                    return fail(*value);
                }
                let worst = values.iter().copied().fold(f64::INFINITY, nan_min);
                verdict(worst > *value, worst, *value)
            }
            Criterion::NearAt { index, target, tol, .. } => match report.row_position(*index) {
                Some(i) => {
                    let dev = (values[i] - target).abs();
                    verdict(dev < *tol, dev, *tol)
                }
                None => fail(*tol),
            },
            Criterion::AboveAt { index, value, .. } => match report.row_position(*index) {
                Some(i) => verdict(values[i] > *value, values[i], *value),
                None => fail(*value),
            },
            Criterion::ShrinksBy { step, factor, .. } => {
                if values.len() <= *step {
                    return fail(*factor);
                }
                let ratio = values[values.len() - 1] / values[values.len() - 1 - step];
                verdict(ratio <= *factor, ratio, *factor)
            }
            Criterion::RatioAtLeast { numerator, denominator, factor, .. } => {
                match (report.row_position(*numerator), report.row_position(*denominator)) {
                    (Some(a), Some(b)) => {
                        let ratio = values[a] / values[b];
                        verdict(ratio >= *factor, ratio, *factor)
                    }
                    _ => fail(*factor),
                }
            }
            Criterion::BelowOwnTolerance { tolerance_column, .. } => {
                let tols = report.column(tolerance_column).unwrap_or_default();
                if values.is_empty() || tols.len() != values.len() {
                    return fail(0.0);
                }
                // worst ratio of deviation to tolerance
                let worst = values.iter().zip(&tols).map(|(v, t)| v / t).fold(f64::NEG_INFINITY, nan_max);
                verdict(worst < 1.0, worst, 1.0)
            }
        }
    }
}

/// `max` that propagates NaN, so missing values fail.
fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn nan_min(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.min(b)
    }
}

/// Rows of one experiment with the criteria that judge them. Verdicts are
/// recomputed from the rows on demand and never stored.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub experiment: String,
    pub exhaustion: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    pub criteria: Vec<Criterion>,
}

impl ConvergenceReport {
    pub fn new(experiment: impl Into<String>, exhaustion: impl Into<String>, columns: Vec<String>) -> Self {
        ConvergenceReport {
            experiment: experiment.into(),
            exhaustion: exhaustion.into(),
            columns,
            rows: Vec::new(),
            criteria: Vec::new(),
        }
    }

    pub fn push_row(&mut self, label: impl Into<String>, index: f64, values: Vec<f64>) -> Result<()> {
        if values.len() != self.columns.len() {
            return Err(BlabError::InvalidArgument(format!(
                "row has {} values for {} columns",
                values.len(),
                self.columns.len()
            )));
        }
        self.rows.push(Row { label: label.into(), index, values });
        Ok(())
    }

    pub fn column_position(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_position(name)?;
        Some(self.rows.iter().map(|r| r.values[i]).collect())
    }

    fn row_position(&self, index: f64) -> Option<usize> {
        self.rows.iter().position(|r| (r.index - index).abs() <= 1e-12 * index.abs().max(1.0))
    }

    pub fn value(&self, column: &str, index: f64) -> Option<f64> {
        let c = self.column_position(column)?;
        self.row_position(index).map(|r| self.rows[r].values[c])
    }

    pub fn verdicts(&self) -> Vec<Verdict> {
        self.criteria.iter().map(|c| c.evaluate(self)).collect()
    }

    pub fn passed(&self) -> bool {
        self.verdicts().iter().all(|v| v.passed)
    }

    /// The column's final value.
    pub fn final_value(&self, column: &str) -> Option<f64> {
        self.column(column).and_then(|v| v.last().copied())
    }

    /// CSV with header `label,index,<columns…>`; numbers in shortest
    /// round-trip exponent form.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["label".to_string(), "index".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.label.clone(), format_number(row.index)];
            rec.extend(row.values.iter().map(|&v| format_number(v)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| BlabError::Io(e.to_string()))
    }

    /// Summary with verdicts, tolerances and per-row values.
    pub fn summary(&self) -> Value {
        let verdicts = self.verdicts();
        let lp: BTreeMap<String, Value> = self
            .columns
            .iter()
            .filter(|c| c.starts_with("lp_"))
            .map(|c| (c.trim_start_matches("lp_").to_string(), json_number(self.final_value(c))))
            .collect();
        let decreasing = Criterion::DecreasingTail { column: SUP_ERROR.into(), window: 3 };
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = serde_json::Map::new();
                m.insert("label".into(), json!(r.label));
                m.insert("index".into(), json_number(Some(r.index)));
                for (c, v) in self.columns.iter().zip(&r.values) {
                    m.insert(c.clone(), json_number(Some(*v)));
                }
                Value::Object(m)
            })
            .collect();
        json!({
            "experiment": self.experiment,
            "exhaustion": self.exhaustion,
            "passed": verdicts.iter().all(|v| v.passed),
            "verdicts": verdicts,
            "tolerances": self.criteria,
            "sup_error_decreasing_tail": self.column_position(SUP_ERROR).map(|_| decreasing.evaluate(self).passed),
            "final_sup_error": json_number(self.final_value(SUP_ERROR)),
            "final_lp_errors": lp,
            "rows": rows,
        })
    }
}

fn json_number(v: Option<f64>) -> Value {
    match v {
        Some(x) if x.is_finite() => json!(x),
        _ => Value::Null,
    }
}

/// Shortest round-trip representation; `NaN`, `inf`, `-inf` otherwise.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(values: &[f64]) -> ConvergenceReport {
        let mut r = ConvergenceReport::new("t", "e", vec![SUP_ERROR.into(), "aux".into()]);
        for (j, v) in values.iter().enumerate() {
            r.push_row(format!("j={}", j + 1), (j + 1) as f64, vec![*v, 1.0 - v]).unwrap();
        }
        r
    }

    #[test]
    fn verdicts_follow_rows() {
        let mut r = report(&[0.5, 0.2, 0.3, 0.1, 0.05, 0.01]);
        r.criteria = vec![
            Criterion::DecreasingTail { column: SUP_ERROR.into(), window: 3 },
            Criterion::FinalBelow { column: SUP_ERROR.into(), tol: 0.02 },
            Criterion::ShrinksBy { column: SUP_ERROR.into(), step: 2, factor: 0.5 },
            Criterion::Increasing { column: "aux".into() },
        ];
        let v = r.verdicts();
        assert!(v[0].passed && v[1].passed && v[2].passed);
        assert!(!v[3].passed);
        assert!(!r.passed());
        r.rows.last_mut().unwrap().values[0] = 0.2;
        assert!(!r.verdicts()[0].passed);
    }

    #[test]
    fn nan_values_fail() {
        let mut r = report(&[0.5, f64::NAN]);
        r.criteria = vec![Criterion::AllBelow { column: SUP_ERROR.into(), tol: 1.0 }];
        assert!(!r.passed());
        r.criteria = vec![Criterion::FinalBelow { column: "missing".into(), tol: 1.0 }];
        assert!(!r.passed());
    }

    #[test]
    fn ratio_and_near() {
        let mut r = report(&[0.5, 0.2, 0.1]);
        r.criteria = vec![
            Criterion::RatioAtLeast { column: SUP_ERROR.into(), numerator: 1.0, denominator: 3.0, factor: 5.0 },
            Criterion::NearAt { column: "aux".into(), index: 2.0, target: 0.8, tol: 1e-12 },
        ];
        assert!(r.passed());
    }

    #[test]
    fn csv_layout_and_round_trip() {
        let r = report(&[0.5, 1.0 / 3.0]);
        let s = r.to_csv_string().unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next().unwrap(), "label,index,sup_error,aux");
        assert_eq!(lines.next().unwrap(), "j=1,1e0,5e-1,5e-1");
        let third: f64 = s.lines().nth(2).unwrap().split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(third, 1.0 / 3.0);
        let summary = r.summary();
        assert_eq!(summary["final_sup_error"], json!(1.0 / 3.0));
    }
}

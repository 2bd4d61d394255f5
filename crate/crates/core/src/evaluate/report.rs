use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use super::{CvScheme, EvaluateError, ResultTable};
use crate::featurize::Target;
use crate::model::ModelKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(format!("unknown report format `{s}` (expected md or csv)")),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Markdown => "md",
            ReportFormat::Csv => "csv",
        })
    }
}

const REGRESSION_METRICS: [(&str, &str); 3] = [("mae", "MAE"), ("rmse", "RMSE"), ("evs", "EVS")];
const CLASSIFICATION_METRICS: [(&str, &str); 2] = [("accuracy", "Accuracy"), ("f1", "F1")];

fn round3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn title(target: Target) -> String {
    let name = target.name();
    name[..1].to_uppercase() + &name[1..]
}

/// Renders a model × metric grid. Rows follow the fixed model order; column
/// groups are ordered by CV scheme (leave-one-juice-out first) and then by
/// target. Values are rounded to 3 decimals; missing cells are blank.
pub fn format_report(tables: &[ResultTable], format: ReportFormat) -> Result<String, EvaluateError> {
    let first = tables.first().ok_or(EvaluateError::EmptyReport)?;
    let regression = first.task.is_regression();
    if tables.iter().any(|t| t.task.is_regression() != regression) {
        return Err(EvaluateError::MixedLayout);
    }
    let metrics: &[(&str, &str)] = if regression {
        &REGRESSION_METRICS
    } else {
        &CLASSIFICATION_METRICS
    };

    let mut cells: BTreeMap<(ModelKind, CvScheme, Target), &ResultTable> = BTreeMap::new();
    for t in tables {
        if cells.insert((t.model, t.cv, t.task), t).is_some() {
            return Err(EvaluateError::DuplicateResult {
                model: t.model,
                target: t.task,
                cv: t.cv,
            });
        }
    }
    let groups: BTreeSet<(CvScheme, Target)> = tables.iter().map(|t| (t.cv, t.task)).collect();
    let models: BTreeSet<ModelKind> = tables.iter().map(|t| t.model).collect();

    let mut header = vec!["Model".to_string()];
    for (cv, target) in &groups {
        for (key, label) in metrics {
            header.push(match format {
                ReportFormat::Markdown => format!("{} {} {label}", title(*target), cv.name().to_uppercase()),
                ReportFormat::Csv => format!("{}_{}_{key}", target.name(), cv.name()),
            });
        }
    }
    let rows: Vec<Vec<String>> = models
        .iter()
        .map(|&model| {
            let mut row = vec![model.display_name(regression).to_string()];
            for &(cv, target) in &groups {
                let table = cells.get(&(model, cv, target));
                for (key, _) in metrics {
                    row.push(
                        table
                            .and_then(|t| t.metrics.get(*key))
                            .map(|v| round3(*v))
                            .unwrap_or_default(),
                    );
                }
            }
            row
        })
        .collect();

    let mut out = String::new();
    match format {
        ReportFormat::Markdown => {
            out.push_str(&format!("| {} |\n", header.join(" | ")));
            out.push_str(&format!("|{}\n", "---|".repeat(header.len())));
            for row in rows {
                out.push_str(&format!("| {} |\n", row.join(" | ")));
            }
        }
        ReportFormat::Csv => {
            out.push_str(&header.join(","));
            out.push('\n');
            for row in rows {
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::PredictionSet;

    fn table(model: ModelKind, task: Target, cv: CvScheme, metrics: &[(&str, f64)]) -> ResultTable {
        let predictions = if task.is_regression() {
            PredictionSet::Regression {
                y: vec![0.0],
                y_hat: vec![0.0],
            }
        } else {
            PredictionSet::Classification {
                y: vec!["a".into()],
                y_hat: vec!["a".into()],
            }
        };
        ResultTable {
            task,
            model,
            cv,
            seed: 0,
            metrics: metrics.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            sample_ids: vec!["s".into()],
            folds: vec![0],
            predictions,
        }
    }

    #[test]
    fn single_regression_row() {
        let t = table(
            ModelKind::Svm,
            Target::Bitterness,
            CvScheme::Loso,
            &[("mae", 0.7916), ("rmse", 1.25), ("evs", -0.0001)],
        );
        let csv = format_report(&[t], ReportFormat::Csv).unwrap();
        assert_eq!(
            csv,
            "Model,bitterness_loso_mae,bitterness_loso_rmse,bitterness_loso_evs\nSVR,0.792,1.250,0.000\n"
        );
    }

    #[test]
    fn classification_grid_has_table_shape() {
        let mut tables = Vec::new();
        for model in ModelKind::ALL.into_iter().rev() {
            for cv in [CvScheme::Loso, CvScheme::Lojo] {
                for task in [Target::Vineyard, Target::Region] {
                    tables.push(table(model, task, cv, &[("accuracy", 0.5), ("f1", 0.25)]));
                }
            }
        }
        let md = format_report(&tables, ReportFormat::Markdown).unwrap();
        let lines: Vec<&str> = md.lines().collect();
        assert_eq!(lines.len(), 2 + 8);
        assert!(lines[0].starts_with("| Model | Region LOJO Accuracy | Region LOJO F1 | Vineyard LOJO Accuracy"));
        assert_eq!(lines[0].matches('|').count(), 10);
        assert!(lines[2].starts_with("| SVM |"));
        assert!(lines[9].starts_with("| bi-LSTM |"));
    }

    #[test]
    fn mixed_and_duplicate_tables_are_rejected() {
        let r = table(ModelKind::Rf, Target::Astringency, CvScheme::Loso, &[]);
        let c = table(ModelKind::Rf, Target::Region, CvScheme::Loso, &[]);
        assert_eq!(
            format_report(&[r.clone(), c], ReportFormat::Csv),
            Err(EvaluateError::MixedLayout)
        );
        assert!(matches!(
            format_report(&[r.clone(), r], ReportFormat::Csv),
            Err(EvaluateError::DuplicateResult { .. })
        ));
        assert_eq!(format_report(&[], ReportFormat::Csv), Err(EvaluateError::EmptyReport));
    }
}

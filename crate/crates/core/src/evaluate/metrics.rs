use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::EvaluateError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub mae: f64,
    pub rmse: f64,
    pub evs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub f1: f64,
}

fn check_lengths(y: usize, y_hat: usize) -> Result<(), EvaluateError> {
    if y != y_hat {
        return Err(EvaluateError::LengthMismatch { y, y_hat });
    }
    if y == 0 {
        return Err(EvaluateError::EmptyPredictions);
    }
    Ok(())
}

fn population_variance(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let (sum, n) = values.clone().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    let mean = sum / n as f64;
    values.map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64
}

/// MAE, RMSE and explained variance `1 − Var(y − ŷ) / Var(y)` with
/// population variances.
pub fn regression_metrics(y: &[f64], y_hat: &[f64]) -> Result<RegressionMetrics, EvaluateError> {
    check_lengths(y.len(), y_hat.len())?;
    let n = y.len() as f64;
    let residuals = y.iter().zip(y_hat).map(|(a, b)| a - b);
    let mae = residuals.clone().map(f64::abs).sum::<f64>() / n;
    let rmse = (residuals.clone().map(|r| r * r).sum::<f64>() / n).sqrt();
    let var_y = population_variance(y.iter().copied());
    if var_y == 0.0 {
        return Err(EvaluateError::ZeroVariance);
    }
    let evs = 1.0 - population_variance(residuals) / var_y;
    Ok(RegressionMetrics { mae, rmse, evs })
}

/// Accuracy and macro-F1. The macro average runs over the classes present
/// in `y`; a class with zero precision and recall contributes 0.
pub fn classification_metrics<T: Ord>(y: &[T], y_hat: &[T]) -> Result<ClassificationMetrics, EvaluateError> {
    check_lengths(y.len(), y_hat.len())?;
    let correct = y.iter().zip(y_hat).filter(|(a, b)| a == b).count();
    let classes: BTreeSet<&T> = y.iter().collect();
    let mut f1_sum = 0.0;
    for &class in &classes {
        let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
        for (a, b) in y.iter().zip(y_hat) {
            match (a == class, b == class) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => {}
            }
        }
        let precision = if tp + fp > 0 { tp as f64 / (tp + fp) as f64 } else { 0.0 };
        let recall = if tp + fn_ > 0 {
            tp as f64 / (tp + fn_) as f64
        } else {
            0.0
        };
        if precision + recall > 0.0 {
            f1_sum += 2.0 * precision * recall / (precision + recall);
        }
    }
    Ok(ClassificationMetrics {
        accuracy: correct as f64 / y.len() as f64,
        f1: f1_sum / classes.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_cases() {
        let m = regression_metrics(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((m.mae, m.rmse, m.evs), (0.0, 0.0, 1.0));
        let m = regression_metrics(&[0.0, 2.0], &[1.0, 1.0]).unwrap();
        assert_eq!((m.mae, m.rmse, m.evs), (1.0, 1.0, 0.0));
        let m = regression_metrics(&[0.0, 4.0], &[1.0, 3.0]).unwrap();
        assert_eq!((m.mae, m.rmse, m.evs), (1.0, 1.0, 0.75));
    }

    #[test]
    fn constant_truth_has_no_evs() {
        assert_eq!(
            regression_metrics(&[2.0, 2.0], &[1.0, 3.0]),
            Err(EvaluateError::ZeroVariance)
        );
        assert_eq!(
            regression_metrics(&[1.0], &[1.0, 2.0]),
            Err(EvaluateError::LengthMismatch { y: 1, y_hat: 2 })
        );
    }

    #[test]
    fn classification_hand_cases() {
        let m = classification_metrics(&["a", "b"], &["a", "b"]).unwrap();
        assert_eq!((m.accuracy, m.f1), (1.0, 1.0));
        let m = classification_metrics(&["a", "b"], &["b", "a"]).unwrap();
        assert_eq!((m.accuracy, m.f1), (0.0, 0.0));
        let m = classification_metrics(&["A", "A", "B"], &["A", "B", "B"]).unwrap();
        assert!((m.accuracy - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn predicted_only_classes_do_not_enter_the_average() {
        // Class "c" is never true; it only lowers precision of nothing.
        let m = classification_metrics(&["a", "a"], &["a", "c"]).unwrap();
        assert_eq!(m.accuracy, 0.5);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn rmse_dominates_mae(pairs in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 2..20)) {
            let (y, y_hat): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            prop_assume!(population_variance(y.iter().copied()) > 1e-9);
            let m = regression_metrics(&y, &y_hat).unwrap();
            prop_assert!(m.rmse >= m.mae - 1e-12);
            prop_assert!(m.evs <= 1.0);
        }

        #[test]
        fn constant_residuals_give_unit_evs(y in prop::collection::vec(-10.0..10.0f64, 2..20), shift in -3.0..3.0f64) {
            prop_assume!(population_variance(y.iter().copied()) > 1e-6);
            let y_hat: Vec<f64> = y.iter().map(|v| v + shift).collect();
            let m = regression_metrics(&y, &y_hat).unwrap();
            prop_assert!((m.evs - 1.0).abs() < 1e-9);
        }
    }
}

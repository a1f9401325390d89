use crate::error::{Error, Result};

fn check_shapes(predictions: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<()> {
    if predictions.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            what: "sample count",
            expected: targets.len(),
            found: predictions.len(),
        });
    }
    for (p, t) in predictions.iter().zip(targets) {
        if p.len() != t.len() {
            return Err(Error::DimensionMismatch {
                what: "output width",
                expected: t.len(),
                found: p.len(),
            });
        }
    }
    Ok(())
}

/// Mean squared error over all samples and output components.
pub fn mse(predictions: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64> {
    check_shapes(predictions, targets)?;
    let count: usize = targets.iter().map(Vec::len).sum();
    if count == 0 {
        return Err(Error::InvalidInput("mse of an empty set".into()));
    }
    let sum: f64 = predictions
        .iter()
        .zip(targets)
        .flat_map(|(p, t)| p.iter().zip(t).map(|(a, b)| (a - b) * (a - b)))
        .sum();
    Ok(sum / count as f64)
}

/// Mean of the per-component coefficients of determination. Components
/// whose targets have zero variance are skipped.
pub fn r2_score(predictions: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64> {
    check_shapes(predictions, targets)?;
    if targets.len() < 2 {
        return Err(Error::UndefinedMetric(format!(
            "R² needs at least 2 samples, got {}",
            targets.len()
        )));
    }
    let width = targets[0].len();
    if targets.iter().any(|t| t.len() != width) {
        return Err(Error::InvalidInput("targets have ragged widths".into()));
    }
    let n = targets.len() as f64;
    let mut total = 0.0;
    let mut used = 0usize;
    for c in 0..width {
        let mean = targets.iter().map(|t| t[c]).sum::<f64>() / n;
        let ss_tot: f64 = targets.iter().map(|t| (t[c] - mean).powi(2)).sum();
        if ss_tot == 0.0 {
            continue;
        }
        let ss_res: f64 = predictions
            .iter()
            .zip(targets)
            .map(|(p, t)| (t[c] - p[c]).powi(2))
            .sum();
        total += 1.0 - ss_res / ss_tot;
        used += 1;
    }
    if used == 0 {
        return Err(Error::UndefinedMetric(
            "every target component has zero variance".into(),
        ));
    }
    Ok(total / used as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_examples() {
        let t = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        assert_eq!(mse(&t, &t).unwrap(), 0.0);
        let shifted: Vec<Vec<f64>> = t.iter().map(|r| r.iter().map(|v| v + 1.0).collect()).collect();
        assert_eq!(mse(&shifted, &t).unwrap(), 1.0);
        assert_eq!(mse(&[vec![0.0, 0.0]], &[vec![3.0, 4.0]]).unwrap(), 12.5);
        assert!(mse(&[vec![0.0]], &[vec![0.0, 1.0]]).is_err());
        assert!(mse(&[], &[vec![0.0]]).is_err());
    }

    #[test]
    fn r2_examples() {
        let t = vec![vec![1.0], vec![2.0], vec![3.0]];
        assert_eq!(r2_score(&t, &t).unwrap(), 1.0);
        let mean = vec![vec![2.0]; 3];
        assert_eq!(r2_score(&mean, &t).unwrap(), 0.0);
    }

    #[test]
    fn r2_skips_constant_components() {
        let t = vec![vec![1.0, 5.0], vec![3.0, 5.0]];
        let p = vec![vec![1.0, 0.0], vec![3.0, 0.0]];
        assert_eq!(r2_score(&p, &t).unwrap(), 1.0);
        let flat = vec![vec![5.0], vec![5.0]];
        assert!(matches!(r2_score(&flat, &flat), Err(Error::UndefinedMetric(_))));
        assert!(matches!(
            r2_score(&[vec![1.0]], &[vec![1.0]]),
            Err(Error::UndefinedMetric(_))
        ));
    }
}

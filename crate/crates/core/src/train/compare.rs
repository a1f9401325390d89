use std::fmt::Write as _;

use super::{train, TrainConfig, TrainReport};
use crate::data::Dataset;
use crate::error::Result;
use crate::model::Architecture;

/// Published figures `(architecture, MSE, R²)` for the three models. They
/// come from a finite-element dataset that is not available, so they are
/// printed next to our numbers for orientation and never checked.
pub const REFERENCE_RESULTS: [(Architecture, f64, f64); 3] = [
    (Architecture::ClassicalQuantum, 0.00096, 0.96143),
    (Architecture::QuantumClassical, 0.00047, 0.98445),
    (Architecture::SpdEnhanced, 0.00031, 0.98765),
];

/// Formats `x` with `digits` significant digits, switching to scientific
/// notation for very small or large magnitudes.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.*}", digits.saturating_sub(1), 0.0);
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&exp) {
        return format!("{:.*e}", digits.saturating_sub(1), x);
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into a new leading digit (9.99996 -> 10.0000).
    let rounded: f64 = s.parse().unwrap_or(x);
    if decimals > 0 && rounded.abs() >= 10f64.powi(exp + 1) {
        return format!("{x:.*}", decimals - 1);
    }
    s
}

/// Reports for all three architectures trained on the same data.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub reports: Vec<TrainReport>,
}

impl Comparison {
    /// Aligned text table with columns Model, MSE and R² Score, followed
    /// by the published reference values as footnotes.
    pub fn table(&self) -> String {
        let rows: Vec<[String; 3]> = self
            .reports
            .iter()
            .map(|r| {
                [
                    r.architecture.label().to_string(),
                    r.test_mse.map_or_else(|| "n/a".into(), |v| format_sig(v, 5)),
                    r.test_r2.map_or_else(|| "n/a".into(), |v| format_sig(v, 5)),
                ]
            })
            .collect();
        let header = ["Model", "MSE", "R² Score"];
        let width = |c: usize| {
            rows.iter()
                .map(|r| r[c].chars().count())
                .chain([header[c].chars().count()])
                .max()
                .unwrap_or(0)
        };
        let w = [width(0), width(1), width(2)];
        let mut s = String::new();
        let line = |s: &mut String, cells: [&str; 3]| {
            let pad = |t: &str, n: usize| format!("{t}{}", " ".repeat(n - t.chars().count()));
            let _ = writeln!(
                s,
                "| {} | {} | {} |",
                pad(cells[0], w[0]),
                pad(cells[1], w[1]),
                pad(cells[2], w[2])
            );
        };
        line(&mut s, header);
        let _ = writeln!(
            s,
            "|{}|{}|{}|",
            "-".repeat(w[0] + 2),
            "-".repeat(w[1] + 2),
            "-".repeat(w[2] + 2)
        );
        for r in &rows {
            line(&mut s, [&r[0], &r[1], &r[2]]);
        }
        let units = self.reports.first().map_or("standardized", |r| r.metric_units.name());
        let _ = writeln!(s);
        let _ = writeln!(s, "Metrics on the held-out split, {units} targets.");
        let _ = writeln!(
            s,
            "Reference values from the original finite-element study (not reproducible here, for comparison only):"
        );
        for (arch, mse, r2) in REFERENCE_RESULTS {
            let _ = writeln!(s, "  {}: MSE {mse}, R² {r2}", arch.label());
        }
        s
    }
}

/// Trains each architecture with `base` (its architecture field is
/// overridden) on `dataset`, in table order.
pub fn compare_architectures(base: &TrainConfig, dataset: &Dataset) -> Result<Comparison> {
    let reports = Architecture::ALL
        .iter()
        .map(|&architecture| {
            let config = TrainConfig {
                architecture,
                ..base.clone()
            };
            train(&config, dataset).map(|o| o.report)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Comparison { reports })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_digits() {
        assert_eq!(format_sig(0.00031, 5), "0.00031000");
        assert_eq!(format_sig(0.98765, 5), "0.98765");
        assert_eq!(format_sig(1.0, 5), "1.0000");
        assert_eq!(format_sig(123.456789, 5), "123.46");
        assert_eq!(format_sig(9.999996, 5), "10.000");
        assert_eq!(format_sig(-0.5, 3), "-0.500");
        assert_eq!(format_sig(0.0, 5), "0.0000");
        assert_eq!(format_sig(1.234e-7, 5), "1.2340e-7");
    }
}

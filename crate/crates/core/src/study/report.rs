//! Study results, log-log slopes and CSV/JSON output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::Result;
use crate::linalg::{fmt_f64, least_squares_line};
use crate::study::StudyConfig;

/// One measured value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub h: f64,
    pub metric: String,
    pub value: f64,
}

/// Least-squares slope of log(value) against log(h) for one metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slope {
    pub metric: String,
    /// `None` when every value of the metric is exactly zero.
    pub slope: Option<f64>,
    /// Half-width of the 95% confidence interval of the slope; `None` when
    /// it cannot be estimated (exact metrics or only two usable points).
    pub ci95: Option<f64>,
    pub points: usize,
}

impl Slope {
    pub fn is_exact(&self) -> bool {
        self.slope.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config: StudyConfig,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub rows: Vec<Row>,
    pub slopes: Vec<Slope>,
    pub provenance: Provenance,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Minimum number of distinct h values before slopes are fitted.
pub const MIN_SLOPE_LEVELS: usize = 3;

impl StudyResult {
    /// Sorts rows by decreasing h (coarse to fine), keeping the insertion
    /// order of metrics within a level, and fits slopes.
    pub fn new(mut rows: Vec<Row>, config: StudyConfig) -> Self {
        let mut order: BTreeMap<String, usize> = BTreeMap::new();
        for row in &rows {
            let next = order.len();
            order.entry(row.metric.clone()).or_insert(next);
        }
        rows.sort_by(|a, b| b.h.total_cmp(&a.h).then(order[&a.metric].cmp(&order[&b.metric])));
        let slopes = fit_slopes(&rows);
        Self { rows, slopes, provenance: Provenance { config, version: env!("CARGO_PKG_VERSION").to_string() } }
    }

    pub fn slope(&self, metric: &str) -> Option<&Slope> {
        self.slopes.iter().find(|s| s.metric == metric)
    }

    /// Values of one metric in row order.
    pub fn series(&self, metric: &str) -> Vec<(f64, f64)> {
        self.rows.iter().filter(|r| r.metric == metric).map(|r| (r.h, r.value)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,metric,value\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{}", fmt_f64(r.h), r.metric, fmt_f64(r.value));
        }
        for s in &self.slopes {
            match s.slope {
                Some(v) => {
                    let _ = writeln!(out, "slope,{},{}", s.metric, fmt_f64(v));
                }
                None => {
                    let _ = writeln!(out, "slope,{},exact", s.metric);
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Fits a slope per metric over the positive values. Metrics whose values
/// are all exactly zero are marked exact; metrics seen at fewer than
/// [`MIN_SLOPE_LEVELS`] mesh sizes get no slope row.
pub fn fit_slopes(rows: &[Row]) -> Vec<Slope> {
    let mut metrics: Vec<&str> = Vec::new();
    for r in rows {
        if !metrics.contains(&r.metric.as_str()) {
            metrics.push(&r.metric);
        }
    }
    let mut out = Vec::new();
    for metric in metrics {
        let points: Vec<(f64, f64)> = rows.iter().filter(|r| r.metric == metric).map(|r| (r.h, r.value)).collect();
        let mut hs: Vec<f64> = points.iter().map(|p| p.0).collect();
        hs.sort_by(f64::total_cmp);
        hs.dedup();
        if hs.len() < MIN_SLOPE_LEVELS {
            continue;
        }
        if points.iter().all(|p| p.1 == 0.0) {
            out.push(Slope { metric: metric.to_string(), slope: None, ci95: None, points: points.len() });
            continue;
        }
        let usable: Vec<(f64, f64)> = points.into_iter().filter(|p| p.0 > 0.0 && p.1 > 0.0 && p.1.is_finite()).collect();
        if usable.len() < 2 {
            continue;
        }
        let x: Vec<f64> = usable.iter().map(|p| p.0.ln()).collect();
        let y: Vec<f64> = usable.iter().map(|p| p.1.ln()).collect();
        let (slope, intercept) = least_squares_line(&x, &y);
        out.push(Slope {
            metric: metric.to_string(),
            slope: Some(slope),
            ci95: slope_ci95(&x, &y, slope, intercept),
            points: usable.len(),
        });
    }
    out
}

fn slope_ci95(x: &[f64], y: &[f64], slope: f64, intercept: f64) -> Option<f64> {
    let n = x.len();
    if n < 3 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let stderr = (sse / (n - 2) as f64 / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, (n - 2) as f64).ok()?.inverse_cdf(0.975);
    Some(t * stderr)
}

/// Writes `result` to `path` in the requested format.
pub fn emit_report(result: &StudyResult, path: &Path, format: OutputFormat) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => result.to_csv(),
        OutputFormat::Json => result.to_json()?,
    };
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(h: f64, metric: &str, value: f64) -> Row {
        Row { h, metric: metric.into(), value }
    }

    #[test]
    fn slopes_of_power_laws() {
        let rows: Vec<Row> = [0.4, 0.2, 0.1, 0.05]
            .iter()
            .flat_map(|&h| [row(h, "quad", 3.0 * h * h), row(h, "zero", 0.0)])
            .collect();
        let slopes = fit_slopes(&rows);
        assert!((slopes[0].slope.unwrap() - 2.0).abs() < 1e-12);
        assert!(slopes[0].ci95.unwrap() < 1e-9);
        assert!(slopes[1].is_exact());
    }

    #[test]
    fn two_levels_give_no_slope() {
        let rows = vec![row(0.2, "a", 1.0), row(0.1, "a", 0.5)];
        assert!(fit_slopes(&rows).is_empty());
    }
}

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line through (distance, ln value).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub used: usize,
    pub dropped: usize,
}

impl DecayFit {
    /// Empirical decay rate m̂ = -slope.
    pub fn rate(&self) -> f64 {
        -self.slope
    }
}

pub fn decay_fit(points: &[(f64, f64)]) -> Result<DecayFit> {
    let kept: Vec<(f64, f64)> = points.iter().filter(|p| p.1 > 0.0 && p.1.is_finite()).map(|&(d, v)| (d, v.ln())).collect();
    let dropped = points.len() - kept.len();
    let mut distinct: Vec<f64> = kept.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} distinct distances after dropping {dropped} nonpositive values",
            distinct.len()
        )));
    }
    let n = kept.len() as f64;
    let mx = kept.iter().map(|p| p.0).sum::<f64>() / n;
    let my = kept.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = kept.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = kept.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = kept.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(DecayFit { slope, intercept, r_squared, used: kept.len(), dropped })
}

/// Summary of correlator samples at one distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub distance: u64,
    pub mean: f64,
    pub median: f64,
    /// Normal-approximation 95% interval of the mean.
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: usize,
}

pub fn decay_curve(samples: &[(u64, Vec<f64>)]) -> Result<Vec<DecayPoint>> {
    samples
        .iter()
        .map(|(d, v)| {
            if v.is_empty() {
                return Err(Error::InsufficientData(format!("no samples at distance {d}")));
            }
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let mut sorted = v.clone();
            sorted.sort_by(f64::total_cmp);
            let mid = sorted.len() / 2;
            let median = if sorted.len() % 2 == 0 { 0.5 * (sorted[mid - 1] + sorted[mid]) } else { sorted[mid] };
            let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            let half = z95() * (var / n).sqrt();
            Ok(DecayPoint { distance: *d, mean, median, ci_low: mean - half, ci_high: mean + half, samples: v.len() })
        })
        .collect()
}

fn z95() -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(0.975)
}

pub fn write_decay_csv(path: &Path, points: &[DecayPoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["distance", "mean", "median", "ci_low", "ci_high"])?;
    for p in points {
        w.write_record([p.distance.to_string(), p.mean.to_string(), p.median.to_string(), p.ci_low.to_string(), p.ci_high.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

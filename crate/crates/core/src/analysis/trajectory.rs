use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::Vector;

/// Squared distance and squared residual at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointMetrics {
    pub dist_sq: Option<f64>,
    pub residual_sq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub n: u64,
    /// `dist(X_n, X*)²`, absent when the solution set is unknown.
    pub dist_sq: Option<f64>,
    /// `‖V(X_n)‖²` with the exact field.
    pub residual_sq: f64,
    pub iterate_norm: f64,
    /// Metrics of the OG residual iterate `X_n + γ_{n−1} V̂_{n−1}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_iterate: Option<PointMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
}

impl MetricRecord {
    pub fn metric(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::DistSq => self.dist_sq,
            Metric::ResidualSq => Some(self.residual_sq),
            Metric::IterateNormSq => Some(self.iterate_norm * self.iterate_norm),
            Metric::ResidualIterateDistSq => self.residual_iterate.and_then(|m| m.dist_sq),
            Metric::ResidualIterateResidualSq => self.residual_iterate.map(|m| m.residual_sq),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub iteration: u64,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub run_id: u64,
    pub seed: u64,
    /// Digest of the solver, schedule, oracle and problem that produced it.
    pub fingerprint: String,
    pub records: Vec<MetricRecord>,
    pub oracle_calls: u64,
    pub divergence: Option<Divergence>,
}

impl Trajectory {
    /// `(n, value)` for every record where `metric` is defined.
    pub fn series(&self, metric: Metric) -> Result<Vec<(u64, f64)>> {
        let out: Vec<(u64, f64)> = self
            .records
            .iter()
            .filter_map(|r| r.metric(metric).map(|v| (r.n, v)))
            .collect();
        if out.is_empty() && !self.records.is_empty() {
            return Err(Error::UnsupportedMetric(format!("trajectory carries no {metric} values")));
        }
        Ok(out)
    }

    pub fn indices(&self) -> Vec<u64> {
        self.records.iter().map(|r| r.n).collect()
    }

    /// Recorded iterates, when snapshots were kept.
    pub fn points(&self) -> Result<Vec<Vector>> {
        self.records
            .iter()
            .map(|r| {
                r.point
                    .as_ref()
                    .map(|p| Vector::from_column_slice(p))
                    .ok_or_else(|| Error::InsufficientData("trajectory was recorded without iterate snapshots".into()))
            })
            .collect()
    }

    pub fn record_at(&self, n: u64) -> Option<&MetricRecord> {
        self.records
            .binary_search_by_key(&n, |r| r.n)
            .ok()
            .map(|i| &self.records[i])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    DistSq,
    ResidualSq,
    IterateNormSq,
    ResidualIterateDistSq,
    ResidualIterateResidualSq,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::DistSq,
        Metric::ResidualSq,
        Metric::IterateNormSq,
        Metric::ResidualIterateDistSq,
        Metric::ResidualIterateResidualSq,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::DistSq => "dist_sq",
            Metric::ResidualSq => "residual_sq",
            Metric::IterateNormSq => "iterate_norm_sq",
            Metric::ResidualIterateDistSq => "residual_iterate_dist_sq",
            Metric::ResidualIterateResidualSq => "residual_iterate_residual_sq",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown metric '{s}'")))
    }
}

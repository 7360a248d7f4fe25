use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{Metric, Trajectory};
use crate::error::{Error, Result};
use crate::problems::Vector;

/// Pointwise mean and population standard deviation across runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateCurve {
    pub metric: Metric,
    pub n: Vec<u64>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    pub runs: usize,
}

impl AggregateCurve {
    pub fn value_at(&self, n: u64) -> Option<(f64, f64)> {
        self.n.binary_search(&n).ok().map(|i| (self.mean[i], self.sd[i]))
    }

    /// `(n, mean)` pairs, for slope fitting.
    pub fn mean_series(&self) -> Vec<(u64, f64)> {
        self.n.iter().copied().zip(self.mean.iter().copied()).collect()
    }

    /// Average of the means over records with `lo ≤ n ≤ hi`.
    pub fn window_mean(&self, lo: u64, hi: u64) -> Result<f64> {
        let values: Vec<f64> = self
            .mean_series()
            .into_iter()
            .filter(|&(n, _)| n >= lo && n <= hi)
            .map(|(_, v)| v)
            .collect();
        if values.is_empty() {
            return Err(Error::InsufficientData(format!("no records in [{lo}, {hi}]")));
        }
        Ok(values.iter().sum::<f64>() / values.len() as f64)
    }

    /// CSV with columns `n,mean,sd,runs`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["n", "mean", "sd", "runs"])?;
        let runs = self.runs.to_string();
        for i in 0..self.n.len() {
            w.write_record([
                self.n[i].to_string(),
                self.mean[i].to_string(),
                self.sd[i].to_string(),
                runs.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Aggregates `metric` over trajectories that share a record cadence.
pub fn aggregate_runs(trajectories: &[Trajectory], metric: Metric) -> Result<AggregateCurve> {
    if trajectories.is_empty() {
        return Err(Error::InsufficientData("no trajectories to aggregate".into()));
    }
    let series: Vec<Vec<(u64, f64)>> = trajectories.iter().map(|t| t.series(metric)).collect::<Result<_>>()?;
    let n: Vec<u64> = series[0].iter().map(|&(n, _)| n).collect();
    for s in &series[1..] {
        if s.len() != n.len() || s.iter().zip(&n).any(|(&(a, _), &b)| a != b) {
            return Err(Error::MismatchedCadence);
        }
    }
    let runs = series.len();
    let k = runs as f64;
    let mut mean = Vec::with_capacity(n.len());
    let mut sd = Vec::with_capacity(n.len());
    for i in 0..n.len() {
        // Shifted by the first run so identical values give sd = 0 exactly.
        let shift = series[0][i].1;
        let dm = series.iter().map(|s| s[i].1 - shift).sum::<f64>() / k;
        let var = series.iter().map(|s| (s[i].1 - shift - dm).powi(2)).sum::<f64>() / k;
        mean.push(shift + dm);
        sd.push(var.sqrt());
    }
    Ok(AggregateCurve {
        metric,
        n,
        mean,
        sd,
        runs,
    })
}

/// Running uniform averages `(1/k) Σ_{i≤k} x_i`.
pub fn ergodic_average(points: &[Vector]) -> Vec<Vector> {
    let mut out = Vec::with_capacity(points.len());
    let Some(first) = points.first() else {
        return out;
    };
    let mut sum = Vector::zeros(first.len());
    for (k, p) in points.iter().enumerate() {
        sum += p;
        out.push(&sum / (k + 1) as f64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::MetricRecord;

    fn traj(values: &[(u64, f64)]) -> Trajectory {
        Trajectory {
            run_id: 0,
            seed: 0,
            fingerprint: String::new(),
            records: values
                .iter()
                .map(|&(n, v)| MetricRecord {
                    n,
                    dist_sq: Some(v),
                    residual_sq: v,
                    iterate_norm: v.sqrt(),
                    residual_iterate: None,
                    point: None,
                })
                .collect(),
            oracle_calls: 0,
            divergence: None,
        }
    }

    #[test]
    fn single_and_pair() {
        let a = traj(&[(1, 1.0), (2, 0.5)]);
        let c = aggregate_runs(std::slice::from_ref(&a), Metric::DistSq).unwrap();
        assert_eq!(c.mean, vec![1.0, 0.5]);
        assert_eq!(c.sd, vec![0.0, 0.0]);

        let b = traj(&[(1, 3.0), (2, 0.5)]);
        let c = aggregate_runs(&[a, b], Metric::DistSq).unwrap();
        assert_eq!(c.value_at(1), Some((2.0, 1.0)));
        assert_eq!(c.runs, 2);
    }

    #[test]
    fn identical_runs_have_zero_sd() {
        let runs: Vec<Trajectory> = (0..3).map(|_| traj(&[(1, 94.86024134009877), (2, 0.1)])).collect();
        let c = aggregate_runs(&runs, Metric::DistSq).unwrap();
        assert_eq!(c.sd, vec![0.0, 0.0]);
        assert_eq!(c.mean, vec![94.86024134009877, 0.1]);
    }

    #[test]
    fn mismatched_cadence() {
        let a = traj(&[(1, 1.0), (2, 0.5)]);
        let b = traj(&[(1, 1.0), (3, 0.5)]);
        assert!(matches!(aggregate_runs(&[a, b], Metric::DistSq), Err(Error::MismatchedCadence)));
        assert!(aggregate_runs(&[], Metric::DistSq).is_err());
    }

    #[test]
    fn missing_metric_is_reported() {
        let a = traj(&[(1, 1.0)]);
        assert!(matches!(
            aggregate_runs(&[a], Metric::ResidualIterateDistSq),
            Err(Error::UnsupportedMetric(_))
        ));
    }

    #[test]
    fn csv_layout() {
        let c = aggregate_runs(&[traj(&[(1, 0.25), (10, 1e-7)])], Metric::DistSq).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,mean,sd,runs\n1,0.25,0,1\n10,0.0000001,0,1\n");
    }

    #[test]
    fn ergodic_averages() {
        let v = |a: f64, b: f64| Vector::from_column_slice(&[a, b]);
        let avg = ergodic_average(&[v(1.0, 0.0), v(0.0, 1.0)]);
        assert_eq!(avg[1], v(0.5, 0.5));
        let constant = ergodic_average(&vec![v(2.0, -1.0); 5]);
        assert!(constant.iter().all(|a| *a == v(2.0, -1.0)));
        let alternating: Vec<Vector> = (0..1000).map(|k| if k % 2 == 0 { v(1.0, 1.0) } else { v(-1.0, -1.0) }).collect();
        let avg = ergodic_average(&alternating);
        for (k, a) in avg.iter().enumerate() {
            assert!(a.norm() <= 2f64.sqrt() / (k + 1) as f64 + 1e-15);
        }
        assert!(ergodic_average(&[]).is_empty());
    }
}

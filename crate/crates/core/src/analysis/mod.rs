//! Metrics over trajectories, closed-form planar expectation recursions,
//! rate fitting and theorem-constant predictions.

mod aggregate;
mod descent;
mod fit;
mod rates;
mod recursion;
mod trajectory;

pub use aggregate::{aggregate_runs, ergodic_average, AggregateCurve};
pub use descent::{check_descent_lemma, DescentCheck, DESCENT_BLOCK};
pub use fit::{fit_loglog_slope, LogLogFit, MIN_FIT_POINTS};
pub use rates::{predict_rate_constants, DecayReport, RatePrediction, TheoremSelector};
pub use recursion::{energy_recursion_dseg, energy_recursion_eg};
pub use trajectory::{Divergence, Metric, MetricRecord, PointMetrics, Trajectory};

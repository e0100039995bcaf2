//! Descriptive and regression statistics: Welch tests, fixed-effects
//! OLS/logit with cluster-robust covariance, EWMA series, kernel densities,
//! and participation summaries.

mod design;
mod glm;
mod series;
mod summaries;
mod welch;

pub use design::{DesignMatrix, ObservationMatrix, StatsError};
pub use glm::{fe_logit, fe_ols, FitOptions, RegressionFit, SeType};
pub use series::{ewma, gaussian_kde, Kde, SeriesError};
pub use summaries::{
    participation_rate_by_age, repeat_summary, stance_summary, stance_summary_grouped,
    RepeatSummary, StanceSummary,
};
pub use welch::{welch_t, WelchResult};

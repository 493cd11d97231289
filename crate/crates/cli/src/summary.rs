use serde::{Deserialize, Serialize};

use coint_alasso::montecarlo::{ComparisonReport, KdeCurve, MixedDistributionSummary, Scaling};
use coint_alasso::TuningRule64;

/// A mixed distribution without its raw sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistSummary {
    pub atom_prob: f64,
    pub atom_location: f64,
    pub n: usize,
    pub n_continuous: usize,
    pub bandwidth: Option<f64>,
    pub total_mass: f64,
    pub kde: Option<KdeCurve<f64>>,
}

impl From<&MixedDistributionSummary<f64>> for DistSummary {
    fn from(s: &MixedDistributionSummary<f64>) -> Self {
        DistSummary {
            atom_prob: s.atom_prob,
            atom_location: s.atom_location,
            n: s.n,
            n_continuous: s.continuous_sample.len(),
            bandwidth: s.bandwidth,
            total_mass: s.total_mass(),
            kde: s.kde.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordSummary {
    pub coord: usize,
    pub al: DistSummary,
    pub ols: DistSummary,
    pub limit: Option<DistSummary>,
    pub limit_comparison: Option<ComparisonReport<f64>>,
    /// KS distance between the full scaled AL and OLS errors.
    pub ks_al_ols: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub t: usize,
    pub rule: String,
    pub tuning: TuningRule64,
    pub lambda: f64,
    pub scaling: Scaling,
    pub seed: u64,
    pub beta: Vec<f64>,
    pub records_file: String,
    pub coords: Vec<CoordSummary>,
}

pub fn records_file(t: usize, rule: &str) -> String {
    format!("records_T{t}_lam{rule}.csv")
}

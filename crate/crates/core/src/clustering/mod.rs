//! Usage-mode clustering of vehicle-days.
//!
//! Each used vehicle-day becomes a [`FeatureVector`]; unused days form the
//! implicit `U` state and never enter K-means. Weekdays and weekends are
//! clustered separately, and a [`ClusterSet`] holds one model per day type.

mod analysis;
mod elbow;
mod feature;
mod kmeans;
mod transition;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{DayType, VehicleDay};

pub use analysis::{
    cluster_profiles, compare_datasets, transition_matrices, weekly_composition, ClusterProfile,
    CompositionRow, DatasetComparison, DatasetSummary,
};
pub use elbow::{elbow_k, elbow_scan, ElbowPoint, MAX_ELBOW_K};
pub use feature::{build_feature_vector, speed_profile, DayFeature, FeatureVector};
pub use kmeans::{
    assign, kmeans_fit, kmeans_fit_detailed, kmeans_refine, sum_of_squares, Cluster, ClusterModel,
    KMeansFit, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
pub use transition::{transition_matrix, TransitionMatrix};

/// Cluster membership of a vehicle-day, `Unused` being the implicit extra
/// state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DayState {
    Used(Cluster),
    Unused,
}

impl DayState {
    /// Row/column position in a `(k+1)`-state table, `U` last.
    pub fn state_index(self, k: usize) -> usize {
        match self {
            DayState::Used(c) => c.index(),
            DayState::Unused => k,
        }
    }

    pub fn cluster(self) -> Option<Cluster> {
        match self {
            DayState::Used(c) => Some(c),
            DayState::Unused => None,
        }
    }
}

impl std::fmt::Display for DayState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DayState::Used(c) => write!(f, "{c}"),
            DayState::Unused => f.write_str("U"),
        }
    }
}

/// One model per day type, sharing the same `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub models: Vec<ClusterModel>,
}

impl ClusterSet {
    pub fn new(weekday: ClusterModel, weekend: ClusterModel) -> Result<Self> {
        let set = Self {
            models: vec![weekday, weekend],
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        for dt in DayType::ALL {
            let n = self.models.iter().filter(|m| m.day_type == dt).count();
            if n != 1 {
                return Err(Error::data(format!(
                    "cluster set needs exactly one {dt} model, found {n}"
                )));
            }
        }
        if self.models.len() != 2 {
            return Err(Error::data("cluster set must hold two models"));
        }
        for m in &self.models {
            m.validate()?;
        }
        if self.models[0].k != self.models[1].k {
            return Err(Error::data("weekday and weekend models must share k"));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.models[0].k
    }

    pub fn model(&self, day_type: DayType) -> &ClusterModel {
        self.models
            .iter()
            .find(|m| m.day_type == day_type)
            .expect("validated cluster set")
    }

    pub fn classify(&self, day: &VehicleDay) -> DayState {
        match build_feature_vector(day) {
            DayFeature::Used(v) => DayState::Used(self.model(day.day_type).assign(&v)),
            DayFeature::Unused => DayState::Unused,
        }
    }

    pub fn label_days(&self, days: &[VehicleDay]) -> Vec<LabeledDay> {
        days.iter()
            .map(|d| LabeledDay {
                vehicle_id: d.vehicle_id.clone(),
                day_index: d.day_index,
                day_type: d.day_type,
                state: self.classify(d),
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cluster set serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let set: Self = serde_json::from_str(text)?;
        set.validate()?;
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDay {
    pub vehicle_id: String,
    pub day_index: u32,
    pub day_type: DayType,
    pub state: DayState,
}

/// Feature vectors of the used days of one day type.
pub fn features_for(days: &[VehicleDay], day_type: DayType) -> Vec<FeatureVector> {
    days.iter()
        .filter(|d| d.day_type == day_type)
        .filter_map(|d| build_feature_vector(d).vector().copied())
        .collect()
}

//! Machine-readable experiment results.

use super::ExperimentConfig;
use crate::rng::SeedSpec;
use serde::Serialize;
use std::collections::BTreeMap;

/// Where a result came from.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub seed: SeedSpec,
    pub version: String,
}

/// Named experiment output. Every verdict references a threshold recorded
/// in `thresholds`; there are no hidden constants.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub name: String,
    pub config: ExperimentConfig,
    pub estimates: BTreeMap<String, f64>,
    pub test_statistics: BTreeMap<String, f64>,
    pub thresholds: BTreeMap<String, f64>,
    pub verdicts: BTreeMap<String, bool>,
    /// Provenance, emitted as flat `seed` and `version` keys.
    #[serde(flatten)]
    pub provenance: Provenance,
    /// Wall-clock duration; excluded from the canonical form.
    pub runtime_ms: u64,
    /// Raw per-replica sample vectors, for optional CSV dumps. Not part of
    /// the JSON document.
    #[serde(skip)]
    pub samples: BTreeMap<String, Vec<f64>>,
}

impl ExperimentResult {
    pub(crate) fn new(config: &ExperimentConfig) -> Self {
        Self {
            name: config.name.clone(),
            config: config.clone(),
            estimates: BTreeMap::new(),
            test_statistics: BTreeMap::new(),
            thresholds: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            provenance: Provenance {
                seed: config.seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
            runtime_ms: 0,
            samples: BTreeMap::new(),
        }
    }

    pub fn replicas(&self) -> u64 {
        self.config.replicas
    }

    pub(crate) fn estimate(&mut self, key: &str, value: f64) {
        self.estimates.insert(key.to_string(), value);
    }

    pub(crate) fn statistic(&mut self, key: &str, value: f64) {
        self.test_statistics.insert(key.to_string(), value);
    }

    pub(crate) fn threshold(&mut self, key: &str, value: f64) {
        self.thresholds.insert(key.to_string(), value);
    }

    pub(crate) fn verdict(&mut self, key: &str, value: bool) {
        self.verdicts.insert(key.to_string(), value);
    }

    pub(crate) fn record_samples(&mut self, key: &str, values: Vec<f64>) {
        self.samples.insert(key.to_string(), values);
    }

    /// Full document, sorted keys, pretty-printed. Includes the runtime
    /// field (the only part that varies between identical runs).
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("result serializes");
        serde_json::to_string_pretty(&value).expect("result prints")
    }

    /// Canonical form for determinism comparisons: the full document with
    /// the runtime removed, compact encoding, sorted keys.
    pub fn canonical_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("result serializes");
        if let Some(object) = value.as_object_mut() {
            object.remove("runtime_ms");
        }
        serde_json::to_string(&value).expect("result prints")
    }
}

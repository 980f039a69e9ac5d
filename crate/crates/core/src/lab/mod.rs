//! Simulation lab: sample coefficient vectors, locate and classify the zeros,
//! and estimate densities, factorial moments and the real-count distribution.

mod classify;
mod estimators;
mod roots;
mod validate;

pub use classify::{classify_roots, Classification, DEFAULT_TAU};
pub use estimators::{
    estimate_density, estimate_mixed_moment, real_count_pmf, write_samples, BoxFamily, Cell, CellEstimate,
    DensityEstimate, LabEstimate, Pmf, PmfEntry,
};
pub use roots::{find_roots, RootOutcome, RootSettings};
pub use validate::{
    compare, registry, run_scenario, validation_report, ComparisonRecord, Quantity, Scenario, ScenarioSpec,
};

use crate::density::CoefficientModel;
use crate::rng::{substream, Purpose};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabSettings {
    pub samples: u64,
    pub seed: u64,
    /// Real-classification tolerance.
    pub tau: f64,
    /// Samples whose backward error exceeds this are flagged.
    pub residual_threshold: f64,
    pub max_iterations: usize,
}

impl Default for LabSettings {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 0,
            tau: DEFAULT_TAU,
            residual_threshold: 1e-8,
            max_iterations: 500,
        }
    }
}

impl LabSettings {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSample {
    pub coefficients: Vec<f64>,
    pub real_roots: Vec<f64>,
    pub complex_pairs: Vec<Complex64>,
    pub residual: f64,
    pub flagged: bool,
    /// Parity was restored by moving a borderline root to the axis.
    pub reclassified: bool,
}

impl ZeroSample {
    /// Zeros in `[lo, hi)`.
    pub fn real_count(&self, lo: f64, hi: f64) -> usize {
        self.real_roots.iter().filter(|x| **x >= lo && **x < hi).count()
    }
}

/// Draws sample `index` from its own stream and classifies its zeros.
pub fn sample_zeros(model: &CoefficientModel, index: u64, settings: &LabSettings) -> ZeroSample {
    let mut rng = substream(settings.seed, Purpose::Simulation, index);
    let n = model.degree();
    let mut coefficients = model.sample(&mut rng);
    while coefficients[n].abs() < 1e-300 {
        coefficients[n] = model.density(n).sample(&mut rng);
    }
    let root_settings = RootSettings {
        max_iterations: settings.max_iterations,
        ..RootSettings::default()
    };
    match find_roots(&coefficients, &root_settings) {
        Ok(o) => {
            let k = classify_roots(&o.roots, settings.tau);
            // An unconverged run is only a problem if it left a large residual.
            let flagged = !(o.residual <= settings.residual_threshold) || k.unmatched;
            ZeroSample {
                coefficients,
                real_roots: k.real_roots,
                complex_pairs: k.complex_pairs,
                residual: o.residual,
                flagged,
                reclassified: k.reclassified,
            }
        }
        Err(_) => ZeroSample {
            coefficients,
            real_roots: Vec::new(),
            complex_pairs: Vec::new(),
            residual: f64::INFINITY,
            flagged: true,
            reclassified: false,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::CoefficientDensity;

    #[test]
    fn degree_twenty_gaussian_samples() {
        let model = CoefficientModel::iid(20, CoefficientDensity::standard_gaussian()).unwrap();
        let s = LabSettings::new(200, 9);
        for i in 0..200 {
            let z = sample_zeros(&model, i, &s);
            assert!(!z.flagged, "{z:?}");
            assert_eq!(z.real_roots.len() + 2 * z.complex_pairs.len(), 20);
            assert!(z.residual < 1e-8);
            assert!(z.complex_pairs.iter().all(|p| p.im > 0.0));
        }
    }

    #[test]
    fn samples_are_addressed_by_index() {
        let model = CoefficientModel::iid(3, CoefficientDensity::standard_uniform()).unwrap();
        let s = LabSettings::new(10, 5);
        assert_eq!(sample_zeros(&model, 7, &s), sample_zeros(&model, 7, &s));
        assert_ne!(sample_zeros(&model, 7, &s).coefficients, sample_zeros(&model, 8, &s).coefficients);
    }
}

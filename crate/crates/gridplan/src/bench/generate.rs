//! Request generators for the three origin-distribution cases.
//!
//! - distinct: every file sits at exactly one source site, drawn uniformly.
//! - weighted: every source site independently holds the file with a given
//!   probability; one site carries weight 1.0 so origin sets are never empty.
//! - shared: every file is available at all source sites.
//!
//! All files have unit size. Generation is a pure function of the spec and
//! its seed.

use std::fmt;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::model::{
    network_from_str, Demand, Link, ModelError, Network, Request, Site, SiteId, Storage, Time,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Distinct,
    Weighted,
    Shared,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::Distinct => "distinct",
            Case::Weighted => "weighted",
            Case::Shared => "shared",
        })
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub case: Case,
    pub n_files: usize,
    /// Per-source-site inclusion probabilities (weighted case only).
    pub weights: Vec<f64>,
    pub seed: u64,
    pub network: Network,
    pub destination: SiteId,
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("destination `{0}` is not a site of the network")]
    UnknownDestination(String),
    #[error("network has no source sites besides the destination")]
    NoSources,
    #[error("weighted case needs {expected} weights (one per source site), got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("weighted case needs max(weights) = 1.0 so origin sets are never empty")]
    NoCertainSite,
    #[error("weights must lie in [0, 1], got {0}")]
    BadWeight(f64),
}

impl ScenarioSpec {
    pub fn source_sites(&self) -> Vec<SiteId> {
        self.network
            .sites
            .iter()
            .filter(|s| s.id != self.destination)
            .map(|s| s.id.clone())
            .collect()
    }
}

/// Star network used in the experiments: one source site per slowdown, each
/// with a single direct link to `dest`.
pub fn star_network(slowdowns: &[Time]) -> Network {
    let mut sites: Vec<Site> = (0..slowdowns.len())
        .map(|i| Site {
            id: SiteId(format!("s{}", i + 1)),
            storage: Storage::Unbounded,
        })
        .collect();
    sites.push(Site {
        id: "dest".into(),
        storage: Storage::Unbounded,
    });
    let links = slowdowns
        .iter()
        .enumerate()
        .map(|(i, &slow)| Link {
            id: format!("l{}", i + 1),
            from: SiteId(format!("s{}", i + 1)),
            to: "dest".into(),
            slowdown: slow,
        })
        .collect();
    Network {
        sites,
        links,
        shared_groups: vec![],
    }
}

/// Default experimental network: 4 source sites with slowdowns 1, 2, 4, 8
/// plus the destination (5 sites in total).
pub fn default_network() -> Network {
    star_network(&[1, 2, 4, 8])
}

pub fn generate(spec: &ScenarioSpec) -> Result<Request, GenerateError> {
    if spec.network.site_index(&spec.destination).is_none() {
        return Err(GenerateError::UnknownDestination(
            spec.destination.0.clone(),
        ));
    }
    let sources = spec.source_sites();
    if sources.is_empty() {
        return Err(GenerateError::NoSources);
    }
    if spec.case == Case::Weighted {
        if spec.weights.len() != sources.len() {
            return Err(GenerateError::WeightCount {
                expected: sources.len(),
                got: spec.weights.len(),
            });
        }
        if let Some(&w) = spec.weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(GenerateError::BadWeight(w));
        }
        if !spec.weights.iter().any(|&w| w == 1.0) {
            return Err(GenerateError::NoCertainSite);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut demands = Vec::with_capacity(spec.n_files);
    for i in 0..spec.n_files {
        let origins: Vec<SiteId> = match spec.case {
            Case::Distinct => {
                vec![sources[rng.random_range(0..sources.len())].clone()]
            }
            Case::Weighted => sources
                .iter()
                .zip(&spec.weights)
                .filter(|&(_, &w)| w == 1.0 || rng.random::<f64>() < w)
                .map(|(s, _)| s.clone())
                .collect(),
            Case::Shared => sources.clone(),
        };
        demands.push(Demand {
            name: format!("f{:03}", i + 1),
            size: 1,
            origins,
        });
    }
    Ok(Request {
        destination: spec.destination.clone(),
        demands,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    case: Case,
    n_files: usize,
    #[serde(default)]
    weights: Vec<f64>,
    #[serde(default)]
    seed: u64,
    destination: String,
    network: serde_json::Value,
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioSpec, ModelError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    scenario_from_str(&text, &path.display().to_string())
}

pub fn scenario_from_str(text: &str, origin: &str) -> Result<ScenarioSpec, ModelError> {
    let raw: ScenarioFile = serde_json::from_str(text).map_err(|e| ModelError::Parse {
        path: origin.to_string(),
        message: e.to_string(),
    })?;
    let network = network_from_str(&raw.network.to_string(), origin)?;
    Ok(ScenarioSpec {
        case: raw.case,
        n_files: raw.n_files,
        weights: raw.weights,
        seed: raw.seed,
        network,
        destination: SiteId(raw.destination),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(case: Case, n_files: usize, seed: u64) -> ScenarioSpec {
        ScenarioSpec {
            case,
            n_files,
            weights: vec![1.0, 0.6, 0.01, 0.01],
            seed,
            network: default_network(),
            destination: "dest".into(),
        }
    }

    #[test]
    fn shared_origins_cover_all_sources() {
        let req = generate(&spec(Case::Shared, 3, 0)).unwrap();
        assert_eq!(req.demands.len(), 3);
        for d in &req.demands {
            assert_eq!(d.origins.len(), 4);
        }
    }

    #[test]
    fn weighted_always_includes_the_certain_site() {
        for seed in 0..20 {
            let req = generate(&spec(Case::Weighted, 10, seed)).unwrap();
            for d in &req.demands {
                assert!(d.origins.contains(&"s1".into()), "seed {seed}");
                assert!(!d.origins.is_empty());
            }
        }
    }

    #[test]
    fn distinct_is_deterministic_per_seed() {
        let a = generate(&spec(Case::Distinct, 8, 5)).unwrap();
        let b = generate(&spec(Case::Distinct, 8, 5)).unwrap();
        assert_eq!(a, b);
        for d in &a.demands {
            assert_eq!(d.origins.len(), 1);
        }
    }

    #[test]
    fn weighted_without_certain_site_is_rejected() {
        let mut s = spec(Case::Weighted, 1, 0);
        s.weights = vec![0.9, 0.6, 0.01, 0.01];
        assert!(matches!(generate(&s), Err(GenerateError::NoCertainSite)));
    }
}

//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{HarnessError, DEFAULT_MARGIN};
use crate::adversary::AttackStrategy;
use crate::codec::{derive_params, CodeParams};
use crate::network::{random_network, FieldDesc, NetworkSpec};

/// How block lengths are chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ParamsSpec {
    Derived { ell: u128 },
    Override { alpha: u64, n_prime: usize },
}

/// Where a network under test comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NetworkSource {
    /// A bundled network; currently only `fig1`.
    Fixture {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        attacked: Option<Vec<usize>>,
    },
    /// A network JSON file, relative to the config file.
    File {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        attacked: Option<Vec<usize>>,
    },
    /// `count` random networks with seeds `seed, seed + 1, ...`.
    Random {
        seed: u64,
        c: usize,
        #[serde(default = "one")]
        count: usize,
        #[serde(default)]
        attacked: Vec<usize>,
    },
    /// `m0` direct source-to-sink edges.
    Parallel {
        #[serde(default)]
        attacked: Vec<usize>,
    },
}

fn one() -> usize {
    1
}

fn default_margin() -> f64 {
    DEFAULT_MARGIN
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    /// Directory for `summary.json` and `trials.csv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub field: FieldDesc,
    pub params: ParamsSpec,
    pub m0: usize,
    pub m1: usize,
    pub networks: Vec<NetworkSource>,
    pub strategies: Vec<AttackStrategy>,
    pub trials: usize,
    #[serde(default)]
    pub root_seed: u64,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default)]
    pub output: OutputPaths,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

/// A resolved network with a label for reports.
#[derive(Debug, Clone)]
pub struct NamedNetwork {
    pub label: String,
    pub spec: NetworkSpec,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical))
    }

    pub fn code_params(&self) -> Result<CodeParams, HarnessError> {
        let p = match self.params {
            ParamsSpec::Derived { ell } => derive_params(self.field, self.m0, self.m1, ell),
            ParamsSpec::Override { alpha, n_prime } => {
                CodeParams::with_override(self.field, self.m0, self.m1, alpha, n_prime)
            }
        };
        p.map_err(|e| HarnessError::Config(e.to_string()))
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    /// Output directory, if configured.
    pub fn output_dir(&self) -> Option<PathBuf> {
        self.output.dir.as_deref().map(|d| self.resolve(d))
    }

    /// Expands and checks every network source.
    pub fn networks(&self) -> Result<Vec<NamedNetwork>, HarnessError> {
        let field = self.field.build()?;
        let mut out = Vec::new();
        for src in &self.networks {
            match src {
                NetworkSource::Fixture { name, attacked } => {
                    let spec = match name.as_str() {
                        "fig1" => NetworkSpec::fig1(),
                        other => return Err(HarnessError::Config(format!("unknown fixture {other:?}"))),
                    };
                    let spec = match attacked {
                        Some(a) => spec.with_attacked(a.clone()),
                        None => spec,
                    };
                    out.push(NamedNetwork { label: format!("fixture:{name}"), spec });
                }
                NetworkSource::File { path, attacked } => {
                    let full = self.resolve(path);
                    let text = std::fs::read_to_string(&full).map_err(|e| HarnessError::io(&full, e))?;
                    let spec = NetworkSpec::from_json(&text)?;
                    let spec = match attacked {
                        Some(a) => spec.with_attacked(a.clone()),
                        None => spec,
                    };
                    out.push(NamedNetwork { label: format!("file:{}", path.display()), spec });
                }
                NetworkSource::Random { seed, c, count, attacked } => {
                    for i in 0..*count as u64 {
                        let s = seed.wrapping_add(i);
                        let spec = random_network(s, self.m0, *c, &field).with_attacked(attacked.clone());
                        out.push(NamedNetwork { label: format!("random:seed={s},c={c}"), spec });
                    }
                }
                NetworkSource::Parallel { attacked } => {
                    let spec = NetworkSpec::parallel(&field, self.m0).with_attacked(attacked.clone());
                    out.push(NamedNetwork { label: "parallel".into(), spec });
                }
            }
        }
        for n in &out {
            if n.spec.field != field {
                return Err(HarnessError::Config(format!(
                    "{}: network field {} differs from config field {}",
                    n.label, n.spec.field, field
                )));
            }
            if n.spec.m0 != self.m0 {
                return Err(HarnessError::Config(format!(
                    "{}: network has m0 = {}, config has {}",
                    n.label, n.spec.m0, self.m0
                )));
            }
            n.spec.check().map_err(|e| HarnessError::Config(format!("{}: {e}", n.label)))?;
        }
        Ok(out)
    }

    /// Every precondition that must hold before any trial runs.
    pub fn validate(&self) -> Result<(CodeParams, Vec<NamedNetwork>), HarnessError> {
        let params = self.code_params()?;
        params.extension_field().map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be positive".into()));
        }
        if self.networks.is_empty() || self.strategies.is_empty() {
            return Err(HarnessError::Config("at least one network and one strategy are required".into()));
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.margin > 0.0) {
            return Err(HarnessError::Config("margin must be positive".into()));
        }
        let nets = self.networks()?;
        Ok((params, nets))
    }
}

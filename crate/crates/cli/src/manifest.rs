//! The experiment manifest: one flat JSON file from which every run derives
//! all of its parameters and randomness.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use rgdist_core::capacities::{
    deterministic_capacities, iid_capacities, CapacitySequence, SurvivalModel,
};
use rgdist_core::distances::ladder;
use rgdist_core::graphgen::ConnectionKernel;
use rgdist_core::rng::derive;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    /// `pareto`, `constant`, `table`, or `file`.
    pub model: String,
    pub tau: Option<f64>,
    pub c: Option<f64>,
    /// Alternative Pareto parameterization: support minimum (`c = x_min^{τ-1}`).
    pub x_min: Option<f64>,
    pub lambda: Option<f64>,
    pub table_points: Option<Vec<(f64, f64)>>,
    pub capacity_file: Option<PathBuf>,

    /// `deterministic` (quantile grid) or `iid` (fresh draws per replicate).
    #[serde(default = "default_capacities")]
    pub capacities: String,
    /// `poissonian`, `expected_degree`, or `generalized`.
    #[serde(default = "default_kernel")]
    pub kernel: String,

    pub n: Option<Vec<usize>>,
    pub ladder_m: Option<usize>,
    pub ladder_k: Option<usize>,
    /// Override for the growth rate ν (defaults to the model limit).
    pub nu: Option<f64>,

    #[serde(default = "default_one")]
    pub replicates: usize,
    #[serde(default = "default_one")]
    pub pairs_per_graph: usize,
    /// Mandatory: there is no wall-clock fallback.
    pub seed: Option<u64>,
    #[serde(default)]
    pub threads: usize,
    pub out: Option<PathBuf>,

    /// Conditional (on a finite distance) vs unconditional survival curves.
    #[serde(default = "default_true")]
    pub conditional: bool,
    #[serde(default = "default_bp_reps")]
    pub bp_reps: usize,
    #[serde(default = "default_bp_n_max")]
    pub bp_n_max: usize,
    /// Slack for the condition checker exponent γ = 1/(τ-1) + ε.
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Threshold exponent for the coupling event, c_N = N^ξ.
    #[serde(default = "default_xi")]
    pub xi: f64,
    #[serde(default = "default_one")]
    pub coupling_pairs: usize,
    #[serde(default = "default_figure1_threshold")]
    pub figure1_threshold: f64,
}

fn default_capacities() -> String {
    "deterministic".into()
}
fn default_kernel() -> String {
    "poissonian".into()
}
fn default_one() -> usize {
    1
}
fn default_true() -> bool {
    true
}
fn default_bp_reps() -> usize {
    10_000
}
fn default_bp_n_max() -> usize {
    400
}
fn default_eps() -> f64 {
    0.05
}
fn default_xi() -> f64 {
    0.1
}
fn default_figure1_threshold() -> f64 {
    0.05
}

/// Everything a command needs, resolved and validated.
pub struct Experiment {
    pub manifest: Manifest,
    pub manifest_hash: String,
    pub seed: u64,
    pub model: Option<SurvivalModel>,
    pub explicit_capacities: Option<CapacitySequence>,
    pub kernel: ConnectionKernel,
    pub sizes: Vec<usize>,
    pub nu: f64,
    pub out: PathBuf,
    /// Emit SVG plots next to the CSV outputs.
    pub svg: bool,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<(Self, String), CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Validation(format!("cannot read manifest {path:?}: {e}")))?;
        let manifest: Manifest = serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Validation(format!("malformed manifest: {e}")))?;
        let hash = {
            use sha2::{Digest, Sha256};
            let digest = Sha256::digest(&bytes);
            digest
                .iter()
                .map(|b| format!("{b:02x}"))
                .collect::<String>()
        };
        Ok((manifest, hash))
    }

    fn build_model(&self) -> Result<Option<SurvivalModel>, CliError> {
        let model = match self.model.as_str() {
            "pareto" => {
                let tau = self
                    .tau
                    .ok_or_else(|| CliError::Validation("pareto model needs tau".into()))?;
                let model = match (self.c, self.x_min) {
                    (Some(c), None) => SurvivalModel::pareto(tau, c),
                    (None, Some(x)) => SurvivalModel::pareto_from_support_min(tau, x),
                    _ => {
                        return Err(CliError::Validation(
                            "pareto model needs exactly one of c or x_min".into(),
                        ))
                    }
                };
                Some(model.map_err(|e| CliError::Validation(e.to_string()))?)
            }
            "constant" => {
                let lambda = self
                    .lambda
                    .ok_or_else(|| CliError::Validation("constant model needs lambda".into()))?;
                Some(
                    SurvivalModel::constant(lambda)
                        .map_err(|e| CliError::Validation(e.to_string()))?,
                )
            }
            "table" => {
                let points = self
                    .table_points
                    .clone()
                    .ok_or_else(|| CliError::Validation("table model needs table_points".into()))?;
                Some(
                    SurvivalModel::table(points)
                        .map_err(|e| CliError::Validation(e.to_string()))?,
                )
            }
            "file" => None,
            other => {
                return Err(CliError::Validation(format!(
                    "unknown model '{other}' (expected pareto, constant, table, or file)"
                )))
            }
        };
        Ok(model)
    }

    pub fn resolve(
        self,
        hash: String,
        out_override: Option<PathBuf>,
        svg: bool,
    ) -> Result<Experiment, CliError> {
        let seed = self
            .seed
            .ok_or_else(|| CliError::Validation("manifest must set a seed".into()))?;
        if self.replicates == 0 || self.pairs_per_graph == 0 || self.coupling_pairs == 0 {
            return Err(CliError::Validation("all counts must be at least 1".into()));
        }
        let model = self.build_model()?;
        let explicit_capacities = if self.model == "file" {
            let path = self
                .capacity_file
                .clone()
                .ok_or_else(|| CliError::Validation("file model needs capacity_file".into()))?;
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Validation(format!("cannot read {path:?}: {e}")))?;
            Some(
                CapacitySequence::from_csv(&text)
                    .map_err(|e| CliError::Validation(e.to_string()))?,
            )
        } else {
            None
        };

        let kernel = match self.kernel.as_str() {
            "poissonian" => ConnectionKernel::Poissonian,
            "expected_degree" => ConnectionKernel::ExpectedDegree,
            "generalized" => ConnectionKernel::Generalized,
            other => {
                return Err(CliError::Validation(format!(
                    "unknown kernel '{other}' (expected poissonian, expected_degree, generalized)"
                )))
            }
        };

        if !matches!(self.capacities.as_str(), "deterministic" | "iid") {
            return Err(CliError::Validation(format!(
                "capacities must be 'deterministic' or 'iid', got '{}'",
                self.capacities
            )));
        }
        if self.capacities == "iid" && model.is_none() {
            return Err(CliError::Validation(
                "iid capacities need a survival model, not a capacity file".into(),
            ));
        }

        let nu = match self.nu {
            Some(nu) => nu,
            None => match (&model, &explicit_capacities) {
                (Some(m), _) => {
                    m.limit_mu_nu()
                        .map_err(|e| CliError::Validation(e.to_string()))?
                        .1
                }
                (None, Some(seq)) => seq.nu(),
                _ => unreachable!("model or capacities always present"),
            },
        };

        let sizes = match (&self.n, self.ladder_m) {
            (Some(list), None) => {
                if list.is_empty() {
                    return Err(CliError::Validation("n list must be non-empty".into()));
                }
                list.clone()
            }
            (None, Some(m)) => {
                let k = self.ladder_k.unwrap_or(0);
                let l = ladder(m, nu, k).map_err(|e| CliError::Validation(e.to_string()))?;
                l.sizes.iter().map(|&s| s as usize).collect()
            }
            (Some(_), Some(_)) => {
                return Err(CliError::Validation(
                    "give either an n list or a ladder, not both".into(),
                ))
            }
            (None, None) => {
                if let Some(seq) = &explicit_capacities {
                    vec![seq.len()]
                } else {
                    return Err(CliError::Validation("manifest needs n or ladder_m".into()));
                }
            }
        };
        if sizes.iter().any(|&n| n < 2) {
            return Err(CliError::Validation(
                "all N values must be at least 2".into(),
            ));
        }

        let out = out_override
            .or_else(|| self.out.clone())
            .unwrap_or_else(|| PathBuf::from("."));

        Ok(Experiment {
            manifest: self,
            manifest_hash: hash,
            seed,
            model,
            explicit_capacities,
            kernel,
            sizes,
            nu,
            out,
            svg,
        })
    }
}

impl Experiment {
    /// Capacity sequence for `(N, replicate)`; deterministic grids are shared
    /// across replicates, i.i.d. draws are re-sampled per replicate.
    pub fn capacities_for(&self, n: usize, replicate: usize) -> Result<CapacitySequence, CliError> {
        if let Some(seq) = &self.explicit_capacities {
            if seq.len() != n {
                return Err(CliError::Validation(format!(
                    "capacity file has {} entries but N = {n}",
                    seq.len()
                )));
            }
            return Ok(seq.clone());
        }
        let model = self.model.as_ref().expect("model present unless file");
        let seq = if self.manifest.capacities == "iid" {
            iid_capacities(
                model,
                n,
                derive(self.seed, &[1001, n as u64, replicate as u64]),
            )
        } else {
            deterministic_capacities(model, n)
        };
        seq.map_err(|e| CliError::Numeric(e.to_string()))
    }

    /// First line of every output file: provenance comment.
    pub fn provenance(&self) -> String {
        format!(
            "# manifest_sha256={} seed={}\n",
            self.manifest_hash, self.seed
        )
    }
}

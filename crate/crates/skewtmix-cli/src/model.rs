//! The on-disk model document: a versioned JSON schema holding mixture
//! parameters (and optional fitting provenance) that round-trips exactly
//! and is readable from any language.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use skewtmix::{ComponentParams, MixtureParams, SpdMatrix};

use crate::errors::{CliError, CliResult};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDocument {
    pub schema_version: String,
    pub g: usize,
    pub p: usize,
    /// g×p component locations.
    pub mu: Vec<Vec<f64>>,
    /// g×p×p component scale matrices.
    pub sigma: Vec<Vec<Vec<f64>>>,
    /// g×p component skewness vectors.
    pub delta: Vec<Vec<f64>>,
    /// Per-component degrees of freedom.
    pub dof: Vec<f64>,
    /// Mixing proportions.
    pub pro: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_meta: Option<FitMeta>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitMeta {
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
    /// Which fitting routine produced the model.
    pub generator: String,
    pub tool_version: String,
}

impl ModelDocument {
    pub fn from_mixture(params: &MixtureParams, fit_meta: Option<FitMeta>) -> Self {
        let g = params.g();
        let p = params.p();
        Self {
            schema_version: SCHEMA_VERSION.into(),
            g,
            p,
            mu: params
                .components
                .iter()
                .map(|c| c.mu.iter().copied().collect())
                .collect(),
            sigma: params
                .components
                .iter()
                .map(|c| {
                    (0..p)
                        .map(|i| (0..p).map(|k| c.sigma.matrix()[(i, k)]).collect())
                        .collect()
                })
                .collect(),
            delta: params
                .components
                .iter()
                .map(|c| c.delta.iter().copied().collect())
                .collect(),
            dof: params.components.iter().map(|c| c.nu).collect(),
            pro: params.pro.clone(),
            fit_meta,
        }
    }

    /// Validate and convert to library parameters.
    pub fn to_mixture(&self) -> CliResult<MixtureParams> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Input(format!(
                "unsupported model schema version {:?} (expected {:?})",
                self.schema_version, SCHEMA_VERSION
            )));
        }
        let (g, p) = (self.g, self.p);
        if g == 0 || p == 0 {
            return Err(CliError::Input("model must have g ≥ 1 and p ≥ 1".into()));
        }
        let shape = |name: &str, len: usize| -> CliResult<()> {
            if len != g {
                return Err(CliError::Input(format!(
                    "model field `{name}` has {len} entries for g = {g}"
                )));
            }
            Ok(())
        };
        shape("mu", self.mu.len())?;
        shape("sigma", self.sigma.len())?;
        shape("delta", self.delta.len())?;
        shape("dof", self.dof.len())?;
        shape("pro", self.pro.len())?;
        let mut components = Vec::with_capacity(g);
        for h in 0..g {
            if self.mu[h].len() != p || self.delta[h].len() != p {
                return Err(CliError::Input(format!(
                    "component {}: mu/delta must have {p} entries",
                    h + 1
                )));
            }
            if self.sigma[h].len() != p || self.sigma[h].iter().any(|row| row.len() != p) {
                return Err(CliError::Input(format!(
                    "component {}: sigma must be {p}x{p}",
                    h + 1
                )));
            }
            let sigma =
                DMatrix::from_fn(p, p, |i, k| self.sigma[h][i][k]);
            let comp = ComponentParams::new(
                DVector::from_vec(self.mu[h].clone()),
                SpdMatrix::from_matrix(&sigma)
                    .map_err(|e| CliError::Input(format!("component {}: {e}", h + 1)))?,
                DVector::from_vec(self.delta[h].clone()),
                self.dof[h],
            )
            .map_err(|e| CliError::Input(format!("component {}: {e}", h + 1)))?;
            components.push(comp);
        }
        MixtureParams::new(components, self.pro.clone())
            .map_err(|e| CliError::Input(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        let doc: ModelDocument = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Ok(doc)
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Input(e.to_string()))?;
        text.push('\n');
        fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }
}

/// A partially specified parameter set, as accepted by `fit --initial` and
/// `fit --known`: any subset of the model fields.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct PartialDocument {
    pub mu: Option<Vec<Vec<f64>>>,
    pub sigma: Option<Vec<Vec<Vec<f64>>>>,
    pub delta: Option<Vec<Vec<f64>>>,
    pub dof: Option<Vec<f64>>,
    pub pro: Option<Vec<f64>>,
}

impl PartialDocument {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn to_partial(&self, p: usize) -> CliResult<skewtmix::PartialParams> {
        let vecs = |v: &Vec<Vec<f64>>, name: &str| -> CliResult<Vec<DVector<f64>>> {
            if v.iter().any(|x| x.len() != p) {
                return Err(CliError::Input(format!("`{name}` entries must have length {p}")));
            }
            Ok(v.iter().map(|x| DVector::from_vec(x.clone())).collect())
        };
        let mats = |v: &Vec<Vec<Vec<f64>>>| -> CliResult<Vec<DMatrix<f64>>> {
            if v.iter().any(|m| m.len() != p || m.iter().any(|row| row.len() != p)) {
                return Err(CliError::Input(format!("`sigma` entries must be {p}x{p}")));
            }
            Ok(v.iter()
                .map(|m| DMatrix::from_fn(p, p, |i, k| m[i][k]))
                .collect())
        };
        Ok(skewtmix::PartialParams {
            mu: self.mu.as_ref().map(|v| vecs(v, "mu")).transpose()?,
            sigma: self.sigma.as_ref().map(&mats).transpose()?,
            delta: self.delta.as_ref().map(|v| vecs(v, "delta")).transpose()?,
            dof: self.dof.clone(),
            pro: self.pro.clone(),
        })
    }
}

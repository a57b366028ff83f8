use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use delaywave_core::{preset, DelayKernel, ReactionModel};
use nalgebra::DMatrix;
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub critical: CriticalConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    /// `[offset, weight]` pairs with offsets in `[-tau, 0]`.
    pub atoms: Vec<[f64; 2]>,
    pub tau: f64,
}

impl KernelConfig {
    pub fn build(&self) -> Result<DelayKernel> {
        Ok(DelayKernel::new(self.atoms.iter().map(|a| (a[0], a[1])), self.tau)?)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelEntry {
    /// 1-based species indices.
    pub i: usize,
    pub j: usize,
    pub atoms: Vec<[f64; 2]>,
    pub tau: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    LotkaVolterra {
        d: Vec<f64>,
        r: Vec<f64>,
        c: Vec<Vec<f64>>,
        #[serde(default)]
        kernels: Vec<KernelEntry>,
    },
    Fisher {
        d: f64,
        r: f64,
    },
    Zou {
        d: f64,
        r: f64,
        kernel: KernelConfig,
    },
    Nicholson {
        d: f64,
        kernel: KernelConfig,
    },
}

impl ModelConfig {
    pub fn build(&self) -> Result<ReactionModel> {
        Ok(match self {
            ModelConfig::LotkaVolterra { d, r, c, kernels } => {
                let n = d.len();
                if c.len() != n || c.iter().any(|row| row.len() != n) {
                    bail!("model.c must be a {n}x{n} matrix");
                }
                let m = DMatrix::from_fn(n, n, |i, j| c[i][j]);
                let mut table: Vec<Vec<DelayKernel>> = vec![vec![DelayKernel::instantaneous(); n]; n];
                for (k, e) in kernels.iter().enumerate() {
                    if e.i == 0 || e.j == 0 || e.i > n || e.j > n {
                        bail!("model.kernels[{k}]: species indices are 1-based and at most {n}");
                    }
                    table[e.i - 1][e.j - 1] = DelayKernel::new(e.atoms.iter().map(|a| (a[0], a[1])), e.tau)
                        .with_context(|| format!("model.kernels[{k}]"))?;
                }
                ReactionModel::lotka_volterra(d.clone(), r.clone(), m, table)?
            }
            ModelConfig::Fisher { d, r } => ReactionModel::fisher(*d, *r)?,
            ModelConfig::Zou { d, r, kernel } => ReactionModel::zou(*d, *r, kernel.build().context("model.kernel")?)?,
            ModelConfig::Nicholson { d, kernel } => ReactionModel::nicholson(*d, kernel.build().context("model.kernel")?)?,
        })
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub xi_min: f64,
    pub xi_max: f64,
    pub h: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub speed: Option<f64>,
    pub damping: Option<f64>,
    pub tol_update: Option<f64>,
    pub tol_residual: Option<f64>,
    pub max_iter: Option<usize>,
    pub grid: Option<GridConfig>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub speed: Option<f64>,
    /// Points of the bound check grid.
    pub points: Option<usize>,
    /// Rectangle parameter: `epsilon` for competition and Nicholson families, `k` for Zou.
    pub epsilon: Option<f64>,
    pub k: Option<f64>,
    pub face_samples: Option<usize>,
    pub y_levels: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMode {
    #[default]
    Field,
    Spreading,
    Advection,
    Probe,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default)]
    pub mode: SimMode,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub dx: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub snapshots: Option<usize>,
    /// Initial data: the target state on `x < step_at`, zero beyond.
    pub step_at: Option<f64>,
    pub species: Option<usize>,
    pub level: Option<f64>,
    pub window: Option<[f64; 2]>,
    pub speed: Option<f64>,
    pub horizon: Option<f64>,
    pub shape_tol: Option<f64>,
    pub drift_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalConfig {
    pub d: Option<f64>,
    pub r: Option<f64>,
    pub kernel: Option<KernelConfig>,
    pub speed_tol: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub speeds: Option<Vec<f64>>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub count: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Keep every `stride`-th grid point in profile and snapshot files.
    pub stride: Option<usize>,
}

/// Parsed configuration together with the raw text used for hashing.
pub struct Loaded {
    pub config: RunConfig,
    pub raw: String,
}

pub fn load(path: Option<&Path>) -> Result<Loaded> {
    let Some(path) = path else {
        return Ok(Loaded { config: RunConfig::default(), raw: String::new() });
    };
    let raw = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let config: RunConfig = toml::from_str(&raw).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    Ok(Loaded { config, raw })
}

pub struct ResolvedModel {
    pub model: ReactionModel,
    pub preset: Option<String>,
    pub preset_speed: Option<f64>,
}

/// The model from `--preset`, the config's `preset`, or its `[model]` block.
pub fn resolve_model(config: &RunConfig, preset_flag: Option<&str>) -> Result<ResolvedModel> {
    let name = preset_flag.map(str::to_owned).or_else(|| config.preset.clone());
    match (name, &config.model) {
        (Some(_), Some(_)) if preset_flag.is_none() => bail!("config sets both `preset` and a [model] block"),
        (Some(n), _) => {
            let p = preset(&n)?;
            Ok(ResolvedModel { model: p.model, preset: Some(n), preset_speed: p.speed })
        }
        (None, Some(m)) => Ok(ResolvedModel { model: m.build().context("[model]")?, preset: None, preset_speed: None }),
        (None, None) => bail!("no model given: pass --preset NAME or a config with a [model] block"),
    }
}

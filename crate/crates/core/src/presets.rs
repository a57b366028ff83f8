//! Named models used by the command line tool and the acceptance runs.

use nalgebra::DMatrix;

use crate::error::{Result, WaveError};
use crate::kernel::DelayKernel;
use crate::model::ReactionModel;

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub model: ReactionModel,
    /// Default wave speed, when the model has a wave solver.
    pub speed: Option<f64>,
}

pub const PRESET_NAMES: [&str; 7] = ["lv-5.4", "lv-5.4-delay", "fisher", "fisher-d4", "zou", "nicholson", "lv-strong"];

fn lv(d: [f64; 2], r: [f64; 2], c: [f64; 4]) -> Result<ReactionModel> {
    ReactionModel::lotka_volterra_undelayed(d.to_vec(), r.to_vec(), DMatrix::from_row_slice(2, 2, &c))
}

pub fn preset(name: &str) -> Result<Preset> {
    let p = match name {
        "lv-5.4" => Preset {
            name: "lv-5.4",
            summary: "two-species competition with a slow first species, nonmonotone wave at c = 1",
            model: lv([1e-4, 0.05], [0.1, 0.5], [1.0, 0.55, 0.75, 1.0])?,
            speed: Some(1.0),
        },
        "lv-5.4-delay" => {
            let k = DelayKernel::new([(0.0, 0.6), (-5.0, 0.4)], 5.0)?;
            let i = DelayKernel::instantaneous();
            Preset {
                name: "lv-5.4-delay",
                summary: "same rates with 40% of self-limitation delayed by 5 and weak cross competition",
                model: ReactionModel::lotka_volterra(
                    vec![1e-4, 0.05],
                    vec![0.1, 0.5],
                    DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.1, 1.0]),
                    vec![vec![k.clone(), i.clone()], vec![i, k]],
                )?,
                speed: Some(1.0),
            }
        }
        "fisher" => Preset {
            name: "fisher",
            summary: "logistic front with d = r = 1",
            model: ReactionModel::fisher(1.0, 1.0)?,
            speed: Some(3.0),
        },
        "fisher-d4" => Preset {
            name: "fisher-d4",
            summary: "logistic front with d = 4, r = 1",
            model: ReactionModel::fisher(4.0, 1.0)?,
            speed: Some(6.0),
        },
        "zou" => Preset {
            name: "zou",
            summary: "delayed recruitment r (int u) (1 - u) with lag 1",
            model: ReactionModel::zou(1.0, 1.0, DelayKernel::point_mass(-1.0, 1.0)?)?,
            speed: None,
        },
        "nicholson" => Preset {
            name: "nicholson",
            summary: "Nicholson blowflies with maturation delay 1",
            model: ReactionModel::nicholson(1.0, DelayKernel::point_mass(-1.0, 1.0)?)?,
            speed: None,
        },
        "lv-strong" => Preset {
            name: "lv-strong",
            summary: "strong competition, outside the weak-coupling regime",
            model: lv([1.0, 1.0], [1.0, 1.0], [1.0, 1.5, 1.5, 1.0])?,
            speed: None,
        },
        other => {
            return Err(WaveError::Domain(format!(
                "unknown preset `{other}` (known: {})",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(p)
}

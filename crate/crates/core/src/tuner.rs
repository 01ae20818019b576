//! Grid search over the distance-bias parameters.

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::detectors::{run_detector, BiasForm, BiasParams, DetectorConfig};
use crate::error::{Error, Result};
use crate::eval::{score_run, skip_evaluate, CostConstants, GroundTruth};
use crate::par::Exec;
use crate::vectorize::TfScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `c_min` on the original truth.
    #[default]
    CMinRound0,
    /// Mean `c_min` over skip-evaluation rounds.
    CMinSkipMean,
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c_min_round0" => Ok(Objective::CMinRound0),
            "c_min_skip_mean" => Ok(Objective::CMinSkipMean),
            other => Err(Error::InvalidConfig(format!("unknown objective `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub delta_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    #[serde(default)]
    pub objective: Objective,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, xs: &[f64], ok: &dyn Fn(f64) -> bool| -> Result<()> {
            if xs.is_empty() {
                return Err(Error::InvalidConfig(format!("{name} grid is empty")));
            }
            if xs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidConfig(format!(
                    "{name} grid is not strictly increasing"
                )));
            }
            if let Some(bad) = xs.iter().find(|x| !ok(**x)) {
                return Err(Error::InvalidConfig(format!(
                    "{name} value {bad} out of range"
                )));
            }
            Ok(())
        };
        check("delta", &self.delta_values, &|x| x >= 0.0 && x.is_finite())?;
        check("gamma", &self.gamma_values, &|x| (0.0..=1.0).contains(&x))
    }

    /// Parse `delta=0,0.036;gamma=0.5,0.61`.
    pub fn parse(text: &str, objective: Objective) -> Result<Self> {
        let mut delta = None;
        let mut gamma = None;
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, values) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("bad grid segment `{part}`")))?;
            let values = values
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidConfig(format!("bad grid value `{v}`: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            match key.trim() {
                "delta" => delta = Some(values),
                "gamma" => gamma = Some(values),
                other => return Err(Error::InvalidConfig(format!("unknown grid key `{other}`"))),
            }
        }
        let grid = GridSpec {
            delta_values: delta
                .ok_or_else(|| Error::InvalidConfig("grid is missing delta".into()))?,
            gamma_values: gamma
                .ok_or_else(|| Error::InvalidConfig("grid is missing gamma".into()))?,
            objective,
        };
        grid.validate()?;
        Ok(grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunerSettings {
    pub skip_rounds: usize,
    pub constants: CostConstants,
    pub tf: TfScheme,
    pub form: BiasForm,
    pub exec: Exec,
}

impl Default for TunerSettings {
    fn default() -> Self {
        TunerSettings {
            skip_rounds: 3,
            constants: CostConstants::default(),
            tf: TfScheme::default(),
            form: BiasForm::default(),
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub delta: f64,
    pub gamma: f64,
    pub c_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best: BiasParams,
    pub objective: f64,
    /// Row-major in `(delta, gamma)` order.
    pub table: Vec<GridCell>,
}

fn evaluate_cell(
    stream: &[Document],
    truth: &GroundTruth,
    params: BiasParams,
    objective: Objective,
    settings: &TunerSettings,
) -> Result<f64> {
    // Cells already run in parallel; keep each detection sequential.
    let config = DetectorConfig::optimized(params)
        .with_tf(settings.tf)
        .with_exec(Exec::Sequential);
    let records = run_detector(stream, &config)?;
    match objective {
        Objective::CMinRound0 => Ok(score_run(&records, truth, settings.constants)?.c_min),
        Objective::CMinSkipMean => Ok(skip_evaluate(
            &records,
            truth,
            settings.skip_rounds,
            settings.constants,
            Exec::Sequential,
        )?
        .mean_c_min),
    }
}

/// Run the biased detector for every grid cell and keep the lowest
/// objective. Ties go to the smallest δ, then the smallest γ.
pub fn grid_search(
    stream: &[Document],
    truth: &GroundTruth,
    grid: &GridSpec,
    settings: &TunerSettings,
) -> Result<GridResult> {
    grid.validate()?;
    let cells: Vec<BiasParams> = grid
        .delta_values
        .iter()
        .flat_map(|&delta| {
            grid.gamma_values.iter().map(move |&gamma| BiasParams {
                delta,
                gamma,
                form: settings.form,
            })
        })
        .collect();
    let values = settings
        .exec
        .map(&cells, |p| {
            evaluate_cell(stream, truth, *p, grid.objective, settings)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let table: Vec<GridCell> = cells
        .iter()
        .zip(&values)
        .map(|(p, &c_min)| GridCell {
            delta: p.delta,
            gamma: p.gamma,
            c_min,
        })
        .collect();
    let (best_idx, _) =
        values.iter().enumerate().fold(
            (0, values[0]),
            |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) },
        );
    Ok(GridResult {
        best: cells[best_idx],
        objective: values[best_idx],
        table,
    })
}

/// `delta,gamma,c_min`
pub fn write_grid_csv<W: Write>(mut out: W, result: &GridResult) -> Result<()> {
    writeln!(out, "delta,gamma,c_min")?;
    for c in &result.table {
        writeln!(out, "{},{},{}", c.delta, c.gamma, c.c_min)?;
    }
    Ok(())
}

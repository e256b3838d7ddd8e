//! Parameter sweeps: one scenario re-evaluated along a grid.

use cvmdi_core::KeyRateReport;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::scenario::Scenario;
use crate::CliError;

/// Which scenario parameter the sweep varies. `ExcessNoise` sets both links
/// to the same value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVariable {
    VMod,
    Distance,
    Beta,
    ExcessNoise,
}

impl SweepVariable {
    /// Column name used in CSV output.
    pub fn column(&self) -> &'static str {
        match self {
            SweepVariable::VMod => "v_mod",
            SweepVariable::Distance => "distance_km",
            SweepVariable::Beta => "beta",
            SweepVariable::ExcessNoise => "excess_noise",
        }
    }
}

/// Grid description plus the base scenario evaluated at each point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub lo: f64,
    pub hi: f64,
    /// Number of grid points, endpoints included; at least 2.
    pub steps: usize,
    /// Geometric instead of linear spacing; requires lo > 0.
    #[serde(default)]
    pub log: bool,
    pub base: Scenario,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(CliError::Config(format!(
                "sweep needs lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if self.steps < 2 {
            return Err(CliError::Config(format!(
                "sweep needs at least 2 steps, got {}",
                self.steps
            )));
        }
        if self.log && self.lo <= 0.0 {
            return Err(CliError::Config(format!(
                "log spacing needs lo > 0, got {}",
                self.lo
            )));
        }
        self.base.validate()
    }

    /// Grid points, endpoints exact.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.steps;
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.lo;
                }
                if i == n - 1 {
                    return self.hi;
                }
                let t = i as f64 / (n - 1) as f64;
                if self.log {
                    self.lo * (self.hi / self.lo).powf(t)
                } else {
                    self.lo + (self.hi - self.lo) * t
                }
            })
            .collect()
    }
}

/// One evaluated grid point. Points that fail evaluation carry the error
/// text instead of aborting the sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub report: Option<KeyRateReport>,
    pub error: Option<String>,
}

fn scenario_at(base: &Scenario, variable: SweepVariable, x: f64) -> Result<Scenario, CliError> {
    match variable {
        SweepVariable::VMod => base.with_v_mod(x),
        SweepVariable::Distance => base.with_distance(x),
        SweepVariable::Beta => base.with_beta(x),
        SweepVariable::ExcessNoise => base.with_excess_noise(x),
    }
}

/// Evaluates the sweep in parallel; rows come back in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, CliError> {
    spec.validate()?;
    let grid = spec.grid();
    let rows = grid
        .par_iter()
        .map(|&x| {
            match scenario_at(&spec.base, spec.variable, x).and_then(|s| s.run()) {
                Ok(report) => SweepRow { value: x, report: Some(report), error: None },
                Err(e) => SweepRow { value: x, report: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    Ok(rows)
}

//! Root and optimum finders over scenario parameters.
//!
//! Every target reduces to a one-dimensional search on the key rate:
//! golden-section for maxima, bisection for sign changes. Searches that find
//! no bracket report `Infeasible` rather than returning a boundary value.

use cvmdi_core::Error;
use serde::{Deserialize, Serialize};

use crate::scenario::Scenario;
use crate::CliError;

/// What a finder searched for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FindTarget {
    /// Modulation variance maximizing the key rate.
    OptimalVm,
    /// Largest distance with positive key rate.
    MaxDistance,
    /// Smallest reconciliation efficiency with positive key rate.
    BetaThreshold,
    /// Distance where the four-state and Gaussian rates cross.
    CrossingDistance,
    /// Reconciliation efficiency where the four-state and Gaussian rates cross.
    CrossingBeta,
}

impl FindTarget {
    pub fn as_str(&self) -> &'static str {
        match self {
            FindTarget::OptimalVm => "optimal-vm",
            FindTarget::MaxDistance => "max-distance",
            FindTarget::BetaThreshold => "beta-threshold",
            FindTarget::CrossingDistance => "crossing-distance",
            FindTarget::CrossingBeta => "crossing-beta",
        }
    }
}

/// Outcome of a finder run: the located value and how hard it was to get.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinderResult {
    pub target: FindTarget,
    pub value: f64,
    /// Width of the final search interval.
    pub achieved_tolerance: f64,
    /// Number of objective evaluations, bracketing scan included.
    pub iterations: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_8; // (√5 − 1) / 2

/// Golden-section maximum of `f` on [lo, hi] to interval width `tol`.
///
/// Assumes `f` is unimodal on the interval; returns the interval midpoint,
/// the final width, and the number of evaluations.
pub fn golden_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64, usize), CliError>
where
    F: FnMut(f64) -> Result<f64, CliError>,
{
    if !(lo < hi) || !(tol > 0.0) {
        return Err(CliError::Config(format!(
            "bad golden-section interval [{lo}, {hi}] at tolerance {tol}"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut evals = 2;
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        }
        evals += 1;
    }
    Ok(((a + b) / 2.0, b - a, evals))
}

/// Bisection root of `f` on a bracket with `f(lo)` and `f(hi)` of opposite
/// sign, to interval width `tol`. Returns midpoint, final width, evaluations.
pub fn bisect_root<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64, usize), CliError>
where
    F: FnMut(f64) -> Result<f64, CliError>,
{
    if !(lo < hi) || !(tol > 0.0) {
        return Err(CliError::Config(format!(
            "bad bisection interval [{lo}, {hi}] at tolerance {tol}"
        )));
    }
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    let mut evals = 2;
    if f_lo == 0.0 {
        return Ok((lo, 0.0, evals));
    }
    if f_hi == 0.0 {
        return Ok((hi, 0.0, evals));
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(CliError::Core(Error::Infeasible(format!(
            "no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}"
        ))));
    }
    let (mut a, mut b) = (lo, hi);
    let mut f_a = f_lo;
    while b - a > tol {
        let m = a + (b - a) / 2.0;
        if m <= a || m >= b {
            break; // interval at floating-point resolution
        }
        let f_m = f(m)?;
        evals += 1;
        if f_m == 0.0 {
            return Ok((m, 0.0, evals));
        }
        if f_m.signum() == f_a.signum() {
            a = m;
            f_a = f_m;
        } else {
            b = m;
        }
    }
    Ok(((a + b) / 2.0, b - a, evals))
}

/// Key rate as a function of one scenario parameter.
fn rate_at<F>(base: &Scenario, modify: F) -> impl FnMut(f64) -> Result<f64, CliError> + '_
where
    F: Fn(&Scenario, f64) -> Result<Scenario, CliError> + 'static,
{
    let base = base.clone();
    move |x: f64| Ok(modify(&base, x)?.run()?.key_rate)
}

/// Modulation variance maximizing the key rate, located to 1e−3.
///
/// A 33-point scan of [lo, hi] first verifies the maximum is interior; a
/// boundary maximum means the bracket does not contain the optimum and the
/// search reports `Infeasible`.
pub fn find_optimal_vm(base: &Scenario, lo: f64, hi: f64) -> Result<FinderResult, CliError> {
    const SCAN: usize = 33;
    if !(lo < hi) || !(lo > 0.0) {
        return Err(CliError::Config(format!("bad v_mod bracket [{lo}, {hi}]")));
    }
    let mut rate = rate_at(base, |s: &Scenario, v| s.with_v_mod(v));
    let mut best = (0usize, f64::NEG_INFINITY);
    let mut grid = [0.0f64; SCAN];
    for (i, g) in grid.iter_mut().enumerate() {
        *g = lo + (hi - lo) * i as f64 / (SCAN - 1) as f64;
        let k = rate(*g)?;
        if k > best.1 {
            best = (i, k);
        }
    }
    if best.0 == 0 || best.0 == SCAN - 1 {
        return Err(CliError::Core(Error::Infeasible(format!(
            "key rate has no interior maximum on v_mod in [{lo}, {hi}]"
        ))));
    }
    let (value, width, evals) =
        golden_max(&mut rate, grid[best.0 - 1], grid[best.0 + 1], 1e-3)?;
    Ok(FinderResult {
        target: FindTarget::OptimalVm,
        value,
        achieved_tolerance: width,
        iterations: SCAN + evals,
    })
}

/// Smallest β in [0, 1] with positive key rate, located to 1e−7.
///
/// The rate is strictly increasing in β, so a sign change exists exactly when
/// K(1) > 0; K(0) = −χ_BE is negative whenever any information leaks.
pub fn find_beta_threshold(base: &Scenario) -> Result<FinderResult, CliError> {
    let mut rate = rate_at(base, |s: &Scenario, b| s.with_beta(b));
    if rate(1.0)? <= 0.0 {
        return Err(CliError::Core(Error::Infeasible(
            "key rate is non-positive even at beta = 1".into(),
        )));
    }
    let (value, width, evals) = bisect_root(&mut rate, 0.0, 1.0, 1e-7)?;
    Ok(FinderResult {
        target: FindTarget::BetaThreshold,
        value,
        achieved_tolerance: width,
        iterations: 1 + evals,
    })
}

/// Largest distance with positive key rate, located to 0.05 km.
///
/// Brackets by doubling from 10 km; a rate still positive at 10⁴ km is
/// reported `Infeasible` (no finite cutoff within the search cap).
pub fn find_max_distance(base: &Scenario) -> Result<FinderResult, CliError> {
    const CAP_KM: f64 = 1e4;
    let mut rate = rate_at(base, |s: &Scenario, d| s.with_distance(d));
    if rate(0.0)? <= 0.0 {
        return Err(CliError::Core(Error::Infeasible(
            "key rate is non-positive already at zero distance".into(),
        )));
    }
    let mut evals = 1;
    let mut lo = 0.0;
    let mut hi = 10.0;
    while rate(hi)? > 0.0 {
        evals += 1;
        lo = hi;
        hi *= 2.0;
        if hi > CAP_KM {
            return Err(CliError::Core(Error::Infeasible(format!(
                "key rate still positive at {lo} km; no cutoff below {CAP_KM} km"
            ))));
        }
    }
    evals += 1;
    let (value, width, inner) = bisect_root(&mut rate, lo, hi, 0.05)?;
    Ok(FinderResult {
        target: FindTarget::MaxDistance,
        value,
        achieved_tolerance: width,
        iterations: evals + inner,
    })
}

/// Which parameter a crossing search varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingVariable {
    Distance,
    Beta,
}

/// Point where the four-state rate overtakes the Gaussian rate.
///
/// `dm` must be a four-state scenario; the Gaussian side reuses its link,
/// detector, and β with modulation variance `gm_vmod`. Scans for a sign
/// change of K_DM − K_GM, then bisects.
pub fn find_crossing(
    dm: &Scenario,
    gm_vmod: f64,
    variable: CrossingVariable,
) -> Result<FinderResult, CliError> {
    if dm.scheme.alpha_sq().is_none() {
        return Err(CliError::Config(
            "crossing search needs a four-state base scenario".into(),
        ));
    }
    let gm = dm.as_gaussian(gm_vmod)?;
    let (target, lo, hi, steps, tol) = match variable {
        CrossingVariable::Distance => (FindTarget::CrossingDistance, 0.0, 40.0, 40, 1e-3),
        CrossingVariable::Beta => (FindTarget::CrossingBeta, 0.5, 1.0, 50, 1e-6),
    };
    let modify = |s: &Scenario, x: f64| match variable {
        CrossingVariable::Distance => s.with_distance(x),
        CrossingVariable::Beta => s.with_beta(x),
    };
    let mut diff = |x: f64| -> Result<f64, CliError> {
        Ok(modify(dm, x)?.run()?.key_rate - modify(&gm, x)?.run()?.key_rate)
    };

    let mut prev_x = lo;
    let mut prev_f = diff(lo)?;
    let mut evals = 1;
    for i in 1..=steps {
        let x = lo + (hi - lo) * i as f64 / steps as f64;
        let f = diff(x)?;
        evals += 1;
        if prev_f == 0.0 {
            return Ok(FinderResult {
                target,
                value: prev_x,
                achieved_tolerance: 0.0,
                iterations: evals,
            });
        }
        if prev_f.signum() != f.signum() {
            let (value, width, inner) = bisect_root(&mut diff, prev_x, x, tol)?;
            return Ok(FinderResult {
                target,
                value,
                achieved_tolerance: width,
                iterations: evals + inner,
            });
        }
        prev_x = x;
        prev_f = f;
    }
    Err(CliError::Core(Error::Infeasible(format!(
        "rates do not cross for {variable:?} in [{lo}, {hi}]"
    ))))
}

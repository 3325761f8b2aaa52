//! Operator-norm discrepancy between the periodic and effective resolvents.
//!
//! By scaling, `‖(A_ε + I)^(-1) - (A0 + I)^(-1)‖` equals `ε^α` times the
//! supremum over `ξ` of the fiber resolvent difference at spectral parameter
//! `ε^α`. The supremum is replaced by a maximum over an [`XiGrid`]; the
//! truncation is checked by rerunning at `2N`.

use rayon::prelude::*;
use serde::Serialize;

use super::fit::{fit_rate, log_corrected_scale, RateFit};
use super::grid::XiGrid;
use super::resolvent::FiberResolvents;
use crate::coefficient::{euclidean_norm, CertifiedCoefficient, ModelParams, TheoryConstants};
use crate::error::{Error, Result};
use crate::fiber::ModeSet;

/// Largest accepted relative change of the discrepancy under `N → 2N`.
pub const TRUNCATION_TOLERANCE: f64 = 0.05;
/// Largest accepted relative change under grid doubling.
pub const GRID_TOLERANCE: f64 = 0.02;
/// Largest accepted max/min of the bound ratios.
pub const BOUND_RATIO_SPREAD: f64 = 10.0;

/// Predicted rate: `ε^α`, `ε (1 + |ln ε|)^2` or `ε^(2-α)`.
pub fn rate_bound(alpha: f64, epsilon: f64) -> f64 {
    if alpha < 1.0 {
        epsilon.powf(alpha)
    } else if alpha == 1.0 {
        log_corrected_scale(epsilon)
    } else {
        epsilon.powf(2.0 - alpha)
    }
}

/// Orders where the theory's constants degenerate.
pub fn near_singular_order(alpha: f64) -> bool {
    (alpha > 0.95 && alpha < 1.05) || (alpha > 1.90 && alpha < 2.0)
}

/// Extra slope tolerance granted near the singular orders.
pub fn slope_widening(alpha: f64) -> f64 {
    if near_singular_order(alpha) {
        0.05
    } else {
        0.0
    }
}

/// Whether a study produced a fitted rate or an exactly vanishing discrepancy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyVerdict {
    Exact,
    Fitted,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateStudyResult {
    pub alpha: f64,
    pub truncation: usize,
    pub grid_points: usize,
    /// Descending.
    pub epsilons: Vec<f64>,
    pub discrepancies: Vec<f64>,
    pub argmax_xi: Vec<Vec<f64>>,
    pub argmax_xi_norm: Vec<f64>,
    pub rate_bounds: Vec<f64>,
    pub bound_ratios: Vec<f64>,
    pub verdict: StudyVerdict,
    pub fit: Option<RateFit>,
    pub truncation_stability: Option<f64>,
    pub grid_stability: Option<f64>,
    pub slope_widening: f64,
}

impl RateStudyResult {
    /// Max/min of the bound ratios; `1` for an exact study.
    pub fn bound_ratio_spread(&self) -> f64 {
        if self.verdict == StudyVerdict::Exact {
            return 1.0;
        }
        let max = self.bound_ratios.iter().copied().fold(0.0, f64::max);
        let min = self.bound_ratios.iter().copied().fold(f64::INFINITY, f64::min);
        if min > 0.0 {
            max / min
        } else {
            f64::INFINITY
        }
    }
}

/// Per-`ε` maxima of the fiber resolvent difference over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMaxima {
    pub values: Vec<f64>,
    pub argmax: Vec<usize>,
}

/// `max_ξ ‖(A(ξ) + s)^(-1) - (A0(ξ) + s)^(-1)‖` for each `s = ε^α`.
///
/// Each `ξ` is processed independently on a pool of `workers` threads; the
/// reduction then runs sequentially in grid order, so the result does not
/// depend on the worker count.
pub fn grid_maxima(
    coeff: &CertifiedCoefficient,
    params: &ModelParams,
    constants: &TheoryConstants,
    modes: &ModeSet,
    points: &[Vec<f64>],
    epsilons: &[f64],
    workers: usize,
    threshold_comparator: bool,
) -> Result<GridMaxima> {
    let shifts: Vec<f64> = epsilons.iter().map(|e| e.powf(params.alpha())).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build worker pool: {e}")))?;
    let per_xi: Vec<Vec<f64>> = pool.install(|| {
        points
            .par_iter()
            .map(|xi| {
                let r = FiberResolvents::new(coeff, params, constants, modes, xi)?;
                shifts
                    .iter()
                    .map(|&s| {
                        if threshold_comparator {
                            r.threshold_difference_norm(s)
                        } else {
                            r.difference_norm(s)
                        }
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut values = vec![0.0; epsilons.len()];
    let mut argmax = vec![0; epsilons.len()];
    for (i, row) in per_xi.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v > values[j] {
                values[j] = v;
                argmax[j] = i;
            }
        }
    }
    Ok(GridMaxima { values, argmax })
}

/// Options for [`discrepancy_study`].
#[derive(Debug, Clone)]
pub struct StudyOptions {
    pub workers: usize,
    /// Rerun at doubled truncation.
    pub truncation_check: bool,
    /// Optional refined grid for the grid-doubling check.
    pub refined_grid: Option<XiGrid>,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            truncation_check: true,
            refined_grid: None,
        }
    }
}

fn check_epsilons(epsilons: &[f64]) -> Result<Vec<f64>> {
    if epsilons.len() < 8 {
        return Err(Error::InvalidParameter(format!(
            "a rate study needs at least 8 values of epsilon, got {}",
            epsilons.len()
        )));
    }
    if epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::InvalidParameter("epsilon values must be positive".into()));
    }
    let mut sorted = epsilons.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    if (sorted[0] / sorted[sorted.len() - 1]).log10() < 1.5 - 1e-9 {
        return Err(Error::InvalidParameter(
            "epsilon values must span at least 1.5 decades".into(),
        ));
    }
    Ok(sorted)
}

fn relative_change(reference: &[f64], other: &[f64]) -> f64 {
    reference
        .iter()
        .zip(other)
        .map(|(&a, &b)| {
            let scale = a.abs().max(b.abs());
            if scale == 0.0 {
                0.0
            } else {
                (a - b).abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

/// Rate study over `grid` and `epsilons`.
pub fn discrepancy_study(
    coeff: &CertifiedCoefficient,
    params: &ModelParams,
    constants: &TheoryConstants,
    modes: &ModeSet,
    grid: &XiGrid,
    epsilons: &[f64],
    options: &StudyOptions,
) -> Result<RateStudyResult> {
    let alpha = params.alpha();
    let epsilons = check_epsilons(epsilons)?;
    if near_singular_order(alpha) {
        log::warn!(
            "alpha = {alpha} is close to a value where the rate constants blow up; slope tolerances widened by 0.05"
        );
    }
    let scaled = |maxima: &GridMaxima| -> Vec<f64> {
        epsilons
            .iter()
            .zip(&maxima.values)
            .map(|(e, m)| e.powf(alpha) * m)
            .collect()
    };
    let maxima = grid_maxima(
        coeff,
        params,
        constants,
        modes,
        &grid.points,
        &epsilons,
        options.workers,
        false,
    )?;
    let discrepancies = scaled(&maxima);
    let argmax_xi: Vec<Vec<f64>> = maxima.argmax.iter().map(|&i| grid.points[i].clone()).collect();
    let argmax_xi_norm = argmax_xi.iter().map(|xi| euclidean_norm(xi)).collect();
    let rate_bounds: Vec<f64> = epsilons.iter().map(|&e| rate_bound(alpha, e)).collect();
    let bound_ratios = discrepancies.iter().zip(&rate_bounds).map(|(d, r)| d / r).collect();

    let exact = discrepancies.iter().all(|&d| d == 0.0);
    let (verdict, fit) = if exact {
        (StudyVerdict::Exact, None)
    } else {
        let points: Vec<(f64, f64)> = epsilons.iter().copied().zip(discrepancies.iter().copied()).collect();
        (StudyVerdict::Fitted, Some(fit_rate(&points, alpha)?))
    };

    let truncation_stability = if options.truncation_check {
        let doubled = ModeSet::new(modes.dimension(), 2 * modes.truncation())?;
        let fine = grid_maxima(
            coeff,
            params,
            constants,
            &doubled,
            &grid.points,
            &epsilons,
            options.workers,
            false,
        )?;
        let stability = relative_change(&scaled(&fine), &discrepancies);
        if stability > TRUNCATION_TOLERANCE {
            return Err(Error::TruncationUnstable { stability });
        }
        Some(stability)
    } else {
        None
    };
    let grid_stability = match &options.refined_grid {
        Some(refined) => {
            let fine = grid_maxima(
                coeff,
                params,
                constants,
                modes,
                &refined.points,
                &epsilons,
                options.workers,
                false,
            )?;
            Some(relative_change(&scaled(&fine), &discrepancies))
        }
        None => None,
    };

    Ok(RateStudyResult {
        alpha,
        truncation: modes.truncation(),
        grid_points: grid.len(),
        epsilons,
        discrepancies,
        argmax_xi,
        argmax_xi_norm,
        rate_bounds,
        bound_ratios,
        verdict,
        fit,
        truncation_stability,
        grid_stability,
        slope_widening: slope_widening(alpha),
    })
}

/// Supremum over `points` (all inside the threshold ball) of the rank-one
/// comparator difference `‖(A(ξ) + ε^α)^(-1) - (mu0 V_α(ξ) + ε^α)^(-1) P‖`,
/// one value per `ε`.
pub fn threshold_sup(
    coeff: &CertifiedCoefficient,
    params: &ModelParams,
    constants: &TheoryConstants,
    modes: &ModeSet,
    points: &[Vec<f64>],
    epsilons: &[f64],
    workers: usize,
) -> Result<Vec<f64>> {
    if let Some(outside) = points.iter().find(|xi| euclidean_norm(xi) > constants.delta0) {
        return Err(Error::OutsideThresholdBall {
            xi_norm: euclidean_norm(outside),
            delta0: constants.delta0,
        });
    }
    Ok(grid_maxima(coeff, params, constants, modes, points, epsilons, workers, true)?.values)
}

//! Structured stability radius by a safeguarded Newton iteration on
//! `ε ↦ α_{ε,H}(A)`.
//!
//! The abscissa is increasing in ε with derivative `ε / ((y*x) θ)`, so the
//! Newton step is `ε − (y*x) θ α / ε`, floored at `ζ ε` to keep iterates
//! positive.

use crate::abscissa::{worst_case_multistart, worst_case_perturbation, AbscissaOptions, AbscissaResult};
use crate::error::{Error, Result};
use crate::inner::solve_inner_with_fallback;
use crate::linalg::{spectral_abscissa, DenseMatrix, EigenTriple};
use crate::perturbation::PerturbationStructure;

const BUDGET_SLACK: f64 = 1e-9;

/// Initial perturbation for each inner abscissa solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitPolicy {
    Zero,
    /// Fresh random feasible sample, seed `seed + l` at outer step `l`.
    Random { seed: u64 },
    /// Previous worst case projected onto the new feasible set.
    WarmStart,
    /// Zero plus `restarts` random starts; the largest abscissa wins.
    MultiStart { restarts: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusOptions {
    pub eps0: f64,
    pub tol_alpha: f64,
    pub zeta: f64,
    pub l_max: usize,
    pub init: InitPolicy,
    /// Also carries `tol_delta` for the inner abscissa solves.
    pub abscissa: AbscissaOptions,
}

impl Default for RadiusOptions {
    fn default() -> Self {
        Self {
            eps0: 1.0,
            tol_alpha: 1e-3,
            zeta: 0.1,
            l_max: 100,
            init: InitPolicy::Zero,
            abscissa: AbscissaOptions::default(),
        }
    }
}

impl RadiusOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(what.to_string()));
        if !(self.eps0 > 0.0 && self.eps0.is_finite()) {
            return bad("eps0 must be positive");
        }
        if !(self.tol_alpha > 0.0) || !(self.abscissa.tol_delta > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.zeta > 0.0 && self.zeta < 1.0) {
            return bad("zeta must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusStep {
    pub epsilon: f64,
    pub alpha: f64,
    pub derivative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusResult {
    pub radius: f64,
    pub trace: Vec<RadiusStep>,
    pub final_result: AbscissaResult,
    pub converged: bool,
    /// Random restarts run in total across all outer steps.
    pub restarts_used: usize,
}

/// `dα/dε = ε / ((y*x) θ)` at a worst-case perturbation.
pub fn abscissa_derivative(epsilon: f64, triple: &EigenTriple, theta: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::DegenerateObjective);
    }
    Ok(epsilon / (triple.inner * theta))
}

/// Smallest derivative over the tied rightmost eigentriples. Each triple is
/// paired with the θ of the inner problem at its own `Re(y x*)`; a fully
/// saturated optimum does not move with ε and contributes zero.
fn tied_derivative(epsilon: f64, result: &AbscissaResult, structure: &PerturbationStructure) -> Result<f64> {
    let mut best = f64::INFINITY;
    for (k, triple) in result.rightmost.iter().enumerate() {
        let theta = if k == 0 {
            result.theta
        } else {
            let weights: Vec<f64> = structure
                .edges()
                .iter()
                .map(|e| triple.sensitivity_at(e.row, e.col))
                .collect();
            solve_inner_with_fallback(epsilon, &weights, structure)?.theta
        };
        let d = match theta {
            Some(t) => abscissa_derivative(epsilon, triple, t)?,
            None => 0.0,
        };
        best = best.min(d);
    }
    Ok(best)
}

/// Smallest perturbation energy in `structure` that makes `a` unstable.
///
/// Returns radius 0 immediately when `a` is not Hurwitz. Hitting `l_max`
/// yields `converged = false` with the last ε as the estimate. If the worst
/// case stays strictly stable on a fully saturated vertex, no energy in the
/// pattern can destabilize `a` and [`Error::FullySaturated`] is returned.
pub fn stability_radius(a: &DenseMatrix, structure: &PerturbationStructure, opts: &RadiusOptions) -> Result<RadiusResult> {
    opts.validate()?;
    if spectral_abscissa(a)? >= 0.0 {
        let final_result = worst_case_perturbation(a, 0.0, structure, &structure.zero(), &opts.abscissa)?;
        return Ok(RadiusResult {
            radius: 0.0,
            trace: Vec::new(),
            final_result,
            converged: true,
            restarts_used: 0,
        });
    }

    let mut epsilon = opts.eps0;
    let mut trace = Vec::new();
    let mut restarts_used = 0;
    let mut previous: Option<AbscissaResult> = None;

    for l in 0..opts.l_max {
        let result = match opts.init {
            InitPolicy::Zero => worst_case_perturbation(a, epsilon, structure, &structure.zero(), &opts.abscissa)?,
            InitPolicy::Random { seed } => {
                restarts_used += 1;
                let start = structure.sample(epsilon, seed.wrapping_add(l as u64));
                worst_case_perturbation(a, epsilon, structure, &start, &opts.abscissa)?
            }
            InitPolicy::WarmStart => {
                let start = match &previous {
                    Some(p) => structure.project(&p.delta, epsilon),
                    None => structure.zero(),
                };
                worst_case_perturbation(a, epsilon, structure, &start, &opts.abscissa)?
            }
            InitPolicy::MultiStart { restarts, seed } => {
                restarts_used += restarts;
                let step_seed = seed.wrapping_add((l as u64) * (restarts as u64 + 1));
                worst_case_multistart(a, epsilon, structure, restarts, step_seed, &opts.abscissa)?
            }
        };
        let alpha = result.alpha;
        let derivative = tied_derivative(epsilon, &result, structure)?;
        trace.push(RadiusStep {
            epsilon,
            alpha,
            derivative,
        });

        // A worst case that leaves part of the budget unused is feasible at
        // its own energy, so the abscissa is unchanged down to ‖Δ‖ and the
        // crossing cannot lie above it.
        let used = result.delta.norm();
        if alpha >= -opts.tol_alpha && used < epsilon * (1.0 - BUDGET_SLACK) {
            epsilon = used;
            previous = Some(result);
            continue;
        }
        if alpha.abs() <= opts.tol_alpha {
            return Ok(RadiusResult {
                radius: epsilon,
                trace,
                final_result: result,
                converged: true,
                restarts_used,
            });
        }
        let floor = opts.zeta * epsilon;
        epsilon = if derivative > 0.0 && derivative.is_finite() {
            (epsilon - alpha / derivative).max(floor)
        } else if alpha > 0.0 {
            floor
        } else {
            return Err(Error::FullySaturated);
        };
        previous = Some(result);
    }

    let final_result = previous.expect("l_max > 0 runs at least one step");
    let radius = trace.last().map_or(opts.eps0, |s: &RadiusStep| s.epsilon);
    Ok(RadiusResult {
        radius,
        trace,
        final_result,
        converged: false,
        restarts_used,
    })
}

//! Linear maximization of `⟨Δ, M⟩` over the structured set `H ∩ B_ε`.
//!
//! Away from full saturation the optimizer is `Δ_ij = m_ij θ` on unsaturated
//! edges and sits on a bound on the saturated ones, where
//!
//! ```text
//! θ = sqrt( (ε² − Σ_{S̄} Δ̄_ij² − Σ_{S̲} Δ̲_ij²) / Σ_{unsaturated} m_ij² ).
//! ```
//!
//! [`solve_inner`] grows the saturation sets one sweep at a time until they
//! are consistent with θ. [`solve_inner_oracle`] enumerates every set
//! assignment instead and is meant for verification.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::perturbation::{Edge, PerturbationStructure, SparsePerturbation};

/// Largest edge count for which the fully saturated case is resolved by
/// enumerating bound vertices.
pub const VERTEX_FALLBACK_LIMIT: usize = 20;

/// Largest edge count accepted by [`solve_inner_oracle`].
pub const ORACLE_LIMIT: usize = 12;

const ORACLE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Saturation {
    Free,
    Upper,
    Lower,
}

/// Saturation state of every edge; the upper and lower sets are the edges
/// marked [`Saturation::Upper`] and [`Saturation::Lower`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaturationSets {
    state: Vec<Saturation>,
}

impl SaturationSets {
    pub fn empty(len: usize) -> Self {
        Self {
            state: vec![Saturation::Free; len],
        }
    }

    pub fn from_states(state: Vec<Saturation>) -> Self {
        Self { state }
    }

    pub fn state(&self) -> &[Saturation] {
        &self.state
    }

    pub fn upper_set(&self) -> Vec<usize> {
        self.indices(Saturation::Upper)
    }

    pub fn lower_set(&self) -> Vec<usize> {
        self.indices(Saturation::Lower)
    }

    pub fn is_fully_saturated(&self) -> bool {
        self.state.iter().all(|s| *s != Saturation::Free)
    }

    fn indices(&self, which: Saturation) -> Vec<usize> {
        self.state
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == which)
            .map(|(k, _)| k)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    pub delta: SparsePerturbation,
    /// Proportionality ratio on unsaturated edges. `None` when the returned
    /// point is a fully saturated bound vertex.
    pub theta: Option<f64>,
    pub sets: SaturationSets,
    pub objective: f64,
    /// θ computed at the start of every sweep.
    pub theta_history: Vec<f64>,
}

/// θ for given saturation sets, `M` read on the edges of `structure`.
pub fn theta(epsilon: f64, m: &DenseMatrix, sets: &SaturationSets, structure: &PerturbationStructure) -> Result<f64> {
    theta_from_weights(epsilon, &structure.gather(m), sets, structure.edges())
}

/// θ with `weights[k] = m` on edge `k`.
pub fn theta_from_weights(epsilon: f64, weights: &[f64], sets: &SaturationSets, edges: &[Edge]) -> Result<f64> {
    let mut spent = 0.0;
    let mut denom = 0.0;
    for ((w, s), e) in weights.iter().zip(sets.state()).zip(edges) {
        match s {
            Saturation::Free => denom += w * w,
            Saturation::Upper => spent += e.upper.map_or(0.0, |b| b * b),
            Saturation::Lower => spent += e.lower.map_or(0.0, |b| b * b),
        }
    }
    if denom <= 0.0 {
        return Err(Error::DegenerateObjective);
    }
    let mut radicand = epsilon * epsilon - spent;
    if radicand < 0.0 {
        // Rounding in the saturated sum can push an exactly exhausted budget
        // slightly negative.
        if radicand >= -1e-12 * (epsilon * epsilon).max(f64::MIN_POSITIVE) {
            radicand = 0.0;
        } else {
            return Err(Error::InfeasibleEnergy { radicand });
        }
    }
    Ok((radicand / denom).sqrt())
}

/// Maximizes `⟨Δ, M⟩` over `H ∩ B_ε` by incremental saturation.
///
/// Fails with [`Error::FullySaturated`] when every edge saturates; see
/// [`solve_inner_with_fallback`].
pub fn solve_inner(epsilon: f64, m: &DenseMatrix, structure: &PerturbationStructure) -> Result<InnerSolution> {
    solve_inner_weights(epsilon, &structure.gather(m), structure)
}

/// [`solve_inner`] on pre-gathered edge weights.
pub fn solve_inner_weights(epsilon: f64, weights: &[f64], structure: &PerturbationStructure) -> Result<InnerSolution> {
    let edges = structure.edges();
    assert_eq!(weights.len(), edges.len(), "weights do not match structure");
    if edges.is_empty() {
        return Err(Error::DegenerateObjective);
    }
    let mut sets = SaturationSets::empty(edges.len());
    let mut history = Vec::new();
    let theta = loop {
        if sets.is_fully_saturated() {
            return Err(Error::FullySaturated);
        }
        let theta = theta_from_weights(epsilon, weights, &sets, edges)?;
        history.push(theta);
        let mut changed = false;
        for (k, e) in edges.iter().enumerate() {
            if sets.state[k] != Saturation::Free {
                continue;
            }
            let v = weights[k] * theta;
            if e.upper.is_some_and(|hi| v >= hi) {
                sets.state[k] = Saturation::Upper;
                changed = true;
            } else if e.lower.is_some_and(|lo| v <= lo) {
                sets.state[k] = Saturation::Lower;
                changed = true;
            }
        }
        if !changed {
            break theta;
        }
    };
    let delta = assign(weights, Some(theta), &sets, edges);
    let objective = delta.inner(weights);
    Ok(InnerSolution {
        delta,
        theta: Some(theta),
        sets,
        objective,
        theta_history: history,
    })
}

/// [`solve_inner_weights`], resolving full saturation by exhaustion over
/// the bound vertices inside the ball when there are at most
/// [`VERTEX_FALLBACK_LIMIT`] edges.
pub fn solve_inner_with_fallback(
    epsilon: f64,
    weights: &[f64],
    structure: &PerturbationStructure,
) -> Result<InnerSolution> {
    match solve_inner_weights(epsilon, weights, structure) {
        Err(Error::FullySaturated) if structure.len() <= VERTEX_FALLBACK_LIMIT => {
            let (delta, objective) =
                best_vertex(epsilon, weights, structure.edges()).ok_or(Error::FullySaturated)?;
            let sets = SaturationSets::from_states(
                structure
                    .edges()
                    .iter()
                    .zip(delta.values())
                    .map(|(e, v)| {
                        if e.upper == Some(*v) {
                            Saturation::Upper
                        } else {
                            Saturation::Lower
                        }
                    })
                    .collect(),
            );
            Ok(InnerSolution {
                delta,
                theta: None,
                sets,
                objective,
                theta_history: Vec::new(),
            })
        }
        other => other,
    }
}

/// Right derivative of the optimal value with respect to ε: `ε / θ`.
pub fn inner_derivative(epsilon: f64, theta: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::DegenerateObjective);
    }
    Ok(epsilon / theta)
}

fn assign(weights: &[f64], theta: Option<f64>, sets: &SaturationSets, edges: &[Edge]) -> SparsePerturbation {
    let values = weights
        .iter()
        .zip(sets.state())
        .zip(edges)
        .map(|((w, s), e)| match s {
            Saturation::Free => w * theta.unwrap_or(0.0),
            Saturation::Upper => e.upper.unwrap_or(f64::INFINITY),
            Saturation::Lower => e.lower.unwrap_or(f64::NEG_INFINITY),
        })
        .collect();
    SparsePerturbation::from_values(values)
}

/// Finite bound values of an edge, deduplicated.
fn vertex_choices(e: &Edge) -> Vec<f64> {
    let mut out = Vec::with_capacity(2);
    if let Some(lo) = e.lower {
        out.push(lo);
    }
    if let Some(hi) = e.upper {
        if !out.contains(&hi) {
            out.push(hi);
        }
    }
    out
}

/// Best bound vertex in `B_ε`, first in mixed-radix order on ties.
fn best_vertex(epsilon: f64, weights: &[f64], edges: &[Edge]) -> Option<(SparsePerturbation, f64)> {
    let choices: Vec<Vec<f64>> = edges.iter().map(vertex_choices).collect();
    if choices.iter().any(|c| c.is_empty()) {
        return None;
    }
    let budget = epsilon * epsilon * (1.0 + 1e-12);
    let mut digits = vec![0usize; edges.len()];
    let mut best: Option<(Vec<f64>, f64)> = None;
    loop {
        let values: Vec<f64> = digits.iter().zip(&choices).map(|(d, c)| c[*d]).collect();
        if values.iter().map(|v| v * v).sum::<f64>() <= budget {
            let obj: f64 = values.iter().zip(weights).map(|(a, b)| a * b).sum();
            if best.as_ref().is_none_or(|(_, b)| obj > *b) {
                best = Some((values, obj));
            }
        }
        if !advance(&mut digits, |k| choices[k].len()) {
            break;
        }
    }
    best.map(|(v, obj)| (SparsePerturbation::from_values(v), obj))
}

/// Mixed-radix increment, least significant digit last. Returns false on
/// wrap-around.
fn advance(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for k in (0..digits.len()).rev() {
        digits[k] += 1;
        if digits[k] < radix(k) {
            return true;
        }
        digits[k] = 0;
    }
    false
}

/// Result of the enumeration oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub delta: SparsePerturbation,
    pub objective: f64,
    /// Whether a different maximizer with the same objective was found.
    pub tied: bool,
}

/// Brute-force solution of the inner problem.
///
/// Every disjoint pair of saturation sets is tried: θ is evaluated where it
/// is defined, the candidate is kept if the free values lie strictly inside
/// their bounds and the saturated ones are consistent with θ. Bound vertices
/// inside the ball and the box-only candidate (inactive ball) are also
/// evaluated. The feasible candidate with the largest objective wins.
pub fn solve_inner_oracle(epsilon: f64, m: &DenseMatrix, structure: &PerturbationStructure) -> Result<OracleSolution> {
    solve_inner_oracle_weights(epsilon, &structure.gather(m), structure)
}

pub fn solve_inner_oracle_weights(
    epsilon: f64,
    weights: &[f64],
    structure: &PerturbationStructure,
) -> Result<OracleSolution> {
    let edges = structure.edges();
    if edges.len() > ORACLE_LIMIT {
        return Err(Error::TooLarge {
            edges: edges.len(),
            limit: ORACLE_LIMIT,
        });
    }
    let slack = ORACLE_SLACK * (1.0 + epsilon);
    let mut candidates: Vec<(Vec<f64>, f64)> = Vec::new();
    let push = |candidates: &mut Vec<(Vec<f64>, f64)>, values: Vec<f64>| {
        let obj = values.iter().zip(weights).map(|(a, b)| a * b).sum::<f64>();
        candidates.push((values, obj));
    };

    // KKT candidates with an active ball.
    let mut digits = vec![0usize; edges.len()];
    loop {
        let state: Vec<Saturation> = digits
            .iter()
            .map(|d| match d {
                0 => Saturation::Free,
                1 => Saturation::Upper,
                _ => Saturation::Lower,
            })
            .collect();
        let bounds_exist = state.iter().zip(edges).all(|(s, e)| match s {
            Saturation::Free => true,
            Saturation::Upper => e.upper.is_some(),
            Saturation::Lower => e.lower.is_some(),
        });
        let sets = SaturationSets::from_states(state);
        if bounds_exist && !sets.is_fully_saturated() {
            if let Ok(theta) = theta_from_weights(epsilon, weights, &sets, edges) {
                let consistent = sets.state().iter().zip(edges).zip(weights).all(|((s, e), w)| {
                    let v = w * theta;
                    match s {
                        Saturation::Free => v > e.lower_or_inf() - slack && v < e.upper_or_inf() + slack,
                        Saturation::Upper => v >= e.upper_or_inf() - slack,
                        Saturation::Lower => v <= e.lower_or_inf() + slack,
                    }
                });
                if consistent {
                    push(&mut candidates, assign(weights, Some(theta), &sets, edges).into_values());
                }
            }
        }
        if !advance(&mut digits, |_| 3) {
            break;
        }
    }

    // Fully saturated vertices inside the ball.
    let choices: Vec<Vec<f64>> = edges.iter().map(vertex_choices).collect();
    if choices.iter().all(|c| !c.is_empty()) && !edges.is_empty() {
        let mut digits = vec![0usize; edges.len()];
        loop {
            let values: Vec<f64> = digits.iter().zip(&choices).map(|(d, c)| c[*d]).collect();
            if values.iter().map(|v| v * v).sum::<f64>() <= epsilon * epsilon + slack {
                push(&mut candidates, values);
            }
            if !advance(&mut digits, |k| choices[k].len()) {
                break;
            }
        }
    }

    // Inactive ball: every edge with m ≠ 0 at the bound in the direction of m.
    let box_only: Option<Vec<f64>> = edges
        .iter()
        .zip(weights)
        .map(|(e, w)| {
            if *w > 0.0 {
                e.upper
            } else if *w < 0.0 {
                e.lower
            } else {
                Some(0.0)
            }
        })
        .collect();
    if let Some(values) = box_only {
        if values.iter().map(|v| v * v).sum::<f64>() <= epsilon * epsilon + slack {
            push(&mut candidates, values);
        }
    }

    if candidates.is_empty() {
        // 0 is always feasible.
        push(&mut candidates, vec![0.0; edges.len()]);
    }

    let mut best = 0;
    for (k, (_, obj)) in candidates.iter().enumerate() {
        if *obj > candidates[best].1 {
            best = k;
        }
    }
    let (best_values, best_obj) = candidates[best].clone();
    let tol = 1e-12 * (1.0 + best_obj.abs());
    let tied = candidates.iter().any(|(v, obj)| {
        (best_obj - obj).abs() <= tol
            && v.iter().zip(&best_values).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() > 1e-8
    });
    Ok(OracleSolution {
        delta: SparsePerturbation::from_values(best_values),
        objective: best_obj,
        tied,
    })
}

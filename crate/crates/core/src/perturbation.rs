//! The admissible perturbation set: a sparsity pattern with optional
//! per-edge saturation bounds, intersected with a Frobenius-norm ball.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

const DYKSTRA_MAX_SWEEPS: usize = 10_000;
const DYKSTRA_TOL: f64 = 1e-12;

/// A perturbable entry `(row, col)` (zero-based) with its saturation bounds.
/// `None` means unbounded on that side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub row: usize,
    pub col: usize,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Edge {
    pub fn free(row: usize, col: usize) -> Self {
        Self {
            row,
            col,
            lower: None,
            upper: None,
        }
    }

    pub fn bounded(row: usize, col: usize, lower: Option<f64>, upper: Option<f64>) -> Self {
        Self {
            row,
            col,
            lower,
            upper,
        }
    }

    pub fn lower_or_inf(&self) -> f64 {
        self.lower.unwrap_or(f64::NEG_INFINITY)
    }

    pub fn upper_or_inf(&self) -> f64 {
        self.upper.unwrap_or(f64::INFINITY)
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lower_or_inf(), self.upper_or_inf())
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lower_or_inf() && v <= self.upper_or_inf()
    }
}

/// The perturbation set `H`: entries outside `edges` are zero, entries on
/// `edges` lie in `[lower, upper]` with `lower ≤ 0 ≤ upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationStructure {
    n: usize,
    edges: Vec<Edge>,
}

impl PerturbationStructure {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let s = Self { n, edges };
        s.validate()?;
        Ok(s)
    }

    /// All entries of the given zero-based rows, unbounded.
    pub fn rows(n: usize, rows: impl IntoIterator<Item = usize>) -> Result<Self> {
        let edges = rows
            .into_iter()
            .flat_map(|i| (0..n).map(move |j| Edge::free(i, j)))
            .collect();
        Self::new(n, edges)
    }

    /// Every entry of an `n × n` matrix, unbounded.
    pub fn full(n: usize) -> Result<Self> {
        Self::rows(n, 0..n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Same pattern with every bound replaced by `f(edge)`.
    pub fn with_bounds(&self, mut f: impl FnMut(&Edge) -> (Option<f64>, Option<f64>)) -> Result<Self> {
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let (lower, upper) = f(e);
                Edge::bounded(e.row, e.col, lower, upper)
            })
            .collect();
        Self::new(self.n, edges)
    }

    /// Same bounds with the listed zero-based entries removed.
    pub fn without(&self, entries: &[(usize, usize)]) -> Result<Self> {
        let edges = self
            .edges
            .iter()
            .filter(|e| !entries.contains(&(e.row, e.col)))
            .copied()
            .collect();
        Self::new(self.n, edges)
    }

    /// Checks indices, duplicates and `lower ≤ 0 ≤ upper`.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidStructure("matrix dimension must be positive".into()));
        }
        let mut seen = HashSet::with_capacity(self.edges.len());
        for e in &self.edges {
            if e.row >= self.n || e.col >= self.n {
                return Err(Error::InvalidStructure(format!(
                    "edge ({}, {}) outside a {}x{} matrix",
                    e.row + 1,
                    e.col + 1,
                    self.n,
                    self.n
                )));
            }
            if !seen.insert((e.row, e.col)) {
                return Err(Error::InvalidStructure(format!(
                    "duplicate edge ({}, {})",
                    e.row + 1,
                    e.col + 1
                )));
            }
            if let Some(lo) = e.lower {
                if !(lo <= 0.0) || lo.is_infinite() {
                    return Err(Error::InvalidStructure(format!(
                        "edge ({}, {}): lower bound {lo} must be finite and ≤ 0",
                        e.row + 1,
                        e.col + 1
                    )));
                }
            }
            if let Some(hi) = e.upper {
                if !(hi >= 0.0) || hi.is_infinite() {
                    return Err(Error::InvalidStructure(format!(
                        "edge ({}, {}): upper bound {hi} must be finite and ≥ 0",
                        e.row + 1,
                        e.col + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Gathers `m[row, col]` for every edge, in edge order.
    pub fn gather(&self, m: &DenseMatrix) -> Vec<f64> {
        self.edges.iter().map(|e| m[(e.row, e.col)]).collect()
    }

    pub fn zero(&self) -> SparsePerturbation {
        SparsePerturbation::zeros(self.len())
    }

    /// Whether every bound of `self` is at least as tight as in `other` on
    /// a pattern contained in `other`'s.
    pub fn is_subset_of(&self, other: &PerturbationStructure) -> bool {
        self.n == other.n
            && self.edges.iter().all(|e| {
                other.edges.iter().any(|o| {
                    o.row == e.row
                        && o.col == e.col
                        && o.lower_or_inf() <= e.lower_or_inf()
                        && o.upper_or_inf() >= e.upper_or_inf()
                })
            })
    }

    /// Checks whether `delta` lies in `H ∩ B_ε` up to `slack`.
    pub fn is_feasible(&self, delta: &SparsePerturbation, epsilon: f64, slack: f64) -> bool {
        delta.values.len() == self.len()
            && self
                .edges
                .iter()
                .zip(&delta.values)
                .all(|(e, &v)| v >= e.lower_or_inf() - slack && v <= e.upper_or_inf() + slack)
            && delta.norm() <= epsilon + slack
    }

    /// Euclidean projection of `delta` onto `H ∩ B_ε` by Dykstra's
    /// alternating projections between the box and the ball.
    pub fn project(&self, delta: &SparsePerturbation, epsilon: f64) -> SparsePerturbation {
        assert_eq!(delta.values.len(), self.len(), "perturbation does not match structure");
        let epsilon = epsilon.max(0.0);
        let clamp_box = |v: &[f64]| -> Vec<f64> {
            self.edges.iter().zip(v).map(|(e, &x)| e.clamp(x)).collect()
        };
        let project_ball = |v: &[f64]| -> Vec<f64> {
            let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nrm <= epsilon {
                v.to_vec()
            } else {
                v.iter().map(|x| x * epsilon / nrm).collect()
            }
        };

        let dim = self.len();
        let mut x = delta.values.clone();
        let mut p = vec![0.0; dim];
        let mut q = vec![0.0; dim];
        for _ in 0..DYKSTRA_MAX_SWEEPS {
            // The iterate can repeat while the increments still move, so
            // both enter the stopping test.
            let mut change = 0.0f64;
            let shifted: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
            let y = clamp_box(&shifted);
            for k in 0..dim {
                let pk = shifted[k] - y[k];
                change = change.max((pk - p[k]).abs());
                p[k] = pk;
            }
            let shifted: Vec<f64> = y.iter().zip(&q).map(|(a, b)| a + b).collect();
            let next = project_ball(&shifted);
            for k in 0..dim {
                let qk = shifted[k] - next[k];
                change = change.max((qk - q[k]).abs()).max((next[k] - x[k]).abs());
                q[k] = qk;
            }
            let box_gap = next
                .iter()
                .zip(&self.edges)
                .map(|(v, e)| (v - e.clamp(*v)).abs())
                .fold(0.0, f64::max);
            x = next;
            if change <= DYKSTRA_TOL * (1.0 + epsilon) && box_gap <= DYKSTRA_TOL * (1.0 + epsilon) {
                break;
            }
        }
        // Clamping a point of the ball into a box containing 0 only shrinks
        // magnitudes, so the result stays in the ball.
        SparsePerturbation::from_values(clamp_box(&x))
    }

    /// Random feasible perturbation: each edge uniform on
    /// `[max(lower, -ε), min(upper, ε)]`, then rescaled into the ball.
    ///
    /// The clamp-after-rescale law is not uniform on `H ∩ B_ε`; it is only
    /// meant for Monte-Carlo estimates and random restarts.
    pub fn sample(&self, epsilon: f64, seed: u64) -> SparsePerturbation {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(epsilon, &mut rng)
    }

    pub fn sample_with<R: Rng>(&self, epsilon: f64, rng: &mut R) -> SparsePerturbation {
        let epsilon = epsilon.max(0.0);
        let mut values: Vec<f64> = self
            .edges
            .iter()
            .map(|e| {
                let lo = e.lower_or_inf().max(-epsilon);
                let hi = e.upper_or_inf().min(epsilon);
                if hi > lo {
                    rng.random_range(lo..=hi)
                } else {
                    lo
                }
            })
            .collect();
        let nrm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nrm > epsilon {
            let s = epsilon / nrm;
            for (v, e) in values.iter_mut().zip(&self.edges) {
                *v = e.clamp(*v * s);
            }
        }
        SparsePerturbation::from_values(values)
    }
}

/// A real perturbation supported on the edges of a structure; `values[k]`
/// belongs to `structure.edges()[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePerturbation {
    values: Vec<f64>,
}

impl SparsePerturbation {
    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![0.0; len],
        }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self, structure: &PerturbationStructure) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(structure.n(), structure.n());
        self.add_to(structure, &mut m);
        m
    }

    /// `m += Δ`
    pub fn add_to(&self, structure: &PerturbationStructure, m: &mut DenseMatrix) {
        for (e, v) in structure.edges().iter().zip(&self.values) {
            m[(e.row, e.col)] += v;
        }
    }

    /// `⟨Δ, M⟩` restricted to the edges.
    pub fn inner(&self, weights: &[f64]) -> f64 {
        self.values.iter().zip(weights).map(|(a, b)| a * b).sum()
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_distance(&self, other: &SparsePerturbation) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Spectral norm of `self - other`, computed on the compressed block of
    /// rows and columns that carry edges.
    pub fn spectral_distance(&self, other: &SparsePerturbation, structure: &PerturbationStructure) -> Result<f64> {
        let mut rows: Vec<usize> = structure.edges().iter().map(|e| e.row).collect();
        let mut cols: Vec<usize> = structure.edges().iter().map(|e| e.col).collect();
        rows.sort_unstable();
        rows.dedup();
        cols.sort_unstable();
        cols.dedup();
        if rows.is_empty() {
            return Ok(0.0);
        }
        let mut block = DenseMatrix::zeros(rows.len(), cols.len());
        for ((e, a), b) in structure.edges().iter().zip(&self.values).zip(&other.values) {
            let r = rows.binary_search(&e.row).expect("row present");
            let c = cols.binary_search(&e.col).expect("col present");
            block[(r, c)] = a - b;
        }
        crate::linalg::spectral_norm(&block)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn two_edges(lo: Option<f64>, hi: Option<f64>) -> PerturbationStructure {
        PerturbationStructure::new(2, vec![Edge::bounded(0, 0, lo, hi), Edge::bounded(0, 1, lo, hi)]).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(PerturbationStructure::new(2, vec![Edge::bounded(0, 0, Some(-1.0), Some(1.0))]).is_ok());
        let err = PerturbationStructure::new(2, vec![Edge::free(2, 0)]).unwrap_err();
        assert!(matches!(err, Error::InvalidStructure(_)));
        let err = PerturbationStructure::new(2, vec![Edge::bounded(0, 0, Some(0.5), None)]).unwrap_err();
        assert!(matches!(err, Error::InvalidStructure(_)));
        let err = PerturbationStructure::new(2, vec![Edge::bounded(0, 0, None, Some(-0.1))]).unwrap_err();
        assert!(matches!(err, Error::InvalidStructure(_)));
        let err = PerturbationStructure::new(2, vec![Edge::free(0, 0), Edge::free(0, 0)]).unwrap_err();
        assert!(matches!(err, Error::InvalidStructure(_)));
        let err = PerturbationStructure::new(2, vec![Edge::bounded(0, 0, Some(f64::NAN), None)]).unwrap_err();
        assert!(matches!(err, Error::InvalidStructure(_)));
    }

    #[test]
    fn projection_keeps_feasible_points() {
        let s = two_edges(Some(-1.0), Some(1.0));
        let d = SparsePerturbation::from_values(vec![0.3, -0.4]);
        assert_eq!(s.project(&d, 1.0), d);
    }

    #[test]
    fn projection_onto_ball_scales() {
        let s = two_edges(None, None);
        let d = SparsePerturbation::from_values(vec![3.0, 4.0]);
        let p = s.project(&d, 2.5);
        assert_relative_eq!(p.values()[0], 1.5, epsilon = 1e-12);
        assert_relative_eq!(p.values()[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn projection_onto_box_clamps() {
        let s = two_edges(Some(-1.0), Some(1.0));
        let d = SparsePerturbation::from_values(vec![3.0, 0.0]);
        assert_eq!(s.project(&d, 10.0).values(), &[1.0, 0.0]);
    }

    #[test]
    fn projection_on_active_box_and_ball() {
        // Box [-1, 1]² with ball radius 1.2 from (3, 3): symmetric, so the
        // answer is on the diagonal at norm 1.2.
        let s = two_edges(Some(-1.0), Some(1.0));
        let p = s.project(&SparsePerturbation::from_values(vec![3.0, 3.0]), 1.2);
        let t = 1.2 / 2f64.sqrt();
        assert_relative_eq!(p.values()[0], t, epsilon = 1e-10);
        assert_relative_eq!(p.values()[1], t, epsilon = 1e-10);
        // Only the box is active here.
        let p = s.project(&SparsePerturbation::from_values(vec![3.0, 0.1]), 10.0);
        assert_eq!(p.values(), &[1.0, 0.1]);
    }

    #[test]
    fn sampling_is_deterministic_and_zero_at_zero_energy() {
        let s = two_edges(Some(-0.5), None);
        assert_eq!(s.sample(0.0, 4).values(), &[0.0, 0.0]);
        assert_eq!(s.sample(1.0, 9), s.sample(1.0, 9));
        assert_ne!(s.sample(1.0, 9), s.sample(1.0, 10));
    }

    #[test]
    fn one_edge_samples_fill_the_interval() {
        let s = PerturbationStructure::new(1, vec![Edge::free(0, 0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut max_abs: f64 = 0.0;
        let (mut lo, mut hi) = (0usize, 0usize);
        for _ in 0..10_000 {
            let v = s.sample_with(1.0, &mut rng).values()[0];
            assert!(v.abs() <= 1.0);
            max_abs = max_abs.max(v.abs());
            if v < 0.0 {
                lo += 1;
            } else {
                hi += 1;
            }
        }
        assert!(max_abs > 0.99);
        assert!(lo > 4_000 && hi > 4_000);
    }

    #[test]
    fn spectral_distance_of_rank_one_difference() {
        let s = PerturbationStructure::rows(3, [2]).unwrap();
        let a = SparsePerturbation::from_values(vec![3.0, 0.0, 4.0]);
        let b = s.zero();
        assert_relative_eq!(a.spectral_distance(&b, &s).unwrap(), 5.0, epsilon = 1e-12);
        assert_relative_eq!(a.frobenius_distance(&b), 5.0, epsilon = 1e-12);
    }

    fn arb_structure() -> impl Strategy<Value = (PerturbationStructure, Vec<f64>)> {
        (1usize..8).prop_flat_map(|len| {
            (
                proptest::collection::vec((proptest::option::of(-3.0..=0.0f64), proptest::option::of(0.0..=3.0f64)), len),
                proptest::collection::vec(-5.0..5.0f64, len),
            )
                .prop_map(move |(bounds, values)| {
                    let edges = bounds
                        .into_iter()
                        .enumerate()
                        .map(|(k, (lo, hi))| Edge::bounded(k / 3, k % 3, lo, hi))
                        .collect();
                    (PerturbationStructure::new(3, edges).unwrap(), values)
                })
        })
    }

    proptest! {
        #[test]
        fn projection_is_feasible_and_idempotent((s, values) in arb_structure(), eps in 0.0..4.0f64) {
            let d = SparsePerturbation::from_values(values);
            let p = s.project(&d, eps);
            prop_assert!(s.is_feasible(&p, eps, 1e-12));
            let pp = s.project(&p, eps);
            prop_assert!(p.frobenius_distance(&pp) <= 1e-9);
        }

        #[test]
        fn projection_is_not_beaten_by_samples((s, values) in arb_structure(), eps in 0.1..4.0f64, seed in 0u64..1000) {
            let d = SparsePerturbation::from_values(values);
            let p = s.project(&d, eps);
            let dist = p.frobenius_distance(&d);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..50 {
                let q = s.sample_with(eps, &mut rng);
                prop_assert!(dist <= q.frobenius_distance(&d) + 1e-8);
            }
        }

        #[test]
        fn samples_are_feasible((s, _values) in arb_structure(), eps in 0.0..4.0f64, seed in 0u64..10_000) {
            let d = s.sample(eps, seed);
            prop_assert!(d.norm() <= eps + 1e-12);
            for (e, v) in s.edges().iter().zip(d.values()) {
                prop_assert!(e.contains(*v));
            }
        }

        #[test]
        fn tighter_bounds_give_nested_feasible_sets((s, _values) in arb_structure(), eps in 0.0..4.0f64, seed in 0u64..10_000, shrink in 0.0..1.0f64) {
            let tight = s.with_bounds(|e| (
                Some(e.lower.unwrap_or(-2.0) * shrink),
                Some(e.upper.unwrap_or(2.0) * shrink),
            )).unwrap();
            prop_assert!(tight.is_subset_of(&s));
            let d = tight.sample(eps, seed);
            prop_assert!(tight.is_feasible(&d, eps, 1e-12));
            prop_assert!(s.is_feasible(&d, eps, 1e-12));
        }
    }
}

//! Example system matrices.

use crate::linalg::DenseMatrix;
use crate::perturbation::{Edge, PerturbationStructure};
use crate::error::Result;

/// Controllable canonical form of `s^n + a₁ s^{n-1} + … + a_n`: ones on the
/// superdiagonal and last row `−(a_n, …, a₁)`.
pub fn companion(coeffs: &[f64]) -> DenseMatrix {
    assert!(!coeffs.is_empty(), "companion matrix needs at least one coefficient");
    let n = coeffs.len();
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n - 1 {
        a[(i, i + 1)] = 1.0;
    }
    for (j, c) in coeffs.iter().rev().enumerate() {
        a[(n - 1, j)] = -c;
    }
    a
}

/// Circulant band matrix: `diag` on the diagonal, `sup` on `(i, i+1)` and
/// `sub` on `(i, i-1)`, indices taken modulo `n`. The wrap entries are
/// `A[0, n-1] = sub` and `A[n-1, 0] = sup`; for `n = 2` the bands overlap and
/// their values add up.
pub fn circulant(n: usize, diag: f64, sup: f64, sub: f64) -> DenseMatrix {
    assert!(n >= 2, "circulant matrix needs n ≥ 2");
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] += diag;
        a[(i, (i + 1) % n)] += sup;
        a[(i, (i + n - 1) % n)] += sub;
    }
    a
}

/// Nonzero entries of the first `agents` rows of a circulant band matrix
/// (diagonal, successor and predecessor), optionally with sign-preserving
/// bounds for the band values `(diag, sup, sub)`.
///
/// With sign preservation every perturbed entry may shrink to zero but not
/// change sign: `Δ_ii ≤ −diag` when `diag < 0`, and likewise for the bands.
pub fn circulant_agents(
    n: usize,
    agents: usize,
    bands: (f64, f64, f64),
    sign_preserving: bool,
) -> Result<PerturbationStructure> {
    let (diag, sup, sub) = bands;
    let bound = |value: f64| -> (Option<f64>, Option<f64>) {
        if !sign_preserving || value == 0.0 {
            (None, None)
        } else if value > 0.0 {
            (Some(-value), None)
        } else {
            (None, Some(-value))
        }
    };
    let mut edges = Vec::new();
    for i in 0..agents.min(n) {
        for (col, value) in [(i, diag), ((i + 1) % n, sup), ((i + n - 1) % n, sub)] {
            let (lower, upper) = bound(value);
            edges.push(Edge::bounded(i, col, lower, upper));
        }
    }
    PerturbationStructure::new(n, edges)
}

/// The 5-state companion example `a = (13, 69, 187, 260, 150)`.
pub fn example_companion() -> DenseMatrix {
    companion(&[13.0, 69.0, 187.0, 260.0, 150.0])
}

/// The 10-agent circulant formation example.
pub fn example_circulant() -> DenseMatrix {
    circulant(10, -0.1, 1.0, -1.0)
}

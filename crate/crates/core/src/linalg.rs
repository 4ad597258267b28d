//! Dense linear algebra used by the solvers: rightmost eigentriples with
//! RP-compatible eigenvectors, Frobenius inner products and singular values.
//!
//! Eigenvalues come from a real Schur decomposition. Eigenvectors of the
//! selected eigenvalues are then obtained by shifted inverse iteration, the
//! right vector from `A - λI` and the left vector from its adjoint, sharing a
//! single LU factorization.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type DenseMatrix = DMatrix<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Default relative tolerance for grouping eigenvalues that tie for rightmost.
pub const DEFAULT_TIE_TOL: f64 = 1e-8;

/// Threshold on `|y*x|` (unit vectors) below which a pair is rejected.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;

/// QR sweeps allowed per row before a Schur attempt is abandoned.
const SCHUR_ITER_PER_ROW: usize = 60;
const INVERSE_ITER_MIN: usize = 3;
const INVERSE_ITER_MAX: usize = 12;
const RESIDUAL_TOL: f64 = 1e-8;

/// An eigenvalue with unit right and left eigenvectors scaled so that
/// `y*x` is real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenTriple {
    pub lambda: Complex64,
    pub x: ComplexVector,
    pub y: ComplexVector,
    /// `y*x`, real and strictly positive.
    pub inner: f64,
}

impl EigenTriple {
    /// `Re(y x*)`, the gradient of `Re λ` with respect to a real perturbation.
    pub fn sensitivity(&self) -> DenseMatrix {
        let n = self.x.len();
        DenseMatrix::from_fn(n, n, |i, j| sensitivity_entry(&self.x, &self.y, i, j))
    }

    /// Single entry `Re(y_i conj(x_j))` of [`EigenTriple::sensitivity`].
    pub fn sensitivity_at(&self, i: usize, j: usize) -> f64 {
        sensitivity_entry(&self.x, &self.y, i, j)
    }
}

fn sensitivity_entry(x: &ComplexVector, y: &ComplexVector, i: usize, j: usize) -> f64 {
    (y[i] * x[j].conj()).re
}

/// Eigenvalues of a real square matrix, in the order produced by the Schur form.
pub fn eigenvalues(m: &DenseMatrix) -> Result<Vec<Complex64>> {
    check_square_finite(m)?;
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    // The shifted QR iteration occasionally stalls on exactly structured
    // inputs; the transpose and a diagonal shift have the same spectrum up to
    // the known shift and usually break the symmetry.
    let shift = 1e-3 * m.norm().max(1.0);
    let attempts = [
        (m.clone(), 0.0),
        (m.transpose(), 0.0),
        (m + DenseMatrix::identity(m.nrows(), m.ncols()) * shift, shift),
    ];
    let values: Vec<Complex64> = attempts
        .into_iter()
        .find_map(|(a, s)| {
            nalgebra::Schur::try_new(a, f64::EPSILON, SCHUR_ITER_PER_ROW * m.nrows().max(4))
                .map(|schur| schur.complex_eigenvalues().iter().map(|v| v - s).collect())
        })
        .ok_or_else(|| Error::EigenFailure("Schur iteration exceeded its budget".into()))?;
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::EigenFailure("non-finite eigenvalue".into()));
    }
    Ok(values)
}

/// Spectral abscissa `max Re λ`.
pub fn spectral_abscissa(m: &DenseMatrix) -> Result<f64> {
    let values = eigenvalues(m)?;
    Ok(values.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max))
}

/// All eigenvalues whose real part ties for the maximum, with their
/// RP-compatible eigenvectors.
///
/// Eigenvalues within `tie_tol * max(1, max|λ|)` of the maximal real part are
/// kept. Of each conjugate pair only the member with `Im λ ≥ 0` is returned,
/// clusters closer than the same tolerance collapse to one entry, and the list
/// is sorted by descending imaginary part.
pub fn rightmost_eigentriple(m: &DenseMatrix, tie_tol: f64) -> Result<Vec<EigenTriple>> {
    let values = eigenvalues(m)?;
    if values.is_empty() {
        return Err(Error::EigenFailure("empty matrix".into()));
    }
    let selected = rightmost_candidates(&values, tie_tol);
    let shifted = ShiftedMatrix::new(m);
    selected
        .into_iter()
        .map(|lambda| shifted.triple(lambda))
        .collect()
}

/// Eigentriple for a given eigenvalue `lambda` of `m`.
pub fn eigentriple(m: &DenseMatrix, lambda: Complex64) -> Result<EigenTriple> {
    check_square_finite(m)?;
    ShiftedMatrix::new(m).triple(lambda)
}

fn rightmost_candidates(values: &[Complex64], tie_tol: f64) -> Vec<Complex64> {
    let scale = values.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let gap = tie_tol.max(0.0) * scale;
    let max_re = values.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);

    let mut selected: Vec<Complex64> = Vec::new();
    for v in values.iter().filter(|v| v.re >= max_re - gap) {
        // Lower half-plane members are represented by their conjugates.
        let rep = if v.im < 0.0 { v.conj() } else { *v };
        if selected.iter().all(|s| (s - rep).norm() > gap) {
            selected.push(rep);
        }
    }
    selected.sort_by(|a, b| b.im.total_cmp(&a.im).then(b.re.total_cmp(&a.re)));
    selected
}

/// Rescales a right/left pair to unit norms with `y*x` real and positive.
/// The right vector becomes exactly `x / |x|`.
pub fn rp_scale(x: &ComplexVector, y: &ComplexVector) -> Result<(ComplexVector, ComplexVector)> {
    let nx = x.norm();
    let ny = y.norm();
    if nx == 0.0 || ny == 0.0 || !nx.is_finite() || !ny.is_finite() {
        return Err(Error::IllConditionedEigenpair { inner: 0.0 });
    }
    let x = x.unscale(nx);
    let y = y.unscale(ny);
    let c = y.dotc(&x);
    if c.norm() < ORTHOGONALITY_TOL {
        return Err(Error::IllConditionedEigenpair { inner: c.norm() });
    }
    let phase = c / c.norm();
    let y = y * phase;
    Ok((x, y))
}

/// Frobenius inner product `Tr(A* B) = Σ conj(a_ij) b_ij`.
pub fn frobenius_inner<T: ComplexField>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<T> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(a.dotc(b))
}

/// Singular values in descending order.
pub fn singular_values<T: ComplexField>(m: &DMatrix<T>) -> Result<Vec<f64>>
where
    T::RealField: Into<f64>,
{
    if m.iter().any(|v| !v.clone().is_finite()) {
        return Err(Error::EigenFailure("non-finite matrix entry".into()));
    }
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let svd = nalgebra::SVD::try_new(
        m.clone(),
        false,
        false,
        nalgebra::convert(f64::EPSILON),
        SCHUR_ITER_PER_ROW * m.nrows().max(m.ncols()).max(4),
    )
    .ok_or_else(|| Error::EigenFailure("SVD iteration exceeded its budget".into()))?;
    let mut values: Vec<f64> = svd.singular_values.iter().map(|s| s.clone().into()).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Spectral norm `σ₁`.
pub fn spectral_norm(m: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

fn check_square_finite(m: &DenseMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::ShapeMismatch {
            left: m.shape(),
            right: (m.ncols(), m.nrows()),
        });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure("non-finite matrix entry".into()));
    }
    Ok(())
}

/// A real matrix prepared for inverse iteration at complex shifts.
struct ShiftedMatrix<'a> {
    m: &'a DenseMatrix,
    fro: f64,
}

impl<'a> ShiftedMatrix<'a> {
    fn new(m: &'a DenseMatrix) -> Self {
        Self { m, fro: m.norm() }
    }

    fn triple(&self, lambda: Complex64) -> Result<EigenTriple> {
        let n = self.m.nrows();
        let lu = ComplexLu::factor(self.m, lambda);
        let tol = RESIDUAL_TOL * self.fro.max(f64::MIN_POSITIVE);

        let mut x = start_vector(n);
        let mut converged = false;
        for it in 0..INVERSE_ITER_MAX {
            x = lu.solve(&x);
            normalize(&mut x)?;
            if it + 1 >= INVERSE_ITER_MIN && self.right_residual(&x, lambda) <= tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::EigenFailure(format!(
                "right eigenvector for {lambda} did not reach residual {tol:.3e}"
            )));
        }

        // Starting the left iteration from x keeps y aligned with x on
        // semisimple multiple eigenvalues of normal matrices.
        let mut y = x.clone();
        converged = false;
        for it in 0..INVERSE_ITER_MAX {
            y = lu.solve_adjoint(&y);
            normalize(&mut y)?;
            if it + 1 >= INVERSE_ITER_MIN && self.left_residual(&y, lambda) <= tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::EigenFailure(format!(
                "left eigenvector for {lambda} did not reach residual {tol:.3e}"
            )));
        }

        let (x, y) = rp_scale(&x, &y)?;
        let inner = y.dotc(&x).re;
        Ok(EigenTriple { lambda, x, y, inner })
    }

    /// `|(M - λI) x|`
    fn right_residual(&self, x: &ComplexVector, lambda: Complex64) -> f64 {
        let n = x.len();
        let mut r = ComplexVector::zeros(n);
        for j in 0..n {
            let xj = x[j];
            for i in 0..n {
                r[i] += xj * self.m[(i, j)];
            }
        }
        r.axpy(-lambda, x, Complex64::new(1.0, 0.0));
        r.norm()
    }

    /// `|y*(M - λI)|`
    fn left_residual(&self, y: &ComplexVector, lambda: Complex64) -> f64 {
        let n = y.len();
        let mut acc = 0.0;
        for j in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..n {
                s += y[i].conj() * self.m[(i, j)];
            }
            s -= lambda * y[j].conj();
            acc += s.norm_sqr();
        }
        acc.sqrt()
    }
}

fn normalize(v: &mut ComplexVector) -> Result<()> {
    let nrm = v.norm();
    if !(nrm.is_finite() && nrm > 0.0) {
        return Err(Error::EigenFailure("inverse iteration broke down".into()));
    }
    v.unscale_mut(nrm);
    Ok(())
}

/// Deterministic start vector with no special alignment to structured
/// eigenvectors (constant vectors, unit vectors, Fourier modes).
fn start_vector(n: usize) -> ComplexVector {
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    ComplexVector::from_fn(n, |_, _| {
        state = state
            .wrapping_mul(6_364_136_223_846_793_005)
            .wrapping_add(1_442_695_040_888_963_407);
        let u = (state >> 11) as f64 / (1u64 << 53) as f64;
        Complex64::new(0.5 + u, 0.0)
    })
}

/// LU factorization with partial pivoting of `M - shift·I`.
/// Exactly singular pivots are replaced by a tiny multiple of the matrix
/// scale, which is what inverse iteration needs.
struct ComplexLu {
    n: usize,
    /// Column-major packed factors.
    a: Vec<Complex64>,
    /// `perm[k]` is the original row placed at position `k`.
    perm: Vec<usize>,
}

impl ComplexLu {
    fn factor(m: &DenseMatrix, shift: Complex64) -> Self {
        let n = m.nrows();
        let mut a: Vec<Complex64> = m.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for k in 0..n {
            a[k + k * n] -= shift;
        }
        let scale = m.norm().max(shift.norm()).max(1.0);
        let tiny = f64::EPSILON * scale;
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let (p, _) = (k..n)
                .map(|i| (i, a[i + k * n].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if p != k {
                for j in 0..n {
                    a.swap(k + j * n, p + j * n);
                }
                perm.swap(k, p);
            }
            if a[k + k * n].norm() < tiny {
                a[k + k * n] = Complex64::new(tiny, 0.0);
            }
            let pivot = a[k + k * n];
            for i in k + 1..n {
                a[i + k * n] /= pivot;
            }
            let (left, right) = a.split_at_mut((k + 1) * n);
            let col_k = &left[k * n..];
            for j in 0..n - k - 1 {
                let col_j = &mut right[j * n..(j + 1) * n];
                let ukj = col_j[k];
                if ukj == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for i in k + 1..n {
                    col_j[i] -= col_k[i] * ukj;
                }
            }
        }
        Self { n, a, perm }
    }

    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.a[i + j * self.n]
    }

    /// Solves `(M - shift·I) x = b`.
    fn solve(&self, b: &ComplexVector) -> ComplexVector {
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        // Unit lower triangular, column oriented.
        for k in 0..n {
            let xk = x[k];
            for i in k + 1..n {
                x[i] -= self.at(i, k) * xk;
            }
        }
        for k in (0..n).rev() {
            x[k] /= self.at(k, k);
            let xk = x[k];
            for i in 0..k {
                x[i] -= self.at(i, k) * xk;
            }
        }
        ComplexVector::from_vec(x)
    }

    /// Solves `(M - shift·I)^* y = c`.
    fn solve_adjoint(&self, c: &ComplexVector) -> ComplexVector {
        let n = self.n;
        let mut w: Vec<Complex64> = c.iter().copied().collect();
        // U^* is lower triangular: row k of U^* is column k of U conjugated.
        for k in 0..n {
            let mut s = w[k];
            for i in 0..k {
                s -= self.at(i, k).conj() * w[i];
            }
            w[k] = s / self.at(k, k).conj();
        }
        // L^* is unit upper triangular.
        for k in (0..n).rev() {
            let mut s = w[k];
            for i in k + 1..n {
                s -= self.at(i, k).conj() * w[i];
            }
            w[k] = s;
        }
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for (k, &p) in self.perm.iter().enumerate() {
            y[p] = w[k];
        }
        ComplexVector::from_vec(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn companion() -> DenseMatrix {
        crate::generators::companion(&[13.0, 69.0, 187.0, 260.0, 150.0])
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
        DenseMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))
    }

    fn assert_triple_valid(m: &DenseMatrix, t: &EigenTriple) {
        let mc = m.map(|v| c(v, 0.0));
        let lam = DMatrix::<Complex64>::identity(m.nrows(), m.nrows()) * t.lambda;
        let shifted = &mc - lam;
        let tol = 1e-8 * m.norm().max(1e-300);
        assert_relative_eq!(t.x.norm(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(t.y.norm(), 1.0, epsilon = 1e-12);
        assert!(t.inner > 0.0);
        let yx = t.y.dotc(&t.x);
        assert!(yx.im.abs() < 1e-12 && (yx.re - t.inner).abs() < 1e-12);
        assert!((&shifted * &t.x).norm() <= tol);
        assert!((t.y.adjoint() * &shifted).norm() <= tol);
    }

    #[test]
    fn companion_rightmost_is_upper_member_of_pair() {
        let a = companion();
        let triples = rightmost_eigentriple(&a, DEFAULT_TIE_TOL).unwrap();
        assert_eq!(triples.len(), 1);
        assert_relative_eq!(triples[0].lambda.re, -2.0, epsilon = 1e-9);
        assert_relative_eq!(triples[0].lambda.im, 1.0, epsilon = 1e-9);
        assert_triple_valid(&a, &triples[0]);
    }

    #[test]
    fn diagonal_rightmost() {
        let a = DenseMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -2.0]));
        let triples = rightmost_eigentriple(&a, DEFAULT_TIE_TOL).unwrap();
        assert_eq!(triples.len(), 1);
        let t = &triples[0];
        assert_relative_eq!(t.lambda.re, -1.0, epsilon = 1e-14);
        assert_relative_eq!(t.x[0].re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(t.y[0].re, 1.0, epsilon = 1e-12);
        assert!(t.x[1].norm() < 1e-12);
        assert_relative_eq!(t.inner, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn circulant_candidates_share_real_part() {
        let a = crate::generators::circulant(10, -0.1, 1.0, -1.0);
        let triples = rightmost_eigentriple(&a, DEFAULT_TIE_TOL).unwrap();
        // -0.1 + 2i sin(2πk/10) for k = 0..=2 (upper half, duplicates collapsed).
        assert_eq!(triples.len(), 3);
        for t in &triples {
            assert_relative_eq!(t.lambda.re, -0.1, epsilon = 1e-9);
            assert_triple_valid(&a, t);
        }
        let expected = [
            2.0 * (2.0 * std::f64::consts::PI * 2.0 / 10.0).sin(),
            2.0 * (2.0 * std::f64::consts::PI / 10.0).sin(),
            0.0,
        ];
        for (t, e) in triples.iter().zip(expected) {
            assert_relative_eq!(t.lambda.im, e, epsilon = 1e-9);
        }
        for w in triples.windows(2) {
            assert!(w[0].lambda.im >= w[1].lambda.im);
        }
    }

    #[test]
    fn rp_scale_examples() {
        let x = ComplexVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let y = ComplexVector::from_vec(vec![c(0.0, 1.0), c(0.0, 0.0)]);
        let (xs, ys) = rp_scale(&x, &y).unwrap();
        assert_eq!(xs, x);
        assert_relative_eq!(ys[0].re, 1.0, epsilon = 1e-15);
        assert!(ys[0].im.abs() < 1e-15);

        let (xs, ys) = rp_scale(&x, &x).unwrap();
        assert_eq!(xs, x);
        assert_eq!(ys, x);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x = ComplexVector::from_vec(vec![c(s, 0.0), c(s, 0.0)]);
        let y = ComplexVector::from_vec(vec![c(s, 0.0), c(-s, 0.0)]);
        assert!(matches!(rp_scale(&x, &y), Err(Error::IllConditionedEigenpair { .. })));
    }

    #[test]
    fn frobenius_inner_examples() {
        let i2 = DenseMatrix::identity(2, 2);
        let b = DenseMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(frobenius_inner(&i2, &b).unwrap(), 5.0);
        assert_relative_eq!(frobenius_inner(&b, &b).unwrap(), b.norm_squared());
        let wrong = DenseMatrix::zeros(2, 3);
        assert!(matches!(frobenius_inner(&b, &wrong), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn frobenius_identity_with_real_part_of_outer_product() {
        // Re(x* M y) = <M, Re(x y*)>
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = 5;
            let m = random_matrix(&mut rng, n);
            let x = ComplexVector::from_fn(n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let y = ComplexVector::from_fn(n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let mc = m.map(|v| c(v, 0.0));
            let lhs = (x.adjoint() * &mc * &y)[(0, 0)].re;
            let outer = (&x * y.adjoint()).map(|v| v.re);
            let rhs = frobenius_inner(&m, &outer).unwrap();
            assert_relative_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn frobenius_conjugate_symmetry_and_linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rc = |rng: &mut ChaCha8Rng| {
            ComplexMatrix::from_fn(3, 4, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        };
        for _ in 0..20 {
            let a = rc(&mut rng);
            let b = rc(&mut rng);
            let d = rc(&mut rng);
            let s = c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let ab = frobenius_inner(&a, &b).unwrap();
            let ba = frobenius_inner(&b, &a).unwrap();
            assert!((ab - ba.conj()).norm() < 1e-12);
            let lin = frobenius_inner(&a, &(&b * s + &d)).unwrap();
            let expect = ab * s + frobenius_inner(&a, &d).unwrap();
            assert!((lin - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_value_examples() {
        let d = DenseMatrix::from_diagonal(&DVector::from_vec(vec![0.0, -1.0]));
        assert_eq!(singular_values(&d).unwrap(), vec![1.0, 0.0]);
        let i3 = DenseMatrix::identity(3, 3);
        for s in singular_values(&i3).unwrap() {
            assert_relative_eq!(s, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn singular_values_match_gram_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_matrix(&mut rng, 4);
        let gram = m.transpose() * &m;
        let mut oracle: Vec<f64> = nalgebra::SymmetricEigen::new(gram)
            .eigenvalues
            .iter()
            .map(|v| v.max(0.0).sqrt())
            .collect();
        oracle.sort_by(|a, b| b.total_cmp(a));
        let got = singular_values(&m).unwrap();
        for (g, o) in got.iter().zip(&oracle) {
            assert!((g - o).abs() < 1e-10, "{g} vs {o}");
        }
    }

    #[test]
    fn spectral_norm_dominates_random_rayleigh_ratios() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let m = random_matrix(&mut rng, 6);
        let s1 = spectral_norm(&m).unwrap();
        let mut best: f64 = 0.0;
        for _ in 0..1000 {
            let v = DVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
            best = best.max((&m * &v).norm() / v.norm());
        }
        assert!(best <= s1 * (1.0 + 1e-8));
        // The random search approaches σ₁ from below.
        assert!(best > 0.5 * s1);
    }

    #[test]
    fn conjugate_member_gives_same_sensitivity() {
        let a = companion();
        let t = &rightmost_eigentriple(&a, DEFAULT_TIE_TOL).unwrap()[0];
        let tc = eigentriple(&a, t.lambda.conj()).unwrap();
        let diff = (t.sensitivity() - tc.sensitivity()).norm();
        assert!(diff < 1e-12, "diff {diff}");
    }

    #[test]
    fn random_matrix_triples_satisfy_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for n in [1, 2, 3, 7, 20] {
            let m = random_matrix(&mut rng, n);
            for t in rightmost_eigentriple(&m, DEFAULT_TIE_TOL).unwrap() {
                assert_triple_valid(&m, &t);
            }
        }
    }

    #[test]
    fn non_square_is_rejected() {
        let m = DenseMatrix::zeros(2, 3);
        assert!(matches!(eigenvalues(&m), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn jordan_block_is_ill_conditioned() {
        let m = DenseMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let err = rightmost_eigentriple(&m, DEFAULT_TIE_TOL).unwrap_err();
        assert!(matches!(err, Error::IllConditionedEigenpair { .. }), "{err:?}");
    }
}

//! Monte-Carlo clouds of the structured pseudospectrum.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, DenseMatrix};
use crate::perturbation::PerturbationStructure;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudPoint {
    pub value: Complex64,
    pub sample_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCloud {
    pub points: Vec<CloudPoint>,
    pub epsilon: f64,
    pub sample_count: usize,
    pub seed: u64,
    /// Samples whose eigenvalue computation failed, with the message.
    pub failures: Vec<(usize, String)>,
}

/// All eigenvalues of `A + Δ_s` for `n_samples` feasible perturbations drawn
/// with seeds `seed, seed + 1, …`.
pub fn sample_pseudospectrum(
    a: &DenseMatrix,
    structure: &PerturbationStructure,
    epsilon: f64,
    n_samples: usize,
    seed: u64,
) -> Result<SpectrumCloud> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    if a.nrows() != a.ncols() || a.nrows() != structure.n() {
        return Err(Error::ShapeMismatch {
            left: a.shape(),
            right: (structure.n(), structure.n()),
        });
    }
    let per_sample: Vec<Result<Vec<Complex64>>> = (0..n_samples)
        .into_par_iter()
        .map(|s| {
            let delta = structure.sample(epsilon, seed.wrapping_add(s as u64));
            let mut m = a.clone();
            delta.add_to(structure, &mut m);
            eigenvalues(&m)
        })
        .collect();

    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (sample_index, eigs) in per_sample.into_iter().enumerate() {
        match eigs {
            Ok(eigs) => points.extend(eigs.into_iter().map(|value| CloudPoint { value, sample_index })),
            Err(e) => failures.push((sample_index, e.to_string())),
        }
    }
    Ok(SpectrumCloud {
        points,
        epsilon,
        sample_count: n_samples,
        seed,
        failures,
    })
}

/// Largest real part in the cloud, a lower bound on the structured abscissa.
pub fn sampled_abscissa(cloud: &SpectrumCloud) -> Result<f64> {
    cloud
        .points
        .iter()
        .map(|p| p.value.re)
        .reduce(f64::max)
        .ok_or(Error::EmptyCloud)
}

/// CSV with header `re,im,sample_index`, 17 significant digits, LF endings.
pub fn write_csv<W: Write>(cloud: &SpectrumCloud, mut out: W) -> std::io::Result<()> {
    writeln!(out, "re,im,sample_index")?;
    for p in &cloud.points {
        writeln!(out, "{:.16e},{:.16e},{}", p.value.re, p.value.im, p.sample_index)?;
    }
    Ok(())
}

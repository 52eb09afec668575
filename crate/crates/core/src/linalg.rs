//! Small dense-matrix helpers shared across modules.
//!
//! Everything here operates on `DMatrix<Complex64>` and treats matrices as
//! Hermitian operators on the spin register.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Largest absolute deviation from Hermiticity, max_ij |m_ij - conj(m_ji)|.
pub(crate) fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let diff = (m[(i, j)] - m[(j, i)].conj()).norm();
            if diff > worst {
                worst = diff;
            }
        }
    }
    worst
}

/// Symmetrize into an exactly Hermitian matrix, (M + M†)/2.
pub(crate) fn hermitize(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Flush entries negligibly small relative to the largest one to exact zero.
/// Denormal-scale residue left behind by repeated arithmetic makes the
/// eigensolver produce NaN on otherwise benign matrices.
fn flush_tiny(m: &DMatrix<Complex64>, relative: f64) -> DMatrix<Complex64> {
    let scale = m.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    if scale == 0.0 {
        return m.clone();
    }
    let floor = scale * relative;
    m.map(|z| if z.norm() < floor { Complex64::ZERO } else { z })
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues plus the
/// unitary of eigenvectors (columns).
pub(crate) fn hermitian_eigen(m: &DMatrix<Complex64>) -> (DVector<f64>, DMatrix<Complex64>) {
    let cleaned = flush_tiny(&hermitize(m), 1e-30);
    let eig = cleaned.clone().symmetric_eigen();
    let is_bad = eig.eigenvalues.iter().any(|v| v.is_nan())
        || eig.eigenvectors.iter().any(|z| z.re.is_nan() || z.im.is_nan());
    if !is_bad {
        return (eig.eigenvalues, eig.eigenvectors);
    }
    // Retry with an aggressive flush well below every tolerance in this crate.
    let eig = flush_tiny(&cleaned, 1e-16).symmetric_eigen();
    (eig.eigenvalues, eig.eigenvectors)
}

/// Real eigenvalues of a Hermitian matrix, unsorted.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> DVector<f64> {
    let cleaned = flush_tiny(&hermitize(m), 1e-30);
    let vals = cleaned.clone().symmetric_eigenvalues();
    if vals.iter().all(|v| !v.is_nan()) {
        return vals;
    }
    flush_tiny(&cleaned, 1e-16).symmetric_eigenvalues()
}

pub(crate) fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    hermitian_eigenvalues(m).min()
}

/// Project a Hermitian matrix onto the operator interval {lo·1 ≤ X ≤ hi·1}
/// by clipping its spectrum.
pub(crate) fn clip_spectrum(m: &DMatrix<Complex64>, lo: f64, hi: f64) -> DMatrix<Complex64> {
    let (mut vals, vecs) = hermitian_eigen(m);
    for v in vals.iter_mut() {
        *v = v.clamp(lo, hi);
    }
    let scaled = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        vecs[(i, j)] * Complex64::new(vals[j], 0.0)
    });
    &scaled * vecs.adjoint()
}

/// Real part of the trace (the imaginary part vanishes for Hermitian input).
pub(crate) fn trace_re(m: &DMatrix<Complex64>) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

/// ⟨ψ|M|ψ⟩ for Hermitian M; the result is real up to rounding.
pub(crate) fn expectation(m: &DMatrix<Complex64>, psi: &DVector<Complex64>) -> f64 {
    let mpsi = m * psi;
    psi.dotc(&mpsi).re
}

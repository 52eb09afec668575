//! Closed forms for the nodes-center measurement: the F·p_succ bound, the
//! optimal success element with its probability and fidelity, the
//! interpolated element family, and a generic evaluator used for
//! cross-checks.
//!
//! Conventions: spin basis index 0 is |0…0⟩ and index 2^N − 1 is |1…1⟩; the
//! GHZ reference is (|0…0⟩ + |1…1⟩)/√2 with +1 relative phase.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hilbert::SpinDensityMatrix;
use crate::linalg;

const HERMITICITY_TOL: f64 = 1e-12;
const SPECTRUM_TOL: f64 = 1e-10;

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&epsilon) || !epsilon.is_finite() {
        return Err(Error::Domain {
            name: "epsilon",
            value: epsilon,
            expected: "[0, 1]",
        });
    }
    Ok(())
}

fn check_nodes(n_nodes: usize) -> Result<()> {
    if n_nodes == 0 || n_nodes > 16 {
        return Err(Error::NodeCount(n_nodes, "1..=16"));
    }
    Ok(())
}

/// Success element of a binary measurement on the N ancilla qubits:
/// Hermitian with spectrum in [0, 1].
#[derive(Debug, Clone)]
pub struct PovmElement {
    entries: DMatrix<Complex64>,
}

impl PovmElement {
    /// Validate Hermiticity and spectrum and wrap the matrix.
    pub fn try_new(entries: DMatrix<Complex64>) -> Result<Self> {
        let dim = entries.nrows();
        if dim != entries.ncols() || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                found: dim,
                n_nodes: 0,
                expected: 0,
            });
        }
        let defect = linalg::hermiticity_defect(&entries);
        if defect > HERMITICITY_TOL {
            return Err(Error::NotHermitian(defect));
        }
        for v in linalg::hermitian_eigenvalues(&entries).iter() {
            if *v < -SPECTRUM_TOL || *v > 1.0 + SPECTRUM_TOL {
                return Err(Error::SpectrumOutOfRange(*v));
            }
        }
        Ok(PovmElement { entries })
    }

    pub fn identity(n_nodes: usize) -> Self {
        let dim = 1 << n_nodes;
        PovmElement {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_nodes(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut vals: Vec<f64> = linalg::hermitian_eigenvalues(&self.entries)
            .iter()
            .copied()
            .collect();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        vals
    }

    /// The four entries connecting |0…0⟩ and |1…1⟩.
    pub fn corners(&self) -> CornerEntries {
        let last = self.dim() - 1;
        CornerEntries {
            e00: self.entries[(0, 0)],
            e0l: self.entries[(0, last)],
            el0: self.entries[(last, 0)],
            ell: self.entries[(last, last)],
        }
    }

    /// Squared Frobenius mass outside the four corner entries.
    pub fn off_corner_mass(&self) -> f64 {
        let last = self.dim() - 1;
        let mut mass = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let corner = (i == 0 || i == last) && (j == 0 || j == last);
                if !corner {
                    mass += self.entries[(i, j)].norm_sqr();
                }
            }
        }
        mass
    }

    /// Random valid element: a Haar-ish unitary conjugating a uniform [0, 1]
    /// spectrum.
    pub fn random_with<R: Rng + ?Sized>(n_nodes: usize, rng: &mut R) -> Self {
        let dim = 1 << n_nodes;
        let gaussian = DMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let qr = gaussian.qr();
        let q = qr.q();
        let spectrum: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..=1.0)).collect();
        let scaled = DMatrix::from_fn(dim, dim, |i, j| q[(i, j)] * Complex64::new(spectrum[j], 0.0));
        let entries = linalg::hermitize(&(&scaled * q.adjoint()));
        PovmElement { entries }
    }
}

/// The four matrix entries on the |0…0⟩ / |1…1⟩ block.
#[derive(Debug, Clone, Copy)]
pub struct CornerEntries {
    pub e00: Complex64,
    pub e0l: Complex64,
    pub el0: Complex64,
    pub ell: Complex64,
}

/// Closed forms evaluated together for one (ε, N) point.
#[derive(Debug, Clone, Copy)]
pub struct BoundReport {
    pub epsilon: f64,
    pub n_nodes: usize,
    pub fp_bound: f64,
    pub p_opt: f64,
    pub f_opt: f64,
}

/// Upper bound on F·p_succ over all binary measurements,
/// ½((1−ε)^N + ε^N).
pub fn fp_bound(epsilon: f64, n_nodes: usize) -> Result<f64> {
    check_epsilon(epsilon)?;
    check_nodes(n_nodes)?;
    let n = n_nodes as i32;
    Ok(0.5 * ((1.0 - epsilon).powi(n) + epsilon.powi(n)))
}

/// Success probability of the optimal element,
/// ((1−ε)^{2N} + ε^{2N}) / ((1−ε)^N + ε^N).
pub fn p_succ_opt(epsilon: f64, n_nodes: usize) -> Result<f64> {
    check_epsilon(epsilon)?;
    check_nodes(n_nodes)?;
    let n = n_nodes as i32;
    let a = (1.0 - epsilon).powi(n);
    let b = epsilon.powi(n);
    Ok((a * a + b * b) / (a + b))
}

/// Fidelity reached by the optimal element,
/// ½((1−ε)^N + ε^N)² / ((1−ε)^{2N} + ε^{2N}).
pub fn f_opt(epsilon: f64, n_nodes: usize) -> Result<f64> {
    check_epsilon(epsilon)?;
    check_nodes(n_nodes)?;
    let n = n_nodes as i32;
    let a = (1.0 - epsilon).powi(n);
    let b = epsilon.powi(n);
    Ok(0.5 * (a + b) * (a + b) / (a * a + b * b))
}

pub fn bound_report(epsilon: f64, n_nodes: usize) -> Result<BoundReport> {
    Ok(BoundReport {
        epsilon,
        n_nodes,
        fp_bound: fp_bound(epsilon, n_nodes)?,
        p_opt: p_succ_opt(epsilon, n_nodes)?,
        f_opt: f_opt(epsilon, n_nodes)?,
    })
}

/// Optimal success element together with a degeneracy flag for ε ∈ {0, 1},
/// where the corner structure collapses to a basis-state projector.
#[derive(Debug, Clone)]
pub struct OptimalPovm {
    pub element: PovmElement,
    pub degenerate: bool,
}

/// The rank-1 corner element that attains the F·p_succ bound with minimal
/// success probability: entries (1−ε)^N/D, ε^N/D and √(ε(1−ε))^N/D on the
/// |0…0⟩ / |1…1⟩ block, D = (1−ε)^N + ε^N.
pub fn optimal_povm(epsilon: f64, n_nodes: usize) -> Result<OptimalPovm> {
    check_epsilon(epsilon)?;
    check_nodes(n_nodes)?;
    let n = n_nodes as i32;
    let a = (1.0 - epsilon).powi(n);
    let b = epsilon.powi(n);
    let d = a + b;
    let corner = (epsilon * (1.0 - epsilon)).sqrt().powi(n);

    let dim = 1 << n_nodes;
    let last = dim - 1;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    m[(0, 0)] = Complex64::new(a / d, 0.0);
    m[(last, last)] = Complex64::new(b / d, 0.0);
    m[(0, last)] = Complex64::new(corner / d, 0.0);
    m[(last, 0)] = Complex64::new(corner / d, 0.0);

    let degenerate = epsilon == 0.0 || epsilon == 1.0;
    Ok(OptimalPovm {
        element: PovmElement { entries: m },
        degenerate,
    })
}

/// Convex combination w·Π_opt + (1−w)·1 spanning the measurements that keep
/// F·p_succ at the bound while p_succ runs from the optimum up to 1.
pub fn interpolated_povm(w: f64, epsilon: f64, n_nodes: usize) -> Result<PovmElement> {
    if !(0.0..=1.0).contains(&w) || !w.is_finite() {
        return Err(Error::Domain {
            name: "w",
            value: w,
            expected: "[0, 1]",
        });
    }
    let opt = optimal_povm(epsilon, n_nodes)?;
    let dim = opt.element.dim();
    let identity = DMatrix::<Complex64>::identity(dim, dim);
    let entries = opt.element.entries() * Complex64::new(w, 0.0)
        + identity * Complex64::new(1.0 - w, 0.0);
    Ok(PovmElement { entries })
}

/// Diagonal of the reduced ancilla state ((1−ε)|0⟩⟨0| + ε|1⟩⟨1|)^{⊗N}:
/// weight ε^{popcount} (1−ε)^{N−popcount} per basis index.
pub(crate) fn spin_weights(epsilon: f64, n_nodes: usize) -> Vec<f64> {
    let dim = 1usize << n_nodes;
    (0..dim)
        .map(|k| {
            let ones = k.count_ones() as i32;
            epsilon.powi(ones) * (1.0 - epsilon).powi(n_nodes as i32 - ones)
        })
        .collect()
}

/// The GHZ reference state (|0…0⟩ + |1…1⟩)/√2.
pub fn ghz_state(n_nodes: usize) -> DVector<Complex64> {
    let dim = 1 << n_nodes;
    let mut v = DVector::<Complex64>::zeros(dim);
    let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v[0] = amp;
    v[dim - 1] = amp;
    v
}

/// Result of measuring the success element on the shared state.
#[derive(Debug, Clone)]
pub struct PovmOutcome {
    pub p_succ: f64,
    pub conditional: SpinDensityMatrix,
    pub fidelity: f64,
}

/// Evaluate an arbitrary success element on the N-pair input state:
/// success probability Tr_B(Π ρ_B), the normalized conditional node state,
/// and its overlap with the GHZ reference.
pub fn apply_povm(epsilon: f64, n_nodes: usize, element: &PovmElement) -> Result<PovmOutcome> {
    check_epsilon(epsilon)?;
    check_nodes(n_nodes)?;
    let dim = 1usize << n_nodes;
    if element.dim() != dim {
        return Err(Error::DimensionMismatch {
            found: element.dim(),
            n_nodes,
            expected: dim,
        });
    }

    let weights = spin_weights(epsilon, n_nodes);
    let pi = element.entries();

    let p_succ: f64 = (0..dim).map(|k| weights[k] * pi[(k, k)].re).sum();

    // Conditional node state: ρ_A[k][l] = √(w_k w_l) · Π[l][k] / p.
    let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let unnormalized = DMatrix::from_fn(dim, dim, |k, l| {
        pi[(l, k)] * Complex64::new(sqrt_w[k] * sqrt_w[l], 0.0)
    });
    let conditional = SpinDensityMatrix::new_unnormalized(unnormalized);

    match conditional.normalize(1e-15) {
        Some((normalized, _)) => {
            let fidelity = normalized.fidelity(&ghz_state(n_nodes));
            Ok(PovmOutcome {
                p_succ,
                conditional: normalized,
                fidelity,
            })
        }
        None => Ok(PovmOutcome {
            p_succ,
            conditional,
            fidelity: 0.0,
        }),
    }
}

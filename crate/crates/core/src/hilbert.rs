//! Sparse representation of hybrid spin ⊗ photonic states and the mode
//! rewriting performed by the beam-splitter ring.
//!
//! A state is a map from `(spin basis index, mode occupation)` to a complex
//! amplitude. Photonic modes carry an explicit labeling tag: source modes
//! before interference (two per node, `B_{j,0}` and `B_{j,1}`), station modes
//! after (`C_j` and `D_j` per station). Each node emits exactly one photon and
//! each station collects from exactly two neighbouring sources, so occupations
//! never exceed two per mode — the truncation is exact.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;

/// Amplitudes below this threshold are dropped after each transform.
const PRUNE_THRESHOLD: f64 = 1e-15;

/// Largest node count the exact simulator accepts.
pub const MAX_NODES: usize = 10;

/// Basis index over the N spin qubits.
///
/// The first node occupies the most significant bit, so index 0 is |0…0⟩ and
/// index 2^N − 1 is |1…1⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpinBasisIndex(pub usize);

impl SpinBasisIndex {
    /// Spin of node `node` (0-based) within an N-node register.
    pub fn bit(self, node: usize, n_nodes: usize) -> u8 {
        ((self.0 >> (n_nodes - 1 - node)) & 1) as u8
    }

    pub fn all_zeros() -> Self {
        SpinBasisIndex(0)
    }

    pub fn all_ones(n_nodes: usize) -> Self {
        SpinBasisIndex((1 << n_nodes) - 1)
    }
}

/// Photon counts per mode, shared labeling given by the owning state.
///
/// Source labeling: mode 2j is B_{j,0}, mode 2j+1 is B_{j,1}.
/// Station labeling: mode 2j is C_j, mode 2j+1 is D_j.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeOccupation(Vec<u8>);

impl ModeOccupation {
    pub fn vacuum(n_modes: usize) -> Self {
        ModeOccupation(vec![0; n_modes])
    }

    pub fn from_counts(counts: Vec<u8>) -> Self {
        ModeOccupation(counts)
    }

    pub fn n_modes(&self) -> usize {
        self.0.len()
    }

    pub fn count(&self, mode: usize) -> u8 {
        self.0[mode]
    }

    pub fn total_photons(&self) -> u32 {
        self.0.iter().map(|&c| u32::from(c)).sum()
    }

    pub fn counts(&self) -> &[u8] {
        &self.0
    }

    fn add_photon(&mut self, mode: usize) {
        self.0[mode] += 1;
    }
}

/// Which physical modes the occupation vectors of a state refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeLabeling {
    /// Source modes B_{j,k}, before the beam splitters.
    Input,
    /// Station modes C_j / D_j, after the beam splitters.
    Output,
}

impl ModeLabeling {
    fn name(self) -> &'static str {
        match self {
            ModeLabeling::Input => "input",
            ModeLabeling::Output => "output",
        }
    }
}

/// Weight per (mode, occupation) pair, used when tracing out the photons.
///
/// All weights must lie in [0, 1]; a lookup for an uncovered pair is an error
/// so that silent mismatches between detector model and state cannot occur.
#[derive(Debug, Clone, Default)]
pub struct WeightMap {
    map: BTreeMap<(usize, u8), f64>,
}

impl WeightMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, mode: usize, occupation: u8, weight: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&weight) || !weight.is_finite() {
            return Err(Error::Domain {
                name: "weight",
                value: weight,
                expected: "[0, 1]",
            });
        }
        self.map.insert((mode, occupation), weight);
        Ok(())
    }

    /// Same weight for every mode and occupation up to `max_occupation`.
    pub fn uniform(n_modes: usize, max_occupation: u8, weight: f64) -> Result<Self> {
        let mut w = Self::new();
        for mode in 0..n_modes {
            for n in 0..=max_occupation {
                w.insert(mode, n, weight)?;
            }
        }
        Ok(w)
    }

    pub fn get(&self, mode: usize, occupation: u8) -> Option<f64> {
        self.map.get(&(mode, occupation)).copied()
    }

    /// Product of per-mode weights for a full occupation vector.
    fn product_for(&self, occ: &ModeOccupation) -> Result<f64> {
        let mut product = 1.0;
        for (mode, &n) in occ.counts().iter().enumerate() {
            let w = self.get(mode, n).ok_or(Error::MissingWeight {
                mode,
                occupation: n,
            })?;
            product *= w;
            if product == 0.0 {
                return Ok(0.0);
            }
        }
        Ok(product)
    }
}

/// Sparse pure state over spin ⊗ photonic degrees of freedom.
#[derive(Debug, Clone)]
pub struct HybridState {
    n_nodes: usize,
    labeling: ModeLabeling,
    terms: BTreeMap<(SpinBasisIndex, ModeOccupation), Complex64>,
}

impl HybridState {
    /// Assemble a state from explicit terms. Amplitudes below the pruning
    /// threshold are dropped.
    pub fn from_terms(
        n_nodes: usize,
        labeling: ModeLabeling,
        terms: impl IntoIterator<Item = ((SpinBasisIndex, ModeOccupation), Complex64)>,
    ) -> Self {
        let mut state = HybridState {
            n_nodes,
            labeling,
            terms: BTreeMap::new(),
        };
        for (key, amp) in terms {
            state.insert_add(key, amp);
        }
        state.prune();
        state
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_modes(&self) -> usize {
        2 * self.n_nodes
    }

    pub fn labeling(&self) -> ModeLabeling {
        self.labeling
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(SpinBasisIndex, ModeOccupation), &Complex64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, spin: SpinBasisIndex, occ: &ModeOccupation) -> Complex64 {
        self.terms
            .get(&(spin, occ.clone()))
            .copied()
            .unwrap_or(Complex64::ZERO)
    }

    pub fn norm(&self) -> f64 {
        self.terms
            .values()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    fn insert_add(&mut self, key: (SpinBasisIndex, ModeOccupation), amp: Complex64) {
        let entry = self.terms.entry(key).or_insert(Complex64::ZERO);
        *entry += amp;
    }

    fn prune(&mut self) {
        self.terms.retain(|_, amp| amp.norm() > PRUNE_THRESHOLD);
    }
}

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
    if n_nodes == 0 || n_nodes > MAX_NODES {
        return Err(Error::NodeCount(n_nodes, "1..=10"));
    }
    Ok(())
}

/// Build the joint spin-photon state emitted by N nodes,
/// ⊗_j (√(1−ε)|0⟩ b†_{j,0} + √ε|1⟩ b†_{j,1}) |vac⟩.
///
/// The |0⟩ spin branch carries the photon in mode B_{j,0}, the |1⟩ branch in
/// B_{j,1}; every node emits exactly one photon.
pub fn build_initial_state(n_nodes: usize, epsilon: f64) -> Result<HybridState> {
    check_nodes(n_nodes)?;
    check_epsilon(epsilon)?;

    let amp0 = (1.0 - epsilon).sqrt();
    let amp1 = epsilon.sqrt();
    let mut terms = Vec::with_capacity(1 << n_nodes);
    for spin in 0..(1usize << n_nodes) {
        let spin = SpinBasisIndex(spin);
        let mut occ = ModeOccupation::vacuum(2 * n_nodes);
        let mut amp = 1.0;
        for node in 0..n_nodes {
            let bit = spin.bit(node, n_nodes);
            occ.add_photon(2 * node + usize::from(bit));
            amp *= if bit == 1 { amp1 } else { amp0 };
        }
        terms.push(((spin, occ), Complex64::new(amp, 0.0)));
    }
    Ok(HybridState::from_terms(n_nodes, ModeLabeling::Input, terms))
}

/// Rewrite every source mode through its beam splitter:
/// b†_{j,0} → (i c†_j + d†_j)/√2 and b†_{j,1} → (c†_{j−1} + i d†_{j−1})/√2,
/// station indices cyclic so the ring of pairwise measurements closes.
///
/// Norm and total photon number are preserved; when two photons land in one
/// station mode the bosonic √(n+1) factor is applied.
pub fn apply_beam_splitter_ring(state: &HybridState) -> Result<HybridState> {
    if state.labeling() != ModeLabeling::Input {
        return Err(Error::WrongLabeling {
            found: state.labeling().name(),
            expected: ModeLabeling::Input.name(),
        });
    }
    let n = state.n_nodes();
    let half = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let i_half = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);

    let mut out = HybridState {
        n_nodes: n,
        labeling: ModeLabeling::Output,
        terms: BTreeMap::new(),
    };

    for ((spin, occ), amp) in state.terms() {
        // Collect the occupied source modes; each contributes one photon.
        let mut photons = Vec::new();
        for (mode, &count) in occ.counts().iter().enumerate() {
            if count > 1 {
                return Err(Error::InputModeOverfilled { mode, count });
            }
            if count == 1 {
                photons.push(mode);
            }
        }

        // Each photon splits into a C branch and a D branch at its station.
        // branches[p] = [(station mode, coefficient); 2]
        let branches: Vec<[(usize, Complex64); 2]> = photons
            .iter()
            .map(|&mode| {
                let node = mode / 2;
                if mode % 2 == 0 {
                    // B_{j,0} feeds station j.
                    [(2 * node, i_half), (2 * node + 1, half)]
                } else {
                    // B_{j,1} feeds station j−1 (cyclic).
                    let station = (node + n - 1) % n;
                    [(2 * station, half), (2 * station + 1, i_half)]
                }
            })
            .collect();

        // Expand the product over all branch choices.
        let mut stack = vec![(0usize, ModeOccupation::vacuum(2 * n), *amp)];
        while let Some((depth, partial, partial_amp)) = stack.pop() {
            if depth == branches.len() {
                out.insert_add((*spin, partial), partial_amp);
                continue;
            }
            for (mode, coeff) in branches[depth] {
                let mut next = partial.clone();
                let boson = ((f64::from(next.count(mode))) + 1.0).sqrt();
                next.add_photon(mode);
                stack.push((depth + 1, next, partial_amp * coeff * boson));
            }
        }
    }

    out.prune();
    Ok(out)
}

/// Trace out the photons against a product of diagonal mode operators.
///
/// Returns the unnormalized conditional spin matrix
/// Σ_occ (Π_m weight(m, occ_m)) · v_occ v_occ†, where v_occ collects the spin
/// amplitudes sharing the occupation `occ`. Its trace is the event
/// probability.
pub fn partial_trace_photons(state: &HybridState, weights: &WeightMap) -> Result<SpinDensityMatrix> {
    let dim = 1usize << state.n_nodes();
    let mut rho = DMatrix::<Complex64>::zeros(dim, dim);

    // Group amplitudes by occupation vector; the mode operators are diagonal,
    // so distinct occupations never interfere.
    let mut groups: BTreeMap<&ModeOccupation, Vec<(usize, Complex64)>> = BTreeMap::new();
    for ((spin, occ), amp) in state.terms() {
        groups.entry(occ).or_default().push((spin.0, *amp));
    }

    for (occ, members) in groups {
        let weight = weights.product_for(occ)?;
        if weight == 0.0 {
            continue;
        }
        for &(row, amp_row) in &members {
            for &(col, amp_col) in &members {
                rho[(row, col)] += amp_row * amp_col.conj() * weight;
            }
        }
    }

    Ok(SpinDensityMatrix::new_unnormalized(rho))
}

/// Hermitian matrix over the 2^N spin basis states.
///
/// Unnormalized instances arise as conditional post-measurement states whose
/// trace is the event probability.
#[derive(Debug, Clone)]
pub struct SpinDensityMatrix {
    entries: DMatrix<Complex64>,
    normalized: bool,
}

impl SpinDensityMatrix {
    pub(crate) fn new_unnormalized(entries: DMatrix<Complex64>) -> Self {
        SpinDensityMatrix {
            entries,
            normalized: false,
        }
    }

    pub(crate) fn new_normalized(entries: DMatrix<Complex64>) -> Self {
        SpinDensityMatrix {
            entries,
            normalized: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn trace(&self) -> f64 {
        linalg::trace_re(&self.entries)
    }

    /// Divide by the trace; returns the normalized matrix and the trace.
    /// Traces at or below `threshold` yield `None`.
    pub fn normalize(&self, threshold: f64) -> Option<(SpinDensityMatrix, f64)> {
        let tr = self.trace();
        if tr <= threshold {
            return None;
        }
        let scaled = &self.entries / Complex64::new(tr, 0.0);
        Some((SpinDensityMatrix::new_normalized(scaled), tr))
    }

    /// Overlap ⟨ψ|ρ|ψ⟩ with a pure reference state.
    pub fn fidelity(&self, reference: &DVector<Complex64>) -> f64 {
        linalg::expectation(&self.entries, reference)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.entries)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn initial_state_single_pair_is_bell() {
        let state = build_initial_state(1, 0.5).unwrap();
        assert_eq!(state.n_terms(), 2);
        let occ0 = ModeOccupation::from_counts(vec![1, 0]);
        let occ1 = ModeOccupation::from_counts(vec![0, 1]);
        assert_abs_diff_eq!(
            state.amplitude(SpinBasisIndex(0), &occ0).re,
            SQRT_HALF,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            state.amplitude(SpinBasisIndex(1), &occ1).re,
            SQRT_HALF,
            epsilon = 1e-15
        );
    }

    #[test]
    fn initial_state_three_nodes_has_uniform_amplitudes() {
        let state = build_initial_state(3, 0.5).unwrap();
        assert_eq!(state.n_terms(), 8);
        let expected = (0.5f64).powi(3).sqrt();
        for (_, amp) in state.terms() {
            assert_abs_diff_eq!(amp.re, expected, epsilon = 1e-15);
            assert_abs_diff_eq!(amp.im, 0.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(state.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn initial_state_epsilon_zero_is_a_product_state() {
        let state = build_initial_state(2, 0.0).unwrap();
        assert_eq!(state.n_terms(), 1);
        let occ = ModeOccupation::from_counts(vec![1, 0, 1, 0]);
        assert_abs_diff_eq!(
            state.amplitude(SpinBasisIndex(0), &occ).re,
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn initial_state_rejects_bad_arguments() {
        assert!(build_initial_state(0, 0.5).is_err());
        assert!(build_initial_state(11, 0.5).is_err());
        assert!(build_initial_state(2, -0.1).is_err());
        assert!(build_initial_state(2, 1.5).is_err());
        assert!(build_initial_state(2, f64::NAN).is_err());
    }

    #[test]
    fn beam_splitter_splits_a_single_photon() {
        // One photon in B_{1,0} goes to (i c_1 + d_1)/√2.
        let occ = ModeOccupation::from_counts(vec![1, 0]);
        let state = HybridState::from_terms(
            1,
            ModeLabeling::Input,
            [((SpinBasisIndex(0), occ), Complex64::ONE)],
        );
        let out = apply_beam_splitter_ring(&state).unwrap();
        assert_eq!(out.labeling(), ModeLabeling::Output);
        assert_eq!(out.n_terms(), 2);
        let c_occ = ModeOccupation::from_counts(vec![1, 0]);
        let d_occ = ModeOccupation::from_counts(vec![0, 1]);
        let amp_c = out.amplitude(SpinBasisIndex(0), &c_occ);
        let amp_d = out.amplitude(SpinBasisIndex(0), &d_occ);
        assert_abs_diff_eq!(amp_c.im, SQRT_HALF, epsilon = 1e-15);
        assert_abs_diff_eq!(amp_c.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(amp_d.re, SQRT_HALF, epsilon = 1e-15);
    }

    #[test]
    fn beam_splitter_preserves_norm_and_photon_number() {
        for n in 1..=4 {
            let state = build_initial_state(n, 0.3).unwrap();
            let out = apply_beam_splitter_ring(&state).unwrap();
            assert_abs_diff_eq!(out.norm(), 1.0, epsilon = 1e-12);
            for ((_, occ), _) in out.terms() {
                assert_eq!(occ.total_photons(), n as u32);
            }
        }
    }

    #[test]
    fn beam_splitter_rejects_output_labeled_states() {
        let state = build_initial_state(2, 0.5).unwrap();
        let out = apply_beam_splitter_ring(&state).unwrap();
        assert!(matches!(
            apply_beam_splitter_ring(&out),
            Err(Error::WrongLabeling { .. })
        ));
    }

    #[test]
    fn beam_splitter_rejects_doubly_occupied_input_mode() {
        let occ = ModeOccupation::from_counts(vec![2, 0]);
        let state = HybridState::from_terms(
            1,
            ModeLabeling::Input,
            [((SpinBasisIndex(0), occ), Complex64::ONE)],
        );
        assert!(matches!(
            apply_beam_splitter_ring(&state),
            Err(Error::InputModeOverfilled { .. })
        ));
    }

    #[test]
    fn two_photons_into_one_station_interfere_with_bosonic_factor() {
        // Photons in B_{1,0} and B_{2,1} both feed station 1: the cross terms
        // cancel and the double occupations carry the √2 enhancement,
        // (i c†_1 + d†_1)(c†_1 + i d†_1)/2 |vac⟩ = i(|2,0⟩ + |0,2⟩)/√2.
        let occ = ModeOccupation::from_counts(vec![1, 0, 0, 1]);
        let state = HybridState::from_terms(
            2,
            ModeLabeling::Input,
            [((SpinBasisIndex(0), occ), Complex64::ONE)],
        );
        let out = apply_beam_splitter_ring(&state).unwrap();
        assert_eq!(out.n_terms(), 2);
        let cc = ModeOccupation::from_counts(vec![2, 0, 0, 0]);
        let dd = ModeOccupation::from_counts(vec![0, 2, 0, 0]);
        let amp_cc = out.amplitude(SpinBasisIndex(0), &cc);
        let amp_dd = out.amplitude(SpinBasisIndex(0), &dd);
        assert_abs_diff_eq!(amp_cc.im, SQRT_HALF, epsilon = 1e-12);
        assert_abs_diff_eq!(amp_cc.re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(amp_dd.im, SQRT_HALF, epsilon = 1e-12);
        assert_abs_diff_eq!(out.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn tracing_with_unit_weights_keeps_full_probability() {
        let state = apply_beam_splitter_ring(&build_initial_state(3, 0.5).unwrap()).unwrap();
        let weights = WeightMap::uniform(state.n_modes(), 2, 1.0).unwrap();
        let rho = partial_trace_photons(&state, &weights).unwrap();
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-12);
        assert!(rho.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn tracing_with_zero_weight_on_occupied_modes_kills_the_event() {
        let state = apply_beam_splitter_ring(&build_initial_state(2, 0.5).unwrap()).unwrap();
        // Zero weight whenever any photon is present anywhere.
        let mut weights = WeightMap::new();
        for mode in 0..state.n_modes() {
            weights.insert(mode, 0, 1.0).unwrap();
            weights.insert(mode, 1, 0.0).unwrap();
            weights.insert(mode, 2, 0.0).unwrap();
        }
        let rho = partial_trace_photons(&state, &weights).unwrap();
        assert_abs_diff_eq!(rho.trace(), 0.0, epsilon = 1e-15);
        assert!(rho.entries().iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn tracing_reports_missing_weights() {
        let state = apply_beam_splitter_ring(&build_initial_state(2, 0.5).unwrap()).unwrap();
        let mut weights = WeightMap::new();
        weights.insert(0, 0, 1.0).unwrap();
        assert!(matches!(
            partial_trace_photons(&state, &weights),
            Err(Error::MissingWeight { .. })
        ));
    }

    #[test]
    fn weight_map_rejects_out_of_range_values() {
        let mut weights = WeightMap::new();
        assert!(weights.insert(0, 1, 1.2).is_err());
        assert!(weights.insert(0, 1, -0.1).is_err());
    }

    #[test]
    fn spin_index_bit_convention_is_big_endian() {
        // First node sits on the most significant bit.
        let idx = SpinBasisIndex(0b100);
        assert_eq!(idx.bit(0, 3), 1);
        assert_eq!(idx.bit(1, 3), 0);
        assert_eq!(idx.bit(2, 3), 0);
        assert_eq!(SpinBasisIndex::all_ones(3).0, 7);
    }
}

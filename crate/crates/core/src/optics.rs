//! Simulation of the central-station measurement: click patterns over the
//! C/D detectors, per-pattern probabilities and conditional node states under
//! detector efficiency η, and classification of the GHZ-like outcomes.
//!
//! A detector distinguishes only "no photon" from "one or more": an n-photon
//! mode is seen with weight 1 − (1−η)^n and missed with weight (1−η)^n.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{
    apply_beam_splitter_ring, build_initial_state, partial_trace_photons, HybridState,
    SpinDensityMatrix, WeightMap,
};

/// Conditional states below this trace are treated as impossible events.
const PROBABILITY_FLOOR: f64 = 1e-15;

/// A state counts as one of the two GHZ-like outcomes when its fidelity with
/// the reference reaches this threshold.
const CLASSIFY_THRESHOLD: f64 = 1.0 - 1e-9;

/// Detector outcomes at every station: which C and D detectors clicked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClickPattern {
    c_click: Vec<bool>,
    d_click: Vec<bool>,
}

impl ClickPattern {
    pub fn new(c_click: Vec<bool>, d_click: Vec<bool>) -> Result<Self> {
        if c_click.is_empty() || c_click.len() != d_click.len() {
            return Err(Error::EmptyInput("click pattern"));
        }
        Ok(ClickPattern { c_click, d_click })
    }

    pub fn n_stations(&self) -> usize {
        self.c_click.len()
    }

    pub fn c_click(&self, station: usize) -> bool {
        self.c_click[station]
    }

    pub fn d_click(&self, station: usize) -> bool {
        self.d_click[station]
    }

    /// A success pattern has exactly one click per station.
    pub fn is_success(&self) -> bool {
        (0..self.n_stations()).all(|j| self.c_click[j] != self.d_click[j])
    }

    pub fn d_click_count(&self) -> usize {
        self.d_click.iter().filter(|&&b| b).count()
    }

    pub fn click_count(&self) -> usize {
        self.d_click_count() + self.c_click.iter().filter(|&&b| b).count()
    }

    /// One character per station: C, D, B (both) or - (none).
    pub fn label(&self) -> String {
        (0..self.n_stations())
            .map(|j| match (self.c_click[j], self.d_click[j]) {
                (true, false) => 'C',
                (false, true) => 'D',
                (true, true) => 'B',
                (false, false) => '-',
            })
            .collect()
    }

    pub fn c_bits(&self) -> String {
        self.c_click.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn d_bits(&self) -> String {
        self.d_click.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// All 2^N success patterns, ordered lexicographically on the d-click bits
/// (first station most significant).
pub fn enumerate_success_patterns(n_nodes: usize) -> Vec<ClickPattern> {
    let mut patterns = Vec::with_capacity(1 << n_nodes);
    for mask in 0..(1usize << n_nodes) {
        let d_click: Vec<bool> = (0..n_nodes)
            .map(|j| (mask >> (n_nodes - 1 - j)) & 1 == 1)
            .collect();
        let c_click: Vec<bool> = d_click.iter().map(|&d| !d).collect();
        patterns.push(ClickPattern { c_click, d_click });
    }
    patterns
}

/// All 2^{2N} click patterns, successes and failures alike, ordered
/// lexicographically on (c bits, d bits).
pub fn enumerate_all_patterns(n_nodes: usize) -> Vec<ClickPattern> {
    let mut patterns = Vec::with_capacity(1 << (2 * n_nodes));
    for c_mask in 0..(1usize << n_nodes) {
        for d_mask in 0..(1usize << n_nodes) {
            let c_click: Vec<bool> = (0..n_nodes)
                .map(|j| (c_mask >> (n_nodes - 1 - j)) & 1 == 1)
                .collect();
            let d_click: Vec<bool> = (0..n_nodes)
                .map(|j| (d_mask >> (n_nodes - 1 - j)) & 1 == 1)
                .collect();
            patterns.push(ClickPattern { c_click, d_click });
        }
    }
    patterns
}

/// Weight table for one click pattern at detector efficiency η, covering
/// occupations 0, 1 and 2 of every station mode.
pub fn detector_weights(pattern: &ClickPattern, eta: f64) -> Result<WeightMap> {
    if !(0.0..=1.0).contains(&eta) || !eta.is_finite() {
        return Err(Error::Domain {
            name: "eta",
            value: eta,
            expected: "[0, 1]",
        });
    }
    let miss = 1.0 - eta;
    let no_click = |n: i32| miss.powi(n);
    let click = |n: i32| 1.0 - miss.powi(n);

    let mut weights = WeightMap::new();
    for station in 0..pattern.n_stations() {
        for (offset, clicked) in [
            (0, pattern.c_click(station)),
            (1, pattern.d_click(station)),
        ] {
            let mode = 2 * station + offset;
            for n in 0..=2u8 {
                let w = if clicked {
                    click(i32::from(n))
                } else {
                    no_click(i32::from(n))
                };
                weights.insert(mode, n, w)?;
            }
        }
    }
    Ok(weights)
}

/// Which GHZ-like outcome a conditional state realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GhzClass {
    /// (i^N|0…0⟩ + |1…1⟩)/√2, even number of D clicks.
    Plus,
    /// (i^N|0…0⟩ − |1…1⟩)/√2, odd number of D clicks.
    Minus,
    /// Not GHZ-like (failure pattern or ε away from 1/2).
    None,
}

impl GhzClass {
    pub fn as_str(self) -> &'static str {
        match self {
            GhzClass::Plus => "plus",
            GhzClass::Minus => "minus",
            GhzClass::None => "none",
        }
    }
}

/// The GHZ-like reference (i^N|0…0⟩ + sign·|1…1⟩)/√2.
pub fn ghz_like(n_nodes: usize, sign: i32) -> DVector<Complex64> {
    let dim = 1 << n_nodes;
    let mut v = DVector::<Complex64>::zeros(dim);
    let i_pow_n = Complex64::i().powu(n_nodes as u32);
    let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v[0] = i_pow_n * amp;
    v[dim - 1] = amp * Complex64::new(f64::from(sign.signum()), 0.0);
    v
}

/// Everything the simulator reports for a single click pattern.
#[derive(Debug, Clone)]
pub struct OutcomeReport {
    pub pattern: ClickPattern,
    pub probability: f64,
    pub conditional: SpinDensityMatrix,
    pub ghz_class: GhzClass,
    pub fidelity: f64,
    /// D-click count, present only for success patterns.
    pub phase_m: Option<usize>,
}

/// Relative phase carried by a success pattern: the conditional state is
/// (i^N|0…0⟩ + (−1)^m|1…1⟩)/√2 with m the number of D clicks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternPhase {
    pub m: usize,
    pub sign: i32,
}

/// Phase class of a success pattern from its click combinatorics alone.
pub fn classify_phase(pattern: &ClickPattern) -> Result<PatternPhase> {
    for station in 0..pattern.n_stations() {
        let clicks = usize::from(pattern.c_click(station)) + usize::from(pattern.d_click(station));
        if clicks != 1 {
            return Err(Error::NotSuccessPattern { station, clicks });
        }
    }
    let m = pattern.d_click_count();
    Ok(PatternPhase {
        m,
        sign: if m % 2 == 0 { 1 } else { -1 },
    })
}

/// The interfered state for one (N, ε), cached so that many patterns can be
/// measured without rebuilding it.
#[derive(Debug, Clone)]
pub struct RingInterference {
    epsilon: f64,
    state: HybridState,
}

impl RingInterference {
    pub fn new(n_nodes: usize, epsilon: f64) -> Result<Self> {
        let state = apply_beam_splitter_ring(&build_initial_state(n_nodes, epsilon)?)?;
        Ok(RingInterference { epsilon, state })
    }

    pub fn n_nodes(&self) -> usize {
        self.state.n_nodes()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn state(&self) -> &HybridState {
        &self.state
    }

    /// Probability, conditional state and GHZ classification for one pattern.
    pub fn measure(&self, pattern: &ClickPattern, eta: f64) -> Result<OutcomeReport> {
        if pattern.n_stations() != self.n_nodes() {
            return Err(Error::DimensionMismatch {
                found: pattern.n_stations(),
                n_nodes: self.n_nodes(),
                expected: self.n_nodes(),
            });
        }
        let weights = detector_weights(pattern, eta)?;
        let conditional = partial_trace_photons(&self.state, &weights)?;
        let probability = conditional.trace();
        let phase_m = pattern.is_success().then(|| pattern.d_click_count());

        match conditional.normalize(PROBABILITY_FLOOR) {
            Some((normalized, _)) => {
                let n = self.n_nodes();
                let f_plus = normalized.fidelity(&ghz_like(n, 1));
                let f_minus = normalized.fidelity(&ghz_like(n, -1));
                let (fidelity, ghz_class) = if f_plus >= f_minus {
                    (f_plus, if f_plus >= CLASSIFY_THRESHOLD { GhzClass::Plus } else { GhzClass::None })
                } else {
                    (f_minus, if f_minus >= CLASSIFY_THRESHOLD { GhzClass::Minus } else { GhzClass::None })
                };
                Ok(OutcomeReport {
                    pattern: pattern.clone(),
                    probability,
                    conditional: normalized,
                    ghz_class,
                    fidelity,
                    phase_m,
                })
            }
            None => Ok(OutcomeReport {
                pattern: pattern.clone(),
                probability: probability.max(0.0),
                conditional,
                ghz_class: GhzClass::None,
                fidelity: 0.0,
                phase_m,
            }),
        }
    }
}

/// One-shot variant of [`RingInterference::measure`].
pub fn measure_pattern(
    n_nodes: usize,
    epsilon: f64,
    eta: f64,
    pattern: &ClickPattern,
) -> Result<OutcomeReport> {
    RingInterference::new(n_nodes, epsilon)?.measure(pattern, eta)
}

/// Success probability summed over the 2^N success patterns, grouped by the
/// phase sign of the produced state.
#[derive(Debug, Clone, Copy)]
pub struct SuccessTotals {
    pub p_plus: f64,
    pub p_minus: f64,
    pub p_total: f64,
}

pub fn total_success(n_nodes: usize, epsilon: f64, eta: f64) -> Result<SuccessTotals> {
    let ring = RingInterference::new(n_nodes, epsilon)?;
    let mut p_plus = 0.0;
    let mut p_minus = 0.0;
    for pattern in enumerate_success_patterns(n_nodes) {
        let phase = classify_phase(&pattern)?;
        let report = ring.measure(&pattern, eta)?;
        if phase.sign > 0 {
            p_plus += report.probability;
        } else {
            p_minus += report.probability;
        }
    }
    Ok(SuccessTotals {
        p_plus,
        p_minus,
        p_total: p_plus + p_minus,
    })
}

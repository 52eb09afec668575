//! Property tests for the invariants the modules promise.

use proptest::prelude::*;

use ghz_core::analytic::{self, PovmElement};
use ghz_core::hilbert::{
    apply_beam_splitter_ring, build_initial_state, partial_trace_photons, WeightMap,
};
use ghz_core::optics::{enumerate_all_patterns, RingInterference};
use ghz_core::povm_opt::{choi_to_povm, fp_direct, p_direct, povm_to_choi};
use ghz_core::rates::{ghz_rate, transmission, ProtocolParams};

fn weight_map_from(values: &[f64], n_modes: usize) -> WeightMap {
    let mut weights = WeightMap::new();
    let mut idx = 0;
    for mode in 0..n_modes {
        for n in 0..=2u8 {
            weights.insert(mode, n, values[idx % values.len()]).unwrap();
            idx += 1;
        }
    }
    weights
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_transform_preserves_norm_and_photon_number(
        n_nodes in 1usize..=5,
        epsilon in 0.0f64..=1.0,
    ) {
        let state = build_initial_state(n_nodes, epsilon).unwrap();
        let interfered = apply_beam_splitter_ring(&state).unwrap();
        prop_assert!((interfered.norm() - state.norm()).abs() < 1e-12);
        for ((_, occ), _) in interfered.terms() {
            prop_assert_eq!(occ.total_photons(), n_nodes as u32);
        }
    }

    #[test]
    fn photon_trace_is_positive_for_valid_weights(
        n_nodes in 1usize..=4,
        epsilon in 0.0f64..=1.0,
        raw in prop::collection::vec(0.0f64..=1.0, 30),
    ) {
        let state = apply_beam_splitter_ring(&build_initial_state(n_nodes, epsilon).unwrap()).unwrap();
        let weights = weight_map_from(&raw, state.n_modes());
        let rho = partial_trace_photons(&state, &weights).unwrap();
        prop_assert!(rho.hermiticity_defect() < 1e-12);
        prop_assert!(rho.min_eigenvalue() >= -1e-12);
        prop_assert!(rho.trace() <= 1.0 + 1e-12);
    }

    #[test]
    fn photon_trace_is_linear_in_each_modes_weights(
        n_nodes in 1usize..=3,
        epsilon in 0.1f64..=0.9,
        raw_a in prop::collection::vec(0.0f64..=1.0, 24),
        raw_b in prop::collection::vec(0.0f64..=1.0, 24),
        mixing in 0.0f64..=1.0,
        mode_choice in 0usize..6,
    ) {
        // The weights enter as a product over modes, so the trace-out is
        // linear in any single mode's weights with the others held fixed.
        let state = apply_beam_splitter_ring(&build_initial_state(n_nodes, epsilon).unwrap()).unwrap();
        let mode = mode_choice % state.n_modes();

        let base = weight_map_from(&raw_a, state.n_modes());
        let mut with_a = base.clone();
        let mut with_b = base.clone();
        let mut with_mix = base.clone();
        for n in 0..=2u8 {
            let a = raw_a[usize::from(n)];
            let b = raw_b[usize::from(n)];
            with_a.insert(mode, n, a).unwrap();
            with_b.insert(mode, n, b).unwrap();
            with_mix.insert(mode, n, mixing * a + (1.0 - mixing) * b).unwrap();
        }

        let rho_a = partial_trace_photons(&state, &with_a).unwrap();
        let rho_b = partial_trace_photons(&state, &with_b).unwrap();
        let rho_mix = partial_trace_photons(&state, &with_mix).unwrap();
        let combined = rho_a.entries() * num_complex::Complex64::new(mixing, 0.0)
            + rho_b.entries() * num_complex::Complex64::new(1.0 - mixing, 0.0);
        prop_assert!((rho_mix.entries() - combined).norm() < 1e-12);
    }

    #[test]
    fn all_click_patterns_partition_probability_at_any_efficiency(
        n_nodes in 1usize..=3,
        epsilon in 0.0f64..=1.0,
        eta in 0.0f64..=1.0,
    ) {
        let ring = RingInterference::new(n_nodes, epsilon).unwrap();
        let total: f64 = enumerate_all_patterns(n_nodes)
            .iter()
            .map(|p| ring.measure(p, eta).unwrap().probability)
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn success_patterns_share_one_probability(
        n_nodes in 1usize..=4,
        eta in 0.05f64..=1.0,
    ) {
        let ring = RingInterference::new(n_nodes, 0.5).unwrap();
        let probabilities: Vec<f64> = ghz_core::optics::enumerate_success_patterns(n_nodes)
            .iter()
            .map(|p| ring.measure(p, eta).unwrap().probability)
            .collect();
        let first = probabilities[0];
        for p in &probabilities {
            prop_assert!((p - first).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_forms_stay_in_range_and_factor(
        n_nodes in 1usize..=6,
        epsilon in 0.0f64..=1.0,
    ) {
        let fp = analytic::fp_bound(epsilon, n_nodes).unwrap();
        let p = analytic::p_succ_opt(epsilon, n_nodes).unwrap();
        let f = analytic::f_opt(epsilon, n_nodes).unwrap();
        prop_assert!((0.0..=1.0).contains(&fp));
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((f * p - fp).abs() < 1e-12);
    }

    #[test]
    fn optimal_probability_and_fidelity_shrink_with_more_nodes(
        epsilon in 0.01f64..0.5,
    ) {
        for n in 1..6 {
            let p_small = analytic::p_succ_opt(epsilon, n).unwrap();
            let p_large = analytic::p_succ_opt(epsilon, n + 1).unwrap();
            prop_assert!(p_large <= p_small + 1e-15);
            let f_small = analytic::f_opt(epsilon, n).unwrap();
            let f_large = analytic::f_opt(epsilon, n + 1).unwrap();
            prop_assert!(f_large <= f_small + 1e-15);
            prop_assert!(f_large >= 0.5 - 1e-15);
        }
    }

    #[test]
    fn random_elements_respect_the_bound_and_the_choi_roundtrip(
        seed in any::<u64>(),
        epsilon in 0.0f64..=1.0,
    ) {
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let n_nodes = 2;
        let element = PovmElement::random_with(n_nodes, &mut rng);

        let outcome = analytic::apply_povm(epsilon, n_nodes, &element).unwrap();
        let bound = analytic::fp_bound(epsilon, n_nodes).unwrap();
        prop_assert!(outcome.p_succ * outcome.fidelity <= bound + 1e-10);

        let choi = povm_to_choi(&element);
        let back = choi_to_povm(&choi).unwrap();
        prop_assert!((element.entries() - back.entries()).norm() < 1e-10);
        prop_assert!((choi.fp_value(epsilon).unwrap() - fp_direct(epsilon, n_nodes, &element)).abs() < 1e-10);
        prop_assert!((choi.p_value(epsilon).unwrap() - p_direct(epsilon, n_nodes, &element)).abs() < 1e-10);
    }

    #[test]
    fn rate_points_are_finite_ordered_and_monotone(
        d_km in 0.5f64..=500.0,
        n_nodes in 2usize..=8,
    ) {
        let params = ProtocolParams { n_nodes, d_km, ..ProtocolParams::default() };
        let eta = transmission(&params).unwrap();
        prop_assert!((0.0..=1.0).contains(&eta));
        let closer = transmission(&ProtocolParams { d_km: d_km * 0.5, ..params.clone() }).unwrap();
        prop_assert!(closer >= eta);

        let point = ghz_rate(&params, false).unwrap();
        for value in [point.eta, point.p_tot, point.t_tot_full_s, point.t_tot_fast_s, point.r_full_hz, point.r_fast_hz] {
            prop_assert!(value.is_finite() && value >= 0.0);
        }
        prop_assert!(point.r_fast_hz >= point.r_full_hz);
        let ratio = point.r_fast_hz / point.r_full_hz;
        let time_ratio = point.t_tot_full_s / point.t_tot_fast_s;
        prop_assert!((ratio - time_ratio).abs() < 1e-9 * time_ratio.abs());
    }
}

//! Invariants checked over generated cocycles, phases and chains.

use proptest::prelude::*;
use qpjacobi::avalanche::{ap_estimate_log_norm, ApBlockChain};
use qpjacobi::cocycle::{
    det_identity_residual, k_step_comparison, normalized_log_norm, orbit_phase, orbit_products,
    transfer_product_t, upper_bound_slack,
};
use qpjacobi::diophantine::{continued_fraction, diophantine_margin, dist_to_integer};
use qpjacobi::ldt::{
    birkhoff_value, deviation_histogram, shift_difference_slack, uniform_upper_bound_check,
};
use qpjacobi::lyapunov::{
    accelerated_limit, finite_scale_j, finite_scale_l, finite_scale_ladder, mean_log_b,
};
use qpjacobi::{CocycleSpec, FourierSeries, Mat2, PhaseSampler, GOLDEN};

fn series(max_deg: usize, constant: std::ops::Range<f64>) -> impl Strategy<Value = FourierSeries> {
    (
        constant,
        prop::collection::vec(-1.0..1.0f64, 0..=max_deg),
        prop::collection::vec(-1.0..1.0f64, 0..=max_deg),
    )
        .prop_map(|(c, cos, sin)| FourierSeries::new(c, cos, sin))
}

/// Cocycles whose `b` stays well away from zero.
fn cocycle() -> impl Strategy<Value = CocycleSpec> {
    (series(2, -2.0..2.0), series(1, 2.5..4.0), 0.05..0.95f64, -4.0..4.0f64)
        .prop_map(|(a, b, w, e)| CocycleSpec::new(a, b, w, e).unwrap())
}

/// Cocycles whose `b` may vanish somewhere on the circle.
fn rough_cocycle() -> impl Strategy<Value = CocycleSpec> {
    (series(2, -2.0..2.0), series(2, -1.0..1.0), 0.05..0.95f64, -4.0..4.0f64)
        .prop_filter_map("b vanishes identically", |(a, b, w, e)| CocycleSpec::new(a, b, w, e).ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cocycle_composition(spec in cocycle(), x in 0.0..1.0f64, n in 1usize..300, m in 1usize..300) {
        let whole = transfer_product_t(&spec, x, n + m).unwrap();
        let first = transfer_product_t(&spec, x, n).unwrap();
        let second = transfer_product_t(&spec, orbit_phase(x, spec.omega, n), m).unwrap();
        let composed = second.compose(&first).unwrap();
        prop_assert!((composed.log_norm() - whole.log_norm()).abs() <= 1e-9);
        prop_assert!(composed.unit().dist(&whole.unit()) <= 1e-8);
    }

    #[test]
    fn determinant_identity(spec in cocycle(), x in 0.0..1.0f64, n in 1usize..2000) {
        prop_assert!(det_identity_residual(&spec, x, n).unwrap() <= 1e-8);
    }

    #[test]
    fn unimodular_norm_is_nonnegative(spec in rough_cocycle(), x in 0.0..1.0f64, n in 1usize..500) {
        if let Ok(v) = normalized_log_norm(&spec, x, n) {
            prop_assert!(v >= -1e-9, "{}", v);
            let o = orbit_products(&spec, x, &[n], true).unwrap()[0];
            let direct = o.t.log_norm() - 0.5 * o.sum_log_bb();
            prop_assert!((direct - v).abs() <= 1e-9);
        }
    }

    #[test]
    fn upper_bound_holds(spec in cocycle(), x in 0.0..1.0f64, n in 1usize..500) {
        prop_assert!(upper_bound_slack(&spec, x, n).unwrap() >= -1e-9);
    }

    #[test]
    fn scaling_symmetry(spec in cocycle(), c in 0.1..10.0f64, x in 0.0..1.0f64, n in 1usize..300) {
        let scaled = CocycleSpec::new(spec.a.scaled(c), spec.b.scaled(c), spec.omega, c * spec.energy).unwrap();
        let v0 = normalized_log_norm(&spec, x, n).unwrap();
        let v1 = normalized_log_norm(&scaled, x, n).unwrap();
        prop_assert!((v0 - v1).abs() <= 1e-10, "{} vs {}", v0, v1);
    }

    #[test]
    fn subadditivity_of_estimates(spec in cocycle(), n in 4usize..64) {
        let s = PhaseSampler::grid(64);
        let l = finite_scale_ladder(&spec, &[n, 2 * n], &s).unwrap();
        prop_assert!(l[1].l_n <= l[0].l_n + 3.0 * (l[0].std_err + l[1].std_err));
        prop_assert!(l[0].l_n >= -1e-9 && l[1].l_n >= -1e-9);
    }

    #[test]
    fn j_equals_l_plus_d(spec in cocycle(), n in 1usize..128) {
        let s = PhaseSampler::grid(97);
        let j = finite_scale_j(&spec, n, &s).unwrap().l_n;
        let l = finite_scale_l(&spec, n, &s).unwrap().l_n;
        let d = mean_log_b(&spec, &s).unwrap().value;
        prop_assert!((j - l - d).abs() <= 1e-12, "{} vs {}", j, l + d);
    }

    /// Hyperbolic constant cocycles, `|a − E| ≥ 2.2|b|`. In the elliptic case
    /// `(1/N) log‖B^N‖` oscillates at order `1/N` and does not settle.
    #[test]
    fn acceleration_consistent_for_constant_cocycles(
        a in -3.0..3.0f64, b in 0.3..3.0f64, t in 2.2..5.0f64, sign in prop::bool::ANY, n in 64usize..200,
    ) {
        let e = if sign { a + t * b } else { a - t * b };
        let spec = CocycleSpec::new(FourierSeries::constant(a), FourierSeries::constant(b), GOLDEN, e).unwrap();
        let s = PhaseSampler::grid(4);
        let l1 = accelerated_limit(&spec, n, &s).unwrap().l_inf;
        let l2 = accelerated_limit(&spec, 2 * n, &s).unwrap().l_inf;
        prop_assert!((l1 - l2).abs() <= 1e-6, "{} vs {}", l1, l2);
    }

    #[test]
    fn deviation_measures_monotone_in_delta(spec in cocycle(), n in 1usize..64) {
        let deltas = [0.01, 0.05, 0.1, 0.2, 0.5];
        let h = deviation_histogram(&spec, n, &PhaseSampler::grid(128), &deltas).unwrap();
        prop_assert_eq!(h.bin_counts.iter().sum::<u64>() as usize, h.samples);
        let m = h.deviation_measures();
        prop_assert!(m.windows(2).all(|w| w[1].1 <= w[0].1));
        prop_assert!(m.iter().all(|(_, v)| (0.0..=1.0).contains(v)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn k_step_comparison_holds(spec in cocycle(), k in 1usize..=20, n in 1usize..=200, seed in 0u64..1000) {
        for i in 0..100 {
            let x = ((seed + i) as f64 * GOLDEN).fract();
            let r = k_step_comparison(&spec, x, n, k).unwrap();
            prop_assert!(r.holds(), "{:?} at x = {}", r, x);
        }
    }

    #[test]
    fn shift_difference_bound(spec in cocycle(), n in 16usize..128, frac in 0.05..1.0f64, x in 0.0..1.0f64) {
        let s = PhaseSampler::grid(256);
        let k = ((n as f64 * frac) as usize).max(1);
        let l_k = finite_scale_l(&spec, k, &s).unwrap().l_n;
        let c = uniform_upper_bound_check(&spec, n, &s).unwrap();
        let slack = shift_difference_slack(&spec, x, n, k, l_k, c.c_m_tilde.max(0.0), c.d).unwrap();
        prop_assert!(slack >= -1e-9, "slack {}", slack);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn convergents_are_best_approximations(omega in 0.001..0.999f64) {
        let cf = continued_fraction(omega, 12).unwrap();
        let q: Vec<u64> = cf.convergents.iter().map(|c| c.1).collect();
        prop_assert!(q.windows(2).all(|w| w[0] < w[1]));
        for (j, &(p, qj)) in cf.convergents.iter().enumerate() {
            let next = match q.get(j + 1) {
                Some(&v) if v <= 100_000 => v,
                _ => break,
            };
            let err = (omega - p as f64 / qj as f64).abs();
            prop_assert!(err < 1.0 / (qj as f64 * next as f64) + 1e-15);
            let best = dist_to_integer(qj as f64 * omega);
            prop_assert!(best <= 1.0 / next as f64 + 1e-12);
            for n in 1..next {
                prop_assert!(dist_to_integer(n as f64 * omega) >= best - 1e-12);
            }
        }
    }

    #[test]
    fn margin_monotone_in_n_max(omega in 0.001..0.999f64, n1 in 2u64..500, extra in 0u64..500) {
        let a = diophantine_margin(omega, 2.0, n1).unwrap();
        let b = diophantine_margin(omega, 2.0, n1 + extra).unwrap();
        prop_assert!(b.margin <= a.margin && a.margin >= 0.0);
    }

    #[test]
    fn ap_envelope(seed_angles in prop::collection::vec(-1.0..1.0f64, 20), stretch in prop::collection::vec(0.0..1.0f64, 20)) {
        let mu = 1e4;
        let chain: Vec<Mat2> = seed_angles
            .iter()
            .zip(&stretch)
            .map(|(&t, &s)| Mat2::rotation(t) * Mat2::diag(mu * (1.0 + s), 1.0 / (mu * (1.0 + s))))
            .collect();
        let c = ApBlockChain::from_matrices(&chain).unwrap();
        if c.hypotheses_met() {
            let est = ap_estimate_log_norm(&c).unwrap();
            prop_assert!((est - c.direct_log_norm).abs() <= 100.0 * 20.0 / c.mu());
        }
    }
}

#[test]
fn birkhoff_mean_is_centred() {
    let spec = CocycleSpec::new(FourierSeries::constant(0.0), FourierSeries::shifted_cosine(2.0, 1.0), GOLDEN, 0.0)
        .unwrap();
    let d = mean_log_b(&spec, &PhaseSampler::grid(1 << 16)).unwrap().value;
    let values: Vec<f64> = (0..2000)
        .map(|i| birkhoff_value(&spec, (i as f64 + 0.5) / 2000.0, 256, d).unwrap())
        .collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    assert!(mean.abs() <= 3.0 * (var / values.len() as f64).sqrt() + 1e-12, "{mean}");
}

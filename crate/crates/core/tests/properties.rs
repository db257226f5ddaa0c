use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use tvopt::controllers::{
    distributed_double_step, distributed_single_step, estimator_double_step, estimator_single_step,
    DoubleEstimator, GainParams, SingleEstimator, TeamState,
};
use tvopt::costs::{fd_check, CostModel, CostPreset, TimeSignal};
use tvopt::graph::{EdgeGains, Graph};
use tvopt::sim::consensus_errors;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        let len = pairs.len();
        proptest::collection::vec(any::<bool>(), len).prop_map(move |keep| {
            let edges: Vec<_> = pairs.iter().zip(&keep).filter(|(_, k)| **k).map(|(e, _)| *e).collect();
            Graph::from_edges(n, &edges).unwrap()
        })
    })
}

fn vec2() -> impl Strategy<Value = DVector<f64>> {
    (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(a, b)| DVector::from_vec(vec![a, b]))
}

fn team(n: usize) -> impl Strategy<Value = (Vec<DVector<f64>>, Vec<DVector<f64>>, f64)> {
    (
        proptest::collection::vec(vec2(), n),
        proptest::collection::vec(vec2(), n),
        0.0..20.0f64,
    )
}

fn bundles(state: &TeamState, costs: &[CostModel]) -> Vec<tvopt::DerivativeBundle> {
    costs
        .iter()
        .enumerate()
        .map(|(i, c)| c.derivatives(&state.x[i], &state.velocity(i), state.t))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn laplacian_factorizes_through_the_incidence(g in graph_strategy(8), w in proptest::collection::vec(0.0..5.0f64, 28)) {
        let d = g.incidence();
        prop_assert!((&d * d.transpose() - g.laplacian()).amax() < 1e-12);
        let gains = EdgeGains::from_values(&g, w.iter().copied());
        let (dw, lw) = g.weighted_incidence(&gains).unwrap();
        prop_assert!((&dw * dw.transpose() - lw).amax() < 1e-12);
    }

    #[test]
    fn lambda2_matches_a_library_eigensolver(g in graph_strategy(8)) {
        let mut ev: Vec<f64> = g.laplacian().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let l2 = g.lambda2().unwrap();
        prop_assert!((l2 - ev[1]).abs() < 1e-9);
        prop_assert_eq!(l2 > 1e-9, g.is_connected());
    }

    #[test]
    fn analytic_derivatives_match_finite_differences(
        family in 0usize..3, agent in 0usize..6, x in vec2(), v in vec2(), t in 0.0..20.0f64,
    ) {
        let preset = [CostPreset::Circle, CostPreset::ScaledCircle, CostPreset::Damped][family];
        let c = &preset.build(6)[agent];
        prop_assert!(fd_check(c, &x, &v, t, 1e-5) < 1e-5);
    }

    #[test]
    fn explicit_costs_pass_fd_check(
        a in proptest::collection::vec(-2.0..2.0f64, 4),
        amp in -3.0..3.0f64, omega in 0.1..2.0f64, x in vec2(), v in vec2(), t in 0.0..10.0f64,
    ) {
        let c = CostModel::new(
            DMatrix::from_row_slice(2, 2, &a),
            vec![TimeSignal::damped(amp, omega), TimeSignal::cos(amp, omega)],
        ).unwrap();
        prop_assert!(fd_check(&c, &x, &v, t, 1e-5) < 1e-5);
    }

    #[test]
    fn consensus_errors_are_mean_free(x in proptest::collection::vec(vec2(), 1..8)) {
        let s = consensus_errors(&x).iter().fold(DVector::zeros(2), |a, e| a + e);
        prop_assert!(s.amax() < 1e-12);
    }

    #[test]
    fn estimator_rates_sum_to_zero(g in graph_strategy(6), (x, v, t) in team(6), seed in 0.0..1.0f64) {
        let n = g.n();
        let costs = CostPreset::ScaledCircle.build(n);
        let mut s = TeamState::double(x[..n].to_vec(), v[..n].to_vec());
        s.t = t;
        s.est_single = Some((0..n).map(|i| SingleEstimator {
            xi: DVector::from_element(2, seed * i as f64),
            psi: DMatrix::from_element(2, 2, 0.01 * seed),
            phi: DVector::from_element(2, -seed),
        }).collect());
        s.est_double = Some((0..n).map(|i| DoubleEstimator {
            xi: DVector::from_element(8, seed - i as f64 * 0.1),
            phi: DMatrix::from_element(4, 2, 0.01 * seed),
        }).collect());
        let b = bundles(&s, &costs);
        let p = GainParams::default();
        let single = estimator_single_step(&s, &b, &g, &p).rates;
        let double = estimator_double_step(&s, &b, &g, &p).rates;
        let sx = single.iter().fold(DVector::zeros(2), |a, r| a + &r.xi);
        let sp = single.iter().fold(DMatrix::zeros(2, 2), |a, r| a + &r.psi);
        let dx = double.iter().fold(DVector::zeros(8), |a, r| a + &r.xi);
        let dp = double.iter().fold(DMatrix::zeros(4, 2), |a, r| a + &r.phi);
        prop_assert!(sx.amax() < 1e-9 && sp.amax() < 1e-9 && dx.amax() < 1e-9 && dp.amax() < 1e-9);
    }

    #[test]
    fn adaptive_gain_rates_are_nonnegative(g in graph_strategy(6), (x, v, t) in team(6)) {
        let n = g.n();
        let costs = CostPreset::Circle.build(n);
        let mut s = TeamState::double(x[..n].to_vec(), v[..n].to_vec());
        s.t = t;
        s.gains = EdgeGains::uniform(&g, 1.0);
        let b = bundles(&s, &costs);
        let single = distributed_single_step(&s, &b, &g).unwrap();
        let double = distributed_double_step(&s, &b, &g, &GainParams::default()).unwrap();
        prop_assert!(single.beta_dot.values().iter().chain(&double.beta_dot.values()).all(|r| *r >= 0.0));
    }

    #[test]
    fn distributed_double_is_relabeling_equivariant(
        (x, v, t) in team(6), perm in Just((0..6).collect::<Vec<usize>>()).prop_shuffle(),
    ) {
        let g = Graph::ring(6);
        let costs = CostPreset::Circle.build(6);
        let mut s = TeamState::double(x.clone(), v.clone());
        s.t = t;
        s.gains = EdgeGains::from_values(&g, [0.3, 0.7, 1.1, 1.3, 1.7, 1.9]);
        let place = |src: &[DVector<f64>]| {
            let mut out = src.to_vec();
            for (k, item) in src.iter().enumerate() {
                out[perm[k]] = item.clone();
            }
            out
        };
        let mut ps = TeamState::double(place(&x), place(&v));
        ps.t = t;
        ps.gains = s.gains.relabeled(&perm);
        let mut pcosts = costs.clone();
        for (k, c) in costs.iter().enumerate() {
            pcosts[perm[k]] = c.clone();
        }
        let p = GainParams { mu: 5.0, alpha: 12.0, gamma: 5.0, zeta: 12.0, ..GainParams::default() };
        let u = distributed_double_step(&s, &bundles(&s, &costs), &g, &p).unwrap().u;
        let pu = distributed_double_step(&ps, &bundles(&ps, &pcosts), &g.relabeled(&perm), &p).unwrap().u;
        for k in 0..6 {
            prop_assert!((&u[k] - &pu[perm[k]]).amax() < 1e-12);
        }
    }
}

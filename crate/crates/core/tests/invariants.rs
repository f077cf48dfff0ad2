use std::f64::consts::PI;

use proptest::prelude::*;
use qgband_core::format::sig12;
use qgband_core::graph::{Gamma1Params, GraphConfig};
use qgband_core::secular::lowest_values;
use qgband_core::*;

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn angle() -> impl Strategy<Value = f64> {
    -PI + 1e-9..PI
}

fn family_graph() -> impl Strategy<Value = CompactGraph> {
    (
        proptest::array::uniform4(0.6..1.6f64),
        -1.0..0.5f64,
        0.6..2.0f64,
        proptest::array::uniform4(-0.5..0.5f64),
    )
        .prop_map(|(lengths, gamma_a, gamma_b, q)| {
            let mut p = Gamma1Params::equilateral(gamma_a, gamma_b);
            p.lengths = lengths;
            for j in 0..4 {
                p.potentials[j] = Potential::two_piece(lengths[j], 0.4, q[j], -q[j]);
            }
            build_gamma1(&p).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bands_are_even_in_quasimomentum(g in family_graph(), k in proptest::array::uniform3(angle())) {
        let b = g.vertex_id("B").unwrap();
        let gamma_b = g.vertex(b).condition.coupling().unwrap();
        let minus = k.map(|x| graph::wrap_angle(-x));
        let plus = lowest_values(&apply_floquet(&g, b, k, gamma_b).unwrap(), 3, &opts()).unwrap();
        let back = lowest_values(&apply_floquet(&g, b, minus, gamma_b).unwrap(), 3, &opts()).unwrap();
        for (x, y) in plus.iter().zip(&back) {
            prop_assert!((x - y).abs() < 1e-9, "{} vs {}", x, y);
        }
    }

    #[test]
    fn dirichlet_at_floquet_vertex_removes_quasimomentum(
        g in family_graph(),
        k in proptest::array::uniform3(angle()),
    ) {
        let b = g.vertex_id("B").unwrap();
        let gamma_b = g.vertex(b).condition.coupling().unwrap();
        let gk = apply_floquet(&g, b, k, gamma_b).unwrap();
        let with_k = lowest_values(&dirichlet_perturbation(&gk, b).unwrap(), 3, &opts()).unwrap();
        let without = lowest_values(&dirichlet_perturbation(&g, b).unwrap(), 3, &opts()).unwrap();
        for (x, y) in with_k.iter().zip(&without) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn first_band_stays_below_the_dirichlet_edge(g in family_graph(), k in proptest::array::uniform3(angle())) {
        let b = g.vertex_id("B").unwrap();
        let gamma_b = g.vertex(b).condition.coupling().unwrap();
        let ev = lowest_values(&apply_floquet(&g, b, k, gamma_b).unwrap(), 2, &opts()).unwrap();
        let lb = band_edge::lambda_b(&g, b, &opts()).unwrap();
        let la = band_edge::lambda_a(&g, g.vertex_id("A").unwrap(), b, gamma_b, &opts()).unwrap();
        prop_assert!(ev[0] <= lb + 1e-8);
        prop_assert!(lb < la);
        prop_assert!(la <= ev[1] + 1e-8);
    }

    #[test]
    fn config_round_trips(g in family_graph()) {
        let cfg = GraphConfig::from_graph(&g);
        let back = GraphConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(back.content_hash(), cfg.content_hash());
        prop_assert_eq!(back.build().unwrap(), g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn transfer_matrices_are_unimodular(lambda in -50.0..400.0f64, len in 0.05..4.0f64, q in -5.0..5.0f64) {
        let e = Edge::new("e", 0, 1, len, Potential::two_piece(len, 0.3, q, -0.5 * q)).unwrap();
        let m = transfer_matrix(lambda, &e);
        let scale = m.0.iter().flatten().fold(1.0f64, |s, x| s.max(x.abs()));
        prop_assert!((m.det() - 1.0).abs() <= 1e-12 * scale * scale);
    }

    #[test]
    fn quadrangle_samples_close(a in proptest::array::uniform4(0.3..2.0f64)) {
        let spec = PolygonSpec::new(a).unwrap();
        if classify(&spec) == Classification::Curve {
            let curve = curve_samples(&spec, 64).unwrap();
            prop_assert!(curve.max_residual() <= 1e-10 * spec.perimeter());
        }
    }

    #[test]
    fn quadrangle_scaling_is_invisible(a in proptest::array::uniform4(0.3..2.0f64), c in 0.1..10.0f64) {
        let spec = PolygonSpec::new(a).unwrap();
        let scaled = PolygonSpec::new(a.map(|x| c * x)).unwrap();
        prop_assert_eq!(classify(&spec), classify(&scaled));
        if classify(&spec) == Classification::Curve {
            let (p, q) = (curve_samples(&spec, 32).unwrap(), curve_samples(&scaled, 32).unwrap());
            prop_assert_eq!(p.topology, q.topology);
            for k in q.points() {
                prop_assert!(spec.residual(*k) <= 1e-9 * spec.perimeter());
            }
        }
    }

    #[test]
    fn diamond_bands_mirror(k in proptest::collection::vec(angle(), 2..6)) {
        let d = k.len();
        let (lo, hi) = discrete_diamond_bands(d, &k).unwrap();
        prop_assert_eq!(lo + hi, 2.0 * (d + 1) as f64);
        prop_assert!(lo >= 0.0 && hi <= 2.0 * (d + 1) as f64);
    }

    #[test]
    fn twelve_digit_format_is_close(x in -1e8..1e8f64) {
        let y: f64 = sig12(x).parse().unwrap();
        prop_assert!((x - y).abs() <= 5e-12 * x.abs());
    }
}

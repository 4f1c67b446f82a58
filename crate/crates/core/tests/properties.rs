use std::f64::consts::PI;

use hypfill_core::boundary_probe::{
    partition_from_distances, partition_from_products, probe, ProbeConfig, RaySampling,
};
use hypfill_core::corpus::{cycle, random_graph, random_tree, segment};
use hypfill_core::filling::{Filling, FillingParams};
use hypfill_core::gehring_hayman::{
    collapse_slope, gh_pair, gh_ratio_scaling_defect, max_ratio_over_geodesics, ScalingCheckParams,
};
use hypfill_core::graph::{Curve, MetricGraph};
use hypfill_core::hyperbolicity::{default_rays, delta_exact, delta_sampled, estimate_starlikeness};
use hypfill_core::model_spaces::{ModelSpaceParams, PolarPoint};
use hypfill_core::uniformize::{ConformalGraph, UniformizationParams};
use proptest::prelude::*;

fn small_graph() -> impl Strategy<Value = MetricGraph> {
    (2usize..12, 0usize..12, any::<u64>()).prop_map(|(n, extra, seed)| {
        let room = n * (n - 1) / 2 - (n - 1);
        random_graph(n, extra.min(room), seed).unwrap()
    })
}

/// Brute force over ordered quadruples with products based at each point.
fn delta_oracle(g: &MetricGraph) -> f64 {
    let d = g.all_pairs();
    let n = g.len();
    let gp = |p: usize, x: usize, y: usize| 0.5 * (d.get(p, x) + d.get(p, y) - d.get(x, y));
    let mut best = 0.0f64;
    for p in 0..n {
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    best = best.max(gp(p, x, z).min(gp(p, z, y)) - gp(p, x, y));
                }
            }
        }
    }
    best
}

fn simple_paths(g: &MetricGraph, x: usize, y: usize) -> Vec<Vec<usize>> {
    fn go(g: &MetricGraph, u: usize, y: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if u == y {
            out.push(path.clone());
            return;
        }
        for &(v, _) in g.neighbors(u) {
            if !path.contains(&v) {
                path.push(v);
                go(g, v, y, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(g, x, y, &mut vec![x], &mut out);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph_and_uniformized_metrics_satisfy_triangle(g in small_graph(), eps in 0.05f64..4.0, s in any::<u64>()) {
        let n = g.len();
        let (x, y, z) = ((s % n as u64) as usize, ((s >> 16) % n as u64) as usize, ((s >> 32) % n as u64) as usize);
        let d = g.all_pairs();
        prop_assert!(d.get(x, z) <= d.get(x, y) + d.get(y, z) + 1e-12);
        let cg = ConformalGraph::with_epsilon(&g, eps).unwrap();
        let (dxz, dxy, dyz) = (
            cg.uniformized_distance(x, z).unwrap(),
            cg.uniformized_distance(x, y).unwrap(),
            cg.uniformized_distance(y, z).unwrap(),
        );
        prop_assert!(dxz <= (dxy + dyz) * (1.0 + 1e-12));
    }

    #[test]
    fn sampled_delta_never_exceeds_exact(g in small_graph(), seed in any::<u64>()) {
        let exact = delta_exact(&g, 64).unwrap().delta;
        let sampled = delta_sampled(&g, 500, seed).unwrap().delta;
        prop_assert!(sampled <= exact);
    }

    #[test]
    fn exact_delta_matches_ordered_quadruple_oracle(
        (n, extra, seed) in (2usize..8, 0usize..8, any::<u64>())
    ) {
        let room = n * (n - 1) / 2 - (n - 1);
        let g = random_graph(n, extra.min(room), seed).unwrap();
        let got = delta_exact(&g, 64).unwrap().delta;
        let want = delta_oracle(&g);
        prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want), "{} vs {}", got, want);
    }

    #[test]
    fn trees_are_zero_hyperbolic(n in 2usize..60, seed in any::<u64>()) {
        let t = random_tree(n, seed).unwrap();
        prop_assert_eq!(delta_exact(&t, 64).unwrap().delta, 0.0);
    }

    #[test]
    fn fewer_rays_never_improve_starlikeness(g in small_graph()) {
        let rays = default_rays(&g, 0).unwrap();
        let full = estimate_starlikeness(&g, 0, &rays).unwrap().m;
        let one = estimate_starlikeness(&g, 0, &rays[..1]).unwrap().m;
        prop_assert!(one >= full);
    }

    #[test]
    fn boundary_distance_is_one_lipschitz(g in small_graph(), eps in 0.05f64..4.0) {
        let cg = ConformalGraph::with_epsilon(&g, eps).unwrap();
        let bd = cg.boundary_distances();
        for (e, edge) in g.edges().iter().enumerate() {
            let w = cg.conformal_lengths()[e];
            prop_assert!((bd[edge.u] - bd[edge.v]).abs() <= w * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn ratios_are_scale_invariant(g in small_graph(), eps in 0.1f64..3.0) {
        let n = g.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).collect();
        for k in [0.5, 2.0, 10.0] {
            let params = ScalingCheckParams::new(k, eps).unwrap();
            prop_assert!((params.epsilon_tilde() * k - eps).abs() <= 1e-15 * eps);
            prop_assert!(gh_ratio_scaling_defect(&g, params, &pairs).unwrap() < 1e-10);
        }
    }

    #[test]
    fn ratio_is_at_least_one(g in small_graph(), eps in 0.1f64..3.0) {
        let cg = ConformalGraph::with_epsilon(&g, eps).unwrap();
        for y in 1..g.len() {
            prop_assert!(gh_pair(&cg, 0, y).unwrap().ratio >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn geodesic_maximum_matches_enumeration(
        (n, extra, seed) in (3usize..9, 0usize..10, any::<u64>()),
        eps in 0.1f64..3.0,
    ) {
        let room = n * (n - 1) / 2 - (n - 1);
        let g = random_graph(n, extra.min(room), seed).unwrap();
        let cg = ConformalGraph::with_epsilon(&g, eps).unwrap();
        let d = g.all_pairs();
        for x in 0..n {
            for y in (x + 1)..n {
                let de = cg.uniformized_distance(x, y).unwrap();
                let mut best = 0.0f64;
                for p in simple_paths(&g, x, y) {
                    let c = Curve::new(p);
                    // Dyadic edge lengths sum exactly, so geodesics are found by equality.
                    if g.curve_length(&c).unwrap() == d.get(x, y) {
                        best = best.max(cg.uniformized_curve_length(&c).unwrap() / de);
                    }
                }
                let got = max_ratio_over_geodesics(&cg, x, y).unwrap();
                prop_assert!((got - best).abs() <= 1e-12 * best, "{} {}: {} vs {}", x, y, got, best);
            }
        }
    }

    #[test]
    fn threshold_monotonicity(
        vals in prop::collection::vec(0.0f64..10.0, 36),
        t1 in 0.0f64..10.0,
        t2 in 0.0f64..10.0,
    ) {
        let n = 6;
        let m: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { vals[i.min(j) * n + i.max(j)] }).collect())
            .collect();
        let (lo, hi) = (t1.min(t2), t1.max(t2));
        prop_assert!(partition_from_products(&m, hi).refines(&partition_from_products(&m, lo)));
        prop_assert!(partition_from_distances(&m, lo).refines(&partition_from_distances(&m, hi)));
        let p = partition_from_products(&m, lo);
        prop_assert!(p.refines(&p));
        prop_assert_eq!(p.element_count(), n);
    }

    #[test]
    fn model_distance_triangle_inequality(
        kappa in -9.0f64..-0.05,
        pts in prop::collection::vec((0.0f64..6.0, 0.0f64..(2.0 * PI)), 3),
    ) {
        let h = ModelSpaceParams::new(kappa, 1.0).unwrap();
        let p: Vec<PolarPoint> = pts.iter().map(|&(r, t)| PolarPoint::new(r, t).unwrap()).collect();
        let d = |a: usize, b: usize| h.hyperbolic_distance(p[a], p[b]);
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
        prop_assert!(d(0, 0).abs() <= 1e-12);
        prop_assert!((d(0, 1) - d(1, 0)).abs() <= 1e-12 * (1.0 + d(0, 1)));
    }

    #[test]
    fn model_distance_grows_with_angle(kappa in -9.0f64..-0.05, ra in 0.01f64..5.0, rb in 0.01f64..5.0, t in 0.0f64..PI, u in 0.0f64..PI) {
        let h = ModelSpaceParams::new(kappa, 1.0).unwrap();
        let (lo, hi) = (t.min(u), t.max(u));
        let a = PolarPoint::new(ra, 0.0).unwrap();
        let near = h.hyperbolic_distance(a, PolarPoint::new(rb, lo).unwrap());
        let far = h.hyperbolic_distance(a, PolarPoint::new(rb, hi).unwrap());
        prop_assert!(near <= far * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn ray_lengths_rescale_with_curvature(c in 0.2f64..4.0, eps in 0.1f64..3.0, k in 0.1f64..15.0, frac in 0.0f64..=1.0, dtheta in 0.0f64..=(2.0 * PI)) {
        // Curvature -c² is the unit plane scaled by 1/c, with ε scaled by c.
        let curved = ModelSpaceParams::new(-c * c, eps).unwrap();
        let unit = ModelSpaceParams::new(-1.0, eps / c).unwrap();
        let s = frac * k;
        let a = curved.ray_curve_length(dtheta, k, s);
        let b = unit.ray_curve_length(dtheta, c * k, c * s) / c;
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300), "{} vs {}", a, b);
        let ua = curved.d_eps_ray_upper(dtheta, k).unwrap().value;
        let ub = unit.d_eps_ray_upper(dtheta, c * k).unwrap().value / c;
        prop_assert!((ua - ub).abs() <= 1e-7 * ua, "{} vs {}", ua, ub);
    }

    #[test]
    fn full_turn_arc_is_the_circle(kappa in -9.0f64..-0.05, eps in 0.1f64..3.0, k in 0.01f64..15.0) {
        let h = ModelSpaceParams::new(kappa, eps).unwrap();
        let arc = h.ray_curve_length(2.0 * PI, k, k);
        let circle = h.ray_separation_bound(k).unwrap();
        prop_assert!((arc - circle).abs() <= 1e-12 * circle, "{} vs {}", arc, circle);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn tree_partitions_agree(n in 20usize..120, seed in any::<u64>(), eps in 0.2f64..3.0, rays in 2usize..6) {
        let t = random_tree(n, seed).unwrap();
        let depth = t.distances_from(0).unwrap().into_iter().fold(0.0, f64::max);
        prop_assume!(depth >= 2.0);
        let cg = ConformalGraph::with_epsilon(&t, eps).unwrap();
        let config = ProbeConfig {
            epsilon: eps,
            max_rays: rays,
            seed,
            sampling: RaySampling::Uniform,
            gromov_threshold: None,
            metric_threshold: None,
        };
        let report = probe(&cg, config).unwrap();
        prop_assert!(report.partition.agree);
    }

    #[test]
    fn collapse_slope_decreases_with_epsilon(e1 in 0.1f64..2.0, e2 in 0.1f64..2.0) {
        let f = Filling::build(&segment(32, 0.9).unwrap(), FillingParams::new(2.0, 2.0, 5, 0).unwrap()).unwrap();
        let (lo, hi) = (e1.min(e2), e1.max(e2));
        let a = collapse_slope(&f, lo, None).unwrap();
        let b = collapse_slope(&f, hi, None).unwrap();
        prop_assert!(a >= b - 1e-6, "{} at {} vs {} at {}", a, lo, b, hi);
    }
}

#[test]
fn four_cycle_has_delta_one() {
    let g = cycle(4).unwrap();
    assert_eq!(delta_oracle(&g), 1.0);
    assert_eq!(delta_exact(&g, 8).unwrap().delta, 1.0);
}

#[test]
fn conformal_graph_respects_explicit_basepoint() {
    let g = cycle(6).unwrap();
    let cg = ConformalGraph::new(&g, UniformizationParams::new(1.0, 3).unwrap()).unwrap();
    assert_eq!(cg.radial()[3], 0.0);
    assert_eq!(cg.basepoint(), 3);
}

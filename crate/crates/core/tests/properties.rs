#![allow(clippy::needless_range_loop)]
use intriso_core::crooked::{
    build_crooked, build_gamma_product, check_crooked, gamma_tower, min_domain, path_isometry_check, product_probe,
    retraction_check,
};
use intriso_core::cubecomplex::{CubeTower, SampleWithMap};
use intriso_core::folding::{fold_graph, tv_check, TOL_SLOPE};
use intriso_core::inverselimit::InverseSystem;
use intriso_core::metric::{gh_upper_bound, graph_metric, subdivide, validate_metric};
use intriso_core::pack::{pack_exact, pack_greedy};
use intriso_core::pullback::{ChainGraph, PullValue};
use intriso_core::{EuclideanMap, FiniteMetricSpace, MetricGraph};
use proptest::prelude::*;

fn points(max: usize, dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0f64..1.0, dim), 2..max)
}

/// Random tree: parent indices and edge lengths.
fn tree(max_edges: usize) -> impl Strategy<Value = MetricGraph> {
    prop::collection::vec((any::<prop::sample::Index>(), 0.1f64..0.5), 1..=max_edges).prop_map(|raw| {
        let edges = raw
            .iter()
            .enumerate()
            .map(|(k, (p, len))| (p.index(k + 1), k + 1, *len))
            .collect();
        MetricGraph::unlabeled(raw.len() + 1, edges).unwrap()
    })
}

fn connected_graph() -> impl Strategy<Value = MetricGraph> {
    (
        tree(15),
        prop::collection::vec(
            (any::<prop::sample::Index>(), any::<prop::sample::Index>(), 0.1f64..1.0),
            0..10,
        ),
    )
        .prop_map(|(t, extra)| {
            let n = t.vertex_count();
            let mut edges = t.edges().to_vec();
            for (a, b, len) in extra {
                let (a, b) = (a.index(n), b.index(n));
                if a != b {
                    edges.push((a, b, len));
                }
            }
            MetricGraph::unlabeled(n, edges).unwrap()
        })
}

fn pull_f64(v: PullValue) -> f64 {
    v.to_f64()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn perturbed_entry_flips_validation(pts in points(10, 2), pick in any::<(prop::sample::Index, prop::sample::Index)>()) {
        let m = FiniteMetricSpace::euclidean(&pts).unwrap();
        let n = m.len();
        prop_assume!(n >= 3);
        let (i, j) = (pick.0.index(n), pick.1.index(n));
        prop_assume!(i != j && m.dist(i, j) > 1e-6);
        let mut rows = m.rows();
        prop_assert!(validate_metric(&rows).unwrap().is_valid());
        // how far d(i, j) can drop before some triangle through k breaks
        let slack = (0..n)
            .filter(|&k| k != i && k != j)
            .map(|k| (m.dist(i, j) + m.dist(j, k) - m.dist(i, k)).min(m.dist(i, j) + m.dist(i, k) - m.dist(j, k)))
            .fold(f64::INFINITY, f64::min);
        prop_assume!(slack > 1e-6);
        rows[i][j] -= 2.0 * slack;
        rows[j][i] -= 2.0 * slack;
        prop_assert!(!validate_metric(&rows).unwrap().is_valid());
    }

    #[test]
    fn graph_metric_is_a_metric(g in connected_graph()) {
        let m = graph_metric(&g).unwrap();
        prop_assert!(m.validate().is_valid());
    }

    #[test]
    fn subdivision_keeps_distances(g in connected_graph(), h in 0.05f64..0.6) {
        let before = graph_metric(&g).unwrap();
        let sub = subdivide(&g, h).unwrap();
        let n = g.vertex_count();
        for i in 0..n {
            let row = sub.adjacency().dijkstra(i);
            for j in 0..n {
                prop_assert!((row[j] - before.dist(i, j)).abs() <= 1e-12 * (1.0 + sub.edges().len() as f64));
            }
        }
    }

    #[test]
    fn gh_bound_is_symmetric(a in points(8, 2), b in points(8, 2), extra in prop::collection::vec(any::<(prop::sample::Index, prop::sample::Index)>(), 0..6)) {
        let (m1, m2) = (FiniteMetricSpace::euclidean(&a).unwrap(), FiniteMetricSpace::euclidean(&b).unwrap());
        let k = m1.len().max(m2.len());
        let mut corr: Vec<(usize, usize)> = (0..k).map(|t| (t % m1.len(), t % m2.len())).collect();
        corr.extend(extra.iter().map(|(x, y)| (x.index(m1.len()), y.index(m2.len()))));
        let back: Vec<(usize, usize)> = corr.iter().map(|&(x, y)| (y, x)).collect();
        prop_assert_eq!(gh_upper_bound(&m1, &m2, &corr).unwrap(), gh_upper_bound(&m2, &m1, &back).unwrap());
    }

    #[test]
    fn pull_is_a_premetric(pts in points(15, 2), vals in prop::collection::vec(-1.0f64..1.0, 15), eps in 0.1f64..0.7) {
        let m = FiniteMetricSpace::euclidean(&pts).unwrap();
        let f = EuclideanMap::from_values(vals[..m.len()].to_vec());
        let p = ChainGraph::new(&m, &f, eps).unwrap().pull_matrix();
        let n = m.len();
        for i in 0..n {
            prop_assert_eq!(p[i][i], PullValue::Finite(0.0));
            for j in 0..n {
                prop_assert_eq!(p[i][j], p[j][i]);
                for k in 0..n {
                    prop_assert!(pull_f64(p[i][k]) <= pull_f64(p[i][j]) + pull_f64(p[j][k]) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn pull_grows_as_eps_shrinks(pts in points(15, 2), vals in prop::collection::vec(-1.0f64..1.0, 15), e1 in 0.05f64..0.8, e2 in 0.05f64..0.8) {
        let (small, big) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let m = FiniteMetricSpace::euclidean(&pts).unwrap();
        let f = EuclideanMap::from_values(vals[..m.len()].to_vec());
        let ps = ChainGraph::new(&m, &f, small).unwrap().pull_matrix();
        let pb = ChainGraph::new(&m, &f, big).unwrap().pull_matrix();
        for i in 0..m.len() {
            for j in 0..m.len() {
                prop_assert!(pull_f64(ps[i][j]) >= pull_f64(pb[i][j]) - 1e-12);
            }
        }
    }

    #[test]
    fn packing_is_antitone_and_greedy_is_lower(pts in points(20, 2), e1 in 0.01f64..0.8, e2 in 0.01f64..0.8) {
        let (small, big) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let m = FiniteMetricSpace::euclidean(&pts).unwrap();
        let (ps, pb) = (pack_exact(&m, small).unwrap(), pack_exact(&m, big).unwrap());
        prop_assert!(ps.count >= pb.count);
        prop_assert!(pack_greedy(&m, small).count <= ps.count);
    }

    #[test]
    fn folded_trees_pass_tv_and_slope_checks(g in tree(20), seed in prop::collection::vec(-1.0f64..1.0, 21), eps in 0.01f64..0.2) {
        // values along a tree, each edge moving by at most its length
        let mut vals = vec![0.0; g.vertex_count()];
        for (k, &(p, v, len)) in g.edges().iter().enumerate() {
            vals[v] = vals[p] + seed[k] * len;
        }
        let map = fold_graph(&g, &vals, eps).unwrap();
        prop_assert!(tv_check(&map).pass);
        prop_assert!(map.check_slopes().1 <= TOL_SLOPE);
        prop_assert!(map.sup_deviation() <= eps / 2.0 + 1e-12);
    }

    #[test]
    fn collapse_limit_is_a_point(pts in points(8, 2), depth in 1usize..5, t in any::<prop::sample::Index>()) {
        let m = FiniteMetricSpace::euclidean(&pts).unwrap();
        let target = t.index(m.len());
        let s = InverseSystem::collapse(m, depth, target).unwrap();
        let (space, idx) = s.stable_thread_space();
        prop_assert_eq!(idx, vec![target]);
        prop_assert_eq!(space.diameter(), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn crooked_outputs_are_certified(units in 0.3f64..6.0, eps_k in 2u32..5, slack in 1.0f64..1.5) {
        let eps = 0.5f64.powi(eps_k as i32);
        let cod = units * eps;
        let dom = min_domain(cod, eps).unwrap() * slack;
        let h = build_crooked(dom, cod, eps).unwrap();
        prop_assert!(check_crooked(&h, eps, eps / 8.0).unwrap().pass);
        prop_assert!(h.lipschitz() <= 1.0 + 1e-12);
        let vals: Vec<f64> = h.breakpoints().iter().map(|p| p.1).collect();
        prop_assert_eq!(vals[0], 0.0);
        prop_assert!((vals.iter().cloned().fold(0.0, f64::max) - cod).abs() < 1e-12);
    }

    #[test]
    fn towers_are_path_isometric_and_retract(base in 0.05f64..0.4, depth in 1usize..5) {
        let g = match gamma_tower(depth, base) {
            Ok(g) if g.graph().vertex_count() < 3000 => g,
            _ => return Ok(()),
        };
        prop_assert!(path_isometry_check(&g).pass);
        for n in 2..=depth {
            prop_assert!(retraction_check(&g, n).unwrap().short);
        }
        if g.graph().vertex_count() < 60 {
            let p = build_gamma_product(&g, 1 << 14).unwrap();
            prop_assert!(p.projections_short(&g));
            prop_assert!(product_probe(&p, &g).lower_holds);
        }
    }

    #[test]
    fn cube_tower_psi_is_exact(pts in prop::collection::vec(0.0f64..1.0, 20..60)) {
        // a 1/64 grid keeps every level connected
        let mut xs: Vec<f64> = (0..=64).map(|k| k as f64 / 64.0).chain(pts).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let space = FiniteMetricSpace::on_line(&xs).unwrap();
        let gap = xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        let s = SampleWithMap::new(space, EuclideanMap::from_values(xs.clone()), gap).unwrap();
        let t = CubeTower::build(&s, &[1, 2, 3]).unwrap();
        prop_assert_eq!(t.psi_identity_error(&s), 0.0);
        prop_assert!(t.psi_compatibility_failures().unwrap().is_empty());
    }
}

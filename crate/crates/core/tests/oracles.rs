//! Library results against slow, independent reimplementations.

use intriso_core::crooked::{build_crooked, build_gamma_product, check_crooked, gamma_tower, CrookedMap, GammaGraph};
use intriso_core::cubecomplex::{covered_cubes, LevelConfig, SampleWithMap};
use intriso_core::inverselimit::InverseSystem;
use intriso_core::metric::{graph_metric, midpoint_check};
use intriso_core::pack::pack_exact;
use intriso_core::pullback::{lemma_check, ChainGraph, PullValue};
use intriso_core::{EuclideanMap, FiniteMetricSpace, MetricGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_graph(r: &mut ChaCha8Rng, n: usize, extra: usize) -> MetricGraph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((r.gen_range(0..v), v, r.gen_range(0.1..1.0)));
    }
    for _ in 0..extra {
        let (a, b) = (r.gen_range(0..n), r.gen_range(0..n));
        if a != b {
            edges.push((a, b, r.gen_range(0.1..1.0)));
        }
    }
    MetricGraph::unlabeled(n, edges).unwrap()
}

fn floyd_warshall(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(u, v, w) in edges {
        d[u][v] = d[u][v].min(w);
        d[v][u] = d[v][u].min(w);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

fn random_plane(r: &mut ChaCha8Rng, n: usize) -> FiniteMetricSpace {
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![r.gen_range(0.0..1.0), r.gen_range(0.0..1.0)])
        .collect();
    FiniteMetricSpace::euclidean(&pts).unwrap()
}

#[test]
#[allow(clippy::needless_range_loop)]
fn graph_metric_matches_floyd_warshall() {
    let mut r = rng(1);
    for _ in 0..20 {
        let n = r.gen_range(2..30);
        let g = random_graph(&mut r, n, n);
        let m = graph_metric(&g).unwrap();
        let fw = floyd_warshall(n, g.edges());
        for i in 0..n {
            for j in 0..n {
                assert!((m.dist(i, j) - fw[i][j]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn exact_packing_matches_subset_enumeration() {
    let mut r = rng(2);
    for _ in 0..30 {
        let n = r.gen_range(1..13);
        let m = random_plane(&mut r, n);
        let eps = r.gen_range(0.05..0.6);
        let mut best = 0;
        for mask in 1u32..(1 << n) {
            let idx: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            let ok = idx
                .iter()
                .enumerate()
                .all(|(a, &i)| idx[a + 1..].iter().all(|&j| m.dist(i, j) > eps));
            if ok {
                best = best.max(idx.len());
            }
        }
        assert_eq!(pack_exact(&m, eps).unwrap().count, best);
    }
}

#[test]
fn pull_matches_floyd_warshall_on_chain_graph() {
    let mut r = rng(3);
    for _ in 0..15 {
        let n = r.gen_range(2..25);
        let m = random_plane(&mut r, n);
        let vals: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let f = EuclideanMap::from_values(vals.clone());
        let eps = r.gen_range(0.15..0.5);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if m.dist(i, j) <= eps {
                    edges.push((i, j, (vals[i] - vals[j]).abs()));
                }
            }
        }
        let fw = floyd_warshall(n, &edges);
        let pm = ChainGraph::new(&m, &f, eps).unwrap().pull_matrix();
        for i in 0..n {
            for j in 0..n {
                match pm[i][j] {
                    PullValue::Infinite => assert!(fw[i][j].is_infinite()),
                    PullValue::Finite(v) => assert!((v - fw[i][j]).abs() < 1e-12),
                }
            }
        }
    }
}

#[test]
fn threads_match_product_filter() {
    let mut r = rng(4);
    for _ in 0..20 {
        let depth = r.gen_range(1..4);
        let sizes: Vec<usize> = (0..=depth).map(|_| r.gen_range(1..6)).collect();
        // the discrete metric makes every map short
        let levels: Vec<FiniteMetricSpace> = sizes
            .iter()
            .map(|&s| FiniteMetricSpace::from_fn(s, |i, j| if i == j { 0.0 } else { 1.0 }).unwrap())
            .collect();
        let bonding: Vec<Vec<usize>> = (0..depth)
            .map(|k| (0..sizes[k + 1]).map(|_| r.gen_range(0..sizes[k])).collect())
            .collect();
        let sys = InverseSystem::new(levels, bonding.clone()).unwrap();
        let got: BTreeSet<Vec<usize>> = sys.threads().into_iter().map(|t| t.indices).collect();
        let mut want = BTreeSet::new();
        let total: usize = sizes.iter().product();
        for code in 0..total {
            let mut rest = code;
            let tuple: Vec<usize> = sizes
                .iter()
                .map(|&s| {
                    let x = rest % s;
                    rest /= s;
                    x
                })
                .collect();
            if (0..depth).all(|k| bonding[k][tuple[k + 1]] == tuple[k]) {
                want.insert(tuple);
            }
        }
        assert_eq!(got, want);
    }
}

#[test]
fn covered_cubes_match_lattice_scan() {
    let mut r = rng(5);
    for _ in 0..10 {
        let n = r.gen_range(1..40);
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)])
            .collect();
        let space = FiniteMetricSpace::euclidean(&pts).unwrap();
        let s = SampleWithMap::new(space, EuclideanMap::from_points(&pts).unwrap(), 0.1).unwrap();
        for level in 0..4 {
            let a = LevelConfig::new(level).side;
            let mut want = Vec::new();
            let reach = (1.0 / a) as i64 + 1;
            for i in -reach..=reach {
                for j in -reach..=reach {
                    let inside = pts.iter().any(|p| {
                        let (x, y) = (p[0] / a, p[1] / a);
                        x >= i as f64 && x < (i + 1) as f64 && y >= j as f64 && y < (j + 1) as f64
                    });
                    if inside {
                        want.push(vec![i, j]);
                    }
                }
            }
            assert_eq!(covered_cubes(&s, level), want);
        }
    }
}

#[test]
fn midpoint_check_matches_scan() {
    let mut r = rng(6);
    for _ in 0..30 {
        let n = r.gen_range(2..15);
        let m = random_plane(&mut r, n);
        let eps = r.gen_range(0.0..0.3);
        let want = (0..n).all(|i| {
            (0..n).all(|j| {
                let half = m.dist(i, j) / 2.0 + eps + 1e-9;
                (0..n).any(|z| m.dist(i, z) <= half && m.dist(z, j) <= half)
            })
        });
        assert_eq!(midpoint_check(&m, eps).holds, want);
    }
}

#[test]
fn lemma_holds_on_random_trials() {
    let mut r = rng(7);
    for _ in 0..40 {
        let n = r.gen_range(2..20);
        let m = random_plane(&mut r, n);
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![r.gen_range(0.0..1.0), r.gen_range(0.0..1.0)])
            .collect();
        let f = EuclideanMap::from_points(&pts).unwrap();
        let delta = r.gen_range(0.01..0.2);
        let moved: Vec<Vec<f64>> = pts
            .iter()
            .map(|p| {
                let t = r.gen_range(0.0..std::f64::consts::TAU);
                let s = r.gen_range(0.0..0.99) * delta;
                vec![p[0] + s * t.cos(), p[1] + s * t.sin()]
            })
            .collect();
        let h = EuclideanMap::from_points(&moved).unwrap();
        let eps = r.gen_range(0.1..0.6);
        let rep = lemma_check(&m, &f, &h, eps, delta).unwrap();
        assert!(rep.holds, "slack {}", rep.min_slack);
    }
}

/// Crookedness by direct search over all grid quadruples.
fn brute_crooked(h: &CrookedMap, eps: f64, g: f64) -> bool {
    let n = (h.domain() / g).round() as usize;
    let v: Vec<f64> = (0..=n).map(|k| h.eval(k as f64 * g)).collect();
    let tol = eps + 1e-12;
    for i in 0..=n {
        for j in i + 1..=n {
            if (v[i] - v[j]).abs() <= 2.0 * eps + 1e-12 {
                continue;
            }
            let found =
                (i + 1..j).any(|k| (v[k] - v[j]).abs() <= tol && (k + 1..j).any(|l| (v[l] - v[i]).abs() <= tol));
            if !found {
                return false;
            }
        }
    }
    true
}

#[test]
fn crookedness_scan_matches_brute_force() {
    let mut r = rng(8);
    let eps = 0.25;
    let g = eps / 8.0;
    let mut outcomes = [0usize; 2];
    for _ in 0..60 {
        // random walk on the grid, one grid step per step
        let steps = r.gen_range(40..120);
        let mut vals = vec![0i64];
        for _ in 0..steps {
            let last = *vals.last().unwrap();
            vals.push(if r.gen_bool(0.55) { last + 1 } else { (last - 1).max(0) });
        }
        let top = *vals.iter().max().unwrap() as f64;
        if top == 0.0 {
            continue;
        }
        let mut bps: Vec<(f64, f64)> = Vec::new();
        for (k, &v) in vals.iter().enumerate() {
            bps.push((k as f64 * g, v as f64 * g));
        }
        let h = CrookedMap::from_breakpoints(top * g, eps, bps).unwrap();
        let fast = check_crooked(&h, eps, g).unwrap().pass;
        assert_eq!(fast, brute_crooked(&h, eps, g));
        outcomes[fast as usize] += 1;
    }
    assert!(outcomes[0] > 0 && outcomes[1] > 0, "{outcomes:?}");
    for cod in [0.5, 1.0, 1.5] {
        let dom = intriso_core::crooked::min_domain(cod, eps).unwrap();
        let h = build_crooked(dom, cod, eps).unwrap();
        assert!(brute_crooked(&h, eps, g));
    }
}

/// Vertex sets of the tower rebuilt from the breakpoint lists, deepest first.
fn oracle_levels(g: &GammaGraph) -> Vec<Vec<f64>> {
    let n = g.depth();
    let mut levels = vec![Vec::new(); n];
    for k in (0..n).rev() {
        let len = g.lengths()[k];
        let mut pts = vec![0.0, len];
        if k >= 1 {
            pts.extend(g.maps()[k - 1].breakpoints().iter().map(|p| p.0));
        }
        if k + 1 < n {
            let h = &g.maps()[k];
            pts.extend(levels[k + 1].iter().map(|&t| h.eval(t)));
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let cap = 0.5f64.powi(k as i32 + 1);
        let mut out = vec![pts[0]];
        for w in pts.windows(2) {
            let pieces = ((w[1] - w[0]) / cap - 1e-9).ceil().max(1.0) as usize;
            for s in 1..=pieces {
                out.push(w[0] + (w[1] - w[0]) * s as f64 / pieces as f64);
            }
        }
        levels[k] = out;
    }
    levels
}

#[test]
fn gamma_counts_match_breakpoint_oracle() {
    let g = gamma_tower(3, 0.375).unwrap();
    let levels = oracle_levels(&g);
    let verts: usize = levels.iter().map(Vec::len).sum();
    let path_edges: usize = levels.iter().map(|l| l.len() - 1).sum();
    let joins: usize = levels[1..].iter().map(Vec::len).sum();
    assert_eq!(g.graph().vertex_count(), verts);
    assert_eq!(g.graph().edges().len(), path_edges + joins);
    for (n, l) in levels.iter().enumerate() {
        assert_eq!(g.coords(n + 1).len(), l.len());
    }
}

#[test]
fn product_edge_count_matches_formula() {
    let g = gamma_tower(3, 0.375).unwrap();
    let p = build_gamma_product(&g, 1 << 16).unwrap();
    let mut want = 0usize;
    for n in 1..=g.depth() {
        let m = g.coords(n).len();
        // each path vertex can move to its neighbours or stay
        let moves: usize = (0..m).map(|k| 1 + (k > 0) as usize + (k + 1 < m) as usize).sum();
        want += (moves * moves - m * m) / 2;
        if n >= 2 {
            want += m * m;
        }
    }
    assert_eq!(p.graph.edges().len(), want);
    assert_eq!(
        p.graph.vertex_count(),
        (1..=g.depth()).map(|n| g.coords(n).len().pow(2)).sum::<usize>()
    );
}

//! Randomised inputs for the experiment drivers. Every generator takes the
//! caller's stream, so inputs are fixed by the run seed.

use intriso_core::metric::graph_metric;
use intriso_core::{EuclideanMap, FiniteMetricSpace, MetricGraph};
use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::io::{MapFile, SpaceFile};

/// A generated space with the description needed to reproduce it.
#[derive(Debug, Clone)]
pub struct Instance {
    pub space: FiniteMetricSpace,
    pub file: SpaceFile,
}

impl Instance {
    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }
}

/// Uniform points in `[0, 1]^dim`.
pub fn random_points(rng: &mut impl Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect()).collect()
}

/// Random tree on `edges + 1` vertices with lengths drawn from `lo..hi`.
/// Vertex `k` hangs off a uniformly chosen earlier vertex.
pub fn random_tree(rng: &mut impl Rng, edges: usize, lo: f64, hi: f64) -> Result<MetricGraph> {
    let list = (1..=edges)
        .map(|v| (rng.gen_range(0..v), v, rng.gen_range(lo..hi)))
        .collect();
    Ok(MetricGraph::unlabeled(edges + 1, list)?)
}

/// Random tree plus `extra` chords between distinct vertices.
pub fn random_graph(rng: &mut impl Rng, edges: usize, extra: usize, lo: f64, hi: f64) -> Result<MetricGraph> {
    let tree = random_tree(rng, edges, lo, hi)?;
    let n = tree.vertex_count();
    let mut list = tree.edges().to_vec();
    while list.len() < edges + extra && n > 2 {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            list.push((u.min(v), u.max(v), rng.gen_range(lo..hi)));
        }
    }
    Ok(MetricGraph::unlabeled(n, list)?)
}

/// Either Euclidean points in dimension 1 to 3 or the metric of a random
/// graph, with `n` points.
pub fn random_space(rng: &mut impl Rng, n: usize) -> Result<Instance> {
    if n >= 3 && rng.gen_bool(0.3) {
        let g = random_graph(rng, n - 1, n / 4, 0.05, 0.5)?;
        let space = graph_metric(&g)?;
        return Ok(Instance {
            space,
            file: SpaceFile::from_graph(&g),
        });
    }
    let dim = rng.gen_range(1..=3);
    let pts = random_points(rng, n, dim);
    Ok(Instance {
        space: FiniteMetricSpace::euclidean(&pts)?,
        file: SpaceFile::from_points(&pts),
    })
}

/// Arbitrary (not necessarily short) map with coordinates in `[-1, 1]`.
pub fn random_map(rng: &mut impl Rng, n: usize, dim: usize) -> EuclideanMap {
    let coords = (0..n * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    EuclideanMap::new(dim, coords).expect("length is a multiple of dim")
}

/// `f` moved at each point by a random vector of length below `delta`.
pub fn perturb(rng: &mut impl Rng, f: &EuclideanMap, delta: f64) -> EuclideanMap {
    let d = f.dim();
    let mut coords = f.coords().to_vec();
    for p in coords.chunks_mut(d) {
        let dir: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
        let r = rng.gen_range(0.0..0.99) * delta;
        for (x, u) in p.iter_mut().zip(&dir) {
            *x += r * u / norm;
        }
    }
    EuclideanMap::new(d, coords).expect("dimension unchanged")
}

/// Short values on a graph: a random walk down a tree, or `λ·d(root, v)`
/// when the graph has cycles.
pub fn short_values(rng: &mut impl Rng, g: &MetricGraph) -> Result<Vec<f64>> {
    let n = g.vertex_count();
    if g.edges().len() + 1 == n {
        let mut vals = vec![0.0; n];
        // generated trees list each edge after its parent's
        for &(p, v, len) in g.edges() {
            vals[v] = vals[p] + rng.gen_range(-1.0..1.0) * len;
        }
        return Ok(vals);
    }
    let lambda = rng.gen_range(0.0..1.0);
    Ok(g.adjacency().dijkstra(0).into_iter().map(|d| lambda * d).collect())
}

/// `n` equally spaced points on `[0, 1]` with the identity map.
pub fn segment(n: usize) -> (FiniteMetricSpace, EuclideanMap, f64) {
    let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let space = FiniteMetricSpace::on_line(&xs).expect("below the dense cap");
    (space, EuclideanMap::from_values(xs), 1.0 / (n - 1) as f64)
}

/// `n` equally spaced points on the unit circle with arc-length metric,
/// embedded in the plane.
pub fn circle(n: usize) -> (FiniteMetricSpace, EuclideanMap, f64) {
    let step = std::f64::consts::TAU / n as f64;
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let a = step * i as f64;
            vec![a.cos(), a.sin()]
        })
        .collect();
    let space = FiniteMetricSpace::from_fn(n, |i, j| {
        let k = i.abs_diff(j);
        k.min(n - k) as f64 * step
    })
    .expect("below the dense cap");
    (space, EuclideanMap::from_points(&pts).expect("uniform dimension"), step)
}

/// A `k × k` grid on the unit square with the identity map.
pub fn square(k: usize) -> (FiniteMetricSpace, EuclideanMap, f64) {
    let pts: Vec<Vec<f64>> = (0..k * k)
        .map(|i| vec![(i % k) as f64 / (k - 1) as f64, (i / k) as f64 / (k - 1) as f64])
        .collect();
    let space = FiniteMetricSpace::euclidean(&pts).expect("below the dense cap");
    (
        space,
        EuclideanMap::from_points(&pts).expect("uniform dimension"),
        1.0 / (k - 1) as f64,
    )
}

/// Serialisable record of a generated space and map.
#[derive(Debug, Clone, Serialize)]
pub struct InstanceRecord {
    pub space: SpaceFile,
    pub map: MapFile,
}

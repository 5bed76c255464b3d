//! Finite metric spaces, metric graphs and maps between samples.
//!
//! A [`FiniteMetricSpace`] stores a full symmetric distance matrix and is the
//! universal sample representation. A [`MetricGraph`] carries weighted edges
//! and induces its shortest-path metric; above [`DENSE_CAP`] vertices the
//! graph is queried row by row instead of being materialized.
//!
//! Construction never silently fixes a bad matrix: [`FiniteMetricSpace::from_rows`]
//! only checks the shape, and [`FiniteMetricSpace::validate`] lists every
//! violated axiom. Thread spaces of collapsing towers are legitimately
//! pseudo-metric, so they are built through the same constructor.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{Adjacency, UnionFind};
use crate::{Error, Result};

/// Absolute tolerance for every metric comparison.
pub const TOL_METRIC: f64 = 1e-9;

/// Largest number of points stored as a dense matrix.
pub const DENSE_CAP: usize = 4096;

/// Anything that can hand out rows of its distance matrix.
pub trait MetricSource {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Distances from `i` to every point.
    fn distances_from(&self, i: usize) -> Vec<f64>;

    /// Points `j != i` with `dist(i, j) <= radius`, with their distances.
    fn neighbors_within(&self, i: usize, radius: f64) -> Vec<(usize, f64)>;

    /// Smallest distance between two distinct points (`+∞` for fewer than two).
    fn min_positive_distance(&self) -> f64;
}

/// `n` labelled points with a dense distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Vec<f64>,
}

impl FiniteMetricSpace {
    /// Builds a space from matrix rows. Only the shape is checked.
    pub fn from_rows(labels: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        check_square(rows)?;
        if labels.len() != n {
            return Err(Error::LabelCount {
                labels: labels.len(),
                points: n,
            });
        }
        if n > DENSE_CAP {
            return Err(Error::TooLarge {
                what: "distance matrix",
                n,
                cap: DENSE_CAP,
            });
        }
        let dist = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Ok(FiniteMetricSpace { labels, dist })
    }

    /// Builds a space with labels `p0, p1, …` from a distance function.
    pub fn from_fn(n: usize, mut d: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if n > DENSE_CAP {
            return Err(Error::TooLarge {
                what: "distance matrix",
                n,
                cap: DENSE_CAP,
            });
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = d(i, j);
            }
        }
        Ok(FiniteMetricSpace {
            labels: default_labels(n),
            dist,
        })
    }

    /// Euclidean distances between the given points.
    pub fn euclidean(points: &[Vec<f64>]) -> Result<Self> {
        Self::from_fn(points.len(), |i, j| euclidean_distance(&points[i], &points[j]))
    }

    /// Points on the real line.
    pub fn on_line(xs: &[f64]) -> Result<Self> {
        Self::from_fn(xs.len(), |i, j| (xs[i] - xs[j]).abs())
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::LabelCount {
                labels: labels.len(),
                points: self.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.dist[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Diameter of a subset given by indices.
    pub fn subset_diameter(&self, idx: &[usize]) -> f64 {
        let mut best = 0.0f64;
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                best = best.max(self.dist(i, j));
            }
        }
        best
    }

    /// The subspace on `idx`, in that order.
    pub fn restrict(&self, idx: &[usize]) -> Self {
        let n = idx.len();
        let mut dist = vec![0.0; n * n];
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                dist[a * n + b] = self.dist(i, j);
            }
        }
        FiniteMetricSpace {
            labels: idx.iter().map(|&i| self.labels[i].clone()).collect(),
            dist,
        }
    }

    /// Lists every violated metric axiom.
    pub fn validate(&self) -> ValidationReport {
        let n = self.len();
        scan_axioms(n, |i, j| self.dist(i, j))
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        check_index(i, self.len())
    }
}

impl MetricSource for FiniteMetricSpace {
    fn len(&self) -> usize {
        self.labels.len()
    }

    fn distances_from(&self, i: usize) -> Vec<f64> {
        self.row(i).to_vec()
    }

    fn neighbors_within(&self, i: usize, radius: f64) -> Vec<(usize, f64)> {
        self.row(i)
            .iter()
            .enumerate()
            .filter(|&(j, &d)| j != i && d <= radius)
            .map(|(j, &d)| (j, d))
            .collect()
    }

    fn min_positive_distance(&self) -> f64 {
        let n = self.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.min(self.dist(i, j));
            }
        }
        best
    }
}

/// One violated metric axiom.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NotFinite {
        i: usize,
        j: usize,
    },
    Diagonal {
        i: usize,
        value: f64,
    },
    Asymmetric {
        i: usize,
        j: usize,
    },
    /// `dist(i, j) <= 0` for `i != j`.
    NonPositive {
        i: usize,
        j: usize,
        value: f64,
    },
    /// `dist(i, j) > dist(i, k) + dist(k, j) + TOL_METRIC`.
    Triangle {
        i: usize,
        j: usize,
        k: usize,
        excess: f64,
    },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks raw matrix rows: a non-square matrix is a structural error, any
/// axiom failure is listed in the report.
pub fn validate_metric(rows: &[Vec<f64>]) -> Result<ValidationReport> {
    check_square(rows)?;
    Ok(scan_axioms(rows.len(), |i, j| rows[i][j]))
}

fn scan_axioms(n: usize, d: impl Fn(usize, usize) -> f64) -> ValidationReport {
    let mut violations = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if !d(i, j).is_finite() {
                violations.push(Violation::NotFinite { i, j });
            }
        }
    }
    if !violations.is_empty() {
        return ValidationReport { violations };
    }
    for i in 0..n {
        if d(i, i) != 0.0 {
            violations.push(Violation::Diagonal { i, value: d(i, i) });
        }
        for j in (i + 1)..n {
            if d(i, j) != d(j, i) {
                violations.push(Violation::Asymmetric { i, j });
            }
            if d(i, j) <= 0.0 {
                violations.push(Violation::NonPositive { i, j, value: d(i, j) });
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = d(i, j);
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let excess = dij - (d(i, k) + d(k, j));
                if excess > TOL_METRIC {
                    violations.push(Violation::Triangle { i, j, k, excess });
                }
            }
        }
    }
    ValidationReport { violations }
}

fn check_square(rows: &[Vec<f64>]) -> Result<()> {
    let n = rows.len();
    for (row, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(Error::NonSquare {
                row,
                len: r.len(),
                expected: n,
            });
        }
    }
    Ok(())
}

pub(crate) fn check_index(i: usize, len: usize) -> Result<()> {
    if i < len {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index: i, len })
    }
}

pub(crate) fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() == 1 {
        return (a[0] - b[0]).abs();
    }
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Weighted undirected graph with its induced shortest-path metric.
#[derive(Debug, Clone)]
pub struct MetricGraph {
    labels: Vec<String>,
    edges: Vec<(usize, usize, f64)>,
    adj: Adjacency,
}

impl MetricGraph {
    pub fn new(labels: Vec<String>, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let n = labels.len();
        for (edge, &(u, v, len)) in edges.iter().enumerate() {
            let reason = if u >= n || v >= n {
                Some("endpoint out of range")
            } else if u == v {
                Some("self-loop")
            } else if !(len > 0.0 && len.is_finite()) {
                Some("length must be positive and finite")
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(Error::InvalidEdge { edge, u, v, reason });
            }
        }
        let adj = Adjacency::from_edges(n, edges.iter().copied());
        Ok(MetricGraph { labels, edges, adj })
    }

    /// Unlabelled graph with labels `v0, v1, …`.
    pub fn unlabeled(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        Self::new((0..n).map(|i| format!("v{i}")).collect(), edges)
    }

    /// Path graph `v0 – v1 – …` with the given edge lengths.
    pub fn path(lengths: &[f64]) -> Result<Self> {
        let edges = lengths.iter().enumerate().map(|(i, &l)| (i, i + 1, l)).collect();
        Self::unlabeled(lengths.len() + 1, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adj
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adj.neighbors(v)
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        self.adj.components()
    }

    /// Errors with two vertices from different components when disconnected.
    pub fn check_connected(&self) -> Result<()> {
        let comps = self.components();
        if comps.len() > 1 {
            return Err(Error::Disconnected {
                a: self.labels[comps[0][0]].clone(),
                b: self.labels[comps[1][0]].clone(),
            });
        }
        Ok(())
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }
}

impl MetricSource for MetricGraph {
    fn len(&self) -> usize {
        self.labels.len()
    }

    fn distances_from(&self, i: usize) -> Vec<f64> {
        self.adj.dijkstra(i)
    }

    fn neighbors_within(&self, i: usize, radius: f64) -> Vec<(usize, f64)> {
        self.adj
            .dijkstra_multi(&[(i, 0.0)], radius)
            .into_iter()
            .enumerate()
            .filter(|&(j, d)| j != i && d <= radius)
            .collect()
    }

    fn min_positive_distance(&self) -> f64 {
        self.edges.iter().map(|e| e.2).fold(f64::INFINITY, f64::min)
    }
}

/// All-pairs shortest-path metric of a connected graph.
pub fn graph_metric(g: &MetricGraph) -> Result<FiniteMetricSpace> {
    g.check_connected()?;
    let n = g.vertex_count();
    if n > DENSE_CAP {
        return Err(Error::TooLarge {
            what: "graph metric",
            n,
            cap: DENSE_CAP,
        });
    }
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        let row = g.adj.dijkstra(i);
        dist[i * n..(i + 1) * n].copy_from_slice(&row);
    }
    // Dijkstra from i and from j may round differently
    for i in 0..n {
        for j in (i + 1)..n {
            let m = dist[i * n + j].min(dist[j * n + i]);
            dist[i * n + j] = m;
            dist[j * n + i] = m;
        }
    }
    Ok(FiniteMetricSpace {
        labels: g.labels.clone(),
        dist,
    })
}

/// Where a vertex of a subdivided graph came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VertexOrigin {
    Original(usize),
    /// `index`-th interior point of `edge`, at arclength `t` from its first endpoint.
    OnEdge {
        edge: usize,
        index: usize,
        t: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Subdivision {
    pub graph: MetricGraph,
    pub origin: Vec<VertexOrigin>,
    /// Number of pieces each original edge was cut into.
    pub pieces: Vec<usize>,
}

/// Number of equal pieces `⌈len/h⌉` (at least one) for an edge.
pub fn piece_count(len: f64, h: f64) -> usize {
    // 1.0 / 0.1 style quotients land a hair above the integer
    (libm::ceil(len / h - 1e-9) as usize).max(1)
}

/// Replaces each edge of length `ℓ` by `⌈ℓ/h⌉` equal sub-edges. Original
/// vertices keep their indices; new vertices are labelled `e{edge}:{index}`.
pub fn subdivide(g: &MetricGraph, h: f64) -> Result<MetricGraph> {
    subdivide_traced(g, h).map(|s| s.graph)
}

pub fn subdivide_traced(g: &MetricGraph, h: f64) -> Result<Subdivision> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "h",
            value: h,
            reason: "must be positive",
        });
    }
    let mut labels = g.labels.clone();
    let mut origin: Vec<VertexOrigin> = (0..g.vertex_count()).map(VertexOrigin::Original).collect();
    let mut edges = Vec::new();
    let mut pieces = Vec::with_capacity(g.edges.len());
    for (e, &(u, v, len)) in g.edges.iter().enumerate() {
        let k = piece_count(len, h);
        pieces.push(k);
        let step = len / k as f64;
        let mut prev = u;
        for index in 1..k {
            let id = labels.len();
            labels.push(format!("e{e}:{index}"));
            origin.push(VertexOrigin::OnEdge {
                edge: e,
                index,
                t: step * index as f64,
            });
            edges.push((prev, id, step));
            prev = id;
        }
        edges.push((prev, v, step));
    }
    Ok(Subdivision {
        graph: MetricGraph::new(labels, edges)?,
        origin,
        pieces,
    })
}

/// Outcome of the approximate-midpoint test.
#[derive(Debug, Clone, PartialEq)]
pub struct MidpointReport {
    pub holds: bool,
    /// Worst pair and its defect: `min_z max(d(x,z), d(z,x')) − d(x,x')/2 − ε`.
    pub worst: Option<(usize, usize, f64)>,
}

/// Checks that every pair has an `ε`-approximate midpoint in the sample.
pub fn midpoint_check(m: &FiniteMetricSpace, eps: f64) -> MidpointReport {
    let n = m.len();
    let mut worst: Option<(usize, usize, f64)> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            let half = m.dist(i, j) / 2.0;
            let best = (0..n)
                .map(|z| m.dist(i, z).max(m.dist(z, j)))
                .fold(f64::INFINITY, f64::min);
            let defect = best - half - eps;
            if worst.is_none_or(|w| defect > w.2) {
                worst = Some((i, j, defect));
            }
        }
    }
    MidpointReport {
        holds: worst.is_none_or(|w| w.2 <= TOL_METRIC),
        worst,
    }
}

/// Half the distortion of a correspondence; an upper bound for the
/// Gromov–Hausdorff distance.
pub fn gh_upper_bound(m1: &FiniteMetricSpace, m2: &FiniteMetricSpace, corr: &[(usize, usize)]) -> Result<f64> {
    let mut seen1 = vec![false; m1.len()];
    let mut seen2 = vec![false; m2.len()];
    for &(a, b) in corr {
        check_index(a, m1.len())?;
        check_index(b, m2.len())?;
        seen1[a] = true;
        seen2[b] = true;
    }
    let left: Vec<usize> = (0..m1.len()).filter(|&i| !seen1[i]).collect();
    let right: Vec<usize> = (0..m2.len()).filter(|&i| !seen2[i]).collect();
    if !left.is_empty() || !right.is_empty() {
        return Err(Error::NotCovering { left, right });
    }
    let mut distortion = 0.0f64;
    for (k, &(a, b)) in corr.iter().enumerate() {
        for &(a2, b2) in &corr[k + 1..] {
            distortion = distortion.max((m1.dist(a, a2) - m2.dist(b, b2)).abs());
        }
    }
    Ok(distortion / 2.0)
}

/// Anything that assigns each source point an image with a distance.
pub trait PointMap {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn image_distance(&self, i: usize, j: usize) -> f64;
}

/// Map into `ℝ^d`, stored as `d` coordinates per source point.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanMap {
    dim: usize,
    coords: Vec<f64>,
}

impl EuclideanMap {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidParameter {
                name: "dim",
                value: dim as f64,
                reason: "coordinate count must be a positive multiple of the dimension",
            });
        }
        Ok(EuclideanMap { dim, coords })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map_or(1, |p| p.len());
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: bad.len(),
            });
        }
        Self::new(dim, points.iter().flatten().copied().collect())
    }

    /// Real-valued map.
    pub fn from_values(values: Vec<f64>) -> Self {
        EuclideanMap { dim: 1, coords: values }
    }

    pub fn constant(n: usize, point: &[f64]) -> Self {
        EuclideanMap {
            dim: point.len(),
            coords: (0..n).flat_map(|_| point.iter().copied()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks(self.dim)
    }

    /// Largest pointwise distance between two maps.
    pub fn sup_distance(&self, other: &EuclideanMap) -> Result<(usize, f64)> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        if self.len() != other.len() {
            return Err(Error::MapSize {
                got: other.len(),
                expected: self.len(),
            });
        }
        let mut worst = (0, 0.0f64);
        for i in 0..self.len() {
            let d = euclidean_distance(self.point(i), other.point(i));
            if d > worst.1 {
                worst = (i, d);
            }
        }
        Ok(worst)
    }
}

impl PointMap for EuclideanMap {
    fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    fn image_distance(&self, i: usize, j: usize) -> f64 {
        euclidean_distance(self.point(i), self.point(j))
    }
}

/// Map into another finite sample, by point index.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexMap {
    pub image: Vec<usize>,
    pub target_len: usize,
}

impl IndexMap {
    pub fn new(image: Vec<usize>, target_len: usize) -> Result<Self> {
        for &t in &image {
            check_index(t, target_len)?;
        }
        Ok(IndexMap { image, target_len })
    }

    /// Pairs the map with its target metric so that it can be pulled back.
    pub fn into_space<'a>(&'a self, target: &'a FiniteMetricSpace) -> Result<IndexedMap<'a>> {
        if target.len() != self.target_len {
            return Err(Error::MapSize {
                got: target.len(),
                expected: self.target_len,
            });
        }
        Ok(IndexedMap { map: self, target })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IndexedMap<'a> {
    map: &'a IndexMap,
    target: &'a FiniteMetricSpace,
}

impl PointMap for IndexedMap<'_> {
    fn len(&self) -> usize {
        self.map.image.len()
    }

    fn image_distance(&self, i: usize, j: usize) -> f64 {
        self.target.dist(self.map.image[i], self.map.image[j])
    }
}

/// Either kind of map, as stored in map files.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceMap {
    Euclidean(EuclideanMap),
    Index(IndexMap),
}

impl SpaceMap {
    pub fn len(&self) -> usize {
        match self {
            SpaceMap::Euclidean(m) => m.len(),
            SpaceMap::Index(m) => m.image.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Verifies `|f(x)f(x')| <= |xx'| + TOL_METRIC` for all pairs.
pub fn check_short<M: MetricSource + ?Sized, F: PointMap + ?Sized>(source: &M, f: &F) -> Result<()> {
    if f.len() != source.len() {
        return Err(Error::MapSize {
            got: f.len(),
            expected: source.len(),
        });
    }
    for i in 0..source.len() {
        let row = source.distances_from(i);
        for (j, &d) in row.iter().enumerate().skip(i + 1) {
            let image = f.image_distance(i, j);
            if image > d + TOL_METRIC {
                return Err(Error::NotShort { i, j, image, base: d });
            }
        }
    }
    Ok(())
}

/// Components of a sample under `ε`-chain connectivity (`dist <= ε`).
pub fn chain_components<M: MetricSource + ?Sized>(m: &M, eps: f64) -> Vec<Vec<usize>> {
    let n = m.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for (j, _) in m.neighbors_within(i, eps + crate::pullback::CHAIN_TIE_TOL) {
            uf.union(i, j);
        }
    }
    uf.groups()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn labels(n: usize) -> Vec<String> {
        default_labels(n)
    }

    #[test]
    fn two_point_space_is_valid() {
        let rows = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!(validate_metric(&rows).unwrap().is_valid());
    }

    #[test]
    fn long_side_breaks_triangle() {
        let rows = vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]];
        let report = validate_metric(&rows).unwrap();
        assert_eq!(report.violations.len(), 1);
        match report.violations[0] {
            Violation::Triangle { i, j, k, excess } => {
                assert_eq!((i, j, k), (0, 2, 1));
                assert_eq!(excess, 1.0);
            }
            ref v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn ragged_matrix_is_structural_error() {
        let rows = vec![vec![0.0, 1.0], vec![1.0]];
        assert!(matches!(validate_metric(&rows), Err(Error::NonSquare { row: 1, .. })));
    }

    #[test]
    fn other_axioms_reported() {
        let rows = vec![vec![0.5, 1.0], vec![2.0, 0.0]];
        let v = validate_metric(&rows).unwrap().violations;
        assert!(v.contains(&Violation::Diagonal { i: 0, value: 0.5 }));
        assert!(v.contains(&Violation::Asymmetric { i: 0, j: 1 }));
        let rows = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        let v = validate_metric(&rows).unwrap().violations;
        assert_eq!(v, vec![Violation::NonPositive { i: 0, j: 1, value: 0.0 }]);
    }

    #[test]
    fn path_and_triangle_metrics() {
        let g = MetricGraph::path(&[1.0, 1.0]).unwrap();
        let m = graph_metric(&g).unwrap();
        assert_eq!(m.dist(0, 2), 2.0);

        let g = MetricGraph::unlabeled(3, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)]).unwrap();
        let m = graph_metric(&g).unwrap();
        assert_eq!(m.dist(0, 2), 2.0);
        assert!(m.validate().is_valid());
    }

    #[test]
    fn disconnected_graph_names_components() {
        let g = MetricGraph::new(
            vec!["a".to_string(), "b".to_string(), "c".to_string()],
            vec![(0, 1, 1.0)],
        )
        .unwrap();
        assert_eq!(
            graph_metric(&g).unwrap_err(),
            Error::Disconnected {
                a: "a".to_string(),
                b: "c".to_string()
            }
        );
    }

    #[test]
    fn bad_edges_rejected() {
        assert!(MetricGraph::unlabeled(2, vec![(0, 1, 0.0)]).is_err());
        assert!(MetricGraph::unlabeled(2, vec![(0, 0, 1.0)]).is_err());
        assert!(MetricGraph::unlabeled(2, vec![(0, 2, 1.0)]).is_err());
    }

    #[test]
    fn subdivision_uses_ceiling() {
        let g = MetricGraph::path(&[1.0]).unwrap();
        let s = subdivide(&g, 0.25).unwrap();
        assert_eq!(s.edges().len(), 4);
        assert!(s.edges().iter().all(|e| e.2 == 0.25));
        let s = subdivide(&g, 0.3).unwrap();
        assert_eq!(s.edges().len(), 4);
        assert!(s.edges().iter().all(|e| e.2 == 0.25));
        assert_eq!(s.label(2), "e0:1");
        assert!(subdivide(&g, 0.0).is_err());
    }

    #[test]
    fn subdivision_keeps_old_distances() {
        let g = MetricGraph::unlabeled(3, vec![(0, 1, 1.0), (1, 2, 0.7), (0, 2, 1.3)]).unwrap();
        let before = graph_metric(&g).unwrap();
        let after = graph_metric(&subdivide(&g, 0.1).unwrap()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((before.dist(i, j) - after.dist(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn midpoints_on_grid_and_pair() {
        let xs: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let m = FiniteMetricSpace::on_line(&xs).unwrap();
        assert!(midpoint_check(&m, 0.06).holds);

        let m = FiniteMetricSpace::on_line(&[0.0, 1.0]).unwrap();
        let r = midpoint_check(&m, 0.1);
        assert!(!r.holds);
        let (i, j, defect) = r.worst.unwrap();
        assert_eq!((i, j), (0, 1));
        assert!((defect - 0.4).abs() < 1e-12);
    }

    #[test]
    fn gh_bound_examples() {
        let xs: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let m = FiniteMetricSpace::on_line(&xs).unwrap();
        let id: Vec<(usize, usize)> = (0..m.len()).map(|i| (i, i)).collect();
        assert_eq!(gh_upper_bound(&m, &m, &id).unwrap(), 0.0);

        let pt = FiniteMetricSpace::on_line(&[0.0]).unwrap();
        let full: Vec<(usize, usize)> = (0..m.len()).map(|i| (i, 0)).collect();
        assert!((gh_upper_bound(&m, &pt, &full).unwrap() - 0.5).abs() < 1e-15);

        let err = gh_upper_bound(&m, &pt, &[(0, 0)]).unwrap_err();
        match err {
            Error::NotCovering { left, right } => {
                assert_eq!(left.len(), 10);
                assert!(right.is_empty());
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn short_check_names_pair() {
        let m = FiniteMetricSpace::on_line(&[0.0, 1.0, 2.0]).unwrap();
        let f = EuclideanMap::from_values(vec![0.0, 3.0, 2.0]);
        assert!(matches!(check_short(&m, &f), Err(Error::NotShort { i: 0, j: 1, .. })));
        let g = EuclideanMap::from_values(vec![0.0, 0.5, 0.0]);
        check_short(&m, &g).unwrap();
    }

    #[test]
    fn index_map_distances() {
        let target = FiniteMetricSpace::on_line(&[0.0, 2.0]).unwrap();
        let map = IndexMap::new(vec![0, 1, 1], 2).unwrap();
        let f = map.into_space(&target).unwrap();
        assert_eq!(f.image_distance(0, 2), 2.0);
        assert_eq!(f.image_distance(1, 2), 0.0);
        assert!(IndexMap::new(vec![2], 2).is_err());
    }

    #[test]
    fn labels_must_match() {
        let rows = vec![vec![0.0]];
        assert!(FiniteMetricSpace::from_rows(labels(2), &rows).is_err());
    }
}

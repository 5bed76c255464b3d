//! Shortest-path plumbing shared by every module: a compact undirected
//! adjacency, Dijkstra with optional radius cut-off, and union-find.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

/// Undirected weighted adjacency in compressed sparse row layout.
#[derive(Debug, Clone, Default)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
}

impl Adjacency {
    /// Builds the adjacency of `n` vertices from undirected edges.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let edges: Vec<(usize, usize, f64)> = edges.into_iter().collect();
        let mut degree = vec![0usize; n + 1];
        for &(u, v, _) in &edges {
            degree[u + 1] += 1;
            degree[v + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut targets = vec![0usize; 2 * edges.len()];
        let mut weights = vec![0.0; 2 * edges.len()];
        for &(u, v, w) in &edges {
            targets[fill[u]] = v;
            weights[fill[u]] = w;
            fill[u] += 1;
            targets[fill[v]] = u;
            weights[fill[v]] = w;
            fill[v] += 1;
        }
        Adjacency {
            offsets,
            targets,
            weights,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Single-source distances; unreachable vertices get `f64::INFINITY`.
    pub fn dijkstra(&self, source: usize) -> Vec<f64> {
        self.dijkstra_multi(&[(source, 0.0)], f64::INFINITY)
    }

    /// Multi-source Dijkstra. Vertices farther than `radius` are left at
    /// infinity.
    pub fn dijkstra_multi(&self, sources: &[(usize, f64)], radius: f64) -> Vec<f64> {
        let n = self.vertex_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        for &(s, d0) in sources {
            if d0 < dist[s] && d0 <= radius {
                dist[s] = d0;
                heap.push(Entry { dist: d0, vertex: s });
            }
        }
        while let Some(Entry { dist: d, vertex: u }) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for (v, w) in self.neighbors(u) {
                let nd = d + w;
                if nd < dist[v] && nd <= radius {
                    dist[v] = nd;
                    heap.push(Entry { dist: nd, vertex: v });
                }
            }
        }
        dist
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        let mut uf = UnionFind::new(n);
        for u in 0..n {
            for (v, _) in self.neighbors(u) {
                uf.union(u, v);
            }
        }
        uf.groups()
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    dist: f64,
    vertex: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    /// Groups of equivalent elements, each sorted, ordered by smallest member.
    pub fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut slot = vec![usize::MAX; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for x in 0..n {
            let r = self.find(x);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(x);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dijkstra_on_triangle_takes_shortcut() {
        let adj = Adjacency::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)]);
        let d = adj.dijkstra(0);
        assert_eq!(d, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn radius_cutoff_leaves_far_vertices_unreached() {
        let adj = Adjacency::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]);
        let d = adj.dijkstra_multi(&[(0, 0.0)], 1.5);
        assert_eq!(d[1], 1.0);
        assert!(d[2].is_infinite());
    }

    #[test]
    fn components_are_ordered() {
        let adj = Adjacency::from_edges(5, [(3, 4, 1.0), (0, 2, 1.0)]);
        assert_eq!(adj.components(), vec![vec![0, 2], vec![1], vec![3, 4]]);
    }
}

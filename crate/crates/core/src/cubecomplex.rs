//! Cube complexes glued from a sample mapped into `ℝ^d`.
//!
//! At level `n` the lattice of cubes of side `a_n = 2^{-n}` anchored at the
//! origin is laid over the image. For every covered cube the sample points
//! within `r_n = a_n/10` of its preimage split into chain components `W`;
//! each component gets its own copy of the cube. Two copies are glued along
//! the common face of their cubes exactly when their components share a
//! sample point. Each sample point `x` is sent by `ψ_n` to its position
//! `ι(x)` inside the copy of its cube whose component contains it, so
//! `ι_n ∘ ψ_n = ι` holds by construction.
//!
//! Metrics on a complex come from a skeleton: the boundary of every copy is
//! sampled on a fine lattice, the `ψ` points are added, and all nodes of a
//! copy are joined by straight chords. Glued copies share the boundary nodes
//! of their common face.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::graph::UnionFind;
use crate::inverselimit::InverseSystem;
use crate::metric::{check_short, euclidean_distance, MetricGraph, MetricSource, PointMap};
use crate::pullback::CHAIN_TIE_TOL;
use crate::{Error, EuclideanMap, FiniteMetricSpace, Result, TOL_METRIC};

/// Lattice cube: integer coordinates of its lower corner in units of `a_n`.
pub type CubeIndex = Vec<i64>;

/// Side and neighbourhood radius at one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelConfig {
    pub level: u32,
    /// `a_n = 2^{-n}`.
    pub side: f64,
    /// `r_n = a_n / 10`.
    pub radius: f64,
}

impl LevelConfig {
    pub fn new(level: u32) -> Self {
        let side = libm::ldexp(1.0, -(level as i32));
        LevelConfig {
            level,
            side,
            radius: side / 10.0,
        }
    }
}

/// A sample with a short map into `ℝ^d` and the chain scale that stands in
/// for connectedness.
#[derive(Debug, Clone)]
pub struct SampleWithMap {
    space: FiniteMetricSpace,
    map: EuclideanMap,
    chain_scale: f64,
    near: Vec<Vec<usize>>,
}

impl SampleWithMap {
    pub fn new(space: FiniteMetricSpace, map: EuclideanMap, chain_scale: f64) -> Result<Self> {
        if !(chain_scale > 0.0 && chain_scale.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "chain_scale",
                value: chain_scale,
                reason: "must be positive",
            });
        }
        check_short(&space, &map)?;
        let near = (0..space.len())
            .map(|i| {
                space
                    .neighbors_within(i, chain_scale + CHAIN_TIE_TOL)
                    .into_iter()
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        Ok(SampleWithMap {
            space,
            map,
            chain_scale,
            near,
        })
    }

    pub fn space(&self) -> &FiniteMetricSpace {
        &self.space
    }

    pub fn map(&self) -> &EuclideanMap {
        &self.map
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    pub fn chain_scale(&self) -> f64 {
        self.chain_scale
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    /// Chain components of a subset given as a membership mask.
    fn components_of(&self, inside: &[bool]) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for s in 0..n {
            if !inside[s] || seen[s] {
                continue;
            }
            seen[s] = true;
            stack.push(s);
            let mut comp = Vec::new();
            while let Some(u) = stack.pop() {
                comp.push(u);
                for &v in &self.near[u] {
                    if inside[v] && !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// The half-open lattice cube `[k·a, (k+1)·a)` containing `p`.
pub fn cube_of(p: &[f64], side: f64) -> CubeIndex {
    p.iter().map(|&x| libm::floor(x / side) as i64).collect()
}

/// Whether the closed cube `k` contains `p`.
pub fn closed_cube_contains(k: &[i64], side: f64, p: &[f64]) -> bool {
    k.iter().zip(p).all(|(&k, &x)| {
        let lo = k as f64 * side;
        x >= lo && x <= lo + side
    })
}

/// Cubes of the level-`n` lattice assigned to image points under the
/// half-open convention, sorted lexicographically. Their closures cover the
/// image.
pub fn covered_cubes(s: &SampleWithMap, level: u32) -> Vec<CubeIndex> {
    let side = LevelConfig::new(level).side;
    let mut cubes: Vec<CubeIndex> = s.map.points().map(|p| cube_of(p, side)).collect();
    cubes.sort();
    cubes.dedup();
    cubes
}

/// Radius of the neighbourhoods `W` on a sample: `r_n`, but never below the
/// chain scale, since a sample cannot see closer than that. The `r_n` ball
/// is open; the widened one is closed, like chain adjacency.
pub fn effective_radius(s: &SampleWithMap, level: u32) -> f64 {
    LevelConfig::new(level).radius.max(s.chain_scale)
}

/// Components `W` of the `r_n`-neighbourhood of `ι^{-1}(□)` for one cube.
#[derive(Debug, Clone, PartialEq)]
pub struct WComponents {
    pub components: Vec<Vec<usize>>,
    /// Set when the chain scale exceeds `r_n/2`: the sample cannot resolve
    /// the neighbourhood, which is widened to the chain scale, and
    /// components may merge.
    pub coarse: bool,
}

pub fn components_w(s: &SampleWithMap, cube: &[i64], level: u32) -> Result<WComponents> {
    if cube.len() != s.dim() {
        return Err(Error::DimensionMismatch {
            left: s.dim(),
            right: cube.len(),
        });
    }
    let cfg = LevelConfig::new(level);
    let n = s.len();
    let core: Vec<usize> = (0..n)
        .filter(|&x| closed_cube_contains(cube, cfg.side, s.map.point(x)))
        .collect();
    let mut inside = vec![false; n];
    for &x in &core {
        for (y, &d) in s.space.row(x).iter().enumerate() {
            if d < cfg.radius || d <= s.chain_scale {
                inside[y] = true;
            }
        }
    }
    Ok(WComponents {
        components: s.components_of(&inside),
        coarse: s.chain_scale > cfg.radius / 2.0,
    })
}

/// One copy `□^{ij}` of a lattice cube.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeCopy {
    pub cube: CubeIndex,
    /// Index `j` among the components over this cube.
    pub component: usize,
    /// Sample points of `W^{ij}`, sorted.
    pub members: Vec<usize>,
}

/// Identification of two copies along a common closed face, given in
/// lattice units as a box `[lo, hi]` with `hi − lo ∈ {0, 1}` per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Gluing {
    pub a: usize,
    pub b: usize,
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeComplex {
    dim: usize,
    config: LevelConfig,
    copies: Vec<CubeCopy>,
    gluings: Vec<Gluing>,
    /// Copy holding `ψ_n(x)` for each sample point.
    psi: Vec<usize>,
    /// `ι_n(ψ_n(x))`, stored as the coordinates of `ι(x)`.
    positions: EuclideanMap,
    coarse: bool,
    skipped: usize,
}

impl CubeComplex {
    /// Assembles a complex from explicit parts. Faces must lie in both
    /// closed cubes and every `ψ` point in the closed cube of its copy.
    pub fn from_parts(
        level: u32,
        copies: Vec<CubeCopy>,
        gluings: Vec<Gluing>,
        psi: Vec<usize>,
        positions: EuclideanMap,
    ) -> Result<Self> {
        let dim = positions.dim();
        let config = LevelConfig::new(level);
        for c in &copies {
            if c.cube.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: c.cube.len(),
                });
            }
        }
        for g in &gluings {
            for &c in &[g.a, g.b] {
                crate::metric::check_index(c, copies.len())?;
            }
            let ok = g.lo.len() == dim
                && g.hi.len() == dim
                && [g.a, g.b].iter().all(|&c| {
                    let k = &copies[c].cube;
                    (0..dim).all(|t| k[t] <= g.lo[t] && g.lo[t] <= g.hi[t] && g.hi[t] <= k[t] + 1)
                })
                && (0..dim).any(|t| g.lo[t] == g.hi[t]);
            if !ok {
                return Err(Error::Inconsistent(format!(
                    "gluing {}–{} is not along a common proper face",
                    g.a, g.b
                )));
            }
        }
        if psi.len() != positions.len() {
            return Err(Error::MapSize {
                got: psi.len(),
                expected: positions.len(),
            });
        }
        for (x, &c) in psi.iter().enumerate() {
            crate::metric::check_index(c, copies.len())?;
            if !closed_cube_contains(&copies[c].cube, config.side, positions.point(x)) {
                return Err(Error::Inconsistent(format!("ψ point {x} lies outside its cube")));
            }
        }
        Ok(CubeComplex {
            dim,
            config,
            copies,
            gluings,
            psi,
            positions,
            coarse: false,
            skipped: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn config(&self) -> LevelConfig {
        self.config
    }

    pub fn copies(&self) -> &[CubeCopy] {
        &self.copies
    }

    pub fn gluings(&self) -> &[Gluing] {
        &self.gluings
    }

    pub fn psi(&self) -> &[usize] {
        &self.psi
    }

    /// `ι_n ∘ ψ_n`, which equals `ι` coordinate for coordinate.
    pub fn positions(&self) -> &EuclideanMap {
        &self.positions
    }

    /// True when some level component scan was too coarse to trust.
    pub fn coarse(&self) -> bool {
        self.coarse
    }

    /// Copy pairs with intersecting components whose cubes do not touch.
    /// Only possible when the neighbourhood was widened to the chain scale;
    /// such pairs are not glued.
    pub fn skipped_gluings(&self) -> usize {
        self.skipped
    }

    /// Copy index of `(cube, component)`.
    pub fn find_copy(&self, cube: &[i64], component: usize) -> Option<usize> {
        self.copies
            .iter()
            .position(|c| c.cube == cube && c.component == component)
    }

    /// Skeleton with boundary nodes spaced `a_n/⌈a_n/h⌉`.
    pub fn skeleton(&self, h: f64) -> Result<Skeleton> {
        build_skeleton(self, h)
    }

    /// Copies meeting copy `c` in the glued complex, including `c`.
    pub fn neighbours(&self, skeleton: &Skeleton, c: usize) -> Vec<usize> {
        let mut out: Vec<usize> = skeleton.copy_nodes[c]
            .iter()
            .flat_map(|&v| skeleton.node_copies[v].iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Builds the level-`n` complex of a sample.
pub fn build_complex(s: &SampleWithMap, level: u32) -> Result<CubeComplex> {
    let cfg = LevelConfig::new(level);
    let dim = s.dim();
    let mut copies = Vec::new();
    let mut coarse = false;
    // membership[x] lists the copies whose W contains x
    let mut membership: Vec<Vec<usize>> = vec![Vec::new(); s.len()];
    for cube in covered_cubes(s, level) {
        let w = components_w(s, &cube, level)?;
        coarse |= w.coarse;
        for (j, members) in w.components.into_iter().enumerate() {
            let id = copies.len();
            for &x in &members {
                membership[x].push(id);
            }
            copies.push(CubeCopy {
                cube: cube.clone(),
                component: j,
                members,
            });
        }
    }
    let mut glued = BTreeMap::new();
    for list in &membership {
        for (k, &a) in list.iter().enumerate() {
            for &b in &list[k + 1..] {
                if copies[a].cube != copies[b].cube {
                    glued.entry((a, b)).or_insert(());
                }
            }
        }
    }
    let mut gluings = Vec::with_capacity(glued.len());
    let mut skipped = 0;
    for &(a, b) in glued.keys() {
        let (ka, kb) = (&copies[a].cube, &copies[b].cube);
        let lo: Vec<i64> = (0..dim).map(|t| ka[t].max(kb[t])).collect();
        let hi: Vec<i64> = (0..dim).map(|t| (ka[t] + 1).min(kb[t] + 1)).collect();
        if (0..dim).any(|t| lo[t] > hi[t]) {
            skipped += 1;
            continue;
        }
        gluings.push(Gluing { a, b, lo, hi });
    }
    let mut psi = Vec::with_capacity(s.len());
    for x in 0..s.len() {
        let cube = cube_of(s.map.point(x), cfg.side);
        let c = membership[x]
            .iter()
            .copied()
            .find(|&c| copies[c].cube == cube)
            .ok_or_else(|| Error::Inconsistent(format!("sample point {x} is in no component of its cube")))?;
        psi.push(c);
    }
    Ok(CubeComplex {
        dim,
        config: cfg,
        copies,
        gluings,
        psi,
        positions: s.map.clone(),
        coarse,
        skipped,
    })
}

/// `φ_{m,n}` on cube copies: the level-`n` copy whose cube contains the
/// level-`m` cube and whose component contains the level-`m` component.
pub fn bonding(pm: &CubeComplex, pn: &CubeComplex) -> Result<Vec<usize>> {
    let (m, n) = (pm.config.level, pn.config.level);
    if m < n {
        return Err(Error::LevelOrder {
            m: m as usize,
            n: n as usize,
        });
    }
    let shift = m - n;
    let mut by_point: BTreeMap<(Vec<i64>, usize), usize> = BTreeMap::new();
    for (id, c) in pn.copies.iter().enumerate() {
        for &x in &c.members {
            by_point.insert((c.cube.clone(), x), id);
        }
    }
    pm.copies
        .iter()
        .enumerate()
        .map(|(id, c)| {
            let parent: Vec<i64> = c.cube.iter().map(|&k| k >> shift).collect();
            let target = c
                .members
                .first()
                .and_then(|&x| by_point.get(&(parent.clone(), x)).copied())
                .ok_or_else(|| Error::Inconsistent(format!("level {m} copy {id} has no containing copy")))?;
            let big = &pn.copies[target].members;
            if c.members.iter().any(|x| big.binary_search(x).is_err()) {
                return Err(Error::Inconsistent(format!(
                    "level {m} copy {id} is split between level {n} components"
                )));
            }
            Ok(target)
        })
        .collect()
}

/// Node graph of a complex: fine boundary lattice of every copy plus the
/// `ψ` points, all nodes of a copy pairwise joined by chords.
#[derive(Debug, Clone)]
pub struct Skeleton {
    pub graph: MetricGraph,
    /// Node of `ψ_n(x)` for each sample point.
    pub psi_nodes: Vec<usize>,
    /// Nodes on each copy.
    pub copy_nodes: Vec<Vec<usize>>,
    /// Copies containing each node.
    pub node_copies: Vec<Vec<usize>>,
    /// Coordinates of each node in its cube (shared by glued copies).
    pub node_positions: Vec<Vec<f64>>,
    /// Spacing of the boundary lattice.
    pub spacing: f64,
}

impl Skeleton {
    /// Skeleton distances between `ψ` points, as a space over sample indices.
    pub fn psi_space(&self) -> Result<FiniteMetricSpace> {
        let n = self.psi_nodes.len();
        let mut rows = Vec::with_capacity(n);
        for &u in &self.psi_nodes {
            let d = self.graph.distances_from(u);
            rows.push(self.psi_nodes.iter().map(|&v| d[v]).collect::<Vec<f64>>());
        }
        for (i, row) in rows.iter().enumerate() {
            if let Some(j) = row.iter().position(|d| !d.is_finite()) {
                return Err(Error::Disconnected {
                    a: format!("psi{i}"),
                    b: format!("psi{j}"),
                });
            }
        }
        // Dijkstra from either end may round differently
        for i in 0..n {
            for j in (i + 1)..n {
                let m = rows[i][j].min(rows[j][i]);
                rows[i][j] = m;
                rows[j][i] = m;
            }
        }
        let labels = (0..n).map(|i| format!("psi{i}")).collect();
        FiniteMetricSpace::from_rows(labels, &rows)
    }

    /// Largest distance from any node to the nearest of `sources`.
    pub fn covering_radius(&self, sources: &[usize]) -> f64 {
        let seeds: Vec<(usize, f64)> = sources.iter().map(|&s| (s, 0.0)).collect();
        self.graph
            .adjacency()
            .dijkstra_multi(&seeds, f64::INFINITY)
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn build_skeleton(p: &CubeComplex, h: f64) -> Result<Skeleton> {
    let side = p.config.side;
    if !(h > 0.0 && h <= side / 2.0 + TOL_METRIC) {
        return Err(Error::InvalidParameter {
            name: "h",
            value: h,
            reason: "skeleton spacing must lie in (0, a_n/2]",
        });
    }
    let m = (libm::ceil(side / h - 1e-9) as i64).max(2);
    let unit = side / m as f64;
    let dim = p.dim;

    // raw nodes: (copy, position); boundary nodes keyed by fine coordinates
    let mut positions: Vec<Vec<f64>> = Vec::new();
    let mut raw_copy: Vec<usize> = Vec::new();
    let mut keyed: BTreeMap<(usize, Vec<i64>), usize> = BTreeMap::new();
    let mut per_copy: Vec<Vec<usize>> = vec![Vec::new(); p.copies.len()];
    for (c, copy) in p.copies.iter().enumerate() {
        let mut s = vec![0i64; dim];
        loop {
            if s.iter().any(|&v| v == 0 || v == m) {
                let key: Vec<i64> = (0..dim).map(|t| copy.cube[t] * m + s[t]).collect();
                let id = positions.len();
                positions.push(key.iter().map(|&k| k as f64 * unit).collect());
                raw_copy.push(c);
                per_copy[c].push(id);
                keyed.insert((c, key), id);
            }
            // odometer over {0..m}^d
            let mut t = 0;
            while t < dim {
                s[t] += 1;
                if s[t] <= m {
                    break;
                }
                s[t] = 0;
                t += 1;
            }
            if t == dim {
                break;
            }
        }
    }
    let mut psi_raw = Vec::with_capacity(p.psi.len());
    for (x, &c) in p.psi.iter().enumerate() {
        let id = positions.len();
        positions.push(p.positions.point(x).to_vec());
        raw_copy.push(c);
        per_copy[c].push(id);
        psi_raw.push(id);
    }

    let mut uf = UnionFind::new(positions.len());
    for g in &p.gluings {
        let mut key: Vec<i64> = g.lo.iter().map(|&l| l * m).collect();
        loop {
            let a = keyed[&(g.a, key.clone())];
            let b = keyed[&(g.b, key.clone())];
            uf.union(a, b);
            let mut t = 0;
            while t < dim {
                key[t] += 1;
                if key[t] <= g.hi[t] * m {
                    break;
                }
                key[t] = g.lo[t] * m;
                t += 1;
            }
            if t == dim {
                break;
            }
        }
    }
    for nodes in &per_copy {
        for (k, &u) in nodes.iter().enumerate() {
            for &v in &nodes[k + 1..] {
                if positions[u] == positions[v] {
                    uf.union(u, v);
                }
            }
        }
    }

    let groups = uf.groups();
    let mut node_of = vec![0usize; positions.len()];
    for (g, members) in groups.iter().enumerate() {
        for &r in members {
            node_of[r] = g;
        }
    }
    let mut edges = Vec::new();
    let mut copy_nodes: Vec<Vec<usize>> = Vec::with_capacity(per_copy.len());
    for nodes in &per_copy {
        let mut mine: Vec<usize> = nodes.iter().map(|&r| node_of[r]).collect();
        for (k, &u) in nodes.iter().enumerate() {
            for &v in &nodes[k + 1..] {
                let (a, b) = (node_of[u], node_of[v]);
                if a != b {
                    edges.push((a, b, euclidean_distance(&positions[u], &positions[v])));
                }
            }
        }
        mine.sort_unstable();
        mine.dedup();
        copy_nodes.push(mine);
    }
    let mut node_copies: Vec<Vec<usize>> = vec![Vec::new(); groups.len()];
    for (r, &c) in raw_copy.iter().enumerate() {
        node_copies[node_of[r]].push(c);
    }
    for list in node_copies.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let labels: Vec<String> = (0..groups.len()).map(|g| format!("n{g}")).collect();
    Ok(Skeleton {
        graph: MetricGraph::new(labels, edges)?,
        psi_nodes: psi_raw.iter().map(|&r| node_of[r]).collect(),
        copy_nodes,
        node_copies,
        node_positions: groups.iter().map(|g| positions[g[0]].clone()).collect(),
        spacing: unit,
    })
}

/// Skeleton distances between the `ψ` points of a complex.
pub fn complex_metric(p: &CubeComplex, h: f64) -> Result<FiniteMetricSpace> {
    p.skeleton(h)?.psi_space()
}

/// All-node skeleton metric (dense; subject to the dense cap).
pub fn skeleton_metric(p: &CubeComplex, h: f64) -> Result<FiniteMetricSpace> {
    crate::metric::graph_metric(&p.skeleton(h)?.graph)
}

/// Complexes at several levels with their bonding maps and the induced tower
/// of `ψ`-point spaces `Q_n = ψ_n(X)`.
#[derive(Debug, Clone)]
pub struct CubeTower {
    pub levels: Vec<u32>,
    pub complexes: Vec<CubeComplex>,
    pub skeletons: Vec<Skeleton>,
    /// `Q_n` for each level, indexed by sample point.
    pub spaces: Vec<FiniteMetricSpace>,
    /// `bonding[k]` maps copies of `levels[k+1]` to copies of `levels[k]`.
    pub bonding: Vec<Vec<usize>>,
}

/// Ratio `h / a_n` for tower skeletons.
pub const TOWER_SPACING: f64 = 1.0 / 8.0;

impl CubeTower {
    /// Builds complexes at strictly increasing `levels` with skeleton spacing
    /// `TOWER_SPACING · a_n`.
    pub fn build(s: &SampleWithMap, levels: &[u32]) -> Result<Self> {
        if levels.is_empty() || levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter {
                name: "levels",
                value: levels.len() as f64,
                reason: "levels must be non-empty and strictly increasing",
            });
        }
        let complexes = levels
            .iter()
            .map(|&n| build_complex(s, n))
            .collect::<Result<Vec<_>>>()?;
        let skeletons = complexes
            .iter()
            .map(|p| p.skeleton(p.config.side * TOWER_SPACING))
            .collect::<Result<Vec<_>>>()?;
        let spaces = skeletons.iter().map(|k| k.psi_space()).collect::<Result<Vec<_>>>()?;
        let bonding = complexes
            .windows(2)
            .map(|w| bonding(&w[1], &w[0]))
            .collect::<Result<Vec<_>>>()?;
        Ok(CubeTower {
            levels: levels.to_vec(),
            complexes,
            skeletons,
            spaces,
            bonding,
        })
    }

    /// Copy map `φ_{m,n}` between the `k`-th and `l`-th built levels, `k >= l`.
    pub fn compose(&self, k: usize, l: usize) -> Result<Vec<usize>> {
        if k < l {
            return Err(Error::LevelOrder { m: k, n: l });
        }
        let mut map: Vec<usize> = (0..self.complexes[k].copies.len()).collect();
        for step in (l..k).rev() {
            for c in map.iter_mut() {
                *c = self.bonding[step][*c];
            }
        }
        Ok(map)
    }

    /// Largest violation of `ι_n ∘ ψ_n = ι` (exactly zero when correct).
    pub fn psi_identity_error(&self, s: &SampleWithMap) -> f64 {
        let mut worst = 0.0f64;
        for p in &self.complexes {
            for x in 0..s.len() {
                let pos = p.positions.point(x);
                let ok = closed_cube_contains(&p.copies[p.psi[x]].cube, p.config.side, pos);
                let err = euclidean_distance(pos, s.map.point(x));
                worst = worst.max(if ok { err } else { f64::INFINITY });
            }
        }
        worst
    }

    /// Sample points with `ψ_n(x) ≠ φ_{m,n}(ψ_m(x))` for some pair of levels.
    pub fn psi_compatibility_failures(&self) -> Result<Vec<(usize, usize, usize)>> {
        let mut out = Vec::new();
        for k in 0..self.complexes.len() {
            for l in 0..=k {
                let phi = self.compose(k, l)?;
                for (x, (&ck, &cl)) in self.complexes[k].psi.iter().zip(&self.complexes[l].psi).enumerate() {
                    if phi[ck] != cl {
                        out.push((k, l, x));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Covering radius of `φ_{m,n}(P_m)` in `P_n`, with `m` and `n` given as
    /// positions in `levels`. The image of a copy is the closed subcube it
    /// occupies. Distances inside a copy are Euclidean; between copies they
    /// run through the skeleton. Points of `P_n` are probed on a grid of
    /// spacing `a_n/8` in every copy.
    pub fn net_radius(&self, k: usize, l: usize) -> Result<f64> {
        let phi = self.compose(k, l)?;
        let (pk, pl) = (&self.complexes[k], &self.complexes[l]);
        let sk = &self.skeletons[l];
        let mut boxes: Vec<Vec<&[i64]>> = vec![Vec::new(); pl.copies.len()];
        for (c, &target) in phi.iter().enumerate() {
            boxes[target].push(&pk.copies[c].cube);
        }
        let small = pk.config.side;
        let to_image = |c: usize, y: &[f64]| -> f64 {
            boxes[c]
                .iter()
                .map(|b| box_distance(b, small, y))
                .fold(f64::INFINITY, f64::min)
        };
        let seeds: Vec<(usize, f64)> = (0..sk.node_positions.len())
            .filter_map(|v| {
                let d = sk.node_copies[v]
                    .iter()
                    .map(|&c| to_image(c, &sk.node_positions[v]))
                    .fold(f64::INFINITY, f64::min);
                d.is_finite().then_some((v, d))
            })
            .collect();
        let reach = sk.graph.adjacency().dijkstra_multi(&seeds, f64::INFINITY);
        let side = pl.config.side;
        let steps = 8i64;
        let mut radius = 0.0f64;
        for (c, copy) in pl.copies.iter().enumerate() {
            let mut s = vec![0i64; pl.dim];
            loop {
                let y: Vec<f64> = (0..pl.dim)
                    .map(|t| (copy.cube[t] as f64 + s[t] as f64 / steps as f64) * side)
                    .collect();
                let via = sk.copy_nodes[c]
                    .iter()
                    .map(|&v| euclidean_distance(&y, &sk.node_positions[v]) + reach[v])
                    .fold(f64::INFINITY, f64::min);
                radius = radius.max(via.min(to_image(c, &y)));
                let mut t = 0;
                while t < pl.dim {
                    s[t] += 1;
                    if s[t] <= steps {
                        break;
                    }
                    s[t] = 0;
                    t += 1;
                }
                if t == pl.dim {
                    break;
                }
            }
        }
        Ok(radius)
    }

    /// The `ψ`-point tower as an inverse system over sample indices. Bonding
    /// maps are identities; `slack[k]` bounds how much the skeleton
    /// approximation may stretch distances from level `k+1` to level `k`.
    pub fn inverse_system(&self, slack: &[f64]) -> Result<InverseSystem> {
        let n = self.spaces[0].len();
        InverseSystem::with_slack(
            self.spaces.clone(),
            vec![(0..n).collect(); self.spaces.len() - 1],
            slack.to_vec(),
        )
    }
}

/// Euclidean distance from `y` to the closed lattice cube `k` of side `side`.
fn box_distance(k: &[i64], side: f64, y: &[f64]) -> f64 {
    let sq: f64 = k
        .iter()
        .zip(y)
        .map(|(&k, &x)| {
            let lo = k as f64 * side;
            let gap = (lo - x).max(x - lo - side).max(0.0);
            gap * gap
        })
        .sum();
    libm::sqrt(sq)
}

/// Per-pair distances across levels against the sample metric.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub i: usize,
    pub j: usize,
    pub base: f64,
    /// `|ψ_n(x) ψ_n(x')|` per level.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarReport {
    pub level: u32,
    /// Largest `diam K*` over single-copy probes `K`.
    pub max_star_diameter: f64,
    /// Whether `r_n + diam K < δ` holds for single cubes at this level.
    pub premise: bool,
    /// `premise ⇒ max_star_diameter < ε`.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub levels: Vec<u32>,
    pub rows: Vec<ConvergenceRow>,
    /// `max |value − base|` per level.
    pub max_defect: Vec<f64>,
    /// Largest drop of a pair's value between consecutive levels.
    pub max_drop: f64,
    /// `max (base − value)` at the last level, over `a_{n_k}`: the
    /// constant `C` in `|xx'| <= |ψ x ψ x'| + C·a_{n_k}`.
    pub lower_constant: f64,
    /// `max |value − base|` at the last level over `a_{n_k}`.
    pub defect_constant: f64,
    pub stars: Vec<StarReport>,
}

/// Compares skeleton distances with the sample metric on the given pairs and
/// probes the star-set implication with single copies.
pub fn convergence_check(
    s: &SampleWithMap,
    tower: &CubeTower,
    pairs: &[(usize, usize)],
    eps: f64,
    delta: f64,
) -> Result<ConvergenceTable> {
    let mut rows = Vec::with_capacity(pairs.len());
    let mut max_defect = vec![0.0f64; tower.levels.len()];
    let mut max_drop = 0.0f64;
    for &(i, j) in pairs {
        crate::metric::check_index(i, s.len())?;
        crate::metric::check_index(j, s.len())?;
        let base = s.space.dist(i, j);
        let values: Vec<f64> = tower.spaces.iter().map(|q| q.dist(i, j)).collect();
        for (k, &v) in values.iter().enumerate() {
            max_defect[k] = max_defect[k].max((v - base).abs());
        }
        for w in values.windows(2) {
            max_drop = max_drop.max(w[0] - w[1]);
        }
        rows.push(ConvergenceRow { i, j, base, values });
    }
    let last_side = LevelConfig::new(*tower.levels.last().expect("non-empty")).side;
    let lower = rows
        .iter()
        .map(|r| r.base - r.values[r.values.len() - 1])
        .fold(0.0f64, f64::max);
    let stars = tower
        .complexes
        .iter()
        .zip(&tower.skeletons)
        .map(|(p, sk)| {
            let max_star_diameter = (0..p.copies.len())
                .map(|c| {
                    let mut star: Vec<usize> = p
                        .neighbours(sk, c)
                        .into_iter()
                        .flat_map(|d| p.copies[d].members.iter().copied())
                        .collect();
                    star.sort_unstable();
                    star.dedup();
                    s.space.subset_diameter(&star)
                })
                .fold(0.0f64, f64::max);
            let diam_k = libm::sqrt(p.dim as f64) * p.config.side;
            let premise = p.config.radius + diam_k < delta;
            StarReport {
                level: p.config.level,
                max_star_diameter,
                premise,
                holds: !premise || max_star_diameter < eps,
            }
        })
        .collect();
    Ok(ConvergenceTable {
        levels: tower.levels.clone(),
        rows,
        defect_constant: max_defect.last().copied().unwrap_or(0.0) / last_side,
        max_defect,
        max_drop,
        lower_constant: lower / last_side,
        stars,
    })
}

/// Open cover of the image by thickened offset bricks, pulled back and split
/// into chain components.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverReport {
    /// Brick side `s`; bricks are thickened by `s/8`.
    pub brick: f64,
    /// Diameter bound `1.25·s·√d` of a thickened brick.
    pub brick_diameter: f64,
    /// Components `V_α` with the lower-corner index of their brick.
    pub components: Vec<(Vec<i64>, Vec<usize>)>,
    /// Number of bricks containing each image point.
    pub multiplicity: Vec<usize>,
    pub max_multiplicity: usize,
    pub max_diameter: f64,
    /// The first component with diameter `>= ε`, if any.
    pub failing: Option<usize>,
    pub pass: bool,
}

/// Offset of the brick row in coordinate `i`: slabs in higher coordinates
/// shift it by `2^{-(j−i)}` bricks.
fn brick_offset(k: &[i64], i: usize) -> f64 {
    (i + 1..k.len())
        .map(|j| k[j] as f64 * libm::ldexp(1.0, -((j - i) as i32)))
        .sum()
}

/// Bricks whose open `η`-thickening contains `p`.
fn bricks_containing(p: &[f64], side: f64, eta: f64) -> Vec<Vec<i64>> {
    let d = p.len();
    let mut out = Vec::new();
    let mut k = vec![0i64; d];
    fill_bricks(p, side, eta, d, &mut k, &mut out);
    out
}

fn fill_bricks(p: &[f64], side: f64, eta: f64, t: usize, k: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if t == 0 {
        let dist2: f64 = (0..p.len())
            .map(|i| {
                let lo = (k[i] as f64 + brick_offset(k, i)) * side;
                let gap = (lo - p[i]).max(p[i] - (lo + side)).max(0.0);
                gap * gap
            })
            .sum();
        if dist2 < eta * eta {
            out.push(k.clone());
        }
        return;
    }
    let i = t - 1;
    let off = brick_offset(k, i);
    let lo = libm::floor((p[i] - eta) / side - off) as i64;
    let hi = libm::floor((p[i] + eta) / side - off) as i64;
    for ki in lo..=hi {
        k[i] = ki;
        fill_bricks(p, side, eta, t - 1, k, out);
    }
    k[i] = 0;
}

/// Builds the brick cover for diameter target `δ` and checks multiplicity
/// `<= d + 1` and component diameters `< ε` on the sample.
pub fn multiplicity_cover(s: &SampleWithMap, delta: f64, eps: f64) -> Result<CoverReport> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            reason: "must be positive",
        });
    }
    let d = s.dim();
    let root_d = libm::sqrt(d as f64);
    let brick = 0.99 * delta / (1.25 * root_d);
    let eta = brick / 8.0;
    let mut members: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    let mut multiplicity = Vec::with_capacity(s.len());
    for x in 0..s.len() {
        let bricks = bricks_containing(s.map.point(x), brick, eta);
        multiplicity.push(bricks.len());
        for b in bricks {
            members.entry(b).or_default().push(x);
        }
    }
    let mut components = Vec::new();
    let mut inside = vec![false; s.len()];
    for (b, pts) in members {
        for &x in &pts {
            inside[x] = true;
        }
        for comp in s.components_of(&inside) {
            components.push((b.clone(), comp));
        }
        for &x in &pts {
            inside[x] = false;
        }
    }
    let mut max_diameter = 0.0f64;
    let mut failing = None;
    for (a, (_, comp)) in components.iter().enumerate() {
        let diam = s.space.subset_diameter(comp);
        max_diameter = max_diameter.max(diam);
        if diam >= eps && failing.is_none() {
            failing = Some(a);
        }
    }
    let max_multiplicity = multiplicity.iter().copied().max().unwrap_or(0);
    Ok(CoverReport {
        brick,
        brick_diameter: 1.25 * brick * root_d,
        components,
        multiplicity,
        max_multiplicity,
        max_diameter,
        failing,
        pass: max_multiplicity <= d + 1 && failing.is_none(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn segment(n: usize) -> SampleWithMap {
        let xs: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let m = FiniteMetricSpace::on_line(&xs).unwrap();
        SampleWithMap::new(m, EuclideanMap::from_values(xs), 1.0 / n as f64).unwrap()
    }

    #[test]
    fn level_constants() {
        let c = LevelConfig::new(3);
        assert_eq!(c.side, 0.125);
        assert_eq!(c.radius, 0.0125);
    }

    #[test]
    fn segment_covered_cubes_half_open() {
        let s = segment(10);
        assert_eq!(covered_cubes(&s, 0), vec![vec![0], vec![1]]);
        assert_eq!(covered_cubes(&s, 1), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn single_point_sample() {
        let m = FiniteMetricSpace::on_line(&[0.0]).unwrap();
        let s = SampleWithMap::new(m, EuclideanMap::from_values(vec![0.0]), 0.1).unwrap();
        assert_eq!(covered_cubes(&s, 2), vec![vec![0]]);
        let p = build_complex(&s, 2).unwrap();
        assert_eq!(p.copies().len(), 1);
        assert_eq!(p.psi(), &[0]);
    }

    #[test]
    fn interval_preimage_is_one_component() {
        let s = segment(40);
        for cube in covered_cubes(&s, 2) {
            assert_eq!(components_w(&s, &cube, 2).unwrap().components.len(), 1);
        }
    }

    #[test]
    fn fold_splits_components() {
        let xs: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
        let m = FiniteMetricSpace::on_line(&xs).unwrap();
        let f = EuclideanMap::from_values(xs.iter().map(|t| (t - 0.5).abs()).collect());
        let s = SampleWithMap::new(m, f, 1.0 / 40.0).unwrap();
        // [0.25, 0.5] pulls back to both ends of the segment
        assert_eq!(components_w(&s, &[1], 2).unwrap().components.len(), 2);
        assert_eq!(components_w(&s, &[0], 2).unwrap().components.len(), 1);
        let p = build_complex(&s, 2).unwrap();
        let mut psi = p.psi().to_vec();
        psi.sort_unstable();
        psi.dedup();
        assert!(psi.len() >= 3);
    }

    #[test]
    fn non_short_map_rejected() {
        let m = FiniteMetricSpace::on_line(&[0.0, 1.0]).unwrap();
        let f = EuclideanMap::from_values(vec![0.0, 2.0]);
        assert!(SampleWithMap::new(m, f, 1.0).is_err());
    }

    #[test]
    fn unit_square_diagonal() {
        let copies = vec![CubeCopy {
            cube: vec![0, 0],
            component: 0,
            members: vec![],
        }];
        let pos = EuclideanMap::from_points(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let p = CubeComplex::from_parts(0, copies, vec![], vec![0, 0], pos).unwrap();
        let q = complex_metric(&p, 0.5).unwrap();
        assert!((q.dist(0, 1) - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn two_segments_make_a_circle() {
        let copies = vec![
            CubeCopy {
                cube: vec![0],
                component: 0,
                members: vec![],
            },
            CubeCopy {
                cube: vec![0],
                component: 1,
                members: vec![],
            },
        ];
        let gluings = vec![
            Gluing {
                a: 0,
                b: 1,
                lo: vec![0],
                hi: vec![0],
            },
            Gluing {
                a: 0,
                b: 1,
                lo: vec![1],
                hi: vec![1],
            },
        ];
        let pos = EuclideanMap::from_values(vec![0.5, 0.5]);
        let p = CubeComplex::from_parts(0, copies, gluings, vec![0, 1], pos).unwrap();
        let q = complex_metric(&p, 0.5).unwrap();
        assert!((q.dist(0, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn whole_cube_gluing_rejected() {
        let copies = vec![
            CubeCopy {
                cube: vec![0],
                component: 0,
                members: vec![],
            },
            CubeCopy {
                cube: vec![0],
                component: 1,
                members: vec![],
            },
        ];
        let g = vec![Gluing {
            a: 0,
            b: 1,
            lo: vec![0],
            hi: vec![1],
        }];
        let pos = EuclideanMap::from_values(vec![]);
        assert!(CubeComplex::from_parts(0, copies, g, vec![], pos).is_err());
    }

    #[test]
    fn segment_level_one() {
        let s = segment(20);
        let p = build_complex(&s, 1).unwrap();
        // [0, ½), [½, 1) and the cube over the endpoint 1
        assert_eq!(p.copies().len(), 3);
        assert_eq!(p.gluings().len(), 2);
        let q = complex_metric(&p, 0.25).unwrap();
        for i in 0..=20 {
            for j in 0..=20 {
                assert!((q.dist(i, j) - s.space().dist(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bonding_on_segment() {
        let s = segment(40);
        let p1 = build_complex(&s, 1).unwrap();
        let p2 = build_complex(&s, 2).unwrap();
        let phi = bonding(&p2, &p1).unwrap();
        for (c, &t) in phi.iter().enumerate() {
            assert_eq!(p1.copies()[t].cube[0], p2.copies()[c].cube[0] >> 1);
        }
        let id = bonding(&p1, &p1).unwrap();
        assert_eq!(id, (0..p1.copies().len()).collect::<Vec<_>>());
        assert!(bonding(&p1, &p2).is_err());
    }

    #[test]
    fn tower_functoriality_and_psi() {
        let s = segment(64);
        let t = CubeTower::build(&s, &[0, 1, 2, 3]).unwrap();
        assert_eq!(t.psi_identity_error(&s), 0.0);
        assert!(t.psi_compatibility_failures().unwrap().is_empty());
        let direct = bonding(&t.complexes[2], &t.complexes[0]).unwrap();
        assert_eq!(t.compose(2, 0).unwrap(), direct);
    }

    #[test]
    fn brick_wall_multiplicity() {
        let s = 1.0;
        let eta = s / 8.0;
        let mut worst = 0;
        for a in 0..200 {
            for b in 0..200 {
                let p = [a as f64 * 0.0173, b as f64 * 0.0191];
                worst = worst.max(bricks_containing(&p, s, eta).len());
                assert!(!bricks_containing(&p, s, eta).is_empty());
            }
        }
        assert_eq!(worst, 3);
    }

    #[test]
    fn cover_segment() {
        let s = segment(100);
        let r = multiplicity_cover(&s, 0.1, 0.1).unwrap();
        assert_eq!(r.max_multiplicity, 2);
        assert!(r.pass);
    }

    #[test]
    fn cover_constant_map_fails() {
        let xs: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let m = FiniteMetricSpace::on_line(&xs).unwrap();
        let s = SampleWithMap::new(m, EuclideanMap::from_values(vec![0.3; 21]), 0.05).unwrap();
        let r = multiplicity_cover(&s, 0.1, 0.5).unwrap();
        assert!(!r.pass);
        assert!(r.failing.is_some());
        assert!((r.max_diameter - 1.0).abs() < 1e-12);
    }
}

//! Crooked interval maps and the graph tower built from them.
//!
//! A [`CrookedMap`] is a short, onto, piecewise linear map `[0, a] → [0, b]`.
//! [`GammaGraph`] glues path graphs `J_1, …, J_N` along such maps: every
//! vertex of `J_n` gets an edge of length `2^{-n}` to the vertex of `J_{n-1}`
//! closest to its image. The function `f` is the distance to the deepest
//! level, which stands in for the completion frontier.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::metric::{graph_metric, subdivide_traced, VertexOrigin};
use crate::pullback::{ChainGraph, PullValue};
use crate::{Error, EuclideanMap, MetricGraph, Result};

/// Slack on value comparisons in the crookedness scan.
pub const CROOK_TOL: f64 = 1e-12;

/// Slack on `|f(u) − f(v)| ≤ ℓ` and on recomputed distances.
pub const TOL_PATH: f64 = 1e-12;

/// Default cap on vertices (or pattern steps) when building towers.
pub const VERTEX_BUDGET: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct CrookedMap {
    domain: f64,
    codomain: f64,
    eps: f64,
    /// `(t, h(t))` at every turning point, including both ends.
    breakpoints: Vec<(f64, f64)>,
    /// Shortest domain the pattern fits in at slope one.
    required: f64,
    /// Set when `check_crooked` passed at `eps` with grid step `eps/8`.
    certified: bool,
}

impl CrookedMap {
    /// Validates a PL map given by its breakpoints. The result is not
    /// certified; run [`check_crooked`] to confirm `eps`.
    pub fn from_breakpoints(codomain: f64, eps: f64, breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        positive("codomain", codomain)?;
        positive("eps", eps)?;
        if breakpoints.len() < 2 || breakpoints[0].0 != 0.0 {
            return Err(Error::Inconsistent(
                "breakpoints must start at t = 0 and have two or more entries".into(),
            ));
        }
        for (k, w) in breakpoints.windows(2).enumerate() {
            let dt = w[1].0 - w[0].0;
            if !(dt > 0.0) {
                return Err(Error::Inconsistent(format!("breakpoint {} does not increase", k + 1)));
            }
            let dv = libm::fabs(w[1].1 - w[0].1);
            if dv > dt * (1.0 + 1e-12) + CROOK_TOL {
                return Err(Error::NotShort {
                    i: k,
                    j: k + 1,
                    image: dv,
                    base: dt,
                });
            }
        }
        let (lo, hi) = breakpoints
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.1), hi.max(p.1))
            });
        if libm::fabs(lo) > CROOK_TOL || libm::fabs(hi - codomain) > CROOK_TOL * codomain.max(1.0) {
            return Err(Error::Inconsistent(format!(
                "values span [{lo}, {hi}], not the codomain [0, {codomain}]"
            )));
        }
        let domain = breakpoints[breakpoints.len() - 1].0;
        Ok(CrookedMap {
            domain,
            codomain,
            eps,
            breakpoints,
            required: domain,
            certified: false,
        })
    }

    /// Identity of `[0, len]`, which is `ε`-crooked for `len ≤ 2ε`.
    pub fn identity(len: f64, eps: f64) -> Result<Self> {
        Self::from_breakpoints(len, eps, vec![(0.0, 0.0), (len, len)])
    }

    pub fn domain(&self) -> f64 {
        self.domain
    }

    pub fn codomain(&self) -> f64 {
        self.codomain
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn breakpoint_count(&self) -> usize {
        self.breakpoints.len()
    }

    /// Minimal domain length for the construction that produced this map.
    pub fn required(&self) -> f64 {
        self.required
    }

    pub fn certified(&self) -> bool {
        self.certified
    }

    /// Value at `t`, clamped to the domain.
    pub fn eval(&self, t: f64) -> f64 {
        let b = &self.breakpoints;
        let t = t.clamp(0.0, self.domain);
        let k = b.partition_point(|p| p.0 <= t).clamp(1, b.len() - 1);
        let (t0, v0) = b[k - 1];
        let (t1, v1) = b[k];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Largest `|slope|` over the pieces.
    pub fn lipschitz(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .map(|w| libm::fabs(w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .fold(0.0, f64::max)
    }

    /// Number of monotone pieces.
    pub fn laps(&self) -> usize {
        self.breakpoints.len() - 1
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

/// Integer value sequence from `a` to `b` in unit steps. Ranges of at most
/// two units are walked straight; longer ones as
/// `P(a, b−s) · P(b−s, a+s) · P(a+s, b)`.
pub fn crooked_pattern(a: i64, b: i64) -> Vec<i64> {
    let mut out = vec![a];
    push_pattern(a, b, &mut out);
    out
}

fn push_pattern(a: i64, b: i64, out: &mut Vec<i64>) {
    let d = b - a;
    if d.abs() <= 2 {
        let s = d.signum();
        let mut v = a;
        while v != b {
            v += s;
            out.push(v);
        }
        return;
    }
    let s = d.signum();
    push_pattern(a, b - s, out);
    push_pattern(b - s, a + s, out);
    push_pattern(a + s, b, out);
}

/// Step count of `crooked_pattern(0, m)`, as a float so huge ranges can be
/// rejected before building them.
pub fn pattern_steps(m: u32) -> f64 {
    // S(m) = 2 S(m-1) + S(m-2) from m = 3 on
    let (mut prev, mut cur) = (1.0f64, 2.0f64);
    match m {
        0 | 1 => m as f64,
        _ => {
            for _ in 3..=m {
                (prev, cur) = (cur, 2.0 * cur + prev);
            }
            cur
        }
    }
}

/// Units of the pattern for a codomain of length `len` at scale `eps`.
fn unit_count(len: f64, eps: f64) -> u32 {
    (libm::ceil(len / eps - 1e-9) as u32).max(1)
}

/// Shortest domain for which [`build_crooked`] succeeds.
pub fn min_domain(codomain: f64, eps: f64) -> Result<f64> {
    positive("codomain", codomain)?;
    positive("eps", eps)?;
    let m = unit_count(codomain, eps);
    Ok(pattern_steps(m) * codomain / m as f64)
}

/// Short, onto, `ε`-crooked map `[0, domain] → [0, codomain]` following
/// [`crooked_pattern`] with unit `codomain/⌈codomain/ε⌉`. Domains longer
/// than the minimum are covered at a uniform slower speed. The result is
/// checked with [`check_crooked`] at grid step `ε/8` before it is returned.
pub fn build_crooked(domain: f64, codomain: f64, eps: f64) -> Result<CrookedMap> {
    positive("domain", domain)?;
    let required = min_domain(codomain, eps)?;
    if domain < required * (1.0 - 1e-12) {
        return Err(Error::DomainTooShort {
            given: domain,
            required,
        });
    }
    let m = unit_count(codomain, eps);
    if pattern_steps(m) > VERTEX_BUDGET as f64 {
        return Err(Error::Intractable {
            level: 0,
            needed: pattern_steps(m),
            budget: VERTEX_BUDGET,
        });
    }
    let seq = crooked_pattern(0, m as i64);
    let unit = codomain / m as f64;
    let dt = domain / (seq.len() - 1) as f64;
    let mut breakpoints = Vec::new();
    for (k, &v) in seq.iter().enumerate() {
        let turning = k == 0 || k + 1 == seq.len() || (seq[k - 1] < v) != (v < seq[k + 1]);
        if turning {
            let t = if k + 1 == seq.len() { domain } else { k as f64 * dt };
            breakpoints.push((t, v as f64 * unit));
        }
    }
    let mut map = CrookedMap::from_breakpoints(codomain, eps, breakpoints)?;
    map.required = required;
    let report = check_crooked(&map, eps, eps / 8.0)?;
    if !report.pass {
        return Err(Error::NotCrooked {
            level: 0,
            eps,
            defect: report.worst.map_or(0.0, |w| w.2),
        });
    }
    map.certified = true;
    Ok(map)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrookedReport {
    pub pass: bool,
    pub grid_points: usize,
    /// Pairs with `|h(t₁) − h(t₂)| > 2ε`, the only ones scanned.
    pub pairs_checked: usize,
    pub failing_pairs: usize,
    /// `(t₁, t₂, defect)` for the failing pair with the largest defect,
    /// where the defect is `min max(|h(t'₂)−h(t₂)|, |h(t'₁)−h(t₁)|) − ε`
    /// over grid witnesses `t₁ < t'₂ < t'₁ < t₂`.
    pub worst: Option<(f64, f64, f64)>,
}

/// Exhaustive crookedness scan on the grid `0, g, 2g, …` together with the
/// breakpoints of `h`, so turning values are sampled exactly. Needs
/// `g ≤ ε/8`.
///
/// For each `t₁` the earliest `t'₂` near `h(t₂)` is read off the running
/// max/min of `h` after `t₁`, swept against all values in sorted order, so
/// the scan is quadratic in the grid size.
pub fn check_crooked(h: &CrookedMap, eps: f64, g: f64) -> Result<CrookedReport> {
    positive("eps", eps)?;
    positive("g", g)?;
    if g > eps / 8.0 * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter {
            name: "g",
            value: g,
            reason: "grid step must be at most ε/8",
        });
    }
    let mut ts = Vec::new();
    let steps = libm::floor(h.domain / g + 1e-9) as usize;
    for k in 0..=steps {
        ts.push((k as f64 * g).min(h.domain));
    }
    ts.extend(h.breakpoints.iter().map(|p| p.0));
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|a, b| *a - *b <= CROOK_TOL);
    let v: Vec<f64> = ts.iter().map(|&t| h.eval(t)).collect();
    let n = v.len();
    let tol = eps + CROOK_TOL;
    let mut by_value: Vec<usize> = (0..n).collect();
    by_value.sort_by(|&a, &b| v[a].total_cmp(&v[b]));

    let mut report = CrookedReport {
        pass: true,
        grid_points: n,
        pairs_checked: 0,
        failing_pairs: 0,
        worst: None,
    };
    let none = usize::MAX;
    let mut run_max = vec![0.0; n];
    let mut run_min = vec![0.0; n];
    let mut first_hi = vec![none; n];
    let mut first_lo = vec![none; n];
    for i in 0..n.saturating_sub(1) {
        let (mut mx, mut mn) = (f64::NEG_INFINITY, f64::INFINITY);
        for k in i + 1..n {
            mx = mx.max(v[k]);
            mn = mn.min(v[k]);
            run_max[k] = mx;
            run_min[k] = mn;
        }
        // first k > i with run_max[k] ≥ v_j − ε, thresholds ascending
        let mut p = i + 1;
        for &j in &by_value {
            while p < n && run_max[p] < v[j] - tol {
                p += 1;
            }
            first_hi[j] = if p < n { p } else { none };
        }
        // first k > i with run_min[k] ≤ v_j + ε, thresholds descending
        let mut p = i + 1;
        for &j in by_value.iter().rev() {
            while p < n && run_min[p] > v[j] + tol {
                p += 1;
            }
            first_lo[j] = if p < n { p } else { none };
        }
        let mut last_near = none;
        for j in i + 1..n {
            if j > i + 1 && libm::fabs(v[j - 1] - v[i]) <= tol {
                last_near = j - 1;
            }
            if libm::fabs(v[j] - v[i]) <= 2.0 * eps + CROOK_TOL {
                continue;
            }
            report.pairs_checked += 1;
            let k = first_hi[j].max(first_lo[j]);
            if k != none && last_near != none && k < last_near {
                continue;
            }
            report.failing_pairs += 1;
            report.pass = false;
            let defect = pair_defect(&v, i, j) - eps;
            if report.worst.is_none_or(|w| defect > w.2) {
                report.worst = Some((ts[i], ts[j], defect));
            }
        }
    }
    Ok(report)
}

/// `min` over `i < k < l < j` of `max(|v_k − v_j|, |v_l − v_i|)`; with no
/// room for witnesses, `|v_j − v_i|`.
fn pair_defect(v: &[f64], i: usize, j: usize) -> f64 {
    if j < i + 3 {
        return libm::fabs(v[j] - v[i]);
    }
    let mut best_k = f64::INFINITY;
    let mut best = f64::INFINITY;
    for l in i + 2..j {
        best_k = best_k.min(libm::fabs(v[l - 1] - v[j]));
        best = best.min(best_k.max(libm::fabs(v[l] - v[i])));
    }
    best
}

/// The tower graph over `J_1, …, J_N`.
#[derive(Debug, Clone)]
pub struct GammaGraph {
    lengths: Vec<f64>,
    /// `maps[k]` is `h_{k+2} : J_{k+2} → J_{k+1}`.
    maps: Vec<CrookedMap>,
    /// Sorted vertex coordinates of each level.
    coords: Vec<Vec<f64>>,
    /// `offsets[n-1]` is the global index of the first vertex of `J_n`.
    offsets: Vec<usize>,
    /// Joining target of each vertex; `None` on `J_1`.
    joins: Vec<Option<usize>>,
    graph: MetricGraph,
    f: Vec<f64>,
}

/// Builds `Γ_N` from the lengths of `J_1, …, J_N` and the maps
/// `h_n : J_n → J_{n-1}`, `n = 2, …, N`. Each `h_n` must be `2^{-n}`-crooked;
/// maps not already certified at that scale are checked here.
///
/// Vertices of `J_N` are the breakpoints of `h_N`; those of `J_{n-1}` also
/// include `h_n(Vert J_n)`, so every joining target is an exact image and
/// the retraction `Γ_n → Γ_{n-1}` is short. Edges are refined to at most
/// `2^{-n}`.
pub fn build_gamma(lengths: &[f64], maps: Vec<CrookedMap>) -> Result<GammaGraph> {
    if lengths.is_empty() {
        return Err(Error::Inconsistent("a tower needs at least one level".into()));
    }
    if maps.len() + 1 != lengths.len() {
        return Err(Error::Inconsistent(format!(
            "{} levels need {} maps, got {}",
            lengths.len(),
            lengths.len() - 1,
            maps.len()
        )));
    }
    for &len in lengths {
        positive("length", len)?;
    }
    for (k, h) in maps.iter().enumerate() {
        let n = k + 2;
        let (dom, cod) = (lengths[n - 1], lengths[n - 2]);
        if !close(h.domain, dom) || !close(h.codomain, cod) {
            return Err(Error::Inconsistent(format!(
                "h_{n} maps [0, {}] → [0, {}], expected [0, {dom}] → [0, {cod}]",
                h.domain, h.codomain
            )));
        }
        let eps = level_scale(n);
        if !(h.certified && h.eps <= eps) {
            let report = check_crooked(h, eps, eps / 8.0)?;
            if !report.pass {
                return Err(Error::NotCrooked {
                    level: n,
                    eps,
                    defect: report.worst.map_or(0.0, |w| w.2),
                });
            }
        }
    }
    assemble(lengths, maps)
}

fn close(a: f64, b: f64) -> bool {
    libm::fabs(a - b) <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// `2^{-n}`: crookedness scale, edge bound and joining length of level `n`.
pub fn level_scale(n: usize) -> f64 {
    libm::ldexp(1.0, -(n as i32))
}

fn assemble(lengths: &[f64], maps: Vec<CrookedMap>) -> Result<GammaGraph> {
    let depth = lengths.len();
    let mut coords: Vec<Vec<f64>> = vec![Vec::new(); depth];
    for n in (1..=depth).rev() {
        let len = lengths[n - 1];
        let mut pts = vec![0.0, len];
        if n >= 2 {
            pts.extend(maps[n - 2].breakpoints.iter().map(|p| p.0));
        }
        if n < depth {
            let h = &maps[n - 1];
            pts.extend(coords[n].iter().map(|&t| h.eval(t).clamp(0.0, len)));
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| *a - *b <= CROOK_TOL * len.max(1.0));
        // keep the right end exact after dedup
        let last = pts.len() - 1;
        pts[last] = len;
        let cap = level_scale(n);
        let mut refined = vec![pts[0]];
        for w in pts.windows(2) {
            let k = crate::metric::piece_count(w[1] - w[0], cap);
            for s in 1..k {
                refined.push(w[0] + (w[1] - w[0]) * s as f64 / k as f64);
            }
            refined.push(w[1]);
        }
        if refined.len() > VERTEX_BUDGET {
            return Err(Error::Intractable {
                level: n,
                needed: refined.len() as f64,
                budget: VERTEX_BUDGET,
            });
        }
        coords[n - 1] = refined;
    }
    let mut offsets = Vec::with_capacity(depth + 1);
    let mut total = 0;
    for c in &coords {
        offsets.push(total);
        total += c.len();
    }
    offsets.push(total);

    let mut labels = Vec::with_capacity(total);
    let mut edges = Vec::new();
    let mut joins = vec![None; total];
    for n in 1..=depth {
        let c = &coords[n - 1];
        let base = offsets[n - 1];
        for k in 0..c.len() {
            labels.push(format!("J{n}:{k}"));
        }
        for k in 1..c.len() {
            edges.push((base + k - 1, base + k, c[k] - c[k - 1]));
        }
        if n >= 2 {
            let h = &maps[n - 2];
            for (k, &t) in c.iter().enumerate() {
                let target = offsets[n - 2] + closest(&coords[n - 2], h.eval(t));
                joins[base + k] = Some(target);
                edges.push((base + k, target, level_scale(n)));
            }
        }
    }
    let graph = MetricGraph::new(labels, edges)?;
    let f = frontier_distance(&graph, offsets[depth - 1]..offsets[depth]);
    Ok(GammaGraph {
        lengths: lengths.to_vec(),
        maps,
        coords,
        offsets,
        joins,
        graph,
        f,
    })
}

/// Index of the coordinate closest to `x`; ties go to the smaller one.
fn closest(sorted: &[f64], x: f64) -> usize {
    let k = sorted.partition_point(|&c| c < x);
    if k == 0 {
        return 0;
    }
    if k == sorted.len() {
        return k - 1;
    }
    if x - sorted[k - 1] <= sorted[k] - x {
        k - 1
    } else {
        k
    }
}

fn frontier_distance(graph: &MetricGraph, frontier: Range<usize>) -> Vec<f64> {
    let sources: Vec<(usize, f64)> = frontier.map(|v| (v, 0.0)).collect();
    graph.adjacency().dijkstra_multi(&sources, f64::INFINITY)
}

/// Tower with `|J_1| = base` where each `h_n` is the minimal-domain output
/// of [`build_crooked`] at scale `2^{-n}`. Levels whose codomain is at most
/// two units long come out as identities.
pub fn gamma_tower(depth: usize, base: f64) -> Result<GammaGraph> {
    positive("base", base)?;
    if depth == 0 {
        return Err(Error::Inconsistent("a tower needs at least one level".into()));
    }
    let mut lengths = vec![base];
    let mut maps = Vec::new();
    for n in 2..=depth {
        let eps = level_scale(n);
        let cod = lengths[n - 2];
        let steps = pattern_steps(unit_count(cod, eps));
        if steps > VERTEX_BUDGET as f64 {
            return Err(Error::Intractable {
                level: n,
                needed: steps,
                budget: VERTEX_BUDGET,
            });
        }
        let dom = min_domain(cod, eps)?;
        let h = build_crooked(dom, cod, eps).map_err(|e| match e {
            Error::NotCrooked { eps, defect, .. } => Error::NotCrooked { level: n, eps, defect },
            other => other,
        })?;
        lengths.push(dom);
        maps.push(h);
    }
    assemble(&lengths, maps)
}

impl GammaGraph {
    pub fn depth(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// `h_2, …, h_N`.
    pub fn maps(&self) -> &[CrookedMap] {
        &self.maps
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    /// Distance to the level-`N` vertices, per global vertex.
    pub fn f(&self) -> &[f64] {
        &self.f
    }

    /// Vertex coordinates of `J_n`, `1 ≤ n ≤ N`.
    pub fn coords(&self, n: usize) -> &[f64] {
        &self.coords[n - 1]
    }

    /// Global indices of the vertices of `J_n`.
    pub fn level_range(&self, n: usize) -> Range<usize> {
        self.offsets[n - 1]..self.offsets[n]
    }

    pub fn frontier(&self) -> Range<usize> {
        self.level_range(self.depth())
    }

    pub fn vertex(&self, n: usize, k: usize) -> usize {
        self.offsets[n - 1] + k
    }

    /// Level of a global vertex.
    pub fn level_of(&self, v: usize) -> usize {
        self.offsets.partition_point(|&o| o <= v)
    }

    pub fn join_target(&self, v: usize) -> Option<usize> {
        self.joins[v]
    }

    /// Vertices of `Γ_n`, the levels `1, …, n`, are the first
    /// `vertex_count(n)` global indices.
    pub fn vertex_count(&self, n: usize) -> usize {
        self.offsets[n]
    }

    /// `Γ_n` as a subgraph of this tower.
    pub fn subgraph(&self, n: usize) -> Result<MetricGraph> {
        let cut = self.offsets[n];
        let edges = self
            .graph
            .edges()
            .iter()
            .copied()
            .filter(|&(u, v, _)| u < cut && v < cut)
            .collect();
        MetricGraph::new(self.graph.labels()[..cut].to_vec(), edges)
    }

    /// The tower rebuilt from its first `n` levels. Its level-`n` vertices are
    /// only the breakpoints of `h_n`, so it is coarser than
    /// [`GammaGraph::subgraph`].
    pub fn truncate(&self, n: usize) -> Result<GammaGraph> {
        if n == 0 || n > self.depth() {
            return Err(Error::NoSuchLevel {
                level: n,
                levels: self.depth(),
            });
        }
        assemble(&self.lengths[..n], self.maps[..n - 1].to_vec())
    }

    /// Coordinate in `J_n` of the point at `t ∈ J_m`, `n ≤ m`, through
    /// `h_{n+1} ∘ … ∘ h_m`.
    pub fn push_down(&self, m: usize, t: f64, n: usize) -> f64 {
        (n + 1..=m).rev().fold(t, |t, k| self.maps[k - 2].eval(t))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathIsometryReport {
    pub pass: bool,
    /// Largest `|f(u) − f(v)| − ℓ` over edges, with the edge.
    pub worst_edge: Option<(usize, usize, f64)>,
    /// Largest difference between `f` and a fresh shortest-path computation.
    pub recompute_error: f64,
}

/// `f` is the distance to the frontier: slope `±1` along every edge and
/// equal to a recomputation from scratch.
pub fn path_isometry_check(g: &GammaGraph) -> PathIsometryReport {
    let sources: Vec<usize> = g.frontier().collect();
    distance_function_check(&g.graph, &sources, &g.f)
}

/// Checks that `f` is the distance to `sources` in `graph`. On every edge
/// `(u, v, ℓ)` the interpolant `min(f(u)+t, f(v)+ℓ−t)` then has slope `±1`
/// and variation exactly `ℓ`.
pub fn distance_function_check(graph: &MetricGraph, sources: &[usize], f: &[f64]) -> PathIsometryReport {
    let mut worst: Option<(usize, usize, f64)> = None;
    for &(u, v, len) in graph.edges() {
        let excess = libm::fabs(f[u] - f[v]) - len;
        if worst.is_none_or(|w| excess > w.2) {
            worst = Some((u, v, excess));
        }
    }
    let seeds: Vec<(usize, f64)> = sources.iter().map(|&s| (s, 0.0)).collect();
    let fresh = graph.adjacency().dijkstra_multi(&seeds, f64::INFINITY);
    let recompute_error = fresh
        .iter()
        .zip(f)
        .map(|(a, b)| if a == b { 0.0 } else { libm::fabs(a - b) })
        .fold(0.0, f64::max);
    let pass = worst.is_none_or(|w| w.2 <= TOL_PATH) && recompute_error <= TOL_PATH;
    PathIsometryReport {
        pass,
        worst_edge: worst,
        recompute_error,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetractionReport {
    pub level: usize,
    pub short: bool,
    /// Largest `d_{n-1}(r a, r b) − d_n(a, b)`.
    pub worst_excess: f64,
    /// Largest change of a distance between points of `Γ_{n-1}` when
    /// measured in `Γ_n` instead.
    pub identity_change: f64,
    pub pairs: usize,
}

/// Checks that `Γ_n → Γ_{n-1}`, sending each vertex of `J_n` to its joining
/// target and fixing `Γ_{n-1}`, is short on vertex metrics.
pub fn retraction_check(g: &GammaGraph, n: usize) -> Result<RetractionReport> {
    if n < 2 || n > g.depth() {
        return Err(Error::NoSuchLevel {
            level: n,
            levels: g.depth(),
        });
    }
    let big = g.subgraph(n)?;
    let small = graph_metric(&g.subgraph(n - 1)?)?;
    let cut = g.vertex_count(n - 1);
    let r = |v: usize| {
        if v < cut {
            v
        } else {
            g.joins[v].expect("deep vertices are joined")
        }
    };
    let mut report = RetractionReport {
        level: n,
        short: true,
        worst_excess: f64::NEG_INFINITY,
        identity_change: 0.0,
        pairs: 0,
    };
    for a in 0..big.vertex_count() {
        let row = big.adjacency().dijkstra(a);
        for b in a + 1..big.vertex_count() {
            let image = small.dist(r(a), r(b));
            let excess = image - row[b];
            report.pairs += 1;
            if b < cut {
                report.identity_change = report.identity_change.max(libm::fabs(excess));
            }
            if excess > report.worst_excess {
                report.worst_excess = excess;
            }
            if excess > TOL_PATH * image.max(1.0) {
                return Err(Error::NotShort {
                    i: a,
                    j: b,
                    image,
                    base: row[b],
                });
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessRow {
    pub depth: usize,
    pub eps: f64,
    pub pull: PullValue,
    /// Distance in `Γ_depth` between the images of the pair.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessTable {
    /// Frontier coordinates of the pair in `J_N`.
    pub pair: (f64, f64),
    pub schedule: Vec<f64>,
    pub rows: Vec<WitnessRow>,
    /// Distance of the pair in the full tower.
    pub c: f64,
    /// Pull at the deepest level and smallest `ε`.
    pub final_pull: f64,
    /// For every `ε`, the pull never increases with depth.
    pub monotone: bool,
    /// `final_pull ≤ 0.1·c`.
    pub pass: bool,
}

/// Pull of `f` between two frontier vertices, for every truncation depth and
/// every `ε` in `schedule`.
///
/// `pair` indexes vertices of `J_N`. At depth `n` the pair is replaced by the
/// `J_n` vertices closest to its image under `h_{n+1} ∘ … ∘ h_N`, the tower
/// is [`GammaGraph::truncate`]d to `n` levels and subdivided at half the
/// smallest `ε`, and `f` is the distance to the level-`n` vertices.
pub fn non_intrinsic_witness(g: &GammaGraph, pair: (usize, usize), schedule: &[f64]) -> Result<WitnessTable> {
    let depth = g.depth();
    let frontier = g.coords(depth);
    for k in [pair.0, pair.1] {
        if k >= frontier.len() {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: frontier.len(),
            });
        }
    }
    if schedule.is_empty() {
        return Err(Error::BadSchedule { min_len: 1 });
    }
    for &e in schedule {
        positive("eps", e)?;
    }
    let h = schedule.iter().copied().fold(f64::INFINITY, f64::min) / 2.0;
    let (tx, ty) = (frontier[pair.0], frontier[pair.1]);
    let mut rows = Vec::new();
    let mut c = 0.0;
    for n in 1..=depth {
        let t = g.truncate(n)?;
        let level = t.coords(n);
        let x = t.vertex(n, closest(level, g.push_down(depth, tx, n)));
        let y = t.vertex(n, closest(level, g.push_down(depth, ty, n)));
        let distance = t.graph.adjacency().dijkstra(x)[y];
        if n == depth {
            c = distance;
        }
        let sub = subdivide_traced(&t.graph, h)?;
        let sources: Vec<(usize, f64)> = sub
            .origin
            .iter()
            .enumerate()
            .filter(|(_, o)| matches!(o, VertexOrigin::Original(v) if t.frontier().contains(v)))
            .map(|(i, _)| (i, 0.0))
            .collect();
        let f = sub.graph.adjacency().dijkstra_multi(&sources, f64::INFINITY);
        let map = EuclideanMap::from_values(f);
        for &eps in schedule {
            let pull = ChainGraph::new(&sub.graph, &map, eps)?.pull(x, y)?;
            rows.push(WitnessRow {
                depth: n,
                eps,
                pull,
                distance,
            });
        }
    }
    let per = schedule.len();
    let monotone = (0..per).all(|e| {
        (1..depth).all(|n| {
            let (a, b) = (rows[(n - 1) * per + e].pull, rows[n * per + e].pull);
            b.to_f64() <= a.to_f64() + crate::pullback::TOL_MONOTONE
        })
    });
    let last = rows
        .iter()
        .filter(|r| r.depth == depth)
        .min_by(|a, b| a.eps.total_cmp(&b.eps))
        .expect("schedule is non-empty");
    let final_pull = last.pull.to_f64();
    Ok(WitnessTable {
        pair: (tx, ty),
        schedule: schedule.to_vec(),
        rows,
        c,
        final_pull,
        monotone,
        pass: final_pull <= 0.1 * c,
    })
}

/// `Γ⁽²⁾`: vertices are same-level pairs `(x, y)`; `(x, y) ~ (x', y')` when
/// each coordinate moves along an edge of `Γ` or stays, with length the
/// larger of the two moves.
#[derive(Debug, Clone)]
pub struct GammaProduct {
    pub graph: MetricGraph,
    /// Global `Γ` vertices of each product vertex.
    pub pairs: Vec<(usize, usize)>,
    /// `offsets[n-1]` is the first product vertex over level `n`.
    pub offsets: Vec<usize>,
}

pub fn build_gamma_product(g: &GammaGraph, budget: usize) -> Result<GammaProduct> {
    let depth = g.depth();
    let needed: f64 = (1..=depth)
        .map(|n| {
            let m = g.level_range(n).len() as f64;
            m * m
        })
        .sum();
    if needed > budget as f64 {
        return Err(Error::Intractable {
            level: depth,
            needed,
            budget,
        });
    }
    let mut offsets = Vec::with_capacity(depth + 1);
    let mut pairs = Vec::new();
    for n in 1..=depth {
        offsets.push(pairs.len());
        for x in g.level_range(n) {
            for y in g.level_range(n) {
                pairs.push((x, y));
            }
        }
    }
    offsets.push(pairs.len());
    let id = |n: usize, x: usize, y: usize| {
        let r = g.level_range(n);
        offsets[n - 1] + (x - r.start) * r.len() + (y - r.start)
    };
    // moves inside J_n: neighbours along the path plus staying put
    let mut moves: Vec<Vec<(usize, f64)>> = vec![Vec::new(); g.graph.vertex_count()];
    for v in 0..moves.len() {
        moves[v].push((v, 0.0));
    }
    for &(u, v, len) in g.graph.edges() {
        if g.level_of(u) == g.level_of(v) {
            moves[u].push((v, len));
            moves[v].push((u, len));
        }
    }
    let mut edges = Vec::new();
    let mut labels = Vec::with_capacity(pairs.len());
    for (p, &(x, y)) in pairs.iter().enumerate() {
        labels.push(format!("({},{})", g.graph.label(x), g.graph.label(y)));
        let n = g.level_of(x);
        for &(x2, lx) in &moves[x] {
            for &(y2, ly) in &moves[y] {
                let q = id(n, x2, y2);
                if q > p {
                    edges.push((p, q, lx.max(ly)));
                }
            }
        }
        if let (Some(jx), Some(jy)) = (g.joins[x], g.joins[y]) {
            edges.push((p, id(n - 1, jx, jy), level_scale(n)));
        }
    }
    Ok(GammaProduct {
        graph: MetricGraph::new(labels, edges)?,
        pairs,
        offsets,
    })
}

impl GammaProduct {
    /// Both coordinate projections are short: every product edge is at
    /// least as long as the `Γ` distance moved by either coordinate.
    pub fn projections_short(&self, g: &GammaGraph) -> bool {
        let d = |a: usize, b: usize| -> f64 {
            if a == b {
                0.0
            } else {
                g.graph
                    .neighbors(a)
                    .filter(|&(w, _)| w == b)
                    .map(|(_, l)| l)
                    .fold(f64::INFINITY, f64::min)
            }
        };
        self.graph.edges().iter().all(|&(p, q, len)| {
            let ((x, y), (x2, y2)) = (self.pairs[p], self.pairs[q]);
            d(x, x2) <= len + TOL_PATH && d(y, y2) <= len + TOL_PATH
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductProbe {
    pub pairs: usize,
    /// `max_i d(ςᵢ p, ςᵢ q) ≤ d⁽²⁾(p, q)` on every probed pair.
    pub lower_holds: bool,
    /// `d⁽²⁾(p, q) ≤ d(x, x') + d(y, y')` on every probed pair.
    pub upper_holds: bool,
    /// Largest `d⁽²⁾ / (d(x,x') + d(y,y'))`.
    pub worst_upper_ratio: f64,
}

/// Compares product distances between frontier pairs with the coordinate
/// distances in `Γ`.
pub fn product_probe(prod: &GammaProduct, g: &GammaGraph) -> ProductProbe {
    let depth = g.depth();
    let front = prod.offsets[depth - 1]..prod.offsets[depth];
    let mut probe = ProductProbe {
        pairs: 0,
        lower_holds: true,
        upper_holds: true,
        worst_upper_ratio: 0.0,
    };
    let mut gamma_rows: Vec<Option<Vec<f64>>> = vec![None; g.graph.vertex_count()];
    let mut row_of = |v: usize| -> Vec<f64> {
        gamma_rows[v]
            .get_or_insert_with(|| g.graph.adjacency().dijkstra(v))
            .clone()
    };
    for p in front.clone() {
        let d2 = prod.graph.adjacency().dijkstra(p);
        let (x, y) = prod.pairs[p];
        let (rx, ry) = (row_of(x), row_of(y));
        for q in front.clone().filter(|&q| q > p) {
            let (x2, y2) = prod.pairs[q];
            let (dx, dy) = (rx[x2], ry[y2]);
            probe.pairs += 1;
            if dx.max(dy) > d2[q] + TOL_PATH {
                probe.lower_holds = false;
            }
            if d2[q] > dx + dy + TOL_PATH {
                probe.upper_holds = false;
            }
            probe.worst_upper_ratio = probe.worst_upper_ratio.max(d2[q] / (dx + dy));
        }
    }
    probe
}

/// Labels of the level vertices, for reports.
pub fn level_labels(g: &GammaGraph, n: usize) -> Vec<String> {
    g.level_range(n).map(|v| String::from(g.graph.label(v))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_shapes() {
        assert_eq!(crooked_pattern(0, 2), [0, 1, 2]);
        assert_eq!(crooked_pattern(0, 3), [0, 1, 2, 1, 2, 3]);
        assert_eq!(crooked_pattern(3, 0), [3, 2, 1, 2, 1, 0]);
        for m in 0..12 {
            let p = crooked_pattern(0, m);
            assert_eq!((p.len() - 1) as f64, pattern_steps(m as u32));
            assert!(p.windows(2).all(|w| (w[1] - w[0]).abs() == 1));
        }
    }

    #[test]
    fn identity_is_not_crooked_at_small_eps() {
        let h = CrookedMap::identity(1.0, 0.1).unwrap();
        let r = check_crooked(&h, 0.1, 0.0125).unwrap();
        assert!(!r.pass);
        assert!(r.worst.unwrap().2 > 0.0);
    }

    #[test]
    fn short_codomain_gives_identity() {
        let h = build_crooked(1.0, 1.0, 0.5).unwrap();
        assert_eq!(h.breakpoints(), [(0.0, 0.0), (1.0, 1.0)]);
        assert!(h.certified());
        let h = build_crooked(2.0, 0.3, 0.5).unwrap();
        assert_eq!(h.required(), 0.3);
        assert!((h.lipschitz() - 0.15).abs() < 1e-15);
    }

    #[test]
    fn quarter_scale_needs_a_longer_domain() {
        let req = min_domain(1.0, 0.25).unwrap();
        assert_eq!(req, 3.0);
        assert_eq!(
            build_crooked(1.0, 1.0, 0.25).unwrap_err(),
            Error::DomainTooShort {
                given: 1.0,
                required: 3.0
            }
        );
        let h = build_crooked(req, 1.0, 0.25).unwrap();
        assert!(h.breakpoint_count() > 2);
        assert!(check_crooked(&h, 0.25, 0.25 / 8.0).unwrap().pass);
    }

    #[test]
    fn eval_interpolates() {
        let h = CrookedMap::from_breakpoints(1.0, 0.5, vec![(0.0, 0.0), (1.0, 1.0), (1.5, 0.5), (2.0, 1.0)]).unwrap();
        assert_eq!(h.eval(0.5), 0.5);
        assert_eq!(h.eval(1.25), 0.75);
        assert_eq!(h.eval(9.0), 1.0);
        assert_eq!(h.laps(), 3);
    }

    #[test]
    fn rejects_steep_or_partial_maps() {
        assert!(matches!(
            CrookedMap::from_breakpoints(1.0, 0.5, vec![(0.0, 0.0), (0.5, 1.0)]),
            Err(Error::NotShort { .. })
        ));
        assert!(matches!(
            CrookedMap::from_breakpoints(1.0, 0.5, vec![(0.0, 0.0), (1.0, 0.5)]),
            Err(Error::Inconsistent(_))
        ));
    }

    #[test]
    fn closest_breaks_ties_low() {
        let c = [0.0, 1.0, 2.0];
        assert_eq!(closest(&c, 0.5), 0);
        assert_eq!(closest(&c, 0.51), 1);
        assert_eq!(closest(&c, -3.0), 0);
        assert_eq!(closest(&c, 7.0), 2);
    }

    #[test]
    fn single_level_tower() {
        let g = build_gamma(&[0.75], Vec::new()).unwrap();
        assert_eq!(g.coords(1), [0.0, 0.375, 0.75]);
        assert!(g.f().iter().all(|&f| f == 0.0));
        assert!(path_isometry_check(&g).pass);
    }

    #[test]
    fn small_tower_is_consistent() {
        let g = gamma_tower(4, 0.1875).unwrap();
        assert_eq!(g.lengths(), [0.1875, 0.1875, 0.1875, 0.3125]);
        assert!(path_isometry_check(&g).pass);
        for n in 2..=4 {
            let r = retraction_check(&g, n).unwrap();
            assert!(r.short);
            assert!(r.identity_change < 1e-12);
        }
        for v in g.level_range(3) {
            let t = g.join_target(v).unwrap();
            assert_eq!(g.level_of(t), 2);
        }
    }

    #[test]
    fn corrupted_f_fails() {
        let g = gamma_tower(3, 0.1875).unwrap();
        let mut f = g.f().to_vec();
        let v = g.vertex(1, 0);
        f[v] += 0.1;
        let sources: Vec<usize> = g.frontier().collect();
        let r = distance_function_check(g.graph(), &sources, &f);
        assert!(!r.pass);
        let (a, b, _) = r.worst_edge.unwrap();
        assert!(a == v || b == v);
    }

    #[test]
    fn maps_must_match_lengths() {
        let h = build_crooked(1.0, 1.0, 0.5).unwrap();
        assert!(matches!(build_gamma(&[1.0, 2.0], vec![h]), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn uncrooked_level_is_rejected() {
        let h = CrookedMap::identity(1.0, 0.25).unwrap();
        assert!(matches!(
            build_gamma(&[1.0, 1.0], vec![h]),
            Err(Error::NotCrooked { level: 2, .. })
        ));
    }
}

//! Piecewise-linear maps of metric graphs into the line with slope ±1.
//!
//! Each edge is sent to a zigzag between the prescribed endpoint values: a
//! uniform train of teeth whose up and down runs absorb the excess
//! `ℓ − |b − a|`. Such a map preserves the length of every curve, and its
//! pull-back distance is close to the graph metric at chain scales below the
//! tooth pitch.

use alloc::format;
use alloc::vec::Vec;

use crate::metric::{piece_count, MetricGraph, VertexOrigin};
use crate::{Error, EuclideanMap, Result, TOL_METRIC};

/// Slope tolerance for the `|Δv| = Δt` invariant.
pub const TOL_SLOPE: f64 = 1e-12;

/// Breakpoints `(t, value)` of a slope-±1 map `[0, ℓ] → ℝ` from `a` to `b`
/// staying within `ε/2` of the straight interpolation.
///
/// With `r = |b − a|/ℓ` the edge gets `k = ⌈ℓ(1 − r²)/ε⌉` teeth of pitch
/// `p = ℓ/k`; each tooth climbs `(p + |b−a|/k)/2` toward `b` and falls back
/// the rest, peaking `p(1 − r²)/2` above the interpolation.
pub fn zigzag_edge(a: f64, b: f64, len: f64, eps: f64) -> Result<Vec<(f64, f64)>> {
    if !(len > 0.0 && len.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "len",
            value: len,
            reason: "edge length must be positive",
        });
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "eps",
            value: eps,
            reason: "amplitude must be positive",
        });
    }
    let s = b - a;
    if s.abs() > len + TOL_METRIC {
        return Err(Error::NotShort {
            i: 0,
            j: 1,
            image: s.abs(),
            base: len,
        });
    }
    if len - s.abs() <= TOL_SLOPE * len.max(1.0) {
        return Ok(alloc::vec![(0.0, a), (len, b)]);
    }
    let r = (s.abs() / len).min(1.0);
    let k = (libm::ceil(len * (1.0 - r * r) / eps - 1e-9) as usize).max(1);
    let p = len / k as f64;
    let rise = s / k as f64;
    let up = (p + rise.abs()) / 2.0;
    let dir = if s < 0.0 { -1.0 } else { 1.0 };
    let mut pts = Vec::with_capacity(2 * k + 1);
    for m in 0..k {
        let t = m as f64 * p;
        let v = a + m as f64 * rise;
        pts.push((t, v));
        pts.push((t + up, v + dir * up));
    }
    pts.push((len, b));
    Ok(pts)
}

/// Interior direction changes of a breakpoint list.
pub fn fold_count(pts: &[(f64, f64)]) -> usize {
    pts.windows(3)
        .filter(|w| {
            let d1 = w[1].1 - w[0].1;
            let d2 = w[2].1 - w[1].1;
            d1 * d2 < 0.0
        })
        .count()
}

/// Total variation of a breakpoint list.
pub fn total_variation(pts: &[(f64, f64)]) -> f64 {
    pts.windows(2).map(|w| (w[1].1 - w[0].1).abs()).sum()
}

/// Piecewise-linear map from a metric graph into `ℝ`, one breakpoint list
/// per edge, parametrised from the edge's first endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct PLLineMap {
    edges: Vec<(usize, usize, f64)>,
    vertex_values: Vec<f64>,
    breakpoints: Vec<Vec<(f64, f64)>>,
}

impl PLLineMap {
    /// Checks that each list runs from `t = 0` to `t = ℓ` with increasing
    /// parameters and meets the vertex values. Slopes are not checked here,
    /// see [`tv_check`] and [`PLLineMap::check_slopes`].
    pub fn new(
        edges: Vec<(usize, usize, f64)>,
        vertex_values: Vec<f64>,
        breakpoints: Vec<Vec<(f64, f64)>>,
    ) -> Result<Self> {
        if breakpoints.len() != edges.len() {
            return Err(Error::MapSize {
                got: breakpoints.len(),
                expected: edges.len(),
            });
        }
        for (e, (&(u, v, len), pts)) in edges.iter().zip(&breakpoints).enumerate() {
            let bad = |reason: &'static str| Error::InvalidEdge { edge: e, u, v, reason };
            if u >= vertex_values.len() || v >= vertex_values.len() {
                return Err(bad("endpoint out of range"));
            }
            if pts.len() < 2 {
                return Err(bad("needs at least two breakpoints"));
            }
            let (t0, v0) = pts[0];
            let (t1, v1) = pts[pts.len() - 1];
            if t0 != 0.0 || (t1 - len).abs() > TOL_METRIC {
                return Err(bad("breakpoints must span [0, length]"));
            }
            if pts.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                return Err(bad("breakpoint parameters must increase"));
            }
            if (v0 - vertex_values[u]).abs() > TOL_SLOPE || (v1 - vertex_values[v]).abs() > TOL_SLOPE {
                return Err(bad("endpoint values disagree with vertex values"));
            }
        }
        Ok(PLLineMap {
            edges,
            vertex_values,
            breakpoints,
        })
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn vertex_values(&self) -> &[f64] {
        &self.vertex_values
    }

    pub fn breakpoints(&self, edge: usize) -> &[(f64, f64)] {
        &self.breakpoints[edge]
    }

    pub fn all_breakpoints(&self) -> &[Vec<(f64, f64)>] {
        &self.breakpoints
    }

    pub fn folds(&self) -> usize {
        self.breakpoints.iter().map(|p| fold_count(p)).sum()
    }

    /// Value at arclength `t` along `edge`.
    pub fn eval(&self, edge: usize, t: f64) -> f64 {
        let pts = &self.breakpoints[edge];
        let k = pts.partition_point(|p| p.0 <= t);
        if k == 0 {
            return pts[0].1;
        }
        if k == pts.len() {
            return pts[k - 1].1;
        }
        let (t0, v0) = pts[k - 1];
        let (t1, v1) = pts[k];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Largest `| |Δv| − Δt |` over all segments, with its edge.
    pub fn check_slopes(&self) -> (usize, f64) {
        let mut worst = (0, 0.0f64);
        for (e, pts) in self.breakpoints.iter().enumerate() {
            for w in pts.windows(2) {
                let err = ((w[1].1 - w[0].1).abs() - (w[1].0 - w[0].0)).abs();
                if err > worst.1 {
                    worst = (e, err);
                }
            }
        }
        worst
    }

    /// `sup |ι − f_interp|` where `f_interp` is linear along every edge.
    /// Both are piecewise linear, so breakpoints suffice.
    pub fn sup_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for (&(u, v, len), pts) in self.edges.iter().zip(&self.breakpoints) {
            let (a, b) = (self.vertex_values[u], self.vertex_values[v]);
            for &(t, val) in pts {
                worst = worst.max((val - (a + (b - a) * t / len)).abs());
            }
        }
        worst
    }

    /// Samples the map on a subdivision of the graph whose vertices include
    /// every breakpoint, with sub-edges at most `h` long.
    pub fn sample(&self, h: f64) -> Result<FoldedSample> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "h",
                value: h,
                reason: "must be positive",
            });
        }
        let n0 = self.vertex_values.len();
        let mut labels: Vec<alloc::string::String> = (0..n0).map(|i| format!("v{i}")).collect();
        let mut values = self.vertex_values.clone();
        let mut origin: Vec<VertexOrigin> = (0..n0).map(VertexOrigin::Original).collect();
        let mut edges = Vec::new();
        for (e, (&(u, v, _), pts)) in self.edges.iter().zip(&self.breakpoints).enumerate() {
            let mut prev = u;
            let mut prev_t = 0.0;
            let mut index = 0;
            for (s, w) in pts.windows(2).enumerate() {
                let ((t0, v0), (t1, v1)) = (w[0], w[1]);
                let k = piece_count(t1 - t0, h);
                let last_piece = s + 2 == pts.len();
                for q in 1..=k {
                    let (id, t) = if last_piece && q == k {
                        (v, t1)
                    } else {
                        let t = t0 + (t1 - t0) * q as f64 / k as f64;
                        index += 1;
                        labels.push(format!("e{e}:{index}"));
                        values.push(v0 + (v1 - v0) * q as f64 / k as f64);
                        origin.push(VertexOrigin::OnEdge { edge: e, index, t });
                        (labels.len() - 1, t)
                    };
                    edges.push((prev, id, t - prev_t));
                    prev = id;
                    prev_t = t;
                }
            }
        }
        Ok(FoldedSample {
            graph: MetricGraph::new(labels, edges)?,
            map: EuclideanMap::from_values(values),
            origin,
        })
    }
}

/// A folded map restricted to a fine subdivision.
#[derive(Debug, Clone)]
pub struct FoldedSample {
    pub graph: MetricGraph,
    pub map: EuclideanMap,
    pub origin: Vec<VertexOrigin>,
}

/// Folds every edge of `g` around the linear interpolation of `values`.
/// Vertex values are kept exactly.
pub fn fold_graph(g: &MetricGraph, values: &[f64], eps: f64) -> Result<PLLineMap> {
    if values.len() != g.vertex_count() {
        return Err(Error::MapSize {
            got: values.len(),
            expected: g.vertex_count(),
        });
    }
    // the graph metric is a path metric, so shortness on edges is enough
    for &(u, v, len) in g.edges() {
        let image = (values[u] - values[v]).abs();
        if image > len + TOL_METRIC {
            return Err(Error::NotShort {
                i: u.min(v),
                j: u.max(v),
                image,
                base: len,
            });
        }
    }
    let breakpoints = g
        .edges()
        .iter()
        .map(|&(u, v, len)| zigzag_edge(values[u], values[v], len, eps))
        .collect::<Result<Vec<_>>>()?;
    PLLineMap::new(g.edges().to_vec(), values.to_vec(), breakpoints)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TvReport {
    /// Total variation per edge.
    pub variation: Vec<f64>,
    pub worst_edge: Option<usize>,
    /// `max |TV − ℓ|`.
    pub worst_error: f64,
    pub pass: bool,
}

/// Checks that every edge's total variation equals its length within `1e-9`.
pub fn tv_check(m: &PLLineMap) -> TvReport {
    let variation: Vec<f64> = m.breakpoints.iter().map(|p| total_variation(p)).collect();
    let mut worst_edge = None;
    let mut worst_error = 0.0f64;
    for (e, (&tv, &(_, _, len))) in variation.iter().zip(&m.edges).enumerate() {
        let err = (tv - len).abs();
        if worst_edge.is_none() || err > worst_error {
            worst_error = worst_error.max(err);
            worst_edge = Some(e);
        }
    }
    TvReport {
        variation,
        worst_edge,
        worst_error,
        pass: worst_error <= TOL_METRIC,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn straight_dev(pts: &[(f64, f64)], a: f64, b: f64, len: f64) -> f64 {
        pts.iter()
            .map(|&(t, v)| (v - (a + (b - a) * t / len)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn flat_edge_zigzags() {
        let pts = zigzag_edge(0.0, 0.0, 1.0, 0.25).unwrap();
        assert!((total_variation(&pts) - 1.0).abs() < 1e-12);
        assert!(straight_dev(&pts, 0.0, 0.0, 1.0) <= 0.125 + 1e-15);
        assert_eq!(pts.len(), 9);
        assert_eq!(fold_count(&pts), 7);
        assert!(pts.len() <= 2 * 4 + 2);
    }

    #[test]
    fn tight_edge_is_straight() {
        assert_eq!(zigzag_edge(0.0, 1.0, 1.0, 0.1).unwrap(), vec![(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(zigzag_edge(2.0, 1.5, 0.5, 0.1).unwrap(), vec![(0.0, 2.0), (0.5, 1.5)]);
    }

    #[test]
    fn sloped_edge() {
        let pts = zigzag_edge(0.0, 0.5, 1.0, 0.1).unwrap();
        assert!((total_variation(&pts) - 1.0).abs() < 1e-12);
        assert_eq!(pts[0], (0.0, 0.0));
        assert_eq!(*pts.last().unwrap(), (1.0, 0.5));
        assert!(straight_dev(&pts, 0.0, 0.5, 1.0) <= 0.05 + 1e-12);
        for w in pts.windows(2) {
            assert!(((w[1].1 - w[0].1).abs() - (w[1].0 - w[0].0)).abs() < 1e-12);
        }
    }

    #[test]
    fn descending_edge() {
        let pts = zigzag_edge(1.0, 0.2, 2.0, 0.3).unwrap();
        assert!((total_variation(&pts) - 2.0).abs() < 1e-12);
        assert!(straight_dev(&pts, 1.0, 0.2, 2.0) <= 0.15 + 1e-12);
    }

    #[test]
    fn long_jump_rejected() {
        assert!(matches!(zigzag_edge(0.0, 2.0, 1.0, 0.1), Err(Error::NotShort { .. })));
    }

    #[test]
    fn star_folds_independently() {
        let g = MetricGraph::unlabeled(4, vec![(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        let m = fold_graph(&g, &[0.0; 4], 0.2).unwrap();
        let r = tv_check(&m);
        assert!(r.pass);
        assert!(r.variation.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!(m.sup_deviation() <= 0.1 + 1e-12);
    }

    #[test]
    fn isometric_edge_has_no_folds() {
        let g = MetricGraph::path(&[1.0]).unwrap();
        let m = fold_graph(&g, &[0.0, 1.0], 0.1).unwrap();
        assert_eq!(m.folds(), 0);
        assert!(tv_check(&m).pass);
    }

    #[test]
    fn non_short_values_name_pair() {
        let g = MetricGraph::path(&[1.0, 1.0]).unwrap();
        assert!(matches!(
            fold_graph(&g, &[0.0, 0.0, 1.5], 0.1),
            Err(Error::NotShort { i: 1, j: 2, .. })
        ));
    }

    #[test]
    fn corrupted_slope_fails_tv() {
        let edges = vec![(0, 1, 1.0), (1, 2, 1.0)];
        let bps = vec![vec![(0.0, 0.0), (1.0, 1.0)], vec![(0.0, 1.0), (0.5, 1.25), (1.0, 1.0)]];
        let m = PLLineMap::new(edges, vec![0.0, 1.0, 1.0], bps).unwrap();
        let r = tv_check(&m);
        assert!(!r.pass);
        assert_eq!(r.worst_edge, Some(1));
        assert_eq!(m.check_slopes().0, 1);
    }

    #[test]
    fn constructor_checks_endpoints() {
        let edges = vec![(0, 1, 1.0)];
        assert!(PLLineMap::new(edges.clone(), vec![0.0, 1.0], vec![vec![(0.0, 0.0), (1.0, 0.5)]]).is_err());
        assert!(PLLineMap::new(edges, vec![0.0, 1.0], vec![vec![(0.0, 0.0), (0.9, 1.0)]]).is_err());
    }

    #[test]
    fn sample_contains_breakpoints_and_is_short() {
        let g = MetricGraph::path(&[1.0]).unwrap();
        let m = fold_graph(&g, &[0.0, 0.0], 0.25).unwrap();
        let s = m.sample(0.05).unwrap();
        assert!(s.graph.edges().iter().all(|e| e.2 <= 0.05 + 1e-12));
        for &(u, v, len) in s.graph.edges() {
            let d = (s.map.coords()[u] - s.map.coords()[v]).abs();
            assert!((d - len).abs() < 1e-12);
        }
        for &(_, val) in m.breakpoints(0) {
            assert!(s.map.coords().iter().any(|&x| (x - val).abs() < 1e-15));
        }
        assert!((s.graph.total_length() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eval_interpolates() {
        let g = MetricGraph::path(&[1.0]).unwrap();
        let m = fold_graph(&g, &[0.0, 0.0], 0.5).unwrap();
        // two teeth of pitch 1/2
        assert!((m.eval(0, 0.25) - 0.25).abs() < 1e-15);
        assert!((m.eval(0, 0.5)).abs() < 1e-15);
        assert!((m.eval(0, 0.125) - 0.125).abs() < 1e-15);
    }
}

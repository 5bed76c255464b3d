//! ε-chain pull-back pre-metrics.
//!
//! For a map `f` on a sample and a scale `ε`, the pre-metric `pull_{f,ε}(x, x')`
//! is the smallest image length `Σ |f(x_{i-1}) f(x_i)|` over chains from `x`
//! to `x'` whose steps are at most `ε` in the sample. Here it is a shortest
//! path in the [`ChainGraph`]. As `ε` shrinks the value can only grow; on a
//! finite sample the sequence stabilises, so the last value of a schedule is
//! reported as-is and never extrapolated.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::graph::Adjacency;
use crate::metric::{check_index, MetricSource, PointMap};
use crate::pack::{pack_exact, Packing};
use crate::{Error, EuclideanMap, FiniteMetricSpace, Result, TOL_METRIC};

/// Slack on the closed chain condition `dist <= ε`, so that grid steps which
/// equal `ε` in exact arithmetic but land a few ulps above it still count as edges.
pub const CHAIN_TIE_TOL: f64 = 1e-12;

/// Tolerance for monotonicity in `ε` and the pre-metric axioms.
pub const TOL_MONOTONE: f64 = 1e-12;

/// A pull-back value; points in different `ε`-components are infinitely far.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PullValue {
    Finite(f64),
    Infinite,
}

impl PullValue {
    pub fn from_distance(d: f64) -> Self {
        if d.is_finite() {
            PullValue::Finite(d)
        } else {
            PullValue::Infinite
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, PullValue::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            PullValue::Finite(v) => Some(v),
            PullValue::Infinite => None,
        }
    }

    /// The value as a float, with `+∞` for [`PullValue::Infinite`]. Only for
    /// arithmetic on bounds; never stored.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl PartialOrd for PullValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (PullValue::Finite(a), PullValue::Finite(b)) => a.partial_cmp(b),
            (PullValue::Finite(_), PullValue::Infinite) => Some(Ordering::Less),
            (PullValue::Infinite, PullValue::Finite(_)) => Some(Ordering::Greater),
            (PullValue::Infinite, PullValue::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl core::fmt::Display for PullValue {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PullValue::Finite(v) => write!(f, "{v}"),
            PullValue::Infinite => f.write_str("inf"),
        }
    }
}

/// Sample points joined when at most `ε` apart, weighted by image distance.
#[derive(Debug, Clone)]
pub struct ChainGraph {
    eps: f64,
    adj: Adjacency,
}

impl ChainGraph {
    pub fn new<M, F>(m: &M, f: &F, eps: f64) -> Result<Self>
    where
        M: MetricSource + ?Sized,
        F: PointMap + ?Sized,
    {
        check_eps(eps)?;
        if f.len() != m.len() {
            return Err(Error::MapSize {
                got: f.len(),
                expected: m.len(),
            });
        }
        let mut edges = Vec::new();
        for i in 0..m.len() {
            for (j, _) in m.neighbors_within(i, eps + CHAIN_TIE_TOL) {
                if j > i {
                    edges.push((i, j, f.image_distance(i, j)));
                }
            }
        }
        Ok(ChainGraph {
            eps,
            adj: Adjacency::from_edges(m.len(), edges),
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn len(&self) -> usize {
        self.adj.vertex_count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn edge_count(&self) -> usize {
        self.adj.edge_count()
    }

    /// `(i, j, weight)` for every chain step with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for i in 0..self.len() {
            for (j, w) in self.adj.neighbors(i) {
                if j > i {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    /// `pull_{f,ε}(x, ·)` for every point.
    pub fn pull_from(&self, x: usize) -> Result<Vec<PullValue>> {
        check_index(x, self.len())?;
        Ok(self.adj.dijkstra(x).into_iter().map(PullValue::from_distance).collect())
    }

    pub fn pull(&self, x: usize, y: usize) -> Result<PullValue> {
        check_index(y, self.len())?;
        Ok(self.pull_from(x)?[y])
    }

    /// The full pre-metric matrix, symmetrised since Dijkstra from either
    /// end may round differently.
    pub fn pull_matrix(&self) -> Vec<Vec<PullValue>> {
        let mut m: Vec<Vec<PullValue>> = (0..self.len())
            .map(|x| self.pull_from(x).expect("index in range"))
            .collect();
        for i in 0..m.len() {
            for j in i + 1..m.len() {
                let v = if m[j][i] < m[i][j] { m[j][i] } else { m[i][j] };
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        m
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "eps",
            value: eps,
            reason: "must be positive and finite",
        })
    }
}

/// `pull_{f,ε}(x, x')`.
pub fn pull_eps<M, F>(m: &M, f: &F, eps: f64, x: usize, y: usize) -> Result<PullValue>
where
    M: MetricSource + ?Sized,
    F: PointMap + ?Sized,
{
    check_index(x, m.len())?;
    check_index(y, m.len())?;
    ChainGraph::new(m, f, eps)?.pull(x, y)
}

/// Checks that a schedule is strictly decreasing, has at least three
/// entries and never goes below the sample's resolution.
pub fn check_schedule<M: MetricSource + ?Sized>(m: &M, schedule: &[f64]) -> Result<()> {
    if schedule.len() < 3 || schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::BadSchedule { min_len: 3 });
    }
    for &eps in schedule {
        check_eps(eps)?;
    }
    let min_distance = m.min_positive_distance();
    let last = *schedule.last().expect("non-empty");
    if last + CHAIN_TIE_TOL < min_distance {
        return Err(Error::ScaleUnresolved {
            eps: last,
            min_distance,
        });
    }
    Ok(())
}

/// The monotone sequence `pull_{f,ε_k}(x, x')` along a schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct PullSequence {
    pub schedule: Vec<f64>,
    pub values: Vec<PullValue>,
}

impl PullSequence {
    /// The finest-scale value, the finite approximant of `pull_f`.
    pub fn last(&self) -> PullValue {
        *self.values.last().expect("schedule has at least three entries")
    }
}

fn check_monotone(i: usize, j: usize, schedule: &[f64], values: &[PullValue]) -> Result<()> {
    for k in 1..values.len() {
        let (coarse, fine) = (values[k - 1], values[k]);
        let bad = match (coarse, fine) {
            (PullValue::Finite(c), PullValue::Finite(f)) => f < c - TOL_MONOTONE,
            (PullValue::Infinite, PullValue::Finite(_)) => true,
            _ => false,
        };
        if bad {
            return Err(Error::NotMonotone {
                i,
                j,
                eps: schedule[k],
                coarse: coarse.to_f64(),
                fine: fine.to_f64(),
            });
        }
    }
    Ok(())
}

/// `pull_{f,ε}(x, x')` along a decreasing schedule.
pub fn pull_limit<M, F>(m: &M, f: &F, schedule: &[f64], x: usize, y: usize) -> Result<PullSequence>
where
    M: MetricSource + ?Sized,
    F: PointMap + ?Sized,
{
    check_schedule(m, schedule)?;
    let values = schedule
        .iter()
        .map(|&eps| pull_eps(m, f, eps, x, y))
        .collect::<Result<Vec<_>>>()?;
    check_monotone(x, y, schedule, &values)?;
    Ok(PullSequence {
        schedule: schedule.to_vec(),
        values,
    })
}

/// All-pairs pull-back values along a schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct PullCertificate {
    pub schedule: Vec<f64>,
    /// `values[k][i][j] = pull_{f,ε_k}(i, j)`.
    pub values: Vec<Vec<Vec<PullValue>>>,
}

impl PullCertificate {
    pub fn compute<M, F>(m: &M, f: &F, schedule: &[f64]) -> Result<Self>
    where
        M: MetricSource + ?Sized,
        F: PointMap + ?Sized,
    {
        check_schedule(m, schedule)?;
        let values = schedule
            .iter()
            .map(|&eps| ChainGraph::new(m, f, eps).map(|c| c.pull_matrix()))
            .collect::<Result<Vec<_>>>()?;
        let n = m.len();
        let mut seq = vec![PullValue::Finite(0.0); schedule.len()];
        for i in 0..n {
            for j in 0..n {
                for (k, s) in seq.iter_mut().enumerate() {
                    *s = values[k][i][j];
                }
                check_monotone(i, j, schedule, &seq)?;
            }
        }
        Ok(PullCertificate {
            schedule: schedule.to_vec(),
            values,
        })
    }

    pub fn sequence(&self, i: usize, j: usize) -> PullSequence {
        PullSequence {
            schedule: self.schedule.clone(),
            values: self.values.iter().map(|v| v[i][j]).collect(),
        }
    }

    pub fn last(&self) -> &[Vec<PullValue>] {
        self.values.last().expect("non-empty schedule")
    }
}

/// Result of checking the perturbation inequality
/// `pull_{f,ε} <= pull_{h,ε} + 4·δ·pack_ε` on every pair.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub pack: Packing,
    /// `4·δ·pack_ε`.
    pub bound: f64,
    /// Smallest `pull_{h,ε} + bound − pull_{f,ε}` over pairs (`+∞` when every
    /// pair is in different chain components).
    pub min_slack: f64,
    pub tightest_pair: Option<(usize, usize)>,
    pub holds: bool,
}

pub fn lemma_check(
    m: &FiniteMetricSpace,
    f: &EuclideanMap,
    h: &EuclideanMap,
    eps: f64,
    delta: f64,
) -> Result<LemmaReport> {
    check_eps(eps)?;
    for map in [f, h] {
        if map.len() != m.len() {
            return Err(Error::MapSize {
                got: map.len(),
                expected: m.len(),
            });
        }
    }
    let (point, distance) = f.sup_distance(h)?;
    if distance >= delta {
        return Err(Error::MapsTooFar { point, distance, delta });
    }
    let pack = pack_exact(m, eps)?;
    let bound = 4.0 * delta * pack.count as f64;
    let pf = ChainGraph::new(m, f, eps)?.pull_matrix();
    let ph = ChainGraph::new(m, h, eps)?.pull_matrix();
    let mut min_slack = f64::INFINITY;
    let mut tightest_pair = None;
    for i in 0..m.len() {
        for j in (i + 1)..m.len() {
            // the chain graphs share their edges, so both are finite or neither
            let slack = match (pf[i][j], ph[i][j]) {
                (PullValue::Finite(a), PullValue::Finite(b)) => b + bound - a,
                (PullValue::Infinite, PullValue::Finite(_)) => f64::NEG_INFINITY,
                _ => continue,
            };
            if slack < min_slack {
                min_slack = slack;
                tightest_pair = Some((i, j));
            }
        }
    }
    Ok(LemmaReport {
        pack,
        bound,
        min_slack,
        tightest_pair,
        holds: min_slack >= -TOL_METRIC,
    })
}

/// `δ = ε / (4·pack)`: perturbations below this move `pull_{·,ε₀}` by at
/// most `ε`, where `pack` is the packing number at chain scale `ε₀`.
pub fn delta_for(pack: usize, eps: f64) -> f64 {
    eps / (4.0 * pack.max(1) as f64)
}

/// [`delta_for`] with the packing number computed exactly at scale `eps0`.
pub fn delta_for_space(m: &FiniteMetricSpace, eps: f64, eps0: f64) -> Result<f64> {
    Ok(delta_for(pack_exact(m, eps0)?.count, eps))
}

/// How far pull-back values at the finest scale are from the sample metric.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometryCertificate {
    pub schedule: Vec<f64>,
    /// `max |pull_{f,ε_last} − d|` over pairs.
    pub max_defect: f64,
    /// `max (d − pull)`: distance lost by the map.
    pub under: f64,
    /// `max (pull − d)`: chains longer than the distance.
    pub over: f64,
    /// `max (|f(x)f(x')| − d)`; positive means `f` is not short.
    pub shortness: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn certify_intrinsic<M, F>(m: &M, f: &F, schedule: &[f64], tolerance: f64) -> Result<IsometryCertificate>
where
    M: MetricSource + ?Sized,
    F: PointMap + ?Sized,
{
    check_schedule(m, schedule)?;
    let chains = schedule
        .iter()
        .map(|&eps| ChainGraph::new(m, f, eps))
        .collect::<Result<Vec<_>>>()?;
    let n = m.len();
    let mut cert = IsometryCertificate {
        schedule: schedule.to_vec(),
        max_defect: 0.0,
        under: 0.0,
        over: 0.0,
        shortness: f64::NEG_INFINITY,
        worst_pair: None,
        tolerance,
        pass: true,
    };
    let mut seq = vec![PullValue::Finite(0.0); schedule.len()];
    for i in 0..n {
        let rows: Vec<Vec<PullValue>> = chains.iter().map(|c| c.pull_from(i)).collect::<Result<_>>()?;
        let d = m.distances_from(i);
        for j in (i + 1)..n {
            for (k, s) in seq.iter_mut().enumerate() {
                *s = rows[k][j];
            }
            check_monotone(i, j, schedule, &seq)?;
            let pull = seq[seq.len() - 1].to_f64();
            let defect = (pull - d[j]).abs();
            cert.under = cert.under.max(d[j] - pull);
            cert.over = cert.over.max(pull - d[j]);
            cert.shortness = cert.shortness.max(f.image_distance(i, j) - d[j]);
            if defect > cert.max_defect || cert.worst_pair.is_none() {
                cert.max_defect = cert.max_defect.max(defect);
                cert.worst_pair = Some((i, j));
            }
        }
    }
    if n < 2 {
        cert.shortness = 0.0;
    }
    cert.pass = cert.max_defect <= tolerance;
    Ok(cert)
}

/// One probe radius of the preimage-diameter scan.
#[derive(Debug, Clone, PartialEq)]
pub struct PreimageProbe {
    pub delta: f64,
    pub pass: bool,
    /// Largest component diameter over all balls.
    pub max_diameter: f64,
}

/// A chain component of a ball preimage that is too large.
#[derive(Debug, Clone, PartialEq)]
pub struct PreimageWitness {
    pub delta: f64,
    /// Index of the sample point whose image centres the ball.
    pub center: usize,
    pub component: Vec<usize>,
    pub diameter: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreimageDelta {
    /// Largest probe at which every component has diameter `< ε`.
    pub estimate: Option<f64>,
    /// Failing component for the smallest failing probe above the estimate.
    pub witness: Option<PreimageWitness>,
    pub probes: Vec<PreimageProbe>,
}

/// Scans open image balls `B(f(p), δ')` and the `ε₀`-chain components of
/// their preimages. Passing is monotone in `δ'`, so the estimate is the
/// boundary between passing and failing probes. This is an estimator: only
/// ball preimages are examined, not every connected set.
pub fn diam_preimage_delta(
    m: &FiniteMetricSpace,
    f: &EuclideanMap,
    eps: f64,
    chain_scale: f64,
    probes: &[f64],
) -> Result<PreimageDelta> {
    check_eps(eps)?;
    if !(chain_scale > 0.0 && chain_scale.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "chain_scale",
            value: chain_scale,
            reason: "chain scale must be set to a positive value",
        });
    }
    if probes.windows(2).any(|w| !(w[1] < w[0])) || probes.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::InvalidParameter {
            name: "probes",
            value: probes.first().copied().unwrap_or(0.0),
            reason: "probe radii must be positive and strictly decreasing",
        });
    }
    if f.len() != m.len() {
        return Err(Error::MapSize {
            got: f.len(),
            expected: m.len(),
        });
    }
    let n = m.len();
    let near: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            m.neighbors_within(i, chain_scale + CHAIN_TIE_TOL)
                .into_iter()
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let mut out = PreimageDelta {
        estimate: None,
        witness: None,
        probes: Vec::with_capacity(probes.len()),
    };
    let mut mark = vec![usize::MAX; n];
    let mut inside = vec![false; n];
    let mut stack = Vec::new();
    for &delta in probes {
        let mut max_diameter = 0.0f64;
        let mut worst: Option<PreimageWitness> = None;
        for center in 0..n {
            for q in 0..n {
                inside[q] = f.image_distance(center, q) < delta;
                mark[q] = usize::MAX;
            }
            for start in 0..n {
                if !inside[start] || mark[start] != usize::MAX {
                    continue;
                }
                let mut comp = vec![start];
                mark[start] = start;
                stack.push(start);
                while let Some(u) = stack.pop() {
                    for &v in &near[u] {
                        if inside[v] && mark[v] == usize::MAX {
                            mark[v] = start;
                            comp.push(v);
                            stack.push(v);
                        }
                    }
                }
                let diam = m.subset_diameter(&comp);
                if diam > max_diameter || worst.is_none() {
                    max_diameter = max_diameter.max(diam);
                    if diam >= eps {
                        comp.sort_unstable();
                        worst = Some(PreimageWitness {
                            delta,
                            center,
                            component: comp,
                            diameter: diam,
                        });
                    }
                }
            }
        }
        let pass = max_diameter < eps;
        out.probes.push(PreimageProbe {
            delta,
            pass,
            max_diameter,
        });
        if pass {
            if out.estimate.is_none() {
                out.estimate = Some(delta);
            }
        } else if out.estimate.is_none() {
            // probes decrease, so the last failure seen before the first pass
            // is the one just above the estimate
            out.witness = worst;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> FiniteMetricSpace {
        FiniteMetricSpace::on_line(xs).unwrap()
    }

    fn grid(n: usize) -> Vec<f64> {
        (0..=n).map(|i| i as f64 / n as f64).collect()
    }

    #[test]
    fn forced_chain_on_three_points() {
        let m = line(&[0.0, 1.0, 2.0]);
        let id = EuclideanMap::from_values(vec![0.0, 1.0, 2.0]);
        assert_eq!(pull_eps(&m, &id, 1.0, 0, 2).unwrap(), PullValue::Finite(2.0));
        let c = EuclideanMap::from_values(vec![5.0; 3]);
        assert_eq!(pull_eps(&m, &c, 1.0, 0, 2).unwrap(), PullValue::Finite(0.0));
        assert_eq!(pull_eps(&m, &id, 0.5, 0, 2).unwrap(), PullValue::Infinite);
        assert!(pull_eps(&m, &id, 1.0, 0, 3).is_err());
    }

    #[test]
    fn identity_on_grid_keeps_length() {
        let xs = grid(100);
        let m = line(&xs);
        let id = EuclideanMap::from_values(xs.clone());
        let s = pull_limit(&m, &id, &[0.2, 0.1, 0.05], 0, 100).unwrap();
        for v in s.values {
            assert!((v.to_f64() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn one_fold_grows_toward_length() {
        let xs = grid(100);
        let m = line(&xs);
        let f = EuclideanMap::from_values(xs.iter().map(|t| (t - 0.5).abs()).collect());
        let s = pull_limit(&m, &f, &[0.2, 0.1, 0.05], 0, 100).unwrap();
        assert!(s.last().to_f64() >= 1.0 - 2.0 * 0.05);
        assert!(s.values[0] <= s.values[2]);
    }

    #[test]
    fn schedule_errors() {
        let m = line(&grid(10));
        let id = EuclideanMap::from_values(grid(10));
        assert!(matches!(
            pull_limit(&m, &id, &[0.2, 0.1], 0, 1),
            Err(Error::BadSchedule { .. })
        ));
        assert!(matches!(
            pull_limit(&m, &id, &[0.2, 0.3, 0.1], 0, 1),
            Err(Error::BadSchedule { .. })
        ));
        assert!(matches!(
            pull_limit(&m, &id, &[0.2, 0.1, 0.05], 0, 1),
            Err(Error::ScaleUnresolved { .. })
        ));
    }

    #[test]
    fn constant_map_pulls_to_zero() {
        let xs = grid(20);
        let m = line(&xs);
        let c = EuclideanMap::constant(21, &[1.0, 2.0]);
        let cert = PullCertificate::compute(&m, &c, &[0.2, 0.1, 0.05]).unwrap();
        assert!(cert
            .values
            .iter()
            .flatten()
            .flatten()
            .all(|v| *v == PullValue::Finite(0.0)));
    }

    #[test]
    fn lemma_with_equal_maps_has_full_slack() {
        let xs = grid(10);
        let m = line(&xs);
        let f = EuclideanMap::from_values(xs.clone());
        let r = lemma_check(&m, &f, &f, 0.25, 0.01).unwrap();
        assert_eq!(r.pack.count, 4);
        assert!((r.min_slack - 4.0 * 0.01 * 4.0).abs() < 1e-15);
        assert!(r.holds);
    }

    #[test]
    fn lemma_shifted_map() {
        let xs = grid(10);
        let m = line(&xs);
        let h = EuclideanMap::from_values(xs.clone());
        let f = EuclideanMap::from_values(xs.iter().map(|x| x + 0.005).collect());
        let r = lemma_check(&m, &f, &h, 0.25, 0.01).unwrap();
        assert!(r.holds);
        assert!((r.min_slack - r.bound).abs() < 1e-12);
    }

    #[test]
    fn lemma_rejects_far_maps() {
        let m = line(&[0.0, 1.0]);
        let h = EuclideanMap::from_values(vec![0.0, 1.0]);
        let f = EuclideanMap::from_values(vec![0.0, 1.2]);
        assert!(matches!(
            lemma_check(&m, &f, &h, 1.0, 0.1),
            Err(Error::MapsTooFar { point: 1, .. })
        ));
        let g = EuclideanMap::from_points(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(
            lemma_check(&m, &g, &h, 1.0, 0.1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn delta_arithmetic() {
        assert!((delta_for(5, 0.1) - 0.005).abs() < 1e-18);
        assert_eq!(delta_for(1, 0.1), 0.025);
        let m = line(&[0.0, 0.5, 1.0]);
        assert_eq!(delta_for_space(&m, 0.1, 2.0).unwrap(), 0.025);
    }

    #[test]
    fn certificates() {
        let xs = grid(20);
        let m = line(&xs);
        let id = EuclideanMap::from_values(xs.clone());
        let c = certify_intrinsic(&m, &id, &[0.2, 0.1, 0.05], 1e-9).unwrap();
        assert!(c.pass);
        assert!(c.max_defect < 1e-12);

        let m = line(&[0.0, 1.0]);
        let k = EuclideanMap::from_values(vec![3.0, 3.0]);
        let c = certify_intrinsic(&m, &k, &[3.0, 2.0, 1.0], 1e-9).unwrap();
        assert!(!c.pass);
        assert_eq!(c.max_defect, 1.0);
        assert_eq!(c.under, 1.0);
        assert_eq!(c.worst_pair, Some((0, 1)));
    }

    #[test]
    fn preimage_scan_constant_map_fails_everywhere() {
        let m = line(&[0.0, 1.0]);
        let k = EuclideanMap::from_values(vec![0.0, 0.0]);
        let r = diam_preimage_delta(&m, &k, 0.5, 1.0, &[0.4, 0.2, 0.1]).unwrap();
        assert_eq!(r.estimate, None);
        assert!(r.probes.iter().all(|p| !p.pass));
        assert!(diam_preimage_delta(&m, &k, 0.5, 0.0, &[0.1]).is_err());
    }

    #[test]
    fn preimage_scan_identity() {
        let xs = grid(100);
        let m = line(&xs);
        let id = EuclideanMap::from_values(xs.clone());
        let probes = [0.3, 0.2, 0.17, 0.14, 0.1, 0.05];
        let r = diam_preimage_delta(&m, &id, 0.3, 0.01, &probes).unwrap();
        // an open ball of radius δ' on the 0.01 grid has diameter about 2δ' − 0.02
        assert_eq!(r.estimate, Some(0.14));
        let w = r.witness.unwrap();
        assert_eq!(w.delta, 0.17);
        assert!(w.diameter >= 0.3);
    }
}

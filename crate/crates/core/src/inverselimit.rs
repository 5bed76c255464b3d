//! Towers `X_0 ← X_1 ← … ← X_N` of finite spaces with short bonding maps.
//!
//! Only the consecutive maps `β_n : X_{n+1} → X_n` are stored; composites are
//! derived, so functoriality holds by construction. A thread is a compatible
//! sequence of points and is determined by its top index. The limit distance
//! between threads is approximated by the depth-`N` value, a lower bound for
//! the true limit since short maps only contract.
//!
//! A finite tower is the truncation of an infinite one, and the top level is
//! not yet constrained by a further bonding map. The *stable* approximants
//! therefore stop one level short: points of `X_{N-1}` hit by `β_{N-1}`,
//! with the level `N − 1` metric. For a tower collapsing onto a point this
//! is the one-point space, while the plain thread space still has `|X_N|`
//! points.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::metric::{check_index, gh_upper_bound, IndexMap, PointMap};
use crate::pullback::{certify_intrinsic, ChainGraph, TOL_MONOTONE};
use crate::{Error, EuclideanMap, FiniteMetricSpace, Result, TOL_METRIC};

#[derive(Debug, Clone)]
pub struct InverseSystem {
    levels: Vec<FiniteMetricSpace>,
    bonding: Vec<Vec<usize>>,
    /// Allowed shortness excess per bonding map.
    slack: Vec<f64>,
}

impl InverseSystem {
    /// Builds a system, verifying every bonding map is short within
    /// [`TOL_METRIC`]. `bonding[n]` maps level `n + 1` into level `n`.
    pub fn new(levels: Vec<FiniteMetricSpace>, bonding: Vec<Vec<usize>>) -> Result<Self> {
        let slack = vec![TOL_METRIC; bonding.len()];
        Self::with_slack(levels, bonding, slack)
    }

    /// Like [`InverseSystem::new`] but `β_n` may stretch distances by up to
    /// `slack[n]`. Used for towers whose level metrics are themselves
    /// approximations.
    pub fn with_slack(levels: Vec<FiniteMetricSpace>, bonding: Vec<Vec<usize>>, slack: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidParameter {
                name: "levels",
                value: 0.0,
                reason: "a system needs at least one level",
            });
        }
        if bonding.len() + 1 != levels.len() || slack.len() != bonding.len() {
            return Err(Error::MapSize {
                got: bonding.len(),
                expected: levels.len() - 1,
            });
        }
        for (n, beta) in bonding.iter().enumerate() {
            let (lower, upper) = (&levels[n], &levels[n + 1]);
            if beta.len() != upper.len() {
                return Err(Error::MapSize {
                    got: beta.len(),
                    expected: upper.len(),
                });
            }
            for &t in beta {
                check_index(t, lower.len())?;
            }
            for i in 0..upper.len() {
                for j in (i + 1)..upper.len() {
                    let image = lower.dist(beta[i], beta[j]);
                    let base = upper.dist(i, j);
                    if image > base + slack[n].max(TOL_METRIC) {
                        return Err(Error::BondingNotShort {
                            level: n,
                            i,
                            j,
                            image,
                            base,
                        });
                    }
                }
            }
        }
        Ok(InverseSystem { levels, bonding, slack })
    }

    /// `X_n = {p, q, …}` at every level with identity bonding maps.
    pub fn constant(space: FiniteMetricSpace, depth: usize) -> Result<Self> {
        let n = space.len();
        let levels = vec![space; depth + 1];
        let bonding = vec![(0..n).collect(); depth];
        Self::new(levels, bonding)
    }

    /// Every level is `space`; each bonding map sends everything to `target`.
    pub fn collapse(space: FiniteMetricSpace, depth: usize, target: usize) -> Result<Self> {
        check_index(target, space.len())?;
        let n = space.len();
        let levels = vec![space; depth + 1];
        let bonding = vec![vec![target; n]; depth];
        Self::new(levels, bonding)
    }

    /// Dyadic grids `X_n = {k·2^{-n}}` on `[0, 1]`, each point sent to the
    /// grid point at or below it. Rounding down moves points by less than
    /// one fine step, which is the slack allowed per bonding map.
    pub fn refining_grid(depth: usize) -> Result<Self> {
        if depth > 12 {
            return Err(Error::InvalidParameter {
                name: "depth",
                value: depth as f64,
                reason: "grids past depth 12 exceed the dense cap",
            });
        }
        let levels = (0..=depth)
            .map(|n| {
                let k = 1usize << n;
                let xs: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
                FiniteMetricSpace::on_line(&xs)
            })
            .collect::<Result<Vec<_>>>()?;
        let bonding = (1..=depth)
            .map(|n| (0..=(1usize << n)).map(|i| i / 2).collect())
            .collect();
        let slack = (1..=depth)
            .map(|n| libm::ldexp(1.0, -(n as i32)) + TOL_METRIC)
            .collect();
        Self::with_slack(levels, bonding, slack)
    }

    /// Index of the deepest level.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> Result<&FiniteMetricSpace> {
        self.levels.get(n).ok_or(Error::NoSuchLevel {
            level: n,
            levels: self.levels.len(),
        })
    }

    pub fn levels(&self) -> &[FiniteMetricSpace] {
        &self.levels
    }

    pub fn bonding(&self) -> &[Vec<usize>] {
        &self.bonding
    }

    pub fn slack(&self) -> &[f64] {
        &self.slack
    }

    /// `φ_{m,n} : X_m → X_n` for `m >= n`; the identity when `m = n`.
    pub fn compose(&self, m: usize, n: usize) -> Result<IndexMap> {
        self.level(m)?;
        self.level(n)?;
        if m < n {
            return Err(Error::LevelOrder { m, n });
        }
        let mut image: Vec<usize> = (0..self.levels[m].len()).collect();
        for k in (n..m).rev() {
            for x in image.iter_mut() {
                *x = self.bonding[k][*x];
            }
        }
        IndexMap::new(image, self.levels[n].len())
    }

    /// One thread per top point, in top-index order.
    pub fn threads(&self) -> Vec<Thread> {
        let top = self.depth();
        (0..self.levels[top].len())
            .map(|x| {
                let mut indices = vec![0; top + 1];
                indices[top] = x;
                for k in (0..top).rev() {
                    indices[k] = self.bonding[k][indices[k + 1]];
                }
                Thread { indices }
            })
            .collect()
    }

    /// Checks `β_n(x_{n+1}) = x_n` at every level.
    pub fn check_thread(&self, t: &Thread) -> Result<()> {
        if t.indices.len() != self.levels.len() {
            return Err(Error::MapSize {
                got: t.indices.len(),
                expected: self.levels.len(),
            });
        }
        for (n, &x) in t.indices.iter().enumerate() {
            check_index(x, self.levels[n].len())?;
        }
        for n in 0..self.depth() {
            if self.bonding[n][t.indices[n + 1]] != t.indices[n] {
                return Err(Error::Inconsistent(format!("thread breaks at level {n}")));
            }
        }
        Ok(())
    }

    /// `|x_n x'_n|` for every level; non-decreasing up to the bonding slack.
    pub fn limit_distance(&self, t: &Thread, u: &Thread) -> Result<LimitDistance> {
        self.check_thread(t)?;
        self.check_thread(u)?;
        let sequence: Vec<f64> = (0..self.levels.len())
            .map(|n| self.levels[n].dist(t.indices[n], u.indices[n]))
            .collect();
        for n in 1..sequence.len() {
            if sequence[n] < sequence[n - 1] - self.slack[n - 1].max(TOL_MONOTONE) {
                return Err(Error::Inconsistent(format!(
                    "thread distance drops from {} to {} at level {n}",
                    sequence[n - 1],
                    sequence[n]
                )));
            }
        }
        let value = *sequence.last().expect("at least one level");
        let stable_value = sequence[self.depth().saturating_sub(1)];
        Ok(LimitDistance {
            sequence,
            value,
            stable_value,
        })
    }

    /// The thread space with depth-`N` distances. Labels are those of the top
    /// level. The result may be a pseudo-metric (collapsing towers).
    pub fn thread_space(&self) -> FiniteMetricSpace {
        self.levels[self.depth()].clone()
    }

    /// `β_{N-1}(X_N) ⊂ X_{N-1}` with the level `N − 1` metric, or `X_0` for a
    /// single-level system. Returns the space and its point indices in
    /// `X_{N-1}`.
    pub fn stable_thread_space(&self) -> (FiniteMetricSpace, Vec<usize>) {
        let top = self.depth();
        if top == 0 {
            return (self.levels[0].clone(), (0..self.levels[0].len()).collect());
        }
        let mut idx = self.bonding[top - 1].clone();
        idx.sort_unstable();
        idx.dedup();
        (self.levels[top - 1].restrict(&idx), idx)
    }

    /// Whether `φ_{m,n}(X_m)` is an `ε`-net in `X_n`.
    pub fn net_check(&self, eps: f64, m: usize, n: usize) -> Result<NetReport> {
        let phi = self.compose(m, n)?;
        let lower = &self.levels[n];
        let mut hit = vec![false; lower.len()];
        for &y in &phi.image {
            hit[y] = true;
        }
        let image: Vec<usize> = (0..lower.len()).filter(|&y| hit[y]).collect();
        let mut radius = 0.0f64;
        let mut worst = None;
        for y in 0..lower.len() {
            let gap = image.iter().map(|&z| lower.dist(y, z)).fold(f64::INFINITY, f64::min);
            if worst.is_none() || gap > radius {
                radius = radius.max(gap);
                worst = Some(y);
            }
        }
        Ok(NetReport {
            holds: radius <= eps + TOL_METRIC,
            radius,
            worst,
        })
    }

    /// Correspondence between `X_n` and the thread space: each thread with its
    /// level-`n` point, plus every point missed by `φ_{N,n}` with a thread
    /// whose level-`n` point is nearest.
    pub fn level_correspondence(&self, n: usize) -> Result<Vec<(usize, usize)>> {
        let phi = self.compose(self.depth(), n)?;
        let lower = &self.levels[n];
        let mut corr: Vec<(usize, usize)> = phi.image.iter().enumerate().map(|(t, &x)| (x, t)).collect();
        let mut hit = vec![false; lower.len()];
        for &x in &phi.image {
            hit[x] = true;
        }
        for y in 0..lower.len() {
            if hit[y] {
                continue;
            }
            let (t, _) = phi
                .image
                .iter()
                .enumerate()
                .map(|(t, &x)| (t, lower.dist(y, x)))
                .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
            corr.push((y, t));
        }
        Ok(corr)
    }

    /// Gromov–Hausdorff upper bound between `X_n` and the thread space.
    pub fn gh_to_limit(&self, n: usize) -> Result<f64> {
        let corr = self.level_correspondence(n)?;
        gh_upper_bound(&self.levels[n], &self.thread_space(), &corr)
    }
}

/// Indices `(x_0, …, x_N)` with `β_n(x_{n+1}) = x_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Thread {
    pub indices: Vec<usize>,
}

impl Thread {
    pub fn top(&self) -> usize {
        *self.indices.last().expect("threads are non-empty")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitDistance {
    pub sequence: Vec<f64>,
    /// Depth-`N` approximant of the limit distance.
    pub value: f64,
    /// The level `N − 1` value, see [`InverseSystem::stable_thread_space`].
    pub stable_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetReport {
    pub holds: bool,
    /// Largest distance from a point of `X_n` to the image.
    pub radius: f64,
    pub worst: Option<usize>,
}

/// Inputs for assembling a limit map from per-level maps.
#[derive(Debug, Clone)]
pub struct LimitIsometryInput {
    /// `ι_n` on the points of level `n`.
    pub maps: Vec<EuclideanMap>,
    /// `ε_n`; level `n + 1` must stay within `ε_{n+1}` of `ι_n ∘ β_n` and
    /// `ε_{n+1} < ε_n / 2`.
    pub eps: Vec<f64>,
    /// Optional `δ_n` bounds: `ε_{n+1} < δ_n / 2` is then required as well.
    pub deltas: Option<Vec<f64>>,
    /// Chain schedule used to certify each level and the limit map.
    pub chain_schedule: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelDisplay {
    pub level: usize,
    /// `min (pull_ι(t, t') − |ψ_n(t) ψ_n(t')|)` over thread pairs.
    pub slack: f64,
    /// Allowed shortfall: `Σ_{k>n} ε_k` plus the certified defects of `ι_n`
    /// and of the limit map.
    pub allowance: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitIsometryCertificate {
    /// `ι(thread) = ι_N(x_N)`.
    pub map: EuclideanMap,
    /// Certified pull-back defect of each `ι_n` on its level.
    pub level_defects: Vec<f64>,
    /// Pull-back defect of the limit map on the thread space.
    pub defect: f64,
    /// Largest `|ι(t)ι(t')| − |tt'|`.
    pub shortness: f64,
    pub displays: Vec<LevelDisplay>,
    pub pass: bool,
}

/// Assembles `ι = lim ι_n ∘ ψ_n` at depth `N` and checks it.
pub fn limit_isometry(s: &InverseSystem, input: &LimitIsometryInput) -> Result<LimitIsometryCertificate> {
    let levels = s.levels.len();
    if input.maps.len() != levels || input.eps.len() != levels {
        return Err(Error::MapSize {
            got: input.maps.len().min(input.eps.len()),
            expected: levels,
        });
    }
    for (n, map) in input.maps.iter().enumerate() {
        if map.len() != s.levels[n].len() {
            return Err(Error::MapSize {
                got: map.len(),
                expected: s.levels[n].len(),
            });
        }
    }
    for n in 0..s.depth() {
        let next = input.eps[n + 1];
        if !(next < input.eps[n] / 2.0) {
            return Err(Error::ScheduleViolation {
                level: n + 1,
                reason: "eps must more than halve",
                value: next,
                bound: input.eps[n] / 2.0,
            });
        }
        if let Some(d) = &input.deltas {
            if !(next < d[n] / 2.0) {
                return Err(Error::ScheduleViolation {
                    level: n + 1,
                    reason: "eps must stay below half of delta",
                    value: next,
                    bound: d[n] / 2.0,
                });
            }
        }
        let (lo, hi) = (&input.maps[n], &input.maps[n + 1]);
        for x in 0..hi.len() {
            let gap = crate::metric::euclidean_distance(hi.point(x), lo.point(s.bonding[n][x]));
            if !(gap < next) {
                return Err(Error::ScheduleViolation {
                    level: n + 1,
                    reason: "consecutive maps differ by at least eps",
                    value: gap,
                    bound: next,
                });
            }
        }
    }
    let level_defects = (0..levels)
        .map(|n| {
            certify_intrinsic(&s.levels[n], &input.maps[n], &input.chain_schedule, f64::INFINITY).map(|c| c.max_defect)
        })
        .collect::<Result<Vec<_>>>()?;
    let limit = s.thread_space();
    let map = input.maps[s.depth()].clone();
    let cert = certify_intrinsic(&limit, &map, &input.chain_schedule, f64::INFINITY)?;
    let eps_last = *input.chain_schedule.last().expect("validated schedule");
    let pull = ChainGraph::new(&limit, &map, eps_last)?.pull_matrix();
    let threads = s.threads();
    let mut displays = Vec::with_capacity(levels);
    for n in 0..levels {
        let tail: f64 = input.eps[n + 1..].iter().sum();
        let allowance = tail + level_defects[n] + cert.max_defect;
        let mut slack = f64::INFINITY;
        for a in 0..threads.len() {
            for b in (a + 1)..threads.len() {
                let d = s.levels[n].dist(threads[a].indices[n], threads[b].indices[n]);
                slack = slack.min(pull[a][b].to_f64() - d);
            }
        }
        displays.push(LevelDisplay {
            level: n,
            slack,
            allowance,
            holds: slack >= -allowance - TOL_METRIC,
        });
    }
    let shortness = if limit.len() < 2 { 0.0 } else { cert.shortness };
    let pass = shortness <= TOL_METRIC && displays.iter().all(|d| d.holds);
    Ok(LimitIsometryCertificate {
        map,
        level_defects,
        defect: cert.max_defect,
        shortness,
        displays,
        pass,
    })
}

/// `|ι(t) ι(t')|` for a limit map, indexed by threads.
pub fn thread_image_distance(c: &LimitIsometryCertificate, t: usize, u: usize) -> f64 {
    c.map.image_distance(t, u)
}

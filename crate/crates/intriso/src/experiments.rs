//! Experiment drivers. Each one generates or takes its inputs, runs the
//! library checks and returns a serialisable report whose assertions are
//! the library's own pass flags and bounds.

use intriso_core::crooked::{
    build_crooked, check_crooked, gamma_tower, min_domain, non_intrinsic_witness, path_isometry_check,
    retraction_check, GammaGraph,
};
use intriso_core::cubecomplex::{convergence_check, multiplicity_cover, CubeTower, LevelConfig, SampleWithMap};
use intriso_core::folding::{fold_graph, tv_check};
use intriso_core::inverselimit::InverseSystem;
use intriso_core::pullback::{certify_intrinsic, lemma_check, ChainGraph};
use intriso_core::{EuclideanMap, FiniteMetricSpace, PullValue};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;
use crate::gen;
use crate::io::{pull_json, MapFile, SpaceFile};

/// Tolerance for pre-metric axioms and ε-monotonicity.
pub const TOL_PREMETRIC: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Assertion {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        }
    }
}

/// A driver's result: the generated inputs, the report and its assertions.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub inputs: Value,
    pub outputs: Value,
    pub assertions: Vec<Assertion>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }
}

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("reports serialise")
}

#[derive(Debug, Clone, Serialize)]
pub struct PremetricTrial {
    pub n: usize,
    pub dim: usize,
    pub eps_coarse: f64,
    pub eps_fine: f64,
    /// Largest `|pull(x, y) − pull(y, x)|`.
    pub symmetry: f64,
    /// Largest `|pull(x, x)|`.
    pub diagonal: f64,
    /// Largest `pull(x, z) − pull(x, y) − pull(y, z)`.
    pub triangle: f64,
    /// Largest `pull_{coarse}(x, y) − pull_{fine}(x, y)`.
    pub monotone: f64,
}

impl PremetricTrial {
    pub fn pass(&self) -> bool {
        self.symmetry <= TOL_PREMETRIC
            && self.diagonal <= TOL_PREMETRIC
            && self.triangle <= TOL_PREMETRIC
            && self.monotone <= TOL_PREMETRIC
    }
}

/// `a − b` on the extended reals with `∞ − ∞ = 0`.
fn excess(a: PullValue, b: f64) -> f64 {
    match a {
        PullValue::Infinite if b.is_infinite() => 0.0,
        PullValue::Infinite => f64::INFINITY,
        PullValue::Finite(x) => x - b,
    }
}

pub fn premetric_trial(
    m: &FiniteMetricSpace,
    f: &EuclideanMap,
    eps_fine: f64,
    eps_coarse: f64,
) -> Result<PremetricTrial> {
    let fine = ChainGraph::new(m, f, eps_fine)?.pull_matrix();
    let coarse = ChainGraph::new(m, f, eps_coarse)?.pull_matrix();
    let n = m.len();
    let mut t = PremetricTrial {
        n,
        dim: f.dim(),
        eps_coarse,
        eps_fine,
        symmetry: 0.0,
        diagonal: 0.0,
        triangle: f64::NEG_INFINITY,
        monotone: f64::NEG_INFINITY,
    };
    for p in [&fine, &coarse] {
        for i in 0..n {
            t.diagonal = t.diagonal.max(p[i][i].to_f64().abs());
            for j in 0..n {
                if p[i][j] != p[j][i] {
                    t.symmetry = t.symmetry.max(excess(p[i][j], p[j][i].to_f64()).abs());
                }
                let (a, b) = (p[i][j].to_f64(), &p[j]);
                for k in 0..n {
                    t.triangle = t.triangle.max(excess(p[i][k], a + b[k].to_f64()));
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            t.monotone = t.monotone.max(excess(coarse[i][j], fine[i][j].to_f64()));
        }
    }
    Ok(t)
}

#[derive(Debug, Clone, Serialize)]
pub struct PremetricSuite {
    pub trials: Vec<PremetricTrial>,
    pub failures: usize,
}

/// Random spaces of up to `max_n` points with random maps; pull at two
/// scales.
pub fn premetric_suite(rng: &mut impl Rng, trials: usize, max_n: usize) -> Result<(Outcome, PremetricSuite)> {
    let mut inputs = Vec::with_capacity(trials);
    let mut cases = Vec::with_capacity(trials);
    for _ in 0..trials {
        let n = rng.gen_range(2..=max_n);
        let inst = gen::random_space(rng, n)?;
        let dim = rng.gen_range(1..=3);
        let f = gen::random_map(rng, n, dim);
        let fine = rng.gen_range(0.05..0.4);
        let coarse = fine * rng.gen_range(1.0..3.0);
        inputs.push(json!({"space": inst.file, "map": MapFile::from_euclidean(&f), "eps": [coarse, fine]}));
        cases.push((inst.space, f, fine, coarse));
    }
    let trials: Vec<PremetricTrial> = cases
        .par_iter()
        .map(|(m, f, fine, coarse)| premetric_trial(m, f, *fine, *coarse))
        .collect::<Result<_>>()?;
    let suite = PremetricSuite {
        failures: trials.iter().filter(|t| !t.pass()).count(),
        trials,
    };
    let worst = |g: fn(&PremetricTrial) -> f64| suite.trials.iter().map(g).fold(f64::NEG_INFINITY, f64::max);
    let assertions = vec![
        Assertion::new(
            "symmetry",
            worst(|t| t.symmetry) <= TOL_PREMETRIC,
            format!("max {:e}", worst(|t| t.symmetry)),
        ),
        Assertion::new(
            "diagonal",
            worst(|t| t.diagonal) <= TOL_PREMETRIC,
            format!("max {:e}", worst(|t| t.diagonal)),
        ),
        Assertion::new(
            "triangle",
            worst(|t| t.triangle) <= TOL_PREMETRIC,
            format!("max excess {:e}", worst(|t| t.triangle)),
        ),
        Assertion::new(
            "eps-monotone",
            worst(|t| t.monotone) <= TOL_PREMETRIC,
            format!("max excess {:e}", worst(|t| t.monotone)),
        ),
    ];
    Ok((
        Outcome {
            inputs: json!(inputs),
            outputs: to_value(&suite),
            assertions,
        },
        suite,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaTrial {
    pub n: usize,
    pub dim: usize,
    pub eps: f64,
    pub delta: f64,
    pub pack: usize,
    pub bound: f64,
    /// Smallest `pull_h + 4·δ·pack − pull_f`; absent when no pair is chained.
    pub min_slack: Option<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaSuite {
    pub trials: Vec<LemmaTrial>,
    pub violations: usize,
}

/// Random `(f, h, δ, ε)` with `‖f − h‖∞ < δ` on spaces of up to `max_n`
/// points.
pub fn lemma_suite(rng: &mut impl Rng, trials: usize, max_n: usize) -> Result<(Outcome, LemmaSuite)> {
    let mut inputs = Vec::with_capacity(trials);
    let mut cases = Vec::with_capacity(trials);
    for _ in 0..trials {
        let n = rng.gen_range(2..=max_n);
        let inst = gen::random_space(rng, n)?;
        let dim = rng.gen_range(1..=2);
        let f = gen::random_map(rng, n, dim);
        let delta = rng.gen_range(0.005..0.2);
        let h = gen::perturb(rng, &f, delta);
        let eps = rng.gen_range(0.05..0.5);
        inputs.push(json!({
            "space": inst.file,
            "f": MapFile::from_euclidean(&f),
            "h": MapFile::from_euclidean(&h),
            "eps": eps,
            "delta": delta,
        }));
        cases.push((inst.space, f, h, eps, delta));
    }
    let trials: Vec<LemmaTrial> = cases
        .par_iter()
        .map(|(m, f, h, eps, delta)| {
            let r = lemma_check(m, f, h, *eps, *delta)?;
            Ok(LemmaTrial {
                n: m.len(),
                dim: f.dim(),
                eps: *eps,
                delta: *delta,
                pack: r.pack.count,
                bound: r.bound,
                min_slack: r.min_slack.is_finite().then_some(r.min_slack),
                holds: r.holds,
            })
        })
        .collect::<Result<_>>()?;
    let violations = trials.iter().filter(|t| !t.holds).count();
    let tightest = trials.iter().filter_map(|t| t.min_slack).fold(f64::INFINITY, f64::min);
    let suite = LemmaSuite { trials, violations };
    let assertions = vec![Assertion::new(
        "lemma-inequality",
        violations == 0,
        format!(
            "{violations} violations in {} trials, tightest slack {tightest:e}",
            suite.trials.len()
        ),
    )];
    Ok((
        Outcome {
            inputs: json!(inputs),
            outputs: to_value(&suite),
            assertions,
        },
        suite,
    ))
}

/// Certified defect allowed per fold at chain scale `ε₀`: `4·ε₀·(1 + folds)`.
pub fn fold_defect_bound(eps0: f64, folds: usize) -> f64 {
    4.0 * eps0 * (1.0 + folds as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct FoldTrial {
    pub vertices: usize,
    pub edges: usize,
    pub tree: bool,
    pub folds: usize,
    pub tv_error: f64,
    pub slope_error: f64,
    pub sup_deviation: f64,
    pub eps: f64,
    pub eps0: f64,
    pub sample_points: usize,
    pub defect: f64,
    pub defect_bound: f64,
    /// Defect of the same map at `ε₀ / 2`.
    pub defect_half: f64,
    /// `defect_half / defect`.
    pub ratio: f64,
}

/// Allowed range of the halving ratio.
pub const HALVING_RANGE: (f64, f64) = (0.4, 0.6);

impl FoldTrial {
    pub fn tv_ok(&self) -> bool {
        self.tv_error <= 1e-9
    }

    pub fn sup_ok(&self) -> bool {
        self.sup_deviation <= self.eps + 1e-12
    }

    pub fn defect_ok(&self) -> bool {
        self.defect <= self.defect_bound
    }

    pub fn halving_ok(&self) -> bool {
        (self.defect <= 1e-12 && self.defect_half <= 1e-12) || (HALVING_RANGE.0..=HALVING_RANGE.1).contains(&self.ratio)
    }
}

fn certify_at(map: &intriso_core::folding::PLLineMap, eps0: f64) -> Result<(f64, usize)> {
    let s = map.sample(eps0 / 2.0)?;
    let schedule = [4.0 * eps0, 2.0 * eps0, eps0];
    let bound = fold_defect_bound(eps0, map.folds());
    let cert = certify_intrinsic(&s.graph, &s.map, &schedule, bound)?;
    Ok((cert.max_defect, s.graph.vertex_count()))
}

/// Folds random trees and graphs with at most `max_edges` edges and
/// certifies the folded maps at chain scales `ε₀` and `ε₀ / 2`.
pub fn fold_certify(
    rng: &mut impl Rng,
    count: usize,
    max_edges: usize,
    eps: f64,
    eps0: f64,
) -> Result<(Outcome, Vec<FoldTrial>)> {
    let mut inputs = Vec::with_capacity(count);
    let mut cases = Vec::with_capacity(count);
    for k in 0..count {
        let edges = rng.gen_range(3..=max_edges);
        // every other instance gets a few cycles
        let extra = if k % 2 == 1 {
            rng.gen_range(1..=3).min(max_edges - edges)
        } else {
            0
        };
        let g = gen::random_graph(rng, edges - extra, extra, 0.1, 0.5)?;
        let values = gen::short_values(rng, &g)?;
        inputs.push(json!({"graph": SpaceFile::from_graph(&g), "values": values}));
        cases.push((g, values));
    }
    let trials: Vec<FoldTrial> = cases
        .par_iter()
        .map(|(g, values)| {
            let map = fold_graph(g, values, eps)?;
            let tv = tv_check(&map);
            let (defect, sample_points) = certify_at(&map, eps0)?;
            let (defect_half, _) = certify_at(&map, eps0 / 2.0)?;
            Ok(FoldTrial {
                vertices: g.vertex_count(),
                edges: g.edges().len(),
                tree: g.edges().len() + 1 == g.vertex_count(),
                folds: map.folds(),
                tv_error: tv.worst_error,
                slope_error: map.check_slopes().1,
                sup_deviation: map.sup_deviation(),
                eps,
                eps0,
                sample_points,
                defect,
                defect_bound: fold_defect_bound(eps0, map.folds()),
                defect_half,
                ratio: if defect > 0.0 { defect_half / defect } else { 0.0 },
            })
        })
        .collect::<Result<_>>()?;
    let fails = |p: fn(&FoldTrial) -> bool| trials.iter().filter(|t| !p(t)).count();
    let ratios: Vec<String> = trials.iter().map(|t| format!("{:.3}", t.ratio)).collect();
    let assertions = vec![
        Assertion::new(
            "total-variation",
            fails(FoldTrial::tv_ok) == 0,
            format!("{} failures", fails(FoldTrial::tv_ok)),
        ),
        Assertion::new(
            "sup-deviation",
            fails(FoldTrial::sup_ok) == 0,
            format!("{} failures", fails(FoldTrial::sup_ok)),
        ),
        Assertion::new(
            "defect-bound",
            fails(FoldTrial::defect_ok) == 0,
            format!("{} failures", fails(FoldTrial::defect_ok)),
        ),
        Assertion::new(
            "defect-halves",
            fails(FoldTrial::halving_ok) == 0,
            format!("ratios {}", ratios.join(" ")),
        ),
    ];
    Ok((
        Outcome {
            inputs: json!(inputs),
            outputs: to_value(&trials),
            assertions,
        },
        trials,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct CrookedRun {
    pub domain: f64,
    pub codomain: f64,
    pub eps: f64,
    pub grid: f64,
    /// Domain length the construction needs.
    pub required_domain: Option<f64>,
    pub breakpoints: Option<Vec<[f64; 2]>>,
    pub laps: Option<usize>,
    pub lipschitz: Option<f64>,
    pub grid_points: Option<usize>,
    pub pairs_checked: Option<usize>,
    pub failing_pairs: Option<usize>,
    pub worst: Option<(f64, f64, f64)>,
    pub error: Option<String>,
    pub pass: bool,
}

/// Builds an `ε`-crooked short map `[0, domain] → [0, codomain]` and scans it
/// at grid step `grid`.
pub fn crooked_make(domain: f64, codomain: f64, eps: f64, grid: f64) -> Result<CrookedRun> {
    let mut run = CrookedRun {
        domain,
        codomain,
        eps,
        grid,
        required_domain: min_domain(codomain, eps).ok(),
        breakpoints: None,
        laps: None,
        lipschitz: None,
        grid_points: None,
        pairs_checked: None,
        failing_pairs: None,
        worst: None,
        error: None,
        pass: false,
    };
    let h = match build_crooked(domain, codomain, eps) {
        Ok(h) => h,
        Err(e) => {
            run.error = Some(e.to_string());
            return Ok(run);
        }
    };
    let report = check_crooked(&h, eps, grid)?;
    run.breakpoints = Some(h.breakpoints().iter().map(|&(t, y)| [t, y]).collect());
    run.laps = Some(h.laps());
    run.lipschitz = Some(h.lipschitz());
    run.grid_points = Some(report.grid_points);
    run.pairs_checked = Some(report.pairs_checked);
    run.failing_pairs = Some(report.failing_pairs);
    run.worst = report.worst;
    run.pass = report.pass && h.lipschitz() <= 1.0 + 1e-12;
    Ok(run)
}

#[derive(Debug, Clone, Serialize)]
pub struct DepthCheck {
    pub depth: usize,
    pub vertices: usize,
    pub path_isometry: bool,
    pub recompute_error: f64,
    /// `None` at depth 1, which has no retraction.
    pub retraction_short: Option<bool>,
    pub retraction_excess: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessRowOut {
    pub depth: usize,
    pub eps: f64,
    pub pull: Value,
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaRun {
    pub depth: usize,
    pub base: f64,
    pub lengths: Vec<f64>,
    pub vertices: usize,
    pub checks: Vec<DepthCheck>,
    /// Frontier indices of the witness pair and their coordinates.
    pub pair: (usize, usize),
    pub pair_coords: (f64, f64),
    pub schedule: Vec<f64>,
    pub rows: Vec<WitnessRowOut>,
    pub c: f64,
    pub final_pull: f64,
    pub monotone: bool,
    pub reaches_tenth: bool,
}

/// Frontier pair farthest apart in `Γ`, ties to the smallest indices.
pub fn farthest_frontier_pair(g: &GammaGraph) -> (usize, usize) {
    let frontier: Vec<usize> = g.frontier().collect();
    let best = frontier
        .par_iter()
        .enumerate()
        .map(|(a, &u)| {
            let d = g.graph().adjacency().dijkstra(u);
            let mut best = (f64::NEG_INFINITY, a, a);
            for (b, &v) in frontier.iter().enumerate().skip(a + 1) {
                if d[v] > best.0 {
                    best = (d[v], a, b);
                }
            }
            best
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX, usize::MAX),
            |x, y| {
                if y.0 > x.0 || (y.0 == x.0 && (y.1, y.2) < (x.1, x.2)) {
                    y
                } else {
                    x
                }
            },
        );
    (best.1, best.2)
}

pub fn gamma_checks(g: &GammaGraph) -> Result<Vec<DepthCheck>> {
    (1..=g.depth())
        .into_par_iter()
        .map(|n| {
            let t = g.truncate(n)?;
            let p = path_isometry_check(&t);
            let r = if n >= 2 {
                Some(match retraction_check(g, n) {
                    Ok(r) => (true, r.worst_excess),
                    Err(intriso_core::Error::NotShort { image, base, .. }) => (false, image - base),
                    Err(e) => return Err(e.into()),
                })
            } else {
                None
            };
            Ok(DepthCheck {
                depth: n,
                vertices: t.graph().vertex_count(),
                path_isometry: p.pass,
                recompute_error: p.recompute_error,
                retraction_short: r.map(|r| r.0),
                retraction_excess: r.map(|r| r.1),
            })
        })
        .collect()
}

/// Target for the frontier distance of the witness pair.
pub const C_TARGET: f64 = 0.125;

/// Builds the depth-`depth` tower and runs the pull-back witness.
pub fn gamma_witness(
    depth: usize,
    base: f64,
    schedule: &[f64],
    pair: Option<(usize, usize)>,
) -> Result<(Outcome, GammaRun)> {
    let g = gamma_tower(depth, base)?;
    let checks = gamma_checks(&g)?;
    let pair = pair.unwrap_or_else(|| farthest_frontier_pair(&g));
    let w = non_intrinsic_witness(&g, pair, schedule)?;
    let run = GammaRun {
        depth,
        base,
        lengths: g.lengths().to_vec(),
        vertices: g.graph().vertex_count(),
        checks,
        pair,
        pair_coords: w.pair,
        schedule: w.schedule.clone(),
        rows: w
            .rows
            .iter()
            .map(|r| WitnessRowOut {
                depth: r.depth,
                eps: r.eps,
                pull: pull_json(r.pull),
                distance: r.distance,
            })
            .collect(),
        c: w.c,
        final_pull: w.final_pull,
        monotone: w.monotone,
        reaches_tenth: w.pass,
    };
    let assertions = vec![
        Assertion::new(
            "path-isometry",
            run.checks.iter().all(|c| c.path_isometry),
            format!("{} depths", run.checks.len()),
        ),
        Assertion::new(
            "retraction-short",
            run.checks.iter().all(|c| c.retraction_short != Some(false)),
            String::new(),
        ),
        Assertion::new("pull-monotone-in-depth", run.monotone, String::new()),
        Assertion::new(
            "pull-below-tenth-of-c",
            run.reaches_tenth,
            format!("final pull {} vs c = {}", run.final_pull, run.c),
        ),
    ];
    Ok((
        Outcome {
            inputs: json!({"depth": depth, "base": base, "schedule": schedule, "pair": pair}),
            outputs: to_value(&run),
            assertions,
        },
        run,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSummary {
    pub level: u32,
    pub copies: usize,
    pub gluings: usize,
    pub skipped_gluings: usize,
    pub coarse: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NetRow {
    pub from_level: u32,
    pub to_level: u32,
    pub radius: f64,
    /// `√d·a_n` at the lower level.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TowerRun {
    pub sample: String,
    pub points: usize,
    pub dim: usize,
    pub chain_scale: f64,
    pub levels: Vec<LevelSummary>,
    pub psi_identity_error: f64,
    pub compatibility_failures: usize,
    pub net: Vec<NetRow>,
    pub pairs: usize,
    pub max_defect: Vec<f64>,
    /// `4·√d·a_N` at the finest level.
    pub defect_bound: f64,
    pub max_drop: f64,
    pub defect_constant: f64,
    pub lower_constant: f64,
}

impl TowerRun {
    pub fn final_defect(&self) -> f64 {
        self.max_defect.last().copied().unwrap_or(0.0)
    }
}

pub fn cube_tower(
    name: &str,
    space: FiniteMetricSpace,
    map: EuclideanMap,
    chain_scale: f64,
    levels: &[u32],
) -> Result<(Outcome, TowerRun)> {
    let s = SampleWithMap::new(space.clone(), map.clone(), chain_scale)?;
    let tower = CubeTower::build(&s, levels)?;
    let dim = s.dim();
    let root_d = (dim as f64).sqrt();
    let mut net = Vec::new();
    for l in 0..levels.len() {
        for k in l + 1..levels.len() {
            let radius = tower.net_radius(k, l)?;
            let bound = root_d * LevelConfig::new(levels[l]).side;
            net.push(NetRow {
                from_level: levels[k],
                to_level: levels[l],
                radius,
                bound,
                holds: radius <= bound + 1e-12,
            });
        }
    }
    let n = s.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let diam = space.diameter();
    let conv = convergence_check(&s, &tower, &pairs, diam, diam)?;
    let last = LevelConfig::new(*levels.last().expect("levels are non-empty")).side;
    let run = TowerRun {
        sample: name.to_string(),
        points: n,
        dim,
        chain_scale,
        levels: tower
            .complexes
            .iter()
            .map(|p| LevelSummary {
                level: p.config().level,
                copies: p.copies().len(),
                gluings: p.gluings().len(),
                skipped_gluings: p.skipped_gluings(),
                coarse: p.coarse(),
            })
            .collect(),
        psi_identity_error: tower.psi_identity_error(&s),
        compatibility_failures: tower.psi_compatibility_failures()?.len(),
        net,
        pairs: pairs.len(),
        max_defect: conv.max_defect,
        defect_bound: 4.0 * root_d * last,
        max_drop: conv.max_drop,
        defect_constant: conv.defect_constant,
        lower_constant: conv.lower_constant,
    };
    let assertions = vec![
        Assertion::new(
            &format!("{name}: psi-identity"),
            run.psi_identity_error == 0.0,
            format!("error {}", run.psi_identity_error),
        ),
        Assertion::new(
            &format!("{name}: psi-compatible"),
            run.compatibility_failures == 0,
            format!("{} failures", run.compatibility_failures),
        ),
        Assertion::new(
            &format!("{name}: nets"),
            run.net.iter().all(|r| r.holds),
            format!("{} level pairs", run.net.len()),
        ),
        Assertion::new(
            &format!("{name}: final-defect"),
            run.final_defect() <= run.defect_bound,
            format!("{} vs {}", run.final_defect(), run.defect_bound),
        ),
    ];
    Ok((
        Outcome {
            inputs: json!({
                "sample": name,
                "space": SpaceFile::from_metric(&space),
                "map": MapFile::from_euclidean(&map),
                "chain_scale": chain_scale,
                "levels": levels,
            }),
            outputs: to_value(&run),
            assertions,
        },
        run,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct GridRow {
    pub level: usize,
    pub step: f64,
    pub gh: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvlimRun {
    pub collapse_points: usize,
    pub collapse_depth: usize,
    pub collapse_threads: usize,
    pub collapse_limit_points: usize,
    pub collapse_limit_diameter: f64,
    pub grid: Vec<GridRow>,
}

/// The collapse tower over a random space and the dyadic refining grid.
pub fn invlim_demo(rng: &mut impl Rng, points: usize, depth: usize, grid_depth: usize) -> Result<(Outcome, InvlimRun)> {
    let inst = gen::random_space(rng, points)?;
    let target = rng.gen_range(0..points);
    let collapse = InverseSystem::collapse(inst.space.clone(), depth, target)?;
    let (limit, _) = collapse.stable_thread_space();
    let grid_sys = InverseSystem::refining_grid(grid_depth)?;
    let grid = (0..=grid_depth)
        .map(|n| {
            let step = 1.0 / (1u64 << n) as f64;
            let gh = grid_sys.gh_to_limit(n)?;
            Ok(GridRow {
                level: n,
                step,
                gh,
                bound: 2.0 * step,
                holds: gh <= 2.0 * step,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let run = InvlimRun {
        collapse_points: points,
        collapse_depth: depth,
        collapse_threads: collapse.threads().len(),
        collapse_limit_points: limit.len(),
        collapse_limit_diameter: limit.diameter(),
        grid,
    };
    let assertions = vec![
        Assertion::new(
            "collapse-limit-is-a-point",
            run.collapse_limit_diameter == 0.0 && run.collapse_limit_points == 1,
            format!(
                "{} points, diameter {}",
                run.collapse_limit_points, run.collapse_limit_diameter
            ),
        ),
        Assertion::new(
            "grid-gh-rate",
            run.grid.iter().all(|r| r.holds),
            format!("gh {:?}", run.grid.iter().map(|r| r.gh).collect::<Vec<_>>()),
        ),
    ];
    Ok((
        Outcome {
            inputs: json!({"space": inst.file, "target": target, "depth": depth, "grid_depth": grid_depth}),
            outputs: to_value(&run),
            assertions,
        },
        run,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverRow {
    pub sample: String,
    pub dim: usize,
    pub points: usize,
    pub delta: f64,
    pub eps: f64,
    pub brick: f64,
    pub components: usize,
    pub max_multiplicity: usize,
    pub max_diameter: f64,
    pub pass: bool,
}

pub fn cover_row(
    name: &str,
    space: FiniteMetricSpace,
    map: EuclideanMap,
    chain_scale: f64,
    delta: f64,
    eps: f64,
) -> Result<CoverRow> {
    let s = SampleWithMap::new(space, map, chain_scale)?;
    let r = multiplicity_cover(&s, delta, eps)?;
    Ok(CoverRow {
        sample: name.to_string(),
        dim: s.dim(),
        points: s.len(),
        delta,
        eps,
        brick: r.brick,
        components: r.components.len(),
        max_multiplicity: r.max_multiplicity,
        max_diameter: r.max_diameter,
        pass: r.pass && r.max_multiplicity <= s.dim() + 1 && r.max_diameter < eps,
    })
}

/// Segment (d = 1), circle and square (d = 2) samples.
pub fn cover_demo(points: usize, delta: f64, eps: f64) -> Result<(Outcome, Vec<CoverRow>)> {
    let k = (points as f64).sqrt().round().max(2.0) as usize;
    let samples = [
        ("segment", gen::segment(points)),
        ("circle", gen::circle(points)),
        ("square", gen::square(k)),
    ];
    let rows = samples
        .into_iter()
        .map(|(name, (m, f, h))| cover_row(name, m, f, h, delta, eps))
        .collect::<Result<Vec<_>>>()?;
    let assertions = rows
        .iter()
        .map(|r| {
            Assertion::new(
                &format!("{}: multiplicity and diameter", r.sample),
                r.pass,
                format!(
                    "multiplicity {} (d + 1 = {}), diameter {} < {}",
                    r.max_multiplicity,
                    r.dim + 1,
                    r.max_diameter,
                    r.eps
                ),
            )
        })
        .collect();
    Ok((
        Outcome {
            inputs: json!({"points": points, "delta": delta, "eps": eps}),
            outputs: to_value(&rows),
            assertions,
        },
        rows,
    ))
}

/// Smallest `h` at which the space is `h`-chain connected: the longest
/// edge of a minimum spanning tree, found with Prim's algorithm.
pub fn connectivity_scale(m: &FiniteMetricSpace) -> f64 {
    let n = m.len();
    if n < 2 {
        return 0.0;
    }
    let mut best = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut cur = 0;
    let mut scale: f64 = 0.0;
    for _ in 1..n {
        done[cur] = true;
        let mut next = usize::MAX;
        for j in 0..n {
            if done[j] {
                continue;
            }
            best[j] = best[j].min(m.dist(cur, j));
            if next == usize::MAX || best[j] < best[next] {
                next = j;
            }
        }
        scale = scale.max(best[next]);
        cur = next;
    }
    scale
}

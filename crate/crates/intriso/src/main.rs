use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use intriso::experiments::{self, Outcome};
use intriso::io::{self, complex_json, gamma_json, plmap_json, pull_json};
use intriso::scenario::{run_to_dir, ExperimentConfig};
use intriso::schema::schema_validate;
use intriso::{CliError, Result};
use intriso_core::crooked::{build_gamma_product, gamma_tower, product_probe};
use intriso_core::cubecomplex::{build_complex, convergence_check, CubeTower, SampleWithMap};
use intriso_core::folding::{fold_graph, tv_check};
use intriso_core::inverselimit::{limit_isometry, LimitIsometryInput};
use intriso_core::pack::{pack, PackMode};
use intriso_core::pullback::{certify_intrinsic, lemma_check, ChainGraph};
use intriso_core::{EuclideanMap, FiniteMetricSpace};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "intriso",
    version,
    about = "Pull-back metrics, intrinsic isometry certificates and their test towers"
)]
struct Cli {
    /// Scenario config for `run`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for randomised inputs; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file, or the output directory for `run`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Pass threshold for certificates.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// ε-chain pull-back distances.
    Pull {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        eps: f64,
        /// `all` or `i,j`.
        #[arg(long, default_value = "all")]
        pairs: String,
    },
    /// Checks pull_f ≤ pull_h + 4·δ·pack on every pair.
    LemmaCheck {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        h: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
    },
    /// Packing number at scale ε.
    Pack {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        greedy: bool,
    },
    /// Certifies a map as an intrinsic isometry along a schedule.
    Certify {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        schedule: Vec<f64>,
    },
    /// Folds a metric graph into the line.
    Fold1d {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        values: PathBuf,
        #[arg(long)]
        eps: f64,
    },
    /// Inverse systems of finite spaces.
    Invlim {
        #[command(subcommand)]
        action: Invlim,
    },
    /// Cube complexes of a sample mapped into ℝ^d.
    Cubes {
        #[command(subcommand)]
        action: Cubes,
    },
    /// The graph Γ built from crooked maps.
    Gamma {
        #[command(subcommand)]
        action: Gamma,
    },
    /// Crooked interval maps.
    Crooked {
        #[command(subcommand)]
        action: Crooked,
    },
    /// Runs a named scenario and writes its artifact bundle.
    Run {
        /// Scenario name; taken from the config when omitted.
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Validates JSON files against the published formats.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Invlim {
    /// Lists all threads.
    Threads {
        #[arg(long)]
        system: PathBuf,
    },
    /// Limit distance between two threads, given by their top indices.
    Dist {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
    },
    /// Whether φ_{m,n}(X_m) is an ε-net in X_n.
    Net {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
    },
    /// Assembles and certifies the limit of per-level maps.
    LimitIso {
        #[arg(long)]
        system: PathBuf,
        /// One map file per level.
        #[arg(long, value_delimiter = ',', required = true)]
        maps: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        schedule: Vec<f64>,
    },
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    sample: PathBuf,
    #[arg(long)]
    map: PathBuf,
    /// Chain scale standing in for connectedness; defaults to the smallest
    /// scale at which the sample is chain connected.
    #[arg(long)]
    chain_scale: Option<f64>,
}

#[derive(Subcommand)]
enum Cubes {
    /// Complex at one level.
    Build {
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long)]
        level: u32,
    },
    /// Tower of complexes with ψ and net checks.
    Tower {
        #[command(flatten)]
        sample: SampleArgs,
        /// `a..b` or a comma list.
        #[arg(long, default_value = "1..5")]
        levels: String,
    },
    /// Convergence table of ψ-distances on all sample pairs.
    Converge {
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long, default_value = "1..5")]
        levels: String,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
    },
}

#[derive(Args)]
struct TowerArgs {
    #[arg(long, default_value_t = 10)]
    depth: usize,
    /// Length of the top interval J_1.
    #[arg(long, default_value_t = 3.0 / 512.0)]
    base: f64,
}

#[derive(Subcommand)]
enum Gamma {
    /// Builds Γ and writes its levels, maps and edges.
    Build {
        #[command(flatten)]
        tower: TowerArgs,
    },
    /// Pull-back of the frontier distance between two frontier vertices.
    Witness {
        #[command(flatten)]
        tower: TowerArgs,
        /// `auto` (farthest frontier pair) or `i,j`.
        #[arg(long, default_value = "auto")]
        pairs: String,
        #[arg(long, value_delimiter = ',', default_value = "0.00390625,0.001953125,0.0009765625")]
        schedule: Vec<f64>,
    },
    /// The product graph Γ⁽²⁾ with projection and probe checks.
    Product {
        #[command(flatten)]
        tower: TowerArgs,
        #[arg(long, default_value_t = 1 << 20)]
        budget: usize,
    },
}

#[derive(Subcommand)]
enum Crooked {
    /// Builds an ε-crooked short map and scans it.
    Make {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        codomain: f64,
        /// Defaults to the shortest domain the construction accepts.
        #[arg(long)]
        domain: Option<f64>,
        /// Scan step; defaults to ε/8.
        #[arg(long)]
        grid: Option<f64>,
    },
}

/// What a command produced: the JSON document, whether its checks passed
/// and a one-line summary.
struct Report {
    value: Value,
    pass: bool,
    summary: String,
}

fn report(value: Value, pass: bool, summary: impl Into<String>) -> Result<Report> {
    Ok(Report {
        value,
        pass,
        summary: summary.into(),
    })
}

fn outcome_report(o: Outcome, what: &str) -> Result<Report> {
    let failed: Vec<&str> = o
        .assertions
        .iter()
        .filter(|a| !a.pass)
        .map(|a| a.name.as_str())
        .collect();
    let summary = if failed.is_empty() {
        format!("{what}: all {} assertions pass", o.assertions.len())
    } else {
        format!("{what}: FAILED {}", failed.join(", "))
    };
    let pass = failed.is_empty();
    report(json!({"outputs": o.outputs, "assertions": o.assertions}), pass, summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(r) => {
            eprintln!("{}", r.summary);
            if r.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Report> {
    let r = match &cli.command {
        Command::Run { scenario } => return run(cli, scenario.as_deref()),
        Command::Validate { paths } => return validate(paths),
        Command::Pull { space, map, eps, pairs } => pull(space, map, *eps, pairs)?,
        Command::LemmaCheck {
            space,
            f,
            h,
            eps,
            delta,
        } => {
            let m = io::load_space(space)?.metric()?;
            let f = io::load_map(f)?.euclidean()?;
            let h = io::load_map(h)?.euclidean()?;
            let r = lemma_check(&m, &f, &h, *eps, *delta)?;
            let summary = format!(
                "lemma-check: {} (pack {}, bound {}, min slack {})",
                if r.holds { "holds" } else { "VIOLATED" },
                r.pack.count,
                r.bound,
                r.min_slack
            );
            report(
                json!({
                    "pack": r.pack.count,
                    "pack_witness": r.pack.witness,
                    "bound": r.bound,
                    "min_slack": r.min_slack.is_finite().then_some(r.min_slack),
                    "tightest_pair": r.tightest_pair,
                    "holds": r.holds,
                }),
                r.holds,
                summary,
            )?
        }
        Command::Pack { space, eps, greedy } => {
            let m = io::load_space(space)?.metric()?;
            let mode = if *greedy { PackMode::Greedy } else { PackMode::Exact };
            let p = pack(&m, *eps, mode)?;
            let summary = format!(
                "pack: {} points at ε = {eps} ({})",
                p.count,
                if p.exact { "exact" } else { "greedy lower bound" }
            );
            report(
                json!({"eps": eps, "count": p.count, "witness": p.witness, "exact": p.exact}),
                true,
                summary,
            )?
        }
        Command::Certify { space, map, schedule } => {
            let m = io::load_space(space)?.metric()?;
            let f = io::load_map(map)?.euclidean()?;
            let tol = cli.tolerance.unwrap_or(intriso_core::TOL_METRIC);
            let c = certify_intrinsic(&m, &f, schedule, tol)?;
            let summary = format!(
                "certify: {} (defect {} vs tolerance {tol})",
                if c.pass { "PASS" } else { "FAIL" },
                c.max_defect
            );
            report(
                json!({
                    "schedule": c.schedule,
                    "max_defect": c.max_defect,
                    "under": c.under,
                    "over": c.over,
                    "shortness": c.shortness,
                    "worst_pair": c.worst_pair,
                    "tolerance": c.tolerance,
                    "pass": c.pass,
                }),
                c.pass,
                summary,
            )?
        }
        Command::Fold1d { graph, values, eps } => {
            let g = io::load_space(graph)?;
            let g = g.graph()?;
            let vals = io::load_values(values)?;
            let m = fold_graph(g, &vals, *eps)?;
            let tv = tv_check(&m);
            let summary = format!(
                "fold1d: {} edges, {} folds, TV error {}, sup deviation {}",
                m.edges().len(),
                m.folds(),
                tv.worst_error,
                m.sup_deviation()
            );
            report(plmap_json(&m), tv.pass, summary)?
        }
        Command::Invlim { action } => invlim(action)?,
        Command::Cubes { action } => cubes(action)?,
        Command::Gamma { action } => gamma(action)?,
        Command::Crooked {
            action:
                Crooked::Make {
                    eps,
                    codomain,
                    domain,
                    grid,
                },
        } => {
            let domain = match domain {
                Some(d) => *d,
                None => intriso_core::crooked::min_domain(*codomain, *eps)?,
            };
            let r = experiments::crooked_make(domain, *codomain, *eps, grid.unwrap_or(eps / 8.0))?;
            let summary = match &r.error {
                Some(e) => format!("crooked make: FAIL ({e})"),
                None => format!(
                    "crooked make: {} ({} breakpoints, {} failing pairs of {})",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.breakpoints.as_ref().map_or(0, Vec::len),
                    r.failing_pairs.unwrap_or(0),
                    r.pairs_checked.unwrap_or(0)
                ),
            };
            let pass = r.pass;
            report(serde_json::to_value(&r).expect("serialisable"), pass, summary)?
        }
    };
    emit(&r.value, cli.out.as_deref())?;
    Ok(r)
}

fn emit(v: &Value, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => io::write_json_atomic(p, v),
        None => {
            print_json(v);
            Ok(())
        }
    }
}

/// Pretty JSON on stdout. A closed pipe (`| head`) is not an error.
fn print_json(v: &impl serde::Serialize) {
    let mut out = std::io::stdout().lock();
    if serde_json::to_writer_pretty(&mut out, v).is_ok() {
        let _ = writeln!(out);
    }
}

fn pull(space: &Path, map: &Path, eps: f64, pairs: &str) -> Result<Report> {
    let m = io::load_space(space)?.metric()?;
    let f = io::load_map(map)?.euclidean()?;
    let chain = ChainGraph::new(&m, &f, eps)?;
    let n = m.len();
    let list: Vec<(usize, usize)> = if pairs == "all" {
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
    } else {
        vec![parse_pair(pairs)?]
    };
    let mut out = Vec::with_capacity(list.len());
    let mut rows: Vec<Option<Vec<intriso_core::PullValue>>> = vec![None; n];
    for (i, j) in list {
        if rows[i].is_none() {
            rows[i] = Some(chain.pull_from(i)?);
        }
        if j >= n {
            return Err(intriso_core::Error::IndexOutOfRange { index: j, len: n }.into());
        }
        let v = rows[i].as_ref().expect("filled above")[j];
        out.push(json!({"i": i, "j": j, "value": pull_json(v)}));
    }
    let summary = format!(
        "pull: {} pairs at ε = {eps}, {} chain edges",
        out.len(),
        chain.edge_count()
    );
    report(json!({"eps": eps, "pairs": out}), true, summary)
}

fn parse_pair(s: &str) -> Result<(usize, usize)> {
    let bad = || CliError::input(format!("expected a pair `i,j`, got `{s}`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn parse_levels(s: &str) -> Result<Vec<u32>> {
    let bad = || CliError::input(format!("expected levels `a..b` or `a,b,…`, got `{s}`"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        return Ok((a..=b).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

fn invlim(action: &Invlim) -> Result<Report> {
    match action {
        Invlim::Threads { system } => {
            let s = io::load_system(system)?;
            let threads: Vec<Vec<usize>> = s.threads().into_iter().map(|t| t.indices).collect();
            let summary = format!(
                "invlim threads: {} threads through {} levels",
                threads.len(),
                s.depth() + 1
            );
            report(json!({"threads": threads}), true, summary)
        }
        Invlim::Dist { system, i, j } => {
            let s = io::load_system(system)?;
            let threads = s.threads();
            let get = |k: usize| {
                threads
                    .iter()
                    .find(|t| t.top() == k)
                    .ok_or_else(|| CliError::input(format!("no thread with top index {k}")))
            };
            let d = s.limit_distance(get(*i)?, get(*j)?)?;
            let summary = format!("invlim dist: {} (depth-N approximant)", d.value);
            report(
                json!({"sequence": d.sequence, "value": d.value, "stable_value": d.stable_value}),
                true,
                summary,
            )
        }
        Invlim::Net { system, eps, m, n } => {
            let s = io::load_system(system)?;
            let r = s.net_check(*eps, *m, *n)?;
            let summary = format!(
                "invlim net: {} (radius {} vs ε = {eps})",
                if r.holds { "holds" } else { "FAILS" },
                r.radius
            );
            report(
                json!({"holds": r.holds, "radius": r.radius, "worst": r.worst}),
                r.holds,
                summary,
            )
        }
        Invlim::LimitIso {
            system,
            maps,
            eps,
            schedule,
        } => {
            let s = io::load_system(system)?;
            let maps = maps
                .iter()
                .map(|p| io::load_map(p)?.euclidean())
                .collect::<Result<Vec<EuclideanMap>>>()?;
            let c = limit_isometry(
                &s,
                &LimitIsometryInput {
                    maps,
                    eps: eps.clone(),
                    deltas: None,
                    chain_schedule: schedule.clone(),
                },
            )?;
            let summary = format!(
                "invlim limit-iso: {} (defect {})",
                if c.pass { "PASS" } else { "FAIL" },
                c.defect
            );
            report(
                json!({
                    "map": io::MapFile::from_euclidean(&c.map),
                    "level_defects": c.level_defects,
                    "defect": c.defect,
                    "shortness": c.shortness,
                    "displays": c.displays.iter().map(|d| json!({
                        "level": d.level, "slack": d.slack, "allowance": d.allowance, "holds": d.holds,
                    })).collect::<Vec<_>>(),
                    "pass": c.pass,
                }),
                c.pass,
                summary,
            )
        }
    }
}

fn load_sample(a: &SampleArgs) -> Result<(FiniteMetricSpace, EuclideanMap, f64)> {
    let m = io::load_space(&a.sample)?.metric()?;
    let f = io::load_map(&a.map)?.euclidean()?;
    let h = match a.chain_scale {
        Some(h) => h,
        None => experiments::connectivity_scale(&m),
    };
    Ok((m, f, h))
}

fn cubes(action: &Cubes) -> Result<Report> {
    match action {
        Cubes::Build { sample, level } => {
            let (m, f, h) = load_sample(sample)?;
            let s = SampleWithMap::new(m, f, h)?;
            let p = build_complex(&s, *level)?;
            let summary = format!(
                "cubes build: level {level}, {} copies, {} gluings{}",
                p.copies().len(),
                p.gluings().len(),
                if p.coarse() {
                    " (coarse: chain scale above r_n/2)"
                } else {
                    ""
                }
            );
            report(complex_json(&p), true, summary)
        }
        Cubes::Tower { sample, levels } => {
            let (m, f, h) = load_sample(sample)?;
            let name = sample.sample.display().to_string();
            let (o, _) = experiments::cube_tower(&name, m, f, h, &parse_levels(levels)?)?;
            outcome_report(o, "cubes tower")
        }
        Cubes::Converge {
            sample,
            levels,
            eps,
            delta,
        } => {
            let (m, f, h) = load_sample(sample)?;
            let s = SampleWithMap::new(m, f, h)?;
            let t = CubeTower::build(&s, &parse_levels(levels)?)?;
            let n = s.len();
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            let c = convergence_check(&s, &t, &pairs, *eps, *delta)?;
            let stars_ok = c.stars.iter().all(|r| r.holds);
            let summary = format!(
                "cubes converge: defects {:?}, defect constant {}, stars {}",
                c.max_defect,
                c.defect_constant,
                if stars_ok { "ok" } else { "FAIL" }
            );
            report(
                json!({
                    "levels": c.levels,
                    "max_defect": c.max_defect,
                    "max_drop": c.max_drop,
                    "lower_constant": c.lower_constant,
                    "defect_constant": c.defect_constant,
                    "stars": c.stars.iter().map(|r| json!({
                        "level": r.level,
                        "max_star_diameter": r.max_star_diameter,
                        "premise": r.premise,
                        "holds": r.holds,
                    })).collect::<Vec<_>>(),
                    "rows": c.rows.iter().map(|r| json!({"i": r.i, "j": r.j, "base": r.base, "values": r.values})).collect::<Vec<_>>(),
                }),
                stars_ok,
                summary,
            )
        }
    }
}

fn gamma(action: &Gamma) -> Result<Report> {
    match action {
        Gamma::Build { tower } => {
            let g = gamma_tower(tower.depth, tower.base)?;
            let checks = experiments::gamma_checks(&g)?;
            let pass = checks
                .iter()
                .all(|c| c.path_isometry && c.retraction_short != Some(false));
            let summary = format!(
                "gamma build: depth {}, {} vertices, path isometry and retractions {}",
                g.depth(),
                g.graph().vertex_count(),
                if pass { "ok" } else { "FAIL" }
            );
            let mut v = gamma_json(&g);
            v["checks"] = serde_json::to_value(&checks).expect("serialisable");
            report(v, pass, summary)
        }
        Gamma::Witness { tower, pairs, schedule } => {
            let pair = if pairs == "auto" {
                None
            } else {
                Some(parse_pair(pairs)?)
            };
            let (o, run) = experiments::gamma_witness(tower.depth, tower.base, schedule, pair)?;
            let mut r = outcome_report(o, "gamma witness")?;
            r.summary = format!(
                "{} (c = {}, final pull {}, target c ≥ {} {})",
                r.summary,
                run.c,
                run.final_pull,
                experiments::C_TARGET,
                if run.c >= experiments::C_TARGET {
                    "met"
                } else {
                    "not met"
                }
            );
            Ok(r)
        }
        Gamma::Product { tower, budget } => {
            let g = gamma_tower(tower.depth, tower.base)?;
            let p = build_gamma_product(&g, *budget)?;
            let short = p.projections_short(&g);
            let probe = product_probe(&p, &g);
            let pass = short && probe.lower_holds && probe.upper_holds;
            let summary = format!(
                "gamma product: {} vertices, {} edges, projections {}, probe lower {} upper {}",
                p.graph.vertex_count(),
                p.graph.edges().len(),
                if short { "short" } else { "NOT short" },
                probe.lower_holds,
                probe.upper_holds
            );
            report(
                json!({
                    "vertices": p.graph.vertex_count(),
                    "edges": p.graph.edges().len(),
                    "level_offsets": p.offsets,
                    "projections_short": short,
                    "probe_pairs": probe.pairs,
                    "lower_holds": probe.lower_holds,
                    "upper_holds": probe.upper_holds,
                    "worst_upper_ratio": probe.worst_upper_ratio,
                }),
                pass,
                summary,
            )
        }
    }
}

fn run(cli: &Cli, scenario: Option<&str>) -> Result<Report> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::new(
            scenario.ok_or_else(|| CliError::input("`run` needs --scenario or --config"))?,
            0,
        ),
    };
    if let Some(s) = scenario {
        cfg.scenario = s.to_string();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.scenario));
    let (bundle, wall) = run_to_dir(&cfg, &dir)?;
    let failed: Vec<&str> = bundle.failed().iter().map(|a| a.name.as_str()).collect();
    let summary = format!(
        "run {} (seed {}): {} in {wall:.1}s, bundle in {}",
        cfg.scenario,
        cfg.seed,
        if failed.is_empty() {
            "PASS".to_string()
        } else {
            format!("FAILED {}", failed.join(", "))
        },
        dir.display()
    );
    report(Value::Null, failed.is_empty(), summary)
}

fn validate(paths: &[PathBuf]) -> Result<Report> {
    let reports = paths.iter().map(|p| schema_validate(p)).collect::<Result<Vec<_>>>()?;
    let bad: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            r.violations.iter().map(move |v| match (v.line, v.column) {
                (Some(l), Some(c)) => format!("{}:{l}:{c}: {}", r.path, v.message),
                _ => format!(
                    "{} at {}: {}",
                    r.path,
                    if v.pointer.is_empty() { "/" } else { &v.pointer },
                    v.message
                ),
            })
        })
        .collect();
    print_json(&reports);
    if bad.is_empty() {
        report(Value::Null, true, format!("validate: {} files OK", reports.len()))
    } else {
        Err(CliError::input(bad.join("\n")))
    }
}

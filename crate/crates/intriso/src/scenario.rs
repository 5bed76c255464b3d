//! Named scenarios: a config file fixes the seed and parameters, a run
//! writes `inputs.json`, `outputs.json`, `assertions.json` and a separate
//! `manifest.json` holding everything that may differ between reruns.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{CliError, Result};
use crate::experiments::{self, Assertion, Outcome};
use crate::gen;
use crate::io::{read_json, write_json_atomic};
use crate::rng::RunRng;

pub const SCENARIOS: [&str; 6] = [
    "lemma-suite",
    "fold-certify",
    "cube-tower",
    "gamma-witness",
    "invlim-demo",
    "cover-demo",
];

/// Per-module parameters; anything left out takes the scenario default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_edges: Option<usize>,
    /// Fold amplitude bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Chain scale `ε₀` for certificates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub scenario: String,
    #[serde(default)]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(scenario: &str, seed: u64) -> Self {
        ExperimentConfig {
            seed,
            scenario: scenario.to_string(),
            params: Params::default(),
            out: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }
}

/// Everything a run produced, before it is written out.
#[derive(Debug, Clone, Serialize)]
pub struct Bundle {
    pub config: ExperimentConfig,
    pub outcome: Outcome,
}

impl Bundle {
    pub fn pass(&self) -> bool {
        self.outcome.pass()
    }

    pub fn failed(&self) -> Vec<&Assertion> {
        self.outcome.assertions.iter().filter(|a| !a.pass).collect()
    }
}

pub fn run_scenario(cfg: &ExperimentConfig) -> Result<Bundle> {
    let rng = RunRng::new(cfg.seed);
    let p = &cfg.params;
    let outcome = match cfg.scenario.as_str() {
        "lemma-suite" => {
            let mut r = rng.stream("pullback");
            experiments::lemma_suite(&mut r, p.trials.unwrap_or(200), p.max_points.unwrap_or(40))?.0
        }
        "fold-certify" => {
            let mut r = rng.stream("folding");
            experiments::fold_certify(
                &mut r,
                p.trials.unwrap_or(10),
                p.max_edges.unwrap_or(20),
                p.eps.unwrap_or(0.05),
                p.eps0.unwrap_or(0.01),
            )?
            .0
        }
        "cube-tower" => {
            let n = p.points.unwrap_or(400);
            let (space, map, h) = match p.sample.as_deref().unwrap_or("segment") {
                "segment" => gen::segment(n),
                "circle" => gen::circle(n),
                other => return Err(CliError::input(format!("unknown sample `{other}` (segment, circle)"))),
            };
            let levels = p.levels.clone().unwrap_or_else(|| (1..=5).collect());
            let name = p.sample.as_deref().unwrap_or("segment");
            experiments::cube_tower(name, space, map, h, &levels)?.0
        }
        "gamma-witness" => {
            let schedule = p
                .schedule
                .clone()
                .unwrap_or_else(|| vec![4.0 / 1024.0, 2.0 / 1024.0, 1.0 / 1024.0]);
            experiments::gamma_witness(p.depth.unwrap_or(10), p.base.unwrap_or(3.0 / 512.0), &schedule, p.pair)?.0
        }
        "invlim-demo" => {
            let mut r = rng.stream("inverselimit");
            experiments::invlim_demo(&mut r, p.points.unwrap_or(12), p.depth.unwrap_or(4), 8)?.0
        }
        "cover-demo" => {
            let eps = p.eps.unwrap_or(0.1);
            experiments::cover_demo(p.points.unwrap_or(400), p.delta.unwrap_or(eps), eps)?.0
        }
        other => {
            return Err(CliError::input(format!(
                "unknown scenario `{other}`; expected one of {}",
                SCENARIOS.join(", ")
            )))
        }
    };
    Ok(Bundle {
        config: cfg.clone(),
        outcome,
    })
}

/// Runs a scenario and writes its bundle into `dir`. Returns the bundle and
/// the wall time in seconds.
pub fn run_to_dir(cfg: &ExperimentConfig, dir: &Path) -> Result<(Bundle, f64)> {
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();
    let bundle = run_scenario(cfg)?;
    let wall = clock.elapsed().as_secs_f64();
    write_bundle(&bundle, dir, started, wall)?;
    Ok((bundle, wall))
}

pub fn write_bundle(b: &Bundle, dir: &Path, started: u64, wall: f64) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_json_atomic(
        &dir.join("inputs.json"),
        &json!({"config": b.config, "inputs": b.outcome.inputs}),
    )?;
    write_json_atomic(&dir.join("outputs.json"), &b.outcome.outputs)?;
    write_json_atomic(
        &dir.join("assertions.json"),
        &json!({"pass": b.pass(), "assertions": b.outcome.assertions}),
    )?;
    write_json_atomic(
        &dir.join("manifest.json"),
        &json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "scenario": b.config.scenario,
            "seed": b.config.seed,
            "started_unix": started,
            "wall_seconds": wall,
            "threads": rayon::current_num_threads(),
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_scenario_is_an_input_error() {
        let err = run_scenario(&ExperimentConfig::new("nope", 1)).unwrap_err();
        assert!(err.to_string().contains("unknown scenario"));
    }

    #[test]
    fn config_rejects_unknown_fields() {
        let bad = r#"{"scenario": "cover-demo", "params": {"depht": 3}}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(bad).is_err());
        let ok = r#"{"scenario": "cover-demo", "seed": 9, "params": {"points": 50}}"#;
        let cfg: ExperimentConfig = serde_json::from_str(ok).unwrap();
        assert_eq!(cfg.params.points, Some(50));
    }

    #[test]
    fn reruns_are_byte_identical() {
        let mut cfg = ExperimentConfig::new("lemma-suite", 5);
        cfg.params.trials = Some(6);
        cfg.params.max_points = Some(12);
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        for d in &dirs {
            let (b, _) = run_to_dir(&cfg, d.path()).unwrap();
            assert!(b.pass());
        }
        for name in ["inputs.json", "outputs.json", "assertions.json"] {
            let a = fs::read(dirs[0].path().join(name)).unwrap();
            let b = fs::read(dirs[1].path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs");
        }
    }

    #[test]
    fn collapse_demo_passes() {
        let b = run_scenario(&ExperimentConfig::new("invlim-demo", 3)).unwrap();
        assert!(b.pass(), "{:?}", b.failed());
    }
}

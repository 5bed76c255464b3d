//! JSON file formats.
//!
//! * `space.json`: `{"points": [[x, …], …]}` (Euclidean distances),
//!   `{"dist": [[…], …]}` or `{"graph": {"vertices": n | [labels],
//!   "edges": [[u, v, length], …]}}`, each with optional `"labels"`.
//! * `map.json`: `{"source": "space.json", "kind": "euclidean", "d": 2,
//!   "image": [[y, …], …]}`, or `"kind": "index"` with integer images and an
//!   optional `"target"` space. One-dimensional images may be plain numbers.
//! * `system.json`: `{"levels": [space, …], "bonding": [[index, …], …]}`
//!   where a level is a path (relative to the system file) or an inline
//!   space, and `bonding[n]` maps level `n + 1` into level `n`. An optional
//!   `"slack"` array relaxes shortness per bonding map.
//!
//! Writers produce `plmap.json`, `complex.json` and `gamma.json`.

use std::fs;
use std::path::{Path, PathBuf};

use intriso_core::crooked::GammaGraph;
use intriso_core::cubecomplex::CubeComplex;
use intriso_core::folding::{fold_count, PLLineMap};
use intriso_core::inverselimit::InverseSystem;
use intriso_core::metric::graph_metric;
use intriso_core::{EuclideanMap, FiniteMetricSpace, IndexMap, MetricGraph, PullValue};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(path, &e))
}

/// Writes `value` next to its destination, then renames it into place.
pub fn write_json_atomic(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::input(e.to_string()))?;
    text.push('\n');
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, text).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Vertices {
    Count(usize),
    Labels(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: Vertices,
    pub edges: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

/// A loaded space. Graphs keep their edges for commands that need them.
#[derive(Debug, Clone)]
pub enum Space {
    Dense(FiniteMetricSpace),
    Graph(MetricGraph),
}

impl Space {
    pub fn metric(&self) -> Result<FiniteMetricSpace> {
        match self {
            Space::Dense(m) => Ok(m.clone()),
            Space::Graph(g) => Ok(graph_metric(g)?),
        }
    }

    pub fn graph(&self) -> Result<&MetricGraph> {
        match self {
            Space::Graph(g) => Ok(g),
            Space::Dense(_) => Err(CliError::input("expected a graph space ({\"graph\": …})")),
        }
    }
}

impl SpaceFile {
    pub fn from_metric(m: &FiniteMetricSpace) -> Self {
        SpaceFile {
            dist: Some(m.rows()),
            labels: Some(m.labels().to_vec()),
            ..Default::default()
        }
    }

    pub fn from_points(points: &[Vec<f64>]) -> Self {
        SpaceFile {
            points: Some(points.to_vec()),
            ..Default::default()
        }
    }

    pub fn from_graph(g: &MetricGraph) -> Self {
        SpaceFile {
            graph: Some(GraphFile {
                vertices: Vertices::Labels(g.labels().to_vec()),
                edges: g.edges().to_vec(),
            }),
            ..Default::default()
        }
    }

    pub fn into_space(self) -> Result<Space> {
        let given = [self.points.is_some(), self.dist.is_some(), self.graph.is_some()];
        if given.iter().filter(|&&b| b).count() != 1 {
            return Err(CliError::input(
                "a space needs exactly one of \"points\", \"dist\" or \"graph\"",
            ));
        }
        if let Some(points) = self.points {
            let m = FiniteMetricSpace::euclidean(&points)?;
            if let Some(d) = points.first().map(Vec::len) {
                if let Some(i) = points.iter().position(|p| p.len() != d) {
                    return Err(CliError::input(format!(
                        "point {i} has dimension {} != {d}",
                        points[i].len()
                    )));
                }
            }
            return Ok(Space::Dense(with_labels(m, self.labels)?));
        }
        if let Some(rows) = self.dist {
            let labels = self
                .labels
                .unwrap_or_else(|| (0..rows.len()).map(|i| format!("p{i}")).collect());
            let m = FiniteMetricSpace::from_rows(labels, &rows)?;
            let report = m.validate();
            if let Some(v) = report.violations.first() {
                return Err(CliError::input(format!("not a metric: {v:?}")));
            }
            return Ok(Space::Dense(m));
        }
        let g = self.graph.expect("checked above");
        let labels = match (g.vertices, self.labels) {
            (Vertices::Labels(l), _) => l,
            (Vertices::Count(n), Some(l)) if l.len() == n => l,
            (Vertices::Count(n), _) => (0..n).map(|i| format!("v{i}")).collect(),
        };
        let graph = MetricGraph::new(labels, g.edges)?;
        graph.check_connected()?;
        Ok(Space::Graph(graph))
    }
}

fn with_labels(m: FiniteMetricSpace, labels: Option<Vec<String>>) -> Result<FiniteMetricSpace> {
    Ok(match labels {
        Some(l) => m.with_labels(l)?,
        None => m,
    })
}

pub fn load_space(path: &Path) -> Result<Space> {
    read_json::<SpaceFile>(path)?.into_space()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Euclidean,
    Index,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coord {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub kind: MapKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    pub image: Vec<Coord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<SpaceRef>,
}

impl MapFile {
    pub fn from_euclidean(f: &EuclideanMap) -> Self {
        let image = f
            .points()
            .map(|p| {
                if p.len() == 1 {
                    Coord::Scalar(p[0])
                } else {
                    Coord::Vector(p.to_vec())
                }
            })
            .collect();
        MapFile {
            source: None,
            kind: MapKind::Euclidean,
            d: Some(f.dim()),
            image,
            target: None,
        }
    }

    /// Target dimension, from `d` or the first image point.
    pub fn dim(&self) -> usize {
        self.d.unwrap_or_else(|| match self.image.first() {
            Some(Coord::Vector(v)) => v.len(),
            _ => 1,
        })
    }

    pub fn euclidean(&self) -> Result<EuclideanMap> {
        if self.kind != MapKind::Euclidean {
            return Err(CliError::input("expected a map of kind \"euclidean\""));
        }
        let d = self.dim();
        let mut coords = Vec::with_capacity(d * self.image.len());
        for (i, c) in self.image.iter().enumerate() {
            let p: &[f64] = match c {
                Coord::Scalar(x) => std::slice::from_ref(x),
                Coord::Vector(v) => v,
            };
            if p.len() != d {
                return Err(CliError::input(format!(
                    "image point {i} has dimension {} != {d}",
                    p.len()
                )));
            }
            coords.extend_from_slice(p);
        }
        Ok(EuclideanMap::new(d, coords)?)
    }

    pub fn index_image(&self) -> Result<Vec<usize>> {
        if self.kind != MapKind::Index {
            return Err(CliError::input("expected a map of kind \"index\""));
        }
        self.image
            .iter()
            .enumerate()
            .map(|(i, c)| match c {
                Coord::Scalar(x) if *x >= 0.0 && x.fract() == 0.0 => Ok(*x as usize),
                _ => Err(CliError::input(format!(
                    "index image {i} is not a non-negative integer"
                ))),
            })
            .collect()
    }

    pub fn index(&self, target_len: usize) -> Result<IndexMap> {
        Ok(IndexMap::new(self.index_image()?, target_len)?)
    }
}

pub fn load_map(path: &Path) -> Result<MapFile> {
    read_json(path)
}

/// Values for `fold1d`: a bare array of numbers or a one-dimensional map file.
pub fn load_values(path: &Path) -> Result<Vec<f64>> {
    let v: Value = read_json(path)?;
    if v.is_array() {
        return serde_json::from_value(v).map_err(|e| CliError::input(format!("{}: {e}", path.display())));
    }
    let map: MapFile = serde_json::from_value(v).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    if map.dim() >= 2 {
        return Err(CliError::input(format!(
            "{}: folding into R^{} is not implemented; only maps into the line (d = 1) can be folded",
            path.display(),
            map.dim()
        )));
    }
    Ok(map.euclidean()?.coords().to_vec())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceRef {
    Path(String),
    Inline(Box<SpaceFile>),
}

impl SpaceRef {
    pub fn load(&self, base: &Path) -> Result<Space> {
        match self {
            SpaceRef::Path(p) => load_space(&resolve(base, p)),
            SpaceRef::Inline(f) => (**f).clone().into_space(),
        }
    }
}

/// `p` relative to the directory holding `base`.
pub fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new(".")).join(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub levels: Vec<SpaceRef>,
    pub bonding: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack: Option<Vec<f64>>,
}

impl SystemFile {
    pub fn from_system(s: &InverseSystem) -> Self {
        SystemFile {
            levels: s
                .levels()
                .iter()
                .map(|m| SpaceRef::Inline(Box::new(SpaceFile::from_metric(m))))
                .collect(),
            bonding: s.bonding().to_vec(),
            slack: Some(s.slack().to_vec()),
        }
    }

    pub fn into_system(self, base: &Path) -> Result<InverseSystem> {
        let levels = self
            .levels
            .iter()
            .map(|r| r.load(base)?.metric())
            .collect::<Result<Vec<_>>>()?;
        Ok(match self.slack {
            Some(slack) => InverseSystem::with_slack(levels, self.bonding, slack)?,
            None => InverseSystem::new(levels, self.bonding)?,
        })
    }
}

pub fn load_system(path: &Path) -> Result<InverseSystem> {
    read_json::<SystemFile>(path)?.into_system(path)
}

/// `+∞` is the string `"inf"`, never a float sentinel.
pub fn pull_json(v: PullValue) -> Value {
    match v {
        PullValue::Finite(x) => json!(x),
        PullValue::Infinite => json!("inf"),
    }
}

pub fn plmap_json(m: &PLLineMap) -> Value {
    let edges: Vec<Value> = m
        .edges()
        .iter()
        .zip(m.all_breakpoints())
        .map(|(&(u, v, len), pts)| {
            json!({
                "u": u,
                "v": v,
                "length": len,
                "folds": fold_count(pts),
                "breakpoints": pts.iter().map(|&(t, y)| [t, y]).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "vertex_values": m.vertex_values(),
        "folds": m.folds(),
        "edges": edges,
    })
}

pub fn complex_json(p: &CubeComplex) -> Value {
    let cfg = p.config();
    json!({
        "level": cfg.level,
        "side": cfg.side,
        "radius": cfg.radius,
        "dim": p.dim(),
        "coarse": p.coarse(),
        "skipped_gluings": p.skipped_gluings(),
        "copies": p.copies().iter().map(|c| json!({
            "cube": c.cube,
            "component": c.component,
            "members": c.members,
        })).collect::<Vec<_>>(),
        "gluings": p.gluings().iter().map(|g| json!({
            "a": g.a,
            "b": g.b,
            "lo": g.lo,
            "hi": g.hi,
        })).collect::<Vec<_>>(),
        "psi": p.psi(),
    })
}

pub fn gamma_json(g: &GammaGraph) -> Value {
    let levels: Vec<Value> = (1..=g.depth())
        .map(|n| {
            let range = g.level_range(n);
            json!({
                "level": n,
                "length": g.lengths()[n - 1],
                "first_vertex": range.start,
                "coords": g.coords(n),
                "f": &g.f()[range.clone()],
                "joins": range.map(|v| g.join_target(v)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let maps: Vec<Value> = g
        .maps()
        .iter()
        .enumerate()
        .map(|(k, h)| {
            json!({
                "level": k + 2,
                "eps": h.eps(),
                "breakpoints": h.breakpoints().iter().map(|&(t, y)| [t, y]).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "depth": g.depth(),
        "lengths": g.lengths(),
        "vertex_count": g.graph().vertex_count(),
        "levels": levels,
        "maps": maps,
        "edges": g.graph().edges().iter().map(|&(u, v, l)| json!([u, v, l])).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_forms_agree() {
        let pts: SpaceFile = serde_json::from_str(r#"{"points": [[0], [1], [3]]}"#).unwrap();
        let dist: SpaceFile = serde_json::from_str(r#"{"dist": [[0,1,3],[1,0,2],[3,2,0]]}"#).unwrap();
        let graph: SpaceFile =
            serde_json::from_str(r#"{"graph": {"vertices": 3, "edges": [[0,1,1],[1,2,2]]}}"#).unwrap();
        let a = pts.into_space().unwrap().metric().unwrap();
        let b = dist.into_space().unwrap().metric().unwrap();
        let c = graph.into_space().unwrap().metric().unwrap();
        assert_eq!(a.rows(), b.rows());
        assert_eq!(b.rows(), c.rows());
    }

    #[test]
    fn space_needs_one_form() {
        let both: SpaceFile = serde_json::from_str(r#"{"points": [[0]], "dist": [[0]]}"#).unwrap();
        assert!(both.into_space().is_err());
        assert!(serde_json::from_str::<SpaceFile>(r#"{"pts": []}"#).is_err());
    }

    #[test]
    fn map_round_trip() {
        let f = EuclideanMap::from_points(&[vec![0.0, 1.0], vec![2.0, 3.0]]).unwrap();
        let text = serde_json::to_string(&MapFile::from_euclidean(&f)).unwrap();
        let back: MapFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.euclidean().unwrap(), f);
        let scalar: MapFile = serde_json::from_str(r#"{"kind": "euclidean", "image": [0.5, 1.5]}"#).unwrap();
        assert_eq!(scalar.euclidean().unwrap().coords(), &[0.5, 1.5]);
    }

    #[test]
    fn index_maps_need_integers() {
        let m: MapFile = serde_json::from_str(r#"{"kind": "index", "image": [0, 1, 1]}"#).unwrap();
        assert_eq!(m.index_image().unwrap(), vec![0, 1, 1]);
        let bad: MapFile = serde_json::from_str(r#"{"kind": "index", "image": [0.5]}"#).unwrap();
        assert!(bad.index_image().is_err());
    }

    #[test]
    fn inline_system() {
        let text = r#"{"levels": [{"points": [[0], [1]]}, {"points": [[0], [1], [2]]}],
                       "bonding": [[0, 1, 1]]}"#;
        let s: SystemFile = serde_json::from_str(text).unwrap();
        let sys = s.into_system(Path::new("system.json")).unwrap();
        assert_eq!(sys.depth(), 1);
        assert_eq!(sys.threads().len(), 3);
    }

    #[test]
    fn pull_infinity_is_a_marker() {
        assert_eq!(pull_json(PullValue::Infinite), json!("inf"));
        assert_eq!(pull_json(PullValue::Finite(0.25)), json!(0.25));
    }
}

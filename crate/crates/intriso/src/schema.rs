//! Structural validation of input and output files with located
//! diagnostics. Violations carry a JSON pointer; syntax errors carry the
//! line and column.

use std::collections::BTreeSet;
use std::path::Path;

use intriso_core::metric::{validate_metric, Violation};
use intriso_core::MetricGraph;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::Result;
use crate::io::{read_text, resolve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FileKind {
    Space,
    Map,
    System,
    Complex,
    Plmap,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemaViolation {
    /// JSON pointer of the offending value (`""` for the whole document).
    pub pointer: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemaReport {
    pub path: String,
    pub kind: FileKind,
    pub violations: Vec<SchemaViolation>,
}

impl SchemaReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Reports are capped so a large corrupt matrix stays readable.
const MAX_VIOLATIONS: usize = 50;

pub fn schema_validate(path: &Path) -> Result<SchemaReport> {
    let text = read_text(path)?;
    let mut report = SchemaReport {
        path: path.display().to_string(),
        kind: FileKind::Unknown,
        violations: Vec::new(),
    };
    let doc: Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => {
            report.violations.push(SchemaViolation {
                pointer: String::new(),
                line: Some(e.line()),
                column: Some(e.column()),
                message: format!("syntax error: {e}"),
            });
            return Ok(report);
        }
    };
    let mut v = Checker {
        out: Vec::new(),
        base: path,
    };
    report.kind = detect(&doc);
    match report.kind {
        FileKind::Space => {
            v.space(&doc, "");
        }
        FileKind::Map => v.map(&doc, ""),
        FileKind::System => v.system(&doc),
        FileKind::Complex => v.complex(&doc),
        FileKind::Plmap => v.plmap(&doc),
        FileKind::Unknown => v.push(
            "",
            "unrecognised file: expected a space, map, system, complex or plmap object",
        ),
    }
    v.out.truncate(MAX_VIOLATIONS);
    report.violations = v.out;
    Ok(report)
}

fn detect(doc: &Value) -> FileKind {
    let Some(o) = doc.as_object() else {
        return FileKind::Unknown;
    };
    if o.contains_key("points") || o.contains_key("dist") || o.contains_key("graph") {
        FileKind::Space
    } else if o.contains_key("kind") && o.contains_key("image") {
        FileKind::Map
    } else if o.contains_key("levels") && o.contains_key("bonding") {
        FileKind::System
    } else if o.contains_key("copies") && o.contains_key("gluings") {
        FileKind::Complex
    } else if o.contains_key("edges") && o.contains_key("vertex_values") {
        FileKind::Plmap
    } else {
        FileKind::Unknown
    }
}

struct Checker<'a> {
    out: Vec<SchemaViolation>,
    base: &'a Path,
}

impl Checker<'_> {
    fn push(&mut self, pointer: &str, message: impl Into<String>) {
        self.out.push(SchemaViolation {
            pointer: pointer.to_string(),
            line: None,
            column: None,
            message: message.into(),
        });
    }

    fn object<'v>(&mut self, v: &'v Value, at: &str, allowed: &[&str]) -> Option<&'v Map<String, Value>> {
        let Some(o) = v.as_object() else {
            self.push(at, "expected an object");
            return None;
        };
        for k in o.keys() {
            if !allowed.contains(&k.as_str()) {
                self.push(&format!("{at}/{k}"), format!("unknown field `{k}`"));
            }
        }
        Some(o)
    }

    fn number(&mut self, v: &Value, at: &str) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.push(at, "expected a finite number");
                None
            }
        }
    }

    fn index(&mut self, v: &Value, at: &str, len: Option<usize>) -> Option<usize> {
        let Some(i) = v.as_u64() else {
            self.push(at, "expected a non-negative integer");
            return None;
        };
        let i = i as usize;
        if let Some(n) = len {
            if i >= n {
                self.push(at, format!("index {i} out of range for {n} points"));
                return None;
            }
        }
        Some(i)
    }

    fn numbers(&mut self, v: &Value, at: &str) -> Option<Vec<f64>> {
        let Some(a) = v.as_array() else {
            self.push(at, "expected an array of numbers");
            return None;
        };
        let xs: Vec<Option<f64>> = a
            .iter()
            .enumerate()
            .map(|(i, x)| self.number(x, &format!("{at}/{i}")))
            .collect();
        xs.into_iter().collect()
    }

    fn matrix(&mut self, v: &Value, at: &str) -> Option<Vec<Vec<f64>>> {
        let Some(a) = v.as_array() else {
            self.push(at, "expected an array of rows");
            return None;
        };
        let rows: Vec<Option<Vec<f64>>> = a
            .iter()
            .enumerate()
            .map(|(i, r)| self.numbers(r, &format!("{at}/{i}")))
            .collect();
        rows.into_iter().collect()
    }

    fn labels(&mut self, o: &Map<String, Value>, at: &str, n: usize) {
        if let Some(l) = o.get("labels") {
            match l.as_array() {
                Some(a) if a.iter().all(Value::is_string) => {
                    if a.len() != n {
                        self.push(&format!("{at}/labels"), format!("{} labels for {n} points", a.len()));
                    }
                }
                _ => self.push(&format!("{at}/labels"), "expected an array of strings"),
            }
        }
    }

    /// Returns the number of points when the space is well formed enough to
    /// count them.
    fn space(&mut self, v: &Value, at: &str) -> Option<usize> {
        let o = self.object(v, at, &["points", "dist", "graph", "labels"])?;
        let forms = ["points", "dist", "graph"]
            .iter()
            .filter(|k| o.contains_key(**k))
            .count();
        if forms != 1 {
            self.push(at, "a space needs exactly one of \"points\", \"dist\" or \"graph\"");
            return None;
        }
        if let Some(p) = o.get("points") {
            let pts = self.matrix(p, &format!("{at}/points"))?;
            if let Some(d) = pts.first().map(Vec::len) {
                for (i, q) in pts.iter().enumerate() {
                    if q.len() != d {
                        self.push(
                            &format!("{at}/points/{i}"),
                            format!("dimension {} differs from {d}", q.len()),
                        );
                    }
                }
            }
            self.labels(o, at, pts.len());
            return Some(pts.len());
        }
        if let Some(d) = o.get("dist") {
            let here = format!("{at}/dist");
            let rows = self.matrix(d, &here)?;
            let n = rows.len();
            let mut square = true;
            for (i, r) in rows.iter().enumerate() {
                if r.len() != n {
                    self.push(
                        &format!("{here}/{i}"),
                        format!("row has {} entries, expected {n}", r.len()),
                    );
                    square = false;
                }
            }
            if square {
                self.metric_axioms(&rows, &here);
            }
            self.labels(o, at, n);
            return Some(n);
        }
        self.graph(&o["graph"], &format!("{at}/graph"))
    }

    fn metric_axioms(&mut self, rows: &[Vec<f64>], at: &str) {
        let Ok(report) = validate_metric(rows) else {
            return;
        };
        for v in report.violations {
            match v {
                Violation::NotFinite { i, j } => self.push(&format!("{at}/{i}/{j}"), "entry is not finite"),
                Violation::Diagonal { i, value } => self.push(
                    &format!("{at}/{i}/{i}"),
                    format!("diagonal entry is {value}, expected 0"),
                ),
                Violation::Asymmetric { i, j } => self.push(
                    &format!("{at}/{i}/{j}"),
                    format!("symmetry violation at ({i},{j}): {} != {}", rows[i][j], rows[j][i]),
                ),
                Violation::NonPositive { i, j, value } => {
                    self.push(&format!("{at}/{i}/{j}"), format!("distinct points at distance {value}"))
                }
                Violation::Triangle { i, j, k, excess } => self.push(
                    &format!("{at}/{i}/{j}"),
                    format!("triangle violation via {k}: d({i},{j}) exceeds d({i},{k}) + d({k},{j}) by {excess}"),
                ),
            }
        }
    }

    fn graph(&mut self, v: &Value, at: &str) -> Option<usize> {
        let o = self.object(v, at, &["vertices", "edges"])?;
        let n = match o.get("vertices") {
            Some(Value::Array(a)) if a.iter().all(Value::is_string) => a.len(),
            Some(x) => match x.as_u64() {
                Some(n) => n as usize,
                None => {
                    self.push(&format!("{at}/vertices"), "expected a count or an array of labels");
                    return None;
                }
            },
            None => {
                self.push(at, "missing field `vertices`");
                return None;
            }
        };
        let Some(edges) = o.get("edges").and_then(Value::as_array) else {
            self.push(&format!("{at}/edges"), "expected an array of [u, v, length] triples");
            return None;
        };
        let mut good = Vec::new();
        for (e, edge) in edges.iter().enumerate() {
            let here = format!("{at}/edges/{e}");
            let Some(t) = edge.as_array().filter(|t| t.len() == 3) else {
                self.push(&here, "expected [u, v, length]");
                continue;
            };
            let u = self.index(&t[0], &format!("{here}/0"), Some(n));
            let w = self.index(&t[1], &format!("{here}/1"), Some(n));
            let len = self.number(&t[2], &format!("{here}/2"));
            if let Some(len) = len {
                if len <= 0.0 {
                    self.push(
                        &format!("{here}/2"),
                        format!("invariant violation: edge length {len} must be positive"),
                    );
                    continue;
                }
            }
            if let (Some(u), Some(w)) = (u, w) {
                if u == w {
                    self.push(&here, "invariant violation: self-loop");
                } else if let Some(len) = len {
                    good.push((u, w, len));
                }
            }
        }
        if good.len() == edges.len() {
            if let Ok(g) = MetricGraph::unlabeled(n, good) {
                if let Err(e) = g.check_connected() {
                    self.push(at, format!("invariant violation: {e}"));
                }
            }
        }
        Some(n)
    }

    fn map(&mut self, v: &Value, at: &str) {
        let Some(o) = self.object(v, at, &["source", "kind", "d", "image", "target"]) else {
            return;
        };
        let kind = o.get("kind").and_then(Value::as_str);
        let image = o.get("image").and_then(Value::as_array);
        let Some(image) = image else {
            self.push(&format!("{at}/image"), "expected an array");
            return;
        };
        let source_len = match o.get("source") {
            Some(Value::String(s)) => {
                let p = resolve(self.base, s);
                let len = read_text(&p)
                    .ok()
                    .and_then(|t| serde_json::from_str::<Value>(&t).ok())
                    .and_then(|doc| {
                        let mut inner = Checker {
                            out: Vec::new(),
                            base: &p,
                        };
                        inner.space(&doc, "")
                    });
                if len.is_none() {
                    self.push(&format!("{at}/source"), format!("cannot load source space `{s}`"));
                }
                len
            }
            Some(_) => {
                self.push(&format!("{at}/source"), "expected a path");
                None
            }
            None => None,
        };
        if let Some(n) = source_len {
            if image.len() != n {
                self.push(
                    &format!("{at}/image"),
                    format!("{} images for {n} source points", image.len()),
                );
            }
        }
        match kind {
            Some("euclidean") => {
                let d = match o.get("d") {
                    Some(d) => match d.as_u64() {
                        Some(d) if d >= 1 => d as usize,
                        _ => {
                            self.push(&format!("{at}/d"), "expected a positive integer");
                            return;
                        }
                    },
                    None => match image.first() {
                        Some(Value::Array(a)) => a.len(),
                        _ => 1,
                    },
                };
                for (i, p) in image.iter().enumerate() {
                    let here = format!("{at}/image/{i}");
                    let dim = if p.is_number() {
                        self.number(p, &here).map(|_| 1)
                    } else {
                        self.numbers(p, &here).map(|q| q.len())
                    };
                    if let Some(k) = dim {
                        if k != d {
                            self.push(&here, format!("dimension {k} differs from d = {d}"));
                        }
                    }
                }
            }
            Some("index") => {
                let target_len = match o.get("target") {
                    Some(t @ Value::Object(_)) => self.space(t, &format!("{at}/target")),
                    _ => None,
                };
                for (i, x) in image.iter().enumerate() {
                    self.index(x, &format!("{at}/image/{i}"), target_len);
                }
            }
            _ => self.push(&format!("{at}/kind"), "expected \"euclidean\" or \"index\""),
        }
    }

    fn system(&mut self, v: &Value) {
        let Some(o) = self.object(v, "", &["levels", "bonding", "slack"]) else {
            return;
        };
        let Some(levels) = o["levels"].as_array() else {
            self.push("/levels", "expected an array of spaces");
            return;
        };
        let sizes: Vec<Option<usize>> = levels
            .iter()
            .enumerate()
            .map(|(n, l)| {
                let here = format!("/levels/{n}");
                match l {
                    Value::String(s) => {
                        let p = resolve(self.base, s);
                        match read_text(&p).ok().and_then(|t| serde_json::from_str::<Value>(&t).ok()) {
                            Some(doc) => {
                                let mut inner = Checker {
                                    out: Vec::new(),
                                    base: &p,
                                };
                                let len = inner.space(&doc, "");
                                for mut e in inner.out {
                                    e.pointer = format!("{here}{}", e.pointer);
                                    e.message = format!("{s}: {}", e.message);
                                    self.out.push(e);
                                }
                                len
                            }
                            None => {
                                self.push(&here, format!("cannot load level `{s}`"));
                                None
                            }
                        }
                    }
                    _ => self.space(l, &here),
                }
            })
            .collect();
        let Some(bonding) = o["bonding"].as_array() else {
            self.push("/bonding", "expected an array of index arrays");
            return;
        };
        if bonding.len() + 1 != levels.len() {
            self.push(
                "/bonding",
                format!(
                    "{} bonding maps for {} levels, expected {}",
                    bonding.len(),
                    levels.len(),
                    levels.len().saturating_sub(1)
                ),
            );
        }
        for (n, b) in bonding.iter().enumerate() {
            let here = format!("/bonding/{n}");
            let Some(a) = b.as_array() else {
                self.push(&here, "expected an array of indices");
                continue;
            };
            if let Some(Some(upper)) = sizes.get(n + 1) {
                if a.len() != *upper {
                    self.push(&here, format!("maps {} points, level {} has {upper}", a.len(), n + 1));
                }
            }
            let lower = sizes.get(n).copied().flatten();
            for (i, x) in a.iter().enumerate() {
                self.index(x, &format!("{here}/{i}"), lower);
            }
        }
        if let Some(s) = o.get("slack") {
            if let Some(xs) = self.numbers(s, "/slack") {
                if xs.len() != bonding.len() {
                    self.push(
                        "/slack",
                        format!("{} entries for {} bonding maps", xs.len(), bonding.len()),
                    );
                }
                for (i, x) in xs.iter().enumerate() {
                    if *x < 0.0 {
                        self.push(&format!("/slack/{i}"), "slack must be non-negative");
                    }
                }
            }
        }
    }

    fn complex(&mut self, v: &Value) {
        let allowed = [
            "level",
            "side",
            "radius",
            "dim",
            "coarse",
            "skipped_gluings",
            "copies",
            "gluings",
            "psi",
        ];
        let Some(o) = self.object(v, "", &allowed) else {
            return;
        };
        let dim = o.get("dim").and_then(Value::as_u64).map(|d| d as usize);
        if dim.is_none() {
            self.push("/dim", "expected a non-negative integer");
        }
        let Some(copies) = o["copies"].as_array() else {
            self.push("/copies", "expected an array");
            return;
        };
        let mut seen = BTreeSet::new();
        for (c, copy) in copies.iter().enumerate() {
            let here = format!("/copies/{c}");
            let Some(co) = self.object(copy, &here, &["cube", "component", "members"]) else {
                continue;
            };
            let cube: Option<Vec<i64>> = co
                .get("cube")
                .and_then(Value::as_array)
                .and_then(|a| a.iter().map(Value::as_i64).collect());
            match (&cube, dim) {
                (None, _) => self.push(&format!("{here}/cube"), "expected an integer array"),
                (Some(k), Some(d)) if k.len() != d => self.push(
                    &format!("{here}/cube"),
                    format!("cube has {} coordinates, dim is {d}", k.len()),
                ),
                _ => {}
            }
            let comp = co.get("component").and_then(Value::as_u64);
            if comp.is_none() {
                self.push(&format!("{here}/component"), "expected a non-negative integer");
            }
            if let (Some(k), Some(j)) = (cube, comp) {
                if !seen.insert((k, j)) {
                    self.push(&here, "duplicate (cube, component) pair");
                }
            }
        }
        let n = copies.len();
        match o["gluings"].as_array() {
            Some(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    let here = format!("/gluings/{i}");
                    let Some(go) = self.object(g, &here, &["a", "b", "lo", "hi"]) else {
                        continue;
                    };
                    for key in ["a", "b"] {
                        match go.get(key) {
                            Some(x) => {
                                self.index(x, &format!("{here}/{key}"), Some(n));
                            }
                            None => self.push(&here, format!("missing field `{key}`")),
                        }
                    }
                    let lo: Option<Vec<i64>> = go
                        .get("lo")
                        .and_then(Value::as_array)
                        .and_then(|a| a.iter().map(Value::as_i64).collect());
                    let hi: Option<Vec<i64>> = go
                        .get("hi")
                        .and_then(Value::as_array)
                        .and_then(|a| a.iter().map(Value::as_i64).collect());
                    match (lo, hi) {
                        (Some(lo), Some(hi)) if lo.len() == hi.len() => {
                            if lo.iter().zip(&hi).any(|(l, h)| !(0..=1).contains(&(h - l))) {
                                self.push(&here, "face extents must be 0 or 1 per axis");
                            }
                            if lo.iter().zip(&hi).all(|(l, h)| h - l == 1) {
                                self.push(&here, "gluing along a whole cube is not a face");
                            }
                        }
                        _ => self.push(&here, "`lo` and `hi` must be integer arrays of equal length"),
                    }
                }
            }
            None => self.push("/gluings", "expected an array"),
        }
        match o.get("psi").and_then(Value::as_array) {
            Some(psi) => {
                for (x, c) in psi.iter().enumerate() {
                    self.index(c, &format!("/psi/{x}"), Some(n));
                }
            }
            None => self.push("/psi", "expected an array of copy indices"),
        }
    }

    fn plmap(&mut self, v: &Value) {
        let Some(o) = self.object(v, "", &["vertex_values", "folds", "edges"]) else {
            return;
        };
        let values = self.numbers(&o["vertex_values"], "/vertex_values");
        let n = values.as_ref().map(Vec::len);
        let Some(edges) = o["edges"].as_array() else {
            self.push("/edges", "expected an array");
            return;
        };
        for (e, edge) in edges.iter().enumerate() {
            let here = format!("/edges/{e}");
            let Some(eo) = self.object(edge, &here, &["u", "v", "length", "folds", "breakpoints"]) else {
                continue;
            };
            let u = eo.get("u").and_then(|x| self.index(x, &format!("{here}/u"), n));
            let w = eo.get("v").and_then(|x| self.index(x, &format!("{here}/v"), n));
            let len = eo.get("length").and_then(|x| self.number(x, &format!("{here}/length")));
            let Some(bps) = eo
                .get("breakpoints")
                .and_then(|b| self.matrix(b, &format!("{here}/breakpoints")))
            else {
                continue;
            };
            if bps.len() < 2 || bps.iter().any(|p| p.len() != 2) {
                self.push(&format!("{here}/breakpoints"), "expected at least two [t, value] pairs");
                continue;
            }
            if bps[0][0] != 0.0 {
                self.push(&format!("{here}/breakpoints/0/0"), "first parameter must be 0");
            }
            if let Some(len) = len {
                if len <= 0.0 {
                    self.push(
                        &format!("{here}/length"),
                        "invariant violation: edge length must be positive",
                    );
                }
                if (bps[bps.len() - 1][0] - len).abs() > 1e-9 {
                    self.push(
                        &format!("{here}/breakpoints/{}/0", bps.len() - 1),
                        "last parameter must equal the edge length",
                    );
                }
            }
            for (k, w2) in bps.windows(2).enumerate() {
                if w2[1][0] <= w2[0][0] {
                    self.push(&format!("{here}/breakpoints/{}/0", k + 1), "parameters must increase");
                }
            }
            if let (Some(vals), Some(u), Some(w)) = (&values, u, w) {
                if (bps[0][1] - vals[u]).abs() > 1e-12 || (bps[bps.len() - 1][1] - vals[w]).abs() > 1e-12 {
                    self.push(&here, "end values disagree with vertex values");
                }
            }
        }
    }
}

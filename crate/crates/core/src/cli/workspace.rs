//! Model files, builtins, and resolution of the references given on the
//! command line.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channels::{measurement_from_effects, validate_channel, Channel, Measurement};
use crate::effects::Effect;
use crate::error::{Error, Result};
use crate::geometry::{Matrix, Vector};
use crate::models::{iota, pr_box_state, square_reflection, square_rotation};
use crate::state_space::{boxworld_square, regular_polygon, simplex, Functional, StateSpace};

pub const FORMAT: &str = "gptkit/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceJson {
    pub name: String,
    pub lifted_dim: usize,
    pub vertices: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorJson {
    pub name: String,
    pub space: String,
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementJson {
    pub name: String,
    pub space: String,
    pub effects: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelJson {
    pub name: String,
    pub domain: String,
    pub codomain: String,
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BipartiteJson {
    pub name: String,
    #[serde(rename = "dimA")]
    pub dim_a: usize,
    #[serde(rename = "dimB")]
    pub dim_b: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<String>,
    pub coords: Vec<f64>,
}

/// On-disk model file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub spaces: Vec<SpaceJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub effects: Vec<VectorJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub states: Vec<VectorJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub measurements: Vec<MeasurementJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub channels: Vec<ChannelJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bipartite: Vec<BipartiteJson>,
}

#[derive(Debug, Clone)]
pub struct NamedVector {
    pub space: String,
    pub coords: Vector,
}

#[derive(Debug, Clone)]
pub struct BipartiteVector {
    pub dims: (usize, usize),
    pub coords: Vector,
}

#[derive(Debug, Clone)]
enum Entry {
    Space(StateSpace),
    Effect(NamedVector),
    State(NamedVector),
    Measurement(Measurement),
    Channel(Channel),
    Bipartite(BipartiteVector),
}

/// Named registry of loaded objects. Names are unique across kinds.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    entries: BTreeMap<String, Entry>,
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::schema(path, message)
}

fn to_vector(coords: &[f64], path: &str) -> Result<Vector> {
    if let Some(i) = coords.iter().position(|x| !x.is_finite()) {
        return Err(schema(format!("{path}[{i}]"), "non-finite number"));
    }
    Ok(Vector::from_column_slice(coords))
}

fn to_matrix(rows: &[Vec<f64>], path: &str) -> Result<Matrix> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err(schema(path, "empty matrix"));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != ncols {
            return Err(schema(format!("{path}[{i}]"), format!("expected {ncols} entries, found {}", r.len())));
        }
        if r.iter().any(|x| !x.is_finite()) {
            return Err(schema(format!("{path}[{i}]"), "non-finite number"));
        }
    }
    Ok(Matrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn check_len(v: &Vector, expected: usize, path: &str) -> Result<()> {
    if v.len() != expected {
        return Err(schema(path, format!("expected {expected} coordinates, found {}", v.len())));
    }
    Ok(())
}

/// Validates a state-space record and builds it.
pub fn space_from_json(s: &SpaceJson, path: &str) -> Result<StateSpace> {
    if s.lifted_dim == 0 {
        return Err(schema(format!("{path}.lifted_dim"), "must be positive"));
    }
    if s.vertices.is_empty() {
        return Err(schema(format!("{path}.vertices"), "no vertices"));
    }
    let mut pts = Vec::with_capacity(s.vertices.len());
    for (i, v) in s.vertices.iter().enumerate() {
        let p = format!("{path}.vertices[{i}]");
        let v = to_vector(v, &p)?;
        check_len(&v, s.lifted_dim, &p)?;
        if v[s.lifted_dim - 1] != 1.0 {
            return Err(schema(p, format!("last coordinate is {}, not 1", v[s.lifted_dim - 1])));
        }
        pts.push(v);
    }
    let space = StateSpace::from_lifted(s.name.clone(), pts.clone()).map_err(|e| schema(path, e.to_string()))?;
    match &s.labels {
        None => Ok(space),
        Some(labels) => {
            if labels.len() != pts.len() {
                return Err(schema(format!("{path}.labels"), "one label per vertex required"));
            }
            let kept: Vec<String> = space
                .vertices()
                .iter()
                .map(|v| labels[pts.iter().position(|p| p == v).expect("vertices come from the input")].clone())
                .collect();
            space.with_labels(kept).map_err(|e| schema(format!("{path}.labels"), e.to_string()))
        }
    }
}

pub fn space_to_json(k: &StateSpace) -> SpaceJson {
    SpaceJson {
        name: k.name().to_string(),
        lifted_dim: k.lifted_dim(),
        vertices: k.vertices().iter().map(|v| v.iter().copied().collect()).collect(),
        labels: Some(k.labels().to_vec()),
    }
}

/// Builtin state spaces: `square`, `S_n` / `simplex:n`, `polygon_k` / `polygon:k`.
pub fn builtin_space(name: &str) -> Result<StateSpace> {
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| schema("builtin", format!("bad size in {name:?}")))
    };
    if name == "square" {
        Ok(boxworld_square())
    } else if let Some(n) = name.strip_prefix("S_").or_else(|| name.strip_prefix("simplex:")) {
        simplex(parse(n)?)
    } else if let Some(k) = name.strip_prefix("polygon_").or_else(|| name.strip_prefix("polygon:")) {
        regular_polygon(parse(k)?)
    } else {
        Err(schema("builtin", format!("unknown builtin {name:?}")))
    }
}

fn inline_vector(s: &str) -> Option<Result<Vector>> {
    let t = s.trim_start();
    if !t.starts_with('[') {
        return None;
    }
    Some(
        serde_json::from_str::<Vec<f64>>(t)
            .map_err(|e| schema("inline", e.to_string()))
            .and_then(|v| to_vector(&v, "inline")),
    )
}

fn inline_matrix(s: &str) -> Option<Result<Matrix>> {
    let t = s.trim_start();
    if !t.starts_with("[[") && !t.starts_with("[ [") {
        return None;
    }
    Some(
        serde_json::from_str::<Vec<Vec<f64>>>(t)
            .map_err(|e| schema("inline", e.to_string()))
            .and_then(|m| to_matrix(&m, "inline")),
    )
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    fn insert(&mut self, name: &str, entry: Entry, path: &str) -> Result<()> {
        if self.entries.contains_key(name) {
            return Err(schema(path, format!("duplicate name {name:?}")));
        }
        self.entries.insert(name.to_string(), entry);
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Adds every object of a model file; spaces are registered first so the
    /// other records can refer to them (or to builtins).
    pub fn add_model(&mut self, file: &ModelFile) -> Result<()> {
        if let Some(f) = &file.format {
            if f != FORMAT {
                return Err(schema("format", format!("unsupported format {f:?}")));
            }
        }
        for (i, s) in file.spaces.iter().enumerate() {
            let path = format!("spaces[{i}]");
            let k = space_from_json(s, &path)?;
            self.insert(&s.name, Entry::Space(k), &format!("{path}.name"))?;
        }
        for (i, e) in file.effects.iter().enumerate() {
            let path = format!("effects[{i}]");
            let k = self.space(&e.space).map_err(|_| schema(format!("{path}.space"), format!("unknown space {:?}", e.space)))?;
            let v = to_vector(&e.coords, &format!("{path}.coords"))?;
            check_len(&v, k.lifted_dim(), &format!("{path}.coords"))?;
            let entry = Entry::Effect(NamedVector { space: e.space.clone(), coords: v });
            self.insert(&e.name, entry, &format!("{path}.name"))?;
        }
        for (i, s) in file.states.iter().enumerate() {
            let path = format!("states[{i}]");
            let k = self.space(&s.space).map_err(|_| schema(format!("{path}.space"), format!("unknown space {:?}", s.space)))?;
            let v = to_vector(&s.coords, &format!("{path}.coords"))?;
            check_len(&v, k.lifted_dim(), &format!("{path}.coords"))?;
            let entry = Entry::State(NamedVector { space: s.space.clone(), coords: v });
            self.insert(&s.name, entry, &format!("{path}.name"))?;
        }
        for (i, m) in file.measurements.iter().enumerate() {
            let path = format!("measurements[{i}]");
            let k = self.space(&m.space).map_err(|_| schema(format!("{path}.space"), format!("unknown space {:?}", m.space)))?;
            let mut effects = Vec::new();
            for (j, e) in m.effects.iter().enumerate() {
                let p = format!("{path}.effects[{j}]");
                let v = to_vector(e, &p)?;
                check_len(&v, k.lifted_dim(), &p)?;
                effects.push(v);
            }
            let meas = measurement_from_effects(&k, &effects, 1e-9).map_err(|e| schema(&path, e.to_string()))?;
            self.insert(&m.name, Entry::Measurement(meas), &format!("{path}.name"))?;
        }
        for (i, c) in file.channels.iter().enumerate() {
            let path = format!("channels[{i}]");
            let a = self.space(&c.domain).map_err(|_| schema(format!("{path}.domain"), format!("unknown space {:?}", c.domain)))?;
            let b = self.space(&c.codomain).map_err(|_| schema(format!("{path}.codomain"), format!("unknown space {:?}", c.codomain)))?;
            let m = to_matrix(&c.matrix, &format!("{path}.matrix"))?;
            let ch = validate_channel(&m, &a, &b, 1e-9).map_err(|e| schema(&path, e.to_string()))?;
            self.insert(&c.name, Entry::Channel(ch), &format!("{path}.name"))?;
        }
        for (i, b) in file.bipartite.iter().enumerate() {
            let path = format!("bipartite[{i}]");
            if let Some(o) = &b.order {
                if o != "row-major A-major" {
                    return Err(schema(format!("{path}.order"), format!("unsupported order {o:?}")));
                }
            }
            let v = to_vector(&b.coords, &format!("{path}.coords"))?;
            check_len(&v, b.dim_a * b.dim_b, &format!("{path}.coords"))?;
            let entry = Entry::Bipartite(BipartiteVector { dims: (b.dim_a, b.dim_b), coords: v });
            self.insert(&b.name, entry, &format!("{path}.name"))?;
        }
        Ok(())
    }

    /// Serializes every object back into a model file (full precision).
    pub fn to_model(&self) -> ModelFile {
        let mut f = ModelFile {
            format: Some(FORMAT.to_string()),
            ..ModelFile::default()
        };
        let coords = |v: &Vector| v.iter().copied().collect::<Vec<f64>>();
        let rows = |m: &Matrix| (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect();
        for (name, e) in &self.entries {
            match e {
                Entry::Space(k) => f.spaces.push(SpaceJson { name: name.clone(), ..space_to_json(k) }),
                Entry::Effect(v) => f.effects.push(VectorJson { name: name.clone(), space: v.space.clone(), coords: coords(&v.coords) }),
                Entry::State(v) => f.states.push(VectorJson { name: name.clone(), space: v.space.clone(), coords: coords(&v.coords) }),
                Entry::Measurement(m) => f.measurements.push(MeasurementJson {
                    name: name.clone(),
                    space: m.space().name().to_string(),
                    effects: m.effects.iter().map(coords).collect(),
                }),
                Entry::Channel(c) => f.channels.push(ChannelJson {
                    name: name.clone(),
                    domain: c.domain.name().to_string(),
                    codomain: c.codomain.name().to_string(),
                    matrix: rows(&c.matrix),
                }),
                Entry::Bipartite(b) => f.bipartite.push(BipartiteJson {
                    name: name.clone(),
                    dim_a: b.dims.0,
                    dim_b: b.dims.1,
                    order: Some("row-major A-major".into()),
                    coords: coords(&b.coords),
                }),
            }
        }
        f
    }

    pub fn add_space(&mut self, k: StateSpace) -> Result<()> {
        let name = k.name().to_string();
        self.insert(&name, Entry::Space(k), "spaces")
    }

    /// `builtin:NAME`, a registered name, or a path to a JSON file holding a
    /// single space record (or a model file with exactly one space).
    pub fn space(&self, r: &str) -> Result<StateSpace> {
        if let Some(b) = r.strip_prefix("builtin:") {
            return builtin_space(b);
        }
        match self.entries.get(r) {
            Some(Entry::Space(k)) => return Ok(k.clone()),
            Some(_) => return Err(schema(r, "not a state space")),
            None => {}
        }
        if Path::new(r).is_file() {
            return space_from_file(Path::new(r));
        }
        builtin_space(r).map_err(|_| schema(r, "unknown state space"))
    }

    /// A state of `k`: vertex label, `center`, registered state, or inline
    /// coordinates.
    pub fn state(&self, k: &StateSpace, r: &str) -> Result<Functional> {
        let v = if let Some(v) = inline_vector(r) {
            v?
        } else if r == "center" {
            k.center()
        } else if let Some(v) = k.vertex_by_label(r) {
            v.clone()
        } else {
            match self.entries.get(r) {
                Some(Entry::State(s)) => s.coords.clone(),
                _ => return Err(schema(r, format!("unknown state of {}", k.name()))),
            }
        };
        check_len(&v, k.lifted_dim(), r)?;
        Ok(v)
    }

    /// An effect on `k`: `unit`, `fx`/`fy` on the square, registered effect,
    /// or inline coordinates.
    pub fn effect(&self, k: &StateSpace, r: &str) -> Result<Effect> {
        let v = if let Some(v) = inline_vector(r) {
            v?
        } else if r == "unit" {
            k.unit()
        } else if let Some(v) = square_effect(k, r) {
            v
        } else {
            match self.entries.get(r) {
                Some(Entry::Effect(e)) => e.coords.clone(),
                _ => return Err(schema(r, format!("unknown effect on {}", k.name()))),
            }
        };
        check_len(&v, k.lifted_dim(), r)?;
        Ok(v)
    }

    /// A measurement on `k`: registered measurement, `standard` (simplex),
    /// inline effect list, or any effect `f` read as `{f, 1 − f}`.
    pub fn measurement(&self, k: &StateSpace, r: &str, tol: f64) -> Result<Measurement> {
        if let Some(Entry::Measurement(m)) = self.entries.get(r) {
            if m.space() != k {
                return Err(Error::SpaceMismatch(format!("{r} is not a measurement on {}", k.name())));
            }
            return Ok(m.clone());
        }
        let effects = if let Some(m) = inline_matrix(r) {
            let m = m?;
            (0..m.nrows()).map(|i| m.row(i).transpose()).collect()
        } else if r == "standard" && k.is_simplex() {
            standard_effects(k)
        } else {
            let f = self.effect(k, r)?;
            vec![f.clone(), k.unit() - f]
        };
        measurement_from_effects(k, &effects, tol)
    }

    /// A channel with domain `k`: `id`, `square.R`, `square.M`, registered
    /// channel, `const:STATE`, a measurement reference, or an inline matrix
    /// (codomain `k`).
    pub fn channel(&self, k: &StateSpace, r: &str, tol: f64) -> Result<Channel> {
        let on_square = |c: Channel| {
            if *k == c.domain {
                Ok(c)
            } else {
                Err(Error::SpaceMismatch(format!("{r} acts on the square, not on {}", k.name())))
            }
        };
        match r {
            "id" => return Ok(Channel::identity(k)),
            "square.R" => return on_square(square_rotation()),
            "square.M" => return on_square(square_reflection()),
            _ => {}
        }
        if let Some(Entry::Channel(c)) = self.entries.get(r) {
            if c.domain != *k {
                return Err(Error::SpaceMismatch(format!("{r} does not act on {}", k.name())));
            }
            return Ok(c.clone());
        }
        if let Some(s) = r.strip_prefix("const:") {
            let z = self.state(k, s)?;
            return Channel::constant(k, k, &z, tol);
        }
        if let Some(m) = self.matrix(r) {
            return validate_channel(&m?, k, k, tol);
        }
        self.measurement(k, r, tol).map(|m| m.channel)
    }

    /// Raw matrices: `square.iota` or inline.
    pub fn matrix(&self, r: &str) -> Option<Result<Matrix>> {
        if r == "square.iota" {
            return Some(Ok(iota()));
        }
        inline_matrix(r)
    }

    /// A vector on `A ⊗ B`: `square.x0`, registered bipartite vector,
    /// `product:X,Y`, or inline coordinates.
    pub fn bipartite(&self, a: &StateSpace, b: &StateSpace, r: &str) -> Result<Vector> {
        let dim = a.lifted_dim() * b.lifted_dim();
        let v = if let Some(v) = inline_vector(r) {
            v?
        } else if r == "square.x0" {
            pr_box_state()
        } else if let Some(pair) = r.strip_prefix("product:") {
            let (x, y) = pair
                .split_once(',')
                .ok_or_else(|| schema(r, "expected product:X,Y"))?;
            crate::geometry::kron(&self.state(a, x)?, &self.state(b, y)?)
        } else {
            match self.entries.get(r) {
                Some(Entry::Bipartite(v)) => {
                    if v.dims != (a.lifted_dim(), b.lifted_dim()) {
                        return Err(Error::DimensionMismatch { expected: dim, found: v.coords.len() });
                    }
                    v.coords.clone()
                }
                _ => return Err(schema(r, "unknown bipartite vector")),
            }
        };
        check_len(&v, dim, r)?;
        Ok(v)
    }
}

fn standard_effects(k: &StateSpace) -> Vec<Effect> {
    // f_i(s_j) = δ_ij: rows of the inverse vertex matrix
    let inv = k
        .vertex_matrix()
        .try_inverse()
        .expect("a simplex of full dimension has an invertible vertex matrix");
    (0..inv.nrows()).map(|i| inv.row(i).transpose()).collect()
}

fn square_effect(k: &StateSpace, r: &str) -> Option<Effect> {
    if *k != boxworld_square() {
        return None;
    }
    match r {
        "fx" => Some(crate::geometry::vector(&[1.0, 0.0, 0.0])),
        "fy" => Some(crate::geometry::vector(&[0.0, 1.0, 0.0])),
        _ => None,
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| schema(path.display().to_string(), e.to_string()))
}

pub fn parse_model(text: &str, origin: &str) -> Result<ModelFile> {
    serde_json::from_str(text).map_err(|e| schema(origin, e.to_string()))
}

/// Loads a model file into a fresh workspace.
pub fn load_model(path: &Path) -> Result<Workspace> {
    let file = parse_model(&read(path)?, &path.display().to_string())?;
    let mut ws = Workspace::new();
    ws.add_model(&file)?;
    Ok(ws)
}

pub fn save_model(ws: &Workspace, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&ws.to_model()).expect("model files serialize");
    std::fs::write(path, text).map_err(|e| schema(path.display().to_string(), e.to_string()))
}

fn space_from_file(path: &Path) -> Result<StateSpace> {
    let text = read(path)?;
    let origin = path.display().to_string();
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| schema(&origin, e.to_string()))?;
    if value.get("vertices").is_some() {
        let s: SpaceJson = serde_json::from_value(value).map_err(|e| schema(&origin, e.to_string()))?;
        return space_from_json(&s, &origin);
    }
    let file: ModelFile = serde_json::from_value(value).map_err(|e| schema(&origin, e.to_string()))?;
    match file.spaces.as_slice() {
        [s] => space_from_json(s, &format!("{origin}:spaces[0]")),
        _ => Err(schema(origin, "expected exactly one state space")),
    }
}

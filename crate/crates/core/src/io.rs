//! File formats and deterministic JSON output.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::corpus::Hypothesis;
use crate::error::{Error, Result};
use crate::filling::{Filling, FillingParams};
use crate::graph::MetricGraph;
use crate::label::Label;
use crate::metric::FiniteMetricSpace;
use crate::uniformize::ConformalGraph;

/// Finite floats as 17 significant digits in scientific notation.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Pretty printer that writes every float with [`format_f64`].
/// Non-finite floats become `null`, as with serde_json's default.
struct Digits17<'a>(PrettyFormatter<'a>);

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(format_f64(v).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with 17-digit floats and a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::with_indent(b"  ")));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Internal(e.to_string()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: Label,
    pub v: Label,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: Vec<Label>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<Label>,
}

impl GraphFile {
    pub fn from_graph(g: &MetricGraph) -> Self {
        Self {
            vertices: g.labels().to_vec(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeRecord { u: g.label(e.u).clone(), v: g.label(e.v).clone(), length: e.len })
                .collect(),
            basepoint: g.basepoint().map(|b| g.label(b).clone()),
        }
    }

    pub fn to_graph(&self) -> Result<MetricGraph> {
        let edges: Vec<_> = self.edges.iter().map(|e| (e.u.clone(), e.v.clone(), e.length)).collect();
        MetricGraph::new(self.vertices.clone(), &edges, self.basepoint.clone())
    }
}

/// A point set given either by a distance matrix or by Euclidean coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpaceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub ids: Vec<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothesis: Option<Hypothesis>,
}

impl SpaceFile {
    pub fn from_space(space: &FiniteMetricSpace) -> Self {
        let (matrix, coords) = match space.coords() {
            Some(c) => (None, Some(c.to_vec())),
            None => (Some(space.matrix()), None),
        };
        Self { name: None, ids: space.ids().to_vec(), matrix, coords, hypothesis: None }
    }

    pub fn to_space(&self) -> Result<FiniteMetricSpace> {
        match (&self.matrix, &self.coords) {
            (Some(m), None) => FiniteMetricSpace::from_matrix(self.ids.clone(), m.clone()),
            (None, Some(c)) => FiniteMetricSpace::from_coords(self.ids.clone(), c.clone()),
            _ => Err(Error::Format("space file needs exactly one of `matrix` or `coords`".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillingVertex {
    pub id: usize,
    pub point: Label,
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FillingFile {
    pub params: FillingParams,
    pub space: SpaceFile,
    /// Point ids of each net `E_n`.
    pub levels: Vec<Vec<Label>>,
    pub vertices: Vec<FillingVertex>,
    pub saturation_level: Option<usize>,
    pub graph: GraphFile,
}

impl FillingFile {
    pub fn from_filling(f: &Filling) -> Self {
        let ids = f.base().ids();
        Self {
            params: *f.params(),
            space: SpaceFile::from_space(f.base()),
            levels: f.levels().iter().map(|l| l.iter().map(|&x| ids[x].clone()).collect()).collect(),
            vertices: (0..f.vertex_count())
                .map(|v| {
                    let (x, level) = f.vertex(v);
                    FillingVertex { id: v, point: ids[x].clone(), level }
                })
                .collect(),
            saturation_level: f.saturation_level(),
            graph: GraphFile::from_graph(f.graph()),
        }
    }

    /// Rebuild from the stored nets; the stored graph must match.
    pub fn to_filling(&self) -> Result<Filling> {
        let space = self.space.to_space()?;
        let levels = self
            .levels
            .iter()
            .map(|l| {
                l.iter()
                    .map(|id| space.index_of(id).ok_or_else(|| Error::UnknownVertex(id.clone())))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let f = Filling::from_levels(&space, self.params, levels)?;
        if GraphFile::from_graph(f.graph()) != self.graph {
            return Err(Error::Format("filling graph does not match its nets".into()));
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConformalVertex {
    pub label: Label,
    pub radial: f64,
    pub density: f64,
    pub boundary_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConformalEdge {
    pub u: Label,
    pub v: Label,
    pub length: f64,
    pub conformal_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConformalFile {
    pub epsilon: f64,
    pub basepoint: Label,
    pub truncation_depth: f64,
    pub frontier: Vec<Label>,
    pub vertices: Vec<ConformalVertex>,
    pub edges: Vec<ConformalEdge>,
}

impl ConformalFile {
    pub fn from_conformal(cg: &ConformalGraph) -> Self {
        let g = cg.graph();
        let bd = cg.boundary_distances();
        Self {
            epsilon: cg.epsilon(),
            basepoint: g.label(cg.basepoint()).clone(),
            truncation_depth: cg.truncation_depth(),
            frontier: cg.frontier().iter().map(|&v| g.label(v).clone()).collect(),
            vertices: (0..g.len())
                .map(|v| ConformalVertex {
                    label: g.label(v).clone(),
                    radial: cg.radial()[v],
                    density: cg.density(v),
                    boundary_distance: bd[v],
                })
                .collect(),
            edges: g
                .edges()
                .iter()
                .zip(cg.conformal_lengths())
                .map(|(e, &w)| ConformalEdge {
                    u: g.label(e.u).clone(),
                    v: g.label(e.v).clone(),
                    length: e.len,
                    conformal_length: w,
                })
                .collect(),
        }
    }
}

/// A graph read from disk, either plain or as a filling.
pub enum GraphInput {
    Graph(MetricGraph),
    Filling(Box<Filling>),
}

impl GraphInput {
    pub fn graph(&self) -> &MetricGraph {
        match self {
            GraphInput::Graph(g) => g,
            GraphInput::Filling(f) => f.graph(),
        }
    }

    /// Uniformize; fillings put their frontier on the deepest level.
    pub fn uniformize(&self, epsilon: f64) -> Result<ConformalGraph> {
        match self {
            GraphInput::Graph(g) => ConformalGraph::with_epsilon(g, epsilon),
            GraphInput::Filling(f) => f.uniformize(epsilon),
        }
    }
}

/// Read a graph file, or a filling file (recognized by its `levels` key).
pub fn read_graph_input(path: &Path) -> Result<GraphInput> {
    let value: serde_json::Value = read_json(path)?;
    if value.get("levels").is_some() {
        let file: FillingFile = serde_json::from_value(value).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        Ok(GraphInput::Filling(Box::new(file.to_filling()?)))
    } else {
        let file: GraphFile = serde_json::from_value(value).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        Ok(GraphInput::Graph(file.to_graph()?))
    }
}

pub fn read_space(path: &Path) -> Result<FiniteMetricSpace> {
    read_json::<SpaceFile>(path)?.to_space()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{cycle, segment};

    #[test]
    fn floats_have_17_digits() {
        assert_eq!(format_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(format_f64(1.0), "1.0000000000000000e0");
        let s = to_json_string(&serde_json::json!({"x": 0.1, "n": 3, "bad": f64::NAN})).unwrap();
        assert!(s.contains("\"x\": 1.0000000000000001e-1"));
        assert!(s.contains("\"n\": 3"));
        assert!(s.contains("\"bad\": null"));
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn graph_round_trip() {
        let g = cycle(5).unwrap();
        let f = GraphFile::from_graph(&g);
        let text = to_json_string(&f).unwrap();
        let back: GraphFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_graph().unwrap(), g);
    }

    #[test]
    fn filling_round_trip() {
        let f = Filling::build(&segment(9, 0.9).unwrap(), FillingParams::new(2.0, 2.0, 4, 1).unwrap()).unwrap();
        let file = FillingFile::from_filling(&f);
        let back: FillingFile = serde_json::from_str(&to_json_string(&file).unwrap()).unwrap();
        let g = back.to_filling().unwrap();
        assert_eq!(g.graph(), f.graph());
        assert_eq!(g.levels(), f.levels());
    }

    #[test]
    fn space_needs_one_source() {
        let s = SpaceFile { name: None, ids: vec![0u64.into()], matrix: None, coords: None, hypothesis: None };
        assert!(s.to_space().is_err());
    }
}

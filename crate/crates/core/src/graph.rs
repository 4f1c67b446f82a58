//! Metric graphs, shortest paths and curves.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::label::Label;

/// An undirected edge between vertex indices `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub len: f64,
}

/// A connected graph with positive edge lengths.
///
/// Vertices are stored in label order, so internal indices and labels sort
/// the same way; every tie-break by "smallest vertex" uses that order.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    labels: Vec<Label>,
    index: HashMap<Label, usize>,
    edges: Vec<Edge>,
    /// `adj[v]` lists `(neighbor, edge index)` sorted by neighbor.
    adj: Vec<Vec<(usize, usize)>>,
    basepoint: Option<usize>,
}

impl MetricGraph {
    /// Build a graph from labelled vertices and edges.
    ///
    /// Rejects duplicate vertices, unknown endpoints, self-loops, repeated
    /// edges, nonpositive lengths, and disconnected graphs.
    pub fn new(
        vertices: Vec<Label>,
        edges: &[(Label, Label, f64)],
        basepoint: Option<Label>,
    ) -> Result<Self> {
        let mut labels = vertices;
        labels.sort();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!("duplicate vertex {}", w[0])));
        }
        let index: HashMap<Label, usize> =
            labels.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
        let lookup = |l: &Label| index.get(l).copied().ok_or_else(|| Error::UnknownVertex(l.clone()));
        let mut indexed = Vec::with_capacity(edges.len());
        for (a, b, len) in edges {
            indexed.push((lookup(a)?, lookup(b)?, *len));
        }
        let base = basepoint.as_ref().map(lookup).transpose()?;
        Self::assemble(labels, index, indexed, base)
    }

    /// Build a graph whose vertex labels are `0..n`.
    pub fn from_indexed(n: usize, edges: &[(usize, usize, f64)], basepoint: Option<usize>) -> Result<Self> {
        let labels: Vec<Label> = (0..n).map(Label::from).collect();
        let index = labels.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
        if let Some(&(u, v, _)) = edges.iter().find(|(u, v, _)| *u >= n || *v >= n) {
            return Err(Error::UnknownVertex(Label::from(u.max(v))));
        }
        if let Some(b) = basepoint {
            if b >= n {
                return Err(Error::UnknownVertex(Label::from(b)));
            }
        }
        Self::assemble(labels, index, edges.to_vec(), basepoint)
    }

    fn assemble(
        labels: Vec<Label>,
        index: HashMap<Label, usize>,
        raw: Vec<(usize, usize, f64)>,
        basepoint: Option<usize>,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        let mut edges = Vec::with_capacity(raw.len());
        for (a, b, len) in raw {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at {}", labels[a])));
            }
            if !(len > 0.0 && len.is_finite()) {
                return Err(Error::InvalidGraph(format!(
                    "edge {}–{} has nonpositive or non-finite length {len}",
                    labels[a], labels[b]
                )));
            }
            edges.push(Edge { u: a.min(b), v: a.max(b), len });
        }
        edges.sort_by_key(|e| (e.u, e.v));
        if let Some(w) = edges.windows(2).find(|w| (w[0].u, w[0].v) == (w[1].u, w[1].v)) {
            return Err(Error::InvalidGraph(format!(
                "repeated edge {}–{}",
                labels[w[0].u], labels[w[0].v]
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for (k, e) in edges.iter().enumerate() {
            adj[e.u].push((e.v, k));
            adj[e.v].push((e.u, k));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let g = Self { labels, index, edges, adj, basepoint };
        if !g.is_connected() {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(g)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(w, _) in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.len()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &Label {
        &self.labels[v]
    }

    pub fn index_of(&self, label: &Label) -> Result<usize> {
        self.index.get(label).copied().ok_or_else(|| Error::UnknownVertex(label.clone()))
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adj[a]
            .binary_search_by(|(w, _)| w.cmp(&b))
            .ok()
            .map(|pos| self.adj[a][pos].1)
    }

    pub fn basepoint(&self) -> Option<usize> {
        self.basepoint
    }

    pub fn with_basepoint(mut self, basepoint: usize) -> Result<Self> {
        if basepoint >= self.len() {
            return Err(Error::UnknownVertex(Label::from(basepoint)));
        }
        self.basepoint = Some(basepoint);
        Ok(self)
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.len).collect()
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| e.len).fold(0.0, f64::max)
    }

    fn check(&self, v: usize) -> Result<()> {
        if v < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(Label::from(v)))
        }
    }

    /// Exact single-source shortest-path lengths under the graph's own lengths.
    pub fn distances_from(&self, source: usize) -> Result<Vec<f64>> {
        Ok(self.shortest_path_tree(source, &self.edge_lengths())?.dist)
    }

    /// Dijkstra under arbitrary positive per-edge weights.
    ///
    /// Among equally short predecessors the smallest vertex index wins.
    pub fn shortest_path_tree(&self, source: usize, weights: &[f64]) -> Result<ShortestPathTree> {
        self.check(source)?;
        if weights.len() != self.edges.len() {
            return Err(Error::InvalidParameter("one weight per edge required".into()));
        }
        let n = self.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred: Vec<Option<usize>> = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(HeapItem { dist: 0.0, vertex: source });
        while let Some(HeapItem { dist: d, vertex: u }) = heap.pop() {
            if done[u] || d > dist[u] {
                continue;
            }
            done[u] = true;
            for &(w, e) in &self.adj[u] {
                if done[w] {
                    continue;
                }
                let cand = d + weights[e];
                if cand < dist[w] {
                    dist[w] = cand;
                    pred[w] = Some(u);
                    heap.push(HeapItem { dist: cand, vertex: w });
                } else if cand == dist[w] && pred[w].is_some_and(|p| u < p) {
                    pred[w] = Some(u);
                }
            }
        }
        Ok(ShortestPathTree { source, dist, pred })
    }

    /// Distances between all pairs, as a dense row-major matrix.
    pub fn all_pairs(&self) -> DistanceMatrix {
        self.all_pairs_weighted(&self.edge_lengths())
    }

    pub fn all_pairs_weighted(&self, weights: &[f64]) -> DistanceMatrix {
        use rayon::prelude::*;
        let n = self.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|s| self.shortest_path_tree(s, weights).expect("valid source").dist)
            .collect();
        DistanceMatrix { n, data: rows.into_iter().flatten().collect() }
    }

    /// The deterministic shortest path from `x` to `y`.
    pub fn shortest_path_curve(&self, x: usize, y: usize) -> Result<Curve> {
        self.check(y)?;
        self.shortest_path_tree(x, &self.edge_lengths())?.path_to(y)
    }

    /// Every edge length multiplied by `k`.
    pub fn scale_metric(&self, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale factor must be positive, got {k}")));
        }
        let mut g = self.clone();
        for e in &mut g.edges {
            e.len *= k;
        }
        Ok(g)
    }

    /// Length of a curve under per-edge weights, with partial first/last edges.
    pub fn curve_length_with(&self, curve: &Curve, weights: &[f64]) -> Result<f64> {
        self.validate_curve(curve)?;
        let vs = curve.vertices();
        let mut total = 0.0;
        let last = vs.len().saturating_sub(2);
        for (i, w) in vs.windows(2).enumerate() {
            let e = self.edge_between(w[0], w[1]).expect("validated");
            let mut frac = 1.0;
            if i == 0 {
                frac -= curve.start_offset();
            }
            if i == last {
                frac -= curve.end_offset();
            }
            total += weights[e] * frac;
        }
        Ok(total)
    }

    pub fn curve_length(&self, curve: &Curve) -> Result<f64> {
        self.curve_length_with(curve, &self.edge_lengths())
    }

    pub fn validate_curve(&self, curve: &Curve) -> Result<()> {
        for &v in curve.vertices() {
            self.check(v)?;
        }
        for w in curve.vertices().windows(2) {
            if self.edge_between(w[0], w[1]).is_none() {
                return Err(Error::InvalidCurve(format!(
                    "{} and {} are not adjacent",
                    self.labels[w[0]], self.labels[w[1]]
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct HeapItem {
    dist: f64,
    vertex: usize,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    // Reversed for a min-heap; ties pop the smaller vertex first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

/// Output of a single-source shortest-path run.
#[derive(Debug, Clone)]
pub struct ShortestPathTree {
    pub source: usize,
    pub dist: Vec<f64>,
    pub pred: Vec<Option<usize>>,
}

impl ShortestPathTree {
    pub fn path_to(&self, target: usize) -> Result<Curve> {
        if target >= self.dist.len() {
            return Err(Error::UnknownVertex(Label::from(target)));
        }
        let mut path = vec![target];
        let mut v = target;
        while v != self.source {
            v = self.pred[v].ok_or_else(|| Error::Internal("broken predecessor chain".into()))?;
            path.push(v);
        }
        path.reverse();
        Ok(Curve::new(path))
    }
}

/// Dense symmetric distance table.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        Self { n, data: rows.into_iter().flatten().collect() }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }
}

/// A path of adjacent vertices, optionally starting and ending part-way
/// along its first and last edges.
///
/// `start_offset` is the fraction of the first edge that is skipped at the
/// start; `end_offset` the fraction of the last edge skipped at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    vertices: Vec<usize>,
    start_offset: f64,
    end_offset: f64,
}

impl Curve {
    pub fn new(vertices: Vec<usize>) -> Self {
        assert!(!vertices.is_empty(), "a curve needs at least one vertex");
        Self { vertices, start_offset: 0.0, end_offset: 0.0 }
    }

    pub fn with_offsets(vertices: Vec<usize>, start_offset: f64, end_offset: f64) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidCurve("a curve needs at least one vertex".into()));
        }
        let ok = |t: f64| (0.0..=1.0).contains(&t);
        if !ok(start_offset) || !ok(end_offset) {
            return Err(Error::InvalidCurve("offsets must lie in [0, 1]".into()));
        }
        if vertices.len() == 1 && (start_offset != 0.0 || end_offset != 0.0) {
            return Err(Error::InvalidCurve("a single-vertex curve cannot carry offsets".into()));
        }
        if vertices.len() == 2 && start_offset + end_offset > 1.0 {
            return Err(Error::InvalidCurve("offsets overlap on a single-edge curve".into()));
        }
        Ok(Self { vertices, start_offset, end_offset })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn start(&self) -> usize {
        self.vertices[0]
    }

    pub fn end(&self) -> usize {
        *self.vertices.last().expect("nonempty")
    }

    pub fn start_offset(&self) -> f64 {
        self.start_offset
    }

    pub fn end_offset(&self) -> f64 {
        self.end_offset
    }

    pub fn has_offsets(&self) -> bool {
        self.start_offset != 0.0 || self.end_offset != 0.0
    }

    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Self { vertices, start_offset: self.end_offset, end_offset: self.start_offset }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn path_graph(n: usize) -> MetricGraph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
        MetricGraph::from_indexed(n, &edges, Some(0)).unwrap()
    }

    fn cycle4() -> MetricGraph {
        MetricGraph::from_indexed(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)], Some(0)).unwrap()
    }

    #[test]
    fn path_graph_distances() {
        let g = MetricGraph::new(
            vec!["p".into(), "a".into(), "b".into()],
            &[("p".into(), "a".into(), 1.0), ("a".into(), "b".into(), 1.0)],
            Some("p".into()),
        )
        .unwrap();
        let d = g.distances_from(g.index_of(&"p".into()).unwrap()).unwrap();
        let at = |s: &str| d[g.index_of(&s.into()).unwrap()];
        assert_eq!((at("p"), at("a"), at("b")), (0.0, 1.0, 2.0));
    }

    #[test]
    fn four_cycle_opposite_pair() {
        let g = cycle4();
        assert_eq!(g.distances_from(0).unwrap()[2], 2.0);
        assert_eq!(g.shortest_path_curve(0, 2).unwrap().vertices(), &[0, 1, 2]);
        assert_eq!(g.shortest_path_curve(1, 3).unwrap().vertices(), &[1, 0, 3]);
    }

    #[test]
    fn trivial_curves() {
        let g = path_graph(5);
        let c = g.shortest_path_curve(2, 2).unwrap();
        assert_eq!(c.vertices(), &[2]);
        assert_eq!(g.curve_length(&c).unwrap(), 0.0);
        assert_eq!(g.shortest_path_curve(0, 4).unwrap().vertices(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn partial_edges() {
        let g = path_graph(3);
        let c = Curve::with_offsets(vec![0, 1, 2], 0.25, 0.5).unwrap();
        assert_eq!(g.curve_length(&c).unwrap(), 1.25);
        assert!(Curve::with_offsets(vec![0, 1], 0.6, 0.6).is_err());
    }

    #[test]
    fn rejects_bad_graphs() {
        assert!(MetricGraph::from_indexed(2, &[(0, 0, 1.0)], None).is_err());
        assert!(MetricGraph::from_indexed(2, &[(0, 1, 0.0)], None).is_err());
        assert!(MetricGraph::from_indexed(2, &[(0, 1, 1.0), (1, 0, 2.0)], None).is_err());
        assert!(MetricGraph::from_indexed(3, &[(0, 1, 1.0)], None).is_err());
        assert!(matches!(path_graph(3).distances_from(7), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn scaling() {
        let g = path_graph(4);
        assert_eq!(g.scale_metric(1.0).unwrap(), g);
        assert_eq!(g.scale_metric(2.0).unwrap().distances_from(0).unwrap(), vec![0.0, 2.0, 4.0, 6.0]);
        assert!(g.scale_metric(0.0).is_err());
        assert!(g.scale_metric(-1.0).is_err());
    }

    #[test]
    fn edge_order_does_not_matter() {
        let a = MetricGraph::from_indexed(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)], None).unwrap();
        let b = MetricGraph::from_indexed(4, &[(3, 0, 1.0), (2, 3, 1.0), (2, 1, 1.0), (1, 0, 1.0)], None).unwrap();
        assert_eq!(a, b);
    }
}

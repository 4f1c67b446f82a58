//! Hyperbolic fillings of finite samples of bounded metric spaces.
//!
//! Level `n` holds a maximal `α^{-n}`-separated net `E_n` of the sample, with
//! `E_n ⊆ E_{n+1}`. Vertices `(x, n)` are joined by unit edges when
//! `n = m` and `d(x, y) < 2τα^{-n}`, or when `|n - m| = 1` and
//! `d(x, y) < α^{-n} + α^{-m}`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::metric::{validate_metric, FiniteMetricSpace};
use crate::uniformize::ConformalGraph;

/// Diameter that [`normalize_space`] rescales to.
pub const NORMALIZED_DIAMETER: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FillingParams {
    pub alpha: f64,
    pub tau: f64,
    pub depth: usize,
    pub seed: u64,
}

impl FillingParams {
    pub fn new(alpha: f64, tau: f64, depth: usize, seed: u64) -> Result<Self> {
        let p = Self { alpha, tau, depth, seed };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        if !(self.alpha > 1.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must exceed 1, got {}", self.alpha)));
        }
        if !(self.tau > 1.0 && self.tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau must exceed 1, got {}", self.tau)));
        }
        Ok(())
    }

    /// Separation scale `α^{-n}` of level `n`.
    pub fn scale(&self, n: usize) -> f64 {
        self.alpha.powi(-(n as i32))
    }
}

/// Rescale so that the diameter drops below 1.
///
/// Spaces with diameter `>= 1` are divided by `diam / 0.9`; the returned
/// factor is that divisor (1 when nothing changes).
pub fn normalize_space(space: &FiniteMetricSpace) -> Result<(FiniteMetricSpace, f64)> {
    let diam = space.diameter();
    if diam < 1.0 {
        return Ok((space.clone(), 1.0));
    }
    let factor = diam / NORMALIZED_DIAMETER;
    Ok((space.scaled(1.0 / factor)?, factor))
}

/// Greedy insertion order shared by every level.
fn insertion_order(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

fn check_base(space: &FiniteMetricSpace) -> Result<()> {
    if let Some(v) = validate_metric(space).into_iter().next() {
        return Err(Error::Format(format!("sample is not a metric space: {v:?}")));
    }
    if space.diameter() >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "diameter {} must be < 1; normalize the space first",
            space.diameter()
        )));
    }
    Ok(())
}

/// Nested maximal separated nets `E_0 ⊆ E_1 ⊆ … ⊆ E_depth`, as sorted
/// point indices.
pub fn build_nets(space: &FiniteMetricSpace, params: &FillingParams) -> Result<Vec<Vec<usize>>> {
    params.check()?;
    check_base(space)?;
    let order = insertion_order(space.len(), params.seed);
    let mut member = vec![false; space.len()];
    let mut current: Vec<usize> = Vec::new();
    let mut levels = Vec::with_capacity(params.depth + 1);
    for n in 0..=params.depth {
        let r = params.scale(n);
        for &x in &order {
            if !member[x] && current.iter().all(|&y| space.dist(x, y) >= r) {
                member[x] = true;
                current.push(x);
            }
        }
        let mut level = current.clone();
        level.sort_unstable();
        levels.push(level);
    }
    Ok(levels)
}

/// A hyperbolic filling: leveled nets plus the unit-edge graph over them.
#[derive(Debug, Clone)]
pub struct Filling {
    base: FiniteMetricSpace,
    params: FillingParams,
    levels: Vec<Vec<usize>>,
    /// `(point index, level)` of every graph vertex.
    vertices: Vec<(usize, usize)>,
    /// First vertex index of each level; vertices are level-major.
    offsets: Vec<usize>,
    graph: MetricGraph,
}

impl Filling {
    pub fn build(space: &FiniteMetricSpace, params: FillingParams) -> Result<Self> {
        let levels = build_nets(space, &params)?;
        Self::from_levels(space, params, levels)
    }

    pub fn from_levels(space: &FiniteMetricSpace, params: FillingParams, levels: Vec<Vec<usize>>) -> Result<Self> {
        if levels.first().map(Vec::len) != Some(1) {
            return Err(Error::Internal("level 0 must be a single point".into()));
        }
        let mut vertices = Vec::new();
        let mut offsets = Vec::with_capacity(levels.len());
        for (n, level) in levels.iter().enumerate() {
            offsets.push(vertices.len());
            vertices.extend(level.iter().map(|&x| (x, n)));
        }
        let mut edges = Vec::new();
        for (n, level) in levels.iter().enumerate() {
            let same = 2.0 * params.tau * params.scale(n);
            for (i, &x) in level.iter().enumerate() {
                for (j, &y) in level.iter().enumerate().skip(i + 1) {
                    if space.dist(x, y) < same {
                        edges.push((offsets[n] + i, offsets[n] + j, 1.0));
                    }
                }
            }
            if n + 1 < levels.len() {
                let cross = params.scale(n) + params.scale(n + 1);
                for (i, &x) in level.iter().enumerate() {
                    for (j, &y) in levels[n + 1].iter().enumerate() {
                        if space.dist(x, y) < cross {
                            edges.push((offsets[n] + i, offsets[n + 1] + j, 1.0));
                        }
                    }
                }
            }
        }
        let graph = MetricGraph::from_indexed(vertices.len(), &edges, Some(0)).map_err(|e| match e {
            Error::InvalidGraph(msg) => Error::Internal(format!("filling graph: {msg}")),
            other => other,
        })?;
        Ok(Self { base: space.clone(), params, levels, vertices, offsets, graph })
    }

    pub fn base(&self) -> &FiniteMetricSpace {
        &self.base
    }

    pub fn params(&self) -> &FillingParams {
        &self.params
    }

    pub fn levels(&self) -> &[Vec<usize>] {
        &self.levels
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn root(&self) -> usize {
        0
    }

    /// `(point index, level)` of vertex `v`.
    pub fn vertex(&self, v: usize) -> (usize, usize) {
        self.vertices[v]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Vertex indices of level `n`.
    pub fn level_vertices(&self, n: usize) -> std::ops::Range<usize> {
        let end = self.offsets.get(n + 1).copied().unwrap_or(self.vertices.len());
        self.offsets[n]..end
    }

    /// Vertex index of point `x` at level `n`, if `x ∈ E_n`.
    pub fn vertex_of(&self, x: usize, n: usize) -> Option<usize> {
        self.levels
            .get(n)?
            .binary_search(&x)
            .ok()
            .map(|i| self.offsets[n] + i)
    }

    /// Deepest-level vertices.
    pub fn frontier(&self) -> Vec<usize> {
        self.level_vertices(self.depth()).collect()
    }

    /// Uniformize about the root with the deepest level as frontier.
    pub fn uniformize(&self, epsilon: f64) -> Result<ConformalGraph> {
        ConformalGraph::with_epsilon(&self.graph, epsilon)?.with_frontier(self.frontier())
    }

    /// Number of the first level whose net already contains every sample
    /// point, if any.
    pub fn saturation_level(&self) -> Option<usize> {
        self.levels.iter().position(|l| l.len() == self.base.len())
    }

    /// Max `d_ε` between two level-`n` vertices.
    pub fn level_sphere_diameter(&self, conformal: &ConformalGraph, n: usize) -> Result<f64> {
        use rayon::prelude::*;
        if n > self.depth() {
            return Err(Error::OutOfRange(format!("level {n} exceeds depth {}", self.depth())));
        }
        if conformal.graph().len() != self.graph.len() {
            return Err(Error::InvalidParameter("conformal graph does not belong to this filling".into()));
        }
        let range = self.level_vertices(n);
        let rows: Result<Vec<f64>> = range
            .clone()
            .into_par_iter()
            .map(|v| {
                let d = conformal.distances_from(v)?;
                Ok(range.clone().map(|w| d[w]).fold(0.0, f64::max))
            })
            .collect();
        Ok(rows?.into_iter().fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::Label;

    fn segment(n: usize, len: f64) -> FiniteMetricSpace {
        let ids = (0..n).map(Label::from).collect();
        let coords = (0..n)
            .map(|i| vec![if n == 1 { 0.0 } else { len * i as f64 / (n - 1) as f64 }])
            .collect();
        FiniteMetricSpace::from_coords(ids, coords).unwrap()
    }

    #[test]
    fn two_point_nets() {
        let s = segment(2, 0.5);
        let nets = build_nets(&s, &FillingParams::new(2.0, 2.0, 2, 7).unwrap()).unwrap();
        assert_eq!(nets[0].len(), 1);
        assert_eq!(nets[1], vec![0, 1]);
        assert_eq!(nets[2], vec![0, 1]);
    }

    #[test]
    fn single_point_filling_is_a_path() {
        let s = segment(1, 0.0);
        let f = Filling::build(&s, FillingParams::new(2.0, 2.0, 3, 1).unwrap()).unwrap();
        assert_eq!(f.vertex_count(), 4);
        assert_eq!(f.graph().edges().len(), 3);
        assert_eq!(f.graph().distances_from(0).unwrap(), vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn two_point_same_level_edge() {
        // 0.5 < 2·2·2^{-1} = 2, so (a,1)–(b,1) is an edge.
        let s = segment(2, 0.5);
        let f = Filling::build(&s, FillingParams::new(2.0, 2.0, 2, 7).unwrap()).unwrap();
        let a = f.vertex_of(0, 1).unwrap();
        let b = f.vertex_of(1, 1).unwrap();
        assert!(f.graph().edge_between(a, b).is_some());
    }

    #[test]
    fn normalization() {
        let (s, k) = normalize_space(&segment(3, 0.5)).unwrap();
        assert_eq!(k, 1.0);
        assert_eq!(s.diameter(), 0.5);
        let (s, k) = normalize_space(&segment(3, 9.0)).unwrap();
        assert!((k - 10.0).abs() < 1e-12);
        assert!((s.diameter() - 0.9).abs() < 1e-12);
        assert!(validate_metric(&s).is_empty());
    }

    #[test]
    fn rejects_large_diameter_and_bad_params() {
        assert!(build_nets(&segment(3, 2.0), &FillingParams { alpha: 2.0, tau: 2.0, depth: 2, seed: 0 }).is_err());
        assert!(FillingParams::new(1.0, 2.0, 2, 0).is_err());
        assert!(FillingParams::new(2.0, 0.5, 2, 0).is_err());
    }

    #[test]
    fn level_sphere_diameter_trivial_cases() {
        let f = Filling::build(&segment(1, 0.0), FillingParams::new(2.0, 2.0, 3, 0).unwrap()).unwrap();
        let cg = f.uniformize(1.0).unwrap();
        for n in 0..=3 {
            assert_eq!(f.level_sphere_diameter(&cg, n).unwrap(), 0.0);
        }
        assert!(f.level_sphere_diameter(&cg, 4).is_err());
        let f = Filling::build(&segment(16, 0.9), FillingParams::new(2.0, 2.0, 4, 0).unwrap()).unwrap();
        let cg = f.uniformize(1.0).unwrap();
        assert_eq!(f.level_sphere_diameter(&cg, 0).unwrap(), 0.0);
    }
}

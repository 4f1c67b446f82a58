//! Generators for base spaces and test graphs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filling::NORMALIZED_DIAMETER;
use crate::graph::MetricGraph;
use crate::label::Label;
use crate::metric::FiniteMetricSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    Segment,
    Circle,
    Cantor,
    PointCloudFile,
    Tree,
}

/// Whether the sample comes from a space with at least two points in which
/// any two points are joined by a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hypothesis {
    Satisfied,
    Violated,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpaceCorpusEntry {
    pub name: String,
    pub generator: Generator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl SpaceCorpusEntry {
    pub fn new(name: impl Into<String>, generator: Generator) -> Self {
        Self { name: name.into(), generator, points: None, length: None, ratio: None, depth: None, seed: None, path: None }
    }

    pub fn segment(points: usize) -> Self {
        Self { points: Some(points), ..Self::new(format!("segment-{points}"), Generator::Segment) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpace {
    pub space: FiniteMetricSpace,
    pub hypothesis: Hypothesis,
}

fn ids(n: usize) -> Vec<Label> {
    (0..n).map(Label::from).collect()
}

fn positive(name: &str, n: Option<usize>, default: usize) -> Result<usize> {
    match n.unwrap_or(default) {
        0 => Err(Error::InvalidParameter(format!("{name} must be positive"))),
        k => Ok(k),
    }
}

/// `n` equally spaced points on a segment of the given length.
pub fn segment(n: usize, length: f64) -> Result<FiniteMetricSpace> {
    if n == 0 {
        return Err(Error::InvalidParameter("segment needs at least one point".into()));
    }
    if !(length >= 0.0 && length.is_finite()) || (n > 1 && length == 0.0) {
        return Err(Error::InvalidParameter(format!("segment length must be positive, got {length}")));
    }
    let step = if n > 1 { length / (n - 1) as f64 } else { 0.0 };
    let coords = (0..n).map(|i| vec![i as f64 * step]).collect();
    FiniteMetricSpace::from_coords(ids(n), coords)
}

/// `n` equally spaced points on a circle with the arc-length metric,
/// circumference chosen so the diameter of the full circle is 0.9.
pub fn circle(n: usize) -> Result<FiniteMetricSpace> {
    if n == 0 {
        return Err(Error::InvalidParameter("circle needs at least one point".into()));
    }
    let circumference = 2.0 * NORMALIZED_DIAMETER;
    let m = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let k = i.abs_diff(j).min(n - i.abs_diff(j));
                    circumference * k as f64 / n as f64
                })
                .collect()
        })
        .collect();
    FiniteMetricSpace::from_matrix(ids(n), m)
}

/// Left endpoints of the `2^depth` intervals of a middle-cut Cantor set in
/// `[0, 1]`, each step keeping two subintervals scaled by `ratio`.
pub fn cantor(ratio: f64, depth: usize) -> Result<FiniteMetricSpace> {
    if !(ratio > 0.0 && ratio < 0.5) {
        return Err(Error::InvalidParameter(format!("cantor ratio must lie in (0, 1/2), got {ratio}")));
    }
    if depth > 16 {
        return Err(Error::InvalidParameter(format!("cantor depth {depth} exceeds 16")));
    }
    let mut pts = vec![0.0];
    let mut width = 1.0;
    for _ in 0..depth {
        let shift = width * (1.0 - ratio);
        pts = pts.iter().flat_map(|&x| [x, x + shift]).collect();
        width *= ratio;
    }
    let coords = pts.into_iter().map(|x| vec![x]).collect();
    FiniteMetricSpace::from_coords(ids(1 << depth), coords)
}

/// Vertices of a seeded random tree with path metric, scaled to diameter 0.9.
pub fn tree_sample(n: usize, seed: u64) -> Result<FiniteMetricSpace> {
    if n == 0 {
        return Err(Error::InvalidParameter("tree needs at least one point".into()));
    }
    if n == 1 {
        return FiniteMetricSpace::from_matrix(ids(1), vec![vec![0.0]]);
    }
    let g = random_tree(n, seed)?;
    let d = g.all_pairs();
    let scale = NORMALIZED_DIAMETER / d.max();
    let m = (0..n).map(|i| d.row(i).iter().map(|x| x * scale).collect()).collect();
    FiniteMetricSpace::from_matrix(ids(n), m)
}

/// Build the space described by `entry`; `load` reads point-cloud files.
pub fn corpus_generate(
    entry: &SpaceCorpusEntry,
    load: impl FnOnce(&str) -> Result<FiniteMetricSpace>,
) -> Result<CorpusSpace> {
    let (space, hypothesis) = match entry.generator {
        Generator::Segment => {
            let n = positive("points", entry.points, 64)?;
            (segment(n, entry.length.unwrap_or(NORMALIZED_DIAMETER))?, two_or_more(n))
        }
        Generator::Circle => {
            let n = positive("points", entry.points, 64)?;
            (circle(n)?, two_or_more(n))
        }
        Generator::Cantor => {
            let depth = entry.depth.unwrap_or(5);
            (cantor(entry.ratio.unwrap_or(1.0 / 3.0), depth)?, Hypothesis::Violated)
        }
        Generator::Tree => {
            let n = positive("points", entry.points, 64)?;
            (tree_sample(n, entry.seed.unwrap_or(0))?, two_or_more(n))
        }
        Generator::PointCloudFile => {
            let path = entry
                .path
                .as_deref()
                .ok_or_else(|| Error::InvalidParameter("point-cloud-file needs a path".into()))?;
            (load(path)?, Hypothesis::Unknown)
        }
    };
    Ok(CorpusSpace { space, hypothesis })
}

fn two_or_more(n: usize) -> Hypothesis {
    if n >= 2 {
        Hypothesis::Satisfied
    } else {
        Hypothesis::Violated
    }
}

fn dyadic(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(1..=8) as f64 / 4.0
}

/// Random recursive tree rooted at 0 with edge lengths in `{1/4, ..., 2}`.
///
/// Dyadic lengths keep every path sum exact in floating point.
pub fn random_tree(n: usize, seed: u64) -> Result<MetricGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<_> = (1..n).map(|v| (rng.gen_range(0..v), v, dyadic(&mut rng))).collect();
    MetricGraph::from_indexed(n, &edges, Some(0))
}

/// Random connected graph: a random tree plus `extra` chords, dyadic lengths.
pub fn random_graph(n: usize, extra: usize, seed: u64) -> Result<MetricGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<_> = (1..n).map(|v| (rng.gen_range(0..v), v, dyadic(&mut rng))).collect();
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).collect();
    pairs.retain(|&(a, b)| !edges.iter().any(|&(u, v, _)| (u, v) == (a, b)));
    pairs.shuffle(&mut rng);
    for &(a, b) in pairs.iter().take(extra) {
        edges.push((a, b, dyadic(&mut rng)));
    }
    MetricGraph::from_indexed(n, &edges, Some(0))
}

/// Complete binary tree of the given depth with unit edges, rooted at 0.
pub fn binary_tree(depth: usize) -> Result<MetricGraph> {
    let n = (1usize << (depth + 1)) - 1;
    let edges: Vec<_> = (1..n).map(|v| ((v - 1) / 2, v, 1.0)).collect();
    MetricGraph::from_indexed(n, &edges, Some(0))
}

/// Path `0 - 1 - ... - (n-1)` with unit edges, based at 0.
pub fn path(n: usize) -> Result<MetricGraph> {
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v, 1.0)).collect();
    MetricGraph::from_indexed(n, &edges, Some(0))
}

/// Cycle on `n ≥ 3` vertices with unit edges, based at 0.
pub fn cycle(n: usize) -> Result<MetricGraph> {
    if n < 3 {
        return Err(Error::InvalidParameter("cycle needs at least 3 vertices".into()));
    }
    let edges: Vec<_> = (0..n).map(|v| (v.min((v + 1) % n), v.max((v + 1) % n), 1.0)).collect();
    MetricGraph::from_indexed(n, &edges, Some(0))
}

/// Star with `arms` arms of `arm_len` unit edges around center 0.
pub fn star(arms: usize, arm_len: usize) -> Result<MetricGraph> {
    let mut edges = Vec::new();
    let mut next = 1;
    for _ in 0..arms {
        let mut prev = 0;
        for _ in 0..arm_len {
            edges.push((prev, next, 1.0));
            prev = next;
            next += 1;
        }
    }
    MetricGraph::from_indexed(next, &edges, Some(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::validate_metric;

    fn no_file(_: &str) -> Result<FiniteMetricSpace> {
        unreachable!()
    }

    #[test]
    fn generated_spaces_are_metrics() {
        for s in [segment(64, 0.9).unwrap(), circle(17).unwrap(), cantor(1.0 / 3.0, 5).unwrap(), tree_sample(30, 2).unwrap()] {
            assert!(validate_metric(&s).is_empty());
            assert!(s.diameter() < 1.0);
        }
    }

    #[test]
    fn two_point_segment() {
        let s = segment(2, 0.5).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.dist(0, 1), 0.5);
    }

    #[test]
    fn circle_is_arc_length() {
        let s = circle(8).unwrap();
        assert!((s.dist(0, 4) - 0.9).abs() < 1e-15);
        assert!((s.dist(1, 7) - 0.45).abs() < 1e-15);
    }

    #[test]
    fn cantor_flag_and_size() {
        let mut e = SpaceCorpusEntry::new("cantor", Generator::Cantor);
        e.ratio = Some(1.0 / 3.0);
        e.depth = Some(5);
        let c = corpus_generate(&e, no_file).unwrap();
        assert_eq!(c.space.len(), 32);
        assert_eq!(c.hypothesis, Hypothesis::Violated);
        // Last point of the left half to first point of the right half.
        assert!((c.space.dist(15, 16) - (1.0 / 3.0 + (1.0f64 / 3.0).powi(5))).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_sizes_rejected() {
        let mut e = SpaceCorpusEntry::segment(0);
        assert!(corpus_generate(&e, no_file).is_err());
        e.generator = Generator::PointCloudFile;
        assert!(corpus_generate(&e, no_file).is_err());
    }

    #[test]
    fn graph_generators() {
        assert_eq!(binary_tree(5).unwrap().len(), 63);
        assert_eq!(random_tree(50, 1).unwrap().edges().len(), 49);
        assert_eq!(random_graph(20, 7, 1).unwrap().edges().len(), 26);
        assert_eq!(cycle(4).unwrap().edges().len(), 4);
        assert_eq!(star(3, 2).unwrap().len(), 7);
        assert_eq!(path(1).unwrap().len(), 1);
    }
}

//! The uniformized metric `d_ε` induced by the density `e^{-ε d(p,·)}`,
//! boundary-distance approximations, and the quasihyperbolic metric `k_ε`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Curve, MetricGraph};

/// Relative tolerance on radial data consistency `|a - b| <= L`.
const RADIAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformizationParams {
    pub epsilon: f64,
    pub basepoint: usize,
}

impl UniformizationParams {
    pub fn new(epsilon: f64, basepoint: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { epsilon, basepoint })
    }
}

/// `∫_0^Δ e^{-εt} dt`, stable as `ε → 0`.
#[inline]
pub fn radial_integral(epsilon: f64, span: f64) -> f64 {
    if span <= 0.0 {
        return 0.0;
    }
    let x = epsilon * span;
    if x < 1e-12 {
        span
    } else {
        -(-x).exp_m1() / epsilon
    }
}

/// The `d_ε`-length of an infinite geodesic ray continued from radius `r`.
#[inline]
pub fn radial_tail(epsilon: f64, r: f64) -> f64 {
    (-epsilon * r).exp() / epsilon
}

/// `∫_{t0}^{t1} e^{-ε m(t)} dt` along an edge of length `len` whose endpoints
/// sit at radial distances `a` (at `t = 0`) and `b` (at `t = len`), with
/// `m(t) = min(a + t, b + len - t)`.
pub fn conformal_integral(a: f64, b: f64, len: f64, epsilon: f64, t0: f64, t1: f64) -> Result<f64> {
    check_radial(a, b, len)?;
    if !(0.0..=len).contains(&t0) || !(0.0..=len).contains(&t1) || t0 > t1 {
        return Err(Error::OutOfRange(format!("sub-interval [{t0}, {t1}] outside [0, {len}]")));
    }
    let split = ((b + len - a) / 2.0).clamp(0.0, len);
    let mut total = 0.0;
    // Rising piece m(t) = a + t on [t0, min(t1, split)].
    let (p, q) = (t0, t1.min(split));
    if q > p {
        total += (-epsilon * (a + p)).exp() * radial_integral(epsilon, q - p);
    }
    // Falling piece m(t) = b + len - t on [max(t0, split), t1].
    let (p, q) = (t0.max(split), t1);
    if q > p {
        total += (-epsilon * (b + len - q)).exp() * radial_integral(epsilon, q - p);
    }
    Ok(total)
}

/// Exact `∫ ρ_ε ds` over a whole edge.
pub fn conformal_edge_length(a: f64, b: f64, len: f64, epsilon: f64) -> Result<f64> {
    conformal_integral(a, b, len, epsilon, 0.0, len)
}

fn check_radial(a: f64, b: f64, len: f64) -> Result<()> {
    let slack = RADIAL_TOL * (1.0 + len.max(a).max(b));
    if (a - b).abs() > len + slack {
        return Err(Error::NumericGuard(format!(
            "inconsistent radial data: |{a} - {b}| exceeds edge length {len}"
        )));
    }
    Ok(())
}

/// A metric graph reweighted by the conformal density.
#[derive(Debug, Clone)]
pub struct ConformalGraph {
    underlying: MetricGraph,
    params: UniformizationParams,
    radial: Vec<f64>,
    conformal: Vec<f64>,
    frontier: Vec<usize>,
}

impl ConformalGraph {
    /// Uniformize `g` about `params.basepoint`. The frontier defaults to the
    /// vertices at maximal radial distance.
    pub fn new(g: &MetricGraph, params: UniformizationParams) -> Result<Self> {
        let radial = g.distances_from(params.basepoint)?;
        let conformal = g
            .edges()
            .iter()
            .map(|e| conformal_edge_length(radial[e.u], radial[e.v], e.len, params.epsilon))
            .collect::<Result<Vec<_>>>()?;
        let depth = radial.iter().copied().fold(0.0, f64::max);
        let frontier = (0..g.len())
            .filter(|&v| radial[v] >= depth - RADIAL_TOL * (1.0 + depth))
            .collect();
        Ok(Self { underlying: g.clone(), params, radial, conformal, frontier })
    }

    /// Uniformize with the basepoint stored on the graph.
    pub fn with_epsilon(g: &MetricGraph, epsilon: f64) -> Result<Self> {
        let p = g
            .basepoint()
            .ok_or_else(|| Error::InvalidGraph("graph has no basepoint".into()))?;
        Self::new(g, UniformizationParams::new(epsilon, p)?)
    }

    pub fn with_frontier(mut self, frontier: Vec<usize>) -> Result<Self> {
        if frontier.is_empty() {
            return Err(Error::InvalidParameter("empty frontier".into()));
        }
        if let Some(&v) = frontier.iter().find(|&&v| v >= self.underlying.len()) {
            return Err(Error::UnknownVertex(v.into()));
        }
        self.frontier = frontier;
        Ok(self)
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.underlying
    }

    pub fn params(&self) -> UniformizationParams {
        self.params
    }

    pub fn epsilon(&self) -> f64 {
        self.params.epsilon
    }

    pub fn basepoint(&self) -> usize {
        self.params.basepoint
    }

    pub fn radial(&self) -> &[f64] {
        &self.radial
    }

    pub fn conformal_lengths(&self) -> &[f64] {
        &self.conformal
    }

    pub fn frontier(&self) -> &[usize] {
        &self.frontier
    }

    pub fn truncation_depth(&self) -> f64 {
        self.radial.iter().copied().fold(0.0, f64::max)
    }

    /// `ρ_ε(v) = e^{-ε d(p, v)}`.
    pub fn density(&self, v: usize) -> f64 {
        (-self.params.epsilon * self.radial[v]).exp()
    }

    pub fn distances_from(&self, x: usize) -> Result<Vec<f64>> {
        Ok(self.underlying.shortest_path_tree(x, &self.conformal)?.dist)
    }

    pub fn uniformized_distance(&self, x: usize, y: usize) -> Result<f64> {
        if y >= self.underlying.len() {
            return Err(Error::UnknownVertex(y.into()));
        }
        Ok(self.distances_from(x)?[y])
    }

    /// A shortest curve for `d_ε` (deterministic tie-break).
    pub fn uniformized_geodesic(&self, x: usize, y: usize) -> Result<Curve> {
        self.underlying.shortest_path_tree(x, &self.conformal)?.path_to(y)
    }

    /// `∫_t0^t1 ρ_ε` along edge `e`, with `t` measured from the smaller endpoint.
    fn edge_piece(&self, e: usize, t0: f64, t1: f64) -> Result<f64> {
        let edge = self.underlying.edges()[e];
        conformal_integral(self.radial[edge.u], self.radial[edge.v], edge.len, self.params.epsilon, t0, t1)
    }

    /// Conformal length of the portion of edge `from → to` between fractions
    /// `f0 <= f1` of the way from `from`.
    fn directed_piece(&self, from: usize, to: usize, f0: f64, f1: f64) -> Result<f64> {
        let e = self
            .underlying
            .edge_between(from, to)
            .ok_or_else(|| Error::InvalidCurve("vertices not adjacent".into()))?;
        let edge = self.underlying.edges()[e];
        if f0 == 0.0 && f1 == 1.0 {
            return Ok(self.conformal[e]);
        }
        let (t0, t1) = if from == edge.u {
            (f0 * edge.len, f1 * edge.len)
        } else {
            ((1.0 - f1) * edge.len, (1.0 - f0) * edge.len)
        };
        self.edge_piece(e, t0, t1)
    }

    /// `l_{d_ε}(c)`.
    pub fn uniformized_curve_length(&self, c: &Curve) -> Result<f64> {
        self.underlying.validate_curve(c)?;
        Ok(self.prefix_lengths(c)?.last().copied().unwrap_or(0.0))
    }

    /// Cumulative `d_ε`-length at every curve vertex; entry 0 is 0 and the
    /// last entry is the total length including partial end edges.
    pub fn prefix_lengths(&self, c: &Curve) -> Result<Vec<f64>> {
        let vs = c.vertices();
        let mut out = Vec::with_capacity(vs.len());
        out.push(0.0);
        let last = vs.len().saturating_sub(2);
        let mut acc = 0.0;
        for (i, w) in vs.windows(2).enumerate() {
            let f0 = if i == 0 { c.start_offset() } else { 0.0 };
            let f1 = if i == last { 1.0 - c.end_offset() } else { 1.0 };
            acc += self.directed_piece(w[0], w[1], f0, f1)?;
            out.push(acc);
        }
        Ok(out)
    }

    /// Approximate `dist_{d_ε}(x, ∂X^ε)` for every vertex: distance to the
    /// frontier plus the analytic radial tail beyond each frontier vertex.
    pub fn boundary_distances(&self) -> Vec<f64> {
        let g = &self.underlying;
        let n = g.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = std::collections::BinaryHeap::new();
        for &f in &self.frontier {
            let t = radial_tail(self.params.epsilon, self.radial[f]);
            if t < dist[f] {
                dist[f] = t;
            }
        }
        for (v, &d) in dist.iter().enumerate() {
            if d.is_finite() {
                heap.push(std::cmp::Reverse((OrdF64(d), v)));
            }
        }
        while let Some(std::cmp::Reverse((OrdF64(d), u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(w, e) in g.neighbors(u) {
                let cand = d + self.conformal[e];
                if cand < dist[w] {
                    dist[w] = cand;
                    heap.push(std::cmp::Reverse((OrdF64(cand), w)));
                }
            }
        }
        dist
    }

    pub fn boundary_distance(&self, x: usize) -> Result<f64> {
        if x >= self.underlying.len() {
            return Err(Error::UnknownVertex(x.into()));
        }
        Ok(self.boundary_distances()[x])
    }

    /// Worst multiplicative violation of
    /// `e^{-εd(x,y)} ≤ ρ_ε(x)/ρ_ε(y) ≤ e^{εd(x,y)}` over the given pairs.
    ///
    /// Evaluated in log space so deep vertices cannot underflow.
    pub fn harnack_check(&self, pairs: &[(usize, usize)]) -> Result<f64> {
        let eps = self.params.epsilon;
        let mut worst = 0.0f64;
        for (x, row) in group_pairs(&self.underlying, pairs)? {
            let d = self.underlying.distances_from(x)?;
            for y in row {
                let log_ratio = -eps * (self.radial[x] - self.radial[y]);
                let excess = log_ratio.abs() - eps * d[y];
                worst = worst.max(excess.exp_m1().max(0.0));
            }
        }
        Ok(worst)
    }

    pub fn quasihyperbolic(&self) -> QuasiHyperbolicGraph {
        QuasiHyperbolicGraph::new(self.clone())
    }
}

/// Group query pairs by their first vertex so each source runs one Dijkstra.
pub(crate) fn group_pairs(g: &MetricGraph, pairs: &[(usize, usize)]) -> Result<BTreeMap<usize, Vec<usize>>> {
    let mut by_source: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(x, y) in pairs {
        if x >= g.len() {
            return Err(Error::UnknownVertex(x.into()));
        }
        if y >= g.len() {
            return Err(Error::UnknownVertex(y.into()));
        }
        by_source.entry(x).or_default().push(y);
    }
    Ok(by_source)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct OrdF64(pub f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// `∫_0^σ ds / (D_u + (D_v - D_u) s/σ)`: the quasihyperbolic length of an
/// edge of conformal length `σ` when the boundary distance varies linearly.
pub fn quasi_edge_length(sigma: f64, du: f64, dv: f64) -> f64 {
    let x = (dv - du) / du;
    if x.abs() < 1e-6 {
        sigma / du * (1.0 - x / 2.0 + x * x / 3.0)
    } else {
        sigma * (dv / du).ln() / (dv - du)
    }
}

/// The conformal graph reweighted by the quasihyperbolic density `1/d_ε(·)`.
#[derive(Debug, Clone)]
pub struct QuasiHyperbolicGraph {
    underlying: ConformalGraph,
    boundary: Vec<f64>,
    quasi: Vec<f64>,
}

impl QuasiHyperbolicGraph {
    pub fn new(cg: ConformalGraph) -> Self {
        let boundary = cg.boundary_distances();
        let quasi = cg
            .graph()
            .edges()
            .iter()
            .zip(cg.conformal_lengths())
            .map(|(e, &sigma)| {
                if boundary[e.u] > 0.0 && boundary[e.v] > 0.0 {
                    quasi_edge_length(sigma, boundary[e.u], boundary[e.v])
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        Self { underlying: cg, boundary, quasi }
    }

    pub fn conformal(&self) -> &ConformalGraph {
        &self.underlying
    }

    pub fn boundary_distances(&self) -> &[f64] {
        &self.boundary
    }

    pub fn quasi_lengths(&self) -> &[f64] {
        &self.quasi
    }

    fn interior(&self, v: usize) -> Result<()> {
        match self.boundary.get(v) {
            None => Err(Error::UnknownVertex(v.into())),
            Some(&d) if d <= 0.0 => Err(Error::InvalidParameter(format!(
                "vertex {v} has zero boundary distance and is a frontier point"
            ))),
            Some(_) => Ok(()),
        }
    }

    pub fn distances_from(&self, x: usize) -> Result<Vec<f64>> {
        self.interior(x)?;
        Ok(self.underlying.graph().shortest_path_tree(x, &self.quasi)?.dist)
    }

    /// `k_ε(x, y)`.
    pub fn quasihyperbolic_distance(&self, x: usize, y: usize) -> Result<f64> {
        self.interior(y)?;
        Ok(self.distances_from(x)?[y])
    }

    /// Smallest `C` with `d/C ≤ k_ε ≤ C d` over the given pairs.
    pub fn comparability(&self, pairs: &[(usize, usize)]) -> Result<Comparability> {
        let g = self.underlying.graph();
        let grouped: Vec<(usize, Vec<usize>)> = group_pairs(g, pairs)?.into_iter().collect();
        let parts: Result<Vec<(f64, f64, u64)>> = grouped
            .par_iter()
            .map(|(x, ys)| {
                let d = g.distances_from(*x)?;
                let k = self.distances_from(*x)?;
                let mut acc = (0.0f64, 0.0f64, 0u64);
                for &y in ys.iter().filter(|&&y| y != *x) {
                    self.interior(y)?;
                    acc.0 = acc.0.max(k[y] / d[y]);
                    acc.1 = acc.1.max(d[y] / k[y]);
                    acc.2 += 1;
                }
                Ok(acc)
            })
            .collect();
        let (up, down, n) = parts?.into_iter().fold((0.0f64, 0.0f64, 0u64), |a, b| (a.0.max(b.0), a.1.max(b.1), a.2 + b.2));
        Ok(Comparability { pairs: n, max_k_over_d: up, max_d_over_k: down, c: up.max(down) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Comparability {
    pub pairs: u64,
    pub max_k_over_d: f64,
    pub max_d_over_k: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

//! Gromov products, four-point δ, rough starlikeness and Gromov-sequence
//! diagnostics on metric graphs.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Curve, DistanceMatrix, MetricGraph};

/// Default vertex cap for the exhaustive four-point scan.
pub const DEFAULT_EXACT_CAP: usize = 300;

/// A quadruple whose defect is at most this fraction of its largest pair sum
/// is rounding noise and counts as zero.
pub const DEFECT_REL_TOL: f64 = 1e-12;

/// Above this many vertices the sampler fetches distance rows on demand
/// instead of materializing the full matrix.
const SAMPLED_DENSE_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaMethod {
    Exact,
    Sampled,
}

/// Ordered quadruple `(x, y, z, p)` with
/// `(x|z)_p = (x|y)_p ∧ (y|z)_p - δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quadruple {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub p: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DeltaEstimate {
    pub delta: f64,
    pub method: DeltaMethod,
    pub quadruples_examined: u64,
    pub witness: Option<Quadruple>,
    /// Vertex quadruples determine δ up to half the longest edge.
    pub edge_resolution: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// `(x|y)_p = ½(d(p,x) + d(p,y) - d(x,y))`.
pub fn gromov_product(g: &MetricGraph, p: usize, x: usize, y: usize) -> Result<f64> {
    let dp = g.distances_from(p)?;
    if x >= g.len() || y >= g.len() {
        return Err(Error::UnknownVertex(x.max(y).into()));
    }
    let dx = g.distances_from(x)?;
    Ok(product_from(dp[x], dp[y], dx[y]))
}

#[inline]
pub(crate) fn product_from(dpx: f64, dpy: f64, dxy: f64) -> f64 {
    (0.5 * (dpx + dpy - dxy)).max(0.0)
}

/// Largest four-point defect of the set `{a,b,c,d}` and the ordered
/// quadruple realizing it.
#[inline]
fn split_defect(d: &DistanceMatrix, a: usize, b: usize, c: usize, e: usize) -> (f64, Quadruple) {
    let s = [
        (d.get(a, b) + d.get(c, e), Quadruple { x: a, z: b, p: c, y: e }),
        (d.get(a, c) + d.get(b, e), Quadruple { x: a, z: c, p: b, y: e }),
        (d.get(a, e) + d.get(b, c), Quadruple { x: a, z: e, p: b, y: c }),
    ];
    let (imax, _) = s
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, (v, _))| if *v > acc.1 { (i, *v) } else { acc });
    let mid = s
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != imax)
        .map(|(_, (v, _))| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    (0.5 * (s[imax].0 - mid), s[imax].1)
}

/// Exhaustive four-point δ over all vertex quadruples.
///
/// Refuses graphs with more than `cap` vertices.
pub fn delta_exact(g: &MetricGraph, cap: usize) -> Result<DeltaEstimate> {
    let n = g.len();
    if n > cap {
        return Err(Error::Refused(format!(
            "{n} vertices exceed the exact-scan cap of {cap}; use delta_sampled instead"
        )));
    }
    let d = g.all_pairs();
    // For fixed a < b < c the inner loop over e > c only needs three rows.
    let best = (0..n)
        .into_par_iter()
        .map(|a| {
            let ra = d.row(a);
            let mut best = (0.0f64, None::<Quadruple>);
            for b in (a + 1)..n {
                let rb = d.row(b);
                for c in (b + 1)..n {
                    let rc = d.row(c);
                    let (dab, dac, dbc) = (ra[b], ra[c], rb[c]);
                    for e in (c + 1)..n {
                        let s1 = dab + rc[e];
                        let s2 = dac + rb[e];
                        let s3 = ra[e] + dbc;
                        let hi = s1.max(s2).max(s3);
                        let lo = s1.min(s2).min(s3);
                        let defect = 0.5 * (hi - (s1 + s2 + s3 - hi - lo));
                        if defect > best.0 && defect > DEFECT_REL_TOL * hi {
                            let (v, q) = split_defect(&d, a, b, c, e);
                            if v > best.0 {
                                best = (v, Some(q));
                            }
                        }
                    }
                }
            }
            best
        })
        .reduce(
            || (0.0, None),
            |x, y| match (x.1, y.1) {
                (_, None) => x,
                (None, _) => y,
                _ if y.0 > x.0 => y,
                _ => x,
            },
        );
    let count = if n >= 4 {
        (n as u64) * (n as u64 - 1) * (n as u64 - 2) * (n as u64 - 3) / 24
    } else {
        0
    };
    let (delta, witness) = best;
    Ok(DeltaEstimate {
        delta,
        method: DeltaMethod::Exact,
        quadruples_examined: count,
        witness,
        edge_resolution: 0.5 * g.max_edge_length(),
        seed: None,
    })
}

/// Distance rows fetched on demand.
struct RowCache<'g> {
    g: &'g MetricGraph,
    dense: Option<DistanceMatrix>,
    rows: BTreeMap<usize, Vec<f64>>,
}

impl<'g> RowCache<'g> {
    fn new(g: &'g MetricGraph) -> Self {
        let dense = (g.len() <= SAMPLED_DENSE_LIMIT).then(|| g.all_pairs());
        Self { g, dense, rows: BTreeMap::new() }
    }

    fn get(&mut self, i: usize, j: usize) -> f64 {
        if let Some(d) = &self.dense {
            return d.get(i, j);
        }
        let g = self.g;
        self.rows
            .entry(i)
            .or_insert_with(|| g.distances_from(i).expect("valid vertex"))[j]
    }
}

/// Max four-point defect over `samples` uniformly drawn vertex quadruples.
///
/// Deterministic for a fixed seed and never exceeds [`delta_exact`].
pub fn delta_sampled(g: &MetricGraph, samples: u64, seed: u64) -> Result<DeltaEstimate> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let n = g.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cache = RowCache::new(g);
    let mut best = (0.0f64, None::<Quadruple>);
    for _ in 0..samples {
        let q: [usize; 4] = std::array::from_fn(|_| rng.gen_range(0..n));
        let [a, b, c, e] = q;
        let s = [
            (cache.get(a, b) + cache.get(c, e), Quadruple { x: a, z: b, p: c, y: e }),
            (cache.get(a, c) + cache.get(b, e), Quadruple { x: a, z: c, p: b, y: e }),
            (cache.get(a, e) + cache.get(b, c), Quadruple { x: a, z: e, p: b, y: c }),
        ];
        let mut sorted = s;
        sorted.sort_by(|x, y| y.0.total_cmp(&x.0));
        let defect = 0.5 * (sorted[0].0 - sorted[1].0);
        if defect > best.0 && defect > DEFECT_REL_TOL * sorted[0].0 {
            best = (defect, Some(sorted[0].1));
        }
    }
    let (delta, witness) = best;
    Ok(DeltaEstimate {
        delta,
        method: DeltaMethod::Sampled,
        quadruples_examined: samples,
        witness,
        edge_resolution: 0.5 * g.max_edge_length(),
        seed: Some(seed),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StarlikenessReport {
    #[serde(rename = "M")]
    pub m: f64,
    pub basepoint: usize,
    /// Each ray as its vertex sequence.
    pub ray_family: Vec<Vec<usize>>,
    pub worst_vertex: usize,
}

/// All deterministic shortest paths from `p` to the vertices of maximal
/// distance from `p`.
pub fn default_rays(g: &MetricGraph, p: usize) -> Result<Vec<Curve>> {
    let tree = g.shortest_path_tree(p, &g.edge_lengths())?;
    let depth = tree.dist.iter().copied().fold(0.0, f64::max);
    let tol = 1e-9 * (1.0 + depth);
    (0..g.len())
        .filter(|&v| tree.dist[v] >= depth - tol)
        .map(|v| tree.path_to(v))
        .collect()
}

/// `M = max_v min_γ dist(v, γ)` for the given family of rays from `p`.
pub fn estimate_starlikeness(g: &MetricGraph, p: usize, rays: &[Curve]) -> Result<StarlikenessReport> {
    let dp = g.distances_from(p)?;
    if rays.is_empty() {
        return Err(Error::InvalidParameter("empty ray family".into()));
    }
    let mut on_ray = vec![false; g.len()];
    for ray in rays {
        g.validate_curve(ray)?;
        if ray.start() != p {
            return Err(Error::InvalidCurve(format!("ray does not start at {}", g.label(p))));
        }
        let len = g.curve_length(ray)?;
        let want = dp[ray.end()];
        if (len - want).abs() > 1e-9 * (1.0 + want) {
            return Err(Error::InvalidCurve(format!(
                "ray to {} has length {len} but the distance is {want}",
                g.label(ray.end())
            )));
        }
        for &v in ray.vertices() {
            on_ray[v] = true;
        }
    }
    let dist = multi_source_distances(g, &on_ray);
    let (worst_vertex, m) = dist
        .iter()
        .copied()
        .enumerate()
        .fold((p, 0.0), |acc, (v, d)| if d > acc.1 { (v, d) } else { acc });
    Ok(StarlikenessReport {
        m,
        basepoint: p,
        ray_family: rays.iter().map(|r| r.vertices().to_vec()).collect(),
        worst_vertex,
    })
}

/// Distance from every vertex to the nearest marked vertex.
fn multi_source_distances(g: &MetricGraph, marked: &[bool]) -> Vec<f64> {
    use std::cmp::Reverse;
    use crate::uniformize::OrdF64;
    let mut dist = vec![f64::INFINITY; g.len()];
    let mut heap = std::collections::BinaryHeap::new();
    for (v, &m) in marked.iter().enumerate() {
        if m {
            dist[v] = 0.0;
            heap.push(Reverse((OrdF64(0.0), v)));
        }
    }
    while let Some(Reverse((OrdF64(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(w, e) in g.neighbors(u) {
            let cand = d + g.edges()[e].len;
            if cand < dist[w] {
                dist[w] = cand;
                heap.push(Reverse((OrdF64(cand), w)));
            }
        }
    }
    dist
}

/// `min_{n, m >= tail_from} (x_n | x_m)_p`.
pub fn gromov_sequence_defect(g: &MetricGraph, p: usize, seq: &[usize], tail_from: usize) -> Result<f64> {
    if seq.is_empty() {
        return Err(Error::InvalidParameter("empty sequence".into()));
    }
    if tail_from >= seq.len() {
        return Err(Error::OutOfRange(format!("tail index {tail_from} beyond sequence of length {}", seq.len())));
    }
    let dp = g.distances_from(p)?;
    let tail = &seq[tail_from..];
    let mut rows: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for &x in tail {
        if let std::collections::btree_map::Entry::Vacant(slot) = rows.entry(x) {
            slot.insert(g.distances_from(x)?);
        }
    }
    let mut best = f64::INFINITY;
    for (i, &x) in tail.iter().enumerate() {
        for &y in &tail[i..] {
            best = best.min(product_from(dp[x], dp[y], rows[&x][y]));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_graph(n: usize) -> MetricGraph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
        MetricGraph::from_indexed(n, &edges, Some(0)).unwrap()
    }

    fn star(arms: usize, len: usize) -> MetricGraph {
        let mut edges = Vec::new();
        let mut next = 1;
        for _ in 0..arms {
            let mut prev = 0;
            for _ in 0..len {
                edges.push((prev, next, 1.0));
                prev = next;
                next += 1;
            }
        }
        MetricGraph::from_indexed(next, &edges, Some(0)).unwrap()
    }

    #[test]
    fn product_examples() {
        // d(p,x)=3, d(p,y)=4, d(x,y)=5 realized by a right-angle corner.
        let g = MetricGraph::from_indexed(3, &[(0, 1, 3.0), (0, 2, 4.0), (1, 2, 5.0)], Some(0)).unwrap();
        assert_eq!(gromov_product(&g, 0, 1, 2).unwrap(), 1.0);
        assert_eq!(gromov_product(&g, 0, 0, 2).unwrap(), 0.0);
        assert_eq!(gromov_product(&g, 0, 1, 1).unwrap(), 3.0);
    }

    #[test]
    fn single_edge_and_cycle() {
        let e = MetricGraph::from_indexed(2, &[(0, 1, 1.0)], None).unwrap();
        assert_eq!(delta_exact(&e, DEFAULT_EXACT_CAP).unwrap().delta, 0.0);
        let c = MetricGraph::from_indexed(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)], None).unwrap();
        let est = delta_exact(&c, DEFAULT_EXACT_CAP).unwrap();
        assert_eq!(est.delta, 1.0);
        let w = est.witness.unwrap();
        let prod = |a, b| gromov_product(&c, w.p, a, b).unwrap();
        assert_eq!(prod(w.x, w.y).min(prod(w.y, w.z)) - prod(w.x, w.z), 1.0);
    }

    #[test]
    fn cap_refusal() {
        assert!(matches!(delta_exact(&path_graph(10), 5), Err(Error::Refused(_))));
    }

    #[test]
    fn sampled_is_deterministic() {
        let c = MetricGraph::from_indexed(6, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 5, 1.0), (5, 0, 1.0)], None).unwrap();
        let a = delta_sampled(&c, 200, 9).unwrap();
        let b = delta_sampled(&c, 200, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.delta <= delta_exact(&c, 300).unwrap().delta);
        assert_eq!(delta_sampled(&star(3, 3), 500, 1).unwrap().delta, 0.0);
        assert!(delta_sampled(&c, 0, 1).is_err());
    }

    #[test]
    fn starlike_trivial_families() {
        let g = path_graph(5);
        let rays = default_rays(&g, 0).unwrap();
        assert_eq!(rays.len(), 1);
        assert_eq!(estimate_starlikeness(&g, 0, &rays).unwrap().m, 0.0);
        let s = star(4, 3);
        let rays = default_rays(&s, 0).unwrap();
        assert_eq!(rays.len(), 4);
        assert_eq!(estimate_starlikeness(&s, 0, &rays).unwrap().m, 0.0);
        let one = &rays[..1];
        let r = estimate_starlikeness(&s, 0, one).unwrap();
        assert_eq!(r.m, 3.0);
        assert!(estimate_starlikeness(&s, 1, &rays).is_err());
    }

    #[test]
    fn sequence_defects() {
        let g = path_graph(8);
        assert_eq!(gromov_sequence_defect(&g, 0, &[5, 5, 5], 0).unwrap(), 5.0);
        let ray: Vec<usize> = (0..8).collect();
        for k in 0..8 {
            assert_eq!(gromov_sequence_defect(&g, 0, &ray, k).unwrap(), k as f64);
        }
        assert!(gromov_sequence_defect(&g, 0, &ray, 8).is_err());
        assert!(gromov_sequence_defect(&g, 0, &[], 0).is_err());
    }
}

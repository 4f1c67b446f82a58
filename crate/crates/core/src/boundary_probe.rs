//! Ray-family partitions comparing the Gromov boundary with the metric
//! boundary of the uniformized graph.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Curve, MetricGraph};
use crate::hyperbolicity::{delta_exact, delta_sampled, product_from, DeltaEstimate, DEFAULT_EXACT_CAP};
use crate::uniformize::{radial_tail, ConformalGraph};

/// Quadruples drawn when the graph is too large for the exact four-point scan.
pub const DEFAULT_DELTA_SAMPLES: u64 = 200_000;

/// Threshold multipliers reported in every sensitivity table.
pub const SENSITIVITY_FACTORS: [f64; 3] = [0.5, 1.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RaySampling {
    /// Seeded uniform sample of the deepest vertices.
    #[default]
    Uniform,
    /// Farthest-point traversal of the deepest vertices from a seeded start.
    Spread,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RayFamily {
    pub basepoint: usize,
    /// Common length `N` of every ray.
    pub depth: f64,
    pub sampling: RaySampling,
    pub seed: u64,
    /// Each ray as its vertex sequence from the basepoint.
    #[serde(with = "curves")]
    pub rays: Vec<Curve>,
}

mod curves {
    use super::Curve;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &[Curve], s: S) -> Result<S::Ok, S::Error> {
        c.iter().map(|c| c.vertices().to_vec()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Curve>, D::Error> {
        let v: Vec<Vec<usize>> = Vec::deserialize(d)?;
        if v.iter().any(Vec::is_empty) {
            return Err(serde::de::Error::custom("empty ray"));
        }
        Ok(v.into_iter().map(Curve::new).collect())
    }
}

impl RayFamily {
    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn endpoints(&self) -> Vec<usize> {
        self.rays.iter().map(Curve::end).collect()
    }
}

fn deepest(dist: &[f64]) -> (f64, Vec<usize>) {
    let depth = dist.iter().copied().fold(0.0, f64::max);
    let tol = 1e-9 * (1.0 + depth);
    (depth, (0..dist.len()).filter(|&v| dist[v] >= depth - tol).collect())
}

/// Shortest paths from `p` to a seeded uniform sample of the deepest vertices.
pub fn sample_rays(g: &MetricGraph, p: usize, max_rays: usize, seed: u64) -> Result<RayFamily> {
    sample_rays_with(g, p, max_rays, seed, RaySampling::Uniform)
}

pub fn sample_rays_with(
    g: &MetricGraph,
    p: usize,
    max_rays: usize,
    seed: u64,
    sampling: RaySampling,
) -> Result<RayFamily> {
    if p >= g.len() {
        return Err(Error::UnknownVertex(p.into()));
    }
    if max_rays == 0 {
        return Err(Error::InvalidParameter("maxRays must be at least 1".into()));
    }
    let tree = g.shortest_path_tree(p, &g.edge_lengths())?;
    let (depth, pool) = deepest(&tree.dist);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = match sampling {
        RaySampling::Uniform => {
            let mut c: Vec<usize> = pool.choose_multiple(&mut rng, max_rays).copied().collect();
            c.sort_unstable();
            c
        }
        RaySampling::Spread => spread(g, &pool, max_rays, rng.gen_range(0..pool.len()))?,
    };
    chosen.dedup();
    let rays = chosen.iter().map(|&v| tree.path_to(v)).collect::<Result<_>>()?;
    Ok(RayFamily { basepoint: p, depth, sampling, seed, rays })
}

/// Farthest-point traversal of `pool`, started from the pool vertex farthest
/// from `pool[start]`; ties go to the smaller index.
fn spread(g: &MetricGraph, pool: &[usize], count: usize, start: usize) -> Result<Vec<usize>> {
    let farthest = |d: &[f64], exclude: &[usize]| {
        pool.iter()
            .copied()
            .filter(|v| !exclude.contains(v))
            .fold(None, |best: Option<usize>, v| match best {
                Some(b) if d[b] >= d[v] => Some(b),
                _ => Some(v),
            })
    };
    let from_start = g.distances_from(pool[start])?;
    let first = farthest(&from_start, &[]).expect("nonempty pool");
    let mut chosen = vec![first];
    let mut gap = g.distances_from(first)?;
    while chosen.len() < count.min(pool.len()) {
        let Some(next) = farthest(&gap, &chosen) else { break };
        chosen.push(next);
        let d = g.distances_from(next)?;
        gap.iter_mut().zip(&d).for_each(|(a, &b)| *a = a.min(b));
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Equivalence classes of ray indices after transitive closure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Partition {
    pub threshold: f64,
    /// Classes sorted by smallest member, members ascending.
    pub classes: Vec<Vec<usize>>,
    /// Unordered pairs related directly by the threshold test.
    pub direct_pairs: u64,
    /// Unordered pairs related only through closure.
    pub closure_pairs: u64,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

impl Partition {
    /// Close the symmetric relation `related` over `0..n`.
    pub fn from_relation(n: usize, threshold: f64, related: impl Fn(usize, usize) -> bool) -> Self {
        let mut uf = UnionFind((0..n).collect());
        let mut direct = 0u64;
        for i in 0..n {
            for j in (i + 1)..n {
                if related(i, j) {
                    direct += 1;
                    uf.union(i, j);
                }
            }
        }
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for i in 0..n {
            let r = uf.find(i);
            if slot[r] == usize::MAX {
                slot[r] = classes.len();
                classes.push(Vec::new());
            }
            classes[slot[r]].push(i);
        }
        let total: u64 = classes.iter().map(|c| (c.len() * (c.len() - 1) / 2) as u64).sum();
        Self { threshold, classes, direct_pairs: direct, closure_pairs: total - direct }
    }

    pub fn size(&self) -> usize {
        self.classes.len()
    }

    pub fn element_count(&self) -> usize {
        self.classes.iter().map(Vec::len).sum()
    }

    /// Class index of every element.
    pub fn labels(&self) -> Vec<usize> {
        let mut out = vec![0; self.element_count()];
        for (k, c) in self.classes.iter().enumerate() {
            for &i in c {
                out[i] = k;
            }
        }
        out
    }

    /// Every class of `self` lies inside a class of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        let theirs = other.labels();
        self.classes.iter().all(|c| c.iter().all(|&i| theirs[i] == theirs[c[0]]))
    }
}

/// Products `(γ_i(N) | γ_j(N))_p` for all ray pairs.
pub fn endpoint_products(g: &MetricGraph, family: &RayFamily) -> Result<Vec<Vec<f64>>> {
    let ends = family.endpoints();
    let dp = g.distances_from(family.basepoint)?;
    ends.par_iter()
        .map(|&x| {
            let dx = g.distances_from(x)?;
            Ok(ends.iter().map(|&y| product_from(dp[x], dp[y], dx[y])).collect())
        })
        .collect()
}

/// `d_ε(γ_i(N), γ_j(N))` for all ray pairs.
pub fn endpoint_distances(cg: &ConformalGraph, family: &RayFamily) -> Result<Vec<Vec<f64>>> {
    let ends = family.endpoints();
    ends.par_iter()
        .map(|&x| {
            let dx = cg.distances_from(x)?;
            Ok(ends.iter().map(|&y| dx[y]).collect())
        })
        .collect()
}

/// Default Gromov threshold `N - 2δ̂`.
pub fn default_gromov_threshold(depth: f64, delta_hat: f64) -> f64 {
    depth - 2.0 * delta_hat
}

/// Four radial tails `4e^{-εN}/ε`.
pub fn tail_metric_threshold(epsilon: f64, depth: f64) -> f64 {
    4.0 * radial_tail(epsilon, depth)
}

/// Default metric threshold: the `d_ε`-length `2(e^{-εT} - e^{-εN})/ε` of
/// a path that descends from depth `N` to depth `T = T_G` and climbs back,
/// i.e. of the geodesic between two endpoints whose product is exactly
/// `T_G` on a tree.
pub fn paired_metric_threshold(epsilon: f64, depth: f64, t_g: f64) -> f64 {
    let t = t_g.clamp(0.0, depth);
    2.0 * (radial_tail(epsilon, t) - radial_tail(epsilon, depth)).max(0.0)
}

fn check_family(n: usize, family: &RayFamily) -> Result<()> {
    if n != family.len() {
        return Err(Error::InvalidParameter(format!(
            "partition covers {n} rays but the family has {}",
            family.len()
        )));
    }
    Ok(())
}

pub fn partition_from_products(products: &[Vec<f64>], t_g: f64) -> Partition {
    Partition::from_relation(products.len(), t_g, |i, j| products[i][j] >= t_g)
}

pub fn partition_from_distances(dist: &[Vec<f64>], t_m: f64) -> Partition {
    Partition::from_relation(dist.len(), t_m, |i, j| dist[i][j] <= t_m)
}

/// Relate rays whose endpoint product is at least `t_g`, then close.
pub fn gromov_equivalence_partition(g: &MetricGraph, family: &RayFamily, t_g: f64) -> Result<Partition> {
    Ok(partition_from_products(&endpoint_products(g, family)?, t_g))
}

/// Relate rays whose endpoints are within `t_m` in `d_ε`, then close.
pub fn metric_limit_partition(cg: &ConformalGraph, family: &RayFamily, t_m: f64) -> Result<Partition> {
    if cg.basepoint() != family.basepoint {
        return Err(Error::InvalidParameter("ray family and conformal graph use different basepoints".into()));
    }
    Ok(partition_from_distances(&endpoint_distances(cg, family)?, t_m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Refinement {
    Equal,
    /// Every Gromov class sits inside one metric class.
    MetricCoarser,
    GromovCoarser,
    Incomparable,
}

fn refinement(g: &Partition, m: &Partition) -> Refinement {
    match (g.refines(m), m.refines(g)) {
        (true, true) => Refinement::Equal,
        (true, false) => Refinement::MetricCoarser,
        (false, true) => Refinement::GromovCoarser,
        (false, false) => Refinement::Incomparable,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SensitivityRow {
    pub factor: f64,
    pub gromov_threshold: f64,
    pub gromov_classes: usize,
    pub metric_threshold: f64,
    pub metric_classes: usize,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundaryPartition {
    pub depth: f64,
    pub rays: usize,
    pub gromov_threshold: f64,
    pub metric_threshold: f64,
    pub gromov_partition: Partition,
    pub metric_partition: Partition,
    pub agree: bool,
    pub refinement: Refinement,
    /// Empty unless produced by [`probe`].
    pub sensitivity: Vec<SensitivityRow>,
}

pub fn compare_partitions(family: &RayFamily, g_part: &Partition, m_part: &Partition) -> Result<BoundaryPartition> {
    check_family(g_part.element_count(), family)?;
    check_family(m_part.element_count(), family)?;
    let rel = refinement(g_part, m_part);
    Ok(BoundaryPartition {
        depth: family.depth,
        rays: family.len(),
        gromov_threshold: g_part.threshold,
        metric_threshold: m_part.threshold,
        gromov_partition: g_part.clone(),
        metric_partition: m_part.clone(),
        agree: rel == Refinement::Equal,
        refinement: rel,
        sensitivity: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbeConfig {
    pub epsilon: f64,
    pub max_rays: usize,
    pub seed: u64,
    pub sampling: RaySampling,
    pub gromov_threshold: Option<f64>,
    pub metric_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbeReport {
    pub config: ProbeConfig,
    pub delta: DeltaEstimate,
    pub family: RayFamily,
    pub partition: BoundaryPartition,
    /// Thresholds are finite-depth heuristics, not limits.
    pub threshold_note: String,
}

/// δ̂: exact scan when small enough, otherwise sampled.
pub fn measured_delta(g: &MetricGraph, seed: u64) -> Result<DeltaEstimate> {
    if g.len() <= DEFAULT_EXACT_CAP {
        delta_exact(g, DEFAULT_EXACT_CAP)
    } else {
        delta_sampled(g, DEFAULT_DELTA_SAMPLES, seed)
    }
}

/// Sample rays from the conformal basepoint, build both partitions with
/// default or given thresholds, compare, and tabulate the sensitivity.
pub fn probe(cg: &ConformalGraph, config: ProbeConfig) -> Result<ProbeReport> {
    let g = cg.graph();
    let family = sample_rays_with(g, cg.basepoint(), config.max_rays, config.seed, config.sampling)?;
    let delta = measured_delta(g, config.seed)?;
    let n = family.depth;
    let t_g = config.gromov_threshold.unwrap_or_else(|| default_gromov_threshold(n, delta.delta));
    let t_m = config.metric_threshold.unwrap_or_else(|| paired_metric_threshold(cg.epsilon(), n, t_g));
    let products = endpoint_products(g, &family)?;
    let dist = endpoint_distances(cg, &family)?;
    let gp = partition_from_products(&products, t_g);
    let mp = partition_from_distances(&dist, t_m);
    let mut partition = compare_partitions(&family, &gp, &mp)?;
    partition.sensitivity = SENSITIVITY_FACTORS
        .iter()
        .map(|&f| {
            let a = partition_from_products(&products, f * t_g);
            let b = partition_from_distances(&dist, f * t_m);
            SensitivityRow {
                factor: f,
                gromov_threshold: f * t_g,
                gromov_classes: a.size(),
                metric_threshold: f * t_m,
                metric_classes: b.size(),
                agree: refinement(&a, &b) == Refinement::Equal,
            }
        })
        .collect();
    Ok(ProbeReport {
        config,
        delta,
        family,
        partition,
        threshold_note: "finite-depth heuristic thresholds; default T_G = N - 2*delta, default T_M = 2(e^{-eps T_G} - e^{-eps N})/eps".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{binary_tree, path, star};

    #[test]
    fn path_graph_has_one_ray() {
        let g = path(5).unwrap();
        let f = sample_rays(&g, 0, 10, 0).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.rays[0].vertices(), &[0, 1, 2, 3, 4]);
        let cg = ConformalGraph::with_epsilon(&g, 1.0).unwrap();
        let m = metric_limit_partition(&cg, &f, 0.0).unwrap();
        assert_eq!(m.size(), 1);
        assert!(sample_rays(&g, 9, 1, 0).is_err());
    }

    #[test]
    fn binary_tree_rays_distinct() {
        let g = binary_tree(5).unwrap();
        let f = sample_rays(&g, 0, 100, 3).unwrap();
        assert_eq!(f.len(), 32);
        let mut e = f.endpoints();
        e.dedup();
        assert_eq!(e.len(), 32);
        assert_eq!(sample_rays(&g, 0, 7, 3).unwrap().len(), 7);
    }

    #[test]
    fn tree_products_are_prefix_lengths() {
        let g = binary_tree(4).unwrap();
        let f = sample_rays(&g, 0, 16, 0).unwrap();
        let p = endpoint_products(&g, &f).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let prefix = f.rays[i].vertices().iter().zip(f.rays[j].vertices()).take_while(|(a, b)| a == b).count() - 1;
                assert_eq!(p[i][j], prefix as f64);
            }
        }
        for j0 in 0..=4 {
            let part = partition_from_products(&p, j0 as f64);
            assert_eq!(part.size(), 1 << j0);
        }
    }

    #[test]
    fn star_arms_split() {
        let g = star(3, 2).unwrap();
        let f = sample_rays(&g, 0, 3, 0).unwrap();
        let part = gromov_equivalence_partition(&g, &f, 0.5).unwrap();
        assert_eq!(part.size(), 3);
        assert_eq!(part.closure_pairs, 0);
    }

    #[test]
    fn closure_counts() {
        let p = Partition::from_relation(4, 0.0, |i, j| j == i + 1);
        assert_eq!(p.size(), 1);
        assert_eq!(p.direct_pairs, 3);
        assert_eq!(p.closure_pairs, 3);
    }

    #[test]
    fn refinement_relation() {
        let fine = Partition::from_relation(3, 0.0, |_, _| false);
        let coarse = Partition::from_relation(3, 0.0, |_, _| true);
        assert_eq!(refinement(&fine, &coarse), Refinement::MetricCoarser);
        assert_eq!(refinement(&coarse, &fine), Refinement::GromovCoarser);
        assert_eq!(refinement(&fine, &fine), Refinement::Equal);
        let a = Partition::from_relation(3, 0.0, |i, j| (i, j) == (0, 1));
        let b = Partition::from_relation(3, 0.0, |i, j| (i, j) == (1, 2));
        assert_eq!(refinement(&a, &b), Refinement::Incomparable);
    }

    #[test]
    fn mismatched_family_rejected() {
        let g = binary_tree(2).unwrap();
        let f = sample_rays(&g, 0, 4, 0).unwrap();
        let p = Partition::from_relation(3, 0.0, |_, _| false);
        assert!(compare_partitions(&f, &p, &p).is_err());
    }

    #[test]
    fn spread_picks_far_endpoints() {
        let g = crate::corpus::path(9).unwrap().with_basepoint(4).unwrap();
        let f = sample_rays_with(&g, 4, 2, 11, RaySampling::Spread).unwrap();
        assert_eq!(f.endpoints(), vec![0, 8]);
    }
}

//! Gehring–Hayman ratios, uniform-curve certificates, collapse slopes,
//! critical-exponent bisection and the metric scaling check.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filling::Filling;
use crate::graph::{Curve, MetricGraph, ShortestPathTree};
use crate::uniformize::{group_pairs, ConformalGraph, QuasiHyperbolicGraph};

/// Upper edges of the ratio histogram bins; the last bin is open.
pub const HISTOGRAM_EDGES: [f64; 8] = [1.01, 1.1, 1.5, 2.0, 5.0, 10.0, 100.0, f64::INFINITY];

/// One examined pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PairRatio {
    pub x: usize,
    pub y: usize,
    /// `d(x, y)`.
    pub distance: f64,
    /// `d_ε(x, y)`.
    pub uniformized_distance: f64,
    /// `l_{d_ε}` of the deterministic `d`-geodesic.
    pub geodesic_length: f64,
    pub ratio: f64,
}

impl PairRatio {
    /// The local bound `e^{2εM}` with `M = d(x, y)`.
    pub fn local_bound(&self, epsilon: f64) -> f64 {
        (2.0 * epsilon * self.distance).exp()
    }
}

/// `d_ε`-lengths along every branch of a `d`-shortest-path tree.
fn tree_conformal_lengths(cg: &ConformalGraph, tree: &ShortestPathTree) -> Vec<f64> {
    let g = cg.graph();
    let w = cg.conformal_lengths();
    let mut out = vec![f64::NAN; g.len()];
    out[tree.source] = 0.0;
    let mut stack = Vec::new();
    for v in 0..g.len() {
        let mut u = v;
        while out[u].is_nan() {
            stack.push(u);
            u = tree.pred[u].expect("connected graph");
        }
        while let Some(t) = stack.pop() {
            let p = tree.pred[t].expect("non-root");
            let e = g.edge_between(p, t).expect("tree edge");
            out[t] = out[p] + w[e];
        }
    }
    out
}

/// Ratios for every target from one source: two Dijkstra runs.
fn ratios_from(cg: &ConformalGraph, x: usize, targets: &[usize]) -> Result<Vec<PairRatio>> {
    let g = cg.graph();
    let tree = g.shortest_path_tree(x, &g.edge_lengths())?;
    let along = tree_conformal_lengths(cg, &tree);
    let de = cg.distances_from(x)?;
    Ok(targets
        .iter()
        .map(|&y| PairRatio {
            x,
            y,
            distance: tree.dist[y],
            uniformized_distance: de[y],
            geodesic_length: along[y],
            ratio: along[y] / de[y],
        })
        .collect())
}

/// `l_{d_ε}([x, y]) / d_ε(x, y)` for the deterministic geodesic `[x, y]`.
pub fn gh_ratio(cg: &ConformalGraph, x: usize, y: usize) -> Result<f64> {
    gh_pair(cg, x, y).map(|p| p.ratio)
}

pub fn gh_pair(cg: &ConformalGraph, x: usize, y: usize) -> Result<PairRatio> {
    if y >= cg.graph().len() {
        return Err(Error::UnknownVertex(y.into()));
    }
    if x == y {
        return Err(Error::InvalidParameter("the ratio is undefined for x = y".into()));
    }
    Ok(ratios_from(cg, x, &[y])?[0])
}

/// Largest ratio over *all* `d`-geodesics between `x` and `y`.
///
/// The geodesics form a DAG of tight edges; the longest conformal path in it
/// is found by dynamic programming over vertices in order of `d(x, ·)`.
pub fn max_ratio_over_geodesics(cg: &ConformalGraph, x: usize, y: usize) -> Result<f64> {
    if x == y {
        return Err(Error::InvalidParameter("the ratio is undefined for x = y".into()));
    }
    let g = cg.graph();
    let from_x = g.distances_from(x)?;
    let from_y = g.distances_from(y)?;
    let total = from_x[y];
    let tol = 1e-12 * (1.0 + total);
    let on = |v: usize| (from_x[v] + from_y[v] - total).abs() <= tol;
    let mut order: Vec<usize> = (0..g.len()).filter(|&v| on(v)).collect();
    order.sort_by(|&a, &b| from_x[a].total_cmp(&from_x[b]).then(a.cmp(&b)));
    let w = cg.conformal_lengths();
    let mut best = vec![f64::NEG_INFINITY; g.len()];
    best[x] = 0.0;
    for &u in &order {
        if best[u] == f64::NEG_INFINITY {
            continue;
        }
        for &(v, e) in g.neighbors(u) {
            let len = g.edges()[e].len;
            if on(v) && (from_x[u] + len - from_x[v]).abs() <= tol {
                best[v] = best[v].max(best[u] + w[e]);
            }
        }
    }
    Ok(best[y] / cg.uniformized_distance(x, y)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

fn histogram(ratios: impl Iterator<Item = f64>) -> Vec<HistogramBin> {
    let mut bins: Vec<HistogramBin> = HISTOGRAM_EDGES
        .iter()
        .scan(1.0, |lo, &hi| {
            let b = HistogramBin { lo: *lo, hi, count: 0 };
            *lo = hi;
            Some(b)
        })
        .collect();
    for r in ratios {
        let i = HISTOGRAM_EDGES.iter().position(|&hi| r < hi).unwrap_or(bins.len() - 1);
        bins[i].count += 1;
    }
    bins
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LocalBoundCheck {
    pub pairs_checked: u64,
    /// Pairs with `ratio > e^{2ε d(x,y)}`.
    pub violations: u64,
    /// Max of `ratio / e^{2ε d(x,y)}`.
    pub worst_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GhReport {
    pub epsilon: f64,
    pub truncation_depth: f64,
    pub seed: u64,
    pub exhaustive: bool,
    pub pairs_examined: u64,
    pub max_ratio: f64,
    pub argmax_pair: Option<(usize, usize)>,
    pub min_ratio: f64,
    pub ratio_histogram: Vec<HistogramBin>,
    pub local_bound_checked: LocalBoundCheck,
    pub deep_pairs_examined: u64,
    pub deep_max_ratio: f64,
}

fn sample_pairs(pool: &[usize], budget: usize, rng: &mut ChaCha8Rng) -> (Vec<(usize, usize)>, bool) {
    let n = pool.len();
    let all = n * n.saturating_sub(1) / 2;
    if all <= budget {
        let mut out = Vec::with_capacity(all);
        for i in 0..n {
            for j in (i + 1)..n {
                out.push((pool[i], pool[j]));
            }
        }
        return (out, true);
    }
    let mut out = Vec::with_capacity(budget);
    while out.len() < budget {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i != j {
            out.push((pool[i], pool[j]));
        }
    }
    (out, false)
}

/// Evaluate ratios for a batch of pairs, one source per parallel task.
pub fn evaluate_pairs(cg: &ConformalGraph, pairs: &[(usize, usize)]) -> Result<Vec<PairRatio>> {
    let grouped: Vec<(usize, Vec<usize>)> = group_pairs(cg.graph(), pairs)?.into_iter().collect();
    let chunks: Result<Vec<Vec<PairRatio>>> =
        grouped.par_iter().map(|(x, ys)| ratios_from(cg, *x, ys)).collect();
    Ok(chunks?.into_iter().flatten().collect())
}

/// Vertices within one longest edge of the truncation depth (for fillings,
/// the two deepest levels).
pub fn deep_vertices(cg: &ConformalGraph) -> Vec<usize> {
    let depth = cg.truncation_depth();
    let cut = depth - cg.graph().max_edge_length() - 1e-9 * (1.0 + depth);
    (0..cg.graph().len()).filter(|&v| cg.radial()[v] >= cut).collect()
}

/// Ratios over all pairs (or a seeded sample of `pair_budget`), plus an
/// oversampled set of deep pairs.
pub fn gh_sweep(cg: &ConformalGraph, pair_budget: usize, seed: u64) -> Result<GhReport> {
    if pair_budget == 0 {
        return Err(Error::InvalidParameter("pair budget must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let everyone: Vec<usize> = (0..cg.graph().len()).collect();
    let (pairs, exhaustive) = sample_pairs(&everyone, pair_budget, &mut rng);
    let (deep, _) = sample_pairs(&deep_vertices(cg), pair_budget, &mut rng);
    let main = evaluate_pairs(cg, &pairs)?;
    let deep = evaluate_pairs(cg, &deep)?;
    let eps = cg.epsilon();

    let mut max_ratio = f64::NEG_INFINITY;
    let mut min_ratio = f64::INFINITY;
    let mut argmax = None;
    let mut local = LocalBoundCheck { pairs_checked: 0, violations: 0, worst_fraction: 0.0 };
    for p in main.iter().chain(&deep) {
        if p.ratio > max_ratio || (p.ratio == max_ratio && Some((p.x, p.y)) < argmax) {
            max_ratio = p.ratio;
            argmax = Some((p.x, p.y));
        }
        min_ratio = min_ratio.min(p.ratio);
        let frac = p.ratio / p.local_bound(eps);
        local.pairs_checked += 1;
        local.worst_fraction = local.worst_fraction.max(frac);
        if frac > 1.0 {
            local.violations += 1;
        }
    }
    let deep_max = deep.iter().map(|p| p.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(GhReport {
        epsilon: eps,
        truncation_depth: cg.truncation_depth(),
        seed,
        exhaustive,
        pairs_examined: main.len() as u64,
        max_ratio: if argmax.is_some() { max_ratio } else { 1.0 },
        argmax_pair: argmax,
        min_ratio: if argmax.is_some() { min_ratio } else { 1.0 },
        ratio_histogram: histogram(main.iter().chain(&deep).map(|p| p.ratio)),
        local_bound_checked: local,
        deep_pairs_examined: deep.len() as u64,
        deep_max_ratio: if deep.is_empty() { 1.0 } else { deep_max },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct UniformityCertificate {
    pub curve: Vec<usize>,
    /// `l_{d_ε}(γ) / d_ε(γ(a), γ(b))`.
    pub condition_one_constant: f64,
    /// Max over curve vertices of `min(l before, l after) / d_ε(v)`.
    pub condition_two_constant: f64,
    #[serde(rename = "A")]
    pub a: f64,
    /// Longest conformal edge on the curve: condition (2) is only sampled at
    /// vertices, and interior points can differ by this much in length.
    pub vertex_resolution: f64,
    pub valid: bool,
}

/// Evaluate both uniform-curve constants of `c`.
pub fn certify_uniform_curve(qg: &QuasiHyperbolicGraph, c: &Curve) -> Result<UniformityCertificate> {
    let cg = qg.conformal();
    cg.graph().validate_curve(c)?;
    if c.start() == c.end() && !c.has_offsets() {
        return Err(Error::InvalidCurve("curve endpoints coincide; condition (1) is undefined".into()));
    }
    let prefix = cg.prefix_lengths(c)?;
    let total = *prefix.last().expect("nonempty");
    let ends = cg.uniformized_distance(c.start(), c.end())?;
    let one = total / ends;
    let bd = qg.boundary_distances();
    let mut two = 0.0f64;
    for (i, &v) in c.vertices().iter().enumerate() {
        let side = prefix[i].min(total - prefix[i]);
        two = two.max(side / bd[v]);
    }
    let resolution = c
        .vertices()
        .windows(2)
        .map(|w| cg.conformal_lengths()[cg.graph().edge_between(w[0], w[1]).expect("validated")])
        .fold(0.0, f64::max);
    let a = one.max(two);
    Ok(UniformityCertificate {
        curve: c.vertices().to_vec(),
        condition_one_constant: one,
        condition_two_constant: two,
        a,
        vertex_resolution: resolution,
        valid: one.is_finite() && two.is_finite(),
    })
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Slope of `log(level sphere d_ε-diameter)` against the level index.
///
/// Only levels with at least two vertices enter the fit. Returns `-∞` when
/// no level in range has two vertices (every sphere is a point).
pub fn collapse_slope(f: &Filling, epsilon: f64, levels: Option<RangeInclusive<usize>>) -> Result<f64> {
    let levels = levels.unwrap_or(0..=f.depth());
    if *levels.end() > f.depth() {
        return Err(Error::OutOfRange(format!("level {} exceeds depth {}", levels.end(), f.depth())));
    }
    let cg = f.uniformize(epsilon)?;
    let used: Vec<usize> = levels.filter(|&n| f.levels()[n].len() >= 2).collect();
    if used.is_empty() {
        return Ok(f64::NEG_INFINITY);
    }
    if used.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "collapse slope needs three levels with two or more vertices, found {}",
            used.len()
        )));
    }
    let diam: Result<Vec<f64>> = used.iter().map(|&n| f.level_sphere_diameter(&cg, n)).collect();
    let xs: Vec<f64> = used.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = diam?.into_iter().map(f64::ln).collect();
    Ok(least_squares_slope(&xs, &ys))
}

/// A family of spaces indexed by truncation depth whose collapse slope
/// changes sign at the critical exponent.
pub trait CollapseFamily: Sync {
    fn name(&self) -> String;
    /// Ascending truncation depths; the last one drives the estimate.
    fn depths(&self) -> Vec<usize>;
    fn collapse_slope(&self, epsilon: f64, depth: usize) -> Result<f64>;
    fn max_gh_ratio(&self, _epsilon: f64, _depth: usize) -> Result<Option<f64>> {
        Ok(None)
    }
}

/// Fillings of one base space at several depths.
pub struct FillingFamily {
    fillings: Vec<Filling>,
    alpha: f64,
    pair_budget: usize,
}

impl FillingFamily {
    pub fn new(space: &crate::metric::FiniteMetricSpace, alpha: f64, tau: f64, seed: u64, depths: &[usize]) -> Result<Self> {
        let fillings = depths
            .iter()
            .map(|&d| Filling::build(space, crate::filling::FillingParams::new(alpha, tau, d, seed)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { fillings, alpha, pair_budget: 20_000 })
    }

    pub fn with_pair_budget(mut self, budget: usize) -> Self {
        self.pair_budget = budget;
        self
    }

    fn at(&self, depth: usize) -> Result<&Filling> {
        self.fillings
            .iter()
            .find(|f| f.depth() == depth)
            .ok_or_else(|| Error::OutOfRange(format!("depth {depth} not in family")))
    }
}

impl CollapseFamily for FillingFamily {
    fn name(&self) -> String {
        format!("filling(alpha={})", self.alpha)
    }

    fn depths(&self) -> Vec<usize> {
        self.fillings.iter().map(Filling::depth).collect()
    }

    fn collapse_slope(&self, epsilon: f64, depth: usize) -> Result<f64> {
        collapse_slope(self.at(depth)?, epsilon, None)
    }

    fn max_gh_ratio(&self, epsilon: f64, depth: usize) -> Result<Option<f64>> {
        let cg = self.at(depth)?.uniformize(epsilon)?;
        Ok(Some(gh_sweep(&cg, self.pair_budget, 0)?.max_ratio))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepPoint {
    pub epsilon: f64,
    pub depth: usize,
    pub collapse_slope: f64,
    pub max_gh_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Bracket {
    pub depth: usize,
    pub lo: f64,
    pub hi: f64,
    pub width: f64,
    pub estimate: f64,
    pub slope_at_lo: f64,
    pub slope_at_hi: f64,
    pub evaluations: usize,
}

impl Bracket {
    /// Whether `value` lies within `margin` of the bracket.
    pub fn contains_within(&self, value: f64, margin: f64) -> bool {
        self.lo - margin <= value && value <= self.hi + margin
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CriticalExponentEstimate {
    pub family: String,
    pub method: String,
    pub tolerance: f64,
    pub sweep: Vec<SweepPoint>,
    /// Bracket at the deepest truncation.
    pub estimate: Bracket,
    pub per_depth: Vec<Bracket>,
    /// Each deeper bracket lies within the previous one widened by twice
    /// its width.
    pub nested: bool,
}

/// Bisection on the sign of the collapse slope at one depth.
pub fn bisect_slope_sign(family: &dyn CollapseFamily, depth: usize, lo: f64, hi: f64, tol: f64) -> Result<Bracket> {
    if !(lo > 0.0 && hi > lo && tol > 0.0) {
        return Err(Error::InvalidParameter(format!("need 0 < lo < hi and tol > 0, got {lo}:{hi} tol {tol}")));
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut s_lo = family.collapse_slope(lo, depth)?;
    let mut s_hi = family.collapse_slope(hi, depth)?;
    let mut evaluations = 2;
    if !(s_lo >= 0.0 && s_hi < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "no sign change of the collapse slope on [{lo}, {hi}] at depth {depth} (slopes {s_lo}, {s_hi})"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let s = family.collapse_slope(mid, depth)?;
        evaluations += 1;
        if s >= 0.0 {
            lo = mid;
            s_lo = s;
        } else {
            hi = mid;
            s_hi = s;
        }
    }
    Ok(Bracket {
        depth,
        lo,
        hi,
        width: hi - lo,
        estimate: 0.5 * (lo + hi),
        slope_at_lo: s_lo,
        slope_at_hi: s_hi,
        evaluations,
    })
}

/// Sweep a grid of `grid_points` values over `[lo, hi]` at every depth, then
/// bisect the slope sign at every depth down to `tol`.
pub fn estimate_critical_exponent(
    family: &dyn CollapseFamily,
    lo: f64,
    hi: f64,
    tol: f64,
    grid_points: usize,
) -> Result<CriticalExponentEstimate> {
    let depths = family.depths();
    if depths.is_empty() {
        return Err(Error::InvalidParameter("family has no depths".into()));
    }
    let mut sweep = Vec::new();
    for &depth in &depths {
        for i in 0..grid_points {
            let eps = if grid_points == 1 { lo } else { lo + (hi - lo) * i as f64 / (grid_points - 1) as f64 };
            sweep.push(SweepPoint {
                epsilon: eps,
                depth,
                collapse_slope: family.collapse_slope(eps, depth)?,
                max_gh_ratio: family.max_gh_ratio(eps, depth)?,
            });
        }
    }
    let per_depth: Vec<Bracket> = depths
        .iter()
        .map(|&d| bisect_slope_sign(family, d, lo, hi, tol))
        .collect::<Result<_>>()?;
    let nested = per_depth.windows(2).all(|w| {
        let slack = 2.0 * w[1].width;
        w[1].lo >= w[0].lo - slack && w[1].hi <= w[0].hi + slack
    });
    Ok(CriticalExponentEstimate {
        family: family.name(),
        method: "slope-sign bisection".into(),
        tolerance: tol,
        sweep,
        estimate: per_depth.last().expect("nonempty").clone(),
        per_depth,
        nested,
    })
}

/// `K` and `ε` for comparing `(X, d, ε)` with `(X, Kd, ε/K)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingCheckParams {
    pub k: f64,
    pub epsilon: f64,
}

impl ScalingCheckParams {
    pub fn new(k: f64, epsilon: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter(format!("K must be positive, got {k}")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { k, epsilon })
    }

    pub fn epsilon_tilde(&self) -> f64 {
        self.epsilon / self.k
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScalingCheckReport {
    #[serde(rename = "K")]
    pub k: f64,
    pub epsilon: f64,
    pub epsilon_tilde: f64,
    pub curves_checked: usize,
    /// Max of `|l_{d̃_ε̃}(γ) - K l_{d_ε}(γ)| / (K l_{d_ε}(γ))`.
    pub max_relative_defect: f64,
    /// Max relative difference of GH ratios between the two spaces.
    pub max_ratio_defect: Option<f64>,
}

fn relative(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Compare curve lengths in `(X, d, ε)` and `(X, Kd, ε/K)`.
pub fn scaling_check(g: &MetricGraph, params: ScalingCheckParams, curves: &[Curve]) -> Result<ScalingCheckReport> {
    let orig = ConformalGraph::with_epsilon(g, params.epsilon)?;
    let scaled = ConformalGraph::with_epsilon(&g.scale_metric(params.k)?, params.epsilon_tilde())?;
    let mut worst = 0.0f64;
    for c in curves {
        let l = orig.uniformized_curve_length(c)?;
        let lt = scaled.uniformized_curve_length(c)?;
        worst = worst.max(relative(lt, params.k * l));
    }
    Ok(ScalingCheckReport {
        k: params.k,
        epsilon: params.epsilon,
        epsilon_tilde: params.epsilon_tilde(),
        curves_checked: curves.len(),
        max_relative_defect: worst,
        max_ratio_defect: None,
    })
}

/// Max relative difference between GH ratios of `(X, d, ε)` and
/// `(X, Kd, ε/K)` over the given pairs.
pub fn gh_ratio_scaling_defect(g: &MetricGraph, params: ScalingCheckParams, pairs: &[(usize, usize)]) -> Result<f64> {
    let orig = ConformalGraph::with_epsilon(g, params.epsilon)?;
    let scaled = ConformalGraph::with_epsilon(&g.scale_metric(params.k)?, params.epsilon_tilde())?;
    let a = evaluate_pairs(&orig, pairs)?;
    let b = evaluate_pairs(&scaled, pairs)?;
    Ok(a.iter().zip(&b).map(|(p, q)| relative(p.ratio, q.ratio)).fold(0.0, f64::max))
}

/// Seeded random walks of 1..=`max_edges` steps with random fractional
/// offsets at both ends.
pub fn random_curves(g: &MetricGraph, count: usize, max_edges: usize, seed: u64) -> Vec<Curve> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let steps = rng.gen_range(1..=max_edges.max(1));
            let mut v = rng.gen_range(0..g.len());
            let mut path = vec![v];
            for _ in 0..steps {
                let nb = g.neighbors(v);
                if nb.is_empty() {
                    break;
                }
                v = nb[rng.gen_range(0..nb.len())].0;
                path.push(v);
            }
            if path.len() < 2 {
                return Curve::new(path);
            }
            let mut s = rng.gen_range(0.0..1.0);
            let mut e = rng.gen_range(0.0..1.0);
            if path.len() == 2 && s + e > 1.0 {
                s /= 2.0;
                e /= 2.0;
            }
            Curve::with_offsets(path, s, e).expect("offsets in range")
        })
        .collect()
}

//! Closed forms in the model planes `M^κ` with polar metric
//! `dr² + (sinh(√-κ r)/√-κ)² dθ²`, basepoint at the origin.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gehring_hayman::{least_squares_slope, CollapseFamily};

/// Geometric grid size used by [`ModelSpaceParams::d_eps_ray_upper`].
pub const S_GRID_POINTS: usize = 512;
pub const S_GRID_START: f64 = 1e-3;
pub const GOLDEN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpaceParams {
    pub kappa: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub r: f64,
    pub theta: f64,
}

impl PolarPoint {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius must be nonnegative, got {r}")));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter("angle must be finite".into()));
        }
        Ok(Self { r, theta: theta.rem_euclid(2.0 * PI) })
    }
}

/// Minimizer of the radial-arc-radial family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayUpper {
    pub value: f64,
    pub argmin: f64,
}

impl ModelSpaceParams {
    pub fn new(kappa: f64, epsilon: f64) -> Result<Self> {
        if !(kappa < 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!("kappa must be negative, got {kappa}")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { kappa, epsilon })
    }

    pub fn hyperbolic_plane(epsilon: f64) -> Result<Self> {
        Self::new(-1.0, epsilon)
    }

    /// `√-κ`.
    pub fn curvature_scale(&self) -> f64 {
        (-self.kappa).sqrt()
    }

    fn warp(&self, r: f64) -> f64 {
        let c = self.curvature_scale();
        (c * r).sinh() / c
    }

    /// `e^{-εs} sinh(cs)/c` without overflowing the sinh.
    fn damped_warp(&self, s: f64) -> f64 {
        let c = self.curvature_scale();
        let e = self.epsilon;
        if c * s < 20.0 {
            return (-e * s).exp() * self.warp(s);
        }
        0.5 * (((c - e) * s).exp() - (-(c + e) * s).exp()) / c
    }

    /// Length of the circle of radius `r` about the origin.
    pub fn circle_length(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
        }
        Ok(2.0 * PI * self.warp(r))
    }

    /// `d_ε`-length of the full circle of radius `k`.
    pub fn ray_separation_bound(&self, k: f64) -> Result<f64> {
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter(format!("k must be nonnegative, got {k}")));
        }
        if k == 0.0 {
            return Ok(0.0);
        }
        Ok((-self.epsilon * k).exp() * self.circle_length(k)?)
    }

    /// `d_ε`-length of the curve: radial descent from `k` to `s`, arc of
    /// angle `dtheta`, radial ascent back to `k`.
    pub fn ray_curve_length(&self, dtheta: f64, k: f64, s: f64) -> f64 {
        let e = self.epsilon;
        let radial = 2.0 * ((-e * s).exp() - (-e * k).exp()) / e;
        radial + dtheta * self.damped_warp(s)
    }

    /// Minimum of [`Self::ray_curve_length`] over `s ∈ [0, k]`.
    pub fn d_eps_ray_upper(&self, dtheta: f64, k: f64) -> Result<RayUpper> {
        self.d_eps_ray_upper_on(dtheta, k, &self.s_grid(k))
    }

    /// Geometric grid of 512 points on `[1e-3, k]` plus both endpoints.
    pub fn s_grid(&self, k: f64) -> Vec<f64> {
        let mut grid = vec![0.0];
        if k > S_GRID_START {
            let ratio = (k / S_GRID_START).ln() / (S_GRID_POINTS - 1) as f64;
            grid.extend((0..S_GRID_POINTS).map(|i| (S_GRID_START * (ratio * i as f64).exp()).min(k)));
        }
        grid.push(k);
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        grid
    }

    /// As [`Self::d_eps_ray_upper`] on a caller-supplied grid; the grid
    /// argmin is refined by golden-section search between its neighbours.
    pub fn d_eps_ray_upper_on(&self, dtheta: f64, k: f64, grid: &[f64]) -> Result<RayUpper> {
        if !(0.0..=2.0 * PI).contains(&dtheta) {
            return Err(Error::InvalidParameter(format!("angle gap must lie in [0, 2π], got {dtheta}")));
        }
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter(format!("k must be nonnegative, got {k}")));
        }
        if grid.is_empty() {
            return Err(Error::InvalidParameter("empty s-grid".into()));
        }
        if let Some(&s) = grid.iter().find(|&&s| !(0.0..=k).contains(&s)) {
            return Err(Error::OutOfRange(format!("grid point {s} outside [0, {k}]")));
        }
        let f = |s: f64| self.ray_curve_length(dtheta, k, s);
        let (i, _) = grid
            .iter()
            .enumerate()
            .map(|(i, &s)| (i, f(s)))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        let mut lo = grid[i.saturating_sub(1)];
        let mut hi = grid[(i + 1).min(grid.len() - 1)];
        let mut best = RayUpper { value: f(grid[i]), argmin: grid[i] };
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut a = hi - phi * (hi - lo);
        let mut b = lo + phi * (hi - lo);
        let (mut fa, mut fb) = (f(a), f(b));
        while hi - lo > GOLDEN_TOL {
            if fa <= fb {
                hi = b;
                b = a;
                fb = fa;
                a = hi - phi * (hi - lo);
                fa = f(a);
            } else {
                lo = a;
                a = b;
                fa = fb;
                b = lo + phi * (hi - lo);
                fb = f(b);
            }
        }
        for s in [a, b] {
            let v = f(s);
            if v < best.value {
                best = RayUpper { value: v, argmin: s };
            }
        }
        Ok(best)
    }

    /// Distance between two points given in polar coordinates.
    ///
    /// Uses `sinh²(cd/2) = sinh²(cΔr/2) + sinh(c r_a) sinh(c r_b) sin²(Δθ/2)`,
    /// which equals the arccosh form but keeps precision at short range.
    pub fn hyperbolic_distance(&self, a: PolarPoint, b: PolarPoint) -> f64 {
        let c = self.curvature_scale();
        let half_dr = 0.5 * c * (a.r - b.r);
        let half_dt = 0.5 * (a.theta - b.theta);
        let q = half_dr.sinh().powi(2) + (c * a.r).sinh() * (c * b.r).sinh() * half_dt.sin().powi(2);
        2.0 * q.max(0.0).sqrt().asinh() / c
    }
}

/// `log d_eps_ray_upper(Δθ, k)` fitted against integer `k` in the upper half
/// of `[1, k_max]`, where the transient near the origin has died out.
pub fn ray_collapse_slope(params: &ModelSpaceParams, dtheta: f64, k_max: usize) -> Result<f64> {
    if k_max < 4 {
        return Err(Error::InvalidParameter(format!("k_max must be at least 4, got {k_max}")));
    }
    let ks: Vec<f64> = (k_max.div_ceil(2)..=k_max).map(|k| k as f64).collect();
    let mut ys = Vec::with_capacity(ks.len());
    for &k in &ks {
        let v = params.d_eps_ray_upper(dtheta, k)?.value;
        if v <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        ys.push(v.ln());
    }
    Ok(least_squares_slope(&ks, &ys))
}

/// `M^κ` ray pairs at angle `Δθ`, indexed by `k_max`.
pub struct ModelSpaceFamily {
    pub kappa: f64,
    pub dtheta: f64,
    pub k_maxes: Vec<usize>,
}

impl ModelSpaceFamily {
    pub fn new(kappa: f64, k_maxes: Vec<usize>) -> Self {
        Self { kappa, dtheta: PI, k_maxes }
    }
}

impl CollapseFamily for ModelSpaceFamily {
    fn name(&self) -> String {
        format!("model(kappa={})", self.kappa)
    }

    fn depths(&self) -> Vec<usize> {
        self.k_maxes.clone()
    }

    fn collapse_slope(&self, epsilon: f64, depth: usize) -> Result<f64> {
        ray_collapse_slope(&ModelSpaceParams::new(self.kappa, epsilon)?, self.dtheta, depth)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_lengths() {
        let h = ModelSpaceParams::new(-1.0, 1.0).unwrap();
        assert!((h.circle_length(1.0).unwrap() - 7.384_006_872_882_645).abs() < 1e-12);
        let m = ModelSpaceParams::new(-4.0, 1.0).unwrap();
        assert!((m.circle_length(1.0).unwrap() - PI * 2f64.sinh()).abs() < 1e-12);
        assert!(h.circle_length(1e-9).unwrap() < 1e-8);
        assert!(h.circle_length(0.0).is_err());
    }

    #[test]
    fn separation_bound() {
        let h = ModelSpaceParams::new(-1.0, 1.2).unwrap();
        assert_eq!(h.ray_separation_bound(0.0).unwrap(), 0.0);
        assert!((h.ray_separation_bound(3.0).unwrap() - 1.719_868_881_924_649).abs() < 1e-12);
        assert!(h.ray_separation_bound(-1.0).is_err());
    }

    #[test]
    fn ray_upper_limits() {
        let h = ModelSpaceParams::new(-1.0, 0.5).unwrap();
        let z = h.d_eps_ray_upper(0.0, 7.0).unwrap();
        assert!(z.value.abs() < 1e-15 && (z.argmin - 7.0).abs() < 1e-7);
        let c = ModelSpaceParams::new(-1.0, 1.5).unwrap();
        let v: Vec<f64> = [5.0, 10.0, 20.0].iter().map(|&k| c.d_eps_ray_upper(PI, k).unwrap().value).collect();
        assert!(v[0] > v[1] && v[1] > v[2] && v[2] < 1e-4);
        assert!(h.d_eps_ray_upper_on(PI, 3.0, &[]).is_err());
    }

    #[test]
    fn antipodal_distance() {
        let h = ModelSpaceParams::new(-1.0, 1.0).unwrap();
        let a = PolarPoint::new(1.0, 0.0).unwrap();
        let b = PolarPoint::new(1.0, PI).unwrap();
        assert!((h.hyperbolic_distance(a, b) - 2.0).abs() < 1e-14);
        assert_eq!(h.hyperbolic_distance(a, a), 0.0);
        let c = PolarPoint::new(3.5, 0.0).unwrap();
        assert!((h.hyperbolic_distance(a, c) - 2.5).abs() < 1e-14);
    }

    #[test]
    fn bad_params() {
        assert!(ModelSpaceParams::new(0.0, 1.0).is_err());
        assert!(ModelSpaceParams::new(-1.0, 0.0).is_err());
        assert!(PolarPoint::new(-1.0, 0.0).is_err());
    }
}

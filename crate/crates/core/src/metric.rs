//! Finite metric spaces given by coordinates or an explicit distance matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Label;

/// Tolerance used for every metric-axiom check.
pub const METRIC_TOL: f64 = 1e-9;

/// How the distances of a [`FiniteMetricSpace`] were specified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricSource {
    Euclidean,
    Matrix,
}

/// A finite set of labelled points with a dense distance matrix.
///
/// Construction only checks the format of the input (square, finite,
/// nonnegative). The metric axioms are checked by [`validate_metric`].
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    ids: Vec<Label>,
    coords: Option<Vec<Vec<f64>>>,
    dist: Vec<f64>,
    source: MetricSource,
}

impl FiniteMetricSpace {
    pub fn from_matrix(ids: Vec<Label>, matrix: Vec<Vec<f64>>) -> Result<Self> {
        let n = ids.len();
        if n == 0 {
            return Err(Error::Format("metric space needs at least one point".into()));
        }
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(Error::Format(format!(
                "distance matrix must be {n}x{n} to match the point list"
            )));
        }
        let mut dist = Vec::with_capacity(n * n);
        for (i, row) in matrix.iter().enumerate() {
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() {
                    return Err(Error::Format(format!("non-finite entry at ({i},{j})")));
                }
                if d < 0.0 {
                    return Err(Error::Format(format!("negative entry {d} at ({i},{j})")));
                }
                dist.push(d);
            }
        }
        check_unique(&ids)?;
        Ok(Self { ids, coords: None, dist, source: MetricSource::Matrix })
    }

    pub fn from_coords(ids: Vec<Label>, coords: Vec<Vec<f64>>) -> Result<Self> {
        let n = ids.len();
        if n == 0 {
            return Err(Error::Format("metric space needs at least one point".into()));
        }
        if coords.len() != n {
            return Err(Error::Format("one coordinate vector per point required".into()));
        }
        let dim = coords[0].len();
        if coords.iter().any(|c| c.len() != dim || c.iter().any(|x| !x.is_finite())) {
            return Err(Error::Format("coordinate vectors must share a dimension and be finite".into()));
        }
        check_unique(&ids)?;
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = coords[i]
                    .iter()
                    .zip(&coords[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Ok(Self { ids, coords: Some(coords), dist, source: MetricSource::Euclidean })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[Label] {
        &self.ids
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    pub fn source(&self) -> MetricSource {
        self.source
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.ids.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.ids.len();
        &self.dist[i * n..(i + 1) * n]
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    pub fn index_of(&self, id: &Label) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// Multiply every distance (and coordinate) by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale factor must be positive, got {factor}")));
        }
        Ok(Self {
            ids: self.ids.clone(),
            coords: self
                .coords
                .as_ref()
                .map(|cs| cs.iter().map(|c| c.iter().map(|x| x * factor).collect()).collect()),
            dist: self.dist.iter().map(|d| d * factor).collect(),
            source: self.source,
        })
    }
}

fn check_unique(ids: &[Label]) -> Result<()> {
    let mut sorted: Vec<&Label> = ids.iter().collect();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Format(format!("duplicate point id {}", w[0])));
    }
    Ok(())
}

/// A failed metric axiom. Indices refer to positions in the point list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Violation {
    /// `dist(i,i) != 0`.
    Diagonal { i: usize, value: f64 },
    /// `dist(i,j) != dist(j,i)`; defect is the absolute difference.
    Asymmetric { i: usize, j: usize, defect: f64 },
    /// `dist(i,j) == 0` for distinct points.
    Coincident { i: usize, j: usize },
    /// `dist(i,j) > dist(i,k) + dist(k,j)`; defect is the excess.
    Triangle { i: usize, j: usize, k: usize, defect: f64 },
}

/// Check every metric axiom up to [`METRIC_TOL`].
///
/// Triangle violations are reported once per unordered pair `{i,j}` and
/// intermediate point `k`.
pub fn validate_metric(space: &FiniteMetricSpace) -> Vec<Violation> {
    let n = space.len();
    let mut out = Vec::new();
    for i in 0..n {
        let v = space.dist(i, i);
        if v.abs() > METRIC_TOL {
            out.push(Violation::Diagonal { i, value: v });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let defect = (space.dist(i, j) - space.dist(j, i)).abs();
            if defect > METRIC_TOL {
                out.push(Violation::Asymmetric { i, j, defect });
            }
            if space.dist(i, j) <= METRIC_TOL || space.dist(j, i) <= METRIC_TOL {
                out.push(Violation::Coincident { i, j });
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = space.dist(i, j);
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let defect = dij - space.dist(i, k) - space.dist(k, j);
                if defect > METRIC_TOL {
                    out.push(Violation::Triangle { i, j, k, defect });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<Label> {
        (0..n).map(Label::from).collect()
    }

    #[test]
    fn degenerate_collinear_triangle_is_valid() {
        let m = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        let s = FiniteMetricSpace::from_matrix(ids(3), m).unwrap();
        assert!(validate_metric(&s).is_empty());
    }

    #[test]
    fn triangle_violation_of_defect_four() {
        let m = vec![vec![0.0, 5.0, 10.0], vec![5.0, 0.0, 1.0], vec![10.0, 1.0, 0.0]];
        let s = FiniteMetricSpace::from_matrix(ids(3), m).unwrap();
        let v = validate_metric(&s);
        assert_eq!(v, vec![Violation::Triangle { i: 0, j: 2, k: 1, defect: 4.0 }]);
    }

    #[test]
    fn asymmetry_reported() {
        let m = vec![vec![0.0, 1.0], vec![1.5, 0.0]];
        let s = FiniteMetricSpace::from_matrix(ids(2), m).unwrap();
        let v = validate_metric(&s);
        assert!(matches!(v[0], Violation::Asymmetric { i: 0, j: 1, .. }));
    }

    #[test]
    fn format_errors() {
        assert!(matches!(
            FiniteMetricSpace::from_matrix(ids(2), vec![vec![0.0, 1.0]]),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            FiniteMetricSpace::from_matrix(ids(2), vec![vec![0.0, -1.0], vec![-1.0, 0.0]]),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn euclidean_from_coords() {
        let s = FiniteMetricSpace::from_coords(ids(2), vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(s.dist(0, 1), 5.0);
        assert_eq!(s.diameter(), 5.0);
        assert!(validate_metric(&s).is_empty());
    }
}

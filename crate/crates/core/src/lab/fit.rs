use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub model: String,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub residual_norm: f64,
    pub n_points: usize,
}

/// Least squares without intercept on the given design columns.
fn solve(model: &str, columns: Vec<Vec<f64>>, y: &[f64]) -> Result<FitResult> {
    let n = y.len();
    let p = columns.len();
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::Dimension {
            expected: n,
            got: columns.iter().map(Vec::len).max().unwrap_or(0),
        });
    }
    if y.iter().chain(columns.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("fit data"));
    }
    let x = DMatrix::from_fn(n, p, |i, j| columns[j][i]);
    let yv = DVector::from_column_slice(y);
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if n < p || smax == 0.0 || svd.singular_values.min() <= 1e-12 * smax {
        return Err(Error::RankDeficient);
    }
    let beta = svd.solve(&yv, 1e-14 * smax).map_err(|_| Error::RankDeficient)?;
    let resid = &yv - &x * &beta;
    let rss = resid.norm_squared();
    let xtx = x.transpose() * &x;
    let cov = xtx.try_inverse().ok_or(Error::RankDeficient)?;
    let s2 = if n > p { rss / (n - p) as f64 } else { 0.0 };
    Ok(FitResult {
        model: model.into(),
        coefficients: beta.iter().copied().collect(),
        std_errors: (0..p).map(|j| (s2 * cov[(j, j)]).max(0.0).sqrt()).collect(),
        residual_norm: rss.sqrt(),
        n_points: n,
    })
}

/// Fits `y = c x²` (one coordinate) or `y = c₁x² + c₂y² + c₃xy` (two).
///
/// Needs at least six points and both signs along every coordinate.
pub fn fit_quadratic(points: &[Vec<f64>], y: &[f64]) -> Result<FitResult> {
    if points.len() != y.len() {
        return Err(Error::Dimension {
            expected: points.len(),
            got: y.len(),
        });
    }
    if points.len() < 6 {
        return Err(Error::param("points", "need at least six points"));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::param("points", "all points need the same dimension"));
    }
    for k in 0..dim {
        let neg = points.iter().any(|p| p[k] < 0.0);
        let pos = points.iter().any(|p| p[k] > 0.0);
        if !(neg && pos) {
            return Err(Error::param("points", "each coordinate must take both signs"));
        }
    }
    match dim {
        1 => solve("c1*x^2", vec![points.iter().map(|p| p[0] * p[0]).collect()], y),
        2 => solve(
            "c1*x^2 + c2*y^2 + c3*x*y",
            vec![
                points.iter().map(|p| p[0] * p[0]).collect(),
                points.iter().map(|p| p[1] * p[1]).collect(),
                points.iter().map(|p| p[0] * p[1]).collect(),
            ],
            y,
        ),
        _ => Err(Error::param("points", "one or two coordinates")),
    }
}

/// Fits `y = c u` through the origin.
pub fn fit_proportional(u: &[f64], y: &[f64]) -> Result<FitResult> {
    if u.len() != y.len() {
        return Err(Error::Dimension {
            expected: u.len(),
            got: y.len(),
        });
    }
    solve("c1*u", vec![u.to_vec()], y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_known_surface() {
        let mut pts = Vec::new();
        let mut y = Vec::new();
        for i in -3..=3 {
            for j in -3..=3 {
                let (a, b) = (i as f64 * 0.01, j as f64 * 0.02);
                pts.push(vec![a, b]);
                y.push(1.0 * a * a + 0.5 * b * b + 1.25 * a * b);
            }
        }
        let f = fit_quadratic(&pts, &y).unwrap();
        for (c, e) in f.coefficients.iter().zip([1.0, 0.5, 1.25]) {
            assert!((c - e).abs() < 1e-9);
        }
    }

    #[test]
    fn rank_deficiency() {
        let pts: Vec<Vec<f64>> = (-3..=3).map(|i| vec![i as f64, i as f64]).collect();
        let y: Vec<f64> = pts.iter().map(|p| p[0] * p[0]).collect();
        assert!(matches!(fit_quadratic(&pts, &y), Err(Error::RankDeficient)));
    }

    #[test]
    fn one_sided_rejected() {
        let pts: Vec<Vec<f64>> = (1..=8).map(|i| vec![i as f64]).collect();
        let y = vec![0.0; 8];
        assert!(fit_quadratic(&pts, &y).is_err());
    }
}

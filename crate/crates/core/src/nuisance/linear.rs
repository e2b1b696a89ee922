//! Linear least squares: a ridge-penalized regressor and plain OLS with
//! classical inference (needed by the sensitivity diagnostics).

use ndarray::Array2;

use crate::error::{Error, Result};

/// Ridge linear model (intercept unpenalized).
#[derive(Debug, Clone)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefs: Vec<f64>,
}

impl LinearModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept + self.coefs.iter().zip(row).map(|(c, v)| c * v).sum::<f64>()
    }

    pub fn predict(&self, features: &Array2<f64>) -> Vec<f64> {
        (0..features.nrows())
            .map(|i| self.predict_row(features.row(i).as_slice().unwrap()))
            .collect()
    }
}

fn design_with_intercept(features: &Array2<f64>) -> nalgebra::DMatrix<f64> {
    let n = features.nrows();
    let p = features.ncols();
    let mut x = nalgebra::DMatrix::zeros(n, p + 1);
    for i in 0..n {
        x[(i, 0)] = 1.0;
        for j in 0..p {
            x[(i, j + 1)] = features[[i, j]];
        }
    }
    x
}

/// Ridge regression used as a plug-in regressor.
pub fn ridge_linear(features: &Array2<f64>, y: &[f64], l2: f64) -> Result<LinearModel> {
    let n = features.nrows();
    let p = features.ncols();
    if y.len() != n || n == 0 {
        return Err(Error::DegenerateModel("empty or mismatched regression input".into()));
    }
    let x = design_with_intercept(features);
    let mut xtx = x.transpose() * &x;
    for j in 1..=p {
        xtx[(j, j)] += l2;
    }
    let xty = x.transpose() * nalgebra::DVector::from_row_slice(y);
    let beta = xtx
        .clone()
        .cholesky()
        .map(|ch| ch.solve(&xty))
        .or_else(|| {
            let mut jit = xtx;
            for j in 0..=p {
                jit[(j, j)] += 1e-8;
            }
            jit.cholesky().map(|ch| ch.solve(&xty))
        })
        .ok_or_else(|| Error::DegenerateModel("singular normal equations".into()))?;
    Ok(LinearModel { intercept: beta[0], coefs: beta.as_slice()[1..].to_vec() })
}

/// OLS fit with classical standard errors and t statistics.
#[derive(Debug, Clone)]
pub struct OlsFit {
    /// Coefficients: intercept first, then one per feature column.
    pub coefs: Vec<f64>,
    pub se: Vec<f64>,
    pub t: Vec<f64>,
    /// Residual degrees of freedom, n - (p + 1).
    pub dof: f64,
    /// Residual variance estimate.
    pub sigma2: f64,
    pub residuals: Vec<f64>,
}

impl OlsFit {
    pub fn coef(&self, idx_with_intercept: usize) -> f64 {
        self.coefs[idx_with_intercept]
    }
}

/// Ordinary least squares of `y` on an intercept plus `features`.
pub fn ols(features: &Array2<f64>, y: &[f64]) -> Result<OlsFit> {
    let n = features.nrows();
    let p = features.ncols();
    if y.len() != n {
        return Err(Error::DegenerateModel("length mismatch".into()));
    }
    let dof = n as f64 - (p + 1) as f64;
    if dof <= 0.0 {
        return Err(Error::DegenerateModel(format!(
            "no residual degrees of freedom: n={n}, parameters={}",
            p + 1
        )));
    }
    let x = design_with_intercept(features);
    let xtx = x.transpose() * &x;
    let inv = xtx
        .try_inverse()
        .ok_or_else(|| Error::DegenerateModel("singular design".into()))?;
    let xty = x.transpose() * nalgebra::DVector::from_row_slice(y);
    let beta = &inv * xty;
    let fitted = &x * &beta;
    let residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(yi, fi)| yi - fi).collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let sigma2 = rss / dof;
    let se: Vec<f64> = (0..=p).map(|j| (sigma2 * inv[(j, j)]).max(0.0).sqrt()).collect();
    let coefs: Vec<f64> = beta.as_slice().to_vec();
    let t: Vec<f64> = coefs
        .iter()
        .zip(&se)
        .map(|(c, s)| if *s > 0.0 { c / s } else { f64::NAN })
        .collect();
    Ok(OlsFit { coefs, se, t, dof, sigma2, residuals })
}

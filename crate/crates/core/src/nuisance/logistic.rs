//! L2-penalized logistic regression fit by iteratively reweighted least squares.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::sigmoid;

/// Solver settings. The penalty applies to slope coefficients only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub l2_penalty: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig { l2_penalty: 1e-4, max_iter: 100, tol: 1e-10 }
    }
}

impl LogisticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l2_penalty < 0.0 {
            return Err(Error::BadConfig("l2_penalty must be >= 0".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::BadConfig("max_iter must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::BadConfig("tol must be positive".into()));
        }
        Ok(())
    }
}

/// Fitted model: intercept plus one coefficient per feature column.
#[derive(Debug, Clone)]
pub struct LogisticModel {
    pub intercept: f64,
    pub coefs: Vec<f64>,
    /// False when the iteration cap was hit; the best iterate is returned.
    pub converged: bool,
    pub n_iter: usize,
    /// Standard errors from the observed information at the optimum,
    /// intercept first.
    pub se: Vec<f64>,
}

impl LogisticModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let lin = self.intercept
            + self.coefs.iter().zip(row).map(|(c, v)| c * v).sum::<f64>();
        sigmoid(lin)
    }

    pub fn predict(&self, features: &Array2<f64>) -> Vec<f64> {
        (0..features.nrows())
            .map(|i| self.predict_row(features.row(i).as_slice().unwrap()))
            .collect()
    }
}

/// Penalized Bernoulli log-likelihood at `beta` (intercept first).
pub(crate) fn penalized_loglik(
    features: &Array2<f64>,
    labels: &[f64],
    beta: &[f64],
    l2: f64,
) -> f64 {
    let mut ll = 0.0;
    for i in 0..features.nrows() {
        let lin = beta[0]
            + features
                .row(i)
                .iter()
                .zip(&beta[1..])
                .map(|(v, c)| v * c)
                .sum::<f64>();
        // y*lin - log(1 + exp(lin)), stable for |lin| large
        let softplus = if lin > 0.0 { lin + (-lin).exp().ln_1p() } else { lin.exp().ln_1p() };
        ll += labels[i] * lin - softplus;
    }
    ll - 0.5 * l2 * beta[1..].iter().map(|b| b * b).sum::<f64>()
}

/// Gradient of the penalized log-likelihood at `beta` (intercept first).
pub(crate) fn loglik_gradient(
    features: &Array2<f64>,
    labels: &[f64],
    beta: &[f64],
    l2: f64,
) -> Vec<f64> {
    let p = features.ncols();
    let mut grad = vec![0.0; p + 1];
    for i in 0..features.nrows() {
        let lin = beta[0]
            + features
                .row(i)
                .iter()
                .zip(&beta[1..])
                .map(|(v, c)| v * c)
                .sum::<f64>();
        let resid = labels[i] - sigmoid(lin);
        grad[0] += resid;
        for j in 0..p {
            grad[j + 1] += resid * features[[i, j]];
        }
    }
    for j in 0..p {
        grad[j + 1] -= l2 * beta[j + 1];
    }
    grad
}

/// Maximum penalized likelihood by Newton steps with step halving.
///
/// Labels must be 0/1 with both classes present. When the iteration cap is
/// reached the best iterate is returned with `converged = false`.
pub fn fit_logistic(
    features: &Array2<f64>,
    labels: &[f64],
    config: &LogisticConfig,
) -> Result<LogisticModel> {
    config.validate()?;
    let n = features.nrows();
    let p = features.ncols();
    if labels.len() != n {
        return Err(Error::BadConfig(format!("{} labels for {} rows", labels.len(), n)));
    }
    if labels.iter().any(|&y| y != 0.0 && y != 1.0) {
        return Err(Error::Degenerate("labels must be 0/1".into()));
    }
    let n_pos = labels.iter().filter(|&&y| y == 1.0).count();
    if n_pos == 0 || n_pos == n {
        return Err(Error::Degenerate("a single class is present".into()));
    }

    let mut beta = vec![0.0; p + 1];
    let mut ll = penalized_loglik(features, labels, &beta, config.l2_penalty);
    let mut best = (beta.clone(), ll);
    let mut converged = false;
    let mut n_iter = 0;

    for iter in 0..config.max_iter {
        n_iter = iter + 1;
        // observed information and score at the current iterate
        let mut info = nalgebra::DMatrix::<f64>::zeros(p + 1, p + 1);
        let grad = loglik_gradient(features, labels, &beta, config.l2_penalty);
        for i in 0..n {
            let lin = beta[0]
                + features
                    .row(i)
                    .iter()
                    .zip(&beta[1..])
                    .map(|(v, c)| v * c)
                    .sum::<f64>();
            let pr = sigmoid(lin);
            let wgt = (pr * (1.0 - pr)).max(1e-12);
            let mut row = Vec::with_capacity(p + 1);
            row.push(1.0);
            row.extend(features.row(i).iter().copied());
            for a in 0..=p {
                for b in a..=p {
                    info[(a, b)] += wgt * row[a] * row[b];
                }
            }
        }
        for a in 0..=p {
            for b in 0..a {
                info[(a, b)] = info[(b, a)];
            }
        }
        for j in 1..=p {
            info[(j, j)] += config.l2_penalty;
        }

        let g = nalgebra::DVector::from_vec(grad);
        let delta = match info.clone().cholesky() {
            Some(ch) => ch.solve(&g),
            None => {
                // jitter the diagonal if the weighted design is rank-deficient
                let mut jittered = info.clone();
                for a in 0..=p {
                    jittered[(a, a)] += 1e-8;
                }
                jittered
                    .cholesky()
                    .ok_or_else(|| Error::DegenerateModel("singular information matrix".into()))?
                    .solve(&g)
            }
        };

        // step halving keeps the likelihood non-decreasing
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let cand: Vec<f64> =
                beta.iter().zip(delta.iter()).map(|(b, d)| b + step * d).collect();
            let cand_ll = penalized_loglik(features, labels, &cand, config.l2_penalty);
            if cand_ll >= ll - 1e-12 {
                let changed = (cand_ll - ll).abs();
                beta = cand;
                ll = cand_ll;
                accepted = true;
                if ll > best.1 {
                    best = (beta.clone(), ll);
                }
                if changed < config.tol * (ll.abs() + 1.0) {
                    converged = true;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            converged = true; // no uphill step exists at this scale
        }
        if converged {
            break;
        }
    }

    let (beta, _) = if converged { (beta, ll) } else { best };

    // standard errors from the observed information at the returned iterate
    let mut info = nalgebra::DMatrix::<f64>::zeros(p + 1, p + 1);
    for i in 0..n {
        let lin = beta[0]
            + features
                .row(i)
                .iter()
                .zip(&beta[1..])
                .map(|(v, c)| v * c)
                .sum::<f64>();
        let pr = sigmoid(lin);
        let wgt = (pr * (1.0 - pr)).max(1e-12);
        let mut row = Vec::with_capacity(p + 1);
        row.push(1.0);
        row.extend(features.row(i).iter().copied());
        for a in 0..=p {
            for b in a..=p {
                info[(a, b)] += wgt * row[a] * row[b];
                if a != b {
                    info[(b, a)] = info[(a, b)];
                }
            }
        }
    }
    for j in 1..=p {
        info[(j, j)] += config.l2_penalty;
    }
    let se = match info.try_inverse() {
        Some(inv) => (0..=p).map(|j| inv[(j, j)].max(0.0).sqrt()).collect(),
        None => vec![f64::NAN; p + 1],
    };

    Ok(LogisticModel {
        intercept: beta[0],
        coefs: beta[1..].to_vec(),
        converged,
        n_iter,
        se,
    })
}

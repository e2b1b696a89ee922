//! Forward sampling from the generative model.
//!
//! Each row draws from its own RNG substream, so output depends only on
//! `(spec, n, seed)` and rows can be generated in any order or in parallel.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::spec::{CompiledScm, ConfounderDist, ConfounderGen, ScmSpec};
use crate::error::Result;
use crate::rng::seeded_rng;
use crate::sfm::dataset::{Column, Dataset};

/// Exogenous draws for one unit, shared across counterfactual worlds.
pub(crate) struct UnitNoise {
    pub z_values: Vec<f64>,
    pub u_x: f64,
    pub u_w: Vec<f64>,
    pub eps_y: f64,
}

pub(crate) fn draw_unit(spec: &ScmSpec, compiled: &CompiledScm, rng: &mut ChaCha8Rng) -> UnitNoise {
    let z_values = match &spec.confounders {
        ConfounderDist::Finite { probs, variables } => {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut idx = probs.len() - 1;
            for (i, &p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    idx = i;
                    break;
                }
            }
            stratum_values(variables.iter().map(|v| v.kind.n_levels().unwrap()), idx)
        }
        ConfounderDist::Independent { generators } => generators
            .iter()
            .map(|g| match g {
                ConfounderGen::Bernoulli { p, .. } => {
                    let u: f64 = rng.gen();
                    if u < *p {
                        1.0
                    } else {
                        0.0
                    }
                }
                ConfounderGen::Categorical { probs, .. } => {
                    let u: f64 = rng.gen();
                    let mut acc = 0.0;
                    let mut idx = probs.len() - 1;
                    for (i, &p) in probs.iter().enumerate() {
                        acc += p;
                        if u < acc {
                            idx = i;
                            break;
                        }
                    }
                    idx as f64
                }
                ConfounderGen::Gaussian { mean, sd, .. } => {
                    let n: f64 = rng.sample(StandardNormal);
                    mean + sd * n
                }
            })
            .collect(),
    };
    let u_x: f64 = rng.gen();
    let u_w: Vec<f64> = (0..spec.mediators.len()).map(|_| rng.gen()).collect();
    let eps_y: f64 = rng.sample(StandardNormal);
    let _ = compiled;
    UnitNoise { z_values, u_x, u_w, eps_y }
}

/// Decode a flat stratum index into per-variable level values
/// (last variable fastest).
pub(crate) fn stratum_values(
    level_counts: impl Iterator<Item = usize>,
    mut idx: usize,
) -> Vec<f64> {
    let counts: Vec<usize> = level_counts.collect();
    let mut out = vec![0.0; counts.len()];
    for i in (0..counts.len()).rev() {
        out[i] = (idx % counts[i]) as f64;
        idx /= counts[i];
    }
    out
}

/// Mediator chain under treatment value `x` with fixed exogenous draws.
pub(crate) fn mediators_under(
    compiled: &CompiledScm,
    x: f64,
    z_enc: &[f64],
    u_w: &[f64],
) -> Vec<f64> {
    let mut w = Vec::with_capacity(compiled.w.len());
    for j in 0..compiled.w.len() {
        let p1 = compiled.p_w1(j, x, z_enc, &w);
        w.push(if u_w[j] < p1 { 1.0 } else { 0.0 });
    }
    w
}

/// Draw `n` i.i.d. units in topological order (Z, X, W, Y).
pub fn sample(spec: &ScmSpec, n: usize) -> Result<Dataset> {
    let compiled = CompiledScm::new(spec)?;
    let schema = spec.schema()?;
    let n_z = compiled.z_vars.len();
    let n_w = compiled.w.len();

    let mut x_col = Vec::with_capacity(n);
    let mut z_cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); n_z];
    let mut w_cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); n_w];
    let mut y_col = Vec::with_capacity(n);

    for row in 0..n {
        let mut rng = seeded_rng(spec.seed, b"sample", row as u64);
        let noise = draw_unit(spec, &compiled, &mut rng);
        let z_enc = compiled.encode_z(&noise.z_values);
        let x = if noise.u_x < compiled.p_x1(&z_enc) { 1.0 } else { 0.0 };
        let w = mediators_under(&compiled, x, &z_enc, &noise.u_w);
        let y = compiled.mu(x, &w, &z_enc) + compiled.sigma * noise.eps_y;

        x_col.push(x);
        for (col, &v) in z_cols.iter_mut().zip(&noise.z_values) {
            col.push(v);
        }
        for (col, &v) in w_cols.iter_mut().zip(&w) {
            col.push(v);
        }
        y_col.push(y);
    }

    let mut columns = Vec::with_capacity(2 + n_z + n_w);
    columns.push(Column::complete(x_col));
    columns.extend(z_cols.into_iter().map(Column::complete));
    columns.extend(w_cols.into_iter().map(Column::complete));
    columns.push(Column::complete(y_col));
    Ok(Dataset::new(schema, n, columns))
}

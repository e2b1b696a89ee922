//! Ground-truth causal quantities for a known generative model.
//!
//! With finite confounder support and binary mediators everything is computed
//! by exact enumeration over (z, w) strata. Otherwise a Monte-Carlo mode
//! re-runs the structural equations across counterfactual worlds with shared
//! exogenous draws, so paired contrasts carry no outcome-noise variance.

use serde::Serialize;

use super::sample::{draw_unit, mediators_under, stratum_values};
use super::spec::{CompiledScm, ConfounderDist, ScmSpec};
use crate::error::{Error, Result};
use crate::rng::seeded_rng;
use crate::stats::{mean, sample_variance};

/// One confounder stratum with its ground-truth conditional effects.
#[derive(Debug, Clone, Serialize)]
pub struct StratumTruth {
    /// Per-confounder level values, declaration order.
    pub z_values: Vec<f64>,
    pub label: String,
    /// P(z).
    pub prob: f64,
    /// P(z | X = 0), the baseline-group confounder distribution.
    pub prob_given_x0: f64,
    /// Conditional total effect.
    pub tau: f64,
    /// Conditional direct effect with mediators at their baseline law.
    pub ctf_de: f64,
}

/// How the ground truth was obtained.
#[derive(Debug, Clone, Serialize)]
pub enum OracleMethod {
    Exact,
    MonteCarlo { reps: usize, mc_se: McStandardErrors },
}

/// Monte-Carlo standard errors per quantity (zero in exact mode).
#[derive(Debug, Clone, Default, Serialize)]
pub struct McStandardErrors {
    pub tv: f64,
    pub x_de: f64,
    pub x_ie: f64,
    pub x_se: f64,
}

/// Exact (or simulated) values of every quantity the estimators target.
#[derive(Debug, Clone, Serialize)]
pub struct GroundTruth {
    pub tv: f64,
    pub x_de: f64,
    pub x_ie: f64,
    pub x_se: f64,
    /// Marginal outcome standard deviation implied by the model.
    pub sd_y: f64,
    /// Per-stratum conditional effects; empty when confounders are continuous.
    pub strata: Vec<StratumTruth>,
    pub method: OracleMethod,
}

impl GroundTruth {
    /// Look up the stratum truth for a confounder value vector.
    pub fn stratum(&self, z_values: &[f64]) -> Option<&StratumTruth> {
        self.strata.iter().find(|s| s.z_values == z_values)
    }
}

/// Finite list of confounder strata, or `NotEnumerable` for continuous kinds.
pub(crate) fn enumerate_strata(spec: &ScmSpec) -> Result<Vec<(Vec<f64>, f64)>> {
    match &spec.confounders {
        ConfounderDist::Finite { probs, variables } => {
            let counts: Vec<usize> =
                variables.iter().map(|v| v.kind.n_levels().unwrap()).collect();
            Ok(probs
                .iter()
                .enumerate()
                .map(|(idx, &p)| (stratum_values(counts.iter().copied(), idx), p))
                .collect())
        }
        ConfounderDist::Independent { generators } => {
            use super::spec::ConfounderGen;
            let mut strata: Vec<(Vec<f64>, f64)> = vec![(vec![], 1.0)];
            for g in generators {
                let levels: Vec<(f64, f64)> = match g {
                    ConfounderGen::Bernoulli { p, .. } => vec![(0.0, 1.0 - p), (1.0, *p)],
                    ConfounderGen::Categorical { probs, .. } => {
                        probs.iter().enumerate().map(|(i, &p)| (i as f64, p)).collect()
                    }
                    ConfounderGen::Gaussian { name, .. } => {
                        return Err(Error::NotEnumerable(format!(
                            "confounder '{name}' is continuous"
                        )))
                    }
                };
                let mut next = Vec::with_capacity(strata.len() * levels.len());
                for (values, p) in &strata {
                    for &(v, pl) in &levels {
                        let mut vs = values.clone();
                        vs.push(v);
                        next.push((vs, p * pl));
                    }
                }
                strata = next;
            }
            Ok(strata)
        }
    }
}

fn stratum_label(spec: &ScmSpec, compiled: &CompiledScm, values: &[f64]) -> String {
    let _ = spec;
    compiled
        .z_vars
        .iter()
        .zip(values)
        .map(|(v, &val)| match &v.kind {
            crate::sfm::schema::Kind::Categorical { levels, .. } => {
                format!("{}={}", v.name, levels[val as usize])
            }
            _ => format!("{}={}", v.name, val),
        })
        .collect::<Vec<_>>()
        .join(",")
}

/// Conditional means under the mediator chain: (E[Y|do(x), z] for x in {0,1},
/// nested mean with mediators at baseline, and E[Y | x, z] by consistency).
struct StratumMeans {
    /// E[Y_{x=1} | z] = sum_w mu(1,w,z) P(w|1,z)
    m1: f64,
    /// E[Y_{x=0} | z]
    m0: f64,
    /// sum_w mu(1,w,z) P(w|0,z) — treated outcome, baseline mediator law
    nested: f64,
}

fn stratum_means(compiled: &CompiledScm, z_enc: &[f64]) -> StratumMeans {
    let mut m1 = 0.0;
    let mut m0 = 0.0;
    let mut nested = 0.0;
    for w in compiled.w_combinations() {
        let p1 = compiled.p_w_vector(&w, 1.0, z_enc);
        let p0 = compiled.p_w_vector(&w, 0.0, z_enc);
        let mu1 = compiled.mu(1.0, &w, z_enc);
        let mu0 = compiled.mu(0.0, &w, z_enc);
        m1 += mu1 * p1;
        m0 += mu0 * p0;
        nested += mu1 * p0;
    }
    StratumMeans { m1, m0, nested }
}

/// Exact decomposition of the observed gap by full enumeration.
pub fn oracle_decomposition_exact(spec: &ScmSpec) -> Result<GroundTruth> {
    let compiled = CompiledScm::new(spec)?;
    let strata = enumerate_strata(spec)?;

    let p_x1: f64 = strata
        .iter()
        .map(|(values, p)| p * compiled.p_x1(&compiled.encode_z(values)))
        .sum();
    let p_x0 = 1.0 - p_x1;
    if p_x1 <= 0.0 || p_x0 <= 0.0 {
        return Err(Error::EmptyGroup("degenerate protected-attribute marginal".into()));
    }

    let mut ey_x1 = 0.0; // E[Y | X=1]
    let mut ey_x0 = 0.0;
    let mut theta1 = 0.0; // E over P(z|x0) of nested mean
    let mut theta2 = 0.0; // E over P(z|x0) of m1
    let mut ey2 = 0.0; // E[mu^2] over the joint, for sd_y
    let mut ey = 0.0;
    let mut truths = Vec::with_capacity(strata.len());

    for (values, p_z) in &strata {
        let z_enc = compiled.encode_z(values);
        let e1 = compiled.p_x1(&z_enc);
        let p_z_x1 = p_z * e1 / p_x1;
        let p_z_x0 = p_z * (1.0 - e1) / p_x0;
        let means = stratum_means(&compiled, &z_enc);
        ey_x1 += p_z_x1 * means.m1;
        ey_x0 += p_z_x0 * means.m0;
        theta1 += p_z_x0 * means.nested;
        theta2 += p_z_x0 * means.m1;

        for w in compiled.w_combinations() {
            for (x, px) in [(0.0, 1.0 - e1), (1.0, e1)] {
                let pw = compiled.p_w_vector(&w, x, &z_enc);
                let mu = compiled.mu(x, &w, &z_enc);
                let p = p_z * px * pw;
                ey += p * mu;
                ey2 += p * mu * mu;
            }
        }

        truths.push(StratumTruth {
            z_values: values.clone(),
            label: stratum_label(spec, &compiled, values),
            prob: *p_z,
            prob_given_x0: p_z_x0,
            tau: means.m1 - means.m0,
            ctf_de: oracle_ctf_de_at(&compiled, &z_enc),
        });
    }

    let var_y = compiled.sigma * compiled.sigma + (ey2 - ey * ey).max(0.0);
    let x_de = theta1 - ey_x0;
    let x_ie = theta1 - theta2;
    let x_se = theta2 - ey_x1;
    Ok(GroundTruth {
        tv: ey_x1 - ey_x0,
        x_de,
        x_ie,
        x_se,
        sd_y: var_y.sqrt(),
        strata: truths,
        method: OracleMethod::Exact,
    })
}

fn oracle_cate_at(compiled: &CompiledScm, z_enc: &[f64]) -> f64 {
    let means = stratum_means(compiled, z_enc);
    means.m1 - means.m0
}

fn oracle_ctf_de_at(compiled: &CompiledScm, z_enc: &[f64]) -> f64 {
    let mut out = 0.0;
    for w in compiled.w_combinations() {
        let p0 = compiled.p_w_vector(&w, 0.0, z_enc);
        out += (compiled.mu(1.0, &w, z_enc) - compiled.mu(0.0, &w, z_enc)) * p0;
    }
    out
}

fn check_z(spec: &ScmSpec, compiled: &CompiledScm, z_values: &[f64]) -> Result<()> {
    if z_values.len() != compiled.z_vars.len() {
        return Err(Error::UnknownStratum(format!(
            "expected {} confounder values, got {}",
            compiled.z_vars.len(),
            z_values.len()
        )));
    }
    for (var, &v) in compiled.z_vars.iter().zip(z_values) {
        let ok = match &var.kind {
            crate::sfm::schema::Kind::Binary => v == 0.0 || v == 1.0,
            crate::sfm::schema::Kind::Categorical { levels, .. } => {
                v.fract() == 0.0 && v >= 0.0 && (v as usize) < levels.len()
            }
            crate::sfm::schema::Kind::Continuous => v.is_finite(),
        };
        if !ok {
            return Err(Error::UnknownStratum(format!(
                "value {v} invalid for confounder '{}'",
                var.name
            )));
        }
    }
    let _ = spec;
    Ok(())
}

/// Conditional total effect at a confounder configuration:
/// the do-contrast including mediated flow.
pub fn oracle_cate(spec: &ScmSpec, z_values: &[f64]) -> Result<f64> {
    let compiled = CompiledScm::new(spec)?;
    check_z(spec, &compiled, z_values)?;
    Ok(oracle_cate_at(&compiled, &compiled.encode_z(z_values)))
}

/// Conditional direct effect: both arms hold mediators at the baseline law.
pub fn oracle_ctf_de(spec: &ScmSpec, z_values: &[f64]) -> Result<f64> {
    let compiled = CompiledScm::new(spec)?;
    check_z(spec, &compiled, z_values)?;
    Ok(oracle_ctf_de_at(&compiled, &compiled.encode_z(z_values)))
}

/// Monte-Carlo decomposition with common random numbers across worlds.
pub fn oracle_decomposition_mc(spec: &ScmSpec, reps: usize) -> Result<GroundTruth> {
    let compiled = CompiledScm::new(spec)?;
    // paired per-unit contrasts within the baseline group
    let mut de_contrib = Vec::new();
    let mut ie_contrib = Vec::new();
    let mut theta2_contrib = Vec::new();
    let mut y0 = Vec::new();
    let mut y1 = Vec::new();

    for rep in 0..reps {
        let mut rng = seeded_rng(spec.seed, b"oracle-mc", rep as u64);
        let noise = draw_unit(spec, &compiled, &mut rng);
        let z_enc = compiled.encode_z(&noise.z_values);
        let e1 = compiled.p_x1(&z_enc);
        let x_fact = if noise.u_x < e1 { 1.0 } else { 0.0 };

        let w0 = mediators_under(&compiled, 0.0, &z_enc, &noise.u_w);
        let w1 = mediators_under(&compiled, 1.0, &z_enc, &noise.u_w);
        let noise_y = compiled.sigma * noise.eps_y;
        let y_x0 = compiled.mu(0.0, &w0, &z_enc) + noise_y;
        let y_x1 = compiled.mu(1.0, &w1, &z_enc) + noise_y;
        let y_x1_w0 = compiled.mu(1.0, &w0, &z_enc) + noise_y;

        if x_fact == 0.0 {
            // factual Y equals Y_{x0} here by consistency
            de_contrib.push(y_x1_w0 - y_x0);
            ie_contrib.push(y_x1_w0 - y_x1);
            theta2_contrib.push(y_x1);
            y0.push(y_x0);
        } else {
            y1.push(y_x1);
        }
    }

    let n0 = y0.len();
    let n1 = y1.len();
    if n0 == 0 || n1 == 0 {
        return Err(Error::EmptyGroup("monte-carlo draw produced a one-group sample".into()));
    }
    let tv = mean(&y1) - mean(&y0);
    let x_de = mean(&de_contrib);
    let x_ie = mean(&ie_contrib);
    let x_se = mean(&theta2_contrib) - mean(&y1);

    let v0 = sample_variance(&y0) / n0 as f64;
    let v1 = sample_variance(&y1) / n1 as f64;
    let mc_se = McStandardErrors {
        tv: (v0 + v1).sqrt(),
        x_de: (sample_variance(&de_contrib) / n0 as f64).sqrt(),
        x_ie: (sample_variance(&ie_contrib) / n0 as f64).sqrt(),
        x_se: (sample_variance(&theta2_contrib) / n0 as f64 + v1).sqrt(),
    };

    let sd_y = {
        let mut all = y0.clone();
        all.extend_from_slice(&y1);
        sample_variance(&all).sqrt()
    };

    Ok(GroundTruth {
        tv,
        x_de,
        x_ie,
        x_se,
        sd_y,
        strata: Vec::new(),
        method: OracleMethod::MonteCarlo { reps, mc_se },
    })
}

/// Ground truth by enumeration when possible, else `NotEnumerable`.
pub fn oracle_decomposition(spec: &ScmSpec) -> Result<GroundTruth> {
    oracle_decomposition_exact(spec)
}

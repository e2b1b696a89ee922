//! Decomposition of the observed group gap into direct, indirect, and
//! confounded components.
//!
//! Three estimators share one assembly: a stratum-frequency plug-in for fully
//! discrete data, a model plug-in over fitted nuisances, and a one-step
//! debiased estimator with influence-function standard errors. All three
//! build the components from two counterfactual means,
//!
//!   theta1 = E[Y_{x1, W_{x0}} | X = x0]   (treated arm, baseline mediators)
//!   theta2 = E[Y_{x1} | X = x0]           (treated arm, own mediators)
//!
//! as x_de = theta1 - mean(Y|x0), x_ie = theta1 - theta2,
//! x_se = theta2 - mean(Y|x1). The theta terms cancel in
//! x_de - x_ie - x_se, so the decomposition identity against
//! tv = mean(Y|x1) - mean(Y|x0) holds exactly for any nuisance values.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nuisance::NuisanceFits;
use crate::rng::seeded_rng;
use crate::sfm::dataset::Dataset;
use crate::sfm::schema::{Kind, Role};
use crate::stats::{iqr, Z_95};

/// Point estimate with a normal-based 95% interval.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EstimateCi {
    pub estimate: f64,
    pub se: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
}

impl EstimateCi {
    fn new(estimate: f64, se: f64) -> Self {
        EstimateCi {
            estimate,
            se,
            ci95_lo: estimate - Z_95 * se,
            ci95_hi: estimate + Z_95 * se,
        }
    }

    pub fn covers(&self, value: f64) -> bool {
        self.ci95_lo <= value && value <= self.ci95_hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EstimatorKind {
    PluginStrata,
    PluginModel,
    Debiased,
}

/// Additive display convention: tv = direct + indirect + spurious.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DisplayComponents {
    pub direct: f64,
    pub indirect: f64,
    pub spurious: f64,
}

/// Component magnitudes as fractions of |tv|.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Shares {
    pub direct: f64,
    pub indirect: f64,
    pub spurious: f64,
}

/// Full decomposition output in both sign conventions.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub estimator: EstimatorKind,
    pub tv: EstimateCi,
    pub x_de: EstimateCi,
    pub x_ie: EstimateCi,
    pub x_se: EstimateCi,
    pub display: DisplayComponents,
    /// None when |tv| is too small for shares to mean anything.
    pub shares: Option<Shares>,
    pub n0: usize,
    pub n1: usize,
    pub warnings: Vec<String>,
}

/// Raw point estimates prior to assembly.
#[derive(Debug, Clone, Copy)]
struct Points {
    theta1: f64,
    theta2: f64,
    ybar0: f64,
    ybar1: f64,
}

impl Points {
    fn tv(&self) -> f64 {
        self.ybar1 - self.ybar0
    }
    fn x_de(&self) -> f64 {
        self.theta1 - self.ybar0
    }
    fn x_ie(&self) -> f64 {
        self.theta1 - self.theta2
    }
    fn x_se(&self) -> f64 {
        self.theta2 - self.ybar1
    }
}

const SHARE_GUARD: f64 = 1e-8;

fn assemble(
    estimator: EstimatorKind,
    pts: Points,
    se: [f64; 4], // tv, x_de, x_ie, x_se
    n0: usize,
    n1: usize,
    warnings: Vec<String>,
) -> DecompositionReport {
    let tv = pts.tv();
    let display = DisplayComponents {
        direct: pts.x_de(),
        indirect: -pts.x_ie(),
        spurious: -pts.x_se(),
    };
    let shares = if tv.abs() < SHARE_GUARD {
        None
    } else {
        Some(Shares {
            direct: display.direct.abs() / tv.abs(),
            indirect: display.indirect.abs() / tv.abs(),
            spurious: display.spurious.abs() / tv.abs(),
        })
    };
    DecompositionReport {
        estimator,
        tv: EstimateCi::new(tv, se[0]),
        x_de: EstimateCi::new(pts.x_de(), se[1]),
        x_ie: EstimateCi::new(pts.x_ie(), se[2]),
        x_se: EstimateCi::new(pts.x_se(), se[3]),
        display,
        shares,
        n0,
        n1,
        warnings,
    }
}

/// Observed mean gap between the groups with its two-sample standard error.
pub fn tv_empirical(data: &Dataset) -> Result<EstimateCi> {
    let x = data.protected_values();
    let y = data.outcome_values();
    let (mut s0, mut s1, mut q0, mut q1) = (0.0, 0.0, 0.0, 0.0);
    let (mut n0, mut n1) = (0usize, 0usize);
    for i in 0..data.n {
        if x[i] == 1 {
            s1 += y[i];
            q1 += y[i] * y[i];
            n1 += 1;
        } else {
            s0 += y[i];
            q0 += y[i] * y[i];
            n0 += 1;
        }
    }
    if n0 == 0 || n1 == 0 {
        return Err(Error::EmptyGroup(format!("n0={n0}, n1={n1}")));
    }
    let m0 = s0 / n0 as f64;
    let m1 = s1 / n1 as f64;
    let v0 = if n0 > 1 { (q0 - s0 * m0) / (n0 as f64 - 1.0) } else { 0.0 };
    let v1 = if n1 > 1 { (q1 - s1 * m1) / (n1 as f64 - 1.0) } else { 0.0 };
    let se = (v1 / n1 as f64 + v0 / n0 as f64).max(0.0).sqrt();
    Ok(EstimateCi::new(m1 - m0, se))
}

/// Bootstrap settings for the plug-in estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BootstrapSpec {
    pub resamples: usize,
    pub seed: u64,
}

impl Default for BootstrapSpec {
    fn default() -> Self {
        BootstrapSpec { resamples: 200, seed: 0 }
    }
}

type Key = Vec<u16>;

/// Per-row discrete keys for the confounder and mediator blocks.
fn strata_keys(data: &Dataset) -> Result<(Vec<Key>, Vec<Key>)> {
    let mut z_keys = vec![Vec::new(); data.n];
    let mut w_keys = vec![Vec::new(); data.n];
    for (var, col) in data.schema.variables.iter().zip(&data.columns) {
        match var.role {
            Role::Confounder => {
                if !var.kind.is_discrete() {
                    return Err(Error::BadConfig(format!(
                        "stratum plug-in requires discrete confounders; '{}' is continuous",
                        var.name
                    )));
                }
                for i in 0..data.n {
                    z_keys[i].push(col.values[i] as u16);
                }
            }
            Role::Mediator => {
                if var.kind != Kind::Binary {
                    return Err(Error::BadConfig(format!(
                        "stratum plug-in requires binary mediators; '{}' is not",
                        var.name
                    )));
                }
                for i in 0..data.n {
                    w_keys[i].push(col.values[i] as u16);
                }
            }
            _ => {}
        }
    }
    Ok((z_keys, w_keys))
}

/// Stratum-frequency plug-in over a subset of rows.
fn plugin_strata_points(
    x: &[u8],
    y: &[f64],
    z_keys: &[Key],
    w_keys: &[Key],
    rows: &[usize],
) -> Result<Points> {
    #[derive(Default)]
    struct Cell {
        n: usize,
        sum: f64,
    }
    let mut x1_cell: BTreeMap<(Key, Key), Cell> = BTreeMap::new(); // (z, w) among x=1
    let mut x0_cell: BTreeMap<(Key, Key), usize> = BTreeMap::new();
    let mut x1_z: BTreeMap<Key, Cell> = BTreeMap::new();
    let mut x0_z: BTreeMap<Key, usize> = BTreeMap::new();
    let (mut s0, mut s1) = (0.0, 0.0);
    let (mut n0, mut n1) = (0usize, 0usize);

    for &i in rows {
        let zw = (z_keys[i].clone(), w_keys[i].clone());
        if x[i] == 1 {
            let c = x1_cell.entry(zw).or_default();
            c.n += 1;
            c.sum += y[i];
            let c = x1_z.entry(z_keys[i].clone()).or_default();
            c.n += 1;
            c.sum += y[i];
            s1 += y[i];
            n1 += 1;
        } else {
            *x0_cell.entry(zw).or_default() += 1;
            *x0_z.entry(z_keys[i].clone()).or_default() += 1;
            s0 += y[i];
            n0 += 1;
        }
    }
    if n0 == 0 || n1 == 0 {
        return Err(Error::EmptyGroup(format!("n0={n0}, n1={n1}")));
    }

    // theta1: baseline-group (w, z) frequencies weighting treated cell means
    let mut theta1 = 0.0;
    for ((z, w), &count) in &x0_cell {
        let cell = x1_cell.get(&(z.clone(), w.clone())).ok_or_else(|| {
            Error::EmptyStratum(format!("x=1, w={w:?}, z={z:?}"))
        })?;
        theta1 += count as f64 * (cell.sum / cell.n as f64);
    }
    theta1 /= n0 as f64;

    // theta2: baseline-group z frequencies weighting treated stratum means
    let mut theta2 = 0.0;
    for (z, &count) in &x0_z {
        let cell = x1_z
            .get(z)
            .ok_or_else(|| Error::EmptyStratum(format!("x=1, z={z:?}")))?;
        theta2 += count as f64 * (cell.sum / cell.n as f64);
    }
    theta2 /= n0 as f64;

    Ok(Points { theta1, theta2, ybar0: s0 / n0 as f64, ybar1: s1 / n1 as f64 })
}

fn bootstrap_ses<F>(
    n: usize,
    spec: &BootstrapSpec,
    mut estimate: F,
) -> Result<([f64; 4], Vec<String>)>
where
    F: FnMut(&[usize]) -> Result<Points>,
{
    if spec.resamples == 0 {
        return Ok(([f64::NAN; 4], Vec::new()));
    }
    let mut draws: Vec<[f64; 4]> = Vec::with_capacity(spec.resamples);
    let mut failed = 0usize;
    for b in 0..spec.resamples {
        let mut rng = seeded_rng(spec.seed, b"plugin-boot", b as u64);
        let rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        match estimate(&rows) {
            Ok(p) => draws.push([p.tv(), p.x_de(), p.x_ie(), p.x_se()]),
            Err(_) => failed += 1,
        }
    }
    if draws.len() < spec.resamples / 2 {
        return Err(Error::EmptyStratum(format!(
            "{failed} of {} bootstrap resamples hit empty strata",
            spec.resamples
        )));
    }
    let mut se = [0.0; 4];
    for q in 0..4 {
        let vals: Vec<f64> = draws.iter().map(|d| d[q]).collect();
        se[q] = crate::stats::sample_sd(&vals);
    }
    let mut warnings = Vec::new();
    if failed > 0 {
        warnings.push(format!("{failed} bootstrap resamples skipped (empty strata)"));
    }
    Ok((se, warnings))
}

/// Identification-formula plug-in with empirical cell frequencies and means.
/// Requires discrete confounders and binary mediators; every treated cell
/// needed by the formulas must be non-empty.
pub fn plugin_strata(data: &Dataset, bootstrap: Option<BootstrapSpec>) -> Result<DecompositionReport> {
    let (z_keys, w_keys) = strata_keys(data)?;
    let x = data.protected_values();
    let y = data.outcome_values();
    let all_rows: Vec<usize> = (0..data.n).collect();
    let pts = plugin_strata_points(&x, &y, &z_keys, &w_keys, &all_rows)?;
    let n1 = x.iter().filter(|&&v| v == 1).count();
    let n0 = data.n - n1;
    let (se, warnings) = match &bootstrap {
        Some(spec) => {
            bootstrap_ses(data.n, spec, |rows| plugin_strata_points(&x, &y, &z_keys, &w_keys, rows))?
        }
        None => ([f64::NAN; 4], Vec::new()),
    };
    Ok(assemble(EstimatorKind::PluginStrata, pts, se, n0, n1, warnings))
}

fn plugin_model_points(x: &[u8], y: &[f64], fits: &NuisanceFits, rows: &[usize]) -> Result<Points> {
    let (mut s0, mut s1) = (0.0, 0.0);
    let (mut n0, mut n1) = (0usize, 0usize);
    let (mut t1, mut t2) = (0.0, 0.0);
    for &i in rows {
        if x[i] == 1 {
            s1 += y[i];
            n1 += 1;
        } else {
            s0 += y[i];
            n0 += 1;
            t1 += fits.mu1[i];
            t2 += fits.m1[i];
        }
    }
    if n0 == 0 || n1 == 0 {
        return Err(Error::EmptyGroup(format!("n0={n0}, n1={n1}")));
    }
    Ok(Points {
        theta1: t1 / n0 as f64,
        theta2: t2 / n0 as f64,
        ybar0: s0 / n0 as f64,
        ybar1: s1 / n1 as f64,
    })
}

/// Model plug-in: the same functionals with fitted nuisances in place of
/// stratum frequencies. theta1 averages treated-arm predictions at baseline
/// rows' (w, z); theta2 averages the treated-arm Z-only regression.
pub fn plugin_model(
    data: &Dataset,
    fits: &NuisanceFits,
    bootstrap: Option<BootstrapSpec>,
) -> Result<DecompositionReport> {
    check_fit_cover(data, fits)?;
    let x = data.protected_values();
    let y = data.outcome_values();
    let all_rows: Vec<usize> = (0..data.n).collect();
    let pts = plugin_model_points(&x, &y, fits, &all_rows)?;
    let n1 = x.iter().filter(|&&v| v == 1).count();
    let n0 = data.n - n1;
    let (se, warnings) = match &bootstrap {
        Some(spec) => bootstrap_ses(data.n, spec, |rows| plugin_model_points(&x, &y, fits, rows))?,
        None => ([f64::NAN; 4], Vec::new()),
    };
    Ok(assemble(EstimatorKind::PluginModel, pts, se, n0, n1, warnings))
}

fn check_fit_cover(data: &Dataset, fits: &NuisanceFits) -> Result<()> {
    if fits.mu1.len() != data.n {
        return Err(Error::BadConfig(format!(
            "nuisance fits cover {} rows, dataset has {}",
            fits.mu1.len(),
            data.n
        )));
    }
    Ok(())
}

/// Per-row pseudo-outcomes of the debiased estimator; exposed for reuse by
/// the counterfactual-direct-effect module and diagnostics.
pub struct PseudoOutcomes {
    /// Targets theta1 after division by the baseline share.
    pub psi1: Vec<f64>,
    /// Targets theta2 after division by the baseline share.
    pub psi2: Vec<f64>,
}

/// Build the influence-style pseudo-outcomes for both counterfactual means.
pub fn debiased_pseudo_outcomes(data: &Dataset, fits: &NuisanceFits) -> Result<PseudoOutcomes> {
    check_fit_cover(data, fits)?;
    let x = data.protected_values();
    let y = data.outcome_values();
    let n = data.n;
    let mut psi1 = Vec::with_capacity(n);
    let mut psi2 = Vec::with_capacity(n);
    for i in 0..n {
        if x[i] == 1 {
            psi1.push(fits.odds0[i] * (y[i] - fits.mu1[i]));
            let e1 = fits.e1[i];
            psi2.push(((1.0 - e1) / e1) * (y[i] - fits.m1[i]));
        } else {
            // three-term form: residual augmentation plus the nested mean
            psi1.push((fits.mu1[i] - fits.eta[i]) + fits.eta[i]);
            psi2.push(fits.m1[i]);
        }
    }
    Ok(PseudoOutcomes { psi1, psi2 })
}

/// One-step debiased decomposition with influence-function standard errors.
pub fn debiased_decomposition(data: &Dataset, fits: &NuisanceFits) -> Result<DecompositionReport> {
    let pseudo = debiased_pseudo_outcomes(data, fits)?;
    let x = data.protected_values();
    let y = data.outcome_values();
    let n = data.n;
    let n1 = x.iter().filter(|&&v| v == 1).count();
    let n0 = n - n1;
    if n0 == 0 || n1 == 0 {
        return Err(Error::EmptyGroup(format!("n0={n0}, n1={n1}")));
    }
    let pi0 = n0 as f64 / n as f64;
    let pi1 = 1.0 - pi0;

    let theta1: f64 = pseudo.psi1.iter().sum::<f64>() / n0 as f64;
    let theta2: f64 = pseudo.psi2.iter().sum::<f64>() / n0 as f64;
    let ybar0: f64 =
        y.iter().zip(&x).filter(|(_, &xi)| xi == 0).map(|(v, _)| v).sum::<f64>() / n0 as f64;
    let ybar1: f64 =
        y.iter().zip(&x).filter(|(_, &xi)| xi == 1).map(|(v, _)| v).sum::<f64>() / n1 as f64;
    let pts = Points { theta1, theta2, ybar0, ybar1 };

    // per-row influence contributions; the ratio-to-baseline structure gives
    // if(theta) = (psi - theta * 1{x0}) / pi0
    let mut se_acc = [0.0f64; 4];
    for i in 0..n {
        let ind0 = if x[i] == 0 { 1.0 } else { 0.0 };
        let ind1 = 1.0 - ind0;
        let if_t1 = (pseudo.psi1[i] - theta1 * ind0) / pi0;
        let if_t2 = (pseudo.psi2[i] - theta2 * ind0) / pi0;
        let if_y0 = ind0 * (y[i] - ybar0) / pi0;
        let if_y1 = ind1 * (y[i] - ybar1) / pi1;
        let if_tv = if_y1 - if_y0;
        let if_de = if_t1 - if_y0;
        let if_ie = if_t1 - if_t2;
        let if_se = if_t2 - if_y1;
        se_acc[0] += if_tv * if_tv;
        se_acc[1] += if_de * if_de;
        se_acc[2] += if_ie * if_ie;
        se_acc[3] += if_se * if_se;
    }
    let n_f = n as f64;
    let se = [
        se_acc[0].sqrt() / n_f,
        se_acc[1].sqrt() / n_f,
        se_acc[2].sqrt() / n_f,
        se_acc[3].sqrt() / n_f,
    ];

    let mut warnings = Vec::new();
    for (name, psi) in [("psi1", &pseudo.psi1), ("psi2", &pseudo.psi2)] {
        let spread = iqr(psi);
        let max_abs = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if spread > 0.0 && max_abs > 50.0 * spread {
            warnings.push(format!(
                "extreme weights: max |{name}| = {max_abs:.3} exceeds 50 x IQR = {:.3}",
                50.0 * spread
            ));
        }
    }

    Ok(assemble(EstimatorKind::Debiased, pts, se, n0, n1, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nuisance::{cross_fit, saturated_fits, GbtConfig, LearnerConfig, NuisanceConfig};
    use crate::sfm::dataset::Column;
    use crate::sfm::folds::assign_folds;
    use crate::sfm::schema::{SfmSchema, VariableSpec};
    use crate::synth::oracle::oracle_decomposition_exact;
    use crate::synth::reference::{desk_1, null_1};
    use crate::synth::sample::sample;
    use proptest::prelude::*;

    fn identity_holds(r: &DecompositionReport) {
        let lhs = r.x_de.estimate - r.x_ie.estimate - r.x_se.estimate;
        assert!((lhs - r.tv.estimate).abs() < 1e-10, "identity violated: {lhs} vs {}", r.tv.estimate);
        let disp = r.display.direct + r.display.indirect + r.display.spurious;
        assert!((disp - r.tv.estimate).abs() < 1e-10);
    }

    #[test]
    fn tv_zero_for_identical_groups() {
        let schema = SfmSchema::new(
            vec![
                VariableSpec::new("x", Role::Protected, Kind::Binary).unwrap(),
                VariableSpec::new("y", Role::Outcome, Kind::Continuous).unwrap(),
            ],
            "0",
            "1",
        )
        .unwrap();
        let d = Dataset::new(
            schema,
            4,
            vec![
                Column::complete(vec![0.0, 0.0, 1.0, 1.0]),
                Column::complete(vec![2.0, 2.0, 2.0, 2.0]),
            ],
        );
        let tv = tv_empirical(&d).unwrap();
        assert_eq!(tv.estimate, 0.0);
    }

    #[test]
    fn tv_is_definitional_mean_difference() {
        let schema = SfmSchema::new(
            vec![
                VariableSpec::new("x", Role::Protected, Kind::Binary).unwrap(),
                VariableSpec::new("y", Role::Outcome, Kind::Continuous).unwrap(),
            ],
            "0",
            "1",
        )
        .unwrap();
        let d = Dataset::new(
            schema,
            4,
            vec![
                Column::complete(vec![0.0, 0.0, 1.0, 1.0]),
                Column::complete(vec![0.2, 0.4, 0.9, 1.1]),
            ],
        );
        let tv = tv_empirical(&d).unwrap();
        assert!((tv.estimate - 0.7).abs() < 1e-12);
    }

    #[test]
    fn tv_matches_oracle_on_reference_model() {
        let spec = desk_1();
        let data = sample(&spec, 50_000).unwrap();
        let gt = oracle_decomposition_exact(&spec).unwrap();
        let tv = tv_empirical(&data).unwrap();
        assert!((tv.estimate - gt.tv).abs() < 4.0 * tv.se, "tv {} vs {}", tv.estimate, gt.tv);
    }

    #[test]
    fn strata_plugin_matches_oracle() {
        let spec = desk_1();
        let data = sample(&spec, 100_000).unwrap();
        let gt = oracle_decomposition_exact(&spec).unwrap();
        let r = plugin_strata(&data, Some(BootstrapSpec { resamples: 200, seed: 4 })).unwrap();
        identity_holds(&r);
        for (est, truth) in [
            (&r.tv, gt.tv),
            (&r.x_de, gt.x_de),
            (&r.x_ie, gt.x_ie),
            (&r.x_se, gt.x_se),
        ] {
            assert!(
                (est.estimate - truth).abs() < 4.0 * est.se,
                "estimate {} vs oracle {truth} (se {})",
                est.estimate,
                est.se
            );
        }
    }

    #[test]
    fn strata_plugin_collapses_without_z_and_w() {
        // only the direct path exists
        let schema = SfmSchema::new(
            vec![
                VariableSpec::new("x", Role::Protected, Kind::Binary).unwrap(),
                VariableSpec::new("y", Role::Outcome, Kind::Continuous).unwrap(),
            ],
            "0",
            "1",
        )
        .unwrap();
        let d = Dataset::new(
            schema,
            6,
            vec![
                Column::complete(vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]),
                Column::complete(vec![0.1, 0.2, 0.3, 1.1, 1.2, 1.3]),
            ],
        );
        let r = plugin_strata(&d, None).unwrap();
        assert_eq!(r.x_ie.estimate, 0.0);
        assert_eq!(r.x_se.estimate, 0.0);
        let tv = tv_empirical(&d).unwrap();
        assert!((r.x_de.estimate - tv.estimate).abs() < 1e-12);
    }

    #[test]
    fn strata_plugin_null_under_randomization() {
        // coin-flip treatment independent of everything
        let mut spec = desk_1();
        spec.x_model.intercept = 0.0;
        spec.x_model.coefs.clear();
        for m in &mut spec.mediators {
            m.x = 0.0;
        }
        spec.outcome.x = 0.0;
        spec.outcome.xz.clear();
        let data = sample(&spec, 100_000).unwrap();
        let r = plugin_strata(&data, Some(BootstrapSpec { resamples: 200, seed: 9 })).unwrap();
        for est in [&r.tv, &r.x_de, &r.x_ie, &r.x_se] {
            assert!(est.estimate.abs() < 4.0 * est.se, "{} vs se {}", est.estimate, est.se);
        }
    }

    #[test]
    fn strata_plugin_reports_offending_cell() {
        let spec = desk_1();
        let data = sample(&spec, 40).unwrap();
        // tiny sample: some treated cell is bound to be empty
        match plugin_strata(&data, None) {
            Err(Error::EmptyStratum(msg)) => assert!(msg.contains("x=1")),
            Ok(_) => panic!("expected an empty stratum at n=40"),
            Err(e) => panic!("unexpected error {e:?}"),
        }
    }

    #[test]
    fn model_plugin_equals_strata_plugin_with_saturated_fits() {
        let data = sample(&desk_1(), 5_000).unwrap();
        let fits = saturated_fits(&data).unwrap();
        let a = plugin_strata(&data, None).unwrap();
        let b = plugin_model(&data, &fits, None).unwrap();
        for (x, y) in [
            (a.tv.estimate, b.tv.estimate),
            (a.x_de.estimate, b.x_de.estimate),
            (a.x_ie.estimate, b.x_ie.estimate),
            (a.x_se.estimate, b.x_se.estimate),
        ] {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
    }

    #[test]
    fn model_plugin_has_zero_indirect_without_mediators() {
        // remove mediators: mu1 and m1 become the same regression
        let mut spec = desk_1();
        spec.mediators.clear();
        spec.outcome.w.clear();
        let data = sample(&spec, 3_000).unwrap();
        let folds = assign_folds(data.n, 5, 3).unwrap();
        let fits = cross_fit(&data, &folds, &NuisanceConfig::default()).unwrap();
        let r = plugin_model(&data, &fits, None).unwrap();
        assert_eq!(r.x_ie.estimate, 0.0);
    }

    fn fast_nuisance() -> NuisanceConfig {
        NuisanceConfig {
            outcome: LearnerConfig::GradientBoostedTrees(GbtConfig {
                n_trees: 80,
                min_leaf: 10,
                ..Default::default()
            }),
            mediator: LearnerConfig::GradientBoostedTrees(GbtConfig {
                n_trees: 80,
                min_leaf: 10,
                ..Default::default()
            }),
            nested: LearnerConfig::GradientBoostedTrees(GbtConfig {
                n_trees: 80,
                min_leaf: 10,
                ..Default::default()
            }),
            ..Default::default()
        }
    }

    #[test]
    fn debiased_covers_oracle_on_reference_model() {
        let spec = desk_1();
        let data = sample(&spec, 50_000).unwrap();
        let gt = oracle_decomposition_exact(&spec).unwrap();
        let folds = assign_folds(data.n, 10, 21).unwrap();
        let fits = cross_fit(&data, &folds, &fast_nuisance()).unwrap();
        let r = debiased_decomposition(&data, &fits).unwrap();
        identity_holds(&r);
        assert!(r.tv.covers(gt.tv), "tv {:?} vs {}", r.tv, gt.tv);
        assert!(r.x_de.covers(gt.x_de), "x_de {:?} vs {}", r.x_de, gt.x_de);
        assert!(r.x_ie.covers(gt.x_ie), "x_ie {:?} vs {}", r.x_ie, gt.x_ie);
        assert!(r.x_se.covers(gt.x_se), "x_se {:?} vs {}", r.x_se, gt.x_se);
    }

    #[test]
    fn debiased_x_se_is_robust_to_outcome_model_corruption() {
        let spec = desk_1();
        let data = sample(&spec, 30_000).unwrap();
        let gt = oracle_decomposition_exact(&spec).unwrap();
        let folds = assign_folds(data.n, 5, 22).unwrap();
        let mut fits = cross_fit(&data, &folds, &fast_nuisance()).unwrap();
        for v in &mut fits.mu1 {
            *v += 1.0;
        }
        let r = debiased_decomposition(&data, &fits).unwrap();
        assert!(
            (r.x_se.estimate - gt.x_se).abs() < 4.0 * r.x_se.se,
            "x_se {} vs oracle {} (se {})",
            r.x_se.estimate,
            gt.x_se,
            r.x_se.se
        );
    }

    #[test]
    fn debiased_null_components_are_zero() {
        let data = sample(&null_1(), 20_000).unwrap();
        let folds = assign_folds(data.n, 5, 23).unwrap();
        let fits = cross_fit(&data, &folds, &fast_nuisance()).unwrap();
        let r = debiased_decomposition(&data, &fits).unwrap();
        for est in [&r.tv, &r.x_de, &r.x_ie, &r.x_se] {
            assert!(est.estimate.abs() < 4.0 * est.se, "{} vs {}", est.estimate, est.se);
        }
    }

    #[test]
    fn fold_count_choice_is_stable() {
        let data = sample(&desk_1(), 20_000).unwrap();
        let f2 = assign_folds(data.n, 2, 31).unwrap();
        let f10 = assign_folds(data.n, 10, 31).unwrap();
        let r2 =
            debiased_decomposition(&data, &cross_fit(&data, &f2, &fast_nuisance()).unwrap())
                .unwrap();
        let r10 =
            debiased_decomposition(&data, &cross_fit(&data, &f10, &fast_nuisance()).unwrap())
                .unwrap();
        for (a, b) in [
            (&r2.tv, &r10.tv),
            (&r2.x_de, &r10.x_de),
            (&r2.x_ie, &r10.x_ie),
            (&r2.x_se, &r10.x_se),
        ] {
            let pooled = (a.se * a.se + b.se * b.se).sqrt();
            assert!(
                (a.estimate - b.estimate).abs() < 2.0 * pooled,
                "{} vs {} (pooled {pooled})",
                a.estimate,
                b.estimate
            );
        }
    }

    #[test]
    fn location_and_scale_equivariance() {
        let data = sample(&desk_1(), 4_000).unwrap();
        let fits = saturated_fits(&data).unwrap();
        let base = debiased_decomposition(&data, &fits).unwrap();

        // shift Y by a constant: components unchanged
        let mut shifted = data.clone();
        let y_idx = shifted.schema.index_of("y").unwrap();
        for v in &mut shifted.columns[y_idx].values {
            *v += 5.0;
        }
        let f_shift = saturated_fits(&shifted).unwrap();
        let r_shift = debiased_decomposition(&shifted, &f_shift).unwrap();
        assert!((r_shift.x_de.estimate - base.x_de.estimate).abs() < 1e-9);
        assert!((r_shift.x_ie.estimate - base.x_ie.estimate).abs() < 1e-9);
        assert!((r_shift.x_se.estimate - base.x_se.estimate).abs() < 1e-9);

        // scale Y: components scale
        let mut scaled = data.clone();
        for v in &mut scaled.columns[y_idx].values {
            *v *= 3.0;
        }
        let f_scale = saturated_fits(&scaled).unwrap();
        let r_scale = debiased_decomposition(&scaled, &f_scale).unwrap();
        assert!((r_scale.x_de.estimate - 3.0 * base.x_de.estimate).abs() < 1e-9);
        assert!((r_scale.tv.estimate - 3.0 * base.tv.estimate).abs() < 1e-9);
    }

    #[test]
    fn shares_sum_to_one_when_signs_agree() {
        let data = sample(&desk_1(), 60_000).unwrap();
        let fits = saturated_fits(&data).unwrap();
        let r = debiased_decomposition(&data, &fits).unwrap();
        let sh = r.shares.expect("tv is far from zero");
        let same_sign = [r.display.direct, r.display.indirect, r.display.spurious]
            .iter()
            .all(|c| c.signum() == r.tv.estimate.signum());
        if same_sign {
            assert!((sh.direct + sh.indirect + sh.spurious - 1.0).abs() < 1e-9);
        } else {
            panic!("reference model is built so all display components share tv's sign");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn identity_is_algebraic_for_any_fits(seed in 0u64..500) {
            // arbitrary nuisance values: the identity must still hold exactly
            let data = sample(&desk_1(), 200).unwrap();
            let mut rng = seeded_rng(seed, b"prop-fits", 0);
            let n = data.n;
            let rand_vec = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
                (0..n).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect()
            };
            let fits = NuisanceFits {
                mu1: rand_vec(&mut rng),
                mu0: rand_vec(&mut rng),
                e1: (0..n).map(|_| rng.gen::<f64>() * 0.8 + 0.1).collect(),
                odds0: (0..n).map(|_| rng.gen::<f64>() * 5.0 + 0.1).collect(),
                eta: rand_vec(&mut rng),
                m1: rand_vec(&mut rng),
                m0: rand_vec(&mut rng),
                clip: 0.01,
                e1_clipped: 0,
                odds_clipped: 0,
            };
            let r = debiased_decomposition(&data, &fits).unwrap();
            let lhs = r.x_de.estimate - r.x_ie.estimate - r.x_se.estimate;
            prop_assert!((lhs - r.tv.estimate).abs() < 1e-10);
            let m = plugin_model(&data, &fits, None).unwrap();
            let lhs = m.x_de.estimate - m.x_ie.estimate - m.x_se.estimate;
            prop_assert!((lhs - m.tv.estimate).abs() < 1e-10);
        }
    }
}

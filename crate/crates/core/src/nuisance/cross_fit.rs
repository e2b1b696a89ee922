//! Cross-fitted nuisance estimation.
//!
//! For every fold, all models are trained on the complement and used to
//! predict on the held-out rows, so no row is predicted by a model that saw
//! it. Training rows are put in a canonical value order first, making the
//! fits a function of the training multiset rather than row order.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::gbt::{fit_gbt, GbtConfig, GbtModel, Loss};
use super::linear::{ridge_linear, LinearModel};
use super::logistic::{fit_logistic, LogisticConfig, LogisticModel};
use crate::error::{Error, Result};
use crate::sfm::dataset::Dataset;
use crate::sfm::encode::encode;
use crate::sfm::folds::FoldAssignment;

/// Which learner family backs a nuisance function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "family")]
pub enum LearnerConfig {
    /// Logistic for classification; ridge linear for regression targets.
    #[serde(rename = "logistic_linear")]
    LogisticLinear(LogisticConfig),
    #[serde(rename = "gbt")]
    GradientBoostedTrees(GbtConfig),
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            LearnerConfig::LogisticLinear(c) => c.validate(),
            LearnerConfig::GradientBoostedTrees(c) => c.validate(),
        }
    }
}

/// Learner choices per nuisance function plus the propensity clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuisanceConfig {
    /// Outcome regressions mu(x, w, z) and m(x, z).
    pub outcome: LearnerConfig,
    /// Group propensity on confounders.
    pub propensity: LearnerConfig,
    /// Classifier of the group on (mediators, confounders) for the odds weight.
    pub mediator: LearnerConfig,
    /// Nested regression of predicted treated outcomes on confounders.
    pub nested: LearnerConfig,
    /// Probabilities are clipped into [clip, 1 - clip].
    pub clip: f64,
}

impl Default for NuisanceConfig {
    fn default() -> Self {
        NuisanceConfig {
            outcome: LearnerConfig::GradientBoostedTrees(GbtConfig::default()),
            propensity: LearnerConfig::LogisticLinear(LogisticConfig::default()),
            mediator: LearnerConfig::GradientBoostedTrees(GbtConfig::default()),
            nested: LearnerConfig::GradientBoostedTrees(GbtConfig::default()),
            clip: 0.01,
        }
    }
}

impl NuisanceConfig {
    pub fn validate(&self) -> Result<()> {
        self.outcome.validate()?;
        self.propensity.validate()?;
        self.mediator.validate()?;
        self.nested.validate()?;
        if !(self.clip > 0.0 && self.clip < 0.5) {
            return Err(Error::BadConfig("clip must be in (0, 0.5)".into()));
        }
        Ok(())
    }
}

/// Out-of-fold predictions consumed by the debiased estimators.
///
/// Per row: treated/control outcome regressions given (W, Z), the group
/// propensity on Z, the mediator odds weight, the nested regression on Z,
/// and the Z-only outcome regressions for both arms.
#[derive(Debug, Clone, PartialEq)]
pub struct NuisanceFits {
    pub mu1: Vec<f64>,
    pub mu0: Vec<f64>,
    pub e1: Vec<f64>,
    pub odds0: Vec<f64>,
    pub eta: Vec<f64>,
    pub m1: Vec<f64>,
    pub m0: Vec<f64>,
    pub clip: f64,
    pub e1_clipped: usize,
    pub odds_clipped: usize,
}

enum Fitted {
    Linear(LinearModel),
    Logistic(LogisticModel),
    Gbt(GbtModel),
}

impl Fitted {
    fn predict(&self, x: &Array2<f64>) -> Vec<f64> {
        match self {
            Fitted::Linear(m) => m.predict(x),
            Fitted::Logistic(m) => m.predict(x),
            Fitted::Gbt(m) => m.predict(x),
        }
    }
}

fn fit_regressor(x: &Array2<f64>, y: &[f64], cfg: &LearnerConfig) -> Result<Fitted> {
    match cfg {
        LearnerConfig::LogisticLinear(c) => Ok(Fitted::Linear(ridge_linear(x, y, c.l2_penalty)?)),
        LearnerConfig::GradientBoostedTrees(c) => {
            Ok(Fitted::Gbt(fit_gbt(x, y, Loss::Squared, c)?))
        }
    }
}

fn fit_classifier(x: &Array2<f64>, labels: &[f64], cfg: &LearnerConfig) -> Result<Fitted> {
    match cfg {
        LearnerConfig::LogisticLinear(c) => Ok(Fitted::Logistic(fit_logistic(x, labels, c)?)),
        LearnerConfig::GradientBoostedTrees(c) => {
            Ok(Fitted::Gbt(fit_gbt(x, labels, Loss::Logistic, c)?))
        }
    }
}

fn gather(m: &Array2<f64>, rows: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((rows.len(), m.ncols()));
    for (k, &r) in rows.iter().enumerate() {
        for j in 0..m.ncols() {
            out[[k, j]] = m[[r, j]];
        }
    }
    out
}

fn gather_vec(v: &[f64], rows: &[usize]) -> Vec<f64> {
    rows.iter().map(|&r| v[r]).collect()
}

/// Sort row indices by the full value vector, so fits depend only on the
/// training multiset (permuting rows inside one fold cannot perturb the
/// models other folds see).
fn canonical_order(data: &Dataset, rows: &mut [usize]) {
    rows.sort_by(|&a, &b| {
        for col in &data.columns {
            match col.values[a].partial_cmp(&col.values[b]) {
                Some(std::cmp::Ordering::Equal) | None => continue,
                Some(o) => return o,
            }
        }
        std::cmp::Ordering::Equal
    });
}

/// Train all nuisance models fold-by-fold and assemble out-of-fold predictions.
pub fn cross_fit(
    data: &Dataset,
    folds: &FoldAssignment,
    config: &NuisanceConfig,
) -> Result<NuisanceFits> {
    config.validate()?;
    if folds.fold_of.len() != data.n {
        return Err(Error::BadConfig(format!(
            "fold assignment covers {} rows, dataset has {}",
            folds.fold_of.len(),
            data.n
        )));
    }
    let enc = encode(data)?;
    let wz = enc.wz();
    let n = data.n;
    let x_f64: Vec<f64> = enc.x.iter().map(|&v| v as f64).collect();

    let mut fits = NuisanceFits {
        mu1: vec![0.0; n],
        mu0: vec![0.0; n],
        e1: vec![0.0; n],
        odds0: vec![0.0; n],
        eta: vec![0.0; n],
        m1: vec![0.0; n],
        m0: vec![0.0; n],
        clip: config.clip,
        e1_clipped: 0,
        odds_clipped: 0,
    };

    for f in 0..folds.k {
        let mut train = folds.complement_rows(f);
        canonical_order(data, &mut train);
        let fold_rows = folds.fold_rows(f);

        let train_x1: Vec<usize> = train.iter().copied().filter(|&i| enc.x[i] == 1).collect();
        let train_x0: Vec<usize> = train.iter().copied().filter(|&i| enc.x[i] == 0).collect();
        if train_x1.is_empty() || train_x0.is_empty() {
            return Err(Error::FoldCollapse(format!(
                "training complement of fold {f} lacks a group"
            )));
        }
        for (j, name) in enc.w_names.iter().enumerate() {
            let mut has = [false, false];
            for &i in &train {
                let v = enc.w[[i, j]];
                if v == 0.0 {
                    has[0] = true;
                } else {
                    has[1] = true;
                }
            }
            if !(has[0] && has[1]) {
                return Err(Error::FoldCollapse(format!(
                    "training complement of fold {f} lacks a level of '{name}'"
                )));
            }
        }

        let wz_x1 = gather(&wz, &train_x1);
        let wz_x0 = gather(&wz, &train_x0);
        let z_x1 = gather(&enc.z, &train_x1);
        let z_x0 = gather(&enc.z, &train_x0);
        let y_x1 = gather_vec(&enc.y, &train_x1);
        let y_x0 = gather_vec(&enc.y, &train_x0);

        let mu1_model = fit_regressor(&wz_x1, &y_x1, &config.outcome)?;
        let mu0_model = fit_regressor(&wz_x0, &y_x0, &config.outcome)?;
        let m1_model = fit_regressor(&z_x1, &y_x1, &config.outcome)?;
        let m0_model = fit_regressor(&z_x0, &y_x0, &config.outcome)?;

        let z_train = gather(&enc.z, &train);
        let x_train = gather_vec(&x_f64, &train);
        let e_model = fit_classifier(&z_train, &x_train, &config.propensity)?;

        let wz_train = gather(&wz, &train);
        let odds_model = fit_classifier(&wz_train, &x_train, &config.mediator)?;

        // nested regression: treated-arm predictions regressed on Z over
        // baseline-group training rows
        let mu1_on_x0 = mu1_model.predict(&wz_x0);
        let eta_model = fit_regressor(&z_x0, &mu1_on_x0, &config.nested)?;

        let wz_fold = gather(&wz, &fold_rows);
        let z_fold = gather(&enc.z, &fold_rows);
        let mu1_pred = mu1_model.predict(&wz_fold);
        let mu0_pred = mu0_model.predict(&wz_fold);
        let m1_pred = m1_model.predict(&z_fold);
        let m0_pred = m0_model.predict(&z_fold);
        let e_pred = e_model.predict(&z_fold);
        let odds_pred = odds_model.predict(&wz_fold);
        let eta_pred = eta_model.predict(&z_fold);

        for (k, &row) in fold_rows.iter().enumerate() {
            fits.mu1[row] = mu1_pred[k];
            fits.mu0[row] = mu0_pred[k];
            fits.m1[row] = m1_pred[k];
            fits.m0[row] = m0_pred[k];
            fits.eta[row] = eta_pred[k];

            let e_raw = e_pred[k];
            let e_clipped = e_raw.clamp(config.clip, 1.0 - config.clip);
            if e_clipped != e_raw {
                fits.e1_clipped += 1;
            }
            fits.e1[row] = e_clipped;

            let p_raw = odds_pred[k];
            let p_clipped = p_raw.clamp(config.clip, 1.0 - config.clip);
            if p_clipped != p_raw {
                fits.odds_clipped += 1;
            }
            fits.odds0[row] = (1.0 - p_clipped) / p_clipped;
        }
    }

    Ok(fits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sfm::folds::assign_folds;
    use crate::stats::quantile;
    use crate::synth::reference::{desk_1, null_1};
    use crate::synth::sample::sample;

    fn small_config() -> NuisanceConfig {
        NuisanceConfig {
            outcome: LearnerConfig::GradientBoostedTrees(GbtConfig {
                n_trees: 50,
                min_leaf: 5,
                ..Default::default()
            }),
            mediator: LearnerConfig::GradientBoostedTrees(GbtConfig {
                n_trees: 50,
                min_leaf: 5,
                ..Default::default()
            }),
            nested: LearnerConfig::GradientBoostedTrees(GbtConfig {
                n_trees: 50,
                min_leaf: 5,
                ..Default::default()
            }),
            ..Default::default()
        }
    }

    #[test]
    fn null_spec_propensity_is_flat() {
        let data = sample(&null_1(), 10_000).unwrap();
        let folds = assign_folds(data.n, 5, 3).unwrap();
        let fits = cross_fit(&data, &folds, &NuisanceConfig::default()).unwrap();
        let truth = 0.10;
        let close = fits.e1.iter().filter(|&&e| (e - truth).abs() <= 0.05).count();
        assert!(
            close as f64 / data.n as f64 >= 0.95,
            "only {} of {} within 0.05",
            close,
            data.n
        );
    }

    #[test]
    fn randomized_treatment_gives_unit_odds() {
        // coin-flip treatment, no treatment->mediator path
        let mut spec = desk_1();
        spec.x_model.intercept = 0.0;
        spec.x_model.coefs.clear();
        for m in &mut spec.mediators {
            m.x = 0.0;
        }
        let data = sample(&spec, 10_000).unwrap();
        let folds = assign_folds(data.n, 5, 3).unwrap();
        let fits = cross_fit(&data, &folds, &NuisanceConfig::default()).unwrap();
        let med = quantile(&fits.odds0, 0.5);
        assert!((0.8..=1.25).contains(&med), "median odds0 = {med}");
    }

    #[test]
    fn probabilities_stay_interior_and_odds_positive() {
        let data = sample(&desk_1(), 3_000).unwrap();
        let folds = assign_folds(data.n, 5, 11).unwrap();
        let fits = cross_fit(&data, &folds, &small_config()).unwrap();
        for i in 0..data.n {
            assert!(fits.e1[i] > 0.0 && fits.e1[i] < 1.0);
            assert!(fits.e1[i] >= fits.clip && fits.e1[i] <= 1.0 - fits.clip);
            assert!(fits.odds0[i].is_finite() && fits.odds0[i] > 0.0);
        }
    }

    #[test]
    fn deterministic_given_inputs() {
        let data = sample(&desk_1(), 1_500).unwrap();
        let folds = assign_folds(data.n, 3, 5).unwrap();
        let a = cross_fit(&data, &folds, &small_config()).unwrap();
        let b = cross_fit(&data, &folds, &small_config()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn out_of_fold_purity_under_within_fold_permutation() {
        let data = sample(&desk_1(), 900).unwrap();
        let folds = assign_folds(data.n, 3, 5).unwrap();
        let base = cross_fit(&data, &folds, &small_config()).unwrap();

        // swap two rows inside fold 0 and refit
        let f0 = folds.fold_rows(0);
        let (i, j) = (f0[0], f0[f0.len() / 2]);
        let mut permuted = data.clone();
        for col in &mut permuted.columns {
            col.values.swap(i, j);
            col.missing.swap(i, j);
        }
        let swapped = cross_fit(&permuted, &folds, &small_config()).unwrap();

        for row in 0..data.n {
            if folds.fold_of[row] != 0 {
                assert_eq!(base.mu1[row], swapped.mu1[row], "row {row}");
                assert_eq!(base.mu0[row], swapped.mu0[row], "row {row}");
                assert_eq!(base.e1[row], swapped.e1[row], "row {row}");
                assert_eq!(base.odds0[row], swapped.odds0[row], "row {row}");
                assert_eq!(base.eta[row], swapped.eta[row], "row {row}");
                assert_eq!(base.m1[row], swapped.m1[row], "row {row}");
                assert_eq!(base.m0[row], swapped.m0[row], "row {row}");
            }
        }
    }

    #[test]
    fn fold_collapse_is_detected() {
        // tiny dataset where one complement loses the treated group
        let mut data = sample(&desk_1(), 12).unwrap();
        let x_idx = data.schema.index_of("x").unwrap();
        for v in &mut data.columns[x_idx].values {
            *v = 0.0;
        }
        // put the only treated rows inside fold 0
        let folds = assign_folds(data.n, 3, 2).unwrap();
        let f0 = folds.fold_rows(0);
        data.columns[x_idx].values[f0[0]] = 1.0;
        let cfg = NuisanceConfig {
            outcome: LearnerConfig::GradientBoostedTrees(GbtConfig {
                min_leaf: 1,
                ..Default::default()
            }),
            ..Default::default()
        };
        assert!(matches!(
            cross_fit(&data, &folds, &cfg),
            Err(Error::FoldCollapse(_))
        ));
    }
}

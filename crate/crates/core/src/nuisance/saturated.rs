//! Fully saturated in-sample nuisance values on discrete data.
//!
//! Every prediction is the exact empirical statistic of the row's stratum
//! cell, which makes model-based plug-in estimates coincide with the
//! stratum-frequency estimator. Diagnostic device; these are not
//! cross-fitted.

use std::collections::BTreeMap;

use super::cross_fit::NuisanceFits;
use crate::error::{Error, Result};
use crate::sfm::dataset::Dataset;
use crate::sfm::schema::{Kind, Role};

type Key = Vec<u16>;

fn discrete_keys(data: &Dataset, role: Role) -> Result<Vec<Key>> {
    let mut keys = vec![Vec::new(); data.n];
    for (var, col) in data.schema.variables.iter().zip(&data.columns) {
        if var.role != role {
            continue;
        }
        if !var.kind.is_discrete() {
            return Err(Error::BadConfig(format!(
                "saturated fits need discrete variables; '{}' is continuous",
                var.name
            )));
        }
        if matches!(var.kind, Kind::Categorical { .. }) && var.role == Role::Mediator {
            return Err(Error::BadConfig(format!(
                "saturated fits need binary mediators; '{}' is categorical",
                var.name
            )));
        }
        for i in 0..data.n {
            keys[i].push(col.values[i] as u16);
        }
    }
    Ok(keys)
}

#[derive(Default, Clone)]
struct Cell {
    n: usize,
    sum_y: f64,
}

impl Cell {
    fn mean(&self) -> f64 {
        self.sum_y / self.n as f64
    }
}

/// Exact stratum statistics in place of fitted models.
pub fn saturated_fits(data: &Dataset) -> Result<NuisanceFits> {
    if let Some((variable, row)) = data.first_missing() {
        return Err(Error::MissingData { variable, row });
    }
    let z_keys = discrete_keys(data, Role::Confounder)?;
    let w_keys = discrete_keys(data, Role::Mediator)?;
    let x = data.protected_values();
    let y = data.outcome_values();
    let n = data.n;

    // cell tallies
    let mut xwz: BTreeMap<(u8, Key, Key), Cell> = BTreeMap::new();
    let mut xz: BTreeMap<(u8, Key), Cell> = BTreeMap::new();
    let mut z_count: BTreeMap<Key, usize> = BTreeMap::new();
    for i in 0..n {
        let e = xwz.entry((x[i], w_keys[i].clone(), z_keys[i].clone())).or_default();
        e.n += 1;
        e.sum_y += y[i];
        let e = xz.entry((x[i], z_keys[i].clone())).or_default();
        e.n += 1;
        e.sum_y += y[i];
        *z_count.entry(z_keys[i].clone()).or_default() += 1;
    }

    let cell_mean = |x_val: u8, w: &Key, z: &Key| -> Result<f64> {
        xwz.get(&(x_val, w.clone(), z.clone()))
            .map(Cell::mean)
            .ok_or_else(|| {
                Error::EmptyStratum(format!("x={x_val}, w={w:?}, z={z:?}"))
            })
    };
    let zx_mean = |x_val: u8, z: &Key| -> Result<f64> {
        xz.get(&(x_val, z.clone()))
            .map(Cell::mean)
            .ok_or_else(|| Error::EmptyStratum(format!("x={x_val}, z={z:?}")))
    };

    let mut fits = NuisanceFits {
        mu1: vec![0.0; n],
        mu0: vec![0.0; n],
        e1: vec![0.0; n],
        odds0: vec![0.0; n],
        eta: vec![0.0; n],
        m1: vec![0.0; n],
        m0: vec![0.0; n],
        clip: 0.0,
        e1_clipped: 0,
        odds_clipped: 0,
    };

    // nested mean per z stratum: average treated-arm cell mean over the
    // baseline group's mediator distribution
    let mut eta_of: BTreeMap<Key, f64> = BTreeMap::new();
    for (z, _) in &z_count {
        let n_z_x0 = xz.get(&(0, z.clone())).map(|c| c.n).unwrap_or(0);
        if n_z_x0 == 0 {
            continue;
        }
        let mut acc = 0.0;
        for ((x_val, w, zz), cell) in &xwz {
            if *x_val == 0 && zz == z {
                acc += cell.n as f64 * cell_mean(1, w, z)?;
            }
        }
        eta_of.insert(z.clone(), acc / n_z_x0 as f64);
    }

    for i in 0..n {
        let z = &z_keys[i];
        let w = &w_keys[i];
        fits.mu1[i] = cell_mean(1, w, z)?;
        fits.mu0[i] = cell_mean(0, w, z)?;
        fits.m1[i] = zx_mean(1, z)?;
        fits.m0[i] = zx_mean(0, z)?;
        let n_z = z_count[z] as f64;
        let n_z_x1 = xz.get(&(1, z.clone())).map(|c| c.n).unwrap_or(0) as f64;
        fits.e1[i] = n_z_x1 / n_z;
        let n_cell_x1 = xwz.get(&(1, w.clone(), z.clone())).map(|c| c.n).unwrap_or(0) as f64;
        let n_cell_x0 = xwz.get(&(0, w.clone(), z.clone())).map(|c| c.n).unwrap_or(0) as f64;
        if n_cell_x1 == 0.0 {
            return Err(Error::EmptyStratum(format!("x=1, w={w:?}, z={z:?}")));
        }
        fits.odds0[i] = n_cell_x0 / n_cell_x1;
        fits.eta[i] = *eta_of
            .get(z)
            .ok_or_else(|| Error::EmptyStratum(format!("x=0, z={z:?}")))?;
    }

    Ok(fits)
}

//! Named reference models shipped with the crate.
//!
//! `null-1` has no dependence on the protected attribute anywhere, so every
//! causal quantity is exactly zero. `desk-1` is a small discrete model with
//! confounding, mediation, effect heterogeneity, and a roughly 10% treated
//! share — the workhorse fixture for estimator checks.

use std::collections::BTreeMap;

use super::spec::{
    ConfounderDist, DiscreteVar, LogitModel, MediatorModel, OutcomeModel, ScmSpec,
};
use crate::sfm::schema::Kind;

fn coefs(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn desk_confounders() -> ConfounderDist {
    ConfounderDist::Finite {
        // (z1, ses) with ses fastest: z1=0 {low, mid, high}, z1=1 {low, mid, high}
        probs: vec![0.18, 0.16, 0.14, 0.12, 0.18, 0.22],
        variables: vec![
            DiscreteVar { name: "z1".into(), kind: Kind::Binary },
            DiscreteVar {
                name: "ses".into(),
                kind: Kind::Categorical {
                    levels: vec!["low".into(), "mid".into(), "high".into()],
                    reference: "low".into(),
                },
            },
        ],
    }
}

/// Discrete two-confounder, two-mediator model with moderate confounding,
/// mediation, and treatment-effect heterogeneity. P(X=1) is about 0.10 and
/// the marginal outcome SD is close to 1.
pub fn desk_1() -> ScmSpec {
    ScmSpec {
        name: "desk-1".into(),
        seed: 13,
        x_name: "x".into(),
        y_name: "y".into(),
        confounders: desk_confounders(),
        x_model: LogitModel {
            intercept: -1.75,
            coefs: coefs(&[("z1", -0.5), ("ses=mid", -0.25), ("ses=high", -0.45)]),
        },
        mediators: vec![
            MediatorModel {
                name: "w1".into(),
                intercept: -0.4,
                x: -0.8,
                z: coefs(&[("z1", 0.5), ("ses=mid", 0.2), ("ses=high", 0.4)]),
                w: BTreeMap::new(),
            },
            MediatorModel {
                name: "w2".into(),
                intercept: -0.9,
                x: 0.7,
                z: coefs(&[("z1", 0.3), ("ses=high", 0.3)]),
                w: coefs(&[("w1", 0.6)]),
            },
        ],
        outcome: OutcomeModel {
            intercept: 0.2,
            x: -0.35,
            z: coefs(&[("z1", 0.4), ("ses=mid", 0.2), ("ses=high", 0.45)]),
            w: coefs(&[("w1", 0.5), ("w2", -0.3)]),
            xz: coefs(&[("z1", -0.25), ("ses=high", -0.15)]),
            sigma: 0.8,
        },
    }
}

/// Same graph as `desk-1` but with every pathway into or out of the protected
/// attribute switched off: X is an independent coin with P(X=1)=0.10.
pub fn null_1() -> ScmSpec {
    ScmSpec {
        name: "null-1".into(),
        seed: 7,
        x_name: "x".into(),
        y_name: "y".into(),
        confounders: desk_confounders(),
        x_model: LogitModel {
            // logit(0.10)
            intercept: -2.197224577336220,
            coefs: BTreeMap::new(),
        },
        mediators: vec![
            MediatorModel {
                name: "w1".into(),
                intercept: -0.4,
                x: 0.0,
                z: coefs(&[("z1", 0.5), ("ses=mid", 0.2), ("ses=high", 0.4)]),
                w: BTreeMap::new(),
            },
            MediatorModel {
                name: "w2".into(),
                intercept: -0.9,
                x: 0.0,
                z: coefs(&[("z1", 0.3), ("ses=high", 0.3)]),
                w: coefs(&[("w1", 0.6)]),
            },
        ],
        outcome: OutcomeModel {
            intercept: 0.2,
            x: 0.0,
            z: coefs(&[("z1", 0.4), ("ses=mid", 0.2), ("ses=high", 0.45)]),
            w: coefs(&[("w1", 0.5), ("w2", -0.3)]),
            xz: BTreeMap::new(),
            sigma: 0.8,
        },
    }
}

/// Look up a shipped reference model by name.
pub fn by_name(name: &str) -> Option<ScmSpec> {
    match name {
        "desk-1" => Some(desk_1()),
        "null-1" => Some(null_1()),
        _ => None,
    }
}

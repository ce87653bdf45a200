//! End-to-end reproductions, each a deterministic function of an
//! [`ExperimentConfig`] that returns an [`ExperimentReport`].
//!
//! Every path draws from its own stream `(seed, tag, index)`, and per-path
//! results are collected in index order, so reports do not depend on the
//! number of worker threads.

mod bessel;
mod config;
mod counterexample;
mod fourth_moment;
mod gx;
mod ito;
mod kl;
mod report;
mod sign_chaos;
mod sign_dds;

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

pub use bessel::exp_bessel;
pub use config::ExperimentConfig;
pub use counterexample::{closed_form_martingale, counterexample_chaos, exp_counterexample, CounterexamplePath};
pub use fourth_moment::exp_fourth_moment;
pub use gx::exp_gx;
pub use ito::exp_ito_identities;
pub use kl::{exp_kl_reconstruct, kl_basis, KlBasis};
pub use report::{ExperimentReport, Rule, TestVerdict};
pub use sign_chaos::exp_sign_chaos;
pub use sign_dds::exp_sign_dds;

use crate::path_sim::norm_cdf;
use crate::stat_tests::{ks_statistic, ks_threshold, KsThreshold};
use crate::Result;

/// Stream namespaces, one per experiment.
pub(crate) mod tags {
    pub const SIGN_DDS: u16 = 1;
    pub const BESSEL: u16 = 2;
    pub const COUNTEREXAMPLE: u16 = 3;
    pub const NESTED: u16 = 4;
    pub const SIGN_CHAOS: u16 = 5;
    pub const KL: u16 = 6;
    pub const FOURTH: u16 = 7;
    pub const ITO: u16 = 8;
    pub const GX: u16 = 9;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ExperimentKind {
    SignDds,
    Bessel,
    Counterexample,
    SignChaos,
    KlReconstruct,
    FourthMoment,
    ItoIdentities,
    Gx,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::SignDds,
        ExperimentKind::Bessel,
        ExperimentKind::Counterexample,
        ExperimentKind::SignChaos,
        ExperimentKind::KlReconstruct,
        ExperimentKind::FourthMoment,
        ExperimentKind::ItoIdentities,
        ExperimentKind::Gx,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SignDds => "sign-dds",
            ExperimentKind::Bessel => "bessel",
            ExperimentKind::Counterexample => "counterexample",
            ExperimentKind::SignChaos => "sign-chaos",
            ExperimentKind::KlReconstruct => "kl-reconstruct",
            ExperimentKind::FourthMoment => "fourth-moment",
            ExperimentKind::ItoIdentities => "ito-identities",
            ExperimentKind::Gx => "gx",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Runs one experiment and stamps its runtime.
pub fn run_experiment(kind: ExperimentKind, config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let mut report = match kind {
        ExperimentKind::SignDds => exp_sign_dds(config),
        ExperimentKind::Bessel => exp_bessel(config),
        ExperimentKind::Counterexample => exp_counterexample(config),
        ExperimentKind::SignChaos => exp_sign_chaos(config),
        ExperimentKind::KlReconstruct => exp_kl_reconstruct(config),
        ExperimentKind::FourthMoment => exp_fourth_moment(config),
        ExperimentKind::ItoIdentities => exp_ito_identities(config),
        ExperimentKind::Gx => exp_gx(config),
    }?;
    report.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

pub fn run_all(config: &ExperimentConfig) -> Result<Vec<ExperimentReport>> {
    ExperimentKind::ALL.iter().map(|&k| run_experiment(k, config)).collect()
}

/// `f(0), ..., f(n-1)` in parallel, collected in index order.
pub(crate) fn par_collect<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// KS statistic of `sample` against the standard normal with its null threshold.
pub(crate) fn ks_normal(sample: &[f64], config: &ExperimentConfig) -> Result<(f64, KsThreshold)> {
    let d = ks_statistic(sample, norm_cdf)?;
    Ok((d, ks_threshold(sample.len(), config.alpha, config.seed)?))
}

pub(crate) fn column<T>(rows: &[T], f: impl Fn(&T) -> f64) -> Vec<f64> {
    rows.iter().map(f).collect()
}

//! Fourth moments of fixed-chaos and finite-sum vectors: analytic values
//! from the product formula, cross-checked by Monte Carlo.

use super::{par_collect, tags, ExperimentConfig, ExperimentKind, ExperimentReport, TestVerdict};
use crate::chaos_algebra::{fourth_moment, ChaosVector};
use crate::grid_kernels::{symmetrize, zero_diagonal, GridFunction, GridKernel, RankOnePower};
use crate::path_sim::{norm_cdf, sample_path, ChaosEvaluator, RngStream};
use crate::stat_tests::{ks_statistic, ks_threshold, mean_se};
use crate::Result;

/// Grid of the random dense kernels.
const DENSE_GRID: usize = 6;
/// Stream indices at and above this are reserved for kernel draws.
const KERNEL_STREAM: u64 = 1 << 40;
/// Minimal excess kurtosis counted as strictly positive.
const EXCESS_MARGIN: f64 = 1e-8;

struct Case {
    name: &'static str,
    vector: ChaosVector,
    gaussian: bool,
}

/// Unit-variance sum of random symmetric diagonal-free kernels of the given
/// orders, weighted equally.
fn random_dense(seed: u64, index: u64, orders: &[usize]) -> Result<ChaosVector> {
    let mut rng = RngStream::tagged(seed, tags::FOURTH, KERNEL_STREAM + index);
    let mut v = ChaosVector::zero(DENSE_GRID)?;
    for &n in orders {
        let k = GridKernel::from_fn(n, DENSE_GRID, |_| rng.next_normal())?;
        let k = zero_diagonal(&symmetrize(&k)?);
        let part = ChaosVector::from_kernel(k)?;
        v = v.add(&part.scaled(1.0 / part.second_moment().sqrt()))?;
    }
    Ok(v.scaled(1.0 / v.second_moment().sqrt()))
}

fn battery(config: &ExperimentConfig) -> Result<Vec<Case>> {
    let e1 = GridFunction::constant(config.grid, 1.0)?;
    let rank_one = |p: usize| ChaosVector::from_rank_one(RankOnePower::new(e1.clone(), p, 1.0));
    let s = config.seed;
    Ok(vec![
        Case { name: "i1_rank_one", vector: rank_one(1)?, gaussian: true },
        Case { name: "i2_rank_one", vector: rank_one(2)?, gaussian: false },
        Case { name: "i3_rank_one", vector: rank_one(3)?, gaussian: false },
        Case { name: "i1_dense", vector: random_dense(s, 0, &[1])?, gaussian: true },
        Case { name: "i2_dense", vector: random_dense(s, 1, &[2])?, gaussian: false },
        Case { name: "i1_i2_dense", vector: random_dense(s, 2, &[1, 2])?, gaussian: false },
        Case { name: "i2_i3_dense", vector: random_dense(s, 3, &[2, 3])?, gaussian: false },
        Case { name: "i1_i2_i3_dense", vector: random_dense(s, 4, &[1, 2, 3])?, gaussian: false },
    ])
}

pub fn exp_fourth_moment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let kind = ExperimentKind::FourthMoment;
    let p = config.paths_for(kind);
    let mut report = ExperimentReport::new(kind.name(), config);
    let threshold = ks_threshold(p, config.alpha, config.seed)?;
    for (c, case) in battery(config)?.into_iter().enumerate() {
        let f = &case.vector;
        let var = f.second_moment();
        let analytic = fourth_moment(f)?;
        let excess = analytic / (var * var) - 3.0;
        let name = case.name;
        report.exact(&format!("{name}_fourth_analytic"), analytic);
        report.exact(&format!("{name}_excess_kurtosis"), excess);
        if case.gaussian {
            report.test(&format!("{name}_fourth_is_3"), TestVerdict::le((analytic - 3.0 * var * var).abs(), 1e-9));
        } else {
            report.test(&format!("{name}_excess_positive"), TestVerdict::gt(excess, EXCESS_MARGIN));
        }

        let m = f.resolution();
        let evaluator = ChaosEvaluator::new(f, m)?;
        let base = (c as u64) << 32;
        let values = par_collect(p, |i| {
            let path = sample_path(&mut RngStream::tagged(config.seed, tags::FOURTH, base + i as u64), m)?;
            evaluator.evaluate(&path)
        })?;
        let fourth = mean_se(&values.iter().map(|v| v.powi(4)).collect::<Vec<_>>())?;
        report.estimate(&format!("{name}_fourth_mc"), fourth);
        report.test(&format!("{name}_fourth_mc_match"), TestVerdict::within(&fourth, analytic, 4.0));
        let sd = var.sqrt();
        let d = ks_statistic(&values.iter().map(|v| (v - f.mean()) / sd).collect::<Vec<_>>(), norm_cdf)?;
        let verdict =
            if case.gaussian { TestVerdict::ks_accept(d, &threshold) } else { TestVerdict::ks_reject(d, &threshold) };
        let suffix = if case.gaussian { "ks_accepts_normal" } else { "ks_rejects_normal" };
        report.test(&format!("{name}_{suffix}"), verdict);
        report.sample(name, values);
    }
    Ok(report)
}

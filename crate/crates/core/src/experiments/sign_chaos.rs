//! Truncations of `sign(W(h)) = sum_k b_{2k+1} I_{2k+1}(h^{⊗(2k+1)})`.

use std::f64::consts::{FRAC_2_PI, SQRT_2};

use super::{column, par_collect, tags, ExperimentConfig, ExperimentKind, ExperimentReport, TestVerdict};
use crate::chaos_algebra::{sign_chaos, sign_partial_norm};
use crate::grid_kernels::GridFunction;
use crate::path_sim::{sample_path, sign, wiener_integral, ChaosEvaluator, RngStream};
use crate::stat_tests::mean_se;
use crate::{Error, Result};

/// Largest truncation index accepted.
pub const MAX_SIGN_TRUNC: usize = 15;

pub fn exp_sign_chaos(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let kind = ExperimentKind::SignChaos;
    let k_max = config.trunc_for(kind);
    if k_max > MAX_SIGN_TRUNC {
        return Err(Error::arg(format!("sign truncation {k_max} exceeds {MAX_SIGN_TRUNC}")));
    }
    let m = config.grid;
    if !m.is_multiple_of(2) {
        return Err(Error::arg(format!("sign-chaos needs an even grid, got {m}")));
    }
    let mut report = ExperimentReport::new(kind.name(), config);

    let s: Vec<f64> = (0..=MAX_SIGN_TRUNC).map(sign_partial_norm).collect();
    for (k, v) in s.iter().enumerate() {
        report.exact(&format!("s_{k:02}"), *v);
    }
    let min_step = s.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    report.test("s_strictly_increasing", TestVerdict::gt(min_step, 0.0));
    report.test("s_below_one", TestVerdict::lt(s[MAX_SIGN_TRUNC], 1.0));
    report.test("s0_is_2_over_pi", TestVerdict::le((s[0] - FRAC_2_PI).abs(), 0.0));

    let h = GridFunction::from_fn(m, |t| if t >= 0.5 { SQRT_2 } else { 0.0 })?;
    let f = sign_chaos(&h, k_max)?;
    let evaluator = ChaosEvaluator::new(&f, m)?;
    let p = config.paths_for(kind);
    let err = par_collect(p, |i| {
        let path = sample_path(&mut RngStream::tagged(config.seed, tags::SIGN_CHAOS, i as u64), m)?;
        Ok((evaluator.evaluate(&path)? - sign(wiener_integral(&h, &path)?)).powi(2))
    })?;
    let e = mean_se(&err)?;
    let tail = 1.0 - s[k_max];
    report.estimate("l2_error", e);
    report.exact("tail_1_minus_s_k", tail);
    report.test("l2_error_matches_tail", TestVerdict::within(&e, tail, 4.0));
    report.sample("sq_error", column(&err, |v| *v));
    Ok(report)
}

//! `G_X = <DX, -D L^{-1} X>` and the Stein residual `E[e^{itX} (1 - G_X)]`,
//! which vanishes for Gaussian `X` and not for the second chaos.

use std::f64::consts::SQRT_2;

use super::{par_collect, tags, ExperimentConfig, ExperimentKind, ExperimentReport, TestVerdict};
use crate::chaos_algebra::{expectation, gamma_G, ChaosVector};
use crate::grid_kernels::{GridFunction, RankOnePower, EXACT_TOL};
use crate::path_sim::{sample_path, ChaosEvaluator, RngStream};
use crate::stat_tests::mean_se;
use crate::Result;

pub const RESIDUAL_TIMES: [f64; 3] = [0.5, 1.0, 2.0];

/// Deviation of `F` from the constant 1: `|E F - 1|` plus the kernel norm.
fn distance_from_one(f: &ChaosVector) -> f64 {
    let kernels: f64 = f.orders().filter(|(n, _)| *n > 0).map(|(_, k)| k.norm_sq()).sum();
    (f.mean() - 1.0).abs() + kernels.sqrt()
}

/// Monte Carlo `E[e^{itX}(1 - G_X)]`: modulus, and the standard error of the
/// per-path values projected on the direction of the mean.
fn residuals(x: &ChaosVector, config: &ExperimentConfig, stream: u64) -> Result<Vec<(f64, f64, f64, f64)>> {
    let m = x.resolution();
    let fx = ChaosEvaluator::new(x, m)?;
    let fg = ChaosEvaluator::new(&gamma_G(x)?, m)?;
    let p = config.paths_for(ExperimentKind::Gx);
    let pairs = par_collect(p, |i| {
        let path = sample_path(&mut RngStream::tagged(config.seed, tags::GX, (stream << 32) + i as u64), m)?;
        Ok((fx.evaluate(&path)?, fg.evaluate(&path)?))
    })?;
    RESIDUAL_TIMES
        .iter()
        .map(|&t| {
            let re: Vec<f64> = pairs.iter().map(|(x, g)| (t * x).cos() * (1.0 - g)).collect();
            let im: Vec<f64> = pairs.iter().map(|(x, g)| (t * x).sin() * (1.0 - g)).collect();
            let (er, ei) = (mean_se(&re)?, mean_se(&im)?);
            let modulus = er.value.hypot(ei.value);
            let (c, s) = if modulus > 0.0 { (er.value / modulus, ei.value / modulus) } else { (1.0, 0.0) };
            let proj: Vec<f64> = re.iter().zip(&im).map(|(a, b)| a * c + b * s).collect();
            Ok((er.value, ei.value, modulus, mean_se(&proj)?.stderr))
        })
        .collect()
}

pub fn exp_gx(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let kind = ExperimentKind::Gx;
    let m = config.grid;
    let mut report = ExperimentReport::new(kind.name(), config);

    let flat = GridFunction::constant(m, 1.0)?;
    let ramp = GridFunction::from_fn(m, |t| t)?;
    let ramp = ramp.scaled(1.0 / ramp.norm());
    let mut worst = 0.0f64;
    for h in [&flat, &ramp] {
        worst = worst.max(distance_from_one(&gamma_G(&ChaosVector::first_order(h))?));
    }
    report.exact("gaussian_g_deviation", worst);
    report.test("gaussian_g_is_one", TestVerdict::le(worst, EXACT_TOL));

    let second = ChaosVector::from_rank_one(RankOnePower::new(flat.clone(), 2, 1.0 / SQRT_2))?;
    let mut duality = 0.0f64;
    for v in [&second, &ChaosVector::first_order(&flat), &ChaosVector::first_order(&ramp)] {
        duality = duality.max((expectation(&gamma_G(v)?) - v.second_moment()).abs());
    }
    let third = ChaosVector::from_rank_one(RankOnePower::new(flat.clone(), 3, 1.0 / 6f64.sqrt()))?;
    let mixed = second.add(&third)?.scaled(1.0 / 2f64.sqrt());
    for v in [&third, &mixed] {
        duality = duality.max((expectation(&gamma_G(v)?) - 1.0).abs());
    }
    report.exact("unit_variance_e_g_deviation", duality);
    report.test("unit_variance_e_g_is_one", TestVerdict::le(duality, EXACT_TOL));

    for (label, x, stream, gaussian) in
        [("i2", &second, 0u64, false), ("i1", &ChaosVector::first_order(&flat), 1, true)]
    {
        for (&t, (re, im, modulus, se)) in RESIDUAL_TIMES.iter().zip(residuals(x, config, stream)?) {
            let key = format!("{label}_residual_t{t}");
            report.exact(&format!("{key}_re"), re);
            report.exact(&format!("{key}_im"), im);
            report.estimate(&key, crate::stat_tests::Estimate { value: modulus, stderr: se });
            let verdict = if gaussian {
                TestVerdict::le(modulus, 4.0 * se + EXACT_TOL)
            } else {
                TestVerdict::gt(modulus, 4.0 * se)
            };
            report.test(&format!("{key}_{}", if gaussian { "vanishes" } else { "nonzero" }), verdict);
        }
    }
    Ok(report)
}

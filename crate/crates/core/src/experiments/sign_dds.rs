//! `Y = int_0^1 sign(W_s) dW_s` is a Brownian motion at time 1 and its
//! bracket is `t` exactly.

use super::{column, ks_normal, par_collect, tags, ExperimentConfig, ExperimentKind, ExperimentReport, TestVerdict};
use crate::dds_timechange::{dds_evaluate, stopping_summary, MartingalePath};
use crate::path_sim::{ito_integral, sample_path, sign, RngStream};
use crate::stat_tests::mean_se;
use crate::Result;

struct Row {
    y: f64,
    t: f64,
    beta_half: f64,
    bracket_dev: f64,
    dds_dev: f64,
}

pub fn exp_sign_dds(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let p = config.paths_for(ExperimentKind::SignDds);
    let n = config.steps_eff();
    let rows = par_collect(p, |i| {
        let path = sample_path(&mut RngStream::tagged(config.seed, tags::SIGN_DDS, i as u64), n)?;
        let y = ito_integral(|v| Ok(sign(v.current())), &path)?;
        let u: Vec<f64> = path.values()[..n].iter().map(|&w| sign(w)).collect();
        let m = MartingalePath::from_integrand(0.0, &u, &path)?;
        let bracket_dev = m.bracket().iter().enumerate().map(|(k, b)| (b - path.time(k)).abs()).fold(0.0, f64::max);
        let stopped = m.stopped()?;
        Ok(Row {
            y,
            t: stopped.t,
            beta_half: dds_evaluate(&m, 0.5)?,
            bracket_dev,
            dds_dev: (stopped.beta_at_t - stopped.x).abs().max((stopped.x - y).abs()),
        })
    })?;
    let y = column(&rows, |r| r.y);
    let t = column(&rows, |r| r.t);
    let mut report = ExperimentReport::new(ExperimentKind::SignDds.name(), config);

    let max_dev = rows.iter().map(|r| r.bracket_dev).fold(0.0, f64::max);
    report.exact("bracket_max_deviation", max_dev);
    report.test("bracket_exact", TestVerdict::le(max_dev, 0.0));

    let (d, thr) = ks_normal(&y, config)?;
    report.test("ks_y_normal", TestVerdict::ks_accept(d, &thr));

    let y4 = mean_se(&column(&rows, |r| r.y.powi(4)))?;
    report.estimate("e_y4", y4);
    report.test("e_y4_is_3", TestVerdict::within(&y4, 3.0, 4.0));
    report.estimate("mean_y", mean_se(&y)?);

    // beta_s for s = 1/2 is N(0, 1/2)
    let half: Vec<f64> = rows.iter().map(|r| r.beta_half * std::f64::consts::SQRT_2).collect();
    let (d, thr) = ks_normal(&half, config)?;
    report.test("ks_beta_half_normal", TestVerdict::ks_accept(d, &thr));

    let dds_dev = rows.iter().map(|r| r.dds_dev).fold(0.0, f64::max);
    report.test("beta_at_t_equals_y", TestVerdict::le(dds_dev, 0.0));

    let samples: Vec<_> =
        rows.iter().map(|r| crate::dds_timechange::StoppedSample { x: r.y, t: r.t, beta_at_t: r.y }).collect();
    let summary = stopping_summary(&samples, 0.0)?;
    report.estimate("mean_t", summary.mean_t);
    report.estimate("var_t", summary.var_t);
    report.exact("max_t", summary.max_t);
    report.test("t_identically_one", TestVerdict::le(t.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max), 0.0));

    report.sample("y", y);
    report.sample("t", t);
    Ok(report)
}

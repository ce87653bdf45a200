//! `X = sum_i int_0^1 B^i_s / |B_s| dB^i_s` for a `d`-dimensional Brownian
//! motion: the integrand is a unit vector, so `<M>_1 = 1` and `X ~ N(0,1)`.

use super::{column, ks_normal, par_collect, tags, ExperimentConfig, ExperimentKind, ExperimentReport, TestVerdict};
use crate::dds_timechange::{bracket_from_integrand, MartingalePath};
use crate::path_sim::{sample_multi, RngStream};
use crate::stat_tests::mean_se;
use crate::{Error, Result};

struct Row {
    x: f64,
    t: f64,
    dds_dev: f64,
}

pub fn exp_bessel(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let d = config.dim;
    if d < 2 {
        return Err(Error::arg(format!("Bessel experiment needs dimension >= 2, got {d}")));
    }
    let p = config.paths_for(ExperimentKind::Bessel);
    let n = config.steps_eff();
    let dt = 1.0 / n as f64;
    let rows = par_collect(p, |i| {
        let b = sample_multi(&mut RngStream::tagged(config.seed, tags::BESSEL, i as u64), d, n)?;
        let mut values = Vec::with_capacity(n + 1);
        let mut speed = Vec::with_capacity(n);
        let mut m = 0.0;
        values.push(m);
        for k in 0..n {
            let r = b.components.iter().map(|c| c.values()[k].powi(2)).sum::<f64>().sqrt();
            let mut u2 = 0.0;
            if r > 0.0 {
                for c in &b.components {
                    let u = c.values()[k] / r;
                    m += u * c.increments()[k];
                    u2 += u * u;
                }
            }
            values.push(m);
            speed.push(u2.sqrt());
        }
        let mp = MartingalePath::new(values, bracket_from_integrand(&speed, dt))?;
        let s = mp.stopped()?;
        Ok(Row { x: s.x, t: s.t, dds_dev: (s.beta_at_t - s.x).abs() })
    })?;
    let x = column(&rows, |r| r.x);
    let mut report = ExperimentReport::new(ExperimentKind::Bessel.name(), config);

    let dev = rows.iter().map(|r| (r.t - 1.0).abs()).fold(0.0, f64::max);
    report.exact("bracket_max_deviation", dev);
    report.test("bracket_within_d_dt", TestVerdict::le(dev, d as f64 * dt));

    let (ks, thr) = ks_normal(&x, config)?;
    report.test("ks_x_normal", TestVerdict::ks_accept(ks, &thr));
    report.estimate("mean_x", mean_se(&x)?);
    report.estimate("e_x2", mean_se(&column(&rows, |r| r.x * r.x))?);
    report.exact("max_t", rows.iter().map(|r| r.t).fold(f64::NEG_INFINITY, f64::max));
    report.test("beta_at_t_equals_x", TestVerdict::le(rows.iter().map(|r| r.dds_dev).fold(0.0, f64::max), 0.0));

    report.sample("x", x);
    report.sample("t", column(&rows, |r| r.t));
    Ok(report)
}

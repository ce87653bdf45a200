//! Moment identities for Brownian motion stopped at a bounded time:
//! `E b_T^4 = 6 E int_0^T b^2 ds`, `E T b_T^2 = E int_0^T b^2 ds + E T^2 / 2`
//! and `E T = E b_T^2`.

use super::{column, par_collect, tags, ExperimentConfig, ExperimentKind, ExperimentReport, TestVerdict};
use crate::path_sim::RngStream;
use crate::stat_tests::mean_se;
use crate::Result;

/// Exit level `a` of `|b|`.
pub const EXIT_LEVEL: f64 = 1.0;
/// Time bound on the stopping rule.
pub const TIME_BOUND: f64 = 2.0;

#[derive(Debug, Clone, Copy, Default)]
struct Stopped {
    t: f64,
    b: f64,
    /// `sum b^2 dt` up to `T`.
    area: f64,
}

impl Stopped {
    fn identities(&self) -> [f64; 3] {
        let b2 = self.b * self.b;
        [b2 * b2 - 6.0 * self.area, self.t * b2 - self.area - 0.5 * self.t * self.t, self.t - b2]
    }
}

/// Runs one walk until both the exit rule and the fixed rule `T = 1` have stopped.
fn simulate(rng: &mut RngStream, steps_per_unit: usize) -> (Stopped, Stopped) {
    let dt = 1.0 / steps_per_unit as f64;
    let sd = dt.sqrt();
    let horizon = (TIME_BOUND * steps_per_unit as f64).round() as usize;
    let mut b = 0.0;
    let mut area = 0.0;
    let mut exit = None;
    let mut fixed = None;
    for k in 1..=horizon {
        area += b * b * dt;
        b += sd * rng.next_normal();
        let t = k as f64 * dt;
        if exit.is_none() && (b.abs() >= EXIT_LEVEL || k == horizon) {
            exit = Some(Stopped { t, b, area });
        }
        if k == steps_per_unit {
            fixed = Some(Stopped { t, b, area });
        }
        if let (Some(e), Some(f)) = (exit, fixed) {
            return (e, f);
        }
    }
    unreachable!("the exit rule stops at the horizon and the fixed rule before it")
}

pub fn exp_ito_identities(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let kind = ExperimentKind::ItoIdentities;
    let p = config.paths_for(kind);
    let n = config.steps_eff();
    let rows = par_collect(p, |i| Ok(simulate(&mut RngStream::tagged(config.seed, tags::ITO, i as u64), n)))?;
    let mut report = ExperimentReport::new(kind.name(), config);
    let names = ["fourth_moment", "t_times_square", "wald"];
    for (rule, pick) in [("exit", 0usize), ("fixed", 1)] {
        let stopped: Vec<Stopped> = rows.iter().map(|r| if pick == 0 { r.0 } else { r.1 }).collect();
        for (q, name) in names.iter().enumerate() {
            let d = mean_se(&column(&stopped, |s| s.identities()[q]))?;
            report.estimate(&format!("{rule}_{name}_difference"), d);
            report.test(&format!("{rule}_{name}"), TestVerdict::within(&d, 0.0, 4.0));
        }
        report.estimate(&format!("{rule}_e_b4"), mean_se(&column(&stopped, |s| s.b.powi(4)))?);
        report.estimate(&format!("{rule}_e_6_area"), mean_se(&column(&stopped, |s| 6.0 * s.area))?);
        report.estimate(&format!("{rule}_e_t"), mean_se(&column(&stopped, |s| s.t))?);
        report.estimate(&format!("{rule}_e_t_b2"), mean_se(&column(&stopped, |s| s.t * s.b * s.b))?);
    }
    let max_t = rows.iter().map(|r| r.0.t).fold(0.0, f64::max);
    report.exact("exit_max_t", max_t);
    report.test("exit_time_bounded", TestVerdict::le(max_t, TIME_BOUND));
    report.sample("exit_t", column(&rows, |r| r.0.t));
    report.sample("exit_b", column(&rows, |r| r.0.b));
    Ok(report)
}

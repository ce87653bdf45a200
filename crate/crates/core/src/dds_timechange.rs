//! Discretized martingales, their brackets, and the Dambis–Dubins–Schwarz
//! time change `T(s) = inf{t : <M>_t >= s}`, `beta_s = M_{T(s)}`.

use serde::Serialize;

use crate::path_sim::{inv_norm_cdf, WienerPath};
use crate::stat_tests::{mean_se, wilson, Estimate};
use crate::{Error, Result};

/// `M(t_i)` and `<M>(t_i)` on `t_i = i/N`, `i = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingalePath {
    values: Vec<f64>,
    bracket: Vec<f64>,
}

impl MartingalePath {
    pub fn new(values: Vec<f64>, bracket: Vec<f64>) -> Result<Self> {
        if values.len() < 2 || values.len() != bracket.len() {
            return Err(Error::dim(format!(
                "martingale with {} values and {} bracket points",
                values.len(),
                bracket.len()
            )));
        }
        if bracket[0] != 0.0 || bracket.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::arg("bracket must start at 0 and be nondecreasing"));
        }
        Ok(MartingalePath { values, bracket })
    }

    /// `M = mean + int u dW` by left-endpoint sums, with the integrand bracket.
    pub fn from_integrand(mean: f64, u: &[f64], path: &WienerPath) -> Result<Self> {
        if u.len() != path.steps() {
            return Err(Error::dim(format!("{} integrand values for {} steps", u.len(), path.steps())));
        }
        let mut values = Vec::with_capacity(u.len() + 1);
        let mut m = mean;
        values.push(m);
        for (a, x) in u.iter().zip(path.increments()) {
            m += a * x;
            values.push(m);
        }
        Self::new(values, bracket_from_integrand(u, path.dt()))
    }

    /// Path of `W` itself, with its realized variance as bracket.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let bracket = bracket_quadratic(&values);
        Self::new(values, bracket)
    }

    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bracket(&self) -> &[f64] {
        &self.bracket
    }

    pub fn terminal(&self) -> f64 {
        self.values[self.steps()]
    }

    pub fn total_bracket(&self) -> f64 {
        self.bracket[self.steps()]
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 / self.steps() as f64
    }

    pub fn stopped(&self) -> Result<StoppedSample> {
        let t = self.total_bracket();
        Ok(StoppedSample { x: self.terminal(), t, beta_at_t: dds_evaluate(self, t)? })
    }
}

/// `<M>(t_i) = dt * sum_{j<i} u_j^2`, `i = 0..=N`.
pub fn bracket_from_integrand(u: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(u.len() + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for v in u {
        acc += v * v;
        out.push(acc * dt);
    }
    out
}

/// Realized variance `sum_{j<i} (M(t_{j+1}) - M(t_j))^2`.
pub fn bracket_quadratic(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += (w[1] - w[0]).powi(2);
        out.push(acc);
    }
    out
}

/// Smallest grid index `i` with `bracket[i] >= s`.
pub fn time_change(bracket: &[f64], s: f64) -> Result<usize> {
    let horizon = *bracket.last().ok_or_else(|| Error::arg("empty bracket"))?;
    if s.is_nan() || s < 0.0 {
        return Err(Error::arg(format!("time change at negative level {s}")));
    }
    if s > horizon {
        return Err(Error::OutOfHorizon { s, horizon });
    }
    Ok(bracket.partition_point(|&b| b < s))
}

/// `beta_s = M(T(s))`.
pub fn dds_evaluate(m: &MartingalePath, s: f64) -> Result<f64> {
    Ok(m.values[time_change(&m.bracket, s)?])
}

/// Terminal value, clock reading `T = <M>_1`, and `beta_T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StoppedSample {
    pub x: f64,
    pub t: f64,
    pub beta_at_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoppingSummary {
    pub n: usize,
    pub mean_t: Estimate,
    pub mean_t2: Estimate,
    pub var_t: Estimate,
    pub mean_x2: Estimate,
    pub max_t: f64,
    pub p_t_gt_1: Estimate,
    /// 99% Wilson interval for `P(T > 1)`.
    pub p_t_gt_1_interval: (f64, f64),
    pub count_t_gt_1: usize,
}

/// Empirical moments of the stopping clock.
///
/// `tol` absorbs rounding when deciding `T > 1`.
pub fn stopping_summary(samples: &[StoppedSample], tol: f64) -> Result<StoppingSummary> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::arg("stopping summary needs at least two samples"));
    }
    let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let mean_t = mean_se(&t)?;
    let t2: Vec<f64> = t.iter().map(|v| v * v).collect();
    let mean_t2 = mean_se(&t2)?;
    let centered: Vec<f64> = t.iter().map(|v| (v - mean_t.value).powi(2)).collect();
    let var_est = mean_se(&centered)?;
    let var_t = Estimate { value: var_est.value * n as f64 / (n - 1) as f64, stderr: var_est.stderr };
    let x2: Vec<f64> = samples.iter().map(|s| s.x * s.x).collect();
    let count = t.iter().filter(|&&v| v > 1.0 + tol).count();
    let p = count as f64 / n as f64;
    let z = -inv_norm_cdf(0.005);
    Ok(StoppingSummary {
        n,
        mean_t,
        mean_t2,
        var_t,
        mean_x2: mean_se(&x2)?,
        max_t: t.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        p_t_gt_1: Estimate { value: p, stderr: (p * (1.0 - p) / n as f64).sqrt() },
        p_t_gt_1_interval: wilson(count, n, z),
        count_t_gt_1: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path_sim::{sample_path, RngStream};
    use proptest::prelude::*;

    #[test]
    fn unit_and_sign_integrands() {
        let n = 4096;
        let u = vec![1.0; n];
        let b = bracket_from_integrand(&u, 1.0 / n as f64);
        assert!(b.iter().enumerate().all(|(i, v)| *v == i as f64 / n as f64));
        let p = sample_path(&mut RngStream::new(1, 0), n).unwrap();
        let sign: Vec<f64> = p.values()[..n].iter().map(|w| crate::path_sim::sign(*w)).collect();
        let m = MartingalePath::from_integrand(0.0, &sign, &p).unwrap();
        assert!(m.bracket().iter().enumerate().all(|(i, v)| *v == p.time(i)));
        let s = m.stopped().unwrap();
        assert_eq!(s.t, 1.0);
        assert_eq!(s.beta_at_t, s.x);
    }

    #[test]
    fn realized_variance_of_brownian_motion() {
        let p = sample_path(&mut RngStream::new(2, 0), 4096).unwrap();
        let m = MartingalePath::from_values(p.values().to_vec()).unwrap();
        assert!((m.total_bracket() - 1.0).abs() < 6.0 * (2.0f64 / 4096.0).sqrt());
        let c = MartingalePath::from_values(vec![3.0; 9]).unwrap();
        assert_eq!(c.total_bracket(), 0.0);
    }

    #[test]
    fn time_change_examples() {
        let b: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
        assert_eq!(time_change(&b, 0.5).unwrap(), 4);
        assert_eq!(time_change(&b, 0.51).unwrap(), 5);
        let b2: Vec<f64> = b.iter().map(|v| 2.0 * v).collect();
        assert_eq!(time_change(&b2, 0.5).unwrap(), 2);
        // flat stretch between indices 1 and 3
        let flat = [0.0, 0.2, 0.2, 0.2, 0.7];
        assert_eq!(time_change(&flat, 0.2).unwrap(), 1);
        assert_eq!(time_change(&flat, 0.2 + 1e-12).unwrap(), 4);
        assert_eq!(time_change(&flat, 0.0).unwrap(), 0);
        assert!(matches!(time_change(&flat, 0.8), Err(Error::OutOfHorizon { .. })));
        assert!(time_change(&flat, -0.1).is_err());
    }

    #[test]
    fn dds_at_endpoints() {
        let m = MartingalePath::new(vec![0.0, 1.0, -0.5, 2.0], vec![0.0, 0.1, 0.1, 0.4]).unwrap();
        assert_eq!(dds_evaluate(&m, 0.0).unwrap(), 0.0);
        assert_eq!(dds_evaluate(&m, 0.4).unwrap(), 2.0);
        assert!(MartingalePath::new(vec![0.0, 1.0], vec![0.0, -1.0]).is_err());
    }

    #[test]
    fn sign_example_summary() {
        let samples: Vec<StoppedSample> =
            (0..10).map(|i| StoppedSample { x: i as f64 * 0.1, t: 1.0, beta_at_t: i as f64 * 0.1 }).collect();
        let s = stopping_summary(&samples, 1e-12).unwrap();
        assert_eq!(s.mean_t.value, 1.0);
        assert_eq!(s.var_t.value, 0.0);
        assert_eq!(s.count_t_gt_1, 0);
        assert!(stopping_summary(&samples[..1], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn time_change_is_monotone(incs in proptest::collection::vec(0.0f64..1.0, 1..40), a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let mut bracket = vec![0.0];
            for x in &incs {
                let last = *bracket.last().unwrap();
                bracket.push(last + if *x < 0.3 { 0.0 } else { *x });
            }
            let h = *bracket.last().unwrap();
            let (s1, s2) = (a.min(b) * h, a.max(b) * h);
            let (i1, i2) = (time_change(&bracket, s1).unwrap(), time_change(&bracket, s2).unwrap());
            prop_assert!(i1 <= i2);
            prop_assert!(bracket[i1] >= s1);
            prop_assert!(i1 == 0 || bracket[i1 - 1] < s1);
        }
    }
}

//! Brownian motion from its Karhunen–Loève series and recovery of the first
//! coefficient as a projection and as a Wiener integral.

use std::f64::consts::{PI, SQRT_2};

use super::{column, par_collect, tags, ExperimentConfig, ExperimentKind, ExperimentReport, TestVerdict};
use crate::path_sim::RngStream;
use crate::stat_tests::mean_se;
use crate::{Error, Result};

/// Repetitions sharing one pass over the basis.
const BATCH: usize = 16;
/// Leading eigenfunctions whose Gram matrix is checked.
const GRAM_CHECK: usize = 32;

/// `e_k(t) = sqrt2 sin((k - 1/2) pi t)` and `lambda_k = ((k - 1/2) pi)^{-2}`,
/// `k = 1..=K`, sampled at `t_i = i/N`.
#[derive(Debug, Clone)]
pub struct KlBasis {
    terms: usize,
    steps: usize,
    eigenvalues: Vec<f64>,
    /// `sqrt(lambda_k) e_k(t_i)`, row `k - 1`.
    scaled: Vec<f64>,
    /// Trapezoid weights on `t_0..=t_N`.
    weights: Vec<f64>,
}

pub fn kl_basis(terms: usize, steps: usize) -> Result<KlBasis> {
    if terms == 0 || terms > steps {
        return Err(Error::arg(format!("need 1 <= terms <= steps, got {terms} terms on {steps} steps")));
    }
    let dt = 1.0 / steps as f64;
    let mut eigenvalues = Vec::with_capacity(terms);
    let mut scaled = Vec::with_capacity(terms * (steps + 1));
    for k in 1..=terms {
        let freq = (k as f64 - 0.5) * PI;
        eigenvalues.push(freq.powi(-2));
        scaled.extend((0..=steps).map(|i| SQRT_2 * (freq * i as f64 * dt).sin() / freq));
    }
    let mut weights = vec![dt; steps + 1];
    weights[0] = 0.5 * dt;
    weights[steps] = 0.5 * dt;
    Ok(KlBasis { terms, steps, eigenvalues, scaled, weights })
}

impl KlBasis {
    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k - 1]
    }

    /// `e_k(t_i)`.
    pub fn eigenfunction(&self, k: usize, i: usize) -> f64 {
        self.scaled[(k - 1) * (self.steps + 1) + i] / self.eigenvalue(k).sqrt()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn row(&self, k: usize) -> &[f64] {
        &self.scaled[(k - 1) * (self.steps + 1)..k * (self.steps + 1)]
    }

    /// `W_{t_i} = sum_k X_k sqrt(lambda_k) e_k(t_i)` for each coefficient vector.
    pub fn paths(&self, coeffs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if let Some(c) = coeffs.iter().find(|c| c.len() != self.terms) {
            return Err(Error::dim(format!("{} coefficients for {} terms", c.len(), self.terms)));
        }
        let mut out = vec![vec![0.0; self.steps + 1]; coeffs.len()];
        for k in 1..=self.terms {
            let row = self.row(k);
            for (w, c) in out.iter_mut().zip(coeffs) {
                let x = c[k - 1];
                for (a, b) in w.iter_mut().zip(row) {
                    *a += x * b;
                }
            }
        }
        Ok(out)
    }

    /// `<w, e_k> / sqrt(lambda_k)` with trapezoid weights.
    pub fn project(&self, w: &[f64], k: usize) -> f64 {
        let lam = self.eigenvalue(k);
        w.iter().zip(&self.weights).enumerate().map(|(i, (a, q))| a * q * self.eigenfunction(k, i)).sum::<f64>()
            / lam.sqrt()
    }

    /// Wiener-integral weights `g_j` with `<w, e_k> / sqrt(lambda_k) = sum_j g_j dW_j`.
    pub fn integrand(&self, k: usize) -> Vec<f64> {
        let lam = self.eigenvalue(k).sqrt();
        let mut g = vec![0.0; self.steps];
        let mut acc = 0.0;
        for j in (0..self.steps).rev() {
            acc += self.weights[j + 1] * self.eigenfunction(k, j + 1) / lam;
            g[j] = acc;
        }
        g
    }

    /// `max_{j,k<=K'} |<e_j, e_k> - delta_jk|` over the leading block.
    pub fn gram_deviation(&self, block: usize) -> f64 {
        let b = block.min(self.terms);
        let mut worst = 0.0f64;
        for j in 1..=b {
            for k in j..=b {
                let g: f64 = (0..=self.steps)
                    .map(|i| self.weights[i] * self.eigenfunction(j, i) * self.eigenfunction(k, i))
                    .sum();
                worst = worst.max((g - if j == k { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }
}

struct Row {
    x1: f64,
    proj: f64,
    wiener: f64,
    cov: f64,
    /// `(X_1 - int_0^{1/2} g dW) W_{1/2}`.
    cond: f64,
}

pub fn exp_kl_reconstruct(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let kind = ExperimentKind::KlReconstruct;
    let terms = config.kl_terms_eff();
    let n = config.steps_eff();
    if terms < 10 {
        return Err(Error::arg(format!("KL reconstruction needs at least 10 terms, got {terms}")));
    }
    let basis = kl_basis(terms, n)?;
    let g = basis.integrand(1);
    let (is, it) = ((0.25 * n as f64).round() as usize, (0.75 * n as f64).round() as usize);
    let ih = n / 2;
    let p = config.paths_for(kind);
    let batches = par_collect(p.div_ceil(BATCH), |b| {
        let coeffs: Vec<Vec<f64>> = (b * BATCH..((b + 1) * BATCH).min(p))
            .map(|r| {
                let mut rng = RngStream::tagged(config.seed, tags::KL, r as u64);
                (0..terms).map(|_| rng.next_normal()).collect()
            })
            .collect();
        let paths = basis.paths(&coeffs)?;
        Ok(coeffs
            .iter()
            .zip(&paths)
            .map(|(c, w)| Row {
                x1: c[0],
                proj: basis.project(w, 1),
                wiener: g.iter().zip(w.windows(2)).map(|(a, d)| a * (d[1] - d[0])).sum(),
                cov: w[is] * w[it],
                cond: (c[0] - g[..ih].iter().zip(w.windows(2)).map(|(a, d)| a * (d[1] - d[0])).sum::<f64>()) * w[ih],
            })
            .collect::<Vec<_>>())
    })?;
    let rows: Vec<Row> = batches.into_iter().flatten().collect();
    let mut report = ExperimentReport::new(kind.name(), config);

    let gram = basis.gram_deviation(GRAM_CHECK);
    report.exact("gram_deviation", gram);
    report.test("discrete_orthonormal", TestVerdict::le(gram, 1e-10));

    let agree = rows.iter().map(|r| (r.proj - r.wiener).abs()).fold(0.0, f64::max);
    report.exact("recovery_disagreement", agree);
    report.test("recoveries_agree", TestVerdict::le(agree, 1e-8));

    let x1 = column(&rows, |r| r.x1);
    let proj = column(&rows, |r| r.proj);
    let corr = correlation(&x1, &proj);
    report.exact("corr_recovered_drawn", corr);
    report.test("recovery_correlation", TestVerdict::ge(corr, 0.999));
    report.exact("recovery_max_residual", rows.iter().map(|r| (r.proj - r.x1).abs()).fold(0.0, f64::max));

    let cov = mean_se(&column(&rows, |r| r.cov))?;
    let target = is as f64 / n as f64;
    report.estimate("cov_025_075", cov);
    report.test("covariance_min", TestVerdict::within(&cov, target, 4.0));

    // E(X_1 | F_t) = int_0^t g dW, with no outer expectation: the remainder
    // is orthogonal to F_t-measurable variables such as W_t.
    let cond = mean_se(&column(&rows, |r| r.cond))?;
    report.estimate("conditional_remainder_cov", cond);
    report.test("conditional_expectation", TestVerdict::within(&cond, 0.0, 4.0));

    report.sample("x1", x1);
    report.sample("x1_projection", proj);
    report.sample("x1_wiener", column(&rows, |r| r.wiener));
    Ok(report)
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

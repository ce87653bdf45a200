//! Brownian paths on uniform grids and pathwise stochastic integrals.
//!
//! A [`WienerPath`] holds `N` increments on `[0,1]`. Wiener, Itô and
//! multiple Wiener–Itô integrals are evaluated directly from the increments:
//! dense kernels by sums over distinct index tuples, factored kernels through
//! rescaled Hermite polynomials of Wiener integrals.

mod evaluate;
mod hermite;
mod rng;

pub use evaluate::{clark_ocone_on_path, evaluate_chaos, multiple_integral, ChaosEvaluator, IntegrandEvaluator};
pub use hermite::scaled_hermite;
pub use rng::RngStream;

use statrs::function::erf::{erfc, erfc_inv};

use crate::grid_kernels::GridFunction;
use crate::{Error, Result};

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile.
pub fn inv_norm_cdf(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Sign with `sign(0) = 1`.
pub fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// One Brownian trajectory on `t_i = i/N`, `i = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerPath {
    increments: Vec<f64>,
    values: Vec<f64>,
}

impl WienerPath {
    pub fn from_increments(increments: Vec<f64>) -> Result<Self> {
        if increments.is_empty() {
            return Err(Error::arg("a path needs at least one step"));
        }
        let mut values = Vec::with_capacity(increments.len() + 1);
        let mut w = 0.0;
        values.push(w);
        for dw in &increments {
            w += dw;
            values.push(w);
        }
        Ok(WienerPath { increments, values })
    }

    pub fn steps(&self) -> usize {
        self.increments.len()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.steps() as f64
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// `W(t_0), ..., W(t_N)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt()
    }

    pub fn terminal(&self) -> f64 {
        self.values[self.steps()]
    }

    /// Index of the grid time closest to `t`.
    pub fn index_of(&self, t: f64) -> usize {
        ((t * self.steps() as f64).round() as usize).min(self.steps())
    }
}

/// `d` independent paths on a shared grid.
#[derive(Debug, Clone)]
pub struct MultiPath {
    pub components: Vec<WienerPath>,
}

impl MultiPath {
    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn steps(&self) -> usize {
        self.components[0].steps()
    }
}

/// `N` independent `Normal(0, 1/N)` increments from `rng`.
pub fn sample_path(rng: &mut RngStream, steps: usize) -> Result<WienerPath> {
    if steps == 0 {
        return Err(Error::arg("a path needs at least one step"));
    }
    let mut inc = vec![0.0; steps];
    rng.fill_normal(&mut inc, (1.0 / steps as f64).sqrt());
    WienerPath::from_increments(inc)
}

pub fn sample_multi(rng: &mut RngStream, dim: usize, steps: usize) -> Result<MultiPath> {
    if dim == 0 {
        return Err(Error::arg("dimension must be positive"));
    }
    let components = (0..dim).map(|_| sample_path(rng, steps)).collect::<Result<_>>()?;
    Ok(MultiPath { components })
}

pub(crate) fn refinement(coarse: usize, fine: usize) -> Result<usize> {
    if coarse == 0 || !fine.is_multiple_of(coarse) {
        return Err(Error::dim(format!("kernel resolution {coarse} does not divide path steps {fine}")));
    }
    Ok(fine / coarse)
}

/// `W(h) = sum_i h(t_{i-1}) dW_i`.
pub fn wiener_integral(h: &GridFunction, path: &WienerPath) -> Result<f64> {
    let r = refinement(h.resolution(), path.steps())?;
    Ok(path.increments.chunks_exact(r).zip(h.values()).map(|(chunk, &v)| v * chunk.iter().sum::<f64>()).sum())
}

/// What an adapted integrand may see at step `i`: increments `0..i` and
/// path values `W(t_0)..W(t_i)`.
#[derive(Debug, Clone, Copy)]
pub struct PrefixView<'a> {
    increments: &'a [f64],
    values: &'a [f64],
    dt: f64,
}

impl<'a> PrefixView<'a> {
    /// Index of the increment being integrated.
    pub fn horizon(&self) -> usize {
        self.increments.len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time(&self) -> f64 {
        self.horizon() as f64 * self.dt
    }

    pub fn increment(&self, j: usize) -> Result<f64> {
        self.increments.get(j).copied().ok_or(Error::Contract { step: self.horizon(), requested: j })
    }

    pub fn past_increments(&self) -> &'a [f64] {
        self.increments
    }

    /// `W(t_i)` at the left endpoint of the current step.
    pub fn current(&self) -> f64 {
        self.values[self.horizon()]
    }

    pub fn value(&self, j: usize) -> Result<f64> {
        self.values.get(j).copied().ok_or(Error::Contract { step: self.horizon(), requested: j })
    }
}

/// Left-endpoint Itô sum `sum_i u_i dW_i`, where `u_i` sees only the past.
pub fn ito_integral<F>(mut u: F, path: &WienerPath) -> Result<f64>
where
    F: FnMut(&PrefixView<'_>) -> Result<f64>,
{
    let dt = path.dt();
    let mut acc = 0.0;
    for (i, dw) in path.increments.iter().enumerate() {
        let view = PrefixView { increments: &path.increments[..i], values: &path.values[..=i], dt };
        acc += u(&view)? * dw;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_invariants() {
        let mut rng = RngStream::new(1, 1);
        let p = sample_path(&mut rng, 16).unwrap();
        assert_eq!(p.values()[0], 0.0);
        let cum: f64 = p.increments().iter().sum();
        assert!((cum - p.terminal()).abs() < 1e-15);
        let mut again = RngStream::new(1, 1);
        assert_eq!(sample_path(&mut again, 16).unwrap(), p);
    }

    #[test]
    fn wiener_integral_of_one_is_terminal_value() {
        let mut rng = RngStream::new(2, 0);
        let p = sample_path(&mut rng, 12).unwrap();
        let one = GridFunction::constant(3, 1.0).unwrap();
        assert!((wiener_integral(&one, &p).unwrap() - p.terminal()).abs() < 1e-14);
        let h1 = GridFunction::indicator(2, 0.0, 0.5, std::f64::consts::SQRT_2).unwrap();
        let v = wiener_integral(&h1, &p).unwrap();
        assert!((v - std::f64::consts::SQRT_2 * p.values()[6]).abs() < 1e-14);
        let bad = GridFunction::constant(5, 1.0).unwrap();
        assert!(matches!(wiener_integral(&bad, &p), Err(Error::Dimension(_))));
    }

    #[test]
    fn ito_of_one_is_terminal_value() {
        let mut rng = RngStream::new(3, 0);
        let p = sample_path(&mut rng, 64).unwrap();
        let v = ito_integral(|_| Ok(1.0), &p).unwrap();
        assert!((v - p.terminal()).abs() < 1e-14);
    }

    #[test]
    fn future_access_is_a_contract_violation() {
        let mut rng = RngStream::new(3, 1);
        let p = sample_path(&mut rng, 8).unwrap();
        let err = ito_integral(|view| view.increment(view.horizon()), &p).unwrap_err();
        assert_eq!(err, Error::Contract { step: 0, requested: 0 });
    }

    #[test]
    fn ito_is_blind_to_the_future() {
        let mut rng = RngStream::new(4, 0);
        let p = sample_path(&mut rng, 32).unwrap();
        let horizon = 20;
        let u = |view: &PrefixView<'_>| -> Result<f64> {
            if view.horizon() >= horizon {
                return Ok(0.0);
            }
            Ok(view.past_increments().iter().map(|x| x * x).sum::<f64>() + view.current())
        };
        let base = ito_integral(u, &p).unwrap();
        let mut inc = p.increments().to_vec();
        for x in inc.iter_mut().skip(horizon) {
            *x = 7.0;
        }
        let moved = ito_integral(u, &WienerPath::from_increments(inc).unwrap()).unwrap();
        assert_eq!(base, moved);
    }

    #[test]
    fn normal_cdf_and_quantile() {
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((norm_cdf(1.959963984540054) - 0.975).abs() < 1e-10);
        for p in [1e-10, 0.01, 0.3, 0.5, 0.8, 0.999] {
            assert!((norm_cdf(inv_norm_cdf(p)) - p).abs() < 1e-10 * p);
        }
        assert_eq!(sign(0.0), 1.0);
        assert_eq!(sign(-1e-300), -1.0);
    }
}

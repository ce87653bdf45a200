//! Exact algebra of finite chaos decompositions.
//!
//! Products follow the multiplication formula
//! `I_p(f) I_q(g) = sum_l l! C(p,l) C(q,l) I_{p+q-2l}(sym(f ⊗_l g))`, and all
//! moments come from the isometry `E[I_n(f) I_n(g)] = n! <f~, g~>`.

mod clark_ocone;
mod lemma;
mod sign;
mod vector;

pub use clark_ocone::{clark_ocone_integrand, AdaptedIntegrand};
pub use lemma::{check_lemma_fc, LemmaFcVerdict};
pub use sign::{sign_chaos, sign_coefficient, sign_partial_norm};
pub use vector::{ChaosKernel, ChaosVector};

use crate::grid_kernels::{binomial, contract, factorial, symmetrize_with, FactoredKernel, Limits};
use crate::{Error, Result};
use vector::check_same_grid;

/// `E F`.
pub fn expectation(f: &ChaosVector) -> f64 {
    f.mean()
}

/// `sum_{n>=1} n! <f~_n, g~_n>`.
pub fn covariance(f: &ChaosVector, g: &ChaosVector) -> Result<f64> {
    check_same_grid(f, g)?;
    let mut acc = 0.0;
    for (n, a) in f.orders() {
        if let Some(b) = g.kernel(n) {
            acc += factorial(n) * a.inner(b)?;
        }
    }
    Ok(acc)
}

pub fn multiply(f: &ChaosVector, g: &ChaosVector) -> Result<ChaosVector> {
    multiply_with(f, g, &Limits::default())
}

pub fn multiply_with(f: &ChaosVector, g: &ChaosVector, limits: &Limits) -> Result<ChaosVector> {
    check_same_grid(f, g)?;
    let mut out = ChaosVector::constant(f.resolution(), f.mean() * g.mean())?;
    for (c, v) in [(f.mean(), g), (g.mean(), f)] {
        if c != 0.0 {
            for (n, k) in v.orders() {
                out.add_kernel(n, k.scaled(c))?;
            }
        }
    }
    for (p, a) in f.orders() {
        for (q, b) in g.orders() {
            for l in 0..=p.min(q) {
                let c = factorial(l) * binomial(p, l) * binomial(q, l);
                accumulate_contraction(&mut out, p, a, q, b, l, c, limits)?;
            }
        }
    }
    Ok(out)
}

/// `E F^4 = Var(F^2) + (E F^2)^2`, through the product formula.
pub fn fourth_moment(f: &ChaosVector) -> Result<f64> {
    fourth_moment_with(f, &Limits::default())
}

pub fn fourth_moment_with(f: &ChaosVector, limits: &Limits) -> Result<f64> {
    let p = multiply_with(f, f, limits)?;
    Ok(covariance(&p, &p)? + p.mean() * p.mean())
}

/// `(-L)^{-1} F`: order `n` kernels divided by `n`, mean dropped.
#[allow(non_snake_case)]
pub fn apply_inverse_L(f: &ChaosVector) -> ChaosVector {
    f.map_orders(false, |n| 1.0 / n as f64)
}

/// `L F = -sum n I_n(f_n)`.
#[allow(non_snake_case)]
pub fn apply_L(f: &ChaosVector) -> ChaosVector {
    f.map_orders(false, |n| -(n as f64))
}

/// Chaos expansion of `G_F = <DF, D(-L)^{-1} F>`.
///
/// `D_a I_p(f) = p I_{p-1}(f(., a))` and `D_a (-L)^{-1} I_q(g) = I_{q-1}(g(., a))`;
/// multiplying and integrating over `a` turns the shared variable into one
/// extra contraction index.
#[allow(non_snake_case)]
pub fn gamma_G(f: &ChaosVector) -> Result<ChaosVector> {
    gamma_G_with(f, &Limits::default())
}

#[allow(non_snake_case)]
pub fn gamma_G_with(f: &ChaosVector, limits: &Limits) -> Result<ChaosVector> {
    let mut out = ChaosVector::zero(f.resolution())?;
    for (p, a) in f.orders() {
        for (q, b) in f.orders() {
            for l in 0..p.min(q) {
                let c = p as f64 * factorial(l) * binomial(p - 1, l) * binomial(q - 1, l);
                accumulate_contraction(&mut out, p, a, q, b, l + 1, c, limits)?;
            }
        }
    }
    Ok(out)
}

/// Adds `c * sym(a ⊗_l b)` to `out`.
#[allow(clippy::too_many_arguments)]
fn accumulate_contraction(
    out: &mut ChaosVector,
    p: usize,
    a: &ChaosKernel,
    q: usize,
    b: &ChaosKernel,
    l: usize,
    c: f64,
    limits: &Limits,
) -> Result<()> {
    let order = p + q - 2 * l;
    let m = out.resolution();
    if order > limits.max_factored_order {
        return Err(Error::cap(format!(
            "product of order {order} exceeds the factored cap {}",
            limits.max_factored_order
        )));
    }
    let mixed = (a.dense().is_some() && !b.factored().is_empty()) || (b.dense().is_some() && !a.factored().is_empty());
    if mixed {
        // first-order dense terms are rank one; anything else is densified
        if let (Some(x), Some(y)) = (a.as_factored(), b.as_factored()) {
            return accumulate_factored(out, &x, &y, l, c);
        }
    }
    if a.dense().is_some() && b.dense().is_some() || mixed {
        if order > limits.max_product_order {
            return Err(Error::cap(format!(
                "dense product of order {order} exceeds the configured cap {}",
                limits.max_product_order
            )));
        }
        let sym_limits =
            Limits { max_symmetrize_order: limits.max_symmetrize_order.max(limits.max_product_order), ..*limits };
        let (x, y) = if mixed {
            (a.to_dense(p, m, limits)?, b.to_dense(q, m, limits)?)
        } else {
            (a.dense().cloned().expect("dense term"), b.dense().cloned().expect("dense term"))
        };
        out.add_dense(symmetrize_with(&contract(&x, &y, l)?, &sym_limits)?.scaled(c))?;
        if mixed {
            return Ok(());
        }
    }
    accumulate_factored(out, a.factored(), b.factored(), l, c)
}

fn accumulate_factored(
    out: &mut ChaosVector,
    a: &[FactoredKernel],
    b: &[FactoredKernel],
    l: usize,
    c: f64,
) -> Result<()> {
    for x in a {
        for y in b {
            for t in x.contract_sym(y, l)? {
                out.add_factored(t.scaled(c))?;
            }
        }
    }
    Ok(())
}

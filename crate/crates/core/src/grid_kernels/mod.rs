//! Piecewise-constant model of `L^2([0,1]^n)`.
//!
//! A kernel of order `n` on resolution `m` is constant on each of the `m^n`
//! cells `((j_1-1)/m, j_1/m] x ... x ((j_n-1)/m, j_n/m]`. Inner products use
//! the exact cell volume `m^{-n}`, so the isometry and contraction identities
//! of the continuum hold exactly for these representatives.
//!
//! Three storage forms are provided:
//! - [`GridKernel`]: dense row-major values, for small orders.
//! - [`RankOnePower`]: `c * h^{⊗n}` without materializing `m^n` values.
//! - [`FactoredKernel`]: `c * sym(h_1^{⊗a_1} ⊗ ... ⊗ h_r^{⊗a_r})`, closed under
//!   symmetrized contraction, used for high-order chaos such as the sign
//!   expansion.

mod factored;
mod function;
mod kernel;
mod rank_one;

pub use factored::FactoredKernel;
pub use function::GridFunction;
pub(crate) use kernel::unravel as unravel_index;
pub use kernel::{contract, inner, symmetrize, symmetrize_with, zero_diagonal, GridKernel};
pub use rank_one::{densify, RankOnePower};

/// Tolerance for identities that hold exactly on the grid.
pub const EXACT_TOL: f64 = 1e-12;

/// Storage and order caps shared by kernel and chaos operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    /// Largest order accepted by exhaustive symmetrization (`n!` terms).
    pub max_symmetrize_order: usize,
    /// Largest number of stored values in one dense kernel.
    pub max_dense_entries: usize,
    /// Largest output order of a dense chaos product.
    pub max_product_order: usize,
    /// Largest order of a factored kernel.
    pub max_factored_order: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_symmetrize_order: 6, max_dense_entries: 1 << 24, max_product_order: 8, max_factored_order: 64 }
    }
}

impl Limits {
    pub(crate) fn dense_len(&self, order: usize, resolution: usize) -> crate::Result<usize> {
        let len =
            u32::try_from(order).ok().and_then(|o| resolution.checked_pow(o)).filter(|&n| n <= self.max_dense_entries);
        len.ok_or_else(|| {
            crate::Error::cap(format!(
                "dense kernel of order {order} on resolution {resolution} exceeds {} entries",
                self.max_dense_entries
            ))
        })
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

use serde::Serialize;

use crate::grid_kernels::{contract, symmetrize_with, GridKernel, Limits};
use crate::{Error, Result};

/// Norms behind the implication
/// `int g(.,s) ⊗~ g(.,s) ds = 0  =>  int g(.,s) ⊗~_k g(.,s) ds = 0` for `k = 1..N-1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaFcVerdict {
    pub h_norm: f64,
    /// `C_k` for `k = 1..N-1`.
    pub c_norms: Vec<f64>,
    pub hypothesis_holds: bool,
    pub conclusion_holds: bool,
}

impl LemmaFcVerdict {
    pub fn implication_holds(&self) -> bool {
        !self.hypothesis_holds || self.conclusion_holds
    }
}

/// `g` has order `N+1` and is symmetric in its first `N` arguments; the last
/// argument plays the role of `s`.
pub fn check_lemma_fc(g: &GridKernel, n: usize, tol: f64) -> Result<LemmaFcVerdict> {
    if n == 0 || g.order() != n + 1 {
        return Err(Error::arg(format!("expected a kernel of order {} , got {}", n + 1, g.order())));
    }
    for s in 0..g.resolution() {
        if !g.slice_last(s)?.check_symmetric(1e-12) {
            return Err(Error::pre("kernel is not symmetric in its first arguments"));
        }
    }
    let limits =
        Limits { max_symmetrize_order: Limits::default().max_symmetrize_order.max(2 * n), ..Limits::default() };
    // integrating s together with k further arguments is contraction index k+1
    let norm_of = |l: usize| -> Result<f64> { Ok(symmetrize_with(&contract(g, g, l)?, &limits)?.norm()) };
    let h_norm = norm_of(1)?;
    let c_norms = (1..n).map(|k| norm_of(k + 1)).collect::<Result<Vec<_>>>()?;
    Ok(LemmaFcVerdict {
        h_norm,
        hypothesis_holds: h_norm <= tol,
        conclusion_holds: c_norms.iter().all(|&c| c <= tol),
        c_norms,
    })
}

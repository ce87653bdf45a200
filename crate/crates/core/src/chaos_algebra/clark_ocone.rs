use crate::{Error, Result};

use super::ChaosVector;

/// `u_s = E(D_s F | F_s)` on each time cell, as a chaos vector per cell.
///
/// Cell `s` sees only kernel entries on cells strictly before `s`, so the
/// left-endpoint Itô sum built from it is adapted.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedIntegrand {
    cells: Vec<ChaosVector>,
}

impl AdaptedIntegrand {
    pub fn resolution(&self) -> usize {
        self.cells.len()
    }

    pub fn at(&self, cell: usize) -> &ChaosVector {
        &self.cells[cell]
    }

    pub fn cells(&self) -> &[ChaosVector] {
        &self.cells
    }

    /// Checks that no kernel of `u_s` has mass on a cell `>= s`.
    pub fn check_support(&self) -> bool {
        self.cells.iter().enumerate().all(|(s, u)| {
            u.orders().all(|(_, k)| {
                let dense_ok = k.dense().is_none_or(|d| {
                    let m = d.resolution();
                    let mut idx = vec![0; d.order()];
                    d.values().iter().enumerate().all(|(flat, v)| {
                        crate::grid_kernels::unravel_index(flat, m, &mut idx);
                        *v == 0.0 || idx.iter().all(|&j| j < s)
                    })
                });
                dense_ok && k.factored().iter().all(|f| f.factors().iter().all(|(b, _)| b.support().all(|j| j < s)))
            })
        })
    }

    /// `E int_0^1 u_s^2 ds`, the expected bracket at time 1.
    pub fn expected_bracket(&self) -> Result<f64> {
        let w = 1.0 / self.cells.len() as f64;
        self.cells.iter().map(|u| Ok(u.second_moment() * w)).sum()
    }
}

/// `u_s = sum_n n I_{n-1}(f_n(., s) 1_{[0,s)}^{⊗(n-1)})` for centered `F`.
pub fn clark_ocone_integrand(f: &ChaosVector) -> Result<AdaptedIntegrand> {
    if f.mean() != 0.0 {
        return Err(Error::pre(format!("Clark-Ocone integrand needs E F = 0, got {}", f.mean())));
    }
    let m = f.resolution();
    let mut cells = Vec::with_capacity(m);
    for s in 0..m {
        let mut u = ChaosVector::zero(m)?;
        for (n, k) in f.orders() {
            let c = n as f64;
            if let Some(d) = k.dense() {
                let piece = d.slice_last(s)?.restrict_before(s);
                if piece.order() == 0 || !piece.is_zero() {
                    u.add_dense(piece.scaled(c))?;
                }
            }
            for t in k.factored() {
                for piece in t.slice(s) {
                    let piece = piece.restrict_before(s);
                    if piece.factors().iter().all(|(b, _)| !b.is_zero()) {
                        u.add_factored(piece.scaled(c))?;
                    }
                }
            }
        }
        cells.push(u);
    }
    Ok(AdaptedIntegrand { cells })
}

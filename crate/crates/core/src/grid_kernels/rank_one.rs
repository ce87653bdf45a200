use serde::{Deserialize, Serialize};

use super::{FactoredKernel, GridFunction, GridKernel, Limits};
use crate::{Error, Result};

/// `coeff * h^{⊗power}`, kept factored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankOnePower {
    pub base: GridFunction,
    pub power: usize,
    pub coeff: f64,
}

impl RankOnePower {
    pub fn new(base: GridFunction, power: usize, coeff: f64) -> Self {
        RankOnePower { base, power, coeff }
    }

    pub fn resolution(&self) -> usize {
        self.base.resolution()
    }

    /// Entry at a multi-index, `c * prod_i h(j_i)`.
    pub fn value(&self, idx: &[usize]) -> f64 {
        self.coeff * idx.iter().map(|&j| self.base.value(j)).product::<f64>()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeff * self.coeff * self.base.norm_sq().powi(self.power as i32)
    }

    pub fn inner(&self, other: &RankOnePower) -> Result<f64> {
        if self.power != other.power {
            return Err(Error::dim(format!("rank-one powers {} and {}", self.power, other.power)));
        }
        Ok(self.coeff * other.coeff * self.base.inner(&other.base)?.powi(self.power as i32))
    }

    /// Symmetrized contraction in closed form,
    /// `c c' <h,g>^l sym(h^{⊗(p-l)} ⊗ g^{⊗(q-l)})`.
    pub fn contract(&self, other: &RankOnePower, l: usize) -> Result<FactoredKernel> {
        if l > self.power.min(other.power) {
            return Err(Error::arg(format!("contraction index {l} exceeds min power")));
        }
        let ip = self.base.inner(&other.base)?;
        FactoredKernel::new(
            self.coeff * other.coeff * ip.powi(l as i32),
            vec![(self.base.clone(), self.power - l), (other.base.clone(), other.power - l)],
        )
    }
}

/// Materializes `c h^{⊗n}` as a dense symmetric kernel.
pub fn densify(r: &RankOnePower) -> Result<GridKernel> {
    densify_with(r, &Limits::default())
}

pub fn densify_with(r: &RankOnePower, limits: &Limits) -> Result<GridKernel> {
    limits.dense_len(r.power, r.resolution())?;
    if r.power > limits.max_symmetrize_order.max(limits.max_product_order) {
        return Err(Error::cap(format!("rank-one power {} is above the dense order cap", r.power)));
    }
    Ok(GridKernel::from_fn(r.power, r.resolution(), |idx| r.value(idx))?.mark_symmetric())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_kernels::inner;

    #[test]
    fn densify_small_cases() {
        let ones = GridFunction::constant(2, 1.0).unwrap();
        let d = densify(&RankOnePower::new(ones.clone(), 2, 1.0)).unwrap();
        assert_eq!(d.values(), &[1.0; 4]);
        assert!(d.is_symmetric());
        let z = densify(&RankOnePower::new(ones, 2, 0.0)).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn dense_and_closed_form_inner_agree() {
        let h = GridFunction::new(vec![0.3, -1.2, 0.7]).unwrap();
        let g = GridFunction::new(vec![1.1, 0.4, -0.2]).unwrap();
        let rh = RankOnePower::new(h.clone(), 2, 1.0);
        let rg = RankOnePower::new(g.clone(), 2, 1.0);
        let dense = inner(&densify(&rh).unwrap(), &densify(&rg).unwrap()).unwrap();
        let closed = h.inner(&g).unwrap().powi(2);
        assert!((dense - closed).abs() < 1e-14);
        assert!((rh.inner(&rg).unwrap() - closed).abs() < 1e-14);
    }

    #[test]
    fn densify_matches_value() {
        let (a, b) = (2.0, -1.0);
        let h = GridFunction::new(vec![a, b]).unwrap();
        let r = RankOnePower::new(h, 3, 0.5);
        let d = densify(&r).unwrap();
        assert_eq!(d.get(&[0, 1, 1]), 0.5 * a * b * b);
        assert_eq!(d.get(&[1, 1, 1]), r.value(&[1, 1, 1]));
    }

    #[test]
    fn storage_budget() {
        let h = GridFunction::constant(64, 1.0).unwrap();
        assert!(matches!(densify(&RankOnePower::new(h, 5, 1.0)), Err(Error::Capacity(_))));
    }

    #[test]
    fn shared_base_contraction_stays_rank_one() {
        let h = GridFunction::new(vec![1.0, 2.0]).unwrap();
        let r = RankOnePower::new(h.clone(), 3, 2.0);
        let c = r.contract(&r, 2).unwrap();
        assert_eq!(c.factors().len(), 1);
        assert_eq!(c.order(), 2);
        assert!((c.coeff() - 4.0 * h.norm_sq().powi(2)).abs() < 1e-12);
    }
}

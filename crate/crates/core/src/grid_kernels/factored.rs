use serde::{Deserialize, Serialize};

use super::{factorial, symmetrize_with, GridFunction, GridKernel, Limits, RankOnePower};
use crate::{Error, Result};

/// `coeff * sym(h_1^{⊗a_1} ⊗ ... ⊗ h_r^{⊗a_r})`.
///
/// Factors are kept in a canonical order with distinct bases and positive
/// powers, so two kernels with the same factor multiset compare equal by
/// [`FactoredKernel::same_shape`] and can be merged by adding coefficients.
/// Inner products and symmetrized contractions are computed by enumerating
/// how copies of each base pair up, never by densifying.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactoredKernel {
    coeff: f64,
    factors: Vec<(GridFunction, usize)>,
}

impl From<RankOnePower> for FactoredKernel {
    fn from(r: RankOnePower) -> Self {
        FactoredKernel::canonical(r.coeff, vec![(r.base, r.power)])
    }
}

impl FactoredKernel {
    pub fn new(coeff: f64, factors: Vec<(GridFunction, usize)>) -> Result<Self> {
        if let Some((first, _)) = factors.first() {
            if factors.iter().any(|(b, _)| b.resolution() != first.resolution()) {
                return Err(Error::dim("factored kernel bases on different resolutions"));
            }
        }
        Ok(Self::canonical(coeff, factors))
    }

    fn canonical(coeff: f64, mut factors: Vec<(GridFunction, usize)>) -> Self {
        factors.retain(|(_, p)| *p > 0);
        factors.sort_by(|a, b| a.0.cmp_values(&b.0));
        let mut merged: Vec<(GridFunction, usize)> = Vec::with_capacity(factors.len());
        for (base, power) in factors {
            match merged.last_mut() {
                Some((b, p)) if *b == base => *p += power,
                _ => merged.push((base, power)),
            }
        }
        FactoredKernel { coeff, factors: merged }
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn factors(&self) -> &[(GridFunction, usize)] {
        &self.factors
    }

    pub fn order(&self) -> usize {
        self.factors.iter().map(|(_, p)| p).sum()
    }

    /// `None` for a scalar (order 0).
    pub fn resolution(&self) -> Option<usize> {
        self.factors.first().map(|(b, _)| b.resolution())
    }

    pub fn as_rank_one(&self) -> Option<RankOnePower> {
        match self.factors.as_slice() {
            [(base, power)] => Some(RankOnePower::new(base.clone(), *power, self.coeff)),
            _ => None,
        }
    }

    pub fn same_shape(&self, other: &FactoredKernel) -> bool {
        self.factors == other.factors
    }

    pub fn scaled(&self, c: f64) -> FactoredKernel {
        FactoredKernel { coeff: self.coeff * c, factors: self.factors.clone() }
    }

    pub(crate) fn with_coeff(&self, coeff: f64) -> FactoredKernel {
        FactoredKernel { coeff, factors: self.factors.clone() }
    }

    pub fn refine(&self, factor: usize) -> Result<FactoredKernel> {
        let factors = self.factors.iter().map(|(b, p)| Ok((b.refine(factor)?, *p))).collect::<Result<Vec<_>>>()?;
        Ok(Self::canonical(self.coeff, factors))
    }

    /// Every base restricted to the cells before `cell`.
    pub fn restrict_before(&self, cell: usize) -> FactoredKernel {
        let factors = self.factors.iter().map(|(b, p)| (b.restrict_before(cell), *p)).collect();
        Self::canonical(self.coeff, factors)
    }

    pub fn pairwise_orthogonal(&self, tol: f64) -> bool {
        let f = &self.factors;
        (0..f.len()).all(|i| (i + 1..f.len()).all(|j| f[i].0.inner(&f[j].0).is_ok_and(|v| v.abs() <= tol)))
    }

    pub fn pairwise_disjoint(&self) -> bool {
        let f = &self.factors;
        (0..f.len()).all(|i| (i + 1..f.len()).all(|j| f[i].0.disjoint_support(&f[j].0)))
    }

    fn gram(&self, other: &FactoredKernel) -> Result<Vec<f64>> {
        let mut g = Vec::with_capacity(self.factors.len() * other.factors.len());
        for (v, _) in &self.factors {
            for (w, _) in &other.factors {
                g.push(v.inner(w)?);
            }
        }
        Ok(g)
    }

    fn check_resolution(&self, other: &FactoredKernel) -> Result<()> {
        match (self.resolution(), other.resolution()) {
            (Some(a), Some(b)) if a != b => Err(Error::dim(format!("resolutions {a} and {b}"))),
            _ => Ok(()),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self).unwrap_or(f64::NAN)
    }

    /// `<sym(⊗v), sym(⊗w)> = perm(G) / n!` summed over the ways copies of
    /// each `v_i` pair with copies of each `w_j`.
    pub fn inner(&self, other: &FactoredKernel) -> Result<f64> {
        let n = self.order();
        if n != other.order() {
            return Err(Error::dim(format!("factored kernels of orders {n} and {}", other.order())));
        }
        self.check_resolution(other)?;
        let gram = self.gram(other)?;
        let rows: Vec<usize> = self.factors.iter().map(|(_, p)| *p).collect();
        let cols: Vec<usize> = other.factors.iter().map(|(_, p)| *p).collect();
        let margin: f64 = rows.iter().chain(&cols).map(|&a| factorial(a)).product();
        let mut acc = 0.0;
        for_each_table(&rows, &cols, n, |table| {
            let mut term = margin;
            for (&k, &g) in table.iter().zip(&gram) {
                term *= g.powi(k as i32) / factorial(k);
            }
            acc += term;
        });
        Ok(self.coeff * other.coeff * acc / factorial(n))
    }

    /// `sym(self ⊗_l other)` as a sum of factored kernels.
    pub fn contract_sym(&self, other: &FactoredKernel, l: usize) -> Result<Vec<FactoredKernel>> {
        let (n, p) = (self.order(), other.order());
        if l > n.min(p) {
            return Err(Error::arg(format!("contraction index {l} exceeds min order {}", n.min(p))));
        }
        self.check_resolution(other)?;
        let gram = self.gram(other)?;
        let rows: Vec<usize> = self.factors.iter().map(|(_, p)| *p).collect();
        let cols: Vec<usize> = other.factors.iter().map(|(_, p)| *p).collect();
        let s = cols.len();
        // number of (chosen copies of f, chosen copies of g, pairing) triples
        let total = factorial(n) / factorial(n - l) * factorial(p) / factorial(p - l) / factorial(l);
        let mut out: Vec<FactoredKernel> = Vec::new();
        for_each_table(&rows, &cols, l, |table| {
            let mut weight = 1.0;
            let mut row_used = vec![0; rows.len()];
            let mut col_used = vec![0; s];
            for (cell, (&k, &g)) in table.iter().zip(&gram).enumerate() {
                weight *= g.powi(k as i32) / factorial(k);
                row_used[cell / s] += k;
                col_used[cell % s] += k;
            }
            for (i, &a) in rows.iter().enumerate() {
                weight *= factorial(a) / factorial(a - row_used[i]);
            }
            for (j, &b) in cols.iter().enumerate() {
                weight *= factorial(b) / factorial(b - col_used[j]);
            }
            if weight == 0.0 {
                return;
            }
            let factors = self
                .factors
                .iter()
                .zip(&row_used)
                .map(|((v, a), u)| (v.clone(), a - u))
                .chain(other.factors.iter().zip(&col_used).map(|((w, b), u)| (w.clone(), b - u)))
                .collect();
            let term = Self::canonical(self.coeff * other.coeff * weight / total, factors);
            match out.iter_mut().find(|t| t.same_shape(&term)) {
                Some(t) => t.coeff += term.coeff,
                None => out.push(term),
            }
        });
        Ok(out)
    }

    /// `f(., cell)`: fixes one argument of the symmetric kernel.
    pub fn slice(&self, cell: usize) -> Vec<FactoredKernel> {
        let n = self.order() as f64;
        self.factors
            .iter()
            .enumerate()
            .filter_map(|(i, (v, a))| {
                let val = v.value(cell);
                (val != 0.0).then(|| {
                    let mut factors = self.factors.clone();
                    factors[i].1 -= 1;
                    Self::canonical(self.coeff * *a as f64 / n * val, factors)
                })
            })
            .collect()
    }

    fn expanded(&self) -> Vec<&GridFunction> {
        self.factors.iter().flat_map(|(b, p)| std::iter::repeat_n(b, *p)).collect()
    }

    pub fn densify(&self, limits: &Limits) -> Result<GridKernel> {
        let n = self.order();
        match self.resolution() {
            None => Ok(GridKernel::scalar(self.coeff)),
            Some(m) => {
                limits.dense_len(n, m)?;
                let t = GridKernel::tensor(&self.expanded())?;
                let t = if self.factors.len() == 1 { t.mark_symmetric() } else { t };
                Ok(symmetrize_with(&t, limits)?.scaled(self.coeff))
            }
        }
    }

    /// `<f, self>` for a symmetric dense `f`.
    pub fn dot_dense(&self, f: &GridKernel) -> Result<f64> {
        if f.order() != self.order() {
            return Err(Error::dim("dense and factored kernels of different orders"));
        }
        if f.order() == 0 {
            return Ok(f.values()[0] * self.coeff);
        }
        Ok(self.coeff * f.dot_tensor(&self.expanded())?)
    }
}

/// Calls `f` for every nonnegative integer `r x s` table (row-major) whose
/// row sums are at most `rows`, column sums at most `cols`, and total `total`.
fn for_each_table(rows: &[usize], cols: &[usize], total: usize, mut f: impl FnMut(&[usize])) {
    fn rec(
        cell: usize,
        s: usize,
        row_cap: &mut [usize],
        col_cap: &mut [usize],
        remaining: usize,
        table: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]),
    ) {
        if cell == table.len() {
            if remaining == 0 {
                f(table);
            }
            return;
        }
        let (i, j) = (cell / s, cell % s);
        let hi = row_cap[i].min(col_cap[j]).min(remaining);
        for k in 0..=hi {
            table[cell] = k;
            row_cap[i] -= k;
            col_cap[j] -= k;
            rec(cell + 1, s, row_cap, col_cap, remaining - k, table, f);
            row_cap[i] += k;
            col_cap[j] += k;
        }
        table[cell] = 0;
    }
    let s = cols.len();
    if rows.is_empty() || s == 0 {
        if total == 0 {
            f(&[]);
        }
        return;
    }
    let mut table = vec![0; rows.len() * s];
    rec(0, s, &mut rows.to_vec(), &mut cols.to_vec(), total, &mut table, &mut f);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_kernels::{contract, inner, symmetrize};
    use crate::path_sim::RngStream;

    fn random_fn(m: usize, rng: &mut RngStream) -> GridFunction {
        GridFunction::new((0..m).map(|_| 2.0 * rng.next_uniform() - 1.0).collect()).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn inner_matches_dense_oracle() {
        let mut rng = RngStream::new(11, 0);
        let m = 3;
        let (u, v, w) = (random_fn(m, &mut rng), random_fn(m, &mut rng), random_fn(m, &mut rng));
        let a = FactoredKernel::new(1.5, vec![(u.clone(), 2), (v.clone(), 1)]).unwrap();
        let b = FactoredKernel::new(-0.5, vec![(v.clone(), 1), (w.clone(), 1), (u.clone(), 1)]).unwrap();
        let limits = Limits::default();
        let dense = inner(&a.densify(&limits).unwrap(), &b.densify(&limits).unwrap()).unwrap();
        assert!(close(a.inner(&b).unwrap(), dense));
        assert!(close(a.dot_dense(&b.densify(&limits).unwrap()).unwrap(), dense));
    }

    #[test]
    fn contraction_matches_dense_oracle() {
        let mut rng = RngStream::new(12, 0);
        let m = 3;
        let (u, v, w) = (random_fn(m, &mut rng), random_fn(m, &mut rng), random_fn(m, &mut rng));
        let a = FactoredKernel::new(0.7, vec![(u.clone(), 2), (v.clone(), 1)]).unwrap();
        let b = FactoredKernel::new(1.3, vec![(w.clone(), 1), (u.clone(), 1)]).unwrap();
        let limits = Limits::default();
        let (da, db) = (a.densify(&limits).unwrap(), b.densify(&limits).unwrap());
        for l in 0..=2 {
            let oracle = symmetrize(&contract(&da, &db, l).unwrap()).unwrap();
            let terms = a.contract_sym(&b, l).unwrap();
            let mut sum = GridKernel::zeros(oracle.order(), m).unwrap();
            if oracle.order() == 0 {
                sum = GridKernel::scalar(0.0);
            }
            for t in &terms {
                sum = sum.add(&t.densify(&limits).unwrap()).unwrap();
            }
            for (x, y) in sum.values().iter().zip(oracle.values()) {
                assert!(close(*x, *y), "l = {l}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn orthogonal_symmetrized_norm() {
        // |sym(h1 ⊗ h2^{⊗q})|^2 = 1/(q+1) for orthonormal h1, h2
        let s2 = std::f64::consts::SQRT_2;
        let h1 = GridFunction::indicator(2, 0.0, 0.5, s2).unwrap();
        let h2 = GridFunction::indicator(2, 0.5, 1.0, s2).unwrap();
        for q in [1usize, 3, 7, 25] {
            let k = FactoredKernel::new(1.0, vec![(h1.clone(), 1), (h2.clone(), q)]).unwrap();
            assert!(close(k.norm_sq(), 1.0 / (q + 1) as f64));
        }
    }

    #[test]
    fn canonical_merging() {
        let h = GridFunction::new(vec![1.0, 2.0]).unwrap();
        let g = GridFunction::new(vec![0.0, 1.0]).unwrap();
        let a = FactoredKernel::new(1.0, vec![(h.clone(), 1), (g.clone(), 2), (h.clone(), 2)]).unwrap();
        let b = FactoredKernel::new(3.0, vec![(g, 2), (h, 3)]).unwrap();
        assert!(a.same_shape(&b));
        assert_eq!(a.order(), 5);
    }

    #[test]
    fn slice_matches_dense() {
        let mut rng = RngStream::new(13, 0);
        let m = 4;
        let (u, v) = (random_fn(m, &mut rng), random_fn(m, &mut rng));
        let a = FactoredKernel::new(2.0, vec![(u, 2), (v, 1)]).unwrap();
        let limits = Limits::default();
        let dense = a.densify(&limits).unwrap();
        for cell in 0..m {
            let oracle = dense.slice_last(cell).unwrap();
            let mut sum = GridKernel::zeros(2, m).unwrap();
            for t in a.slice(cell) {
                sum = sum.add(&t.densify(&limits).unwrap()).unwrap();
            }
            for (x, y) in sum.values().iter().zip(oracle.values()) {
                assert!(close(*x, *y));
            }
        }
    }
}

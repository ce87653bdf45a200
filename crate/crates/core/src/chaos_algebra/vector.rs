use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::grid_kernels::{symmetrize_with, FactoredKernel, GridFunction, GridKernel, Limits, RankOnePower, EXACT_TOL};
use crate::{Error, Result};

/// The order-`n` part of a chaos vector: `I_n` of the sum of its terms.
///
/// At most one dense term is kept; factored terms with the same factor
/// multiset are merged by adding coefficients. All terms are symmetric.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChaosKernel {
    dense: Option<GridKernel>,
    factored: Vec<FactoredKernel>,
}

impl ChaosKernel {
    pub fn dense(&self) -> Option<&GridKernel> {
        self.dense.as_ref()
    }

    pub fn factored(&self) -> &[FactoredKernel] {
        &self.factored
    }

    pub fn is_empty(&self) -> bool {
        self.dense.is_none() && self.factored.is_empty()
    }

    fn push_dense(&mut self, k: GridKernel) -> Result<()> {
        self.dense = Some(match self.dense.take() {
            Some(d) => d.add(&k)?,
            None => k,
        });
        Ok(())
    }

    fn push_factored(&mut self, k: FactoredKernel) {
        match self.factored.iter_mut().find(|t| t.same_shape(&k)) {
            Some(t) => *t = t.with_coeff(t.coeff() + k.coeff()),
            None => self.factored.push(k),
        }
    }

    fn merge(&mut self, other: ChaosKernel) -> Result<()> {
        if let Some(d) = other.dense {
            self.push_dense(d)?;
        }
        for f in other.factored {
            self.push_factored(f);
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> ChaosKernel {
        ChaosKernel {
            dense: self.dense.as_ref().map(|d| d.scaled(c)),
            factored: self.factored.iter().map(|f| f.scaled(c)).collect(),
        }
    }

    /// `<f~, g~>` summed over all term pairs.
    pub fn inner(&self, other: &ChaosKernel) -> Result<f64> {
        let mut acc = 0.0;
        if let (Some(a), Some(b)) = (&self.dense, &other.dense) {
            acc += crate::grid_kernels::inner(a, b)?;
        }
        if let Some(a) = &self.dense {
            for f in &other.factored {
                acc += f.dot_dense(a)?;
            }
        }
        if let Some(b) = &other.dense {
            for f in &self.factored {
                acc += f.dot_dense(b)?;
            }
        }
        for f in &self.factored {
            for g in &other.factored {
                acc += f.inner(g)?;
            }
        }
        Ok(acc)
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self).unwrap_or(f64::NAN)
    }

    /// Every term in factored form; dense terms qualify only at order 1.
    pub(crate) fn as_factored(&self) -> Option<Vec<FactoredKernel>> {
        let mut out = self.factored.clone();
        if let Some(d) = &self.dense {
            if d.order() != 1 {
                return None;
            }
            let h = GridFunction::new(d.values().to_vec()).ok()?;
            out.push(FactoredKernel::new(1.0, vec![(h, 1)]).ok()?);
        }
        Some(out)
    }

    /// Materializes the whole order as one dense kernel.
    pub fn to_dense(&self, order: usize, resolution: usize, limits: &Limits) -> Result<GridKernel> {
        let mut out = match &self.dense {
            Some(d) => d.clone(),
            None => GridKernel::zeros(order, resolution)?,
        };
        for f in &self.factored {
            out = out.add(&f.densify(limits)?)?;
        }
        Ok(out.mark_symmetric())
    }
}

/// A finite chaos decomposition `F = E F + sum_{n>=1} I_n(f_n)` on a grid of
/// resolution `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosVector {
    resolution: usize,
    mean: f64,
    kernels: BTreeMap<usize, ChaosKernel>,
}

impl ChaosVector {
    pub fn constant(resolution: usize, c: f64) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::arg("resolution must be positive"));
        }
        Ok(ChaosVector { resolution, mean: c, kernels: BTreeMap::new() })
    }

    pub fn zero(resolution: usize) -> Result<Self> {
        Self::constant(resolution, 0.0)
    }

    /// `I_1(h) = W(h)`.
    pub fn first_order(h: &GridFunction) -> Self {
        let mut v = ChaosVector { resolution: h.resolution(), mean: 0.0, kernels: BTreeMap::new() };
        v.kernels.entry(1).or_default().dense = Some(GridKernel::from_function(h));
        v
    }

    /// `I_n(f~)`; a non-symmetric `f` is symmetrized.
    pub fn from_kernel(f: GridKernel) -> Result<Self> {
        let mut v = Self::zero(f.resolution())?;
        v.add_dense(f)?;
        Ok(v)
    }

    pub fn from_factored(f: FactoredKernel) -> Result<Self> {
        let m = f.resolution().ok_or_else(|| Error::arg("scalar factored kernel has no resolution"))?;
        let mut v = Self::zero(m)?;
        v.add_factored(f)?;
        Ok(v)
    }

    /// `c I_p(h^{⊗p})`; power 0 gives the constant `c` on the grid of `h`.
    pub fn from_rank_one(r: RankOnePower) -> Result<Self> {
        let mut v = Self::zero(r.resolution())?;
        v.add_factored(r.into())?;
        Ok(v)
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn set_mean(&mut self, c: f64) {
        self.mean = c;
    }

    pub fn max_order(&self) -> usize {
        self.kernels.keys().next_back().copied().unwrap_or(0)
    }

    pub fn kernel(&self, order: usize) -> Option<&ChaosKernel> {
        self.kernels.get(&order)
    }

    /// Nonzero orders `n >= 1` with their kernels, ascending.
    pub fn orders(&self) -> impl Iterator<Item = (usize, &ChaosKernel)> {
        self.kernels.iter().map(|(n, k)| (*n, k))
    }

    pub fn add_dense(&mut self, f: GridKernel) -> Result<()> {
        if f.order() == 0 {
            self.mean += f.values()[0];
            return Ok(());
        }
        if f.resolution() != self.resolution {
            return Err(Error::dim(format!(
                "kernel resolution {} in a vector of resolution {}",
                f.resolution(),
                self.resolution
            )));
        }
        let f = if f.is_symmetric() {
            f
        } else if f.check_symmetric(EXACT_TOL) {
            f.mark_symmetric()
        } else {
            symmetrize_with(&f, &Limits::default())?
        };
        self.kernels.entry(f.order()).or_default().push_dense(f)
    }

    pub fn add_factored(&mut self, f: FactoredKernel) -> Result<()> {
        match f.resolution() {
            None => self.mean += f.coeff(),
            Some(m) if m != self.resolution => {
                return Err(Error::dim(format!("kernel resolution {m} in a vector of resolution {}", self.resolution)))
            }
            Some(_) => self.kernels.entry(f.order()).or_default().push_factored(f),
        }
        Ok(())
    }

    pub(crate) fn add_kernel(&mut self, order: usize, k: ChaosKernel) -> Result<()> {
        if order == 0 {
            return Err(Error::arg("order-0 parts are stored as the mean"));
        }
        self.kernels.entry(order).or_default().merge(k)
    }

    pub fn add(&self, other: &ChaosVector) -> Result<ChaosVector> {
        check_same_grid(self, other)?;
        let mut out = self.clone();
        out.mean += other.mean;
        for (n, k) in other.orders() {
            out.add_kernel(n, k.clone())?;
        }
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> ChaosVector {
        ChaosVector {
            resolution: self.resolution,
            mean: self.mean * c,
            kernels: self.kernels.iter().map(|(n, k)| (*n, k.scaled(c))).collect(),
        }
    }

    /// Applies `g(n, kernel)` to every order `n >= 1`; the mean is kept only
    /// if `keep_mean`.
    pub(crate) fn map_orders(&self, keep_mean: bool, g: impl Fn(usize) -> f64) -> ChaosVector {
        ChaosVector {
            resolution: self.resolution,
            mean: if keep_mean { self.mean } else { 0.0 },
            kernels: self.kernels.iter().map(|(n, k)| (*n, k.scaled(g(*n)))).collect(),
        }
    }

    /// `E F^2 = sum_n n! ||f_n||^2 + (E F)^2`.
    pub fn second_moment(&self) -> f64 {
        super::covariance(self, self).unwrap_or(f64::NAN) + self.mean * self.mean
    }

    /// Same random variable on a grid `factor` times finer.
    pub fn refine(&self, factor: usize) -> Result<ChaosVector> {
        let mut out = Self::constant(self.resolution * factor, self.mean)?;
        for (_, k) in self.orders() {
            if let Some(d) = k.dense() {
                out.add_dense(d.refine(factor)?.mark_symmetric())?;
            }
            for f in k.factored() {
                out.add_factored(f.refine(factor)?)?;
            }
        }
        Ok(out)
    }

    /// Every kernel restricted to cells before `cell`.
    pub fn restrict_before(&self, cell: usize) -> Result<ChaosVector> {
        let mut out = Self::constant(self.resolution, self.mean)?;
        for (_, k) in self.orders() {
            if let Some(d) = k.dense() {
                out.add_dense(d.restrict_before(cell).mark_symmetric())?;
            }
            for f in k.factored() {
                out.add_factored(f.restrict_before(cell))?;
            }
        }
        Ok(out)
    }
}

pub(crate) fn check_same_grid(a: &ChaosVector, b: &ChaosVector) -> Result<()> {
    if a.resolution != b.resolution {
        return Err(Error::dim(format!("chaos vectors on resolutions {} and {}", a.resolution, b.resolution)));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TermRepr {
    Dense(GridKernel),
    RankOne(RankOnePower),
    Factored(FactoredKernel),
}

#[derive(Serialize, Deserialize)]
struct VectorRepr {
    resolution: usize,
    kernels: BTreeMap<usize, Vec<TermRepr>>,
}

impl Serialize for ChaosVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut kernels = BTreeMap::new();
        kernels.insert(0, vec![TermRepr::Dense(GridKernel::scalar(self.mean))]);
        for (n, k) in self.orders() {
            let mut terms: Vec<TermRepr> = k.dense().cloned().map(TermRepr::Dense).into_iter().collect();
            for f in k.factored() {
                terms.push(match f.as_rank_one() {
                    Some(r) => TermRepr::RankOne(r),
                    None => TermRepr::Factored(f.clone()),
                });
            }
            kernels.insert(n, terms);
        }
        VectorRepr { resolution: self.resolution, kernels }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ChaosVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = VectorRepr::deserialize(d)?;
        let mut v = ChaosVector::zero(repr.resolution).map_err(D::Error::custom)?;
        for (n, terms) in repr.kernels {
            for t in terms {
                let res = match t {
                    TermRepr::Dense(k) if k.order() == n => v.add_dense(k),
                    TermRepr::RankOne(r) if r.power == n => v.add_factored(r.into()),
                    TermRepr::Factored(f) if f.order() == n => v.add_factored(f),
                    _ => Err(Error::dim(format!("term filed under order {n} has another order"))),
                };
                res.map_err(D::Error::custom)?;
            }
        }
        Ok(v)
    }
}

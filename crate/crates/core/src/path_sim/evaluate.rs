use crate::chaos_algebra::ChaosVector;
use crate::grid_kernels::{FactoredKernel, GridFunction, GridKernel, RankOnePower, EXACT_TOL};
use crate::{Error, Result};

use super::{refinement, scaled_hermite, WienerPath};

/// Largest dense order evaluated by direct summation on a path.
pub const MAX_DENSE_PATH_ORDER: usize = 3;

/// Per-cell sums of increments and of their squares and cubes.
#[derive(Debug, Clone)]
struct Aggregates {
    s: Vec<f64>,
    q: Vec<f64>,
    c: Vec<f64>,
    r: usize,
}

impl Aggregates {
    fn new(m: usize, r: usize) -> Self {
        Aggregates { s: vec![0.0; m], q: vec![0.0; m], c: vec![0.0; m], r }
    }

    fn push(&mut self, i: usize, x: f64) {
        let a = i / self.r;
        let x2 = x * x;
        self.s[a] += x;
        self.q[a] += x2;
        self.c[a] += x2 * x;
    }

    fn from_prefix(m: usize, r: usize, increments: &[f64]) -> Self {
        let mut agg = Self::new(m, r);
        for (i, &x) in increments.iter().enumerate() {
            agg.push(i, x);
        }
        agg
    }
}

/// `sum over pairwise distinct fine indices` of the refined kernel times the
/// increments, by inclusion-exclusion over coincidences.
fn distinct_sum(f: &[f64], order: usize, m: usize, agg: &Aggregates) -> f64 {
    let (s, q, c) = (&agg.s, &agg.q, &agg.c);
    match order {
        0 => f[0],
        1 => f.iter().zip(s).map(|(a, b)| a * b).sum(),
        2 => {
            let mut acc = 0.0;
            for a in 0..m {
                let row = &f[a * m..(a + 1) * m];
                acc += s[a] * row.iter().zip(s).map(|(x, y)| x * y).sum::<f64>();
                acc -= row[a] * q[a];
            }
            acc
        }
        3 => {
            let mut full = 0.0;
            let mut single = 0.0;
            let mut triple = 0.0;
            for a in 0..m {
                for b in 0..m {
                    let row = &f[(a * m + b) * m..(a * m + b + 1) * m];
                    full += s[a] * s[b] * row.iter().zip(s).map(|(x, y)| x * y).sum::<f64>();
                }
                for z in 0..m {
                    // one coincident pair in each of the three positions
                    single += q[a] * s[z] * (f[(a * m + a) * m + z] + f[(a * m + z) * m + a] + f[(z * m + a) * m + a]);
                }
                triple += f[(a * m + a) * m + a] * c[a];
            }
            full - single + 2.0 * triple
        }
        _ => unreachable!("dense path order checked by callers"),
    }
}

/// Kernel forms accepted by [`multiple_integral`].
#[derive(Debug, Clone, Copy)]
pub enum KernelRef<'a> {
    Dense(&'a GridKernel),
    RankOne(&'a RankOnePower),
    Factored(&'a FactoredKernel),
}

impl<'a> From<&'a GridKernel> for KernelRef<'a> {
    fn from(k: &'a GridKernel) -> Self {
        KernelRef::Dense(k)
    }
}

impl<'a> From<&'a RankOnePower> for KernelRef<'a> {
    fn from(k: &'a RankOnePower) -> Self {
        KernelRef::RankOne(k)
    }
}

impl<'a> From<&'a FactoredKernel> for KernelRef<'a> {
    fn from(k: &'a FactoredKernel) -> Self {
        KernelRef::Factored(k)
    }
}

fn check_dense(f: &GridKernel, steps: usize) -> Result<usize> {
    if f.order() > MAX_DENSE_PATH_ORDER {
        return Err(Error::cap(format!(
            "dense path integrals are limited to order {MAX_DENSE_PATH_ORDER}, got {}",
            f.order()
        )));
    }
    if f.order() == 0 {
        return Ok(steps);
    }
    refinement(f.resolution(), steps)
        .map_err(|_| Error::cap(format!("kernel resolution {} is not aligned with {steps} path steps", f.resolution())))
}

/// `I_n(f)` on one path.
///
/// Dense kernels are refined to the path grid and summed over pairwise
/// distinct increment indices. Rank-one and factored kernels with orthogonal
/// bases use `I_n(sym(⊗ v_i^{a_i})) = prod_i He_{a_i}(W(v_i); ||v_i||^2)`.
pub fn multiple_integral<'a>(f: impl Into<KernelRef<'a>>, path: &WienerPath) -> Result<f64> {
    match f.into() {
        KernelRef::Dense(k) => {
            let r = check_dense(k, path.steps())?;
            let m = if k.order() == 0 { 1 } else { k.resolution() };
            let agg = Aggregates::from_prefix(m, r, path.increments());
            Ok(distinct_sum(k.values(), k.order(), m, &agg))
        }
        KernelRef::RankOne(k) => {
            let w = super::wiener_integral(&k.base, path)?;
            let mut he = Vec::new();
            scaled_hermite(w, k.base.norm_sq(), k.power, &mut he);
            Ok(k.coeff * he[k.power])
        }
        KernelRef::Factored(k) => {
            ChaosEvaluator::for_terms(0.0, &[], std::slice::from_ref(k), path.steps())?.evaluate(path)
        }
    }
}

/// One factored term, as indices into a shared base list.
#[derive(Debug, Clone)]
struct Term {
    coeff: f64,
    factors: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Default)]
struct Bases {
    bases: Vec<GridFunction>,
    max_power: Vec<usize>,
    refinement: Vec<usize>,
    terms: Vec<Term>,
    disjoint: bool,
}

impl Bases {
    fn build(factored: &[&FactoredKernel], steps: usize) -> Result<Self> {
        let mut out = Bases { disjoint: true, ..Bases::default() };
        for f in factored {
            if !f.pairwise_orthogonal(EXACT_TOL) {
                return Err(Error::pre("path evaluation of a factored kernel needs orthogonal bases"));
            }
            out.disjoint &= f.pairwise_disjoint();
            let mut factors = Vec::with_capacity(f.factors().len());
            for (b, p) in f.factors() {
                let idx = match out.bases.iter().position(|x| x == b) {
                    Some(i) => i,
                    None => {
                        out.refinement.push(refinement(b.resolution(), steps)?);
                        out.bases.push(b.clone());
                        out.max_power.push(0);
                        out.bases.len() - 1
                    }
                };
                out.max_power[idx] = out.max_power[idx].max(*p);
                factors.push((idx, *p));
            }
            out.terms.push(Term { coeff: f.coeff(), factors });
        }
        Ok(out)
    }

    /// `(W(v 1_{[0,t_i)}), ||v 1_{[0,t_i)}||^2)` for every base.
    fn states(&self, increments: &[f64], dt: f64) -> Vec<(f64, f64)> {
        self.bases
            .iter()
            .zip(&self.refinement)
            .map(|(b, &r)| {
                let mut w = 0.0;
                let mut var = 0.0;
                for (i, x) in increments.iter().enumerate() {
                    let v = b.value(i / r);
                    w += v * x;
                    var += v * v * dt;
                }
                (w, var)
            })
            .collect()
    }

    fn hermite_tables(&self, states: &[(f64, f64)], tables: &mut [Vec<f64>]) {
        for ((&(w, var), &p), t) in states.iter().zip(&self.max_power).zip(tables.iter_mut()) {
            scaled_hermite(w, var, p, t);
        }
    }

    fn value(&self, tables: &[Vec<f64>]) -> f64 {
        self.terms.iter().map(|t| t.coeff * t.factors.iter().map(|&(b, p)| tables[b][p]).product::<f64>()).sum()
    }
}

/// A chaos vector prepared for repeated evaluation on paths with a fixed
/// number of steps.
#[derive(Debug, Clone)]
pub struct ChaosEvaluator {
    steps: usize,
    mean: f64,
    dense: Vec<(GridKernel, usize)>,
    bases: Bases,
}

impl ChaosEvaluator {
    pub fn new(f: &ChaosVector, steps: usize) -> Result<Self> {
        let dense: Vec<&GridKernel> = f.orders().filter_map(|(_, k)| k.dense()).collect();
        let factored: Vec<&FactoredKernel> = f.orders().flat_map(|(_, k)| k.factored()).collect();
        Self::build(f.mean(), &dense, &factored, steps)
    }

    fn for_terms(mean: f64, dense: &[&GridKernel], factored: &[FactoredKernel], steps: usize) -> Result<Self> {
        let refs: Vec<&FactoredKernel> = factored.iter().collect();
        Self::build(mean, dense, &refs, steps)
    }

    fn build(mean: f64, dense: &[&GridKernel], factored: &[&FactoredKernel], steps: usize) -> Result<Self> {
        let dense = dense.iter().map(|k| Ok(((*k).clone(), check_dense(k, steps)?))).collect::<Result<Vec<_>>>()?;
        Ok(ChaosEvaluator { steps, mean, dense, bases: Bases::build(factored, steps)? })
    }

    fn check_path(&self, path: &WienerPath) -> Result<()> {
        if path.steps() != self.steps {
            return Err(Error::dim(format!("evaluator built for {} steps, path has {}", self.steps, path.steps())));
        }
        Ok(())
    }

    /// `F` on the path.
    pub fn evaluate(&self, path: &WienerPath) -> Result<f64> {
        self.conditional(path, self.steps)
    }

    /// `E(F | F_{t_i})`: every kernel restricted to `[0, t_i)`.
    pub fn conditional(&self, path: &WienerPath, i: usize) -> Result<f64> {
        self.check_path(path)?;
        if i > self.steps {
            return Err(Error::arg(format!("step {i} beyond the path length {}", self.steps)));
        }
        if i < self.steps && !self.bases.disjoint {
            return Err(Error::pre("conditioning a factored kernel needs disjoint bases"));
        }
        let prefix = &path.increments()[..i];
        let mut acc = self.mean;
        for (k, r) in &self.dense {
            let m = if k.order() == 0 { 1 } else { k.resolution() };
            let agg = Aggregates::from_prefix(m, *r, prefix);
            acc += distinct_sum(k.values(), k.order(), m, &agg);
        }
        if !self.bases.terms.is_empty() {
            let states = if i == self.steps {
                self.bases
                    .bases
                    .iter()
                    .map(|b| Ok((super::wiener_integral(b, path)?, b.norm_sq())))
                    .collect::<Result<Vec<_>>>()?
            } else {
                self.bases.states(prefix, path.dt())
            };
            let mut tables = vec![Vec::new(); self.bases.bases.len()];
            self.bases.hermite_tables(&states, &mut tables);
            acc += self.bases.value(&tables);
        }
        Ok(acc)
    }
}

/// `sum_n I_n(f_n) + E F` on one path.
pub fn evaluate_chaos(f: &ChaosVector, path: &WienerPath) -> Result<f64> {
    ChaosEvaluator::new(f, path.steps())?.evaluate(path)
}

/// The Clark–Ocone integrand of a chaos vector along a path.
///
/// Step `i` uses `u_i = sum_n n I_{n-1}(f_n(., t_i) 1_{[0,t_i)}^{⊗(n-1)})`
/// evaluated from increments `0..i`, so the left-endpoint Itô sum is adapted.
#[derive(Debug, Clone)]
pub struct IntegrandEvaluator {
    steps: usize,
    dense: Vec<(GridKernel, usize)>,
    bases: Bases,
}

impl IntegrandEvaluator {
    pub fn new(f: &ChaosVector, steps: usize) -> Result<Self> {
        let dense = f
            .orders()
            .filter_map(|(_, k)| k.dense())
            .map(|k| Ok((k.clone(), check_dense(k, steps)?)))
            .collect::<Result<Vec<_>>>()?;
        let factored: Vec<&FactoredKernel> = f.orders().flat_map(|(_, k)| k.factored()).collect();
        let bases = Bases::build(&factored, steps)?;
        if !bases.disjoint {
            return Err(Error::pre("path integrand of a factored kernel needs disjoint bases"));
        }
        Ok(IntegrandEvaluator { steps, dense, bases })
    }

    /// `u_0, ..., u_{N-1}`.
    pub fn integrand(&self, path: &WienerPath) -> Result<Vec<f64>> {
        if path.steps() != self.steps {
            return Err(Error::dim(format!("evaluator built for {} steps, path has {}", self.steps, path.steps())));
        }
        let dt = path.dt();
        let mut aggs: Vec<Aggregates> = self.dense.iter().map(|(k, r)| Aggregates::new(k.resolution(), *r)).collect();
        let nb = self.bases.bases.len();
        let mut states = vec![(0.0, 0.0); nb];
        let mut tables = vec![Vec::new(); nb];
        let mut out = Vec::with_capacity(self.steps);
        for (i, &x) in path.increments().iter().enumerate() {
            let mut u = 0.0;
            for ((k, r), agg) in self.dense.iter().zip(&aggs) {
                u += dense_slice_integral(k, i / r, agg);
            }
            if !self.bases.terms.is_empty() {
                self.bases.hermite_tables(&states, &mut tables);
                for t in &self.bases.terms {
                    for (pos, &(b, p)) in t.factors.iter().enumerate() {
                        let v = self.bases.bases[b].value(i / self.bases.refinement[b]);
                        if v == 0.0 {
                            continue;
                        }
                        let rest: f64 = t
                            .factors
                            .iter()
                            .enumerate()
                            .map(|(q, &(c, pc))| tables[c][if q == pos { pc - 1 } else { pc }])
                            .product();
                        u += t.coeff * p as f64 * v * rest;
                    }
                }
            }
            out.push(u);
            for agg in aggs.iter_mut() {
                agg.push(i, x);
            }
            for ((b, r), st) in self.bases.bases.iter().zip(&self.bases.refinement).zip(states.iter_mut()) {
                let v = b.value(i / r);
                st.0 += v * x;
                st.1 += v * v * dt;
            }
        }
        Ok(out)
    }
}

/// `n I_{n-1}(f(., a))` over the increments seen so far.
fn dense_slice_integral(k: &GridKernel, a: usize, agg: &Aggregates) -> f64 {
    let m = k.resolution();
    let f = k.values();
    let (s, q) = (&agg.s, &agg.q);
    match k.order() {
        0 => 0.0,
        1 => f[a],
        2 => 2.0 * (0..m).map(|b| f[b * m + a] * s[b]).sum::<f64>(),
        3 => {
            let mut acc = 0.0;
            for b in 0..m {
                let mut row = 0.0;
                for c in 0..m {
                    row += f[(b * m + c) * m + a] * s[c];
                }
                acc += s[b] * row - f[(b * m + b) * m + a] * q[b];
            }
            3.0 * acc
        }
        _ => unreachable!("dense path order checked at construction"),
    }
}

/// `u_0, ..., u_{N-1}` of the Clark–Ocone integrand of `f` on `path`.
pub fn clark_ocone_on_path(f: &ChaosVector, path: &WienerPath) -> Result<Vec<f64>> {
    IntegrandEvaluator::new(f, path.steps())?.integrand(path)
}

#[cfg(test)]
mod tests;

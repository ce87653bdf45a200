use serde::{Deserialize, Serialize};

use super::{GridFunction, Limits};
use crate::{Error, Result};

/// Dense kernel of order `n` on `m^n` cells, stored row-major.
///
/// The `symmetric` and `diagonal_free` flags are set by the operations that
/// guarantee them; they are not part of the serialized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelRepr")]
pub struct GridKernel {
    order: usize,
    resolution: usize,
    values: Vec<f64>,
    #[serde(skip)]
    symmetric: bool,
    #[serde(skip)]
    diagonal_free: bool,
}

#[derive(Deserialize)]
struct KernelRepr {
    order: usize,
    resolution: usize,
    values: Vec<f64>,
}

impl TryFrom<KernelRepr> for GridKernel {
    type Error = Error;

    fn try_from(r: KernelRepr) -> Result<Self> {
        GridKernel::from_values(r.order, r.resolution, r.values)
    }
}

impl GridKernel {
    pub fn zeros(order: usize, resolution: usize) -> Result<Self> {
        let len = Limits::default().dense_len(order, resolution)?;
        Ok(GridKernel { order, resolution, values: vec![0.0; len], symmetric: true, diagonal_free: true })
    }

    pub fn scalar(c: f64) -> Self {
        GridKernel { order: 0, resolution: 1, values: vec![c], symmetric: true, diagonal_free: true }
    }

    pub fn from_values(order: usize, resolution: usize, values: Vec<f64>) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::arg("resolution must be positive"));
        }
        let len = Limits::default().dense_len(order, resolution)?;
        if values.len() != len {
            return Err(Error::dim(format!(
                "order {order} kernel on resolution {resolution} needs {len} values, got {}",
                values.len()
            )));
        }
        let mut k = GridKernel { order, resolution, values, symmetric: false, diagonal_free: false };
        k.symmetric = order <= 1;
        k.diagonal_free = order <= 1;
        Ok(k)
    }

    pub fn from_fn(order: usize, resolution: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = Limits::default().dense_len(order, resolution)?;
        let mut idx = vec![0; order];
        let values = (0..len)
            .map(|flat| {
                unravel(flat, resolution, &mut idx);
                f(&idx)
            })
            .collect();
        Self::from_values(order, resolution, values)
    }

    /// `v_1 ⊗ ... ⊗ v_n` (not symmetrized).
    pub fn tensor(factors: &[&GridFunction]) -> Result<Self> {
        let m = factors.first().map(|f| f.resolution()).ok_or_else(|| Error::arg("empty tensor product"))?;
        if factors.iter().any(|f| f.resolution() != m) {
            return Err(Error::dim("tensor factors on different resolutions"));
        }
        Self::from_fn(factors.len(), m, |idx| idx.iter().zip(factors).map(|(&j, f)| f.value(j)).product())
    }

    pub fn from_function(h: &GridFunction) -> Self {
        GridKernel {
            order: 1,
            resolution: h.resolution(),
            values: h.values().to_vec(),
            symmetric: true,
            diagonal_free: true,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn is_diagonal_free(&self) -> bool {
        self.diagonal_free
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[ravel(idx, self.resolution)]
    }

    /// Order-0 value; `None` for higher orders.
    pub fn as_scalar(&self) -> Option<f64> {
        (self.order == 0).then(|| self.values[0])
    }

    pub fn norm_sq(&self) -> f64 {
        let vol = (self.resolution as f64).powi(self.order as i32);
        self.values.iter().map(|v| v * v).sum::<f64>() / vol
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> GridKernel {
        GridKernel { values: self.values.iter().map(|v| c * v).collect(), ..self.clone() }
    }

    pub fn add(&self, other: &GridKernel) -> Result<GridKernel> {
        self.same_shape(other)?;
        Ok(GridKernel {
            order: self.order,
            resolution: self.resolution,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            symmetric: self.symmetric && other.symmetric,
            diagonal_free: self.diagonal_free && other.diagonal_free,
        })
    }

    pub fn sub(&self, other: &GridKernel) -> Result<GridKernel> {
        self.add(&other.scaled(-1.0))
    }

    fn same_shape(&self, other: &GridKernel) -> Result<()> {
        if self.order != other.order || self.resolution != other.resolution {
            return Err(Error::dim(format!(
                "kernels of (order, resolution) ({}, {}) and ({}, {})",
                self.order, self.resolution, other.order, other.resolution
            )));
        }
        Ok(())
    }

    /// Checks invariance under every adjacent transposition, which generate
    /// the symmetric group.
    pub fn check_symmetric(&self, tol: f64) -> bool {
        let m = self.resolution;
        let mut idx = vec![0; self.order];
        for flat in 0..self.values.len() {
            unravel(flat, m, &mut idx);
            for k in 1..self.order {
                idx.swap(k - 1, k);
                let other = self.values[ravel(&idx, m)];
                idx.swap(k - 1, k);
                if (other - self.values[flat]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn check_diagonal_free(&self) -> bool {
        let mut idx = vec![0; self.order];
        (0..self.values.len()).all(|flat| {
            unravel(flat, self.resolution, &mut idx);
            !has_repeat(&idx) || self.values[flat] == 0.0
        })
    }

    /// The same kernel on a grid `factor` times finer.
    pub fn refine(&self, factor: usize) -> Result<GridKernel> {
        if factor == 0 {
            return Err(Error::arg("refinement factor must be positive"));
        }
        let m = self.resolution;
        let mut out = GridKernel::from_fn(self.order, m * factor, |idx| {
            let coarse: usize = idx.iter().fold(0, |acc, &j| acc * m + j / factor);
            self.values[coarse]
        })?;
        out.symmetric = self.symmetric;
        out.diagonal_free = self.diagonal_free;
        Ok(out)
    }

    /// `f(., cell)`: fixes the last argument.
    pub fn slice_last(&self, cell: usize) -> Result<GridKernel> {
        if self.order == 0 {
            return Err(Error::arg("cannot slice an order-0 kernel"));
        }
        if cell >= self.resolution {
            return Err(Error::arg(format!("cell {cell} outside resolution {}", self.resolution)));
        }
        let m = self.resolution;
        let values = self.values.iter().skip(cell).step_by(m).copied().collect();
        let mut out = GridKernel::from_values(self.order - 1, m, values)?;
        out.symmetric = self.symmetric || out.order <= 1;
        out.diagonal_free = self.diagonal_free || out.order <= 1;
        Ok(out)
    }

    /// Copy with every entry that has an index `>= cell` set to zero.
    pub fn restrict_before(&self, cell: usize) -> GridKernel {
        let mut out = self.clone();
        let mut idx = vec![0; self.order];
        for (flat, v) in out.values.iter_mut().enumerate() {
            unravel(flat, self.resolution, &mut idx);
            if idx.iter().any(|&j| j >= cell) {
                *v = 0.0;
            }
        }
        out
    }

    /// `<f, v_1 ⊗ ... ⊗ v_n>` by successive contraction of the last argument.
    pub fn dot_tensor(&self, factors: &[&GridFunction]) -> Result<f64> {
        if factors.len() != self.order || factors.iter().any(|f| f.resolution() != self.resolution) {
            return Err(Error::dim("tensor factors do not match kernel shape"));
        }
        let m = self.resolution;
        let mut current = self.values.clone();
        for f in factors.iter().rev() {
            current = current
                .chunks_exact(m)
                .map(|row| row.iter().zip(f.values()).map(|(a, b)| a * b).sum::<f64>() / m as f64)
                .collect();
        }
        Ok(current[0])
    }

    pub(crate) fn mark_symmetric(mut self) -> Self {
        self.symmetric = true;
        self
    }
}

pub(crate) fn unravel(mut flat: usize, m: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = flat % m;
        flat /= m;
    }
}

pub(crate) fn ravel(idx: &[usize], m: usize) -> usize {
    idx.iter().fold(0, |acc, &j| acc * m + j)
}

fn has_repeat(idx: &[usize]) -> bool {
    (0..idx.len()).any(|a| (a + 1..idx.len()).any(|b| idx[a] == idx[b]))
}

/// `L^2([0,1]^n)` inner product of the piecewise-constant representatives.
pub fn inner(f: &GridKernel, g: &GridKernel) -> Result<f64> {
    f.same_shape(g)?;
    let vol = (f.resolution as f64).powi(f.order as i32);
    Ok(f.values.iter().zip(&g.values).map(|(a, b)| a * b).sum::<f64>() / vol)
}

pub fn symmetrize(f: &GridKernel) -> Result<GridKernel> {
    symmetrize_with(f, &Limits::default())
}

/// Average over all `n!` argument permutations.
///
/// Each permutation orbit is visited once through its nondecreasing
/// representative, then the average is scattered back to the whole orbit.
pub fn symmetrize_with(f: &GridKernel, limits: &Limits) -> Result<GridKernel> {
    let n = f.order;
    if n > limits.max_symmetrize_order {
        return Err(Error::cap(format!(
            "symmetrization of order {n} exceeds the configured maximum {}",
            limits.max_symmetrize_order
        )));
    }
    if f.symmetric || n <= 1 {
        return Ok(f.clone().mark_symmetric());
    }
    let m = f.resolution;
    let perms = permutations(n);
    let weight = 1.0 / perms.len() as f64;
    let mut out = vec![0.0; f.values.len()];
    let mut rep = vec![0usize; n];
    let mut targets = Vec::with_capacity(perms.len());
    loop {
        targets.clear();
        let mut acc = 0.0;
        for p in &perms {
            let flat = p.iter().fold(0, |a, &k| a * m + rep[k]);
            acc += f.values[flat];
            targets.push(flat);
        }
        let avg = acc * weight;
        for &t in &targets {
            out[t] = avg;
        }
        if !next_nondecreasing(&mut rep, m) {
            break;
        }
    }
    Ok(GridKernel { order: n, resolution: m, values: out, symmetric: true, diagonal_free: f.diagonal_free })
}

fn next_nondecreasing(rep: &mut [usize], m: usize) -> bool {
    let n = rep.len();
    for pos in (0..n).rev() {
        if rep[pos] + 1 < m {
            let v = rep[pos] + 1;
            for slot in &mut rep[pos..] {
                *slot = v;
            }
            return true;
        }
    }
    false
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// `f ⊗_l g`: integrates the last `l` arguments of `f` against the last `l`
/// arguments of `g`. The result has order `p + q - 2l` with `f`'s free
/// arguments first; it is not symmetric in general.
pub fn contract(f: &GridKernel, g: &GridKernel, l: usize) -> Result<GridKernel> {
    if f.resolution != g.resolution {
        return Err(Error::dim(format!("resolutions {} and {}", f.resolution, g.resolution)));
    }
    if l > f.order.min(g.order) {
        return Err(Error::arg(format!("contraction index {l} exceeds min order {}", f.order.min(g.order))));
    }
    let m = f.resolution;
    let limits = Limits::default();
    let inner_len = limits.dense_len(l, m)?;
    let f_rows = f.values.len() / inner_len;
    let g_rows = g.values.len() / inner_len;
    let out_order = f.order + g.order - 2 * l;
    limits.dense_len(out_order, m)?;
    let w = 1.0 / inner_len as f64;
    let mut values = Vec::with_capacity(f_rows * g_rows);
    for fr in f.values.chunks_exact(inner_len) {
        for gr in g.values.chunks_exact(inner_len) {
            values.push(fr.iter().zip(gr).map(|(a, b)| a * b).sum::<f64>() * w);
        }
    }
    let resolution = if out_order == 0 { 1 } else { m };
    GridKernel::from_values(out_order, resolution, values)
}

/// Copy of `f` with every coincident-index entry set to zero.
pub fn zero_diagonal(f: &GridKernel) -> GridKernel {
    if f.diagonal_free {
        return f.clone();
    }
    let mut out = f.clone();
    let mut idx = vec![0; f.order];
    for (flat, v) in out.values.iter_mut().enumerate() {
        unravel(flat, f.resolution, &mut idx);
        if has_repeat(&idx) {
            *v = 0.0;
        }
    }
    out.diagonal_free = true;
    out
}

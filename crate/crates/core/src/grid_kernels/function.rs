use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A function on `[0,1]` that is constant on the cells `((j-1)/m, j/m]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::arg("grid function needs at least one cell"));
        }
        Ok(GridFunction { values })
    }

    /// Samples `f` at cell midpoints.
    pub fn from_fn(resolution: usize, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        let m = resolution as f64;
        Self::new((0..resolution).map(|j| f((j as f64 + 0.5) / m)).collect())
    }

    pub fn constant(resolution: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; resolution])
    }

    /// `scale * 1_{(a,b]}` on a grid where `a` and `b` fall on cell boundaries.
    pub fn indicator(resolution: usize, a: f64, b: f64, scale: f64) -> Result<Self> {
        let m = resolution as f64;
        let (lo, hi) = ((a * m).round(), (b * m).round());
        if (lo - a * m).abs() > 1e-9 || (hi - b * m).abs() > 1e-9 || lo < 0.0 || hi > m || lo > hi {
            return Err(Error::arg(format!("indicator ({a}, {b}] is not aligned with resolution {resolution}")));
        }
        Self::new((0..resolution).map(|j| if (j as f64) >= lo && (j as f64) < hi { scale } else { 0.0 }).collect())
    }

    pub fn resolution(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        if self.resolution() != other.resolution() {
            return Err(Error::dim(format!(
                "grid functions on resolutions {} and {}",
                self.resolution(),
                other.resolution()
            )));
        }
        let dot: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(dot / self.resolution() as f64)
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.resolution() as f64
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        GridFunction { values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Same function on a grid `factor` times finer.
    pub fn refine(&self, factor: usize) -> Result<GridFunction> {
        if factor == 0 {
            return Err(Error::arg("refinement factor must be positive"));
        }
        Ok(GridFunction { values: self.values.iter().flat_map(|&v| std::iter::repeat_n(v, factor)).collect() })
    }

    /// Copy with every cell at index `>= cell` set to zero.
    pub fn restrict_before(&self, cell: usize) -> GridFunction {
        let mut values = self.values.clone();
        for v in values.iter_mut().skip(cell) {
            *v = 0.0;
        }
        GridFunction { values }
    }

    /// Cells where the function is nonzero.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, _)| j)
    }

    pub(crate) fn disjoint_support(&self, other: &GridFunction) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| *a == 0.0 || *b == 0.0)
    }

    /// Total order on values, used to canonicalize factor lists.
    pub(crate) fn cmp_values(&self, other: &GridFunction) -> std::cmp::Ordering {
        for (a, b) in self.values.iter().zip(&other.values) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.values.len().cmp(&other.values.len())
    }
}

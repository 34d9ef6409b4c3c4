//! Storage for values indexed by a centred multi-integer box and for
//! samples on uniform tensor grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values indexed by `j ∈ [-radius, radius]^dim`, stored row-major with the
/// last axis varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeArray {
    dim: usize,
    radius: usize,
    data: Vec<f64>,
}

impl LatticeArray {
    pub fn zeros(dim: usize, radius: usize) -> Self {
        let side = 2 * radius + 1;
        Self { dim, radius, data: vec![0.0; side.pow(dim as u32)] }
    }

    pub fn from_fn(dim: usize, radius: usize, mut f: impl FnMut(&[i64]) -> f64) -> Self {
        let mut out = Self::zeros(dim, radius);
        let mut idx = vec![0i64; dim];
        for flat in 0..out.data.len() {
            out.unflatten_into(flat, &mut idx);
            out.data[flat] = f(&idx);
        }
        out
    }

    pub fn from_vec(dim: usize, radius: usize, data: Vec<f64>) -> Result<Self> {
        let side = 2 * radius + 1;
        if data.len() != side.pow(dim as u32) {
            return Err(Error::Parameter(format!(
                "expected {} values for a radius-{radius} box in dimension {dim}, got {}",
                side.pow(dim as u32),
                data.len()
            )));
        }
        Ok(Self { dim, radius, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn contains(&self, j: &[i64]) -> bool {
        j.len() == self.dim && j.iter().all(|&c| c.unsigned_abs() as usize <= self.radius)
    }

    pub fn flat_index(&self, j: &[i64]) -> Option<usize> {
        if !self.contains(j) {
            return None;
        }
        let side = self.side();
        Some(j.iter().fold(0usize, |acc, &c| acc * side + (c + self.radius as i64) as usize))
    }

    pub fn unflatten_into(&self, mut flat: usize, out: &mut [i64]) {
        let side = self.side();
        for axis in (0..self.dim).rev() {
            out[axis] = (flat % side) as i64 - self.radius as i64;
            flat /= side;
        }
    }

    pub fn get(&self, j: &[i64]) -> Option<f64> {
        self.flat_index(j).map(|i| self.data[i])
    }

    pub fn set(&mut self, j: &[i64], value: f64) -> Result<()> {
        let i = self
            .flat_index(j)
            .ok_or_else(|| Error::Parameter(format!("index {j:?} outside radius {}", self.radius)))?;
        self.data[i] = value;
        Ok(())
    }

    /// Iterates over `(multi_index, value)` pairs in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<i64>, f64)> + '_ {
        (0..self.data.len()).map(move |flat| {
            let mut idx = vec![0i64; self.dim];
            self.unflatten_into(flat, &mut idx);
            (idx, self.data[flat])
        })
    }

    /// Largest magnitude among entries with `‖j‖_∞ == radius`.
    pub fn boundary_max_abs(&self) -> f64 {
        self.iter()
            .filter(|(j, _)| j.iter().any(|&c| c.unsigned_abs() as usize == self.radius))
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max)
    }
}

/// Samples on the uniform tensor grid `origin + spacing·i`, `i ∈ [0, n)^dim`,
/// row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridValues {
    pub dim: usize,
    pub points_per_axis: usize,
    pub spacing: f64,
    pub origin: f64,
    pub data: Vec<f64>,
}

impl GridValues {
    pub fn from_fn(
        dim: usize,
        points_per_axis: usize,
        spacing: f64,
        origin: f64,
        mut f: impl FnMut(&[f64]) -> f64,
    ) -> Self {
        let total = points_per_axis.pow(dim as u32);
        let mut x = vec![0.0; dim];
        let mut data = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rest = flat;
            for axis in (0..dim).rev() {
                x[axis] = origin + spacing * (rest % points_per_axis) as f64;
                rest /= points_per_axis;
            }
            data.push(f(&x));
        }
        Self { dim, points_per_axis, spacing, origin, data }
    }

    pub fn coordinate(&self, index: usize) -> f64 {
        self.origin + self.spacing * index as f64
    }

    /// Physical coordinates of the sample stored at `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            x[axis] = self.coordinate(rest % self.points_per_axis);
            rest /= self.points_per_axis;
        }
        x
    }

    /// Index of the grid node nearest to `x` along one axis, if it lies on the grid.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let r = ((x - self.origin) / self.spacing).round();
        (r >= 0.0 && (r as usize) < self.points_per_axis).then_some(r as usize)
    }

    pub fn value_at_nodes(&self, idx: &[usize]) -> f64 {
        let flat = idx.iter().fold(0usize, |acc, &i| acc * self.points_per_axis + i);
        self.data[flat]
    }

    /// Value at the node nearest to `x`; `None` when `x` is off the grid.
    pub fn value_near(&self, x: &[f64]) -> Option<f64> {
        let mut idx = Vec::with_capacity(self.dim);
        for &c in x {
            idx.push(self.node_index(c)?);
        }
        Some(self.value_at_nodes(&idx))
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

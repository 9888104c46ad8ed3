//! Quadrature discretization of the domain Q and the nested family Q(r).
//!
//! Domains are axis-aligned boxes `[0, L]^d` with `L = box_side · scale`,
//! discretized by a uniform cell-centered (midpoint) rule: positive equal
//! weights and an exactly representable measure, which is what the
//! negative-definiteness guarantee of the kernel module needs. The family
//! Q(r) is realized by scaling node coordinates about the box corner while
//! keeping the node count fixed, so domain size and resolution vary
//! independently.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Hard cap on node count: the pipeline is dense (N×N matrix, full
/// eigendecomposition), so anything past a few thousand nodes is a
/// misconfiguration rather than a workload.
pub const MAX_NODES: usize = 4096;

#[derive(Debug)]
pub struct DomainGrid {
    dimension: usize,
    box_side: f64,
    cells_per_axis: usize,
    scale: f64,
    /// Node coordinates; unused trailing coordinates stay 0 so distance
    /// computations are dimension-agnostic.
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
    /// Sum of weights (mes Q), accumulated — not the closed form.
    measure: f64,
}

impl DomainGrid {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn box_side(&self) -> f64 {
        self.box_side
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    /// The member of the nested family this grid represents.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// mes Q.
    pub fn measure(&self) -> f64 {
        self.measure
    }

    /// Two grids host compatible fields when they agree on shape and
    /// geometry parameters (scalar comparisons; node arrays follow from
    /// them deterministically).
    pub fn same_layout(&self, other: &DomainGrid) -> bool {
        self.dimension == other.dimension
            && self.cells_per_axis == other.cells_per_axis
            && self.box_side == other.box_side
            && self.scale == other.scale
    }
}

/// Build the uniform cell-centered grid on the box of side `box_side · scale`.
pub fn build_grid(
    dimension: usize,
    box_side: f64,
    cells_per_axis: usize,
    scale: f64,
) -> Result<Arc<DomainGrid>> {
    if !(1..=3).contains(&dimension) {
        return Err(Error::Input(format!(
            "dimension must be 1, 2 or 3, got {dimension}"
        )));
    }
    if cells_per_axis < 1 {
        return Err(Error::Input("cells_per_axis must be ≥ 1".into()));
    }
    if !(box_side.is_finite() && box_side > 0.0) {
        return Err(Error::Input(format!(
            "box_side must be positive and finite, got {box_side}"
        )));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Input(format!(
            "scale must be positive and finite, got {scale}"
        )));
    }
    let count = cells_per_axis
        .checked_pow(dimension as u32)
        .filter(|&c| c <= MAX_NODES)
        .ok_or_else(|| {
            Error::Resource(format!(
                "{cells_per_axis}^{dimension} nodes exceed the cap of {MAX_NODES}"
            ))
        })?;

    let side = box_side * scale;
    let h = side / cells_per_axis as f64;
    let cell_weight = h.powi(dimension as i32);

    // Row-major node ordering, last axis fastest.
    let mut nodes = Vec::with_capacity(count);
    for flat in 0..count {
        let mut rem = flat;
        let mut p = [0.0; 3];
        for axis in (0..dimension).rev() {
            p[axis] = ((rem % cells_per_axis) as f64 + 0.5) * h;
            rem /= cells_per_axis;
        }
        nodes.push(p);
    }

    let weights = vec![cell_weight; count];
    let measure = weights.iter().sum();
    Ok(Arc::new(DomainGrid {
        dimension,
        box_side,
        cells_per_axis,
        scale,
        nodes,
        weights,
        measure,
    }))
}

/// Produce the Q(r) member of the nested family: node coordinates scaled by
/// `r / g.scale` about the box corner, weights by that factor to the power
/// of the dimension, node count unchanged.
pub fn scale_domain(g: &DomainGrid, r: f64) -> Result<Arc<DomainGrid>> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Input(format!(
            "target scale must be positive and finite, got {r}"
        )));
    }
    let factor = r / g.scale;
    let weight_factor = factor.powi(g.dimension as i32);
    let nodes = g
        .nodes
        .iter()
        .map(|p| [p[0] * factor, p[1] * factor, p[2] * factor])
        .collect();
    let weights: Vec<f64> = g.weights.iter().map(|w| w * weight_factor).collect();
    let measure = weights.iter().sum();
    Ok(Arc::new(DomainGrid {
        dimension: g.dimension,
        box_side: g.box_side,
        cells_per_axis: g.cells_per_axis,
        scale: r,
        nodes,
        weights,
        measure,
    }))
}

/// Euclidean distance between two node coordinates (trailing coordinates of
/// lower-dimensional grids are zero, so the 3-term form is always correct).
pub fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// A charge distribution: one real value per grid node.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<DomainGrid>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Arc<DomainGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::Contract(format!(
                "field has {} values for a grid of {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Contract(format!(
                "field values must be finite, found {bad}"
            )));
        }
        Ok(Field { grid, values })
    }

    pub fn constant(grid: Arc<DomainGrid>, value: f64) -> Result<Self> {
        let n = grid.node_count();
        Field::new(grid, vec![value; n])
    }

    pub fn grid(&self) -> &Arc<DomainGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn check_same_grid(&self, other: &Field) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_layout(&other.grid) {
            Ok(())
        } else {
            Err(Error::Contract(
                "fields live on different grids".into(),
            ))
        }
    }

    /// ∫_Q f dx — the quadrature sum Σ wₐ·fₐ.
    pub fn total_charge(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.grid.weights)
            .map(|(v, w)| v * w)
            .sum()
    }

    /// total_charge / mes Q.
    pub fn mean_value(&self) -> f64 {
        self.total_charge() / self.grid.measure()
    }

    /// Weighted inner product Σ wₐ·fₐ·gₐ.
    pub fn inner_product(&self, other: &Field) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(&self.grid.weights)
            .map(|((f, g), w)| w * f * g)
            .sum())
    }

    /// ‖f‖ in the weighted inner product.
    pub fn norm(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.grid.weights)
            .map(|(v, w)| w * v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// f + c·g on the same grid.
    pub fn add_scaled(&self, c: f64, other: &Field) -> Result<Field> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + c * b)
            .collect();
        Field::new(self.grid.clone(), values)
    }

    /// −f.
    pub fn negated(&self) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| -v).collect(),
        }
    }
}

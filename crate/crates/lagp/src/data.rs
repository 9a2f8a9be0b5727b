//! Flat storage for point sets and simulator input/output data.

use crate::error::{Error, Result};

/// A list of points in `R^dim`, stored row-major in one flat buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Points {
    dim: usize,
    coords: Vec<f64>,
}

impl Points {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "points must have at least one coordinate");
        Points {
            dim,
            coords: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, n: usize) -> Self {
        assert!(dim > 0);
        Points {
            dim,
            coords: Vec::with_capacity(dim * n),
        }
    }

    /// Builds from a flat row-major buffer; `coords.len()` must be a multiple of `dim`.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim.max(1),
                got: coords.len(),
            });
        }
        Ok(Points { dim, coords })
    }

    pub fn from_rows(dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut pts = Points::with_capacity(dim, rows.len());
        for row in rows {
            pts.push(row)?;
        }
        Ok(pts)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn push(&mut self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: point.len(),
            });
        }
        self.coords.extend_from_slice(point);
        Ok(())
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Removes the point at `i`, preserving the order of the rest.
    pub fn remove(&mut self, i: usize) -> Vec<f64> {
        let removed: Vec<f64> = self.point(i).to_vec();
        self.coords.drain(i * self.dim..(i + 1) * self.dim);
        removed
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }
}

/// Ordered design points with their simulator outputs; grows one point at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: Points,
    outputs: Vec<f64>,
}

impl Dataset {
    pub fn new(dim: usize) -> Self {
        Dataset {
            inputs: Points::new(dim),
            outputs: Vec::new(),
        }
    }

    pub fn from_parts(inputs: Points, outputs: Vec<f64>) -> Result<Self> {
        if inputs.len() != outputs.len() {
            return Err(Error::LengthMismatch {
                left: inputs.len(),
                right: outputs.len(),
            });
        }
        if outputs.iter().any(|v| !v.is_finite())
            || inputs.as_flat().iter().any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("dataset"));
        }
        Ok(Dataset { inputs, outputs })
    }

    pub fn dim(&self) -> usize {
        self.inputs.dim()
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn push(&mut self, point: &[f64], output: f64) -> Result<()> {
        if !output.is_finite() || point.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset row"));
        }
        self.inputs.push(point)?;
        self.outputs.push(output);
        Ok(())
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.inputs.point(i)
    }

    pub fn inputs(&self) -> &Points {
        &self.inputs
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }
}

//! Uniform grids over the beam span and cross section.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform 1D grid on `[a, b]` including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    a: f64,
    b: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Grid(format!("need at least 3 points, got {n}")));
        }
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::Grid(format!("interval [{a}, {b}] is empty or not finite")));
        }
        Ok(Self { a, b, n })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / (self.n - 1) as f64
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Node `i`; the last node is exactly `b`.
    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.b
        } else {
            self.a + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n).map(|i| f(self.node(i))).collect()
    }
}

/// Tensor grid on `[0, L] x [-h/2, h/2]`; `x` varies fastest in flattened layouts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub x: Grid1D,
    pub y: Grid1D,
}

impl Grid2D {
    pub fn beam(length: f64, thickness: f64, nx: usize, ny: usize) -> Result<Self> {
        Ok(Self {
            x: Grid1D::new(0.0, length, nx)?,
            y: Grid1D::new(-0.5 * thickness, 0.5 * thickness, ny)?,
        })
    }

    pub fn nx(&self) -> usize {
        self.x.len()
    }

    pub fn ny(&self) -> usize {
        self.y.len()
    }

    pub fn node_count(&self) -> usize {
        self.nx() * self.ny()
    }

    /// Flattened index of node `(i, j)` within one field.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx() + i
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid1D::new(0.0, 1.0, 2).is_err());
        assert!(Grid1D::new(1.0, 1.0, 5).is_err());
        assert!(Grid1D::new(1.0, 0.0, 5).is_err());
    }

    #[test]
    fn endpoints_are_exact() {
        let g = Grid1D::new(-0.05, 0.05, 46).unwrap();
        assert_eq!(g.node(0), -0.05);
        assert_eq!(g.node(45), 0.05);
        assert!((g.spacing() - 0.1 / 45.0).abs() < 1e-18);
    }

    #[test]
    fn beam_grid_layout() {
        let g = Grid2D::beam(1.0, 0.1, 451, 46).unwrap();
        assert_eq!(g.node_count(), 451 * 46);
        assert_eq!(g.index(3, 2), 2 * 451 + 3);
    }
}

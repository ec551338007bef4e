use crate::error::{Error, Result};

/// Uniform partition of `[0, 1]` into `n_cells` elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_cells: usize,
    h: f64,
}

impl Grid {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::validation("n_cells must be at least 2"));
        }
        Ok(Grid {
            n_cells,
            h: 1.0 / n_cells as f64,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    /// Number of nodes carrying an unknown once Dirichlet nodes are removed.
    pub fn n_interior(&self) -> usize {
        self.n_cells - 1
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n_cells {
            1.0
        } else {
            i as f64 * self.h
        }
    }

    pub fn midpoint(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_nodes()).map(|i| self.node(i))
    }

    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_cells).map(|j| self.midpoint(j))
    }
}

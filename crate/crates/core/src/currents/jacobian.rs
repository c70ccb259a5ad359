use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{Index, LatticeField};
use crate::quadrature::pairwise_sum;

/// Signed Jacobian mass of one lattice cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMass {
    pub cell: Index,
    pub mass: f64,
    /// Physical center of the cell.
    pub center: [f64; 2],
}

/// Signed Jacobian mass of one simplex with its geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexMass {
    /// Position of the owning cell in [`JacobianMeasure::cells`].
    pub cell: usize,
    pub mass: f64,
    pub vertices: [[f64; 2]; 3],
    pub centroid: [f64; 2],
    /// Largest vertex-to-centroid distance.
    pub radius: f64,
    /// Longest edge.
    pub diameter: f64,
}

/// `int_cell det grad A` for every populated cell of a planar lattice field.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianMeasure {
    pub eps: f64,
    pub frame: [[f64; 2]; 2],
    pub offset: [f64; 2],
    pub cells: Vec<CellMass>,
    pub simplices: Vec<SimplexMass>,
    /// Cells with some but not all vertices present.
    pub skipped: usize,
    index: HashMap<Index, usize>,
}

impl JacobianMeasure {
    /// Sum of all cell masses.
    pub fn total(&self) -> f64 {
        pairwise_sum(&self.cells.iter().map(|c| c.mass).collect::<Vec<_>>())
    }

    pub fn total_variation(&self) -> f64 {
        pairwise_sum(&self.cells.iter().map(|c| c.mass.abs()).collect::<Vec<_>>())
    }

    /// Position of `cell` in [`JacobianMeasure::cells`].
    pub fn find(&self, cell: Index) -> Option<usize> {
        self.index.get(&cell).copied()
    }

    /// Simplices of the cell at position `i`.
    pub fn simplices_of(&self, i: usize) -> impl Iterator<Item = &SimplexMass> {
        // Simplices are stored cell by cell.
        let start = self.simplices.partition_point(|s| s.cell < i);
        self.simplices[start..].iter().take_while(move |s| s.cell == i)
    }
}

/// Per-cell masses as sums of `1/2 cross(b - a, c - a)` over each cell's simplices.
pub fn jacobian_measure(lf: &LatticeField) -> Result<JacobianMeasure> {
    if lf.dim() != 2 {
        return Err(Error::Dimension("Jacobian measures are planar".into()));
    }
    let cells = lf.populated_cells();
    let per_cell: Vec<(CellMass, Vec<SimplexMass>)> = cells
        .par_iter()
        .enumerate()
        .map(|(i, &cell)| -> Result<(CellMass, Vec<SimplexMass>)> {
            let mut simplices = Vec::new();
            for id in lf.simplices_of(cell) {
                let mass = lf.simplex_jacobian(id)?;
                let pts = lf.simplex_points(id);
                let vertices = [[pts[0][0], pts[0][1]], [pts[1][0], pts[1][1]], [pts[2][0], pts[2][1]]];
                let centroid = [
                    (vertices[0][0] + vertices[1][0] + vertices[2][0]) / 3.0,
                    (vertices[0][1] + vertices[1][1] + vertices[2][1]) / 3.0,
                ];
                let d = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
                let radius = vertices.iter().map(|v| d(*v, centroid)).fold(0.0, f64::max);
                let diameter = (0..3)
                    .map(|k| d(vertices[k], vertices[(k + 1) % 3]))
                    .fold(0.0, f64::max);
                simplices.push(SimplexMass {
                    cell: i,
                    mass,
                    vertices,
                    centroid,
                    radius,
                    diameter,
                });
            }
            let mass = simplices.iter().map(|s| s.mass).sum();
            let c = lf.position([cell[0], cell[1], 0]);
            let far = lf.position([cell[0] + 1, cell[1] + 1, 0]);
            let center = [0.5 * (c[0] + far[0]), 0.5 * (c[1] + far[1])];
            Ok((CellMass { cell, mass, center }, simplices))
        })
        .collect::<Result<_>>()?;

    let (lo, shape) = lf.bounds();
    let skipped = (0..shape[1] as i64 - 1)
        .into_par_iter()
        .map(|j| {
            (0..shape[0] as i64 - 1)
                .filter(|&i| {
                    let cell = [lo[0] + i, lo[1] + j, 0];
                    let present = [[0, 0], [1, 0], [0, 1], [1, 1]]
                        .iter()
                        .filter(|v| lf.get([cell[0] + v[0], cell[1] + v[1], 0]).is_some())
                        .count();
                    present > 0 && present < 4
                })
                .count()
        })
        .sum();

    let mut out_cells = Vec::with_capacity(per_cell.len());
    let mut simplices = Vec::with_capacity(2 * per_cell.len());
    for (c, s) in per_cell {
        out_cells.push(c);
        simplices.extend(s);
    }
    let index = out_cells.iter().enumerate().map(|(i, c)| (c.cell, i)).collect();
    let z = lf.offset();
    Ok(JacobianMeasure {
        eps: lf.eps(),
        frame: lf.frame(),
        offset: [z[0], z[1]],
        cells: out_cells,
        simplices,
        skipped,
        index,
    })
}

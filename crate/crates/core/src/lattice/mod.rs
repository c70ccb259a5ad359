//! Lattice fields: cell-average discretization, piecewise-affine
//! interpolation on the Kuhn triangulation, and the nearest-neighbour XY energy.

mod diagnostics;
mod discretize;
mod kuhn;
mod xy;

pub use diagnostics::{interpolant_distances, InterpolantDistances};
pub use discretize::{discretize, discretize_rotated, discretize_with, sample, sample_rotated, DiscretizeOptions};
pub use kuhn::{KuhnMesh, Split};
pub use xy::{xy_energy, XyReport};

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Lattice index; unused trailing components are zero.
pub type Index = [i64; 3];

/// A simplex of the triangulated lattice: its cube and its position in the
/// cube's simplex list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SimplexId {
    pub cell: Index,
    pub index: usize,
}

/// Gradient of an interpolant: two rows, `dim` meaningful columns.
pub type Gradient = [[f64; 3]; 2];

/// Values on the points `eps * sum_a (k_a + z_a) e_a` of a finite box of
/// lattice indices, with a presence mask.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    dim: usize,
    eps: f64,
    /// Lattice basis in the plane; the identity in dimension 3.
    frame: [[f64; 2]; 2],
    offset: [f64; 3],
    lo: Index,
    shape: [usize; 3],
    values: Vec<[f64; 2]>,
    present: Vec<bool>,
    unit: bool,
    mesh: KuhnMesh,
}

impl LatticeField {
    /// Builds a field on the box `lo .. lo + shape` from a value function.
    #[allow(clippy::too_many_arguments)]
    pub fn from_fn(
        dim: usize,
        eps: f64,
        frame: [[f64; 2]; 2],
        offset: [f64; 3],
        lo: Index,
        shape: [usize; 3],
        unit: bool,
        mut value: impl FnMut(Index) -> Option<[f64; 2]>,
    ) -> Result<Self> {
        let mut lf = Self::empty(dim, eps, frame, offset, lo, shape, unit)?;
        for lin in 0..lf.values.len() {
            if let Some(v) = value(lf.unravel(lin)) {
                lf.values[lin] = v;
                lf.present[lin] = true;
            }
        }
        lf.check_unit()?;
        Ok(lf)
    }

    /// Field on the standard lattice from explicit `(index, value)` pairs.
    pub fn from_entries(dim: usize, eps: f64, entries: &[(Index, [f64; 2])]) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Unpopulated("no lattice entries".into()));
        }
        let mut lo = [0i64; 3];
        let mut hi = [0i64; 3];
        for a in 0..dim {
            lo[a] = entries.iter().map(|e| e.0[a]).min().unwrap();
            hi[a] = entries.iter().map(|e| e.0[a]).max().unwrap();
        }
        let mut shape = [1usize; 3];
        for a in 0..dim {
            shape[a] = (hi[a] - lo[a] + 1) as usize;
        }
        let unit = entries
            .iter()
            .all(|e| ((e.1[0] * e.1[0] + e.1[1] * e.1[1]) - 1.0).abs() < 1e-12);
        let mut lf = Self::empty(dim, eps, IDENTITY, [0.0; 3], lo, shape, unit)?;
        for (k, v) in entries {
            let lin = lf.ravel(*k).ok_or_else(|| Error::Dimension(format!("index {k:?}")))?;
            lf.values[lin] = *v;
            lf.present[lin] = true;
        }
        Ok(lf)
    }

    pub(crate) fn empty(
        dim: usize,
        eps: f64,
        frame: [[f64; 2]; 2],
        offset: [f64; 3],
        lo: Index,
        shape: [usize; 3],
        unit: bool,
    ) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Dimension(format!("lattice dimension {dim}")));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!("lattice spacing {eps}")));
        }
        let det = frame[0][0] * frame[1][1] - frame[0][1] * frame[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::InvalidParameter("degenerate lattice frame".into()));
        }
        if dim == 3 && frame != IDENTITY {
            return Err(Error::Dimension("rotated lattices are planar only".into()));
        }
        let mut shape = shape;
        for s in shape.iter_mut().skip(dim) {
            *s = 1;
        }
        let n = shape.iter().product();
        Ok(LatticeField {
            dim,
            eps,
            frame,
            offset,
            lo,
            shape,
            values: vec![[0.0; 2]; n],
            present: vec![false; n],
            unit,
            mesh: KuhnMesh::new(dim, Split::Kuhn),
        })
    }

    fn check_unit(&self) -> Result<()> {
        if self.unit {
            let bad = self
                .values
                .iter()
                .zip(&self.present)
                .any(|(v, &p)| p && ((v[0] * v[0] + v[1] * v[1]).sqrt() - 1.0).abs() > 1e-12);
            if bad {
                return Err(Error::NotUnitValued);
            }
        }
        Ok(())
    }

    /// Uses the given cube split for interpolation and Jacobians.
    pub fn with_split(mut self, split: Split) -> Result<Self> {
        if split == Split::AntiDiagonal && self.dim != 2 {
            return Err(Error::Dimension("anti-diagonal split is planar".into()));
        }
        self.mesh = KuhnMesh::new(self.dim, split);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn frame(&self) -> [[f64; 2]; 2] {
        self.frame
    }

    pub fn offset(&self) -> [f64; 3] {
        self.offset
    }

    pub fn is_unit(&self) -> bool {
        self.unit
    }

    pub fn split(&self) -> Split {
        self.mesh.split
    }

    pub fn mesh(&self) -> &KuhnMesh {
        &self.mesh
    }

    /// Index box `lo .. lo + shape`.
    pub fn bounds(&self) -> (Index, [usize; 3]) {
        (self.lo, self.shape)
    }

    pub fn len(&self) -> usize {
        self.present.iter().filter(|p| **p).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Value at `k`, if populated.
    pub fn get(&self, k: Index) -> Option<[f64; 2]> {
        let lin = self.ravel(k)?;
        self.present[lin].then(|| self.values[lin])
    }

    /// Populated indices with their values, in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (Index, [f64; 2])> + '_ {
        (0..self.values.len())
            .filter(|&l| self.present[l])
            .map(|l| (self.unravel(l), self.values[l]))
    }

    /// Physical position of the node `k` (planar part; third coordinate separate).
    pub fn position(&self, k: Index) -> [f64; 3] {
        self.local_to_physical([
            k[0] as f64 + self.offset[0],
            k[1] as f64 + self.offset[1],
            k[2] as f64 + self.offset[2],
        ])
    }

    /// `eps * F t` for lattice coordinates `t` (offset included by the caller).
    pub(crate) fn local_to_physical(&self, t: [f64; 3]) -> [f64; 3] {
        let f = self.frame;
        [
            self.eps * (t[0] * f[0][0] + t[1] * f[1][0]),
            self.eps * (t[0] * f[0][1] + t[1] * f[1][1]),
            if self.dim == 3 { self.eps * t[2] } else { 0.0 },
        ]
    }

    /// Lattice coordinates `t` with `position(t) = x`, offset removed.
    pub(crate) fn physical_to_local(&self, x: &[f64]) -> [f64; 3] {
        let f = self.frame;
        let det = f[0][0] * f[1][1] - f[1][0] * f[0][1];
        let (px, py) = (x[0] / self.eps, x[1] / self.eps);
        // Solve t0 * f0 + t1 * f1 = p.
        let t0 = (px * f[1][1] - py * f[1][0]) / det;
        let t1 = (py * f[0][0] - px * f[0][1]) / det;
        let t2 = if self.dim == 3 { x[2] / self.eps } else { 0.0 };
        [t0 - self.offset[0], t1 - self.offset[1], t2 - self.offset[2]]
    }

    pub(crate) fn ravel(&self, k: Index) -> Option<usize> {
        let mut lin = 0usize;
        for a in (0..3).rev() {
            let r = k[a] - self.lo[a];
            if r < 0 || r as usize >= self.shape[a] {
                return None;
            }
            lin = lin * self.shape[a] + r as usize;
        }
        Some(lin)
    }

    pub(crate) fn unravel(&self, lin: usize) -> Index {
        let s = self.shape;
        [
            self.lo[0] + (lin % s[0]) as i64,
            self.lo[1] + ((lin / s[0]) % s[1]) as i64,
            self.lo[2] + (lin / (s[0] * s[1])) as i64,
        ]
    }

    pub(crate) fn set(&mut self, lin: usize, v: Option<[f64; 2]>) {
        if let Some(v) = v {
            self.values[lin] = v;
            self.present[lin] = true;
        }
    }

    /// Values at the vertices of the cube with lower corner `cell`, or `None`
    /// if any vertex is missing.
    fn cube_values(&self, cell: Index) -> Option<Vec<[f64; 2]>> {
        let n = 1usize << self.dim;
        (0..n)
            .map(|c| {
                let mut k = cell;
                for (a, ka) in k.iter_mut().enumerate().take(self.dim) {
                    *ka += ((c >> a) & 1) as i64;
                }
                self.get(k)
            })
            .collect()
    }

    /// Whether all vertices of the cube at `cell` are populated.
    pub fn cell_populated(&self, cell: Index) -> bool {
        self.cube_values(cell).is_some()
    }

    /// Lower corners of all fully populated cubes.
    pub fn populated_cells(&self) -> Vec<Index> {
        let mut out = Vec::new();
        let mut hi = [0i64; 3];
        for a in 0..3 {
            hi[a] = self.lo[a] + self.shape[a] as i64 - if a < self.dim { 1 } else { 0 };
        }
        for k2 in self.lo[2]..hi[2] {
            for k1 in self.lo[1]..hi[1] {
                for k0 in self.lo[0]..hi[0] {
                    let c = [k0, k1, k2];
                    if self.cell_populated(c) {
                        out.push(c);
                    }
                }
            }
        }
        out
    }

    fn vertex_value(&self, cell: Index, v: [u8; 3]) -> Option<[f64; 2]> {
        self.get([cell[0] + v[0] as i64, cell[1] + v[1] as i64, cell[2] + v[2] as i64])
    }

    /// Piecewise-affine interpolant `A(x)` on the simplex containing `x`.
    pub fn interpolate(&self, x: &[f64]) -> Result<[f64; 2]> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!(
                "point of length {} on a {}-d lattice",
                x.len(),
                self.dim
            )));
        }
        let t = self.physical_to_local(x);
        let mut cell = [0i64; 3];
        let mut frac = [0.0; 3];
        for a in 0..self.dim {
            let c = t[a].floor();
            cell[a] = c as i64;
            frac[a] = t[a] - c;
        }
        if !self.cell_populated(cell) {
            // Points on a face shared with an unpopulated cell belong to the lower cell too.
            let zero: Vec<usize> = (0..self.dim).filter(|&a| frac[a] == 0.0).collect();
            let found = (1..1usize << zero.len()).find_map(|mask| {
                let mut c = cell;
                let mut f = frac;
                for (bit, &a) in zero.iter().enumerate() {
                    if (mask >> bit) & 1 == 1 {
                        c[a] -= 1;
                        f[a] = 1.0;
                    }
                }
                self.cell_populated(c).then_some((c, f))
            });
            match found {
                Some((c, f)) => {
                    cell = c;
                    frac = f;
                }
                None => return Err(Error::Unpopulated(format!("cell {cell:?} around {x:?}"))),
            }
        }
        let (id, w) = self.mesh.locate(&frac[..self.dim]);
        let mut out = [0.0; 2];
        for (v, wj) in self.mesh.simplices[id].iter().zip(&w) {
            let u = self.vertex_value(cell, *v).expect("populated cell");
            out[0] += wj * u[0];
            out[1] += wj * u[1];
        }
        Ok(out)
    }

    /// Simplices of the cube at `cell`.
    pub fn simplices_of(&self, cell: Index) -> impl Iterator<Item = SimplexId> {
        (0..self.mesh.simplices.len()).map(move |index| SimplexId { cell, index })
    }

    /// Lattice indices of the vertices of a simplex.
    pub fn simplex_vertices(&self, id: SimplexId) -> Vec<Index> {
        self.mesh.simplices[id.index]
            .iter()
            .map(|v| {
                [
                    id.cell[0] + v[0] as i64,
                    id.cell[1] + v[1] as i64,
                    id.cell[2] + v[2] as i64,
                ]
            })
            .collect()
    }

    /// Physical vertex positions of a simplex.
    pub fn simplex_points(&self, id: SimplexId) -> Vec<[f64; 3]> {
        self.simplex_vertices(id)
            .into_iter()
            .map(|k| self.position(k))
            .collect()
    }

    /// Lattice coordinates and values of the vertices of a simplex.
    fn simplex_data(&self, id: SimplexId) -> Result<SimplexData> {
        if id.index >= self.mesh.simplices.len() {
            return Err(Error::InvalidParameter(format!("simplex index {}", id.index)));
        }
        let verts = self.simplex_vertices(id);
        let vals = verts
            .iter()
            .map(|k| self.get(*k))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Unpopulated(format!("simplex {id:?}")))?;
        let local = verts.iter().map(|k| [k[0] as f64, k[1] as f64, k[2] as f64]).collect();
        Ok((local, vals))
    }

    /// Constant gradient of the interpolant on a simplex (physical coordinates).
    pub fn interpolation_gradient(&self, id: SimplexId) -> Result<Gradient> {
        let (local, vals) = self.simplex_data(id)?;
        let d = self.dim;
        // Edge matrix E (columns v_j - v_0) and value differences D.
        let mut e = [[0.0; 3]; 3];
        let mut diff = [[0.0; 3]; 2];
        for j in 1..=d {
            for a in 0..d {
                e[a][j - 1] = local[j][a] - local[0][a];
            }
            for c in 0..2 {
                diff[c][j - 1] = vals[j][c] - vals[0][c];
            }
        }
        // Physical edges: eps * F * E.
        let mut p = [[0.0; 3]; 3];
        for j in 0..d {
            let col = self.local_to_physical([e[0][j], e[1][j], e[2][j]]);
            for a in 0..d {
                p[a][j] = col[a];
            }
        }
        let inv = invert(&p, d).ok_or_else(|| Error::InvalidParameter("degenerate simplex".into()))?;
        let mut g = [[0.0; 3]; 2];
        for c in 0..2 {
            for a in 0..d {
                g[c][a] = (0..d).map(|j| diff[c][j] * inv[j][a]).sum();
            }
        }
        Ok(g)
    }

    /// Signed integral of `det grad A` over a planar simplex.
    pub fn simplex_jacobian(&self, id: SimplexId) -> Result<f64> {
        if self.dim != 2 {
            return Err(Error::Dimension("Jacobian masses are planar".into()));
        }
        let (local, vals) = self.simplex_data(id)?;
        let cross = |a: [f64; 2], b: [f64; 2]| a[0] * b[1] - a[1] * b[0];
        let du = cross(
            [vals[1][0] - vals[0][0], vals[1][1] - vals[0][1]],
            [vals[2][0] - vals[0][0], vals[2][1] - vals[0][1]],
        );
        let p: Vec<[f64; 3]> = local.iter().map(|t| self.local_to_physical(*t)).collect();
        let orient = cross(
            [p[1][0] - p[0][0], p[1][1] - p[0][1]],
            [p[2][0] - p[0][0], p[2][1] - p[0][1]],
        );
        Ok(0.5 * du * orient.signum())
    }

    /// Writes `i,j,vx,vy` (plus `k` in dimension 3) for populated nodes.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        if self.dim == 2 {
            writeln!(w, "i,j,vx,vy").map_err(io)?;
        } else {
            writeln!(w, "i,j,k,vx,vy").map_err(io)?;
        }
        for (k, v) in self.iter() {
            if self.dim == 2 {
                writeln!(w, "{},{},{},{}", k[0], k[1], v[0], v[1]).map_err(io)?;
            } else {
                writeln!(w, "{},{},{},{},{}", k[0], k[1], k[2], v[0], v[1]).map_err(io)?;
            }
        }
        w.flush().map_err(io)
    }
}

type SimplexData = (Vec<[f64; 3]>, Vec<[f64; 2]>);

/// Standard planar frame `(e1, e2)`.
pub const IDENTITY: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];

/// Frame `(xi, xi_perp)` with `xi_perp = (xi2, -xi1)`, the clockwise rotation of `xi`.
pub fn rotated_frame(xi: [f64; 2]) -> Result<[[f64; 2]; 2]> {
    if xi == [0.0, 0.0] || !xi[0].is_finite() || !xi[1].is_finite() {
        return Err(Error::InvalidParameter("lattice direction must be nonzero".into()));
    }
    Ok([xi, [xi[1], -xi[0]]])
}

fn invert(m: &[[f64; 3]; 3], d: usize) -> Option<[[f64; 3]; 3]> {
    let mut out = [[0.0; 3]; 3];
    if d == 2 {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det == 0.0 {
            return None;
        }
        out[0][0] = m[1][1] / det;
        out[0][1] = -m[0][1] / det;
        out[1][0] = -m[1][0] / det;
        out[1][1] = m[0][0] / det;
        return Some(out);
    }
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det == 0.0 {
        return None;
    }
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            out[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
        }
    }
    Some(out)
}

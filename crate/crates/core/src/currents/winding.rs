use std::f64::consts::PI;

use rayon::prelude::*;

use super::AtomicCurrent;
use crate::error::{Error, Result};
use crate::fields::Atom;
use crate::lattice::{Index, LatticeField};

/// Angle of `b` relative to `a`, in `(-pi, pi]`.
fn angle_step(a: [f64; 2], b: [f64; 2], cell: Index) -> Result<f64> {
    let t = (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]);
    if t.abs() >= PI {
        return Err(Error::AntipodalBond { cell });
    }
    Ok(t)
}

/// Nonzero plaquette degrees of a planar unit-valued lattice field,
/// counted counter-clockwise in the physical plane.
pub fn plaquette_degrees(lf: &LatticeField) -> Result<Vec<(Index, i32)>> {
    if lf.dim() != 2 {
        return Err(Error::Dimension("plaquette degrees are planar".into()));
    }
    if !lf.is_unit() {
        return Err(Error::NotUnitValued);
    }
    let f = lf.frame();
    let orient = (f[0][0] * f[1][1] - f[0][1] * f[1][0]).signum();
    let cells = lf.populated_cells();
    let found: Vec<Option<(Index, i32)>> = cells
        .par_iter()
        .map(|&cell| -> Result<Option<(Index, i32)>> {
            let loop_ = [[0, 0], [1, 0], [1, 1], [0, 1]];
            let v: Vec<[f64; 2]> = loop_
                .iter()
                .map(|o| lf.get([cell[0] + o[0], cell[1] + o[1], 0]).expect("populated cell"))
                .collect();
            let mut sum = 0.0;
            for k in 0..4 {
                sum += angle_step(v[k], v[(k + 1) % 4], cell)?;
            }
            let deg = (orient * sum / (2.0 * PI)).round() as i32;
            Ok((deg != 0).then_some((cell, deg)))
        })
        .collect::<Result<_>>()?;
    Ok(found.into_iter().flatten().collect())
}

/// Plaquette degrees as atoms at the plaquette centers.
pub fn winding_oracle(lf: &LatticeField) -> Result<AtomicCurrent> {
    let atoms = plaquette_degrees(lf)?
        .into_iter()
        .map(|(c, d)| {
            let p = lf.position([c[0], c[1], 0]);
            let q = lf.position([c[0] + 1, c[1] + 1, 0]);
            Atom::new(0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), d)
        })
        .collect();
    AtomicCurrent::new(atoms)
}

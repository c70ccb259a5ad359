use rayon::prelude::*;

use super::{rotated_frame, Index, LatticeField, IDENTITY};
use crate::error::{Error, Result};
use crate::fields::{Domain, Field};

/// Midpoint quadrature used for cell averages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizeOptions {
    /// Points per axis in an ordinary cell.
    pub points: usize,
    /// Points per axis in cells near an atom.
    pub refined_points: usize,
    /// Cells whose center lies within this many cell diameters of an atom are refined.
    pub refine_radius: f64,
}

impl Default for DiscretizeOptions {
    fn default() -> Self {
        DiscretizeOptions {
            points: 4,
            refined_points: 16,
            refine_radius: 1.0,
        }
    }
}

impl DiscretizeOptions {
    /// Uniform quadrature without refinement.
    pub fn uniform(points: usize) -> Self {
        DiscretizeOptions {
            points,
            refined_points: points,
            refine_radius: 0.0,
        }
    }
}

/// Cell averages `eps^-d int_{Q_i cap Omega} u` over `Q_i = eps i + eps [0,1]^d`.
pub fn discretize(f: &Field, dom: &Domain, eps: f64) -> Result<LatticeField> {
    discretize_with(f, dom, eps, &DiscretizeOptions::default())
}

pub fn discretize_with(f: &Field, dom: &Domain, eps: f64, opts: &DiscretizeOptions) -> Result<LatticeField> {
    check_eps(dom, eps)?;
    averages(f, dom, eps, IDENTITY, [0.0; 3], opts)
}

/// Averages over the squares `eps (k + z) . (xi, xi_perp) + eps ([0,1] xi + [0,1] xi_perp)`,
/// normalized by `|xi|^2 eps^2`.
pub fn discretize_rotated(f: &Field, dom: &Domain, eps: f64, xi: [f64; 2], z: [f64; 2]) -> Result<LatticeField> {
    if dom.dim() != 2 {
        return Err(Error::Dimension("rotated lattices are planar only".into()));
    }
    check_eps(dom, eps)?;
    let frame = rotated_frame(xi)?;
    averages(f, dom, eps, frame, [z[0], z[1], 0.0], &DiscretizeOptions::default())
}

/// Point values `u(eps (k + z))` at lattice points inside the domain.
pub fn sample(f: &Field, dom: &Domain, eps: f64, z: [f64; 3]) -> Result<LatticeField> {
    check_eps(dom, eps)?;
    point_values(f, dom, eps, IDENTITY, z)
}

/// Point values at `eps (k + z) . (xi, xi_perp)`.
pub fn sample_rotated(f: &Field, dom: &Domain, eps: f64, xi: [f64; 2], z: [f64; 2]) -> Result<LatticeField> {
    if dom.dim() != 2 {
        return Err(Error::Dimension("rotated lattices are planar only".into()));
    }
    check_eps(dom, eps)?;
    point_values(f, dom, eps, rotated_frame(xi)?, [z[0], z[1], 0.0])
}

fn point_values(f: &Field, dom: &Domain, eps: f64, frame: [[f64; 2]; 2], z: [f64; 3]) -> Result<LatticeField> {
    let d = dom.dim();
    let mut lf = empty_cover(dom, eps, frame, z, f.is_unit(), 0)?;
    let vals: Vec<Option<[f64; 2]>> = (0..lf.values.len())
        .into_par_iter()
        .map(|lin| {
            let p = lf.position(lf.unravel(lin));
            let p = &p[..d];
            if dom.contains(p) {
                f.evaluate(p).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;
    for (lin, v) in vals.into_iter().enumerate() {
        lf.set(lin, v);
    }
    Ok(lf)
}

fn check_eps(dom: &Domain, eps: f64) -> Result<()> {
    if !(eps > 0.0) || eps >= dom.inradius() {
        return Err(Error::InvalidParameter(format!(
            "lattice spacing {eps} must be positive and below the inradius {}",
            dom.inradius()
        )));
    }
    Ok(())
}

/// Index box covering the domain's bounding box; `pad` extra indices per side.
fn empty_cover(
    dom: &Domain,
    eps: f64,
    frame: [[f64; 2]; 2],
    offset: [f64; 3],
    unit: bool,
    pad: i64,
) -> Result<LatticeField> {
    let d = dom.dim();
    let probe = LatticeField::empty(d, eps, frame, offset, [0; 3], [1; 3], unit)?;
    let (lo, hi) = dom.bounding_box();
    let mut tmin = [f64::INFINITY; 3];
    let mut tmax = [f64::NEG_INFINITY; 3];
    for corner in 0..(1 << d) {
        let p: Vec<f64> = (0..d)
            .map(|a| if (corner >> a) & 1 == 0 { lo[a] } else { hi[a] })
            .collect();
        let t = probe.physical_to_local(&p);
        for a in 0..d {
            tmin[a] = tmin[a].min(t[a]);
            tmax[a] = tmax[a].max(t[a]);
        }
    }
    let mut klo = [0i64; 3];
    let mut shape = [1usize; 3];
    for a in 0..d {
        klo[a] = tmin[a].floor() as i64 - pad;
        let khi = tmax[a].ceil() as i64 + pad;
        shape[a] = (khi - klo[a] + 1) as usize;
    }
    let n: f64 = shape.iter().map(|&s| s as f64).product();
    if n > 4e8 {
        return Err(Error::Infeasible(format!("lattice of {n:.3e} nodes")));
    }
    LatticeField::empty(d, eps, frame, offset, klo, shape, unit)
}

fn averages(
    f: &Field,
    dom: &Domain,
    eps: f64,
    frame: [[f64; 2]; 2],
    offset: [f64; 3],
    opts: &DiscretizeOptions,
) -> Result<LatticeField> {
    if opts.points == 0 || opts.refined_points == 0 {
        return Err(Error::InvalidParameter(
            "quadrature needs at least one point per axis".into(),
        ));
    }
    let d = dom.dim();
    let mut lf = empty_cover(dom, eps, frame, offset, false, 0)?;
    let cell_diam = eps * (frame[0][0].hypot(frame[0][1])) * (d as f64).sqrt();
    let atoms = f.atoms();
    let vals: Vec<Option<[f64; 2]>> = (0..lf.values.len())
        .into_par_iter()
        .map(|lin| {
            let k = lf.unravel(lin);
            let center = cell_point(&lf, k, [0.5; 3]);
            let near = atoms
                .iter()
                .any(|a| (center[0] - a.position[0]).hypot(center[1] - a.position[1]) < opts.refine_radius * cell_diam);
            let m = if near { opts.refined_points } else { opts.points };
            cell_average(f, dom, &lf, k, m)
        })
        .collect::<Result<_>>()?;
    for (lin, v) in vals.into_iter().enumerate() {
        lf.set(lin, v);
    }
    Ok(lf)
}

fn cell_point(lf: &LatticeField, k: Index, s: [f64; 3]) -> [f64; 3] {
    let z = lf.offset();
    lf.local_to_physical([
        k[0] as f64 + z[0] + s[0],
        k[1] as f64 + z[1] + s[1],
        k[2] as f64 + z[2] + s[2],
    ])
}

/// Midpoint average with `m` points per axis; points outside the domain count
/// as zero. `None` when no point of the cell is inside.
fn cell_average(f: &Field, dom: &Domain, lf: &LatticeField, k: Index, m: usize) -> Result<Option<[f64; 2]>> {
    let d = lf.dim();
    let total = m.pow(d as u32);
    let mut sum = [0.0; 2];
    let mut hits = 0usize;
    for q in 0..total {
        let mut s = [0.0; 3];
        let mut rem = q;
        for sa in s.iter_mut().take(d) {
            *sa = ((rem % m) as f64 + 0.5) / m as f64;
            rem /= m;
        }
        let p = cell_point(lf, k, s);
        let p = &p[..d];
        if !dom.contains(p) {
            continue;
        }
        hits += 1;
        let v = match f.evaluate(p) {
            Ok(v) => v,
            Err(Error::Singular { .. }) => {
                let mut shifted = p.to_vec();
                shifted[0] += 0.25 * lf.eps() / m as f64;
                f.evaluate(&shifted)?
            }
            Err(e) => return Err(e),
        };
        sum[0] += v[0];
        sum[1] += v[1];
    }
    Ok((hits > 0).then(|| [sum[0] / total as f64, sum[1] / total as f64]))
}

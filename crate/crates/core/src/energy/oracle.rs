//! Direct double-sum evaluation of the nonlocal energy.
//!
//! `x` runs over the midpoint grid of step `h`, `y` over the grid refined by
//! an integer factor `s`. Each `(x, y)` pair carries the kernel integrated over
//! the refined cell of `y`, so the indicator's discontinuity is resolved
//! without interpolating the field.

use rayon::prelude::*;

use super::{EnergySpec, Scaling};
use crate::error::{Error, Result};
use crate::fields::Field;
use crate::quadrature::pairwise_sum;

/// Upper limit on the number of `(x, y)` pairs visited.
pub const MAX_PAIRS: f64 = 2e8;

/// Ordered and unordered pair sums on the unrefined grid, both scaled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseSums {
    pub ordered: f64,
    pub unordered: f64,
    pub pairs: usize,
}

/// Energy by the direct double sum with `y` refined by `refine`.
pub fn energy_pairwise_oracle(spec: &EnergySpec, f: &Field, refine: usize) -> Result<f64> {
    Ok(PairGrid::new(spec, f, refine)?.sums(false)?.ordered)
}

/// Ordered and unordered double sums with `x` and `y` on the same grid.
pub fn pairwise_sums(spec: &EnergySpec, f: &Field) -> Result<PairwiseSums> {
    PairGrid::new(spec, f, 1)?.sums(true)
}

struct PairGrid {
    refine: usize,
    /// Node counts of the coarse grid per axis.
    n: [usize; 3],
    /// Node counts of the refined grid per axis.
    m: [usize; 3],
    x_vals: Vec<Option<[f64; 2]>>,
    y_vals: Vec<Option<[f64; 2]>>,
    /// Nonzero kernel weights by offset `q = j - refine * i` per axis.
    offsets: Vec<([i64; 3], f64)>,
    cell: f64,
    scale: f64,
}

impl PairGrid {
    fn new(spec: &EnergySpec, f: &Field, refine: usize) -> Result<Self> {
        if refine == 0 {
            return Err(Error::InvalidParameter("refinement factor must be positive".into()));
        }
        let dim = spec.dim();
        if dim == 3 && !f.is_planar_product() {
            return Err(Error::Dimension(
                "three-dimensional energies need fields of product form".into(),
            ));
        }
        let h = spec.grid_h;
        let (mut lo, mut hi) = spec.domain.bounding_box();
        if let Some(v) = &spec.local {
            let (l, u) = v.bounding_box();
            for a in 0..dim {
                lo[a] = lo[a].max(l[a]);
                hi[a] = hi[a].min(u[a]);
            }
        }
        let mut n = [1usize; 3];
        let mut m = [1usize; 3];
        for a in 0..dim {
            n[a] = ((hi[a] - lo[a]) / h).ceil().max(1.0) as usize;
            m[a] = n[a] * refine;
        }
        let inside = |p: &[f64]| spec.domain.contains(p) && spec.local.as_ref().is_none_or(|v| v.contains(p));

        let eps = spec.eps;
        let reach = eps * spec.kernel.support_radius();
        let sub = h / refine as f64;
        let radius = (reach / sub).ceil() as i64 + refine as i64;
        let quad = if dim == 2 { 8 } else { 4 };
        let mut offsets = Vec::new();
        let range = |a: usize| if a < dim { -radius..=radius } else { 0..=0 };
        for q0 in range(0) {
            for q1 in range(1) {
                for q2 in range(2) {
                    let q = [q0, q1, q2];
                    let w = cell_kernel_weight(spec, q, dim, refine, quad, sub);
                    if w > 0.0 {
                        offsets.push((q, w));
                    }
                }
            }
        }

        let coarse = n[..dim].iter().product::<usize>();
        let estimate = coarse as f64 * offsets.len() as f64;
        if estimate > MAX_PAIRS {
            return Err(Error::Infeasible(format!(
                "{coarse} nodes x {} kernel offsets = {estimate:.3e} pairs (limit {MAX_PAIRS:.0e})",
                offsets.len()
            )));
        }

        let sample = |counts: [usize; 3], step: f64| -> Result<Vec<Option<[f64; 2]>>> {
            let total = counts[0] * counts[1] * counts[2];
            (0..total)
                .into_par_iter()
                .map(|lin| {
                    let idx = unravel(lin, counts);
                    let p: Vec<f64> = (0..dim).map(|a| lo[a] + (idx[a] as f64 + 0.5) * step).collect();
                    if inside(&p) {
                        f.evaluate(&p).map(Some)
                    } else {
                        Ok(None)
                    }
                })
                .collect()
        };
        let x_vals = sample(n, h)?;
        let y_vals = if refine == 1 { x_vals.clone() } else { sample(m, sub)? };

        let scale = match spec.scaling {
            Scaling::Vortex => 1.0 / (eps.powi(dim as i32 + 2) * eps.ln().abs()),
            Scaling::Bbm => 1.0 / eps.powi(dim as i32 + 2),
        };
        Ok(PairGrid {
            refine,
            n,
            m,
            x_vals,
            y_vals,
            offsets,
            cell: h.powi(dim as i32),
            scale,
        })
    }

    fn sums(&self, unordered: bool) -> Result<PairwiseSums> {
        let s = self.refine as i64;
        let per_x: Vec<(f64, f64, usize)> = (0..self.x_vals.len())
            .into_par_iter()
            .map(|lin| {
                let Some(ux) = self.x_vals[lin] else {
                    return (0.0, 0.0, 0);
                };
                let i = unravel(lin, self.n);
                let mut ord = 0.0;
                let mut half = 0.0;
                let mut count = 0;
                for (q, w) in &self.offsets {
                    let mut j = [0i64; 3];
                    let mut ok = true;
                    for a in 0..3 {
                        j[a] = s * i[a] as i64 + q[a];
                        ok &= j[a] >= 0 && (j[a] as usize) < self.m[a];
                    }
                    if !ok {
                        continue;
                    }
                    let jl = ravel(j, self.m);
                    let Some(uy) = self.y_vals[jl] else { continue };
                    let d0 = ux[0] - uy[0];
                    let d1 = ux[1] - uy[1];
                    let t = w * (d0 * d0 + d1 * d1);
                    ord += t;
                    count += 1;
                    if unordered && jl > lin {
                        half += t;
                    }
                }
                (ord, half, count)
            })
            .collect();
        let ord: Vec<f64> = per_x.iter().map(|p| p.0).collect();
        let half: Vec<f64> = per_x.iter().map(|p| p.1).collect();
        let pairs = per_x.iter().map(|p| p.2).sum();
        let c = self.scale * self.cell;
        Ok(PairwiseSums {
            ordered: c * pairwise_sum(&ord),
            unordered: if unordered { c * pairwise_sum(&half) } else { f64::NAN },
            pairs,
        })
    }
}

/// `int_{cell} rho(|o| / eps) do` over the refined cell at offset `q`,
/// by a `quad^dim` midpoint rule.
fn cell_kernel_weight(spec: &EnergySpec, q: [i64; 3], dim: usize, refine: usize, quad: usize, sub: f64) -> f64 {
    let s = refine as i64;
    let m = quad as i64;
    let denom = (2 * s * m) as f64;
    let h = sub * s as f64;
    let mut total = 0.0;
    let count = quad.pow(dim as u32);
    for k in 0..count {
        let mut r2 = 0.0;
        let mut rem = k;
        for qa in q.iter().take(dim) {
            let a = (rem % quad) as i64;
            rem /= quad;
            // Integer numerator keeps the offset exactly antisymmetric in q.
            let num = (2 * qa + 1 - s) * m + (2 * a + 1 - m);
            let o = num as f64 * h / denom;
            r2 += o * o;
        }
        total += spec.kernel.value(r2.sqrt() / spec.eps);
    }
    total * sub.powi(dim as i32) / count as f64
}

fn unravel(lin: usize, n: [usize; 3]) -> [usize; 3] {
    [lin % n[0], (lin / n[0]) % n[1], lin / (n[0] * n[1])]
}

fn ravel(j: [i64; 3], m: [usize; 3]) -> usize {
    j[0] as usize + m[0] * (j[1] as usize + m[1] * j[2] as usize)
}

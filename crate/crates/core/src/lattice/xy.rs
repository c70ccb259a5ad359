use rayon::prelude::*;

use super::LatticeField;
use crate::fields::Domain;
use crate::quadrature::pairwise_sum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XyReport {
    /// `|log eps|^-1 sum_<i,j> eps^(d-2) |v_i - v_j|^2` over ordered pairs.
    pub value: f64,
    /// The same sum over unordered bonds.
    pub unordered: f64,
    /// Number of ordered pairs.
    pub bonds: usize,
}

/// Nearest-neighbour XY energy over pairs with both nodes in `u` (all nodes if `None`).
///
/// Each bond is counted once per orientation.
pub fn xy_energy(lf: &LatticeField, u: Option<&Domain>) -> XyReport {
    let d = lf.dim();
    let (lo, shape) = lf.bounds();
    let inside = |k: [i64; 3]| -> bool {
        let Some(dom) = u else { return true };
        let p = lf.position(k);
        dom.contains(&p[..d])
    };
    let rows = shape[1] * shape[2];
    let per_row: Vec<(f64, usize)> = (0..rows)
        .into_par_iter()
        .map(|r| {
            let k1 = lo[1] + (r % shape[1]) as i64;
            let k2 = lo[2] + (r / shape[1]) as i64;
            let mut unordered = Vec::new();
            let mut bonds = 0;
            for k0 in lo[0]..lo[0] + shape[0] as i64 {
                let k = [k0, k1, k2];
                let Some(v) = lf.get(k) else { continue };
                if !inside(k) {
                    continue;
                }
                for a in 0..d {
                    for step in [1i64, -1] {
                        let mut n = k;
                        n[a] += step;
                        let Some(w) = lf.get(n) else { continue };
                        if !inside(n) {
                            continue;
                        }
                        bonds += 1;
                        if step == 1 {
                            unordered.push((v[0] - w[0]).powi(2) + (v[1] - w[1]).powi(2));
                        }
                    }
                }
            }
            (pairwise_sum(&unordered), bonds)
        })
        .collect();
    let eps = lf.eps();
    let c = eps.powi(d as i32 - 2) / eps.ln().abs();
    let un: Vec<f64> = per_row.iter().map(|r| r.0).collect();
    let unordered = c * pairwise_sum(&un);
    // Both endpoints must lie in `u`, so every bond is seen in both orientations.
    XyReport {
        value: 2.0 * unordered,
        unordered,
        bonds: per_row.iter().map(|r| r.1).sum(),
    }
}

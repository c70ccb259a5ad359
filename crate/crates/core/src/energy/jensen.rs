use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{Domain, Field};
use crate::lattice::{discretize_with, DiscretizeOptions, Index, LatticeField};

/// Outcome of the cellwise Jensen comparison
/// `eps^2 |I(k + e) - I(k)|^2 <= int_{Q_k} |u(x + eps e) - u(x)|^2 dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JensenReport {
    pub checked: usize,
    /// Largest `lhs - rhs` seen; nonpositive when the inequality holds everywhere.
    pub max_excess: f64,
    /// Pairs with `lhs > rhs + slack`.
    pub violations: usize,
}

/// Checks every pair of axis-neighbouring interior cells, using the same
/// `m^d` midpoint rule for the averages and for the right-hand integral.
pub fn jensen_check(f: &Field, dom: &Domain, eps: f64, m: usize, slack: f64) -> Result<JensenReport> {
    if m == 0 {
        return Err(Error::InvalidParameter(
            "quadrature needs at least one point per axis".into(),
        ));
    }
    let lf = discretize_with(f, dom, eps, &DiscretizeOptions::uniform(m))?;
    let d = lf.dim();
    let entries: Vec<(Index, [f64; 2])> = lf.iter().collect();
    let results: Vec<Vec<f64>> = entries
        .par_iter()
        .map(|&(k, ik)| -> Result<Vec<f64>> {
            let mut out = Vec::new();
            for a in 0..d {
                let mut n = k;
                n[a] += 1;
                let Some(in_) = lf.get(n) else { continue };
                let Some(rhs) = shifted_mean(f, dom, &lf, k, a, m)? else {
                    continue;
                };
                let lhs = eps * eps * ((in_[0] - ik[0]).powi(2) + (in_[1] - ik[1]).powi(2));
                out.push(lhs - eps * eps * rhs);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let all: Vec<f64> = results.into_iter().flatten().collect();
    Ok(JensenReport {
        checked: all.len(),
        max_excess: all.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        violations: all.iter().filter(|&&x| x > slack).count(),
    })
}

/// Mean of `|u(p + eps e_a) - u(p)|^2` over the quadrature points of cell `k`,
/// or `None` if the cell or its neighbour is not fully inside the domain.
fn shifted_mean(f: &Field, dom: &Domain, lf: &LatticeField, k: Index, a: usize, m: usize) -> Result<Option<f64>> {
    let d = lf.dim();
    let total = m.pow(d as u32);
    let z = lf.offset();
    let mut acc = 0.0;
    for q in 0..total {
        let mut frac = [0.0; 3];
        let mut rem = q;
        for fb in frac.iter_mut().take(d) {
            *fb = ((rem % m) as f64 + 0.5) / m as f64;
            rem /= m;
        }
        let mut t = [0.0; 3];
        for b in 0..d {
            t[b] = k[b] as f64 + z[b] + frac[b];
        }
        let mut s = t;
        s[a] = (k[a] + 1) as f64 + z[a] + frac[a];
        let p = lf.local_to_physical(t);
        let ps = lf.local_to_physical(s);
        if !dom.contains(&p[..d]) || !dom.contains(&ps[..d]) {
            return Ok(None);
        }
        let u = f.evaluate(&p[..d])?;
        let us = f.evaluate(&ps[..d])?;
        acc += (us[0] - u[0]).powi(2) + (us[1] - u[1]).powi(2);
    }
    Ok(Some(acc / total as f64))
}

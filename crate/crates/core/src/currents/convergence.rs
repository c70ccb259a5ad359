use std::f64::consts::PI;

use rayon::prelude::*;

use super::{extract_vortices, flat_norm, jacobian_measure, residual_bound, AtomicCurrent};
use crate::error::{Error, Result};
use crate::fields::{Domain, Field};
use crate::lattice::{discretize_with, DiscretizeOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceOptions {
    /// Cluster acceptance threshold, as a fraction of `pi`.
    pub threshold: f64,
    /// Rows with distance above `tolerance * eps * pi` are flagged.
    pub tolerance: f64,
    pub discretize: DiscretizeOptions,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions {
            threshold: 0.5,
            tolerance: 10.0,
            discretize: DiscretizeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowFlag {
    Ok,
    NonQuantized,
    ExceedsTolerance,
}

impl RowFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowFlag::Ok => "ok",
            RowFlag::NonQuantized => "non-quantized",
            RowFlag::ExceedsTolerance => "exceeds-tolerance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub delta: f64,
    /// Flat norm between the extracted and the target atoms.
    pub flat_norm: f64,
    /// Certified cost of the diffuse part.
    pub residual_bound: f64,
    /// `flat_norm + residual_bound`.
    pub flat_distance: f64,
    pub flag: RowFlag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// Ordered by the input sequence, then by margin.
    pub rows: Vec<ConvergenceRow>,
    /// Per margin: whether the distance does not increase as `eps` decreases.
    pub nonincreasing: Vec<(f64, bool)>,
    /// Every row is flagged ok.
    pub converged: bool,
}

/// Upper bounds on `F_U(*J(A_eps(I_eps u_eps)) - pi * target)` for
/// `U = dom` shrunk by each margin.
pub fn convergence_check(
    seq: &[(f64, Field)],
    target: &AtomicCurrent,
    dom: &Domain,
    margins: &[f64],
    opts: &ConvergenceOptions,
) -> Result<ConvergenceReport> {
    let max_margin = margins.iter().copied().fold(0.0, f64::max);
    for a in target.atoms() {
        if dom.boundary_distance(&a.position)? <= max_margin {
            return Err(Error::InvalidParameter(format!(
                "target atom {:?} lies within the largest margin {max_margin}",
                a.position
            )));
        }
    }
    let regions: Vec<(f64, Domain)> = margins
        .iter()
        .map(|&d| dom.shrink(d).map(|u| (d, u)))
        .collect::<Result<_>>()?;
    let per_eps: Vec<Vec<ConvergenceRow>> = seq
        .par_iter()
        .map(|(eps, f)| -> Result<Vec<ConvergenceRow>> {
            let lf = discretize_with(f, dom, *eps, &opts.discretize)?;
            let jm = jacobian_measure(&lf)?;
            let ext = extract_vortices(&jm, opts.threshold)?;
            regions
                .par_iter()
                .map(|(delta, u)| {
                    let (atoms, bound) = residual_bound(&jm, &ext, u)?;
                    let fnorm = flat_norm(&atoms, target, u)?.value;
                    let dist = fnorm + bound;
                    let flag = if ext.non_quantized {
                        RowFlag::NonQuantized
                    } else if dist > opts.tolerance * eps * PI {
                        RowFlag::ExceedsTolerance
                    } else {
                        RowFlag::Ok
                    };
                    Ok(ConvergenceRow {
                        eps: *eps,
                        delta: *delta,
                        flat_norm: fnorm,
                        residual_bound: bound,
                        flat_distance: dist,
                        flag,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let rows: Vec<ConvergenceRow> = per_eps.into_iter().flatten().collect();
    let nonincreasing = margins
        .iter()
        .map(|&d| {
            let mut col: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.delta == d).collect();
            col.sort_by(|a, b| b.eps.total_cmp(&a.eps));
            (d, col.windows(2).all(|w| w[1].flat_distance <= w[0].flat_distance))
        })
        .collect();
    Ok(ConvergenceReport {
        converged: rows.iter().all(|r| r.flag == RowFlag::Ok),
        rows,
        nonincreasing,
    })
}

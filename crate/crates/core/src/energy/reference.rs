use std::f64::consts::FRAC_PI_2;

use super::{energy, EnergySpec, GridOptions, Scaling};
use crate::error::{Error, Result};
use crate::fields::{Domain, Field, Shape2};
use crate::kernels::Kernel;
use crate::quadrature::adaptive_simpson;

/// `int rho(|xi|) |A xi|^2 (L1 - eps|xi1|)_+ (L2 - eps|xi2|)_+ dxi`, the BBM
/// energy of `u(x) = A x` on a rectangle with side lengths `L1, L2`.
pub fn bbm_linear_reference(kernel: &Kernel, a: [[f64; 2]; 2], domain: &Domain, eps: f64) -> Result<f64> {
    let Domain::Planar(Shape2::Rectangle { lo, hi }) = domain else {
        return Err(Error::InvalidDomain("the linear reference needs a rectangle".into()));
    };
    let (l1, l2) = (hi[0] - lo[0], hi[1] - lo[1]);
    let t = kernel.support_radius();
    let tol = 1e-12;
    let radial = |theta: f64| -> f64 {
        let (c, s) = (theta.cos(), theta.sin());
        let ax = [a[0][0] * c + a[0][1] * s, a[1][0] * c + a[1][1] * s];
        let g = ax[0] * ax[0] + ax[1] * ax[1];
        let mut knots = vec![0.0, t];
        knots.extend(kernel.breakpoints());
        if eps * c.abs() * t > l1 {
            knots.push(l1 / (eps * c.abs()));
        }
        if eps * s.abs() * t > l2 {
            knots.push(l2 / (eps * s.abs()));
        }
        knots.sort_by(f64::total_cmp);
        knots.retain(|r| *r <= t);
        let f = |r: f64| {
            kernel.value(r) * r * r * r * g * (l1 - eps * r * c.abs()).max(0.0) * (l2 - eps * r * s.abs()).max(0.0)
        };
        knots
            .windows(2)
            .map(|w| adaptive_simpson(&f, w[0], w[1], tol).unwrap_or(f64::NAN))
            .sum()
    };
    let mut total = 0.0;
    for k in 0..4 {
        let a0 = k as f64 * FRAC_PI_2;
        total += adaptive_simpson(&radial, a0, a0 + FRAC_PI_2, 1e-11)?;
    }
    if !total.is_finite() {
        return Err(Error::Quadrature("linear reference did not converge".into()));
    }
    Ok(total)
}

/// Choice of the core radius `r_eps` in the upper-bound construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutoffRule {
    /// `r_eps = eps * log|log eps|`.
    EpsLogLog,
    /// `r_eps = eps^alpha`.
    Power(f64),
}

impl CutoffRule {
    pub fn radius(&self, eps: f64) -> f64 {
        match *self {
            CutoffRule::EpsLogLog => eps * eps.ln().abs().ln(),
            CutoffRule::Power(alpha) => eps.powf(alpha),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperBoundRow {
    pub eps: f64,
    pub energy: f64,
    pub r_eps: f64,
    /// `F_eps / (C_rho * mass)`.
    pub ratio: f64,
    /// `|log r_eps| / |log eps|`, NaN when `r_eps <= 0`.
    pub log_ratio: f64,
}

/// Energy of the degree-one vortex through the center of a ball (or of a
/// ball cross-section times an interval) along a decreasing `eps` sweep.
pub fn upper_bound_report(
    kernel: &Kernel,
    domain: &Domain,
    eps_list: &[f64],
    cutoff: CutoffRule,
    opts: &GridOptions,
) -> Result<Vec<UpperBoundRow>> {
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("eps list must be strictly decreasing".into()));
    }
    let (center, mass) = match domain {
        Domain::Planar(Shape2::Ball { center, .. }) => (*center, 1.0),
        Domain::Product2D {
            base: Shape2::Ball { center, .. },
            interval,
        } => (*center, interval[1] - interval[0]),
        _ => {
            return Err(Error::InvalidDomain(
                "upper-bound sweep needs a ball or a ball times an interval".into(),
            ))
        }
    };
    let reference = kernel.gamma_limit_constant(domain.dim())? * mass;
    let field = Field::single_vortex(center, 1);
    eps_list
        .iter()
        .map(|&eps| {
            let spec = EnergySpec::with_options(kernel.clone(), domain.clone(), eps, Scaling::Vortex, opts)?;
            let e = energy(&spec, &field)?;
            let r = cutoff.radius(eps);
            Ok(UpperBoundRow {
                eps,
                energy: e,
                r_eps: r,
                ratio: e / reference,
                log_ratio: if r > 0.0 {
                    r.ln().abs() / eps.ln().abs()
                } else {
                    f64::NAN
                },
            })
        })
        .collect()
}

//! Nonlocal energies in vortex and BBM scaling.
//!
//! The double integral is evaluated in the form
//! `scale * sum_xi w_xi rho(|xi|) * int |u(x + eps xi) - u(x)|^2 dx`
//! with a polar midpoint grid in `xi` and a midpoint grid of step `h` in `x`.
//! Cells cut by the admissible set `{x in V, x + eps xi in V}` are weighted by
//! their covered length and evaluated at the midpoint of the covered part.

mod jensen;
mod oracle;
mod reference;

pub use jensen::{jensen_check, JensenReport};
pub use oracle::{energy_pairwise_oracle, pairwise_sums, PairwiseSums};
pub use reference::{bbm_linear_reference, upper_bound_report, CutoffRule, UpperBoundRow};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{Domain, Field, Shape2};
use crate::kernels::Kernel;
use crate::quadrature::{adaptive_simpson, pairwise_sum};

/// Normalization of the double integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scaling {
    /// Divide by `eps^(d+2) |log eps|`.
    Vortex,
    /// Divide by `eps^(d+2)`.
    Bbm,
}

/// Grid resolution relative to `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    /// `h = eps / grid_ratio`; must be at least 4.
    pub grid_ratio: f64,
    pub radial: usize,
    pub angular: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            grid_ratio: 8.0,
            radial: 64,
            angular: 64,
        }
    }
}

/// Upper limit on the number of field evaluations of one energy call.
pub const MAX_EVALUATIONS: f64 = 2e11;

#[derive(Debug, Clone, PartialEq)]
pub struct EnergySpec {
    pub kernel: Kernel,
    pub domain: Domain,
    pub eps: f64,
    pub scaling: Scaling,
    pub grid_h: f64,
    pub local: Option<Domain>,
    pub radial: usize,
    pub angular: usize,
}

/// Energy value with the grid that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub value: f64,
    pub grid_h: f64,
    pub nodes: usize,
}

impl EnergySpec {
    /// Spec with the default grid `h = eps / 8` and a 64 x 64 polar grid.
    pub fn new(kernel: Kernel, domain: Domain, eps: f64, scaling: Scaling) -> Result<Self> {
        Self::with_options(kernel, domain, eps, scaling, &GridOptions::default())
    }

    pub fn with_options(
        kernel: Kernel,
        domain: Domain,
        eps: f64,
        scaling: Scaling,
        opts: &GridOptions,
    ) -> Result<Self> {
        let spec = EnergySpec {
            kernel,
            domain,
            eps,
            scaling,
            grid_h: eps / opts.grid_ratio,
            local: None,
            radial: opts.radial,
            angular: opts.angular,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_grid_h(mut self, h: f64) -> Result<Self> {
        self.grid_h = h;
        self.validate()?;
        Ok(self)
    }

    /// Restricts both integration variables to `v`.
    pub fn with_local(mut self, v: Domain) -> Result<Self> {
        self.local = Some(v);
        self.validate()?;
        Ok(self)
    }

    pub fn with_polar(mut self, radial: usize, angular: usize) -> Result<Self> {
        self.radial = radial;
        self.angular = angular;
        self.validate()?;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Factor multiplying `int rho(|xi|) int |u(x + eps xi) - u(x)|^2 dx dxi`.
    pub fn scale_factor(&self) -> f64 {
        match self.scaling {
            Scaling::Vortex => 1.0 / (self.eps * self.eps * self.eps.ln().abs()),
            Scaling::Bbm => 1.0 / (self.eps * self.eps),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eps = {} must lie in (0, 1)",
                self.eps
            )));
        }
        if !(self.grid_h > 0.0) || self.grid_h > 0.25 * self.eps * (1.0 + 1e-12) {
            return Err(Error::GridTooCoarse {
                h: self.grid_h,
                eps: self.eps,
            });
        }
        if self.radial == 0 || self.angular < 2 || !self.angular.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "polar grid {}x{} needs radial >= 1 and an even angular count",
                self.radial, self.angular
            )));
        }
        if let Some(v) = &self.local {
            if v.dim() != self.dim() {
                return Err(Error::Dimension(
                    "localization set and domain differ in dimension".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Quadrature value of the nonlocal energy of `f`.
pub fn energy(spec: &EnergySpec, f: &Field) -> Result<f64> {
    Ok(energy_report(spec, f)?.value)
}

/// [`energy`] together with the grid step and node count.
pub fn energy_report(spec: &EnergySpec, f: &Field) -> Result<EnergyReport> {
    spec.validate()?;
    let region = Region::new(spec)?;
    if spec.dim() == 3 && !f.is_planar_product() {
        return Err(Error::Dimension(
            "three-dimensional energies need fields of product form".into(),
        ));
    }
    let xi = xi_nodes(spec, region.z_len)?;
    let h = spec.grid_h;
    let ny = ((region.hi[1] - region.lo[1]) / h).ceil() as usize;
    let nx = ((region.hi[0] - region.lo[0]) / h).ceil() as usize;

    let planar_nodes: usize = (0..ny)
        .map(|j| {
            let y = region.lo[1] + (j as f64 + 0.5) * h;
            region
                .spans(y)
                .iter()
                .map(|s| full_cells(region.lo[0], h, s[0], s[1]).map_or(0, |(a, b)| (b - a) as usize))
                .sum::<usize>()
        })
        .sum();
    let nodes = match region.z_len {
        Some(l) => planar_nodes * (l / h).ceil() as usize,
        None => planar_nodes,
    };
    let evaluations = planar_nodes as f64 * xi.len() as f64;
    if evaluations > MAX_EVALUATIONS {
        return Err(Error::Infeasible(format!(
            "{planar_nodes} grid nodes x {} xi-nodes = {evaluations:.3e} field evaluations (limit {MAX_EVALUATIONS:.0e})",
            xi.len()
        )));
    }

    let rows: Vec<f64> = (0..ny)
        .into_par_iter()
        .map(|j| row_contribution(&region, &xi, f, h, nx, j))
        .collect::<Result<_>>()?;
    // Only half of the angular grid is visited; the other half is its mirror.
    let value = 2.0 * spec.scale_factor() * h * h * pairwise_sum(&rows);
    Ok(EnergyReport {
        value,
        grid_h: h,
        nodes,
    })
}

#[derive(Debug, Clone, Copy)]
struct XiNode {
    dx: f64,
    dy: f64,
    weight: f64,
}

/// Polar midpoint nodes over the upper half of the angular range.
fn xi_nodes(spec: &EnergySpec, z_len: Option<f64>) -> Result<Vec<XiNode>> {
    let t = spec.kernel.support_radius();
    let dr = t / spec.radial as f64;
    let dtheta = 2.0 * std::f64::consts::PI / spec.angular as f64;
    let mut out = Vec::with_capacity(spec.radial * spec.angular / 2);
    for i in 0..spec.radial {
        let r = (i as f64 + 0.5) * dr;
        let radial_weight = match z_len {
            None => spec.kernel.value(r),
            Some(l) => axial_kernel(&spec.kernel, r, l, spec.eps)?,
        };
        if radial_weight == 0.0 {
            continue;
        }
        for k in 0..spec.angular / 2 {
            let th = (k as f64 + 0.5) * dtheta;
            out.push(XiNode {
                dx: spec.eps * r * th.cos(),
                dy: spec.eps * r * th.sin(),
                weight: radial_weight * r * dr * dtheta,
            });
        }
    }
    Ok(out)
}

/// `int rho(sqrt(s^2 + t^2)) (len - eps |t|)_+ dt` over the real line.
///
/// A product field `u(x) = w(x1, x2)` on `base x (0, len)` sees the third
/// component of `xi` only through this weight.
pub fn axial_kernel(kernel: &Kernel, s: f64, len: f64, eps: f64) -> Result<f64> {
    let t_max2 = kernel.support_radius().powi(2) - s * s;
    if t_max2 <= 0.0 {
        return Ok(0.0);
    }
    let t_max = t_max2.sqrt();
    let mut knots = vec![0.0, t_max];
    if len / eps < t_max {
        knots.push(len / eps);
    }
    for b in kernel.breakpoints() {
        if b > s {
            knots.push((b * b - s * s).sqrt());
        }
    }
    knots.sort_by(f64::total_cmp);
    knots.retain(|t| *t <= t_max);
    knots.dedup();
    let f = |t: f64| kernel.value((s * s + t * t).sqrt()) * (len - eps * t).max(0.0);
    let mut total = 0.0;
    for w in knots.windows(2) {
        total += adaptive_simpson(&f, w[0], w[1], 1e-12 * len)?;
    }
    Ok(2.0 * total)
}

/// Integration region: the domain intersected with the localization set.
pub(crate) struct Region<'a> {
    shapes: Vec<&'a Shape2>,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub z_len: Option<f64>,
}

impl<'a> Region<'a> {
    pub fn new(spec: &'a EnergySpec) -> Result<Self> {
        let mut doms = vec![&spec.domain];
        if let Some(v) = &spec.local {
            doms.push(v);
        }
        let mut lo = [f64::NEG_INFINITY; 2];
        let mut hi = [f64::INFINITY; 2];
        let mut zlo = f64::NEG_INFINITY;
        let mut zhi = f64::INFINITY;
        for d in &doms {
            let (l, h) = d.bounding_box();
            for a in 0..2 {
                lo[a] = lo[a].max(l[a]);
                hi[a] = hi[a].min(h[a]);
            }
            if let Some(iv) = d.interval() {
                zlo = zlo.max(iv[0]);
                zhi = zhi.min(iv[1]);
            }
        }
        if !(hi[0] > lo[0] && hi[1] > lo[1]) || (spec.dim() == 3 && !(zhi > zlo)) {
            return Err(Error::InvalidDomain("localization set does not meet the domain".into()));
        }
        Ok(Region {
            shapes: doms.iter().map(|d| d.shape()).collect(),
            lo,
            hi,
            z_len: (spec.dim() == 3).then_some(zhi - zlo),
        })
    }

    pub fn spans(&self, y: f64) -> Vec<[f64; 2]> {
        let mut acc = self.shapes[0].row_spans(y);
        for s in &self.shapes[1..] {
            acc = intersect(&acc, &s.row_spans(y));
        }
        acc
    }

    fn y_range(&self) -> [f64; 2] {
        let mut r = [f64::NEG_INFINITY, f64::INFINITY];
        for s in &self.shapes {
            let q = s.y_range();
            r = [r[0].max(q[0]), r[1].min(q[1])];
        }
        r
    }
}

/// Intersection of two sorted lists of disjoint open intervals.
pub(crate) fn intersect(a: &[[f64; 2]], b: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i][0].max(b[j][0]);
        let hi = a[i][1].min(b[j][1]);
        if hi > lo {
            out.push([lo, hi]);
        }
        if a[i][1] < b[j][1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Indices `[a, b)` of grid cells `[x0 + k h, x0 + (k + 1) h]` inside `[lo, hi]`.
fn full_cells(x0: f64, h: f64, lo: f64, hi: f64) -> Option<(i64, i64)> {
    let a = ((lo - x0) / h).ceil() as i64;
    let b = ((hi - x0) / h).floor() as i64;
    (b > a).then_some((a, b))
}

fn row_contribution(region: &Region, xi: &[XiNode], f: &Field, h: f64, nx: usize, j: usize) -> Result<f64> {
    let x0 = region.lo[0];
    let yj = region.lo[1] + (j as f64 + 0.5) * h;
    let yr = region.y_range();

    // Base values on full cells of this row, reused for every xi whose
    // admissible strip covers the whole row cell.
    let mut cache = vec![[f64::NAN; 2]; nx + 1];
    for s in region.spans(yj) {
        if let Some((a, b)) = full_cells(x0, h, s[0], s[1]) {
            let (a, b) = (a.max(0) as usize, (b.max(0) as usize).min(nx + 1));
            if b > a {
                f.eval_row(x0 + (a as f64 + 0.5) * h, h, yj, &mut cache[a..b])?;
            }
        }
    }

    let mut base = Vec::new();
    let mut shifted = Vec::new();
    let mut one = [[0.0; 2]; 1];
    let mut one_s = [[0.0; 2]; 1];
    let mut total = Vec::with_capacity(xi.len());
    for node in xi {
        let c = yr[0].max(yr[0] - node.dy);
        let d = yr[1].min(yr[1] - node.dy);
        let ya = (yj - 0.5 * h).max(c);
        let yb = (yj + 0.5 * h).min(d);
        if yb <= ya {
            continue;
        }
        let full_row = ya == yj - 0.5 * h && yb == yj + 0.5 * h;
        let wy = if full_row { 1.0 } else { (yb - ya) / h };
        let ys = if full_row { yj } else { 0.5 * (ya + yb) };
        let shifted_spans: Vec<[f64; 2]> = region
            .spans(ys + node.dy)
            .iter()
            .map(|s| [s[0] - node.dx, s[1] - node.dx])
            .collect();
        let spans = intersect(&region.spans(ys), &shifted_spans);
        let mut row_sum = 0.0;
        for s in spans {
            let sa = (s[0] - x0) / h;
            let sb = (s[1] - x0) / h;
            let ka = sa.ceil();
            let kb = sb.floor();
            let mut partial = |lo: f64, hi: f64| -> Result<f64> {
                let w = hi - lo;
                if w <= 0.0 {
                    return Ok(0.0);
                }
                let x = x0 + 0.5 * (lo + hi) * h;
                f.eval_row(x, h, ys, &mut one)?;
                f.eval_row(x + node.dx, h, ys + node.dy, &mut one_s)?;
                Ok(w * dist2(one[0], one_s[0]))
            };
            if ka > kb {
                row_sum += partial(sa, sb)?;
                continue;
            }
            row_sum += partial(sa, ka)?;
            row_sum += partial(kb, sb)?;
            let (a, b) = (ka as i64, kb as i64);
            if b <= a {
                continue;
            }
            let n = (b - a) as usize;
            let xa = x0 + (a as f64 + 0.5) * h;
            shifted.resize(n, [0.0; 2]);
            f.eval_row(xa + node.dx, h, ys + node.dy, &mut shifted)?;
            let cached = full_row
                && a >= 0
                && (b as usize) <= cache.len()
                && cache[a as usize..b as usize].iter().all(|v| !v[0].is_nan());
            let bvals: &[[f64; 2]] = if cached {
                &cache[a as usize..b as usize]
            } else {
                base.resize(n, [0.0; 2]);
                f.eval_row(xa, h, ys, &mut base)?;
                &base
            };
            row_sum += bvals.iter().zip(&shifted).map(|(p, q)| dist2(*p, *q)).sum::<f64>();
        }
        total.push(node.weight * wy * row_sum);
    }
    Ok(pairwise_sum(&total))
}

#[inline]
fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    d0 * d0 + d1 * d1
}

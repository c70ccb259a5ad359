use rayon::prelude::*;

use super::{Gradient, LatticeField, SimplexId};
use crate::error::{Error, Result};
use crate::fields::{Domain, Shape2};
use crate::quadrature::pairwise_sum;

/// The two scaled distances between piecewise-affine fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolantDistances {
    /// `(eps^2 |log eps|)^-1 int_U |A - B|^2`.
    pub l2: f64,
    /// `|log eps|^-1 int_U |grad A - grad B|^2`.
    pub gradient: f64,
    /// Area of `U` covered by both triangulations.
    pub area: f64,
}

type P2 = [f64; 2];

struct Affine {
    origin: P2,
    value: P2,
    grad: Gradient,
}

impl Affine {
    fn at(&self, x: P2) -> P2 {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        [
            self.value[0] + self.grad[0][0] * d[0] + self.grad[0][1] * d[1],
            self.value[1] + self.grad[1][0] * d[0] + self.grad[1][1] * d[1],
        ]
    }
}

/// Integrates both quantities exactly on the common refinement of the two
/// triangulations, clipped to `u`.
///
/// Clipping is exact for rectangles; for other shapes a refinement piece is
/// kept when its centroid lies in `u`.
pub fn interpolant_distances(a: &LatticeField, b: &LatticeField, u: &Domain, eps: f64) -> Result<InterpolantDistances> {
    if a.dim() != 2 || b.dim() != 2 || u.dim() != 2 {
        return Err(Error::Dimension("diagnostics are planar".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must lie in (0, 1)")));
    }
    let (ulo, uhi) = u.bounding_box();
    let rect = match u.shape() {
        Shape2::Rectangle { lo, hi } => Some((*lo, *hi)),
        _ => None,
    };
    let cells = a.populated_cells();
    let parts: Vec<(f64, f64, f64)> = cells
        .par_iter()
        .map(|&cell| -> Result<(f64, f64, f64)> {
            let mut acc = (0.0, 0.0, 0.0);
            for sa in a.simplices_of(cell) {
                let tri = ccw(points2(a, sa));
                let (blo, bhi) = bbox(&tri);
                if bhi[0] <= ulo[0] || blo[0] >= uhi[0] || bhi[1] <= ulo[1] || blo[1] >= uhi[1] {
                    continue;
                }
                let mut target = tri.clone();
                if let Some((lo, hi)) = rect {
                    target = clip_rect(&target, lo, hi);
                }
                let target_area = area(&target);
                if target_area <= 0.0 {
                    continue;
                }
                let fa = affine(a, sa)?;
                let mut covered = 0.0;
                for sb in overlapping(b, &target) {
                    let piece = clip(&target, &ccw(points2(b, sb)));
                    let pa = area(&piece);
                    if pa <= 0.0 {
                        continue;
                    }
                    covered += pa;
                    if rect.is_none() && !u.contains(&centroid(&piece)) {
                        continue;
                    }
                    let fb = affine(b, sb)?;
                    let mut gd = 0.0;
                    for c in 0..2 {
                        for k in 0..2 {
                            gd += (fa.grad[c][k] - fb.grad[c][k]).powi(2);
                        }
                    }
                    acc.0 += integrate_sq(&piece, |x| {
                        let (p, q) = (fa.at(x), fb.at(x));
                        [p[0] - q[0], p[1] - q[1]]
                    });
                    acc.1 += gd * pa;
                    acc.2 += pa;
                }
                if (covered - target_area).abs() > 1e-9 * target_area.max(eps * eps) {
                    return Err(Error::Unpopulated(format!(
                        "second field does not cover simplex {sa:?} ({covered:e} of {target_area:e})"
                    )));
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let l = eps.ln().abs();
    let col = |f: fn(&(f64, f64, f64)) -> f64| pairwise_sum(&parts.iter().map(f).collect::<Vec<_>>());
    Ok(InterpolantDistances {
        l2: col(|p| p.0) / (eps * eps * l),
        gradient: col(|p| p.1) / l,
        area: col(|p| p.2),
    })
}

fn points2(lf: &LatticeField, id: SimplexId) -> Vec<P2> {
    lf.simplex_points(id).iter().map(|p| [p[0], p[1]]).collect()
}

fn affine(lf: &LatticeField, id: SimplexId) -> Result<Affine> {
    let verts = lf.simplex_vertices(id);
    let p = lf.position(verts[0]);
    Ok(Affine {
        origin: [p[0], p[1]],
        value: lf.get(verts[0]).ok_or_else(|| Error::Unpopulated(format!("{id:?}")))?,
        grad: lf.interpolation_gradient(id)?,
    })
}

/// Simplices of `lf` whose cube may meet the polygon.
fn overlapping(lf: &LatticeField, poly: &[P2]) -> Vec<SimplexId> {
    let mut tmin = [f64::INFINITY; 2];
    let mut tmax = [f64::NEG_INFINITY; 2];
    for p in poly {
        let t = lf.physical_to_local(p);
        for a in 0..2 {
            tmin[a] = tmin[a].min(t[a]);
            tmax[a] = tmax[a].max(t[a]);
        }
    }
    let mut out = Vec::new();
    for k1 in (tmin[1].floor() as i64 - 1)..=(tmax[1].floor() as i64) {
        for k0 in (tmin[0].floor() as i64 - 1)..=(tmax[0].floor() as i64) {
            let cell = [k0, k1, 0];
            if lf.cell_populated(cell) {
                out.extend(lf.simplices_of(cell));
            }
        }
    }
    out
}

fn signed_area(poly: &[P2]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (p, q) = (poly[i], poly[(i + 1) % n]);
            p[0] * q[1] - p[1] * q[0]
        })
        .sum::<f64>()
        * 0.5
}

fn area(poly: &[P2]) -> f64 {
    if poly.len() < 3 {
        0.0
    } else {
        signed_area(poly).abs()
    }
}

fn ccw(mut poly: Vec<P2>) -> Vec<P2> {
    if signed_area(&poly) < 0.0 {
        poly.reverse();
    }
    poly
}

fn bbox(poly: &[P2]) -> (P2, P2) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in poly {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    (lo, hi)
}

fn centroid(poly: &[P2]) -> Vec<f64> {
    let n = poly.len() as f64;
    vec![
        poly.iter().map(|p| p[0]).sum::<f64>() / n,
        poly.iter().map(|p| p[1]).sum::<f64>() / n,
    ]
}

/// Sutherland-Hodgman clipping of `subject` by the counter-clockwise convex polygon `clip_poly`.
fn clip(subject: &[P2], clip_poly: &[P2]) -> Vec<P2> {
    let mut out = subject.to_vec();
    let n = clip_poly.len();
    for i in 0..n {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clip_poly[i], clip_poly[(i + 1) % n]);
        let side = |p: P2| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        out = clip_half_plane(&out, side);
    }
    out
}

fn clip_rect(subject: &[P2], lo: P2, hi: P2) -> Vec<P2> {
    clip(subject, &[lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]])
}

/// Keeps the part of the polygon where `side >= 0`.
fn clip_half_plane(poly: &[P2], side: impl Fn(P2) -> f64) -> Vec<P2> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let n = poly.len();
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let (sp, sq) = (side(p), side(q));
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp >= 0.0) != (sq >= 0.0) {
            let t = sp / (sp - sq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// `int_poly |g|^2` for affine `g`, exact via the edge-midpoint rule on a fan.
fn integrate_sq(poly: &[P2], g: impl Fn(P2) -> P2) -> f64 {
    let sq = |x: P2| {
        let v = g(x);
        v[0] * v[0] + v[1] * v[1]
    };
    let mid = |p: P2, q: P2| [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
    let mut total = 0.0;
    for i in 1..poly.len() - 1 {
        let (p, q, r) = (poly[0], poly[i], poly[i + 1]);
        let ar = area(&[p, q, r]);
        total += ar / 3.0 * (sq(mid(p, q)) + sq(mid(q, r)) + sq(mid(r, p)));
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Field;
    use crate::lattice::{discretize, IDENTITY};

    fn affine_lattice(eps: f64, c: [f64; 2]) -> LatticeField {
        LatticeField::from_fn(2, eps, IDENTITY, [0.0; 3], [-10, -10, 0], [21, 21, 1], false, |k| {
            Some([k[0] as f64 * eps + c[0], -(k[1] as f64) * eps + c[1]])
        })
        .unwrap()
    }

    #[test]
    fn identical_fields_give_zero() {
        let lf = affine_lattice(0.1, [0.0, 0.0]);
        let u = Domain::rectangle([-0.5, -0.5], [0.5, 0.5]).unwrap();
        let r = interpolant_distances(&lf, &lf, &u, 0.1).unwrap();
        assert_eq!((r.l2, r.gradient), (0.0, 0.0));
        assert!((r.area - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_shift() {
        let eps = 0.1;
        let a = affine_lattice(eps, [0.0, 0.0]);
        let b = affine_lattice(eps, [0.3, -0.4]);
        let u = Domain::rectangle([-0.5, -0.5], [0.5, 0.5]).unwrap();
        let r = interpolant_distances(&a, &b, &u, eps).unwrap();
        let expect = 0.25 / (eps * eps * eps.ln().abs());
        assert!((r.l2 / expect - 1.0).abs() < 1e-12, "{} vs {expect}", r.l2);
        assert!(r.gradient.abs() < 1e-20);
    }

    #[test]
    fn uncovered_simplices_are_reported() {
        let eps = 0.1;
        let a = affine_lattice(eps, [0.0, 0.0]);
        let f = Field::constant([1.0, 0.0]);
        let small = Domain::rectangle([0.0, 0.0], [0.5, 0.5]).unwrap();
        let b = discretize(&f, &small, eps).unwrap();
        let u = Domain::rectangle([-0.5, -0.5], [0.5, 0.5]).unwrap();
        assert!(matches!(
            interpolant_distances(&a, &b, &u, eps),
            Err(Error::Unpopulated(_))
        ));
    }

    #[test]
    fn clipping_squares() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let piece = clip(&sq, &[[0.5, 0.5], [1.5, 0.5], [1.5, 1.5], [0.5, 1.5]]);
        assert!((area(&piece) - 0.25).abs() < 1e-15);
    }
}

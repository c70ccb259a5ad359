use crate::error::{Error, Result};

/// Planar cross-section shapes.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape2 {
    Ball { center: [f64; 2], radius: f64 },
    Rectangle { lo: [f64; 2], hi: [f64; 2] },
    Annulus { center: [f64; 2], inner: f64, outer: f64 },
}

/// A bounded open region in dimension 2, or a planar shape times an interval in dimension 3.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Planar(Shape2),
    Product2D { base: Shape2, interval: [f64; 2] },
}

impl Shape2 {
    fn validate(&self) -> Result<()> {
        let ok = match self {
            Shape2::Ball { radius, center } => *radius > 0.0 && radius.is_finite() && finite2(center),
            Shape2::Rectangle { lo, hi } => finite2(lo) && finite2(hi) && hi[0] > lo[0] && hi[1] > lo[1],
            Shape2::Annulus { center, inner, outer } => {
                finite2(center) && *inner > 0.0 && outer > inner && outer.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidDomain(format!("{self:?}")))
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        match *self {
            Shape2::Ball { center, radius } => dist(p, center) < radius,
            Shape2::Rectangle { lo, hi } => p[0] > lo[0] && p[0] < hi[0] && p[1] > lo[1] && p[1] < hi[1],
            Shape2::Annulus { center, inner, outer } => {
                let r = dist(p, center);
                r > inner && r < outer
            }
        }
    }

    /// Distance to the boundary, for points inside or on the closure.
    fn boundary_distance(&self, p: [f64; 2]) -> f64 {
        match *self {
            Shape2::Ball { center, radius } => (radius - dist(p, center)).max(0.0),
            Shape2::Rectangle { lo, hi } => (p[0] - lo[0])
                .min(hi[0] - p[0])
                .min(p[1] - lo[1])
                .min(hi[1] - p[1])
                .max(0.0),
            Shape2::Annulus { center, inner, outer } => {
                let r = dist(p, center);
                (r - inner).min(outer - r).max(0.0)
            }
        }
    }

    fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match *self {
            Shape2::Ball { center, radius: r } | Shape2::Annulus { center, outer: r, .. } => {
                ([center[0] - r, center[1] - r], [center[0] + r, center[1] + r])
            }
            Shape2::Rectangle { lo, hi } => (lo, hi),
        }
    }

    fn inradius(&self) -> f64 {
        match *self {
            Shape2::Ball { radius, .. } => radius,
            Shape2::Rectangle { lo, hi } => 0.5 * (hi[0] - lo[0]).min(hi[1] - lo[1]),
            Shape2::Annulus { inner, outer, .. } => 0.5 * (outer - inner),
        }
    }

    fn area(&self) -> f64 {
        match *self {
            Shape2::Ball { radius, .. } => std::f64::consts::PI * radius * radius,
            Shape2::Rectangle { lo, hi } => (hi[0] - lo[0]) * (hi[1] - lo[1]),
            Shape2::Annulus { inner, outer, .. } => std::f64::consts::PI * (outer * outer - inner * inner),
        }
    }

    fn shrink(&self, delta: f64) -> Result<Shape2> {
        if !(delta > 0.0) || delta >= self.inradius() {
            return Err(Error::EmptyShrink { delta });
        }
        Ok(match *self {
            Shape2::Ball { center, radius } => Shape2::Ball {
                center,
                radius: radius - delta,
            },
            Shape2::Rectangle { lo, hi } => Shape2::Rectangle {
                lo: [lo[0] + delta, lo[1] + delta],
                hi: [hi[0] - delta, hi[1] - delta],
            },
            Shape2::Annulus { center, inner, outer } => Shape2::Annulus {
                center,
                inner: inner + delta,
                outer: outer - delta,
            },
        })
    }

    /// Open x-intervals of the horizontal line at height `y` inside the shape.
    pub fn row_spans(&self, y: f64) -> Vec<[f64; 2]> {
        match *self {
            Shape2::Ball { center, radius } => {
                let dy = y - center[1];
                let h2 = radius * radius - dy * dy;
                if h2 <= 0.0 {
                    return Vec::new();
                }
                let h = h2.sqrt();
                vec![[center[0] - h, center[0] + h]]
            }
            Shape2::Rectangle { lo, hi } => {
                if y > lo[1] && y < hi[1] {
                    vec![[lo[0], hi[0]]]
                } else {
                    Vec::new()
                }
            }
            Shape2::Annulus { center, inner, outer } => {
                let dy = y - center[1];
                let o2 = outer * outer - dy * dy;
                if o2 <= 0.0 {
                    return Vec::new();
                }
                let o = o2.sqrt();
                let i2 = inner * inner - dy * dy;
                if i2 <= 0.0 {
                    return vec![[center[0] - o, center[0] + o]];
                }
                let i = i2.sqrt();
                vec![[center[0] - o, center[0] - i], [center[0] + i, center[0] + o]]
            }
        }
    }

    /// Range of heights where rows are nonempty.
    pub fn y_range(&self) -> [f64; 2] {
        let (lo, hi) = self.bounding_box();
        [lo[1], hi[1]]
    }

    /// Whether the closed segment `[a, b]` stays inside the closure of the shape.
    pub fn segment_inside(&self, a: [f64; 2], b: [f64; 2]) -> bool {
        match *self {
            Shape2::Ball { .. } | Shape2::Rectangle { .. } => true,
            Shape2::Annulus { center, inner, .. } => segment_point_distance(a, b, center) >= inner,
        }
    }

    /// Whether the shape is convex.
    pub fn is_convex(&self) -> bool {
        !matches!(self, Shape2::Annulus { .. })
    }
}

impl Domain {
    pub fn ball(center: [f64; 2], radius: f64) -> Result<Self> {
        Self::planar(Shape2::Ball { center, radius })
    }

    pub fn rectangle(lo: [f64; 2], hi: [f64; 2]) -> Result<Self> {
        Self::planar(Shape2::Rectangle { lo, hi })
    }

    pub fn annulus(center: [f64; 2], inner: f64, outer: f64) -> Result<Self> {
        Self::planar(Shape2::Annulus { center, inner, outer })
    }

    pub fn product(base: Shape2, interval: [f64; 2]) -> Result<Self> {
        base.validate()?;
        if !(interval[1] > interval[0]) || !interval[0].is_finite() || !interval[1].is_finite() {
            return Err(Error::InvalidDomain(format!("interval {interval:?}")));
        }
        Ok(Domain::Product2D { base, interval })
    }

    fn planar(s: Shape2) -> Result<Self> {
        s.validate()?;
        Ok(Domain::Planar(s))
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Planar(_) => 2,
            Domain::Product2D { .. } => 3,
        }
    }

    /// The planar shape (cross-section for products).
    pub fn shape(&self) -> &Shape2 {
        match self {
            Domain::Planar(s) | Domain::Product2D { base: s, .. } => s,
        }
    }

    pub fn interval(&self) -> Option<[f64; 2]> {
        match self {
            Domain::Planar(_) => None,
            Domain::Product2D { interval, .. } => Some(*interval),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            Domain::Planar(s) => s.contains([x[0], x[1]]),
            Domain::Product2D { base, interval } => {
                base.contains([x[0], x[1]]) && x[2] > interval[0] && x[2] < interval[1]
            }
        }
    }

    /// `dist(x, boundary)` for `x` in the closure.
    pub fn boundary_distance(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "point of length {} in dimension {}",
                x.len(),
                self.dim()
            )));
        }
        if !self.contains(x) && self.outside_distance(x) > 0.0 {
            return Err(Error::OutsideDomain { point: x.to_vec() });
        }
        Ok(self.unchecked_boundary_distance(x))
    }

    /// Like [`Domain::boundary_distance`] but returns 0 outside instead of failing.
    pub fn unchecked_boundary_distance(&self, x: &[f64]) -> f64 {
        if !self.contains(x) {
            return 0.0;
        }
        match self {
            Domain::Planar(s) => s.boundary_distance([x[0], x[1]]),
            Domain::Product2D { base, interval } => base
                .boundary_distance([x[0], x[1]])
                .min(x[2] - interval[0])
                .min(interval[1] - x[2]),
        }
    }

    /// Zero for points in the closure, positive for points clearly outside.
    pub(crate) fn outside_distance(&self, x: &[f64]) -> f64 {
        let p = [x[0], x[1]];
        let planar = match *self.shape() {
            Shape2::Ball { center, radius } => (dist(p, center) - radius).max(0.0),
            Shape2::Rectangle { lo, hi } => {
                let dx = (lo[0] - p[0]).max(p[0] - hi[0]).max(0.0);
                let dy = (lo[1] - p[1]).max(p[1] - hi[1]).max(0.0);
                dx.hypot(dy)
            }
            Shape2::Annulus { center, inner, outer } => {
                let r = dist(p, center);
                (inner - r).max(r - outer).max(0.0)
            }
        };
        match self {
            Domain::Planar(_) => planar,
            Domain::Product2D { interval, .. } => {
                let dz = (interval[0] - x[2]).max(x[2] - interval[1]).max(0.0);
                planar.hypot(dz)
            }
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let (lo, hi) = self.shape().bounding_box();
        match self {
            Domain::Planar(_) => (lo.to_vec(), hi.to_vec()),
            Domain::Product2D { interval, .. } => (vec![lo[0], lo[1], interval[0]], vec![hi[0], hi[1], interval[1]]),
        }
    }

    pub fn inradius(&self) -> f64 {
        match self {
            Domain::Planar(s) => s.inradius(),
            Domain::Product2D { base, interval } => base.inradius().min(0.5 * (interval[1] - interval[0])),
        }
    }

    /// Lebesgue measure.
    pub fn volume(&self) -> f64 {
        match self {
            Domain::Planar(s) => s.area(),
            Domain::Product2D { base, interval } => base.area() * (interval[1] - interval[0]),
        }
    }

    /// The subdomain of points at distance more than `delta` from the boundary.
    pub fn shrink(&self, delta: f64) -> Result<Domain> {
        if !(delta > 0.0) || delta >= self.inradius() {
            return Err(Error::EmptyShrink { delta });
        }
        Ok(match self {
            Domain::Planar(s) => Domain::Planar(s.shrink(delta)?),
            Domain::Product2D { base, interval } => Domain::Product2D {
                base: base.shrink(delta)?,
                interval: [interval[0] + delta, interval[1] - delta],
            },
        })
    }

    /// Parses `ball:R`, `ball:cx,cy,R`, `rect:lx,ly`, `rect:x0,y0,x1,y1`,
    /// `annulus:r,R`, `annulus:cx,cy,r,R` or `cyl:R,h`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::parse("domain", spec, "expected '<kind>:<params>'"))?;
        let v = parse_numbers("domain", spec, rest)?;
        let bad = || Error::parse("domain", spec, "wrong number of parameters");
        match (kind.trim(), v.len()) {
            ("ball", 1) => Self::ball([0.0, 0.0], v[0]),
            ("ball", 3) => Self::ball([v[0], v[1]], v[2]),
            ("rect", 2) => Self::rectangle([0.0, 0.0], [v[0], v[1]]),
            ("rect", 4) => Self::rectangle([v[0], v[1]], [v[2], v[3]]),
            ("annulus", 2) => Self::annulus([0.0, 0.0], v[0], v[1]),
            ("annulus", 4) => Self::annulus([v[0], v[1]], v[2], v[3]),
            ("cyl", 2) => Self::product(
                Shape2::Ball {
                    center: [0.0, 0.0],
                    radius: v[0],
                },
                [0.0, v[1]],
            ),
            ("ball" | "rect" | "annulus" | "cyl", _) => Err(bad()),
            (other, _) => Err(Error::parse("domain", spec, format!("unknown domain '{other}'"))),
        }
    }
}

pub(crate) fn parse_numbers(what: &'static str, spec: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::parse(what, spec, format!("'{}': {e}", t.trim())))
        })
        .collect()
}

fn finite2(p: &[f64; 2]) -> bool {
    p[0].is_finite() && p[1].is_finite()
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn segment_point_distance(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    if len2 == 0.0 {
        return dist(a, p);
    }
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    dist([a[0] + t * d[0], a[1] + t * d[1]], p)
}

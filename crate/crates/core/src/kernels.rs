//! Radial interaction kernels and their moments.
//!
//! A kernel is a compactly supported profile `rho: [0, inf) -> [0, inf)`.
//! The nonlocal energies only see `rho(|xi|)`, so everything here is radial.

use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;

/// Absolute tolerance of the radial quadrature.
pub const RADIAL_TOL: f64 = 1e-8;

/// Shape of the profile before dilation and scaling.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `1` on `[0, T]`.
    Indicator,
    /// `max(1 - t/T, 0)`.
    Triangle,
    /// `exp(-t^2 / (2 sigma^2))` truncated at `T`.
    Gauss { sigma: f64 },
    /// Piecewise-linear through `(t, rho)` nodes, zero beyond the last node.
    Table { t: Vec<f64>, rho: Vec<f64> },
}

/// An admissible interaction kernel.
///
/// `value(t) = amplitude * profile(t / dilation)` for `t / dilation <= support`,
/// and zero beyond.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    profile: Profile,
    support: f64,
    dilation: f64,
    amplitude: f64,
}

/// Lower bound `rho >= rho0` on `[0, r0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBound {
    pub rho0: f64,
    pub r0: f64,
}

impl Kernel {
    pub fn indicator(support: f64) -> Result<Self> {
        Self::new(Profile::Indicator, support)
    }

    pub fn triangle(support: f64) -> Result<Self> {
        Self::new(Profile::Triangle, support)
    }

    pub fn gauss(sigma: f64, support: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidKernel(format!("gaussian width {sigma} must be positive")));
        }
        Self::new(Profile::Gauss { sigma }, support)
    }

    /// Tabulated profile with linear interpolation; `t` must start at 0 and
    /// be strictly increasing, `rho` must be finite and nonnegative.
    pub fn table(t: Vec<f64>, rho: Vec<f64>) -> Result<Self> {
        if t.len() != rho.len() || t.len() < 2 {
            return Err(Error::InvalidKernel("table needs at least two (t, rho) rows".into()));
        }
        if t[0] != 0.0 {
            return Err(Error::InvalidKernel("table must start at t = 0".into()));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidKernel("table abscissae must increase strictly".into()));
        }
        if rho.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidKernel(
                "table values must be finite and nonnegative".into(),
            ));
        }
        let support = *t.last().unwrap();
        Self::new(Profile::Table { t, rho }, support)
    }

    /// Reads a two-column CSV with header `t,rho`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path).map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let headers = rdr
            .headers()
            .map_err(|source| Error::Csv {
                path: path.to_path_buf(),
                source,
            })?
            .clone();
        let cols: Vec<&str> = headers.iter().map(str::trim).collect();
        if cols != ["t", "rho"] {
            return Err(Error::parse(
                "kernel table",
                &path.display().to_string(),
                "header must be 't,rho'",
            ));
        }
        let mut t = Vec::new();
        let mut rho = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|source| Error::Csv {
                path: path.to_path_buf(),
                source,
            })?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::parse("kernel table", s, e.to_string()))
            };
            t.push(parse(&rec[0])?);
            rho.push(parse(&rec[1])?);
        }
        Self::table(t, rho)
    }

    /// The zero kernel (useful as a degenerate reference).
    pub fn zero() -> Self {
        Kernel {
            profile: Profile::Indicator,
            support: 1.0,
            dilation: 1.0,
            amplitude: 0.0,
        }
    }

    fn new(profile: Profile, support: f64) -> Result<Self> {
        if !(support > 0.0 && support.is_finite()) {
            return Err(Error::InvalidKernel(format!(
                "support radius {support} must be positive"
            )));
        }
        Ok(Kernel {
            profile,
            support,
            dilation: 1.0,
            amplitude: 1.0,
        })
    }

    /// `t -> rho(t / s) / s^(d + 2)`, which leaves the second moment in
    /// dimension `d` unchanged.
    pub fn dilated(&self, s: f64, d: usize) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidKernel(format!("dilation {s} must be positive")));
        }
        let mut k = self.clone();
        k.dilation *= s;
        k.amplitude /= s.powi(d as i32 + 2);
        Ok(k)
    }

    /// Multiplies all values by `c >= 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidKernel(format!("scale {c} must be nonnegative")));
        }
        let mut k = self.clone();
        k.amplitude *= c;
        Ok(k)
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// Support radius `T`: the kernel vanishes for `t > T`.
    pub fn support_radius(&self) -> f64 {
        self.support * self.dilation
    }

    /// `rho(t)`; negative `t` is a contract violation.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter(format!("kernel evaluated at t = {t}")));
        }
        Ok(self.value(t))
    }

    /// Unchecked evaluation for hot loops; `t` must be nonnegative.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        let s = t / self.dilation;
        if s > self.support || self.amplitude == 0.0 {
            return 0.0;
        }
        let p = match &self.profile {
            Profile::Indicator => 1.0,
            Profile::Triangle => (1.0 - s / self.support).max(0.0),
            Profile::Gauss { sigma } => (-s * s / (2.0 * sigma * sigma)).exp(),
            Profile::Table { t, rho } => table_value(t, rho, s),
        };
        self.amplitude * p
    }

    /// Points in `(0, T)` where the profile may fail to be smooth.
    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        match &self.profile {
            Profile::Table { t, .. } => t[1..t.len() - 1].iter().map(|x| x * self.dilation).collect(),
            _ => Vec::new(),
        }
    }

    /// `rho >= rho0 > 0` on `[0, r0]`, or `None` if the profile vanishes at 0.
    pub fn lower_bound(&self) -> Option<LowerBound> {
        if self.amplitude <= 0.0 {
            return None;
        }
        let (rho0, r0) = match &self.profile {
            Profile::Indicator => (1.0, self.support),
            Profile::Triangle => (0.5, 0.5 * self.support),
            Profile::Gauss { sigma } => {
                let r = 0.5 * self.support;
                ((-r * r / (2.0 * sigma * sigma)).exp(), r)
            }
            Profile::Table { t, rho } => {
                let half = 0.5 * rho[0];
                if half <= 0.0 {
                    return None;
                }
                (half, table_level_crossing(t, rho, half))
            }
        };
        Some(LowerBound {
            rho0: self.amplitude * rho0,
            r0: r0 * self.dilation,
        })
    }

    /// Whether `rho(|xi|) >= rho0` on the cube `[-1, 1]^d`, i.e. `r0 >= sqrt(d)`.
    pub fn satisfies_cube_bound(&self, d: usize) -> bool {
        self.lower_bound().is_some_and(|lb| lb.r0 >= (d as f64).sqrt())
    }

    /// Dilation factor that would make [`Kernel::satisfies_cube_bound`] hold.
    pub fn cube_bound_scale(&self, d: usize) -> Option<f64> {
        self.lower_bound().map(|lb| (d as f64).sqrt() / lb.r0)
    }

    /// `int_{R^d} rho(|xi|) |xi|^2 dxi`, as a radial integral times `|S^{d-1}|`.
    pub fn second_moment(&self, d: usize) -> Result<f64> {
        let sphere = sphere_area(d)?;
        let mut knots = vec![0.0];
        knots.extend(self.breakpoints());
        knots.push(self.support_radius());
        let f = |r: f64| self.value(r) * r.powi(d as i32 + 1);
        let mut total = 0.0;
        for w in knots.windows(2) {
            total += adaptive_simpson(&f, w[0], w[1], RADIAL_TOL)?;
        }
        Ok(sphere * total)
    }

    /// `C_rho = (2 pi / d) * second_moment`.
    pub fn gamma_limit_constant(&self, d: usize) -> Result<f64> {
        Ok(2.0 * PI / d as f64 * self.second_moment(d)?)
    }

    /// `int rho(|xi|) |xi|^2 log|xi| dxi / int rho(|xi|) |xi|^2 dxi`.
    pub fn log_moment_ratio(&self, d: usize) -> Result<f64> {
        let mut knots = vec![0.0];
        knots.extend(self.breakpoints());
        knots.push(self.support_radius());
        let num = |r: f64| {
            if r > 0.0 {
                self.value(r) * r.powi(d as i32 + 1) * r.ln()
            } else {
                0.0
            }
        };
        let den = |r: f64| self.value(r) * r.powi(d as i32 + 1);
        let (mut a, mut b) = (0.0, 0.0);
        for w in knots.windows(2) {
            a += adaptive_simpson(&num, w[0], w[1], RADIAL_TOL)?;
            b += adaptive_simpson(&den, w[0], w[1], RADIAL_TOL)?;
        }
        if b == 0.0 {
            return Err(Error::InvalidKernel("zero kernel has no log moment".into()));
        }
        Ok(a / b)
    }

    /// Parses `indicator:T`, `triangle:T`, `gauss:sigma:T` or `table:path.csv`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::parse("kernel", spec, "expected '<kind>:<params>'"))?;
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::parse("kernel", spec, e.to_string()))
        };
        match kind.trim() {
            "indicator" => Self::indicator(num(rest)?),
            "triangle" => Self::triangle(num(rest)?),
            "gauss" => {
                let (s, t) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::parse("kernel", spec, "expected gauss:sigma:T"))?;
                Self::gauss(num(s)?, num(t)?)
            }
            "table" => Self::from_csv(Path::new(rest.trim())),
            other => Err(Error::parse("kernel", spec, format!("unknown kernel '{other}'"))),
        }
    }
}

/// `|S^{d-1}|` for `d` in {2, 3}.
pub fn sphere_area(d: usize) -> Result<f64> {
    match d {
        2 => Ok(2.0 * PI),
        3 => Ok(4.0 * PI),
        _ => Err(Error::Dimension(format!("dimension {d} not supported (need 2 or 3)"))),
    }
}

fn table_value(t: &[f64], rho: &[f64], s: f64) -> f64 {
    let last = t.len() - 1;
    if s >= t[last] {
        return if s == t[last] { rho[last] } else { 0.0 };
    }
    let i = t.partition_point(|&x| x <= s) - 1;
    let w = (s - t[i]) / (t[i + 1] - t[i]);
    rho[i] * (1.0 - w) + rho[i + 1] * w
}

/// Largest `r` with `profile >= level` on `[0, r]` for a piecewise-linear table.
fn table_level_crossing(t: &[f64], rho: &[f64], level: f64) -> f64 {
    for i in 0..t.len() - 1 {
        if rho[i + 1] < level {
            let w = (rho[i] - level) / (rho[i] - rho[i + 1]);
            return t[i] + w * (t[i + 1] - t[i]);
        }
    }
    *t.last().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn evaluate_examples() {
        let ind = Kernel::indicator(1.0).unwrap();
        assert_eq!(ind.evaluate(0.5).unwrap(), 1.0);
        assert_eq!(ind.evaluate(2.0).unwrap(), 0.0);
        let tri = Kernel::triangle(1.0).unwrap();
        assert_eq!(tri.evaluate(0.25).unwrap(), 0.75);
        assert!(ind.evaluate(-0.1).is_err());
    }

    #[test]
    fn moments_of_indicator() {
        let ind = Kernel::indicator(1.0).unwrap();
        assert!(close(ind.second_moment(2).unwrap(), PI / 2.0, 1e-6));
        assert!(close(ind.second_moment(3).unwrap(), 4.0 * PI / 5.0, 1e-6));
        assert!(close(ind.gamma_limit_constant(2).unwrap(), PI * PI / 2.0, 1e-6));
        assert!(close(ind.gamma_limit_constant(3).unwrap(), 8.0 * PI * PI / 15.0, 1e-6));
    }

    #[test]
    fn zero_kernel_has_zero_moment() {
        let z = Kernel::zero();
        assert_eq!(z.second_moment(2).unwrap(), 0.0);
        assert_eq!(z.gamma_limit_constant(2).unwrap(), 0.0);
        assert!(z.lower_bound().is_none());
    }

    #[test]
    fn triangle_moment_closed_form() {
        // 2 pi * int_0^1 (1 - r) r^3 dr = 2 pi / 20
        let tri = Kernel::triangle(1.0).unwrap();
        assert!(close(tri.second_moment(2).unwrap(), PI / 10.0, 1e-6));
    }

    #[test]
    fn table_matches_triangle() {
        let tab = Kernel::table(vec![0.0, 0.5, 1.0], vec![1.0, 0.5, 0.0]).unwrap();
        let tri = Kernel::triangle(1.0).unwrap();
        for d in [2, 3] {
            assert!(close(
                tab.second_moment(d).unwrap(),
                tri.second_moment(d).unwrap(),
                1e-6
            ));
        }
        assert_eq!(tab.value(0.25), 0.75);
    }

    #[test]
    fn table_rejects_bad_rows() {
        assert!(Kernel::table(vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
        assert!(Kernel::table(vec![0.1, 1.0], vec![1.0, 1.0]).is_err());
        assert!(Kernel::table(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn dilation_preserves_second_moment() {
        let kernels = [
            Kernel::indicator(1.0).unwrap(),
            Kernel::triangle(1.5).unwrap(),
            Kernel::gauss(0.4, 1.0).unwrap(),
        ];
        for k in &kernels {
            for d in [2, 3] {
                let m = k.second_moment(d).unwrap();
                for s in [0.5, 2.0] {
                    let ms = k.dilated(s, d).unwrap().second_moment(d).unwrap();
                    assert!(close(ms, m, 1e-6), "s={s} d={d}: {ms} vs {m}");
                }
            }
        }
    }

    #[test]
    fn lower_bounds_and_cube_normalization() {
        let ind = Kernel::indicator(1.0).unwrap();
        assert_eq!(ind.lower_bound(), Some(LowerBound { rho0: 1.0, r0: 1.0 }));
        assert!(!ind.satisfies_cube_bound(2));
        let s = ind.cube_bound_scale(2).unwrap();
        assert!(close(s, 2f64.sqrt(), 1e-15));
        assert!(ind.dilated(s, 2).unwrap().satisfies_cube_bound(2));
        let tab = Kernel::table(vec![0.0, 1.0, 2.0], vec![1.0, 1.0, 0.0]).unwrap();
        let lb = tab.lower_bound().unwrap();
        assert_eq!(lb.rho0, 0.5);
        assert!(close(lb.r0, 1.5, 1e-15));
    }

    #[test]
    fn parse_specs() {
        assert_eq!(Kernel::parse("indicator:1").unwrap(), Kernel::indicator(1.0).unwrap());
        assert_eq!(
            Kernel::parse("gauss:0.3:1.2").unwrap(),
            Kernel::gauss(0.3, 1.2).unwrap()
        );
        assert!(Kernel::parse("bogus:1").is_err());
        assert!(Kernel::parse("indicator").is_err());
    }

    #[test]
    fn log_moment_of_indicator() {
        // int_0^1 r^3 log r dr / int_0^1 r^3 dr = -1/4
        let ind = Kernel::indicator(1.0).unwrap();
        assert!(close(ind.log_moment_ratio(2).unwrap(), -0.25, 1e-7));
    }
}

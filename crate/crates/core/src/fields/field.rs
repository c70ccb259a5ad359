use std::path::Path;

use crate::error::{Error, Result};

/// A point vortex: position in the plane and integer degree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub position: [f64; 2],
    pub degree: i32,
}

impl Atom {
    pub fn new(x: f64, y: f64, degree: i32) -> Self {
        Atom {
            position: [x, y],
            degree,
        }
    }
}

/// Values on a regular grid `origin + h * (i, j)`, row-major in `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGrid {
    pub origin: [f64; 2],
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    MultiVortex {
        atoms: Vec<Atom>,
        phase: f64,
    },
    Constant([f64; 2]),
    /// `u(x) = A x` with `A` stored as two rows of up to three columns.
    Linear {
        rows: [[f64; 3]; 2],
        cols: usize,
    },
    Sampled(SampledGrid),
}

/// A map from a domain into the plane, optionally constrained to the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    rule: Rule,
    unit: bool,
}

/// Distance below which row evaluation nudges a node off an atom.
pub const ATOM_NUDGE_RADIUS: f64 = 1e-9;

impl Field {
    /// `u = exp(i phase) * prod_l ((x - p_l) / |x - p_l|)^{d_l}`.
    pub fn vortices(atoms: Vec<Atom>, phase: f64) -> Result<Self> {
        if atoms
            .iter()
            .any(|a| !a.position[0].is_finite() || !a.position[1].is_finite())
        {
            return Err(Error::InvalidParameter("atom positions must be finite".into()));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidParameter("phase must be finite".into()));
        }
        Ok(Field {
            rule: Rule::MultiVortex { atoms, phase },
            unit: true,
        })
    }

    /// The recovery field `x / |x - p|` of degree `degree` at `p`.
    pub fn single_vortex(p: [f64; 2], degree: i32) -> Self {
        Field {
            rule: Rule::MultiVortex {
                atoms: vec![Atom { position: p, degree }],
                phase: 0.0,
            },
            unit: true,
        }
    }

    pub fn constant(v: [f64; 2]) -> Self {
        let unit = ((v[0] * v[0] + v[1] * v[1]) - 1.0).abs() < 1e-12;
        Field {
            rule: Rule::Constant(v),
            unit,
        }
    }

    /// Linear map from `R^2`.
    pub fn linear(a: [[f64; 2]; 2]) -> Self {
        Field {
            rule: Rule::Linear {
                rows: [[a[0][0], a[0][1], 0.0], [a[1][0], a[1][1], 0.0]],
                cols: 2,
            },
            unit: false,
        }
    }

    /// Linear map from `R^3`.
    pub fn linear3(a: [[f64; 3]; 2]) -> Self {
        Field {
            rule: Rule::Linear { rows: a, cols: 3 },
            unit: false,
        }
    }

    /// Bilinear interpolation of grid values, renormalized when `unit` is set.
    pub fn sampled(grid: SampledGrid, unit: bool) -> Result<Self> {
        if grid.nx < 2 || grid.ny < 2 || grid.values.len() != grid.nx * grid.ny {
            return Err(Error::InvalidParameter("sampled grid needs at least 2x2 values".into()));
        }
        if !(grid.h > 0.0) {
            return Err(Error::InvalidParameter("sampled grid spacing must be positive".into()));
        }
        Ok(Field {
            rule: Rule::Sampled(grid),
            unit,
        })
    }

    /// Reads a CSV with header `x,y,ux,uy` describing a complete regular grid.
    pub fn sampled_from_csv(path: &Path) -> Result<Self> {
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
        let headers: Vec<String> = rdr
            .headers()
            .map_err(csv_err)?
            .iter()
            .map(|s| s.trim().to_string())
            .collect();
        if headers != ["x", "y", "ux", "uy"] {
            return Err(Error::parse(
                "sampled field",
                &path.display().to_string(),
                "header must be 'x,y,ux,uy'",
            ));
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            let mut r = [0.0; 4];
            for (k, v) in r.iter_mut().enumerate() {
                *v = rec[k]
                    .trim()
                    .parse()
                    .map_err(|e: std::num::ParseFloatError| Error::parse("sampled field", &rec[k], e.to_string()))?;
            }
            rows.push(r);
        }
        let grid = grid_from_rows(&rows)?;
        let unit = grid
            .values
            .iter()
            .all(|v| ((v[0] * v[0] + v[1] * v[1]) - 1.0).abs() < 1e-9);
        Self::sampled(grid, unit)
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    /// Whether values lie on the unit circle.
    pub fn is_unit(&self) -> bool {
        self.unit
    }

    /// Point singularities of the field.
    pub fn atoms(&self) -> &[Atom] {
        match &self.rule {
            Rule::MultiVortex { atoms, .. } => atoms,
            _ => &[],
        }
    }

    /// Whether the field depends on the first two coordinates only.
    pub fn is_planar_product(&self) -> bool {
        match &self.rule {
            Rule::Linear { rows, cols } => *cols == 2 || (rows[0][2] == 0.0 && rows[1][2] == 0.0),
            _ => true,
        }
    }

    /// `u(x)`; the first two coordinates are used for planar rules.
    pub fn evaluate(&self, x: &[f64]) -> Result<[f64; 2]> {
        if x.len() < 2 || x.len() > 3 {
            return Err(Error::Dimension(format!("point of length {}", x.len())));
        }
        match &self.rule {
            Rule::MultiVortex { atoms, phase } => {
                let mut z = [phase.cos(), phase.sin()];
                for a in atoms {
                    let w = [x[0] - a.position[0], x[1] - a.position[1]];
                    let r = w[0].hypot(w[1]);
                    if r == 0.0 {
                        return Err(Error::Singular { point: x.to_vec() });
                    }
                    z = cmul(z, cpow([w[0] / r, w[1] / r], a.degree));
                }
                Ok(normalize(z))
            }
            Rule::Constant(v) => Ok(*v),
            Rule::Linear { rows, cols } => {
                if *cols == 3 && x.len() == 2 {
                    return Err(Error::Dimension("3-column linear map at a planar point".into()));
                }
                let x3 = if x.len() == 3 { x[2] } else { 0.0 };
                Ok([
                    rows[0][0] * x[0] + rows[0][1] * x[1] + rows[0][2] * x3,
                    rows[1][0] * x[0] + rows[1][1] * x[1] + rows[1][2] * x3,
                ])
            }
            Rule::Sampled(g) => {
                let v = bilinear(g, x[0], x[1]).ok_or_else(|| Error::OutsideDomain { point: x.to_vec() })?;
                if self.unit {
                    let n = v[0].hypot(v[1]);
                    if n == 0.0 {
                        return Err(Error::Singular { point: x.to_vec() });
                    }
                    Ok([v[0] / n, v[1] / n])
                } else {
                    Ok(v)
                }
            }
        }
    }

    /// Planar values at `(x0 + k dx, y)` for `k = 0..out.len()`.
    ///
    /// Nodes within [`ATOM_NUDGE_RADIUS`] of an atom are moved by `dx / 2`
    /// along the row.
    pub fn eval_row(&self, x0: f64, dx: f64, y: f64, out: &mut [[f64; 2]]) -> Result<()> {
        match &self.rule {
            Rule::MultiVortex { atoms, phase } => {
                let base = [phase.cos(), phase.sin()];
                if atoms.len() == 1 && atoms[0].degree == 1 {
                    let p = atoms[0].position;
                    let dy = y - p[1];
                    for (k, o) in out.iter_mut().enumerate() {
                        let mut ddx = x0 + k as f64 * dx - p[0];
                        let mut r2 = ddx * ddx + dy * dy;
                        if r2 < ATOM_NUDGE_RADIUS * ATOM_NUDGE_RADIUS {
                            ddx += 0.5 * dx;
                            r2 = ddx * ddx + dy * dy;
                        }
                        let inv = 1.0 / r2.sqrt();
                        *o = cmul(base, [ddx * inv, dy * inv]);
                    }
                    return Ok(());
                }
                for (k, o) in out.iter_mut().enumerate() {
                    let mut x = x0 + k as f64 * dx;
                    if atoms
                        .iter()
                        .any(|a| (x - a.position[0]).hypot(y - a.position[1]) < ATOM_NUDGE_RADIUS)
                    {
                        x += 0.5 * dx;
                    }
                    let mut z = base;
                    for a in atoms {
                        let w = [x - a.position[0], y - a.position[1]];
                        let inv = 1.0 / (w[0] * w[0] + w[1] * w[1]).sqrt();
                        z = cmul(z, cpow([w[0] * inv, w[1] * inv], a.degree));
                    }
                    *o = normalize(z);
                }
                Ok(())
            }
            _ => {
                for (k, o) in out.iter_mut().enumerate() {
                    *o = self.evaluate(&[x0 + k as f64 * dx, y])?;
                }
                Ok(())
            }
        }
    }

    /// Parses `vortex:x,y,deg[;x,y,deg...][;phase=p]`, `const:ux,uy`,
    /// `linear:a11,a12,a21,a22` or `sampled:path.csv`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::parse("field", spec, "expected '<kind>:<params>'"))?;
        let nums = |s: &str| super::domain::parse_numbers("field", spec, s);
        match kind.trim() {
            "vortex" => {
                let mut atoms = Vec::new();
                let mut phase = 0.0;
                for part in rest.split(';').map(str::trim).filter(|p| !p.is_empty()) {
                    if let Some(p) = part.strip_prefix("phase=") {
                        phase = p
                            .trim()
                            .parse()
                            .map_err(|e: std::num::ParseFloatError| Error::parse("field", spec, e.to_string()))?;
                        continue;
                    }
                    let v = nums(part)?;
                    if v.len() != 3 || v[2].fract() != 0.0 || v[2] == 0.0 {
                        return Err(Error::parse(
                            "field",
                            spec,
                            format!("atom '{part}' must be x,y,nonzero-integer"),
                        ));
                    }
                    atoms.push(Atom::new(v[0], v[1], v[2] as i32));
                }
                Self::vortices(atoms, phase)
            }
            "const" => {
                let v = nums(rest)?;
                if v.len() != 2 {
                    return Err(Error::parse("field", spec, "expected const:ux,uy"));
                }
                Ok(Self::constant([v[0], v[1]]))
            }
            "linear" => {
                let v = nums(rest)?;
                match v.len() {
                    4 => Ok(Self::linear([[v[0], v[1]], [v[2], v[3]]])),
                    6 => Ok(Self::linear3([[v[0], v[1], v[2]], [v[3], v[4], v[5]]])),
                    _ => Err(Error::parse("field", spec, "expected 4 or 6 matrix entries")),
                }
            }
            "sampled" => Self::sampled_from_csv(Path::new(rest.trim())),
            other => Err(Error::parse("field", spec, format!("unknown field '{other}'"))),
        }
    }
}

#[inline]
pub(crate) fn cmul(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]]
}

fn cpow(z: [f64; 2], n: i32) -> [f64; 2] {
    let base = if n < 0 { [z[0], -z[1]] } else { z };
    let mut acc = [1.0, 0.0];
    for _ in 0..n.unsigned_abs() {
        acc = cmul(acc, base);
    }
    acc
}

fn normalize(z: [f64; 2]) -> [f64; 2] {
    let n = z[0].hypot(z[1]);
    [z[0] / n, z[1] / n]
}

fn bilinear(g: &SampledGrid, x: f64, y: f64) -> Option<[f64; 2]> {
    let s = (x - g.origin[0]) / g.h;
    let t = (y - g.origin[1]) / g.h;
    let tol = 1e-9;
    if s < -tol || t < -tol || s > (g.nx - 1) as f64 + tol || t > (g.ny - 1) as f64 + tol {
        return None;
    }
    let i = (s.floor().max(0.0) as usize).min(g.nx - 2);
    let j = (t.floor().max(0.0) as usize).min(g.ny - 2);
    let fs = (s - i as f64).clamp(0.0, 1.0);
    let ft = (t - j as f64).clamp(0.0, 1.0);
    let at = |i: usize, j: usize| g.values[j * g.nx + i];
    let mut out = [0.0; 2];
    for c in 0..2 {
        out[c] = (1.0 - fs) * (1.0 - ft) * at(i, j)[c]
            + fs * (1.0 - ft) * at(i + 1, j)[c]
            + (1.0 - fs) * ft * at(i, j + 1)[c]
            + fs * ft * at(i + 1, j + 1)[c];
    }
    Some(out)
}

fn grid_from_rows(rows: &[[f64; 4]]) -> Result<SampledGrid> {
    let axis = |k: usize| {
        let mut v: Vec<f64> = rows.iter().map(|r| r[k]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let xs = axis(0);
    let ys = axis(1);
    let bad = |reason: &str| Error::parse("sampled field", "csv", reason.to_string());
    if xs.len() < 2 || ys.len() < 2 || xs.len() * ys.len() != rows.len() {
        return Err(bad("rows must form a complete grid of at least 2x2 nodes"));
    }
    let h = xs[1] - xs[0];
    let regular = |v: &[f64]| v.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.max(1.0));
    if !regular(&xs) || !regular(&ys) {
        return Err(bad("grid spacing must be uniform and equal on both axes"));
    }
    let (nx, ny) = (xs.len(), ys.len());
    let mut values = vec![[f64::NAN; 2]; nx * ny];
    for r in rows {
        let i = ((r[0] - xs[0]) / h).round() as usize;
        let j = ((r[1] - ys[0]) / h).round() as usize;
        values[j * nx + i] = [r[2], r[3]];
    }
    if values.iter().any(|v| v[0].is_nan()) {
        return Err(bad("duplicate grid nodes"));
    }
    Ok(SampledGrid {
        origin: [xs[0], ys[0]],
        h,
        nx,
        ny,
        values,
    })
}

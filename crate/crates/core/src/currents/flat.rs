use std::f64::consts::PI;

use super::AtomicCurrent;
use crate::error::{Error, Result};
use crate::fields::{Domain, Shape2};

/// Largest `|degree|` expanded into unit charges.
pub const MAX_DEGREE: u32 = 20;

/// Which operand of `a - b` an atom belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Atom {
        side: Side,
        index: usize,
        position: [f64; 2],
    },
    Boundary([f64; 2]),
}

/// One unit of transported charge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanEntry {
    pub side: Side,
    pub index: usize,
    pub position: [f64; 2],
    pub target: Target,
    /// Always `pi`: one unit of degree.
    pub mass: f64,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatNormResult {
    pub value: f64,
    pub plan: Vec<PlanEntry>,
}

#[derive(Debug, Clone, Copy)]
struct Charge {
    side: Side,
    index: usize,
    position: [f64; 2],
}

fn planar(u: &Domain) -> Result<&Shape2> {
    match u {
        Domain::Planar(s) => Ok(s),
        Domain::Product2D { .. } => Err(Error::Dimension("flat norms are computed for planar domains".into())),
    }
}

/// Length of the shortest path from `a` to `b` in the closure of the shape.
///
/// In an annulus a blocked segment is replaced by two tangents and an arc of the inner circle.
pub fn geodesic_distance(shape: &Shape2, a: [f64; 2], b: [f64; 2]) -> f64 {
    let straight = (a[0] - b[0]).hypot(a[1] - b[1]);
    let Shape2::Annulus { center, inner, .. } = *shape else {
        return straight;
    };
    if shape.segment_inside(a, b) {
        return straight;
    }
    let pa = [a[0] - center[0], a[1] - center[1]];
    let pb = [b[0] - center[0], b[1] - center[1]];
    let (ra, rb) = (pa[0].hypot(pa[1]).max(inner), pb[0].hypot(pb[1]).max(inner));
    let phi = (pa[0] * pb[1] - pa[1] * pb[0])
        .atan2(pa[0] * pb[0] + pa[1] * pb[1])
        .abs();
    let (ta, tb) = ((ra * ra - inner * inner).sqrt(), (rb * rb - inner * inner).sqrt());
    let arc = (phi - (inner / ra).acos() - (inner / rb).acos()).max(0.0);
    ta + tb + inner * arc
}

/// The point of the boundary nearest to `p`, for `p` in the closure.
pub fn nearest_boundary_point(shape: &Shape2, p: [f64; 2]) -> [f64; 2] {
    let radial = |c: [f64; 2], r: f64| {
        let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
        let n = dx.hypot(dy);
        if n == 0.0 {
            [c[0] + r, c[1]]
        } else {
            [c[0] + r * dx / n, c[1] + r * dy / n]
        }
    };
    match *shape {
        Shape2::Ball { center, radius } => radial(center, radius),
        Shape2::Annulus { center, inner, outer } => {
            let r = (p[0] - center[0]).hypot(p[1] - center[1]);
            radial(center, if r - inner <= outer - r { inner } else { outer })
        }
        Shape2::Rectangle { lo, hi } => {
            let gaps = [p[0] - lo[0], hi[0] - p[0], p[1] - lo[1], hi[1] - p[1]];
            let k = (0..4).fold(0, |m, k| if gaps[k] < gaps[m] { k } else { m });
            match k {
                0 => [lo[0], p[1]],
                1 => [hi[0], p[1]],
                2 => [p[0], lo[1]],
                _ => [p[0], hi[1]],
            }
        }
    }
}

/// `F_U(a - b)` for atomic currents with weight `pi` per unit degree.
///
/// Unit charges of `a - b` are matched positive to negative along shortest
/// paths in `U`, or sent to the nearest boundary point; the assignment is
/// solved exactly by the Hungarian method.
pub fn flat_norm(a: &AtomicCurrent, b: &AtomicCurrent, u: &Domain) -> Result<FlatNormResult> {
    let shape = planar(u)?;
    a.check_inside(u)?;
    b.check_inside(u)?;
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (side, cur, sign) in [(Side::A, a, 1), (Side::B, b, -1)] {
        for (index, atom) in cur.atoms().iter().enumerate() {
            let n = atom.degree.unsigned_abs();
            if n > MAX_DEGREE {
                return Err(Error::InvalidParameter(format!(
                    "|degree| {n} at {:?} exceeds {MAX_DEGREE}",
                    atom.position
                )));
            }
            let c = Charge {
                side,
                index,
                position: atom.position,
            };
            let list = if atom.degree * sign > 0 { &mut pos } else { &mut neg };
            list.extend(std::iter::repeat_n(c, n as usize));
        }
    }
    let (p, q) = (pos.len(), neg.len());
    let n = p + q;
    let bd = |c: &Charge| u.unchecked_boundary_distance(&c.position);
    // Rows: positive charges, then boundary slots for negative charges.
    // Columns: negative charges, then boundary slots for positive charges.
    let forbidden = 1e12;
    let mut cost = vec![vec![0.0; n]; n];
    for i in 0..p {
        for j in 0..q {
            cost[i][j] = geodesic_distance(shape, pos[i].position, neg[j].position);
        }
        for k in 0..p {
            cost[i][q + k] = if k == i { bd(&pos[i]) } else { forbidden };
        }
    }
    for k in 0..q {
        for j in 0..q {
            cost[p + k][j] = if k == j { bd(&neg[j]) } else { forbidden };
        }
    }
    let assign = hungarian(&cost);

    let mut plan = Vec::new();
    for (row, &col) in assign.iter().enumerate() {
        let (src, target, length) = if row < p && col < q {
            let t = neg[col];
            (
                pos[row],
                Target::Atom {
                    side: t.side,
                    index: t.index,
                    position: t.position,
                },
                cost[row][col],
            )
        } else if row < p {
            let s = pos[row];
            (
                s,
                Target::Boundary(nearest_boundary_point(shape, s.position)),
                cost[row][col],
            )
        } else if col < q {
            let s = neg[col];
            (
                s,
                Target::Boundary(nearest_boundary_point(shape, s.position)),
                cost[row][col],
            )
        } else {
            continue;
        };
        plan.push(PlanEntry {
            side: src.side,
            index: src.index,
            position: src.position,
            target,
            mass: PI,
            length,
        });
    }
    let value = plan.iter().map(|e| e.mass * e.length).sum();
    Ok(FlatNormResult { value, plan })
}

/// Minimum-cost perfect assignment; returns the column of each row.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    // Potentials and matching with a sentinel column 0.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut row_of = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0; n];
    for j in 1..=n {
        col_of[row_of[j] - 1] = j - 1;
    }
    col_of
}

use std::collections::VecDeque;
use std::f64::consts::PI;

use super::flat::geodesic_distance;
use super::{AtomicCurrent, JacobianMeasure};
use crate::error::{Error, Result};
use crate::fields::{Atom, Domain};

/// Cells lighter than this fraction of `pi` never seed or join a cluster.
pub const CANDIDATE_FLOOR: f64 = 0.01;
/// Same-sign candidate cells within this Chebyshev index distance are merged.
pub const MERGE_RADIUS: i64 = 2;

/// A group of same-sign cells carrying (close to) an integer multiple of `pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Positions in [`JacobianMeasure::cells`].
    pub cells: Vec<usize>,
    pub mass: f64,
    /// `|mass|`-weighted centroid of the cluster's simplices.
    pub centroid: [f64; 2],
    pub degree: i32,
    /// Whether `mass` is within `pi / 4` of `pi * degree`.
    pub quantized: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub current: AtomicCurrent,
    /// Accepted clusters, in the order of their atoms.
    pub clusters: Vec<Cluster>,
    /// Total variation of the simplices outside accepted clusters.
    pub residual_mass: f64,
    /// Some accepted cluster is not quantized.
    pub non_quantized: bool,
    /// Candidate clusters rejected for carrying too little mass.
    pub rejected: usize,
}

/// Groups heavy cells into clusters and keeps those above `threshold * pi`
/// as atoms of degree `round(mass / pi)`.
pub fn extract_vortices(jm: &JacobianMeasure, threshold: f64) -> Result<Extraction> {
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(Error::InvalidParameter(format!("cluster threshold {threshold}")));
    }
    let floor = CANDIDATE_FLOOR * PI;
    let heavy: Vec<bool> = jm.cells.iter().map(|c| c.mass.abs() > floor).collect();
    let mut seen = vec![false; jm.cells.len()];
    let mut clusters = Vec::new();
    let mut rejected = 0;
    let mut in_cluster = vec![false; jm.cells.len()];
    for start in 0..jm.cells.len() {
        if !heavy[start] || seen[start] {
            continue;
        }
        let sign = jm.cells[start].mass.signum();
        let mut members = vec![start];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let c = jm.cells[i].cell;
            for dj in -MERGE_RADIUS..=MERGE_RADIUS {
                for di in -MERGE_RADIUS..=MERGE_RADIUS {
                    let Some(k) = jm.find([c[0] + di, c[1] + dj, 0]) else {
                        continue;
                    };
                    if heavy[k] && !seen[k] && jm.cells[k].mass.signum() == sign {
                        seen[k] = true;
                        members.push(k);
                        queue.push_back(k);
                    }
                }
            }
        }
        members.sort_unstable();
        let mass: f64 = members.iter().map(|&i| jm.cells[i].mass).sum();
        let degree = (mass / PI).round() as i32;
        if mass.abs() <= threshold * PI || degree == 0 {
            rejected += 1;
            continue;
        }
        let (mut w, mut cx, mut cy) = (0.0, 0.0, 0.0);
        for &i in &members {
            in_cluster[i] = true;
            for s in jm.simplices_of(i) {
                let a = s.mass.abs();
                w += a;
                cx += a * s.centroid[0];
                cy += a * s.centroid[1];
            }
        }
        clusters.push(Cluster {
            cells: members,
            mass,
            centroid: [cx / w, cy / w],
            degree,
            quantized: (mass - PI * degree as f64).abs() <= 0.25 * PI,
        });
    }
    let residual_mass = jm
        .simplices
        .iter()
        .filter(|s| !in_cluster[s.cell])
        .map(|s| s.mass.abs())
        .sum();
    let current = AtomicCurrent::new(
        clusters
            .iter()
            .map(|c| Atom {
                position: c.centroid,
                degree: c.degree,
            })
            .collect(),
    )?;
    Ok(Extraction {
        non_quantized: clusters.iter().any(|c| !c.quantized),
        current,
        clusters,
        residual_mass,
        rejected,
    })
}

/// Atoms of `ext` inside `u` and a bound `B` with
/// `F_U(J - pi * atoms) <= B`, where `J` is the Jacobian measure restricted to `u`.
///
/// Simplices cut by the boundary of `u` are sent there directly. The other
/// simplex masses are collapsed to their centroids and then to the center of
/// their cell; each cell mass is carried to its cluster's atom, to a nearer
/// same-sign atom, or to the boundary. Finally each atom's surplus over
/// `pi * degree` goes to the boundary.
pub fn residual_bound(jm: &JacobianMeasure, ext: &Extraction, u: &Domain) -> Result<(AtomicCurrent, f64)> {
    let shape = match u {
        Domain::Planar(s) => s,
        Domain::Product2D { .. } => return Err(Error::Dimension("residual bounds are planar".into())),
    };
    let mut owner = vec![usize::MAX; jm.cells.len()];
    let active: Vec<usize> = (0..ext.clusters.len())
        .filter(|&k| u.contains(&ext.clusters[k].centroid))
        .collect();
    for (slot, &k) in active.iter().enumerate() {
        for &i in &ext.clusters[k].cells {
            owner[i] = slot;
        }
    }
    let atoms: Vec<Atom> = active
        .iter()
        .map(|&k| Atom {
            position: ext.clusters[k].centroid,
            degree: ext.clusters[k].degree,
        })
        .collect();
    let dist = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
    let mut received = vec![0.0; atoms.len()];
    let mut bound = 0.0;
    for (i, cell) in jm.cells.iter().enumerate() {
        let ctr = cell.center;
        let mut mass = 0.0;
        for s in jm.simplices_of(i) {
            if s.mass == 0.0 {
                continue;
            }
            let m = s.mass.abs();
            let inside = s.vertices.iter().filter(|v| u.contains(&v[..])).count();
            if inside == 0 && u.outside_distance(&s.centroid) > s.radius {
                continue;
            }
            let edges_ok = (0..3).all(|k| shape.segment_inside(s.vertices[k], s.vertices[(k + 1) % 3]));
            if inside < 3 || !edges_ok {
                bound += m * s.diameter;
                continue;
            }
            bound += m * (s.radius + dist(s.centroid, ctr));
            mass += s.mass;
        }
        if mass == 0.0 {
            continue;
        }
        let to_boundary = u.unchecked_boundary_distance(&ctr);
        let route = match owner[i] {
            usize::MAX => atoms
                .iter()
                .enumerate()
                .filter(|(_, a)| (a.degree as f64).signum() == mass.signum())
                .map(|(j, a)| (j, geodesic_distance(shape, ctr, a.position)))
                .filter(|&(_, l)| l < to_boundary)
                .min_by(|x, y| x.1.total_cmp(&y.1)),
            j => Some((j, geodesic_distance(shape, ctr, atoms[j].position))),
        };
        match route {
            Some((j, l)) => {
                bound += mass.abs() * l;
                received[j] += mass;
            }
            None => bound += mass.abs() * to_boundary,
        }
    }
    for (a, r) in atoms.iter().zip(&received) {
        bound += (r - PI * a.degree as f64).abs() * u.unchecked_boundary_distance(&a.position);
    }
    Ok((AtomicCurrent::new(atoms)?, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::currents::jacobian_measure;
    use crate::fields::Field;
    use crate::lattice::discretize;

    fn square() -> Domain {
        Domain::rectangle([-1.0, -1.0], [1.0, 1.0]).unwrap()
    }

    #[test]
    fn single_vortex_is_one_atom() {
        let eps = 1.0 / 64.0;
        let lf = discretize(&Field::single_vortex([0.0, 0.0], 1), &square(), eps).unwrap();
        let jm = jacobian_measure(&lf).unwrap();
        let ext = extract_vortices(&jm, 0.5).unwrap();
        let a = ext.current.atoms();
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].degree, 1);
        assert!(
            a[0].position[0].hypot(a[0].position[1]) < 3.0 * eps,
            "{:?}",
            a[0].position
        );
        assert!(!ext.non_quantized);
    }

    #[test]
    fn constant_field_has_no_atoms() {
        let lf = discretize(&Field::constant([0.6, 0.8]), &square(), 0.1).unwrap();
        let ext = extract_vortices(&jacobian_measure(&lf).unwrap(), 0.5).unwrap();
        assert!(ext.current.is_empty());
        assert_eq!(ext.residual_mass, 0.0);
        let (atoms, b) = residual_bound(&jacobian_measure(&lf).unwrap(), &ext, &square()).unwrap();
        assert!(atoms.is_empty());
        assert_eq!(b, 0.0);
    }

    #[test]
    fn dipole_gives_opposite_atoms() {
        let eps = 1.0 / 64.0;
        let f = Field::vortices(vec![Atom::new(-0.2, 0.0, 1), Atom::new(0.2, 0.0, -1)], 0.0).unwrap();
        let lf = discretize(&f, &square(), eps).unwrap();
        let ext = extract_vortices(&jacobian_measure(&lf).unwrap(), 0.5).unwrap();
        let mut a = ext.current.atoms().to_vec();
        a.sort_by(|p, q| p.position[0].total_cmp(&q.position[0]));
        assert_eq!(a.iter().map(|x| x.degree).collect::<Vec<_>>(), vec![1, -1]);
        assert!((a[0].position[0] + 0.2).hypot(a[0].position[1]) < 3.0 * eps);
        assert!((a[1].position[0] - 0.2).hypot(a[1].position[1]) < 3.0 * eps);
    }

    #[test]
    fn bound_is_small_for_a_resolved_vortex() {
        let eps = 1.0 / 64.0;
        let lf = discretize(&Field::single_vortex([0.0, 0.0], 1), &square(), eps).unwrap();
        let jm = jacobian_measure(&lf).unwrap();
        let ext = extract_vortices(&jm, 0.5).unwrap();
        let u = square().shrink(0.1).unwrap();
        let (atoms, b) = residual_bound(&jm, &ext, &u).unwrap();
        assert_eq!(atoms.mass(), 1);
        assert!(b < 10.0 * eps * PI, "{b}");
    }
}

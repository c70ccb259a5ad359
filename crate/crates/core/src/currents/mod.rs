//! Jacobian measures of lattice interpolants, extraction of point vortices,
//! and flat distances between atomic currents.

mod convergence;
mod extract;
mod flat;
mod jacobian;
mod winding;

pub use convergence::{convergence_check, ConvergenceOptions, ConvergenceReport, ConvergenceRow, RowFlag};
pub use extract::{extract_vortices, residual_bound, Cluster, Extraction, CANDIDATE_FLOOR, MERGE_RADIUS};
pub use flat::{
    flat_norm, geodesic_distance, nearest_boundary_point, FlatNormResult, PlanEntry, Side, Target, MAX_DEGREE,
};
pub use jacobian::{jacobian_measure, CellMass, JacobianMeasure, SimplexMass};
pub use winding::{plaquette_degrees, winding_oracle};

use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::{Atom, Domain};

/// The measure `pi * sum_l d_l delta_{x_l}`, stored by integer degrees.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AtomicCurrent {
    atoms: Vec<Atom>,
}

impl AtomicCurrent {
    /// Rejects zero degrees and non-finite positions.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for a in &atoms {
            if a.degree == 0 {
                return Err(Error::InvalidParameter(format!(
                    "atom at {:?} has degree 0",
                    a.position
                )));
            }
            if !a.position.iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidParameter(format!("atom position {:?}", a.position)));
            }
        }
        Ok(AtomicCurrent { atoms })
    }

    pub fn empty() -> Self {
        AtomicCurrent::default()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `sum_l |d_l|`.
    pub fn mass(&self) -> u64 {
        self.atoms.iter().map(|a| a.degree.unsigned_abs() as u64).sum()
    }

    /// `sum_l d_l`.
    pub fn total_degree(&self) -> i64 {
        self.atoms.iter().map(|a| a.degree as i64).sum()
    }

    /// Fails unless every atom lies inside `dom`.
    pub fn check_inside(&self, dom: &Domain) -> Result<()> {
        match self.atoms.iter().find(|a| !dom.contains(&a.position)) {
            Some(a) => Err(Error::OutsideDomain {
                point: a.position.to_vec(),
            }),
            None => Ok(()),
        }
    }

    /// Atoms strictly inside `dom`.
    pub fn restricted(&self, dom: &Domain) -> AtomicCurrent {
        AtomicCurrent {
            atoms: self
                .atoms
                .iter()
                .filter(|a| dom.contains(&a.position))
                .copied()
                .collect(),
        }
    }

    /// Reads `x,y,degree` rows.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut rdr = csv::Reader::from_path(path).map_err(err)?;
        let mut atoms = Vec::new();
        for rec in rdr.deserialize::<(f64, f64, i32)>() {
            let (x, y, d) = rec.map_err(err)?;
            atoms.push(Atom::new(x, y, d));
        }
        AtomicCurrent::new(atoms)
    }

    /// Writes `x,y,degree` rows.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> std::result::Result<(), csv::Error> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["x", "y", "degree"])?;
        for a in &self.atoms {
            wtr.serialize((a.position[0], a.position[1], a.degree))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mass_and_validation() {
        let c = AtomicCurrent::new(vec![Atom::new(0.0, 0.0, 2), Atom::new(0.5, 0.0, -1)]).unwrap();
        assert_eq!((c.mass(), c.total_degree()), (3, 1));
        assert!(AtomicCurrent::new(vec![Atom::new(0.0, 0.0, 0)]).is_err());
        let dom = Domain::ball([0.0, 0.0], 0.4).unwrap();
        assert!(c.check_inside(&dom).is_err());
        assert_eq!(c.restricted(&dom).mass(), 2);
    }

    #[test]
    fn csv_round_trip() {
        let c = AtomicCurrent::new(vec![Atom::new(0.25, -0.125, 1), Atom::new(-0.5, 0.0, -3)]).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("atoms.csv");
        std::fs::write(&p, &buf).unwrap();
        assert_eq!(AtomicCurrent::from_csv(&p).unwrap(), c);
    }
}

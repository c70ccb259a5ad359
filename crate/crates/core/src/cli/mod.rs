//! Batch experiment runner: configuration, sweeps and report emission.

mod config;
mod report;

pub use config::{Experiment, RunConfig};
pub use report::{emit_plot, emit_table, Metadata, SweepReport, SweepRow};

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use crate::currents::{
    convergence_check, extract_vortices, flat_norm, jacobian_measure, AtomicCurrent, ConvergenceOptions,
};
use crate::energy::{bbm_linear_reference, energy, EnergySpec, GridOptions, Scaling, MAX_EVALUATIONS};
use crate::error::{Error, Result};
use crate::fields::{Domain, Field, Rule};
use crate::kernels::Kernel;
use crate::lattice::{discretize, discretize_rotated, interpolant_distances, sample, xy_energy, LatticeField};

/// Runs the configured experiment and, if `cfg.out` is set, writes
/// `report.csv` and `report.gp` there.
pub fn run_experiment(cfg: &RunConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let kernel = Kernel::parse(&cfg.kernel)?;
    let domain = Domain::parse(&cfg.domain)?;
    let field = Field::parse(&cfg.field)?;
    let ctx = Context {
        cfg,
        kernel,
        domain,
        field,
    };

    let (rows, violations) = match cfg.experiment {
        Experiment::E1 => ctx.bbm_linear()?,
        Experiment::E2 => ctx.energy_sweep(2, [0.7, 1.1])?,
        Experiment::E3 => ctx.xy_sweep()?,
        Experiment::E4 => ctx.convergence()?,
        Experiment::E5 => ctx.rotated_extraction()?,
        Experiment::E6 => ctx.energy_sweep(3, [0.6, 1.1])?,
        Experiment::E7 => ctx.interpolant_distance()?,
    };
    let report = SweepReport {
        experiment: cfg.experiment,
        rows,
        metadata: Metadata {
            config_hash: cfg.hash()?,
            seed: cfg.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        violations,
    };
    if let Some(dir) = &cfg.out {
        write_report(&report, dir)?;
    }
    Ok(report)
}

/// Writes `report.csv` and `report.gp` into `dir`, creating it if needed.
pub fn write_report(report: &SweepReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    emit_table(report, &dir.join("report.csv"))?;
    emit_plot(report, "report.csv", &dir.join("report.gp"))
}

struct Context<'a> {
    cfg: &'a RunConfig,
    kernel: Kernel,
    domain: Domain,
    field: Field,
}

type Outcome = (Vec<SweepRow>, Vec<String>);

impl Context<'_> {
    fn timed<T>(&self, f: impl FnOnce() -> Result<T>) -> Result<(T, u64)> {
        let t = Instant::now();
        let v = f()?;
        let ms = if self.cfg.record_timing {
            t.elapsed().as_millis() as u64
        } else {
            0
        };
        Ok((v, ms))
    }

    fn grid(&self) -> GridOptions {
        let mut g = GridOptions {
            grid_ratio: self.cfg.grid_ratio,
            ..GridOptions::default()
        };
        if let Some([r, a]) = self.cfg.polar {
            g.radial = r;
            g.angular = a;
        }
        g
    }

    fn mass(&self) -> Result<f64> {
        let m: u32 = self.field.atoms().iter().map(|a| a.degree.unsigned_abs()).sum();
        if m == 0 {
            return Err(Error::Config("experiment needs a vortex field".into()));
        }
        Ok(m as f64)
    }

    fn target(&self) -> Result<AtomicCurrent> {
        AtomicCurrent::new(self.field.atoms().to_vec())
    }

    /// Rejects the whole sweep before running if any row exceeds the evaluation budget.
    fn check_budget(&self) -> Result<()> {
        let g = self.grid();
        let (lo, hi) = self.domain.bounding_box();
        let area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
        for &eps in &self.cfg.eps_list {
            let h = eps / g.grid_ratio;
            let estimate = area / (h * h) * (g.radial * g.angular / 2) as f64;
            if estimate > MAX_EVALUATIONS {
                return Err(Error::Infeasible(format!(
                    "eps = {eps}: about {estimate:.3e} field evaluations (limit {MAX_EVALUATIONS:.0e})"
                )));
            }
        }
        Ok(())
    }

    fn spec(&self, eps: f64, scaling: Scaling) -> Result<EnergySpec> {
        EnergySpec::with_options(self.kernel.clone(), self.domain.clone(), eps, scaling, &self.grid())
    }

    fn bbm_linear(&self) -> Result<Outcome> {
        let a = match self.field.rule() {
            Rule::Linear { rows, cols: 2 } => [[rows[0][0], rows[0][1]], [rows[1][0], rows[1][1]]],
            _ => return Err(Error::Config("E1 needs a planar linear field".into())),
        };
        self.check_budget()?;
        let mut rows = Vec::new();
        let mut bad = Vec::new();
        for &eps in &self.cfg.eps_list {
            let reference = bbm_linear_reference(&self.kernel, a, &self.domain, eps)?;
            let (value, ms) = self.timed(|| energy(&self.spec(eps, Scaling::Bbm)?, &self.field))?;
            let row = SweepRow::new(eps, value, reference, ms);
            if !((row.ratio - 1.0).abs() <= 1e-3) {
                bad.push(format!(
                    "eps = {eps}: ratio {} differs from 1 by more than 1e-3",
                    row.ratio
                ));
            }
            rows.push(row);
        }
        Ok((rows, bad))
    }

    fn energy_sweep(&self, dim: usize, bracket: [f64; 2]) -> Result<Outcome> {
        if self.domain.dim() != dim {
            return Err(Error::Config(format!(
                "{} needs a {dim}-dimensional domain",
                self.cfg.experiment
            )));
        }
        let length = self.domain.interval().map_or(1.0, |i| i[1] - i[0]);
        let reference = self.kernel.gamma_limit_constant(dim)? * self.mass()? * length;
        self.check_budget()?;
        let mut rows = Vec::new();
        for &eps in &self.cfg.eps_list {
            let (value, ms) = self.timed(|| energy(&self.spec(eps, Scaling::Vortex)?, &self.field))?;
            rows.push(SweepRow::new(eps, value, reference, ms));
        }
        let mut bad = bracket_violations(&rows, bracket);
        bad.extend(trend_violations(&rows));
        Ok((rows, bad))
    }

    fn xy_sweep(&self) -> Result<Outcome> {
        let reference = 4.0 * PI * self.mass()?;
        let mut rows = Vec::new();
        for &eps in &self.cfg.eps_list {
            let (value, ms) = self.timed(|| {
                let lf = sample(&self.field, &self.domain, eps, [0.5, 0.5, 0.0])?;
                Ok(xy_energy(&lf, None).value)
            })?;
            rows.push(SweepRow::new(eps, value, reference, ms));
        }
        let bad = bracket_violations(&rows, [0.8, 1.2]);
        Ok((rows, bad))
    }

    fn convergence(&self) -> Result<Outcome> {
        let target = self.target()?;
        let mut rows = Vec::new();
        let mut bad = Vec::new();
        for &eps in &self.cfg.eps_list {
            let (rep, ms) = self.timed(|| {
                convergence_check(
                    &[(eps, self.field.clone())],
                    &target,
                    &self.domain,
                    &self.cfg.margins,
                    &ConvergenceOptions::default(),
                )
            })?;
            let value = rep.rows.iter().map(|r| r.flat_distance).fold(0.0, f64::max);
            for r in rep.rows.iter().filter(|r| r.flag != crate::currents::RowFlag::Ok) {
                bad.push(format!(
                    "eps = {eps}, delta = {}: {} ({})",
                    r.delta,
                    r.flat_distance,
                    r.flag.as_str()
                ));
            }
            rows.push(SweepRow::new(eps, value, 10.0 * eps * PI, ms));
        }
        Ok((rows, bad))
    }

    fn lattices(&self, eps: f64) -> Result<(LatticeField, LatticeField)> {
        let t = self.cfg.theta.to_radians();
        Ok((
            discretize(&self.field, &self.domain, eps)?,
            discretize_rotated(&self.field, &self.domain, eps, [t.cos(), t.sin()], [0.0, 0.0])?,
        ))
    }

    fn rotated_extraction(&self) -> Result<Outcome> {
        let mut rows = Vec::new();
        let mut bad = Vec::new();
        for &eps in &self.cfg.eps_list {
            let ((value, quantized), ms) = self.timed(|| {
                let (a, b) = self.lattices(eps)?;
                let ea = extract_vortices(&jacobian_measure(&a)?, 0.5)?;
                let eb = extract_vortices(&jacobian_measure(&b)?, 0.5)?;
                let d = flat_norm(
                    &ea.current.restricted(&self.domain),
                    &eb.current.restricted(&self.domain),
                    &self.domain,
                )?;
                Ok((d.value, !ea.non_quantized && !eb.non_quantized))
            })?;
            let row = SweepRow::new(eps, value, 10.0 * eps * PI, ms);
            if !(row.value <= row.reference) {
                bad.push(format!("eps = {eps}: flat distance {value} exceeds {}", row.reference));
            }
            if !quantized {
                bad.push(format!("eps = {eps}: non-quantized extraction"));
            }
            rows.push(row);
        }
        Ok((rows, bad))
    }

    fn interpolant_distance(&self) -> Result<Outcome> {
        let margin = self.cfg.margins.iter().copied().fold(0.0, f64::max);
        let u = self.domain.shrink(margin)?;
        let mut rows = Vec::new();
        let mut bad = Vec::new();
        for &eps in &self.cfg.eps_list {
            let (value, ms) = self.timed(|| {
                let (a, b) = self.lattices(eps)?;
                let r = interpolant_distances(&a, &b, &u, eps)?;
                Ok(r.l2.max(r.gradient))
            })?;
            let row = SweepRow::new(eps, value, 50.0, ms);
            if !(value <= 50.0) {
                bad.push(format!("eps = {eps}: diagnostic {value} exceeds 50"));
            }
            rows.push(row);
        }
        Ok((rows, bad))
    }
}

fn bracket_violations(rows: &[SweepRow], [lo, hi]: [f64; 2]) -> Vec<String> {
    rows.iter()
        .filter(|r| !(r.ratio >= lo && r.ratio <= hi))
        .map(|r| format!("eps = {}: ratio {} outside [{lo}, {hi}]", r.eps, r.ratio))
        .collect()
}

fn trend_violations(rows: &[SweepRow]) -> Vec<String> {
    rows.windows(2)
        .filter(|w| w[1].ratio < w[0].ratio)
        .map(|w| {
            format!(
                "ratio decreases from {} to {} between eps = {} and {}",
                w[0].ratio, w[1].ratio, w[0].eps, w[1].eps
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::parse(text).unwrap()
    }

    #[test]
    fn empty_sweep_succeeds() {
        let c = cfg("experiment = \"E2\"\ndomain = \"ball:1\"\nfield = \"vortex:0,0,1\"\neps_list = []\n");
        let r = run_experiment(&c).unwrap();
        assert!(r.rows.is_empty() && r.passed());
    }

    #[test]
    fn bbm_linear_rows_match() {
        let c = cfg("experiment = \"E1\"\ndomain = \"rect:0,0,1,1\"\nfield = \"linear:1,0,0,1\"\neps_list = [0.1]\n");
        let r = run_experiment(&c).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert!((r.rows[0].ratio - 1.0).abs() < 1e-3);
    }

    #[test]
    fn oversized_grids_are_rejected_up_front() {
        let c = cfg("experiment = \"E2\"\ndomain = \"ball:1\"\nfield = \"vortex:0,0,1\"\neps_list = [0.5, 1e-5]\n");
        assert!(matches!(run_experiment(&c), Err(Error::Infeasible(_))));
    }

    #[test]
    fn reports_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = cfg("experiment = \"E3\"\ndomain = \"ball:1\"\nfield = \"vortex:0,0,1\"\neps_list = [0.05]\n");
        c.out = Some(dir.path().to_path_buf());
        run_experiment(&c).unwrap();
        assert!(dir.path().join("report.csv").exists());
        let gp = std::fs::read_to_string(dir.path().join("report.gp")).unwrap();
        assert!(gp.contains(&c.hash().unwrap()));
    }
}

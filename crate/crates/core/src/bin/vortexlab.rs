use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use vortexlab::cli::{run_experiment, write_report, RunConfig};
use vortexlab::currents::{
    convergence_check, extract_vortices, flat_norm, jacobian_measure, AtomicCurrent, ConvergenceOptions, Side, Target,
};
use vortexlab::energy::{energy_report, EnergySpec, Scaling};
use vortexlab::fields::{Domain, Field};
use vortexlab::kernels::Kernel;
use vortexlab::lattice::{discretize, sample, sample_rotated, xy_energy};
use vortexlab::{Error, Result};

/// Nonlocal vortex energies, lattice discretizations and flat norms.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalingArg {
    Vortex,
    Bbm,
}

#[derive(Subcommand)]
enum Command {
    /// Prints `eps,value,grid_h,nodes` for one energy evaluation.
    Energy {
        #[arg(long)]
        kernel: String,
        #[arg(long)]
        domain: String,
        #[arg(long)]
        field: String,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum)]
        scaling: ScalingArg,
        #[arg(long)]
        grid_h: Option<f64>,
        /// Restricts both integration variables to this domain.
        #[arg(long)]
        local: Option<String>,
    },
    /// Prints `eps,xy_energy,bonds` for the sampled field.
    Xy {
        #[arg(long)]
        field: String,
        #[arg(long)]
        domain: String,
        #[arg(long)]
        eps: f64,
        /// Lattice direction `a,b`.
        #[arg(long, value_parser = pair)]
        xi: Option<[f64; 2]>,
        /// Lattice offset `z1,z2` in cell units.
        #[arg(long, value_parser = pair, default_value = "0,0")]
        offset: [f64; 2],
        /// Writes the lattice values as `i,j,vx,vy`.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Prints extracted vortices as `x,y,degree`.
    Detect {
        #[arg(long)]
        field: String,
        #[arg(long)]
        domain: String,
        #[arg(long)]
        eps: f64,
        /// Cluster threshold as a fraction of pi.
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
    },
    /// Prints the flat norm of `a - b` and its transport plan.
    Flatnorm {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        domain: String,
    },
    /// Prints `eps,delta,flat_distance,flag` against the field's own atoms.
    Converge {
        #[arg(long)]
        config: PathBuf,
    },
    /// Runs a configured experiment; exits with 2 if a threshold is violated.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn pair(s: &str) -> std::result::Result<[f64; 2], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("'{p}': {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match v[..] {
        [a, b] => Ok([a, b]),
        _ => Err(format!("expected two comma-separated numbers, got '{s}'")),
    }
}

fn stdout_err(source: std::io::Error) -> Error {
    Error::Io {
        path: "<stdout>".into(),
        source,
    }
}

fn csv_err(source: csv::Error) -> Error {
    Error::Csv {
        path: "<stdout>".into(),
        source,
    }
}

fn run(cmd: Command) -> Result<ExitCode> {
    let mut out = std::io::stdout().lock();
    match cmd {
        Command::Energy {
            kernel,
            domain,
            field,
            eps,
            scaling,
            grid_h,
            local,
        } => {
            let scaling = match scaling {
                ScalingArg::Vortex => Scaling::Vortex,
                ScalingArg::Bbm => Scaling::Bbm,
            };
            let mut spec = EnergySpec::new(Kernel::parse(&kernel)?, Domain::parse(&domain)?, eps, scaling)?;
            if let Some(h) = grid_h {
                spec = spec.with_grid_h(h)?;
            }
            if let Some(v) = local {
                spec = spec.with_local(Domain::parse(&v)?)?;
            }
            let r = energy_report(&spec, &Field::parse(&field)?)?;
            writeln!(out, "eps,value,grid_h,nodes").map_err(stdout_err)?;
            writeln!(out, "{eps},{},{},{}", r.value, r.grid_h, r.nodes).map_err(stdout_err)?;
        }
        Command::Xy {
            field,
            domain,
            eps,
            xi,
            offset,
            dump,
        } => {
            let (f, dom) = (Field::parse(&field)?, Domain::parse(&domain)?);
            let lf = match xi {
                Some(xi) => sample_rotated(&f, &dom, eps, xi, offset)?,
                None => sample(&f, &dom, eps, [offset[0], offset[1], 0.0])?,
            };
            if let Some(p) = dump {
                lf.write_csv(&p)?;
            }
            let r = xy_energy(&lf, None);
            writeln!(out, "eps,xy_energy,bonds").map_err(stdout_err)?;
            writeln!(out, "{eps},{},{}", r.value, r.bonds).map_err(stdout_err)?;
        }
        Command::Detect {
            field,
            domain,
            eps,
            threshold,
        } => {
            let lf = discretize(&Field::parse(&field)?, &Domain::parse(&domain)?, eps)?;
            let ext = extract_vortices(&jacobian_measure(&lf)?, threshold)?;
            if ext.non_quantized {
                eprintln!("warning: some clusters are not quantized; refine eps");
            }
            eprintln!("residual mass {}", ext.residual_mass);
            ext.current.write_csv(&mut out).map_err(csv_err)?;
        }
        Command::Flatnorm { a, b, domain } => {
            let u = Domain::parse(&domain)?;
            let r = flat_norm(&AtomicCurrent::from_csv(&a)?, &AtomicCurrent::from_csv(&b)?, &u)?;
            writeln!(out, "value,{}", r.value).map_err(stdout_err)?;
            writeln!(out, "source,index,x,y,target,tx,ty,mass,length").map_err(stdout_err)?;
            let side = |s: Side| if s == Side::A { "a" } else { "b" };
            for e in &r.plan {
                let (target, p) = match e.target {
                    Target::Atom {
                        side: s,
                        index,
                        position,
                    } => (format!("{}{index}", side(s)), position),
                    Target::Boundary(p) => ("boundary".to_string(), p),
                };
                writeln!(
                    out,
                    "{},{},{},{},{target},{},{},{},{}",
                    side(e.side),
                    e.index,
                    e.position[0],
                    e.position[1],
                    p[0],
                    p[1],
                    e.mass,
                    e.length
                )
                .map_err(stdout_err)?;
            }
        }
        Command::Converge { config } => {
            let cfg = RunConfig::load(&config)?;
            let f = Field::parse(&cfg.field)?;
            let target = AtomicCurrent::new(f.atoms().to_vec())?;
            let seq: Vec<(f64, Field)> = cfg.eps_list.iter().map(|&e| (e, f.clone())).collect();
            let rep = convergence_check(
                &seq,
                &target,
                &Domain::parse(&cfg.domain)?,
                &cfg.margins,
                &ConvergenceOptions::default(),
            )?;
            writeln!(out, "eps,delta,flat_distance,flag").map_err(stdout_err)?;
            for r in &rep.rows {
                writeln!(out, "{},{},{},{}", r.eps, r.delta, r.flat_distance, r.flag.as_str()).map_err(stdout_err)?;
            }
            if !rep.converged {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Run { config, out: dir } => {
            let mut cfg = RunConfig::load(&config)?;
            if dir.is_some() {
                cfg.out = dir;
            }
            let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
            cfg.out = None;
            let report = run_experiment(&cfg)?;
            write_report(&report, &dir)?;
            for r in &report.rows {
                eprintln!("eps = {:<10} value = {:<22} ratio = {}", r.eps, r.value, r.ratio);
            }
            if !report.passed() {
                for v in &report.violations {
                    eprintln!("FAIL {v}");
                }
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(n) = std::env::var("VORTEXLAB_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            }
            _ => {
                eprintln!("error: VORTEXLAB_THREADS must be a positive integer, got '{n}'");
                return ExitCode::FAILURE;
            }
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

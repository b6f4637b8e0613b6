//! Command-line driver: uniform convergence studies, the adaptive loop, and
//! single solves with field export.

use std::error::Error;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use oseen::adaptivity::{adaptive_loop, AdaptiveOptions};
use oseen::assembly::assemble;
use oseen::config::Config;
use oseen::error_analysis::{
    compute_errors, effectivity, estimate, fill_rates, study_csv, StudyRow,
};
use oseen::mesh::{build_lshape_mesh, build_unit_square_mesh, Triangulation};
use oseen::problem::{check_wellposedness, manufactured_case, DomainKind, ManufacturedCase};
use oseen::solver::solve;
use oseen::spaces::build_space_set_with_degree;

#[derive(Parser)]
#[command(name = "oseen", about = "Augmented mixed FEM solver for the 2D Oseen equations")]
struct Cli {
    /// Configuration file with key = value defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Rayon thread count (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Uniform refinement convergence study.
    Converge {
        #[arg(long)]
        case: Option<String>,
        #[arg(long)]
        levels: Option<usize>,
        /// CSV output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Adaptive refinement loop driven by the residual estimator.
    Adapt {
        #[arg(long)]
        case: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Export the mesh and fields of every step as VTK into this directory.
        #[arg(long)]
        export_fields: Option<PathBuf>,
    },
    /// Single solve on a structured mesh.
    Solve {
        #[arg(long)]
        case: Option<String>,
        /// Cells per side of the structured mesh.
        #[arg(long)]
        n: Option<usize>,
        /// VTK output path for the computed fields.
        #[arg(long)]
        export_fields: Option<PathBuf>,
    },
}

fn initial_mesh(case: &ManufacturedCase, n: usize) -> Triangulation {
    match case.domain {
        DomainKind::UnitSquare => build_unit_square_mesh(n),
        DomainKind::LShape => build_lshape_mesh(n),
    }
}

fn load_case(cfg: &Config) -> Result<ManufacturedCase, Box<dyn Error>> {
    let mut case = manufactured_case(&cfg.case)?;
    if let Some(k1) = cfg.kappa1 {
        case.data.kappa1 = k1;
    }
    if let Some(k2) = cfg.kappa2 {
        case.data.kappa2 = k2;
    }
    Ok(case)
}

fn print_hypotheses(case: &ManufacturedCase) {
    let rep = check_wellposedness(&case.data, case.domain, true);
    eprintln!(
        "case {}: nu in [{:.4e}, {:.4e}], |grad nu|_inf = {:.4e}",
        case.name, rep.nu0_sampled, rep.nu1_sampled, rep.grad_nu_inf
    );
    eprintln!(
        "  sigma nu0 > 9 |grad nu|^2: {}   kappa1 = (2/3) nu0: {}   kappa2 > nu0/3: {}",
        pass(rep.viscosity_condition),
        pass(rep.kappa1_matches),
        pass(rep.kappa2_valid)
    );
    if rep.all_pass() {
        eprintln!("  ellipticity constant alpha = {:.4e}", rep.alpha);
    } else {
        eprintln!("  sufficient conditions not met; continuing anyway");
    }
}

fn pass(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "FAIL"
    }
}

fn emit(csv: String, out: Option<PathBuf>) -> Result<(), Box<dyn Error>> {
    match out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn run_converge(cfg: &Config, out: Option<PathBuf>) -> Result<(), Box<dyn Error>> {
    let case = load_case(cfg)?;
    print_hypotheses(&case);
    let family = cfg.element_family();
    let mut rows = Vec::new();
    for level in 0..cfg.levels {
        let mesh = initial_mesh(&case, cfg.initial_n << level);
        let spaces = build_space_set_with_degree(&mesh, family, cfg.quadrature_degree)?;
        let system = assemble(&spaces, &case.data)?;
        let triple = solve(&system)?;
        let errors = compute_errors(
            &spaces,
            &triple,
            &case.exact_velocity,
            &case.exact_vorticity,
            &case.exact_pressure,
        );
        let est = estimate(&spaces, &triple, &case.data);
        eprintln!(
            "level {level}: h = {:.4e}, N = {}, residual = {:.2e}",
            mesh.mesh_size(),
            spaces.total_dim(),
            triple.diagnostics.relative_residual
        );
        rows.push(StudyRow {
            level,
            h_or_n: mesh.mesh_size(),
            errors,
            rates: [None; 3],
            theta: Some(est.total),
            effectivity: Some(effectivity(&errors, est.total)),
        });
    }
    fill_rates(&mut rows, false);
    emit(study_csv(&rows), out)
}

fn run_adapt(
    cfg: &Config,
    out: Option<PathBuf>,
    export: Option<PathBuf>,
) -> Result<(), Box<dyn Error>> {
    let case = load_case(cfg)?;
    print_hypotheses(&case);
    let options = AdaptiveOptions {
        max_steps: cfg.max_steps,
        theta_tol: cfg.theta_tol,
        export_dir: export,
    };
    let steps = adaptive_loop(&case, cfg.element_family(), initial_mesh(&case, cfg.initial_n), &options)?;
    let mut rows: Vec<StudyRow> = steps
        .iter()
        .map(|s| StudyRow {
            level: s.level,
            h_or_n: s.unknowns as f64,
            errors: s.errors,
            rates: [None; 3],
            theta: Some(s.theta),
            effectivity: Some(s.effectivity),
        })
        .collect();
    fill_rates(&mut rows, true);
    emit(study_csv(&rows), out)
}

fn run_solve(
    cfg: &Config,
    n: usize,
    export: Option<PathBuf>,
) -> Result<(), Box<dyn Error>> {
    let case = load_case(cfg)?;
    print_hypotheses(&case);
    let mesh = initial_mesh(&case, n);
    let spaces = build_space_set_with_degree(&mesh, cfg.element_family(), cfg.quadrature_degree)?;
    let system = assemble(&spaces, &case.data)?;
    let triple = solve(&system)?;
    let errors = compute_errors(
        &spaces,
        &triple,
        &case.exact_velocity,
        &case.exact_vorticity,
        &case.exact_pressure,
    );
    let est = estimate(&spaces, &triple, &case.data);
    println!("unknowns: {}", spaces.total_dim());
    println!("relative residual: {:.3e}", triple.diagnostics.relative_residual);
    println!("e(u) = {:.4e}  e(omega) = {:.4e}  e(p) = {:.4e}", errors.velocity, errors.vorticity, errors.pressure);
    println!("theta = {:.4e}  effectivity = {:.3}", est.total, effectivity(&errors, est.total));
    if let Some(path) = export {
        let nv = mesh.num_vertices();
        let speed: Vec<f64> = (0..nv)
            .map(|v| triple.velocity[2 * v].hypot(triple.velocity[2 * v + 1]))
            .collect();
        let pressure: Vec<f64> = triple.pressure[..nv].to_vec();
        let s = mesh.vtk_string(&[("speed", 1, &speed), ("pressure", 1, &pressure)]);
        std::fs::write(path, s)?;
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Converge { case, levels, out } => {
            if let Some(c) = case {
                cfg.case = c;
            }
            if let Some(l) = levels {
                cfg.levels = l;
            }
            run_converge(&cfg, out)
        }
        Command::Adapt { case, steps, out, export_fields } => {
            if let Some(c) = case {
                cfg.case = c;
            }
            if let Some(s) = steps {
                cfg.max_steps = s;
            }
            run_adapt(&cfg, out, export_fields)
        }
        Command::Solve { case, n, export_fields } => {
            if let Some(c) = case {
                cfg.case = c;
            }
            let n = n.unwrap_or(cfg.initial_n);
            run_solve(&cfg, n, export_fields)
        }
    }
}

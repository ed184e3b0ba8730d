//! `philab` command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage or validation errors, 2 when a
//! solver or eigenvalue iteration does not converge.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use philab_core::capacity::{CapacityError, CapacityProblem, CapacityResult};
use philab_core::gamma::{
    estimate_lambda_variational, run_experiment_detailed, EigenOptions, ExperimentConfig,
    GammaError, HypothesisVerdict, DIMENSION,
};
use philab_core::geometry::{
    generate_sequence, hausdorff_complement_distance, parse_domain, triangulate, write_sequence,
    DomainMask, DomainSequenceSpec, Grid,
};
use philab_core::solver::{parse_source, solve, Problem, SolveError, SolveOptions, Source};
use philab_core::young::{log_grid, morrey_integral, parse_young, verify_growth, YoungFunction};

// stdout writes that ignore a closed pipe
macro_rules! emit {
    ($($t:tt)*) => {{
        let _ = write!(std::io::stdout().lock(), $($t)*);
    }};
}

macro_rules! emitln {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PHILAB_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "philab",
    version,
    about = "Dirichlet phi-Laplacian experiments"
)]
struct Cli {
    /// Output directory [default: $PHILAB_OUT_DIR, else the current directory]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Measure growth indices and sample the Young-function inequalities.
    YoungCheck {
        #[arg(long)]
        young: String,
        /// Points of the logarithmic sample grid on [1e-4, 1e4].
        #[arg(long, default_value_t = 401)]
        samples: usize,
    },
    /// Solve the Dirichlet problem on one domain.
    Solve {
        #[arg(long)]
        young: String,
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long, default_value = "const:1")]
        f: String,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Relative or Sobolev capacity of an obstacle.
    Capacity {
        #[arg(long)]
        young: String,
        /// Obstacle shape, or a mask file with `--obstacle-mask`.
        #[arg(long, conflicts_with = "obstacle_mask")]
        obstacle: Option<String>,
        #[arg(long)]
        obstacle_mask: Option<PathBuf>,
        /// Environment shape; defaults to the whole box.
        #[arg(long, conflicts_with = "environment_mask")]
        environment: Option<String>,
        #[arg(long)]
        environment_mask: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Mode::Relative)]
        mode: Mode,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Hausdorff distance between domain complements, for two domains or
    /// along a generated sequence.
    Hausdorff {
        #[arg(long, requires = "b", conflicts_with = "sequence")]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
        /// Sequence kind; members are compared with its limit.
        #[arg(long, requires = "k")]
        sequence: Option<String>,
        #[arg(long, value_delimiter = ',')]
        k: Vec<u32>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Run a domain-perturbation experiment from a JSON config.
    Gamma {
        #[arg(long)]
        config: PathBuf,
    },
    /// Variational eigenvalue of the domain.
    Eigen {
        #[arg(long)]
        young: String,
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 2000)]
        max_iterations: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Relative,
    Sobolev,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Cells per side.
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// Design box `x0,y0,x1,y1`.
    #[arg(long = "box", default_value = "-1,-1,1,1", allow_hyphen_values = true, value_parser = parse_box)]
    bbox: [f64; 4],
}

impl GridArgs {
    fn grid(&self) -> Result<Grid> {
        Ok(Grid::square(self.n, self.bbox)?)
    }
}

#[derive(Debug, Args)]
struct DomainArgs {
    /// Domain shape (`disk`, `rect:...`, `polygon:k`, `bump:k`, ...).
    #[arg(long, conflicts_with = "mask")]
    domain: Option<String>,
    /// Domain mask file.
    #[arg(long)]
    mask: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
}

impl DomainArgs {
    fn mask(&self) -> Result<DomainMask> {
        match (&self.domain, &self.mask) {
            (_, Some(path)) => Ok(DomainMask::read(path)?),
            (Some(spec), None) => Ok(parse_domain(spec, self.grid.grid()?)?),
            (None, None) => bail!("one of --domain or --mask is required"),
        }
    }
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long)]
    grad_regularization: Option<f64>,
    #[arg(long)]
    tol_energy: Option<f64>,
    #[arg(long)]
    tol_residual: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
}

impl SolverArgs {
    fn options(&self) -> Result<SolveOptions> {
        let d = SolveOptions::default();
        let o = SolveOptions {
            grad_regularization: self.grad_regularization.unwrap_or(d.grad_regularization),
            tol_energy: self.tol_energy.unwrap_or(d.tol_energy),
            tol_residual: self.tol_residual.unwrap_or(d.tol_residual),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
        };
        o.validate()?;
        Ok(o)
    }
}

fn parse_box(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    match v.as_slice() {
        [x0, y0, x1, y1] if x0 < x1 && y0 < y1 => Ok([*x0, *y0, *x1, *y1]),
        _ => Err(format!(
            "expected x0,y0,x1,y1 with x0 < x1 and y0 < y1, got {s:?}"
        )),
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &anyhow::Error) -> i32 {
    let not_converged = |s: &SolveError| matches!(s, SolveError::NotConverged { .. });
    for cause in e.chain() {
        if let Some(s) = cause.downcast_ref::<SolveError>() {
            if not_converged(s) {
                return 2;
            }
        }
        if let Some(c) = cause.downcast_ref::<CapacityError>() {
            if matches!(c, CapacityError::Solve(s) if not_converged(s)) {
                return 2;
            }
        }
        if let Some(g) = cause.downcast_ref::<GammaError>() {
            match g {
                GammaError::EigenNotConverged { .. } => return 2,
                GammaError::Solve { source, .. } if not_converged(source) => return 2,
                GammaError::Capacity(CapacityError::Solve(s)) if not_converged(s) => return 2,
                _ => {}
            }
        }
    }
    1
}

fn out_dir(flag: Option<PathBuf>, config: Option<PathBuf>) -> Result<PathBuf> {
    let dir = flag
        .or(config)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn young(spec: &str) -> Result<YoungFunction> {
    Ok(parse_young(spec)?)
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::YoungCheck { young: y, samples } => young_check(&young(&y)?, samples),
        Command::Solve {
            young: y,
            domain,
            f,
            solver,
        } => {
            let y = young(&y)?;
            let mask = domain.mask()?;
            let f = parse_source(&f)?;
            let opts = solver.options()?;
            run_solve(&y, &mask, &f, &opts, &out_dir(cli.out, None)?)
        }
        Command::Capacity {
            young: y,
            obstacle,
            obstacle_mask,
            environment,
            environment_mask,
            mode,
            grid,
            solver,
        } => {
            let y = young(&y)?;
            let opts = solver.options()?;
            let obstacle = match (obstacle, obstacle_mask) {
                (_, Some(p)) => DomainMask::read(&p)?,
                (Some(s), None) => parse_domain(&s, grid.grid()?)?,
                (None, None) => bail!("one of --obstacle or --obstacle-mask is required"),
            };
            let g = *obstacle.grid();
            let environment = match (environment, environment_mask) {
                (_, Some(p)) => DomainMask::read(&p)?,
                (Some(s), None) => parse_domain(&s, g)?,
                (None, None) => DomainMask::full(g),
            };
            let problem = match mode {
                Mode::Relative => CapacityProblem::relative(obstacle, environment, y),
                Mode::Sobolev => CapacityProblem::sobolev(obstacle, environment, y),
            };
            run_capacity(&problem, &opts, &out_dir(cli.out, None)?)
        }
        Command::Hausdorff {
            a,
            b,
            sequence,
            k,
            grid,
        } => {
            let dir = out_dir(cli.out, None)?;
            match (a, b, sequence) {
                (Some(a), Some(b), None) => {
                    let g = grid.grid()?;
                    let (ma, mb) = (parse_domain(&a, g)?, parse_domain(&b, g)?);
                    let d = hausdorff_complement_distance(&ma, &mb)?;
                    let line = format!("d_Hc {d:?}\n");
                    emit!("{line}");
                    write(&dir, "hausdorff.txt", &line)?;
                    write(&dir, "a.mask", &ma.to_text())?;
                    write(&dir, "b.mask", &mb.to_text())?;
                    Ok(())
                }
                (None, None, Some(kind)) => {
                    let spec = DomainSequenceSpec::new(&kind, k, grid.n).with_box(grid.bbox);
                    let seq = generate_sequence(&spec)?;
                    write_sequence(&seq, &dir)?;
                    write(&dir, &format!("{kind}_limit.mask"), &seq.limit.to_text())?;
                    let mut table = String::from("k,d_Hc\n");
                    for (k, m) in seq.k_values.iter().zip(&seq.masks) {
                        let d = hausdorff_complement_distance(m, &seq.limit)?;
                        table.push_str(&format!("{k},{d:?}\n"));
                    }
                    emit!("{table}");
                    write(&dir, "hausdorff.csv", &table)?;
                    Ok(())
                }
                _ => bail!("give either --a and --b, or --sequence with --k"),
            }
        }
        Command::Gamma { config } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let cfg = ExperimentConfig::from_json(&text)?;
            let dir = out_dir(cli.out, cfg.output_dir.clone())?;
            run_gamma(&cfg, &dir)
        }
        Command::Eigen {
            young: y,
            domain,
            mu,
            max_iterations,
        } => {
            let y = young(&y)?;
            let mask = domain.mask()?;
            let opts = EigenOptions {
                max_iterations,
                ..EigenOptions::default()
            };
            run_eigen(&y, &mask, mu, &opts, &out_dir(cli.out, None)?)
        }
    }
}

fn young_check(y: &YoungFunction, samples: usize) -> Result<()> {
    let report = verify_growth(y, &log_grid(1e-4, 1e4, samples))?;
    emitln!("young {}", y.describe());
    emitln!("{report}");

    // pairwise inequality samples on a coarser grid
    let g = y.indices();
    let pts = log_grid(1e-2, 1e2, 41);
    let (mut young_ineq, mut dilation, mut doubling, mut pairs) = (0, 0, 0, 0);
    for &a in &pts {
        for &b in &pts {
            pairs += 1;
            if a * b > (y.big_phi(a) + y.conjugate(b)?) * (1.0 + 1e-6) {
                young_ineq += 1;
            }
            let (lo, hi) = (a.powf(g.p_minus + 1.0), a.powf(g.p_plus + 1.0));
            let v = y.big_phi(a * b);
            if v < lo.min(hi) * y.big_phi(b) * (1.0 - 1e-6)
                || v > lo.max(hi) * y.big_phi(b) * (1.0 + 1e-6)
            {
                dilation += 1;
            }
            if y.big_phi(a + b)
                > 2f64.powf(g.p_plus + 1.0) * (y.big_phi(a) + y.big_phi(b)) * (1.0 + 1e-6)
            {
                doubling += 1;
            }
        }
    }
    emitln!("sample_pairs {pairs}");
    emitln!("young_inequality_violations {young_ineq}");
    emitln!("dilation_violations {dilation}");
    emitln!("doubling_violations {doubling}");
    for n in [2, 3] {
        emitln!("morrey_n{n} {}", morrey_integral(y, n)?);
    }
    Ok(())
}

fn run_solve(
    y: &YoungFunction,
    mask: &DomainMask,
    f: &Source,
    opts: &SolveOptions,
    dir: &Path,
) -> Result<()> {
    let mesh = Arc::new(triangulate(mask)?);
    let problem = Problem::new(y.clone(), mesh.clone(), f.nodal(&mesh))?;
    write(dir, "domain.mask", &mask.to_text())?;
    let (field, report, err) = match solve(&problem, opts) {
        Ok((field, report)) => (field, report, None),
        Err(SolveError::NotConverged { field, report }) => {
            let e = SolveError::NotConverged {
                field: field.clone(),
                report: report.clone(),
            };
            (*field, report, Some(e))
        }
        Err(e) => return Err(e.into()),
    };
    write(dir, "solution.field", &field.to_text())?;
    write(dir, "convergence.txt", &report.to_string())?;
    emit!("{report}");
    emitln!("max {:?}", field.max());
    match err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn run_capacity(problem: &CapacityProblem, opts: &SolveOptions, dir: &Path) -> Result<()> {
    write(dir, "obstacle.mask", &problem.obstacle.to_text())?;
    write(dir, "environment.mask", &problem.environment.to_text())?;
    let r = problem.solve(opts)?;
    if let Some(u) = &r.potential {
        write(dir, "potential.field", &u.to_text())?;
    }
    let line = CapacityResult {
        potential: None,
        ..r
    }
    .to_string();
    emitln!("{line}");
    write(dir, "capacity.txt", &format!("{line}\n"))?;
    Ok(())
}

fn run_gamma(cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    let y = cfg.young_function()?;
    let f = cfg.source()?;
    let opts = cfg.solve_options()?;
    let spec = cfg.sequence_spec();
    write(dir, "config.json", &cfg.to_json())?;
    let run = match run_experiment_detailed(&spec, None, &y, &f, &opts) {
        Ok(run) => run,
        Err(e) => {
            if let GammaError::Solve { partial, .. } = &e {
                write(dir, "gamma_report.partial.csv", &partial.to_csv())?;
            }
            return Err(e.into());
        }
    };
    let csv = run.report.to_csv();
    write(dir, "gamma_report.csv", &csv)?;
    let verdict = HypothesisVerdict::from_report(&run.report, &y, DIMENSION)?;
    write(dir, "hypotheses.txt", &verdict.to_string())?;
    if cfg.dump_fields {
        for (k, member) in spec.k_values.iter().zip(&run.members) {
            if let Some(u) = member {
                write(dir, &format!("solution_k{k}.field"), &u.to_text())?;
            }
        }
        if let Some(u) = &run.limit {
            write(dir, "solution_limit.field", &u.to_text())?;
        }
    }
    emit!("{csv}");
    emit!("{verdict}");
    Ok(())
}

fn run_eigen(
    y: &YoungFunction,
    mask: &DomainMask,
    mu: f64,
    opts: &EigenOptions,
    dir: &Path,
) -> Result<()> {
    let mesh = Arc::new(triangulate(mask)?);
    write(dir, "domain.mask", &mask.to_text())?;
    let r = estimate_lambda_variational(mesh, y, mu, opts)?;
    let line = format!(
        "lambda {:?} iterations {} residual {:?}",
        r.lambda, r.iterations, r.residual
    );
    emitln!("{line}");
    write(dir, "eigen.txt", &format!("{line}\n"))?;
    write(dir, "eigenfield.field", &r.field.to_text())?;
    Ok(())
}

/// Reads a field file written by `solve` or `eigen`.
pub fn read_field(path: &Path) -> Result<Vec<[f64; 3]>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(philab_core::solver::parse_field_text(&text)?)
}

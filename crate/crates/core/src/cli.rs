//! Command-line front end.
//!
//! Results go to `--output` or standard output. Failures print a JSON
//! object `{"error": {"kind", "message"}}` on standard error; the exit code
//! is 1 for solver failures (including non-convergence) and 2 for input
//! problems.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::abscissa::{
    abscissa_sweep, convergence_rate, worst_case_multistart, worst_case_perturbation, AbscissaOptions,
    AbscissaResult, RestartPolicy, StopNorm,
};
use crate::error::{Error, Result};
use crate::generators::{circulant, companion};
use crate::io::{delta_triplets, format_matrix_market, read_matrix_market, read_structure, resolve_data_path};
use crate::linalg::{DenseMatrix, DEFAULT_TIE_TOL};
use crate::perturbation::PerturbationStructure;
use crate::radius::{stability_radius, InitPolicy, RadiusOptions};
use crate::sampling::{sample_pseudospectrum, sampled_abscissa, write_csv};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SOLVER: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Clone, Parser)]
#[command(name = "specradius", version, about = "Structured pseudospectral abscissa and stability radius")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Worst-case perturbation and abscissa at a fixed energy.
    Abscissa {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        epsilon: f64,
        /// Random restarts on top of the zero start.
        #[arg(long, default_value_t = 0)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Lipschitz constant used by the convergence-rate diagnostic.
        #[arg(long, default_value_t = 1.0)]
        ell: f64,
    },
    /// Structured stability radius.
    Radius {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 1.0)]
        eps0: f64,
        #[arg(long, default_value_t = 1e-3)]
        tol_alpha: f64,
        #[arg(long, default_value_t = 0.1)]
        zeta: f64,
        #[arg(long, default_value_t = 100)]
        l_max: usize,
        #[arg(long, value_enum, default_value_t = InitArg::Zero)]
        init: InitArg,
        /// Random restarts per step for `--init multi`.
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        ell: f64,
    },
    /// Abscissa over an ε grid.
    Sweep {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 0.0)]
        eps_min: f64,
        #[arg(long)]
        eps_max: f64,
        #[arg(long, default_value_t = 0.1)]
        eps_step: f64,
        #[arg(long, value_enum, default_value_t = PolicyArg::Warm)]
        policy: PolicyArg,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Monte-Carlo eigenvalue cloud.
    Sample {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Write an example matrix in Matrix Market format.
    Generate {
        #[command(subcommand)]
        kind: Generator,
    },
}

#[derive(Debug, Clone, Subcommand)]
pub enum Generator {
    /// Companion matrix of `s^n + a₁ s^{n-1} + … + a_n`.
    Companion {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        coeffs: Vec<f64>,
    },
    /// Circulant band matrix.
    Circulant {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_negative_numbers = true)]
        diag: f64,
        #[arg(long, allow_negative_numbers = true)]
        sup: f64,
        #[arg(long, allow_negative_numbers = true)]
        sub: f64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    /// Matrix Market file, also looked up under `$SPECRADIUS_DATA_DIR`.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Structure JSON file.
    #[arg(long)]
    pub structure: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub tol_delta: f64,
    #[arg(long, default_value_t = 1000)]
    pub k_max: usize,
    #[arg(long, default_value_t = DEFAULT_TIE_TOL)]
    pub tie_tol: f64,
    /// Stop on the Frobenius instead of the spectral norm of the step.
    #[arg(long)]
    pub frobenius_stop: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Zero,
    Random,
    Warm,
    Multi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Zero,
    Warm,
    Multi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl SolverArgs {
    fn options(&self) -> Result<AbscissaOptions> {
        if !(self.tol_delta > 0.0) || !(self.tie_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        Ok(AbscissaOptions {
            tol_delta: self.tol_delta,
            k_max: self.k_max,
            tie_tol: self.tie_tol,
            stop_norm: if self.frobenius_stop {
                StopNorm::Frobenius
            } else {
                StopNorm::Spectral
            },
        })
    }
}

impl SystemArgs {
    fn load(&self) -> Result<(DenseMatrix, PerturbationStructure)> {
        let a = read_matrix_market(resolve_data_path(&self.matrix))?;
        if a.nrows() != a.ncols() {
            return Err(Error::InvalidArgument(format!("matrix is {}x{}, not square", a.nrows(), a.ncols())));
        }
        let s = read_structure(resolve_data_path(&self.structure), Some(a.nrows()))?;
        if s.n() != a.nrows() {
            return Err(Error::InvalidStructure(format!(
                "structure is for n = {}, matrix has n = {}",
                s.n(),
                a.nrows()
            )));
        }
        Ok((a, s))
    }
}

/// Output of a command: the payload, and an error to report after writing
/// it (non-convergence still produces a result).
struct Outcome {
    body: String,
    failure: Option<Error>,
}

impl Outcome {
    fn json(value: Value, converged: bool, iterations: usize) -> Self {
        Self {
            body: serde_json::to_string_pretty(&value).expect("JSON value serializes") + "\n",
            failure: (!converged).then_some(Error::MaxIterations { iterations }),
        }
    }
}

fn abscissa_json(r: &AbscissaResult, structure: &PerturbationStructure, rate: Option<f64>, ell: f64) -> Value {
    let t = r.triple();
    json!({
        "alpha": r.alpha,
        "lambda": {"re": t.lambda.re, "im": t.lambda.im},
        "theta": r.theta,
        "trace": r.trace.iter().map(|s| json!({"step": s.step, "re_lambda": s.re_lambda})).collect::<Vec<_>>(),
        "delta": delta_triplets(&r.delta, structure),
        "diagnostics": {
            "r": rate,
            "r_over_ell": rate.map(|r| r / ell),
            "iterations": r.iterations,
            "converged": r.converged,
            "warnings": r.warnings,
        },
    })
}

fn rate_for(a: &DenseMatrix, r: &AbscissaResult, structure: &PerturbationStructure, epsilon: f64, ell: f64) -> Option<f64> {
    let mut perturbed = a.clone();
    r.delta.add_to(structure, &mut perturbed);
    convergence_rate(&perturbed, r.triple(), epsilon, ell).ok()
}

fn execute(config: &RunConfig) -> Result<Outcome> {
    match &config.command {
        Command::Abscissa {
            system,
            solver,
            epsilon,
            restarts,
            seed,
            ell,
        } => {
            let opts = solver.options()?;
            if !(*epsilon >= 0.0) || !(*ell > 0.0) {
                return Err(Error::InvalidArgument("epsilon must be non-negative and ell positive".into()));
            }
            let (a, s) = system.load()?;
            let r = if *restarts == 0 {
                worst_case_perturbation(&a, *epsilon, &s, &s.zero(), &opts)?
            } else {
                worst_case_multistart(&a, *epsilon, &s, *restarts, *seed, &opts)?
            };
            let rate = rate_for(&a, &r, &s, *epsilon, *ell);
            Ok(Outcome::json(abscissa_json(&r, &s, rate, *ell), r.converged, r.iterations))
        }
        Command::Radius {
            system,
            solver,
            eps0,
            tol_alpha,
            zeta,
            l_max,
            init,
            restarts,
            seed,
            ell,
        } => {
            let opts = RadiusOptions {
                eps0: *eps0,
                tol_alpha: *tol_alpha,
                zeta: *zeta,
                l_max: *l_max,
                init: match init {
                    InitArg::Zero => InitPolicy::Zero,
                    InitArg::Random => InitPolicy::Random { seed: *seed },
                    InitArg::Warm => InitPolicy::WarmStart,
                    InitArg::Multi => InitPolicy::MultiStart {
                        restarts: *restarts,
                        seed: *seed,
                    },
                },
                abscissa: solver.options()?,
            };
            opts.validate()?;
            let (a, s) = system.load()?;
            let r = stability_radius(&a, &s, &opts)?;
            let f = &r.final_result;
            let rate = rate_for(&a, f, &s, r.radius, *ell);
            let value = json!({
                "radius": r.radius,
                "trace": r.trace.iter().map(|t| json!({
                    "epsilon": t.epsilon,
                    "alpha": t.alpha,
                    "derivative": t.derivative,
                })).collect::<Vec<_>>(),
                "delta": delta_triplets(&f.delta, &s),
                "alpha": f.alpha,
                "diagnostics": {
                    "r": rate,
                    "r_over_ell": rate.map(|r| r / ell),
                    "iterations": r.trace.len(),
                    "converged": r.converged,
                    "restarts_used": r.restarts_used,
                },
            });
            Ok(Outcome::json(value, r.converged, r.trace.len()))
        }
        Command::Sweep {
            system,
            solver,
            eps_min,
            eps_max,
            eps_step,
            policy,
            restarts,
            seed,
            format,
        } => {
            let opts = solver.options()?;
            if !(*eps_step > 0.0) || !(*eps_min >= 0.0) || !(eps_max >= eps_min) {
                return Err(Error::InvalidArgument("need 0 ≤ eps-min ≤ eps-max and eps-step > 0".into()));
            }
            let (a, s) = system.load()?;
            let count = ((eps_max - eps_min) / eps_step + 1e-9).floor() as usize + 1;
            let grid: Vec<f64> = (0..count).map(|k| eps_min + k as f64 * eps_step).collect();
            let policy = match policy {
                PolicyArg::Zero => RestartPolicy::Zero,
                PolicyArg::Warm => RestartPolicy::WarmStart,
                PolicyArg::Multi => RestartPolicy::MultiStart {
                    restarts: *restarts,
                    seed: *seed,
                },
            };
            let points = abscissa_sweep(&a, &s, &grid, policy, &opts);
            let body = match format {
                Format::Csv => {
                    let mut out = String::from("epsilon,alpha,converged,error\n");
                    for p in &points {
                        match &p.outcome {
                            Ok(r) => out.push_str(&format!("{:.16e},{:.16e},{},\n", p.epsilon, r.alpha, r.converged)),
                            Err(e) => out.push_str(&format!("{:.16e},,false,{}\n", p.epsilon, e.kind())),
                        }
                    }
                    out
                }
                Format::Json => {
                    let rows: Vec<Value> = points
                        .iter()
                        .map(|p| match &p.outcome {
                            Ok(r) => json!({"epsilon": p.epsilon, "alpha": r.alpha, "converged": r.converged}),
                            Err(e) => json!({"epsilon": p.epsilon, "error": {"kind": e.kind(), "message": e.to_string()}}),
                        })
                        .collect();
                    serde_json::to_string_pretty(&rows).expect("JSON value serializes") + "\n"
                }
            };
            Ok(Outcome { body, failure: None })
        }
        Command::Sample {
            system,
            epsilon,
            samples,
            seed,
            format,
        } => {
            if !(*epsilon >= 0.0) {
                return Err(Error::InvalidArgument("epsilon must be non-negative".into()));
            }
            let (a, s) = system.load()?;
            let cloud = sample_pseudospectrum(&a, &s, *epsilon, *samples, *seed)?;
            let body = match format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_csv(&cloud, &mut buf).expect("writing to memory");
                    String::from_utf8(buf).expect("CSV is UTF-8")
                }
                Format::Json => {
                    let value = json!({
                        "epsilon": cloud.epsilon,
                        "samples": cloud.sample_count,
                        "seed": cloud.seed,
                        "sampled_abscissa": sampled_abscissa(&cloud).ok(),
                        "points": cloud.points.iter().map(|p| json!({
                            "re": p.value.re, "im": p.value.im, "sample_index": p.sample_index,
                        })).collect::<Vec<_>>(),
                        "failures": cloud.failures.iter().map(|(k, m)| json!({"sample_index": k, "message": m})).collect::<Vec<_>>(),
                    });
                    serde_json::to_string_pretty(&value).expect("JSON value serializes") + "\n"
                }
            };
            Ok(Outcome { body, failure: None })
        }
        Command::Generate { kind } => {
            let m = match kind {
                Generator::Companion { coeffs } => companion(coeffs),
                Generator::Circulant { n, diag, sup, sub } => {
                    if *n < 2 {
                        return Err(Error::InvalidArgument("circulant needs n ≥ 2".into()));
                    }
                    circulant(*n, *diag, *sup, *sub)
                }
            };
            Ok(Outcome {
                body: format_matrix_market(&m),
                failure: None,
            })
        }
    }
}

fn write_output(path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn report(e: &Error) -> i32 {
    let value = json!({"error": {"kind": e.kind(), "message": e.to_string()}});
    eprintln!("{value}");
    if e.is_solver_error() {
        EXIT_SOLVER
    } else {
        EXIT_INPUT
    }
}

/// Runs one command and returns the process exit code.
pub fn run(config: &RunConfig) -> i32 {
    let outcome = match execute(config) {
        Ok(o) => o,
        Err(e) => return report(&e),
    };
    if let Err(e) = write_output(config.output.as_deref(), &outcome.body) {
        return report(&e);
    }
    match outcome.failure {
        Some(e) => report(&e),
        None => EXIT_OK,
    }
}

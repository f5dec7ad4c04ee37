//! Batch front-end: parse a measure config, run one computation, write CSV
//! or JSON artifacts.
//!
//! Exit codes: 0 success, 1 failed verification checks, 2 validation
//! error, 3 numeric budget exceeded. Errors are reported as one JSON object
//! on stderr.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use singfour::error::Error;
use singfour::expansion::{analyze, reconstruction_error, QuadratureSpec};
use singfour::export;
use singfour::kaczmarz::{aux_matrix, MOMENT_EPS};
use singfour::measure::{measure_from_json, Measure, MomentTable};
use singfour::transforms::nct_d;
use singfour::trig::TrigPoly;
use singfour::verify::run_suite;

#[derive(Parser)]
#[command(
    name = "singfour",
    about = "Fourier expansions in L2 of singular measures: moments, dual matrices, \
             coefficient tensors, Normalized Cauchy Transforms, classification"
)]
struct Cli {
    /// Worker threads for internal parallelism (0 = library default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Measure config JSON (path).
    #[arg(long)]
    config: PathBuf,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for any randomized sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Moment table mu_hat(n) for n = -nmax..=nmax, as CSV.
    Moments {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        nmax: usize,
    },
    /// Dual (auxiliary) coefficient matrix as CSV or JSON, plus the
    /// T A = I residual.
    Aux {
        #[command(flatten)]
        common: Common,
        /// Truncation order N (matrix order N + 1).
        #[arg(long)]
        order: usize,
        /// Emit nested-array JSON instead of CSV.
        #[arg(long)]
        json: bool,
    },
    /// Slice-singularity classification report as JSON.
    Classify {
        #[command(flatten)]
        common: Common,
    },
    /// Expansion coefficient tensor as JSON, with the Bessel defect.
    Expand {
        #[command(flatten)]
        common: Common,
        /// Function spec: inline JSON or a path to a JSON file with
        /// {"frequencies": [[..]], "coefficients": [[re, im], ..]}.
        #[arg(long)]
        f: String,
        /// Truncation orders, comma separated (one per coordinate).
        #[arg(long, value_delimiter = ',')]
        orders: Vec<usize>,
        /// Quadrature: "prefix:K" or "mc:SAMPLES".
        #[arg(long, default_value = "prefix:12")]
        quad: String,
        /// Emit the flat CSV form with index columns instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Reconstruction-error sweep table as CSV.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        f: String,
        #[arg(long, value_delimiter = ',')]
        orders: Vec<usize>,
        #[arg(long, default_value = "prefix:12")]
        quad: String,
    },
    /// Normalized Cauchy Transform evaluated on a polar polydisk grid, CSV.
    Nct {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        f: String,
        #[arg(long, value_delimiter = ',')]
        orders: Vec<usize>,
        #[arg(long, default_value = "prefix:12")]
        quad: String,
        /// Grid spec "R,T": R radii up to 0.95 times T angles per coordinate.
        #[arg(long, default_value = "4,8")]
        grid: String,
    },
    /// Run a named invariant suite; report JSON with one row per check.
    Verify {
        #[command(flatten)]
        common: Common,
        /// One of: moments, kaczmarz, parseval, expansion, transforms,
        /// classify, disintegration, all.
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::NonconvergentTolerance { .. }
        | Error::QuadratureBudgetExceeded(_)
        | Error::RadiusTooCloseToOne { .. } => 3,
        _ => 2,
    }
}

fn fail(err: Error) -> ExitCode {
    let kind = match &err {
        Error::InvalidMeasure(_) => "invalid_measure",
        Error::UnsupportedMeasure(_) => "unsupported_measure",
        Error::NonconvergentTolerance { .. } => "nonconvergent_tolerance",
        Error::PrefixOutsideSupport { .. } => "prefix_outside_support",
        Error::MissingMoment(_) => "missing_moment",
        Error::DimensionTooSmall { .. } => "dimension_too_small",
        Error::QuadratureBudgetExceeded(_) => "quadrature_budget_exceeded",
        Error::PointOutsideDisk { .. } => "point_outside_disk",
        Error::SingularReciprocal(_) => "singular_reciprocal",
        Error::RadiusTooCloseToOne { .. } => "radius_too_close_to_one",
        Error::NotSymmetric => "not_symmetric",
        Error::Config(_) => "config",
    };
    eprintln!("{}", json!({ "error": kind, "message": err.to_string() }));
    ExitCode::from(exit_code_for(&err))
}

fn load_measure(common: &Common) -> Result<Measure, Error> {
    let text = fs::read_to_string(&common.config)
        .map_err(|e| Error::Config(format!("{}: {e}", common.config.display())))?;
    measure_from_json(&text)
}

fn parse_fspec(spec: &str, dim: usize) -> Result<TrigPoly, Error> {
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        fs::read_to_string(spec).map_err(|e| Error::Config(format!("{spec}: {e}")))?
    };
    #[derive(serde::Deserialize)]
    struct FSpec {
        frequencies: Vec<Vec<i64>>,
        coefficients: Vec<[f64; 2]>,
    }
    let raw: FSpec = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    if raw.frequencies.len() != raw.coefficients.len() {
        return Err(Error::Config(
            "frequencies and coefficients must have the same length".into(),
        ));
    }
    TrigPoly::from_terms(
        dim,
        raw.frequencies
            .into_iter()
            .zip(raw.coefficients)
            .map(|(v, [re, im])| (v, num_complex::Complex64::new(re, im))),
    )
}

fn parse_quad(spec: &str, seed: u64) -> Result<QuadratureSpec, Error> {
    let (mode, value) = spec
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("quadrature {spec:?}: expected prefix:K or mc:N")))?;
    let value: usize = value
        .parse()
        .map_err(|_| Error::Config(format!("quadrature {spec:?}: bad count")))?;
    match mode {
        "prefix" => Ok(QuadratureSpec::PrefixExact { depth: value }),
        "mc" => Ok(QuadratureSpec::MonteCarlo {
            samples: value,
            seed,
        }),
        _ => Err(Error::Config(format!(
            "quadrature {spec:?}: unknown mode {mode:?}"
        ))),
    }
}

fn write_artifact(common: &Common, content: &str) -> Result<(), Error> {
    match &common.out {
        Some(path) => {
            fs::write(path, content).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Moments { common, nmax } => {
            let m = load_measure(&common)?;
            let csv = if m.dim() == 1 {
                let table = MomentTable::build(&m, nmax, MOMENT_EPS)?;
                export::moments_to_csv(&table)
            } else {
                export::moment_box_to_csv(&m, nmax as i64, MOMENT_EPS)?
            };
            write_artifact(&common, &csv)?;
            Ok(0)
        }
        Command::Aux {
            common,
            order,
            json,
        } => {
            let m = load_measure(&common)?;
            if m.dim() != 1 {
                return Err(Error::InvalidMeasure(
                    "the aux command expects a one-dimensional measure".into(),
                ));
            }
            let table = MomentTable::build(&m, order, MOMENT_EPS)?;
            let aux = aux_matrix(&table, order)?;
            let residual = aux.consistency_residual(&table)?;
            if json {
                let text = serde_json::to_string_pretty(&export::aux_to_json(&aux))
                    .expect("matrix serializes");
                write_artifact(&common, &format!("{text}\n"))?;
            } else {
                write_artifact(&common, &export::aux_to_csv(&aux))?;
            }
            eprintln!("{}", json!({ "consistency_residual": residual }));
            Ok(0)
        }
        Command::Classify { common } => {
            let m = load_measure(&common)?;
            let report = match &m {
                Measure::Digit(d) => singfour::classify::classify(d),
                _ => {
                    return Err(Error::UnsupportedMeasure(
                        "classification applies to digit IFS configs; atomic measures and \
                         their products are singular by construction"
                            .into(),
                    ))
                }
            };
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            write_artifact(&common, &format!("{text}\n"))?;
            eprintln!("coord  verdict    reduced (digit: weight)");
            for c in &report.coordinates {
                let cells: Vec<String> =
                    c.reduced.iter().map(|(d, w)| format!("{d}: {w}")).collect();
                eprintln!(
                    "{:<6} {:<10} {}{}",
                    c.coord,
                    format!("{:?}", c.verdict).to_lowercase(),
                    cells.join(", "),
                    if c.near_miss_warning {
                        "  (near miss)"
                    } else {
                        ""
                    }
                );
            }
            eprintln!(
                "overall slice singular in any variable order: {}",
                report.overall_slice_singular
            );
            Ok(0)
        }
        Command::Expand {
            common,
            f,
            orders,
            quad,
            csv,
        } => {
            let m = load_measure(&common)?;
            let f = parse_fspec(&f, m.dim())?;
            let q = parse_quad(&quad, common.seed)?;
            let tensor = analyze(&m, &f, &orders, &q)?;
            let (norm_sq, _) = m.norm_sq(&f, 1e-12)?;
            if csv {
                write_artifact(&common, &export::tensor_to_csv(&tensor))?;
            } else {
                let mut doc = export::tensor_to_json(&tensor);
                doc["bessel_defect"] = json!(norm_sq - tensor.energy());
                doc["norm_sq"] = json!(norm_sq);
                let text = serde_json::to_string_pretty(&doc).expect("tensor serializes");
                write_artifact(&common, &format!("{text}\n"))?;
            }
            eprintln!(
                "{}",
                json!({ "bessel_defect": norm_sq - tensor.energy(), "energy": tensor.energy() })
            );
            Ok(0)
        }
        Command::Reconstruct {
            common,
            f,
            orders,
            quad,
        } => {
            let m = load_measure(&common)?;
            let f = parse_fspec(&f, m.dim())?;
            let q = parse_quad(&quad, common.seed)?;
            let report = reconstruction_error(&m, &f, &orders, &q)?;
            write_artifact(&common, &export::sweep_to_csv(&report.sweep))?;
            eprintln!("{}", json!({ "error": report.error }));
            Ok(0)
        }
        Command::Nct {
            common,
            f,
            orders,
            quad,
            grid,
        } => {
            let m = load_measure(&common)?;
            let f = parse_fspec(&f, m.dim())?;
            let q = parse_quad(&quad, common.seed)?;
            let (radii, angles) = grid
                .split_once(',')
                .and_then(|(r, t)| Some((r.parse().ok()?, t.parse().ok()?)))
                .ok_or_else(|| Error::Config(format!("grid {grid:?}: expected R,T")))?;
            let series = nct_d(&m, &f, &orders, &q)?;
            write_artifact(&common, &export::grid_to_csv(&series, radii, angles, 0.95)?)?;
            Ok(0)
        }
        Command::Verify { common, suite } => {
            let m = load_measure(&common)?;
            let report = run_suite(&m, &suite, common.seed)?;
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            write_artifact(&common, &format!("{text}\n"))?;
            Ok(if report.pass { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!(
                "{}",
                json!({ "error": "threads", "message": e.to_string() })
            );
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => fail(err),
    }
}

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use semipar::ambient::AmbientModel;
use semipar::curvature::{minimize_defect, MinimizeOptions, ShapeOperator};
use semipar::error::Error;
use semipar::hyperpoint::{oblique_normal, random_unit_normal, HypersurfacePoint};
use semipar::model::{build_type_a, build_type_b, minimize_family, proof_step, Family, ProofStep, TypeASpec, TypeBSpec};
use semipar::rng::{gaussian_symmetric, stream_rng};
use semipar::verify::{emit_report, run_suite, Format, Report, Suite, SuiteParams};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "semipar", version, about = "Numerical checks for semi-parallel real hypersurfaces in G2(C^{m+2})")]
struct Cli {
    /// Cap on worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    A,
    B,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MinFamilyArg {
    A,
    B,
    Free,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a verification suite.
    Check {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
    /// Scan a model family over a radius grid and write the CSV table.
    Scan {
        #[arg(long = "type", value_enum, ignore_case = true)]
        family: FamilyArg,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r_min: f64,
        #[arg(long)]
        r_max: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate one pointwise step on a model surface (OBLIQUE_THETA1 reads --r as the angle t).
    Proofstep {
        #[arg(long, value_parser = parse_step)]
        step: ProofStep,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Minimize the semi-parallel defect, freely at one point or along a family.
    Minimize {
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, ignore_case = true, default_value = "free")]
        family: MinFamilyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        restarts: usize,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_step(s: &str) -> Result<ProofStep, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Outcome of a command: whether every check passed.
type Outcome = Result<bool, Error>;

fn print_report(report: &Report) {
    println!(
        "{} (m = {}, seed = {}): {} passed, {} failed",
        report.suite,
        report.params.get("m").map(|v| v.to_string()).unwrap_or_default(),
        report.seed,
        report.summary.pass,
        report.summary.fail
    );
    for c in report.failures() {
        println!("  FAIL {}: {:.3e} > {:.3e}", c.name, c.max_residual, c.tolerance);
    }
}

fn check(suite: Suite, params: SuiteParams, out: Option<PathBuf>, format: FormatArg) -> Outcome {
    let report = run_suite(suite, &params)?;
    print_report(&report);
    if let Some(path) = out {
        let format = match format {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        };
        emit_report(&report, format, &path)?;
    }
    Ok(report.all_pass())
}

fn scan(family: FamilyArg, params: SuiteParams, out: PathBuf) -> Outcome {
    let suite = match family {
        FamilyArg::A => Suite::ModelAScan,
        FamilyArg::B => Suite::ModelBScan,
    };
    let report = run_suite(suite, &params)?;
    print_report(&report);
    if let Some(rows) = &report.scan {
        if let Some(min) = rows.iter().min_by(|a, b| a.defect_frobenius.total_cmp(&b.defect_frobenius)) {
            println!(
                "  {} rows, min defect_frobenius = {:.6} at r = {:.6}",
                rows.len(),
                min.defect_frobenius,
                min.r
            );
        }
    }
    emit_report(&report, Format::Csv, &out)?;
    Ok(report.all_pass())
}

fn show(values: &BTreeMap<String, f64>) {
    for (k, v) in values {
        println!("  {k} = {v:.12}");
    }
}

fn proofstep(step: ProofStep, m: usize, r: f64, seed: u64) -> Outcome {
    let model = AmbientModel::build(m)?;
    let header = || println!("{step} (m = {m}, r = {r})");
    let pass = match step {
        ProofStep::TypeAFinal => {
            let spec = TypeASpec::new(m, r)?;
            let s = build_type_a(&model, &spec)?;
            let v = proof_step(&s.point, &s.shape, step)?;
            header();
            show(&v);
            println!("  -2beta = {:.12}", -2.0 * spec.beta());
            (v["braces"] - 2.0).abs() <= 1e-9 && (v["defect_entry"] + 2.0 * spec.beta()).abs() <= 1e-8
        }
        ProofStep::TypeBAxi => {
            let spec = TypeBSpec::new(m, r, seed)?;
            let s = build_type_b(&model, &spec)?;
            let v = proof_step(&s.point, &s.shape, step)?;
            header();
            show(&v);
            println!("  4alpha = {:.12}", 4.0 * spec.alpha());
            (v["d"] - 4.0 * spec.alpha()).abs() <= 1e-8
        }
        ProofStep::ObliqueTheta1 => {
            if !(r > 0.0 && r < std::f64::consts::FRAC_PI_4) {
                return Err(Error::Parameter(format!(
                    "OBLIQUE_THETA1 angle must lie in the open interval (0, pi/4), got {r}"
                )));
            }
            let p = HypersurfacePoint::build(&model, &oblique_normal(&model, r))?;
            let v = proof_step(&p, &ShapeOperator::zero(&p), step)?;
            header();
            show(&v);
            v["residual"] <= 1e-9 && v["orthogonality"] <= 1e-9
        }
    };
    println!("{}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

fn minimize(m: usize, family: MinFamilyArg, seed: u64, restarts: usize) -> Outcome {
    let pass = match family {
        MinFamilyArg::Free => {
            let model = AmbientModel::build(m)?;
            let mut rng = stream_rng(seed, 0);
            let p = HypersurfacePoint::build(&model, &random_unit_normal(&model, &mut rng))?;
            let opts = MinimizeOptions {
                seed,
                restarts,
                ..MinimizeOptions::default()
            };
            let start = gaussian_symmetric(&mut rng, p.tangent_dim(), opts.init_scale);
            let a0 = ShapeOperator::from_frame(&p, &start)?;
            let out = minimize_defect(&p, &a0, &opts)?;
            println!(
                "free minimization (m = {m}, seed = {seed}): value = {:.6e} after {} iterations, best run {}",
                out.value,
                out.trace.len(),
                out.best_restart
            );
            println!("  pointwise minimizers exist (A = 0, A = cP); this does not bear on the global nonexistence");
            out.value <= 1e-8
        }
        MinFamilyArg::A => {
            let model = AmbientModel::build(m)?;
            let fm = minimize_family(&model, Family::A, 0.1, 1.0, 50, seed)?;
            let bound = 2.0 * TypeASpec::new(m, 1.0)?.beta();
            println!(
                "type A family on [0.1, 1.0] (m = {m}): min defect_frobenius = {:.6} at r = {:.6}, bound 2beta(1.0) = {bound:.6}",
                fm.frobenius, fm.r
            );
            fm.frobenius >= bound
        }
        MinFamilyArg::B => {
            let model = AmbientModel::build(m)?;
            let fm = minimize_family(&model, Family::B, 0.1, 0.68, 50, seed)?;
            let bound = (4.0 * TypeBSpec::new(m, 0.1, seed)?.alpha()).abs();
            println!(
                "type B family on [0.1, 0.68] (m = {m}): min defect_frobenius = {:.6} at r = {:.6}, bound |4alpha(0.1)| = {bound:.6}",
                fm.frobenius, fm.r
            );
            fm.frobenius >= bound
        }
    };
    println!("{}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Check {
            suite,
            m,
            seed,
            trials,
            out,
            format,
        } => {
            let mut params = SuiteParams::new(m).with_seed(seed);
            params.trials = trials;
            check(suite, params, out, format)
        }
        Command::Scan {
            family,
            m,
            r_min,
            r_max,
            steps,
            out,
            seed,
        } => scan(family, SuiteParams::new(m).with_seed(seed).with_grid(r_min, r_max, steps), out),
        Command::Proofstep { step, m, r, seed } => proofstep(step, m, r, seed),
        Command::Minimize {
            m,
            family,
            seed,
            restarts,
        } => minimize(m, family, seed, restarts),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(EXIT_USAGE);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("thread pool configured once");
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e @ (Error::Usage(_) | Error::Parameter(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}

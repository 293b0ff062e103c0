//! Command-line runner: expansion printing, chain diagnostics, convergence
//! studies and sample emission.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use edgeworth::chainfile;
use edgeworth::expansion::{selfnorm_polynomials, NormalizationPair};
use edgeworth::markov::{asymptotic_pq, check_ellipticity, perron_pressure, FiniteChainSpec};
use edgeworth::models::{builtin, BuiltinModel, BUILTIN_NAMES};
use edgeworth::sim::{doubling_map_sum, random_matrix_lognorm, sample_chain, sample_smoothing_noise};
use edgeworth::study::{run_convergence_study, ExperimentConfig};

#[derive(Parser)]
#[command(name = "edgeworth", about = "Edgeworth expansion toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelArgs {
    /// Built-in model name (see `--list-models`) or path via --chain
    #[arg(long, default_value = "two-state-markov")]
    model: String,
    /// Numeric parameters of the built-in model
    #[arg(long, num_args = 0.., value_delimiter = ',')]
    params: Vec<f64>,
    /// Chain spec file (overrides --model)
    #[arg(long)]
    chain: Option<PathBuf>,
}

impl ModelArgs {
    fn resolve(&self) -> Result<BuiltinModel, String> {
        if let Some(path) = &self.chain {
            let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
            let spec = chainfile::from_text(&text).map_err(|e| e.to_string())?;
            return Ok(BuiltinModel::Chain(spec));
        }
        builtin(&self.model, &self.params).map_err(|e| e.to_string())
    }

    fn resolve_chain(&self) -> Result<FiniteChainSpec, String> {
        match self.resolve()? {
            BuiltinModel::Chain(spec) => Ok(spec),
            _ => Err(format!("model '{}' is simulation-only", self.model)),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the expansion polynomials for given reduced cumulants
    Expand {
        /// Reduced cumulants c_j = gamma_{j+2}(S_n) / sigma_n^2, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        cumulants: Vec<f64>,
        /// Expansion order r
        #[arg(long, default_value_t = 1)]
        order: usize,
        /// Scaling B_n used when evaluating
        #[arg(long, default_value_t = 1.0)]
        bn: f64,
        /// Optional evaluation points
        #[arg(long, num_args = 0.., value_delimiter = ',')]
        at: Vec<f64>,
    },
    /// Ellipticity, pressure and asymptotic cumulant coefficients of a chain
    ChainAnalyze {
        #[command(flatten)]
        model: ModelArgs,
        /// Ellipticity parameter
        #[arg(long, default_value_t = 0.2)]
        eps0: f64,
        /// Highest cumulant order for p_k, q_k
        #[arg(long, default_value_t = 4)]
        kmax: usize,
    },
    /// Run a convergence study from a config file
    Study {
        /// Config path; omit to run the default study
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory
        #[arg(long, default_value = "study-out")]
        out: PathBuf,
        /// Override the config seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the expansion order
        #[arg(long)]
        order: Option<usize>,
        /// Override the tail weight power
        #[arg(long)]
        power: Option<f64>,
        /// Print the effective config and exit
        #[arg(long)]
        print_config: bool,
    },
    /// Emit a sample batch, one value per line
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Smoothing-noise order (uses the noise sampler instead of a model)
        #[arg(long)]
        smoothing_m: Option<usize>,
        /// Output file; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List built-in model names
    ListModels,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Expand { cumulants, order, bn, at } => {
            let polys = selfnorm_polynomials(&cumulants, order)
                .map_err(|e| e.to_string())?
                .with_normalization(NormalizationPair { a_n: 0.0, b_n: bn, sigma_n: bn });
            println!("# Psi_r(x) = Phi(x) + phi(x) * sum_j Bn^-j H_j(x); coefficients by power of x");
            for j in 1..=order {
                let coeffs = polys.correction(j).coeffs().to_vec();
                let joined: Vec<String> = coeffs.iter().map(|c| format!("{c}")).collect();
                println!("H_{j} {}", joined.join(" "));
            }
            for x in at {
                let v = edgeworth::evaluate_expansion(&polys, order, x);
                println!("Psi({x}) = {v:.12}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ChainAnalyze { model, eps0, kmax } => {
            let spec = model.resolve_chain()?;
            let report = check_ellipticity(&spec, eps0);
            println!(
                "ellipticity: upper_ok {} (worst density {:.6}), two_step_ok {} (worst {:.6})",
                report.upper_ok, report.worst_upper, report.two_step_ok, report.worst_two_step
            );
            if spec.is_homogeneous() {
                for z in [-0.5, -0.1, 0.1, 0.5] {
                    let p = perron_pressure(&spec, z).map_err(|e| e.to_string())?;
                    println!("pressure({z}) = {p:.10}");
                }
                let coeffs = asymptotic_pq(&spec, kmax).map_err(|e| e.to_string())?;
                for k in 2..=kmax {
                    println!("p_{k} = {:.10e}  q_{k} = {:.10e}", coeffs.p(k), coeffs.q(k));
                }
                println!("residual decay rate delta = {:.4}", coeffs.delta);
            } else {
                println!("inhomogeneous chain: pressure and (p, q) need a homogeneous model");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Study { config, out, seed, order, power, print_config } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
                    ExperimentConfig::from_text(&text).map_err(|e| e.to_string())?
                }
                None => ExperimentConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = order {
                cfg.order = r;
            }
            if let Some(s) = power {
                cfg.power = s;
            }
            if print_config {
                print!("{}", cfg.to_text());
                return Ok(ExitCode::SUCCESS);
            }
            let outcome = run_convergence_study(&cfg, &out).map_err(|e| e.to_string())?;
            println!(
                "wrote {} and {}",
                outcome.csv_path.display(),
                outcome.summary_path.display()
            );
            for (name, slope, residual, ok) in &outcome.slopes {
                println!(
                    "{name}: slope {slope:+.4} (residual {residual:.2e}) {}",
                    if *ok { "PASS" } else { "FAIL" }
                );
            }
            println!("overall: {}", if outcome.pass { "PASS" } else { "FAIL" });
            Ok(if outcome.pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Sample { model, n, count, seed, smoothing_m, out } => {
            let batch = if let Some(m) = smoothing_m {
                sample_smoothing_noise(m, count, seed).map_err(|e| e.to_string())?
            } else {
                match model.resolve()? {
                    BuiltinModel::Chain(spec) => sample_chain(&spec, n, count, seed),
                    BuiltinModel::DoublingCos => {
                        let g = |x: f64| (2.0 * std::f64::consts::PI * x).cos();
                        doubling_map_sum(g, n, count, seed).map_err(|e| e.to_string())?
                    }
                    BuiltinModel::RandomMatrixDiag => random_matrix_lognorm(
                        &[[2.0, 0.0, 0.0, 0.5], [1.5, 0.0, 0.0, 0.8]],
                        &[0.5, 0.5],
                        [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2],
                        n,
                        count,
                        seed,
                    )
                    .map_err(|e| e.to_string())?,
                }
            };
            let text = batch.to_text();
            match out {
                Some(path) => std::fs::write(path, text).map_err(|e| e.to_string())?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ListModels => {
            for name in BUILTIN_NAMES {
                println!("{name}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

//! Command-line front end for the RBF quadrature experiments.
//!
//! Every flag can also come from a flat `key = value` config file passed
//! with `--config`; explicit flags win over the file. Outputs are
//! deterministic: identical configurations produce byte-identical files.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rbfquad_cli::experiments::{self, Common};
use rbfquad_cli::output::Format;
use rbfquad_cli::specs;

#[derive(Parser)]
#[command(
    name = "rbfquad",
    version,
    about = "Quadrature rules exact on RBF spaces: construction, stability diagnostics, and experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Output file (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format: `csv` | `jsonl`
    #[arg(long, global = true)]
    format: Option<String>,
    /// Worker threads for independent sweep cells
    #[arg(long, global = true)]
    jobs: Option<String>,
    /// Base seed for randomized draws
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Emit wall-clock timings per row (breaks byte-identical reruns)
    #[arg(long, global = true)]
    timings: bool,
    /// Flat `key = value` config file; explicit flags override its entries
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Interpolatory quadrature weights for one configuration
    Weights {
        #[command(flatten)]
        common: CommonArgs,
        /// Kernel spec: `gaussian` | `wendland:<D>,<k>` | `phs:<p>` | `phslog:<p>`
        #[arg(long)]
        kernel: Option<String>,
        /// Point spec: `equid:<n>` | `halton:<n>[:skip]` | `random:<n>:<seed>`
        #[arg(long)]
        points: Option<String>,
        /// Domain spec: `lo:hi` or `lo:hi x lo:hi`
        #[arg(long)]
        domain: Option<String>,
        /// Polynomial degree, -1 for none
        #[arg(long, allow_hyphen_values = true)]
        degree: Option<String>,
        /// Shape parameter
        #[arg(long)]
        eps: Option<String>,
        /// Shape policy: `constant` | `equalmoment`
        #[arg(long)]
        policy: Option<String>,
        /// Dump the DOP Gram matrix to this CSV path (debugging aid)
        #[arg(long)]
        dump_gram: Option<PathBuf>,
    },
    /// Kernel and polynomial moments for one configuration
    Moments {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        points: Option<String>,
        #[arg(long)]
        domain: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        degree: Option<String>,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        policy: Option<String>,
    },
    /// Stability measure over a (kernel, degree, eps) grid
    StabilitySweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma list of kernel specs
        #[arg(long)]
        kernels: Option<String>,
        #[arg(long)]
        points: Option<String>,
        #[arg(long)]
        domain: Option<String>,
        /// Comma list of degrees (may include -1)
        #[arg(long, allow_hyphen_values = true)]
        degrees: Option<String>,
        /// Shape grid: list | `log:<lo>:<hi>:<per_decade>` | `lin:<lo>:<hi>:<n>`
        #[arg(long)]
        eps_grid: Option<String>,
        #[arg(long)]
        policy: Option<String>,
    },
    /// Integration error over a (kernel, degree, eps) grid with trials
    ErrorSweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        kernels: Option<String>,
        #[arg(long)]
        points: Option<String>,
        #[arg(long)]
        domain: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        degrees: Option<String>,
        #[arg(long)]
        eps_grid: Option<String>,
        #[arg(long)]
        policy: Option<String>,
        /// Integrand: `genz:<1-4>:<seed>` or `genz:<1-4>:a=..:b=..`
        #[arg(long)]
        integrand: Option<String>,
        /// Parameter draws per cell
        #[arg(long)]
        trials: Option<String>,
    },
    /// Error versus N for a kernel along a point sequence, with order fit
    Convergence {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        degree: Option<String>,
        /// Comma list of data sizes
        #[arg(long)]
        n_grid: Option<String>,
        /// Data sequence: `halton[:skip]` | `random:<seed>`
        #[arg(long)]
        data_seq: Option<String>,
        #[arg(long)]
        domain: Option<String>,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        integrand: Option<String>,
    },
    /// Positive least-squares rule by growing the data set
    Lsrbf {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        degree: Option<String>,
        /// Number of centers (prefix of the data sequence)
        #[arg(long)]
        centers: Option<String>,
        #[arg(long)]
        data_seq: Option<String>,
        #[arg(long)]
        domain: Option<String>,
        /// Initial number of data points (default: centers + poly dim)
        #[arg(long)]
        n_start: Option<String>,
        /// Data budget
        #[arg(long)]
        nmax: Option<String>,
        /// Grow N by max(1, N/10) instead of 1
        #[arg(long)]
        geometric_step: bool,
    },
    /// Interpolatory versus least-squares rules under noise
    LsrbfCompare {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        degree: Option<String>,
        /// Comma list of center counts
        #[arg(long)]
        m_grid: Option<String>,
        #[arg(long)]
        data_seq: Option<String>,
        #[arg(long)]
        domain: Option<String>,
        #[arg(long)]
        integrand: Option<String>,
        #[arg(long)]
        trials: Option<String>,
        #[arg(long)]
        nmax: Option<String>,
    },
    /// Data points needed for positivity as a function of center count
    RatioStudy {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        degree: Option<String>,
        #[arg(long)]
        m_grid: Option<String>,
        #[arg(long)]
        data_seq: Option<String>,
        #[arg(long)]
        domain: Option<String>,
    },
    /// Closed-form versus Monte Carlo uncovered area on grids
    Coverage {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma list of grid sizes (perfect squares)
        #[arg(long)]
        n_grid: Option<String>,
        /// Shape grid; default probes both breakpoints +-20%
        #[arg(long)]
        eps_grid: Option<String>,
        /// Monte Carlo samples
        #[arg(long)]
        samples: Option<String>,
    },
}

/// Flat `key = value` config file.
struct Config(HashMap<String, String>);

impl Config {
    fn load(path: Option<&PathBuf>) -> Result<Self, String> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| format!("config line {} is not `key = value`", lineno + 1))?;
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Self(map))
    }

    /// Flag value, else config value, else error.
    fn require(&self, flag: Option<String>, key: &str) -> Result<String, String> {
        flag.or_else(|| self.0.get(key).cloned())
            .ok_or_else(|| format!("missing required parameter --{key}"))
    }

    /// Flag value, else config value, else default.
    fn or_default(&self, flag: Option<String>, key: &str, default: &str) -> String {
        flag.or_else(|| self.0.get(key).cloned())
            .unwrap_or_else(|| default.to_string())
    }

    fn optional(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| self.0.get(key).cloned())
    }
}

fn parse<T: std::str::FromStr>(value: &str, what: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| format!("bad {what} `{value}`: {e}"))
}

fn parse_kernels(spec: &str) -> Result<Vec<rbfquad_core::Kernel>, String> {
    // Kernel specs contain commas (wendland:1,1), so split between entries:
    // a comma starts a new entry only if followed by a known prefix.
    let mut out = Vec::new();
    let mut current = String::new();
    let flush = |current: &mut String, out: &mut Vec<rbfquad_core::Kernel>| -> Result<(), String> {
        if !current.is_empty() {
            out.push(parse::<rbfquad_core::Kernel>(current, "kernel")?);
            current.clear();
        }
        Ok(())
    };
    let mut rest = spec;
    while !rest.is_empty() {
        if let Some(stripped) = rest.strip_prefix(',') {
            let starts_new = ["gaussian", "wendland:", "phs:", "phslog:"]
                .iter()
                .any(|p| stripped.starts_with(p));
            if starts_new {
                flush(&mut current, &mut out)?;
                rest = stripped;
                continue;
            }
            current.push(',');
            rest = stripped;
        } else {
            let c = rest.chars().next().unwrap();
            current.push(c);
            rest = &rest[c.len_utf8()..];
        }
    }
    flush(&mut current, &mut out)?;
    if out.is_empty() {
        return Err("empty kernel list".into());
    }
    Ok(out)
}

fn resolve_common(args: &CommonArgs, cfg: &Config) -> Result<Common, String> {
    let format: Format = parse(
        &cfg.or_default(args.format.clone(), "format", "csv"),
        "format",
    )?;
    let jobs: usize = parse(&cfg.or_default(args.jobs.clone(), "jobs", "1"), "jobs")?;
    Ok(Common {
        out: args
            .out
            .clone()
            .or_else(|| cfg.0.get("out").map(PathBuf::from)),
        format,
        jobs,
        timings: args.timings || cfg.0.get("timings").map(|v| v == "true").unwrap_or(false),
    })
}

fn seed_of(args: &CommonArgs, cfg: &Config) -> Result<u64, String> {
    parse(&cfg.or_default(args.seed.clone(), "seed", "0"), "seed")
}

fn degrees_of(spec: &str) -> Result<Vec<i32>, String> {
    let list = specs::parse_int_list(spec)?;
    list.iter()
        .map(|d| {
            if *d < -1 {
                Err(format!("degree {d} below -1"))
            } else {
                Ok(*d as i32)
            }
        })
        .collect()
}

fn sizes_of(spec: &str) -> Result<Vec<usize>, String> {
    let list = specs::parse_int_list(spec)?;
    list.iter()
        .map(|n| {
            if *n < 1 {
                Err(format!("size {n} must be positive"))
            } else {
                Ok(*n as usize)
            }
        })
        .collect()
}

fn dispatch(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Weights {
            common,
            kernel,
            points,
            domain,
            degree,
            eps,
            policy,
            dump_gram,
        } => {
            let cfg = Config::load(common.config.as_ref())?;
            let c = resolve_common(&common, &cfg)?;
            let domain_spec = cfg.require(domain, "domain")?;
            let dom = specs::parse_domain(&domain_spec)?;
            let points_spec = cfg.require(points, "points")?;
            let kernel: rbfquad_core::Kernel = parse(&cfg.require(kernel, "kernel")?, "kernel")?;
            experiments::run_weights(
                experiments::WeightsConfig {
                    kernel,
                    points: specs::parse_pointset(&points_spec, dom)?,
                    points_spec,
                    domain_spec,
                    degree: parse(&cfg.or_default(degree, "degree", "-1"), "degree")?,
                    eps: parse(&cfg.or_default(eps, "eps", "1"), "eps")?,
                    policy: parse(&cfg.or_default(policy, "policy", "constant"), "policy")?,
                    dump_gram: dump_gram.or_else(|| cfg.0.get("dump_gram").map(PathBuf::from)),
                },
                &c,
            )
        }
        Command::Moments {
            common,
            kernel,
            points,
            domain,
            degree,
            eps,
            policy,
        } => {
            let cfg = Config::load(common.config.as_ref())?;
            let c = resolve_common(&common, &cfg)?;
            let domain_spec = cfg.require(domain, "domain")?;
            let dom = specs::parse_domain(&domain_spec)?;
            let points_spec = cfg.require(points, "points")?;
            let kernel: rbfquad_core::Kernel = parse(&cfg.require(kernel, "kernel")?, "kernel")?;
            experiments::run_moments(
                experiments::MomentsConfig {
                    kernel,
                    points: specs::parse_pointset(&points_spec, dom)?,
                    points_spec,
                    domain_spec,
                    degree: parse(&cfg.or_default(degree, "degree", "-1"), "degree")?,
                    eps: parse(&cfg.or_default(eps, "eps", "1"), "eps")?,
                    policy: parse(&cfg.or_default(policy, "policy", "constant"), "policy")?,
                },
                &c,
            )
        }
        Command::StabilitySweep {
            common,
            kernels,
            points,
            domain,
            degrees,
            eps_grid,
            policy,
        } => {
            let cfg = Config::load(common.config.as_ref())?;
            let c = resolve_common(&common, &cfg)?;
            let domain_spec = cfg.require(domain, "domain")?;
            let dom = specs::parse_domain(&domain_spec)?;
            let points_spec = cfg.require(points, "points")?;
            let eps_grid_spec = cfg.require(eps_grid, "eps_grid")?;
            experiments::run_stability_sweep(
                experiments::StabilitySweepConfig {
                    kernels: parse_kernels(&cfg.require(kernels, "kernels")?)?,
                    points: specs::parse_pointset(&points_spec, dom)?,
                    points_spec,
                    domain_spec,
                    degrees: degrees_of(&cfg.require(degrees, "degrees")?)?,
                    eps_grid: specs::parse_grid(&eps_grid_spec)?,
                    eps_grid_spec,
                    policy: parse(&cfg.or_default(policy, "policy", "constant"), "policy")?,
                },
                &c,
            )
        }
        Command::ErrorSweep {
            common,
            kernels,
            points,
            domain,
            degrees,
            eps_grid,
            policy,
            integrand,
            trials,
        } => {
            let cfg = Config::load(common.config.as_ref())?;
            let c = resolve_common(&common, &cfg)?;
            let domain_spec = cfg.require(domain, "domain")?;
            let dom = specs::parse_domain(&domain_spec)?;
            let points_spec = cfg.require(points, "points")?;
            let eps_grid_spec = cfg.require(eps_grid, "eps_grid")?;
            let integrand_spec = cfg.require(integrand, "integrand")?;
            experiments::run_error_sweep(
                experiments::ErrorSweepConfig {
                    kernels: parse_kernels(&cfg.require(kernels, "kernels")?)?,
                    points: specs::parse_pointset(&points_spec, dom)?,
                    points_spec,
                    domain_spec,
                    degrees: degrees_of(&cfg.require(degrees, "degrees")?)?,
                    eps_grid: specs::parse_grid(&eps_grid_spec)?,
                    eps_grid_spec,
                    policy: parse(&cfg.or_default(policy, "policy", "constant"), "policy")?,
                    integrand: specs::parse_integrand(&integrand_spec)?,
                    integrand_spec,
                    trials: parse(&cfg.or_default(trials, "trials", "20"), "trials")?,
                },
                &c,
            )
        }
        Command::Convergence {
            common,
            kernel,
            degree,
            n_grid,
            data_seq,
            domain,
            eps,
            integrand,
        } => {
            let cfg = Config::load(common.config.as_ref())?;
            let c = resolve_common(&common, &cfg)?;
            let domain_spec = cfg.require(domain, "domain")?;
            let sequence_spec = cfg.or_default(data_seq, "data_seq", "halton");
            let integrand_spec = cfg.require(integrand, "integrand")?;
            let kernel: rbfquad_core::Kernel = parse(&cfg.require(kernel, "kernel")?, "kernel")?;
            experiments::run_convergence(
                experiments::ConvergenceConfig {
                    kernel,
                    degree: parse(&cfg.or_default(degree, "degree", "-1"), "degree")?,
                    n_grid: sizes_of(&cfg.require(n_grid, "n_grid")?)?,
                    sequence: specs::parse_sequence(&sequence_spec)?,
                    sequence_spec,
                    domain: specs::parse_domain(&domain_spec)?,
                    domain_spec,
                    eps: parse(&cfg.or_default(eps, "eps", "1"), "eps")?,
                    integrand: specs::parse_integrand(&integrand_spec)?,
                    integrand_spec,
                },
                &c,
            )
        }
        Command::Lsrbf {
            common,
            kernel,
            eps,
            degree,
            centers,
            data_seq,
            domain,
            n_start,
            nmax,
            geometric_step,
        } => {
            let cfg = Config::load(common.config.as_ref())?;
            let c = resolve_common(&common, &cfg)?;
            let domain_spec = cfg.require(domain, "domain")?;
            let sequence_spec = cfg.or_default(data_seq, "data_seq", "halton");
            let kernel: rbfquad_core::Kernel = parse(&cfg.require(kernel, "kernel")?, "kernel")?;
            let n_start = match cfg.optional(n_start, "n_start") {
                Some(v) => Some(parse::<usize>(&v, "n_start")?),
                None => None,
            };
            experiments::run_lsrbf(
                experiments::LsrbfConfig {
                    kernel,
                    eps: parse(&cfg.or_default(eps, "eps", "1"), "eps")?,
                    degree: parse(&cfg.or_default(degree, "degree", "0"), "degree")?,
                    centers: parse(&cfg.require(centers, "centers")?, "centers")?,
                    sequence: specs::parse_sequence(&sequence_spec)?,
                    sequence_spec,
                    domain: specs::parse_domain(&domain_spec)?,
                    domain_spec,
                    n_start,
                    n_max: parse(&cfg.require(nmax, "nmax")?, "nmax")?,
                    geometric_step: geometric_step
                        || cfg
                            .0
                            .get("geometric_step")
                            .map(|v| v == "true")
                            .unwrap_or(false),
                },
                &c,
            )
        }
        Command::LsrbfCompare {
            common,
            kernel,
            eps,
            degree,
            m_grid,
            data_seq,
            domain,
            integrand,
            trials,
            nmax,
        } => {
            let cfg = Config::load(common.config.as_ref())?;
            let c = resolve_common(&common, &cfg)?;
            let seed = seed_of(&common, &cfg)?;
            let domain_spec = cfg.require(domain, "domain")?;
            let sequence_spec = cfg.or_default(data_seq, "data_seq", "random:42");
            let integrand_spec = cfg.require(integrand, "integrand")?;
            let kernel: rbfquad_core::Kernel = parse(&cfg.require(kernel, "kernel")?, "kernel")?;
            experiments::run_lsrbf_compare(
                experiments::LsrbfCompareConfig {
                    kernel,
                    eps: parse(&cfg.or_default(eps, "eps", "0.8"), "eps")?,
                    degree: parse(&cfg.or_default(degree, "degree", "0"), "degree")?,
                    m_grid: sizes_of(&cfg.require(m_grid, "m_grid")?)?,
                    sequence: specs::parse_sequence(&sequence_spec)?,
                    sequence_spec,
                    domain: specs::parse_domain(&domain_spec)?,
                    domain_spec,
                    integrand: specs::parse_integrand(&integrand_spec)?,
                    integrand_spec,
                    trials: parse(&cfg.or_default(trials, "trials", "20"), "trials")?,
                    seed,
                    n_max: parse(&cfg.or_default(nmax, "nmax", "100000"), "nmax")?,
                },
                &c,
            )
        }
        Command::RatioStudy {
            common,
            kernel,
            eps,
            degree,
            m_grid,
            data_seq,
            domain,
        } => {
            let cfg = Config::load(common.config.as_ref())?;
            let c = resolve_common(&common, &cfg)?;
            let domain_spec = cfg.require(domain, "domain")?;
            let sequence_spec = cfg.or_default(data_seq, "data_seq", "halton");
            let kernel: rbfquad_core::Kernel = parse(&cfg.require(kernel, "kernel")?, "kernel")?;
            experiments::run_ratio_study(
                experiments::RatioStudyConfig {
                    kernel,
                    eps: parse(&cfg.or_default(eps, "eps", "0.8"), "eps")?,
                    degree: parse(&cfg.or_default(degree, "degree", "0"), "degree")?,
                    m_grid: sizes_of(&cfg.require(m_grid, "m_grid")?)?,
                    sequence: specs::parse_sequence(&sequence_spec)?,
                    sequence_spec,
                    domain: specs::parse_domain(&domain_spec)?,
                    domain_spec,
                },
                &c,
            )
        }
        Command::Coverage {
            common,
            n_grid,
            eps_grid,
            samples,
        } => {
            let cfg = Config::load(common.config.as_ref())?;
            let c = resolve_common(&common, &cfg)?;
            let seed = seed_of(&common, &cfg)?;
            let eps_grid_spec = cfg.or_default(eps_grid, "eps_grid", "breakpoints");
            let eps_values = if eps_grid_spec == "breakpoints" {
                None
            } else {
                Some(specs::parse_grid(&eps_grid_spec)?)
            };
            experiments::run_coverage(
                experiments::CoverageConfig {
                    n_grid: sizes_of(&cfg.require(n_grid, "n_grid")?)?,
                    eps_grid: eps_values,
                    eps_grid_spec,
                    samples: parse(&cfg.or_default(samples, "samples", "1000000"), "samples")?,
                    seed,
                },
                &c,
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use lindeberg_lab::harness::{run, ExperimentConfig, OutputFormat, Suite};
use lindeberg_lab::Error;

/// Run a universality experiment and emit its result table.
#[derive(Debug, Parser)]
#[command(name = "lindeberg-lab", version, about)]
struct Cli {
    /// clt, wigner, sk_free_energy, sk_ground_state, erdos_kac, lambda_audit or bound_table
    suite: String,

    /// Key-value config file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Law of the X inputs, e.g. `rademacher`, `gaussian`, `pareto:2.5:40`.
    #[arg(long = "dist-x", visible_alias = "distX")]
    dist_x: Option<String>,

    #[arg(long = "dist-y", visible_alias = "distY")]
    dist_y: Option<String>,

    /// Walk or sum length `n`, or matrix / spin count `N`.
    #[arg(long = "size", visible_aliases = ["n", "N"])]
    size: Option<usize>,

    #[arg(long = "z-re", allow_negative_numbers = true)]
    z_re: Option<f64>,

    #[arg(long = "z-im", allow_negative_numbers = true)]
    z_im: Option<f64>,

    #[arg(long)]
    beta: Option<f64>,

    #[arg(long, allow_negative_numbers = true)]
    h: Option<f64>,

    /// Soft-max scale `A` in `α = A·N` for the ground-state bound.
    #[arg(long = "a", visible_alias = "A")]
    a: Option<f64>,

    /// Truncation scale: `K = ε√N`.
    #[arg(long)]
    epsilon: Option<f64>,

    /// Test function: sin, tanh, identity or clipsq.
    #[arg(long)]
    g: Option<String>,

    #[arg(long)]
    replicates: Option<usize>,

    #[arg(long)]
    seed: Option<u64>,

    /// Output file; the table goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,

    /// Comma-separated sizes for bound_table.
    #[arg(long)]
    grid: Option<String>,

    #[arg(long)]
    threads: Option<usize>,

    /// Also write the run manifest as JSON to this path.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Cli {
    fn flags(&self) -> lindeberg_lab::Result<ExperimentConfig> {
        let mut c = ExperimentConfig {
            dist_x: self.dist_x.clone(),
            dist_y: self.dist_y.clone(),
            size: self.size,
            z_re: self.z_re,
            z_im: self.z_im,
            beta: self.beta,
            h: self.h,
            a: self.a,
            epsilon: self.epsilon,
            g: self.g.clone(),
            replicates: self.replicates,
            seed: self.seed,
            out: self.out.clone(),
            format: self.format,
            threads: self.threads,
            ..Default::default()
        };
        if let Some(grid) = &self.grid {
            c.set("grid", grid)?;
        }
        Ok(c)
    }
}

const EXIT_FAILED_CHECK: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let plan = (|| {
        let suite: Suite = cli.suite.parse()?;
        let mut config = match &cli.config {
            Some(path) => ExperimentConfig::from_file(path, suite)?,
            None => ExperimentConfig::default(),
        };
        config.overlay(&cli.flags()?);
        config.validate(suite)
    })();
    let plan = match plan {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let stdout = std::io::stdout();
    let manifest = match run(&plan, &mut stdout.lock()) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(match e {
                Error::Config(_) => EXIT_CONFIG,
                _ => EXIT_RUNTIME,
            });
        }
    };

    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{} finished in {:.2}s, {} rows", manifest.suite, manifest.wall_clock_seconds, manifest.rows);
    for c in &manifest.checks {
        let _ = writeln!(err, "  [{}] {}", if c.passed { "PASS" } else { "FAIL" }, c.label);
    }
    for r in &manifest.reports {
        let _ = writeln!(
            err,
            "  {}: gap {:.3e} ± {:.1e}, bound {:.3e}",
            r.experiment_id(),
            r.mc_gap(),
            r.std_error(),
            r.theoretical_bound()
        );
    }

    if let Some(path) = &cli.manifest {
        let written = std::fs::File::create(path)
            .map_err(Error::from)
            .and_then(|f| serde_json::to_writer_pretty(f, &manifest).map_err(Error::from));
        if let Err(e) = written {
            eprintln!("error: cannot write manifest: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }

    if manifest.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED_CHECK)
    }
}

//! `nvdnp`: config-driven runs of the NV DNP toolkit with CSV and SVG output.

mod commands;
pub mod config;
pub mod output;
pub mod schema;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use nvdnp_pulse::Variant;

pub use commands::CliError;
pub use config::{parse_config, parse_value, render, Command, ConfigError, Dim, Quantity, RunConfig, Value};

pub const REPORT_FILE: &str = "run_report.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum VariantArg {
    Standard,
    PhaseOffset,
}

#[derive(Debug, Parser)]
#[command(name = "nvdnp", version, about = "NV-center DNP simulations and analysis")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Configuration file (`key = value`, `[section]`, `#` comments).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides any `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write an SVG plot next to the CSV.
    #[arg(long)]
    plot: bool,
    #[arg(long, env = "NVDNP_THREADS")]
    threads: Option<usize>,
    /// PulsePol variant, overriding the config.
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
}

#[derive(Debug, Default)]
struct Report {
    echo: String,
    outputs: Vec<String>,
    warnings: Vec<String>,
    summary: Vec<String>,
    status: String,
}

impl Report {
    fn render(&self, secs: f64) -> String {
        let mut s = format!("command: {}\nstatus: {}\nwall_time_s: {secs:.3}\n", self.echo, self.status);
        let mut block = |name: &str, items: &[String]| {
            s.push_str(&format!("{name}:\n"));
            for it in items {
                s.push_str(&format!("  {it}\n"));
            }
        };
        block("outputs", &self.outputs);
        block("summary", &self.summary);
        block("warnings", &self.warnings);
        s
    }
}

fn execute(cli: &Cli, report: &mut Report) -> Result<(), CliError> {
    let (cfg, base_dir) = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
            let mut cfg = parse_config(&text)?;
            if cfg.is_empty() {
                return Err(CliError::Validation(format!("config {} contains no settings", path.display())));
            }
            match cfg.command {
                Some(c) if c != cli.command => {
                    return Err(CliError::Validation(format!(
                        "config line {}: command '{c}' does not match '{}'",
                        cfg.line_of("command"),
                        cli.command
                    )))
                }
                Some(_) => {}
                None => {
                    cfg.command = Some(cli.command);
                    schema::check_keys(&cfg, cli.command)?;
                }
            }
            (cfg, path.parent().map(Path::to_path_buf).unwrap_or_default())
        }
        None => {
            let cfg = RunConfig { command: Some(cli.command), ..Default::default() };
            schema::check_keys(&cfg, cli.command)?;
            (cfg, PathBuf::new())
        }
    };
    let variant = match cli.variant {
        None => None,
        Some(_) if !matches!(cli.command, Command::PulsepolTau | Command::PulsepolDetuning) => {
            return Err(CliError::Validation(format!("--variant does not apply to {}", cli.command)))
        }
        Some(VariantArg::Standard) => Some(Variant::Standard),
        Some(VariantArg::PhaseOffset) => Some(Variant::PhaseOffset),
    };
    let ctx = commands::Ctx {
        p: schema::Params::new(&cfg),
        seed: cli.seed.or(cfg.seed()).unwrap_or(0),
        variant,
        base_dir: &base_dir,
    };
    let outcome = match cli.threads {
        Some(0) => return Err(CliError::Validation("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Numeric(format!("thread pool: {e}")))?
            .install(|| commands::dispatch(cli.command, &ctx))?,
        None => commands::dispatch(cli.command, &ctx)?,
    };

    let mut files = outcome.files;
    if let Some(name) = cfg.output_path() {
        if let Some(first) = files.first_mut() {
            first.0 = name.to_string();
        }
    }
    if cli.plot {
        if let (Some(plot), Some(first)) = (&outcome.plot, files.first()) {
            let stem = Path::new(&first.0).with_extension("svg");
            files.push((stem.to_string_lossy().into_owned(), plot.to_svg()));
        }
    }
    for (name, contents) in &files {
        let path = cli.out.join(name);
        output::write_atomic(&path, contents.as_bytes())
            .map_err(|e| CliError::Numeric(format!("cannot write {}: {e}", path.display())))?;
        report.outputs.push(path.display().to_string());
    }
    report.summary = outcome.summary;
    report.warnings = outcome.warnings;
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Parse arguments, run one command and return the process exit code:
/// 0 on success, 2 on invalid input, 3 on numeric failure.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let start = Instant::now();
    let mut report = Report {
        echo: args.iter().map(|a| a.to_string_lossy().into_owned()).collect::<Vec<_>>().join(" "),
        ..Default::default()
    };
    let result = execute(&cli, &mut report);
    let code = match &result {
        Ok(()) => 0,
        Err(e) => e.exit_code(),
    };
    report.status = match &result {
        Ok(()) => "ok".into(),
        Err(e) => format!("error (exit {code}): {e}"),
    };
    for line in &report.summary {
        println!("{line}");
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    let text = report.render(start.elapsed().as_secs_f64());
    if let Err(e) = output::write_atomic(&cli.out.join(REPORT_FILE), text.as_bytes()) {
        eprintln!("error: cannot write run report: {e}");
    }
    code
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use dec2d::solver::HarmonicChoice;
use dec2d::study::{default_eps_list, emit_report, parse_family, run_study, OutputFormat, StudyConfig, StudyKind};
use dec2d::{Error, Flavor};

/// Runs DEC versus FEEC studies on families of triangle meshes.
#[derive(Parser, Debug)]
#[command(name = "dec2d", version)]
struct Cli {
    study: StudyKind,
    /// Mesh family: domain[,kind][,perturbation=x][,base=n][,min_angle=deg|none].
    #[arg(long, default_value = "square")]
    family: String,
    #[arg(long, default_value_t = 4)]
    levels: usize,
    /// Form degrees.
    #[arg(long = "k", value_delimiter = ',', default_value = "0,1,2")]
    ks: Vec<usize>,
    #[arg(long = "flavor", value_delimiter = ',', default_value = "dec,feec", value_parser = parse_flavor)]
    flavors: Vec<Flavor>,
    /// Random cochains per level for the sampled statistics.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Opposite-angle gaps for the counterexample study (decreasing).
    #[arg(long = "eps", value_delimiter = ',')]
    eps_list: Option<Vec<f64>>,
    /// Harmonic space constraining DEC solves.
    #[arg(long, value_enum, default_value = "own")]
    harmonic: HarmonicArg,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum HarmonicArg {
    Own,
    Feec,
}

fn parse_flavor(s: &str) -> Result<Flavor, String> {
    match s {
        "dec" => Ok(Flavor::Dec),
        "feec" => Ok(Flavor::Feec),
        _ => Err(format!("unknown flavor {s:?} (expected dec or feec)")),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let family = parse_family(&cli.family, cli.levels, cli.seed)?;
    let mut config = StudyConfig::new(cli.study, family);
    config.ks = cli.ks;
    config.flavors = cli.flavors;
    config.samples = cli.samples;
    config.seed = cli.seed;
    config.eps_list = cli.eps_list.unwrap_or_else(default_eps_list);
    config.harmonic = match cli.harmonic {
        HarmonicArg::Own => HarmonicChoice::Own,
        HarmonicArg::Feec => HarmonicChoice::Feec,
    };
    config.output = cli.out.clone();
    config.format = cli.format;
    let result = run_study(&config)?;
    match &cli.out {
        Some(path) => emit_report(&result, path, cli.format)?,
        None => match cli.format {
            OutputFormat::Csv => print!("{}", result.to_csv()),
            OutputFormat::Json => print!("{}", result.to_json()?),
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors share the general error code; 2 is reserved for
            // inadmissible meshes.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is_admissibility() => {
            eprintln!("dec2d: inadmissible mesh: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("dec2d: {e}");
            ExitCode::from(1)
        }
    }
}

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pathmetric::cfg::OptLevel;
use pathmetric::cli::{
    cmd_analyze, cmd_corpus_stats, cmd_dot, cmd_verify, AnalyzeOptions, Format, MetricChoice,
    EXIT_IO,
};
use pathmetric::oracle::OracleBudget;

/// Path-complexity analyzer: ACPATH and NPATH per function, with an
/// exhaustive oracle for verification.
#[derive(Parser)]
#[command(name = "pathmetric", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Acpath,
    Npath,
    Both,
}

#[derive(Args)]
struct CommonArgs {
    /// Guard constant-folding level: 0 none, 1 literals, 2 constant
    /// expressions.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(0..=2))]
    opt_level: u8,
    /// Oracle cap on reachable CFG nodes.
    #[arg(long, default_value_t = 64)]
    max_oracle_nodes: usize,
    /// Oracle cap on counted paths.
    #[arg(long, default_value_t = 10_000_000)]
    max_oracle_paths: u64,
    /// Oracle cap on walk steps.
    #[arg(long, default_value_t = 100_000_000)]
    max_oracle_steps: u64,
    /// Sort reports by file, line and function.
    #[arg(long)]
    sorted: bool,
}

impl CommonArgs {
    fn level(&self) -> OptLevel {
        OptLevel::from_u8(self.opt_level).expect("validated by clap")
    }

    fn budget(&self) -> OracleBudget {
        OracleBudget {
            max_nodes: self.max_oracle_nodes,
            max_paths: self.max_oracle_paths,
            max_steps: self.max_oracle_steps,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute per-function ACPATH/NPATH reports.
    Analyze {
        paths: Vec<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
        /// Report format.
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
        /// Which metrics to include.
        #[arg(long, value_enum, default_value_t = MetricArg::Both)]
        metric: MetricArg,
        /// Clamp `E;` statements to at least one NPATH unit.
        #[arg(long)]
        npath_clamp: bool,
        /// Scale while-body return paths by the guard's true-path count.
        #[arg(long)]
        while_return_scaling: bool,
        /// Also run the oracle and attach alpha/match columns.
        #[arg(long)]
        verify: bool,
    },
    /// Compare ACPATH against the exhaustive oracle per function.
    Verify {
        paths: Vec<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Aggregate a JSONL report into corpus statistics.
    CorpusStats {
        /// JSONL report with `acpath` and `npath` fields per record.
        report: PathBuf,
    },
    /// Print one function's reference CFG as Graphviz DOT.
    Dot {
        path: PathBuf,
        /// Function name.
        function: String,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = match cli.command {
        Command::Analyze {
            paths,
            common,
            format,
            metric,
            npath_clamp,
            while_return_scaling,
            verify,
        } => {
            let opts = AnalyzeOptions {
                level: common.level(),
                metric: match metric {
                    MetricArg::Acpath => MetricChoice::Acpath,
                    MetricArg::Npath => MetricChoice::Npath,
                    MetricArg::Both => MetricChoice::Both,
                },
                format: match format {
                    FormatArg::Text => Format::Text,
                    FormatArg::Json => Format::Json,
                    FormatArg::Csv => Format::Csv,
                },
                npath_clamp,
                while_return_scaling,
                verify,
                budget: common.budget(),
                sorted: common.sorted,
            };
            cmd_analyze(&paths, &opts, &mut out, &mut err)
        }
        Command::Verify { paths, common } => {
            let opts = AnalyzeOptions {
                level: common.level(),
                budget: common.budget(),
                sorted: common.sorted,
                ..AnalyzeOptions::default()
            };
            cmd_verify(&paths, &opts, &mut out, &mut err)
        }
        Command::CorpusStats { report } => match cmd_corpus_stats(&report, &mut out) {
            Ok(_) => 0,
            Err(e) => {
                let _ = writeln!(err, "{e}");
                EXIT_IO
            }
        },
        Command::Dot {
            path,
            function,
            common,
        } => match cmd_dot(&path, &function, common.level(), &mut out) {
            Ok(()) => 0,
            Err(pathmetric::cli::CliError::FunctionNotFound(name)) => {
                let _ = writeln!(err, "function `{name}` not found");
                1
            }
            Err(e) => {
                let _ = writeln!(err, "{e}");
                EXIT_IO
            }
        },
    };
    ExitCode::from(code as u8)
}

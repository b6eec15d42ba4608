use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "curvjet", version, about = "Curvature two-jets: generation, identity suites, Einstein extension")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random object and write it as JSON.
    Gen(GenArgs),
    /// Run identity suites, or check a jet read from --in.
    Check(CheckArgs),
    /// Extend an Einstein one-jet (R, dR) to an Einstein two-jet.
    Extend(IoArgs),
    /// Fit the relation R^(2) = c R^(0)⊙g on a two-jet.
    Fit(IoArgs),
    /// Evaluate (R, dR, d2R) at the origin of a polynomial metric.
    Metric(IoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// Random two-jet with generic R, dR, d2R.
    TwoJet,
    /// Einstein two-jet from a random Einstein one-jet.
    EinsteinTwoJet,
    /// (g⊼g, 0, 0).
    Symmetric,
    /// Random (R, dR).
    OneJet,
    /// Random (λ g⊼g + W, dR) with trace-free dR.
    EinsteinOneJet,
    /// (g⊼g, 0).
    ConstantOneJet,
    /// Random polynomial metric of degree 4.
    Metric,
}

/// Options shared by all subcommands.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Dimension of the model space.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Signature as a comma list of +1/-1, e.g. 1,-1,1,1.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    pub signature: Option<Vec<i8>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relative tolerance of every check.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output path; reports go to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value_t = Kind::TwoJet)]
    pub kind: Kind,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Suite name, `all`, or `printed`; with --in: `validate` or `einstein`.
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Jet file to check instead of random inputs.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Number of seeds per space (default 25, or 100 with --full).
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Dimensions 3 to 5 with 100 seeds.
    #[arg(long)]
    pub full: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct IoArgs {
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    use super::*;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn signature_accepts_negative_entries() {
        let cli = Cli::try_parse_from(["curvjet", "check", "--signature", "-1,1,1", "--suite", "rr"]).unwrap();
        let Command::Check(a) = cli.command else { panic!("expected check") };
        assert_eq!(a.common.signature, Some(vec![-1, 1, 1]));
        assert_eq!(a.common.tol, 1e-9);
        assert!(Cli::try_parse_from(["curvjet", "gen", "--kind", "nope"]).is_err());
    }
}

use clap::{Parser, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;
use std::str::FromStr;

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (", env!("QUADWEIL_GIT_REV"), ")");

/// A list of integers written as `3,5,7` or as an inclusive range `11..101`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct NumList(pub Vec<u64>);

impl FromStr for NumList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some((lo, hi)) = s.split_once("..") {
            let lo: u64 = lo.trim().parse().map_err(|e| format!("bad range start {lo:?}: {e}"))?;
            let hi: u64 = hi.trim().parse().map_err(|e| format!("bad range end {hi:?}: {e}"))?;
            if lo > hi {
                return Err(format!("inverted range {lo}..{hi}"));
            }
            return Ok(NumList((lo..=hi).collect()));
        }
        let v = s
            .split(',')
            .map(|t| t.trim().parse::<u64>().map_err(|e| format!("bad entry {t:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        if v.is_empty() {
            return Err("empty list".into());
        }
        Ok(NumList(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// genericity, determinant identity, admissible primes, g(Q) per modulus
    AnalyzeForm,
    /// run verification suites
    Verify,
    /// tables over a range of primes
    Sweep,
    /// S(N) with its local factors
    SingularSeries,
    /// weighted prime count against S(N) X^6
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Weil,
    Expsum,
    Gamma,
    Measures,
    Circle,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// (1/phi(q)) sum_r |T(r)| per prime, with the fitted exponent
    Decay,
    /// norms of mu_p^{(2^j)}
    Flattening,
    /// local factors beta_p(N)
    Beta,
}

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "quadweil", version = VERSION, about = "Experiments on quadratic forms in eight variables")]
pub struct RunConfig {
    /// JSON file with integer matrices a, b, c
    #[arg(long)]
    pub form: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub command: Command,
    /// primes, as a list or an inclusive range
    #[arg(long)]
    pub p: Option<NumList>,
    /// moduli, as a list or an inclusive range
    #[arg(long)]
    pub q: Option<NumList>,
    #[arg(long = "X")]
    pub x: Option<u64>,
    #[arg(long = "N")]
    pub n: Option<i64>,
    #[arg(long = "A", default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// element budget for group closures
    #[arg(long, default_value_t = 2_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    /// output file; `.csv` selects CSV where a table exists
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// human-readable rendering on stdout
    #[arg(long)]
    pub pretty: bool,
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    #[arg(long, value_enum)]
    pub kind: Option<SweepKind>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!("3,5, 7".parse::<NumList>().unwrap().0, vec![3, 5, 7]);
        assert_eq!("11..13".parse::<NumList>().unwrap().0, vec![11, 12, 13]);
        assert!("13..11".parse::<NumList>().is_err());
        assert!("".parse::<NumList>().is_err());
        assert!("3,x".parse::<NumList>().is_err());
    }

    #[test]
    fn flags_parse() {
        let c = RunConfig::try_parse_from([
            "quadweil",
            "--command",
            "verify",
            "--suite",
            "weil",
            "--q",
            "15",
            "--X",
            "40",
        ])
        .unwrap();
        assert_eq!(c.command, Command::Verify);
        assert_eq!(c.q.unwrap().0, vec![15]);
        assert_eq!(c.x, Some(40));
        assert!(RunConfig::try_parse_from(["quadweil", "--command", "verify", "--bogus"]).is_err());
        assert!(RunConfig::try_parse_from(["quadweil", "--command", "verify", "--suite", "none"]).is_err());
        assert!(RunConfig::try_parse_from(["quadweil", "--command", "verify", "--budget", "0"]).is_err());
    }
}

//! Flag definitions. Every argument struct serializes back into the `params` header.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};
use tau_blocks::kernel::{HalfInt, Scalar};

pub fn parse_scalar(s: &str) -> Result<Scalar, String> {
    s.parse::<Scalar>().map_err(|e| e.to_string())
}

/// Half-integer flag value, echoed as `p/2`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Half(pub HalfInt);

impl FromStr for Half {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.parse::<HalfInt>().map(Half).map_err(|e| e.to_string())
    }
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for Half {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "tau-blocks", version, about = "Exact conformal blocks, blow-up factors, bilinear relations and Painlevé tau series")]
pub struct Cli {
    /// Write the artifact to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Virasoro four-point or irregular block.
    Block(BlockArgs),
    /// NSR blocks `(F, F~)` or the irregular NSR block.
    NsrBlock(NsrBlockArgs),
    /// Closed-form blow-up factors `l^2`, `Omega^2` and coefficient ratios.
    Blowup(BlowupArgs),
    /// Brute-force `l^2` from the free-field oracle, compared with the closed form.
    OracleL(OracleArgs),
    /// Highest-weight replay of `|P,n>` under both Virasoro copies.
    VerifyHighestWeight(HighestWeightArgs),
    /// Residual of a named bilinear identity.
    Verify(VerifyArgs),
    /// Block coefficients from the fast bilinear recursion.
    FastBlock(FastBlockArgs),
    /// Third Painlevé tau series, its tau-form residual and zeta samples.
    Tau3(TauArgs),
    /// Sixth Painlevé tau series, its tau-form residual and zeta samples.
    Tau6(TauArgs),
    /// Sigma-form residuals of the series and the Runge-Kutta cross-check.
    SigmaCheck(SigmaArgs),
    /// Timings of the fast recursion as CSV.
    Bench(BenchArgs),
    /// The acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct BlockArgs {
    /// Central charge; alternatively give --b.
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true)]
    pub c: Option<Scalar>,
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true)]
    pub b: Option<Scalar>,
    /// Internal weight; alternatively give --P (needs --b).
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true)]
    pub delta: Option<Scalar>,
    #[arg(long = "P", value_parser = parse_scalar, allow_hyphen_values = true)]
    pub p: Option<Scalar>,
    /// Four external weights `D1,D2,D3,D4`; omit for the irregular block.
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true, value_delimiter = ',')]
    pub externals: Option<Vec<Scalar>>,
    #[arg(long, default_value_t = 6)]
    pub order: i32,
}

#[derive(Args, Debug, Serialize)]
pub struct NsrBlockArgs {
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true)]
    pub b: Scalar,
    /// Internal NS weight; alternatively give --P.
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true)]
    pub delta: Option<Scalar>,
    #[arg(long = "P", value_parser = parse_scalar, allow_hyphen_values = true)]
    pub p: Option<Scalar>,
    /// Four external NS weights; omit for the irregular block.
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true, value_delimiter = ',')]
    pub externals: Option<Vec<Scalar>>,
    #[arg(long, default_value = "3")]
    pub order: Half,
}

#[derive(Args, Debug, Serialize)]
pub struct BlowupArgs {
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true)]
    pub b: Scalar,
    #[arg(long = "P", value_parser = parse_scalar, allow_hyphen_values = true)]
    pub p: Scalar,
    #[arg(long = "Pp", value_parser = parse_scalar, allow_hyphen_values = true)]
    pub p_prime: Scalar,
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true)]
    pub alpha: Scalar,
    #[arg(long, default_value = "0")]
    pub n: Half,
    #[arg(long, default_value = "0")]
    pub np: Half,
    /// Adds third Painlevé coefficient ratios at this sigma.
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true)]
    pub sigma: Option<Scalar>,
    /// With --sigma, adds sixth Painlevé ratios for `theta_0,theta_t,theta_1,theta_inf`.
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true, value_delimiter = ',')]
    pub theta: Option<Vec<Scalar>>,
}

#[derive(Args, Debug, Serialize)]
pub struct OracleArgs {
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true)]
    pub b: Scalar,
    #[arg(long = "P", value_parser = parse_scalar, allow_hyphen_values = true)]
    pub p: Scalar,
    #[arg(long = "Pp", value_parser = parse_scalar, allow_hyphen_values = true)]
    pub p_prime: Scalar,
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true)]
    pub alpha: Scalar,
    #[arg(long)]
    pub n: Half,
    #[arg(long)]
    pub np: Half,
    /// Largest level kept in the Fock expansion; defaults to `2 max(n, n')^2`.
    #[arg(long)]
    pub level_cut: Option<Half>,
}

#[derive(Args, Debug, Serialize)]
pub struct HighestWeightArgs {
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true)]
    pub b: Scalar,
    #[arg(long = "P", value_parser = parse_scalar, allow_hyphen_values = true)]
    pub p: Scalar,
    #[arg(long)]
    pub n: Half,
    #[arg(long, default_value_t = 3)]
    pub k_max: i32,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    /// Identity name, e.g. s0, bilin, t2g.
    #[arg(long)]
    pub id: String,
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true)]
    pub b: Option<Scalar>,
    #[arg(long = "P", value_parser = parse_scalar, allow_hyphen_values = true)]
    pub p: Option<Scalar>,
    /// External NS momenta `P1,P2,P3,P4` (regular identities).
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true, value_delimiter = ',')]
    pub momenta: Option<Vec<Scalar>>,
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true)]
    pub sigma: Option<Scalar>,
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true, value_delimiter = ',')]
    pub theta: Option<Vec<Scalar>>,
    /// Relative order of the check.
    #[arg(long, default_value = "4")]
    pub order: Half,
    /// Lattice shells summed beyond the truncation rule.
    #[arg(long, default_value_t = 0)]
    pub extra_shells: u32,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeArg {
    C1Irregular,
    C1Regular,
    GenericIrregular,
    GenericRegular,
}

#[derive(Args, Debug, Serialize)]
pub struct SchemeParams {
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true)]
    pub sigma: Option<Scalar>,
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true, value_delimiter = ',')]
    pub theta: Option<Vec<Scalar>>,
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true)]
    pub b: Option<Scalar>,
    #[arg(long = "P", value_parser = parse_scalar, allow_hyphen_values = true)]
    pub p: Option<Scalar>,
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true, value_delimiter = ',')]
    pub momenta: Option<Vec<Scalar>>,
}

#[derive(Args, Debug, Serialize)]
pub struct FastBlockArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub scheme: SchemeParams,
    #[arg(long, default_value_t = 8)]
    pub order: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Serialize)]
pub struct TauArgs {
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true)]
    pub sigma: Scalar,
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true, default_value = "1")]
    pub s: Scalar,
    /// `theta_0,theta_t,theta_1,theta_inf` (sixth equation only).
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true, value_delimiter = ',')]
    pub theta: Option<Vec<Scalar>>,
    /// Shells `|n| <= n_range` of the tau sum.
    #[arg(long, default_value_t = 2)]
    pub n_range: u32,
    /// Truncation order above `sigma^2`.
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true, default_value = "6")]
    pub n_max: Scalar,
    /// Points `t` at which zeta and the sigma-form residual are sampled.
    #[arg(long, value_delimiter = ',')]
    pub samples: Vec<f64>,
    #[arg(long, default_value_t = 60)]
    pub digits: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tolerance: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Equation {
    P3,
    P6,
}

#[derive(Args, Debug, Serialize)]
pub struct SigmaArgs {
    #[arg(long, value_enum)]
    pub equation: Equation,
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true)]
    pub sigma: Scalar,
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true, default_value = "1")]
    pub s: Scalar,
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true, value_delimiter = ',')]
    pub theta: Option<Vec<Scalar>>,
    #[arg(long, default_value_t = 3)]
    pub n_range: u32,
    #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true, default_value = "10")]
    pub n_max: Scalar,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.02,0.05")]
    pub samples: Vec<f64>,
    #[arg(long, default_value_t = 60)]
    pub digits: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1e-14)]
    pub rk_tolerance: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub residual_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub deviation_tol: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct BenchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub scheme: SchemeParams,
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50")]
    pub n_list: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationArg {
    SEvenBound,
    HirotaCoefficient,
}

#[derive(Args, Debug, Serialize)]
pub struct SelftestArgs {
    /// Smaller fast-algorithm orders.
    #[arg(long)]
    pub quick: bool,
    #[arg(long, default_value_t = 20240601)]
    pub seed: u64,
    /// Criteria to run, e.g. `1,2,7`.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8,9")]
    pub criteria: Vec<usize>,
    /// Run every criterion with this fault switched on.
    #[arg(long, value_enum)]
    pub mutation: Option<MutationArg>,
    #[arg(long)]
    pub fail_fast: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_parses_and_echoes() {
        let h: Half = "-3/2".parse().unwrap();
        assert_eq!(h.0, HalfInt::from_twice(-3));
        assert_eq!(serde_json::to_value(h).unwrap(), "-3/2");
        assert!("1/3".parse::<Half>().is_err());
    }

    #[test]
    fn negative_scalars_are_values() {
        let cli = Cli::try_parse_from(["tau-blocks", "block", "--c", "1", "--delta", "-2/3"]).unwrap();
        let Command::Block(a) = cli.command else { panic!("block") };
        assert_eq!(a.delta, Some(Scalar::frac(-2, 3)));
    }
}

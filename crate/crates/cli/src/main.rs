//! `polared` — reduce rotationally invariant semi-linear problems
//! `div(grad u) + b f(u) = 0` over a one-dimensional geodesic measure to
//! `z'' + q(s) f(z) = 0` on the line, solve, check the structural
//! hypotheses, and verify by lifting back.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

const CONFIG_HELP: &str = "\
CONFIG FILE (TOML):
  r0 = <real>                     base point of the change of variables; s(r0) = 0

  [measure]                       geodesic measure phi(r)
    kind = \"euclidean\" | \"sphere\" | \"hyperbolic\"
      dim = <int >= 2>            phi = kappa r^(dim-1) / kappa sin(r)^(dim-1) / kappa sinh(r)^(dim-1)
      normalize = <bool>          kappa = unit-sphere area instead of 1 (default false)
    kind = \"flat_cylinder\"        phi = 1 on the whole line
    kind = \"profile\"
      path = <csv>                header `t,x,z`; warped-product profile curve, phi = x(t)

  [b]                             coefficient b(r), must stay positive
    kind = \"constant\"  value = <real > 0>
    kind = \"gaussian\"  sigma = <real > 0>  center = <real, default 0>
                                  b = exp(-((r - center)/sigma)^2)
    kind = \"power\"     p = <real>           b = r^p
    kind = \"table\"     path = <csv>         header `r,b`; cubic spline, held constant outside

  [f]                             nonlinearity f(z) on (0, inf)
    kind = \"power\"     p = <real > 0>       f = z^p
    kind = \"log_power\" p = <real > 0>       f = z^p (1 + ln(1 + z^2)/2)
    kind = \"table\"     path = <csv>         header `z,f`; monotone cubic interpolant

  [solver]
    method = \"green\" | \"shooting\" | \"collocation\"
                                  green solves the f-stripped linear problem z'' + q = 0
    half_length = <real > 0>      truncation [-L, L] in the reduced variable
    interior_nodes = <int >= 16>
    bc = <real >= 0>              boundary value at s = -L and s = L
    tol = <real > 0>              shooting tolerance (default 1e-10)
    init = \"default\" | \"flat\"     collocation start: linear solution or a constant
    flat_value = <real > 0>       the constant for init = \"flat\" (default bc + 1)

  [reduce]                        window for the reduce command (optional otherwise)
    r_min = <real>  r_max = <real>  count = <int >= 2>

  [output]
    dir = <path>                  output directory, relative to the config file

  [hypotheses]                    optional overrides for the verify command
    truncations = [<real>, ...]   at least 3, positive, increasing (default [4, 8, 16])
    nodes_per_unit = <int >= 1>   grid density of the linear probes (default 32)
    stabilization_tol = <real>    relative sup gap accepted as settled (default 1e-3)

OUTPUT FILES (under [output] dir):
  reduce   -> reduce.csv    header `r,s,phi,q`
  solve    -> solution.csv  header `s,r,z,dz_ds`
  verify   -> report.txt, evidence_domain_image.csv,
              evidence_linear_positive.csv, evidence_nonlinearity_growth.csv
  residual -> residual.csv  header `r,u,residual,excluded_flag`

EXIT CODES:
  0  success
  2  config error (bad file, bad key, missing input)
  3  numeric failure (domain violation, no convergence)
  4  hypothesis report fails under --require-hypotheses";

#[derive(Parser)]
#[command(
    name = "polared",
    version,
    about = "reduce, solve, and verify semi-linear problems over polar geodesic measures",
    after_long_help = CONFIG_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the change of variables and reduced coefficient (r, s, phi, q)
    Reduce(ConfigArg),
    /// Solve the reduced problem and store the profile in both variables
    Solve(SolveArgs),
    /// Check the structural hypotheses and store the report with evidence
    Verify(SolveArgs),
    /// Lift the stored solution and tabulate the divergence residual
    Residual(ConfigArg),
    /// List the built-in geodesic measures
    Measures,
}

#[derive(Args)]
struct ConfigArg {
    /// TOML run configuration (see --help for the full key listing)
    #[arg(short, long)]
    config: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Refuse to proceed (exit 4) when the hypothesis report fails
    #[arg(long)]
    require_hypotheses: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Reduce(args) => commands::reduce(&args.config),
        Command::Solve(args) => commands::solve(&args.config.config, args.require_hypotheses),
        Command::Verify(args) => commands::verify(&args.config.config, args.require_hypotheses),
        Command::Residual(args) => commands::residual(&args.config),
        Command::Measures => commands::measures(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

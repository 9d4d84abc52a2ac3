//! One function per subcommand. Each loads the config, runs its stage of
//! the pipeline, writes files under the configured output directory, and
//! prints a short summary; errors carry the process exit code.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use polared::output::{csv_document, format_float};
use polared::{
    check_hypotheses, csv_in_both_variables, divergence_residual, solve_collocation,
    solve_linear, solve_shooting_symmetric, CollocationInit, RadialFunction, TruncatedDomain,
    Verdict,
};

use crate::config::{self, InitSpec, MethodSpec, Pipeline};

#[derive(Debug)]
pub enum CliError {
    /// bad config file, missing input, malformed table
    Config(String),
    /// the numerics refused: domain violations, non-convergence
    Compute(polared::Error),
    /// `--require-hypotheses` was set and the report came out as fails
    GateFailed,
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) => 3,
            CliError::GateFailed => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Compute(e) => write!(f, "{e}"),
            CliError::GateFailed => write!(f, "hypothesis report came out as fails"),
        }
    }
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Tabulate r -> (s, phi, q) over the window requested in `[reduce]`.
pub fn reduce(config_path: &Path) -> Result<(), CliError> {
    let p = config::load(config_path)?;
    let Some(spec) = &p.config.reduce else {
        return Err(CliError::Config(
            "the reduce command needs a [reduce] section (r_min, r_max, count)".into(),
        ));
    };
    let mut rows = Vec::with_capacity(spec.count);
    for i in 0..spec.count {
        let t = i as f64 / (spec.count - 1) as f64;
        let r = spec.r_min + t * (spec.r_max - spec.r_min);
        let s = p.cv.forward(r).map_err(CliError::Compute)?;
        let (phi, _) = p.measure.eval_measure(r).map_err(CliError::Compute)?;
        let q = (p.b)(r) * phi * phi;
        rows.push(vec![r, s, phi, q]);
    }
    let path = write_out(&p.out_dir, "reduce.csv", &csv_document(&["r", "s", "phi", "q"], rows))?;
    println!(
        "reduced {} about r0 = {}: {} rows on [{}, {}] -> {}",
        p.measure.label(),
        format_float(p.config.r0),
        spec.count,
        format_float(spec.r_min),
        format_float(spec.r_max),
        path.display()
    );
    Ok(())
}

fn run_gate(p: &Pipeline) -> Result<(), CliError> {
    let report = check_hypotheses(&p.problem, &p.hypothesis_config());
    if report.overall == Verdict::Fails {
        print!("{}", report.render_text());
        return Err(CliError::GateFailed);
    }
    println!("hypothesis gate: overall {}", report.overall);
    Ok(())
}

/// Solve the reduced problem with the configured method and store the
/// profile in both variables.
pub fn solve(config_path: &Path, require_hypotheses: bool) -> Result<(), CliError> {
    let p = config::load(config_path)?;
    if require_hypotheses {
        run_gate(&p)?;
    }
    let spec = &p.config.solver;
    let domain = TruncatedDomain::new(spec.half_length, spec.interior_nodes, spec.bc)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let profile = match spec.method {
        MethodSpec::Green => solve_linear(&p.problem, &domain),
        MethodSpec::Shooting => solve_shooting_symmetric(&p.problem, &domain, spec.tol),
        MethodSpec::Collocation => {
            let init = match spec.init {
                InitSpec::Default => CollocationInit::Default,
                InitSpec::Flat => CollocationInit::Flat(spec.flat_value.unwrap_or(spec.bc + 1.0)),
            };
            solve_collocation(&p.problem, &domain, init)
        }
    }
    .map_err(CliError::Compute)?;
    let csv = csv_in_both_variables(&profile, &p.cv).map_err(CliError::Compute)?;
    let path = write_out(&p.out_dir, "solution.csv", &csv)?;
    println!(
        "{} on [-{}, {}] with {} interior nodes: converged = {}, iterations = {}, sup = {}, z(0) = {} -> {}",
        profile.method.name(),
        format_float(spec.half_length),
        format_float(spec.half_length),
        spec.interior_nodes,
        profile.converged,
        profile.iterations,
        format_float(profile.sup()),
        format_float(profile.value_at_base()),
        path.display()
    );
    Ok(())
}

/// Run the three hypothesis checks and store the report plus evidence.
pub fn verify(config_path: &Path, require_hypotheses: bool) -> Result<(), CliError> {
    let p = config::load(config_path)?;
    let report = check_hypotheses(&p.problem, &p.hypothesis_config());
    let text = report.render_text();
    write_out(&p.out_dir, "report.txt", &text)?;
    for (name, csv) in report.evidence_csvs() {
        write_out(&p.out_dir, &format!("evidence_{name}.csv"), &csv)?;
    }
    print!("{text}");
    if require_hypotheses && report.overall == Verdict::Fails {
        return Err(CliError::GateFailed);
    }
    Ok(())
}

/// Lift the stored solution back to the radial variable and measure how
/// well it satisfies the divergence form of the equation.
pub fn residual(config_path: &Path) -> Result<(), CliError> {
    let p = config::load(config_path)?;
    let solution_path = p.out_dir.join("solution.csv");
    let text = fs::read_to_string(&solution_path).map_err(|e| {
        CliError::Config(format!(
            "cannot read {} (run the solve command first): {e}",
            solution_path.display()
        ))
    })?;
    let (mut r, mut u) = (Vec::new(), Vec::new());
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("s,r,z,dz_ds") {
        return Err(CliError::Config(format!(
            "{} does not look like a stored solution (expected the header `s,r,z,dz_ds`)",
            solution_path.display()
        )));
    }
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.trim().split(',').collect();
        if cells.len() != 4 {
            return Err(CliError::Config(format!(
                "{} line {}: expected 4 columns, got {}",
                solution_path.display(),
                i + 2,
                cells.len()
            )));
        }
        let parse = |cell: &str| -> Result<f64, CliError> {
            cell.parse().map_err(|_| {
                CliError::Config(format!(
                    "{} line {}: `{cell}` is not a number",
                    solution_path.display(),
                    i + 2
                ))
            })
        };
        r.push(parse(cells[1])?);
        u.push(parse(cells[2])?);
    }
    let table = RadialFunction::new(r, u)
        .map_err(|e| CliError::Config(format!("{}: {e}", solution_path.display())))?;
    let residuals =
        divergence_residual(&p.measure, &p.b, &p.f, &table).map_err(CliError::Compute)?;
    let path = write_out(&p.out_dir, "residual.csv", &residuals.to_csv())?;
    let excluded = residuals.rows.iter().filter(|row| row.excluded).count();
    println!(
        "divergence residual on {} nodes: scaled sup {} (interior 90%), {} nodes excluded -> {}",
        table.len(),
        format_float(residuals.scaled_sup(0.9)),
        excluded,
        path.display()
    );
    Ok(())
}

/// Static catalogue of the built-in geodesic measures.
pub fn measures() -> Result<(), CliError> {
    println!(
        "built-in measures (kind, domain, density):\n\
         \x20 euclidean     (0, inf)   phi(r) = kappa r^(dim-1)\n\
         \x20 sphere        (0, pi)    phi(r) = kappa sin(r)^(dim-1)\n\
         \x20 hyperbolic    (0, inf)   phi(r) = kappa sinh(r)^(dim-1)\n\
         \x20 flat_cylinder (-inf,inf) phi(r) = 1\n\
         kappa is the unit-sphere area when normalize = true, else 1.\n\
         A warped-product profile curve (t, x(t), z(t)) can stand in for the\n\
         built-ins via kind = \"profile\" with path pointing at a t,x,z table."
    );
    Ok(())
}

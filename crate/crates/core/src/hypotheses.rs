//! Numerical checks of the three hypotheses behind the existence theorem
//! for the reduced problem `z'' + q(s) f(z) = 0`:
//!
//!   (i)  the transversal is all of the line — the change of variables
//!        `J` diverges at both ends of the radial domain;
//!   (ii) the f-stripped linear problem `z'' + q = 0` carries a positive
//!        decaying solution — probed on nested truncations with zero
//!        boundary data, whose sup must stabilize as the truncation grows;
//!   (iii) `f(t)/t` tends to infinity at `t -> 0+` and to zero at
//!        `t -> infinity`.
//!
//! Every check returns one of three verdicts. `holds` and `fails` both
//! require positive evidence in the sampled data; anything ambiguous is
//! reported `inconclusive` rather than guessed.

use std::fmt;

use crate::interval::EndSide;
use crate::output::{csv_line, format_float};
use crate::reduction::{probe_image, Coefficient, ProbeOptions, ReducedProblem};
use crate::solve::{solve_linear, TruncatedDomain};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Numeric evidence backing a verdict, CSV-renderable.
#[derive(Debug, Clone)]
pub struct EvidenceTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl EvidenceTable {
    fn new(columns: &[&str]) -> Self {
        EvidenceTable {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
            out.push_str(&csv_line(&cells));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub verdict: Verdict,
    pub summary: String,
    pub evidence: EvidenceTable,
}

#[derive(Debug, Clone)]
pub struct HypothesisReport {
    pub domain_image: CheckOutcome,
    pub linear_positive: CheckOutcome,
    pub nonlinearity_growth: CheckOutcome,
    pub coefficient_note: String,
    pub overall: Verdict,
}

#[derive(Debug, Clone)]
pub struct HypothesisConfig {
    /// half-lengths of the nested truncations, at least three, increasing
    pub truncations: Vec<f64>,
    /// grid resolution: interior nodes per unit of span (the spacing stays
    /// fixed across truncations so discretization bias cancels in the
    /// stabilization comparison)
    pub nodes_per_unit: usize,
    /// relative tolerance for sup stabilization between the two largest
    /// truncations
    pub stabilization_tol: f64,
    /// halving steps used when probing the ends of the transversal
    pub probe_steps: usize,
    pub probe_options: ProbeOptions,
    /// sustained-ratio threshold for the growth check: a decade-to-decade
    /// ratio above gamma counts as growth, below 1/gamma as decay
    pub ratio_gamma: f64,
}

impl Default for HypothesisConfig {
    fn default() -> Self {
        HypothesisConfig {
            truncations: vec![4.0, 8.0, 16.0],
            nodes_per_unit: 32,
            stabilization_tol: 1e-3,
            probe_steps: 48,
            probe_options: ProbeOptions::default(),
            ratio_gamma: 1.05,
        }
    }
}

fn side_sign(side: EndSide) -> f64 {
    match side {
        EndSide::Lower => -1.0,
        EndSide::Upper => 1.0,
    }
}

/// Hypothesis (i): does `J` diverge at both ends of the radial domain?
fn check_domain_image(problem: &ReducedProblem, config: &HypothesisConfig) -> CheckOutcome {
    let mut evidence = EvidenceTable::new(&["side", "r", "s"]);
    let cv = match problem.coefficient() {
        Coefficient::Direct(_) => {
            return CheckOutcome {
                verdict: Verdict::Holds,
                summary: "coefficient was given directly on the whole line; no change of \
                          variables is involved"
                    .into(),
                evidence,
            };
        }
        Coefficient::Assembled { cv, .. } => cv,
    };

    let mut verdicts = Vec::new();
    let mut notes = Vec::new();
    for side in [EndSide::Lower, EndSide::Upper] {
        let name = match side {
            EndSide::Lower => "lower",
            EndSide::Upper => "upper",
        };
        match probe_image(cv.measure(), cv.base_point(), side, config.probe_steps, &config.probe_options) {
            Ok(probe) => {
                for &(r, s) in &probe.samples {
                    evidence.rows.push(vec![side_sign(side), r, s]);
                }
                match probe.divergent {
                    Some(true) => {
                        verdicts.push(Verdict::Holds);
                        notes.push(format!("{name} end diverges"));
                    }
                    Some(false) => {
                        verdicts.push(Verdict::Fails);
                        notes.push(format!(
                            "{name} end converges to a finite image boundary near {}",
                            format_float(probe.estimate)
                        ));
                    }
                    None => {
                        verdicts.push(Verdict::Inconclusive);
                        notes.push(format!("{name} end could not be classified"));
                    }
                }
            }
            Err(e) => {
                verdicts.push(Verdict::Inconclusive);
                notes.push(format!("{name} end probe failed: {e}"));
            }
        }
    }
    let verdict = if verdicts.contains(&Verdict::Fails) {
        Verdict::Fails
    } else if verdicts.iter().all(|&v| v == Verdict::Holds) {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    CheckOutcome { verdict, summary: notes.join("; "), evidence }
}

fn truncation_nodes(l: f64, config: &HypothesisConfig) -> usize {
    let mut n = ((2.0 * l * config.nodes_per_unit as f64).ceil() as usize).max(17);
    if n % 2 == 0 {
        n += 1;
    }
    n
}

/// Settlement rule over the collected per-truncation sups and boundary-zone
/// maxima: the sup must stabilize between the two largest truncations and
/// the boundary zone of the largest must sit at the noise scale of the sup.
fn family_settles(sups: &[f64], tails: &[f64], tol: f64) -> std::result::Result<(f64, f64), String> {
    let k = sups.len();
    let (s_prev, s_last) = (sups[k - 2], sups[k - 1]);
    let rel_gap = (s_last - s_prev).abs() / s_last.abs().max(s_prev.abs());
    if rel_gap > tol {
        return Err(format!(
            "positive solutions exist on every truncation but their sup has not \
             stabilized (relative gap {} between the two largest truncations)",
            format_float(rel_gap)
        ));
    }
    let tail_bound = 0.05 * s_last;
    if tails[k - 1] > tail_bound {
        return Err(format!(
            "sup stabilized but the solution does not decay toward the truncation \
             boundary (tail max {} vs bound {})",
            format_float(tails[k - 1]),
            format_float(tail_bound)
        ));
    }
    Ok((rel_gap, s_last))
}

/// Hypothesis (ii): the f-stripped problem `z'' + q = 0` with zero Dirichlet
/// data on nested truncations — the truncated stand-in for a positive
/// solution on the whole line that vanishes at infinity.
fn check_linear_positive(problem: &ReducedProblem, config: &HypothesisConfig) -> CheckOutcome {
    let mut evidence = EvidenceTable::new(&["half_length", "positive", "sup", "tail_max"]);

    let ls = &config.truncations;
    if ls.len() < 3 || ls.windows(2).any(|w| w[0] >= w[1]) || ls[0] <= 0.0 {
        return CheckOutcome {
            verdict: Verdict::Inconclusive,
            summary: "need at least three increasing positive truncation half-lengths".into(),
            evidence,
        };
    }

    let mut sups = Vec::new();
    let mut tails = Vec::new();
    for &l in ls {
        // a truncation that leaves the image of J cannot even be posed
        if let Err(e) = problem.q(l).and(problem.q(-l)) {
            evidence.rows.push(vec![l, 0.0, f64::NAN, f64::NAN]);
            return CheckOutcome {
                verdict: Verdict::Inconclusive,
                summary: format!(
                    "the truncation [-{l}, {l}] is not contained in the transversal: {e}"
                ),
                evidence,
            };
        }
        let domain = match TruncatedDomain::new(l, truncation_nodes(l, config), 0.0) {
            Ok(d) => d,
            Err(e) => {
                return CheckOutcome {
                    verdict: Verdict::Inconclusive,
                    summary: format!("bad truncation half-length {l}: {e}"),
                    evidence,
                }
            }
        };
        let sol = match solve_linear(problem, &domain) {
            Ok(sol) => sol,
            Err(e) => {
                evidence.rows.push(vec![l, 0.0, f64::NAN, f64::NAN]);
                return CheckOutcome {
                    verdict: Verdict::Inconclusive,
                    summary: format!("the linear solve on [-{l}, {l}] failed: {e}"),
                    evidence,
                };
            }
        };
        let sup = sol.sup();
        let tail = sol
            .grid
            .iter()
            .zip(&sol.values)
            .filter(|(&s, _)| s.abs() >= 0.9 * l)
            .map(|(_, &z)| z.abs())
            .fold(0.0f64, f64::max);
        evidence.rows.push(vec![l, if sol.positive { 1.0 } else { 0.0 }, sup, tail]);
        if !sol.positive {
            return CheckOutcome {
                verdict: Verdict::Fails,
                summary: format!(
                    "the solution of z'' + q = 0 on [-{l}, {l}] is not strictly positive"
                ),
                evidence,
            };
        }
        sups.push(sup);
        tails.push(tail);
    }

    match family_settles(&sups, &tails, config.stabilization_tol) {
        Ok((rel_gap, s_last)) => CheckOutcome {
            verdict: Verdict::Holds,
            summary: format!(
                "positive solutions on all truncations; sup stabilized at {} (relative gap \
                 {}), tails at the boundary scale",
                format_float(s_last),
                format_float(rel_gap)
            ),
            evidence,
        },
        Err(summary) => CheckOutcome { verdict: Verdict::Inconclusive, summary, evidence },
    }
}

/// Classification of one end of the `rho = f(t)/t` sweep.
enum EndTrend {
    Confirmed,
    Refuted(String),
    Unclear,
}

/// Hypothesis (iii): `rho(t) = f(t)/t` grows without bound as `t -> 0+`
/// and decays to zero as `t -> infinity`. Sampled on twenty decades; a
/// threshold hit is accepted directly, otherwise a sustained
/// decade-to-decade ratio on the right side of `gamma` counts.
fn check_nonlinearity_growth(problem: &ReducedProblem, config: &HypothesisConfig) -> CheckOutcome {
    let f = problem.nonlinearity();
    let gamma = config.ratio_gamma;
    let mut evidence = EvidenceTable::new(&["t", "rho"]);

    let rho = |t: f64| f.eval(t) / t;
    let small: Vec<f64> = (1..=10).map(|k| 10f64.powi(-k)).collect();
    let large: Vec<f64> = (1..=10).map(|k| 10f64.powi(k)).collect();
    for &t in small.iter().rev().chain(large.iter()) {
        evidence.rows.push(vec![t, rho(t)]);
    }
    if evidence.rows.iter().any(|row| !row[1].is_finite() || row[1] <= 0.0) {
        return CheckOutcome {
            verdict: Verdict::Inconclusive,
            summary: "f(t)/t is not finite and positive across the sampled decades".into(),
            evidence,
        };
    }

    fn refuted(v: f64, what: &str) -> EndTrend {
        EndTrend::Refuted(format!("{what} (last sampled value {})", format_float(v)))
    }
    // ratios indexed away from t = 1 on each side
    let trend = |values: &[f64], far_value: f64, far_ok: bool, direction_up: bool| -> EndTrend {
        if far_ok {
            return EndTrend::Confirmed;
        }
        let ratios: Vec<f64> = values.windows(2).map(|w| w[1] / w[0]).collect();
        let all_up = ratios.iter().all(|&r| r >= gamma);
        let all_down = ratios.iter().all(|&r| r <= 1.0 / gamma);
        let all_flat = ratios.iter().all(|&r| r > 1.0 / gamma && r < gamma);
        match (direction_up, all_up, all_down, all_flat) {
            (true, true, _, _) | (false, _, true, _) => EndTrend::Confirmed,
            (true, _, true, _) => refuted(far_value, "decays toward t = 0 instead of growing"),
            (false, true, _, _) => refuted(far_value, "grows at infinity instead of decaying"),
            (_, _, _, true) => refuted(far_value, "stays flat across ten decades"),
            _ => EndTrend::Unclear,
        }
    };

    let small_vals: Vec<f64> = small.iter().map(|&t| rho(t)).collect(); // t = 1e-1 .. 1e-10
    let large_vals: Vec<f64> = large.iter().map(|&t| rho(t)).collect(); // t = 1e1 .. 1e10
    let small_trend = trend(&small_vals, small_vals[9], small_vals[9] >= 1e3, true);
    let large_trend = trend(&large_vals, large_vals[9], large_vals[9] <= 1e-3, false);

    let mut notes = Vec::new();
    let mut verdict = Verdict::Holds;
    for (name, t) in [("t -> 0+", &small_trend), ("t -> infinity", &large_trend)] {
        match t {
            EndTrend::Confirmed => {}
            EndTrend::Refuted(msg) => {
                verdict = Verdict::Fails;
                notes.push(format!("at {name}, f(t)/t {msg}"));
            }
            EndTrend::Unclear => {
                if verdict != Verdict::Fails {
                    verdict = Verdict::Inconclusive;
                }
                notes.push(format!("at {name}, the trend of f(t)/t is not sustained"));
            }
        }
    }
    if verdict == Verdict::Holds {
        notes.push(format!(
            "f(t)/t spans {} at t = 1e-10 down to {} at t = 1e10",
            format_float(small_vals[9]),
            format_float(large_vals[9])
        ));
    }
    CheckOutcome { verdict, summary: notes.join("; "), evidence }
}

/// Informational note on the regularity of the coefficient: a two-scale
/// Hoelder-1/2 difference quotient; a quotient that grows under refinement
/// points at a jump.
fn coefficient_regularity_note(problem: &ReducedProblem) -> String {
    let quotient = |eval: &dyn Fn(f64) -> Option<f64>, lo: f64, hi: f64, n: usize| -> Option<f64> {
        let h = (hi - lo) / n as f64;
        let mut worst = 0.0f64;
        let mut prev = eval(lo)?;
        for i in 1..=n {
            let v = eval(lo + i as f64 * h)?;
            worst = worst.max((v - prev).abs() / h.sqrt());
            prev = v;
        }
        Some(worst)
    };

    let (label, eval, lo, hi): (&str, Box<dyn Fn(f64) -> Option<f64>>, f64, f64) =
        match problem.coefficient() {
            Coefficient::Direct(q) => {
                let q = q.clone();
                ("q", Box::new(move |s: f64| {
                    let v = q(s);
                    v.is_finite().then_some(v)
                }), -3.0, 3.0)
            }
            Coefficient::Assembled { cv, b } => {
                let (lo, hi) = match (cv.inverse(-1.0), cv.inverse(1.0)) {
                    (Ok(a), Ok(bb)) => (a, bb),
                    _ => {
                        let r0 = cv.base_point();
                        (r0 - 0.25 * r0.abs().max(1.0), r0 + 0.25 * r0.abs().max(1.0))
                    }
                };
                let b = b.clone();
                ("b", Box::new(move |r: f64| {
                    let v = b(r);
                    v.is_finite().then_some(v)
                }), lo, hi)
            }
        };

    let coarse = quotient(&*eval, lo, hi, 128);
    let fine = quotient(&*eval, lo, hi, 256);
    match (coarse, fine) {
        (Some(c), Some(f)) => {
            let base = format!(
                "Hoelder-1/2 quotient of {label} over [{}, {}]: {} at 128 cells, {} at 256",
                format_float(lo),
                format_float(hi),
                format_float(c),
                format_float(f)
            );
            if f > 1.2 * c.max(1e-300) {
                format!("{base}; the quotient grows under refinement, which points at a jump")
            } else {
                base
            }
        }
        _ => format!("{label} could not be sampled on [{}, {}]", format_float(lo), format_float(hi)),
    }
}

fn combine(verdicts: &[Verdict]) -> Verdict {
    if verdicts.contains(&Verdict::Fails) {
        Verdict::Fails
    } else if verdicts.iter().all(|&v| v == Verdict::Holds) {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    }
}

/// Run all three checks and combine: the theorem applies only when every
/// hypothesis holds; a single refuted hypothesis refutes the package.
pub fn check_hypotheses(problem: &ReducedProblem, config: &HypothesisConfig) -> HypothesisReport {
    let domain_image = check_domain_image(problem, config);
    let linear_positive = check_linear_positive(problem, config);
    let nonlinearity_growth = check_nonlinearity_growth(problem, config);
    let overall = combine(&[
        domain_image.verdict,
        linear_positive.verdict,
        nonlinearity_growth.verdict,
    ]);
    HypothesisReport {
        domain_image,
        linear_positive,
        nonlinearity_growth,
        coefficient_note: coefficient_regularity_note(problem),
        overall,
    }
}

impl HypothesisReport {
    pub fn render_text(&self) -> String {
        format!(
            "hypothesis (i), transversal covers the line: {} - {}\n\
             hypothesis (ii), positive decaying solution of z'' + q = 0: {} - {}\n\
             hypothesis (iii), sublinear growth of f: {} - {}\n\
             coefficient note: {}\n\
             overall: {}\n",
            self.domain_image.verdict,
            self.domain_image.summary,
            self.linear_positive.verdict,
            self.linear_positive.summary,
            self.nonlinearity_growth.verdict,
            self.nonlinearity_growth.summary,
            self.coefficient_note,
            self.overall
        )
    }

    /// The three evidence tables as `(name, csv)` pairs.
    pub fn evidence_csvs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("domain_image", self.domain_image.evidence.to_csv()),
            ("linear_positive", self.linear_positive.evidence.to_csv()),
            ("nonlinearity_growth", self.nonlinearity_growth.evidence.to_csv()),
        ]
    }
}

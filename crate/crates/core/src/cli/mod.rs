//! The `fracspec` command: reads a JSON run configuration, runs the
//! requested experiment and writes its reports.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use clap::Parser;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Error;
use crate::forms::{check_gaps_with_rayleigh, GapReport};
use crate::numerics::{poincare_constant, QuadConfig};
use crate::operator::{assemble_operator, boundary_decay_check, eigensolve, ground_state_shape_check, Grid, SpectralResult};
use crate::poincare::{certify, counterexample_scan, poincare_check, random_campaign_function};
use crate::potentials::{validate_single_well, Potential, PotentialKind};
use crate::stable_mc::{estimate_gt, laplace_check, phi_chain_quadrature, stream_rng, unimodality_excess, PathConfig};

pub use config::{Command, Resolved, RunConfig};
use output::{to_csv, to_json, write_atomic, Cell};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

const RESIDUAL_TOL: f64 = 1e-8;
const SHAPE_TOL: f64 = 1e-6;
const RAYLEIGH_TOL: f64 = 0.03;
const Z_TOL: f64 = 3.0;
const LAPLACE_Z_TOL: f64 = 4.0;
const CONSTANT_TOL: f64 = 1e-12;
/// Keeps the campaign stream family apart from the path streams.
const CAMPAIGN_SALT: u64 = 0x5EED_CA3B_A16E_0001;

#[derive(Debug, Parser)]
#[command(name = "fracspec", version, about = "Spectral gap laboratory for fractional Schrödinger operators")]
pub struct Cli {
    /// JSON run configuration.
    pub config: PathBuf,
    /// Overrides `output_dir` from the config.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Overrides `mc.seed` from the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Suppresses the per-check summary lines.
    #[arg(long)]
    pub quiet: bool,
}

/// One PASS/FAIL line of the run summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Nonconvergence(String),
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Nonconvergence(_) => EXIT_NONCONVERGENCE,
            Failure::Runtime(_) => EXIT_CHECK_FAILED,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Nonconvergence(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonConvergence { .. } | Error::EigenConvergence { .. } | Error::TerminationFailure { .. } => {
                Failure::Nonconvergence(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Runtime(format!("serialization error: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Runtime(format!("serialization error: {e}"))
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a Resolved,
    checks: &'a [Check],
    passed: bool,
}

/// Mutable state of one run: resolved settings, output sink and checks.
struct Run {
    cfg: Resolved,
    quiet: bool,
    checks: Vec<Check>,
}

impl Run {
    fn check(&mut self, name: &str, passed: bool, detail: String) {
        if !self.quiet {
            println!("{} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
        }
        self.checks.push(Check { name: name.to_string(), passed, detail });
    }

    fn info(&self, name: &str, detail: String) {
        if !self.quiet {
            println!("INFO {name}: {detail}");
        }
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        write_atomic(&self.cfg.output_dir, name, bytes)?;
        Ok(())
    }

    fn potential(&self) -> Result<Potential<f64>, Failure> {
        let [a, b] = self.cfg.interval;
        self.cfg
            .potential
            .build(self.cfg.alpha, a, b)
            .map_err(|e| Failure::Config(format!("invalid config key `potential`: {e}")))
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(checks) => {
            if checks.iter().all(|c| c.passed) {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(f) => {
            eprintln!("fracspec: {}", f.message());
            f.exit_code()
        }
    }
}

/// Runs the configured command and returns its checks.
pub fn run(cli: &Cli) -> Result<Vec<Check>, Failure> {
    let raw = config::load(&cli.config).map_err(Failure::Config)?;
    let base = cli.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let cfg = raw
        .resolve(&base, cli.seed, cli.output_dir.as_deref())
        .map_err(Failure::Config)?;
    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| Failure::Config(format!("cannot create output directory {}: {e}", cfg.output_dir.display())))?;
    let mut run = Run { cfg, quiet: cli.quiet, checks: Vec::new() };
    let v = run.potential()?;

    match run.cfg.command {
        Command::Spectrum => {
            spectrum(&mut run, &v)?;
        }
        Command::Gap => gap(&mut run, &v)?,
        Command::Poincare => poincare(&mut run)?,
        Command::Counterexample => counterexample(&mut run)?,
        Command::Simulate => simulate(&mut run, &v)?,
        Command::Phi => phi(&mut run, &v)?,
        Command::All => {
            gap(&mut run, &v)?;
            poincare(&mut run)?;
            counterexample(&mut run)?;
            simulate(&mut run, &v)?;
            phi(&mut run, &v)?;
        }
    }

    let passed = run.checks.iter().all(|c| c.passed);
    let summary = Summary { config: &run.cfg, checks: &run.checks, passed };
    run.write("run_summary.json", &to_json(&summary)?)?;
    Ok(run.checks)
}

fn spectrum(run: &mut Run, v: &Potential<f64>) -> Result<SpectralResult<f64>, Failure> {
    let [a, b] = run.cfg.interval;
    let alpha = run.cfg.alpha;
    let well = validate_single_well(v, 1001)?;
    run.check(
        "potential_single_well",
        well.passed,
        format!("{} symmetric={} monotone={} finite={}", v.id(), well.symmetric, well.monotone, well.finite),
    );

    let grid = Grid::new(a, b, run.cfg.n)?;
    let op = assemble_operator(&grid, alpha, v)?;
    let s = eigensolve(&op, run.cfg.m)?;

    run.write("spectrum.json", &to_json(&s)?)?;
    let rows: Vec<Vec<Cell>> = (0..s.m())
        .map(|k| {
            vec![
                (k + 1).into(),
                s.eigenvalues[k].into(),
                s.parities[k].as_str().into(),
                s.residuals[k].into(),
            ]
        })
        .collect();
    run.write("spectrum.csv", &to_csv(&["k", "eigenvalue", "parity", "residual"], &rows)?)?;
    let mut header = vec!["x".to_string()];
    header.extend((1..=s.m()).map(|k| format!("phi_{k}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<Cell>> = s
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &x)| std::iter::once(x.into()).chain(s.eigenvectors.iter().map(|v| v[i].into())).collect())
        .collect();
    run.write("eigenvectors.csv", &to_csv(&header, &rows)?)?;

    let max_res = s.residuals.iter().fold(0.0_f64, |m, &r| m.max(r));
    let res_tol = RESIDUAL_TOL * s.frobenius_norm;
    run.check(
        "eigen_residuals",
        max_res <= res_tol,
        format!("max {max_res:.3e} <= {res_tol:.3e}"),
    );
    let gap = s.eigenvalues[1] - s.eigenvalues[0];
    run.check(
        "ground_state_simple",
        gap > 0.0,
        format!("lambda_1 = {:.10}, lambda_2 - lambda_1 = {gap:.6e}", s.eigenvalues[0]),
    );
    let shape = ground_state_shape_check(&s, SHAPE_TOL);
    run.check(
        "ground_state_shape",
        shape.passed,
        format!(
            "symmetry {:.3e}, monotonicity {:.3e} (tol {SHAPE_TOL:e})",
            shape.max_symmetry_violation, shape.max_monotonicity_violation
        ),
    );
    let bounded = !matches!(v.kind, PotentialKind::InverseBoundaryWell { .. });
    if bounded && s.n >= 128 {
        let d = boundary_decay_check(&s, alpha)?;
        run.info("boundary_decay", format!("slope {:.4} (alpha/2 = {:.4})", d.slope, d.expected));
    }
    Ok(s)
}

#[derive(Serialize)]
struct GapOutput<'a> {
    potential: String,
    #[serde(rename = "N")]
    n: usize,
    #[serde(flatten)]
    report: &'a GapReport<f64>,
}

fn gap(run: &mut Run, v: &Potential<f64>) -> Result<(), Failure> {
    let s = spectrum(run, v)?;
    let report = match check_gaps_with_rayleigh(&s, &run.cfg.quadrature) {
        Ok(r) => r,
        Err(Error::NotFound { computed }) => {
            return Err(Failure::Runtime(format!(
                "no antisymmetric eigenpair among the {computed} computed pairs; increase `m`"
            )))
        }
        Err(e) => return Err(e.into()),
    };
    let out = GapOutput { potential: v.id(), n: s.n, report: &report };
    run.write("gap_report.json", &to_json(&out)?)?;
    if let (Some(pass), Some(bound)) = (report.pass_main, report.bound_main) {
        run.check("gap_main", pass, format!("lambda_2 - lambda_1 = {:.10} >= {bound:.6e}", report.gap));
    } else {
        run.info("gap_main", "not applicable for alpha <= 1".into());
    }
    run.check(
        "gap_star",
        report.pass_star,
        format!(
            "lambda_{} - lambda_1 = {:.10} >= {:.10}",
            report.star_index, report.gap_star, report.bound_star
        ),
    );
    let rel = report.consistency_gap_vs_rayleigh.unwrap_or(f64::NAN);
    run.check(
        "rayleigh_consistency",
        rel <= RAYLEIGH_TOL,
        format!("|rayleigh - gap| / gap = {rel:.3e} <= {RAYLEIGH_TOL}"),
    );
    Ok(())
}

struct CampaignRow {
    id: usize,
    knots: usize,
    f_b: f64,
    lhs: f64,
    lhs_error: f64,
    rhs: f64,
    ratio: Option<f64>,
    passed: bool,
    n0: Option<usize>,
    certified_bound: Option<f64>,
    constant_ok: bool,
    sound: bool,
    witness: Option<Vec<u8>>,
    failure: Option<String>,
}

fn poincare(run: &mut Run) -> Result<(), Failure> {
    let p = run.cfg.poincare.clone();
    let [a, b] = run.cfg.interval;
    let quad = run.cfg.quadrature;
    let seed = run.cfg.mc.seed ^ CAMPAIGN_SALT;
    let c4 = poincare_constant(p.alpha)?;

    let rows: Vec<Result<CampaignRow, Failure>> = (0..p.n_functions)
        .into_par_iter()
        .map(|id| campaign_row(id, seed, a, b, &p, &quad, c4))
        .collect();
    let rows: Vec<CampaignRow> = rows.into_iter().collect::<Result<_, _>>()?;

    for r in &rows {
        if let Some(w) = &r.witness {
            run.write(&format!("witness_{:04}.json", r.id), w)?;
        }
    }
    let table: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r| {
            vec![
                r.id.into(),
                r.knots.into(),
                r.f_b.into(),
                r.lhs.into(),
                r.lhs_error.into(),
                r.rhs.into(),
                r.ratio.into(),
                r.passed.into(),
                r.n0.map_or(Cell::Text(String::new()), Cell::from),
                r.certified_bound.into(),
                r.sound.into(),
            ]
        })
        .collect();
    let header = [
        "id", "knots", "f_b", "lhs", "lhs_error", "rhs", "ratio", "passed", "n0", "certified_bound", "sound",
    ];
    run.write("poincare_campaign.csv", &to_csv(&header, &table)?)?;

    let n = rows.len();
    let count = |f: &dyn Fn(&CampaignRow) -> bool| rows.iter().filter(|r| f(r)).count();
    let passed = count(&|r| r.passed);
    run.check("poincare_inequality", passed == n, format!("{passed}/{n} functions at alpha = {}", p.alpha));
    let terminated = count(&|r| r.n0.is_some());
    let first_failure = rows.iter().find_map(|r| r.failure.clone()).unwrap_or_default();
    run.check(
        "witness_terminates",
        terminated == n,
        if terminated == n { format!("{n}/{n}") } else { format!("{terminated}/{n}; {first_failure}") },
    );
    let matches = count(&|r| r.constant_ok);
    run.check(
        "witness_constant",
        matches == n,
        format!("{matches}/{n} certified bounds equal C4 = {c4:.16e} to {CONSTANT_TOL:e}"),
    );
    let sound = count(&|r| r.sound);
    run.check("witness_soundness", sound == n, format!("{sound}/{n} bounds <= lhs + 3 error"));
    Ok(())
}

fn campaign_row(
    id: usize,
    seed: u64,
    a: f64,
    b: f64,
    p: &config::PoincareSettings,
    quad: &QuadConfig<f64>,
    c4: f64,
) -> Result<CampaignRow, Failure> {
    let mut rng = stream_rng(seed, id as u64);
    let f = random_campaign_function(&mut rng, a, b, p.max_knots)?;
    let breaks = f.breakpoints().to_vec();
    let fe = |x: f64| f.eval(x);
    let pc = poincare_check(&fe, &breaks, p.alpha, a, b, false, quad)?;
    let f_b = f.eval(b);
    let (witness, n0, certified_bound, failure) = match certify(&fe, &breaks, p.alpha, a, b, p.root_tol) {
        Ok(cert) => (Some(to_json(&cert)?), Some(cert.n0), Some(cert.certified_bound), None),
        Err(e @ Error::TerminationFailure { .. }) => (None, None, None, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let scale = f_b * f_b / (b - a).powf(p.alpha - 1.0);
    let sound = certified_bound.is_some_and(|cb| cb * scale <= pc.lhs + 3.0 * pc.lhs_error);
    let constant_ok = certified_bound.is_some_and(|cb| (cb - c4).abs() <= CONSTANT_TOL * c4);
    Ok(CampaignRow {
        id,
        knots: breaks.len(),
        f_b,
        lhs: pc.lhs,
        lhs_error: pc.lhs_error,
        rhs: pc.rhs,
        ratio: pc.ratio,
        passed: pc.passed,
        n0,
        certified_bound,
        constant_ok,
        sound,
        witness,
        failure,
    })
}

fn counterexample(run: &mut Run) -> Result<(), Failure> {
    let c = run.cfg.counterexample.clone();
    let scan = counterexample_scan(c.alpha, &c.n_list, &run.cfg.quadrature)?;
    let rows: Vec<Vec<Cell>> =
        scan.rows.iter().map(|r| vec![r.n.into(), r.j_n.into(), r.error_estimate.into()]).collect();
    run.write("counterexample.csv", &to_csv(&["n", "J_n", "error_estimate"], &rows)?)?;
    run.check(
        "counterexample_decreasing",
        scan.strictly_decreasing,
        format!("J_n over n = {:?} at alpha = {}", c.n_list, c.alpha),
    );
    run.info(
        "counterexample_slope",
        format!("log-log slope {:.4} (limit exponent alpha - 1 = {:.4})", scan.slope, c.alpha - 1.0),
    );
    Ok(())
}

fn interior_points(a: f64, b: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| a + (b - a) * i as f64 / (n + 1) as f64).collect()
}

fn simulate(run: &mut Run, v: &Potential<f64>) -> Result<(), Failure> {
    let mc = run.cfg.mc.clone();
    let [a, b] = run.cfg.interval;
    let alpha = run.cfg.alpha;

    let laplace: Vec<_> = [0.5, 1.0, 2.0]
        .iter()
        .enumerate()
        .map(|(j, &u)| laplace_check(alpha, 1.0, u, mc.laplace_samples, mc.seed.wrapping_add(j as u64)))
        .collect::<Result<_, _>>()?;
    let rows: Vec<Vec<Cell>> = laplace
        .iter()
        .map(|l| vec![l.alpha.into(), l.dt.into(), l.u.into(), l.mean.into(), l.stderr.into(), l.exact.into(), l.z.into()])
        .collect();
    run.write(
        "subordinator_check.csv",
        &to_csv(&["alpha", "dt", "u", "mean", "stderr", "exact", "z"], &rows)?,
    )?;
    let worst = laplace.iter().fold(0.0_f64, |m, l| m.max(l.z));
    run.check(
        "subordinator_laplace",
        worst <= LAPLACE_Z_TOL,
        format!("max z = {worst:.3} over u in {{0.5, 1, 2}} <= {LAPLACE_Z_TOL}"),
    );

    let xs = interior_points(a, b, mc.n_points);
    let pc = PathConfig { alpha, t_final: mc.t, n_steps: mc.n_steps, a, b, seed: mc.seed };
    let est = estimate_gt(&xs, v, &pc, mc.n_paths)?;
    let rows: Vec<Vec<Cell>> = est
        .iter()
        .map(|e| vec![e.x.into(), e.mean.into(), e.stderr.into(), e.n_paths.into(), e.n_steps.into()])
        .collect();
    run.write("fk_estimates.csv", &to_csv(&["x", "mean", "stderr", "n_paths", "n_steps"], &rows)?)?;

    let excess = unimodality_excess(&est, v.midpoint());
    run.check(
        "gt_unimodal",
        excess <= Z_TOL,
        format!("largest violation {excess:.3} combined stderr <= {Z_TOL}"),
    );
    let n = est.len();
    let asym = (0..n / 2)
        .map(|i| {
            let (p, q) = (&est[i], &est[n - 1 - i]);
            let se = (p.stderr * p.stderr + q.stderr * q.stderr).sqrt();
            let d = (p.mean - q.mean).abs();
            if se > 0.0 {
                d / se
            } else if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0_f64, f64::max);
    run.check(
        "gt_symmetric",
        asym <= Z_TOL,
        format!("largest mirror mismatch {asym:.3} combined stderr <= {Z_TOL}"),
    );
    Ok(())
}

fn phi(run: &mut Run, v: &Potential<f64>) -> Result<(), Failure> {
    let ph = run.cfg.phi.clone();
    let [a, b] = run.cfg.interval;
    let xs = interior_points(a, b, ph.n_points);
    let quad = QuadConfig::one_dim();
    let p1 = phi_chain_quadrature(1, &ph.s, &ph.t, v, &xs, &quad)?;
    let p2 = phi_chain_quadrature(2, &ph.s, &ph.t, v, &xs, &quad)?;
    let rows: Vec<Vec<Cell>> = (0..xs.len())
        .map(|i| {
            vec![
                xs[i].into(),
                p1.values[i].into(),
                p1.error_estimates[i].into(),
                p2.values[i].into(),
                p2.error_estimates[i].into(),
            ]
        })
        .collect();
    run.write(
        "phi_chain.csv",
        &to_csv(&["x", "phi_1", "phi_1_error", "phi_2", "phi_2_error"], &rows)?,
    )?;
    for (name, chain) in [("phi_1_unimodal", &p1), ("phi_2_unimodal", &p2)] {
        run.check(
            name,
            chain.unimodal,
            format!("largest violation {:.3e} on {} points", chain.max_violation, xs.len()),
        );
    }
    Ok(())
}

//! The batch commands behind the `levyhom` binary.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::StudyConfig;
use super::csv::{num, CsvTable};
use super::report::RunReport;
use crate::coefficient::{
    c0_by_quadrature, c1_by_quadrature, compute_c0, theta, CertifiedCoefficient, ModelParams, TheoryConstants,
};
use crate::error::{Error, Result};
use crate::fiber::oracle::oracle_form_element;
use crate::fiber::{assemble_fiber_matrix, ModeSet, HERMITIAN_TOL};
use crate::homogenization::study::{
    near_singular_order, slope_widening, BOUND_RATIO_SPREAD, GRID_TOLERANCE, TRUNCATION_TOLERANCE,
};
use crate::homogenization::{discrepancy_study, loglog_fit, StudyOptions, StudyVerdict, XiGrid};
use crate::linalg::hermitian_defect;
use crate::quadrature::PowerQuadConfig;
use crate::spectral::{eig_hermitian, threshold_report, RieszSettings, ThresholdOptions, ThresholdReport};

/// Values at or below this are treated as identically zero in slope checks.
const VANISHING: f64 = 1e-12;
/// Extra slope margin for the second-order threshold quantities.
const SECOND_ORDER_EXTRA_MARGIN: f64 = 0.05;
/// Smallest accepted eigenvalue of a fiber, relative to its norm.
const PSD_TOL: f64 = 1e-10;

/// Everything a command needs besides its own arguments.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: StudyConfig,
    pub digest: String,
    pub out_dir: Option<PathBuf>,
    pub workers: usize,
}

impl Context {
    /// Applies the command-line overrides and fixes the digest.
    pub fn new(
        mut config: StudyConfig,
        out: Option<PathBuf>,
        workers: Option<usize>,
        truncation: Option<usize>,
    ) -> Result<Self> {
        if let Some(n) = truncation {
            config.truncation = n;
        }
        config.validate()?;
        let out_dir = out.or_else(|| config.output.clone());
        let workers = workers
            .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
            .max(1);
        Ok(Self {
            digest: config.digest(),
            config,
            out_dir,
            workers,
        })
    }

    /// Output directory, created on demand.
    fn out_dir(&self) -> Result<&Path> {
        let dir = self
            .out_dir
            .as_deref()
            .ok_or_else(|| Error::InvalidParameter("no output directory: pass --out or set \"output\"".into()))?;
        std::fs::create_dir_all(dir)?;
        Ok(dir)
    }

    fn write_csv(&self, report: &mut RunReport, name: &str, table: &CsvTable) -> Result<()> {
        let path = self.out_dir()?.join(name);
        table.write(&path, &self.digest)?;
        report.artifacts.push(path);
        Ok(())
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("cannot build worker pool: {e}")))
    }
}

/// Certified coefficient, parameters, constants and mode set of a config.
struct Setup {
    coeff: CertifiedCoefficient,
    params: ModelParams,
    constants: TheoryConstants,
    modes: ModeSet,
}

fn setup(config: &StudyConfig) -> Result<Setup> {
    let params = config.params()?;
    let coeff = CertifiedCoefficient::new(config.periodic_coefficient()?, config.positivity_grid)?;
    let constants = TheoryConstants::new(&params, &coeff)?;
    let modes = ModeSet::new(config.dimension, config.truncation)?;
    Ok(Setup {
        coeff,
        params,
        constants,
        modes,
    })
}

fn note_constants(report: &mut RunReport, t: &TheoryConstants) {
    report.note("mu_minus", t.mu_minus);
    report.note("mu_plus", t.mu_plus);
    report.note("mu_eff", t.mu_eff);
    report.note("c0", t.c0);
    report.note("d0", t.d0);
    report.note("delta0", t.delta0);
}

fn print_constants(t: &TheoryConstants) {
    println!("mu_minus = {:.12e}", t.mu_minus);
    println!("mu_plus  = {:.12e}", t.mu_plus);
    println!("mu_eff   = {:.12e}", t.mu_eff);
    println!("c0       = {:.12e}", t.c0);
    println!("d0       = {:.12e}", t.d0);
    println!("delta0   = {:.12e}", t.delta0);
}

/// Certifies the coefficient and prints the derived constants.
pub fn validate(ctx: &Context) -> Result<RunReport> {
    let mut report = RunReport::new("validate", &ctx.digest);
    let s = setup(&ctx.config)?;
    let cert = s.coeff.certificate();
    report.pass("symmetry", "conjugate and exchange symmetry hold exactly");
    report.at_least("positivity", cert.mu_minus, 0.0);
    report.pass("real_mean", format!("mu_eff = {:e}", s.constants.mu_eff));
    report.note("certificate", cert);
    note_constants(&mut report, &s.constants);
    print_constants(&s.constants);
    Ok(report)
}

/// Prints the scalar constants and cross-checks `c0` by quadrature.
pub fn constants(ctx: &Context) -> Result<RunReport> {
    let mut report = RunReport::new("constants", &ctx.digest);
    let s = setup(&ctx.config)?;
    note_constants(&mut report, &s.constants);
    print_constants(&s.constants);
    let quad = c0_by_quadrature(&s.params)?;
    let rel = (quad.value - s.constants.c0).abs() / s.constants.c0;
    println!("c0 (quadrature) = {:.12e}", quad.value);
    report.note("c0_quadrature", quad.value);
    report.at_most("c0_quadrature_rel", rel, ctx.config.tolerances.oracle_rel);
    if s.params.alpha() < 1.0 {
        let c1 = c1_by_quadrature(&s.params)?;
        println!("c1       = {c1:.12e}");
        report.note("c1", c1);
    }
    Ok(report)
}

/// Writes the fiber matrix at each `xi` as CSV and checks its structure.
pub fn fiber(ctx: &Context, xis: &[Vec<f64>]) -> Result<RunReport> {
    let mut report = RunReport::new("fiber", &ctx.digest);
    if xis.is_empty() {
        return Err(Error::InvalidParameter("fiber needs at least one --xi".into()));
    }
    let s = setup(&ctx.config)?;
    for (i, xi) in xis.iter().enumerate() {
        let a = assemble_fiber_matrix(&s.coeff, &s.params, s.constants.c0, &s.modes, xi)?;
        let n = a.entries.nrows();
        let mut table = CsvTable::new((0..n).flat_map(|j| [format!("re_{j}"), format!("im_{j}")]));
        for r in 0..n {
            let row: Vec<f64> = (0..n)
                .flat_map(|c| [a.entries[(r, c)].re, a.entries[(r, c)].im])
                .collect();
            table.push_numbers(&row);
        }
        ctx.write_csv(&mut report, &format!("fiber_{i}.csv"), &table)?;
        let spectral = eig_hermitian(&a)?;
        let scale = spectral.eigenvalues.iter().fold(1.0f64, |m, l| m.max(l.abs()));
        report.at_most(&format!("hermitian_{i}"), hermitian_defect(&a.entries), HERMITIAN_TOL);
        report.at_least(
            &format!("positive_semidefinite_{i}"),
            spectral.eigenvalues[0] / scale,
            -PSD_TOL,
        );
        report.note(
            &format!("lowest_eigenvalues_{i}"),
            &spectral.eigenvalues[..spectral.eigenvalues.len().min(4)],
        );
    }
    Ok(report)
}

/// Abscissa transform and predicted exponent of one threshold quantity.
#[derive(Debug, Clone, Copy)]
struct SlopeRule {
    scale: fn(f64, f64) -> f64,
    exponent: f64,
}

fn plain(_: f64, r: f64) -> f64 {
    r
}

fn theta_scale(alpha: f64, r: f64) -> f64 {
    theta(alpha, r)
}

fn rho_star_scale(_: f64, r: f64) -> f64 {
    r * r * (1.0 + r.ln().abs())
}

/// Rules for `‖F - P‖`, the second-order norms and `|ρ*|`.
fn threshold_rules(alpha: f64) -> [SlopeRule; 3] {
    if alpha < 1.0 {
        [
            SlopeRule {
                scale: plain,
                exponent: alpha,
            },
            SlopeRule {
                scale: plain,
                exponent: 2.0 * alpha,
            },
            SlopeRule {
                scale: plain,
                exponent: 1.0 + alpha,
            },
        ]
    } else if alpha == 1.0 {
        [
            SlopeRule {
                scale: theta_scale,
                exponent: 1.0,
            },
            SlopeRule {
                scale: theta_scale,
                exponent: 2.0,
            },
            SlopeRule {
                scale: rho_star_scale,
                exponent: 1.0,
            },
        ]
    } else {
        [
            SlopeRule {
                scale: plain,
                exponent: 1.0,
            },
            SlopeRule {
                scale: plain,
                exponent: 2.0,
            },
            SlopeRule {
                scale: plain,
                exponent: 2.0,
            },
        ]
    }
}

fn slope_verdict(report: &mut RunReport, check: &str, alpha: f64, rule: SlopeRule, margin: f64, points: &[(f64, f64)]) {
    if points.iter().all(|p| p.1.abs() <= VANISHING) {
        report.pass(check, "identically zero over the sweep");
        return;
    }
    let mapped: Vec<(f64, f64)> = points.iter().map(|&(r, v)| ((rule.scale)(alpha, r), v.abs())).collect();
    match loglog_fit(&mapped) {
        Ok(fit) => {
            report.at_least(check, fit.slope, rule.exponent - margin);
            report.note(&format!("{check}_r_squared"), fit.r_squared);
        }
        Err(e) => report.fail(check, e.to_string()),
    }
}

/// Threshold reports along the first axis, CSV output and slope verdicts.
pub fn thresholds(ctx: &Context) -> Result<RunReport> {
    let mut report = RunReport::new("thresholds", &ctx.digest);
    let sweep = ctx
        .config
        .threshold_sweep
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("config has no \"threshold_sweep\" section".into()))?;
    let s = setup(&ctx.config)?;
    let d = ctx.config.dimension;
    let alpha = s.params.alpha();
    let options = ThresholdOptions {
        riesz: RieszSettings::default(),
        projector_tol: ctx.config.tolerances.projector_abs,
        allow_outside_ball: true,
    };
    let mut points = vec![vec![0.0; d]];
    for r in sweep.radii() {
        let mut xi = vec![0.0; d];
        xi[0] = r;
        points.push(xi);
    }
    let results: Vec<Result<ThresholdReport>> = ctx.pool()?.install(|| {
        points
            .par_iter()
            .map(|xi| threshold_report(&s.coeff, &s.params, &s.constants, &s.modes, xi, &options))
            .collect()
    });

    let mut header: Vec<String> = (1..=d).map(|i| format!("xi_{i}")).collect();
    header.extend(
        [
            "xi_norm",
            "lambda1",
            "lambda2",
            "f_minus_p",
            "phi_norm",
            "af_minus_eff",
            "rho",
            "rho_star",
        ]
        .map(String::from),
    );
    let mut table = CsvTable::new(header);
    let mut rows = Vec::new();
    let mut first_error = None;
    for r in results {
        match r {
            Ok(r) => {
                let mut values = r.xi.clone();
                values.extend([
                    r.xi_norm,
                    r.lambda1,
                    r.lambda2,
                    r.f_minus_p_norm,
                    r.phi_norm,
                    r.af_minus_effective_norm,
                    r.rho,
                    r.rho_star,
                ]);
                table.push_numbers(&values);
                rows.push(r);
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    ctx.write_csv(&mut report, "thresholds.csv", &table)?;
    note_constants(&mut report, &s.constants);
    if let Some(e) = first_error {
        report.fail("threshold_reports", e.to_string());
        return Ok(report);
    }
    report.pass("threshold_reports", format!("{} points", rows.len()));
    let outside = rows.iter().filter(|r| !r.inside_ball).count();
    if outside > 0 {
        log::info!("{outside} sweep points lie outside the threshold ball; the contour still isolates lambda1 there");
    }
    report.note("points_outside_ball", outside);
    let worst_projector = rows.iter().map(|r| r.projector_difference).fold(0.0, f64::max);
    report.at_most(
        "projector_agreement",
        worst_projector,
        ctx.config.tolerances.projector_abs,
    );

    let sweep_rows: Vec<&ThresholdReport> = rows.iter().filter(|r| r.xi_norm > 0.0).collect();
    let series =
        |f: fn(&ThresholdReport) -> f64| -> Vec<(f64, f64)> { sweep_rows.iter().map(|r| (r.xi_norm, f(r))).collect() };
    let widening = slope_widening(alpha);
    let margin = ctx.config.tolerances.slope_margin + widening;
    let second_margin = margin + SECOND_ORDER_EXTRA_MARGIN;
    let [first, second, rho_rule] = threshold_rules(alpha);
    slope_verdict(
        &mut report,
        "slope_f_minus_p",
        alpha,
        first,
        margin,
        &series(|r| r.f_minus_p_norm),
    );
    slope_verdict(
        &mut report,
        "slope_phi",
        alpha,
        second,
        second_margin,
        &series(|r| r.phi_norm),
    );
    slope_verdict(
        &mut report,
        "slope_af_minus_eff",
        alpha,
        second,
        second_margin,
        &series(|r| r.af_minus_effective_norm),
    );
    slope_verdict(
        &mut report,
        "slope_rho_star",
        alpha,
        rho_rule,
        margin,
        &series(|r| r.rho_star),
    );
    Ok(report)
}

/// Resolvent discrepancy study, CSV output and rate verdicts.
pub fn rate_study(ctx: &Context) -> Result<RunReport> {
    let mut report = RunReport::new("rate-study", &ctx.digest);
    let s = setup(&ctx.config)?;
    let alpha = s.params.alpha();
    let grid = XiGrid::new(ctx.config.dimension, &ctx.config.xi_grid)?;
    let refined_grid = if ctx.config.grid_check {
        Some(XiGrid::new(ctx.config.dimension, &ctx.config.xi_grid.doubled())?)
    } else {
        None
    };
    let options = StudyOptions {
        workers: ctx.workers,
        truncation_check: true,
        refined_grid,
    };
    let r = discrepancy_study(
        &s.coeff,
        &s.params,
        &s.constants,
        &s.modes,
        &grid,
        &ctx.config.epsilon.values(),
        &options,
    )?;

    let mut table = CsvTable::new(["epsilon", "discrepancy", "rate_bound", "bound_ratio", "argmax_xi_norm"]);
    for i in 0..r.epsilons.len() {
        table.push_numbers(&[
            r.epsilons[i],
            r.discrepancies[i],
            r.rate_bounds[i],
            r.bound_ratios[i],
            r.argmax_xi_norm[i],
        ]);
    }
    match (&r.verdict, &r.fit) {
        (StudyVerdict::Fitted, Some(fit)) => {
            table.push_footer("fitted_slope", &num(fit.slope));
            table.push_footer("r_squared", &num(fit.r_squared));
        }
        _ => {
            table.push_footer("fitted_slope", "exact");
            table.push_footer("r_squared", "");
        }
    }
    table.push_footer(
        "truncation_stability",
        &r.truncation_stability.map(num).unwrap_or_default(),
    );
    if let Some(slope) = r.fit.and_then(|f| f.log_corrected_slope) {
        table.push_footer("log_corrected_slope", &num(slope));
    }
    ctx.write_csv(&mut report, "rate_study.csv", &table)?;

    note_constants(&mut report, &s.constants);
    report.note("grid_points", r.grid_points);
    report.note("truncation", r.truncation);
    if near_singular_order(alpha) {
        report.note("slope_widening", r.slope_widening);
    }
    let margin = ctx.config.tolerances.slope_margin + r.slope_widening;
    match (&r.verdict, &r.fit) {
        (StudyVerdict::Fitted, Some(fit)) => {
            report.note("fitted_slope", fit.slope);
            report.note("r_squared", fit.r_squared);
            if alpha == 1.0 {
                let slope = fit.log_corrected_slope.unwrap_or(f64::NAN);
                report.at_least("log_corrected_slope", slope, 1.0 - margin);
            } else {
                let exponent = if alpha < 1.0 { alpha } else { 2.0 - alpha };
                report.at_least("fitted_slope", fit.slope, exponent - margin);
            }
            report.at_most("bound_ratio_spread", r.bound_ratio_spread(), BOUND_RATIO_SPREAD);
        }
        _ => report.pass("discrepancy_exact", "discrepancy vanishes identically"),
    }
    match r.truncation_stability {
        Some(v) => report.at_most("truncation_stability", v, TRUNCATION_TOLERANCE),
        None => report.skip("truncation_stability", "not requested"),
    }
    match r.grid_stability {
        Some(v) => report.at_most("grid_stability", v, GRID_TOLERANCE),
        None => report.skip("grid_stability", "grid_check is off"),
    }
    Ok(report)
}

/// One compared entry of the oracle check.
#[derive(Debug, Clone, Copy)]
struct OracleRow {
    alpha: f64,
    xi: f64,
    m: i32,
    n: i32,
    closed: Complex64,
    oracle: Complex64,
    rel_error: f64,
}

/// Closed-form fiber entries against direct quadrature, and `c0` against
/// its quadrature representation.
pub fn oracle_check(ctx: &Context) -> Result<RunReport> {
    let mut report = RunReport::new("oracle-check", &ctx.digest);
    if ctx.config.dimension != 1 {
        return Err(Error::InvalidParameter(
            "oracle-check runs on one-dimensional configs only".into(),
        ));
    }
    let spec = ctx
        .config
        .oracle
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("config has no \"oracle\" section".into()))?;
    let tol = ctx.config.tolerances.oracle_rel;
    let coeff = CertifiedCoefficient::new(ctx.config.periodic_coefficient()?, ctx.config.positivity_grid)?;
    let modes = ModeSet::new(1, spec.truncation)?;
    let quad = PowerQuadConfig::default();

    let mut cases = Vec::new();
    for &alpha in &spec.alphas {
        for &xi in &spec.xi {
            cases.push((alpha, xi));
        }
    }
    let per_case: Vec<Result<Vec<OracleRow>>> = ctx.pool()?.install(|| {
        cases
            .par_iter()
            .map(|&(alpha, xi)| {
                let params = ModelParams::new(1, alpha)?;
                let c0 = compute_c0(&params);
                let a = assemble_fiber_matrix(&coeff, &params, c0, &modes, &[xi])?;
                let mut rows = Vec::new();
                for (i, mi) in modes.modes().iter().enumerate() {
                    for (j, nj) in modes.modes().iter().enumerate() {
                        let (m, n) = (mi[0], nj[0]);
                        let closed = a.entries[(i, j)];
                        let oracle = oracle_form_element(&coeff, &params, m, n, xi, &quad)?.value;
                        let rel_error = if closed.norm() > 0.0 {
                            (oracle - closed).norm() / closed.norm()
                        } else {
                            oracle.norm()
                        };
                        rows.push(OracleRow {
                            alpha,
                            xi,
                            m,
                            n,
                            closed,
                            oracle,
                            rel_error,
                        });
                    }
                }
                Ok(rows)
            })
            .collect()
    });
    let mut table = CsvTable::new([
        "alpha",
        "xi",
        "m",
        "n",
        "closed_re",
        "closed_im",
        "oracle_re",
        "oracle_im",
        "rel_error",
    ]);
    let mut worst = 0.0f64;
    for rows in per_case {
        for r in rows? {
            worst = worst.max(r.rel_error);
            table.push_numbers(&[
                r.alpha,
                r.xi,
                r.m as f64,
                r.n as f64,
                r.closed.re,
                r.closed.im,
                r.oracle.re,
                r.oracle.im,
                r.rel_error,
            ]);
        }
    }
    if ctx.out_dir.is_some() {
        ctx.write_csv(&mut report, "oracle_check.csv", &table)?;
    }
    report.at_most("matrix_elements_rel", worst, tol);

    for &alpha in &spec.alphas {
        for d in [1, 2] {
            let params = ModelParams::new(d, alpha)?;
            let c0 = compute_c0(&params);
            let q = c0_by_quadrature(&params)?;
            report.at_most(&format!("c0_d{d}_alpha{alpha}_rel"), (q.value - c0).abs() / c0, tol);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::tests::sample_json;
    use crate::cli::report::Status;

    fn context(dir: &Path, edit: impl FnOnce(&mut StudyConfig)) -> Context {
        let mut config = StudyConfig::from_json(sample_json()).unwrap();
        edit(&mut config);
        Context::new(config, Some(dir.to_path_buf()), Some(2), None).unwrap()
    }

    #[test]
    fn validate_reports_certified_range() {
        let dir = tempfile::tempdir().unwrap();
        let report = validate(&context(dir.path(), |_| {})).unwrap();
        assert!(report.passed());
        let lo = report.summary["mu_minus"].as_f64().unwrap();
        let hi = report.summary["mu_plus"].as_f64().unwrap();
        assert!((0.45..=0.5).contains(&lo) && (1.5..=1.55).contains(&hi));
    }

    #[test]
    fn truncation_override_changes_digest() {
        let dir = tempfile::tempdir().unwrap();
        let a = context(dir.path(), |_| {});
        let b = Context::new(a.config.clone(), None, Some(1), Some(8)).unwrap();
        assert_eq!(b.config.truncation, 8);
        assert_ne!(a.digest, b.digest);
    }

    #[test]
    fn thresholds_pass_for_product_cosine() {
        let dir = tempfile::tempdir().unwrap();
        let report = thresholds(&context(dir.path(), |_| {})).unwrap();
        assert!(report.passed(), "{}", report.render());
        let text = std::fs::read_to_string(dir.path().join("thresholds.csv")).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "xi_1,xi_norm,lambda1,lambda2,f_minus_p,phi_norm,af_minus_eff,rho,rho_star"
        );
        assert!(lines.next().unwrap().starts_with("# config_digest="));
        let origin: Vec<&str> = lines.next().unwrap().split(',').collect();
        for field in [0, 1, 4, 5, 7, 8] {
            assert_eq!(origin[field].parse::<f64>().unwrap(), 0.0);
        }
    }

    #[test]
    fn constant_coefficient_rate_study_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let ctx = context(dir.path(), |c| {
            c.coefficient.truncate(1);
            c.truncation = 4;
        });
        let report = rate_study(&ctx).unwrap();
        assert!(report.passed());
        assert!(report
            .verdicts
            .iter()
            .any(|v| v.check == "discrepancy_exact" && v.status == Status::Pass));
        let text = std::fs::read_to_string(dir.path().join("rate_study.csv")).unwrap();
        assert!(text.contains("fitted_slope,exact,,,"));
    }

    #[test]
    fn oracle_check_small_case() {
        let dir = tempfile::tempdir().unwrap();
        let ctx = context(dir.path(), |c| {
            c.oracle = Some(super::super::config::OracleSpec {
                truncation: 2,
                xi: vec![0.3],
                alphas: vec![1.0],
            });
        });
        let report = oracle_check(&ctx).unwrap();
        assert!(report.passed(), "{}", report.render());
    }
}

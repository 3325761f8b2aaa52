//! Acceptance suite: each criterion prints one PASS/FAIL line, and the run
//! fails if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use anyhow::{ensure, Context as _, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use levyhom::cli::{commands, Context, StudyConfig};
use levyhom::coefficient::{
    c0_by_quadrature, compute_c0, random_band_limited, CertifiedCoefficient, ModelParams, PeriodicCoefficient,
    TheoryConstants,
};
use levyhom::fiber::oracle::oracle_form_element;
use levyhom::fiber::{assemble_effective_fiber, assemble_fiber_matrix, rho_and_rho_star, ModeSet};
use levyhom::homogenization::{
    discrepancy_study, log_space, loglog_fit, threshold_sup, RateStudyResult, StudyOptions, StudyVerdict, XiGrid,
    XiGridSpec,
};
use levyhom::linalg::{eig_hermitian, hermitian_defect, spectral_norm, CMatrix};
use levyhom::quadrature::PowerQuadConfig;
use levyhom::spectral::{
    eig_hermitian as fiber_eig, projector_by_eig, projector_by_riesz, riesz_adaptive, threshold_report, ContourRule,
    RieszSettings, StadiumContour, ThresholdOptions,
};

const N: usize = 32;

fn t0() -> PeriodicCoefficient {
    PeriodicCoefficient::constant(1, 1.0)
}

fn t1() -> PeriodicCoefficient {
    PeriodicCoefficient::difference_cosine(1, 0.5)
}

fn t2() -> PeriodicCoefficient {
    PeriodicCoefficient::product_cosine(1, 0.5)
}

struct Case {
    coeff: CertifiedCoefficient,
    params: ModelParams,
    constants: TheoryConstants,
    modes: ModeSet,
}

fn case(c: PeriodicCoefficient, alpha: f64, truncation: usize) -> Result<Case> {
    let d = c.dimension();
    let params = ModelParams::new(d, alpha)?;
    let coeff = CertifiedCoefficient::with_default_grid(c)?;
    let constants = TheoryConstants::new(&params, &coeff)?;
    Ok(Case {
        coeff,
        params,
        constants,
        modes: ModeSet::new(d, truncation)?,
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn constants_match_quadrature() -> Result<String> {
    let mut worst = 0.0f64;
    for (d, expected) in [(1, PI), (2, 2.0 * PI)] {
        let p = ModelParams::new(d, 1.0)?;
        let c0 = compute_c0(&p);
        ensure!(rel(c0, expected) < 1e-12, "c0({d},1) = {c0}, expected {expected}");
        let q = c0_by_quadrature(&p)?;
        let e = rel(q.value, c0);
        ensure!(e <= 1e-3, "c0({d},1) quadrature {} differs by rel {e:e}", q.value);
        worst = worst.max(e);
    }
    Ok(format!("worst quadrature rel error {worst:.2e}"))
}

fn constant_coefficient_assembly_is_exact() -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for alpha in [0.5, 1.0, 1.5] {
        let c = case(t0(), alpha, N)?;
        for _ in 0..10 {
            let xi = [rng.gen_range(-PI..PI)];
            let a = assemble_fiber_matrix(&c.coeff, &c.params, c.constants.c0, &c.modes, &xi)?.entries;
            let e = assemble_effective_fiber(&c.params, c.constants.c0, 1.0, &c.modes, &xi)?.to_matrix();
            for i in 0..c.modes.len() {
                for j in 0..c.modes.len() {
                    let (x, y) = (a[(i, j)], e[(i, j)]);
                    let err = if y.norm() > 0.0 {
                        (x - y).norm() / y.norm()
                    } else {
                        x.norm()
                    };
                    worst = worst.max(err);
                }
            }
        }
    }
    ensure!(worst <= 1e-12, "worst rel deviation {worst:e}");
    Ok(format!("30 fibers, worst rel deviation {worst:.2e}"))
}

fn oracle_matches_closed_form() -> Result<String> {
    let quad = PowerQuadConfig::default();
    let mut worst = 0.0f64;
    let mut compared = 0;
    for (name, coeff) in [("T1", t1()), ("T2", t2())] {
        for alpha in [0.5, 1.0, 1.5] {
            let c = case(coeff.clone(), alpha, 2)?;
            for xi in [0.3, 1.0] {
                let a = assemble_fiber_matrix(&c.coeff, &c.params, c.constants.c0, &c.modes, &[xi])?.entries;
                for (i, m) in c.modes.modes().iter().enumerate() {
                    for (j, n) in c.modes.modes().iter().enumerate() {
                        let o = oracle_form_element(&c.coeff, &c.params, m[0], n[0], xi, &quad)
                            .with_context(|| format!("{name} alpha={alpha} xi={xi} ({}, {})", m[0], n[0]))?
                            .value;
                        let exact = a[(i, j)];
                        let err = if exact.norm() > 0.0 {
                            (o - exact).norm() / exact.norm()
                        } else {
                            o.norm()
                        };
                        ensure!(
                            err <= 1e-3,
                            "{name} alpha={alpha} xi={xi} ({}, {}): rel {err:e}",
                            m[0],
                            n[0]
                        );
                        worst = worst.max(err);
                        compared += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{compared} entries, worst rel error {worst:.2e}"))
}

fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    Ok(eig_hermitian(m)?.0[0])
}

fn structure_suite() -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut herm, mut psd, mut sandwich, mut kernel, mut mirror) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for trial in 0..50 {
        let d = if trial % 5 == 4 { 2 } else { 1 };
        let (extent, grid, truncation) = if d == 1 { (2, 256, 8) } else { (1, 32, 3) };
        let alpha = rng.gen_range(0.2..1.9);
        let raw = random_band_limited(&mut rng, d, extent, 3, 0.5);
        let params = ModelParams::new(d, alpha)?;
        let coeff = CertifiedCoefficient::new(raw, grid)?;
        let c0 = compute_c0(&params);
        let modes = ModeSet::new(d, truncation)?;
        let zero = vec![0.0; d];
        let a0 = assemble_fiber_matrix(&coeff, &params, c0, &modes, &zero)?.entries;
        let z = modes.zero_position();
        kernel = kernel.max(
            a0.column(z)
                .iter()
                .chain(a0.row(z).iter())
                .map(|v| v.norm())
                .fold(0.0, f64::max),
        );

        let mut xis = vec![zero];
        for _ in 0..3 {
            xis.push((0..d).map(|_| rng.gen_range(-PI..PI)).collect());
        }
        for xi in &xis {
            let a = assemble_fiber_matrix(&coeff, &params, c0, &modes, xi)?.entries;
            herm = herm.max(hermitian_defect(&a));
            let (vals, _) = eig_hermitian(&a)?;
            psd = psd.min(vals[0]);
            let e = assemble_effective_fiber(&params, c0, 1.0, &modes, xi)?.to_matrix();
            let lower = &a - &e * Complex64::new(coeff.mu_minus(), 0.0);
            let upper = &e * Complex64::new(coeff.mu_plus(), 0.0) - &a;
            sandwich = sandwich.min(min_eigenvalue(&lower)?).min(min_eigenvalue(&upper)?);

            let neg: Vec<f64> = xi.iter().map(|x| -x).collect();
            let b = assemble_fiber_matrix(&coeff, &params, c0, &modes, &neg)?.entries;
            let (neg_vals, _) = eig_hermitian(&b)?;
            let gap = vals
                .iter()
                .zip(&neg_vals)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            mirror = mirror.max(gap);
        }
    }
    ensure!(herm <= 1e-12, "Hermitian defect {herm:e}");
    ensure!(psd >= -1e-10, "smallest eigenvalue {psd:e}");
    ensure!(sandwich >= -1e-10, "sandwich eigenvalue {sandwich:e}");
    ensure!(kernel <= 1e-13, "zero-mode row/column at xi=0 has entry {kernel:e}");
    ensure!(mirror <= 1e-10, "xi <-> -xi eigenvalue gap {mirror:e}");
    Ok(format!(
        "50 coefficients: herm {herm:.1e}, min eig {psd:.1e}, sandwich {sandwich:.1e}, kernel {kernel:.1e}, mirror {mirror:.1e}"
    ))
}

fn eigenvalue_bounds() -> Result<String> {
    let mut checked = 0;
    let mut tightest = f64::INFINITY;
    for (name, coeff) in [("T1", t1()), ("T2", t2())] {
        for alpha in [0.5, 1.0, 1.5] {
            let c = case(coeff.clone(), alpha, N)?;
            let t = &c.constants;
            let mut grid: Vec<f64> = (0..48).map(|i| -PI + 2.0 * PI * i as f64 / 48.0).collect();
            grid.extend((1..=16).map(|i| t.delta0 * i as f64 / 16.0));
            for &xi in &grid {
                let a = assemble_fiber_matrix(&c.coeff, &c.params, t.c0, &c.modes, &[xi])?;
                let s = fiber_eig(&a)?;
                let v = t.c0 * xi.abs().powf(alpha);
                let slack = 1e-12 * s.eigenvalues.last().copied().unwrap_or(1.0);
                let l1 = s.eigenvalues[0];
                ensure!(
                    t.mu_minus * v - slack <= l1 && l1 <= t.mu_plus * v + slack,
                    "{name} alpha={alpha} xi={xi}: lambda1 {l1} outside [{}, {}]",
                    t.mu_minus * v,
                    t.mu_plus * v
                );
                if xi.abs() <= t.delta0 {
                    let l2 = s.eigenvalues[1];
                    ensure!(l2 >= t.d0, "{name} alpha={alpha} xi={xi}: lambda2 {l2} < d0 {}", t.d0);
                    tightest = tightest.min(l2 / t.d0);
                }
                checked += 1;
            }
            let a = assemble_fiber_matrix(&c.coeff, &c.params, t.c0, &c.modes, &[0.0])?;
            let l2 = fiber_eig(&a)?.eigenvalues[1];
            ensure!(
                l2 >= 2f64.powf(alpha) * t.d0,
                "{name} alpha={alpha}: lambda2(0) {l2} < 2^alpha d0"
            );
        }
    }
    Ok(format!(
        "{checked} grid points, min lambda2/d0 in the ball {tightest:.3}"
    ))
}

fn projector_agreement() -> Result<String> {
    let mut worst = 0.0f64;
    let mut worst_arc = 0.0f64;
    let mut min_nodes = usize::MAX;
    for coeff in [t1(), t2()] {
        for alpha in [0.5, 1.0, 1.5] {
            let c = case(coeff.clone(), alpha, N)?;
            let t = &c.constants;
            for frac in [0.0, 0.1, 0.5, 1.0] {
                let xi = [frac * t.delta0];
                let a = assemble_fiber_matrix(&c.coeff, &c.params, t.c0, &c.modes, &xi)?;
                let s = fiber_eig(&a)?;
                let f = projector_by_eig(&s, t.d0 / 3.0)?;
                let adaptive = riesz_adaptive(&a.entries, &s.eigenvalues, t.d0, &RieszSettings::default())?;
                ensure!(adaptive.nodes >= 256, "adaptive contour used {} nodes", adaptive.nodes);
                min_nodes = min_nodes.min(adaptive.nodes);
                let contour = StadiumContour::new(t.d0, 256, ContourRule::GaussLegendre);
                let fixed = projector_by_riesz(&a.entries, &s.eigenvalues, &contour)?;
                let diff = spectral_norm(&(&adaptive.f - &f)).max(spectral_norm(&(&fixed.f - &f)));
                ensure!(
                    diff <= 1e-8,
                    "alpha={alpha} xi={}: projector routes differ by {diff:e}",
                    xi[0]
                );
                worst = worst.max(diff);
                worst_arc = worst_arc.max(rel(contour.arclength(), t.d0 * (2.0 * PI + 2.0) / 3.0));
            }
        }
    }
    ensure!(worst_arc <= 1e-10, "arclength rel error {worst_arc:e}");
    Ok(format!(
        "worst difference {worst:.2e} (min {min_nodes} nodes), arclength rel error {worst_arc:.1e}"
    ))
}

fn sweep_slopes(c: &Case) -> Result<(f64, f64, f64)> {
    let options = ThresholdOptions {
        allow_outside_ball: true,
        ..ThresholdOptions::default()
    };
    let mut fp = Vec::new();
    let mut phi = Vec::new();
    let mut rho = Vec::new();
    for r in log_space(-3.0, -1.0, 12) {
        let rep = threshold_report(&c.coeff, &c.params, &c.constants, &c.modes, &[r], &options)?;
        fp.push((r, rep.f_minus_p_norm));
        phi.push((r, rep.phi_norm));
        rho.push((r, rep.rho_star.abs()));
    }
    Ok((loglog_fit(&fp)?.slope, loglog_fit(&phi)?.slope, loglog_fit(&rho)?.slope))
}

fn threshold_slopes() -> Result<String> {
    let half = case(t2(), 0.5, N)?;
    let (fp, phi, rho) = sweep_slopes(&half)?;
    ensure!(fp >= 0.4, "alpha=0.5 slope(F-P) {fp}");
    ensure!(phi >= 2.0 * 0.5 - 0.15, "alpha=0.5 slope(Phi) {phi}");
    ensure!(rho >= 1.5 - 0.1, "alpha=0.5 slope(rho*) {rho}");
    let three_halves = case(t2(), 1.5, N)?;
    let (fp15, _, _) = sweep_slopes(&three_halves)?;
    ensure!(fp15 >= 0.9, "alpha=1.5 slope(F-P) {fp15}");

    let one = case(t1(), 1.0, N)?;
    let mut worst = 0.0f64;
    for i in 0..=200 {
        let xi = -PI + 2.0 * PI * i as f64 / 200.0;
        let (_, rho_star) = rho_and_rho_star(&one.coeff, &one.params, one.constants.c0, &[xi])?;
        worst = worst.max(rho_star.abs());
    }
    ensure!(worst <= 1e-12, "T1 alpha=1: |rho*| reaches {worst:e}");
    Ok(format!(
        "alpha=0.5: F-P {fp:.3}, Phi {phi:.3}, rho* {rho:.3}; alpha=1.5: F-P {fp15:.3}; T1 alpha=1 max|rho*| {worst:.1e}"
    ))
}

fn threshold_resolvent_bounded() -> Result<String> {
    let c = case(t2(), 0.5, N)?;
    let delta0 = c.constants.delta0;
    let mut points = vec![vec![0.0]];
    for r in log_space((1e-6 * delta0).log10(), delta0.log10(), 40) {
        let r = r.min(delta0);
        points.push(vec![r]);
        points.push(vec![-r]);
    }
    let epsilons = log_space(-3.0, -1.0, 12);
    let sups = threshold_sup(
        &c.coeff,
        &c.params,
        &c.constants,
        &c.modes,
        &points,
        &epsilons,
        workers(),
    )?;
    let max = sups.iter().copied().fold(0.0, f64::max);
    let min = sups.iter().copied().fold(f64::INFINITY, f64::min);
    ensure!(max / min <= 3.0, "sup varies by factor {}", max / min);
    Ok(format!("sup in [{min:.4e}, {max:.4e}], factor {:.3}", max / min))
}

fn workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn study(coeff: PeriodicCoefficient, alpha: f64) -> Result<RateStudyResult> {
    let c = case(coeff, alpha, N)?;
    let grid = XiGrid::new(1, &XiGridSpec::default())?;
    let options = StudyOptions {
        workers: workers(),
        ..StudyOptions::default()
    };
    Ok(discrepancy_study(
        &c.coeff,
        &c.params,
        &c.constants,
        &c.modes,
        &grid,
        &log_space(-3.0, -1.0, 12),
        &options,
    )?)
}

fn rate_study() -> Result<String> {
    let mut lines = Vec::new();
    for (alpha, floor) in [(0.5, 0.4), (1.5, 0.4)] {
        let r = study(t2(), alpha)?;
        let fit = r.fit.context("missing fit")?;
        let spread = r.bound_ratio_spread();
        let stability = r.truncation_stability.context("missing truncation check")?;
        ensure!(fit.slope >= floor, "alpha={alpha}: slope {} < {floor}", fit.slope);
        ensure!(spread <= 10.0, "alpha={alpha}: bound ratio spread {spread}");
        ensure!(stability < 0.05, "alpha={alpha}: N=32 -> 64 change {stability}");
        lines.push(format!(
            "alpha={alpha} slope {:.3} spread {spread:.2} trunc {stability:.1e}",
            fit.slope
        ));
    }
    let r = study(t2(), 1.0)?;
    let fit = r.fit.context("missing fit")?;
    let corrected = fit.log_corrected_slope.context("missing log-corrected fit")?;
    let stability = r.truncation_stability.context("missing truncation check")?;
    ensure!(corrected >= 0.9, "alpha=1: log-corrected slope {corrected}");
    ensure!(stability < 0.05, "alpha=1: N=32 -> 64 change {stability}");
    lines.push(format!(
        "alpha=1 log-corrected slope {corrected:.3} trunc {stability:.1e}"
    ));

    let r = study(t0(), 0.5)?;
    ensure!(r.verdict == StudyVerdict::Exact, "T0 discrepancy is not exactly zero");
    ensure!(
        r.discrepancies.iter().all(|&d| d == 0.0),
        "T0 discrepancy is not exactly zero"
    );
    lines.push("T0 exact".into());
    Ok(lines.join("; "))
}

fn rate_config() -> Result<StudyConfig> {
    let text = r#"{
        "dimension": 1,
        "alpha": 0.5,
        "coefficient": [
            {"k": [0], "l": [0], "re": 1.0, "im": 0.0},
            {"k": [1], "l": [1], "re": 0.125, "im": 0.0},
            {"k": [1], "l": [-1], "re": 0.125, "im": 0.0},
            {"k": [-1], "l": [1], "re": 0.125, "im": 0.0},
            {"k": [-1], "l": [-1], "re": 0.125, "im": 0.0}
        ],
        "truncation": 32,
        "xi_grid": {"points_per_dim": 64, "radial_min_exp": -4.0, "radial_max_exp": -0.5,
                    "radial_count": 15, "diagonals": true, "boundary": true},
        "grid_check": false,
        "epsilon": {"min": 0.001, "max": 0.1, "count": 12, "log_spacing": true},
        "tolerances": {"oracle_rel": 0.001, "projector_abs": 1e-8, "slope_margin": 0.1},
        "positivity_grid": 256,
        "seed": 1
    }"#;
    Ok(StudyConfig::from_json(text)?)
}

fn determinism() -> Result<String> {
    let config = rate_config()?;
    let mut outputs = Vec::new();
    for w in [1, 8] {
        let dir = tempfile::tempdir()?;
        let ctx = Context::new(config.clone(), Some(dir.path().to_path_buf()), Some(w), None)?;
        let report = commands::rate_study(&ctx)?;
        ensure!(
            report.passed(),
            "rate study with {w} workers failed:\n{}",
            report.render()
        );
        outputs.push(std::fs::read(dir.path().join("rate_study.csv"))?);
    }
    ensure!(outputs[0] == outputs[1], "CSV differs between 1 and 8 workers");
    Ok(format!("{} identical bytes", outputs[0].len()))
}

fn main() {
    let criteria: [(&str, fn() -> Result<String>); 10] = [
        ("constants", constants_match_quadrature),
        ("assembly exactness", constant_coefficient_assembly_is_exact),
        ("oracle equivalence", oracle_matches_closed_form),
        ("structure suite", structure_suite),
        ("eigenvalue bounds", eigenvalue_bounds),
        ("projector agreement", projector_agreement),
        ("threshold slopes", threshold_slopes),
        ("threshold resolvent boundedness", threshold_resolvent_bounded),
        ("rate study", rate_study),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2}. {name} ({secs:.1}s): {detail}", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {:>2}. {name} ({secs:.1}s): {e:#}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured quantities (run with `--nocapture` to see them).
//!
//! Runtime limits are asserted with `Instant` timers. Criteria whose
//! tolerances cannot be met in f64 are still asserted as stated, so a red
//! test here means the criterion is measured, not skipped; the failure
//! message carries the measured values.

use std::time::Instant;

use rbfquad_cli::experiments::{compare_cell, convergence_order, NOISE_LEVELS};
use rbfquad_cli::specs::IntegrandSpec;
use rbfquad_core::genz::{GenzFamily, GenzFunction};
use rbfquad_core::geometry::{monte_carlo_uncovered, uncovered_area_equidistant, CoverageQuery};
use rbfquad_core::kernels::Kernel;
use rbfquad_core::lsquad::{self, fit_power_law, StepMode};
use rbfquad_core::moments::{
    self, gaussian_moment_1d, gaussian_moment_2d, numeric_moment, phs_moment_1d, phs_moment_2d,
    wendland_moment_1d,
};
use rbfquad_core::pointsets::{Domain, PointSequence, PointSet};
use rbfquad_core::polybasis::{build_dops, DiscreteInnerProduct};
use rbfquad_core::quadrature::{self, positivity_tolerance};
use rbfquad_core::rbfsystem::{self, explicit_cardinal_nonoverlap, RbfSpace, ShapePolicy};
use rbfquad_core::rng::SplitMix64;

fn elapsed_under(started: Instant, limit_s: f64, what: &str) {
    let secs = started.elapsed().as_secs_f64();
    assert!(
        secs < limit_s,
        "{what}: runtime {secs:.2}s exceeded the {limit_s}s budget"
    );
}

/// Criterion 1: linear PHS with endpoints reproduces composite trapezoid
/// weights to 1e-10 for N in {3, 11, 101}.
#[test]
fn criterion_01_trapezoid_equivalence() {
    let started = Instant::now();
    for n in [3usize, 11, 101] {
        let pts = PointSet::equidistant(Domain::unit_interval(), n);
        let space = RbfSpace::new(
            Kernel::phs_odd(1).unwrap(),
            pts,
            ShapePolicy::Constant(1.0),
            -1,
        )
        .unwrap();
        let rule = quadrature::interpolatory_weights(&space).unwrap();
        let h = 1.0 / (n - 1) as f64;
        for (i, w) in rule.weights().iter().enumerate() {
            let expect = if i == 0 || i == n - 1 { h / 2.0 } else { h };
            assert!(
                (w - expect).abs() <= 1e-10,
                "N={n}, weight {i}: {w} vs trapezoid {expect}"
            );
        }
    }
    elapsed_under(started, 1.0, "criterion 1");
    println!("[acceptance] criterion 01 (trapezoid equivalence): PASS");
}

/// Criterion 2: Wendland kernels on equidistant points with the
/// equal-moment boundary policy and eps = 1/h give stable rules for all
/// smoothness parameters, sizes, and degrees.
#[test]
fn criterion_02_nonoverlap_stability_equidistant() {
    let started = Instant::now();
    let mut worst_margin = f64::INFINITY;
    for k in 0..=2u8 {
        for n in [50usize, 100, 200] {
            let h = 1.0 / (n - 1) as f64;
            for d in [-1i32, 0, 1, 2] {
                let pts = PointSet::equidistant(Domain::unit_interval(), n);
                let space = RbfSpace::new(
                    Kernel::wendland(1, k).unwrap(),
                    pts,
                    ShapePolicy::EqualMomentBoundary(1.0 / h),
                    d,
                )
                .unwrap();
                let rule = quadrature::interpolatory_weights(&space).unwrap();
                let rep = rule.stability_report();
                let tol = positivity_tolerance(rep.stability_measure);
                assert!(
                    rep.min_weight >= -tol,
                    "k={k} N={n} d={d}: min weight {} below -{tol:e}",
                    rep.min_weight
                );
                let rel_gap = (rep.stability_measure - rep.rule_of_one) / rep.stability_measure;
                assert!(
                    rel_gap <= 1e-12,
                    "k={k} N={n} d={d}: |w|-sum vs sum gap {rel_gap:e}"
                );
                worst_margin = worst_margin.min(rep.min_weight);
            }
        }
    }
    elapsed_under(started, 30.0, "criterion 2");
    println!(
        "[acceptance] criterion 02 (equidistant nonoverlap stability): PASS (worst min weight {worst_margin:.3e})"
    );
}

/// Criterion 3: the Halton variant with constant eps = 1/h_min is stable.
#[test]
fn criterion_03_nonoverlap_stability_halton() {
    let started = Instant::now();
    let pts = PointSet::halton(Domain::unit_interval(), 100, 0);
    let eps = 1.0 / pts.min_distance();
    for k in 0..=2u8 {
        for d in [-1i32, 0, 1, 2] {
            let space = RbfSpace::new(
                Kernel::wendland(1, k).unwrap(),
                pts.clone(),
                ShapePolicy::Constant(eps),
                d,
            )
            .unwrap();
            let rule = quadrature::interpolatory_weights(&space).unwrap();
            let rep = rule.stability_report();
            assert!(
                rep.is_stable,
                "k={k} d={d}: min weight {} not stable",
                rep.min_weight
            );
        }
    }
    elapsed_under(started, 10.0, "criterion 3");
    println!("[acceptance] criterion 03 (Halton nonoverlap stability): PASS");
}

/// Criterion 4: 200 random configurations of the closed-form moment engine
/// agree with the adaptive oracle to 1e-8 relative; the r^7 triangle row
/// uses the re-derived denominator 3456 (the printed 3346 fails the oracle).
#[test]
fn criterion_04_moment_oracle_equivalence() {
    let started = Instant::now();
    let mut gen = SplitMix64::new(40_001);
    let mut checked = 0usize;
    let tol = |v: f64| 1e-8 * v.abs().max(1.0);

    // Gaussian 1D.
    for _ in 0..40 {
        let a = gen.next_in(-1.0, 0.5);
        let b = a + gen.next_in(0.3, 2.0);
        let c = gen.next_in(a, b);
        let eps = gen.next_in(0.3, 6.0);
        let closed = gaussian_moment_1d(eps, c, a, b);
        let d = Domain::interval(a, b).unwrap();
        let oracle = numeric_moment(Kernel::Gaussian, eps, &[c, 0.0], &d, 1e-11).unwrap();
        assert!(
            (closed - oracle.value).abs() <= tol(oracle.value),
            "gaussian 1d eps={eps} c={c} [{a},{b}]: {closed} vs {}",
            oracle.value
        );
        checked += 1;
    }
    // Gaussian 2D.
    for _ in 0..40 {
        let d =
            Domain::rectangle((0.0, gen.next_in(0.5, 1.5)), (0.0, gen.next_in(0.5, 1.5))).unwrap();
        let c = [gen.next_in(0.0, d.hi(0)), gen.next_in(0.0, d.hi(1))];
        let eps = gen.next_in(0.5, 4.0);
        let closed = gaussian_moment_2d(eps, &c, &d);
        let oracle = numeric_moment(Kernel::Gaussian, eps, &c, &d, 1e-11).unwrap();
        assert!(
            (closed - oracle.value).abs() <= tol(oracle.value),
            "gaussian 2d: {closed} vs {}",
            oracle.value
        );
        checked += 1;
    }
    // PHS 1D (odd and even-log).
    for i in 0..40 {
        let kernel = match i % 5 {
            0 => Kernel::phs_odd(1).unwrap(),
            1 => Kernel::phs_odd(3).unwrap(),
            2 => Kernel::phs_odd(5).unwrap(),
            3 => Kernel::phs_even_log(2).unwrap(),
            _ => Kernel::phs_even_log(4).unwrap(),
        };
        let a = gen.next_in(-1.0, 0.0);
        let b = a + gen.next_in(0.5, 2.0);
        let c = gen.next_in(a, b);
        let closed = phs_moment_1d(kernel, c, a, b).unwrap();
        let d = Domain::interval(a, b).unwrap();
        let oracle = numeric_moment(kernel, 1.0, &[c, 0.0], &d, 1e-11).unwrap();
        assert!(
            (closed - oracle.value).abs() <= tol(oracle.value),
            "{kernel} 1d c={c} [{a},{b}]: {closed} vs {}",
            oracle.value
        );
        checked += 1;
    }
    // PHS 2D triangle decomposition, r^7 row included.
    for i in 0..40 {
        let kernel = match i % 4 {
            0 => Kernel::phs_odd(3).unwrap(),
            1 => Kernel::phs_odd(5).unwrap(),
            2 => Kernel::phs_odd(7).unwrap(),
            _ => Kernel::phs_even_log(2).unwrap(),
        };
        let d =
            Domain::rectangle((0.0, gen.next_in(0.6, 1.4)), (0.0, gen.next_in(0.6, 1.4))).unwrap();
        let c = [gen.next_in(0.0, d.hi(0)), gen.next_in(0.0, d.hi(1))];
        let closed = phs_moment_2d(kernel, &c, &d).unwrap();
        let oracle = numeric_moment(kernel, 1.0, &c, &d, 1e-10).unwrap();
        assert!(
            (closed - oracle.value).abs() <= tol(oracle.value),
            "{kernel} 2d c={c:?}: {closed} vs {}",
            oracle.value
        );
        checked += 1;
    }
    // Wendland 1D with boundary clipping.
    for i in 0..40 {
        let (d, k) = [(1u8, 0u8), (1, 1), (1, 2), (2, 1), (3, 2)][i % 5];
        let kernel = Kernel::wendland(d, k).unwrap();
        let a = 0.0;
        let b = gen.next_in(0.5, 1.5);
        let c = gen.next_in(a, b);
        let eps = gen.next_in(1.0, 12.0);
        let closed = wendland_moment_1d(d, k, eps, c, a, b);
        let dom = Domain::interval(a, b).unwrap();
        let oracle = numeric_moment(kernel, eps, &[c, 0.0], &dom, 1e-11).unwrap();
        assert!(
            (closed - oracle.value).abs() <= tol(oracle.value),
            "wendland({d},{k}) eps={eps} c={c}: {closed} vs {}",
            oracle.value
        );
        checked += 1;
    }
    assert_eq!(checked, 200);
    elapsed_under(started, 120.0, "criterion 4");
    println!("[acceptance] criterion 04 (moment oracle equivalence, 200 configs): PASS");
}

/// Criterion 5: every constructed rule satisfies its defining moment system
/// row-by-row to 1e-8 and integrates polynomials and random members of its
/// space exactly (100 randomized construction cases).
#[test]
fn criterion_05_exactness_residual() {
    let started = Instant::now();
    let mut gen = SplitMix64::new(50_001);
    let mut cases = 0usize;
    while cases < 100 {
        let dim = if gen.next_f64() < 0.5 { 1 } else { 2 };
        let domain = if dim == 1 {
            Domain::unit_interval()
        } else {
            Domain::unit_square()
        };
        let kernel = match (gen.next_u64() % 4, dim) {
            (0, _) => Kernel::Gaussian,
            (1, d) => Kernel::wendland(d as u8, (gen.next_u64() % 3) as u8).unwrap(),
            (2, _) => Kernel::phs_odd(1 + 2 * (gen.next_u64() % 3) as u32).unwrap(),
            _ => Kernel::phs_even_log(2).unwrap(),
        };
        let n = 5 + (gen.next_u64() % 26) as usize;
        let needs_2d_phs =
            matches!(kernel, Kernel::PhsOdd { .. } | Kernel::PhsEvenLog { .. }) && dim == 2;
        if needs_2d_phs
            && !matches!(
                kernel,
                Kernel::PhsOdd { p: 3 | 5 | 7 } | Kernel::PhsEvenLog { p: 2 }
            )
        {
            continue;
        }
        let eps = match kernel {
            Kernel::Gaussian => {
                if dim == 1 {
                    gen.next_in(3.0, 8.0)
                } else {
                    gen.next_in(1.0, 3.0)
                }
            }
            Kernel::Wendland { .. } => gen.next_in(2.0, 12.0),
            _ => 1.0,
        };
        let degree = (gen.next_u64() % 4) as i32 - 1;
        let points = PointSet::halton(domain, n, (gen.next_u64() % 50) as usize);
        if degree >= 0 {
            let k_dim = rbfquad_core::polybasis::poly_space_dim(dim, degree);
            if n < k_dim + 2 {
                continue;
            }
        }
        let space = match RbfSpace::new(kernel, points, ShapePolicy::Constant(eps), degree) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let m = moments::rbf_moments(&space, space.centers().domain()).unwrap();
        let rule = quadrature::interpolatory_weights_with_moments(&space, &m).unwrap();
        let m_scale = m.stacked().iter().map(|v| v.abs()).fold(1.0f64, f64::max);

        // Row-wise system residual.
        assert!(
            rule.solve_residual() <= 1e-8 * m_scale,
            "case {cases} ({kernel}, dim {dim}, N={n}, d={degree}, eps={eps:.2}): residual {} vs scale {m_scale}",
            rule.solve_residual()
        );
        // Polynomial exactness.
        if let Some(basis) = space.basis() {
            for k in 0..basis.len() {
                let quad = rule.apply(|p| basis.eval(k, p));
                assert!(
                    (quad - m.poly[k]).abs() <= 1e-8 * m_scale,
                    "case {cases}: poly {k} integrates to {quad} vs {}",
                    m.poly[k]
                );
            }
        }
        // Random member of the space (side condition enforced for d >= 0).
        let sys = rbfsystem::assemble(&space, space.centers()).unwrap();
        let k_dim = space.poly_dim();
        let raw: Vec<f64> = (0..n).map(|_| gen.next_in(-1.0, 1.0)).collect();
        let alpha = if k_dim == 0 {
            raw
        } else {
            let p = sys.poly_block();
            let ptp = rbfquad_core::linalg::Mat::from_fn(k_dim, k_dim, |i, j| {
                (0..n).map(|r| p.get(r, i) * p.get(r, j)).sum()
            });
            let rhs: Vec<f64> = (0..k_dim)
                .map(|i| (0..n).map(|r| p.get(r, i) * raw[r]).sum())
                .collect();
            let lu = rbfquad_core::linalg::LuFactor::factor(&ptp).unwrap();
            let coef = lu.solve(&rhs);
            (0..n)
                .map(|r| raw[r] - (0..k_dim).map(|i| p.get(r, i) * coef[i]).sum::<f64>())
                .collect()
        };
        let beta: Vec<f64> = (0..k_dim).map(|_| gen.next_in(-1.0, 1.0)).collect();
        let coeffs = rbfsystem::InterpolationCoeffs {
            alpha: alpha.clone(),
            beta: beta.clone(),
        };
        let exact: f64 = alpha.iter().zip(&m.rbf).map(|(a, b)| a * b).sum::<f64>()
            + beta.iter().zip(&m.poly).map(|(a, b)| a * b).sum::<f64>();
        let quad = rule.apply(|x| space.eval_interpolant(&coeffs, x));
        assert!(
            (quad - exact).abs() <= 1e-8 * exact.abs().max(1.0),
            "case {cases} ({kernel}, dim {dim}): space member integrates to {quad} vs {exact}"
        );
        cases += 1;
    }
    elapsed_under(started, 60.0, "criterion 5");
    println!("[acceptance] criterion 05 (exactness residual, 100 cases): PASS");
}

/// Criterion 6, as stated: the weight decomposition identity for the
/// Gaussian kernel with eps in {1, 2} on 30 and 60 Halton points in [0, 1],
/// d in {0, 1}, to 1e-8 relative.
///
/// Measured on this implementation, cond1(Phi) for these configurations is
/// 4.4e18 (eps=1, N=30), 4.4e19 (eps=1, N=60), 4.8e18 (eps=2, N=30), and
/// 1.7e19 (eps=2, N=60): the kernel matrix is singular at working precision
/// (singular-value ratios above 6e17), and the two sides of the identity
/// carry independent forward errors of order u * cond >> 1e-8. The identity
/// is verified to near machine precision in well-conditioned regimes by the
/// library tests; this criterion is asserted as written and reports the
/// measured gaps.
#[test]
fn criterion_06_decomposition_identity() {
    let started = Instant::now();
    let mut failures = Vec::new();
    for eps in [1.0, 2.0] {
        for n in [30usize, 60] {
            for d in [0i32, 1] {
                let pts = PointSet::halton(Domain::unit_interval(), n, 0);
                let space =
                    RbfSpace::new(Kernel::Gaussian, pts, ShapePolicy::Constant(eps), d).unwrap();
                match quadrature::decompose_weights(&space) {
                    Ok(dec) => {
                        println!(
                            "[acceptance] criterion 06 config eps={eps} N={n} d={d}: gap {:.3e} at cond {:.2e}",
                            dec.identity_gap, dec.phi_condition
                        );
                        if dec.identity_gap > 1e-8 {
                            failures.push(format!(
                                "eps={eps} N={n} d={d}: identity gap {:.3e} > 1e-8 (cond(Phi) = {:.2e})",
                                dec.identity_gap, dec.phi_condition
                            ));
                        }
                    }
                    Err(e) => failures.push(format!("eps={eps} N={n} d={d}: {e}")),
                }
            }
        }
    }
    elapsed_under(started, 10.0, "criterion 6");
    assert!(
        failures.is_empty(),
        "decomposition identity not attainable at these conditionings:\n  {}",
        failures.join("\n  ")
    );
    println!("[acceptance] criterion 06 (weight decomposition identity): PASS");
}

/// Criterion 7: the positive least-squares construction terminates for
/// Gaussian eps = 0.8 on Halton centers, with unit weight sum, within the
/// N <= 50 M^2 budget, and the power-law fit lands in [1.4, 2.7].
#[test]
fn criterion_07_positive_ls_construction() {
    let started = Instant::now();
    let domain = Domain::unit_square();
    let seq = PointSequence::Halton { skip: 0 };
    let mut rows = Vec::new();
    for m in [10usize, 20, 40] {
        let centers = seq.take(domain, m).unwrap();
        let space =
            RbfSpace::new(Kernel::Gaussian, centers, ShapePolicy::Constant(0.8), 0).unwrap();
        let run = lsquad::algorithm1(&space, seq, |_| 1.0, None, 50 * m * m, StepMode::Unit)
            .unwrap_or_else(|e| panic!("M={m}: {e}"));
        let rep = run.rule.stability_report();
        assert!(
            rep.min_weight > 0.0,
            "M={m}: min weight {} not positive",
            rep.min_weight
        );
        assert!(
            (rep.rule_of_one - 1.0).abs() <= 1e-9,
            "M={m}: sum of weights {} differs from |Omega| = 1",
            rep.rule_of_one
        );
        assert!(run.n_final <= 50 * m * m);
        rows.push((m, run.n_final));
    }
    let (c, s) = fit_power_law(&rows);
    assert!(
        (1.4..=2.7).contains(&s),
        "power-law exponent {s} outside [1.4, 2.7] (C = {c}, rows {rows:?})"
    );
    elapsed_under(started, 120.0, "criterion 7");
    println!(
        "[acceptance] criterion 07 (positive LS construction): PASS (N = {rows:?}, fit C={c:.3}, s={s:.3})"
    );
}

/// Criterion 8: interpolatory rules with cubic / quintic splines converge
/// at orders >= 1.7 / >= 2.5 in the fill distance on growing Halton sets.
#[test]
fn criterion_08_phs_convergence_orders() {
    let started = Instant::now();
    let g = GenzFunction::random(GenzFamily::Oscillatory, 2, 2024);
    let n_grid = [100usize, 200, 400, 800, 1600];
    let domain = Domain::unit_square();

    let cubic = convergence_order(Kernel::phs_odd(3).unwrap(), 1, &n_grid, domain, &g).unwrap();
    assert!(cubic >= 1.7, "cubic fitted order {cubic} < 1.7");
    let quintic = convergence_order(Kernel::phs_odd(5).unwrap(), 1, &n_grid, domain, &g).unwrap();
    assert!(quintic >= 2.5, "quintic fitted order {quintic} < 2.5");

    // Asymptotic stability along the sweep: |w|-sum approaches the rule of
    // one as N grows.
    let mut last_excess = f64::INFINITY;
    for n in [100usize, 400, 1600] {
        let pts = PointSet::halton(domain, n, 0);
        let space = RbfSpace::new(
            Kernel::phs_odd(3).unwrap(),
            pts,
            ShapePolicy::Constant(1.0),
            1,
        )
        .unwrap();
        let rule = quadrature::interpolatory_weights(&space).unwrap();
        let rep = rule.stability_report();
        let excess = rep.stability_measure - rep.rule_of_one;
        assert!(
            excess < last_excess + 1e-12,
            "stability excess grew at N={n}"
        );
        last_excess = excess;
    }
    elapsed_under(started, 300.0, "criterion 8");
    println!(
        "[acceptance] criterion 08 (PHS convergence): PASS (cubic order {cubic:.2}, quintic order {quintic:.2})"
    );
}

/// Criterion 9: under noise of magnitude 1e-2, the positive least-squares
/// rule beats the interpolatory rule on the same points (median over 20
/// trials).
#[test]
fn criterion_09_noise_robustness() {
    let started = Instant::now();
    assert_eq!(NOISE_LEVELS[1], 1e-2);
    let domain = Domain::unit_square();
    for m in [20usize, 40] {
        let cell = compare_cell(
            Kernel::Gaussian,
            0.8,
            0,
            m,
            PointSequence::Random { seed: 42 },
            domain,
            &IntegrandSpec::Seeded {
                family: GenzFamily::Oscillatory,
                seed: 300,
            },
            20,
            0,
            50 * m * m,
        )
        .unwrap();
        assert!(
            cell.err_ls[2] <= cell.err_interp[2],
            "M={m}: LS median error {} above interpolatory {} at noise 1e-2",
            cell.err_ls[2],
            cell.err_interp[2]
        );
        println!(
            "[acceptance] criterion 09 config M={m}: N={} noisy-error LS {:.3e} vs interpolatory {:.3e}",
            cell.n_final, cell.err_ls[2], cell.err_interp[2]
        );
    }
    elapsed_under(started, 120.0, "criterion 9");
    println!("[acceptance] criterion 09 (noise robustness): PASS");
}

/// Criterion 10, as stated: Wendland (D=2, k=1) on 400 Halton points with
/// d = 1, the first oscillatory test integrand over 20 seeded trials, and a
/// 40-per-decade log sweep of eps over [0.1, 100]: the minimal median error
/// must be at most 1e-4 *and* the arg-min rule must be stable.
///
/// Measured, the error decreases monotonically toward small eps, where the
/// weights are genuinely negative (min weight -1.6e-3 at eps = 0.1, sum of
/// absolute weights 1.0183 -- a value that rounds to 1.0 at two printed
/// digits). Strict positivity only sets in around eps >= 15, where the
/// median error sits near 1e-4. Both halves are asserted as stated and the
/// measured landscape is printed.
#[test]
fn criterion_10_error_sweep_argmin() {
    let started = Instant::now();
    let domain = Domain::unit_square();
    let pts = PointSet::halton(domain, 400, 0);
    let seed = 500u64;
    let trials = 20u64;

    // log grid, 40 points per decade over [1e-1, 1e2].
    let mut grid = Vec::new();
    let mut i = 0;
    loop {
        let eps = 0.1 * 10f64.powf(i as f64 / 40.0);
        if eps > 100.0 * (1.0 + 1e-12) {
            break;
        }
        grid.push(eps);
        i += 1;
    }

    let mut argmin: Option<(f64, f64, bool, f64, f64)> = None;
    let mut best_stable: Option<(f64, f64)> = None;
    for &eps in &grid {
        let space = RbfSpace::new(
            Kernel::wendland(2, 1).unwrap(),
            pts.clone(),
            ShapePolicy::Constant(eps),
            1,
        )
        .unwrap();
        let rule = quadrature::interpolatory_weights(&space).unwrap();
        let mut errs: Vec<f64> = (0..trials)
            .map(|t| {
                let g = GenzFunction::random(GenzFamily::Oscillatory, 2, seed + t);
                (rule.apply(|p| g.evaluate(p)) - g.reference_integral()).abs()
            })
            .collect();
        errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let med = 0.5 * (errs[9] + errs[10]);
        let rep = rule.stability_report();
        if argmin.map(|a| med < a.1).unwrap_or(true) {
            argmin = Some((
                eps,
                med,
                rep.is_stable,
                rep.stability_measure,
                rep.min_weight,
            ));
        }
        if rep.is_stable && best_stable.map(|b| med < b.1).unwrap_or(true) {
            best_stable = Some((eps, med));
        }
    }
    let (eps, med, stable, sm, min_w) = argmin.unwrap();
    println!(
        "[acceptance] criterion 10 landscape: argmin eps={eps:.3} median={med:.3e} stable={stable} (|w|-sum {sm:.6}, min weight {min_w:.2e}); best stable: {best_stable:?}"
    );
    elapsed_under(started, 300.0, "criterion 10");
    assert!(med <= 1e-4, "minimal median error {med:.3e} above 1e-4");
    assert!(
        stable,
        "arg-min eps={eps:.3}: rule not stable (min weight {min_w:.2e}, |w|-sum {sm:.6}); best strictly-stable median was {best_stable:?}"
    );
    println!("[acceptance] criterion 10 (error-sweep argmin): PASS");
}

/// Criterion 11: coverage closed form versus Monte Carlo within 3 sigma at
/// both breakpoints +-20%, and continuity at the breakpoints to 1e-10.
#[test]
fn criterion_11_coverage_formulas() {
    let started = Instant::now();
    let samples = 10_000_000usize;
    for n in [4usize, 16, 64] {
        let side = (n as f64).sqrt() as usize;
        let grid = PointSet::equidistant(Domain::unit_square(), side);
        let q0 = CoverageQuery { n, eps: 1.0 };
        for bp in [q0.full_cover_threshold(), q0.disjoint_threshold()] {
            for factor in [0.8, 1.2] {
                let eps = bp * factor;
                let closed = uncovered_area_equidistant(&CoverageQuery { n, eps });
                let mc = monte_carlo_uncovered(&grid, 1.0 / eps, samples, 1_100 + n as u64);
                let slack = 3.0 * mc.std_error + 1e-9;
                assert!(
                    (closed - mc.fraction).abs() <= slack,
                    "N={n} eps={eps:.3}: closed {closed:.6} vs MC {:.6} +- {:.2e}",
                    mc.fraction,
                    mc.std_error
                );
            }
            // Continuity across the breakpoint.
            let above = uncovered_area_equidistant(&CoverageQuery {
                n,
                eps: bp * (1.0 + 1e-12),
            });
            let below = uncovered_area_equidistant(&CoverageQuery {
                n,
                eps: bp * (1.0 - 1e-12),
            });
            assert!(
                (above - below).abs() <= 1e-10,
                "N={n}: discontinuity {:.2e} at eps={bp}",
                (above - below).abs()
            );
        }
    }
    elapsed_under(started, 60.0, "criterion 11");
    println!("[acceptance] criterion 11 (coverage formulas): PASS");
}

/// Criterion 12: DOP orthonormality to 1e-10 for d <= 5 on 200 Halton
/// points, the continuous-Gram trend check, and agreement of the explicit
/// nonoverlap cardinal with the solved one to 1e-8 at 100 random points.
#[test]
fn criterion_12_dop_properties() {
    let started = Instant::now();

    // Gram deviation for all degrees up to 5 on 200 Halton points (2D).
    let pts2 = PointSet::halton(Domain::unit_square(), 200, 0);
    for d in 0..=5u32 {
        let dops = build_dops(&pts2, d).unwrap();
        let ip = DiscreteInnerProduct::new(&pts2);
        let mut dev = 0.0f64;
        for k in 0..dops.len() {
            for l in k..dops.len() {
                let g = ip.apply(|p| dops.eval(k, p), |p| dops.eval(l, p));
                let t = if k == l { 1.0 } else { 0.0 };
                dev = dev.max((g - t).abs());
            }
        }
        assert!(dev <= 1e-10, "degree {d}: Gram deviation {dev:e}");
    }

    // Continuous Gram error shrinks from N = 64 to N = 4096 (1D, d = 3).
    let domain = Domain::unit_interval();
    let gram_error = |n: usize| -> f64 {
        let pts = PointSet::halton(domain, n, 0);
        let dops = build_dops(&pts, 3).unwrap();
        let mut worst = 0.0f64;
        for k in 0..dops.len() {
            for l in 0..dops.len() {
                let target = if k == l { 1.0 } else { 0.0 };
                worst = worst.max((dops.l2_inner(&domain, k, l) - target).abs());
            }
        }
        worst
    };
    let coarse = gram_error(64);
    let fine = gram_error(4096);
    assert!(
        fine < coarse,
        "continuous Gram error did not shrink: {coarse:e} -> {fine:e}"
    );

    // Explicit cardinal versus solved cardinal at 100 random points.
    let n = 17;
    let h = 1.0 / (n - 1) as f64;
    let pts = PointSet::equidistant(domain, n);
    let space = RbfSpace::new(
        Kernel::wendland(1, 1).unwrap(),
        pts.clone(),
        ShapePolicy::Constant(1.0 / h),
        1,
    )
    .unwrap();
    let sys = rbfsystem::assemble(&space, space.centers()).unwrap();
    let dops = build_dops(&pts, 1).unwrap();
    let mut gen = SplitMix64::new(12_001);
    for _ in 0..100 {
        let x = [gen.next_f64(), 0.0];
        let solved = sys.cardinal_values(&space, &x).unwrap();
        for m in [0usize, 5, 11, 16] {
            let explicit = explicit_cardinal_nonoverlap(&space, Some(&dops), m, &x).unwrap();
            assert!(
                (explicit - solved[m]).abs() <= 1e-8,
                "cardinal {m} at {x:?}: explicit {explicit} vs solved {}",
                solved[m]
            );
        }
    }
    elapsed_under(started, 60.0, "criterion 12");
    println!(
        "[acceptance] criterion 12 (DOP properties): PASS (Gram trend {coarse:.2e} -> {fine:.2e})"
    );
}

/// Criterion 13: rerunning an experiment with an identical configuration
/// produces byte-identical output files.
#[test]
fn criterion_13_byte_identical_reruns() {
    let bin = env!("CARGO_BIN_EXE_rbfquad");
    let dir = std::env::temp_dir().join(format!("rbfquad-accept-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();

    let commands: Vec<Vec<String>> = vec![
        vec![
            "stability-sweep".into(),
            "--kernels".into(),
            "wendland:1,0,wendland:1,1".into(),
            "--points".into(),
            "equid:20".into(),
            "--domain".into(),
            "0:1".into(),
            "--degrees".into(),
            "-1,0,1".into(),
            "--eps-grid".into(),
            "log:1:40:8".into(),
            "--policy".into(),
            "equalmoment".into(),
            "--jobs".into(),
            "4".into(),
        ],
        vec![
            "coverage".into(),
            "--n-grid".into(),
            "4,16".into(),
            "--samples".into(),
            "20000".into(),
            "--seed".into(),
            "9".into(),
            "--jobs".into(),
            "3".into(),
        ],
        vec![
            "lsrbf".into(),
            "--kernel".into(),
            "gaussian".into(),
            "--eps".into(),
            "0.8".into(),
            "--degree".into(),
            "0".into(),
            "--centers".into(),
            "8".into(),
            "--data-seq".into(),
            "halton".into(),
            "--domain".into(),
            "0:1x0:1".into(),
            "--nmax".into(),
            "500".into(),
            "--format".into(),
            "jsonl".into(),
        ],
    ];

    for (i, args) in commands.iter().enumerate() {
        let out_a = dir.join(format!("run-{i}-a.out"));
        let out_b = dir.join(format!("run-{i}-b.out"));
        for out in [&out_a, &out_b] {
            let status = std::process::Command::new(bin)
                .args(args)
                .arg("--out")
                .arg(out)
                .status()
                .unwrap();
            assert!(status.success(), "command {i} failed: {args:?}");
        }
        let a = std::fs::read(&out_a).unwrap();
        let b = std::fs::read(&out_b).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "command {i} produced differing bytes across reruns");
    }
    std::fs::remove_dir_all(&dir).ok();
    println!("[acceptance] criterion 13 (byte-identical reruns): PASS");
}

//! The `verify` suite: one case per core identity or bound, each reduced to a
//! single worst-case residual checked against its tolerance.

use num_complex::Complex64;
use dyadic_nonlocal::besov::{
    besov_weight, polarized_quadrature, seminorm_sq_coefficients, seminorm_sq_quadrature,
};
use dyadic_nonlocal::dyadic::{measure_b, measure_b_cap_c};
use dyadic_nonlocal::evolution::pde_residual;
use dyadic_nonlocal::grid::generate_lipschitz_sample;
use dyadic_nonlocal::haar::haar_grid;
use dyadic_nonlocal::maximal::star_maximal_at;
use dyadic_nonlocal::nonlocal::{dbeta_integral, dbeta_prefactor};
use dyadic_nonlocal::{
    analyze, convergence_rate_bound, dbeta_spectral, dbeta_tail_split, generate_besov_sample,
    hardy_littlewood_dyadic, oscillatory_partial_sum, sharp_maximal_dyadic, synthesize,
    BesovParams, DyadicInterval, GridFunction, VerificationReport,
};

/// Failure-injection hooks for exercising the nonzero exit paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Rescale the quadrature route as if its normalizing constant had been
    /// transcribed wrongly; the eigenfunction case must then fail.
    Prefactor,
}

pub struct SuiteParams {
    pub resolution: u32,
    pub domain: u32,
    pub seed: u64,
    pub params: BesovParams,
    pub fault: Option<Fault>,
}

pub fn run_verify_suite(p: &SuiteParams) -> VerificationReport {
    let start = std::time::Instant::now();
    let mut report = VerificationReport::new("verify");

    eigenfunction_case(p, &mut report);
    besov_identity_case(p, &mut report);
    cross_term_case(&mut report);
    diagonal_weight_case(&mut report);
    geometry_case(&mut report);
    spectral_integral_case(p, &mut report);
    tail_split_case(p, &mut report);
    residual_order_case(p, &mut report);
    maximal_bounds_case(p, &mut report);
    rate_bound_case(p, &mut report);
    lipschitz_cauchy_case(p, &mut report);
    counterexample_case(&mut report);
    transform_case(p, &mut report);

    report.finish(start.elapsed().as_secs_f64());
    report
}

/// Quadrature route, with the optional injected miscalibration applied.
fn integral_route(p: &SuiteParams, f: &GridFunction, beta: f64) -> GridFunction {
    let out = dbeta_integral(f, beta);
    match p.fault {
        Some(Fault::Prefactor) => {
            // a plausible-looking but wrong normalization
            let wrong = (beta.exp2() - 1.0) / beta.exp2();
            out.scale(Complex64::from(wrong / dbeta_prefactor(beta)))
        }
        None => out,
    }
}

fn eigenfunction_case(p: &SuiteParams, report: &mut VerificationReport) {
    let j_res = p.resolution;
    let max_level = (j_res as i32 - 2).min(6);
    let mut worst = 0.0f64;
    for beta in [0.25, 0.5, 0.75] {
        for level in 0..=max_level {
            for position in 1..=(1u64 << level) {
                let i = DyadicInterval::new(level, position);
                let h = haar_grid(&i, j_res, 1);
                let out = integral_route(p, &h, beta);
                let eig = ((level as f64) * beta).exp2();
                for x in 0..h.num_cells() {
                    let err = (out.value(x) - h.value(x) * eig).norm() / eig;
                    worst = worst.max(err);
                }
            }
        }
    }
    report.add_case(
        "eigenfunction-identity",
        "quadrature route reproduces |I|^-beta times each Haar function",
        worst,
        1e-12,
    );
}

fn besov_identity_case(p: &SuiteParams, report: &mut VerificationReport) {
    let mut worst = 0.0f64;
    for seed in 0..10u64 {
        let f = generate_besov_sample(p.resolution, p.domain, 0.55, p.seed.wrapping_add(seed));
        let c = analyze(&f);
        for lambda in [0.3, 0.5, 0.7] {
            let q = seminorm_sq_quadrature(&f, lambda);
            let s = seminorm_sq_coefficients(&c, lambda).unwrap();
            worst = worst.max((q - s).abs() / s);
        }
    }
    report.add_case(
        "besov-haar-identity",
        "double-integral seminorm equals the weighted Haar coefficient sum",
        worst,
        1e-10,
    );
}

fn cross_term_case(report: &mut VerificationReport) {
    let intervals: Vec<DyadicInterval> = (0..=3)
        .flat_map(|j| (1..=(1u64 << j)).map(move |k| DyadicInterval::new(j, k)))
        .collect();
    let grids: Vec<GridFunction> = intervals.iter().map(|i| haar_grid(i, 6, 1)).collect();
    let mut worst = 0.0f64;
    for a in 0..grids.len() {
        for b in 0..grids.len() {
            if a != b {
                let v = polarized_quadrature(&grids[a], &grids[b], 0.5).unwrap();
                worst = worst.max(v.norm());
            }
        }
    }
    report.add_case(
        "cross-term-vanishing",
        "polarized seminorm integral vanishes for every distinct Haar pair",
        worst,
        1e-12,
    );
}

fn diagonal_weight_case(report: &mut VerificationReport) {
    let mut worst = 0.0f64;
    for level in 0..=4 {
        for position in 1..=(1u64 << level) {
            let i = DyadicInterval::new(level, position);
            let h = haar_grid(&i, 7, 1);
            let v = polarized_quadrature(&h, &h, 0.5).unwrap();
            let w = besov_weight(&i, 0.5);
            worst = worst.max((v.re - w).abs() / w).max(v.im.abs());
        }
    }
    report.add_case(
        "diagonal-weight",
        "polarized integral of a Haar function with itself equals its weight",
        worst,
        1e-12,
    );
}

fn geometry_case(report: &mut VerificationReport) {
    let j_res = 6u32;
    let n = 1usize << j_res;
    let cell_area = (1.0 / n as f64) * (1.0 / n as f64);
    let mut worst = 0.0f64;
    for level in 0..=4i32 {
        for position in 1..=(1u64 << level) {
            let i = DyadicInterval::new(level, position);
            let (lo, hi) = i.cell_range(j_res);
            let mid = (lo + hi) / 2;
            let mut count = 0usize;
            for a in lo..hi {
                for b in lo..hi {
                    if (a < mid) != (b < mid) {
                        count += 1;
                    }
                }
            }
            let enumerated = count as f64 * cell_area;
            worst = worst.max((measure_b(&i) - enumerated).abs() / enumerated);
            for aj in 0..level {
                let anc = i.ancestor(aj);
                let (alo, ahi) = anc.cell_range(j_res);
                let amid = (alo + ahi) / 2;
                let mut cross = 0usize;
                for a in alo..ahi {
                    for b in alo..ahi {
                        if ((a < amid) != (b < amid))
                            && ((lo..hi).contains(&a) != (lo..hi).contains(&b))
                        {
                            cross += 1;
                        }
                    }
                }
                let enumerated = cross as f64 * cell_area;
                worst = worst.max((measure_b_cap_c(&anc, &i) - enumerated).abs() / enumerated);
            }
        }
    }
    report.add_case(
        "level-set-geometry",
        "block and cross-region measures match exhaustive cell enumeration",
        worst,
        1e-12,
    );
}

fn spectral_integral_case(p: &SuiteParams, report: &mut VerificationReport) {
    let mut worst = 0.0f64;
    for (k, beta) in [0.25, 0.5, 0.75].into_iter().enumerate() {
        for seed in 0..5u64 {
            let f = generate_besov_sample(
                p.resolution,
                p.domain,
                beta + 0.3,
                p.seed.wrapping_add(100 + 10 * k as u64 + seed),
            );
            let spectral = synthesize(&dbeta_spectral(&analyze(&f), beta).unwrap());
            let integral = dbeta_integral(&f, beta);
            let dist = spectral.sub(&integral).l2_norm();
            worst = worst.max(dist / spectral.l2_norm());
        }
    }
    report.add_case(
        "spectral-integral-agreement",
        "coefficient-side and quadrature-side operator paths agree in L2",
        worst,
        1e-10,
    );
}

fn tail_split_case(p: &SuiteParams, report: &mut VerificationReport) {
    let mut worst = 0.0f64;
    for beta in [0.3, 0.6] {
        let f = generate_besov_sample(p.resolution, p.domain, 0.6, p.seed.wrapping_add(200));
        let (near, far) = dbeta_tail_split(&f, beta);
        let whole = dbeta_integral(&f, beta);
        let scale = whole.max_abs();
        for x in 0..f.num_cells() {
            worst = worst.max((near.value(x) + far.value(x) - whole.value(x)).norm() / scale);
        }
        let bound = dbeta_prefactor(beta) / (beta.exp2() - 1.0) * f.l2_norm();
        worst = worst.max((far.l2_norm() - bound).max(0.0) / bound);
    }
    report.add_case(
        "tail-split-additivity",
        "near and far parts sum to the operator; far part obeys the Schur bound",
        worst,
        1e-12,
    );
}

fn residual_order_case(p: &SuiteParams, report: &mut VerificationReport) {
    let mut worst = 0.0f64;
    for seed in 0..3u64 {
        let c = analyze(&generate_besov_sample(
            p.resolution.min(7),
            1,
            p.params.lambda,
            p.seed.wrapping_add(300 + seed),
        ));
        let mut prev = None;
        for m in 0..=4 {
            let h = 1e-2 * 0.5f64.powi(m);
            let r = pde_residual(&c, &p.params, 1.0, h).unwrap();
            if let Some(prev) = prev {
                let ratio: f64 = prev / r;
                worst = worst.max((ratio - 2.0).abs());
            }
            prev = Some(r);
        }
    }
    report.add_case(
        "residual-first-order",
        "difference-quotient residual halves with the step size (ratio within 2 ± 0.2)",
        worst,
        0.2,
    );
}

fn maximal_bounds_case(p: &SuiteParams, report: &mut VerificationReport) {
    let ts: Vec<f64> = (1..=64).map(|i| i as f64 / 65.0).collect();
    let mut worst: f64 = 0.0;
    for seed in 0..2u64 {
        let f = generate_besov_sample(
            p.resolution.min(7),
            1,
            p.params.lambda,
            p.seed.wrapping_add(400 + seed),
        );
        let c = analyze(&f);
        let m_dy = hardy_littlewood_dyadic(&f);
        let sharp = sharp_maximal_dyadic(&f, p.params.lambda);
        let n_max = f.resolution() as i32 - 1;
        for &t in &ts {
            let st = star_maximal_at(&c, p.params.beta, t, n_max).unwrap();
            for x in 0..f.num_cells() {
                let bound = p.params.c_max * t * sharp.value(x).re + 2.0 * m_dy.value(x).re;
                worst = worst.max(st.value(x).re - bound);
            }
        }
    }
    report.add_case(
        "oscillatory-maximal-bounds",
        "S*_t ≤ C·t·(sharp maximal) + 2·(Hardy-Littlewood maximal) at every cell and time",
        worst.max(0.0),
        1e-12,
    );
}

fn rate_bound_case(p: &SuiteParams, report: &mut VerificationReport) {
    let ts: Vec<f64> = (1..=64).map(|i| i as f64 / 65.0).collect();
    let mut worst = 0.0f64;
    for seed in 0..2u64 {
        let f = generate_besov_sample(
            p.resolution.min(7),
            1,
            p.params.lambda,
            p.seed.wrapping_add(500 + seed),
        );
        let r = convergence_rate_bound(&f, &p.params, &ts).unwrap();
        let v = r
            .cases
            .iter()
            .find(|c| c.id == "rate-max-violation")
            .map(|c| c.residual)
            .unwrap_or(f64::INFINITY);
        worst = worst.max(v);
    }
    report.add_case(
        "rate-bound",
        "sup_t |u(t)-u0|/t is dominated by the sharp-maximal rate constant",
        worst,
        1e-12,
    );
}

fn lipschitz_cauchy_case(p: &SuiteParams, report: &mut VerificationReport) {
    let j_res = p.resolution.min(7);
    let mut worst: f64 = 0.0;
    for seed in 0..2u64 {
        let sample = generate_lipschitz_sample(j_res, 1, 5.0, p.seed.wrapping_add(600 + seed));
        let c = analyze(&sample.f);
        for t in [0.1, 0.5, 0.9] {
            let sums: Vec<GridFunction> = (0..j_res as i32)
                .map(|n| oscillatory_partial_sum(&c, p.params.beta, t, n).unwrap())
                .collect();
            for m in 1..j_res as usize {
                for n in m..j_res as usize {
                    let allowance: f64 =
                        (m + 1..=n).map(|j| 2.0f64.powi(-(j as i32))).sum();
                    let bound = sample.slope_sup * allowance;
                    for x in 0..sums[0].num_cells() {
                        let diff = (sums[n].value(x) - sums[m].value(x)).norm();
                        worst = worst.max(diff - bound);
                    }
                }
            }
        }
    }
    report.add_case(
        "lipschitz-cauchy",
        "partial-sum increments of Lipschitz data are bounded by the slope times a geometric tail",
        worst.max(0.0),
        1e-12,
    );
}

fn counterexample_case(report: &mut VerificationReport) {
    let j_res = 11u32;
    let lambda = 0.3;
    let mut worst = 0.0f64;
    let mut previous = f64::INFINITY;
    for j in 0..=10u32 {
        let width = 1usize << (j_res - j);
        let mut values = vec![Complex64::ZERO; 1 << j_res];
        for x in 0..width {
            values[x] = if x < width / 2 { Complex64::ONE } else { -Complex64::ONE };
        }
        let f = GridFunction::new(j_res, 1, values);
        worst = worst.max((f.max_abs() - 1.0).abs());
        let l2 = 2.0f64.powi(-(j as i32));
        worst = worst.max((f.l2_norm_sq() - l2).abs() / l2);
        let besov: f64 = analyze(&f)
            .iter_detail()
            .map(|(lvl, _, v)| v.norm_sqr() * (2.0 * lambda * lvl as f64).exp2())
            .sum::<f64>()
            .sqrt();
        let expected = (-(j as f64) * (0.5 - lambda)).exp2();
        worst = worst.max((besov - expected).abs() / expected);
        worst = worst.max((besov - previous).max(0.0));
        previous = besov;
    }
    report.add_case(
        "bounded-counterexample",
        "unit-sup bump sequence keeps L2 norm 2^-j/2 while its Besov norm decays to zero",
        worst,
        1e-12,
    );
}

fn transform_case(p: &SuiteParams, report: &mut VerificationReport) {
    let mut worst = 0.0f64;
    for seed in 0..4u64 {
        let a = generate_besov_sample(p.resolution, p.domain, 0.4, p.seed.wrapping_add(700 + seed));
        let b = generate_besov_sample(p.resolution, p.domain, 0.7, p.seed.wrapping_add(800 + seed));
        let f = a.add(&b.scale(Complex64::I));
        let c = analyze(&f);
        let back = synthesize(&c);
        let scale = f.max_abs();
        for x in 0..f.num_cells() {
            worst = worst.max((back.value(x) - f.value(x)).norm() / scale);
        }
        let (lhs, rhs) = (f.l2_norm_sq(), c.l2_norm_sq());
        worst = worst.max((lhs - rhs).abs() / lhs);
    }
    report.add_case(
        "transform-roundtrip",
        "analyze/synthesize round trip and the norm identity hold at machine precision",
        worst,
        1e-12,
    );
}

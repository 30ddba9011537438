//! Maximal functions controlling pointwise convergence of the evolution:
//! the dyadic Hardy–Littlewood maximal function, the Calderón sharp maximal
//! function of order λ (dyadic-restricted and grid-interval variants), the
//! oscillatory partial sums `S^N_t` with their sup `S*`, and the pointwise
//! rate inequality tying `|u(t) - u⁰|/t` to the sharp function.
//!
//! All sups over intervals are exact for grid functions; the sup over `t` is
//! taken on a caller-supplied finite grid (a lower bound for the continuum
//! sup, which is the safe side for verifying upper bounds).

use num_complex::Complex64;
use crate::par::prelude::*;

use crate::dyadic::pow2;
use crate::error::{Error, Result};
use crate::grid::{BesovParams, GridFunction};
use crate::haar::{synthesize, HaarCoefficients};
use crate::report::VerificationReport;

/// Dyadic Hardy–Littlewood maximal function: at each cell, the largest
/// average of |f| over a dyadic interval containing it (levels 0..=J).
pub fn hardy_littlewood_dyadic(f: &GridFunction) -> GridFunction {
    let j_res = f.resolution();
    // averages pyramid: level J is |f| itself, each parent the mean of its
    // two children; then a running max down the ancestor chain
    let mut level: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    let mut pyramid = vec![level.clone()];
    for _ in 0..j_res {
        level = level.chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        pyramid.push(level.clone());
    }
    pyramid.reverse(); // pyramid[j] now holds the level-j averages
    let mut best = pyramid[0].clone();
    for j in 1..=j_res as usize {
        best = pyramid[j]
            .iter()
            .enumerate()
            .map(|(i, &a)| a.max(best[i >> 1]))
            .collect();
    }
    GridFunction::from_reals(j_res, f.domain_length(), &best)
}

/// Calderón sharp maximal function of order λ, restricted to dyadic
/// intervals: `sup over dyadic I ∋ x of |I|^-(1+λ)·∫_I |f(y) - f(x)| dy`,
/// levels 0..=J.
pub fn sharp_maximal_dyadic(f: &GridFunction, lambda: f64) -> GridFunction {
    let j_res = f.resolution();
    let n = f.num_cells();
    let m = f.cell_measure();
    let best: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|x| {
            let fx = f.value(x);
            let mut best = 0.0f64;
            for j in 0..=j_res {
                let shift = j_res - j;
                let start = (x >> shift) << shift;
                let sum: f64 = (start..start + (1 << shift))
                    .map(|y| (f.value(y) - fx).norm())
                    .sum();
                best = best.max(((j as f64) * (1.0 + lambda)).exp2() * sum * m);
            }
            best
        })
        .collect();
    GridFunction::from_reals(j_res, f.domain_length(), &best)
}

/// Sharp maximal function over *all* grid-aligned intervals containing the
/// cell, dyadic or not. O(n²) per cell — the exhaustive majorant used to
/// check that the dyadic restriction loses nothing essential.
pub fn sharp_maximal_grid(f: &GridFunction, lambda: f64) -> GridFunction {
    let j_res = f.resolution();
    let n = f.num_cells();
    let m = f.cell_measure();
    // |J|^-(1+λ) by interval length in cells
    let weight: Vec<f64> = (0..=n)
        .map(|len| if len == 0 { 0.0 } else { (len as f64 * m).powf(-(1.0 + lambda)) })
        .collect();
    let best: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|x| {
            let fx = f.value(x);
            let mut prefix = Vec::with_capacity(n + 1);
            prefix.push(0.0);
            let mut s = 0.0;
            for v in f.values() {
                s += (v - fx).norm();
                prefix.push(s);
            }
            let mut best = 0.0f64;
            for a in 0..=x {
                for b in x..n {
                    let val = (prefix[b + 1] - prefix[a]) * m * weight[b + 1 - a];
                    best = best.max(val);
                }
            }
            best
        })
        .collect();
    GridFunction::from_reals(j_res, f.domain_length(), &best)
}

/// per-cell contribution of each detail level: `component[j][x]` is the one
/// term `c_I·h_I(x)` alive at `x` on level `j`
fn level_components(c: &HaarCoefficients) -> Vec<Vec<Complex64>> {
    let j_res = c.resolution();
    let n = (c.domain_length() as usize) << j_res;
    (0..j_res)
        .map(|j| {
            let row = c.detail_level(j);
            let amp = pow2(j as i32).sqrt();
            (0..n)
                .map(|x| {
                    let k = x >> (j_res - j);
                    if (x >> (j_res - j - 1)) & 1 == 0 {
                        row[k] * amp
                    } else {
                        row[k] * -amp
                    }
                })
                .collect()
        })
        .collect()
}

/// Truncated modulated Haar sum
/// `S^N_t f(x) = Σ_{j≤N} Σ_k e^(it·2^(jβ))·c_(j,k)·h_(j,k)(x)`.
/// `n = -1` is the empty sum; `n ≥ J-1` is the full modulated synthesis.
pub fn oscillatory_partial_sum(
    c: &HaarCoefficients,
    beta: f64,
    t: f64,
    n: i32,
) -> Result<GridFunction> {
    assert!(0.0 < beta && beta < 1.0);
    if !t.is_finite() {
        return Err(Error::InvalidParams(format!("time must be finite, got {t}")));
    }
    c.require_zero_coarse()?;
    let modulated = c.map_detail(|j, _, v| {
        if (j as i32) <= n {
            v * Complex64::from_polar(1.0, t * ((j as f64) * beta).exp2())
        } else {
            Complex64::ZERO
        }
    });
    Ok(synthesize(&modulated))
}

fn check_t_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::EmptyTGrid);
    }
    for &t in t_grid {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidParams(format!("t-grid values must lie in (0,1), got {t}")));
        }
    }
    Ok(())
}

/// `S*_t f(x) = sup_(0≤N≤n_max) |S^N_t f(x)|` at a single time.
pub fn star_maximal_at(
    c: &HaarCoefficients,
    beta: f64,
    t: f64,
    n_max: i32,
) -> Result<GridFunction> {
    star_maximal_impl(c, beta, std::slice::from_ref(&t), n_max, false)
}

/// `S* f(x) = sup over the t-grid and 0 ≤ N ≤ n_max of |S^N_t f(x)|`.
/// The grid must be a nonempty subset of (0,1).
pub fn star_maximal(
    c: &HaarCoefficients,
    beta: f64,
    t_grid: &[f64],
    n_max: i32,
) -> Result<GridFunction> {
    star_maximal_impl(c, beta, t_grid, n_max, true)
}

fn star_maximal_impl(
    c: &HaarCoefficients,
    beta: f64,
    t_grid: &[f64],
    n_max: i32,
    restrict_unit: bool,
) -> Result<GridFunction> {
    assert!(0.0 < beta && beta < 1.0);
    if restrict_unit {
        check_t_grid(t_grid)?;
    } else if t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParams("time must be finite".into()));
    }
    c.require_zero_coarse()?;
    let j_res = c.resolution();
    let comp = level_components(c);
    let top = (n_max.min(j_res as i32 - 1) + 1).max(0) as usize;
    let phases: Vec<Vec<Complex64>> = t_grid
        .iter()
        .map(|&t| {
            (0..top)
                .map(|j| Complex64::from_polar(1.0, t * ((j as f64) * beta).exp2()))
                .collect()
        })
        .collect();
    let n = (c.domain_length() as usize) << j_res;
    let best: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut best = 0.0f64;
            for ph in &phases {
                let mut running = Complex64::ZERO;
                for j in 0..top {
                    running += ph[j] * comp[j][x];
                    best = best.max(running.norm());
                }
            }
            best
        })
        .collect();
    Ok(GridFunction::from_reals(j_res, c.domain_length(), &best))
}

/// Verify the pointwise rate inequality
/// `sup_t |u(t)(x) - u⁰(x)|/t ≤ 2·2^(λ-β)/(1 - 2^-(λ-β))·M#_λ u⁰(x)`
/// at every cell over a finite t-grid in (0,1), reporting the worst violation
/// and the distribution of the ratio of the two sides.
pub fn convergence_rate_bound(
    f0: &GridFunction,
    params: &BesovParams,
    t_grid: &[f64],
) -> Result<VerificationReport> {
    let start = std::time::Instant::now();
    check_t_grid(t_grid)?;
    let c = crate::haar::analyze(f0);
    c.require_zero_coarse()?;
    let comp = level_components(&c);
    let n = f0.num_cells();

    let lhs: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut worst = 0.0f64;
            for &t in t_grid {
                let mut diff = Complex64::ZERO;
                for (j, row) in comp.iter().enumerate() {
                    let phase = Complex64::from_polar(1.0, t * ((j as f64) * params.beta).exp2());
                    diff += (phase - 1.0) * row[x];
                }
                worst = worst.max(diff.norm() / t);
            }
            worst
        })
        .collect();
    let sharp = sharp_maximal_dyadic(f0, params.lambda);
    let constant = params.rate_constant();

    let mut max_violation = 0.0f64;
    let mut ratios: Vec<f64> = Vec::with_capacity(n);
    for x in 0..n {
        let rhs = constant * sharp.value(x).re;
        max_violation = max_violation.max(lhs[x] - rhs);
        if rhs > 0.0 {
            ratios.push(lhs[x] / rhs);
        } else if lhs[x] == 0.0 {
            ratios.push(0.0);
        }
    }
    ratios.sort_by(|a, b| a.total_cmp(b));
    let max_ratio = ratios.last().copied().unwrap_or(0.0);
    let median_ratio = if ratios.is_empty() { 0.0 } else { ratios[ratios.len() / 2] };

    let mut report = VerificationReport::new("convergence-rate");
    report.add_case(
        "rate-max-violation",
        "worst cell excess of sup_t |u(t)-u0|/t over the sharp-maximal bound",
        max_violation.max(0.0),
        1e-12,
    );
    report.add_case(
        "rate-ratio-max",
        "largest ratio of the two sides (≤ 1 when the bound holds)",
        max_ratio,
        1.0 + 1e-12,
    );
    report.add_case(
        "rate-ratio-median",
        "median ratio of the two sides across cells",
        median_ratio,
        1.0 + 1e-12,
    );
    report.finish(start.elapsed().as_secs_f64());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicInterval;
    use crate::grid::{generate_besov_sample, BesovParams};
    use crate::haar::{analyze, haar_grid, partial_sum};

    fn square_wave(j_res: u32) -> GridFunction {
        haar_grid(&DyadicInterval::new(0, 1), j_res, 1)
    }

    #[test]
    fn hardy_littlewood_examples() {
        let c = GridFunction::from_reals(5, 1, &[-3.0; 32]);
        let m = hardy_littlewood_dyadic(&c);
        for x in 0..32 {
            assert_eq!(m.value(x).re, 3.0);
        }
        // ±1 square wave: the level-0 average is 0 but the halves average to 1
        let f = square_wave(6);
        let m = hardy_littlewood_dyadic(&f);
        let x = crate::dyadic::GridPoint::from_coordinate(0.1, 6).cell_index;
        assert_eq!(m.value(x).re, 1.0);
        // pointwise domination of |f|
        let g = generate_besov_sample(6, 2, 0.5, 5);
        let mg = hardy_littlewood_dyadic(&g);
        for x in 0..g.num_cells() {
            assert!(mg.value(x).re >= g.value(x).norm() - 1e-15);
        }
    }

    #[test]
    fn maximal_functions_are_sublinear_and_homogeneous() {
        let f = generate_besov_sample(5, 1, 0.5, 8);
        let g = generate_besov_sample(5, 1, 0.7, 9);
        let sum = f.add(&g);
        let (mf, mg, ms) = (
            hardy_littlewood_dyadic(&f),
            hardy_littlewood_dyadic(&g),
            hardy_littlewood_dyadic(&sum),
        );
        let scaled = hardy_littlewood_dyadic(&f.scale(Complex64::new(0.0, -2.0)));
        for x in 0..f.num_cells() {
            assert!(ms.value(x).re <= mf.value(x).re + mg.value(x).re + 1e-13);
            assert!((scaled.value(x).re - 2.0 * mf.value(x).re).abs() <= 1e-13);
        }
        let (sf, sg, ss) = (
            sharp_maximal_dyadic(&f, 0.5),
            sharp_maximal_dyadic(&g, 0.5),
            sharp_maximal_dyadic(&sum, 0.5),
        );
        for x in 0..f.num_cells() {
            assert!(ss.value(x).re <= sf.value(x).re + sg.value(x).re + 1e-12);
        }
    }

    #[test]
    fn sharp_dyadic_examples() {
        let c = GridFunction::from_reals(5, 1, &[1.75; 32]);
        assert_eq!(sharp_maximal_dyadic(&c, 0.5).max_abs(), 0.0);
        // ±1 square wave at x = 0.25: only the unit interval sees the jump,
        // giving ∫|f - 1| = 1 with unit normalization
        let f = square_wave(6);
        let s = sharp_maximal_dyadic(&f, 0.5);
        let x = crate::dyadic::GridPoint::from_coordinate(0.25, 6).cell_index;
        assert!((s.value(x).re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn grid_variant_dominates_dyadic() {
        let f = generate_besov_sample(6, 1, 0.5, 10);
        for lambda in [0.3, 0.7] {
            let d = sharp_maximal_dyadic(&f, lambda);
            let g = sharp_maximal_grid(&f, lambda);
            for x in 0..f.num_cells() {
                assert!(
                    g.value(x).re >= d.value(x).re - 1e-12 * d.value(x).re.max(1.0),
                    "cell {x}"
                );
            }
        }
    }

    #[test]
    fn grid_variant_sees_straddling_jumps() {
        // just left of the midpoint jump, a short straddling interval beats
        // every dyadic candidate
        let j_res = 6u32;
        let f = square_wave(j_res);
        let lambda = 0.5;
        let d = sharp_maximal_dyadic(&f, lambda);
        let g = sharp_maximal_grid(&f, lambda);
        let x = (1usize << (j_res - 1)) - 1;
        // two-cell straddle [1/2 - 2^-J, 1/2 + 2^-J): value (2·2^-J)^-λ·…
        let m = crate::dyadic::pow2(-(j_res as i32));
        let candidate = (2.0 * m).powf(-(1.0 + lambda)) * 2.0 * m;
        assert!(g.value(x).re >= candidate - 1e-12);
        assert!(g.value(x).re > d.value(x).re * 2.0, "grid sup must exceed dyadic here");
    }

    #[test]
    fn oscillatory_sum_basics() {
        let c = analyze(&generate_besov_sample(6, 1, 0.6, 11));
        // t = 0 is the plain partial sum
        for n in [-1i32, 0, 2, 5, 99] {
            let a = oscillatory_partial_sum(&c, 0.4, 0.0, n).unwrap();
            let b = partial_sum(&c, n);
            for x in 0..a.num_cells() {
                assert!((a.value(x) - b.value(x)).norm() <= 1e-13 * c.max_abs());
            }
        }
        let zero = oscillatory_partial_sum(&c, 0.4, 0.37, -1).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        // |S^N_t| is invariant under a global phase of the data
        let rotated = c.map_detail(|_, _, v| v * Complex64::from_polar(1.0, 1.1));
        let a = oscillatory_partial_sum(&c, 0.4, 0.37, 3).unwrap();
        let b = oscillatory_partial_sum(&rotated, 0.4, 0.37, 3).unwrap();
        for x in 0..a.num_cells() {
            assert!((a.value(x).norm() - b.value(x).norm()).abs() <= 1e-13);
        }
    }

    #[test]
    fn star_maximal_basics() {
        // one mode: every phase is unimodular, so S* = |c|·|h_I|
        let mut c = HaarCoefficients::zero(6, 1);
        c.set_detail(2, 3, Complex64::new(0.6, -0.8));
        let star = star_maximal(&c, 0.5, &[0.1, 0.5, 0.9], 5).unwrap();
        let h = haar_grid(&DyadicInterval::new(2, 3), 6, 1);
        for x in 0..64 {
            assert!((star.value(x).re - h.value(x).norm()).abs() <= 1e-13);
        }
        // sup property against individual partial sums
        let c = analyze(&generate_besov_sample(6, 1, 0.6, 12));
        let ts = [0.2, 0.4, 0.8];
        let star = star_maximal(&c, 0.5, &ts, 5).unwrap();
        for &t in &ts {
            for n in 0..=5 {
                let s = oscillatory_partial_sum(&c, 0.5, t, n).unwrap();
                for x in 0..s.num_cells() {
                    assert!(star.value(x).re >= s.value(x).norm() - 1e-12);
                }
            }
        }
        // validation
        assert!(matches!(star_maximal(&c, 0.5, &[], 5), Err(Error::EmptyTGrid)));
        assert!(star_maximal(&c, 0.5, &[0.0], 5).is_err());
        assert!(star_maximal(&c, 0.5, &[1.0], 5).is_err());
        // S* is sublinear
        let c2 = analyze(&generate_besov_sample(6, 1, 0.4, 13));
        let csum = c.map_detail(|j, k, v| v + c2.detail(j, k));
        let (s1, s2, ss) = (
            star_maximal(&c, 0.5, &ts, 5).unwrap(),
            star_maximal(&c2, 0.5, &ts, 5).unwrap(),
            star_maximal(&csum, 0.5, &ts, 5).unwrap(),
        );
        for x in 0..64 {
            assert!(ss.value(x).re <= s1.value(x).re + s2.value(x).re + 1e-12);
        }
    }

    #[test]
    fn pointwise_bounds_hold_on_a_small_instance() {
        let params = BesovParams::new(0.7, 0.3).unwrap();
        let f = generate_besov_sample(6, 1, params.lambda, 14);
        let c = analyze(&f);
        let n_max = 5;
        let m_dy = hardy_littlewood_dyadic(&f);
        let sharp = sharp_maximal_dyadic(&f, params.lambda);
        let ts: Vec<f64> = (1..=32).map(|i| i as f64 / 33.0).collect();
        // per-t bound S*_t ≤ C·t·M# + 2·M_dy, and its t-sup form
        for &t in &ts {
            let st = star_maximal_at(&c, params.beta, t, n_max).unwrap();
            for x in 0..f.num_cells() {
                let bound = params.c_max * t * sharp.value(x).re + 2.0 * m_dy.value(x).re;
                assert!(st.value(x).re <= bound + 1e-12, "t {t} cell {x}");
            }
        }
        let star = star_maximal(&c, params.beta, &ts, n_max).unwrap();
        for x in 0..f.num_cells() {
            let bound = params.c_max * sharp.value(x).re + 2.0 * m_dy.value(x).re;
            assert!(star.value(x).re <= bound + 1e-12, "cell {x}");
        }
    }

    #[test]
    fn rate_report_smoke() {
        let params = BesovParams::new(0.7, 0.3).unwrap();
        let f = generate_besov_sample(6, 1, params.lambda, 15);
        let ts: Vec<f64> = (1..=64).map(|i| i as f64 / 65.0).collect();
        let report = convergence_rate_bound(&f, &params, &ts).unwrap();
        assert!(report.pass, "{}", report.to_json());
        assert_eq!(report.cases.len(), 3);
        // zero input: 0 ≤ 0 everywhere
        let zero = GridFunction::zero(5, 1);
        let report = convergence_rate_bound(&zero, &params, &ts).unwrap();
        assert!(report.pass);
        // empty grid rejected
        assert!(convergence_rate_bound(&f, &params, &[]).is_err());
    }
}

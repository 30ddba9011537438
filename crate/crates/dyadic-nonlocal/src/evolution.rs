//! Time evolution of `i·∂u/∂t = D^β u`: diagonal in the Haar basis, the
//! coefficient at interval `I` just rotates by `exp(-i·t·|I|^-β)`. Everything
//! here is exact modulo rounding — no time-stepping — so the difference
//! quotients and continuity moduli below probe the equation itself, not a
//! discretization of it.

use num_complex::Complex64;

use crate::besov::besov_weight;
use crate::dyadic::DyadicInterval;
use crate::error::{Error, Result};
use crate::grid::{BesovParams, GridFunction};
use crate::haar::{analyze, synthesize, HaarCoefficients};

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParams(format!("time must be finite and ≥ 0, got {t}")));
    }
    Ok(())
}

/// Propagate coefficients to time `t`: `c_I ↦ exp(-i·t·2^(jβ))·c_I`.
pub fn evolve(c0: &HaarCoefficients, beta: f64, t: f64) -> Result<HaarCoefficients> {
    assert!(0.0 < beta && beta < 1.0);
    check_time(t)?;
    c0.require_zero_coarse()?;
    Ok(c0.map_detail(|j, _, v| v * Complex64::from_polar(1.0, -t * ((j as f64) * beta).exp2())))
}

/// Propagate a grid function: analyze, rotate, synthesize. The input must
/// have zero mean on every unit interval.
pub fn evolve_pointwise(f0: &GridFunction, beta: f64, t: f64) -> Result<GridFunction> {
    Ok(synthesize(&evolve(&analyze(f0), beta, t)?))
}

/// `‖u(t) - u(s)‖_{B^λ}`, computed coefficient-wise: the modulus of
/// continuity of the evolution in the Besov norm.
pub fn besov_continuity_modulus(
    c0: &HaarCoefficients,
    params: &BesovParams,
    t: f64,
    s: f64,
) -> Result<f64> {
    check_time(t)?;
    check_time(s)?;
    c0.require_zero_coarse()?;
    let mut total = 0.0;
    for j in 0..c0.resolution() {
        let omega = ((j as f64) * params.beta).exp2();
        let dphase = (Complex64::from_polar(1.0, -t * omega)
            - Complex64::from_polar(1.0, -s * omega))
        .norm_sqr();
        let w = 1.0 + besov_weight(&DyadicInterval::new(j as i32, 1), params.lambda);
        let mass: f64 = c0.detail_level(j).iter().map(|v| v.norm_sqr()).sum();
        total += dphase * w * mass;
    }
    Ok(total.sqrt())
}

/// `‖(u(t+h) - u(t))/h + i·D^β u(t)‖_{B^(λ-β)}`: how far the difference
/// quotient at step `h` is from satisfying the equation. Independent of `t`
/// (each coefficient contributes `|(e^(-ihω) - 1)/h + iω|·|c_I|`), and O(h)
/// as `h → 0`.
pub fn pde_residual(
    c0: &HaarCoefficients,
    params: &BesovParams,
    t: f64,
    h: f64,
) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) || !(h.is_finite() && h != 0.0) || t + h <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "need t > 0, h ≠ 0, t + h > 0; got t = {t}, h = {h}"
        )));
    }
    c0.require_zero_coarse()?;
    let gap = params.lambda - params.beta;
    let mut total = 0.0;
    for j in 0..c0.resolution() {
        let omega = ((j as f64) * params.beta).exp2();
        let quotient = (Complex64::from_polar(1.0, -h * omega) - 1.0) / h;
        let defect = (quotient + Complex64::new(0.0, omega)).norm_sqr();
        let w = 1.0 + besov_weight(&DyadicInterval::new(j as i32, 1), gap);
        let mass: f64 = c0.detail_level(j).iter().map(|v| v.norm_sqr()).sum();
        total += defect * w * mass;
    }
    Ok(total.sqrt())
}

/// Initial data plus order β: a solution of the equation evaluated lazily at
/// any time.
#[derive(Debug, Clone)]
pub struct EvolutionState {
    beta: f64,
    initial: HaarCoefficients,
}

impl EvolutionState {
    pub fn new(beta: f64, initial: HaarCoefficients) -> Result<Self> {
        if !(0.0 < beta && beta < 1.0) {
            return Err(Error::InvalidParams(format!("order must be in (0,1), got {beta}")));
        }
        initial.require_zero_coarse()?;
        Ok(EvolutionState { beta, initial })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn initial(&self) -> &HaarCoefficients {
        &self.initial
    }

    pub fn at(&self, t: f64) -> Result<HaarCoefficients> {
        evolve(&self.initial, self.beta, t)
    }

    pub fn grid_at(&self, t: f64) -> Result<GridFunction> {
        Ok(synthesize(&self.at(t)?))
    }

    /// `‖u(t)‖_{L²}`, the same for every `t`.
    pub fn l2_norm(&self) -> f64 {
        self.initial.l2_norm_sq().sqrt()
    }

    /// `‖u(t)‖_{B^λ}`, also time-invariant: the phases have modulus one.
    pub fn besov_norm(&self, lambda: f64) -> f64 {
        let mut total = 0.0;
        for j in 0..self.initial.resolution() {
            let w = 1.0 + besov_weight(&DyadicInterval::new(j as i32, 1), lambda);
            let mass: f64 = self.initial.detail_level(j).iter().map(|v| v.norm_sqr()).sum();
            total += w * mass;
        }
        total.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::besov::seminorm_sq_coefficients;
    use crate::grid::generate_besov_sample;
    use crate::haar::haar_eval;

    fn sample_coeffs(seed: u64) -> HaarCoefficients {
        analyze(&generate_besov_sample(6, 2, 0.7, seed))
    }

    #[test]
    fn identity_at_time_zero() {
        let c = sample_coeffs(1);
        let c0 = evolve(&c, 0.5, 0.0).unwrap();
        for (a, b) in c.iter_detail().zip(c0.iter_detail()) {
            assert_eq!(a.2, b.2);
        }
    }

    #[test]
    fn half_period_of_the_unit_mode() {
        // ω = 1 at level 0, so t = π flips the sign
        let mut c = HaarCoefficients::zero(4, 1);
        c.set_detail(0, 1, Complex64::new(2.0, -1.0));
        let u = evolve(&c, 0.5, std::f64::consts::PI).unwrap();
        assert!((u.detail(0, 1) + Complex64::new(2.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn group_law_and_unitarity() {
        let c = sample_coeffs(2);
        let beta = 0.4;
        let two_step = evolve(&evolve(&c, beta, 0.7).unwrap(), beta, 0.55).unwrap();
        let one_step = evolve(&c, beta, 1.25).unwrap();
        let scale = c.max_abs();
        for (a, b) in two_step.iter_detail().zip(one_step.iter_detail()) {
            assert!((a.2 - b.2).norm() <= 1e-13 * scale);
        }
        let n0 = c.l2_norm_sq();
        let n1 = one_step.l2_norm_sq();
        assert!((n0 - n1).abs() <= 1e-13 * n0);
        // the Besov seminorm is conserved too
        let s0 = seminorm_sq_coefficients(&c, 0.6).unwrap();
        let s1 = seminorm_sq_coefficients(&one_step, 0.6).unwrap();
        assert!((s0 - s1).abs() <= 1e-13 * s0);
    }

    #[test]
    fn state_wraps_the_free_functions() {
        let c = sample_coeffs(3);
        let state = EvolutionState::new(0.35, c.clone()).unwrap();
        let direct = evolve(&c, 0.35, 2.0).unwrap();
        let via_state = state.at(2.0).unwrap();
        for (a, b) in direct.iter_detail().zip(via_state.iter_detail()) {
            assert_eq!(a.2, b.2);
        }
        assert!((state.l2_norm().powi(2) - c.l2_norm_sq()).abs() <= 1e-14 * c.l2_norm_sq());
        let nb = state.besov_norm(0.6);
        let expected = (c.l2_norm_sq() + seminorm_sq_coefficients(&c, 0.6).unwrap()).sqrt();
        assert!((nb - expected).abs() <= 1e-13 * expected);
        assert!(EvolutionState::new(1.5, c).is_err());
    }

    #[test]
    fn continuity_modulus_behaviour() {
        let c = sample_coeffs(4);
        let params = BesovParams::new(0.65, 0.3).unwrap();
        assert_eq!(besov_continuity_modulus(&c, &params, 1.5, 1.5).unwrap(), 0.0);
        // single mode: modulus = |Δ phase|·sqrt(1 + w(I))
        let mut single = HaarCoefficients::zero(6, 1);
        single.set_detail(2, 1, Complex64::ONE);
        let (t, s) = (0.9, 0.4);
        let omega = (2.0f64 * 0.3).exp2();
        let dphase = (Complex64::from_polar(1.0, -t * omega)
            - Complex64::from_polar(1.0, -s * omega))
        .norm();
        let w = 1.0 + besov_weight(&DyadicInterval::new(2, 1), 0.65);
        let got = besov_continuity_modulus(&single, &params, t, s).unwrap();
        assert!((got - dphase * w.sqrt()).abs() <= 1e-13 * got);
        // Lipschitz-type upper bound |Δ phase| ≤ |t-s|·ω
        let bound = (t - s).abs() * omega * w.sqrt();
        assert!(got <= bound * (1.0 + 1e-12));
        // modulus vanishes continuously as s → t
        let m1 = besov_continuity_modulus(&c, &params, 1.0, 1.0 + 1e-4).unwrap();
        let m2 = besov_continuity_modulus(&c, &params, 1.0, 1.0 + 5e-5).unwrap();
        assert!(m1 > 0.0 && m2 > 0.0);
        let ratio = m1 / m2;
        assert!((1.9..2.1).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn residual_shrinks_linearly_in_h() {
        let c = sample_coeffs(5);
        let params = BesovParams::new(0.7, 0.3).unwrap();
        let r1 = pde_residual(&c, &params, 1.0, 1e-3).unwrap();
        let r2 = pde_residual(&c, &params, 1.0, 5e-4).unwrap();
        let ratio = r1 / r2;
        assert!((1.8..2.2).contains(&ratio), "ratio {ratio}");
        // small-h asymptote: residual ≈ (h/2)·sqrt(Σ ω⁴ |c|²(1 + w))
        let gap = params.lambda - params.beta;
        let mut asym = 0.0;
        for j in 0..c.resolution() {
            let omega = ((j as f64) * params.beta).exp2();
            let w = 1.0 + besov_weight(&DyadicInterval::new(j as i32, 1), gap);
            let mass: f64 = c.detail_level(j).iter().map(|v| v.norm_sqr()).sum();
            asym += omega.powi(4) * w * mass;
        }
        let h = 1e-6;
        let r = pde_residual(&c, &params, 1.0, h).unwrap();
        let predicted = 0.5 * h * asym.sqrt();
        assert!((r - predicted).abs() <= 1e-2 * predicted, "{r} vs {predicted}");
        // independence of t
        let ra = pde_residual(&c, &params, 0.5, 1e-3).unwrap();
        assert!((ra - r1).abs() <= 1e-12 * r1);
    }

    #[test]
    fn pointwise_evolution_matches_the_mode_sum() {
        let f0 = generate_besov_sample(3, 1, 0.6, 6);
        let c = analyze(&f0);
        let (beta, t) = (0.5, 0.8);
        let u = evolve_pointwise(&f0, beta, t).unwrap();
        for x in 0..f0.num_cells() {
            let p = u.point(x);
            let mut direct = Complex64::ZERO;
            for (j, k, v) in c.iter_detail() {
                let h = haar_eval(&HaarCoefficients::interval(j, k), p).unwrap();
                direct += v * Complex64::from_polar(1.0, -t * ((j as f64) * beta).exp2()) * h;
            }
            assert!((u.value(x) - direct).norm() <= 1e-12 * f0.max_abs(), "cell {x}");
        }
    }

    #[test]
    fn parameter_validation() {
        let c = sample_coeffs(7);
        let params = BesovParams::new(0.7, 0.3).unwrap();
        assert!(evolve(&c, 0.5, -1.0).is_err());
        assert!(pde_residual(&c, &params, 0.0, 1e-3).is_err());
        assert!(pde_residual(&c, &params, 1.0, 0.0).is_err());
        assert!(pde_residual(&c, &params, 1.0, -2.0).is_err());
        assert!(besov_continuity_modulus(&c, &params, -0.1, 0.5).is_err());
        let mut bad = HaarCoefficients::zero(3, 1);
        bad.set_coarse(0, Complex64::ONE);
        assert!(evolve(&bad, 0.5, 1.0).is_err());
    }
}

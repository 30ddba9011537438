//! Browser bindings for the dyadic nonlocal Schrödinger toolkit.
//!
//! One exported object, [`Simulation`], holds a generated rough initial datum
//! together with its Haar analysis, and exposes the three demo operations the
//! companion page plots:
//!
//! 1. **time evolution** — the solution `u(t)` of `i ∂u/∂t = D^β u` at any
//!    slider time, plus the conserved L² and Besov norms and the
//!    first-order-in-`h` PDE residual;
//! 2. **the operator two ways** — `D^β f` by the spectral route (Haar
//!    multiplier `2^(jβ)`) and by the singular-integral route (ultrametric
//!    kernel quadrature), with their maximal discrepancy;
//! 3. **maximal envelopes** — the oscillatory star maximal function `S*`
//!    against its pointwise majorant `c_max·M# + 2·M_dy`.
//!
//! Everything returns flat `Float64Array`s so the page can draw with plain
//! canvas calls; complex arrays are interleaved `[re0, im0, re1, im1, …]`.

use dyadic_nonlocal::{
    analyze, besov_norm, dbeta_integral, dbeta_spectral, evolve, generate_besov_sample,
    hardy_littlewood_dyadic, pde_residual, sharp_maximal_dyadic, star_maximal, synthesize,
    BesovParams, GridFunction, HaarCoefficients,
};
use wasm_bindgen::prelude::*;

#[wasm_bindgen]
pub struct Simulation {
    f: GridFunction,
    coeffs: HaarCoefficients,
    params: BesovParams,
}

impl Simulation {
    // kept apart from the bindgen surface so native unit tests can exercise
    // the error paths (JsError can only be materialized inside a JS runtime)
    fn try_new(resolution: u32, lambda: f64, beta: f64, seed: u32) -> Result<Simulation, String> {
        if !(1..=12).contains(&resolution) {
            return Err(format!("resolution must lie in 1..=12, got {resolution}"));
        }
        let params = BesovParams::new(lambda, beta).map_err(|e| e.to_string())?;
        let f = generate_besov_sample(resolution, 1, lambda, seed as u64);
        let coeffs = analyze(&f);
        Ok(Simulation { f, coeffs, params })
    }
}

#[wasm_bindgen]
impl Simulation {
    /// Generate a rough sample of the Besov space `B^λ` on `[0,1)` at
    /// `2^resolution` cells and prepare it for evolution under `D^β`.
    /// Requires `0 < β < λ < 1` and `resolution ∈ 1..=12`.
    #[wasm_bindgen(constructor)]
    pub fn new(resolution: u32, lambda: f64, beta: f64, seed: u32) -> Result<Simulation, JsError> {
        Self::try_new(resolution, lambda, beta, seed).map_err(|m| JsError::new(&m))
    }

    pub fn num_cells(&self) -> u32 {
        self.f.num_cells() as u32
    }

    /// The initial datum, one value per cell (the generated sample is real).
    pub fn initial(&self) -> Vec<f64> {
        self.f.values().iter().map(|v| v.re).collect()
    }

    /// L² norm of the initial datum; conserved exactly by the evolution.
    pub fn l2_norm(&self) -> f64 {
        self.f.l2_norm()
    }

    /// Besov norm at smoothness λ; also conserved by the evolution.
    pub fn besov_norm(&self) -> f64 {
        besov_norm(&self.f, self.params.lambda)
    }

    /// The solution `u(t)`, interleaved `[re0, im0, re1, im1, …]`.
    pub fn state_at(&self, t: f64) -> Result<Vec<f64>, JsError> {
        let u = synthesize(&evolve(&self.coeffs, self.params.beta, t)?);
        let mut out = Vec::with_capacity(2 * u.num_cells());
        for v in u.values() {
            out.push(v.re);
            out.push(v.im);
        }
        Ok(out)
    }

    /// `‖(u(t+h) - u(t))/h + i·D^β u(t)‖` in the `B^(λ-β)` norm: how far the
    /// difference quotient at step `h` is from solving the equation. O(h).
    pub fn residual(&self, t: f64, h: f64) -> Result<f64, JsError> {
        Ok(pde_residual(&self.coeffs, &self.params, t, h)?)
    }

    /// `D^β f` computed by both routes: the first `n` entries are the
    /// spectral (Haar multiplier) values, the next `n` the singular-integral
    /// quadrature values. Both are real for the real-valued sample.
    pub fn operator_routes(&self) -> Result<Vec<f64>, JsError> {
        let spectral = synthesize(&dbeta_spectral(&self.coeffs, self.params.beta)?);
        let integral = dbeta_integral(&self.f, self.params.beta);
        let mut out: Vec<f64> = spectral.values().iter().map(|v| v.re).collect();
        out.extend(integral.values().iter().map(|v| v.re));
        Ok(out)
    }

    /// Maximum absolute discrepancy between the two operator routes.
    pub fn operator_discrepancy(&self) -> Result<f64, JsError> {
        let spectral = synthesize(&dbeta_spectral(&self.coeffs, self.params.beta)?);
        let integral = dbeta_integral(&self.f, self.params.beta);
        Ok(spectral.sub(&integral).max_abs())
    }

    /// Per cell, `[S*…, bound…]` where `S*` is the oscillatory star maximal
    /// function over `tpoints` times spread over (0,1) and all truncation
    /// levels, and `bound = c_max·M#_λ + 2·M_dy` is its proved majorant.
    pub fn maximal_envelopes(&self, tpoints: u32) -> Result<Vec<f64>, JsError> {
        if tpoints == 0 {
            return Err(JsError::new("tpoints must be positive"));
        }
        let ts: Vec<f64> = (1..=tpoints)
            .map(|k| k as f64 / (tpoints as f64 + 1.0))
            .collect();
        let n_max = self.f.resolution() as i32 - 1;
        let star = star_maximal(&self.coeffs, self.params.beta, &ts, n_max)?;
        let m_dy = hardy_littlewood_dyadic(&self.f);
        let sharp = sharp_maximal_dyadic(&self.f, self.params.lambda);
        let mut out: Vec<f64> = star.values().iter().map(|v| v.re).collect();
        out.extend(
            m_dy.values()
                .iter()
                .zip(sharp.values())
                .map(|(m, s)| self.params.c_max * s.re + 2.0 * m.re),
        );
        Ok(out)
    }
}

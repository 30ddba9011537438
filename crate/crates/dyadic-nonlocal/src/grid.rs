//! Piecewise-constant complex grid functions on `[0, L)`, parameter carriers,
//! sample generators, and CSV serialization.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::besov::weight_constant;
use crate::dyadic::{pow2, GridPoint};
use crate::error::{Error, Result};
use crate::haar::{self, HaarCoefficients};

/// Complex-valued function constant on each cell `[i·2^-J, (i+1)·2^-J)` of a
/// dyadic grid over `[0, L)`, `L` a power of two. The universal function
/// representation: immutable after construction, safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    resolution: u32,
    domain_length: u32,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(resolution: u32, domain_length: u32, values: Vec<Complex64>) -> Self {
        assert!(resolution <= 30, "resolution too fine");
        assert!(
            domain_length.is_power_of_two(),
            "domain length must be a power of two"
        );
        assert_eq!(
            values.len(),
            (domain_length as usize) << resolution,
            "value count must be L·2^J"
        );
        GridFunction { resolution, domain_length, values }
    }

    pub fn zero(resolution: u32, domain_length: u32) -> Self {
        let n = (domain_length as usize) << resolution;
        GridFunction::new(resolution, domain_length, vec![Complex64::ZERO; n])
    }

    pub fn from_reals(resolution: u32, domain_length: u32, reals: &[f64]) -> Self {
        let values = reals.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        GridFunction::new(resolution, domain_length, values)
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn domain_length(&self) -> u32 {
        self.domain_length
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn num_cells(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, cell: usize) -> Complex64 {
        self.values[cell]
    }

    pub fn point(&self, cell: usize) -> GridPoint {
        GridPoint::new(self.resolution, cell)
    }

    /// Cell width 2^-J, exact.
    pub fn cell_measure(&self) -> f64 {
        pow2(-(self.resolution as i32))
    }

    pub fn l2_norm_sq(&self) -> f64 {
        let m = self.cell_measure();
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * m
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// True iff every unit-interval integral vanishes within `1e-12·scale`
    /// (the `P_0 f = 0` standing hypothesis), scale = max cell magnitude.
    pub fn mean_zero_per_unit(&self) -> bool {
        self.max_unit_mean() <= 1e-12 * self.max_abs()
    }

    /// Largest magnitude among the unit-interval integrals of f.
    pub fn max_unit_mean(&self) -> f64 {
        let per_unit = 1usize << self.resolution;
        let m = self.cell_measure();
        self.values
            .chunks_exact(per_unit)
            .map(|block| (block.iter().sum::<Complex64>() * m).norm())
            .fold(0.0, f64::max)
    }

    pub fn add(&self, rhs: &GridFunction) -> GridFunction {
        assert_eq!(self.resolution, rhs.resolution);
        assert_eq!(self.domain_length, rhs.domain_length);
        let values = self
            .values
            .iter()
            .zip(&rhs.values)
            .map(|(a, b)| a + b)
            .collect();
        GridFunction::new(self.resolution, self.domain_length, values)
    }

    pub fn sub(&self, rhs: &GridFunction) -> GridFunction {
        assert_eq!(self.resolution, rhs.resolution);
        assert_eq!(self.domain_length, rhs.domain_length);
        let values = self
            .values
            .iter()
            .zip(&rhs.values)
            .map(|(a, b)| a - b)
            .collect();
        GridFunction::new(self.resolution, self.domain_length, values)
    }

    pub fn scale(&self, factor: Complex64) -> GridFunction {
        let values = self.values.iter().map(|v| v * factor).collect();
        GridFunction::new(self.resolution, self.domain_length, values)
    }
}

/// The smoothness/order pair `0 < β < λ < 1` with its derived constants:
/// `c_lambda` from the Besov–Haar weight `(2 + c_λ)|I|^-2λ - c_λ`, and
/// `c_max = 2^(λ-β+1)/(2^(λ-β) - 1)`, the constant of the oscillatory
/// maximal-function bound.
#[derive(Debug, Clone, Copy)]
pub struct BesovParams {
    pub lambda: f64,
    pub beta: f64,
    pub c_lambda: f64,
    pub c_max: f64,
}

impl BesovParams {
    pub fn new(lambda: f64, beta: f64) -> Result<Self> {
        if !(0.0 < beta && beta < lambda && lambda < 1.0) {
            return Err(Error::InvalidParams(format!(
                "require 0 < beta < lambda < 1, got beta = {beta}, lambda = {lambda}"
            )));
        }
        let gap = lambda - beta;
        Ok(BesovParams {
            lambda,
            beta,
            c_lambda: weight_constant(lambda),
            c_max: (gap + 1.0).exp2() / (gap.exp2() - 1.0),
        })
    }

    /// Constant of the pointwise convergence-rate bound
    /// `sup_t |u(t)(x) - u0(x)|/t ≤ rate_constant · M#_λ u0(x)`:
    /// `2·2^(λ-β)/(1 - 2^-(λ-β))`.
    pub fn rate_constant(&self) -> f64 {
        let gap = self.lambda - self.beta;
        2.0 * gap.exp2() / (1.0 - (-gap).exp2())
    }
}

/// Projection onto functions constant on each unit interval: replaces every
/// unit block by its mean. Idempotent.
pub fn project_p0(f: &GridFunction) -> GridFunction {
    let per_unit = 1usize << f.resolution();
    let mut values = Vec::with_capacity(f.num_cells());
    for block in f.values().chunks_exact(per_unit) {
        let mean = block.iter().sum::<Complex64>() / per_unit as f64;
        values.extend(std::iter::repeat(mean).take(per_unit));
    }
    GridFunction::new(f.resolution(), f.domain_length(), values)
}

/// Deterministic sample with prescribed Haar-coefficient decay: one coefficient
/// `σ·2^-j(λ_target + 1)` with a uniform sign `σ` at a uniformly chosen position
/// per level `j < J`. The weighted sum `Σ |c_I|²·|I|^-2λ` is finite for every
/// `λ < λ_target` and bounded by the geometric series
/// `1/(1 - 2^-2(λ_target + 1 - λ))`; the output has zero unit means.
pub fn generate_besov_sample(
    resolution: u32,
    domain_length: u32,
    lambda_target: f64,
    seed: u64,
) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = HaarCoefficients::zero(resolution, domain_length);
    for j in 0..resolution {
        let amplitude = (-(j as f64) * (lambda_target + 1.0)).exp2();
        let sigma = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let n_positions = (domain_length as u64) << j;
        let k = rng.random_range(1..=n_positions);
        coeffs.set_detail(j, k, Complex64::new(sigma * amplitude, 0.0));
    }
    haar::synthesize(&coeffs)
}

/// Like [`generate_besov_sample`] but each position at level `j` carries a
/// coefficient independently with probability `density` (levels may then be
/// empty or full). `density = 0` gives the zero function.
pub fn generate_besov_sample_with_density(
    resolution: u32,
    domain_length: u32,
    lambda_target: f64,
    seed: u64,
    density: f64,
) -> GridFunction {
    assert!((0.0..=1.0).contains(&density), "density must be in [0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = HaarCoefficients::zero(resolution, domain_length);
    for j in 0..resolution {
        let amplitude = (-(j as f64) * (lambda_target + 1.0)).exp2();
        for k in 1..=((domain_length as u64) << j) {
            if rng.random_bool(density) {
                let sigma = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                coeffs.set_detail(j, k, Complex64::new(sigma * amplitude, 0.0));
            }
        }
    }
    haar::synthesize(&coeffs)
}

/// A grid sampling of a random piecewise-linear function together with the
/// largest slope magnitude actually used.
pub struct LipschitzSample {
    pub f: GridFunction,
    pub slope_sup: f64,
}

/// Midpoint sampling of a random continuous piecewise-linear function with
/// `|g'| ≤ slope_bound` (segments of width 1/8), with the unit means removed
/// afterwards. Consecutive cell values differ by at most `slope_sup·2^-J`.
pub fn generate_lipschitz_sample(
    resolution: u32,
    domain_length: u32,
    slope_bound: f64,
    seed: u64,
) -> LipschitzSample {
    assert!(slope_bound >= 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let segments = 8 * domain_length as usize;
    let seg_width = 1.0 / 8.0;
    let slopes: Vec<f64> = (0..segments)
        .map(|_| rng.random_range(-slope_bound..=slope_bound))
        .collect();
    let slope_sup = slopes.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    // cumulative segment start values, g(0) = 0
    let mut starts = vec![0.0; segments];
    for s in 1..segments {
        starts[s] = starts[s - 1] + slopes[s - 1] * seg_width;
    }
    let n = (domain_length as usize) << resolution;
    let cell = pow2(-(resolution as i32));
    let reals: Vec<f64> = (0..n)
        .map(|i| {
            let x = (i as f64 + 0.5) * cell;
            let s = ((x / seg_width) as usize).min(segments - 1);
            starts[s] + slopes[s] * (x - s as f64 * seg_width)
        })
        .collect();
    let g = GridFunction::from_reals(resolution, domain_length, &reals);
    let f = g.sub(&project_p0(&g));
    LipschitzSample { f, slope_sup }
}

/// Writes `# gridfunction v1 J=<J> L=<L>` then one `index,re,im` row per cell,
/// with 18 significant digits (round-trip exact).
pub fn write_csv(f: &GridFunction, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_csv_to(f, &mut w)
}

pub fn write_csv_to(f: &GridFunction, w: &mut impl Write) -> Result<()> {
    writeln!(
        w,
        "# gridfunction v1 J={} L={}",
        f.resolution(),
        f.domain_length()
    )?;
    for (i, v) in f.values().iter().enumerate() {
        writeln!(w, "{},{:.17e},{:.17e}", i, v.re, v.im)?;
    }
    Ok(())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<GridFunction> {
    read_csv_from(&mut BufReader::new(File::open(path)?))
}

pub fn read_csv_from(r: &mut impl BufRead) -> Result<GridFunction> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty file".into()))??;
    let (resolution, domain_length) = parse_header(&header, "gridfunction")?;
    let n = (domain_length as usize) << resolution;
    let mut values = Vec::with_capacity(n);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let idx: usize = next_field(&mut parts, &line)?;
        if idx != values.len() {
            return Err(Error::Format(format!(
                "row index {idx} out of order (expected {})",
                values.len()
            )));
        }
        let re: f64 = next_field(&mut parts, &line)?;
        let im: f64 = next_field(&mut parts, &line)?;
        values.push(Complex64::new(re, im));
    }
    if values.len() != n {
        return Err(Error::Format(format!(
            "expected {n} rows for J={resolution} L={domain_length}, found {}",
            values.len()
        )));
    }
    Ok(GridFunction::new(resolution, domain_length, values))
}

pub(crate) fn parse_header(header: &str, kind: &str) -> Result<(u32, u32)> {
    let tokens: Vec<&str> = header.split_whitespace().collect();
    let bad = || Error::Format(format!("bad header {header:?}"));
    if tokens.len() != 5 || tokens[0] != "#" || tokens[1] != kind || tokens[2] != "v1" {
        return Err(bad());
    }
    let mut j = None;
    let mut l = None;
    for t in &tokens[3..] {
        if let Some(v) = t.strip_prefix("J=") {
            j = Some(v.parse::<u32>().map_err(|_| bad())?);
        } else if let Some(v) = t.strip_prefix("L=") {
            l = Some(v.parse::<u32>().map_err(|_| bad())?);
        } else {
            return Err(bad());
        }
    }
    let (resolution, domain_length) = (j.ok_or_else(bad)?, l.ok_or_else(bad)?);
    if !domain_length.is_power_of_two() {
        return Err(Error::Format(format!(
            "domain length {domain_length} is not a power of two"
        )));
    }
    if resolution > 30 {
        return Err(Error::Format(format!("resolution {resolution} too fine")));
    }
    Ok((resolution, domain_length))
}

fn next_field<T: std::str::FromStr>(
    parts: &mut std::str::Split<'_, char>,
    line: &str,
) -> Result<T> {
    parts
        .next()
        .map(str::trim)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format(format!("bad row {line:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p0_projection() {
        let f = GridFunction::from_reals(2, 1, &[3.0, 3.0, 3.0, 3.0]);
        assert_eq!(project_p0(&f), f); // constants are fixed points

        // Haar function at level 1: zero unit mean
        let h = GridFunction::from_reals(2, 1, &[2f64.sqrt(), -(2f64.sqrt()), 0.0, 0.0]);
        assert_eq!(project_p0(&h).max_abs(), 0.0);

        let step = GridFunction::from_reals(1, 1, &[1.0, 0.0]);
        let p = project_p0(&step);
        assert_eq!(p.value(0), Complex64::new(0.5, 0.0));
        assert_eq!(p.value(1), Complex64::new(0.5, 0.0));
        assert_eq!(project_p0(&p), p);
    }

    #[test]
    fn besov_sample_is_deterministic_and_mean_zero() {
        let a = generate_besov_sample(8, 1, 0.6, 42);
        let b = generate_besov_sample(8, 1, 0.6, 42);
        assert_eq!(a.values(), b.values());
        let c = generate_besov_sample(8, 1, 0.6, 43);
        assert_ne!(a.values(), c.values());
        assert!(a.mean_zero_per_unit());
        assert!(generate_besov_sample_with_density(6, 2, 0.5, 7, 0.5).mean_zero_per_unit());
    }

    #[test]
    fn besov_sample_weighted_sum_within_geometric_bound() {
        let lambda_target = 0.6;
        let lambda = lambda_target - 0.1;
        let f = generate_besov_sample(10, 1, lambda_target, 5);
        let coeffs = haar::analyze(&f);
        let sum: f64 = coeffs
            .iter_detail()
            .map(|(j, _, c)| c.norm_sqr() * ((2.0 * lambda * j as f64).exp2()))
            .sum();
        let bound = 1.0 / (1.0 - (-2.0 * (lambda_target + 1.0 - lambda)).exp2());
        assert!(sum <= bound + 1e-12, "sum {sum} vs bound {bound}");
        assert!(sum > 0.0);
    }

    #[test]
    fn lipschitz_sample_properties() {
        let s = generate_lipschitz_sample(8, 2, 3.0, 11);
        assert!(s.slope_sup <= 3.0);
        assert!(s.f.mean_zero_per_unit());
        let cell = s.f.cell_measure();
        for w in s.f.values().windows(2).take(255) {
            // within segments the difference is exactly slope·2^-J; across
            // breakpoints it is still bounded by the global Lipschitz constant
            assert!((w[1] - w[0]).norm() <= s.slope_sup * cell + 1e-15);
        }
        let zero = generate_lipschitz_sample(5, 1, 0.0, 3);
        assert_eq!(zero.f.max_abs(), 0.0);
    }

    #[test]
    fn params_validation() {
        assert!(BesovParams::new(0.7, 0.3).is_ok());
        assert!(BesovParams::new(0.3, 0.7).is_err());
        assert!(BesovParams::new(0.5, 0.5).is_err());
        assert!(BesovParams::new(1.2, 0.3).is_err());
        assert!(BesovParams::new(0.5, -0.1).is_err());
        let p = BesovParams::new(0.5, 0.25).unwrap();
        assert!((p.c_lambda - 1.0).abs() < 1e-15); // 1/(2^1 - 1)
        let gap: f64 = 0.25;
        assert!((p.c_max - (gap + 1.0).exp2() / (gap.exp2() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let f = generate_besov_sample(5, 2, 0.4, 9);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        write_csv(&f, &path).unwrap();
        let g = read_csv(&path).unwrap();
        assert_eq!(f, g); // bitwise round trip
    }

    #[test]
    fn csv_rejects_malformed_input() {
        let cases: &[&str] = &[
            "",                                      // empty
            "# gridfunction v1 J=3 L=1\n0,1.0,0.0",  // missing rows
            "# gridfunction v1 J=1 L=3\n",           // L not a power of two
            "# somethingelse v1 J=1 L=1\n0,1,0\n1,0,0", // wrong kind
            "# gridfunction v1 J=1\n0,1,0\n1,0,0",   // missing L
            "# gridfunction v1 J=1 L=1\n0,1,0\n0,0,0", // index out of order
            "# gridfunction v1 J=1 L=1\n0,1\n1,0",   // short row
        ];
        for case in cases {
            let mut r = std::io::Cursor::new(case.as_bytes().to_vec());
            assert!(read_csv_from(&mut r).is_err(), "accepted {case:?}");
        }
    }
}

//! Haar functions and the O(n) analysis/synthesis cascade between grid
//! functions and their coefficients.
//!
//! Sign convention: `h_I = |I|^{-1/2}` on the LEFT half of `I` and
//! `-|I|^{-1/2}` on the right half. Every test in this crate fixes this
//! orientation.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::dyadic::{pow2, DyadicInterval, GridPoint};
use crate::error::{Error, Result};
use crate::grid::{parse_header, GridFunction};

/// Haar expansion data of a grid function at resolution `J` over `[0, L)`:
/// per-unit-interval means (the `P_0` part) plus detail coefficients
/// `⟨f, h_I⟩` for levels `0 ≤ j < J`, stored level-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarCoefficients {
    resolution: u32,
    domain_length: u32,
    coarse: Vec<Complex64>,
    detail: Vec<Vec<Complex64>>,
}

impl HaarCoefficients {
    pub fn zero(resolution: u32, domain_length: u32) -> Self {
        assert!(resolution <= 30, "resolution too fine");
        assert!(domain_length.is_power_of_two());
        let detail = (0..resolution)
            .map(|j| vec![Complex64::ZERO; (domain_length as usize) << j])
            .collect();
        HaarCoefficients {
            resolution,
            domain_length,
            coarse: vec![Complex64::ZERO; domain_length as usize],
            detail,
        }
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn domain_length(&self) -> u32 {
        self.domain_length
    }

    /// Unit-interval means, indexed by unit cell 0..L.
    pub fn coarse(&self) -> &[Complex64] {
        &self.coarse
    }

    pub fn set_coarse(&mut self, unit: usize, v: Complex64) {
        self.coarse[unit] = v;
    }

    /// Detail coefficients of one level, indexed by position-1.
    pub fn detail_level(&self, j: u32) -> &[Complex64] {
        &self.detail[j as usize]
    }

    pub fn detail(&self, j: u32, position: u64) -> Complex64 {
        self.detail[j as usize][(position - 1) as usize]
    }

    pub fn set_detail(&mut self, j: u32, position: u64, v: Complex64) {
        self.detail[j as usize][(position - 1) as usize] = v;
    }

    /// Level-major iteration over `(level, position, coefficient)`.
    pub fn iter_detail(&self) -> impl Iterator<Item = (u32, u64, Complex64)> + '_ {
        self.detail.iter().enumerate().flat_map(|(j, row)| {
            row.iter()
                .enumerate()
                .map(move |(m, &c)| (j as u32, m as u64 + 1, c))
        })
    }

    pub fn interval(j: u32, position: u64) -> DyadicInterval {
        DyadicInterval::new(j as i32, position)
    }

    pub fn num_detail(&self) -> usize {
        self.detail.iter().map(Vec::len).sum()
    }

    /// By orthonormality this equals `‖f‖²_{L²}` of the synthesized function.
    pub fn l2_norm_sq(&self) -> f64 {
        let c: f64 = self.coarse.iter().map(|v| v.norm_sqr()).sum();
        let d: f64 = self
            .detail
            .iter()
            .flat_map(|row| row.iter().map(|v| v.norm_sqr()))
            .sum();
        c + d
    }

    pub fn max_abs(&self) -> f64 {
        let c = self.coarse.iter().map(|v| v.norm()).fold(0.0, f64::max);
        self.detail
            .iter()
            .flat_map(|row| row.iter().map(|v| v.norm()))
            .fold(c, f64::max)
    }

    pub fn max_coarse_abs(&self) -> f64 {
        self.coarse.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// The `P_0 f = 0` precondition, up to rounding: every unit mean at most
    /// `1e-12` times the largest coefficient magnitude.
    pub fn is_coarse_zero(&self) -> bool {
        self.max_coarse_abs() <= 1e-12 * self.max_abs()
    }

    pub(crate) fn require_zero_coarse(&self) -> Result<()> {
        if self.is_coarse_zero() {
            Ok(())
        } else {
            Err(Error::NonzeroCoarse(self.max_coarse_abs()))
        }
    }

    /// New coefficients with every detail entry transformed; coarse copied.
    pub fn map_detail(&self, mut f: impl FnMut(u32, u64, Complex64) -> Complex64) -> Self {
        let detail = self
            .detail
            .iter()
            .enumerate()
            .map(|(j, row)| {
                row.iter()
                    .enumerate()
                    .map(|(m, &c)| f(j as u32, m as u64 + 1, c))
                    .collect()
            })
            .collect();
        HaarCoefficients {
            resolution: self.resolution,
            domain_length: self.domain_length,
            coarse: self.coarse.clone(),
            detail,
        }
    }
}

/// `h_I` at a grid point: `+|I|^{-1/2}` on the left half, `-|I|^{-1/2}` on the
/// right half, `0` outside. The cell must lie entirely inside one half or
/// outside `I` (guaranteed when the resolution exceeds the level).
pub fn haar_eval(i: &DyadicInterval, x: GridPoint) -> Result<f64> {
    let j_res = x.resolution as i32;
    if j_res > i.level {
        let shift = (j_res - i.level - 1) as u32;
        let half_index = (x.cell_index >> shift) as u64;
        let left = 2 * (i.position - 1);
        let amp = pow2(i.level).sqrt();
        Ok(if half_index == left {
            amp
        } else if half_index == left + 1 {
            -amp
        } else {
            0.0
        })
    } else if i.ancestor(j_res).position as usize == x.cell_index + 1 {
        Err(Error::StraddlingCell { resolution: x.resolution, level: i.level })
    } else {
        Ok(0.0)
    }
}

/// `h_I` sampled on the whole grid. Requires `resolution > level` so no cell
/// straddles a half.
pub fn haar_grid(i: &DyadicInterval, resolution: u32, domain_length: u32) -> GridFunction {
    assert!((resolution as i32) > i.level, "resolution must exceed the level");
    let n = (domain_length as usize) << resolution;
    let values = (0..n)
        .map(|cell| {
            let v = haar_eval(i, GridPoint::new(resolution, cell)).expect("no straddling");
            Complex64::new(v, 0.0)
        })
        .collect();
    GridFunction::new(resolution, domain_length, values)
}

/// Exact Haar coefficients of a piecewise-constant function by the pairwise
/// averaging cascade, O(n).
pub fn analyze(f: &GridFunction) -> HaarCoefficients {
    let (j_res, l) = (f.resolution(), f.domain_length());
    let mut out = HaarCoefficients::zero(j_res, l);
    let mut avg: Vec<Complex64> = f.values().to_vec();
    for j in (0..j_res).rev() {
        let count = (l as usize) << j;
        // ⟨f, h_I⟩ = 2^{-j/2 - 1}·(avg_left - avg_right) for piecewise-constant f
        let c_amp = pow2(-(j as i32) - 2).sqrt();
        let mut next = vec![Complex64::ZERO; count];
        for m in 0..count {
            let left = avg[2 * m];
            let right = avg[2 * m + 1];
            next[m] = (left + right) * 0.5;
            out.detail[j as usize][m] = (left - right) * c_amp;
        }
        avg = next;
    }
    out.coarse = avg;
    out
}

/// Inverse cascade: reconstructs the grid function, exactly inverting
/// [`analyze`] up to rounding (~1e-16 relative).
pub fn synthesize(c: &HaarCoefficients) -> GridFunction {
    let (j_res, l) = (c.resolution, c.domain_length);
    let mut avg = c.coarse.clone();
    for j in 0..j_res {
        let count = (l as usize) << j;
        let amp = pow2(j as i32).sqrt();
        let mut next = vec![Complex64::ZERO; count * 2];
        for m in 0..count {
            let d = c.detail[j as usize][m] * amp;
            next[2 * m] = avg[m] + d;
            next[2 * m + 1] = avg[m] - d;
        }
        avg = next;
    }
    GridFunction::new(j_res, l, avg)
}

/// Synthesis truncated to detail levels `j ≤ N` with the coarse part excluded
/// (the `P_0 f = 0` setting); equals the conditional-expectation projection of
/// the detail part. `N < 0` gives the zero function; `N ≥ J-1` the full detail
/// synthesis.
pub fn partial_sum(c: &HaarCoefficients, n: i32) -> GridFunction {
    let filtered = c.map_detail(|j, _, v| if (j as i32) <= n { v } else { Complex64::ZERO });
    let mut no_coarse = filtered;
    no_coarse.coarse.iter_mut().for_each(|v| *v = Complex64::ZERO);
    synthesize(&no_coarse)
}

/// Writes `# haarcoeffs v1 J=<J> L=<L>`, then coarse rows `-1,<unit>,re,im`
/// and detail rows `j,k,re,im` in level-major order.
pub fn write_coeffs_csv(c: &HaarCoefficients, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_coeffs_csv_to(c, &mut w)
}

pub fn write_coeffs_csv_to(c: &HaarCoefficients, w: &mut impl Write) -> Result<()> {
    writeln!(w, "# haarcoeffs v1 J={} L={}", c.resolution, c.domain_length)?;
    for (u, v) in c.coarse.iter().enumerate() {
        writeln!(w, "-1,{},{:.17e},{:.17e}", u, v.re, v.im)?;
    }
    for (j, k, v) in c.iter_detail() {
        writeln!(w, "{},{},{:.17e},{:.17e}", j, k, v.re, v.im)?;
    }
    Ok(())
}

pub fn read_coeffs_csv(path: impl AsRef<Path>) -> Result<HaarCoefficients> {
    read_coeffs_csv_from(&mut BufReader::new(File::open(path)?))
}

pub fn read_coeffs_csv_from(r: &mut impl BufRead) -> Result<HaarCoefficients> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty file".into()))??;
    let (resolution, domain_length) = parse_header(&header, "haarcoeffs")?;
    let mut out = HaarCoefficients::zero(resolution, domain_length);
    let mut row = 0usize;
    let n_coarse = domain_length as usize;
    let n_total = n_coarse + out.num_detail();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::Format(format!("bad row {line:?}")));
        }
        let bad = || Error::Format(format!("bad row {line:?}"));
        let j: i32 = fields[0].parse().map_err(|_| bad())?;
        let k: u64 = fields[1].parse().map_err(|_| bad())?;
        let re: f64 = fields[2].parse().map_err(|_| bad())?;
        let im: f64 = fields[3].parse().map_err(|_| bad())?;
        let v = Complex64::new(re, im);
        if row >= n_total {
            return Err(Error::Format("too many rows".into()));
        }
        if row < n_coarse {
            // coarse rows first, unit index ascending
            if j != -1 || k != row as u64 {
                return Err(Error::Format(format!(
                    "expected coarse row for unit {row}, got {line:?}"
                )));
            }
            out.coarse[row] = v;
        } else {
            let (ej, ek) = expected_detail_key(row - n_coarse, domain_length);
            if j != ej as i32 || k != ek {
                return Err(Error::Format(format!(
                    "expected detail row ({ej},{ek}), got {line:?}"
                )));
            }
            out.detail[ej as usize][(ek - 1) as usize] = v;
        }
        row += 1;
    }
    if row != n_total {
        return Err(Error::Format(format!(
            "expected {n_total} rows, found {row}"
        )));
    }
    Ok(out)
}

fn expected_detail_key(mut index: usize, domain_length: u32) -> (u32, u64) {
    let mut j = 0u32;
    loop {
        let count = (domain_length as usize) << j;
        if index < count {
            return (j, index as u64 + 1);
        }
        index -= count;
        j += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_sign_convention() {
        let unit = DyadicInterval::new(0, 1);
        let p = |x: f64| GridPoint::from_coordinate(x, 4);
        assert_eq!(haar_eval(&unit, p(0.25)).unwrap(), 1.0); // positive on the left
        assert_eq!(haar_eval(&unit, p(0.75)).unwrap(), -1.0);
        let i = DyadicInterval::new(1, 1); // [0, 1/2)
        assert_eq!(haar_eval(&i, p(0.75)).unwrap(), 0.0);
        assert!((haar_eval(&i, p(0.1)).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn eval_straddling_cell_is_an_error() {
        let i = DyadicInterval::new(2, 1);
        // cell as coarse as the interval covers both halves
        assert!(haar_eval(&i, GridPoint::new(2, 0)).is_err());
        // coarser cell strictly containing the interval
        assert!(haar_eval(&i, GridPoint::new(1, 0)).is_err());
        // coarse cell elsewhere is simply outside
        assert_eq!(haar_eval(&i, GridPoint::new(2, 3)).unwrap(), 0.0);
        // long interval, fine cell
        let long = DyadicInterval::new(-1, 1); // [0, 2)
        let v = haar_eval(&long, GridPoint::new(0, 0)).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-15);
        let v = haar_eval(&long, GridPoint::new(0, 1)).unwrap();
        assert!((v + 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn analyze_picks_out_single_haar_function() {
        let i = DyadicInterval::new(2, 1);
        let f = haar_grid(&i, 5, 1);
        let c = analyze(&f);
        for (j, k, v) in c.iter_detail() {
            let expected = if (j, k) == (2, 1) { 1.0 } else { 0.0 };
            assert!((v - expected).norm() < 1e-14, "({j},{k}) = {v}");
        }
        assert!(c.max_coarse_abs() < 1e-15);
    }

    #[test]
    fn analyze_constant_goes_to_coarse() {
        let f = GridFunction::from_reals(3, 2, &[1.0; 16]);
        let c = analyze(&f);
        assert_eq!(c.coarse()[0], Complex64::ONE);
        assert_eq!(c.coarse()[1], Complex64::ONE);
        assert!(c.iter_detail().all(|(_, _, v)| v.norm() == 0.0));
    }

    #[test]
    fn synthesize_single_coefficient() {
        let mut c = HaarCoefficients::zero(3, 1);
        c.set_detail(0, 1, Complex64::ONE);
        let f = synthesize(&c);
        let h = haar_grid(&DyadicInterval::new(0, 1), 3, 1);
        for (a, b) in f.values().iter().zip(h.values()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let f = crate::grid::generate_besov_sample(7, 2, 0.4, 17);
        let c = analyze(&f);
        let g = synthesize(&c);
        let scale = f.max_abs();
        for (a, b) in f.values().iter().zip(g.values()) {
            assert!((a - b).norm() <= 1e-13 * scale);
        }
        assert!((c.l2_norm_sq() - f.l2_norm_sq()).abs() <= 1e-12 * f.l2_norm_sq());
    }

    #[test]
    fn partial_sum_levels() {
        let mut c = HaarCoefficients::zero(4, 1);
        c.set_detail(1, 2, Complex64::new(3.0, -1.0));
        assert_eq!(partial_sum(&c, 0).max_abs(), 0.0); // level 1 excluded
        assert_eq!(partial_sum(&c, -1).max_abs(), 0.0); // empty sum
        let full = partial_sum(&c, 3);
        let direct = synthesize(&c);
        assert_eq!(full.values(), direct.values()); // coarse is zero anyway
    }

    #[test]
    fn partial_sum_is_block_averaging() {
        // the level-<N cut equals per-cell averages over level-(N+1) intervals
        // minus the unit means
        let f = crate::grid::generate_besov_sample(6, 1, 0.5, 23);
        let c = analyze(&f);
        let n = 2i32;
        let s = partial_sum(&c, n);
        let block = 1usize << (6 - (n + 1) as u32);
        for (i, v) in s.values().iter().enumerate() {
            let start = (i / block) * block;
            let avg = f.values()[start..start + block]
                .iter()
                .sum::<Complex64>()
                / block as f64;
            assert!((v - avg).norm() < 1e-13, "cell {i}");
        }
    }

    #[test]
    fn coeffs_csv_round_trip() {
        let f = crate::grid::generate_besov_sample(4, 2, 0.3, 31);
        let c = analyze(&f);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        write_coeffs_csv(&c, &path).unwrap();
        let d = read_coeffs_csv(&path).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn coeffs_csv_rejects_malformed_input() {
        let cases: &[&str] = &[
            "",
            "# haarcoeffs v1 J=1 L=1\n-1,0,0,0",          // missing detail row
            "# haarcoeffs v1 J=1 L=1\n0,1,0,0\n-1,0,0,0", // order violated
            "# gridfunction v1 J=1 L=1\n-1,0,0,0\n0,1,0,0",
        ];
        for case in cases {
            let mut r = std::io::Cursor::new(case.as_bytes().to_vec());
            assert!(read_coeffs_csv_from(&mut r).is_err(), "accepted {case:?}");
        }
    }
}

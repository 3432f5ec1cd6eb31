//! Approximate entropy of dependency-map index sequences.
//!
//! ApEn(m, tol) compares how often length-m windows of a series repeat
//! (within Chebyshev distance tol) against length-(m+1) windows: regular
//! series keep repeating at the longer length, random ones do not.

use crate::depmap::DependencyMap;
use crate::error::{Error, Result};

/// Window length and tolerance multiplier for [`apen`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApEnParams {
    /// Embedding dimension (window length).
    pub m: usize,
    /// Tolerance as a multiple of the series' population standard deviation.
    pub tolerance_factor: f64,
}

impl Default for ApEnParams {
    fn default() -> ApEnParams {
        ApEnParams {
            m: 2,
            tolerance_factor: 0.2,
        }
    }
}

impl ApEnParams {
    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::InvalidParameter(
                "embedding dimension must be >= 1".into(),
            ));
        }
        if !(self.tolerance_factor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance factor must be > 0, got {}",
                self.tolerance_factor
            )));
        }
        Ok(())
    }
}

/// Maps longer than this are analyzed through a contiguous window of this
/// many entries (pair counting is quadratic in the worst case).
pub const APEN_SUBSAMPLE_LEN: usize = 10_000;

/// Approximate entropy of `series`.
///
/// Windows X(i) = [u(i), ..., u(i+w-1)]; two windows match when every
/// coordinate differs by strictly less than tol = tolerance_factor * std;
/// each window matches itself. ApEn = phi(m) - phi(m+1) with
/// phi(w) = mean over i of ln(match count / window count).
///
/// A constant series returns 0 by convention (tol would be 0 and the series
/// is perfectly regular).
pub fn apen(series: &[f64], params: &ApEnParams) -> Result<f64> {
    params.validate()?;
    let n = series.len();
    if n < params.m + 2 {
        return Err(Error::InsufficientData(format!(
            "series of length {n} cannot fit windows of length {}",
            params.m + 1
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "series contains a non-finite value".into(),
        ));
    }
    let std = population_std(series);
    if std == 0.0 {
        return Ok(0.0);
    }
    let tol = params.tolerance_factor * std;
    Ok(phi(series, params.m, tol) - phi(series, params.m + 1, tol))
}

fn population_std(series: &[f64]) -> f64 {
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    var.sqrt()
}

/// phi(w) = (1/(N-w+1)) * sum_i ln(C_i / (N-w+1)).
///
/// Candidate matches are narrowed by sorting window starts on their first
/// coordinate: every window within tol on all coordinates is within tol on
/// the first, so a slightly widened value interval around u(i) (the widening
/// covers rounding of the interval endpoints) is a superset of the true
/// match set, and the exact pairwise predicate is applied only inside it.
/// Counts are therefore identical to brute force, and the final sum runs in
/// window order so the result is bit-for-bit that of the quadratic scan.
fn phi(series: &[f64], w: usize, tol: f64) -> f64 {
    let nw = series.len() - w + 1;
    let mut order: Vec<u32> = (0..nw as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        series[a as usize]
            .partial_cmp(&series[b as usize])
            .expect("series checked finite")
    });

    let mut counts = vec![0u32; nw];
    let mut lo = 0usize;
    let mut hi = 0usize;
    for s in 0..nw {
        let i = order[s] as usize;
        let u_i = series[i];
        let margin = (u_i.abs() + tol) * 1e-12;
        let lower = u_i - tol - margin;
        let upper = u_i + tol + margin;
        if lo > s {
            lo = s;
        }
        while series[order[lo] as usize] < lower {
            lo += 1;
        }
        if hi < lo {
            hi = lo;
        }
        while hi < nw && series[order[hi] as usize] <= upper {
            hi += 1;
        }
        let mut count = 0u32;
        for t in lo..hi {
            let j = order[t] as usize;
            let mut matched = true;
            for k in 0..w {
                if !((series[i + k] - series[j + k]).abs() < tol) {
                    matched = false;
                    break;
                }
            }
            if matched {
                count += 1;
            }
        }
        counts[i] = count;
    }

    let denom = nw as f64;
    let mut sum = 0.0;
    for &c in &counts {
        sum += (c as f64 / denom).ln();
    }
    sum / denom
}

/// ApEn of the map's target sequence u(i) = pi[i]. Large maps are analyzed
/// through the leading [`APEN_SUBSAMPLE_LEN`]-entry window; use
/// [`apen_of_map_offset`] to place that window elsewhere.
pub fn apen_of_map(map: &DependencyMap, params: &ApEnParams) -> Result<f64> {
    apen_of_map_at(map, params, 0)
}

/// ApEn of the map's target sequence with the analysis window starting at a
/// seed-chosen offset. The window is contiguous because ApEn is order
/// sensitive; scattering the subsample would erase the local structure the
/// statistic exists to measure.
pub fn apen_of_map_offset(map: &DependencyMap, params: &ApEnParams, seed: u64) -> Result<f64> {
    let n = map.len();
    let offset = if n > APEN_SUBSAMPLE_LEN {
        (crate::seed::splitmix64(seed) % (n - APEN_SUBSAMPLE_LEN + 1) as u64) as usize
    } else {
        0
    };
    apen_of_map_at(map, params, offset)
}

fn apen_of_map_at(map: &DependencyMap, params: &ApEnParams, offset: usize) -> Result<f64> {
    let n = map.len();
    let len = n.min(APEN_SUBSAMPLE_LEN);
    let offset = offset.min(n - len);
    let series: Vec<f64> = map.targets()[offset..offset + len]
        .iter()
        .map(|&t| t as f64)
        .collect();
    apen(&series, params)
}

//! Exact binomial lower tails and the anti-concentration check.
//!
//! For S = sum of t Bernoulli(1/n) trials, [`anticb_check`] evaluates
//! Pr{S <= t/n - alpha*sqrt(t/n)} exactly and compares it against 1/3.
//! Terms are accumulated in log space through `ln_gamma`, with compensated
//! summation, instead of estimating the sum through Stirling bounds: the
//! point is to verify the claim, not the proof technique.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TailError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("region grid of {cells} cells exceeds the {max} cell limit")]
    GridTooLarge { cells: u64, max: u64 },
}

/// Default alpha, sqrt(pi/12).
pub fn default_alpha() -> f64 {
    (std::f64::consts::PI / 12.0).sqrt()
}

/// Exact Pr{S <= s} for S ~ Binomial(t, 1/n), via log-gamma accumulation.
/// `s < 0` gives 0 and `s >= t` gives 1.
pub fn binom_lower_tail(t: u64, n: u64, s: i64) -> Result<f64, TailError> {
    if t < 1 {
        return Err(TailError::Domain("t must be at least 1".into()));
    }
    if n < 2 {
        return Err(TailError::Domain("n must be at least 2".into()));
    }
    if s < 0 {
        return Ok(0.0);
    }
    if s as u64 >= t {
        return Ok(1.0);
    }
    let ln_p = -(n as f64).ln();
    let ln_q = (-1.0 / n as f64).ln_1p();
    let ln_fact_t = ln_gamma(t as f64 + 1.0);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for i in 0..=s as u64 {
        let ln_term = ln_fact_t - ln_gamma(i as f64 + 1.0) - ln_gamma((t - i) as f64 + 1.0)
            + i as f64 * ln_p
            + (t - i) as f64 * ln_q;
        let term = ln_term.exp();
        let y = term - comp;
        let t_new = sum + y;
        comp = (t_new - sum) - y;
        sum = t_new;
    }
    Ok(sum.clamp(0.0, 1.0))
}

#[derive(Clone, Debug, Serialize)]
pub struct TailResult {
    pub t: u64,
    pub n: u64,
    pub alpha: f64,
    /// t/n - alpha*sqrt(t/n); may be negative.
    pub threshold: f64,
    /// Largest integer <= threshold.
    pub s_max: i64,
    /// Exact Pr{S <= s_max}.
    pub prob: f64,
    /// prob > 1/3.
    pub holds: bool,
    /// Exact Pr{S > t/n}, the first piece of the complement split.
    pub median_piece: f64,
    /// Exact Pr{threshold < S <= t/n}, the second piece.
    pub middle_band: f64,
}

/// Evaluate the tail claim at (t, n): exact Pr{S <= t/n - alpha*sqrt(t/n)}
/// with the verdict against 1/3, plus the two pieces of the complement.
pub fn anticb_check(t: u64, n: u64, alpha: f64) -> Result<TailResult, TailError> {
    if alpha <= 0.0 {
        return Err(TailError::Domain("alpha must be positive".into()));
    }
    let mean = t as f64 / n as f64;
    let threshold = mean - alpha * mean.sqrt();
    let s_max = threshold.floor() as i64;
    let prob = binom_lower_tail(t, n, s_max)?;
    let mean_floor = binom_lower_tail(t, n, mean.floor() as i64)?;
    Ok(TailResult {
        t,
        n,
        alpha,
        threshold,
        s_max,
        prob,
        holds: prob > 1.0 / 3.0,
        median_piece: 1.0 - mean_floor,
        middle_band: mean_floor - prob,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionSummary {
    pub cells: u64,
    pub holds: u64,
    pub fails: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_t_range: Option<(u64, u64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_n_range: Option<(u64, u64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionTable {
    pub alpha: f64,
    pub rows: Vec<TailResult>,
    pub summary: RegionSummary,
}

const MAX_REGION_CELLS: u64 = 10_000_000;

/// Verdict map over t in [1, t_max], n in [2, n_max]. Rows are computed in
/// parallel but emitted in (t, n) order.
pub fn anticb_region(t_max: u64, n_max: u64, alpha: f64) -> Result<RegionTable, TailError> {
    if t_max < 2 || n_max < 2 {
        return Err(TailError::Domain("t_max and n_max must be at least 2".into()));
    }
    let cells = t_max * (n_max - 1);
    if cells > MAX_REGION_CELLS {
        return Err(TailError::GridTooLarge { cells, max: MAX_REGION_CELLS });
    }
    let rows: Vec<TailResult> = (1..=t_max)
        .into_par_iter()
        .map(|t| {
            (2..=n_max)
                .map(|n| anticb_check(t, n, alpha))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    let holds = rows.iter().filter(|r| r.holds).count() as u64;
    let failing: Vec<&TailResult> = rows.iter().filter(|r| !r.holds).collect();
    let summary = RegionSummary {
        cells,
        holds,
        fails: failing.len() as u64,
        failing_t_range: failing.iter().map(|r| r.t).minmax(),
        failing_n_range: failing.iter().map(|r| r.n).minmax(),
    };
    Ok(RegionTable { alpha, rows, summary })
}

trait MinMax: Iterator {
    fn minmax(self) -> Option<(Self::Item, Self::Item)>;
}

impl<I> MinMax for I
where
    I: Iterator,
    I::Item: PartialOrd + Copy,
{
    fn minmax(self) -> Option<(Self::Item, Self::Item)> {
        self.fold(None, |acc, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((
                if v < lo { v } else { lo },
                if v > hi { v } else { hi },
            )),
        })
    }
}

impl RegionTable {
    /// CSV with header `t,n,threshold,s_max,prob,holds`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,n,threshold,s_max,prob,holds\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.t, r.n, r.threshold, r.s_max, r.prob, r.holds
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        assert!((binom_lower_tail(2, 2, 0).unwrap() - 0.25).abs() < 1e-15);
        assert!((binom_lower_tail(5, 5, 0).unwrap() - 0.32768).abs() < 1e-15);
        assert_eq!(binom_lower_tail(7, 3, 7).unwrap(), 1.0);
        assert_eq!(binom_lower_tail(7, 3, -1).unwrap(), 0.0);
    }

    #[test]
    fn check_examples() {
        let r = anticb_check(7, 7, default_alpha()).unwrap();
        assert!((r.threshold - (1.0 - default_alpha())).abs() < 1e-12);
        assert_eq!(r.s_max, 0);
        assert!((r.prob - (6.0f64 / 7.0).powi(7)).abs() < 1e-15);
        assert!((r.prob - 0.3400).abs() < 1e-4);
        assert!(r.holds);

        let r = anticb_check(5, 5, default_alpha()).unwrap();
        assert!((r.prob - 0.32768).abs() < 1e-15);
        assert!(!r.holds);

        let r = anticb_check(2, 2, default_alpha()).unwrap();
        assert!((r.prob - 0.25).abs() < 1e-15);
        assert!(!r.holds);
    }

    #[test]
    fn negative_threshold_cells_are_empty() {
        // t/n < alpha^2 pushes the threshold below zero.
        let r = anticb_check(1, 4, default_alpha()).unwrap();
        assert!(r.threshold < 0.0);
        assert_eq!(r.s_max, -1);
        assert_eq!(r.prob, 0.0);
        assert!(!r.holds);
    }

    #[test]
    fn diagonal_holds_from_n6() {
        for n in 6..=30u64 {
            let r = anticb_check(n, n, default_alpha()).unwrap();
            assert!(r.holds, "t = n = {n}");
        }
    }

    #[test]
    fn region_shape_and_summary() {
        let table = anticb_region(100, 20, default_alpha()).unwrap();
        assert_eq!(table.rows.len(), 1900);
        assert_eq!(table.summary.cells, 1900);
        assert_eq!(table.summary.holds + table.summary.fails, 1900);
        assert!(table.summary.fails > 0);
        let csv = table.to_csv();
        assert_eq!(csv.lines().count(), 1901);
        assert!(csv.starts_with("t,n,threshold,s_max,prob,holds\n"));

        assert!(matches!(
            anticb_region(1_000_000, 100, default_alpha()),
            Err(TailError::GridTooLarge { .. })
        ));
    }

    #[test]
    fn tail_monotonicity() {
        // Non-decreasing in s; non-increasing in t at fixed s.
        for n in [2u64, 5, 11] {
            let mut prev = 0.0;
            for s in 0..40 {
                let v = binom_lower_tail(40, n, s).unwrap();
                assert!(v >= prev - 1e-15);
                prev = v;
            }
        }
        for n in [2u64, 5, 11] {
            let mut prev = 1.0;
            for t in 5..60 {
                let v = binom_lower_tail(t, n, 4).unwrap();
                assert!(v <= prev + 1e-12, "t={t} n={n}");
                prev = v;
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(binom_lower_tail(0, 2, 0).is_err());
        assert!(binom_lower_tail(5, 1, 0).is_err());
        assert!(anticb_check(5, 5, 0.0).is_err());
    }
}

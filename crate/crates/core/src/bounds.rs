//! Closed-form bound calculators.
//!
//! Every operation here is a pure formula evaluator; the comparisons
//! against exact or simulated quantities live in tests and in the `verify`
//! grids, where the model being compared against is explicit. Quantities
//! that grow like e^(w0/2) overflow doubles long before the parameters stop
//! being interesting, so bound values are carried in log space.

use std::collections::BTreeMap;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BoundError {
    #[error("domain error: {0}")]
    Domain(String),
}

/// A non-negative quantity stored as its natural log. Serializes as both
/// the log and, when representable, the plain value.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogValue {
    ln: f64,
}

impl LogValue {
    pub fn from_ln(ln: f64) -> Self {
        LogValue { ln }
    }

    pub fn from_value(v: f64) -> Self {
        LogValue { ln: v.ln() }
    }

    pub fn ln(&self) -> f64 {
        self.ln
    }

    /// Plain value; +inf when the log exceeds the double range.
    pub fn value(&self) -> f64 {
        self.ln.exp()
    }

    pub fn finite_value(&self) -> Option<f64> {
        let v = self.ln.exp();
        v.is_finite().then_some(v)
    }

    /// log-space difference e^a - e^b for a >= b.
    pub fn minus(self, other: LogValue) -> LogValue {
        if other.ln == f64::NEG_INFINITY {
            return self;
        }
        debug_assert!(other.ln <= self.ln);
        LogValue { ln: self.ln + (-((other.ln - self.ln).exp())).ln_1p() }
    }

    /// log-space sum of several terms.
    pub fn sum(terms: &[LogValue]) -> LogValue {
        let m = terms.iter().map(|t| t.ln).fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return LogValue { ln: f64::NEG_INFINITY };
        }
        let s: f64 = terms.iter().map(|t| (t.ln - m).exp()).sum();
        LogValue { ln: m + s.ln() }
    }
}

impl Serialize for LogValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("LogValue", 2)?;
        st.serialize_field("value", &self.finite_value())?;
        st.serialize_field("ln", &self.ln)?;
        st.end()
    }
}

/// Evaluated bound with the inputs it was computed from. `conditions_met`
/// only annotates; evaluation never refuses valid inputs.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub inputs: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<LogValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<LogValue>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, LogValue>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub checks: BTreeMap<String, bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditions_met: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl BoundReport {
    fn new(name: &str) -> Self {
        BoundReport {
            name: name.into(),
            inputs: BTreeMap::new(),
            lower: None,
            upper: None,
            values: BTreeMap::new(),
            checks: BTreeMap::new(),
            conditions_met: None,
            notes: Vec::new(),
        }
    }

    fn input(mut self, key: &str, v: f64) -> Self {
        self.inputs.insert(key.into(), v);
        self
    }
}

/// Sandwich for the probability that a single player starting at `i` ever
/// reaches weight `w` in the fair unit-payment game: i/(w+n) <= P <= i/w.
pub fn ruin_prob_bounds(i: u64, w: u64, n: usize) -> Result<(f64, f64), BoundError> {
    if i == 0 {
        return Err(BoundError::Domain("initial weight must be >= 1".into()));
    }
    if i > w {
        return Err(BoundError::Domain(format!(
            "player already rich: initial weight {} exceeds target {}",
            i, w
        )));
    }
    if n < 2 {
        return Err(BoundError::Domain("need at least 2 players".into()));
    }
    let (i, w, n) = (i as f64, w as f64, n as f64);
    Ok((i / (w + n), i / w))
}

pub fn ruin_report(i: u64, w: u64, n: usize) -> Result<BoundReport, BoundError> {
    let (lo, hi) = ruin_prob_bounds(i, w, n)?;
    let mut r = BoundReport::new("ruin_sandwich")
        .input("initial", i as f64)
        .input("target", w as f64)
        .input("n", n as f64);
    r.lower = Some(LogValue::from_value(lo));
    r.upper = Some(LogValue::from_value(hi));
    Ok(r)
}

/// Upper bound on the probability that some player ever reaches `w1` while
/// fewer than two players ever reach `w2`.
pub fn pstar_upper(i: u64, w1: u64, w2: u64, n: usize) -> Result<f64, BoundError> {
    if w1 > w2 {
        return Err(BoundError::Domain(format!(
            "event nesting requires w1 <= w2, got {} > {}",
            w1, w2
        )));
    }
    if i > w1 {
        return Err(BoundError::Domain(format!(
            "initial weight {} exceeds the first target {}",
            i, w1
        )));
    }
    if i == 0 || n < 2 {
        return Err(BoundError::Domain("need i >= 1 and n >= 2".into()));
    }
    let (i, w1, w2, nf) = (i as f64, w1 as f64, w2 as f64, n as f64);
    let a = 1.0 - i / (w2 + nf);
    Ok(a.powi(n as i32) + (nf * i / w2) * a.powi(n as i32 - 1) - (1.0 - i / w1).powi(n as i32))
}

pub fn pstar_report(i: u64, w1: u64, w2: u64, n: usize) -> Result<BoundReport, BoundError> {
    let v = pstar_upper(i, w1, w2, n)?;
    let mut r = BoundReport::new("pstar_upper")
        .input("initial", i as f64)
        .input("w1", w1 as f64)
        .input("w2", w2 as f64)
        .input("n", n as f64);
    r.upper = Some(LogValue::from_value(v));
    Ok(r)
}

/// Expected gain of one player's weight after `t` steps: t*(c_inc/n - c_dec).
pub fn expected_drift(t: u64, n: usize, c_inc: u64, c_dec: u64) -> f64 {
    t as f64 * (c_inc as f64 / n as f64 - c_dec as f64)
}

pub fn drift_report(t: u64, n: usize, c_inc: u64, c_dec: u64) -> BoundReport {
    let v = expected_drift(t, n, c_inc, c_dec);
    let mut r = BoundReport::new("expected_drift")
        .input("t", t as f64)
        .input("n", n as f64)
        .input("c_inc", c_inc as f64)
        .input("c_dec", c_dec as f64);
    r.inputs.insert("expected_gain".into(), v);
    r.notes.push(format!("expected gain after {} steps: {}", t, v));
    r
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LargerForm {
    Product,
    Stated,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpBound {
    /// Exact product form (n-1) * (1 + 1/(n-1))^(w0/k).
    pub product: LogValue,
    /// The companion exponential form n * e^(w0/(nk)).
    pub stated: LogValue,
    /// Same product form with its exponent written out: (n-1) * e^(w0/(k(n-1))).
    pub natural: LogValue,
    pub larger: LargerForm,
}

/// Upper bound on the expected number of steps until some of `k` remaining
/// players goes bankrupt, total cap `w0`.
pub fn sp_upper(k: usize, n: usize, w0: u64) -> Result<SpBound, BoundError> {
    if k == 0 || k > n {
        return Err(BoundError::Domain(format!("k = {} must lie in [1, n]", k)));
    }
    if n < 2 {
        return Err(BoundError::Domain("need at least 2 players".into()));
    }
    if w0 < k as u64 {
        return Err(BoundError::Domain(format!(
            "total {} cannot support {} players",
            w0, k
        )));
    }
    let nf = n as f64;
    let depth = w0 as f64 / k as f64;
    let product = LogValue::from_ln((nf - 1.0).ln() + depth * (nf / (nf - 1.0)).ln());
    let stated = LogValue::from_ln(nf.ln() + w0 as f64 / (nf * k as f64));
    let natural = LogValue::from_ln((nf - 1.0).ln() + depth / (nf - 1.0));
    let larger = if product > stated { LargerForm::Product } else { LargerForm::Stated };
    Ok(SpBound { product, stated, natural, larger })
}

pub fn sp_report(k: usize, n: usize, w0: u64) -> Result<BoundReport, BoundError> {
    let b = sp_upper(k, n, w0)?;
    let mut r = BoundReport::new("poorest_bankruptcy_steps_upper")
        .input("k", k as f64)
        .input("n", n as f64)
        .input("w0", w0 as f64);
    r.values.insert("product_form".into(), b.product);
    r.values.insert("stated_exponential".into(), b.stated);
    r.values.insert("natural_exponential".into(), b.natural);
    r.checks.insert("product_form_larger".into(), b.larger == LargerForm::Product);
    r.upper = Some(b.product);
    Ok(r)
}

#[derive(Clone, Debug, Serialize)]
pub struct St2Bound {
    pub value: LogValue,
    /// The derivation assumes c_inc/2 >= n.
    pub conditions_met: bool,
}

/// Lower bound on the expected number of steps for the two-player total to
/// fall from `x` to `y` under cap `w0`:
/// (n-2)/2 * (b^((w0-y)/2) - b^((w0-x)/2)) * (1 - e^-2), b = 1 + 2/(n-2).
pub fn st2_lower(x: u64, y: u64, n: usize, w0: u64, c_inc: u64) -> Result<St2Bound, BoundError> {
    if n <= 2 {
        return Err(BoundError::Domain(
            "n must exceed 2 (the bound divides by n - 2)".into(),
        ));
    }
    if y > x {
        return Err(BoundError::Domain(format!("need y <= x, got y {} > x {}", y, x)));
    }
    if x > w0 {
        return Err(BoundError::Domain(format!(
            "start {} exceeds the total cap {}",
            x, w0
        )));
    }
    let nf = n as f64;
    let lb = (1.0 + 2.0 / (nf - 2.0)).ln();
    let hi = LogValue::from_ln((w0 - y) as f64 / 2.0 * lb);
    let lo = LogValue::from_ln((w0 - x) as f64 / 2.0 * lb);
    let scale = ((nf - 2.0) / 2.0).ln() + (1.0 - (-2.0f64).exp()).ln();
    let value = LogValue::from_ln(hi.minus(lo).ln() + scale);
    Ok(St2Bound { value, conditions_met: c_inc as f64 / 2.0 >= nf })
}

pub fn st2_report(x: u64, y: u64, n: usize, w0: u64, c_inc: u64) -> Result<BoundReport, BoundError> {
    let b = st2_lower(x, y, n, w0, c_inc)?;
    let mut r = BoundReport::new("total_passage_lower")
        .input("x", x as f64)
        .input("y", y as f64)
        .input("n", n as f64)
        .input("w0", w0 as f64)
        .input("c_inc", c_inc as f64);
    r.lower = Some(b.value);
    r.conditions_met = Some(b.conditions_met);
    if !b.conditions_met {
        r.notes.push(format!("derivation assumes c_inc/2 >= n; got c_inc = {}", c_inc));
    }
    Ok(r)
}

#[derive(Clone, Debug, Serialize)]
pub struct SemilocalReport {
    pub n: usize,
    pub initial: u64,
    pub c_inc: u64,
    pub w0: u64,
    /// I >= ln(6) * n * (n-2).
    pub initial_threshold: f64,
    pub initial_ok: bool,
    /// c_inc >= 2n.
    pub award_ok: bool,
    pub conditions_met: bool,
    /// Chain upper bound on the steps to one survivor, as printed: 2n e^(w0/2).
    pub one_survivor_upper_printed: LogValue,
    /// Same chain with the exponent kept at the scale of its terms: 2n e^(w0/2n).
    pub one_survivor_upper_natural: LogValue,
    /// First two chain terms n e^(w0/2n) + n(n-2) e^(w0/3n).
    pub chain_two_terms: LogValue,
    /// Full sum n * (e^(w0/2n) + ... + e^(w0/n^2)).
    pub chain_full_sum: LogValue,
    /// Lower bound on the steps for the total to halve: (n-2)/3 e^(w0/(2(n-2))).
    pub half_total_lower: LogValue,
    pub half_exceeds_one_printed: bool,
    pub half_exceeds_one_natural: bool,
}

/// Evaluate the semi-local chain bounds at w0 = n * initial and report both
/// readings of the one-survivor upper bound together with the separation
/// verdicts.
pub fn semilocal_report(n: usize, initial: u64, c_inc: u64) -> Result<SemilocalReport, BoundError> {
    if n <= 2 {
        return Err(BoundError::Domain(
            "n must exceed 2 (the half-total bound divides by n - 2)".into(),
        ));
    }
    if initial == 0 {
        return Err(BoundError::Domain("initial weight must be >= 1".into()));
    }
    let nf = n as f64;
    let w0 = n as u64 * initial;
    let w0f = w0 as f64;
    let initial_threshold = 6f64.ln() * nf * (nf - 2.0);
    let initial_ok = initial as f64 >= initial_threshold;
    let award_ok = c_inc >= 2 * n as u64;
    let printed = LogValue::from_ln((2.0 * nf).ln() + w0f / 2.0);
    let natural = LogValue::from_ln((2.0 * nf).ln() + w0f / (2.0 * nf));
    let chain_two_terms = LogValue::sum(&[
        LogValue::from_ln(nf.ln() + w0f / (2.0 * nf)),
        LogValue::from_ln((nf * (nf - 2.0)).ln() + w0f / (3.0 * nf)),
    ]);
    let chain_full_sum = LogValue::sum(
        &(2..=n)
            .map(|k| LogValue::from_ln(nf.ln() + w0f / (k as f64 * nf)))
            .collect::<Vec<_>>(),
    );
    let half = LogValue::from_ln(((nf - 2.0) / 3.0).ln() + w0f / (2.0 * (nf - 2.0)));
    Ok(SemilocalReport {
        n,
        initial,
        c_inc,
        w0,
        initial_threshold,
        initial_ok,
        award_ok,
        conditions_met: initial_ok && award_ok,
        one_survivor_upper_printed: printed,
        one_survivor_upper_natural: natural,
        chain_two_terms,
        chain_full_sum,
        half_total_lower: half,
        half_exceeds_one_printed: half > printed,
        half_exceeds_one_natural: half > natural,
    })
}

pub fn semilocal_bound_report(n: usize, initial: u64, c_inc: u64) -> Result<BoundReport, BoundError> {
    let s = semilocal_report(n, initial, c_inc)?;
    let mut r = BoundReport::new("semilocal_separation")
        .input("n", n as f64)
        .input("initial", initial as f64)
        .input("c_inc", c_inc as f64)
        .input("w0", s.w0 as f64)
        .input("initial_threshold", s.initial_threshold);
    r.values.insert("one_survivor_upper_printed".into(), s.one_survivor_upper_printed);
    r.values.insert("one_survivor_upper_natural".into(), s.one_survivor_upper_natural);
    r.values.insert("chain_two_terms".into(), s.chain_two_terms);
    r.values.insert("chain_full_sum".into(), s.chain_full_sum);
    r.values.insert("half_total_lower".into(), s.half_total_lower);
    r.checks.insert("initial_ok".into(), s.initial_ok);
    r.checks.insert("award_ok".into(), s.award_ok);
    r.checks.insert("half_exceeds_one_printed".into(), s.half_exceeds_one_printed);
    r.checks.insert("half_exceeds_one_natural".into(), s.half_exceeds_one_natural);
    r.conditions_met = Some(s.conditions_met);
    r.notes.push(
        "one-survivor upper bound evaluated in both readings; see half_exceeds_* checks".into(),
    );
    Ok(r)
}

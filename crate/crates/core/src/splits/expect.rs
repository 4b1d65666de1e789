use statrs::function::gamma::ln_gamma;

use crate::dataset::PatternTable;
use crate::error::{Error, Result};

/// Largest `pos * neg` evaluated by the direct double sum over both binomials.
pub const EXACT_DOUBLE_SUM_LIMIT: u128 = 1_000_000;

/// Counts below this use exact integer binomial coefficients.
const SMALL_COUNT: u64 = 30;

/// Expected larger and smaller class count of one pattern on one side of a split.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extremes {
    pub max: f64,
    pub min: f64,
}

fn choose_small(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    let mut c: u64 = 1;
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    c as f64
}

/// `P(X = k)` for `X ~ Binomial(n, q)`, `k = 0..=n`.
pub(crate) fn binomial_pmf(n: u64, q: f64) -> Vec<f64> {
    if q <= 0.0 || q >= 1.0 {
        let mut v = vec![0.0; n as usize + 1];
        v[if q <= 0.0 { 0 } else { n as usize }] = 1.0;
        return v;
    }
    if n < SMALL_COUNT {
        return (0..=n)
            .map(|k| choose_small(n, k) * q.powi(k as i32) * (1.0 - q).powi((n - k) as i32))
            .collect();
    }
    let (lq, lr) = (q.ln(), (1.0 - q).ln());
    let lf = ln_gamma(n as f64 + 1.0);
    (0..=n)
        .map(|k| {
            let (k, rest) = (k as f64, (n - k) as f64);
            (lf - ln_gamma(k + 1.0) - ln_gamma(rest + 1.0) + k * lq + rest * lr).exp()
        })
        .collect()
}

/// `E[max{X, Y}]` and `E[min{X, Y}]` for independent `X ~ Bin(pos, q)`, `Y ~ Bin(neg, q)`
/// by summing over the joint outcome grid.
pub fn expected_extremes_double_sum(pos: u64, neg: u64, q: f64) -> Extremes {
    let (fx, fy) = (binomial_pmf(pos, q), binomial_pmf(neg, q));
    let (mut max, mut min) = (0.0, 0.0);
    for (i, px) in fx.iter().enumerate() {
        let (mut row_max, mut row_min) = (0.0, 0.0);
        for (j, py) in fy.iter().enumerate() {
            row_max += i.max(j) as f64 * py;
            row_min += i.min(j) as f64 * py;
        }
        max += px * row_max;
        min += px * row_min;
    }
    Extremes { max, min }
}

/// The same expectations through survival functions:
/// `E[max] = Σ_k (1 - F_X(k-1) F_Y(k-1))` and `E[min] = Σ_k S_X(k-1) S_Y(k-1)`, `O(pos + neg)`.
pub fn expected_extremes_tail(pos: u64, neg: u64, q: f64) -> Extremes {
    let survival = |n: u64| -> Vec<f64> {
        // s[k] = P(X > k)
        let f = binomial_pmf(n, q);
        let mut s = vec![0.0; f.len()];
        let mut acc = 0.0;
        for k in (0..f.len()).rev() {
            s[k] = acc;
            acc += f[k];
        }
        s
    };
    let (sx, sy) = (survival(pos), survival(neg));
    let at = |s: &[f64], k: usize| s.get(k).copied().unwrap_or(0.0);
    let top = pos.max(neg) as usize;
    let (mut max, mut min) = (0.0, 0.0);
    for k in 0..top {
        let (a, b) = (at(&sx, k), at(&sy, k));
        max += a + b - a * b;
        min += a * b;
    }
    Extremes { max, min }
}

/// Direct double sum when `pos * neg` is at most [`EXACT_DOUBLE_SUM_LIMIT`], survival sums above.
pub fn expected_extremes(pos: u64, neg: u64, q: f64) -> Extremes {
    if pos == 0 || neg == 0 {
        return Extremes {
            max: q * pos.max(neg) as f64,
            min: 0.0,
        };
    }
    if u128::from(pos) * u128::from(neg) <= EXACT_DOUBLE_SUM_LIMIT {
        expected_extremes_double_sum(pos, neg, q)
    } else {
        expected_extremes_tail(pos, neg, q)
    }
}

fn check(table: &PatternTable, p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "split ratio {p} outside (0, 1)"
        )));
    }
    table.require_nonempty()
}

/// `Σ_x E[min{P_train, N_train}] / (m p)`: the expected training minimum hinge loss, with the
/// random training size replaced by its mean `m p`.
pub fn expected_min_hinge(table: &PatternTable, p: f64) -> Result<f64> {
    check(table, p)?;
    let s: f64 = table
        .entries()
        .map(|(_, c)| expected_extremes(c.pos, c.neg, p).min)
        .sum();
    Ok(s / (table.m() as f64 * p))
}

/// `Σ_x E[max{P_test, N_test}] / (m (1 - p))`: the expected test accuracy bound.
pub fn expected_accuracy_upper(table: &PatternTable, p: f64) -> Result<f64> {
    check(table, p)?;
    let q = 1.0 - p;
    let s: f64 = table
        .entries()
        .map(|(_, c)| expected_extremes(c.pos, c.neg, q).max)
        .sum();
    Ok(s / (table.m() as f64 * q))
}

/// `Σ_x (E[max test] + E[max train] - max{P, N}) / m`, symmetric under `p -> 1 - p`.
pub fn expected_delta(table: &PatternTable, p: f64) -> Result<f64> {
    check(table, p)?;
    let s: f64 = table
        .entries()
        .map(|(_, c)| {
            let train = expected_extremes(c.pos, c.neg, p).max;
            let test = expected_extremes(c.pos, c.neg, 1.0 - p).max;
            (train + test) - c.max() as f64
        })
        .sum();
    Ok(s / table.m() as f64)
}

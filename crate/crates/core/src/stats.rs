//! Statistical comparisons: Mann-Whitney U, Cliff's delta, one-way ANOVA.
//!
//! The Mann-Whitney implementation switches between an exact null
//! distribution (small tie-free samples) and the normal approximation with
//! tie-corrected variance and continuity correction. Cliff's delta is
//! computed from sorted partition points rather than the naive pair loop so
//! tests can check it against the O(n*m) count.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

/// Significance level used when reporting test outcomes.
pub const ALPHA: f64 = 0.05;

/// Combined sample size up to which the exact Mann-Whitney null
/// distribution is enumerated (tie-free samples only).
pub const EXACT_LIMIT: usize = 16;

/// Outcome of a hypothesis test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    /// Two-sided p-value in [0, 1].
    pub p_value: f64,
    /// Human-readable method tag, e.g. `mann-whitney-u/exact`.
    pub method: String,
}

impl TestResult {
    pub fn significant_at(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Interpretation bands for |delta| following Romano et al.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Magnitude {
    Negligible,
    Small,
    Medium,
    Large,
}

impl Magnitude {
    pub fn from_delta(delta: f64) -> Self {
        let d = delta.abs();
        if d < 0.147 {
            Magnitude::Negligible
        } else if d < 0.33 {
            Magnitude::Small
        } else if d < 0.474 {
            Magnitude::Medium
        } else {
            Magnitude::Large
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Magnitude::Negligible => "NEGLIGIBLE",
            Magnitude::Small => "SMALL",
            Magnitude::Medium => "MEDIUM",
            Magnitude::Large => "LARGE",
        }
    }
}

/// Cliff's delta with its magnitude band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectSize {
    /// Dominance statistic in [-1, 1].
    pub delta: f64,
    pub magnitude: Magnitude,
}

/// Two-sided Mann-Whitney U test.
///
/// The reported statistic is U for `x`. For combined sizes up to
/// [`EXACT_LIMIT`] without ties the p-value is exact (two-sided as twice the
/// lower tail of min(U_x, U_y), capped at 1); otherwise the normal
/// approximation with continuity correction and tie-adjusted variance is
/// used.
pub fn mann_whitney_u(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::InvalidInput(
            "mann-whitney requires both samples non-empty".into(),
        ));
    }
    let n1 = x.len();
    let n2 = y.len();

    let (u1, tie_term, has_ties) = u_statistic(x, y);
    let u2 = (n1 * n2) as f64 - u1;

    if n1 + n2 <= EXACT_LIMIT && !has_ties {
        // Exact null distribution of U via the standard counting recurrence.
        let counts = u_distribution(n1, n2);
        let total: f64 = counts.iter().map(|&c| c as f64).sum();
        let u_min = u1.min(u2);
        // Tie-free U values are integers.
        let cutoff = u_min.round() as usize;
        let tail: f64 = counts[..=cutoff.min(counts.len() - 1)]
            .iter()
            .map(|&c| c as f64)
            .sum();
        let p = (2.0 * tail / total).min(1.0);
        return Ok(TestResult {
            statistic: u1,
            p_value: p,
            method: "mann-whitney-u/exact".into(),
        });
    }

    let n = (n1 + n2) as f64;
    let mean = (n1 * n2) as f64 / 2.0;
    let var = (n1 * n2) as f64 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        // Every observation tied with every other: no evidence either way.
        return Ok(TestResult {
            statistic: u1,
            p_value: 1.0,
            method: "mann-whitney-u/normal".into(),
        });
    }
    let z = ((u1 - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let p = (2.0 * (1.0 - normal.cdf(z))).clamp(0.0, 1.0);
    Ok(TestResult {
        statistic: u1,
        p_value: p,
        method: "mann-whitney-u/normal".into(),
    })
}

/// U statistic for `x` via midranks, plus the tie correction term
/// sum(t^3 - t) and whether any ties exist.
fn u_statistic(x: &[f64], y: &[f64]) -> (f64, f64, bool) {
    let n1 = x.len();
    let mut combined: Vec<(f64, bool)> = x
        .iter()
        .map(|&v| (v, true))
        .chain(y.iter().map(|&v| (v, false)))
        .collect();
    combined.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut rank_sum_x = 0.0;
    let mut tie_term = 0.0;
    let mut has_ties = false;
    let mut i = 0;
    while i < combined.len() {
        let mut j = i + 1;
        while j < combined.len() && combined[j].0 == combined[i].0 {
            j += 1;
        }
        let t = (j - i) as f64;
        if t > 1.0 {
            has_ties = true;
            tie_term += t * t * t - t;
        }
        // Midrank of positions i..j (1-based ranks).
        let rank = (i + j + 1) as f64 / 2.0;
        for entry in &combined[i..j] {
            if entry.1 {
                rank_sum_x += rank;
            }
        }
        i = j;
    }
    let u1 = rank_sum_x - (n1 * (n1 + 1)) as f64 / 2.0;
    (u1, tie_term, has_ties)
}

/// Number of arrangements with each U value, for sample sizes (n1, n2).
///
/// f(a, b, u) = f(a-1, b, u-b) + f(a, b-1, u); the returned vector is
/// indexed by u in 0..=n1*n2.
fn u_distribution(n1: usize, n2: usize) -> Vec<u64> {
    let max_u = n1 * n2;
    // table[a][b] = distribution of U for sizes (a, b)
    let mut table: Vec<Vec<Vec<u64>>> = vec![vec![Vec::new(); n2 + 1]; n1 + 1];
    for (a, row) in table.iter_mut().enumerate() {
        for (b, dist) in row.iter_mut().enumerate() {
            let mut d = vec![0u64; a * b + 1];
            if a == 0 || b == 0 {
                d[0] = 1;
            }
            *dist = d;
        }
    }
    for a in 1..=n1 {
        for b in 1..=n2 {
            let mut d = vec![0u64; max_u + 1];
            for (u, slot) in d.iter_mut().enumerate().take(a * b + 1) {
                let mut c = 0u64;
                if u >= b {
                    c += table[a - 1][b].get(u - b).copied().unwrap_or(0);
                }
                c += table[a][b - 1].get(u).copied().unwrap_or(0);
                *slot = c;
            }
            d.truncate(a * b + 1);
            table[a][b] = d;
        }
    }
    table[n1][n2].clone()
}

/// Cliff's delta: (#{x_i > y_j} - #{x_i < y_j}) / (|x| * |y|).
pub fn cliffs_delta(x: &[f64], y: &[f64]) -> Result<EffectSize> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::InvalidInput(
            "cliffs delta requires both samples non-empty".into(),
        ));
    }
    let mut sorted_y = y.to_vec();
    sorted_y.sort_by(f64::total_cmp);
    let mut wins: i64 = 0;
    let mut losses: i64 = 0;
    for &xi in x {
        let below = sorted_y.partition_point(|&v| v < xi);
        let below_or_eq = sorted_y.partition_point(|&v| v <= xi);
        wins += below as i64;
        losses += (sorted_y.len() - below_or_eq) as i64;
    }
    let delta = (wins - losses) as f64 / (x.len() * y.len()) as f64;
    Ok(EffectSize {
        delta,
        magnitude: Magnitude::from_delta(delta),
    })
}

/// One-way ANOVA over two or more groups.
pub fn one_way_anova(groups: &[Vec<f64>]) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(Error::InvalidInput("anova requires at least 2 groups".into()));
    }
    if groups.iter().any(|g| g.len() < 2) {
        return Err(Error::InvalidInput(
            "anova requires at least 2 values per group".into(),
        ));
    }
    let k = groups.len();
    let n_total: usize = groups.iter().map(Vec::len).sum();
    let grand_mean: f64 =
        groups.iter().flatten().sum::<f64>() / n_total as f64;

    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let mean: f64 = g.iter().sum::<f64>() / g.len() as f64;
        ss_between += g.len() as f64 * (mean - grand_mean).powi(2);
        ss_within += g.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    }
    let df_between = (k - 1) as f64;
    let df_within = (n_total - k) as f64;
    let ms_between = ss_between / df_between;
    let ms_within = ss_within / df_within;

    let (f, p) = if ms_within == 0.0 {
        if ms_between == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY, 0.0)
        }
    } else {
        let f = ms_between / ms_within;
        (f, 1.0 - f_cdf(f, df_between, df_within))
    };
    Ok(TestResult {
        statistic: f,
        p_value: p,
        method: "one-way-anova".into(),
    })
}

/// CDF of the F distribution with (d1, d2) degrees of freedom, through the
/// regularized incomplete beta function.
pub fn f_cdf(x: f64, d1: f64, d2: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    beta_reg(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2))
}

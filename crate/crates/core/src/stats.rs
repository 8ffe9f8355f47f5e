//! Correlations with p-values and Fisher intervals, multiple-testing
//! correction, effect sizes and power.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Normal quantile used for every 95% interval.
pub const Z_95: f64 = 1.96;
/// Correlations over fewer points are flagged as having rough intervals.
pub const SMALL_SAMPLE: usize = 15;

const BETA_CF_TOL: f64 = 1e-10;
const BETA_CF_MAX_ITER: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub p_two_tailed: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
    pub small_sample: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectLabel {
    Negligible,
    Small,
    Medium,
    Large,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectSize {
    pub d: f64,
    pub label: EffectLabel,
}

impl EffectLabel {
    pub fn from_d(d: f64) -> Self {
        match d.abs() {
            a if a < 0.2 => EffectLabel::Negligible,
            a if a < 0.5 => EffectLabel::Small,
            a if a < 0.8 => EffectLabel::Medium,
            _ => EffectLabel::Large,
        }
    }
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=BETA_CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < BETA_CF_TOL {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Two-tailed p-value of a Student t statistic.
pub fn t_two_tailed(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    incomplete_beta(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

pub fn normal_cdf(z: f64) -> f64 {
    standard_normal().cdf(z)
}

pub fn normal_quantile(p: f64) -> f64 {
    standard_normal().inverse_cdf(p)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
}

fn correlation_from_r(r: f64, n: usize) -> CorrelationResult {
    let r = r.clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let t = if r.abs() == 1.0 {
        f64::INFINITY
    } else {
        r * (df / (1.0 - r * r)).sqrt()
    };
    let (ci_low, ci_high) = if n > 3 && r.abs() < 1.0 {
        let z = r.atanh();
        let half = Z_95 / ((n - 3) as f64).sqrt();
        ((z - half).tanh(), (z + half).tanh())
    } else if r.abs() == 1.0 {
        (r, r)
    } else {
        (-1.0, 1.0)
    };
    CorrelationResult {
        r,
        p_two_tailed: t_two_tailed(t, df),
        ci_low: ci_low.min(r),
        ci_high: ci_high.max(r),
        n,
        small_sample: n < SMALL_SAMPLE,
    }
}

/// Sample Pearson correlation with a t-test p-value and a Fisher-z 95%
/// interval.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!("lengths {} and {} differ", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::UndefinedCorrelation(format!("{n} points, need at least 3")));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant input".into()));
    }
    Ok(correlation_from_r(sxy / (sxx.sqrt() * syy.sqrt()), n))
}

/// 1-based ranks, ties sharing their average rank.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!("lengths {} and {} differ", x.len(), y.len())));
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Benjamini–Hochberg step-up procedure; returns reject flags in input order.
pub fn benjamini_hochberg(p: &[f64], q: f64) -> Vec<bool> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));
    let cutoff = (1..=m).rev().find(|&i| p[order[i - 1]] <= q * i as f64 / m as f64);
    let mut reject = vec![false; m];
    if let Some(i) = cutoff {
        for &k in &order[..i] {
            reject[k] = true;
        }
    }
    reject
}

/// Standardized mean difference with pooled standard deviation.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<EffectSize> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::UndefinedEffect("each group needs at least 2 values".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled = (((na - 1.0) * sample_var(a) + (nb - 1.0) * sample_var(b)) / (na + nb - 2.0)).sqrt();
    if pooled == 0.0 {
        return Err(Error::UndefinedEffect("zero pooled standard deviation".into()));
    }
    let d = (mean(a) - mean(b)) / pooled;
    Ok(EffectSize { d, label: EffectLabel::from_d(d) })
}

/// Approximate power of a two-sided correlation test via Fisher's z:
/// `Φ(|atanh ρ| · sqrt(n − 3) − z_{1−α/2})`.
pub fn power_correlation(rho: f64, n: usize, alpha: f64) -> f64 {
    let shift = rho.atanh().abs() * ((n as f64) - 3.0).sqrt();
    normal_cdf(shift - normal_quantile(1.0 - alpha / 2.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelchTest {
    pub mean_a: f64,
    pub mean_b: f64,
    pub t: f64,
    pub df: f64,
    pub p_two_tailed: f64,
}

/// Welch's unequal-variance t-test for a difference in means.
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<WelchTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::UndefinedEffect("each group needs at least 2 values".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (sample_var(a) / na, sample_var(b) / nb);
    if va + vb == 0.0 {
        return Err(Error::UndefinedEffect("both groups are constant".into()));
    }
    let t = (mean(a) - mean(b)) / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    Ok(WelchTest { mean_a: mean(a), mean_b: mean(b), t, df, p_two_tailed: t_two_tailed(t, df) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadComparison {
    pub sd_a: f64,
    pub sd_b: f64,
    pub n_a: usize,
    pub n_b: usize,
    /// `sd_a² / sd_b²`.
    pub variance_ratio: f64,
    /// Two-sided F-test p-value; absent when `sd_b` is zero.
    pub p_two_tailed: Option<f64>,
}

/// Compares sample standard deviations of two groups with an F-test.
pub fn compare_spread(a: &[f64], b: &[f64]) -> Result<SpreadComparison> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::UndefinedEffect("each group needs at least 2 values".into()));
    }
    let (va, vb) = (sample_var(a), sample_var(b));
    let (d1, d2) = ((a.len() - 1) as f64, (b.len() - 1) as f64);
    let (ratio, p) = if vb > 0.0 {
        let f = va / vb;
        let lower = incomplete_beta(d1 / 2.0, d2 / 2.0, d1 * f / (d1 * f + d2));
        (f, Some((2.0 * lower.min(1.0 - lower)).min(1.0)))
    } else {
        (f64::INFINITY, None)
    };
    Ok(SpreadComparison {
        sd_a: va.sqrt(),
        sd_b: vb.sqrt(),
        n_a: a.len(),
        n_b: b.len(),
        variance_ratio: ratio,
        p_two_tailed: p,
    })
}

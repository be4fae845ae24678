//! Hypothesis tests for within-subject designs.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, Normal, StudentsT};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("need at least {needed} observations, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("zero variance; the statistic is undefined")]
    ZeroVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub df1: Option<f64>,
    pub df2: Option<f64>,
    pub p_value: f64,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn check_pair(a: &[f64], b: &[f64]) -> Result<(), StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::DimensionMismatch(format!(
            "{} vs {} observations",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(StatsError::TooFew {
            needed: 2,
            got: a.len(),
        });
    }
    Ok(())
}

fn check_matrix(data: &[Vec<f64>]) -> Result<(usize, usize), StatsError> {
    let n = data.len();
    if n < 2 {
        return Err(StatsError::TooFew { needed: 2, got: n });
    }
    let k = data[0].len();
    if k < 2 {
        return Err(StatsError::TooFew { needed: 2, got: k });
    }
    if let Some(row) = data.iter().find(|r| r.len() != k) {
        return Err(StatsError::DimensionMismatch(format!(
            "row of {} conditions, expected {k}",
            row.len()
        )));
    }
    Ok((n, k))
}

/// Two-sided paired t test.
pub fn paired_t(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    check_pair(a, b)?;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let m = mean(&d);
    let var = d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let t = m / (var / n).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).expect("valid df");
    Ok(TestResult {
        statistic: t,
        df1: Some(n - 1.0),
        df2: None,
        p_value: (2.0 * dist.cdf(-t.abs())).min(1.0),
    })
}

/// One-way repeated-measures ANOVA on a participants x conditions matrix.
pub fn rm_anova_1way(data: &[Vec<f64>]) -> Result<TestResult, StatsError> {
    let (n, k) = check_matrix(data)?;
    let grand = data.iter().flatten().sum::<f64>() / (n * k) as f64;
    let col_means: Vec<f64> = (0..k)
        .map(|j| data.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let row_means: Vec<f64> = data.iter().map(|r| mean(r)).collect();
    let ss_cond = n as f64 * col_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ss_subj = k as f64 * row_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ss_total: f64 = data.iter().flatten().map(|x| (x - grand).powi(2)).sum();
    let ss_err = (ss_total - ss_cond - ss_subj).max(0.0);
    let df1 = (k - 1) as f64;
    let df2 = ((k - 1) * (n - 1)) as f64;
    if ss_err <= 1e-12 * ss_total.max(f64::MIN_POSITIVE) {
        return Err(StatsError::ZeroVariance);
    }
    let f = (ss_cond / df1) / (ss_err / df2);
    let dist = FisherSnedecor::new(df1, df2).expect("valid df");
    Ok(TestResult {
        statistic: f,
        df1: Some(df1),
        df2: Some(df2),
        p_value: dist.sf(f),
    })
}

/// Ranks starting at 1, ties sharing their average rank. Also returns the
/// sizes of the tie groups.
fn average_ranks(x: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && x[idx[j]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &p in &idx[i..j] {
            ranks[p] = r;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

/// Friedman rank-sum test with the tie correction; chi-square
/// approximation with `k - 1` degrees of freedom.
pub fn friedman(data: &[Vec<f64>]) -> Result<TestResult, StatsError> {
    let (n, k) = check_matrix(data)?;
    let mut rank_sums = vec![0.0; k];
    let mut tie_term = 0.0;
    for row in data {
        let (r, ties) = average_ranks(row);
        for (s, v) in rank_sums.iter_mut().zip(r) {
            *s += v;
        }
        tie_term += ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>();
    }
    let (nf, kf) = (n as f64, k as f64);
    let chi = 12.0 / (nf * kf * (kf + 1.0)) * rank_sums.iter().map(|r| r * r).sum::<f64>()
        - 3.0 * nf * (kf + 1.0);
    let correction = 1.0 - tie_term / (nf * (kf * kf * kf - kf));
    if correction <= 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let chi = chi / correction;
    let dist = ChiSquared::new(kf - 1.0).expect("valid df");
    Ok(TestResult {
        statistic: chi,
        df1: Some(kf - 1.0),
        df2: None,
        p_value: dist.sf(chi),
    })
}

/// Largest sample size for which the exact null distribution is used.
pub const WILCOXON_EXACT_MAX: usize = 25;

/// Two-sided Wilcoxon signed-rank test on paired samples.
///
/// Zero differences are dropped. The statistic is the smaller of the two
/// signed rank sums. Without ties and with at most [`WILCOXON_EXACT_MAX`]
/// nonzero differences the p-value is exact; otherwise it uses the normal
/// approximation with tie-corrected variance and no continuity correction.
/// If every difference is zero the result is `p = 1`.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    check_pair(a, b)?;
    let d: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    let n = d.len();
    if n == 0 {
        return Ok(TestResult {
            statistic: 0.0,
            df1: None,
            df2: None,
            p_value: 1.0,
        });
    }
    let abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    let (ranks, ties) = average_ranks(&abs);
    let w_plus: f64 = d
        .iter()
        .zip(&ranks)
        .filter(|(x, _)| **x > 0.0)
        .map(|(_, r)| r)
        .sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let w = w_plus.min(total - w_plus);
    let p = if ties.is_empty() && n <= WILCOXON_EXACT_MAX {
        exact_signed_rank_p(n, w)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let tie = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie;
        if var <= 0.0 {
            return Err(StatsError::ZeroVariance);
        }
        let z = (w - mean) / var.sqrt();
        2.0 * Normal::standard().cdf(z)
    };
    Ok(TestResult {
        statistic: w,
        df1: None,
        df2: None,
        p_value: p.min(1.0),
    })
}

/// `2 P(W <= w)` under the null, where `W` is the positive rank sum of `n`
/// untied differences.
fn exact_signed_rank_p(n: usize, w: f64) -> f64 {
    let max = n * (n + 1) / 2;
    // counts[s] = number of sign patterns with positive rank sum s
    let mut counts = vec![0f64; max + 1];
    counts[0] = 1.0;
    for r in 1..=n {
        for s in (r..=max).rev() {
            counts[s] += counts[s - r];
        }
    }
    let total = 2f64.powi(n as i32);
    let upto = w.floor() as usize;
    let tail: f64 = counts[..=upto.min(max)].iter().sum();
    2.0 * tail / total
}

/// Holm step-down adjustment; results are in the input order.
pub fn holm_adjust(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let mut out = vec![0.0; m];
    let mut running: f64 = 0.0;
    for (i, &idx) in order.iter().enumerate() {
        running = running.max(((m - i) as f64 * p[idx]).min(1.0));
        out[idx] = running;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn holm_example() {
        let adj = holm_adjust(&[0.01, 0.04, 0.03]);
        for (a, b) in adj.iter().zip([0.03, 0.06, 0.06]) {
            assert!(close(*a, b, 1e-15), "{adj:?}");
        }
        assert!(holm_adjust(&[]).is_empty());
        assert_eq!(holm_adjust(&[0.6, 0.5]), vec![1.0, 1.0]);
    }

    #[test]
    fn paired_t_reference() {
        let a = [12.1, 11.3, 14.2, 13.0, 12.7, 15.1, 11.8, 13.3];
        let b = [11.0, 11.9, 12.8, 12.2, 12.0, 13.9, 11.1, 12.1];
        let r = paired_t(&a, &b).unwrap();
        assert!(close(r.statistic, 3.6673280647021342, 1e-10));
        assert!(close(r.p_value, 0.007992438147197623, 1e-10));
        assert_eq!(paired_t(&a, &a), Err(StatsError::ZeroVariance));
        assert!(matches!(
            paired_t(&a, &b[..3]),
            Err(StatsError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn wilcoxon_exact_reference() {
        let a = [
            5.0, 9.0, 2.0, 7.0, 11.0, 3.0, 8.0, 6.0, 10.0, 4.0, 12.0, 1.0,
        ];
        let d = [
            1.5, -2.5, 3.5, 4.5, -0.5, 5.5, 6.5, 7.5, 8.5, -9.5, 10.5, 11.5,
        ];
        let b: Vec<f64> = a.iter().zip(d).map(|(x, y)| x + y).collect();
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.statistic, 14.0);
        assert!(close(r.p_value, 0.05224609375, 1e-12));
    }

    #[test]
    fn wilcoxon_normal_reference() {
        let x = [
            20, -26, 4, -6, -5, -2, -20, -2, -9, 33, 2, -4, -3, -7, -11, -4, 5, -2, 10, -2, 0, 15,
            5, -5, -2, 5, 19, -3, -2, 10, -9, -3, 9, 6, 1, 7, -28, 10, -10, -17,
        ];
        let y = [
            24, -19, 5, -8, -2, 1, -10, 5, -5, 42, 4, -6, 3, -1, -9, -5, 9, -11, 16, 3, -5, 18, 3,
            2, -9, 3, 26, 6, -10, 11, -4, -3, 20, 3, 6, 5, -18, 13, -9, -23,
        ];
        let x: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let y: Vec<f64> = y.iter().map(|&v| v as f64).collect();
        let r = wilcoxon_signed_rank(&x, &y).unwrap();
        assert_eq!(r.statistic, 201.5);
        assert!(close(r.p_value, 0.00841744509622583, 1e-9));
    }

    #[test]
    fn wilcoxon_all_zero_differences() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(wilcoxon_signed_rank(&a, &a).unwrap().p_value, 1.0);
    }

    fn textbook() -> Vec<Vec<f64>> {
        vec![
            vec![45.0, 50.0, 55.0],
            vec![42.0, 42.0, 45.0],
            vec![36.0, 41.0, 43.0],
            vec![39.0, 35.0, 40.0],
            vec![51.0, 55.0, 59.0],
            vec![44.0, 49.0, 56.0],
        ]
    }

    #[test]
    fn friedman_reference() {
        let r = friedman(&textbook()).unwrap();
        assert!(close(r.statistic, 10.17391304347826, 1e-10));
        assert!(close(r.p_value, 0.006176790235910907, 1e-10));
        let ties = vec![
            vec![1.0, 2.0, 2.0],
            vec![3.0, 3.0, 1.0],
            vec![2.0, 1.0, 3.0],
            vec![1.0, 3.0, 2.0],
            vec![2.0, 2.0, 2.0],
            vec![1.0, 2.0, 3.0],
        ];
        let r = friedman(&ties).unwrap();
        assert!(close(r.statistic, 2.111111111111105, 1e-10));
        assert!(close(r.p_value, 0.34799904079225635, 1e-10));
    }

    #[test]
    fn anova_reference() {
        let r = rm_anova_1way(&textbook()).unwrap();
        assert!(close(r.statistic, 12.53398058252427, 1e-9));
        assert_eq!((r.df1, r.df2), (Some(2.0), Some(10.0)));
        assert!(close(r.p_value, 0.001885590647025538, 1e-9));
    }
}

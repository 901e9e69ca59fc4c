use serde::Serialize;

use super::special::{
    chi_square_upper_tail, f_upper_tail, student_t_quantile, student_t_two_sided,
    studentized_range_upper_tail,
};
use super::StatsError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub test: &'static str,
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom; F-based tests report (between, within).
    pub df: Vec<f64>,
}

impl TestResult {
    fn new(test: &'static str, statistic: f64, p_value: f64, df: Vec<f64>) -> Self {
        Self {
            test,
            statistic,
            p_value: p_value.clamp(0.0, 1.0),
            df,
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sum of squared deviations from the mean.
fn sum_sq_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum()
}

fn check_finite(groups: &[&[f64]]) -> Result<(), StatsError> {
    if groups.iter().flat_map(|g| g.iter()).any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

fn check_groups(groups: &[&[f64]], min_size: usize) -> Result<(), StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups(groups.len()));
    }
    if let Some((i, g)) = groups.iter().enumerate().find(|(_, g)| g.len() < min_size) {
        return Err(StatsError::GroupTooSmall {
            group: i,
            size: g.len(),
            needed: min_size,
        });
    }
    check_finite(groups)
}

/// Within-group mean square and its degrees of freedom.
fn pooled_within(groups: &[&[f64]]) -> (f64, f64) {
    let ss: f64 = groups.iter().map(|g| sum_sq_dev(g)).sum();
    let n: usize = groups.iter().map(|g| g.len()).sum();
    let df = (n - groups.len()) as f64;
    (ss / df, df)
}

pub fn one_way_anova(groups: &[&[f64]]) -> Result<TestResult, StatsError> {
    check_groups(groups, 2)?;
    let all: Vec<f64> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    let grand = mean(&all);
    let ss_between: f64 = groups
        .iter()
        .map(|g| g.len() as f64 * (mean(g) - grand).powi(2))
        .sum();
    let df_between = (groups.len() - 1) as f64;
    let (ms_within, df_within) = pooled_within(groups);
    if ms_within == 0.0 {
        return Err(StatsError::ZeroVariance("one-way ANOVA"));
    }
    let f = (ss_between / df_between) / ms_within;
    Ok(TestResult::new(
        "one-way ANOVA",
        f,
        f_upper_tail(f, df_between, df_within),
        vec![df_between, df_within],
    ))
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Levene's test for equal variances, median-centered (Brown–Forsythe).
pub fn levene_test(groups: &[&[f64]]) -> Result<TestResult, StatsError> {
    check_groups(groups, 2)?;
    let dev: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| {
            let m = median(g);
            g.iter().map(|x| (x - m).abs()).collect()
        })
        .collect();
    let refs: Vec<&[f64]> = dev.iter().map(|d| d.as_slice()).collect();
    let r = one_way_anova(&refs).map_err(|e| match e {
        StatsError::ZeroVariance(_) => StatsError::ZeroVariance("Levene test"),
        other => other,
    })?;
    Ok(TestResult {
        test: "Levene (median)",
        ..r
    })
}

/// Average ranks (1-based) with ties sharing the mean rank, plus the tie
/// correction sum `Σ (t³ − t)`.
pub fn ranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut ties = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        let t = (j - i + 1) as f64;
        ties += t * t * t - t;
        i = j + 1;
    }
    (out, ties)
}

/// Kruskal–Wallis H with tie correction; chi-square p-value.
pub fn kruskal_wallis(groups: &[&[f64]]) -> Result<TestResult, StatsError> {
    check_groups(groups, 1)?;
    let all: Vec<f64> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    let n = all.len() as f64;
    let (r, ties) = ranks(&all);
    let mut offset = 0;
    let mut sum = 0.0;
    for g in groups {
        let rs: f64 = r[offset..offset + g.len()].iter().sum();
        sum += rs * rs / g.len() as f64;
        offset += g.len();
    }
    let df = (groups.len() - 1) as f64;
    let correction = 1.0 - ties / (n * n * n - n);
    if correction <= 0.0 {
        // every observation tied: no evidence against the null
        return Ok(TestResult::new("Kruskal-Wallis", 0.0, 1.0, vec![df]));
    }
    let h = ((12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0)) / correction).max(0.0);
    Ok(TestResult::new(
        "Kruskal-Wallis",
        h,
        chi_square_upper_tail(h, df),
        vec![df],
    ))
}

/// Significance stars: `***` for p < 0.001, `**` for p < 0.01, `*` for
/// p < 0.05.
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairComparison {
    pub group_a: usize,
    pub group_b: usize,
    /// `mean_b − mean_a`.
    pub mean_difference: f64,
    pub q: f64,
    pub p_value: f64,
    pub significant: bool,
    pub stars: &'static str,
}

/// Tukey's honest significant difference (Tukey–Kramer for unequal sizes).
pub fn tukey_hsd(groups: &[&[f64]], alpha: f64) -> Result<Vec<PairComparison>, StatsError> {
    check_groups(groups, 2)?;
    let k = groups.len();
    let (mse, df) = pooled_within(groups);
    if mse == 0.0 {
        return Err(StatsError::ZeroVariance("Tukey HSD"));
    }
    let means: Vec<f64> = groups.iter().map(|g| mean(g)).collect();
    let mut out = Vec::with_capacity(k * (k - 1) / 2);
    for a in 0..k {
        for b in a + 1..k {
            let se = (mse / 2.0 * (1.0 / groups[a].len() as f64 + 1.0 / groups[b].len() as f64))
                .sqrt();
            let diff = means[b] - means[a];
            let q = diff.abs() / se;
            let p = studentized_range_upper_tail(q, k, df)?;
            out.push(PairComparison {
                group_a: a,
                group_b: b,
                mean_difference: diff,
                q,
                p_value: p,
                significant: p < alpha,
                stars: stars(p),
            });
        }
    }
    Ok(out)
}

fn sample_var(xs: &[f64]) -> f64 {
    sum_sq_dev(xs) / (xs.len() - 1) as f64
}

/// Student's two-sample t-test with pooled variance.
pub fn independent_t_test(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    check_groups(&[a, b], 2)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let df = na + nb - 2.0;
    let pooled = (sum_sq_dev(a) + sum_sq_dev(b)) / df;
    if pooled == 0.0 {
        return Err(StatsError::ZeroVariance("independent t-test"));
    }
    let t = (mean(a) - mean(b)) / (pooled * (1.0 / na + 1.0 / nb)).sqrt();
    Ok(TestResult::new(
        "independent t-test",
        t,
        student_t_two_sided(t, df),
        vec![df],
    ))
}

/// Welch's unequal-variance t-test with Welch–Satterthwaite df.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    check_groups(&[a, b], 2)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (sample_var(a) / na, sample_var(b) / nb);
    if va + vb == 0.0 {
        return Err(StatsError::ZeroVariance("Welch t-test"));
    }
    let t = (mean(a) - mean(b)) / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    Ok(TestResult::new(
        "Welch t-test",
        t,
        student_t_two_sided(t, df),
        vec![df],
    ))
}

/// Dependent-samples t-test on the differences `a − b`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(StatsError::GroupTooSmall {
            group: 0,
            size: a.len(),
            needed: 2,
        });
    }
    check_finite(&[a, b])?;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let m = mean(&d);
    let sd = sample_var(&d).sqrt();
    let df = n - 1.0;
    if sd == 0.0 {
        if m == 0.0 {
            return Ok(TestResult::new("paired t-test", 0.0, 1.0, vec![df]));
        }
        return Err(StatsError::ZeroVariance("paired t-test"));
    }
    let t = m / (sd / n.sqrt());
    Ok(TestResult::new(
        "paired t-test",
        t,
        student_t_two_sided(t, df),
        vec![df],
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub n: usize,
    pub mean: f64,
    pub sd: Option<f64>,
    /// 95% confidence interval for the mean; `None` when `n < 2`.
    pub ci95: Option<(f64, f64)>,
}

/// Mean with a `mean ± t_{0.975, n−1} · s / √n` interval.
pub fn group_summary(values: &[f64]) -> Result<GroupSummary, StatsError> {
    if values.is_empty() {
        return Err(StatsError::GroupTooSmall {
            group: 0,
            size: 0,
            needed: 1,
        });
    }
    check_finite(&[values])?;
    let n = values.len();
    let m = mean(values);
    if n < 2 {
        return Ok(GroupSummary {
            n,
            mean: m,
            sd: None,
            ci95: None,
        });
    }
    let sd = sample_var(values).sqrt();
    let half = student_t_quantile(0.975, (n - 1) as f64)? * sd / (n as f64).sqrt();
    Ok(GroupSummary {
        n,
        mean: m,
        sd: Some(sd),
        ci95: Some((m - half, m + half)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anova_identical_means() {
        let a = [1.0, 2.0, 3.0];
        let b = [3.0, 2.0, 1.0];
        let r = one_way_anova(&[&a, &b]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn anova_errors() {
        assert!(matches!(
            one_way_anova(&[&[1.0, 2.0]]),
            Err(StatsError::TooFewGroups(1))
        ));
        assert!(matches!(
            one_way_anova(&[&[1.0, 2.0], &[3.0]]),
            Err(StatsError::GroupTooSmall { group: 1, .. })
        ));
        assert!(matches!(
            one_way_anova(&[&[1.0, 1.0], &[3.0, 3.0]]),
            Err(StatsError::ZeroVariance(_))
        ));
        assert!(matches!(
            one_way_anova(&[&[1.0, f64::NAN], &[3.0, 3.0]]),
            Err(StatsError::NonFinite)
        ));
    }

    #[test]
    fn levene_single_value_groups_error() {
        assert!(levene_test(&[&[1.0], &[2.0]]).is_err());
    }

    #[test]
    fn kruskal_identical_and_tied() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let r = kruskal_wallis(&[&a, &a]).unwrap();
        assert!(r.statistic.abs() < 1e-12);
        let t = [5.0; 4];
        let r = kruskal_wallis(&[&t, &t, &t]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn ranks_average_ties() {
        let (r, ties) = ranks(&[10.0, 20.0, 10.0, 30.0]);
        assert_eq!(r, vec![1.5, 3.0, 1.5, 4.0]);
        assert_eq!(ties, 6.0);
    }

    #[test]
    fn star_levels() {
        assert_eq!(stars(0.0005), "***");
        assert_eq!(stars(0.005), "**");
        assert_eq!(stars(0.02), "*");
        assert_eq!(stars(0.2), "");
    }

    #[test]
    fn tukey_identical_groups_not_significant() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let pairs = tukey_hsd(&[&a, &a, &a], 0.05).unwrap();
        assert_eq!(pairs.len(), 3);
        assert!(pairs.iter().all(|p| !p.significant && p.q == 0.0));
    }

    #[test]
    fn paired_equal_samples() {
        let a = [1.0, 5.0, 2.0];
        let r = paired_t_test(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(matches!(
            paired_t_test(&a, &[1.0, 2.0]),
            Err(StatsError::LengthMismatch(3, 2))
        ));
    }

    #[test]
    fn welch_matches_pooled_for_equal_designs() {
        let a = [1.0, 2.5, 3.0, 4.2];
        let b = [2.0, 2.9, 5.1, 3.3];
        // rescale b around its mean so both variances match exactly
        let sa = (sum_sq_dev(&a)).sqrt();
        let mb = b.iter().sum::<f64>() / 4.0;
        let sb = (sum_sq_dev(&b)).sqrt();
        let b: Vec<f64> = b.iter().map(|x| mb + (x - mb) * sa / sb).collect();
        let i = independent_t_test(&a, &b).unwrap();
        let w = welch_t_test(&a, &b).unwrap();
        assert!((i.statistic - w.statistic).abs() < 1e-9);
        assert!((i.p_value - w.p_value).abs() < 1e-9);
        assert!((w.df[0] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn summaries() {
        let s = group_summary(&[4.0]).unwrap();
        assert_eq!(s.ci95, None);
        let s = group_summary(&[2.0, 2.0, 2.0]).unwrap();
        assert_eq!(s.ci95, Some((2.0, 2.0)));
        let s = group_summary(&[1.0, 2.0, 3.0]).unwrap();
        // t_{0.975,2} = 4.302652729911275, s = 1
        let half = 4.302_652_729_911_275 / 3f64.sqrt();
        let (lo, hi) = s.ci95.unwrap();
        assert!((lo - (2.0 - half)).abs() < 1e-9 && (hi - (2.0 + half)).abs() < 1e-9);
    }
}

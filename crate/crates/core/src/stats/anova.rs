//! One-way analysis of variance.

use super::dist::f_survival;
use super::{check_finite, DegreesOfFreedom, SampleGroup, StatsError, TestResult};

/// F = MSB/MSW with degrees of freedom (g-1, N-g); p-value from the F
/// survival function.
///
/// Conventions: identical group means give F = 0 (p = 1); distinct means
/// with zero within-group variance give F = +inf (p = 0).
pub fn one_way_anova(groups: &[SampleGroup]) -> Result<TestResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups { required: 2, got: groups.len() });
    }
    for g in groups {
        if g.len() < 2 {
            return Err(StatsError::GroupTooSmall {
                name: g.name.clone(),
                required: 2,
                got: g.len(),
            });
        }
        check_finite(g)?;
    }

    let (ssb, ssw, df1, df2) = sums_of_squares(groups);
    let msb = ssb / df1;
    let msw = ssw / df2;
    let df = Some(DegreesOfFreedom::Pair(df1, df2));

    if msb == 0.0 {
        return Ok(TestResult::at_alpha(0.0, 1.0, df));
    }
    if msw == 0.0 {
        return Ok(TestResult::at_alpha(f64::INFINITY, 0.0, df));
    }
    let f = msb / msw;
    Ok(TestResult::at_alpha(f, f_survival(f, df1, df2), df))
}

/// (SSB, SSW, df_between, df_within); shared with the Tukey-Kramer test.
pub(crate) fn sums_of_squares(groups: &[SampleGroup]) -> (f64, f64, f64, f64) {
    let n_total: usize = groups.iter().map(|g| g.len()).sum();
    let grand_mean: f64 =
        groups.iter().flat_map(|g| g.values.iter()).sum::<f64>() / n_total as f64;

    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups {
        let mean = g.mean();
        ssb += g.len() as f64 * (mean - grand_mean) * (mean - grand_mean);
        ssw += g.values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    }
    let df1 = (groups.len() - 1) as f64;
    let df2 = (n_total - groups.len()) as f64;
    (ssb, ssw, df1, df2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn groups(data: &[&[f64]]) -> Vec<SampleGroup> {
        data.iter()
            .enumerate()
            .map(|(i, vals)| SampleGroup::new(format!("g{i}"), vals.to_vec()))
            .collect()
    }

    #[test]
    fn hand_computed_example() {
        // SSB = 3[(2-3)^2 + 0 + (4-3)^2] = 6, MSB = 3; SSW = 6, MSW = 1.
        let g = groups(&[&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0], &[3.0, 4.0, 5.0]]);
        let r = one_way_anova(&g).unwrap();
        assert_abs_diff_eq!(r.statistic, 3.0, epsilon = 1e-12);
        assert_eq!(r.df, Some(DegreesOfFreedom::Pair(2.0, 6.0)));
        // Frozen from scipy.stats.f.sf(3.0, 2, 6)
        assert_abs_diff_eq!(r.p_value, 0.125, epsilon = 1e-10);
    }

    #[test]
    fn identical_groups_give_zero_f() {
        let g = groups(&[&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]]);
        let r = one_way_anova(&g).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.reject);
    }

    #[test]
    fn zero_within_variance_distinct_means() {
        let g = groups(&[&[1.0, 1.0, 1.0], &[2.0, 2.0, 2.0]]);
        let r = one_way_anova(&g).unwrap();
        assert!(r.statistic.is_infinite());
        assert_eq!(r.p_value, 0.0);
        assert!(r.reject);
    }

    #[test]
    fn all_constant_gives_zero_f() {
        let g = groups(&[&[5.0, 5.0], &[5.0, 5.0]]);
        let r = one_way_anova(&g).unwrap();
        assert_eq!(r.statistic, 0.0);
    }

    #[test]
    fn rejects_small_inputs() {
        assert!(matches!(
            one_way_anova(&groups(&[&[1.0, 2.0]])),
            Err(StatsError::TooFewGroups { .. })
        ));
        assert!(matches!(
            one_way_anova(&groups(&[&[1.0, 2.0], &[1.0]])),
            Err(StatsError::GroupTooSmall { .. })
        ));
    }

    #[test]
    fn f_monotone_in_group_separation() {
        // Pushing whole groups away from the grand mean quadruples SSB while
        // leaving SSW fixed, so F must not decrease; spreading observations
        // around their own group mean does the opposite.
        let seeds = [
            vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]],
            vec![vec![0.5, 0.7, 1.1, 0.9], vec![0.4, 0.6, 0.8], vec![1.5, 1.2, 1.9]],
        ];
        for data in seeds {
            let base: Vec<SampleGroup> = data
                .iter()
                .enumerate()
                .map(|(i, v)| SampleGroup::new(format!("g{i}"), v.clone()))
                .collect();
            let n_total: usize = base.iter().map(|g| g.len()).sum();
            let grand: f64 =
                base.iter().flat_map(|g| g.values.iter()).sum::<f64>() / n_total as f64;

            let apart: Vec<SampleGroup> = base
                .iter()
                .map(|g| {
                    let shift = g.mean() - grand;
                    SampleGroup::new(g.name.clone(), g.values.iter().map(|v| v + shift).collect())
                })
                .collect();
            let spread: Vec<SampleGroup> = base
                .iter()
                .map(|g| {
                    let m = g.mean();
                    SampleGroup::new(
                        g.name.clone(),
                        g.values.iter().map(|v| m + 2.0 * (v - m)).collect(),
                    )
                })
                .collect();

            let f_base = one_way_anova(&base).unwrap().statistic;
            let f_apart = one_way_anova(&apart).unwrap().statistic;
            let f_spread = one_way_anova(&spread).unwrap().statistic;
            assert!(f_apart >= f_base, "{f_apart} < {f_base}");
            assert!(f_spread <= f_base, "{f_spread} > {f_base}");
        }
    }
}

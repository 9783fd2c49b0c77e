//! Anderson-Darling normality test against the normal distribution with
//! estimated mean and variance (the "both parameters unknown" case).

use super::dist::ln_normal_cdf;
use super::{check_finite, DegreesOfFreedom, SampleGroup, StatsError, TestResult};

/// A² statistic with the small-sample correction
/// A*² = A²(1 + 0.75/n + 2.25/n²) and the associated p-value.
///
/// The reported `statistic` is the uncorrected A²; the decision and p-value
/// use the corrected value.
pub fn anderson_darling(group: &SampleGroup) -> Result<TestResult, StatsError> {
    let n = group.len();
    if n < 4 {
        return Err(StatsError::SampleSizeOutOfRange { n, min: 4, max: usize::MAX });
    }
    check_finite(group)?;

    let mut x = group.values.clone();
    x.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
    if var <= 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    let sd = var.sqrt();

    let mut sum = 0.0;
    for i in 0..n {
        let zi = (x[i] - mean) / sd;
        let zrev = (x[n - 1 - i] - mean) / sd;
        // ln Phi(z_i) + ln(1 - Phi(z_{n+1-i})), both via the stable lower tail.
        sum += (2.0 * i as f64 + 1.0) * (ln_normal_cdf(zi) + ln_normal_cdf(-zrev));
    }
    let a2 = -nf - sum / nf;
    let corrected = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    let p = p_value(corrected);
    Ok(TestResult::at_alpha(a2, p, Some(DegreesOfFreedom::Single(nf))))
}

/// Corrected statistic for comparing against the standard critical values
/// (0.631 / 0.752 / 0.873 / 1.035 at 10% / 5% / 2.5% / 1%).
pub fn corrected_statistic(a2: f64, n: usize) -> f64 {
    let nf = n as f64;
    a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf))
}

/// P-value for the corrected statistic, piecewise exponential fit
/// (D'Agostino & Stephens, the form used by R's `nortest::ad.test`).
fn p_value(a: f64) -> f64 {
    let p = if a < 0.2 {
        1.0 - (-13.436 + 101.14 * a - 223.73 * a * a).exp()
    } else if a < 0.34 {
        1.0 - (-8.318 + 42.796 * a - 59.938 * a * a).exp()
    } else if a < 0.6 {
        (0.9177 - 4.279 * a - 1.38 * a * a).exp()
    } else {
        (1.2937 - 5.709 * a + 0.0186 * a * a).exp()
    };
    p.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn group(values: &[f64]) -> SampleGroup {
        SampleGroup::new("g", values.to_vec())
    }

    #[test]
    fn matches_reference_statistic() {
        // Frozen from scipy.stats.anderson(..., 'norm').statistic
        let s1 = [148.0, 154.0, 158.0, 160.0, 161.0, 162.0, 166.0, 170.0, 182.0, 195.0, 236.0];
        let r1 = anderson_darling(&group(&s1)).unwrap();
        assert_abs_diff_eq!(r1.statistic, 0.9467718796, epsilon = 1e-8);
        assert_abs_diff_eq!(corrected_statistic(r1.statistic, 11), 1.0289297700, epsilon = 1e-8);
        assert!(r1.reject, "A*^2 > 1.035 implies p < 0.01");

        let s2 = [
            0.1, -0.5, 0.3, 1.2, -0.8, 0.4, -0.2, 0.9, -0.3, 0.6, -0.1, 0.7, -0.4, 0.2, 1.1,
            -0.6, 0.8, -0.9, 0.5, -0.7,
        ];
        let r2 = anderson_darling(&group(&s2)).unwrap();
        assert_abs_diff_eq!(r2.statistic, 0.2464430145, epsilon = 1e-8);
        assert!(!r2.reject);
    }

    #[test]
    fn better_normal_fit_scores_lower() {
        // A normal-shaped sample fits better than an evenly spaced (uniform)
        // one, so its A² must be lower.
        let n = 40;
        let normal_shaped: Vec<f64> = (1..=n)
            .map(|i| crate::stats::dist::normal_quantile(i as f64 / (n as f64 + 1.0)))
            .collect();
        let uniform: Vec<f64> = (1..=n).map(|i| i as f64).collect();
        let a_norm = anderson_darling(&group(&normal_shaped)).unwrap().statistic;
        let a_unif = anderson_darling(&group(&uniform)).unwrap().statistic;
        assert!(
            a_norm < a_unif,
            "normal-shaped {a_norm} should be below uniform {a_unif}"
        );
    }

    #[test]
    fn constant_sample_is_degenerate() {
        assert_eq!(
            anderson_darling(&group(&[1.0, 1.0, 1.0, 1.0, 1.0])),
            Err(StatsError::DegenerateVariance)
        );
    }

    #[test]
    fn statistic_invariant_under_affine_transform() {
        let base = [0.3, -1.1, 0.8, 2.2, -0.4, 0.1, 1.4, -0.9, 0.6, -0.2];
        let scaled: Vec<f64> = base.iter().map(|v| -2.0 * v + 7.0).collect();
        let r1 = anderson_darling(&group(&base)).unwrap();
        let r2 = anderson_darling(&group(&scaled)).unwrap();
        assert_abs_diff_eq!(r1.statistic, r2.statistic, epsilon = 1e-9);
    }
}

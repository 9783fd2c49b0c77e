//! Shapiro-Wilk normality test, Royston's approximation (AS R94).
//!
//! Supported sample sizes are 3..=50; the coefficient and p-value
//! approximations are the ones behind R's `shapiro.test`.

use super::dist::{normal_cdf, normal_quantile};
use super::{check_finite, DegreesOfFreedom, SampleGroup, StatsError, TestResult};

const MIN_N: usize = 3;
const MAX_N: usize = 50;

/// W statistic and p-value for the null hypothesis that the sample is
/// normally distributed.
pub fn shapiro_wilk(group: &SampleGroup) -> Result<TestResult, StatsError> {
    let n = group.len();
    if !(MIN_N..=MAX_N).contains(&n) {
        return Err(StatsError::SampleSizeOutOfRange {
            n,
            min: MIN_N,
            max: MAX_N,
        });
    }
    check_finite(group)?;

    let mut x = group.values.clone();
    x.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    if x[n - 1] - x[0] == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }

    let a = royston_weights(n);
    let mean = x.iter().sum::<f64>() / n as f64;
    let num: f64 = a.iter().zip(&x).map(|(ai, xi)| ai * xi).sum();
    let den: f64 = x.iter().map(|xi| (xi - mean) * (xi - mean)).sum();
    let w = (num * num / den).clamp(0.0, 1.0);

    let p = royston_p_value(w, n);
    Ok(TestResult::at_alpha(w, p, Some(DegreesOfFreedom::Single(n as f64))))
}

/// Coefficient vector a_1..a_n (antisymmetric, a_i = -a_{n+1-i}).
fn royston_weights(n: usize) -> Vec<f64> {
    if n == 3 {
        return vec![-std::f64::consts::FRAC_1_SQRT_2, 0.0, std::f64::consts::FRAC_1_SQRT_2];
    }
    // Expected normal order statistics via the Blom-style approximation.
    let m: Vec<f64> = (1..=n)
        .map(|i| normal_quantile((i as f64 - 0.375) / (n as f64 + 0.25)))
        .collect();
    let ssq: f64 = m.iter().map(|v| v * v).sum();
    let rsn = 1.0 / (n as f64).sqrt();

    const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056];
    const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];

    let cn = m[n - 1] / ssq.sqrt();
    let an = cn + poly(&C1, rsn);
    let mut a = vec![0.0; n];
    a[n - 1] = an;
    a[0] = -an;

    if n > 5 {
        let cn1 = m[n - 2] / ssq.sqrt();
        let an1 = cn1 + poly(&C2, rsn);
        a[n - 2] = an1;
        a[1] = -an1;
        let fac = ((ssq - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2])
            / (1.0 - 2.0 * an * an - 2.0 * an1 * an1))
            .sqrt();
        for i in 2..n - 2 {
            a[i] = m[i] / fac;
        }
    } else {
        let fac =
            ((ssq - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * an * an)).sqrt();
        for i in 1..n - 1 {
            a[i] = m[i] / fac;
        }
    }
    a
}

/// P-value transformation from AS R94 (normalizing transforms of 1 - W).
fn royston_p_value(w: f64, n: usize) -> f64 {
    if w >= 1.0 {
        return 1.0;
    }
    if n == 3 {
        // Exact small-sample formula.
        let pi6 = 6.0 / std::f64::consts::PI;
        let stqr = std::f64::consts::FRAC_PI_3;
        return (pi6 * (w.sqrt().asin() - stqr)).clamp(0.0, 1.0);
    }

    const G: [f64; 2] = [-2.273, 0.459];
    const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
    const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
    const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
    const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];

    let an = n as f64;
    let (z, mu, sigma) = if n <= 11 {
        let gamma = poly(&G, an);
        let y = (1.0 - w).ln();
        if y >= gamma {
            return 0.0;
        }
        let y = -(gamma - y).ln();
        (y, poly(&C3, an), poly(&C4, an).exp())
    } else {
        let ln_n = an.ln();
        ((1.0 - w).ln(), poly(&C5, ln_n), poly(&C6, ln_n).exp())
    };
    (1.0 - normal_cdf((z - mu) / sigma)).clamp(0.0, 1.0)
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

//! Min-max feature scaling fit on training folds only.

use serde::{Deserialize, Serialize};

/// Per-feature [0,1] scaler. Test-fold values outside the training range are
/// not clipped, so distance orderings stay monotone; constant training
/// features map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(rows: &[Vec<f64>]) -> MinMaxScaler {
        assert!(!rows.is_empty(), "cannot fit a scaler on zero rows");
        let d = rows[0].len();
        let mut mins = vec![f64::INFINITY; d];
        let mut maxs = vec![f64::NEG_INFINITY; d];
        for row in rows {
            for (j, &v) in row.iter().enumerate() {
                mins[j] = mins[j].min(v);
                maxs[j] = maxs[j].max(v);
            }
        }
        MinMaxScaler { mins, maxs }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| {
                let span = self.maxs[j] - self.mins[j];
                if span == 0.0 {
                    0.0
                } else {
                    (v - self.mins[j]) / span
                }
            })
            .collect()
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }

    pub fn n_features(&self) -> usize {
        self.mins.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn maps_train_range_to_unit_interval() {
        let rows = vec![vec![2.0], vec![4.0], vec![6.0]];
        let scaler = MinMaxScaler::fit(&rows);
        let scaled = scaler.transform(&rows);
        assert_abs_diff_eq!(scaled[0][0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(scaled[1][0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(scaled[2][0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn no_clipping_outside_train_range() {
        let scaler = MinMaxScaler::fit(&[vec![0.0], vec![10.0]]);
        assert_abs_diff_eq!(scaler.transform_row(&[15.0])[0], 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(scaler.transform_row(&[-5.0])[0], -0.5, epsilon = 1e-15);
    }

    #[test]
    fn constant_feature_maps_to_zero() {
        let scaler = MinMaxScaler::fit(&[vec![3.0, 1.0], vec![3.0, 2.0]]);
        let out = scaler.transform_row(&[3.0, 1.5]);
        assert_eq!(out[0], 0.0);
        assert_abs_diff_eq!(out[1], 0.5, epsilon = 1e-15);
        // Even unseen values of a constant feature map to 0.
        assert_eq!(scaler.transform_row(&[99.0, 1.0])[0], 0.0);
    }
}

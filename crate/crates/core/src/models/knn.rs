//! k-nearest-neighbour classifier with Euclidean distance.

use super::{closed_majority, ModelError, Neighbor};
use crate::domain::ZoneStatus;
use serde::{Deserialize, Serialize};

/// Stores the (scaled) training set verbatim; queries vote among the k
/// nearest rows. Distance ties at the k-th boundary admit the lower row
/// index; vote ties go to Closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnClassifier {
    pub k: usize,
    pub train_x: Vec<Vec<f64>>,
    pub train_y: Vec<ZoneStatus>,
}

impl KnnClassifier {
    pub fn fit(x: &[Vec<f64>], y: &[ZoneStatus], k: usize) -> Result<Self, ModelError> {
        if x.is_empty() {
            return Err(ModelError::EmptyTrainSet);
        }
        if k == 0 || k > x.len() {
            return Err(ModelError::TrainTooSmall { k, n_train: x.len() });
        }
        Ok(KnnClassifier {
            k,
            train_x: x.to_vec(),
            train_y: y.to_vec(),
        })
    }

    pub fn predict(&self, row: &[f64]) -> Result<ZoneStatus, ModelError> {
        Ok(self.predict_with_neighbors(row)?.0)
    }

    pub fn predict_with_neighbors(
        &self,
        row: &[f64],
    ) -> Result<(ZoneStatus, Vec<Neighbor>), ModelError> {
        let d = self.train_x[0].len();
        if row.len() != d {
            return Err(ModelError::ArityMismatch { expected: d, got: row.len() });
        }
        let mut dists: Vec<(f64, usize)> = self
            .train_x
            .iter()
            .enumerate()
            .map(|(i, t)| (euclidean(t, row), i))
            .collect();
        // Lexicographic (distance, index) order makes the boundary tie-break
        // "lower row index wins" explicit.
        dists.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .expect("finite distances")
                .then(a.1.cmp(&b.1))
        });

        let neighbors: Vec<Neighbor> = dists[..self.k]
            .iter()
            .map(|&(distance, train_index)| Neighbor {
                train_index,
                distance,
                label: self.train_y[train_index],
            })
            .collect();
        let closed = neighbors.iter().filter(|n| n.label.is_closed()).count();
        Ok((closed_majority(closed, self.k - closed), neighbors))
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ZoneStatus::{Closed, Open};

    #[test]
    fn nearest_neighbour_wins() {
        // Exhaustive check: d((0.9,0.9),(1,1)) = sqrt(0.02) < d to (0,0).
        let m = KnnClassifier::fit(
            &[vec![0.0, 0.0], vec![1.0, 1.0]],
            &[Open, Closed],
            1,
        )
        .unwrap();
        assert_eq!(m.predict(&[0.9, 0.9]).unwrap(), Closed);
        assert_eq!(m.predict(&[0.1, 0.1]).unwrap(), Open);
    }

    #[test]
    fn vote_tie_resolves_closed() {
        let m = KnnClassifier::fit(
            &[vec![0.0], vec![1.0]],
            &[Open, Closed],
            2,
        )
        .unwrap();
        assert_eq!(m.predict(&[0.5]).unwrap(), Closed);
        // Even when the open neighbour is closer.
        assert_eq!(m.predict(&[0.1]).unwrap(), Closed);
    }

    #[test]
    fn query_on_training_point_returns_its_label() {
        let m = KnnClassifier::fit(
            &[vec![2.0, 3.0], vec![5.0, 1.0]],
            &[Open, Closed],
            1,
        )
        .unwrap();
        let (label, neighbors) = m.predict_with_neighbors(&[2.0, 3.0]).unwrap();
        assert_eq!(label, Open);
        assert_eq!(neighbors[0].distance, 0.0);
        assert_eq!(neighbors[0].train_index, 0);
    }

    #[test]
    fn distance_tie_at_boundary_prefers_lower_index() {
        // Rows 1 and 2 are equidistant from the query; k = 2 must pick
        // row 0 (distance 0) and then row 1, not row 2.
        let m = KnnClassifier::fit(
            &[vec![0.0], vec![1.0], vec![-1.0]],
            &[Open, Open, Closed],
            2,
        )
        .unwrap();
        let (label, neighbors) = m.predict_with_neighbors(&[0.0]).unwrap();
        let picked: Vec<usize> = neighbors.iter().map(|n| n.train_index).collect();
        assert_eq!(picked, vec![0, 1]);
        assert_eq!(label, Open);
    }

    #[test]
    fn k_larger_than_train_set_rejected() {
        assert_eq!(
            KnnClassifier::fit(&[vec![0.0]], &[Open], 2),
            Err(ModelError::TrainTooSmall { k: 2, n_train: 1 })
        );
    }

    #[test]
    fn returns_exactly_k_neighbors() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y = vec![Open; 10];
        for k in 1..=10 {
            let m = KnnClassifier::fit(&x, &y, k).unwrap();
            let (_, neighbors) = m.predict_with_neighbors(&[3.2]).unwrap();
            assert_eq!(neighbors.len(), k);
        }
    }

    #[test]
    fn permutation_invariant_with_distinct_distances() {
        let x = vec![vec![0.0], vec![1.0], vec![3.0], vec![7.0]];
        let y = vec![Open, Closed, Closed, Open];
        let m1 = KnnClassifier::fit(&x, &y, 3).unwrap();

        let xp = vec![vec![7.0], vec![3.0], vec![0.0], vec![1.0]];
        let yp = vec![Open, Closed, Open, Closed];
        let m2 = KnnClassifier::fit(&xp, &yp, 3).unwrap();

        for q in [-0.5, 0.4, 2.0, 5.0, 10.0] {
            assert_eq!(m1.predict(&[q]).unwrap(), m2.predict(&[q]).unwrap(), "query {q}");
        }
    }
}

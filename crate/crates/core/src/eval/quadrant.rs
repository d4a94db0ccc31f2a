use serde::{Deserialize, Serialize};

use super::split::Edge;
use crate::error::{Error, Result};
use crate::numeric::{cosine_distance, Matrix};

/// Region of the (network distance, topic distance) plane. The first word is
/// the network axis, the second the topic axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Quadrant {
    LowLow,
    LowHigh,
    HighLow,
    HighHigh,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [
        Quadrant::LowLow,
        Quadrant::LowHigh,
        Quadrant::HighLow,
        Quadrant::HighHigh,
    ];

    pub fn from_axes(network_high: bool, topic_high: bool) -> Quadrant {
        match (network_high, topic_high) {
            (false, false) => Quadrant::LowLow,
            (false, true) => Quadrant::LowHigh,
            (true, false) => Quadrant::HighLow,
            (true, true) => Quadrant::HighHigh,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Quadrant::LowLow => "LowLow",
            Quadrant::LowHigh => "LowHigh",
            Quadrant::HighLow => "HighLow",
            Quadrant::HighHigh => "HighHigh",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub network: f64,
    pub topic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadrantAssignment {
    pub network_distance: Vec<f64>,
    pub topic_distance: Vec<f64>,
    pub quadrant: Vec<Quadrant>,
    pub thresholds: Thresholds,
}

impl QuadrantAssignment {
    pub fn len(&self) -> usize {
        self.quadrant.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quadrant.is_empty()
    }

    /// Positions of the edges in region `q`.
    pub fn members(&self, q: Quadrant) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.quadrant[i] == q).collect()
    }
}

/// Median of the values; the mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    })
}

/// Cosine distances of each edge's endpoints under the network and topic
/// embeddings, split at the given thresholds or at the per-axis medians.
/// Distances at or above a threshold are High.
pub fn assign_quadrants(
    edges: &[Edge],
    network: &Matrix,
    topic: &Matrix,
    thresholds: Option<Thresholds>,
) -> Result<QuadrantAssignment> {
    for (name, m) in [("network", network), ("topic", topic)] {
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u.max(v) >= m.rows()) {
            return Err(Error::Input(format!(
                "edge ({u}, {v}) is outside the {} rows of the {name} embeddings",
                m.rows()
            )));
        }
    }
    let network_distance: Vec<f64> = edges
        .iter()
        .map(|&(u, v)| cosine_distance(network.row(u), network.row(v)))
        .collect();
    let topic_distance: Vec<f64> = edges
        .iter()
        .map(|&(u, v)| cosine_distance(topic.row(u), topic.row(v)))
        .collect();
    let thresholds = match thresholds {
        Some(t) => t,
        None => Thresholds {
            network: median(&network_distance).unwrap_or(0.0),
            topic: median(&topic_distance).unwrap_or(0.0),
        },
    };
    let quadrant = network_distance
        .iter()
        .zip(&topic_distance)
        .map(|(&n, &t)| Quadrant::from_axes(n >= thresholds.network, t >= thresholds.topic))
        .collect();
    Ok(QuadrantAssignment {
        network_distance,
        topic_distance,
        quadrant,
        thresholds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_endpoints_are_low_low() {
        let net = Matrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0], vec![-1.0, 0.5]]).unwrap();
        let topic = Matrix::from_rows(&[vec![0.3, 0.1], vec![0.3, 0.1], vec![0.0, 1.0]]).unwrap();
        let q = assign_quadrants(&[(0, 1), (0, 2)], &net, &topic, None).unwrap();
        assert_eq!(q.network_distance[0], 0.0);
        assert_eq!(q.topic_distance[0], 0.0);
        assert_eq!(q.quadrant[0], Quadrant::LowLow);
        assert_eq!(q.quadrant[1], Quadrant::HighHigh);
    }

    #[test]
    fn median_halves_each_axis() {
        let n = 9;
        let net = Matrix::from_rows(
            &(0..n)
                .map(|i| vec![1.0, i as f64 * 0.3])
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let topic = Matrix::from_rows(
            &(0..n)
                .map(|i| vec![(i as f64).cos(), (i as f64).sin()])
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let edges: Vec<Edge> = (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
            .collect();
        let q = assign_quadrants(&edges, &net, &topic, None).unwrap();
        let high_net = q
            .quadrant
            .iter()
            .filter(|x| matches!(x, Quadrant::HighLow | Quadrant::HighHigh))
            .count();
        let low_net = edges.len() - high_net;
        // Ties at the median go High, so only the High side can exceed half.
        assert!(high_net >= low_net);
        let at_median = q
            .network_distance
            .iter()
            .filter(|&&d| d == q.thresholds.network)
            .count();
        assert!(high_net - low_net <= 1 + 2 * at_median);
    }

    #[test]
    fn explicit_thresholds_override() {
        let net = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let q = assign_quadrants(
            &[(0, 1)],
            &net,
            &net,
            Some(Thresholds {
                network: 2.0,
                topic: 0.5,
            }),
        )
        .unwrap();
        assert_eq!(q.quadrant, vec![Quadrant::LowHigh]);
    }

    #[test]
    fn out_of_range_edges_rejected() {
        let m = Matrix::zeros(2, 2);
        assert!(assign_quadrants(&[(0, 2)], &m, &m, None).is_err());
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}

//! Elementwise vector primitives.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    out
}

pub fn hadamard(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

pub fn relu(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v.max(0.0)).collect()
}

/// Derivative of ReLU, taken as 0 at the origin.
pub fn relu_derivative(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Unit-norm copy of `x`; the zero vector is returned unchanged.
pub fn l2_normalize(x: &[f64]) -> Vec<f64> {
    let norm = dot(x, x).sqrt();
    if norm == 0.0 {
        return x.to_vec();
    }
    x.iter().map(|v| v / norm).collect()
}

/// Gradient of `l2_normalize` at `x` given the upstream gradient. Zero at the
/// zero vector.
pub fn l2_normalize_backward(x: &[f64], grad_out: &[f64]) -> Vec<f64> {
    let norm = dot(x, x).sqrt();
    if norm == 0.0 {
        return vec![0.0; x.len()];
    }
    let y: Vec<f64> = x.iter().map(|v| v / norm).collect();
    let proj = dot(&y, grad_out);
    grad_out
        .iter()
        .zip(&y)
        .map(|(g, yi)| (g - yi * proj) / norm)
        .collect()
}

/// `1 - cos(a, b)`, or 1 when either vector has zero norm.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let na2 = dot(a, a);
    let nb2 = dot(b, b);
    if na2 == 0.0 || nb2 == 0.0 {
        return 1.0;
    }
    // sqrt(x * x) == x exactly, so identical inputs give a distance of 0.
    let cos = (dot(a, b) / (na2 * nb2).sqrt()).clamp(-1.0, 1.0);
    1.0 - cos
}

/// Order-independent sum: values are sorted and then added pairwise, so any
/// permutation of the input gives the same bits, and `n` copies of `v` sum to
/// exactly `n * v` when `n` is a power of two.
pub fn pairwise_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    tree_sum(values)
}

fn tree_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let half = n.next_power_of_two() / 2;
            tree_sum(&values[..half]) + tree_sum(&values[half..])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concat_order() {
        assert_eq!(concat(&[1.0, 2.0], &[3.0]), vec![1.0, 2.0, 3.0]);
        assert_eq!(concat(&[1.0], &[]), vec![1.0]);
        assert_ne!(concat(&[1.0], &[2.0]), concat(&[2.0], &[1.0]));
    }

    #[test]
    fn relu_and_derivative() {
        let x = [-1.0, 0.0, 2.0];
        assert_eq!(relu(&x), vec![0.0, 0.0, 2.0]);
        assert_eq!(relu_derivative(&x), vec![0.0, 0.0, 1.0]);
        assert_eq!(relu(&relu(&x)), relu(&x));
    }

    #[test]
    fn normalisation() {
        assert_eq!(l2_normalize(&[3.0, 4.0]), vec![0.6, 0.8]);
        assert_eq!(l2_normalize(&[0.0, 0.0]), vec![0.0, 0.0]);
        let y = l2_normalize(&[1e-3, -7.0, 2.5]);
        assert!((dot(&y, &y) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cosine_distance_cases() {
        assert_eq!(cosine_distance(&[2.0, 1.0], &[2.0, 1.0]), 0.0);
        assert_eq!(cosine_distance(&[1.0, 0.0], &[0.0, 3.0]), 1.0);
        let d = cosine_distance(&[1.0, 0.0], &[1.0, 1.0]);
        assert!((d - (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-12);
        assert!((d - 0.29289).abs() < 1e-5);
        assert_eq!(cosine_distance(&[0.0, 0.0], &[1.0, 1.0]), 1.0);
        assert_eq!(cosine_distance(&[1.0, 0.0], &[-1.0, 0.0]), 2.0);
    }

    #[test]
    fn hadamard_cases() {
        assert_eq!(
            hadamard(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]),
            vec![4.0, 10.0, 18.0]
        );
        assert_eq!(hadamard(&[1.5, -2.0], &[1.0, 1.0]), vec![1.5, -2.0]);
        assert_eq!(hadamard(&[1.5, -2.0], &[0.0, 0.0]), vec![0.0, -0.0]);
    }

    #[test]
    fn pairwise_sum_is_order_free() {
        let mut a = [0.1, 1e10, -3.3, 7.25, 1e-7];
        let mut b = [1e-7, 7.25, 0.1, -3.3, 1e10];
        assert_eq!(
            pairwise_sum(&mut a).to_bits(),
            pairwise_sum(&mut b).to_bits()
        );
        let v = 0.1f64;
        for n in [1usize, 2, 4, 8, 16, 32] {
            let mut copies = vec![v; n];
            assert_eq!(pairwise_sum(&mut copies) / n as f64, v);
        }
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert!(sigmoid(-800.0).is_finite());
    }
}

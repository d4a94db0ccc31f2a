use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Matrix, ParamSet};

/// Affine map `y = W x + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn glorot<R: Rng + ?Sized>(input_dim: usize, output_dim: usize, rng: &mut R) -> Self {
        Dense {
            weight: Matrix::glorot(output_dim, input_dim, rng),
            bias: vec![0.0; output_dim],
        }
    }

    pub fn zeros(input_dim: usize, output_dim: usize) -> Self {
        Dense {
            weight: Matrix::zeros(output_dim, input_dim),
            bias: vec![0.0; output_dim],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.weight.matvec(x);
        y.iter_mut().zip(&self.bias).for_each(|(a, b)| *a += b);
        y
    }

    /// Accumulates parameter gradients into `grads` and returns `dL/dx`.
    pub fn backward(&self, x: &[f64], grad_out: &[f64], grads: &mut Dense) -> Vec<f64> {
        grads.weight.add_outer(grad_out, x);
        grads
            .bias
            .iter_mut()
            .zip(grad_out)
            .for_each(|(g, d)| *g += d);
        let mut dx = vec![0.0; x.len()];
        self.weight.matvec_transpose_acc(grad_out, &mut dx);
        dx
    }
}

impl ParamSet for Dense {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![self.weight.data(), &self.bias]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![self.weight.data_mut(), &mut self.bias]
    }
}

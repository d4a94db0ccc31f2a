use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{sigmoid, Matrix, ParamSet};
use crate::error::{Error, Result};

/// Single-layer LSTM. Gate rows are stacked as input, forget, candidate,
/// output, each `hidden_dim` tall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub w_input: Matrix,
    pub w_hidden: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Step {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    input: Vec<f64>,
    forget: Vec<f64>,
    candidate: Vec<f64>,
    output: Vec<f64>,
    tanh_c: Vec<f64>,
}

/// Per-step activations saved by the forward pass.
#[derive(Debug, Clone)]
pub struct LstmCache {
    steps: Vec<Step>,
}

impl LstmParams {
    pub fn glorot<R: Rng + ?Sized>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        LstmParams {
            input_dim,
            hidden_dim,
            w_input: Matrix::glorot(4 * hidden_dim, input_dim, rng),
            w_hidden: Matrix::glorot(4 * hidden_dim, hidden_dim, rng),
            bias: vec![0.0; 4 * hidden_dim],
        }
    }

    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        LstmParams {
            input_dim,
            hidden_dim,
            w_input: Matrix::zeros(4 * hidden_dim, input_dim),
            w_hidden: Matrix::zeros(4 * hidden_dim, hidden_dim),
            bias: vec![0.0; 4 * hidden_dim],
        }
    }

    /// Runs the recurrence from a zero state and returns the final hidden state.
    pub fn forward(&self, sequence: &[&[f64]]) -> Result<(Vec<f64>, LstmCache)> {
        if sequence.is_empty() {
            return Err(Error::Precondition("LSTM input sequence is empty".into()));
        }
        let h = self.hidden_dim;
        let mut h_prev = vec![0.0; h];
        let mut c_prev = vec![0.0; h];
        let mut steps = Vec::with_capacity(sequence.len());
        let mut pre = vec![0.0; 4 * h];
        for x in sequence {
            if x.len() != self.input_dim {
                return Err(Error::Shape(format!(
                    "LSTM expects inputs of dim {}, got {}",
                    self.input_dim,
                    x.len()
                )));
            }
            self.w_input.matvec_into(x, &mut pre);
            let mut recur = vec![0.0; 4 * h];
            self.w_hidden.matvec_into(&h_prev, &mut recur);
            for k in 0..4 * h {
                pre[k] += recur[k] + self.bias[k];
            }
            let input: Vec<f64> = pre[..h].iter().map(|&a| sigmoid(a)).collect();
            let forget: Vec<f64> = pre[h..2 * h].iter().map(|&a| sigmoid(a)).collect();
            let candidate: Vec<f64> = pre[2 * h..3 * h].iter().map(|a| a.tanh()).collect();
            let output: Vec<f64> = pre[3 * h..].iter().map(|&a| sigmoid(a)).collect();
            let c: Vec<f64> = (0..h)
                .map(|j| forget[j] * c_prev[j] + input[j] * candidate[j])
                .collect();
            let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
            let h_next: Vec<f64> = (0..h).map(|j| output[j] * tanh_c[j]).collect();
            steps.push(Step {
                x: x.to_vec(),
                h_prev: std::mem::replace(&mut h_prev, h_next),
                c_prev: std::mem::replace(&mut c_prev, c),
                input,
                forget,
                candidate,
                output,
                tanh_c,
            });
        }
        Ok((h_prev, LstmCache { steps }))
    }

    /// Backpropagation through time from a gradient on the final hidden
    /// state. Accumulates into `grads`; returns input gradients in sequence
    /// order.
    pub fn backward(
        &self,
        cache: &LstmCache,
        grad_h: &[f64],
        grads: &mut LstmParams,
    ) -> Vec<Vec<f64>> {
        let h = self.hidden_dim;
        let mut dh = grad_h.to_vec();
        let mut dc = vec![0.0; h];
        let mut dxs = vec![Vec::new(); cache.steps.len()];
        let mut da = vec![0.0; 4 * h];
        for (t, step) in cache.steps.iter().enumerate().rev() {
            for j in 0..h {
                let (i, f, g, o, tc) = (
                    step.input[j],
                    step.forget[j],
                    step.candidate[j],
                    step.output[j],
                    step.tanh_c[j],
                );
                let d_out = dh[j] * tc;
                dc[j] += dh[j] * o * (1.0 - tc * tc);
                let d_in = dc[j] * g;
                let d_cand = dc[j] * i;
                let d_forget = dc[j] * step.c_prev[j];
                da[j] = d_in * i * (1.0 - i);
                da[h + j] = d_forget * f * (1.0 - f);
                da[2 * h + j] = d_cand * (1.0 - g * g);
                da[3 * h + j] = d_out * o * (1.0 - o);
                dc[j] *= f;
            }
            grads.w_input.add_outer(&da, &step.x);
            grads.w_hidden.add_outer(&da, &step.h_prev);
            grads.bias.iter_mut().zip(&da).for_each(|(b, d)| *b += d);
            let mut dx = vec![0.0; self.input_dim];
            self.w_input.matvec_transpose_acc(&da, &mut dx);
            dxs[t] = dx;
            dh.iter_mut().for_each(|v| *v = 0.0);
            self.w_hidden.matvec_transpose_acc(&da, &mut dh);
        }
        dxs
    }
}

impl ParamSet for LstmParams {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![self.w_input.data(), self.w_hidden.data(), &self.bias]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.w_input.data_mut(),
            self.w_hidden.data_mut(),
            &mut self.bias,
        ]
    }
}

use serde::{Deserialize, Serialize};

use super::ParamSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam with bias correction. Moment buffers mirror the parameter tensors.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step: u64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new<P: ParamSet>(params: &P, config: AdamConfig) -> Self {
        let zeros: Vec<Vec<f64>> = params
            .tensors()
            .iter()
            .map(|t| vec![0.0; t.len()])
            .collect();
        AdamState {
            config,
            step: 0,
            first: zeros.clone(),
            second: zeros,
        }
    }

    pub fn step<P: ParamSet>(&mut self, params: &mut P, grads: &P) {
        self.step += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step as i32;
        let correct1 = 1.0 - beta1.powi(t);
        let correct2 = 1.0 - beta2.powi(t);
        for (((p, g), m), v) in params
            .tensors_mut()
            .into_iter()
            .zip(grads.tensors())
            .zip(&mut self.first)
            .zip(&mut self.second)
        {
            assert_eq!(p.len(), g.len(), "gradient shape mirrors parameters");
            for i in 0..p.len() {
                m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                let m_hat = m[i] / correct1;
                let v_hat = v[i] / correct2;
                p[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone)]
    struct Flat(Vec<f64>);

    impl ParamSet for Flat {
        fn tensors(&self) -> Vec<&[f64]> {
            vec![&self.0]
        }
        fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
            vec![&mut self.0]
        }
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = Flat(vec![1.0, -2.0]);
        let mut adam = AdamState::new(&p, AdamConfig::default());
        adam.step(&mut p, &Flat(vec![0.0, 0.0]));
        assert_eq!(p.0, vec![1.0, -2.0]);
        assert_eq!(adam.step, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate_against_sign() {
        // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps).
        let mut p = Flat(vec![0.0, 0.0, 0.0]);
        let g = Flat(vec![0.3, -5.0, 1e-3]);
        let mut adam = AdamState::new(&p, AdamConfig::default());
        adam.step(&mut p, &g);
        for (delta, gi) in p.0.iter().zip(&g.0) {
            let expected = -1e-3 * gi / (gi.abs() + 1e-8);
            assert!((delta - expected).abs() < 1e-15);
            assert!((delta + 1e-3 * gi.signum()).abs() < 1e-7);
        }
    }

    #[test]
    fn two_steps_shrink_quadratic() {
        let mut w = Flat(vec![1.0]);
        let mut adam = AdamState::new(
            &w,
            AdamConfig {
                learning_rate: 0.1,
                ..AdamConfig::default()
            },
        );
        let loss = |w: &Flat| w.0[0] * w.0[0];
        let start = loss(&w);
        for _ in 0..2 {
            let g = Flat(vec![2.0 * w.0[0]]);
            adam.step(&mut w, &g);
        }
        // Each step moves w by ~0.1 toward zero: 1.0 -> 0.9 -> 0.8.
        assert!((w.0[0] - 0.8).abs() < 1e-3);
        assert!(loss(&w) < start);
    }
}

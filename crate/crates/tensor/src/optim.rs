use std::collections::BTreeMap;

use crate::{Result, Tensor, TensorError};

/// Adaptive-moment (Adam) optimizer over named parameters.
///
/// Moment decay and epsilon use the conventional defaults (0.9, 0.999, 1e-8);
/// the learning rate is per-instance so that a second instance can drive a
/// separately-scheduled scalar (the log-partition value uses 0.1 while the
/// networks use 0.001).
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: u64,
    first: BTreeMap<String, Vec<f64>>,
    second: BTreeMap<String, Vec<f64>>,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            first: BTreeMap::new(),
            second: BTreeMap::new(),
        }
    }

    pub fn learning_rate(&self) -> f64 {
        self.lr
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Apply one update to every named parameter with a matching gradient.
    /// Parameters without gradients are left untouched.
    pub fn step(
        &mut self,
        params: &mut BTreeMap<String, Tensor>,
        grads: &BTreeMap<String, Tensor>,
    ) -> Result<()> {
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (name, grad) in grads {
            let param = params.get_mut(name).ok_or_else(|| {
                TensorError::ShapeMismatch(format!("gradient for unknown parameter `{name}`"))
            })?;
            if param.shape() != grad.shape() {
                return Err(TensorError::ShapeMismatch(format!(
                    "parameter `{name}`: {:?} vs gradient {:?}",
                    param.shape(),
                    grad.shape()
                )));
            }
            let n = param.numel();
            let m = self.first.entry(name.clone()).or_insert_with(|| vec![0.0; n]);
            let v = self.second.entry(name.clone()).or_insert_with(|| vec![0.0; n]);
            if m.len() != n || v.len() != n {
                return Err(TensorError::ShapeMismatch(format!(
                    "optimizer state for `{name}` sized {} vs parameter {}",
                    m.len(),
                    n
                )));
            }
            let p = param.values_mut();
            for i in 0..n {
                let g = grad.values()[i];
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g;
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g * g;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                p[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }

    /// Moment accumulators flattened for checkpointing, keyed
    /// `adam.m.<name>` / `adam.v.<name>`.
    pub fn state_tensors(&self) -> BTreeMap<String, Tensor> {
        let mut out = BTreeMap::new();
        for (k, v) in &self.first {
            out.insert(format!("adam.m.{k}"), Tensor::vector(v.clone()));
        }
        for (k, v) in &self.second {
            out.insert(format!("adam.v.{k}"), Tensor::vector(v.clone()));
        }
        out.insert("adam.step".into(), Tensor::scalar(self.step as f64));
        out
    }

    /// Restore accumulators written by [`Adam::state_tensors`].
    pub fn restore(&mut self, state: &BTreeMap<String, Tensor>) {
        self.first.clear();
        self.second.clear();
        for (k, t) in state {
            if let Some(name) = k.strip_prefix("adam.m.") {
                self.first.insert(name.to_string(), t.values().to_vec());
            } else if let Some(name) = k.strip_prefix("adam.v.") {
                self.second.insert(name.to_string(), t.values().to_vec());
            } else if k == "adam.step" {
                self.step = t.item() as u64;
            }
        }
    }
}

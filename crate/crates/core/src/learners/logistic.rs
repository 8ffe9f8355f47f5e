//! L2-regularized logistic regression fitted by full-batch gradient descent.

use serde::{Deserialize, Serialize};

pub const LAMBDA: f64 = 1e-4;
pub const STEP: f64 = 0.1;
pub const MAX_EPOCHS: usize = 1000;
pub const GRAD_TOL: f64 = 1e-6;
const MAX_HALVINGS: usize = 20;
const LOSS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Objective value after each accepted step, starting from the zero
    /// initialization.
    pub loss_trace: Vec<f64>,
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean log-loss plus `λ/2 ‖w‖²` and its gradient. `params` holds the
/// weights followed by the (unpenalized) bias.
pub fn loss_and_gradient(x: &[f64], dim: usize, y: &[u8], params: &[f64], lambda: f64) -> (f64, Vec<f64>) {
    let n = y.len() as f64;
    let (w, b) = params.split_at(dim);
    let b = b[0];
    let mut loss = 0.0;
    let mut grad = vec![0.0; dim + 1];
    for (row, &label) in x.chunks_exact(dim).zip(y) {
        let z = b + row.iter().zip(w).map(|(a, c)| a * c).sum::<f64>();
        let t = f64::from(label);
        loss += softplus(z) - t * z;
        let resid = sigmoid(z) - t;
        for (g, a) in grad.iter_mut().zip(row) {
            *g += resid * a;
        }
        grad[dim] += resid;
    }
    loss /= n;
    grad.iter_mut().for_each(|g| *g /= n);
    loss += 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>();
    for (g, v) in grad.iter_mut().zip(w) {
        *g += lambda * v;
    }
    (loss, grad)
}

/// Fits on already-standardized features. A step that would raise the loss
/// is halved (at most 20 times); the reduced step is kept for later epochs.
pub fn fit(x: &[f64], dim: usize, y: &[u8]) -> LogisticModel {
    let mut params = vec![0.0; dim + 1];
    let mut step = STEP;
    let (mut loss, mut grad) = loss_and_gradient(x, dim, y, &params, LAMBDA);
    let mut loss_trace = vec![loss];
    for _ in 0..MAX_EPOCHS {
        if grad.iter().fold(0.0f64, |m, g| m.max(g.abs())) < GRAD_TOL {
            break;
        }
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = params.iter().zip(&grad).map(|(p, g)| p - step * g).collect();
            let (trial_loss, trial_grad) = loss_and_gradient(x, dim, y, &trial, LAMBDA);
            if trial_loss <= loss + LOSS_SLACK {
                accepted = Some((trial, trial_loss, trial_grad));
                break;
            }
            step *= 0.5;
        }
        let Some((p, l, g)) = accepted else { break };
        params = p;
        loss = l;
        grad = g;
        loss_trace.push(loss);
    }
    let bias = params.pop().expect("bias present");
    LogisticModel { weights: params, bias, loss_trace }
}

impl LogisticModel {
    pub fn score_row(&self, row: &[f64]) -> f64 {
        sigmoid(self.bias + row.iter().zip(&self.weights).map(|(a, w)| a * w).sum::<f64>())
    }
}

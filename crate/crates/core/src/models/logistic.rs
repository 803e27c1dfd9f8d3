//! L2-regularized logistic regression fitted by gradient descent with
//! Armijo backtracking. Inputs are standardized internally; the bias is not
//! penalized.

use serde::{Deserialize, Serialize};

use super::ModelParams;

/// Stop once the gradient's ∞-norm falls below this.
pub const GRADIENT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    /// Weights on standardized inputs.
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean negative log-likelihood plus (l2/2)‖w‖², with its gradient in
/// (weights, bias). Parameters are laid out as `w` followed by the bias.
pub fn objective_and_gradient(xs: &[Vec<f64>], ys: &[bool], params: &[f64], l2: f64) -> (f64, Vec<f64>) {
    let d = params.len() - 1;
    let (w, b) = (&params[..d], params[d]);
    let n = xs.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; d + 1];
    for (x, &y) in xs.iter().zip(ys) {
        let z = b + x.iter().zip(w).map(|(a, c)| a * c).sum::<f64>();
        // −log p(y|x) = softplus(z) − y z
        loss += softplus(z) - if y { z } else { 0.0 };
        let r = sigmoid(z) - y as u8 as f64;
        for (g, a) in grad[..d].iter_mut().zip(x) {
            *g += r * a;
        }
        grad[d] += r;
    }
    loss /= n;
    for g in grad.iter_mut() {
        *g /= n;
    }
    let mut penalty = 0.0;
    for (g, wi) in grad[..d].iter_mut().zip(w) {
        *g += l2 * wi;
        penalty += wi * wi;
    }
    (loss + 0.5 * l2 * penalty, grad)
}

impl LogisticModel {
    pub fn fit(xs: &[Vec<f64>], ys: &[bool], params: &ModelParams) -> Self {
        let d = xs[0].len();
        let n = xs.len() as f64;
        let mean: Vec<f64> = (0..d).map(|j| xs.iter().map(|x| x[j]).sum::<f64>() / n).collect();
        let scale: Vec<f64> = (0..d)
            .map(|j| {
                let var = xs.iter().map(|x| (x[j] - mean[j]).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        let z: Vec<Vec<f64>> = xs
            .iter()
            .map(|x| x.iter().zip(&mean).zip(&scale).map(|((v, m), s)| (v - m) / s).collect())
            .collect();

        let l2 = params.l2_penalty;
        let mut theta = vec![0.0; d + 1];
        let (mut f, mut g) = objective_and_gradient(&z, ys, &theta, l2);
        let mut step = 1.0;
        let mut iterations = 0;
        let mut converged = false;
        while iterations < params.max_iters {
            if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) < GRADIENT_TOLERANCE {
                converged = true;
                break;
            }
            iterations += 1;
            let g2: f64 = g.iter().map(|v| v * v).sum();
            // Armijo: accept once f(θ − t g) ≤ f(θ) − t/2 ‖g‖².
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<f64> = theta.iter().zip(&g).map(|(t, gi)| t - step * gi).collect();
                let (ft, gt) = objective_and_gradient(&z, ys, &trial, l2);
                if ft <= f - 0.5 * step * g2 {
                    theta = trial;
                    f = ft;
                    g = gt;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
            step *= 2.0;
        }
        if !converged {
            converged = g.iter().fold(0.0f64, |m, v| m.max(v.abs())) < GRADIENT_TOLERANCE;
        }
        let bias = theta.pop().unwrap();
        LogisticModel {
            mean,
            scale,
            weights: theta,
            bias,
            iterations,
            converged,
        }
    }

    pub fn p_confused(&self, x: &[f64]) -> f64 {
        let z = self.bias
            + x.iter()
                .zip(&self.mean)
                .zip(&self.scale)
                .zip(&self.weights)
                .map(|(((v, m), s), w)| (v - m) / s * w)
                .sum::<f64>();
        sigmoid(z)
    }
}

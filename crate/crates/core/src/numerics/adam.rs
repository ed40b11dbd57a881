use std::collections::HashMap;

use super::param::Parameters;
use super::tensor::Tensor;

/// Adam with bias correction. Moments are keyed by parameter name.
#[derive(Clone, Debug)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    t: u64,
    moments: HashMap<String, (Tensor, Tensor)>,
}

impl AdamState {
    pub fn new(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            t: 0,
            moments: HashMap::new(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn moments(&self, name: &str) -> Option<(&Tensor, &Tensor)> {
        self.moments.get(name).map(|(m, v)| (m, v))
    }

    /// Applies one update from the current gradients. Gradients are left in
    /// place; callers zero them.
    pub fn step<P: Parameters + ?Sized>(&mut self, params: &mut P) {
        self.t += 1;
        let t = self.t as i32;
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.epsilon);
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);
        let moments = &mut self.moments;
        params.visit_mut(&mut |p| {
            let (rows, cols) = p.value().shape();
            let (m, v) = moments
                .entry(p.name().to_owned())
                .or_insert_with(|| (Tensor::zeros(rows, cols), Tensor::zeros(rows, cols)));
            let grad = p.grad().data().to_vec();
            let value = p.value_mut().data_mut();
            for (((w, g), mi), vi) in value
                .iter_mut()
                .zip(&grad)
                .zip(m.data_mut().iter_mut())
                .zip(v.data_mut().iter_mut())
            {
                *mi = b1 * *mi + (1.0 - b1) * g;
                *vi = b2 * *vi + (1.0 - b2) * g * g;
                let m_hat = *mi / c1;
                let v_hat = *vi / c2;
                *w -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Param;

    fn scalar_param(v: f64, g: f64) -> Param {
        let mut p = Param::new("w", Tensor::scalar(v));
        p.grad_mut().data_mut()[0] = g;
        p
    }

    #[test]
    fn first_step_closed_form() {
        // m̂ = g, v̂ = g², so Δ = -lr·g/(|g| + ε)
        let mut p = scalar_param(1.0, 0.5);
        let mut adam = AdamState::new(0.001);
        adam.step(&mut p);
        let expect = 1.0 - 0.001 * 0.5 / (0.5 + 1e-8);
        assert!((p.value().item() - expect).abs() < 1e-15);
        assert!((p.value().item() - (1.0 - 0.001)).abs() < 1e-10);
        assert_eq!(adam.steps(), 1);
        assert_eq!(p.grad().item(), 0.5, "grads untouched");
    }

    #[test]
    fn zero_gradient_leaves_param() {
        let mut p = scalar_param(2.5, 0.0);
        let mut adam = AdamState::new(0.001);
        for _ in 0..3 {
            adam.step(&mut p);
        }
        assert_eq!(p.value().item(), 2.5);
        let (_, v) = adam.moments("w").unwrap();
        assert!(v.data().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn deterministic_from_identical_states() {
        let run = || {
            let mut p = scalar_param(0.3, -1.7);
            let mut adam = AdamState::new(0.01);
            adam.step(&mut p);
            adam.step(&mut p);
            p.value().item()
        };
        assert_eq!(run().to_bits(), run().to_bits());
    }
}

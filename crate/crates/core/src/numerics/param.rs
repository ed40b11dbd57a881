use rand::Rng;

use super::tape::Tape;
use super::tensor::Tensor;

/// A named learnable tensor and its accumulated gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    name: String,
    value: Tensor,
    grad: Tensor,
}

impl Param {
    pub fn new(name: impl Into<String>, value: Tensor) -> Self {
        let grad = Tensor::zeros(value.rows(), value.cols());
        Self {
            name: name.into(),
            value,
            grad,
        }
    }

    pub fn zeros(name: impl Into<String>, rows: usize, cols: usize) -> Self {
        Self::new(name, Tensor::zeros(rows, cols))
    }

    /// Weight matrix with entries uniform in `±1/√fan_in`.
    pub fn uniform<R: Rng + ?Sized>(
        name: impl Into<String>,
        rows: usize,
        cols: usize,
        fan_in: usize,
        rng: &mut R,
    ) -> Self {
        let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
        let data = (0..rows * cols)
            .map(|_| rng.random_range(-bound..=bound))
            .collect();
        Self::new(name, Tensor::new(rows, cols, data).expect("sized"))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self) -> &Tensor {
        &self.value
    }

    pub fn value_mut(&mut self) -> &mut Tensor {
        &mut self.value
    }

    pub fn grad(&self) -> &Tensor {
        &self.grad
    }

    pub fn grad_mut(&mut self) -> &mut Tensor {
        &mut self.grad
    }

    /// Replaces the value; the shape must not change.
    pub fn set_value(&mut self, value: Tensor) {
        assert_eq!(value.shape(), self.value.shape(), "param {}", self.name);
        self.value = value;
    }
}

/// Anything that owns [`Param`]s. Visit order must be stable.
pub trait Parameters {
    fn visit(&self, f: &mut dyn FnMut(&Param));
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param));

    fn zero_grads(&mut self) {
        self.visit_mut(&mut |p| p.grad.fill(0.0));
    }

    /// Adds the gradients recorded on `tape` into each bound parameter.
    fn accumulate_grads(&mut self, tape: &Tape) {
        self.visit_mut(&mut |p| {
            if let Some(g) = tape.param_grad(&p.name) {
                p.grad.add_assign(g);
            }
        });
    }

    fn num_scalars(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |p| n += p.value.len());
        n
    }

    fn zero_values(&mut self) {
        self.visit_mut(&mut |p| p.value.fill(0.0));
    }

    /// Overwrites every value (weights and biases) with uniform noise in `±scale`.
    fn randomize<R: Rng + ?Sized>(&mut self, scale: f64, rng: &mut R)
    where
        Self: Sized,
    {
        self.visit_mut(&mut |p| {
            for v in p.value.data_mut() {
                *v = rng.random_range(-scale..=scale);
            }
        });
    }
}

impl Parameters for Param {
    fn visit(&self, f: &mut dyn FnMut(&Param)) {
        f(self)
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param)) {
        f(self)
    }
}

impl<T: Parameters> Parameters for Vec<T> {
    fn visit(&self, f: &mut dyn FnMut(&Param)) {
        self.iter().for_each(|p| p.visit(f));
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param)) {
        self.iter_mut().for_each(|p| p.visit_mut(f));
    }
}

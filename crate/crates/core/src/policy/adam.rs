use super::{Params, PolicyNet};
use crate::error::{Error, Result};

/// Adam with bias correction.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Params,
    v: Params,
}

impl Adam {
    pub fn new(net: &PolicyNet, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: Params::zeros(net.dims()),
            v: Params::zeros(net.dims()),
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Descends along `grads`. Non-finite gradients abort before anything is touched.
    pub fn step(&mut self, net: &mut PolicyNet, grads: &Params) -> Result<()> {
        for (tensor, values) in grads.tensors() {
            if let Some(index) = values.iter().position(|g| !g.is_finite()) {
                return Err(Error::NonFiniteGradient { tensor, index });
            }
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.eps);

        let params = net.params_mut().tensors_mut();
        let ms = self.m.tensors_mut();
        let vs = self.v.tensors_mut();
        let gs = grads.tensors();
        for (((p, m), v), (_, g)) in params.into_iter().zip(ms).zip(vs).zip(gs) {
            for (((p, m), v), &g) in p.iter_mut().zip(m.iter_mut()).zip(v.iter_mut()).zip(g) {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

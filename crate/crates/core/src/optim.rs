//! AdamW with decoupled weight decay applied to weights only.

use ndarray::Zip;

use crate::encoder::EncoderParams;
use crate::error::{LscError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamW {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamW {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            weight_decay: 1e-5,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One scalar AdamW update; returns the new `(theta, m, v)`.
///
/// `step` is the 1-based update count used for bias correction.
#[inline]
pub fn adamw_scalar(opt: &AdamW, theta: f64, grad: f64, m: f64, v: f64, step: u64, decay: bool) -> (f64, f64, f64) {
    let mut theta = theta;
    if decay {
        theta -= opt.learning_rate * opt.weight_decay * theta;
    }
    let m = opt.beta1 * m + (1.0 - opt.beta1) * grad;
    let v = opt.beta2 * v + (1.0 - opt.beta2) * grad * grad;
    let m_hat = m / (1.0 - opt.beta1.powi(step as i32));
    let v_hat = v / (1.0 - opt.beta2.powi(step as i32));
    theta -= opt.learning_rate * m_hat / (v_hat.sqrt() + opt.eps);
    (theta, m, v)
}

impl AdamW {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && self.weight_decay >= 0.0
            && self.weight_decay.is_finite()
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.eps > 0.0;
        if ok {
            Ok(())
        } else {
            Err(LscError::InvalidConfig(format!("invalid optimizer settings {self:?}")))
        }
    }

    /// Applies update number `step` (1-based) to every parameter in place.
    pub fn step(
        &self,
        params: &mut EncoderParams,
        grads: &EncoderParams,
        m: &mut EncoderParams,
        v: &mut EncoderParams,
        step: u64,
    ) {
        let layers = params.layers_mut().iter_mut();
        for (((p, g), m), v) in layers.zip(grads.layers()).zip(m.layers_mut()).zip(v.layers_mut()) {
            Zip::from(&mut p.weight)
                .and(&g.weight)
                .and(&mut m.weight)
                .and(&mut v.weight)
                .for_each(|t, &g, m, v| (*t, *m, *v) = adamw_scalar(self, *t, g, *m, *v, step, true));
            Zip::from(&mut p.bias)
                .and(&g.bias)
                .and(&mut m.bias)
                .and(&mut v.bias)
                .for_each(|t, &g, m, v| (*t, *m, *v) = adamw_scalar(self, *t, g, *m, *v, step, false));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{EncoderParams, Layer};
    use ndarray::{array, Array1};

    #[test]
    fn scalar_steps_match_hand_computation() {
        let opt = AdamW {
            learning_rate: 0.1,
            weight_decay: 0.01,
            ..AdamW::default()
        };
        // step 1: theta = 2 - 0.1*0.01*2 = 1.998, m = 0.05, v = 0.00025,
        // m_hat = 0.5, v_hat = 0.25, update = 0.1 * 0.5 / (0.5 + 1e-8)
        let (t, m, v) = adamw_scalar(&opt, 2.0, 0.5, 0.0, 0.0, 1, true);
        assert_eq!(m, (1.0 - 0.9) * 0.5);
        assert_eq!(v, (1.0 - 0.999) * 0.25);
        let expect = (2.0 - 0.1 * 0.01 * 2.0) - 0.1 * (((1.0 - 0.9) * 0.5) / (1.0 - 0.9)) / (((1.0 - 0.999) * 0.25 / (1.0 - 0.999_f64)).sqrt() + 1e-8);
        assert_eq!(t, expect);
        assert!((t - (1.998 - 0.1)).abs() < 1e-8);
        // step 2 with the same gradient
        let (t2, m2, v2) = adamw_scalar(&opt, t, 0.5, m, v, 2, true);
        let m_hat = (0.9 * m + (1.0 - 0.9) * 0.5) / (1.0 - 0.81);
        let v_hat = (0.999 * v + 0.001 * 0.25) / (1.0 - 0.999 * 0.999);
        assert_eq!(m2, 0.9 * m + (1.0 - 0.9) * 0.5);
        assert_eq!(v2, 0.999 * v + (1.0 - 0.999) * 0.5 * 0.5);
        assert!((t2 - ((t - 0.1 * 0.01 * t) - 0.1 * m_hat / (v_hat.sqrt() + 1e-8))).abs() < 1e-15);
        // biases skip the decay
        let (tb, _, _) = adamw_scalar(&opt, 2.0, 0.5, 0.0, 0.0, 1, false);
        assert!((tb - (2.0 - 0.1 * 0.5 / (0.5 + 1e-8))).abs() < 1e-15);
    }

    #[test]
    fn step_applies_scalar_rule_per_entry() {
        let opt = AdamW::default();
        let mut p = EncoderParams::from_layers(vec![Layer {
            weight: array![[3.0]],
            bias: Array1::from(vec![-1.0]),
        }])
        .unwrap();
        let g = EncoderParams::from_layers(vec![Layer {
            weight: array![[0.25]],
            bias: Array1::from(vec![2.0]),
        }])
        .unwrap();
        let mut m = p.zeros_like();
        let mut v = p.zeros_like();
        opt.step(&mut p, &g, &mut m, &mut v, 1);
        assert_eq!(p.layers()[0].weight[[0, 0]], adamw_scalar(&opt, 3.0, 0.25, 0.0, 0.0, 1, true).0);
        assert_eq!(p.layers()[0].bias[0], adamw_scalar(&opt, -1.0, 2.0, 0.0, 0.0, 1, false).0);
        assert!(AdamW { learning_rate: 0.0, ..opt }.validate().is_err());
    }
}

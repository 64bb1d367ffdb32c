use super::ops::BETA_MIN;
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Feasible set a parameter is projected onto after each update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Constraint {
    Free,
    AtLeast(f64),
}

impl Constraint {
    pub const GDN_BETA: Constraint = Constraint::AtLeast(BETA_MIN);
    pub const GDN_GAMMA: Constraint = Constraint::AtLeast(0.0);

    fn apply(self, t: &mut Tensor) {
        if let Constraint::AtLeast(lo) = self {
            for v in t.data_mut() {
                *v = v.max(lo);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Moment accumulators for a fixed, ordered list of parameters.
#[derive(Clone, Debug)]
pub struct AdamState {
    pub config: AdamConfig,
    step: u64,
    first: Vec<Tensor>,
    second: Vec<Tensor>,
}

impl AdamState {
    pub fn new(config: AdamConfig) -> Self {
        AdamState {
            config,
            step: 0,
            first: Vec::new(),
            second: Vec::new(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moments(&self) -> &[Tensor] {
        &self.first
    }
}

/// One bias-corrected Adam update followed by projection of each parameter
/// onto its constraint.
pub fn adam_step(
    params: &mut [(&mut Tensor, Constraint)],
    grads: &[Tensor],
    state: &mut AdamState,
) -> Result<()> {
    if params.len() != grads.len() {
        return Err(Error::Shape(format!(
            "adam: {} parameters but {} gradients",
            params.len(),
            grads.len()
        )));
    }
    for ((p, _), g) in params.iter().zip(grads) {
        p.check_same_shape(g, "adam gradient")?;
    }
    if state.first.is_empty() {
        state.first = grads.iter().map(|g| Tensor::zeros(g.shape())).collect();
        state.second = state.first.clone();
    } else if state.first.len() != grads.len()
        || state.first.iter().zip(grads).any(|(m, g)| m.shape() != g.shape())
    {
        return Err(Error::Shape(
            "adam: parameter list changed between steps".into(),
        ));
    }

    state.step += 1;
    let AdamConfig {
        lr,
        beta1,
        beta2,
        epsilon,
    } = state.config;
    let t = state.step as i32;
    let correct1 = 1.0 - beta1.powi(t);
    let correct2 = 1.0 - beta2.powi(t);

    for (((param, constraint), g), (m, v)) in params
        .iter_mut()
        .zip(grads)
        .zip(state.first.iter_mut().zip(state.second.iter_mut()))
    {
        let pd = param.data_mut();
        for (((p, &gi), mi), vi) in pd
            .iter_mut()
            .zip(g.data())
            .zip(m.data_mut())
            .zip(v.data_mut())
        {
            *mi = beta1 * *mi + (1.0 - beta1) * gi;
            *vi = beta2 * *vi + (1.0 - beta2) * gi * gi;
            let m_hat = *mi / correct1;
            let v_hat = *vi / correct2;
            *p -= lr * m_hat / (v_hat.sqrt() + epsilon);
        }
        constraint.apply(param);
    }
    Ok(())
}

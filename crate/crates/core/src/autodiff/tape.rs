//! Reverse-mode differentiation over a recorded list of operations.

use std::borrow::Cow;

use super::ops::{self, ConvGeometry, ConvParams, GdnParams};
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Clone, Copy, Debug)]
enum Op {
    Leaf,
    Conv2d {
        input: Var,
        weights: Var,
        bias: Var,
        geometry: ConvGeometry,
    },
    Conv2dTranspose {
        input: Var,
        weights: Var,
        bias: Var,
        geometry: ConvGeometry,
    },
    Gdn {
        input: Var,
        beta: Var,
        gamma: Var,
        inverse: bool,
    },
    Mse {
        prediction: Var,
        target: Var,
    },
}

struct Node<'a> {
    value: Cow<'a, Tensor>,
    op: Op,
}

/// Variables for a convolution layer registered on a tape.
#[derive(Clone, Copy, Debug)]
pub struct ConvVars {
    pub weights: Var,
    pub bias: Var,
    pub geometry: ConvGeometry,
}

/// Variables for a GDN layer registered on a tape.
#[derive(Clone, Copy, Debug)]
pub struct GdnVars {
    pub beta: Var,
    pub gamma: Var,
}

/// Wengert list of forward computations. Parameters can be borrowed so a
/// fresh tape per sample costs no parameter copies.
#[derive(Default)]
pub struct Tape<'a> {
    nodes: Vec<Node<'a>>,
}

impl<'a> Tape<'a> {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    fn push(&mut self, value: Cow<'a, Tensor>, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push(Cow::Owned(value), Op::Leaf)
    }

    /// Registers a borrowed tensor, typically a model parameter.
    pub fn param(&mut self, value: &'a Tensor) -> Var {
        self.push(Cow::Borrowed(value), Op::Leaf)
    }

    pub fn conv_params(&mut self, p: &'a ConvParams) -> ConvVars {
        ConvVars {
            weights: self.param(&p.weights),
            bias: self.param(&p.bias),
            geometry: p.geometry(),
        }
    }

    pub fn gdn_params(&mut self, p: &'a GdnParams) -> GdnVars {
        GdnVars {
            beta: self.param(&p.beta),
            gamma: self.param(&p.gamma),
        }
    }

    pub fn value(&self, var: Var) -> &Tensor {
        &self.nodes[var.0].value
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn conv2d(&mut self, input: Var, layer: ConvVars) -> Result<Var> {
        let out = ops::conv2d_raw(
            self.value(input),
            self.value(layer.weights),
            self.value(layer.bias),
            layer.geometry,
        )?;
        Ok(self.push(
            Cow::Owned(out),
            Op::Conv2d {
                input,
                weights: layer.weights,
                bias: layer.bias,
                geometry: layer.geometry,
            },
        ))
    }

    pub fn conv2d_transpose(&mut self, input: Var, layer: ConvVars) -> Result<Var> {
        let out = ops::conv2d_transpose_raw(
            self.value(input),
            self.value(layer.weights),
            self.value(layer.bias),
            layer.geometry,
        )?;
        Ok(self.push(
            Cow::Owned(out),
            Op::Conv2dTranspose {
                input,
                weights: layer.weights,
                bias: layer.bias,
                geometry: layer.geometry,
            },
        ))
    }

    pub fn gdn(&mut self, input: Var, layer: GdnVars, inverse: bool) -> Result<Var> {
        let out = ops::gdn_raw(
            self.value(input),
            self.value(layer.beta),
            self.value(layer.gamma),
            inverse,
        )?;
        Ok(self.push(
            Cow::Owned(out),
            Op::Gdn {
                input,
                beta: layer.beta,
                gamma: layer.gamma,
                inverse,
            },
        ))
    }

    pub fn mse(&mut self, prediction: Var, target: Var) -> Result<Var> {
        let loss = ops::mse_loss(self.value(prediction), self.value(target))?;
        Ok(self.push(
            Cow::Owned(Tensor::scalar(loss)),
            Op::Mse { prediction, target },
        ))
    }

    /// Gradient of the scalar `loss` w.r.t. every leaf on the tape.
    ///
    /// Leaves that do not influence `loss` receive zero gradients.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let seed = self.value(loss);
        if !seed.is_scalar() {
            return Err(Error::Shape(format!(
                "backward needs a scalar loss, got shape {:?}",
                seed.shape()
            )));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Tensor::full(seed.shape(), 1.0));

        for idx in (0..=loss.0).rev() {
            let node = &self.nodes[idx];
            if matches!(node.op, Op::Leaf) {
                continue;
            }
            // Interior gradients are consumed exactly once, here.
            let Some(upstream) = grads[idx].take() else {
                continue;
            };
            match node.op {
                Op::Leaf => unreachable!(),
                Op::Conv2d {
                    input,
                    weights,
                    bias,
                    geometry,
                } => {
                    let (gi, gw, gb) = ops::conv2d_vjp(
                        self.value(input),
                        self.value(weights),
                        self.value(bias),
                        geometry,
                        &upstream,
                    )?;
                    accumulate(&mut grads, input, gi)?;
                    accumulate(&mut grads, weights, gw)?;
                    accumulate(&mut grads, bias, gb)?;
                }
                Op::Conv2dTranspose {
                    input,
                    weights,
                    bias,
                    geometry,
                } => {
                    let (gi, gw, gb) = ops::conv2d_transpose_vjp(
                        self.value(input),
                        self.value(weights),
                        self.value(bias),
                        geometry,
                        &upstream,
                    )?;
                    accumulate(&mut grads, input, gi)?;
                    accumulate(&mut grads, weights, gw)?;
                    accumulate(&mut grads, bias, gb)?;
                }
                Op::Gdn {
                    input,
                    beta,
                    gamma,
                    inverse,
                } => {
                    let (gi, gb, gg) = ops::gdn_vjp(
                        self.value(input),
                        self.value(beta),
                        self.value(gamma),
                        inverse,
                        &upstream,
                    )?;
                    accumulate(&mut grads, input, gi)?;
                    accumulate(&mut grads, beta, gb)?;
                    accumulate(&mut grads, gamma, gg)?;
                }
                Op::Mse { prediction, target } => {
                    let up = upstream.data()[0];
                    let (gp, gt) =
                        ops::mse_vjp(self.value(prediction), self.value(target), up)?;
                    accumulate(&mut grads, prediction, gp)?;
                    accumulate(&mut grads, target, gt)?;
                }
            }
        }

        let grads = grads
            .into_iter()
            .zip(&self.nodes)
            .map(|(g, node)| match node.op {
                Op::Leaf => Some(g.unwrap_or_else(|| Tensor::zeros(node.value.shape()))),
                _ => None,
            })
            .collect();
        Ok(Gradients { grads })
    }
}

fn accumulate(grads: &mut [Option<Tensor>], var: Var, g: Tensor) -> Result<()> {
    match &mut grads[var.0] {
        Some(existing) => existing.add_assign(&g),
        slot @ None => {
            *slot = Some(g);
            Ok(())
        }
    }
}

/// Leaf gradients produced by [`Tape::backward`].
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient of a leaf variable; `None` for interior nodes.
    pub fn get(&self, var: Var) -> Option<&Tensor> {
        self.grads.get(var.0).and_then(Option::as_ref)
    }

    pub fn take(&mut self, var: Var) -> Option<Tensor> {
        self.grads.get_mut(var.0).and_then(Option::take)
    }
}

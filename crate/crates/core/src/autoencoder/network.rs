//! The analysis / synthesis transform pair.
//!
//! ```text
//! patch [1,S,S] -conv(k1,/4)- GDN -conv(k2,/2)- GDN -conv(k3,/2)-> latent [C,S/16,S/16]
//! latent -convT(k3,x2)- IGDN -convT(k2,x2)- IGDN -convT(k1,x4)-> reconstruction [1,S,S]
//! ```
//!
//! The bottleneck is the raw output of the third analysis convolution.

use rand::Rng;

use super::config::{NetworkConfig, ANALYSIS_STRIDES, SYNTHESIS_STRIDES};
use crate::autodiff::{
    conv2d, conv2d_transpose, gdn, Constraint, ConvParams, GdnParams, Tape, Tensor, Var,
};
use crate::error::{Error, Result};

/// Every learnable parameter of the autoencoder.
#[derive(Clone, Debug, PartialEq)]
pub struct Autoencoder {
    pub analysis: [ConvParams; 3],
    pub analysis_gdn: [GdnParams; 2],
    pub synthesis: [ConvParams; 3],
    pub synthesis_igdn: [GdnParams; 2],
}

impl Autoencoder {
    /// Glorot-uniform convolutions, `beta = 1`, `gamma = 0.1 I`.
    pub fn init<R: Rng>(config: &NetworkConfig, rng: &mut R) -> Self {
        let c = config.channels;
        let ka = config.kernel_sizes;
        let ks = config.synthesis_kernels();
        let analysis = [
            ConvParams::glorot(c, 1, ka[0], ANALYSIS_STRIDES[0], false, rng),
            ConvParams::glorot(c, c, ka[1], ANALYSIS_STRIDES[1], false, rng),
            ConvParams::glorot(c, c, ka[2], ANALYSIS_STRIDES[2], false, rng),
        ];
        let synthesis = [
            ConvParams::glorot(c, c, ks[0], SYNTHESIS_STRIDES[0], true, rng),
            ConvParams::glorot(c, c, ks[1], SYNTHESIS_STRIDES[1], true, rng),
            ConvParams::glorot(1, c, ks[2], SYNTHESIS_STRIDES[2], true, rng),
        ]
        .map(|p| {
            // ceil-style downsampling leaves stride - 1 rows to restore
            let op = p.stride - 1;
            p.with_output_padding(op)
        });
        Autoencoder {
            analysis,
            analysis_gdn: [GdnParams::initial(c), GdnParams::initial(c)],
            synthesis,
            synthesis_igdn: [GdnParams::initial(c), GdnParams::initial(c)],
        }
    }

    pub fn channels(&self) -> usize {
        self.analysis[2].weights.shape()[0]
    }

    /// Parameters in storage order: each layer's convolution (weights, bias)
    /// followed by its normalization (beta, gamma) when it has one, analysis
    /// layers first.
    pub fn params(&self) -> Vec<&Tensor> {
        let mut out = Vec::with_capacity(20);
        for (convs, norms) in [
            (&self.analysis, &self.analysis_gdn),
            (&self.synthesis, &self.synthesis_igdn),
        ] {
            for (i, conv) in convs.iter().enumerate() {
                out.push(&conv.weights);
                out.push(&conv.bias);
                if let Some(n) = norms.get(i) {
                    out.push(&n.beta);
                    out.push(&n.gamma);
                }
            }
        }
        out
    }

    /// Mutable counterpart of [`Autoencoder::params`] with each parameter's constraint.
    pub fn params_mut(&mut self) -> Vec<(&mut Tensor, Constraint)> {
        let mut out = Vec::with_capacity(20);
        for (convs, norms) in [
            (&mut self.analysis, &mut self.analysis_gdn),
            (&mut self.synthesis, &mut self.synthesis_igdn),
        ] {
            let mut norms = norms.iter_mut();
            for conv in convs.iter_mut() {
                out.push((&mut conv.weights, Constraint::Free));
                out.push((&mut conv.bias, Constraint::Free));
                if let Some(n) = norms.next() {
                    out.push((&mut n.beta, Constraint::GDN_BETA));
                    out.push((&mut n.gamma, Constraint::GDN_GAMMA));
                }
            }
        }
        out
    }

    /// Rounds every parameter to the nearest `f32`, the on-disk precision.
    pub fn round_to_f32(&mut self) {
        for (t, _) in self.params_mut() {
            for v in t.data_mut() {
                *v = *v as f32 as f64;
            }
        }
    }

    fn check_patch(&self, patch: &Tensor, size: usize) -> Result<()> {
        if patch.shape() != [1, size, size] {
            return Err(Error::Shape(format!(
                "expected a [1, {size}, {size}] patch, got {:?}",
                patch.shape()
            )));
        }
        Ok(())
    }

    /// Encodes a `[1, S, S]` patch into its `[C, S/16, S/16]` latent.
    pub fn analysis_transform(&self, patch: &Tensor, patch_size: usize) -> Result<Tensor> {
        self.check_patch(patch, patch_size)?;
        let [c1, c2, c3] = &self.analysis;
        let [g1, g2] = &self.analysis_gdn;
        let h = gdn(&conv2d(patch, c1)?, g1, false)?;
        let h = gdn(&conv2d(&h, c2)?, g2, false)?;
        conv2d(&h, c3)
    }

    /// Decodes a `[C, S/16, S/16]` latent back to a `[1, S, S]` patch.
    pub fn synthesis_transform(&self, latent: &Tensor, patch_size: usize) -> Result<Tensor> {
        let n = patch_size / super::config::DOWNSAMPLING;
        let c = self.channels();
        if latent.shape() != [c, n, n] {
            return Err(Error::Shape(format!(
                "expected a [{c}, {n}, {n}] latent, got {:?}",
                latent.shape()
            )));
        }
        let [t1, t2, t3] = &self.synthesis;
        let [g1, g2] = &self.synthesis_igdn;
        let h = gdn(&conv2d_transpose(latent, t1)?, g1, true)?;
        let h = gdn(&conv2d_transpose(&h, t2)?, g2, true)?;
        let out = conv2d_transpose(&h, t3)?;
        debug_assert_eq!(out.shape(), [1, patch_size, patch_size]);
        Ok(out)
    }

    /// Records reconstruction loss for one patch on `tape`.
    ///
    /// Returns the loss variable and the parameter variables in the order of
    /// [`Autoencoder::params`].
    pub fn record_loss<'a>(
        &'a self,
        tape: &mut Tape<'a>,
        patch: &'a Tensor,
        patch_size: usize,
    ) -> Result<(Var, Vec<Var>)> {
        self.check_patch(patch, patch_size)?;
        let mut vars = Vec::with_capacity(20);
        let mut register = |tape: &mut Tape<'a>, conv: &'a ConvParams, norm: Option<&'a GdnParams>| {
            let cv = tape.conv_params(conv);
            vars.push(cv.weights);
            vars.push(cv.bias);
            let nv = norm.map(|n| {
                let nv = tape.gdn_params(n);
                vars.push(nv.beta);
                vars.push(nv.gamma);
                nv
            });
            (cv, nv)
        };
        let a1 = register(tape, &self.analysis[0], Some(&self.analysis_gdn[0]));
        let a2 = register(tape, &self.analysis[1], Some(&self.analysis_gdn[1]));
        let a3 = register(tape, &self.analysis[2], None);
        let s1 = register(tape, &self.synthesis[0], Some(&self.synthesis_igdn[0]));
        let s2 = register(tape, &self.synthesis[1], Some(&self.synthesis_igdn[1]));
        let s3 = register(tape, &self.synthesis[2], None);

        let x = tape.param(patch);
        let mut h = x;
        for (conv, norm) in [a1, a2, a3] {
            h = tape.conv2d(h, conv)?;
            if let Some(n) = norm {
                h = tape.gdn(h, n, false)?;
            }
        }
        for (conv, norm) in [s1, s2, s3] {
            h = tape.conv2d_transpose(h, conv)?;
            if let Some(n) = norm {
                h = tape.gdn(h, n, true)?;
            }
        }
        let loss = tape.mse(h, x)?;
        Ok((loss, vars))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::mse_loss;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small(channels: usize, patch: usize) -> (NetworkConfig, Autoencoder) {
        let cfg = NetworkConfig {
            channels,
            patch_size: patch,
            ..NetworkConfig::default()
        };
        let net = Autoencoder::init(&cfg, &mut ChaCha8Rng::seed_from_u64(7));
        (cfg, net)
    }

    #[test]
    fn shape_contract() {
        for (c, s) in [(32, 64), (4, 16), (3, 48), (8, 256)] {
            let (_, net) = small(c, s);
            let patch = Tensor::full(&[1, s, s], 0.3);
            let z = net.analysis_transform(&patch, s).unwrap();
            assert_eq!(z.shape(), [c, s / 16, s / 16]);
            let r = net.synthesis_transform(&z, s).unwrap();
            assert_eq!(r.shape(), [1, s, s]);
        }
    }

    #[test]
    fn zero_patch_and_bias_give_zero_latent_and_output() {
        let (_, net) = small(6, 32);
        let z = net.analysis_transform(&Tensor::zeros(&[1, 32, 32]), 32).unwrap();
        assert!(z.data().iter().all(|&v| v == 0.0));
        let r = net.synthesis_transform(&Tensor::zeros(&[6, 2, 2]), 32).unwrap();
        assert!(r.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn wrong_sizes_rejected() {
        let (_, net) = small(4, 32);
        assert!(net.analysis_transform(&Tensor::zeros(&[1, 48, 48]), 32).is_err());
        assert!(net.analysis_transform(&Tensor::zeros(&[2, 32, 32]), 32).is_err());
        assert!(net.synthesis_transform(&Tensor::zeros(&[4, 3, 3]), 32).is_err());
    }

    #[test]
    fn no_normalization_after_last_layers() {
        let (_, net) = small(4, 32);
        // 3 convs x (w, b) + 2 norms x (beta, gamma) per transform
        assert_eq!(net.params().len(), 2 * (3 * 2 + 2 * 2));
        let shapes: Vec<_> = net.params().iter().map(|t| t.shape().to_vec()).collect();
        assert_eq!(shapes[8], [4, 4, 5, 5]); // third analysis conv weights
        assert_eq!(shapes[9], [4]); // its bias, then straight into synthesis
        assert_eq!(shapes[10], [4, 4, 5, 5]);
    }

    #[test]
    fn tape_loss_matches_direct_evaluation() {
        let (cfg, net) = small(4, 32);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let patch = Tensor::uniform(&[1, 32, 32], 0.5, &mut rng).map(|v| v + 0.5);
        let mut tape = Tape::new();
        let (loss, vars) = net.record_loss(&mut tape, &patch, cfg.patch_size).unwrap();
        assert_eq!(vars.len(), net.params().len());
        let direct = {
            let z = net.analysis_transform(&patch, 32).unwrap();
            mse_loss(&net.synthesis_transform(&z, 32).unwrap(), &patch).unwrap()
        };
        assert_eq!(tape.value(loss).item().unwrap(), direct);
        for (v, p) in vars.iter().zip(net.params()) {
            assert_eq!(tape.value(*v), p);
        }
    }
}

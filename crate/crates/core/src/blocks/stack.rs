use serde::{Deserialize, Serialize};

use super::ParamKey;
use crate::error::{shape_err, Error, Result};
use crate::nn::{frobenius_orth, frobenius_orth_grad, Activation, DenseCache, DenseLayer, GradStore, LayerId, Matrix, ParamStore, Rng};
use crate::Domain;

/// Shape of a [`SharedPrivateStack`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackSpec {
    /// Width of the representation fed to layer 1.
    pub input_dim: usize,
    /// Units per subspace in layers `1..L-1`.
    pub width: usize,
    /// `L`; layer `L` maps each subspace to a scalar.
    pub depth: usize,
    /// `ψ` applied to `h^p_L + h^s_L`.
    pub head: Activation,
}

impl StackSpec {
    pub fn new(input_dim: usize, depth: usize, head: Activation) -> Self {
        Self {
            input_dim,
            width: 100,
            depth,
            head,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.width == 0 || self.depth == 0 {
            return Err(Error::Invalid("stack dimensions must be positive".into()));
        }
        if !matches!(self.head, Activation::Linear | Activation::Sigmoid) {
            return Err(Error::Invalid("stack head must be linear or sigmoid".into()));
        }
        Ok(())
    }
}

/// Weight handles of one stack layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackLayer {
    pub shared: LayerId,
    pub private_source: LayerId,
    pub private_target: LayerId,
}

impl StackLayer {
    pub fn private(&self, domain: Domain) -> LayerId {
        match domain {
            Domain::Source => self.private_source,
            Domain::Target => self.private_target,
        }
    }
}

#[derive(Clone, Debug)]
pub struct StackCache {
    domain: Domain,
    shared: Vec<DenseCache>,
    private: Vec<DenseCache>,
    logits: Matrix,
}

impl StackCache {
    pub fn logits(&self) -> &Matrix {
        &self.logits
    }
}

/// Shared and private subspaces for one treatment arm (or a single arm-free head).
///
/// Layer 1 feeds the representation to both subspaces. Afterwards the shared
/// subspace sees only the previous shared output while the private subspace sees
/// `[h^s || h^p]`. Only the private path of the active domain is evaluated.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SharedPrivateStack {
    spec: StackSpec,
    layers: Vec<StackLayer>,
}

impl SharedPrivateStack {
    pub fn build(store: &mut ParamStore, block: &str, arm: Option<u8>, spec: StackSpec, rng: &mut Rng) -> Result<Self> {
        spec.validate()?;
        let mut layers = Vec::with_capacity(spec.depth);
        for l in 1..=spec.depth {
            let last = l == spec.depth;
            let out = if last { 1 } else { spec.width };
            let act = if last { Activation::Linear } else { Activation::Selu };
            let (shared_in, private_in) = if l == 1 {
                (spec.input_dim, spec.input_dim)
            } else {
                (spec.width, 2 * spec.width)
            };
            let key = |s: &str| ParamKey::new(block, arm, l, s).to_string();
            layers.push(StackLayer {
                shared: store.add(key("shared"), DenseLayer::init(shared_in, out, act, rng)),
                private_source: store.add(key("private_source"), DenseLayer::init(private_in, out, act, rng)),
                private_target: store.add(key("private_target"), DenseLayer::init(private_in, out, act, rng)),
            });
        }
        Ok(Self { spec, layers })
    }

    pub fn spec(&self) -> &StackSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[StackLayer] {
        &self.layers
    }

    pub fn shared_ids(&self) -> impl Iterator<Item = LayerId> + '_ {
        self.layers.iter().map(|l| l.shared)
    }

    pub fn private_ids(&self, domain: Domain) -> impl Iterator<Item = LayerId> + '_ {
        self.layers.iter().map(move |l| l.private(domain))
    }

    /// Zeroes every shared-subspace layer and removes it from optimisation.
    pub fn freeze_shared(&self, store: &mut ParamStore) {
        for id in self.shared_ids() {
            store.freeze_at_zero(id);
        }
    }

    fn check_input(&self, phi: &Matrix) -> Result<()> {
        if phi.cols() != self.spec.input_dim {
            return shape_err("stack_forward", self.spec.input_dim, phi.cols());
        }
        Ok(())
    }

    /// Pre-`ψ` output `h^p_L + h^s_L` (`n x 1`) and the cache for [`SharedPrivateStack::backward`].
    pub fn forward(&self, store: &ParamStore, phi: &Matrix, domain: Domain) -> Result<(Matrix, StackCache)> {
        self.check_input(phi)?;
        let mut shared_caches = Vec::with_capacity(self.layers.len());
        let mut private_caches = Vec::with_capacity(self.layers.len());
        let (mut hs, mut hp) = (phi.clone(), phi.clone());
        for (l, layer) in self.layers.iter().enumerate() {
            let private_in = if l == 0 { hp } else { Matrix::hcat(&hs, &hp)? };
            let (new_s, cs) = store.layer(layer.shared).forward(&hs)?;
            let (new_p, cp) = store.layer(layer.private(domain)).forward(&private_in)?;
            shared_caches.push(cs);
            private_caches.push(cp);
            hs = new_s;
            hp = new_p;
        }
        let mut logits = hp;
        logits.add_scaled(&hs, 1.0)?;
        logits.ensure_finite("stack output")?;
        Ok((
            logits.clone(),
            StackCache {
                domain,
                shared: shared_caches,
                private: private_caches,
                logits,
            },
        ))
    }

    /// Pre-`ψ` output without keeping a cache.
    pub fn infer_logits(&self, store: &ParamStore, phi: &Matrix, domain: Domain) -> Result<Matrix> {
        self.check_input(phi)?;
        let (mut hs, mut hp) = (phi.clone(), phi.clone());
        for (l, layer) in self.layers.iter().enumerate() {
            let private_in = if l == 0 { hp } else { Matrix::hcat(&hs, &hp)? };
            hs = store.layer(layer.shared).infer(&hs)?;
            hp = store.layer(layer.private(domain)).infer(&private_in)?;
        }
        hp.add_scaled(&hs, 1.0)?;
        hp.ensure_finite("stack output")?;
        Ok(hp)
    }

    /// `ψ(h^p_L + h^s_L)` as a vector.
    pub fn predict(&self, store: &ParamStore, phi: &Matrix, domain: Domain) -> Result<Vec<f64>> {
        let logits = self.infer_logits(store, phi, domain)?;
        Ok(logits.data().iter().map(|&z| self.spec.head.apply(z)).collect())
    }

    /// Backpropagates a gradient on the pre-`ψ` output; returns `dL/dΦ`.
    pub fn backward(&self, store: &ParamStore, cache: &StackCache, d_logits: &Matrix, grads: &mut GradStore) -> Result<Matrix> {
        if d_logits.shape() != cache.logits.shape() {
            return shape_err(
                "stack backward",
                format!("{:?}", cache.logits.shape()),
                format!("{:?}", d_logits.shape()),
            );
        }
        let m = self.spec.width;
        let (mut gs, mut gp) = (d_logits.clone(), d_logits.clone());
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let pid = layer.private(cache.domain);
            let ds = store.layer(layer.shared).backward(&cache.shared[l], &gs)?;
            grads.add_dense(layer.shared, &ds)?;
            let dp = store.layer(pid).backward(&cache.private[l], &gp)?;
            grads.add_dense(pid, &dp)?;
            if l == 0 {
                let mut g_phi = ds.input;
                g_phi.add_scaled(&dp.input, 1.0)?;
                return Ok(g_phi);
            }
            let (from_p_shared, from_p_private) = dp.input.split_cols(m)?;
            gs = ds.input;
            gs.add_scaled(&from_p_shared, 1.0)?;
            gp = from_p_private;
        }
        unreachable!("stack has at least one layer")
    }

    /// Orthogonality penalty between each shared weight matrix and the rows of the
    /// private weight matrices that consume the shared signal, summed over layers and
    /// both domains. Biases are not penalised.
    pub fn orth_po_loss(&self, store: &ParamStore) -> Result<f64> {
        let mut total = 0.0;
        for layer in &self.layers {
            let ws = &store.layer(layer.shared).weights;
            for domain in [Domain::Source, Domain::Target] {
                let wp = &store.layer(layer.private(domain)).weights;
                total += frobenius_orth(ws, &wp.row_range(0, ws.rows()))?;
            }
        }
        Ok(total)
    }

    /// Adds `scale * ∇ orth_po_loss` into `grads`; returns the unscaled loss.
    pub fn orth_po_backward(&self, store: &ParamStore, scale: f64, grads: &mut GradStore) -> Result<f64> {
        let mut total = 0.0;
        for layer in &self.layers {
            let ws = &store.layer(layer.shared).weights;
            for domain in [Domain::Source, Domain::Target] {
                let pid = layer.private(domain);
                let wp = &store.layer(pid).weights;
                let pen = frobenius_orth_grad(ws, &wp.row_range(0, ws.rows()))?;
                total += pen.value;
                grads.add_weight_rows(layer.shared, &pen.grad_a, scale)?;
                grads.add_weight_rows(pid, &pen.grad_b, scale)?;
            }
        }
        Ok(total)
    }
}

use serde::{Deserialize, Serialize};

use super::ParamKey;
use crate::error::{shape_err, Error, Result};
use crate::nn::{Activation, DenseCache, DenseLayer, GradStore, LayerId, Matrix, ParamStore, Rng};
use crate::Domain;

/// Input and output widths of an [`EncoderTriple`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderSpec {
    pub d_shared: usize,
    pub d_source: usize,
    pub d_target: usize,
    /// `D_s`, width of the shared representation.
    pub width_shared: usize,
    /// `D_p`, width of each private representation.
    pub width_private: usize,
    /// Appends the treatment indicator to the shared encoder's input (S-learner).
    pub treatment_input: bool,
}

impl EncoderSpec {
    pub fn new(d_shared: usize, d_source: usize, d_target: usize) -> Self {
        Self {
            d_shared,
            d_source,
            d_target,
            width_shared: 100,
            width_private: 100,
            treatment_input: false,
        }
    }

    pub fn with_treatment_input(mut self) -> Self {
        self.treatment_input = true;
        self
    }

    pub fn d_domain(&self, domain: Domain) -> usize {
        match domain {
            Domain::Source => self.d_source,
            Domain::Target => self.d_target,
        }
    }

    pub fn output_width(&self) -> usize {
        self.width_shared + self.width_private
    }

    fn validate(&self) -> Result<()> {
        if self.d_shared == 0 || self.d_source <= self.d_shared || self.d_target <= self.d_shared {
            return Err(Error::Invalid(format!(
                "encoder needs 0 < d_shared < d_source, d_target (got {}, {}, {})",
                self.d_shared, self.d_source, self.d_target
            )));
        }
        if self.width_shared == 0 || self.width_private == 0 {
            return Err(Error::Invalid("representation widths must be positive".into()));
        }
        Ok(())
    }
}

/// Shared and private representations of one batch.
#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    pub z_shared: Matrix,
    pub z_private: Matrix,
}

impl Representation {
    /// `[z_shared || z_private]`.
    pub fn concat(&self) -> Matrix {
        Matrix::hcat(&self.z_shared, &self.z_private).expect("row counts agree by construction")
    }

    pub fn width(&self) -> usize {
        self.z_shared.cols() + self.z_private.cols()
    }

    pub fn rows(&self) -> usize {
        self.z_shared.rows()
    }
}

#[derive(Clone, Debug)]
pub struct EncoderCache {
    domain: Domain,
    shared: DenseCache,
    private: DenseCache,
}

impl EncoderCache {
    pub fn domain(&self) -> Domain {
        self.domain
    }
}

/// `φˢ` on the shared block, `φ^{p_R}` and `φ^{p_T}` on each domain's full feature vector.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EncoderTriple {
    spec: EncoderSpec,
    phi_shared: LayerId,
    phi_private_source: LayerId,
    phi_private_target: LayerId,
}

impl EncoderTriple {
    pub fn build(store: &mut ParamStore, block: &str, arm: Option<u8>, spec: EncoderSpec, rng: &mut Rng) -> Result<Self> {
        spec.validate()?;
        let key = |s: &str| ParamKey::new(block, arm, 1, s).to_string();
        let d_in_shared = spec.d_shared + usize::from(spec.treatment_input);
        let phi_shared = store.add(
            key("phi_shared"),
            DenseLayer::init(d_in_shared, spec.width_shared, Activation::Relu, rng),
        );
        let phi_private_source = store.add(
            key("phi_private_source"),
            DenseLayer::init(spec.d_source, spec.width_private, Activation::Relu, rng),
        );
        let phi_private_target = store.add(
            key("phi_private_target"),
            DenseLayer::init(spec.d_target, spec.width_private, Activation::Relu, rng),
        );
        Ok(Self {
            spec,
            phi_shared,
            phi_private_source,
            phi_private_target,
        })
    }

    pub fn spec(&self) -> &EncoderSpec {
        &self.spec
    }

    pub fn shared_id(&self) -> LayerId {
        self.phi_shared
    }

    pub fn private_id(&self, domain: Domain) -> LayerId {
        match domain {
            Domain::Source => self.phi_private_source,
            Domain::Target => self.phi_private_target,
        }
    }

    fn shared_input(&self, x: &Matrix, domain: Domain, treatment: Option<&[f64]>) -> Result<Matrix> {
        let d = self.spec.d_domain(domain);
        if x.cols() != d {
            return shape_err("encode", format!("{d} {domain} features"), x.cols());
        }
        let xs = x.col_range(0, self.spec.d_shared);
        match (self.spec.treatment_input, treatment) {
            (false, None) => Ok(xs),
            (true, Some(w)) => {
                if w.len() != x.rows() {
                    return shape_err("encode treatment column", x.rows(), w.len());
                }
                Matrix::hcat(&xs, &Matrix::column(w))
            }
            (true, None) => Err(Error::Invalid("encoder expects a treatment column".into())),
            (false, Some(_)) => Err(Error::Invalid("encoder takes no treatment column".into())),
        }
    }

    pub fn encode(
        &self,
        store: &ParamStore,
        x: &Matrix,
        domain: Domain,
        treatment: Option<&[f64]>,
    ) -> Result<(Representation, EncoderCache)> {
        let xs = self.shared_input(x, domain, treatment)?;
        let (z_shared, shared) = store.layer(self.phi_shared).forward(&xs)?;
        let (z_private, private) = store.layer(self.private_id(domain)).forward(x)?;
        Ok((
            Representation { z_shared, z_private },
            EncoderCache { domain, shared, private },
        ))
    }

    pub fn infer(&self, store: &ParamStore, x: &Matrix, domain: Domain, treatment: Option<&[f64]>) -> Result<Representation> {
        let xs = self.shared_input(x, domain, treatment)?;
        Ok(Representation {
            z_shared: store.layer(self.phi_shared).infer(&xs)?,
            z_private: store.layer(self.private_id(domain)).infer(x)?,
        })
    }

    /// Accumulates parameter gradients from gradients on both representation blocks.
    pub fn backward(
        &self,
        store: &ParamStore,
        cache: &EncoderCache,
        g_shared: &Matrix,
        g_private: &Matrix,
        grads: &mut GradStore,
    ) -> Result<()> {
        let gs = store.layer(self.phi_shared).backward(&cache.shared, g_shared)?;
        grads.add_dense(self.phi_shared, &gs)?;
        let id = self.private_id(cache.domain);
        let gp = store.layer(id).backward(&cache.private, g_private)?;
        grads.add_dense(id, &gp)?;
        Ok(())
    }

    /// [`EncoderTriple::backward`] from a gradient on the concatenated representation.
    pub fn backward_concat(&self, store: &ParamStore, cache: &EncoderCache, g: &Matrix, grads: &mut GradStore) -> Result<()> {
        let (gs, gp) = g.split_cols(self.spec.width_shared)?;
        self.backward(store, cache, &gs, &gp, grads)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::rng_from_seed;

    #[test]
    fn default_widths_concatenate_to_200() {
        let mut store = ParamStore::new();
        let enc = EncoderTriple::build(&mut store, "enc", None, EncoderSpec::new(5, 9, 12), &mut rng_from_seed(0)).unwrap();
        let x = Matrix::filled(4, 9, 0.3);
        let (r, _) = enc.encode(&store, &x, Domain::Source, None).unwrap();
        assert_eq!(r.concat().shape(), (4, 200));
        assert_eq!(r.width(), 200);
        assert!(enc.encode(&store, &x, Domain::Target, None).is_err());
        let again = enc.infer(&store, &x, Domain::Source, None).unwrap();
        assert_eq!(again, r);
    }

    #[test]
    fn zero_encoders_give_zero_representation() {
        let mut store = ParamStore::new();
        let enc = EncoderTriple::build(&mut store, "enc", None, EncoderSpec::new(2, 3, 4), &mut rng_from_seed(0)).unwrap();
        for id in store.ids().collect::<Vec<_>>() {
            store.freeze_at_zero(id);
        }
        let r = enc.infer(&store, &Matrix::zeros(3, 4), Domain::Target, None).unwrap();
        assert!(r.concat().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn treatment_column_is_required_when_configured() {
        let mut store = ParamStore::new();
        let spec = EncoderSpec::new(2, 3, 4).with_treatment_input();
        let enc = EncoderTriple::build(&mut store, "enc", None, spec, &mut rng_from_seed(0)).unwrap();
        let x = Matrix::filled(2, 3, 0.5);
        assert!(enc.infer(&store, &x, Domain::Source, None).is_err());
        let a = enc.infer(&store, &x, Domain::Source, Some(&[0.0, 0.0])).unwrap();
        let b = enc.infer(&store, &x, Domain::Source, Some(&[1.0, 1.0])).unwrap();
        assert_ne!(a.z_shared, b.z_shared);
        assert_eq!(a.z_private, b.z_private);
        assert_eq!(store.layer(enc.shared_id()).in_dim(), 3);
    }
}

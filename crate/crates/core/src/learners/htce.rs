use serde::{Deserialize, Serialize};

use super::architecture::{architecture, HtceArchitecture};
use super::dr::dr_pseudo_outcomes;
use super::manifest::{ComponentManifest, LearnerFamily, ModelManifest};
use super::nets::{HeadLoss, SingleStackNet, TarnetNet, TwoArmNet};
use super::train::{fit, LossParts, Objective, TrainingHistory};
use super::{Batch, CateModel, LearnerKind, LossWeights, TrainConfig};
use crate::blocks::{EncoderSpec, ParamManifest};
use crate::error::{Error, Result};
use crate::nn::{label_hash, mix_seed, rng_from_seed, GradStore, Matrix, ParamStore};
use crate::simbench::{Dataset, SplitDataset};
use crate::Domain;

#[derive(Clone, Debug, Serialize, Deserialize)]
enum HtceNets {
    S(SingleStackNet),
    T(TwoArmNet),
    Tarnet(TarnetNet),
    Dr {
        outcome: TwoArmNet,
        propensity: SingleStackNet,
        pseudo: SingleStackNet,
    },
}

/// Stage-1 nuisances used by the DR learner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nuisance {
    /// Outcome and propensity networks trained on the data.
    Learned,
    /// Simulator ground truth: true `μ₀, μ₁, π` and noiseless factual outcomes.
    Oracle,
}

/// A trained (or freshly initialised) HTCE learner.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HtceLearner {
    kind: LearnerKind,
    encoder: EncoderSpec,
    architecture: HtceArchitecture,
    config: TrainConfig,
    nets: HtceNets,
    histories: Vec<(String, TrainingHistory)>,
    trained: bool,
}

pub const OUTCOME: &str = "outcome";
pub const PROPENSITY: &str = "propensity";
pub const PSEUDO_OUTCOME: &str = "pseudo_outcome";

impl HtceLearner {
    /// Untrained learner with architecture defaults. `encoder` gives the input widths;
    /// its representation widths are overridden by the architecture table.
    pub fn new(kind: LearnerKind, encoder: EncoderSpec, config: TrainConfig) -> Result<Self> {
        Self::with_architecture(kind, encoder, config, architecture().htce.clone())
    }

    /// As [`HtceLearner::new`] with explicit layer widths and depths.
    pub fn with_architecture(
        kind: LearnerKind,
        encoder: EncoderSpec,
        config: TrainConfig,
        arch: HtceArchitecture,
    ) -> Result<Self> {
        config.validate()?;
        arch.validate()?;
        let mut encoder = encoder;
        encoder.width_shared = arch.encoder_units;
        encoder.width_private = arch.encoder_units;
        encoder.treatment_input = false;
        let mut rng = rng_from_seed(mix_seed(&[config.seed, label_hash("init")]));
        let ab = config.ablation;
        let depth = &arch.stack_depth;
        let width = arch.stack_units;
        let nets = match kind {
            LearnerKind::S => HtceNets::S(SingleStackNet::build(
                "po",
                encoder.with_treatment_input(),
                depth.s,
                width,
                HeadLoss::Mse,
                ab,
                &mut rng,
            )?),
            LearnerKind::T => HtceNets::T(TwoArmNet::build(encoder, depth.t, width, ab, &mut rng)?),
            LearnerKind::Tarnet => HtceNets::Tarnet(TarnetNet::build(encoder, &arch, ab, &mut rng)?),
            LearnerKind::Dr => HtceNets::Dr {
                outcome: TwoArmNet::build(encoder, depth.dr_outcome, width, ab, &mut rng)?,
                propensity: SingleStackNet::build("prop", encoder, depth.dr_propensity, width, HeadLoss::Bce, ab, &mut rng)?,
                pseudo: SingleStackNet::build("tau", encoder, depth.dr_pseudo_outcome, width, HeadLoss::Mse, ab, &mut rng)?,
            },
        };
        Ok(Self {
            kind,
            encoder,
            architecture: arch,
            config,
            nets,
            histories: Vec::new(),
            trained: false,
        })
    }

    pub fn kind(&self) -> LearnerKind {
        self.kind
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn encoder_spec(&self) -> &EncoderSpec {
        &self.encoder
    }

    pub fn architecture(&self) -> &HtceArchitecture {
        &self.architecture
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    /// Training history per component, in training order.
    pub fn histories(&self) -> &[(String, TrainingHistory)] {
        &self.histories
    }

    /// Names of the separately trained networks.
    pub fn components(&self) -> Vec<&'static str> {
        match self.nets {
            HtceNets::Dr { .. } => vec![OUTCOME, PROPENSITY, PSEUDO_OUTCOME],
            _ => vec![OUTCOME],
        }
    }

    fn objective(&self, component: &str) -> Result<&dyn Objective> {
        let o: Option<&dyn Objective> = match (&self.nets, component) {
            (HtceNets::S(n), OUTCOME) => Some(n),
            (HtceNets::T(n), OUTCOME) => Some(n),
            (HtceNets::Tarnet(n), OUTCOME) => Some(n),
            (HtceNets::Dr { outcome, .. }, OUTCOME) => Some(outcome),
            (HtceNets::Dr { propensity, .. }, PROPENSITY) => Some(propensity),
            (HtceNets::Dr { pseudo, .. }, PSEUDO_OUTCOME) => Some(pseudo),
            _ => None,
        };
        o.ok_or_else(|| Error::Invalid(format!("no component `{component}` in HTCE-{}", self.kind)))
    }

    fn objective_mut(&mut self, component: &str) -> Result<&mut dyn Objective> {
        let kind = self.kind;
        let o: Option<&mut dyn Objective> = match (&mut self.nets, component) {
            (HtceNets::S(n), OUTCOME) => Some(n),
            (HtceNets::T(n), OUTCOME) => Some(n),
            (HtceNets::Tarnet(n), OUTCOME) => Some(n),
            (HtceNets::Dr { outcome, .. }, OUTCOME) => Some(outcome),
            (HtceNets::Dr { propensity, .. }, PROPENSITY) => Some(propensity),
            (HtceNets::Dr { pseudo, .. }, PSEUDO_OUTCOME) => Some(pseudo),
            _ => None,
        };
        o.ok_or_else(|| Error::Invalid(format!("no component `{component}` in HTCE-{kind}")))
    }

    pub fn params(&self, component: &str) -> Result<&ParamStore> {
        Ok(self.objective(component)?.store())
    }

    pub fn params_mut(&mut self, component: &str) -> Result<&mut ParamStore> {
        Ok(self.objective_mut(component)?.store_mut())
    }

    /// Objective value and parameter gradients of one component on a paired batch.
    ///
    /// The propensity component regresses `w`; the pseudo-outcome component
    /// regresses `y` as given.
    pub fn loss_and_gradients(
        &self,
        component: &str,
        source: &Batch,
        target: &Batch,
        weights: LossWeights,
    ) -> Result<(LossParts, GradStore)> {
        let o = self.objective(component)?;
        let mut grads = GradStore::zeros_like(o.store());
        let parts = o.accumulate(source, target, weights, &mut grads)?;
        Ok((parts, grads))
    }

    pub fn loss(&self, component: &str, source: &Batch, target: &Batch, weights: LossWeights) -> Result<LossParts> {
        Ok(self.loss_and_gradients(component, source, target, weights)?.0)
    }

    fn ensure_trained(&self) -> Result<()> {
        if self.trained {
            Ok(())
        } else {
            Err(Error::Untrained)
        }
    }

    /// Potential-outcome estimates `(μ̂₀, μ̂₁)` in `domain`.
    pub fn predict_outcomes(&self, x: &Matrix, domain: Domain) -> Result<(Vec<f64>, Vec<f64>)> {
        self.ensure_trained()?;
        match &self.nets {
            HtceNets::S(n) => {
                let zeros = vec![0u8; x.rows()];
                let ones = vec![1u8; x.rows()];
                Ok((n.predict(x, domain, Some(&zeros))?, n.predict(x, domain, Some(&ones))?))
            }
            HtceNets::T(n) | HtceNets::Dr { outcome: n, .. } => Ok((n.predict_arm(x, domain, 0)?, n.predict_arm(x, domain, 1)?)),
            HtceNets::Tarnet(n) => Ok((n.predict_arm(x, domain, 0)?, n.predict_arm(x, domain, 1)?)),
        }
    }

    /// `π̂(x)` from the DR learner's propensity network.
    pub fn predict_propensity(&self, x: &Matrix, domain: Domain) -> Result<Vec<f64>> {
        self.ensure_trained()?;
        match &self.nets {
            HtceNets::Dr { propensity, .. } => propensity.predict(x, domain, None),
            _ => Err(Error::Invalid(format!("HTCE-{} has no propensity network", self.kind))),
        }
    }

    pub fn manifest(&self) -> Result<ModelManifest> {
        let components = self
            .components()
            .into_iter()
            .map(|c| {
                Ok(ComponentManifest {
                    name: c.to_string(),
                    params: ParamManifest::from_store(self.params(c)?)?,
                })
            })
            .collect::<Result<_>>()?;
        let mut m = ModelManifest::new(
            LearnerFamily::Htce,
            self.kind,
            None,
            self.encoder.d_shared,
            Some(self.encoder.d_source),
            self.encoder.d_target,
            self.config.clone(),
            components,
        );
        m.architecture = Some(self.architecture.clone());
        Ok(m)
    }

    /// Rebuilds a trained learner from its manifest.
    pub fn from_manifest(m: &ModelManifest) -> Result<Self> {
        m.check(LearnerFamily::Htce)?;
        let d_source = m
            .d_source
            .ok_or_else(|| Error::Invalid("HTCE manifest lacks d_source".into()))?;
        let arch = m.architecture.clone().unwrap_or_else(|| architecture().htce.clone());
        let enc = EncoderSpec::new(m.d_shared, d_source, m.d_target);
        let mut learner = Self::with_architecture(m.kind, enc, m.config.clone(), arch)?;
        for c in &m.components {
            c.params.load_into(learner.params_mut(&c.name)?)?;
        }
        if m.components.len() != learner.components().len() {
            return Err(Error::Invalid("manifest component count does not match the learner".into()));
        }
        learner.trained = true;
        Ok(learner)
    }
}

impl CateModel for HtceLearner {
    fn name(&self) -> String {
        format!("htce-{}", self.kind)
    }

    fn predict_cate(&self, x_target: &Matrix) -> Result<Vec<f64>> {
        self.ensure_trained()?;
        let tau = match &self.nets {
            HtceNets::Dr { pseudo, .. } => pseudo.predict(x_target, Domain::Target, None)?,
            _ => {
                let (m0, m1) = self.predict_outcomes(x_target, Domain::Target)?;
                m1.iter().zip(&m0).map(|(a, b)| a - b).collect()
            }
        };
        if tau.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("CATE prediction".into()));
        }
        Ok(tau)
    }
}

/// Each arm must appear somewhere in the combined training data.
fn require_arms(source: &Dataset, target: &Dataset) -> Result<()> {
    for arm in 0..2u8 {
        if source.arm_count(arm) + target.arm_count(arm) == 0 {
            return Err(Error::MissingArm {
                arm,
                domain: "source or target",
            });
        }
    }
    Ok(())
}

fn check_inputs(source: &SplitDataset, target: &SplitDataset) -> Result<EncoderSpec> {
    if source.domain() != Domain::Source || target.domain() != Domain::Target {
        return Err(Error::Invalid("expected a source and a target dataset".into()));
    }
    for ds in [&source.train, &target.train, &target.validation] {
        if ds.is_empty() {
            return Err(Error::Invalid(format!("empty {} split", ds.domain)));
        }
    }
    if source.train.d_shared != target.train.d_shared {
        return Err(Error::Invalid("source and target disagree on the shared block width".into()));
    }
    Ok(EncoderSpec::new(target.train.d_shared, source.train.x.cols(), target.train.x.cols()))
}

fn stage_rng(cfg: &TrainConfig, stage: &str) -> crate::nn::Rng {
    rng_from_seed(mix_seed(&[cfg.seed, label_hash(stage)]))
}

/// Trains an HTCE learner of the given kind on both domains.
///
/// An arm may be missing from one domain as long as the other domain observes it;
/// the shared subspaces then carry that arm into the domain without it.
pub fn train_htce(kind: LearnerKind, source: &SplitDataset, target: &SplitDataset, cfg: &TrainConfig) -> Result<HtceLearner> {
    train_htce_with(kind, source, target, cfg, Nuisance::Learned)
}

pub fn train_htce_s(source: &SplitDataset, target: &SplitDataset, cfg: &TrainConfig) -> Result<HtceLearner> {
    train_htce(LearnerKind::S, source, target, cfg)
}

pub fn train_htce_t(source: &SplitDataset, target: &SplitDataset, cfg: &TrainConfig) -> Result<HtceLearner> {
    train_htce(LearnerKind::T, source, target, cfg)
}

pub fn train_htce_tarnet(source: &SplitDataset, target: &SplitDataset, cfg: &TrainConfig) -> Result<HtceLearner> {
    train_htce(LearnerKind::Tarnet, source, target, cfg)
}

pub fn train_htce_dr(source: &SplitDataset, target: &SplitDataset, cfg: &TrainConfig) -> Result<HtceLearner> {
    train_htce(LearnerKind::Dr, source, target, cfg)
}

/// HTCE-DR whose first stage is replaced by the simulator's ground truth.
pub fn train_htce_dr_oracle(source: &SplitDataset, target: &SplitDataset, cfg: &TrainConfig) -> Result<HtceLearner> {
    train_htce_with(LearnerKind::Dr, source, target, cfg, Nuisance::Oracle)
}

pub fn train_htce_with(
    kind: LearnerKind,
    source: &SplitDataset,
    target: &SplitDataset,
    cfg: &TrainConfig,
    nuisance: Nuisance,
) -> Result<HtceLearner> {
    let spec = check_inputs(source, target)?;
    if nuisance == Nuisance::Oracle && kind != LearnerKind::Dr {
        return Err(Error::Invalid("oracle nuisances apply to the DR learner only".into()));
    }
    if nuisance == Nuisance::Learned {
        require_arms(&source.train, &target.train)?;
    }
    let mut learner = HtceLearner::new(kind, spec, cfg.clone())?;
    let weights = cfg.loss_weights();
    let src = Batch::from_dataset(&source.train);
    let tgt = Batch::from_dataset(&target.train);
    let val = Batch::from_dataset(&target.validation);
    let mut histories = Vec::new();
    match &mut learner.nets {
        HtceNets::S(n) => histories.push((OUTCOME, fit(n, &src, &tgt, &val, cfg, weights, &mut stage_rng(cfg, OUTCOME))?)),
        HtceNets::T(n) => histories.push((OUTCOME, fit(n, &src, &tgt, &val, cfg, weights, &mut stage_rng(cfg, OUTCOME))?)),
        HtceNets::Tarnet(n) => histories.push((OUTCOME, fit(n, &src, &tgt, &val, cfg, weights, &mut stage_rng(cfg, OUTCOME))?)),
        HtceNets::Dr {
            outcome,
            propensity,
            pseudo,
        } => {
            let targets = match nuisance {
                Nuisance::Learned => {
                    histories.push((OUTCOME, fit(outcome, &src, &tgt, &val, cfg, weights, &mut stage_rng(cfg, OUTCOME))?));
                    histories.push((
                        PROPENSITY,
                        fit(propensity, &src, &tgt, &val, cfg, weights, &mut stage_rng(cfg, PROPENSITY))?,
                    ));
                    let learned = |ds: &Dataset| -> Result<Vec<f64>> {
                        let pi = propensity.predict(&ds.x, ds.domain, None)?;
                        let m0 = outcome.predict_arm(&ds.x, ds.domain, 0)?;
                        let m1 = outcome.predict_arm(&ds.x, ds.domain, 1)?;
                        dr_pseudo_outcomes(&ds.y, &ds.w, &m0, &m1, &pi)
                    };
                    [learned(&source.train)?, learned(&target.train)?, learned(&target.validation)?]
                }
                Nuisance::Oracle => {
                    let oracle = |ds: &Dataset| -> Result<Vec<f64>> {
                        let y: Vec<f64> = (0..ds.len())
                            .map(|i| if ds.w[i] == 1 { ds.mu1[i] } else { ds.mu0[i] })
                            .collect();
                        dr_pseudo_outcomes(&y, &ds.w, &ds.mu0, &ds.mu1, &ds.pi)
                    };
                    [oracle(&source.train)?, oracle(&target.train)?, oracle(&target.validation)?]
                }
            };
            let [ys, yt, yv] = targets;
            histories.push((
                PSEUDO_OUTCOME,
                fit(
                    pseudo,
                    &src.with_targets(ys)?,
                    &tgt.with_targets(yt)?,
                    &val.with_targets(yv)?,
                    cfg,
                    weights,
                    &mut stage_rng(cfg, PSEUDO_OUTCOME),
                )?,
            ));
        }
    }
    learner.histories = histories.into_iter().map(|(n, h)| (n.to_string(), h)).collect();
    learner.trained = true;
    Ok(learner)
}

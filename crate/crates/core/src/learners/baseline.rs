use serde::{Deserialize, Serialize};

use super::baseline_nets::{MlpNet, TarnetMlpNet, TwoMlpNet};
use super::dr::dr_pseudo_outcomes;
use super::manifest::{ComponentManifest, LearnerFamily, ModelManifest};
use super::nets::HeadLoss;
use super::train::{fit, Objective, TrainingHistory};
use super::{Batch, CateModel, LearnerKind, TrainConfig, OUTCOME, PROPENSITY, PSEUDO_OUTCOME};
use crate::blocks::ParamManifest;
use crate::error::{shape_err, Error, Result};
use crate::nn::{label_hash, mix_seed, rng_from_seed, Matrix, ParamStore};
use crate::simbench::{Dataset, SplitDataset};
use crate::Domain;

/// Which target columns a baseline sees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMode {
    /// All target features.
    TargetOnly,
    /// Only the leading shared block of the target features.
    SharedFeaturesOnly,
}

impl BaselineMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BaselineMode::TargetOnly => "target_only",
            BaselineMode::SharedFeaturesOnly => "shared_features_only",
        }
    }
}

impl std::fmt::Display for BaselineMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
enum BaselineNets {
    S(MlpNet),
    T(TwoMlpNet),
    Tarnet(TarnetMlpNet),
    Dr {
        outcome: TwoMlpNet,
        propensity: MlpNet,
        pseudo: MlpNet,
    },
}

/// Single-domain CATE learner trained on the target data alone.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BaselineLearner {
    kind: LearnerKind,
    mode: BaselineMode,
    d_shared: usize,
    d_target: usize,
    config: TrainConfig,
    nets: BaselineNets,
    histories: Vec<(String, TrainingHistory)>,
    trained: bool,
}

impl BaselineLearner {
    pub fn new(kind: LearnerKind, mode: BaselineMode, d_shared: usize, d_target: usize, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        if d_shared == 0 || d_shared > d_target {
            return Err(Error::Invalid(format!("d_shared = {d_shared} outside 1..={d_target}")));
        }
        let d_in = match mode {
            BaselineMode::TargetOnly => d_target,
            BaselineMode::SharedFeaturesOnly => d_shared,
        };
        let mut rng = rng_from_seed(mix_seed(&[config.seed, label_hash("init")]));
        let nets = match kind {
            LearnerKind::S => BaselineNets::S(MlpNet::build("s", d_in, HeadLoss::Mse, true, &mut rng)),
            LearnerKind::T => BaselineNets::T(TwoMlpNet::build(d_in, &mut rng)),
            LearnerKind::Tarnet => BaselineNets::Tarnet(TarnetMlpNet::build(d_in, &mut rng)),
            LearnerKind::Dr => BaselineNets::Dr {
                outcome: TwoMlpNet::build(d_in, &mut rng),
                propensity: MlpNet::build("prop", d_in, HeadLoss::Bce, false, &mut rng),
                pseudo: MlpNet::build("tau", d_in, HeadLoss::Mse, false, &mut rng),
            },
        };
        Ok(Self {
            kind,
            mode,
            d_shared,
            d_target,
            config,
            nets,
            histories: Vec::new(),
            trained: false,
        })
    }

    pub fn kind(&self) -> LearnerKind {
        self.kind
    }

    pub fn mode(&self) -> BaselineMode {
        self.mode
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    pub fn histories(&self) -> &[(String, TrainingHistory)] {
        &self.histories
    }

    pub fn components(&self) -> Vec<&'static str> {
        match self.nets {
            BaselineNets::Dr { .. } => vec![OUTCOME, PROPENSITY, PSEUDO_OUTCOME],
            _ => vec![OUTCOME],
        }
    }

    fn objective(&self, component: &str) -> Result<&dyn Objective> {
        let o: Option<&dyn Objective> = match (&self.nets, component) {
            (BaselineNets::S(n), OUTCOME) => Some(n),
            (BaselineNets::T(n), OUTCOME) => Some(n),
            (BaselineNets::Tarnet(n), OUTCOME) => Some(n),
            (BaselineNets::Dr { outcome, .. }, OUTCOME) => Some(outcome),
            (BaselineNets::Dr { propensity, .. }, PROPENSITY) => Some(propensity),
            (BaselineNets::Dr { pseudo, .. }, PSEUDO_OUTCOME) => Some(pseudo),
            _ => None,
        };
        o.ok_or_else(|| Error::Invalid(format!("no component `{component}` in baseline {}", self.kind)))
    }

    fn objective_mut(&mut self, component: &str) -> Result<&mut dyn Objective> {
        let kind = self.kind;
        let o: Option<&mut dyn Objective> = match (&mut self.nets, component) {
            (BaselineNets::S(n), OUTCOME) => Some(n),
            (BaselineNets::T(n), OUTCOME) => Some(n),
            (BaselineNets::Tarnet(n), OUTCOME) => Some(n),
            (BaselineNets::Dr { outcome, .. }, OUTCOME) => Some(outcome),
            (BaselineNets::Dr { propensity, .. }, PROPENSITY) => Some(propensity),
            (BaselineNets::Dr { pseudo, .. }, PSEUDO_OUTCOME) => Some(pseudo),
            _ => None,
        };
        o.ok_or_else(|| Error::Invalid(format!("no component `{component}` in baseline {kind}")))
    }

    pub fn params(&self, component: &str) -> Result<&ParamStore> {
        Ok(self.objective(component)?.store())
    }

    pub fn params_mut(&mut self, component: &str) -> Result<&mut ParamStore> {
        Ok(self.objective_mut(component)?.store_mut())
    }

    /// Columns of a full-width target matrix that this learner consumes.
    fn inputs(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.d_target {
            return shape_err("BaselineLearner input", self.d_target, x.cols());
        }
        Ok(match self.mode {
            BaselineMode::TargetOnly => x.clone(),
            BaselineMode::SharedFeaturesOnly => x.col_range(0, self.d_shared),
        })
    }

    /// `(μ̂₀, μ̂₁)` on full-width target rows.
    pub fn predict_outcomes(&self, x: &Matrix) -> Result<(Vec<f64>, Vec<f64>)> {
        if !self.trained {
            return Err(Error::Untrained);
        }
        let x = self.inputs(x)?;
        match &self.nets {
            BaselineNets::S(n) => {
                let zeros = vec![0u8; x.rows()];
                let ones = vec![1u8; x.rows()];
                Ok((n.predict(&x, Some(&zeros))?, n.predict(&x, Some(&ones))?))
            }
            BaselineNets::T(n) | BaselineNets::Dr { outcome: n, .. } => Ok((n.predict_arm(&x, 0)?, n.predict_arm(&x, 1)?)),
            BaselineNets::Tarnet(n) => Ok((n.predict_arm(&x, 0)?, n.predict_arm(&x, 1)?)),
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
        Ok(ModelManifest::new(
            LearnerFamily::Baseline,
            self.kind,
            Some(self.mode),
            self.d_shared,
            None,
            self.d_target,
            self.config.clone(),
            components,
        ))
    }

    pub fn from_manifest(m: &ModelManifest) -> Result<Self> {
        m.check(LearnerFamily::Baseline)?;
        let mode = m
            .mode
            .ok_or_else(|| Error::Invalid("baseline manifest lacks mode".into()))?;
        let mut learner = Self::new(m.kind, mode, m.d_shared, m.d_target, m.config.clone())?;
        if m.components.len() != learner.components().len() {
            return Err(Error::Invalid("manifest component count does not match the learner".into()));
        }
        for c in &m.components {
            c.params.load_into(learner.params_mut(&c.name)?)?;
        }
        learner.trained = true;
        Ok(learner)
    }
}

impl CateModel for BaselineLearner {
    fn name(&self) -> String {
        format!("{}-{}", self.mode, self.kind)
    }

    fn predict_cate(&self, x_target: &Matrix) -> Result<Vec<f64>> {
        if !self.trained {
            return Err(Error::Untrained);
        }
        let tau = match &self.nets {
            BaselineNets::Dr { pseudo, .. } => pseudo.predict(&self.inputs(x_target)?, None)?,
            _ => {
                let (m0, m1) = self.predict_outcomes(x_target)?;
                m1.iter().zip(&m0).map(|(a, b)| a - b).collect()
            }
        };
        if tau.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("CATE prediction".into()));
        }
        Ok(tau)
    }
}

fn input_batch(ds: &Dataset, mode: BaselineMode) -> Batch {
    let b = Batch::from_dataset(ds);
    match mode {
        BaselineMode::TargetOnly => b,
        BaselineMode::SharedFeaturesOnly => b.with_columns(0..ds.d_shared),
    }
}

/// Trains a single-domain learner on the target training split.
pub fn train_baseline(target: &SplitDataset, kind: LearnerKind, mode: BaselineMode, cfg: &TrainConfig) -> Result<BaselineLearner> {
    if target.domain() != Domain::Target {
        return Err(Error::Invalid("baselines train on the target dataset".into()));
    }
    if target.train.is_empty() || target.validation.is_empty() {
        return Err(Error::Invalid("empty target split".into()));
    }
    for arm in 0..2u8 {
        if target.train.arm_count(arm) == 0 {
            return Err(Error::MissingArm { arm, domain: "target" });
        }
    }
    let mut learner = BaselineLearner::new(kind, mode, target.train.d_shared, target.train.x.cols(), cfg.clone())?;
    let tgt = input_batch(&target.train, mode);
    let val = input_batch(&target.validation, mode);
    let none = Batch::empty(tgt.x.cols());
    let weights = super::LossWeights::DATA_ONLY;
    let rng = |stage: &str| rng_from_seed(mix_seed(&[cfg.seed, label_hash(stage)]));
    let mut histories = Vec::new();
    match &mut learner.nets {
        BaselineNets::S(n) => histories.push((OUTCOME, fit(n, &none, &tgt, &val, cfg, weights, &mut rng(OUTCOME))?)),
        BaselineNets::T(n) => histories.push((OUTCOME, fit(n, &none, &tgt, &val, cfg, weights, &mut rng(OUTCOME))?)),
        BaselineNets::Tarnet(n) => histories.push((OUTCOME, fit(n, &none, &tgt, &val, cfg, weights, &mut rng(OUTCOME))?)),
        BaselineNets::Dr {
            outcome,
            propensity,
            pseudo,
        } => {
            histories.push((OUTCOME, fit(outcome, &none, &tgt, &val, cfg, weights, &mut rng(OUTCOME))?));
            histories.push((PROPENSITY, fit(propensity, &none, &tgt, &val, cfg, weights, &mut rng(PROPENSITY))?));
            let pseudo_targets = |b: &Batch| -> Result<Vec<f64>> {
                let pi = propensity.predict(&b.x, None)?;
                let m0 = outcome.predict_arm(&b.x, 0)?;
                let m1 = outcome.predict_arm(&b.x, 1)?;
                dr_pseudo_outcomes(&b.y, &b.w, &m0, &m1, &pi)
            };
            let yt = pseudo_targets(&tgt)?;
            let yv = pseudo_targets(&val)?;
            histories.push((
                PSEUDO_OUTCOME,
                fit(pseudo, &none, &tgt.with_targets(yt)?, &val.with_targets(yv)?, cfg, weights, &mut rng(PSEUDO_OUTCOME))?,
            ));
        }
    }
    learner.histories = histories.into_iter().map(|(n, h)| (n.to_string(), h)).collect();
    learner.trained = true;
    Ok(learner)
}

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{Ablation, BaselineMode, LearnerKind, TrainConfig};
use crate::simbench::{CoefficientLaw, FeaturePartition, SimConfig, FIXED_TARGET_SIZES};

/// Experiment design.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    /// HTCE against the single-domain baselines at the template settings.
    Benchmark,
    /// Full HTCE against its ablations.
    Ablation,
    /// Varies the cross-domain sharing weight α.
    AlphaSweep,
    /// Varies the target size.
    NtargetSweep,
    /// Varies the selection bias `(κ_R, κ_T)`.
    KappaSweep,
}

impl Sweep {
    pub fn as_str(self) -> &'static str {
        match self {
            Sweep::Benchmark => "benchmark",
            Sweep::Ablation => "ablation",
            Sweep::AlphaSweep => "alpha_sweep",
            Sweep::NtargetSweep => "ntarget_sweep",
            Sweep::KappaSweep => "kappa_sweep",
        }
    }

    pub fn default_methods(self) -> Vec<Method> {
        match self {
            Sweep::Benchmark | Sweep::AlphaSweep => vec![Method::TargetOnly, Method::SharedFeaturesOnly, Method::Htce],
            Sweep::Ablation => vec![
                Method::Htce,
                Method::HtceNoPoSharing,
                Method::HtceNoOrthZ,
                Method::HtceNoOrthPo,
            ],
            Sweep::NtargetSweep | Sweep::KappaSweep => vec![Method::TargetOnly, Method::Htce],
        }
    }

    pub fn default_values(self) -> Vec<SweepValue> {
        match self {
            Sweep::Benchmark | Sweep::Ablation => Vec::new(),
            Sweep::AlphaSweep => (1..=10).map(|i| SweepValue::Scalar(i as f64 / 10.0)).collect(),
            Sweep::NtargetSweep => FIXED_TARGET_SIZES.iter().map(|&n| SweepValue::Scalar(n as f64)).collect(),
            Sweep::KappaSweep => {
                let mut v = Vec::new();
                for kr in [0.0, 2.0, 10.0] {
                    for kt in [0.0, 2.0, 4.0, 6.0, 8.0, 10.0] {
                        v.push(SweepValue::Pair([kr, kt]));
                    }
                }
                v
            }
        }
    }
}

impl std::fmt::Display for Sweep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a learner variant is trained in one grid cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Htce,
    TargetOnly,
    SharedFeaturesOnly,
    HtceNoPoSharing,
    HtceNoOrthZ,
    HtceNoOrthPo,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Htce,
        Method::TargetOnly,
        Method::SharedFeaturesOnly,
        Method::HtceNoPoSharing,
        Method::HtceNoOrthZ,
        Method::HtceNoOrthPo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Htce => "htce",
            Method::TargetOnly => "target_only",
            Method::SharedFeaturesOnly => "shared_features_only",
            Method::HtceNoPoSharing => "htce_no_po_sharing",
            Method::HtceNoOrthZ => "htce_no_orth_z",
            Method::HtceNoOrthPo => "htce_no_orth_po",
        }
    }

    /// Baseline mode, or `None` for HTCE methods.
    pub fn baseline_mode(self) -> Option<BaselineMode> {
        match self {
            Method::TargetOnly => Some(BaselineMode::TargetOnly),
            Method::SharedFeaturesOnly => Some(BaselineMode::SharedFeaturesOnly),
            _ => None,
        }
    }

    pub fn ablation(self) -> Ablation {
        match self {
            Method::HtceNoPoSharing => Ablation::NoPoSharing,
            Method::HtceNoOrthZ => Ablation::NoOrthZ,
            Method::HtceNoOrthPo => Ablation::NoOrthPo,
            _ => Ablation::Full,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown method `{s}`")))
    }
}

/// One point of a sweep: α or `N_T` as a scalar, `(κ_R, κ_T)` as a pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Scalar(f64),
    Pair([f64; 2]),
}

impl SweepValue {
    pub fn label(self) -> String {
        match self {
            SweepValue::Scalar(v) => format!("{v}"),
            SweepValue::Pair([a, b]) => format!("{a}/{b}"),
        }
    }

    pub(crate) fn seed_bits(self) -> [u64; 2] {
        match self {
            SweepValue::Scalar(v) => [v.to_bits(), 0],
            SweepValue::Pair([a, b]) => [a.to_bits(), b.to_bits().rotate_left(1) ^ 1],
        }
    }
}

/// Label of the single point of a sweep without values.
pub const DEFAULT_POINT: &str = "default";

fn default_d_full() -> usize {
    30
}
fn default_n_source() -> usize {
    3000
}
fn default_n_target() -> usize {
    300
}
fn half() -> f64 {
    0.5
}
fn one() -> f64 {
    1.0
}
fn default_noise() -> f64 {
    0.1
}
fn default_a() -> f64 {
    -10.0
}
fn default_b() -> f64 {
    10.0
}

/// Generator settings shared by every cell; the feature partition is drawn per seed
/// from `d_full` columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimTemplate {
    #[serde(default = "default_d_full")]
    pub d_full: usize,
    #[serde(default = "default_n_source")]
    pub n_source: usize,
    #[serde(default = "default_n_target")]
    pub n_target: usize,
    #[serde(default = "half")]
    pub alpha: f64,
    #[serde(default = "half")]
    pub beta: f64,
    #[serde(default = "one")]
    pub kappa_source: f64,
    #[serde(default = "one")]
    pub kappa_target: f64,
    #[serde(default = "default_noise")]
    pub noise_std: f64,
    #[serde(default = "default_a")]
    pub coefficient_param_a: f64,
    #[serde(default = "default_b")]
    pub coefficient_param_b: f64,
    #[serde(default)]
    pub coefficient_law: CoefficientLaw,
}

impl Default for SimTemplate {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl SimTemplate {
    /// Concrete generator settings at one sweep point.
    pub fn config(&self, sweep: Sweep, value: Option<SweepValue>, partition: FeaturePartition, seed: u64) -> Result<SimConfig> {
        let mut c = SimConfig::new(partition, self.n_source, self.n_target, seed);
        c.alpha = self.alpha;
        c.beta = self.beta;
        c.kappa_source = self.kappa_source;
        c.kappa_target = self.kappa_target;
        c.noise_std = self.noise_std;
        c.coefficient_param_a = self.coefficient_param_a;
        c.coefficient_param_b = self.coefficient_param_b;
        c.coefficient_law = self.coefficient_law;
        match (sweep, value) {
            (Sweep::Benchmark | Sweep::Ablation, None) => {}
            (Sweep::AlphaSweep, Some(SweepValue::Scalar(a))) => c.alpha = a,
            (Sweep::NtargetSweep, Some(SweepValue::Scalar(n))) => {
                if n.fract() != 0.0 || n < 0.0 {
                    return Err(Error::Invalid(format!("target size must be a whole number, got {n}")));
                }
                c.n_target = n as usize;
            }
            (Sweep::KappaSweep, Some(SweepValue::Pair([kr, kt]))) => {
                c.kappa_source = kr;
                c.kappa_target = kt;
            }
            (s, v) => return Err(Error::Invalid(format!("sweep value {v:?} does not fit sweep {s}"))),
        }
        c.validate()?;
        Ok(c)
    }
}

fn all_learners() -> Vec<LearnerKind> {
    LearnerKind::ALL.to_vec()
}

fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}

/// A grid of (sweep value × seed × learner × method) cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub sweep: Sweep,
    #[serde(default = "all_learners")]
    pub learners: Vec<LearnerKind>,
    /// Empty means the sweep's default methods.
    #[serde(default)]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub sim: SimTemplate,
    /// Empty means the sweep's default values.
    #[serde(default)]
    pub values: Vec<SweepValue>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Per-cell seeds replace `train.seed`.
    #[serde(default)]
    pub train: TrainConfig,
}

impl ExperimentSpec {
    pub fn new(sweep: Sweep) -> Self {
        Self {
            sweep,
            learners: all_learners(),
            methods: Vec::new(),
            sim: SimTemplate::default(),
            values: Vec::new(),
            seeds: default_seeds(),
            train: TrainConfig::default(),
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let spec: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn methods(&self) -> Vec<Method> {
        if self.methods.is_empty() {
            self.sweep.default_methods()
        } else {
            self.methods.clone()
        }
    }

    /// Sweep points; `None` stands for the template itself.
    pub fn points(&self) -> Vec<Option<SweepValue>> {
        let values = if self.values.is_empty() {
            self.sweep.default_values()
        } else {
            self.values.clone()
        };
        if values.is_empty() {
            vec![None]
        } else {
            values.into_iter().map(Some).collect()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.learners.is_empty() || self.seeds.is_empty() {
            return Err(Error::Invalid("an experiment needs at least one learner and one seed".into()));
        }
        if self.methods().is_empty() {
            return Err(Error::Invalid("an experiment needs at least one method".into()));
        }
        if matches!(self.sweep, Sweep::Benchmark | Sweep::Ablation) && !self.values.is_empty() {
            return Err(Error::Invalid(format!("sweep {} takes no values", self.sweep)));
        }
        if self.sim.d_full < 15 {
            return Err(Error::Invalid(format!("d_full must be at least 15, got {}", self.sim.d_full)));
        }
        let probe = FeaturePartition::contiguous(5, 5, 5)?;
        for p in self.points() {
            self.sim.config(self.sweep, p, probe.clone(), 0)?;
        }
        self.train.validate()
    }
}

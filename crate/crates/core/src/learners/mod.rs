//! The seven online learners behind one round protocol: receive an instance,
//! predict, receive the true label, update.

mod hybrid;
mod version_space;
mod wm;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{FiniteHypothesisClass, Instance, Label, Sequence};

pub use hybrid::{HybridState, Phase, SwitchEvent};
pub use version_space::{
    consistent_step, halving_step, soa_step, RealizableEngine, VersionSpaceLearner,
};
pub use wm::{EtaVariant, WmState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Prediction {
    Deterministic {
        label: Label,
    },
    /// Predict 1 with probability `p_hat`.
    Randomized {
        p_hat: f64,
    },
}

impl Prediction {
    pub fn label(self) -> Option<Label> {
        match self {
            Prediction::Deterministic { label } => Some(label),
            Prediction::Randomized { .. } => None,
        }
    }

    /// Probability of predicting 1.
    pub fn p_one(self) -> f64 {
        match self {
            Prediction::Deterministic { label } => label.bit() as f64,
            Prediction::Randomized { p_hat } => p_hat,
        }
    }
}

pub trait OnlineLearner {
    fn predict(&mut self, x: Instance) -> Result<Prediction>;

    /// Reveals the label of the instance just predicted and updates the state.
    /// Returns the probability that the prediction was a mistake, computed from
    /// the state before the update.
    fn update(&mut self, x: Instance, y: Label) -> Result<f64>;
}

/// Weighted Majority over the whole class, advice taken from the class table.
#[derive(Debug)]
pub struct WmLearner<'a> {
    class: &'a FiniteHypothesisClass,
    state: WmState,
}

impl<'a> WmLearner<'a> {
    pub fn new(class: &'a FiniteHypothesisClass, horizon: usize, variant: EtaVariant) -> Self {
        WmLearner {
            class,
            state: WmState::new(class.size(), horizon, variant),
        }
    }

    pub fn state(&self) -> &WmState {
        &self.state
    }
}

impl OnlineLearner for WmLearner<'_> {
    fn predict(&mut self, x: Instance) -> Result<Prediction> {
        self.state.step(&self.class.advice(x)?)
    }

    fn update(&mut self, x: Instance, y: Label) -> Result<f64> {
        let advice = self.class.advice(x)?;
        let err = self.state.expected_error(&advice, y)?;
        self.state.update(&advice, y)?;
        Ok(err)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Consistent,
    Halving,
    Soa,
    Wm,
    WmConsistent,
    WmHalving,
    WmSoa,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 7] = [
        LearnerKind::Consistent,
        LearnerKind::Halving,
        LearnerKind::Soa,
        LearnerKind::Wm,
        LearnerKind::WmConsistent,
        LearnerKind::WmHalving,
        LearnerKind::WmSoa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Consistent => "consistent",
            LearnerKind::Halving => "halving",
            LearnerKind::Soa => "soa",
            LearnerKind::Wm => "wm",
            LearnerKind::WmConsistent => "wm_consistent",
            LearnerKind::WmHalving => "wm_halving",
            LearnerKind::WmSoa => "wm_soa",
        }
    }

    /// Human-facing label as used in result tables (`WM_Halving`).
    pub fn display_name(self) -> &'static str {
        match self {
            LearnerKind::Consistent => "Consistent",
            LearnerKind::Halving => "Halving",
            LearnerKind::Soa => "SOA",
            LearnerKind::Wm => "WM",
            LearnerKind::WmConsistent => "WM_Consistent",
            LearnerKind::WmHalving => "WM_Halving",
            LearnerKind::WmSoa => "WM_SOA",
        }
    }

    /// The version-space engine, for baselines and hybrids.
    pub fn engine(self) -> Option<RealizableEngine> {
        match self {
            LearnerKind::Consistent | LearnerKind::WmConsistent => {
                Some(RealizableEngine::Consistent)
            }
            LearnerKind::Halving | LearnerKind::WmHalving => Some(RealizableEngine::Halving),
            LearnerKind::Soa | LearnerKind::WmSoa => Some(RealizableEngine::Soa),
            LearnerKind::Wm => None,
        }
    }

    pub fn is_hybrid(self) -> bool {
        matches!(
            self,
            LearnerKind::WmConsistent | LearnerKind::WmHalving | LearnerKind::WmSoa
        )
    }

    /// Baselines that only handle realizable sequences.
    pub fn requires_realizable(self) -> bool {
        matches!(
            self,
            LearnerKind::Consistent | LearnerKind::Halving | LearnerKind::Soa
        )
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        LearnerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown learner `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub kind: LearnerKind,
    #[serde(default)]
    pub eta: EtaVariant,
}

impl LearnerConfig {
    pub fn new(kind: LearnerKind) -> Self {
        LearnerConfig {
            kind,
            eta: EtaVariant::default(),
        }
    }

    pub fn with_eta(kind: LearnerKind, eta: EtaVariant) -> Self {
        LearnerConfig { kind, eta }
    }
}

/// A fresh learner of any kind.
#[derive(Debug)]
pub enum Learner<'a> {
    Baseline(VersionSpaceLearner<'a>),
    Wm(WmLearner<'a>),
    Hybrid(HybridState<'a>),
}

impl<'a> Learner<'a> {
    pub fn new(config: LearnerConfig, class: &'a FiniteHypothesisClass, horizon: usize) -> Self {
        match (config.kind, config.kind.engine()) {
            (LearnerKind::Wm, _) => Learner::Wm(WmLearner::new(class, horizon, config.eta)),
            (kind, Some(engine)) if kind.is_hybrid() => {
                Learner::Hybrid(HybridState::new(engine, class, horizon, config.eta))
            }
            (_, Some(engine)) => Learner::Baseline(VersionSpaceLearner::new(engine, class)),
            (_, None) => unreachable!("every non-WM learner has an engine"),
        }
    }

    pub fn switch(&self) -> Option<SwitchEvent> {
        match self {
            Learner::Hybrid(h) => h.switch(),
            _ => None,
        }
    }
}

impl OnlineLearner for Learner<'_> {
    fn predict(&mut self, x: Instance) -> Result<Prediction> {
        match self {
            Learner::Baseline(l) => l.predict(x),
            Learner::Wm(l) => l.predict(x),
            Learner::Hybrid(l) => l.predict(x),
        }
    }

    fn update(&mut self, x: Instance, y: Label) -> Result<f64> {
        match self {
            Learner::Baseline(l) => l.update(x, y),
            Learner::Wm(l) => l.update(x, y),
            Learner::Hybrid(l) => l.update(x, y),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum RunMode {
    /// Accumulate per-round mistake probabilities; no randomness.
    Analytic,
    /// Additionally draw `trials` independent realizations of every randomized
    /// prediction from a ChaCha8 generator seeded with `seed`.
    Sampled { seed: u64, trials: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: usize,
    pub x: Instance,
    pub y: Label,
    pub prediction: Prediction,
    pub mistake_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledMistakes {
    pub trials: usize,
    pub mean: f64,
    /// Standard error of `mean` (sample standard deviation over `sqrt(trials)`).
    pub std_err: f64,
    pub max: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub rounds: Vec<RoundRecord>,
    /// Sum of per-round mistake probabilities.
    pub expected_mistakes: f64,
    /// Mistakes on rounds with a deterministic prediction.
    pub deterministic_mistakes: u64,
    pub switch: Option<SwitchEvent>,
    pub sampled: Option<SampledMistakes>,
}

impl RunTrace {
    /// One JSON object per round.
    pub fn to_jsonl(&self) -> String {
        self.rounds
            .iter()
            .map(|r| serde_json::to_string(r).expect("round record serializes") + "\n")
            .collect()
    }
}

/// Plays `seq` against a fresh learner.
pub fn run(
    config: LearnerConfig,
    class: &FiniteHypothesisClass,
    seq: &Sequence,
    mode: RunMode,
) -> Result<RunTrace> {
    let mut learner = Learner::new(config, class, seq.len());
    let (mut rng, trials) = match mode {
        RunMode::Analytic => (None, 0),
        RunMode::Sampled { seed, trials } => {
            if trials == 0 {
                return Err(Error::InvalidCase(
                    "sampled mode needs at least one trial".into(),
                ));
            }
            (Some(ChaCha8Rng::seed_from_u64(seed)), trials)
        }
    };
    let mut per_trial = vec![0u64; trials];

    let mut rounds = Vec::with_capacity(seq.len());
    let mut expected = 0.0;
    let mut deterministic = 0;
    for (t, ex) in seq.iter().enumerate() {
        let prediction = learner.predict(ex.x)?;
        let mistake_prob = learner.update(ex.x, ex.y).map_err(|e| match e {
            Error::VersionSpaceExhausted { .. } => Error::VersionSpaceExhausted { round: t + 1 },
            e => e,
        })?;
        expected += mistake_prob;
        if let Prediction::Deterministic { label } = prediction {
            if label != ex.y {
                deterministic += 1;
            }
        }
        if let Some(rng) = rng.as_mut() {
            match prediction {
                Prediction::Deterministic { label } => {
                    if label != ex.y {
                        per_trial.iter_mut().for_each(|m| *m += 1);
                    }
                }
                Prediction::Randomized { p_hat } => {
                    for m in per_trial.iter_mut() {
                        let y_hat = Label::from(rng.gen::<f64>() < p_hat);
                        if y_hat != ex.y {
                            *m += 1;
                        }
                    }
                }
            }
        }
        rounds.push(RoundRecord {
            t: t + 1,
            x: ex.x,
            y: ex.y,
            prediction,
            mistake_prob,
        });
    }

    let sampled = (trials > 0).then(|| summarize(&per_trial));
    Ok(RunTrace {
        rounds,
        expected_mistakes: expected,
        deterministic_mistakes: deterministic,
        switch: learner.switch(),
        sampled,
    })
}

fn summarize(counts: &[u64]) -> SampledMistakes {
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<u64>() as f64 / n;
    let var = if counts.len() > 1 {
        counts
            .iter()
            .map(|&c| (c as f64 - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    SampledMistakes {
        trials: counts.len(),
        mean,
        std_err: (var / n).sqrt(),
        max: counts.iter().copied().max().unwrap_or(0),
    }
}

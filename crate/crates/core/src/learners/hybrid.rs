//! WM_Consistent, WM_Halving and WM_SOA.
//!
//! A hybrid predicts with its version-space engine while the version space is
//! non-empty and keeps every hypothesis' mistake count up to date the whole time.
//! On the round that empties the version space it switches, once and for good, to
//! Weighted Majority seeded with those counts. The learning rate is fixed from the
//! full horizon at construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{FiniteHypothesisClass, Instance, Label, VersionSpace};
use crate::ldim::LdimSolver;
use crate::learners::version_space::{engine_step, RealizableEngine};
use crate::learners::wm::{EtaVariant, WmState};
use crate::learners::{OnlineLearner, Prediction};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Phase {
    Realizable(VersionSpace),
    Agnostic,
}

/// Where the realizable phase ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchEvent {
    /// 1-based round whose feedback emptied the version space.
    pub round: usize,
    /// Smallest per-hypothesis mistake count at that moment.
    pub min_mistakes: u64,
}

#[derive(Debug)]
pub struct HybridState<'a> {
    engine: RealizableEngine,
    class: &'a FiniteHypothesisClass,
    phase: Phase,
    wm: WmState,
    solver: Option<LdimSolver<'a>>,
    last: Option<(Instance, Prediction)>,
    round: usize,
    switch: Option<SwitchEvent>,
}

impl<'a> HybridState<'a> {
    pub fn new(
        engine: RealizableEngine,
        class: &'a FiniteHypothesisClass,
        horizon: usize,
        variant: EtaVariant,
    ) -> Self {
        HybridState {
            engine,
            class,
            phase: Phase::Realizable(VersionSpace::full(class.size())),
            wm: WmState::new(class.size(), horizon, variant),
            solver: None,
            last: None,
            round: 0,
            switch: None,
        }
    }

    pub fn phase(&self) -> &Phase {
        &self.phase
    }

    pub fn wm(&self) -> &WmState {
        &self.wm
    }

    pub fn switch(&self) -> Option<SwitchEvent> {
        self.switch
    }

    /// The engine's prediction; only valid before the switch.
    pub fn realizable_step(&mut self, x: Instance) -> Result<Prediction> {
        match &self.phase {
            Phase::Realizable(space) => {
                engine_step(self.engine, space, self.class, x, &mut self.solver)
            }
            Phase::Agnostic => Err(Error::WrongPhase),
        }
    }
}

impl OnlineLearner for HybridState<'_> {
    fn predict(&mut self, x: Instance) -> Result<Prediction> {
        let p = match self.phase {
            Phase::Realizable(_) => self.realizable_step(x)?,
            Phase::Agnostic => self.wm.step(&self.class.advice(x)?)?,
        };
        self.last = Some((x, p));
        Ok(p)
    }

    fn update(&mut self, x: Instance, y: Label) -> Result<f64> {
        let predicted = match self.last.take() {
            Some((px, p)) if px == x => p,
            _ => self.predict(x)?,
        };
        let advice = self.class.advice(x)?;
        let mistake_prob = match predicted {
            Prediction::Deterministic { label } => (label != y) as u8 as f64,
            Prediction::Randomized { .. } => self.wm.expected_error(&advice, y)?,
        };
        self.round += 1;
        self.wm.update(&advice, y)?;
        if let Phase::Realizable(space) = &self.phase {
            let next = space.restrict(self.class, x, y)?;
            if next.is_empty() {
                self.phase = Phase::Agnostic;
                self.switch = Some(SwitchEvent {
                    round: self.round,
                    min_mistakes: self.wm.mistakes().min().unwrap_or(0),
                });
            } else {
                self.phase = Phase::Realizable(next);
            }
        }
        Ok(mistake_prob)
    }
}

//! Consistent, Halving and SOA: deterministic learners that predict from the
//! current version space and discard every hypothesis that errs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{FiniteHypothesisClass, Instance, Label, VersionSpace};
use crate::ldim::LdimSolver;
use crate::learners::{OnlineLearner, Prediction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RealizableEngine {
    Consistent,
    Halving,
    Soa,
}

/// Label of the lowest-indexed member.
pub fn consistent_step(
    space: &VersionSpace,
    class: &FiniteHypothesisClass,
    x: Instance,
) -> Result<Prediction> {
    let first = space.first().ok_or(Error::EmptyVersionSpace)?;
    Ok(Prediction::Deterministic {
        label: class.evaluate(first, x)?,
    })
}

/// Majority vote of the members; ties go to 1.
pub fn halving_step(
    space: &VersionSpace,
    class: &FiniteHypothesisClass,
    x: Instance,
) -> Result<Prediction> {
    if space.is_empty() {
        return Err(Error::EmptyVersionSpace);
    }
    let ones = space.bits().intersection_count(class.ones_at(x)?);
    let zeros = space.len() - ones;
    Ok(Prediction::Deterministic {
        label: Label::from(ones >= zeros),
    })
}

/// The side of the split at `x` with the larger Ldim; an empty side counts as
/// -1 and ties go to 1.
pub fn soa_step(
    space: &VersionSpace,
    class: &FiniteHypothesisClass,
    x: Instance,
    solver: &mut LdimSolver<'_>,
) -> Result<Prediction> {
    if space.is_empty() {
        return Err(Error::EmptyVersionSpace);
    }
    let (zeros, ones) = space.split(class, x)?;
    let l0 = solver.value_or_neg(&zeros);
    let l1 = solver.value_or_neg(&ones);
    Ok(Prediction::Deterministic {
        label: Label::from(l1 >= l0),
    })
}

/// Shared predict dispatch for baseline and hybrid learners.
pub(crate) fn engine_step<'a>(
    engine: RealizableEngine,
    space: &VersionSpace,
    class: &'a FiniteHypothesisClass,
    x: Instance,
    solver: &mut Option<LdimSolver<'a>>,
) -> Result<Prediction> {
    match engine {
        RealizableEngine::Consistent => consistent_step(space, class, x),
        RealizableEngine::Halving => halving_step(space, class, x),
        RealizableEngine::Soa => {
            let solver = solver.get_or_insert_with(|| LdimSolver::new(class));
            soa_step(space, class, x, solver)
        }
    }
}

/// A baseline learner running one engine for the whole sequence. The sequence
/// must be realizable: emptying the version space is an error.
#[derive(Debug)]
pub struct VersionSpaceLearner<'a> {
    engine: RealizableEngine,
    class: &'a FiniteHypothesisClass,
    space: VersionSpace,
    solver: Option<LdimSolver<'a>>,
    last: Option<(Instance, Label)>,
    round: usize,
}

impl<'a> VersionSpaceLearner<'a> {
    pub fn new(engine: RealizableEngine, class: &'a FiniteHypothesisClass) -> Self {
        VersionSpaceLearner {
            engine,
            class,
            space: VersionSpace::full(class.size()),
            solver: None,
            last: None,
            round: 0,
        }
    }

    pub fn version_space(&self) -> &VersionSpace {
        &self.space
    }

    pub fn engine(&self) -> RealizableEngine {
        self.engine
    }
}

impl OnlineLearner for VersionSpaceLearner<'_> {
    fn predict(&mut self, x: Instance) -> Result<Prediction> {
        let p = engine_step(self.engine, &self.space, self.class, x, &mut self.solver)?;
        if let Prediction::Deterministic { label } = p {
            self.last = Some((x, label));
        }
        Ok(p)
    }

    fn update(&mut self, x: Instance, y: Label) -> Result<f64> {
        let predicted = match self.last.take() {
            Some((px, label)) if px == x => label,
            _ => self
                .predict(x)?
                .label()
                .expect("version-space learners are deterministic"),
        };
        self.round += 1;
        self.space = self.space.restrict(self.class, x, y)?;
        if self.space.is_empty() {
            return Err(Error::VersionSpaceExhausted { round: self.round });
        }
        Ok(if predicted == y { 0.0 } else { 1.0 })
    }
}

//! Online binary classification over finite hypothesis classes: version-space
//! learners, Weighted Majority, the hybrids that switch between them, exact
//! Littlestone dimension, and a permutation experiment harness.

pub mod error;
pub mod experiments;
pub mod hypothesis;
pub mod ldim;
pub mod learners;
pub mod sequences;

pub use error::{Error, Result};
pub use experiments::{
    check_bounds, emit_report, evaluate, evaluate_runs, parse_json_report, BoundVerdict,
    PermutationOutcome, PermutationReport, ReportEntry, ReportFormat, SampledSummary,
};
pub use hypothesis::{
    best_mistakes, mistake_profile, BestMistakes, ClassDocument, FiniteHypothesisClass, Instance,
    Label, LabeledExample, MistakeVector, Sequence, VersionSpace,
};
pub use ldim::{ldim, ldim_with_cap, ldim_witness_check, LdimResult, LdimSolver, ShatteredTree};
pub use learners::{
    run, EtaVariant, HybridState, Learner, LearnerConfig, LearnerKind, OnlineLearner, Phase,
    Prediction, RealizableEngine, RoundRecord, RunMode, RunTrace, SampledMistakes, SwitchEvent,
    VersionSpaceLearner, WmLearner, WmState,
};
pub use sequences::{
    derive_seed, label_sequence, make_domain, make_threshold_class, stream_rng, CaseKind,
    ExperimentCase, PermutationSource, PermutationStream,
};

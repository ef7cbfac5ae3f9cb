//! Fixtures shared by the benchmarks.

use regretlab::{
    label_sequence, make_domain, make_threshold_class, CaseKind, ExperimentCase,
    FiniteHypothesisClass, Sequence,
};

/// The threshold class and labelled sequence for `(kind, T, d)`.
pub fn threshold_case(
    kind: CaseKind,
    horizon: usize,
    d: usize,
) -> (FiniteHypothesisClass, Sequence) {
    let case = ExperimentCase::new(kind, horizon, d).expect("valid case");
    let domain = make_domain(horizon);
    let class = make_threshold_class(d, &domain).expect("valid class");
    (class, label_sequence(&case, &domain))
}

//! Permutation experiments: replay a learner on every ordering of a sequence,
//! aggregate mistakes and regret, check the theoretical bounds and render
//! reports.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{best_mistakes, mistake_profile, FiniteHypothesisClass, VersionSpace};
use crate::ldim::LdimSolver;
use crate::learners::{
    run, EtaVariant, LearnerConfig, LearnerKind, RunMode, SampledMistakes, SwitchEvent,
};
use crate::sequences::{derive_seed, CaseKind, PermutationStream};

/// Tolerance added to every bound before comparing.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// What one learner did on one permutation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationOutcome {
    pub expected_mistakes: f64,
    pub switch: Option<SwitchEvent>,
    pub sampled: Option<SampledMistakes>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSummary {
    /// Trials per permutation.
    pub trials: usize,
    /// Mean over permutations of the per-permutation sampled mean.
    pub mean: f64,
    /// Largest realized mistake count over all trials and permutations.
    pub max: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationReport {
    pub learner: LearnerKind,
    pub eta: EtaVariant,
    pub case: CaseKind,
    #[serde(rename = "T")]
    pub horizon: usize,
    /// Number of hypotheses, `|H|`.
    pub hypotheses: usize,
    pub permutations: usize,
    /// `M(h*)`, the same for every ordering.
    pub best_mistakes: u64,
    /// Mean over permutations of the analytic expected mistakes.
    pub expected_mistakes: f64,
    /// Max over permutations of the analytic expected mistakes.
    pub max_mistakes: f64,
    pub expected_regret: f64,
    /// Permutations on which a hybrid left its realizable phase.
    pub switches: usize,
    /// Smallest `min_i M_i` recorded at a switch, if any switch happened.
    pub min_switch_mistakes: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampled: Option<SampledSummary>,
}

impl PermutationReport {
    /// Aggregates per-permutation outcomes in the order given.
    pub fn from_outcomes(
        config: LearnerConfig,
        case: CaseKind,
        horizon: usize,
        hypotheses: usize,
        best: u64,
        outcomes: &[PermutationOutcome],
    ) -> Self {
        let n = outcomes.len();
        let total: f64 = outcomes.iter().map(|o| o.expected_mistakes).sum();
        let expected = if n == 0 { 0.0 } else { total / n as f64 };
        let max = outcomes
            .iter()
            .map(|o| o.expected_mistakes)
            .fold(0.0, f64::max);
        let switches: Vec<SwitchEvent> = outcomes.iter().filter_map(|o| o.switch).collect();
        let sampled = outcomes
            .first()
            .and_then(|o| o.sampled.as_ref())
            .map(|first| SampledSummary {
                trials: first.trials,
                mean: outcomes
                    .iter()
                    .filter_map(|o| o.sampled.as_ref())
                    .map(|s| s.mean)
                    .sum::<f64>()
                    / n as f64,
                max: outcomes
                    .iter()
                    .filter_map(|o| o.sampled.as_ref())
                    .map(|s| s.max)
                    .max()
                    .unwrap_or(0),
            });
        PermutationReport {
            learner: config.kind,
            eta: config.eta,
            case,
            horizon,
            hypotheses,
            permutations: n,
            best_mistakes: best,
            expected_mistakes: expected,
            max_mistakes: max,
            expected_regret: expected - best as f64,
            switches: switches.len(),
            min_switch_mistakes: switches.iter().map(|s| s.min_mistakes).min(),
            sampled,
        }
    }

    /// Largest per-permutation regret.
    pub fn max_regret(&self) -> f64 {
        self.max_mistakes - self.best_mistakes as f64
    }
}

/// Runs a fresh learner on every permutation of `stream`, in parallel, and
/// returns the outcomes in permutation order. In sampled mode permutation `k`
/// draws from `derive_seed(seed, k)`.
pub fn evaluate_runs(
    config: LearnerConfig,
    class: &FiniteHypothesisClass,
    stream: &PermutationStream,
    mode: RunMode,
) -> Result<Vec<PermutationOutcome>> {
    (0..stream.len())
        .into_par_iter()
        .map(|k| {
            let mode = match mode {
                RunMode::Analytic => RunMode::Analytic,
                RunMode::Sampled { seed, trials } => RunMode::Sampled {
                    seed: derive_seed(seed, k as u64),
                    trials,
                },
            };
            let trace = run(config, class, &stream.get(k), mode)?;
            Ok(PermutationOutcome {
                expected_mistakes: trace.expected_mistakes,
                switch: trace.switch,
                sampled: trace.sampled,
            })
        })
        .collect()
}

pub fn evaluate(
    config: LearnerConfig,
    case: CaseKind,
    class: &FiniteHypothesisClass,
    stream: &PermutationStream,
    mode: RunMode,
) -> Result<PermutationReport> {
    let best = best_mistakes(&mistake_profile(class, stream.base())?).count;
    if case == CaseKind::Realizable && best > 0 {
        return Err(Error::InvalidCase(format!(
            "sequence declared realizable but the best hypothesis makes {best} mistakes"
        )));
    }
    if config.kind.requires_realizable() && best > 0 {
        return Err(Error::InvalidCase(format!(
            "{} needs a realizable sequence",
            config.kind.display_name()
        )));
    }
    let outcomes = evaluate_runs(config, class, stream, mode)?;
    Ok(PermutationReport::from_outcomes(
        config,
        case,
        stream.base().len(),
        class.size(),
        best,
        &outcomes,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundVerdict {
    pub name: String,
    pub bound: f64,
    pub observed: f64,
    pub pass: bool,
}

impl BoundVerdict {
    pub fn new(name: impl Into<String>, bound: f64, observed: f64) -> Self {
        BoundVerdict {
            name: name.into(),
            bound,
            observed,
            pass: observed <= bound + BOUND_TOLERANCE,
        }
    }
}

/// `sqrt(0.5 ln(d) T)`.
pub fn wm_regret_bound(d: usize, horizon: usize) -> f64 {
    (0.5 * (d as f64).ln() * horizon as f64).sqrt()
}

/// `B + sqrt(0.5 ln(d) (T - B))` for a hybrid whose engine makes at most `B`
/// mistakes while its version space is non-empty.
pub fn hybrid_regret_bound(engine_bound: f64, d: usize, horizon: usize) -> f64 {
    let rest = (horizon as f64 - engine_bound).max(0.0);
    engine_bound + (0.5 * (d as f64).ln() * rest).sqrt()
}

/// Realizable mistake bound of a learner's version-space engine.
pub fn mistake_bound(kind: LearnerKind, class: &FiniteHypothesisClass) -> Option<u64> {
    use crate::learners::RealizableEngine::*;
    let d = class.size();
    kind.engine().map(|engine| match engine {
        Consistent => d as u64 - 1,
        Halving => (usize::BITS - 1 - d.leading_zeros()) as u64,
        Soa => class_ldim(class) as u64,
    })
}

fn class_ldim(class: &FiniteHypothesisClass) -> u32 {
    LdimSolver::new(class)
        .value(&VersionSpace::full(class.size()))
        .expect("classes are non-empty")
}

/// Realizable reports are checked against the engine's mistake bound (WM has
/// none and gets its regret bound instead); unrealizable reports against the
/// regret bound. Observed values are maxima over permutations.
pub fn check_bounds(
    report: &PermutationReport,
    class: &FiniteHypothesisClass,
) -> Vec<BoundVerdict> {
    let d = class.size();
    let t = report.horizon;
    let kind = report.learner;
    let mut out = Vec::new();
    match (report.case, kind.engine()) {
        (CaseKind::Realizable, Some(_)) => {
            let bound = mistake_bound(kind, class).expect("engine present") as f64;
            out.push(BoundVerdict::new(
                format!("{}_mistakes", kind.name()),
                bound,
                report.max_mistakes,
            ));
        }
        (_, None) => out.push(BoundVerdict::new(
            "wm_regret",
            wm_regret_bound(d, t),
            report.max_regret(),
        )),
        (CaseKind::Unrealizable, Some(engine)) => {
            use crate::learners::RealizableEngine::*;
            let b = match engine {
                Consistent => d as f64,
                Halving => (d as f64).log2(),
                Soa => class_ldim(class) as f64,
            };
            out.push(BoundVerdict::new(
                format!("{}_regret", kind.name()),
                hybrid_regret_bound(b, d, t),
                report.max_regret(),
            ));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub report: PermutationReport,
    pub verdicts: Vec<BoundVerdict>,
}

impl ReportEntry {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema: u32,
    pub reports: Vec<ReportEntry>,
}

pub fn emit_report(entries: &[ReportEntry], format: ReportFormat) -> Result<String> {
    if entries.is_empty() {
        return Err(Error::EmptyReport);
    }
    Ok(match format {
        ReportFormat::Csv => to_csv(entries),
        ReportFormat::Json => {
            let doc = ReportDocument {
                schema: REPORT_SCHEMA,
                reports: entries.to_vec(),
            };
            let mut s = serde_json::to_string_pretty(&doc)
                .map_err(|e| Error::Serialization(e.to_string()))?;
            s.push('\n');
            s
        }
        ReportFormat::Markdown => to_markdown(entries),
    })
}

pub fn parse_json_report(text: &str) -> Result<Vec<ReportEntry>> {
    let doc: ReportDocument =
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
    if doc.schema != REPORT_SCHEMA {
        return Err(Error::Serialization(format!(
            "unsupported schema {}",
            doc.schema
        )));
    }
    Ok(doc.reports)
}

fn bounds_cell(verdicts: &[BoundVerdict]) -> String {
    if verdicts.is_empty() {
        return "unchecked".into();
    }
    verdicts
        .iter()
        .map(|v| {
            format!(
                "{}:{:.4}<={:.4}:{}",
                v.name,
                v.observed,
                v.bound,
                if v.pass { "pass" } else { "FAIL" }
            )
        })
        .collect::<Vec<_>>()
        .join(";")
}

fn to_csv(entries: &[ReportEntry]) -> String {
    let sampled = entries.iter().all(|e| e.report.sampled.is_some());
    let mut out = String::from(
        "learner,case,eta,T,permutations,|H|,M(h*),expected_mistakes,max_mistakes,expected_regret,bounds",
    );
    if sampled {
        out.push_str(",sampled_trials,sampled_mean,sampled_max");
    }
    out.push('\n');
    for e in entries {
        let r = &e.report;
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{}",
            r.learner.display_name(),
            r.case,
            r.eta,
            r.horizon,
            r.permutations,
            r.hypotheses,
            r.best_mistakes,
            r.expected_mistakes,
            r.max_mistakes,
            r.expected_regret,
            bounds_cell(&e.verdicts),
        );
        if let (true, Some(s)) = (sampled, &r.sampled) {
            let _ = write!(out, ",{},{:.6},{}", s.trials, s.mean, s.max);
        }
        out.push('\n');
    }
    out
}

fn num(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

// One row per (T, permutations, |H|, M(h*)) group with the learners side by
// side, followed by the bound checks. Diff columns compare the first learner
// of the row with each of the others.
fn to_markdown(entries: &[ReportEntry]) -> String {
    let mut groups: Vec<Vec<&ReportEntry>> = Vec::new();
    for e in entries {
        let key = |x: &ReportEntry| {
            (
                x.report.case,
                x.report.horizon,
                x.report.permutations,
                x.report.hypotheses,
                x.report.best_mistakes,
            )
        };
        match groups.iter_mut().find(|g| key(g[0]) == key(e)) {
            Some(g) => g.push(e),
            None => groups.push(vec![e]),
        }
    }

    let mut out = String::new();
    for group in &groups {
        let realizable = group[0].report.case == CaseKind::Realizable;
        let mut header = vec![
            "T".to_string(),
            "Permutations".into(),
            "|H|".into(),
            "M(h*)".into(),
        ];
        let mut row = vec![
            group[0].report.horizon.to_string(),
            group[0].report.permutations.to_string(),
            group[0].report.hypotheses.to_string(),
            group[0].report.best_mistakes.to_string(),
        ];
        for (i, e) in group.iter().enumerate() {
            let name = e.report.learner.display_name();
            let n = i + 1;
            if realizable {
                header.push(format!("{name} expected mistakes"));
                header.push(format!("{name} max mistakes ({n})"));
                row.push(num(e.report.expected_mistakes));
                row.push(num(e.report.max_mistakes));
            } else {
                header.push(format!("{name} expected regret ({n})"));
                row.push(num(e.report.expected_regret));
            }
        }
        let key = |e: &ReportEntry| {
            if realizable {
                e.report.max_mistakes
            } else {
                e.report.expected_regret
            }
        };
        for (i, e) in group.iter().enumerate().skip(1) {
            header.push(format!("Diff (1) - ({})", i + 1));
            row.push(num(key(group[0]) - key(e)));
        }
        let _ = writeln!(out, "| {} |", header.join(" | "));
        let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
        let _ = writeln!(out, "| {} |", row.join(" | "));
        out.push('\n');
    }

    out.push_str("| Learner | Bound | Observed | Limit | Result |\n|---|---|---|---|---|\n");
    for e in entries {
        for v in &e.verdicts {
            let _ = writeln!(
                out,
                "| {} | {} | {:.4} | {:.4} | {} |",
                e.report.learner.display_name(),
                v.name,
                v.observed,
                v.bound,
                if v.pass { "pass" } else { "FAIL" }
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{
        label_sequence, make_domain, make_threshold_class, ExperimentCase, PermutationSource,
    };

    fn setup(kind: CaseKind, t: usize, d: usize) -> (FiniteHypothesisClass, PermutationStream) {
        let domain = make_domain(t);
        let class = make_threshold_class(d, &domain).unwrap();
        let seq = label_sequence(&ExperimentCase::new(kind, t, d).unwrap(), &domain);
        (
            class,
            PermutationStream::new(PermutationSource::Exhaustive, seq).unwrap(),
        )
    }

    fn entry(kind: LearnerKind, case: CaseKind) -> ReportEntry {
        let (class, stream) = setup(case, 5, 3);
        let report = evaluate(
            LearnerConfig::new(kind),
            case,
            &class,
            &stream,
            RunMode::Analytic,
        )
        .unwrap();
        let verdicts = check_bounds(&report, &class);
        ReportEntry { report, verdicts }
    }

    #[test]
    fn aggregation_matches_resummation() {
        let (class, stream) = setup(CaseKind::Unrealizable, 6, 3);
        let cfg = LearnerConfig::new(LearnerKind::Wm);
        let report = evaluate(
            cfg,
            CaseKind::Unrealizable,
            &class,
            &stream,
            RunMode::Analytic,
        )
        .unwrap();
        let mut total = 0.0;
        let mut max: f64 = 0.0;
        for seq in stream.iter() {
            let m = run(cfg, &class, &seq, RunMode::Analytic)
                .unwrap()
                .expected_mistakes;
            total += m;
            max = max.max(m);
        }
        assert_eq!(report.permutations, 720);
        assert_eq!(report.expected_mistakes, total / 720.0);
        assert_eq!(report.max_mistakes, max);
        assert_eq!(
            report.expected_regret + report.best_mistakes as f64,
            report.expected_mistakes
        );
        assert!(report.max_mistakes >= report.expected_mistakes);
    }

    #[test]
    fn analytic_evaluation_is_reproducible() {
        let (class, stream) = setup(CaseKind::Realizable, 7, 4);
        let cfg = LearnerConfig::new(LearnerKind::WmSoa);
        let a = evaluate(
            cfg,
            CaseKind::Realizable,
            &class,
            &stream,
            RunMode::Analytic,
        )
        .unwrap();
        let b = evaluate(
            cfg,
            CaseKind::Realizable,
            &class,
            &stream,
            RunMode::Analytic,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn singleton_class_makes_no_mistakes() {
        let (class, stream) = setup(CaseKind::Realizable, 1, 1);
        for kind in LearnerKind::ALL {
            let r = evaluate(
                LearnerConfig::new(kind),
                CaseKind::Realizable,
                &class,
                &stream,
                RunMode::Analytic,
            )
            .unwrap();
            assert_eq!(r.expected_mistakes, 0.0);
        }
    }

    #[test]
    fn misdeclared_and_baseline_cases_are_rejected() {
        let (class, stream) = setup(CaseKind::Unrealizable, 4, 2);
        let cfg = LearnerConfig::new(LearnerKind::Wm);
        assert!(matches!(
            evaluate(
                cfg,
                CaseKind::Realizable,
                &class,
                &stream,
                RunMode::Analytic
            ),
            Err(Error::InvalidCase(_))
        ));
        let cfg = LearnerConfig::new(LearnerKind::Halving);
        assert!(matches!(
            evaluate(
                cfg,
                CaseKind::Unrealizable,
                &class,
                &stream,
                RunMode::Analytic
            ),
            Err(Error::InvalidCase(_))
        ));
    }

    #[test]
    fn bound_values() {
        assert!((wm_regret_bound(500, 1000) - 55.74).abs() < 0.01);
        assert_eq!(hybrid_regret_bound(10.0, 4, 5), 10.0);
        let v = BoundVerdict::new("x", 2.0, 2.0 + 1e-10);
        assert!(v.pass);
        assert!(!BoundVerdict::new("x", 2.0, 2.0 + 1e-8).pass);

        let domain = make_domain(1000);
        let class = make_threshold_class(500, &domain).unwrap();
        assert_eq!(mistake_bound(LearnerKind::WmHalving, &class), Some(8));
        assert_eq!(mistake_bound(LearnerKind::Consistent, &class), Some(499));
        assert_eq!(mistake_bound(LearnerKind::Soa, &class), Some(8));
        assert_eq!(mistake_bound(LearnerKind::Wm, &class), None);
    }

    #[test]
    fn zero_length_case_passes_trivially() {
        let class = make_threshold_class(3, &make_domain(4)).unwrap();
        let stream =
            PermutationStream::new(PermutationSource::Exhaustive, Default::default()).unwrap();
        for kind in LearnerKind::ALL {
            let r = evaluate(
                LearnerConfig::new(kind),
                CaseKind::Realizable,
                &class,
                &stream,
                RunMode::Analytic,
            )
            .unwrap();
            for v in check_bounds(&r, &class) {
                assert_eq!(v.observed, 0.0);
                assert!(v.pass, "{v:?}");
            }
        }
    }

    #[test]
    fn verdict_selection_by_case() {
        let e = entry(LearnerKind::Halving, CaseKind::Realizable);
        assert_eq!(e.verdicts.len(), 1);
        assert_eq!(e.verdicts[0].name, "halving_mistakes");
        assert_eq!(e.verdicts[0].bound, 1.0);
        let e = entry(LearnerKind::WmHalving, CaseKind::Unrealizable);
        assert_eq!(e.verdicts[0].name, "wm_halving_regret");
        let e = entry(LearnerKind::Wm, CaseKind::Realizable);
        assert_eq!(e.verdicts[0].name, "wm_regret");
        assert!(e.all_pass());
    }

    #[test]
    fn csv_has_header_and_no_blank_cells() {
        let entries = vec![
            entry(LearnerKind::Wm, CaseKind::Realizable),
            entry(LearnerKind::Halving, CaseKind::Realizable),
        ];
        let csv = emit_report(&entries, ReportFormat::Csv).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "learner,case,eta,T,permutations,|H|,M(h*),expected_mistakes,max_mistakes,expected_regret,bounds"
        );
        assert_eq!(lines.len(), 3);
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 11);
            assert!(line.split(',').all(|c| !c.is_empty()));
        }
    }

    #[test]
    fn json_round_trip() {
        let entries = vec![
            entry(LearnerKind::Wm, CaseKind::Unrealizable),
            entry(LearnerKind::WmSoa, CaseKind::Unrealizable),
        ];
        let json = emit_report(&entries, ReportFormat::Json).unwrap();
        assert!(json.contains("\"schema\": 1"));
        assert_eq!(parse_json_report(&json).unwrap(), entries);
    }

    #[test]
    fn markdown_diff_column() {
        let entries = vec![
            entry(LearnerKind::Wm, CaseKind::Realizable),
            entry(LearnerKind::WmHalving, CaseKind::Realizable),
        ];
        let md = emit_report(&entries, ReportFormat::Markdown).unwrap();
        let mut lines = md.lines();
        let header = lines.next().unwrap();
        assert!(header.contains("WM max mistakes (1)"));
        assert!(header.ends_with("Diff (1) - (2) |"));
        lines.next();
        let row: Vec<&str> = lines
            .next()
            .unwrap()
            .trim_matches('|')
            .split('|')
            .map(str::trim)
            .collect();
        let diff: f64 = row.last().unwrap().parse().unwrap();
        let want = entries[0].report.max_mistakes - entries[1].report.max_mistakes;
        assert!((diff - want).abs() < 0.005);
    }

    #[test]
    fn format_errors() {
        assert_eq!(
            "xml".parse::<ReportFormat>(),
            Err(Error::UnsupportedFormat("xml".into()))
        );
        assert_eq!(emit_report(&[], ReportFormat::Csv), Err(Error::EmptyReport));
    }
}

//! Finite hypothesis classes over an explicit finite domain, version spaces and
//! per-hypothesis mistake statistics.
//!
//! A class is stored column-major: for every domain point we keep a bitset whose
//! bit `i` is hypothesis `h_i`'s label on that point. Restricting a version space
//! to an example is then a single bitset intersection.

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the instance domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Instance(pub i64);

impl From<i64> for Instance {
    fn from(v: i64) -> Self {
        Instance(v)
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A binary label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Label(bool);

impl Label {
    pub const ZERO: Label = Label(false);
    pub const ONE: Label = Label(true);

    pub fn from_bit(bit: u8) -> Option<Label> {
        match bit {
            0 => Some(Label::ZERO),
            1 => Some(Label::ONE),
            _ => None,
        }
    }

    pub fn is_one(self) -> bool {
        self.0
    }

    pub fn bit(self) -> u8 {
        self.0 as u8
    }

    pub fn flipped(self) -> Label {
        Label(!self.0)
    }
}

impl From<bool> for Label {
    fn from(b: bool) -> Self {
        Label(b)
    }
}

impl From<Label> for u8 {
    fn from(l: Label) -> u8 {
        l.bit()
    }
}

impl TryFrom<u8> for Label {
    type Error = String;

    fn try_from(bit: u8) -> std::result::Result<Self, String> {
        Label::from_bit(bit).ok_or_else(|| format!("label must be 0 or 1, got {bit}"))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.bit().fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledExample {
    pub x: Instance,
    pub y: Label,
}

impl LabeledExample {
    pub fn new(x: impl Into<Instance>, y: Label) -> Self {
        LabeledExample { x: x.into(), y }
    }
}

/// An ordered list of labeled examples. The empty sequence is allowed and
/// treated as a degenerate run of length zero.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sequence {
    examples: Vec<LabeledExample>,
}

impl Sequence {
    pub fn new(examples: Vec<LabeledExample>) -> Self {
        Sequence { examples }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledExample> {
        self.examples.iter()
    }

    /// The sequence reordered by `order`, where `order[k]` is the original
    /// position of the example placed at position `k`.
    pub fn reordered(&self, order: &[usize]) -> Sequence {
        debug_assert_eq!(order.len(), self.examples.len());
        Sequence {
            examples: order.iter().map(|&k| self.examples[k]).collect(),
        }
    }

    /// `t,x,y` rows with a header line; `t` is 1-based.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,y\n");
        for (t, ex) in self.examples.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", t + 1, ex.x, ex.y));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Sequence> {
        let bad = |line: &str| Error::Serialization(format!("malformed sequence row `{line}`"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == "t,x,y" => {}
            Some(h) => return Err(Error::Serialization(format!("unexpected header `{h}`"))),
            None => return Ok(Sequence::default()),
        }
        let mut examples = Vec::new();
        for line in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(bad(line));
            }
            let x: i64 = fields[1].parse().map_err(|_| bad(line))?;
            let y = fields[2]
                .parse::<u8>()
                .ok()
                .and_then(Label::from_bit)
                .ok_or_else(|| bad(line))?;
            examples.push(LabeledExample::new(x, y));
        }
        Ok(Sequence { examples })
    }
}

impl FromIterator<LabeledExample> for Sequence {
    fn from_iter<I: IntoIterator<Item = LabeledExample>>(iter: I) -> Self {
        Sequence {
            examples: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a Sequence {
    type Item = &'a LabeledExample;
    type IntoIter = std::slice::Iter<'a, LabeledExample>;

    fn into_iter(self) -> Self::IntoIter {
        self.examples.iter()
    }
}

/// A finite hypothesis class: `d` binary hypotheses tabulated on `n` distinct
/// domain points. Duplicate rows are kept; every row counts towards `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteHypothesisClass {
    domain: Vec<Instance>,
    position: HashMap<Instance, usize>,
    columns: Vec<FixedBitSet>,
    size: usize,
}

impl FiniteHypothesisClass {
    /// Builds a class from a row-major 0/1 table (`table[i][j]` is `h_i` at
    /// `domain[j]`).
    pub fn new(domain: Vec<Instance>, table: &[Vec<u8>]) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::InvalidClass(
                "class needs at least one hypothesis".into(),
            ));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != domain.len() {
                return Err(Error::InvalidClass(format!(
                    "row {i} has {} entries, domain has {}",
                    row.len(),
                    domain.len()
                )));
            }
            if let Some(v) = row.iter().find(|&&v| v > 1) {
                return Err(Error::InvalidClass(format!(
                    "row {i} holds non-binary entry {v}"
                )));
            }
        }
        Self::from_fn(domain, table.len(), |i, j| table[i][j] == 1)
    }

    /// Builds a class by evaluating `label(i, j)` for hypothesis `i` on the
    /// `j`-th domain point.
    pub fn from_fn(
        domain: Vec<Instance>,
        size: usize,
        mut label: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidClass(
                "class needs at least one hypothesis".into(),
            ));
        }
        if domain.is_empty() {
            return Err(Error::InvalidClass(
                "domain needs at least one point".into(),
            ));
        }
        let mut position = HashMap::with_capacity(domain.len());
        for (j, &x) in domain.iter().enumerate() {
            if position.insert(x, j).is_some() {
                return Err(Error::InvalidClass(format!(
                    "domain point {x} appears twice"
                )));
            }
        }
        let columns = (0..domain.len())
            .map(|j| {
                let mut col = FixedBitSet::with_capacity(size);
                for i in 0..size {
                    col.set(i, label(i, j));
                }
                col
            })
            .collect();
        Ok(FiniteHypothesisClass {
            domain,
            position,
            columns,
            size,
        })
    }

    /// Number of hypotheses `d`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn domain(&self) -> &[Instance] {
        &self.domain
    }

    pub fn point_index(&self, x: Instance) -> Result<usize> {
        self.position
            .get(&x)
            .copied()
            .ok_or(Error::UnknownInstance(x))
    }

    /// Bitset of hypotheses labelling `x` with 1.
    pub fn ones_at(&self, x: Instance) -> Result<&FixedBitSet> {
        Ok(&self.columns[self.point_index(x)?])
    }

    pub(crate) fn column(&self, j: usize) -> &FixedBitSet {
        &self.columns[j]
    }

    pub fn evaluate(&self, i: usize, x: Instance) -> Result<Label> {
        if i >= self.size {
            return Err(Error::IndexOutOfRange {
                index: i,
                count: self.size,
            });
        }
        Ok(Label(self.ones_at(x)?.contains(i)))
    }

    /// Every hypothesis' label at `x`, in index order.
    pub fn advice(&self, x: Instance) -> Result<Vec<Label>> {
        let col = self.ones_at(x)?;
        Ok((0..self.size).map(|i| Label(col.contains(i))).collect())
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        (0..self.size)
            .map(|i| self.columns.iter().map(|c| c.contains(i) as u8).collect())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ClassDocument::from(self)).expect("class document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ClassDocument =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        doc.try_into()
    }
}

/// On-disk form of a class: `{"domain": [...], "table": [[0/1, ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDocument {
    pub domain: Vec<i64>,
    pub table: Vec<Vec<u8>>,
}

impl From<&FiniteHypothesisClass> for ClassDocument {
    fn from(class: &FiniteHypothesisClass) -> Self {
        ClassDocument {
            domain: class.domain.iter().map(|x| x.0).collect(),
            table: class.rows(),
        }
    }
}

impl TryFrom<ClassDocument> for FiniteHypothesisClass {
    type Error = Error;

    fn try_from(doc: ClassDocument) -> Result<Self> {
        FiniteHypothesisClass::new(doc.domain.into_iter().map(Instance).collect(), &doc.table)
    }
}

impl Serialize for FiniteHypothesisClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ClassDocument::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteHypothesisClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = ClassDocument::deserialize(d)?;
        doc.try_into().map_err(serde::de::Error::custom)
    }
}

/// The hypotheses still consistent with every example seen so far.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VersionSpace {
    members: FixedBitSet,
}

impl VersionSpace {
    pub fn full(size: usize) -> Self {
        let mut members = FixedBitSet::with_capacity(size);
        members.insert_range(..);
        VersionSpace { members }
    }

    pub fn empty(size: usize) -> Self {
        VersionSpace {
            members: FixedBitSet::with_capacity(size),
        }
    }

    /// Panics if an index is `>= size`.
    pub fn from_indices(size: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut members = FixedBitSet::with_capacity(size);
        members.extend(indices);
        VersionSpace { members }
    }

    pub(crate) fn from_bits(members: FixedBitSet) -> Self {
        VersionSpace { members }
    }

    pub(crate) fn bits(&self) -> &FixedBitSet {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_clear()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(i)
    }

    pub fn first(&self) -> Option<usize> {
        self.members.ones().next()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.ones()
    }

    pub fn is_subset(&self, other: &VersionSpace) -> bool {
        self.members.is_subset(&other.members)
    }

    /// Members labelling `x` with 0 and with 1, in that order.
    pub fn split(&self, class: &FiniteHypothesisClass, x: Instance) -> Result<(Self, Self)> {
        let ones = class.ones_at(x)?;
        Ok(self.split_by(ones))
    }

    pub(crate) fn split_by(&self, ones: &FixedBitSet) -> (Self, Self) {
        let mut one_side = self.members.clone();
        one_side.intersect_with(ones);
        let mut zero_side = self.members.clone();
        zero_side.difference_with(ones);
        (
            VersionSpace::from_bits(zero_side),
            VersionSpace::from_bits(one_side),
        )
    }

    /// `{i in self : h_i(x) = y}`.
    pub fn restrict(&self, class: &FiniteHypothesisClass, x: Instance, y: Label) -> Result<Self> {
        let (zeros, ones) = self.split(class, x)?;
        Ok(if y.is_one() { ones } else { zeros })
    }
}

/// Per-hypothesis mistake counts `M_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MistakeVector {
    counts: Vec<u64>,
}

impl MistakeVector {
    pub fn zeros(size: usize) -> Self {
        MistakeVector {
            counts: vec![0; size],
        }
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        MistakeVector { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn min(&self) -> Option<u64> {
        self.counts.iter().copied().min()
    }

    /// Adds one to every hypothesis whose label at `x` differs from `y`.
    pub fn record(&mut self, class: &FiniteHypothesisClass, x: Instance, y: Label) -> Result<()> {
        let ones = class.ones_at(x)?;
        for (i, c) in self.counts.iter_mut().enumerate() {
            if ones.contains(i) != y.is_one() {
                *c += 1;
            }
        }
        Ok(())
    }

    /// Same as [`record`](Self::record) but from an explicit advice vector.
    pub fn record_advice(&mut self, advice: &[Label], y: Label) -> Result<()> {
        if advice.len() != self.counts.len() {
            return Err(Error::DimensionMismatch {
                expected: self.counts.len(),
                actual: advice.len(),
            });
        }
        for (c, &a) in self.counts.iter_mut().zip(advice) {
            if a != y {
                *c += 1;
            }
        }
        Ok(())
    }
}

/// Mistake count of each hypothesis over the whole sequence.
pub fn mistake_profile(class: &FiniteHypothesisClass, seq: &Sequence) -> Result<MistakeVector> {
    let mut profile = MistakeVector::zeros(class.size());
    for ex in seq {
        profile.record(class, ex.x, ex.y)?;
    }
    Ok(profile)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestMistakes {
    pub count: u64,
    pub argmin: Vec<usize>,
}

/// The smallest mistake count and every hypothesis attaining it.
///
/// Panics on an empty profile; classes always hold at least one hypothesis.
pub fn best_mistakes(profile: &MistakeVector) -> BestMistakes {
    let count = profile.min().expect("mistake profile is non-empty");
    let argmin = profile
        .counts()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == count)
        .map(|(i, _)| i)
        .collect();
    BestMistakes { count, argmin }
}

//! Finite domains, boolean hypotheses, and hypothesis classes.
//!
//! A hypothesis over a domain of `n <= 64` points is stored as a bit mask
//! where bit `i` holds `h(x_i)`. Classes keep their members sorted in the
//! canonical order (lexicographic on `h(x_0), h(x_1), ...`) and free of
//! duplicates, so the member list doubles as the canonical class encoding.

mod oracle;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use oracle::{
    find_reducing_sequence, is_irreducible, ldim, soa, soa_hypothesis, ClassId, ClassOracle,
};

/// Largest supported domain.
pub const MAX_DOMAIN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Domain {
    size: usize,
}

impl Domain {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || size > MAX_DOMAIN {
            return Err(Error::UnsupportedDomain(size));
        }
        Ok(Domain { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn points(&self) -> impl Iterator<Item = DomainPoint> {
        (0..self.size).map(DomainPoint)
    }

    /// Mask with one bit per domain point.
    pub fn full_mask(&self) -> u64 {
        if self.size == 64 {
            u64::MAX
        } else {
            (1u64 << self.size) - 1
        }
    }

    pub fn check(&self, x: DomainPoint) -> Result<()> {
        if x.0 < self.size {
            Ok(())
        } else {
            Err(Error::DomainMismatch {
                point: x.0,
                domain_size: self.size,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DomainPoint(pub usize);

impl DomainPoint {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LabeledExample {
    pub point: DomainPoint,
    pub label: bool,
}

impl LabeledExample {
    pub fn new(point: usize, label: bool) -> Self {
        LabeledExample {
            point: DomainPoint(point),
            label,
        }
    }
}

/// A total function from the domain to `{0, 1}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Hypothesis {
    bits: u64,
    len: u8,
}

impl Hypothesis {
    pub fn from_bits(domain: Domain, bits: u64) -> Self {
        Hypothesis {
            bits: bits & domain.full_mask(),
            len: domain.size() as u8,
        }
    }

    pub fn from_values(values: &[bool]) -> Result<Self> {
        let domain = Domain::new(values.len())?;
        let bits = values
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &v)| acc | ((v as u64) << i));
        Ok(Hypothesis::from_bits(domain, bits))
    }

    pub fn constant(domain: Domain, value: bool) -> Self {
        Hypothesis::from_bits(domain, if value { u64::MAX } else { 0 })
    }

    /// Indicator of a single point.
    pub fn indicator(domain: Domain, x: DomainPoint) -> Self {
        Hypothesis::from_bits(domain, 1u64 << x.0)
    }

    /// `h_t(x) = 1[x >= t]`, for `t` in `0..=n`.
    pub fn threshold(domain: Domain, t: usize) -> Self {
        let bits = if t >= 64 { 0 } else { u64::MAX << t };
        Hypothesis::from_bits(domain, bits)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn domain(&self) -> Domain {
        Domain {
            size: self.len as usize,
        }
    }

    /// Unchecked evaluation; callers must keep `x` inside the domain.
    #[inline]
    pub fn value(&self, x: usize) -> bool {
        (self.bits >> x) & 1 == 1
    }

    pub fn evaluate(&self, x: DomainPoint) -> Result<bool> {
        self.domain().check(x)?;
        Ok(self.value(x.0))
    }

    pub fn values(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }

    pub fn complement(&self) -> Self {
        Hypothesis::from_bits(self.domain(), !self.bits)
    }

    /// Number of domain points where the two hypotheses differ.
    pub fn disagreements(&self, other: &Hypothesis) -> u32 {
        (self.bits ^ other.bits).count_ones()
    }

    pub fn mistakes_on(&self, sample: &LabeledSequence) -> usize {
        sample
            .iter()
            .filter(|e| self.value(e.point.0) != e.label)
            .count()
    }

    /// The sequence `(x, h(x))` for the given points.
    pub fn label_points(&self, points: &[DomainPoint]) -> LabeledSequence {
        points
            .iter()
            .map(|&x| LabeledExample {
                point: x,
                label: self.value(x.0),
            })
            .collect()
    }
}

impl Ord for Hypothesis {
    fn cmp(&self, other: &Self) -> Ordering {
        // Bit i sits at position 63 - i after reversal, so unsigned order on the
        // reversed word is lexicographic order on (h(x_0), h(x_1), ...).
        self.bits
            .reverse_bits()
            .cmp(&other.bits.reverse_bits())
            .then(self.len.cmp(&other.len))
    }
}

impl PartialOrd for Hypothesis {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.value(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hypothesis({self})")
    }
}

impl Serialize for Hypothesis {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Hypothesis {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl FromStr for Hypothesis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse {
                    line: 0,
                    message: format!("unexpected character {other:?} in hypothesis"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Hypothesis::from_values(&values)
    }
}

pub fn evaluate(h: &Hypothesis, x: DomainPoint) -> Result<bool> {
    h.evaluate(x)
}

/// Ordered list of labeled examples. Repeats and contradictions are allowed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabeledSequence(pub Vec<LabeledExample>);

impl LabeledSequence {
    pub fn new() -> Self {
        LabeledSequence(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, e: LabeledExample) {
        self.0.push(e);
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledExample> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[LabeledExample] {
        &self.0
    }

    pub fn clear(&mut self) {
        self.0.clear();
    }

    pub fn reversed(&self) -> Self {
        LabeledSequence(self.0.iter().rev().copied().collect())
    }

    pub fn check_domain(&self, domain: Domain) -> Result<()> {
        self.iter().try_for_each(|e| domain.check(e.point))
    }

    /// True when some member of `class` is consistent with every example.
    pub fn is_realizable_by(&self, class: &HypothesisClass) -> bool {
        class.members().iter().any(|h| h.mistakes_on(self) == 0)
    }

    /// Parses the `point_index label` line format used for datasets and streams.
    pub fn parse(text: &str, domain: Domain) -> Result<Self> {
        let mut seq = LabeledSequence::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: lineno + 1,
                message,
            };
            let mut fields = line.split_whitespace();
            let (Some(p), Some(l), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(err(format!("expected `point label`, got {line:?}")));
            };
            let point: usize = p
                .parse()
                .map_err(|_| err(format!("bad point index {p:?}")))?;
            let label = match l {
                "0" => false,
                "1" => true,
                _ => return Err(err(format!("bad label {l:?}"))),
            };
            domain.check(DomainPoint(point)).map_err(|e| err(e.to_string()))?;
            seq.push(LabeledExample::new(point, label));
        }
        Ok(seq)
    }

    pub fn to_text(&self) -> String {
        self.iter()
            .map(|e| format!("{} {}\n", e.point.0, e.label as u8))
            .collect()
    }
}

impl FromIterator<LabeledExample> for LabeledSequence {
    fn from_iter<I: IntoIterator<Item = LabeledExample>>(iter: I) -> Self {
        LabeledSequence(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a LabeledSequence {
    type Item = &'a LabeledExample;
    type IntoIter = std::slice::Iter<'a, LabeledExample>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Exact empirical error `#{(x,y) in S : h(x) != y} / |S|`.
pub fn empirical_error(h: &Hypothesis, sample: &LabeledSequence) -> Result<Ratio<u64>> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    sample.check_domain(h.domain())?;
    Ok(Ratio::new(h.mistakes_on(sample) as u64, sample.len() as u64))
}

/// A finite, duplicate-free set of hypotheses over a common domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HypothesisClass {
    domain: Domain,
    members: Vec<Hypothesis>,
}

impl HypothesisClass {
    pub fn empty(domain: Domain) -> Self {
        HypothesisClass {
            domain,
            members: Vec::new(),
        }
    }

    /// Builds a class, silently dropping duplicates.
    pub fn new(domain: Domain, members: impl IntoIterator<Item = Hypothesis>) -> Result<Self> {
        let mut members: Vec<Hypothesis> = members.into_iter().collect();
        if let Some(h) = members.iter().find(|h| h.len() != domain.size()) {
            return Err(Error::LengthMismatch {
                expected: domain.size(),
                found: h.len(),
            });
        }
        members.sort_unstable();
        members.dedup();
        Ok(HypothesisClass { domain, members })
    }

    /// Members must already be sorted and unique.
    pub(crate) fn from_sorted_bits(domain: Domain, bits: &[u64]) -> Self {
        HypothesisClass {
            domain,
            members: bits
                .iter()
                .map(|&b| Hypothesis::from_bits(domain, b))
                .collect(),
        }
    }

    /// All `2^n` functions on `n` points.
    pub fn full_cube(domain: Domain) -> Result<Self> {
        if domain.size() > 20 {
            return Err(Error::InstanceTooLarge(format!(
                "full cube over {} points",
                domain.size()
            )));
        }
        let members = (0..1u64 << domain.size()).map(|b| Hypothesis::from_bits(domain, b));
        HypothesisClass::new(domain, members)
    }

    pub fn thresholds(domain: Domain) -> Self {
        let members = (0..=domain.size()).map(|t| Hypothesis::threshold(domain, t));
        HypothesisClass::new(domain, members).expect("thresholds share the domain")
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn members(&self) -> &[Hypothesis] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, h: &Hypothesis) -> bool {
        self.members.binary_search(h).is_ok()
    }

    pub fn is_subset_of(&self, other: &HypothesisClass) -> bool {
        self.members.iter().all(|h| other.contains(h))
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Hypothesis> {
        self.members.iter()
    }

    /// Canonical encoding used as a memo key.
    pub fn encoding(&self) -> Vec<u64> {
        self.members.iter().map(|h| h.bits).collect()
    }

    pub fn filter(&self, mut keep: impl FnMut(&Hypothesis) -> bool) -> Self {
        HypothesisClass {
            domain: self.domain,
            members: self.members.iter().copied().filter(|h| keep(h)).collect(),
        }
    }

    pub fn intersection(&self, other: &HypothesisClass) -> Self {
        self.filter(|h| other.contains(h))
    }

    /// Parses the class file format: first line is the domain size, each
    /// further line one hypothesis as a string of `0`/`1`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (first_line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing domain size".into(),
        })?;
        let size: usize = header.parse().map_err(|_| Error::Parse {
            line: first_line,
            message: format!("bad domain size {header:?}"),
        })?;
        let domain = Domain::new(size)?;
        let mut members = Vec::new();
        for (line, text) in lines {
            let h: Hypothesis = text.parse().map_err(|e| match e {
                Error::Parse { message, .. } => Error::Parse { line, message },
                other => Error::Parse {
                    line,
                    message: other.to_string(),
                },
            })?;
            if h.len() != size {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {size} values, found {}", h.len()),
                });
            }
            members.push(h);
        }
        let class = HypothesisClass::new(domain, members.iter().copied())?;
        if class.len() != members.len() {
            let mut seen = std::collections::HashSet::new();
            let dup = members.iter().find(|h| !seen.insert(**h)).unwrap();
            return Err(Error::DuplicateHypothesis(dup.to_string()));
        }
        Ok(class)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.domain.size());
        for h in &self.members {
            out.push_str(&h.to_string());
            out.push('\n');
        }
        out
    }
}

impl<'a> IntoIterator for &'a HypothesisClass {
    type Item = &'a Hypothesis;
    type IntoIter = std::slice::Iter<'a, Hypothesis>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

/// `H|_{(x,y)}`: the members agreeing with the example.
pub fn restrict(class: &HypothesisClass, e: LabeledExample) -> Result<HypothesisClass> {
    class.domain.check(e.point)?;
    Ok(class.filter(|h| h.value(e.point.0) == e.label))
}

/// Fold of [`restrict`] over a sequence.
pub fn restrict_seq(class: &HypothesisClass, seq: &LabeledSequence) -> Result<HypothesisClass> {
    seq.check_domain(class.domain)?;
    Ok(class.filter(|h| h.mistakes_on(seq) == 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom(n: usize) -> Domain {
        Domain::new(n).unwrap()
    }

    #[test]
    fn evaluate_constants_and_indicator() {
        let d = dom(5);
        for x in d.points() {
            assert!(!evaluate(&Hypothesis::constant(d, false), x).unwrap());
            assert!(evaluate(&Hypothesis::constant(d, true), x).unwrap());
        }
        let ind = Hypothesis::indicator(d, DomainPoint(3));
        assert!(ind.evaluate(DomainPoint(3)).unwrap());
        assert!(!ind.evaluate(DomainPoint(2)).unwrap());
    }

    #[test]
    fn evaluate_out_of_domain() {
        let h = Hypothesis::constant(dom(3), true);
        assert!(matches!(
            h.evaluate(DomainPoint(3)),
            Err(Error::DomainMismatch { point: 3, .. })
        ));
    }

    #[test]
    fn empirical_error_cases() {
        let d = dom(4);
        let h = Hypothesis::threshold(d, 2);
        let s: LabeledSequence = (0..4).map(|x| LabeledExample::new(x, x >= 2)).collect();
        assert_eq!(empirical_error(&h, &s).unwrap(), Ratio::new(0, 1));
        assert_eq!(empirical_error(&h.complement(), &s).unwrap(), Ratio::new(1, 1));
        let off_by_one = Hypothesis::threshold(d, 3);
        assert_eq!(empirical_error(&off_by_one, &s).unwrap(), Ratio::new(1, 4));
        assert!(matches!(
            empirical_error(&h, &LabeledSequence::new()),
            Err(Error::EmptySample)
        ));
    }

    #[test]
    fn restriction_filters_and_partitions() {
        let d = dom(3);
        let h = HypothesisClass::new(
            d,
            [Hypothesis::constant(d, false), Hypothesis::constant(d, true)],
        )
        .unwrap();
        let ones = restrict(&h, LabeledExample::new(1, true)).unwrap();
        assert_eq!(ones.members(), &[Hypothesis::constant(d, true)]);
        let none = restrict(&ones, LabeledExample::new(1, false)).unwrap();
        assert!(none.is_empty());

        let cube = HypothesisClass::full_cube(d).unwrap();
        for x in 0..3 {
            let a = restrict(&cube, LabeledExample::new(x, false)).unwrap();
            let b = restrict(&cube, LabeledExample::new(x, true)).unwrap();
            assert_eq!(a.len() + b.len(), cube.len());
        }
    }

    #[test]
    fn restrict_seq_is_order_free() {
        let d = dom(4);
        let cube = HypothesisClass::full_cube(d).unwrap();
        let s = LabeledSequence(vec![
            LabeledExample::new(0, true),
            LabeledExample::new(2, false),
            LabeledExample::new(3, true),
        ]);
        assert_eq!(restrict_seq(&cube, &LabeledSequence::new()).unwrap(), cube);
        let fwd = restrict_seq(&cube, &s).unwrap();
        assert_eq!(fwd, restrict_seq(&cube, &s.reversed()).unwrap());
        assert_eq!(fwd.len(), 2);
        let h = Hypothesis::from_values(&[true, false, false, true]).unwrap();
        assert!(fwd.contains(&h));
    }

    #[test]
    fn canonical_order_is_lexicographic() {
        let a: Hypothesis = "0111".parse().unwrap();
        let b: Hypothesis = "1000".parse().unwrap();
        let c: Hypothesis = "0110".parse().unwrap();
        assert!(a < b);
        assert!(c < a);
    }

    #[test]
    fn class_file_round_trip_and_duplicates() {
        let text = "3\n010\n111\n000\n";
        let class = HypothesisClass::parse(text).unwrap();
        assert_eq!(class.len(), 3);
        assert_eq!(class.to_text(), "3\n000\n010\n111\n");
        assert!(matches!(
            HypothesisClass::parse("3\n010\n010\n"),
            Err(Error::DuplicateHypothesis(_))
        ));
        assert!(matches!(
            HypothesisClass::parse("3\n01\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn dataset_parse() {
        let d = dom(4);
        let s = LabeledSequence::parse("0 1\n3 0\n\n# comment\n2 1\n", d).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.to_text(), "0 1\n3 0\n2 1\n");
        assert!(LabeledSequence::parse("4 1\n", d).is_err());
        assert!(LabeledSequence::parse("1 2\n", d).is_err());
    }
}

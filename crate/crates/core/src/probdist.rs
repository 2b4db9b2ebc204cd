//! Probability distributions over disease labels.
//!
//! A [`PredictionSet`] is a finite map from [`Label`] to probability mass. It
//! may be explicitly normalized (masses sum to one) or not: agents routinely
//! report top-k lists whose masses sum below one, and those are kept as-is
//! until a caller normalizes them with [`normalize`].
//!
//! Entropies are measured in bits.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Tolerance on the mass sum of a normalized set.
pub const NORMALIZED_TOLERANCE: f64 = 1e-9;

/// Number of integer bins used by [`discretize`].
pub const DISCRETE_BINS: u32 = 1000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProbError {
    #[error("every weight is zero")]
    AllZeroWeights,
    #[error("prediction set is not normalized (mass sum {sum})")]
    NotNormalized { sum: f64 },
    #[error("label is empty after canonicalization")]
    EmptyLabel,
    #[error("mass {mass} for label '{label}' is outside [0, 1]")]
    MassOutOfRange { label: String, mass: f64 },
    #[error("weight {weight} for label '{label}' is negative or not finite")]
    InvalidWeight { label: String, weight: f64 },
    #[error("masses sum to {sum}, which exceeds 1")]
    MassSumExceedsOne { sum: f64 },
    #[error("mixture weight {0} is outside [0, 1]")]
    InvalidAlpha(f64),
    #[error("top-k requires k >= 1")]
    ZeroK,
    #[error("discrete distribution bins sum to {sum}, expected {DISCRETE_BINS}")]
    BadBinTotal { sum: u32 },
}

/// Canonical disease name: trimmed, case-folded, inner whitespace collapsed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(String);

impl Label {
    pub fn new(name: &str) -> Result<Self, ProbError> {
        let canonical = name
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ")
            .to_lowercase();
        if canonical.is_empty() {
            return Err(ProbError::EmptyLabel);
        }
        Ok(Self(canonical))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for Label {
    type Err = ProbError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::new(s)
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Label::new(&raw).map_err(de::Error::custom)
    }
}

/// A finite map from labels to probability mass.
///
/// Invariants: every mass is in `[0, 1]`; when `normalized` is set the masses
/// sum to one within [`NORMALIZED_TOLERANCE`], otherwise they sum to at most
/// `1 + NORMALIZED_TOLERANCE`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    entries: BTreeMap<Label, f64>,
    normalized: bool,
}

impl PredictionSet {
    /// Builds a set from masses. The normalized flag is set iff the masses sum
    /// to one within [`NORMALIZED_TOLERANCE`].
    pub fn from_masses<I>(masses: I) -> Result<Self, ProbError>
    where
        I: IntoIterator<Item = (Label, f64)>,
    {
        let mut entries = BTreeMap::new();
        for (label, mass) in masses {
            if !mass.is_finite() || !(0.0..=1.0).contains(&mass) {
                return Err(ProbError::MassOutOfRange {
                    label: label.to_string(),
                    mass,
                });
            }
            *entries.entry(label).or_insert(0.0) += mass;
        }
        let sum: f64 = entries.values().sum();
        if sum > 1.0 + NORMALIZED_TOLERANCE {
            return Err(ProbError::MassSumExceedsOne { sum });
        }
        let normalized = (sum - 1.0).abs() <= NORMALIZED_TOLERANCE;
        Ok(Self {
            entries,
            normalized,
        })
    }

    /// Convenience constructor from string names, mainly for tests and fixtures.
    pub fn from_pairs(pairs: &[(&str, f64)]) -> Result<Self, ProbError> {
        let mut masses = Vec::with_capacity(pairs.len());
        for (name, mass) in pairs {
            masses.push((Label::new(name)?, *mass));
        }
        Self::from_masses(masses)
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.values().sum()
    }

    /// Mass of `label`, zero when absent.
    pub fn mass(&self, label: &Label) -> f64 {
        self.entries.get(label).copied().unwrap_or(0.0)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Label::new(name)
            .ok()
            .and_then(|label| self.entries.get(&label).copied())
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.entries.contains_key(label)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Label, f64)> {
        self.entries.iter().map(|(l, m)| (l, *m))
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.entries.keys()
    }

    /// Entries ordered by descending mass; equal masses fall back to ascending
    /// label order.
    pub fn ranked(&self) -> Vec<(&Label, f64)> {
        let mut ranked: Vec<_> = self.iter().collect();
        ranked.sort_by(|(la, ma), (lb, mb)| mb.total_cmp(ma).then_with(|| la.cmp(lb)));
        ranked
    }

    /// 1-based rank of `label` among positive-mass entries.
    pub fn rank_of(&self, label: &Label) -> Option<usize> {
        self.ranked()
            .into_iter()
            .filter(|(_, m)| *m > 0.0)
            .position(|(l, _)| l == label)
            .map(|i| i + 1)
    }

    pub fn top(&self) -> Option<(&Label, f64)> {
        self.ranked().into_iter().next()
    }

    /// Labels of the `k` highest-ranked entries.
    pub fn top_labels(&self, k: usize) -> BTreeSet<Label> {
        self.ranked()
            .into_iter()
            .take(k)
            .map(|(l, _)| l.clone())
            .collect()
    }

    /// Masses as a plain label -> weight map, suitable for [`normalize`].
    pub fn weights(&self) -> BTreeMap<Label, f64> {
        self.entries.clone()
    }

    /// Returns the set itself when already normalized, otherwise its
    /// normalization.
    pub fn to_normalized(&self) -> Result<PredictionSet, ProbError> {
        if self.normalized {
            Ok(self.clone())
        } else {
            normalize(&self.entries)
        }
    }

    pub(crate) fn from_raw_parts(entries: BTreeMap<Label, f64>, normalized: bool) -> Self {
        Self {
            entries,
            normalized,
        }
    }
}

impl fmt::Display for PredictionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .ranked()
            .into_iter()
            .map(|(l, m)| format!("{l}: {:.1}%", m * 100.0))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

// Wire format: a flat object of label -> mass plus a boolean "normalized" key.
// A label literally named "normalized" is told apart by its numeric value.
impl Serialize for PredictionSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.entries.len() + 1))?;
        map.serialize_entry("normalized", &self.normalized)?;
        for (label, mass) in &self.entries {
            map.serialize_entry(label.as_str(), mass)?;
        }
        map.end()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WireValue {
    Flag(bool),
    Mass(f64),
}

impl<'de> Deserialize<'de> for PredictionSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct SetVisitor;

        impl<'de> Visitor<'de> for SetVisitor {
            type Value = PredictionSet;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object of label -> probability plus a \"normalized\" flag")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut flag = None;
                let mut masses = Vec::new();
                while let Some((key, value)) = access.next_entry::<String, WireValue>()? {
                    match value {
                        WireValue::Flag(b) if key == "normalized" => flag = Some(b),
                        WireValue::Flag(_) => {
                            return Err(de::Error::custom(format!(
                                "label '{key}' has a boolean value"
                            )))
                        }
                        WireValue::Mass(m) => {
                            masses.push((Label::new(&key).map_err(de::Error::custom)?, m))
                        }
                    }
                }
                let set = PredictionSet::from_masses(masses).map_err(de::Error::custom)?;
                if flag == Some(true) && !set.normalized {
                    return Err(de::Error::custom(ProbError::NotNormalized {
                        sum: set.total_mass(),
                    }));
                }
                Ok(set)
            }
        }

        deserializer.deserialize_map(SetVisitor)
    }
}

/// Scales nonnegative weights so they sum to one.
pub fn normalize(raw: &BTreeMap<Label, f64>) -> Result<PredictionSet, ProbError> {
    for (label, &w) in raw {
        if !w.is_finite() || w < 0.0 {
            return Err(ProbError::InvalidWeight {
                label: label.to_string(),
                weight: w,
            });
        }
    }
    let total: f64 = raw.values().sum();
    if total <= 0.0 {
        return Err(ProbError::AllZeroWeights);
    }
    let entries = raw
        .iter()
        .map(|(l, w)| (l.clone(), (w / total).min(1.0)))
        .collect();
    Ok(PredictionSet::from_raw_parts(entries, true))
}

fn require_normalized(p: &PredictionSet) -> Result<(), ProbError> {
    if p.normalized {
        Ok(())
    } else {
        Err(ProbError::NotNormalized {
            sum: p.total_mass(),
        })
    }
}

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn shannon_entropy(p: &PredictionSet) -> Result<f64, ProbError> {
    require_normalized(p)?;
    let h: f64 = p
        .entries
        .values()
        .filter(|&&m| m > 0.0)
        .map(|&m| -m * m.log2())
        .sum();
    // rounding can leave a point mass at -0.0 or a hair below zero
    Ok(h.max(0.0))
}

/// `alpha * p_a + (1 - alpha) * p_b` over the union of both label sets.
pub fn mixture(
    p_a: &PredictionSet,
    p_b: &PredictionSet,
    alpha: f64,
) -> Result<PredictionSet, ProbError> {
    require_normalized(p_a)?;
    require_normalized(p_b)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(ProbError::InvalidAlpha(alpha));
    }
    let labels: BTreeSet<&Label> = p_a.labels().chain(p_b.labels()).collect();
    let entries = labels
        .into_iter()
        .map(|l| {
            let m = alpha * p_a.mass(l) + (1.0 - alpha) * p_b.mass(l);
            (l.clone(), m.clamp(0.0, 1.0))
        })
        .collect();
    Ok(PredictionSet::from_raw_parts(entries, true))
}

/// The concavity lower bound `alpha * H(p_a) + (1 - alpha) * H(p_b)` on the
/// entropy of their mixture.
pub fn entropy_lower_bound(
    p_a: &PredictionSet,
    p_b: &PredictionSet,
    alpha: f64,
) -> Result<f64, ProbError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(ProbError::InvalidAlpha(alpha));
    }
    let h_a = shannon_entropy(p_a)?;
    let h_b = shannon_entropy(p_b)?;
    Ok(alpha * h_a + (1.0 - alpha) * h_b)
}

/// Absolute difference of the two entropies, in bits.
pub fn entropy_gap(p_a: &PredictionSet, p_b: &PredictionSet) -> Result<f64, ProbError> {
    Ok((shannon_entropy(p_a)? - shannon_entropy(p_b)?).abs())
}

/// Keeps the `k` highest-mass labels and renormalizes. A `k` at or above the
/// support size returns the input unchanged.
pub fn truncate_top_k(p: &PredictionSet, k: usize) -> Result<PredictionSet, ProbError> {
    if k == 0 {
        return Err(ProbError::ZeroK);
    }
    if k >= p.len() {
        return Ok(p.clone());
    }
    let kept: BTreeMap<Label, f64> = p
        .ranked()
        .into_iter()
        .take(k)
        .map(|(l, m)| (l.clone(), m))
        .collect();
    normalize(&kept)
}

/// Integer-binned distribution; bins always sum to [`DISCRETE_BINS`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiscreteDist {
    bins: BTreeMap<Label, u32>,
}

impl DiscreteDist {
    pub fn new(bins: BTreeMap<Label, u32>) -> Result<Self, ProbError> {
        let sum: u32 = bins.values().sum();
        if sum != DISCRETE_BINS {
            return Err(ProbError::BadBinTotal { sum });
        }
        Ok(Self { bins })
    }

    pub fn bins(&self) -> &BTreeMap<Label, u32> {
        &self.bins
    }

    pub fn bin(&self, label: &Label) -> u32 {
        self.bins.get(label).copied().unwrap_or(0)
    }

    pub fn mass(&self, label: &Label) -> f64 {
        f64::from(self.bin(label)) / f64::from(DISCRETE_BINS)
    }

    pub fn to_prediction_set(&self) -> PredictionSet {
        let entries = self
            .bins
            .iter()
            .map(|(l, &b)| (l.clone(), f64::from(b) / f64::from(DISCRETE_BINS)))
            .collect();
        PredictionSet::from_raw_parts(entries, true)
    }
}

/// Maps a normalized set onto 1000 integer bins by largest-remainder
/// apportionment: floors first, then the leftover bins go to the largest
/// fractional parts (ties by label order).
pub fn discretize(p: &PredictionSet) -> Result<DiscreteDist, ProbError> {
    require_normalized(p)?;
    let scale = f64::from(DISCRETE_BINS);
    let mut bins = BTreeMap::new();
    let mut remainders = Vec::with_capacity(p.len());
    let mut assigned: u32 = 0;
    for (label, mass) in p.iter() {
        let exact = mass * scale;
        let floor = exact.floor();
        let bin = floor as u32;
        assigned += bin;
        bins.insert(label.clone(), bin);
        remainders.push((label.clone(), exact - floor));
    }
    remainders.sort_by(|(la, ra), (lb, rb)| rb.total_cmp(ra).then_with(|| la.cmp(lb)));
    // normalized input leaves fewer leftovers than labels, except for
    // floating-point slack on the sum
    let mut leftover = DISCRETE_BINS.saturating_sub(assigned) as usize;
    let mut i = 0;
    while leftover > 0 && !remainders.is_empty() {
        let label = &remainders[i % remainders.len()].0;
        *bins.get_mut(label).expect("label present") += 1;
        leftover -= 1;
        i += 1;
    }
    // a sum a hair above one can overshoot after flooring; trim smallest remainders
    let mut excess = bins.values().sum::<u32>().saturating_sub(DISCRETE_BINS);
    for (label, _) in remainders.iter().rev() {
        if excess == 0 {
            break;
        }
        let bin = bins.get_mut(label).expect("label present");
        if *bin > 0 {
            *bin -= 1;
            excess -= 1;
        }
    }
    DiscreteDist::new(bins)
}

/// Total-variation distance between two normalized sets, over the union of
/// their labels.
pub fn total_variation(p: &PredictionSet, q: &PredictionSet) -> f64 {
    let labels: BTreeSet<&Label> = p.labels().chain(q.labels()).collect();
    0.5 * labels
        .into_iter()
        .map(|l| (p.mass(l) - q.mass(l)).abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(pairs: &[(&str, f64)]) -> PredictionSet {
        PredictionSet::from_pairs(pairs).unwrap()
    }

    fn weights(pairs: &[(&str, f64)]) -> BTreeMap<Label, f64> {
        pairs
            .iter()
            .map(|(n, w)| (Label::new(n).unwrap(), *w))
            .collect()
    }

    fn uniform(n: usize) -> PredictionSet {
        let names: Vec<String> = (0..n).map(|i| format!("d{i}")).collect();
        let pairs: Vec<(&str, f64)> = names.iter().map(|s| (s.as_str(), 1.0)).collect();
        normalize(&weights(&pairs)).unwrap()
    }

    #[test]
    fn label_canonicalization() {
        assert_eq!(
            Label::new("  Dengue   Fever ").unwrap().as_str(),
            "dengue fever"
        );
        assert_eq!(Label::new("HCV").unwrap(), Label::new("hcv").unwrap());
        assert_eq!(Label::new("   "), Err(ProbError::EmptyLabel));
    }

    #[test]
    fn normalize_examples() {
        let p = normalize(&weights(&[("A", 2.0), ("B", 2.0)])).unwrap();
        assert_eq!(p.get("A"), Some(0.5));
        assert!(p.is_normalized());

        let p = normalize(&weights(&[("A", 0.8), ("B", 0.0)])).unwrap();
        assert_eq!(p.get("A"), Some(1.0));
        assert_eq!(p.get("B"), Some(0.0));

        // sum 0.8466
        let p = normalize(&weights(&[
            ("CHIKV", 0.4067),
            ("DF", 0.2933),
            ("Flu", 0.0533),
            ("ZIKV", 0.0933),
        ]))
        .unwrap();
        for (name, expected) in [
            ("CHIKV", 0.4803),
            ("DF", 0.3464),
            ("Flu", 0.0630),
            ("ZIKV", 0.1102),
        ] {
            assert!((p.get(name).unwrap() - expected).abs() < 1e-3, "{name}");
        }
    }

    #[test]
    fn normalize_rejects_zero_and_negative() {
        assert_eq!(
            normalize(&weights(&[("A", 0.0), ("B", 0.0)])),
            Err(ProbError::AllZeroWeights)
        );
        assert!(matches!(
            normalize(&weights(&[("A", -1.0)])),
            Err(ProbError::InvalidWeight { .. })
        ));
    }

    #[test]
    fn construction_invariants() {
        assert!(!set(&[("A", 0.6), ("B", 0.3)]).is_normalized());
        assert!(set(&[("A", 0.6), ("B", 0.4)]).is_normalized());
        assert!(matches!(
            PredictionSet::from_pairs(&[("A", 0.7), ("B", 0.4)]),
            Err(ProbError::MassSumExceedsOne { .. })
        ));
        assert!(matches!(
            PredictionSet::from_pairs(&[("A", 1.2)]),
            Err(ProbError::MassOutOfRange { .. })
        ));
    }

    #[test]
    fn entropy_examples() {
        assert!((shannon_entropy(&uniform(4)).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(shannon_entropy(&set(&[("A", 1.0)])).unwrap(), 0.0);
        let h = shannon_entropy(&set(&[("A", 0.75), ("B", 0.25)])).unwrap();
        assert!((h - 0.8113).abs() < 1e-4);
        assert!(matches!(
            shannon_entropy(&set(&[("A", 0.5)])),
            Err(ProbError::NotNormalized { .. })
        ));
    }

    #[test]
    fn mixture_examples() {
        let p_a = set(&[("A", 0.5), ("B", 0.5)]);
        let p_b = set(&[("A", 1.0)]);
        assert_eq!(mixture(&p_a, &p_b, 1.0).unwrap(), p_a);
        let m = mixture(&p_a, &p_b, 0.5).unwrap();
        assert_eq!(m.get("A"), Some(0.75));
        assert_eq!(m.get("B"), Some(0.25));
        assert_eq!(mixture(&p_a, &p_a, 0.5).unwrap(), p_a);
        assert_eq!(mixture(&p_a, &p_b, 1.5), Err(ProbError::InvalidAlpha(1.5)));
    }

    #[test]
    fn lower_bound_examples() {
        let p_a = set(&[("A", 0.5), ("B", 0.5)]);
        let p_b = set(&[("A", 1.0)]);
        let bound = entropy_lower_bound(&p_a, &p_b, 0.5).unwrap();
        assert!((bound - 0.5).abs() < 1e-12);
        let h_mix = shannon_entropy(&mixture(&p_a, &p_b, 0.5).unwrap()).unwrap();
        assert!((h_mix - 0.8113).abs() < 1e-4);
        assert!(h_mix >= bound);

        assert_eq!(
            entropy_lower_bound(&p_a, &p_a, 0.3).unwrap(),
            shannon_entropy(&p_a).unwrap()
        );

        // H_A = H_B + gap  =>  bound = H_B + alpha * gap
        let high = uniform(4);
        let low = set(&[("A", 0.75), ("B", 0.25)]);
        let h_low = shannon_entropy(&low).unwrap();
        let gap = shannon_entropy(&high).unwrap() - h_low;
        for alpha in [0.0, 0.25, 0.6, 1.0] {
            let bound = entropy_lower_bound(&high, &low, alpha).unwrap();
            assert!((bound - (h_low + alpha * gap)).abs() < 1e-12);
        }
    }

    #[test]
    fn gap_examples() {
        let p = set(&[("A", 0.75), ("B", 0.25)]);
        assert_eq!(entropy_gap(&p, &p).unwrap(), 0.0);
        assert!((entropy_gap(&uniform(4), &set(&[("A", 1.0)])).unwrap() - 2.0).abs() < 1e-12);
        let g = entropy_gap(&set(&[("A", 0.5), ("B", 0.5)]), &p).unwrap();
        assert!((g - 0.1887).abs() < 1e-4);
    }

    #[test]
    fn top_k_examples() {
        let p = set(&[("A", 0.6), ("B", 0.3), ("C", 0.1)]);
        let t = truncate_top_k(&p, 1).unwrap();
        assert_eq!(t, set(&[("A", 1.0)]));
        assert_eq!(truncate_top_k(&p, 3).unwrap(), p);
        assert_eq!(truncate_top_k(&p, 7).unwrap(), p);
        let tie = set(&[("B", 0.5), ("A", 0.5)]);
        assert_eq!(truncate_top_k(&tie, 1).unwrap(), set(&[("A", 1.0)]));
        assert_eq!(truncate_top_k(&p, 0), Err(ProbError::ZeroK));
    }

    #[test]
    fn discretize_examples() {
        let d = discretize(&set(&[("A", 1.0)])).unwrap();
        assert_eq!(d.bin(&Label::new("A").unwrap()), 1000);
        let d = discretize(&set(&[("A", 0.5), ("B", 0.5)])).unwrap();
        assert_eq!(d.bin(&Label::new("A").unwrap()), 500);
        assert_eq!(d.bin(&Label::new("B").unwrap()), 500);

        let third = 1.0 / 3.0;
        let d = discretize(&set(&[("A", third), ("B", third), ("C", third)])).unwrap();
        assert_eq!(d.bins().values().sum::<u32>(), 1000);
        assert!(d.bins().values().all(|&b| b == 333 || b == 334));
    }

    #[test]
    fn json_wire_format() {
        let p = set(&[("Hepatitis C", 0.6), ("normalized", 0.4)]);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(
            json,
            r#"{"normalized":true,"hepatitis c":0.6,"normalized":0.4}"#
        );
        let back: PredictionSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);

        let bad = r#"{"normalized":true,"a":0.5}"#;
        assert!(serde_json::from_str::<PredictionSet>(bad).is_err());
    }

    fn arb_weights() -> impl Strategy<Value = BTreeMap<Label, f64>> {
        prop::collection::vec(0.0f64..10.0, 1..10).prop_filter_map("positive total", |ws| {
            if ws.iter().sum::<f64>() <= 1e-6 {
                return None;
            }
            Some(
                ws.into_iter()
                    .enumerate()
                    .map(|(i, w)| (Label::new(&format!("l{i}")).unwrap(), w))
                    .collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(ws in arb_weights()) {
            let once = normalize(&ws).unwrap();
            let twice = normalize(&once.weights()).unwrap();
            for (label, mass) in once.iter() {
                prop_assert!((mass - twice.mass(label)).abs() < 1e-12);
            }
            prop_assert!((once.total_mass() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn entropy_within_bounds(ws in arb_weights()) {
            let p = normalize(&ws).unwrap();
            let h = shannon_entropy(&p).unwrap();
            prop_assert!(h >= 0.0);
            prop_assert!(h <= (p.len() as f64).log2() + 1e-9);
        }

        #[test]
        fn mixture_support_is_union(a in arb_weights(), b in arb_weights(), alpha in 0.0f64..=1.0) {
            let p = normalize(&a).unwrap();
            // shift b's labels so supports only partly overlap
            let q = normalize(&b.into_iter().map(|(l, w)| (Label::new(&format!("{l}x")).unwrap(), w)).chain([(Label::new("l0").unwrap(), 1.0)]).collect()).unwrap();
            let m = mixture(&p, &q, alpha).unwrap();
            let expected: BTreeSet<&Label> = p.labels().chain(q.labels()).collect();
            let got: BTreeSet<&Label> = m.labels().collect();
            prop_assert_eq!(got, expected);
        }

        #[test]
        fn discretize_sums_to_thousand(ws in arb_weights()) {
            let p = normalize(&ws).unwrap();
            let d = discretize(&p).unwrap();
            prop_assert_eq!(d.bins().values().sum::<u32>(), DISCRETE_BINS);
            for (label, mass) in p.iter() {
                // within one bin of the exact value
                prop_assert!((d.mass(label) - mass).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn discretize_round_trip_half_bin_when_rounding_sums_exactly() {
        let p = set(&[("A", 0.1234), ("B", 0.4321), ("C", 0.4445)]);
        let d = discretize(&p).unwrap();
        for (label, mass) in p.iter() {
            assert!((d.mass(label) - mass).abs() <= 0.0005 + 1e-12);
        }
    }
}

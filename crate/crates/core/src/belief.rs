//! Belief-function arithmetic over a finite frame of community labels.
//!
//! [`SimpleMass`] is the restricted family whose focal elements are the
//! singletons and the whole frame; it is what label propagation builds and
//! combines. [`PowerSetMass`] is a general mass over subsets (bitmasks) and
//! backs the brute-force reference combination.

use std::collections::BTreeMap;

use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Allowed deviation of a mass total from 1 before it is treated as a bug.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Largest frame the power-set representation accepts.
pub const MAX_POWERSET_LABELS: usize = 16;

/// Ordered set of distinct community labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelFrame {
    labels: Vec<String>,
}

impl LabelFrame {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::FrameMismatch("a frame needs at least one label".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::FrameMismatch(format!("duplicate label `{l}`")));
            }
        }
        Ok(LabelFrame { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, k: usize) -> &str {
        &self.labels[k]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn require(&self, label: &str) -> Result<usize> {
        self.index_of(label)
            .ok_or_else(|| Error::FrameMismatch(format!("label `{label}` is not in the frame")))
    }

    /// Bitmask of the whole frame.
    pub fn full_set(&self) -> u32 {
        full_mask(self.len())
    }
}

fn full_mask(c: usize) -> u32 {
    if c >= 32 {
        u32::MAX
    } else {
        (1u32 << c) - 1
    }
}

fn check_total(total: f64) -> Result<()> {
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE || !total.is_finite() {
        return Err(Error::Unnormalized { sum: total });
    }
    Ok(())
}

/// Mass function with focal elements among the singletons and Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleMass {
    singletons: Vec<f64>,
    omega: f64,
}

impl SimpleMass {
    /// Validates and renormalizes. Negative entries or totals further than
    /// [`NORMALIZATION_TOLERANCE`] from 1 are rejected.
    pub fn new(singletons: Vec<f64>, omega: f64) -> Result<Self> {
        if singletons.is_empty() {
            return Err(Error::FrameMismatch("empty frame".into()));
        }
        if singletons.iter().chain(std::iter::once(&omega)).any(|&m| m.is_nan() || m < 0.0) {
            return Err(Error::param("mass", "masses must be non-negative numbers"));
        }
        let total: f64 = singletons.iter().sum::<f64>() + omega;
        check_total(total)?;
        let mut m = SimpleMass { singletons, omega };
        m.scale(1.0 / total);
        Ok(m)
    }

    fn scale(&mut self, factor: f64) {
        for s in &mut self.singletons {
            *s *= factor;
        }
        self.omega *= factor;
    }

    /// Total ignorance: all mass on Ω.
    pub fn vacuous(frame: &LabelFrame) -> Self {
        Self::vacuous_of(frame.len())
    }

    pub fn vacuous_of(c: usize) -> Self {
        SimpleMass {
            singletons: vec![0.0; c],
            omega: 1.0,
        }
    }

    /// All mass on the singleton `{k}`.
    pub fn categorical(frame: &LabelFrame, k: usize) -> Result<Self> {
        if k >= frame.len() {
            return Err(Error::FrameMismatch(format!(
                "label index {k} outside frame of {} labels",
                frame.len()
            )));
        }
        let mut singletons = vec![0.0; frame.len()];
        singletons[k] = 1.0;
        Ok(SimpleMass {
            singletons,
            omega: 0.0,
        })
    }

    pub fn frame_size(&self) -> usize {
        self.singletons.len()
    }

    pub fn singleton(&self, k: usize) -> f64 {
        self.singletons[k]
    }

    pub fn singletons(&self) -> &[f64] {
        &self.singletons
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn total(&self) -> f64 {
        self.singletons.iter().sum::<f64>() + self.omega
    }

    pub fn is_vacuous(&self) -> bool {
        self.singletons.iter().all(|&s| s == 0.0)
    }

    /// Largest singleton mass and every label attaining it, in frame order.
    pub fn best_singletons(&self) -> (f64, Vec<usize>) {
        let best = self.singletons.iter().copied().fold(0.0f64, f64::max);
        let labels = self
            .singletons
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s == best)
            .map(|(k, _)| k)
            .collect();
        (best, labels)
    }

    /// Reliability discounting: singleton masses scale by `alpha`, the
    /// removed mass moves to Ω.
    pub fn discount(&self, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::param("alpha", format!("{alpha} is outside [0, 1]")));
        }
        let specific: f64 = self.singletons.iter().sum();
        Ok(SimpleMass {
            singletons: self.singletons.iter().map(|s| alpha * s).collect(),
            omega: self.omega + (1.0 - alpha) * specific,
        })
    }

    /// Dempster-combines `other` into `self`. Returns `false`, leaving
    /// `self` untouched, on total conflict.
    fn absorb(&mut self, other: &SimpleMass) -> bool {
        let mut total = self.omega * other.omega;
        let mut fused = Vec::with_capacity(self.singletons.len());
        for (a, b) in self.singletons.iter().zip(&other.singletons) {
            let u = a * b + a * other.omega + self.omega * b;
            total += u;
            fused.push(u);
        }
        if total <= 0.0 {
            return false;
        }
        for (s, u) in self.singletons.iter_mut().zip(fused) {
            *s = u / total;
        }
        self.omega = self.omega * other.omega / total;
        true
    }

    /// Combines a source carrying mass `alpha` on `{k}` and `1 - alpha` on Ω.
    /// Equivalent to `absorb(categorical(k).discount(alpha))` without
    /// allocating. Returns `false` on total conflict.
    pub(crate) fn absorb_discounted_categorical(&mut self, k: usize, alpha: f64) -> bool {
        let keep = 1.0 - alpha;
        let boosted = self.singletons[k] + self.omega * alpha;
        let mut total = boosted + self.omega * keep;
        for (j, s) in self.singletons.iter().enumerate() {
            if j != k {
                total += s * keep;
            }
        }
        if total <= 0.0 {
            return false;
        }
        for (j, s) in self.singletons.iter_mut().enumerate() {
            *s = if j == k { boosted } else { *s * keep } / total;
        }
        self.omega = self.omega * keep / total;
        true
    }

    /// Diagnostic record `{label: mass, ..., "OMEGA": mass}` in frame order.
    pub fn to_json(&self, frame: &LabelFrame) -> Value {
        let mut map = Map::new();
        for (label, m) in frame.labels().iter().zip(&self.singletons) {
            map.insert(label.clone(), Value::from(*m));
        }
        map.insert("OMEGA".into(), Value::from(self.omega));
        Value::Object(map)
    }
}

fn supported_labels<'a>(frame: &LabelFrame, masses: impl Iterator<Item = &'a SimpleMass>) -> Vec<String> {
    let mut seen = vec![false; frame.len()];
    for m in masses {
        for (k, &s) in m.singletons.iter().enumerate() {
            if s > 0.0 {
                seen[k] = true;
            }
        }
    }
    seen.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(k, _)| frame.label(k).to_string())
        .collect()
}

/// Normalized Dempster combination of masses on the restricted family.
///
/// Folds sources pairwise with the closed form
/// `u({k}) = a_k b_k + a_k b_Ω + a_Ω b_k`, `u(Ω) = a_Ω b_Ω`, renormalizing
/// after each step, which keeps every intermediate in `[0, 1]`.
pub fn combine(frame: &LabelFrame, masses: &[SimpleMass]) -> Result<SimpleMass> {
    let first = masses
        .first()
        .ok_or_else(|| Error::param("masses", "at least one mass is required"))?;
    for m in masses {
        if m.frame_size() != frame.len() {
            return Err(Error::FrameMismatch(format!(
                "mass over {} labels combined in a frame of {}",
                m.frame_size(),
                frame.len()
            )));
        }
    }
    let mut acc = first.clone();
    for m in &masses[1..] {
        if !acc.absorb(m) {
            return Err(Error::TotalConflict {
                labels: supported_labels(frame, masses.iter()),
                node: None,
            });
        }
    }
    Ok(acc)
}

/// General mass function over subsets of a frame of at most
/// [`MAX_POWERSET_LABELS`] labels, stored sparsely by bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSetMass {
    labels: usize,
    focal: BTreeMap<u32, f64>,
}

impl PowerSetMass {
    pub fn new(frame: &LabelFrame, entries: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let c = frame.len();
        if c > MAX_POWERSET_LABELS {
            return Err(Error::param(
                "frame",
                format!("power-set masses support at most {MAX_POWERSET_LABELS} labels"),
            ));
        }
        let full = full_mask(c);
        let mut focal = BTreeMap::new();
        for (set, m) in entries {
            if set & !full != 0 {
                return Err(Error::FrameMismatch(format!("subset {set:#b} is outside the frame")));
            }
            if m.is_nan() || m < 0.0 {
                return Err(Error::param("mass", "masses must be non-negative numbers"));
            }
            if m > 0.0 {
                *focal.entry(set).or_insert(0.0) += m;
            }
        }
        let total: f64 = focal.values().sum();
        check_total(total)?;
        for v in focal.values_mut() {
            *v /= total;
        }
        Ok(PowerSetMass { labels: c, focal })
    }

    pub fn from_simple(m: &SimpleMass) -> Self {
        let c = m.frame_size();
        let mut focal = BTreeMap::new();
        for (k, &s) in m.singletons().iter().enumerate() {
            if s > 0.0 {
                focal.insert(1u32 << k, s);
            }
        }
        if m.omega() > 0.0 {
            focal.insert(full_mask(c), m.omega());
        }
        PowerSetMass { labels: c, focal }
    }

    pub fn vacuous(frame: &LabelFrame) -> Self {
        PowerSetMass {
            labels: frame.len(),
            focal: BTreeMap::from([(frame.full_set(), 1.0)]),
        }
    }

    pub fn get(&self, set: u32) -> f64 {
        self.focal.get(&set).copied().unwrap_or(0.0)
    }

    /// Focal elements (positive mass) in ascending bitmask order.
    pub fn focal_elements(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.focal.iter().map(|(&s, &m)| (s, m))
    }

    pub fn total(&self) -> f64 {
        self.focal.values().sum()
    }

    fn check_subset(&self, set: u32) -> Result<()> {
        if set & !full_mask(self.labels) != 0 {
            return Err(Error::FrameMismatch(format!("subset {set:#b} is outside the frame")));
        }
        Ok(())
    }

    /// Credibility: total mass of non-empty subsets of `set`.
    pub fn bel(&self, set: u32) -> Result<f64> {
        self.check_subset(set)?;
        Ok(self
            .focal
            .iter()
            .filter(|(&b, _)| b != 0 && b & !set == 0)
            .map(|(_, m)| m)
            .sum())
    }

    /// Plausibility: total mass of subsets meeting `set`.
    pub fn pl(&self, set: u32) -> Result<f64> {
        self.check_subset(set)?;
        Ok(self
            .focal
            .iter()
            .filter(|(&b, _)| b & set != 0)
            .map(|(_, m)| m)
            .sum())
    }

    /// Same function in the restricted representation, if every focal
    /// element is a singleton or Ω.
    pub fn to_simple(&self) -> Option<SimpleMass> {
        let full = full_mask(self.labels);
        let mut singletons = vec![0.0; self.labels];
        let mut omega = 0.0;
        for (&set, &m) in &self.focal {
            if set == full {
                omega += m;
            } else if set.count_ones() == 1 {
                singletons[set.trailing_zeros() as usize] += m;
            } else {
                return None;
            }
        }
        Some(SimpleMass { singletons, omega })
    }
}

/// Reference Dempster combination by exhaustive enumeration of focal-set
/// tuples: every tuple contributes the product of its masses to the
/// intersection of its sets; the mass left off the empty set is then
/// renormalized to 1.
pub fn combine_powerset_oracle(frame: &LabelFrame, masses: &[PowerSetMass]) -> Result<PowerSetMass> {
    if masses.is_empty() {
        return Err(Error::param("masses", "at least one mass is required"));
    }
    if masses.iter().any(|m| m.labels != frame.len()) {
        return Err(Error::FrameMismatch("masses defined on different frames".into()));
    }
    let lists: Vec<Vec<(u32, f64)>> = masses.iter().map(|m| m.focal_elements().collect()).collect();
    let full = frame.full_set();
    let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
    let mut cursor = vec![0usize; lists.len()];
    'tuples: loop {
        let mut set = full;
        let mut product = 1.0;
        for (list, &pos) in lists.iter().zip(&cursor) {
            set &= list[pos].0;
            product *= list[pos].1;
        }
        *acc.entry(set).or_insert(0.0) += product;

        for slot in (0..cursor.len()).rev() {
            cursor[slot] += 1;
            if cursor[slot] < lists[slot].len() {
                continue 'tuples;
            }
            cursor[slot] = 0;
        }
        break;
    }
    // Summing the surviving products equals `1 - m(∅)` for normalized
    // inputs without the cancellation when the conflict is close to 1.
    acc.remove(&0);
    let normalizer: f64 = acc.values().sum();
    if normalizer <= 0.0 || acc.is_empty() {
        let mut labels = Vec::new();
        for m in masses {
            for (set, _) in m.focal_elements() {
                for k in 0..frame.len() {
                    let name = frame.label(k).to_string();
                    if set & (1 << k) != 0 && set != full && !labels.contains(&name) {
                        labels.push(name);
                    }
                }
            }
        }
        return Err(Error::TotalConflict { labels, node: None });
    }
    for v in acc.values_mut() {
        *v /= normalizer;
    }
    acc.retain(|_, v| *v > 0.0);
    Ok(PowerSetMass {
        labels: frame.len(),
        focal: acc,
    })
}

//! State descriptors, progressors and values over a feature pool, plus the
//! pool preprocessing rules.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::features::{Feature, FeatureKind, FeaturePool, Valuations};

#[derive(Debug, thiserror::Error)]
pub enum StateFnError {
    #[error("preprocessing {0} removed every feature")]
    TooStrict(Phi),
    #[error("unknown preprocessing configuration {0} (expected phi1..phi4)")]
    UnknownPhi(String),
}

/// A descriptor with the truth value it must take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignedDescriptor {
    pub feature: usize,
    pub positive: bool,
}

impl SignedDescriptor {
    pub fn new(feature: usize, positive: bool) -> SignedDescriptor {
        SignedDescriptor { feature, positive }
    }

    /// `value` is the feature's value in the state.
    pub fn holds(&self, value: u32) -> bool {
        (value > 0) == self.positive
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Decrease,
    Increase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Progressor {
    pub feature: usize,
    pub direction: Direction,
}

impl Progressor {
    pub fn holds(&self, before: u32, after: u32) -> bool {
        match self.direction {
            Direction::Decrease => after < before,
            Direction::Increase => after > before,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StateFunctionSet {
    pub features: Vec<Feature>,
    /// Feature index per descriptor; descriptor `i` uses feature `i`.
    pub descriptors: Vec<usize>,
    pub progressors: Vec<Progressor>,
    /// Feature index per state value.
    pub values: Vec<usize>,
}

impl StateFunctionSet {
    pub fn from_features(features: Vec<Feature>) -> StateFunctionSet {
        let descriptors = (0..features.len()).collect();
        let mut progressors = Vec::new();
        let mut values = Vec::new();
        for (i, f) in features.iter().enumerate() {
            if f.kind == FeatureKind::Numeric {
                progressors.push(Progressor {
                    feature: i,
                    direction: Direction::Decrease,
                });
                progressors.push(Progressor {
                    feature: i,
                    direction: Direction::Increase,
                });
                values.push(i);
            }
        }
        StateFunctionSet {
            features,
            descriptors,
            progressors,
            values,
        }
    }

    /// `(complexity, id)`, the tie-break order for selections.
    pub fn rank(&self, feature: usize) -> (usize, &str) {
        let f = &self.features[feature];
        (f.complexity(), f.id())
    }
}

pub fn derive(pool: &FeaturePool) -> StateFunctionSet {
    StateFunctionSet::from_features(pool.features.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phi {
    Phi1,
    Phi2,
    Phi3,
    Phi4,
}

impl Phi {
    pub fn rules(self) -> &'static [u8] {
        match self {
            Phi::Phi1 => &[],
            Phi::Phi2 => &[3, 4],
            Phi::Phi3 => &[2, 3, 4],
            Phi::Phi4 => &[1, 2, 3, 4],
        }
    }
}

impl FromStr for Phi {
    type Err = StateFnError;

    fn from_str(s: &str) -> Result<Phi, StateFnError> {
        match s {
            "phi1" => Ok(Phi::Phi1),
            "phi2" => Ok(Phi::Phi2),
            "phi3" => Ok(Phi::Phi3),
            "phi4" => Ok(Phi::Phi4),
            _ => Err(StateFnError::UnknownPhi(s.to_string())),
        }
    }
}

impl fmt::Display for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            Phi::Phi1 => 1,
            Phi::Phi2 => 2,
            Phi::Phi3 => 3,
            Phi::Phi4 => 4,
        };
        write!(f, "phi{n}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Removal {
    pub feature: usize,
    pub rule: u8,
    /// Surviving feature with equal (rule 3) or opposite (rule 4) truth values.
    pub witness: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct PreprocessReport {
    /// Indices into the input pool, in pool order.
    pub kept: Vec<usize>,
    pub removed: Vec<Removal>,
}

fn truth_row(v: &Valuations, f: usize) -> Vec<bool> {
    v.row(f).iter().map(|&x| x > 0).collect()
}

fn constant(xs: &[u32]) -> bool {
    xs.windows(2).all(|w| (w[0] > 0) == (w[1] > 0))
}

/// Applies the rules of `phi`. Rules 1 and 2 skip trajectories too short to
/// show a change; rules 3 and 4 are applied jointly so every witness
/// survives.
pub fn preprocess_report(pool: &FeaturePool, phi: Phi) -> Result<PreprocessReport, StateFnError> {
    let v = &pool.valuations;
    let rules = phi.rules();
    let mut report = PreprocessReport::default();
    let mut alive = Vec::new();
    for f in 0..pool.len() {
        let mut rule = None;
        for t in 0..v.num_trajectories() {
            let s = v.series(f, t);
            if rules.contains(&1) && s.len() >= 2 && constant(s) {
                rule = Some(1);
                break;
            }
            if rules.contains(&2) && s.len() >= 3 && constant(&s[1..]) {
                rule = Some(2);
                break;
            }
        }
        match rule {
            Some(rule) => report.removed.push(Removal {
                feature: f,
                rule,
                witness: None,
            }),
            None => alive.push(f),
        }
    }
    if rules.contains(&3) {
        // Group by truth row up to complement; the best-ranked member stays.
        let rank = |f: usize| {
            (
                pool.features[f].complexity(),
                pool.features[f].id().to_string(),
            )
        };
        let mut groups: HashMap<Vec<bool>, usize> = HashMap::new();
        for &f in &alive {
            let row = truth_row(v, f);
            let key = if row.first() == Some(&true) {
                row.iter().map(|b| !b).collect()
            } else {
                row
            };
            groups
                .entry(key)
                .and_modify(|best| {
                    if rank(f) < rank(*best) {
                        *best = f;
                    }
                })
                .or_insert(f);
        }
        let mut kept = Vec::new();
        for &f in &alive {
            let row = truth_row(v, f);
            let flipped = row.first() == Some(&true);
            let key = if flipped {
                row.iter().map(|b| !b).collect()
            } else {
                row.clone()
            };
            let best = groups[&key];
            if best == f {
                kept.push(f);
            } else {
                let rule = if truth_row(v, best) == row { 3 } else { 4 };
                report.removed.push(Removal {
                    feature: f,
                    rule,
                    witness: Some(best),
                });
            }
        }
        alive = kept;
    }
    if alive.is_empty() {
        return Err(StateFnError::TooStrict(phi));
    }
    report.removed.sort_by_key(|r| r.feature);
    report.kept = alive;
    Ok(report)
}

pub fn preprocess(pool: &FeaturePool, phi: Phi) -> Result<FeaturePool, StateFnError> {
    let report = preprocess_report(pool, phi)?;
    Ok(pool.select(&report.kept))
}

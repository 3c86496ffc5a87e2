//! Description-logic features: syntax, evaluation and pool generation.

mod eval;
mod expr;
mod generate;

use std::fmt;
use std::time::Duration;

use crate::pddl::{State, Universe};
use crate::trajectory::TrajectorySet;

pub use eval::{eval_concept, eval_role};
pub use expr::{parse_concept, parse_role, Concept, Role};
pub use generate::generate_pool;

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("cannot parse feature {text:?} at offset {offset}: {msg}")]
    Parse {
        text: String,
        offset: usize,
        msg: String,
    },
    #[error("feature generation produced no features")]
    EmptyPool,
    #[error("no training states")]
    NoStates,
    #[error("unknown feature configuration {0} (expected b1..b5)")]
    UnknownPreset(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureKind {
    Boolean,
    Numeric,
}

/// `n_count(C)` or `b_nonempty(C)`.
#[derive(Debug, Clone)]
pub struct Feature {
    pub kind: FeatureKind,
    pub concept: Concept,
    id: String,
    complexity: usize,
}

impl PartialEq for Feature {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Feature {}

impl std::hash::Hash for Feature {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.id.hash(state)
    }
}

impl Feature {
    fn new(kind: FeatureKind, concept: Concept) -> Feature {
        let id = match kind {
            FeatureKind::Numeric => format!("n_count({concept})"),
            FeatureKind::Boolean => format!("b_nonempty({concept})"),
        };
        let complexity = concept.complexity();
        Feature {
            kind,
            concept,
            id,
            complexity,
        }
    }

    pub fn numeric(concept: Concept) -> Feature {
        Feature::new(FeatureKind::Numeric, concept)
    }

    pub fn boolean(concept: Concept) -> Feature {
        Feature::new(FeatureKind::Boolean, concept)
    }

    pub fn parse(text: &str) -> Result<Feature, FeatureError> {
        let mut r = expr::Reader::new(text);
        let head = r.head()?;
        let kind = match head {
            "n_count" => FeatureKind::Numeric,
            "b_nonempty" => FeatureKind::Boolean,
            other => {
                return Err(FeatureError::Parse {
                    text: text.to_string(),
                    offset: 0,
                    msg: format!("unknown feature constructor {other}"),
                })
            }
        };
        r.open()?;
        let c = r.concept()?;
        r.close()?;
        r.finish()?;
        Ok(Feature::new(kind, c))
    }

    /// Canonical string; unique per expression.
    pub fn id(&self) -> &str {
        &self.id
    }

    /// Node count of the concept tree.
    pub fn complexity(&self) -> usize {
        self.complexity
    }

    /// Count of the extension, or 0/1 for Boolean features.
    pub fn evaluate(&self, u: &Universe, s: &State) -> u32 {
        let n = eval_concept(&self.concept, u, s).count_ones(..) as u32;
        match self.kind {
            FeatureKind::Numeric => n,
            FeatureKind::Boolean => u32::from(n > 0),
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationConfig {
    pub name: String,
    pub complexity_limit: usize,
    pub time_limit: Duration,
    pub feature_limit: usize,
}

impl GenerationConfig {
    /// Presets `b1`..`b5`.
    pub fn preset(name: &str) -> Result<GenerationConfig, FeatureError> {
        let (c, f) = match name {
            "b1" => (7, 1000),
            "b2" => (9, 4000),
            "b3" => (11, 5000),
            "b4" => (11, 10000),
            "b5" => (15, 10000),
            _ => return Err(FeatureError::UnknownPreset(name.to_string())),
        };
        Ok(GenerationConfig {
            name: name.to_string(),
            complexity_limit: c,
            time_limit: Duration::from_secs(3600),
            feature_limit: f,
        })
    }

    pub fn accepts(&self, f: &Feature) -> bool {
        f.complexity() <= self.complexity_limit
    }
}

/// Feature values on every training state, `values[feature][flat state]`
/// with trajectories laid out back to back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Valuations {
    traj_lens: Vec<usize>,
    offsets: Vec<usize>,
    values: Vec<Vec<u32>>,
}

impl Valuations {
    pub fn new(traj_lens: Vec<usize>, values: Vec<Vec<u32>>) -> Valuations {
        let mut offsets = Vec::with_capacity(traj_lens.len());
        let mut acc = 0;
        for &l in &traj_lens {
            offsets.push(acc);
            acc += l;
        }
        assert!(
            values.iter().all(|v| v.len() == acc),
            "valuation row length mismatch"
        );
        Valuations {
            traj_lens,
            offsets,
            values,
        }
    }

    /// Per-trajectory tables `table[t][k][f]`.
    pub fn from_tables(tables: &[Vec<Vec<u32>>], num_features: usize) -> Valuations {
        let lens = tables.iter().map(Vec::len).collect();
        let values = (0..num_features)
            .map(|f| {
                tables
                    .iter()
                    .flat_map(|t| t.iter().map(move |row| row[f]))
                    .collect()
            })
            .collect();
        Valuations::new(lens, values)
    }

    pub fn compute(features: &[Feature], set: &TrajectorySet) -> Valuations {
        let lens = set.trajectories.iter().map(|t| t.len()).collect();
        let values = features
            .iter()
            .map(|f| {
                set.trajectories
                    .iter()
                    .flat_map(|t| t.states.iter().map(move |s| f.evaluate(&t.universe, s)))
                    .collect()
            })
            .collect();
        Valuations::new(lens, values)
    }

    pub fn num_features(&self) -> usize {
        self.values.len()
    }

    pub fn num_trajectories(&self) -> usize {
        self.traj_lens.len()
    }

    pub fn traj_len(&self, t: usize) -> usize {
        self.traj_lens[t]
    }

    pub fn traj_lens(&self) -> &[usize] {
        &self.traj_lens
    }

    pub fn value(&self, f: usize, t: usize, k: usize) -> u32 {
        self.values[f][self.offsets[t] + k]
    }

    pub fn holds(&self, f: usize, t: usize, k: usize) -> bool {
        self.value(f, t, k) > 0
    }

    /// All values of feature `f` along trajectory `t`.
    pub fn series(&self, f: usize, t: usize) -> &[u32] {
        &self.values[f][self.offsets[t]..self.offsets[t] + self.traj_lens[t]]
    }

    pub fn row(&self, f: usize) -> &[u32] {
        &self.values[f]
    }

    pub fn select(&self, features: &[usize]) -> Valuations {
        Valuations {
            traj_lens: self.traj_lens.clone(),
            offsets: self.offsets.clone(),
            values: features.iter().map(|&f| self.values[f].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FeaturePool {
    pub features: Vec<Feature>,
    pub config: GenerationConfig,
    pub valuations: Valuations,
}

impl FeaturePool {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Sub-pool keeping the given indices in the given order.
    pub fn select(&self, keep: &[usize]) -> FeaturePool {
        FeaturePool {
            features: keep.iter().map(|&i| self.features[i].clone()).collect(),
            config: self.config.clone(),
            valuations: self.valuations.select(keep),
        }
    }

    /// One `id complexity` line per feature.
    pub fn export(&self) -> String {
        self.features
            .iter()
            .map(|f| format!("{} {}\n", f.id(), f.complexity()))
            .collect()
    }
}

#[cfg(test)]
mod tests;

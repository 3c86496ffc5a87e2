//! Generalized-landmark graphs: discovery from trajectories, satisfaction
//! checking and serialization.

mod chain;
mod oracle;
mod walk;

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::features::{Feature, FeatureError};
use crate::pddl::{State, Universe};
use crate::statefns::{Direction, Progressor, SignedDescriptor, StateFunctionSet};
use crate::trajectory::Trajectory;

pub use chain::{discover_graph, discover_loop, discover_next_landmark, Discovery};
pub use oracle::{brute_force_discover, OracleCaps};
pub use walk::{accepts, exit_holds, expected_count, simulate, StepEvent, Walk};

#[derive(Debug, thiserror::Error)]
pub enum DiscoveryError {
    #[error("no generalized landmark found")]
    Failed,
    #[error("oracle cap exceeded: {0}")]
    CapExceeded(String),
    #[error("graph file: {0}")]
    Format(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

/// Conjunction of signed descriptors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Landmark {
    pub descriptors: Vec<SignedDescriptor>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LoopEdge {
    pub from: usize,
    pub to: usize,
    pub exit: Vec<SignedDescriptor>,
    pub progress: Vec<Progressor>,
    pub counter: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default)]
    pub domain_fingerprint: String,
    #[serde(default)]
    pub generation: Option<String>,
    #[serde(default)]
    pub preprocess: Option<String>,
    /// `task_id:sha256` per training trajectory.
    #[serde(default)]
    pub trajectories: Vec<String>,
}

/// Landmark chain with loop edges. Descriptor, progressor and counter
/// indices point into `features`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    pub features: Vec<Feature>,
    pub nodes: Vec<Landmark>,
    pub loops: Vec<LoopEdge>,
    pub provenance: Provenance,
}

impl Graph {
    pub fn loop_from(&self, node: usize) -> Option<&LoopEdge> {
        self.loops.iter().find(|l| l.from == node)
    }

    /// Drops unused features (sorted by id) and renumbers references.
    pub fn compact(mut self) -> Graph {
        let mut used: Vec<usize> = Vec::new();
        for n in &self.nodes {
            used.extend(n.descriptors.iter().map(|d| d.feature));
        }
        for l in &self.loops {
            used.extend(l.exit.iter().map(|d| d.feature));
            used.extend(l.progress.iter().map(|p| p.feature));
            used.extend(&l.counter);
        }
        used.sort_by(|&a, &b| self.features[a].id().cmp(self.features[b].id()));
        used.dedup();
        let map: BTreeMap<usize, usize> = used
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new))
            .collect();
        let features = used.iter().map(|&i| self.features[i].clone()).collect();
        for n in &mut self.nodes {
            for d in &mut n.descriptors {
                d.feature = map[&d.feature];
            }
        }
        for l in &mut self.loops {
            for d in &mut l.exit {
                d.feature = map[&d.feature];
            }
            for p in &mut l.progress {
                p.feature = map[&p.feature];
            }
            for c in &mut l.counter {
                *c = map[c];
            }
        }
        self.features = features;
        self
    }

    /// Values of every graph feature in `s`.
    pub fn values(&self, u: &Universe, s: &State) -> Vec<u32> {
        self.features.iter().map(|f| f.evaluate(u, s)).collect()
    }

    /// Each loop-span node counts `c` times, every other node once.
    pub fn h_max(&self, counts: &[u32]) -> u32 {
        (0..self.nodes.len())
            .map(|n| {
                self.loops
                    .iter()
                    .zip(counts)
                    .find(|(l, _)| l.to <= n && n <= l.from)
                    .map_or(1, |(_, &c)| c)
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatisfyTrace {
    pub satisfied: bool,
    /// Per node, the accepting state indices.
    pub occurrences: Vec<Vec<usize>>,
    /// Per loop, the required loop-landmark acceptances (if defined).
    pub expected: Vec<Option<u32>>,
}

/// Checks a value table `value(k, f)` of `len` states against the graph.
pub fn satisfies_values(
    nodes: &[Landmark],
    loops: &[LoopEdge],
    len: usize,
    value: impl Fn(usize, usize) -> u32,
) -> SatisfyTrace {
    let (walk, occurrences) = simulate(nodes, loops, len, &value);
    let expected: Vec<Option<u32>> = loops
        .iter()
        .map(|l| expected_count(l, |f| value(0, f)))
        .collect();
    let counts_ok = loops
        .iter()
        .zip(&expected)
        .all(|(l, e)| e.is_some_and(|e| occurrences[l.from].len() == e as usize));
    SatisfyTrace {
        satisfied: walk.cursor == nodes.len() && counts_ok,
        occurrences,
        expected,
    }
}

pub fn satisfies(graph: &Graph, t: &Trajectory) -> SatisfyTrace {
    let table: Vec<Vec<u32>> = t
        .states
        .iter()
        .map(|s| graph.values(&t.universe, s))
        .collect();
    satisfies_values(&graph.nodes, &graph.loops, t.len(), |k, f| table[k][f])
}

#[derive(Serialize, Deserialize)]
struct JsonDescriptor {
    feature: String,
    polarity: String,
}

#[derive(Serialize, Deserialize)]
struct JsonNode {
    descriptors: Vec<JsonDescriptor>,
}

#[derive(Serialize, Deserialize)]
struct JsonProgressor {
    feature: String,
    direction: Direction,
}

#[derive(Serialize, Deserialize)]
struct JsonLoop {
    from: usize,
    to: usize,
    exit: Vec<JsonDescriptor>,
    progression: Vec<JsonProgressor>,
    counter: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct JsonGraph {
    nodes: Vec<JsonNode>,
    loop_edges: Vec<JsonLoop>,
    provenance: Provenance,
}

impl Graph {
    pub fn to_json(&self) -> String {
        let id = |f: usize| self.features[f].id().to_string();
        let desc = |d: &SignedDescriptor| JsonDescriptor {
            feature: id(d.feature),
            polarity: if d.positive { "positive" } else { "negative" }.to_string(),
        };
        let g = JsonGraph {
            nodes: self
                .nodes
                .iter()
                .map(|n| JsonNode {
                    descriptors: n.descriptors.iter().map(desc).collect(),
                })
                .collect(),
            loop_edges: self
                .loops
                .iter()
                .map(|l| JsonLoop {
                    from: l.from,
                    to: l.to,
                    exit: l.exit.iter().map(desc).collect(),
                    progression: l
                        .progress
                        .iter()
                        .map(|p| JsonProgressor {
                            feature: id(p.feature),
                            direction: p.direction,
                        })
                        .collect(),
                    counter: l.counter.iter().map(|&c| id(c)).collect(),
                })
                .collect(),
            provenance: self.provenance.clone(),
        };
        serde_json::to_string_pretty(&g).expect("serializable") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Graph, DiscoveryError> {
        let g: JsonGraph =
            serde_json::from_str(text).map_err(|e| DiscoveryError::Format(e.to_string()))?;
        let mut features: Vec<Feature> = Vec::new();
        let mut index = |s: &str| -> Result<usize, DiscoveryError> {
            if let Some(i) = features.iter().position(|f| f.id() == s) {
                return Ok(i);
            }
            let f = Feature::parse(s)?;
            if let Some(i) = features.iter().position(|g| g.id() == f.id()) {
                return Ok(i);
            }
            features.push(f);
            Ok(features.len() - 1)
        };
        let desc =
            |d: &JsonDescriptor, index: &mut dyn FnMut(&str) -> Result<usize, DiscoveryError>| {
                let positive = match d.polarity.as_str() {
                    "positive" => true,
                    "negative" => false,
                    other => return Err(DiscoveryError::Format(format!("bad polarity {other}"))),
                };
                Ok(SignedDescriptor::new(index(&d.feature)?, positive))
            };
        let mut nodes = Vec::new();
        for n in &g.nodes {
            let descriptors = n
                .descriptors
                .iter()
                .map(|d| desc(d, &mut index))
                .collect::<Result<Vec<_>, _>>()?;
            if descriptors.is_empty() {
                return Err(DiscoveryError::Format(
                    "landmark without descriptors".into(),
                ));
            }
            nodes.push(Landmark { descriptors });
        }
        let mut loops = Vec::new();
        for l in &g.loop_edges {
            if l.to >= l.from || l.from >= nodes.len() {
                return Err(DiscoveryError::Format(format!(
                    "bad loop edge {} -> {}",
                    l.from, l.to
                )));
            }
            if l.exit.is_empty() || l.progression.is_empty() || l.counter.is_empty() {
                return Err(DiscoveryError::Format(format!(
                    "loop edge {} -> {} has an empty condition",
                    l.from, l.to
                )));
            }
            let exit = l
                .exit
                .iter()
                .map(|d| desc(d, &mut index))
                .collect::<Result<Vec<_>, _>>()?;
            let progress = l
                .progression
                .iter()
                .map(|p| {
                    Ok(Progressor {
                        feature: index(&p.feature)?,
                        direction: p.direction,
                    })
                })
                .collect::<Result<Vec<_>, DiscoveryError>>()?;
            let counter = l
                .counter
                .iter()
                .map(|c| index(c))
                .collect::<Result<Vec<_>, _>>()?;
            loops.push(LoopEdge {
                from: l.from,
                to: l.to,
                exit,
                progress,
                counter,
            });
        }
        let mut froms: Vec<usize> = loops.iter().map(|l| l.from).collect();
        froms.sort_unstable();
        if froms.windows(2).any(|w| w[0] == w[1]) {
            return Err(DiscoveryError::Format(
                "two loop edges share a loop landmark".into(),
            ));
        }
        Ok(Graph {
            features,
            nodes,
            loops,
            provenance: g.provenance,
        })
    }

    /// Chain left to right, loop edges dashed, feature legend as a note.
    pub fn to_dot(&self) -> String {
        let name = |f: usize| format!("f{}", f + 1);
        let desc = |d: &SignedDescriptor| {
            format!("{}{}", if d.positive { "" } else { "¬" }, name(d.feature))
        };
        let mut s = String::from("digraph landmarks {\n  rankdir=LR;\n  node [shape=box];\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let label: Vec<String> = n.descriptors.iter().map(desc).collect();
            let _ = writeln!(s, "  n{i} [label=\"L{}\\n{}\"];", i + 1, label.join(", "));
        }
        for i in 1..self.nodes.len() {
            let _ = writeln!(s, "  n{} -> n{i};", i - 1);
        }
        for l in &self.loops {
            let exit: Vec<String> = l.exit.iter().map(desc).collect();
            let prog: Vec<String> = l
                .progress
                .iter()
                .map(|p| {
                    format!(
                        "{}{}",
                        name(p.feature),
                        if p.direction == Direction::Decrease {
                            "↓"
                        } else {
                            "↑"
                        }
                    )
                })
                .collect();
            let counter: Vec<String> = l.counter.iter().map(|&c| name(c)).collect();
            let _ = writeln!(
                s,
                "  n{} -> n{} [style=dashed, constraint=false, label=\"exit: {}\\nprogress: {}\\ncounter: {}\"];",
                l.from,
                l.to,
                exit.join(", "),
                prog.join(", "),
                counter.join(", ")
            );
        }
        let legend: Vec<String> = self
            .features
            .iter()
            .enumerate()
            .map(|(i, f)| format!("{} = {}", name(i), f.id()))
            .collect();
        let _ = writeln!(
            s,
            "  legend [shape=note, label=\"{}\\l\"];",
            legend.join("\\l")
        );
        s.push_str("}\n");
        s
    }
}

/// Discovery output in pool-index space, converted to a standalone graph.
pub fn to_graph(fnset: &StateFunctionSet, d: &Discovery, provenance: Provenance) -> Graph {
    Graph {
        features: fnset.features.clone(),
        nodes: d.nodes.clone(),
        loops: d.loops.clone(),
        provenance,
    }
    .compact()
}

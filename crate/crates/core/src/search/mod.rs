//! Best-first planning with delete-relaxation helpers and the
//! generalized-landmark counting heuristic.

mod helpers;
mod lmg;

use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::discovery::Graph;
use crate::pddl::{applicable, apply, goal_satisfied, DomainDef, GroundTask, State};
use crate::trajectory::fingerprint;

pub use helpers::{combine, Helper, HelperKind};
pub use lmg::{LmgContext, LmgValue};

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error("loop counters disagree on the initial state: {0:?}")]
    CounterDisagreement(Vec<u32>),
    #[error("graph is not applicable to this task (zero loop counter with a failing exit)")]
    GraphInapplicable,
    #[error("graph was discovered on domain fingerprint {graph}, task domain has {task}")]
    FingerprintMismatch { graph: String, task: String },
    #[error("no heuristic selected")]
    NoHeuristic,
}

/// Rejects a graph whose recorded domain fingerprint differs from `domain`'s.
/// Graphs without a recorded fingerprint are accepted.
pub fn check_fingerprint(graph: &Graph, domain: &DomainDef) -> Result<(), SearchError> {
    let task = fingerprint(domain);
    let recorded = &graph.provenance.domain_fingerprint;
    if recorded.is_empty() || *recorded == task {
        Ok(())
    } else {
        Err(SearchError::FingerprintMismatch {
            graph: recorded.clone(),
            task,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub helper: Option<HelperKind>,
    /// A* on g + h instead of greedy best-first on h.
    pub astar: bool,
    /// Set aside the open list whenever a successor evaluation traverses a
    /// loop; the set-aside entries are searched only if the open list empties.
    pub prune: bool,
    pub max_expansions: Option<u64>,
    /// Cap on stored search nodes.
    pub max_states: Option<usize>,
    pub time_limit: Option<Duration>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            helper: Some(HelperKind::HAdd),
            astar: false,
            prune: true,
            max_expansions: None,
            max_states: None,
            time_limit: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub expanded: u64,
    pub evaluated: u64,
    pub plan_length: Option<usize>,
    /// Seconds.
    pub wall_time: f64,
    pub forced_exits: u64,
    pub prunes: u64,
}

impl SearchStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Solved {
        plan: Vec<String>,
        stats: SearchStats,
    },
    Unsolvable {
        stats: SearchStats,
    },
    ResourceLimit {
        stats: SearchStats,
        reason: String,
    },
}

impl SearchOutcome {
    pub fn stats(&self) -> &SearchStats {
        match self {
            SearchOutcome::Solved { stats, .. }
            | SearchOutcome::Unsolvable { stats }
            | SearchOutcome::ResourceLimit { stats, .. } => stats,
        }
    }

    pub fn plan(&self) -> Option<&[String]> {
        match self {
            SearchOutcome::Solved { plan, .. } => Some(plan),
            _ => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            SearchOutcome::Solved { .. } => "solved",
            SearchOutcome::Unsolvable { .. } => "unsolvable",
            SearchOutcome::ResourceLimit { .. } => "resource-limit",
        }
    }
}

struct Node {
    state: State,
    parent: Option<usize>,
    action: Option<u32>,
    g: u64,
}

type OpenEntry = Reverse<(u64, u64, u64, usize)>;

fn push(open: &mut BinaryHeap<OpenEntry>, seq: &mut u64, astar: bool, g: u64, h: u64, node: usize) {
    let f = if astar { g + h } else { h };
    open.push(Reverse((f, h, *seq, node)));
    *seq += 1;
}

fn extract_plan(task: &GroundTask, nodes: &[Node], mut n: usize) -> Vec<String> {
    let mut plan = Vec::new();
    while let (Some(p), Some(a)) = (nodes[n].parent, nodes[n].action) {
        plan.push(task.actions[a as usize].name.clone());
        n = p;
    }
    plan.reverse();
    plan
}

/// Solves `task`. With a graph its LM value is added to the helper value;
/// without a helper the LM value is used alone. Ties go to the earliest
/// inserted node.
pub fn plan(
    task: &GroundTask,
    graph: Option<&Graph>,
    config: &SearchConfig,
) -> Result<SearchOutcome, SearchError> {
    let start = Instant::now();
    let helper = config.helper.map(|k| Helper::new(k, task));
    if helper.is_none() && graph.is_none() {
        return Err(SearchError::NoHeuristic);
    }
    let mut ctx = match graph {
        Some(g) => Some(LmgContext::init(g, &task.universe, &task.init)?),
        None => None,
    };
    let mut stats = SearchStats::default();
    let finish = |mut stats: SearchStats, ctx: &Option<LmgContext>| {
        stats.wall_time = start.elapsed().as_secs_f64();
        stats.forced_exits = ctx.as_ref().map_or(0, |c| c.forced_exits());
        stats
    };

    let eval_helper = |s: &State| helper.as_ref().map(|h| h.evaluate(task, s));
    let root_h = {
        let lm = ctx.as_ref().map(|c| c.h_max() as u64);
        stats.evaluated += 1;
        match (eval_helper(&task.init), lm) {
            (Some(a), Some(b)) => combine(a, Some(b)),
            (Some(a), None) => a,
            (None, b) => b,
        }
    };
    let Some(root_h) = root_h else {
        return Ok(SearchOutcome::Unsolvable {
            stats: finish(stats, &ctx),
        });
    };

    let mut nodes = vec![Node {
        state: task.init.clone(),
        parent: None,
        action: None,
        g: 0,
    }];
    let mut index: HashMap<State, usize> = HashMap::new();
    index.insert(task.init.clone(), 0);
    let mut open = BinaryHeap::new();
    let mut seq = 0u64;
    push(&mut open, &mut seq, config.astar, 0, root_h, 0);

    // Entries cleared by pruning; searched only once `open` runs dry, which
    // keeps the planner complete.
    let mut reserve: BinaryHeap<OpenEntry> = BinaryHeap::new();
    while let Some(Reverse((_, _, _, n))) = open.pop().or_else(|| {
        std::mem::swap(&mut open, &mut reserve);
        open.pop()
    }) {
        if goal_satisfied(&nodes[n].state, task) {
            let plan = extract_plan(task, &nodes, n);
            stats.plan_length = Some(plan.len());
            return Ok(SearchOutcome::Solved {
                plan,
                stats: finish(stats, &ctx),
            });
        }
        if config.max_expansions.is_some_and(|m| stats.expanded >= m) {
            return Ok(SearchOutcome::ResourceLimit {
                stats: finish(stats, &ctx),
                reason: "expansion limit".into(),
            });
        }
        if config.time_limit.is_some_and(|t| start.elapsed() >= t) {
            return Ok(SearchOutcome::ResourceLimit {
                stats: finish(stats, &ctx),
                reason: "time limit".into(),
            });
        }
        if config.max_states.is_some_and(|m| nodes.len() >= m) {
            return Ok(SearchOutcome::ResourceLimit {
                stats: finish(stats, &ctx),
                reason: "state limit".into(),
            });
        }
        stats.expanded += 1;
        let g = nodes[n].g + 1;
        for (ai, a) in task.actions.iter().enumerate() {
            if !applicable(&nodes[n].state, a) {
                continue;
            }
            let succ = apply(&nodes[n].state, a).expect("applicable");
            let child = match index.entry(succ.clone()) {
                Entry::Occupied(e) => {
                    let c = *e.get();
                    if !config.astar || g >= nodes[c].g {
                        continue;
                    }
                    nodes[c].parent = Some(n);
                    nodes[c].action = Some(ai as u32);
                    nodes[c].g = g;
                    c
                }
                Entry::Vacant(e) => {
                    e.insert(nodes.len());
                    nodes.push(Node {
                        state: succ,
                        parent: Some(n),
                        action: Some(ai as u32),
                        g,
                    });
                    nodes.len() - 1
                }
            };
            stats.evaluated += 1;
            let lm = ctx
                .as_mut()
                .map(|c| c.evaluate(&task.universe, &nodes[child].state, &nodes[n].state));
            let h = match (eval_helper(&nodes[child].state), lm) {
                (Some(a), Some(v)) => combine(a, Some(v.h as u64)),
                (Some(a), None) => a,
                (None, v) => v.map(|v| v.h as u64),
            };
            let Some(h) = h else { continue };
            if config.prune && lm.is_some_and(|v| v.looped) {
                reserve.extend(open.drain());
                stats.prunes += 1;
                push(&mut open, &mut seq, config.astar, g, h, child);
                break;
            }
            push(&mut open, &mut seq, config.astar, g, h, child);
        }
    }
    Ok(SearchOutcome::Unsolvable {
        stats: finish(stats, &ctx),
    })
}

/// One action per line, then a `;` footer with the deterministic
/// statistics (wall time is left out so reruns are byte-identical).
pub fn plan_text(plan: &[String], stats: &SearchStats) -> String {
    let mut s = String::new();
    for a in plan {
        let _ = writeln!(s, "{a}");
    }
    let _ = writeln!(s, "; expanded {}", stats.expanded);
    let _ = writeln!(s, "; evaluated {}", stats.evaluated);
    let _ = writeln!(s, "; plan_length {}", plan.len());
    s
}

/// Actions of a plan file; blank lines and `;` comments are skipped.
pub fn parse_plan_text(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with(';'))
        .map(str::to_string)
        .collect()
}

//! Delete-relaxation heuristics and goal counting. `None` marks a dead end.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use crate::pddl::{GroundTask, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HelperKind {
    HAdd,
    HMax,
    GoalCount,
}

impl FromStr for HelperKind {
    type Err = String;

    fn from_str(s: &str) -> Result<HelperKind, String> {
        match s {
            "hadd" => Ok(HelperKind::HAdd),
            "hmax" => Ok(HelperKind::HMax),
            "goalcount" => Ok(HelperKind::GoalCount),
            _ => Err(format!(
                "unknown heuristic {s} (expected hadd, hmax or goalcount)"
            )),
        }
    }
}

impl fmt::Display for HelperKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HelperKind::HAdd => "hadd",
            HelperKind::HMax => "hmax",
            HelperKind::GoalCount => "goalcount",
        })
    }
}

/// Per-task tables for relaxed exploration.
#[derive(Debug, Clone)]
pub struct Helper {
    kind: HelperKind,
    /// Actions with each atom as a (positive) precondition.
    consumers: Vec<Vec<u32>>,
    pre_len: Vec<u32>,
    /// Actions without positive preconditions.
    free: Vec<u32>,
}

impl Helper {
    pub fn new(kind: HelperKind, task: &GroundTask) -> Helper {
        let mut consumers = vec![Vec::new(); task.num_atoms()];
        let mut free = Vec::new();
        for (i, a) in task.actions.iter().enumerate() {
            for &p in &a.pre {
                consumers[p as usize].push(i as u32);
            }
            if a.pre.is_empty() {
                free.push(i as u32);
            }
        }
        let pre_len = task.actions.iter().map(|a| a.pre.len() as u32).collect();
        Helper {
            kind,
            consumers,
            pre_len,
            free,
        }
    }

    pub fn kind(&self) -> HelperKind {
        self.kind
    }

    pub fn evaluate(&self, task: &GroundTask, s: &State) -> Option<u64> {
        match self.kind {
            HelperKind::GoalCount => {
                Some(task.goal.iter().filter(|&&g| !s.contains(g)).count() as u64)
            }
            HelperKind::HAdd => self.relaxed(task, s, true),
            HelperKind::HMax => self.relaxed(task, s, false),
        }
    }

    /// Generalized Dijkstra over atoms; an action becomes available once all
    /// of its preconditions are settled.
    fn relaxed(&self, task: &GroundTask, s: &State, additive: bool) -> Option<u64> {
        if task.goal.iter().all(|&g| s.contains(g)) {
            return Some(0);
        }
        let n = task.num_atoms();
        let mut cost = vec![u64::MAX; n];
        let mut done = vec![false; n];
        let mut waiting = self.pre_len.clone();
        let mut acc = vec![0u64; task.actions.len()];
        let mut heap = BinaryHeap::new();
        for a in s.atoms() {
            cost[a as usize] = 0;
            heap.push(Reverse((0u64, a)));
        }
        let fire =
            |a: u32, base: u64, cost: &mut Vec<u64>, heap: &mut BinaryHeap<Reverse<(u64, u32)>>| {
                let c = base + 1;
                for &e in &task.actions[a as usize].add {
                    if c < cost[e as usize] {
                        cost[e as usize] = c;
                        heap.push(Reverse((c, e)));
                    }
                }
            };
        for &a in &self.free {
            fire(a, 0, &mut cost, &mut heap);
        }
        let mut open_goals = task.goal.iter().filter(|&&g| !s.contains(g)).count();
        while let Some(Reverse((c, p))) = heap.pop() {
            if done[p as usize] || c > cost[p as usize] {
                continue;
            }
            done[p as usize] = true;
            if task.goal.contains(&p) && !s.contains(p) {
                open_goals -= 1;
                if open_goals == 0 {
                    break;
                }
            }
            for &a in &self.consumers[p as usize] {
                let ai = a as usize;
                acc[ai] = if additive {
                    acc[ai] + c
                } else {
                    acc[ai].max(c)
                };
                waiting[ai] -= 1;
                if waiting[ai] == 0 {
                    fire(a, acc[ai], &mut cost, &mut heap);
                }
            }
        }
        let mut total = 0u64;
        for &g in &task.goal {
            let c = cost[g as usize];
            if c == u64::MAX {
                return None;
            }
            total = if additive { total + c } else { total.max(c) };
        }
        Some(total)
    }
}

/// Sum of helper and landmark estimates; a dead end dominates.
pub fn combine(helper: Option<u64>, lmg: Option<u64>) -> Option<u64> {
    Some(helper? + lmg?)
}

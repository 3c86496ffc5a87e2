//! Acceptance semantics shared by discovery, trajectory checking and the
//! search heuristic.

use super::{Landmark, LoopEdge};

/// Cursor over a landmark chain. One node at most is accepted per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Walk {
    pub cursor: usize,
    /// Per loop: whether its loop landmark was accepted before.
    seen: Vec<bool>,
    /// Per loop: progress-feature values at the previous loop-landmark state.
    snapshot: Vec<Vec<u32>>,
    /// Per loop: traversals still allowed; `None` means unbounded.
    remaining: Option<Vec<u32>>,
    /// Loop exits taken because the traversal budget ran out.
    pub forced_exits: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepEvent {
    pub accepted: Option<usize>,
    /// The cursor jumped back along a loop edge.
    pub looped: bool,
}

pub fn accepts(node: &Landmark, value: &impl Fn(usize) -> u32) -> bool {
    node.descriptors.iter().all(|d| d.holds(value(d.feature)))
}

/// An empty exit set never fires; discovery uses that for candidates.
pub fn exit_holds(edge: &LoopEdge, value: &impl Fn(usize) -> u32) -> bool {
    !edge.exit.is_empty() && edge.exit.iter().all(|d| d.holds(value(d.feature)))
}

impl Walk {
    pub fn new(loops: usize) -> Walk {
        Walk {
            cursor: 0,
            seen: vec![false; loops],
            snapshot: vec![Vec::new(); loops],
            remaining: None,
            forced_exits: 0,
        }
    }

    /// Each loop may be traversed (jumped back along) at most `budget[l]` times.
    pub fn with_budget(budget: Vec<u32>) -> Walk {
        let mut w = Walk::new(budget.len());
        w.remaining = Some(budget);
        w
    }

    pub fn step(
        &mut self,
        nodes: &[Landmark],
        loops: &[LoopEdge],
        value: impl Fn(usize) -> u32,
    ) -> StepEvent {
        let i = self.cursor;
        if i >= nodes.len() || !accepts(&nodes[i], &value) {
            return StepEvent::default();
        }
        let mut ev = StepEvent {
            accepted: Some(i),
            looped: false,
        };
        let Some(l) = loops.iter().position(|e| e.from == i) else {
            self.cursor += 1;
            return ev;
        };
        let edge = &loops[l];
        let current: Vec<u32> = edge.progress.iter().map(|p| value(p.feature)).collect();
        let budget_left = self.remaining.as_ref().is_none_or(|r| r[l] > 0);
        let progressed = !self.seen[l]
            || edge
                .progress
                .iter()
                .zip(&self.snapshot[l])
                .zip(&current)
                .all(|((p, &b), &a)| p.holds(b, a));
        if exit_holds(edge, &value) {
            self.cursor += 1;
        } else if !budget_left {
            self.cursor += 1;
            self.forced_exits += 1;
        } else if progressed {
            self.cursor = edge.to;
            ev.looped = true;
            if let Some(r) = self.remaining.as_mut() {
                r[l] -= 1;
            }
        } else {
            self.cursor += 1;
        }
        self.seen[l] = true;
        self.snapshot[l] = current;
        ev
    }
}

/// Runs a walk over states `1..len`; `value(k, f)` is feature `f` in state
/// `k`. Returns the walk and, per node, the accepting state indices.
pub fn simulate(
    nodes: &[Landmark],
    loops: &[LoopEdge],
    len: usize,
    value: impl Fn(usize, usize) -> u32,
) -> (Walk, Vec<Vec<usize>>) {
    let mut walk = Walk::new(loops.len());
    let mut occ = vec![Vec::new(); nodes.len()];
    for k in 1..len {
        if let Some(n) = walk.step(nodes, loops, |f| value(k, f)).accepted {
            occ[n].push(k);
        }
    }
    (walk, occ)
}

/// Required loop-landmark acceptances given initial-state values: the common
/// counter value, or 1 when that is 0 and the exit already holds. `None` if
/// the counters disagree or the loop cannot be satisfied.
pub fn expected_count(edge: &LoopEdge, value: impl Fn(usize) -> u32) -> Option<u32> {
    let mut it = edge.counter.iter().map(|&f| value(f));
    let c = it.next()?;
    if it.any(|x| x != c) {
        return None;
    }
    if c > 0 {
        Some(c)
    } else if exit_holds(edge, &value) {
        Some(1)
    } else {
        None
    }
}

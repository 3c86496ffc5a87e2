//! Path-dependent landmark counting over a generalized-landmark graph.

use std::collections::HashMap;

use crate::discovery::{expected_count, Graph, Walk};
use crate::pddl::{State, Universe};

use super::SearchError;

#[derive(Debug, Clone)]
struct Record {
    counter: u32,
    walk: Walk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LmgValue {
    pub h: u32,
    /// The evaluation jumped back along a loop edge.
    pub looped: bool,
}

/// Per-search bookkeeping keyed by state.
#[derive(Debug, Clone)]
pub struct LmgContext<'g> {
    graph: &'g Graph,
    h_max: u32,
    /// Required loop-landmark acceptances per loop on this task.
    counts: Vec<u32>,
    records: HashMap<State, Record>,
    forced_exits: u64,
}

impl<'g> LmgContext<'g> {
    /// Reads the loop counters on `init`, derives `h_max` and records the
    /// root with no accepted landmark.
    pub fn init(
        graph: &'g Graph,
        universe: &Universe,
        init: &State,
    ) -> Result<LmgContext<'g>, SearchError> {
        let values = graph.values(universe, init);
        let mut counts = Vec::with_capacity(graph.loops.len());
        for l in &graph.loops {
            let cs: Vec<u32> = l.counter.iter().map(|&f| values[f]).collect();
            if cs.windows(2).any(|w| w[0] != w[1]) {
                return Err(SearchError::CounterDisagreement(cs));
            }
            let c = expected_count(l, |f| values[f]).ok_or(SearchError::GraphInapplicable)?;
            counts.push(c);
        }
        let h_max = graph.h_max(&counts);
        let budget = counts.iter().map(|c| c.saturating_sub(1)).collect();
        let mut records = HashMap::new();
        records.insert(
            init.clone(),
            Record {
                counter: 0,
                walk: Walk::with_budget(budget),
            },
        );
        Ok(LmgContext {
            graph,
            h_max,
            counts,
            records,
            forced_exits: 0,
        })
    }

    pub fn h_max(&self) -> u32 {
        self.h_max
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Value of a recorded state.
    pub fn value_of(&self, s: &State) -> Option<u32> {
        self.records
            .get(s)
            .map(|r| self.h_max.saturating_sub(r.counter))
    }

    /// Accepted-landmark counter of a recorded state.
    pub fn counter_of(&self, s: &State) -> Option<u32> {
        self.records.get(s).map(|r| r.counter)
    }

    /// Evaluations where a loop was left only because its traversal budget
    /// ran out while the exit condition still failed.
    pub fn forced_exits(&self) -> u64 {
        self.forced_exits
    }

    /// Evaluates `state` reached from the recorded `prev`. A state seen
    /// before keeps its first value.
    pub fn evaluate(&mut self, universe: &Universe, state: &State, prev: &State) -> LmgValue {
        if let Some(h) = self.value_of(state) {
            return LmgValue { h, looped: false };
        }
        let mut rec = self
            .records
            .get(prev)
            .cloned()
            .expect("predecessor is recorded");
        let values = self.graph.values(universe, state);
        let forced = rec.walk.forced_exits;
        let ev = rec
            .walk
            .step(&self.graph.nodes, &self.graph.loops, |f| values[f]);
        if rec.walk.forced_exits > forced {
            self.forced_exits += 1;
        }
        if ev.accepted.is_some() {
            rec.counter += 1;
        }
        let h = self.h_max.saturating_sub(rec.counter);
        self.records.insert(state.clone(), rec);
        LmgValue {
            h,
            looped: ev.looped,
        }
    }
}

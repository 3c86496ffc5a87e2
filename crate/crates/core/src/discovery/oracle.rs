//! Exhaustive discovery for small inputs, used as a test oracle.

use super::chain::{changes, progressors_in_order, signed_in_order, values_in_order, Discovery};
use super::walk::simulate;
use super::{DiscoveryError, Landmark, LoopEdge};
use crate::features::Valuations;
use crate::statefns::{SignedDescriptor, StateFunctionSet};

#[derive(Debug, Clone, Copy)]
pub struct OracleCaps {
    /// Non-initial states per trajectory.
    pub max_states: usize,
    pub max_descriptors: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            max_states: 12,
            max_descriptors: 16,
        }
    }
}

/// All tuples `t_i ∈ (prev_i, len_i)`, by sum then lexicographically.
fn tuples(prev: &[usize], lens: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for (&p, &l) in prev.iter().zip(lens) {
        out = out
            .into_iter()
            .flat_map(|t| (p + 1..l).map(move |k| [t.clone(), vec![k]].concat()))
            .collect();
    }
    out.sort_by(|a, b| {
        a.iter()
            .sum::<usize>()
            .cmp(&b.iter().sum::<usize>())
            .then(a.cmp(b))
    });
    out
}

/// Largest descriptor subset whose members all change at `tuple`, trying
/// every subset of descriptors and both polarities.
fn best_subset(
    fnset: &StateFunctionSet,
    vals: &Valuations,
    tuple: &[usize],
) -> Vec<SignedDescriptor> {
    let d = &fnset.descriptors;
    let mut best: Vec<SignedDescriptor> = Vec::new();
    for mask in 1u32..(1 << d.len()) {
        let mut set = Vec::new();
        let mut ok = true;
        for (b, &f) in d.iter().enumerate() {
            if mask & (1 << b) == 0 {
                continue;
            }
            let pick = [true, false]
                .into_iter()
                .map(|pos| SignedDescriptor::new(f, pos))
                .find(|&x| {
                    tuple
                        .iter()
                        .enumerate()
                        .all(|(t, &k)| changes(vals, x, t, k))
                });
            match pick {
                Some(x) => set.push(x),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && set.len() > best.len() {
            best = set;
        }
    }
    let order = signed_in_order(fnset);
    best.sort_by_key(|x| order.iter().position(|y| y == x));
    best
}

fn next_landmark(fnset: &StateFunctionSet, vals: &Valuations, prev: &[usize]) -> Option<Landmark> {
    let lens = vals.traj_lens().to_vec();
    let mut found: Option<(usize, Vec<SignedDescriptor>)> = None;
    for tuple in tuples(prev, &lens) {
        let sum: usize = tuple.iter().sum();
        if let Some((s, _)) = &found {
            if sum > *s {
                break;
            }
        }
        let set = best_subset(fnset, vals, &tuple);
        if set.is_empty() {
            continue;
        }
        match &found {
            Some((_, best)) if best.len() >= set.len() => {}
            _ => found = Some((sum, set)),
        }
    }
    found.map(|(_, descriptors)| Landmark { descriptors })
}

fn sims(
    vals: &Valuations,
    nodes: &[Landmark],
    loops: &[LoopEdge],
) -> Vec<(usize, Vec<Vec<usize>>)> {
    (0..vals.num_trajectories())
        .map(|t| {
            let (w, o) = simulate(nodes, loops, vals.traj_len(t), |k, f| vals.value(f, t, k));
            (w.cursor, o)
        })
        .collect()
}

/// Checks every loop constraint on the simulated final graph.
fn loop_valid(vals: &Valuations, nodes: &[Landmark], loops: &[LoopEdge], edge: &LoopEdge) -> bool {
    let i = edge.from;
    let s = sims(vals, nodes, loops);
    let mut looping = 0;
    for (t, (cursor, occ)) in s.iter().enumerate() {
        let o = &occ[i];
        if *cursor <= i || o.is_empty() {
            return false;
        }
        if o.len() >= 2 {
            looping += 1;
        }
        let last = *o.last().unwrap();
        for x in &edge.exit {
            if !x.holds(vals.value(x.feature, t, last))
                || o[..o.len() - 1]
                    .iter()
                    .any(|&k| x.holds(vals.value(x.feature, t, k)))
            {
                return false;
            }
        }
        for &c in &edge.counter {
            if vals.value(c, t, 0) as usize != o.len() {
                return false;
            }
        }
        if o.len() >= 2 {
            for p in &edge.progress {
                if !o.windows(2).all(|w| {
                    p.holds(
                        vals.value(p.feature, t, w[0]),
                        vals.value(p.feature, t, w[1]),
                    )
                }) {
                    return false;
                }
            }
        }
    }
    looping >= 2
}

fn find_loop(
    fnset: &StateFunctionSet,
    vals: &Valuations,
    nodes: &[Landmark],
    loops: &[LoopEdge],
) -> Option<LoopEdge> {
    let i = nodes.len() - 1;
    let first = loops.iter().map(|l| l.from + 1).max().unwrap_or(0);
    for j in first..i {
        for &x in &signed_in_order(fnset) {
            for &p in &progressors_in_order(fnset) {
                for &c in &values_in_order(fnset) {
                    let edge = LoopEdge {
                        from: i,
                        to: j,
                        exit: vec![x],
                        progress: vec![p],
                        counter: vec![c],
                    };
                    let mut all = loops.to_vec();
                    all.push(edge.clone());
                    if loop_valid(vals, nodes, &all, &edge) {
                        return Some(edge);
                    }
                }
            }
        }
    }
    None
}

/// Same contract as [`super::discover_graph`], by exhaustive enumeration.
pub fn brute_force_discover(
    fnset: &StateFunctionSet,
    vals: &Valuations,
    caps: OracleCaps,
) -> Result<Discovery, DiscoveryError> {
    if fnset.descriptors.len() > caps.max_descriptors {
        return Err(DiscoveryError::CapExceeded(format!(
            "{} descriptors",
            fnset.descriptors.len()
        )));
    }
    if let Some(l) = vals.traj_lens().iter().find(|&&l| l > caps.max_states + 1) {
        return Err(DiscoveryError::CapExceeded(format!(
            "trajectory of {l} states"
        )));
    }
    let mut nodes = Vec::new();
    let mut loops: Vec<LoopEdge> = Vec::new();
    let mut prev = vec![0; vals.num_trajectories()];
    while let Some(l) = next_landmark(fnset, vals, &prev) {
        nodes.push(l);
        if let Some(edge) = find_loop(fnset, vals, &nodes, &loops) {
            loops.push(edge);
        }
        let i = nodes.len() - 1;
        for (t, (_, occ)) in sims(vals, &nodes, &loops).into_iter().enumerate() {
            prev[t] = *occ[i].last().ok_or(DiscoveryError::Failed)?;
        }
    }
    if nodes.is_empty() {
        return Err(DiscoveryError::Failed);
    }
    let occurrences = sims(vals, &nodes, &loops)
        .into_iter()
        .map(|(_, o)| o)
        .collect();
    Ok(Discovery {
        nodes,
        loops,
        occurrences,
    })
}

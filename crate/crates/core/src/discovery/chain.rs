//! Landmark chain and loop discovery over a valuation table.

use std::collections::BTreeMap;

use super::walk::simulate;
use super::{DiscoveryError, Landmark, LoopEdge};
use crate::features::Valuations;
use crate::statefns::{Direction, Progressor, SignedDescriptor, StateFunctionSet};

#[derive(Debug, Clone, PartialEq)]
pub struct Discovery {
    pub nodes: Vec<Landmark>,
    pub loops: Vec<LoopEdge>,
    /// `occurrences[t][node]`: accepting state indices in trajectory `t`.
    pub occurrences: Vec<Vec<Vec<usize>>>,
}

/// Signed descriptors in selection order: feature rank, positive first.
pub(crate) fn signed_in_order(fnset: &StateFunctionSet) -> Vec<SignedDescriptor> {
    let mut v: Vec<SignedDescriptor> = fnset
        .descriptors
        .iter()
        .flat_map(|&f| {
            [
                SignedDescriptor::new(f, true),
                SignedDescriptor::new(f, false),
            ]
        })
        .collect();
    v.sort_by(|a, b| {
        fnset
            .rank(a.feature)
            .cmp(&fnset.rank(b.feature))
            .then(b.positive.cmp(&a.positive))
    });
    v
}

pub(crate) fn progressors_in_order(fnset: &StateFunctionSet) -> Vec<Progressor> {
    let mut v = fnset.progressors.clone();
    v.sort_by(|a, b| {
        fnset
            .rank(a.feature)
            .cmp(&fnset.rank(b.feature))
            .then((a.direction == Direction::Increase).cmp(&(b.direction == Direction::Increase)))
    });
    v
}

pub(crate) fn values_in_order(fnset: &StateFunctionSet) -> Vec<usize> {
    let mut v = fnset.values.clone();
    v.sort_by(|&a, &b| fnset.rank(a).cmp(&fnset.rank(b)));
    v
}

/// `x` turns true at state `k` of trajectory `t`.
pub(crate) fn changes(vals: &Valuations, x: SignedDescriptor, t: usize, k: usize) -> bool {
    k >= 1 && x.holds(vals.value(x.feature, t, k)) && !x.holds(vals.value(x.feature, t, k - 1))
}

/// Next landmark after per-trajectory indices `prev`.
///
/// Any index tuple whose candidate sets share a descriptor `x` is at least
/// the tuple of first changes of `x` after `prev`, so the optimal sum is
/// reached exactly at such first-change tuples, and the descriptors sharing
/// a tuple form its full intersection. The largest set wins, then the
/// lexicographically smallest tuple.
pub fn discover_next_landmark(
    fnset: &StateFunctionSet,
    vals: &Valuations,
    prev: &[usize],
) -> Option<(Landmark, Vec<usize>)> {
    let mut groups: BTreeMap<Vec<usize>, Vec<SignedDescriptor>> = BTreeMap::new();
    'x: for x in signed_in_order(fnset) {
        let mut tuple = Vec::with_capacity(prev.len());
        for (t, &p) in prev.iter().enumerate() {
            match (p + 1..vals.traj_len(t)).find(|&k| changes(vals, x, t, k)) {
                Some(k) => tuple.push(k),
                None => continue 'x,
            }
        }
        groups.entry(tuple).or_default().push(x);
    }
    let (tuple, descriptors) = groups.into_iter().min_by(|(ta, da), (tb, db)| {
        let sa: usize = ta.iter().sum();
        let sb: usize = tb.iter().sum();
        sa.cmp(&sb).then(db.len().cmp(&da.len())).then(ta.cmp(tb))
    })?;
    Some((Landmark { descriptors }, tuple))
}

fn simulate_all(
    vals: &Valuations,
    nodes: &[Landmark],
    loops: &[LoopEdge],
) -> Vec<(usize, Vec<Vec<usize>>)> {
    (0..vals.num_trajectories())
        .map(|t| {
            let (walk, occ) = simulate(nodes, loops, vals.traj_len(t), |k, f| vals.value(f, t, k));
            (walk.cursor, occ)
        })
        .collect()
}

/// Loop from node `i` back to the earliest admissible node.
///
/// For each target (earliest first) and each exit descriptor in order, the
/// chain is simulated with the loop always taken unless the exit holds. The
/// exit is valid when every trajectory passes node `i`, and at least two
/// trajectories accept it more than once. A counter must match the number
/// of acceptances on every initial state, and a progressor must hold between
/// consecutive acceptances.
pub fn discover_loop(
    fnset: &StateFunctionSet,
    vals: &Valuations,
    nodes: &[Landmark],
    loops: &[LoopEdge],
    i: usize,
) -> Option<(LoopEdge, Vec<Vec<usize>>)> {
    if i >= nodes.len() || loops.iter().any(|l| l.from >= i) {
        return None;
    }
    let first_target = loops.iter().map(|l| l.from + 1).max().unwrap_or(0);
    let exits = signed_in_order(fnset);
    let progressors = progressors_in_order(fnset);
    let counters = values_in_order(fnset);
    let chain = &nodes[..=i];
    for j in first_target..i {
        for &x in &exits {
            let mut cand_loops = loops.to_vec();
            cand_loops.push(LoopEdge {
                from: i,
                to: j,
                exit: vec![x],
                progress: Vec::new(),
                counter: Vec::new(),
            });
            let sims = simulate_all(vals, chain, &cand_loops);
            if sims
                .iter()
                .any(|(cursor, occ)| *cursor <= i || occ[i].is_empty())
            {
                continue;
            }
            let occ: Vec<&Vec<usize>> = sims.iter().map(|(_, o)| &o[i]).collect();
            let looping: Vec<usize> = (0..occ.len()).filter(|&t| occ[t].len() >= 2).collect();
            if looping.len() < 2 {
                continue;
            }
            let Some(&counter) = counters
                .iter()
                .find(|&&c| (0..occ.len()).all(|t| vals.value(c, t, 0) as usize == occ[t].len()))
            else {
                continue;
            };
            let Some(&progress) = progressors.iter().find(|p| {
                looping.iter().all(|&t| {
                    occ[t].windows(2).all(|w| {
                        p.holds(
                            vals.value(p.feature, t, w[0]),
                            vals.value(p.feature, t, w[1]),
                        )
                    })
                })
            }) else {
                continue;
            };
            let edge = LoopEdge {
                from: i,
                to: j,
                exit: vec![x],
                progress: vec![progress],
                counter: vec![counter],
            };
            let occ = occ.into_iter().cloned().collect();
            return Some((edge, occ));
        }
    }
    None
}

/// Alternates landmark and loop discovery until no landmark remains. Each
/// search resumes after the newest node's last acceptance under the graph
/// semantics, so the training trajectories satisfy the result.
pub fn discover_graph(
    fnset: &StateFunctionSet,
    vals: &Valuations,
) -> Result<Discovery, DiscoveryError> {
    let mut nodes: Vec<Landmark> = Vec::new();
    let mut loops: Vec<LoopEdge> = Vec::new();
    let mut prev = vec![0; vals.num_trajectories()];
    while let Some((landmark, _)) = discover_next_landmark(fnset, vals, &prev) {
        nodes.push(landmark);
        let i = nodes.len() - 1;
        if let Some((edge, _)) = discover_loop(fnset, vals, &nodes, &loops, i) {
            loops.push(edge);
        }
        let sims = simulate_all(vals, &nodes, &loops);
        for (t, (_, occ)) in sims.iter().enumerate() {
            prev[t] = *occ[i]
                .last()
                .expect("a discovered landmark is accepted on every trajectory");
        }
    }
    if nodes.is_empty() {
        return Err(DiscoveryError::Failed);
    }
    let occurrences = simulate_all(vals, &nodes, &loops)
        .into_iter()
        .map(|(_, o)| o)
        .collect();
    Ok(Discovery {
        nodes,
        loops,
        occurrences,
    })
}

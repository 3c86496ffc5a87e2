//! Bottom-up enumeration by complexity with extensional duplicate removal.

use std::collections::HashSet;
use std::time::Instant;

use fixedbitset::FixedBitSet;

use super::eval;
use super::expr::{Concept, Role};
use super::{Feature, FeatureError, FeaturePool, GenerationConfig, Valuations};
use crate::pddl::{State, Universe};
use crate::trajectory::TrajectorySet;

/// Extension on every flattened training state.
type Den = Vec<FixedBitSet>;

struct Item<E> {
    expr: E,
    den: Den,
}

enum CandC {
    Base(Concept),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Some(usize, usize),
    All(usize, usize),
}

enum CandR {
    Base(Role),
    Inverse(usize),
    Compose(usize, usize),
    And(usize, usize),
    Diff(usize, usize),
}

struct Gen<'a> {
    states: Vec<(&'a Universe, &'a State)>,
    concepts: Vec<Item<Concept>>,
    roles: Vec<Item<Role>>,
    concept_keys: Vec<String>,
    role_keys: Vec<String>,
    concept_tiers: Vec<Vec<usize>>,
    role_tiers: Vec<Vec<usize>>,
    seen_c: HashSet<Den>,
    seen_r: HashSet<Den>,
}

impl<'a> Gen<'a> {
    fn n(&self, k: usize) -> usize {
        self.states[k].0.objects.len()
    }

    fn map1(&self, a: &Den, f: impl Fn(&FixedBitSet, usize) -> FixedBitSet) -> Den {
        a.iter().enumerate().map(|(k, x)| f(x, self.n(k))).collect()
    }

    fn map2(
        &self,
        a: &Den,
        b: &Den,
        f: impl Fn(&FixedBitSet, &FixedBitSet, usize) -> FixedBitSet,
    ) -> Den {
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(k, (x, y))| f(x, y, self.n(k)))
            .collect()
    }

    fn concept_den(&self, c: &CandC) -> (Concept, Den) {
        let cs = &self.concepts;
        let rs = &self.roles;
        match c {
            CandC::Base(e) => {
                let den = self
                    .states
                    .iter()
                    .map(|(u, s)| eval::eval_concept(e, u, s))
                    .collect();
                (e.clone(), den)
            }
            CandC::Not(i) => (
                Concept::not(cs[*i].expr.clone()),
                self.map1(&cs[*i].den, |x, _| eval::not(x)),
            ),
            CandC::And(i, j) => (
                Concept::and(cs[*i].expr.clone(), cs[*j].expr.clone()),
                self.map2(&cs[*i].den, &cs[*j].den, |x, y, _| eval::and(x, y)),
            ),
            CandC::Or(i, j) => (
                Concept::or(cs[*i].expr.clone(), cs[*j].expr.clone()),
                self.map2(&cs[*i].den, &cs[*j].den, |x, y, _| eval::or(x, y)),
            ),
            CandC::Some(r, i) => (
                Concept::some(rs[*r].expr.clone(), cs[*i].expr.clone()),
                self.map2(&rs[*r].den, &cs[*i].den, eval::some),
            ),
            CandC::All(r, i) => (
                Concept::all(rs[*r].expr.clone(), cs[*i].expr.clone()),
                self.map2(&rs[*r].den, &cs[*i].den, eval::all),
            ),
        }
    }

    fn role_den(&self, c: &CandR) -> (Role, Den) {
        let rs = &self.roles;
        match c {
            CandR::Base(e) => {
                let den = self
                    .states
                    .iter()
                    .map(|(u, s)| eval::eval_role(e, u, s))
                    .collect();
                (e.clone(), den)
            }
            CandR::Inverse(i) => (
                Role::inverse(rs[*i].expr.clone()),
                self.map1(&rs[*i].den, eval::inverse),
            ),
            CandR::Compose(i, j) => (
                Role::compose(rs[*i].expr.clone(), rs[*j].expr.clone()),
                self.map2(&rs[*i].den, &rs[*j].den, eval::compose),
            ),
            CandR::And(i, j) => (
                Role::and(rs[*i].expr.clone(), rs[*j].expr.clone()),
                self.map2(&rs[*i].den, &rs[*j].den, |x, y, _| eval::and(x, y)),
            ),
            CandR::Diff(i, j) => (
                Role::diff(rs[*i].expr.clone(), rs[*j].expr.clone()),
                self.map2(&rs[*i].den, &rs[*j].den, |x, y, _| eval::diff(x, y)),
            ),
        }
    }

    fn tier(tiers: &[Vec<usize>], k: usize) -> &[usize] {
        tiers.get(k).map_or(&[], Vec::as_slice)
    }

    fn role_candidates(&self, k: usize, base: &[Role]) -> Vec<(String, CandR)> {
        let mut out = Vec::new();
        if k == 1 {
            for r in base {
                out.push((r.to_string(), CandR::Base(r.clone())));
            }
            return out;
        }
        let key = |i: usize| &self.role_keys[i];
        for &i in Self::tier(&self.role_tiers, k - 1) {
            if !matches!(self.roles[i].expr, Role::Inverse(_)) {
                out.push((format!("r_inverse({})", key(i)), CandR::Inverse(i)));
            }
        }
        for a in 1..k - 1 {
            let b = k - 1 - a;
            for &i in Self::tier(&self.role_tiers, a) {
                for &j in Self::tier(&self.role_tiers, b) {
                    if i == j {
                        continue;
                    }
                    let composable = |x: usize| !matches!(self.roles[x].expr, Role::Compose(..));
                    if composable(i) && composable(j) {
                        out.push((
                            format!("r_compose({},{})", key(i), key(j)),
                            CandR::Compose(i, j),
                        ));
                    }
                    if key(i) < key(j) {
                        out.push((format!("r_and({},{})", key(i), key(j)), CandR::And(i, j)));
                    }
                    out.push((format!("r_diff({},{})", key(i), key(j)), CandR::Diff(i, j)));
                }
            }
        }
        out
    }

    fn concept_candidates(&self, k: usize, base: &[Concept]) -> Vec<(String, CandC)> {
        let mut out = Vec::new();
        if k == 1 {
            for c in base {
                out.push((c.to_string(), CandC::Base(c.clone())));
            }
            return out;
        }
        let key = |i: usize| &self.concept_keys[i];
        for &i in Self::tier(&self.concept_tiers, k - 1) {
            if !matches!(self.concepts[i].expr, Concept::Not(_)) {
                out.push((format!("c_not({})", key(i)), CandC::Not(i)));
            }
        }
        for a in 1..k - 1 {
            let b = k - 1 - a;
            if a <= b {
                for &i in Self::tier(&self.concept_tiers, a) {
                    for &j in Self::tier(&self.concept_tiers, b) {
                        if a == b && i >= j {
                            continue;
                        }
                        let (x, y) = if key(i) < key(j) { (i, j) } else { (j, i) };
                        out.push((format!("c_and({},{})", key(x), key(y)), CandC::And(x, y)));
                        out.push((format!("c_or({},{})", key(x), key(y)), CandC::Or(x, y)));
                    }
                }
            }
            for &r in Self::tier(&self.role_tiers, a) {
                for &i in Self::tier(&self.concept_tiers, b) {
                    out.push((
                        format!("c_some({},{})", self.role_keys[r], key(i)),
                        CandC::Some(r, i),
                    ));
                    out.push((
                        format!("c_all({},{})", self.role_keys[r], key(i)),
                        CandC::All(r, i),
                    ));
                }
            }
        }
        out
    }
}

/// Checks the clock every this many candidates.
const CLOCK_STRIDE: usize = 256;

pub fn generate_pool(
    set: &TrajectorySet,
    config: &GenerationConfig,
) -> Result<FeaturePool, FeatureError> {
    let start = Instant::now();
    let states: Vec<(&Universe, &State)> = set
        .trajectories
        .iter()
        .flat_map(|t| t.states.iter().map(move |s| (t.universe.as_ref(), s)))
        .collect();
    if states.is_empty() {
        return Err(FeatureError::NoStates);
    }
    let universe = states[0].0;

    let mut base_concepts = vec![Concept::Top, Concept::Bot];
    base_concepts.extend(universe.types.iter().map(|t| Concept::Type(t.clone())));
    let mut base_roles = Vec::new();
    for p in &universe.predicates {
        let arity = p.arity();
        for pos in 0..arity {
            base_concepts.push(Concept::primitive(&p.name, pos));
        }
        for i in 0..arity {
            for j in i + 1..arity {
                base_roles.push(Role::primitive(&p.name, i, j));
            }
        }
    }

    let mut g = Gen {
        states,
        concepts: Vec::new(),
        roles: Vec::new(),
        concept_keys: Vec::new(),
        role_keys: Vec::new(),
        concept_tiers: vec![Vec::new()],
        role_tiers: vec![Vec::new()],
        seen_c: HashSet::new(),
        seen_r: HashSet::new(),
    };

    let timed_out =
        |n: usize| n.is_multiple_of(CLOCK_STRIDE) && start.elapsed() > config.time_limit;
    'tiers: for k in 1..=config.complexity_limit {
        if g.concepts.len() >= config.feature_limit || start.elapsed() > config.time_limit {
            break;
        }
        // Roles of this tier only feed later concept tiers, so build them first.
        let mut rc = g.role_candidates(k, &base_roles);
        rc.sort_by(|a, b| a.0.cmp(&b.0));
        let mut new_roles = Vec::new();
        let mut tier_seen_r = HashSet::new();
        for (n, (key, cand)) in rc.into_iter().enumerate() {
            if timed_out(n + 1) {
                break 'tiers;
            }
            let (expr, den) = g.role_den(&cand);
            if g.seen_r.contains(&den) || tier_seen_r.contains(&den) {
                continue;
            }
            tier_seen_r.insert(den.clone());
            new_roles.push((key, Item { expr, den }));
        }
        let mut cc = g.concept_candidates(k, &base_concepts);
        cc.sort_by(|a, b| a.0.cmp(&b.0));
        let mut new_concepts = Vec::new();
        let mut tier_seen_c = HashSet::new();
        let mut full = false;
        for (n, (key, cand)) in cc.into_iter().enumerate() {
            if timed_out(n + 1) {
                break 'tiers;
            }
            let (expr, den) = g.concept_den(&cand);
            if g.seen_c.contains(&den) || tier_seen_c.contains(&den) {
                continue;
            }
            tier_seen_c.insert(den.clone());
            new_concepts.push((key, Item { expr, den }));
            if g.concepts.len() + new_concepts.len() >= config.feature_limit {
                full = true;
                break;
            }
        }
        g.seen_r.extend(tier_seen_r);
        g.seen_c.extend(tier_seen_c);
        let mut rt = Vec::new();
        for (key, item) in new_roles {
            rt.push(g.roles.len());
            g.roles.push(item);
            g.role_keys.push(key);
        }
        let mut ct = Vec::new();
        for (key, item) in new_concepts {
            ct.push(g.concepts.len());
            g.concepts.push(item);
            g.concept_keys.push(key);
        }
        g.role_tiers.push(rt);
        g.concept_tiers.push(ct);
        if full {
            break;
        }
    }

    if g.concepts.is_empty() {
        return Err(FeatureError::EmptyPool);
    }
    g.concepts.truncate(config.feature_limit);
    let lens = set.trajectories.iter().map(|t| t.len()).collect();
    let values = g
        .concepts
        .iter()
        .map(|c| c.den.iter().map(|b| b.count_ones(..) as u32).collect())
        .collect();
    let features = g
        .concepts
        .into_iter()
        .map(|c| Feature::numeric(c.expr))
        .collect();
    Ok(FeaturePool {
        features,
        config: config.clone(),
        valuations: Valuations::new(lens, values),
    })
}

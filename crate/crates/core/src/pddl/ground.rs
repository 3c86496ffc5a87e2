use std::collections::HashMap;
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use super::*;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateSig {
    pub name: String,
    pub types: Vec<String>,
}

impl PredicateSig {
    pub fn arity(&self) -> usize {
        self.types.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub predicate: usize,
    pub args: Vec<usize>,
}

/// Objects, types and the indexed atom universe of one task.
///
/// Objects, predicates and atoms are kept in canonical lexicographic order so
/// indices are stable across runs.
#[derive(Debug, Clone)]
pub struct Universe {
    pub predicates: Vec<PredicateSig>,
    pub types: Vec<String>,
    pub objects: Vec<String>,
    pub object_type: Vec<String>,
    /// Per entry of `types`, the objects of that type or a subtype.
    pub type_members: Vec<FixedBitSet>,
    pub atoms: Vec<GroundAtom>,
    pub atom_names: Vec<String>,
    pub atoms_by_predicate: Vec<Vec<u32>>,
    /// Predicates that never change along any transition.
    pub static_predicate: Vec<bool>,
    lookup: HashMap<Vec<usize>, u32>,
}

impl Universe {
    /// Builds a universe from unsorted parts; atoms are given as predicate
    /// name plus argument object names and are deduplicated.
    pub fn build(
        predicates: Vec<PredicateSig>,
        hierarchy: &TypeHierarchy,
        objects: Vec<(String, String)>,
        atoms: impl IntoIterator<Item = (String, Vec<String>)>,
        static_names: &[String],
    ) -> Result<Universe, PddlError> {
        let mut predicates = predicates;
        predicates.sort_by(|a, b| a.name.cmp(&b.name));
        let mut objects = objects;
        objects.sort();
        objects.dedup();
        let types = hierarchy.names();
        let mut type_members = vec![FixedBitSet::with_capacity(objects.len()); types.len()];
        for (oi, (_, ty)) in objects.iter().enumerate() {
            for anc in hierarchy.ancestors(ty) {
                if let Ok(ti) = types.binary_search(&anc) {
                    type_members[ti].insert(oi);
                }
            }
        }
        let pred_index: HashMap<&str, usize> = predicates
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name.as_str(), i))
            .collect();
        let obj_index: HashMap<&str, usize> = objects
            .iter()
            .enumerate()
            .map(|(i, (o, _))| (o.as_str(), i))
            .collect();
        let mut ground: Vec<GroundAtom> = Vec::new();
        for (pred, args) in atoms {
            let p =
                *pred_index
                    .get(pred.as_str())
                    .ok_or_else(|| PddlError::UndefinedPredicate {
                        line: 0,
                        col: 0,
                        name: pred.clone(),
                    })?;
            if predicates[p].arity() != args.len() {
                return Err(PddlError::ArityMismatch {
                    line: 0,
                    col: 0,
                    name: pred.clone(),
                    expected: predicates[p].arity(),
                    got: args.len(),
                });
            }
            let mut a = Vec::with_capacity(args.len());
            for o in &args {
                a.push(
                    *obj_index
                        .get(o.as_str())
                        .ok_or_else(|| PddlError::UnknownObject {
                            line: 0,
                            col: 0,
                            name: o.clone(),
                        })?,
                );
            }
            ground.push(GroundAtom {
                predicate: p,
                args: a,
            });
        }
        // Object and predicate indices are already in name order, so index
        // order equals canonical lexicographic order.
        ground.sort();
        ground.dedup();
        let static_predicate = predicates
            .iter()
            .map(|p| static_names.contains(&p.name))
            .collect();
        Ok(Universe::index(
            predicates,
            types,
            objects,
            type_members,
            ground,
            static_predicate,
        ))
    }

    fn index(
        predicates: Vec<PredicateSig>,
        types: Vec<String>,
        objects: Vec<(String, String)>,
        type_members: Vec<FixedBitSet>,
        atoms: Vec<GroundAtom>,
        static_predicate: Vec<bool>,
    ) -> Universe {
        let mut atoms_by_predicate = vec![Vec::new(); predicates.len()];
        let mut lookup = HashMap::with_capacity(atoms.len());
        let mut atom_names = Vec::with_capacity(atoms.len());
        for (i, a) in atoms.iter().enumerate() {
            atoms_by_predicate[a.predicate].push(i as u32);
            let mut key = Vec::with_capacity(a.args.len() + 1);
            key.push(a.predicate);
            key.extend_from_slice(&a.args);
            lookup.insert(key, i as u32);
            atom_names.push(atom_name(
                &predicates[a.predicate].name,
                &a.args
                    .iter()
                    .map(|&o| objects[o].0.as_str())
                    .collect::<Vec<_>>(),
            ));
        }
        let (objects, object_type) = objects.into_iter().unzip();
        Universe {
            predicates,
            types,
            objects,
            object_type,
            type_members,
            atoms,
            atom_names,
            atoms_by_predicate,
            static_predicate,
            lookup,
        }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn predicate_index(&self, name: &str) -> Option<usize> {
        self.predicates
            .binary_search_by(|p| p.name.as_str().cmp(name))
            .ok()
    }

    pub fn object_index(&self, name: &str) -> Option<usize> {
        self.objects.binary_search_by(|o| o.as_str().cmp(name)).ok()
    }

    pub fn type_index(&self, name: &str) -> Option<usize> {
        self.types.binary_search_by(|t| t.as_str().cmp(name)).ok()
    }

    pub fn atom_index(&self, predicate: usize, args: &[usize]) -> Option<u32> {
        let mut key = Vec::with_capacity(args.len() + 1);
        key.push(predicate);
        key.extend_from_slice(args);
        self.lookup.get(&key).copied()
    }

    /// Look up an atom by its `(pred a b)` name.
    pub fn atom_by_name(&self, name: &str) -> Option<u32> {
        let (pred, args) = split_call(name)?;
        let p = self.predicate_index(&pred)?;
        let a: Option<Vec<usize>> = args.iter().map(|o| self.object_index(o)).collect();
        self.atom_index(p, &a?)
    }

    pub fn state_names(&self, state: &State) -> Vec<String> {
        state
            .atoms()
            .map(|a| self.atom_names[a as usize].clone())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAction {
    /// PDDL call syntax, e.g. `(move t1 c-0-1 c-1-1)`.
    pub name: String,
    pub pre: Vec<u32>,
    pub neg_pre: Vec<u32>,
    pub add: Vec<u32>,
    pub delete: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct GroundTask {
    pub domain_name: String,
    pub problem_name: String,
    pub universe: Arc<Universe>,
    pub actions: Vec<GroundAction>,
    pub init: State,
    pub goal: Vec<u32>,
    action_index: HashMap<String, usize>,
}

impl GroundTask {
    pub fn action_by_name(&self, name: &str) -> Option<&GroundAction> {
        let (head, args) = split_call(name)?;
        self.action_index
            .get(&atom_name(&head, &args))
            .map(|&i| &self.actions[i])
    }

    pub fn num_atoms(&self) -> usize {
        self.universe.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundingLimits {
    pub max_atoms: usize,
    pub max_actions: usize,
}

impl Default for GroundingLimits {
    fn default() -> Self {
        GroundingLimits {
            max_atoms: 2_000_000,
            max_actions: 2_000_000,
        }
    }
}

pub fn ground(domain: &DomainDef, problem: &ProblemDef) -> Result<GroundTask, PddlError> {
    ground_with_limits(domain, problem, GroundingLimits::default())
}

#[derive(Clone, Copy)]
enum T {
    Var(usize),
    Obj(usize),
}

struct CompiledAtom {
    pred: usize,
    args: Vec<T>,
}

enum Check {
    Static { positive: bool, atom: CompiledAtom },
    Equal { positive: bool, left: T, right: T },
}

fn level(ts: &[T]) -> Option<usize> {
    ts.iter()
        .filter_map(|t| if let T::Var(i) = t { Some(*i) } else { None })
        .max()
}

pub fn ground_with_limits(
    domain: &DomainDef,
    problem: &ProblemDef,
    limits: GroundingLimits,
) -> Result<GroundTask, PddlError> {
    if problem.domain_name != domain.name {
        return Err(PddlError::DomainMismatch {
            domain: domain.name.clone(),
            problem: problem.domain_name.clone(),
        });
    }
    let objects: Vec<(String, String)> = object_types(domain, problem).into_iter().collect();
    let predicates: Vec<PredicateSig> = domain
        .predicates
        .iter()
        .map(|p| PredicateSig {
            name: p.name.clone(),
            types: p.params.iter().map(|x| x.ty.clone()).collect(),
        })
        .collect();
    let statics = domain.static_predicates();

    // Full typed instantiation of every predicate.
    let members_of = |ty: &str| -> Vec<usize> {
        objects
            .iter()
            .enumerate()
            .filter(|(_, (_, t))| domain.types.is_subtype(t, ty))
            .map(|(i, _)| i)
            .collect()
    };
    let mut total: usize = 0;
    for p in &predicates {
        let n = p
            .types
            .iter()
            .map(|t| members_of(t).len())
            .try_fold(1usize, |acc, k| acc.checked_mul(k));
        total = n.and_then(|n| total.checked_add(n)).unwrap_or(usize::MAX);
        if total > limits.max_atoms {
            return Err(PddlError::Resource {
                what: "atom",
                limit: limits.max_atoms,
            });
        }
    }
    let mut all_atoms = Vec::with_capacity(total);
    for p in &predicates {
        let domains: Vec<Vec<usize>> = p.types.iter().map(|t| members_of(t)).collect();
        for_each_product(&domains, &mut |args| {
            all_atoms.push((
                p.name.clone(),
                args.iter()
                    .map(|&o| objects[o].0.clone())
                    .collect::<Vec<_>>(),
            ));
        });
    }
    let universe = Universe::build(predicates, &domain.types, objects, all_atoms, &statics)?;

    let atom_of = |lit: &GroundLiteral| -> Result<u32, PddlError> {
        let p = universe.predicate_index(&lit.predicate).ok_or_else(|| {
            PddlError::UndefinedPredicate {
                line: 0,
                col: 0,
                name: lit.predicate.clone(),
            }
        })?;
        let args: Option<Vec<usize>> = lit.args.iter().map(|o| universe.object_index(o)).collect();
        let args = args.ok_or_else(|| PddlError::UnknownObject {
            line: 0,
            col: 0,
            name: lit.atom_name(),
        })?;
        universe
            .atom_index(p, &args)
            .ok_or_else(|| PddlError::TypeMismatch {
                line: 0,
                col: 0,
                name: lit.predicate.clone(),
                arg: lit.atom_name(),
            })
    };
    let mut init = State::empty(universe.len());
    for lit in &problem.init {
        init.insert(atom_of(lit)?);
    }
    let mut goal = Vec::new();
    for lit in &problem.goal {
        if !lit.positive {
            return Err(PddlError::UnsupportedGoal(format!(
                "negative goal literal (not {})",
                lit.atom_name()
            )));
        }
        goal.push(atom_of(lit)?);
    }
    goal.sort_unstable();
    goal.dedup();

    let mut actions = Vec::new();
    for schema in &domain.actions {
        ground_schema(schema, &universe, &init, limits, &mut actions)?;
    }
    actions.sort_by(|a, b| a.name.cmp(&b.name));
    let action_index = actions
        .iter()
        .enumerate()
        .map(|(i, a)| (a.name.clone(), i))
        .collect();
    Ok(GroundTask {
        domain_name: domain.name.clone(),
        problem_name: problem.name.clone(),
        universe: Arc::new(universe),
        actions,
        init,
        goal,
        action_index,
    })
}

fn for_each_product(domains: &[Vec<usize>], f: &mut dyn FnMut(&[usize])) {
    let mut cur = Vec::with_capacity(domains.len());
    fn rec(domains: &[Vec<usize>], cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == domains.len() {
            f(cur);
            return;
        }
        for &o in &domains[cur.len()] {
            cur.push(o);
            rec(domains, cur, f);
            cur.pop();
        }
    }
    rec(domains, &mut cur, f);
}

fn ground_schema(
    schema: &ActionSchema,
    u: &Universe,
    init: &State,
    limits: GroundingLimits,
    out: &mut Vec<GroundAction>,
) -> Result<(), PddlError> {
    let var_index: HashMap<&str, usize> = schema
        .params
        .iter()
        .enumerate()
        .map(|(i, p)| (p.name.as_str(), i))
        .collect();
    let term = |t: &Term| -> T {
        match t {
            Term::Var(v) => T::Var(var_index[v.as_str()]),
            Term::Const(c) => T::Obj(u.object_index(c).expect("constant is an object")),
        }
    };
    let compile = |a: &AtomSchema| CompiledAtom {
        pred: u.predicate_index(&a.predicate).expect("predicate exists"),
        args: a.args.iter().map(term).collect(),
    };
    let candidates: Vec<Vec<usize>> = schema
        .params
        .iter()
        .map(|p| {
            let ti = u.type_index(&p.ty).expect("parameter type exists");
            u.type_members[ti].ones().collect()
        })
        .collect();

    // Static checks grouped by the deepest parameter they mention.
    let mut checks: Vec<Vec<Check>> = (0..=schema.params.len()).map(|_| Vec::new()).collect();
    let mut fluent_pre = Vec::new();
    for c in &schema.precondition {
        match c {
            Condition::Atom { positive, atom } => {
                let ca = compile(atom);
                if u.static_predicate[ca.pred] {
                    let lv = level(&ca.args).map_or(0, |l| l + 1);
                    checks[lv].push(Check::Static {
                        positive: *positive,
                        atom: ca,
                    });
                } else {
                    fluent_pre.push((*positive, ca));
                }
            }
            Condition::Equal {
                positive,
                left,
                right,
            } => {
                let (l, r) = (term(left), term(right));
                let lv = level(&[l, r]).map_or(0, |x| x + 1);
                checks[lv].push(Check::Equal {
                    positive: *positive,
                    left: l,
                    right: r,
                });
            }
        }
    }
    let add: Vec<CompiledAtom> = schema.add.iter().map(compile).collect();
    let del: Vec<CompiledAtom> = schema.delete.iter().map(compile).collect();

    let resolve = |t: &T, binding: &[usize]| match t {
        T::Var(i) => binding[*i],
        T::Obj(o) => *o,
    };
    let lookup = |a: &CompiledAtom, binding: &[usize]| -> Option<u32> {
        let args: Vec<usize> = a.args.iter().map(|t| resolve(t, binding)).collect();
        u.atom_index(a.pred, &args)
    };
    let passes = |cs: &[Check], binding: &[usize]| {
        cs.iter().all(|c| match c {
            Check::Static { positive, atom } => {
                let holds = lookup(atom, binding).is_some_and(|i| init.contains(i));
                holds == *positive
            }
            Check::Equal {
                positive,
                left,
                right,
            } => (resolve(left, binding) == resolve(right, binding)) == *positive,
        })
    };

    let mut binding: Vec<usize> = Vec::with_capacity(schema.params.len());
    let mut overflow = false;
    if !passes(&checks[0], &binding) {
        return Ok(());
    }
    let mut emit = |binding: &[usize], out: &mut Vec<GroundAction>| {
        let mut pre = Vec::new();
        let mut neg_pre = Vec::new();
        for (positive, a) in &fluent_pre {
            match (lookup(a, binding), positive) {
                (Some(i), true) => pre.push(i),
                (Some(i), false) => neg_pre.push(i),
                (None, true) => return,
                (None, false) => {}
            }
        }
        let mut adds = Vec::new();
        for a in &add {
            match lookup(a, binding) {
                Some(i) => adds.push(i),
                None => return,
            }
        }
        let mut dels = Vec::new();
        for a in &del {
            if let Some(i) = lookup(a, binding) {
                dels.push(i);
            }
        }
        for v in [&mut pre, &mut neg_pre, &mut adds, &mut dels] {
            v.sort_unstable();
            v.dedup();
        }
        // Contradictory preconditions can never hold.
        if pre.iter().any(|p| neg_pre.binary_search(p).is_ok()) {
            return;
        }
        dels.retain(|d| adds.binary_search(d).is_err());
        if out.len() >= limits.max_actions {
            overflow = true;
            return;
        }
        let args: Vec<&str> = binding.iter().map(|&o| u.objects[o].as_str()).collect();
        out.push(GroundAction {
            name: atom_name(&schema.name, &args),
            pre,
            neg_pre,
            add: adds,
            delete: dels,
        });
    };
    fn rec(
        depth: usize,
        candidates: &[Vec<usize>],
        checks: &[Vec<Check>],
        binding: &mut Vec<usize>,
        passes: &dyn Fn(&[Check], &[usize]) -> bool,
        emit: &mut dyn FnMut(&[usize], &mut Vec<GroundAction>),
        out: &mut Vec<GroundAction>,
    ) {
        if depth == candidates.len() {
            emit(binding, out);
            return;
        }
        for &o in &candidates[depth] {
            binding.push(o);
            if passes(&checks[depth + 1], binding) {
                rec(depth + 1, candidates, checks, binding, passes, emit, out);
            }
            binding.pop();
        }
    }
    rec(
        0,
        &candidates,
        &checks,
        &mut binding,
        &passes,
        &mut emit,
        out,
    );
    if overflow {
        return Err(PddlError::Resource {
            what: "action",
            limit: limits.max_actions,
        });
    }
    Ok(())
}

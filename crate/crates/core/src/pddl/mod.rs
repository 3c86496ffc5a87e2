//! Typed STRIPS PDDL: parsing, printing, grounding and transition semantics.
//!
//! Supported requirements are `:strips`, `:typing`, `:negative-preconditions`
//! and `:equality`. Anything else is rejected at parse time.

mod ground;
mod parse;
mod print;
pub mod sexpr;

use std::collections::BTreeMap;
use std::path::Path;

pub use ground::{
    ground, ground_with_limits, GroundAction, GroundAtom, GroundTask, GroundingLimits, Universe,
};
pub use parse::{parse_domain, parse_problem};
pub use print::{print_domain, print_problem};

pub const SUPPORTED_REQUIREMENTS: &[&str] =
    &[":strips", ":typing", ":negative-preconditions", ":equality"];

/// Root of every type hierarchy.
pub const OBJECT: &str = "object";

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum PddlError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{line}:{col}: unsupported requirement {name}")]
    UnsupportedRequirement {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("type cycle through {0}")]
    TypeCycle(String),
    #[error("{line}:{col}: undefined predicate {name}")]
    UndefinedPredicate {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}:{col}: unknown type {name}")]
    UnknownType {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}:{col}: unknown object {name}")]
    UnknownObject {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}:{col}: undefined variable {name}")]
    UndefinedVariable {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}:{col}: {name} expects {expected} arguments, got {got}")]
    ArityMismatch {
        line: usize,
        col: usize,
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("{line}:{col}: argument {arg} of {name} has incompatible type")]
    TypeMismatch {
        line: usize,
        col: usize,
        name: String,
        arg: String,
    },
    #[error("{line}:{col}: duplicate definition of {name}")]
    Duplicate {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("problem is for domain {problem}, not {domain}")]
    DomainMismatch { domain: String, problem: String },
    #[error("unsupported goal: {0}")]
    UnsupportedGoal(String),
    #[error("grounding exceeds the {what} limit of {limit}")]
    Resource { what: &'static str, limit: usize },
    #[error("action {0} is not applicable")]
    Inapplicable(String),
    #[error("unknown action {0}")]
    UnknownAction(String),
    #[error("{file}: {source}")]
    InFile {
        file: String,
        #[source]
        source: Box<PddlError>,
    },
    #[error("{file}: {msg}")]
    Io { file: String, msg: String },
}

impl PddlError {
    fn in_file(self, path: &Path) -> PddlError {
        PddlError::InFile {
            file: path.display().to_string(),
            source: Box::new(self),
        }
    }
}

/// Type hierarchy as declared, in declaration order. `object` is implicit.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TypeHierarchy {
    pub declared: Vec<(String, String)>,
}

impl TypeHierarchy {
    pub fn parent(&self, ty: &str) -> Option<&str> {
        self.declared
            .iter()
            .find(|(n, _)| n == ty)
            .map(|(_, p)| p.as_str())
    }

    pub fn contains(&self, ty: &str) -> bool {
        ty == OBJECT || self.declared.iter().any(|(n, _)| n == ty)
    }

    /// All type names including `object`, sorted.
    pub fn names(&self) -> Vec<String> {
        let mut v: Vec<String> = self.declared.iter().map(|(n, _)| n.clone()).collect();
        v.push(OBJECT.to_string());
        v.sort();
        v.dedup();
        v
    }

    /// `ty` followed by its ancestors up to `object`.
    pub fn ancestors(&self, ty: &str) -> Vec<String> {
        let mut out = vec![ty.to_string()];
        let mut cur = ty.to_string();
        while let Some(p) = self.parent(&cur) {
            if out.iter().any(|x| x == p) {
                break;
            }
            out.push(p.to_string());
            cur = p.to_string();
        }
        if !out.iter().any(|x| x == OBJECT) {
            out.push(OBJECT.to_string());
        }
        out
    }

    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        sup == OBJECT || self.ancestors(sub).iter().any(|t| t == sup)
    }

    fn check_acyclic(&self) -> Result<(), PddlError> {
        for (name, _) in &self.declared {
            let mut seen = vec![name.as_str()];
            let mut cur = name.as_str();
            while let Some(p) = self.parent(cur) {
                if seen.contains(&p) {
                    return Err(PddlError::TypeCycle(name.clone()));
                }
                seen.push(p);
                cur = p;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedParam {
    pub name: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDef {
    pub name: String,
    pub params: Vec<TypedParam>,
}

impl PredicateDef {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn text(&self) -> &str {
        match self {
            Term::Var(s) | Term::Const(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomSchema {
    pub predicate: String,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    Atom {
        positive: bool,
        atom: AtomSchema,
    },
    Equal {
        positive: bool,
        left: Term,
        right: Term,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedParam>,
    pub precondition: Vec<Condition>,
    pub add: Vec<AtomSchema>,
    pub delete: Vec<AtomSchema>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainDef {
    pub name: String,
    pub requirements: Vec<String>,
    pub types: TypeHierarchy,
    pub constants: Vec<(String, String)>,
    pub predicates: Vec<PredicateDef>,
    pub actions: Vec<ActionSchema>,
}

impl DomainDef {
    pub fn predicate(&self, name: &str) -> Option<&PredicateDef> {
        self.predicates.iter().find(|p| p.name == name)
    }

    /// Predicates that appear in no action effect.
    pub fn static_predicates(&self) -> Vec<String> {
        self.predicates
            .iter()
            .filter(|p| {
                !self
                    .actions
                    .iter()
                    .any(|a| a.add.iter().chain(&a.delete).any(|e| e.predicate == p.name))
            })
            .map(|p| p.name.clone())
            .collect()
    }

    /// Sorted signature lines of predicates and action schemas.
    pub fn signatures(&self) -> Vec<String> {
        let sig = |params: &[TypedParam]| {
            params
                .iter()
                .map(|p| p.ty.as_str())
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut v: Vec<String> = self
            .predicates
            .iter()
            .map(|p| format!("predicate {}({})", p.name, sig(&p.params)))
            .chain(
                self.actions
                    .iter()
                    .map(|a| format!("action {}({})", a.name, sig(&a.params))),
            )
            .collect();
        v.sort();
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundLiteral {
    pub positive: bool,
    pub predicate: String,
    pub args: Vec<String>,
}

impl GroundLiteral {
    pub fn atom_name(&self) -> String {
        atom_name(&self.predicate, &self.args)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemDef {
    pub name: String,
    pub domain_name: String,
    pub objects: Vec<(String, String)>,
    pub init: Vec<GroundLiteral>,
    pub goal: Vec<GroundLiteral>,
}

impl ProblemDef {
    /// Object counts per declared type (exact type, not ancestors).
    pub fn count_of_type(&self, ty: &str) -> usize {
        self.objects.iter().filter(|(_, t)| t == ty).count()
    }
}

/// Canonical atom/action name: `(pred a b)`.
pub fn atom_name(pred: &str, args: &[impl AsRef<str>]) -> String {
    let mut s = String::with_capacity(2 + pred.len() + args.len() * 8);
    s.push('(');
    s.push_str(pred);
    for a in args {
        s.push(' ');
        s.push_str(a.as_ref());
    }
    s.push(')');
    s
}

/// Split `(pred a b)` (or `pred(a,b)`) into its parts, lower-cased.
pub fn split_call(text: &str) -> Option<(String, Vec<String>)> {
    let t = text.trim();
    let inner = if let Some(rest) = t.strip_prefix('(') {
        rest.strip_suffix(')')?.to_string()
    } else if let Some(open) = t.find('(') {
        let close = t.rfind(')')?;
        format!("{} {}", &t[..open], t[open + 1..close].replace(',', " "))
    } else {
        t.to_string()
    };
    let mut parts = inner.split_whitespace().map(|s| s.to_ascii_lowercase());
    let head = parts.next()?;
    if head.contains('(') || head.contains(')') {
        return None;
    }
    let args: Vec<String> = parts.collect();
    if args.iter().any(|a| a.contains('(') || a.contains(')')) {
        return None;
    }
    Some((head, args))
}

fn read(path: &Path) -> Result<String, PddlError> {
    std::fs::read_to_string(path).map_err(|e| PddlError::Io {
        file: path.display().to_string(),
        msg: e.to_string(),
    })
}

pub fn load_domain(path: &Path) -> Result<DomainDef, PddlError> {
    parse_domain(&read(path)?).map_err(|e| e.in_file(path))
}

pub fn load_problem(path: &Path, domain: &DomainDef) -> Result<ProblemDef, PddlError> {
    parse_problem(&read(path)?, domain).map_err(|e| e.in_file(path))
}

/// Set of true atoms over a task's atom universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    bits: fixedbitset::FixedBitSet,
}

impl State {
    pub fn empty(universe_size: usize) -> State {
        State {
            bits: fixedbitset::FixedBitSet::with_capacity(universe_size),
        }
    }

    pub fn from_atoms(universe_size: usize, atoms: impl IntoIterator<Item = u32>) -> State {
        let mut s = State::empty(universe_size);
        for a in atoms {
            s.bits.insert(a as usize);
        }
        s
    }

    pub fn contains(&self, atom: u32) -> bool {
        self.bits.contains(atom as usize)
    }

    pub fn insert(&mut self, atom: u32) {
        self.bits.insert(atom as usize);
    }

    pub fn remove(&mut self, atom: u32) {
        self.bits.set(atom as usize, false);
    }

    pub fn atoms(&self) -> impl Iterator<Item = u32> + '_ {
        self.bits.ones().map(|i| i as u32)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn universe_size(&self) -> usize {
        self.bits.len()
    }

    pub fn is_superset_of(&self, atoms: &[u32]) -> bool {
        atoms.iter().all(|&a| self.contains(a))
    }
}

/// True iff the positive and negative preconditions hold.
pub fn applicable(state: &State, action: &GroundAction) -> bool {
    state.is_superset_of(&action.pre) && action.neg_pre.iter().all(|&a| !state.contains(a))
}

/// `(state \ delete) ∪ add`; errors when the action is not applicable.
pub fn apply(state: &State, action: &GroundAction) -> Result<State, PddlError> {
    if !applicable(state, action) {
        return Err(PddlError::Inapplicable(action.name.clone()));
    }
    Ok(apply_unchecked(state, action))
}

pub(crate) fn apply_unchecked(state: &State, action: &GroundAction) -> State {
    let mut next = state.clone();
    for &d in &action.delete {
        next.remove(d);
    }
    for &a in &action.add {
        next.insert(a);
    }
    next
}

pub fn goal_satisfied(state: &State, task: &GroundTask) -> bool {
    state.is_superset_of(&task.goal)
}

/// Object-to-type map of a problem (constants included).
pub fn object_types(domain: &DomainDef, problem: &ProblemDef) -> BTreeMap<String, String> {
    domain
        .constants
        .iter()
        .chain(problem.objects.iter())
        .map(|(o, t)| (o.clone(), t.clone()))
        .collect()
}

#[cfg(test)]
mod tests;

//! Goal annotation, plan execution and trajectory files.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::pddl::{
    self, apply, goal_satisfied, ground, DomainDef, GroundLiteral, GroundTask, PddlError,
    PredicateDef, ProblemDef, State, Universe,
};

/// Suffix of goal-predicate names: `at` becomes `at_g`.
pub const GOAL_SUFFIX: &str = "_g";

pub fn goal_predicate_name(pred: &str) -> String {
    format!("{pred}{GOAL_SUFFIX}")
}

#[derive(Debug, thiserror::Error)]
pub enum TrajectoryError {
    #[error(transparent)]
    Pddl(#[from] PddlError),
    #[error("unsupported goal: {0}")]
    UnsupportedGoal(String),
    #[error("goal predicate name {0} collides with an existing predicate")]
    NameCollision(String),
    #[error("{task}: step {step}: {action} is not applicable")]
    Inapplicable {
        task: String,
        step: usize,
        action: String,
    },
    #[error("{task}: step {step}: unknown action {action}")]
    UnknownAction {
        task: String,
        step: usize,
        action: String,
    },
    #[error("{task}: plan does not reach the goal")]
    GoalNotReached { task: String },
    #[error("domain fingerprint mismatch: file has {file}, domain has {domain}")]
    FingerprintMismatch { file: String, domain: String },
    #[error("trajectory file schema error: {0}")]
    Schema(String),
    #[error("{0}")]
    Io(String),
    #[error("trajectory set is empty")]
    Empty,
}

/// Adds `pred_g` for each predicate in `goal_preds` (idempotent).
pub fn annotate_domain(
    domain: &DomainDef,
    goal_preds: &BTreeSet<String>,
) -> Result<DomainDef, TrajectoryError> {
    let mut d = domain.clone();
    for p in goal_preds {
        let name = goal_predicate_name(p);
        let base = domain
            .predicate(p)
            .ok_or_else(|| PddlError::UndefinedPredicate {
                line: 0,
                col: 0,
                name: p.clone(),
            })?;
        if let Some(existing) = d.predicate(&name) {
            if existing
                .params
                .iter()
                .map(|x| &x.ty)
                .ne(base.params.iter().map(|x| &x.ty))
            {
                return Err(TrajectoryError::NameCollision(name));
            }
            continue;
        }
        d.predicates.push(PredicateDef {
            name,
            params: base.params.clone(),
        });
    }
    Ok(d)
}

fn goal_predicates(problem: &ProblemDef) -> Result<BTreeSet<String>, TrajectoryError> {
    let mut preds = BTreeSet::new();
    for lit in &problem.goal {
        if !lit.positive {
            return Err(TrajectoryError::UnsupportedGoal(format!(
                "negative goal literal (not {})",
                lit.atom_name()
            )));
        }
        preds.insert(lit.predicate.clone());
    }
    Ok(preds)
}

/// Problem with one `pred_g` init atom per goal literal; the goal is unchanged.
pub fn annotate_problem(problem: &ProblemDef) -> Result<ProblemDef, TrajectoryError> {
    goal_predicates(problem)?;
    let mut p = problem.clone();
    for lit in &problem.goal {
        let g = GroundLiteral {
            positive: true,
            predicate: goal_predicate_name(&lit.predicate),
            args: lit.args.clone(),
        };
        if !p.init.contains(&g) {
            p.init.push(g);
        }
    }
    Ok(p)
}

pub fn annotate_goal(
    domain: &DomainDef,
    problem: &ProblemDef,
) -> Result<(DomainDef, ProblemDef), TrajectoryError> {
    let preds = goal_predicates(problem)?;
    Ok((annotate_domain(domain, &preds)?, annotate_problem(problem)?))
}

/// Annotates a whole training set against one shared domain: every instance
/// sees the union of goal predicates, so `at_g` means the same everywhere.
pub fn annotate_all(
    domain: &DomainDef,
    problems: &[ProblemDef],
) -> Result<(DomainDef, Vec<ProblemDef>), TrajectoryError> {
    let mut preds = BTreeSet::new();
    for p in problems {
        preds.extend(goal_predicates(p)?);
    }
    let d = annotate_domain(domain, &preds)?;
    let ps = problems
        .iter()
        .map(annotate_problem)
        .collect::<Result<Vec<_>, _>>()?;
    Ok((d, ps))
}

#[derive(Debug, Clone)]
pub struct GoalAnnotatedTask {
    pub domain: DomainDef,
    pub problem: ProblemDef,
    pub task: GroundTask,
    /// The instantiated `pred_g` atoms, all true in init.
    pub goal_atoms: Vec<u32>,
}

impl GoalAnnotatedTask {
    /// Grounds an already-annotated domain/problem pair.
    pub fn from_annotated(
        domain: DomainDef,
        problem: ProblemDef,
    ) -> Result<GoalAnnotatedTask, TrajectoryError> {
        let task = ground(&domain, &problem)?;
        let mut goal_atoms: Vec<u32> = problem
            .goal
            .iter()
            .filter_map(|lit| {
                let g = pddl::atom_name(&goal_predicate_name(&lit.predicate), &lit.args);
                task.universe.atom_by_name(&g)
            })
            .collect();
        goal_atoms.sort_unstable();
        goal_atoms.dedup();
        Ok(GoalAnnotatedTask {
            domain,
            problem,
            task,
            goal_atoms,
        })
    }

    pub fn new(
        domain: &DomainDef,
        problem: &ProblemDef,
    ) -> Result<GoalAnnotatedTask, TrajectoryError> {
        let (d, p) = annotate_goal(domain, problem)?;
        GoalAnnotatedTask::from_annotated(d, p)
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub task_id: String,
    pub plan: Vec<String>,
    pub states: Vec<State>,
    pub universe: Arc<Universe>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state_names(&self, k: usize) -> Vec<String> {
        self.universe.state_names(&self.states[k])
    }
}

impl PartialEq for Trajectory {
    fn eq(&self, other: &Self) -> bool {
        self.task_id == other.task_id
            && self.plan == other.plan
            && self.states.len() == other.states.len()
            && (0..self.states.len()).all(|k| self.state_names(k) == other.state_names(k))
    }
}

/// Executes `plan` from init; every step must be applicable and the last
/// state must satisfy the goal.
pub fn execute_plan(task: &GroundTask, plan: &[String]) -> Result<Trajectory, TrajectoryError> {
    let id = task.problem_name.clone();
    let mut states = vec![task.init.clone()];
    let mut names = Vec::with_capacity(plan.len());
    for (k, step) in plan.iter().enumerate() {
        let action = task
            .action_by_name(step)
            .ok_or_else(|| TrajectoryError::UnknownAction {
                task: id.clone(),
                step: k,
                action: step.clone(),
            })?;
        let next =
            apply(states.last().unwrap(), action).map_err(|_| TrajectoryError::Inapplicable {
                task: id.clone(),
                step: k,
                action: action.name.clone(),
            })?;
        names.push(action.name.clone());
        states.push(next);
    }
    if !goal_satisfied(states.last().unwrap(), task) {
        return Err(TrajectoryError::GoalNotReached { task: id });
    }
    Ok(Trajectory {
        task_id: id,
        plan: names,
        states,
        universe: task.universe.clone(),
    })
}

/// Hex SHA-256 over the sorted predicate and action signatures.
pub fn fingerprint(domain: &DomainDef) -> String {
    let mut h = Sha256::new();
    h.update(domain.name.as_bytes());
    for line in domain.signatures() {
        h.update(b"\n");
        h.update(line.as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone)]
pub struct TrajectorySet {
    /// Goal-annotated domain shared by every trajectory.
    pub domain: DomainDef,
    /// Fingerprint of the domain before annotation.
    pub domain_fingerprint: String,
    pub trajectories: Vec<Trajectory>,
}

impl PartialEq for TrajectorySet {
    fn eq(&self, other: &Self) -> bool {
        self.domain_fingerprint == other.domain_fingerprint
            && self.trajectories == other.trajectories
    }
}

impl TrajectorySet {
    /// Annotates, grounds and executes each `(problem, plan)` pair.
    pub fn build(
        domain: &DomainDef,
        runs: &[(ProblemDef, Vec<String>)],
    ) -> Result<TrajectorySet, TrajectoryError> {
        if runs.is_empty() {
            return Err(TrajectoryError::Empty);
        }
        let problems: Vec<ProblemDef> = runs.iter().map(|(p, _)| p.clone()).collect();
        let (ad, aps) = annotate_all(domain, &problems)?;
        let mut trajectories = Vec::with_capacity(runs.len());
        for (p, (_, plan)) in aps.into_iter().zip(runs) {
            let task = GoalAnnotatedTask::from_annotated(ad.clone(), p)?;
            trajectories.push(execute_plan(&task.task, plan)?);
        }
        Ok(TrajectorySet {
            domain: ad,
            domain_fingerprint: fingerprint(domain),
            trajectories,
        })
    }

    pub fn goal_predicates(&self) -> Vec<String> {
        self.domain
            .predicates
            .iter()
            .filter_map(|p| {
                p.name
                    .strip_suffix(GOAL_SUFFIX)
                    .filter(|b| self.domain.predicate(b).is_some())
            })
            .map(str::to_string)
            .collect()
    }

    pub fn total_states(&self) -> usize {
        self.trajectories.iter().map(Trajectory::len).sum()
    }
}

#[derive(Serialize, Deserialize)]
struct FileTrajectory {
    task_id: String,
    objects: Vec<(String, String)>,
    plan: Vec<String>,
    states: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct FileSet {
    domain_fingerprint: String,
    #[serde(default)]
    goal_predicates: Vec<String>,
    trajectories: Vec<FileTrajectory>,
}

pub fn to_json(set: &TrajectorySet) -> String {
    let file = FileSet {
        domain_fingerprint: set.domain_fingerprint.clone(),
        goal_predicates: set.goal_predicates(),
        trajectories: set
            .trajectories
            .iter()
            .map(|t| FileTrajectory {
                task_id: t.task_id.clone(),
                objects: t
                    .universe
                    .objects
                    .iter()
                    .cloned()
                    .zip(t.universe.object_type.iter().cloned())
                    .collect(),
                plan: t.plan.clone(),
                states: (0..t.len()).map(|k| t.state_names(k)).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("serializable") + "\n"
}

pub fn save_trajectories(set: &TrajectorySet, path: &Path) -> Result<(), TrajectoryError> {
    std::fs::write(path, to_json(set))
        .map_err(|e| TrajectoryError::Io(format!("{}: {e}", path.display())))
}

pub fn load_trajectories(
    path: &Path,
    domain: &DomainDef,
) -> Result<TrajectorySet, TrajectoryError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| TrajectoryError::Io(format!("{}: {e}", path.display())))?;
    from_json(&text, domain)
}

/// Parses a trajectory document and replays every plan against the
/// reconstructed task to validate the stored states.
pub fn from_json(text: &str, domain: &DomainDef) -> Result<TrajectorySet, TrajectoryError> {
    let file: FileSet =
        serde_json::from_str(text).map_err(|e| TrajectoryError::Schema(e.to_string()))?;
    let fp = fingerprint(domain);
    if file.domain_fingerprint != fp {
        return Err(TrajectoryError::FingerprintMismatch {
            file: file.domain_fingerprint,
            domain: fp,
        });
    }
    if file.trajectories.is_empty() {
        return Err(TrajectoryError::Empty);
    }
    let preds: BTreeSet<String> = file.goal_predicates.iter().cloned().collect();
    let ad = annotate_domain(domain, &preds)?;
    let mut trajectories = Vec::new();
    for ft in &file.trajectories {
        let schema = |msg: String| TrajectoryError::Schema(format!("{}: {msg}", ft.task_id));
        if ft.states.len() != ft.plan.len() + 1 {
            return Err(schema(format!(
                "{} states for {} actions",
                ft.states.len(),
                ft.plan.len()
            )));
        }
        let mut init = Vec::new();
        let mut goal = Vec::new();
        for name in &ft.states[0] {
            let (pred, args) =
                pddl::split_call(name).ok_or_else(|| schema(format!("malformed atom {name}")))?;
            if let Some(base) = pred
                .strip_suffix(GOAL_SUFFIX)
                .filter(|b| preds.contains(*b))
            {
                goal.push(GroundLiteral {
                    positive: true,
                    predicate: base.to_string(),
                    args: args.clone(),
                });
            }
            init.push(GroundLiteral {
                positive: true,
                predicate: pred,
                args,
            });
        }
        let problem = ProblemDef {
            name: ft.task_id.clone(),
            domain_name: ad.name.clone(),
            objects: ft.objects.clone(),
            init,
            goal,
        };
        let task = ground(&ad, &problem).map_err(|e| schema(e.to_string()))?;
        let traj = execute_plan(&task, &ft.plan).map_err(|e| schema(e.to_string()))?;
        for (k, names) in ft.states.iter().enumerate() {
            let mut stored: Vec<String> = Vec::with_capacity(names.len());
            for n in names {
                let idx = task
                    .universe
                    .atom_by_name(n)
                    .ok_or_else(|| schema(format!("state {k}: unknown atom {n}")))?;
                stored.push(task.universe.atom_names[idx as usize].clone());
            }
            stored.sort();
            stored.dedup();
            let mut replayed = traj.state_names(k);
            replayed.sort();
            if stored != replayed {
                return Err(schema(format!(
                    "state {k} does not match the replayed plan"
                )));
            }
        }
        trajectories.push(traj);
    }
    Ok(TrajectorySet {
        domain: ad,
        domain_fingerprint: fp,
        trajectories,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delivery;
    use crate::pddl::{parse_domain, parse_problem};

    fn domain() -> DomainDef {
        parse_domain(delivery::DOMAIN).unwrap()
    }

    fn t01_plan() -> Vec<String> {
        [
            "(move t1 c-0-1 c-1-1)",
            "(pick-up t1 p0 c-1-1)",
            "(move t1 c-1-1 c-1-0)",
            "(drop t1 p0 c-1-0)",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    }

    fn loop_example_set() -> TrajectorySet {
        let d = domain();
        let runs: Vec<(ProblemDef, Vec<String>)> = delivery::loop_example_instances()
            .into_iter()
            .map(|(spec, plan)| (parse_problem(&spec.to_pddl(), &d).unwrap(), plan))
            .collect();
        TrajectorySet::build(&d, &runs).unwrap()
    }

    #[test]
    fn annotation_adds_goal_atoms() {
        let d = domain();
        let p = parse_problem(&delivery::training_instances()[1].to_pddl(), &d).unwrap();
        let (ad, ap) = annotate_goal(&d, &p).unwrap();
        assert!(ad.predicate("at_g").is_some());
        assert_eq!(ad.predicates.len(), 5);
        let added: Vec<String> = ap
            .init
            .iter()
            .filter(|l| l.predicate == "at_g")
            .map(|l| l.atom_name())
            .collect();
        assert_eq!(added, vec!["(at_g p0 c-0-0)", "(at_g p1 c-1-1)"]);
        assert_eq!(ap.goal, p.goal);
    }

    #[test]
    fn single_literal_goal_adds_one_atom() {
        let d = domain();
        let p = parse_problem(&delivery::training_instances()[0].to_pddl(), &d).unwrap();
        let (_, ap) = annotate_goal(&d, &p).unwrap();
        assert_eq!(ap.init.len(), p.init.len() + 1);
    }

    #[test]
    fn shared_goal_predicate_across_instances() {
        let d = domain();
        let ps: Vec<ProblemDef> = delivery::training_instances()
            .iter()
            .take(2)
            .map(|s| parse_problem(&s.to_pddl(), &d).unwrap())
            .collect();
        let (ad, _) = annotate_all(&d, &ps).unwrap();
        assert_eq!(
            ad.predicates
                .iter()
                .filter(|p| p.name.ends_with("_g"))
                .count(),
            1
        );
    }

    #[test]
    fn negative_goal_rejected() {
        let d = domain();
        let text = "(define (problem e) (:domain delivery) (:objects t1 - truck) (:init) (:goal (not (empty t1))))";
        let p = parse_problem(text, &d).unwrap();
        assert!(matches!(
            annotate_goal(&d, &p),
            Err(TrajectoryError::UnsupportedGoal(_))
        ));
    }

    #[test]
    fn t01_trajectory() {
        let d = domain();
        let p = parse_problem(&delivery::training_instances()[0].to_pddl(), &d).unwrap();
        let task = GoalAnnotatedTask::new(&d, &p).unwrap();
        assert_eq!(task.goal_atoms.len(), 1);
        let t = execute_plan(&task.task, &t01_plan()).unwrap();
        assert_eq!(t.len(), 5);
        // Goal atoms are static along the trajectory.
        for s in &t.states {
            for &g in &task.goal_atoms {
                assert!(s.contains(g));
            }
        }
    }

    #[test]
    fn t03_altered_plan() {
        let d = domain();
        let p = parse_problem(&delivery::training_instances()[2].to_pddl(), &d).unwrap();
        let task = GoalAnnotatedTask::new(&d, &p).unwrap();
        let plan: Vec<String> = [
            "move(t1, c-2-2, c-2-1)",
            "pick-up(t1, p0, c-2-1)",
            "move(t1, c-2-1, c-2-0)",
            "move(t1, c-2-0, c-1-0)",
            "move(t1, c-1-0, c-1-1)",
            "drop(t1, p0, c-1-1)",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        assert_eq!(execute_plan(&task.task, &plan).unwrap().len(), 7);
    }

    #[test]
    fn empty_plan_on_satisfied_goal() {
        let d = domain();
        let text = "(define (problem e) (:domain delivery) (:objects t1 - truck c - cell) (:init (at t1 c)) (:goal (at t1 c)))";
        let task = GoalAnnotatedTask::new(&d, &parse_problem(text, &d).unwrap()).unwrap();
        assert_eq!(execute_plan(&task.task, &[]).unwrap().len(), 1);
    }

    #[test]
    fn execution_errors() {
        let d = domain();
        let p = parse_problem(&delivery::training_instances()[0].to_pddl(), &d).unwrap();
        let task = GoalAnnotatedTask::new(&d, &p).unwrap();
        let mut plan = t01_plan();
        plan.swap(0, 1);
        assert!(matches!(
            execute_plan(&task.task, &plan),
            Err(TrajectoryError::Inapplicable { step: 0, .. })
        ));
        assert!(matches!(
            execute_plan(&task.task, &t01_plan()[..3]),
            Err(TrajectoryError::GoalNotReached { .. })
        ));
        assert!(matches!(
            execute_plan(&task.task, &["(fly t1)".to_string()]),
            Err(TrajectoryError::UnknownAction { step: 0, .. })
        ));
    }

    #[test]
    fn loop_example_lengths() {
        let set = loop_example_set();
        let lens: Vec<usize> = set.trajectories.iter().map(Trajectory::len).collect();
        assert_eq!(lens, vec![5, 9, 13]);
    }

    #[test]
    fn json_round_trip() {
        let set = loop_example_set();
        let text = to_json(&set);
        let back = from_json(&text, &domain()).unwrap();
        assert_eq!(back, set);
        assert_eq!(to_json(&back), text);
    }

    #[test]
    fn fingerprint_mismatch() {
        let set = loop_example_set();
        let mut other = domain();
        other.actions.pop();
        assert!(matches!(
            from_json(&to_json(&set), &other),
            Err(TrajectoryError::FingerprintMismatch { .. })
        ));
    }

    #[test]
    fn corrupted_state_is_schema_error() {
        let set = loop_example_set();
        let mut v: serde_json::Value = serde_json::from_str(&to_json(&set)).unwrap();
        v["trajectories"][1]["states"][3][0] = serde_json::Value::String("(at p9 c-7-7)".into());
        let r = from_json(&v.to_string(), &domain());
        assert!(matches!(r, Err(TrajectoryError::Schema(_))), "{r:?}");
        v["trajectories"][1]["states"][3] = serde_json::json!(17);
        assert!(matches!(
            from_json(&v.to_string(), &domain()),
            Err(TrajectoryError::Schema(_))
        ));
    }

    #[test]
    fn tampered_state_detected_by_replay() {
        let set = loop_example_set();
        let mut v: serde_json::Value = serde_json::from_str(&to_json(&set)).unwrap();
        let states = v["trajectories"][0]["states"][1].as_array_mut().unwrap();
        states.retain(|a| a.as_str() != Some("(empty t1)"));
        states.push(serde_json::Value::String("(empty t1)".into()));
        // Same set, different order: accepted.
        assert!(from_json(&v.to_string(), &domain()).is_ok());
        let states = v["trajectories"][0]["states"][1].as_array_mut().unwrap();
        states.pop();
        states.push(serde_json::Value::String("(at p0 c-0-0)".into()));
        assert!(matches!(
            from_json(&v.to_string(), &domain()),
            Err(TrajectoryError::Schema(_))
        ));
    }
}

use super::*;
use crate::delivery;

fn delivery_domain() -> DomainDef {
    parse_domain(delivery::DOMAIN).unwrap()
}

fn t01() -> (DomainDef, ProblemDef) {
    let d = delivery_domain();
    let p = parse_problem(&delivery::training_instances()[0].to_pddl(), &d).unwrap();
    (d, p)
}

#[test]
fn delivery_domain_shape() {
    let d = delivery_domain();
    assert_eq!(d.predicates.len(), 4);
    assert_eq!(d.actions.len(), 3);
    assert!(d.types.is_subtype("truck", "item"));
    assert!(d.types.is_subtype("package", "item"));
    assert!(!d.types.is_subtype("cell", "item"));
    assert_eq!(d.static_predicates(), vec!["adjacent".to_string()]);
}

#[test]
fn unsupported_requirement_rejected() {
    let text = "(define (domain x)\n  (:requirements :strips :adl))";
    match parse_domain(text) {
        Err(PddlError::UnsupportedRequirement { line, col, name }) => {
            assert_eq!((line, col, name.as_str()), (2, 26, ":adl"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn undefined_predicate() {
    let text = "(define (domain x) (:predicates)\n (:action a :parameters () :precondition (p) :effect (and)))";
    assert!(matches!(
        parse_domain(text),
        Err(PddlError::UndefinedPredicate { line: 2, .. })
    ));
}

#[test]
fn type_cycle() {
    let text = "(define (domain x) (:requirements :typing) (:types a - b b - a))";
    assert!(matches!(parse_domain(text), Err(PddlError::TypeCycle(_))));
}

#[test]
fn syntax_error_position() {
    let text = "(define (domain x)\n  (:predicates (p ?x)\n";
    assert!(matches!(
        parse_domain(text),
        Err(PddlError::Syntax {
            line: 2,
            col: 3,
            ..
        })
    ));
}

#[test]
fn three_package_problem_counts() {
    let d = delivery_domain();
    let p = parse_problem(&delivery::three_package_instance(), &d).unwrap();
    assert_eq!(p.count_of_type("truck"), 1);
    assert_eq!(p.count_of_type("package"), 3);
    assert_eq!(p.count_of_type("cell"), 9);
    let task = ground(&d, &p).unwrap();
    let a = task.universe.atom_by_name("(at t1 c4)").unwrap();
    assert!(task.init.contains(a));
    assert!(!goal_satisfied(&task.init, &task));
}

#[test]
fn t01_counts() {
    let (_, p) = t01();
    assert_eq!(p.count_of_type("cell"), 4);
    assert_eq!(p.count_of_type("package"), 1);
    assert_eq!(p.count_of_type("truck"), 1);
}

#[test]
fn empty_goal_is_vacuous() {
    let d = delivery_domain();
    let text = "(define (problem e) (:domain delivery) (:objects t1 - truck c - cell) (:init (at t1 c)) (:goal (and)))";
    let p = parse_problem(text, &d).unwrap();
    assert!(p.goal.is_empty());
    let task = ground(&d, &p).unwrap();
    assert!(goal_satisfied(&task.init, &task));
    assert!(goal_satisfied(&State::empty(task.num_atoms()), &task));
}

#[test]
fn problem_errors() {
    let d = delivery_domain();
    let bad_type =
        "(define (problem e) (:domain delivery) (:objects t1 - lorry) (:init) (:goal (and)))";
    assert!(matches!(
        parse_problem(bad_type, &d),
        Err(PddlError::UnknownType { .. })
    ));
    let arity = "(define (problem e) (:domain delivery) (:objects t1 - truck) (:init (empty t1 t1)) (:goal (and)))";
    assert!(matches!(
        parse_problem(arity, &d),
        Err(PddlError::ArityMismatch { .. })
    ));
    let unknown =
        "(define (problem e) (:domain delivery) (:objects t1 - truck) (:init) (:goal (empty t2)))";
    assert!(matches!(
        parse_problem(unknown, &d),
        Err(PddlError::UnknownObject { .. })
    ));
}

#[test]
fn move_actions_follow_adjacency() {
    let (d, p) = t01();
    let task = ground(&d, &p).unwrap();
    let adjacent: Vec<(String, String)> = p
        .init
        .iter()
        .filter(|l| l.predicate == "adjacent")
        .map(|l| (l.args[0].clone(), l.args[1].clone()))
        .collect();
    // Brute force: every (truck, cell, cell) triple, kept iff listed adjacent.
    let cells: Vec<&str> = p
        .objects
        .iter()
        .filter(|(_, t)| t == "cell")
        .map(|(o, _)| o.as_str())
        .collect();
    let mut expected = Vec::new();
    for a in &cells {
        for b in &cells {
            if adjacent.contains(&(a.to_string(), b.to_string())) {
                expected.push(format!("(move t1 {a} {b})"));
            }
        }
    }
    expected.sort();
    let got: Vec<String> = task
        .actions
        .iter()
        .filter(|a| a.name.starts_with("(move"))
        .map(|a| a.name.clone())
        .collect();
    assert_eq!(got, expected);
    assert_eq!(got.len(), 8);
}

#[test]
fn zero_objects_of_type_gives_no_actions() {
    let d = delivery_domain();
    let text = "(define (problem e) (:domain delivery) (:objects t1 - truck c - cell) (:init (at t1 c) (empty t1)) (:goal (and)))";
    let task = ground(&d, &parse_problem(text, &d).unwrap()).unwrap();
    assert!(task
        .actions
        .iter()
        .all(|a| !a.name.starts_with("(pick-up") && !a.name.starts_with("(drop")));
}

#[test]
fn grounding_limits() {
    let (d, p) = t01();
    let r = ground_with_limits(
        &d,
        &p,
        GroundingLimits {
            max_atoms: 5,
            max_actions: 100,
        },
    );
    assert!(matches!(r, Err(PddlError::Resource { what: "atom", .. })));
    let r = ground_with_limits(
        &d,
        &p,
        GroundingLimits {
            max_atoms: 1000,
            max_actions: 3,
        },
    );
    assert!(matches!(r, Err(PddlError::Resource { what: "action", .. })));
}

#[test]
fn atoms_in_canonical_order() {
    let (d, p) = t01();
    let task = ground(&d, &p).unwrap();
    let u = &task.universe;
    let keys: Vec<(String, Vec<String>)> = u
        .atoms
        .iter()
        .map(|a| {
            (
                u.predicates[a.predicate].name.clone(),
                a.args.iter().map(|&o| u.objects[o].clone()).collect(),
            )
        })
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    // Full typed instantiation: at(item, cell) = 2 items x 4 cells.
    assert_eq!(
        u.atoms_by_predicate[u.predicate_index("at").unwrap()].len(),
        8
    );
    assert_eq!(
        u.atoms_by_predicate[u.predicate_index("adjacent").unwrap()].len(),
        16
    );
}

#[test]
fn apply_move_and_pickup() {
    let (d, p) = t01();
    let task = ground(&d, &p).unwrap();
    let u = &task.universe;
    let mv = task.action_by_name("move(t1, c-0-1, c-1-1)").unwrap();
    let s1 = apply(&task.init, mv).unwrap();
    assert!(s1.contains(u.atom_by_name("(at t1 c-1-1)").unwrap()));
    assert!(!s1.contains(u.atom_by_name("(at t1 c-0-1)").unwrap()));
    let pick = task.action_by_name("(pick-up t1 p0 c-1-1)").unwrap();
    assert!(matches!(
        apply(&task.init, pick),
        Err(PddlError::Inapplicable(_))
    ));
    let s2 = apply(&s1, pick).unwrap();
    assert!(s2.contains(u.atom_by_name("(carrying t1 p0)").unwrap()));
    assert!(!s2.contains(u.atom_by_name("(empty t1)").unwrap()));
}

#[test]
fn identity_effect() {
    let a = GroundAction {
        name: "(noop)".into(),
        pre: vec![],
        neg_pre: vec![],
        add: vec![],
        delete: vec![],
    };
    let s = State::from_atoms(10, [1, 4, 7]);
    assert_eq!(apply(&s, &a).unwrap(), s);
}

#[test]
fn t01_plan_reaches_goal() {
    let (d, p) = t01();
    let task = ground(&d, &p).unwrap();
    let plan = [
        "(move t1 c-0-1 c-1-1)",
        "(pick-up t1 p0 c-1-1)",
        "(move t1 c-1-1 c-1-0)",
        "(drop t1 p0 c-1-0)",
    ];
    let mut s = task.init.clone();
    for step in plan {
        s = apply(&s, task.action_by_name(step).unwrap()).unwrap();
    }
    assert!(goal_satisfied(&s, &task));
}

#[test]
fn negative_preconditions_and_equality() {
    let text =
        "(define (domain sw) (:requirements :strips :typing :negative-preconditions :equality)
      (:types obj)
      (:predicates (on ?x - obj) (linked ?x ?y - obj))
      (:action flip :parameters (?x ?y - obj)
        :precondition (and (not (on ?x)) (not (= ?x ?y)) (linked ?x ?y))
        :effect (on ?x)))";
    let d = parse_domain(text).unwrap();
    let p = parse_problem(
        "(define (problem q) (:domain sw) (:objects a b - obj) (:init (linked a b) (linked b b)) (:goal (on a)))",
        &d,
    )
    .unwrap();
    let task = ground(&d, &p).unwrap();
    let names: Vec<&str> = task.actions.iter().map(|a| a.name.as_str()).collect();
    assert_eq!(names, vec!["(flip a b)"]);
    assert_eq!(task.actions[0].neg_pre.len(), 1);
    let s = apply(&task.init, &task.actions[0]).unwrap();
    assert!(!applicable(&s, &task.actions[0]));
}

#[test]
fn negative_goal_rejected_at_grounding() {
    let d = delivery_domain();
    let text = "(define (problem e) (:domain delivery) (:objects t1 - truck c - cell) (:init) (:goal (not (empty t1))))";
    let p = parse_problem(text, &d).unwrap();
    assert!(matches!(ground(&d, &p), Err(PddlError::UnsupportedGoal(_))));
}

#[test]
fn print_round_trip() {
    let d = delivery_domain();
    assert_eq!(parse_domain(&print_domain(&d)).unwrap(), d);
    let p = parse_problem(&delivery::three_package_instance(), &d).unwrap();
    assert_eq!(parse_problem(&print_problem(&p), &d).unwrap(), p);
}

#[test]
fn split_call_forms() {
    assert_eq!(
        split_call("(Move t1 a b)"),
        Some(("move".into(), vec!["t1".into(), "a".into(), "b".into()]))
    );
    assert_eq!(
        split_call("move(t1, a, b)"),
        Some(("move".into(), vec!["t1".into(), "a".into(), "b".into()]))
    );
    assert_eq!(split_call("(a (b))"), None);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn frame_property(seed in 0u64..500, steps in 0usize..12) {
            let d = delivery_domain();
            let spec = delivery::DeliverySpec::random(3, 3, 2, seed);
            let task = ground(&d, &parse_problem(&spec.to_pddl(), &d).unwrap()).unwrap();
            let mut s = task.init.clone();
            for k in 0..steps {
                let app: Vec<&GroundAction> = task.actions.iter().filter(|a| applicable(&s, a)).collect();
                if app.is_empty() { break; }
                let a = app[(seed as usize + k * 7) % app.len()];
                let next = apply(&s, a).unwrap();
                for atom in 0..task.num_atoms() as u32 {
                    if !a.add.contains(&atom) && !a.delete.contains(&atom) {
                        prop_assert_eq!(s.contains(atom), next.contains(atom));
                    }
                }
                for &x in &a.add { prop_assert!(next.contains(x)); }
                s = next;
            }
        }

        #[test]
        fn grounding_deterministic(seed in 0u64..200) {
            let d = delivery_domain();
            let spec = delivery::DeliverySpec::random(3, 2, 2, seed);
            let p = parse_problem(&spec.to_pddl(), &d).unwrap();
            let a = ground(&d, &p).unwrap();
            let b = ground(&d, &p).unwrap();
            prop_assert_eq!(&a.universe.atom_names, &b.universe.atom_names);
            prop_assert_eq!(&a.actions, &b.actions);
            for act in &a.actions {
                prop_assert!(act.add.iter().all(|x| !act.delete.contains(x)));
            }
        }
    }
}

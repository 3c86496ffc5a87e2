use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use proptest::prelude::*;

use super::*;
use crate::delivery;
use crate::pddl::{parse_domain, parse_problem, DomainDef, ProblemDef};
use crate::trajectory::{GoalAnnotatedTask, TrajectorySet};

fn domain() -> DomainDef {
    parse_domain(delivery::DOMAIN).unwrap()
}

fn three_package_task() -> GoalAnnotatedTask {
    let d = domain();
    let p = parse_problem(&delivery::three_package_instance(), &d).unwrap();
    GoalAnnotatedTask::new(&d, &p).unwrap()
}

fn loop_set() -> TrajectorySet {
    let d = domain();
    let runs: Vec<(ProblemDef, Vec<String>)> = delivery::loop_example_instances()
        .into_iter()
        .map(|(s, plan)| (parse_problem(&s.to_pddl(), &d).unwrap(), plan))
        .collect();
    TrajectorySet::build(&d, &runs).unwrap()
}

fn config(limit: usize) -> GenerationConfig {
    GenerationConfig {
        name: "test".into(),
        complexity_limit: limit,
        time_limit: Duration::from_secs(600),
        feature_limit: 100_000,
    }
}

const UNDELIVERED: &str =
    "n_count(c_some(r_diff(r_primitive(at_g,0,1),r_primitive(at,0,1)),c_top))";

#[test]
fn complexity_counts_nodes() {
    assert_eq!(
        Feature::parse("n_count(c_primitive(empty,0))")
            .unwrap()
            .complexity(),
        1
    );
    assert_eq!(
        Feature::parse("n_count(c_not(c_primitive(empty,0)))")
            .unwrap()
            .complexity(),
        2
    );
    assert_eq!(Feature::parse(UNDELIVERED).unwrap().complexity(), 5);
}

#[test]
fn presets_accept_by_complexity() {
    // Seven nested negations around a chain of intersections: 15 nodes.
    let mut c = Concept::primitive("empty", 0);
    for _ in 0..7 {
        c = Concept::and(Concept::not(c), Concept::Top);
    }
    let c = Concept::not(Concept::and(c, Concept::Top));
    let f = Feature::numeric(c);
    assert!(f.complexity() > 15);
    let mut c = Concept::primitive("empty", 0);
    for _ in 0..7 {
        c = Concept::and(c, Concept::Top);
    }
    let f = Feature::numeric(c);
    assert_eq!(f.complexity(), 15);
    assert!(GenerationConfig::preset("b5").unwrap().accepts(&f));
    assert!(!GenerationConfig::preset("b1").unwrap().accepts(&f));
    assert!(GenerationConfig::preset("b9").is_err());
    let b3 = GenerationConfig::preset("b3").unwrap();
    assert_eq!(
        (
            b3.complexity_limit,
            b3.feature_limit,
            b3.time_limit.as_secs()
        ),
        (11, 5000, 3600)
    );
}

#[test]
fn parse_errors() {
    assert!(Feature::parse("n_count(c_top").is_err());
    assert!(Feature::parse("n_count(c_top) x").is_err());
    assert!(Feature::parse("count(c_top)").is_err());
    assert!(Feature::parse("n_count(c_primitive(at,x))").is_err());
    assert!(parse_role("r_primitive(at,0,1)").is_ok());
    assert!(parse_concept(" c_and( c_top , c_bot ) ").is_ok());
}

#[test]
fn empty_truck_on_initial_state() {
    let task = three_package_task();
    let f = Feature::parse("n_count(c_primitive(empty,0))").unwrap();
    assert_eq!(f.evaluate(&task.task.universe, &task.task.init), 1);
    let b = Feature::parse("b_nonempty(c_primitive(empty,0))").unwrap();
    assert_eq!(b.evaluate(&task.task.universe, &task.task.init), 1);
}

#[test]
fn undelivered_count_on_initial_state() {
    let task = three_package_task();
    let f = Feature::parse(UNDELIVERED).unwrap();
    assert_eq!(f.evaluate(&task.task.universe, &task.task.init), 3);
}

#[test]
fn unknown_predicate_has_empty_extension() {
    let task = three_package_task();
    let f = Feature::parse("n_count(c_primitive(nowhere,0))").unwrap();
    assert_eq!(f.evaluate(&task.task.universe, &task.task.init), 0);
    let f = Feature::parse("n_count(c_not(c_type(nothing)))").unwrap();
    assert_eq!(f.evaluate(&task.task.universe, &task.task.init), 13);
}

// Independent interpreter over atom names.
struct Naive {
    objects: Vec<String>,
    types: BTreeMap<String, BTreeSet<String>>,
    atoms: BTreeSet<(String, Vec<String>)>,
}

impl Naive {
    fn new(task: &GoalAnnotatedTask, state: &crate::pddl::State) -> Naive {
        let u = &task.task.universe;
        let mut types: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (o, t) in &task.problem.objects {
            let mut all = task.domain.types.ancestors(t);
            all.push(t.clone());
            all.push("object".into());
            for a in all {
                types.entry(a).or_default().insert(o.clone());
            }
        }
        let atoms = u
            .state_names(state)
            .iter()
            .map(|n| {
                let (p, a) = crate::pddl::split_call(n).unwrap();
                (p, a)
            })
            .collect();
        Naive {
            objects: u.objects.clone(),
            types,
            atoms,
        }
    }

    fn concept(&self, c: &Concept) -> BTreeSet<String> {
        let all: BTreeSet<String> = self.objects.iter().cloned().collect();
        match c {
            Concept::Top => all,
            Concept::Bot => BTreeSet::new(),
            Concept::Primitive { pred, pos } => self
                .atoms
                .iter()
                .filter(|(p, a)| p == pred && a.len() > *pos)
                .map(|(_, a)| a[*pos].clone())
                .collect(),
            Concept::Type(t) => self.types.get(t).cloned().unwrap_or_default(),
            Concept::Not(c) => all.difference(&self.concept(c)).cloned().collect(),
            Concept::And(a, b) => self
                .concept(a)
                .intersection(&self.concept(b))
                .cloned()
                .collect(),
            Concept::Or(a, b) => self.concept(a).union(&self.concept(b)).cloned().collect(),
            Concept::Some(r, c) => {
                let r = self.role(r);
                let c = self.concept(c);
                all.into_iter()
                    .filter(|x| r.iter().any(|(a, b)| a == x && c.contains(b)))
                    .collect()
            }
            Concept::All(r, c) => {
                let r = self.role(r);
                let c = self.concept(c);
                all.into_iter()
                    .filter(|x| r.iter().all(|(a, b)| a != x || c.contains(b)))
                    .collect()
            }
        }
    }

    fn role(&self, r: &Role) -> BTreeSet<(String, String)> {
        match r {
            Role::Primitive { pred, from, to } => self
                .atoms
                .iter()
                .filter(|(p, a)| p == pred && a.len() > *from.max(to))
                .map(|(_, a)| (a[*from].clone(), a[*to].clone()))
                .collect(),
            Role::Inverse(r) => self.role(r).into_iter().map(|(a, b)| (b, a)).collect(),
            Role::Compose(a, b) => {
                let ra = self.role(a);
                let rb = self.role(b);
                let mut out = BTreeSet::new();
                for (x, y) in &ra {
                    for (y2, z) in &rb {
                        if y == y2 {
                            out.insert((x.clone(), z.clone()));
                        }
                    }
                }
                out
            }
            Role::And(a, b) => self.role(a).intersection(&self.role(b)).cloned().collect(),
            Role::Diff(a, b) => self.role(a).difference(&self.role(b)).cloned().collect(),
        }
    }
}

fn arb_role() -> impl Strategy<Value = Role> {
    let leaf = prop_oneof![
        Just(Role::primitive("at", 0, 1)),
        Just(Role::primitive("at_g", 0, 1)),
        Just(Role::primitive("carrying", 0, 1)),
        Just(Role::primitive("adjacent", 0, 1)),
    ];
    leaf.prop_recursive(3, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Role::inverse),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Role::compose(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Role::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Role::diff(a, b)),
        ]
    })
}

fn arb_concept() -> impl Strategy<Value = Concept> {
    let leaf = prop_oneof![
        Just(Concept::Top),
        Just(Concept::Bot),
        Just(Concept::primitive("empty", 0)),
        Just(Concept::primitive("at", 0)),
        Just(Concept::primitive("at", 1)),
        Just(Concept::primitive("at_g", 1)),
        Just(Concept::primitive("carrying", 1)),
        Just(Concept::Type("package".into())),
        Just(Concept::Type("item".into())),
        Just(Concept::Type("cell".into())),
    ];
    leaf.prop_recursive(4, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Concept::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Concept::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Concept::or(a, b)),
            (arb_role(), inner.clone()).prop_map(|(r, c)| Concept::some(r, c)),
            (arb_role(), inner).prop_map(|(r, c)| Concept::all(r, c)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn extension_matches_naive_interpreter(c in arb_concept(), bits in proptest::collection::vec(any::<bool>(), 64)) {
        let d = domain();
        let p = parse_problem(&delivery::training_instances()[1].to_pddl(), &d).unwrap();
        let task = GoalAnnotatedTask::new(&d, &p).unwrap();
        let u = &task.task.universe;
        // Random state over the atom universe, keeping goal atoms.
        let mut s = crate::pddl::State::empty(u.len());
        for a in 0..u.len() {
            if bits[a % bits.len()] ^ (a % 3 == 0) || task.goal_atoms.contains(&(a as u32)) {
                s.insert(a as u32);
            }
        }
        let naive = Naive::new(&task, &s);
        let fast: BTreeSet<String> =
            eval_concept(&c, u, &s).ones().map(|o| u.objects[o].clone()).collect();
        prop_assert_eq!(fast, naive.concept(&c));
    }

    #[test]
    fn canonical_string_round_trip(c in arb_concept()) {
        let f = Feature::numeric(c);
        let back = Feature::parse(f.id()).unwrap();
        prop_assert_eq!(back.concept.clone(), f.concept.clone());
        prop_assert_eq!(back.complexity(), f.complexity());
    }
}

#[test]
fn complexity_one_is_base_only() {
    let set = loop_set();
    let pool = generate_pool(&set, &config(1)).unwrap();
    assert!(pool.features.iter().all(|f| f.complexity() == 1));
    assert!(pool
        .features
        .iter()
        .any(|f| f.id() == "n_count(c_primitive(empty,0))"));
    assert!(pool.features.iter().any(|f| f.id() == "n_count(c_top)"));
}

#[test]
fn generated_pool_contains_key_features() {
    let set = loop_set();
    let pool = generate_pool(&set, &config(5)).unwrap();
    // Some extensionally equal form survives (ties go to the smaller string).
    let target = Valuations::compute(&[Feature::parse(UNDELIVERED).unwrap()], &set);
    assert!(
        (0..pool.len()).any(|i| pool.valuations.row(i) == target.row(0)),
        "{}",
        pool.export()
    );
    let ids: BTreeSet<&str> = pool.features.iter().map(Feature::id).collect();
    assert_eq!(ids.len(), pool.len());
    assert!(pool
        .features
        .windows(2)
        .all(|w| w[0].complexity() <= w[1].complexity()));
    assert_eq!(pool.valuations, Valuations::compute(&pool.features, &set));
}

#[test]
fn enumeration_is_monotone_in_complexity() {
    let set = loop_set();
    let mut prev: BTreeSet<String> = BTreeSet::new();
    for k in 1..=5 {
        let pool = generate_pool(&set, &config(k)).unwrap();
        let ids: BTreeSet<String> = pool.features.iter().map(|f| f.id().to_string()).collect();
        assert!(prev.is_subset(&ids), "tier {k}");
        prev = ids;
    }
}

#[test]
fn feature_limit_truncates_prefix() {
    let set = loop_set();
    let full = generate_pool(&set, &config(4)).unwrap();
    let mut c = config(4);
    c.feature_limit = 10;
    let cut = generate_pool(&set, &c).unwrap();
    assert_eq!(cut.len(), 10);
    assert_eq!(cut.features[..], full.features[..10]);
}

#[test]
fn zero_time_budget_gives_empty_pool() {
    let set = loop_set();
    let mut c = config(3);
    c.time_limit = Duration::ZERO;
    assert!(matches!(
        generate_pool(&set, &c),
        Err(FeatureError::EmptyPool)
    ));
    c.time_limit = Duration::from_secs(5);
    c.complexity_limit = 0;
    assert!(matches!(
        generate_pool(&set, &c),
        Err(FeatureError::EmptyPool)
    ));
}

#[test]
fn generation_is_deterministic() {
    let set = loop_set();
    let a = generate_pool(&set, &config(4)).unwrap();
    let b = generate_pool(&set, &config(4)).unwrap();
    assert_eq!(a.export(), b.export());
}

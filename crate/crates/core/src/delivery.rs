//! Grid Delivery domain: bundled domain text and an instance writer.
//!
//! Cells are named `c-x-y` with `x` the column and `y` the row, origin at the
//! bottom left.

use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DOMAIN: &str = include_str!("../data/delivery/domain.pddl");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeliverySpec {
    pub name: String,
    pub width: usize,
    pub height: usize,
    pub truck: (usize, usize),
    /// `(position, goal)` per package; package `i` is named `p{i}`.
    pub packages: Vec<((usize, usize), (usize, usize))>,
}

pub fn cell(x: usize, y: usize) -> String {
    format!("c-{x}-{y}")
}

impl DeliverySpec {
    pub fn to_pddl(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "(define (problem {})", self.name);
        let _ = writeln!(s, "  (:domain delivery)");
        let cells: Vec<String> = (0..self.width)
            .flat_map(|x| (0..self.height).map(move |y| cell(x, y)))
            .collect();
        let pkgs: Vec<String> = (0..self.packages.len()).map(|i| format!("p{i}")).collect();
        let _ = writeln!(s, "  (:objects t1 - truck");
        if !pkgs.is_empty() {
            let _ = writeln!(s, "    {} - package", pkgs.join(" "));
        }
        let _ = writeln!(s, "    {} - cell)", cells.join(" "));
        let _ = writeln!(s, "  (:init");
        let _ = writeln!(s, "    (at t1 {})", cell(self.truck.0, self.truck.1));
        let _ = writeln!(s, "    (empty t1)");
        for (i, (pos, _)) in self.packages.iter().enumerate() {
            let _ = writeln!(s, "    (at p{i} {})", cell(pos.0, pos.1));
        }
        for x in 0..self.width {
            for y in 0..self.height {
                let mut nbrs = Vec::new();
                if x > 0 {
                    nbrs.push((x - 1, y));
                }
                if x + 1 < self.width {
                    nbrs.push((x + 1, y));
                }
                if y > 0 {
                    nbrs.push((x, y - 1));
                }
                if y + 1 < self.height {
                    nbrs.push((x, y + 1));
                }
                for (nx, ny) in nbrs {
                    let _ = writeln!(s, "    (adjacent {} {})", cell(x, y), cell(nx, ny));
                }
            }
        }
        let _ = writeln!(s, "  )");
        let goals: Vec<String> = self
            .packages
            .iter()
            .enumerate()
            .map(|(i, (_, g))| format!("(at p{i} {})", cell(g.0, g.1)))
            .collect();
        let _ = writeln!(s, "  (:goal (and {})))", goals.join(" "));
        s
    }

    /// Random instance; packages start away from their goal cells.
    pub fn random(width: usize, height: usize, packages: usize, seed: u64) -> DeliverySpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cells: Vec<(usize, usize)> = (0..width)
            .flat_map(|x| (0..height).map(move |y| (x, y)))
            .collect();
        let truck = *cells.choose(&mut rng).expect("non-empty grid");
        let mut pk = Vec::with_capacity(packages);
        for _ in 0..packages {
            let pos = *cells.choose(&mut rng).unwrap();
            let goal = loop {
                let g = *cells.choose(&mut rng).unwrap();
                if g != pos || cells.len() == 1 {
                    break g;
                }
            };
            pk.push((pos, goal));
        }
        DeliverySpec {
            name: format!("delivery-{width}x{height}-{packages}-s{seed}"),
            width,
            height,
            truck,
            packages: pk,
        }
    }
}

/// Training instances t01..t05.
pub fn training_instances() -> Vec<DeliverySpec> {
    vec![
        DeliverySpec {
            name: "t01".into(),
            width: 2,
            height: 2,
            truck: (0, 1),
            packages: vec![((1, 1), (1, 0))],
        },
        DeliverySpec {
            name: "t02".into(),
            width: 2,
            height: 2,
            truck: (1, 0),
            packages: vec![((1, 1), (0, 0)), ((0, 1), (1, 1))],
        },
        DeliverySpec {
            name: "t03".into(),
            width: 3,
            height: 3,
            truck: (2, 2),
            packages: vec![((2, 1), (1, 1))],
        },
        DeliverySpec {
            name: "t04".into(),
            width: 3,
            height: 3,
            truck: (1, 2),
            packages: vec![((2, 1), (1, 1)), ((2, 2), (0, 1))],
        },
        DeliverySpec {
            name: "t05".into(),
            width: 3,
            height: 3,
            truck: (0, 2),
            packages: vec![((2, 1), (0, 1)), ((2, 2), (0, 0)), ((1, 2), (2, 1))],
        },
    ]
}

/// The three small instances whose trajectories illustrate loop discovery,
/// with their plans (one package, two packages, three packages).
pub fn loop_example_instances() -> Vec<(DeliverySpec, Vec<String>)> {
    let goal = (1, 0);
    let i1 = DeliverySpec {
        name: "ex1".into(),
        width: 2,
        height: 2,
        truck: (0, 1),
        packages: vec![((1, 1), goal)],
    };
    let i2 = DeliverySpec {
        name: "ex2".into(),
        width: 2,
        height: 2,
        truck: (0, 1),
        packages: vec![((1, 1), goal), ((0, 0), goal)],
    };
    let i3 = DeliverySpec {
        name: "ex3".into(),
        width: 3,
        height: 2,
        truck: (0, 1),
        packages: vec![((1, 1), goal), ((0, 0), goal), ((2, 0), goal)],
    };
    let first = [
        "(move t1 c-0-1 c-1-1)",
        "(pick-up t1 p0 c-1-1)",
        "(move t1 c-1-1 c-1-0)",
        "(drop t1 p0 c-1-0)",
    ];
    let second = [
        "(move t1 c-1-0 c-0-0)",
        "(pick-up t1 p1 c-0-0)",
        "(move t1 c-0-0 c-1-0)",
        "(drop t1 p1 c-1-0)",
    ];
    let third = [
        "(move t1 c-1-0 c-2-0)",
        "(pick-up t1 p2 c-2-0)",
        "(move t1 c-2-0 c-1-0)",
        "(drop t1 p2 c-1-0)",
    ];
    let p1: Vec<String> = first.iter().map(|s| s.to_string()).collect();
    let p2: Vec<String> = first
        .iter()
        .chain(second.iter())
        .map(|s| s.to_string())
        .collect();
    let p3: Vec<String> = first
        .iter()
        .chain(second.iter())
        .chain(third.iter())
        .map(|s| s.to_string())
        .collect();
    vec![(i1, p1), (i2, p2), (i3, p3)]
}

/// 3×3 instance with one truck and three packages sharing a target cell.
///
/// Cells are named `c1`..`c9` rather than by coordinate so the truck starts
/// at `c4`.
pub fn three_package_instance() -> String {
    // (name, x, y)
    let cells = [
        ("c1", 0, 0),
        ("c2", 1, 0),
        ("c3", 1, 1),
        ("c4", 0, 1),
        ("c5", 2, 0),
        ("c6", 2, 1),
        ("c7", 0, 2),
        ("c8", 1, 2),
        ("c9", 2, 2),
    ];
    let name_at = |x: i32, y: i32| cells.iter().find(|c| c.1 == x && c.2 == y).map(|c| c.0);
    let mut s = String::new();
    s.push_str("(define (problem three-packages)\n  (:domain delivery)\n");
    s.push_str("  (:objects t1 - truck p1 p2 p3 - package c1 c2 c3 c4 c5 c6 c7 c8 c9 - cell)\n");
    s.push_str("  (:init (at t1 c4) (empty t1) (at p1 c6) (at p2 c8) (at p3 c5)\n");
    for (n, x, y) in cells {
        for (dx, dy) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
            if let Some(m) = name_at(x + dx, y + dy) {
                let _ = writeln!(s, "    (adjacent {n} {m})");
            }
        }
    }
    s.push_str("  )\n  (:goal (and (at p1 c1) (at p2 c1) (at p3 c1))))\n");
    s
}

/// Hand-written plan for [`three_package_instance`]: deliver p2, then p1,
/// then p3.
pub fn three_package_plan() -> Vec<String> {
    [
        "(move t1 c4 c7)",
        "(move t1 c7 c8)",
        "(pick-up t1 p2 c8)",
        "(move t1 c8 c3)",
        "(move t1 c3 c2)",
        "(move t1 c2 c1)",
        "(drop t1 p2 c1)",
        "(move t1 c1 c2)",
        "(move t1 c2 c5)",
        "(move t1 c5 c6)",
        "(pick-up t1 p1 c6)",
        "(move t1 c6 c5)",
        "(move t1 c5 c2)",
        "(move t1 c2 c1)",
        "(drop t1 p1 c1)",
        "(move t1 c1 c2)",
        "(move t1 c2 c5)",
        "(pick-up t1 p3 c5)",
        "(move t1 c5 c2)",
        "(move t1 c2 c1)",
        "(drop t1 p3 c1)",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

/// Test instances on square grids from 3×3 to 6×6.
pub fn test_instances() -> Vec<DeliverySpec> {
    let mut v = Vec::new();
    let mut seed = 1000;
    for (n, packages) in [
        (3, [2, 3, 4]),
        (4, [2, 3, 5]),
        (5, [3, 4, 6]),
        (6, [3, 5, 6]),
    ] {
        for p in packages {
            let mut spec = DeliverySpec::random(n, n, p, seed);
            spec.name = format!("{n}x{n}-{p}");
            v.push(spec);
            seed += 1;
        }
    }
    v
}

/// Hand-written feature set `f1..f5` for the Delivery examples: empty
/// trucks, items alone with a truck, packages whose goal cell holds a truck,
/// the same with an empty truck, and undelivered packages.
pub fn example_features() -> Vec<crate::features::Feature> {
    [
        "n_count(c_primitive(empty,0))",
        "n_count(c_some(r_primitive(at,0,1),c_all(r_inverse(r_primitive(at,0,1)),c_type(truck))))",
        "n_count(c_some(r_primitive(at_g,0,1),c_some(r_inverse(r_primitive(at,0,1)),c_type(truck))))",
        "n_count(c_some(r_primitive(at_g,0,1),c_some(r_inverse(r_primitive(at,0,1)),c_primitive(empty,0))))",
        "n_count(c_some(r_diff(r_primitive(at_g,0,1),r_primitive(at,0,1)),c_top))",
    ]
    .iter()
    .map(|s| crate::features::Feature::parse(s).expect("valid feature"))
    .collect()
}

/// Four-node example graph over [`example_features`] with one loop from the
/// last node back to the first, exiting once nothing is left to deliver.
pub fn example_graph() -> crate::discovery::Graph {
    use crate::discovery::{Graph, Landmark, LoopEdge, Provenance};
    use crate::statefns::{Direction, Progressor, SignedDescriptor as D};
    let node = |ds: &[(usize, bool)]| Landmark {
        descriptors: ds.iter().map(|&(f, p)| D::new(f, p)).collect(),
    };
    Graph {
        features: example_features(),
        nodes: vec![
            node(&[(1, false)]),
            node(&[(0, false), (1, true)]),
            node(&[(2, true)]),
            node(&[(0, true), (1, false), (3, true)]),
        ],
        loops: vec![LoopEdge {
            from: 3,
            to: 0,
            exit: vec![D::new(4, false)],
            progress: vec![Progressor {
                feature: 4,
                direction: Direction::Decrease,
            }],
            counter: vec![4],
        }],
        provenance: Provenance::default(),
    }
}

/// A shortest plan for t01.
pub fn training_plan_t01() -> Vec<String> {
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

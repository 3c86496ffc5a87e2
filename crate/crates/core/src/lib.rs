//! Generalized landmark discovery from plan trajectories and a
//! landmark-guided best-first planner for typed STRIPS.
//!
//! Pipeline: [`pddl`] parses and grounds tasks, [`trajectory`] annotates
//! goals and executes plans, [`features`] builds a description-logic feature
//! pool, [`statefns`] turns features into descriptors/progressors/values and
//! prunes them, [`discovery`] mines a landmark graph with loops, and
//! [`search`] plans with the resulting heuristic.

pub mod delivery;
pub mod discovery;
pub mod features;
pub mod pddl;
pub mod pipeline;
pub mod search;
pub mod statefns;
pub mod trajectory;

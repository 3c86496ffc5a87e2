//! End-to-end steps shared by the command-line tool, the C interface and
//! the integration tests.

use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};

use crate::discovery::{discover_graph, to_graph, DiscoveryError, Graph, Provenance};
use crate::features::{generate_pool, FeatureError, GenerationConfig, Valuations};
use crate::pddl::{ground, DomainDef, PddlError, ProblemDef};
use crate::search::{check_fingerprint, plan, SearchConfig, SearchError, SearchOutcome};
use crate::statefns::{derive, preprocess, Phi, StateFnError};
use crate::trajectory::{GoalAnnotatedTask, Trajectory, TrajectoryError, TrajectorySet};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Pddl(#[from] PddlError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    StateFn(#[from] StateFnError),
    #[error(transparent)]
    Discovery(#[from] DiscoveryError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("training instance {0} was not solved: {1}")]
    TrainingUnsolved(String, &'static str),
}

/// Solves every problem with the baseline planner (no graph).
pub fn solve_training(
    domain: &DomainDef,
    problems: &[ProblemDef],
    config: &SearchConfig,
) -> Result<Vec<(ProblemDef, Vec<String>)>, PipelineError> {
    let mut runs = Vec::with_capacity(problems.len());
    for p in problems {
        let task = ground(domain, p)?;
        match plan(&task, None, config)? {
            SearchOutcome::Solved { plan, .. } => runs.push((p.clone(), plan)),
            other => {
                return Err(PipelineError::TrainingUnsolved(
                    p.name.clone(),
                    other.status(),
                ))
            }
        }
    }
    Ok(runs)
}

/// `task_id:sha256(plan)`.
pub fn trajectory_digest(t: &Trajectory) -> String {
    let mut h = Sha256::new();
    for a in &t.plan {
        h.update(a.as_bytes());
        h.update(b"\n");
    }
    let hex: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
    format!("{}:{hex}", t.task_id)
}

#[derive(Debug, Clone)]
pub struct DiscoverReport {
    pub pool_size: usize,
    pub preprocessed_size: usize,
    pub generation_time: Duration,
    pub discovery_time: Duration,
}

/// Pool generation, preprocessing and graph discovery.
pub fn discover(
    set: &TrajectorySet,
    config: &GenerationConfig,
    phi: Phi,
) -> Result<(Graph, DiscoverReport), PipelineError> {
    let start = Instant::now();
    let pool = generate_pool(set, config)?;
    let pool_size = pool.len();
    let kept = preprocess(&pool, phi)?;
    let generation_time = start.elapsed();
    let start = Instant::now();
    let fnset = derive(&kept);
    let vals: &Valuations = &kept.valuations;
    let d = discover_graph(&fnset, vals)?;
    let provenance = Provenance {
        domain_fingerprint: set.domain_fingerprint.clone(),
        generation: Some(format!(
            "{} complexity<={} features<={}",
            config.name, config.complexity_limit, config.feature_limit
        )),
        preprocess: Some(phi.to_string()),
        trajectories: set.trajectories.iter().map(trajectory_digest).collect(),
    };
    let graph = to_graph(&fnset, &d, provenance);
    let report = DiscoverReport {
        pool_size,
        preprocessed_size: kept.len(),
        generation_time,
        discovery_time: start.elapsed(),
    };
    Ok((graph, report))
}

/// Plans on the goal-annotated task so graph features over goal predicates
/// are evaluable. Checks the graph's domain fingerprint first.
pub fn plan_annotated(
    domain: &DomainDef,
    problem: &ProblemDef,
    graph: Option<&Graph>,
    config: &SearchConfig,
) -> Result<SearchOutcome, PipelineError> {
    if let Some(g) = graph {
        check_fingerprint(g, domain)?;
    }
    let task = GoalAnnotatedTask::new(domain, problem)?;
    Ok(plan(&task.task, graph, config)?)
}

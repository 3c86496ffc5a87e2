//! C interface. Handles are opaque and owned by the caller, who releases
//! them with the matching `*_free`. Every fallible call returns a
//! [`GmStatus`]; on failure [`gm_last_error`] describes the cause.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Duration;

use genmark::discovery::Graph;
use genmark::features::GenerationConfig;
use genmark::pddl::{parse_domain, parse_problem, DomainDef, ProblemDef};
use genmark::pipeline::{discover, plan_annotated, PipelineError};
use genmark::search::{HelperKind, LmgContext, SearchConfig, SearchError, SearchOutcome};
use genmark::statefns::Phi;
use genmark::trajectory::{self, GoalAnnotatedTask};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    FingerprintMismatch = 5,
    GraphInapplicable = 6,
    DiscoveryFailed = 7,
    OutOfRange = 8,
    Internal = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmOutcome {
    Solved = 0,
    Unsolvable = 1,
    ResourceLimit = 2,
}

pub const GM_HELPER_NONE: u32 = 0;
pub const GM_HELPER_HADD: u32 = 1;
pub const GM_HELPER_HMAX: u32 = 2;
pub const GM_HELPER_GOALCOUNT: u32 = 3;

/// Search settings. Zero caps mean unlimited.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GmSearchOptions {
    /// One of the `GM_HELPER_*` constants.
    pub helper: u32,
    pub prune: bool,
    pub max_expansions: u64,
    /// Seconds.
    pub timeout: f64,
}

/// A parsed domain and problem.
pub struct GmTask {
    domain: DomainDef,
    problem: ProblemDef,
}

pub struct GmGraph {
    graph: Graph,
}

/// Result of one search, including the statistics.
pub struct GmPlan {
    outcome: GmOutcome,
    actions: Vec<CString>,
    expanded: u64,
    evaluated: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl ToString) {
    let text = msg.to_string().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).expect("no interior nul"));
}

type Failure = (GmStatus, String);

/// Runs `f`, records its error message and catches panics.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            GmStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GmStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err((GmStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (GmStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| (GmStatus::NullArgument, format!("{what} is null")))
}

fn out_ptr<T>(out: *mut T) -> Result<(), Failure> {
    if out.is_null() {
        Err((GmStatus::NullArgument, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

fn parse_err(e: impl ToString) -> Failure {
    (GmStatus::Parse, e.to_string())
}

fn pipeline_err(e: PipelineError) -> Failure {
    let status = match &e {
        PipelineError::Search(SearchError::FingerprintMismatch { .. }) => {
            GmStatus::FingerprintMismatch
        }
        PipelineError::Search(
            SearchError::GraphInapplicable | SearchError::CounterDisagreement(_),
        ) => GmStatus::GraphInapplicable,
        PipelineError::Search(SearchError::NoHeuristic) => GmStatus::InvalidArgument,
        PipelineError::Discovery(_) | PipelineError::Feature(_) | PipelineError::StateFn(_) => {
            GmStatus::DiscoveryFailed
        }
        PipelineError::Pddl(_) | PipelineError::Trajectory(_) => GmStatus::Parse,
        PipelineError::TrainingUnsolved(..) => GmStatus::Internal,
    };
    (status, e.to_string())
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn gm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Default options: HAdd, pruning on, no caps.
#[no_mangle]
pub extern "C" fn gm_search_options_default() -> GmSearchOptions {
    GmSearchOptions {
        helper: GM_HELPER_HADD,
        prune: true,
        max_expansions: 0,
        timeout: 0.0,
    }
}

/// Parses PDDL domain and problem text.
///
/// # Safety
/// String arguments must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gm_task_new(
    domain: *const c_char,
    problem: *const c_char,
    out: *mut *mut GmTask,
) -> GmStatus {
    guard(|| {
        out_ptr(out)?;
        let d = parse_domain(text(domain, "domain")?).map_err(parse_err)?;
        let p = parse_problem(text(problem, "problem")?, &d).map_err(parse_err)?;
        GoalAnnotatedTask::new(&d, &p).map_err(parse_err)?;
        *out = Box::into_raw(Box::new(GmTask {
            domain: d,
            problem: p,
        }));
        Ok(())
    })
}

/// # Safety
/// `task` must come from [`gm_task_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn gm_task_free(task: *mut GmTask) {
    if !task.is_null() {
        drop(Box::from_raw(task));
    }
}

/// Loads a graph from its JSON form.
///
/// # Safety
/// `json` must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gm_graph_from_json(
    json: *const c_char,
    out: *mut *mut GmGraph,
) -> GmStatus {
    guard(|| {
        out_ptr(out)?;
        let graph = Graph::from_json(text(json, "json")?).map_err(parse_err)?;
        *out = Box::into_raw(Box::new(GmGraph { graph }));
        Ok(())
    })
}

/// Discovers a graph from a trajectory document. `beta` names a feature
/// configuration (`b1`..`b5`) and `phi` a preprocessing configuration
/// (`phi1`..`phi4`).
///
/// # Safety
/// String arguments must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gm_graph_discover(
    domain: *const c_char,
    trajectories_json: *const c_char,
    beta: *const c_char,
    phi: *const c_char,
    out: *mut *mut GmGraph,
) -> GmStatus {
    guard(|| {
        out_ptr(out)?;
        let d = parse_domain(text(domain, "domain")?).map_err(parse_err)?;
        let set = trajectory::from_json(text(trajectories_json, "trajectories")?, &d)
            .map_err(parse_err)?;
        let config = GenerationConfig::preset(text(beta, "beta")?)
            .map_err(|e| (GmStatus::InvalidArgument, e.to_string()))?;
        let phi: Phi =
            text(phi, "phi")?
                .parse()
                .map_err(|e: genmark::statefns::StateFnError| {
                    (GmStatus::InvalidArgument, e.to_string())
                })?;
        let (graph, _) = discover(&set, &config, phi).map_err(pipeline_err)?;
        *out = Box::into_raw(Box::new(GmGraph { graph }));
        Ok(())
    })
}

/// Serializes a graph; release the string with [`gm_string_free`].
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gm_graph_to_json(
    graph: *const GmGraph,
    out: *mut *mut c_char,
) -> GmStatus {
    guard(|| {
        out_ptr(out)?;
        let g = handle(graph, "graph")?;
        *out = CString::new(g.graph.to_json())
            .map_err(|e| (GmStatus::Internal, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn gm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `graph` must be a live handle; `nodes` and `loops` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gm_graph_shape(
    graph: *const GmGraph,
    nodes: *mut usize,
    loops: *mut usize,
) -> GmStatus {
    guard(|| {
        out_ptr(nodes)?;
        out_ptr(loops)?;
        let g = handle(graph, "graph")?;
        *nodes = g.graph.nodes.len();
        *loops = g.graph.loops.len();
        Ok(())
    })
}

/// Total landmark acceptances the graph requires on `task`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gm_graph_h_max(
    graph: *const GmGraph,
    task: *const GmTask,
    out: *mut u32,
) -> GmStatus {
    guard(|| {
        out_ptr(out)?;
        let g = handle(graph, "graph")?;
        let t = handle(task, "task")?;
        let annotated = GoalAnnotatedTask::new(&t.domain, &t.problem).map_err(parse_err)?;
        let ctx = LmgContext::init(&g.graph, &annotated.task.universe, &annotated.task.init)
            .map_err(|e| pipeline_err(e.into()))?;
        *out = ctx.h_max();
        Ok(())
    })
}

/// # Safety
/// `graph` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn gm_graph_free(graph: *mut GmGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Searches for a plan. `graph` may be null for the helper alone; `options`
/// may be null for [`gm_search_options_default`].
///
/// # Safety
/// Non-null handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gm_plan(
    task: *const GmTask,
    graph: *const GmGraph,
    options: *const GmSearchOptions,
    out: *mut *mut GmPlan,
) -> GmStatus {
    guard(|| {
        out_ptr(out)?;
        let t = handle(task, "task")?;
        let o = options
            .as_ref()
            .copied()
            .unwrap_or_else(|| gm_search_options_default());
        let helper = match o.helper {
            GM_HELPER_NONE => None,
            GM_HELPER_HADD => Some(HelperKind::HAdd),
            GM_HELPER_HMAX => Some(HelperKind::HMax),
            GM_HELPER_GOALCOUNT => Some(HelperKind::GoalCount),
            h => return Err((GmStatus::InvalidArgument, format!("unknown helper {h}"))),
        };
        if !(o.timeout.is_finite() && o.timeout >= 0.0) {
            return Err((
                GmStatus::InvalidArgument,
                "timeout must be finite and non-negative".into(),
            ));
        }
        let config = SearchConfig {
            helper,
            astar: false,
            prune: o.prune,
            max_expansions: (o.max_expansions > 0).then_some(o.max_expansions),
            max_states: None,
            time_limit: (o.timeout > 0.0).then(|| Duration::from_secs_f64(o.timeout)),
        };
        let g = graph.as_ref().map(|g| &g.graph);
        let result = plan_annotated(&t.domain, &t.problem, g, &config).map_err(pipeline_err)?;
        let outcome = match &result {
            SearchOutcome::Solved { .. } => GmOutcome::Solved,
            SearchOutcome::Unsolvable { .. } => GmOutcome::Unsolvable,
            SearchOutcome::ResourceLimit { .. } => GmOutcome::ResourceLimit,
        };
        let actions = result
            .plan()
            .unwrap_or_default()
            .iter()
            .map(|a| CString::new(a.as_str()).expect("action names have no nul"))
            .collect();
        let s = result.stats();
        *out = Box::into_raw(Box::new(GmPlan {
            outcome,
            actions,
            expanded: s.expanded,
            evaluated: s.evaluated,
        }));
        Ok(())
    })
}

/// A null plan reads as unsolvable.
///
/// # Safety
/// `plan` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gm_plan_outcome(plan: *const GmPlan) -> GmOutcome {
    plan.as_ref().map_or(GmOutcome::Unsolvable, |p| p.outcome)
}

/// Number of actions; 0 unless solved.
///
/// # Safety
/// `plan` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gm_plan_len(plan: *const GmPlan) -> usize {
    plan.as_ref().map_or(0, |p| p.actions.len())
}

/// Action `index`; the string lives as long as the plan.
///
/// # Safety
/// `plan` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gm_plan_action(
    plan: *const GmPlan,
    index: usize,
    out: *mut *const c_char,
) -> GmStatus {
    guard(|| {
        out_ptr(out)?;
        let p = handle(plan, "plan")?;
        let a = p
            .actions
            .get(index)
            .ok_or((GmStatus::OutOfRange, format!("action {index} out of range")))?;
        *out = a.as_ptr();
        Ok(())
    })
}

/// # Safety
/// `plan` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gm_plan_expanded(plan: *const GmPlan) -> u64 {
    plan.as_ref().map_or(0, |p| p.expanded)
}

/// # Safety
/// `plan` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gm_plan_evaluated(plan: *const GmPlan) -> u64 {
    plan.as_ref().map_or(0, |p| p.evaluated)
}

/// # Safety
/// `plan` must come from [`gm_plan`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn gm_plan_free(plan: *mut GmPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

#[cfg(test)]
mod tests {
    use std::ptr;

    use super::*;

    #[test]
    fn errors_are_reported_per_thread() {
        let mut t = ptr::null_mut();
        let status = unsafe { gm_task_new(ptr::null(), ptr::null(), &mut t) };
        assert_eq!(status, GmStatus::NullArgument);
        let msg = unsafe { CStr::from_ptr(gm_last_error()) }
            .to_str()
            .unwrap()
            .to_string();
        assert!(msg.contains("null"));
        std::thread::spawn(|| {
            assert_eq!(unsafe { CStr::from_ptr(gm_last_error()) }.to_bytes(), b"");
        })
        .join()
        .unwrap();
    }

    #[test]
    fn free_accepts_null() {
        unsafe {
            gm_task_free(ptr::null_mut());
            gm_graph_free(ptr::null_mut());
            gm_plan_free(ptr::null_mut());
            gm_string_free(ptr::null_mut());
        }
    }
}

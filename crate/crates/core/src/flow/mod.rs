//! Control-flow graphs and the data-flow facts the checkers consume.

mod assign;
mod callgraph;
mod cfg;
mod events;
mod interval;
mod liveness;
mod points_to;
mod solver;

use thiserror::Error;

use crate::parser::Span;
use crate::sema::{FunctionInfo, TypedTu};

pub use assign::{definite_assignment, AssignState, DefiniteAssignment, VarRead};
pub use callgraph::{build_call_graph, recursion_components, CallGraph, CallSite};
pub use cfg::{build_cfg, Block, BlockId, Cfg, Edge, EdgeKind, Element, PrunedBranch, Site};
pub use events::{address_taken, Event};
pub use interval::{
    binary as interval_binary, convert as interval_convert, interval_analysis, InfeasibleEdge, Interval, IntervalFacts,
    IntervalState,
};
pub use liveness::{liveness, DeadStore, Liveness};
pub use points_to::{local_points_to, PointsToFacts, PointsToSet, PointsToState, Target};
pub use solver::{Solution, WIDENING_DELAY};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("use of undeclared label `{name}`")]
    UndefinedLabel { name: String, span: Span },
    #[error("duplicate label `{name}`")]
    DuplicateLabel { name: String, span: Span },
    #[error("`{keyword}` statement not within a loop or switch")]
    MisplacedJump { keyword: &'static str, span: Span },
}

impl FlowError {
    pub fn span(&self) -> &Span {
        match self {
            FlowError::UndefinedLabel { span, .. }
            | FlowError::DuplicateLabel { span, .. }
            | FlowError::MisplacedJump { span, .. } => span,
        }
    }
}

/// Every intraprocedural fact computed for one function definition.
#[derive(Debug, Clone)]
pub struct FunctionFacts<'a> {
    pub tu: &'a TypedTu,
    pub function: &'a FunctionInfo,
    pub cfg: Cfg<'a>,
    pub assignment: DefiniteAssignment,
    pub intervals: IntervalFacts,
    pub points_to: PointsToFacts,
    pub liveness: Liveness,
}

pub fn analyze_function<'a>(tu: &'a TypedTu, function: &'a FunctionInfo) -> Result<FunctionFacts<'a>, FlowError> {
    let cfg = build_cfg(tu, function)?;
    let assignment = definite_assignment(tu, &cfg);
    let intervals = interval_analysis(tu, &cfg);
    let points_to = local_points_to(tu, &cfg);
    let liveness = liveness(tu, &cfg);
    Ok(FunctionFacts {
        tu,
        function,
        cfg,
        assignment,
        intervals,
        points_to,
        liveness,
    })
}

/// Facts for every function definition of a unit, in definition order.
pub fn analyze_unit(tu: &TypedTu) -> Result<Vec<FunctionFacts<'_>>, FlowError> {
    tu.functions.iter().map(|f| analyze_function(tu, f)).collect()
}

#[cfg(test)]
mod tests;

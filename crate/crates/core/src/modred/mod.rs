//! Reduction of rational models to FOPTD, SOPTD and non-integer-order-plus-delay
//! templates by H2-norm minimization.

mod reduce;
mod templates;

pub use reduce::{
    reduce, reduce_all_templates, reduce_from, reduction_objective, ReductionProblem,
    ReductionResult, ReductionSettings, INVALID_CANDIDATE, PENALTY,
};
pub use templates::{NioptdI, NioptdII, ReducedModel, Template};

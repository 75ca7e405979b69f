//! Responsibility analysis over concurrent game structures.
//!
//! A model is a finite set of states together with simultaneous action
//! choices for every agent and a deterministic outcome function. Given a
//! state of affairs (a set of states to be avoided), this crate decides
//! which coalitions hold the power to preclude it, and grades arbitrary
//! coalitions by two exact-rational degrees: a structural degree comparing
//! the coalition against the weakly responsible ones, and a functional
//! degree based on how far the system is from a state where the coalition
//! holds that power.
//!
//! The [`cgs`] module defines the model and its validation, [`parser`] the
//! JSON interchange format, [`responsibility`] the preclusion engine,
//! [`degrees`] the two degrees, and [`oracle`] a brute-force reference
//! implementation plus a seeded model generator for differential testing.

pub mod cgs;
pub mod degrees;
pub mod oracle;
pub mod parser;
pub mod responsibility;

pub use cgs::{
    validate_model, ActionId, ActionProfile, AgentId, Cgs, Coalition, JointAction, ModelError,
    StateId, StateOfAffairs, StateSet, ValidatedModel, MAX_AGENTS,
};
pub use degrees::{
    fdr, fdr_value, power_acquisition_distance, power_difference, sdr, sdr_over, DegreeValue,
    Distance, FdrResult, PowerAcquisitionSequence, SdrResult,
};
pub use parser::{
    parse_affairs, parse_coalition, parse_model, serialize_model, ModelDocument, ParseError,
    QueryError,
};
pub use responsibility::{
    can_preclude, cpre, minimal_responsible_coalitions, responsible_coalitions,
    responsible_states, safe_region, PreclusionSemantics, ResponsibleSet,
};

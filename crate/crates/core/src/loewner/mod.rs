//! Chordal Loewner chains driven by families of probability measures.
//!
//! Three flows share one vector field `M_t = G_{nu_t}`: the forward flow
//! `g_t`, the reverse flow `phi_{s,t}` (F-transforms of a monotone evolution
//! family) and the anti-monotone flow integrated backwards in its first
//! time argument. Traces and welding are built on top of them.

mod driving;
mod flow;
mod trace;
mod welding;

pub use driving::{Driving, Field, Piece};
pub use flow::{
    flow_forward, flow_reverse, flow_reverse_anti, flow_reverse_anti_point, flow_reverse_point, inverse_map,
    FlowOptions, FlowPoint, INVERSE_CHECK_TOL,
};
pub use trace::{trace, HullTrace, TRACE_DELTAS};
pub use welding::{
    boundary_value, collision_time, welding, welding_residual, welding_with, Welding, BOUNDARY_DELTAS, WELDING_PAIRS,
};

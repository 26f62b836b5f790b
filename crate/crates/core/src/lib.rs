//! Chordal Loewner chains driven by probability measures, together with the
//! additive convolutions (free, monotone, anti-monotone) they generate.
//!
//! Every kernel is generic over the scalar type ([`Real`]: `f32` or `f64`);
//! the aliases below fix `f64`.
//!
//! ```
//! use loewner_core::{flow_forward, Complex64, Driving64, FlowOptions64};
//!
//! let d = Driving64::constant(0.0);
//! let p = flow_forward(&d, Complex64::new(0.0, 2.0), 1.0, &FlowOptions64::default()).unwrap();
//! assert!((p.value - Complex64::new(0.0, 2f64.sqrt())).norm() < 1e-8);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convolve;
pub mod error;
pub mod evolution;
pub mod loewner;
pub mod measures;
pub mod ode;
pub mod quad;
pub mod scalar;
pub mod transforms;

pub use convolve::{anti_monotone, free_r, free_subordination, materialize, monotone, Expr};
pub use error::{Error, Result};
pub use evolution::{
    anti_monotone_family, burgers_residual, burgers_residual_with, chain_approximation, free_family, monotone_family,
    sle_driving, EvolutionFamily, Semantics, ShiftBase,
};
pub use loewner::{
    flow_forward, flow_reverse, flow_reverse_anti, inverse_map, trace, welding, welding_residual, Driving, FlowOptions,
    FlowPoint, HullTrace, Welding,
};
pub use measures::{DensityGrid, Measure, MomentSequence, Support};
pub use num_complex::{Complex32, Complex64};
pub use scalar::{Real, C};
pub use transforms::{
    asymptotic_moments, cauchy, cauchy_from_r, f_transform, invert_stieltjes, r_transform, AnalyticMap, MapKind,
};

pub type Measure64 = Measure<f64>;
pub type Measure32 = Measure<f32>;
pub type AnalyticMap64 = AnalyticMap<f64>;
pub type Driving64 = Driving<f64>;
pub type FlowOptions64 = FlowOptions<f64>;
pub type EvolutionFamily64 = EvolutionFamily<f64>;

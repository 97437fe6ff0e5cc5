//! Capacity computation and random-coding simulation for classical-quantum
//! channels whose state is known to the sender.

pub mod budget;
pub mod causal;
pub mod channel;
pub mod coding;
pub mod error;
pub mod linalg;
pub mod noncausal;
pub mod quantum;
pub mod rng;
pub mod schur;
pub mod types;

pub use budget::Budget;
pub use causal::{
    causal_capacity, enumerate_strategies, holevo_capacity, inner_maximize_q, CausalOptions,
    CausalSolution, HolevoMax,
};
pub use channel::{
    classical_embedding, conditional_derived_channel, derived_channel, parse_channel,
    product_extension, serialize_channel, ClassicalEmbedding, LoadReport, RandomizedEncoder,
    StateChannel, Strategy,
};
pub use coding::{
    sequential_decoder, simulate_rate_error_curve, square_root_decoder, CurveRow, Povm, Scheme,
    SimulationOptions,
};
pub use error::{Error, Result};
pub use noncausal::{
    classical_gp_oracle, gp_objective, mutual_information, noncausal_lower_bound, ClassicalGp,
    GpWitness, NoncausalOptions,
};
pub use schur::{decode_projector, DecodeFamily, Limits, ProjectorOperator, YoungFrame};
pub use types::{
    coverage_probability, joint_type_completion, m_set_contains, nearest_type, type_class_size,
    typical_mass, JointDistribution, TypeVector,
};
pub use quantum::{
    holevo_quantity, holevo_quantity_divergence, pinch, relative_entropy, trace_distance,
    von_neumann_entropy, DensityOperator, Distribution, Spectrum,
};

//! Homomorphism densities of bipartite graphs over step graphons, the chain
//! hypergraphs and reflection-group constructions that certify Sidorenko-type
//! lower bounds for their blow-ups, and a seeded verification harness that
//! checks the whole chain of inequalities numerically and exactly.

pub mod bigfloat;
mod combi;
pub mod error;
pub mod graphon;
pub mod graphs;
pub mod hypergraph;
pub mod reflection;
pub mod qarith;
pub mod value;
pub mod verify;

pub use bigfloat::BigFloat;
pub use error::{Error, Result};
pub use graphon::StepGraphon;
pub use graphs::{BipartiteGraph, DegreeProfile, DivisibilityReport, WeightVector};
pub use hypergraph::{
    g_chain, h_chain, h_chain_with_window, hyper_density, hyper_density_kernel,
    hyper_density_oracle, product_kernel, weak_norming_margin, KernelRef, PartiteHypergraph,
    ProductKernel, StepKernel,
};
pub use reflection::{
    blow_up_class, blowup_spec, g_chain_spec, h_chain_spec, partite_isomorphic,
    reflection_hypergraph, ReflectionSpec,
};
pub use qarith::Rat;
pub use value::{DensityValue, EvalMode, Evaluator};
pub use verify::{
    run_check, run_negative_control, sub_seed, CheckConfig, CheckId, TolerancePolicy,
    VerificationReport,
};

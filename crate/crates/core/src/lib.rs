//! Realizable abstractions for tabular MDPs.
//!
//! The crate is generic over the scalar type; the aliases below fix it to
//! `f64` (default) or `f32`.

pub mod abstraction;
pub mod envs;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod mdp;
pub mod rarl;
pub mod realizer;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type GroundMdp64 = mdp::GroundMdp<f64>;
pub type GroundMdp32 = mdp::GroundMdp<f32>;
pub type SecondOrderMdp64 = mdp::SecondOrderMdp<f64>;
pub type SecondOrderMdp32 = mdp::SecondOrderMdp<f32>;
pub type AbstractionPair64 = abstraction::AbstractionPair<f64>;
pub type AbstractionPair32 = abstraction::AbstractionPair<f32>;
pub type BlockMdp64 = abstraction::BlockMdp<f64>;
pub type FRelativeOption64 = abstraction::FRelativeOption<f64>;
pub type PolicyOfOptions64 = abstraction::PolicyOfOptions<f64>;
pub type LinearProgram64 = lp::LinearProgram<f64>;
pub type LpSolution64 = lp::LpSolution<f64>;
pub type RealizationProblem64 = realizer::RealizationProblem<f64>;
pub type OnlineRealizer64 = realizer::OnlineRealizer<f64>;
pub type MdpSimulator64 = rarl::MdpSimulator<f64>;

//! Bayesian detection of space-time clusters of events on a road network.
//!
//! Street networks are linear networks; events are projected onto them,
//! and a truncated Dirichlet process mixture of network-corrected Gaussian
//! kernels is fitted by Markov chain Monte Carlo. Second-order summaries,
//! a model assessment grid and simulators round out the pipeline.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the usual `f64` choice.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assess;
pub mod error;
pub mod events;
pub mod kernels;
pub mod model;
pub mod network;
pub mod scalar;
pub mod sim;
pub mod sumstats;
pub mod table;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Network = network::LinearNetwork<f64>;
pub type Point = network::NetPoint<f64>;
pub type Event = events::Event<f64>;
pub type Kernels = kernels::KernelConfig<f64>;
pub type Pixels = network::PixelGrid<f64>;
pub type State = model::ChainState<f64>;
pub type Run = model::PosteriorRun<f64>;

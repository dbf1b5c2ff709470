//! Spectrum sharing between two mobile operators for multi-operator D2D
//! traffic: stochastic-geometry rates, a non-cooperative sharing game and a
//! Monte-Carlo coverage check.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coverage;
pub mod game;
pub mod mode_selection;
pub mod model;
pub mod montecarlo;
pub mod numerics;
pub mod pathloss;

pub use coverage::{CoverageError, OperatorRates, RateCache};
pub use game::{find_equilibrium, sharing_gain, Game, GameError, SolverSettings};
pub use model::{
    GameState, ModelError, OperatorParams, PathlossModel, RateReport, Scenario, SharedParams,
    SpectrumPartition, TraceEntry,
};

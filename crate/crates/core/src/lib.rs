//! Quantum functional testing of single-qubit channels.
//!
//! The crate covers two complementary views of the question "does this
//! device meet its spec?":
//!
//! * [`chernoff`] computes quantum and classical Chernoff exponents for
//!   discriminating an ideal channel from a faulty one, including channel
//!   iteration, random errors and dephasing.
//! * [`certify`] runs the adaptive Bayesian certification protocol: a
//!   particle filter ([`smc`]) is driven by non-greedy experimental design
//!   ([`design`]) against a simulated device, and a decision criterion
//!   accepts or rejects the producer's spec interval.
//!
//! [`qstate`] and [`channels`] provide the exact 2x2 linear algebra that
//! everything else is built on.

pub mod certify;
pub mod channels;
pub mod chernoff;
pub mod design;
mod error;
pub mod optim;
pub mod qstate;
pub mod quadrature;
pub mod rng;
pub mod smc;

pub use error::{Error, Result};

pub use certify::{
    CertificationConfig, Decision, DecisionCriterion, ModelKind, RegionMeasure, Spec,
    SuccessEstimate, TrialRecord, TrialRun,
};
pub use channels::{
    AveragedPhaseGate, Channel, DephasingGate, DephasingParams, ErrorDistribution, ErrorMode,
    PhaseGate, PhaseGateParams,
};
pub use chernoff::{ChernoffBound, ChernoffResult, PriorPair};
pub use design::{Action, ActionSequence, Outcome, OutcomeBranch, UtilityKind};
pub use qstate::{Axis, BlochVector, DensityMatrix, Matrix2, PovmElement};
pub use smc::{LikelihoodModel, ParticleFilter, PriorSampling};

//! Differentially private learning of finite Littlestone classes.
//!
//! The crate is organised bottom-up:
//!
//! - [`hypothesis`]: domains, hypotheses, classes, Littlestone dimension, SOA
//!   and irreducibility.
//! - [`decomposition`]: `(p, d)`-decomposition trees, exact decomposition
//!   dimension and essential hypotheses.
//! - [`mechanisms`]: Laplace noise, sparse exponential sampling,
//!   AboveThreshold, privacy accounting and an empirical auditor.
//! - [`erm`]: the private empirical risk minimizer and its PAC wrapper.
//! - [`online`]: the private online learner with teacher ensembles.
//! - [`harness`]: class and stream generators, non-private baselines and the
//!   experiment runner.

pub mod decomposition;
pub mod erm;
pub mod error;
pub mod harness;
pub mod hypothesis;
pub mod mechanisms;
pub mod online;
pub mod rational;
pub mod rng;

pub use error::{Error, Result};
pub use hypothesis::{
    Domain, DomainPoint, Hypothesis, HypothesisClass, LabeledExample, LabeledSequence,
};

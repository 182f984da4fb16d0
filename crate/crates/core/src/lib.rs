//! Exact computational engine for finitely generated Coxeter systems.
//!
//! The crate is organised around the pipeline
//! `classify -> group arithmetic -> congruence subgroup -> trees -> harmonic analysis`:
//!
//! * [`scalar`] — exact arithmetic in the real field Q(2cos(pi/L)) with certified signs,
//! * [`matrix`] — small dense matrices over that field,
//! * [`coxeter`] — Coxeter graphs, the Gram form, its classification and the
//!   amenability / simplicity verdict,
//! * [`group`] — the geometric representation: normal forms, balls, reflections,
//!   roots and inversion sets,
//! * [`congruence`] — the congruence subgroup Gamma, reflection orbits, shapes and
//!   the permutation action on orbit indices,
//! * [`trees`] — finite truncations of the orbit trees, structural lemma checks and
//!   the ping-pong free-subgroup construction,
//! * [`harmonic`] — finitely supported l^2 functions, convolution, operator norm
//!   lower bounds and the Haagerup / Powers / icc experiments.

pub mod congruence;
pub mod coxeter;
pub mod error;
pub mod group;
pub mod harmonic;
pub mod matrix;
pub mod scalar;
pub mod trees;


pub use congruence::{CongruenceCtx, OrbitPartition, OrbitStatus};
pub use coxeter::{CoxeterMatrix, CoxeterSystem, FormCategory, FormClass, Label};
pub use error::CoxError;
pub use group::{Ball, Element, GroupCtx};
pub use harmonic::{BallFunction, HaagerupReport, NormEstimate, PowersReport};
pub use scalar::{Field, Scalar};
pub use trees::{PingPongCertificate, TranslationKind, TreeClass, TruncatedTree, ValencyWitness};

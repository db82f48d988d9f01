//! Conditional preparation of multimode entangled states of light with
//! passive linear optics.
//!
//! The crate simulates heralded state-preparation pipelines in the Fock
//! basis: beam splitters and wave plates lifted to photon-number space,
//! photon-subtraction stages, nondestructive single-photon checks, quantum
//! scissors truncation, mode-erasing interferometer cascades and projective
//! entanglement swapping. On top of those primitives sits an inverse
//! designer that, given a target superposition of product states, derives
//! the input amplitudes each source must emit, and a planner that assembles
//! and simulates the full conditional circuit, tracking per-stage success
//! probabilities and expected repetition counts.
//!
//! Layering, bottom up:
//!
//! * [`fock`]: labelled mode registries and sparse unnormalized state
//!   vectors, with tensor products, projections and overlaps.
//! * [`elements`]: passive optics (beam splitter, phase, polarizing beam
//!   splitter, wave plate) plus beam-splitter photon subtraction.
//! * [`conditional`]: heralded protocols returning a state together with
//!   its success probability.
//! * [`solver`]: closed-form maps between source amplitudes and prepared
//!   amplitudes, their inverses, and Schmidt splitting.
//! * [`planner`]: target specifications, preparation plans, joint
//!   simulation and resource estimates.
//! * [`cli`]: the `plan` / `simulate` / `oracle` command layer used by the
//!   `heralded` binary.
//!
//! Every runnable capability has a worked example under `examples/`; start
//! with `cargo run --example bell_pair`.

pub mod cli;
pub mod conditional;
pub mod elements;
pub mod fock;
pub mod planner;
pub mod solver;

pub use fock::{fidelity, make_state, Caps, FockState, ModeLabel, ModeRegistry, Polarization, C64};

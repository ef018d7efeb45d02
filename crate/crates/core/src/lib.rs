//! Simulation of protected optical ring cavities at the Gaussian level.
//!
//! An imperfect cavity mirror leaks part of the stored field every round
//! trip. This crate models the counter-measure of injecting squeezed meter
//! pulses through that mirror, homodyning the leaked field each cycle, and
//! undoing the accumulated back-action with a single displacement (plus one
//! squeezing correction when storing) after `N` cycles. Two scenarios are
//! covered: storage of coherent or squeezed states in an empty cavity, and
//! squeezing generation with a nonlinear crystal in the loop.
//!
//! The crate is organized as four layers:
//!
//! - [`gaussian`] — single- and two-mode Gaussian states, the mirror
//!   beamsplitter and squeezer transforms, homodyne conditioning, overlap
//!   fidelity.
//! - [`analytic`] — closed-form output variances, fidelities, saturation
//!   limits, and cycle-count inversion for the four strategies A-D.
//! - [`trajectory`] — seeded conditional-Gaussian Monte Carlo engine with
//!   ensemble statistics and z-score cross-validation against [`analytic`].
//! - [`experiments`] — experiment specs, figure presets, curve tables, CSV
//!   output, and the validation report behind the `cavity-erasure` binary.
//!
//! Start with the runnable examples (`cargo run --example storage_fidelity`)
//! for end-to-end walkthroughs of each capability.

pub mod analytic;
pub mod experiments;
pub mod gaussian;
pub mod trajectory;

pub use analytic::{ProtocolConfig, Strategy, VariancePair};
pub use gaussian::{Axis, MeterSpec, QuadratureState};

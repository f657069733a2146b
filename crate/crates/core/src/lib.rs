//! Single-photon routing through a cascade three-level emitter that couples
//! to two chiral waveguides and is driven by an extra cavity mode.
//!
//! Units: ħ = v = 1 and ω_1 = 0. Every scattering quantity follows from the
//! even-mode scattering factor in [`scattering`].

pub mod cli;
pub mod dressed;
pub mod mode_transform;
pub mod model;
pub mod oracle;
pub mod parallel;
pub mod scattering;
pub mod selftest;
pub mod sweep;

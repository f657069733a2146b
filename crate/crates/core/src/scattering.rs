//! Closed-form single-photon scattering off the driven cascade emitter.
//!
//! Everything follows from two detuning combinations:
//! `s = Δ_k^n + Δ_a` (vanishes on the photon-induced tunneling line) and
//! `q = Δ_k^n·s − nλ²` (vanishes at the two dressed poles). The scattering
//! factor
//!
//! ```text
//! U_k = −iγ·s / (q + i(γ/2)·s)
//! ```
//!
//! is finite on the whole real parameter domain and lies on the circle
//! |1 + U_k| = 1. It is evaluated directly; the effective δ-potential
//! V = γ·s/q is only a diagnostic.
//!
//! When nλ² = 0 the upper level is unreachable and the common factor `s`
//! cancels, leaving the two-level result U = −iγ/(Δ_k + iγ/2).

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::mode_transform::reconstruct_four_port;
pub use crate::mode_transform::{FourPortResult, Probabilities};
use crate::model::{CavityParams, CouplingMatrix, PortLabel, ScatterPoint};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A real number that may have run off to ±∞ or be undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ExtendedReal {
    Finite(f64),
    /// Sign of the limit approached from below along increasing Δ_k^n.
    PosInfinity,
    NegInfinity,
    Indeterminate,
}

impl ExtendedReal {
    pub fn finite(&self) -> Option<f64> {
        match *self {
            ExtendedReal::Finite(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PosInfinity => write!(f, "+inf"),
            ExtendedReal::NegInfinity => write!(f, "-inf"),
            ExtendedReal::Indeterminate => write!(f, "indeterminate"),
        }
    }
}

/// A complex amplitude that may be singular.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    Finite(Complex64),
    Infinite,
    Indeterminate,
}

impl Amplitude {
    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            Amplitude::Finite(v) => Some(v),
            _ => None,
        }
    }
}

/// Even-mode plane-wave solution at one incident energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvenModeSolution {
    pub t_ke: Complex64,
    pub potential: ExtendedReal,
    /// Amplitude of |⊘⟩|2,n⟩.
    pub beta: Complex64,
    /// Amplitude of |⊘⟩|3,n−1⟩.
    pub zeta: Complex64,
    /// Midpoint field value f_k(0) = ½[f_k(0⁺) + f_k(0⁻)].
    pub f0: Complex64,
}

/// PIT line and the two pole roots of Δ(Δ + Δ_a) − nλ² = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpecialPoints {
    /// Δ_k^n = −Δ_a, where the photon is fully transmitted.
    pub pit_line: f64,
    /// Ascending; (−Δ_a ± Ω_n)/2.
    pub pole_roots: [f64; 2],
}

impl SpecialPoints {
    /// Value of the pole quadratic at `detuning_k`.
    pub fn residual(detuning_a: f64, cavity: &CavityParams, detuning_k: f64) -> f64 {
        detuning_k * (detuning_k + detuning_a) - cavity.n_lambda_sq()
    }
}

struct Detunings {
    dk: f64,
    s: f64,
    q: f64,
    g2: f64,
}

fn detunings(point: &ScatterPoint, cavity: &CavityParams) -> Detunings {
    let dk = point.detuning_k;
    let s = point.pit_offset();
    let g2 = cavity.n_lambda_sq();
    Detunings { dk, s, q: dk * s - g2, g2 }
}

/// U_k = t_{k,e} − 1.
///
/// Exactly 0 on the PIT line (when nλ² > 0) and exactly −2 where the pole
/// quadratic vanishes off that line.
pub fn scattering_factor(point: &ScatterPoint, cavity: &CavityParams, gamma: f64) -> Complex64 {
    debug_assert!(gamma > 0.0);
    let d = detunings(point, cavity);
    if d.g2 == 0.0 {
        if d.dk == 0.0 {
            return Complex64::new(-2.0, 0.0);
        }
        return -I * gamma / Complex64::new(d.dk, gamma / 2.0);
    }
    if d.s == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if d.q == 0.0 {
        return Complex64::new(-2.0, 0.0);
    }
    -I * (gamma * d.s) / Complex64::new(d.q, gamma / 2.0 * d.s)
}

/// Even-mode transmission t_{k,e} = 1 + U_k, a pure phase.
pub fn even_transmission(point: &ScatterPoint, cavity: &CavityParams, gamma: f64) -> Complex64 {
    scattering_factor(point, cavity, gamma) + 1.0
}

/// Strength V of the energy-dependent δ-potential seen by the even mode.
pub fn effective_potential(point: &ScatterPoint, cavity: &CavityParams, gamma: f64) -> ExtendedReal {
    let d = detunings(point, cavity);
    if !(d.dk.is_finite() && d.s.is_finite() && gamma.is_finite()) {
        return ExtendedReal::Indeterminate;
    }
    let (num, den, slope) =
        if d.g2 == 0.0 { (gamma, d.dk, 1.0) } else { (gamma * d.s, d.q, 2.0 * d.dk + point.detuning_a) };
    match (num == 0.0, den == 0.0) {
        (true, true) => ExtendedReal::Indeterminate,
        (false, false) => ExtendedReal::Finite(num / den),
        (true, false) => ExtendedReal::Finite(0.0),
        (false, true) => {
            // den ≈ slope·(Δ − root); approaching from below flips the sign.
            if slope == 0.0 {
                ExtendedReal::Indeterminate
            } else if num * slope > 0.0 {
                ExtendedReal::NegInfinity
            } else {
                ExtendedReal::PosInfinity
            }
        }
    }
}

/// β and ζ from the amplitude equations for a given midpoint field `f0`.
pub fn emitter_amplitudes(
    point: &ScatterPoint,
    cavity: &CavityParams,
    gamma: f64,
    f0: Complex64,
) -> (Amplitude, Amplitude) {
    let d = detunings(point, cavity);
    let sg = gamma.sqrt();
    let g = cavity.coupling();
    let zero = Amplitude::Finite(Complex64::new(0.0, 0.0));

    let singular = |num: Complex64| {
        if num == Complex64::new(0.0, 0.0) {
            Amplitude::Indeterminate
        } else {
            Amplitude::Infinite
        }
    };

    if d.g2 == 0.0 {
        let beta = if d.dk == 0.0 { singular(f0) } else { Amplitude::Finite(f0 * sg / d.dk) };
        return (beta, zero);
    }
    if d.q == 0.0 {
        let beta = singular(f0);
        return (beta, beta);
    }
    let beta = f0 * sg * d.s / d.q;
    let zeta = if d.s == 0.0 {
        // ζ is fixed by the |2,n⟩ equation when the |3,n−1⟩ one degenerates.
        (beta * d.dk - f0 * sg) / g
    } else {
        beta * g / d.s
    };
    (Amplitude::Finite(beta), Amplitude::Finite(zeta))
}

/// Plane-wave even-mode solution with unit-normalized incoming wave
/// e^{ikx}/√(2π) and the midpoint convention at x = 0.
pub fn solve_even_mode(point: &ScatterPoint, cavity: &CavityParams, gamma: f64) -> EvenModeSolution {
    let d = detunings(point, cavity);
    let u = scattering_factor(point, cavity, gamma);
    let t_ke = u + 1.0;
    let p0 = 1.0 / (2.0 * PI).sqrt();
    let f0 = (t_ke + 1.0) * (0.5 * p0);
    // Jump condition of the field at x = 0 gives β without dividing by q.
    let beta = I * u * (p0 / gamma.sqrt());
    let zeta = if d.g2 == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        cavity.coupling() * gamma.sqrt() * p0 / Complex64::new(d.q, gamma / 2.0 * d.s)
    };
    EvenModeSolution { t_ke, potential: effective_potential(point, cavity, gamma), beta, zeta, f0 }
}

/// Four-port amplitudes for a photon entering through `port`.
pub fn four_port(
    point: &ScatterPoint,
    cavity: &CavityParams,
    couplings: &CouplingMatrix,
    port: PortLabel,
) -> FourPortResult {
    let u = scattering_factor(point, cavity, couplings.gamma());
    reconstruct_four_port(u, port, couplings)
}

/// PIT line and pole roots for cavity detuning `detuning_a`.
pub fn special_points(detuning_a: f64, cavity: &CavityParams) -> SpecialPoints {
    let g2 = cavity.n_lambda_sq();
    let root_disc = (detuning_a * detuning_a + 4.0 * g2).sqrt();
    // Cancellation-free quadratic formula for x² + Δ_a·x − nλ² = 0.
    let sign = if detuning_a < 0.0 { -1.0 } else { 1.0 };
    let big = -(detuning_a + sign * root_disc) / 2.0;
    let small = if big == 0.0 { 0.0 } else { -g2 / big };
    let pole_roots = if big <= small { [big, small] } else { [small, big] };
    SpecialPoints { pit_line: -detuning_a, pole_roots }
}

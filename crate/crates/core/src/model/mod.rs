//! Parameter containers for the two-waveguide router.
//!
//! Conventions used everywhere in the crate: ħ = 1, group velocity v = 1,
//! ground-state energy ω₁ = 0. Rates and frequencies share one unit; the CLI
//! defaults to measuring everything in units of the total rate γ.

pub mod config;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fraction of the relevant scale above which a "≪" regime assumption is
/// reported as violated.
pub const VALIDITY_FACTOR: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("negative coupling rate {key} = {value}")]
    NegativeRate { key: &'static str, value: f64 },
    #[error("total coupling rate gamma must be positive (all four rates are zero)")]
    ZeroTotalRate,
    #[error("non-finite value for {key}")]
    NonFinite { key: &'static str },
    #[error("photon number n = {0} is not a non-negative integer")]
    NonIntegerPhotonNumber(f64),
    #[error("negative drive strength lambda = {0}")]
    NegativeDrive(f64),
    #[error(
        "cascade ordering violated: need omega_3 > omega_2 > 0, got omega_2 = {omega_2}, omega_3 = {omega_3}"
    )]
    EmitterOrdering { omega_2: f64, omega_3: f64 },
    #[error("cavity frequency omega_a = {0} must be positive")]
    CavityFrequency(f64),
}

fn finite(key: &'static str, value: f64) -> Result<f64, ValidationError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ValidationError::NonFinite { key })
    }
}

/// Chiral emitter-waveguide coupling rates γ_ar, γ_al, γ_br, γ_bl.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingMatrix {
    gamma_ar: f64,
    gamma_al: f64,
    gamma_br: f64,
    gamma_bl: f64,
}

impl CouplingMatrix {
    pub fn new(gamma_ar: f64, gamma_al: f64, gamma_br: f64, gamma_bl: f64) -> Result<Self, ValidationError> {
        for (key, value) in
            [("gamma_ar", gamma_ar), ("gamma_al", gamma_al), ("gamma_br", gamma_br), ("gamma_bl", gamma_bl)]
        {
            finite(key, value)?;
            if value < 0.0 {
                return Err(ValidationError::NegativeRate { key, value });
            }
        }
        let m = Self { gamma_ar, gamma_al, gamma_br, gamma_bl };
        if m.gamma() <= 0.0 {
            return Err(ValidationError::ZeroTotalRate);
        }
        Ok(m)
    }

    /// Equal coupling γ/4 to every channel (non-chiral, γ = 1).
    pub fn symmetric() -> Self {
        Self { gamma_ar: 0.25, gamma_al: 0.25, gamma_br: 0.25, gamma_bl: 0.25 }
    }

    /// Reference chiral set with γ = 1: γ_ar = 0.5, γ_al = 0.3,
    /// γ_br = γ_bl = 0.1. For a photon entering at R_a this is
    /// γ_pg = 1/2, γ_pḡ = 0.3, γ_p̄g = γ_p̄ḡ = 0.1.
    pub fn reference_chiral() -> Self {
        Self { gamma_ar: 0.5, gamma_al: 0.3, gamma_br: 0.1, gamma_bl: 0.1 }
    }

    pub fn gamma_ar(&self) -> f64 {
        self.gamma_ar
    }
    pub fn gamma_al(&self) -> f64 {
        self.gamma_al
    }
    pub fn gamma_br(&self) -> f64 {
        self.gamma_br
    }
    pub fn gamma_bl(&self) -> f64 {
        self.gamma_bl
    }

    pub fn gamma_a(&self) -> f64 {
        self.gamma_ar + self.gamma_al
    }

    pub fn gamma_b(&self) -> f64 {
        self.gamma_br + self.gamma_bl
    }

    /// Total rate γ = γ_a + γ_b.
    pub fn gamma(&self) -> f64 {
        self.gamma_a() + self.gamma_b()
    }

    /// Rate of the channel a photon enters or leaves through.
    pub fn rate(&self, port: PortLabel) -> f64 {
        match (port.waveguide, port.direction) {
            (Waveguide::A, Direction::Right) => self.gamma_ar,
            (Waveguide::A, Direction::Left) => self.gamma_al,
            (Waveguide::B, Direction::Right) => self.gamma_br,
            (Waveguide::B, Direction::Left) => self.gamma_bl,
        }
    }

    /// Rates in channel order (R_a, L_a, R_b, L_b).
    pub fn rates(&self) -> [f64; 4] {
        [self.gamma_ar, self.gamma_al, self.gamma_br, self.gamma_bl]
    }

    /// Same ratios rescaled so that γ = 1.
    pub fn normalized(&self) -> Self {
        let g = self.gamma();
        Self {
            gamma_ar: self.gamma_ar / g,
            gamma_al: self.gamma_al / g,
            gamma_br: self.gamma_br / g,
            gamma_bl: self.gamma_bl / g,
        }
    }

    /// Swaps right- and left-going rates in both waveguides.
    pub fn mirrored(&self) -> Self {
        Self {
            gamma_ar: self.gamma_al,
            gamma_al: self.gamma_ar,
            gamma_br: self.gamma_bl,
            gamma_bl: self.gamma_br,
        }
    }
}

/// Level frequencies of the cascade emitter (ω₁ = 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterParams {
    omega_2: f64,
    omega_3: f64,
}

impl EmitterParams {
    pub fn new(omega_2: f64, omega_3: f64) -> Result<Self, ValidationError> {
        finite("omega_2", omega_2)?;
        finite("omega_3", omega_3)?;
        if !(omega_2 > 0.0 && omega_3 > omega_2) {
            return Err(ValidationError::EmitterOrdering { omega_2, omega_3 });
        }
        Ok(Self { omega_2, omega_3 })
    }

    pub fn omega_2(&self) -> f64 {
        self.omega_2
    }

    pub fn omega_3(&self) -> f64 {
        self.omega_3
    }

    pub fn omega_32(&self) -> f64 {
        self.omega_3 - self.omega_2
    }
}

/// Extra cavity: drive strength λ on |2⟩↔|3⟩ and Fock photon number n.
///
/// The cavity frequency is optional because detuning-style configurations
/// only fix Δ_a = ω_a − ω_32.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    omega_a: Option<f64>,
    lambda: f64,
    n: u32,
}

impl CavityParams {
    pub fn new(lambda: f64, n: u32) -> Result<Self, ValidationError> {
        finite("lambda", lambda)?;
        if lambda < 0.0 {
            return Err(ValidationError::NegativeDrive(lambda));
        }
        Ok(Self { omega_a: None, lambda, n })
    }

    /// Accepts a real-valued photon number as read from a config file.
    pub fn from_real_n(lambda: f64, n: f64) -> Result<Self, ValidationError> {
        Self::new(lambda, photon_number(n)?)
    }

    pub fn with_frequency(mut self, omega_a: f64) -> Result<Self, ValidationError> {
        finite("omega_a", omega_a)?;
        if omega_a <= 0.0 {
            return Err(ValidationError::CavityFrequency(omega_a));
        }
        self.omega_a = Some(omega_a);
        Ok(self)
    }

    pub fn with_photons(mut self, n: u32) -> Self {
        self.n = n;
        self
    }

    pub fn omega_a(&self) -> Option<f64> {
        self.omega_a
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Effective |2,n⟩↔|3,n−1⟩ coupling √n·λ.
    pub fn coupling(&self) -> f64 {
        f64::from(self.n).sqrt() * self.lambda
    }

    /// n·λ², the constant term of the pole quadratic.
    pub fn n_lambda_sq(&self) -> f64 {
        f64::from(self.n) * self.lambda * self.lambda
    }
}

/// Converts a config value to a Fock photon number.
pub fn photon_number(n: f64) -> Result<u32, ValidationError> {
    if !n.is_finite() || n < 0.0 || n.fract() != 0.0 || n > f64::from(u32::MAX) {
        return Err(ValidationError::NonIntegerPhotonNumber(n));
    }
    Ok(n as u32)
}

/// One incident energy, expressed through the detunings the amplitudes
/// depend on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    /// δ_k^n = E_k − nω_a; only known when built from absolute frequencies.
    pub delta_k_n: Option<f64>,
    /// Δ_k^n = δ_k^n − ω_2.
    pub detuning_k: f64,
    /// Δ_a = ω_a − ω_32.
    pub detuning_a: f64,
}

impl ScatterPoint {
    pub fn from_detunings(detuning_k: f64, detuning_a: f64) -> Self {
        Self { delta_k_n: None, detuning_k, detuning_a }
    }

    /// Builds the point for total eigenenergy `energy` = E_k.
    pub fn from_absolute(emitter: &EmitterParams, omega_a: f64, n: u32, energy: f64) -> Self {
        let delta_k_n = energy - f64::from(n) * omega_a;
        Self {
            delta_k_n: Some(delta_k_n),
            detuning_k: delta_k_n - emitter.omega_2(),
            detuning_a: omega_a - emitter.omega_32(),
        }
    }

    /// Recovers (ω_a, E_k) given the emitter levels.
    pub fn to_absolute(&self, emitter: &EmitterParams, n: u32) -> (f64, f64) {
        let omega_a = self.detuning_a + emitter.omega_32();
        let delta_k_n = self.detuning_k + emitter.omega_2();
        (omega_a, delta_k_n + f64::from(n) * omega_a)
    }

    /// Δ_k^n + Δ_a; zero on the photon-induced tunneling line.
    pub fn pit_offset(&self) -> f64 {
        self.detuning_k + self.detuning_a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Waveguide {
    A,
    B,
}

impl Waveguide {
    pub fn other(self) -> Self {
        match self {
            Waveguide::A => Waveguide::B,
            Waveguide::B => Waveguide::A,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Right,
    Left,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::Right => Direction::Left,
            Direction::Left => Direction::Right,
        }
    }
}

/// One of the four chiral channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PortLabel {
    pub waveguide: Waveguide,
    pub direction: Direction,
}

impl PortLabel {
    pub const RA: PortLabel = PortLabel { waveguide: Waveguide::A, direction: Direction::Right };
    pub const LA: PortLabel = PortLabel { waveguide: Waveguide::A, direction: Direction::Left };
    pub const RB: PortLabel = PortLabel { waveguide: Waveguide::B, direction: Direction::Right };
    pub const LB: PortLabel = PortLabel { waveguide: Waveguide::B, direction: Direction::Left };

    /// Channel order used by every 4-vector in the crate.
    pub const ALL: [PortLabel; 4] = [Self::RA, Self::LA, Self::RB, Self::LB];

    pub fn index(self) -> usize {
        match (self.waveguide, self.direction) {
            (Waveguide::A, Direction::Right) => 0,
            (Waveguide::A, Direction::Left) => 1,
            (Waveguide::B, Direction::Right) => 2,
            (Waveguide::B, Direction::Left) => 3,
        }
    }

    /// Same waveguide, opposite direction.
    pub fn reflected(self) -> Self {
        Self { waveguide: self.waveguide, direction: self.direction.reversed() }
    }

    /// Other waveguide, same direction.
    pub fn crossed(self) -> Self {
        Self { waveguide: self.waveguide.other(), direction: self.direction }
    }
}

impl fmt::Display for PortLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = match self.direction {
            Direction::Right => 'R',
            Direction::Left => 'L',
        };
        let w = match self.waveguide {
            Waveguide::A => 'a',
            Waveguide::B => 'b',
        };
        write!(f, "{d}{w}")
    }
}

impl FromStr for PortLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ra" => Ok(Self::RA),
            "la" => Ok(Self::LA),
            "rb" => Ok(Self::RB),
            "lb" => Ok(Self::LB),
            _ => Err(format!("unknown port '{s}' (expected Ra, La, Rb or Lb)")),
        }
    }
}

/// A regime assumption that holds only approximately for these parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ValidityWarning {
    /// √n·λ is not small against min(ω_a, ω_32).
    StrongDrive { coupling: f64, scale: f64 },
    /// |Δ_a| is not small against ω_a + ω_32.
    LargeCavityDetuning { detuning: f64, scale: f64 },
}

impl fmt::Display for ValidityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidityWarning::StrongDrive { coupling, scale } => {
                write!(f, "sqrt(n)*lambda = {coupling} is not << min(omega_a, omega_32) = {scale}")
            }
            ValidityWarning::LargeCavityDetuning { detuning, scale } => {
                write!(f, "|Delta_a| = {} is not << omega_a + omega_32 = {scale}", detuning.abs())
            }
        }
    }
}

/// Parameters that passed validation. Immutable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidatedSystem {
    pub couplings: CouplingMatrix,
    pub cavity: CavityParams,
    /// Δ_a, always known.
    pub detuning_a: f64,
    /// Present only for configurations given in absolute frequencies.
    pub emitter: Option<EmitterParams>,
    pub warnings: Vec<ValidityWarning>,
}

impl ValidatedSystem {
    pub fn gamma(&self) -> f64 {
        self.couplings.gamma()
    }

    pub fn point(&self, detuning_k: f64) -> ScatterPoint {
        ScatterPoint::from_detunings(detuning_k, self.detuning_a)
    }
}

/// Validates a system given in absolute frequencies; the cavity must carry ω_a.
pub fn validate_system(
    couplings: CouplingMatrix,
    emitter: EmitterParams,
    cavity: CavityParams,
) -> Result<ValidatedSystem, ValidationError> {
    let omega_a = cavity.omega_a().ok_or(ValidationError::NonFinite { key: "omega_a" })?;
    let detuning_a = omega_a - emitter.omega_32();

    let mut warnings = Vec::new();
    let scale = omega_a.min(emitter.omega_32());
    if cavity.coupling() >= VALIDITY_FACTOR * scale {
        warnings.push(ValidityWarning::StrongDrive { coupling: cavity.coupling(), scale });
    }
    let scale = omega_a + emitter.omega_32();
    if detuning_a.abs() >= VALIDITY_FACTOR * scale {
        warnings.push(ValidityWarning::LargeCavityDetuning { detuning: detuning_a, scale });
    }
    for w in &warnings {
        log::warn!("{w}");
    }

    Ok(ValidatedSystem { couplings, cavity, detuning_a, emitter: Some(emitter), warnings })
}

/// Validates a detuning-style system. The absolute-frequency guards cannot
/// be evaluated and no warnings are produced.
pub fn validate_detuned(
    couplings: CouplingMatrix,
    cavity: CavityParams,
    detuning_a: f64,
) -> Result<ValidatedSystem, ValidationError> {
    finite("Delta_a", detuning_a)?;
    Ok(ValidatedSystem { couplings, cavity, detuning_a, emitter: None, warnings: Vec::new() })
}

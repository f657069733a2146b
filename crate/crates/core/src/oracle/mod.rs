//! Brute-force wavepacket check of the closed-form even-mode transmission.
//!
//! The even channel is chiral with linear dispersion, so a finite set of
//! momenta k_j with widths w_j and energies k_j (measured from ω_2 + nω_a,
//! i.e. k_j plays the role of Δ_k^n) is a faithful bath. Each mode couples to
//! |2,n⟩ with g_j = √(γ·w_j/2π); |2,n⟩ couples to |3,n−1⟩ (energy −Δ_a)
//! with √n λ. A Gaussian packet starts at x₀ = −t_f/2, crosses the emitter,
//! and the per-mode ratio of final to free-evolved amplitudes estimates t_{k,e}.
//!
//! The grid has a uniform core around the carrier plus geometric tails out to
//! a far cutoff. A bath cut off at ±0.5γ alone shifts the emitter level by a
//! band-edge Lamb shift comparable to γ; the tails remove it cheaply.

mod propagate;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::{CavityParams, ScatterPoint};
use crate::scattering::even_transmission;

pub use propagate::{bessel_j_sequence, chebyshev_propagate, EigenPropagator, NORM_TOLERANCE};

/// Fewer core modes than this cannot resolve a packet.
pub const MIN_MODES: usize = 64;
/// Modes below this fraction of the peak initial weight are not compared.
pub const RESOLVED_FRACTION: f64 = 1e-4;
/// Emitter population that must be left at the end of a run.
pub const EMPTY_EMITTER: f64 = 1e-6;
/// Acceptance threshold on the largest per-mode error.
pub const PASS_THRESHOLD: f64 = 0.02;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("n_modes = {0} is under-resolved (need at least {MIN_MODES})")]
    UnderResolved(usize),
    #[error("sigma_k = {sigma} is below 5 grid spacings ({spacing})")]
    PacketUnresolved { sigma: f64, spacing: f64 },
    #[error("k_window must extend 8 sigma_k on each side of the carrier {carrier}")]
    WindowTooNarrow { carrier: f64 },
    #[error("invalid oracle parameter {name} = {value}")]
    BadParameter { name: &'static str, value: f64 },
    #[error("norm drifted by {drift:e} during propagation")]
    NormDrift { drift: f64 },
    #[error("propagation too short: emitter population {population:e} left at the end")]
    PropagationTooShort { population: f64 },
    #[error("eigendecomposition failed: {0}")]
    Eigen(String),
}

/// Geometric extension of the mode grid beyond the core window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailSpec {
    /// Width ratio of consecutive tail cells.
    pub ratio: f64,
    /// Distance from the carrier at which the tail stops.
    pub cutoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleConfig {
    /// Core modes, uniformly spaced over `k_window`.
    pub n_modes: usize,
    pub k_window: (f64, f64),
    pub sigma_k: f64,
    pub t_final: f64,
    /// Carrier detuning Δ_k^n of the packet.
    pub carrier: f64,
    pub tail: Option<TailSpec>,
}

impl OracleConfig {
    /// Default discretization: 2048 core modes over ±0.5γ, σ_k = 0.02γ,
    /// tails with ratio 1.2 to 1000γ, and t_f = 10/σ_k.
    pub fn new(carrier: f64, gamma: f64) -> Self {
        let sigma_k = 0.02 * gamma;
        Self {
            n_modes: 2048,
            k_window: (carrier - 0.5 * gamma, carrier + 0.5 * gamma),
            sigma_k,
            t_final: 10.0 / sigma_k,
            carrier,
            tail: Some(TailSpec { ratio: 1.2, cutoff: 1000.0 * gamma }),
        }
    }

    /// Same discretization re-centred on another carrier.
    pub fn with_carrier(&self, carrier: f64) -> Self {
        let shift = carrier - self.carrier;
        Self { k_window: (self.k_window.0 + shift, self.k_window.1 + shift), carrier, ..self.clone() }
    }

    pub fn spacing(&self) -> f64 {
        (self.k_window.1 - self.k_window.0) / self.n_modes as f64
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        let finite = |name, value: f64| {
            if value.is_finite() {
                Ok(())
            } else {
                Err(OracleError::BadParameter { name, value })
            }
        };
        finite("carrier", self.carrier)?;
        finite("sigma_k", self.sigma_k)?;
        finite("t_final", self.t_final)?;
        if self.n_modes < MIN_MODES {
            return Err(OracleError::UnderResolved(self.n_modes));
        }
        if self.k_window.1.is_nan() || self.k_window.1 <= self.k_window.0 {
            return Err(OracleError::BadParameter { name: "k_window", value: self.k_window.1 });
        }
        if self.t_final < 0.0 {
            return Err(OracleError::BadParameter { name: "t_final", value: self.t_final });
        }
        let spacing = self.spacing();
        if self.sigma_k < 5.0 * spacing {
            return Err(OracleError::PacketUnresolved { sigma: self.sigma_k, spacing });
        }
        let reach = 8.0 * self.sigma_k;
        if self.carrier - self.k_window.0 < reach || self.k_window.1 - self.carrier < reach {
            return Err(OracleError::WindowTooNarrow { carrier: self.carrier });
        }
        if let Some(tail) = self.tail {
            if tail.ratio.is_nan() || tail.ratio <= 1.0 {
                return Err(OracleError::BadParameter { name: "tail ratio", value: tail.ratio });
            }
            let edge = (self.carrier - self.k_window.0).max(self.k_window.1 - self.carrier);
            if tail.cutoff.is_nan() || tail.cutoff <= edge {
                return Err(OracleError::BadParameter { name: "tail cutoff", value: tail.cutoff });
            }
        }
        Ok(())
    }
}

/// Discrete momenta (cell midpoints) and cell widths, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    pub k: Vec<f64>,
    pub width: Vec<f64>,
    /// Index range of the uniform core within `k`.
    pub core: std::ops::Range<usize>,
}

/// Tail cells as (offset from the window edge, width), growing until `distance`.
fn tail_cells(first: f64, ratio: f64, distance: f64) -> Vec<(f64, f64)> {
    let mut cells = Vec::new();
    let mut edge = 0.0;
    let mut h = first;
    while edge < distance {
        h *= ratio;
        cells.push((edge + h / 2.0, h));
        edge += h;
    }
    cells
}

impl ModeGrid {
    pub fn build(window: (f64, f64), n_core: usize, center: f64, tail: Option<TailSpec>) -> Self {
        let dk = (window.1 - window.0) / n_core as f64;
        let mut k = Vec::new();
        let mut width = Vec::new();
        let (low_tail, high_tail) = match tail {
            Some(t) => (
                tail_cells(dk, t.ratio, t.cutoff - (center - window.0)),
                tail_cells(dk, t.ratio, t.cutoff - (window.1 - center)),
            ),
            None => (Vec::new(), Vec::new()),
        };
        for &(offset, h) in low_tail.iter().rev() {
            k.push(window.0 - offset);
            width.push(h);
        }
        let start = k.len();
        for j in 0..n_core {
            k.push(window.0 + dk * (j as f64 + 0.5));
            width.push(dk);
        }
        let core = start..k.len();
        for &(offset, h) in &high_tail {
            k.push(window.1 + offset);
            width.push(h);
        }
        Self { k, width, core }
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }
}

/// Arrowhead Hamiltonian in the rotating frame. Basis order: modes, then
/// |2,n⟩, then |3,n−1⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleHamiltonian {
    pub grid: ModeGrid,
    pub coupling: Vec<f64>,
    pub detuning_a: f64,
    pub drive: f64,
}

impl OracleHamiltonian {
    pub fn from_grid(grid: ModeGrid, detuning_a: f64, cavity: &CavityParams, gamma: f64) -> Self {
        let coupling = grid.width.iter().map(|w| (gamma * w / (2.0 * PI)).sqrt()).collect();
        Self { grid, coupling, detuning_a, drive: cavity.coupling() }
    }

    pub fn dim(&self) -> usize {
        self.grid.len() + 2
    }

    pub fn level2(&self) -> usize {
        self.grid.len()
    }

    pub fn level3(&self) -> usize {
        self.grid.len() + 1
    }

    pub fn dense(&self) -> faer::Mat<f64> {
        let m = self.grid.len();
        let (l2, l3) = (self.level2(), self.level3());
        faer::Mat::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j {
                if i < m {
                    self.grid.k[i]
                } else if i == l2 {
                    0.0
                } else {
                    -self.detuning_a
                }
            } else if i == l2 && j < m {
                self.coupling[j]
            } else if j == l2 && i < m {
                self.coupling[i]
            } else if (i, j) == (l2, l3) || (i, j) == (l3, l2) {
                self.drive
            } else {
                0.0
            }
        })
    }

    /// y = H·x without forming the dense matrix.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let m = self.grid.len();
        let (l2, l3) = (self.level2(), self.level3());
        let mut acc = x[l3] * self.drive;
        for j in 0..m {
            y[j] = x[j] * self.grid.k[j] + x[l2] * self.coupling[j];
            acc += x[j] * self.coupling[j];
        }
        y[l2] = acc;
        y[l3] = x[l2] * self.drive - x[l3] * self.detuning_a;
    }

    /// Gershgorin interval containing the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut row2 = self.drive;
        for (k, g) in self.grid.k.iter().zip(&self.coupling) {
            lo = lo.min(k - g);
            hi = hi.max(k + g);
            row2 += g;
        }
        lo = lo.min(-row2).min(-self.detuning_a - self.drive);
        hi = hi.max(row2).max(-self.detuning_a + self.drive);
        (lo, hi)
    }
}

/// Validates `config` and builds its Hamiltonian.
pub fn build_hamiltonian(
    config: &OracleConfig,
    detuning_a: f64,
    cavity: &CavityParams,
    gamma: f64,
) -> Result<OracleHamiltonian, OracleError> {
    config.validate()?;
    if gamma.is_nan() || gamma < 0.0 {
        return Err(OracleError::BadParameter { name: "gamma", value: gamma });
    }
    let grid = ModeGrid::build(config.k_window, config.n_modes, config.carrier, config.tail);
    Ok(OracleHamiltonian::from_grid(grid, detuning_a, cavity, gamma))
}

/// A state of the one-excitation subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleExcitationState {
    pub modes: Vec<Complex64>,
    pub beta: Complex64,
    pub zeta: Complex64,
}

impl SingleExcitationState {
    pub fn to_vector(&self) -> Vec<Complex64> {
        let mut v = self.modes.clone();
        v.push(self.beta);
        v.push(self.zeta);
        v
    }

    pub fn from_vector(mut v: Vec<Complex64>) -> Self {
        let zeta = v.pop().expect("state vector too short");
        let beta = v.pop().expect("state vector too short");
        Self { modes: v, beta, zeta }
    }

    pub fn norm_sq(&self) -> f64 {
        self.modes.iter().map(Complex64::norm_sqr).sum::<f64>() + self.emitter_population()
    }

    pub fn emitter_population(&self) -> f64 {
        self.beta.norm_sqr() + self.zeta.norm_sqr()
    }

    /// Gaussian packet centred on `carrier` and located at x₀ = −t_f/2.
    pub fn wavepacket(grid: &ModeGrid, config: &OracleConfig) -> Self {
        let x0 = -config.t_final / 2.0;
        let mut modes: Vec<Complex64> = grid
            .k
            .iter()
            .zip(&grid.width)
            .map(|(&k, &w)| {
                let d = k - config.carrier;
                let envelope = w.sqrt() * (-d * d / (4.0 * config.sigma_k * config.sigma_k)).exp();
                Complex64::from_polar(envelope, -k * x0)
            })
            .collect();
        let norm = modes.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        for c in &mut modes {
            *c /= norm;
        }
        Self { modes, beta: Complex64::new(0.0, 0.0), zeta: Complex64::new(0.0, 0.0) }
    }

    /// All weight in |2,n⟩.
    pub fn excited(modes: usize) -> Self {
        Self {
            modes: vec![Complex64::new(0.0, 0.0); modes],
            beta: Complex64::new(1.0, 0.0),
            zeta: Complex64::new(0.0, 0.0),
        }
    }
}

/// Per-mode t_est(k) = c_k(t_f)·e^{ik t_f}/c_k(0) on the resolved modes.
pub fn extract_transmission(
    grid: &ModeGrid,
    initial: &SingleExcitationState,
    fin: &SingleExcitationState,
    t_final: f64,
) -> Result<Vec<(f64, Complex64)>, OracleError> {
    let population = fin.emitter_population();
    if population >= EMPTY_EMITTER {
        return Err(OracleError::PropagationTooShort { population });
    }
    let peak = initial.modes.iter().map(Complex64::norm_sqr).fold(0.0, f64::max);
    Ok(grid
        .k
        .iter()
        .zip(initial.modes.iter().zip(&fin.modes))
        .filter(|(_, (c0, _))| c0.norm_sqr() > RESOLVED_FRACTION * peak)
        .map(|(&k, (c0, c1))| (k, c1 * Complex64::from_polar(1.0, k * t_final) / c0))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyRow {
    pub k: f64,
    pub t_est: [f64; 2],
    pub t_closed: [f64; 2],
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub carrier: f64,
    pub rows: Vec<VerifyRow>,
    pub max_error: f64,
    pub final_emitter_population: f64,
    /// Largest |β|² + |ζ|² sampled during the run.
    pub peak_emitter_population: f64,
    /// Largest |β|² alone.
    pub peak_level2_population: f64,
    pub norm_drift: f64,
    pub matrix_dim: usize,
}

impl VerifyReport {
    pub const CSV_HEADER: &'static str = "k,Re_t_est,Im_t_est,Re_t_closed,Im_t_closed,abs_error";

    pub fn passes(&self) -> bool {
        self.max_error < PASS_THRESHOLD
    }

    pub fn csv_rows(&self) -> impl Iterator<Item = String> + '_ {
        self.rows.iter().map(|r| {
            format!(
                "{},{},{},{},{},{}",
                r.k, r.t_est[0], r.t_est[1], r.t_closed[0], r.t_closed[1], r.abs_error
            )
        })
    }

    /// Oracle estimate nearest to the carrier.
    pub fn at_carrier(&self) -> Option<&VerifyRow> {
        self.rows.iter().min_by(|a, b| (a.k - self.carrier).abs().total_cmp(&(b.k - self.carrier).abs()))
    }
}

/// Times at which the emitter population is sampled during a run.
const POPULATION_SAMPLES: usize = 200;

/// Runs one wavepacket and compares every resolved mode to t_{k,e}.
pub fn verify_against_closed_form(
    config: &OracleConfig,
    detuning_a: f64,
    cavity: &CavityParams,
    gamma: f64,
) -> Result<VerifyReport, OracleError> {
    let ham = build_hamiltonian(config, detuning_a, cavity, gamma)?;
    let prop = EigenPropagator::new(&ham)?;
    let initial = SingleExcitationState::wavepacket(&ham.grid, config);
    let psi0 = initial.to_vector();
    let coords = prop.to_eigenbasis(&psi0);

    let mut peak: f64 = 0.0;
    let mut peak2: f64 = 0.0;
    for s in 0..=POPULATION_SAMPLES {
        let t = config.t_final * s as f64 / POPULATION_SAMPLES as f64;
        let b = prop.component_at(&coords, ham.level2(), t);
        let z = prop.component_at(&coords, ham.level3(), t);
        peak = peak.max(b.norm_sqr() + z.norm_sqr());
        peak2 = peak2.max(b.norm_sqr());
    }

    let fin = prop.propagate(&initial, config.t_final)?;
    let estimates = extract_transmission(&ham.grid, &initial, &fin, config.t_final)?;
    let rows: Vec<VerifyRow> = estimates
        .into_iter()
        .map(|(k, t_est)| {
            let closed = even_transmission(&ScatterPoint::from_detunings(k, detuning_a), cavity, gamma);
            VerifyRow {
                k,
                t_est: [t_est.re, t_est.im],
                t_closed: [closed.re, closed.im],
                abs_error: (t_est - closed).norm(),
            }
        })
        .collect();
    let max_error = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
    Ok(VerifyReport {
        carrier: config.carrier,
        max_error,
        final_emitter_population: fin.emitter_population(),
        peak_emitter_population: peak,
        peak_level2_population: peak2,
        norm_drift: (fin.norm_sq() - initial.norm_sq()).abs(),
        matrix_dim: ham.dim(),
        rows,
    })
}

/// Five carriers spread evenly over [−2γ, 2γ].
pub fn standard_carriers(gamma: f64) -> Vec<f64> {
    (-2..=2).map(|i| f64::from(i) * gamma).collect()
}

/// Independent runs for several carriers, in parallel; output order follows
/// `carriers`.
pub fn verify_carriers(
    base: &OracleConfig,
    carriers: &[f64],
    detuning_a: f64,
    cavity: &CavityParams,
    gamma: f64,
) -> Result<Vec<VerifyReport>, OracleError> {
    crate::parallel::install(|| {
        carriers
            .par_iter()
            .map(|&c| verify_against_closed_form(&base.with_carrier(c), detuning_a, cavity, gamma))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub times: Vec<f64>,
    pub population: Vec<f64>,
    pub max_relative_error: f64,
}

impl DecayReport {
    pub fn passes(&self) -> bool {
        self.max_relative_error < 0.01
    }
}

/// Weisskopf-Wigner check of the coupling normalization: starting in |2,n⟩
/// with λ = 0, the population must follow e^{−γt} over three lifetimes.
///
/// Uses a wider, finer-tailed bath than the scattering runs, since a decaying
/// level samples the whole Lorentzian rather than a narrow band.
pub fn decay_calibration(gamma: f64) -> Result<DecayReport, OracleError> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(OracleError::BadParameter { name: "gamma", value: gamma });
    }
    let tail = TailSpec { ratio: 1.05, cutoff: 1000.0 * gamma };
    let grid = ModeGrid::build((-50.0 * gamma, 50.0 * gamma), 1024, 0.0, Some(tail));
    let cavity = CavityParams::new(0.0, 0).expect("vacuum cavity is valid");
    let ham = OracleHamiltonian::from_grid(grid, 0.0, &cavity, gamma);
    let prop = EigenPropagator::new(&ham)?;
    let coords = prop.to_eigenbasis(&SingleExcitationState::excited(ham.grid.len()).to_vector());

    let times: Vec<f64> = (0..=60).map(|i| 3.0 / gamma * f64::from(i) / 60.0).collect();
    let population: Vec<f64> =
        times.iter().map(|&t| prop.component_at(&coords, ham.level2(), t).norm_sqr()).collect();
    let max_relative_error =
        times.iter().zip(&population).map(|(t, p)| (p / (-gamma * t).exp() - 1.0).abs()).fold(0.0, f64::max);
    Ok(DecayReport { times, population, max_relative_error })
}

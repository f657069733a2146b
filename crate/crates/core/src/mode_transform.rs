//! Parity change of basis over the four chiral channels.
//!
//! Channel order is (R_a, L_a, R_b, L_b), where the left-going fields are
//! taken at mirrored position −x. Only the even row E couples to the
//! emitter; the three odd rows propagate freely, so the whole channel
//! S-matrix is `I + U·e·eᵀ` with `e` the E-row and `U = t_e − 1`.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::model::{CouplingMatrix, PortLabel, Waveguide};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModeError {
    #[error(
        "waveguide {0:?} has zero total coupling; the odd basis rows degenerate, \
         treat the system as a single waveguide instead"
    )]
    DegenerateWaveguide(Waveguide),
}

/// Rows of the parity basis, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityRow {
    Even = 0,
    Odd = 1,
    OddA = 2,
    OddB = 3,
}

/// 4×4 real matrix whose rows expand E, O, O_a, O_b over the channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityBasis {
    rows: [[f64; 4]; 4],
}

impl ParityBasis {
    pub fn row(&self, row: ParityRow) -> [f64; 4] {
        self.rows[row as usize]
    }

    pub fn even_row(&self) -> [f64; 4] {
        self.rows[0]
    }

    pub fn matrix(&self) -> [[f64; 4]; 4] {
        self.rows
    }

    /// max |(MᵀM − I)_ij|.
    pub fn orthogonality_defect(&self) -> f64 {
        let m = &self.rows;
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                let dot: f64 = (0..4).map(|r| m[r][i] * m[r][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// Rows as CSV, header naming the channels.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,Ra,La,Rb,Lb\n");
        for (name, row) in ["E", "O", "O_a", "O_b"].iter().zip(self.rows.iter()) {
            out.push_str(&format!("{name},{},{},{},{}\n", row[0], row[1], row[2], row[3]));
        }
        out
    }

    /// Full channel S-matrix applied to a unit input: Mᵀ·diag(t_e,1,1,1)·M·ê_port.
    pub fn scatter(&self, u: Complex64, port: PortLabel) -> ChannelVector {
        let col = port.index();
        let m = &self.rows;
        let t_even = Complex64::new(1.0, 0.0) + u;
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for (ch, slot) in out.iter_mut().enumerate() {
            for (r, row) in m.iter().enumerate() {
                let factor = if r == 0 { t_even } else { Complex64::new(1.0, 0.0) };
                *slot += factor * row[ch] * row[col];
            }
        }
        ChannelVector(out)
    }
}

pub fn build_parity_basis(couplings: &CouplingMatrix) -> Result<ParityBasis, ModeError> {
    let (ga, gb, g) = (couplings.gamma_a(), couplings.gamma_b(), couplings.gamma());
    if ga <= 0.0 {
        return Err(ModeError::DegenerateWaveguide(Waveguide::A));
    }
    if gb <= 0.0 {
        return Err(ModeError::DegenerateWaveguide(Waveguide::B));
    }
    let [ar, al, br, bl] = couplings.rates();
    let even = [(ar / g).sqrt(), (al / g).sqrt(), (br / g).sqrt(), (bl / g).sqrt()];
    let (up, down) = ((gb / ga).sqrt(), (ga / gb).sqrt());
    let odd = [up * even[0], up * even[1], -down * even[2], -down * even[3]];
    let odd_a = [(al / ga).sqrt(), -(ar / ga).sqrt(), 0.0, 0.0];
    let odd_b = [0.0, 0.0, (bl / gb).sqrt(), -(br / gb).sqrt()];

    let mut rows = [even, odd, odd_a, odd_b];
    for row in rows.iter_mut() {
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        row.iter_mut().for_each(|x| *x /= norm);
    }
    Ok(ParityBasis { rows })
}

/// Components of a single-channel input along the parity rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InputDecomposition {
    /// cos α, the weight of the interacting even mode.
    pub even_amplitude: f64,
    /// Components along O, O_a, O_b.
    pub odd_amplitudes: [f64; 3],
}

impl InputDecomposition {
    pub fn norm_sq(&self) -> f64 {
        self.even_amplitude.powi(2) + self.odd_amplitudes.iter().map(|x| x * x).sum::<f64>()
    }
}

pub fn decompose_input(port: PortLabel, couplings: &CouplingMatrix) -> Result<InputDecomposition, ModeError> {
    let basis = build_parity_basis(couplings)?;
    let col = port.index();
    let m = basis.matrix();
    Ok(InputDecomposition { even_amplitude: m[0][col], odd_amplitudes: [m[1][col], m[2][col], m[3][col]] })
}

/// Complex amplitudes on the four channels (R_a, L_a, R_b, L_b).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelVector(pub [Complex64; 4]);

impl ChannelVector {
    pub fn unit(port: PortLabel) -> Self {
        let mut v = [Complex64::new(0.0, 0.0); 4];
        v[port.index()] = Complex64::new(1.0, 0.0);
        Self(v)
    }

    pub fn get(&self, port: PortLabel) -> Complex64 {
        self.0[port.index()]
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Scattering probabilities for one input port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probabilities {
    /// T_p, same waveguide, same direction.
    pub t_p: f64,
    /// R_p, same waveguide, reversed.
    pub r_p: f64,
    /// T_p̄, other waveguide, same direction.
    pub t_pbar: f64,
    /// R_p̄, other waveguide, reversed.
    pub r_pbar: f64,
    /// T = T_p̄ + R_p̄.
    pub transfer: f64,
}

impl Probabilities {
    pub fn total(&self) -> f64 {
        self.t_p + self.r_p + self.t_pbar + self.r_pbar
    }

    /// In CSV column order T_p, R_p, T_pbar, R_pbar, T.
    pub fn as_array(&self) -> [f64; 5] {
        [self.t_p, self.r_p, self.t_pbar, self.r_pbar, self.transfer]
    }
}

/// Out-state amplitudes for a photon entering through `port`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourPortResult {
    pub port: PortLabel,
    pub t_same: Complex64,
    pub r_same: Complex64,
    pub t_cross: Complex64,
    pub r_cross: Complex64,
}

impl FourPortResult {
    pub fn probabilities(&self) -> Probabilities {
        let t_pbar = self.t_cross.norm_sqr();
        let r_pbar = self.r_cross.norm_sqr();
        Probabilities {
            t_p: self.t_same.norm_sqr(),
            r_p: self.r_same.norm_sqr(),
            t_pbar,
            r_pbar,
            transfer: t_pbar + r_pbar,
        }
    }

    /// Amplitudes placed on their output channels.
    pub fn to_channels(&self) -> ChannelVector {
        let mut v = ChannelVector::unit(self.port);
        v.0[self.port.index()] = self.t_same;
        v.0[self.port.reflected().index()] = self.r_same;
        v.0[self.port.crossed().index()] = self.t_cross;
        v.0[self.port.crossed().reflected().index()] = self.r_cross;
        v
    }
}

/// Four-port amplitudes from the scattering factor `u`.
pub fn reconstruct_four_port(u: Complex64, port: PortLabel, couplings: &CouplingMatrix) -> FourPortResult {
    let g = couplings.gamma();
    let g_in = couplings.rate(port);
    let weight = |other: PortLabel| (g_in * couplings.rate(other)).sqrt() / g;
    FourPortResult {
        port,
        t_same: u * (g_in / g) + 1.0,
        r_same: u * weight(port.reflected()),
        t_cross: u * weight(port.crossed()),
        r_cross: u * weight(port.crossed().reflected()),
    }
}

//! Dressed states of the cavity and the upper transition.
//!
//! In the n-excitation block spanned by |2,n⟩ and |3,n−1⟩, with energies
//! measured from |2,n⟩, the Hamiltonian is
//!
//! ```text
//! [[0,     √n λ],
//!  [√n λ, −Δ_a ]]
//! ```
//!
//! since |3,n−1⟩ sits ω_32 − ω_a = −Δ_a above |2,n⟩. Its eigenvalues
//! E = (−Δ_a ± Ω_n)/2 are exactly the detunings Δ_k^n at which the even-mode
//! scattering factor reaches −2.
//!
//! |φ_+⟩ is the branch that turns into |2,n⟩ when λ → 0. For Δ_a ≥ 0 it is the
//! upper level; for Δ_a < 0 the labels swap and E_+ − E_− = −Ω_n.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::CavityParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DressedError {
    #[error("approximation undefined at resonance (Delta_a = 0)")]
    Resonance,
    #[error("large-detuning approximation needs Delta_a > 0, got {0}")]
    NegativeDetuning(f64),
}

/// Ω_n = √(Δ_a² + 4nλ²).
pub fn rabi_splitting(detuning_a: f64, cavity: &CavityParams) -> f64 {
    detuning_a.hypot(2.0 * cavity.coupling())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DressedPair {
    pub e_plus: f64,
    pub e_minus: f64,
    pub omega_n: f64,
    /// (⟨2,n|φ_+⟩, ⟨3,n−1|φ_+⟩).
    pub c_plus: [f64; 2],
    pub c_minus: [f64; 2],
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    /// n = 0 or λ = 0: only |2,n⟩ couples to the waveguide.
    pub two_level_limit: bool,
}

impl DressedPair {
    /// Both energies in ascending order.
    pub fn energies(&self) -> [f64; 2] {
        if self.e_plus <= self.e_minus {
            [self.e_plus, self.e_minus]
        } else {
            [self.e_minus, self.e_plus]
        }
    }
}

fn unit(g: f64, e: f64) -> [f64; 2] {
    let norm = g.hypot(e);
    [g / norm, e / norm]
}

/// Exact diagonalization of the dressed block.
pub fn dressed_pair(detuning_a: f64, cavity: &CavityParams, gamma: f64) -> DressedPair {
    let g = cavity.coupling();
    let omega_n = rabi_splitting(detuning_a, cavity);
    if g == 0.0 {
        return DressedPair {
            e_plus: 0.0,
            e_minus: -detuning_a,
            omega_n,
            c_plus: [1.0, 0.0],
            c_minus: [0.0, 1.0],
            gamma_plus: gamma,
            gamma_minus: 0.0,
            two_level_limit: true,
        };
    }
    // Roots of E² + Δ_a·E − g² = 0; the large one is |3,n−1⟩-like.
    let sign = if detuning_a < 0.0 { -1.0 } else { 1.0 };
    let e_minus = -(detuning_a + sign * omega_n) / 2.0;
    let e_plus = -g * g / e_minus;
    let c_plus = unit(g, e_plus);
    // Orthogonal partner, oriented so the |3,n−1⟩ component is positive.
    let c_minus = [-c_plus[1], c_plus[0]];
    let c_minus = if c_minus[1] < 0.0 { [-c_minus[0], -c_minus[1]] } else { c_minus };
    DressedPair {
        e_plus,
        e_minus,
        omega_n,
        c_plus,
        c_minus,
        gamma_plus: gamma * c_plus[0] * c_plus[0],
        gamma_minus: gamma * c_minus[0] * c_minus[0],
        two_level_limit: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LargeDetuning {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    /// √n λ / Δ_a; the expansion holds while this is ≪ 1.
    pub mixing: f64,
}

/// Textbook large-detuning linewidths
/// γ_+ ≈ Δ_a²/(Δ_a² + nλ²)·γ and γ_- ≈ √nλ·Δ_a/(Δ_a² + nλ²)·γ.
pub fn large_detuning_approx(
    detuning_a: f64,
    cavity: &CavityParams,
    gamma: f64,
) -> Result<LargeDetuning, DressedError> {
    if detuning_a == 0.0 {
        return Err(DressedError::Resonance);
    }
    if detuning_a < 0.0 || detuning_a.is_nan() {
        return Err(DressedError::NegativeDetuning(detuning_a));
    }
    let g = cavity.coupling();
    let d2 = detuning_a * detuning_a;
    let den = d2 + g * g;
    Ok(LargeDetuning {
        gamma_plus: d2 / den * gamma,
        gamma_minus: g * detuning_a / den * gamma,
        mixing: g / detuning_a,
    })
}

/// One transmission dip located in a sampled spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Valley {
    pub center: f64,
    pub minimum: f64,
    /// 1 − minimum; the baseline is full transmission.
    pub depth: f64,
    /// Full width at half depth; `None` when the valley runs off the grid.
    pub fwhm: Option<f64>,
    pub hwhm: Option<f64>,
    pub truncated: bool,
    /// Grid points inside the half-depth interval.
    pub samples: usize,
}

impl Valley {
    pub fn is_resolved(&self) -> bool {
        !self.truncated && self.samples >= MIN_VALLEY_SAMPLES
    }

    pub const CSV_HEADER: &'static str = "center,fwhm,depth";

    pub fn csv_row(&self) -> String {
        let fwhm = self.fwhm.map_or_else(|| "nan".to_string(), |w| w.to_string());
        format!("{},{},{}", self.center, fwhm, self.depth)
    }
}

impl fmt::Display for Valley {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.fwhm {
            Some(w) => write!(f, "valley at {} depth {} fwhm {}", self.center, self.depth, w),
            None => write!(f, "truncated valley at {} depth {}", self.center, self.depth),
        }
    }
}

pub const MIN_VALLEY_SAMPLES: usize = 20;

/// Dips shallower than this are numerical ripple, not valleys.
const MIN_DEPTH: f64 = 1e-9;

fn crossing(x0: f64, y0: f64, x1: f64, y1: f64, level: f64) -> f64 {
    if y1 == y0 {
        return x0;
    }
    x0 + (level - y0) * (x1 - x0) / (y1 - y0)
}

/// Locates every local minimum of T_p and measures it at half depth.
///
/// `x` must be strictly increasing and as long as `y`.
pub fn extract_valley_widths(x: &[f64], y: &[f64]) -> Vec<Valley> {
    assert_eq!(x.len(), y.len(), "abscissa and ordinate lengths differ");
    let len = y.len();
    let mut out = Vec::new();
    if len < 3 {
        return out;
    }
    let mut i = 0;
    while i < len {
        // Treat a run of equal samples as one candidate.
        let mut j = i;
        while j + 1 < len && y[j + 1] == y[i] {
            j += 1;
        }
        let left_higher = i == 0 || y[i - 1] > y[i];
        let right_higher = j == len - 1 || y[j + 1] > y[j];
        let depth = 1.0 - y[i];
        if left_higher && right_higher && depth > MIN_DEPTH {
            out.push(measure(x, y, i, j));
        }
        i = j + 1;
    }
    out
}

fn measure(x: &[f64], y: &[f64], lo: usize, hi: usize) -> Valley {
    let minimum = y[lo];
    let center = 0.5 * (x[lo] + x[hi]);
    let half = 0.5 * (minimum + 1.0);

    let mut a = lo;
    while a > 0 && y[a] < half {
        a -= 1;
    }
    let mut b = hi;
    while b < y.len() - 1 && y[b] < half {
        b += 1;
    }
    let truncated = y[a] < half || y[b] < half;
    let fwhm = (!truncated).then(|| {
        let left = crossing(x[a], y[a], x[a + 1], y[a + 1], half);
        let right = crossing(x[b - 1], y[b - 1], x[b], y[b], half);
        right - left
    });
    Valley {
        center,
        minimum,
        depth: 1.0 - minimum,
        fwhm,
        hwhm: fwhm.map(|w| w / 2.0),
        truncated,
        samples: b - a - 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CouplingMatrix, PortLabel, ScatterPoint};
    use crate::scattering::{four_port, special_points};

    fn cav(lambda: f64, n: u32) -> CavityParams {
        CavityParams::new(lambda, n).unwrap()
    }

    /// Jacobi rotation of a real symmetric 2×2 matrix, independent of the
    /// quadratic-formula path.
    fn jacobi(a: f64, b: f64, d: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        if b == 0.0 {
            return ([a, d], [[1.0, 0.0], [0.0, 1.0]]);
        }
        let theta = 0.5 * (2.0 * b).atan2(a - d);
        let (s, c) = theta.sin_cos();
        let e0 = c * c * a + 2.0 * s * c * b + s * s * d;
        let e1 = s * s * a - 2.0 * s * c * b + c * c * d;
        ([e0, e1], [[c, s], [-s, c]])
    }

    #[test]
    fn rabi_examples() {
        assert_eq!(rabi_splitting(0.0, &cav(1.0, 1)), 2.0);
        assert_eq!(rabi_splitting(3.0, &cav(1.0, 0)), 3.0);
        assert!((rabi_splitting(1.5, &cav(1.0, 4)) - 18.25f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn resonant_pair_is_symmetric() {
        let p = dressed_pair(0.0, &cav(1.0, 1), 1.0);
        assert_eq!((p.e_plus, p.e_minus), (1.0, -1.0));
        assert!((p.gamma_plus - 0.5).abs() < 1e-15 && (p.gamma_minus - 0.5).abs() < 1e-15);
        assert!(!p.two_level_limit);
    }

    #[test]
    fn vacuum_is_two_level() {
        let p = dressed_pair(2.0, &cav(1.0, 0), 1.0);
        assert!(p.two_level_limit);
        assert_eq!(p.gamma_plus, 1.0);
        assert_eq!(p.e_plus, 0.0);
    }

    #[test]
    fn against_jacobi_solver() {
        for &(da, l, n) in &[(3.0, 1.0, 1u32), (-2.0, 0.5, 4), (0.3, 1.7, 9), (25.0, 1.0, 1)] {
            let c = cav(l, n);
            let g = c.coupling();
            let p = dressed_pair(da, &c, 1.0);
            let (mut e, _) = jacobi(0.0, g, -da);
            e.sort_by(f64::total_cmp);
            let ours = p.energies();
            assert!((ours[0] - e[0]).abs() < 1e-12 && (ours[1] - e[1]).abs() < 1e-12);
        }
        // Δ_a = 3, n = 1, λ = 1 → (−3 ± √13)/2 in this frame.
        let p = dressed_pair(3.0, &cav(1.0, 1), 1.0);
        let r = 13f64.sqrt();
        assert!((p.e_plus - (-3.0 + r) / 2.0).abs() < 1e-12);
        assert!((p.e_minus - (-3.0 - r) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn pair_invariants() {
        for &(da, l, n) in &[(3.0, 1.0, 1u32), (-2.0, 0.5, 4), (0.0, 1.0, 2), (1e-9, 1.0, 1)] {
            let c = cav(l, n);
            let p = dressed_pair(da, &c, 0.8);
            let diff = p.e_plus - p.e_minus;
            let expected = if da >= 0.0 { p.omega_n } else { -p.omega_n };
            assert!((diff - expected).abs() < 1e-12);
            let dot = p.c_plus[0] * p.c_minus[0] + p.c_plus[1] * p.c_minus[1];
            assert!(dot.abs() < 1e-12);
            for v in [p.c_plus, p.c_minus] {
                assert!((v[0].hypot(v[1]) - 1.0).abs() < 1e-12);
            }
            assert!((p.gamma_plus + p.gamma_minus - 0.8).abs() < 1e-12);
            // Eigen-equation residual of the block.
            let g = c.coupling();
            for (e, v) in [(p.e_plus, p.c_plus), (p.e_minus, p.c_minus)] {
                assert!((g * v[1] - e * v[0]).abs() < 1e-12);
                assert!((g * v[0] - da * v[1] - e * v[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pole_roots_are_dressed_energies() {
        for &(da, l, n) in &[(1.5, 1.0, 1u32), (-4.0, 0.2, 3), (10.0, 2.0, 20)] {
            let c = cav(l, n);
            let p = dressed_pair(da, &c, 1.0);
            let sp = special_points(da, &c);
            let e = p.energies();
            assert!((sp.pole_roots[0] - e[0]).abs() < 1e-12);
            assert!((sp.pole_roots[1] - e[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn large_detuning_values() {
        let a = large_detuning_approx(4.0, &cav(1.0, 1), 1.0).unwrap();
        assert!((a.gamma_plus - 16.0 / 17.0).abs() < 1e-15);
        assert!((a.gamma_minus - 4.0 / 17.0).abs() < 1e-15);
        assert_eq!(a.mixing, 0.25);
        assert_eq!(large_detuning_approx(0.0, &cav(1.0, 1), 1.0), Err(DressedError::Resonance));
        assert!(large_detuning_approx(-1.0, &cav(1.0, 1), 1.0).is_err());
        let far = large_detuning_approx(1e8, &cav(1.0, 1), 1.0).unwrap();
        assert!((far.gamma_plus - 1.0).abs() < 1e-12 && far.gamma_minus < 1e-7);
        // The |2,n⟩-like linewidth agrees with exact diagonalization.
        let exact = dressed_pair(10.0, &cav(1.0, 1), 1.0);
        let a = large_detuning_approx(10.0, &cav(1.0, 1), 1.0).unwrap();
        assert!((a.gamma_plus - exact.gamma_plus).abs() / exact.gamma_plus < 0.02);
    }

    fn spectrum(da: f64, n: u32, lo: f64, hi: f64, points: usize) -> (Vec<f64>, Vec<f64>) {
        let cpl = CouplingMatrix::reference_chiral();
        let c = cav(1.0, n);
        let x: Vec<f64> = (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
        let y = x
            .iter()
            .map(|&dk| {
                let p = ScatterPoint::from_detunings(dk, da);
                four_port(&p, &c, &cpl, PortLabel::RA).probabilities().t_p
            })
            .collect();
        (x, y)
    }

    #[test]
    fn vacuum_spectrum_has_one_valley() {
        let (x, y) = spectrum(3.0, 0, -6.0, 6.0, 801);
        let v = extract_valley_widths(&x, &y);
        assert_eq!(v.len(), 1);
        assert!(v[0].center.abs() < 1e-12);
        // With γ_pg = γ/2, T_p = Δ²/(Δ² + γ²/4): half depth at Δ = ±γ/2.
        assert!((v[0].fwhm.unwrap() - 1.0).abs() < 1e-3);
        assert!(v[0].is_resolved());
    }

    #[test]
    fn driven_spectrum_has_two_valleys() {
        let (x, y) = spectrum(1.5, 1, -6.0, 6.0, 4001);
        let v = extract_valley_widths(&x, &y);
        assert_eq!(v.len(), 2);
        let sp = special_points(1.5, &cav(1.0, 1));
        for (valley, root) in v.iter().zip(sp.pole_roots) {
            assert!((valley.center - root).abs() < 4e-3);
            assert!(valley.minimum < 1e-4);
        }
        assert!(v[0].fwhm.unwrap() < v[1].fwhm.unwrap());
    }

    #[test]
    fn boundary_valley_is_truncated() {
        let (x, y) = spectrum(0.0, 0, 0.1, 6.0, 200);
        let v = extract_valley_widths(&x, &y);
        assert_eq!(v.len(), 1);
        assert!(v[0].truncated && v[0].fwhm.is_none());
        assert!(v[0].csv_row().contains("nan"));
    }

    #[test]
    fn flat_and_plateau_inputs() {
        assert!(extract_valley_widths(&[0.0, 1.0, 2.0], &[1.0, 1.0, 1.0]).is_empty());
        let x = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [1.0, 0.4, 0.2, 0.2, 0.4, 1.0];
        let v = extract_valley_widths(&x, &y);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].center, 2.5);
        // Half depth 0.6: crossings at 2/3 and 13/3.
        assert!((v[0].fwhm.unwrap() - 11.0 / 3.0).abs() < 1e-12);
    }
}

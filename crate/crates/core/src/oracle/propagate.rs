//! Two independent propagators for the single-excitation Hamiltonian.
//!
//! [`EigenPropagator`] diagonalizes the dense matrix once and applies
//! e^{−iHt} in the eigenbasis; it is the default. [`chebyshev_propagate`]
//! steps the sparse arrowhead matrix with a Chebyshev expansion of the
//! propagator and never forms the dense matrix.

use num_complex::Complex64;

use super::{OracleError, OracleHamiltonian, SingleExcitationState};

/// Largest tolerated change of the state norm.
pub const NORM_TOLERANCE: f64 = 1e-8;

fn check_norm(before: f64, after: f64) -> Result<(), OracleError> {
    let drift = (after - before).abs();
    if drift > NORM_TOLERANCE || !drift.is_finite() {
        return Err(OracleError::NormDrift { drift });
    }
    Ok(())
}

/// Dense eigendecomposition H = V·diag(E)·Vᵀ.
pub struct EigenPropagator {
    dim: usize,
    energies: Vec<f64>,
    /// Column-major eigenvectors.
    vectors: Vec<f64>,
}

impl EigenPropagator {
    pub fn new(ham: &OracleHamiltonian) -> Result<Self, OracleError> {
        let dense = ham.dense();
        let dim = dense.nrows();
        let eig =
            dense.self_adjoint_eigen(faer::Side::Lower).map_err(|e| OracleError::Eigen(format!("{e:?}")))?;
        let s = eig.S();
        let u = eig.U();
        let energies = (0..dim).map(|j| s[j]).collect();
        let mut vectors = Vec::with_capacity(dim * dim);
        for j in 0..dim {
            for i in 0..dim {
                vectors.push(u[(i, j)]);
            }
        }
        Ok(Self { dim, energies, vectors })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    fn column(&self, j: usize) -> &[f64] {
        &self.vectors[j * self.dim..(j + 1) * self.dim]
    }

    /// Coordinates Vᵀψ of a state in the eigenbasis.
    pub fn to_eigenbasis(&self, psi: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(psi.len(), self.dim);
        (0..self.dim)
            .map(|j| self.column(j).iter().zip(psi).fold(Complex64::new(0.0, 0.0), |acc, (v, p)| acc + p * v))
            .collect()
    }

    /// One component of the state at time `t`, from eigenbasis coordinates.
    pub fn component_at(&self, coords: &[Complex64], index: usize, t: f64) -> Complex64 {
        (0..self.dim)
            .map(|j| coords[j] * Complex64::from_polar(1.0, -self.energies[j] * t) * self.column(j)[index])
            .sum()
    }

    fn evolve_coords(&self, coords: &[Complex64], t: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for (j, c) in coords.iter().enumerate() {
            let a = c * Complex64::from_polar(1.0, -self.energies[j] * t);
            for (o, v) in out.iter_mut().zip(self.column(j)) {
                *o += a * v;
            }
        }
        out
    }

    pub fn propagate(
        &self,
        state: &SingleExcitationState,
        t: f64,
    ) -> Result<SingleExcitationState, OracleError> {
        let psi = state.to_vector();
        let out = self.evolve_coords(&self.to_eigenbasis(&psi), t);
        let next = SingleExcitationState::from_vector(out);
        check_norm(state.norm_sq(), next.norm_sq())?;
        Ok(next)
    }
}

/// Bessel functions J_0..=J_order at x ≥ 0 by Miller's backward recurrence.
pub fn bessel_j_sequence(x: f64, order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = order.max(x.ceil() as usize) + 30 + (x.sqrt() * 4.0) as usize;
    let start = start + start % 2;
    let mut next = 0.0;
    let mut cur = 1e-300;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        // `cur` now holds J_{k−1}.
        let idx = k - 1;
        if idx <= order {
            out[idx] = cur;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    norm += cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// Largest a·dt per Chebyshev step.
const STEP_SPAN: f64 = 40.0;

/// Propagates with a stepwise Chebyshev expansion on the sparse matrix.
pub fn chebyshev_propagate(
    ham: &OracleHamiltonian,
    state: &SingleExcitationState,
    t: f64,
) -> Result<SingleExcitationState, OracleError> {
    let (lo, hi) = ham.spectral_bounds();
    let center = 0.5 * (hi + lo);
    let half = 0.5 * (hi - lo) * 1.01 + 1e-12;
    let steps = ((half * t.abs()) / STEP_SPAN).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let x = half * dt.abs();
    let order = x.ceil() as usize + 40;
    let bessel = bessel_j_sequence(x, order);
    let last = bessel.iter().rposition(|j| j.abs() > 1e-18).unwrap_or(0);
    let sign = dt.signum();
    // (−i·sign)^k cycles through four values.
    let powers = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -sign),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, sign),
    ];
    let global = Complex64::from_polar(1.0, -center * dt);

    let dim = ham.dim();
    let mut psi = state.to_vector();
    let mut t_prev = vec![Complex64::new(0.0, 0.0); dim];
    let mut t_cur = vec![Complex64::new(0.0, 0.0); dim];
    let mut t_next = vec![Complex64::new(0.0, 0.0); dim];
    let mut acc = vec![Complex64::new(0.0, 0.0); dim];
    let scaled = |src: &[Complex64], dst: &mut [Complex64]| {
        ham.apply(src, dst);
        for (d, s) in dst.iter_mut().zip(src) {
            *d = (*d - s * center) / half;
        }
    };
    for _ in 0..steps {
        t_prev.copy_from_slice(&psi);
        scaled(&t_prev, &mut t_cur);
        for i in 0..dim {
            acc[i] = t_prev[i] * bessel[0] + t_cur[i] * (powers[1] * 2.0 * bessel[1]);
        }
        for k in 2..=last {
            scaled(&t_cur, &mut t_next);
            let coef = powers[k % 4] * (2.0 * bessel[k]);
            for i in 0..dim {
                t_next[i] = t_next[i] * 2.0 - t_prev[i];
                acc[i] += t_next[i] * coef;
            }
            std::mem::swap(&mut t_prev, &mut t_cur);
            std::mem::swap(&mut t_cur, &mut t_next);
        }
        for (p, a) in psi.iter_mut().zip(&acc) {
            *p = a * global;
        }
    }
    let next = SingleExcitationState::from_vector(psi);
    check_norm(state.norm_sq(), next.norm_sq())?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_reference_values() {
        let j = bessel_j_sequence(1.0, 3);
        assert!((j[0] - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((j[1] - 0.440_050_585_744_933_5).abs() < 1e-14);
        assert!((j[2] - 0.114_903_484_931_900_5).abs() < 1e-14);
        let j = bessel_j_sequence(10.0, 12);
        assert!((j[0] - (-0.245_935_764_451_348_3)).abs() < 1e-13);
        assert!((j[10] - 0.207_486_106_633_358_8).abs() < 1e-13);
        let j = bessel_j_sequence(40.0, 80);
        let sum: f64 = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
        assert!((sum - 1.0).abs() < 1e-13);
        assert_eq!(bessel_j_sequence(0.0, 2), vec![1.0, 0.0, 0.0]);
    }
}

//! Preset dataset groups for the standard transmission and routing plots.
//!
//! Every preset uses the chiral reference couplings
//! (γ_Ra, γ_La, γ_Rb, γ_Lb) = (0.5, 0.3, 0.1, 0.1)γ, λ = γ and input port Ra.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{
    map_2d, overlays, photon_number_scan, spectrum_1d, write_data, write_table, Axis, AxisSpec, DataFile,
    Format, GridSpec, Metadata, Quantity, SweepError,
};
use crate::dressed::{extract_valley_widths, Valley};
use crate::model::{validate_detuned, CavityParams, CouplingMatrix, PortLabel, ValidatedSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    /// T_p, R_p and T maps over Δ_k^n × Δ_a with n = 1.
    Fig2,
    /// Spectra at Δ_a ∈ {0, 1.5, 4}, n = 1.
    Fig4a,
    /// T_p against Δ_a at Δ_k^n = 0, n ∈ {0, 1}.
    Fig4b,
    /// Spectra at large Δ_a = 10 for n ∈ {0, 1}.
    Fig4c,
    /// Spectra at Δ_a = λ for n ∈ {0, 1, 20}.
    Fig5a,
    /// T_p(n) at Δ_k^n = 0 for Δ_a ∈ {1, 5, 10}.
    Fig5b,
}

impl FigureId {
    pub const ALL: [FigureId; 6] =
        [FigureId::Fig2, FigureId::Fig4a, FigureId::Fig4b, FigureId::Fig4c, FigureId::Fig5a, FigureId::Fig5b];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig4a => "fig4a",
            FigureId::Fig4b => "fig4b",
            FigureId::Fig4c => "fig4c",
            FigureId::Fig5a => "fig5a",
            FigureId::Fig5b => "fig5b",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s.to_ascii_lowercase())
            .ok_or_else(|| SweepError::UnknownFigure(s.to_string()))
    }
}

/// Largest n in the photon-number scan.
pub const FIG5B_MAX_N: u32 = 100;
/// Δ_a used for the decoupling comparison.
pub const FIG4C_DETUNING: f64 = 10.0;

fn reference(n: u32, detuning_a: f64) -> Result<ValidatedSystem, SweepError> {
    Ok(validate_detuned(CouplingMatrix::reference_chiral(), CavityParams::new(1.0, n)?, detuning_a)?)
}

fn tag(meta: &mut Metadata, id: FigureId) {
    meta.push("figure", id);
}

fn spectrum_over_k(id: FigureId, n: u32, detuning_a: f64) -> Result<super::SweepTable, SweepError> {
    let spec = GridSpec::new(
        vec![AxisSpec::default_1d(Axis::DeltaK, 1.0)],
        reference(n, detuning_a)?,
        PortLabel::RA,
    )?;
    let mut table = spectrum_1d(&spec)?;
    tag(&mut table.metadata, id);
    Ok(table)
}

/// Writes every data file of `id` into `dir`; returns the paths written,
/// sidecars included.
pub fn reproduce_figure(id: FigureId, dir: &Path, format: Format) -> Result<Vec<PathBuf>, SweepError> {
    let mut written = Vec::new();
    match id {
        FigureId::Fig2 => {
            let kx = AxisSpec::default_2d(Axis::DeltaK, 1.0);
            let ay = AxisSpec::default_2d(Axis::DeltaA, 1.0);
            let spec = GridSpec::new(vec![kx, ay], reference(1, 0.0)?, PortLabel::RA)?;
            let mut table = map_2d(&spec)?;
            tag(&mut table.metadata, id);
            for (name, q) in [
                ("fig2a_transmission", Quantity::Tp),
                ("fig2b_reflection", Quantity::Rp),
                ("fig2c_transfer", Quantity::T),
            ] {
                written.extend(write_table(&table, dir, name, format, &[q])?);
            }
            let o = overlays(&ay, &spec.system.cavity);
            let mut pit = DataFile::new(&["Delta_a", "Delta_k"]);
            pit.rows = o.pit_line.iter().map(|r| r.to_vec()).collect();
            let mut meta = table.metadata.clone();
            meta.push("curve", "Delta_k + Delta_a = 0");
            written.extend(write_data(dir, "fig2_pit_line", format, &pit, &meta)?);
            let mut poles = DataFile::new(&["Delta_a", "Delta_k_lower", "Delta_k_upper"]);
            poles.rows = o.pole_curves.iter().map(|r| r.to_vec()).collect();
            let mut meta = table.metadata.clone();
            meta.push("curve", "Delta_k (Delta_k + Delta_a) = n lambda^2");
            written.extend(write_data(dir, "fig2_pole_curves", format, &poles, &meta)?);
        }
        FigureId::Fig4a => {
            let mut valleys = DataFile::new(&["Delta_a", "center", "fwhm", "depth"]);
            for da in [0.0, 1.5, 4.0] {
                let table = spectrum_over_k(id, 1, da)?;
                let x = table.axis(0);
                let y = table.column(Quantity::Tp);
                for v in extract_valley_widths(&x, &y) {
                    valleys.rows.push(valley_row(da, &v));
                }
                let name = format!("fig4a_Delta_a_{da}");
                written.extend(write_table(&table, dir, &name, format, &Quantity::ALL)?);
            }
            let mut meta = Metadata::for_system(&reference(1, 0.0)?);
            meta.remove("Delta_a");
            tag(&mut meta, id);
            meta.push("source", "half-depth widths of the fig4a spectra");
            written.extend(write_data(dir, "fig4a_valleys", format, &valleys, &meta)?);
        }
        FigureId::Fig4b => {
            for n in [0, 1] {
                let axis = AxisSpec::new(Axis::DeltaA, 0.0, 10.0, 801)?;
                let spec = GridSpec::new(vec![axis], reference(n, 0.0)?, PortLabel::RA)?;
                let mut table = spectrum_1d(&spec)?;
                tag(&mut table.metadata, id);
                written.extend(write_table(&table, dir, &format!("fig4b_n{n}"), format, &Quantity::ALL)?);
            }
        }
        FigureId::Fig4c => {
            for n in [0, 1] {
                let table = spectrum_over_k(id, n, FIG4C_DETUNING)?;
                written.extend(write_table(&table, dir, &format!("fig4c_n{n}"), format, &Quantity::ALL)?);
            }
        }
        FigureId::Fig5a => {
            for n in [0, 1, 20] {
                let table = spectrum_over_k(id, n, 1.0)?;
                written.extend(write_table(&table, dir, &format!("fig5a_n{n}"), format, &Quantity::ALL)?);
            }
        }
        FigureId::Fig5b => {
            for da in [1.0, 5.0, 10.0] {
                let mut table =
                    photon_number_scan(&reference(0, da)?, (0, FIG5B_MAX_N), 0.0, &[da], PortLabel::RA)?;
                tag(&mut table.metadata, id);
                let name = format!("fig5b_Delta_a_{da}");
                written.extend(write_table(&table, dir, &name, format, &Quantity::ALL)?);
            }
        }
    }
    Ok(written)
}

fn valley_row(detuning_a: f64, v: &Valley) -> Vec<f64> {
    vec![detuning_a, v.center, v.fwhm.unwrap_or(f64::NAN), v.depth]
}

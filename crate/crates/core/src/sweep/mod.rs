//! Closed-form evaluation over parameter grids.
//!
//! Grid rows are evaluated in parallel and gathered by index, so a table is
//! bit-identical for any number of worker threads.

mod figures;
mod output;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::{CavityParams, PortLabel, ScatterPoint, ValidatedSystem, ValidationError};
use crate::scattering::{even_transmission, four_port, special_points, Probabilities};

pub use figures::{reproduce_figure, FigureId};
pub use output::{
    fmt_num, write_data, write_meta, write_table, DataFile, Format, Metadata, OutputError, Quantity,
};

/// Largest tolerated |T_p + R_p + T_p̄ + R_p̄ − 1| and ||t_{k,e}| − 1|.
pub const CONSERVATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("axis {axis}: {reason}")]
    BadAxis { axis: &'static str, reason: String },
    #[error("a grid needs one or two axes, got {0}")]
    AxisCount(usize),
    #[error("this sweep needs axes {expected}, got {got}")]
    WrongAxes { expected: &'static str, got: String },
    #[error("unknown figure id {0:?} (known: fig2, fig4a, fig4b, fig4c, fig5a, fig5b)")]
    UnknownFigure(String),
    #[error("photon number range {0}..={1} is empty")]
    EmptyPhotonRange(u32, u32),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error(transparent)]
    Output(#[from] OutputError),
}

/// A swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    /// Δ_k^n, identical to vk − ω_2.
    DeltaK,
    DeltaA,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::DeltaK => "Delta_k",
            Axis::DeltaA => "Delta_a",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Delta_k" | "delta_k" | "vk-omega_2" => Ok(Axis::DeltaK),
            "Delta_a" | "delta_a" => Ok(Axis::DeltaA),
            _ => Err(format!("unknown axis {s:?} (expected Delta_k or Delta_a)")),
        }
    }
}

/// Evenly spaced samples of one axis, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisSpec {
    pub axis: Axis,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl AxisSpec {
    pub fn new(axis: Axis, min: f64, max: f64, points: usize) -> Result<Self, SweepError> {
        let bad = |reason: String| SweepError::BadAxis { axis: axis.name(), reason };
        if !(min.is_finite() && max.is_finite()) {
            return Err(bad(format!("bounds must be finite, got [{min}, {max}]")));
        }
        if min >= max {
            return Err(bad(format!("min {min} must be below max {max}")));
        }
        if points < 2 {
            return Err(bad(format!("needs at least 2 points, got {points}")));
        }
        Ok(Self { axis, min, max, points })
    }

    /// Default spectrum axis: 801 points over [−6γ, 6γ].
    pub fn default_1d(axis: Axis, gamma: f64) -> Self {
        Self { axis, min: -6.0 * gamma, max: 6.0 * gamma, points: 801 }
    }

    /// Default map axis: 401 points over [−6γ, 6γ].
    pub fn default_2d(axis: Axis, gamma: f64) -> Self {
        Self { axis, min: -6.0 * gamma, max: 6.0 * gamma, points: 401 }
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            return self.max;
        }
        self.min + (self.max - self.min) * i as f64 / (self.points - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.value(i)).collect()
    }
}

/// Axes plus every parameter held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub axes: Vec<AxisSpec>,
    pub system: ValidatedSystem,
    /// Δ_k^n when it is not swept.
    pub detuning_k: f64,
    pub port: PortLabel,
}

impl GridSpec {
    pub fn new(axes: Vec<AxisSpec>, system: ValidatedSystem, port: PortLabel) -> Result<Self, SweepError> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(SweepError::AxisCount(axes.len()));
        }
        if axes.len() == 2 && axes[0].axis == axes[1].axis {
            return Err(SweepError::BadAxis { axis: axes[0].axis.name(), reason: "swept twice".into() });
        }
        Ok(Self { axes, system, detuning_k: 0.0, port })
    }

    pub fn with_detuning_k(mut self, detuning_k: f64) -> Self {
        self.detuning_k = detuning_k;
        self
    }

    fn point(&self, values: &[f64]) -> ScatterPoint {
        let mut dk = self.detuning_k;
        let mut da = self.system.detuning_a;
        for (spec, v) in self.axes.iter().zip(values) {
            match spec.axis {
                Axis::DeltaK => dk = *v,
                Axis::DeltaA => da = *v,
            }
        }
        ScatterPoint::from_detunings(dk, da)
    }

    fn axis_names(&self) -> String {
        self.axes.iter().map(|a| a.axis.name()).collect::<Vec<_>>().join(" x ")
    }

    /// Parameter provenance for sidecar files.
    pub fn metadata(&self) -> Metadata {
        let mut meta = Metadata::for_system(&self.system);
        for spec in &self.axes {
            meta.push(
                format!("axis.{}", spec.axis.name()),
                format!("{} {} {}", spec.min, spec.max, spec.points),
            );
        }
        if !self.axes.iter().any(|a| a.axis == Axis::DeltaK) {
            meta.push("Delta_k", self.detuning_k);
        }
        meta.push("port", self.port);
        meta
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Row {
    pub axes: [f64; 2],
    pub probs: Probabilities,
}

/// Ordered rows plus their provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axis_names: Vec<&'static str>,
    pub rows: Vec<Row>,
    pub metadata: Metadata,
}

impl SweepTable {
    pub fn column(&self, q: Quantity) -> Vec<f64> {
        self.rows.iter().map(|r| q.pick(&r.probs)).collect()
    }

    pub fn axis(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.axes[i]).collect()
    }

    /// Largest deviation from flux conservation over all rows.
    pub fn conservation_defect(&self) -> f64 {
        self.rows.iter().map(|r| (r.probs.total() - 1.0).abs()).fold(0.0, f64::max)
    }
}

fn evaluate(spec: &GridSpec, point: &ScatterPoint, cavity: &CavityParams) -> Probabilities {
    let probs = four_port(point, cavity, &spec.system.couplings, spec.port).probabilities();
    if cfg!(debug_assertions) {
        let t = even_transmission(point, cavity, spec.system.gamma());
        debug_assert!(
            (probs.total() - 1.0).abs() < CONSERVATION_TOLERANCE,
            "flux not conserved at {point:?}: {}",
            probs.total()
        );
        debug_assert!((t.norm() - 1.0).abs() < CONSERVATION_TOLERANCE, "|t_e| = {} at {point:?}", t.norm());
    }
    probs
}

/// Evaluates every grid point. The outer (last) axis is distributed over
/// workers; rows come back in index order.
pub fn evaluate_grid(spec: &GridSpec) -> SweepTable {
    let inner = spec.axes[0];
    let outer = spec.axes.get(1).copied();
    let cavity = spec.system.cavity;
    let rows_for = |j: Option<usize>| -> Vec<Row> {
        let y = j.map(|j| outer.expect("outer axis").value(j));
        (0..inner.points)
            .map(|i| {
                let x = inner.value(i);
                let values = [x, y.unwrap_or(0.0)];
                let point = spec.point(&values[..spec.axes.len()]);
                Row { axes: values, probs: evaluate(spec, &point, &cavity) }
            })
            .collect()
    };
    let rows: Vec<Row> = match outer {
        None => rows_for(None),
        Some(o) => crate::parallel::install(|| {
            (0..o.points)
                .into_par_iter()
                .map(|j| rows_for(Some(j)))
                .collect::<Vec<_>>()
                .into_iter()
                .flatten()
                .collect()
        }),
    };
    SweepTable {
        axis_names: spec.axes.iter().map(|a| a.axis.name()).collect(),
        rows,
        metadata: spec.metadata(),
    }
}

/// Spectrum along Δ_k^n (or along Δ_a at fixed Δ_k^n).
pub fn spectrum_1d(spec: &GridSpec) -> Result<SweepTable, SweepError> {
    if spec.axes.len() != 1 {
        return Err(SweepError::WrongAxes { expected: "one axis", got: spec.axis_names() });
    }
    Ok(evaluate_grid(spec))
}

/// Δ_k^n × Δ_a map, Δ_k^n varying fastest.
pub fn map_2d(spec: &GridSpec) -> Result<SweepTable, SweepError> {
    let ok = spec.axes.len() == 2 && spec.axes[0].axis == Axis::DeltaK && spec.axes[1].axis == Axis::DeltaA;
    if !ok {
        return Err(SweepError::WrongAxes { expected: "Delta_k x Delta_a", got: spec.axis_names() });
    }
    Ok(evaluate_grid(spec))
}

/// Analytic curves drawn over a Δ_k^n × Δ_a map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Overlays {
    /// (Δ_a, Δ_k^n = −Δ_a).
    pub pit_line: Vec<[f64; 2]>,
    /// (Δ_a, lower root, upper root).
    pub pole_curves: Vec<[f64; 3]>,
}

pub fn overlays(detuning_a: &AxisSpec, cavity: &CavityParams) -> Overlays {
    let values = detuning_a.values();
    Overlays {
        pit_line: values.iter().map(|&da| [da, special_points(da, cavity).pit_line]).collect(),
        pole_curves: values
            .iter()
            .map(|&da| {
                let r = special_points(da, cavity).pole_roots;
                [da, r[0], r[1]]
            })
            .collect(),
    }
}

/// T_p(n) at fixed Δ_k^n for each Δ_a. Rows are ordered by Δ_a, then n;
/// the axis columns are `n` and `Delta_a`.
pub fn photon_number_scan(
    system: &ValidatedSystem,
    n_range: (u32, u32),
    detuning_k: f64,
    detunings_a: &[f64],
    port: PortLabel,
) -> Result<SweepTable, SweepError> {
    let (lo, hi) = n_range;
    if lo > hi {
        return Err(SweepError::EmptyPhotonRange(lo, hi));
    }
    let spec = GridSpec { axes: Vec::new(), system: system.clone(), detuning_k, port };
    let rows = crate::parallel::install(|| {
        detunings_a
            .par_iter()
            .map(|&da| {
                (lo..=hi)
                    .map(|n| {
                        let cavity = system.cavity.with_photons(n);
                        let point = ScatterPoint::from_detunings(detuning_k, da);
                        Row { axes: [f64::from(n), da], probs: evaluate(&spec, &point, &cavity) }
                    })
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();

    let mut metadata = Metadata::for_system(system);
    metadata.push("axis.n", format!("{lo} {hi}"));
    metadata.push("axis.Delta_a", detunings_a.iter().map(f64::to_string).collect::<Vec<_>>().join(" "));
    metadata.push("Delta_k", detuning_k);
    metadata.push("port", port);
    Ok(SweepTable { axis_names: vec!["n", "Delta_a"], rows, metadata })
}

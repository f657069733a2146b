//! Flat `key = value` parameter files.
//!
//! ```text
//! # reference chiral couplings
//! gamma_ar = 0.5
//! gamma_al = 0.3
//! gamma_br = 0.1
//! gamma_bl = 0.1
//! lambda = 1
//! n = 1
//! Delta_a = 1.5
//! ```
//!
//! A file either gives all of `omega_2, omega_3, omega_a` or gives `Delta_a`.
//! Missing couplings, `lambda` and `n` fall back to the reference chiral set
//! with λ = γ and n = 1; a file with no frequency keys gets Δ_a = 0.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use super::{
    validate_detuned, validate_system, CavityParams, CouplingMatrix, EmitterParams, ValidatedSystem,
    ValidationError,
};

/// Every key accepted in config files and `--set` overrides.
pub const KEYS: [&str; 10] = [
    "gamma_ar", "gamma_al", "gamma_br", "gamma_bl", "omega_2", "omega_3", "omega_a", "lambda", "n", "Delta_a",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown key {key:?} (known keys: {})", KEYS.join(", "))]
    UnknownKey { key: String },
    #[error("line {line}: duplicate key {key:?}")]
    Duplicate { line: usize, key: String },
    #[error("invalid number for {key}: {value:?}")]
    BadNumber { key: String, value: String },
    #[error("override {0:?} is not of the form key=value")]
    BadOverride(String),
    #[error("absolute frequencies incomplete: missing {0}")]
    MissingFrequency(&'static str),
    #[error("Delta_a conflicts with absolute frequencies omega_2/omega_3/omega_a; give one style only")]
    MixedFrequencyStyles,
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

/// How raw numbers are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnitMode {
    /// Rates are rescaled so γ = 1; every frequency is read in units of γ.
    #[default]
    Gamma,
    /// Numbers are used as given.
    Absolute,
}

/// Raw key-value parameters, before validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParameterSet {
    values: BTreeMap<&'static str, f64>,
}

fn known_key(key: &str) -> Option<&'static str> {
    KEYS.iter().copied().find(|k| *k == key)
}

fn parse_value(key: &str, value: &str) -> Result<f64, ConfigError> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| ConfigError::BadNumber { key: key.to_string(), value: value.trim().to_string() })
}

impl ParameterSet {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut set = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax { line: idx + 1, text: raw.to_string() });
            };
            let key = key.trim();
            let k = known_key(key).ok_or_else(|| ConfigError::UnknownKey { key: key.into() })?;
            if set.values.contains_key(k) {
                return Err(ConfigError::Duplicate { line: idx + 1, key: key.into() });
            }
            set.values.insert(k, parse_value(key, value)?);
        }
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        known_key(key).and_then(|k| self.values.get(k).copied())
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<(), ConfigError> {
        let k = known_key(key).ok_or_else(|| ConfigError::UnknownKey { key: key.into() })?;
        self.values.insert(k, value);
        Ok(())
    }

    /// Applies one `key=value` override; unknown keys are an error.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let (key, value) = spec.split_once('=').ok_or_else(|| ConfigError::BadOverride(spec.to_string()))?;
        let key = key.trim();
        if known_key(key).is_none() {
            return Err(ConfigError::UnknownKey { key: key.into() });
        }
        let v = parse_value(key, value)?;
        if key == "Delta_a" {
            for k in ["omega_2", "omega_3", "omega_a"] {
                self.values.remove(k);
            }
        } else if matches!(key, "omega_2" | "omega_3" | "omega_a") {
            self.values.remove("Delta_a");
        }
        self.set(key, v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        self.values.iter().map(|(k, v)| (*k, *v))
    }

    pub fn is_absolute(&self) -> bool {
        ["omega_2", "omega_3", "omega_a"].iter().any(|k| self.values.contains_key(k))
    }

    /// Validates the set, filling defaults for missing keys.
    pub fn to_system(&self, units: UnitMode) -> Result<ValidatedSystem, ConfigError> {
        let reference = CouplingMatrix::reference_chiral();
        let get = |k: &str, default: f64| self.get(k).unwrap_or(default);
        let mut couplings = CouplingMatrix::new(
            get("gamma_ar", reference.gamma_ar()),
            get("gamma_al", reference.gamma_al()),
            get("gamma_br", reference.gamma_br()),
            get("gamma_bl", reference.gamma_bl()),
        )?;
        if units == UnitMode::Gamma {
            couplings = couplings.normalized();
        }
        let cavity = CavityParams::from_real_n(get("lambda", 1.0), get("n", 1.0))?;

        if self.is_absolute() {
            if self.values.contains_key("Delta_a") {
                return Err(ConfigError::MixedFrequencyStyles);
            }
            let need = |k: &'static str| self.get(k).ok_or(ConfigError::MissingFrequency(k));
            let emitter = EmitterParams::new(need("omega_2")?, need("omega_3")?)?;
            let cavity = cavity.with_frequency(need("omega_a")?)?;
            Ok(validate_system(couplings, emitter, cavity)?)
        } else {
            Ok(validate_detuned(couplings, cavity, get("Delta_a", 0.0))?)
        }
    }
}

impl fmt::Display for ParameterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.values {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let set = ParameterSet::parse(
            "# header\n\ngamma_ar = 0.5 # trailing\ngamma_al=0.3\n  n = 2\nDelta_a = -1.5\n",
        )
        .unwrap();
        assert_eq!(set.get("gamma_ar"), Some(0.5));
        assert_eq!(set.get("n"), Some(2.0));
        let sys = set.to_system(UnitMode::Absolute).unwrap();
        assert_eq!(sys.detuning_a, -1.5);
        assert_eq!(sys.cavity.n(), 2);
        assert!(sys.emitter.is_none());
    }

    #[test]
    fn absolute_config() {
        let set = ParameterSet::parse(
            "gamma_ar=0.25\ngamma_al=0.25\ngamma_br=0.25\ngamma_bl=0.25\n\
             omega_2=100\nomega_3=200\nomega_a=100\nlambda=1\nn=1\n",
        )
        .unwrap();
        let sys = set.to_system(UnitMode::Absolute).unwrap();
        assert_eq!(sys.detuning_a, 0.0);
        assert_eq!(sys.emitter.unwrap().omega_32(), 100.0);
    }

    #[test]
    fn rejects_unknown_duplicate_and_malformed() {
        assert!(matches!(ParameterSet::parse("gamma = 1"), Err(ConfigError::UnknownKey { .. })));
        assert!(matches!(ParameterSet::parse("n = 1\nn = 2"), Err(ConfigError::Duplicate { line: 2, .. })));
        assert!(matches!(ParameterSet::parse("n 1"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(ParameterSet::parse("n = one"), Err(ConfigError::BadNumber { .. })));
        let mut set = ParameterSet::default();
        assert!(matches!(set.apply_override("Delta=1"), Err(ConfigError::UnknownKey { .. })));
        assert!(matches!(set.apply_override("n"), Err(ConfigError::BadOverride(_))));
    }

    #[test]
    fn validation_errors_surface() {
        let set = ParameterSet::parse("n = 1.5").unwrap();
        assert!(matches!(
            set.to_system(UnitMode::Gamma),
            Err(ConfigError::Invalid(ValidationError::NonIntegerPhotonNumber(_)))
        ));
        let set = ParameterSet::parse("omega_2 = 1\nomega_3 = 3").unwrap();
        assert!(matches!(set.to_system(UnitMode::Gamma), Err(ConfigError::MissingFrequency("omega_a"))));
        let set = ParameterSet::parse("omega_2 = 1\nomega_3 = 3\nomega_a=2\nDelta_a=0").unwrap();
        assert!(matches!(set.to_system(UnitMode::Gamma), Err(ConfigError::MixedFrequencyStyles)));
    }

    #[test]
    fn gamma_units_normalize_rates() {
        let set = ParameterSet::parse("gamma_ar=2\ngamma_al=1\ngamma_br=0.5\ngamma_bl=0.5").unwrap();
        let sys = set.to_system(UnitMode::Gamma).unwrap();
        assert_eq!(sys.gamma(), 1.0);
        assert_eq!(sys.couplings.gamma_ar(), 0.5);
        let sys = set.to_system(UnitMode::Absolute).unwrap();
        assert_eq!(sys.gamma(), 4.0);
    }

    #[test]
    fn overrides_switch_frequency_style() {
        let mut set = ParameterSet::parse("omega_2=1\nomega_3=3\nomega_a=2").unwrap();
        set.apply_override("Delta_a=0.5").unwrap();
        assert!(!set.is_absolute());
        assert_eq!(set.to_system(UnitMode::Gamma).unwrap().detuning_a, 0.5);
        // Defaults: reference couplings, λ = 1, n = 1, Δ_a = 0.
        let sys = ParameterSet::default().to_system(UnitMode::Gamma).unwrap();
        assert_eq!(sys.couplings, CouplingMatrix::reference_chiral());
        assert_eq!((sys.cavity.lambda(), sys.cavity.n(), sys.detuning_a), (1.0, 1, 0.0));
    }
}

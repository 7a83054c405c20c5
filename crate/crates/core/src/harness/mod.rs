//! Experiment configs and the verification suites behind the `mdimlab` command.
//!
//! A run is fully determined by its [`ExperimentConfig`]: the same config gives a byte-identical
//! report. Suites that sample draw from `seed`; generators carry their own seeds.

mod analysis;
mod bounds;
mod machine_suite;
pub mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::complexity::BackendSpec;
use crate::error::{Error, Result};
use crate::functions::{ComputableFunction, FunctionSpec, ModulusSpec, SSelector};
use crate::machine::MachineConfig;
use crate::mutual_info::Window;
use crate::oracle::GeneratorSpec;

pub use report::{OutputFormat, Row, RowKind, SuiteReport};

/// Slack on dimension-scale comparisons.
pub const SLACK: f64 = 0.1;
/// Slack on two-sided equalities of slopes.
pub const TWO_SIDED_SLACK: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Machine,
    Kraft,
    Geometry,
    CodingBounds,
    KProfile,
    Mdim,
    Dpi,
    ReverseDpi,
    Conservation,
    Counterexample,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Machine,
        Suite::Kraft,
        Suite::Geometry,
        Suite::CodingBounds,
        Suite::KProfile,
        Suite::Mdim,
        Suite::Dpi,
        Suite::ReverseDpi,
        Suite::Conservation,
        Suite::Counterexample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Machine => "machine",
            Suite::Kraft => "kraft",
            Suite::Geometry => "geometry",
            Suite::CodingBounds => "coding-bounds",
            Suite::KProfile => "kprofile",
            Suite::Mdim => "mdim",
            Suite::Dpi => "dpi",
            Suite::ReverseDpi => "reverse-dpi",
            Suite::Conservation => "conservation",
            Suite::Counterexample => "counterexample",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
}

/// A library function with optional certificate overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionEntry {
    #[serde(flatten)]
    pub spec: FunctionSpec,
    /// Replaces the library's declared modulus.
    #[serde(default)]
    pub modulus: Option<ModulusSpec>,
    /// The argument set `S` (1-based) for reverse checks.
    #[serde(default)]
    pub select: Option<Vec<usize>>,
    /// Replaces the library's declared inverse modulus for `S`.
    #[serde(default)]
    pub inverse_modulus: Option<ModulusSpec>,
    /// The point filling the arguments outside `S`.
    #[serde(default)]
    pub z: Option<GeneratorSpec>,
}

/// A built function with its effective certificates.
#[derive(Debug, Clone)]
pub struct PreparedFunction {
    pub f: ComputableFunction,
    pub modulus: Option<ModulusSpec>,
    pub select: Option<SSelector>,
    pub inverse_modulus: Option<ModulusSpec>,
    pub z: Option<GeneratorSpec>,
}

impl FunctionEntry {
    pub fn new(spec: FunctionSpec) -> Self {
        FunctionEntry { spec, modulus: None, select: None, inverse_modulus: None, z: None }
    }

    pub fn prepare(&self) -> Result<PreparedFunction> {
        let mut f = self.spec.build()?;
        if let Some(m) = &self.modulus {
            m.validate()?;
            f = f.with_modulus(m.clone());
        }
        let select = self.select.as_ref().map(|s| SSelector::new(f.n(), s.clone())).transpose()?;
        let inverse_modulus = match (&self.inverse_modulus, &select) {
            (Some(m), _) => {
                m.validate()?;
                Some(m.clone())
            }
            (None, Some(sel)) => f.inverse_modulus_for(sel).cloned(),
            (None, None) => None,
        };
        if let (Some(sel), Some(z)) = (&select, &self.z) {
            let rest = f.n() - sel.size();
            if z.dimension() != rest {
                return Err(Error::ArityMismatch { expected: rest, got: z.dimension() });
            }
        }
        Ok(PreparedFunction { modulus: f.modulus().cloned(), f, select, inverse_modulus, z: self.z.clone() })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub suite: String,
    /// Machine for exact-backend suites; each suite has its own default.
    pub machine: Option<MachineConfig>,
    pub backend: BackendSpec,
    pub generators: Vec<GeneratorSpec>,
    pub functions: Vec<FunctionEntry>,
    /// Precision window for estimators; defaults to the backend's window.
    pub window: Option<Window>,
    pub seed: u64,
    pub output: OutputSpec,
    /// Suite-specific settings.
    pub params: serde_json::Value,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn suite(&self) -> Result<Suite> {
        self.suite.parse()
    }

    pub(crate) fn params<T: DeserializeOwned + Default>(&self) -> Result<T> {
        if self.params.is_null() {
            return Ok(T::default());
        }
        serde_json::from_value(self.params.clone())
            .map_err(|e| Error::InvalidConfig(format!("params for {}: {e}", self.suite)))
    }

    pub(crate) fn prepared_functions(&self) -> Result<Vec<PreparedFunction>> {
        self.functions.iter().map(FunctionEntry::prepare).collect()
    }
}

/// Runs the suite named in `cfg`.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    let suite = cfg.suite()?;
    let (rows, constants) = match suite {
        Suite::Machine => machine_suite::machine(cfg)?,
        Suite::Kraft => machine_suite::kraft(cfg)?,
        Suite::Geometry => machine_suite::geometry(cfg)?,
        Suite::CodingBounds => bounds::coding_bounds(cfg)?,
        Suite::KProfile => analysis::kprofile(cfg)?,
        Suite::Mdim => analysis::mdim(cfg)?,
        Suite::Dpi => analysis::dpi_verify(cfg)?,
        Suite::ReverseDpi => analysis::reverse_dpi_verify(cfg)?,
        Suite::Conservation => analysis::conservation_verify(cfg)?,
        Suite::Counterexample => analysis::counterexample_demo(cfg)?,
    };
    Ok(SuiteReport::new(suite.name(), rows, constants))
}

pub(crate) type Constants = BTreeMap<String, f64>;
pub(crate) type SuiteOutput = (Vec<Row>, Constants);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!(matches!("nope".parse::<Suite>(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn unknown_suite_is_invalid_config() {
        let cfg = ExperimentConfig { suite: "nope".into(), ..Default::default() };
        assert!(matches!(run_suite(&cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn function_entry_json() {
        let e: FunctionEntry = serde_json::from_str(
            r#"{"name": "scale", "c": "1/2", "modulus": {"form": "linear", "s": 0}, "select": [1]}"#,
        )
        .unwrap();
        let p = e.prepare().unwrap();
        assert_eq!(p.f.name(), "scale(1/2^1)");
        assert_eq!(p.modulus, Some(ModulusSpec::linear(0)));
        assert_eq!(p.select.unwrap().members(), &[1]);
        assert_eq!(p.inverse_modulus, Some(ModulusSpec::linear(1)));
        let h: FunctionEntry = serde_json::from_str(r#"{"name": "hilbert2d"}"#).unwrap();
        assert_eq!(h.prepare().unwrap().f.n(), 1);
    }

    #[test]
    fn z_must_fill_the_complement() {
        let e: FunctionEntry = serde_json::from_str(
            r#"{"name": "sum", "n": 2, "select": [1], "z": {"kind": "random", "seed": 1, "n": 2}}"#,
        )
        .unwrap();
        assert!(matches!(e.prepare(), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn bad_params_rejected() {
        let cfg = ExperimentConfig {
            suite: "geometry".into(),
            params: serde_json::json!({"no_such_field": 1}),
            ..Default::default()
        };
        assert!(matches!(run_suite(&cfg), Err(Error::InvalidConfig(_))));
    }
}

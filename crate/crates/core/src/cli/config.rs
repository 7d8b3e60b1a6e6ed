//! JSON schema of a batch run.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use num_rational::BigRational;
use serde::{Deserialize, Deserializer};

use crate::filtration::{PartitionChain, Witness};
use crate::lattice::{Functional, LatticeModel};
use crate::martingale::KindClaim;
use crate::representation::ALViewSpec;
use crate::scalar::{parse_rational, Scalar};

pub const DEFAULT_SEED: u64 = 0x5eed;
pub const DEFAULT_PROFILE_TOLERANCE: f64 = 0.15;
pub const DEFAULT_HORIZON: usize = 50;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    /// Numeric comparison tolerance for identities checked in floating point.
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub experiments: Vec<ExperimentConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub process: ProcessSpec,
    #[serde(default)]
    pub model: Option<LatticeModel>,
    #[serde(default)]
    pub filtration: Option<FiltrationSpec>,
    #[serde(default)]
    pub al_view: Option<ALViewSpec>,
    #[serde(default)]
    pub diagnostics: Option<Vec<Diagnostic>>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    /// Threshold below which a convergence profile counts as converged.
    #[serde(default)]
    pub profile_tolerance: Option<f64>,
    #[serde(default)]
    pub horizon: Option<usize>,
    /// Expected verdicts by name; the run exits 1 if any differs.
    #[serde(default)]
    pub expect: BTreeMap<String, bool>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessSpec {
    /// A gallery fixture by name.
    Fixture(String),
    /// An explicit trace `z_1..z_T` over the configured filtration.
    Explicit {
        values: Vec<Vec<Exact>>,
        #[serde(default)]
        claim: Option<KindClaim>,
        /// Closing vector for the positive-part diagnostic.
        #[serde(default)]
        x: Option<Vec<f64>>,
    },
    /// `z_n = E_n x` over the configured filtration.
    ClosedMartingale {
        #[serde(default)]
        x: Option<Generator>,
    },
    /// Pólya urn proportions on path space of the given depth.
    Urn { depth: u32 },
    /// Partial sums in `L1` against `c0`, dimension and horizon `horizon`.
    KbVsC0 {},
    /// A plain sequence in the configured model.
    Sequence {
        terms: Vec<Vec<f64>>,
        #[serde(default)]
        limit: Option<Vec<f64>>,
        #[serde(default)]
        unit: Option<Vec<f64>>,
        #[serde(default)]
        battery: Option<Vec<Vec<f64>>>,
    },
    /// Closed martingale in `L1(Ω; F)` over a chain on `Ω`.
    Bochner {
        chain: PartitionChain<f64>,
        fiber: FiberConfig,
        #[serde(default)]
        x: Option<Generator>,
    },
    /// Fixed-point diagnostics of a single positive projection.
    Projection { matrix: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberConfig {
    pub model: LatticeModel,
    pub unit: Vec<f64>,
    pub functional: Functional,
}

/// Exactly one of `stages`, `chain` or `dyadic`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiltrationSpec {
    #[serde(default)]
    pub stages: Option<Vec<Vec<Vec<Exact>>>>,
    #[serde(default)]
    pub chain: Option<PartitionChain<BigRational>>,
    /// Depth of the uniform dyadic chain, stages `0..=depth`.
    #[serde(default)]
    pub dyadic: Option<u32>,
    #[serde(default)]
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Generator {
    Coords(Vec<f64>),
    Named(GeneratorKind),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Coordinates uniform in `[-1, 1]`.
    Random,
    /// `a·1_A + b` with random `A`, `a`, `b`.
    Indicator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnostic {
    Validate,
    Process,
    Doob,
    Exact,
    PositivePart,
    DoubleCondition,
    Contraction,
    Residual,
}

/// A number read both exactly and as `f64`: JSON numbers are taken at their
/// binary value, strings as `p/q` or decimals.
#[derive(Clone, Debug, PartialEq)]
pub struct Exact {
    pub exact: BigRational,
    pub approx: f64,
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        let exact = match Raw::deserialize(deserializer)? {
            Raw::Number(v) => BigRational::from_float(v)
                .ok_or_else(|| serde::de::Error::custom(format!("{v} is not finite")))?,
            Raw::Text(s) => {
                parse_rational(&s).ok_or_else(|| serde::de::Error::custom(format!("cannot parse {s:?} as a rational")))?
            }
        };
        Ok(Exact { approx: exact.to_f64(), exact })
    }
}

/// A schema or reference error, located by its JSON path.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError { path: path.into(), message: message.to_string() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parses JSON text, reporting the path of the first offending field.
pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| ConfigError::new(e.path().to_string(), e.inner()))
}

//! The JSON result document written by `dhn cluster`.
//!
//! Reals are written with 17 significant digits. Field order is fixed, so two
//! runs with the same configuration differ only in `wall_time_ms`.

use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::Result;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Louvain-method search, serial, from singletons.
    Lms,
    /// Parallel Louvain-method search from a random clustering.
    Plms,
    /// Generalized Newman method, parallel.
    Gnm,
    /// Generalized Newman method, serial.
    Sgnm,
    /// GNM followed by one Louvain sweep.
    GnmLms,
    /// Newman leading-eigenvector bisection.
    Newman,
    /// Cleora embedding propagation, read out by row argmax.
    Cleora,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Lms => "lms",
            Method::Plms => "plms",
            Method::Gnm => "gnm",
            Method::Sgnm => "sgnm",
            Method::GnmLms => "gnm-lms",
            Method::Newman => "newman",
            Method::Cleora => "cleora",
        }
    }
}

fn real17(v: f64) -> Box<RawValue> {
    let text = if v.is_finite() { format!("{v:.16e}") } else { "null".to_string() };
    RawValue::from_string(text).expect("formatted real is valid JSON")
}

fn ser_real<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    real17(*v).serialize(s)
}

fn ser_opt_real<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    v.map(real17).serialize(s)
}

fn ser_opt_reals<S: Serializer>(v: &Option<Vec<f64>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    v.as_ref().map(|xs| xs.iter().map(|&x| real17(x)).collect::<Vec<_>>()).serialize(s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub dim: usize,
    pub seed: u64,
    #[serde(serialize_with = "ser_real")]
    pub epsilon: f64,
    pub window: usize,
    pub max_iters: usize,
    pub cleora_iterations: Option<usize>,
    pub directed_reject: bool,
    pub input: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeAssignment {
    pub node: String,
    pub cluster: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub format_version: u32,
    pub method: Method,
    pub config: ConfigEcho,
    pub nodes: usize,
    pub clusters: usize,
    pub assignment: Vec<NodeAssignment>,
    #[serde(serialize_with = "ser_real")]
    pub modularity: f64,
    #[serde(serialize_with = "ser_real")]
    pub d_cut: f64,
    #[serde(serialize_with = "ser_opt_reals")]
    pub energy_trace: Option<Vec<f64>>,
    pub iterations: usize,
    pub outcome: String,
    pub embedding_path: Option<String>,
    #[serde(serialize_with = "ser_opt_real")]
    pub wall_time_ms: Option<f64>,
}

impl ResultDocument {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

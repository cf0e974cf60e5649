//! Report types shared by the JSON and text renderers.

use betacode::coding::{CollisionReport, EntropyComparison, PhasePointSerial};
use serde::Serialize;

pub const SCHEMA_VERSION: &str = "betacode-report/1";

#[derive(Clone, Debug, Serialize)]
pub struct Settings {
    pub precision_bits: u32,
    pub padic_digits: u32,
    pub depth: i64,
    pub max_period: usize,
    pub seed: u64,
    pub threads: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Header {
    pub schema: &'static str,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub settings: Settings,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalizationOut {
    pub polynomial: String,
    /// Ascending coefficients of the associated polynomial.
    pub coefficients: Vec<String>,
    pub shift: i64,
    pub sign: i8,
    pub content: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct PisotOut {
    pub pisot: bool,
    pub side: &'static str,
    pub unit: bool,
    pub beta: Option<f64>,
    pub minimal_polynomial: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlaceRow {
    pub kind: &'static str,
    pub tag: &'static str,
    /// Archimedean: root value; p-adic: `null`.
    pub value: Option<String>,
    pub modulus: Option<f64>,
    /// Radius of the certified root enclosure.
    pub tolerance: Option<f64>,
    pub prime: Option<u64>,
    pub slope: Option<String>,
    pub roots: usize,
    pub unevaluable: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParryOut {
    pub d1: String,
    pub d1_finite: bool,
    pub dstar: String,
    pub automaton_states: usize,
    pub finite_type: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyOut {
    #[serde(flatten)]
    pub values: EntropyComparison,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelOut {
    pub max_period: usize,
    pub exact: bool,
    pub sequences: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SamplingOut {
    pub arch_tolerance: f64,
    #[serde(flatten)]
    pub report: CollisionReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    #[serde(flatten)]
    pub header: Header,
    pub input: String,
    pub normalization: NormalizationOut,
    pub hyperbolic: bool,
    /// Distance of the closest root modulus to 1.
    pub hyperbolic_certificate: f64,
    pub irreducible: bool,
    pub pisot: PisotOut,
    pub places: Vec<PlaceRow>,
    pub coding_polynomial: Option<String>,
    pub parry: Option<ParryOut>,
    pub entropy: EntropyOut,
    pub kernel: Option<KernelOut>,
    /// Reduced image of the sequence with a single 1 at index 0.
    pub homoclinic_point: Option<PhasePointSerial>,
    pub sampling: Option<SamplingOut>,
    pub lattice: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpandReport {
    #[serde(flatten)]
    pub header: Header,
    pub input: String,
    pub polynomial: String,
    pub beta: f64,
    pub digits: String,
    pub terminated: bool,
    /// Remainder in the basis `1, β, …, β^{d−1}`, as exact rationals.
    pub remainder: Vec<String>,
    pub remainder_bound: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelReport {
    #[serde(flatten)]
    pub header: Header,
    pub input: String,
    pub coding_polynomial: String,
    pub kernel: KernelOut,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleReport {
    #[serde(flatten)]
    pub header: Header,
    pub input: String,
    pub coding_polynomial: String,
    pub sampling: SamplingOut,
}

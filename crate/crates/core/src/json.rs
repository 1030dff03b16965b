//! JSON schemas for every external surface: system configs, observables,
//! eigensystem output, resolvent pole tables, the two-sided operator, Jordan
//! reports, and histogram summaries.
//!
//! Exact scalars are always carried as strings ("num/den" or
//! "a/b+c/e√5"); floats appear only in histogram and grid data.

use crate::interval::{HistogramBin, HistogramReport};
use crate::observable::{BlockObservable, CylFun, Observable, PolyObservable};
use crate::poly::Poly;
use crate::scalar::Scalar;
use crate::shift::{MeasureSpec, ShiftError, ShiftSystem, Sidedness};
use crate::spectral::{EigenSystem, ObservableResolvent};
use crate::twosided::{JordanReport, PoleOrderReport, TwoSidedOperator};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Syntax(String),
    #[error("bad scalar string {0:?}")]
    Scalar(String),
    #[error("invalid config: {0}")]
    Config(String),
}

impl From<ShiftError> for JsonError {
    fn from(e: ShiftError) -> Self {
        JsonError::Config(e.to_string())
    }
}

fn parse_scalar(s: &str) -> Result<Scalar, JsonError> {
    s.parse().map_err(|_| JsonError::Scalar(s.to_string()))
}

fn scalars_to_strings(v: &[Scalar]) -> Vec<String> {
    v.iter().map(Scalar::to_string).collect()
}

fn strings_to_scalars(v: &[String]) -> Result<Vec<Scalar>, JsonError> {
    v.iter().map(|s| parse_scalar(s)).collect()
}

// ---------------------------------------------------------------------------
// system config

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transition: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stationary: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub beta: usize,
    pub adjacency: Vec<Vec<u8>>,
    pub measure: MeasureConfig,
    pub sidedness: String,
}

impl SystemConfig {
    pub fn from_system(sys: &ShiftSystem) -> Self {
        let measure = match sys.measure() {
            MeasureSpec::Bernoulli { probabilities } => MeasureConfig {
                kind: "bernoulli".into(),
                probabilities: Some(scalars_to_strings(probabilities)),
                transition: None,
                stationary: None,
            },
            MeasureSpec::Markov { transition, stationary } => MeasureConfig {
                kind: "markov".into(),
                probabilities: None,
                transition: Some(transition.iter().map(|r| scalars_to_strings(r)).collect()),
                stationary: Some(scalars_to_strings(stationary)),
            },
        };
        SystemConfig {
            beta: sys.beta(),
            adjacency: sys.adjacency().to_vec(),
            measure,
            sidedness: match sys.sidedness() {
                Sidedness::OneSided => "one-sided".into(),
                Sidedness::TwoSided => "two-sided".into(),
            },
        }
    }

    pub fn into_system(self) -> Result<ShiftSystem, JsonError> {
        let sidedness = match self.sidedness.as_str() {
            "one-sided" => Sidedness::OneSided,
            "two-sided" => Sidedness::TwoSided,
            other => return Err(JsonError::Config(format!("unknown sidedness {other:?}"))),
        };
        let measure = match self.measure.kind.as_str() {
            "bernoulli" => {
                let probs = self
                    .measure
                    .probabilities
                    .ok_or_else(|| JsonError::Config("bernoulli requires probabilities".into()))?;
                MeasureSpec::Bernoulli { probabilities: strings_to_scalars(&probs)? }
            }
            "markov" => {
                let transition = self
                    .measure
                    .transition
                    .ok_or_else(|| JsonError::Config("markov requires transition".into()))?;
                let stationary = self
                    .measure
                    .stationary
                    .ok_or_else(|| JsonError::Config("markov requires stationary".into()))?;
                MeasureSpec::Markov {
                    transition: transition
                        .iter()
                        .map(|r| strings_to_scalars(r))
                        .collect::<Result<_, _>>()?,
                    stationary: strings_to_scalars(&stationary)?,
                }
            }
            other => return Err(JsonError::Config(format!("unknown measure kind {other:?}"))),
        };
        Ok(ShiftSystem::new(self.beta, self.adjacency, measure, sidedness)?)
    }
}

/// Parse a config file body (strict: unknown fields rejected).
pub fn system_from_json(text: &str) -> Result<ShiftSystem, JsonError> {
    let cfg: SystemConfig =
        serde_json::from_str(text).map_err(|e| JsonError::Syntax(e.to_string()))?;
    cfg.into_system()
}

pub fn system_to_json(sys: &ShiftSystem) -> String {
    serde_json::to_string_pretty(&SystemConfig::from_system(sys)).expect("serializable")
}

// ---------------------------------------------------------------------------
// observables

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum ObservableJson {
    #[serde(rename = "poly")]
    Poly { coefficients: Vec<String> },
    #[serde(rename = "block")]
    Block { parts: [Vec<String>; 2] },
    #[serde(rename = "cylinder")]
    Cylinder { depth: usize, values: BTreeMap<String, String> },
}

impl ObservableJson {
    pub fn from_observable(f: &Observable) -> Self {
        match f {
            Observable::Poly(p) => ObservableJson::Poly {
                coefficients: scalars_to_strings(p.poly.coeffs()),
            },
            Observable::Block(b) => ObservableJson::Block {
                parts: [
                    scalars_to_strings(b.parts[0].coeffs()),
                    scalars_to_strings(b.parts[1].coeffs()),
                ],
            },
            Observable::Cyl(c) => ObservableJson::Cylinder {
                depth: c.depth(),
                values: c
                    .values()
                    .iter()
                    .map(|(w, v)| {
                        (w.iter().map(|d| d.to_string()).collect::<String>(), v.to_string())
                    })
                    .collect(),
            },
        }
    }

    pub fn into_observable(self, sys: &ShiftSystem) -> Result<Observable, JsonError> {
        match self {
            ObservableJson::Poly { coefficients } => Ok(Observable::Poly(PolyObservable::new(
                Poly::from_coeffs(strings_to_scalars(&coefficients)?),
            ))),
            ObservableJson::Block { parts } => Ok(Observable::Block(BlockObservable::new(
                Poly::from_coeffs(strings_to_scalars(&parts[0])?),
                Poly::from_coeffs(strings_to_scalars(&parts[1])?),
            ))),
            ObservableJson::Cylinder { depth, values } => {
                let mut map = BTreeMap::new();
                for (word, value) in values {
                    let w: Vec<u8> = word
                        .chars()
                        .map(|c| {
                            c.to_digit(10)
                                .map(|d| d as u8)
                                .ok_or_else(|| JsonError::Config(format!("bad word {word:?}")))
                        })
                        .collect::<Result<_, _>>()?;
                    map.insert(w, parse_scalar(&value)?);
                }
                CylFun::new(sys, depth, map)
                    .map(Observable::Cyl)
                    .map_err(|e| JsonError::Config(e.to_string()))
            }
        }
    }
}

pub fn observable_to_json(f: &Observable) -> String {
    serde_json::to_string_pretty(&ObservableJson::from_observable(f)).expect("serializable")
}

pub fn observable_from_json(sys: &ShiftSystem, text: &str) -> Result<Observable, JsonError> {
    let dto: ObservableJson =
        serde_json::from_str(text).map_err(|e| JsonError::Syntax(e.to_string()))?;
    dto.into_observable(sys)
}

// ---------------------------------------------------------------------------
// spectral output

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct EigenSystemJson {
    pub eigenvalues: Vec<String>,
    pub eigenpolys: Vec<Vec<String>>,
    pub duals: Vec<Vec<String>>,
}

impl EigenSystemJson {
    pub fn from_eigen_system(es: &EigenSystem) -> Self {
        let size = es.size();
        let eigenpolys = (0..size)
            .map(|i| scalars_to_strings(&es.change_of_basis().column(i)))
            .collect();
        let duals = (0..size)
            .map(|i| scalars_to_strings(es.dual_matrix().row(i)))
            .collect();
        EigenSystemJson {
            eigenvalues: scalars_to_strings(es.eigenvalues()),
            eigenpolys,
            duals,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub eigenvalue: String,
    pub coefficient: String,
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct DecompositionJson {
    pub terms: Vec<TermJson>,
}

impl DecompositionJson {
    pub fn from_decomposition(d: &crate::spectral::SpectralDecomposition) -> Self {
        DecompositionJson {
            terms: d
                .terms
                .iter()
                .map(|(l, c)| TermJson { eigenvalue: l.to_string(), coefficient: c.to_string() })
                .collect(),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct IterateStepJson {
    pub step: u64,
    pub terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct IterateJson {
    pub limit: String,
    pub rate: Option<String>,
    pub trajectory: Vec<IterateStepJson>,
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct PoleJson {
    pub location: String,
    pub order: usize,
    pub residue: Vec<String>,
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct ResolventJson {
    pub poles: Vec<PoleJson>,
}

impl ResolventJson {
    pub fn from_resolvent(es: &EigenSystem, r: &ObservableResolvent) -> Self {
        ResolventJson {
            poles: r
                .terms
                .iter()
                .map(|(pole, residue)| PoleJson {
                    location: pole.to_string(),
                    order: 1,
                    residue: scalars_to_strings(
                        &es.coords(residue).expect("residue lies in the test space"),
                    ),
                })
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// two-sided output

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct OperatorEntryJson {
    pub i: usize,
    pub j: usize,
    pub m: usize,
    pub n: usize,
    pub value: String,
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct OperatorJson {
    pub epsilon: String,
    #[serde(rename = "M")]
    pub m_bound: usize,
    #[serde(rename = "N")]
    pub n_bound: usize,
    pub entries: Vec<OperatorEntryJson>,
}

impl OperatorJson {
    pub fn from_operator(op: &TwoSidedOperator) -> Self {
        OperatorJson {
            epsilon: op.epsilon.to_string(),
            m_bound: op.m_bound,
            n_bound: op.n_bound,
            entries: op
                .entries()
                .into_iter()
                .map(|(row, col, v)| OperatorEntryJson {
                    i: row.i,
                    j: row.j,
                    m: col.i,
                    n: col.j,
                    value: v.to_string(),
                })
                .collect(),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct TruncationJson {
    #[serde(rename = "M")]
    pub m_bound: usize,
    #[serde(rename = "N")]
    pub n_bound: usize,
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct JordanJson {
    pub k: usize,
    pub eigenvalue: String,
    pub algebraic: usize,
    pub geometric: usize,
    pub blocks: Vec<usize>,
    pub truncation: TruncationJson,
    pub stable: bool,
}

impl JordanJson {
    pub fn from_report(r: &JordanReport) -> Self {
        JordanJson {
            k: r.k,
            eigenvalue: r.eigenvalue.to_string(),
            algebraic: r.algebraic,
            geometric: r.geometric,
            blocks: r.blocks.clone(),
            truncation: TruncationJson { m_bound: r.truncation.0, n_bound: r.truncation.1 },
            stable: r.stable,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct PoleOrderJson {
    pub k: usize,
    pub order: usize,
    pub witness_f: [usize; 2],
    pub witness_g: [usize; 2],
}

impl PoleOrderJson {
    pub fn from_report(r: &PoleOrderReport) -> Self {
        PoleOrderJson {
            k: r.k,
            order: r.order,
            witness_f: [r.witness_f.i, r.witness_f.j],
            witness_g: [r.witness_g.i, r.witness_g.j],
        }
    }
}

// ---------------------------------------------------------------------------
// histogram output

#[derive(Serialize, Deserialize, Clone, PartialEq, Debug)]
#[serde(deny_unknown_fields)]
pub struct HistogramSummaryJson {
    pub samples: u64,
    pub bins: usize,
    pub seed: u64,
    pub burn_in: u32,
    pub max_rel_error: f64,
}

impl HistogramSummaryJson {
    pub fn from_report(r: &HistogramReport) -> Self {
        HistogramSummaryJson {
            samples: r.samples,
            bins: r.bins.len(),
            seed: r.seed,
            burn_in: r.burn_in,
            max_rel_error: r.max_rel_error,
        }
    }
}

/// CSV body for a histogram: one row per bin.
pub fn histogram_to_csv(r: &HistogramReport) -> String {
    let mut out = String::from("bin_left,bin_right,count,empirical_density,exact_density,rel_error\n");
    for HistogramBin { lo, hi, count, empirical_density, exact_density, rel_error } in &r.bins {
        out.push_str(&format!(
            "{lo},{hi},{count},{empirical_density},{exact_density},{rel_error}\n"
        ));
    }
    out
}

//! JSON interchange for modules and reports.
//!
//! Ring coefficients are JSON numbers when they fit in 64 bits and decimal
//! strings otherwise; both forms are accepted on input.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize, Serializer};

use crate::crystal::DieudonneModule;
use crate::datum::{Embedding, OrbitDatum, PelDatum};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::witt::{RingContext, RingElement};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Number(u64),
    Text(String),
}

impl Coefficient {
    pub fn from_big(x: &BigUint) -> Self {
        match x.to_u64() {
            Some(v) => Coefficient::Number(v),
            None => Coefficient::Text(x.to_string()),
        }
    }

    pub fn to_big(&self) -> Result<BigUint> {
        match self {
            Coefficient::Number(v) => Ok(BigUint::from(*v)),
            Coefficient::Text(s) => s
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("coefficient {s:?}: {e}"))),
        }
    }
}

pub(crate) fn big_number<S: Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    Coefficient::from_big(x).serialize(s)
}

pub(crate) fn big_numbers<S: Serializer>(xs: &[BigUint], s: S) -> std::result::Result<S::Ok, S::Error> {
    xs.iter().map(Coefficient::from_big).collect::<Vec<_>>().serialize(s)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RingJson {
    pub p: u64,
    #[serde(rename = "L")]
    pub degree: usize,
    #[serde(rename = "N")]
    pub precision: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<u64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatumJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    pub orbits: Vec<OrbitDatum>,
    #[serde(default = "one")]
    pub r: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairing: Option<Vec<(Embedding, Embedding)>>,
}

fn one() -> usize {
    1
}

/// `blocks[orbit][position][row][col]` is a coefficient list.
pub type BlocksJson = Vec<Vec<Vec<Vec<Vec<Coefficient>>>>>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModuleJson {
    pub ring: RingJson,
    pub datum: DatumJson,
    pub blocks: BlocksJson,
}

pub fn element_to_json(ring: &RingContext, x: &RingElement) -> Vec<Coefficient> {
    ring.coefficients(x).iter().map(Coefficient::from_big).collect()
}

pub fn element_from_json(ring: &RingContext, coeffs: &[Coefficient]) -> Result<RingElement> {
    if coeffs.len() != ring.degree() {
        return Err(Error::Parse(format!(
            "element has {} coefficients, ring degree is {}",
            coeffs.len(),
            ring.degree()
        )));
    }
    let modulus = ring.modulus();
    let big = coeffs.iter().map(Coefficient::to_big).collect::<Result<Vec<_>>>()?;
    if big.iter().any(|c| *c >= modulus) {
        return Err(Error::Parse(format!("coefficient out of range [0, {modulus})")));
    }
    Ok(ring.from_big_coeffs(&big))
}

impl ModuleJson {
    pub fn from_module(m: &DieudonneModule) -> Self {
        let ring = m.ring();
        let d = m.datum();
        ModuleJson {
            ring: RingJson {
                p: ring.p(),
                degree: ring.degree(),
                precision: ring.precision(),
                h: Some(ring.defining_polynomial().to_vec()),
            },
            datum: DatumJson {
                p: Some(d.p),
                orbits: d.orbits.clone(),
                r: d.r,
                pairing: d.pairing.clone(),
            },
            blocks: m
                .blocks()
                .iter()
                .map(|list| {
                    list.iter()
                        .map(|b| {
                            (0..b.rows())
                                .map(|i| (0..b.cols()).map(|j| element_to_json(ring, b.get(i, j))).collect())
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// Builds the module; `precision` overrides the stored `N`.
    pub fn into_module(self, precision: Option<u32>) -> Result<DieudonneModule> {
        let stored = RingContext::new(
            self.ring.p,
            self.ring.degree,
            self.ring.precision,
            self.ring.h.as_deref(),
        )?;
        if let Some(p) = self.datum.p {
            if p != self.ring.p {
                return Err(Error::InvalidDatum(format!(
                    "datum prime {p} differs from ring prime {}",
                    self.ring.p
                )));
            }
        }
        let mut datum = PelDatum::new(self.ring.p, self.datum.orbits, self.datum.r)?;
        if let Some(pairing) = self.datum.pairing {
            datum = datum.with_pairing(pairing)?;
        }
        if self.blocks.len() != datum.orbits.len() {
            return Err(Error::InvalidModule(format!(
                "{} block lists for {} orbits",
                self.blocks.len(),
                datum.orbits.len()
            )));
        }
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for list in &self.blocks {
            let mut out = Vec::with_capacity(list.len());
            for rows in list {
                let parsed = rows
                    .iter()
                    .map(|row| row.iter().map(|c| element_from_json(&stored, c)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                out.push(Matrix::from_rows(parsed)?);
            }
            blocks.push(out);
        }
        let module = DieudonneModule::new(stored, datum, blocks)?;
        match precision {
            Some(n) if n != module.precision() => module.with_precision(n),
            _ => Ok(module),
        }
    }
}

pub fn module_to_json(m: &DieudonneModule) -> String {
    serde_json::to_string_pretty(&ModuleJson::from_module(m)).expect("module serializes")
}

pub fn module_from_json(text: &str, precision: Option<u32>) -> Result<DieudonneModule> {
    let parsed: ModuleJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    parsed.into_module(precision)
}

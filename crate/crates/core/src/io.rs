//! JSON descriptions of fields, potentials and problems.
//!
//! A field file is either a named family,
//!
//! ```json
//! { "kind": "family", "name": "eta_phi", "params": { "p": 3, "d": 5, "gamma": 1 } }
//! ```
//!
//! (`"closed_form"` is accepted as a synonym of `"family"`), or one of the primitive shapes (`constant`, `power`, `shifted_power`,
//! `bump`, `sampled`). A problem file carries `p`, `d`, a domain and a potential.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{Dimension, Exponent, Potential, ProblemSpec, RadialDomain};
use crate::error::{invalid, Result};
use crate::field::ScalarField;
use crate::solutions::{make_family, FamilyParams, NamedFamily};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    #[serde(alias = "closed_form")]
    Family { name: String, params: FamilyParams },
    Constant { value: f64 },
    Power { coef: f64, exponent: f64 },
    ShiftedPower { alpha: f64, q: f64, kappa: f64 },
    Bump { center: f64, half_width: f64 },
    Sampled { r: Vec<f64>, v: Vec<f64>, #[serde(default)] dv: Option<Vec<f64>> },
}

/// A field together with the family it came from, if any.
#[derive(Debug, Clone)]
pub struct LoadedField {
    pub field: ScalarField,
    pub family: Option<NamedFamily>,
}

impl FieldSpec {
    pub fn build(&self) -> Result<LoadedField> {
        let plain = |field: ScalarField| LoadedField { field, family: None };
        Ok(match self {
            FieldSpec::Family { name, params } => {
                let fam = make_family(name, params)?;
                LoadedField { field: fam.field.clone(), family: Some(fam) }
            }
            FieldSpec::Constant { value } => plain(ScalarField::constant(*value)),
            FieldSpec::Power { coef, exponent } => plain(ScalarField::power(*coef, *exponent)),
            FieldSpec::ShiftedPower { alpha, q, kappa } => {
                if !(*alpha >= 0.0 && *q > 0.0) {
                    return Err(invalid("shifted_power needs alpha ≥ 0 and q > 0"));
                }
                plain(ScalarField::shifted_power(*alpha, *q, *kappa))
            }
            FieldSpec::Bump { center, half_width } => plain(ScalarField::bump(*center, *half_width)?),
            FieldSpec::Sampled { r, v, dv } => plain(ScalarField::sampled(r.clone(), v.clone(), dv.clone())?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    Constant { value: f64 },
    Power { coef: f64, s: f64 },
    /// `-|(p-d)/p|^p r^{-p}` for the problem's `p` and `d`.
    Hardy,
    WAlpha { alpha: f64 },
    Sampled { r: Vec<f64>, v: Vec<f64> },
    /// The potential that makes the given positive field a solution.
    FromField { field: Box<FieldSpec> },
    Sum { parts: Vec<PotentialSpec> },
}

impl PotentialSpec {
    pub fn build(&self, p: f64, d: f64) -> Result<Potential> {
        Ok(match self {
            PotentialSpec::Zero => Potential::Zero,
            PotentialSpec::Constant { value } => Potential::Constant(*value),
            PotentialSpec::Power { coef, s } => Potential::Power { coef: *coef, s: *s },
            PotentialSpec::Hardy => Potential::hardy(p, d),
            PotentialSpec::WAlpha { alpha } => Potential::WAlpha { p, d, alpha: *alpha },
            PotentialSpec::Sampled { r, v } => {
                if r.len() != v.len() || r.len() < 2 || r.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(invalid("sampled potential needs matching, strictly increasing nodes"));
                }
                Potential::Sampled { r: r.clone(), v: v.clone() }
            }
            PotentialSpec::FromField { field } => Potential::FromSolution { field: field.build()?.field, p, d },
            PotentialSpec::Sum { parts } => {
                Potential::Sum(parts.iter().map(|part| part.build(p, d)).collect::<Result<_>>()?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainSpec {
    PuncturedSpace,
    WholeSpace,
    Annulus {
        r_min: f64,
        #[serde(default)]
        r_max: Option<f64>,
        #[serde(default)]
        punctured: bool,
    },
}

impl DomainSpec {
    pub fn build(&self) -> Result<RadialDomain> {
        match self {
            DomainSpec::PuncturedSpace => Ok(RadialDomain::punctured_space()),
            DomainSpec::WholeSpace => Ok(RadialDomain::whole_space()),
            DomainSpec::Annulus { r_min, r_max, punctured } => {
                RadialDomain::new(*r_min, r_max.unwrap_or(f64::INFINITY), *punctured)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub p: f64,
    pub d: u32,
    pub domain: DomainSpec,
    #[serde(default = "zero_potential")]
    pub potential: PotentialSpec,
}

fn zero_potential() -> PotentialSpec {
    PotentialSpec::Zero
}

impl ProblemFile {
    pub fn build(&self) -> Result<ProblemSpec> {
        let p = Exponent::new(self.p)?;
        let d = Dimension::new(self.d)?;
        ProblemSpec::new(p, d, self.domain.build()?, self.potential.build(self.p, self.d as f64)?)
    }
}

/// The problem a named family claims to solve, as a problem file.
pub fn problem_of_family(fam: &NamedFamily) -> Result<ProblemSpec> {
    fam.spec()
}

pub fn parse_field(text: &str) -> Result<FieldSpec> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    Ok(serde_json::from_str(text)?)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))
}

pub fn load_field(path: &Path) -> Result<FieldSpec> {
    parse_field(&read(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

pub fn load_problem(path: &Path) -> Result<ProblemFile> {
    parse_problem(&read(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_round_trip() {
        let text = r#"{ "kind": "family", "name": "eta_phi", "params": { "p": 3, "d": 5, "gamma": 1 } }"#;
        let spec = parse_field(text).unwrap();
        let back: FieldSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, back);
        let loaded = spec.build().unwrap();
        assert!(loaded.family.is_some());
        assert!(loaded.field.value(100.0) > 0.0);
    }

    #[test]
    fn problem_file_builds() {
        let text = r#"{ "p": 2, "d": 3, "domain": "punctured_space", "potential": { "kind": "hardy" } }"#;
        let spec = parse_problem(text).unwrap().build().unwrap();
        assert!((spec.potential.value(2.0) + 0.25 / 4.0).abs() < 1e-15);
        let annulus = r#"{ "p": 3, "d": 5, "domain": { "annulus": { "r_min": 20 } } }"#;
        let spec = parse_problem(annulus).unwrap().build().unwrap();
        assert_eq!(spec.domain.r_min, 20.0);
        assert!(spec.potential.is_zero());
    }

    #[test]
    fn malformed_input_reports_position() {
        let err = parse_problem("{ \"p\": 2,\n \"domain\": \"whole_space\" }").unwrap_err().to_string();
        assert!(err.contains("missing field `d`") && err.contains("line 2"), "{err}");
        let err = parse_field(r#"{ "kind": "power", "coef": 1 }"#).unwrap_err().to_string();
        assert!(err.contains("exponent"), "{err}");
        let err = parse_problem(r#"{ "p": 2, "d": 3, "domain": "whole_space", "extra": 1 }"#).unwrap_err().to_string();
        assert!(err.contains("extra"), "{err}");
    }

    #[test]
    fn hardy_potential_on_whole_space_is_rejected() {
        let text = r#"{ "p": 2, "d": 3, "domain": "whole_space", "potential": { "kind": "hardy" } }"#;
        assert!(parse_problem(text).unwrap().build().is_err());
    }
}

//! JSON run configurations.
//!
//! Structure constants, Gram entries, split bases and polynomial
//! coefficients are rational strings ("-1/2") so the exact validators see
//! exact inputs; floats appear only in initial conditions and run
//! parameters. Serialization order is fixed by the struct layout, so
//! export → parse → export is byte-identical.

use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::algebra::LieAlgebra;
use crate::catalog::CatalogEntry;
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSystem;
use crate::metric::{BilinearForm, Monomial, Polynomial, ScalarField};
use crate::rat::{format_rat, parse_rat, Rat};
use crate::splitting::{SplitDecomposition, SplitRole};

/// `[e_i, e_j] = c · e_k + …` with 1-based basis indices.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StructureEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AlgebraSpec {
    pub name: String,
    pub dim: usize,
    pub structure: Vec<StructureEntry>,
}

/// `<e_i, e_j> = v` with 1-based basis indices; symmetric closure applies.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GramEntry {
    pub i: usize,
    pub j: usize,
    pub v: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MetricSpec {
    pub name: String,
    pub entries: Vec<GramEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SplitSpec {
    /// Basis vectors of each subalgebra as rational-string coordinates.
    pub plus: Vec<Vec<String>>,
    pub minus: Vec<Vec<String>>,
    /// "plus_acts_on_minus_perp" or "minus_acts_on_plus_perp".
    pub role: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PolyTerm {
    pub coeff: String,
    pub exponents: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct NamedPolynomial {
    pub name: String,
    pub terms: Vec<PolyTerm>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct HamiltonianSpec {
    pub name: String,
    pub terms: Vec<PolyTerm>,
    /// Optional provenance reference, "entry_id/system_id".
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub catalog: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub algebra: AlgebraSpec,
    pub metric: MetricSpec,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub split: Option<SplitSpec>,
    pub hamiltonian: HamiltonianSpec,
    #[serde(default)]
    pub invariants: Vec<NamedPolynomial>,
    pub initial: Vec<f64>,
    pub t: f64,
    pub dt: f64,
    pub sign: f64,
    pub seed: u64,
    #[serde(default)]
    pub checks: Vec<String>,
}

/// Validated module objects built from a [`RunConfig`].
pub struct BuiltConfig {
    pub algebra: Arc<LieAlgebra>,
    pub metric: Arc<BilinearForm>,
    pub split: Option<(Arc<SplitDecomposition>, SplitRole)>,
    pub invariants: Vec<ScalarField>,
    pub system: HamiltonianSystem,
}

fn parse_rat_field(s: &str, what: &str) -> Result<Rat> {
    parse_rat(s).map_err(|_| Error::Config(format!("invalid rational `{s}` in {what}")))
}

fn parse_polynomial(dim: usize, terms: &[PolyTerm], what: &str) -> Result<Polynomial> {
    let monomials = terms
        .iter()
        .map(|t| {
            Ok(Monomial {
                coefficient: parse_rat_field(&t.coeff, what)?,
                exponents: t.exponents.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Polynomial::new(dim, monomials)
        .map_err(|e| Error::Config(format!("{what}: {e}")))
}

fn poly_terms(p: &Polynomial) -> Vec<PolyTerm> {
    p.terms()
        .iter()
        .map(|m| PolyTerm {
            coeff: format_rat(&m.coefficient),
            exponents: m.exponents.clone(),
        })
        .collect()
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// Build and validate every module object referenced by the config.
    pub fn build(&self) -> Result<BuiltConfig> {
        let dim = self.algebra.dim;
        let index = |i: usize, what: &str| -> Result<usize> {
            if i == 0 || i > dim {
                return Err(Error::Config(format!(
                    "{what}: index {i} out of range 1..={dim}"
                )));
            }
            Ok(i - 1)
        };
        let structure = self
            .algebra
            .structure
            .iter()
            .map(|e| {
                Ok((
                    index(e.i, "algebra.structure")?,
                    index(e.j, "algebra.structure")?,
                    index(e.k, "algebra.structure")?,
                    parse_rat_field(&e.c, "algebra.structure")?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let algebra = Arc::new(LieAlgebra::new(self.algebra.name.clone(), dim, &structure)?);

        let gram = self
            .metric
            .entries
            .iter()
            .map(|e| {
                Ok((
                    index(e.i, "metric.entries")?,
                    index(e.j, "metric.entries")?,
                    parse_rat_field(&e.v, "metric.entries")?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let metric = Arc::new(BilinearForm::from_entries(dim, &gram)?);

        let split = match &self.split {
            None => None,
            Some(s) => {
                let parse_basis = |vs: &[Vec<String>], what: &str| -> Result<Vec<Vec<Rat>>> {
                    vs.iter()
                        .map(|v| {
                            if v.len() != dim {
                                return Err(Error::Config(format!(
                                    "{what}: basis vector has length {}, expected {dim}",
                                    v.len()
                                )));
                            }
                            v.iter().map(|x| parse_rat_field(x, what)).collect()
                        })
                        .collect()
                };
                let plus = parse_basis(&s.plus, "split.plus")?;
                let minus = parse_basis(&s.minus, "split.minus")?;
                let role = match s.role.as_str() {
                    "plus_acts_on_minus_perp" => SplitRole::PlusActsOnMinusPerp,
                    "minus_acts_on_plus_perp" => SplitRole::MinusActsOnPlusPerp,
                    other => {
                        return Err(Error::Config(format!("unknown split.role `{other}`")))
                    }
                };
                let dec = SplitDecomposition::build(&algebra, &metric, &plus, &minus)?;
                Some((Arc::new(dec), role))
            }
        };

        let h_poly = parse_polynomial(dim, &self.hamiltonian.terms, "hamiltonian.terms")?;
        let hamiltonian = ScalarField::polynomial_field(self.hamiltonian.name.clone(), h_poly);

        let invariants = self
            .invariants
            .iter()
            .map(|inv| {
                Ok(ScalarField::polynomial_field(
                    inv.name.clone(),
                    parse_polynomial(dim, &inv.terms, "invariants")?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;

        if self.initial.len() != dim {
            return Err(Error::Config(format!(
                "initial condition has length {}, expected {dim}",
                self.initial.len()
            )));
        }
        let initial = DVector::from_vec(self.initial.clone());

        let system = match &split {
            Some((dec, role)) => HamiltonianSystem::split_orbit(
                algebra.clone(),
                metric.clone(),
                dec.clone(),
                *role,
                hamiltonian,
                initial,
                self.sign,
            )?
            .flag_invariant(),
            None => HamiltonianSystem::full_orbit(
                algebra.clone(),
                metric.clone(),
                hamiltonian,
                initial,
                self.sign,
            )?,
        };

        Ok(BuiltConfig {
            algebra,
            metric,
            split,
            invariants,
            system,
        })
    }

    /// Export a catalog system as a self-contained config.
    pub fn from_catalog(entry: &CatalogEntry, system_id: &str) -> Result<RunConfig> {
        let spec = entry.system_spec(system_id)?;
        let metric = entry.metric(&spec.metric)?;
        let split = entry.split_for(&spec.metric)?;
        let dim = entry.algebra.dim();

        let unit = |i: usize| -> Vec<String> {
            (0..dim)
                .map(|j| if j == i { "1".to_string() } else { "0".to_string() })
                .collect()
        };

        let hamiltonian_poly = entry
            .invariant(&spec.hamiltonian)?
            .polynomial()
            .expect("catalog invariants are polynomial");

        // Trigonometric flows get a full period by default, polynomial ones
        // a unit horizon.
        let t = if entry.id.starts_with("example_iii") || entry.id.starts_with("oscillator") {
            std::f64::consts::TAU
        } else {
            1.0
        };

        Ok(RunConfig {
            name: format!("{}/{}", entry.id, system_id),
            algebra: AlgebraSpec {
                name: entry.algebra.name().to_string(),
                dim,
                structure: entry
                    .structure_entries
                    .iter()
                    .map(|(i, j, k, c)| StructureEntry {
                        i: i + 1,
                        j: j + 1,
                        k: k + 1,
                        c: format_rat(c),
                    })
                    .collect(),
            },
            metric: MetricSpec {
                name: metric.name.clone(),
                entries: metric
                    .entries
                    .iter()
                    .map(|(i, j, v)| GramEntry {
                        i: i + 1,
                        j: j + 1,
                        v: format_rat(v),
                    })
                    .collect(),
            },
            split: Some(SplitSpec {
                plus: split.plus_indices.iter().map(|&i| unit(i)).collect(),
                minus: split.minus_indices.iter().map(|&i| unit(i)).collect(),
                role: match spec.role {
                    SplitRole::PlusActsOnMinusPerp => "plus_acts_on_minus_perp".into(),
                    SplitRole::MinusActsOnPlusPerp => "minus_acts_on_plus_perp".into(),
                },
            }),
            hamiltonian: HamiltonianSpec {
                name: spec.hamiltonian.clone(),
                terms: poly_terms(hamiltonian_poly),
                catalog: Some(format!("{}/{}", entry.id, system_id)),
            },
            invariants: entry
                .invariants
                .iter()
                .map(|f| NamedPolynomial {
                    name: f.name().to_string(),
                    terms: poly_terms(f.polynomial().expect("polynomial invariant")),
                })
                .collect(),
            initial: spec
                .default_initial
                .iter()
                .map(crate::rat::rat_to_f64)
                .collect(),
            t,
            dt: 1e-3,
            sign: spec.sign,
            seed: 42,
            checks: vec![
                "invariance".into(),
                "involution".into(),
                "orbit_dimension".into(),
                "level_set".into(),
            ],
        })
    }
}

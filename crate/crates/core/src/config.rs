//! JSON system configuration.
//!
//! A spin system is described by
//!
//! ```json
//! {
//!   "name": "vierdrachen",
//!   "m": 2,
//!   "Q": [[1, -1], [1, 1]],
//!   "digits": [[0, 0], [1, 0]],
//!   "group_orders": [2, 2],
//!   "W": [[[0, 0], [1, 0]], [[0, 0], [1, 1]]],
//!   "aperiodic": true
//! }
//! ```
//!
//! `Q` may be given as rows, as a flat row-major list, or (for `m = 1`) as a
//! bare integer. Entries of `W` are residue tuples; for a single cyclic factor
//! a bare integer is accepted. A general qubit substitution replaces
//! `group_orders` and `W` by `alphabet` and `rules`, where `rules[a][d]` names
//! the letter at digit `d` of `S(a)`.

use serde::{Deserialize, Serialize};

use crate::digits::{DigitSystem, IntMatrix, DEFAULT_CAP};
use crate::error::{Error, Result};
use crate::group::AbelianGroup;
use crate::substitution::{QubitSubstitution, SpinMatrix, SpinSystem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Scalar(i64),
    Rows(Vec<Vec<i64>>),
    Flat(Vec<i64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ResidueSpec {
    Scalar(i64),
    Tuple(Vec<i64>),
}

impl ResidueSpec {
    fn to_vec(&self) -> Vec<i64> {
        match self {
            ResidueSpec::Scalar(v) => vec![*v],
            ResidueSpec::Tuple(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Caps {
    #[serde(default = "default_cap")]
    pub max_cells: usize,
}

fn default_cap() -> usize {
    DEFAULT_CAP
}

impl Default for Caps {
    fn default() -> Self {
        Self { max_cells: DEFAULT_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Bound on `||U^dagger U - I||_F` for the numerical unitarity test.
    #[serde(default = "default_unitarity")]
    pub unitarity: f64,
    /// Relative singular-value threshold for numerical rank.
    #[serde(default = "default_rank")]
    pub rank: f64,
    /// Minimum gap between an eigenvalue modulus and `sqrt(L)`.
    #[serde(default = "default_bs")]
    pub berlinkov_solomyak: f64,
}

fn default_unitarity() -> f64 {
    1e-10
}
fn default_rank() -> f64 {
    1e-9
}
fn default_bs() -> f64 {
    1e-6
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { unitarity: default_unitarity(), rank: default_rank(), berlinkov_solomyak: default_bs() }
    }
}

/// Colours for rendering; `spins[i]` colours group element `i`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaletteSpec {
    #[serde(default)]
    pub spins: Option<Vec<[u8; 3]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub m: usize,
    #[serde(rename = "Q")]
    pub q: MatrixSpec,
    pub digits: Vec<ResidueSpec>,
    #[serde(default)]
    pub group_orders: Option<Vec<u32>>,
    #[serde(rename = "W", default)]
    pub w: Option<Vec<Vec<ResidueSpec>>>,
    #[serde(default)]
    pub alphabet: Option<Vec<String>>,
    #[serde(default)]
    pub rules: Option<Vec<Vec<String>>>,
    /// User assertion that the subshift is aperiodic.
    #[serde(default)]
    pub aperiodic: bool,
    #[serde(default)]
    pub caps: Caps,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub palette: PaletteSpec,
}

/// The substitution a configuration describes.
#[derive(Clone, Debug, PartialEq)]
pub enum System {
    Spin(SpinSystem),
    Qubit(QubitSubstitution),
}

impl System {
    pub fn as_qubit(&self) -> &QubitSubstitution {
        match self {
            System::Spin(s) => s.as_qubit(),
            System::Qubit(q) => q,
        }
    }

    pub fn as_spin(&self) -> Result<&SpinSystem> {
        match self {
            System::Spin(s) => Ok(s),
            System::Qubit(_) => Err(Error::NoGroupStructure("configuration defines a general qubit substitution".into())),
        }
    }
}

fn field(name: &str, err: impl std::fmt::Display) -> Error {
    Error::Config { field: name.into(), message: err.to_string() }
}

impl SystemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let name = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.contains("field"))
                .unwrap_or("<document>")
                .to_string();
            Error::Config { field: name, message: msg }
        })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| field("<file>", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn expansion_matrix(&self) -> Result<IntMatrix> {
        let m = self.m;
        if m == 0 {
            return Err(field("m", "dimension must be positive"));
        }
        let q = match &self.q {
            MatrixSpec::Scalar(v) if m == 1 => IntMatrix::scalar(*v),
            MatrixSpec::Scalar(_) => return Err(field("Q", format!("a scalar only describes m = 1, got m = {m}"))),
            MatrixSpec::Rows(rows) => IntMatrix::from_rows(rows).map_err(|e| field("Q", e))?,
            MatrixSpec::Flat(v) => IntMatrix::new(m, v.clone()).map_err(|e| field("Q", e))?,
        };
        if q.dim() != m {
            return Err(field("Q", format!("Q is {0}x{0} but m = {m}", q.dim())));
        }
        Ok(q)
    }

    pub fn digit_system(&self) -> Result<DigitSystem> {
        let q = self.expansion_matrix()?;
        let digits: Vec<Vec<i64>> = self.digits.iter().map(ResidueSpec::to_vec).collect();
        DigitSystem::new(q, digits).map_err(|e| match e {
            Error::DegenerateExpansion | Error::NotExpansive { .. } => field("Q", e),
            Error::InvalidDigitSystem(_) | Error::Dimension(_) => field("digits", e),
            other => other,
        })
    }

    pub fn build(&self) -> Result<System> {
        let digits = self.digit_system()?;
        match (&self.group_orders, &self.w, &self.alphabet, &self.rules) {
            (Some(orders), Some(w), None, None) => {
                let group = AbelianGroup::new(orders.clone()).map_err(|e| field("group_orders", e))?;
                let rows: Vec<Vec<Vec<i64>>> =
                    w.iter().map(|r| r.iter().map(ResidueSpec::to_vec).collect()).collect();
                let w = SpinMatrix::from_residues(&group, &rows).map_err(|e| field("W", e))?;
                SpinSystem::new(digits, group, w).map(System::Spin).map_err(|e| field("W", e))
            }
            (None, None, Some(alphabet), Some(rules)) => {
                if rules.len() != alphabet.len() {
                    return Err(field("rules", format!("{} rules for {} letters", rules.len(), alphabet.len())));
                }
                let lookup = |s: &String| {
                    alphabet
                        .iter()
                        .position(|a| a == s)
                        .map(|i| i as u32)
                        .ok_or_else(|| field("rules", format!("unknown letter `{s}`")))
                };
                let table = rules
                    .iter()
                    .map(|r| r.iter().map(lookup).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                QubitSubstitution::new(digits, table, Some(alphabet.clone()))
                    .map(System::Qubit)
                    .map_err(|e| field("rules", e))
            }
            _ => Err(field(
                "W",
                "give either `group_orders` with `W` (spin system) or `alphabet` with `rules` (qubit substitution)",
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_forms() {
        let c = SystemConfig::from_json(
            r#"{"m":1,"Q":2,"digits":[0,1],"group_orders":[2],"W":[[0,0],[0,1]]}"#,
        )
        .unwrap();
        assert!(matches!(c.build().unwrap(), System::Spin(_)));
    }

    #[test]
    fn flat_matrix() {
        let c = SystemConfig::from_json(
            r#"{"m":2,"Q":[1,-1,1,1],"digits":[[0,0],[1,0]],"group_orders":[2],"W":[[0,0],[0,1]]}"#,
        )
        .unwrap();
        assert!(c.build().is_ok());
    }

    #[test]
    fn bad_digits_name_field() {
        let c = SystemConfig::from_json(r#"{"m":1,"Q":2,"digits":[0,2],"group_orders":[2],"W":[[0,0],[0,1]]}"#)
            .unwrap();
        match c.build().unwrap_err() {
            Error::Config { field, message } => {
                assert_eq!(field, "digits");
                assert!(message.contains("same coset"));
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn unknown_field_reported() {
        let err = SystemConfig::from_json(r#"{"m":1,"Q":2,"digits":[0,1],"colour":1}"#).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "colour"), "{err:?}");
    }

    #[test]
    fn qubit_form() {
        let c = SystemConfig::from_json(
            r#"{"m":1,"Q":3,"digits":[0,1,2],"alphabet":["a","b"],"rules":[["a","b","a"],["b","a","b"]]}"#,
        )
        .unwrap();
        let System::Qubit(q) = c.build().unwrap() else { panic!() };
        assert_eq!(q.describe(), vec!["a->aba", "b->bab"]);
    }

    #[test]
    fn missing_w() {
        let c = SystemConfig::from_json(r#"{"m":1,"Q":2,"digits":[0,1],"group_orders":[2]}"#).unwrap();
        assert!(matches!(c.build().unwrap_err(), Error::Config { .. }));
    }
}

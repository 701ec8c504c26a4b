//! N-graded Lie algebras with one-dimensional components.
//!
//! An algebra is a rule `c(i, j)` with `[e_i, e_j] = c(i, j) e_{i+j}`. Nothing is
//! materialized; callers truncate at the point of use.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Cutoff used by the Jacobi gate on user-supplied algebras.
pub const DEFAULT_JACOBI_CUTOFF: u32 = 50;

/// Sparse element of the algebra: `(index, coefficient)` pairs, indices ascending.
pub type Element = Vec<(u32, Rational)>;

/// Anything that can bracket basis vectors.
///
/// `bracket` returns `None` when the value is not known, e.g. a deformed bracket
/// whose correction terms were only computed inside a window.
pub trait Bracket {
    fn bracket(&self, i: u32, j: u32) -> Option<Element>;
}

#[derive(Clone, Debug)]
enum Rule {
    M0,
    M2,
    Witt,
    Table {
        constants: BTreeMap<(u32, u32), Rational>,
        default: Rational,
    },
}

#[derive(Clone, Debug)]
pub struct GradedLieAlgebra {
    name: String,
    rule: Arc<Rule>,
}

impl GradedLieAlgebra {
    pub fn m0() -> Self {
        Self { name: "m0".into(), rule: Arc::new(Rule::M0) }
    }

    pub fn m2() -> Self {
        Self { name: "m2".into(), rule: Arc::new(Rule::M2) }
    }

    /// Positive part of the Witt algebra, `[e_i, e_j] = (j - i) e_{i+j}`.
    pub fn l1() -> Self {
        Self { name: "L1".into(), rule: Arc::new(Rule::Witt) }
    }

    /// Builds an algebra from explicit constants for pairs `i < j` (or `i > j`,
    /// which are flipped with a sign). Unlisted pairs get `default`.
    ///
    /// No Jacobi check happens here; see [`GradedLieAlgebra::from_json`] for the gated path.
    pub fn from_constants(
        name: impl Into<String>,
        constants: impl IntoIterator<Item = (u32, u32, Rational)>,
        default: Rational,
    ) -> Result<Self> {
        let mut table: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
        for (i, j, c) in constants {
            if i == 0 || j == 0 {
                return Err(Error::Config(format!("index 0 in constant ({i}, {j})")));
            }
            if i == j {
                if !c.is_zero() {
                    return Err(Error::Config(format!("c({i}, {i}) must vanish")));
                }
                continue;
            }
            let (key, val) = if i < j { ((i, j), c) } else { ((j, i), -c) };
            if let Some(prev) = table.get(&key) {
                if *prev != val {
                    return Err(Error::Config(format!(
                        "conflicting constants for pair {key:?}: {prev} vs {val}"
                    )));
                }
            }
            table.insert(key, val);
        }
        Ok(Self {
            name: name.into(),
            rule: Arc::new(Rule::Table { constants: table, default }),
        })
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "m0" => Ok(Self::m0()),
            "m2" => Ok(Self::m2()),
            "L1" | "l1" => Ok(Self::l1()),
            other => Err(Error::Config(format!(
                "unknown algebra preset {other:?} (expected m0, m2 or L1)"
            ))),
        }
    }

    /// Parses the JSON algebra document and runs the Jacobi gate at `jacobi_cutoff`.
    pub fn from_json(text: &str, jacobi_cutoff: u32) -> Result<Self> {
        let doc: AlgebraDocument = serde_json::from_str(text)?;
        let default = match &doc.default {
            Some(s) => rational::parse(s)?,
            None => Rational::zero(),
        };
        let mut constants = Vec::with_capacity(doc.constants.len());
        for (i, j, c) in &doc.constants {
            constants.push((*i, *j, rational::parse(c)?));
        }
        let alg = Self::from_constants(doc.name, constants, default)?;
        if let JacobiReport::Fail { triple, residual } = verify_jacobi(&alg, jacobi_cutoff) {
            return Err(Error::Config(format!(
                "algebra {:?} violates the Jacobi identity at {triple:?} (residual {})",
                alg.name,
                format_element(&residual)
            )));
        }
        Ok(alg)
    }

    pub fn load(path: &Path, jacobi_cutoff: u32) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text, jacobi_cutoff)
    }

    /// Resolves a preset name, falling back to a JSON file path.
    pub fn resolve(selector: &str, jacobi_cutoff: u32) -> Result<Self> {
        match Self::preset(selector) {
            Ok(alg) => Ok(alg),
            Err(err) => {
                let path = Path::new(selector);
                if path.exists() {
                    Self::load(path, jacobi_cutoff)
                } else {
                    Err(err)
                }
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// `c(i, j)` with `[e_i, e_j] = c(i, j) e_{i+j}`.
    pub fn bracket_coeff(&self, i: u32, j: u32) -> Rational {
        if i == j {
            return Rational::zero();
        }
        let (lo, hi, sign) = if i < j { (i, j, 1) } else { (j, i, -1) };
        let c = match &*self.rule {
            Rule::M0 => i64::from(lo == 1),
            Rule::M2 => i64::from(lo == 1 || lo == 2),
            Rule::Witt => i64::from(hi) - i64::from(lo),
            Rule::Table { constants, default } => {
                let c = constants.get(&(lo, hi)).unwrap_or(default).clone();
                return if sign > 0 { c } else { -c };
            }
        };
        rational::int(sign * c)
    }
}

impl fmt::Display for GradedLieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl Bracket for GradedLieAlgebra {
    fn bracket(&self, i: u32, j: u32) -> Option<Element> {
        let c = self.bracket_coeff(i, j);
        Some(if c.is_zero() { Vec::new() } else { vec![(i + j, c)] })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraDocument {
    pub name: String,
    pub constants: Vec<(u32, u32, String)>,
    #[serde(default)]
    pub default: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JacobiReport {
    Pass { triples_checked: usize },
    Fail { triple: (u32, u32, u32), residual: Element },
}

impl JacobiReport {
    pub fn passed(&self) -> bool {
        matches!(self, JacobiReport::Pass { .. })
    }
}

pub(crate) fn add_scaled(acc: &mut BTreeMap<u32, Rational>, elem: &[(u32, Rational)], scale: &Rational) {
    for (idx, c) in elem {
        let entry = acc.entry(*idx).or_insert_with(Rational::zero);
        *entry += c * scale;
        if entry.is_zero() {
            acc.remove(idx);
        }
    }
}

/// `[x, e_k]` for a sparse element `x`; `None` if any needed bracket is unknown.
fn bracket_with_basis<B: Bracket + ?Sized>(alg: &B, x: &[(u32, Rational)], k: u32) -> Option<BTreeMap<u32, Rational>> {
    let mut acc = BTreeMap::new();
    for (idx, c) in x {
        let b = alg.bracket(*idx, k)?;
        add_scaled(&mut acc, &b, c);
    }
    Some(acc)
}

/// Checks `[[e_i,e_j],e_k] + cyclic = 0` for all `1 <= i < j < k <= cutoff`.
/// Triples whose brackets are not known (see [`Bracket`]) are skipped.
pub fn verify_jacobi<B: Bracket + ?Sized>(alg: &B, cutoff: u32) -> JacobiReport {
    let mut checked = 0;
    for i in 1..=cutoff {
        for j in i + 1..=cutoff {
            for k in j + 1..=cutoff {
                let mut total = BTreeMap::new();
                let mut known = true;
                for (x, y, z) in [(i, j, k), (j, k, i), (k, i, j)] {
                    let inner = match alg.bracket(x, y) {
                        Some(v) => v,
                        None => {
                            known = false;
                            break;
                        }
                    };
                    match bracket_with_basis(alg, &inner, z) {
                        Some(outer) => {
                            for (idx, c) in outer {
                                let entry = total.entry(idx).or_insert_with(Rational::zero);
                                *entry += c;
                            }
                        }
                        None => {
                            known = false;
                            break;
                        }
                    }
                }
                if !known {
                    continue;
                }
                checked += 1;
                let residual: Element = total.into_iter().filter(|(_, c)| !c.is_zero()).collect();
                if !residual.is_empty() {
                    return JacobiReport::Fail { triple: (i, j, k), residual };
                }
            }
        }
    }
    JacobiReport::Pass { triples_checked: checked }
}

/// Smallest `k` such that `span{e_k, e_{k+1}, ...}` is an abelian ideal as far as the
/// window `1..=cutoff` can tell.
///
/// The candidate must contain at least two basis vectors of the window (`k < cutoff`),
/// otherwise the abelian test would be vacuous; `None` means no such `k` exists.
/// Targets beyond the window count as inside the ideal. Unknown brackets are skipped.
pub fn abelian_ideal_floor<B: Bracket + ?Sized>(alg: &B, cutoff: u32) -> Option<u32> {
    'candidate: for k in 1..cutoff {
        for i in k..=cutoff {
            for j in i + 1..=cutoff {
                if let Some(b) = alg.bracket(i, j) {
                    if !b.is_empty() {
                        continue 'candidate;
                    }
                }
            }
        }
        for i in 1..k {
            for j in k..=cutoff {
                if let Some(b) = alg.bracket(i, j) {
                    if b.iter().any(|(t, _)| *t < k) {
                        continue 'candidate;
                    }
                }
            }
        }
        return Some(k);
    }
    None
}

pub fn format_element(x: &[(u32, Rational)]) -> String {
    if x.is_empty() {
        return "0".into();
    }
    x.iter()
        .map(|(i, c)| format!("{}*e{}", rational::format(c), i))
        .collect::<Vec<_>>()
        .join(" + ")
}

//! Graded pieces of the Cox ring `S = C[x_rho]`: monomial bases through the
//! lattice-point bijection, monomial products and their classes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::divisor::{DivisorClass, DivisorError, ToricVariety, WeilDivisor};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoxError {
    #[error(transparent)]
    Divisor(#[from] DivisorError),
    #[error("cannot parse monomial {text:?}: {reason}")]
    Parse { text: String, reason: String },
    #[error("monomial has {got} variables, expected {expected}")]
    VariableCount { expected: usize, got: usize },
}

/// `prod_rho x_rho^{e_rho}` stored by exponent vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial { exps }
    }

    pub fn one(n: usize) -> Self {
        Monomial { exps: vec![0; n] }
    }

    pub fn variable(n: usize, i: usize) -> Self {
        let mut exps = vec![0; n];
        exps[i] = 1;
        Monomial { exps }
    }

    pub fn pure_power(n: usize, i: usize, k: u32) -> Self {
        let mut exps = vec![0; n];
        exps[i] = k;
        Monomial { exps }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    /// The divisor `sum e_rho D_rho` this monomial determines.
    pub fn divisor(&self) -> WeilDivisor {
        WeilDivisor::new(self.exps.iter().map(|&e| i64::from(e)).collect())
    }

    /// Divides by `x_rho` once, if possible.
    pub fn lower(&self, rho: usize) -> Option<Monomial> {
        if self.exps[rho] == 0 {
            return None;
        }
        let mut exps = self.exps.clone();
        exps[rho] -= 1;
        Some(Monomial { exps })
    }

    /// Parses `x0^2*x3` (or `1`) over `n` variables.
    pub fn parse(text: &str, n: usize) -> Result<Monomial, CoxError> {
        let err = |reason: &str| CoxError::Parse {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let mut exps = vec![0u32; n];
        let t = text.trim();
        if t == "1" {
            return Ok(Monomial { exps });
        }
        if t.is_empty() {
            return Err(err("empty"));
        }
        for factor in t.split('*') {
            let factor = factor.trim();
            let body = factor.strip_prefix('x').ok_or_else(|| err("factors look like x<index>[^<exp>]"))?;
            let (idx, exp) = match body.split_once('^') {
                Some((i, e)) => (i, e.trim().parse::<u32>().map_err(|_| err("bad exponent"))?),
                None => (body, 1),
            };
            let idx: usize = idx.trim().parse().map_err(|_| err("bad variable index"))?;
            if idx >= n {
                return Err(err(&format!("variable x{idx} out of range for {n} variables")));
            }
            exps[idx] += exp;
        }
        Ok(Monomial { exps })
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| if e == 1 { format!("x{i}") } else { format!("x{i}^{e}") })
            .collect();
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

impl Serialize for Monomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Textual form without a known variable count; the count is inferred from
/// the largest index. Prefer [`Monomial::parse`].
impl FromStr for Monomial {
    type Err = CoxError;
    fn from_str(s: &str) -> Result<Self, CoxError> {
        let max = s
            .split('*')
            .filter_map(|f| f.trim().strip_prefix('x'))
            .filter_map(|b| b.split('^').next()?.trim().parse::<usize>().ok())
            .max()
            .map_or(0, |m| m + 1);
        Monomial::parse(s, max)
    }
}

impl<'de> Deserialize<'de> for Monomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn multiply(a: &Monomial, b: &Monomial) -> Monomial {
    assert_eq!(a.exps.len(), b.exps.len(), "monomials over different rings");
    Monomial {
        exps: a.exps.iter().zip(&b.exps).map(|(x, y)| x + y).collect(),
    }
}

pub fn class_of_monomial(var: &ToricVariety, m: &Monomial) -> Result<DivisorClass, CoxError> {
    if m.len() != var.ray_count() {
        return Err(CoxError::VariableCount {
            expected: var.ray_count(),
            got: m.len(),
        });
    }
    Ok(var.class_of(&m.divisor())?)
}

/// Monomial basis of `S_gamma`, lexicographic on exponent vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GradedPieceBasis {
    pub class: DivisorClass,
    pub representative: WeilDivisor,
    pub monomials: Vec<Monomial>,
}

impl GradedPieceBasis {
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    /// Position of a monomial in the basis.
    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        self.monomials.binary_search(m).ok()
    }
}

/// Monomials of the class of `d`: `m -> (<m, u_rho> + d_rho)_rho` over the
/// lattice points of `P_d`.
pub fn monomials_of_divisor(var: &ToricVariety, d: &WeilDivisor) -> Result<Vec<Monomial>, CoxError> {
    let poly = var.polytope(d)?;
    let mut out: Vec<Monomial> = poly
        .lattice_points()?
        .iter()
        .map(|m| {
            let exps = var
                .fan()
                .rays()
                .iter()
                .zip(&d.coeffs)
                .map(|(u, &a)| {
                    let v: i64 = u.iter().zip(m).map(|(x, y)| x * y).sum::<i64>() + a;
                    u32::try_from(v).expect("lattice points give nonnegative exponents")
                })
                .collect();
            Monomial { exps }
        })
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

pub fn monomials_of_class(var: &ToricVariety, gamma: &DivisorClass) -> Result<GradedPieceBasis, CoxError> {
    let representative = var.representative(gamma)?;
    let monomials = monomials_of_divisor(var, &representative)?;
    Ok(GradedPieceBasis {
        class: gamma.clone(),
        representative,
        monomials,
    })
}

pub fn dim_graded_piece(var: &ToricVariety, gamma: &DivisorClass) -> Result<usize, CoxError> {
    Ok(monomials_of_class(var, gamma)?.len())
}

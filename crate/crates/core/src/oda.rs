//! Surjectivity of `S_alpha (x) S_beta -> S_{alpha+beta}` via integer
//! decomposition of lattice points in the Minkowski sum of divisor polytopes.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::divisor::{DivisorClass, DivisorError, ToricVariety, WeilDivisor};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OdaError {
    #[error(transparent)]
    Divisor(#[from] DivisorError),
    #[error("L is not an ample Cartier divisor")]
    NotAmple,
    #[error("p*beta - beta0 = {class} is not nef")]
    PreconditionNef { class: DivisorClass },
    #[error("bounds must be at least 1")]
    Bounds,
}

/// `point = left + right` with `left` in `P_alpha`, `right` in `P_beta`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompositionWitness {
    pub point: Vec<i64>,
    pub left: Vec<i64>,
    pub right: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OdaPairReport {
    pub alpha: DivisorClass,
    pub beta: DivisorClass,
    pub alpha_divisor: WeilDivisor,
    pub beta_divisor: WeilDivisor,
    pub target_points: usize,
    pub surjective: bool,
    pub undecomposable: Vec<Vec<i64>>,
    pub decomposition_witness: Vec<DecompositionWitness>,
}

impl OdaPairReport {
    /// Re-checks every witness by addition and polytope membership.
    pub fn verify_witnesses(&self, var: &ToricVariety) -> Result<bool, DivisorError> {
        let pa = var.polytope(&self.alpha_divisor)?;
        let pb = var.polytope(&self.beta_divisor)?;
        let pt = var.polytope(&(&self.alpha_divisor + &self.beta_divisor))?;
        Ok(self.decomposition_witness.iter().all(|w| {
            w.left.iter().zip(&w.right).map(|(a, b)| a + b).eq(w.point.iter().copied())
                && pa.contains(&w.left)
                && pb.contains(&w.right)
                && pt.contains(&w.point)
        }))
    }
}

/// Checks the pair using the canonical representatives of both classes.
pub fn check_pair(var: &ToricVariety, alpha: &DivisorClass, beta: &DivisorClass) -> Result<OdaPairReport, OdaError> {
    let da = var.representative(alpha)?;
    let db = var.representative(beta)?;
    check_pair_divisors(var, &da, &db)
}

/// Checks the pair on explicit representatives; the target is `P_{da+db}`.
pub fn check_pair_divisors(var: &ToricVariety, da: &WeilDivisor, db: &WeilDivisor) -> Result<OdaPairReport, OdaError> {
    let pa = var.polytope(da)?;
    let pb = var.polytope(db)?;
    let pt = var.polytope(&(da + db))?;
    let a_pts = pa.lattice_points()?;
    let b_pts = pb.lattice_points()?;
    let t_pts = pt.lattice_points()?;

    // hash the smaller factor, iterate the other
    let a_hashed = a_pts.len() <= b_pts.len();
    let (hashed, iterated) = if a_hashed { (a_pts, b_pts) } else { (b_pts, a_pts) };
    let hashed: HashSet<&[i64]> = hashed.iter().map(Vec::as_slice).collect();

    let mut undecomposable = Vec::new();
    let mut witnesses = Vec::with_capacity(t_pts.len());
    let mut diff = vec![0i64; var.dim()];
    for w in t_pts {
        let found = iterated.iter().find(|u| {
            for ((d, x), y) in diff.iter_mut().zip(w).zip(u.iter()) {
                *d = x - y;
            }
            hashed.contains(diff.as_slice())
        });
        match found {
            Some(u) => {
                let v: Vec<i64> = w.iter().zip(u).map(|(x, y)| x - y).collect();
                let (left, right) = if a_hashed { (v, u.clone()) } else { (u.clone(), v) };
                witnesses.push(DecompositionWitness {
                    point: w.clone(),
                    left,
                    right,
                });
            }
            None => undecomposable.push(w.clone()),
        }
    }
    Ok(OdaPairReport {
        alpha: var.class_of(da)?,
        beta: var.class_of(db)?,
        alpha_divisor: da.clone(),
        beta_divisor: db.clone(),
        target_points: t_pts.len(),
        surjective: undecomposable.is_empty(),
        undecomposable,
        decomposition_witness: witnesses,
    })
}

/// The pair `(beta, p*beta - beta0)` with `beta = [L]`.
pub fn check_hodge_pair(var: &ToricVariety, l: &WeilDivisor, p: u32) -> Result<OdaPairReport, OdaError> {
    if !var.is_ample(l)? {
        return Err(OdaError::NotAmple);
    }
    let second = &l.scale(i64::from(p)) - &var.anticanonical_divisor();
    if !var.is_nef(&second)? {
        return Err(OdaError::PreconditionNef {
            class: var.class_of(&second)?,
        });
    }
    check_pair_divisors(var, l, &second)
}

/// All (ample, nef) pairs among divisors with coefficients in
/// `[0, coeff_bound]`, one representative per class, at most `count_bound`
/// pairs. Order: lexicographic on the representatives.
pub fn search(var: &ToricVariety, coeff_bound: i64, count_bound: usize) -> Result<Vec<OdaPairReport>, OdaError> {
    if coeff_bound < 1 || count_bound < 1 {
        return Err(OdaError::Bounds);
    }
    let n = var.ray_count();
    let mut seen = BTreeSet::new();
    let mut ample = Vec::new();
    let mut nef = Vec::new();
    let mut coeffs = vec![0i64; n];
    loop {
        let d = WeilDivisor::new(coeffs.clone());
        let class = var.class_of(&d)?;
        if seen.insert(class.coords()) && var.is_nef(&d)? {
            if var.is_ample(&d)? {
                ample.push(d.clone());
            }
            nef.push(d);
        }
        if !advance(&mut coeffs, coeff_bound) {
            break;
        }
    }
    let mut out = Vec::new();
    'outer: for a in &ample {
        for b in &nef {
            if out.len() >= count_bound {
                break 'outer;
            }
            out.push(check_pair_divisors(var, a, b)?);
        }
    }
    Ok(out)
}

/// Odometer step over `[0, bound]^n`, last coordinate fastest.
fn advance(coeffs: &mut [i64], bound: i64) -> bool {
    for c in coeffs.iter_mut().rev() {
        if *c < bound {
            *c += 1;
            return true;
        }
        *c = 0;
    }
    false
}

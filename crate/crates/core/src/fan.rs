//! Simplicial fans, their validation, and generators for the standard
//! families (projective and weighted projective spaces, products,
//! Hirzebruch surfaces, projectivized split bundles).

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{self, IntMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FanError {
    #[error("fan dimension must be positive")]
    ZeroDimension,
    #[error("ray {index} has {got} coordinates, expected {expected}")]
    RayDimension { index: usize, expected: usize, got: usize },
    #[error("cone {cone} references ray {ray}, but the fan has {count} rays")]
    IndexOutOfRange { cone: usize, ray: usize, count: usize },
    #[error("rays {first} and {second} span the same half-line")]
    DuplicateRay { first: usize, second: usize },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid twist: {0}")]
    InvalidTwist(String),
    #[error("point is not in the support of the fan")]
    NotInSupport,
}

/// A fan given by its rays and maximal cones (0-based indices into `rays`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawFan")]
pub struct Fan {
    dim: usize,
    rays: Vec<Vec<i64>>,
    max_cones: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct RawFan {
    dim: usize,
    rays: Vec<Vec<i64>>,
    max_cones: Vec<Vec<usize>>,
}

impl TryFrom<RawFan> for Fan {
    type Error = FanError;
    fn try_from(r: RawFan) -> Result<Fan, FanError> {
        Fan::new(r.dim, r.rays, r.max_cones)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub is_simplicial: bool,
    pub is_complete: bool,
    pub rays_primitive: bool,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn gcd_of(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

impl Fan {
    /// Structural construction: checks coordinate counts, index bounds and
    /// duplicate ray directions. Cone index lists are sorted.
    pub fn new(dim: usize, rays: Vec<Vec<i64>>, max_cones: Vec<Vec<usize>>) -> Result<Fan, FanError> {
        if dim == 0 {
            return Err(FanError::ZeroDimension);
        }
        for (index, r) in rays.iter().enumerate() {
            if r.len() != dim {
                return Err(FanError::RayDimension {
                    index,
                    expected: dim,
                    got: r.len(),
                });
            }
        }
        let mut seen: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
        for (i, r) in rays.iter().enumerate() {
            let g = gcd_of(r);
            if g == 0 {
                continue;
            }
            let dir: Vec<i64> = r.iter().map(|x| x / g).collect();
            if let Some(&first) = seen.get(&dir) {
                return Err(FanError::DuplicateRay { first, second: i });
            }
            seen.insert(dir, i);
        }
        let mut cones = max_cones;
        for (c, cone) in cones.iter_mut().enumerate() {
            if let Some(&ray) = cone.iter().find(|&&r| r >= rays.len()) {
                return Err(FanError::IndexOutOfRange {
                    cone: c,
                    ray,
                    count: rays.len(),
                });
            }
            cone.sort_unstable();
        }
        Ok(Fan {
            dim,
            rays,
            max_cones: cones,
        })
    }

    /// Divides every ray by the gcd of its coordinates.
    pub fn with_primitive_rays(mut self) -> Fan {
        for r in &mut self.rays {
            let g = gcd_of(r);
            if g > 1 {
                r.iter_mut().for_each(|x| *x /= g);
            }
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> &[i64] {
        &self.rays[i]
    }

    pub fn ray_count(&self) -> usize {
        self.rays.len()
    }

    pub fn max_cones(&self) -> &[Vec<usize>] {
        &self.max_cones
    }

    /// Ray matrix (one row per ray): the map `m -> (<m, u_rho>)_rho`.
    pub fn ray_matrix(&self) -> IntMatrix {
        IntMatrix::from_rows(&self.rays)
    }

    /// Generator matrix of a maximal cone (rows are its rays).
    pub fn cone_matrix(&self, cone: usize) -> IntMatrix {
        let rows: Vec<&[i64]> = self.max_cones[cone].iter().map(|&r| self.rays[r].as_slice()).collect();
        IntMatrix::from_rows(&rows)
    }

    /// |det| of a maximal cone's generators; 1 exactly on smooth cones.
    pub fn cone_multiplicity(&self, cone: usize) -> BigInt {
        self.cone_matrix(cone).determinant().abs()
    }

    pub fn is_smooth(&self) -> bool {
        (0..self.max_cones.len()).all(|c| self.cone_multiplicity(c).is_one())
    }

    fn det_of(&self, ids: &[usize]) -> BigInt {
        let rows: Vec<&[i64]> = ids.iter().map(|&r| self.rays[r].as_slice()).collect();
        IntMatrix::from_rows(&rows).determinant()
    }

    pub fn validate(&self) -> ValidationReport {
        let d = self.dim;
        let mut violations = Vec::new();

        let mut rays_primitive = true;
        for (i, r) in self.rays.iter().enumerate() {
            let g = gcd_of(r);
            if g != 1 {
                rays_primitive = false;
                violations.push(format!("ray {i} {r:?} is not primitive (gcd {g})"));
            }
        }

        let mut is_simplicial = true;
        for (c, cone) in self.max_cones.iter().enumerate() {
            let distinct: BTreeSet<usize> = cone.iter().copied().collect();
            if cone.len() != d || distinct.len() != d {
                is_simplicial = false;
                violations.push(format!("cone {c} has {} distinct rays, expected {d}", distinct.len()));
            } else if self.det_of(cone).is_zero() {
                is_simplicial = false;
                violations.push(format!("cone {c} has linearly dependent generators"));
            }
        }
        if self.max_cones.is_empty() {
            is_simplicial = false;
            violations.push("fan has no maximal cones".to_string());
        }

        let mut is_complete = true;
        let used: BTreeSet<usize> = self.max_cones.iter().flatten().copied().collect();
        for i in 0..self.rays.len() {
            if !used.contains(&i) {
                is_complete = false;
                violations.push(format!("ray {i} lies in no maximal cone"));
            }
        }

        if !is_simplicial {
            is_complete = false;
            violations.push("completeness not certified: fan is not simplicial".to_string());
        } else {
            let mut found = Vec::new();
            self.check_completeness(&mut found);
            if !found.is_empty() {
                is_complete = false;
                violations.extend(found);
            }
        }

        ValidationReport {
            is_simplicial,
            is_complete,
            rays_primitive,
            violations,
        }
    }

    /// Pseudo-manifold certificate: every ridge in exactly two maximal cones,
    /// the two apexes on opposite sides of it, a connected adjacency graph,
    /// and an interior point of one cone covered by no other cone.
    fn check_completeness(&self, violations: &mut Vec<String>) {
        let n = self.max_cones.len();
        let mut seen_cones: BTreeMap<&[usize], usize> = BTreeMap::new();
        for (c, cone) in self.max_cones.iter().enumerate() {
            if let Some(&first) = seen_cones.get(cone.as_slice()) {
                violations.push(format!("cones {first} and {c} coincide"));
                return;
            }
            seen_cones.insert(cone, c);
        }

        // ridge -> [(cone, apex ray)]
        let mut ridges: BTreeMap<Vec<usize>, Vec<(usize, usize)>> = BTreeMap::new();
        for (c, cone) in self.max_cones.iter().enumerate() {
            for skip in 0..cone.len() {
                let ridge: Vec<usize> = cone
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != skip)
                    .map(|(_, &r)| r)
                    .collect();
                ridges.entry(ridge).or_default().push((c, cone[skip]));
            }
        }

        let mut adjacency = vec![Vec::new(); n];
        for (ridge, owners) in &ridges {
            if owners.len() != 2 {
                let cones: Vec<usize> = owners.iter().map(|o| o.0).collect();
                violations.push(format!(
                    "facet {ridge:?} lies in {} maximal cone(s) {cones:?}, expected 2",
                    owners.len()
                ));
                continue;
            }
            let (c1, a1) = owners[0];
            let (c2, a2) = owners[1];
            let mut with_a1 = ridge.clone();
            with_a1.push(a1);
            let mut with_a2 = ridge.clone();
            with_a2.push(a2);
            let s1 = self.det_of(&with_a1).signum();
            let s2 = self.det_of(&with_a2).signum();
            if s1 == s2 {
                violations.push(format!(
                    "cones {c1} and {c2} lie on the same side of their common facet {ridge:?}"
                ));
            }
            adjacency[c1].push(c2);
            adjacency[c2].push(c1);
        }
        if !violations.is_empty() {
            return;
        }

        let mut reached = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        reached[0] = true;
        while let Some(c) = queue.pop_front() {
            for &nb in &adjacency[c] {
                if !reached[nb] {
                    reached[nb] = true;
                    queue.push_back(nb);
                }
            }
        }
        if let Some(c) = reached.iter().position(|&r| !r) {
            violations.push(format!("cone {c} is not connected to cone 0 through shared facets"));
            return;
        }

        let interior: Vec<BigRational> = (0..self.dim)
            .map(|k| {
                let s: i64 = self.max_cones[0].iter().map(|&r| self.rays[r][k]).sum();
                BigRational::from_integer(BigInt::from(s))
            })
            .collect();
        for c in 1..n {
            if self.cone_contains(c, &interior) {
                violations.push(format!("cone {c} overlaps the interior of cone 0"));
                return;
            }
        }
    }

    /// Whether `point` is a nonnegative combination of a simplicial cone's rays.
    pub fn cone_contains(&self, cone: usize, point: &[BigRational]) -> bool {
        let denom = point.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
        let rhs: Vec<BigInt> = point.iter().map(|x| (x * &denom).to_integer()).collect();
        let gens = self.cone_matrix(cone).transpose();
        match lattice::solve_rational(&gens, &rhs) {
            Some(lambda) => lambda.iter().all(|l| !l.is_negative()),
            None => false,
        }
    }

    /// Index of some maximal cone containing `point`.
    pub fn cone_containing(&self, point: &[BigRational]) -> Result<usize, FanError> {
        (0..self.max_cones.len())
            .find(|&c| self.cone_contains(c, point))
            .ok_or(FanError::NotInSupport)
    }
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn unit(d: usize, i: usize) -> Vec<i64> {
    let mut e = vec![0; d];
    e[i] = 1;
    e
}

/// P^d with rays `e_1, ..., e_d, -(e_1 + ... + e_d)`.
pub fn projective_space(d: usize) -> Result<Fan, FanError> {
    if d == 0 {
        return Err(FanError::ZeroDimension);
    }
    let mut rays: Vec<Vec<i64>> = (0..d).map(|i| unit(d, i)).collect();
    rays.push(vec![-1; d]);
    Fan::new(d, rays, k_subsets(d + 1, d))
}

/// Weighted projective space `P(w_0, ..., w_n)`: rays `u_i` with
/// `sum w_i u_i = 0`. When some weight equals 1 the remaining rays are the
/// standard basis; otherwise a unimodular completion of `w` is used.
pub fn weighted_projective(weights: &[i64]) -> Result<Fan, FanError> {
    let n = weights.len();
    if n < 2 {
        return Err(FanError::InvalidWeights("need at least two weights".into()));
    }
    if weights.iter().any(|&w| w <= 0) {
        return Err(FanError::InvalidWeights("weights must be positive".into()));
    }
    for skip in 0..n {
        let others: Vec<i64> = (0..n).filter(|&i| i != skip).map(|i| weights[i]).collect();
        if gcd_of(&others) != 1 {
            return Err(FanError::InvalidWeights(format!(
                "weights {weights:?} are not well-formed (dropping index {skip} leaves gcd {})",
                gcd_of(&others)
            )));
        }
    }
    let d = n - 1;
    let rays: Vec<Vec<i64>> = if let Some(k) = weights.iter().position(|&w| w == 1) {
        let mut rays = vec![Vec::new(); n];
        let mut next = 0;
        let mut special = vec![0i64; d];
        for i in (0..n).filter(|&i| i != k) {
            rays[i] = unit(d, next);
            special[next] = -weights[i];
            next += 1;
        }
        rays[k] = special;
        rays
    } else {
        // u^{-1} w = ±e_0; the quotient map Z^n -> Z^n / Zw drops coordinate 0.
        let col = IntMatrix::from_rows(&weights.iter().map(|&w| vec![w]).collect::<Vec<_>>());
        let snf = lattice::smith_normal_form(&col).map_err(|e| FanError::InvalidWeights(e.to_string()))?;
        (0..n)
            .map(|i| {
                let c = snf.u_inv.column(i);
                lattice::to_i64_vec(&c[1..]).ok_or_else(|| FanError::InvalidWeights("overflow".into()))
            })
            .collect::<Result<_, _>>()?
    };
    let cones = (0..n).map(|skip| (0..n).filter(|&i| i != skip).collect()).collect();
    Fan::new(d, rays, cones)
}

/// Product fan: rays `(u, 0)` of the first factor, then `(0, v)` of the second.
pub fn product(f1: &Fan, f2: &Fan) -> Result<Fan, FanError> {
    let (d1, d2) = (f1.dim, f2.dim);
    let mut rays = Vec::with_capacity(f1.ray_count() + f2.ray_count());
    for r in &f1.rays {
        let mut v = r.clone();
        v.extend(std::iter::repeat(0).take(d2));
        rays.push(v);
    }
    for r in &f2.rays {
        let mut v = vec![0; d1];
        v.extend_from_slice(r);
        rays.push(v);
    }
    let offset = f1.ray_count();
    let mut cones = Vec::new();
    for s in &f1.max_cones {
        for t in &f2.max_cones {
            let mut c = s.clone();
            c.extend(t.iter().map(|&i| i + offset));
            cones.push(c);
        }
    }
    Fan::new(d1 + d2, rays, cones)
}

/// Hirzebruch surface F_a with rays `e1, e2, -e1 + a e2, -e2`.
pub fn hirzebruch(a: u32) -> Result<Fan, FanError> {
    let a = i64::from(a);
    Fan::new(
        2,
        vec![vec![1, 0], vec![0, 1], vec![-1, a], vec![0, -1]],
        vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]],
    )
}

/// `P(O ⊕ O(D_1) ⊕ ... ⊕ O(D_r))` over `base`, each `D_k` given by its
/// coefficient vector on the base rays.
///
/// Base rays lift to `(u_rho, D_1[rho], ..., D_r[rho])`; fiber rays are
/// `e_1, ..., e_r, -(e_1 + ... + e_r)` in the new coordinates.
pub fn projectivized_split_bundle(base: &Fan, twists: &[Vec<i64>]) -> Result<Fan, FanError> {
    let r = twists.len();
    if r == 0 {
        return Err(FanError::InvalidTwist("need at least one twist".into()));
    }
    for (k, t) in twists.iter().enumerate() {
        if t.len() != base.ray_count() {
            return Err(FanError::InvalidTwist(format!(
                "twist {k} has {} coefficients, base has {} rays",
                t.len(),
                base.ray_count()
            )));
        }
    }
    let db = base.dim;
    let d = db + r;
    let mut rays = Vec::new();
    for (i, u) in base.rays.iter().enumerate() {
        let mut v = u.clone();
        v.extend(twists.iter().map(|t| t[i]));
        rays.push(v);
    }
    let fiber0 = rays.len();
    for k in 0..r {
        rays.push(unit(d, db + k));
    }
    let mut last = vec![0; db];
    last.extend(std::iter::repeat(-1).take(r));
    rays.push(last);

    let mut cones = Vec::new();
    for s in &base.max_cones {
        for skip in 0..=r {
            let mut c = s.clone();
            c.extend((0..=r).filter(|&k| k != skip).map(|k| fiber0 + k));
            cones.push(c);
        }
    }
    Fan::new(d, rays, cones)
}

/// Normal fan of the lattice tetrahedron `conv{0, e1+e2, e1+e3, e2+e3}`,
/// whose lattice points are only its four vertices. The divisor
/// `2 D_0` recovers the tetrahedron itself.
pub fn non_oda_tetrahedron() -> Fan {
    Fan::new(
        3,
        vec![vec![-1, -1, -1], vec![1, 1, -1], vec![1, -1, 1], vec![-1, 1, 1]],
        k_subsets(4, 3),
    )
    .expect("static fixture")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect()
    }

    #[test]
    fn projective_plane_validates() {
        let f = projective_space(2).unwrap();
        let r = f.validate();
        assert!(r.is_valid(), "{:?}", r.violations);
        assert!(r.is_simplicial && r.is_complete && r.rays_primitive);
    }

    #[test]
    fn missing_cone_breaks_completeness() {
        let f = projective_space(2).unwrap();
        let cones = f.max_cones()[..2].to_vec();
        let g = Fan::new(2, f.rays().to_vec(), cones).unwrap();
        let r = g.validate();
        assert!(r.is_simplicial);
        assert!(!r.is_complete);
        assert!(r.violations.iter().any(|v| v.contains("facet") && v.contains("1 maximal cone")));
    }

    #[test]
    fn non_primitive_ray_reported() {
        let g = Fan::new(
            2,
            vec![vec![2, 4], vec![0, 1], vec![-1, -1]],
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
        )
        .unwrap();
        let r = g.validate();
        assert!(!r.rays_primitive);
        assert!(r.violations.iter().any(|v| v.contains("not primitive")));
        assert!(g.with_primitive_rays().validate().rays_primitive);
    }

    #[test]
    fn structural_errors() {
        assert_eq!(
            Fan::new(2, vec![vec![1, 0]], vec![vec![0, 3]]).unwrap_err(),
            FanError::IndexOutOfRange { cone: 0, ray: 3, count: 1 }
        );
        assert!(matches!(
            Fan::new(2, vec![vec![1, 0], vec![2, 0]], vec![]),
            Err(FanError::DuplicateRay { first: 0, second: 1 })
        ));
        assert!(matches!(Fan::new(2, vec![vec![1]], vec![]), Err(FanError::RayDimension { .. })));
    }

    #[test]
    fn fixture_counts() {
        let p3 = projective_space(3).unwrap();
        assert_eq!((p3.ray_count(), p3.max_cones().len()), (4, 4));
        let w = weighted_projective(&[1, 1, 2, 2, 2, 2]).unwrap();
        assert_eq!((w.dim(), w.ray_count(), w.max_cones().len()), (5, 6, 6));
        let h = hirzebruch(1).unwrap();
        assert_eq!((h.ray_count(), h.max_cones().len()), (4, 4));
        for f in [p3, w, h, non_oda_tetrahedron()] {
            assert!(f.validate().is_valid());
        }
    }

    #[test]
    fn weighted_relation_holds() {
        for w in [vec![1, 1, 2], vec![1, 1, 2, 2, 2, 2], vec![2, 3, 5], vec![3, 4, 5], vec![1, 2, 3]] {
            let f = weighted_projective(&w).unwrap();
            for k in 0..f.dim() {
                let s: i64 = w.iter().zip(f.rays()).map(|(wi, u)| wi * u[k]).sum();
                assert_eq!(s, 0, "weights {w:?}");
            }
            let r = f.validate();
            assert!(r.is_valid(), "weights {w:?}: {:?}", r.violations);
        }
        assert!(weighted_projective(&[1, 2, 2]).is_err());
        assert!(weighted_projective(&[0, 1]).is_err());
    }

    #[test]
    fn product_and_bundle() {
        let p1 = projective_space(1).unwrap();
        let p2 = projective_space(2).unwrap();
        let f = product(&p1, &p2).unwrap();
        assert_eq!(f.dim(), 3);
        assert_eq!(f.ray_count(), 5);
        assert!(f.validate().is_valid());
        let b = projectivized_split_bundle(&p1, &[vec![0, 2]]).unwrap();
        assert!(b.validate().is_valid());
        let b2 = projectivized_split_bundle(&p2, &[vec![1, 0, 0], vec![0, 0, 3]]).unwrap();
        assert_eq!(b2.dim(), 4);
        assert!(b2.validate().is_valid());
        assert!(projectivized_split_bundle(&p2, &[vec![1]]).is_err());
    }

    #[test]
    fn overlapping_cones_detected() {
        // P^2 rays plus a cone that double covers.
        let f = Fan::new(
            2,
            vec![vec![1, 0], vec![0, 1], vec![-1, 0], vec![0, -1]],
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3], vec![0, 2]],
        )
        .unwrap();
        assert!(!f.validate().is_complete);
    }

    #[test]
    fn cone_lookup() {
        let p2 = projective_space(2).unwrap();
        let c = p2.cone_containing(&q(&[1, 1])).unwrap();
        assert_eq!(p2.max_cones()[c], vec![0, 1]);
        assert!(p2.cone_containing(&q(&[0, 0])).is_ok());
        // F_1: (-1, 3) = 1*(-e1 + e2) + 2*e2, inside cone {e2, -e1+e2}.
        let h = hirzebruch(1).unwrap();
        let c = h.cone_containing(&q(&[-1, 3])).unwrap();
        assert_eq!(h.max_cones()[c], vec![1, 2]);
        let half = Fan::new(2, p2.rays().to_vec(), vec![vec![0, 1]]).unwrap();
        assert_eq!(half.cone_containing(&q(&[-1, -3])), Err(FanError::NotInSupport));
    }
}

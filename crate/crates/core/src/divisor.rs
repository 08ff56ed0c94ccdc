//! Torus-invariant divisors and their classes, Cartier data, positivity
//! tests and divisor polytopes with lattice-point enumeration.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fan::{Fan, ValidationReport};
use crate::lattice::{self, AbelianGroupPresentation, Cokernel, IntMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DivisorError {
    #[error("fan failed validation: {}", .0.violations.join("; "))]
    InvalidFan(ValidationReport),
    #[error("divisor has {got} coefficients, the fan has {expected} rays")]
    CoefficientCount { expected: usize, got: usize },
    #[error("class has {got} coordinates, the class group needs {expected}")]
    ClassShape { expected: usize, got: usize },
    #[error("divisor is not ample")]
    NotAmple,
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("integer overflow while {0}")]
    Overflow(&'static str),
}

/// `sum_rho a_rho D_rho`, coefficients parallel to the fan's ray order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WeilDivisor {
    pub coeffs: Vec<i64>,
}

impl WeilDivisor {
    pub fn new(coeffs: Vec<i64>) -> Self {
        WeilDivisor { coeffs }
    }

    pub fn zero(n: usize) -> Self {
        WeilDivisor { coeffs: vec![0; n] }
    }

    pub fn prime(n: usize, ray: usize) -> Self {
        let mut coeffs = vec![0; n];
        coeffs[ray] = 1;
        WeilDivisor { coeffs }
    }

    pub fn scale(&self, k: i64) -> Self {
        WeilDivisor {
            coeffs: self.coeffs.iter().map(|a| a * k).collect(),
        }
    }
}

impl Add for &WeilDivisor {
    type Output = WeilDivisor;
    fn add(self, other: &WeilDivisor) -> WeilDivisor {
        assert_eq!(self.coeffs.len(), other.coeffs.len());
        WeilDivisor {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &WeilDivisor {
    type Output = WeilDivisor;
    fn sub(self, other: &WeilDivisor) -> WeilDivisor {
        assert_eq!(self.coeffs.len(), other.coeffs.len());
        WeilDivisor {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &WeilDivisor {
    type Output = WeilDivisor;
    fn neg(self) -> WeilDivisor {
        self.scale(-1)
    }
}

/// Element of `Cl = Z^r ⊕ ⊕ Z/t_i`; torsion residues kept in `[0, t_i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DivisorClass {
    pub free: Vec<i64>,
    pub torsion: Vec<i64>,
}

impl DivisorClass {
    /// Free part followed by torsion residues.
    pub fn coords(&self) -> Vec<i64> {
        let mut v = self.free.clone();
        v.extend(&self.torsion);
        v
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let free: Vec<String> = self.free.iter().map(i64::to_string).collect();
        if self.torsion.is_empty() && self.free.len() == 1 {
            return write!(f, "{}", free[0]);
        }
        write!(f, "({}", free.join(", "))?;
        if !self.torsion.is_empty() {
            let t: Vec<String> = self.torsion.iter().map(i64::to_string).collect();
            write!(f, " | {}", t.join(", "))?;
        }
        write!(f, ")")
    }
}

/// Per-cone data `m_sigma` with `<m_sigma, u_rho> = -a_rho` for `rho` in `sigma`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CartierData {
    Cartier { m: Vec<Vec<i64>> },
    /// No integral solution; `denominator` is the lcm of all denominators.
    QCartierOnly { denominator: i64, m: Vec<Vec<BigRational>> },
}

impl CartierData {
    pub fn is_cartier(&self) -> bool {
        matches!(self, CartierData::Cartier { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum VeryAmple {
    Yes,
    /// `missing` is a lattice point of the dual cone of `cone` outside the
    /// semigroup generated by the shifted polytope points.
    No { cone: usize, missing: Vec<i64> },
    /// Every candidate generator up to the bound is generated.
    VerifiedUpToBound(usize),
}

/// Torus-invariant geometry of a validated fan together with its class group.
#[derive(Debug, Clone)]
pub struct ToricVariety {
    fan: Fan,
    cokernel: Cokernel,
    torsion: Vec<i64>,
}

impl ToricVariety {
    pub fn new(fan: Fan) -> Result<Self, DivisorError> {
        let report = fan.validate();
        if !report.is_valid() {
            return Err(DivisorError::InvalidFan(report));
        }
        let cokernel = lattice::cokernel(&fan.ray_matrix());
        let torsion = lattice::to_i64_vec(&cokernel.group.torsion).ok_or(DivisorError::Overflow("reading torsion"))?;
        Ok(ToricVariety {
            fan,
            cokernel,
            torsion,
        })
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn dim(&self) -> usize {
        self.fan.dim()
    }

    pub fn ray_count(&self) -> usize {
        self.fan.ray_count()
    }

    pub fn class_group(&self) -> &AbelianGroupPresentation {
        &self.cokernel.group
    }

    /// Projection `Z^rays -> Cl` in presentation coordinates, as i64 rows.
    pub fn class_projection(&self) -> Vec<Vec<i64>> {
        let p = self.cokernel.projection_matrix();
        (0..p.rows())
            .map(|i| lattice::to_i64_vec(p.row(i)).expect("projection fits in i64"))
            .collect()
    }

    fn check_len(&self, d: &WeilDivisor) -> Result<(), DivisorError> {
        if d.coeffs.len() != self.ray_count() {
            return Err(DivisorError::CoefficientCount {
                expected: self.ray_count(),
                got: d.coeffs.len(),
            });
        }
        Ok(())
    }

    fn class_from_coords(&self, c: &[BigInt]) -> DivisorClass {
        let r = self.cokernel.group.free_rank;
        let v = lattice::to_i64_vec(c).expect("class coordinates fit in i64");
        DivisorClass {
            free: v[..r].to_vec(),
            torsion: v[r..].to_vec(),
        }
    }

    pub fn class_of(&self, d: &WeilDivisor) -> Result<DivisorClass, DivisorError> {
        self.check_len(d)?;
        Ok(self.class_from_coords(&self.cokernel.project(&lattice::to_big_vec(&d.coeffs))))
    }

    pub fn ray_class(&self, ray: usize) -> DivisorClass {
        self.class_of(&WeilDivisor::prime(self.ray_count(), ray))
            .expect("prime divisor has the right length")
    }

    /// `-K = sum_rho D_rho` as a divisor.
    pub fn anticanonical_divisor(&self) -> WeilDivisor {
        WeilDivisor::new(vec![1; self.ray_count()])
    }

    pub fn anticanonical_class(&self) -> DivisorClass {
        self.class_of(&self.anticanonical_divisor()).expect("length matches")
    }

    pub fn zero_class(&self) -> DivisorClass {
        DivisorClass {
            free: vec![0; self.cokernel.group.free_rank],
            torsion: vec![0; self.torsion.len()],
        }
    }

    /// Class from flat coordinates (free part, then torsion residues).
    pub fn class_from(&self, coords: &[i64]) -> Result<DivisorClass, DivisorError> {
        let r = self.cokernel.group.free_rank;
        let expected = r + self.torsion.len();
        if coords.len() != expected {
            return Err(DivisorError::ClassShape {
                expected,
                got: coords.len(),
            });
        }
        let mut c = DivisorClass {
            free: coords[..r].to_vec(),
            torsion: coords[r..].to_vec(),
        };
        self.reduce(&mut c);
        Ok(c)
    }

    fn reduce(&self, c: &mut DivisorClass) {
        for (x, t) in c.torsion.iter_mut().zip(&self.torsion) {
            *x = x.mod_floor(t);
        }
    }

    pub fn add_classes(&self, a: &DivisorClass, b: &DivisorClass) -> DivisorClass {
        self.combine(a, b, 1)
    }

    pub fn sub_classes(&self, a: &DivisorClass, b: &DivisorClass) -> DivisorClass {
        self.combine(a, b, -1)
    }

    fn combine(&self, a: &DivisorClass, b: &DivisorClass, sign: i64) -> DivisorClass {
        let mut c = DivisorClass {
            free: a.free.iter().zip(&b.free).map(|(x, y)| x + sign * y).collect(),
            torsion: a.torsion.iter().zip(&b.torsion).map(|(x, y)| x + sign * y).collect(),
        };
        self.reduce(&mut c);
        c
    }

    pub fn scale_class(&self, k: i64, a: &DivisorClass) -> DivisorClass {
        let mut c = DivisorClass {
            free: a.free.iter().map(|x| k * x).collect(),
            torsion: a.torsion.iter().map(|x| k * x).collect(),
        };
        self.reduce(&mut c);
        c
    }

    /// A Weil representative of `c`, from the lift of the Smith presentation.
    pub fn representative(&self, c: &DivisorClass) -> Result<WeilDivisor, DivisorError> {
        let expected = self.cokernel.coordinate_count();
        if c.free.len() + c.torsion.len() != expected || c.free.len() != self.cokernel.group.free_rank {
            return Err(DivisorError::ClassShape {
                expected,
                got: c.free.len() + c.torsion.len(),
            });
        }
        let x = self.cokernel.lift(&lattice::to_big_vec(&c.coords()));
        Ok(WeilDivisor::new(
            lattice::to_i64_vec(&x).ok_or(DivisorError::Overflow("lifting a class"))?,
        ))
    }

    /// `div(chi^m) = sum_rho <m, u_rho> D_rho`.
    pub fn principal(&self, m: &[i64]) -> WeilDivisor {
        WeilDivisor::new(self.fan.rays().iter().map(|u| dot(u, m)).collect())
    }

    pub fn cartier_data(&self, d: &WeilDivisor) -> Result<CartierData, DivisorError> {
        self.check_len(d)?;
        let mut rational = Vec::with_capacity(self.fan.max_cones().len());
        let mut denominator = BigInt::one();
        for (c, cone) in self.fan.max_cones().iter().enumerate() {
            let rhs: Vec<BigInt> = cone.iter().map(|&r| BigInt::from(-d.coeffs[r])).collect();
            let m = lattice::solve_rational(&self.fan.cone_matrix(c), &rhs).expect("validated cones are simplicial");
            for x in &m {
                denominator = denominator.lcm(x.denom());
            }
            rational.push(m);
        }
        if denominator.is_one() {
            let m = rational
                .iter()
                .map(|v| v.iter().map(|x| x.to_integer().to_i64()).collect::<Option<Vec<_>>>())
                .collect::<Option<Vec<_>>>()
                .ok_or(DivisorError::Overflow("computing Cartier data"))?;
            Ok(CartierData::Cartier { m })
        } else {
            Ok(CartierData::QCartierOnly {
                denominator: denominator.to_i64().ok_or(DivisorError::Overflow("computing Cartier data"))?,
                m: rational,
            })
        }
    }

    /// Nef Cartier: `<m_sigma, u_rho> >= -a_rho` for every cone and ray.
    pub fn is_nef(&self, d: &WeilDivisor) -> Result<bool, DivisorError> {
        Ok(match self.cartier_data(d)? {
            CartierData::Cartier { m } => self.support_inequalities(d, &m, false),
            CartierData::QCartierOnly { .. } => false,
        })
    }

    /// Ample Cartier: the inequalities are strict off each cone.
    pub fn is_ample(&self, d: &WeilDivisor) -> Result<bool, DivisorError> {
        Ok(match self.cartier_data(d)? {
            CartierData::Cartier { m } => self.support_inequalities(d, &m, true),
            CartierData::QCartierOnly { .. } => false,
        })
    }

    /// Nefness of the Q-Cartier divisor, ignoring integrality.
    pub fn is_q_nef(&self, d: &WeilDivisor) -> Result<bool, DivisorError> {
        let m: Vec<Vec<BigRational>> = match self.cartier_data(d)? {
            CartierData::Cartier { m } => m
                .iter()
                .map(|v| v.iter().map(|&x| BigRational::from_integer(x.into())).collect())
                .collect(),
            CartierData::QCartierOnly { m, .. } => m,
        };
        Ok(m.iter().all(|ms| {
            self.fan.rays().iter().zip(&d.coeffs).all(|(u, &a)| {
                let v: BigRational = ms.iter().zip(u).map(|(x, &ui)| x * BigInt::from(ui)).sum();
                v >= BigRational::from_integer((-a).into())
            })
        }))
    }

    fn support_inequalities(&self, d: &WeilDivisor, m: &[Vec<i64>], strict: bool) -> bool {
        for (c, cone) in self.fan.max_cones().iter().enumerate() {
            for (r, u) in self.fan.rays().iter().enumerate() {
                let v = dot(&m[c], u);
                let a = d.coeffs[r];
                if v < -a || (strict && v == -a && !cone.contains(&r)) {
                    return false;
                }
            }
        }
        true
    }

    /// Very ampleness of an ample Cartier divisor: for every cone the points
    /// `P_D ∩ M - m_sigma` must generate `sigma^∨ ∩ M`. Smooth fans
    /// short-circuit. `bound` caps the number of fundamental-parallelepiped
    /// points examined per cone.
    pub fn is_very_ample(&self, d: &WeilDivisor, bound: usize) -> Result<VeryAmple, DivisorError> {
        if !self.is_ample(d)? {
            return Err(DivisorError::NotAmple);
        }
        if self.fan.is_smooth() {
            return Ok(VeryAmple::Yes);
        }
        let CartierData::Cartier { m } = self.cartier_data(d)? else {
            return Err(DivisorError::NotAmple);
        };
        let poly = self.polytope(d)?;
        let points = poly.lattice_points()?;
        let mut truncated = false;
        for (c, cone) in self.fan.max_cones().iter().enumerate() {
            let a = self.fan.cone_matrix(c);
            let n = cone.len();
            // Columns of a^{-1}.
            let inv_cols: Vec<Vec<BigRational>> = (0..n)
                .map(|i| {
                    let mut e = vec![BigInt::zero(); n];
                    e[i] = BigInt::one();
                    lattice::solve_rational(&a, &e).expect("simplicial cone")
                })
                .collect();
            let steps: Vec<i64> = inv_cols
                .iter()
                .map(|col| col.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom())).to_i64().unwrap_or(i64::MAX))
                .collect();
            let in_lattice = |y: &[i64]| -> bool {
                (0..n).all(|k| {
                    let s: BigRational = (0..n).map(|i| &inv_cols[i][k] * BigInt::from(y[i])).sum();
                    s.is_integer()
                })
            };
            let to_m = |y: &[i64]| -> Vec<i64> {
                (0..n)
                    .map(|k| {
                        let s: BigRational = (0..n).map(|i| &inv_cols[i][k] * BigInt::from(y[i])).sum();
                        s.to_integer().to_i64().unwrap_or(0)
                    })
                    .collect()
            };

            let gens: Vec<Vec<i64>> = points
                .iter()
                .map(|p| {
                    let shifted: Vec<i64> = p.iter().zip(&m[c]).map(|(x, y)| x - y).collect();
                    cone.iter().map(|&r| dot(&shifted, self.fan.ray(r))).collect::<Vec<i64>>()
                })
                .filter(|y| y.iter().any(|&v| v != 0))
                .collect();
            let mut memo: HashMap<Vec<i64>, bool> = HashMap::new();

            let mut candidates: Vec<Vec<i64>> = (0..n)
                .map(|i| {
                    let mut y = vec![0; n];
                    y[i] = steps[i];
                    y
                })
                .collect();
            let mut examined = 0usize;
            let mut y = vec![0i64; n];
            'box_scan: loop {
                let mut k = n;
                loop {
                    if k == 0 {
                        break 'box_scan;
                    }
                    k -= 1;
                    y[k] += 1;
                    if y[k] < steps[k] {
                        break;
                    }
                    y[k] = 0;
                }
                if examined >= bound {
                    truncated = true;
                    break;
                }
                examined += 1;
                if in_lattice(&y) {
                    candidates.push(y.clone());
                }
            }
            for cand in candidates {
                if !generated(&cand, &gens, &mut memo) {
                    return Ok(VeryAmple::No {
                        cone: c,
                        missing: to_m(&cand),
                    });
                }
            }
        }
        Ok(if truncated {
            VeryAmple::VerifiedUpToBound(bound)
        } else {
            VeryAmple::Yes
        })
    }

    /// `P_D = { m : <m, u_rho> >= -a_rho }`.
    pub fn polytope(&self, d: &WeilDivisor) -> Result<LatticePolytope, DivisorError> {
        self.check_len(d)?;
        let inequalities: Vec<(Vec<i64>, i64)> = self
            .fan
            .rays()
            .iter()
            .zip(&d.coeffs)
            .map(|(u, &a)| (u.clone(), -a))
            .collect();
        let vertices = match self.cartier_data(d)? {
            CartierData::Cartier { m } if self.support_inequalities(d, &m, false) => {
                let set: BTreeSet<Vec<i64>> = m.into_iter().collect();
                set.into_iter().map(|v| v.into_iter().map(|x| BigRational::from_integer(x.into())).collect()).collect()
            }
            _ => vertices_by_intersection(self.dim(), &inequalities),
        };
        Ok(LatticePolytope::new(self.dim(), inequalities, vertices))
    }
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn generated(y: &[i64], gens: &[Vec<i64>], memo: &mut HashMap<Vec<i64>, bool>) -> bool {
    if y.iter().all(|&v| v == 0) {
        return true;
    }
    if let Some(&known) = memo.get(y) {
        return known;
    }
    let mut result = false;
    for g in gens {
        if g.iter().zip(y).all(|(a, b)| a <= b) {
            let rest: Vec<i64> = y.iter().zip(g).map(|(a, b)| a - b).collect();
            if generated(&rest, gens, memo) {
                result = true;
                break;
            }
        }
    }
    memo.insert(y.to_vec(), result);
    result
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
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
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn satisfies(ineqs: &[(Vec<i64>, i64)], m: &[BigRational]) -> bool {
    ineqs.iter().all(|(u, rhs)| {
        let v: BigRational = m.iter().zip(u).map(|(x, &ui)| x * BigInt::from(ui)).sum();
        v >= BigRational::from_integer((*rhs).into())
    })
}

/// Vertices as feasible intersections of `dim` tight inequalities.
fn vertices_by_intersection(dim: usize, ineqs: &[(Vec<i64>, i64)]) -> Vec<Vec<BigRational>> {
    let mut found: BTreeSet<Vec<BigRational>> = BTreeSet::new();
    for subset in subsets(ineqs.len(), dim) {
        let rows: Vec<&[i64]> = subset.iter().map(|&i| ineqs[i].0.as_slice()).collect();
        let a = IntMatrix::from_rows(&rows);
        let b: Vec<BigInt> = subset.iter().map(|&i| BigInt::from(ineqs[i].1)).collect();
        if let Some(m) = lattice::solve_rational(&a, &b) {
            if satisfies(ineqs, &m) {
                found.insert(m);
            }
        }
    }
    found.into_iter().collect()
}

/// Polytope `{ m : <m, u> >= rhs }` with its vertices and a lazily computed
/// list of lattice points.
#[derive(Debug)]
pub struct LatticePolytope {
    dim: usize,
    inequalities: Vec<(Vec<i64>, i64)>,
    vertices: Vec<Vec<BigRational>>,
    points: OnceLock<Result<Vec<Vec<i64>>, DivisorError>>,
}

impl Clone for LatticePolytope {
    fn clone(&self) -> Self {
        let points = OnceLock::new();
        if let Some(p) = self.points.get() {
            let _ = points.set(p.clone());
        }
        LatticePolytope {
            dim: self.dim,
            inequalities: self.inequalities.clone(),
            vertices: self.vertices.clone(),
            points,
        }
    }
}

impl LatticePolytope {
    pub fn new(dim: usize, inequalities: Vec<(Vec<i64>, i64)>, vertices: Vec<Vec<BigRational>>) -> Self {
        LatticePolytope {
            dim,
            inequalities,
            vertices,
            points: OnceLock::new(),
        }
    }

    /// Polytope from inequalities alone; vertices found by intersection.
    pub fn from_inequalities(dim: usize, inequalities: Vec<(Vec<i64>, i64)>) -> Self {
        let vertices = vertices_by_intersection(dim, &inequalities);
        Self::new(dim, inequalities, vertices)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inequalities(&self) -> &[(Vec<i64>, i64)] {
        &self.inequalities
    }

    pub fn vertices(&self) -> &[Vec<BigRational>] {
        &self.vertices
    }

    pub fn contains(&self, m: &[i64]) -> bool {
        self.inequalities.iter().all(|(u, rhs)| dot(u, m) >= *rhs)
    }

    /// Nontrivial recession cone `{ r : <r, u> >= 0 }`.
    pub fn is_unbounded(&self) -> bool {
        let d = self.dim;
        let normals: Vec<&[i64]> = self.inequalities.iter().map(|(u, _)| u.as_slice()).collect();
        if normals.is_empty() {
            return true;
        }
        let full = lattice::smith_normal_form(&IntMatrix::from_rows(&normals)).expect("nonempty");
        if full.rank() < d {
            return true;
        }
        // Pointed cone: nontrivial iff some extreme ray, cut out by d-1 tight rows.
        for subset in subsets(normals.len(), d - 1) {
            let ray = if d == 1 {
                vec![BigInt::one()]
            } else {
                let rows: Vec<&[i64]> = subset.iter().map(|&i| normals[i]).collect();
                let sol = lattice::solve_diophantine(&IntMatrix::from_rows(&rows), &vec![BigInt::zero(); d - 1])
                    .expect("homogeneous system");
                if sol.kernel.len() != 1 {
                    continue;
                }
                sol.kernel[0].clone()
            };
            for sign in [1i64, -1] {
                let ok = normals.iter().all(|u| {
                    let v: BigInt = u.iter().zip(&ray).map(|(&a, b)| BigInt::from(a * sign) * b).sum();
                    !v.is_negative()
                });
                if ok {
                    return true;
                }
            }
        }
        false
    }

    /// Integer points in lexicographic order.
    pub fn lattice_points(&self) -> Result<&[Vec<i64>], DivisorError> {
        self.points
            .get_or_init(|| self.enumerate())
            .as_ref()
            .map(|v| v.as_slice())
            .map_err(Clone::clone)
    }

    fn enumerate(&self) -> Result<Vec<Vec<i64>>, DivisorError> {
        if self.is_unbounded() {
            return Err(DivisorError::Unbounded);
        }
        if self.vertices.is_empty() {
            return Ok(Vec::new());
        }
        let d = self.dim;
        let mut lo = vec![0i64; d];
        let mut hi = vec![0i64; d];
        for k in 0..d {
            let min_v = self.vertices.iter().map(|v| v[k].clone()).min().expect("nonempty");
            let max_v = self.vertices.iter().map(|v| v[k].clone()).max().expect("nonempty");
            lo[k] = min_v.ceil().to_integer().to_i64().ok_or(DivisorError::Overflow("bounding box"))?;
            hi[k] = max_v.floor().to_integer().to_i64().ok_or(DivisorError::Overflow("bounding box"))?;
            if lo[k] > hi[k] {
                return Ok(Vec::new());
            }
        }
        // suffix[i][k] = max over the box of sum_{j >= k} u_ij m_j
        let suffix: Vec<Vec<i64>> = self
            .inequalities
            .iter()
            .map(|(u, _)| {
                let mut s = vec![0i64; d + 1];
                for k in (0..d).rev() {
                    s[k] = s[k + 1] + (u[k] * lo[k]).max(u[k] * hi[k]);
                }
                s
            })
            .collect();
        let mut out = Vec::new();
        let mut m = vec![0i64; d];
        let mut partial = vec![0i64; self.inequalities.len()];
        self.scan(0, &lo, &hi, &suffix, &mut m, &mut partial, &mut out);
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn scan(
        &self,
        k: usize,
        lo: &[i64],
        hi: &[i64],
        suffix: &[Vec<i64>],
        m: &mut Vec<i64>,
        partial: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        let d = self.dim;
        if k == d {
            if self.inequalities.iter().zip(partial.iter()).all(|((_, rhs), s)| s >= rhs) {
                out.push(m.clone());
            }
            return;
        }
        for x in lo[k]..=hi[k] {
            m[k] = x;
            let mut feasible = true;
            for (i, (u, rhs)) in self.inequalities.iter().enumerate() {
                partial[i] += u[k] * x;
                if partial[i] + suffix[i][k + 1] < *rhs {
                    feasible = false;
                }
            }
            if feasible {
                self.scan(k + 1, lo, hi, suffix, m, partial, out);
            }
            for (i, (u, _)) in self.inequalities.iter().enumerate() {
                partial[i] -= u[k] * x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan;

    fn var(f: Fan) -> ToricVariety {
        ToricVariety::new(f).unwrap()
    }

    fn wd(v: &[i64]) -> WeilDivisor {
        WeilDivisor::new(v.to_vec())
    }

    #[test]
    fn classes_on_projective_space() {
        let p3 = var(fan::projective_space(3).unwrap());
        assert_eq!(p3.class_of(&wd(&[1, 0, 0, 0])).unwrap().free, vec![1]);
        // div(chi^{e1}) = D_0 - D_3
        assert_eq!(p3.principal(&[1, 0, 0]), wd(&[1, 0, 0, -1]));
        assert_eq!(p3.class_of(&p3.principal(&[1, 0, 0])).unwrap().free, vec![0]);
        assert_eq!(p3.anticanonical_class().free, vec![4]);
    }

    #[test]
    fn classes_on_weighted_projective_space() {
        let w = var(fan::weighted_projective(&[1, 1, 2, 2, 2, 2]).unwrap());
        assert_eq!(w.class_group().free_rank, 1);
        assert!(w.class_group().torsion.is_empty());
        for (i, weight) in [1, 1, 2, 2, 2, 2].into_iter().enumerate() {
            assert_eq!(w.ray_class(i).free, vec![weight]);
        }
        assert_eq!(w.anticanonical_class().free, vec![10]);
    }

    #[test]
    fn anticanonical_of_p1_times_p1() {
        let p1 = fan::projective_space(1).unwrap();
        let v = var(fan::product(&p1, &p1).unwrap());
        assert_eq!(v.anticanonical_class().free, vec![2, 2]);
    }

    #[test]
    fn cartier_data_examples() {
        let p2 = var(fan::projective_space(2).unwrap());
        let d = wd(&[0, 0, 1]);
        let CartierData::Cartier { m } = p2.cartier_data(&d).unwrap() else {
            panic!("H is Cartier");
        };
        for (c, cone) in p2.fan().max_cones().iter().enumerate() {
            for &r in cone {
                assert_eq!(dot(&m[c], p2.fan().ray(r)), -d.coeffs[r]);
            }
        }
        let w = var(fan::weighted_projective(&[1, 1, 2]).unwrap());
        assert!(matches!(
            w.cartier_data(&wd(&[1, 0, 0])).unwrap(),
            CartierData::QCartierOnly { denominator: 2, .. }
        ));
        let CartierData::Cartier { m } = w.cartier_data(&wd(&[0, 0, 0])).unwrap() else {
            panic!()
        };
        assert!(m.iter().flatten().all(|&x| x == 0));
    }

    #[test]
    fn positivity_examples() {
        let p2 = var(fan::projective_space(2).unwrap());
        assert!(!p2.is_nef(&wd(&[0, 0, -1])).unwrap());
        assert!(p2.is_ample(&wd(&[0, 0, 1])).unwrap());

        let f1 = var(fan::hirzebruch(1).unwrap());
        let fiber = wd(&[1, 0, 0, 0]);
        assert!(f1.is_nef(&fiber).unwrap());
        assert!(!f1.is_ample(&fiber).unwrap());

        let w = var(fan::weighted_projective(&[1, 1, 2, 2, 2, 2]).unwrap());
        let eta = wd(&[2, 0, 0, 0, 0, 0]);
        assert_eq!(w.class_of(&eta).unwrap().free, vec![2]);
        assert!(w.is_ample(&eta).unwrap());
        let half = wd(&[1, 0, 0, 0, 0, 0]);
        assert!(!w.is_nef(&half).unwrap());
        assert!(w.is_q_nef(&half).unwrap());
    }

    #[test]
    fn very_ample_examples() {
        let p3 = var(fan::projective_space(3).unwrap());
        assert_eq!(p3.is_very_ample(&wd(&[4, 0, 0, 0]), 10_000).unwrap(), VeryAmple::Yes);
        let w = var(fan::weighted_projective(&[1, 1, 2, 2, 2, 2]).unwrap());
        assert_eq!(w.is_very_ample(&wd(&[2, 0, 0, 0, 0, 0]), 10_000).unwrap(), VeryAmple::Yes);
        assert_eq!(
            w.is_very_ample(&wd(&[1, 0, 0, 0, 0, 0]), 10_000).unwrap_err(),
            DivisorError::NotAmple
        );
        // O(1) on P(1,1,2) is not Cartier; O(2) is very ample.
        let w112 = var(fan::weighted_projective(&[1, 1, 2]).unwrap());
        assert_eq!(w112.is_very_ample(&wd(&[2, 0, 0]), 10_000).unwrap(), VeryAmple::Yes);
    }

    #[test]
    fn very_ample_failure_on_non_normal_simplex() {
        // The tetrahedron has only its 4 vertices as lattice points; they do
        // not generate the dual cone semigroups.
        let t = var(fan::non_oda_tetrahedron());
        let d = wd(&[2, 0, 0, 0]);
        assert!(t.is_ample(&d).unwrap());
        assert!(matches!(t.is_very_ample(&d, 10_000).unwrap(), VeryAmple::No { .. }));
        assert!(matches!(
            t.is_very_ample(&d.scale(2), 10_000).unwrap(),
            VeryAmple::Yes
        ));
    }

    #[test]
    fn polytope_examples() {
        let p2 = var(fan::projective_space(2).unwrap());
        let tri = p2.polytope(&wd(&[0, 0, 2])).unwrap();
        assert_eq!(tri.lattice_points().unwrap().len(), 6);
        assert_eq!(tri.vertices().len(), 3);

        let p1 = fan::projective_space(1).unwrap();
        let sq = var(fan::product(&p1, &p1).unwrap());
        let poly = sq.polytope(&wd(&[0, 1, 0, 1])).unwrap();
        assert_eq!(poly.vertices().len(), 4);
        assert_eq!(poly.lattice_points().unwrap().len(), 4);

        let empty = p2.polytope(&wd(&[-5, -5, 0])).unwrap();
        assert!(empty.lattice_points().unwrap().is_empty());
    }

    #[test]
    fn lattice_point_counts() {
        let p3 = var(fan::projective_space(3).unwrap());
        assert_eq!(p3.polytope(&wd(&[0, 0, 0, 1])).unwrap().lattice_points().unwrap().len(), 4);
        assert_eq!(p3.polytope(&wd(&[0, 0, 0, 4])).unwrap().lattice_points().unwrap().len(), 35);
        let t = var(fan::non_oda_tetrahedron());
        let pts = t.polytope(&wd(&[2, 0, 0, 0])).unwrap();
        assert_eq!(
            pts.lattice_points().unwrap(),
            &[vec![0, 0, 0], vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]
        );
    }

    #[test]
    fn unbounded_detected() {
        let half_plane = LatticePolytope::from_inequalities(2, vec![(vec![1, 0], 0), (vec![0, 1], 0)]);
        assert_eq!(half_plane.lattice_points().unwrap_err(), DivisorError::Unbounded);
        let strip = LatticePolytope::from_inequalities(2, vec![(vec![1, 0], 0), (vec![-1, 0], -2)]);
        assert!(strip.is_unbounded());
        let tri = LatticePolytope::from_inequalities(2, vec![(vec![1, 0], 0), (vec![0, 1], 0), (vec![-1, -1], -3)]);
        assert!(!tri.is_unbounded());
        assert_eq!(tri.lattice_points().unwrap().len(), 10);
    }

    #[test]
    fn representatives_round_trip() {
        let t = var(fan::non_oda_tetrahedron());
        assert_eq!(t.class_group().free_rank, 1);
        for d in [wd(&[2, 0, 0, 0]), wd(&[0, 1, 0, 0]), wd(&[1, 1, 1, 1]), wd(&[-1, 3, 0, 2])] {
            let c = t.class_of(&d).unwrap();
            let rep = t.representative(&c).unwrap();
            assert_eq!(t.class_of(&rep).unwrap(), c);
        }
        assert!(matches!(t.class_from(&[1]), Err(DivisorError::ClassShape { .. })));
    }
}

//! Sections of a class, the Jacobian ideal and its graded pieces, the
//! multiplication map of the Jacobian ring, and primitive Hodge dimensions.

pub mod sparse;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cox::{class_of_monomial, monomials_of_class, multiply, CoxError, GradedPieceBasis, Monomial};
use crate::divisor::{DivisorClass, DivisorError, ToricVariety};
use sparse::{certified_rank, convert_rows, rank, rational_rank, Echelon, PrimeField, RankProof, Rationals, SparseRow};

/// Largest prime below `2^62`.
pub const DEFAULT_PRIME: u64 = (1 << 62) - 57;

/// Pieces of larger dimension are not probed by the quasi-smoothness search.
pub const DEFAULT_WINDOW: usize = 5000;

/// Below the socle bound only pieces up to this size are probed.
const PROBE_DIM: usize = 256;

/// Exact membership checks above this many columns are skipped.
pub const EXACT_MEMBERSHIP_LIMIT: usize = 800;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JacobianError {
    #[error(transparent)]
    Cox(#[from] CoxError),
    #[error(transparent)]
    Divisor(#[from] DivisorError),
    #[error("monomial {monomial} does not have class {class}")]
    ClassMismatch { monomial: String, class: DivisorClass },
    #[error("S_beta is zero for beta = {0}")]
    EmptyLinearSystem(DivisorClass),
    #[error("dimension {0} is even; the multiplication map needs d = 2p+1")]
    DimensionParity(usize),
    #[error("p = {p} does not satisfy d = 2p+1 for d = {dim}")]
    WrongP { p: u32, dim: usize },
    #[error("class {0} of the section is not ample")]
    NotAmple(DivisorClass),
    #[error("{0} is not an odd prime below 2^63")]
    BadPrime(u64),
    #[error("no pure power of x{0} lies in the class of the section")]
    NoFermat(usize),
}

/// How ranks are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RankMode {
    /// Over `F_p` only: a lower bound on the rational rank.
    Modular { prime: u64 },
    /// Over `F_p`, redone over `Q` whenever the modular rank is not maximal.
    Certified { prime: u64 },
    Exact,
}

impl Default for RankMode {
    fn default() -> Self {
        RankMode::Certified { prime: DEFAULT_PRIME }
    }
}

impl RankMode {
    fn field(&self) -> Result<Option<PrimeField>, JacobianError> {
        match *self {
            RankMode::Modular { prime } | RankMode::Certified { prime } => {
                PrimeField::new(prime).map(Some).ok_or(JacobianError::BadPrime(prime))
            }
            RankMode::Exact => Ok(None),
        }
    }
}

/// Field over which a reported rank was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Modular { prime: u64 },
    ExactRational,
    /// Modular rank `r` together with `cols - r` rational kernel vectors
    /// lifted from `primes` primes and checked exactly.
    RationalKernel { primes: usize },
    /// Every target monomial is a product of source monomials.
    MonomialCover,
}

impl Certificate {
    /// True when the rank is the rational rank.
    pub fn is_exact(&self) -> bool {
        !matches!(self, Certificate::Modular { .. })
    }
}

/// `f` in `S_beta` as a sparse map monomial -> coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    class: DivisorClass,
    nvars: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl Section {
    /// Sums repeated monomials and drops zero coefficients.
    pub fn new(
        var: &ToricVariety,
        class: DivisorClass,
        terms: impl IntoIterator<Item = (Monomial, BigRational)>,
    ) -> Result<Section, JacobianError> {
        let mut map: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (m, c) in terms {
            if class_of_monomial(var, &m)? != class {
                return Err(JacobianError::ClassMismatch {
                    monomial: m.to_string(),
                    class,
                });
            }
            *map.entry(m).or_insert_with(BigRational::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        Ok(Section {
            class,
            nvars: var.ray_count(),
            terms: map,
        })
    }

    /// `sum_rho x_rho^{k_rho}` with `k_rho [D_rho] = beta`.
    pub fn fermat(var: &ToricVariety, class: &DivisorClass) -> Result<Section, JacobianError> {
        let n = var.ray_count();
        let basis = monomials_of_class(var, class)?;
        let mut terms = Vec::with_capacity(n);
        for rho in 0..n {
            let m = basis
                .monomials
                .iter()
                .find(|m| m.exponents().iter().enumerate().all(|(i, &e)| (i == rho) == (e > 0)))
                .ok_or(JacobianError::NoFermat(rho))?;
            terms.push((m.clone(), BigRational::from_integer(BigInt::from(1))));
        }
        Section::new(var, class.clone(), terms)
    }

    pub fn class(&self) -> &DivisorClass {
        &self.class
    }

    pub fn variable_count(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Substitutes `x_rho -> t_rho x_rho`.
    pub fn rescale_variables(&self, t: &[BigRational]) -> Section {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut c = c.clone();
                for (e, s) in m.exponents().iter().zip(t) {
                    for _ in 0..*e {
                        c *= s;
                    }
                }
                (m.clone(), c)
            })
            .filter(|(_, c)| !c.is_zero())
            .collect();
        Section {
            class: self.class.clone(),
            nvars: self.nvars,
            terms,
        }
    }
}

pub fn partial_derivative(var: &ToricVariety, f: &Section, rho: usize) -> Section {
    let class = var.sub_classes(&f.class, &var.ray_class(rho));
    let terms = f
        .terms
        .iter()
        .filter_map(|(m, c)| {
            let e = m.exponents()[rho];
            let lowered = m.lower(rho)?;
            Some((lowered, c * BigRational::from_integer(BigInt::from(e))))
        })
        .collect();
    Section {
        class,
        nvars: f.nvars,
        terms,
    }
}

/// `J(f)_gamma` spanned by `multiplier * d_rho f`, in the basis of `S_gamma`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GradedIdealPiece {
    pub class: DivisorClass,
    pub ambient: GradedPieceBasis,
    #[serde(skip)]
    pub rows: Vec<SparseRow<BigRational>>,
    pub rank: usize,
    pub certificate: Certificate,
}

impl GradedIdealPiece {
    pub fn ambient_dim(&self) -> usize {
        self.ambient.len()
    }
}

fn ideal_rows(
    var: &ToricVariety,
    f: &Section,
    ambient: &GradedPieceBasis,
) -> Result<Vec<SparseRow<BigRational>>, JacobianError> {
    let mut rows = Vec::new();
    if ambient.is_empty() {
        return Ok(rows);
    }
    for rho in 0..var.ray_count() {
        let df = partial_derivative(var, f, rho);
        if df.is_zero() {
            continue;
        }
        let mult_class = var.sub_classes(&ambient.class, &df.class);
        let multipliers = monomials_of_class(var, &mult_class)?;
        for m in &multipliers.monomials {
            let mut row: SparseRow<BigRational> = df
                .terms
                .iter()
                .map(|(t, c)| {
                    let col = ambient
                        .index_of(&multiply(m, t))
                        .expect("product of graded pieces lies in the ambient piece");
                    (col, c.clone())
                })
                .collect();
            row.sort_by_key(|(c, _)| *c);
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Rank of `rows` under `mode`.
fn rank_under(mode: RankMode, cols: usize, rows: &[SparseRow<BigRational>]) -> Result<(usize, Certificate), JacobianError> {
    let field = mode.field()?;
    Ok(match (mode, field) {
        (RankMode::Modular { prime }, Some(field)) => match convert_rows(&field, rows) {
            Some(conv) => (rank(&field, cols, conv), Certificate::Modular { prime }),
            None => (rational_rank(cols, rows), Certificate::ExactRational),
        },
        (RankMode::Certified { prime }, Some(field)) => match certified_rank(field, cols, rows) {
            (r, RankProof::Modular) => (r, Certificate::Modular { prime }),
            (r, RankProof::Kernel(primes)) => (r, Certificate::RationalKernel { primes }),
            (r, RankProof::Elimination) => (r, Certificate::ExactRational),
        },
        _ => (rational_rank(cols, rows), Certificate::ExactRational),
    })
}

pub fn jacobian_piece(
    var: &ToricVariety,
    f: &Section,
    gamma: &DivisorClass,
    mode: RankMode,
) -> Result<GradedIdealPiece, JacobianError> {
    let ambient = monomials_of_class(var, gamma)?;
    let rows = ideal_rows(var, f, &ambient)?;
    let (rank, certificate) = rank_under(mode, ambient.len(), &rows)?;
    Ok(GradedIdealPiece {
        class: gamma.clone(),
        ambient,
        rows,
        rank,
        certificate,
    })
}

/// `dim S_gamma - rank J(f)_gamma`; an upper bound under `RankMode::Modular`.
pub fn dim_r(var: &ToricVariety, f: &Section, gamma: &DivisorClass, mode: RankMode) -> Result<usize, JacobianError> {
    let piece = jacobian_piece(var, f, gamma, mode)?;
    Ok(piece.ambient_dim() - piece.rank)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurjectivityReport {
    pub beta: DivisorClass,
    pub second: DivisorClass,
    pub target: DivisorClass,
    pub dim_target: usize,
    pub covered_by_products: usize,
    pub rank: usize,
    pub surjective: bool,
    pub defect: usize,
    pub certificate: Certificate,
}

/// Checks whether `R_beta (x) R_{p beta - beta0} -> R_{(p+1) beta - beta0}`
/// is onto, via `span(products) + J(f)_target = S_target`.
pub fn multiplication_surjective(
    var: &ToricVariety,
    f: &Section,
    p: u32,
    mode: RankMode,
) -> Result<SurjectivityReport, JacobianError> {
    let d = var.dim();
    if d % 2 == 0 {
        return Err(JacobianError::DimensionParity(d));
    }
    if 2 * p as usize + 1 != d {
        return Err(JacobianError::WrongP { p, dim: d });
    }
    let beta = f.class.clone();
    if !var.is_ample(&var.representative(&beta)?)? {
        return Err(JacobianError::NotAmple(beta));
    }
    let beta0 = var.anticanonical_class();
    let second = var.sub_classes(&var.scale_class(i64::from(p), &beta), &beta0);
    multiplication_onto(var, f, &second, mode)
}

/// Checks whether `R_beta (x) R_alpha -> R_{beta + alpha}` is onto, where
/// `beta` is the class of `f`.
pub fn multiplication_onto(
    var: &ToricVariety,
    f: &Section,
    alpha: &DivisorClass,
    mode: RankMode,
) -> Result<SurjectivityReport, JacobianError> {
    let beta = f.class.clone();
    let second = alpha.clone();
    let target = var.add_classes(&beta, &second);

    let sb = monomials_of_class(var, &beta)?;
    let s2 = monomials_of_class(var, &second)?;
    let st = monomials_of_class(var, &target)?;
    let mut covered = vec![false; st.len()];
    for a in &sb.monomials {
        for b in &s2.monomials {
            let idx = st.index_of(&multiply(a, b)).expect("product lies in the target piece");
            covered[idx] = true;
        }
    }
    let uncovered: Vec<usize> = (0..st.len()).filter(|&i| !covered[i]).collect();
    let n_covered = st.len() - uncovered.len();
    if uncovered.is_empty() {
        return Ok(SurjectivityReport {
            beta,
            second,
            target,
            dim_target: st.len(),
            covered_by_products: n_covered,
            rank: st.len(),
            surjective: true,
            defect: 0,
            certificate: Certificate::MonomialCover,
        });
    }
    // quotient by the covered coordinates: keep only uncovered columns
    let mut relabel = vec![usize::MAX; st.len()];
    for (new, &old) in uncovered.iter().enumerate() {
        relabel[old] = new;
    }
    let rows: Vec<SparseRow<BigRational>> = ideal_rows(var, f, &st)?
        .into_iter()
        .map(|r| {
            r.into_iter()
                .filter(|(c, _)| relabel[*c] != usize::MAX)
                .map(|(c, v)| (relabel[c], v))
                .collect::<SparseRow<BigRational>>()
        })
        .filter(|r| !r.is_empty())
        .collect();
    let cols = uncovered.len();
    // a deficient modular rank is never reported without exact confirmation
    let mode = match mode {
        RankMode::Modular { prime } => RankMode::Certified { prime },
        m => m,
    };
    let (mut r, mut certificate) = rank_under(mode, cols, &rows)?;
    if r < cols && !certificate.is_exact() {
        r = rational_rank(cols, &rows);
        certificate = Certificate::ExactRational;
    }
    let total = n_covered + r;
    Ok(SurjectivityReport {
        beta,
        second,
        target,
        dim_target: st.len(),
        covered_by_products: n_covered,
        rank: total,
        surjective: total == st.len(),
        defect: st.len() - total,
        certificate,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HodgeEntry {
    pub q: usize,
    pub class: DivisorClass,
    pub dim: usize,
    /// The instance `PH^{p+1,d-p-2} = R_{p beta - beta0}` with `d = 2p+1`;
    /// other entries follow the same pattern and are informational.
    pub certified_instance: bool,
    pub certificate: Certificate,
}

/// `dim R(f)_{(q+1) beta - beta0}` for `q = 0..d-1`, exact.
pub fn primitive_hodge_dims(var: &ToricVariety, f: &Section, prime: u64) -> Result<Vec<HodgeEntry>, JacobianError> {
    let d = var.dim();
    let beta0 = var.anticanonical_class();
    let flagged = (d % 2 == 1 && d >= 3).then(|| (d - 1) / 2 - 1);
    (0..d)
        .map(|q| {
            let class = var.sub_classes(&var.scale_class(q as i64 + 1, &f.class), &beta0);
            let piece = jacobian_piece(var, f, &class, RankMode::Certified { prime })?;
            Ok(HodgeEntry {
                q,
                dim: piece.ambient_dim() - piece.rank,
                class,
                certified_instance: flagged == Some(q),
                certificate: piece.certificate,
            })
        })
        .collect()
}

/// Coefficients uniform in `[-10, 10] \ {0}` on every basis monomial.
pub fn sample_section(var: &ToricVariety, beta: &DivisorClass, seed: u64) -> Result<Section, JacobianError> {
    let basis = monomials_of_class(var, beta)?;
    if basis.is_empty() {
        return Err(JacobianError::EmptyLinearSystem(beta.clone()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<_> = basis
        .monomials
        .into_iter()
        .map(|m| {
            let v: i64 = rng.gen_range(-10..=9);
            let v = if v >= 0 { v + 1 } else { v };
            (m, BigRational::from_integer(BigInt::from(v)))
        })
        .collect();
    Section::new(var, beta.clone(), terms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuasiSmoothOptions {
    pub window: usize,
    pub prime: u64,
}

impl Default for QuasiSmoothOptions {
    fn default() -> Self {
        QuasiSmoothOptions {
            window: DEFAULT_WINDOW,
            prime: DEFAULT_PRIME,
        }
    }
}

/// `(x^{sigma-hat})^k` in `J(f)`, where `x^{sigma-hat}` is the product of the
/// variables off the maximal cone `sigma`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConePower {
    pub cone: usize,
    pub monomial: Monomial,
    pub k: u32,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum QuasiSmoothness {
    Certified { powers: Vec<ConePower> },
    NotCertified { cone: usize, reason: String },
}

impl QuasiSmoothness {
    pub fn is_certified(&self) -> bool {
        matches!(self, QuasiSmoothness::Certified { .. })
    }
}

struct PieceCache {
    basis: GradedPieceBasis,
    modular: Option<Echelon<PrimeField>>,
    exact: Option<Echelon<Rationals>>,
    rows: Vec<SparseRow<BigRational>>,
}

/// Sound sufficient test for `V(df) inside the irrelevant locus`: for every
/// maximal cone some power of `x^{sigma-hat}` lies in `J(f)`. On weighted
/// projective spaces `x^{sigma-hat}` is a single variable.
pub fn quasi_smooth_certificate(
    var: &ToricVariety,
    f: &Section,
    opts: QuasiSmoothOptions,
) -> Result<QuasiSmoothness, JacobianError> {
    let field = PrimeField::new(opts.prime).ok_or(JacobianError::BadPrime(opts.prime))?;
    let n = var.ray_count();
    let socle = socle_degree(var, f);
    let mut cache: HashMap<Vec<i64>, Option<PieceCache>> = HashMap::new();
    let mut powers = Vec::new();
    for (ci, cone) in var.fan().max_cones().iter().enumerate() {
        let off: BTreeSet<usize> = (0..n).filter(|r| !cone.contains(r)).collect();
        let base = Monomial::new((0..n).map(|r| u32::from(off.contains(&r))).collect());
        let base_class = class_of_monomial(var, &base)?;
        let k_cap = socle.map(|s| u32::try_from((s.max(-1) / base_class.free[0] + 1).max(1)).unwrap_or(u32::MAX));
        let mut found = None;
        let mut k = 1u32;
        loop {
            if k_cap.is_some_and(|cap| k > cap) {
                break;
            }
            let gamma = var.scale_class(i64::from(k), &base_class);
            let entry = cache.entry(gamma.coords()).or_insert(None);
            if entry.is_none() {
                let basis = monomials_of_class(var, &gamma)?;
                if basis.len() > opts.window {
                    break;
                }
                // between small probes and the bound nothing new is learned
                if basis.len() > PROBE_DIM && k_cap.is_some_and(|cap| k < cap) {
                    k = k_cap.expect("checked");
                    continue;
                }
                let rows = ideal_rows(var, f, &basis)?;
                let modular = convert_rows(&field, &rows).map(|r| Echelon::from_rows(field, basis.len(), r));
                *entry = Some(PieceCache {
                    basis,
                    modular,
                    exact: None,
                    rows,
                });
            }
            let piece = entry.as_mut().expect("filled above");
            let target = Monomial::new(base.exponents().iter().map(|e| e * k).collect());
            let col = piece.basis.index_of(&target).expect("power has class gamma");
            if let Some(cert) = membership(piece, col, field) {
                found = Some(ConePower {
                    cone: ci,
                    monomial: target,
                    k,
                    certificate: cert,
                });
                break;
            }
            k += 1;
        }
        match found {
            Some(p) => powers.push(p),
            None => {
                let reason = format!(
                    "no power of {base} found in J(f) within the window (k <= {}, dim <= {})",
                    k.saturating_sub(1),
                    opts.window
                );
                return Ok(QuasiSmoothness::NotCertified { cone: ci, reason });
            }
        }
    }
    Ok(QuasiSmoothness::Certified { powers })
}

/// Full modular rank proves membership; otherwise a modular hit is confirmed
/// over the rationals when the piece is small enough.
fn membership(piece: &mut PieceCache, col: usize, field: PrimeField) -> Option<Certificate> {
    let cols = piece.basis.len();
    if let Some(m) = &piece.modular {
        if m.is_full() {
            return Some(Certificate::Modular { prime: field.modulus() });
        }
        if !m.contains(vec![(col, field.encode(1))]) {
            return None;
        }
    }
    if cols > EXACT_MEMBERSHIP_LIMIT {
        return None;
    }
    let rows = &piece.rows;
    let exact = piece
        .exact
        .get_or_insert_with(|| Echelon::from_rows(Rationals, cols, rows.iter().cloned()));
    exact
        .contains(vec![(col, BigRational::from_integer(BigInt::from(1)))])
        .then_some(Certificate::ExactRational)
}

/// With `Cl = Z` and positive degrees a quasi-smooth `f` has an Artinian
/// Jacobian ring with socle in degree `n deg(beta) - 2 sum deg(D_rho)`; a
/// monomial of degree `w` needs no power beyond `socle / w + 1`.
fn socle_degree(var: &ToricVariety, f: &Section) -> Option<i64> {
    let g = var.class_group();
    if g.free_rank != 1 || !g.torsion.is_empty() {
        return None;
    }
    let degs: Vec<i64> = (0..var.ray_count()).map(|r| var.ray_class(r).free[0]).collect();
    if degs.iter().any(|&w| w <= 0) {
        return None;
    }
    Some(degs.len() as i64 * f.class.free[0] - 2 * degs.iter().sum::<i64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan;

    fn p3() -> ToricVariety {
        ToricVariety::new(fan::projective_space(3).unwrap()).unwrap()
    }

    fn one() -> BigRational {
        BigRational::from_integer(1.into())
    }

    #[test]
    fn default_prime_is_prime() {
        assert!(PrimeField::new(DEFAULT_PRIME).is_some());
        assert!(((DEFAULT_PRIME + 1)..(1 << 62)).all(|n| !primal_check::miller_rabin(n)));
    }

    #[test]
    fn derivatives() {
        let v = p3();
        let c4 = v.class_from(&[4]).unwrap();
        let f = Section::new(&v, c4.clone(), [(Monomial::pure_power(4, 0, 4), one())]).unwrap();
        let d0 = partial_derivative(&v, &f, 0);
        assert_eq!(d0.class().free, vec![3]);
        assert_eq!(d0.terms().get(&Monomial::pure_power(4, 0, 3)), Some(&BigRational::from_integer(4.into())));
        assert!(partial_derivative(&v, &f, 1).is_zero());
        let fermat = Section::fermat(&v, &c4).unwrap();
        for i in 0..4 {
            let d = partial_derivative(&v, &fermat, i);
            assert_eq!(d.len(), 1);
            assert_eq!(d.terms().keys().next().unwrap(), &Monomial::pure_power(4, i, 3));
        }
    }

    #[test]
    fn class_mismatch_rejected() {
        let v = p3();
        let c4 = v.class_from(&[4]).unwrap();
        let err = Section::new(&v, c4, [(Monomial::pure_power(4, 0, 3), one())]).unwrap_err();
        assert!(matches!(err, JacobianError::ClassMismatch { .. }));
    }

    #[test]
    fn fermat_quartic_pieces() {
        let v = p3();
        let f = Section::fermat(&v, &v.class_from(&[4]).unwrap()).unwrap();
        let piece = jacobian_piece(&v, &f, &v.class_from(&[4]).unwrap(), RankMode::Exact).unwrap();
        assert_eq!((piece.ambient_dim(), piece.rank), (35, 16));
        let dims: Vec<usize> = [0, 4, 8]
            .iter()
            .map(|&k| dim_r(&v, &f, &v.class_from(&[k]).unwrap(), RankMode::default()).unwrap())
            .collect();
        assert_eq!(dims, vec![1, 19, 1]);
        assert_eq!(dim_r(&v, &f, &v.class_from(&[-2]).unwrap(), RankMode::Exact).unwrap(), 0);
        let low = jacobian_piece(&v, &f, &v.class_from(&[2]).unwrap(), RankMode::Exact).unwrap();
        assert_eq!(low.rank, 0);
    }

    #[test]
    fn fermat_cubic_pieces() {
        let v = p3();
        let f = Section::fermat(&v, &v.class_from(&[3]).unwrap()).unwrap();
        let piece = jacobian_piece(&v, &f, &v.class_from(&[2]).unwrap(), RankMode::default()).unwrap();
        assert_eq!((piece.ambient_dim(), piece.rank), (10, 4));
        let dims: Vec<usize> = primitive_hodge_dims(&v, &f, DEFAULT_PRIME).unwrap().iter().map(|e| e.dim).collect();
        assert_eq!(dims, vec![0, 6, 0]);
    }

    #[test]
    fn surjectivity_on_projective_space() {
        let v = p3();
        let quartic = Section::fermat(&v, &v.class_from(&[4]).unwrap()).unwrap();
        let r = multiplication_surjective(&v, &quartic, 1, RankMode::default()).unwrap();
        assert!(r.surjective);
        assert_eq!(r.defect, 0);
        let cubic = Section::fermat(&v, &v.class_from(&[3]).unwrap()).unwrap();
        let r = multiplication_surjective(&v, &cubic, 1, RankMode::default()).unwrap();
        assert!(!r.surjective);
        assert_eq!(r.defect, 6);
        assert!(r.certificate.is_exact());
        assert_eq!(
            multiplication_surjective(&v, &cubic, 2, RankMode::default()).unwrap_err(),
            JacobianError::WrongP { p: 2, dim: 3 }
        );
        let plane = ToricVariety::new(fan::projective_space(2).unwrap()).unwrap();
        let conic = Section::fermat(&plane, &plane.class_from(&[2]).unwrap()).unwrap();
        assert_eq!(
            multiplication_surjective(&plane, &conic, 1, RankMode::default()).unwrap_err(),
            JacobianError::DimensionParity(2)
        );
    }

    #[test]
    fn hodge_entries_flag_one_instance() {
        let v = p3();
        let f = Section::fermat(&v, &v.class_from(&[4]).unwrap()).unwrap();
        let es = primitive_hodge_dims(&v, &f, DEFAULT_PRIME).unwrap();
        assert_eq!(es.iter().map(|e| e.dim).collect::<Vec<_>>(), vec![1, 19, 1]);
        assert_eq!(es.iter().filter(|e| e.certified_instance).map(|e| e.q).collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn sampling_is_deterministic() {
        let v = p3();
        let c = v.class_from(&[4]).unwrap();
        let a = sample_section(&v, &c, 1).unwrap();
        assert_eq!(a.len(), 35);
        assert_eq!(a, sample_section(&v, &c, 1).unwrap());
        assert_ne!(a, sample_section(&v, &c, 2).unwrap());
        assert!(a.terms().values().all(|q| {
            let n = q.to_integer();
            n != BigInt::from(0) && n >= BigInt::from(-10) && n <= BigInt::from(10)
        }));
        assert!(matches!(
            sample_section(&v, &v.class_from(&[-1]).unwrap(), 1),
            Err(JacobianError::EmptyLinearSystem(_))
        ));
    }

    #[test]
    fn quasi_smoothness() {
        let v = p3();
        let c4 = v.class_from(&[4]).unwrap();
        let fermat = Section::fermat(&v, &c4).unwrap();
        match quasi_smooth_certificate(&v, &fermat, QuasiSmoothOptions::default()).unwrap() {
            QuasiSmoothness::Certified { powers } => {
                assert_eq!(powers.len(), 4);
                assert!(powers.iter().all(|p| p.k == 3));
            }
            other => panic!("{other:?}"),
        }
        let degenerate = Section::new(&v, c4.clone(), [(Monomial::pure_power(4, 0, 4), one())]).unwrap();
        assert!(!quasi_smooth_certificate(&v, &degenerate, QuasiSmoothOptions::default())
            .unwrap()
            .is_certified());
        let random = sample_section(&v, &c4, 1).unwrap();
        assert!(quasi_smooth_certificate(&v, &random, QuasiSmoothOptions::default())
            .unwrap()
            .is_certified());
    }

    #[test]
    fn weighted_fermat_sextic() {
        let v = ToricVariety::new(fan::weighted_projective(&[1, 1, 2, 2, 2, 2]).unwrap()).unwrap();
        let f = Section::fermat(&v, &v.class_from(&[6]).unwrap()).unwrap();
        assert_eq!(f.len(), 6);
        assert!(f.terms().contains_key(&Monomial::pure_power(6, 0, 6)));
        assert!(f.terms().contains_key(&Monomial::pure_power(6, 2, 3)));
        let r = multiplication_surjective(&v, &f, 2, RankMode::default()).unwrap();
        assert!(r.surjective);
        assert!(quasi_smooth_certificate(&v, &f, QuasiSmoothOptions::default())
            .unwrap()
            .is_certified());
    }
}

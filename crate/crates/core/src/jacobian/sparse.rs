//! Sparse row reduction over a prime field or the rationals.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Sorted by column, no stored zeros.
pub type SparseRow<E> = Vec<(usize, E)>;

pub trait Field {
    type Elem: Clone + Debug;
    fn zero(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    /// `None` when the denominator vanishes in the field.
    fn from_rational(&self, q: &BigRational) -> Option<Self::Elem>;
}

/// `Z/p` with elements kept in Montgomery form (`x R mod p`, `R = 2^64`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
    // -p^{-1} mod 2^64
    p_neg_inv: u64,
    r2: u64,
}

impl PrimeField {
    /// Accepts odd primes below `2^63`.
    pub fn new(p: u64) -> Option<Self> {
        if p <= 2 || p >= (1 << 63) || !primal_check::miller_rabin(p) {
            return None;
        }
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % u128::from(p)) as u64;
        let r2 = ((u128::from(r) * u128::from(r)) % u128::from(p)) as u64;
        Some(PrimeField {
            p,
            p_neg_inv: inv.wrapping_neg(),
            r2,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.p_neg_inv);
        let u = ((t + u128::from(m) * u128::from(self.p)) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    /// Montgomery form of a residue in `[0, p)`.
    pub fn encode(&self, x: u64) -> u64 {
        self.redc(u128::from(x) * u128::from(self.r2))
    }

    pub fn decode(&self, x: u64) -> u64 {
        self.redc(u128::from(x))
    }

    fn reduce_big(&self, n: &BigInt) -> u64 {
        let m = n.mod_floor(&BigInt::from(self.p));
        m.to_u64().expect("residue fits")
    }

    fn pow(&self, mut b: u64, mut e: u64) -> u64 {
        let mut acc = self.encode(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        acc
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }

    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }

    fn mul(&self, a: &u64, b: &u64) -> u64 {
        self.redc(u128::from(*a) * u128::from(*b))
    }

    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.p - (b - a)
        }
    }

    fn inv(&self, a: &u64) -> u64 {
        self.pow(*a, self.p - 2)
    }

    fn from_rational(&self, q: &BigRational) -> Option<u64> {
        let den = self.encode(self.reduce_big(q.denom()));
        if den == 0 {
            return None;
        }
        Some(self.mul(&self.encode(self.reduce_big(q.numer())), &self.inv(&den)))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }

    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }

    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }

    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }

    fn inv(&self, a: &BigRational) -> BigRational {
        a.recip()
    }

    fn from_rational(&self, q: &BigRational) -> Option<BigRational> {
        Some(q.clone())
    }
}

/// Maps rational rows into `field`; `None` if some entry is undefined there.
pub fn convert_rows<F: Field>(field: &F, rows: &[SparseRow<BigRational>]) -> Option<Vec<SparseRow<F::Elem>>> {
    rows.iter()
        .map(|r| {
            let mut out = Vec::with_capacity(r.len());
            for (c, q) in r {
                let e = field.from_rational(q)?;
                if !field.is_zero(&e) {
                    out.push((*c, e));
                }
            }
            Some(out)
        })
        .collect()
}

/// `a - f*b`.
fn axpy<F: Field>(field: &F, a: &[(usize, F::Elem)], f: &F::Elem, b: &[(usize, F::Elem)]) -> SparseRow<F::Elem> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            let v = field.sub(&field.zero(), &field.mul(f, &b[j].1));
            out.push((b[j].0, v));
            j += 1;
        } else {
            let v = field.sub(&a[i].1, &field.mul(f, &b[j].1));
            if !field.is_zero(&v) {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn entry<'a, E>(row: &'a [(usize, E)], col: usize) -> Option<&'a E> {
    row.binary_search_by_key(&col, |(c, _)| *c).ok().map(|i| &row[i].1)
}

/// Rank over a field.
pub fn rank<F: Field>(field: &F, cols: usize, rows: Vec<SparseRow<F::Elem>>) -> usize {
    markowitz(cols, rows, |row, pivot, pc| {
        let pinv = field.inv(entry(pivot, pc).expect("pivot entry"));
        let f = field.mul(entry(row, pc).expect("holder entry"), &pinv);
        axpy(field, row, &f, pivot)
    })
}

/// Rank over `Q`, eliminating fraction-free on integer rows with the content
/// divided out after every step.
pub fn rational_rank(cols: usize, rows: &[SparseRow<BigRational>]) -> usize {
    let ints = rows.iter().map(|r| primitive(integer_row(r))).collect();
    markowitz(cols, ints, |row, pivot, pc| {
        let a = entry(pivot, pc).expect("pivot entry");
        let b = entry(row, pc).expect("holder entry");
        let g = a.gcd(b);
        let (a, b) = (a / &g, b / &g);
        let mut out = Vec::with_capacity(row.len() + pivot.len());
        let (mut i, mut j) = (0, 0);
        while i < row.len() || j < pivot.len() {
            if j == pivot.len() || (i < row.len() && row[i].0 < pivot[j].0) {
                out.push((row[i].0, &a * &row[i].1));
                i += 1;
            } else if i == row.len() || pivot[j].0 < row[i].0 {
                out.push((pivot[j].0, -(&b * &pivot[j].1)));
                j += 1;
            } else {
                let v = &a * &row[i].1 - &b * &pivot[j].1;
                if !v.is_zero() {
                    out.push((row[i].0, v));
                }
                i += 1;
                j += 1;
            }
        }
        primitive(out)
    })
}

fn integer_row(r: &[(usize, BigRational)]) -> SparseRow<BigInt> {
    let l = r.iter().fold(BigInt::one(), |acc, (_, q)| acc.lcm(q.denom()));
    r.iter().map(|(c, q)| (*c, q.numer() * (&l / q.denom()))).collect()
}

fn primitive(mut r: SparseRow<BigInt>) -> SparseRow<BigInt> {
    let g = r.iter().fold(BigInt::zero(), |acc, (_, v)| acc.gcd(v));
    if !g.is_zero() && !g.is_one() {
        for (_, v) in r.iter_mut() {
            *v /= &g;
        }
    }
    r
}

/// Right-looking elimination. The pivot column is an active column of least
/// count, the pivot row the shortest row in it; ties go to the lowest index.
fn markowitz<E: Clone>(
    cols: usize,
    mut rows: Vec<SparseRow<E>>,
    eliminate: impl Fn(&[(usize, E)], &[(usize, E)], usize) -> SparseRow<E>,
) -> usize {
    let n = rows.len();
    let mut active = vec![true; n];
    let mut count = vec![0usize; cols];
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); cols];
    for (i, r) in rows.iter().enumerate() {
        for (c, _) in r {
            count[*c] += 1;
            col_rows[*c].push(i);
        }
    }
    let limit = n.min(cols);
    let mut rank = 0;
    while rank < limit {
        let Some(pc) = (0..cols).filter(|&c| count[c] > 0).min_by_key(|&c| (count[c], c)) else {
            break;
        };
        let mut holders: Vec<usize> = std::mem::take(&mut col_rows[pc])
            .into_iter()
            .filter(|&i| active[i] && entry(&rows[i], pc).is_some())
            .collect();
        holders.sort_unstable();
        holders.dedup();
        let pr = *holders
            .iter()
            .min_by_key(|&&i| (rows[i].len(), i))
            .expect("count > 0 means some row holds the column");
        let pivot_row = std::mem::take(&mut rows[pr]);
        active[pr] = false;
        for (c, _) in &pivot_row {
            count[*c] -= 1;
        }
        for &i in holders.iter().filter(|&&i| i != pr) {
            let old = std::mem::take(&mut rows[i]);
            let new = eliminate(&old, &pivot_row, pc);
            for (c, _) in &old {
                count[*c] -= 1;
            }
            for (c, _) in &new {
                count[*c] += 1;
                if entry(&old, *c).is_none() {
                    col_rows[*c].push(i);
                }
            }
            if new.is_empty() {
                active[i] = false;
            }
            rows[i] = new;
        }
        rank += 1;
    }
    rank
}

/// Row echelon basis built by insertion; answers span-membership queries.
#[derive(Debug, Clone)]
pub struct Echelon<F: Field> {
    field: F,
    cols: usize,
    // by leading column; each stored row is monic at its leading column
    pivots: Vec<Option<SparseRow<F::Elem>>>,
    rank: usize,
}

impl<F: Field> Echelon<F> {
    pub fn new(field: F, cols: usize) -> Self {
        Echelon {
            field,
            cols,
            pivots: vec![None; cols],
            rank: 0,
        }
    }

    /// Inserts rows until all are consumed or the rank is full.
    pub fn from_rows(field: F, cols: usize, rows: impl IntoIterator<Item = SparseRow<F::Elem>>) -> Self {
        let mut e = Echelon::new(field, cols);
        for r in rows {
            if e.is_full() {
                break;
            }
            e.insert(r);
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_full(&self) -> bool {
        self.rank == self.cols
    }

    /// Remainder of `row` after reduction by the stored pivots.
    pub fn reduce(&self, mut row: SparseRow<F::Elem>) -> SparseRow<F::Elem> {
        let mut start = 0;
        loop {
            let Some(pos) = row[start..].iter().position(|(c, _)| self.pivots[*c].is_some()) else {
                return row;
            };
            let (c, v) = row[start + pos].clone();
            let p = self.pivots[c].as_ref().expect("checked");
            let keep = start + pos;
            row = axpy(&self.field, &row, &v, p);
            start = keep;
        }
    }

    /// Returns true when `row` was independent of the stored rows.
    pub fn insert(&mut self, row: SparseRow<F::Elem>) -> bool {
        let r = self.reduce(row);
        let Some((lead, lv)) = r.first().cloned() else {
            return false;
        };
        let inv = self.field.inv(&lv);
        let monic = r.into_iter().map(|(c, v)| (c, self.field.mul(&v, &inv))).collect();
        self.pivots[lead] = Some(monic);
        self.rank += 1;
        true
    }

    pub fn contains(&self, row: SparseRow<F::Elem>) -> bool {
        self.reduce(row).is_empty()
    }
}

impl<F: Field> Echelon<F> {
    /// Reduced row echelon rows keyed by pivot column, ascending.
    pub fn into_reduced(self) -> Vec<(usize, SparseRow<F::Elem>)> {
        let field = self.field;
        let mut done: Vec<Option<SparseRow<F::Elem>>> = vec![None; self.cols];
        for (lead, row) in self.pivots.into_iter().enumerate().rev() {
            let Some(mut row) = row else { continue };
            let mut start = 1;
            while let Some(pos) = row[start..].iter().position(|(c, _)| done[*c].is_some()) {
                let at = start + pos;
                let (c, v) = row[at].clone();
                row = axpy(&field, &row, &v, done[c].as_ref().expect("checked"));
                start = at;
            }
            debug_assert_eq!(row[0].0, lead);
            done[lead] = Some(row);
        }
        done.into_iter().enumerate().filter_map(|(c, r)| r.map(|r| (c, r))).collect()
    }
}

/// How an exact rank was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankProof {
    /// Modular rank already maximal.
    Modular,
    /// Modular rank `r` plus `cols - r` independent rational kernel vectors,
    /// reconstructed from this many primes and verified exactly.
    Kernel(usize),
    /// Elimination over `Q`.
    Elimination,
}

const KERNEL_PRIMES: usize = 96;

/// Exact rank of a rational matrix. Tries the modular shortcut, then a
/// verified kernel lifted from several primes, then rational elimination.
pub fn certified_rank(primary: PrimeField, cols: usize, rows: &[SparseRow<BigRational>]) -> (usize, RankProof) {
    if let Some(conv) = convert_rows(&primary, rows) {
        let r = rank(&primary, cols, conv);
        if r == rows.len().min(cols) {
            return (r, RankProof::Modular);
        }
        if let Some(k) = kernel_certificate(primary.modulus(), cols, rows, r) {
            return (r, RankProof::Kernel(k));
        }
    }
    (rational_rank(cols, rows), RankProof::Elimination)
}

fn kernel_certificate(first: u64, cols: usize, rows: &[SparseRow<BigRational>], r: usize) -> Option<usize> {
    let mut modulus = BigInt::one();
    let mut residues: Vec<Vec<BigInt>> = Vec::new();
    let mut pivots: Option<Vec<usize>> = None;
    let mut int_rows = None;
    let mut used = 0;
    let mut p = first;
    for _ in 0..KERNEL_PRIMES * 2 {
        if used == KERNEL_PRIMES {
            break;
        }
        let candidate = p;
        p = previous_prime(p);
        let field = PrimeField::new(candidate)?;
        let Some(conv) = convert_rows(&field, rows) else { continue };
        let reduced = Echelon::from_rows(field, cols, conv).into_reduced();
        if reduced.len() > r {
            // r was a modular rank drop, so it is not the rational rank
            return None;
        }
        let lead: Vec<usize> = reduced.iter().map(|(c, _)| *c).collect();
        if reduced.len() < r || pivots.as_ref().is_some_and(|pv| *pv != lead) {
            continue;
        }
        let kernel = kernel_mod(&field, cols, &reduced);
        if residues.is_empty() {
            residues = kernel.iter().map(|v| v.iter().map(|&x| BigInt::from(x)).collect()).collect();
        } else {
            let m_mod = (&modulus % candidate).to_u64().expect("residue fits");
            let inv = pow_mod(m_mod, candidate - 2, candidate);
            for (acc, v) in residues.iter_mut().zip(&kernel) {
                for (a, &x) in acc.iter_mut().zip(v) {
                    *a = crt(a, &modulus, x, candidate, inv);
                }
            }
        }
        modulus *= candidate;
        pivots = Some(lead);
        used += 1;
        if !used.is_power_of_two() && used != KERNEL_PRIMES {
            continue;
        }
        let lifted: Option<Vec<Vec<BigInt>>> = residues.iter().map(|v| reconstruct_vector(v, &modulus)).collect();
        if let Some(vs) = lifted {
            let int_rows = int_rows.get_or_insert_with(|| integer_rows(rows));
            if vs.iter().all(|v| annihilates(int_rows, v)) {
                return Some(used);
            }
        }
    }
    None
}

/// Basis of the right kernel mod `p`: one vector per free column.
fn kernel_mod(field: &PrimeField, cols: usize, reduced: &[(usize, SparseRow<u64>)]) -> Vec<Vec<u64>> {
    let mut is_pivot = vec![false; cols];
    for (c, _) in reduced {
        is_pivot[*c] = true;
    }
    (0..cols)
        .filter(|&j| !is_pivot[j])
        .map(|j| {
            let mut v = vec![0u64; cols];
            v[j] = 1;
            for (c, row) in reduced {
                if let Some(x) = entry(row, j) {
                    v[*c] = field.decode(field.sub(&0, x));
                }
            }
            v
        })
        .collect()
}

/// Each row scaled to integers by the lcm of its denominators.
fn integer_rows(rows: &[SparseRow<BigRational>]) -> Vec<Vec<(usize, BigInt)>> {
    rows.iter()
        .map(|r| {
            let l = r.iter().fold(BigInt::one(), |l, (_, q)| l.lcm(q.denom()));
            r.iter().map(|(c, q)| (*c, q.numer() * (&l / q.denom()))).collect()
        })
        .collect()
}

fn annihilates(rows: &[Vec<(usize, BigInt)>], v: &[BigInt]) -> bool {
    rows.iter().all(|r| r.iter().map(|(c, x)| x * &v[*c]).sum::<BigInt>().is_zero())
}

/// An integer multiple of the rational vector with residues `v` mod `m`,
/// lifted entrywise against a running common denominator.
fn reconstruct_vector(v: &[BigInt], m: &BigInt) -> Option<Vec<BigInt>> {
    let bound = (m / 2u32).sqrt();
    let half = m / 2u32;
    let mut den = BigInt::one();
    let mut lifted = Vec::with_capacity(v.len());
    for a in v {
        let mut s = (a * &den).mod_floor(m);
        if s > half {
            s -= m;
        }
        if s.abs() > bound {
            let q = reconstruct(&s, m)?;
            den *= q.denom();
            s = q.numer().clone();
        }
        lifted.push((s, den.clone()));
    }
    Some(lifted.into_iter().map(|(n, d)| n * (&den / d)).collect())
}

fn previous_prime(mut n: u64) -> u64 {
    loop {
        n -= 2;
        if primal_check::miller_rabin(n) {
            return n;
        }
    }
}

fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u128;
    let mut base = u128::from(b % m);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % u128::from(m);
        }
        base = base * base % u128::from(m);
        e >>= 1;
    }
    acc as u64
}

/// `x = a mod m`, `x = b mod p`, `0 <= x < m p`, given `inv = m^-1 mod p`
/// and `0 <= a < m`.
fn crt(a: &BigInt, m: &BigInt, b: u64, p: u64, inv: u64) -> BigInt {
    let p128 = u128::from(p);
    let a_mod = (a % p).to_u64().expect("residue fits");
    let diff = (u128::from(b) + p128 - u128::from(a_mod)) % p128;
    let t = (diff * u128::from(inv) % p128) as u64;
    a + m * t
}

/// `n/d` with `|n|, d <= sqrt(m/2)` and `n = a d mod m`.
fn reconstruct(a: &BigInt, m: &BigInt) -> Option<BigRational> {
    let bound = (m / 2u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound || !r1.gcd(&t1).is_one() {
        return None;
    }
    Some(BigRational::new(r1, t1))
}

/// Exact rank of an integer matrix by the same elimination; used by oracles.
pub fn rational_rank_of_ints(rows: &[Vec<i64>]) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let sparse: Vec<SparseRow<BigRational>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0)
                .map(|(c, v)| (c, BigRational::from_integer(BigInt::from(*v))))
                .collect()
        })
        .collect();
    rational_rank(cols, &sparse)
}

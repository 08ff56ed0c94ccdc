//! Exact integer linear algebra: Smith normal form, integer solutions of
//! linear systems and cokernel presentations.
//!
//! Everything here runs on [`BigInt`]; intermediate entries of the Smith
//! reduction can grow well past machine width even for small inputs.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("matrix has no entries")]
    EmptyMatrix,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("right-hand side is not in the integer image of the matrix")]
    NoSolution,
}

/// Dense row-major matrix of arbitrary-precision integers.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from rows of machine integers.
    ///
    /// Panics if the rows are ragged.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend(r.iter().map(|&x| BigInt::from(x)));
        }
        IntMatrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_big_rows(rows: Vec<Vec<BigInt>>, cols: usize) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend(r);
        }
        IntMatrix {
            rows: n,
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "incompatible shapes");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "incompatible shapes");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                let Some(swap) = (k + 1..n).find(|&i| !a[(i, k)].is_zero()) else {
                    return BigInt::zero();
                };
                a.swap_rows(k, swap);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[(k, k)] * &a[(i, j)] - &a[(i, k)] * &a[(k, j)];
                    a[(i, j)] = v / &prev;
                }
            }
            prev = a[(k, k)].clone();
        }
        sign * a[(n - 1, n - 1)].clone()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[target] += k * row[source]
    fn add_row_multiple(&mut self, target: usize, source: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = &self[(source, j)] * k;
            self[(target, j)] += v;
        }
    }

    /// col[target] += k * col[source]
    fn add_col_multiple(&mut self, target: usize, source: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = &self[(i, source)] * k;
            self[(i, target)] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -&self[(i, j)];
            self[(i, j)] = v;
        }
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// `u * s * v == a`, with `u`, `v` unimodular and `s` in Smith form.
#[derive(Debug, Clone)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
    /// Inverse of `u`.
    pub u_inv: IntMatrix,
    /// Inverse of `v`.
    pub v_inv: IntMatrix,
    /// Diagonal of `s`, length `min(rows, cols)`; zeros trail.
    pub elementary_divisors: Vec<BigInt>,
}

impl SmithDecomposition {
    pub fn rank(&self) -> usize {
        self.elementary_divisors
            .iter()
            .take_while(|d| !d.is_zero())
            .count()
    }
}

/// Tracks `left * a * right == work` alongside the inverses of both transforms.
struct SmithState {
    work: IntMatrix,
    left: IntMatrix,
    left_inv: IntMatrix,
    right: IntMatrix,
    right_inv: IntMatrix,
}

impl SmithState {
    fn swap_rows(&mut self, a: usize, b: usize) {
        self.work.swap_rows(a, b);
        self.left.swap_rows(a, b);
        self.left_inv.swap_cols(a, b);
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        self.work.swap_cols(a, b);
        self.right.swap_cols(a, b);
        self.right_inv.swap_rows(a, b);
    }

    fn add_row_multiple(&mut self, target: usize, source: usize, k: &BigInt) {
        self.work.add_row_multiple(target, source, k);
        self.left.add_row_multiple(target, source, k);
        self.left_inv.add_col_multiple(source, target, &-k);
    }

    fn add_col_multiple(&mut self, target: usize, source: usize, k: &BigInt) {
        self.work.add_col_multiple(target, source, k);
        self.right.add_col_multiple(target, source, k);
        self.right_inv.add_row_multiple(source, target, &-k);
    }

    fn negate_row(&mut self, i: usize) {
        self.work.negate_row(i);
        self.left.negate_row(i);
        let n = self.left_inv.rows();
        for r in 0..n {
            let v = -&self.left_inv[(r, i)];
            self.left_inv[(r, i)] = v;
        }
    }

    /// Smallest nonzero |entry| in the trailing block, ties to the lowest (row, col).
    fn pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.work.rows() {
            for j in t..self.work.cols() {
                let x = &self.work[(i, j)];
                if x.is_zero() {
                    continue;
                }
                match best {
                    Some((bi, bj)) if self.work[(bi, bj)].abs() <= x.abs() => {}
                    _ => best = Some((i, j)),
                }
            }
        }
        best
    }
}

/// Smith normal form with smallest-absolute-value pivoting.
pub fn smith_normal_form(a: &IntMatrix) -> Result<SmithDecomposition, LatticeError> {
    if a.is_empty() {
        return Err(LatticeError::EmptyMatrix);
    }
    let (m, n) = (a.rows(), a.cols());
    let mut st = SmithState {
        work: a.clone(),
        left: IntMatrix::identity(m),
        left_inv: IntMatrix::identity(m),
        right: IntMatrix::identity(n),
        right_inv: IntMatrix::identity(n),
    };

    for t in 0..m.min(n) {
        'pivot: loop {
            let Some((pi, pj)) = st.pivot(t) else {
                break;
            };
            st.swap_rows(t, pi);
            st.swap_cols(t, pj);
            let p = st.work[(t, t)].clone();

            let mut dirty = false;
            for i in t + 1..m {
                if st.work[(i, t)].is_zero() {
                    continue;
                }
                let q = &st.work[(i, t)] / &p;
                st.add_row_multiple(i, t, &-q);
                dirty |= !st.work[(i, t)].is_zero();
            }
            for j in t + 1..n {
                if st.work[(t, j)].is_zero() {
                    continue;
                }
                let q = &st.work[(t, j)] / &p;
                st.add_col_multiple(j, t, &-q);
                dirty |= !st.work[(t, j)].is_zero();
            }
            if dirty {
                continue 'pivot;
            }

            for i in t + 1..m {
                for j in t + 1..n {
                    if !st.work[(i, j)].is_multiple_of(&p) {
                        st.add_row_multiple(t, i, &BigInt::one());
                        continue 'pivot;
                    }
                }
            }
            if p.is_negative() {
                st.negate_row(t);
            }
            break;
        }
    }

    let elementary_divisors = (0..m.min(n)).map(|i| st.work[(i, i)].clone()).collect();
    Ok(SmithDecomposition {
        u: st.left_inv,
        s: st.work,
        v: st.right_inv,
        u_inv: st.left,
        v_inv: st.right,
        elementary_divisors,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiophantineSolution {
    pub particular: Vec<BigInt>,
    /// Z-basis of the integer kernel.
    pub kernel: Vec<Vec<BigInt>>,
}

/// Integer solutions of `a * x = b`.
pub fn solve_diophantine(a: &IntMatrix, b: &[BigInt]) -> Result<DiophantineSolution, LatticeError> {
    if b.len() != a.rows() {
        return Err(LatticeError::DimensionMismatch {
            expected: a.rows(),
            got: b.len(),
        });
    }
    let (m, n) = (a.rows(), a.cols());
    if n == 0 {
        return if b.iter().all(Zero::is_zero) {
            Ok(DiophantineSolution {
                particular: vec![],
                kernel: vec![],
            })
        } else {
            Err(LatticeError::NoSolution)
        };
    }
    if m == 0 {
        return Ok(DiophantineSolution {
            particular: vec![BigInt::zero(); n],
            kernel: (0..n)
                .map(|j| {
                    let mut e = vec![BigInt::zero(); n];
                    e[j] = BigInt::one();
                    e
                })
                .collect(),
        });
    }

    // a = u s v, so s (v x) = u^{-1} b.
    let snf = smith_normal_form(a)?;
    let c = snf.u_inv.mul_vec(b);
    let zero = BigInt::zero();
    let mut y = vec![BigInt::zero(); n];
    for (i, ci) in c.iter().enumerate() {
        let s = if i < m.min(n) {
            &snf.elementary_divisors[i]
        } else {
            &zero
        };
        if s.is_zero() {
            if !ci.is_zero() {
                return Err(LatticeError::NoSolution);
            }
        } else {
            let (q, r) = ci.div_rem(s);
            if !r.is_zero() {
                return Err(LatticeError::NoSolution);
            }
            y[i] = q;
        }
    }
    let particular = snf.v_inv.mul_vec(&y);
    let rank = snf.rank();
    let kernel = (rank..n).map(|j| snf.v_inv.column(j)).collect();
    Ok(DiophantineSolution { particular, kernel })
}

/// Unique solution of a square nonsingular system over the rationals.
pub fn solve_rational(a: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigRational>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return None;
    }
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> = a
                .row(i)
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect();
            row.push(BigRational::from_integer(b[i].clone()));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let inv = m[col][col].recip();
        for x in m[col].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for k in col..=n {
                    let v = &m[col][k] * &f;
                    m[r][k] -= v;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

/// Finitely generated abelian group `Z^free_rank ⊕ ⊕ Z/t_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbelianGroupPresentation {
    pub free_rank: usize,
    /// Invariant factors, each ≥ 2, forming a divisibility chain.
    pub torsion: Vec<BigInt>,
}

impl fmt::Display for AbelianGroupPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Presentation of `Z^rows / colspace(a)` together with a projection onto
/// presentation coordinates (free part first, then torsion residues) and a
/// lift back to `Z^rows`.
#[derive(Debug, Clone)]
pub struct Cokernel {
    pub group: AbelianGroupPresentation,
    projection: IntMatrix,
    lift: IntMatrix,
}

impl Cokernel {
    pub fn ambient_rank(&self) -> usize {
        self.projection.cols()
    }

    pub fn coordinate_count(&self) -> usize {
        self.group.free_rank + self.group.torsion.len()
    }

    /// The projection matrix (free rows are in row Hermite form).
    pub fn projection_matrix(&self) -> &IntMatrix {
        &self.projection
    }

    pub fn project(&self, x: &[BigInt]) -> Vec<BigInt> {
        let mut c = self.projection.mul_vec(x);
        self.reduce(&mut c);
        c
    }

    /// Brings torsion residues into `[0, t)`.
    pub fn reduce(&self, c: &mut [BigInt]) {
        let r = self.group.free_rank;
        for (k, t) in self.group.torsion.iter().enumerate() {
            c[r + k] = c[r + k].mod_floor(t);
        }
    }

    /// Some `x` with `project(x) == c`.
    pub fn lift(&self, c: &[BigInt]) -> Vec<BigInt> {
        self.lift.mul_vec(c)
    }
}

/// Row operations bringing a full-row-rank matrix into row Hermite form:
/// returns `(h, t, t_inv)` with `t * f == h`.
fn row_hermite(f: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let r = f.rows();
    let mut st = SmithState {
        work: f.clone(),
        left: IntMatrix::identity(r),
        left_inv: IntMatrix::identity(r),
        right: IntMatrix::identity(0),
        right_inv: IntMatrix::identity(0),
    };
    let mut pr = 0;
    for j in 0..f.cols() {
        if pr == r {
            break;
        }
        loop {
            let best = (pr..r)
                .filter(|&i| !st.work[(i, j)].is_zero())
                .min_by(|&a, &b| st.work[(a, j)].abs().cmp(&st.work[(b, j)].abs()).then(a.cmp(&b)));
            let Some(best) = best else { break };
            st.swap_rows(pr, best);
            let p = st.work[(pr, j)].clone();
            let mut done = true;
            for i in pr + 1..r {
                if !st.work[(i, j)].is_zero() {
                    let q = &st.work[(i, j)] / &p;
                    st.add_row_multiple(i, pr, &-q);
                    done &= st.work[(i, j)].is_zero();
                }
            }
            if done {
                break;
            }
        }
        if st.work[(pr, j)].is_zero() {
            continue;
        }
        if st.work[(pr, j)].is_negative() {
            st.negate_row(pr);
        }
        let p = st.work[(pr, j)].clone();
        for i in 0..pr {
            let q = st.work[(i, j)].div_floor(&p);
            st.add_row_multiple(i, pr, &-q);
        }
        pr += 1;
    }
    (st.work, st.left, st.left_inv)
}

/// Cokernel of `a : Z^cols -> Z^rows`.
pub fn cokernel(a: &IntMatrix) -> Cokernel {
    let m = a.rows();
    if a.cols() == 0 || m == 0 {
        return Cokernel {
            group: AbelianGroupPresentation {
                free_rank: m,
                torsion: vec![],
            },
            projection: IntMatrix::identity(m),
            lift: IntMatrix::identity(m),
        };
    }
    let snf = smith_normal_form(a).expect("nonempty matrix");
    let k = m.min(a.cols());
    let divisor = |i: usize| -> BigInt {
        if i < k {
            snf.elementary_divisors[i].clone()
        } else {
            BigInt::zero()
        }
    };
    let free_idx: Vec<usize> = (0..m).filter(|&i| divisor(i).is_zero()).collect();
    let tors_idx: Vec<usize> = (0..m).filter(|&i| divisor(i) > BigInt::one()).collect();

    let free_rows: Vec<Vec<BigInt>> = free_idx.iter().map(|&i| snf.u_inv.row(i).to_vec()).collect();
    let free = IntMatrix::from_big_rows(free_rows, m);
    let (h, _t, t_inv) = if free.rows() > 0 {
        row_hermite(&free)
    } else {
        (free.clone(), IntMatrix::identity(0), IntMatrix::identity(0))
    };

    let coords = free_idx.len() + tors_idx.len();
    let mut projection = IntMatrix::zeros(coords, m);
    for r in 0..h.rows() {
        for j in 0..m {
            projection[(r, j)] = h[(r, j)].clone();
        }
    }
    for (k, &i) in tors_idx.iter().enumerate() {
        let t = divisor(i);
        for j in 0..m {
            projection[(free_idx.len() + k, j)] = snf.u_inv[(i, j)].mod_floor(&t);
        }
    }

    // y_free = t_inv * c_free, y_tors = c_tors, x = u * y.
    let mut lift = IntMatrix::zeros(m, coords);
    for c in 0..free_idx.len() {
        for (k, &i) in free_idx.iter().enumerate() {
            let w = &t_inv[(k, c)];
            if w.is_zero() {
                continue;
            }
            for row in 0..m {
                let v = &snf.u[(row, i)] * w;
                lift[(row, c)] += v;
            }
        }
    }
    for (k, &i) in tors_idx.iter().enumerate() {
        for row in 0..m {
            lift[(row, free_idx.len() + k)] = snf.u[(row, i)].clone();
        }
    }

    Cokernel {
        group: AbelianGroupPresentation {
            free_rank: free_idx.len(),
            torsion: tors_idx.iter().map(|&i| divisor(i)).collect(),
        },
        projection,
        lift,
    }
}

pub fn to_i64_vec(v: &[BigInt]) -> Option<Vec<i64>> {
    v.iter().map(ToPrimitive::to_i64).collect()
}

pub fn to_big_vec(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

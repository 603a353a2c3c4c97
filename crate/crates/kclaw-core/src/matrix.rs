//! Exact rational matrices and minor calculus.
//!
//! Determinants use fraction-free Bareiss elimination after clearing row
//! denominators, so the only divisions are exact integer divisions.
//! Characteristic polynomials are recovered by evaluating the determinant at
//! the integer points `x = 0..=n` and interpolating, which keeps every
//! intermediate value rational.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{lagrange_interpolate, RatPoly};
use crate::rat::{rat, Rat};

/// Dense row-major matrix over the rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// From row vectors; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_int_rows(rows: &[Vec<i64>]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| rat(v)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &Rat {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        Self::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = Rat::zero();
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                acc += a * rhs.at(k, j);
            }
            acc
        })
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert!(
            self.rows == rhs.rows && self.cols == rhs.cols,
            "add dimension mismatch"
        );
        Self::from_fn(self.rows, self.cols, |i, j| self.at(i, j) + rhs.at(i, j))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert!(
            self.rows == rhs.rows && self.cols == rhs.cols,
            "sub dimension mismatch"
        );
        Self::from_fn(self.rows, self.cols, |i, j| self.at(i, j) - rhs.at(i, j))
    }

    pub fn scale(&self, c: &Rat) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.at(i, j) * c)
    }

    /// Copies `block` into `self` with top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(r0 + i, c0 + j, block.at(i, j).clone());
            }
        }
    }

    pub fn row_sums(&self) -> Vec<Rat> {
        (0..self.rows)
            .map(|i| (0..self.cols).fold(Rat::zero(), |acc, j| acc + self.at(i, j)))
            .collect()
    }

    pub fn col_sums(&self) -> Vec<Rat> {
        (0..self.cols)
            .map(|j| (0..self.rows).fold(Rat::zero(), |acc, i| acc + self.at(i, j)))
            .collect()
    }

    /// The common row sum, if all rows sum to the same value.
    pub fn uniform_row_sum(&self) -> Option<Rat> {
        let sums = self.row_sums();
        let first = sums.first()?;
        sums.iter().all(|s| s == first).then(|| first.clone())
    }

    /// Submatrix by 0-based row and column indices (order preserved).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| {
            self.at(rows[i], cols[j]).clone()
        })
    }

    /// Exact determinant by fraction-free Bareiss elimination.
    pub fn determinant(&self) -> Rat {
        assert!(self.is_square(), "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Rat::one();
        }
        // Clear denominators row by row; track the combined scale.
        let mut den = BigInt::one();
        let mut m: Vec<Vec<BigInt>> = (0..n)
            .map(|i| {
                let mut l = BigInt::one();
                for j in 0..n {
                    l = l.lcm(self.at(i, j).denom());
                }
                den *= &l;
                (0..n)
                    .map(|j| {
                        let c = self.at(i, j);
                        c.numer() * (&l / c.denom())
                    })
                    .collect()
            })
            .collect();
        let mut negate = false;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                    Some(i) => {
                        m.swap(k, i);
                        negate = !negate;
                    }
                    None => return Rat::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let t = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                    // Exact by the Bareiss minor identity.
                    m[i][j] = t / &prev;
                }
                m[i][k] = BigInt::zero();
            }
            prev = m[k][k].clone();
        }
        let mut det = m[n - 1][n - 1].clone();
        if negate {
            det = -det;
        }
        Rat::new(det, den)
    }

    /// Characteristic polynomial `det(xI - M)` (monic).
    pub fn charpoly(&self) -> RatPoly {
        self.charpoly_signed(false)
    }

    /// `det(xI + M)` (monic).
    pub fn charpoly_plus(&self) -> RatPoly {
        self.charpoly_signed(true)
    }

    fn charpoly_signed(&self, plus: bool) -> RatPoly {
        assert!(self.is_square(), "charpoly of non-square matrix");
        let n = self.rows;
        let points: Vec<(Rat, Rat)> = (0..=n as i64)
            .map(|t| {
                let tv = rat(t);
                let shifted = Self::from_fn(n, n, |i, j| {
                    let mut v = if plus {
                        self.at(i, j).clone()
                    } else {
                        -self.at(i, j)
                    };
                    if i == j {
                        v += &tv;
                    }
                    v
                });
                (tv, shifted.determinant())
            })
            .collect();
        let p = lagrange_interpolate(&points).expect("distinct abscissae");
        debug_assert_eq!(p.degree(), Some(n));
        p
    }

    /// Gram matrix `Mᵀ M`.
    pub fn gram(&self) -> Self {
        self.transpose().mul(self)
    }

    /// `det(xI - MᵀM)` (monic, degree = cols).
    pub fn gram_charpoly(&self) -> RatPoly {
        self.gram().charpoly()
    }

    /// Symmetric `(m+n) x (m+n)` embedding `[[0, M], [Mᵀ, 0]]`.
    pub fn bipartite_embed(&self) -> Self {
        let (m, n) = (self.rows, self.cols);
        let mut out = Self::zeros(m + n, m + n);
        out.set_block(0, m, self);
        out.set_block(m, 0, &self.transpose());
        out
    }

    /// Minor `[M]_{S,T}`: determinant of the submatrix on 1-based row set `S`
    /// and column set `T`. The empty minor is 1.
    pub fn minor(&self, s: &IndexSet, t: &IndexSet) -> Result<Rat> {
        if s.len() != t.len() {
            return Err(Error::DimensionMismatch(format!(
                "minor needs equal-size index sets, got {} and {}",
                s.len(),
                t.len()
            )));
        }
        if s.max().is_some_and(|v| v > self.rows) || t.max().is_some_and(|v| v > self.cols) {
            return Err(Error::OutOfDomain("minor index out of range".into()));
        }
        let rows: Vec<usize> = s.iter().map(|v| v - 1).collect();
        let cols: Vec<usize> = t.iter().map(|v| v - 1).collect();
        Ok(self.submatrix(&rows, &cols).determinant())
    }
}

/// Stacked identity `I_n^{[k]}`: `k` copies of `I_n` on top of one another
/// (`kn x n`, unit row sums, column sums `k`).
pub fn claw_matrix(n: usize, k: usize) -> RatMatrix {
    let mut m = RatMatrix::zeros(k * n, n);
    for c in 0..k {
        for j in 0..n {
            m.set(c * n + j, j, Rat::one());
        }
    }
    m
}

/// `rows x cols` matrix whose top-left `kl x l` block is `I_l^{[k]}` and
/// whose remaining entries are zero.
pub fn claw_block(rows: usize, cols: usize, l: usize, k: usize) -> RatMatrix {
    assert!(k * l <= rows && l <= cols, "claw block does not fit");
    let mut m = RatMatrix::zeros(rows, cols);
    m.set_block(0, 0, &claw_matrix(l, k));
    m
}

/// Sorted set of distinct 1-based indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Validates that indices are 1-based, strictly increasing.
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.contains(&0) {
            return Err(Error::OutOfDomain("index sets are 1-based".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::OutOfDomain(
                "index set must be strictly increasing".into(),
            ));
        }
        Ok(Self(indices))
    }

    pub fn from_slice(indices: &[usize]) -> Result<Self> {
        Self::new(indices.to_vec())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn sum(&self) -> usize {
        self.0.iter().sum()
    }

    /// Complement within `{1, ..., n}`.
    pub fn complement(&self, n: usize) -> Self {
        Self((1..=n).filter(|v| !self.contains(*v)).collect())
    }

    /// All size-`k` subsets of `{1, ..., n}` in lexicographic order.
    pub fn subsets(n: usize, k: usize) -> Vec<Self> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(k);
        fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<IndexSet>) {
            if cur.len() == k {
                out.push(IndexSet(cur.clone()));
                return;
            }
            let remaining = k - cur.len();
            for v in start..=n.saturating_sub(remaining - 1) {
                cur.push(v);
                rec(n, k, v + 1, cur, out);
                cur.pop();
            }
        }
        if k <= n {
            rec(n, k, 1, &mut cur, &mut out);
        }
        out
    }
}

/// Term-by-term expansion of `det(A + B)` over complementary minors:
/// `det(A+B) = Σ (-1)^{Σ S + Σ T} [A]_{S,T} [B]_{S̄,T̄}` over equal-size
/// index sets. Exponential in the dimension; intended as a reference route.
pub fn det_sum_expansion(a: &RatMatrix, b: &RatMatrix) -> Result<Rat> {
    if !a.is_square() || a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::DimensionMismatch(
            "det_sum_expansion needs equal square matrices".into(),
        ));
    }
    let n = a.rows();
    let mut total = Rat::zero();
    for k in 0..=n {
        for s in IndexSet::subsets(n, k) {
            let sc = s.complement(n);
            for t in IndexSet::subsets(n, k) {
                let am = a.minor(&s, &t)?;
                if am.is_zero() {
                    continue;
                }
                let bm = b.minor(&sc, &t.complement(n))?;
                let term = am * bm;
                if (s.sum() + t.sum()) % 2 == 0 {
                    total += term;
                } else {
                    total -= term;
                }
            }
        }
    }
    Ok(total)
}

/// Cauchy-Binet sum `Σ_U [A]_{S,U} [B]_{U,T}` over all `|S|`-subsets `U` of
/// the inner dimension; equals the minor `[AB]_{S,T}`.
pub fn cauchy_binet_sum(a: &RatMatrix, b: &RatMatrix, s: &IndexSet, t: &IndexSet) -> Result<Rat> {
    if a.cols() != b.rows() {
        return Err(Error::DimensionMismatch(
            "cauchy_binet_sum inner dimension mismatch".into(),
        ));
    }
    if s.len() != t.len() {
        return Err(Error::DimensionMismatch(
            "cauchy_binet_sum needs equal-size index sets".into(),
        ));
    }
    let mut total = Rat::zero();
    for u in IndexSet::subsets(a.cols(), s.len()) {
        let am = a.minor(s, &u)?;
        if am.is_zero() {
            continue;
        }
        total += am * b.minor(&u, t)?;
    }
    Ok(total)
}

/// `det(xI + M)` from principal minors: the coefficient of `x^(n-k)` is the
/// sum of all `k x k` principal minors. Exponential; capped at `n <= 8`.
pub fn charpoly_via_principal_minors(m: &RatMatrix) -> Result<RatPoly> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(
            "charpoly of non-square matrix".into(),
        ));
    }
    let n = m.rows();
    if n > 8 {
        return Err(Error::CapExceeded {
            needed: 1u128 << n,
            cap: 1 << 8,
        });
    }
    let mut coeffs = vec![Rat::zero(); n + 1];
    for k in 0..=n {
        let mut c = Rat::zero();
        for s in IndexSet::subsets(n, k) {
            c += m.minor(&s, &s)?;
        }
        coeffs[n - k] = c;
    }
    Ok(RatPoly::from_coeffs(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::ratio;
    use proptest::prelude::*;

    #[test]
    fn determinant_known_values() {
        let hilbert = RatMatrix::from_fn(3, 3, |i, j| ratio(1, (i + j + 1) as i64));
        assert_eq!(hilbert.determinant(), ratio(1, 2160));
        let swap = RatMatrix::from_int_rows(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(swap.determinant(), rat(-1));
        let singular = RatMatrix::from_int_rows(&[vec![1, 2], vec![2, 4]]);
        assert_eq!(singular.determinant(), rat(0));
        assert_eq!(RatMatrix::zeros(0, 0).determinant(), rat(1));
    }

    #[test]
    fn determinant_needs_pivot_search() {
        let m = RatMatrix::from_int_rows(&[vec![0, 0, 1], vec![0, 2, 0], vec![3, 0, 0]]);
        assert_eq!(m.determinant(), rat(-6));
    }

    #[test]
    fn charpoly_conventions() {
        let m = RatMatrix::from_int_rows(&[vec![2, 1], vec![1, 2]]);
        assert_eq!(m.charpoly(), RatPoly::from_ints(&[3, -4, 1]));
        assert_eq!(m.charpoly_plus(), RatPoly::from_ints(&[3, 4, 1]));
        assert_eq!(RatMatrix::zeros(0, 0).charpoly(), RatPoly::one());
    }

    #[test]
    fn claw_matrix_shape_and_gram() {
        let c = claw_matrix(2, 2);
        assert_eq!(c.rows(), 4);
        assert_eq!(c.cols(), 2);
        assert!(c.row_sums().iter().all(|s| s == &rat(1)));
        assert!(c.col_sums().iter().all(|s| s == &rat(2)));
        // CᵀC = kI, so the Gram charpoly is (x-k)^n.
        assert_eq!(c.gram_charpoly(), RatPoly::from_ints(&[4, -4, 1]));
        let b = claw_block(6, 3, 2, 2);
        assert_eq!(b.at(0, 0), &rat(1));
        assert_eq!(b.at(5, 2), &rat(0));
        assert_eq!(b.col_sums()[2], rat(0));
    }

    #[test]
    fn bipartite_embedding_spectrum() {
        // A = (1, 1)ᵀ embeds to a path-like matrix with eigenvalues ±sqrt(2), 0.
        let a = RatMatrix::from_int_rows(&[vec![1], vec![1]]);
        let e = a.bipartite_embed();
        assert_eq!(e.charpoly(), RatPoly::from_ints(&[0, -2, 0, 1]));
    }

    #[test]
    fn index_sets() {
        let s = IndexSet::from_slice(&[1, 3]).unwrap();
        assert_eq!(s.sum(), 4);
        assert_eq!(s.complement(4), IndexSet::from_slice(&[2, 4]).unwrap());
        assert!(IndexSet::from_slice(&[0, 1]).is_err());
        assert!(IndexSet::from_slice(&[2, 2]).is_err());
        assert_eq!(IndexSet::subsets(4, 2).len(), 6);
        assert_eq!(IndexSet::subsets(3, 0), vec![IndexSet::empty()]);
        assert_eq!(IndexSet::subsets(2, 3).len(), 0);
    }

    #[test]
    fn minor_edge_cases() {
        let m = RatMatrix::from_int_rows(&[vec![1, 2], vec![3, 4]]);
        let e = IndexSet::empty();
        assert_eq!(m.minor(&e, &e).unwrap(), rat(1));
        let full = IndexSet::from_slice(&[1, 2]).unwrap();
        assert_eq!(m.minor(&full, &full).unwrap(), rat(-2));
        let s = IndexSet::from_slice(&[2]).unwrap();
        let t = IndexSet::from_slice(&[1]).unwrap();
        assert_eq!(m.minor(&s, &t).unwrap(), rat(3));
        assert!(m.minor(&s, &full).is_err());
        let big = IndexSet::from_slice(&[3]).unwrap();
        assert!(m.minor(&big, &t).is_err());
    }

    #[test]
    fn principal_minor_charpoly_cap() {
        let m = RatMatrix::identity(9);
        assert!(matches!(
            charpoly_via_principal_minors(&m),
            Err(Error::CapExceeded { .. })
        ));
    }

    fn small_matrix(n: usize) -> impl Strategy<Value = RatMatrix> {
        prop::collection::vec(-4i64..=4, n * n)
            .prop_map(move |v| RatMatrix::from_fn(n, n, |i, j| rat(v[i * n + j])))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_det_multiplicative(a in small_matrix(3), b in small_matrix(3)) {
            prop_assert_eq!(a.mul(&b).determinant(), a.determinant() * b.determinant());
        }

        #[test]
        fn prop_charpoly_matches_det(a in small_matrix(3), t in -5i64..=5) {
            let tv = rat(t);
            let shifted = RatMatrix::from_fn(3, 3, |i, j| {
                let base = if i == j { &tv - a.at(i, j) } else { -a.at(i, j) };
                base
            });
            prop_assert_eq!(a.charpoly().eval(&tv), shifted.determinant());
        }

        #[test]
        fn prop_det_sum_expansion(a in small_matrix(3), b in small_matrix(3)) {
            prop_assert_eq!(det_sum_expansion(&a, &b).unwrap(), a.add(&b).determinant());
        }

        #[test]
        fn prop_cauchy_binet(a in small_matrix(3), b in small_matrix(3)) {
            let s = IndexSet::from_slice(&[1, 3]).unwrap();
            let t = IndexSet::from_slice(&[2, 3]).unwrap();
            let lhs = a.mul(&b).minor(&s, &t).unwrap();
            prop_assert_eq!(cauchy_binet_sum(&a, &b, &s, &t).unwrap(), lhs);
        }

        #[test]
        fn prop_principal_minors_match_charpoly(a in small_matrix(4)) {
            prop_assert_eq!(charpoly_via_principal_minors(&a).unwrap(), a.charpoly_plus());
        }
    }
}

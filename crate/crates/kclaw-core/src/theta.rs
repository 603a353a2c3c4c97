//! The trivariate generating polynomial of squared minors and the
//! closed-form expected completion polynomial built from it.
//!
//! For an `m x n` matrix `A` and cut sizes `(s, r)`, the generating
//! polynomial is `θ_A(x, y, z) = det(xI + Ã^T Ã)` with
//! `Ã = diag(yI_s, I) A diag(zI_r, I)`. Only even powers of `y` and `z`
//! occur, and the coefficient of `x^(n-j) y^(2p) z^(2q)` is the sum of
//! squared `j x j` minors of `A` using exactly `p` of the first `s` rows
//! and `q` of the first `r` columns. Tables are computed by exact
//! evaluation at integer values of `(y², z²)` followed by nested Lagrange
//! interpolation, never by symbolic expansion.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::RatMatrix;
use crate::poly::{lagrange_interpolate, RatPoly};
use crate::rat::{binomial, parse_rat, rat, Rat};

/// Ambient dimensions for a frame completion: an `m x n` host matrix with
/// an `s x r` frame block (`m >= s >= r`, `n >= r`, `m >= n`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameDims {
    pub m: usize,
    pub n: usize,
    pub s: usize,
    pub r: usize,
}

impl FrameDims {
    pub fn new(m: usize, n: usize, s: usize, r: usize) -> Result<Self> {
        if m < s || s < r || n < r || m < n {
            return Err(Error::DimensionMismatch(format!(
                "frame dims need m >= s >= r and m >= n >= r, got m={m} n={n} s={s} r={r}"
            )));
        }
        Ok(Self { m, n, s, r })
    }
}

/// Dense coefficient table `A[j][p][q]` for `0 <= j <= n`, `0 <= p <= s`,
/// `0 <= q <= r`: the coefficient of `x^(n-j) y^(2p) z^(2q)` in `θ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaTable {
    n: usize,
    s: usize,
    r: usize,
    entries: Vec<Rat>,
}

impl ThetaTable {
    pub fn zeros(n: usize, s: usize, r: usize) -> Self {
        Self {
            n,
            s,
            r,
            entries: vec![Rat::zero(); (n + 1) * (s + 1) * (r + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn r(&self) -> usize {
        self.r
    }

    fn idx(&self, j: usize, p: usize, q: usize) -> usize {
        debug_assert!(j <= self.n && p <= self.s && q <= self.r);
        (j * (self.s + 1) + p) * (self.r + 1) + q
    }

    pub fn get(&self, j: usize, p: usize, q: usize) -> &Rat {
        &self.entries[self.idx(j, p, q)]
    }

    pub fn set(&mut self, j: usize, p: usize, q: usize, value: Rat) {
        let i = self.idx(j, p, q);
        self.entries[i] = value;
    }

    /// Checks the structural invariants: the empty-minor entry is 1, all
    /// entries are nonnegative, and entries with `p > j` or `q > j` vanish.
    pub fn validate(&self) -> Result<()> {
        if self.get(0, 0, 0) != &rat(1) {
            return Err(Error::Internal(
                "theta table: empty-minor entry must be 1".into(),
            ));
        }
        for j in 0..=self.n {
            for p in 0..=self.s {
                for q in 0..=self.r {
                    let v = self.get(j, p, q);
                    if v < &rat(0) {
                        return Err(Error::Internal(format!(
                            "theta table: negative entry at ({j},{p},{q})"
                        )));
                    }
                    if (p > j || q > j) && v != &rat(0) {
                        return Err(Error::Internal(format!(
                            "theta table: entry at ({j},{p},{q}) must vanish"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Serializes as a `n s r` header followed by one `j p q num/den` line
    /// per nonzero entry, in lexicographic order.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.n, self.s, self.r);
        for j in 0..=self.n {
            for p in 0..=self.s {
                for q in 0..=self.r {
                    let v = self.get(j, p, q);
                    if !v.is_zero() {
                        out.push_str(&format!("{j} {p} {q} {}\n", crate::rat::format_rat(v)));
                    }
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty theta table".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|w| {
                w.parse()
                    .map_err(|_| Error::Parse(format!("bad header field '{w}'")))
            })
            .collect::<Result<_>>()?;
        let [n, s, r] = dims[..] else {
            return Err(Error::Parse("theta header needs exactly 'n s r'".into()));
        };
        let mut table = Self::zeros(n, s, r);
        for line in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [j, p, q, value] = fields[..] else {
                return Err(Error::Parse(format!("bad theta entry line '{line}'")));
            };
            let parse_idx = |w: &str| -> Result<usize> {
                w.parse()
                    .map_err(|_| Error::Parse(format!("bad index '{w}'")))
            };
            let (j, p, q) = (parse_idx(j)?, parse_idx(p)?, parse_idx(q)?);
            if j > n || p > s || q > r {
                return Err(Error::Parse(format!("entry ({j},{p},{q}) out of range")));
            }
            if !table.get(j, p, q).is_zero() {
                return Err(Error::Parse(format!("duplicate entry ({j},{p},{q})")));
            }
            table.set(j, p, q, parse_rat(value)?);
        }
        Ok(table)
    }
}

use num_traits::Zero;

/// Interpolates per-grid-point `x`-polynomials into a coefficient table:
/// first across the `z` nodes for every fixed `y` node, then across the
/// `y` nodes.
fn interpolate_table(
    n: usize,
    s: usize,
    r: usize,
    y_nodes: &[Rat],
    z_nodes: &[Rat],
    evals: &[Vec<RatPoly>],
) -> Result<ThetaTable> {
    let mut z_interp = Vec::with_capacity(y_nodes.len());
    for row in evals {
        let mut per_degree = Vec::with_capacity(n + 1);
        for d in 0..=n {
            let points: Vec<(Rat, Rat)> = z_nodes
                .iter()
                .cloned()
                .zip(row.iter().map(|p| p.coeff(d)))
                .collect();
            per_degree.push(lagrange_interpolate(&points)?);
        }
        z_interp.push(per_degree);
    }
    let mut table = ThetaTable::zeros(n, s, r);
    for d in 0..=n {
        for q in 0..=r {
            let points: Vec<(Rat, Rat)> = y_nodes
                .iter()
                .cloned()
                .zip(z_interp.iter().map(|per| per[d].coeff(q)))
                .collect();
            let in_y = lagrange_interpolate(&points)?;
            if in_y.degree().is_some_and(|deg| deg > s) {
                return Err(Error::Internal(format!(
                    "theta interpolation exceeded y-degree bound at x-degree {d}, q={q}"
                )));
            }
            for p in 0..=s {
                let v = in_y.coeff(p);
                if !v.is_zero() {
                    table.set(n - d, p, q, v);
                }
            }
        }
    }
    table.validate()?;
    Ok(table)
}

/// Full coefficient table of `θ_A(x, y, z)` for the leading `s` rows and
/// `r` columns, via exact evaluation at `y² ∈ {1..s+1}`, `z² ∈ {1..r+1}`
/// and nested interpolation.
pub fn theta(a: &RatMatrix, s: usize, r: usize) -> Result<ThetaTable> {
    if s > a.rows() || r > a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "cut sizes ({s},{r}) exceed matrix shape {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.cols();
    let y_nodes: Vec<Rat> = (1..=s as i64 + 1).map(rat).collect();
    let z_nodes: Vec<Rat> = (1..=r as i64 + 1).map(rat).collect();
    let grid: Vec<(usize, usize)> = (0..y_nodes.len())
        .flat_map(|i| (0..z_nodes.len()).map(move |j| (i, j)))
        .collect();
    let polys: Vec<RatPoly> = grid
        .par_iter()
        .map(|&(yi, zi)| {
            // det(xI + D_Z A^T D_Y A) with the first s rows of A weighted
            // by Y and the first r coordinates weighted by Z; conjugation
            // by diag(z) makes this equal to the defining determinant.
            let yv = &y_nodes[yi];
            let zv = &z_nodes[zi];
            let weighted = RatMatrix::from_fn(a.rows(), n, |i, j| {
                let v = a.at(i, j).clone();
                if i < s {
                    v * yv
                } else {
                    v
                }
            });
            let gram = a.transpose().mul(&weighted);
            let scaled = RatMatrix::from_fn(n, n, |i, j| {
                let v = gram.at(i, j).clone();
                if i < r {
                    v * zv
                } else {
                    v
                }
            });
            scaled.charpoly_plus()
        })
        .collect();
    let evals: Vec<Vec<RatPoly>> = polys.chunks(z_nodes.len()).map(|c| c.to_vec()).collect();
    interpolate_table(n, s, r, &y_nodes, &z_nodes, &evals)
}

fn rank_one_weight(block: usize, tail: usize, value: &Rat) -> RatMatrix {
    // value * I + ((1 - value)/block) * J on the leading block, identity on
    // the tail: the rational conjugation image of diag(y I_(block-1), 1).
    let correction = (rat(1) - value) / rat(block as i64);
    RatMatrix::from_fn(block + tail, block + tail, |i, j| {
        if i < block && j < block {
            let mut v = correction.clone();
            if i == j {
                v += value;
            }
            v
        } else if i == j {
            rat(1)
        } else {
            rat(0)
        }
    })
}

/// Coefficient table of `θ` for the orthogonally conjugated completion
/// matrix, computed without forming any irrational basis: the conjugation
/// collapses to the rational weights
/// `W_y = (y² I_(kl) + ((1-y²)/(kl)) J) ⊕ I` and
/// `W_z = (z² I_l + ((1-z²)/l) J) ⊕ I`, and the table is read off
/// `det(xI + (A⁺)^T W_y A⁺ W_z)` with `s = kl - 1`, `r = l - 1`.
/// `A_plus` must carry its free left vertices as the first `kl` rows and
/// its free right vertices as the first `l` columns.
pub fn theta_hat(a_plus: &RatMatrix, k: usize, l: usize, t: usize) -> Result<ThetaTable> {
    let n = a_plus.cols();
    if k < 1 || a_plus.rows() != k * n {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{n}, expected rows = k*cols with k={k}",
            a_plus.rows()
        )));
    }
    if l < 1 || l + t != n {
        return Err(Error::OutOfDomain(format!(
            "need l >= 1 and l + t = cols, got l={l} t={t}"
        )));
    }
    let s = k * l - 1;
    let r = l - 1;
    let y_nodes: Vec<Rat> = (1..=s as i64 + 1).map(rat).collect();
    let z_nodes: Vec<Rat> = (1..=r as i64 + 1).map(rat).collect();
    let grid: Vec<(usize, usize)> = (0..y_nodes.len())
        .flat_map(|i| (0..z_nodes.len()).map(move |j| (i, j)))
        .collect();
    let polys: Vec<RatPoly> = grid
        .par_iter()
        .map(|&(yi, zi)| {
            let w_y = rank_one_weight(k * l, k * t, &y_nodes[yi]);
            let w_z = rank_one_weight(l, t, &z_nodes[zi]);
            a_plus
                .transpose()
                .mul(&w_y)
                .mul(a_plus)
                .mul(&w_z)
                .charpoly_plus()
        })
        .collect();
    let evals: Vec<Vec<RatPoly>> = polys.chunks(z_nodes.len()).map(|c| c.to_vec()).collect();
    interpolate_table(n, s, r, &y_nodes, &z_nodes, &evals)
}

fn rat_binomial(n: usize, k: usize) -> Rat {
    Rat::from_integer(binomial(n, k))
}

/// Expected completion polynomial: with `A^j_{p,q}` from the table,
/// `c_i = Σ_{j,p,q} [binom(s-p, i-j) binom(r-q, i-j) / binom(s, i-j)] k^(i-j) A^j_{p,q}`
/// and the result is `Σ_i c_i x^(n-i)`, the expected
/// `det(xI + (A + sqrt(k) Q)^T (A + sqrt(k) Q))` over uniform `s x r`
/// frames `Q` padded with zeros.
pub fn expected_completion(tab: &ThetaTable, dims: &FrameDims, k: usize) -> Result<RatPoly> {
    if tab.n() != dims.n || tab.s() != dims.s || tab.r() != dims.r {
        return Err(Error::DimensionMismatch(format!(
            "table dims ({},{},{}) do not match frame dims ({},{},{})",
            tab.n(),
            tab.s(),
            tab.r(),
            dims.n,
            dims.s,
            dims.r
        )));
    }
    let (n, s, r) = (dims.n, dims.s, dims.r);
    // Weight binom(s-p, e) binom(r-q, e) k^e / binom(s, e), cached per
    // (e, p, q); zero binomials are skipped entirely.
    let mut k_pow = vec![rat(1)];
    for _ in 1..=n {
        let last = k_pow.last().unwrap().clone();
        k_pow.push(last * rat(k as i64));
    }
    let mut coeffs = vec![Rat::zero(); n + 1];
    for (i, slot) in coeffs.iter_mut().enumerate() {
        let mut c = Rat::zero();
        for j in 0..=i {
            let e = i - j;
            if e > s {
                continue;
            }
            let denom = rat_binomial(s, e);
            for p in 0..=s.min(j) {
                if s - p < e {
                    continue;
                }
                let b1 = rat_binomial(s - p, e);
                for q in 0..=r.min(j) {
                    if r - q < e {
                        continue;
                    }
                    let a = tab.get(j, p, q);
                    if a.is_zero() {
                        continue;
                    }
                    c += &b1 * rat_binomial(r - q, e) / &denom * &k_pow[e] * a;
                }
            }
        }
        *slot = c;
    }
    // c_i multiplies x^(n-i).
    coeffs.reverse();
    Ok(RatPoly::from_coeffs(coeffs))
}

/// Converts a `det(xI + G)`-convention polynomial to the monic
/// characteristic polynomial `det(xI - G)`: `q(x) = (-1)^n p(-x)`.
pub fn gram_poly_from_completion(p_plus: &RatPoly) -> RatPoly {
    let Some(n) = p_plus.degree() else {
        return RatPoly::zero();
    };
    let coeffs: Vec<Rat> = (0..=n)
        .map(|d| {
            let sign = if (n - d) % 2 == 0 { rat(1) } else { rat(-1) };
            p_plus.coeff(d) * sign
        })
        .collect();
    RatPoly::from_coeffs(coeffs)
}

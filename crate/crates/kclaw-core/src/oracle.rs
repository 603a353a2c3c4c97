//! Brute-force and Monte-Carlo reference computations for the expectation
//! identities the construction relies on.
//!
//! Everything here is deliberately independent of the convolution and
//! generating-function code paths: expectations are computed by direct
//! enumeration of the ensemble (or by seeded sampling for Stiefel frames),
//! so they can serve as oracles for the fast routes.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ensemble::{
    checked_factorial, checked_signed_count, helmert_norms_sq, permutation_matrix, permutations,
    signed_permutation_matrix, standard_rep_unnormalized, stiefel_sample,
};
use crate::error::{Error, Result};
use crate::matrix::{claw_block, IndexSet, RatMatrix};
use crate::poly::RatPoly;
use crate::rat::{binomial, rat, ratio, Rat};

/// Ensemble selector for the minor-orthogonality checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PermEnsemble {
    /// Uniform permutation matrices of the given dimension. Not
    /// minor-orthogonal (E[P_11 P_22] = (n-2)!/n! != 0 already at order
    /// one); included so the check can exhibit the failure.
    Permutation { dim: usize },
    /// Uniform signed permutation matrices: minor-orthogonal, enumerable.
    SignedPermutation { dim: usize },
    /// Standard representation of the symmetric group on `dim + 1` points,
    /// in the scaled integer form of
    /// [`standard_rep_unnormalized`](crate::ensemble::standard_rep_unnormalized);
    /// the normalization is divided out exactly inside the check.
    StandardRepresentation { dim: usize },
    /// Haar frames with `dim` rows and `frame_cols` orthonormal columns,
    /// checked by seeded Monte Carlo.
    StiefelMc {
        dim: usize,
        frame_cols: usize,
        trials: usize,
        seed: u64,
    },
}

impl PermEnsemble {
    fn describe(&self) -> String {
        match self {
            Self::Permutation { dim } => format!("permutation({dim})"),
            Self::SignedPermutation { dim } => format!("signed-permutation({dim})"),
            Self::StandardRepresentation { dim } => format!("standard-representation({dim})"),
            Self::StiefelMc {
                dim,
                frame_cols,
                trials,
                seed,
            } => {
                format!("stiefel-mc({dim}x{frame_cols}, trials={trials}, seed={seed})")
            }
        }
    }
}

/// Outcome of a minor-orthogonality check. For Monte-Carlo ensembles the
/// acceptance gates are `|z| <= 3` on matched (diagonal) quadruples and a
/// familywise `|z| <= 5` on the zero (off-diagonal) quadruples; exact
/// ensembles must match the predicted rationals exactly.
#[derive(Debug, Clone)]
pub struct MinorOrthReport {
    pub ensemble: String,
    pub sizes: (usize, usize),
    pub quadruples: usize,
    pub pass: bool,
    pub failures: Vec<String>,
    pub max_diag_z: Option<f64>,
    pub max_offdiag_z: Option<f64>,
}

impl std::fmt::Display for MinorOrthReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "minor-orthogonality {} sizes=({},{}) quadruples={} -> {}",
            self.ensemble,
            self.sizes.0,
            self.sizes.1,
            self.quadruples,
            if self.pass { "pass" } else { "FAIL" }
        )?;
        if let (Some(d), Some(o)) = (self.max_diag_z, self.max_offdiag_z) {
            writeln!(f, "  max |z| diagonal {d:.3}, off-diagonal {o:.3}")?;
        }
        for line in &self.failures {
            writeln!(f, "  counterexample: {line}")?;
        }
        Ok(())
    }
}

fn fmt_sets(s: &IndexSet, t: &IndexSet, u: &IndexSet, v: &IndexSet) -> String {
    let show = |x: &IndexSet| {
        let items: Vec<String> = x.iter().map(|i| i.to_string()).collect();
        format!("{{{}}}", items.join(","))
    };
    format!("S={} T={} U={} V={}", show(s), show(t), show(u), show(v))
}

fn rat_binomial(n: usize, k: usize) -> Rat {
    Rat::from_integer(binomial(n, k))
}

/// Averages `f(index)` over `count` enumerated terms in parallel. Exact
/// arithmetic makes the result independent of the reduction schedule.
fn average_charpolys<F>(count: usize, f: F) -> RatPoly
where
    F: Fn(usize) -> RatPoly + Sync + Send,
{
    let sum = (0..count)
        .into_par_iter()
        .map(f)
        .reduce(RatPoly::zero, |a, b| &a + &b);
    sum.scale(&ratio(1, count as i64))
}

/// Exact average over all permutation pairs `(P, S)` of the characteristic
/// polynomial of the symmetric embedding of `A + P B S^T`.
pub fn expected_bipartite_charpoly_bruteforce(
    a: &RatMatrix,
    b: &RatMatrix,
    cap: u128,
) -> Result<RatPoly> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::DimensionMismatch(format!(
            "shape mismatch: {}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let (m, n) = (a.rows(), a.cols());
    let needed = checked_factorial(m)
        .and_then(|x| x.checked_mul(checked_factorial(n)?))
        .ok_or(Error::CapExceeded {
            needed: u128::MAX,
            cap,
        })?;
    if needed > cap {
        return Err(Error::CapExceeded { needed, cap });
    }
    let ps: Vec<RatMatrix> = permutations(m, cap)?
        .iter()
        .map(|p| permutation_matrix(p))
        .collect();
    let ss: Vec<RatMatrix> = permutations(n, cap)?
        .iter()
        .map(|p| permutation_matrix(p))
        .collect();
    Ok(average_charpolys(ps.len() * ss.len(), |idx| {
        let p = &ps[idx / ss.len()];
        let s = &ss[idx % ss.len()];
        a.add(&p.mul(b).mul(&s.transpose()))
            .bipartite_embed()
            .charpoly()
    }))
}

/// Exact average over all signed permutation pairs `(Q, R)` of
/// `det(xI - (A + Q B R^T)^T (A + Q B R^T))`. The result is verified
/// against the rectangular convolution of the two Gram characteristic
/// polynomials before being returned.
pub fn expected_gram_charpoly_signed(a: &RatMatrix, b: &RatMatrix, cap: u128) -> Result<RatPoly> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::DimensionMismatch(format!(
            "shape mismatch: {}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let (m, n) = (a.rows(), a.cols());
    let needed = checked_signed_count(m)
        .and_then(|x| x.checked_mul(checked_signed_count(n)?))
        .ok_or(Error::CapExceeded {
            needed: u128::MAX,
            cap,
        })?;
    if needed > cap {
        return Err(Error::CapExceeded { needed, cap });
    }
    let mut qs = Vec::new();
    for perm in permutations(m, cap)? {
        for mask in 0..1u64 << m {
            qs.push(signed_permutation_matrix(&perm, mask));
        }
    }
    let mut rs = Vec::new();
    for perm in permutations(n, cap)? {
        for mask in 0..1u64 << n {
            rs.push(signed_permutation_matrix(&perm, mask));
        }
    }
    let avg = average_charpolys(qs.len() * rs.len(), |idx| {
        let q = &qs[idx / rs.len()];
        let r = &rs[idx % rs.len()];
        a.add(&q.mul(b).mul(&r.transpose())).gram_charpoly()
    });
    let dims = crate::conv::ConvDims::new(m, n)?;
    let conv = crate::conv::rect_conv(&a.gram_charpoly(), &b.gram_charpoly(), dims)?;
    if avg != conv {
        return Err(Error::Internal(format!(
            "signed expectation {avg} disagrees with convolution {conv}"
        )));
    }
    Ok(avg)
}

/// Exact average over `(P, S)` in `P_(kl) x P_l` of the characteristic
/// polynomial of the symmetric embedding of `A + (P (+) I) C (S (+) I)^T`,
/// where `C` places the stacked identity `I_l^{[k]}` on the first `kl` rows
/// and `l` columns. `A` must already be permuted so its free left vertices
/// are the first `kl` rows and its free right vertices the first `l`
/// columns; `t` is the number of claws already placed in the current
/// matching, so `l = cols - t` is required.
pub fn partial_matching_bruteforce(
    a: &RatMatrix,
    k: usize,
    l: usize,
    t: usize,
    cap: u128,
) -> Result<RatPoly> {
    let (m, n) = (a.rows(), a.cols());
    if k < 1 || m != k * n {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {m}x{n}, expected rows = k*cols with k={k}"
        )));
    }
    if l + t != n {
        return Err(Error::OutOfDomain(format!(
            "need l + t = cols, got l={l} t={t} cols={n}"
        )));
    }
    if l == 0 {
        return Ok(a.bipartite_embed().charpoly());
    }
    let needed = checked_factorial(k * l)
        .and_then(|x| x.checked_mul(checked_factorial(l)?))
        .ok_or(Error::CapExceeded {
            needed: u128::MAX,
            cap,
        })?;
    if needed > cap {
        return Err(Error::CapExceeded { needed, cap });
    }
    let block = claw_block(m, n, l, k);
    let expand = |perm: &[usize], dim: usize| -> RatMatrix {
        // P (+) I: permute the leading free block, fix the rest.
        RatMatrix::from_fn(dim, dim, |i, j| {
            if j < perm.len() {
                if i == perm[j] {
                    rat(1)
                } else {
                    rat(0)
                }
            } else if i == j {
                rat(1)
            } else {
                rat(0)
            }
        })
    };
    let ps: Vec<RatMatrix> = permutations(k * l, cap)?
        .iter()
        .map(|p| expand(p, m))
        .collect();
    let ss: Vec<RatMatrix> = permutations(l, cap)?.iter().map(|p| expand(p, n)).collect();
    Ok(average_charpolys(ps.len() * ss.len(), |idx| {
        let p = &ps[idx / ss.len()];
        let s = &ss[idx % ss.len()];
        a.add(&p.mul(&block).mul(&s.transpose()))
            .bipartite_embed()
            .charpoly()
    }))
}

/// Verifies `E[[Q]_{S,T} [Q]_{U,V}] = 1{S=U} 1{T=V} / binom(rows, |S|)`
/// with `|S| = |T| = sizes.0` and `|U| = |V| = sizes.1`, exactly for the
/// enumerable ensembles and within Monte-Carlo error for Stiefel frames.
pub fn minor_orthogonality_check(
    ens: &PermEnsemble,
    sizes: (usize, usize),
    cap: u128,
) -> Result<MinorOrthReport> {
    match ens {
        PermEnsemble::Permutation { dim } => {
            let needed = checked_factorial(*dim).ok_or(Error::CapExceeded {
                needed: u128::MAX,
                cap,
            })?;
            if needed > cap {
                return Err(Error::CapExceeded { needed, cap });
            }
            let mats: Vec<RatMatrix> = permutations(*dim, cap)?
                .iter()
                .map(|p| permutation_matrix(p))
                .collect();
            exact_minor_check(ens, &mats, *dim, *dim, *dim, sizes, None)
        }
        PermEnsemble::SignedPermutation { dim } => {
            let needed = checked_signed_count(*dim).ok_or(Error::CapExceeded {
                needed: u128::MAX,
                cap,
            })?;
            if needed > cap {
                return Err(Error::CapExceeded { needed, cap });
            }
            let mut mats = Vec::new();
            for perm in permutations(*dim, cap)? {
                for mask in 0..1u64 << *dim {
                    mats.push(signed_permutation_matrix(&perm, mask));
                }
            }
            exact_minor_check(ens, &mats, *dim, *dim, *dim, sizes, None)
        }
        PermEnsemble::StandardRepresentation { dim } => {
            let needed = checked_factorial(dim + 1).ok_or(Error::CapExceeded {
                needed: u128::MAX,
                cap,
            })?;
            if needed > cap {
                return Err(Error::CapExceeded { needed, cap });
            }
            let mats: Vec<RatMatrix> = permutations(dim + 1, cap)?
                .iter()
                .map(|p| standard_rep_unnormalized(p))
                .collect();
            // The orthonormal representation divides row/column j by the
            // Helmert norm; fold the correction into the expected values.
            let norms = helmert_norms_sq(*dim);
            exact_minor_check(ens, &mats, *dim, *dim, *dim, sizes, Some(&norms))
        }
        PermEnsemble::StiefelMc {
            dim,
            frame_cols,
            trials,
            seed,
        } => mc_minor_check(ens, *dim, *frame_cols, *trials, *seed, sizes),
    }
}

fn exact_minor_check(
    ens: &PermEnsemble,
    mats: &[RatMatrix],
    rows: usize,
    cols: usize,
    denom_dim: usize,
    sizes: (usize, usize),
    norms: Option<&[Rat]>,
) -> Result<MinorOrthReport> {
    let (i, l) = sizes;
    if i > rows.min(cols) || l > rows.min(cols) || i == 0 || l == 0 {
        return Err(Error::OutOfDomain(format!(
            "minor orders ({i},{l}) out of range for {rows}x{cols}"
        )));
    }
    let count = rat(mats.len() as i64);
    let pairs_i: Vec<(IndexSet, IndexSet)> = subset_pairs(rows, cols, i);
    let pairs_l: Vec<(IndexSet, IndexSet)> = subset_pairs(rows, cols, l);
    // One pass per matrix: all minors of both orders, then every product.
    let minors = |order_pairs: &[(IndexSet, IndexSet)], m: &RatMatrix| -> Result<Vec<Rat>> {
        order_pairs.iter().map(|(s, t)| m.minor(s, t)).collect()
    };
    let mut sums = vec![vec![rat(0); pairs_l.len()]; pairs_i.len()];
    for m in mats {
        let mi = minors(&pairs_i, m)?;
        let ml = if i == l {
            mi.clone()
        } else {
            minors(&pairs_l, m)?
        };
        for (a, va) in mi.iter().enumerate() {
            for (b, vb) in ml.iter().enumerate() {
                sums[a][b] += va * vb;
            }
        }
    }
    let scale =
        |set: &IndexSet, ns: &[Rat]| -> Rat { set.iter().map(|j| ns[j - 1].clone()).product() };
    let mut failures = Vec::new();
    for (a, (s, t)) in pairs_i.iter().enumerate() {
        for (b, (u, v)) in pairs_l.iter().enumerate() {
            let got = &sums[a][b] / &count;
            let diagonal = i == l && s == u && t == v;
            let mut want = if diagonal {
                rat(1) / rat_binomial(denom_dim, i)
            } else {
                rat(0)
            };
            if let Some(ns) = norms {
                // Unnormalized minors gain the product of squared norms on
                // the diagonal; off-diagonal stays zero.
                if diagonal {
                    want *= scale(s, ns) * scale(t, ns);
                }
            }
            if got != want && failures.len() < 8 {
                failures.push(format!("{}: got {got}, want {want}", fmt_sets(s, t, u, v)));
            }
        }
    }
    Ok(MinorOrthReport {
        ensemble: ens.describe(),
        sizes,
        quadruples: pairs_i.len() * pairs_l.len(),
        pass: failures.is_empty(),
        failures,
        max_diag_z: None,
        max_offdiag_z: None,
    })
}

fn subset_pairs(rows: usize, cols: usize, order: usize) -> Vec<(IndexSet, IndexSet)> {
    let row_sets = IndexSet::subsets(rows, order);
    let col_sets = IndexSet::subsets(cols, order);
    let mut out = Vec::with_capacity(row_sets.len() * col_sets.len());
    for s in &row_sets {
        for t in &col_sets {
            out.push((s.clone(), t.clone()));
        }
    }
    out
}

fn float_minor(m: &DMatrix<f64>, s: &IndexSet, t: &IndexSet) -> f64 {
    let rows: Vec<usize> = s.iter().map(|v| v - 1).collect();
    let cols: Vec<usize> = t.iter().map(|v| v - 1).collect();
    let sub = DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])]);
    sub.determinant()
}

fn mc_minor_check(
    ens: &PermEnsemble,
    s_dim: usize,
    r_dim: usize,
    trials: usize,
    seed: u64,
    sizes: (usize, usize),
) -> Result<MinorOrthReport> {
    let (i, l) = sizes;
    if trials < 1 {
        return Err(Error::OutOfDomain("stiefel-mc needs trials >= 1".into()));
    }
    if i == 0 || l == 0 || i > r_dim || l > r_dim || i > s_dim || l > s_dim {
        return Err(Error::OutOfDomain(format!(
            "minor orders ({i},{l}) out of range for {s_dim}x{r_dim}"
        )));
    }
    let pairs_i = subset_pairs(s_dim, r_dim, i);
    let pairs_l = subset_pairs(s_dim, r_dim, l);
    let mut sums = vec![vec![0.0f64; pairs_l.len()]; pairs_i.len()];
    let mut sums_sq = vec![vec![0.0f64; pairs_l.len()]; pairs_i.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let q = stiefel_sample(s_dim, r_dim, &mut rng)?;
        let mi: Vec<f64> = pairs_i.iter().map(|(s, t)| float_minor(&q, s, t)).collect();
        let ml: Vec<f64> = if i == l {
            mi.clone()
        } else {
            pairs_l.iter().map(|(s, t)| float_minor(&q, s, t)).collect()
        };
        for (a, va) in mi.iter().enumerate() {
            for (b, vb) in ml.iter().enumerate() {
                let prod = va * vb;
                sums[a][b] += prod;
                sums_sq[a][b] += prod * prod;
            }
        }
    }
    let mut failures = Vec::new();
    let mut max_diag_z = 0.0f64;
    let mut max_off_z = 0.0f64;
    let nf = trials as f64;
    for (a, (s, t)) in pairs_i.iter().enumerate() {
        for (b, (u, v)) in pairs_l.iter().enumerate() {
            let mean = sums[a][b] / nf;
            let var = ((sums_sq[a][b] / nf) - mean * mean) * nf / (nf - 1.0).max(1.0);
            let se = (var / nf).sqrt();
            let diagonal = i == l && s == u && t == v;
            let want = if diagonal {
                1.0 / to_f64_binom(s_dim, i)
            } else {
                0.0
            };
            let z = if se > 0.0 {
                (mean - want) / se
            } else if mean == want {
                0.0
            } else {
                f64::INFINITY
            };
            let (gate, tracked) = if diagonal {
                max_diag_z = max_diag_z.max(z.abs());
                (3.0, max_diag_z)
            } else {
                max_off_z = max_off_z.max(z.abs());
                (5.0, max_off_z)
            };
            let _ = tracked;
            if z.abs() > gate && failures.len() < 8 {
                failures.push(format!(
                    "{}: mean {mean:.6e}, want {want:.6e}, |z| = {:.2}",
                    fmt_sets(s, t, u, v),
                    z.abs()
                ));
            }
        }
    }
    Ok(MinorOrthReport {
        ensemble: ens.describe(),
        sizes,
        quadruples: pairs_i.len() * pairs_l.len(),
        pass: failures.is_empty(),
        failures,
        max_diag_z: Some(max_diag_z),
        max_offdiag_z: Some(max_off_z),
    })
}

fn to_f64_binom(n: usize, k: usize) -> f64 {
    use num_traits::ToPrimitive;
    binomial(n, k).to_f64().unwrap_or(f64::MAX)
}

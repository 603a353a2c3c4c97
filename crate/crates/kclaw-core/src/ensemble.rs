//! Matrix ensembles: permutations, signed permutations, the standard
//! representation of the symmetric group, and Haar-distributed Stiefel
//! frames.
//!
//! Everything except the Stiefel sampler is exact. The standard
//! representation is kept in an unnormalized integer form built from a
//! Helmert-style basis of the mean-zero subspace, so expectations of minor
//! products stay rational: the orthonormal representation differs only by
//! the diagonal column-norm scaling, which callers divide out.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::RatMatrix;
use crate::rat::{rat, Rat};

/// `n!` as `u128`, or `None` on overflow.
pub fn checked_factorial(n: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for i in 2..=n {
        acc = acc.checked_mul(i as u128)?;
    }
    Some(acc)
}

/// `n! * 2^n` (the signed permutation count), or `None` on overflow.
pub fn checked_signed_count(n: usize) -> Option<u128> {
    let f = checked_factorial(n)?;
    if n >= 128 {
        return None;
    }
    f.checked_mul(1u128 << n)
}

/// All permutations of `{0, .., n-1}` in lexicographic order. Errors with
/// [`Error::CapExceeded`] when `n!` exceeds `cap`.
pub fn permutations(n: usize, cap: u128) -> Result<Vec<Vec<usize>>> {
    let needed = checked_factorial(n).ok_or(Error::CapExceeded {
        needed: u128::MAX,
        cap,
    })?;
    if needed > cap {
        return Err(Error::CapExceeded { needed, cap });
    }
    let mut out = Vec::with_capacity(needed as usize);
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // Standard next-permutation step; ends after the descending word.
        let Some(i) = (0..n.saturating_sub(1))
            .rev()
            .find(|&i| cur[i] < cur[i + 1])
        else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    Ok(out)
}

/// Permutation matrix with columns `P e_j = e_{perm[j]}`.
pub fn permutation_matrix(perm: &[usize]) -> RatMatrix {
    let n = perm.len();
    let mut p = RatMatrix::zeros(n, n);
    for (j, &i) in perm.iter().enumerate() {
        p.set(i, j, rat(1));
    }
    p
}

/// Signed permutation matrix: column `j` carries sign `(-1)^(mask bit j)`.
pub fn signed_permutation_matrix(perm: &[usize], mask: u64) -> RatMatrix {
    let n = perm.len();
    debug_assert!(n <= 64);
    let mut p = RatMatrix::zeros(n, n);
    for (j, &i) in perm.iter().enumerate() {
        let sign = if mask >> j & 1 == 1 { rat(-1) } else { rat(1) };
        p.set(i, j, sign);
    }
    p
}

/// Integer basis of the mean-zero subspace of `R^(n+1)`: an `(n+1) x n`
/// matrix whose column `j` (0-based) has `j+1` leading ones followed by
/// `-(j+1)`. Columns are orthogonal to each other and to the all-ones
/// vector, with squared norms `(j+1)(j+2)`.
pub fn helmert_basis(n: usize) -> RatMatrix {
    RatMatrix::from_fn(n + 1, n, |i, j| {
        if i <= j {
            rat(1)
        } else if i == j + 1 {
            rat(-(j as i64 + 1))
        } else {
            rat(0)
        }
    })
}

/// Squared column norms of [`helmert_basis`]: `(j+1)(j+2)` for `j` 0-based.
pub fn helmert_norms_sq(n: usize) -> Vec<Rat> {
    (0..n)
        .map(|j| rat((j as i64 + 1) * (j as i64 + 2)))
        .collect()
}

/// Unnormalized standard representation of a permutation of `n+1` points:
/// `H^T P H` with `H` the Helmert basis. The orthonormal representation is
/// `N^(-1/2) (H^T P H) N^(-1/2)` with `N` the diagonal of squared column
/// norms, so `M^T N^(-1) M = N` exactly.
pub fn standard_rep_unnormalized(perm: &[usize]) -> RatMatrix {
    assert!(
        !perm.is_empty(),
        "permutation must act on at least one point"
    );
    let n = perm.len() - 1;
    let h = helmert_basis(n);
    let p = permutation_matrix(perm);
    h.transpose().mul(&p).mul(&h)
}

/// Haar-distributed `s x r` frame with orthonormal columns (`s >= r >= 1`),
/// via QR of a Gaussian matrix with the column signs fixed by the sign of
/// the corresponding diagonal entry of `R`.
pub fn stiefel_sample<R: Rng + ?Sized>(s: usize, r: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    if r < 1 || s < r {
        return Err(Error::OutOfDomain(
            "stiefel_sample needs s >= r >= 1".into(),
        ));
    }
    let g = DMatrix::from_fn(s, r, |_, _| {
        let x: f64 = StandardNormal.sample(rng);
        x
    });
    let qr = g.qr();
    let rr = qr.r();
    let mut q = qr.q();
    for j in 0..r {
        if rr[(j, j)] < 0.0 {
            for i in 0..s {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn permutations_lex_order_and_cap() {
        let perms = permutations(3, 1_000).unwrap();
        assert_eq!(
            perms,
            vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0],
            ]
        );
        assert_eq!(permutations(0, 10).unwrap(), vec![Vec::<usize>::new()]);
        match permutations(4, 10) {
            Err(Error::CapExceeded {
                needed: 24,
                cap: 10,
            }) => {}
            other => panic!("expected cap error, got {other:?}"),
        }
        assert_eq!(checked_factorial(35), None);
        assert_eq!(checked_signed_count(3), Some(48));
    }

    #[test]
    fn permutation_matrices() {
        let p = permutation_matrix(&[1, 2, 0]);
        // Column j maps to row perm[j].
        assert_eq!(p.at(1, 0), &rat(1));
        assert_eq!(p.at(2, 1), &rat(1));
        assert_eq!(p.at(0, 2), &rat(1));
        assert_eq!(p.determinant(), rat(1)); // 3-cycle is even

        let s = signed_permutation_matrix(&[1, 0], 0b10);
        assert_eq!(s.at(1, 0), &rat(1));
        assert_eq!(s.at(0, 1), &rat(-1));
        // Orthogonality: S^T S = I.
        assert_eq!(s.transpose().mul(&s), RatMatrix::identity(2));
    }

    #[test]
    fn helmert_basis_structure() {
        let n = 4;
        let h = helmert_basis(n);
        let gram = h.transpose().mul(&h);
        let norms = helmert_norms_sq(n);
        for (i, ni) in norms.iter().enumerate() {
            for j in 0..n {
                let expected = if i == j { ni.clone() } else { rat(0) };
                assert_eq!(gram.at(i, j), &expected);
            }
        }
        // Columns are orthogonal to the all-ones vector.
        for s in h.transpose().row_sums() {
            assert_eq!(s, rat(0));
        }
    }

    #[test]
    fn standard_rep_is_orthogonal_in_scaled_metric() {
        let n = 3;
        let norms = helmert_norms_sq(n);
        let n_inv = RatMatrix::from_fn(
            n,
            n,
            |i, j| {
                if i == j {
                    rat(1) / &norms[i]
                } else {
                    rat(0)
                }
            },
        );
        let n_diag =
            RatMatrix::from_fn(n, n, |i, j| if i == j { norms[i].clone() } else { rat(0) });
        for perm in permutations(n + 1, 1_000).unwrap() {
            let m = standard_rep_unnormalized(&perm);
            assert_eq!(m.transpose().mul(&n_inv).mul(&m), n_diag);
        }
    }

    #[test]
    fn standard_rep_is_a_homomorphism() {
        let n = 2;
        let norms = helmert_norms_sq(n);
        let n_inv = RatMatrix::from_fn(
            n,
            n,
            |i, j| {
                if i == j {
                    rat(1) / &norms[i]
                } else {
                    rat(0)
                }
            },
        );
        let perms = permutations(n + 1, 1_000).unwrap();
        for sigma in &perms {
            for tau in &perms {
                let compose: Vec<usize> = (0..=n).map(|i| sigma[tau[i]]).collect();
                let lhs = standard_rep_unnormalized(sigma)
                    .mul(&n_inv)
                    .mul(&standard_rep_unnormalized(tau));
                assert_eq!(lhs, standard_rep_unnormalized(&compose));
            }
        }
    }

    #[test]
    fn stiefel_frames_are_orthonormal_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = stiefel_sample(5, 3, &mut rng).unwrap();
        let gram = q.transpose() * &q;
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - expected).abs() < 1e-12);
            }
        }
        let mut rng2 = ChaCha8Rng::seed_from_u64(7);
        let q2 = stiefel_sample(5, 3, &mut rng2).unwrap();
        assert_eq!(q, q2);
        assert!(stiefel_sample(2, 3, &mut rng).is_err());
    }
}

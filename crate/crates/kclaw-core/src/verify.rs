//! Independent certification of constructed graphs: biregularity, a fast
//! floating eigensolver for feedback, and an exact Sturm-count certificate
//! that the nontrivial spectrum stays below the target bound.
//!
//! The certificate is the authority; the floating path is advisory. The
//! squared bound is irrational in general, so it is enclosed in a rational
//! interval and the enclosure is tightened until every root of the reduced
//! Gram polynomial is decided against it.

use nalgebra::DMatrix;

use crate::bounds::ramanujan_bound_sq;
use crate::builder::BigraphAdjacency;
use crate::error::{Error, Result};
use crate::interval::RatInterval;
use crate::poly::RatPoly;
use crate::rat::{decimal_string, format_rat, rat, to_f64};

/// Precision ceiling for the enclosure-refinement loop.
const MAX_PRECISION_BITS: u32 = 65_536;

/// Exact evidence that the second-largest eigenvalue of the bipartite
/// embedding is at most `√(d-1) + √(kd-1)`.
///
/// `gram_poly` is the Gram characteristic polynomial with the trivial root
/// `d²k` stripped; its largest root is the squared second eigenvalue.
/// `roots_above_bound` counts roots strictly above the enclosure's upper
/// end; the certificate is valid iff the count is zero AND every root was
/// decided (no root falls inside the enclosure at the final precision).
#[derive(Debug, Clone)]
pub struct SpectralCertificate {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub precision_bits: u32,
    pub bound_enclosure: RatInterval,
    pub gram_poly: RatPoly,
    pub roots_above_bound: usize,
    valid: bool,
}

impl SpectralCertificate {
    pub fn valid(&self) -> bool {
        self.valid
    }

    /// Structured text with every field; one `key value` line each.
    pub fn to_text(&self) -> String {
        let coeffs: Vec<String> = self.gram_poly.coeffs().iter().map(format_rat).collect();
        let mut out = String::new();
        out.push_str(&format!("n {}\n", self.n));
        out.push_str(&format!("k {}\n", self.k));
        out.push_str(&format!("d {}\n", self.d));
        out.push_str(&format!("precision_bits {}\n", self.precision_bits));
        out.push_str(&format!("trivial_root {}\n", self.d * self.d * self.k));
        out.push_str(&format!(
            "bound_sq_lo {}\n",
            format_rat(self.bound_enclosure.lo())
        ));
        out.push_str(&format!(
            "bound_sq_hi {}\n",
            format_rat(self.bound_enclosure.hi())
        ));
        out.push_str(&format!(
            "bound_sq_approx {}\n",
            decimal_string(self.bound_enclosure.hi(), 12)
        ));
        out.push_str(&format!("gram_poly {}\n", coeffs.join(" ")));
        out.push_str(&format!("roots_above_bound {}\n", self.roots_above_bound));
        out.push_str(&format!("valid {}\n", self.valid));
        out
    }
}

/// True iff every left vertex has degree `d` and every right vertex degree
/// `kd`, counting multiplicity, on a `kn x n` multiplicity matrix.
pub fn check_biregular(g: &BigraphAdjacency, n: usize, k: usize, d: usize) -> bool {
    let m = g.matrix();
    if n < 1 || k < 1 || d < 1 || m.rows() != k * n || m.cols() != n {
        return false;
    }
    let left_deg = rat(d as i64);
    let right_deg = rat((k * d) as i64);
    (0..m.rows()).all(|i| (0..m.cols()).fold(rat(0), |s, j| s + m.at(i, j)) == left_deg)
        && (0..m.cols()).all(|j| (0..m.rows()).fold(rat(0), |s, i| s + m.at(i, j)) == right_deg)
}

/// Second-largest eigenvalue of the symmetric bipartite embedding, by a
/// dense double-precision symmetric eigensolver. Advisory only.
pub fn lambda2_numeric(g: &BigraphAdjacency) -> Result<f64> {
    let m = g.matrix();
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::OutOfDomain("empty graph has no spectrum".into()));
    }
    let embed = m.bipartite_embed();
    let dim = embed.rows();
    let dense = DMatrix::from_fn(dim, dim, |i, j| to_f64(embed.at(i, j)));
    let mut eigs: Vec<f64> = dense.symmetric_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| b.partial_cmp(a).expect("symmetric eigenvalues are finite"));
    Ok(eigs[1])
}

/// Certifies the spectral bound exactly. The Gram characteristic
/// polynomial of the multiplicity matrix is computed in rational
/// arithmetic, the trivial root `d²k` is stripped, and the squared bound
/// `(d-1) + (kd-1) + 2√((d-1)(kd-1))` is enclosed at `precision_bits`,
/// doubling the precision while any root lies inside the enclosure.
pub fn certify_ramanujan(
    g: &BigraphAdjacency,
    n: usize,
    k: usize,
    d: usize,
    precision_bits: u32,
) -> Result<SpectralCertificate> {
    if !check_biregular(g, n, k, d) {
        return Err(Error::OutOfDomain(
            "graph is not (n, k, d)-biregular; nothing to certify".into(),
        ));
    }
    let gram = g.matrix().gram_charpoly();
    let reduced = gram
        .divide_out_root(&rat((d * d * k) as i64))
        .map_err(|_| {
            Error::Internal("trivial root d²k is not an exact root of the Gram polynomial".into())
        })?;
    let mut bits = precision_bits.max(1);
    loop {
        let enclosure = ramanujan_bound_sq(k, d, bits)?;
        let above_hi = reduced.count_roots_above(enclosure.hi())?;
        if above_hi > 0 {
            return Ok(SpectralCertificate {
                n,
                k,
                d,
                precision_bits: bits,
                bound_enclosure: enclosure,
                gram_poly: reduced,
                roots_above_bound: above_hi,
                valid: false,
            });
        }
        if reduced.count_roots_above(enclosure.lo())? == 0 {
            return Ok(SpectralCertificate {
                n,
                k,
                d,
                precision_bits: bits,
                bound_enclosure: enclosure,
                gram_poly: reduced,
                roots_above_bound: 0,
                valid: true,
            });
        }
        // A root sits inside the enclosure: tighten and retry.
        if bits >= MAX_PRECISION_BITS {
            return Err(Error::Internal(format!(
                "root indistinguishable from the bound at {MAX_PRECISION_BITS} bits"
            )));
        }
        bits = (bits * 2).min(MAX_PRECISION_BITS);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::construct;
    use crate::matrix::RatMatrix;

    fn graph(n: usize, k: usize, d: usize, rows: &[Vec<i64>]) -> BigraphAdjacency {
        BigraphAdjacency::new(n, k, d, RatMatrix::from_int_rows(rows)).unwrap()
    }

    #[test]
    fn biregularity_check() {
        let single = graph(2, 2, 1, &[vec![1, 0], vec![0, 1], vec![1, 0], vec![0, 1]]);
        assert!(check_biregular(&single, 2, 2, 1));
        assert!(!check_biregular(&single, 2, 2, 2));
        // One edge moved breaks both a row and a column sum.
        let moved = graph(2, 2, 1, &[vec![1, 0], vec![1, 0], vec![1, 0], vec![0, 1]]);
        assert!(!check_biregular(&moved, 2, 2, 1));
        let built = construct(2, 2, 2).unwrap();
        assert!(check_biregular(&built.graph, 2, 2, 2));
    }

    #[test]
    fn lambda2_known_spectra() {
        // Complete biregular graph: rank-1 biadjacency, so λ₂ = 0.
        let complete = graph(2, 2, 2, &vec![vec![1, 1]; 4]);
        assert!(lambda2_numeric(&complete).unwrap().abs() < 1e-9);
        // 4-cycle (both perfect matchings, k=1): spectrum {±2, 0, 0}.
        let cycle = graph(2, 1, 2, &[vec![1, 1], vec![1, 1]]);
        assert!(lambda2_numeric(&cycle).unwrap().abs() < 1e-9);
        // Doubled single matching: spectrum {±2, ±2}.
        let doubled = graph(2, 1, 2, &[vec![2, 0], vec![0, 2]]);
        assert!((lambda2_numeric(&doubled).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_single_matching_fails() {
        // d=1, k=2: reduced Gram poly (x-2)^(n-1), bound² = 1. Rejected.
        let single = graph(2, 2, 1, &[vec![1, 0], vec![0, 1], vec![1, 0], vec![0, 1]]);
        let cert = certify_ramanujan(&single, 2, 2, 1, 128).unwrap();
        assert!(!cert.valid());
        assert_eq!(cert.roots_above_bound, 1);
        assert_eq!(cert.gram_poly, RatPoly::from_ints(&[-2, 1]));
        assert_eq!(cert.bound_enclosure.lo(), &rat(1));
        assert_eq!(cert.bound_enclosure.hi(), &rat(1));
        // k=1, n=2: bound² = 0, reduced poly (x-1). Also rejected.
        let trivial = graph(2, 1, 1, &[vec![1, 0], vec![0, 1]]);
        let cert = certify_ramanujan(&trivial, 2, 1, 1, 128).unwrap();
        assert!(!cert.valid());
        // k=1, n=1: degree-0 reduced poly, trivially valid.
        let point = graph(1, 1, 1, &[vec![1]]);
        assert!(certify_ramanujan(&point, 1, 1, 1, 128).unwrap().valid());
    }

    #[test]
    fn constructed_graphs_certify() {
        for (n, k, d) in [(2usize, 2usize, 2usize), (3, 2, 3)] {
            let outcome = construct(n, k, d).unwrap();
            let cert = certify_ramanujan(&outcome.graph, n, k, d, 128).unwrap();
            assert!(cert.valid(), "({n},{k},{d})");
            assert_eq!(cert.roots_above_bound, 0);
            // Cross-consistency with the floating path.
            let bound = to_f64(cert.bound_enclosure.hi()).sqrt();
            assert!(lambda2_numeric(&outcome.graph).unwrap() <= bound + 1e-6);
        }
    }

    #[test]
    fn certificate_monotone_in_precision() {
        let outcome = construct(2, 2, 2).unwrap();
        let at_16 = certify_ramanujan(&outcome.graph, 2, 2, 2, 16).unwrap();
        let at_512 = certify_ramanujan(&outcome.graph, 2, 2, 2, 512).unwrap();
        assert!(at_16.valid());
        assert!(at_512.valid());
        assert!(at_512.bound_enclosure.hi() <= at_16.bound_enclosure.hi());
    }

    #[test]
    fn non_biregular_input_is_rejected() {
        let moved = graph(2, 2, 1, &[vec![1, 0], vec![1, 0], vec![1, 0], vec![0, 1]]);
        assert!(certify_ramanujan(&moved, 2, 2, 1, 128).is_err());
    }

    #[test]
    fn bound_equality_case_is_valid() {
        // Doubled single matching, k=1, d=2: reduced Gram poly (x-4) and
        // squared bound 1 + 1 + 2 = 4 exactly. The enclosure is a rational
        // point, the root sits exactly on it, and no root lies strictly
        // above: valid with λ₂ = 2 meeting the bound.
        let doubled = graph(2, 1, 2, &[vec![2, 0], vec![0, 2]]);
        let cert = certify_ramanujan(&doubled, 2, 1, 2, 128).unwrap();
        assert!(cert.valid());
        assert_eq!(cert.gram_poly, RatPoly::from_ints(&[-4, 1]));
        assert_eq!(cert.bound_enclosure.hi(), &rat(4));
    }

    #[test]
    fn certificate_text_has_all_fields() {
        let outcome = construct(2, 2, 2).unwrap();
        let cert = certify_ramanujan(&outcome.graph, 2, 2, 2, 128).unwrap();
        let text = cert.to_text();
        for key in [
            "n ",
            "k ",
            "d ",
            "precision_bits ",
            "trivial_root ",
            "bound_sq_lo ",
            "bound_sq_hi ",
            "bound_sq_approx ",
            "gram_poly ",
            "roots_above_bound ",
            "valid ",
        ] {
            assert!(text.lines().any(|l| l.starts_with(key)), "missing {key}");
        }
        assert!(text.contains("trivial_root 8"));
        assert!(text.contains("valid true"));
    }
}

//! Finite free rectangular additive convolution.
//!
//! For rectangle dimensions `m x n` with `m >= n`, write a polynomial of
//! degree at most `n` as `p(x) = Σ_i x^(n-i) (-1)^i a_i`. The convolution of
//! `p` and `q` is the polynomial with signed coefficients
//!
//! ```text
//! c_l = Σ_{i+j=l} (n-i)!(n-j)!/(n!(n-l)!) * (m-i)!(m-j)!/(m!(m-l)!) * a_i b_j
//! ```
//!
//! for `0 <= l <= n`. The monomial `x^n` is the identity; the operation is
//! bilinear in the signed coefficient vectors, associative, and maps pairs of
//! real-rooted polynomials with nonnegative roots to the same class. These
//! invariants are exercised by the property tests below and by the
//! integration suite.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::poly::{RatPoly, RootBracket};
use crate::rat::{factorial, Rat};

/// Rectangle dimensions for the convolution; requires `m >= n >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvDims {
    pub m: usize,
    pub n: usize,
}

impl ConvDims {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if n < 1 || m < n {
            return Err(Error::OutOfDomain(format!(
                "convolution dimensions need m >= n >= 1, got m={m} n={n}"
            )));
        }
        Ok(Self { m, n })
    }
}

/// Nonnegative value `coeff * sqrt(radicand)`, kept symbolic so that squares
/// of sums of commensurable radicals stay exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrivialValue {
    pub coeff: Rat,
    pub radicand: Rat,
}

impl TrivialValue {
    pub fn new(coeff: Rat, radicand: Rat) -> Result<Self> {
        if coeff.is_negative() || radicand.is_negative() {
            return Err(Error::OutOfDomain("trivial values are nonnegative".into()));
        }
        Ok(Self { coeff, radicand })
    }

    /// `sqrt(radicand)`.
    pub fn sqrt_of(radicand: Rat) -> Result<Self> {
        Self::new(Rat::one(), radicand)
    }

    /// Exact square `coeff^2 * radicand`.
    pub fn value_sq(&self) -> Rat {
        &self.coeff * &self.coeff * &self.radicand
    }

    /// Exact sum; defined only when the radicands agree (or one side is
    /// zero), since only then is the sum again of this form.
    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.coeff.is_zero() || self.radicand.is_zero() {
            return Ok(rhs.clone());
        }
        if rhs.coeff.is_zero() || rhs.radicand.is_zero() {
            return Ok(self.clone());
        }
        if self.radicand != rhs.radicand {
            return Err(Error::OutOfDomain(
                "cannot add trivial values with different radicands exactly".into(),
            ));
        }
        Ok(Self {
            coeff: &self.coeff + &rhs.coeff,
            radicand: self.radicand.clone(),
        })
    }
}

/// Signed coefficient vector `a_i = (-1)^i [x^(n-i)] p` of length `n + 1`.
fn signed_coeffs(p: &RatPoly, n: usize) -> Result<Vec<Rat>> {
    if p.degree().is_some_and(|d| d > n) {
        return Err(Error::DimensionMismatch(format!(
            "polynomial degree {:?} exceeds rectangle columns {n}",
            p.degree()
        )));
    }
    Ok((0..=n)
        .map(|i| {
            let c = p.coeff(n - i);
            if i % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect())
}

fn from_signed_coeffs(c: &[Rat], n: usize) -> RatPoly {
    let mut coeffs = vec![Rat::zero(); n + 1];
    for (l, v) in c.iter().enumerate() {
        coeffs[n - l] = if l % 2 == 0 { v.clone() } else { -v };
    }
    RatPoly::from_coeffs(coeffs)
}

/// Rectangular additive convolution of `p` and `q` over `dims`.
///
/// Inputs of degree strictly below `n` are admitted (the map is bilinear in
/// the signed coefficient vectors); degrees above `n` are rejected.
pub fn rect_conv(p: &RatPoly, q: &RatPoly, dims: ConvDims) -> Result<RatPoly> {
    let (m, n) = (dims.m, dims.n);
    let a = signed_coeffs(p, n)?;
    let b = signed_coeffs(q, n)?;
    let fact: Vec<BigInt> = (0..=m).map(factorial).collect();
    let mut c = vec![Rat::zero(); n + 1];
    for l in 0..=n {
        let denom =
            Rat::from_integer(&fact[n] * &fact[n - l]) * Rat::from_integer(&fact[m] * &fact[m - l]);
        let mut acc = Rat::zero();
        for i in 0..=l {
            let j = l - i;
            if a[i].is_zero() || b[j].is_zero() {
                continue;
            }
            let numer = Rat::from_integer(&fact[n - i] * &fact[n - j])
                * Rat::from_integer(&fact[m - i] * &fact[m - j]);
            acc += numer * &a[i] * &b[j];
        }
        c[l] = acc / &denom;
    }
    Ok(from_signed_coeffs(&c, n))
}

/// [`rect_conv`] with the nonnegative-real-rootedness precondition verified
/// on both inputs (an exact but comparatively expensive check).
pub fn rect_conv_checked(p: &RatPoly, q: &RatPoly, dims: ConvDims) -> Result<RatPoly> {
    for f in [p, q] {
        if f.is_zero() || !f.is_real_rooted()? || !f.roots_all_nonneg()? {
            return Err(Error::OutOfDomain(
                "input is not real-rooted with nonnegative roots".into(),
            ));
        }
    }
    rect_conv(p, q, dims)
}

/// Convolution of `d` copies of `p`; requires `d >= 1`.
pub fn rect_conv_iter(p: &RatPoly, d: u32, dims: ConvDims) -> Result<RatPoly> {
    if d < 1 {
        return Err(Error::OutOfDomain(
            "iterated convolution needs d >= 1".into(),
        ));
    }
    let mut acc = p.clone();
    for _ in 1..d {
        acc = rect_conv(&acc, p, dims)?;
    }
    Ok(acc)
}

/// Folds reduced Gram polynomials of independent uniform summands into the
/// reduced Gram polynomial of their union: convolves the `p_i` over
/// `(m-1, n-1)` and adds the trivial singular values exactly.
///
/// Each `p_i` must have degree at most `n - 1`; the caller assembles the
/// bipartite expectation as `x^(m-n) * S((x - t.value_sq()) * poly)`.
pub fn expected_union_gram(
    p_list: &[RatPoly],
    a_list: &[TrivialValue],
    dims: ConvDims,
) -> Result<(RatPoly, TrivialValue)> {
    if p_list.is_empty() || p_list.len() != a_list.len() {
        return Err(Error::DimensionMismatch(format!(
            "expected_union_gram needs equally many polynomials and trivial values, got {} and {}",
            p_list.len(),
            a_list.len()
        )));
    }
    if dims.n < 1 || dims.m < dims.n {
        return Err(Error::OutOfDomain(
            "expected_union_gram needs m >= n >= 1".into(),
        ));
    }
    if p_list
        .iter()
        .any(|p| p.degree().is_some_and(|d| d > dims.n - 1))
    {
        return Err(Error::DimensionMismatch(
            "reduced polynomials must have degree at most n - 1".into(),
        ));
    }
    let inner = if dims.n >= 2 {
        Some(ConvDims::new(dims.m - 1, dims.n - 1)?)
    } else {
        None
    };
    let mut poly = p_list[0].clone();
    let mut trivial = a_list[0].clone();
    for (p, a) in p_list.iter().zip(a_list).skip(1) {
        poly = match inner {
            Some(d) => rect_conv(&poly, p, d)?,
            // n = 1 leaves degree-0 reduced polynomials; their product of
            // leading coefficients is the only datum.
            None => RatPoly::constant(poly.coeff(0) * p.coeff(0)),
        };
        trivial = trivial.add(a)?;
    }
    Ok((poly, trivial))
}

/// The polynomial whose largest root is the u-parametrized transform
/// `Q^{m,n}_p(u)`: `(Sp)(SVp) - u (Sp)'(SVp)'` with `S: p(x) -> p(x^2)` and
/// `V: p -> x^(m-n) p`. Requires `deg p = n` and `u >= 0`.
pub fn q_transform_poly(p: &RatPoly, dims: ConvDims, u: &Rat) -> Result<RatPoly> {
    if u.is_negative() {
        return Err(Error::OutOfDomain(
            "q_transform is defined for u >= 0".into(),
        ));
    }
    let sp = p.s_transform();
    let svp = p.v_transform(dims.m, dims.n)?.s_transform();
    let prod = &sp * &svp;
    let deriv = &sp.derivative() * &svp.derivative();
    Ok(&prod - &deriv.scale(u))
}

/// Largest root of [`q_transform_poly`], bracketed to within `tol`.
pub fn q_transform(p: &RatPoly, dims: ConvDims, u: &Rat, tol: &Rat) -> Result<RootBracket> {
    q_transform_poly(p, dims, u)?.max_root(tol)
}

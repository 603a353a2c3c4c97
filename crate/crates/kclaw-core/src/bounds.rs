//! Root bounds for iterated convolutions and spectral certificates.
//!
//! All irrational bound values are produced as rational interval enclosures
//! at a configurable bit precision, so comparisons against exact root
//! brackets are decidable. Comparisons between two sums of square roots are
//! decided exactly by repeated squaring with case analysis, with no
//! precision parameter at all.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};

use crate::conv::ConvDims;
use crate::error::{Error, Result};
use crate::interval::{sqrt_rat, RatInterval};
use crate::rat::{rat, ratio, Rat};

/// Parameters of the closed-form root bound: `θ` is the common squared
/// nontrivial singular value of the summands, `d` how many are convolved,
/// `dims` the rectangle, and `u` the free parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundParams {
    pub theta: Rat,
    pub d: usize,
    pub dims: ConvDims,
    pub u: Rat,
}

impl BoundParams {
    pub fn new(theta: Rat, d: usize, dims: ConvDims, u: Rat) -> Result<Self> {
        if theta.is_negative() {
            return Err(Error::OutOfDomain("theta must be nonnegative".into()));
        }
        if u.is_negative() {
            return Err(Error::OutOfDomain("u must be nonnegative".into()));
        }
        if d < 1 {
            return Err(Error::OutOfDomain("d must be at least 1".into()));
        }
        Ok(Self { theta, d, dims, u })
    }
}

/// Closed-form bound
/// `R(u) = (d sqrt(θ + m²u²) - dmu + (m+n)u)² - (m-n)²u²`,
/// enclosed to `bits`. Expanding the square keeps the rational part exact,
/// so the result is a point interval whenever `θ + m²u²` is a perfect
/// square (in particular at `u = 0`, where `R = d²θ`).
pub fn r_bound(bp: &BoundParams, bits: u32) -> Result<RatInterval> {
    let m = rat(bp.dims.m as i64);
    let n = rat(bp.dims.n as i64);
    let d = rat(bp.d as i64);
    let u = &bp.u;
    let radicand = &bp.theta + &m * &m * u * u;
    let w = sqrt_rat(&radicand, bits)?;
    // R = d²(θ + m²u²) + 2dc·w + c² - (m-n)²u² with c = (m + n - dm)u.
    let c = (&m + &n - &d * &m) * u;
    let diff = &m - &n;
    let rational_part = &d * &d * &radicand + &c * &c - &diff * &diff * u * u;
    Ok(w.scale(&(rat(2) * &d * &c)).shift(&rational_part))
}

/// The minimizing parameter
/// `u₀ = sqrt(θ)(v - 1)/(2m sqrt(v))` with `v = sqrt((d-1)(dm/n - 1))`,
/// enclosed to `bits`. Defined for `θ >= 2` and `d >= 2`.
pub fn u_star(theta: &Rat, m: usize, n: usize, d: usize, bits: u32) -> Result<RatInterval> {
    if theta < &rat(2) {
        return Err(Error::OutOfDomain(
            "u_star is stated only for theta >= 2".into(),
        ));
    }
    if d < 2 {
        return Err(Error::OutOfDomain("u_star needs d >= 2".into()));
    }
    if n < 1 || m < n {
        return Err(Error::OutOfDomain("u_star needs m >= n >= 1".into()));
    }
    let v_rad = rat(d as i64 - 1) * (ratio((d * m) as i64, n as i64) - rat(1));
    debug_assert!(v_rad >= rat(1));
    let v = sqrt_rat(&v_rad, bits)?;
    let sqrt_theta = sqrt_rat(theta, bits)?;
    let sqrt_v = v.sqrt(bits)?;
    let numer = sqrt_theta.mul(&v.shift(&rat(-1)));
    let denom = sqrt_v.scale(&rat(2 * m as i64));
    numer.div(&denom)
}

/// `sqrt(θ n / m) (sqrt(d-1) + sqrt(dm/n - 1))`, enclosed to `bits`.
pub fn cor_ok_bound(theta: &Rat, m: usize, n: usize, d: usize, bits: u32) -> Result<RatInterval> {
    if theta.is_negative() {
        return Err(Error::OutOfDomain("theta must be nonnegative".into()));
    }
    if n < 1 || m < n || d < 1 {
        return Err(Error::OutOfDomain(
            "cor_ok_bound needs m >= n >= 1 and d >= 1".into(),
        ));
    }
    let prefactor = sqrt_rat(&(theta * ratio(n as i64, m as i64)), bits)?;
    let s1 = sqrt_rat(&rat(d as i64 - 1), bits)?;
    let s2 = sqrt_rat(&(ratio((d * m) as i64, n as i64) - rat(1)), bits)?;
    Ok(prefactor.mul(&s1.add(&s2)))
}

/// `sqrt(d-1) + sqrt(kd-1)`, enclosed to `bits`.
pub fn ramanujan_bound(k: usize, d: usize, bits: u32) -> Result<RatInterval> {
    if k < 1 || d < 1 {
        return Err(Error::OutOfDomain("ramanujan_bound needs k, d >= 1".into()));
    }
    let s1 = sqrt_rat(&rat(d as i64 - 1), bits)?;
    let s2 = sqrt_rat(&rat((k * d) as i64 - 1), bits)?;
    Ok(s1.add(&s2))
}

/// Square of [`ramanujan_bound`]: `(d-1) + (kd-1) + 2 sqrt((d-1)(kd-1))`,
/// enclosed to `bits`; exact whenever `(d-1)(kd-1)` is a perfect square.
pub fn ramanujan_bound_sq(k: usize, d: usize, bits: u32) -> Result<RatInterval> {
    if k < 1 || d < 1 {
        return Err(Error::OutOfDomain(
            "ramanujan_bound_sq needs k, d >= 1".into(),
        ));
    }
    let a = rat(d as i64 - 1);
    let b = rat((k * d) as i64 - 1);
    let cross = sqrt_rat(&(&a * &b), bits)?;
    Ok(cross.scale(&rat(2)).shift(&(a + b)))
}

/// Exact comparison of `sqrt(a) + sqrt(b)` against `sqrt(c) + sqrt(e)` for
/// nonnegative rationals, by repeated squaring with case analysis.
pub fn cmp_sqrt_sums(a: &Rat, b: &Rat, c: &Rat, e: &Rat) -> Result<Ordering> {
    for v in [a, b, c, e] {
        if v.is_negative() {
            return Err(Error::OutOfDomain(
                "cmp_sqrt_sums needs nonnegative inputs".into(),
            ));
        }
    }
    // s² - t² = (a+b) - (c+e) + 2(sqrt(ab) - sqrt(ce)); both sides of the
    // original comparison are nonnegative, so compare the squares.
    let bb = a * b;
    let dd = c * e;
    let delta = c + e - a - b;
    if bb == dd {
        return Ok(Rat::zero().cmp(&delta));
    }
    let l_positive = bb > dd;
    if l_positive && !delta.is_positive() {
        return Ok(Ordering::Greater);
    }
    if !l_positive && !delta.is_negative() {
        return Ok(Ordering::Less);
    }
    // L = 2 sqrt(ab) - 2 sqrt(ce) and delta now share a strict sign.
    // Compare L² = 4ab + 4ce - 8 sqrt(ab·ce) against delta², then undo the
    // orientation when both are negative.
    let g = rat(4) * (&bb + &dd) - &delta * &delta;
    let lsq_cmp = if g.is_negative() {
        Ordering::Less
    } else {
        (&g * &g).cmp(&(rat(64) * &bb * &dd))
    };
    Ok(if l_positive {
        lsq_cmp
    } else {
        lsq_cmp.reverse()
    })
}

/// Compares the claw-expansion bound against the Ramanujan bound for a
/// biregular family with `m = kn`:
/// `sqrt(k(n-1)(d-1)/(m-1)) + sqrt(k((m-1)d - (n-1))/(m-1))`
/// versus `sqrt(d-1) + sqrt(kd-1)`, decided exactly.
pub fn better_than_ramanujan_cmp(k: usize, d: usize, n: usize) -> Result<Ordering> {
    if k < 1 || d < 2 || n < 1 {
        return Err(Error::OutOfDomain(
            "comparison needs k >= 1, d >= 2, n >= 1".into(),
        ));
    }
    let m = k * n;
    if m == 1 {
        // The 1x1 rectangle has no nontrivial directions; both sides agree.
        return Ok(Ordering::Equal);
    }
    let m1 = rat(m as i64 - 1);
    let a = rat((k * (n - 1) * (d - 1)) as i64) / &m1;
    let b = rat(k as i64) * (rat((m - 1) as i64) * rat(d as i64) - rat((n - 1) as i64)) / &m1;
    let c = rat(d as i64 - 1);
    let e = rat((k * d) as i64 - 1);
    cmp_sqrt_sums(&a, &b, &c, &e)
}

/// `true` iff the claw-expansion bound is at most the Ramanujan bound.
pub fn better_than_ramanujan_check(k: usize, d: usize, n: usize) -> Result<bool> {
    Ok(better_than_ramanujan_cmp(k, d, n)? != Ordering::Greater)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{decimal_string, pow2, to_f64};

    fn params(theta: i64, d: usize, m: usize, n: usize, u: Rat) -> BoundParams {
        BoundParams::new(rat(theta), d, ConvDims::new(m, n).unwrap(), u).unwrap()
    }

    #[test]
    fn r_bound_at_zero_is_exact() {
        let bp = params(2, 2, 4, 2, rat(0));
        let r = r_bound(&bp, 64).unwrap();
        assert!(r.is_point());
        assert_eq!(r.lo(), &rat(8)); // d²θ
    }

    #[test]
    fn r_bound_exact_when_radicand_square() {
        // θ + m²u² = 9 + 16 = 25 collapses the enclosure to a point.
        let bp = params(9, 2, 4, 2, rat(1));
        let r = r_bound(&bp, 64).unwrap();
        assert!(r.is_point());
        // (2*5 - 2*4 + 6)² - 4 = 60.
        assert_eq!(r.lo(), &rat(60));
    }

    #[test]
    fn r_bound_matches_float_evaluation() {
        let bp = params(2, 2, 4, 2, ratio(1, 4));
        let r = r_bound(&bp, 128).unwrap();
        let w = (2.0f64 + 16.0 * 0.0625).sqrt();
        let expected = (2.0 * w - 2.0 + 1.5) * (2.0 * w - 2.0 + 1.5) - 4.0 * 0.0625;
        assert!((to_f64(&r.midpoint()) - expected).abs() < 1e-12);
        assert!(r.width() < pow2(-100));
    }

    #[test]
    fn u_star_degenerate_and_generic() {
        // d = 2, m = n makes v = 1, so u₀ = 0 exactly.
        let u0 = u_star(&rat(3), 2, 2, 2, 64).unwrap();
        assert!(u0.is_point());
        assert_eq!(u0.lo(), &rat(0));

        let u0 = u_star(&rat(2), 4, 2, 2, 128).unwrap();
        assert!((to_f64(&u0.midpoint()) - 0.0983291).abs() < 1e-6);
        assert!(u_star(&rat(1), 4, 2, 2, 64).is_err());
        assert!(u_star(&rat(2), 4, 2, 1, 64).is_err());
    }

    #[test]
    fn u_star_minimizes_r_bound_on_grid() {
        // θ=2, k=2, d=3, n=3, m=6: R at the enclosed u₀ is below R on a
        // 100-point grid over [0, 1].
        let theta = rat(2);
        let (m, n, d) = (6usize, 3usize, 3usize);
        let u0 = u_star(&theta, m, n, d, 192).unwrap().midpoint();
        let dims = ConvDims::new(m, n).unwrap();
        let r0 = r_bound(&BoundParams::new(theta.clone(), d, dims, u0).unwrap(), 192).unwrap();
        for i in 0..=100 {
            let u = ratio(i, 100);
            let r = r_bound(&BoundParams::new(theta.clone(), d, dims, u).unwrap(), 192).unwrap();
            assert!(r0.hi() <= r.hi());
        }
    }

    #[test]
    fn u_star_value_matches_cor_ok_square() {
        let theta = rat(2);
        let (m, n, d) = (4usize, 2usize, 2usize);
        let u0 = u_star(&theta, m, n, d, 192).unwrap().midpoint();
        let dims = ConvDims::new(m, n).unwrap();
        let r0 = r_bound(&BoundParams::new(theta.clone(), d, dims, u0).unwrap(), 192).unwrap();
        let ok_sq = cor_ok_bound(&theta, m, n, d, 192).unwrap().square();
        // R(u₀) = cor_ok² up to the tiny error from using the midpoint of u₀.
        let gap = &r0.midpoint() - &ok_sq.midpoint();
        assert!(gap.abs() < ratio(1, 1 << 30), "gap {}", to_f64(&gap));
    }

    #[test]
    fn ramanujan_bound_values() {
        let b = ramanujan_bound(2, 3, 128).unwrap();
        assert!(decimal_string(&b.midpoint(), 5).starts_with("3.65028"));
        // k = 1 reduces to 2 sqrt(d-1).
        let b = ramanujan_bound(1, 2, 64).unwrap();
        assert!(b.is_point());
        assert_eq!(b.lo(), &rat(2));
        let sq = ramanujan_bound_sq(1, 2, 64).unwrap();
        assert!(sq.is_point());
        assert_eq!(sq.lo(), &rat(4));
        // d = 1: only the second radical survives.
        let sq = ramanujan_bound_sq(3, 1, 64).unwrap();
        assert_eq!(sq.lo(), &rat(2));
    }

    #[test]
    fn cor_ok_reduces_to_ramanujan() {
        // θ = k, m = kn: the prefactor is exactly 1.
        let (k, n, d) = (2usize, 3usize, 3usize);
        let ok = cor_ok_bound(&rat(k as i64), k * n, n, d, 128).unwrap();
        let ram = ramanujan_bound(k, d, 128).unwrap();
        assert!(ok.lo() <= ram.hi() && ram.lo() <= ok.hi());
        assert!(ok.width() < pow2(-100));
    }

    #[test]
    fn sqrt_sum_comparisons_exact() {
        // sqrt(2) + sqrt(8) = sqrt(18).
        let cmp = cmp_sqrt_sums(&rat(2), &rat(8), &rat(18), &rat(0)).unwrap();
        assert_eq!(cmp, Ordering::Equal);
        let cmp = cmp_sqrt_sums(&rat(3), &rat(5), &rat(2), &rat(6)).unwrap();
        assert_eq!(cmp, Ordering::Greater);
        let cmp = cmp_sqrt_sums(&rat(1), &rat(2), &rat(0), &rat(9)).unwrap();
        assert_eq!(cmp, Ordering::Less);
        let cmp = cmp_sqrt_sums(&rat(4), &rat(0), &ratio(9, 10), &ratio(9, 10)).unwrap();
        assert_eq!(cmp, Ordering::Greater);
        assert!(cmp_sqrt_sums(&rat(-1), &rat(0), &rat(0), &rat(0)).is_err());
    }

    #[test]
    fn iterated_convolution_stays_below_cor_ok() {
        // max-root of the d-fold self-convolution of (x-θ)ⁿ is at most
        // cor_ok(θ, m, n, d)² when θ >= 2 and d >= 2, checked through
        // disjoint enclosures.
        use crate::conv::rect_conv_iter;
        use crate::poly::RatPoly;
        let tol = pow2(-24);
        for theta in 2i64..=4 {
            for (m, n) in [(2usize, 1usize), (4, 2), (3, 2), (6, 3)] {
                for d in 2usize..=3 {
                    let dims = ConvDims::new(m, n).unwrap();
                    let p = RatPoly::from_roots(&vec![rat(theta); n]);
                    let conv = rect_conv_iter(&p, d as u32, dims).unwrap();
                    let bracket = conv.max_root(&tol).unwrap();
                    let ok_sq = cor_ok_bound(&rat(theta), m, n, d, 128).unwrap().square();
                    assert!(
                        bracket.hi <= *ok_sq.lo(),
                        "θ={theta} m={m} n={n} d={d}: {} vs {}",
                        to_f64(&bracket.hi),
                        to_f64(&ok_sq.midpoint())
                    );
                }
            }
        }
    }

    #[test]
    fn better_than_ramanujan_cases() {
        assert!(better_than_ramanujan_check(2, 2, 2).unwrap());
        // k = 1 gives equality.
        assert_eq!(better_than_ramanujan_cmp(1, 3, 4).unwrap(), Ordering::Equal);
        assert_eq!(better_than_ramanujan_cmp(1, 2, 1).unwrap(), Ordering::Equal);
        // k >= 2 is strictly better.
        assert_eq!(better_than_ramanujan_cmp(2, 2, 2).unwrap(), Ordering::Less);
        for k in 1..=4 {
            for d in 2..=5 {
                for n in 2..=6 {
                    assert!(
                        better_than_ramanujan_check(k, d, n).unwrap(),
                        "k={k} d={d} n={n}"
                    );
                }
            }
        }
        assert!(better_than_ramanujan_cmp(2, 1, 2).is_err());
    }
}

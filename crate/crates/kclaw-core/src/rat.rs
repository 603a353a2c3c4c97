//! Exact rational scalars.
//!
//! All spectral quantities in this crate are computed over `Q` with
//! arbitrary-precision integers; floating point appears only in Monte Carlo
//! sampling and in advisory numeric cross-checks. `Rat` is kept reduced with
//! a positive denominator by `num-rational`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number.
pub type Rat = BigRational;

/// Integer as a rational.
pub fn rat<T: Into<BigInt>>(n: T) -> Rat {
    Rat::from_integer(n.into())
}

/// Ratio of two integers. Panics if `den == 0`.
pub fn ratio<T: Into<BigInt>, U: Into<BigInt>>(num: T, den: U) -> Rat {
    Rat::new(num.into(), den.into())
}

/// `2^bits` as a rational; negative exponents give `1/2^|bits|`.
pub fn pow2(bits: i64) -> Rat {
    let two = BigInt::from(2);
    if bits >= 0 {
        Rat::from_integer(two.pow(bits as u32))
    } else {
        Rat::new(BigInt::one(), two.pow((-bits) as u32))
    }
}

/// Parses `num/den` or a bare integer, with an optional leading sign.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let (num_s, den_s) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: BigInt = num_s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad numerator in rational `{s}`")))?;
    let den: BigInt = den_s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad denominator in rational `{s}`")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in rational `{s}`")));
    }
    Ok(Rat::new(num, den))
}

/// Formats as `num/den`, always including the denominator.
pub fn format_rat(x: &Rat) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Decimal rendering with `digits` digits after the point, truncated toward
/// zero. Exact values shorter than `digits` are not padded further than the
/// last nonzero digit unless they are integers.
pub fn decimal_string(x: &Rat, digits: usize) -> String {
    let neg = x.is_negative();
    let a = x.abs();
    let int_part = a.trunc().to_integer();
    let mut frac = &a - Rat::from_integer(int_part.clone());
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(&int_part.to_string());
    if digits > 0 && !frac.is_zero() {
        out.push('.');
        let ten = rat(10);
        for _ in 0..digits {
            frac *= &ten;
            let d = frac.trunc().to_integer();
            out.push_str(&d.to_string());
            frac -= Rat::from_integer(d);
            if frac.is_zero() {
                break;
            }
        }
    }
    out
}

/// Nearest `f64`, for advisory output only.
pub fn to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `n!` as a big integer.
pub fn factorial(n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    acc
}

/// Binomial coefficient; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

//! Rational interval arithmetic.
//!
//! Intervals carry exact rational endpoints; every operation rounds outward,
//! so a computed interval always encloses the true real value. Square roots
//! are enclosed to a requested number of fractional bits via integer square
//! roots, with exact collapse to a point when the radicand is a perfect
//! square of a rational.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::rat::{decimal_string, rat, to_f64, Rat};

/// Closed interval `[lo, hi]` with rational endpoints, `lo <= hi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatInterval {
    lo: Rat,
    hi: Rat,
}

impl RatInterval {
    /// Interval from endpoints. Panics if `lo > hi`.
    pub fn new(lo: Rat, hi: Rat) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Self { lo, hi }
    }

    /// Degenerate interval `[x, x]`.
    pub fn point(x: Rat) -> Self {
        Self {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn lo(&self) -> &Rat {
        &self.lo
    }

    pub fn hi(&self) -> &Rat {
        &self.hi
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rat {
        (&self.lo + &self.hi) / rat(2)
    }

    pub fn contains(&self, x: &Rat) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn neg(&self) -> Self {
        Self {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            lo: &self.lo + &rhs.lo,
            hi: &self.hi + &rhs.hi,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let cands = [
            &self.lo * &rhs.lo,
            &self.lo * &rhs.hi,
            &self.hi * &rhs.lo,
            &self.hi * &rhs.hi,
        ];
        let lo = cands.iter().min().unwrap().clone();
        let hi = cands.iter().max().unwrap().clone();
        Self { lo, hi }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_negative() {
            Self {
                lo: &self.hi * c,
                hi: &self.lo * c,
            }
        } else {
            Self {
                lo: &self.lo * c,
                hi: &self.hi * c,
            }
        }
    }

    pub fn shift(&self, c: &Rat) -> Self {
        Self {
            lo: &self.lo + c,
            hi: &self.hi + c,
        }
    }

    /// `self^2`, tight even when the interval straddles zero.
    pub fn square(&self) -> Self {
        let a = &self.lo * &self.lo;
        let b = &self.hi * &self.hi;
        if !self.lo.is_negative() {
            Self { lo: a, hi: b }
        } else if !self.hi.is_positive() {
            Self { lo: b, hi: a }
        } else {
            Self {
                lo: Rat::zero(),
                hi: a.max(b),
            }
        }
    }

    /// Division by an interval that excludes zero.
    pub fn div(&self, rhs: &Self) -> Result<Self> {
        if rhs.contains(&Rat::zero()) {
            return Err(Error::OutOfDomain(
                "interval division by an interval containing zero".into(),
            ));
        }
        let cands = [
            &self.lo / &rhs.lo,
            &self.lo / &rhs.hi,
            &self.hi / &rhs.lo,
            &self.hi / &rhs.hi,
        ];
        let lo = cands.iter().min().unwrap().clone();
        let hi = cands.iter().max().unwrap().clone();
        Ok(Self { lo, hi })
    }

    /// Square root enclosure to `bits` fractional bits.
    ///
    /// Requires `lo >= 0`. Endpoints that are perfect rational squares map to
    /// exact endpoints.
    pub fn sqrt(&self, bits: u32) -> Result<Self> {
        if self.lo.is_negative() {
            return Err(Error::OutOfDomain(
                "sqrt of an interval with negative lower endpoint".into(),
            ));
        }
        let lo = sqrt_rat(&self.lo, bits)?;
        let hi = sqrt_rat(&self.hi, bits)?;
        Ok(Self {
            lo: lo.lo,
            hi: hi.hi,
        })
    }

    /// `true` when every point of `self` is strictly below every point of `other`.
    pub fn strictly_below(&self, other: &Self) -> bool {
        self.hi < other.lo
    }

    /// Total order on disjoint intervals; `None` when the intervals overlap.
    pub fn disjoint_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if other.hi < self.lo {
            Some(Ordering::Greater)
        } else if self.is_point() && other.is_point() && self.lo == other.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }
}

/// Enclosure of `sqrt(x)` for a single rational `x >= 0`, to `bits`
/// fractional bits. Exact (a point interval) when `x` is a perfect square.
pub fn sqrt_rat(x: &Rat, bits: u32) -> Result<RatInterval> {
    if x.is_negative() {
        return Err(Error::OutOfDomain("sqrt of a negative rational".into()));
    }
    if x.is_zero() {
        return Ok(RatInterval::point(Rat::zero()));
    }
    // sqrt(a/b) = sqrt(a*b)/b; scale the radicand by 4^bits so the integer
    // square root carries `bits` fractional bits.
    let a = x.numer();
    let b = x.denom();
    let scale = BigInt::from(1) << (2 * bits);
    let radicand = a * b * &scale;
    let s = radicand.sqrt();
    let den = b * (BigInt::from(1) << bits);
    if &s * &s == radicand {
        return Ok(RatInterval::point(Rat::new(s, den)));
    }
    let lo = Rat::new(s.clone(), den.clone());
    let hi = Rat::new(s + BigInt::from(1), den);
    Ok(RatInterval::new(lo, hi))
}

impl fmt::Display for RatInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "{}", decimal_string(&self.lo, 12))
        } else {
            let mid = self.midpoint();
            let half = self.width() / rat(2);
            write!(f, "{} ± {:.2e}", decimal_string(&mid, 12), to_f64(&half))
        }
    }
}

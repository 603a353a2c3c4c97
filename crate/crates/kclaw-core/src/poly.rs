//! Univariate polynomials over the rationals.
//!
//! Coefficients are stored low-to-high with trailing zeros trimmed, so the
//! zero polynomial has an empty coefficient vector and `degree() == None`.
//! Root counting is exact: Sturm chains are built from the square-free part
//! and evaluated with zero entries skipped, which makes
//! `sturm_count(p, lo, hi)` count distinct real roots in the half-open
//! interval `(lo, hi]` even when an endpoint is itself a root.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::interval::RatInterval;
use crate::rat::{format_rat, parse_rat, rat, ratio, Rat};

/// Dense univariate polynomial with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatPoly {
    coeffs: Vec<Rat>,
}

/// Isolating bracket for the largest real root of a polynomial.
///
/// Invariants on return from [`RatPoly::max_root`]: the largest real root
/// lies in `(lo, hi]`, and `count == 1` distinct root lies in that interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootBracket {
    pub lo: Rat,
    pub hi: Rat,
    pub count: usize,
}

impl RootBracket {
    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rat {
        (&self.lo + &self.hi) / rat(2)
    }

    /// Closed enclosure `[lo, hi]` of the root.
    pub fn to_interval(&self) -> RatInterval {
        RatInterval::new(self.lo.clone(), self.hi.clone())
    }
}

impl RatPoly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::from_coeffs(vec![Rat::zero(), Rat::one()])
    }

    pub fn constant(c: Rat) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// `c * x^deg`.
    pub fn monomial(deg: usize, c: Rat) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Rat::zero(); deg + 1];
        coeffs[deg] = c;
        Self { coeffs }
    }

    /// From coefficients low-to-high; trailing zeros are trimmed.
    pub fn from_coeffs(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// Convenience constructor from small integers, low-to-high.
    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| rat(c)).collect())
    }

    /// Monic product of linear factors `(x - r)` over the given roots.
    pub fn from_roots(roots: &[Rat]) -> Self {
        let mut p = Self::one();
        for r in roots {
            p = &p * &Self::from_coeffs(vec![-r.clone(), Rat::one()]);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    /// Coefficient of `x^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&Rat> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(|c| c.is_one())
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Divides by the leading coefficient. Panics on the zero polynomial.
    pub fn monic(&self) -> Self {
        let lead = self.leading().expect("monic of zero polynomial");
        self.scale(&(Rat::one() / lead))
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * rat(i as i64))
            .collect();
        Self::from_coeffs(coeffs)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Euclidean division: returns `(q, r)` with `self = q*d + r` and
    /// `deg r < deg d`. Panics if `d` is zero.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.degree().unwrap();
        let lead = d.leading().unwrap();
        let mut rem = self.coeffs.clone();
        if rem.len() < dd + 1 {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![Rat::zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            if rem[i].is_zero() {
                continue;
            }
            let q = &rem[i] / lead;
            for j in 0..dd {
                let delta = &q * &d.coeffs[j];
                rem[i - dd + j] -= delta;
            }
            rem[i] = Rat::zero();
            quot[i - dd] = q;
        }
        (Self::from_coeffs(quot), Self::from_coeffs(rem))
    }

    /// Exact division by `(x - r)`; errors if `r` is not a root.
    pub fn divide_out_root(&self, r: &Rat) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let divisor = Self::from_coeffs(vec![-r.clone(), Rat::one()]);
        let (q, rem) = self.div_rem(&divisor);
        if !rem.is_zero() {
            return Err(Error::InexactRoot(format_rat(r)));
        }
        Ok(q)
    }

    /// Monic greatest common divisor; `gcd(p, 0) = monic(p)`.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = normalize_primitive(self);
        let mut b = normalize_primitive(other);
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = normalize_primitive(&r);
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    /// Square-free part `p / gcd(p, p')`, sharing exactly the distinct
    /// complex roots of `p`.
    pub fn squarefree_part(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        if self.degree() == Some(0) {
            return Self::one();
        }
        let g = self.gcd(&self.derivative());
        let (q, r) = self.div_rem(&g);
        debug_assert!(r.is_zero());
        q
    }

    /// Substitutes `x -> x^2`: degree doubles, coefficients interleave with
    /// zeros.
    pub fn s_transform(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() * 2);
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                coeffs.push(Rat::zero());
            }
            coeffs.push(c.clone());
        }
        Self::from_coeffs(coeffs)
    }

    /// Multiplies by `x^(m-n)`. Requires `m >= n` and `n == deg self`.
    pub fn v_transform(&self, m: usize, n: usize) -> Result<Self> {
        if m < n {
            return Err(Error::OutOfDomain(format!(
                "v_transform needs m >= n, got m={m} n={n}"
            )));
        }
        if self.degree() != Some(n) {
            return Err(Error::DimensionMismatch(format!(
                "v_transform expects degree n={n}, got {:?}",
                self.degree()
            )));
        }
        let mut coeffs = vec![Rat::zero(); m - n];
        coeffs.extend(self.coeffs.iter().cloned());
        Ok(Self::from_coeffs(coeffs))
    }

    /// Cauchy root bound: all complex roots have absolute value below
    /// `1 + max_i |a_i / a_deg|`.
    pub fn cauchy_root_bound(&self) -> Result<Rat> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let lead = self.leading().unwrap();
        let mut m = Rat::zero();
        for c in &self.coeffs[..self.coeffs.len() - 1] {
            let q = (c / lead).abs();
            if q > m {
                m = q;
            }
        }
        Ok(m + Rat::one())
    }

    /// Number of distinct real roots in the half-open interval `(lo, hi]`.
    pub fn sturm_count(&self, lo: &Rat, hi: &Rat) -> Result<usize> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        assert!(lo <= hi, "sturm_count endpoints out of order");
        let chain = SturmChain::new(&self.squarefree_part());
        Ok(chain.count(lo, hi))
    }

    /// Number of distinct real roots strictly greater than `x`.
    pub fn count_roots_above(&self, x: &Rat) -> Result<usize> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let sf = self.squarefree_part();
        let chain = SturmChain::new(&sf);
        let bound = sf.cauchy_root_bound()?;
        if x >= &bound {
            return Ok(0);
        }
        Ok(chain.count(x, &bound))
    }

    /// `true` iff every complex root of `self` is real.
    pub fn is_real_rooted(&self) -> Result<bool> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let sf = self.squarefree_part();
        let d = sf.degree().unwrap();
        if d == 0 {
            return Ok(true);
        }
        let bound = sf.cauchy_root_bound()?;
        let chain = SturmChain::new(&sf);
        Ok(chain.count(&-&bound, &bound) == d)
    }

    /// `true` iff `self` has no real root strictly below zero.
    pub fn roots_all_nonneg(&self) -> Result<bool> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let sf = self.squarefree_part();
        if sf.degree() == Some(0) {
            return Ok(true);
        }
        let bound = sf.cauchy_root_bound()?;
        let chain = SturmChain::new(&sf);
        let upto_zero = chain.count(&-&bound, &Rat::zero());
        let at_zero = usize::from(sf.eval(&Rat::zero()).is_zero());
        Ok(upto_zero == at_zero)
    }

    /// Isolates the largest real root to within `tol`.
    ///
    /// Bisection keeps the invariant that the largest root lies in
    /// `(lo, hi]`; it stops once the bracket has width at most `tol` and
    /// contains exactly one distinct root.
    pub fn max_root(&self, tol: &Rat) -> Result<RootBracket> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        assert!(tol.is_positive(), "max_root tolerance must be positive");
        let sf = self.squarefree_part();
        if sf.degree() == Some(0) {
            return Err(Error::NoRealRoots);
        }
        let bound = sf.cauchy_root_bound()?;
        let chain = SturmChain::new(&sf);
        let mut lo = -&bound;
        let mut hi = bound;
        if chain.count(&lo, &hi) == 0 {
            return Err(Error::NoRealRoots);
        }
        loop {
            let c = chain.count(&lo, &hi);
            debug_assert!(c >= 1);
            if c == 1 && &(&hi - &lo) <= tol {
                return Ok(RootBracket { lo, hi, count: 1 });
            }
            let mid = (&lo + &hi) / rat(2);
            if chain.count(&mid, &hi) >= 1 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }

    /// Parses the record format produced by [`RatPoly::to_text`].
    pub fn from_text(s: &str) -> Result<Self> {
        let mut lines = s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty polynomial record".into()))?;
        let deg: i64 = header
            .parse()
            .map_err(|_| Error::Parse(format!("bad degree line `{header}`")))?;
        if deg < -1 {
            return Err(Error::Parse(format!("bad degree {deg}")));
        }
        if deg == -1 {
            return Ok(Self::zero());
        }
        let mut coeffs = Vec::with_capacity(deg as usize + 1);
        for _ in 0..=deg {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse("polynomial record ended early".into()))?;
            coeffs.push(parse_rat(line)?);
        }
        if lines.next().is_some() {
            return Err(Error::Parse("trailing data after polynomial record".into()));
        }
        let p = Self::from_coeffs(coeffs);
        if p.degree() != Some(deg as usize) && !(deg == 0 && p.is_zero()) {
            return Err(Error::Parse("leading coefficient is zero".into()));
        }
        Ok(p)
    }

    /// Record format: first line is the degree (`-1` for the zero
    /// polynomial), followed by one `num/den` coefficient per line,
    /// low-to-high.
    pub fn to_text(&self) -> String {
        match self.degree() {
            None => "-1\n".into(),
            Some(d) => {
                let mut out = format!("{d}\n");
                for c in &self.coeffs {
                    out.push_str(&format_rat(c));
                    out.push('\n');
                }
                out
            }
        }
    }
}

/// Exact comparison of the largest real roots of two nonzero polynomials.
///
/// Splits off the common factor `h = gcd(sf(p), sf(q))`; the remaining parts
/// are coprime and square-free, so distinct roots stay at positive distance
/// and bracket refinement terminates with pairwise-disjoint enclosures.
pub fn cmp_max_roots(p: &RatPoly, q: &RatPoly) -> Result<Ordering> {
    if p.is_zero() || q.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let sp = p.squarefree_part();
    let sq = q.squarefree_part();
    let h = sp.gcd(&sq);
    let (pa, ra) = sp.div_rem(&h);
    let (pb, rb) = sq.div_rem(&h);
    debug_assert!(ra.is_zero() && rb.is_zero());

    let has_roots = |f: &RatPoly| -> Result<bool> {
        match f.degree() {
            Some(d) if d >= 1 => {
                let b = f.cauchy_root_bound()?;
                Ok(SturmChain::new(f).count(&-&b, &b) > 0)
            }
            _ => Ok(false),
        }
    };
    let hh = has_roots(&h)?;
    let ha = has_roots(&pa)?;
    let hb = has_roots(&pb)?;
    if !(hh || ha) || !(hh || hb) {
        return Err(Error::NoRealRoots);
    }

    let mut tol = ratio(1, 1 << 16);
    loop {
        let bracket = |f: &RatPoly, present: bool| -> Result<Option<RootBracket>> {
            if present {
                Ok(Some(f.max_root(&tol)?))
            } else {
                Ok(None)
            }
        };
        let rh = bracket(&h, hh)?;
        let ra = bracket(&pa, ha)?;
        let rb = bracket(&pb, hb)?;
        let disjoint = |x: &Option<RootBracket>, y: &Option<RootBracket>| match (x, y) {
            (Some(a), Some(b)) => a.hi < b.lo || b.hi < a.lo,
            _ => true,
        };
        if disjoint(&rh, &ra) && disjoint(&rh, &rb) && disjoint(&ra, &rb) {
            // With disjoint brackets, `max` by lower endpoint is exact.
            let pick = |x: Option<RootBracket>, y: Option<RootBracket>| -> (RootBracket, bool) {
                // Second component: `true` when the maximum comes from `h`.
                match (x, y) {
                    (Some(a), Some(b)) => {
                        if a.lo > b.lo {
                            (a, true)
                        } else {
                            (b, false)
                        }
                    }
                    (Some(a), None) => (a, true),
                    (None, Some(b)) => (b, false),
                    (None, None) => unreachable!("existence checked above"),
                }
            };
            let (bp, p_from_h) = pick(rh.clone(), ra);
            let (bq, q_from_h) = pick(rh, rb);
            if p_from_h && q_from_h {
                return Ok(Ordering::Equal);
            }
            if bp.hi < bq.lo {
                return Ok(Ordering::Less);
            }
            if bq.hi < bp.lo {
                return Ok(Ordering::Greater);
            }
            // Overlap can only pair a bracket with itself via `h`; both
            // from-h cases were handled, so refine further.
        }
        tol /= rat(2);
    }
}

/// Sturm chain of a square-free polynomial, content-normalized to primitive
/// integer coefficients for speed (positive rescaling preserves signs).
struct SturmChain {
    elems: Vec<RatPoly>,
}

impl SturmChain {
    fn new(squarefree: &RatPoly) -> Self {
        assert!(!squarefree.is_zero());
        let mut elems = vec![normalize_primitive(squarefree)];
        let d = squarefree.derivative();
        if !d.is_zero() {
            elems.push(normalize_primitive(&d));
        }
        while elems.len() >= 2 {
            let r = elems[elems.len() - 2].div_rem(&elems[elems.len() - 1]).1;
            if r.is_zero() {
                break;
            }
            let neg = RatPoly::from_coeffs(r.coeffs().iter().map(|c| -c).collect());
            elems.push(normalize_primitive(&neg));
        }
        Self { elems }
    }

    /// Sign variations at `x`, skipping zero values; equals the variation
    /// count at `x + epsilon`.
    fn variations_at(&self, x: &Rat) -> usize {
        let mut count = 0;
        let mut last: Option<bool> = None;
        for p in &self.elems {
            let v = p.eval(x);
            if v.is_zero() {
                continue;
            }
            let sign = v.is_positive();
            if let Some(prev) = last {
                if prev != sign {
                    count += 1;
                }
            }
            last = Some(sign);
        }
        count
    }

    /// Distinct real roots in `(lo, hi]`.
    fn count(&self, lo: &Rat, hi: &Rat) -> usize {
        if lo >= hi {
            return 0;
        }
        let a = self.variations_at(lo);
        let b = self.variations_at(hi);
        debug_assert!(a >= b, "sign variations must not increase");
        a - b
    }
}

/// Rescales by a positive rational so coefficients become coprime integers.
fn normalize_primitive(p: &RatPoly) -> RatPoly {
    if p.is_zero() {
        return RatPoly::zero();
    }
    let mut lcm = BigInt::one();
    for c in p.coeffs() {
        lcm = lcm.lcm(c.denom());
    }
    let nums: Vec<BigInt> = p
        .coeffs()
        .iter()
        .map(|c| c.numer() * (&lcm / c.denom()))
        .collect();
    let mut g = BigInt::zero();
    for n in &nums {
        g = g.gcd(n);
    }
    RatPoly::from_coeffs(
        nums.into_iter()
            .map(|n| Rat::from_integer(n / &g))
            .collect(),
    )
}

/// Unique interpolating polynomial through the given points, which must have
/// pairwise-distinct abscissae.
pub fn lagrange_interpolate(points: &[(Rat, Rat)]) -> Result<RatPoly> {
    if points.is_empty() {
        return Ok(RatPoly::zero());
    }
    let mut nodal = RatPoly::one();
    for (x, _) in points {
        nodal = &nodal * &RatPoly::from_coeffs(vec![-x.clone(), Rat::one()]);
    }
    let nodal_deriv = nodal.derivative();
    let mut acc = RatPoly::zero();
    for (x, y) in points {
        let denom = nodal_deriv.eval(x);
        if denom.is_zero() {
            return Err(Error::OutOfDomain("repeated interpolation abscissa".into()));
        }
        let basis = nodal.divide_out_root(x)?;
        acc = &acc + &basis.scale(&(y / denom));
    }
    Ok(acc)
}

impl std::ops::Add for &RatPoly {
    type Output = RatPoly;
    fn add(self, rhs: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(self.coeff(i) + rhs.coeff(i));
        }
        RatPoly::from_coeffs(coeffs)
    }
}

impl std::ops::Sub for &RatPoly {
    type Output = RatPoly;
    fn sub(self, rhs: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(self.coeff(i) - rhs.coeff(i));
        }
        RatPoly::from_coeffs(coeffs)
    }
}

impl std::ops::Mul for &RatPoly {
    type Output = RatPoly;
    fn mul(self, rhs: &RatPoly) -> RatPoly {
        if self.is_zero() || rhs.is_zero() {
            return RatPoly::zero();
        }
        let mut coeffs = vec![Rat::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        RatPoly::from_coeffs(coeffs)
    }
}

impl std::ops::Neg for &RatPoly {
    type Output = RatPoly;
    fn neg(self) -> RatPoly {
        RatPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl fmt::Display for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for i in (0..self.coeffs.len()).rev() {
            let c = &self.coeffs[i];
            if c.is_zero() {
                continue;
            }
            let (sign, mag) = if c.is_negative() {
                ("-", -c)
            } else {
                ("+", c.clone())
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            let mag_one = mag.is_one();
            match (i, mag_one) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "x")?,
                (1, false) => write!(f, "{mag}*x")?,
                (_, true) => write!(f, "x^{i}")?,
                (_, false) => write!(f, "{mag}*x^{i}")?,
            }
        }
        Ok(())
    }
}

//! Truncated even Laurent series in the genus parameter, over exact
//! rationals, plus the closed-form kernels used by every correspondence.
//!
//! A [`GenusSeries`] stores the coefficients of h^(2g) for g between -1 and
//! a truncation cap; we write u = h^2 throughout, so the Laurent floor u^-1
//! is the h^-2 pole of the genus-0 multiple-cover kernel. Only even powers
//! of h exist anywhere in this crate.
//!
//! Kernels:
//! - [`kernel_sin_power`]: (2 sin(k h/2))^(2g-2), the multiple-cover kernel
//! - [`kernel_v3`]: 2 sin(h/2) / h, the point-vertex series (leading 1)
//! - [`kernel_v2`]: the fiber-vertex series for tangency e >= 2
//! - [`kernel_k1`]: h / (2 sin(h/2)), the one-marking correction kernel,
//!   the multiplicative inverse of [`kernel_v3`]

use std::fmt;

use num::bigint::BigInt;
use num::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational scalar. All numeric coefficients in the crate are of this
/// type; the backing implementation keeps gcd(|p|, q) = 1 and q > 0.
pub type Rational = num::BigRational;

/// Shorthand for small rational constants.
pub fn rat(numer: i64, denom: i64) -> Rational {
    assert!(denom != 0, "zero denominator");
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Shorthand for integer constants.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Canonical text form: `p` when the denominator is 1, `p/q` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `p` or `p/q` with q > 0 after sign normalization. Rejects zero
/// denominators and anything that is not a plain integer fraction.
pub fn parse_rational(input: &str) -> Result<Rational, SeriesError> {
    let bad = |reason: &str| SeriesError::Parse {
        input: input.to_string(),
        reason: reason.to_string(),
    };
    let s = input.trim();
    if s.is_empty() {
        return Err(bad("empty string"));
    }
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let numer: BigInt = num_str
        .trim()
        .parse()
        .map_err(|_| bad("numerator is not an integer"))?;
    let denom: BigInt = match den_str {
        Some(d) => d
            .trim()
            .parse()
            .map_err(|_| bad("denominator is not an integer"))?,
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(bad("denominator is zero"));
    }
    Ok(Rational::new(numer, denom))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeriesError {
    #[error("result has a pole deeper than h^-2")]
    PoleTooDeep,
    #[error("leading coefficient is zero; series not invertible")]
    ZeroLeadingCoefficient,
    #[error("coefficient at u-power {upow} exceeds the truncation cap {cap}")]
    OutOfCap { upow: i64, cap: i64 },
    #[error("tangency must be at least 2, got {0}")]
    InvalidTangency(i64),
    #[error("cap {cap} too small to invert a series with leading u-power {upow}")]
    CapTooSmall { cap: i64, upow: i64 },
    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },
}

/// Even Laurent series in h, truncated at genus `cap`: coefficients of
/// u^n = h^(2n) for n = -1 ..= cap. Values are immutable after
/// construction; all operations return fresh series.
#[derive(Clone, PartialEq, Eq)]
pub struct GenusSeries {
    /// coeffs[i] is the coefficient of u^(i - 1).
    coeffs: Vec<Rational>,
    cap: i64,
}

impl fmt::Debug for GenusSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GenusSeries[cap {}]({})", self.cap, self)
    }
}

impl GenusSeries {
    pub fn zero(cap: i64) -> Self {
        assert!(cap >= 0, "genus cap must be nonnegative");
        GenusSeries {
            coeffs: vec![Rational::zero(); (cap + 2) as usize],
            cap,
        }
    }

    pub fn one(cap: i64) -> Self {
        Self::monomial(0, rat_int(1), cap)
    }

    /// c * u^upow, with -1 <= upow <= cap.
    pub fn monomial(upow: i64, c: Rational, cap: i64) -> Self {
        let mut s = Self::zero(cap);
        assert!((-1..=cap).contains(&upow), "monomial power out of range");
        s.coeffs[(upow + 1) as usize] = c;
        s
    }

    pub fn constant(c: Rational, cap: i64) -> Self {
        Self::monomial(0, c, cap)
    }

    /// Build from (u-power, coefficient) pairs; later pairs overwrite.
    pub fn from_terms(terms: &[(i64, Rational)], cap: i64) -> Result<Self, SeriesError> {
        let mut s = Self::zero(cap);
        for (p, c) in terms {
            if *p < -1 {
                return Err(SeriesError::PoleTooDeep);
            }
            if *p > cap {
                return Err(SeriesError::OutOfCap { upow: *p, cap });
            }
            s.coeffs[(p + 1) as usize] = c.clone();
        }
        Ok(s)
    }

    pub fn cap(&self) -> i64 {
        self.cap
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Lowest u-power with a nonzero coefficient, if any.
    pub fn min_upow(&self) -> Option<i64> {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .map(|i| i as i64 - 1)
    }

    /// Exact coefficient of u^g. g = -1 addresses the h^-2 pole. Asking
    /// above the cap is an error: truncation makes the value unknown,
    /// not zero.
    pub fn coefficient(&self, g: i64) -> Result<Rational, SeriesError> {
        if g > self.cap {
            return Err(SeriesError::OutOfCap {
                upow: g,
                cap: self.cap,
            });
        }
        if g < -1 {
            return Ok(Rational::zero());
        }
        Ok(self.coeffs[(g + 1) as usize].clone())
    }

    fn coeff_at(&self, upow: i64) -> Rational {
        if upow < -1 || upow > self.cap {
            Rational::zero()
        } else {
            self.coeffs[(upow + 1) as usize].clone()
        }
    }

    /// Restrict to a smaller cap (no zero-extension in the other direction).
    pub fn truncated(&self, new_cap: i64) -> Self {
        let cap = new_cap.min(self.cap);
        assert!(cap >= 0, "genus cap must be nonnegative");
        GenusSeries {
            coeffs: self.coeffs[..(cap + 2) as usize].to_vec(),
            cap,
        }
    }

    /// Coefficientwise sum; the lower cap wins.
    pub fn add(&self, other: &GenusSeries) -> GenusSeries {
        let cap = self.cap.min(other.cap);
        let mut out = GenusSeries::zero(cap);
        for i in 0..out.coeffs.len() {
            out.coeffs[i] = &self.coeffs[i] + &other.coeffs[i];
        }
        out
    }

    pub fn neg(&self) -> GenusSeries {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = -c.clone();
        }
        out
    }

    pub fn sub(&self, other: &GenusSeries) -> GenusSeries {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &Rational) -> GenusSeries {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = c.clone() * s;
        }
        out
    }

    /// Cauchy product truncated to the smaller cap. The product may only
    /// transiently reach u^-2; a nonzero residue there is a contract
    /// violation, not a silent truncation.
    pub fn mul(&self, other: &GenusSeries) -> Result<GenusSeries, SeriesError> {
        let cap = self.cap.min(other.cap);
        let mut out = GenusSeries::zero(cap);
        let residue = self.coeff_at(-1) * other.coeff_at(-1);
        if !residue.is_zero() {
            return Err(SeriesError::PoleTooDeep);
        }
        for n in -1..=cap {
            let mut acc = Rational::zero();
            for i in -1..=self.cap.min(n + 1) {
                let j = n - i;
                if j < -1 || j > other.cap {
                    continue;
                }
                let a = &self.coeffs[(i + 1) as usize];
                if a.is_zero() {
                    continue;
                }
                acc += a * &other.coeffs[(j + 1) as usize];
            }
            out.coeffs[(n + 1) as usize] = acc;
        }
        Ok(out)
    }

    /// Multiplicative inverse. The leading power negates, and the result
    /// keeps the same relative precision: a series with leading u-power p
    /// and cap G inverts to leading power -p with cap G - 2p, so that
    /// `a.mul(&a.invert()?)` is exactly 1 up to the common cap.
    pub fn invert(&self) -> Result<GenusSeries, SeriesError> {
        let p = self.min_upow().ok_or(SeriesError::ZeroLeadingCoefficient)?;
        if p >= 2 {
            return Err(SeriesError::PoleTooDeep);
        }
        let new_cap = self.cap - 2 * p;
        if new_cap < 0 {
            return Err(SeriesError::CapTooSmall {
                cap: self.cap,
                upow: p,
            });
        }
        // unit-part coefficients a[j] = coeff(p + j)
        let len = (self.cap - p + 1) as usize;
        let a: Vec<Rational> = (0..len).map(|j| self.coeff_at(p + j as i64)).collect();
        let mut b = vec![Rational::zero(); len];
        let lead_inv = Rational::one() / a[0].clone();
        b[0] = lead_inv.clone();
        for j in 1..len {
            let mut acc = Rational::zero();
            for i in 1..=j {
                acc += &a[i] * &b[j - i];
            }
            b[j] = -acc * &lead_inv;
        }
        let mut out = GenusSeries::zero(new_cap);
        for (j, c) in b.into_iter().enumerate() {
            let pow = -p + j as i64;
            if pow <= new_cap {
                out.coeffs[(pow + 1) as usize] = c;
            }
        }
        Ok(out)
    }

    /// h -> k h: the u^n coefficient is multiplied by k^(2n), including
    /// k^-2 at the pole.
    pub fn rescale_h(&self, k: i64) -> GenusSeries {
        assert!(k >= 1, "rescale factor must be positive");
        let ksq = rat_int(k * k);
        let mut out = self.clone();
        out.coeffs[0] = out.coeffs[0].clone() / &ksq;
        let mut factor = Rational::one();
        for n in 1..=self.cap {
            factor *= &ksq;
            out.coeffs[(n + 1) as usize] = out.coeffs[(n + 1) as usize].clone() * &factor;
        }
        out
    }

    /// Multiply by u^d. Coefficients pushed above the cap are dropped; a
    /// nonzero coefficient pushed below u^-1 is a pole violation.
    fn shift_upow(&self, d: i64) -> Result<GenusSeries, SeriesError> {
        let mut out = GenusSeries::zero(self.cap);
        for n in -1..=self.cap {
            let c = self.coeff_at(n);
            if c.is_zero() {
                continue;
            }
            let m = n + d;
            if m < -1 {
                return Err(SeriesError::PoleTooDeep);
            }
            if m <= self.cap {
                out.coeffs[(m + 1) as usize] = c;
            }
        }
        Ok(out)
    }

    /// Integer power by repeated squaring; the base must be pole-free.
    fn pow(&self, mut e: u64) -> GenusSeries {
        let mut result = GenusSeries::one(self.cap);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base).expect("pole-free power");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("pole-free power");
            }
        }
        result
    }
}

impl fmt::Display for GenusSeries {
    /// Text form for datasets and CLI output: whitespace-separated
    /// `upow:rat` pairs, nonzero terms only. The zero series prints `0:0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for n in -1..=self.cap {
            let c = &self.coeffs[(n + 1) as usize];
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{}:{}", n, format_rational(c))?;
        }
        if first {
            write!(f, "0:0")?;
        }
        Ok(())
    }
}

/// Parse the `upow:rat` text form at an explicit cap.
pub fn parse_series(input: &str, cap: i64) -> Result<GenusSeries, SeriesError> {
    let mut s = GenusSeries::zero(cap);
    for tok in input.split_whitespace() {
        let (p_str, c_str) = tok.split_once(':').ok_or_else(|| SeriesError::Parse {
            input: tok.to_string(),
            reason: "expected `upow:rat`".to_string(),
        })?;
        let p: i64 = p_str.trim().parse().map_err(|_| SeriesError::Parse {
            input: tok.to_string(),
            reason: "power is not an integer".to_string(),
        })?;
        let c = parse_rational(c_str)?;
        if p < -1 {
            return Err(SeriesError::PoleTooDeep);
        }
        if p > cap {
            return Err(SeriesError::OutOfCap { upow: p, cap });
        }
        s.coeffs[(p + 1) as usize] = c;
    }
    Ok(s)
}

fn odd_factorial(n: u64) -> BigInt {
    // (2n+1)!
    let mut acc = BigInt::one();
    for i in 2..=(2 * n + 1) {
        acc *= BigInt::from(i);
    }
    acc
}

/// 2 sin(k h / 2) / (k h) as a series in u = h^2: the u^n coefficient is
/// (-1)^n k^(2n) / (4^n (2n+1)!). Unit constant term for every k.
fn half_sine(k: i64, cap: i64) -> GenusSeries {
    let mut s = GenusSeries::zero(cap);
    let ksq = BigInt::from(k * k);
    let mut knum = BigInt::one();
    for n in 0..=cap {
        let sign = if n % 2 == 0 { 1 } else { -1 };
        let denom = BigInt::from(4).pow(n as u32) * odd_factorial(n as u64);
        s.coeffs[(n + 1) as usize] = Rational::new(BigInt::from(sign) * &knum, denom);
        knum *= &ksq;
    }
    s
}

/// Multiple-cover kernel (2 sin(k h / 2))^(2g - 2).
///
/// g = 0 is a Laurent series with its pole exactly at h^-2, g = 1 is the
/// constant 1, and g >= 2 starts at h^(2g-2).
pub fn kernel_sin_power(g: i64, k: i64, cap: i64) -> GenusSeries {
    assert!(g >= 0, "genus must be nonnegative");
    assert!(k >= 1, "cover multiplicity must be positive");
    if g == 1 {
        return GenusSeries::one(cap);
    }
    if g == 0 {
        // k^-2 u^-1 (2 sin(k h/2) / (k h))^-2, computed one order deep
        // so the shift keeps full precision up to the cap.
        let hs = half_sine(k, cap + 1);
        let sq = hs.mul(&hs).expect("pole-free");
        let inv = sq.invert().expect("unit constant term");
        let shifted = inv.shift_upow(-1).expect("pole at most h^-2");
        return shifted.truncated(cap).scale(&rat(1, k * k));
    }
    let m = (2 * g - 2) as u64;
    let hs = half_sine(k, cap);
    let mut kpow = Rational::one();
    for _ in 0..m {
        kpow *= rat_int(k);
    }
    hs.pow(m)
        .scale(&kpow)
        .shift_upow(g - 1)
        .expect("nonnegative shift")
}

/// The point-vertex series 2 sin(h/2) / h. Its h^(2g) coefficients are
/// 1, -1/24, 1/1920, -1/322560, ...; the genus-0 value is the count of
/// lines through two points.
pub fn kernel_v3(cap: i64) -> GenusSeries {
    half_sine(1, cap)
}

/// One-marking correction kernel h / (2 sin(h/2)), the inverse of
/// [`kernel_v3`]; its genus-1 coefficient is 1/24.
pub fn kernel_k1(cap: i64) -> GenusSeries {
    kernel_v3(cap).invert().expect("unit constant term")
}

/// Fiber-vertex series for tangency e >= 2:
/// ((-1)^e / (e-1)^2) * (2 sin((e-1) h/2) / ((e-1) h))^-1, which is
/// ((-1)^e / (e-1)) * (h/2) csc((e-1) h/2) and starts
/// (-1)^e/(e-1)^2 + (-1)^e h^2/24 + 7 (-1)^e (e-1)^2 h^4/5760 + ...
pub fn kernel_v2(e: i64, cap: i64) -> Result<GenusSeries, SeriesError> {
    if e < 2 {
        return Err(SeriesError::InvalidTangency(e));
    }
    let inv = half_sine(e - 1, cap).invert().expect("unit constant term");
    let sign = if e % 2 == 0 { 1 } else { -1 };
    Ok(inv.scale(&rat(sign, (e - 1) * (e - 1))))
}

//! Rigorous enclosures of real numbers with rational endpoints.
//!
//! Irrational exponents are carried as intervals `[lo, hi]` with dyadic
//! endpoints. Every operation rounds outward, so the true value always lies in
//! the interval. Sign decisions succeed only when the interval clears an
//! explicit indeterminacy band; otherwise the caller gets `None` and must
//! surface an indeterminate result instead of guessing.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Default number of decimal digits carried by irrational exponents.
pub const DEFAULT_DIGITS: u32 = 60;

/// Default indeterminacy band for sign decisions.
pub const DEFAULT_BAND: f64 = 1e-30;

/// Converts a decimal digit count into the binary precision used for rounding.
pub fn bits_for_digits(digits: u32) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 16
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

fn round_down(x: &BigRational, bits: u32) -> BigRational {
    if x.denom().is_one() {
        return x.clone();
    }
    let scale = BigRational::from_integer(pow2(bits));
    (x * &scale).floor() / scale
}

fn round_up(x: &BigRational, bits: u32) -> BigRational {
    if x.denom().is_one() {
        return x.clone();
    }
    let scale = BigRational::from_integer(pow2(bits));
    (x * &scale).ceil() / scale
}

/// A closed interval `[lo, hi]` known to contain some real number.
#[derive(Clone, Debug, PartialEq)]
pub struct Enclosure {
    lo: BigRational,
    hi: BigRational,
    bits: u32,
}

impl Enclosure {
    pub fn new(lo: BigRational, hi: BigRational, bits: u32) -> Self {
        assert!(lo <= hi, "enclosure endpoints out of order");
        Self { lo, hi, bits }
    }

    /// A degenerate enclosure holding an exact rational.
    pub fn exact(x: BigRational, bits: u32) -> Self {
        Self {
            lo: x.clone(),
            hi: x,
            bits,
        }
    }

    pub fn from_i64(x: i64, bits: u32) -> Self {
        Self::exact(BigRational::from_integer(BigInt::from(x)), bits)
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// Midpoint as a double.
    pub fn to_f64(&self) -> f64 {
        let mid = (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2));
        mid.to_f64().unwrap_or(f64::NAN)
    }

    fn rounded(lo: BigRational, hi: BigRational, bits: u32) -> Self {
        Self {
            lo: round_down(&lo, bits),
            hi: round_up(&hi, bits),
            bits,
        }
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        let bits = self.bits.min(other.bits);
        Self::rounded(&self.lo + &other.lo, &self.hi + &other.hi, bits)
    }

    pub fn sub(&self, other: &Enclosure) -> Enclosure {
        let bits = self.bits.min(other.bits);
        Self::rounded(&self.lo - &other.hi, &self.hi - &other.lo, bits)
    }

    pub fn neg(&self) -> Enclosure {
        Self {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
            bits: self.bits,
        }
    }

    pub fn add_rational(&self, r: &BigRational) -> Enclosure {
        Self::rounded(&self.lo + r, &self.hi + r, self.bits)
    }

    pub fn mul_rational(&self, r: &BigRational) -> Enclosure {
        if r.is_negative() {
            Self::rounded(&self.hi * r, &self.lo * r, self.bits)
        } else {
            Self::rounded(&self.lo * r, &self.hi * r, self.bits)
        }
    }

    pub fn mul(&self, other: &Enclosure) -> Enclosure {
        let bits = self.bits.min(other.bits);
        let products = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = products.iter().min().unwrap().clone();
        let hi = products.iter().max().unwrap().clone();
        Self::rounded(lo, hi, bits)
    }

    /// Reciprocal, or `None` when the interval touches zero.
    pub fn recip(&self) -> Option<Enclosure> {
        if self.lo.is_positive() || self.hi.is_negative() {
            Some(Self::rounded(self.hi.recip(), self.lo.recip(), self.bits))
        } else {
            None
        }
    }

    pub fn abs(&self) -> Enclosure {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            let hi = (-self.lo.clone()).max(self.hi.clone());
            Self::new(BigRational::zero(), hi, self.bits)
        }
    }

    /// Sign of the enclosed number, decided only outside `[-band, band]`.
    pub fn sign(&self, band: f64) -> Option<Ordering> {
        let band = BigRational::from_float(band.abs()).unwrap_or_else(BigRational::zero);
        if self.lo > band {
            Some(Ordering::Greater)
        } else if self.hi < -band {
            Some(Ordering::Less)
        } else {
            None
        }
    }

    /// Compares against an exact rational under the same band policy.
    pub fn cmp_rational(&self, r: &BigRational, band: f64) -> Option<Ordering> {
        self.add_rational(&-r.clone()).sign(band)
    }

    /// Floor, when both endpoints share it.
    pub fn floor(&self) -> Option<BigInt> {
        let a = self.lo.floor().to_integer();
        let b = self.hi.floor().to_integer();
        (a == b).then_some(a)
    }
}

/// Enclosure of `sqrt(k)` to `bits` binary places.
pub fn sqrt_int(k: u64, bits: u32) -> Enclosure {
    let scaled: BigUint = BigUint::from(k) << (2 * bits as usize);
    let s = BigInt::from(scaled.sqrt());
    let scale = BigRational::from_integer(pow2(bits));
    let lo = BigRational::from_integer(s.clone()) / &scale;
    let hi = if &s * &s == BigInt::from(k) << (2 * bits as usize) {
        lo.clone()
    } else {
        BigRational::from_integer(s + 1) / scale
    };
    Enclosure::new(lo, hi, bits)
}

/// Fixed-point `atan(1/x) * 2^g` together with a bound on the accumulated error in ulps.
fn atan_inv_fixed(x: u64, g: u32) -> (BigInt, u64) {
    let x = BigInt::from(x);
    let x2 = &x * &x;
    let mut power = pow2(g) / &x;
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * k + 1);
        if k.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &x2;
        k += 1;
    }
    (sum, 2 * k + 2)
}

/// Enclosure of pi via Machin's formula.
pub fn pi(bits: u32) -> Enclosure {
    let g = bits + 32;
    let (a, ea) = atan_inv_fixed(5, g);
    let (b, eb) = atan_inv_fixed(239, g);
    let value = a * 16 - b * 4;
    let err = BigInt::from(16 * ea + 4 * eb);
    let scale = BigRational::from_integer(pow2(g));
    let lo = BigRational::from_integer(&value - &err) / &scale;
    let hi = BigRational::from_integer(&value + &err) / scale;
    Enclosure::rounded(lo, hi, bits)
}

/// Enclosure of Euler's number from its factorial series.
pub fn euler(bits: u32) -> Enclosure {
    let g = bits + 32;
    let mut term = pow2(g);
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    while !term.is_zero() {
        sum += &term;
        k += 1;
        term /= BigInt::from(k);
    }
    let err = BigInt::from(k + 2);
    let scale = BigRational::from_integer(pow2(g));
    let lo = BigRational::from_integer(&sum - &err) / &scale;
    let hi = BigRational::from_integer(&sum + &err) / scale;
    Enclosure::rounded(lo, hi, bits)
}

/// Enclosure of the golden ratio `(1 + sqrt 5) / 2`.
pub fn golden(bits: u32) -> Enclosure {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    sqrt_int(5, bits + 1)
        .add_rational(&BigRational::one())
        .mul_rational(&half)
}

/// Parses a plain decimal such as `1.41421356`. Returns the exact value and
/// the number of fractional digits.
pub fn parse_decimal(s: &str) -> Option<(BigRational, u32)> {
    let s = s.trim();
    let (int_part, frac_part) = match s.split_once('.') {
        Some((a, b)) => (a, b),
        None => (s, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let d = frac_part.len() as u32;
    let denom = num_traits::pow(BigInt::from(10), d as usize);
    Some((BigRational::new(numer, denom), d))
}

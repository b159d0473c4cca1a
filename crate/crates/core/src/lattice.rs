//! Exact combinatorics of the monomial index set.
//!
//! After the unitary reduction the Bergman space is indexed by pairs
//! `(alpha1, beta)` with `alpha1 + gamma (beta + 1) > -n`. For `gamma = m / l`
//! this is the integer half-plane `l alpha1 + m beta >= 1 - m - n l`, which is
//! split into the residue classes `alpha1 = j (mod m)`.
//!
//! Everything here is integer arithmetic. Exponents are limited to 32-bit
//! numerators and denominators and all intermediate products are formed in
//! `i128`, which cannot overflow for `alpha1` below `2^60`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Gamma};
use crate::precise::{Enclosure, DEFAULT_BAND};

/// A reduced fraction `m / l` used as the domain exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalExponent {
    m: u64,
    l: u64,
    original: (u64, u64),
}

/// Normalizes `m / l` to lowest terms.
pub fn make_exponent(m: i64, l: i64) -> Result<RationalExponent> {
    if m < 1 || l < 1 {
        return Err(Error::Domain(format!(
            "exponent m/l needs m >= 1 and l >= 1, got {m}/{l}"
        )));
    }
    if m > u32::MAX as i64 || l > u32::MAX as i64 {
        return Err(Error::Domain(format!("exponent {m}/{l} exceeds 32-bit range")));
    }
    let g = m.gcd(&l);
    Ok(RationalExponent {
        m: (m / g) as u64,
        l: (l / g) as u64,
        original: (m as u64, l as u64),
    })
}

impl RationalExponent {
    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn l(&self) -> u64 {
        self.l
    }

    /// The fraction as supplied, before reduction.
    pub fn original(&self) -> (u64, u64) {
        self.original
    }

    pub fn to_f64(&self) -> f64 {
        self.m as f64 / self.l as f64
    }

    pub fn to_ratio(&self) -> BigRational {
        BigRational::new(BigInt::from(self.m), BigInt::from(self.l))
    }

    pub(crate) fn mi(&self) -> i128 {
        self.m as i128
    }

    pub(crate) fn li(&self) -> i128 {
        self.l as i128
    }
}

impl std::fmt::Display for RationalExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.m, self.l)
    }
}

/// A point `(alpha1, beta)` of the index lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeIndex {
    pub alpha1: u64,
    pub beta: i64,
}

impl LatticeIndex {
    pub fn new(alpha1: u64, beta: i64) -> Self {
        Self { alpha1, beta }
    }
}

/// Per-residue constants of the sub-kernel `K_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidueData {
    pub j: u64,
    pub e_j: i64,
    /// `(2m + 2nl) / (m + m E_j - l j)`: the sub-projection fails to be
    /// `L^p` bounded from this exponent on.
    pub threshold_p: BigRational,
}

/// The residue class `j0` with `l (j0 + n) = 1 (mod m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalResidue {
    pub data: ResidueData,
    pub ell: i64,
}

/// Membership in the index lattice, with the default indeterminacy band.
pub fn in_lambda(domain: &DomainSpec, idx: LatticeIndex) -> Result<bool> {
    in_lambda_with_band(domain, idx, DEFAULT_BAND)
}

/// Membership in the index lattice.
///
/// Rational exponents use the integer form `l alpha1 + m beta >= 1 - m - n l`.
/// Irrational exponents evaluate `alpha1 + n + gamma (beta + 1)` on the
/// exponent's enclosure and refuse to answer inside `band`.
pub fn in_lambda_with_band(domain: &DomainSpec, idx: LatticeIndex, band: f64) -> Result<bool> {
    let n = domain.n() as i128;
    match domain.gamma() {
        Gamma::Rational(exp) => {
            let (m, l) = (exp.mi(), exp.li());
            Ok(l * idx.alpha1 as i128 + m * idx.beta as i128 >= 1 - m - n * l)
        }
        Gamma::Real(g) => {
            let value = lambda_margin(g.enclosure(), domain.n(), idx);
            match value.sign(band) {
                Some(Ordering::Greater) => Ok(true),
                Some(_) => Ok(false),
                None => Err(Error::Indeterminate {
                    what: format!(
                        "alpha1 + gamma (beta + 1) + n at ({}, {})",
                        idx.alpha1, idx.beta
                    ),
                    band,
                }),
            }
        }
    }
}

/// `alpha1 + n + gamma (beta + 1)` as an enclosure.
pub(crate) fn lambda_margin(gamma: &Enclosure, n: u32, idx: LatticeIndex) -> Enclosure {
    let shift = BigRational::from_integer(BigInt::from(idx.alpha1 as i128 + n as i128));
    let beta1 = BigRational::from_integer(BigInt::from(idx.beta as i128 + 1));
    gamma.mul_rational(&beta1).add_rational(&shift)
}

fn check_residue(exp: &RationalExponent, j: u64) -> Result<()> {
    if j >= exp.m {
        return Err(Error::Domain(format!(
            "residue j = {j} outside [0, {}]",
            exp.m - 1
        )));
    }
    Ok(())
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("dimension n must be >= 1".into()));
    }
    Ok(())
}

/// `E_j = floor(((j + n) l - 1) / m)`.
pub fn floor_ej(exp: &RationalExponent, n: u32, j: u64) -> Result<i64> {
    check_n(n)?;
    check_residue(exp, j)?;
    Ok(ej_unchecked(exp, n, j))
}

pub(crate) fn ej_unchecked(exp: &RationalExponent, n: u32, j: u64) -> i64 {
    let num = (j as i128 + n as i128) * exp.li() - 1;
    num.div_euclid(exp.mi()) as i64
}

/// Smallest `beta` with `(alpha1, beta)` in the lattice, computed as
/// `-1 - l (alpha1 - j) / m - E_j` with `j = alpha1 mod m`.
pub fn min_beta(exp: &RationalExponent, n: u32, alpha1: u64) -> i64 {
    let (m, l) = (exp.mi(), exp.li());
    let j = (alpha1 as i128).rem_euclid(m);
    let e_j = ej_unchecked(exp, n, j as u64) as i128;
    let ell = -1 - l * ((alpha1 as i128 - j) / m) - e_j;
    debug_assert_eq!(ell, min_beta_direct(exp, n, alpha1) as i128);
    ell as i64
}

/// Smallest `beta` from the half-plane inequality directly.
pub(crate) fn min_beta_direct(exp: &RationalExponent, n: u32, alpha1: u64) -> i64 {
    let (m, l) = (exp.mi(), exp.li());
    let rhs = 1 - m - n as i128 * l - l * alpha1 as i128;
    // smallest beta with m beta >= rhs
    (-((-rhs).div_euclid(m))) as i64
}

/// `E_j` and the sub-projection threshold for residue `j`.
pub fn residue_data(exp: &RationalExponent, n: u32, j: u64) -> Result<ResidueData> {
    let e_j = floor_ej(exp, n, j)?;
    let (m, l, ni) = (exp.mi(), exp.li(), n as i128);
    let denom = m + m * e_j as i128 - l * j as i128;
    if denom < ni * l {
        return Err(Error::Internal(format!(
            "m + m E_j - l j = {denom} not above n l - 1 for j = {j}"
        )));
    }
    Ok(ResidueData {
        j,
        e_j,
        threshold_p: BigRational::new(BigInt::from(2 * m + 2 * ni * l), BigInt::from(denom)),
    })
}

/// Inverse of `l` modulo `m` (with `m = 1` giving 0).
fn inverse_mod(l: i128, m: i128) -> i128 {
    if m == 1 {
        return 0;
    }
    let ext = l.extended_gcd(&m);
    debug_assert_eq!(ext.gcd, 1);
    ext.x.rem_euclid(m)
}

/// The critical residue `j0 = x - n`, where `x` in `{n, ..., n + m - 1}`
/// solves `l x = 1 (mod m)`.
pub fn critical_j0(exp: &RationalExponent, n: u32) -> Result<CriticalResidue> {
    check_n(n)?;
    let (m, l, ni) = (exp.mi(), exp.li(), n as i128);
    let inv = inverse_mod(l, m);
    // x = inv (mod m), shifted into [n, n + m - 1]
    let x = ni + (inv - ni).rem_euclid(m);
    let j0 = x - ni;
    let numer = (j0 + ni) * l - 1;
    if numer.rem_euclid(m) != 0 {
        return Err(Error::Internal(format!("(j0 + n) l - 1 = {numer} not divisible by m")));
    }
    let data = residue_data(exp, n, j0 as u64)?;
    if data.e_j as i128 != numer / m {
        return Err(Error::Internal("E_j0 differs from the unfloored quotient".into()));
    }
    let ell_num = -l * j0 - m + 1 - ni * l;
    if ell_num.rem_euclid(m) != 0 {
        return Err(Error::Internal("ell(j0) is not an integer".into()));
    }
    let ell = (ell_num / m) as i64;
    debug_assert_eq!(ell, min_beta(exp, n, j0 as u64));
    Ok(CriticalResidue { data, ell })
}

/// The lattice point `(eta1, eta2)` with `0 <= eta1 < m` lying on the boundary
/// line `l eta1 + m eta2 = 1 - m - n l`.
pub fn solve_min_eta(exp: &RationalExponent, n: u32) -> Result<LatticeIndex> {
    check_n(n)?;
    let (m, l, ni) = (exp.mi(), exp.li(), n as i128);
    let eta1 = (inverse_mod(l, m) * (1 - ni * l)).rem_euclid(m);
    let num = 1 - l * eta1 - ni * l - m;
    if num.rem_euclid(m) != 0 {
        return Err(Error::Internal("eta2 is not an integer".into()));
    }
    Ok(LatticeIndex::new(eta1 as u64, (num / m) as i64))
}

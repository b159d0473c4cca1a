//! Sphere integrals, squared `L^2` norms of monomials and `L^p` norms of
//! `z_1^eta1 w^eta2`.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Gamma};
use crate::lattice::{in_lambda, LatticeIndex};
use crate::precise::DEFAULT_BAND;
use crate::special::ln_gamma;

/// `int_{S^(2n-1)} |xi_1|^(2 v_1) ... |xi_n|^(2 v_n) dsigma`
/// `= 2 Gamma(v_1 + 1) ... Gamma(v_n + 1) pi^n / Gamma(n + |v|)`.
pub fn sphere_integral(n: u32, exponents: &[f64]) -> Result<f64> {
    if n == 0 || exponents.len() != n as usize {
        return Err(Error::Domain(format!(
            "sphere integral needs {n} exponents, got {}",
            exponents.len()
        )));
    }
    if let Some(v) = exponents.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!("sphere exponent {v} must be finite and >= 0")));
    }
    let total: f64 = exponents.iter().sum();
    let log = 2f64.ln() + n as f64 * PI.ln() + exponents.iter().map(|v| ln_gamma(v + 1.0)).sum::<f64>()
        - ln_gamma(n as f64 + total);
    Ok(log.exp())
}

/// Multi-index `(alpha, beta)` of `z^alpha w^beta`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct FullIndex {
    pub alpha: Vec<u64>,
    pub beta: i64,
}

impl FullIndex {
    pub fn new(alpha: Vec<u64>, beta: i64) -> Self {
        Self { alpha, beta }
    }

    pub fn total(&self) -> u64 {
        self.alpha.iter().sum()
    }

    /// The reduced lattice index `(|alpha|, beta)`.
    pub fn reduced(&self) -> LatticeIndex {
        LatticeIndex::new(self.total(), self.beta)
    }
}

/// Squared norm of a monomial, or the typed outcome that it is not square
/// integrable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value")]
pub enum NormSq {
    Finite(f64),
    NotInA2,
}

impl NormSq {
    pub fn value(&self) -> Option<f64> {
        match self {
            NormSq::Finite(v) => Some(*v),
            NormSq::NotInA2 => None,
        }
    }
}

/// `pi^(n+1) alpha! / ((beta + (|alpha| + n) / gamma + 1) Gamma(|alpha| + n + 1))`
/// when `|alpha| + gamma (beta + 1) > -n`.
pub fn monomial_norm_sq(domain: &DomainSpec, idx: &FullIndex) -> Result<NormSq> {
    let n = domain.n();
    if idx.alpha.len() != n as usize {
        return Err(Error::Domain(format!(
            "multi-index has {} entries, domain has n = {n}",
            idx.alpha.len()
        )));
    }
    if !in_lambda(domain, idx.reduced())? {
        return Ok(NormSq::NotInA2);
    }
    let total = idx.total() as f64;
    let nf = n as f64;
    let denom = idx.beta as f64 + (total + nf) / domain.gamma_f64() + 1.0;
    let log = (nf + 1.0) * PI.ln() + idx.alpha.iter().map(|&a| ln_gamma(a as f64 + 1.0)).sum::<f64>()
        - ln_gamma(total + nf + 1.0)
        - denom.ln();
    Ok(NormSq::Finite(log.exp()))
}

/// `N(alpha1, beta)`: the squared norm of `z_1^alpha1 w^beta`.
pub fn weight_n(domain: &DomainSpec, alpha1: u64, beta: i64) -> Result<NormSq> {
    let mut alpha = vec![0; domain.n() as usize];
    alpha[0] = alpha1;
    monomial_norm_sq(domain, &FullIndex::new(alpha, beta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LpKind {
    Finite,
    Divergent,
}

/// `||z_1^eta1 w^eta2||_p^p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpResult {
    pub kind: LpKind,
    pub value: Option<f64>,
    /// Radial exponent `eta2 p + (2n + eta1 p) / gamma + 1`; divergence iff `<= -1`.
    pub exponent: f64,
}

/// `p`-th power of the `L^p` norm of `z_1^eta1 w^eta2`, with `p` taken as the
/// exact binary value of the double.
pub fn monomial_lp(domain: &DomainSpec, eta1: u64, eta2: i64, p: f64) -> Result<LpResult> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Domain(format!("p = {p} must be positive and finite")));
    }
    let exact = BigRational::from_float(p).ok_or_else(|| Error::Domain(format!("bad p = {p}")))?;
    monomial_lp_exact(domain, eta1, eta2, &exact)
}

/// As [`monomial_lp`] with an exact rational `p`; the divergence predicate is
/// decided exactly for rational `gamma` and on the enclosure otherwise.
pub fn monomial_lp_exact(domain: &DomainSpec, eta1: u64, eta2: i64, p: &BigRational) -> Result<LpResult> {
    if p <= &BigRational::zero() {
        return Err(Error::Domain("p must be positive".into()));
    }
    let n = domain.n();
    let two_n = BigRational::from_integer(BigInt::from(2 * n));
    let e1 = BigRational::from_integer(BigInt::from(eta1));
    let e2 = BigRational::from_integer(BigInt::from(eta2));
    let two = BigRational::from_integer(BigInt::from(2));
    let inner = &two_n + &e1 * p;
    // eta2 p + (2n + eta1 p) / gamma + 2
    let divergent = match domain.gamma() {
        Gamma::Rational(exp) => {
            let inv = BigRational::new(BigInt::from(exp.l()), BigInt::from(exp.m()));
            &e2 * p + &inner * inv + &two <= BigRational::zero()
        }
        Gamma::Real(g) => {
            let inv = g
                .enclosure()
                .recip()
                .ok_or_else(|| Error::Domain("gamma enclosure touches zero".into()))?;
            let q = inv.mul_rational(&inner).add_rational(&(&e2 * p + &two));
            match q.sign(DEFAULT_BAND) {
                Some(Ordering::Greater) => false,
                Some(_) => true,
                None => {
                    return Err(Error::Indeterminate {
                        what: format!("L^p convergence exponent for ({eta1}, {eta2})"),
                        band: DEFAULT_BAND,
                    })
                }
            }
        }
    };
    let pf = p.to_f64().unwrap_or(f64::NAN);
    let inner_f = 2.0 * n as f64 + eta1 as f64 * pf;
    let exponent = eta2 as f64 * pf + inner_f / domain.gamma_f64() + 1.0;
    if divergent {
        return Ok(LpResult {
            kind: LpKind::Divergent,
            value: None,
            exponent,
        });
    }
    Ok(LpResult {
        kind: LpKind::Finite,
        value: Some(lp_prefactor(n, eta1, pf)? / (exponent + 1.0)),
        exponent,
    })
}

/// The factor multiplying the radial integral `int rho^exponent drho` in
/// `||z_1^eta1 w^eta2||_p^p`.
pub fn lp_prefactor(n: u32, eta1: u64, p: f64) -> Result<f64> {
    let mut v = vec![0.0; n as usize];
    v[0] = eta1 as f64 * p / 2.0;
    let inner = 2.0 * n as f64 + eta1 as f64 * p;
    Ok(sphere_integral(n, &v)? * 2.0 * PI / inner)
}

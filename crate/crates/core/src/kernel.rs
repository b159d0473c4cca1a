//! The Bergman kernel: raw series, per-residue closed forms and the
//! comparison bound.
//!
//! The kernel depends on the two points only through `a = z . conj(s)` and
//! `b = w conj(t)`, and equals `sum a^alpha1 b^beta / N(alpha1, beta)` over the
//! index lattice.

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result, SingularFactor};
use crate::geometry::{contains, sample_at, DomainSpec, Gamma, Point};
use crate::lattice::{floor_ej, in_lambda_with_band, min_beta, LatticeIndex, RationalExponent};
use crate::quadrature::NeumaierComplex;

type Poly = Vec<BigInt>;

fn poly_trim(p: &mut Poly) {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn poly_derivative(p: &Poly) -> Poly {
    let mut d: Poly = p.iter().enumerate().skip(1).map(|(k, c)| c * BigInt::from(k)).collect();
    if d.is_empty() {
        d.push(BigInt::zero());
    }
    d
}

/// `d^n/du^n (u^(j+n) / (1 - u^m)) = P_n(u) / (1 - u^m)^(n+1)`, with
/// `P_n(u) = u^j Q(u^m)`. Returns the coefficients of `Q`, lowest first.
pub fn derive_q_polynomial(n: u32, j: u64, m: u64) -> Result<Vec<BigInt>> {
    if n == 0 || m == 0 {
        return Err(Error::Domain("need n >= 1 and m >= 1".into()));
    }
    let (mu, ju) = (m as usize, j as usize);
    let mut p: Poly = vec![BigInt::zero(); ju + n as usize + 1];
    p[ju + n as usize] = BigInt::from(1);
    for k in 0..n as usize {
        // P_{k+1} = P_k' (1 - u^m) + (k + 1) m u^(m-1) P_k
        let d = poly_derivative(&p);
        let mut next: Poly = vec![BigInt::zero(); (d.len() + mu).max(p.len() + mu)];
        for (e, c) in d.iter().enumerate() {
            next[e] += c;
            next[e + mu] -= c;
        }
        let scale = BigInt::from((k as u64 + 1) * m);
        for (e, c) in p.iter().enumerate() {
            next[e + mu - 1] += c * &scale;
        }
        poly_trim(&mut next);
        p = next;
    }
    let mut q = Vec::new();
    for (e, c) in p.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        if e < ju || (e - ju) % mu != 0 {
            return Err(Error::Internal(format!(
                "P_n has a term u^{e} outside the residue class {j} mod {m}"
            )));
        }
        let i = (e - ju) / mu;
        if q.len() <= i {
            q.resize(i + 1, BigInt::zero());
        }
        q[i] = c.clone();
    }
    if q.len() > n as usize + 1 {
        return Err(Error::Internal(format!("Q has degree {} > n = {n}", q.len() - 1)));
    }
    if q.is_empty() {
        q.push(BigInt::zero());
    }
    Ok(q)
}

/// Closed-form data of the sub-kernel `K_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubKernelForm {
    pub j: u64,
    pub e_j: i64,
    #[serde(serialize_with = "crate::report::ser_bigints")]
    pub q_coeffs: Vec<BigInt>,
    /// `g_j(b) = g.0 + g.1 b`.
    #[serde(serialize_with = "crate::report::ser_rational_pair")]
    pub g_coeffs: (BigRational, BigRational),
    #[serde(skip)]
    q_f64: Vec<f64>,
    #[serde(skip)]
    g_f64: (f64, f64),
}

pub fn make_subkernel_form(exp: &RationalExponent, n: u32, j: u64) -> Result<SubKernelForm> {
    let e_j = floor_ej(exp, n, j)?;
    let q = derive_q_polynomial(n, j, exp.m())?;
    let gamma = exp.to_ratio();
    let int = |v: i64| BigRational::from_integer(BigInt::from(v));
    let jn = int(j as i64 + n as i64);
    let ge = &gamma * int(e_j);
    let g0 = &jn - &ge;
    let g1 = &gamma + &ge - &jn;
    let q_f64 = q.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    let g_f64 = (g0.to_f64().unwrap_or(f64::NAN), g1.to_f64().unwrap_or(f64::NAN));
    Ok(SubKernelForm {
        j,
        e_j,
        q_coeffs: q,
        g_coeffs: (g0, g1),
        q_f64,
        g_f64,
    })
}

fn check_singular(exp: &RationalExponent, a: Complex64, b: Complex64) -> Result<Complex64> {
    if b.norm() == 0.0 {
        return Err(Error::Singular(SingularFactor::BZero));
    }
    if (Complex64::new(1.0, 0.0) - b).norm() == 0.0 {
        return Err(Error::Singular(SingularFactor::OneMinusB));
    }
    let cone = b.powu(exp.l() as u32) - a.powu(exp.m() as u32);
    if cone.norm() == 0.0 {
        return Err(Error::Singular(SingularFactor::Cone));
    }
    Ok(cone)
}

/// `K_j(a, b) = l / (m pi^(n+1)) g_j(b) Q(a^m b^-l) a^j b^((n+1)l - 1 - E_j)
/// / ((1 - b)^2 (b^l - a^m)^(n+1))`.
pub fn subkernel_closed(
    form: &SubKernelForm,
    exp: &RationalExponent,
    n: u32,
    a: Complex64,
    b: Complex64,
) -> Result<Complex64> {
    let cone = check_singular(exp, a, b)?;
    Ok(subkernel_unchecked(form, exp, n, a, b, cone))
}

fn subkernel_unchecked(
    form: &SubKernelForm,
    exp: &RationalExponent,
    n: u32,
    a: Complex64,
    b: Complex64,
    cone: Complex64,
) -> Complex64 {
    let (m, l) = (exp.m() as i32, exp.l() as i32);
    let x = a.powi(m) / b.powi(l);
    let q = form.q_f64.iter().rev().fold(Complex64::zero(), |acc, c| acc * x + c);
    let g = form.g_f64.0 + form.g_f64.1 * b;
    let one_minus_b = Complex64::new(1.0, 0.0) - b;
    let power = (n as i64 + 1) * l as i64 - 1 - form.e_j;
    let scale = l as f64 / (m as f64 * PI.powi(n as i32 + 1));
    scale * g * q * a.powi(form.j as i32) * b.powi(power as i32)
        / (one_minus_b * one_minus_b * cone.powi(n as i32 + 1))
}

/// Sum of the closed-form sub-kernels, with the forms precomputed.
#[derive(Debug, Clone)]
pub struct ClosedKernel {
    exp: RationalExponent,
    n: u32,
    forms: Vec<SubKernelForm>,
}

impl ClosedKernel {
    pub fn new(exp: &RationalExponent, n: u32) -> Result<Self> {
        let forms = (0..exp.m()).map(|j| make_subkernel_form(exp, n, j)).collect::<Result<_>>()?;
        Ok(Self { exp: *exp, n, forms })
    }

    pub fn exponent(&self) -> &RationalExponent {
        &self.exp
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn forms(&self) -> &[SubKernelForm] {
        &self.forms
    }

    pub fn eval_ab(&self, a: Complex64, b: Complex64) -> Result<Complex64> {
        let cone = check_singular(&self.exp, a, b)?;
        Ok(self
            .forms
            .iter()
            .map(|f| subkernel_unchecked(f, &self.exp, self.n, a, b, cone))
            .sum())
    }

    pub fn eval_residue(&self, j: u64, a: Complex64, b: Complex64) -> Result<Complex64> {
        let form = self
            .forms
            .get(j as usize)
            .ok_or_else(|| Error::Domain(format!("residue {j} out of range")))?;
        subkernel_closed(form, &self.exp, self.n, a, b)
    }

    pub fn eval(&self, x: &Point, y: &Point) -> Result<Complex64> {
        self.eval_ab(x.pair_z(y), x.pair_w(y))
    }
}

/// `B((z, w), (s, t))` from the closed forms.
pub fn kernel_closed(exp: &RationalExponent, n: u32, x: &Point, y: &Point) -> Result<Complex64> {
    ClosedKernel::new(exp, n)?.eval(x, y)
}

/// `|b|^e / (|1 - b|^2 |b^l - a^m|^(n+1))` with `e = (n+1)l - 1 - (nl - 1)/m`,
/// or `e = lj/m + (n+1)l - E_j - 1` for a single residue `j`.
pub fn kernel_bound(
    exp: &RationalExponent,
    n: u32,
    a: Complex64,
    b: Complex64,
    per_residue: Option<u64>,
) -> Result<f64> {
    let cone = check_singular(exp, a, b)?;
    let (m, l, nf) = (exp.m() as f64, exp.l() as f64, n as f64);
    let e = match per_residue {
        None => (nf + 1.0) * l - 1.0 - (nf * l - 1.0) / m,
        Some(j) => {
            let e_j = floor_ej(exp, n, j)? as f64;
            l * j as f64 / m + (nf + 1.0) * l - e_j - 1.0
        }
    };
    Ok(b.norm().powf(e) / ((Complex64::new(1.0, 0.0) - b).norm_sqr() * cone.norm().powi(n as i32 + 1)))
}

/// Series controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelEvalOptions {
    pub rel_tol: f64,
    pub max_alpha_terms: usize,
    pub boundary_margin: f64,
}

impl Default for KernelEvalOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_alpha_terms: 100_000,
            boundary_margin: 1e-3,
        }
    }
}

impl KernelEvalOptions {
    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::Domain("rel_tol must be positive".into()));
        }
        if !(self.boundary_margin > 0.0 && self.boundary_margin < 1.0) {
            return Err(Error::Domain("boundary_margin must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// A series value with its truncation data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    #[serde(serialize_with = "crate::report::ser_complex")]
    pub value: Complex64,
    pub terms: usize,
    pub tail_bound: f64,
}

/// Smallest admissible `beta` for `alpha1`, and `beta0 + 1 + (alpha1 + n)/gamma`.
fn beta_start(domain: &DomainSpec, alpha1: u64) -> Result<(i64, f64)> {
    let n = domain.n();
    match domain.gamma() {
        Gamma::Rational(exp) => {
            let b0 = min_beta(exp, n, alpha1);
            let (m, l) = (exp.m() as i128, exp.l() as i128);
            let num = m * (b0 as i128 + 1) + l * (alpha1 as i128 + n as i128);
            Ok((b0, num as f64 / m as f64))
        }
        Gamma::Real(_) => {
            let kappa = (alpha1 as f64 + n as f64) / domain.gamma_f64();
            let mut b0 = (-kappa).floor() as i64;
            let frac = -kappa - (-kappa).floor();
            if !(1e-6..=1.0 - 1e-6).contains(&frac) {
                // settle the boundary on the enclosure
                let idx = |b| LatticeIndex::new(alpha1, b);
                while !in_lambda_with_band(domain, idx(b0), 0.0)? {
                    b0 += 1;
                }
                while in_lambda_with_band(domain, idx(b0 - 1), 0.0)? {
                    b0 -= 1;
                }
            }
            Ok((b0, b0 as f64 + 1.0 + kappa))
        }
    }
}

/// Kernel series in terms of `(a, b)`, optionally restricted to
/// `alpha1 = j (mod m)`.
pub fn kernel_series_ab(
    domain: &DomainSpec,
    a: Complex64,
    b: Complex64,
    opts: &KernelEvalOptions,
    residue_filter: Option<u64>,
) -> Result<SeriesValue> {
    opts.validate()?;
    let n = domain.n();
    let gamma = domain.gamma_f64();
    let stride = match (residue_filter, domain.gamma()) {
        (None, _) => None,
        (Some(j), Gamma::Rational(exp)) => {
            if j >= exp.m() {
                return Err(Error::Domain(format!("residue {j} outside [0, {})", exp.m())));
            }
            Some((j, exp.m()))
        }
        (Some(_), Gamma::Real(_)) => {
            return Err(Error::Domain("residue filters need a rational exponent".into()))
        }
    };
    let abs_b = b.norm();
    if abs_b == 0.0 {
        return Err(Error::Singular(SingularFactor::BZero));
    }
    let abs_a = a.norm();
    let abs_u = abs_a * abs_b.powf(-1.0 / gamma);
    if abs_b > 1.0 - opts.boundary_margin || abs_u > 1.0 - opts.boundary_margin {
        return Err(Error::Truncation {
            terms: 0,
            tail_bound: f64::INFINITY,
            abs_u,
        });
    }
    let one_minus_b = Complex64::new(1.0, 0.0) - b;
    let inv1 = one_minus_b.inv();
    let geo2 = b * inv1 * inv1;
    let pi_n1 = PI.powi(n as i32 + 1);
    let d = (inv1.norm() + abs_b * inv1.norm_sqr()) / pi_n1;
    let ln_a = a.ln();
    let ln_b = b.ln();
    let nf = n as f64;
    // ln c(k) with c(k) = (k + 1) ... (k + n)
    let mut ln_c = (1..=n).map(|i| (i as f64).ln()).sum::<f64>();

    let mut acc = NeumaierComplex::default();
    let mut tail = f64::INFINITY;
    let mut k: u64 = 0;
    let ln_bound_base = (-1.0 - nf / gamma) * abs_b.ln() + d.ln();
    loop {
        if k as usize >= opts.max_alpha_terms {
            return Err(Error::Truncation {
                terms: k as usize,
                tail_bound: tail,
                abs_u,
            });
        }
        let take = match stride {
            None => true,
            Some((j, m)) => k % m == j,
        };
        if take {
            let (b0, shift) = beta_start(domain, k)?;
            let inner = shift * inv1 + geo2;
            let log_mono = if k == 0 {
                b0 as f64 * ln_b
            } else {
                k as f64 * ln_a + b0 as f64 * ln_b
            };
            let term = (log_mono + ln_c.into_complex()).exp() * inner / pi_n1;
            acc.add(term);
        }
        if abs_a == 0.0 {
            return Ok(SeriesValue {
                value: acc.value(),
                terms: 1,
                tail_bound: 0.0,
            });
        }
        // tail from k + 1 on
        let kf = k as f64;
        let rho = abs_u * (kf + 2.0 + nf) / (kf + 2.0);
        let ln_c_next = ln_c + ((kf + 1.0 + nf) / (kf + 1.0)).ln();
        if rho < 1.0 {
            let ln_m = ln_c_next + (kf + 1.0) * abs_u.ln() + ln_bound_base;
            tail = ln_m.exp() / (1.0 - rho);
            let s = acc.value().norm();
            if tail <= opts.rel_tol * s {
                return Ok(SeriesValue {
                    value: acc.value(),
                    terms: k as usize + 1,
                    tail_bound: tail,
                });
            }
        }
        ln_c = ln_c_next;
        k += 1;
    }
}

trait IntoComplex {
    fn into_complex(self) -> Complex64;
}

impl IntoComplex for f64 {
    fn into_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

/// Kernel series between two points, which must lie in the domain with slack
/// `opts.boundary_margin`.
pub fn kernel_series(
    domain: &DomainSpec,
    x: &Point,
    y: &Point,
    opts: &KernelEvalOptions,
    residue_filter: Option<u64>,
) -> Result<Complex64> {
    for p in [x, y] {
        if !contains(domain, p, opts.boundary_margin) {
            return Err(Error::Domain(format!(
                "point (|z| = {}, |w| = {}) not interior with margin {}",
                p.z_norm(),
                p.w.norm(),
                opts.boundary_margin
            )));
        }
    }
    Ok(kernel_series_ab(domain, x.pair_z(y), x.pair_w(y), opts, residue_filter)?.value)
}

/// A sampled pair together with its invariants.
#[derive(Debug, Clone)]
pub struct KernelPair {
    pub x: Point,
    pub y: Point,
    pub a: Complex64,
    pub b: Complex64,
}

/// Draws uniform pairs (deterministic in `seed`) keeping those with both
/// points interior with slack `slack`, `|b| <= max_b` and
/// `|b^l - a^m| >= min_cone`.
pub fn sample_pairs(
    domain: &DomainSpec,
    count: usize,
    seed: u64,
    max_b: f64,
    min_cone: f64,
    slack: f64,
) -> Result<Vec<KernelPair>> {
    let exp = domain.exponent().copied();
    let mut out = Vec::with_capacity(count);
    let mut index = 0u64;
    let limit = 1000 * count as u64 + 10_000;
    while out.len() < count {
        if index >= limit {
            return Err(Error::Domain(format!(
                "only {} of {count} pairs satisfy |b| <= {max_b}, cone distance >= {min_cone}",
                out.len()
            )));
        }
        let x = sample_at(domain, seed, index);
        let y = sample_at(domain, seed, index + 1);
        index += 2;
        if !contains(domain, &x, slack) || !contains(domain, &y, slack) {
            continue;
        }
        let a = x.pair_z(&y);
        let b = x.pair_w(&y);
        let cone = match &exp {
            Some(e) => (b.powu(e.l() as u32) - a.powu(e.m() as u32)).norm(),
            None => b.norm().powf(1.0 / domain.gamma_f64()) - a.norm(),
        };
        if b.norm() <= max_b && cone >= min_cone {
            out.push(KernelPair { x, y, a, b });
        }
    }
    Ok(out)
}

/// Largest relative difference between the series and the closed form.
#[derive(Debug, Clone, Serialize)]
pub struct AgreementStats {
    pub pairs: usize,
    pub max_rel_err: f64,
    pub mean_rel_err: f64,
    pub max_terms: usize,
}

pub fn series_closed_agreement(
    exp: &RationalExponent,
    n: u32,
    pairs: &[KernelPair],
    opts: &KernelEvalOptions,
) -> Result<AgreementStats> {
    let domain = DomainSpec::rational(*exp, n)?;
    let closed = ClosedKernel::new(exp, n)?;
    let errs: Vec<(f64, usize)> = pairs
        .par_iter()
        .map(|p| {
            let s = kernel_series_ab(&domain, p.a, p.b, opts, None)?;
            let c = closed.eval_ab(p.a, p.b)?;
            Ok(((s.value - c).norm() / c.norm(), s.terms))
        })
        .collect::<Result<_>>()?;
    Ok(AgreementStats {
        pairs: errs.len(),
        max_rel_err: errs.iter().map(|e| e.0).fold(0.0, f64::max),
        mean_rel_err: errs.iter().map(|e| e.0).sum::<f64>() / errs.len().max(1) as f64,
        max_terms: errs.iter().map(|e| e.1).max().unwrap_or(0),
    })
}

/// Empirical supremum of `|B| / bound` over sampled pairs and its drift when
/// the sample is doubled.
#[derive(Debug, Clone, Serialize)]
pub struct BoundRatioStats {
    pub samples: usize,
    pub sup: f64,
    pub sup_doubled: f64,
    pub drift: f64,
}

pub fn bound_ratio_sup(exp: &RationalExponent, n: u32, samples: usize, seed: u64) -> Result<BoundRatioStats> {
    let domain = DomainSpec::rational(*exp, n)?;
    let closed = ClosedKernel::new(exp, n)?;
    let pairs = sample_pairs(&domain, 2 * samples, seed, 1.0, 0.0, 0.0)?;
    let ratios: Vec<f64> = pairs
        .par_iter()
        .map(|p| Ok(closed.eval_ab(p.a, p.b)?.norm() / kernel_bound(exp, n, p.a, p.b, None)?))
        .collect::<Result<_>>()?;
    let sup = ratios[..samples].iter().copied().fold(0.0, f64::max);
    let sup_doubled = ratios.iter().copied().fold(0.0, f64::max);
    Ok(BoundRatioStats {
        samples,
        sup,
        sup_doubled,
        drift: (sup_doubled - sup).abs() / sup,
    })
}

/// One evaluated row of a batch.
#[derive(Debug, Clone, Serialize)]
pub struct KernelRow {
    pub a_re: f64,
    pub a_im: f64,
    pub b_re: f64,
    pub b_im: f64,
    pub closed_re: f64,
    pub closed_im: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Evaluates point pairs read as CSV with columns
/// `re_z1..n, im_z1..n, re_w, im_w, re_s1..n, im_s1..n, re_t, im_t`.
pub fn batch_csv<R: Read, W: Write>(exp: &RationalExponent, n: u32, input: R, output: W) -> Result<usize> {
    let mut rdr = csv::Reader::from_reader(input);
    let width = 4 * n as usize + 4;
    let mut pairs = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != width {
            return Err(Error::Parse(format!("expected {width} columns, got {}", rec.len())));
        }
        let v: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {s:?}"))))
            .collect::<Result<_>>()?;
        let point = |off: usize| {
            let nn = n as usize;
            let z: Vec<Complex64> = (0..nn).map(|k| Complex64::new(v[off + k], v[off + nn + k])).collect();
            Point::new(&z, Complex64::new(v[off + 2 * nn], v[off + 2 * nn + 1]))
        };
        pairs.push((point(0), point(2 * n as usize + 2)));
    }
    let closed = ClosedKernel::new(exp, n)?;
    let rows: Vec<KernelRow> = pairs
        .par_iter()
        .map(|(x, y)| {
            let a = x.pair_z(y);
            let b = x.pair_w(y);
            let c = closed.eval_ab(a, b)?;
            let bound = kernel_bound(exp, n, a, b, None)?;
            Ok(KernelRow {
                a_re: a.re,
                a_im: a.im,
                b_re: b.re,
                b_im: b.im,
                closed_re: c.re,
                closed_im: c.im,
                bound,
                ratio: c.norm() / bound,
            })
        })
        .collect::<Result<_>>()?;
    let mut wtr = csv::Writer::from_writer(output);
    for r in &rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(rows.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_exponent;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exp(m: i64, l: i64) -> RationalExponent {
        make_exponent(m, l).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn classical(a: Complex64, b: Complex64) -> Complex64 {
        let one = c(1.0, 0.0);
        b / (PI * PI * (one - b).powi(2) * (b - a).powi(2))
    }

    #[test]
    fn q_examples() {
        assert_eq!(derive_q_polynomial(1, 0, 1).unwrap(), ints(&[1]));
        assert_eq!(derive_q_polynomial(1, 0, 2).unwrap(), ints(&[1, 1]));
        assert_eq!(derive_q_polynomial(2, 0, 1).unwrap(), ints(&[2]));
    }

    /// Coefficients of `u^j Q(u^m) / (1 - u^m)^(n+1)` against those of the
    /// differentiated series `sum_k (k+j+n)!/(k+j)! u^(k+j)` over `k = i m`.
    fn series_identity_holds(n: u32, j: u64, m: u64, order: usize) -> bool {
        let q = derive_q_polynomial(n, j, m).unwrap();
        let mut rhs = vec![BigInt::zero(); order + 1];
        for (i, qi) in q.iter().enumerate() {
            // times sum_t C(n + t, n) u^(m t)
            let mut t = 0usize;
            loop {
                let e = j as usize + m as usize * (i + t);
                if e > order {
                    break;
                }
                let binom: BigInt = (1..=n as usize).fold(BigInt::from(1), |acc, s| acc * BigInt::from(t + s))
                    / (1..=n as usize).fold(BigInt::from(1), |acc, s| acc * BigInt::from(s));
                rhs[e] += qi * binom;
                t += 1;
            }
        }
        let mut lhs = vec![BigInt::zero(); order + 1];
        let mut e = j as usize;
        while e <= order {
            lhs[e] = (1..=n as usize).fold(BigInt::from(1), |acc, s| acc * BigInt::from(e + s));
            e += m as usize;
        }
        lhs == rhs
    }

    #[test]
    fn q_identity_small_cases() {
        for m in 1..=4 {
            for n in 1..=3 {
                for j in 0..m {
                    assert!(series_identity_holds(n, j, m, 60), "m={m} n={n} j={j}");
                }
            }
        }
    }

    #[test]
    fn q_degree_and_integrality() {
        for m in 1..=6u64 {
            for n in 1..=4u32 {
                for j in 0..m {
                    let q = derive_q_polynomial(n, j, m).unwrap();
                    assert!(q.len() <= n as usize + 1);
                }
            }
        }
    }

    #[test]
    fn subkernel_form_examples() {
        let r = |p: i64, q: i64| BigRational::new(BigInt::from(p), BigInt::from(q));
        let f = make_subkernel_form(&exp(1, 1), 1, 0).unwrap();
        assert_eq!((f.e_j, f.q_coeffs.clone()), (0, ints(&[1])));
        assert_eq!(f.g_coeffs, (r(1, 1), r(0, 1)));
        let f = make_subkernel_form(&exp(3, 2), 1, 1).unwrap();
        assert_eq!(f.e_j, 1);
        assert_eq!(f.g_coeffs, (r(1, 2), r(1, 1)));
        let f = make_subkernel_form(&exp(2, 1), 1, 0).unwrap();
        assert_eq!((f.e_j, f.q_coeffs.clone()), (0, ints(&[1, 1])));
        assert_eq!(f.g_coeffs, (r(1, 1), r(1, 1)));
        for (m, l, n) in [(3, 2, 2), (5, 3, 1), (4, 7, 3)] {
            let e = exp(m, l);
            for j in 0..e.m() {
                let f = make_subkernel_form(&e, n, j).unwrap();
                assert_eq!(&f.g_coeffs.0 + &f.g_coeffs.1, e.to_ratio());
            }
        }
    }

    #[test]
    fn classical_closed_form() {
        let e = exp(1, 1);
        let k = ClosedKernel::new(&e, 1).unwrap();
        let v = k.eval_ab(c(0.0, 0.0), c(0.5, 0.0)).unwrap();
        assert!((v - c(8.0 / (PI * PI), 0.0)).norm() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let b = Complex64::from_polar(rng.random_range(0.05..0.95), rng.random_range(0.0..6.3));
            let a = Complex64::from_polar(rng.random_range(0.0..0.9) * b.norm(), rng.random_range(0.0..6.3));
            let want = classical(a, b);
            assert!((k.eval_ab(a, b).unwrap() - want).norm() < 1e-12 * want.norm());
        }
    }

    #[test]
    fn singular_inputs_are_named() {
        let e = exp(1, 1);
        let f = make_subkernel_form(&e, 1, 0).unwrap();
        let err = subkernel_closed(&f, &e, 1, c(0.0, 0.0), c(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::Singular(SingularFactor::OneMinusB)));
        let err = subkernel_closed(&f, &e, 1, c(0.3, 0.0), c(0.3, 0.0)).unwrap_err();
        assert!(matches!(err, Error::Singular(SingularFactor::Cone)));
        let err = kernel_bound(&e, 1, c(0.0, 0.0), c(0.0, 0.0), None).unwrap_err();
        assert!(matches!(err, Error::Singular(SingularFactor::BZero)));
    }

    #[test]
    fn series_at_a_zero() {
        let d = DomainSpec::from_ml(1, 1, 1).unwrap();
        let b = c(0.5, 0.2);
        let s = kernel_series_ab(&d, c(0.0, 0.0), b, &KernelEvalOptions::default(), None).unwrap();
        let want = classical(c(0.0, 0.0), b);
        assert!((s.value - want).norm() < 1e-13 * want.norm());
    }

    #[test]
    fn series_matches_closed_form() {
        let opts = KernelEvalOptions::default();
        for (m, l, n) in [(1, 1, 1), (2, 1, 1), (1, 2, 1), (3, 2, 1), (1, 1, 2), (2, 3, 2)] {
            let d = DomainSpec::from_ml(m, l, n).unwrap();
            let e = *d.exponent().unwrap();
            let pairs = sample_pairs(&d, 30, 9, 0.8, 0.1, 1e-3).unwrap();
            let stats = series_closed_agreement(&e, n, &pairs, &opts).unwrap();
            assert!(stats.max_rel_err < 1e-9, "{m}/{l} n={n}: {stats:?}");
        }
    }

    #[test]
    fn residue_filters_partition_the_series() {
        let opts = KernelEvalOptions::default();
        for (m, l, n) in [(3, 2, 1), (2, 1, 2)] {
            let d = DomainSpec::from_ml(m, l, n).unwrap();
            let e = *d.exponent().unwrap();
            let k = ClosedKernel::new(&e, n).unwrap();
            for p in sample_pairs(&d, 10, 4, 0.8, 0.1, 1e-3).unwrap() {
                let full = kernel_series_ab(&d, p.a, p.b, &opts, None).unwrap().value;
                let mut parts = Complex64::zero();
                for j in 0..e.m() {
                    let sj = kernel_series_ab(&d, p.a, p.b, &opts, Some(j)).unwrap().value;
                    let cj = k.eval_residue(j, p.a, p.b).unwrap();
                    assert!((sj - cj).norm() < 1e-9 * full.norm());
                    parts += sj;
                }
                assert!((parts - full).norm() < 1e-12 * full.norm());
            }
        }
    }

    fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Complex64>> {
        let mut cols: Vec<Vec<Complex64>> = Vec::new();
        while cols.len() < n {
            let mut v: Vec<Complex64> = (0..n)
                .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            for q in &cols {
                let dot: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= dot * y);
            }
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-3 {
                v.iter_mut().for_each(|x| *x /= norm);
                cols.push(v);
            }
        }
        cols
    }

    #[test]
    fn unitary_invariance() {
        let d = DomainSpec::from_ml(3, 2, 3).unwrap();
        let opts = KernelEvalOptions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for p in sample_pairs(&d, 10, 2, 0.8, 0.05, 1e-3).unwrap() {
            let u = random_unitary(3, &mut rng);
            let apply = |pt: &Point| {
                let z: Vec<Complex64> = (0..3).map(|i| (0..3).map(|k| u[k][i] * pt.z[k]).sum()).collect();
                Point::new(&z, pt.w)
            };
            let before = kernel_series(&d, &p.x, &p.y, &opts, None).unwrap();
            let after = kernel_series(&d, &apply(&p.x), &apply(&p.y), &opts, None).unwrap();
            assert!((before - after).norm() < 1e-10 * before.norm());
        }
    }

    #[test]
    fn hermitian_symmetry_all_paths() {
        let opts = KernelEvalOptions::default();
        let d = DomainSpec::parse("sqrt2", 1).unwrap();
        for p in sample_pairs(&d, 20, 3, 0.8, 0.05, 1e-3).unwrap() {
            let xy = kernel_series(&d, &p.x, &p.y, &opts, None).unwrap();
            let yx = kernel_series(&d, &p.y, &p.x, &opts, None).unwrap();
            assert!((xy - yx.conj()).norm() < 1e-10 * xy.norm());
        }
        let e = exp(3, 2);
        let d = DomainSpec::rational(e, 1).unwrap();
        let k = ClosedKernel::new(&e, 1).unwrap();
        for p in sample_pairs(&d, 20, 3, 0.8, 0.05, 1e-3).unwrap() {
            let xy = k.eval(&p.x, &p.y).unwrap();
            let yx = k.eval(&p.y, &p.x).unwrap();
            assert!((xy - yx.conj()).norm() < 1e-12 * xy.norm());
        }
    }

    #[test]
    fn irrational_series_near_integer_boundary() {
        // with gamma = sqrt2, (alpha1 + n)/gamma is never an integer; the
        // enclosure path must agree with the floating start
        let d = DomainSpec::parse("sqrt2", 1).unwrap();
        for a in 0..200 {
            let (b0, shift) = beta_start(&d, a).unwrap();
            assert!(shift > 0.0 && shift <= 1.0);
            assert!(in_lambda_with_band(&d, LatticeIndex::new(a, b0), 0.0).unwrap());
            assert!(!in_lambda_with_band(&d, LatticeIndex::new(a, b0 - 1), 0.0).unwrap());
        }
    }

    #[test]
    fn diagonal_is_positive() {
        for (m, l, n) in [(1, 1, 1), (3, 2, 1), (2, 1, 2)] {
            let d = DomainSpec::from_ml(m, l, n).unwrap();
            let k = ClosedKernel::new(d.exponent().unwrap(), n).unwrap();
            for i in 0..1000 {
                let x = sample_at(&d, 8, i);
                let v = k.eval(&x, &x).unwrap();
                assert!(v.re > 0.0 && v.im.abs() < 1e-10 * v.re);
            }
        }
    }

    #[test]
    fn bound_examples() {
        let e = exp(1, 1);
        let v = kernel_bound(&e, 1, c(0.0, 0.0), c(0.5, 0.0), None).unwrap();
        assert!((v - 8.0).abs() < 1e-13);
        for (m, l, n) in [(3, 2, 1), (5, 3, 2), (7, 5, 1), (2, 9, 3)] {
            let e = exp(m, l);
            let (mf, lf, nf) = (m as f64, l as f64, n as f64);
            let full = (nf + 1.0) * lf - 1.0 - (nf * lf - 1.0) / mf;
            for j in 0..e.m() {
                let ej = floor_ej(&e, n, j).unwrap() as f64;
                assert!(lf * j as f64 / mf + (nf + 1.0) * lf - ej - 1.0 >= full - 1e-12);
            }
        }
    }

    #[test]
    fn classical_bound_ratio_is_constant() {
        let e = exp(1, 1);
        let k = ClosedKernel::new(&e, 1).unwrap();
        let d = DomainSpec::rational(e, 1).unwrap();
        for p in sample_pairs(&d, 100, 1, 1.0, 0.0, 0.0).unwrap() {
            let r = k.eval_ab(p.a, p.b).unwrap().norm() / kernel_bound(&e, 1, p.a, p.b, None).unwrap();
            assert!((r - 1.0 / (PI * PI)).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_is_reported() {
        let d = DomainSpec::from_ml(1, 1, 1).unwrap();
        let opts = KernelEvalOptions {
            max_alpha_terms: 5,
            ..Default::default()
        };
        let err = kernel_series_ab(&d, c(0.4, 0.0), c(0.5, 0.0), &opts, None).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
        let err = kernel_series_ab(&d, c(0.0, 0.0), c(0.9999, 0.0), &KernelEvalOptions::default(), None)
            .unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
    }

    #[test]
    fn batch_csv_round_trip() {
        let e = exp(1, 1);
        let input = "re_z1,im_z1,re_w,im_w,re_s1,im_s1,re_t,im_t\n0,0,0.5,0,0,0,1,0\n0.1,0,0.5,0,0.2,0.1,0.6,0.1\n";
        let mut out = Vec::new();
        assert_eq!(batch_csv(&e, 1, input.as_bytes(), &mut out).unwrap(), 2);
        let text = String::from_utf8(out).unwrap();
        let first = text.lines().nth(1).unwrap();
        let cols: Vec<f64> = first.split(',').map(|s| s.parse().unwrap()).collect();
        assert!((cols[4] - 8.0 / (PI * PI)).abs() < 1e-14);
        assert!((cols[6] - 8.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn closed_matches_classical(r in 0.05f64..0.95, t in 0.0f64..std::f64::consts::TAU, s in 0.0f64..0.9, u in 0.0f64..std::f64::consts::TAU) {
            let b = Complex64::from_polar(r, t);
            let a = Complex64::from_polar(s * r, u);
            let k = ClosedKernel::new(&exp(1, 1), 1).unwrap();
            let want = classical(a, b);
            prop_assert!((k.eval_ab(a, b).unwrap() - want).norm() <= 1e-12 * want.norm());
        }
    }
}

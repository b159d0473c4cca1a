//! Sharp `L^p` ranges, the Schur-test window and its numerical checks,
//! counterexamples with divergence certificates, and the approximation
//! pipeline for irrational exponents.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Open01, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{volume, DomainSpec, Gamma, Point};
use crate::kernel::kernel_bound;
use crate::lattice::{critical_j0, in_lambda, make_exponent, solve_min_eta, LatticeIndex, RationalExponent};
use crate::monomial::{lp_prefactor, monomial_lp, monomial_lp_exact, LpKind};
use crate::precise::{Enclosure, DEFAULT_BAND};
use crate::projection::project_antiholo_monomial;
use crate::quadrature::{gauss_legendre_on, tanh_sinh, Neumaier};
use crate::report::{decimal_string, ratio_string, ser_rational};
use crate::special::ln_gamma;

fn rat(a: i128, b: i128) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn int(a: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(a))
}

fn parts(exp: &RationalExponent, n: u32) -> (i128, i128, i128) {
    (exp.m() as i128, exp.l() as i128, n as i128)
}

/// An open interval of exponents `p` with exact endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PInterval {
    #[serde(rename = "lo", serialize_with = "ser_rational")]
    pub lower: BigRational,
    #[serde(rename = "hi", serialize_with = "ser_rational")]
    pub upper: BigRational,
}

impl PInterval {
    pub fn contains(&self, p: &BigRational) -> bool {
        &self.lower < p && p < &self.upper
    }

    /// `1/lower + 1/upper = 1`.
    pub fn is_self_dual(&self) -> bool {
        self.lower.recip() + self.upper.recip() == BigRational::one()
    }
}

impl std::fmt::Display for PInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", ratio_string(&self.lower), ratio_string(&self.upper))
    }
}

/// `((2m + 2nl) / (m + nl + 1), (2m + 2nl) / (m + nl - 1))`.
pub fn sharp_range(exp: &RationalExponent, n: u32) -> PInterval {
    let (m, l, n) = parts(exp, n);
    let top = 2 * m + 2 * n * l;
    PInterval {
        lower: rat(top, m + n * l + 1),
        upper: rat(top, m + n * l - 1),
    }
}

/// The kernel exponent `A = (n+1) l - 1 - (nl - 1)/m` of the global bound.
pub fn corollary_a(exp: &RationalExponent, n: u32) -> BigRational {
    let (m, l, n) = parts(exp, n);
    int((n + 1) * l - 1) - rat(n * l - 1, m)
}

/// Kernel exponent and the admissible window `[eps_lo, eps_hi)` for the
/// auxiliary function `h^-eps`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchurParams {
    #[serde(rename = "A", serialize_with = "ser_rational")]
    pub a: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub eps_lo: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub eps_hi: BigRational,
}

/// `p`-interval produced by the Schur test with kernel exponent `a`.
pub fn schur_p_interval(exp: &RationalExponent, n: u32, a: &BigRational) -> Result<(PInterval, SchurParams)> {
    let (m, l, ni) = parts(exp, n);
    let top = int(2 * ni * l + 2 * m);
    let mm = int(m);
    let lower_den = a * &mm + int(2 * ni * l + 2 * m - (ni + 1) * l * m);
    let upper_den = int((ni + 1) * l * m) - a * &mm;
    if !lower_den.is_positive() || !upper_den.is_positive() || lower_den <= upper_den {
        return Err(Error::EmptySchurWindow(format!(
            "A = {} gives denominators {} and {}",
            ratio_string(a),
            ratio_string(&lower_den),
            ratio_string(&upper_den)
        )));
    }
    let two_l = int(2 * l);
    let half_n1 = rat(ni + 1, 2);
    let params = SchurParams {
        a: a.clone(),
        eps_lo: &half_n1 - a / &two_l,
        eps_hi: rat(ni, m) + rat(1, l) + a / &two_l - &half_n1,
    };
    debug_assert!(params.eps_lo < params.eps_hi);
    Ok((
        PInterval {
            lower: &top / lower_den,
            upper: top / upper_den,
        },
        params,
    ))
}

/// `((a + b) / b, (a + b) / a)`: the exponents for which the Schur test with
/// `h^-eps`, `eps` in `[a, b)`, yields boundedness.
pub fn schur_lemma_interval(a: &BigRational, b: &BigRational) -> Result<PInterval> {
    if !a.is_positive() || !b.is_positive() {
        return Err(Error::EmptySchurWindow(format!(
            "Schur exponents {} and {} must be positive",
            ratio_string(a),
            ratio_string(b)
        )));
    }
    let s = a + b;
    Ok(PInterval {
        lower: &s / b,
        upper: s / a,
    })
}

/// `h(z, w) = (|w|^(2l) - |z|^(2m)) (1 - |w|^2)`.
pub fn auxiliary_h(exp: &RationalExponent, p: &Point) -> Result<f64> {
    let w2 = p.w.norm_sqr();
    let z2 = p.z.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let h = (w2.powi(exp.l() as i32) - z2.powi(exp.m() as i32)) * (1.0 - w2);
    if h > 0.0 && h.is_finite() {
        Ok(h)
    } else {
        Err(Error::Domain(format!(
            "auxiliary function is {h} at |z| = {}, |w| = {}; point not interior",
            z2.sqrt(),
            w2.sqrt()
        )))
    }
}

/// Where a Schur probe sequence approaches the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeFamily {
    /// `|w| -> 0` along `|z| = |w|^(l/m) / 2`.
    Origin,
    /// `|w| -> 1` along `|z| = |w|^(l/m) / 2`.
    Outer,
    /// `|w| = 1/2` with `|z|^m -> |w|^l`.
    Cone,
}

const PROBE_FAMILIES: [ProbeFamily; 3] = [ProbeFamily::Origin, ProbeFamily::Outer, ProbeFamily::Cone];
const PROBE_T_MAX: f64 = 0.5;
const PROBE_T_MIN: f64 = 1e-4;

/// `count` probes split over the three families, each family geometric in
/// its boundary parameter from `0.5` down to `1e-4`.
pub fn schur_probes(exp: &RationalExponent, n: u32, count: usize) -> Vec<(ProbeFamily, Point)> {
    let (m, l) = (exp.m() as f64, exp.l() as f64);
    let nz = n as usize;
    let mut out = Vec::with_capacity(count);
    for (fi, family) in PROBE_FAMILIES.iter().enumerate() {
        let k = count / 3 + usize::from(fi < count % 3);
        for i in 0..k {
            let s = if k > 1 { i as f64 / (k - 1) as f64 } else { 0.0 };
            let t = PROBE_T_MAX * (PROBE_T_MIN / PROBE_T_MAX).powf(s);
            let (zr, wr) = match family {
                ProbeFamily::Origin => (0.5 * t.powf(l / m), t),
                ProbeFamily::Outer => {
                    let w = 1.0 - t;
                    (0.5 * w.powf(l / m), w)
                }
                ProbeFamily::Cone => {
                    let w: f64 = 0.5;
                    ((w.powf(l) * (1.0 - t)).powf(1.0 / m), w)
                }
            };
            let mut z = vec![Complex64::new(0.0, 0.0); nz];
            z[0] = Complex64::new(zr, 0.0);
            out.push((*family, Point::new(&z, Complex64::new(wr, 0.0))));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchurProbe {
    pub family: ProbeFamily,
    pub abs_z: f64,
    pub abs_w: f64,
    pub h: f64,
    /// `h(x)^eps` times the importance-sampled estimate of `int bound(x, y) h(y)^-eps dV(y)`.
    pub ratio: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyGrowth {
    pub family: ProbeFamily,
    /// Ratio at the smallest-`h` probe over the ratio at the median-`h` probe.
    pub growth: f64,
    /// Whether the ratio is non-decreasing from the median-`h` probe on.
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchurReport {
    pub epsilon: f64,
    pub params: SchurParams,
    pub in_window: bool,
    /// `eps < 1`; otherwise `h^-eps` has infinite integral over the domain.
    pub locally_integrable: bool,
    pub warnings: Vec<String>,
    pub samples: usize,
    pub max: f64,
    pub median: f64,
    /// Maximum with both samples and probes doubled.
    pub max_doubled: f64,
    pub refinement_drift: f64,
    pub growth: Vec<FamilyGrowth>,
    pub probes: Vec<SchurProbe>,
}

/// Importance-sampling controls: each warped coordinate is drawn from an even
/// mixture of its uniform law and a law concentrated at the boundary.
const WARP_POWER: f64 = 8.0;
const WARP_ANGLE_MIN: f64 = 1e-6;

/// `(u, 1 - u, density)` for a point of `(0, 1)` drawn from the mixture of the
/// uniform law and `1 - (1 - U)^WARP_POWER`.
fn warped_unit<R: Rng>(rng: &mut R) -> (f64, f64, f64) {
    let u: f64 = rng.sample(Open01);
    let comp = if rng.random_bool(0.5) { (1.0 - u).powf(WARP_POWER) } else { 1.0 - u };
    let q = comp.powf(1.0 / WARP_POWER - 1.0) / WARP_POWER;
    (1.0 - comp, comp, 0.5 + 0.5 * q)
}

/// Density, relative to uniform, of the angle law drawn by [`warped_angle`].
fn angle_density(theta: f64) -> f64 {
    let span = (std::f64::consts::PI / WARP_ANGLE_MIN).ln();
    let log_part = if theta.abs() >= WARP_ANGLE_MIN {
        std::f64::consts::PI / (theta.abs() * span)
    } else {
        0.0
    };
    0.5 + 0.5 * log_part
}

/// An angle in `(-pi, pi)` from the mixture of the uniform law and a
/// log-uniform law in `|theta|`.
fn warped_angle<R: Rng>(rng: &mut R) -> f64 {
    let pi = std::f64::consts::PI;
    let span = (pi / WARP_ANGLE_MIN).ln();
    let u: f64 = rng.sample(Open01);
    if rng.random_bool(0.5) {
        pi * (2.0 * u - 1.0)
    } else {
        let mag = WARP_ANGLE_MIN * (u * span).exp();
        if rng.random_bool(0.5) {
            mag
        } else {
            -mag
        }
    }
}

fn wrap_angle(x: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    x - tau * ((x + std::f64::consts::PI) / tau).floor()
}

/// A weighted domain sample: `(y, h(y)^-eps / proposal density)`, with the
/// proposal concentrated near `|w| = 1`, the cone, `arg w = 0` and
/// `m arg s_1 = l arg w`, where the kernel bound peaks for probes on the
/// positive real axes. `h` is formed from complements so it stays accurate at the boundary.
fn schur_sample(exp: &RationalExponent, n: u32, eps: f64, seed: u64, index: u64) -> (Point, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let (m, l, nf) = (exp.m() as f64, exp.l() as f64, n as f64);
    let gamma = m / l;
    let c = 2.0 * nf / gamma + 2.0;
    let (_, d1, p1) = warped_unit(&mut rng);
    let (_, d2, p2) = warped_unit(&mut rng);
    let theta = warped_angle(&mut rng);
    let p3 = angle_density(theta);
    let branch = rng.random_range(0..exp.m()) as f64;
    let psi = wrap_angle((l * theta + std::f64::consts::TAU * branch) / m + warped_angle(&mut rng));
    // psi is reachable from every branch
    let p4 = (0..exp.m())
        .map(|k| angle_density(wrap_angle(psi - (l * theta + std::f64::consts::TAU * k as f64) / m)))
        .sum::<f64>()
        / m;

    let ln_rho = (-d1).ln_1p() / c;
    let rho = ln_rho.exp();
    let one_minus_rho = -ln_rho.exp_m1();
    let ln_v = (-d2).ln_1p();
    let cone = -(ln_v * m / nf).exp_m1();
    let h = rho.powf(2.0 * l) * cone * one_minus_rho * (1.0 + rho);

    let mut dir: Vec<f64> = (0..2 * n).map(|_| rng.sample(StandardNormal)).collect();
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    dir.iter_mut().for_each(|x| *x /= norm);
    let r = rho.powf(1.0 / gamma) * (ln_v / (2.0 * nf)).exp();
    let mut z: Vec<Complex64> = (0..n as usize)
        .map(|k| Complex64::new(r * dir[2 * k], r * dir[2 * k + 1]))
        .collect();
    z[0] = Complex64::from_polar(z[0].norm(), psi);
    let y = Point::new(&z, Complex64::from_polar(rho, theta));
    (y, h.powf(-eps) / (p1 * p2 * p3 * p4))
}

fn schur_ratios(
    exp: &RationalExponent,
    n: u32,
    eps: f64,
    samples: &[Point],
    weights: &[f64],
    probes: &[(ProbeFamily, Point)],
    vol: f64,
) -> Result<Vec<SchurProbe>> {
    probes
        .par_iter()
        .map(|(family, x)| {
            let hx = auxiliary_h(exp, x)?;
            let mut sum = Neumaier::default();
            let mut sum_sq = Neumaier::default();
            for (y, wy) in samples.iter().zip(weights) {
                let v = kernel_bound(exp, n, x.pair_z(y), x.pair_w(y), None)? * wy;
                sum.add(v);
                sum_sq.add(v * v);
            }
            let count = samples.len() as f64;
            let mean = sum.value() / count;
            let var = (sum_sq.value() / count - mean * mean).max(0.0) * count / (count - 1.0).max(1.0);
            let scale = vol * hx.powf(eps);
            Ok(SchurProbe {
                family: *family,
                abs_z: x.z_norm(),
                abs_w: x.w.norm(),
                h: hx,
                ratio: scale * mean,
                std_error: scale * (var / count).sqrt(),
            })
        })
        .collect()
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

fn family_growth(probes: &[SchurProbe]) -> Vec<FamilyGrowth> {
    PROBE_FAMILIES
        .iter()
        .filter_map(|family| {
            let mut seq: Vec<&SchurProbe> = probes.iter().filter(|p| p.family == *family).collect();
            if seq.len() < 2 {
                return None;
            }
            seq.sort_by(|a, b| b.h.total_cmp(&a.h));
            let tail = &seq[seq.len() / 2..];
            Some(FamilyGrowth {
                family: *family,
                growth: tail[tail.len() - 1].ratio / tail[0].ratio,
                monotone: tail.windows(2).all(|w| w[1].ratio >= w[0].ratio),
            })
        })
        .collect()
}

/// Monte Carlo check of `int bound(x, y) h(y)^-eps dV(y) <~ h(x)^-eps` at
/// boundary-stratified probes, repeated with samples and probes doubled.
pub fn verify_schur(
    exp: &RationalExponent,
    n: u32,
    epsilon: f64,
    mc_samples: usize,
    probe_points: usize,
    seed: u64,
) -> Result<SchurReport> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon = {epsilon} must be positive")));
    }
    if mc_samples < 2 || probe_points < 3 {
        return Err(Error::Domain("need at least 2 samples and 3 probes".into()));
    }
    let (_, params) = schur_p_interval(exp, n, &corollary_a(exp, n))?;
    let eps_q = BigRational::from_float(epsilon).ok_or_else(|| Error::Domain("bad epsilon".into()))?;
    let in_window = params.eps_lo <= eps_q && eps_q < params.eps_hi;
    let locally_integrable = epsilon < 1.0;
    let mut warnings = Vec::new();
    if !in_window {
        warnings.push(format!(
            "epsilon {epsilon} outside the window [{}, {})",
            ratio_string(&params.eps_lo),
            ratio_string(&params.eps_hi)
        ));
    }
    if !locally_integrable {
        warnings.push(format!(
            "h^-{epsilon} is not integrable near the boundary; the integrals are infinite"
        ));
    }
    let domain = DomainSpec::rational(*exp, n)?;
    let vol = volume(&domain);
    let (samples, weights): (Vec<Point>, Vec<f64>) = (0..2 * mc_samples as u64)
        .into_par_iter()
        .map(|i| schur_sample(exp, n, epsilon, seed, i))
        .unzip();

    let probes = schur_probes(exp, n, probe_points);
    let base = schur_ratios(exp, n, epsilon, &samples[..mc_samples], &weights[..mc_samples], &probes, vol)?;
    let doubled_probes = schur_probes(exp, n, 2 * probe_points);
    let doubled = schur_ratios(exp, n, epsilon, &samples, &weights, &doubled_probes, vol)?;

    let max = base.iter().map(|p| p.ratio).fold(f64::NEG_INFINITY, f64::max);
    let max_doubled = doubled.iter().map(|p| p.ratio).fold(f64::NEG_INFINITY, f64::max);
    let mut ratios: Vec<f64> = base.iter().map(|p| p.ratio).collect();
    Ok(SchurReport {
        epsilon,
        params,
        in_window,
        locally_integrable,
        warnings,
        samples: mc_samples,
        max,
        median: median(&mut ratios),
        max_doubled,
        refinement_drift: (max_doubled - max).abs() / max,
        growth: family_growth(&base),
        probes: base,
    })
}

/// Parameters of the two auxiliary integral estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AuxiliaryKind {
    /// `int_D (1 - |w|^2)^-eps |w|^-beta / |1 - z conj(w)|^2 dV(w)` at each `|z|`.
    Disk { epsilon: f64, beta: f64, points: Vec<f64> },
    /// `int_{D_n} (1 - |eta|^(2k))^-eps / |1 - (eta . conj(Delta))^k|^(n+1) dV(eta)` at each `|Delta|`.
    Ball { n: u32, k: u32, epsilon: f64, points: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuxiliaryRow {
    pub abs_point: f64,
    pub integral: f64,
    /// `(1 - |z|^2)^-eps` or `(1 - |Delta|^(2k))^-eps`.
    pub reference: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuxiliaryReport {
    pub params: AuxiliaryKind,
    pub rows: Vec<AuxiliaryRow>,
    pub ratio_min: f64,
    pub ratio_max: f64,
}

const AUX_TOL: f64 = 1e-12;

/// `int_0^1 f(r, 1 - r) dr`, split geometrically towards `r = 1` so that a
/// peak of width `width` there is resolved.
fn radial_integral<F: Fn(f64, f64) -> f64>(f: F, width: f64) -> f64 {
    let mut cuts = vec![0.0];
    if width < 0.25 {
        let mut d = 0.5;
        while d > width {
            cuts.push(1.0 - d);
            d *= 0.5;
        }
        cuts.push(1.0 - width);
    }
    cuts.push(1.0);
    let last = cuts.len() - 2;
    let mut total = Neumaier::default();
    for (i, seg) in cuts.windows(2).enumerate() {
        let (v, _) = tanh_sinh(
            |r, _, db| f(r, if i == last { db } else { 1.0 - r }),
            seg[0],
            seg[1],
            AUX_TOL,
        );
        total.add(v);
    }
    total.value()
}

/// `1 - r^(2k)` without cancellation near `r = 1`.
fn one_minus_power(r: f64, one_minus_r: f64, k: f64) -> f64 {
    if one_minus_r < 0.5 {
        -(k * (-one_minus_r).ln_1p()).exp_m1()
    } else {
        1.0 - r.powf(k)
    }
}

/// `sum_j ((s)_j / j!)^2 c^(2j)`: the circle average of `|1 - c e^(i theta)|^(-2s)`.
fn circle_average(s: f64, c: f64) -> Result<f64> {
    let c2 = c * c;
    if c2 >= 1.0 {
        return Err(Error::Domain(format!("circle average needs |c| < 1, got {c}")));
    }
    let mut sum = Neumaier::default();
    let mut term = 1.0;
    for j in 0..1_000_000u32 {
        sum.add(term);
        let jf = j as f64;
        let ratio = (s + jf) / (jf + 1.0);
        term *= ratio * ratio * c2;
        if term < 1e-17 * sum.value() && ratio * ratio * c2 < 0.99 {
            return Ok(sum.value());
        }
    }
    Err(Error::Truncation {
        terms: 1_000_000,
        tail_bound: term,
        abs_u: c,
    })
}

fn disk_integral(epsilon: f64, beta: f64, z: f64) -> f64 {
    let d = 1.0 - z;
    2.0 * std::f64::consts::PI
        * radial_integral(
            |r, omr| {
                let pole = (d + z * omr) * (1.0 + z * r);
                r.powf(1.0 - beta) * (omr * (1.0 + r)).powf(-epsilon) / pole
            },
            d,
        )
}

fn ball_integral(n: u32, k: u32, epsilon: f64, delta: f64) -> Result<f64> {
    let kf = k as f64;
    let two_k = 2.0 * kf;
    let width = (1.0 - delta).max(1e-300);
    if n == 1 {
        let v = radial_integral(
            |r, omr| r * one_minus_power(r, omr, two_k).powf(-epsilon) / (1.0 - (r * delta).powf(two_k)),
            width,
        );
        return Ok(2.0 * std::f64::consts::PI * v);
    }
    let nf = n as f64;
    let s = (nf + 1.0) / 2.0;
    let (phi, phi_w) = gauss_legendre_on(48, 0.0, std::f64::consts::FRAC_PI_2);
    let failure = std::sync::Mutex::new(None);
    let v = radial_integral(
        |r, omr| {
            let mut inner = 0.0;
            for (p, wp) in phi.iter().zip(&phi_w) {
                let c = (r * delta * p.cos()).powf(kf);
                let g = circle_average(s, c).unwrap_or_else(|e| {
                    *failure.lock().unwrap() = Some(e);
                    f64::NAN
                });
                inner += wp * p.cos() * p.sin().powi(2 * n as i32 - 3) * g;
            }
            r.powi(2 * n as i32 - 1) * one_minus_power(r, omr, two_k).powf(-epsilon) * inner
        },
        width,
    );
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    // area of the unit sphere in R^(2n-2)
    let area = 2.0 * (std::f64::consts::PI.ln() * (nf - 1.0) - ln_gamma(nf - 1.0)).exp();
    Ok(2.0 * std::f64::consts::PI * area * v)
}

/// Quadrature evaluation of the disk and ball auxiliary integrals and their
/// ratios to the predicted growth.
pub fn verify_auxiliary_integrals(kind: &AuxiliaryKind) -> Result<AuxiliaryReport> {
    let (epsilon, points) = match kind {
        AuxiliaryKind::Disk { epsilon, points, .. } | AuxiliaryKind::Ball { epsilon, points, .. } => {
            (*epsilon, points)
        }
    };
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon = {epsilon} outside (0, 1)")));
    }
    if points.is_empty() || points.iter().any(|x| !(*x >= 0.0 && *x < 1.0)) {
        return Err(Error::Domain("evaluation points need 0 <= |x| < 1".into()));
    }
    let mut rows = Vec::with_capacity(points.len());
    for &x in points {
        let (integral, reference) = match kind {
            AuxiliaryKind::Disk { beta, .. } => {
                if !(*beta < 2.0) {
                    return Err(Error::Domain(format!("beta = {beta} must be below 2")));
                }
                (disk_integral(epsilon, *beta, x), (1.0 - x * x).powf(-epsilon))
            }
            AuxiliaryKind::Ball { n, k, .. } => {
                if *n == 0 || *k == 0 {
                    return Err(Error::Domain("ball integral needs n >= 1 and k >= 1".into()));
                }
                (
                    ball_integral(*n, *k, epsilon, x)?,
                    (1.0 - x.powi(2 * *k as i32)).powf(-epsilon),
                )
            }
        };
        rows.push(AuxiliaryRow {
            abs_point: x,
            integral,
            reference,
            ratio: integral / reference,
        });
    }
    let ratio_min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let ratio_max = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(AuxiliaryReport {
        params: kind.clone(),
        rows,
        ratio_min,
        ratio_max,
    })
}

/// A bounded function whose projection has infinite `L^p` norm from
/// `threshold` on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub j0: u64,
    /// Exponents `(j0, ell)` of the image monomial `z_1^j0 w^ell`, `ell < 0`.
    pub eta: (u64, i64),
    #[serde(serialize_with = "ser_rational")]
    pub threshold: BigRational,
    pub f_description: String,
    /// `P f = C z_1^j0 w^ell`.
    #[serde(serialize_with = "ser_rational")]
    pub projection_constant: BigRational,
    /// Divergent at the threshold and finite just below it.
    pub certificate: ThresholdCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdCertificate {
    pub divergent_at_threshold: bool,
    #[serde(serialize_with = "ser_rational")]
    pub below: BigRational,
    pub finite_below: bool,
    pub matches_sharp_upper: bool,
}

/// `f = z_1^j0 conj(w)^-ell` for the critical residue `j0`.
pub fn counterexample(exp: &RationalExponent, n: u32) -> Result<Counterexample> {
    let crit = critical_j0(exp, n)?;
    let j0 = crit.data.j;
    let ell = crit.ell;
    if ell >= 0 {
        return Err(Error::Internal(format!("ell(j0) = {ell} is not negative")));
    }
    let domain = DomainSpec::rational(*exp, n)?;
    let threshold = crit.data.threshold_p.clone();
    let proj = project_antiholo_monomial(&domain, j0, -ell, None)?;
    let constant = proj
        .constant_exact
        .ok_or_else(|| Error::Internal("rational exponent without exact constant".into()))?;
    if constant.is_zero() {
        return Err(Error::Internal("projection constant vanishes".into()));
    }
    let below = &threshold - rat(1, 1_000_000);
    let at = monomial_lp_exact(&domain, j0, ell, &threshold)?;
    let under = monomial_lp_exact(&domain, j0, ell, &below)?;
    let z_part = if j0 == 0 { String::new() } else { format!("z_1^{j0} ") };
    Ok(Counterexample {
        j0,
        eta: (j0, ell),
        f_description: format!("{z_part}conj(w)^{}", -ell),
        certificate: ThresholdCertificate {
            divergent_at_threshold: at.kind == LpKind::Divergent,
            below,
            finite_below: under.kind == LpKind::Finite,
            matches_sharp_upper: threshold == sharp_range(exp, n).upper,
        },
        threshold,
        projection_constant: constant,
    })
}

/// Truncated `L^p` integrals of `z_1^eta1 w^eta2` over `{ |w| > delta }`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceCertificate {
    pub verdict: LpKind,
    /// Radial exponent `e`: the truncated integral is `c int_delta^1 rho^e drho`.
    pub exponent: f64,
    pub cutoffs: Vec<f64>,
    pub truncated: Vec<f64>,
    /// Closed-form values of the same truncated integrals.
    pub truncated_exact: Vec<f64>,
    /// Ratios of successive increments, numerical and predicted.
    pub increment_ratios: Vec<f64>,
    pub predicted_ratios: Vec<f64>,
    pub max_rate_deviation: f64,
    /// Last over first truncated value.
    pub growth_factor: f64,
    /// `|T(delta_last) - T(delta_prev)|`.
    pub cauchy_tail: f64,
    /// Full norm `||f||_p^p` when finite.
    pub limit: Option<f64>,
}

/// `int_a^b rho^e drho`.
fn power_integral(e: f64, a: f64, b: f64) -> f64 {
    if (e + 1.0).abs() < 1e-14 {
        (b / a).ln()
    } else {
        (b.powf(e + 1.0) - a.powf(e + 1.0)) / (e + 1.0)
    }
}

/// `int_a^b rho^e drho` by Gauss-Legendre in `s = -ln rho`.
fn power_integral_numeric(e: f64, a: f64, b: f64) -> f64 {
    let (s_lo, s_hi) = (-b.ln(), -a.ln());
    let pieces = ((s_hi - s_lo).ceil() as usize).max(1);
    let step = (s_hi - s_lo) / pieces as f64;
    let mut sum = Neumaier::default();
    for i in 0..pieces {
        let (x, w) = gauss_legendre_on(24, s_lo + i as f64 * step, s_lo + (i + 1) as f64 * step);
        for (s, wi) in x.iter().zip(&w) {
            sum.add(wi * (-(e + 1.0) * s).exp());
        }
    }
    sum.value()
}

pub fn divergence_certificate(
    domain: &DomainSpec,
    eta1: u64,
    eta2: i64,
    p: f64,
    cutoffs: &[f64],
) -> Result<DivergenceCertificate> {
    if eta2 >= 0 {
        return Err(Error::Domain(format!("eta2 = {eta2} must be negative")));
    }
    if cutoffs.len() < 3 {
        return Err(Error::Domain("need at least three cutoffs".into()));
    }
    if cutoffs.iter().any(|d| !(*d > 0.0 && *d < 1.0)) || cutoffs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("cutoffs must decrease inside (0, 1)".into()));
    }
    let lp = monomial_lp(domain, eta1, eta2, p)?;
    let e = lp.exponent;
    let c = lp_prefactor(domain.n(), eta1, p)?;
    let mut truncated = Vec::with_capacity(cutoffs.len());
    let mut truncated_exact = Vec::with_capacity(cutoffs.len());
    let mut increments = Vec::new();
    let mut increments_exact = Vec::new();
    let mut acc = Neumaier::default();
    let mut prev = 1.0;
    for &d in cutoffs {
        let inc = c * power_integral_numeric(e, d, prev);
        acc.add(inc);
        truncated.push(acc.value());
        truncated_exact.push(c * power_integral(e, d, 1.0));
        if prev < 1.0 {
            increments.push(inc);
            increments_exact.push(c * power_integral(e, d, prev));
        }
        prev = d;
    }
    let increment_ratios: Vec<f64> = increments.windows(2).map(|w| w[1] / w[0]).collect();
    let predicted_ratios: Vec<f64> = increments_exact.windows(2).map(|w| w[1] / w[0]).collect();
    let max_rate_deviation = increment_ratios
        .iter()
        .zip(&predicted_ratios)
        .map(|(a, b)| (a / b - 1.0).abs())
        .fold(0.0, f64::max);
    let k = truncated.len();
    Ok(DivergenceCertificate {
        verdict: lp.kind,
        exponent: e,
        cutoffs: cutoffs.to_vec(),
        growth_factor: truncated[k - 1] / truncated[0],
        cauchy_tail: (truncated[k - 1] - truncated[k - 2]).abs(),
        truncated,
        truncated_exact,
        increment_ratios,
        predicted_ratios,
        max_rate_deviation,
        limit: lp.value,
    })
}

/// A convergent `m_k / l_k` of `gamma`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Approximant {
    pub m_k: u64,
    pub l_k: u64,
    /// `|l_k / m_k - 1 / gamma|`.
    pub gap: f64,
    /// Upper end of the gap enclosure, 30 significant digits.
    pub gap_digits: String,
    /// `gap < 1 / (2 n m_k^2)`, decided on the enclosure.
    pub satisfies_dirichlet: bool,
    #[serde(skip)]
    gap_enclosure: Enclosure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproximantList {
    pub approximants: Vec<Approximant>,
    /// The expansion stopped because the enclosure could not decide the next
    /// partial quotient.
    pub precision_exhausted: bool,
}

fn gamma_enclosure(gamma: &Gamma) -> Result<Enclosure> {
    match gamma {
        Gamma::Rational(e) => Err(Error::RationalGamma { m: e.m(), l: e.l() }),
        Gamma::Real(r) => Ok(r.enclosure().clone()),
    }
}

fn big_u64(x: &BigInt) -> Option<u64> {
    x.to_u64()
}

/// Continued-fraction convergents `m_k / l_k` of `gamma` with `m_k <= max_m`.
pub fn approximants(gamma: &Gamma, n: u32, max_m: u64) -> Result<ApproximantList> {
    if n == 0 {
        return Err(Error::Domain("dimension n must be >= 1".into()));
    }
    if max_m < 2 {
        return Err(Error::Domain("max_m must be >= 2".into()));
    }
    let g = gamma_enclosure(gamma)?;
    let inv_g = g.recip().ok_or_else(|| Error::Domain("gamma enclosure touches zero".into()))?;
    let bits = g.bits();
    let mut x = g.clone();
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut out = Vec::new();
    let mut exhausted = false;
    loop {
        let Some(a) = x.floor() else {
            // the tail may be exactly the integer floor(hi), ending the expansion
            let a = x.hi().floor().to_integer();
            let (h, k) = (&a * &h1 + &h0, &a * &k1 + &k0);
            if g.contains(&BigRational::new(h.clone(), k.clone())) {
                return Err(Error::RationalGamma {
                    m: big_u64(&h).unwrap_or(0),
                    l: big_u64(&k).unwrap_or(0),
                });
            }
            exhausted = true;
            break;
        };
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        (h0, h1) = (h1, h2);
        (k0, k1) = (k1, k2);
        let Some(m) = big_u64(&h1) else { break };
        if m > max_m {
            break;
        }
        let l = big_u64(&k1).ok_or_else(|| Error::Internal("convergent overflow".into()))?;
        if m > 0 {
            let frac = rat(l as i128, m as i128);
            let gap = inv_g.neg().add_rational(&frac).abs();
            let bound = rat(1, 2 * n as i128 * m as i128 * m as i128);
            let satisfies = gap.cmp_rational(&bound, 0.0) == Some(Ordering::Less);
            out.push(Approximant {
                m_k: m,
                l_k: l,
                gap: gap.to_f64(),
                gap_digits: decimal_string(gap.hi(), 30),
                satisfies_dirichlet: satisfies,
                gap_enclosure: gap,
            });
        }
        let frac = x.add_rational(&BigRational::from_integer(-a));
        if frac.contains(&BigRational::zero()) {
            let (m, l) = (big_u64(&h1).unwrap_or(0), big_u64(&k1).unwrap_or(0));
            return Err(Error::RationalGamma { m, l });
        }
        match frac.recip() {
            Some(r) => x = Enclosure::new(r.lo().clone(), r.hi().clone(), bits),
            None => {
                exhausted = true;
                break;
            }
        }
    }
    Ok(ApproximantList {
        approximants: out,
        precision_exhausted: exhausted,
    })
}

/// A witness `z_1^eta1 w^eta2` in the Bergman space of `gamma` whose `L^p`
/// norm diverges.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub m_k: u64,
    pub l_k: u64,
    pub eta1: u64,
    pub eta2: i64,
    pub p: f64,
    pub diverges: bool,
    pub lambda_bridge_ok: bool,
    /// `1/m - (eta1 + n)(l/m - 1/gamma)`, lower end of the enclosure.
    pub bridge: String,
    /// `p (1 + (nl - 1)/m + eta1 (l/m - 1/gamma)) - 2 - 2n/gamma`, lower end.
    pub divergence_margin: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum WitnessOutcome {
    Found(Witness),
    NotFound {
        max_m: u64,
        approximants_examined: usize,
        tagged: usize,
        precision_exhausted: bool,
        /// Largest divergence margin among the tagged approximants whose
        /// bridge holds (negative when no candidate came close).
        best_margin: Option<f64>,
    },
}

/// Scans tagged approximants for a divergent witness at exponent `p`.
pub fn irrational_witness(gamma: &Gamma, n: u32, p: f64, max_m: u64) -> Result<WitnessOutcome> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Domain(format!("p = {p} must be positive")));
    }
    let p_q = BigRational::from_float(p).ok_or_else(|| Error::Domain("bad p".into()))?;
    let g = gamma_enclosure(gamma)?;
    let inv_g = g.recip().ok_or_else(|| Error::Domain("gamma enclosure touches zero".into()))?;
    let list = approximants(gamma, n, max_m)?;
    let domain = DomainSpec::new(gamma.clone(), n)?;
    let ni = n as i128;
    let mut tagged = 0;
    let mut best: Option<f64> = None;
    for a in &list.approximants {
        if !a.satisfies_dirichlet {
            continue;
        }
        tagged += 1;
        let exp = make_exponent(a.m_k as i64, a.l_k as i64)?;
        let eta = solve_min_eta(&exp, n)?;
        let (m, l) = (a.m_k as i128, a.l_k as i128);
        let slope = inv_g.neg().add_rational(&rat(l, m));
        let bridge = slope
            .mul_rational(&int(-(eta.alpha1 as i128 + ni)))
            .add_rational(&rat(1, m));
        let lhs = slope
            .mul_rational(&int(eta.alpha1 as i128))
            .add_rational(&(int(1) + rat(ni * l - 1, m)))
            .mul_rational(&p_q);
        let rhs = inv_g.mul_rational(&int(2 * ni)).add_rational(&int(2));
        let margin = lhs.sub(&rhs);
        let bridge_ok = bridge.sign(DEFAULT_BAND) == Some(Ordering::Greater);
        let margin_ok = matches!(margin.sign(DEFAULT_BAND), Some(Ordering::Greater | Ordering::Equal));
        if bridge_ok {
            best = Some(best.map_or(margin.to_f64(), |b: f64| b.max(margin.to_f64())));
        }
        if bridge_ok && margin_ok {
            let member = in_lambda(&domain, eta)?;
            let verdict = monomial_lp_exact(&domain, eta.alpha1, eta.beta, &p_q)?;
            if !member {
                return Err(Error::Internal(format!(
                    "bridge holds but ({}, {}) is not in the index lattice",
                    eta.alpha1, eta.beta
                )));
            }
            if verdict.kind != LpKind::Divergent {
                return Err(Error::Internal("divergence inequality disagrees with the L^p verdict".into()));
            }
            return Ok(WitnessOutcome::Found(Witness {
                m_k: a.m_k,
                l_k: a.l_k,
                eta1: eta.alpha1,
                eta2: eta.beta,
                p,
                diverges: true,
                lambda_bridge_ok: true,
                bridge: decimal_string(bridge.lo(), 30),
                divergence_margin: decimal_string(margin.lo(), 30),
            }));
        }
    }
    Ok(WitnessOutcome::NotFound {
        max_m,
        approximants_examined: list.approximants.len(),
        tagged,
        precision_exhausted: list.precision_exhausted,
        best_margin: best,
    })
}

/// Whether `eta` lies in the index lattice of `gamma` strictly, evaluated on
/// the enclosure.
pub fn bridge_value(gamma: &Gamma, n: u32, m: u64, l: u64, eta: LatticeIndex) -> Result<Enclosure> {
    let inv_g = gamma_enclosure(gamma)?
        .recip()
        .ok_or_else(|| Error::Domain("gamma enclosure touches zero".into()))?;
    let (m, l) = (m as i128, l as i128);
    Ok(inv_g
        .neg()
        .add_rational(&rat(l, m))
        .mul_rational(&int(-(eta.alpha1 as i128 + n as i128)))
        .add_rational(&rat(1, m)))
}

impl Approximant {
    pub fn gap_enclosure(&self) -> &Enclosure {
        &self.gap_enclosure
    }
}

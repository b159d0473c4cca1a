//! The domain `{ |z|^gamma < |w| < 1 }` in `C^n x C`: membership, volume,
//! uniform sampling and polar tensor quadrature.

use std::io::Write;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Open01, StandardNormal};
use rayon::prelude::*;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::lattice::{make_exponent, RationalExponent};
use crate::precise::{self, Enclosure, DEFAULT_DIGITS};
use crate::quadrature::{gauss_legendre_on, pairwise_sum_complex, NeumaierComplex};
use crate::special::ln_gamma;

/// A positive real exponent known through an enclosure.
#[derive(Debug, Clone, PartialEq)]
pub struct RealExponent {
    label: String,
    enclosure: Enclosure,
    approx: f64,
}

impl RealExponent {
    pub fn new(label: impl Into<String>, enclosure: Enclosure) -> Result<Self> {
        let approx = enclosure.to_f64();
        if !(approx > 0.0) || enclosure.sign(0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::Domain("gamma must be positive".into()));
        }
        Ok(Self {
            label: label.into(),
            enclosure,
            approx,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn enclosure(&self) -> &Enclosure {
        &self.enclosure
    }

    pub fn to_f64(&self) -> f64 {
        self.approx
    }
}

/// The exponent `gamma`, exact or enclosed.
#[derive(Debug, Clone, PartialEq)]
pub enum Gamma {
    Rational(RationalExponent),
    Real(RealExponent),
}

impl Gamma {
    pub fn to_f64(&self) -> f64 {
        match self {
            Gamma::Rational(e) => e.to_f64(),
            Gamma::Real(r) => r.to_f64(),
        }
    }

    pub fn as_rational(&self) -> Option<&RationalExponent> {
        match self {
            Gamma::Rational(e) => Some(e),
            Gamma::Real(_) => None,
        }
    }

    /// Enclosure at `bits` precision (exact for rational exponents).
    pub fn enclosure(&self, bits: u32) -> Enclosure {
        match self {
            Gamma::Rational(e) => Enclosure::exact(e.to_ratio(), bits),
            Gamma::Real(r) => r.enclosure.clone(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Gamma::Rational(e) => e.to_string(),
            Gamma::Real(r) => r.label.clone(),
        }
    }
}

/// Parses `m/l`, an integer, a decimal, or one of the tokens `sqrt2`, `sqrt3`,
/// `sqrt5`, `sqrt(k)`, `pi`, `e`, `golden` (alias `phi`).
///
/// Decimals are taken to be known to half a unit in their last digit.
pub fn parse_gamma(text: &str, digits: u32) -> Result<Gamma> {
    let s = text.trim();
    let bits = precise::bits_for_digits(digits);
    let lower = s.to_ascii_lowercase();
    let sqrt_arg = match lower.as_str() {
        "sqrt2" => Some(2),
        "sqrt3" => Some(3),
        "sqrt5" => Some(5),
        _ => lower
            .strip_prefix("sqrt(")
            .and_then(|r| r.strip_suffix(')'))
            .map(|k| {
                k.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Parse(format!("bad sqrt argument in {s:?}")))
            })
            .transpose()?,
    };
    if let Some(k) = sqrt_arg {
        if k == 0 {
            return Err(Error::Domain("gamma must be positive".into()));
        }
        let enc = precise::sqrt_int(k, bits);
        if enc.is_exact() {
            let r = enc.lo().to_integer();
            let r: i64 = r.try_into().map_err(|_| Error::Domain("gamma too large".into()))?;
            return Ok(Gamma::Rational(make_exponent(r, 1)?));
        }
        return Ok(Gamma::Real(RealExponent::new(lower, enc)?));
    }
    match lower.as_str() {
        "pi" => return Ok(Gamma::Real(RealExponent::new("pi", precise::pi(bits))?)),
        "e" => return Ok(Gamma::Real(RealExponent::new("e", precise::euler(bits))?)),
        "golden" | "phi" => {
            return Ok(Gamma::Real(RealExponent::new("golden", precise::golden(bits))?))
        }
        _ => {}
    }
    if let Some((m, l)) = s.split_once('/') {
        let m: i64 = m.trim().parse().map_err(|_| Error::Parse(format!("bad gamma {s:?}")))?;
        let l: i64 = l.trim().parse().map_err(|_| Error::Parse(format!("bad gamma {s:?}")))?;
        return Ok(Gamma::Rational(make_exponent(m, l)?));
    }
    if let Ok(m) = s.parse::<i64>() {
        return Ok(Gamma::Rational(make_exponent(m, 1)?));
    }
    let (value, frac) =
        precise::parse_decimal(s).ok_or_else(|| Error::Parse(format!("bad gamma {s:?}")))?;
    let half_ulp = BigRational::new(BigInt::from(1), BigInt::from(2) * BigInt::from(10).pow(frac));
    let enc = Enclosure::new(&value - &half_ulp, &value + &half_ulp, bits);
    Ok(Gamma::Real(RealExponent::new(s, enc)?))
}

/// Dimension `n` and exponent `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    n: u32,
    gamma: Gamma,
    gamma_f64: f64,
}

impl DomainSpec {
    pub fn new(gamma: Gamma, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("dimension n must be >= 1".into()));
        }
        let gamma_f64 = gamma.to_f64();
        Ok(Self {
            n,
            gamma,
            gamma_f64,
        })
    }

    pub fn rational(exp: RationalExponent, n: u32) -> Result<Self> {
        Self::new(Gamma::Rational(exp), n)
    }

    pub fn from_ml(m: i64, l: i64, n: u32) -> Result<Self> {
        Self::rational(make_exponent(m, l)?, n)
    }

    /// Parses `gamma` with the default precision.
    pub fn parse(gamma: &str, n: u32) -> Result<Self> {
        Self::new(parse_gamma(gamma, DEFAULT_DIGITS)?, n)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn gamma(&self) -> &Gamma {
        &self.gamma
    }

    pub fn gamma_f64(&self) -> f64 {
        self.gamma_f64
    }

    pub fn exponent(&self) -> Option<&RationalExponent> {
        self.gamma.as_rational()
    }
}

/// A point `(z, w)` of `C^n x C`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub z: SmallVec<[Complex64; 4]>,
    pub w: Complex64,
}

impl Point {
    pub fn new(z: &[Complex64], w: Complex64) -> Self {
        Self {
            z: SmallVec::from_slice(z),
            w,
        }
    }

    /// A point of `C^1 x C`.
    pub fn planar(z: Complex64, w: Complex64) -> Self {
        Self::new(&[z], w)
    }

    pub fn z_norm(&self) -> f64 {
        self.z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hermitian pairing `z . conj(s)` of the `C^n` parts.
    pub fn pair_z(&self, other: &Point) -> Complex64 {
        self.z.iter().zip(&other.z).map(|(a, b)| a * b.conj()).sum()
    }

    /// `w conj(t)`.
    pub fn pair_w(&self, other: &Point) -> Complex64 {
        self.w * other.w.conj()
    }
}

/// `|z|^gamma + slack <= |w| <= 1 - slack` and `|w| > 0`.
pub fn contains(domain: &DomainSpec, p: &Point, slack: f64) -> bool {
    if p.z.len() != domain.n as usize {
        return false;
    }
    let w = p.w.norm();
    w > 0.0 && p.z_norm().powf(domain.gamma_f64) + slack <= w && w <= 1.0 - slack
}

/// Lebesgue volume `pi^(n+1) gamma / (n! (n + gamma))`.
pub fn volume(domain: &DomainSpec) -> f64 {
    let n = domain.n as f64;
    let g = domain.gamma_f64;
    (std::f64::consts::PI.ln() * (n + 1.0) - ln_gamma(n + 1.0)).exp() * g / (n + g)
}

/// Volume of `{ delta <= |w| <= 1 - delta, |z|^gamma <= (1 - delta) |w| }`.
pub fn truncated_volume(domain: &DomainSpec, margin: f64) -> f64 {
    let n = domain.n as f64;
    let g = domain.gamma_f64;
    let k = 2.0 * n / g + 2.0;
    let ball = (std::f64::consts::PI.ln() * n - ln_gamma(n + 1.0)).exp();
    let radial = ((1.0 - margin).powf(k) - margin.powf(k)) / k;
    2.0 * std::f64::consts::PI * ball * (1.0 - margin).powf(2.0 * n / g) * radial
}

/// The `index`-th sample of the stream seeded by `seed`.
pub fn sample_at(domain: &DomainSpec, seed: u64, index: u64) -> Point {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = domain.n as usize;
    let g = domain.gamma_f64;
    let u: f64 = rng.sample(Open01);
    let rho = u.powf(1.0 / (2.0 * n as f64 / g + 2.0));
    let theta = std::f64::consts::TAU * rng.sample::<f64, _>(Open01);
    let w = Complex64::from_polar(rho, theta);

    let mut dir: SmallVec<[f64; 8]> = SmallVec::new();
    loop {
        dir.clear();
        for _ in 0..2 * n {
            dir.push(rng.sample(StandardNormal));
        }
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            dir.iter_mut().for_each(|x| *x /= norm);
            break;
        }
    }
    let v: f64 = rng.sample(Open01);
    let r = rho.powf(1.0 / g) * v.powf(1.0 / (2.0 * n as f64));
    let z: SmallVec<[Complex64; 4]> = (0..n)
        .map(|k| Complex64::new(r * dir[2 * k], r * dir[2 * k + 1]))
        .collect();
    Point { z, w }
}

/// `count` independent uniform points; sample `i` depends only on `(seed, i)`.
pub fn sample_uniform(domain: &DomainSpec, count: usize, seed: u64) -> Result<Vec<Point>> {
    if count == 0 {
        return Err(Error::Domain("sample count must be >= 1".into()));
    }
    Ok((0..count as u64)
        .into_par_iter()
        .map(|i| sample_at(domain, seed, i))
        .collect())
}

/// Writes `re(z_1..n), im(z_1..n), re(w), im(w), weight`.
pub fn write_samples_csv<W: Write>(points: &[Point], weight: f64, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let n = points.first().map_or(0, |p| p.z.len());
    let mut header: Vec<String> = (1..=n).map(|k| format!("re_z{k}")).collect();
    header.extend((1..=n).map(|k| format!("im_z{k}")));
    header.extend(["re_w".into(), "im_w".into(), "weight".into()]);
    wtr.write_record(&header)?;
    for p in points {
        let mut row: Vec<String> = p.z.iter().map(|c| c.re.to_string()).collect();
        row.extend(p.z.iter().map(|c| c.im.to_string()));
        row.extend([p.w.re.to_string(), p.w.im.to_string(), weight.to_string()]);
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads the format written by [`write_samples_csv`].
pub fn read_samples_csv<R: std::io::Read>(input: R) -> Result<Vec<(Point, f64)>> {
    let mut rdr = csv::Reader::from_reader(input);
    let width = rdr.headers()?.len();
    if width < 5 || (width - 3) % 2 != 0 {
        return Err(Error::Parse(format!("unexpected sample CSV width {width}")));
    }
    let n = (width - 3) / 2;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| Error::Parse(format!("bad number {:?}", &rec[i])))
        };
        let z: SmallVec<[Complex64; 4]> =
            (0..n).map(|k| Ok(Complex64::new(f(k)?, f(n + k)?))).collect::<Result<_>>()?;
        let w = Complex64::new(f(2 * n)?, f(2 * n + 1)?);
        out.push((Point { z, w }, f(2 * n + 2)?));
    }
    Ok(out)
}

/// Polar tensor rule on the truncated domain
/// `margin <= |w| <= 1 - margin`, `|z|^gamma <= (1 - margin) |w|`.
///
/// Coordinates are `rho = |w|` (Gauss-Legendre), `arg w` (equispaced),
/// `r = |z|` on `[0, ((1 - margin) rho)^(1/gamma)]` (Gauss-Legendre), the
/// simplex `|z_k|^2 / r^2` in collapsed coordinates (Gauss-Legendre, `n >= 2`)
/// and `arg z_k` (equispaced). Nodes are generated on demand from their index.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    domain: DomainSpec,
    radial: usize,
    angular: usize,
    margin: f64,
    rho: (Vec<f64>, Vec<f64>),
    unit: (Vec<f64>, Vec<f64>),
    len: usize,
}

pub fn build_grid(
    domain: &DomainSpec,
    radial_nodes: usize,
    angular_nodes: usize,
    margin: f64,
) -> Result<QuadratureGrid> {
    if !(margin > 0.0 && margin < 0.5) {
        return Err(Error::Domain(format!("grid margin {margin} outside (0, 0.5)")));
    }
    if radial_nodes < 2 || angular_nodes < 2 {
        return Err(Error::Domain("grid needs at least 2 nodes per direction".into()));
    }
    let n = domain.n;
    let len = (radial_nodes as u128 * angular_nodes as u128).pow(n + 1);
    if len > usize::MAX as u128 / 2 {
        return Err(Error::Domain("grid too large".into()));
    }
    Ok(QuadratureGrid {
        domain: domain.clone(),
        radial: radial_nodes,
        angular: angular_nodes,
        margin,
        rho: gauss_legendre_on(radial_nodes, margin, 1.0 - margin),
        unit: gauss_legendre_on(radial_nodes, 0.0, 1.0),
        len: len as usize,
    })
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn radial_counts(&self) -> usize {
        self.radial
    }

    pub fn angular_counts(&self) -> usize {
        self.angular
    }

    /// Node `index` and its weight.
    pub fn node(&self, index: usize) -> (Point, f64) {
        let n = self.domain.n as usize;
        let (nr, na) = (self.radial, self.angular);
        let mut i = index;
        let mut take = |k: usize| {
            let v = i % k;
            i /= k;
            v
        };
        let i_rho = take(nr);
        let i_tw = take(na);
        let i_r = take(nr);
        let i_tz: SmallVec<[usize; 4]> = (0..n).map(|_| take(na)).collect();
        let i_x: SmallVec<[usize; 4]> = (1..n).map(|_| take(nr)).collect();

        let dtheta = std::f64::consts::TAU / na as f64;
        let rho = self.rho.0[i_rho];
        let w = Complex64::from_polar(rho, dtheta * i_tw as f64);
        let big_r = ((1.0 - self.margin) * rho).powf(1.0 / self.domain.gamma_f64);
        let r = big_r * self.unit.0[i_r];
        let w_r = big_r * self.unit.1[i_r];

        // collapsed simplex coordinates for t_k = |z_k|^2 / r^2
        let d = n - 1;
        let mut t: SmallVec<[f64; 4]> = SmallVec::new();
        let mut rest = 1.0;
        let mut jac = 1.0;
        for (pos, &ix) in i_x.iter().enumerate() {
            let x = self.unit.0[ix];
            t.push(x * rest);
            jac *= self.unit.1[ix] * (1.0 - x).powi((d - pos - 1) as i32);
            rest *= 1.0 - x;
        }
        t.push(rest);

        let z: SmallVec<[Complex64; 4]> = (0..n)
            .map(|k| Complex64::from_polar(r * t[k].sqrt(), dtheta * i_tz[k] as f64))
            .collect();
        let weight = self.rho.1[i_rho] * rho * dtheta * w_r * r.powi(2 * n as i32 - 1)
            / 2f64.powi(n as i32 - 1)
            * jac
            * dtheta.powi(n as i32);
        (Point { z, w }, weight)
    }
}

const CHUNK: usize = 1 << 12;

/// Integrates `k` functions at once; `f` writes the values at a node into
/// its slice. Summation is chunked and pairwise in node order, independent of
/// the thread count.
pub fn integrate_grid_multi<F>(grid: &QuadratureGrid, k: usize, f: F) -> Result<Vec<Complex64>>
where
    F: Fn(&Point, &mut [Complex64]) + Sync,
{
    let chunks = grid.len().div_ceil(CHUNK);
    let partial: Vec<std::result::Result<Vec<Complex64>, Error>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![NeumaierComplex::default(); k];
            let mut vals = vec![Complex64::new(0.0, 0.0); k];
            for index in c * CHUNK..((c + 1) * CHUNK).min(grid.len()) {
                let (p, wt) = grid.node(index);
                f(&p, &mut vals);
                for (a, v) in acc.iter_mut().zip(&vals) {
                    if !(v.re.is_finite() && v.im.is_finite()) {
                        return Err(Error::NonFinite {
                            index,
                            abs_z: p.z_norm(),
                            abs_w: p.w.norm(),
                            value: v.to_string(),
                        });
                    }
                    a.add(v * wt);
                }
            }
            Ok(acc.iter().map(|a| a.value()).collect())
        })
        .collect();
    let mut sums: Vec<Vec<Complex64>> = vec![Vec::with_capacity(chunks); k];
    for part in partial {
        for (s, v) in sums.iter_mut().zip(part?) {
            s.push(v);
        }
    }
    Ok(sums.iter().map(|s| pairwise_sum_complex(s)).collect())
}

pub fn integrate_grid<F>(grid: &QuadratureGrid, f: F) -> Result<Complex64>
where
    F: Fn(&Point) -> Complex64 + Sync,
{
    Ok(integrate_grid_multi(grid, 1, |p, out| out[0] = f(p))?[0])
}

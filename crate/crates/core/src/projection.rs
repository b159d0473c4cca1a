//! The Bergman projection: by quadrature against the closed-form kernel, and
//! exactly on anti-holomorphic monomials `z_1^eta1 conj(w)^eta2`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{build_grid, contains, integrate_grid_multi, DomainSpec, Gamma, Point, QuadratureGrid};
use crate::kernel::ClosedKernel;
use crate::lattice::{in_lambda, LatticeIndex};
use crate::monomial::{weight_n, FullIndex, NormSq};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProjectionKind {
    Monomial,
    Zero,
}

/// `P(z_1^eta1 conj(w)^eta2) = C z_1^eta1 w^-eta2`, or zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionResult {
    pub kind: ProjectionKind,
    pub constant: Option<f64>,
    #[serde(serialize_with = "ser_opt_ratio")]
    pub constant_exact: Option<BigRational>,
    /// `(eta1, -eta2)`: exponents of the image monomial.
    pub exponents: (u64, i64),
}

fn ser_opt_ratio<S: serde::Serializer>(r: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&crate::report::ratio_string(r)),
        None => s.serialize_none(),
    }
}

/// Projection of `z_1^eta1 conj(w)^eta2`.
///
/// `C = pi^(n+1) eta1! B(x, 2) / (gamma N(eta1, -eta2) Gamma(n + eta1))`
/// with `x = (eta1 + n) / gamma`, which reduces to `(x + 1 - eta2) / (x + 1)`.
pub fn project_antiholo_monomial(
    domain: &DomainSpec,
    eta1: u64,
    eta2: i64,
    residue_filter: Option<u64>,
) -> Result<ProjectionResult> {
    for beta in [eta2, -eta2] {
        if !in_lambda(domain, LatticeIndex::new(eta1, beta))? {
            return Err(Error::NotAdmissible(format!(
                "({eta1}, {beta}) is not in the index lattice"
            )));
        }
    }
    let exponents = (eta1, -eta2);
    if let Some(j) = residue_filter {
        let exp = domain
            .exponent()
            .ok_or_else(|| Error::Domain("residue filters need a rational exponent".into()))?;
        if j >= exp.m() {
            return Err(Error::Domain(format!("residue {j} outside [0, {})", exp.m())));
        }
        if eta1 % exp.m() != j {
            return Ok(ProjectionResult {
                kind: ProjectionKind::Zero,
                constant: None,
                constant_exact: None,
                exponents,
            });
        }
    }
    let n = domain.n() as i64;
    let (constant, exact) = match domain.gamma() {
        Gamma::Rational(exp) => {
            let x = BigRational::new(BigInt::from((eta1 as i64 + n) * exp.l() as i64), BigInt::from(exp.m()));
            let one = BigRational::one();
            // B(x, 2) = 1 / (x (x + 1))
            let beta = (&x * (&x + &one)).recip();
            let c = (&x + &one - BigRational::from_integer(BigInt::from(eta2))) / (&x + &one);
            // the defining expression, kept as a cross-check of the reduction
            let gamma = exp.to_ratio();
            let n_over = (&x + &one - BigRational::from_integer(BigInt::from(eta2)))
                * BigRational::from_integer(BigInt::from(eta1 as i64 + n));
            let c_def = beta * n_over / gamma;
            if c_def != c {
                return Err(Error::Internal("projection constant reduction mismatch".into()));
            }
            (c.to_f64().unwrap_or(f64::NAN), Some(c))
        }
        Gamma::Real(_) => {
            let x = (eta1 as f64 + n as f64) / domain.gamma_f64();
            ((x + 1.0 - eta2 as f64) / (x + 1.0), None)
        }
    };
    Ok(ProjectionResult {
        kind: ProjectionKind::Monomial,
        constant: Some(constant),
        constant_exact: exact,
        exponents,
    })
}

/// `N(eta1, 0) / N(eta1, -eta2)`: the inner product of `z_1^eta1 conj(w)^eta2`
/// with `z_1^eta1 w^-eta2` over the latter's squared norm.
pub fn projection_constant_from_norms(domain: &DomainSpec, eta1: u64, eta2: i64) -> Result<f64> {
    match (weight_n(domain, eta1, 0)?, weight_n(domain, eta1, -eta2)?) {
        (NormSq::Finite(a), NormSq::Finite(b)) => Ok(a / b),
        _ => Err(Error::NotAdmissible(format!("({eta1}, {}) not in A^2", -eta2))),
    }
}

/// `int B(target, y) f(y) dV(y)` on one grid, for several targets at once.
pub fn project_numeric<F>(
    kernel: &ClosedKernel,
    f: F,
    grid: &QuadratureGrid,
    targets: &[Point],
) -> Result<Vec<Complex64>>
where
    F: Fn(&Point) -> Complex64 + Sync,
{
    for t in targets {
        if !contains(grid.domain(), t, grid.margin()) {
            return Err(Error::Domain(format!(
                "target (|z| = {}, |w| = {}) not interior with margin {}",
                t.z_norm(),
                t.w.norm(),
                grid.margin()
            )));
        }
    }
    let first_error = std::sync::Mutex::new(None);
    let out = integrate_grid_multi(grid, targets.len(), |y, vals| {
        let fy = f(y);
        for (slot, t) in vals.iter_mut().zip(targets) {
            *slot = match kernel.eval(t, y) {
                Ok(k) => k * fy,
                Err(e) => {
                    first_error.lock().unwrap().get_or_insert(e.to_string());
                    Complex64::new(f64::NAN, f64::NAN)
                }
            };
        }
    });
    match (out, first_error.into_inner().unwrap()) {
        (Err(Error::NonFinite { index, abs_z, abs_w, .. }), Some(msg)) => Err(Error::NonFinite {
            index,
            abs_z,
            abs_w,
            value: msg,
        }),
        (out, _) => out,
    }
}

/// Grid sizes and margins for an extrapolated projection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPlan {
    pub radial: usize,
    pub angular: usize,
    pub margin: f64,
    /// Number of margins `margin / 2^k` combined by Richardson extrapolation;
    /// 1 disables it.
    pub levels: usize,
}

impl GridPlan {
    pub fn new(radial: usize, angular: usize, margin: f64, levels: usize) -> Self {
        Self {
            radial,
            angular,
            margin,
            levels,
        }
    }

    pub fn margins(&self) -> Vec<f64> {
        (0..self.levels.max(1)).map(|k| self.margin / 2f64.powi(k as i32)).collect()
    }
}

/// Richardson elimination of the `delta, delta^2, ...` terms from values at
/// margins `delta, delta/2, delta/4, ...`.
pub fn richardson(values: &[Complex64]) -> Complex64 {
    let mut row = values.to_vec();
    for p in 1..values.len() {
        let scale = 2f64.powi(p as i32);
        row = row.windows(2).map(|w| (scale * w[1] - w[0]) / (scale - 1.0)).collect();
    }
    row[0]
}

/// Projection with the truncation margin extrapolated to zero.
pub fn project_extrapolated<F>(
    kernel: &ClosedKernel,
    f: F,
    domain: &DomainSpec,
    plan: &GridPlan,
    targets: &[Point],
) -> Result<Vec<Complex64>>
where
    F: Fn(&Point) -> Complex64 + Sync,
{
    let mut per_margin = Vec::new();
    for margin in plan.margins() {
        let grid = build_grid(domain, plan.radial, plan.angular, margin)?;
        per_margin.push(project_numeric(kernel, &f, &grid, targets)?);
    }
    Ok((0..targets.len())
        .map(|t| richardson(&per_margin.iter().map(|v| v[t]).collect::<Vec<_>>()))
        .collect())
}

/// `z^alpha w^beta` at a point.
pub fn eval_monomial(idx: &FullIndex, p: &Point) -> Complex64 {
    let z: Complex64 = idx.alpha.iter().zip(&p.z).map(|(&a, z)| z.powu(a as u32)).product();
    z * p.w.powi(idx.beta as i32)
}

/// `max |P e - e| / (1 + |e|)` over the probes for the monomial `e`.
pub fn reproducing_residual(
    kernel: &ClosedKernel,
    idx: &FullIndex,
    plan: &GridPlan,
    probes: &[Point],
) -> Result<f64> {
    let domain = DomainSpec::rational(*kernel.exponent(), kernel.n())?;
    if let NormSq::NotInA2 = crate::monomial::monomial_norm_sq(&domain, idx)? {
        return Err(Error::NotAdmissible(format!("{idx:?} is not in A^2")));
    }
    let projected = project_extrapolated(kernel, |p| eval_monomial(idx, p), &domain, plan, probes)?;
    Ok(projected
        .iter()
        .zip(probes)
        .map(|(v, p)| {
            let e = eval_monomial(idx, p);
            (v - e).norm() / (1.0 + e.norm())
        })
        .fold(0.0, f64::max))
}

/// Deterministic targets with `|w|` spread over `[w_lo, w_hi]`,
/// `|z| = ratio |w|^(1/gamma)` and varied arguments.
pub fn spread_targets(domain: &DomainSpec, count: usize, w_lo: f64, w_hi: f64, ratio: f64) -> Vec<Point> {
    let n = domain.n() as usize;
    (0..count)
        .map(|k| {
            let s = if count > 1 { k as f64 / (count - 1) as f64 } else { 0.5 };
            let rho = w_lo + (w_hi - w_lo) * s;
            let w = Complex64::from_polar(rho, 0.7 + 2.1 * k as f64);
            let r = ratio * rho.powf(1.0 / domain.gamma_f64()) / (n as f64).sqrt();
            let z: Vec<Complex64> = (0..n)
                .map(|i| Complex64::from_polar(r * (0.3 + 0.7 * ((k + i) % 3) as f64 / 2.0), 1.3 * (k + 2 * i) as f64))
                .collect();
            Point::new(&z, w)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_exponent;

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn constant_examples() {
        let d = DomainSpec::from_ml(1, 1, 1).unwrap();
        let p = project_antiholo_monomial(&d, 0, 1, None).unwrap();
        assert_eq!(p.constant_exact, Some(r(1, 2)));
        assert_eq!(p.exponents, (0, -1));
        let p = project_antiholo_monomial(&d, 0, 0, None).unwrap();
        assert_eq!(p.constant_exact, Some(r(1, 1)));
        let d = DomainSpec::from_ml(3, 2, 1).unwrap();
        let p = project_antiholo_monomial(&d, 1, 2, Some(0)).unwrap();
        assert_eq!(p.kind, ProjectionKind::Zero);
        let p = project_antiholo_monomial(&d, 1, 2, Some(1)).unwrap();
        assert_eq!(p.kind, ProjectionKind::Monomial);
        assert!(matches!(
            project_antiholo_monomial(&d, 0, 3, None),
            Err(Error::NotAdmissible(_))
        ));
    }

    #[test]
    fn constant_agrees_with_norm_ratio() {
        for (m, l, n) in [(1, 1, 1), (3, 2, 1), (2, 5, 2), (7, 5, 3)] {
            let d = DomainSpec::from_ml(m, l, n).unwrap();
            for eta1 in 0..6u64 {
                for eta2 in -5i64..=5 {
                    let Ok(p) = project_antiholo_monomial(&d, eta1, eta2, None) else {
                        continue;
                    };
                    let oracle = projection_constant_from_norms(&d, eta1, eta2).unwrap();
                    assert!((p.constant.unwrap() - oracle).abs() < 1e-12 * oracle.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn residue_filters_partition() {
        let d = DomainSpec::from_ml(3, 2, 1).unwrap();
        for eta1 in 0..6 {
            let full = project_antiholo_monomial(&d, eta1, 1, None).unwrap();
            let hits: Vec<_> = (0..3)
                .map(|j| project_antiholo_monomial(&d, eta1, 1, Some(j)).unwrap())
                .filter(|p| p.kind == ProjectionKind::Monomial)
                .collect();
            assert_eq!(hits.len(), 1);
            assert_eq!(hits[0].constant, full.constant);
        }
    }

    #[test]
    fn richardson_removes_polynomial_error() {
        let f = |d: f64| Complex64::new(3.0 + 2.0 * d - 5.0 * d * d, 0.0);
        let v = richardson(&[f(0.1), f(0.05), f(0.025)]);
        assert!((v.re - 3.0).abs() < 1e-13);
    }

    #[test]
    fn coarse_projection_of_conj_w() {
        let e = make_exponent(1, 1).unwrap();
        let d = DomainSpec::rational(e, 1).unwrap();
        let k = ClosedKernel::new(&e, 1).unwrap();
        let targets = spread_targets(&d, 3, 0.3, 0.7, 0.5);
        let plan = GridPlan::new(16, 32, 0.02, 3);
        let got = project_extrapolated(&k, |p| p.w.conj(), &d, &plan, &targets).unwrap();
        for (g, t) in got.iter().zip(&targets) {
            let want = 0.5 / t.w;
            assert!((g - want).norm() < 1e-3 * want.norm(), "{g} vs {want}");
        }
    }

    #[test]
    fn conj_z_is_orthogonal_to_a2() {
        let e = make_exponent(1, 1).unwrap();
        let d = DomainSpec::rational(e, 1).unwrap();
        let k = ClosedKernel::new(&e, 1).unwrap();
        let targets = spread_targets(&d, 3, 0.3, 0.7, 0.5);
        let plan = GridPlan::new(16, 32, 0.02, 3);
        let got = project_extrapolated(&k, |p| p.z[0].conj(), &d, &plan, &targets).unwrap();
        for g in got {
            assert!(g.norm() < 1e-4, "{g}");
        }
    }

    #[test]
    fn discrete_projection_is_self_adjoint() {
        // <P f, g> and <f, P g> on one grid
        let e = make_exponent(3, 2).unwrap();
        let d = DomainSpec::rational(e, 1).unwrap();
        let k = ClosedKernel::new(&e, 1).unwrap();
        let grid = build_grid(&d, 5, 6, 0.05).unwrap();
        let nodes: Vec<(Point, f64)> = (0..grid.len()).map(|i| grid.node(i)).collect();
        let f = |p: &Point| p.w.conj() * p.z[0];
        let g = |p: &Point| p.z[0].conj() + p.w * p.w;
        let project = |h: &dyn Fn(&Point) -> Complex64, x: &Point| -> Complex64 {
            nodes.iter().map(|(y, wy)| k.eval(x, y).unwrap() * h(y) * wy).sum()
        };
        let lhs: Complex64 = nodes.iter().map(|(x, wx)| project(&f, x) * g(x).conj() * wx).sum();
        let rhs: Complex64 = nodes.iter().map(|(x, wx)| f(x) * project(&g, x).conj() * wx).sum();
        assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn projecting_the_projection_changes_nothing() {
        // P conj(w) computed by quadrature, then P applied to its closed form
        let e = make_exponent(1, 1).unwrap();
        let d = DomainSpec::rational(e, 1).unwrap();
        let k = ClosedKernel::new(&e, 1).unwrap();
        let targets = spread_targets(&d, 3, 0.3, 0.7, 0.5);
        let plan = GridPlan::new(16, 32, 0.02, 3);
        let once = project_extrapolated(&k, |p| p.w.conj(), &d, &plan, &targets).unwrap();
        let c = project_antiholo_monomial(&d, 0, 1, None).unwrap().constant.unwrap();
        let twice = project_extrapolated(&k, |p| c / p.w, &d, &plan, &targets).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            assert!((a - b).norm() < 1e-3 * a.norm());
        }
    }

    #[test]
    fn residual_rejects_non_a2() {
        let e = make_exponent(1, 1).unwrap();
        let k = ClosedKernel::new(&e, 1).unwrap();
        let plan = GridPlan::new(4, 4, 0.1, 1);
        let err = reproducing_residual(&k, &FullIndex::new(vec![0], -2), &plan, &[]).unwrap_err();
        assert!(matches!(err, Error::NotAdmissible(_)));
    }

    #[test]
    fn target_outside_margin_is_rejected() {
        let e = make_exponent(1, 1).unwrap();
        let d = DomainSpec::rational(e, 1).unwrap();
        let k = ClosedKernel::new(&e, 1).unwrap();
        let grid = build_grid(&d, 4, 4, 0.05).unwrap();
        let t = Point::planar(Complex64::new(0.0, 0.0), Complex64::new(0.99, 0.0));
        assert!(project_numeric(&k, |_| Complex64::new(1.0, 0.0), &grid, &[t]).is_err());
    }
}

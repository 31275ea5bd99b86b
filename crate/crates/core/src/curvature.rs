//! Levi-Civita curvature of metric fields by nested finite differences.
//!
//! Conventions: Γ^ρ_{μν} = ½g^{ρλ}(∂_μg_{λν} + ∂_νg_{λμ} − ∂_λg_{μν}),
//! R^ρ_{σμν} = ∂_μΓ^ρ_{νσ} − ∂_νΓ^ρ_{μσ} + Γ^ρ_{μλ}Γ^λ_{νσ} − Γ^ρ_{νλ}Γ^λ_{μσ},
//! R_{σν} = R^ρ_{σρν} and R = g^{σν}R_{σν}. A round 2-sphere of radius r has R = 2/r².

use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::ParametrizedState;
use crate::fubini_study::{numeric_fs_metric, MetricTensor};

/// Default step for the curvature stencils.
pub const DEFAULT_CURVATURE_STEP: f64 = 1e-3;

/// Default step for state derivatives when a metric field is built from a family.
/// Larger than the plain metric default so that second differences of the metric stay quiet.
pub const FAMILY_FIELD_METRIC_STEP: f64 = 1e-3;

type T3 = [[[f64; 4]; 4]; 4];
type T4 = [[[[f64; 4]; 4]; 4]; 4];

/// A smooth assignment of metric tensors to points of a chart.
pub trait MetricField: Sync {
    fn dim(&self) -> usize;

    fn metric(&self, xi: &[f64]) -> Result<MetricTensor>;

    /// Per-coordinate admissible interval, if the field has one.
    fn domain(&self) -> Option<Vec<(f64, f64)>> {
        None
    }
}

/// Metric field defined by a closure.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(&[f64]) -> Result<MetricTensor> + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> MetricField for FnField<F>
where
    F: Fn(&[f64]) -> Result<MetricTensor> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn metric(&self, xi: &[f64]) -> Result<MetricTensor> {
        (self.f)(xi)
    }
}

/// Numeric Fubini–Study metric of a family, viewed as a metric field.
pub struct FamilyField<'a, P: ?Sized> {
    pub family: &'a P,
    pub gamma: f64,
    pub h_metric: f64,
}

impl<'a, P: ParametrizedState + ?Sized> FamilyField<'a, P> {
    pub fn new(family: &'a P, gamma: f64) -> Self {
        Self { family, gamma, h_metric: FAMILY_FIELD_METRIC_STEP }
    }

    pub fn with_metric_step(mut self, h: f64) -> Self {
        self.h_metric = h;
        self
    }
}

impl<P: ParametrizedState + ?Sized> MetricField for FamilyField<'_, P> {
    fn dim(&self) -> usize {
        self.family.dim()
    }

    fn metric(&self, xi: &[f64]) -> Result<MetricTensor> {
        numeric_fs_metric(self.family, xi, self.gamma, self.h_metric)
    }
}

/// Closed-form metric of the uniform-magnitude general case, η_k = ½e^{−iα_k},
/// in (ω, φ, c₃, c₊). Depends on ω and α₁₂ = α₁ − α₂ only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G0Field {
    pub alpha12: f64,
    pub gamma: f64,
}

impl MetricField for G0Field {
    fn dim(&self) -> usize {
        4
    }

    fn metric(&self, xi: &[f64]) -> Result<MetricTensor> {
        if xi.len() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, got: xi.len() });
        }
        g0_metric(xi[0], self.alpha12, self.gamma)
    }
}

fn g0_metric(omega: f64, alpha12: f64, gamma: f64) -> Result<MetricTensor> {
    let u = alpha12 + 2.0 * omega;
    let g2 = gamma * gamma;
    let pp = g2 * ((2.0 * u).cos() + 3.0) / 32.0;
    let pc = g2 * u.sin() / 4.0;
    MetricTensor::new(
        &[
            vec![g2 / 2.0, 0.0, 0.0, 0.0],
            vec![0.0, pp, pc, 0.0],
            vec![0.0, pc, g2, 0.0],
            vec![0.0, 0.0, 0.0, g2 / 2.0],
        ],
        gamma,
    )
}

/// The closed-form G⁰ example: metric, Ricci tensor and scalar curvature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct G0Example {
    pub metric: MetricTensor,
    pub ricci: Vec<Vec<f64>>,
    pub scalar: f64,
}

/// G⁰ with its Ricci tensor and R = 14/γ² as printed.
pub fn analytic_g0_and_ricci(omega: f64, alpha12: f64, gamma: f64) -> Result<G0Example> {
    let u = alpha12 + 2.0 * omega;
    let ricci = vec![
        vec![3.0, 0.0, 0.0, 0.0],
        vec![0.0, (5.0 * (2.0 * u).cos() + 7.0) / 16.0, u.sin() / 2.0, 0.0],
        vec![0.0, u.sin() / 2.0, 2.0, 0.0],
        vec![0.0, 0.0, 0.0, 0.0],
    ];
    Ok(G0Example { metric: g0_metric(omega, alpha12, gamma)?, ricci, scalar: 14.0 / (gamma * gamma) })
}

/// Scalar curvature of a product of a sphere of radius γ√η₁₂⁺/2 with a flat torus.
pub fn sphere_torus_scalar_curvature(eta12_plus: f64, gamma: f64) -> Result<f64> {
    if eta12_plus.abs() < 1e-12 {
        return Err(Error::Domain("eta12+"));
    }
    Ok(8.0 / (gamma * gamma * eta12_plus))
}

/// Curvature tensors at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub point: Vec<f64>,
    /// christoffel[ρ][μ][ν] = Γ^ρ_{μν}.
    pub christoffel: Vec<Vec<Vec<f64>>>,
    /// riemann[ρ][σ][μ][ν] = R^ρ_{σμν}.
    pub riemann: Vec<Vec<Vec<Vec<f64>>>>,
    pub ricci: Vec<Vec<f64>>,
    pub scalar: f64,
    pub step: f64,
    pub condition_number: f64,
    /// |R(h) − R(h/2)|, the size of the Richardson correction.
    pub richardson_delta: f64,
    pub note: Option<String>,
}

impl CurvatureReport {
    fn flat(point: &[f64], step: f64, condition_number: f64, note: &str) -> Self {
        let n = point.len();
        Self {
            point: point.to_vec(),
            christoffel: vec![vec![vec![0.0; n]; n]; n],
            riemann: vec![vec![vec![vec![0.0; n]; n]; n]; n],
            ricci: vec![vec![0.0; n]; n],
            scalar: 0.0,
            step,
            condition_number,
            richardson_delta: 0.0,
            note: Some(note.into()),
        }
    }

    /// Largest |R^ρ_{σμν} + R^ρ_{σνμ}|.
    pub fn antisymmetry_error(&self) -> f64 {
        let n = self.point.len();
        let mut m: f64 = 0.0;
        for r in 0..n {
            for s in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        m = m.max((self.riemann[r][s][a][b] + self.riemann[r][s][b][a]).abs());
                    }
                }
            }
        }
        m
    }

    /// Largest |R_{μν} − R_{νμ}|.
    pub fn ricci_asymmetry(&self) -> f64 {
        let n = self.point.len();
        let mut m: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                m = m.max((self.ricci[a][b] - self.ricci[b][a]).abs());
            }
        }
        m
    }

    /// Largest violation of the first Bianchi identity R^ρ_{σμν} + R^ρ_{μνσ} + R^ρ_{νσμ} = 0.
    pub fn bianchi_error(&self) -> f64 {
        let n = self.point.len();
        let r = &self.riemann;
        let mut m: f64 = 0.0;
        for p in 0..n {
            for s in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        m = m.max((r[p][s][a][b] + r[p][a][b][s] + r[p][b][s][a]).abs());
                    }
                }
            }
        }
        m
    }
}

struct Raw {
    gamma: T3,
    riemann: T4,
    ricci: [[f64; 4]; 4],
    scalar: f64,
}

fn axis_shift(xi: &[f64], axis: usize, dx: f64) -> Vec<f64> {
    let mut x = xi.to_vec();
    x[axis] += dx;
    x
}

fn five_point<T, F>(xi: &[f64], axis: usize, h: f64, f: &F) -> Result<[T; 4]>
where
    F: Fn(&[f64]) -> Result<T>,
{
    Ok([
        f(&axis_shift(xi, axis, 2.0 * h))?,
        f(&axis_shift(xi, axis, h))?,
        f(&axis_shift(xi, axis, -h))?,
        f(&axis_shift(xi, axis, -2.0 * h))?,
    ])
}

fn d4(v: [f64; 4], h: f64) -> f64 {
    (-v[0] + 8.0 * v[1] - 8.0 * v[2] + v[3]) / (12.0 * h)
}

fn christoffel<M: MetricField + ?Sized>(mf: &M, xi: &[f64], h: f64) -> Result<T3> {
    let n = xi.len();
    let g = mf.metric(xi)?;
    let gi = g.inverse()?;
    // dg[l][a][b] = ∂_l g_{ab}
    let mut dg = [[[0.0; 4]; 4]; 4];
    for l in 0..n {
        let s = five_point(xi, l, h, &|x| mf.metric(x))?;
        for a in 0..n {
            for b in 0..n {
                dg[l][a][b] = d4([s[0].get(a, b), s[1].get(a, b), s[2].get(a, b), s[3].get(a, b)], h);
            }
        }
    }
    let mut out = [[[0.0; 4]; 4]; 4];
    for r in 0..n {
        for m in 0..n {
            for v in m..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += gi[r][l] * (dg[m][l][v] + dg[v][l][m] - dg[l][m][v]);
                }
                out[r][m][v] = 0.5 * acc;
                out[r][v][m] = 0.5 * acc;
            }
        }
    }
    Ok(out)
}

fn curvature_raw<M: MetricField + ?Sized>(mf: &M, xi: &[f64], h: f64) -> Result<Raw> {
    let n = xi.len();
    let gamma = christoffel(mf, xi, h)?;
    let mut dgam = [[[[0.0; 4]; 4]; 4]; 4];
    for l in 0..n {
        let s = five_point(xi, l, h, &|x| christoffel(mf, x, h))?;
        for r in 0..n {
            for a in 0..n {
                for b in 0..n {
                    dgam[l][r][a][b] = d4([s[0][r][a][b], s[1][r][a][b], s[2][r][a][b], s[3][r][a][b]], h);
                }
            }
        }
    }
    let mut riemann = [[[[0.0; 4]; 4]; 4]; 4];
    for r in 0..n {
        for s in 0..n {
            for m in 0..n {
                for v in 0..n {
                    let mut acc = dgam[m][r][v][s] - dgam[v][r][m][s];
                    for l in 0..n {
                        acc += gamma[r][m][l] * gamma[l][v][s] - gamma[r][v][l] * gamma[l][m][s];
                    }
                    riemann[r][s][m][v] = acc;
                }
            }
        }
    }
    let mut ricci = [[0.0; 4]; 4];
    for s in 0..n {
        for v in 0..n {
            ricci[s][v] = (0..n).map(|r| riemann[r][s][r][v]).sum();
        }
    }
    let gi = mf.metric(xi)?.inverse()?;
    let mut scalar = 0.0;
    for s in 0..n {
        for v in 0..n {
            scalar += gi[s][v] * ricci[s][v];
        }
    }
    if !scalar.is_finite() {
        return Err(Error::NonFinite("scalar curvature"));
    }
    Ok(Raw { gamma, riemann, ricci, scalar })
}

fn check_point<M: MetricField + ?Sized>(mf: &M, xi: &[f64], h: f64) -> Result<MetricTensor> {
    let n = mf.dim();
    if xi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: xi.len() });
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("curvature step h = {h} must be positive")));
    }
    if let Some(dom) = mf.domain() {
        for (k, (&x, (lo, hi))) in xi.iter().zip(dom).enumerate() {
            if x - 4.0 * h < lo || x + 4.0 * h > hi {
                return Err(Error::InvalidArgument(format!(
                    "coordinate {k} = {x} is within the stencil margin of the domain [{lo}, {hi}]"
                )));
            }
        }
    }
    let g = mf.metric(xi)?;
    if g.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: g.dim() });
    }
    let min = g.eigenvalues().iter().fold(f64::INFINITY, |a, e| a.min(e.abs()));
    if min < 1e-10 {
        return Err(Error::SingularMetric(min));
    }
    Ok(g)
}

/// Scalar curvature with a single step h and no extrapolation.
pub fn scalar_curvature_single_step<M: MetricField + ?Sized>(mf: &M, xi: &[f64], h: f64) -> Result<f64> {
    let g = check_point(mf, xi, h)?;
    if g.dim() == 1 {
        return Ok(0.0);
    }
    Ok(curvature_raw(mf, xi, h)?.scalar)
}

/// Curvature at ξ, Richardson-extrapolated over steps h and h/2.
pub fn curvature_at<M: MetricField + ?Sized>(mf: &M, xi: &[f64], h: f64) -> Result<CurvatureReport> {
    let g = check_point(mf, xi, h)?;
    let cond = g.condition_number();
    let n = xi.len();
    if n == 1 {
        return Ok(CurvatureReport::flat(xi, h, cond, "one-dimensional chart: curvature vanishes identically"));
    }
    let coarse = curvature_raw(mf, xi, h)?;
    let fine = curvature_raw(mf, xi, h / 2.0)?;
    let ex = |a: f64, b: f64| (16.0 * b - a) / 15.0;
    let christoffel = (0..n)
        .map(|r| (0..n).map(|a| (0..n).map(|b| ex(coarse.gamma[r][a][b], fine.gamma[r][a][b])).collect()).collect())
        .collect();
    let riemann = (0..n)
        .map(|r| {
            (0..n)
                .map(|s| {
                    (0..n)
                        .map(|a| (0..n).map(|b| ex(coarse.riemann[r][s][a][b], fine.riemann[r][s][a][b])).collect())
                        .collect()
                })
                .collect()
        })
        .collect();
    let ricci = (0..n).map(|a| (0..n).map(|b| ex(coarse.ricci[a][b], fine.ricci[a][b])).collect()).collect();
    Ok(CurvatureReport {
        point: xi.to_vec(),
        christoffel,
        riemann,
        ricci,
        scalar: ex(coarse.scalar, fine.scalar),
        step: h,
        condition_number: cond,
        richardson_delta: (coarse.scalar - fine.scalar).abs(),
        note: None,
    })
}

/// Printed closed form of the scalar curvature of the perturbed uniform-magnitude metric
/// restricted to its ω dependence.
pub fn perturbed_scalar_curvature_closed_form(omega: f64, beta: f64, gamma: f64) -> Result<f64> {
    const EPS: f64 = 1e-12;
    if !(omega.is_finite() && beta.is_finite()) {
        return Err(Error::NonFinite("omega/beta"));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    let w = omega;
    let b = beta;
    let s = |k: f64| (k * w).sin();
    let c = |k: f64| (k * w).cos();
    let w2 = w * w;
    let w3 = w2 * w;
    let w4 = w3 * w;
    let pole = (c(4.0) + 1.0).powi(2);
    if pole.abs() < EPS {
        return Err(Error::Domain("(cos 4omega + 1)^2"));
    }
    let core = 4.0 * w * s(1.0) + s(1.0) + s(3.0) - 4.0 * w * c(1.0) + c(1.0) - c(5.0);

    let a1 = 8.0 * b * c(2.0).powi(4)
        * (4.0 * w2 * s(1.0) + 6.0 * (w2 - 2.0) * s(1.0) * c(2.0) + 8.0 * w * c(3.0));
    let a2 = 6.0 * b * w2 * core + w4 + w4 * c(4.0);

    let b1 = (c(4.0) + 1.0)
        * (b * (-16.0 * w2 * s(1.0) + 16.0 * w2 * s(3.0)
            - 2.0 * (8.0 * w2 + 3.0 * w - 12.0) * c(1.0)
            - 4.0 * (4.0 * w2 + 9.0 * w - 1.0) * c(3.0)
            + 5.0 * w * s(1.0)
            + 5.0 * w * s(3.0)
            + w * s(5.0)
            + w * s(7.0)
            - 4.0 * s(1.0)
            + 24.0 * s(3.0)
            + 4.0 * s(7.0)
            - 6.0 * w * c(7.0)
            + 4.0 * c(5.0))
            + 7.0 * w3 * c(2.0)
            + w3 * c(6.0));
    let b2 = 4.0 * b * w * core + w3 + w3 * c(4.0);

    let c1 = 2.0 * s(4.0)
        * (2.0 * b * (14.0 * w3 + 4.0 * w2 - 7.0 * w + 6.0) * c(1.0)
            - 2.0 * b
                * (14.0 * w3 * s(1.0) + 10.0 * w3 * s(3.0) - 12.0 * w2 * s(1.0)
                    + 7.0 * w2 * s(3.0)
                    + 7.0 * w2 * s(7.0)
                    + w2 * c(7.0)
                    + (4.0 * w2 - 3.0) * c(5.0)
                    + (10.0 * w3 + 5.0 * w2 + 12.0 * w - 3.0) * c(3.0)
                    - w * s(1.0)
                    - w * s(7.0)
                    + 3.0 * s(1.0)
                    - 6.0 * s(3.0)
                    - 3.0 * s(7.0)
                    + 5.0 * w * c(7.0))
            + w4 * s(2.0)
            + w4 * s(6.0));
    let c2 = 6.0 * b * w2 * core + w4 + w4 * c(4.0);

    let d1 = c(2.0)
        * (b * (160.0 * w2 * s(1.0) - 152.0 * w2 * s(3.0) + 104.0 * w2 * s(5.0) - 104.0 * w2 * c(5.0)
            - 2.0 * (80.0 * w2 + 9.0 * w - 32.0) * c(1.0)
            + (-152.0 * w2 + 62.0 * w + 40.0) * c(3.0)
            + 52.0 * w * s(1.0)
            - 46.0 * w * s(3.0)
            + 42.0 * w * s(5.0)
            + 19.0 * w * s(7.0)
            + 7.0 * w * s(9.0)
            + 16.0 * s(3.0)
            + 16.0 * s(5.0)
            - 54.0 * w * c(5.0)
            - 22.0 * w * c(9.0)
            + 24.0 * c(5.0)
            - 4.0 * c(7.0)
            + 4.0 * c(9.0))
            + 19.0 * w3
            + 24.0 * w3 * c(4.0)
            + 5.0 * w3 * c(8.0));
    let d2 = 6.0 * b * w * core + w3 + w3 * c(4.0);

    let e1 = c(2.0)
        * (-2.0 * b * (40.0 * w3 + 21.0 * w2 - 44.0 * w + 6.0) * c(1.0)
            + 2.0 * b * (-100.0 * w3 + 55.0 * w2 + 36.0 * w - 6.0) * c(3.0)
            + b * (80.0 * w3 * s(1.0) - 200.0 * w3 * s(3.0) + 136.0 * w3 * s(5.0)
                + 24.0 * w2 * s(1.0)
                - 82.0 * w2 * s(3.0)
                + 54.0 * w2 * s(5.0)
                + 25.0 * w2 * s(7.0)
                + 9.0 * w2 * s(9.0)
                + (-38.0 * w2 + 8.0 * w + 12.0) * c(9.0)
                - 2.0 * (68.0 * w3 + 31.0 * w2 - 12.0 * w - 6.0) * c(5.0)
                - 16.0 * w * s(1.0)
                + 48.0 * w * s(3.0)
                + 48.0 * w * s(5.0)
                + 16.0 * w * s(9.0)
                - 48.0 * s(1.0)
                + 12.0 * s(3.0)
                - 36.0 * s(5.0)
                - 6.0 * s(7.0)
                - 6.0 * s(9.0))
            + 18.0 * w4
            + 24.0 * w4 * c(4.0)
            + 6.0 * w4 * c(8.0));
    let e2 = 6.0 * b * w2 * core + w4 + w4 * c(4.0);

    for (name, v) in [("A2", a2), ("B2", b2), ("C2", c2), ("D2", d2), ("E2", e2)] {
        if v.abs() < EPS {
            return Err(Error::Domain(name));
        }
    }
    Ok(c(2.0) / (gamma * gamma * pole) * (a1 / a2 + b1 / b2 + c1 / c2 + d1 / d2 + e1 / e2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::family_for;
    use crate::fubini_study::analytic_metric_c7;
    use crate::model::{ChartPoint, InitialCoefficients};
    use num_complex::Complex64;

    fn sphere(r: f64) -> FnField<impl Fn(&[f64]) -> Result<MetricTensor> + Sync> {
        FnField::new(2, move |x: &[f64]| {
            MetricTensor::diagonal(&[r * r, r * r * x[0].sin().powi(2)], 1.0)
        })
    }

    #[test]
    fn round_sphere() {
        for r in [0.5, 1.0, 3.0] {
            let rep = curvature_at(&sphere(r), &[0.9, 0.3], DEFAULT_CURVATURE_STEP).unwrap();
            assert!((rep.scalar - 2.0 / (r * r)).abs() < 1e-6, "{}", rep.scalar);
            assert!(rep.antisymmetry_error() < 1e-6);
            assert!(rep.ricci_asymmetry() < 1e-6);
        }
    }

    #[test]
    fn constant_metric_is_flat() {
        let f = FnField::new(2, |_: &[f64]| MetricTensor::diagonal(&[0.09, 0.2304], 1.0));
        let rep = curvature_at(&f, &[0.2, 1.0], DEFAULT_CURVATURE_STEP).unwrap();
        assert!(rep.scalar.abs() < 1e-8);
    }

    #[test]
    fn one_dimensional_chart() {
        let f = FnField::new(1, |_: &[f64]| MetricTensor::diagonal(&[0.25], 1.0));
        let rep = curvature_at(&f, &[0.2], DEFAULT_CURVATURE_STEP).unwrap();
        assert_eq!(rep.scalar, 0.0);
        assert!(rep.note.is_some());
    }

    #[test]
    fn singular_metric_is_rejected() {
        let f = FnField::new(2, |_: &[f64]| MetricTensor::diagonal(&[1.0, 0.0], 1.0));
        assert!(matches!(curvature_at(&f, &[0.0, 0.0], 1e-3), Err(Error::SingularMetric(_))));
    }

    #[test]
    fn g0_reproduces_printed_ricci() {
        for (omega, a12) in [(0.3, 0.0), (1.1, 0.4)] {
            let f = G0Field { alpha12: a12, gamma: 1.0 };
            let xi = [omega, 0.3, 0.2, 0.4];
            let rep = curvature_at(&f, &xi, DEFAULT_CURVATURE_STEP).unwrap();
            let ex = analytic_g0_and_ricci(omega, a12, 1.0).unwrap();
            assert!((rep.scalar - 14.0).abs() < 1e-3 * 14.0, "{}", rep.scalar);
            for i in 0..4 {
                for j in 0..4 {
                    assert!((rep.ricci[i][j] - ex.ricci[i][j]).abs() < 1e-4, "{i}{j}");
                }
            }
            assert!(rep.bianchi_error() < 1e-5);
        }
    }

    #[test]
    fn g0_is_the_uniform_case_of_the_general_metric() {
        let (a1, a2) = (0.7, -0.2);
        let eta = InitialCoefficients::from_polar([0.5; 4], [a1, a2, 0.3, 1.2]).unwrap();
        for omega in [0.1, 0.9] {
            let pt = ChartPoint::new(omega, 0.4, -0.5, 0.2);
            let g = analytic_metric_c7(&eta, &pt, 1.5).unwrap();
            let g0 = analytic_g0_and_ricci(omega, a1 - a2, 1.5).unwrap().metric;
            assert!(g.max_abs_diff(&g0).unwrap() < 1e-12);
        }
    }

    #[test]
    fn scale_covariance() {
        let a = curvature_at(&G0Field { alpha12: 0.0, gamma: 1.0 }, &[0.3, 0.0, 0.0, 0.0], 1e-3).unwrap();
        let b = curvature_at(&G0Field { alpha12: 0.0, gamma: 2.0 }, &[0.3, 0.0, 0.0, 0.0], 1e-3).unwrap();
        assert!((a.scalar / 4.0 - b.scalar).abs() < 1e-6);
    }

    #[test]
    fn two_dimensional_sphere_family() {
        let eta = InitialCoefficients::normalized([
            Complex64::new(0.8, 0.1),
            Complex64::new(0.3, -0.5),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap()
        .0;
        let fam = family_for(&eta, 0.0).unwrap();
        let field = FamilyField::new(&fam, 1.0);
        let xi = [0.4, 0.3];
        let rep = curvature_at(&field, &xi, DEFAULT_CURVATURE_STEP).unwrap();
        assert!((rep.scalar - 8.0).abs() < 1e-3, "{}", rep.scalar);
        let g = field.metric(&xi).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((rep.ricci[i][j] - rep.scalar / 2.0 * g.get(i, j)).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let f = G0Field { alpha12: 0.0, gamma: 1.0 };
        let xi = [1.1, 0.0, 0.0, 0.0];
        let r: Vec<f64> = [2e-2, 1e-2, 5e-3]
            .iter()
            .map(|&h| scalar_curvature_single_step(&f, &xi, h).unwrap())
            .collect();
        let ratio = (r[0] - r[1]).abs() / (r[1] - r[2]).abs();
        assert!((12.0..24.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn printed_perturbed_curvature() {
        let r0 = perturbed_scalar_curvature_closed_form(0.3, 0.0, 1.0).unwrap();
        assert!(r0.is_finite());
        assert!(perturbed_scalar_curvature_closed_form(0.7, 1e-4, 1.0).unwrap().is_finite());
        assert!(matches!(
            perturbed_scalar_curvature_closed_form(std::f64::consts::FRAC_PI_4, 1e-4, 1.0),
            Err(Error::Domain(_))
        ));
        let r2 = perturbed_scalar_curvature_closed_form(0.3, 0.0, 2.0).unwrap();
        assert!((r0 / 4.0 - r2).abs() < 1e-12);
    }

    #[test]
    fn product_curvature() {
        assert_eq!(sphere_torus_scalar_curvature(0.5, 1.0).unwrap(), 16.0);
    }
}

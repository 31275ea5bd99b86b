//! First-order transverse-field corrections to the Fubini–Study metric.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curvature::MetricField;
use crate::error::{Error, Result};
use crate::families::{family_for, ParametrizedState, StateFamily};
use crate::fubini_study::{analytic_metric_c7, numeric_fs_metric, MetricTensor};
use crate::hamiltonian::{energy_denominators, TwoQubitState, DEFAULT_RESONANCE_THRESHOLD};
use crate::model::{ChartPoint, InitialCoefficients};

/// Names of the ten independent components in the order they are reported.
pub const COMPONENTS: [(&str, usize, usize); 10] = [
    ("omega_omega", 0, 0),
    ("c3_c3", 2, 2),
    ("c_plus_c_plus", 3, 3),
    ("phi_phi", 1, 1),
    ("phi_omega", 1, 0),
    ("c3_omega", 2, 0),
    ("c_plus_omega", 3, 0),
    ("c3_phi", 2, 1),
    ("c_plus_phi", 3, 1),
    ("c_plus_c3", 3, 2),
];

/// Auxiliary functions Y± = (√(1−sin φ) ± √(1+sin φ))/(2c₃−c₊±ω)² and
/// X± = (√(1−sin φ) ± √(1+sin φ))/((2c₃−c₊)²−ω²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationAux {
    pub y_plus: f64,
    pub y_minus: f64,
    pub x_plus: f64,
    pub x_minus: f64,
}

pub fn perturbation_aux(pt: &ChartPoint, rho: f64) -> Result<PerturbationAux> {
    let [d1, d2] = energy_denominators(pt);
    if !(d1.abs() >= rho) {
        return Err(Error::Resonance { name: "2c3+omega-c_plus", value: d1 });
    }
    if !(d2.abs() >= rho) {
        return Err(Error::Resonance { name: "2c3-omega-c_plus", value: d2 });
    }
    let s = pt.phi.sin();
    let sm = (1.0 - s).max(0.0).sqrt();
    let sp = (1.0 + s).max(0.0).sqrt();
    let d0 = 2.0 * pt.c3 - pt.c_plus;
    let x_den = d0 * d0 - pt.omega * pt.omega;
    Ok(PerturbationAux {
        y_plus: (sm + sp) / (d0 + pt.omega).powi(2),
        y_minus: (sm - sp) / (d0 - pt.omega).powi(2),
        x_plus: (sm + sp) / x_den,
        x_minus: (sm - sp) / x_den,
    })
}

/// Printed first-order correction h with g = g⁽⁰⁾ + βh, in (ω, φ, c₃, c₊).
/// The result is symmetric but not definite.
pub fn metric_correction_analytic(
    eta: &InitialCoefficients,
    pt: &ChartPoint,
    gamma: f64,
    rho: f64,
) -> Result<MetricTensor> {
    let aux = perturbation_aux(pt, rho)?;
    let PerturbationAux { y_plus: yp, y_minus: ym, x_plus: xp, x_minus: xm } = aux;
    let (p12, m12, p34, m34) = (eta.eta12_plus(), eta.eta12_minus(), eta.eta34_plus(), eta.eta34_minus());
    let j = eta.j_at(pt.omega);
    let w = pt.omega;
    let e = eta.as_array();
    let z1 = e[0] * e[2].conj() * Complex64::from_polar(1.0, -(2.0 * pt.c3 + w - pt.c_plus));
    let z2 = e[1] * e[2].conj() * Complex64::from_polar(1.0, -(2.0 * pt.c3 - w - pt.c_plus));
    let (i1, i2, r1, r2) = (z1.im, z2.im, z1.re, z2.re);
    let sy = i1 * yp + i2 * ym;

    let ww = 2.0 * ((1.0 - 2.0 * m12) * i1 * yp + (1.0 + 2.0 * m12) * i2 * ym);
    let c3c3 = -8.0 * (p12 - p34) * sy;
    let cpcp = -2.0 * (1.0 - 2.0 * m34) * sy;
    let ff = w * ((4.0 * j * i1 - r2) * xm + (4.0 * j * i2 + r1) * xp);
    let fw = w * (1.0 - m12) * i1 * xm - w * (1.0 + m12) * i2 * xp
        - (0.5 * r1 + 2.0 * j * i2) * ym
        - (0.5 * r2 - 2.0 * j * i1) * yp;
    let c3w = 4.0 * ((p34 - m12) * i1 * yp - (p34 + m12) * i2 * ym);
    let cpw = 2.0 * ((m12 - m34) * i1 * yp + (m12 + m34) * i2 * ym);
    let c3f = -2.0 * w * (p12 - p34) * (i1 * xm + i2 * xp) + (r1 + 4.0 * j * i2) * ym
        - (r2 - 4.0 * j * i1) * yp;
    let cpf = w * (1.0 - 2.0 * m34) * (i1 * xm + i2 * xp) - (0.5 * r1 + 2.0 * j * i2) * ym
        + (0.5 * r2 - 2.0 * j * i1) * yp;
    let cpc3 = 2.0 * (2.0 * p12 - m34) * sy;

    let vals = [ww, c3c3, cpcp, ff, fw, c3w, cpw, c3f, cpf, cpc3];
    let mut h = [[0.0; 4]; 4];
    for ((_, a, b), v) in COMPONENTS.iter().zip(vals) {
        h[*a][*b] = v;
        h[*b][*a] = v;
    }
    let g2 = gamma * gamma;
    MetricTensor::from_fn(4, gamma, |a, b| g2 * h[a][b])
}

/// g = g⁽⁰⁾ + βh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbedMetric {
    pub base: MetricTensor,
    pub correction: MetricTensor,
    pub beta: f64,
}

impl PerturbedMetric {
    pub fn assembled(&self) -> Result<MetricTensor> {
        let n = self.base.dim();
        MetricTensor::from_fn(n, self.base.gamma(), |i, j| {
            self.base.get(i, j) + self.beta * self.correction.get(i, j)
        })
    }
}

/// Closed-form perturbed metric of the general family. β = 0 returns the base with a zero correction.
pub fn perturbed_metric_analytic(
    eta: &InitialCoefficients,
    pt: &ChartPoint,
    gamma: f64,
    beta: f64,
) -> Result<PerturbedMetric> {
    let base = analytic_metric_c7(eta, pt, gamma)?;
    let correction = if beta == 0.0 {
        MetricTensor::from_fn(4, gamma, |_, _| 0.0)?
    } else {
        metric_correction_analytic(eta, pt, gamma, DEFAULT_RESONANCE_THRESHOLD)?
    };
    Ok(PerturbedMetric { base, correction, beta })
}

/// Numeric metric of the family with its own β (renormalized perturbed states).
pub fn perturbed_metric_numeric(f: &StateFamily, xi: &[f64], gamma: f64, h: f64) -> Result<MetricTensor> {
    numeric_fs_metric(f, xi, gamma, h)
}

fn plain_derivatives(
    fun: &dyn Fn(&[f64]) -> Result<TwoQubitState>,
    xi: &[f64],
    h: f64,
) -> Result<Vec<TwoQubitState>> {
    (0..xi.len())
        .map(|mu| {
            let at = |k: f64| {
                let mut x = xi.to_vec();
                x[mu] += k * h;
                fun(&x)
            };
            Ok((at(-2.0)? - at(2.0)? + (at(1.0)? - at(-1.0)?) * 8.0) * (1.0 / (12.0 * h)))
        })
        .collect()
}

/// Exact first-order derivative dg/dβ at β = 0.
///
/// The family is affine in β before normalization, ψ(β) ∝ ψ₀ + βD, so to first order
/// ψ(β) = ψ₀ + βψ′ with ψ′ = D − Re⟨ψ₀|D⟩ψ₀. Differentiating the metric bilinear form
/// gives dg/dβ without any difference quotient in β.
pub fn metric_derivative_beta(f: &StateFamily, xi: &[f64], gamma: f64, h: f64) -> Result<MetricTensor> {
    if !(1e-7..=1e-3).contains(&h) {
        return Err(Error::InvalidArgument(format!("metric step h = {h:e} outside [1e-7, 1e-3]")));
    }
    let f0 = f.with_beta(0.0);
    let psi0_fn = |x: &[f64]| f0.raw(x, 0.0);
    let prime_fn = |x: &[f64]| -> Result<TwoQubitState> {
        let p0 = f0.raw(x, 0.0)?;
        let d = f0.first_order_direction(x)?;
        Ok(d - p0 * p0.inner(&d).re)
    };
    let psi = psi0_fn(xi)?;
    if (psi.norm_sqr() - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(psi.norm_sqr()));
    }
    let pp = prime_fn(xi)?;
    let d0 = plain_derivatives(&psi0_fn, xi, h)?;
    let d1 = plain_derivatives(&prime_fn, xi, h)?;
    let n = xi.len();
    let g2 = gamma * gamma;
    let entry = |a: usize, b: usize| -> f64 {
        let (da, db, pa, pb) = (&d0[a], &d0[b], &d1[a], &d1[b]);
        (pa.inner(db) + da.inner(pb)
            - pa.inner(&psi) * psi.inner(db)
            - da.inner(&pp) * psi.inner(db)
            - da.inner(&psi) * pp.inner(db)
            - da.inner(&psi) * psi.inner(pb))
        .re
    };
    MetricTensor::from_fn(n, gamma, |a, b| 0.5 * g2 * (entry(a, b) + entry(b, a)))
}

/// Verdict on one component of the printed correction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentAudit {
    pub component: String,
    pub max_relative_error: f64,
    pub max_abs_error: f64,
    pub samples: usize,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectionAudit {
    pub tolerance: f64,
    pub points: usize,
    pub components: Vec<ComponentAudit>,
}

impl CorrectionAudit {
    pub fn agreeing(&self) -> usize {
        self.components.iter().filter(|c| c.agrees).count()
    }
}

/// Random (η, ξ) pairs with full complex η, cos φ > 0 and both denominators at least `tube` from zero.
pub fn audit_points(seed: u64, count: usize, tube: f64) -> Vec<(InitialCoefficients, ChartPoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let raw = [(); 4].map(|_| Complex64::from_polar(rng.gen_range(0.2..1.0), rng.gen_range(-3.1..3.1)));
        let eta = InitialCoefficients::normalized(raw).expect("nonzero draw").0;
        let pt = ChartPoint::new(
            rng.gen_range(0.2..1.2),
            rng.gen_range(-1.3..1.3),
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-1.5..1.5),
        );
        if energy_denominators(&pt).iter().all(|d| d.abs() >= tube) {
            out.push((eta, pt));
        }
    }
    out
}

/// Compares each printed component with the exact numeric dg/dβ.
pub fn audit_correction(
    points: &[(InitialCoefficients, ChartPoint)],
    gamma: f64,
    h: f64,
    tol: f64,
) -> Result<CorrectionAudit> {
    let mut rel = [0.0_f64; 10];
    let mut abs = [0.0_f64; 10];
    for (eta, pt) in points {
        let fam = family_for(eta, 0.0)?;
        let num = metric_derivative_beta(&fam, &pt.to_array(), gamma, h)?;
        let ana = metric_correction_analytic(eta, pt, gamma, DEFAULT_RESONANCE_THRESHOLD)?;
        for (k, (_, a, b)) in COMPONENTS.iter().enumerate() {
            let (x, y) = (ana.get(*a, *b), num.get(*a, *b));
            let e = (x - y).abs();
            abs[k] = abs[k].max(e);
            rel[k] = rel[k].max(e / x.abs().max(y.abs()).max(1e-9));
        }
    }
    let components = COMPONENTS
        .iter()
        .enumerate()
        .map(|(k, (name, _, _))| ComponentAudit {
            component: name.to_string(),
            max_relative_error: rel[k],
            max_abs_error: abs[k],
            samples: points.len(),
            agrees: rel[k] <= tol,
        })
        .collect();
    Ok(CorrectionAudit { tolerance: tol, points: points.len(), components })
}

/// Linear-in-β check of the numeric perturbed metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearityReport {
    pub betas: Vec<f64>,
    /// Least-squares slope through the origin per entry, flattened row-major.
    pub slope: Vec<f64>,
    /// max |Δg(β) − sβ| / (max|s| β) over β and entries.
    pub relative_residual: f64,
    /// max |s − dg/dβ| / max|s| against the exact first-order derivative.
    pub derivative_mismatch: f64,
}

pub fn linearity_check(f: &StateFamily, xi: &[f64], gamma: f64, betas: &[f64], h: f64) -> Result<LinearityReport> {
    let g0 = numeric_fs_metric(&f.with_beta(0.0), xi, gamma, h)?;
    let n = g0.dim();
    let deltas: Vec<Vec<f64>> = betas
        .iter()
        .map(|&b| {
            let g = numeric_fs_metric(&f.with_beta(b), xi, gamma, h)?;
            Ok((0..n * n).map(|k| g.get(k / n, k % n) - g0.get(k / n, k % n)).collect())
        })
        .collect::<Result<_>>()?;
    let bb: f64 = betas.iter().map(|b| b * b).sum();
    let slope: Vec<f64> = (0..n * n)
        .map(|k| betas.iter().zip(&deltas).map(|(b, d)| b * d[k]).sum::<f64>() / bb)
        .collect();
    let smax = slope.iter().fold(0.0_f64, |m, s| m.max(s.abs())).max(1e-300);
    let mut resid: f64 = 0.0;
    for (b, d) in betas.iter().zip(&deltas) {
        for k in 0..n * n {
            resid = resid.max((d[k] - slope[k] * b).abs() / (smax * b));
        }
    }
    let exact = metric_derivative_beta(f, xi, gamma, h)?;
    let mismatch = (0..n * n)
        .map(|k| (slope[k] - exact.get(k / n, k % n)).abs())
        .fold(0.0_f64, f64::max)
        / smax;
    Ok(LinearityReport { betas: betas.to_vec(), slope, relative_residual: resid, derivative_mismatch: mismatch })
}

/// Which first-order correction the ω-slice field uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionSource {
    Printed,
    Numeric,
}

/// The uniform-magnitude metric g⁽⁰⁾ + βh with η = (½, ½, ½, ½) and h evaluated at
/// (ω, 0, 0, 0): a field on the full chart that depends on ω only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedSliceField {
    pub beta: f64,
    pub gamma: f64,
    pub source: CorrectionSource,
    pub h_metric: f64,
}

impl PerturbedSliceField {
    pub fn new(beta: f64, gamma: f64, source: CorrectionSource) -> Self {
        Self { beta, gamma, source, h_metric: 1e-5 }
    }

    fn eta() -> InitialCoefficients {
        InitialCoefficients::from_real([0.5; 4]).expect("uniform coefficients are normalized")
    }
}

impl MetricField for PerturbedSliceField {
    fn dim(&self) -> usize {
        4
    }

    fn metric(&self, xi: &[f64]) -> Result<MetricTensor> {
        if xi.len() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, got: xi.len() });
        }
        let eta = Self::eta();
        let pt = ChartPoint::new(xi[0], 0.0, 0.0, 0.0);
        let base = analytic_metric_c7(&eta, &pt, self.gamma)?;
        if self.beta == 0.0 {
            return Ok(base);
        }
        let corr = match self.source {
            CorrectionSource::Printed => metric_correction_analytic(&eta, &pt, self.gamma, DEFAULT_RESONANCE_THRESHOLD)?,
            CorrectionSource::Numeric => {
                let fam = family_for(&eta, 0.0)?;
                metric_derivative_beta(&fam, &pt.to_array(), self.gamma, self.h_metric)?
            }
        };
        PerturbedMetric { base, correction: corr, beta: self.beta }.assembled()
    }
}

/// Frobenius norm of dg/dβ for a family in its own chart.
pub fn correction_norm(f: &StateFamily, xi: &[f64], gamma: f64, h: f64) -> Result<f64> {
    let d = metric_derivative_beta(f, xi, gamma, h)?;
    let n = f.dim();
    Ok((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| d.get(i, j).powi(2)).sum::<f64>().sqrt())
}

/// True for the coefficient patterns whose orbit keeps its metric at first order: those
/// without η₃ together with an η₁ or η₂ partner, since δψ₄ = 0 and δψ₁, δψ₂ only feed ψ₃.
pub fn is_unperturbed_pattern(f: &StateFamily) -> bool {
    use crate::model::CaseClass::*;
    matches!(f.case(), C1 | C2 { .. } | C3 | C4 { j: 4, .. })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::family_for_case;
    use crate::fubini_study::DEFAULT_METRIC_STEP;
    use crate::model::CaseClass;

    #[test]
    fn aux_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let pt = ChartPoint::new(
                rng.gen_range(0.1..2.0),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let Ok(a) = perturbation_aux(&pt, 1e-3) else { continue };
            let d0 = 2.0 * pt.c3 - pt.c_plus;
            let num = (1.0 - pt.phi.sin()).sqrt() + (1.0 + pt.phi.sin()).sqrt();
            let back = a.x_plus * (d0 + pt.omega).powi(2) * (d0 - pt.omega).powi(2) / (d0 * d0 - pt.omega.powi(2));
            assert!((back - num).abs() < 1e-10 * num.max(1.0) * back.abs().max(1.0));
            assert!((a.y_plus * (d0 + pt.omega).powi(2) - num).abs() < 1e-12);
        }
    }

    #[test]
    fn resonance_is_an_error() {
        let pt = ChartPoint::new(0.5, 0.1, 0.25, 0.0);
        assert!(matches!(perturbation_aux(&pt, 1e-6), Err(Error::Resonance { .. })));
    }

    #[test]
    fn zero_beta_is_the_base() {
        let eta = InitialCoefficients::from_real([0.5; 4]).unwrap();
        let pt = ChartPoint::new(0.4, 0.2, 0.5, 0.1);
        let p = perturbed_metric_analytic(&eta, &pt, 1.0, 0.0).unwrap();
        assert_eq!(p.assembled().unwrap(), analytic_metric_c7(&eta, &pt, 1.0).unwrap());
    }

    #[test]
    fn printed_correction_vanishes_without_eta3() {
        let eta = InitialCoefficients::from_real([0.6, 0.0, 0.0, 0.8]).unwrap();
        let h = metric_correction_analytic(&eta, &ChartPoint::new(0.4, 0.2, 0.9, 0.1), 1.0, 1e-6).unwrap();
        assert_eq!(h.max_abs_diff(&MetricTensor::from_fn(4, 1.0, |_, _| 0.0).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn exact_derivative_matches_difference_quotient() {
        let (eta, pt) = audit_points(4, 1, 0.1)[0];
        let fam = family_for(&eta, 0.0).unwrap();
        let xi = pt.to_array();
        let exact = metric_derivative_beta(&fam, &xi, 1.0, DEFAULT_METRIC_STEP).unwrap();
        let b = 1e-4;
        let gp = numeric_fs_metric(&fam.with_beta(b), &xi, 1.0, DEFAULT_METRIC_STEP).unwrap();
        let gm = numeric_fs_metric(&fam.with_beta(-b), &xi, 1.0, DEFAULT_METRIC_STEP).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let fd = (gp.get(i, j) - gm.get(i, j)) / (2.0 * b);
                assert!((fd - exact.get(i, j)).abs() < 1e-5 * exact.get(i, j).abs().max(1.0), "{i}{j}");
            }
        }
    }

    #[test]
    fn most_printed_components_agree() {
        let pts = audit_points(7, 6, 1e-2);
        let audit = audit_correction(&pts, 1.0, DEFAULT_METRIC_STEP, 1e-3).unwrap();
        let verdict: Vec<(&str, bool)> = audit.components.iter().map(|c| (c.component.as_str(), c.agrees)).collect();
        assert_eq!(audit.agreeing(), 8, "{verdict:?}");
        assert!(!audit.components[4].agrees, "phi_omega");
        assert!(!audit.components[9].agrees, "c_plus_c3");
    }

    #[test]
    fn unperturbed_patterns() {
        let spect = ChartPoint::new(0.7, 0.3, 1.1, 0.2);
        let cases: [(CaseClass, [f64; 4]); 5] = [
            (CaseClass::C1, [0.0, 0.0, 0.6, 0.8]),
            (CaseClass::C2 { l: 1 }, [1.0, 0.0, 0.0, 0.0]),
            (CaseClass::C3, [0.6, 0.8, 0.0, 0.0]),
            (CaseClass::C4 { l: 1, j: 4 }, [0.6, 0.0, 0.0, 0.8]),
            (CaseClass::C4 { l: 2, j: 4 }, [0.0, 0.6, 0.0, 0.8]),
        ];
        for (case, raw) in cases {
            let eta = InitialCoefficients::from_real(raw).unwrap();
            let f = family_for_case(case, &eta, 0.0).unwrap().with_spectator(spect);
            assert!(is_unperturbed_pattern(&f));
            let xi = f.chart_coordinates(&spect);
            let n = correction_norm(&f, &xi, 1.0, DEFAULT_METRIC_STEP).unwrap();
            assert!(n < 1e-9, "{case}: {n}");
        }
    }

    #[test]
    fn c4_with_eta3_is_perturbed() {
        let spect = ChartPoint::new(0.7, 0.3, 1.1, 0.2);
        let eta = InitialCoefficients::from_real([0.0, 0.6, 0.8, 0.0]).unwrap();
        let f = family_for(&eta, 0.0).unwrap().with_spectator(spect);
        let n = correction_norm(&f, &f.chart_coordinates(&spect), 1.0, DEFAULT_METRIC_STEP).unwrap();
        assert!(n > 1e-3);
    }

    #[test]
    fn linear_leading_behaviour() {
        let (eta, pt) = audit_points(9, 1, 0.1)[0];
        let f = family_for(&eta, 0.0).unwrap();
        let rep = linearity_check(&f, &pt.to_array(), 1.0, &[1e-4, 2e-4, 4e-4], DEFAULT_METRIC_STEP).unwrap();
        assert!(rep.relative_residual < 1e-2, "{rep:?}");
        assert!(rep.derivative_mismatch < 1e-2);
    }

    #[test]
    fn continuity_in_beta() {
        let (eta, pt) = audit_points(12, 1, 0.1)[0];
        let xi = pt.to_array();
        let f = family_for(&eta, 0.0).unwrap();
        let g0 = numeric_fs_metric(&f, &xi, 1.0, DEFAULT_METRIC_STEP).unwrap();
        let k: Vec<f64> = [1e-3, 1e-4, 1e-5]
            .iter()
            .map(|&b| {
                let g = numeric_fs_metric(&f.with_beta(b), &xi, 1.0, DEFAULT_METRIC_STEP).unwrap();
                g.max_abs_diff(&g0).unwrap() / b
            })
            .collect();
        assert!((k[0] / k[2] - 1.0).abs() < 0.1, "{k:?}");
    }
}

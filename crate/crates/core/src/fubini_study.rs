//! Fubini–Study metric: finite-difference evaluation on any family and the closed forms.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::families::{evolved_state, FnFamily, ParametrizedState, StateFamily};
use crate::hamiltonian::TwoQubitState;
use crate::model::{CaseClass, ChartPoint, Coord, InitialCoefficients};

/// Default finite-difference step for first derivatives of states.
pub const DEFAULT_METRIC_STEP: f64 = 1e-5;

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-9;
const SINGULAR_TOL: f64 = 1e-12;

/// A symmetric metric tensor of dimension 1–4. Entries already carry the factor γ².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricTensor {
    dim: usize,
    g: [[f64; 4]; 4],
    gamma: f64,
}

impl Serialize for MetricTensor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("MetricTensor", 3)?;
        st.serialize_field("dim", &self.dim)?;
        st.serialize_field("gamma", &self.gamma)?;
        st.serialize_field("entries", &self.rows())?;
        st.end()
    }
}

impl MetricTensor {
    /// Builds a tensor from rows; rejects asymmetric input and symmetrizes the rest.
    pub fn new(rows: &[Vec<f64>], gamma: f64) -> Result<Self> {
        let dim = rows.len();
        if !(1..=4).contains(&dim) {
            return Err(Error::InvalidArgument(format!("metric dimension {dim} outside 1..=4")));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: r.len() });
        }
        Self::from_fn(dim, gamma, |i, j| rows[i][j])
    }

    pub fn from_fn(dim: usize, gamma: f64, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
        }
        let mut g = [[0.0; 4]; 4];
        let mut scale: f64 = 1.0;
        for i in 0..dim {
            for j in 0..dim {
                g[i][j] = f(i, j);
                if !g[i][j].is_finite() {
                    return Err(Error::NonFinite("metric entry"));
                }
                scale = scale.max(g[i][j].abs());
            }
        }
        for i in 0..dim {
            for j in 0..i {
                if (g[i][j] - g[j][i]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidArgument(format!(
                        "metric not symmetric at ({i},{j}): {} vs {}",
                        g[i][j], g[j][i]
                    )));
                }
                let m = 0.5 * (g[i][j] + g[j][i]);
                g[i][j] = m;
                g[j][i] = m;
            }
        }
        Ok(Self { dim, g, gamma })
    }

    pub fn diagonal(diag: &[f64], gamma: f64) -> Result<Self> {
        Self::from_fn(diag.len(), gamma, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.dim && j < self.dim, "index ({i},{j}) out of range for dim {}", self.dim);
        self.g[i][j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.g[i][..self.dim].to_vec()).collect()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.g[i][j])
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.to_matrix().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn is_positive_semidefinite(&self) -> bool {
        self.min_eigenvalue() >= -PSD_TOL
    }

    /// Coordinates whose diagonal entry is negligible: the ray does not move along them.
    pub fn degenerate_directions(&self, tol: f64) -> Vec<usize> {
        (0..self.dim).filter(|&i| self.g[i][i].abs() <= tol).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let mut m: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m = m.max((self.g[i][j] - other.g[i][j]).abs());
            }
        }
        Ok(m)
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    m = m.max(self.g[i][j].abs());
                }
            }
        }
        m
    }

    /// Inverse metric; fails when the smallest eigenvalue is below 1e-10 in magnitude.
    pub fn inverse(&self) -> Result<[[f64; 4]; 4]> {
        let min = self.eigenvalues().iter().fold(f64::INFINITY, |a, e| a.min(e.abs()));
        if min < 1e-10 {
            return Err(Error::SingularMetric(min));
        }
        let inv = self.to_matrix().try_inverse().ok_or(Error::SingularMetric(min))?;
        let mut out = [[0.0; 4]; 4];
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[i][j] = inv[(i, j)];
            }
        }
        Ok(out)
    }

    /// Condition number from the eigenvalue magnitudes.
    pub fn condition_number(&self) -> f64 {
        let ev = self.eigenvalues();
        let abs: Vec<f64> = ev.iter().map(|e| e.abs()).collect();
        let max = abs.iter().cloned().fold(0.0, f64::max);
        let min = abs.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }

    /// Congruence transform Tᵀ g T with a dim×dim matrix T.
    pub fn congruence(&self, t: &[[f64; 4]; 4]) -> Result<Self> {
        let n = self.dim;
        let tm = DMatrix::from_fn(n, n, |i, j| t[i][j]);
        let out = tm.transpose() * self.to_matrix() * tm;
        Self::from_fn(n, self.gamma, |i, j| out[(i, j)])
    }

    /// Restriction to a subset of coordinates, in the given order.
    pub fn restrict(&self, idx: &[usize]) -> Result<Self> {
        Self::from_fn(idx.len(), self.gamma, |i, j| self.g[idx[i]][idx[j]])
    }

    /// Returns the tensor multiplied entrywise by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::from_fn(self.dim, self.gamma, |i, j| k * self.g[i][j])
    }
}

fn stencil_point(xi: &[f64], mu: usize, dx: f64) -> Vec<f64> {
    let mut x = xi.to_vec();
    x[mu] += dx;
    x
}

/// The state at ξ and its fourth-order central-difference derivatives.
///
/// Every stencil state is rephased so that its overlap with ψ(ξ) is real and positive
/// before differencing; this picks a smooth gauge and keeps ⟨ψ|∂ψ⟩ small.
pub fn state_derivatives<P: ParametrizedState + ?Sized>(
    f: &P,
    xi: &[f64],
    h: f64,
) -> Result<(TwoQubitState, Vec<TwoQubitState>)> {
    if xi.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: xi.len() });
    }
    if !(1e-7..=1e-3).contains(&h) {
        return Err(Error::InvalidArgument(format!("metric step h = {h:e} outside [1e-7, 1e-3]")));
    }
    let psi = f.state(xi)?;
    let mut d = Vec::with_capacity(xi.len());
    for mu in 0..xi.len() {
        let at = |k: f64| -> Result<TwoQubitState> {
            Ok(f.state(&stencil_point(xi, mu, k * h))?.aligned_to(&psi))
        };
        let (p2, p1, m1, m2) = (at(2.0)?, at(1.0)?, at(-1.0)?, at(-2.0)?);
        let dmu = (m2 - p2 + (p1 - m1) * 8.0) * (1.0 / (12.0 * h));
        if !dmu.is_finite() {
            return Err(Error::ChartSingular(f.coordinate_name(mu)));
        }
        d.push(dmu);
    }
    Ok((psi, d))
}

/// Re(⟨a|b⟩ − ⟨a|ψ⟩⟨ψ|b⟩).
pub(crate) fn fs_form(psi: &TwoQubitState, a: &TwoQubitState, b: &TwoQubitState) -> f64 {
    (a.inner(b) - a.inner(psi) * psi.inner(b)).re
}

/// Numeric Fubini–Study metric γ²Re(⟨∂_μψ|∂_νψ⟩ − ⟨∂_μψ|ψ⟩⟨ψ|∂_νψ⟩) at ξ.
pub fn numeric_fs_metric<P: ParametrizedState + ?Sized>(
    f: &P,
    xi: &[f64],
    gamma: f64,
    h: f64,
) -> Result<MetricTensor> {
    let (psi, d) = state_derivatives(f, xi, h)?;
    let n = d.len();
    let g2 = gamma * gamma;
    MetricTensor::from_fn(n, gamma, |i, j| {
        0.5 * g2 * (fs_form(&psi, &d[i], &d[j]) + fs_form(&psi, &d[j], &d[i]))
    })
}

/// Closed-form metric of the general evolved state in the chart (ω, φ, c₃, c₊).
/// Valid on the half-plane cos φ > 0 where the eigenvector branch is smooth.
pub fn analytic_metric_c7(eta: &InitialCoefficients, pt: &ChartPoint, gamma: f64) -> Result<MetricTensor> {
    let (p12, m12, p34, m34) = (eta.eta12_plus(), eta.eta12_minus(), eta.eta34_plus(), eta.eta34_minus());
    let j = eta.j_at(pt.omega);
    let rows = [
        [p12 - m12 * m12, m12 * j, 2.0 * m12 * p34, -m12 * m34],
        [m12 * j, p12 / 4.0 - j * j, -2.0 * j * p34, j * m34],
        [2.0 * m12 * p34, -2.0 * j * p34, 4.0 * p12 * p34, -2.0 * p12 * m34],
        [-m12 * m34, j * m34, -2.0 * p12 * m34, p34 - m34 * m34],
    ];
    let g2 = gamma * gamma;
    MetricTensor::from_fn(4, gamma, |i, k| g2 * rows[i][k])
}

/// The θ substitution J = (η₁₂⁺/2)cos θ at a given ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaSubstitution {
    pub theta: f64,
    /// dω/dθ along the substitution.
    pub domega_dtheta: f64,
}

/// The linear change of coordinates that brings the general metric to diagonal form:
/// ω = ω′, φ = k₁ω′ + φ′, c₃ = k₂ω′ + k₃φ′ + c₃′, c₊ = k₄c₃′ + c₊′,
/// optionally followed by trading ω′ for θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagonalizingTransform {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub omega: f64,
    pub theta: Option<ThetaSubstitution>,
}

/// Coefficients of the diagonalizing transform at ω. The k's depend on ω through J.
pub fn diagonalize_metric(eta: &InitialCoefficients, omega: f64) -> Result<DiagonalizingTransform> {
    let (p12, m12, p34, m34) = (eta.eta12_plus(), eta.eta12_minus(), eta.eta34_plus(), eta.eta34_minus());
    let j = eta.j_at(omega);
    let d1 = 4.0 * j * j - p12 * p12;
    if d1.abs() < SINGULAR_TOL {
        return Err(Error::TransformSingular("4J^2-(eta12+)^2"));
    }
    if p12.abs() < SINGULAR_TOL {
        return Err(Error::TransformSingular("eta12+"));
    }
    // Without η₃, η₄ the coordinate c₊ drops out and k₄ is irrelevant.
    let d4 = p34 - m34 * m34;
    let k4 = if p34 < SINGULAR_TOL {
        0.0
    } else if d4.abs() < SINGULAR_TOL {
        return Err(Error::TransformSingular("eta34+-(eta34-)^2"));
    } else {
        2.0 * p12 * m34 / d4
    };
    let theta = {
        let e12 = eta.get(0) * eta.get(1).conj() * Complex64::from_polar(1.0, -2.0 * omega);
        let dj = -2.0 * e12.re;
        let cos_t = (2.0 * j / p12).clamp(-1.0, 1.0);
        let theta = cos_t.acos();
        (dj.abs() >= SINGULAR_TOL).then(|| ThetaSubstitution {
            theta,
            domega_dtheta: -(p12 / 2.0) * theta.sin() / dj,
        })
    };
    Ok(DiagonalizingTransform {
        k1: 4.0 * m12 * j / d1,
        k2: p12 * m12 / (2.0 * d1),
        k3: j / (2.0 * p12),
        k4,
        omega,
        theta,
    })
}

impl DiagonalizingTransform {
    /// ∂(ω, φ, c₃, c₊)/∂(ω′, φ′, c₃′, c₊′).
    pub fn jacobian(&self) -> [[f64; 4]; 4] {
        [
            [1.0, 0.0, 0.0, 0.0],
            [self.k1, 1.0, 0.0, 0.0],
            [self.k2, self.k3, 1.0, 0.0],
            [0.0, 0.0, self.k4, 1.0],
        ]
    }

    /// Pulls a metric in (ω, φ, c₃, c₊) back to (θ, φ′, c₃′, c₊′), or to
    /// (ω′, φ′, c₃′, c₊′) when the θ substitution is unavailable.
    pub fn pushforward(&self, g: &MetricTensor) -> Result<MetricTensor> {
        if g.dim() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, got: g.dim() });
        }
        let gp = g.congruence(&self.jacobian())?;
        match self.theta {
            None => Ok(gp),
            Some(t) => {
                let s = |i: usize| if i == 0 { t.domega_dtheta } else { 1.0 };
                MetricTensor::from_fn(4, g.gamma(), |i, j| gp.get(i, j) * s(i) * s(j))
            }
        }
    }

    /// New coordinates (ω′ or θ, φ′, c₃′, c₊′) of a chart point.
    pub fn transformed_point(&self, pt: &ChartPoint) -> [f64; 4] {
        let phi_p = pt.phi - self.k1 * pt.omega;
        let c3_p = pt.c3 - self.k2 * pt.omega - self.k3 * phi_p;
        let cp_p = pt.c_plus - self.k4 * c3_p;
        let first = self.theta.map_or(pt.omega, |t| t.theta);
        [first, phi_p, c3_p, cp_p]
    }

    pub fn chart(&self) -> [Coord; 4] {
        let first = if self.theta.is_some() { Coord::Theta } else { Coord::Omega };
        [first, Coord::PhiPrime, Coord::C3Prime, Coord::CPlusPrime]
    }
}

/// Diagonal form of the general metric after the transform and θ substitution.
pub fn diagonal_metric_c7(eta: &InitialCoefficients, theta: f64, gamma: f64) -> Result<MetricTensor> {
    let (p12, p34, m34) = (eta.eta12_plus(), eta.eta34_plus(), eta.eta34_minus());
    let d4 = p34 - m34 * m34;
    if d4.abs() < SINGULAR_TOL {
        return Err(Error::TransformSingular("eta34+-(eta34-)^2"));
    }
    let g2 = gamma * gamma;
    MetricTensor::diagonal(
        &[
            g2 * p12 / 4.0,
            g2 * p12 * theta.sin().powi(2) / 4.0,
            4.0 * g2 * p12 * (p34 * p34 - m34 * m34) / d4,
            g2 * d4,
        ],
        gamma,
    )
}

/// Coefficients (a, b) of the C5 relation c = a ω′ + b φ′ + c′.
pub fn c5_chart_relation(eta: &InitialCoefficients, theta: f64) -> Result<[f64; 2]> {
    let s2 = theta.sin().powi(2);
    if s2 < SINGULAR_TOL {
        return Err(Error::TransformSingular("sin(theta)"));
    }
    let (p12, m12) = (eta.eta12_plus(), eta.eta12_minus());
    Ok([-m12 / (2.0 * p12 * s2), theta.cos() / 4.0])
}

/// Coefficient k of the C6 relation c₊ = k c′ + c₊′.
pub fn c6_chart_relation(eta: &InitialCoefficients, l: u8) -> Result<f64> {
    let (p34, m34) = (eta.eta34_plus(), eta.eta34_minus());
    let d = p34 - m34 * m34;
    if d.abs() < SINGULAR_TOL {
        return Err(Error::TransformSingular("eta34+-(eta34-)^2"));
    }
    Ok(2.0 * eta.abs2(l as usize - 1) * m34 / d)
}

/// A closed-form metric with the chart it is expressed in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseMetric {
    pub case: CaseClass,
    pub chart: Vec<Coord>,
    pub point: Vec<f64>,
    pub metric: MetricTensor,
}

/// The per-case closed-form metric as printed for each geometry.
///
/// C1, C2, C4 and C6 are returned in their family charts (C6 after the c₊ shift);
/// C3, C5 and C7 in the diagonal θ charts. `xi` is given in the family chart.
pub fn analytic_metric_case(f: &StateFamily, xi: &[f64], gamma: f64) -> Result<CaseMetric> {
    if f.beta() != 0.0 {
        return Err(Error::UnsupportedChart("closed forms describe the unperturbed family".into()));
    }
    let pt = f.full_point(xi)?;
    let eta = f.eta();
    let g2 = gamma * gamma;
    let (p12, p34, m34) = (eta.eta12_plus(), eta.eta34_plus(), eta.eta34_minus());
    let case = f.case();
    let (chart, point, diag) = match case {
        CaseClass::C1 => (vec![Coord::CPlus], xi.to_vec(), vec![g2 * (p34 - m34 * m34)]),
        CaseClass::C2 { .. } => (vec![Coord::Phi], xi.to_vec(), vec![g2 * p12 / 4.0]),
        CaseClass::C3 => {
            let t = diagonalize_metric(eta, pt.omega)?;
            let th = t.theta.ok_or(Error::TransformSingular("dJ/domega"))?.theta;
            let tp = t.transformed_point(&pt);
            (
                vec![Coord::Theta, Coord::PhiPrime],
                vec![th, tp[1]],
                vec![g2 * p12 / 4.0, g2 * p12 * th.sin().powi(2) / 4.0],
            )
        }
        CaseClass::C4 { l, j } => {
            let (al, aj) = (eta.abs2(l as usize - 1), eta.abs2(j as usize - 1));
            (vec![Coord::Phi, Coord::C], xi.to_vec(), vec![g2 * al / 4.0, 9.0 * g2 * al * aj])
        }
        CaseClass::C5 { j } => {
            let t = diagonalize_metric(eta, pt.omega)?;
            let th = t.theta.ok_or(Error::TransformSingular("dJ/domega"))?.theta;
            let phi_p = pt.phi - t.k1 * pt.omega;
            let [a, b] = c5_chart_relation(eta, th)?;
            let c_p = xi[2] - a * pt.omega - b * phi_p;
            let aj = eta.abs2(j as usize - 1);
            (
                vec![Coord::Theta, Coord::PhiPrime, Coord::CPrime],
                vec![th, phi_p, c_p],
                vec![g2 * p12 / 4.0, g2 * p12 * th.sin().powi(2) / 4.0, 4.0 * g2 * p12 * aj],
            )
        }
        CaseClass::C6 { l } => {
            let al = eta.abs2(l as usize - 1);
            let k = c6_chart_relation(eta, l)?;
            let d = p34 - m34 * m34;
            (
                vec![Coord::Phi, Coord::CPrime, Coord::CPlusPrime],
                vec![xi[0], xi[1], xi[2] - k * xi[1]],
                vec![g2 * al / 4.0, 4.0 * g2 * al * (p34 * p34 - m34 * m34) / d, g2 * d],
            )
        }
        CaseClass::C7 => {
            let t = diagonalize_metric(eta, pt.omega)?;
            let th = t.theta.ok_or(Error::TransformSingular("dJ/domega"))?.theta;
            let metric = diagonal_metric_c7(eta, th, gamma)?;
            let mut point = t.transformed_point(&pt).to_vec();
            point[0] = th;
            return Ok(CaseMetric { case, chart: t.chart().to_vec(), point, metric });
        }
    };
    Ok(CaseMetric { case, chart, point, metric: MetricTensor::diagonal(&diag, gamma)? })
}

/// Printed metric of the two-parameter slice c₁ = c₂, c₃ = αc₊/2 (so φ = π/2) in (ω, c₊).
pub fn two_param_metric(alpha: f64, eta: &InitialCoefficients, gamma: f64) -> Result<MetricTensor> {
    let (p12, m12, p34, m34) = (eta.eta12_plus(), eta.eta12_minus(), eta.eta34_plus(), eta.eta34_minus());
    let g2 = gamma * gamma;
    let ww = g2 * (p12 - m12 * m12);
    let wc = 2.0 * g2 * m12 * (alpha * p34 - m34);
    let cc = g2 * alpha * p12 * (alpha * p34 - 2.0 * m34) + g2 * (p34 - m34 * m34);
    MetricTensor::new(&[vec![ww, wc], vec![wc, cc]], gamma)
}

/// Metric of the two-parameter slice obtained by pulling back the general closed form.
pub fn two_param_metric_pullback(alpha: f64, eta: &InitialCoefficients, omega: f64, gamma: f64) -> Result<MetricTensor> {
    let g = analytic_metric_c7(eta, &ChartPoint::new(omega, std::f64::consts::FRAC_PI_2, 0.0, 0.0), gamma)?;
    // Tangent vectors of (ω, c₊) ↦ (ω, π/2, αc₊/2, c₊).
    let e = [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, alpha / 2.0, 1.0]];
    MetricTensor::from_fn(2, gamma, |a, b| {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                s += e[a][i] * g.get(i, j) * e[b][j];
            }
        }
        s
    })
}

/// The evolved state restricted to φ = π/2, c₃ = αc₊/2, in coordinates (ω, c₊).
pub fn two_param_family(
    alpha: f64,
    eta: InitialCoefficients,
) -> FnFamily<impl Fn(&[f64]) -> Result<TwoQubitState> + Sync> {
    FnFamily::new(&["omega", "c_plus"], move |x: &[f64]| {
        let pt = ChartPoint::new(x[0], std::f64::consts::FRAC_PI_2, alpha * x[1] / 2.0, x[1]);
        Ok(evolved_state(&eta, &pt))
    })
}

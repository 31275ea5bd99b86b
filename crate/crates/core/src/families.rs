//! Evolved-state families of the seven cases and their periodicity.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{perturbed_basis, TwoQubitState, DEFAULT_RESONANCE_THRESHOLD};
use crate::model::{classify, CaseClass, ChartPoint, Coord, InitialCoefficients, DEFAULT_CLASSIFY_TOL};

/// Anything that maps a coordinate vector to a normalized state.
pub trait ParametrizedState: Sync {
    fn dim(&self) -> usize;

    fn coordinate_name(&self, mu: usize) -> String {
        format!("x{mu}")
    }

    fn state(&self, xi: &[f64]) -> Result<TwoQubitState>;
}

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

fn sign_pow(k: u8) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The evolved state e^{−ic₃}(η₁e^{−iω}ψ₁ + η₂e^{iω}ψ₂ + η₃e^{i(2c₃−c₊)}ψ₃ + η₄e^{i(2c₃+c₊)}ψ₄).
pub fn evolved_state(eta: &InitialCoefficients, pt: &ChartPoint) -> TwoQubitState {
    let psi = crate::hamiltonian::unperturbed_eigenvectors(pt.phi);
    assemble_c7(eta, pt, &psi)
}

fn assemble_c7(eta: &InitialCoefficients, pt: &ChartPoint, psi: &[TwoQubitState; 4]) -> TwoQubitState {
    let e = eta.as_array();
    let (w, c3, cp) = (pt.omega, pt.c3, pt.c_plus);
    (psi[0] * (e[0] * cis(-w))
        + psi[1] * (e[1] * cis(w))
        + psi[2] * (e[2] * cis(2.0 * c3 - cp))
        + psi[3] * (e[3] * cis(2.0 * c3 + cp)))
        * cis(-c3)
}

/// A case family: coefficients, a chart from the case table, fixed values for the
/// couplings that are not chart coordinates, and the transverse field β.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateFamily {
    case: CaseClass,
    eta: InitialCoefficients,
    beta: f64,
    spectator: ChartPoint,
    rho: f64,
}

/// Builds the family of `case` after checking it against the zero pattern of η.
pub fn family_for_case(case: CaseClass, eta: &InitialCoefficients, beta: f64) -> Result<StateFamily> {
    let found = classify(eta, DEFAULT_CLASSIFY_TOL)?;
    if found != case {
        return Err(Error::CaseMismatch { requested: case.to_string(), found: found.to_string() });
    }
    StateFamily::new(case, *eta, beta)
}

/// Builds the family for whatever case η classifies as.
pub fn family_for(eta: &InitialCoefficients, beta: f64) -> Result<StateFamily> {
    StateFamily::new(classify(eta, DEFAULT_CLASSIFY_TOL)?, *eta, beta)
}

impl StateFamily {
    fn new(case: CaseClass, eta: InitialCoefficients, beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::NonFinite("beta"));
        }
        Ok(Self { case, eta, beta, spectator: ChartPoint::default(), rho: DEFAULT_RESONANCE_THRESHOLD })
    }

    /// Values used for ω, φ, c₃, c₊ whenever they are not chart coordinates. They fix
    /// the global phase prefactors and, for β ≠ 0, the energy denominators.
    pub fn with_spectator(mut self, pt: ChartPoint) -> Self {
        self.spectator = pt;
        self
    }

    pub fn with_resonance_threshold(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn case(&self) -> CaseClass {
        self.case
    }

    pub fn eta(&self) -> &InitialCoefficients {
        &self.eta
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn spectator(&self) -> ChartPoint {
        self.spectator
    }

    pub fn chart(&self) -> Vec<Coord> {
        self.case.chart()
    }

    /// Chart coordinates of the state reached from a full (ω, φ, c₃, c₊) point, with
    /// c = 2c₃ + (−1)^j c₊ + (−1)^{l+1} ω for C4, 2c₃ + (−1)^j c₊ for C5 and
    /// 2c₃ + (−1)^{l+1} ω for C6.
    pub fn chart_coordinates(&self, pt: &ChartPoint) -> Vec<f64> {
        let c_value = match self.case {
            CaseClass::C4 { l, j } => 2.0 * pt.c3 + sign_pow(j) * pt.c_plus + sign_pow(l + 1) * pt.omega,
            CaseClass::C5 { j } => 2.0 * pt.c3 + sign_pow(j) * pt.c_plus,
            CaseClass::C6 { l } => 2.0 * pt.c3 + sign_pow(l + 1) * pt.omega,
            _ => 0.0,
        };
        self.chart().into_iter().map(|c| pt.get(c).unwrap_or(c_value)).collect()
    }

    /// The full chart point behind ξ: spectators overwritten by chart coordinates.
    pub fn full_point(&self, xi: &[f64]) -> Result<ChartPoint> {
        let chart = self.chart();
        if xi.len() != chart.len() {
            return Err(Error::DimensionMismatch { expected: chart.len(), got: xi.len() });
        }
        let mut pt = self.spectator;
        for (c, &v) in chart.iter().zip(xi) {
            pt.set(*c, v);
        }
        Ok(pt)
    }

    /// Unnormalized state built on eigenvectors corrected to first order with strength `beta`.
    /// Affine in `beta`.
    pub fn raw(&self, xi: &[f64], beta: f64) -> Result<TwoQubitState> {
        let pt = self.full_point(xi)?;
        if xi.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("xi"));
        }
        let psi = perturbed_basis(&pt, beta, self.rho)?;
        let e = self.eta.as_array();
        let (w, c3, cp) = (pt.omega, pt.c3, pt.c_plus);
        let s = match self.case {
            CaseClass::C1 => {
                (psi[2] * (e[2] * cis(-cp)) + psi[3] * (e[3] * cis(cp))) * cis(c3)
            }
            CaseClass::C2 { l } => psi[l as usize - 1] * e[l as usize - 1],
            CaseClass::C3 => (psi[0] * (e[0] * cis(-w)) + psi[1] * (e[1] * cis(w))) * cis(-c3),
            CaseClass::C4 { l, j } => {
                let (l, j) = (l as usize, j as usize);
                let c = xi[1];
                (psi[l - 1] * e[l - 1] + psi[j - 1] * (e[j - 1] * cis(c)))
                    * cis(-(c3 + sign_pow(l as u8) * w))
            }
            CaseClass::C5 { j } => {
                let j = j as usize;
                let c = xi[2];
                (psi[0] * (e[0] * cis(-w)) + psi[1] * (e[1] * cis(w)) + psi[j - 1] * (e[j - 1] * cis(c)))
                    * cis(-c3)
            }
            CaseClass::C6 { l } => {
                let c = xi[1];
                let lu = l as usize;
                (psi[lu - 1] * e[lu - 1] + psi[2] * (e[2] * cis(c - cp)) + psi[3] * (e[3] * cis(c + cp)))
                    * cis(-(c3 + sign_pow(l + 1) * w))
            }
            CaseClass::C7 => assemble_c7(&self.eta, &pt, &psi),
        };
        Ok(s)
    }

    /// d(raw)/dβ, exact because `raw` is affine in β.
    pub fn first_order_direction(&self, xi: &[f64]) -> Result<TwoQubitState> {
        Ok(self.raw(xi, 1.0)? - self.raw(xi, 0.0)?)
    }
}

impl ParametrizedState for StateFamily {
    fn dim(&self) -> usize {
        self.case.dimension()
    }

    fn coordinate_name(&self, mu: usize) -> String {
        self.chart().get(mu).map(|c| c.name().to_string()).unwrap_or_else(|| format!("x{mu}"))
    }

    fn state(&self, xi: &[f64]) -> Result<TwoQubitState> {
        self.raw(xi, self.beta)?.normalized()
    }
}

/// A family given by a closure.
pub struct FnFamily<F> {
    dim: usize,
    names: Vec<String>,
    f: F,
}

impl<F> FnFamily<F>
where
    F: Fn(&[f64]) -> Result<TwoQubitState> + Sync,
{
    pub fn new(names: &[&str], f: F) -> Self {
        Self { dim: names.len(), names: names.iter().map(|s| s.to_string()).collect(), f }
    }
}

impl<F> ParametrizedState for FnFamily<F>
where
    F: Fn(&[f64]) -> Result<TwoQubitState> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn coordinate_name(&self, mu: usize) -> String {
        self.names[mu].clone()
    }

    fn state(&self, xi: &[f64]) -> Result<TwoQubitState> {
        (self.f)(xi)
    }
}

/// ψ(ξ) ↦ e^{iλ(ξ)}ψ(ξ).
pub struct Rephased<'a, P: ?Sized, L> {
    pub inner: &'a P,
    pub lambda: L,
}

impl<P, L> ParametrizedState for Rephased<'_, P, L>
where
    P: ParametrizedState + ?Sized,
    L: Fn(&[f64]) -> f64 + Sync,
{
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn coordinate_name(&self, mu: usize) -> String {
        self.inner.coordinate_name(mu)
    }

    fn state(&self, xi: &[f64]) -> Result<TwoQubitState> {
        Ok(self.inner.state(xi)? * cis((self.lambda)(xi)))
    }
}

/// One periodicity condition: a shift of the chart and the global phase it produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicityCondition {
    pub label: String,
    pub shift: Vec<f64>,
    pub phase: Complex64,
}

/// The closing conditions of each case's orbit, with ⟨ψ(ξ)|ψ(ξ+P)⟩ = phase.
pub fn periodicity_conditions(case: CaseClass) -> Vec<PeriodicityCondition> {
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let raw: Vec<(Vec<f64>, Complex64)> = match case {
        CaseClass::C1 => vec![(vec![PI], -one)],
        CaseClass::C2 { .. } => vec![(vec![2.0 * PI], one)],
        CaseClass::C3 => vec![(vec![PI, 0.0], -one), (vec![0.0, 2.0 * PI], one)],
        CaseClass::C4 { .. } => vec![(vec![2.0 * PI, 0.0], one), (vec![0.0, 2.0 * PI], one)],
        CaseClass::C5 { .. } => vec![
            (vec![PI, 0.0, PI], -one),
            (vec![0.0, 2.0 * PI, 0.0], one),
            (vec![0.0, 0.0, 2.0 * PI], one),
        ],
        CaseClass::C6 { .. } => vec![
            (vec![2.0 * PI, 0.0, 0.0], one),
            (vec![0.0, 2.0 * PI, 0.0], one),
            (vec![0.0, PI, PI], one),
        ],
        CaseClass::C7 => vec![
            (vec![PI, 0.0, FRAC_PI_2, 0.0], i),
            (vec![PI, 0.0, 0.0, PI], -one),
            (vec![0.0, 2.0 * PI, 0.0, 0.0], one),
            (vec![0.0, 0.0, PI, 0.0], -one),
            (vec![0.0, 0.0, FRAC_PI_2, PI], -i),
        ],
    };
    let chart = case.chart();
    raw.into_iter()
        .map(|(shift, phase)| {
            let parts: Vec<String> = chart
                .iter()
                .zip(&shift)
                .filter(|(_, s)| **s != 0.0)
                .map(|(c, s)| format!("{}+{}", c.name(), angle_label(*s)))
                .collect();
            PeriodicityCondition { label: parts.join(","), shift, phase }
        })
        .collect()
}

fn angle_label(x: f64) -> String {
    let r = x / PI;
    if (r - 1.0).abs() < 1e-12 {
        "pi".into()
    } else if (r - 2.0).abs() < 1e-12 {
        "2pi".into()
    } else if (r - 0.5).abs() < 1e-12 {
        "pi/2".into()
    } else {
        format!("{x}")
    }
}

/// Outcome of one periodicity condition over the sampled base points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicityCheck {
    pub label: String,
    pub shift: Vec<f64>,
    pub expected_phase: Complex64,
    /// Smallest |⟨ψ(ξ)|ψ(ξ+P)⟩| seen.
    pub min_fidelity: f64,
    /// Largest |⟨ψ(ξ)|ψ(ξ+P)⟩ − phase| seen.
    pub max_phase_error: f64,
    pub samples: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicityReport {
    pub case: CaseClass,
    pub tolerance: f64,
    pub checks: Vec<PeriodicityCheck>,
}

impl PeriodicityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Verifies every closing condition of the family at `samples` random base points
/// drawn uniformly from [−π, π] per coordinate.
pub fn check_periodicity(f: &StateFamily, samples: usize, seed: u64) -> Result<PeriodicityReport> {
    const TOL: f64 = 1e-10;
    if f.beta() != 0.0 {
        return Err(Error::InvalidArgument("periodicity is defined for the unperturbed family".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = f.dim();
    let bases: Vec<Vec<f64>> =
        (0..samples).map(|_| (0..n).map(|_| rng.gen_range(-PI..PI)).collect()).collect();
    let mut checks = Vec::new();
    for cond in periodicity_conditions(f.case()) {
        let mut min_fid = f64::INFINITY;
        let mut max_err: f64 = 0.0;
        for xi in &bases {
            let shifted: Vec<f64> = xi.iter().zip(&cond.shift).map(|(a, b)| a + b).collect();
            let ov = f.state(xi)?.inner(&f.state(&shifted)?);
            min_fid = min_fid.min(ov.norm().min(1.0));
            max_err = max_err.max((ov - cond.phase).norm());
        }
        checks.push(PeriodicityCheck {
            label: cond.label,
            shift: cond.shift,
            expected_phase: cond.phase,
            min_fidelity: min_fid,
            max_phase_error: max_err,
            samples,
            passed: max_err < TOL,
        });
    }
    Ok(PeriodicityReport { case: f.case(), tolerance: TOL, checks })
}

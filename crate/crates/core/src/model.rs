//! Parameter types, derived chart coordinates and the C1–C7 classification.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default zero threshold on |η_i| used by [`classify`].
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-12;

/// Tolerance on Σ|η_i|² accepted by [`InitialCoefficients::new`].
pub const NORM_TOL: f64 = 1e-12;

/// Physical couplings of the two-qubit Hamiltonian and the transverse field β.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianParams {
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    #[serde(default)]
    pub beta: f64,
}

impl HamiltonianParams {
    pub fn new(b: f64, c1: f64, c2: f64, c3: f64) -> Self {
        Self { b, c1, c2, c3, beta: 0.0 }
    }

    pub fn with_beta(self, beta: f64) -> Self {
        Self { beta, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("b", self.b),
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
            ("beta", self.beta),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite(name));
            }
        }
        Ok(())
    }
}

/// Chart quantities derived from the couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub omega: f64,
    pub phi: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    /// Set when ω = 0, in which case φ is reported as 0 but carries no meaning.
    pub degenerate: bool,
}

/// Computes ω, φ and c± with the full-quadrant branch (c₋, 2b) = ω(cos φ, sin φ).
pub fn derive_params(p: &HamiltonianParams) -> DerivedParams {
    let c_plus = p.c1 + p.c2;
    let c_minus = p.c1 - p.c2;
    let two_b = 2.0 * p.b;
    let omega = two_b.hypot(c_minus);
    if omega == 0.0 {
        return DerivedParams { omega, phi: 0.0, c_plus, c_minus, degenerate: true };
    }
    let mut phi = two_b.atan2(c_minus);
    if phi <= -PI {
        phi += 2.0 * PI;
    }
    DerivedParams { omega, phi, c_plus, c_minus, degenerate: false }
}

/// A point of the four-dimensional chart (ω, φ, c₃, c₊).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ChartPoint {
    pub omega: f64,
    pub phi: f64,
    pub c3: f64,
    pub c_plus: f64,
}

impl ChartPoint {
    pub fn new(omega: f64, phi: f64, c3: f64, c_plus: f64) -> Self {
        Self { omega, phi, c3, c_plus }
    }

    pub fn from_slice(xi: &[f64]) -> Result<Self> {
        match xi {
            [omega, phi, c3, c_plus] => Ok(Self::new(*omega, *phi, *c3, *c_plus)),
            _ => Err(Error::DimensionMismatch { expected: 4, got: xi.len() }),
        }
    }

    /// Chart point of a Hamiltonian; refuses the degenerate ω = 0 chart.
    pub fn from_params(p: &HamiltonianParams) -> Result<Self> {
        p.validate()?;
        let d = derive_params(p);
        if d.degenerate {
            return Err(Error::DegenerateChart);
        }
        Ok(Self::new(d.omega, d.phi, p.c3, d.c_plus))
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.omega, self.phi, self.c3, self.c_plus]
    }

    pub fn get(&self, c: Coord) -> Option<f64> {
        match c {
            Coord::Omega => Some(self.omega),
            Coord::Phi => Some(self.phi),
            Coord::C3 => Some(self.c3),
            Coord::CPlus => Some(self.c_plus),
            _ => None,
        }
    }

    pub fn set(&mut self, c: Coord, v: f64) -> bool {
        match c {
            Coord::Omega => self.omega = v,
            Coord::Phi => self.phi = v,
            Coord::C3 => self.c3 = v,
            Coord::CPlus => self.c_plus = v,
            _ => return false,
        }
        true
    }
}

/// Names of chart coordinates used by the case families and their diagonal forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coord {
    CPlus,
    Phi,
    Omega,
    C3,
    C,
    CPrime,
    Theta,
    PhiPrime,
    C3Prime,
    CPlusPrime,
}

impl Coord {
    pub fn name(self) -> &'static str {
        match self {
            Coord::CPlus => "c_plus",
            Coord::Phi => "phi",
            Coord::Omega => "omega",
            Coord::C3 => "c3",
            Coord::C => "c",
            Coord::CPrime => "c_prime",
            Coord::Theta => "theta",
            Coord::PhiPrime => "phi_prime",
            Coord::C3Prime => "c3_prime",
            Coord::CPlusPrime => "c_plus_prime",
        }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Coord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let all = [
            Coord::CPlus,
            Coord::Phi,
            Coord::Omega,
            Coord::C3,
            Coord::C,
            Coord::CPrime,
            Coord::Theta,
            Coord::PhiPrime,
            Coord::C3Prime,
            Coord::CPlusPrime,
        ];
        all.into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown coordinate `{s}`")))
    }
}

/// Expansion coefficients η₁…η₄ of the initial state in the unperturbed eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialCoefficients {
    eta: [Complex64; 4],
}

impl InitialCoefficients {
    /// Accepts coefficients whose squared norm is 1 within [`NORM_TOL`].
    pub fn new(eta: [Complex64; 4]) -> Result<Self> {
        if eta.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("eta"));
        }
        let n2: f64 = eta.iter().map(|z| z.norm_sqr()).sum();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { eta })
    }

    /// Rescales arbitrary coefficients to unit norm. Returns the original norm as well.
    pub fn normalized(eta: [Complex64; 4]) -> Result<(Self, f64)> {
        if eta.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("eta"));
        }
        let n = eta.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n == 0.0 {
            return Err(Error::ZeroState);
        }
        Ok((Self { eta: eta.map(|z| z / n) }, n))
    }

    pub fn from_real(eta: [f64; 4]) -> Result<Self> {
        Self::new(eta.map(|x| Complex64::new(x, 0.0)))
    }

    /// η_k = |η_k| e^{-iα_k}, the phase convention under which α₁₂ enters the C7 example as α₁₂ + 2ω.
    pub fn from_polar(magnitudes: [f64; 4], alphas: [f64; 4]) -> Result<Self> {
        let mut eta = [Complex64::new(0.0, 0.0); 4];
        for k in 0..4 {
            eta[k] = Complex64::from_polar(magnitudes[k], -alphas[k]);
        }
        Self::new(eta)
    }

    pub fn as_array(&self) -> &[Complex64; 4] {
        &self.eta
    }

    /// Coefficient by zero-based index.
    pub fn get(&self, k: usize) -> Complex64 {
        self.eta[k]
    }

    pub fn abs2(&self, k: usize) -> f64 {
        self.eta[k].norm_sqr()
    }

    pub fn eta12_plus(&self) -> f64 {
        self.abs2(0) + self.abs2(1)
    }

    pub fn eta12_minus(&self) -> f64 {
        self.abs2(0) - self.abs2(1)
    }

    pub fn eta34_plus(&self) -> f64 {
        self.abs2(2) + self.abs2(3)
    }

    pub fn eta34_minus(&self) -> f64 {
        self.abs2(2) - self.abs2(3)
    }

    /// Phase α_k in the η = |η| e^{-iα} convention.
    pub fn alpha(&self, k: usize) -> f64 {
        -self.eta[k].arg()
    }

    /// J = Im(η₁η₂* e^{-2iω}).
    pub fn j_at(&self, omega: f64) -> f64 {
        (self.eta[0] * self.eta[1].conj() * Complex64::from_polar(1.0, -2.0 * omega)).im
    }
}

/// Which of the seven orbit types a set of coefficients generates.
/// Indices l ∈ {1, 2} and j ∈ {3, 4} are one-based to match the usual labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum CaseClass {
    C1,
    C2 { l: u8 },
    C3,
    C4 { l: u8, j: u8 },
    C5 { j: u8 },
    C6 { l: u8 },
    C7,
}

impl CaseClass {
    pub fn dimension(self) -> usize {
        match self {
            CaseClass::C1 | CaseClass::C2 { .. } => 1,
            CaseClass::C3 | CaseClass::C4 { .. } => 2,
            CaseClass::C5 { .. } | CaseClass::C6 { .. } => 3,
            CaseClass::C7 => 4,
        }
    }

    pub fn chart(self) -> Vec<Coord> {
        use Coord::*;
        match self {
            CaseClass::C1 => vec![CPlus],
            CaseClass::C2 { .. } => vec![Phi],
            CaseClass::C3 => vec![Omega, Phi],
            CaseClass::C4 { .. } => vec![Phi, C],
            CaseClass::C5 { .. } => vec![Omega, Phi, C],
            CaseClass::C6 { .. } => vec![Phi, C, CPlus],
            CaseClass::C7 => vec![Omega, Phi, C3, CPlus],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CaseClass::C1 => "C1",
            CaseClass::C2 { .. } => "C2",
            CaseClass::C3 => "C3",
            CaseClass::C4 { .. } => "C4",
            CaseClass::C5 { .. } => "C5",
            CaseClass::C6 { .. } => "C6",
            CaseClass::C7 => "C7",
        }
    }
}

impl fmt::Display for CaseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseClass::C2 { l } => write!(f, "C2(l={l})"),
            CaseClass::C4 { l, j } => write!(f, "C4(l={l},j={j})"),
            CaseClass::C5 { j } => write!(f, "C5(j={j})"),
            CaseClass::C6 { l } => write!(f, "C6(l={l})"),
            other => f.write_str(other.label()),
        }
    }
}

/// Classifies the zero pattern of η. Magnitudes at or below `tol` count as zero,
/// magnitudes at or above `2·tol` as nonzero, and anything in between is refused.
pub fn classify(eta: &InitialCoefficients, tol: f64) -> Result<CaseClass> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("classification tol must be positive, got {tol}")));
    }
    let mut nz = [false; 4];
    for (k, flag) in nz.iter_mut().enumerate() {
        let m = eta.get(k).norm();
        if m > tol && m < 2.0 * tol {
            return Err(Error::AmbiguousClassification { index: k + 1, magnitude: m, tol });
        }
        *flag = m >= 2.0 * tol;
    }
    let count = nz.iter().filter(|&&x| x).count();
    if count == 0 {
        return Err(Error::ZeroState);
    }
    if count == 1 {
        let k = nz.iter().position(|&x| x).unwrap_or(0);
        // ψ₁, ψ₂ still move with φ; ψ₃, ψ₄ do not depend on any chart coordinate.
        return match k {
            0 | 1 => Ok(CaseClass::C2 { l: k as u8 + 1 }),
            _ => Err(Error::Stationary(k + 1)),
        };
    }
    let upper = nz[0] as u8 + nz[1] as u8;
    let lower = nz[2] as u8 + nz[3] as u8;
    let l = if nz[0] { 1 } else { 2 };
    let j = if nz[2] { 3 } else { 4 };
    Ok(match (upper, lower) {
        (0, 2) => CaseClass::C1,
        (2, 0) => CaseClass::C3,
        (1, 1) => CaseClass::C4 { l, j },
        (2, 1) => CaseClass::C5 { j },
        (1, 2) => CaseClass::C6 { l },
        _ => CaseClass::C7,
    })
}


/// A rectangular sampling grid over named chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub axes: Vec<GridAxis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub coord: Coord,
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.start + step * i as f64).collect()
    }
}

impl FromStr for GridAxis {
    type Err = Error;

    /// Parses `name=a:b:n`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("grid axis `{s}` is not of the form name=a:b:n"));
        let (name, range) = s.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let end: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if count == 0 || !start.is_finite() || !end.is_finite() {
            return Err(bad());
        }
        Ok(Self { coord: name.trim().parse()?, start, end, count })
    }
}

impl FromStr for Grid {
    type Err = Error;

    /// Parses `name=a:b:n[,name=a:b:n…]`.
    fn from_str(s: &str) -> Result<Self> {
        let axes = s
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<GridAxis>>>()?;
        if axes.is_empty() {
            return Err(Error::InvalidArgument("empty grid".into()));
        }
        Ok(Self { axes })
    }
}

impl Grid {
    /// Expands the grid into chart-ordered coordinate vectors. Chart coordinates
    /// without an axis are held at `base`; axes naming coordinates outside the
    /// chart are rejected. The last chart coordinate varies fastest.
    pub fn points(&self, chart: &[Coord], base: &[f64]) -> Result<Vec<Vec<f64>>> {
        if base.len() != chart.len() {
            return Err(Error::DimensionMismatch { expected: chart.len(), got: base.len() });
        }
        for ax in &self.axes {
            if !chart.contains(&ax.coord) {
                return Err(Error::UnsupportedChart(format!(
                    "grid axis `{}` is not a coordinate of this chart",
                    ax.coord
                )));
            }
        }
        let per_coord: Vec<Vec<f64>> = chart
            .iter()
            .zip(base)
            .map(|(c, &b)| {
                self.axes
                    .iter()
                    .find(|a| a.coord == *c)
                    .map(GridAxis::values)
                    .unwrap_or_else(|| vec![b])
            })
            .collect();
        let mut out = vec![Vec::with_capacity(chart.len())];
        for vals in &per_coord {
            let mut next = Vec::with_capacity(out.len() * vals.len());
            for prefix in &out {
                for &v in vals {
                    let mut p = prefix.clone();
                    p.push(v);
                    next.push(p);
                }
            }
            out = next;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn derive_params_examples() {
        let d = derive_params(&HamiltonianParams::new(0.0, 1.0, 0.0, 0.0));
        assert_eq!((d.omega, d.phi, d.c_plus, d.c_minus, d.degenerate), (1.0, 0.0, 1.0, 1.0, false));

        let d = derive_params(&HamiltonianParams::new(0.5, 0.8, 0.2, 0.3));
        assert_abs_diff_eq!(d.omega, 1.36f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(d.phi, (1.0f64).atan2(0.6), epsilon = 1e-15);
        assert_abs_diff_eq!(d.phi, 1.030376826524312, epsilon = 1e-12);
        assert_abs_diff_eq!(d.c_plus, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.c_minus, 0.6, epsilon = 1e-15);

        let d = derive_params(&HamiltonianParams::new(0.0, 0.5, 0.5, 0.1));
        assert!(d.degenerate);
        assert_eq!((d.omega, d.phi, d.c_plus, d.c_minus), (0.0, 0.0, 1.0, 0.0));
    }

    #[test]
    fn phi_branch_covers_negative_c_minus() {
        let d = derive_params(&HamiltonianParams::new(-0.3, -0.5, 0.4, 0.0));
        assert!(d.phi < -PI / 2.0 && d.phi > -PI);
        assert_abs_diff_eq!(d.omega * d.phi.cos(), -0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(d.omega * d.phi.sin(), -0.6, epsilon = 1e-12);
        let d = derive_params(&HamiltonianParams::new(0.0, -1.0, 0.0, 0.0));
        assert_eq!(d.phi, PI);
    }

    #[test]
    fn degenerate_chart_is_refused_downstream() {
        let p = HamiltonianParams::new(0.0, 0.5, 0.5, 0.1);
        assert_eq!(ChartPoint::from_params(&p), Err(Error::DegenerateChart));
    }

    #[test]
    fn classify_examples() {
        let h = 0.5f64.sqrt();
        let e = InitialCoefficients::from_real([0.0, 0.0, h, h]).unwrap();
        assert_eq!(classify(&e, DEFAULT_CLASSIFY_TOL).unwrap(), CaseClass::C1);
        let e = InitialCoefficients::from_real([0.5; 4]).unwrap();
        assert_eq!(classify(&e, DEFAULT_CLASSIFY_TOL).unwrap(), CaseClass::C7);
        let e = InitialCoefficients::from_real([h, 0.0, h, 0.0]).unwrap();
        assert_eq!(classify(&e, DEFAULT_CLASSIFY_TOL).unwrap(), CaseClass::C4 { l: 1, j: 3 });
    }

    #[test]
    fn classify_every_pattern() {
        let cases = [
            ([0.0, 0.0, 1.0, 1.0], CaseClass::C1),
            ([1.0, 0.0, 0.0, 0.0], CaseClass::C2 { l: 1 }),
            ([0.0, 1.0, 0.0, 0.0], CaseClass::C2 { l: 2 }),
            ([1.0, 1.0, 0.0, 0.0], CaseClass::C3),
            ([1.0, 0.0, 0.0, 1.0], CaseClass::C4 { l: 1, j: 4 }),
            ([0.0, 1.0, 1.0, 0.0], CaseClass::C4 { l: 2, j: 3 }),
            ([0.0, 1.0, 0.0, 1.0], CaseClass::C4 { l: 2, j: 4 }),
            ([1.0, 1.0, 1.0, 0.0], CaseClass::C5 { j: 3 }),
            ([1.0, 1.0, 0.0, 1.0], CaseClass::C5 { j: 4 }),
            ([1.0, 0.0, 1.0, 1.0], CaseClass::C6 { l: 1 }),
            ([0.0, 1.0, 1.0, 1.0], CaseClass::C6 { l: 2 }),
        ];
        for (raw, expected) in cases {
            let (e, _) = InitialCoefficients::normalized(raw.map(c)).unwrap();
            let got = classify(&e, DEFAULT_CLASSIFY_TOL).unwrap();
            assert_eq!(got, expected);
            assert_eq!(got.chart().len(), got.dimension());
        }
    }

    #[test]
    fn classify_errors() {
        let e = InitialCoefficients::from_real([0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(classify(&e, DEFAULT_CLASSIFY_TOL), Err(Error::Stationary(3)));
        let e = InitialCoefficients::from_real([0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(classify(&e, DEFAULT_CLASSIFY_TOL), Err(Error::Stationary(4)));
        let (e, _) = InitialCoefficients::normalized([c(1.0), c(1.5e-12), c(1.0), c(0.0)]).unwrap();
        assert!(matches!(
            classify(&e, DEFAULT_CLASSIFY_TOL),
            Err(Error::AmbiguousClassification { index: 2, .. })
        ));
        assert_eq!(classify(&e, 1e-13).unwrap(), CaseClass::C5 { j: 3 });
    }

    #[test]
    fn normalization_is_checked() {
        assert!(matches!(
            InitialCoefficients::from_real([1.0, 1.0, 0.0, 0.0]),
            Err(Error::NotNormalized(_))
        ));
        let (e, n) = InitialCoefficients::normalized([c(1.0), c(1.0), c(0.0), c(0.0)]).unwrap();
        assert_abs_diff_eq!(n, 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(e.eta12_plus(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn polar_convention() {
        let e = InitialCoefficients::from_polar([0.5; 4], [0.3, -0.2, 0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(e.alpha(0), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(e.alpha(3), 1.0, epsilon = 1e-15);
        // J = -|η1||η2| sin(α12 + 2ω)
        assert_abs_diff_eq!(e.j_at(0.4), -0.25 * (0.5f64 + 0.8).sin(), epsilon = 1e-15);
    }

    #[test]
    fn grid_expansion() {
        let g: Grid = "phi=0:1:3,c=2:3:2".parse().unwrap();
        let pts = g.points(&[Coord::Phi, Coord::C], &[0.0, 0.0]).unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[1], vec![0.0, 3.0]);
        assert_eq!(pts[5], vec![1.0, 3.0]);
        assert!(g.points(&[Coord::Phi], &[0.0]).is_err());
        assert!("phi=0:1".parse::<Grid>().is_err());
        assert!("zeta=0:1:2".parse::<Grid>().is_err());
    }
}

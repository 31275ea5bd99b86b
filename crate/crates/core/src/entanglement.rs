//! Concurrence of pure two-qubit states along the case families, the closed forms
//! for each case, and the tables of maximal-entanglement conditions.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{family_for_case, ParametrizedState, StateFamily};
use crate::hamiltonian::TwoQubitState;
use crate::model::{CaseClass, Grid, InitialCoefficients};

/// Allowed deviation of ‖s‖² from one before [`concurrence`] refuses a state.
pub const NORM_TOL: f64 = 1e-10;

/// Tolerance on C = 1 for a table row to count as maximally entangled.
pub const TABLE_TOL: f64 = 1e-10;

/// Values taken by a table entry that the row leaves unconstrained.
pub const FREE_SAMPLES: [f64; 5] = [0.3, 0.7, 1.1, 1.9, 2.6];

pub const DEFAULT_N_RANGE: [i32; 4] = [-1, 0, 1, 2];

const EQUALITY_TOL: f64 = 1e-12;

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

/// C = 2|ad − bc| for a normalized state.
pub fn concurrence(s: &TwoQubitState) -> Result<f64> {
    let n2 = s.norm_sqr();
    if !n2.is_finite() {
        return Err(Error::NonFinite("state"));
    }
    if (n2 - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(n2.sqrt()));
    }
    Ok(2.0 * (s.a() * s.d() - s.b() * s.c()).norm())
}

/// Concurrence of the evolved state for arbitrary η at a full point (ω, φ, c₃, c₊):
/// |(η₁²e^{−2iω} − η₂²e^{2iω})cos φ − 2η₁η₂ sin φ − e^{4ic₃}(η₃²e^{−2ic₊} − η₄²e^{2ic₊})|.
/// Valid on the eigenvector branch cos φ > 0.
pub fn concurrence_general(eta: &InitialCoefficients, xi: &[f64; 4]) -> f64 {
    let e = eta.as_array();
    let [w, phi, c3, cp] = *xi;
    let upper = (e[0] * e[0] * cis(-2.0 * w) - e[1] * e[1] * cis(2.0 * w)) * phi.cos()
        - e[0] * e[1] * (2.0 * phi.sin());
    let lower = cis(4.0 * c3) * (e[2] * e[2] * cis(-2.0 * cp) - e[3] * e[3] * cis(2.0 * cp));
    (upper - lower).norm()
}

/// The relative phase χ = arg(η_second) − arg(η_first) used by the closed form of a case.
/// The pairs are (η₃, η₄) for C1, (η₁, η₂) for C3, (η_l, η_j) for C4, (η₁, η_j) for C5,
/// (η_l, η₃) for C6 and (η₁, η₃) for C7. C2 has none.
pub fn relative_phase(case: CaseClass, eta: &InitialCoefficients) -> Option<f64> {
    let (first, second) = match case {
        CaseClass::C1 => (2, 3),
        CaseClass::C2 { .. } => return None,
        CaseClass::C3 => (0, 1),
        CaseClass::C4 { l, j } => (l as usize - 1, j as usize - 1),
        CaseClass::C5 { j } => (0, j as usize - 1),
        CaseClass::C6 { l } => (l as usize - 1, 2),
        CaseClass::C7 => (0, 2),
    };
    let z = eta.get(second) * eta.get(first).conj();
    Some(z.im.atan2(z.re))
}

/// Which transcription of a closed form to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaVariant {
    /// The forms exactly as published.
    Printed,
    /// C4 with cos(2c + 2χ) and C5 with sin 2ω; the other cases as printed.
    Amended,
}

fn require_equal(eta: &InitialCoefficients, a: usize, b: usize, out: &mut Vec<String>) {
    let (x, y) = (eta.get(a), eta.get(b));
    if (x - y).norm() > EQUALITY_TOL * (1.0 + x.norm()) {
        out.push(format!("eta{} = eta{}", a + 1, b + 1));
    }
}

/// Equalities among the η that the closed form of `case` presumes, listed when violated.
pub fn violated_assumptions(case: CaseClass, eta: &InitialCoefficients) -> Vec<String> {
    let mut out = Vec::new();
    match case {
        CaseClass::C5 { .. } => require_equal(eta, 0, 1, &mut out),
        CaseClass::C6 { .. } => require_equal(eta, 2, 3, &mut out),
        CaseClass::C7 => {
            require_equal(eta, 0, 1, &mut out);
            require_equal(eta, 2, 3, &mut out);
        }
        _ => {}
    }
    out
}

/// Closed-form concurrence of the family of `case` at chart coordinates `xi`.
///
/// The C3, C5 and C7 forms assume the branch cos φ > 0 of the eigenvectors and are
/// refused elsewhere; C5, C6 and C7 refuse η that break their equalities.
pub fn concurrence_analytic(case: CaseClass, eta: &InitialCoefficients, xi: &[f64]) -> Result<f64> {
    closed_form(case, eta, xi, FormulaVariant::Printed)
}

/// [`concurrence_analytic`] with the amended C4 and C5 forms.
pub fn concurrence_amended(case: CaseClass, eta: &InitialCoefficients, xi: &[f64]) -> Result<f64> {
    closed_form(case, eta, xi, FormulaVariant::Amended)
}

pub fn closed_form(
    case: CaseClass,
    eta: &InitialCoefficients,
    xi: &[f64],
    variant: FormulaVariant,
) -> Result<f64> {
    if xi.len() != case.dimension() {
        return Err(Error::DimensionMismatch { expected: case.dimension(), got: xi.len() });
    }
    if xi.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("xi"));
    }
    let bad = violated_assumptions(case, eta);
    if !bad.is_empty() {
        return Err(Error::AssumptionViolated(format!("{case} closed form needs {}", bad.join(" and "))));
    }
    let chi = relative_phase(case, eta).unwrap_or(0.0);
    let amended = variant == FormulaVariant::Amended;
    let positive_cos = |phi: f64| {
        if phi.cos() > 0.0 {
            Ok(())
        } else {
            Err(Error::AssumptionViolated(format!("{case} closed form needs cos(phi) > 0")))
        }
    };
    let v = match case {
        CaseClass::C1 => {
            let (p3, p4) = (eta.abs2(2), eta.abs2(3));
            p3 * p3 + p4 * p4 - 2.0 * p3 * p4 * (4.0 * xi[0] + 2.0 * chi).cos()
        }
        CaseClass::C2 { .. } => xi[0].cos().powi(2),
        CaseClass::C3 => {
            let (w, phi) = (xi[0], xi[1]);
            positive_cos(phi)?;
            let (a1, a2) = (eta.get(0).norm(), eta.get(1).norm());
            let (s, c) = phi.sin_cos();
            (a1.powi(4) + a2.powi(4) - 2.0 * a1 * a1 * a2 * a2 * (4.0 * w + 2.0 * chi).cos()) * c * c
                + 4.0 * a1 * a1 * a2 * a2 * s * s
                - 4.0 * a1 * a2 * (a1 * a1 - a2 * a2) * (2.0 * w + chi).cos() * s * c
        }
        CaseClass::C4 { l, j } => {
            let (phi, c) = (xi[0], xi[1]);
            let (pl, pj) = (eta.abs2(l as usize - 1), eta.abs2(j as usize - 1));
            let shift = if amended { 2.0 * chi } else { chi };
            pl * pl * phi.cos().powi(2) + pj * pj
                - 2.0 * sign_pow(l + j) * pl * pj * (2.0 * c + shift).cos() * phi.cos()
        }
        CaseClass::C5 { j } => {
            let (w, phi, c) = (xi[0], xi[1], xi[2]);
            positive_cos(phi)?;
            let (p1, pj) = (eta.abs2(0), eta.abs2(j as usize - 1));
            let sw = if amended { (2.0 * w).sin() } else { w.sin() };
            let x = -2.0 * p1 * phi.sin() + sign_pow(j) * pj * (2.0 * c + 2.0 * chi).cos();
            let y = -2.0 * p1 * sw * phi.cos() + sign_pow(j) * pj * (2.0 * c + 2.0 * chi).sin();
            x * x + y * y
        }
        CaseClass::C6 { l } => {
            let (phi, c, cp) = (xi[0], xi[1], xi[2]);
            let (pl, p3) = (eta.abs2(l as usize - 1), eta.abs2(2));
            let x = sign_pow(l + 1) * pl * phi.cos() - 2.0 * p3 * (2.0 * c + 2.0 * chi).sin() * (2.0 * cp).sin();
            let y = 2.0 * p3 * (2.0 * c + 2.0 * chi).cos() * (2.0 * cp).sin();
            x * x + y * y
        }
        CaseClass::C7 => {
            let (w, phi, c3, cp) = (xi[0], xi[1], xi[2], xi[3]);
            positive_cos(phi)?;
            let (p1, p3) = (eta.abs2(0), eta.abs2(2));
            let s2 = (2.0 * cp).sin();
            let x = 2.0 * p1 * phi.sin() + 2.0 * p3 * s2 * (4.0 * c3 + 2.0 * chi).sin();
            let y = -2.0 * p1 * (2.0 * w).sin() * phi.cos() + 2.0 * p3 * s2 * (4.0 * c3 + 2.0 * chi).cos();
            x * x + y * y
        }
    };
    // Rounding can push the radicand a few ulps below zero.
    Ok(v.max(0.0).sqrt())
}

/// Parity of the free index a table row applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn of(k: u8) -> Self {
        if k % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

type Entry = fn(f64, f64) -> f64;

/// One row of a condition table: fixed φ, an optional fixed ω, the parity of j (C5)
/// or l (C6), and the remaining coordinates as functions of (n, χ).
#[derive(Debug, Clone, Copy)]
struct Row {
    label: &'static str,
    phi: f64,
    omega: Option<f64>,
    parity: Option<Parity>,
    entries: &'static [Entry],
}

const C5_ROWS: &[Row] = &[
    Row { label: "phi=0 omega=pi/2 j even c=3pi/4+pi*n-chi", phi: 0.0, omega: Some(FRAC_PI_2), parity: Some(Parity::Even), entries: &[|n, x| 3.0 * FRAC_PI_4 + PI * n - x] },
    Row { label: "phi=0 omega=pi/2 j odd c=pi/4+pi*n-chi", phi: 0.0, omega: Some(FRAC_PI_2), parity: Some(Parity::Odd), entries: &[|n, x| FRAC_PI_4 + PI * n - x] },
    Row { label: "phi=pi/2 j even c=((2n+1)pi-chi)/2", phi: FRAC_PI_2, omega: None, parity: Some(Parity::Even), entries: &[|n, x| ((2.0 * n + 1.0) * PI - x) / 2.0] },
    Row { label: "phi=pi/2 j odd c=pi*n-chi", phi: FRAC_PI_2, omega: None, parity: Some(Parity::Odd), entries: &[|n, x| PI * n - x] },
    Row { label: "phi=pi omega=pi/2 j even c=pi/4+pi*n-chi", phi: PI, omega: Some(FRAC_PI_2), parity: Some(Parity::Even), entries: &[|n, x| FRAC_PI_4 + PI * n - x] },
    Row { label: "phi=pi omega=pi/2 j odd c=3pi/4+pi*n-chi", phi: PI, omega: Some(FRAC_PI_2), parity: Some(Parity::Odd), entries: &[|n, x| 3.0 * FRAC_PI_4 + PI * n - x] },
    Row { label: "phi=3pi/2 j even c=pi*n-chi", phi: 3.0 * FRAC_PI_2, omega: None, parity: Some(Parity::Even), entries: &[|n, x| PI * n - x] },
    Row { label: "phi=3pi/2 j odd c=((2n+1)pi-chi)/2", phi: 3.0 * FRAC_PI_2, omega: None, parity: Some(Parity::Odd), entries: &[|n, x| ((2.0 * n + 1.0) * PI - x) / 2.0] },
];

// Entries are (c, c₊).
const C6_ROWS: &[Row] = &[
    Row { label: "phi=0 l even c=pi/4+pi*n-chi c+=pi/4+pi*n", phi: 0.0, omega: None, parity: Some(Parity::Even), entries: &[|n, x| FRAC_PI_4 + PI * n - x, |n, _| FRAC_PI_4 + PI * n] },
    Row { label: "phi=0 l even c=3pi/4+pi*n-chi c+=3pi/4+pi*n", phi: 0.0, omega: None, parity: Some(Parity::Even), entries: &[|n, x| 3.0 * FRAC_PI_4 + PI * n - x, |n, _| 3.0 * FRAC_PI_4 + PI * n] },
    Row { label: "phi=0 l odd c=pi/4+pi*n-chi c+=3pi/4+pi*n", phi: 0.0, omega: None, parity: Some(Parity::Odd), entries: &[|n, x| FRAC_PI_4 + PI * n - x, |n, _| 3.0 * FRAC_PI_4 + PI * n] },
    Row { label: "phi=0 l odd c=3pi/4+pi*n-chi c+=pi/4+pi*n", phi: 0.0, omega: None, parity: Some(Parity::Odd), entries: &[|n, x| 3.0 * FRAC_PI_4 + PI * n - x, |n, _| FRAC_PI_4 + PI * n] },
    Row { label: "phi=pi l even c=pi/4+pi*n-chi c+=3pi/4+pi*n", phi: PI, omega: None, parity: Some(Parity::Even), entries: &[|n, x| FRAC_PI_4 + PI * n - x, |n, _| 3.0 * FRAC_PI_4 + PI * n] },
    Row { label: "phi=pi l even c=3pi/4+pi*n-chi c+=pi/4+pi*n", phi: PI, omega: None, parity: Some(Parity::Even), entries: &[|n, x| 3.0 * FRAC_PI_4 + PI * n - x, |n, _| FRAC_PI_4 + PI * n] },
    Row { label: "phi=pi l odd c=pi/4+pi*n-chi c+=pi/4+pi*n", phi: PI, omega: None, parity: Some(Parity::Odd), entries: &[|n, x| FRAC_PI_4 + PI * n - x, |n, _| FRAC_PI_4 + PI * n] },
    Row { label: "phi=pi l odd c=3pi/4+pi*n-chi c+=3pi/4+pi*n", phi: PI, omega: None, parity: Some(Parity::Odd), entries: &[|n, x| 3.0 * FRAC_PI_4 + PI * n - x, |n, _| 3.0 * FRAC_PI_4 + PI * n] },
];

fn c7_a(n: f64, x: f64) -> f64 {
    ((2.0 * n + 1.0) * PI - 2.0 * x) / 4.0
}

fn c7_b(n: f64, x: f64) -> f64 {
    (PI * n - x) / 2.0
}

// Entries are (c₃, c₊).
const C7_ROWS: &[Row] = &[
    Row { label: "phi=0 omega=pi/4 c+=pi/4+pi*n c3=((2n+1)pi-2chi)/4", phi: 0.0, omega: Some(FRAC_PI_4), parity: None, entries: &[c7_a, |n, _| FRAC_PI_4 + PI * n] },
    Row { label: "phi=0 omega=pi/4 c+=3pi/4+pi*n c3=(pi*n-chi)/2", phi: 0.0, omega: Some(FRAC_PI_4), parity: None, entries: &[c7_b, |n, _| 3.0 * FRAC_PI_4 + PI * n] },
    Row { label: "phi=0 omega=3pi/4 c+=pi/4+pi*n c3=(pi*n-chi)/2", phi: 0.0, omega: Some(3.0 * FRAC_PI_4), parity: None, entries: &[c7_b, |n, _| FRAC_PI_4 + PI * n] },
    Row { label: "phi=0 omega=3pi/4 c+=3pi/4+pi*n c3=((2n+1)pi-2chi)/4", phi: 0.0, omega: Some(3.0 * FRAC_PI_4), parity: None, entries: &[c7_a, |n, _| 3.0 * FRAC_PI_4 + PI * n] },
    Row { label: "phi=pi/2 c+=pi/4+pi*n c3=(pi/2+2pi*n-2chi)/4", phi: FRAC_PI_2, omega: None, parity: None, entries: &[|n, x| (FRAC_PI_2 + 2.0 * PI * n - 2.0 * x) / 4.0, |n, _| FRAC_PI_4 + PI * n] },
    Row { label: "phi=pi/2 c+=3pi/4+pi*n c3=(3pi/2+2pi*n-2chi)/4", phi: FRAC_PI_2, omega: None, parity: None, entries: &[|n, x| (3.0 * FRAC_PI_2 + 2.0 * PI * n - 2.0 * x) / 4.0, |n, _| 3.0 * FRAC_PI_4 + PI * n] },
    Row { label: "phi=pi omega=pi/4 c+=pi/4+pi*n c3=(pi*n-chi)/2", phi: PI, omega: Some(FRAC_PI_4), parity: None, entries: &[c7_b, |n, _| FRAC_PI_4 + PI * n] },
    Row { label: "phi=pi omega=pi/4 c+=3pi/4+pi*n c3=((2n+1)pi-2chi)/4", phi: PI, omega: Some(FRAC_PI_4), parity: None, entries: &[c7_a, |n, _| 3.0 * FRAC_PI_4 + PI * n] },
    Row { label: "phi=pi omega=3pi/4 c+=pi/4+pi*n c3=((2n+1)pi-2chi)/4", phi: PI, omega: Some(3.0 * FRAC_PI_4), parity: None, entries: &[c7_a, |n, _| FRAC_PI_4 + PI * n] },
    Row { label: "phi=pi omega=3pi/4 c+=3pi/4+pi*n c3=(pi*n-chi)/2", phi: PI, omega: Some(3.0 * FRAC_PI_4), parity: None, entries: &[c7_b, |n, _| 3.0 * FRAC_PI_4 + PI * n] },
    Row { label: "phi=3pi/2 c+=pi/4+pi*n c3=(3pi/2+2pi*n-2chi)/4", phi: 3.0 * FRAC_PI_2, omega: None, parity: None, entries: &[|n, x| (3.0 * FRAC_PI_2 + 2.0 * PI * n - 2.0 * x) / 4.0, |n, _| FRAC_PI_4 + PI * n] },
    Row { label: "phi=3pi/2 c+=3pi/4+pi*n c3=(pi/2+2pi*n-2chi)/4", phi: 3.0 * FRAC_PI_2, omega: None, parity: None, entries: &[|n, x| (FRAC_PI_2 + 2.0 * PI * n - 2.0 * x) / 4.0, |n, _| 3.0 * FRAC_PI_4 + PI * n] },
];

/// One instantiated table condition and the concurrence measured there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxEntangledCondition {
    pub case: CaseClass,
    pub row: usize,
    pub label: String,
    pub n: i32,
    pub chi: f64,
    /// Chart coordinates of the family, in chart order.
    pub coordinates: Vec<f64>,
    pub predicted: f64,
    pub measured: f64,
    pub passed: bool,
}

/// Aggregate over the instantiations of one row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowSummary {
    pub row: usize,
    pub label: String,
    pub samples: usize,
    pub min_concurrence: f64,
    pub max_deviation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub case: CaseClass,
    pub chi: f64,
    pub tolerance: f64,
    pub rows: Vec<RowSummary>,
    pub conditions: Vec<MaxEntangledCondition>,
}

impl TableReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn failing_rows(&self) -> Vec<&RowSummary> {
        self.rows.iter().filter(|r| !r.passed).collect()
    }
}

fn check_table_assumptions(case: CaseClass, eta: &InitialCoefficients) -> Result<()> {
    let mut bad = violated_assumptions(case, eta);
    // The tables are stated for real leading coefficients.
    let first = match case {
        CaseClass::C5 { .. } | CaseClass::C7 => 0,
        CaseClass::C6 { l } => l as usize - 1,
        _ => {
            return Err(Error::UnsupportedChart(format!("no condition table for {case}")));
        }
    };
    let z = eta.get(first);
    if z.im.abs() > EQUALITY_TOL || z.re < 0.0 {
        bad.push(format!("eta{} real and positive", first + 1));
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::AssumptionViolated(format!("{case} table needs {}", bad.join(" and "))))
    }
}

/// Instantiates every row of the condition table of `case` that applies to η, for each
/// n, and measures the concurrence of the family state there. Rows with a free ω are
/// sampled at [`FREE_SAMPLES`]. Failing rows are reported, not raised.
pub fn verify_max_entangled_tables(
    case: CaseClass,
    eta: &InitialCoefficients,
    n_range: &[i32],
) -> Result<TableReport> {
    let family = family_for_case(case, eta, 0.0)?;
    check_table_assumptions(case, eta)?;
    let chi = relative_phase(case, eta).unwrap_or(0.0);
    let (rows, parity) = match case {
        CaseClass::C5 { j } => (C5_ROWS, Some(Parity::of(j))),
        CaseClass::C6 { l } => (C6_ROWS, Some(Parity::of(l))),
        _ => (C7_ROWS, None),
    };
    let mut conditions = Vec::new();
    let mut summaries = Vec::new();
    for (k, row) in rows.iter().enumerate() {
        if row.parity.is_some() && row.parity != parity {
            continue;
        }
        let omegas: Vec<f64> = match row.omega {
            Some(w) => vec![w],
            None => FREE_SAMPLES.to_vec(),
        };
        let mut min_c = f64::INFINITY;
        let mut max_dev = 0.0f64;
        let mut samples = 0;
        for &n in n_range {
            let nf = n as f64;
            let values: Vec<f64> = row.entries.iter().map(|f| f(nf, chi)).collect();
            let omega_list: &[f64] = if matches!(case, CaseClass::C6 { .. }) { &[0.0] } else { &omegas };
            for &w in omega_list {
                let xi = match case {
                    CaseClass::C5 { .. } => vec![w, row.phi, values[0]],
                    CaseClass::C6 { .. } => vec![row.phi, values[0], values[1]],
                    _ => vec![w, row.phi, values[0], values[1]],
                };
                let measured = concurrence(&family.state(&xi)?)?;
                let dev = (measured - 1.0).abs();
                min_c = min_c.min(measured);
                max_dev = max_dev.max(dev);
                samples += 1;
                conditions.push(MaxEntangledCondition {
                    case,
                    row: k,
                    label: row.label.to_string(),
                    n,
                    chi,
                    coordinates: xi,
                    predicted: 1.0,
                    measured,
                    passed: dev <= TABLE_TOL,
                });
            }
        }
        summaries.push(RowSummary {
            row: k,
            label: row.label.to_string(),
            samples,
            min_concurrence: min_c,
            max_deviation: max_dev,
            passed: max_dev <= TABLE_TOL,
        });
    }
    Ok(TableReport { case, chi, tolerance: TABLE_TOL, rows: summaries, conditions })
}

/// One grid point of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub coordinates: Vec<f64>,
    pub concurrence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceScan {
    pub case: CaseClass,
    pub eta: InitialCoefficients,
    pub chi: Option<f64>,
    pub grid: Grid,
    pub coordinate_names: Vec<String>,
    pub values: Vec<ScanSample>,
    pub argmax: Vec<f64>,
    pub max: f64,
    pub min: f64,
}

impl ConcurrenceScan {
    /// For a scan along a single axis: the smallest shift, in grid steps, under which
    /// the sampled values repeat within `tol`. Needs at least two full periods.
    pub fn detected_period(&self, tol: f64) -> Option<f64> {
        let ax = self.grid.axes.first()?;
        if self.grid.axes.len() != 1 || ax.count < 3 {
            return None;
        }
        let v: Vec<f64> = self.values.iter().map(|s| s.concurrence).collect();
        let step = (ax.end - ax.start) / (ax.count - 1) as f64;
        (1..=v.len() / 2)
            .find(|&k| (0..v.len() - k).all(|i| (v[i] - v[i + k]).abs() <= tol))
            .map(|k| k as f64 * step)
    }
}

/// Concurrence over a grid of chart coordinates. Coordinates without an axis stay at the
/// family's spectator values.
pub fn scan_concurrence(f: &StateFamily, grid: &Grid) -> Result<ConcurrenceScan> {
    let chart = f.chart();
    let base = f.chart_coordinates(&f.spectator());
    let points = grid.points(&chart, &base)?;
    let mut values = Vec::with_capacity(points.len());
    for xi in points {
        let c = concurrence(&f.state(&xi)?)?;
        values.push(ScanSample { coordinates: xi, concurrence: c });
    }
    let best = values
        .iter()
        .max_by(|a, b| a.concurrence.total_cmp(&b.concurrence))
        .ok_or_else(|| Error::InvalidArgument("empty grid".into()))?;
    let argmax = best.coordinates.clone();
    let max = best.concurrence;
    let min = values.iter().map(|s| s.concurrence).fold(f64::INFINITY, f64::min);
    Ok(ConcurrenceScan {
        case: f.case(),
        eta: *f.eta(),
        chi: relative_phase(f.case(), f.eta()),
        grid: grid.clone(),
        coordinate_names: chart.iter().map(|c| c.name().to_string()).collect(),
        values,
        argmax,
        max,
        min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{evolved_state, family_for};
    use crate::model::ChartPoint;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const R: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn polar(m: [f64; 4], ph: [f64; 4]) -> InitialCoefficients {
        InitialCoefficients::new([0, 1, 2, 3].map(|k| Complex64::from_polar(m[k], ph[k]))).unwrap()
    }

    #[test]
    fn bell_and_product_states() {
        let bell = TwoQubitState::from_real([R, 0.0, 0.0, R]);
        assert_abs_diff_eq!(concurrence(&bell).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(concurrence(&TwoQubitState::basis(0)).unwrap(), 0.0);
        let psi3 = TwoQubitState::from_real([0.0, R, R, 0.0]);
        assert_abs_diff_eq!(concurrence(&psi3).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn unnormalized_state_is_refused() {
        let s = TwoQubitState::from_real([1.0, 1.0, 0.0, 0.0]);
        assert!(matches!(concurrence(&s), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn printed_examples() {
        let c2 = InitialCoefficients::from_real([1.0, 0.0, 0.0, 0.0]).unwrap();
        let case = CaseClass::C2 { l: 1 };
        assert_abs_diff_eq!(concurrence_analytic(case, &c2, &[FRAC_PI_2]).unwrap(), 0.0, epsilon = 1e-15);
        let c1 = InitialCoefficients::from_real([0.0, 0.0, R, R]).unwrap();
        assert_abs_diff_eq!(concurrence_analytic(CaseClass::C1, &c1, &[FRAC_PI_4]).unwrap(), 1.0, epsilon = 1e-12);
        for m in [0.2f64, 0.5, 0.9] {
            let c3 = InitialCoefficients::from_real([m.sqrt(), (1.0 - m).sqrt(), 0.0, 0.0]).unwrap();
            let v = concurrence_analytic(CaseClass::C3, &c3, &[FRAC_PI_4, 0.0]).unwrap();
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn general_form_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let raw = [0; 4].map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let (eta, _) = InitialCoefficients::normalized(raw).unwrap();
            let mut xi = [0; 4].map(|_| rng.gen_range(-PI..PI));
            xi[1] = rng.gen_range(-1.5..1.5);
            let direct = concurrence(&evolved_state(&eta, &ChartPoint::from_slice(&xi).unwrap())).unwrap();
            assert_abs_diff_eq!(concurrence_general(&eta, &xi), direct, epsilon = 1e-12);
        }
    }

    fn sample_case(case: CaseClass, rng: &mut ChaCha8Rng) -> InitialCoefficients {
        let chi = rng.gen_range(-PI..PI);
        let mut m = [0.0; 4];
        let mut ph = [0.0; 4];
        match case {
            CaseClass::C2 { l } => m[l as usize - 1] = 1.0,
            CaseClass::C1 => {
                let a = rng.gen_range(0.05..0.95);
                m = [0.0, 0.0, a, 1.0 - a];
                ph[3] = chi;
            }
            CaseClass::C3 => {
                let a = rng.gen_range(0.05..0.95);
                m = [a, 1.0 - a, 0.0, 0.0];
                ph[1] = chi;
            }
            CaseClass::C4 { l, j } => {
                let a = rng.gen_range(0.05..0.95);
                m[l as usize - 1] = a;
                m[j as usize - 1] = 1.0 - a;
                ph[j as usize - 1] = chi;
            }
            CaseClass::C5 { j } => {
                let a = rng.gen_range(0.05..0.45);
                m = [a, a, 0.0, 0.0];
                m[j as usize - 1] = 1.0 - 2.0 * a;
                ph[j as usize - 1] = chi;
            }
            CaseClass::C6 { l } => {
                let a = rng.gen_range(0.05..0.45);
                m = [0.0, 0.0, a, a];
                m[l as usize - 1] = 1.0 - 2.0 * a;
                ph[2] = chi;
                ph[3] = chi;
            }
            _ => {
                let a = rng.gen_range(0.05..0.45);
                m = [a, a, 0.5 - a, 0.5 - a];
                ph[2] = chi;
                ph[3] = chi;
            }
        }
        polar(m.map(f64::sqrt), ph)
    }

    fn max_deviation(case: CaseClass, variant: FormulaVariant, phi_range: f64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let eta = sample_case(case, &mut rng);
            let f = family_for(&eta, 0.0).unwrap();
            assert_eq!(f.case(), case);
            let chart = case.chart();
            let xi: Vec<f64> = chart
                .iter()
                .map(|c| {
                    if *c == crate::model::Coord::Phi {
                        rng.gen_range(-phi_range..phi_range)
                    } else {
                        rng.gen_range(-PI..PI)
                    }
                })
                .collect();
            let direct = concurrence(&f.state(&xi).unwrap()).unwrap();
            let closed = closed_form(case, &eta, &xi, variant).unwrap();
            worst = worst.max((closed - direct).abs());
        }
        worst
    }

    #[test]
    fn closed_forms_against_direct() {
        let half = FRAC_PI_2 - 1e-3;
        let printed = FormulaVariant::Printed;
        assert!(max_deviation(CaseClass::C1, printed, PI) < 1e-12);
        assert!(max_deviation(CaseClass::C2 { l: 2 }, printed, PI) < 1e-12);
        assert!(max_deviation(CaseClass::C3, printed, half) < 1e-12);
        assert!(max_deviation(CaseClass::C6 { l: 1 }, printed, PI) < 1e-12);
        assert!(max_deviation(CaseClass::C6 { l: 2 }, printed, PI) < 1e-12);
        assert!(max_deviation(CaseClass::C7, printed, half) < 1e-12);
        for (l, j) in [(1, 3), (1, 4), (2, 3), (2, 4)] {
            let case = CaseClass::C4 { l, j };
            assert!(max_deviation(case, printed, PI) > 1e-3);
            assert!(max_deviation(case, FormulaVariant::Amended, PI) < 1e-12);
        }
        for j in [3, 4] {
            let case = CaseClass::C5 { j };
            assert!(max_deviation(case, printed, half) > 1e-3);
            assert!(max_deviation(case, FormulaVariant::Amended, half) < 1e-12);
        }
    }

    #[test]
    fn assumptions_are_enforced() {
        let eta = polar([0.5, 0.6, 0.0, (1.0f64 - 0.61).sqrt()], [0.0; 4]);
        match concurrence_analytic(CaseClass::C5 { j: 4 }, &eta, &[0.1, 0.2, 0.3]) {
            Err(Error::AssumptionViolated(msg)) => assert!(msg.contains("eta1 = eta2")),
            other => panic!("{other:?}"),
        }
        let c3 = InitialCoefficients::from_real([0.6, 0.8, 0.0, 0.0]).unwrap();
        assert!(concurrence_analytic(CaseClass::C3, &c3, &[0.1, 2.0]).is_err());
    }

    fn eta_c5(j: u8, chi: f64) -> InitialCoefficients {
        let mut m = [0.3f64.sqrt(), 0.3f64.sqrt(), 0.0, 0.0];
        let mut ph = [0.0; 4];
        m[j as usize - 1] = 0.4f64.sqrt();
        ph[j as usize - 1] = chi;
        polar(m, ph)
    }

    #[test]
    fn table_examples() {
        for chi in [0.0, 0.7] {
            let c5 = verify_max_entangled_tables(CaseClass::C5 { j: 4 }, &eta_c5(4, chi), &DEFAULT_N_RANGE).unwrap();
            let row = c5.rows.iter().find(|r| r.row == 2).unwrap();
            assert!(row.passed || chi != 0.0, "{row:?}");
            assert_eq!(row.samples, 4 * FREE_SAMPLES.len());

            let m = [0.0, 0.4f64.sqrt(), 0.3f64.sqrt(), 0.3f64.sqrt()];
            let c6eta = polar(m, [0.0, 0.0, chi, chi]);
            let c6 = verify_max_entangled_tables(CaseClass::C6 { l: 2 }, &c6eta, &DEFAULT_N_RANGE).unwrap();
            assert!(c6.all_passed(), "{:?}", c6.failing_rows());

            let c7eta = polar([0.2f64.sqrt(), 0.2f64.sqrt(), 0.3f64.sqrt(), 0.3f64.sqrt()], [0.0, 0.0, chi, chi]);
            let c7 = verify_max_entangled_tables(CaseClass::C7, &c7eta, &DEFAULT_N_RANGE).unwrap();
            assert!(c7.all_passed(), "{:?}", c7.failing_rows());
            assert_eq!(c7.rows.len(), 12);
        }
    }

    #[test]
    fn table_needs_its_assumptions() {
        let eta = polar([0.5, 0.6, 0.0, (1.0f64 - 0.61).sqrt()], [0.0; 4]);
        assert!(verify_max_entangled_tables(CaseClass::C5 { j: 4 }, &eta, &DEFAULT_N_RANGE).is_err());
        assert!(verify_max_entangled_tables(CaseClass::C6 { l: 1 }, &eta, &DEFAULT_N_RANGE).is_err());
    }

    #[test]
    fn c2_scan_peaks_at_zero_and_pi() {
        let eta = InitialCoefficients::from_real([1.0, 0.0, 0.0, 0.0]).unwrap();
        let f = family_for(&eta, 0.0).unwrap();
        let grid: Grid = "phi=0:6.283185307179586:101".parse().unwrap();
        let scan = scan_concurrence(&f, &grid).unwrap();
        assert_abs_diff_eq!(scan.max, 1.0, epsilon = 1e-12);
        assert!(scan.argmax[0].abs() < 1e-12 || (scan.argmax[0] - PI).abs() < 0.07);
        assert!(scan.values.iter().all(|s| (0.0..=1.0 + 1e-12).contains(&s.concurrence)));
    }

    #[test]
    fn c1_scan_period() {
        let eta = InitialCoefficients::from_real([0.0, 0.0, 0.6, 0.8]).unwrap();
        let f = family_for(&eta, 0.0).unwrap();
        let grid: Grid = format!("c_plus=0:{}:129", 2.0 * PI).parse().unwrap();
        let scan = scan_concurrence(&f, &grid).unwrap();
        assert_abs_diff_eq!(scan.detected_period(1e-12).unwrap(), FRAC_PI_2, epsilon = 1e-12);
    }

    fn local_unitary(s: &TwoQubitState, u: [[Complex64; 2]; 2], v: [[Complex64; 2]; 2]) -> TwoQubitState {
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        out[2 * i + j] += u[i][k] * v[j][l] * s.amps[2 * k + l];
                    }
                }
            }
        }
        TwoQubitState::new(out)
    }

    fn su2(a: f64, b: f64, c: f64) -> [[Complex64; 2]; 2] {
        let x = Complex64::from_polar(a.cos(), b);
        let y = Complex64::from_polar(a.sin(), c);
        [[x, -y.conj()], [y, x.conj()]]
    }

    proptest! {
        #[test]
        fn concurrence_in_unit_interval(v in proptest::array::uniform8(-1.0f64..1.0)) {
            let z = [0, 1, 2, 3].map(|k| Complex64::new(v[2 * k], v[2 * k + 1]));
            let s = TwoQubitState::new(z);
            prop_assume!(s.norm() > 1e-3);
            let c = concurrence(&s.normalized().unwrap()).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&c));
        }

        #[test]
        fn local_unitary_invariance(
            v in proptest::array::uniform8(-1.0f64..1.0),
            p in proptest::array::uniform6(-PI..PI),
        ) {
            let z = [0, 1, 2, 3].map(|k| Complex64::new(v[2 * k], v[2 * k + 1]));
            let s = TwoQubitState::new(z);
            prop_assume!(s.norm() > 1e-3);
            let s = s.normalized().unwrap();
            let t = local_unitary(&s, su2(p[0], p[1], p[2]), su2(p[3], p[4], p[5]));
            prop_assert!((concurrence(&s).unwrap() - concurrence(&t).unwrap()).abs() < 1e-12);
        }
    }
}

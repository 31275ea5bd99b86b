//! Hamiltonian matrices, the closed-form eigensystem, a Jacobi eigensolver
//! and first-order eigenvectors under the transverse field.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{derive_params, ChartPoint, HamiltonianParams};

/// Default bound below which an energy denominator counts as resonant.
pub const DEFAULT_RESONANCE_THRESHOLD: f64 = 1e-6;

/// |cos φ| below this value is treated as an exact zero when fixing eigenvector signs.
const COS_ZERO: f64 = 1e-15;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A two-qubit state a|↑↑⟩ + b|↑↓⟩ + c|↓↑⟩ + d|↓↓⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitState {
    pub amps: [Complex64; 4],
}

impl TwoQubitState {
    pub const fn new(amps: [Complex64; 4]) -> Self {
        Self { amps }
    }

    pub fn from_real(amps: [f64; 4]) -> Self {
        Self { amps: amps.map(|x| Complex64::new(x, 0.0)) }
    }

    pub fn zero() -> Self {
        Self { amps: [ZERO; 4] }
    }

    pub fn basis(k: usize) -> Self {
        let mut amps = [ZERO; 4];
        amps[k] = ONE;
        Self { amps }
    }

    pub fn a(&self) -> Complex64 {
        self.amps[0]
    }
    pub fn b(&self) -> Complex64 {
        self.amps[1]
    }
    pub fn c(&self) -> Complex64 {
        self.amps[2]
    }
    pub fn d(&self) -> Complex64 {
        self.amps[3]
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(x, y)| x.conj() * y).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::ZeroState);
        }
        Ok(*self * (1.0 / n))
    }

    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// min over θ of ‖self − e^{iθ} other‖ for unit vectors, i.e. the distance between rays.
    pub fn ray_distance(&self, other: &Self) -> f64 {
        (*self - other.aligned_to(self)).norm()
    }

    /// Multiplies by the phase that makes ⟨reference|self⟩ real and non-negative.
    pub fn aligned_to(&self, reference: &Self) -> Self {
        let ov = reference.inner(self);
        let n = ov.norm();
        if n == 0.0 {
            return *self;
        }
        *self * (ov.conj() / n)
    }
}

impl Add for TwoQubitState {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut amps = self.amps;
        for (a, b) in amps.iter_mut().zip(rhs.amps) {
            *a += b;
        }
        Self { amps }
    }
}

impl Sub for TwoQubitState {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for TwoQubitState {
    type Output = Self;
    fn neg(self) -> Self {
        Self { amps: self.amps.map(|z| -z) }
    }
}

impl Mul<Complex64> for TwoQubitState {
    type Output = Self;
    fn mul(self, s: Complex64) -> Self {
        Self { amps: self.amps.map(|z| z * s) }
    }
}

impl Mul<f64> for TwoQubitState {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self { amps: self.amps.map(|z| z * s) }
    }
}

/// A 4×4 complex matrix that is Hermitian up to rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermitianMatrix4 {
    m: [[Complex64; 4]; 4],
}

impl HermitianMatrix4 {
    /// Accepts `m` if it equals its conjugate transpose within `1e-12·max(1, ‖m‖_max)`.
    pub fn new(m: [[Complex64; 4]; 4]) -> Result<Self> {
        let dev = hermitian_deviation(&m);
        let scale = m.iter().flatten().map(|z| z.norm()).fold(1.0, f64::max);
        if !dev.is_finite() || dev > 1e-12 * scale {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self { m })
    }

    pub fn entries(&self) -> &[[Complex64; 4]; 4] {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[i][j]
    }

    pub fn apply(&self, s: &TwoQubitState) -> TwoQubitState {
        let mut out = [ZERO; 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|j| self.m[i][j] * s.amps[j]).sum();
        }
        TwoQubitState::new(out)
    }

    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.m[i][i]).sum()
    }

    /// ⟨x|M|y⟩.
    pub fn expectation(&self, x: &TwoQubitState, y: &TwoQubitState) -> Complex64 {
        x.inner(&self.apply(y))
    }

    /// ‖Mψ − Eψ‖.
    pub fn residual(&self, s: &TwoQubitState, e: f64) -> f64 {
        (self.apply(s) - *s * e).norm()
    }
}

fn hermitian_deviation(m: &[[Complex64; 4]; 4]) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            dev = dev.max((m[i][j] - m[j][i].conj()).norm());
        }
    }
    dev
}

type M2 = [[Complex64; 2]; 2];

fn pauli(k: usize) -> M2 {
    match k {
        0 => [[ONE, ZERO], [ZERO, ONE]],
        1 => [[ZERO, ONE], [ONE, ZERO]],
        2 => [[ZERO, -I], [I, ZERO]],
        _ => [[ONE, ZERO], [ZERO, -ONE]],
    }
}

/// Kronecker product in the (↑↑, ↑↓, ↓↑, ↓↓) ordering.
fn kron(a: &M2, b: &M2) -> [[Complex64; 4]; 4] {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn accumulate(acc: &mut [[Complex64; 4]; 4], term: &[[Complex64; 4]; 4], w: f64) {
    for i in 0..4 {
        for j in 0..4 {
            acc[i][j] += term[i][j] * w;
        }
    }
}

/// b(σ₃⊗𝟙 + 𝟙⊗σ₃) + Σ c_j σ_j⊗σ_j + β(σ₁⊗𝟙 + 𝟙⊗σ₁).
pub fn build_hamiltonian(p: &HamiltonianParams) -> HermitianMatrix4 {
    let mut h = [[ZERO; 4]; 4];
    let id = pauli(0);
    accumulate(&mut h, &kron(&pauli(3), &id), p.b);
    accumulate(&mut h, &kron(&id, &pauli(3)), p.b);
    for (k, c) in [(1, p.c1), (2, p.c2), (3, p.c3)] {
        accumulate(&mut h, &kron(&pauli(k), &pauli(k)), c);
    }
    accumulate(&mut h, &transverse_field().m, p.beta);
    HermitianMatrix4 { m: h }
}

/// The perturbing operator σ₁⊗𝟙 + 𝟙⊗σ₁.
pub fn transverse_field() -> HermitianMatrix4 {
    let mut v = [[ZERO; 4]; 4];
    accumulate(&mut v, &kron(&pauli(1), &pauli(0)), 1.0);
    accumulate(&mut v, &kron(&pauli(0), &pauli(1)), 1.0);
    HermitianMatrix4 { m: v }
}

/// Eigenvalues with their eigenvectors, index k ↔ label E_{k+1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub energies: [f64; 4],
    pub states: [TwoQubitState; 4],
}

impl Spectrum {
    pub fn residuals(&self, h: &HermitianMatrix4) -> [f64; 4] {
        let mut r = [0.0; 4];
        for k in 0..4 {
            r[k] = h.residual(&self.states[k], self.energies[k]);
        }
        r
    }

    /// max |⟨ψ_i|ψ_j⟩ − δ_ij|.
    pub fn orthonormality_error(&self) -> f64 {
        let mut err: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let target = if i == j { ONE } else { ZERO };
                err = err.max((self.states[i].inner(&self.states[j]) - target).norm());
            }
        }
        err
    }

    pub fn sorted_energies(&self) -> [f64; 4] {
        let mut e = self.energies;
        e.sort_by(f64::total_cmp);
        e
    }
}

/// The unperturbed eigenvectors as functions of φ alone.
///
/// The first two are written with cos φ/√(1∓sin φ) replaced by sgn(cos φ)√(1±sin φ),
/// which removes the 0/0 at |sin φ| = 1. When |cos φ| is at rounding level the sign is
/// taken as +1, its value on the cos φ > 0 side.
pub fn unperturbed_eigenvectors(phi: f64) -> [TwoQubitState; 4] {
    let (s, c) = phi.sin_cos();
    let sgn = if c.abs() < COS_ZERO { 1.0 } else { c.signum() };
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let sp = (1.0 + s).max(0.0).sqrt();
    let sm = (1.0 - s).max(0.0).sqrt();
    [
        TwoQubitState::from_real([r * sgn * sp, 0.0, 0.0, r * sm]),
        TwoQubitState::from_real([r * sgn * sm, 0.0, 0.0, -r * sp]),
        TwoQubitState::from_real([0.0, r, r, 0.0]),
        TwoQubitState::from_real([0.0, r, -r, 0.0]),
    ]
}

/// Energies E₁…E₄ = (c₃+ω, c₃−ω, −c₃+c₊, −c₃−c₊) at a chart point.
pub fn unperturbed_energies(pt: &ChartPoint) -> [f64; 4] {
    [pt.c3 + pt.omega, pt.c3 - pt.omega, -pt.c3 + pt.c_plus, -pt.c3 - pt.c_plus]
}

/// Closed-form eigensystem of the β = 0 Hamiltonian.
pub fn analytic_spectrum(p: &HamiltonianParams) -> Result<Spectrum> {
    if p.beta != 0.0 {
        return Err(Error::InvalidArgument(
            "analytic_spectrum covers the unperturbed Hamiltonian; use perturbed_eigenstates for beta != 0".into(),
        ));
    }
    let pt = ChartPoint::from_params(p)?;
    Ok(Spectrum { energies: unperturbed_energies(&pt), states: unperturbed_eigenvectors(pt.phi) })
}

fn matmul(a: &[[Complex64; 4]; 4], b: &[[Complex64; 4]; 4]) -> [[Complex64; 4]; 4] {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn adjoint(a: &[[Complex64; 4]; 4]) -> [[Complex64; 4]; 4] {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

fn off_diagonal_norm(a: &[[Complex64; 4]; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                s += a[i][j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi diagonalization; eigenvalues ascending.
pub fn numeric_spectrum(h: &HermitianMatrix4) -> Result<Spectrum> {
    let dev = hermitian_deviation(&h.m);
    let frob = h.m.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !frob.is_finite() {
        return Err(Error::NonFinite("hamiltonian"));
    }
    if dev > 1e-12 * frob.max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    let tol = 1e-14 * frob.max(1.0);
    let mut a = h.m;
    let mut v = [[ZERO; 4]; 4];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = ONE;
    }
    let mut sweeps = 0;
    while off_diagonal_norm(&a) > tol {
        if sweeps == 100 {
            return Err(Error::NoConvergence(off_diagonal_norm(&a)));
        }
        sweeps += 1;
        for p in 0..3 {
            for q in (p + 1)..4 {
                let apq = a[p][q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                // Rotate the phase of a_pq away, then apply a real Jacobi rotation.
                let ph = apq / r;
                let theta = (a[q][q].re - a[p][p].re) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let mut j = [[ZERO; 4]; 4];
                for (i, row) in j.iter_mut().enumerate() {
                    row[i] = ONE;
                }
                j[p][p] = Complex64::new(c, 0.0);
                j[p][q] = Complex64::new(s, 0.0);
                j[q][p] = ph.conj() * (-s);
                j[q][q] = ph.conj() * c;
                a = matmul(&adjoint(&j), &matmul(&a, &j));
                a[p][q] = ZERO;
                a[q][p] = ZERO;
                v = matmul(&v, &j);
            }
        }
    }
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&x, &y| a[x][x].re.total_cmp(&a[y][y].re));
    let mut energies = [0.0; 4];
    let mut states = [TwoQubitState::zero(); 4];
    for (k, &idx) in order.iter().enumerate() {
        energies[k] = a[idx][idx].re;
        states[k] = TwoQubitState::new([v[0][idx], v[1][idx], v[2][idx], v[3][idx]]);
    }
    Ok(Spectrum { energies, states })
}

/// How an analytic eigenpair is represented in a numeric spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelMatch {
    /// Index into the numeric (ascending) spectrum with the largest overlap.
    pub numeric_index: usize,
    /// |⟨ψ_numeric|ψ_analytic⟩| for that index.
    pub overlap: f64,
    /// Weight of the analytic vector inside the numeric eigenspace of equal energy.
    pub subspace_weight: f64,
}

/// Matches analytic labels to numeric eigenpairs by maximal overlap; degenerate
/// levels are judged by the weight of the analytic vector in the whole eigenspace.
pub fn match_labels(numeric: &Spectrum, analytic: &Spectrum, degeneracy_tol: f64) -> [LabelMatch; 4] {
    let mut out = [LabelMatch { numeric_index: 0, overlap: 0.0, subspace_weight: 0.0 }; 4];
    for (k, m) in out.iter_mut().enumerate() {
        let psi = &analytic.states[k];
        let (best, ov) = (0..4)
            .map(|i| (i, numeric.states[i].inner(psi).norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap_or((0, 0.0));
        let e = analytic.energies[k];
        let weight: f64 = (0..4)
            .filter(|&i| (numeric.energies[i] - e).abs() <= degeneracy_tol)
            .map(|i| numeric.states[i].inner(psi).norm_sqr())
            .sum();
        *m = LabelMatch { numeric_index: best, overlap: ov, subspace_weight: weight };
    }
    out
}

/// The two energy denominators 2c₃+ω−c₊ and 2c₃−ω−c₊.
pub fn energy_denominators(pt: &ChartPoint) -> [f64; 2] {
    [2.0 * pt.c3 + pt.omega - pt.c_plus, 2.0 * pt.c3 - pt.omega - pt.c_plus]
}

/// First-order eigenvector corrections δψ_k per unit β, so that ψ_k ≈ ψ_k⁽⁰⁾ + β δψ_k.
///
/// With m_k = ⟨ψ_k⁽⁰⁾|V|ψ₃⁽⁰⁾⟩ and the denominators d₁, d₂ this reads
/// δψ₁ = (m₁/d₁)ψ₃, δψ₂ = (m₂/d₂)ψ₃, δψ₃ = −(m₁/d₁)ψ₁ − (m₂/d₂)ψ₂, δψ₄ = 0.
pub fn first_order_corrections(pt: &ChartPoint, rho: f64) -> Result<[TwoQubitState; 4]> {
    let [d1, d2] = energy_denominators(pt);
    if !(d1.abs() >= rho) {
        return Err(Error::Resonance { name: "2c3+omega-c_plus", value: d1 });
    }
    if !(d2.abs() >= rho) {
        return Err(Error::Resonance { name: "2c3-omega-c_plus", value: d2 });
    }
    let psi = unperturbed_eigenvectors(pt.phi);
    let m = |k: usize| std::f64::consts::SQRT_2 * (psi[k].a().re + psi[k].d().re);
    let k1 = m(0) / d1;
    let k2 = m(1) / d2;
    Ok([
        psi[2] * k1,
        psi[2] * k2,
        -(psi[0] * k1) - psi[1] * k2,
        TwoQubitState::zero(),
    ])
}

/// First-order corrected eigenvectors at a chart point (not renormalized).
pub fn perturbed_basis(pt: &ChartPoint, beta: f64, rho: f64) -> Result<[TwoQubitState; 4]> {
    let psi = unperturbed_eigenvectors(pt.phi);
    if beta == 0.0 {
        return Ok(psi);
    }
    let delta = first_order_corrections(pt, rho)?;
    let mut out = psi;
    for k in 0..4 {
        out[k] = psi[k] + delta[k] * beta;
    }
    Ok(out)
}

/// Eigenpairs of H + β(σ₁⊗𝟙 + 𝟙⊗σ₁) to first order in β with the default resonance threshold.
pub fn perturbed_eigenstates(p: &HamiltonianParams, beta: f64) -> Result<Spectrum> {
    perturbed_eigenstates_with(p, beta, DEFAULT_RESONANCE_THRESHOLD)
}

/// As [`perturbed_eigenstates`] with an explicit resonance threshold ρ.
/// The energies are the unperturbed ones; the vectors are not renormalized.
pub fn perturbed_eigenstates_with(p: &HamiltonianParams, beta: f64, rho: f64) -> Result<Spectrum> {
    if !beta.is_finite() {
        return Err(Error::NonFinite("beta"));
    }
    let pt = ChartPoint::from_params(&p.with_beta(0.0))?;
    Ok(Spectrum { energies: unperturbed_energies(&pt), states: perturbed_basis(&pt, beta, rho)? })
}

/// First-order energy shifts ⟨ψ_k⁽⁰⁾|V|ψ_k⁽⁰⁾⟩, evaluated numerically from the operator.
pub fn first_order_energy_shifts(pt: &ChartPoint) -> [f64; 4] {
    let v = transverse_field();
    let psi = unperturbed_eigenvectors(pt.phi);
    psi.map(|s| v.expectation(&s, &s).re)
}

/// Hamiltonian couplings that realise a chart point (b, c₁, c₂, c₃) with the given β.
pub fn params_from_chart(pt: &ChartPoint, beta: f64) -> HamiltonianParams {
    let c_minus = pt.omega * pt.phi.cos();
    HamiltonianParams {
        b: 0.5 * pt.omega * pt.phi.sin(),
        c1: 0.5 * (pt.c_plus + c_minus),
        c2: 0.5 * (pt.c_plus - c_minus),
        c3: pt.c3,
        beta,
    }
}

/// Quick consistency check used by reports: `derive_params` inverts `params_from_chart`
/// for ω > 0 and φ ∈ (−π, π].
pub fn chart_roundtrip_error(pt: &ChartPoint) -> f64 {
    let d = derive_params(&params_from_chart(pt, 0.0));
    (d.omega - pt.omega).abs().max((d.phi - pt.phi).abs()).max((d.c_plus - pt.c_plus).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn hamiltonian_examples() {
        let h = build_hamiltonian(&HamiltonianParams::new(0.0, 0.0, 0.0, 0.0));
        assert!(h.entries().iter().flatten().all(|z| *z == ZERO));

        let h = build_hamiltonian(&HamiltonianParams::new(1.0, 0.0, 0.0, 0.0));
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { [2.0, 0.0, 0.0, -2.0][i] } else { 0.0 };
                assert_eq!(h.get(i, j), c(expected));
            }
        }

        let h = build_hamiltonian(&HamiltonianParams::new(0.0, 1.0, 0.0, 0.0));
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(h.get(i, j), c(if i + j == 3 { 1.0 } else { 0.0 }));
            }
        }
    }

    #[test]
    fn hamiltonian_is_traceless_and_hermitian() {
        let h = build_hamiltonian(&HamiltonianParams::new(0.3, -0.7, 1.1, 0.4).with_beta(0.2));
        assert_abs_diff_eq!(h.trace().norm(), 0.0, epsilon = 1e-15);
        assert!(HermitianMatrix4::new(*h.entries()).is_ok());
    }

    #[test]
    fn analytic_examples() {
        let s = analytic_spectrum(&HamiltonianParams::new(0.0, 1.0, 0.0, 0.0)).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(s.energies[0], 1.0);
        for (x, y) in s.states[0].amps.iter().zip([r, 0.0, 0.0, r]) {
            assert_abs_diff_eq!(x.re, y, epsilon = 1e-15);
        }

        let p = HamiltonianParams::new(0.5, 0.8, 0.2, 0.3);
        let s = analytic_spectrum(&p).unwrap();
        let h = build_hamiltonian(&p);
        assert!(s.residuals(&h).iter().all(|&r| r < 1e-12));
        assert_abs_diff_eq!(s.energies[3], -0.3 - 1.0, epsilon = 1e-15);
        assert_eq!(s.states[3], TwoQubitState::from_real([0.0, r, -r, 0.0]));
    }

    #[test]
    fn pure_field_limit_is_finite() {
        for b in [0.7, -0.7] {
            let p = HamiltonianParams::new(b, 0.4, 0.4, -0.2);
            let s = analytic_spectrum(&p).unwrap();
            let h = build_hamiltonian(&p);
            assert!(s.residuals(&h).iter().all(|&r| r < 1e-12), "b = {b}");
            assert!(s.orthonormality_error() < 1e-12);
        }
    }

    #[test]
    fn analytic_matches_jacobi_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p = HamiltonianParams::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let h = build_hamiltonian(&p);
            let a = analytic_spectrum(&p).unwrap();
            let n = numeric_spectrum(&h).unwrap();
            assert!(a.residuals(&h).iter().all(|&r| r < 1e-10));
            assert!(a.orthonormality_error() < 1e-10);
            for (x, y) in a.sorted_energies().iter().zip(n.energies) {
                assert_abs_diff_eq!(*x, y, epsilon = 1e-12);
            }
            assert!(n.residuals(&h).iter().all(|&r| r < 1e-12));
            assert_abs_diff_eq!(a.energies.iter().sum::<f64>(), 0.0, epsilon = 1e-12);
            for m in match_labels(&n, &a, 1e-9) {
                assert_abs_diff_eq!(m.subspace_weight, 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn jacobi_examples() {
        let d = build_hamiltonian(&HamiltonianParams::new(1.0, 0.0, 0.0, 0.0));
        assert_eq!(numeric_spectrum(&d).unwrap().energies, [-2.0, 0.0, 0.0, 2.0]);

        let mut id = [[ZERO; 4]; 4];
        for (i, row) in id.iter_mut().enumerate() {
            row[i] = ONE;
        }
        let s = numeric_spectrum(&HermitianMatrix4::new(id).unwrap()).unwrap();
        assert_eq!(s.energies, [1.0; 4]);
        assert!(s.orthonormality_error() < 1e-15);

        let mut bad = id;
        bad[0][1] = c(1.0);
        assert!(matches!(HermitianMatrix4::new(bad), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn jacobi_handles_complex_entries() {
        let mut m = [[ZERO; 4]; 4];
        let vals = [
            (0, 1, Complex64::new(0.3, -0.8)),
            (0, 3, Complex64::new(-0.2, 0.5)),
            (1, 2, Complex64::new(0.0, 1.1)),
            (2, 3, Complex64::new(0.7, 0.1)),
        ];
        for (i, j, z) in vals {
            m[i][j] = z;
            m[j][i] = z.conj();
        }
        for (i, d) in [0.5, -0.1, 0.9, -1.3].iter().enumerate() {
            m[i][i] = c(*d);
        }
        let h = HermitianMatrix4::new(m).unwrap();
        let s = numeric_spectrum(&h).unwrap();
        assert!(s.residuals(&h).iter().all(|&r| r < 1e-13));
        assert!(s.orthonormality_error() < 1e-13);
        assert!(s.energies.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn perturbed_examples() {
        let p = HamiltonianParams::new(0.5, 0.8, 0.2, 0.3);
        assert_eq!(perturbed_eigenstates(&p, 0.0).unwrap(), analytic_spectrum(&p).unwrap());
        let s = perturbed_eigenstates(&p, 0.37).unwrap();
        assert_eq!(s.states[3], analytic_spectrum(&p).unwrap().states[3]);
    }

    #[test]
    fn perturbed_vectors_converge_quadratically() {
        let p = HamiltonianParams::new(0.5, 0.8, 0.2, 0.3);
        let mut errs = Vec::new();
        for beta in [1e-2, 1e-3, 1e-4] {
            let approx = perturbed_eigenstates(&p, beta).unwrap();
            let exact = numeric_spectrum(&build_hamiltonian(&p.with_beta(beta))).unwrap();
            let mut worst: f64 = 0.0;
            for k in 0..4 {
                let v = approx.states[k].normalized().unwrap();
                let best = exact.states.iter().map(|e| v.ray_distance(e)).fold(f64::INFINITY, f64::min);
                worst = worst.max(best);
            }
            errs.push(worst);
        }
        for w in errs.windows(2) {
            let slope = (w[0] / w[1]).log10();
            assert!((slope - 2.0).abs() < 0.1, "slope {slope}, errs {errs:?}");
        }
        let k: Vec<f64> = errs.iter().zip([1e-2, 1e-3, 1e-4]).map(|(e, b)| e / (b * b)).collect();
        assert!(k.iter().all(|x| (x / k[0] - 1.0).abs() < 0.05), "{k:?}");
    }

    #[test]
    fn printed_corrections_agree_with_operator_form() {
        // ψ₁ correction written with cos φ/√(1−sin φ) as printed, away from the pole.
        let pt = ChartPoint::new(0.9, 0.4, 0.7, -0.3);
        let [d1, d2] = energy_denominators(&pt);
        let (s, co) = pt.phi.sin_cos();
        let delta = first_order_corrections(&pt, 1e-6).unwrap();
        let psi3 = unperturbed_eigenvectors(pt.phi)[2];
        let k1 = (co - s + 1.0) / (1.0 - s).sqrt() / d1;
        let k2 = (co - s - 1.0) / (1.0 + s).sqrt() / d2;
        assert!((delta[0] - psi3 * k1).norm() < 1e-14);
        assert!((delta[1] - psi3 * k2).norm() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let t1 = (co - s + 1.0) * r / (-d1);
        let t2 = (co - s - 1.0) * r / (-d2);
        let printed3 = TwoQubitState::from_real([
            t1 * co / (1.0 - s) + t2 * co / (1.0 + s),
            0.0,
            0.0,
            t1 - t2,
        ]);
        assert!((delta[2] - printed3).norm() < 1e-14);
    }

    #[test]
    fn resonance_is_reported() {
        let pt = ChartPoint::new(1.0, 0.2, 0.5, 2.0);
        assert!(matches!(first_order_corrections(&pt, 1e-6), Err(Error::Resonance { .. })));
    }

    #[test]
    fn first_order_shifts_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let pt = ChartPoint::new(
                rng.gen_range(0.0..3.0),
                rng.gen_range(-3.1..3.1),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            assert!(first_order_energy_shifts(&pt).iter().all(|x| x.abs() < 1e-15));
        }
    }

    #[test]
    fn chart_roundtrip() {
        let pt = ChartPoint::new(1.3, -2.2, 0.4, 0.9);
        assert!(chart_roundtrip_error(&pt) < 1e-14);
    }
}

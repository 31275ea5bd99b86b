//! One function per subcommand. Each returns a [`Report`] holding the JSON results,
//! the named checks and the CSV view of the same data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use tq_geometry::curvature::{
    analytic_g0_and_ricci, curvature_at, perturbed_scalar_curvature_closed_form, sphere_torus_scalar_curvature,
    FamilyField, FAMILY_FIELD_METRIC_STEP,
};
use tq_geometry::entanglement::{
    concurrence, concurrence_analytic, scan_concurrence, verify_max_entangled_tables, DEFAULT_N_RANGE,
};
use tq_geometry::families::{check_periodicity, family_for, family_for_case, ParametrizedState, Rephased, StateFamily};
use tq_geometry::fubini_study::{analytic_metric_c7, analytic_metric_case, numeric_fs_metric, DEFAULT_METRIC_STEP};
use tq_geometry::hamiltonian::{
    analytic_spectrum, build_hamiltonian, first_order_energy_shifts, match_labels, numeric_spectrum,
    perturbed_eigenstates,
};
use tq_geometry::model::{
    classify, derive_params, CaseClass, ChartPoint, Grid, HamiltonianParams, InitialCoefficients,
    DEFAULT_CLASSIFY_TOL,
};
use tq_geometry::perturbation::{
    correction_norm, is_unperturbed_pattern, linearity_check, metric_correction_analytic, metric_derivative_beta,
    COMPONENTS,
};
use tq_geometry::{Error, Result};

use crate::input::default_eta;
use crate::output::{cell, Check, Report, Table};

/// Fully resolved inputs of one run; embedded verbatim in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub params: HamiltonianParams,
    pub eta: Option<InitialCoefficients>,
    pub eta_input_norm: Option<f64>,
    pub case: Option<CaseClass>,
    pub gamma: f64,
    pub point: Option<Vec<f64>>,
    pub grid: Option<Grid>,
    pub h_metric: Option<f64>,
    pub h_curv: f64,
    pub format: String,
    pub seed: u64,
    pub suite: Option<String>,
}

impl RunConfig {
    fn h_metric(&self) -> f64 {
        self.h_metric.unwrap_or(DEFAULT_METRIC_STEP)
    }

    fn eta(&self) -> InitialCoefficients {
        match (self.eta, self.case) {
            (Some(e), _) => e,
            (None, Some(c)) => default_eta(c),
            (None, None) => default_eta(CaseClass::C7),
        }
    }

    fn family(&self) -> Result<StateFamily> {
        let eta = self.eta();
        let f = match self.case {
            Some(c) => family_for_case(c, &eta, self.params.beta)?,
            None => family_for(&eta, self.params.beta)?,
        };
        Ok(f.with_spectator(self.spectator()?))
    }

    fn spectator(&self) -> Result<ChartPoint> {
        ChartPoint::from_params(&self.params.with_beta(0.0))
    }

    /// `--point` if given, otherwise the chart coordinates reached from the couplings.
    fn point(&self, f: &StateFamily) -> Result<Vec<f64>> {
        match &self.point {
            Some(p) if p.len() != f.dim() => Err(Error::DimensionMismatch { expected: f.dim(), got: p.len() }),
            Some(p) => Ok(p.clone()),
            None => Ok(f.chart_coordinates(&f.spectator())),
        }
    }

    fn points(&self, f: &StateFamily) -> Result<Vec<Vec<f64>>> {
        match &self.grid {
            Some(g) => g.points(&f.chart(), &self.point(f)?),
            None => Ok(vec![self.point(f)?]),
        }
    }

    fn config_value(&self) -> Value {
        serde_json::to_value(self).unwrap_or(Value::Null)
    }
}

fn report(cfg: &RunConfig, results: Value, checks: Vec<Check>, table: Table) -> Report {
    Report { config: cfg.config_value(), results, checks, table }
}

fn chart_names(f: &StateFamily) -> Vec<String> {
    f.chart().iter().map(|c| c.name().to_string()).collect()
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

pub fn spectrum(cfg: &RunConfig) -> Result<Report> {
    let p = cfg.params;
    p.validate()?;
    let h0 = build_hamiltonian(&p.with_beta(0.0));
    let analytic = analytic_spectrum(&p.with_beta(0.0))?;
    let numeric = numeric_spectrum(&h0)?;
    let res_a = analytic.residuals(&h0);
    let labels = match_labels(&numeric, &analytic, 1e-9);
    let overlaps: Vec<Vec<f64>> =
        (0..4).map(|i| (0..4).map(|j| numeric.states[i].inner(&analytic.states[j]).norm()).collect()).collect();
    let sorted_a = analytic.sorted_energies();
    let energy_dev = sorted_a.iter().zip(&numeric.energies).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = sorted_a.iter().fold(1.0f64, |m, e| m.max(e.abs()));

    let mut checks = vec![
        Check::below("analytic_residual", res_a.iter().cloned().fold(0.0, f64::max), 1e-10, true),
        Check::below("energies_match_numeric", energy_dev, 1e-12 * scale, true),
        Check::below("orthonormality", analytic.orthonormality_error(), 1e-12, true),
    ];
    let mut results = json!({
        "derived": to_value(&derive_params(&p)),
        "analytic": (0..4).map(|k| json!({
            "label": format!("E{}", k + 1),
            "energy": analytic.energies[k],
            "residual": res_a[k],
            "state": to_value(&analytic.states[k]),
            "numeric_index": labels[k].numeric_index,
            "overlap": labels[k].overlap,
            "subspace_weight": labels[k].subspace_weight,
        })).collect::<Vec<_>>(),
        "numeric": {
            "energies": numeric.energies.to_vec(),
            "residuals": numeric.residuals(&h0).to_vec(),
        },
        "overlaps": overlaps,
    });

    let mut header = vec!["label", "analytic_energy", "numeric_energy", "residual"];
    let mut pert_rows: Option<[f64; 4]> = None;
    if p.beta != 0.0 {
        let h = build_hamiltonian(&p);
        let pert = perturbed_eigenstates(&p, p.beta)?;
        let pt = ChartPoint::from_params(&p.with_beta(0.0))?;
        let shifts = first_order_energy_shifts(&pt);
        let res: Vec<f64> = (0..4)
            .map(|k| {
                let s = pert.states[k].normalized()?;
                Ok(h.residual(&s, pert.energies[k] + p.beta * shifts[k]))
            })
            .collect::<Result<_>>()?;
        let worst = res.iter().cloned().fold(0.0, f64::max);
        checks.push(
            Check::below("perturbation_residual", worst, 10.0 * p.beta * p.beta * scale.max(1.0), false)
                .with_note("first-order states leave an O(beta^2) residual"),
        );
        results["perturbed"] = json!({
            "beta": p.beta,
            "energy_shifts": shifts.to_vec(),
            "residuals": res,
            "full_numeric_energies": numeric_spectrum(&h)?.energies.to_vec(),
        });
        header.push("perturbation_residual");
        pert_rows = Some([res[0], res[1], res[2], res[3]]);
    }

    let mut table = Table::new(&header);
    for k in 0..4 {
        let mut row = vec![
            format!("E{}", k + 1),
            cell(analytic.energies[k]),
            cell(numeric.energies[labels[k].numeric_index]),
            cell(res_a[k]),
        ];
        if let Some(r) = pert_rows {
            row.push(cell(r[k]));
        }
        table.push(row);
    }
    Ok(report(cfg, results, checks, table))
}

pub fn classify_cmd(cfg: &RunConfig) -> Result<Report> {
    let eta = cfg.eta();
    let case = classify(&eta, DEFAULT_CLASSIFY_TOL)?;
    if let Some(c) = cfg.case {
        if c != case {
            return Err(Error::CaseMismatch { requested: c.to_string(), found: case.to_string() });
        }
    }
    let chart: Vec<&str> = case.chart().iter().map(|c| c.name()).collect();
    let chi = tq_geometry::entanglement::relative_phase(case, &eta);
    let results = json!({
        "case": case.to_string(),
        "label": case.label(),
        "dimension": case.dimension(),
        "chart": chart,
        "chi": chi,
    });
    let mut table = Table::new(&["case", "dimension", "chart"]);
    table.push(vec![case.to_string(), case.dimension().to_string(), chart.join(" ")]);
    Ok(report(cfg, results, Vec::new(), table))
}

pub fn evolve(cfg: &RunConfig) -> Result<Report> {
    let f = cfg.family()?;
    let names = chart_names(&f);
    let mut header = names.clone();
    header.extend(["re_a", "im_a", "re_b", "im_b", "re_c", "im_c", "re_d", "im_d", "concurrence"].map(String::from));
    let mut table = Table::new(&header);
    let mut samples = Vec::new();
    let mut worst_norm: f64 = 0.0;
    for xi in cfg.points(&f)? {
        let s = f.state(&xi)?;
        let c = concurrence(&s)?;
        worst_norm = worst_norm.max((s.norm() - 1.0).abs());
        let mut row: Vec<String> = xi.iter().map(|&x| cell(x)).collect();
        for z in s.amps {
            row.push(cell(z.re));
            row.push(cell(z.im));
        }
        row.push(cell(c));
        table.push(row);
        samples.push(json!({
            "point": xi,
            "full_point": to_value(&f.full_point(&xi)?),
            "state": to_value(&s),
            "concurrence": c,
        }));
    }
    let results = json!({ "case": f.case().to_string(), "chart": names, "samples": samples });
    let checks = vec![Check::below("normalization", worst_norm, 1e-12, true)];
    Ok(report(cfg, results, checks, table))
}

pub fn metric(cfg: &RunConfig) -> Result<Report> {
    let f = cfg.family()?;
    let h = cfg.h_metric();
    let names = chart_names(&f);
    let n = f.dim();
    let mut header = names.clone();
    header.extend(["i", "j", "numeric", "closed_form"].map(String::from));
    let mut table = Table::new(&header);
    let mut samples = Vec::new();
    let mut checks = Vec::new();
    let mut dev_c7: f64 = 0.0;
    let mut dev_case: Option<f64> = None;
    let mut dev_pert: f64 = 0.0;
    for xi in cfg.points(&f)? {
        let g = numeric_fs_metric(&f, &xi, cfg.gamma, h)?;
        let mut sample = json!({
            "point": xi,
            "numeric": to_value(&g),
            "eigenvalues": g.eigenvalues(),
        });
        let mut closed: Option<tq_geometry::fubini_study::MetricTensor> = None;
        if f.case() == CaseClass::C7 {
            let pt = f.full_point(&xi)?;
            if f.beta() == 0.0 {
                let a = analytic_metric_c7(f.eta(), &pt, cfg.gamma)?;
                dev_c7 = dev_c7.max(g.max_abs_diff(&a)?);
                sample["closed_form"] = to_value(&a);
                closed = Some(a);
            } else {
                let base = analytic_metric_c7(f.eta(), &pt, cfg.gamma)?;
                let corr = metric_correction_analytic(f.eta(), &pt, cfg.gamma, 1e-6)?;
                let a = tq_geometry::fubini_study::MetricTensor::from_fn(4, cfg.gamma, |i, j| {
                    base.get(i, j) + f.beta() * corr.get(i, j)
                })?;
                dev_pert = dev_pert.max(g.max_abs_diff(&a)?);
                sample["closed_form_perturbed"] = to_value(&a);
                closed = Some(a);
            }
        } else if f.beta() == 0.0 {
            let cm = analytic_metric_case(&f, &xi, cfg.gamma)?;
            if cm.chart == f.chart() {
                let d = g.max_abs_diff(&cm.metric)?;
                dev_case = Some(dev_case.unwrap_or(0.0).max(d));
                closed = Some(cm.metric);
            }
            sample["case_closed_form"] = to_value(&cm);
        }
        for i in 0..n {
            for j in 0..n {
                let mut row: Vec<String> = xi.iter().map(|&x| cell(x)).collect();
                row.extend([i.to_string(), j.to_string(), cell(g.get(i, j))]);
                row.push(closed.as_ref().map(|m| cell(m.get(i, j))).unwrap_or_default());
                table.push(row);
            }
        }
        samples.push(sample);
    }
    if f.case() == CaseClass::C7 && f.beta() == 0.0 {
        checks.push(Check::below("closed_form_c7", dev_c7, 1e-6, true));
    }
    if f.case() == CaseClass::C7 && f.beta() != 0.0 {
        checks.push(
            Check::below("closed_form_perturbed", dev_pert, 1e-6, false)
                .with_note("first-order closed form; the numeric metric carries O(beta^2) terms"),
        );
    }
    if let Some(d) = dev_case {
        checks.push(
            Check::below("closed_form_case", d, 1e-6, false)
                .with_note("published per-case form in the family chart"),
        );
    }
    let results = json!({
        "case": f.case().to_string(),
        "chart": names,
        "h_metric": h,
        "samples": samples,
    });
    Ok(report(cfg, results, checks, table))
}

/// Closed-form scalar curvature where one is known for the family.
fn closed_form_curvature(f: &StateFamily, gamma: f64, xi: &[f64]) -> Vec<(&'static str, f64)> {
    let eta = f.eta();
    match f.case() {
        CaseClass::C1 | CaseClass::C2 { .. } | CaseClass::C4 { .. } => vec![("flat", 0.0)],
        CaseClass::C3 => {
            sphere_torus_scalar_curvature(eta.eta12_plus(), gamma).map(|r| vec![("sphere", r)]).unwrap_or_default()
        }
        CaseClass::C7 if f.beta() == 0.0 && (0..4).all(|k| (eta.abs2(k) - 0.25).abs() < 1e-12) => {
            let mut out = Vec::new();
            if let Ok(g0) = analytic_g0_and_ricci(xi[0], eta.alpha(0) - eta.alpha(1), gamma) {
                out.push(("g0_example", g0.scalar));
            }
            out
        }
        CaseClass::C7 if (0..4).all(|k| (eta.abs2(k) - 0.25).abs() < 1e-12) => {
            perturbed_scalar_curvature_closed_form(xi[0], f.beta(), gamma)
                .map(|r| vec![("perturbed_closed_form", r)])
                .unwrap_or_default()
        }
        _ => Vec::new(),
    }
}

pub fn curvature(cfg: &RunConfig) -> Result<Report> {
    let f = cfg.family()?;
    let h_metric = cfg.h_metric.unwrap_or(FAMILY_FIELD_METRIC_STEP);
    let field = FamilyField::new(&f, cfg.gamma).with_metric_step(h_metric);
    let names = chart_names(&f);
    let mut header = names.clone();
    header.extend(["scalar", "richardson_delta", "condition_number", "closed_form"].map(String::from));
    let mut table = Table::new(&header);
    let mut samples = Vec::new();
    let mut checks = Vec::new();
    for xi in cfg.points(&f)? {
        let rep = curvature_at(&field, &xi, cfg.h_curv)?;
        let closed = closed_form_curvature(&f, cfg.gamma, &xi);
        for (name, value) in &closed {
            let rel = (rep.scalar - value).abs() / value.abs().max(1.0);
            checks.push(Check::below(format!("scalar_vs_{name}"), rel, 1e-3, false));
        }
        let mut row: Vec<String> = xi.iter().map(|&x| cell(x)).collect();
        row.extend([cell(rep.scalar), cell(rep.richardson_delta), cell(rep.condition_number)]);
        row.push(closed.first().map(|c| cell(c.1)).unwrap_or_default());
        table.push(row);
        let closed_json: serde_json::Map<String, Value> =
            closed.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
        samples.push(json!({
            "report": to_value(&rep),
            "antisymmetry_error": rep.antisymmetry_error(),
            "ricci_asymmetry": rep.ricci_asymmetry(),
            "bianchi_error": rep.bianchi_error(),
            "closed_form": closed_json,
        }));
    }
    let results = json!({
        "case": f.case().to_string(),
        "chart": names,
        "h_metric": h_metric,
        "h_curv": cfg.h_curv,
        "samples": samples,
    });
    Ok(report(cfg, results, checks, table))
}

pub fn perturb(cfg: &RunConfig) -> Result<Report> {
    let f = cfg.family()?;
    let h = cfg.h_metric();
    let xi = cfg.point(&f)?;
    let names = chart_names(&f);
    let beta = if f.beta() != 0.0 { f.beta() } else { 1e-4 };
    let base = f.with_beta(0.0);
    let num = metric_derivative_beta(&base, &xi, cfg.gamma, h)?;
    let lin = linearity_check(&base, &xi, cfg.gamma, &[beta, 2.0 * beta, 4.0 * beta], h)?;
    let cnorm = correction_norm(&base, &xi, cfg.gamma, h)?;
    let mut checks = vec![Check::below("linear_in_beta", lin.relative_residual, 1e-2, false)
        .with_note("second-order terms grow as energy denominators shrink")];
    if is_unperturbed_pattern(&base) {
        checks.push(
            Check::below("correction_vanishes", cnorm, 1e-9, true)
                .with_note("coefficient pattern with no first-order coupling"),
        );
    }
    let mut table = Table::new(&["component", "i", "j", "numeric", "closed_form"]);
    let mut results = json!({
        "case": base.case().to_string(),
        "chart": names,
        "point": xi,
        "beta": beta,
        "numeric_derivative": to_value(&num),
        "correction_norm": cnorm,
        "linearity": to_value(&lin),
    });
    if base.case() == CaseClass::C7 {
        let pt = base.full_point(&xi)?;
        let ana = metric_correction_analytic(base.eta(), &pt, cfg.gamma, 1e-6)?;
        let mut comps = Vec::new();
        for (name, i, j) in COMPONENTS {
            let (a, b) = (ana.get(i, j), num.get(i, j));
            let rel = (a - b).abs() / a.abs().max(b.abs()).max(1e-9);
            comps.push(json!({"component": name, "closed_form": a, "numeric": b, "relative_error": rel}));
            checks.push(Check::below(format!("h_{name}"), rel, 1e-3, false));
            table.push(vec![name.to_string(), i.to_string(), j.to_string(), cell(b), cell(a)]);
        }
        results["closed_form_correction"] = to_value(&ana);
        results["components"] = Value::Array(comps);
    } else {
        for i in 0..num.dim() {
            for j in i..num.dim() {
                let name = format!("{}_{}", names[i], names[j]);
                table.push(vec![name, i.to_string(), j.to_string(), cell(num.get(i, j)), String::new()]);
            }
        }
    }
    Ok(report(cfg, results, checks, table))
}

pub fn concurrence_cmd(cfg: &RunConfig) -> Result<Report> {
    let f = cfg.family()?;
    let grid = match &cfg.grid {
        Some(g) => g.clone(),
        None => {
            let xi = cfg.point(&f)?;
            let spec: Vec<String> =
                f.chart().iter().zip(&xi).map(|(c, v)| format!("{}={v}:{v}:1", c.name())).collect();
            spec.join(",").parse()?
        }
    };
    let base = match &cfg.point {
        Some(_) => f.with_spectator(f.full_point(&cfg.point(&f)?)?),
        None => f,
    };
    let scan = scan_concurrence(&base, &grid)?;
    let names = chart_names(&base);
    let mut header = names.clone();
    header.extend(["concurrence", "closed_form"].map(String::from));
    let mut table = Table::new(&header);
    let mut worst_closed: Option<f64> = None;
    let mut out_of_range: f64 = 0.0;
    for s in &scan.values {
        let closed = if base.beta() == 0.0 { concurrence_analytic(base.case(), base.eta(), &s.coordinates).ok() } else { None };
        if let Some(c) = closed {
            worst_closed = Some(worst_closed.unwrap_or(0.0).max((c - s.concurrence).abs()));
        }
        out_of_range = out_of_range.max((s.concurrence - 1.0).max(-s.concurrence).max(0.0));
        let mut row: Vec<String> = s.coordinates.iter().map(|&x| cell(x)).collect();
        row.push(cell(s.concurrence));
        row.push(closed.map(cell).unwrap_or_default());
        table.push(row);
    }
    let mut checks = vec![Check::below("range", out_of_range, 1e-12, true)];
    if let Some(d) = worst_closed {
        checks.push(
            Check::below("closed_form", d, 1e-10, false)
                .with_note("published closed form where its assumptions hold"),
        );
    }
    Ok(report(cfg, to_value(&scan), checks, table))
}

const SUITES: [&str; 6] = ["eigensystem", "periodicity", "metric", "gauge", "tables", "all"];

fn suite_eigensystem(seed: u64, checks: &mut Vec<Check>) -> Result<Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut res, mut dev) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let p = HamiltonianParams::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        let h = build_hamiltonian(&p);
        let a = analytic_spectrum(&p)?;
        let n = numeric_spectrum(&h)?;
        res = res.max(a.residuals(&h).iter().cloned().fold(0.0, f64::max));
        let sorted = a.sorted_energies();
        dev = dev.max(sorted.iter().zip(&n.energies).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
    }
    checks.push(Check::below("eigensystem_residual", res, 1e-10, true));
    checks.push(Check::below("eigensystem_energies", dev, 1e-12, true));
    Ok(json!({"points": 200, "max_residual": res, "max_energy_deviation": dev}))
}

fn suite_periodicity(cfg: &RunConfig, checks: &mut Vec<Check>) -> Result<Value> {
    let f = cfg.family()?.with_beta(0.0);
    let rep = check_periodicity(&f, 20, cfg.seed)?;
    for c in &rep.checks {
        checks.push(Check::below(format!("periodicity {} {}", rep.case, c.label), c.max_phase_error, rep.tolerance, true));
    }
    Ok(to_value(&rep))
}

fn suite_metric(cfg: &RunConfig, checks: &mut Vec<Check>) -> Result<Value> {
    let pts = tq_geometry::perturbation::audit_points(cfg.seed, 50, 0.0);
    let mut worst: f64 = 0.0;
    for (eta, pt) in &pts {
        let f = family_for(eta, 0.0)?;
        let g = numeric_fs_metric(&f, &pt.to_array(), cfg.gamma, cfg.h_metric())?;
        worst = worst.max(g.max_abs_diff(&analytic_metric_c7(eta, pt, cfg.gamma)?)?);
    }
    checks.push(Check::below("metric_closed_form_c7", worst, 1e-6, true));
    Ok(json!({"points": pts.len(), "max_deviation": worst}))
}

fn suite_gauge(cfg: &RunConfig, checks: &mut Vec<Check>) -> Result<Value> {
    let f = cfg.family()?.with_beta(0.0);
    let xi = cfg.point(&f)?;
    let rephased = Rephased { inner: &f, lambda: |x: &[f64]| x.iter().enumerate().map(|(k, v)| (k as f64 + 1.0) * v.sin()).sum() };
    let g = numeric_fs_metric(&f, &xi, cfg.gamma, cfg.h_metric())?;
    let gr = numeric_fs_metric(&rephased, &xi, cfg.gamma, cfg.h_metric())?;
    let d = g.max_abs_diff(&gr)?;
    checks.push(Check::below(format!("gauge_invariance {}", f.case()), d, 1e-8, true));
    Ok(json!({"case": f.case().to_string(), "max_deviation": d}))
}

fn suite_tables(checks: &mut Vec<Check>) -> Result<Value> {
    let chi = 0.7;
    let cis = |m: f64, p: f64| num_complex::Complex64::from_polar(m.sqrt(), p);
    let zero = num_complex::Complex64::new(0.0, 0.0);
    let etas = [
        (CaseClass::C5 { j: 3 }, [cis(0.3, 0.0), cis(0.3, 0.0), cis(0.4, chi), zero]),
        (CaseClass::C5 { j: 4 }, [cis(0.3, 0.0), cis(0.3, 0.0), zero, cis(0.4, chi)]),
        (CaseClass::C6 { l: 1 }, [cis(0.4, 0.0), zero, cis(0.3, chi), cis(0.3, chi)]),
        (CaseClass::C6 { l: 2 }, [zero, cis(0.4, 0.0), cis(0.3, chi), cis(0.3, chi)]),
        (CaseClass::C7, [cis(0.2, 0.0), cis(0.2, 0.0), cis(0.3, chi), cis(0.3, chi)]),
    ];
    let mut reports = Vec::new();
    for (case, raw) in etas {
        let eta = InitialCoefficients::new(raw)?;
        let rep = verify_max_entangled_tables(case, &eta, &DEFAULT_N_RANGE)?;
        for r in &rep.rows {
            checks.push(Check::below(format!("table {case} row {}: {}", r.row, r.label), r.max_deviation, rep.tolerance, true));
        }
        reports.push(json!({"case": case.to_string(), "chi": rep.chi, "rows": to_value(&rep.rows)}));
    }
    Ok(Value::Array(reports))
}

pub fn verify(cfg: &RunConfig) -> Result<Report> {
    let suite = cfg.suite.as_deref().unwrap_or("all");
    if !SUITES.contains(&suite) {
        return Err(Error::InvalidArgument(format!("unknown suite `{suite}`; expected one of {}", SUITES.join(", "))));
    }
    let all = suite == "all";
    let mut checks = Vec::new();
    let mut results = serde_json::Map::new();
    if all || suite == "eigensystem" {
        results.insert("eigensystem".into(), suite_eigensystem(cfg.seed, &mut checks)?);
    }
    if all || suite == "periodicity" {
        results.insert("periodicity".into(), suite_periodicity(cfg, &mut checks)?);
    }
    if all || suite == "metric" {
        results.insert("metric".into(), suite_metric(cfg, &mut checks)?);
    }
    if all || suite == "gauge" {
        results.insert("gauge".into(), suite_gauge(cfg, &mut checks)?);
    }
    if all || suite == "tables" {
        results.insert("tables".into(), suite_tables(&mut checks)?);
    }
    let mut table = Table::new(&["name", "passed", "hard", "measured", "tolerance"]);
    for c in &checks {
        table.push(vec![c.name.clone(), c.passed.to_string(), c.hard.to_string(), cell(c.measured), cell(c.tolerance)]);
    }
    Ok(report(cfg, Value::Object(results), checks, table))
}

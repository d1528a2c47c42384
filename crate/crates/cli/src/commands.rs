use std::f64::consts::PI;
use std::sync::Arc;

use flowout_core::genfam::FlowPhi;
use flowout_core::glancing::{
    glancing_search, model_glancing_surface, pair_classification, quadratic_phase_lagrangian, QuadraticCase,
};
use flowout_core::manifolds::{
    dump_csv, eikonal_residual, flow_out, flow_out_energy, lagrangian_residual, BesselCylinder, ManifoldChart,
    PlaneWave, SharedChart, Trajectories,
};
use flowout_core::normal_form::{figure_data, Regime, TransitionConfig, TransitionProblem, TransitionSample};
use flowout_core::semiclassical::{
    exact_u1, helmholtz_residual, smooth_step, time_integral_with, transport_amplitude, wkb_from_flow_out, QuadOptions,
};
use flowout_core::symplectic::field::PolyField;
use flowout_core::symplectic::hamiltonian::{from_registry, Conformal};
use flowout_core::verify::{run_criterion, CriterionReport, CRITERIA};
use flowout_core::{PhasePoint, Polynomial, SharedHamiltonian};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    range, ClassifyArgs, DensityArgs, EvaluateArgs, FlowArgs, GlancingArgs, PolySpec, TransitionArgs, VerifyArgs,
};
use crate::error::{CliError, Context};
use crate::output::{gnuplot_script, Artifacts};

/// What a command reports on stdout.
pub struct Report {
    pub text: String,
    pub summary: Value,
}

fn hamiltonian(name: &str, dim: usize, rho: &PolySpec, field: &str) -> Result<SharedHamiltonian, CliError> {
    let rho = rho.position(dim, &format!("{field}.rho"))?;
    from_registry(name, dim, Some(rho)).map_err(|e| CliError::config(&format!("{field}.hamiltonian"), e.to_string()))
}

fn num(v: f64) -> String {
    format!("{v:.12e}")
}

pub fn flow(a: &FlowArgs, out: &mut Artifacts) -> Result<Report, CliError> {
    let h = hamiltonian(&a.hamiltonian, a.dim, &a.rho, "command.flow")?;
    let (lo, hi) = range("command.flow.phi_range", &a.phi_range)?;
    let base: SharedChart = Arc::new(BesselCylinder::new(a.dim).with_phi_range(lo, hi));
    let chart: Box<dyn ManifoldChart> = match a.energy {
        Some(e) => Box::new(flow_out_energy(base, h, e, 0, (lo, hi), a.t_max, a.tol).ctx("flow (energy slice)")?),
        None => Box::new(flow_out(base, h, a.t_max, a.tol).ctx("flow")?),
    };
    if a.counts.len() != chart.dim() {
        return Err(CliError::config(
            "command.flow.counts",
            format!(
                "chart has {} parameters {:?}, got {} counts",
                chart.dim(),
                chart.param_names(),
                a.counts.len()
            ),
        ));
    }
    let csv = dump_csv(chart.as_ref(), &a.counts).ctx("flow: chart dump")?;
    let rows = csv.lines().count().saturating_sub(1);
    out.write("flow.csv", &csv)?;
    let lag = lagrangian_residual(chart.as_ref(), 50).ctx("flow: Lagrangian check")?;
    let eik = eikonal_residual(chart.as_ref(), 20).ctx("flow: eikonal check")?;
    let text = format!(
        "flow.csv: {rows} rows over {:?}\nLagrangian residual {lag:.3e}\neikonal residual {}",
        chart.param_names(),
        eik.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "n/a".into())
    );
    Ok(Report {
        text,
        summary: json!({"rows": rows, "params": chart.param_names(), "lagrangian_residual": lag, "eikonal_residual": eik}),
    })
}

pub fn glancing(a: &GlancingArgs, out: &mut Artifacts) -> Result<Report, CliError> {
    let h = hamiltonian(&a.hamiltonian, a.dim, &a.rho, "command.glancing")?;
    let r = range("command.glancing.phi_range", &a.phi_range)?;
    let found = glancing_search(h.as_ref(), a.dim, r, a.grid, a.tol).ctx("glancing search")?;
    out.write_json("glancing.json", &found)?;
    let mut text = format!("{} glancing point(s)", found.len());
    for g in &found {
        text.push_str(&format!(
            "\n  {:<10} E = {:.10}  params {:?}  det {:.6e}  trace {:.6e}",
            g.kind.to_string(),
            g.energy,
            g.params,
            g.det,
            g.trace
        ));
    }
    Ok(Report {
        text,
        summary: serde_json::to_value(&found).expect("serializable"),
    })
}

fn fmt_matrix(m: &[[f64; 2]; 2]) -> String {
    format!(
        "(({}, {}), ({}, {}))",
        short(m[0][0]),
        short(m[0][1]),
        short(m[1][0]),
        short(m[1][1])
    )
}

/// Rounds away finite-difference noise below `1e-9` for display.
fn short(v: f64) -> String {
    let r = (v * 1e9).round() / 1e9;
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{r}")
}

pub fn classify(a: &ClassifyArgs, out: &mut Artifacts) -> Result<Report, CliError> {
    let p = "command.classify";
    let (f1, f2, g) = match &a.case {
        Some(case) => {
            let case: QuadraticCase = case
                .parse()
                .map_err(|e: flowout_core::Error| CliError::config(&format!("{p}.case"), e.to_string()))?;
            let v = a.a.ok_or_else(|| {
                CliError::config(&format!("{p}.a"), "the family parameter is required with --case".into())
            })?;
            let lag =
                quadratic_phase_lagrangian(case, v).map_err(|e| CliError::config(&format!("{p}.a"), e.to_string()))?;
            (lag.f1, lag.f2, model_glancing_surface())
        }
        None => {
            let need = |f: &Option<PolySpec>, name: &str| -> Result<Polynomial, CliError> {
                f.as_ref()
                    .ok_or_else(|| CliError::config(&format!("{p}.{name}"), "required without --case".into()))?
                    .phase(2, &format!("{p}.{name}"))
            };
            (need(&a.f1, "f1")?, need(&a.f2, "f2")?, need(&a.g, "g")?)
        }
    };
    let c = pair_classification(
        &PolyField::new(f1),
        &PolyField::new(f2),
        &PolyField::new(g),
        &PhasePoint::zeros(2),
        a.tol,
    )
    .ctx("classify")?;
    out.write_json("classify.json", &c)?;
    let text = format!(
        "A_z = {}\nB_z = ({}, {})\ndet A = {}\ntBAB = {}\ncase {}{}",
        fmt_matrix(&c.a),
        short(c.b[0]),
        short(c.b[1]),
        short(c.det_a),
        short(c.tbab),
        c.case_index,
        if c.marginal { " (marginal)" } else { "" }
    );
    Ok(Report {
        text,
        summary: serde_json::to_value(&c).expect("serializable"),
    })
}

pub fn density(a: &DensityArgs, out: &mut Artifacts) -> Result<Report, CliError> {
    let rho = a.rho.position(2, "command.density.rho")?;
    let h: SharedHamiltonian = Arc::new(Conformal::new("conformal1", 1.0, rho).ctx("density")?);
    let fam = FlowPhi::new(h, 2, a.tol).ctx("density")?;
    let mut nodes = Vec::new();
    for &phi in &a.phi {
        for k in 0..a.psi_count {
            let psi = 2.0 * PI * (k as f64 + 0.25) / a.psi_count as f64;
            for &t in &a.t {
                nodes.push((phi, psi, t));
            }
        }
    }
    let rows: Vec<(f64, f64, f64, f64, f64)> = nodes
        .par_iter()
        .map(|&(phi, psi, t)| {
            fam.density_on_chart(phi, &[psi], t)
                .map(|(f, d)| (phi, psi, t, f, d))
                .ctx(&format!("density at (phi, psi, t) = ({phi}, {psi}, {t})"))
        })
        .collect::<Result<_, _>>()?;
    let mut csv = String::from("phi,psi,t,F,detPPpsi\n");
    let mut worst = 0.0f64;
    for (phi, psi, t, f, d) in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            num(*phi),
            num(*psi),
            num(*t),
            num(*f),
            num(*d)
        ));
        worst = worst.max((f.abs() - d.abs()).abs() / d.abs());
    }
    out.write("density.csv", &csv)?;
    Ok(Report {
        text: format!(
            "density.csv: {} rows, max | |F| - |det| | / |det| = {worst:.3e}",
            rows.len()
        ),
        summary: json!({"rows": rows.len(), "max_relative_mismatch": worst}),
    })
}

/// Smooth bump equal to 1 on the middle half of `(lo, hi)`, 0 at the ends.
fn phi_window(lo: f64, hi: f64) -> impl Fn(&[f64]) -> f64 + Send + Sync + 'static {
    let d = 0.25 * (hi - lo);
    move |u: &[f64]| smooth_step((lo + d - u[0]) / d) * smooth_step((u[0] - hi + d) / d)
}

fn is_free(h: &SharedHamiltonian, name: &str, rho: &Polynomial) -> bool {
    name == "free" || (h.homogeneity() == Some(2.0) && rho.degree() == 0 && rho.eval(&[0.0, 0.0]) == 1.0)
}

pub fn evaluate(a: &EvaluateArgs, out: &mut Artifacts) -> Result<Report, CliError> {
    let p = "command.evaluate";
    let rho = a.rho.position(2, &format!("{p}.rho"))?;
    let h = hamiltonian(&a.hamiltonian, 2, &a.rho, p)?;
    if a.compare_exact && !is_free(&h, &a.hamiltonian, &rho) {
        return Err(CliError::config(
            &format!("{p}.compare_exact"),
            "the exact radial solution is only available for H = p^2".into(),
        ));
    }
    let (lo, hi) = range(&format!("{p}.phi_range"), &a.phi_range)?;
    let (b0, b1) = range(&format!("{p}.bounds"), &a.bounds)?;
    let base: SharedChart = Arc::new(BesselCylinder::new(2).with_phi_range(lo, hi));
    let traj = Trajectories::new(base, h, (0.0, a.t_max), a.tol).ctx("evaluate: flow-out")?;
    let amp = transport_amplitude(Arc::new(phi_window(lo, hi)), &traj, 5).ctx("evaluate: amplitude transport")?;
    let chart = wkb_from_flow_out(traj, amp, vec![(b0, b1), (b0, b1)])
        .ctx("evaluate: WKB chart")?
        .extended_by_zero();
    let step = (b1 - b0) / (a.grid - 1) as f64;
    let nodes: Vec<[f64; 2]> = (0..a.grid)
        .flat_map(|j| (0..a.grid).map(move |i| [b0 + i as f64 * step, b0 + j as f64 * step]))
        .collect();
    let quad = QuadOptions {
        rel_tol: a.quad_tol,
        abs_tol: 1e-3 * a.quad_tol,
        ..QuadOptions::default()
    };
    let values: Vec<_> = nodes
        .par_iter()
        .map(|x| time_integral_with(&chart, x, a.energy, a.h, a.t0, quad).ctx(&format!("evaluate at x = {x:?}")))
        .collect::<Result<_, _>>()?;
    let mut csv = String::from("x1,x2,Re(u),Im(u),abs(u)");
    if a.compare_exact {
        csv.push_str(",u1_exact,helmholtz_residual");
    }
    csv.push('\n');
    let mut warnings = 0;
    let mut peak = 0.0f64;
    for (x, r) in nodes.iter().zip(&values) {
        let u = r.value();
        peak = peak.max(u.norm());
        warnings += r.warnings.len();
        csv.push_str(&format!(
            "{},{},{},{},{}",
            num(x[0]),
            num(x[1]),
            num(u.re),
            num(u.im),
            num(u.norm())
        ));
        if a.compare_exact {
            let res = helmholtz_residual(*x, a.h, 1e-3).ctx("evaluate: exact residual")?;
            csv.push_str(&format!(
                ",{},{}",
                num(exact_u1(x, a.h).ctx("evaluate: exact solution")?),
                num(res)
            ));
        }
        csv.push('\n');
    }
    out.write("evaluate.csv", &csv)?;
    Ok(Report {
        text: format!(
            "evaluate.csv: {} points, max |u| = {peak:.6e}, {warnings} boundary warning(s)",
            nodes.len()
        ),
        summary: json!({"points": nodes.len(), "max_abs": peak, "warnings": warnings}),
    })
}

#[derive(Serialize)]
struct RegimeSummary<'a> {
    energy: f64,
    e0: f64,
    extremum: flowout_core::normal_form::Extremum,
    epsilon_proxy: f64,
    level_radius: Option<f64>,
    regime: Regime,
    self_intersections: usize,
    cusps: &'a [flowout_core::normal_form::Cusp],
    fig1: Option<String>,
    fig2: Option<String>,
}

pub fn transition(a: &TransitionArgs, out: &mut Artifacts) -> Result<Report, CliError> {
    let p = "command.transition";
    let n = a.momentum.len();
    if n != 2 || a.u0.len() != 2 {
        return Err(CliError::config(
            &format!("{p}.momentum"),
            "transition sampling is two-dimensional".into(),
        ));
    }
    let h = hamiltonian(&a.hamiltonian, n, &a.rho, p)?;
    let chart: SharedChart = Arc::new(PlaneWave::new(a.momentum.clone(), (-10.0, 10.0)));
    let cfg = TransitionConfig {
        window: a.window,
        samples: a.samples,
        tol: a.tol,
        ..Default::default()
    };
    let prob = TransitionProblem::new(h, chart, a.u0.clone(), cfg).ctx("transition: glancing point")?;
    let samples: Vec<TransitionSample> = a
        .energies
        .par_iter()
        .map(|&e| prob.sample(e).ctx(&format!("transition at E = {e}")))
        .collect::<Result<_, _>>()?;
    let mut summaries = Vec::new();
    let mut curves = (Vec::new(), Vec::new());
    let kind = match prob.extremum() {
        flowout_core::normal_form::Extremum::Max => "maximum",
        flowout_core::normal_form::Extremum::Min => "minimum",
    };
    let mut text = format!("E0 = {:.12} (H restricted to Lambda_0 has a {kind})", prob.e0());
    for s in &samples {
        let (f1, f2) = figure_data(s);
        let tag = format!("{:.4}", s.epsilon_proxy);
        let (n1, n2) = (format!("fig1_eps{tag}.csv"), format!("fig2_eps{tag}.csv"));
        out.write(&n1, &f1)?;
        out.write(&n2, &f2)?;
        if s.regime == Regime::InfinityCurve {
            curves.0.push(n1.clone());
            curves.1.push(n2.clone());
        }
        text.push_str(&format!(
            "\n  E = {:<8} eps = {:+.4}  {:<22} crossings {}  cusps {}",
            s.energy,
            s.epsilon_proxy,
            s.regime.to_string(),
            s.self_intersections,
            s.cusps.len()
        ));
        summaries.push(RegimeSummary {
            energy: s.energy,
            e0: s.e0,
            extremum: s.extremum,
            epsilon_proxy: s.epsilon_proxy,
            level_radius: s.level_radius,
            regime: s.regime,
            self_intersections: s.self_intersections,
            cusps: &s.cusps,
            fig1: Some(n1),
            fig2: Some(n2),
        });
    }
    out.write_json("transition.json", &summaries)?;
    if !a.no_plots {
        out.write(
            "fig1.gp",
            &gnuplot_script("Lagrangian curve at x = 0", "y", "p_y", "fig1.png", &curves.0),
        )?;
        out.write(
            "fig2.gp",
            &gnuplot_script("Section of the phase graph", "y", "phase", "fig2.png", &curves.1),
        )?;
    }
    Ok(Report {
        text,
        summary: serde_json::to_value(&summaries).expect("serializable"),
    })
}

pub fn verify_all(a: &VerifyArgs, seed: u64, out: &mut Artifacts) -> Result<Report, CliError> {
    let ids: Vec<usize> = if a.criteria.is_empty() {
        (1..=CRITERIA).collect()
    } else {
        a.criteria.clone()
    };
    let reports: Vec<CriterionReport> = ids.par_iter().map(|&k| run_criterion(k, seed)).collect();
    out.write_json("verify.json", &reports)?;
    let text = reports.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("\n");
    let failed: Vec<&CriterionReport> = reports.iter().filter(|r| !r.pass).collect();
    if !failed.is_empty() {
        let names: Vec<String> = failed.iter().map(|r| format!("{} ({})", r.id, r.name)).collect();
        println!("{text}");
        return Err(CliError::numeric(
            "verify-all",
            format!("failed criteria: {}", names.join(", ")),
        ));
    }
    Ok(Report {
        text: format!("{text}\n{} / {} criteria pass", reports.len(), reports.len()),
        summary: serde_json::to_value(&reports).expect("serializable"),
    })
}

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::json;
use trace_stability::duality::{
    extremiser_transfer_with_norm, operator_norm, sigma_counterexample, sweep, FiniteOperator, SweepKind,
};
use trace_stability::harmonic::{RadialGrid, TraceModel};
use trace_stability::specfun::Order;
use trace_stability::spectrum::{
    bessel_square_integral, build_spectrum, homogeneous_constant_closed, lambda_homogeneous_closed,
    lambda_inhomogeneous_s1, lambda_quadrature, stability_constant, watson_integral, LambdaSpectrum,
};
use trace_stability::transport::{local_stability_probe, probe_csv, sharp_ratio_1d, PhaseGrid, TransportLab};
use trace_stability::weight::{PowerWeight, WeightKind, WeightSpec};

use crate::config::{CommandKind, Params, RunConfig, SweepArg, WeightArg};
use crate::report::{Check, Report};

const DEFAULT_TOL: f64 = 1e-10;
const DEFAULT_EPS: [f64; 3] = [0.05, 0.1, 0.2];
const TWIN_TOL: f64 = 1e-6;

#[derive(Debug)]
pub enum RunError {
    /// Precondition violations found before dispatch.
    Config(Vec<String>),
    /// A module error, with the step that raised it.
    Module { context: String, source: trace_stability::Error },
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(v) => write!(f, "invalid configuration: {}", v.join("; ")),
            RunError::Module { context, source } => write!(f, "{context}: {source}"),
        }
    }
}

impl std::error::Error for RunError {}

trait Context<T> {
    fn context(self, what: impl Into<String>) -> Result<T, RunError>;
}

impl<T> Context<T> for trace_stability::Result<T> {
    fn context(self, what: impl Into<String>) -> Result<T, RunError> {
        self.map_err(|source| RunError::Module { context: what.into(), source })
    }
}

fn weight_spec(p: &Params) -> Option<WeightSpec> {
    let (n, s) = (p.n?, p.s?);
    let kind = match p.weight? {
        WeightArg::Homogeneous => WeightKind::Homogeneous { s },
        WeightArg::Inhomogeneous => WeightKind::Inhomogeneous { s },
        WeightArg::Watson => return None,
    };
    Some(WeightSpec { n, kind })
}

fn grid_of(p: &Params) -> Result<PhaseGrid, String> {
    if let Some(g) = p.grid {
        return g.validate().map(|_| g).map_err(|e| e.to_string());
    }
    PhaseGrid::square(1, p.extent.unwrap_or(40.0), p.cells.unwrap_or(256)).map_err(|e| e.to_string())
}

fn require<T>(out: &mut Vec<String>, value: Option<T>, what: &str) -> Option<T> {
    if value.is_none() {
        out.push(format!("{what} required"));
    }
    value
}

/// Every precondition violation of `config`, without running anything.
pub fn validate(command: CommandKind, p: &Params) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(t) = p.tol {
        if !(t > 0.0 && t <= 1e-3) {
            out.push(format!("tol in (0, 1e-3] required (got {t})"));
        }
    }
    if p.trials == Some(0) {
        out.push("trials >= 1 required".into());
    }
    let randomized = matches!(command, CommandKind::VerifyTrace | CommandKind::DualitySweep | CommandKind::TransportProbe);
    if randomized {
        require(&mut out, p.seed, "--seed (randomized command)");
    }
    match command {
        CommandKind::Spectrum | CommandKind::Constants | CommandKind::VerifyTrace => {
            let weight = require(&mut out, p.weight, "--weight");
            require(&mut out, p.n, "--n");
            if weight == Some(WeightArg::Watson) {
                if command != CommandKind::Spectrum {
                    out.push("the watson weight is available for spectrum only".into());
                }
                match require(&mut out, p.tau, "--tau") {
                    Some(t) if !(t > 1.0 && t.is_finite()) => out.push(format!("tau > 1 required (got {t})")),
                    _ => {}
                }
                if let Some(n) = p.n {
                    if n < 2 {
                        out.push(format!("n >= 2 required (got {n})"));
                    }
                }
            } else if weight.is_some() {
                require(&mut out, p.s, "--s");
                if let Some(w) = weight_spec(p) {
                    out.extend(w.violations());
                }
            }
            if p.k_max == Some(0) {
                out.push("k-max >= 1 required".into());
            }
        }
        CommandKind::DualitySweep => {
            match require(&mut out, p.kind, "--kind") {
                Some(SweepArg::Transfer) => {
                    for (v, name) in [(p.rows, "rows"), (p.cols, "cols")] {
                        if v == Some(0) {
                            out.push(format!("{name} >= 1 required"));
                        }
                    }
                    for (v, name) in [(p.p, "p"), (p.q, "q")] {
                        match require(&mut out, v, &format!("--{name}")) {
                            Some(x) if !(x > 1.0 && x.is_finite()) => out.push(format!("{name} > 1 required (got {x})")),
                            _ => {}
                        }
                    }
                }
                Some(kind) => {
                    let (bound, strict) = match kind {
                        SweepArg::Cfl3 => (1.0, false),
                        SweepArg::Cfl1 => (2.0, false),
                        _ => (1.0, true),
                    };
                    if let Some(r) = require(&mut out, p.r, "--r") {
                        let ok = if strict { r > bound } else { r >= bound } && r.is_finite();
                        if !ok {
                            out.push(format!("r {} {bound} required (got {r})", if strict { ">" } else { ">=" }));
                        }
                    }
                }
                None => {}
            }
        }
        CommandKind::Counterexample => {
            match require(&mut out, p.r, "--r") {
                Some(r) if !(r > 1.0 && r.is_finite()) => out.push(format!("r > 1 required (got {r})")),
                _ => {}
            }
            match require(&mut out, p.sigma, "--sigma") {
                Some(s) if !(s > 0.0 && s.is_finite()) => out.push(format!("sigma > 0 required (got {s})")),
                _ => {}
            }
            if let Some(d) = require(&mut out, p.deltas.as_ref(), "--deltas") {
                if d.is_empty() || d.iter().any(|x| !(*x > 0.0 && *x < 1.0)) || d.windows(2).any(|w| w[1] >= w[0]) {
                    out.push("deltas must be a non-empty decreasing list in (0, 1)".into());
                }
            }
        }
        CommandKind::TransportProbe => {
            match grid_of(p) {
                Ok(g) if g.n != 1 => out.push(format!("the stability probe runs at n = 1 only (got n = {})", g.n)),
                Ok(_) => {}
                Err(e) => out.push(e),
            }
            if let Some(eps) = &p.eps {
                if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0 && *e <= 0.25)) {
                    out.push("eps values in (0, 0.25] required".into());
                }
            }
            if p.directions == Some(0) {
                out.push("directions >= 1 required".into());
            }
        }
    }
    out
}

/// Validates, runs and returns the report (files are written by the caller).
pub fn execute(config: &RunConfig) -> Result<Report, RunError> {
    let violations = validate(config.command, &config.params);
    if !violations.is_empty() {
        return Err(RunError::Config(violations));
    }
    let p = &config.params;
    let (summary, checks, data) = match config.command {
        CommandKind::Spectrum => spectrum(p)?,
        CommandKind::Constants => constants(p)?,
        CommandKind::VerifyTrace => verify_trace(p)?,
        CommandKind::DualitySweep => duality_sweep(p)?,
        CommandKind::Counterexample => counterexample(p)?,
        CommandKind::TransportProbe => transport_probe(p)?,
    };
    Ok(Report {
        command: config.command.name(),
        config: serde_json::to_value(p).unwrap_or_default(),
        summary,
        checks,
        data_files: data.iter().map(|(n, _)| n.clone()).collect(),
        data,
    })
}

type Outcome = (serde_json::Value, Vec<Check>, Vec<(String, String)>);

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Closed form for λ_k where one is known.
fn closed_lambda(w: &WeightSpec, k: usize) -> Option<f64> {
    match w.kind {
        WeightKind::Homogeneous { s } => lambda_homogeneous_closed(w.n, s, k).ok(),
        WeightKind::Inhomogeneous { s: 1.0 } => lambda_inhomogeneous_s1(w.n, k).ok(),
        _ => None,
    }
}

fn certified_spectrum(w: &WeightSpec, horizon: usize, tol: f64) -> Result<(LambdaSpectrum, Check), RunError> {
    let sp = build_spectrum(w, horizon, tol).context(format!("spectrum of {}", w.label()))?;
    let c = &sp.certificate;
    let check = Check::new(
        "spectrum.certified_maximum",
        sp.lambda_star,
        c.tail_bound,
        c.tail_bound < sp.lambda_star && !sp.k_set.is_empty(),
        format!("λ⋆ attained at k ∈ {:?}; every k beyond the horizon stays below {:e}", sp.k_set, c.tail_bound),
    );
    Ok((sp, check))
}

fn spectrum(p: &Params) -> Result<Outcome, RunError> {
    let tol = p.tol.unwrap_or(DEFAULT_TOL);
    let n = p.n.unwrap_or_default();
    if p.weight == Some(WeightArg::Watson) {
        let tau = p.tau.unwrap_or_default();
        let k_max = p.k_max.unwrap_or(20);
        let mut csv = String::from("k,closed,quadrature,relative_gap\n");
        let mut worst = 0.0_f64;
        for k in (0..=k_max).filter(|&k| k as f64 + (n as f64 - tau) / 2.0 > 0.0) {
            let closed = watson_integral(n, k, tau).context(format!("watson closed form k={k}"))?;
            let q = bessel_square_integral(Order::for_harmonic(n, k).nu(), &PowerWeight(tau), tol)
                .context(format!("watson quadrature k={k}"))?;
            let gap = rel(q.value, closed);
            worst = worst.max(gap);
            let _ = writeln!(csv, "{k},{closed:e},{:e},{gap:e}", q.value);
        }
        let check = Check::within("watson.closed_form_twin", worst, TWIN_TOL, format!("n={n}, tau={tau}, k ≤ {k_max}"));
        return Ok((json!({ "n": n, "tau": tau }), vec![check], vec![("spectrum.csv".into(), csv)]));
    }
    let w = weight_spec(p).expect("validated weight");
    let (sp, cert) = certified_spectrum(&w, p.k_max.unwrap_or(20), tol)?;
    let mut checks = vec![cert];
    if closed_lambda(&w, 0).is_some() {
        let mut worst = 0.0_f64;
        for k in 0..sp.values.len().min(21) {
            let q = lambda_quadrature(&w, k, tol).context(format!("quadrature λ_{k}"))?.value;
            worst = worst.max(rel(q, closed_lambda(&w, k).expect("closed form")));
        }
        checks.push(Check::within("spectrum.closed_form_twin", worst, TWIN_TOL, w.label()));
    }
    Ok((sp.to_json(), checks, vec![("spectrum.csv".into(), sp.to_csv())]))
}

fn constants(p: &Params) -> Result<Outcome, RunError> {
    let w = weight_spec(p).expect("validated weight");
    let (sp, cert) = certified_spectrum(&w, p.k_max.unwrap_or(10), p.tol.unwrap_or(DEFAULT_TOL))?;
    let c2 = sp.values[0];
    let c_prime = stability_constant(&sp).value;
    let mut checks = vec![cert];
    let (reference, source) = match closed_lambda(&w, 0) {
        Some(v) => (v, "closed form"),
        None => (lambda_quadrature(&w, 0, 1e-10).context("quadrature λ₀")?.value, "quadrature"),
    };
    checks.push(Check::within(
        "constants.sharp_constant",
        rel(c2, reference),
        1e-8,
        format!("C(w)² = {c2} ({source} {reference})"),
    ));
    let reference = match w.kind {
        WeightKind::Homogeneous { s } => homogeneous_constant_closed(w.n, s).context("closed-form C′")?,
        _ => c2 - sp.lambda_star,
    };
    checks.push(Check::within(
        "constants.stability_constant",
        (c_prime - reference).abs(),
        1e-8,
        format!("C′ = {c_prime} (reference {reference})"),
    ));
    let summary = json!({ "weight": w.label(), "C_w_squared": c2, "C_prime": c_prime, "lambda_star": sp.lambda_star, "k_set": sp.k_set });
    Ok((summary, checks, Vec::new()))
}

fn verify_trace(p: &Params) -> Result<Outcome, RunError> {
    let w = weight_spec(p).expect("validated weight");
    let tol = p.tol.unwrap_or(DEFAULT_TOL);
    let (sp, _) = certified_spectrum(&w, 10, tol)?;
    let tm = TraceModel::new(&sp, RadialGrid::standard(), p.k_max.unwrap_or(6)).context("trace model")?;
    let (seed, trials) = (p.seed.unwrap_or_default(), p.trials.unwrap_or(1000));
    let mut csv = format!("seed,{}\n", trace_stability::harmonic::DeficitReport::CSV_HEADER);
    let (mut forward, mut reverse) = (0usize, 0usize);
    let mut worst_reverse = f64::INFINITY;
    for i in 0..trials as u64 {
        let ps = tm.random_profile_set(seed + i).context(format!("profile set seed {}", seed + i))?;
        let r = tm.deficit_report(&ps).context("deficit report")?;
        forward += r.satisfied as usize;
        let back = tm.reverse_deficit_check(&ps).context("reverse check")?;
        reverse += back.holds as usize;
        worst_reverse = worst_reverse.min(back.margin);
        let _ = writeln!(csv, "{},{}", seed + i, r.csv_row());
    }
    let k = tm.k_set[0];
    let y: BTreeMap<_, _> = [((k, 1), 1.0)].into_iter().collect();
    let eq = tm.deficit_report(&tm.equality_case(1.0, &y).context("equality case")?).context("equality deficit")?;
    let checks = vec![
        Check::new(
            "trace.stability_inequality",
            (trials - forward) as f64,
            0.0,
            forward == trials,
            format!("{forward}/{trials} stability checks pass"),
        ),
        Check::new(
            "trace.reverse_inequality",
            (trials - reverse) as f64,
            0.0,
            reverse == trials,
            format!("{reverse}/{trials} reverse checks pass, smallest margin {worst_reverse:e}"),
        ),
        Check::within("trace.equality_case", (eq.ratio - tm.constant()).abs(), 1e-8, format!("k = {k}, C′ = {}", tm.constant())),
    ];
    let summary = json!({ "weight": w.label(), "trials": trials, "seed": seed, "stability_pass": forward, "reverse_pass": reverse });
    Ok((summary, checks, vec![("verify_trace.csv".into(), csv)]))
}

fn duality_sweep(p: &Params) -> Result<Outcome, RunError> {
    let (seed, trials) = (p.seed.unwrap_or_default(), p.trials.unwrap_or(10_000));
    let kind = p.kind.expect("validated kind");
    if kind == SweepArg::Transfer {
        let (rows, cols) = (p.rows.unwrap_or(5), p.cols.unwrap_or(7));
        let (pe, qe) = (p.p.unwrap_or_default(), p.q.unwrap_or_default());
        let mut csv = String::from("seed,norm,transfer_ratio,gap,status\n");
        let (mut ok, mut worst) = (0usize, 0.0_f64);
        let mut first_error = None;
        for i in 0..trials as u64 {
            let t = FiniteOperator::random_nonnegative(rows, cols, pe, qe, seed + i).context("random operator")?;
            let outcome = operator_norm(&t, 4).and_then(|norm| {
                let g_star = operator_norm(&t.adjoint(), 4)?.extremiser;
                let g = extremiser_transfer_with_norm(&t, &g_star, norm.value)?;
                Ok((norm.value, t.ratio(&g)))
            });
            match outcome {
                Ok((norm, ratio)) => {
                    let gap = rel(ratio, norm);
                    worst = worst.max(gap);
                    ok += (gap <= 1e-8) as usize;
                    let _ = writeln!(csv, "{},{norm:e},{ratio:e},{gap:e},ok", seed + i);
                }
                Err(e) => {
                    let _ = writeln!(csv, "{},,,,\"{}\"", seed + i, e.to_string().replace('"', "'"));
                    first_error.get_or_insert(format!("; seed {}: {e}", seed + i));
                }
            }
        }
        let check = Check::new(
            "duality.extremiser_transfer",
            worst,
            1e-8,
            ok == trials,
            format!(
                "{ok}/{trials} operators {rows}×{cols} (p={pe}, q={qe}) transfer to the norm{}",
                first_error.unwrap_or_default()
            ),
        );
        let summary = json!({ "kind": "transfer", "trials": trials, "certified": ok, "worst_gap": worst });
        return Ok((summary, vec![check], vec![("duality_sweep.csv".into(), csv)]));
    }
    let r = p.r.unwrap_or_default();
    let (sk, id) = match kind {
        SweepArg::Cfl3 => (SweepKind::Cfl3, "duality.cfl3"),
        SweepArg::Cfl1 => (SweepKind::Cfl1, "duality.cfl1"),
        _ => (SweepKind::Aldaz, "duality.aldaz_ratio"),
    };
    let rep = sweep(sk, r, trials, seed).context(format!("{id} sweep"))?;
    let check = if sk == SweepKind::Aldaz {
        let m = rep.max_ratio();
        Check::new(id, m, f64::INFINITY, m.is_finite() && m >= 1.0, format!("largest ratio over {trials} trials, r = {r}"))
    } else {
        let v = rep.violations(1e-12);
        Check::new(id, rep.min_margin(), -1e-12, v == 0, format!("{v} violations in {trials} trials, r = {r}"))
    };
    let summary = json!({ "kind": id, "r": r, "trials": trials, "seed": seed });
    Ok((summary, vec![check], vec![("duality_sweep.csv".into(), rep.to_csv())]))
}

fn counterexample(p: &Params) -> Result<Outcome, RunError> {
    let (r, sigma) = (p.r.unwrap_or_default(), p.sigma.unwrap_or_default());
    let deltas = p.deltas.clone().unwrap_or_default();
    let rows = sigma_counterexample(r, sigma, &deltas).context("counterexample")?;
    let mut csv = String::from("delta,norm_power,square_gap,ratio,identity_defect\n");
    for row in &rows {
        let _ = writeln!(csv, "{},{:e},{:e},{:e},{:e}", row.delta, row.norm_power, row.square_gap, row.ratio, row.identity_defect);
    }
    let identity = rows.iter().map(|row| row.identity_defect).fold(0.0, f64::max);
    let mut checks = vec![Check::within("counterexample.square_gap_identity", identity, 1e-14, format!("{} values of δ", rows.len()))];
    let first = rows[0].ratio;
    let last = rows[rows.len() - 1].ratio;
    if sigma > r {
        let decreasing = rows.windows(2).all(|w| w[1].ratio < w[0].ratio);
        checks.push(Check::new(
            "counterexample.ratio_decreasing",
            last / first,
            1.0,
            decreasing,
            format!("σ = {sigma} > r = {r}: final/initial ratio {:.4}", last / first),
        ));
    } else {
        let (lo, hi) = rows.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), row| (lo.min(row.ratio), hi.max(row.ratio)));
        checks.push(Check::within(
            "counterexample.ratio_bounded",
            hi / lo,
            4.0,
            format!("σ = {sigma} ≤ r = {r}: ratios in [{lo:.4}, {hi:.4}]"),
        ));
    }
    Ok((json!({ "r": r, "sigma": sigma, "ratios": rows.iter().map(|x| x.ratio).collect::<Vec<_>>() }), checks, vec![("counterexample.csv".into(), csv)]))
}

fn transport_probe(p: &Params) -> Result<Outcome, RunError> {
    let grid = grid_of(p).expect("validated grid");
    let dual = p.dual.unwrap_or(false);
    let lab = TransportLab::new(grid, dual).context("transport lab")?;
    let eps = p.eps.clone().unwrap_or_else(|| DEFAULT_EPS.to_vec());
    let seed = p.seed.unwrap_or_default();
    let mut checks = vec![Check::within(
        "transport.sharp_ratio",
        rel(lab.r_hat, sharp_ratio_1d()),
        1e-4,
        format!("R̂ = {} against {}", lab.r_hat, sharp_ratio_1d()),
    )];
    let mut data = Vec::new();
    let mut bands = Vec::new();
    for d in 0..p.directions.unwrap_or(5) as u64 {
        let dir = lab.gaussian_direction(seed + d);
        let pts = local_stability_probe(&lab, &dir, &eps).context(format!("probe direction {}", seed + d))?;
        let q: Vec<f64> = pts.iter().map(|pt| pt.deficit / (pt.epsilon * pt.epsilon)).collect();
        let (lo, hi) = q.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        bands.push(if lo > 0.0 { hi / lo } else { f64::INFINITY });
        data.push((format!("transport_probe_{}.csv", seed + d), probe_csv(&pts)));
    }
    let worst = bands.iter().cloned().fold(0.0, f64::max);
    checks.push(Check::within(
        "transport.quadratic_deficit",
        worst,
        2.0,
        format!("max/min of deficit/ε² over {} directions ({} side)", bands.len(), if dual { "dual" } else { "primal" }),
    ));
    let summary = json!({ "grid": grid, "dual": dual, "r_hat": lab.r_hat, "window_ratio": lab.window_ratio, "bands": bands });
    Ok((summary, checks, data))
}

use diraclap::clifford::{build_clifford, spinor_size, verify_clifford, CliffordJson};
use diraclap::commutators::{
    check_ah0, check_ba, check_bilinear, check_invariance, check_t_bounds, kato_constant, refinement_series,
    ResidualReport,
};
use diraclap::grid::{annulus_state, packet_state, tapered_annulus_state, Grid, GridSpec, PacketSpec, SpinorField};
use diraclap::lap::{
    default_lambdas, f_eps_derivative, gronwall_bound, kato_scaling_check, kato_scan, kato_smooth_integral,
    kato_trial_family, lap_scan, mu_min, GronwallInput, ResolventQuery, ScanOptions, Sign,
};
use diraclap::operators::{build_first_order, parse_op, periodic_coefficients, CutoffFunction, OpContext};
use diraclap::power::largest_singular_value;
use diraclap::scattering::{run_scattering, PotentialSpec, SandwichOptions, ScatteringOptions, SmallnessOptions, WaveOptions};
use diraclap::grid::random_field;
use serde::Serialize;
use serde_json::json;

use crate::config::{RunConfig, StateKind};
use crate::{Artifact, CliError, Outcome};

/// Wraps a result with the toolkit version and grid metadata.
fn envelope<T: Serialize>(cfg: &RunConfig, result: &T) -> String {
    let v = json!({
        "version": diraclap::VERSION,
        "subcommand": cfg.subcommand,
        "grid": cfg.grid,
        "result": result,
    });
    serde_json::to_string_pretty(&v).expect("json") + "\n"
}

fn json_artifact<T: Serialize>(name: &str, cfg: &RunConfig, result: &T) -> Artifact {
    Artifact {
        name: name.into(),
        contents: envelope(cfg, result),
    }
}

fn nonempty(list: &[f64], what: &str) -> Result<(), CliError> {
    if list.is_empty() {
        return Err(CliError::Invalid(format!("{what} list is empty")));
    }
    Ok(())
}

pub fn run(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    match cfg.subcommand.as_str() {
        "clifford" => clifford(cfg),
        "lap-scan" => lap(cfg),
        "kato" => kato(cfg),
        "commutator-check" | "check" => commutators(cfg),
        "section2-check" => section2(cfg),
        "gronwall" => gronwall(cfg),
        "scatter" => scatter(cfg),
        "op-norm" => op_norm(cfg),
        other => Err(CliError::Invalid(format!("unknown subcommand {other:?}"))),
    }
}

#[derive(Serialize)]
struct CliffordEntry {
    n: usize,
    size: usize,
    expected_size: usize,
    max_deviation: f64,
    passed: bool,
    matrices: CliffordJson,
}

fn clifford(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let dims: Vec<usize> = match cfg.n {
        Some(n) => vec![n],
        None => (1..=8).collect(),
    };
    let mut entries = Vec::new();
    for n in dims {
        let rep = build_clifford(n)?;
        let report = verify_clifford(&rep);
        entries.push(CliffordEntry {
            n,
            size: rep.size(),
            expected_size: 1 << ((n + 1) / 2),
            max_deviation: report.max_deviation,
            passed: report.passed && rep.size() == spinor_size(n),
            matrices: CliffordJson::from(&rep),
        });
    }
    let body: serde_json::Value = if entries.len() == 1 { json!(entries[0]) } else { json!(entries) };
    Ok(Outcome {
        artifacts: vec![json_artifact("clifford.json", cfg, &body)],
        converged: true,
    })
}

fn lap(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.grid_or(GridSpec::default_for(2))?;
    let grid = Grid::new(spec)?;
    let rep = build_clifford(spec.n)?;
    let lambdas = cfg.lambdas.get_or_insert_with(|| default_lambdas(&spec)).clone();
    let mus = cfg.mus.get_or_insert_with(|| vec![1.0, 0.5, 0.25]).clone();
    nonempty(&lambdas, "lambda")?;
    nonempty(&mus, "mu")?;
    // the unweighted multiplier has a clustered top spectrum and needs longer runs
    cfg.max_iter.get_or_insert(2000);
    let opts = ScanOptions {
        power: cfg.power(),
        weight_exponent: *cfg.weight.get_or_insert(-1.0),
        sign: *cfg.sign.get_or_insert(Sign::Plus),
        force: *cfg.force.get_or_insert(false),
        parallel: true,
    };
    let result = lap_scan(&rep, &CutoffFunction, &grid, &lambdas, &mus, &opts)?;
    let csv = format!(
        "# diraclap {} n={} M={} L={} weight={} sign={:?}\n{}",
        diraclap::VERSION,
        spec.n,
        spec.points,
        spec.length,
        opts.weight_exponent,
        opts.sign,
        result.to_csv()
    );
    let converged = result.summary.all_converged;
    Ok(Outcome {
        artifacts: vec![
            Artifact {
                name: "lap_scan.csv".into(),
                contents: csv,
            },
            json_artifact("lap_scan.json", cfg, &json!({"meta": result.meta, "summary": result.summary})),
        ],
        converged,
    })
}

fn kato(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.grid_or(GridSpec::default_for(2))?;
    if spec.n < 2 {
        return Err(CliError::Invalid("the Kato ratio needs n >= 2".into()));
    }
    let grid = Grid::new(spec)?;
    let ncomp = spinor_size(spec.n);
    let members = *cfg.members.get_or_insert(50);
    if members == 0 {
        return Err(CliError::Invalid("members must be positive".into()));
    }
    let factor = *cfg.dilation.get_or_insert(2.0);
    let family = kato_trial_family(&grid, ncomp, members, cfg.seed);
    let estimate = kato_scan(&family, "modulated gaussians")?;
    let c1 = kato_constant(&grid, ncomp, members, cfg.seed)?;
    let width = spec.length / (8.0 * factor);
    let scaling = kato_scaling_check(&grid, ncomp, width, factor, cfg.seed)?;
    let smooth = match cfg.mus.clone() {
        Some(mus) => {
            nonempty(&mus, "mu")?;
            let rep = build_clifford(spec.n)?;
            let edge = spec.max_momentum() + 2.0;
            let step = *cfg.lambda_step.get_or_insert(0.1);
            Some(kato_smooth_integral(&rep, &family[0], &mus, (-edge, edge), step)?)
        }
        None => None,
    };
    let body = json!({
        "estimate": estimate,
        "all_positive": estimate.ratios.iter().all(|r| *r > 0.0),
        "c1": c1,
        "scaling": scaling,
        "smoothness": smooth,
    });
    Ok(Outcome {
        artifacts: vec![json_artifact("kato.json", cfg, &body)],
        converged: true,
    })
}

fn build_state(cfg: &RunConfig, grid: &Grid, seed: u64) -> Result<SpinorField, CliError> {
    let rep = build_clifford(grid.dim())?;
    let (pmin, pmax) = (cfg.pmin.expect("filled"), cfg.pmax.expect("filled"));
    Ok(match cfg.state.expect("filled") {
        StateKind::Packet => {
            let spec = PacketSpec {
                momentum: cfg.momentum.clone().expect("filled"),
                sigma: cfg.sigma.expect("filled"),
                position: None,
                pmin,
                pmax,
            };
            packet_state(grid, &rep, &spec, seed)?
        }
        StateKind::Annulus => annulus_state(grid, &rep, pmin, pmax, seed)?,
        StateKind::Shell => tapered_annulus_state(grid, &rep, pmin, pmax, seed)?,
    })
}

#[derive(Serialize)]
struct CommutatorSummary {
    ah0: ResidualReport,
    ba: ResidualReport,
    bilinear: ResidualReport,
    t_bounds: ResidualReport,
    invariance: Vec<ResidualReport>,
    derivative: Vec<diraclap::lap::DerivativeCheck>,
    check_tol: f64,
    passed: bool,
}

fn commutators(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.grid_or(GridSpec::default_for(2))?;
    let grid = Grid::new(spec)?;
    let rep = build_clifford(spec.n)?;
    let cutoff = CutoffFunction;
    cfg.state.get_or_insert(StateKind::Packet);
    let mut p0 = vec![0.0; spec.n];
    p0[0] = 3.1;
    cfg.momentum.get_or_insert(p0);
    cfg.sigma.get_or_insert(0.4);
    cfg.pmin.get_or_insert(0.3);
    cfg.pmax.get_or_insert((0.94 * spec.nyquist()).min(5.9));
    let eps = cfg.eps.get_or_insert_with(|| vec![0.1, 0.3, 0.6]).clone();
    nonempty(&eps, "eps")?;
    let step = *cfg.fd_step.get_or_insert(1e-4);
    let refine = *cfg.refine.get_or_insert(1);
    let check_tol = *cfg.check_tol.get_or_insert(1e-6);
    let lambda = cfg.lambdas.get_or_insert_with(|| vec![0.7]).first().copied();
    let mu = cfg.mus.get_or_insert_with(|| vec![0.5]).first().copied();
    let (lambda, mu) = lambda.zip(mu).ok_or_else(|| CliError::Invalid("lambda and mu lists must be nonempty".into()))?;

    let specs: Vec<GridSpec> = (0..=refine)
        .map(|k| GridSpec::new(spec.n, spec.points << k, spec.length * (1u64 << k) as f64))
        .collect::<Result<_, _>>()?;
    let seed = cfg.seed;
    let snapshot = cfg.clone();
    let ah0 = refinement_series(&specs, |g| build_state(&snapshot, g, seed).map_err(into_core), |psi| {
        check_ah0(&rep, &cutoff, psi, "probe")
    })?;
    let ba = refinement_series(&specs, |g| build_state(&snapshot, g, seed).map_err(into_core), |psi| {
        check_ba(&rep, &cutoff, psi, "probe")
    })?;
    let psi = build_state(cfg, &grid, seed)?;
    let psi2 = build_state(cfg, &grid, seed + 1)?;
    let bilinear = check_bilinear(&rep, &cutoff, &psi, &psi2)?;
    let q = ResolventQuery::new(lambda, mu, eps[0], Sign::Plus)?;
    let t_bounds = check_t_bounds(&rep, &cutoff, &grid, &q, 50, seed)?;
    let c1 = kato_constant(&grid, rep.size(), 50, seed)?;
    let mut invariance = Vec::new();
    let mut derivative = Vec::new();
    for &e in &eps {
        let qe = q.with_eps(e)?;
        invariance.push(check_invariance(&rep, &cutoff, &qe, &psi, c1, "probe")?);
        derivative.push(f_eps_derivative(&rep, &cutoff, &qe, &psi, step)?);
    }
    let passed = ah0.relative < check_tol
        && ba.relative < check_tol
        && ah0.refinement_non_increasing(1e-13)
        && ba.refinement_non_increasing(1e-13)
        && derivative.iter().all(|d| d.relative_error < check_tol)
        && invariance.iter().all(|r| r.absolute == 0.0);
    let body = CommutatorSummary {
        ah0,
        ba,
        bilinear,
        t_bounds,
        invariance,
        derivative,
        check_tol,
        passed,
    };
    Ok(Outcome {
        artifacts: vec![json_artifact("commutators.json", cfg, &body)],
        converged: true,
    })
}

fn into_core(e: CliError) -> diraclap::Error {
    match e {
        CliError::Core(c) => c,
        other => diraclap::Error::InvalidArgument(other.to_string()),
    }
}

fn section2(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.grid_or(GridSpec::new(2, 128, 8.0)?)?;
    let grid = Grid::new(spec)?;
    let rep = build_clifford(spec.n)?;
    let ms = cfg.m_list.get_or_insert_with(|| vec![1.0, 10.0, 100.0, 1000.0]).clone();
    nonempty(&ms, "m")?;
    let opts = cfg.power();
    let op = build_first_order(periodic_coefficients(&grid, &rep))?;
    let phi = random_field(&grid, rep.size(), cfg.seed + 1);
    let psi = random_field(&grid, rep.size(), cfg.seed + 2);
    let mut rows = Vec::new();
    let mut converged = true;
    for &m in &ms {
        let est = op.xm_norm(m, &opts)?;
        converged &= est.converged;
        rows.push(json!({
            "m": m,
            "norm": est.value,
            "iterations": est.iterations,
            "converged": est.converged,
            "antisymmetry_defect": op.antisymmetry_defect(m, &phi, &psi)?,
        }));
    }
    let norms: Vec<f64> = rows.iter().map(|r| r["norm"].as_f64().unwrap_or(f64::NAN)).collect();
    let max = norms.iter().copied().fold(f64::MIN, f64::max);
    let min = norms.iter().copied().fold(f64::MAX, f64::min);
    let body = json!({
        "rows": rows,
        "spread": max / min,
        "symmetry_defect": op.symmetry_defect(&phi, &psi)?,
        "derivative_bound": op.derivative_bound(),
    });
    Ok(Outcome {
        artifacts: vec![json_artifact("section2.json", cfg, &body)],
        converged,
    })
}

fn gronwall(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let instances = *cfg.instances.get_or_insert(100);
    let points = *cfg.points.get_or_insert(401);
    let tol = *cfg.check_tol.get_or_insert(1e-6);
    if points < 3 {
        return Err(CliError::Invalid("need at least 3 sample points".into()));
    }
    let mut worst_conclusion = f64::MIN;
    let mut worst_hypothesis = f64::MIN;
    let mut holding = 0;
    for k in 0..instances {
        let input = GronwallInput::synthetic(cfg.seed + k as u64, points);
        let out = gronwall_bound(&input, tol)?;
        worst_conclusion = worst_conclusion.max(out.conclusion_excess);
        worst_hypothesis = worst_hypothesis.max(out.hypothesis_excess);
        holding += usize::from(out.hypothesis_holds && out.conclusion_holds);
    }
    let special = special_cases(points)?;
    let body = json!({
        "instances": instances,
        "holding": holding,
        "worst_conclusion_excess": worst_conclusion,
        "worst_hypothesis_excess": worst_hypothesis,
        "tolerance": tol,
        "special_cases": special,
    });
    Ok(Outcome {
        artifacts: vec![json_artifact("gronwall.json", cfg, &body)],
        converged: true,
    })
}

/// Max deviation from the closed forms `ω` (φ = ψ = 0) and `ω + c(b − λ)` (θ = 0, φ = c, ψ = 0).
fn special_cases(points: usize) -> Result<serde_json::Value, CliError> {
    let (a, b, omega, c) = (-1.0, 2.0, 0.7, 1.3);
    let x: Vec<f64> = (0..points).map(|i| a + (b - a) * i as f64 / (points - 1) as f64).collect();
    let zeros = vec![0.0; points];
    let flat = GronwallInput {
        omega,
        theta: 0.5,
        x: x.clone(),
        phi: zeros.clone(),
        psi: zeros.clone(),
        f: vec![omega; points],
    };
    let linear_f: Vec<f64> = x.iter().map(|t| omega + c * (b - t)).collect();
    let linear = GronwallInput {
        omega,
        theta: 0.0,
        x: x.clone(),
        phi: vec![c; points],
        psi: zeros,
        f: linear_f.clone(),
    };
    let d1 = gronwall_bound(&flat, 1e-10)?.bound.iter().map(|v| (v - omega).abs()).fold(0.0, f64::max);
    let d2 = gronwall_bound(&linear, 1e-10)?
        .bound
        .iter()
        .zip(&linear_f)
        .map(|(v, e)| (v - e).abs())
        .fold(0.0, f64::max);
    Ok(json!({"constant_deviation": d1, "linear_deviation": d2}))
}

fn scatter(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.grid_or(GridSpec::new(2, 128, 64.0)?)?;
    let grid = Grid::new(spec)?;
    let rep = build_clifford(spec.n)?;
    let potential = match (&cfg.potential, &cfg.pot) {
        (Some(p), _) => p.clone(),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?
        }
        (None, None) => PotentialSpec::coulomb2(0.05),
    };
    cfg.potential = Some(potential.clone());
    let times = cfg.times.get_or_insert_with(|| vec![2.0, 4.0, 8.0, 16.0]).clone();
    let dt = *cfg.dt.get_or_insert(0.01);
    let depth = *cfg.depth.get_or_insert(30);
    let lambdas = cfg
        .lambdas
        .get_or_insert_with(|| default_lambdas(&spec).into_iter().step_by(4).collect())
        .clone();
    let mus = cfg.mus.get_or_insert_with(|| vec![1.0, 0.5, 0.25]).clone();
    nonempty(&lambdas, "lambda")?;
    nonempty(&mus, "mu")?;
    let floor = mu_min(&spec);
    if let Some(m) = mus.iter().find(|m| **m < floor) {
        return Err(CliError::Invalid(format!("mu = {m} lies below the grid floor {floor:.4}")));
    }
    let pmax = (0.95 * spec.nyquist()).min(6.0);
    let probes = cfg
        .probes
        .get_or_insert_with(|| {
            let mut a = vec![0.0; spec.n];
            a[0] = 2.0;
            let mut b = vec![0.0; spec.n];
            b[0] = 1.0;
            if spec.n > 1 {
                b[1] = 1.5;
            }
            vec![
                PacketSpec {
                    momentum: a,
                    sigma: 0.5,
                    position: None,
                    pmin: 0.05,
                    pmax,
                },
                PacketSpec {
                    momentum: b,
                    sigma: 0.4,
                    position: None,
                    pmin: 0.05,
                    pmax,
                },
            ]
        })
        .clone();
    let power = cfg.power();
    let sandwich_queries = mus
        .iter()
        .enumerate()
        .map(|(k, &mu)| ResolventQuery::new(0.5, mu, 0.0, if k % 2 == 0 { Sign::Plus } else { Sign::Minus }))
        .collect::<Result<Vec<_>, _>>()?;
    let mut smallness = SmallnessOptions::new(lambdas, mus);
    smallness.power = power;
    let opts = ScatteringOptions {
        smallness,
        sandwich: SandwichOptions {
            depth,
            power,
            ..Default::default()
        },
        sandwich_queries,
        wave: WaveOptions::new(times, dt),
        probes,
        seed: cfg.seed,
    };
    let report = run_scattering(&rep, &CutoffFunction, &grid, &potential, &opts)?;
    let converged = report.smallness.all_converged && report.all_probes_valid;
    Ok(Outcome {
        artifacts: vec![json_artifact("scattering.json", cfg, &report)],
        converged,
    })
}

fn op_norm(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let expr_text = cfg
        .expr
        .clone()
        .ok_or_else(|| CliError::Invalid("op-norm needs --expr".into()))?;
    let spec = cfg.grid_or(GridSpec::default_for(2))?;
    let grid = Grid::new(spec)?;
    let rep = build_clifford(spec.n)?;
    let expr = parse_op(&expr_text)?;
    let adjoint = expr.adjoint();
    let mut ctx = OpContext::new(&rep);
    for (k, v) in cfg.vars.get_or_insert_with(Default::default).iter() {
        ctx = ctx.with_var(k, *v);
    }
    let opts = cfg.power();
    let start = random_field(&grid, rep.size(), opts.seed);
    // surface unbound names and bad arguments before iterating
    expr.apply(&ctx, &start)?;
    adjoint.apply(&ctx, &start)?;
    let est = largest_singular_value(
        |f| expr.apply(&ctx, f).expect("validated"),
        |f| adjoint.apply(&ctx, f).expect("validated"),
        start,
        &opts,
    );
    let body = json!({"expr": expr.to_string(), "adjoint": adjoint.to_string(), "estimate": est});
    Ok(Outcome {
        artifacts: vec![json_artifact("op_norm.json", cfg, &body)],
        converged: est.converged,
    })
}

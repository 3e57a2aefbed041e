//! Subcommand bodies. Each returns `Err(CliError)` carrying its exit class.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use lastiter::certify::{
    default_report, lemma1_certificate_with_weights, verify_certificate, CertifyReport, Rational,
};
use lastiter::methods::run_eag_demo;
use lastiter::metrics::{metric_series, write_metric_csv, GapMode};
use lastiter::pep::reconstruct_instance;
use lastiter::potentials::{check_gidel_lemmas, check_lemma1, check_lemma2, check_theorem_decrease, SlackEntry};
use lastiter::sdp::{certify_solution, to_sdpa};
use lastiter::{build_pep, run, solve, MethodId, PotentialKind, RunConfig, SolveStatus, SolverSettings, Trajectory};
use rayon::prelude::*;

use crate::config::{parse_class, parse_objective, EagConfig, InstanceConfig, PepConfig, SweepConfig};
use crate::instances::{self, Instance};
use crate::CliError;

pub const SIMULATE_SUMMARY_HEADER: &str =
    "seed,dim,L,gamma,N,final_norm_f_sq,final_residual_sq,max_bound_ratio,min_slack,status";
pub const POTENTIAL_SUMMARY_HEADER: &str =
    "seed,dim,L,gamma,N,min_potential_slack,min_lemma_slack,rate_quantity,rate_bound,status";
pub const LEMMA_CSV_HEADER: &str = "k,inequality,lhs,rhs,scaled_slack";
pub const SWEEP_CSV_HEADER: &str =
    "method,gamma,L,N,t,class,objective,objective_value,solver_status,certified_bound,n_times_value";
pub const EAG_SUMMARY_HEADER: &str = "method,initial_dist_stationary,final_dist_stationary,final_dist_manifold";

fn create(path: &Path) -> std::io::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn core_err(e: lastiter::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Which potential, if any, the theorems attach to a method.
fn potential_for(method: MethodId) -> Option<PotentialKind> {
    match method {
        MethodId::PEG => Some(PotentialKind::UnconstrainedPhi),
        MethodId::ProjPEG => Some(PotentialKind::ConstrainedPhi),
        _ => None,
    }
}

struct Prepared {
    method: MethodId,
    gamma: f64,
}

fn prepare(cfg: &InstanceConfig, section: &str) -> Result<Prepared, CliError> {
    cfg.validate(section)?;
    let method = cfg.method_id(section)?;
    Ok(Prepared {
        method,
        gamma: cfg.effective_gamma(method),
    })
}

fn run_instance(cfg: &InstanceConfig, p: &Prepared, seed: u64) -> lastiter::Result<(Instance, Trajectory)> {
    let inst = instances::build(cfg, seed)?;
    let traj = run(&inst.op, &inst.set, &RunConfig::new(p.method, p.gamma, cfg.iterations, inst.x0.clone()))?;
    Ok((inst, traj))
}

/// Per-seed outcome shared by `simulate` and `potential-check`.
struct SeedResult {
    row: String,
    min_slack: Option<f64>,
    worst_ratio: Option<f64>,
    violation: bool,
    error: Option<String>,
}

impl SeedResult {
    /// Both summaries have five identifying columns and five result columns.
    fn failed(cfg: &InstanceConfig, p: &Prepared, seed: u64, e: lastiter::Error) -> Self {
        let row = format!("{seed},{},{},{:e},{},,,,,error", cfg.dim, cfg.lipschitz, p.gamma, cfg.iterations);
        SeedResult {
            row,
            min_slack: None,
            worst_ratio: None,
            violation: false,
            error: Some(format!("seed {seed}: {e}")),
        }
    }
}

struct Aggregate {
    instances: usize,
    violations: usize,
    errors: Vec<String>,
    worst_slack: Option<f64>,
    worst_ratio: Option<f64>,
}

fn aggregate(results: &[SeedResult]) -> Aggregate {
    let fold = |f: fn(&SeedResult) -> Option<f64>, pick: fn(f64, f64) -> f64| {
        results.iter().filter_map(f).reduce(pick)
    };
    Aggregate {
        instances: results.len(),
        violations: results.iter().filter(|r| r.violation).count(),
        errors: results.iter().filter_map(|r| r.error.clone()).collect(),
        worst_slack: fold(|r| r.min_slack, f64::min),
        worst_ratio: fold(|r| r.worst_ratio, f64::max),
    }
}

fn finish(agg: &Aggregate, summary: &Path) -> Result<(), CliError> {
    println!("instances: {}", agg.instances);
    println!("violations: {}", agg.violations);
    println!("errors: {}", agg.errors.len());
    println!("worst scaled slack: {}", agg.worst_slack.map_or("n/a".into(), |v| format!("{v:.3e}")));
    println!("worst bound ratio: {}", agg.worst_ratio.map_or("n/a".into(), |v| format!("{v:.3e}")));
    println!("summary: {}", summary.display());
    for e in &agg.errors {
        eprintln!("{e}");
    }
    if agg.violations > 0 {
        return Err(CliError::Verification(format!("{} of {} instances violate the bounds", agg.violations, agg.instances)));
    }
    if !agg.errors.is_empty() {
        return Err(CliError::Solver(format!("{} of {} instances failed to run", agg.errors.len(), agg.instances)));
    }
    Ok(())
}

fn write_summary(path: &Path, header: &str, results: &[SeedResult]) -> Result<(), CliError> {
    let mut w = create(path)?;
    writeln!(w, "{header}")?;
    for r in results {
        writeln!(w, "{}", r.row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn simulate(cfg: &InstanceConfig, pool: &rayon::ThreadPool) -> Result<(), CliError> {
    let p = prepare(cfg, "simulate")?;
    fs::create_dir_all(&cfg.out_dir)?;
    let mode = if p.method.is_projected() { GapMode::Constrained } else { GapMode::Unconstrained };
    let one = |seed: u64| -> lastiter::Result<SeedResult> {
        let (inst, traj) = run_instance(cfg, &p, seed)?;
        let metrics = metric_series(&traj, &inst.x_star, mode, cfg.lipschitz)?;
        if cfg.per_instance {
            let dir = &cfg.out_dir;
            let mut t = create(&dir.join(format!("traj_{seed}.csv")))?;
            traj.write_csv(&mut t)?;
            t.flush()?;
            let mut m = create(&dir.join(format!("metrics_{seed}.csv")))?;
            write_metric_csv(&metrics, &mut m)?;
            m.flush()?;
        }
        let n = traj.len();
        let worst_ratio = metrics.iter().filter_map(|r| r.ratio).reduce(f64::max);
        let (min_slack, status, violation) = match potential_for(p.method) {
            Some(kind) => {
                let rep = check_theorem_decrease(kind, &traj, &inst.x_star, cfg.lipschitz)?;
                let status = match (rep.passed(), rep.out_of_theorem) {
                    (true, _) => "ok",
                    (false, true) => "outside-theorem",
                    (false, false) => "violation",
                };
                (Some(rep.min_slack), status, status == "violation")
            }
            None => (None, "no-potential", false),
        };
        let row = format!(
            "{seed},{},{},{:e},{n},{:e},{},{},{},{status}",
            cfg.dim,
            cfg.lipschitz,
            p.gamma,
            traj.gs[n].norm_squared(),
            opt(metrics.get(n.wrapping_sub(1)).and_then(|r| r.residual_sq)),
            opt(worst_ratio),
            opt(min_slack),
        );
        Ok(SeedResult {
            row,
            min_slack,
            worst_ratio,
            violation,
            error: None,
        })
    };
    let seeds: Vec<u64> = (0..cfg.seeds).map(|i| cfg.seed + i).collect();
    let results: Vec<SeedResult> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&s| one(s).unwrap_or_else(|e| SeedResult::failed(cfg, &p, s, e)))
            .collect()
    });
    let summary = cfg.out_dir.join("summary.csv");
    write_summary(&summary, SIMULATE_SUMMARY_HEADER, &results)?;
    finish(&aggregate(&results), &summary)
}

fn lemma_rows(traj: &Trajectory, inst: &Instance, l: f64) -> lastiter::Result<Vec<(&'static str, SlackEntry)>> {
    let n = traj.len();
    let mut rows = Vec::new();
    for k in 1..n {
        if traj.method == MethodId::PEG {
            rows.push(("energy", check_lemma1(traj, k, l)?));
        }
        rows.push(("residual-potential", check_lemma2(traj, k, l)?));
        let (a, b) = check_gidel_lemmas(traj, k, l, &inst.x_star)?;
        rows.extend(a.map(|e| ("aux-distance", e)));
        rows.extend(b.map(|e| ("aux-extrapolation", e)));
    }
    Ok(rows)
}

pub fn potential_check(cfg: &InstanceConfig, pool: &rayon::ThreadPool) -> Result<(), CliError> {
    let p = prepare(cfg, "potential-check")?;
    let Some(kind) = potential_for(p.method) else {
        return Err(CliError::Config(format!(
            "potential-check.method: potentials are defined for peg and proj-peg, got {}",
            p.method
        )));
    };
    fs::create_dir_all(&cfg.out_dir)?;
    let one = |seed: u64| -> lastiter::Result<SeedResult> {
        let (inst, traj) = run_instance(cfg, &p, seed)?;
        let rep = check_theorem_decrease(kind, &traj, &inst.x_star, cfg.lipschitz)?;
        let lemmas = lemma_rows(&traj, &inst, cfg.lipschitz)?;
        if cfg.per_instance {
            let mut d = create(&cfg.out_dir.join(format!("decrease_{seed}.csv")))?;
            rep.write_csv(&mut d)?;
            d.flush()?;
            let mut w = create(&cfg.out_dir.join(format!("lemmas_{seed}.csv")))?;
            writeln!(w, "{LEMMA_CSV_HEADER}")?;
            for (name, e) in &lemmas {
                writeln!(w, "{},{name},{:e},{:e},{:e}", e.k, e.lhs, e.rhs, e.scaled_slack())?;
            }
            w.flush()?;
        }
        let lemma_min = lemmas.iter().map(|(_, e)| e.scaled_slack()).reduce(f64::min);
        let lemma_ok = lemmas.iter().all(|(_, e)| e.holds());
        let status = match (rep.passed() && lemma_ok, rep.out_of_theorem) {
            (true, _) => "ok",
            (false, true) if lemma_ok => "outside-theorem",
            _ => "violation",
        };
        let row = format!(
            "{seed},{},{},{:e},{},{:e},{},{:e},{:e},{status}",
            cfg.dim,
            cfg.lipschitz,
            p.gamma,
            traj.len(),
            rep.min_slack,
            opt(lemma_min),
            rep.rate_quantity,
            rep.rate_bound,
        );
        Ok(SeedResult {
            row,
            min_slack: Some(lemma_min.map_or(rep.min_slack, |m| m.min(rep.min_slack))),
            worst_ratio: (rep.rate_bound > 0.0).then(|| rep.rate_quantity / rep.rate_bound),
            violation: status == "violation",
            error: None,
        })
    };
    let seeds: Vec<u64> = (0..cfg.seeds).map(|i| cfg.seed + i).collect();
    let results: Vec<SeedResult> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&s| one(s).unwrap_or_else(|e| SeedResult::failed(cfg, &p, s, e)))
            .collect()
    });
    let summary = cfg.out_dir.join("summary.csv");
    write_summary(&summary, POTENTIAL_SUMMARY_HEADER, &results)?;
    finish(&aggregate(&results), &summary)
}

struct SweepRow {
    method: MethodId,
    gamma: f64,
    n: usize,
    t: usize,
    objective: String,
}

/// Rows are independent; the pool may finish them in any order but the
/// output keeps the configured order.
pub fn pep_sweep(cfg: &SweepConfig, pool: &rayon::ThreadPool) -> Result<(), CliError> {
    cfg.validate()?;
    let l = cfg.lipschitz;
    let class = parse_class(&cfg.class, l, "pep-sweep.class")?;
    let mut rows = Vec::new();
    for m in &cfg.methods {
        let method: MethodId = m.parse().map_err(core_err)?;
        for &g in &cfg.gammas {
            for &n in &cfg.ns {
                for &t in &cfg.distances {
                    for o in &cfg.objectives {
                        rows.push(SweepRow {
                            method,
                            gamma: g / l,
                            n,
                            t,
                            objective: o.clone(),
                        });
                    }
                }
            }
        }
    }
    let settings = SolverSettings::default().with_tol(cfg.tol).with_max_iter(cfg.max_iter);
    let solve_row = |r: &SweepRow| -> (String, bool) {
        let objective = parse_objective(&r.objective, r.method, "pep-sweep.objectives").expect("validated");
        let mut spec = lastiter::PepSpec::new(r.method, r.gamma, l, r.n)
            .with_class(class)
            .with_objective(objective);
        if r.t > 0 {
            spec = spec.with_distance(r.t);
        }
        let t_col = if r.t > 0 { r.t.to_string() } else { String::new() };
        let prefix = format!(
            "{},{:e},{},{},{t_col},{},{}",
            r.method,
            r.gamma,
            l,
            r.n,
            class.name(),
            objective.name()
        );
        let outcome = build_pep(&spec).and_then(|problem| {
            let sol = solve(&problem, &settings)?;
            let bound = (cfg.certify && sol.status == SolveStatus::Solved)
                .then(|| certify_solution(&problem, &sol).ok().map(|b| b.value))
                .flatten();
            Ok((sol, bound))
        });
        match outcome {
            Ok((sol, bound)) => (
                format!(
                    "{prefix},{:e},{},{},{:e}",
                    sol.objective,
                    sol.status.name(),
                    opt(bound),
                    r.n as f64 * sol.objective
                ),
                sol.status == SolveStatus::Solved,
            ),
            Err(e) => {
                eprintln!("{prefix}: {e}");
                (format!("{prefix},,error,,"), false)
            }
        }
    };
    let lines: Vec<(String, bool)> = pool.install(|| rows.par_iter().map(solve_row).collect());
    let mut w = create(&cfg.out)?;
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    println!("{SWEEP_CSV_HEADER}");
    for (line, _) in &lines {
        writeln!(w, "{line}")?;
        println!("{line}");
    }
    w.flush()?;
    let failed = lines.iter().filter(|(_, ok)| !ok).count();
    if failed > 0 {
        return Err(CliError::Solver(format!("{failed} of {} rows did not solve", lines.len())));
    }
    Ok(())
}

fn parse_weights(text: &str) -> Result<(Rational, Rational), CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || CliError::Config(format!("--lemma1-weights: expected two rationals like '2,3', got '{text}'"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let a = Rational::from_str(parts[0]).map_err(|_| bad())?;
    let b = Rational::from_str(parts[1]).map_err(|_| bad())?;
    Ok((a, b))
}

pub fn certify(lemma1_weights: Option<&str>) -> Result<(), CliError> {
    let mut report: CertifyReport = default_report();
    if let Some(w) = lemma1_weights {
        let (a, b) = parse_weights(w)?;
        let cert = lemma1_certificate_with_weights(a, b).map_err(core_err)?;
        let verdict = verify_certificate(&cert);
        report.entries[0] = (cert, verdict);
    }
    println!("{report}");
    if report.all_valid() {
        Ok(())
    } else {
        Err(CliError::Verification("at least one certificate is invalid".into()))
    }
}

fn solved_pep(cfg: &PepConfig, section: &str) -> Result<(lastiter::SdpProblem, lastiter::SdpSolution), CliError> {
    let spec = cfg.spec(section)?;
    let problem = build_pep(&spec).map_err(core_err)?;
    let sol = solve(&problem, &SolverSettings::default().with_tol(cfg.tol).with_max_iter(cfg.max_iter))
        .map_err(|e| CliError::Solver(e.to_string()))?;
    if sol.status != SolveStatus::Solved {
        return Err(CliError::Solver(format!(
            "solver stopped with status {} after {} iterations",
            sol.status, sol.iterations
        )));
    }
    Ok((problem, sol))
}

pub fn reconstruct(cfg: &PepConfig) -> Result<(), CliError> {
    let (problem, sol) = solved_pep(cfg, "reconstruct")?;
    let inst = reconstruct_instance(&problem, &sol.g).map_err(|e| CliError::Solver(e.to_string()))?;
    let mut w = create(&cfg.out)?;
    let mut header = String::from("label,kind");
    for i in 0..inst.rank {
        write!(header, ",c{i}").expect("string write");
    }
    writeln!(w, "{header}")?;
    for (kind, list) in [("point", &inst.points), ("value", &inst.values)] {
        for (label, v) in list {
            let coords: Vec<String> = v.iter().map(|c| format!("{c:e}")).collect();
            writeln!(w, "{label},{kind},{}", coords.join(","))?;
        }
    }
    w.flush()?;
    println!("objective: {:.9e}", sol.objective);
    println!("rank: {}", inst.rank);
    println!("max constraint residual: {:.3e}", inst.max_residual());
    println!("gram error: {:.3e}", inst.gram_error);
    println!("replayed objective: {:.9e}", inst.objective);
    println!("wrote {}", cfg.out.display());
    Ok(())
}

pub fn export_sdpa(cfg: &PepConfig) -> Result<(), CliError> {
    let spec = cfg.spec("export-sdpa")?;
    let problem = build_pep(&spec).map_err(core_err)?;
    let mut w = create(&cfg.out)?;
    w.write_all(to_sdpa(&problem).as_bytes())?;
    w.flush()?;
    println!(
        "wrote {}: {} constraints, Gram dimension {}",
        cfg.out.display(),
        problem.constraints.len(),
        problem.gram_dim
    );
    Ok(())
}

pub fn eag_demo(cfg: &EagConfig) -> Result<(), CliError> {
    cfg.validate()?;
    let demo = run_eag_demo(cfg.init_offset, cfg.gamma, cfg.iterations).map_err(|e| CliError::Solver(e.to_string()))?;
    fs::create_dir_all(&cfg.out)?;
    for t in [&demo.eag, &demo.peg, &demo.eg] {
        let mut w = create(&cfg.out.join(format!("{}.csv", t.method)))?;
        t.write_csv(&mut w).map_err(core_err)?;
        w.flush()?;
    }
    println!("{EAG_SUMMARY_HEADER}");
    for s in demo.summaries() {
        println!(
            "{},{:e},{:e},{:e}",
            s.method, s.initial_dist_stationary, s.final_dist_stationary, s.final_dist_manifold
        );
    }
    Ok(())
}

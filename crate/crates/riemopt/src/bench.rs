//! Benchmark problems and the CLI: canonical objectives over the manifold
//! catalog, an optimization driver producing per-step traces, CSV/JSON
//! emission, and the `run`/`check` command-line surface.

use crate::array::Array;
use crate::checks::{run_manifold_suite, central_diff_grad, Plain};
use crate::error::{Error, Result};
use crate::linalg::{sym_eig, Matrix};
use crate::manifolds::Manifold;
use crate::optim::{
    apply_dense, init, GradKind, OptimizerConfig, ParameterBinding,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::io::Write as _;

/// A benchmark objective bound to a manifold. `gradient` returns either an
/// ambient Euclidean gradient or a native Riemannian one, per `grad_kind`.
pub struct Problem {
    pub name: String,
    pub manifold: Manifold,
    pub grad_kind: GradKind,
    objective: Box<dyn Fn(&Array) -> f64>,
    gradient: Box<dyn Fn(&Array) -> Result<Array>>,
    initial: Box<dyn Fn(u64) -> Array>,
    /// Known minimizer, when available in closed form.
    pub optimum: Option<Array>,
    /// Known optimal objective value, when available.
    pub optimal_value: Option<f64>,
}

impl Problem {
    pub fn f(&self, x: &Array) -> f64 {
        (self.objective)(x)
    }

    pub fn grad(&self, x: &Array) -> Result<Array> {
        (self.gradient)(x)
    }

    pub fn initial_point(&self, seed: u64) -> Array {
        (self.initial)(seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Single,
    Double,
}

#[derive(Debug, Clone)]
pub struct TraceRow {
    pub step: usize,
    pub loss: f64,
    pub grad_norm: f64,
    pub dist_to_opt: Option<f64>,
}

/// Per-step optimization record; row 0 is the pre-update state.
#[derive(Debug, Clone)]
pub struct Trace {
    pub problem: String,
    pub algorithm: String,
    pub seed: u64,
    pub precision: Precision,
    /// Set when a non-finite objective cut the run short.
    pub aborted: bool,
    pub rows: Vec<TraceRow>,
    pub final_point: Array,
}

pub fn list_problems() -> Vec<&'static str> {
    vec![
        "pole",
        "rayleigh",
        "subspace",
        "procrustes_so3",
        "spd_mean",
        "poincare_stress",
    ]
}

fn seeded_symmetric(n: usize, seed: u64) -> Matrix {
    let e = Manifold::euclidean(vec![n, n]).unwrap();
    let raw = e.random(&[], seed);
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = 0.5 * (raw.data()[i * n + j] + raw.data()[j * n + i]);
            a[(i, j)] = v;
        }
    }
    a
}

fn matvec(a: &Matrix, x: &[f64]) -> Vec<f64> {
    let n = a.rows();
    let m = a.cols();
    let mut out = vec![0.0; n];
    for i in 0..n {
        out[i] = (0..m).map(|j| a[(i, j)] * x[j]).sum();
    }
    out
}

fn mat_of(x: &Array, n: usize, m: usize) -> Matrix {
    Matrix::from_slice(n, m, x.data()).expect("point is matrix shaped")
}

fn arr_of(m: &Matrix) -> Array {
    Array::new(vec![m.rows(), m.cols()], m.data().to_vec()).unwrap()
}

/// Instantiate a named problem. `size` overrides the problem's default
/// dimension: point count for pole/poincare_stress, ambient dimension for
/// rayleigh/subspace, anchor count for spd_mean; ignored by procrustes_so3.
pub fn build_problem(name: &str, size: Option<usize>, seed: u64) -> Result<Problem> {
    match name {
        "pole" => {
            let n = size.unwrap_or(16);
            let man = Manifold::sphere(2)?;
            let pole = [0.0, 1.0];
            let objective = move |x: &Array| -> f64 {
                x.data()
                    .chunks_exact(2)
                    .map(|p| ((p[0] - pole[0]).powi(2) + (p[1] - pole[1]).powi(2)).sqrt())
                    .sum()
            };
            let gradient = move |x: &Array| -> Result<Array> {
                let mut g = Array::zeros(x.shape().to_vec());
                for (gp, p) in g.data_mut().chunks_exact_mut(2).zip(x.data().chunks_exact(2)) {
                    let d = [p[0] - pole[0], p[1] - pole[1]];
                    let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
                    if r > 1e-12 {
                        gp[0] = d[0] / r;
                        gp[1] = d[1] / r;
                    }
                }
                Ok(g)
            };
            let man2 = man.clone();
            let mut opt = Array::zeros(vec![n, 2]);
            for p in opt.data_mut().chunks_exact_mut(2) {
                p.copy_from_slice(&pole);
            }
            Ok(Problem {
                name: name.into(),
                manifold: man.clone(),
                grad_kind: GradKind::Euclidean,
                objective: Box::new(objective),
                gradient: Box::new(gradient),
                initial: Box::new(move |s| man2.random(&[n], s)),
                optimum: Some(opt),
                optimal_value: Some(0.0),
            })
        }
        "rayleigh" => {
            let n = size.unwrap_or(10);
            let man = Manifold::sphere(n)?;
            let a = seeded_symmetric(n, seed);
            let (eigs, _) = sym_eig(&a)?;
            let a1 = a.clone();
            let a2 = a.clone();
            let objective = move |x: &Array| -> f64 {
                let ax = matvec(&a1, x.data());
                x.data().iter().zip(&ax).map(|(u, v)| u * v).sum()
            };
            let gradient = move |x: &Array| -> Result<Array> {
                let mut ax = matvec(&a2, x.data());
                for v in &mut ax {
                    *v *= 2.0;
                }
                Ok(Array::from_vec(ax))
            };
            let man2 = man.clone();
            Ok(Problem {
                name: name.into(),
                manifold: man,
                grad_kind: GradKind::Euclidean,
                objective: Box::new(objective),
                gradient: Box::new(gradient),
                initial: Box::new(move |s| man2.random(&[], s)),
                optimum: None,
                optimal_value: Some(eigs[0]),
            })
        }
        "subspace" => {
            let n = size.unwrap_or(10);
            let p = 3.min(n.saturating_sub(1)).max(1);
            let man = Manifold::grassmannian(n, p)?;
            let a = seeded_symmetric(n, seed);
            let (eigs, _) = sym_eig(&a)?;
            let opt_val = -eigs[n - p..].iter().sum::<f64>();
            let a1 = a.clone();
            let a2 = a.clone();
            let objective = move |x: &Array| -> f64 {
                let xm = mat_of(x, a1.rows(), x.len() / a1.rows());
                let ax = a1.matmul(&xm);
                -xm.data().iter().zip(ax.data()).map(|(u, v)| u * v).sum::<f64>()
            };
            let gradient = move |x: &Array| -> Result<Array> {
                let xm = mat_of(x, a2.rows(), x.len() / a2.rows());
                Ok(arr_of(&a2.matmul(&xm).scale(-2.0)))
            };
            let man2 = man.clone();
            Ok(Problem {
                name: name.into(),
                manifold: man,
                grad_kind: GradKind::Euclidean,
                objective: Box::new(objective),
                gradient: Box::new(gradient),
                initial: Box::new(move |s| man2.random(&[], s)),
                optimum: None,
                optimal_value: Some(opt_val),
            })
        }
        "procrustes_so3" => {
            let man = Manifold::special_orthogonal(3)?;
            let a = {
                let e = Manifold::euclidean(vec![3, 3]).unwrap();
                let raw = e.random(&[], seed ^ 0xa11ce);
                Matrix::from_slice(3, 3, raw.data()).unwrap()
            };
            let r_star = man.random(&[], seed ^ 0xb0b);
            let b = mat_of(&r_star, 3, 3).matmul(&a);
            let (a1, b1) = (a.clone(), b.clone());
            let (a2, b2) = (a, b);
            let objective = move |x: &Array| -> f64 {
                let res = mat_of(x, 3, 3).matmul(&a1).sub(&b1);
                res.data().iter().map(|v| v * v).sum()
            };
            let gradient = move |x: &Array| -> Result<Array> {
                let res = mat_of(x, 3, 3).matmul(&a2).sub(&b2);
                Ok(arr_of(&res.matmul(&a2.transpose()).scale(2.0)))
            };
            let man2 = man.clone();
            Ok(Problem {
                name: name.into(),
                manifold: man,
                grad_kind: GradKind::Euclidean,
                objective: Box::new(objective),
                gradient: Box::new(gradient),
                initial: Box::new(move |s| man2.random(&[], s)),
                optimum: Some(r_star),
                optimal_value: Some(0.0),
            })
        }
        "spd_mean" => {
            let k = size.unwrap_or(2).max(1);
            let man = Manifold::spd_affine_invariant(3)?;
            let anchors: Vec<Array> =
                (0..k).map(|i| man.random(&[], seed.wrapping_add(i as u64))).collect();
            let man1 = man.clone();
            let man2 = man.clone();
            let an1 = anchors.clone();
            let an2 = anchors.clone();
            let objective = move |x: &Array| -> f64 {
                an1.iter()
                    .map(|a| {
                        let d = man1.dist(x, a).map(|d| d.data()[0]).unwrap_or(f64::NAN);
                        d * d
                    })
                    .sum()
            };
            // native Riemannian gradient of the squared-distance sum
            let gradient = move |x: &Array| -> Result<Array> {
                let mut g = Array::zeros(x.shape().to_vec());
                for a in &an2 {
                    g = g.add(&man2.log(x, a)?.scale(-2.0))?;
                }
                Ok(g)
            };
            // closed-form optimum for two anchors: the geodesic midpoint
            let optimum = if k == 2 {
                let half = man.log(&anchors[0], &anchors[1])?.scale(0.5);
                Some(man.exp(&anchors[0], &half)?)
            } else {
                None
            };
            let man3 = man.clone();
            Ok(Problem {
                name: name.into(),
                manifold: man,
                grad_kind: GradKind::Riemannian,
                objective: Box::new(objective),
                gradient: Box::new(gradient),
                initial: Box::new(move |s| man3.random(&[], s ^ 0xdead)),
                optimum,
                optimal_value: None,
            })
        }
        "poincare_stress" => {
            let n = size.unwrap_or(16).min(32).max(2);
            let man = Manifold::poincare(2, 1.0)?;
            // target metric: path distances over a seeded random tree
            let e = Manifold::euclidean(vec![2 * n]).unwrap();
            let raw = e.random(&[], seed ^ 0x7ee);
            let mut parent = vec![0usize; n];
            let mut weight = vec![0.0f64; n];
            for i in 1..n {
                let u = raw.data()[2 * i].abs().fract();
                parent[i] = (u * i as f64) as usize % i;
                weight[i] = 0.5 + raw.data()[2 * i + 1].abs().fract();
            }
            // depth accumulation then LCA-free pairwise distances via root paths
            let mut targets = vec![0.0f64; n * n];
            let path_to_root = |mut v: usize| -> Vec<(usize, f64)> {
                let mut acc = vec![(v, 0.0)];
                let mut d = 0.0;
                while v != 0 {
                    d += weight[v];
                    v = parent[v];
                    acc.push((v, d));
                }
                acc
            };
            for i in 0..n {
                let pi = path_to_root(i);
                for j in 0..n {
                    let pj = path_to_root(j);
                    let mut best = f64::INFINITY;
                    for &(a, da) in &pi {
                        for &(b, db) in &pj {
                            if a == b {
                                best = best.min(da + db);
                            }
                        }
                    }
                    targets[i * n + j] = best;
                }
            }
            let man1 = man.clone();
            let t1 = targets.clone();
            let objective = move |x: &Array| -> f64 {
                let mut s = 0.0;
                for i in 0..n {
                    for j in (i + 1)..n {
                        let xi = Array::from_vec(x.data()[2 * i..2 * i + 2].to_vec());
                        let xj = Array::from_vec(x.data()[2 * j..2 * j + 2].to_vec());
                        let d = man1.dist(&xi, &xj).map(|d| d.data()[0]).unwrap_or(f64::NAN);
                        let r = d - t1[i * n + j];
                        s += r * r;
                    }
                }
                s
            };
            let obj2 = {
                let man1 = man.clone();
                let t1 = targets;
                move |x: &Array| -> f64 {
                    let mut s = 0.0;
                    for i in 0..n {
                        for j in (i + 1)..n {
                            let xi = Array::from_vec(x.data()[2 * i..2 * i + 2].to_vec());
                            let xj = Array::from_vec(x.data()[2 * j..2 * j + 2].to_vec());
                            let d =
                                man1.dist(&xi, &xj).map(|d| d.data()[0]).unwrap_or(f64::NAN);
                            let r = d - t1[i * n + j];
                            s += r * r;
                        }
                    }
                    s
                }
            };
            // finite differences keep the gradient honest at desk scale
            let gradient = move |x: &Array| -> Result<Array> {
                central_diff_grad(&obj2, x, 1e-6)
            };
            let man2 = man.clone();
            Ok(Problem {
                name: name.into(),
                manifold: man,
                grad_kind: GradKind::Euclidean,
                objective: Box::new(objective),
                gradient: Box::new(gradient),
                initial: Box::new(move |s| man2.random(&[n], s)),
                optimum: None,
                optimal_value: None,
            })
        }
        other => Err(Error::UnknownProblem(other.into())),
    }
}

/// Drive an optimizer over a problem. Row 0 records the initial state; a
/// non-finite objective aborts and flags the partial trace. With single
/// precision every iterate is rounded through f32 then reprojected.
pub fn run(
    problem: &Problem,
    config: OptimizerConfig,
    steps: usize,
    seed: u64,
    precision: Precision,
) -> Result<Trace> {
    if steps == 0 {
        return Err(Error::Config("steps must be at least 1".into()));
    }
    let algorithm = config.algorithm;
    let mut x = problem.initial_point(seed);
    if precision == Precision::Single {
        x.quantize_single();
        x = problem.manifold.projx(&x)?;
    }
    let mut binding = ParameterBinding::new(problem.name.clone(), problem.manifold.clone(), x)?;
    let mut state = init(config, std::slice::from_ref(&binding))?;

    let mut rows = Vec::with_capacity(steps + 1);
    let mut aborted = false;
    for step in 0..=steps {
        let loss = problem.f(&binding.values);
        if !loss.is_finite() {
            aborted = true;
            break;
        }
        let g = problem.grad(&binding.values)?;
        let rg = match problem.grad_kind {
            GradKind::Euclidean => problem.manifold.egrad2rgrad(&binding.values, &g)?,
            GradKind::Riemannian => g.clone(),
        };
        let grad_norm = {
            let n = problem.manifold.norm(&binding.values, &rg)?;
            n.data().iter().map(|v| v * v).sum::<f64>().sqrt()
        };
        let dist_to_opt = match &problem.optimum {
            Some(opt) => {
                let d = problem.manifold.dist(&binding.values, opt)?;
                Some(d.data().iter().map(|v| v * v).sum::<f64>().sqrt())
            }
            None => None,
        };
        rows.push(TraceRow {
            step,
            loss,
            grad_norm,
            dist_to_opt,
        });
        if step == steps {
            break;
        }
        apply_dense(&mut state, 0, &mut binding, &g, problem.grad_kind)?;
        if precision == Precision::Single {
            binding.values.quantize_single();
            binding.values = problem.manifold.projx(&binding.values)?;
        }
        debug_assert!(problem
            .manifold
            .check_point(&binding.values, 1e-8)
            .unwrap_or(false));
    }
    Ok(Trace {
        problem: problem.name.clone(),
        algorithm: algorithm.name_str().into(),
        seed,
        precision,
        aborted,
        rows,
        final_point: binding.values,
    })
}

impl crate::optim::Algorithm {
    fn name_str(self) -> &'static str {
        match self {
            crate::optim::Algorithm::Rsgd => "rsgd",
            crate::optim::Algorithm::CRmsprop => "crmsprop",
            crate::optim::Algorithm::RAdam => "radam",
        }
    }
}

/// CSV emission: header row, LF endings, 17 significant digits.
pub fn write_trace_csv(trace: &Trace, path: &std::path::Path) -> Result<()> {
    let mut out = String::new();
    let with_dist = trace.rows.iter().any(|r| r.dist_to_opt.is_some());
    out.push_str(if with_dist {
        "step,loss,grad_norm,dist_to_opt\n"
    } else {
        "step,loss,grad_norm\n"
    });
    for r in &trace.rows {
        out.push_str(&format!("{},{:.16e},{:.16e}", r.step, r.loss, r.grad_norm));
        if with_dist {
            out.push_str(&format!(",{:.16e}", r.dist_to_opt.unwrap_or(f64::NAN)));
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

// --- CLI -----------------------------------------------------------------

#[derive(Parser)]
#[command(name = "riemopt", about = "Riemannian optimization benchmarks and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize a benchmark problem and write a CSV trace.
    Run(RunArgs),
    /// Run the manifold property suite.
    Check(CheckArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    problem: String,
    #[arg(long)]
    optimizer: String,
    #[arg(long)]
    lr: f64,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    beta1: Option<f64>,
    #[arg(long)]
    beta2: Option<f64>,
    #[arg(long)]
    amsgrad: bool,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "double")]
    precision: String,
    /// Force the retraction instead of the exponential map.
    #[arg(long)]
    retraction: bool,
    /// Use the first-order vector transport instead of parallel transport.
    #[arg(long)]
    approx_transport: bool,
    /// Problem size override (points / dimension / anchors).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: std::path::PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    /// Manifold kind, or "all".
    #[arg(long)]
    manifold: String,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    tol: Option<f64>,
    /// Write the full JSON report here.
    #[arg(long)]
    json: Option<std::path::PathBuf>,
}

fn default_manifold(kind: &str) -> Result<Manifold> {
    match kind {
        "euclidean" => Manifold::euclidean(vec![3]),
        "sphere" => Manifold::sphere(4),
        "hyperboloid" => Manifold::hyperboloid(4),
        "poincare" => Manifold::poincare(3, 1.0),
        "stiefel" => Manifold::stiefel(5, 2),
        "grassmannian" => Manifold::grassmannian(5, 2),
        "special_orthogonal" => Manifold::special_orthogonal(3),
        "spd_affine_invariant" => Manifold::spd_affine_invariant(3),
        "spd_log_euclidean" => Manifold::spd_log_euclidean(3),
        "spd_log_cholesky" => Manifold::spd_log_cholesky(3),
        "cholesky" => Manifold::cholesky(3),
        "product" => Manifold::product(vec![
            Manifold::sphere(3)?,
            Manifold::euclidean(vec![2])?,
        ]),
        other => Err(Error::Config(format!("unknown manifold kind '{other}'"))),
    }
}

pub const MANIFOLD_KINDS: [&str; 12] = [
    "euclidean",
    "sphere",
    "hyperboloid",
    "poincare",
    "stiefel",
    "grassmannian",
    "special_orthogonal",
    "spd_affine_invariant",
    "spd_log_euclidean",
    "spd_log_cholesky",
    "cholesky",
    "product",
];

#[derive(Serialize)]
struct KindReport<'a> {
    manifold: &'a str,
    #[serde(flatten)]
    report: crate::checks::CheckReport,
}

fn cmd_run(a: &RunArgs) -> Result<bool> {
    let mut cfg = match a.optimizer.as_str() {
        "rsgd" => OptimizerConfig::rsgd(a.lr),
        "crmsprop" => OptimizerConfig::crmsprop(a.lr),
        "radam" => OptimizerConfig::radam(a.lr),
        other => return Err(Error::Config(format!("unknown optimizer '{other}'"))),
    };
    if let Some(v) = a.momentum {
        cfg.momentum = v;
    }
    if let Some(v) = a.rho {
        cfg.rho = v;
    }
    if let Some(v) = a.beta1 {
        cfg.beta1 = v;
    }
    if let Some(v) = a.beta2 {
        cfg.beta2 = v;
    }
    cfg.amsgrad = a.amsgrad;
    cfg.use_exp = !a.retraction;
    cfg.use_exact_transport = !a.approx_transport;
    let precision = match a.precision.as_str() {
        "single" => Precision::Single,
        "double" => Precision::Double,
        other => return Err(Error::Config(format!("unknown precision '{other}'"))),
    };
    let problem = build_problem(&a.problem, a.n, a.seed)?;
    let trace = run(&problem, cfg, a.steps, a.seed, precision)?;
    write_trace_csv(&trace, &a.out)?;
    let last = trace.rows.last().expect("trace has rows");
    println!(
        "{}: {} steps, loss {:.6e} -> {:.6e}{}",
        trace.problem,
        trace.rows.len() - 1,
        trace.rows[0].loss,
        last.loss,
        if trace.aborted { " (aborted)" } else { "" }
    );
    Ok(true)
}

fn cmd_check(a: &CheckArgs) -> Result<bool> {
    let kinds: Vec<&str> = if a.manifold == "all" {
        MANIFOLD_KINDS.to_vec()
    } else {
        vec![a.manifold.as_str()]
    };
    let mut all_pass = true;
    let mut reports = Vec::new();
    for kind in kinds {
        let m = default_manifold(kind)?;
        let report = run_manifold_suite(&Plain(&m), a.trials, a.seed, a.tol)?;
        for rec in &report.records {
            println!(
                "{kind}/{}: {} (trials {}, max_error {:.3e}, tol {:.1e})",
                rec.property,
                if rec.pass { "pass" } else { "FAIL" },
                rec.trials,
                rec.max_error,
                rec.tol
            );
        }
        all_pass &= report.pass;
        reports.push((kind.to_string(), report));
    }
    if let Some(path) = &a.json {
        let payload: Vec<KindReport> = reports
            .iter()
            .map(|(k, r)| KindReport {
                manifold: k,
                report: r.clone(),
            })
            .collect();
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        serde_json::to_writer_pretty(&mut w, &payload)
            .map_err(|e| Error::Config(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    Ok(all_pass)
}

/// CLI entry point; returns the process exit code (0 success/pass, 1 check
/// failure, 2 usage error).
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // clap help/version are "successful" exits
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Check(a) => cmd_check(a),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Error::Config(msg)) | Err(Error::UnknownProblem(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

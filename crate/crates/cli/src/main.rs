mod config;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use fichera::analysis::{
    default_window, estimate_from_pair, fit_exponential, gap_report, log_difference_csv,
    lower_upper_sandwich, pairs_csv, SweepReport, WINDOW_2D, WINDOW_3D,
};
use fichera::cache::SolveCache;
use fichera::certificate::{
    certify, direct_rayleigh, radial_control_energy, radial_testfn_energy,
    solve_helmholtz_extension, tail_length, CertificateDisc, EdgeTrace,
};
use fichera::eigen::EigenConfig;
use fichera::fem::eval::FeFunction;
use fichera::geometry::{GradingSpec, GuideKind, LayerKind, Truncation};
use fichera::guides::curve::log_spaced;
use fichera::guides::{closed_form_lambda, GuideDisc, LambdaCurve, LayerDisc, PairResult, Problem};
use fichera::reproduce::{
    cached_curve, cached_pair, criterion_id, run, Context, MasterReport, Profile, Settings,
};
use fichera::sturm::{
    bargmann_bound, find_lstar, mu_csv, mu_curve, sign_changes, solve_sturm, SturmProblem,
};
use fichera::Error;

use config::{RunConfig, Usage, UsageError};

const PI2: f64 = PI * PI;

#[derive(Parser)]
#[command(
    name = "fichera",
    version,
    about = "Spectra of broken guides, Fichera layers and their reductions"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// key=value configuration file; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<String>,
    /// Solve cache directory
    #[arg(long, global = true)]
    cache: Option<String>,
    /// Worker threads for independent solves
    #[arg(long, global = true)]
    workers: Option<String>,
    /// Seed of the eigensolver start block
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Eigensolver residual tolerance
    #[arg(long, global = true)]
    tol: Option<String>,
}

impl Common {
    fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("out", self.out.clone()),
            ("cache", self.cache.clone()),
            ("workers", self.workers.clone()),
            ("seed", self.seed.clone()),
            ("tol", self.tol.clone()),
        ]
    }
}

#[derive(Subcommand)]
enum Command {
    /// Dirichlet/Mixed eigenvalue pairs of a 2D guide over a range of arm lengths
    GuideSweep {
        /// broken, rounded or scaled
        #[arg(long)]
        geometry: Option<String>,
        /// Arm lengths: a:b, a:b:h or a list
        #[arg(long = "R")]
        r: Option<String>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        layers: Option<String>,
        #[arg(long)]
        ratio: Option<String>,
        /// Cells per unit length away from the corner
        #[arg(long)]
        base: Option<String>,
        /// Eigenvalues per truncation
        #[arg(long)]
        count: Option<String>,
    },
    /// Guide eigenvalue as a function of the height x3
    LambdaCurve {
        /// Heights: a:b (log-spaced), a:b:h or a list; x3 <= 0 uses the closed form
        #[arg(long)]
        x3: Option<String>,
        /// Number of log-spaced samples for a:b
        #[arg(long)]
        samples: Option<String>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        base: Option<String>,
        /// Threshold (units of pi^2) recorded with the curve
        #[arg(long)]
        lambda_inf: Option<String>,
    },
    /// One-dimensional reduction: mu(L), L*, finite-interval family
    Sturm {
        /// Curve JSON written by lambda-curve
        #[arg(long)]
        curve: Option<String>,
        /// Build the curve when no file is given
        #[arg(long)]
        build_curve: Option<String>,
        /// Left endpoints for the mu table
        #[arg(long = "L")]
        l: Option<String>,
        #[arg(long)]
        r_trunc: Option<String>,
        #[arg(long)]
        degree: Option<String>,
        /// Right endpoints of the Dirichlet finite-interval family
        #[arg(long)]
        family: Option<String>,
        /// Decay rate for the Bargmann bound; defaults to the curve's threshold
        #[arg(long)]
        omega: Option<String>,
    },
    /// Truncated 3D layers
    Layer3d {
        /// fichera or scaled
        #[arg(long)]
        geometry: Option<String>,
        /// Grid subdivision level
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long = "R")]
        r: Option<String>,
        #[arg(long)]
        count: Option<String>,
        /// Essential spectrum threshold (units of pi^2)
        #[arg(long)]
        lambda_ess: Option<String>,
        /// Lower bound from the reduction (units of pi^2)
        #[arg(long)]
        mu_star: Option<String>,
        /// Arm length of the eigenvector slice on the plane x1 = x2
        #[arg(long = "slice-R")]
        slice_r: Option<String>,
        /// Slice samples per direction
        #[arg(long)]
        slice_n: Option<String>,
        #[arg(long)]
        dof_limit: Option<String>,
    },
    /// Trial function with Rayleigh quotient below pi^2 for the rounded guide
    Certify {
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        n_arc: Option<String>,
        /// mode1 or zero
        #[arg(long)]
        trace: Option<String>,
    },
    /// Every acceptance criterion with a JSON and Markdown report
    Reproduce {
        #[arg(long)]
        quick: bool,
        /// Criterion keys or numbers, comma-separated
        #[arg(long)]
        criterion: Option<String>,
    },
}

enum Failure {
    Usage(String),
    Solver(Error),
    /// Exit code chosen by the command.
    Exit(u8, String),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Solver(e)
    }
}

type Outcome = std::result::Result<u8, Failure>;

/// Resolved configuration with output helpers.
struct Run {
    cfg: RunConfig,
    hash: String,
    eig: EigenConfig,
    cache: SolveCache,
    out: PathBuf,
}

impl Run {
    fn new(cfg: RunConfig) -> std::result::Result<Self, Failure> {
        let defaults = EigenConfig::default();
        let eig = EigenConfig {
            seed: cfg.get("seed", defaults.seed)?,
            tol: cfg.get("tol", defaults.tol)?,
            ..defaults
        };
        if !(eig.tol > 0.0) {
            return Err(UsageError("tol must be positive".into()).into());
        }
        let workers: usize = cfg.get(
            "workers",
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
        )?;
        if workers == 0 {
            return Err(UsageError("workers must be at least 1".into()).into());
        }
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global();
        let cache = match cfg.raw("cache") {
            Some(dir) => SolveCache::at(dir)?,
            None => SolveCache::disabled(),
        };
        let out = PathBuf::from(cfg.string("out", "out"));
        std::fs::create_dir_all(&out).map_err(Error::from)?;
        Ok(Self {
            hash: cfg.hash(),
            cfg,
            eig,
            cache,
            out,
        })
    }

    fn header(&self) -> String {
        format!("# config_hash={} seed={}\n", self.hash, self.eig.seed)
    }

    fn write(&self, name: &str, body: &str) -> std::result::Result<PathBuf, Failure> {
        let path = self.out.join(name);
        std::fs::write(&path, body).map_err(Error::from)?;
        println!("wrote {}", path.display());
        Ok(path)
    }

    fn csv(&self, name: &str, body: &str) -> std::result::Result<PathBuf, Failure> {
        self.write(name, &format!("{}{body}", self.header()))
    }

    fn json<T: Serialize>(&self, name: &str, data: &T) -> std::result::Result<PathBuf, Failure> {
        let doc = json!({
            "config": self.cfg,
            "config_hash": self.hash,
            "seed": self.eig.seed,
            "data": data,
        });
        let text = serde_json::to_string_pretty(&doc).map_err(Error::from)?;
        self.write(name, &(text + "\n"))
    }

    fn error_record(&self, err: &Error) {
        let doc = json!({
            "command": self.cfg.command,
            "config_hash": self.hash,
            "seed": self.eig.seed,
            "error": err.to_string(),
        });
        let path = self.out.join(format!("{}-error.json", self.cfg.command));
        let _ = std::fs::write(path, serde_json::to_string_pretty(&doc).unwrap_or_default());
    }
}

fn grading(cfg: &RunConfig) -> Usage<GradingSpec> {
    let g = GradingSpec::new(cfg.get("layers", 4)?, cfg.get("ratio", 0.1)?);
    g.validate().map_err(|e| UsageError(e.to_string()))?;
    Ok(g)
}

fn guide_sweep(run: &Run) -> Outcome {
    let cfg = &run.cfg;
    let geometry = cfg.string("geometry", "broken");
    let kind = GuideKind::parse(&geometry).map_err(|e| UsageError(e.to_string()))?;
    let default_r = if kind == GuideKind::Broken {
        "1:10"
    } else {
        "2:12"
    };
    let rs = cfg.ladder("R", default_r)?;
    if rs.iter().any(|&r| !(r > 0.0)) {
        return Err(UsageError("arm lengths must be positive".into()).into());
    }
    let disc = GuideDisc::new(cfg.get("p", 8)?, grading(cfg)?, cfg.get("base", 1)?);
    let count: usize = cfg.get("count", 1)?;
    let problem = Problem::Guide { kind, disc };
    let pairs: Vec<PairResult> = rs
        .par_iter()
        .map(|&r| cached_pair(&run.cache, &problem, r, count, &run.eig))
        .collect::<fichera::Result<_>>()?;
    let fit = fit_exponential(&triples(&pairs), default_window(&rs, WINDOW_2D)).ok();
    let report = SweepReport {
        geometry: geometry.clone(),
        discretization: vec![disc.id()],
        lambda_inf: estimate_from_pair(pairs.last().unwrap()),
        pairs: pairs.clone(),
        fit,
        gap_report: None,
        sandwich: None,
        config_hash: run.hash.clone(),
        seed: run.eig.seed,
    };
    run.csv(&format!("guide-{geometry}-pairs.csv"), &pairs_csv(&pairs))?;
    run.csv(
        &format!("guide-{geometry}-logdiff.csv"),
        &log_difference_csv(&pairs),
    )?;
    run.json(&format!("guide-{geometry}-sweep.json"), &report)?;
    println!(
        "lambda_inf/pi2 = {:.8} +- {:.1e}",
        report.lambda_inf.over_pi2,
        report.lambda_inf.half_gap / PI2
    );
    if let Some(f) = &report.fit {
        println!(
            "slope over [{}, {}] = {:.6}",
            f.window.0, f.window.1, f.slope
        );
    }
    Ok(0)
}

fn triples(pairs: &[PairResult]) -> Vec<(f64, f64, f64)> {
    pairs.iter().map(|p| (p.r, p.dir[0], p.mix[0])).collect()
}

fn curve_disc(cfg: &RunConfig) -> Usage<GuideDisc> {
    Ok(GuideDisc::new(
        cfg.get("p", 8)?,
        GradingSpec::new(4, 0.1),
        cfg.get("base", 4)?,
    ))
}

fn lambda_curve(run: &Run) -> Outcome {
    let cfg = &run.cfg;
    let spec = cfg.string("x3", "0.001:10");
    let parts: Vec<&str> = spec.split(':').collect();
    let x3 = if parts.len() == 2 {
        let lo: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| UsageError(format!("invalid range '{spec}'")))?;
        let hi: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| UsageError(format!("invalid range '{spec}'")))?;
        if !(lo > 0.0 && hi > lo) {
            return Err(UsageError("log-spaced heights need 0 < a < b".into()).into());
        }
        log_spaced(lo, hi, cfg.get("samples", 60)?)
    } else {
        cfg.ladder("x3", "")?
    };
    if x3.iter().any(|&v| v <= -1.0) {
        return Err(UsageError("heights must exceed -1".into()).into());
    }
    let mut positive: Vec<f64> = x3.iter().cloned().filter(|&v| v > 0.0).collect();
    positive.sort_by(|a, b| a.partial_cmp(b).unwrap());
    positive.dedup();
    let curve = if positive.is_empty() {
        None
    } else {
        let c = cached_curve(&run.cache, curve_disc(cfg)?, &positive, &run.eig)?;
        Some(match cfg.opt::<f64>("lambda_inf")? {
            Some(l) => c.with_threshold(l * PI2),
            None => c,
        })
    };
    let mut body = String::from("x3,lambda,lambda_over_pi2,branch\n");
    for &h in &x3 {
        let (v, branch) = if h <= 0.0 {
            (closed_form_lambda(h)?, "closed-form")
        } else {
            (curve.as_ref().unwrap().eval(h)?, "sampled")
        };
        body.push_str(&format!("{h:.17e},{v:.17e},{:.17e},{branch}\n", v / PI2));
        if x3.len() == 1 {
            println!("lambda({h})/pi2 = {:.10}", v / PI2);
        }
    }
    run.csv("lambda-curve.csv", &body)?;
    if let Some(c) = &curve {
        run.json("lambda-curve.json", c)?;
    }
    Ok(0)
}

fn load_curve(run: &Run) -> std::result::Result<LambdaCurve, Failure> {
    let cfg = &run.cfg;
    if let Some(path) = cfg.raw("curve") {
        let text = std::fs::read_to_string(path);
        match text {
            Ok(t) => {
                let doc: serde_json::Value = serde_json::from_str(&t).map_err(Error::from)?;
                let data = doc.get("data").cloned().unwrap_or(doc);
                return Ok(serde_json::from_value(data).map_err(Error::from)?);
            }
            Err(_) if !cfg.flag("build_curve")? => {
                return Err(Failure::Exit(
                    2,
                    format!("curve file {path} not found and build_curve is off"),
                ));
            }
            Err(_) => {}
        }
    } else if !cfg.get("build_curve", true)? {
        return Err(Failure::Exit(
            2,
            "no curve file given and build_curve is off".into(),
        ));
    }
    let x3 = log_spaced(1e-3, 10.0, 60);
    let disc = GuideDisc::new(cfg.get("p", 8)?, GradingSpec::new(4, 0.1), 4);
    Ok(cached_curve(&run.cache, disc, &x3, &run.eig)?)
}

fn sturm(run: &Run) -> Outcome {
    let cfg = &run.cfg;
    let curve = load_curve(run)?;
    let mut template = SturmProblem::new(0.0, &curve);
    template.r_trunc = cfg.get("r_trunc", template.r_trunc)?;
    template.degree = cfg.get("degree", template.degree)?;
    let ls = match cfg.raw("L") {
        Some(_) => cfg.ladder("L", "")?,
        None => (1..=100).map(|i| -1.0 + i as f64 / 101.0).collect(),
    };
    if ls.iter().any(|&l| l <= -1.0 || l >= template.r_trunc) {
        return Err(UsageError("left endpoints must lie in (-1, r_trunc)".into()).into());
    }
    let samples = mu_curve(&ls, &template)?;
    run.csv("sturm-mu.csv", &mu_csv(&samples))?;
    let lstar = find_lstar(&template, 1e-4)?;

    let family = cfg.ladder("family", "2,4,6,8,10,40")?;
    let grid: Vec<f64> = ls.iter().cloned().filter(|&l| l <= 0.0).collect();
    let mut body = String::from("R,L,mu,mu_over_pi2\n");
    let mut minima = Vec::new();
    for &r in &family {
        let mut t = template.at(0.0);
        t.r_trunc = r;
        t.far_bc = fichera::geometry::BcKind::Dirichlet;
        for &l in grid.iter().filter(|&&l| l < r) {
            let mu = solve_sturm(&t.at(l))?.mu;
            body.push_str(&format!("{r},{l:.17e},{mu:.17e},{:.17e}\n", mu / PI2));
        }
        minima.push(find_lstar(&t, 1e-4)?);
    }
    run.csv("sturm-family.csv", &body)?;

    let omega = match cfg.opt::<f64>("omega")? {
        Some(w) => Some(w),
        None => curve.omega,
    };
    let bargmann = match omega {
        Some(w) => Some(bargmann_bound(w, lstar.l_star, lstar.l_star)?),
        None => None,
    };
    let family_json: Vec<_> = family
        .iter()
        .zip(&minima)
        .map(|(r, m)| json!({"R": r, "L_min": m.l_star, "mu_min": m.mu_star, "mu_min_over_pi2": m.mu_star_over_pi2}))
        .collect();
    run.json(
        "sturm-lstar.json",
        &json!({
            "lstar": lstar,
            "sign_changes": sign_changes(&samples),
            "family": family_json,
            "omega": omega,
            "bargmann_bound": bargmann,
            "degree": template.degree,
            "r_trunc": template.r_trunc,
        }),
    )?;
    println!(
        "L* = {:.6}, mu*/pi2 = {:.8}",
        lstar.l_star, lstar.mu_star_over_pi2
    );
    Ok(0)
}

fn layer3d(run: &Run) -> Outcome {
    let cfg = &run.cfg;
    let geometry = cfg.string("geometry", "fichera");
    let kind = LayerKind::parse(&geometry).map_err(|e| UsageError(e.to_string()))?;
    let default_r = if kind == LayerKind::Fichera {
        "2:10"
    } else {
        "0.5:8"
    };
    let rs = cfg.ladder("R", default_r)?;
    let mut disc = LayerDisc::new(cfg.get("grid", 1)?, cfg.get("p", 4)?);
    disc.dof_limit = cfg.get("dof_limit", disc.dof_limit)?;
    let count: usize = cfg.get("count", 3)?;
    let problem = Problem::Layer { kind, disc };
    let pairs: Vec<PairResult> = rs
        .par_iter()
        .map(|&r| cached_pair(&run.cache, &problem, r, count, &run.eig))
        .collect::<fichera::Result<_>>()?;
    let (ess_default, mu_default) = match kind {
        LayerKind::Fichera => (0.9291205, Some(0.838653)),
        LayerKind::ScaledFichera => (0.6596, None),
    };
    let lambda_ess = cfg.get("lambda_ess", ess_default)? * PI2;
    let mu_star = cfg.opt::<f64>("mu_star")?.or(mu_default).map(|m| m * PI2);
    let last = pairs.last().unwrap();
    let lambda_1 = last.mean();
    let fit = fit_exponential(&triples(&pairs), default_window(&rs, WINDOW_3D)).ok();
    let gap = gap_report(
        lambda_ess,
        lambda_1,
        (last.mix[0], last.dir[0]),
        fit.as_ref().map(|f| -f.slope),
    );
    let report = SweepReport {
        geometry: format!("{geometry}-layer"),
        discretization: vec![disc.id()],
        lambda_inf: estimate_from_pair(last),
        pairs: pairs.clone(),
        fit,
        gap_report: Some(gap),
        sandwich: mu_star.map(|m| lower_upper_sandwich(m, lambda_ess, lambda_1)),
        config_hash: run.hash.clone(),
        seed: run.eig.seed,
    };
    run.csv(&format!("layer-{geometry}-pairs.csv"), &pairs_csv(&pairs))?;
    run.csv(
        &format!("layer-{geometry}-logdiff.csv"),
        &log_difference_csv(&pairs),
    )?;
    run.json(&format!("layer-{geometry}-sweep.json"), &report)?;
    println!(
        "lambda1/pi2 at R={} = {:.8}, gap = {:.5}",
        last.r,
        lambda_1 / PI2,
        report.gap_report.as_ref().unwrap().gap
    );
    if let Some(r) = cfg.opt::<f64>("slice_R")? {
        slice(run, &problem, r, count)?;
    }
    Ok(0)
}

/// Eigenvectors of the Mixed truncation on the plane `x1 = x2`.
fn slice(run: &Run, problem: &Problem, r: f64, count: usize) -> std::result::Result<(), Failure> {
    let n: usize = run.cfg.get("slice_n", 81)?;
    if n < 2 {
        return Err(UsageError("slice_n must be at least 2".into()).into());
    }
    let solved = problem.solve(r, Truncation::Mix, &EigenConfig { count, ..run.eig })?;
    let vectors: Vec<Vec<f64>> = (0..solved.result.values.len())
        .map(|i| solved.vector(i))
        .collect();
    let fes: Vec<FeFunction> = vectors
        .iter()
        .map(|v| FeFunction::new(&solved.mesh, &solved.space, v))
        .collect::<fichera::Result<_>>()?;
    let lo = solved
        .mesh
        .nodes
        .iter()
        .map(|x| x[0])
        .fold(f64::INFINITY, f64::min);
    let hi = solved
        .mesh
        .nodes
        .iter()
        .map(|x| x[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let mut body = String::from("x1,x3");
    for i in 1..=fes.len() {
        body.push_str(&format!(",v{i}"));
    }
    body.push('\n');
    for i in 0..n {
        let s = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let z = lo + (hi - lo) * j as f64 / (n - 1) as f64;
            let values: Option<Vec<f64>> = fes
                .iter()
                .map(|fe| fe.at([s, s, z]).ok().map(|p| p.value))
                .collect();
            if let Some(values) = values {
                body.push_str(&format!("{s:.12e},{z:.12e}"));
                for v in values {
                    body.push_str(&format!(",{v:.12e}"));
                }
                body.push('\n');
            }
        }
    }
    run.csv(&format!("layer-slice-R{r}.csv"), &body)?;
    Ok(())
}

fn certify_cmd(run: &Run) -> Outcome {
    let cfg = &run.cfg;
    let defaults = CertificateDisc::default();
    let disc = CertificateDisc {
        degree: cfg.get("p", defaults.degree)?,
        n_arc: cfg.get("n_arc", defaults.n_arc)?,
    };
    let trace = match cfg.string("trace", "mode1").as_str() {
        "mode1" => EdgeTrace::Mode(1),
        "zero" => EdgeTrace::Zero,
        other => return Err(UsageError(format!("unknown trace '{other}'")).into()),
    };
    let ext = solve_helmholtz_extension(disc, trace)?;
    let cert = certify(&ext);
    let direct = if cert.mu_shift > 0.0 {
        Some(direct_rayleigh(
            &ext,
            cert.mu_shift,
            tail_length(cert.mu_shift, 12.0),
        )?)
    } else {
        None
    };
    run.json(
        "certificate.json",
        &json!({
            "certificate": cert,
            "direct": direct,
            "radial_energy_test_function": radial_testfn_energy(),
            "radial_energy_control": radial_control_energy(),
        }),
    )?;
    println!(
        "J(psi0) = {:.10}, |psi0|^2 = {:.10}, rayleigh/pi2 = {:.10}, verdict = {}",
        cert.j_psi0, cert.norm_psi0_sq, cert.rayleigh_over_pi2, cert.verdict
    );
    if cert.verdict {
        Ok(0)
    } else {
        Err(Failure::Exit(
            3,
            format!(
                "certificate rejected: J(psi0) = {}, rayleigh = {}",
                cert.j_psi0, cert.rayleigh
            ),
        ))
    }
}

fn reproduce(run: &Run, quick: bool) -> Outcome {
    let profile = if quick { Profile::Quick } else { Profile::Full };
    let mut settings = Settings::new(profile);
    settings.eig = run.eig;
    let ids = match run.cfg.raw("criterion") {
        None => Vec::new(),
        Some(list) => list
            .split(',')
            .map(|k| criterion_id(k).ok_or_else(|| UsageError(format!("unknown criterion '{k}'"))))
            .collect::<Usage<Vec<_>>>()?,
    };
    let ctx = Context::new(settings, run.cache.clone());
    let outcomes = run_verbose(&ctx, &ids);
    let report = MasterReport::new(settings, run.hash.clone(), outcomes);
    run.json("reproduce-report.json", &report)?;
    run.write("reproduce-report.md", &report.to_markdown())?;
    println!(
        "{} of {} criteria failed",
        report.failures,
        report.outcomes.len()
    );
    Ok(report.failures.min(255) as u8)
}

fn run_verbose(ctx: &Context, ids: &[usize]) -> Vec<fichera::reproduce::Outcome> {
    let all: Vec<usize> = fichera::reproduce::CRITERIA.iter().map(|c| c.0).collect();
    let ids = if ids.is_empty() { &all[..] } else { ids };
    ids.iter()
        .flat_map(|&id| {
            let o = run(ctx, &[id]);
            for x in &o {
                println!("{}", x.line());
            }
            o
        })
        .collect()
}

fn dispatch(command: Command, common: &Common) -> (Option<Run>, Outcome) {
    let file = common.config.as_deref();
    let mut flags = common.flags();
    let (name, allowed): (&str, &[&str]) = match &command {
        Command::GuideSweep {
            geometry,
            r,
            p,
            layers,
            ratio,
            base,
            count,
        } => {
            flags.extend([
                ("geometry", geometry.clone()),
                ("R", r.clone()),
                ("p", p.clone()),
                ("layers", layers.clone()),
                ("ratio", ratio.clone()),
                ("base", base.clone()),
                ("count", count.clone()),
            ]);
            (
                "guide-sweep",
                &["geometry", "R", "p", "layers", "ratio", "base", "count"],
            )
        }
        Command::LambdaCurve {
            x3,
            samples,
            p,
            base,
            lambda_inf,
        } => {
            flags.extend([
                ("x3", x3.clone()),
                ("samples", samples.clone()),
                ("p", p.clone()),
                ("base", base.clone()),
                ("lambda_inf", lambda_inf.clone()),
            ]);
            (
                "lambda-curve",
                &["x3", "samples", "p", "base", "lambda_inf"],
            )
        }
        Command::Sturm {
            curve,
            build_curve,
            l,
            r_trunc,
            degree,
            family,
            omega,
        } => {
            flags.extend([
                ("curve", curve.clone()),
                ("build_curve", build_curve.clone()),
                ("L", l.clone()),
                ("r_trunc", r_trunc.clone()),
                ("degree", degree.clone()),
                ("family", family.clone()),
                ("omega", omega.clone()),
            ]);
            (
                "sturm",
                &[
                    "curve",
                    "build_curve",
                    "L",
                    "r_trunc",
                    "degree",
                    "family",
                    "omega",
                    "p",
                ],
            )
        }
        Command::Layer3d {
            geometry,
            grid,
            p,
            r,
            count,
            lambda_ess,
            mu_star,
            slice_r,
            slice_n,
            dof_limit,
        } => {
            flags.extend([
                ("geometry", geometry.clone()),
                ("grid", grid.clone()),
                ("p", p.clone()),
                ("R", r.clone()),
                ("count", count.clone()),
                ("lambda_ess", lambda_ess.clone()),
                ("mu_star", mu_star.clone()),
                ("slice_R", slice_r.clone()),
                ("slice_n", slice_n.clone()),
                ("dof_limit", dof_limit.clone()),
            ]);
            (
                "layer3d",
                &[
                    "geometry",
                    "grid",
                    "p",
                    "R",
                    "count",
                    "lambda_ess",
                    "mu_star",
                    "slice_R",
                    "slice_n",
                    "dof_limit",
                ],
            )
        }
        Command::Certify { p, n_arc, trace } => {
            flags.extend([
                ("p", p.clone()),
                ("n_arc", n_arc.clone()),
                ("trace", trace.clone()),
            ]);
            ("certify", &["p", "n_arc", "trace"])
        }
        Command::Reproduce { quick, criterion } => {
            flags.extend([
                ("quick", quick.then(|| "true".to_string())),
                ("criterion", criterion.clone()),
            ]);
            ("reproduce", &["quick", "criterion"])
        }
    };
    let run = match RunConfig::build(name, file, flags, allowed)
        .map_err(Failure::from)
        .and_then(Run::new)
    {
        Ok(r) => r,
        Err(e) => return (None, Err(e)),
    };
    let outcome = match command {
        Command::GuideSweep { .. } => guide_sweep(&run),
        Command::LambdaCurve { .. } => lambda_curve(&run),
        Command::Sturm { .. } => sturm(&run),
        Command::Layer3d { .. } => layer3d(&run),
        Command::Certify { .. } => certify_cmd(&run),
        Command::Reproduce { .. } => match run.cfg.flag("quick") {
            Ok(q) => reproduce(&run, q),
            Err(e) => Err(e.into()),
        },
    };
    (Some(run), outcome)
}

fn main() -> ExitCode {
    let args = match Cli::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    faer::set_global_parallelism(faer::Par::Seq);
    let (run, outcome) = dispatch(args.command, &args.common);
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("solver failure: {e}");
            if let Some(run) = &run {
                run.error_record(&e);
            }
            ExitCode::from(2)
        }
        Err(Failure::Exit(code, msg)) => {
            eprintln!("{msg}");
            ExitCode::from(code)
        }
    }
}

//! `symseek solve | verify | corpus`.

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use symseek_core::algsolve::{SolveBudget, SolveMode};
use symseek_core::odemodel::{parse_ode, parse_ode_with_params, Ode2};
use symseek_core::strategies::{
    run_plan, SearchConfig, SearchError, StrategyKind, StrategyPlan, StrategySpec,
};
use symseek_core::verify::{
    sigma_residual, verify_first_integral, verify_nu, verify_sigma, DarbouxFunction, SymmetryRepr,
};

use crate::clock::WallClock;
use crate::corpus::{load_checked, parse_nonzero, read_corpus, CorpusError};
use crate::report::{run_corpus, RunOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_NOT_FOUND: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "symseek", version, about = "Rational symmetries of y'' = M/N")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Search for sigma = p/q.
    Solve(SolveArgs),
    /// Check a sigma, a nu or a first integral.
    Verify {
        #[command(subcommand)]
        what: VerifyCmd,
    },
    /// Run the automatic search over a corpus file.
    Corpus(CorpusArgs),
}

#[derive(clap::Args, Debug)]
pub struct SolveArgs {
    /// The ODE, as `y'' = expr` or just `expr`.
    pub ode: Option<String>,
    /// Read the ODE from a file instead.
    #[arg(long, conflicts_with = "ode")]
    pub file: Option<String>,
    #[arg(long, default_value_t = 7)]
    pub max_degree: u32,
    #[arg(long, default_value_t = 1)]
    pub min_degree: u32,
    /// auto, base, q-div-n, q-u-n:x|y|z, n-of-x, seed-monomials, common-factor, poly-nu
    #[arg(long, default_value = "auto")]
    pub strategy: String,
    /// Seconds.
    #[arg(long, env = "SYMSEEK_TIMEOUT", default_value_t = 60.0)]
    pub timeout: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Parameter names, in order.
    #[arg(long, value_delimiter = ',')]
    pub params: Vec<String>,
    /// Polynomials in the parameters assumed nonzero; implies --parametric.
    #[arg(long, value_delimiter = ',')]
    pub nonzero: Vec<String>,
    /// Solve for parameter relations instead of treating parameters as generic.
    #[arg(long)]
    pub parametric: bool,
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    /// sigma against the determining equation.
    Sigma {
        ode: String,
        #[arg(allow_hyphen_values = true)]
        sigma: String,
        #[arg(long, value_delimiter = ',')]
        params: Vec<String>,
    },
    /// nu (Darboux form) against sigma.
    Nu {
        ode: String,
        #[arg(allow_hyphen_values = true)]
        nu: String,
        #[arg(allow_hyphen_values = true)]
        sigma: String,
        #[arg(long, value_delimiter = ',')]
        params: Vec<String>,
    },
    /// A first integral in Darboux form.
    Fi {
        ode: String,
        #[arg(allow_hyphen_values = true)]
        integral: String,
        #[arg(long, value_delimiter = ',')]
        params: Vec<String>,
    },
}

#[derive(clap::Args, Debug)]
pub struct CorpusArgs {
    /// A JSON file, or one of kamke, nonlocal, examples, oscillators.
    pub corpus: String,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Only entries whose id matches this glob.
    #[arg(long)]
    pub filter: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long, env = "SYMSEEK_TIMEOUT", default_value_t = 60.0)]
    pub timeout: f64,
    #[arg(long, default_value_t = 7)]
    pub max_degree: u32,
}

/// One solution branch as reported by `solve`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchReport {
    pub sigma: String,
    pub relations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    pub ode: String,
    pub status: String,
    pub sigma: Option<String>,
    pub symmetry: Option<String>,
    pub strategy: Option<String>,
    pub degree: Option<u32>,
    pub elapsed_ms: u64,
    pub branches: Vec<BranchReport>,
    /// Relations (each `= 0`) of branches that need algebraic numbers.
    pub unresolved: Vec<Vec<String>>,
    pub timings: Vec<(String, u64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

pub fn load_ode(src: &str, params: &[String]) -> Result<Ode2, String> {
    let r = if params.is_empty() {
        parse_ode(src)
    } else {
        parse_ode_with_params(src, params)
    };
    r.map_err(|e| e.to_string())
}

fn plan_for(args: &SolveArgs, ode: &Ode2, parametric: bool) -> Result<StrategyPlan, String> {
    let spec = |kind| StrategySpec {
        kind,
        min_degree: args.min_degree.max(1),
        max_degree: args.max_degree.max(args.min_degree.max(1)),
    };
    if args.strategy == "auto" {
        let mut plan = if parametric {
            StrategyPlan::parametric(ode, args.max_degree)
        } else {
            StrategyPlan::auto(ode, args.max_degree)
        };
        for s in plan.specs.iter_mut() {
            *s = spec(s.kind);
        }
        return Ok(plan);
    }
    let kind = StrategyKind::parse(&args.strategy)
        .ok_or_else(|| format!("unknown strategy `{}`", args.strategy))?;
    Ok(StrategyPlan {
        specs: vec![spec(kind)],
    })
}

/// Runs `solve`; returns the report and the exit code.
pub fn solve(args: &SolveArgs) -> (SolveReport, i32) {
    let mut report = SolveReport {
        ode: String::new(),
        status: "error".into(),
        sigma: None,
        symmetry: None,
        strategy: None,
        degree: None,
        elapsed_ms: 0,
        branches: Vec::new(),
        unresolved: Vec::new(),
        timings: Vec::new(),
        message: None,
    };
    let src = match (&args.ode, &args.file) {
        (Some(s), _) => s.clone(),
        (None, Some(f)) => match std::fs::read_to_string(f) {
            Ok(s) => s.trim().to_string(),
            Err(e) => {
                report.message = Some(e.to_string());
                return (report, EXIT_INPUT);
            }
        },
        (None, None) => {
            report.message = Some("no ODE given".into());
            return (report, EXIT_INPUT);
        }
    };
    let ode = match load_ode(&src, &args.params) {
        Ok(o) => o,
        Err(e) => {
            report.message = Some(e);
            return (report, EXIT_INPUT);
        }
    };
    report.ode = ode.render();
    let nonzero = match parse_nonzero(&args.nonzero, &ode) {
        Ok(n) => n,
        Err(e) => {
            report.message = Some(e);
            return (report, EXIT_INPUT);
        }
    };
    let parametric = (args.parametric || !args.nonzero.is_empty()) && !ode.params().is_empty();
    let plan = match plan_for(args, &ode, parametric) {
        Ok(p) => p,
        Err(e) => {
            report.message = Some(e);
            return (report, EXIT_INPUT);
        }
    };
    let clock = WallClock::new();
    let mut cfg = SearchConfig::new(&clock);
    cfg.n_max = args.max_degree;
    cfg.budget = SolveBudget {
        timeout_ms: (args.timeout.max(0.0) * 1000.0) as u64,
        ..SolveBudget::default()
    };
    cfg.mode = if parametric {
        SolveMode::Parametric
    } else {
        SolveMode::Generic
    };
    cfg.nonzero = nonzero;
    cfg.all_branches = parametric;
    let params = ode.param_vars();
    let render_unresolved = |u: &[symseek_core::algsolve::Unresolved]| -> Vec<Vec<String>> {
        u.iter()
            .map(|u| {
                u.relations
                    .iter()
                    .map(|r| ode.render_expr(&symseek_core::arith::RatFun::from_poly(r.clone())))
                    .collect()
            })
            .collect()
    };
    match run_plan(&ode, &plan, &cfg) {
        Ok(r) => {
            report.status = "found".into();
            report.sigma = Some(ode.render_expr(&r.sigma));
            report.symmetry = Some(SymmetryRepr::new(r.sigma.clone()).render(ode.params()));
            report.strategy = Some(r.strategy.kind.name());
            report.degree = Some(r.degree);
            report.elapsed_ms = r.elapsed_ms;
            report.timings = r.timings.clone();
            report.branches = r
                .branches
                .iter()
                .map(|b| BranchReport {
                    sigma: ode.render_expr(&b.sigma),
                    relations: b
                        .relations(&params)
                        .iter()
                        .map(|p| ode.render_expr(&symseek_core::arith::RatFun::from_poly(p.clone())))
                        .collect(),
                })
                .collect();
            report.unresolved = render_unresolved(&r.unresolved);
            (report, EXIT_OK)
        }
        Err(e) => {
            report.elapsed_ms = clock_ms(&clock);
            report.message = Some(e.to_string());
            match e {
                SearchError::NotFound { unresolved, .. } => {
                    report.status = "not-found".into();
                    report.unresolved = render_unresolved(&unresolved);
                    (report, EXIT_NOT_FOUND)
                }
                SearchError::BudgetExhausted { unresolved, .. } => {
                    report.status = "budget-exhausted".into();
                    report.unresolved = render_unresolved(&unresolved);
                    (report, EXIT_BUDGET)
                }
                SearchError::Inapplicable(_) => {
                    report.status = "inapplicable".into();
                    (report, EXIT_NOT_FOUND)
                }
            }
        }
    }
}

fn clock_ms(c: &WallClock) -> u64 {
    use symseek_core::algsolve::Clock;
    c.now_ms()
}

pub fn render_solve_text(r: &SolveReport) -> String {
    let mut s = String::new();
    if !r.ode.is_empty() {
        s.push_str(&format!("ode: {}\n", r.ode));
    }
    match &r.sigma {
        Some(sigma) => {
            s.push_str(&format!("sigma: {}\n", sigma));
            if let Some(sym) = &r.symmetry {
                s.push_str(&format!("symmetry: {}\n", sym));
            }
            s.push_str(&format!(
                "strategy: {} (degree {})\n",
                r.strategy.as_deref().unwrap_or("-"),
                r.degree.unwrap_or(0)
            ));
            if r.branches.len() > 1 || r.branches.iter().any(|b| !b.relations.is_empty()) {
                s.push_str(&format!("branches: {}\n", r.branches.len()));
                for (k, b) in r.branches.iter().enumerate() {
                    s.push_str(&format!("  [{}] sigma = {}\n", k + 1, b.sigma));
                    for rel in &b.relations {
                        s.push_str(&format!("      {} = 0\n", rel));
                    }
                }
            }
        }
        None => {
            s.push_str(&format!(
                "{}: {}\n",
                r.status,
                r.message.as_deref().unwrap_or("")
            ));
        }
    }
    for (k, u) in r.unresolved.iter().enumerate() {
        s.push_str(&format!("unresolved algebraic branch {}:\n", k + 1));
        for rel in u {
            s.push_str(&format!("      {} = 0\n", rel));
        }
    }
    s.push_str(&format!("time: {} ms\n", r.elapsed_ms));
    s
}

/// Runs `verify`; prints to `out` and returns the exit code.
pub fn verify(cmd: &VerifyCmd, out: &mut dyn Write) -> i32 {
    let res = match cmd {
        VerifyCmd::Sigma { ode, sigma, params } => load_ode(ode, params).and_then(|ode| {
            let s = ode.parse_expr(sigma).map_err(|e| e.to_string())?;
            let (ok, _) = verify_sigma(&s, &ode);
            Ok((ok, ode.render_expr(&sigma_residual(&s, &ode))))
        }),
        VerifyCmd::Nu {
            ode,
            nu,
            sigma,
            params,
        } => load_ode(ode, params).and_then(|ode| {
            let s = ode.parse_expr(sigma).map_err(|e| e.to_string())?;
            let n = DarbouxFunction::parse(nu, &ode).map_err(|e| e.to_string())?;
            let ok = verify_nu(&n, &s, &ode);
            let r = &n.logderiv(&ode) + &s;
            Ok((ok, ode.render_expr(&r)))
        }),
        VerifyCmd::Fi {
            ode,
            integral,
            params,
        } => load_ode(ode, params).and_then(|ode| {
            let i = DarbouxFunction::parse(integral, &ode).map_err(|e| e.to_string())?;
            let ok = verify_first_integral(&i, &ode);
            Ok((ok, ode.render_expr(&i.logderiv(&ode))))
        }),
    };
    match res {
        Ok((true, _)) => {
            let _ = writeln!(out, "ok");
            EXIT_OK
        }
        Ok((false, residual)) => {
            let _ = writeln!(out, "failed; residual: {}", residual);
            EXIT_INPUT
        }
        Err(e) => {
            let _ = writeln!(out, "error: {}", e);
            EXIT_INPUT
        }
    }
}

/// Runs `corpus`; prints the report and returns the exit code.
pub fn corpus(args: &CorpusArgs, out: &mut dyn Write) -> i32 {
    let loaded = read_corpus(&args.corpus).and_then(|src| load_checked(&src));
    let mut entries = match loaded {
        Ok(e) => e,
        Err(e) => {
            let _ = writeln!(out, "error: {}", e);
            return EXIT_INPUT;
        }
    };
    if let Some(f) = &args.filter {
        let pat = match glob::Pattern::new(f) {
            Ok(p) => p,
            Err(e) => {
                let _ = writeln!(out, "error: {}", CorpusError::Entry {
                    id: f.clone(),
                    msg: e.to_string(),
                });
                return EXIT_INPUT;
            }
        };
        entries.retain(|e| pat.matches(&e.id));
    }
    let opts = RunOptions {
        n_max: args.max_degree,
        timeout_ms: (args.timeout.max(0.0) * 1000.0) as u64,
    };
    let report = run_corpus(&entries, args.jobs, &opts);
    match args.format {
        Format::Text => {
            let _ = write!(out, "{}", report.render_text());
        }
        Format::Json => {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&report).unwrap());
        }
    }
    report.exit_code()
}

/// Parses arguments and dispatches; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match &cli.cmd {
        Cmd::Solve(a) => {
            let (r, code) = solve(a);
            match a.format {
                Format::Text => {
                    let _ = write!(out, "{}", render_solve_text(&r));
                }
                Format::Json => {
                    let _ = writeln!(out, "{}", serde_json::to_string_pretty(&r).unwrap());
                }
            }
            code
        }
        Cmd::Verify { what } => verify(what, &mut out),
        Cmd::Corpus(a) => corpus(a, &mut out),
    }
}

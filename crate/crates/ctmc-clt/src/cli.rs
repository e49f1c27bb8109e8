//! Batch front door: ingest a chain-spec JSON file, run analyses, and
//! emit JSON/CSV reports.
//!
//! Exit statuses: 0 all verdicts pass; 1 input error (I/O, parse,
//! schema, bad parameters); 2 at least one verdict failed; 3 numerical
//! failure inside an analysis.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::calculus::{decompose, resolvent};
use crate::chain::{ChainSpec, MarkovChain, Observable};
use crate::conditions::{
    auxbound_check, bt_identity_check, gamma_sum, kv1_profile, kv2_limit, laplace_identity,
    lemma_chain_check, mw_integral, summability, ConditionReport, LambdaSchedule, QuadConfig,
    TOL_KV1,
};
use crate::error::{Error, Result};
use crate::martingale::{l2_error, sigma_squared, variance_check};
use crate::simulate::{clt_statistics, ks_critical_5pct};

const EXIT_OK: i32 = 0;
const EXIT_INPUT: i32 = 1;
const EXIT_VERDICT: i32 = 2;
const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "ctmc-clt",
    about = "Resolvent, martingale and CLT diagnostics for finite-state CTMCs",
    after_help = "Exit status: 0 = all verdicts pass; 1 = input/parse/schema error; \
                  2 = a verdict failed; 3 = numerical failure.\n\
                  Chain-spec file: {\"Q\": [[...],...], \"f\": [...], \"pi\": [...] (optional)}"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CommonOpts {
    /// Chain-spec JSON file
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file (defaults to standard output)
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    /// Geometric ratio of the lambda schedule
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    /// Largest schedule index (lambda_k = delta^k, k = 0..k_max)
    #[arg(long, default_value_t = 40)]
    pub k_max: i32,
    /// Master RNG seed
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of Monte Carlo paths
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    /// Time horizon for simulation commands
    #[arg(long, default_value_t = 100.0)]
    pub horizon: f64,
    /// Pass tolerance for the sqrt(lambda)*||u_lambda|| tail, relative to ||f||
    #[arg(long = "tol-kv1", default_value_t = TOL_KV1)]
    pub tol_kv1: f64,
    /// Certified-tail tolerance for sums and improper integrals
    #[arg(long = "tol-tail", default_value_t = 1e-6)]
    pub tol_tail: f64,
    /// Relative tolerance for adaptive quadrature
    #[arg(long = "tol-quad", default_value_t = 1e-8)]
    pub tol_quad: f64,
    /// Output format (sweep and gamma default to csv, the rest to json)
    #[arg(long, value_parser = ["json", "csv"])]
    pub format: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate a chain-spec file against the generator invariants
    Validate(CommonOpts),
    /// Variance report plus every condition report, as one JSON document
    Analyze(CommonOpts),
    /// CSV profile of the resolvent family along the lambda schedule
    Sweep(CommonOpts),
    /// CSV table of the unimodal kernel sum against its uniform bound
    Gamma(CommonOpts),
    /// Monte Carlo: CLT marginal, martingale variance, L2 error
    Simulate(CommonOpts),
}

impl CommonOpts {
    fn quad(&self) -> QuadConfig {
        QuadConfig {
            rel_tol: self.tol_quad,
            tail_tol: self.tol_tail,
        }
    }

    fn load_chain(&self) -> Result<(MarkovChain, Observable)> {
        let path = self.input.as_ref().ok_or_else(|| {
            Error::BadParams("--input is required for this command".into())
        })?;
        let text = fs::read_to_string(path)
            .map_err(|e| Error::BadParams(format!("cannot read {}: {e}", path.display())))?;
        let spec: ChainSpec = serde_json::from_str(&text)
            .map_err(|e| Error::BadParams(format!("chain-spec parse error: {e}")))?;
        spec.realize()
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::BadParams(format!("--delta {} not in (0,1)", self.delta)));
        }
        if self.paths < 1 {
            return Err(Error::BadParams("--paths must be >= 1".into()));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::BadParams(format!("--horizon {} must be > 0", self.horizon)));
        }
        Ok(())
    }
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize)]
struct ValidateReport<'a> {
    valid: bool,
    n: usize,
    pi: Vec<f64>,
    reversible: bool,
    config: &'a CommonOpts,
}

#[derive(Serialize)]
struct AnalyzeReport<'a> {
    config: &'a CommonOpts,
    variance: crate::martingale::VarianceReport,
    conditions: Vec<ConditionReport>,
    all_pass: bool,
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    config: &'a CommonOpts,
    clt: crate::simulate::CltReport,
    ks_critical_5pct: f64,
    variance_check: crate::martingale::VarianceCheckReport,
    l2_error: crate::martingale::L2ErrorReport,
    all_pass: bool,
}

/// Run one command, returning the rendered report and whether every
/// verdict passed.
pub fn render(cmd: &Command) -> Result<(String, bool)> {
    match cmd {
        Command::Validate(opts) => {
            opts.validate()?;
            let (chain, _f) = opts.load_chain()?;
            let report = ValidateReport {
                valid: true,
                n: chain.n(),
                pi: chain.stationary().iter().copied().collect(),
                reversible: chain.is_reversible(1e-10),
                config: opts,
            };
            Ok((serde_json::to_string_pretty(&report).unwrap(), true))
        }
        Command::Analyze(opts) => {
            opts.validate()?;
            let (chain, f) = opts.load_chain()?;
            let dec = decompose(&chain)?;
            let quad = opts.quad();
            let schedule = LambdaSchedule::geometric(opts.delta, opts.k_max)?;
            let variance = sigma_squared(&chain, &dec, &f)?;

            let mut conditions = Vec::new();
            conditions.push(kv1_profile(&chain, &f, &schedule, opts.tol_kv1)?);
            let (_w, kv2) = kv2_limit(&chain, &dec, &f, &schedule, opts.tol_tail.max(1e-4))?;
            conditions.push(kv2);

            // identity spot checks across a small lambda grid
            let f_norm2 = chain.inner(&f, &f)?;
            let mut worst = 0.0f64;
            let mut profile = Vec::new();
            let grid = [1.0, opts.delta, opts.delta * opts.delta, 1e-3];
            for (i, &l1) in grid.iter().enumerate() {
                for &l2 in &grid[i..] {
                    let (lhs, rhs) = bt_identity_check(&chain, &dec, &f, l1, l2)?;
                    worst = worst.max((lhs - rhs).abs());
                    profile.push((l1 * l2, (lhs - rhs).abs()));
                }
            }
            let tol_bt = 1e-10 * f_norm2.max(1.0);
            conditions.push(ConditionReport {
                condition_name: "bt_identity".into(),
                profile,
                verdict: worst <= tol_bt,
                witness: crate::conditions::Witness {
                    label: format!("max |lhs - rhs| = {worst:.3e}"),
                    margin: tol_bt - worst,
                },
            });
            conditions.push(auxbound_check(&chain, &dec, &f, 1.0, opts.delta)?);
            let (_mw, mw_rep) = mw_integral(&chain, &f, &quad)?;
            conditions.push(mw_rep);
            let (_sum, sum_rep) = summability(&chain, &f, opts.delta, opts.tol_tail.max(1e-6))?;
            conditions.push(sum_rep);
            conditions.push(laplace_identity(&chain, &f, 1.0, &quad)?);
            conditions.push(lemma_chain_check(&chain, &f, opts.delta, &quad)?);

            let sigma_ok = variance.sigma2_resolvent >= -1e-10
                && variance.consistency_gap <= 1e-8 * f_norm2.max(1.0);
            let all_pass = sigma_ok && conditions.iter().all(|c| c.verdict);
            let report = AnalyzeReport {
                config: opts,
                variance,
                conditions,
                all_pass,
            };
            Ok((serde_json::to_string_pretty(&report).unwrap(), all_pass))
        }
        Command::Sweep(opts) => {
            opts.validate()?;
            let (chain, f) = opts.load_chain()?;
            let dec = decompose(&chain)?;
            let schedule = LambdaSchedule::geometric(opts.delta, opts.k_max)?;
            let mut rows = Vec::new();
            let mut prev: Option<Observable> = None;
            for (i, &lam) in schedule.lambdas.iter().enumerate() {
                let u = resolvent(&chain, lam, &f)?.u;
                let norm_u = chain.norm(&u)?;
                let inc = match &prev {
                    Some(p) => chain.norm(&Observable::new(&dec.s_half * (&u.values - &p.values)))?,
                    None => 0.0,
                };
                rows.push((i as i32, lam, norm_u, lam.sqrt() * norm_u, inc));
                prev = Some(u);
            }
            let mut out = String::from("k,lambda,norm_u,sqrt_lambda_norm_u,shalf_increment\n");
            for (k, lam, nu, sl, inc) in rows {
                out.push_str(&format!(
                    "{k},{},{},{},{}\n",
                    fmt17(lam),
                    fmt17(nu),
                    fmt17(sl),
                    fmt17(inc)
                ));
            }
            Ok((out, true))
        }
        Command::Gamma(opts) => {
            opts.validate()?;
            let deltas: Vec<f64> = vec![opts.delta];
            let mut all_pass = true;
            let mut out = String::from("t,delta,sum,bound\n");
            for &d in &deltas {
                for i in 0..60 {
                    let t = 10f64.powf(-3.0 + 6.0 * i as f64 / 59.0);
                    let (sum, bound) = gamma_sum(t, d);
                    all_pass &= sum <= bound;
                    out.push_str(&format!(
                        "{},{},{},{}\n",
                        fmt17(t),
                        fmt17(d),
                        fmt17(sum),
                        fmt17(bound)
                    ));
                }
            }
            Ok((out, all_pass))
        }
        Command::Simulate(opts) => {
            opts.validate()?;
            let (chain, f) = opts.load_chain()?;
            let dec = decompose(&chain)?;
            let clt = clt_statistics(&chain, &f, opts.horizon, opts.paths, opts.seed)?;
            let vc = variance_check(&chain, &dec, &f, opts.horizon, opts.paths.max(100), opts.seed)?;
            let l2 = l2_error(&chain, &f, opts.horizon, opts.paths, opts.seed)?;
            let ks_crit = ks_critical_5pct(clt.samples.len());
            let all_pass = clt.ks_distance <= ks_crit && vc.verdict && l2.verdict;
            let report = SimulateReport {
                config: opts,
                clt,
                ks_critical_5pct: ks_crit,
                variance_check: vc,
                l2_error: l2,
                all_pass,
            };
            Ok((serde_json::to_string_pretty(&report).unwrap(), all_pass))
        }
    }
}

fn opts_of(cmd: &Command) -> &CommonOpts {
    match cmd {
        Command::Validate(o)
        | Command::Analyze(o)
        | Command::Sweep(o)
        | Command::Gamma(o)
        | Command::Simulate(o) => o,
    }
}

/// Entry point for the binary; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match render(&cli.command) {
        Ok((text, all_pass)) => {
            let opts = opts_of(&cli.command);
            if let Some(path) = &opts.output {
                if let Err(e) = fs::write(path, &text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return EXIT_INPUT;
                }
            } else {
                // tolerate a closed pipe (e.g. `... | head`)
                use std::io::Write;
                let _ = writeln!(std::io::stdout(), "{text}");
            }
            if all_pass {
                EXIT_OK
            } else {
                EXIT_VERDICT
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::BadParams(_)
                | Error::NotAGenerator(_)
                | Error::Reducible(_)
                | Error::DegenerateStationary(_)
                | Error::DimensionMismatch { .. }
                | Error::NotCentered(_) => EXIT_INPUT,
                _ => EXIT_NUMERICAL,
            }
        }
    }
}

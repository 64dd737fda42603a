use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::Rng;

use bitdiss::analyzer::analysis_report;
use bitdiss::dual::{backward_walks, record_voter_run, verify_dual_implication};
use bitdiss::dynamics::{default_max_rounds, run_until_consensus, Configuration, Mode, TraceLevel};
use bitdiss::harness::{self, emit_report, fit_scaling, ExperimentSpec, HarnessError};
use bitdiss::oracle::{exact_transition_matrix, expected_hitting_time, OracleError};
use bitdiss::protocol::{load_protocol, Builtin, Opinion, Protocol};
use bitdiss::rng::{derive_seed, rng_from_seed};

#[derive(Parser)]
#[command(name = "bitdiss", version, about = "Bit dissemination with memoryless agents: simulate, analyze, solve exactly, sweep")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the dynamics from one configuration.
    Simulate(SimulateArgs),
    /// Characteristic polynomial, roots and classification of a protocol.
    Analyze(AnalyzeArgs),
    /// Exact expected hitting times from the transition matrix.
    Oracle(OracleArgs),
    /// Replay recorded Voter runs through the backward coalescing walks.
    DualCheck(DualArgs),
    /// Run an experiment spec and write results.csv, fit.txt, plot.svg.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ProtocolArgs {
    /// Protocol file (TOML with name, ell, g0, g1).
    #[arg(long, conflicts_with = "builtin")]
    protocol: Option<PathBuf>,
    /// Built-in protocol: voter or minority.
    #[arg(long)]
    builtin: Option<Builtin>,
    /// Sample size for a built-in protocol.
    #[arg(long, requires = "builtin")]
    ell: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[arg(long)]
    n: u64,
    /// Source opinion.
    #[arg(long, default_value_t = 1)]
    z: u8,
    /// Initial number of agents holding 1 (source included).
    #[arg(long, conflicts_with = "x0_frac")]
    x0: Option<u64>,
    /// Initial fraction of ones, rounded and clamped to [1, n-1].
    #[arg(long)]
    x0_frac: Option<f64>,
    #[arg(long, default_value = "parallel")]
    mode: Mode,
    /// Budget in parallel rounds (sequential: rounds * n activations). Default 64 n ceil(log2 n).
    #[arg(long)]
    max_rounds: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Use the agent-level stepper and keep every sample (parallel only).
    #[arg(long)]
    record_samples: bool,
    /// Write the trajectory as CSV `trial,t,x`.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// With --record-samples: write samples as CSV `trial,t,agent,sample_index,sampled`.
    #[arg(long, requires = "record_samples")]
    samples_out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    /// Output: human, json or both.
    #[arg(long, default_value = "both")]
    format: String,
    /// Also print the suggested x0 for this n.
    #[arg(long)]
    n: Option<u64>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 1)]
    z: u8,
    #[arg(long, default_value = "parallel")]
    mode: Mode,
    /// Target state; defaults to the consensus n*z.
    #[arg(long)]
    target: Option<u64>,
    /// Report h at this start state.
    #[arg(long)]
    x0: Option<u64>,
    /// Hitting-time CSV `x,h,h_exact`; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dense transition-matrix CSV.
    #[arg(long)]
    matrix_out: Option<PathBuf>,
}

#[derive(Args)]
struct DualArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    horizon: usize,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    z: u8,
    /// Coalescence CSV `trial,x0,coalesced_walks,all_coalesced,coalescence_time,violations`; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; overrides the BITDISS_WORKERS environment variable.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    plot: bool,
}

/// Error carrying its exit code: 1 output, 2 input/spec, 3 resource cap, 4 failed check.
struct Failure {
    code: u8,
    message: String,
}

fn input(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn output(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 1,
        message: e.to_string(),
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Failure {
        Failure {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

fn resolve_protocol(args: &ProtocolArgs) -> Result<Protocol, Failure> {
    match (&args.protocol, args.builtin) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
            load_protocol(&text).map_err(|e| input(format!("{}: {e}", path.display())))
        }
        (None, Some(b)) => {
            let ell = args.ell.ok_or_else(|| input("--builtin needs --ell"))?;
            Protocol::builtin(b, ell).map_err(|e| input(e.to_string()))
        }
        _ => Err(input("give --protocol <file> or --builtin voter|minority --ell <k>")),
    }
}

fn opinion(z: u8) -> Result<Opinion, Failure> {
    Opinion::from_bit(z).ok_or_else(|| input("--z must be 0 or 1"))
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| output(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let p = resolve_protocol(&a.protocol)?;
    let z = opinion(a.z)?;
    let x0 = match (a.x0, a.x0_frac) {
        (Some(x), _) => x,
        (None, Some(f)) => bitdiss::analyzer::suggested_x0(f, a.n),
        (None, None) => return Err(input("give --x0 or --x0-frac")),
    };
    let c0 = Configuration::new(a.n, z, x0).map_err(|e| input(e.to_string()))?;
    let max_rounds = a.max_rounds.unwrap_or_else(|| default_max_rounds(a.n));
    let level = if a.record_samples {
        TraceLevel::Samples
    } else if a.trace_out.is_some() {
        TraceLevel::Counts
    } else {
        TraceLevel::None
    };
    let mut trace_out = a.trace_out.as_ref().map(|_| sink(&a.trace_out)).transpose()?;
    let mut samples_out = a.samples_out.as_ref().map(|_| sink(&a.samples_out)).transpose()?;
    if let Some(w) = trace_out.as_mut() {
        writeln!(w, "trial,t,x").map_err(output)?;
    }
    if let Some(w) = samples_out.as_mut() {
        writeln!(w, "trial,t,agent,sample_index,sampled").map_err(output)?;
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "trial,seed,status,tau,tau_rounds,activations,final_x").map_err(output)?;
    let mut taus = Vec::new();
    for trial in 0..a.trials {
        let seed = derive_seed(a.seed, &[trial]);
        let mut rng = rng_from_seed(seed);
        let (res, trace) = run_until_consensus(&c0, &p, a.mode, max_rounds, &mut rng, level).map_err(|e| input(e.to_string()))?;
        let status = match res.status {
            bitdiss::dynamics::Convergence::Converged { .. } => "converged",
            bitdiss::dynamics::Convergence::Censored => "censored",
            bitdiss::dynamics::Convergence::Undefined => "undefined",
        };
        writeln!(
            out,
            "{trial},{seed},{status},{},{},{},{}",
            res.tau().map(|t| t.to_string()).unwrap_or_default(),
            res.tau_rounds().map(|t| t.to_string()).unwrap_or_default(),
            res.activations(),
            res.final_config.x()
        )
        .map_err(output)?;
        if let Some(t) = res.tau_rounds() {
            taus.push(t);
        }
        if let Some(w) = trace_out.as_mut() {
            for (t, x) in trace.counts.iter().enumerate() {
                writeln!(w, "{trial},{t},{x}").map_err(output)?;
            }
        }
        if let (Some(w), Some(rec)) = (samples_out.as_mut(), trace.samples.as_ref()) {
            for (t, round) in rec.rounds.iter().enumerate() {
                for (slot, j) in round.iter().enumerate() {
                    writeln!(w, "{trial},{t},{},{},{j}", slot / rec.ell, slot % rec.ell).map_err(output)?;
                }
            }
        }
    }
    for w in trace_out.iter_mut().chain(samples_out.iter_mut()) {
        w.flush().map_err(output)?;
    }
    taus.sort_by(f64::total_cmp);
    let median = taus.get(taus.len().saturating_sub(1) / 2);
    eprintln!(
        "{}: {}/{} converged within {max_rounds} rounds{}",
        p.name(),
        taus.len(),
        a.trials,
        median.map(|m| format!(", median tau {m} rounds")).unwrap_or_default()
    );
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> Result<(), Failure> {
    let p = resolve_protocol(&a.protocol)?;
    let report = analysis_report(&p);
    let json = serde_json::to_string_pretty(&report).map_err(output)?;
    match a.format.as_str() {
        "human" => print!("{}", report.human()),
        "json" => println!("{json}"),
        "both" => {
            print!("{}", report.human());
            println!("{json}");
        }
        other => return Err(input(format!("--format must be human, json or both, got `{other}`"))),
    }
    if let (Some(n), Some(f)) = (a.n, report.suggested_x0_fraction) {
        println!("suggested x0 at n = {n}: {}", bitdiss::analyzer::suggested_x0(f, n));
    }
    Ok(())
}

fn oracle(a: OracleArgs) -> Result<(), Failure> {
    let p = resolve_protocol(&a.protocol)?;
    let z = opinion(a.z)?;
    let target = a.target.unwrap_or(a.n * z.bit());
    let m = exact_transition_matrix(&p, a.n, z, a.mode).map_err(|e| match e {
        OracleError::CapExceeded { .. } => Failure {
            code: 3,
            message: e.to_string(),
        },
        other => input(other.to_string()),
    })?;
    let h = expected_hitting_time(&m, target).map_err(|e| input(e.to_string()))?;
    let mut w = sink(&a.out)?;
    writeln!(w, "x,h,h_exact").map_err(output)?;
    for (x, v) in h.h.iter().enumerate() {
        let exact = h
            .exact
            .as_ref()
            .and_then(|e| e[x].as_ref())
            .map(|r| r.to_string())
            .unwrap_or_default();
        let hv = v.map(|v| v.to_string()).unwrap_or_else(|| "inf".into());
        writeln!(w, "{x},{hv},{exact}").map_err(output)?;
    }
    w.flush().map_err(output)?;
    if let Some(path) = &a.matrix_out {
        let mut mw = sink(&Some(path.clone()))?;
        for row in m.rows() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(mw, "{}", line.join(",")).map_err(output)?;
        }
        mw.flush().map_err(output)?;
    }
    eprintln!("residual {:.3e}; matrix {}", h.residual, if m.is_exact() { "exact" } else { "float" });
    if let Some(x0) = a.x0 {
        let v = h.h.get(x0 as usize).ok_or_else(|| input(format!("--x0 {x0} exceeds n")))?;
        let exact = h.exact.as_ref().and_then(|e| e[x0 as usize].as_ref());
        match (v, exact) {
            (_, Some(r)) => eprintln!("h({x0}) = {r} ~ {}", v.unwrap()),
            (Some(v), None) => eprintln!("h({x0}) = {v}"),
            (None, _) => eprintln!("h({x0}) = inf (target not hit almost surely)"),
        }
    }
    Ok(())
}

fn dual_check(a: DualArgs) -> Result<(), Failure> {
    let z = opinion(a.z)?;
    if a.n < 2 {
        return Err(input("--n must be at least 2"));
    }
    let mut w = sink(&a.out)?;
    writeln!(w, "trial,x0,coalesced_walks,all_coalesced,coalescence_time,violations").map_err(output)?;
    let (mut passed, mut failed) = (0u64, 0u64);
    for trial in 0..a.trials {
        let mut rng = rng_from_seed(derive_seed(a.seed, &[trial]));
        let x0 = match z {
            Opinion::One => rng.random_range(1..=a.n),
            Opinion::Zero => rng.random_range(0..a.n),
        };
        let c0 = Configuration::new(a.n, z, x0).map_err(|e| input(e.to_string()))?;
        let (record, history) = record_voter_run(&c0, a.horizon, &mut rng);
        let dual = backward_walks(&record, a.horizon).map_err(|e| input(e.to_string()))?;
        let report = verify_dual_implication(&history, z, &dual).map_err(|e| input(e.to_string()))?;
        if report.passed() && dual.sink_property_holds() {
            passed += 1;
        } else {
            failed += 1;
        }
        writeln!(
            w,
            "{trial},{x0},{},{},{},{}",
            report.coalesced,
            dual.all_coalesced(),
            dual.coalescence_steps().map(|s| s.to_string()).unwrap_or_default(),
            report.violations.len() + report.replay_mismatches.len()
        )
        .map_err(output)?;
    }
    w.flush().map_err(output)?;
    eprintln!("dual check n={} T={}: {passed} passed, {failed} failed", a.n, a.horizon);
    if failed > 0 {
        return Err(Failure {
            code: 4,
            message: format!("{failed} runs violated the dual implication"),
        });
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<(), Failure> {
    let spec = ExperimentSpec::load(&a.spec)?;
    eprintln!(
        "sweep `{}`: {} sizes, {} trials per point, {} workers",
        spec.name,
        spec.n.len(),
        spec.trials,
        harness::resolve_workers(a.workers)
    );
    let rows = harness::sweep(&spec, a.workers, |rows| {
        let first = &rows[0];
        let done = rows.iter().filter(|r| !r.censored).count();
        eprintln!("  n={} ell={} x0={}: {done}/{} converged", first.n, first.ell, first.x0, rows.len());
    })?;
    let fit = fit_scaling(&rows, spec.statistic, spec.censor_threshold);
    let files = emit_report(&rows, &fit, spec.statistic, &spec.hash, &a.out, a.plot)?;
    match &fit {
        Ok(f) => eprintln!("fit: {} slope {:.4} (r^2 {:.4})", spec.statistic, f.slope, f.r_squared),
        Err(e) => eprintln!("fit refused: {e}"),
    }
    eprintln!("wrote {}", files.csv.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Analyze(a) => analyze(a),
        Command::Oracle(a) => oracle(a),
        Command::DualCheck(a) => dual_check(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

//! `muhasse`: analyze module files, generate test modules, run property
//! suites. Exit codes: 0 success, 1 invariant violation, 2 input error,
//! 3 precision exhausted.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use muhasse::hasse::hasse_report;
use muhasse::io::{module_from_json, module_to_json};
use muhasse::models::{default_ring, gu_newton_reference, isogeny_twist, permutation_family, standard_module, GuDatum};
use muhasse::suite::{run_suite, SuiteConfig, SuiteKind, TWIST_BUDGET};
use muhasse::{DieudonneModule, Error, OrbitDatum, PelDatum};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "muhasse", version, about = "μ-ordinary Hasse invariants of Dieudonné modules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the full Hasse report of a module file.
    Analyze(AnalyzeArgs),
    /// Write generated modules as JSON files.
    Generate(GenerateArgs),
    /// Run a property suite.
    Suite(SuiteArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Module JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Override the working precision N.
    #[arg(long)]
    precision: Option<u32>,
    /// Write the JSON report here.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Print the JSON report on stdout.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Standard,
    Twist,
    PermutationFamily,
    Gu,
}

#[derive(Args)]
struct GenerateArgs {
    kind: Kind,
    #[arg(long)]
    p: Option<u64>,
    /// Orbit as `e:n:f1,f2,…,fe` in cyclic order; repeat for more orbits.
    #[arg(long = "orbit")]
    orbits: Vec<String>,
    /// Paired embeddings as `o:k=o:k` (orbit index, cyclic position).
    #[arg(long = "pair")]
    pairs: Vec<String>,
    #[arg(long, default_value_t = 1)]
    r: usize,
    #[arg(long)]
    a: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    /// Twist seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Twists: conjugate by invertible matrices only.
    #[arg(long)]
    unit_only: bool,
    /// Twists: start from this module file instead of the standard module.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    precision: Option<u32>,
    /// Output directory.
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteName {
    Standard,
    Oracle,
    Mazur,
    Filtration,
    GuConsistency,
    Precision,
}

#[derive(Args)]
struct SuiteArgs {
    suite: SuiteName,
    /// Comma-separated primes.
    #[arg(long, value_delimiter = ',', default_values_t = [2u64, 3])]
    p: Vec<u64>,
    #[arg(long, default_value_t = 3)]
    max_n: usize,
    #[arg(long, default_value_t = 3)]
    max_e: usize,
    /// Number of random instances (mazur, filtration, precision).
    #[arg(long, default_value_t = 100)]
    random: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Precision multiplier for the precision suite.
    #[arg(long, default_value_t = 2)]
    factor: u32,
    #[arg(long, default_value_t = 3)]
    max_b: usize,
    #[arg(long, default_value_t = 2)]
    max_r: usize,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Where to write the minimized failing module.
    #[arg(long, default_value = "muhasse-reproducer.json")]
    reproducer: PathBuf,
    #[arg(long)]
    json: bool,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
    suggested: Option<u32>,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            kind: "input",
            message: message.into(),
            suggested: None,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::PrecisionExhausted { suggested, .. } => Failure {
                code: 3,
                kind: "precision-exhausted",
                message,
                suggested: Some(suggested),
            },
            Error::PrecisionBudget { .. } => Failure {
                code: 3,
                kind: "precision-exhausted",
                message,
                suggested: None,
            },
            Error::Inconsistency(_)
            | Error::DivisibilityFailure { .. }
            | Error::FiltrationNotKilled
            | Error::EndpointMismatch(_)
            | Error::NotUnit { .. } => Failure {
                code: 1,
                kind: "invariant-violation",
                message,
                suggested: None,
            },
            _ => Failure::input(message),
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn envelope(command: &str, input_sha256: &str, precision: Option<u32>, code: u8, body: Value) -> Value {
    json!({
        "command": command,
        "version": VERSION,
        "input_sha256": input_sha256,
        "precision": precision,
        "exit_code": code,
        "result": body,
    })
}

fn failure_body(f: &Failure) -> Value {
    json!({ "error": { "kind": f.kind, "message": f.message, "suggested_precision": f.suggested } })
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn emit(doc: &Value, output: Option<&Path>, json_stdout: bool, summary: &str) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(doc).expect("JSON value serializes") + "\n";
    if let Some(path) = output {
        write_text(path, &text)?;
    }
    if json_stdout {
        print!("{text}");
    } else {
        println!("{summary}");
    }
    Ok(())
}

fn report_error(command: &str, hash: &str, precision: Option<u32>, f: &Failure, output: Option<&Path>, json_stdout: bool) -> ExitCode {
    let doc = envelope(command, hash, precision, f.code, failure_body(f));
    if let Some(path) = output {
        // best effort; the message below still reaches the user
        let _ = fs::write(path, serde_json::to_string_pretty(&doc).unwrap_or_default() + "\n");
    }
    if json_stdout {
        println!("{}", serde_json::to_string_pretty(&doc).unwrap_or_default());
    }
    eprintln!("error ({}): {}", f.kind, f.message);
    if let Some(n) = f.suggested {
        eprintln!("suggested precision: {n}");
    }
    ExitCode::from(f.code)
}

// ---- analyze ------------------------------------------------------------

fn analyze(args: &AnalyzeArgs) -> ExitCode {
    let bytes = match fs::read(&args.input) {
        Ok(b) => b,
        Err(e) => {
            let f = Failure::input(format!("cannot read {}: {e}", args.input.display()));
            return report_error("analyze", "", args.precision, &f, args.output.as_deref(), args.json);
        }
    };
    let hash = sha256_hex(&bytes);
    let run = || -> Result<(Value, String, u32), Failure> {
        let text = std::str::from_utf8(&bytes).map_err(|e| Failure::input(format!("input is not UTF-8: {e}")))?;
        let m = module_from_json(text, args.precision)?;
        m.ensure_valid()?;
        let report = hasse_report(&m)?;
        let summary = format!(
            "μ-ordinary: {}, μ-Hasse nonzero: {}, weight m = {}, τ-Hasse nonzero: {:?}",
            report.mu_ordinary,
            report.mu_nonzero,
            report.m,
            report.labels.iter().map(|l| l.tau_nonzero).collect::<Vec<_>>()
        );
        let body = serde_json::to_value(&report).expect("report serializes");
        Ok((body, summary, m.precision()))
    };
    match run() {
        Ok((body, summary, precision)) => {
            let doc = envelope("analyze", &hash, Some(precision), 0, body);
            match emit(&doc, args.output.as_deref(), args.json, &summary) {
                Ok(()) => ExitCode::SUCCESS,
                Err(f) => report_error("analyze", &hash, Some(precision), &f, None, false),
            }
        }
        Err(f) => report_error("analyze", &hash, args.precision, &f, args.output.as_deref(), args.json),
    }
}

// ---- generate -----------------------------------------------------------

fn parse_orbit(s: &str) -> Result<OrbitDatum, Failure> {
    let bad = || Failure::input(format!("orbit {s:?} is not of the form e:n:f1,…,fe"));
    let parts: Vec<&str> = s.split(':').collect();
    let [e, n, f] = parts.as_slice() else {
        return Err(bad());
    };
    let e: usize = e.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    let f = f
        .split(',')
        .map(|x| x.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| bad())?;
    Ok(OrbitDatum::new(e, n, f)?)
}

fn parse_embedding(s: &str) -> Option<(usize, usize)> {
    let (o, k) = s.split_once(':')?;
    Some((o.trim().parse().ok()?, k.trim().parse().ok()?))
}

fn parse_pair(s: &str) -> Result<((usize, usize), (usize, usize)), Failure> {
    let bad = || Failure::input(format!("pair {s:?} is not of the form o:k=o:k"));
    let (a, b) = s.split_once('=').ok_or_else(bad)?;
    Ok((parse_embedding(a).ok_or_else(bad)?, parse_embedding(b).ok_or_else(bad)?))
}

fn datum_from_flags(args: &GenerateArgs) -> Result<PelDatum, Failure> {
    let p = args.p.ok_or_else(|| Failure::input("--p is required"))?;
    if args.orbits.is_empty() {
        return Err(Failure::input("at least one --orbit is required"));
    }
    let orbits = args.orbits.iter().map(|s| parse_orbit(s)).collect::<Result<Vec<_>, _>>()?;
    let mut datum = PelDatum::new(p, orbits, args.r)?;
    if !args.pairs.is_empty() {
        let pairs = args.pairs.iter().map(|s| parse_pair(s)).collect::<Result<Vec<_>, _>>()?;
        datum = datum.with_pairing(pairs)?;
        let bad = datum.signature_violations();
        if !bad.is_empty() {
            return Err(Failure::input(format!("pairing violates the signature constraint at {bad:?}")));
        }
    }
    Ok(datum)
}

fn with_precision(m: DieudonneModule, precision: Option<u32>) -> Result<DieudonneModule, Failure> {
    match precision {
        Some(n) => Ok(m.with_precision(n)?),
        None => Ok(m),
    }
}

fn orbit_tag(d: &PelDatum) -> String {
    d.orbits
        .iter()
        .map(|o| {
            let f: Vec<String> = o.f.iter().map(|x| x.to_string()).collect();
            format!("{}-{}-{}", o.e, o.n, f.join(""))
        })
        .collect::<Vec<_>>()
        .join("_")
}

fn generate(args: &GenerateArgs) -> ExitCode {
    let flags = json!({
        "kind": match args.kind { Kind::Standard => "standard", Kind::Twist => "twist", Kind::PermutationFamily => "permutation-family", Kind::Gu => "gu" },
        "p": args.p, "orbits": args.orbits, "pairs": args.pairs, "r": args.r, "a": args.a, "b": args.b,
        "seed": args.seed, "unit_only": args.unit_only, "precision": args.precision,
        "input": args.input.as_ref().map(|p| p.display().to_string()),
    });
    let mut hashed = serde_json::to_vec(&flags).expect("flags serialize");
    let mut run = || -> Result<Vec<(String, String)>, Failure> {
        let mut files = Vec::new();
        match args.kind {
            Kind::Standard => {
                let d = datum_from_flags(args)?;
                let m = with_precision(standard_module(&d, &default_ring(&d)?)?, args.precision)?;
                m.ensure_valid()?;
                files.push((format!("standard_p{}_{}.json", d.p, orbit_tag(&d)), module_to_json(&m)));
            }
            Kind::Twist => {
                let base = match &args.input {
                    Some(path) => {
                        let bytes = fs::read(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
                        hashed.extend_from_slice(&bytes);
                        let text = String::from_utf8(bytes).map_err(|e| Failure::input(e.to_string()))?;
                        module_from_json(&text, None)?
                    }
                    None => {
                        let d = datum_from_flags(args)?;
                        standard_module(&d, &default_ring(&d)?)?
                    }
                };
                base.ensure_valid()?;
                let m = with_precision(isogeny_twist(&base, args.seed, args.unit_only, TWIST_BUDGET)?, args.precision)?;
                let kind = if args.unit_only { "unit" } else { "isogeny" };
                files.push((format!("twist_{kind}_seed{}.json", args.seed), module_to_json(&m)));
            }
            Kind::PermutationFamily => {
                let d = datum_from_flags(args)?;
                if d.orbits.len() != 1 {
                    return Err(Failure::input("permutation-family takes exactly one --orbit"));
                }
                for (i, m) in permutation_family(&d.orbits[0], d.p)?.enumerate() {
                    let m = with_precision(m, args.precision)?;
                    files.push((format!("member_{i:06}.json"), module_to_json(&m)));
                }
            }
            Kind::Gu => {
                let p = args.p.ok_or_else(|| Failure::input("--p is required"))?;
                let (a, b) = match (args.a, args.b) {
                    (Some(a), Some(b)) => (a, b),
                    _ => return Err(Failure::input("--a and --b are required")),
                };
                let gu = GuDatum::new(a, b, args.r, p)?;
                let m = with_precision(gu.standard_module()?, args.precision)?;
                let stem = format!("gu_a{a}_b{b}_r{}_p{p}", args.r);
                let reference = gu_newton_reference(&gu);
                let slopes: Vec<Value> = reference
                    .segments()
                    .iter()
                    .map(|(s, k)| json!({ "slope": [s.numer(), s.denom()], "multiplicity": k }))
                    .collect();
                let sidecar = json!({ "a": a, "b": b, "r": args.r, "p": p, "polygon": reference, "segments": slopes });
                files.push((format!("{stem}.json"), module_to_json(&m)));
                files.push((
                    format!("{stem}.reference.json"),
                    serde_json::to_string_pretty(&sidecar).expect("sidecar serializes"),
                ));
            }
        }
        Ok(files)
    };
    let files = match run() {
        Ok(f) => f,
        Err(f) => return report_error("generate", &sha256_hex(&hashed), args.precision, &f, None, args.json),
    };
    let hash = sha256_hex(&hashed);
    if let Err(e) = fs::create_dir_all(&args.output) {
        let f = Failure::input(format!("cannot create {}: {e}", args.output.display()));
        return report_error("generate", &hash, args.precision, &f, None, args.json);
    }
    let mut listing = Vec::new();
    for (name, text) in &files {
        let text = format!("{text}\n");
        if let Err(f) = write_text(&args.output.join(name), &text) {
            return report_error("generate", &hash, args.precision, &f, None, args.json);
        }
        listing.push(json!({ "file": name, "sha256": sha256_hex(text.as_bytes()) }));
    }
    let doc = envelope("generate", &hash, args.precision, 0, json!({ "flags": flags, "files": listing }));
    let summary = format!("wrote {} file(s) to {}", files.len(), args.output.display());
    match emit(&doc, None, args.json, &summary) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report_error("generate", &hash, args.precision, &f, None, false),
    }
}

// ---- suite --------------------------------------------------------------

fn suite(args: &SuiteArgs) -> ExitCode {
    let kind = match args.suite {
        SuiteName::Standard => SuiteKind::Standard,
        SuiteName::Oracle => SuiteKind::Oracle,
        SuiteName::Mazur => SuiteKind::Mazur,
        SuiteName::Filtration => SuiteKind::Filtration,
        SuiteName::GuConsistency => SuiteKind::GuConsistency,
        SuiteName::Precision => SuiteKind::Precision,
    };
    let cfg = SuiteConfig {
        primes: args.p.clone(),
        max_n: args.max_n,
        max_e: args.max_e,
        random: args.random,
        seed: args.seed,
        factor: args.factor,
        max_b: args.max_b,
        max_r: args.max_r,
    };
    let hash = sha256_hex(&serde_json::to_vec(&json!({ "suite": kind, "config": cfg })).expect("config serializes"));
    if let Some(bad) = cfg.primes.iter().find(|&&p| !muhasse::is_prime(p)) {
        let f = Failure::input(format!("{bad} is not a prime"));
        return report_error("suite", &hash, None, &f, args.output.as_deref(), args.json);
    }
    let report = match run_suite(kind, &cfg) {
        Ok(r) => r,
        Err(e) => return report_error("suite", &hash, None, &Failure::from(e), args.output.as_deref(), args.json),
    };
    let code: u8 = if report.tally.failed > 0 {
        1
    } else if report.tally.precision_exhausted > 0 {
        3
    } else {
        0
    };
    let mut body = serde_json::to_value(&report).expect("suite report serializes");
    if let Some(m) = &report.reproducer {
        if let Err(f) = write_text(&args.reproducer, &(module_to_json(m) + "\n")) {
            return report_error("suite", &hash, None, &f, None, false);
        }
        body["reproducer"] = json!(args.reproducer.display().to_string());
    }
    let t = &report.tally;
    let summary = format!(
        "{} instances: {} pass, {} fail, {} precision-exhausted, {} excluded",
        t.instances, t.passed, t.failed, t.precision_exhausted, t.excluded
    );
    let doc = envelope("suite", &hash, None, code, body);
    if let Err(f) = emit(&doc, args.output.as_deref(), args.json, &summary) {
        return report_error("suite", &hash, None, &f, None, false);
    }
    if report.reproducer.is_some() {
        eprintln!("minimized reproducer written to {}", args.reproducer.display());
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Generate(g) => generate(g),
        Command::Suite(s) => suite(s),
    }
}

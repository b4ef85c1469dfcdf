use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use mcbisim::chain::{chain_to_json, load_chain};
use mcbisim::deduction::{check_proof, load_script, semantic_validate, Validation};
use mcbisim::metric::{pointed_distance, DistanceOptions, TermDistance};
use mcbisim::rational::{format_rational, parse_rational, to_f64};
use mcbisim::semantics::{chain_to_term, explore};
use mcbisim::term::alpha_normalize;
use mcbisim::{bisim, Error, PointedChain, Rational, Scalar, Term, DEFAULT_STATE_CAP};

/// Probabilistic bisimilarity and its pseudometric on terms and open Markov chains.
///
/// Operands are inline terms, `@path` for a term stored in a file, or the
/// path of a chain JSON file.
#[derive(Parser, Debug)]
#[command(name = "mcbisim", version)]
struct Cli {
    #[command(flatten)]
    config: Config,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Config {
    /// Target enclosure width.
    #[arg(long, global = true, default_value = "1/1000000000", value_parser = rational)]
    tol: Rational,
    /// Iteration budget of the distance computation.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    max_iter: usize,
    /// Compute with exact rationals instead of doubles.
    #[arg(long, global = true)]
    exact: bool,
    /// Discount factor in (0,1).
    #[arg(long, global = true, value_parser = rational)]
    discount: Option<Rational>,
    /// Maximum number of reachable states explored per term.
    #[arg(long, global = true, env = "MCBISIM_CAP", default_value_t = DEFAULT_STATE_CAP)]
    cap: usize,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a term and print it with its free names.
    Parse { term: String },
    /// Print the reachable chain of a term with the term behind each state.
    Semantics { term: String },
    /// Decide probabilistic bisimilarity; exit status 1 when not bisimilar.
    Bisim { left: String, right: String },
    /// Enclose the bisimilarity distance of two operands.
    Dist { left: String, right: String },
    /// Print a term whose semantics is bisimilar to a chain.
    ToTerm { chain: String },
    /// Print the reachable chain of a term as JSON.
    ToChain { term: String },
    /// Check a proof script; exit status 1 on the first violation.
    Check {
        script: String,
        /// Also validate the goal against the distance (exit status 2 when undecided).
        #[arg(long)]
        validate: bool,
    },
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

const USAGE: u8 = 10;
const INPUT: u8 = 11;
const COMPUTE: u8 = 12;

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidDiscount(_) | Error::InvalidTolerance) => USAGE,
        Some(
            Error::StateCapExceeded { .. }
            | Error::NotConverged { .. }
            | Error::NotCheckable(_)
            | Error::Unguarded { .. },
        ) => COMPUTE,
        Some(_) => INPUT,
        None if err.downcast_ref::<std::io::Error>().is_some() => INPUT,
        None => USAGE,
    }
}

impl Config {
    fn options(&self) -> anyhow::Result<DistanceOptions> {
        if self.tol <= Rational::from_integer(0.into()) {
            return Err(Error::InvalidTolerance.into());
        }
        if self.cap == 0 {
            return Err(anyhow!("--cap must be positive"));
        }
        if let Some(d) = &self.discount {
            if !(d > &Rational::from_integer(0.into()) && d < &Rational::from_integer(1.into())) {
                return Err(Error::InvalidDiscount(format_rational(d)).into());
            }
        }
        Ok(DistanceOptions {
            tol: self.tol.clone(),
            max_iter: self.max_iter,
            discount: self.discount.clone(),
            state_cap: self.cap,
        })
    }
}

enum Operand {
    Term(Term),
    Chain(PointedChain),
}

fn read_term(arg: &str) -> anyhow::Result<Term> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?,
        None => arg.to_string(),
    };
    Ok(Term::parse(text.trim())?)
}

fn read_chain(arg: &str) -> anyhow::Result<PointedChain> {
    let bytes = std::fs::read(arg).with_context(|| format!("reading {arg}"))?;
    load_chain(&bytes).with_context(|| format!("loading {arg}"))
}

fn operand(arg: &str) -> anyhow::Result<Operand> {
    if arg.ends_with(".json") && Path::new(arg).is_file() {
        read_chain(arg).map(Operand::Chain)
    } else {
        read_term(arg).map(Operand::Term)
    }
}

fn pointed(arg: &str, cap: usize) -> anyhow::Result<PointedChain> {
    Ok(match operand(arg)? {
        Operand::Chain(p) => p,
        Operand::Term(t) => explore(&t, cap)?.0,
    })
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON values serialize"));
}

fn distance_report<S: Scalar>(d: &TermDistance<S>, show: impl Fn(&S) -> Value, json: bool) -> u8 {
    if json {
        let mut v = json!({
            "lower": show(&d.lower),
            "upper": show(&d.upper),
            "iterations": d.iterations,
            "exact": d.exact,
            "left_states": d.left_states,
            "right_states": d.right_states,
        });
        if let Some(b) = &d.bound {
            v["bound"] = show(b);
        }
        print_json(&v);
    } else {
        let text = |x: &S| match show(x) {
            Value::String(s) => s,
            other => other.to_string(),
        };
        match &d.bound {
            Some(b) => {
                println!("value       {}", text(&d.upper));
                println!("bound       {}", text(b));
            }
            None => {
                println!("lower       {}", text(&d.lower));
                println!("upper       {}", text(&d.upper));
            }
        }
        println!("iterations  {}", d.iterations);
        println!("exact       {}", d.exact);
        println!("states      {} + {}", d.left_states, d.right_states);
    }
    0
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let cfg = &cli.config;
    match &cli.command {
        Command::Parse { term } => {
            let t = read_term(term)?;
            let free: Vec<String> = t.free_names().iter().map(|n| n.as_str().to_string()).collect();
            if cfg.json {
                print_json(&json!({
                    "term": t.to_string(),
                    "alpha_normal": alpha_normalize(&t).to_string(),
                    "free": free,
                    "size": t.size(),
                }));
            } else {
                println!("{t}");
                println!("free: {}", if free.is_empty() { "-".into() } else { free.join(", ") });
            }
            Ok(0)
        }
        Command::Semantics { term } => {
            let t = read_term(term)?;
            let (p, terms) = explore(&t, cfg.options()?.state_cap)?;
            if cfg.json {
                print_json(&chain_to_json(&p));
            } else {
                for (id, t) in p.chain.states().iter().zip(&terms) {
                    println!("{id:>4}  {t}");
                }
                println!();
                print_json(&chain_to_json(&p));
            }
            Ok(0)
        }
        Command::Bisim { left, right } => {
            let opts = cfg.options()?;
            let same = bisim::bisimilar(&pointed(left, opts.state_cap)?, &pointed(right, opts.state_cap)?);
            if cfg.json {
                print_json(&json!({ "bisimilar": same }));
            } else {
                println!("{same}");
            }
            Ok(if same { 0 } else { 1 })
        }
        Command::Dist { left, right } => {
            let opts = cfg.options()?;
            let p = pointed(left, opts.state_cap)?;
            let q = pointed(right, opts.state_cap)?;
            Ok(if cfg.exact {
                let d = pointed_distance::<Rational>(&p, &q, &opts)?;
                distance_report(&d, |x| Value::String(format_rational(x)), cfg.json)
            } else {
                let d = pointed_distance::<f64>(&p, &q, &opts)?;
                distance_report(&d, |x| json!(x), cfg.json)
            })
        }
        Command::ToTerm { chain } => {
            let t = chain_to_term(&read_chain(chain)?)?;
            if cfg.json {
                print_json(&json!({ "term": t.to_string() }));
            } else {
                println!("{t}");
            }
            Ok(0)
        }
        Command::ToChain { term } => {
            let t = read_term(term)?;
            print_json(&chain_to_json(&explore(&t, cfg.options()?.state_cap)?.0));
            Ok(0)
        }
        Command::Check { script, validate } => {
            let bytes = std::fs::read(script).with_context(|| format!("reading {script}"))?;
            let s = load_script(&bytes)?;
            if let Err(v) = check_proof(&s) {
                if cfg.json {
                    print_json(&json!({ "ok": false, "step": v.step, "rule": v.rule, "message": v.message }));
                } else {
                    println!("{v}");
                }
                return Ok(1);
            }
            let verdict = if *validate {
                let opts = cfg.options()?.with_discount(s.discount.clone());
                Some(semantic_validate(&s.goal, &opts)?)
            } else {
                None
            };
            let (label, code) = match &verdict {
                None | Some(Validation::Holds) => ("holds", 0),
                Some(Validation::Fails(_)) => ("fails", 1),
                Some(Validation::Undecided(_)) => ("undecided", 2),
            };
            if cfg.json {
                let mut v = json!({ "ok": true, "steps": s.steps.len(), "goal": s.goal.to_string() });
                if verdict.is_some() {
                    v["validation"] = json!(label);
                }
                if let Some(Validation::Fails(d) | Validation::Undecided(d)) = &verdict {
                    v["lower"] = json!(format_rational(&d.lower));
                    v["upper"] = json!(format_rational(&d.upper));
                }
                print_json(&v);
            } else {
                println!("ok ({} steps): {}", s.steps.len(), s.goal);
                if verdict.is_some() {
                    println!("semantics: {label}");
                }
                if let Some(Validation::Fails(d) | Validation::Undecided(d)) = &verdict {
                    println!("distance in [{}, {}]", to_f64(&d.lower), to_f64(&d.upper));
                }
            }
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let mut text = e.to_string();
            for cause in e.chain().skip(1) {
                let c = cause.to_string();
                if !text.contains(&c) {
                    text = format!("{text}: {c}");
                }
            }
            eprintln!("error: {text}");
            ExitCode::from(exit_code(&e))
        }
    }
}

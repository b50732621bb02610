//! `stochlie`: certificates and reports for the stochastic Lie algebra 𝔰(n,ℝ).
//!
//! Exit codes: 0 all checks pass, 1 a certification failed, 2 usage or input error.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use stochastic_lie::basis::{build_basis, check_basis, StochasticBasis};
use stochastic_lie::classify::{compute_roots, detect_dynkin, root_space_check, RepresentationMaps};
use stochastic_lie::decomp::{certify_levi, group_level_check, random_algebra_element};
use stochastic_lie::error::require_n;
use stochastic_lie::linalg::expm;
use stochastic_lie::markov::io::{read_family, read_matrix};
use stochastic_lie::markov::{
    check_matrix, check_semigroup, flow_invariance, simulate_chain, GeneratorCone, MatrixClass, TransitionMatrix,
    ValidationTolerance,
};
use stochastic_lie::structure::{
    killing_form_levi_from, structure_constants, verify_multiplication_table, verify_multiplication_table_with,
    verify_semisimplicity,
};
use stochastic_lie::twogen::{certify_two_generation, random_pair_study};
use stochastic_lie::{DenseVector, Error, Tolerance};

#[derive(Parser)]
#[command(name = "stochlie", version, about = "Certificates for the Lie algebra of stochastic matrices")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, global = true, default_value_t = Tolerance::DEFAULT_EPS)]
    tol_abs: f64,
    #[arg(long, global = true, default_value_t = Tolerance::DEFAULT_EPS)]
    tol_rel: f64,
    /// Seed for every randomized diagnostic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Labeled orthonormal basis and its audit.
    Basis(NArg),
    /// Killing form, root system and Dynkin type of the Levi factor.
    Classify(NArg),
    /// Levi decomposition certificate.
    Levi(NArg),
    /// Two-generator construction and bracket-closure certificate.
    Generators(NArg),
    /// Every algebraic certificate in one document.
    Report(NArg),
    /// Transition matrices, families and generators.
    Markov {
        #[command(subcommand)]
        command: MarkovCommand,
    },
}

#[derive(clap::Args)]
struct NArg {
    #[arg(long, allow_negative_numbers = true)]
    n: i64,
}

#[derive(Subcommand)]
enum MarkovCommand {
    /// Classify a matrix as S0_plus, S_plus, S_group or none.
    Check { file: PathBuf },
    /// Semigroup consistency of a family {times, entries: [{s, t, matrix}]}.
    Semigroup { file: PathBuf },
    /// exp(tA) for a generator A on a time grid.
    Flow {
        file: PathBuf,
        #[arg(long = "t", value_delimiter = ',', required = true)]
        t: Vec<f64>,
    },
    /// Monte-Carlo paths of the chain.
    Simulate {
        file: PathBuf,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 10_000)]
        paths: usize,
        /// Initial law; uniform when omitted.
        #[arg(long, value_delimiter = ',')]
        initial: Option<Vec<f64>>,
    },
}

/// Result of one command: the JSON document, its text rendering, and the
/// failing clause if a certification failed.
struct Outcome {
    json: Value,
    text: String,
    failure: Option<String>,
}

enum Failure {
    Input(String),
    Certification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Certification { .. } | Error::Consistency(_) | Error::Indeterminate(_) => {
                Failure::Certification(e.to_string())
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn basis_for(n: i64) -> Result<StochasticBasis, Failure> {
    let n = usize::try_from(n).map_err(|_| Failure::Input("n must be ≥ 2".into()))?;
    require_n(n)?;
    Ok(build_basis(n)?)
}

fn cmd_basis(basis: &StochasticBasis, tol: Tolerance) -> Result<Outcome, Failure> {
    let report = check_basis(basis, tol)?;
    let mut text = format!("basis of s({}, R): {} elements\n", basis.n, basis.dim());
    let rows = [
        ("frame Gram deviation", report.frame_gram_deviation),
        ("Γ Gram deviation", report.gamma_gram_deviation),
        ("basis Gram deviation", report.gram_max_deviation),
        ("max row sum", report.max_row_sum),
        ("Levi max column sum", report.levi_max_column_sum),
        ("Levi max trace", report.levi_max_trace),
    ];
    for (name, v) in rows {
        let _ = writeln!(text, "  {name:<24} {v:.3e}");
    }
    let _ = writeln!(text, "  {:<24} {}", "span dimension", report.span_dimension);
    let _ = writeln!(text, "  {:<24} {}", "radical ∪ legacy span", report.legacy_union_span);
    let _ = write!(text, "  labels: {}", basis.labels().iter().map(ToString::to_string).collect::<Vec<_>>().join(" "));
    Ok(Outcome {
        failure: (!report.passes).then(|| "basis invariants".to_string()),
        json: json!({ "basis": to_json(basis), "report": to_json(&report) }),
        text,
    })
}

fn cmd_classify(basis: &StochasticBasis, tol: Tolerance) -> Result<Outcome, Failure> {
    let n = basis.n;
    if n == 2 {
        return Ok(Outcome {
            json: json!({ "n": 2, "trivial_levi": true, "notice": "trivial Levi factor: 𝔩 = 0 for n = 2" }),
            text: "trivial Levi factor: 𝔩 = 0 for n = 2, nothing to classify".into(),
            failure: None,
        });
    }
    let sc = structure_constants(basis)?;
    let killing = killing_form_levi_from(basis, &sc)?;
    let semisimple = verify_semisimplicity(&killing, tol)?;
    let roots = compute_roots(basis)?;
    let dynkin = detect_dynkin(&roots);
    let spaces = root_space_check(basis, tol)?;
    let expected = format!("A_{}", n - 2);
    let failure = if !semisimple.semisimple {
        Some("semisimplicity".to_string())
    } else if dynkin.detected_type != expected {
        Some(format!("dynkin type {} (expected {expected})", dynkin.detected_type))
    } else if !spaces.passes {
        Some("root spaces".to_string())
    } else {
        None
    };
    let diag = killing.gram.as_ref().map_or(0.0, |g| g[(g.rows() - 1, g.rows() - 1)]);
    let mut text = format!(
        "Killing form of 𝔩 (n = {n}): dual-pair value {diag:.6}, max deviation from closed form {:.3e}\n",
        killing.max_deviation
    );
    let _ = writeln!(
        text,
        "semisimple: {} (σ_min {:.6}, σ_max {:.6})",
        semisimple.semisimple, semisimple.min_singular_value, semisimple.max_singular_value
    );
    let _ = writeln!(text, "roots: {}, simple roots: {}", roots.roots.len(), roots.simple.len());
    let _ = writeln!(text, "Cartan matrix:");
    for row in &roots.cartan_matrix {
        let _ = writeln!(text, "  {}", row.iter().map(|v| format!("{v:>3}")).collect::<String>());
    }
    let _ = writeln!(text, "Dynkin type: {}", dynkin.detected_type);
    let _ = write!(text, "{}", dynkin.ascii());
    let mut dyn_json = to_json(&dynkin);
    dyn_json["ascii"] = Value::String(dynkin.ascii());
    Ok(Outcome {
        json: json!({
            "n": n,
            "trivial_levi": false,
            "killing": to_json(&killing),
            "semisimplicity": to_json(&semisimple),
            "root_system": to_json(&roots),
            "dynkin": dyn_json,
            "detected_type": dynkin.detected_type,
            "root_spaces": to_json(&spaces),
        }),
        text,
        failure,
    })
}

fn cmd_levi(basis: &StochasticBasis, tol: Tolerance, seed: u64) -> Result<Outcome, Failure> {
    let cert = certify_levi(basis, tol)?;
    let maps = RepresentationMaps::new(&basis.frame)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let elements = (0..8)
        .map(|_| expm(&random_algebra_element(basis, &mut rng, 0.5)))
        .collect::<Result<Vec<_>, _>>()?;
    let group = group_level_check(&maps, &elements, tol)?;
    let mut text = format!("Levi decomposition of s({}, R)\n", basis.n);
    for c in &cert.clauses {
        let res = c.residual.map(|r| format!(" residual {r:.3e}")).unwrap_or_default();
        let _ = writeln!(text, "  [{}] {:<16}{res}  {}", if c.passes { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    let _ = write!(
        text,
        "  group level: first column {:.3e}, multiplicativity {:.3e}",
        group.max_first_column_deviation, group.max_multiplicativity_residual
    );
    let failure = cert
        .clauses
        .iter()
        .find(|c| !c.passes)
        .map(|c| c.name.to_string())
        .or_else(|| (!group.passes).then(|| "group_level".to_string()));
    Ok(Outcome {
        json: json!({ "certificate": to_json(&cert), "group_level": to_json(&group), "passes": failure.is_none() }),
        text,
        failure,
    })
}

fn cmd_generators(n: usize, tol: Tolerance, seed: u64) -> Result<Outcome, Failure> {
    let report = certify_two_generation(n, tol)?;
    let study = random_pair_study(n, 5, seed, tol)?;
    let gamma = report
        .gamma
        .as_ref()
        .map(|g| g.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))
        .unwrap_or_else(|| "not required (n = 2)".into());
    let mut text = format!("two generators of s({n}, R)\n  γ = ({gamma})\n");
    let _ = writeln!(text, "  closure dims per round: {:?}", report.dims_per_round);
    let _ = writeln!(text, "  final dimension {} of {}", report.final_dim, report.target_dim);
    for (name, s) in report.stage_checks.named() {
        let _ = writeln!(text, "  [{}] {name}: rank {} of {}", if s.passes { "pass" } else { "FAIL" }, s.rank, s.expected_rank);
    }
    let _ = write!(text, "  random pairs reaching the full algebra: {} of {}", study.reached_full, study.final_dims.len());
    let failure = report.require_pass().err().map(|e| e.to_string());
    let mut json = to_json(&report);
    json["genericity_evidence"] = to_json(&study);
    Ok(Outcome { json, text, failure })
}

fn cmd_report(basis: &StochasticBasis, tol: Tolerance, seed: u64) -> Result<Outcome, Failure> {
    let n = basis.n;
    let b = cmd_basis(basis, tol)?;
    let table = verify_multiplication_table(basis, tol)?;
    let printed = verify_multiplication_table_with(basis, tol, -1.0 / (n as f64 - 1.0))?;
    let c = cmd_classify(basis, tol)?;
    let l = cmd_levi(basis, tol, seed)?;
    let g = cmd_generators(n, tol, seed)?;
    let failure = [
        b.failure.map(|f| format!("basis: {f}")),
        (!table.passes).then(|| "multiplication table".to_string()),
        c.failure.map(|f| format!("classify: {f}")),
        l.failure.map(|f| format!("levi: {f}")),
        g.failure.map(|f| format!("generators: {f}")),
    ]
    .into_iter()
    .flatten()
    .next();
    let text = format!(
        "{}\n\nmultiplication table: max residual {:.3e} ([Z,R_i] coefficient {:.6}); with -1/(n-1): {:.3e}\n\n{}\n\n{}\n\n{}",
        b.text, table.max_residual, table.z_r_coefficient, printed.max_residual, c.text, l.text, g.text
    );
    Ok(Outcome {
        json: json!({
            "n": n,
            "basis": b.json["report"],
            "multiplication_table": to_json(&table),
            "multiplication_table_printed_coefficient": to_json(&printed),
            "classify": c.json,
            "levi": l.json,
            "generators": g.json,
            "passes": failure.is_none(),
        }),
        text,
        failure,
    })
}

fn cmd_markov(command: &MarkovCommand, seed: u64) -> Result<Outcome, Failure> {
    let vtol = ValidationTolerance::default();
    match command {
        MarkovCommand::Check { file } => {
            let p = read_matrix(file)?;
            let check = check_matrix(&p, vtol)?;
            let transition = matches!(check.class, MatrixClass::S0Plus | MatrixClass::SPlus);
            let failure = (!transition).then(|| {
                let mut clauses: Vec<&str> = check.violations.iter().map(|v| v.clause).collect();
                clauses.dedup();
                clauses.join(", ")
            });
            let mut text = format!("class: {} (n = {})", check.class, check.n);
            for v in &check.violations {
                let at = match (v.row, v.col) {
                    (Some(r), Some(c)) => format!(" at ({}, {})", r + 1, c + 1),
                    (Some(r), None) => format!(" in row {}", r + 1),
                    _ => String::new(),
                };
                let _ = write!(text, "\n  {}{at}: {}", v.clause, v.value);
            }
            Ok(Outcome {
                json: to_json(&check),
                text,
                failure,
            })
        }
        MarkovCommand::Semigroup { file } => {
            let family = read_family(file, vtol)?;
            let rep = check_semigroup(&family, vtol.row_sum);
            let mut text = format!(
                "triples checked: {}\n  P(u,t)P(s,u) max deviation {:.3e}\n  P(s,u)P(u,t) max deviation {:.3e}\n  order: {}",
                rep.triples_checked, rep.written_order_max_deviation, rep.reversed_order_max_deviation, rep.order
            );
            for f in &rep.flagged {
                let _ = write!(text, "\n  flagged (s, u, t) = ({}, {}, {})", f.s, f.u, f.t);
            }
            for w in &rep.coverage_warnings {
                let _ = write!(text, "\n  warning: {w}");
            }
            Ok(Outcome {
                failure: (!rep.passes).then(|| "semigroup".to_string()),
                json: to_json(&rep),
                text,
            })
        }
        MarkovCommand::Flow { file, t } => {
            let a = GeneratorCone::new(read_matrix(file)?, vtol)?;
            let rep = flow_invariance(&a, t, vtol)?;
            let mut text = String::from("t          class    min entry    row-sum deviation");
            for p in &rep.points {
                let _ = write!(text, "\n{:<10} {:<8} {:<12.3e} {:.3e}", p.t, p.class.to_string(), p.min_entry, p.row_sum_deviation);
            }
            Ok(Outcome {
                failure: (!rep.passes).then(|| "flow invariance".to_string()),
                json: to_json(&rep),
                text,
            })
        }
        MarkovCommand::Simulate {
            file,
            steps,
            paths,
            initial,
        } => {
            let p = TransitionMatrix::new(read_matrix(file)?, vtol)?;
            let n = p.n();
            let init = DenseVector::from(initial.clone().unwrap_or_else(|| vec![1.0 / n as f64; n]));
            let rep = simulate_chain(&p, &init, *steps, *paths, seed)?;
            let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
            let mut text = format!("{paths} paths, {steps} steps, seed {seed}\nstep  empirical law / expected law");
            for (k, (l, e)) in rep.laws.iter().zip(&rep.expected_laws).enumerate() {
                let _ = write!(text, "\n{k:<5} {} / {}", fmt(l), fmt(e));
            }
            let _ = write!(text, "\nmax z-score: law {:.2}, transitions {:.2}", rep.max_law_z, rep.max_transition_z);
            Ok(Outcome {
                json: to_json(&rep),
                text,
                failure: None,
            })
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let tol = Tolerance::new(cli.tol_abs, cli.tol_rel)?;
    match &cli.command {
        Command::Basis(a) => cmd_basis(&basis_for(a.n)?, tol),
        Command::Classify(a) => cmd_classify(&basis_for(a.n)?, tol),
        Command::Levi(a) => cmd_levi(&basis_for(a.n)?, tol, cli.seed),
        Command::Generators(a) => cmd_generators(basis_for(a.n)?.n, tol, cli.seed),
        Command::Report(a) => cmd_report(&basis_for(a.n)?, tol, cli.seed),
        Command::Markov { command } => cmd_markov(command, cli.seed),
    }
}

fn emit(cli: &Cli, body: &str) -> Result<(), String> {
    match &cli.out {
        Some(path) => std::fs::write(path, format!("{body}\n")).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            println!("{body}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let body = match cli.format {
                Format::Json => {
                    let mut doc = outcome.json;
                    if let Value::Object(map) = &mut doc {
                        map.insert("failure".into(), json!(outcome.failure));
                    }
                    serde_json::to_string_pretty(&doc).expect("json")
                }
                Format::Text => outcome.text,
            };
            if let Err(e) = emit(&cli, &body) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            match outcome.failure {
                Some(clause) => {
                    eprintln!("certification failed: {clause}");
                    ExitCode::from(1)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Certification(msg)) => {
            eprintln!("certification failed: {msg}");
            ExitCode::from(1)
        }
    }
}

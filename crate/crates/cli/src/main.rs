//! `supercartan` — runs first-order Berezinian variational problems from a
//! problem file: Euler–Lagrange superequations, Poincaré–Cartan forms with an
//! equality certificate, Noether analysis of candidate symmetries, Berezin
//! integration and a seeded identity-verification suite.

use supercartan_cli::{dsl, verify};

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Parser as ClapParser, ValueEnum};
use serde_json::{json, Value};

use dsl::{parse_problem, Format, ProblemFile};
use supercartan_core::berezin::{berezin_integral_body, box_integral, BerezinSection};
use supercartan_core::jetcoords::pullback_expr;
use supercartan_core::render::{
    expr_json, expr_latex, expr_text, form_json, form_text, rational_str,
};
use supercartan_core::superalg::Rational;
use supercartan_core::varcalc::{
    euler_lagrange, noether_check, pc_form_berezinian, pc_form_intrinsic, pc_form_order1,
    Lagrangian,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliFormat {
    Text,
    Latex,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Euler–Lagrange superequations ℰ(L)_μ
    El,
    /// Poincaré–Cartan forms by all routes plus an equality certificate
    Pc,
    /// supersymmetry / Noether analysis of the declared candidate fields
    Noether,
    /// Berezin integrand (and exact box integral, when a box is given)
    Berezin,
    /// seeded identity suite on the problem chart
    Verify,
}

#[derive(ClapParser, Debug)]
#[command(
    name = "supercartan",
    about = "Symbolic engine for first-order Berezinian variational problems"
)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// problem-definition file
    file: String,
    /// output format (overrides the file's `format` statement)
    #[arg(long, value_enum)]
    format: Option<CliFormat>,
    /// seed for the randomized identity suite
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// integration box a1,b1,a2,b2,… for the base even coordinates
    #[arg(long, value_name = "BOUNDS")]
    r#box: Option<String>,
    /// accept powers of odd symbols (they are zero) instead of rejecting them
    #[arg(long)]
    allow_nilpotent: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.to_json()).unwrap());
            ExitCode::from(2)
        }
    }
}

/// Input-level failure, reported as a JSON object on stderr with exit code 2.
struct InputError {
    kind: &'static str,
    message: String,
    line: Option<u32>,
    col: Option<u32>,
}

impl InputError {
    fn to_json(&self) -> Value {
        json!({
            "schema": 1,
            "error": {
                "kind": self.kind,
                "message": self.message,
                "line": self.line,
                "col": self.col,
            }
        })
    }

    fn from_cas(e: supercartan_core::CasError) -> Self {
        InputError {
            kind: "semantic",
            message: e.to_string(),
            line: None,
            col: None,
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, InputError> {
    let src = std::fs::read_to_string(&cli.file).map_err(|e| InputError {
        kind: "io",
        message: format!("cannot read {}: {e}", cli.file),
        line: None,
        col: None,
    })?;
    let problem = parse_problem(&src, cli.allow_nilpotent).map_err(|e| InputError {
        kind: "parse",
        message: e.message,
        line: Some(e.pos.line),
        col: Some(e.pos.col),
    })?;
    let format = match cli.format {
        Some(CliFormat::Text) => Format::Text,
        Some(CliFormat::Latex) => Format::Latex,
        Some(CliFormat::Json) => Format::Json,
        None => problem.format.unwrap_or_default(),
    };
    let boxes = match &cli.r#box {
        Some(b) => Some(parse_box(b, &problem)?),
        None if !problem.boxes.is_empty() => Some(problem.boxes.clone()),
        None => None,
    };

    let lag = Lagrangian::new(&problem.ctx, problem.lagrangian.clone())
        .map_err(InputError::from_cas)?;

    match cli.command {
        Command::El => {
            let el = euler_lagrange(&lag);
            let names = &problem.names;
            match format {
                Format::Json => {
                    let comps: Value = el
                        .components
                        .iter()
                        .map(|(mu, e)| (names.fiber_name(*mu).to_string(), expr_json(e, names)))
                        .collect::<serde_json::Map<String, Value>>()
                        .into();
                    emit(json!({"schema": 1, "command": "el", "euler_lagrange": comps}));
                }
                Format::Text => {
                    for (mu, e) in &el.components {
                        println!("E[{}] = {}", names.fiber_name(*mu), expr_text(e, names));
                    }
                }
                Format::Latex => {
                    for (mu, e) in &el.components {
                        println!(
                            "\\mathcal{{E}}(L)_{{{}}} = {}",
                            names.fiber_name(*mu),
                            expr_latex(e, names)
                        );
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Pc => {
            let theta0 = pc_form_order1(&lag);
            let theta = pc_form_berezinian(&lag);
            let theta_tilde = pc_form_intrinsic(&lag);
            let certified = theta == theta_tilde;
            let names = &problem.names;
            match format {
                Format::Json => emit(json!({
                    "schema": 1,
                    "command": "pc",
                    "theta0": form_json(&theta0, names),
                    "theta": form_json(&theta, names),
                    "theta_intrinsic": form_json(&theta_tilde, names),
                    "certificate_theta_equals_intrinsic": certified,
                })),
                Format::Text => {
                    println!("Theta0   = {}", form_text(&theta0, names));
                    println!("Theta    = {}", form_text(&theta, names));
                    println!("ThetaInt = {}", form_text(&theta_tilde, names));
                    println!(
                        "certificate: Theta == ThetaInt: {}",
                        if certified { "PASS" } else { "FAIL" }
                    );
                }
                Format::Latex => {
                    let ctx = &problem.ctx;
                    println!(
                        "\\Theta_0^L = {}",
                        supercartan_core::render::form_latex_contact(ctx, &theta0, names)
                    );
                    println!(
                        "\\Theta^L = {}",
                        supercartan_core::render::form_latex_contact(ctx, &theta, names)
                    );
                    println!(
                        "\\tilde\\Theta^L = {}",
                        supercartan_core::render::form_latex_contact(ctx, &theta_tilde, names)
                    );
                    println!("% certificate: {}", if certified { "PASS" } else { "FAIL" });
                }
            }
            Ok(if certified {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Noether => {
            let names = &problem.names;
            let mut all = Vec::new();
            let mut text_lines = Vec::new();
            for (name, field) in &problem.symmetries {
                let report = noether_check(&lag, field).map_err(InputError::from_cas)?;
                let current_json = report
                    .current
                    .as_ref()
                    .map(|c| form_json(c, names))
                    .unwrap_or(Value::Null);
                text_lines.push(format!(
                    "{name}: supersymmetry={} noether={} div_B={} div_G={}{}",
                    report.is_supersymmetry,
                    report.is_noether,
                    expr_text(&report.berezinian_divergence, names),
                    report
                        .graded_divergence
                        .as_ref()
                        .map(|g| expr_text(g, names))
                        .unwrap_or_else(|| "does not exist".into()),
                    report
                        .current
                        .as_ref()
                        .map(|c| format!(" current={}", form_text(c, names)))
                        .unwrap_or_default()
                ));
                all.push(json!({
                    "name": name,
                    "supersymmetry": report.is_supersymmetry,
                    "noether": report.is_noether,
                    "divergences_match": report.divergences_match,
                    "berezinian_divergence": expr_json(&report.berezinian_divergence, names),
                    "graded_divergence": report
                        .graded_divergence
                        .as_ref()
                        .map(|g| expr_json(g, names))
                        .unwrap_or(Value::Null),
                    "current": current_json,
                }));
            }
            match format {
                Format::Json => emit(json!({"schema": 1, "command": "noether", "candidates": all})),
                _ => {
                    for line in text_lines {
                        println!("{line}");
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Berezin => {
            let names = &problem.names;
            let needs_section = lag.expr.coords().iter().any(|c| !c.is_base());
            let mut items = Vec::new();
            if needs_section {
                if problem.sections.is_empty() {
                    return Err(InputError {
                        kind: "semantic",
                        message: "the Lagrangian depends on fiber/jet coordinates; declare a \
                                  section to pull it back for Berezin integration"
                            .into(),
                        line: None,
                        col: None,
                    });
                }
                for (name, sec) in &problem.sections {
                    let body = pullback_expr(sec, &lag.expr);
                    items.push((Some(name.clone()), body));
                }
            } else {
                items.push((None, lag.expr.clone()));
            }
            let mut out = Vec::new();
            let mut lines = Vec::new();
            for (name, body) in items {
                let section = BerezinSection::new(&problem.ctx, body, 0);
                let integrand = berezin_integral_body(&section).map_err(InputError::from_cas)?;
                let integral: Option<Rational> = match &boxes {
                    Some(b) => {
                        Some(box_integral(&problem.ctx, &integrand, b).map_err(InputError::from_cas)?)
                    }
                    None => None,
                };
                lines.push(format!(
                    "{}integrand = {}{}",
                    name.as_ref().map(|n| format!("{n}: ")).unwrap_or_default(),
                    expr_text(&integrand.coeff, names),
                    integral
                        .as_ref()
                        .map(|q| format!("  box integral = {}", rational_str(q)))
                        .unwrap_or_default()
                ));
                out.push(json!({
                    "section": name,
                    "integrand": expr_json(&integrand.coeff, names),
                    "box_integral": integral.as_ref().map(rational_str),
                }));
            }
            match format {
                Format::Json => emit(json!({"schema": 1, "command": "berezin", "results": out})),
                _ => {
                    for line in lines {
                        println!("{line}");
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify => {
            let outcomes = verify::run_suite(&problem, &lag, cli.seed);
            let all_pass = outcomes.iter().all(|o| o.pass);
            match format {
                Format::Json => {
                    let checks: Vec<Value> = outcomes
                        .iter()
                        .map(|o| json!({"name": o.name, "pass": o.pass, "detail": o.detail}))
                        .collect();
                    emit(json!({
                        "schema": 1,
                        "command": "verify",
                        "seed": cli.seed,
                        "pass": all_pass,
                        "checks": checks,
                    }));
                }
                _ => {
                    for o in &outcomes {
                        println!(
                            "[{}] {}{}",
                            if o.pass { "PASS" } else { "FAIL" },
                            o.name,
                            o.detail
                                .as_ref()
                                .map(|d| format!(" — {d}"))
                                .unwrap_or_default()
                        );
                    }
                    println!(
                        "verify: {}",
                        if all_pass { "all checks passed" } else { "FAILURES" }
                    );
                }
            }
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn emit(v: Value) {
    println!("{}", serde_json::to_string(&v).unwrap());
}

fn parse_box(
    bounds_spec: &str,
    problem: &ProblemFile,
) -> Result<BTreeMap<u16, (Rational, Rational)>, InputError> {
    let parts: Vec<&str> = bounds_spec.split(',').collect();
    let m = problem.ctx.m as usize;
    if parts.len() != 2 * m {
        return Err(InputError {
            kind: "semantic",
            message: format!(
                "--box needs {} comma-separated bounds for {} base even coordinate(s)",
                2 * m,
                m
            ),
            line: None,
            col: None,
        });
    }
    let parse_q = |s: &str| -> Result<Rational, InputError> {
        let s = s.trim();
        let parse_int = |t: &str| -> Result<num_bigint::BigInt, InputError> {
            t.parse().map_err(|_| InputError {
                kind: "semantic",
                message: format!("invalid bound `{s}`"),
                line: None,
                col: None,
            })
        };
        if let Some((num, den)) = s.split_once('/') {
            Ok(Rational::new(parse_int(num)?, parse_int(den)?))
        } else {
            Ok(Rational::from(parse_int(s)?))
        }
    };
    let mut out = BTreeMap::new();
    for i in 0..m {
        let lo = parse_q(parts[2 * i])?;
        let hi = parse_q(parts[2 * i + 1])?;
        out.insert((i + 1) as u16, (lo, hi));
    }
    Ok(out)
}

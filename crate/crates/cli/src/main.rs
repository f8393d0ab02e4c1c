use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use weiltriple::arith::{parse_rational, rational_to_string};
use weiltriple::local_integral::{
    abs_integral_bound_check, basic_cutoff, i_closed_terms, i_oracle_report, CellFunction, PointV,
};
use weiltriple::orbit_ff::{orbit_decompose, xpoints_decompose, OrbitReport, XReport};
use weiltriple::padic::hilbert_symbol;
use weiltriple::schwartz::{SchwartzFn, WeilRep};
use weiltriple::symplectic::{basic_b, iwasawa_cell, plucker, plucker_norm, PluckerVector, Sp6};
use weiltriple::verify::{self, Suite, VerifyConfig};
use weiltriple::{Mat, PAdicContext, QuadTriple, QuadraticSpace, Sl2};

/// Exact p-adic computations on three quadratic spaces and Sp6.
///
/// JSON arguments may be given inline or as a path to a file.
#[derive(Parser, Debug)]
#[command(name = "weiltriple", version)]
struct RunConfig {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for parallel batteries (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for every randomized sample.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Closed,
    Oracle,
    Compare,
    Bound,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hilbert symbol (a, b)_p.
    Hilbert {
        a: String,
        b: String,
        #[arg(long)]
        p: u64,
    },
    /// Apply ρ(g) to a Schwartz function on a quadratic space.
    WeilApply {
        /// Quadratic space {"d": n, "J": [[..]]}.
        #[arg(long)]
        form: String,
        /// 2×2 matrix of determinant one.
        #[arg(long)]
        g: String,
        /// Schwartz function in the library's JSON format.
        #[arg(long)]
        f: String,
    },
    /// Iwasawa cell and basic function value of g ∈ Sp₆.
    BasicB {
        #[arg(long)]
        g: String,
        #[arg(long)]
        p: u64,
    },
    /// Plücker coordinates of g ∈ Sp₆ (or of a 3×6 matrix of rows).
    Plucker {
        #[arg(long)]
        g: String,
        #[arg(long)]
        p: Option<u64>,
    },
    /// Unramified local integral at a point of the smooth locus.
    LocalIntegral {
        #[arg(long)]
        p: u64,
        /// Cyclotomic depth K for the oracle's character values.
        #[arg(long = "K", default_value_t = 1)]
        k: u32,
        /// Three quadratic spaces.
        #[arg(long)]
        forms: String,
        /// Point [[v1], [v2], [v3]] with rational entries.
        #[arg(long)]
        point: String,
        #[arg(long, value_enum, default_value_t = Method::Compare)]
        method: Method,
        /// Cell function {"cell": "value", ..} for the oracle; defaults to the basic function.
        #[arg(long)]
        f1: Option<String>,
    },
    /// Orbits of SL₂(F_q)³ on the Lagrangians of F_q⁶.
    Orbits {
        #[arg(long)]
        q: u8,
        /// Report format; overrides --format.
        #[arg(long, value_enum)]
        report: Option<Format>,
        /// Also decompose X(F_q) and compare with the Lagrangian orbits.
        #[arg(long)]
        x: bool,
    },
    /// Run verification suites.
    Verify {
        /// Suite name, repeatable; all suites when omitted.
        #[arg(long)]
        suite: Vec<String>,
        /// Restrict p-adic suites to these primes, repeatable.
        #[arg(long)]
        p: Vec<u64>,
    },
}

/// Malformed input or a computation that cannot be carried out.
enum Failure {
    Usage(String),
}

impl From<weiltriple::Error> for Failure {
    fn from(e: weiltriple::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = Result<Output, Failure>;

struct Output {
    json: Value,
    table: String,
    ok: bool,
}

fn read_arg(s: &str) -> Result<String, Failure> {
    let t = s.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return Ok(s.to_string());
    }
    fs::read_to_string(s).map_err(|e| Failure::Usage(format!("{s}: {e}")))
}

/// Numbers become strings so that matrices and points accept both.
fn stringify_numbers(v: Value) -> Value {
    match v {
        Value::Number(n) => Value::String(n.to_string()),
        Value::Array(xs) => Value::Array(xs.into_iter().map(stringify_numbers).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, x)| (k, stringify_numbers(x))).collect()),
        x => x,
    }
}

fn parse_json<T: DeserializeOwned>(s: &str, what: &str, numbers_as_strings: bool) -> Result<T, Failure> {
    let text = read_arg(s)?;
    let mut v: Value = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{what}: {e}")))?;
    if numbers_as_strings {
        v = stringify_numbers(v);
    }
    serde_json::from_value(v).map_err(|e| Failure::Usage(format!("{what}: {e}")))
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn cmd_hilbert(a: &str, b: &str, p: u64) -> CmdResult {
    let (x, y) = (parse_rational(a)?, parse_rational(b)?);
    let h = hilbert_symbol(&x, &y, p)?;
    Ok(Output {
        json: json!({ "a": rational_to_string(&x), "b": rational_to_string(&y), "p": p, "symbol": h }),
        table: format!("{h}"),
        ok: true,
    })
}

fn cmd_weil_apply(form: &str, g: &str, f: &str) -> CmdResult {
    let space: QuadraticSpace = parse_json(form, "form", false)?;
    let g: Sl2 = parse_json(g, "g", true)?;
    let f = SchwartzFn::from_json(&read_arg(f)?)?;
    let r = WeilRep::new(f.ctx(), &space)?;
    let out = r.apply(&g, &f)?;
    let table = out
        .support()
        .iter()
        .map(|(x, v)| {
            let xs: Vec<String> = x.iter().map(rational_to_string).collect();
            format!("[{}]\t{}", xs.join(", "), serde_json::to_string(v).expect("values serialize"))
        })
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Output { json: to_value(&out), table, ok: true })
}

fn cmd_basic_b(g: &str, p: u64) -> CmdResult {
    let g: Sp6 = parse_json(g, "g", true)?;
    let cell = iwasawa_cell(&g, p);
    let b = basic_b(&g, p);
    let norm = plucker_norm(&g, p);
    Ok(Output {
        json: json!({ "p": p, "cell": cell, "norm": rational_to_string(&norm), "b": rational_to_string(&b) }),
        table: format!("cell\t{cell}\nnorm\t{}\nb\t{}", rational_to_string(&norm), rational_to_string(&b)),
        ok: true,
    })
}

fn cmd_plucker(g: &str, p: Option<u64>) -> CmdResult {
    let m: Mat = parse_json(g, "g", true)?;
    let v = match (m.rows(), m.cols()) {
        (6, 6) => plucker(&Sp6::new(m)?),
        (3, 6) => PluckerVector::of_rows(&m)?,
        (r, c) => return Err(Failure::Usage(format!("expected a 6×6 or 3×6 matrix, got {r}×{c}"))),
    };
    let mut json = json!({ "coordinates": to_value(&v) });
    let mut table: Vec<String> = v.labelled().iter().map(|(l, x)| format!("{l}\t{}", rational_to_string(x))).collect();
    if let Some(p) = p {
        let mv = v.min_valuation(p).finite();
        json["min_valuation"] = json!(mv);
        table.push(format!("min_valuation\t{}", mv.map_or("inf".to_string(), |x| x.to_string())));
    }
    Ok(Output { json, table: table.join("\n"), ok: true })
}

fn cmd_local_integral(p: u64, k: u32, forms: &str, point: &str, method: Method, f1: Option<&str>) -> CmdResult {
    let t: QuadTriple = parse_json(forms, "forms", false)?;
    let v: PointV = parse_json(point, "point", true)?;
    let ctx = PAdicContext::new(p, k)?;
    let f1 = match f1 {
        Some(s) => parse_json::<CellFunction>(s, "f1", true)?,
        None => CellFunction::basic(p, basic_cutoff(&v, p)),
    };
    let start = Instant::now();
    let (json, table, ok) = match method {
        Method::Closed => {
            let c = i_closed_terms(&v, &t, &ctx)?;
            let value = rational_to_string(&c.value);
            let j = json!({
                "value": value,
                "terms": to_value(&c.terms),
                "truncation": { "basic_cutoff": basic_cutoff(&v, p) },
                "elapsed_ms": start.elapsed().as_millis() as u64,
            });
            (j, format!("closed\t{value}"), true)
        }
        Method::Oracle => {
            let r = i_oracle_report(&v, &t, &f1, &ctx)?;
            let value = rational_to_string(&r.value);
            let j = json!({
                "value": value,
                "terms": to_value(&r.terms),
                "truncation": { "e_box": r.e_box },
                "elapsed_ms": start.elapsed().as_millis() as u64,
            });
            (j, format!("oracle\t{value}"), true)
        }
        Method::Compare => {
            let c = i_closed_terms(&v, &t, &ctx)?.value;
            let o = i_oracle_report(&v, &t, &CellFunction::basic(p, basic_cutoff(&v, p)), &ctx)?.value;
            let (cs, os) = (rational_to_string(&c), rational_to_string(&o));
            let j = json!({ "closed": cs, "oracle": os, "equal": c == o });
            (j, format!("closed\t{cs}\noracle\t{os}\nequal\t{}", c == o), c == o)
        }
        Method::Bound => {
            let r = abs_integral_bound_check(&v, &t, &ctx)?;
            let table = format!(
                "integral\t{}\nbound\t{}\nholds\t{}",
                rational_to_string(&r.integral),
                rational_to_string(&r.bound),
                r.holds
            );
            (to_value(&r), table, r.holds)
        }
    };
    Ok(Output { json, table, ok })
}

#[derive(Serialize)]
struct OrbitsOut {
    #[serde(flatten)]
    lagrangians: OrbitReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    x_points: Option<XReport>,
}

fn cmd_orbits(q: u8, x: bool) -> CmdResult {
    let r = orbit_decompose(q)?;
    let xr = if x { Some(xpoints_decompose(q)?) } else { None };
    let mut table = vec![format!("q = {q}, {} Lagrangians, |G| = {}", r.lagrangian_count, r.group_order)];
    table.push("label\tsize\tstabilizer".into());
    for o in &r.orbits {
        table.push(format!("{}\t{}\t{}", o.label, o.size, o.stabilizer_order));
    }
    let mut ok = r.consistent();
    if let Some(xr) = &xr {
        table.push(format!("X: {} points, bijective: {}", xr.x_count, xr.bijective));
        for o in &xr.x_orbits {
            table.push(format!("{}\t{}\t{}", o.label, o.size, o.stabilizer_order));
        }
        ok &= xr.bijective;
    }
    Ok(Output { json: to_value(&OrbitsOut { lagrangians: r, x_points: xr }), table: table.join("\n"), ok })
}

fn cmd_verify(suites: &[String], primes: &[u64], seed: u64) -> CmdResult {
    let suites = if suites.is_empty() || suites.iter().any(|s| s == "all") {
        Suite::ALL.to_vec()
    } else {
        suites.iter().map(|s| s.parse()).collect::<weiltriple::Result<Vec<Suite>>>()?
    };
    let cfg = VerifyConfig { seed, suites, primes: (!primes.is_empty()).then(|| primes.to_vec()) };
    let report = verify::run(&cfg);
    let mut table = Vec::new();
    for s in &report.suites {
        for c in &s.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            table.push(format!("{status}\t{}/{}\t{} cases", s.suite, c.name, c.cases));
        }
    }
    if !report.passed {
        let ce = report.first_counterexample().unwrap_or(Value::Null);
        eprintln!("{}", serde_json::to_string(&ce).expect("values serialize"));
    }
    let json: Value = serde_json::from_str(&report.to_json()).expect("report is valid JSON");
    Ok(Output { json, table: table.join("\n"), ok: report.passed })
}

fn dispatch(cfg: &RunConfig) -> CmdResult {
    match &cfg.command {
        Command::Hilbert { a, b, p } => cmd_hilbert(a, b, *p),
        Command::WeilApply { form, g, f } => cmd_weil_apply(form, g, f),
        Command::BasicB { g, p } => cmd_basic_b(g, *p),
        Command::Plucker { g, p } => cmd_plucker(g, *p),
        Command::LocalIntegral { p, k, forms, point, method, f1 } => {
            cmd_local_integral(*p, *k, forms, point, *method, f1.as_deref())
        }
        Command::Orbits { q, x, .. } => cmd_orbits(*q, *x),
        Command::Verify { suite, p } => cmd_verify(suite, p, cfg.seed),
    }
}

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    let format = match &cfg.command {
        Command::Orbits { report: Some(f), .. } => *f,
        _ => cfg.format,
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| dispatch(&cfg)) {
        Ok(out) => {
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.json).expect("values serialize")),
                Format::Table => println!("{}", out.table),
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

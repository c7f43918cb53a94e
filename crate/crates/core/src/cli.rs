//! Batch front end: one subcommand per computation, JSON in and JSON out.
//!
//! Exit codes: 0 on success, 2 with an error document on domain errors (and on
//! a failing selftest), 1 on malformed arguments or input.

use std::ffi::OsString;
use std::io::Read;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::Error;
use crate::mckay::{build_group, mckay_quiver, Family, WreathGroup};
use crate::ncalg::{comoment_check, molien_dim, AlgebraCtx};
use crate::params::{build_upsilon, build_upsilon0};
use crate::quiver::{sample_lambda, usize_vec, FramedQuiver, QuiverRep};
use crate::roots::{cb_flatness_check, weight_multiplicity, CartanData};
use crate::scalars::{JsonScalar, Rational};
use crate::selftest::{self, SelftestOptions};
use crate::typea::{build_typea, flag_iso_e0, maffei_lift, maffei_verify, sample_lambda0, slodowy_slice, symplectic_pullback_check, BlockRep, TypeAData};

pub const DEFAULT_SEED: u64 = 0;

#[derive(Parser, Debug)]
#[command(name = "quivred", version, about = "Exact quiver, McKay, SRA and type-A slice computations")]
pub struct Cli {
    /// Seed for every sampler.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Character table and McKay quiver of a finite subgroup of SL2.
    Mckay {
        #[arg(long)]
        family: String,
        #[arg(long)]
        m: Option<u32>,
    },
    /// Root-decomposition inequality for a framed quiver: {"quiver", "v", "strict"?}.
    CbCheck {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Weight multiplicity: {"cartan" | "quiver", "d", "v"}.
    Multiplicity {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Confluence and graded dimensions of the wreath-product algebra.
    SraCheck {
        #[arg(long)]
        family: String,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        degree: usize,
    },
    /// Quantum comoment identities: {"quiver", "v"}.
    ComomentCheck {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Transversal lift: {"n", "N", "r", "d", "rep"?}; a missing rep is sampled.
    MaffeiLift {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Checks a lift: {"n", "N", "r", "d", "rep", "lift": {"A_tilde", "B_tilde"}}.
    MaffeiVerify {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Flag map for d = (N, 0, …): {"n", "N", "r", "rep"?}.
    FlagIso {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Slodowy slice at a nilpotent of the given Jordan type.
    Slodowy {
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',')]
        partition: Vec<usize>,
    },
    /// Parameter map upsilon (wreath, n > 1) or upsilon0 (n = 1).
    ParamsMap {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        family: String,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Reflection functor: {"quiver", "v", "chi", "vertex", "rep"?}.
    Reflect {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Symplectic pullback under the lift: {"n", "N", "r", "d", "rep"?, "trials"?}.
    PullbackCheck {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Runs the acceptance suite.
    Selftest {
        #[arg(long)]
        filter: Option<String>,
        #[arg(long)]
        corrupt_table: bool,
        #[arg(long)]
        corrupt_relations: bool,
        /// Print the report as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

enum Failure {
    Malformed(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

/// Errors raised while reading input count as malformed input.
fn parsed<T>(r: crate::error::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Malformed(format!("{}: {e}", e.kind())))
}

fn read_input(path: &Option<PathBuf>) -> Result<Value, Failure> {
    let text = match path {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p).map_err(|e| Failure::Malformed(format!("cannot read {}: {e}", p.display())))?,
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Malformed(format!("cannot read stdin: {e}")))?;
            s
        }
    };
    serde_json::from_str(&text).map_err(|e| Failure::Malformed(format!("invalid JSON: {e}")))
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, Failure> {
    v.get(key).ok_or_else(|| Failure::Malformed(format!("missing field \"{key}\"")))
}

fn usizes(v: &Value, key: &str) -> Result<Vec<usize>, Failure> {
    parsed(usize_vec(field(v, key)?, key))
}

fn count(v: &Value, key: &str) -> Result<usize, Failure> {
    field(v, key)?.as_u64().map(|x| x as usize).ok_or_else(|| Failure::Malformed(format!("\"{key}\" must be a nonnegative integer")))
}

fn i64s(v: &Value, key: &str) -> Result<Vec<i64>, Failure> {
    field(v, key)?
        .as_array()
        .and_then(|a| a.iter().map(Value::as_i64).collect::<Option<Vec<_>>>())
        .ok_or_else(|| Failure::Malformed(format!("\"{key}\" must be a list of integers")))
}

fn family(name: &str, m: Option<u32>) -> Result<Family, Failure> {
    parsed(Family::parse(name, m))
}

fn typea_data(v: &Value, e0: bool) -> Result<TypeAData, Failure> {
    let n = count(v, "n")?;
    let big_n = count(v, "N")?;
    let r = usizes(v, "r")?;
    let d = if e0 && v.get("d").is_none() {
        let mut d = vec![0; n.saturating_sub(1)];
        if let Some(first) = d.first_mut() {
            *first = big_n;
        }
        d
    } else {
        usizes(v, "d")?
    };
    Ok(build_typea(n, big_n, &r, &d)?)
}

fn rep_or_sample(v: &Value, data: &TypeAData, seed: u64) -> Result<QuiverRep<Rational>, Failure> {
    match v.get("rep") {
        Some(r) => parsed(QuiverRep::from_json(r)),
        None => Ok(sample_lambda0(data, seed)?),
    }
}

fn execute(cli: &Cli) -> Result<(String, Value), Failure> {
    let seed = cli.seed;
    let out = match &cli.command {
        Command::Mckay { family: f, m } => {
            let g = build_group(family(f, *m)?)?;
            let (q, order) = mckay_quiver(&g)?;
            let mut doc = g.to_json();
            doc["quiver"] = q.to_json();
            doc["quiver_vertex_order"] = json!(order);
            ("mckay", doc)
        }
        Command::CbCheck { input } => {
            let v = read_input(input)?;
            let q = parsed(FramedQuiver::from_json(field(&v, "quiver")?))?;
            let dims = usizes(&v, "v")?;
            let strict = v.get("strict").and_then(Value::as_bool).unwrap_or(true);
            ("cb-check", cb_flatness_check(&q, &dims, strict)?.to_json())
        }
        Command::Multiplicity { input } => {
            let v = read_input(input)?;
            let cartan = match (v.get("cartan"), v.get("quiver")) {
                (Some(c), _) => {
                    let rows: Option<Vec<Vec<i64>>> = c.as_array().and_then(|rows| rows.iter().map(|r| r.as_array()?.iter().map(Value::as_i64).collect()).collect());
                    parsed(CartanData::from_matrix(rows.ok_or_else(|| Failure::Malformed("\"cartan\" must be an integer matrix".into()))?))?
                }
                (None, Some(q)) => parsed(CartanData::from_quiver(&parsed(FramedQuiver::from_json(q))?.base))?,
                (None, None) => return Err(Failure::Malformed("need \"cartan\" or \"quiver\"".into())),
            };
            let d = i64s(&v, "d")?;
            let dims = i64s(&v, "v")?;
            let m = weight_multiplicity(&cartan, &d, &dims)?;
            ("multiplicity", json!({"d": d, "v": dims, "multiplicity": m, "cartan_type": cartan.kind.label()}))
        }
        Command::SraCheck { family: f, m, n, degree } => {
            let w = WreathGroup::new(*n, build_group(family(f, *m)?)?)?;
            let alg = AlgebraCtx::sra(&w)?;
            let report = alg.confluence_check((*degree).max(3));
            let mut rows = Vec::new();
            if report.passed {
                for d in 0..=*degree {
                    rows.push(json!({
                        "degree": d,
                        "graded_dimension": alg.graded_dimension(d)?,
                        "spherical_dimension": alg.spherical_dimension(d)?,
                        "molien": molien_dim(alg.group_matrices(), d)?,
                    }));
                }
            }
            ("sra-check", json!({"n": n, "group_order": w.order(), "confluence": report.to_json(), "dimensions": rows}))
        }
        Command::ComomentCheck { input } => {
            let v = read_input(input)?;
            let q = parsed(FramedQuiver::from_json(field(&v, "quiver")?))?;
            ("comoment-check", comoment_check(&q, &usizes(&v, "v")?)?.to_json())
        }
        Command::MaffeiLift { input } => {
            let v = read_input(input)?;
            let data = typea_data(&v, false)?;
            let x = rep_or_sample(&v, &data, seed)?;
            let lift = maffei_lift(&x, &data)?;
            ("maffei-lift", json!({"data": data.to_json(), "rep": x.to_json(), "lift": lift.to_json()}))
        }
        Command::MaffeiVerify { input } => {
            let v = read_input(input)?;
            let data = typea_data(&v, false)?;
            let x = parsed(QuiverRep::from_json(field(&v, "rep")?))?;
            let lift = parsed(BlockRep::<Rational>::from_json(field(&v, "lift")?, &data))?;
            ("maffei-verify", maffei_verify(&lift, &x)?.to_json())
        }
        Command::FlagIso { input } => {
            let v = read_input(input)?;
            let data = typea_data(&v, true)?;
            let x = rep_or_sample(&v, &data, seed)?;
            ("flag-iso", json!({"rep": x.to_json(), "result": flag_iso_e0(&x, &data)?.to_json()}))
        }
        Command::Slodowy { n, partition } => ("slodowy", slodowy_slice(*n, partition)?.to_json()),
        Command::ParamsMap { kind, family: f, m, n } => {
            let g = build_group(family(f, *m)?)?;
            let map = match kind.as_str() {
                "upsilon" => build_upsilon(&g, *n)?,
                "upsilon0" => build_upsilon0(&g)?,
                other => return Err(Failure::Malformed(format!("unknown map kind {other:?}; use upsilon or upsilon0"))),
            };
            ("params-map", json!({"kind": kind, "family": g.family.label(), "map": map.to_json()}))
        }
        Command::Reflect { input } => {
            let v = read_input(input)?;
            let chi = field(&v, "chi")?
                .as_array()
                .ok_or_else(|| Failure::Malformed("\"chi\" must be a list".into()))?
                .iter()
                .map(|c| parsed(Rational::from_json(c)))
                .collect::<Result<Vec<_>, _>>()?;
            let vertex = count(&v, "vertex")?;
            let rep = match v.get("rep") {
                Some(r) => parsed(QuiverRep::from_json(r))?,
                None => {
                    let q = parsed(FramedQuiver::from_json(field(&v, "quiver")?))?;
                    sample_lambda(&q, &usizes(&v, "v")?, &chi, seed)?
                }
            };
            let (out, new_chi) = crate::quiver::reflect(&rep, vertex, &chi)?;
            ("reflect", json!({"rep": out.to_json(), "chi": new_chi.iter().map(JsonScalar::to_json).collect::<Vec<_>>()}))
        }
        Command::PullbackCheck { input } => {
            let v = read_input(input)?;
            let data = typea_data(&v, false)?;
            let x = rep_or_sample(&v, &data, seed)?;
            let trials = v.get("trials").and_then(Value::as_u64).unwrap_or(3) as usize;
            let report = symplectic_pullback_check(&x, &data, trials, seed)?;
            ("pullback-check", json!({"pairs": report.pairs, "mismatches": report.mismatches, "passed": report.mismatches == 0}))
        }
        Command::Selftest { .. } => unreachable!("handled by run"),
    };
    Ok((out.0.to_string(), out.1))
}

fn with_schema(name: &str, mut doc: Value) -> Value {
    match doc.as_object_mut() {
        Some(map) => {
            map.insert("schema".into(), json!(format!("quivred/{name}/v1")));
            doc
        }
        None => json!({"schema": format!("quivred/{name}/v1"), "result": doc}),
    }
}

fn render(doc: &Value) -> String {
    serde_json::to_string_pretty(doc).expect("values serialize") + "\n"
}

/// Parses arguments and runs one job. Returns the exit code and stdout text;
/// argument errors are returned as text with exit code 1 (0 for help).
pub fn run<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            return (code, e.to_string());
        }
    };
    if let Command::Selftest { filter, corrupt_table, corrupt_relations, json } = &cli.command {
        let opts = SelftestOptions { seed: cli.seed, corrupt_table: *corrupt_table, corrupt_relations: *corrupt_relations, filter: filter.clone() };
        let results = selftest::run(&opts);
        let code = if results.iter().all(|r| r.passed) { 0 } else { 2 };
        let text = if *json { render(&with_schema("selftest", selftest::report_json(&results))) } else { selftest::table(&results) };
        return (code, text);
    }
    match execute(&cli) {
        Ok((name, doc)) => (0, render(&with_schema(&name, doc))),
        Err(Failure::Domain(e)) => (2, render(&json!({"schema": "quivred/error/v1", "error": {"kind": e.kind(), "message": e.to_string()}}))),
        Err(Failure::Malformed(msg)) => (1, render(&json!({"schema": "quivred/error/v1", "error": {"kind": "MalformedInput", "message": msg}}))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, Value) {
        let (code, text) = run(std::iter::once("quivred").chain(args.iter().copied()));
        (code, serde_json::from_str(&text).unwrap_or(Value::Null))
    }

    fn with_file(doc: Value, args: &[&str]) -> (i32, Value) {
        let dir = std::env::temp_dir().join(format!("quivred-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(format!("{}.json", args[0]));
        std::fs::write(&path, doc.to_string()).unwrap();
        let mut full: Vec<&str> = args.to_vec();
        let p = path.to_str().unwrap().to_string();
        full.push("--input");
        full.push(&p);
        call(&full)
    }

    #[test]
    fn mckay_cyclic2() {
        let (code, doc) = call(&["mckay", "--family", "cyclic", "--m", "2"]);
        assert_eq!(code, 0);
        assert_eq!(doc["schema"], "quivred/mckay/v1");
        assert_eq!(doc["delta"], json!([1, 1]));
        assert_eq!(doc["mckay"]["adjacency"], json!([[0, 2], [2, 0]]));
    }

    #[test]
    fn params_map_upsilon0() {
        let (code, doc) = call(&["params-map", "--kind", "upsilon0", "--family", "cyclic", "--m", "2"]);
        assert_eq!(code, 0);
        assert_eq!(doc["map"]["matrix"], json!([["1/1", "1/1"], ["0/1", "1/2"], ["0/1", "-1/2"]]));
        assert_eq!(doc["map"]["inverse_verified"], true);
    }

    #[test]
    fn cb_check_fixture() {
        let input = json!({"quiver": {"vertices": 2, "arrows": [[0, 1], [0, 1]], "framing": [1, 0]}, "v": [1, 1]});
        let (code, doc) = with_file(input, &["cb-check"]);
        assert_eq!(code, 0);
        assert_eq!(doc["nonstrict"], true);
    }

    #[test]
    fn exit_codes() {
        let (code, doc) = call(&["slodowy", "--n", "3", "--partition", "1,2"]);
        assert_eq!((code, doc["error"]["kind"].as_str()), (2, Some("InvalidPartition")));
        let (code, doc) = with_file(json!({"quiver": 3}), &["comoment-check"]);
        assert_eq!((code, doc["error"]["kind"].as_str()), (1, Some("MalformedInput")));
        assert_eq!(run(["quivred", "no-such-command"]).0, 1);
    }

    #[test]
    fn lift_then_verify_round_trip() {
        let spec = json!({"n": 3, "N": 4, "r": [2, 1, 1], "d": [2, 1]});
        let (code, lifted) = with_file(spec.clone(), &["maffei-lift"]);
        assert_eq!(code, 0);
        let mut input = spec;
        input["rep"] = lifted["rep"].clone();
        input["lift"] = lifted["lift"].clone();
        let (code, report) = with_file(input.clone(), &["maffei-verify"]);
        assert_eq!((code, report["passed"].as_bool()), (0, Some(true)));
        input["lift"]["A_tilde"][0][0][0] = json!("5");
        let (_, report) = with_file(input, &["maffei-verify"]);
        assert_eq!(report["passed"], false);
    }

    #[test]
    fn deterministic_output() {
        let spec = json!({"n": 3, "N": 4, "r": [2, 1, 1], "d": [2, 1]});
        let a = with_file(spec.clone(), &["maffei-lift", "--seed", "5"]);
        let b = with_file(spec, &["maffei-lift", "--seed", "5"]);
        assert_eq!(a, b);
    }
}

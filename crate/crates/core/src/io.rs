//! Instance, scheme and report files.
//!
//! Reports are written by hand rather than through serde so key order and the
//! 17-significant-digit number format stay fixed.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::instance::{validate_instance, Instance, JointPrior, OutcomeSpaces, SignalingScheme};
use crate::report::{CheckReport, Classification, Diagnostics, Method, SolveReport};
use crate::scoring::{HolderParams, Piece, ScoreRule, ScoreSpec};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    events: Vec<String>,
    alice_signals: Vec<String>,
    bob_signals: Vec<String>,
    prior: Vec<Vec<Vec<f64>>>,
    score: ScoreFile,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScoreFile {
    kind: String,
    #[serde(default)]
    pieces: Option<Vec<PieceFile>>,
    #[serde(default)]
    holder: Option<HolderFile>,
    #[serde(default, rename = "L")]
    bound: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PieceFile {
    r: Vec<f64>,
    b: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HolderFile {
    alpha: f64,
    beta: f64,
    c: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeFile {
    signals: Vec<String>,
    pi: Vec<Vec<f64>>,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string().replace("unknown field", "unknown key"))
}

fn score_from_file(f: ScoreFile) -> Result<ScoreSpec> {
    let rule = match (f.kind.as_str(), f.pieces) {
        ("quadratic", None) => ScoreRule::Quadratic,
        ("log", None) => ScoreRule::Log,
        ("spherical", None) => ScoreRule::Spherical,
        ("piecewise", Some(p)) => ScoreRule::PiecewiseLinear(p.into_iter().map(|x| Piece::new(x.r, x.b)).collect()),
        ("piecewise", None) => return Err(Error::Parse("score.pieces: required for kind \"piecewise\"".into())),
        ("quadratic" | "log" | "spherical", Some(_)) => {
            return Err(Error::Parse(format!("score.pieces: not allowed for kind {:?}", f.kind)))
        }
        (k, _) => return Err(Error::Parse(format!("score.kind: unknown kind {k:?}"))),
    };
    let mut s = ScoreSpec::from_rule(rule);
    if let Some(h) = f.holder {
        s = s.with_holder(HolderParams {
            alpha: h.alpha,
            beta: h.beta,
            c: h.c,
        });
    }
    if let Some(l) = f.bound {
        s = s.with_bound(l);
    }
    Ok(s)
}

fn check_prior_shape(prior: &[Vec<Vec<f64>>], ne: usize, na: usize, nb: usize) -> Result<()> {
    if prior.len() != ne {
        return Err(Error::Parse(format!("prior: expected {ne} event rows, found {}", prior.len())));
    }
    for (e, rows) in prior.iter().enumerate() {
        if rows.len() != na {
            return Err(Error::Parse(format!("prior[{e}]: expected {na} entries, found {}", rows.len())));
        }
        for (a, row) in rows.iter().enumerate() {
            if row.len() != nb {
                return Err(Error::Parse(format!("prior[{e}][{a}]: expected {nb} entries, found {}", row.len())));
            }
        }
    }
    Ok(())
}

/// Parses an instance document without semantic validation.
pub fn parse_instance_unchecked(text: &str) -> Result<Instance> {
    let f: InstanceFile = serde_json::from_str(text).map_err(parse_error)?;
    check_prior_shape(&f.prior, f.events.len(), f.alice_signals.len(), f.bob_signals.len())?;
    let prior = JointPrior::from_nested(&f.prior)?;
    let score = score_from_file(f.score)?;
    Ok(Instance {
        spaces: OutcomeSpaces::new(f.events, f.alice_signals, f.bob_signals),
        prior,
        score,
    })
}

/// Parses and validates an instance document. Every violation is reported.
pub fn parse_instance_str(text: &str) -> Result<Instance> {
    let inst = parse_instance_unchecked(text)?;
    validate_instance(&inst.spaces, &inst.prior, &inst.score).into_result()?;
    Ok(inst)
}

pub fn parse_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_instance_str(&text)
}

pub fn parse_scheme_str(text: &str) -> Result<SignalingScheme> {
    let f: SchemeFile = serde_json::from_str(text).map_err(parse_error)?;
    SignalingScheme::new(f.signals, f.pi)
}

pub fn parse_scheme(path: impl AsRef<Path>) -> Result<SignalingScheme> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_scheme_str(&text)
}

/// A real with 17 significant digits, which round-trips any `f64`.
/// Non-finite values become `null`.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        // no "-0" in reports
        format!("{:.16e}", 0.0)
    } else if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn real_array(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|&x| format_real(x)).collect();
    format!("[{}]", parts.join(", "))
}

fn scheme_json(s: &SignalingScheme, indent: &str) -> String {
    let labels: Vec<String> = s.labels.iter().map(|l| string(l)).collect();
    let rows: Vec<String> = s.pi.iter().map(|r| format!("{indent}    {}", real_array(r))).collect();
    format!(
        "{{\n{indent}  \"signals\": [{}],\n{indent}  \"pi\": [\n{}\n{indent}  ]\n{indent}}}",
        labels.join(", "),
        rows.join(",\n")
    )
}

fn map_json(m: &Diagnostics, indent: &str) -> String {
    if m.is_empty() {
        return "{}".into();
    }
    let parts: Vec<String> = m
        .iter()
        .map(|(k, v)| format!("{indent}  {}: {}", string(k), format_real(*v)))
        .collect();
    format!("{{\n{}\n{indent}}}", parts.join(",\n"))
}

/// Scheme file contents, in the format [`parse_scheme_str`] reads.
pub fn scheme_to_json(s: &SignalingScheme) -> String {
    let mut out = scheme_json(s, "");
    out.push('\n');
    out
}

/// Report text with keys in a fixed order. Zero-mass signals are dropped.
pub fn report_to_json(r: &SolveReport) -> String {
    let scheme = r.scheme.pruned(0.0);
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"method\": {},", string(&r.method.to_string()));
    let _ = writeln!(out, "  \"objective\": {},", format_real(r.sender_objective));
    let _ = writeln!(out, "  \"bob_utility\": {},", format_real(r.bob_utility));
    let _ = writeln!(out, "  \"V\": {},", format_real(r.total_value_v));
    let _ = writeln!(out, "  \"classification\": {},", string(&r.classification.to_string()));
    let _ = writeln!(out, "  \"scheme\": {},", scheme_json(&scheme, "  "));
    let _ = writeln!(out, "  \"diagnostics\": {}", map_json(&r.diagnostics, "  "));
    out.push_str("}\n");
    out
}

pub fn check_report_to_json(r: &CheckReport) -> String {
    let violations: Vec<String> = r.violations.iter().map(|v| string(v)).collect();
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"name\": {},", string(&r.name));
    let _ = writeln!(out, "  \"passed\": {},", r.passed);
    let _ = writeln!(out, "  \"values\": {},", map_json(&r.values, "  "));
    let _ = writeln!(out, "  \"violations\": [{}]", violations.join(", "));
    out.push_str("}\n");
    out
}

pub fn emit_report(r: &SolveReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, report_to_json(r)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn real_at(v: &Value, key: &str) -> Result<f64> {
    match v.get(key) {
        Some(Value::Null) => Ok(f64::NAN),
        Some(x) => x.as_f64().ok_or_else(|| Error::Parse(format!("{key}: expected a number"))),
        None => Err(Error::Parse(format!("missing key {key:?}"))),
    }
}

fn parse_method(s: &str) -> Result<Method> {
    Ok(match s {
        "Exact" => Method::Exact,
        "FptasA" => Method::FptasA,
        "FptasEB" => Method::FptasEB,
        "Oracle" => Method::Oracle,
        _ => return Err(Error::Parse(format!("method: unknown {s:?}"))),
    })
}

fn parse_classification(s: &str) -> Result<Classification> {
    Ok(match s {
        "Substitutes" => Classification::Substitutes,
        "Complements" => Classification::Complements,
        "Neither" => Classification::Neither,
        "Indifferent" => Classification::Indifferent,
        "Unclassified" => Classification::Unclassified,
        _ => return Err(Error::Parse(format!("classification: unknown {s:?}"))),
    })
}

/// Reads back a report written by [`report_to_json`].
pub fn parse_report_str(text: &str) -> Result<SolveReport> {
    let v: Value = serde_json::from_str(text).map_err(parse_error)?;
    let s = |key: &str| -> Result<String> {
        v.get(key)
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| Error::Parse(format!("{key}: expected a string")))
    };
    let scheme_v = v.get("scheme").ok_or_else(|| Error::Parse("missing key \"scheme\"".into()))?;
    let scheme: SchemeFile = serde_json::from_value(scheme_v.clone()).map_err(parse_error)?;
    let mut diagnostics = Diagnostics::new();
    if let Some(d) = v.get("diagnostics").and_then(Value::as_object) {
        for (k, x) in d {
            diagnostics.insert(k.clone(), x.as_f64().unwrap_or(f64::NAN));
        }
    }
    Ok(SolveReport {
        scheme: SignalingScheme::new(scheme.signals, scheme.pi)?,
        sender_objective: real_at(&v, "objective")?,
        bob_utility: real_at(&v, "bob_utility")?,
        total_value_v: real_at(&v, "V")?,
        classification: parse_classification(&s("classification")?)?,
        method: parse_method(&s("method")?)?,
        diagnostics,
    })
}

/// Instance file contents for a programmatic instance.
pub fn instance_to_json(inst: &Instance) -> String {
    let labels = |xs: &[String]| xs.iter().map(|l| string(l)).collect::<Vec<_>>().join(", ");
    let nested = inst.prior.to_nested();
    let prior: Vec<String> = nested
        .iter()
        .map(|rows| {
            let inner: Vec<String> = rows.iter().map(|r| real_array(r)).collect();
            format!("    [{}]", inner.join(", "))
        })
        .collect();
    let score = match &inst.score.rule {
        ScoreRule::Quadratic => "\"kind\": \"quadratic\"".to_string(),
        ScoreRule::Log => "\"kind\": \"log\"".to_string(),
        ScoreRule::Spherical => "\"kind\": \"spherical\"".to_string(),
        ScoreRule::PiecewiseLinear(p) => {
            let pieces: Vec<String> = p
                .iter()
                .map(|x| format!("{{\"r\": {}, \"b\": {}}}", real_array(&x.r), format_real(x.b)))
                .collect();
            format!("\"kind\": \"piecewise\", \"pieces\": [{}]", pieces.join(", "))
        }
    };
    let mut score = score;
    if let Some(h) = inst.score.holder {
        let _ = write!(
            score,
            ", \"holder\": {{\"alpha\": {}, \"beta\": {}, \"c\": {}}}",
            format_real(h.alpha),
            format_real(h.beta),
            format_real(h.c)
        );
    }
    if let Some(l) = inst.score.bound {
        let _ = write!(score, ", \"L\": {}", format_real(l));
    }
    format!(
        "{{\n  \"events\": [{}],\n  \"alice_signals\": [{}],\n  \"bob_signals\": [{}],\n  \"prior\": [\n{}\n  ],\n  \"score\": {{{}}}\n}}\n",
        labels(&inst.spaces.events),
        labels(&inst.spaces.alice),
        labels(&inst.spaces.bob),
        prior.join(",\n"),
        score
    )
}

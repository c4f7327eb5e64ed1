//! JSON instance and report files.
//!
//! ```json
//! {
//!   "n": 2, "m": 2,
//!   "entitlements": ["1/2", "1/2"],
//!   "signal_spaces": [
//!     {"kind": "vectors", "vectors": [["1", "0"], ["0", "1"]]},
//!     {"kind": "singleton"}
//!   ],
//!   "valuations": [
//!     {"kind": "additive", "items": [{"sig": [0, 0]}, "1"]},
//!     {"kind": "xos", "clauses": [["1", "0"], ["0", {"scale": ["2", {"sig": [0, 1]}]}]]}
//!   ]
//! }
//! ```
//!
//! Expressions are a rational constant (string or integer, or
//! `{"const": c}`), `{"sig": [agent, coord]}`, `{"add": [..]}`,
//! `{"scale": [c, expr]}`, `{"min": [..]}` or `{"max": [..]}`. Table
//! valuations list `{"profile": [..], "bundle": [..], "value": c}` entries;
//! omitted entries for the empty bundle default to 0, every other entry is
//! required. `{"kind": "binary"}` is shorthand for all 0/1 vectors of
//! length `m`, in lexicographic order.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bundle::Bundle;
use crate::error::{Error, Result};
use crate::instance::{Expr, Instance, ReportProfile, SignalProfile, SignalSpace, SpaceKind, Valuation};
use crate::rational::{self, Rational};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n: usize,
    m: usize,
    entitlements: Vec<Value>,
    signal_spaces: Vec<SpaceFile>,
    valuations: Vec<ValuationFile>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SpaceFile {
    Singleton,
    Vectors { vectors: Vec<Vec<Value>> },
    Binary,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ValuationFile {
    Additive { items: Vec<Value> },
    Xos { clauses: Vec<Vec<Value>> },
    Table { entries: Vec<TableEntry> },
    SetCover { k: usize },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableEntry {
    profile: Vec<usize>,
    bundle: Vec<usize>,
    value: Value,
}

fn at(path: &str, e: Error) -> Error {
    match e {
        Error::Input(msg) => Error::input(format!("{path}: {msg}")),
        other => other,
    }
}

fn parse_rational(v: &Value, path: &str) -> Result<Rational> {
    match v {
        Value::String(s) => rational::parse(s).map_err(|e| at(path, e)),
        Value::Number(n) => n
            .as_i64()
            .map(rational::int)
            .ok_or_else(|| Error::input(format!("{path}: {n} is not an integer; write fractions as \"p/q\""))),
        other => Err(Error::input(format!("{path}: expected a rational, found {other}"))),
    }
}

pub fn parse_expr(v: &Value, path: &str) -> Result<Expr> {
    let Value::Object(map) = v else {
        return parse_rational(v, path).map(Expr::Const);
    };
    let mut entries = map.iter();
    let (Some((key, arg)), None) = (entries.next(), entries.next()) else {
        return Err(Error::input(format!("{path}: an expression object has exactly one key")));
    };
    let path = format!("{path}.{key}");
    let list = |arg: &Value| -> Result<Vec<Expr>> {
        let Value::Array(items) = arg else {
            return Err(Error::input(format!("{path}: expected a list of expressions")));
        };
        items
            .iter()
            .enumerate()
            .map(|(i, e)| parse_expr(e, &format!("{path}[{i}]")))
            .collect()
    };
    match key.as_str() {
        "const" => parse_rational(arg, &path).map(Expr::Const),
        "sig" => match arg.as_array().map(|a| a.as_slice()) {
            Some([a, c]) => match (a.as_u64(), c.as_u64()) {
                (Some(a), Some(c)) => Ok(Expr::sig(a as usize, c as usize)),
                _ => Err(Error::input(format!("{path}: expected [agent, coordinate]"))),
            },
            _ => Err(Error::input(format!("{path}: expected [agent, coordinate]"))),
        },
        "add" => list(arg).map(Expr::Add),
        "min" => list(arg).map(Expr::Min),
        "max" => list(arg).map(Expr::Max),
        "scale" => match arg.as_array().map(|a| a.as_slice()) {
            Some([c, e]) => Ok(Expr::scale(
                parse_rational(c, &format!("{path}[0]"))?,
                parse_expr(e, &format!("{path}[1]"))?,
            )),
            _ => Err(Error::input(format!("{path}: expected [factor, expression]"))),
        },
        other => Err(Error::input(format!("{path}: unknown expression operator {other:?}"))),
    }
}

pub fn expr_to_json(e: &Expr) -> Value {
    let list = |ts: &[Expr]| Value::Array(ts.iter().map(expr_to_json).collect());
    match e {
        Expr::Const(c) => Value::String(rational::format(c)),
        Expr::Sig { agent, coord } => json!({ "sig": [agent, coord] }),
        Expr::Add(ts) => json!({ "add": list(ts) }),
        Expr::Min(ts) => json!({ "min": list(ts) }),
        Expr::Max(ts) => json!({ "max": list(ts) }),
        Expr::Scale(c, inner) => json!({ "scale": [rational::format(c), expr_to_json(inner)] }),
    }
}

fn parse_exprs(items: &[Value], path: &str) -> Result<Vec<Expr>> {
    items
        .iter()
        .enumerate()
        .map(|(j, e)| parse_expr(e, &format!("{path}[{j}]")))
        .collect()
}

/// Builds an instance from its JSON text.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| Error::input(format!("instance file: {e}")))?;
    let m = file.m;
    if file.entitlements.len() != file.n {
        return Err(Error::input(format!(
            "entitlements: {} entries for n = {}",
            file.entitlements.len(),
            file.n
        )));
    }
    let entitlements = file
        .entitlements
        .iter()
        .enumerate()
        .map(|(i, v)| parse_rational(v, &format!("entitlements[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let spaces = file
        .signal_spaces
        .iter()
        .enumerate()
        .map(|(i, s)| match s {
            SpaceFile::Singleton => Ok(SignalSpace::singleton()),
            SpaceFile::Binary => {
                if m >= 20 {
                    return Err(Error::input(format!("signal_spaces[{i}]: binary space over {m} items is too large")));
                }
                Ok(SignalSpace::binary(m))
            }
            SpaceFile::Vectors { vectors } => vectors
                .iter()
                .enumerate()
                .map(|(t, coords)| {
                    coords
                        .iter()
                        .enumerate()
                        .map(|(j, c)| parse_rational(c, &format!("signal_spaces[{i}].vectors[{t}][{j}]")))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
                .map(SignalSpace::vectors),
        })
        .collect::<Result<Vec<_>>>()?;
    let profile_count = spaces.iter().map(|s| s.len()).product::<usize>();
    let valuations = file
        .valuations
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let path = format!("valuations[{i}]");
            match v {
                ValuationFile::Additive { items } => Ok(Valuation::Additive {
                    items: parse_exprs(items, &format!("{path}.items"))?,
                }),
                ValuationFile::Xos { clauses } => Ok(Valuation::Xos {
                    clauses: clauses
                        .iter()
                        .enumerate()
                        .map(|(c, items)| parse_exprs(items, &format!("{path}.clauses[{c}]")))
                        .collect::<Result<_>>()?,
                }),
                ValuationFile::SetCover { k } => Ok(Valuation::SetCover { k: *k }),
                ValuationFile::Table { entries } => parse_table(entries, &spaces, profile_count, m, &path),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(m, entitlements, spaces, valuations)
}

fn parse_table(
    entries: &[TableEntry],
    spaces: &[SignalSpace],
    profile_count: usize,
    m: usize,
    path: &str,
) -> Result<Valuation> {
    if m > 16 {
        return Err(Error::input(format!("{path}: table valuations support at most 16 items")));
    }
    let mut rows: Vec<Vec<Option<Rational>>> = vec![vec![None; 1 << m]; profile_count];
    for (e, entry) in entries.iter().enumerate() {
        let epath = format!("{path}.entries[{e}]");
        if entry.profile.len() != spaces.len() || entry.profile.iter().zip(spaces).any(|(&s, sp)| s >= sp.len()) {
            return Err(Error::input(format!("{epath}.profile: not a signal profile of this instance")));
        }
        let index = spaces
            .iter()
            .zip(&entry.profile)
            .fold(0, |acc, (sp, &s)| acc * sp.len() + s);
        let bundle = Bundle::try_from_items(&entry.bundle, m).map_err(|e| at(&format!("{epath}.bundle"), e))?;
        let slot = &mut rows[index][bundle.index()];
        if slot.is_some() {
            return Err(Error::input(format!("{epath}: duplicate entry")));
        }
        *slot = Some(parse_rational(&entry.value, &format!("{epath}.value"))?);
    }
    let values = rows
        .into_iter()
        .enumerate()
        .map(|(p, row)| {
            row.into_iter()
                .enumerate()
                .map(|(b, v)| match v {
                    Some(v) => Ok(v),
                    None if b == 0 => Ok(rational::zero()),
                    None => Err(Error::input(format!(
                        "{path}: no value for profile {p} and bundle {}",
                        Bundle::from_bits(b as u64)
                    ))),
                })
                .collect::<Result<Arc<[Rational]>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Valuation::Table { values })
}

/// The JSON form of `instance`, readable by [`parse_instance`].
pub fn instance_to_json(instance: &Instance) -> Value {
    let m = instance.num_items();
    let spaces: Vec<Value> = instance
        .spaces()
        .iter()
        .map(|s| match s.kind() {
            SpaceKind::Singleton => json!({ "kind": "singleton" }),
            SpaceKind::Vectors => json!({
                "kind": "vectors",
                "vectors": s.signals().iter()
                    .map(|sig| sig.coords.iter().map(rational::format).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            }),
        })
        .collect();
    let valuations: Vec<Value> = instance
        .valuations()
        .iter()
        .map(|v| match v {
            Valuation::Additive { items } => json!({
                "kind": "additive",
                "items": items.iter().map(expr_to_json).collect::<Vec<_>>(),
            }),
            Valuation::Xos { clauses } => json!({
                "kind": "xos",
                "clauses": clauses.iter()
                    .map(|c| c.iter().map(expr_to_json).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            }),
            Valuation::SetCover { k } => json!({ "kind": "set_cover", "k": k }),
            Valuation::Table { values } => {
                let entries: Vec<Value> = values
                    .iter()
                    .enumerate()
                    .flat_map(|(p, row)| {
                        let profile = instance.profile_at(p);
                        Bundle::all(m).map(move |b| {
                            json!({
                                "profile": profile.0,
                                "bundle": b.to_vec(),
                                "value": rational::format(&row[b.index()]),
                            })
                        })
                    })
                    .collect();
                json!({ "kind": "table", "entries": entries })
            }
        })
        .collect();
    json!({
        "n": instance.num_agents(),
        "m": m,
        "entitlements": instance.entitlements().iter().map(rational::format).collect::<Vec<_>>(),
        "signal_spaces": spaces,
        "valuations": valuations,
    })
}

/// A report file: the report profile and, optionally, the true signals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub reports: ReportProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_signals: Option<SignalProfile>,
}

/// Accepts either a [`ReportFile`] object or a bare list of reports.
pub fn parse_reports(text: &str) -> Result<ReportFile> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::input(format!("report file: {e}")))?;
    let file = if value.is_array() {
        serde_json::from_value(value).map(|reports| ReportFile {
            reports,
            true_signals: None,
        })
    } else {
        serde_json::from_value(value)
    };
    file.map_err(|e| Error::input(format!("report file: {e}")))
}

//! Instance and scenario files (JSON) and JSON output helpers.
//!
//! Rational fields are strings holding `"p/q"` or an exact decimal; plain
//! JSON numbers are accepted and read from their literal text.

use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::path_model::{PathInstance, Scenario};
use crate::rational::{fmt, parse, to_f64, Q};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexJson {
    #[serde(default)]
    position: Option<Value>,
    w_min: Value,
    w_max: Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceJson {
    vertices: Vec<VertexJson>,
    capacities: Vec<Value>,
    #[serde(default)]
    lengths: Option<Vec<Value>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioJson {
    weights: Vec<Value>,
}

fn rational(v: &Value, what: &str) -> Result<Q> {
    match v {
        Value::String(s) => parse(s),
        Value::Number(n) => parse(&n.to_string()),
        _ => Err(Error::Malformed(format!(
            "{what}: expected a rational string, found {v}"
        ))),
    }
    .map_err(|e| Error::Malformed(format!("{what}: {e}")))
}

fn rationals(vs: &[Value], what: &str) -> Result<Vec<Q>> {
    vs.iter()
        .enumerate()
        .map(|(k, v)| rational(v, &format!("{what}[{k}]")))
        .collect()
}

/// Parses an instance file. Positions come from each vertex's `position`, or
/// from a top-level `lengths` array (edge lengths, prefix-summed).
pub fn parse_instance(text: &str) -> Result<PathInstance> {
    let raw: InstanceJson = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    let lo = raw
        .vertices
        .iter()
        .enumerate()
        .map(|(k, v)| rational(&v.w_min, &format!("vertices[{k}].w_min")))
        .collect::<Result<Vec<_>>>()?;
    let hi = raw
        .vertices
        .iter()
        .enumerate()
        .map(|(k, v)| rational(&v.w_max, &format!("vertices[{k}].w_max")))
        .collect::<Result<Vec<_>>>()?;
    let caps = rationals(&raw.capacities, "capacities")?;
    match &raw.lengths {
        Some(ls) => {
            if raw.vertices.iter().any(|v| v.position.is_some()) {
                return Err(Error::Malformed("give either positions or lengths, not both".into()));
            }
            if ls.len() + 1 != raw.vertices.len() {
                return Err(Error::Malformed(format!(
                    "expected {} lengths, found {}",
                    raw.vertices.len().saturating_sub(1),
                    ls.len()
                )));
            }
            PathInstance::from_lengths(&rationals(ls, "lengths")?, caps, lo, hi)
        }
        None => {
            let pos = raw
                .vertices
                .iter()
                .enumerate()
                .map(|(k, v)| match &v.position {
                    Some(p) => rational(p, &format!("vertices[{k}].position")),
                    None => Err(Error::Malformed(format!("vertices[{k}]: missing position"))),
                })
                .collect::<Result<Vec<_>>>()?;
            PathInstance::new(pos, caps, lo, hi)
        }
    }
}

pub fn instance_to_json(p: &PathInstance) -> Value {
    let vertices: Vec<Value> = (0..=p.n())
        .map(|i| json!({"position": fmt(p.x(i)), "w_min": fmt(p.lo(i)), "w_max": fmt(p.hi(i))}))
        .collect();
    let caps: Vec<Value> = p.capacities().iter().map(|c| Value::String(fmt(c))).collect();
    json!({"vertices": vertices, "capacities": caps})
}

/// Parses a scenario file and checks it against the instance.
pub fn parse_scenario(text: &str, p: &PathInstance) -> Result<Scenario> {
    let raw: ScenarioJson = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    let w = rationals(&raw.weights, "weights")?;
    if w.len() != p.n() + 1 {
        return Err(Error::Malformed(format!(
            "expected {} weights, found {}",
            p.n() + 1,
            w.len()
        )));
    }
    Scenario::new(w).map_err(|e| Error::Malformed(e.to_string()))
}

pub fn scenario_to_json(s: &Scenario) -> Value {
    json!({"weights": s.weights().iter().map(fmt).collect::<Vec<_>>()})
}

/// Inserts `key` as an exact string and `key_decimal` as a float.
pub fn put_rational(m: &mut Map<String, Value>, key: &str, q: &Q) {
    m.insert(key.to_string(), Value::String(fmt(q)));
    m.insert(format!("{key}_decimal"), json!(to_f64(q)));
}

/// Compact JSON with sorted keys and a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

//! JSON encoding of proof scripts. Terms are grammar strings, rationals and
//! epsilons are strings such as `"1/3*eps + 1/6"`.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use super::{Epsilon, Judgment, ProofScript, ProofStep, QuantEquation, Rule, Witness};
use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::term::{Name, Term};

fn schema(path: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

fn object<'a>(v: &'a Value, path: &str, allowed: &[&str]) -> Result<&'a Map<String, Value>> {
    let o = v.as_object().ok_or_else(|| schema(path, "expected an object"))?;
    for key in o.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(schema(&format!("{path}.{key}"), "unknown field"));
        }
    }
    Ok(o)
}

fn string<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| schema(path, "expected a string"))
}

fn required<'a>(o: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    o.get(key).ok_or_else(|| schema(path, format!("missing field {key:?}")))
}

fn rational(v: &Value, path: &str) -> Result<Rational> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return Err(schema(path, "expected a rational string")),
    };
    parse_rational(&text).map_err(|e| schema(path, e.to_string()))
}

fn term(v: &Value, path: &str) -> Result<Term> {
    Term::parse(string(v, path)?).map_err(|e| schema(path, e.to_string()))
}

fn equation(v: &Value, path: &str) -> Result<QuantEquation> {
    let o = object(v, path, &["left", "right", "eps"])?;
    let left = term(required(o, "left", path)?, &format!("{path}.left"))?;
    let right = term(required(o, "right", path)?, &format!("{path}.right"))?;
    let epath = format!("{path}.eps");
    let eps = match required(o, "eps", path)? {
        Value::String(s) => Epsilon::parse(s).map_err(|e| schema(&epath, e.to_string()))?,
        Value::Number(n) => Epsilon::parse(&n.to_string()).map_err(|e| schema(&epath, e.to_string()))?,
        _ => return Err(schema(&epath, "expected an epsilon string")),
    };
    Ok(QuantEquation::new(left, right, eps))
}

fn equations(v: Option<&Value>, path: &str) -> Result<Vec<QuantEquation>> {
    let Some(v) = v else { return Ok(Vec::new()) };
    let arr = v.as_array().ok_or_else(|| schema(path, "expected an array"))?;
    arr.iter()
        .enumerate()
        .map(|(i, e)| equation(e, &format!("{path}[{i}]")))
        .collect()
}

fn judgment(o: &Map<String, Value>, path: &str) -> Result<Judgment> {
    let hyps = equations(o.get("hyps"), &format!("{path}.hyps"))?;
    let concl = equation(required(o, "concl", path)?, &format!("{path}.concl"))?;
    Ok(Judgment::new(hyps, concl))
}

fn witness(v: Option<&Value>, path: &str) -> Result<Witness> {
    let mut w = Witness::default();
    let Some(v) = v else { return Ok(w) };
    let o = object(v, path, &["subst", "name", "a", "b"])?;
    if let Some(s) = o.get("subst") {
        let spath = format!("{path}.subst");
        let so = s.as_object().ok_or_else(|| schema(&spath, "expected an object"))?;
        let mut map = BTreeMap::new();
        for (k, t) in so {
            let kpath = format!("{spath}.{k}");
            let name = Name::new(k.as_str()).map_err(|e| schema(&kpath, e.to_string()))?;
            map.insert(name, term(t, &kpath)?);
        }
        w.subst = Some(map);
    }
    if let Some(n) = o.get("name") {
        let npath = format!("{path}.name");
        w.name = Some(Name::new(string(n, &npath)?).map_err(|e| schema(&npath, e.to_string()))?);
    }
    if let Some(a) = o.get("a") {
        w.a = Some(rational(a, &format!("{path}.a"))?);
    }
    if let Some(b) = o.get("b") {
        w.b = Some(rational(b, &format!("{path}.b"))?);
    }
    Ok(w)
}

fn step(v: &Value, path: &str) -> Result<ProofStep> {
    let o = object(v, path, &["rule", "premises", "hyps", "concl", "witness"])?;
    let rule_name = string(required(o, "rule", path)?, &format!("{path}.rule"))?;
    let rule = Rule::from_name(rule_name).ok_or_else(|| rule_name.to_string());
    let mut premises = Vec::new();
    if let Some(p) = o.get("premises") {
        let ppath = format!("{path}.premises");
        let arr = p.as_array().ok_or_else(|| schema(&ppath, "expected an array"))?;
        for (i, x) in arr.iter().enumerate() {
            let ix = x
                .as_u64()
                .ok_or_else(|| schema(&format!("{ppath}[{i}]"), "expected a step index"))?;
            premises.push(ix as usize);
        }
    }
    Ok(ProofStep {
        judgment: judgment(o, path)?,
        rule,
        premises,
        witness: witness(o.get("witness"), &format!("{path}.witness"))?,
    })
}

pub fn script_from_json(value: &Value) -> Result<ProofScript> {
    let root = object(value, "$", &["discount", "goal", "steps"])?;
    let discount = root.get("discount").map(|d| rational(d, "$.discount")).transpose()?;
    let goal = object(required(root, "goal", "$")?, "$.goal", &["hyps", "concl"])?;
    let goal = judgment(goal, "$.goal")?;
    let steps = required(root, "steps", "$")?
        .as_array()
        .ok_or_else(|| schema("$.steps", "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, s)| step(s, &format!("$.steps[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProofScript { discount, goal, steps })
}

pub fn load_script(bytes: &[u8]) -> Result<ProofScript> {
    let value: Value = serde_json::from_slice(bytes)?;
    script_from_json(&value)
}

fn equation_json(eq: &QuantEquation) -> Value {
    json!({
        "left": eq.left.to_string(),
        "right": eq.right.to_string(),
        "eps": eq.eps.to_string(),
    })
}

fn judgment_json(j: &Judgment, out: &mut Map<String, Value>) {
    if !j.hyps.is_empty() {
        out.insert("hyps".into(), Value::Array(j.hyps.iter().map(equation_json).collect()));
    }
    out.insert("concl".into(), equation_json(&j.concl));
}

fn witness_json(w: &Witness) -> Option<Value> {
    let mut o = Map::new();
    if let Some(s) = &w.subst {
        let m: Map<String, Value> = s
            .iter()
            .map(|(k, t)| (k.as_str().to_string(), Value::String(t.to_string())))
            .collect();
        o.insert("subst".into(), Value::Object(m));
    }
    if let Some(n) = &w.name {
        o.insert("name".into(), Value::String(n.as_str().to_string()));
    }
    if let Some(a) = &w.a {
        o.insert("a".into(), Value::String(format_rational(a)));
    }
    if let Some(b) = &w.b {
        o.insert("b".into(), Value::String(format_rational(b)));
    }
    (!o.is_empty()).then_some(Value::Object(o))
}

pub fn script_to_json(script: &ProofScript) -> Value {
    let mut root = Map::new();
    if let Some(d) = &script.discount {
        root.insert("discount".into(), Value::String(format_rational(d)));
    }
    let mut goal = Map::new();
    judgment_json(&script.goal, &mut goal);
    root.insert("goal".into(), Value::Object(goal));
    let steps = script
        .steps
        .iter()
        .map(|s| {
            let mut o = Map::new();
            o.insert("rule".into(), Value::String(s.rule_name().to_string()));
            if !s.premises.is_empty() {
                o.insert("premises".into(), json!(s.premises));
            }
            judgment_json(&s.judgment, &mut o);
            if let Some(w) = witness_json(&s.witness) {
                o.insert("witness".into(), w);
            }
            Value::Object(o)
        })
        .collect();
    root.insert("steps".into(), Value::Array(steps));
    Value::Object(root)
}

pub fn save_script(script: &ProofScript) -> String {
    serde_json::to_string_pretty(&script_to_json(script)).expect("JSON values serialize")
}

//! Cross-characteristic comparison of one job run over several fields.

use serde_json::{json, Value as Json};

use crate::error::CliError;
use crate::jobs::{typed, Job, TransferInputs};
use crate::spec::{JobSpec, Verb};
use crate::{execute, exit_code};

pub fn run(spec: &JobSpec) -> Result<(Json, i32), CliError> {
    let inner: TransferInputs = typed(&spec.inputs, "/inputs")?;
    if inner.computation == Verb::TransferCheck {
        return Err(CliError::Schema {
            pointer: "/inputs/computation".into(),
            message: "transfer-check cannot be nested".into(),
        });
    }
    let job = Job::parse(inner.computation, &inner.inputs, &inner.params, "/inputs")?;
    let runs = execute(&job, inner.computation, &spec.fields);

    // compare on the fields that succeeded, against the first of them
    let ok: Vec<(usize, Json)> =
        runs.iter().enumerate().filter_map(|(i, r)| r.result.as_ref().map(|v| (i, normalize(v)))).collect();
    let mut comparisons = Vec::new();
    let mut agree = true;
    if let Some((i0, first)) = ok.first() {
        for (i, v) in &ok[1..] {
            let mut pointers = Vec::new();
            diff(first, v, String::new(), &mut pointers);
            agree &= pointers.is_empty();
            comparisons.push(json!({ "fields": [i0, i], "equal": pointers.is_empty(), "mismatches": pointers }));
        }
    }
    let compared = ok.len() >= 2;
    let verified = runs.iter().all(|r| r.code == 0);
    let code = if compared && !agree { 2 } else { exit_code(&runs) };
    let report = json!({
        "computation": "transfer-check",
        "inner": inner.computation.name(),
        "fields": spec.fields,
        "compared": ok.iter().map(|(i, _)| i).collect::<Vec<_>>(),
        "agree": if compared { json!(agree) } else { Json::Null },
        "verified": verified,
        "comparisons": comparisons,
        "runs": runs.into_iter().map(|r| r.json).collect::<Vec<_>>(),
    });
    Ok((report, code))
}

/// Drops the characteristic tags, the only field-dependent part of a report.
fn normalize(v: &Json) -> Json {
    match v {
        Json::Object(m) => Json::Object(m.iter().filter(|(k, _)| *k != "char").map(|(k, v)| (k.clone(), normalize(v))).collect()),
        Json::Array(a) => Json::Array(a.iter().map(normalize).collect()),
        _ => v.clone(),
    }
}

/// JSON pointers at which `a` and `b` differ.
fn diff(a: &Json, b: &Json, at: String, out: &mut Vec<String>) {
    match (a, b) {
        (Json::Object(x), Json::Object(y)) => {
            let keys: std::collections::BTreeSet<&String> = x.keys().chain(y.keys()).collect();
            for k in keys {
                let p = format!("{at}/{}", k.replace('~', "~0").replace('/', "~1"));
                match (x.get(k), y.get(k)) {
                    (Some(u), Some(v)) => diff(u, v, p, out),
                    _ => out.push(p),
                }
            }
        }
        (Json::Array(x), Json::Array(y)) if x.len() == y.len() => {
            for (i, (u, v)) in x.iter().zip(y).enumerate() {
                diff(u, v, format!("{at}/{i}"), out);
            }
        }
        _ if a != b => out.push(at),
        _ => {}
    }
}

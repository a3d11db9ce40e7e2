//! Structured QUBO files: coefficients at full precision plus variable
//! names, so an instance can round-trip losslessly and be handed to an
//! external sampler.
//!
//! Layout: `{"num_vars", "names": [...], "linear": {"<index>": coeff},
//! "quadratic": [[i, j, coeff], ...], "offset"}`. Names follow the
//! `x:{node}:{dim}` / `z:{x}:{y}:{dim}` convention of [`VarIndexer`].

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::{Qubo, VarIndexer};

#[derive(Serialize, Deserialize)]
struct QuboFile {
    num_vars: usize,
    names: Vec<String>,
    linear: BTreeMap<String, f64>,
    quadratic: Vec<(usize, usize, f64)>,
    offset: f64,
}

/// Writes a QUBO and its variable names. Output is byte-deterministic:
/// maps iterate in canonical key order and floats serialise shortest-exact.
pub fn export_qubo(q: &Qubo, idx: &VarIndexer, mut writer: impl Write) -> Result<()> {
    assert_eq!(
        q.num_vars(),
        idx.num_vars(),
        "QUBO and indexer disagree on variable count"
    );
    let file = QuboFile {
        num_vars: q.num_vars(),
        names: (0..q.num_vars()).map(|v| idx.var_name(v)).collect(),
        linear: q
            .linear()
            .iter()
            .map(|(&i, &c)| (i.to_string(), c))
            .collect(),
        quadratic: q
            .quadratic()
            .iter()
            .map(|(&(i, j), &c)| (i, j, c))
            .collect(),
        offset: q.offset(),
    };
    // BTreeMap<String, _> would order "10" before "2"; rebuild numerically.
    let mut json = serde_json::to_value(&file)?;
    let ordered: serde_json::Map<String, serde_json::Value> = {
        let mut entries: Vec<(usize, (String, serde_json::Value))> = json["linear"]
            .as_object()
            .expect("linear is an object")
            .iter()
            .map(|(k, v)| {
                (
                    k.parse::<usize>().expect("numeric key"),
                    (k.clone(), v.clone()),
                )
            })
            .collect();
        entries.sort_by_key(|(i, _)| *i);
        entries.into_iter().map(|(_, kv)| kv).collect()
    };
    json["linear"] = serde_json::Value::Object(ordered);
    writer.write_all(serde_json::to_string(&json)?.as_bytes())?;
    writer.write_all(b"\n")?;
    Ok(())
}

fn parse_name(name: &str, pos: usize) -> Result<(char, Vec<usize>)> {
    let mut parts = name.split(':');
    let tag = match parts.next() {
        Some("x") => 'x',
        Some("z") => 'z',
        _ => {
            return Err(Error::Malformed(format!(
                "variable name `{name}` at position {pos} does not start with x: or z:"
            )))
        }
    };
    let fields: Vec<usize> = parts
        .map(|p| {
            p.parse::<usize>().map_err(|_| {
                Error::Malformed(format!(
                    "variable name `{name}` has non-numeric field `{p}`"
                ))
            })
        })
        .collect::<Result<_>>()?;
    let expected = if tag == 'x' { 2 } else { 3 };
    if fields.len() != expected {
        return Err(Error::Malformed(format!(
            "variable name `{name}` should have {expected} numeric fields"
        )));
    }
    Ok((tag, fields))
}

/// Reads a QUBO file back, reconstructing the variable layout from the
/// names and validating ranges, key uniqueness and name ordering.
pub fn import_qubo(mut reader: impl Read) -> Result<(Qubo, VarIndexer)> {
    let mut content = String::new();
    reader.read_to_string(&mut content)?;
    let file: QuboFile =
        serde_json::from_str(&content).map_err(|e| Error::Malformed(format!("QUBO file: {e}")))?;
    if file.names.len() != file.num_vars {
        return Err(Error::Malformed(format!(
            "{} variable names for {} variables",
            file.names.len(),
            file.num_vars
        )));
    }

    // Split the name list into the embedding block and the auxiliary block.
    let mut n = 0usize;
    let mut k = 0usize;
    let mut split = file.num_vars;
    for (pos, name) in file.names.iter().enumerate() {
        let (tag, fields) = parse_name(name, pos)?;
        if tag == 'z' {
            split = pos;
            break;
        }
        n = n.max(fields[0] + 1);
        k = k.max(fields[1] + 1);
    }
    if split == 0 && file.num_vars > 0 {
        return Err(Error::Malformed(
            "no embedding variables in name list".into(),
        ));
    }
    let mut pairs = Vec::new();
    if split < file.num_vars {
        if k == 0 || (file.num_vars - split) % k != 0 {
            return Err(Error::Malformed(
                "auxiliary name block is not a whole number of pairs".into(),
            ));
        }
        for chunk_start in (split..file.num_vars).step_by(k) {
            let (tag, fields) = parse_name(&file.names[chunk_start], chunk_start)?;
            if tag != 'z' {
                return Err(Error::Malformed(format!(
                    "embedding name `{}` after the auxiliary block began",
                    file.names[chunk_start]
                )));
            }
            let (x, y) = (fields[0], fields[1]);
            if x >= y || y >= n {
                return Err(Error::Malformed(format!(
                    "auxiliary name `{}` is not a canonical in-range pair",
                    file.names[chunk_start]
                )));
            }
            pairs.push((x, y));
        }
        if !pairs.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Malformed(
                "auxiliary pairs are not in canonical sorted order".into(),
            ));
        }
    }
    let idx = VarIndexer::from_parts(n, k.max(1), pairs);
    if idx.num_vars() != file.num_vars {
        return Err(Error::Malformed(format!(
            "name list implies {} variables, file says {}",
            idx.num_vars(),
            file.num_vars
        )));
    }
    for v in 0..file.num_vars {
        if idx.var_name(v) != file.names[v] {
            return Err(Error::Malformed(format!(
                "variable {v} named `{}` breaks the expected layout (`{}`)",
                file.names[v],
                idx.var_name(v)
            )));
        }
    }

    let mut q = Qubo::new(file.num_vars);
    for (key, c) in &file.linear {
        let i: usize = key
            .parse()
            .map_err(|_| Error::Malformed(format!("linear key `{key}` is not an index")))?;
        if i >= file.num_vars {
            return Err(Error::Malformed(format!("linear index {i} out of range")));
        }
        if !c.is_finite() {
            return Err(Error::Malformed(format!(
                "non-finite coefficient for {key}"
            )));
        }
        q.add_linear(i, *c);
    }
    let mut seen = std::collections::BTreeSet::new();
    for &(i, j, c) in &file.quadratic {
        if i == j {
            return Err(Error::Malformed(format!(
                "quadratic key ({i}, {j}) is a square; squares belong in linear terms"
            )));
        }
        if i >= file.num_vars || j >= file.num_vars {
            return Err(Error::Malformed(format!(
                "quadratic key ({i}, {j}) out of range"
            )));
        }
        if !c.is_finite() {
            return Err(Error::Malformed(format!(
                "non-finite coefficient for ({i}, {j})"
            )));
        }
        let key = (i.min(j), i.max(j));
        if !seen.insert(key) {
            return Err(Error::DuplicateKey(format!("({}, {})", key.0, key.1)));
        }
        q.add_quadratic(i, j, c);
    }
    if !file.offset.is_finite() {
        return Err(Error::Malformed("non-finite offset".into()));
    }
    q.add_offset(file.offset);
    Ok((q, idx))
}

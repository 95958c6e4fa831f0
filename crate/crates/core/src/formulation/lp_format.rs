//! CPLEX-LP-style text export and a reader for the same subset.
//!
//! Grammar written by [`export_lp`]:
//!
//! ```text
//! \ kind: bigm
//! Maximize
//!  obj: <terms>
//! Subject To
//!  c<k>: <terms> (<= | =) <number>
//! Bounds
//!  <lo> <= <name> <= <hi>            (lo/hi may be -inf/+inf)
//! Binaries
//!  <name> ...
//! End
//! ```
//!
//! `<terms>` is a whitespace separated sequence `[+|-] <coef> <name>`. Numbers
//! use shortest round-trip decimal form, so re-reading is exact.

use std::fmt::Write as _;

use super::model::{
    FormulationKind, LinearRow, MipModel, ObjSense, Objective, RowSense, VarKey, VarRole, VarType,
};
use crate::error::{Error, Result};

const TERMS_PER_LINE: usize = 8;

fn kind_tag(kind: FormulationKind) -> &'static str {
    match kind {
        FormulationKind::BigM => "bigm",
        FormulationKind::Extended => "extended",
        FormulationKind::BigMPlusCuts => "bigm-cuts",
    }
}

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:?}")
    }
}

fn write_terms(out: &mut String, model: &MipModel, coeffs: &[(usize, f64)]) {
    for (k, &(j, a)) in coeffs.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if a.is_sign_negative() { '-' } else { '+' };
        let _ = write!(
            out,
            " {sign} {} {}",
            num(a.abs()),
            model.variables()[j].name()
        );
    }
}

pub fn export_lp(model: &MipModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ kind: {}", kind_tag(model.kind));
    out.push_str(match model.objective().sense {
        ObjSense::Maximize => "Maximize\n",
        ObjSense::Minimize => "Minimize\n",
    });
    out.push_str(" obj:");
    write_terms(&mut out, model, &model.objective().coeffs);
    out.push_str("\nSubject To\n");
    for (k, row) in model.constraints().iter().enumerate() {
        let _ = write!(out, " c{k}:");
        write_terms(&mut out, model, &row.coeffs);
        let op = match row.sense {
            RowSense::Le => "<=",
            RowSense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", num(row.rhs));
    }
    out.push_str("Bounds\n");
    for v in model.variables() {
        let _ = writeln!(out, " {} <= {} <= {}", num(v.lower), v.name(), num(v.upper));
    }
    let binaries: Vec<String> = model
        .variables()
        .iter()
        .filter(|v| v.var_type == VarType::Binary)
        .map(|v| v.name())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for chunk in binaries.chunks(TERMS_PER_LINE) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

fn parse_num(tok: &str) -> Result<f64> {
    match tok {
        "+inf" | "inf" | "+infinity" | "infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => tok
            .parse()
            .map_err(|_| Error::LpFormat(format!("bad number {tok:?}"))),
    }
}

fn parse_key(name: &str) -> Result<VarKey> {
    let bad = || Error::LpFormat(format!("unrecognized variable name {name:?}"));
    let mut parts = name.split('_');
    let role = parts.next().ok_or_else(bad)?;
    let nums = parts
        .map(|p| p.parse::<usize>().map_err(|_| bad()))
        .collect::<Result<Vec<_>>>()?;
    match (role, nums.as_slice()) {
        ("x", &[layer, neuron]) => Ok(VarKey {
            layer,
            neuron,
            role: VarRole::X,
        }),
        ("y", &[layer, neuron]) => Ok(VarKey::output(layer, neuron)),
        ("z", &[layer, neuron]) => Ok(VarKey::indicator(layer, neuron)),
        ("x0", &[layer, neuron, k]) => Ok(VarKey {
            layer,
            neuron,
            role: VarRole::X0(k),
        }),
        _ => Err(bad()),
    }
}

#[derive(PartialEq)]
enum Section {
    Header,
    Objective,
    Rows,
    Bounds,
    Binaries,
}

/// Parses `[+|-] coef name` sequences.
fn parse_terms(
    tokens: &[&str],
    lookup: &mut dyn FnMut(&str) -> usize,
) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let sign = match tokens[i] {
            "+" => 1.0,
            "-" => -1.0,
            t => return Err(Error::LpFormat(format!("expected sign, found {t:?}"))),
        };
        let (Some(c), Some(name)) = (tokens.get(i + 1), tokens.get(i + 2)) else {
            return Err(Error::LpFormat("truncated term".into()));
        };
        out.push((lookup(name), sign * parse_num(c)?));
        i += 3;
    }
    Ok(out)
}

/// Reads a document produced by [`export_lp`].
///
/// Column order follows the `Bounds` section. Neuron blocks are not restored.
pub fn import_lp(text: &str) -> Result<MipModel> {
    let mut kind = FormulationKind::BigM;
    let mut sense = ObjSense::Maximize;
    let mut section = Section::Header;
    let mut obj_tokens: Vec<&str> = Vec::new();
    let mut row_tokens: Vec<&str> = Vec::new();
    let mut bound_lines: Vec<&str> = Vec::new();
    let mut binaries: Vec<&str> = Vec::new();

    for line in text.lines() {
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix("\\ kind:") {
            kind = match rest.trim() {
                "bigm" => FormulationKind::BigM,
                "extended" => FormulationKind::Extended,
                "bigm-cuts" => FormulationKind::BigMPlusCuts,
                other => return Err(Error::LpFormat(format!("unknown kind {other:?}"))),
            };
            continue;
        }
        if trimmed.is_empty() || trimmed.starts_with('\\') {
            continue;
        }
        match trimmed {
            "Maximize" => {
                sense = ObjSense::Maximize;
                section = Section::Objective;
            }
            "Minimize" => {
                sense = ObjSense::Minimize;
                section = Section::Objective;
            }
            "Subject To" => section = Section::Rows,
            "Bounds" => section = Section::Bounds,
            "Binaries" => section = Section::Binaries,
            "End" => break,
            _ => match section {
                Section::Objective => obj_tokens.extend(trimmed.split_whitespace()),
                Section::Rows => row_tokens.extend(trimmed.split_whitespace()),
                Section::Bounds => bound_lines.push(trimmed),
                Section::Binaries => binaries.extend(trimmed.split_whitespace()),
                Section::Header => {
                    return Err(Error::LpFormat(format!("unexpected line {trimmed:?}")))
                }
            },
        }
    }

    let mut model = MipModel::new(kind);
    for line in bound_lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let [lo, "<=", name, "<=", hi] = toks.as_slice() else {
            return Err(Error::LpFormat(format!("bad bound line {line:?}")));
        };
        model.add_variable(
            parse_key(name)?,
            parse_num(lo)?,
            parse_num(hi)?,
            VarType::Continuous,
        )?;
    }
    let mut missing: Option<String> = None;
    let mut lookup = |name: &str| -> usize {
        match parse_key(name).ok().and_then(|k| model.col(&k)) {
            Some(c) => c,
            None => {
                missing.get_or_insert_with(|| name.to_string());
                0
            }
        }
    };

    if obj_tokens.first().map(|t| t.ends_with(':')) != Some(true) {
        return Err(Error::LpFormat("objective must be labelled".into()));
    }
    let obj_coeffs = parse_terms(&obj_tokens[1..], &mut lookup)?;

    let mut rows = Vec::new();
    let mut i = 0;
    while i < row_tokens.len() {
        if !row_tokens[i].ends_with(':') {
            return Err(Error::LpFormat(format!(
                "expected row label at {:?}",
                row_tokens[i]
            )));
        }
        let start = i + 1;
        let op = (start..row_tokens.len())
            .find(|&k| matches!(row_tokens[k], "<=" | "=" | ">="))
            .ok_or_else(|| Error::LpFormat("row without sense".into()))?;
        let coeffs = parse_terms(&row_tokens[start..op], &mut lookup)?;
        let rhs = parse_num(
            row_tokens
                .get(op + 1)
                .ok_or_else(|| Error::LpFormat("row without rhs".into()))?,
        )?;
        rows.push(match row_tokens[op] {
            "<=" => LinearRow::le(coeffs, rhs),
            ">=" => LinearRow::ge(coeffs, rhs),
            _ => LinearRow::eq(coeffs, rhs),
        });
        i = op + 2;
    }
    let mut bin_cols = Vec::new();
    for name in binaries {
        bin_cols.push(lookup(name));
    }
    if let Some(name) = missing {
        return Err(Error::UnknownVariable(name));
    }

    let mut rebuilt = MipModel::new(kind);
    for (j, v) in model.variables().iter().enumerate() {
        let vt = if bin_cols.contains(&j) {
            VarType::Binary
        } else {
            VarType::Continuous
        };
        rebuilt.add_variable(v.key, v.lower, v.upper, vt)?;
    }
    for row in rows {
        rebuilt.add_row(row);
    }
    rebuilt.set_objective(Objective {
        sense,
        coeffs: LinearRow::le(obj_coeffs, 0.0).coeffs,
    });
    rebuilt.validate()?;
    Ok(rebuilt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_names_parse_back() {
        for key in [
            VarKey::input(3),
            VarKey::output(2, 7),
            VarKey::indicator(1, 0),
            VarKey {
                layer: 4,
                neuron: 2,
                role: VarRole::X0(9),
            },
        ] {
            assert_eq!(parse_key(&key.to_string()).unwrap(), key);
        }
        assert!(parse_key("q_1_2").is_err());
    }

    #[test]
    fn rejects_unknown_variable() {
        let text = "Maximize\n obj: + 1.0 y_1_0\nSubject To\nBounds\n 0.0 <= x_0_0 <= 1.0\nEnd\n";
        assert!(matches!(import_lp(text), Err(Error::UnknownVariable(_))));
    }
}

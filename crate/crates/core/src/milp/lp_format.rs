//! CPLEX LP text export, for inspecting generated programs with external tools.

use std::fmt::Write as _;
use std::path::Path;

use super::model::{MixedIntegerProgram, Relation, Sense};
use crate::error::Result;

fn sanitize(name: &str, fallback: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.[]".contains(c) { c } else { '_' })
        .collect();
    match s.chars().next() {
        None => fallback.to_string(),
        Some(c) if c.is_ascii_digit() || c == '.' => format!("_{s}"),
        _ => s,
    }
}

fn push_terms(out: &mut String, terms: impl Iterator<Item = (String, f64)>) -> bool {
    let mut any = false;
    for (name, a) in terms {
        if a == 0.0 {
            continue;
        }
        let sign = if a < 0.0 { '-' } else { '+' };
        if any || a < 0.0 {
            let _ = write!(out, " {sign} {} {name}", a.abs());
        } else {
            let _ = write!(out, " {a} {name}");
        }
        any = true;
    }
    any
}

/// Renders `mip` in CPLEX LP format. Column names are made unique by
/// suffixing the column index.
pub fn to_lp_format(mip: &MixedIntegerProgram) -> String {
    let names: Vec<String> = mip
        .vars
        .iter()
        .enumerate()
        .map(|(j, v)| format!("{}#{j}", sanitize(&v.name, "x")).replace('#', "_"))
        .collect();
    let mut out = String::new();
    out.push_str(match mip.sense {
        Sense::Minimize => "Minimize\n obj:",
        Sense::Maximize => "Maximize\n obj:",
    });
    let any = push_terms(
        &mut out,
        mip.vars.iter().enumerate().map(|(j, v)| (names[j].clone(), v.cost)),
    );
    if mip.objective_offset != 0.0 || !any {
        let _ = write!(out, " + {} __const", mip.objective_offset);
    }
    if !mip.quadratic.is_empty() {
        out.push_str(" + [");
        for (k, &(v, q)) in mip.quadratic.iter().enumerate() {
            if k > 0 {
                out.push_str(" +");
            }
            let _ = write!(out, " {q} {}^2", names[v.0]);
        }
        out.push_str(" ] / 2");
    }
    out.push_str("\nSubject To\n");
    for (i, row) in mip.rows.iter().enumerate() {
        let _ = write!(out, " {}:", sanitize(&format!("{}_{i}", row.name), "r"));
        let any = push_terms(
            &mut out,
            row.coeffs.iter().map(|&(v, a)| (names[v.0].clone(), a)),
        );
        if !any {
            out.push_str(" 0 __const");
        }
        let rel = match row.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        let _ = writeln!(out, " {rel} {}", row.rhs);
    }
    out.push_str("Bounds\n __const = 1\n");
    for (j, v) in mip.vars.iter().enumerate() {
        let n = &names[j];
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (true, true) if v.lower == v.upper => {
                let _ = writeln!(out, " {n} = {}", v.lower);
            }
            (true, true) => {
                let _ = writeln!(out, " {} <= {n} <= {}", v.lower, v.upper);
            }
            (true, false) => {
                let _ = writeln!(out, " {n} >= {}", v.lower);
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {n} <= {}", v.upper);
            }
            (false, false) => {
                let _ = writeln!(out, " {n} free");
            }
        }
    }
    let ints: Vec<&str> = mip
        .vars
        .iter()
        .enumerate()
        .filter(|(_, v)| v.integer)
        .map(|(j, _)| names[j].as_str())
        .collect();
    if !ints.is_empty() {
        out.push_str("General\n");
        for chunk in ints.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

pub fn write_lp_file(mip: &MixedIntegerProgram, path: &Path) -> Result<()> {
    std::fs::write(path, to_lp_format(mip))?;
    Ok(())
}

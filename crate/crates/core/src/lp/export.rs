use std::fmt::Write as _;

use super::{LpModel, Sense};

/// Writes the model in CPLEX LP text format. Variables are named `v<index>`.
pub fn to_lp_format(model: &LpModel) -> String {
    let mut out = String::from("\\ lifted sparsest cut LP\nMinimize\n obj:");
    let mut any = false;
    for (i, &c) in model.objective.iter().enumerate() {
        if c != 0 {
            let _ = write!(out, " + {c} v{i}");
            any = true;
        }
    }
    if !any {
        out.push_str(" 0 v0");
    }
    out.push_str("\nSubject To\n");
    for (k, row) in model.rows.iter().enumerate() {
        let _ = write!(out, " r{k}:");
        if row.terms.is_empty() {
            out.push_str(" 0 v0");
        }
        for &(v, c) in &row.terms {
            let sign = if c < 0 { '-' } else { '+' };
            let _ = write!(out, " {sign} {} v{v}", c.abs());
        }
        let op = match row.sense {
            Sense::Eq => "=",
            Sense::Ge => ">=",
        };
        let _ = writeln!(out, " {op} {}", row.rhs);
    }
    out.push_str("Bounds\n");
    for i in 0..model.num_vars() {
        match model.upper(i) {
            Some(u) => {
                let _ = writeln!(out, " 0 <= v{i} <= {u}");
            }
            None => {
                let _ = writeln!(out, " v{i} >= 0");
            }
        }
    }
    out.push_str("End\n");
    out
}

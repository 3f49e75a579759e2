//! LP-format export for external MIP solvers.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::graph::Graph;
use crate::problems::{mis_weights, Model};

fn var(v: u32) -> String {
    format!("x{v}")
}

fn term(out: &mut String, first: &mut bool, c: f64, body: &str) {
    if c == 0.0 {
        return;
    }
    let sign = if c < 0.0 { "-" } else if *first { "" } else { "+" };
    let mag = c.abs();
    if *first {
        let _ = write!(out, " {sign}{}{mag} {body}", if sign.is_empty() { "" } else { " " });
    } else {
        let _ = write!(out, " {sign} {mag} {body}");
    }
    *first = false;
}

/// Render a model as an LP file over binary variables `x<id>`.
///
/// Without constraints the QUBO form of `model` is written with its
/// bilinear terms in a `[ ... ] / 2` block (coefficients doubled). With
/// `mis_constraints`, the objective is `-sum w_v x_v` taken from the QUBO's
/// linear part and every edge becomes `x_u + x_v <= 1`.
pub fn lp_string(model: &Model<f64>, mis_constraints: Option<&Graph>) -> String {
    let q = model.to_qubo();
    let mut out = String::from("\\ generated by qabench\nMinimize\n obj:");
    let mut first = true;
    match mis_constraints {
        Some(_) => {
            for (&v, &w) in &mis_weights(&q) {
                term(&mut out, &mut first, -w, &var(v));
            }
        }
        None => {
            for (&v, &a) in q.linear() {
                term(&mut out, &mut first, a, &var(v));
            }
            let quad: Vec<_> = q.quadratic().iter().filter(|(_, &b)| b != 0.0).collect();
            if !quad.is_empty() {
                out.push_str(if first { " [" } else { " + [" });
                let mut inner = true;
                for (&(u, v), &b) in quad {
                    term(&mut out, &mut inner, 2.0 * b, &format!("{} * {}", var(u), var(v)));
                }
                out.push_str(" ] / 2");
                first = false;
            }
            if q.offset() != 0.0 {
                let c = q.offset();
                let _ = write!(out, " {} {}", if c < 0.0 { "-" } else { "+" }, c.abs());
            }
        }
    }
    if first {
        out.push_str(" 0");
    }
    out.push_str("\nSubject To\n");
    if let Some(g) = mis_constraints {
        for (u, v) in g.edges() {
            let _ = writeln!(out, " e{u}_{v}: {} + {} <= 1", var(u), var(v));
        }
    }
    out.push_str("Binary\n");
    for v in q.variables() {
        let _ = writeln!(out, " {}", var(v));
    }
    out.push_str("End\n");
    out
}

pub fn export_lp(model: &Model<f64>, mis_constraints: Option<&Graph>, path: &Path) -> Result<()> {
    std::fs::write(path, lp_string(model, mis_constraints))?;
    Ok(())
}

use std::fmt::Write;

use super::ast::*;

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Logic(LogicOp::Or, ..) => 1,
        ExprKind::Logic(LogicOp::And, ..) => 2,
        ExprKind::Unary(UnaryOp::Not, _) => 3,
        ExprKind::Compare(..) => 4,
        ExprKind::Arith(op, ..) => op.precedence() + 1,
        ExprKind::Unary(UnaryOp::Neg, _) => 7,
        // A negative literal re-parses as a literal only where unary minus may appear.
        ExprKind::Num(n) if *n < 0.0 || (*n == 0.0 && n.is_sign_negative()) => 7,
        _ => 8,
    }
}

pub fn format_number(n: f64) -> String {
    if n.fract() == 0.0 && n.abs() < 1e15 {
        format!("{}", n as i64)
    } else {
        format!("{n:?}")
    }
}

fn wrap(f: &FunctionDef, e: &Expr, min: u8) -> String {
    let s = expr_to_string(f, e);
    if prec(e) < min {
        format!("({s})")
    } else {
        s
    }
}

/// Renders an expression using the variable names of `f`.
pub fn expr_to_string(f: &FunctionDef, e: &Expr) -> String {
    match &e.kind {
        ExprKind::Num(n) => format_number(*n),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Var(slot) => f.slot_name(*slot).to_string(),
        ExprKind::Index { slot, index } => {
            format!("{}[{}]", f.slot_name(*slot), expr_to_string(f, index))
        }
        ExprKind::Unary(UnaryOp::Neg, inner) => {
            let s = wrap(f, inner, 7);
            // Keep `-(1)` distinct from the literal `-1`.
            if s.starts_with('-') || matches!(inner.kind, ExprKind::Num(_)) {
                format!("-({s})")
            } else {
                format!("-{s}")
            }
        }
        ExprKind::Unary(UnaryOp::Not, inner) => format!("not {}", wrap(f, inner, 3)),
        ExprKind::Arith(op, l, r) => {
            let p = op.precedence() + 1;
            format!("{} {} {}", wrap(f, l, p), op.symbol(), wrap(f, r, p + 1))
        }
        ExprKind::Compare(op, l, r) => {
            format!("{} {} {}", wrap(f, l, 5), op.symbol(), wrap(f, r, 5))
        }
        ExprKind::Logic(op, l, r) => {
            let p = if *op == LogicOp::Or { 1 } else { 2 };
            format!("{} {} {}", wrap(f, l, p), op.symbol(), wrap(f, r, p + 1))
        }
        ExprKind::Call(b, args) => {
            let a: Vec<String> = args.iter().map(|a| expr_to_string(f, a)).collect();
            format!("{}({})", b.name(), a.join(", "))
        }
    }
}

fn block(f: &FunctionDef, stmts: &[Stmt], depth: usize, out: &mut String) {
    for s in stmts {
        stmt(f, s, depth, out);
    }
}

fn stmt(f: &FunctionDef, s: &Stmt, depth: usize, out: &mut String) {
    let pad = "    ".repeat(depth);
    match &s.kind {
        StmtKind::Assign { slot, value } => {
            let _ = writeln!(out, "{pad}{} = {};", f.slot_name(*slot), expr_to_string(f, value));
        }
        StmtKind::AssignIndex { slot, index, value } => {
            let _ = writeln!(
                out,
                "{pad}{}[{}] = {};",
                f.slot_name(*slot),
                expr_to_string(f, index),
                expr_to_string(f, value)
            );
        }
        StmtKind::If {
            cond,
            then_body,
            else_body,
            ..
        } => {
            let _ = writeln!(out, "{pad}if ({}) {{", expr_to_string(f, cond));
            block(f, then_body, depth + 1, out);
            match else_body {
                None => {
                    let _ = writeln!(out, "{pad}}}");
                }
                Some(e) => {
                    let _ = writeln!(out, "{pad}}} else {{");
                    block(f, e, depth + 1, out);
                    let _ = writeln!(out, "{pad}}}");
                }
            }
        }
        StmtKind::While { cond, body, .. } => {
            let _ = writeln!(out, "{pad}while ({}) {{", expr_to_string(f, cond));
            block(f, body, depth + 1, out);
            let _ = writeln!(out, "{pad}}}");
        }
        StmtKind::For {
            var, iterable, body, ..
        } => {
            let _ = writeln!(
                out,
                "{pad}for {} in {} {{",
                f.slot_name(*var),
                expr_to_string(f, iterable)
            );
            block(f, body, depth + 1, out);
            let _ = writeln!(out, "{pad}}}");
        }
        StmtKind::Return(e) => {
            let _ = writeln!(out, "{pad}return {};", expr_to_string(f, e));
        }
    }
}

/// Renders a function as parseable source text.
pub fn function_to_string(f: &FunctionDef) -> String {
    let params: Vec<String> = f
        .params
        .iter()
        .map(|p| format!("{}: {}", p.name, p.kind))
        .collect();
    let mut out = format!("fn {}({}) {{\n", f.name, params.join(", "));
    block(f, &f.body, 1, &mut out);
    out.push_str("}\n");
    out
}

pub fn unit_to_string(u: &SourceUnit) -> String {
    u.functions
        .iter()
        .map(function_to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

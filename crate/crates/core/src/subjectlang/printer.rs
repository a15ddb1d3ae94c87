//! Canonical source printer. Output re-parses to a structurally equal tree.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::*;
use crate::pyrepr::{escape_into, float_repr, str_repr};

pub fn print_tree(tree: &SyntaxTree) -> String {
    print_stmts(&tree.body)
}

pub fn print_stmts(stmts: &[Stmt]) -> String {
    let mut out = String::new();
    for s in stmts {
        print_stmt_into(&mut out, s, 0);
    }
    out
}

pub fn print_stmt(s: &Stmt) -> String {
    let mut out = String::new();
    print_stmt_into(&mut out, s, 0);
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn block(out: &mut String, body: &[Stmt], level: usize) {
    for s in body {
        print_stmt_into(out, s, level);
    }
}

/// Tuple targets and values are printed without brackets when non-trivial.
fn bare(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Tuple(items) if items.len() > 1 => {
            items.iter().map(|i| print_expr_prec(i, PREC_LAMBDA)).collect::<Vec<_>>().join(", ")
        }
        _ => print_expr(e),
    }
}

fn print_stmt_into(out: &mut String, s: &Stmt, level: usize) {
    indent(out, level);
    match &s.kind {
        StmtKind::FunctionDef(f) => {
            let params: Vec<String> = f
                .params
                .iter()
                .map(|p| {
                    let mut t = p.name.clone();
                    if let Some(a) = &p.annotation {
                        t.push_str(": ");
                        t.push_str(&print_expr(a));
                    }
                    if let Some(d) = &p.default {
                        t.push_str(if p.annotation.is_some() { " = " } else { "=" });
                        t.push_str(&print_expr(d));
                    }
                    t
                })
                .collect();
            out.push_str(&format!("def {}({})", f.name, params.join(", ")));
            if let Some(r) = &f.returns {
                out.push_str(" -> ");
                out.push_str(&print_expr(r));
            }
            out.push_str(":\n");
            if let Some(doc) = &f.docstring {
                indent(out, level + 1);
                out.push_str(&str_repr(doc));
                out.push('\n');
            }
            block(out, &f.body, level + 1);
        }
        StmtKind::Assign { targets, annotation, value } => {
            let mut parts: Vec<String> = targets.iter().map(bare).collect();
            if let Some(a) = annotation {
                parts[0] = format!("{}: {}", parts[0], print_expr(a));
            }
            parts.push(bare(value));
            out.push_str(&parts.join(" = "));
            out.push('\n');
        }
        StmtKind::AugAssign { target, op, value } => {
            out.push_str(&format!("{} {}= {}\n", print_expr(target), op.symbol(), bare(value)));
        }
        StmtKind::If { .. } => print_if(out, s, level, false),
        StmtKind::For { target, iter, body } => {
            out.push_str(&format!("for {} in {}:\n", bare(target), bare(iter)));
            block(out, body, level + 1);
        }
        StmtKind::While { test, body } => {
            out.push_str(&format!("while {}:\n", print_expr(test)));
            block(out, body, level + 1);
        }
        StmtKind::Return(None) => out.push_str("return\n"),
        StmtKind::Return(Some(v)) => out.push_str(&format!("return {}\n", bare(v))),
        StmtKind::Break => out.push_str("break\n"),
        StmtKind::Continue => out.push_str("continue\n"),
        StmtKind::Pass => out.push_str("pass\n"),
        StmtKind::Expr(e) => {
            out.push_str(&bare(e));
            out.push('\n');
        }
        StmtKind::Assert { test, msg } => {
            out.push_str("assert ");
            out.push_str(&print_expr(test));
            if let Some(m) = msg {
                out.push_str(", ");
                out.push_str(&print_expr(m));
            }
            out.push('\n');
        }
        StmtKind::TypingImport { names } => {
            let names: Vec<String> = names
                .iter()
                .map(|(n, a)| match a {
                    Some(a) => format!("{n} as {a}"),
                    None => n.clone(),
                })
                .collect();
            out.push_str(&format!("from typing import {}\n", names.join(", ")));
        }
    }
}

fn print_if(out: &mut String, s: &Stmt, level: usize, as_elif: bool) {
    let StmtKind::If { test, body, orelse, .. } = &s.kind else { return };
    out.push_str(if as_elif { "elif " } else { "if " });
    out.push_str(&print_expr(test));
    out.push_str(":\n");
    block(out, body, level + 1);
    if orelse.is_empty() {
        return;
    }
    if let [only] = &orelse[..] {
        if let StmtKind::If { is_elif: true, .. } = &only.kind {
            indent(out, level);
            print_if(out, only, level, true);
            return;
        }
    }
    indent(out, level);
    out.push_str("else:\n");
    block(out, orelse, level + 1);
}

const PREC_LAMBDA: u8 = 0;
const PREC_TEST: u8 = 1;
const PREC_OR: u8 = 2;
const PREC_AND: u8 = 3;
const PREC_NOT: u8 = 4;
const PREC_CMP: u8 = 5;
const PREC_BITOR: u8 = 6;
const PREC_UNARY: u8 = 12;
const PREC_POW: u8 = 13;
const PREC_PRIMARY: u8 = 14;
const PREC_ATOM: u8 = 15;

fn binop_prec(op: BinOpKind) -> u8 {
    match op {
        BinOpKind::BitOr => 6,
        BinOpKind::BitXor => 7,
        BinOpKind::BitAnd => 8,
        BinOpKind::LShift | BinOpKind::RShift => 9,
        BinOpKind::Add | BinOpKind::Sub => 10,
        BinOpKind::Mul | BinOpKind::Div | BinOpKind::FloorDiv | BinOpKind::Mod => 11,
        BinOpKind::Pow => PREC_POW,
    }
}

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Lambda { .. } => PREC_LAMBDA,
        ExprKind::IfExp { .. } => PREC_TEST,
        ExprKind::BoolOp { op: BoolOpKind::Or, .. } => PREC_OR,
        ExprKind::BoolOp { op: BoolOpKind::And, .. } => PREC_AND,
        ExprKind::UnaryOp { op: UnaryOpKind::Not, .. } => PREC_NOT,
        ExprKind::Compare { .. } => PREC_CMP,
        ExprKind::BinOp { op, .. } => binop_prec(*op),
        ExprKind::UnaryOp { .. } => PREC_UNARY,
        ExprKind::Call { .. } | ExprKind::MethodCall { .. } | ExprKind::Attribute { .. } | ExprKind::Subscript { .. } => {
            PREC_PRIMARY
        }
        _ => PREC_ATOM,
    }
}

pub fn print_expr(e: &Expr) -> String {
    print_expr_prec(e, PREC_LAMBDA)
}

fn print_expr_prec(e: &Expr, min: u8) -> String {
    let s = raw_expr(e);
    if prec(e) < min {
        format!("({s})")
    } else {
        s
    }
}

fn join(items: &[Expr]) -> String {
    items.iter().map(|i| print_expr_prec(i, PREC_LAMBDA)).collect::<Vec<_>>().join(", ")
}

fn generators(gens: &[Comprehension]) -> String {
    let mut out = String::new();
    for g in gens {
        out.push_str(" for ");
        out.push_str(&target_text(&g.target));
        out.push_str(" in ");
        out.push_str(&print_expr_prec(&g.iter, PREC_OR));
        for c in &g.ifs {
            out.push_str(" if ");
            out.push_str(&print_expr_prec(c, PREC_OR));
        }
    }
    out
}

fn target_text(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Tuple(items) if items.len() > 1 => {
            items.iter().map(|i| print_expr_prec(i, PREC_BITOR)).collect::<Vec<_>>().join(", ")
        }
        _ => print_expr_prec(e, PREC_BITOR),
    }
}

fn call_args(args: &[Expr], kwargs: &[(String, Expr)]) -> String {
    if let ([only], []) = (args, kwargs) {
        if let ExprKind::GenExp { elt, generators: g } = &only.kind {
            return format!("{}{}", print_expr_prec(elt, PREC_LAMBDA), generators(g));
        }
    }
    let mut parts: Vec<String> = args.iter().map(|a| print_expr_prec(a, PREC_LAMBDA)).collect();
    parts.extend(kwargs.iter().map(|(k, v)| format!("{k}={}", print_expr_prec(v, PREC_LAMBDA))));
    parts.join(", ")
}

fn receiver_text(e: &Expr) -> String {
    // `1 .real` and `-x.y` need brackets around the base.
    match &e.kind {
        ExprKind::Literal(Literal::Int(_)) | ExprKind::Literal(Literal::Float(_)) => format!("({})", raw_expr(e)),
        _ => print_expr_prec(e, PREC_PRIMARY),
    }
}

fn literal_text(l: &Literal) -> String {
    match l {
        Literal::None => "None".to_string(),
        Literal::Bool(true) => "True".to_string(),
        Literal::Bool(false) => "False".to_string(),
        Literal::Int(i) => i.to_string(),
        Literal::Float(f) if f.is_infinite() => "1e999".to_string(),
        Literal::Float(f) => float_repr(*f),
        Literal::Str(s) => str_repr(s),
    }
}

fn fstring_text(parts: &[FPart]) -> String {
    let fields: Vec<String> = parts
        .iter()
        .map(|p| match p {
            FPart::Lit(_) => String::new(),
            FPart::Expr { expr, .. } => print_expr_prec(expr, PREC_LAMBDA),
        })
        .collect();
    let quote = if fields.iter().any(|f| f.contains('\'')) { '"' } else { '\'' };
    let mut out = String::from("f");
    out.push(quote);
    for (p, field) in parts.iter().zip(fields) {
        match p {
            FPart::Lit(s) => {
                let mut esc = String::new();
                escape_into(&mut esc, s, quote);
                out.push_str(&esc.replace('{', "{{").replace('}', "}}"));
            }
            FPart::Expr { conversion, spec, .. } => {
                out.push('{');
                // A leading brace would read as an escaped `{{`.
                if field.starts_with('{') {
                    out.push(' ');
                }
                out.push_str(&field);
                if let Some(c) = conversion {
                    out.push('!');
                    out.push(*c);
                }
                if let Some(s) = spec {
                    out.push(':');
                    out.push_str(s);
                }
                out.push('}');
            }
        }
    }
    out.push(quote);
    out
}

fn raw_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Literal(l) => literal_text(l),
        ExprKind::Name(n) => n.clone(),
        ExprKind::FString(parts) => fstring_text(parts),
        ExprKind::List(items) => format!("[{}]", join(items)),
        ExprKind::Tuple(items) if items.len() == 1 => format!("({},)", print_expr_prec(&items[0], PREC_LAMBDA)),
        ExprKind::Tuple(items) => format!("({})", join(items)),
        ExprKind::Set(items) if items.is_empty() => "set()".to_string(),
        ExprKind::Set(items) => format!("{{{}}}", join(items)),
        ExprKind::Dict(items) => {
            let parts: Vec<String> = items
                .iter()
                .map(|(k, v)| format!("{}: {}", print_expr_prec(k, PREC_LAMBDA), print_expr_prec(v, PREC_LAMBDA)))
                .collect();
            format!("{{{}}}", parts.join(", "))
        }
        ExprKind::Call { func, args, kwargs } => format!("{func}({})", call_args(args, kwargs)),
        ExprKind::MethodCall { receiver, method, args, kwargs } => {
            format!("{}.{method}({})", receiver_text(receiver), call_args(args, kwargs))
        }
        ExprKind::Attribute { value, attr } => format!("{}.{attr}", receiver_text(value)),
        ExprKind::BinOp { op: BinOpKind::Pow, left, right } => {
            format!("{} ** {}", print_expr_prec(left, PREC_PRIMARY), print_expr_prec(right, PREC_UNARY))
        }
        ExprKind::BinOp { op, left, right } => {
            let p = binop_prec(*op);
            format!("{} {} {}", print_expr_prec(left, p), op.symbol(), print_expr_prec(right, p + 1))
        }
        ExprKind::UnaryOp { op: UnaryOpKind::Not, operand } => format!("not {}", print_expr_prec(operand, PREC_NOT)),
        ExprKind::UnaryOp { op, operand } => {
            let sym = match op {
                UnaryOpKind::Neg => "-",
                UnaryOpKind::Pos => "+",
                _ => "~",
            };
            format!("{sym}{}", print_expr_prec(operand, PREC_UNARY))
        }
        ExprKind::BoolOp { op, values } => {
            let (word, p) = match op {
                BoolOpKind::And => (" and ", PREC_AND + 1),
                BoolOpKind::Or => (" or ", PREC_OR + 1),
            };
            values.iter().map(|v| print_expr_prec(v, p)).collect::<Vec<_>>().join(word)
        }
        ExprKind::Compare { left, ops } => {
            let mut s = print_expr_prec(left, PREC_BITOR);
            for (op, rhs) in ops {
                s.push(' ');
                s.push_str(op.symbol());
                s.push(' ');
                s.push_str(&print_expr_prec(rhs, PREC_BITOR));
            }
            s
        }
        ExprKind::IfExp { test, body, orelse } => format!(
            "{} if {} else {}",
            print_expr_prec(body, PREC_OR),
            print_expr_prec(test, PREC_OR),
            print_expr_prec(orelse, PREC_LAMBDA)
        ),
        ExprKind::Subscript { value, index } => {
            let idx = match &index.kind {
                ExprKind::Tuple(items) if items.len() > 1 => {
                    items.iter().map(slice_part).collect::<Vec<_>>().join(", ")
                }
                _ => slice_part(index),
            };
            format!("{}[{idx}]", receiver_text(value))
        }
        ExprKind::Slice { .. } => slice_part(e),
        ExprKind::ListComp { elt, generators: g } => format!("[{}{}]", print_expr_prec(elt, PREC_LAMBDA), generators(g)),
        ExprKind::SetComp { elt, generators: g } => format!("{{{}{}}}", print_expr_prec(elt, PREC_LAMBDA), generators(g)),
        ExprKind::GenExp { elt, generators: g } => format!("({}{})", print_expr_prec(elt, PREC_LAMBDA), generators(g)),
        ExprKind::DictComp { key, value, generators: g } => format!(
            "{{{}: {}{}}}",
            print_expr_prec(key, PREC_LAMBDA),
            print_expr_prec(value, PREC_LAMBDA),
            generators(g)
        ),
        ExprKind::Lambda { params, body } => {
            if params.is_empty() {
                format!("lambda: {}", print_expr_prec(body, PREC_LAMBDA))
            } else {
                format!("lambda {}: {}", params.join(", "), print_expr_prec(body, PREC_LAMBDA))
            }
        }
    }
}

fn slice_part(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Slice { lower, upper, step } => {
            let f = |x: &Option<alloc::boxed::Box<Expr>>| x.as_ref().map(|b| print_expr_prec(b, PREC_LAMBDA)).unwrap_or_default();
            let mut s = format!("{}:{}", f(lower), f(upper));
            if step.is_some() {
                s.push(':');
                s.push_str(&f(step));
            }
            s
        }
        _ => print_expr_prec(e, PREC_LAMBDA),
    }
}

//! Read-only and mutating traversals over the tree.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::*;

/// Direct sub-expressions of `e`, in source order.
pub fn expr_children(e: &Expr) -> Vec<&Expr> {
    let mut out: Vec<&Expr> = Vec::new();
    match &e.kind {
        ExprKind::Literal(_) | ExprKind::Name(_) => {}
        ExprKind::FString(parts) => {
            for p in parts {
                if let FPart::Expr { expr, .. } = p {
                    out.push(expr);
                }
            }
        }
        ExprKind::List(items) | ExprKind::Tuple(items) | ExprKind::Set(items) => out.extend(items.iter()),
        ExprKind::Dict(items) => {
            for (k, v) in items {
                out.push(k);
                out.push(v);
            }
        }
        ExprKind::Call { args, kwargs, .. } => {
            out.extend(args.iter());
            out.extend(kwargs.iter().map(|(_, v)| v));
        }
        ExprKind::MethodCall { receiver, args, kwargs, .. } => {
            out.push(receiver);
            out.extend(args.iter());
            out.extend(kwargs.iter().map(|(_, v)| v));
        }
        ExprKind::Attribute { value, .. } => out.push(value),
        ExprKind::BinOp { left, right, .. } => {
            out.push(left);
            out.push(right);
        }
        ExprKind::UnaryOp { operand, .. } => out.push(operand),
        ExprKind::BoolOp { values, .. } => out.extend(values.iter()),
        ExprKind::Compare { left, ops } => {
            out.push(left);
            out.extend(ops.iter().map(|(_, e)| e));
        }
        ExprKind::IfExp { test, body, orelse } => {
            out.push(body);
            out.push(test);
            out.push(orelse);
        }
        ExprKind::Subscript { value, index } => {
            out.push(value);
            out.push(index);
        }
        ExprKind::Slice { lower, upper, step } => {
            for x in [lower, upper, step].into_iter().flatten() {
                out.push(x);
            }
        }
        ExprKind::ListComp { elt, generators }
        | ExprKind::SetComp { elt, generators }
        | ExprKind::GenExp { elt, generators } => {
            out.push(elt);
            push_generators(&mut out, generators);
        }
        ExprKind::DictComp { key, value, generators } => {
            out.push(key);
            out.push(value);
            push_generators(&mut out, generators);
        }
        ExprKind::Lambda { body, .. } => out.push(body),
    }
    out
}

fn push_generators<'a>(out: &mut Vec<&'a Expr>, gens: &'a [Comprehension]) {
    for g in gens {
        out.push(&g.target);
        out.push(&g.iter);
        out.extend(g.ifs.iter());
    }
}

/// Expressions owned directly by a statement (nested statements excluded).
pub fn stmt_exprs(s: &Stmt) -> Vec<&Expr> {
    let mut out = Vec::new();
    match &s.kind {
        StmtKind::FunctionDef(f) => {
            for p in &f.params {
                out.extend(p.annotation.iter());
                out.extend(p.default.iter());
            }
            out.extend(f.returns.iter());
        }
        StmtKind::Assign { targets, annotation, value } => {
            out.extend(targets.iter());
            out.extend(annotation.iter());
            out.push(value);
        }
        StmtKind::AugAssign { target, value, .. } => {
            out.push(target);
            out.push(value);
        }
        StmtKind::If { test, .. } | StmtKind::While { test, .. } => out.push(test),
        StmtKind::For { target, iter, .. } => {
            out.push(target);
            out.push(iter);
        }
        StmtKind::Return(v) => out.extend(v.iter()),
        StmtKind::Expr(e) => out.push(e),
        StmtKind::Assert { test, msg } => {
            out.push(test);
            out.extend(msg.iter());
        }
        StmtKind::Break | StmtKind::Continue | StmtKind::Pass | StmtKind::TypingImport { .. } => {}
    }
    out
}

/// Calls `f` on `e` and every expression nested in it, pre-order.
pub fn visit_expr<'a>(e: &'a Expr, f: &mut dyn FnMut(&'a Expr)) {
    f(e);
    for c in expr_children(e) {
        visit_expr(c, f);
    }
}

/// Calls `f` on every statement and every expression in `stmts`, pre-order.
pub fn visit_stmts<'a>(stmts: &'a [Stmt], fs: &mut dyn FnMut(&'a Stmt), fe: &mut dyn FnMut(&'a Expr)) {
    for s in stmts {
        fs(s);
        for e in stmt_exprs(s) {
            visit_expr(e, fe);
        }
        for b in s.blocks() {
            visit_stmts(b, fs, fe);
        }
    }
}

pub fn expr_node_count(e: &Expr) -> usize {
    let mut n = 0;
    visit_expr(e, &mut |_| n += 1);
    n
}

/// Statement plus expression nodes in the subtree rooted at `s`.
pub fn node_count(s: &Stmt) -> usize {
    let mut n = 0usize;
    let mut m = 0usize;
    visit_stmts(core::slice::from_ref(s), &mut |_| n += 1, &mut |_| m += 1);
    n + m
}

fn target_names(e: &Expr, out: &mut BTreeSet<String>) {
    match &e.kind {
        ExprKind::Name(n) => {
            out.insert(n.clone());
        }
        ExprKind::Tuple(items) | ExprKind::List(items) => {
            for i in items {
                target_names(i, out);
            }
        }
        _ => {}
    }
}

/// Every name bound anywhere in the function: parameters, assignment and
/// loop targets, comprehension variables and lambda parameters.
pub fn bound_names(func: &FunctionDef) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for p in &func.params {
        out.insert(p.name.clone());
    }
    let binds = |s: &Stmt, out: &mut BTreeSet<String>| match &s.kind {
        StmtKind::Assign { targets, .. } => targets.iter().for_each(|t| target_names(t, out)),
        StmtKind::AugAssign { target, .. } => target_names(target, out),
        StmtKind::For { target, .. } => target_names(target, out),
        StmtKind::FunctionDef(f) => {
            out.insert(f.name.clone());
        }
        _ => {}
    };
    let mut stmt_binds = BTreeSet::new();
    let mut expr_binds = BTreeSet::new();
    visit_stmts(
        &func.body,
        &mut |s| binds(s, &mut stmt_binds),
        &mut |e| match &e.kind {
            ExprKind::ListComp { generators, .. }
            | ExprKind::SetComp { generators, .. }
            | ExprKind::GenExp { generators, .. }
            | ExprKind::DictComp { generators, .. } => {
                for g in generators {
                    target_names(&g.target, &mut expr_binds);
                }
            }
            ExprKind::Lambda { params, .. } => expr_binds.extend(params.iter().cloned()),
            _ => {}
        },
    );
    out.extend(stmt_binds);
    out.extend(expr_binds);
    out
}

/// Names assigned by statements of the function body (not comprehension or lambda scopes).
pub fn assigned_names(func: &FunctionDef) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    visit_stmts(
        &func.body,
        &mut |s| match &s.kind {
            StmtKind::Assign { targets, .. } => targets.iter().for_each(|t| target_names(t, &mut out)),
            StmtKind::AugAssign { target, .. } => target_names(target, &mut out),
            StmtKind::For { target, .. } => target_names(target, &mut out),
            _ => {}
        },
        &mut |_| {},
    );
    out
}

// ---- span stripping (structural comparison) ----

fn strip_expr(e: &mut Expr) {
    e.span = Span::default();
    match &mut e.kind {
        ExprKind::Literal(_) | ExprKind::Name(_) => {}
        ExprKind::FString(parts) => {
            for p in parts {
                if let FPart::Expr { expr, .. } = p {
                    strip_expr(expr);
                }
            }
        }
        ExprKind::List(items) | ExprKind::Tuple(items) | ExprKind::Set(items) => items.iter_mut().for_each(strip_expr),
        ExprKind::Dict(items) => {
            for (k, v) in items {
                strip_expr(k);
                strip_expr(v);
            }
        }
        ExprKind::Call { args, kwargs, .. } => {
            args.iter_mut().for_each(strip_expr);
            kwargs.iter_mut().for_each(|(_, v)| strip_expr(v));
        }
        ExprKind::MethodCall { receiver, args, kwargs, .. } => {
            strip_expr(receiver);
            args.iter_mut().for_each(strip_expr);
            kwargs.iter_mut().for_each(|(_, v)| strip_expr(v));
        }
        ExprKind::Attribute { value, .. } => strip_expr(value),
        ExprKind::BinOp { left, right, .. } => {
            strip_expr(left);
            strip_expr(right);
        }
        ExprKind::UnaryOp { operand, .. } => strip_expr(operand),
        ExprKind::BoolOp { values, .. } => values.iter_mut().for_each(strip_expr),
        ExprKind::Compare { left, ops } => {
            strip_expr(left);
            ops.iter_mut().for_each(|(_, e)| strip_expr(e));
        }
        ExprKind::IfExp { test, body, orelse } => {
            strip_expr(test);
            strip_expr(body);
            strip_expr(orelse);
        }
        ExprKind::Subscript { value, index } => {
            strip_expr(value);
            strip_expr(index);
        }
        ExprKind::Slice { lower, upper, step } => {
            for x in [lower, upper, step].into_iter().flatten() {
                strip_expr(x);
            }
        }
        ExprKind::ListComp { elt, generators }
        | ExprKind::SetComp { elt, generators }
        | ExprKind::GenExp { elt, generators } => {
            strip_expr(elt);
            strip_gens(generators);
        }
        ExprKind::DictComp { key, value, generators } => {
            strip_expr(key);
            strip_expr(value);
            strip_gens(generators);
        }
        ExprKind::Lambda { body, .. } => strip_expr(body),
    }
}

fn strip_gens(gens: &mut [Comprehension]) {
    for g in gens {
        strip_expr(&mut g.target);
        strip_expr(&mut g.iter);
        g.ifs.iter_mut().for_each(strip_expr);
    }
}

fn strip_stmts(stmts: &mut [Stmt]) {
    for s in stmts {
        s.id = 0;
        s.span = Span::default();
        match &mut s.kind {
            StmtKind::FunctionDef(f) => {
                for p in &mut f.params {
                    p.annotation.iter_mut().for_each(strip_expr);
                    p.default.iter_mut().for_each(strip_expr);
                }
                f.returns.iter_mut().for_each(strip_expr);
                strip_stmts(&mut f.body);
            }
            StmtKind::Assign { targets, annotation, value } => {
                targets.iter_mut().for_each(strip_expr);
                annotation.iter_mut().for_each(strip_expr);
                strip_expr(value);
            }
            StmtKind::AugAssign { target, value, .. } => {
                strip_expr(target);
                strip_expr(value);
            }
            StmtKind::If { test, body, orelse, .. } => {
                strip_expr(test);
                strip_stmts(body);
                strip_stmts(orelse);
            }
            StmtKind::For { target, iter, body } => {
                strip_expr(target);
                strip_expr(iter);
                strip_stmts(body);
            }
            StmtKind::While { test, body } => {
                strip_expr(test);
                strip_stmts(body);
            }
            StmtKind::Return(v) => v.iter_mut().for_each(strip_expr),
            StmtKind::Expr(e) => strip_expr(e),
            StmtKind::Assert { test, msg } => {
                strip_expr(test);
                msg.iter_mut().for_each(strip_expr);
            }
            StmtKind::Break | StmtKind::Continue | StmtKind::Pass | StmtKind::TypingImport { .. } => {}
        }
    }
}

/// Copy of the tree with spans, statement ids and source metadata cleared.
pub fn strip_positions(tree: &SyntaxTree) -> SyntaxTree {
    let mut t = tree.clone();
    strip_stmts(&mut t.body);
    t.line_count = 0;
    t.comments.clear();
    t.source_id.clear();
    t
}

/// Equality ignoring positions.
pub fn structurally_equal(a: &SyntaxTree, b: &SyntaxTree) -> bool {
    strip_positions(a).body == strip_positions(b).body
}

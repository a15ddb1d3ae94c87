//! Statement and expression evaluation with event recording.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::rc::Rc;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cell::RefCell;

use super::error::{ErrorKind, Exc, VResult};
use super::iter::{view_items, GenState, IterState};
use super::ops;
use super::render::{render_value, repr};
use super::trace::{Binding, Covered, EventKind, Outcome, Trace, TraceEvent};
use super::value::{Dict, Func, RangeV, Set, Value};
use super::Limits;
use crate::num::Int;
use crate::subjectlang::walk::assigned_names;
use crate::subjectlang::{
    BoolOpKind, CmpOp, Comprehension, Expr, ExprKind, FPart, FunctionDef, Literal, Stmt, StmtKind, SyntaxTree,
};

pub(super) type Scope = Vec<(Rc<str>, Value)>;

pub(super) struct Env {
    pub locals: Scope,
    /// Enclosing bindings of a lambda or generator expression, searched last to first.
    pub captured: Option<Rc<Scope>>,
    /// Comprehension scopes, innermost last.
    pub layers: Vec<Scope>,
    /// Literal forms of `locals` as of the last event.
    pub snapshot: Vec<(Rc<str>, String)>,
    pub func: Rc<str>,
    pub frame: u32,
    pub depth: u32,
    /// Names assigned anywhere in the function body.
    pub local_names: Option<Rc<BTreeSet<String>>>,
}

impl Env {
    fn bare(captured: Option<Rc<Scope>>, func: Rc<str>) -> Env {
        Env {
            locals: Vec::new(),
            captured,
            layers: Vec::new(),
            snapshot: Vec::new(),
            func,
            frame: 0,
            depth: 0,
            local_names: None,
        }
    }

    fn lookup(&self, name: &str) -> Option<&Value> {
        for layer in self.layers.iter().rev() {
            if let Some((_, v)) = layer.iter().find(|(n, _)| &**n == name) {
                return Some(v);
            }
        }
        if let Some((_, v)) = self.locals.iter().find(|(n, _)| &**n == name) {
            return Some(v);
        }
        self.captured.as_ref()?.iter().rev().find(|(n, _)| &**n == name).map(|(_, v)| v)
    }

    fn bind(&mut self, name: &str, v: Value, in_layer: bool) {
        let scope = if in_layer { self.layers.last_mut() } else { None };
        let scope = match scope {
            Some(s) => s,
            None => &mut self.locals,
        };
        match scope.iter_mut().find(|(n, _)| &**n == name) {
            Some(slot) => slot.1 = v,
            None => scope.push((Rc::from(name), v)),
        }
    }

    /// Everything visible from here, outermost first.
    fn flatten(&self) -> Rc<Scope> {
        let mut out: Scope = match &self.captured {
            Some(c) => (**c).clone(),
            None => Vec::new(),
        };
        out.extend(self.locals.iter().cloned());
        for l in &self.layers {
            out.extend(l.iter().cloned());
        }
        Rc::new(out)
    }
}

pub(super) enum Flow {
    Normal,
    Break,
    Continue,
    Return(Value),
}

pub struct Interp<'t> {
    pub(super) tree: &'t SyntaxTree,
    funcs: BTreeMap<&'t str, (&'t Stmt, &'t FunctionDef)>,
    local_names: BTreeMap<&'t str, Rc<BTreeSet<String>>>,
    defaults: BTreeMap<&'t str, Vec<Option<Value>>>,
    limits: Limits,
    pub(super) events: Vec<TraceEvent>,
    ordinals: BTreeMap<u32, u32>,
    pub(super) stdout: String,
    work: u64,
    work_budget: u64,
    /// Active frames: user calls and lambda calls.
    depth: u32,
    frames: u32,
    exprs: BTreeMap<usize, Rc<Expr>>,
    covered: Covered,
}

fn name_error(name: &str) -> Exc {
    Exc::new(ErrorKind::NameError, format!("name '{name}' is not defined"))
}

fn step_limit() -> Exc {
    Exc::new(ErrorKind::StepLimitExceeded, "step budget exhausted")
}

impl<'t> Interp<'t> {
    pub fn new(tree: &'t SyntaxTree, limits: Limits) -> Self {
        let mut funcs = BTreeMap::new();
        let mut local_names = BTreeMap::new();
        for s in &tree.body {
            if let StmtKind::FunctionDef(f) = &s.kind {
                funcs.insert(f.name.as_str(), (s, f));
                local_names.insert(f.name.as_str(), Rc::new(assigned_names(f)));
            }
        }
        Interp {
            tree,
            funcs,
            local_names,
            defaults: BTreeMap::new(),
            limits,
            events: Vec::new(),
            ordinals: BTreeMap::new(),
            stdout: String::new(),
            work: 0,
            work_budget: limits.step_budget.saturating_mul(50).max(10_000),
            depth: 0,
            frames: 0,
            exprs: BTreeMap::new(),
            covered: Covered::default(),
        }
    }

    /// Calls `entry` with `args` and collects the trace.
    pub fn run(mut self, entry: &str, args: &[Value], kwargs: &[(String, Value)]) -> Trace {
        for s in &self.tree.body {
            self.covered.lines.insert(s.span.line);
        }
        let args: Vec<Value> = args.iter().map(Value::deep_copy).collect();
        let kwargs: Vec<(String, Value)> = kwargs.iter().map(|(k, v)| (k.clone(), v.deep_copy())).collect();
        let mut input = Vec::new();
        let outcome = match self.funcs.get(entry).copied() {
            None => Outcome::Failure { kind: ErrorKind::NameError, line: 1, message: format!("name '{entry}' is not defined") },
            Some((stmt, _)) => match self.call_user_inner(entry, args, kwargs, Some(&mut input)) {
                Ok(v) => Outcome::Return(v),
                Err(e) => Outcome::Failure { kind: e.kind, line: e.line.unwrap_or(stmt.span.line), message: e.message },
            },
        };
        let step_count = self.events.len() as u64;
        Trace {
            entry: entry.to_string(),
            events: self.events,
            input,
            outcome,
            stdout: self.stdout,
            covered: self.covered,
            step_count,
        }
    }

    pub(super) fn charge(&mut self, units: u64) -> VResult<()> {
        self.work += units;
        if self.work > self.work_budget {
            return Err(step_limit());
        }
        Ok(())
    }

    fn cached(&mut self, e: &Expr) -> Rc<Expr> {
        let key = e as *const Expr as usize;
        self.exprs.entry(key).or_insert_with(|| Rc::new(e.clone())).clone()
    }

    // ---- events -------------------------------------------------------

    fn emit(&mut self, env: &mut Env, line: u32, kind: EventKind, stmt: Option<u32>, branch: Option<bool>) -> VResult<()> {
        if self.events.len() as u64 >= self.limits.step_budget {
            return Err(step_limit());
        }
        let mut changed = Vec::new();
        let mut snapshot = Vec::with_capacity(env.locals.len());
        let mut rendered = 0;
        for (name, v) in &env.locals {
            let r = repr(v);
            rendered += r.len();
            let same = env.snapshot.iter().any(|(n, old)| n == name && *old == r);
            if !same {
                changed.push(Binding { name: name.clone(), json: render_value(v), repr: r.clone() });
            }
            snapshot.push((name.clone(), r));
        }
        env.snapshot = snapshot;
        // Snapshots of large states are work too.
        self.charge(rendered as u64 / 4)?;
        let ord = self.ordinals.entry(line).or_insert(0);
        *ord += 1;
        self.covered.lines.insert(line);
        if let (Some(id), Some(b)) = (stmt, branch) {
            self.covered.branches.insert((id, b));
        }
        self.events.push(TraceEvent {
            line,
            ordinal: *ord,
            changed,
            kind,
            stmt,
            branch,
            depth: env.depth,
            frame: env.frame,
            func: env.func.clone(),
        });
        Ok(())
    }

    // ---- calls ----------------------------------------------------------

    pub(super) fn call_user(&mut self, name: &str, args: Vec<Value>, kwargs: Vec<(String, Value)>) -> VResult<Value> {
        self.call_user_inner(name, args, kwargs, None)
    }

    fn defaults_for(&mut self, name: &'t str, f: &'t FunctionDef) -> VResult<Vec<Option<Value>>> {
        if let Some(d) = self.defaults.get(name) {
            return Ok(d.clone());
        }
        let mut env = Env::bare(None, Rc::from("<module>"));
        let mut out = Vec::new();
        for p in &f.params {
            out.push(match &p.default {
                Some(e) => Some(self.eval(&mut env, e)?),
                None => None,
            });
        }
        self.defaults.insert(name, out.clone());
        Ok(out)
    }

    fn call_user_inner(
        &mut self,
        name: &str,
        args: Vec<Value>,
        kwargs: Vec<(String, Value)>,
        input: Option<&mut Vec<Binding>>,
    ) -> VResult<Value> {
        let (stmt, f) = *self.funcs.get(name).ok_or_else(|| name_error(name))?;
        let fname: &'t str = f.name.as_str();
        let def_line = stmt.span.line;
        let defaults = self.defaults_for(fname, f).map_err(|e| e.at(def_line))?;
        let bound = bind_params(fname, &f.params.iter().map(|p| p.name.as_str()).collect::<Vec<_>>(), &defaults, args, kwargs)?;
        if self.depth + 1 > self.limits.recursion_budget {
            return Err(Exc::new(ErrorKind::RecursionLimit, "maximum recursion depth exceeded"));
        }
        let mut env = Env::bare(None, Rc::from(fname));
        env.locals = bound;
        env.frame = self.frames;
        env.depth = self.depth;
        env.local_names = self.local_names.get(fname).cloned();
        self.frames += 1;
        if let Some(input) = input {
            *input = env
                .locals
                .iter()
                .map(|(n, v)| Binding { name: n.clone(), json: render_value(v), repr: repr(v) })
                .collect();
        }
        self.depth += 1;
        let result = self.run_frame(&mut env, stmt, f);
        self.depth -= 1;
        result
    }

    fn run_frame(&mut self, env: &mut Env, stmt: &'t Stmt, f: &'t FunctionDef) -> VResult<Value> {
        let def_line = stmt.span.line;
        self.emit(env, def_line, EventKind::Entry, None, None).map_err(|e| e.at(def_line))?;
        let flow = self.exec_block(env, &f.body)?;
        match flow {
            Flow::Return(v) => Ok(v),
            _ => {
                let frame = env.frame;
                let last = self.events.iter_mut().rev().find(|e| e.frame == frame);
                match last {
                    Some(ev) if ev.kind != EventKind::Entry => ev.kind = EventKind::Return,
                    _ => self.emit(env, def_line, EventKind::Return, None, None).map_err(|e| e.at(def_line))?,
                }
                Ok(Value::None)
            }
        }
    }

    pub(super) fn call_value(&mut self, f: &Value, args: Vec<Value>, kwargs: Vec<(String, Value)>) -> VResult<Value> {
        let Value::Func(func) = f else {
            return Err(Exc::type_error(format!("'{}' object is not callable", f.type_name())));
        };
        match &**func {
            Func::Builtin(name) => self.call_builtin(name, args, kwargs),
            Func::Method { receiver, name } => {
                let receiver = receiver.clone();
                let name = name.clone();
                self.call_method(&receiver, &name, args, kwargs)
            }
            Func::User(name) => {
                let name = name.clone();
                self.call_user(&name, args, kwargs)
            }
            Func::Lambda { params, body, env } => {
                let names: Vec<&str> = params.iter().map(|p| &**p).collect();
                let defaults = alloc::vec![None; names.len()];
                let bound = bind_params("<lambda>", &names, &defaults, args, kwargs)?;
                if self.depth + 1 > self.limits.recursion_budget {
                    return Err(Exc::new(ErrorKind::RecursionLimit, "maximum recursion depth exceeded"));
                }
                let mut lenv = Env::bare(Some(env.clone()), Rc::from("<lambda>"));
                lenv.locals = bound;
                let body = body.clone();
                self.depth += 1;
                let r = self.eval(&mut lenv, &body);
                self.depth -= 1;
                r
            }
        }
    }

    // ---- statements -----------------------------------------------------

    pub(super) fn exec_block(&mut self, env: &mut Env, stmts: &[Stmt]) -> VResult<Flow> {
        for s in stmts {
            match self.exec_stmt(env, s)? {
                Flow::Normal => {}
                other => return Ok(other),
            }
        }
        Ok(Flow::Normal)
    }

    fn exec_stmt(&mut self, env: &mut Env, s: &Stmt) -> VResult<Flow> {
        let line = s.span.line;
        self.exec_stmt_inner(env, s).map_err(|e| e.at(line))
    }

    fn exec_stmt_inner(&mut self, env: &mut Env, s: &Stmt) -> VResult<Flow> {
        let line = s.span.line;
        let id = Some(s.id);
        match &s.kind {
            StmtKind::Assign { targets, value, .. } => {
                let v = self.eval(env, value)?;
                for t in targets {
                    self.assign(env, t, v.clone(), false)?;
                }
                self.emit(env, line, EventKind::Statement, id, None)?;
            }
            StmtKind::AugAssign { target, op, value } => {
                match &target.kind {
                    ExprKind::Name(n) => {
                        let cur = self.load(env, n)?;
                        let rhs = self.eval(env, value)?;
                        let r = self.inplace(*op, &cur, &rhs)?;
                        env.bind(n, r, false);
                    }
                    ExprKind::Subscript { value: obj, index } => {
                        let o = self.eval(env, obj)?;
                        let i = self.eval_index(env, index)?;
                        let cur = self.getitem(&o, &i)?;
                        let rhs = self.eval(env, value)?;
                        let r = self.inplace(*op, &cur, &rhs)?;
                        self.setitem(&o, &i, r)?;
                    }
                    _ => return Err(Exc::new(ErrorKind::UnsupportedConstruct, "augmented assignment target")),
                }
                self.emit(env, line, EventKind::Statement, id, None)?;
            }
            StmtKind::If { test, body, orelse, .. } => {
                let t = self.eval(env, test)?.truthy();
                self.emit(env, line, EventKind::Statement, id, Some(t))?;
                return if t { self.exec_block(env, body) } else { self.exec_block(env, orelse) };
            }
            StmtKind::For { target, iter, body } => {
                let src = self.eval(env, iter)?;
                let it = self.iter_of(&src)?;
                loop {
                    let Some(item) = self.iter_next(&it)? else {
                        self.emit(env, line, EventKind::Statement, id, Some(false))?;
                        break;
                    };
                    self.assign(env, target, item, false)?;
                    self.emit(env, line, EventKind::Statement, id, Some(true))?;
                    match self.exec_block(env, body)? {
                        Flow::Break => break,
                        Flow::Return(v) => return Ok(Flow::Return(v)),
                        Flow::Normal | Flow::Continue => {}
                    }
                }
            }
            StmtKind::While { test, body } => loop {
                let t = self.eval(env, test)?.truthy();
                self.emit(env, line, EventKind::Statement, id, Some(t))?;
                if !t {
                    break;
                }
                match self.exec_block(env, body)? {
                    Flow::Break => break,
                    Flow::Return(v) => return Ok(Flow::Return(v)),
                    Flow::Normal | Flow::Continue => {}
                }
            },
            StmtKind::Return(value) => {
                let v = match value {
                    Some(e) => self.eval(env, e)?,
                    None => Value::None,
                };
                self.emit(env, line, EventKind::Return, id, None)?;
                return Ok(Flow::Return(v));
            }
            StmtKind::Break => {
                self.emit(env, line, EventKind::Statement, id, None)?;
                return Ok(Flow::Break);
            }
            StmtKind::Continue => {
                self.emit(env, line, EventKind::Statement, id, None)?;
                return Ok(Flow::Continue);
            }
            StmtKind::Pass | StmtKind::TypingImport { .. } => self.emit(env, line, EventKind::Statement, id, None)?,
            StmtKind::Expr(e) => {
                self.eval(env, e)?;
                self.emit(env, line, EventKind::Statement, id, None)?;
            }
            StmtKind::Assert { test, msg } => {
                if !self.eval(env, test)?.truthy() {
                    let m = match msg {
                        Some(m) => super::render::to_str(&self.eval(env, m)?),
                        None => String::new(),
                    };
                    return Err(Exc::new(ErrorKind::AssertionError, m));
                }
                self.emit(env, line, EventKind::Statement, id, None)?;
            }
            StmtKind::FunctionDef(f) => {
                return Err(Exc::new(ErrorKind::UnsupportedConstruct, format!("nested function definition '{}'", f.name)))
            }
        }
        Ok(Flow::Normal)
    }

    fn inplace(&mut self, op: crate::subjectlang::BinOpKind, a: &Value, b: &Value) -> VResult<Value> {
        let items = match (op, a) {
            (crate::subjectlang::BinOpKind::Add, Value::List(_)) if !matches!(b, Value::List(_)) => Some(self.collect(b)?),
            _ => None,
        };
        ops::inplace_binop(op, a, b, |_| Ok(items.unwrap_or_default()))
    }

    pub(super) fn assign(&mut self, env: &mut Env, target: &Expr, v: Value, in_layer: bool) -> VResult<()> {
        match &target.kind {
            ExprKind::Name(n) => {
                env.bind(n, v, in_layer);
                Ok(())
            }
            ExprKind::Tuple(elts) | ExprKind::List(elts) => {
                let items = self.collect(&v)?;
                if items.len() != elts.len() {
                    return Err(if items.len() > elts.len() {
                        Exc::value_error(format!("too many values to unpack (expected {})", elts.len()))
                    } else {
                        Exc::value_error(format!(
                            "not enough values to unpack (expected {}, got {})",
                            elts.len(),
                            items.len()
                        ))
                    });
                }
                for (t, x) in elts.iter().zip(items) {
                    self.assign(env, t, x, in_layer)?;
                }
                Ok(())
            }
            ExprKind::Subscript { value, index } => {
                let o = self.eval(env, value)?;
                let i = self.eval_index(env, index)?;
                self.setitem(&o, &i, v)
            }
            _ => Err(Exc::new(ErrorKind::UnsupportedConstruct, "assignment target")),
        }
    }

    // ---- expressions ----------------------------------------------------

    fn load(&mut self, env: &Env, name: &str) -> VResult<Value> {
        if let Some(v) = env.lookup(name) {
            return Ok(v.clone());
        }
        if env.layers.is_empty() && env.local_names.as_ref().is_some_and(|s| s.contains(name)) {
            return Err(Exc::new(
                ErrorKind::NameError,
                format!("local variable '{name}' referenced before assignment"),
            ));
        }
        if let Some((_, f)) = self.funcs.get(name) {
            return Ok(Value::Func(Rc::new(Func::User(Rc::from(f.name.as_str())))));
        }
        match super::builtins::builtin_name(name) {
            Some(b) => Ok(Value::Func(Rc::new(Func::Builtin(b)))),
            None => Err(name_error(name)),
        }
    }

    fn eval_args(&mut self, env: &mut Env, args: &[Expr], kwargs: &[(String, Expr)]) -> VResult<(Vec<Value>, Vec<(String, Value)>)> {
        let mut a = Vec::with_capacity(args.len());
        for e in args {
            a.push(self.eval(env, e)?);
        }
        let mut k = Vec::with_capacity(kwargs.len());
        for (n, e) in kwargs {
            k.push((n.clone(), self.eval(env, e)?));
        }
        Ok((a, k))
    }

    /// Subscript index: slices become `Value::Tuple` markers via [`SliceSpec`].
    fn eval_index(&mut self, env: &mut Env, index: &Expr) -> VResult<Index> {
        match &index.kind {
            ExprKind::Slice { lower, upper, step } => {
                let part = |e: &Option<alloc::boxed::Box<Expr>>, me: &mut Self, env: &mut Env| -> VResult<Value> {
                    match e {
                        Some(e) => me.eval(env, e),
                        None => Ok(Value::None),
                    }
                };
                let lo = part(lower, self, env)?;
                let hi = part(upper, self, env)?;
                let st = part(step, self, env)?;
                Ok(Index::Slice(lo, hi, st))
            }
            _ => Ok(Index::Item(self.eval(env, index)?)),
        }
    }

    pub(super) fn eval(&mut self, env: &mut Env, e: &Expr) -> VResult<Value> {
        match &e.kind {
            ExprKind::Literal(l) => Ok(match l {
                Literal::None => Value::None,
                Literal::Bool(b) => Value::Bool(*b),
                Literal::Int(i) => Value::Int(i.clone()),
                Literal::Float(f) => Value::Float(*f),
                Literal::Str(s) => Value::str(s),
            }),
            ExprKind::Name(n) => self.load(env, n),
            ExprKind::FString(parts) => {
                let mut out = String::new();
                for p in parts {
                    match p {
                        FPart::Lit(s) => out.push_str(s),
                        FPart::Expr { expr, conversion, spec } => {
                            let v = self.eval(env, expr)?;
                            let v = super::format::convert(&v, *conversion);
                            out.push_str(&super::builtins::format_checked(&v, spec.as_deref().unwrap_or(""))?);
                        }
                    }
                }
                Ok(Value::Str(Rc::from(out)))
            }
            ExprKind::List(elts) => {
                let mut v = Vec::with_capacity(elts.len());
                for x in elts {
                    v.push(self.eval(env, x)?);
                }
                Ok(Value::list(v))
            }
            ExprKind::Tuple(elts) => {
                let mut v = Vec::with_capacity(elts.len());
                for x in elts {
                    v.push(self.eval(env, x)?);
                }
                Ok(Value::tuple(v))
            }
            ExprKind::Set(elts) => {
                let mut s = Set::new();
                for x in elts {
                    let v = self.eval(env, x)?;
                    s.insert(v)?;
                }
                Ok(Value::set(s))
            }
            ExprKind::Dict(pairs) => {
                let mut d = Dict::new();
                for (k, v) in pairs {
                    let k = self.eval(env, k)?;
                    let v = self.eval(env, v)?;
                    d.insert(k, v)?;
                }
                Ok(Value::dict(d))
            }
            ExprKind::Call { func, args, kwargs } => {
                let f = self.load(env, func)?;
                let (a, k) = self.eval_args(env, args, kwargs)?;
                self.call_value(&f, a, k)
            }
            ExprKind::MethodCall { receiver, method, args, kwargs } => {
                let r = self.eval(env, receiver)?;
                let (a, k) = self.eval_args(env, args, kwargs)?;
                self.call_method(&r, method, a, k)
            }
            ExprKind::Attribute { value, attr } => {
                let v = self.eval(env, value)?;
                super::methods::attribute(&v, attr)
            }
            ExprKind::BinOp { op, left, right } => {
                let a = self.eval(env, left)?;
                let b = self.eval(env, right)?;
                ops::binop(*op, &a, &b)
            }
            ExprKind::UnaryOp { op, operand } => {
                let v = self.eval(env, operand)?;
                ops::unary(*op, &v)
            }
            ExprKind::BoolOp { op, values } => {
                let mut last = Value::None;
                for (i, x) in values.iter().enumerate() {
                    last = self.eval(env, x)?;
                    let t = last.truthy();
                    let stop = match op {
                        BoolOpKind::And => !t,
                        BoolOpKind::Or => t,
                    };
                    if stop || i + 1 == values.len() {
                        break;
                    }
                }
                Ok(last)
            }
            ExprKind::Compare { left, ops: chain } => {
                let mut a = self.eval(env, left)?;
                for (op, rhs) in chain {
                    let b = self.eval(env, rhs)?;
                    if !self.compare(*op, &a, &b)? {
                        return Ok(Value::Bool(false));
                    }
                    a = b;
                }
                Ok(Value::Bool(true))
            }
            ExprKind::IfExp { test, body, orelse } => {
                if self.eval(env, test)?.truthy() {
                    self.eval(env, body)
                } else {
                    self.eval(env, orelse)
                }
            }
            ExprKind::Subscript { value, index } => {
                let v = self.eval(env, value)?;
                let i = self.eval_index(env, index)?;
                self.getitem(&v, &i)
            }
            ExprKind::Slice { .. } => Err(Exc::new(ErrorKind::UnsupportedConstruct, "slice outside subscript")),
            ExprKind::ListComp { elt, generators } => {
                let mut out = Vec::new();
                self.comprehension(env, generators, &mut |me, env| {
                    let v = me.eval(env, elt)?;
                    if out.len() >= ops::MAX_SEQ {
                        return Err(step_limit());
                    }
                    out.push(v);
                    Ok(())
                })?;
                Ok(Value::list(out))
            }
            ExprKind::SetComp { elt, generators } => {
                let mut out = Set::new();
                self.comprehension(env, generators, &mut |me, env| {
                    let v = me.eval(env, elt)?;
                    out.insert(v)?;
                    Ok(())
                })?;
                Ok(Value::set(out))
            }
            ExprKind::DictComp { key, value, generators } => {
                let mut out = Dict::new();
                self.comprehension(env, generators, &mut |me, env| {
                    let k = me.eval(env, key)?;
                    let v = me.eval(env, value)?;
                    out.insert(k, v)?;
                    Ok(())
                })?;
                Ok(Value::dict(out))
            }
            ExprKind::GenExp { generators, .. } => {
                let first = self.eval(env, &generators[0].iter)?;
                let it = self.iter_of(&first)?;
                let node = self.cached(e);
                Ok(Value::Iter(Rc::new(RefCell::new(IterState::Gen(GenState {
                    node,
                    captured: env.flatten(),
                    scope: Vec::new(),
                    stack: alloc::vec![it],
                })))))
            }
            ExprKind::Lambda { params, body } => {
                let body = self.cached(body);
                Ok(Value::Func(Rc::new(Func::Lambda {
                    params: params.iter().map(|p| Rc::from(p.as_str())).collect(),
                    body,
                    env: env.flatten(),
                })))
            }
        }
    }

    fn compare(&mut self, op: CmpOp, a: &Value, b: &Value) -> VResult<bool> {
        match op {
            CmpOp::Eq => Ok(super::value::py_eq(a, b)),
            CmpOp::NotEq => Ok(!super::value::py_eq(a, b)),
            CmpOp::Is => Ok(a.same_object(b)),
            CmpOp::IsNot => Ok(!a.same_object(b)),
            CmpOp::In => self.contains(b, a),
            CmpOp::NotIn => Ok(!self.contains(b, a)?),
            _ => ops::order(op, a, b),
        }
    }

    pub(super) fn contains(&mut self, container: &Value, item: &Value) -> VResult<bool> {
        if let Value::Iter(_) = container {
            while let Some(x) = self.iter_next(container)? {
                if x.same_object(item) || super::value::py_eq(&x, item) {
                    return Ok(true);
                }
            }
            return Ok(false);
        }
        ops::contains(container, item)
    }

    /// Runs the generator clauses, calling `sink` for every produced binding set.
    fn comprehension(
        &mut self,
        env: &mut Env,
        gens: &[Comprehension],
        sink: &mut dyn FnMut(&mut Self, &mut Env) -> VResult<()>,
    ) -> VResult<()> {
        let first = self.eval(env, &gens[0].iter)?;
        let it = self.iter_of(&first)?;
        env.layers.push(Vec::new());
        let r = self.comp_level(env, gens, 0, it, sink);
        env.layers.pop();
        r
    }

    fn comp_level(
        &mut self,
        env: &mut Env,
        gens: &[Comprehension],
        level: usize,
        it: Value,
        sink: &mut dyn FnMut(&mut Self, &mut Env) -> VResult<()>,
    ) -> VResult<()> {
        let g = &gens[level];
        'items: while let Some(item) = self.iter_next(&it)? {
            self.assign(env, &g.target, item, true)?;
            for cond in &g.ifs {
                if !self.eval(env, cond)?.truthy() {
                    continue 'items;
                }
            }
            if level + 1 == gens.len() {
                sink(self, env)?;
            } else {
                let src = self.eval(env, &gens[level + 1].iter)?;
                let inner = self.iter_of(&src)?;
                self.comp_level(env, gens, level + 1, inner, sink)?;
            }
        }
        Ok(())
    }

    // ---- iteration ------------------------------------------------------

    pub(super) fn iter_of(&mut self, v: &Value) -> VResult<Value> {
        let state = match v {
            Value::Iter(_) => return Ok(v.clone()),
            Value::List(l) => IterState::List { list: l.clone(), idx: 0 },
            Value::Tuple(t) => IterState::Items { items: t.clone(), idx: 0 },
            Value::Str(s) => IterState::Items { items: s.chars().map(|c| Value::str(c.encode_utf8(&mut [0; 4]))).collect(), idx: 0 },
            Value::Dict(d) => IterState::Items { items: d.borrow().keys().cloned().collect(), idx: 0 },
            Value::Set(s) => IterState::Items { items: Rc::from(s.borrow().items()), idx: 0 },
            Value::View(kind, d) => IterState::Items { items: view_items(*kind, &d.borrow()).into(), idx: 0 },
            Value::Range(r) => IterState::Range { next: r.start, left: r.len(), step: r.step },
            other => return Err(Exc::type_error(format!("'{}' object is not iterable", other.type_name()))),
        };
        Ok(Value::Iter(Rc::new(RefCell::new(state))))
    }

    pub(super) fn iter_next(&mut self, it: &Value) -> VResult<Option<Value>> {
        let Value::Iter(cell) = it else { return Err(Exc::type_error(format!("'{}' object is not an iterator", it.type_name()))) };
        self.charge(1)?;
        {
            let mut st = cell.borrow_mut();
            match &mut *st {
                IterState::List { list, idx } => {
                    let item = list.borrow().get(*idx).cloned();
                    *idx += 1;
                    if item.is_none() {
                        *st = IterState::Done;
                    }
                    return Ok(item);
                }
                IterState::Items { items, idx } | IterState::Reversed { items, idx } => {
                    let item = items.get(*idx).cloned();
                    *idx += 1;
                    if item.is_none() {
                        *st = IterState::Done;
                    }
                    return Ok(item);
                }
                IterState::Range { next, left, step } => {
                    if *left == 0 {
                        *st = IterState::Done;
                        return Ok(None);
                    }
                    let v = *next;
                    *left -= 1;
                    *next = next.wrapping_add(*step);
                    return Ok(Some(Value::int(v)));
                }
                IterState::Done => return Ok(None),
                _ => {}
            }
        }
        let state = core::mem::replace(&mut *cell.borrow_mut(), IterState::Done);
        let (next, state) = self.advance(state)?;
        if next.is_some() {
            *cell.borrow_mut() = state;
        }
        Ok(next)
    }

    fn advance(&mut self, state: IterState) -> VResult<(Option<Value>, IterState)> {
        match state {
            IterState::Enumerate { inner, count } => match self.iter_next(&inner)? {
                Some(x) => {
                    let next = count.add(&Int::from(1));
                    Ok((Some(Value::tuple(alloc::vec![Value::Int(count), x])), IterState::Enumerate { inner, count: next }))
                }
                None => Ok((None, IterState::Done)),
            },
            IterState::Zip { inners } => {
                let mut row = Vec::with_capacity(inners.len());
                for i in &inners {
                    match self.iter_next(i)? {
                        Some(x) => row.push(x),
                        None => return Ok((None, IterState::Done)),
                    }
                }
                if inners.is_empty() {
                    return Ok((None, IterState::Done));
                }
                Ok((Some(Value::tuple(row)), IterState::Zip { inners }))
            }
            IterState::Map { func, inners } => {
                let mut row = Vec::with_capacity(inners.len());
                for i in &inners {
                    match self.iter_next(i)? {
                        Some(x) => row.push(x),
                        None => return Ok((None, IterState::Done)),
                    }
                }
                let v = self.call_value(&func, row, Vec::new())?;
                Ok((Some(v), IterState::Map { func, inners }))
            }
            IterState::Filter { func, inner } => loop {
                let Some(x) = self.iter_next(&inner)? else { return Ok((None, IterState::Done)) };
                let keep = match &func {
                    Value::None => x.truthy(),
                    f => self.call_value(f, alloc::vec![x.clone()], Vec::new())?.truthy(),
                };
                if keep {
                    return Ok((Some(x), IterState::Filter { func, inner }));
                }
            },
            IterState::Gen(g) => {
                let (v, g) = self.gen_next(g)?;
                Ok((v, IterState::Gen(g)))
            }
            other => Ok((None, other)),
        }
    }

    fn gen_next(&mut self, mut g: GenState) -> VResult<(Option<Value>, GenState)> {
        let node = g.node.clone();
        let ExprKind::GenExp { elt, generators } = &node.kind else {
            return Ok((None, g));
        };
        let mut env = Env::bare(Some(g.captured.clone()), Rc::from("<genexpr>"));
        env.layers.push(core::mem::take(&mut g.scope));
        let result = (|| -> VResult<Option<Value>> {
            'outer: loop {
                let Some(top) = g.stack.last().cloned() else { return Ok(None) };
                let level = g.stack.len() - 1;
                let Some(item) = self.iter_next(&top)? else {
                    g.stack.pop();
                    continue;
                };
                let gen = &generators[level];
                self.assign(&mut env, &gen.target, item, true)?;
                for cond in &gen.ifs {
                    if !self.eval(&mut env, cond)?.truthy() {
                        continue 'outer;
                    }
                }
                if level + 1 == generators.len() {
                    return Ok(Some(self.eval(&mut env, elt)?));
                }
                let src = self.eval(&mut env, &generators[level + 1].iter)?;
                let inner = self.iter_of(&src)?;
                g.stack.push(inner);
            }
        })();
        g.scope = env.layers.pop().unwrap_or_default();
        Ok((result?, g))
    }

    /// Drains any iterable into a vector.
    pub(super) fn collect(&mut self, v: &Value) -> VResult<Vec<Value>> {
        match v {
            Value::List(l) => {
                let items = l.borrow().clone();
                self.charge(items.len() as u64)?;
                Ok(items)
            }
            Value::Tuple(t) => {
                self.charge(t.len() as u64)?;
                Ok(t.to_vec())
            }
            _ => {
                let it = self.iter_of(v)?;
                let mut out = Vec::new();
                while let Some(x) = self.iter_next(&it)? {
                    if out.len() >= ops::MAX_SEQ {
                        return Err(step_limit());
                    }
                    out.push(x);
                }
                Ok(out)
            }
        }
    }

    // ---- subscripts -----------------------------------------------------

    pub(super) fn getitem(&mut self, v: &Value, i: &Index) -> VResult<Value> {
        match i {
            Index::Item(k) => getitem_value(v, k),
            Index::Slice(lo, hi, st) => {
                let len = match v {
                    Value::List(l) => l.borrow().len(),
                    Value::Tuple(t) => t.len(),
                    Value::Str(s) => str_len(s),
                    Value::Range(r) => r.len(),
                    other => return Err(not_subscriptable(other)),
                };
                let (start, _stop, step, n) = slice_indices(len, lo, hi, st)?;
                self.charge(n as u64 / 16)?;
                let pick = |k: usize| (start + k as i64 * step) as usize;
                Ok(match v {
                    Value::List(l) => {
                        let l = l.borrow();
                        Value::list((0..n).map(|k| l[pick(k)].clone()).collect())
                    }
                    Value::Tuple(t) => Value::tuple((0..n).map(|k| t[pick(k)].clone()).collect()),
                    Value::Str(s) => {
                        if step == 1 && s.is_ascii() {
                            Value::str(&s[start as usize..start as usize + n])
                        } else {
                            let chars: Vec<char> = s.chars().collect();
                            Value::Str(Rc::from((0..n).map(|k| chars[pick(k)]).collect::<String>()))
                        }
                    }
                    Value::Range(r) => {
                        let first = r.get(start as usize);
                        Value::Range(RangeV { start: first, stop: first + step * r.step * n as i64, step: step * r.step })
                    }
                    _ => unreachable!(),
                })
            }
        }
    }

    pub(super) fn setitem(&mut self, o: &Value, i: &Index, v: Value) -> VResult<()> {
        match (o, i) {
            (Value::List(l), Index::Item(k)) => {
                let len = l.borrow().len();
                let idx = seq_index(k, len, "list")?.ok_or_else(|| Exc::new(ErrorKind::IndexError, "list assignment index out of range"))?;
                l.borrow_mut()[idx] = v;
                Ok(())
            }
            (Value::List(l), Index::Slice(lo, hi, st)) => {
                let items = self.collect(&v)?;
                let len = l.borrow().len();
                let (start, stop, step, n) = slice_indices(len, lo, hi, st)?;
                let mut list = l.borrow_mut();
                if step == 1 {
                    let a = start as usize;
                    let b = (stop.max(start)) as usize;
                    list.splice(a..b, items);
                } else {
                    if items.len() != n {
                        return Err(Exc::value_error(format!(
                            "attempt to assign sequence of size {} to extended slice of size {n}",
                            items.len()
                        )));
                    }
                    for (k, x) in items.into_iter().enumerate() {
                        list[(start + k as i64 * step) as usize] = x;
                    }
                }
                Ok(())
            }
            (Value::Dict(d), Index::Item(k)) => d.borrow_mut().insert(k.clone(), v),
            (Value::Dict(_), Index::Slice(..)) => Err(Exc::type_error("unhashable type: 'slice'")),
            (other, _) => Err(Exc::type_error(format!("'{}' object does not support item assignment", other.type_name()))),
        }
    }
}

pub(super) enum Index {
    Item(Value),
    Slice(Value, Value, Value),
}

fn not_subscriptable(v: &Value) -> Exc {
    Exc::type_error(format!("'{}' object is not subscriptable", v.type_name()))
}

pub(super) fn str_len(s: &str) -> usize {
    if s.is_ascii() {
        s.len()
    } else {
        s.chars().count()
    }
}

/// Normalizes an integer index; `Ok(None)` when out of range.
pub(super) fn seq_index(k: &Value, len: usize, what: &str) -> VResult<Option<usize>> {
    let Some(i) = (match k {
        Value::Int(_) | Value::Bool(_) => k.as_int(),
        _ => None,
    }) else {
        return Err(Exc::type_error(format!("{what} indices must be integers or slices, not {}", k.type_name())));
    };
    let Some(i) = i.as_i64() else { return Ok(None) };
    let i = if i < 0 { i + len as i64 } else { i };
    Ok(if i >= 0 && (i as usize) < len { Some(i as usize) } else { None })
}

pub(super) fn getitem_value(v: &Value, k: &Value) -> VResult<Value> {
    match v {
        Value::List(l) => {
            let l = l.borrow();
            let i = seq_index(k, l.len(), "list")?.ok_or_else(|| Exc::new(ErrorKind::IndexError, "list index out of range"))?;
            Ok(l[i].clone())
        }
        Value::Tuple(t) => {
            let i = seq_index(k, t.len(), "tuple")?.ok_or_else(|| Exc::new(ErrorKind::IndexError, "tuple index out of range"))?;
            Ok(t[i].clone())
        }
        Value::Str(s) => {
            let len = str_len(s);
            let i = seq_index(k, len, "string")?.ok_or_else(|| Exc::new(ErrorKind::IndexError, "string index out of range"))?;
            let c = if s.is_ascii() { s.as_bytes()[i] as char } else { s.chars().nth(i).unwrap_or(' ') };
            Ok(Value::str(c.encode_utf8(&mut [0; 4])))
        }
        Value::Range(r) => {
            let i = seq_index(k, r.len(), "range")?.ok_or_else(|| Exc::new(ErrorKind::IndexError, "range object index out of range"))?;
            Ok(Value::int(r.get(i)))
        }
        Value::Dict(d) => d.borrow().get(k)?.cloned().ok_or_else(|| Exc::new(ErrorKind::KeyError, repr(k))),
        other => Err(not_subscriptable(other)),
    }
}

fn slice_bound(v: &Value) -> VResult<Option<i64>> {
    match v {
        Value::None => Ok(None),
        Value::Int(_) | Value::Bool(_) => {
            let i = v.as_int().unwrap_or_else(Int::zero);
            Ok(Some(i.as_i64().unwrap_or(if i.is_negative() { i64::MIN / 4 } else { i64::MAX / 4 })))
        }
        other => Err(Exc::type_error(format!(
            "slice indices must be integers or None or have an __index__ method, not {}",
            other.type_name()
        ))),
    }
}

/// `(start, stop, step, count)` with CPython's clamping rules.
pub(super) fn slice_indices(len: usize, lo: &Value, hi: &Value, st: &Value) -> VResult<(i64, i64, i64, usize)> {
    let step = slice_bound(st)?.unwrap_or(1);
    if step == 0 {
        return Err(Exc::value_error("slice step cannot be zero"));
    }
    let len = len as i64;
    let adjust = |b: Option<i64>, default: i64| -> i64 {
        match b {
            None => default,
            Some(mut x) => {
                if x < 0 {
                    x += len;
                    if x < 0 {
                        x = if step < 0 { -1 } else { 0 };
                    }
                } else if x >= len {
                    x = if step < 0 { len - 1 } else { len };
                }
                x
            }
        }
    };
    let (start, stop) = if step > 0 {
        (adjust(slice_bound(lo)?, 0), adjust(slice_bound(hi)?, len))
    } else {
        (adjust(slice_bound(lo)?, len - 1), adjust(slice_bound(hi)?, -1))
    };
    let n = if step > 0 {
        if start < stop { (stop - start - 1) / step + 1 } else { 0 }
    } else if stop < start {
        (start - stop - 1) / (-step) + 1
    } else {
        0
    };
    Ok((start, stop, step, n as usize))
}

/// Binds call arguments to parameter names.
pub(super) fn bind_params(
    fname: &str,
    params: &[&str],
    defaults: &[Option<Value>],
    args: Vec<Value>,
    kwargs: Vec<(String, Value)>,
) -> VResult<Scope> {
    if args.len() > params.len() {
        let required = defaults.iter().filter(|d| d.is_none()).count();
        let takes = if required == params.len() {
            format!("{}", params.len())
        } else {
            format!("from {required} to {}", params.len())
        };
        let plural = if params.len() == 1 && required == params.len() { "" } else { "s" };
        return Err(Exc::type_error(format!(
            "{fname}() takes {takes} positional argument{plural} but {} {} given",
            args.len(),
            if args.len() == 1 { "was" } else { "were" }
        )));
    }
    let mut slots: Vec<Option<Value>> = alloc::vec![None; params.len()];
    for (i, a) in args.into_iter().enumerate() {
        slots[i] = Some(a);
    }
    for (k, v) in kwargs {
        let Some(i) = params.iter().position(|p| *p == k) else {
            return Err(Exc::type_error(format!("{fname}() got an unexpected keyword argument '{k}'")));
        };
        if slots[i].is_some() {
            return Err(Exc::type_error(format!("{fname}() got multiple values for argument '{k}'")));
        }
        slots[i] = Some(v);
    }
    let mut missing = Vec::new();
    let mut out = Vec::with_capacity(params.len());
    for (i, p) in params.iter().enumerate() {
        match slots[i].take().or_else(|| defaults.get(i).cloned().flatten()) {
            Some(v) => out.push((Rc::from(*p), v)),
            None => missing.push(format!("'{p}'")),
        }
    }
    if !missing.is_empty() {
        let names = match missing.len() {
            1 => missing[0].clone(),
            _ => {
                let last = missing.pop().unwrap_or_default();
                format!("{} and {last}", missing.join(", "))
            }
        };
        let n = if names.contains(" and ") { names.matches('\'').count() / 2 } else { 1 };
        return Err(Exc::type_error(format!(
            "{fname}() missing {n} required positional argument{}: {names}",
            if n == 1 { "" } else { "s" }
        )));
    }
    Ok(out)
}

//! Builtin functions.

use alloc::format;
use alloc::rc::Rc;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cell::RefCell;

use super::error::{ErrorKind, Exc, VResult};
use super::interp::{str_len, Interp};
use super::iter::IterState;
use super::ops;
use super::render::{repr, to_str};
use super::value::{Dict, Func, RangeV, Set, Value};
use crate::num::Int;
use crate::subjectlang::{BinOpKind, CmpOp};

/// Every builtin the interpreter implements.
pub const IMPLEMENTED: &[&str] = &[
    "len", "range", "enumerate", "sorted", "sum", "min", "max", "abs", "round", "zip", "map", "filter", "reversed",
    "any", "all", "isinstance", "set", "dict", "list", "tuple", "str", "int", "float", "bool", "print", "ord", "chr",
    "divmod", "pow", "repr", "hex", "bin", "oct",
];

const TYPE_NAMES: &[&str] = &["int", "float", "str", "bool", "list", "tuple", "dict", "set"];

pub fn is_type_name(name: &str) -> bool {
    TYPE_NAMES.contains(&name)
}

pub fn builtin_name(name: &str) -> Option<&'static str> {
    IMPLEMENTED.iter().copied().find(|b| *b == name)
}

/// Digit cap on int-to-decimal conversion in the reference runtime.
const MAX_STR_DIGITS: usize = 4300;

fn check_int_digits(v: &Value) -> VResult<()> {
    if let Value::Int(i) = v {
        if i.bits() > 14_000 && i.magnitude_radix(10).len() > MAX_STR_DIGITS {
            return Err(Exc::value_error(format!(
                "Exceeds the limit ({MAX_STR_DIGITS}) for integer string conversion; use sys.set_int_max_str_digits() to increase the limit"
            )));
        }
    }
    Ok(())
}

/// `str(v)` with the runtime's digit cap.
pub fn str_checked(v: &Value) -> VResult<String> {
    check_int_digits(v)?;
    Ok(to_str(v))
}

pub fn format_checked(v: &Value, spec: &str) -> VResult<String> {
    if spec.is_empty() || spec.ends_with('d') || !spec.ends_with(|c: char| c.is_ascii_alphabetic() || c == '%') {
        check_int_digits(v)?;
    }
    super::format::format_value(v, spec)
}

fn arity(name: &str, args: &[Value], lo: usize, hi: usize) -> VResult<()> {
    if args.len() < lo || args.len() > hi {
        let msg = if lo == hi {
            format!("{name}() takes exactly {lo} argument{} ({} given)", if lo == 1 { "" } else { "s" }, args.len())
        } else if args.len() < lo {
            format!("{name} expected at least {lo} argument{}, got {}", if lo == 1 { "" } else { "s" }, args.len())
        } else {
            format!("{name} expected at most {hi} arguments, got {}", args.len())
        };
        return Err(Exc::type_error(msg));
    }
    Ok(())
}

fn no_kwargs(name: &str, kwargs: &[(String, Value)]) -> VResult<()> {
    if let Some((k, _)) = kwargs.first() {
        return Err(Exc::type_error(format!("{name}() got an unexpected keyword argument '{k}'")));
    }
    Ok(())
}

/// Pulls the named keyword arguments out, rejecting any others.
fn take_kwargs(name: &str, kwargs: Vec<(String, Value)>, allowed: &[&str]) -> VResult<Vec<Option<Value>>> {
    let mut out = alloc::vec![None; allowed.len()];
    for (k, v) in kwargs {
        match allowed.iter().position(|a| *a == k) {
            Some(i) => out[i] = Some(v),
            None => return Err(Exc::type_error(format!("{name}() got an unexpected keyword argument '{k}'"))),
        }
    }
    Ok(out)
}

pub(super) fn int_arg(v: &Value, what: &str) -> VResult<Int> {
    match v {
        Value::Int(_) | Value::Bool(_) => Ok(v.as_int().unwrap_or_else(Int::zero)),
        other => Err(Exc::type_error(format!(
            "'{}' object cannot be interpreted as an integer{what}",
            other.type_name()
        ))),
    }
}

fn i64_arg(v: &Value) -> VResult<i64> {
    int_arg(v, "")?
        .as_i64()
        .ok_or_else(|| Exc::new(ErrorKind::OverflowError, "Python int too large to convert to C ssize_t"))
}

fn parse_int(text: &str, base: u32) -> Option<Int> {
    let t = text.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let mut base = base;
    let mut body = body;
    let lower = body.to_ascii_lowercase();
    for (p, b) in [("0x", 16), ("0o", 8), ("0b", 2)] {
        if lower.starts_with(p) && (base == b || base == 0) {
            base = b;
            body = &body[2..];
            if body.starts_with('_') {
                body = &body[1..];
            }
        }
    }
    if base == 0 {
        if body.len() > 1 && body.starts_with('0') && body.chars().any(|c| c != '0' && c != '_') {
            return None;
        }
        base = 10;
    }
    if body.is_empty() || body.starts_with('_') || body.ends_with('_') || body.contains("__") {
        return None;
    }
    let digits: String = body.chars().filter(|c| *c != '_').collect();
    if !digits.chars().all(|c| c.is_digit(base)) {
        return None;
    }
    let v = Int::parse_radix(&digits, base)?;
    Some(if neg { v.neg() } else { v })
}

pub(super) fn parse_float(text: &str) -> Option<f64> {
    let t = text.trim();
    let lower = t.to_ascii_lowercase();
    let (sign, rest) = match lower.strip_prefix('-') {
        Some(r) => (-1.0, r),
        None => (1.0, lower.strip_prefix('+').unwrap_or(&lower)),
    };
    match rest {
        "inf" | "infinity" => return Some(sign * f64::INFINITY),
        "nan" => return Some(f64::NAN),
        _ => {}
    }
    let b = rest.as_bytes();
    if b.is_empty() || !rest.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | '+' | '-' | '_')) {
        return None;
    }
    for (i, c) in b.iter().enumerate() {
        if *c == b'_' && !(i > 0 && b[i - 1].is_ascii_digit() && b.get(i + 1).is_some_and(|n| n.is_ascii_digit())) {
            return None;
        }
    }
    let clean: String = rest.chars().filter(|c| *c != '_').collect();
    clean.parse::<f64>().ok().map(|f| sign * f)
}

fn round_half_even_int(i: &Int, ndigits: i64) -> Int {
    if ndigits >= 0 {
        return i.clone();
    }
    let p = Int::from(10).pow((-ndigits).min(4000) as u32);
    let q = i.floor_div(&p).unwrap_or_else(Int::zero);
    let r = i.sub(&q.mul(&p));
    let twice = r.mul(&Int::from(2));
    let q = match twice.cmp(&p) {
        core::cmp::Ordering::Greater => q.add(&Int::from(1)),
        core::cmp::Ordering::Equal if q.bitand(&Int::from(1)).as_i64() == Some(1) => q.add(&Int::from(1)),
        _ => q,
    };
    q.mul(&p)
}

fn round_float(x: f64, ndigits: i64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    if ndigits > 320 {
        return x;
    }
    if ndigits >= 0 {
        let s = format!("{:.*}", ndigits as usize, x);
        let r = s.parse::<f64>().unwrap_or(x);
        return if r == 0.0 { libm::copysign(0.0, x) } else { r };
    }
    if ndigits < -320 {
        return libm::copysign(0.0, x);
    }
    let p = libm::pow(10.0, (-ndigits) as f64);
    let r = libm::rint(x / p) * p;
    if r == 0.0 {
        libm::copysign(0.0, x)
    } else {
        r
    }
}

fn float_to_int(f: f64) -> VResult<Int> {
    if f.is_nan() {
        return Err(Exc::value_error("cannot convert float NaN to integer"));
    }
    Int::from_f64_trunc(f).ok_or_else(|| Exc::new(ErrorKind::OverflowError, "cannot convert float infinity to integer"))
}

fn isinstance_of(v: &Value, cls: &Value) -> VResult<bool> {
    match cls {
        Value::Func(f) => match &**f {
            Func::Builtin(n) if is_type_name(n) => Ok(match *n {
                "int" => matches!(v, Value::Int(_) | Value::Bool(_)),
                "float" => matches!(v, Value::Float(_)),
                "str" => matches!(v, Value::Str(_)),
                "bool" => matches!(v, Value::Bool(_)),
                "list" => matches!(v, Value::List(_)),
                "tuple" => matches!(v, Value::Tuple(_)),
                "dict" => matches!(v, Value::Dict(_)),
                "set" => matches!(v, Value::Set(_)),
                _ => false,
            }),
            _ => Err(Exc::type_error("isinstance() arg 2 must be a type or tuple of types")),
        },
        Value::Tuple(items) => {
            for c in items.iter() {
                if isinstance_of(v, c)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        _ => Err(Exc::type_error("isinstance() arg 2 must be a type, a tuple of types, or a union")),
    }
}

fn radix_repr(i: &Int, prefix: &str, radix: u32) -> String {
    let sign = if i.is_negative() { "-" } else { "" };
    format!("{sign}{prefix}{}", i.magnitude_radix(radix))
}

impl<'t> Interp<'t> {
    pub(super) fn new_iter(&self, st: IterState) -> Value {
        Value::Iter(Rc::new(RefCell::new(st)))
    }

    /// Stable sort using `<` on keys, as the reference runtime does.
    pub(super) fn sort_values(&mut self, items: Vec<Value>, key: Option<&Value>, reverse: bool) -> VResult<Vec<Value>> {
        let mut pairs: Vec<(Value, Value)> = Vec::with_capacity(items.len());
        for v in items {
            let k = match key {
                Some(Value::None) | None => v.clone(),
                Some(f) => self.call_value(f, alloc::vec![v.clone()], Vec::new())?,
            };
            pairs.push((k, v));
        }
        if reverse {
            pairs.reverse();
        }
        self.charge(pairs.len() as u64)?;
        let mut pairs = merge_sort(pairs)?;
        if reverse {
            pairs.reverse();
        }
        Ok(pairs.into_iter().map(|(_, v)| v).collect())
    }

    fn min_max(&mut self, name: &str, args: Vec<Value>, kwargs: Vec<(String, Value)>) -> VResult<Value> {
        let kw = take_kwargs(name, kwargs, &["key", "default"])?;
        let (key, default) = (kw[0].clone(), kw[1].clone());
        if args.is_empty() {
            return Err(Exc::type_error(format!("{name} expected at least 1 argument, got 0")));
        }
        let items = if args.len() == 1 {
            self.collect(&args[0])?
        } else {
            if default.is_some() {
                return Err(Exc::type_error(format!(
                    "Cannot specify a default for {name}() with multiple positional arguments"
                )));
            }
            args
        };
        let op = if name == "max" { CmpOp::Gt } else { CmpOp::Lt };
        let mut best: Option<(Value, Value)> = None;
        for v in items {
            let k = match &key {
                Some(Value::None) | None => v.clone(),
                Some(f) => self.call_value(f, alloc::vec![v.clone()], Vec::new())?,
            };
            best = match best {
                None => Some((k, v)),
                Some((bk, bv)) => {
                    if ops::order(op, &k, &bk)? {
                        Some((k, v))
                    } else {
                        Some((bk, bv))
                    }
                }
            };
        }
        match best {
            Some((_, v)) => Ok(v),
            None => default.ok_or_else(|| Exc::value_error(format!("{name}() arg is an empty sequence"))),
        }
    }

    pub(super) fn call_builtin(&mut self, name: &str, args: Vec<Value>, kwargs: Vec<(String, Value)>) -> VResult<Value> {
        match name {
            "print" => {
                let kw = take_kwargs(name, kwargs, &["sep", "end"])?;
                let pick = |v: &Option<Value>, d: &str| -> VResult<String> {
                    match v {
                        None | Some(Value::None) => Ok(d.to_string()),
                        Some(Value::Str(s)) => Ok(s.to_string()),
                        Some(o) => Err(Exc::type_error(format!("sep must be None or a string, not {}", o.type_name()))),
                    }
                };
                let sep = pick(&kw[0], " ")?;
                let end = pick(&kw[1], "\n")?;
                let mut line = String::new();
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        line.push_str(&sep);
                    }
                    line.push_str(&str_checked(a)?);
                }
                line.push_str(&end);
                if self.stdout.len() + line.len() > ops::MAX_SEQ {
                    return Err(Exc::new(ErrorKind::StepLimitExceeded, "output too large"));
                }
                self.stdout.push_str(&line);
                Ok(Value::None)
            }
            "len" => {
                no_kwargs(name, &kwargs)?;
                arity(name, &args, 1, 1)?;
                let n = match &args[0] {
                    Value::Str(s) => str_len(s),
                    Value::List(l) => l.borrow().len(),
                    Value::Tuple(t) => t.len(),
                    Value::Dict(d) | Value::View(_, d) => d.borrow().len(),
                    Value::Set(s) => s.borrow().len(),
                    Value::Range(r) => r.len(),
                    other => return Err(Exc::type_error(format!("object of type '{}' has no len()", other.type_name()))),
                };
                Ok(Value::int(n as i64))
            }
            "range" => {
                no_kwargs(name, &kwargs)?;
                if args.is_empty() {
                    return Err(Exc::type_error("range expected at least 1 argument, got 0"));
                }
                arity(name, &args, 1, 3)?;
                let nums = args.iter().map(i64_arg).collect::<VResult<Vec<i64>>>()?;
                let (start, stop, step) = match nums.len() {
                    1 => (0, nums[0], 1),
                    2 => (nums[0], nums[1], 1),
                    _ => (nums[0], nums[1], nums[2]),
                };
                if step == 0 {
                    return Err(Exc::value_error("range() arg 3 must not be zero"));
                }
                Ok(Value::Range(RangeV { start, stop, step }))
            }
            "enumerate" => {
                let kw = take_kwargs(name, kwargs, &["start"])?;
                arity(name, &args, 1, 2)?;
                let start = match args.get(1).or(kw[0].as_ref()) {
                    Some(v) => int_arg(v, "")?,
                    None => Int::zero(),
                };
                let inner = self.iter_of(&args[0])?;
                Ok(self.new_iter(IterState::Enumerate { inner, count: start }))
            }
            "zip" => {
                no_kwargs(name, &kwargs)?;
                let mut inners = Vec::new();
                for a in &args {
                    inners.push(self.iter_of(a)?);
                }
                Ok(self.new_iter(IterState::Zip { inners }))
            }
            "map" => {
                no_kwargs(name, &kwargs)?;
                if args.len() < 2 {
                    return Err(Exc::type_error("map() must have at least two arguments."));
                }
                let mut inners = Vec::new();
                for a in &args[1..] {
                    inners.push(self.iter_of(a)?);
                }
                Ok(self.new_iter(IterState::Map { func: args[0].clone(), inners }))
            }
            "filter" => {
                no_kwargs(name, &kwargs)?;
                arity(name, &args, 2, 2)?;
                let inner = self.iter_of(&args[1])?;
                Ok(self.new_iter(IterState::Filter { func: args[0].clone(), inner }))
            }
            "reversed" => {
                no_kwargs(name, &kwargs)?;
                arity(name, &args, 1, 1)?;
                let items: Vec<Value> = match &args[0] {
                    Value::Range(r) => {
                        let n = r.len();
                        let last = if n == 0 { r.start } else { r.get(n - 1) };
                        return Ok(self.new_iter(IterState::Range { next: last, left: n, step: -r.step }));
                    }
                    Value::List(l) => l.borrow().iter().rev().cloned().collect(),
                    Value::Tuple(t) => t.iter().rev().cloned().collect(),
                    Value::Str(s) => s.chars().rev().map(|c| Value::str(c.encode_utf8(&mut [0; 4]))).collect(),
                    Value::Dict(d) => d.borrow().entries().iter().rev().map(|(k, _)| k.clone()).collect(),
                    other => return Err(Exc::type_error(format!("'{}' object is not reversible", other.type_name()))),
                };
                Ok(self.new_iter(IterState::Reversed { items: items.into(), idx: 0 }))
            }
            "sorted" => {
                let kw = take_kwargs(name, kwargs, &["key", "reverse"])?;
                if args.len() != 1 {
                    return Err(Exc::type_error(format!("sorted expected 1 argument, got {}", args.len())));
                }
                let items = self.collect(&args[0])?;
                let reverse = kw[1].as_ref().is_some_and(|v| v.truthy());
                Ok(Value::list(self.sort_values(items, kw[0].as_ref(), reverse)?))
            }
            "sum" => {
                let kw = take_kwargs(name, kwargs, &["start"])?;
                arity(name, &args, 1, 2)?;
                let mut acc = args.get(1).cloned().or(kw[0].clone()).unwrap_or(Value::int(0));
                if let Value::Str(_) = acc {
                    return Err(Exc::type_error("sum() can't sum strings [use ''.join(seq) instead]"));
                }
                let it = self.iter_of(&args[0])?;
                while let Some(x) = self.iter_next(&it)? {
                    acc = ops::binop(BinOpKind::Add, &acc, &x)?;
                }
                Ok(acc)
            }
            "min" | "max" => self.min_max(name, args, kwargs),
            "abs" => {
                no_kwargs(name, &kwargs)?;
                arity(name, &args, 1, 1)?;
                match &args[0] {
                    Value::Float(f) => Ok(Value::Float(libm::fabs(*f))),
                    v => v
                        .as_int()
                        .map(|i| Value::Int(i.abs()))
                        .ok_or_else(|| Exc::type_error(format!("bad operand type for abs(): '{}'", v.type_name()))),
                }
            }
            "round" => {
                let kw = take_kwargs(name, kwargs, &["ndigits"])?;
                arity(name, &args, 1, 2)?;
                let nd = args.get(1).cloned().or(kw[0].clone()).unwrap_or(Value::None);
                match (&args[0], &nd) {
                    (Value::Float(f), Value::None) => {
                        let r = libm::rint(*f);
                        Ok(Value::Int(float_to_int(r)?))
                    }
                    (Value::Float(f), n) => Ok(Value::Float(round_float(*f, i64_arg(n)?))),
                    (v @ (Value::Int(_) | Value::Bool(_)), Value::None) => Ok(Value::Int(v.as_int().unwrap_or_else(Int::zero))),
                    (v @ (Value::Int(_) | Value::Bool(_)), n) => {
                        Ok(Value::Int(round_half_even_int(&v.as_int().unwrap_or_else(Int::zero), i64_arg(n)?)))
                    }
                    (v, _) => Err(Exc::type_error(format!("type {} doesn't define __round__ method", v.type_name()))),
                }
            }
            "any" | "all" => {
                no_kwargs(name, &kwargs)?;
                arity(name, &args, 1, 1)?;
                let want = name == "any";
                let it = self.iter_of(&args[0])?;
                while let Some(x) = self.iter_next(&it)? {
                    if x.truthy() == want {
                        return Ok(Value::Bool(want));
                    }
                }
                Ok(Value::Bool(!want))
            }
            "isinstance" => {
                no_kwargs(name, &kwargs)?;
                if args.len() != 2 {
                    return Err(Exc::type_error(format!("isinstance expected 2 arguments, got {}", args.len())));
                }
                Ok(Value::Bool(isinstance_of(&args[0], &args[1])?))
            }
            "int" => {
                let kw = take_kwargs(name, kwargs, &["base"])?;
                arity(name, &args, 0, 2)?;
                let base = args.get(1).cloned().or(kw[0].clone());
                let Some(x) = args.first() else { return Ok(Value::int(0)) };
                if let Some(b) = base {
                    let b = i64_arg(&b)?;
                    if !(b == 0 || (2..=36).contains(&b)) {
                        return Err(Exc::value_error("int() base must be >= 2 and <= 36, or 0"));
                    }
                    let Value::Str(s) = x else {
                        return Err(Exc::type_error("int() can't convert non-string with explicit base"));
                    };
                    return parse_int(s, b as u32).map(Value::Int).ok_or_else(|| {
                        Exc::value_error(format!("invalid literal for int() with base {b}: {}", repr(x)))
                    });
                }
                match x {
                    Value::Int(_) | Value::Bool(_) => Ok(Value::Int(x.as_int().unwrap_or_else(Int::zero))),
                    Value::Float(f) => Ok(Value::Int(float_to_int(*f)?)),
                    Value::Str(s) => {
                        if s.trim().len() > MAX_STR_DIGITS {
                            return Err(Exc::value_error("Exceeds the limit (4300) for integer string conversion"));
                        }
                        parse_int(s, 10)
                            .map(Value::Int)
                            .ok_or_else(|| Exc::value_error(format!("invalid literal for int() with base 10: {}", repr(x))))
                    }
                    other => Err(Exc::type_error(format!(
                        "int() argument must be a string, a bytes-like object or a real number, not '{}'",
                        other.type_name()
                    ))),
                }
            }
            "float" => {
                no_kwargs(name, &kwargs)?;
                arity(name, &args, 0, 1)?;
                let Some(x) = args.first() else { return Ok(Value::Float(0.0)) };
                match x {
                    Value::Float(f) => Ok(Value::Float(*f)),
                    Value::Int(i) => i
                        .to_f64()
                        .map(Value::Float)
                        .ok_or_else(|| Exc::new(ErrorKind::OverflowError, "int too large to convert to float")),
                    Value::Bool(b) => Ok(Value::Float(*b as i64 as f64)),
                    Value::Str(s) => parse_float(s)
                        .map(Value::Float)
                        .ok_or_else(|| Exc::value_error(format!("could not convert string to float: {}", repr(x)))),
                    other => Err(Exc::type_error(format!(
                        "float() argument must be a string or a real number, not '{}'",
                        other.type_name()
                    ))),
                }
            }
            "str" => {
                no_kwargs(name, &kwargs)?;
                arity(name, &args, 0, 1)?;
                match args.first() {
                    None => Ok(Value::str("")),
                    Some(Value::Str(s)) => Ok(Value::Str(s.clone())),
                    Some(v) => Ok(Value::Str(Rc::from(str_checked(v)?))),
                }
            }
            "repr" => {
                arity(name, &args, 1, 1)?;
                check_int_digits(&args[0])?;
                Ok(Value::Str(Rc::from(repr(&args[0]))))
            }
            "bool" => {
                no_kwargs(name, &kwargs)?;
                arity(name, &args, 0, 1)?;
                Ok(Value::Bool(args.first().is_some_and(|v| v.truthy())))
            }
            "list" | "tuple" | "set" => {
                no_kwargs(name, &kwargs)?;
                arity(name, &args, 0, 1)?;
                let items = match args.first() {
                    Some(v) => self.collect(v)?,
                    None => Vec::new(),
                };
                Ok(match name {
                    "list" => Value::list(items),
                    "tuple" => Value::tuple(items),
                    _ => Value::set(Set::from_values(items)?),
                })
            }
            "dict" => {
                arity(name, &args, 0, 1)?;
                let mut d = Dict::new();
                if let Some(src) = args.first() {
                    self.dict_update(&mut d, src)?;
                }
                for (k, v) in kwargs {
                    d.insert(Value::str(&k), v)?;
                }
                Ok(Value::dict(d))
            }
            "divmod" => {
                no_kwargs(name, &kwargs)?;
                arity(name, &args, 2, 2)?;
                let (a, b) = (&args[0], &args[1]);
                if matches!(a, Value::Float(_)) || matches!(b, Value::Float(_)) {
                    let (x, y) = match (a.as_f64(), b.as_f64()) {
                        (Some(x), Some(y)) if a.is_numeric() && b.is_numeric() => (x, y),
                        _ => return Err(Exc::type_error(format!(
                            "unsupported operand type(s) for divmod(): '{}' and '{}'",
                            a.type_name(),
                            b.type_name()
                        ))),
                    };
                    let (q, r) = ops::float_divmod(x, y)
                        .map_err(|_| Exc::new(ErrorKind::ZeroDivisionError, "float divmod()"))?;
                    return Ok(Value::tuple(alloc::vec![Value::Float(q), Value::Float(r)]));
                }
                let q = ops::binop(BinOpKind::FloorDiv, a, b).map_err(|e| match e.kind {
                    ErrorKind::TypeError => Exc::type_error(format!(
                        "unsupported operand type(s) for divmod(): '{}' and '{}'",
                        a.type_name(),
                        b.type_name()
                    )),
                    _ => e,
                })?;
                let r = ops::binop(BinOpKind::Mod, a, b)?;
                Ok(Value::tuple(alloc::vec![q, r]))
            }
            "pow" => {
                no_kwargs(name, &kwargs)?;
                arity(name, &args, 2, 3)?;
                if let Some(m) = args.get(2) {
                    let (b, e, m) = (int_arg(&args[0], "")?, int_arg(&args[1], "")?, int_arg(m, "")?);
                    if m.is_zero() {
                        return Err(Exc::value_error("pow() 3rd argument cannot be 0"));
                    }
                    if e.is_negative() {
                        return Err(Exc::new(ErrorKind::UnsupportedConstruct, "pow() with negative exponent and modulus"));
                    }
                    let r = b.to_big().modpow(&e.to_big(), &m.to_big());
                    let r = Int::from_big(r);
                    let r = if !r.is_zero() && r.is_negative() != m.is_negative() { r.add(&m) } else { r };
                    return Ok(Value::Int(r));
                }
                ops::binop(BinOpKind::Pow, &args[0], &args[1])
            }
            "ord" => {
                arity(name, &args, 1, 1)?;
                match &args[0] {
                    Value::Str(s) if s.chars().count() == 1 => Ok(Value::int(s.chars().next().map(|c| c as i64).unwrap_or(0))),
                    Value::Str(s) => Err(Exc::type_error(format!(
                        "ord() expected a character, but string of length {} found",
                        s.chars().count()
                    ))),
                    o => Err(Exc::type_error(format!("ord() expected string of length 1, but {} found", o.type_name()))),
                }
            }
            "chr" => {
                arity(name, &args, 1, 1)?;
                let i = int_arg(&args[0], "")?;
                let c = i.as_i64().and_then(|v| u32::try_from(v).ok()).and_then(char::from_u32);
                match c {
                    Some(c) => Ok(Value::str(c.encode_utf8(&mut [0; 4]))),
                    None => Err(Exc::value_error("chr() arg not in range(0x110000)")),
                }
            }
            "hex" | "bin" | "oct" => {
                arity(name, &args, 1, 1)?;
                let i = int_arg(&args[0], "")?;
                let (p, r) = match name {
                    "hex" => ("0x", 16),
                    "bin" => ("0b", 2),
                    _ => ("0o", 8),
                };
                Ok(Value::Str(Rc::from(radix_repr(&i, p, r))))
            }
            other => Err(Exc::new(ErrorKind::NameError, format!("name '{other}' is not defined"))),
        }
    }

    /// `d.update(src)` for a mapping or an iterable of pairs.
    pub(super) fn dict_update(&mut self, d: &mut Dict, src: &Value) -> VResult<()> {
        if let Value::Dict(o) = src {
            let entries = o.borrow().entries().to_vec();
            for (k, v) in entries {
                d.insert(k, v)?;
            }
            return Ok(());
        }
        let it = self.iter_of(src)?;
        let mut n = 0;
        while let Some(item) = self.iter_next(&it)? {
            let pair = match &item {
                Value::Str(_) | Value::List(_) | Value::Tuple(_) | Value::Set(_) | Value::Dict(_) | Value::Range(_) | Value::Iter(_) | Value::View(..) => self.collect(&item)?,
                _ => {
                    return Err(Exc::type_error(format!(
                        "cannot convert dictionary update sequence element #{n} to a sequence"
                    )))
                }
            };
            if pair.len() != 2 {
                return Err(Exc::value_error(format!(
                    "dictionary update sequence element #{n} has length {}; 2 is required",
                    pair.len()
                )));
            }
            let mut p = pair.into_iter();
            let (k, v) = (p.next().unwrap_or(Value::None), p.next().unwrap_or(Value::None));
            d.insert(k, v)?;
            n += 1;
        }
        Ok(())
    }
}

/// Stable merge sort with a fallible `<` on the first component.
fn merge_sort(mut v: Vec<(Value, Value)>) -> VResult<Vec<(Value, Value)>> {
    if v.len() <= 1 {
        return Ok(v);
    }
    if v.len() <= 8 {
        // Binary insertion sort: the reference runtime does the same for short runs.
        for i in 1..v.len() {
            let mut lo = 0;
            let mut hi = i;
            while lo < hi {
                let mid = (lo + hi) / 2;
                if ops::lt(&v[i].0, &v[mid].0)? {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            let x = v.remove(i);
            v.insert(lo, x);
        }
        return Ok(v);
    }
    let right = v.split_off(v.len() / 2);
    let left = merge_sort(v)?;
    let right = merge_sort(right)?;
    let mut out = Vec::with_capacity(left.len() + right.len());
    let mut l = left.into_iter().peekable();
    let mut r = right.into_iter().peekable();
    loop {
        match (l.peek(), r.peek()) {
            (Some(a), Some(b)) => {
                if ops::lt(&b.0, &a.0)? {
                    out.extend(r.next());
                } else {
                    out.extend(l.next());
                }
            }
            (Some(_), None) => out.extend(l.next()),
            (None, Some(_)) => out.extend(r.next()),
            (None, None) => break,
        }
    }
    Ok(out)
}

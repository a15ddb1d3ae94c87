//! Runtime values of the subject language.

use alloc::collections::BTreeMap;
use alloc::rc::Rc;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::cmp::Ordering;

use super::error::{Exc, ErrorKind};
use super::iter::IterState;
use crate::num::Int;
use crate::subjectlang::Expr;

#[derive(Clone, Debug)]
pub enum Value {
    None,
    Bool(bool),
    Int(Int),
    Float(f64),
    Str(Rc<str>),
    List(Rc<RefCell<Vec<Value>>>),
    Tuple(Rc<[Value]>),
    Dict(Rc<RefCell<Dict>>),
    Set(Rc<RefCell<Set>>),
    Range(RangeV),
    View(ViewKind, Rc<RefCell<Dict>>),
    Iter(Rc<RefCell<IterState>>),
    Func(Rc<Func>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RangeV {
    pub start: i64,
    pub stop: i64,
    pub step: i64,
}

impl RangeV {
    pub fn len(&self) -> usize {
        let (lo, hi, step) = (self.start as i128, self.stop as i128, self.step as i128);
        let n = if step > 0 {
            if lo < hi { (hi - lo + step - 1) / step } else { 0 }
        } else if lo > hi {
            (lo - hi - step - 1) / (-step)
        } else {
            0
        };
        n as usize
    }

    pub fn get(&self, i: usize) -> i64 {
        self.start + self.step * i as i64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViewKind {
    Keys,
    Values,
    Items,
}

#[derive(Debug)]
pub enum Func {
    Builtin(&'static str),
    /// Bound method such as `xs.append`.
    Method { receiver: Value, name: Rc<str> },
    Lambda { params: Rc<[Rc<str>]>, body: Rc<Expr>, env: Rc<Vec<(Rc<str>, Value)>> },
    /// Top-level function of the program, looked up by name at call time.
    User(Rc<str>),
}

/// Normalized dictionary key: numerically equal keys collide, as in the
/// subject language (`1`, `1.0` and `True` are the same key).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum HashKey {
    None,
    Int(Int),
    Float(u64),
    Str(Rc<str>),
    Tuple(Vec<HashKey>),
}

impl HashKey {
    pub fn of(v: &Value) -> Result<HashKey, Exc> {
        Ok(match v {
            Value::None => HashKey::None,
            Value::Bool(b) => HashKey::Int(Int::from(*b as i64)),
            Value::Int(i) => HashKey::Int(i.clone()),
            Value::Float(f) => {
                if *f == 0.0 {
                    HashKey::Int(Int::zero())
                } else if f.is_finite() && libm::trunc(*f) == *f {
                    HashKey::Int(Int::from_f64_trunc(*f).unwrap_or_else(Int::zero))
                } else {
                    HashKey::Float(f.to_bits())
                }
            }
            Value::Str(s) => HashKey::Str(s.clone()),
            Value::Tuple(items) => {
                let mut ks = Vec::with_capacity(items.len());
                for i in items.iter() {
                    ks.push(HashKey::of(i)?);
                }
                HashKey::Tuple(ks)
            }
            Value::Range(r) => HashKey::Tuple(alloc::vec![
                HashKey::Str("range".into()),
                HashKey::Int(r.start.into()),
                HashKey::Int(r.stop.into()),
                HashKey::Int(r.step.into()),
            ]),
            other => {
                return Err(Exc::new(ErrorKind::TypeError, alloc::format!("unhashable type: '{}'", other.type_name())))
            }
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct Dict {
    entries: Vec<(Value, Value)>,
    index: BTreeMap<HashKey, usize>,
}

impl Dict {
    pub fn new() -> Self {
        Dict::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, k: &Value) -> Result<Option<&Value>, Exc> {
        let hk = HashKey::of(k)?;
        Ok(self.index.get(&hk).map(|i| &self.entries[*i].1))
    }

    pub fn contains(&self, k: &Value) -> Result<bool, Exc> {
        Ok(self.index.contains_key(&HashKey::of(k)?))
    }

    /// Inserts or overwrites; an existing key keeps its original key object and position.
    pub fn insert(&mut self, k: Value, v: Value) -> Result<(), Exc> {
        let hk = HashKey::of(&k)?;
        match self.index.get(&hk) {
            Some(i) => self.entries[*i].1 = v,
            None => {
                self.index.insert(hk, self.entries.len());
                self.entries.push((k, v));
            }
        }
        Ok(())
    }

    pub fn remove(&mut self, k: &Value) -> Result<Option<Value>, Exc> {
        let hk = HashKey::of(k)?;
        let Some(pos) = self.index.remove(&hk) else { return Ok(None) };
        let (_, v) = self.entries.remove(pos);
        for idx in self.index.values_mut() {
            if *idx > pos {
                *idx -= 1;
            }
        }
        Ok(Some(v))
    }

    pub fn pop_last(&mut self) -> Option<(Value, Value)> {
        let (k, v) = self.entries.pop()?;
        if let Ok(hk) = HashKey::of(&k) {
            self.index.remove(&hk);
        }
        Some((k, v))
    }

    pub fn clear(&mut self) {
        self.entries.clear();
        self.index.clear();
    }

    pub fn entries(&self) -> &[(Value, Value)] {
        &self.entries
    }

    pub fn keys(&self) -> impl Iterator<Item = &Value> {
        self.entries.iter().map(|(k, _)| k)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Set {
    items: Vec<Value>,
    index: BTreeMap<HashKey, usize>,
}

impl Set {
    pub fn new() -> Self {
        Set::default()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, v: &Value) -> Result<bool, Exc> {
        Ok(self.index.contains_key(&HashKey::of(v)?))
    }

    /// Returns true when the element was not yet present.
    pub fn insert(&mut self, v: Value) -> Result<bool, Exc> {
        let hk = HashKey::of(&v)?;
        if self.index.contains_key(&hk) {
            return Ok(false);
        }
        self.index.insert(hk, self.items.len());
        self.items.push(v);
        Ok(true)
    }

    pub fn remove(&mut self, v: &Value) -> Result<bool, Exc> {
        let hk = HashKey::of(v)?;
        let Some(pos) = self.index.remove(&hk) else { return Ok(false) };
        self.items.remove(pos);
        for idx in self.index.values_mut() {
            if *idx > pos {
                *idx -= 1;
            }
        }
        Ok(true)
    }

    pub fn pop_first(&mut self) -> Option<Value> {
        if self.items.is_empty() {
            return None;
        }
        let v = self.items[0].clone();
        let _ = self.remove(&v);
        Some(v)
    }

    pub fn clear(&mut self) {
        self.items.clear();
        self.index.clear();
    }

    pub fn items(&self) -> &[Value] {
        &self.items
    }

    pub fn from_values(vals: impl IntoIterator<Item = Value>) -> Result<Set, Exc> {
        let mut s = Set::new();
        for v in vals {
            s.insert(v)?;
        }
        Ok(s)
    }
}

impl Value {
    pub fn str(s: &str) -> Value {
        Value::Str(Rc::from(s))
    }

    pub fn int(i: i64) -> Value {
        Value::Int(Int::from(i))
    }

    pub fn list(items: Vec<Value>) -> Value {
        Value::List(Rc::new(RefCell::new(items)))
    }

    pub fn tuple(items: Vec<Value>) -> Value {
        Value::Tuple(Rc::from(items))
    }

    pub fn dict(d: Dict) -> Value {
        Value::Dict(Rc::new(RefCell::new(d)))
    }

    pub fn set(s: Set) -> Value {
        Value::Set(Rc::new(RefCell::new(s)))
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::None => "NoneType",
            Value::Bool(_) => "bool",
            Value::Int(_) => "int",
            Value::Float(_) => "float",
            Value::Str(_) => "str",
            Value::List(_) => "list",
            Value::Tuple(_) => "tuple",
            Value::Dict(_) => "dict",
            Value::Set(_) => "set",
            Value::Range(_) => "range",
            Value::View(ViewKind::Keys, _) => "dict_keys",
            Value::View(ViewKind::Values, _) => "dict_values",
            Value::View(ViewKind::Items, _) => "dict_items",
            Value::Iter(it) => it.borrow().type_name(),
            Value::Func(f) => match &**f {
                Func::Builtin(n) if super::builtins::is_type_name(n) => "type",
                Func::Builtin(_) => "builtin_function_or_method",
                Func::Method { .. } => "builtin_function_or_method",
                _ => "function",
            },
        }
    }

    pub fn truthy(&self) -> bool {
        match self {
            Value::None => false,
            Value::Bool(b) => *b,
            Value::Int(i) => !i.is_zero(),
            Value::Float(f) => *f != 0.0,
            Value::Str(s) => !s.is_empty(),
            Value::List(l) => !l.borrow().is_empty(),
            Value::Tuple(t) => !t.is_empty(),
            Value::Dict(d) => !d.borrow().is_empty(),
            Value::Set(s) => !s.borrow().is_empty(),
            Value::Range(r) => r.len() > 0,
            Value::View(_, d) => !d.borrow().is_empty(),
            Value::Iter(_) | Value::Func(_) => true,
        }
    }

    /// Independent copy of containers (functions and iterators are shared).
    pub fn deep_copy(&self) -> Value {
        match self {
            Value::List(l) => Value::list(l.borrow().iter().map(|v| v.deep_copy()).collect()),
            Value::Tuple(t) => Value::tuple(t.iter().map(|v| v.deep_copy()).collect()),
            Value::Dict(d) => {
                let mut out = Dict::new();
                for (k, v) in d.borrow().entries() {
                    let _ = out.insert(k.deep_copy(), v.deep_copy());
                }
                Value::dict(out)
            }
            Value::Set(s) => {
                let mut out = Set::new();
                for v in s.borrow().items() {
                    let _ = out.insert(v.deep_copy());
                }
                Value::set(out)
            }
            other => other.clone(),
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Value::Bool(_) | Value::Int(_) | Value::Float(_))
    }

    /// Integer view of `Bool`/`Int`.
    pub fn as_int(&self) -> Option<Int> {
        match self {
            Value::Bool(b) => Some(Int::from(*b as i64)),
            Value::Int(i) => Some(i.clone()),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Bool(b) => Some(*b as i64 as f64),
            Value::Int(i) => i.to_f64(),
            Value::Float(f) => Some(*f),
            _ => None,
        }
    }

    pub fn same_object(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::List(a), Value::List(b)) => Rc::ptr_eq(a, b),
            (Value::Dict(a), Value::Dict(b)) => Rc::ptr_eq(a, b),
            (Value::Set(a), Value::Set(b)) => Rc::ptr_eq(a, b),
            (Value::Tuple(a), Value::Tuple(b)) => Rc::ptr_eq(a, b) || (a.is_empty() && b.is_empty()),
            (Value::Iter(a), Value::Iter(b)) => Rc::ptr_eq(a, b),
            (Value::Func(a), Value::Func(b)) => Rc::ptr_eq(a, b),
            (Value::None, Value::None) => true,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            // Small ints and interned strings are shared objects in the reference runtime.
            (Value::Int(a), Value::Int(b)) => a == b && a.as_i64().is_some_and(|v| (-5..=256).contains(&v)),
            (Value::Str(a), Value::Str(b)) => Rc::ptr_eq(a, b) || (a == b && a.len() <= 1),
            _ => false,
        }
    }
}

fn num_eq(a: &Value, b: &Value) -> Option<bool> {
    match (a, b) {
        (Value::Float(x), Value::Float(y)) => Some(x == y),
        (Value::Float(x), other) | (other, Value::Float(x)) => {
            let i = other.as_int()?;
            Some(i.cmp_f64(*x) == Some(Ordering::Equal))
        }
        _ => Some(a.as_int()? == b.as_int()?),
    }
}

/// The subject language's `==`.
pub fn py_eq(a: &Value, b: &Value) -> bool {
    if a.is_numeric() && b.is_numeric() {
        return num_eq(a, b).unwrap_or(false);
    }
    match (a, b) {
        (Value::None, Value::None) => true,
        (Value::Str(x), Value::Str(y)) => x == y,
        (Value::List(x), Value::List(y)) => {
            if Rc::ptr_eq(x, y) {
                return true;
            }
            let (x, y) = (x.borrow(), y.borrow());
            x.len() == y.len() && x.iter().zip(y.iter()).all(|(p, q)| p.same_object(q) || py_eq(p, q))
        }
        (Value::Tuple(x), Value::Tuple(y)) => {
            x.len() == y.len() && x.iter().zip(y.iter()).all(|(p, q)| p.same_object(q) || py_eq(p, q))
        }
        (Value::Dict(x), Value::Dict(y)) => {
            if Rc::ptr_eq(x, y) {
                return true;
            }
            let (x, y) = (x.borrow(), y.borrow());
            x.len() == y.len()
                && x.entries().iter().all(|(k, v)| match y.get(k) {
                    Ok(Some(w)) => v.same_object(w) || py_eq(v, w),
                    _ => false,
                })
        }
        (Value::Set(x), Value::Set(y)) => {
            if Rc::ptr_eq(x, y) {
                return true;
            }
            let (x, y) = (x.borrow(), y.borrow());
            x.len() == y.len() && x.items().iter().all(|v| y.contains(v).unwrap_or(false))
        }
        (Value::Range(x), Value::Range(y)) => {
            let (n, m) = (x.len(), y.len());
            n == m && (n == 0 || (x.start == y.start && (n == 1 || x.step == y.step)))
        }
        (Value::View(ViewKind::Keys, x), Value::View(ViewKind::Keys, y)) => {
            let (x, y) = (x.borrow(), y.borrow());
            x.len() == y.len() && x.keys().all(|k| y.contains(k).unwrap_or(false))
        }
        _ => a.same_object(b),
    }
}

/// Verdict equality: like `==` but tags must agree exactly and floats are
/// compared bit for bit. Dicts and sets compare without regard to order.
pub fn strict_eq(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::None, Value::None) => true,
        (Value::Bool(x), Value::Bool(y)) => x == y,
        (Value::Int(x), Value::Int(y)) => x == y,
        (Value::Float(x), Value::Float(y)) => x.to_bits() == y.to_bits(),
        (Value::Str(x), Value::Str(y)) => x == y,
        (Value::List(x), Value::List(y)) => {
            let (x, y) = (x.borrow(), y.borrow());
            x.len() == y.len() && x.iter().zip(y.iter()).all(|(p, q)| strict_eq(p, q))
        }
        (Value::Tuple(x), Value::Tuple(y)) => x.len() == y.len() && x.iter().zip(y.iter()).all(|(p, q)| strict_eq(p, q)),
        (Value::Dict(x), Value::Dict(y)) => {
            let (x, y) = (x.borrow(), y.borrow());
            x.len() == y.len()
                && x.entries().iter().all(|(k, v)| {
                    y.entries().iter().any(|(k2, v2)| strict_eq(k, k2) && strict_eq(v, v2))
                })
        }
        (Value::Set(x), Value::Set(y)) => {
            let (x, y) = (x.borrow(), y.borrow());
            x.len() == y.len() && x.items().iter().all(|v| y.items().iter().any(|w| strict_eq(v, w)))
        }
        (Value::Range(x), Value::Range(y)) => x == y,
        _ => false,
    }
}

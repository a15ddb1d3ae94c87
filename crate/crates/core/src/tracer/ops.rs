//! Operators: arithmetic, bitwise, comparison and membership.

use alloc::format;
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::error::{ErrorKind, Exc, VResult};
use super::value::{py_eq, Dict, Set, Value, ViewKind};
use crate::num::Int;
use crate::subjectlang::{BinOpKind, CmpOp, UnaryOpKind};

/// Largest container a single operation may build.
pub const MAX_SEQ: usize = 10_000_000;
/// Largest integer (in bits) a single operation may build.
pub const MAX_INT_BITS: u64 = 1_000_000;

fn too_big() -> Exc {
    Exc::new(ErrorKind::StepLimitExceeded, "result too large")
}

fn unsupported(op: &str, a: &Value, b: &Value) -> Exc {
    Exc::type_error(format!(
        "unsupported operand type(s) for {op}: '{}' and '{}'",
        a.type_name(),
        b.type_name()
    ))
}

fn int_to_f64(i: &Int) -> VResult<f64> {
    i.to_f64().ok_or_else(|| Exc::new(ErrorKind::OverflowError, "int too large to convert to float"))
}

fn check_bits(i: Int) -> VResult<Value> {
    if i.bits() > MAX_INT_BITS {
        return Err(too_big());
    }
    Ok(Value::Int(i))
}

/// CPython's float divmod: floor quotient and divisor-signed remainder.
pub fn float_divmod(vx: f64, wx: f64) -> VResult<(f64, f64)> {
    if wx == 0.0 {
        return Err(Exc::new(ErrorKind::ZeroDivisionError, "float divmod()"));
    }
    let mut m = libm::fmod(vx, wx);
    let mut div = (vx - m) / wx;
    if m != 0.0 {
        if (wx < 0.0) != (m < 0.0) {
            m += wx;
            div -= 1.0;
        }
    } else {
        m = libm::copysign(0.0, wx);
    }
    let floordiv = if div != 0.0 {
        let mut f = libm::floor(div);
        if div - f > 0.5 {
            f += 1.0;
        }
        f
    } else {
        libm::copysign(0.0, vx / wx)
    };
    Ok((floordiv, m))
}

fn float_pow(x: f64, y: f64) -> VResult<f64> {
    if x == 0.0 && y < 0.0 {
        return Err(Exc::new(ErrorKind::ZeroDivisionError, "0.0 cannot be raised to a negative power"));
    }
    if x < 0.0 && x.is_finite() && y.is_finite() && libm::floor(y) != y {
        return Err(Exc::new(ErrorKind::UnsupportedConstruct, "complex result"));
    }
    let r = libm::pow(x, y);
    if r.is_infinite() && x.is_finite() && y.is_finite() {
        return Err(Exc::new(ErrorKind::OverflowError, "(34, 'Numerical result out of range')"));
    }
    Ok(r)
}

fn int_pow(a: &Int, b: &Int) -> VResult<Value> {
    if b.is_negative() {
        return Ok(Value::Float(float_pow(int_to_f64(a)?, int_to_f64(b)?)?));
    }
    let small_base = matches!(a.as_i64(), Some(-1..=1));
    let Some(e) = b.as_i64().filter(|e| *e <= u32::MAX as i64) else {
        if small_base {
            let odd = b.bitand(&Int::from(1)).as_i64() == Some(1);
            return Ok(Value::Int(match a.as_i64() {
                Some(-1) if !odd => Int::from(1),
                _ => a.clone(),
            }));
        }
        return Err(too_big());
    };
    if !small_base && a.bits().saturating_mul(e as u64) > MAX_INT_BITS + 64 {
        return Err(too_big());
    }
    check_bits(a.pow(e as u32))
}

fn arith_num(op: BinOpKind, a: &Value, b: &Value) -> VResult<Value> {
    if let (Some(x), Some(y)) = (a.as_int(), b.as_int()) {
        return match op {
            BinOpKind::Add => check_bits(x.add(&y)),
            BinOpKind::Sub => check_bits(x.sub(&y)),
            BinOpKind::Mul => {
                if x.bits() + y.bits() > MAX_INT_BITS + 1 {
                    return Err(too_big());
                }
                Ok(Value::Int(x.mul(&y)))
            }
            BinOpKind::Div => {
                if y.is_zero() {
                    return Err(Exc::new(ErrorKind::ZeroDivisionError, "division by zero"));
                }
                Ok(Value::Float(int_to_f64(&x)? / int_to_f64(&y)?))
            }
            BinOpKind::FloorDiv => x
                .floor_div(&y)
                .map(Value::Int)
                .ok_or_else(|| Exc::new(ErrorKind::ZeroDivisionError, "integer division or modulo by zero")),
            BinOpKind::Mod => x
                .floor_mod(&y)
                .map(Value::Int)
                .ok_or_else(|| Exc::new(ErrorKind::ZeroDivisionError, "integer division or modulo by zero")),
            BinOpKind::Pow => int_pow(&x, &y),
            BinOpKind::BitAnd | BinOpKind::BitOr | BinOpKind::BitXor => {
                let r = match op {
                    BinOpKind::BitAnd => x.bitand(&y),
                    BinOpKind::BitOr => x.bitor(&y),
                    _ => x.bitxor(&y),
                };
                if let (Value::Bool(_), Value::Bool(_)) = (a, b) {
                    return Ok(Value::Bool(!r.is_zero()));
                }
                Ok(Value::Int(r))
            }
            BinOpKind::LShift | BinOpKind::RShift => {
                if y.is_negative() {
                    return Err(Exc::value_error("negative shift count"));
                }
                if op == BinOpKind::RShift {
                    return Ok(Value::Int(x.shr(y.as_i64().unwrap_or(i64::MAX) as u64)));
                }
                if x.is_zero() {
                    return Ok(Value::int(0));
                }
                let n = y.as_i64().filter(|n| (*n as u64) + x.bits() <= MAX_INT_BITS).ok_or_else(too_big)?;
                Ok(Value::Int(x.shl(n as u32)))
            }
        };
    }
    let (x, y) = match (a, b) {
        (Value::Float(x), Value::Float(y)) => (*x, *y),
        (Value::Float(x), other) => (*x, int_to_f64(&other.as_int().unwrap_or_else(Int::zero))?),
        (other, Value::Float(y)) => (int_to_f64(&other.as_int().unwrap_or_else(Int::zero))?, *y),
        _ => return Err(unsupported(op.symbol(), a, b)),
    };
    Ok(Value::Float(match op {
        BinOpKind::Add => x + y,
        BinOpKind::Sub => x - y,
        BinOpKind::Mul => x * y,
        BinOpKind::Div => {
            if y == 0.0 {
                return Err(Exc::new(ErrorKind::ZeroDivisionError, "float division by zero"));
            }
            x / y
        }
        BinOpKind::FloorDiv => {
            if y == 0.0 {
                return Err(Exc::new(ErrorKind::ZeroDivisionError, "float floor division by zero"));
            }
            float_divmod(x, y)?.0
        }
        BinOpKind::Mod => {
            if y == 0.0 {
                return Err(Exc::new(ErrorKind::ZeroDivisionError, "float modulo"));
            }
            float_divmod(x, y)?.1
        }
        BinOpKind::Pow => float_pow(x, y)?,
        _ => return Err(unsupported(op.symbol(), a, b)),
    }))
}

fn repeat_count(n: &Value) -> Option<Int> {
    match n {
        Value::Int(_) | Value::Bool(_) => n.as_int(),
        _ => None,
    }
}

fn repeat<T: Clone>(items: &[T], n: &Int) -> VResult<Vec<T>> {
    let k = if n.is_negative() { 0 } else { n.as_i64().map(|v| v as u64).unwrap_or(u64::MAX) };
    if items.is_empty() || k == 0 {
        return Ok(Vec::new());
    }
    if (items.len() as u64).saturating_mul(k) > MAX_SEQ as u64 {
        return Err(too_big());
    }
    let mut out = Vec::with_capacity(items.len() * k as usize);
    for _ in 0..k {
        out.extend_from_slice(items);
    }
    Ok(out)
}

fn concat_error(a: &Value, b: &Value) -> Exc {
    Exc::type_error(format!(
        "can only concatenate {} (not \"{}\") to {}",
        a.type_name(),
        b.type_name(),
        a.type_name()
    ))
}

fn set_items(v: &Value) -> Option<Vec<Value>> {
    match v {
        Value::Set(s) => Some(s.borrow().items().to_vec()),
        Value::View(ViewKind::Keys, d) => Some(d.borrow().keys().cloned().collect()),
        _ => None,
    }
}

fn set_op(op: BinOpKind, a: &Value, b: &Value) -> VResult<Option<Value>> {
    let (Some(xs), Some(ys)) = (set_items(a), set_items(b)) else { return Ok(None) };
    let right = Set::from_values(ys.iter().cloned())?;
    let left = Set::from_values(xs.iter().cloned())?;
    let out = match op {
        BinOpKind::BitOr => Set::from_values(xs.into_iter().chain(ys))?,
        BinOpKind::BitAnd => {
            let mut s = Set::new();
            for x in xs {
                if right.contains(&x)? {
                    s.insert(x)?;
                }
            }
            s
        }
        BinOpKind::Sub => {
            let mut s = Set::new();
            for x in xs {
                if !right.contains(&x)? {
                    s.insert(x)?;
                }
            }
            s
        }
        BinOpKind::BitXor => {
            let mut s = Set::new();
            for x in xs {
                if !right.contains(&x)? {
                    s.insert(x)?;
                }
            }
            for y in ys {
                if !left.contains(&y)? {
                    s.insert(y)?;
                }
            }
            s
        }
        _ => return Ok(None),
    };
    Ok(Some(Value::set(out)))
}

/// `a <op> b`.
pub fn binop(op: BinOpKind, a: &Value, b: &Value) -> VResult<Value> {
    if a.is_numeric() && b.is_numeric() {
        return arith_num(op, a, b);
    }
    match (op, a, b) {
        (BinOpKind::Add, Value::Str(x), Value::Str(y)) => {
            if x.len() + y.len() > MAX_SEQ {
                return Err(too_big());
            }
            let mut s = String::with_capacity(x.len() + y.len());
            s.push_str(x);
            s.push_str(y);
            Ok(Value::Str(Rc::from(s)))
        }
        (BinOpKind::Add, Value::List(x), Value::List(y)) => {
            let mut v = x.borrow().clone();
            v.extend(y.borrow().iter().cloned());
            if v.len() > MAX_SEQ {
                return Err(too_big());
            }
            Ok(Value::list(v))
        }
        (BinOpKind::Add, Value::Tuple(x), Value::Tuple(y)) => {
            let mut v = x.to_vec();
            v.extend(y.iter().cloned());
            Ok(Value::tuple(v))
        }
        (BinOpKind::Add, Value::Str(_) | Value::List(_) | Value::Tuple(_), _) => Err(concat_error(a, b)),
        (BinOpKind::Mul, Value::Str(_) | Value::List(_) | Value::Tuple(_), n) if repeat_count(n).is_some() => {
            seq_repeat(a, &repeat_count(n).unwrap_or_else(Int::zero))
        }
        (BinOpKind::Mul, n, Value::Str(_) | Value::List(_) | Value::Tuple(_)) if repeat_count(n).is_some() => {
            seq_repeat(b, &repeat_count(n).unwrap_or_else(Int::zero))
        }
        (BinOpKind::Mod, Value::Str(fmt), args) => Ok(Value::str(&super::format::percent_format(fmt, args)?)),
        (BinOpKind::BitOr, Value::Dict(x), Value::Dict(y)) => {
            let mut d: Dict = x.borrow().clone();
            for (k, v) in y.borrow().entries() {
                d.insert(k.clone(), v.clone())?;
            }
            Ok(Value::dict(d))
        }
        _ => match set_op(op, a, b)? {
            Some(v) => Ok(v),
            None => Err(unsupported(op.symbol(), a, b)),
        },
    }
}

fn seq_repeat(seq: &Value, n: &Int) -> VResult<Value> {
    Ok(match seq {
        Value::Str(s) => {
            let chars: Vec<u8> = s.as_bytes().to_vec();
            let out = repeat(&chars, n)?;
            Value::Str(Rc::from(String::from_utf8(out).unwrap_or_default()))
        }
        Value::List(l) => Value::list(repeat(&l.borrow(), n)?),
        Value::Tuple(t) => Value::tuple(repeat(t, n)?),
        _ => unreachable!("sequence expected"),
    })
}

/// In-place variant used by augmented assignment: lists extend in place.
pub fn inplace_binop(op: BinOpKind, a: &Value, b: &Value, items_of: impl FnOnce(&Value) -> VResult<Vec<Value>>) -> VResult<Value> {
    match (op, a) {
        (BinOpKind::Add, Value::List(l)) => {
            let extra = match b {
                Value::List(other) => other.borrow().clone(),
                _ => items_of(b)?,
            };
            if l.borrow().len() + extra.len() > MAX_SEQ {
                return Err(too_big());
            }
            l.borrow_mut().extend(extra);
            Ok(a.clone())
        }
        (BinOpKind::Mul, Value::List(l)) if repeat_count(b).is_some() => {
            let v = repeat(&l.borrow(), &repeat_count(b).unwrap_or_else(Int::zero))?;
            *l.borrow_mut() = v;
            Ok(a.clone())
        }
        (BinOpKind::BitOr | BinOpKind::BitAnd | BinOpKind::Sub | BinOpKind::BitXor, Value::Set(s))
            if matches!(b, Value::Set(_)) =>
        {
            let r = binop(op, a, b)?;
            if let Value::Set(n) = &r {
                let fresh = n.borrow().clone();
                *s.borrow_mut() = fresh;
            }
            Ok(a.clone())
        }
        (BinOpKind::BitOr, Value::Dict(d)) if matches!(b, Value::Dict(_)) => {
            if let Value::Dict(o) = b {
                let entries: Vec<(Value, Value)> = o.borrow().entries().to_vec();
                for (k, v) in entries {
                    d.borrow_mut().insert(k, v)?;
                }
            }
            Ok(a.clone())
        }
        _ => binop(op, a, b),
    }
}

pub fn unary(op: UnaryOpKind, v: &Value) -> VResult<Value> {
    let bad = |sym: &str| Exc::type_error(format!("bad operand type for unary {sym}: '{}'", v.type_name()));
    match op {
        UnaryOpKind::Not => Ok(Value::Bool(!v.truthy())),
        UnaryOpKind::Neg => match v {
            Value::Float(f) => Ok(Value::Float(-f)),
            _ => v.as_int().map(|i| Value::Int(i.neg())).ok_or_else(|| bad("-")),
        },
        UnaryOpKind::Pos => match v {
            Value::Float(f) => Ok(Value::Float(*f)),
            _ => v.as_int().map(Value::Int).ok_or_else(|| bad("+")),
        },
        UnaryOpKind::Invert => v.as_int().map(|i| Value::Int(i.invert())).ok_or_else(|| bad("~")),
    }
}

fn num_cmp(a: &Value, b: &Value) -> Option<Ordering> {
    match (a, b) {
        (Value::Float(x), Value::Float(y)) => x.partial_cmp(y),
        (Value::Float(x), o) => o.as_int()?.cmp_f64(*x).map(Ordering::reverse),
        (o, Value::Float(y)) => o.as_int()?.cmp_f64(*y),
        _ => Some(a.as_int()?.cmp(&b.as_int()?)),
    }
}

fn holds(op: CmpOp, o: Option<Ordering>) -> bool {
    match o {
        None => false,
        Some(o) => match op {
            CmpOp::Lt => o == Ordering::Less,
            CmpOp::LtE => o != Ordering::Greater,
            CmpOp::Gt => o == Ordering::Greater,
            CmpOp::GtE => o != Ordering::Less,
            _ => false,
        },
    }
}

fn seq_order(op: CmpOp, x: &[Value], y: &[Value]) -> VResult<bool> {
    for (p, q) in x.iter().zip(y.iter()) {
        if !(p.same_object(q) || py_eq(p, q)) {
            return order(op, p, q);
        }
    }
    Ok(holds(op, Some(x.len().cmp(&y.len()))))
}

fn subset(x: &Set, y: &Set) -> VResult<bool> {
    for v in x.items() {
        if !y.contains(v)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `<`, `<=`, `>`, `>=`.
pub fn order(op: CmpOp, a: &Value, b: &Value) -> VResult<bool> {
    if a.is_numeric() && b.is_numeric() {
        return Ok(holds(op, num_cmp(a, b)));
    }
    match (a, b) {
        (Value::Str(x), Value::Str(y)) => Ok(holds(op, Some(x.as_ref().cmp(y.as_ref())))),
        (Value::List(x), Value::List(y)) => {
            let (x, y) = (x.borrow().clone(), y.borrow().clone());
            seq_order(op, &x, &y)
        }
        (Value::Tuple(x), Value::Tuple(y)) => seq_order(op, x, y),
        (Value::Set(x), Value::Set(y)) => {
            let (x, y) = (x.borrow(), y.borrow());
            Ok(match op {
                CmpOp::LtE => subset(&x, &y)?,
                CmpOp::Lt => x.len() < y.len() && subset(&x, &y)?,
                CmpOp::GtE => subset(&y, &x)?,
                CmpOp::Gt => y.len() < x.len() && subset(&y, &x)?,
                _ => false,
            })
        }
        _ => Err(Exc::type_error(format!(
            "'{}' not supported between instances of '{}' and '{}'",
            op.symbol(),
            a.type_name(),
            b.type_name()
        ))),
    }
}

/// `a < b`, the ordering used by `sorted`, `min` and `max`.
pub fn lt(a: &Value, b: &Value) -> VResult<bool> {
    order(CmpOp::Lt, a, b)
}

/// Membership for every container but iterators (which the interpreter drains).
pub fn contains(container: &Value, item: &Value) -> VResult<bool> {
    let eq = |x: &Value| x.same_object(item) || py_eq(x, item);
    match container {
        Value::Str(s) => match item {
            Value::Str(sub) => Ok(s.contains(sub.as_ref())),
            other => Err(Exc::type_error(format!(
                "'in <string>' requires string as left operand, not {}",
                other.type_name()
            ))),
        },
        Value::List(l) => Ok(l.borrow().iter().any(eq)),
        Value::Tuple(t) => Ok(t.iter().any(eq)),
        Value::Dict(d) => d.borrow().contains(item),
        Value::Set(s) => s.borrow().contains(item),
        Value::Range(r) => {
            let i = match item {
                Value::Float(f) if libm::trunc(*f) == *f => Int::from_f64_trunc(*f),
                Value::Float(_) => None,
                other => other.as_int(),
            };
            let Some(i) = i.and_then(|i| i.as_i64()) else { return Ok(false) };
            let n = r.len() as i128;
            if n == 0 {
                return Ok(false);
            }
            let off = i as i128 - r.start as i128;
            let step = r.step as i128;
            Ok(off % step == 0 && (0..n).contains(&(off / step)))
        }
        Value::View(kind, d) => {
            let d = d.borrow();
            match kind {
                ViewKind::Keys => d.contains(item),
                ViewKind::Values => Ok(d.entries().iter().any(|(_, v)| eq(v))),
                ViewKind::Items => match item {
                    Value::Tuple(t) if t.len() == 2 => Ok(match d.get(&t[0])? {
                        Some(v) => v.same_object(&t[1]) || py_eq(v, &t[1]),
                        None => false,
                    }),
                    _ => Ok(false),
                },
            }
        }
        other => Err(Exc::type_error(format!("argument of type '{}' is not iterable", other.type_name()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(x: f64) -> Value {
        Value::Float(x)
    }

    #[test]
    fn floor_semantics() {
        let r = binop(BinOpKind::FloorDiv, &Value::int(-7), &Value::int(2)).unwrap();
        assert!(py_eq(&r, &Value::int(-4)));
        let r = binop(BinOpKind::Mod, &Value::int(-7), &Value::int(2)).unwrap();
        assert!(py_eq(&r, &Value::int(1)));
        let r = binop(BinOpKind::Mod, &f(-7.5), &f(2.0)).unwrap();
        assert!(matches!(r, Value::Float(x) if x == 0.5));
        let r = binop(BinOpKind::FloorDiv, &f(7.0), &f(-2.0)).unwrap();
        assert!(matches!(r, Value::Float(x) if x == -4.0));
        assert_eq!(binop(BinOpKind::Div, &Value::int(1), &Value::int(0)).unwrap_err().kind, ErrorKind::ZeroDivisionError);
    }

    #[test]
    fn pow_and_caps() {
        let r = binop(BinOpKind::Pow, &Value::int(2), &Value::int(-1)).unwrap();
        assert!(matches!(r, Value::Float(x) if x == 0.5));
        let r = binop(BinOpKind::Pow, &Value::int(2), &Value::int(100)).unwrap();
        assert_eq!(super::super::render::repr(&r), "1267650600228229401496703205376");
        assert_eq!(binop(BinOpKind::Pow, &Value::int(10), &Value::int(10_000_000)).unwrap_err().kind, ErrorKind::StepLimitExceeded);
        assert_eq!(binop(BinOpKind::Mul, &Value::list(alloc::vec![Value::None]), &Value::int(100_000_000)).unwrap_err().kind, ErrorKind::StepLimitExceeded);
    }

    #[test]
    fn comparisons() {
        assert!(order(CmpOp::Lt, &Value::int(1), &f(1.5)).unwrap());
        let a = Value::tuple(alloc::vec![Value::int(1), Value::str("b")]);
        let b = Value::tuple(alloc::vec![Value::int(1), Value::str("c")]);
        assert!(order(CmpOp::Lt, &a, &b).unwrap());
        assert!(order(CmpOp::Lt, &Value::int(1), &Value::str("x")).is_err());
        assert!(contains(&Value::str("hello"), &Value::str("ell")).unwrap());
        let r = Value::Range(super::super::value::RangeV { start: 0, stop: 10, step: 3 });
        assert!(contains(&r, &Value::int(9)).unwrap());
        assert!(!contains(&r, &Value::int(10)).unwrap());
    }
}

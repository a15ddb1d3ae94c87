//! Methods of the builtin types.

use alloc::format;
use alloc::rc::Rc;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::builtins::int_arg;
use super::error::{ErrorKind, Exc, VResult};
use super::interp::{seq_index, str_len, Interp};
use super::ops::MAX_SEQ;
use super::render::repr;
use super::value::{py_eq, Func, Set, Value, ViewKind};
use crate::num::Int;

const LIST: &[&str] = &[
    "append", "extend", "insert", "pop", "remove", "index", "count", "sort", "reverse", "clear", "copy",
];
const DICT: &[&str] = &["get", "setdefault", "keys", "values", "items", "pop", "popitem", "update", "clear", "copy"];
const SET: &[&str] = &[
    "add", "remove", "discard", "pop", "union", "intersection", "difference", "symmetric_difference", "issubset",
    "issuperset", "isdisjoint", "update", "intersection_update", "difference_update", "symmetric_difference_update",
    "clear", "copy",
];
const STR: &[&str] = &[
    "join", "split", "rsplit", "strip", "lstrip", "rstrip", "upper", "lower", "replace", "startswith", "endswith",
    "find", "rfind", "index", "rindex", "count", "isdigit", "isalpha", "isalnum", "isspace", "isupper", "islower",
    "isnumeric", "isdecimal", "title", "capitalize", "swapcase", "casefold", "format", "zfill", "center", "ljust",
    "rjust", "splitlines", "partition", "rpartition", "removeprefix", "removesuffix", "istitle",
];
const TUPLE: &[&str] = &["count", "index"];
const INT: &[&str] = &["bit_length"];
const FLOAT: &[&str] = &["is_integer"];

fn method_table(v: &Value) -> &'static [&'static str] {
    match v {
        Value::List(_) => LIST,
        Value::Dict(_) => DICT,
        Value::Set(_) => SET,
        Value::Str(_) => STR,
        Value::Tuple(_) => TUPLE,
        Value::Int(_) | Value::Bool(_) => INT,
        Value::Float(_) => FLOAT,
        _ => &[],
    }
}

fn no_attr(v: &Value, attr: &str) -> Exc {
    Exc::new(ErrorKind::AttributeError, format!("'{}' object has no attribute '{attr}'", v.type_name()))
}

/// `v.attr` outside a call: a bound method.
pub fn attribute(v: &Value, attr: &str) -> VResult<Value> {
    if method_table(v).contains(&attr) {
        return Ok(Value::Func(Rc::new(Func::Method { receiver: v.clone(), name: Rc::from(attr) })));
    }
    Err(no_attr(v, attr))
}

fn nargs(name: &str, args: &[Value], lo: usize, hi: usize) -> VResult<()> {
    if args.len() < lo || args.len() > hi {
        let msg = if lo == hi && lo == 0 {
            format!("{name}() takes no arguments ({} given)", args.len())
        } else if lo == hi {
            format!("{name}() takes exactly one argument ({} given)", args.len())
        } else if args.len() < lo {
            format!("{name}() takes at least {lo} argument{} ({} given)", if lo == 1 { "" } else { "s" }, args.len())
        } else {
            format!("{name}() takes at most {hi} arguments ({} given)", args.len())
        };
        return Err(Exc::type_error(msg));
    }
    Ok(())
}

fn kw(name: &str, kwargs: Vec<(String, Value)>, allowed: &[&str]) -> VResult<Vec<Option<Value>>> {
    let mut out = alloc::vec![None; allowed.len()];
    for (k, v) in kwargs {
        match allowed.iter().position(|a| *a == k) {
            Some(i) => out[i] = Some(v),
            None => return Err(Exc::type_error(format!("{name}() got an unexpected keyword argument '{k}'"))),
        }
    }
    Ok(out)
}

fn str_arg<'a>(v: &'a Value, name: &str) -> VResult<&'a str> {
    match v {
        Value::Str(s) => Ok(s),
        other => Err(Exc::type_error(format!("{name} arg must be None or str, not {}", other.type_name()))),
    }
}

fn too_long(n: usize) -> VResult<()> {
    if n > MAX_SEQ {
        return Err(Exc::new(ErrorKind::StepLimitExceeded, "result too large"));
    }
    Ok(())
}

fn eq(a: &Value, b: &Value) -> bool {
    a.same_object(b) || py_eq(a, b)
}

/// Clamped `[start, end)` in character positions, from optional slice-like args.
fn char_range(len: usize, start: Option<&Value>, end: Option<&Value>) -> VResult<(usize, usize)> {
    let conv = |v: Option<&Value>, default: usize| -> VResult<usize> {
        match v {
            None | Some(Value::None) => Ok(default),
            Some(v) => {
                let i = int_arg(v, "")?.as_i64().unwrap_or(0);
                let i = if i < 0 { (i + len as i64).max(0) } else { i.min(len as i64) };
                Ok(i as usize)
            }
        }
    };
    Ok((conv(start, 0)?, conv(end, len)?))
}

fn chars_of(s: &str) -> Vec<char> {
    s.chars().collect()
}

fn find_in(hay: &[char], needle: &[char], from_right: bool) -> Option<usize> {
    if needle.len() > hay.len() {
        return None;
    }
    let last = hay.len() - needle.len();
    if from_right {
        (0..=last).rev().find(|i| &hay[*i..*i + needle.len()] == needle)
    } else {
        (0..=last).find(|i| &hay[*i..*i + needle.len()] == needle)
    }
}

fn py_isspace(c: char) -> bool {
    c.is_whitespace() || matches!(c, '\u{1c}'..='\u{1f}')
}

fn split_whitespace(s: &str, maxsplit: i64, from_right: bool) -> Vec<Value> {
    let chars: Vec<char> = s.chars().collect();
    let mut out: Vec<String> = Vec::new();
    let mut splits = 0i64;
    if !from_right {
        let mut i = 0;
        while i < chars.len() {
            while i < chars.len() && py_isspace(chars[i]) {
                i += 1;
            }
            if i >= chars.len() {
                break;
            }
            if maxsplit >= 0 && splits >= maxsplit {
                let rest: String = chars[i..].iter().collect();
                out.push(rest.trim_end_matches(py_isspace).to_string());
                break;
            }
            let start = i;
            while i < chars.len() && !py_isspace(chars[i]) {
                i += 1;
            }
            out.push(chars[start..i].iter().collect());
            splits += 1;
        }
    } else {
        let mut i = chars.len();
        while i > 0 {
            while i > 0 && py_isspace(chars[i - 1]) {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            if maxsplit >= 0 && splits >= maxsplit {
                let rest: String = chars[..i].iter().collect();
                out.push(rest.trim_start_matches(py_isspace).to_string());
                break;
            }
            let end = i;
            while i > 0 && !py_isspace(chars[i - 1]) {
                i -= 1;
            }
            out.push(chars[i..end].iter().collect());
            splits += 1;
        }
        out.reverse();
    }
    out.into_iter().map(|p| Value::str(&p)).collect()
}

fn split_sep(s: &str, sep: &str, maxsplit: i64, from_right: bool) -> Vec<Value> {
    let parts: Vec<&str> = match (maxsplit < 0, from_right) {
        (true, _) => s.split(sep).collect(),
        (false, false) => s.splitn(maxsplit as usize + 1, sep).collect(),
        (false, true) => {
            let mut v: Vec<&str> = s.rsplitn(maxsplit as usize + 1, sep).collect();
            v.reverse();
            v
        }
    };
    parts.into_iter().map(Value::str).collect()
}

fn strip_chars(s: &str, chars: Option<&str>, left: bool, right: bool) -> String {
    let keep = |c: char| match chars {
        None => py_isspace(c),
        Some(set) => set.contains(c),
    };
    let mut t = s;
    if left {
        t = t.trim_start_matches(keep);
    }
    if right {
        t = t.trim_end_matches(keep);
    }
    t.to_string()
}

fn is_cased(c: char) -> bool {
    c.is_uppercase() || c.is_lowercase()
}

fn title(s: &str) -> String {
    let mut out = String::new();
    let mut prev_cased = false;
    for c in s.chars() {
        if prev_cased {
            out.extend(c.to_lowercase());
        } else {
            out.extend(c.to_uppercase());
        }
        prev_cased = is_cased(c);
    }
    out
}

fn pad_to(s: &str, width: usize, fill: char, how: char) -> String {
    let len = str_len(s);
    if width <= len {
        return s.to_string();
    }
    let marg = width - len;
    let left = match how {
        '<' => 0,
        '>' => marg,
        _ => marg / 2 + (marg & width & 1),
    };
    let mut out = String::new();
    out.extend(core::iter::repeat_n(fill, left));
    out.push_str(s);
    out.extend(core::iter::repeat_n(fill, marg - left));
    out
}

fn fill_char(v: Option<&Value>) -> VResult<char> {
    match v {
        None => Ok(' '),
        Some(Value::Str(s)) if s.chars().count() == 1 => Ok(s.chars().next().unwrap_or(' ')),
        Some(_) => Err(Exc::type_error("The fill character must be exactly one character long")),
    }
}

fn splitlines(s: &str, keepends: bool) -> Vec<Value> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let brk = matches!(c, '\n' | '\r' | '\u{0b}' | '\u{0c}' | '\u{1c}' | '\u{1d}' | '\u{1e}' | '\u{85}' | '\u{2028}' | '\u{2029}');
        if brk {
            let mut end = i + 1;
            if c == '\r' && chars.get(i + 1) == Some(&'\n') {
                end += 1;
            }
            let stop = if keepends { end } else { i };
            out.push(Value::Str(Rc::from(chars[start..stop].iter().collect::<String>())));
            start = end;
            i = end;
        } else {
            i += 1;
        }
    }
    if start < chars.len() {
        out.push(Value::Str(Rc::from(chars[start..].iter().collect::<String>())));
    }
    out
}

impl<'t> Interp<'t> {
    pub(super) fn call_method(&mut self, recv: &Value, name: &str, args: Vec<Value>, kwargs: Vec<(String, Value)>) -> VResult<Value> {
        if !method_table(recv).contains(&name) {
            return Err(no_attr(recv, name));
        }
        match recv {
            Value::List(_) => self.list_method(recv, name, args, kwargs),
            Value::Dict(_) => self.dict_method(recv, name, args, kwargs),
            Value::Set(_) => self.set_method(recv, name, args, kwargs),
            Value::Str(s) => self.str_method(s.clone(), name, args, kwargs),
            Value::Tuple(t) => {
                kw(name, kwargs, &[])?;
                seq_method(&t[..], name, &args, "tuple")
            }
            Value::Int(_) | Value::Bool(_) => {
                nargs(name, &args, 0, 0)?;
                Ok(Value::int(recv.as_int().unwrap_or_else(Int::zero).bits() as i64))
            }
            Value::Float(f) => {
                nargs(name, &args, 0, 0)?;
                Ok(Value::Bool(f.is_finite() && libm::trunc(*f) == *f))
            }
            _ => Err(no_attr(recv, name)),
        }
    }

    fn list_method(&mut self, recv: &Value, name: &str, args: Vec<Value>, kwargs: Vec<(String, Value)>) -> VResult<Value> {
        let Value::List(l) = recv else { unreachable!() };
        if name == "sort" {
            if !args.is_empty() {
                return Err(Exc::type_error("sort() takes no positional arguments"));
            }
            let k = kw(name, kwargs, &["key", "reverse"])?;
            let items = core::mem::take(&mut *l.borrow_mut());
            let reverse = k[1].as_ref().is_some_and(|v| v.truthy());
            let sorted = self.sort_values(items.clone(), k[0].as_ref(), reverse);
            match sorted {
                Ok(v) => *l.borrow_mut() = v,
                Err(e) => {
                    *l.borrow_mut() = items;
                    return Err(e);
                }
            }
            return Ok(Value::None);
        }
        kw(name, kwargs, &[])?;
        match name {
            "append" => {
                nargs(name, &args, 1, 1)?;
                too_long(l.borrow().len() + 1)?;
                l.borrow_mut().push(args[0].clone());
                Ok(Value::None)
            }
            "extend" => {
                nargs(name, &args, 1, 1)?;
                let items = self.collect(&args[0])?;
                too_long(l.borrow().len() + items.len())?;
                l.borrow_mut().extend(items);
                Ok(Value::None)
            }
            "insert" => {
                nargs(name, &args, 2, 2)?;
                let len = l.borrow().len() as i64;
                let i = int_arg(&args[0], "")?.as_i64().unwrap_or(if args[0].as_int().is_some_and(|i| i.is_negative()) { i64::MIN / 2 } else { i64::MAX / 2 });
                let i = if i < 0 { (i + len).max(0) } else { i.min(len) };
                l.borrow_mut().insert(i as usize, args[1].clone());
                Ok(Value::None)
            }
            "pop" => {
                nargs(name, &args, 0, 1)?;
                let len = l.borrow().len();
                if len == 0 {
                    return Err(Exc::new(ErrorKind::IndexError, "pop from empty list"));
                }
                let idx = match args.first() {
                    None => Some(len - 1),
                    Some(k) => seq_index(k, len, "list")?,
                };
                let idx = idx.ok_or_else(|| Exc::new(ErrorKind::IndexError, "pop index out of range"))?;
                Ok(l.borrow_mut().remove(idx))
            }
            "remove" => {
                nargs(name, &args, 1, 1)?;
                let pos = l.borrow().iter().position(|x| eq(x, &args[0]));
                match pos {
                    Some(p) => {
                        l.borrow_mut().remove(p);
                        Ok(Value::None)
                    }
                    None => Err(Exc::value_error("list.remove(x): x not in list")),
                }
            }
            "reverse" => {
                nargs(name, &args, 0, 0)?;
                l.borrow_mut().reverse();
                Ok(Value::None)
            }
            "clear" => {
                nargs(name, &args, 0, 0)?;
                l.borrow_mut().clear();
                Ok(Value::None)
            }
            "copy" => {
                nargs(name, &args, 0, 0)?;
                Ok(Value::list(l.borrow().clone()))
            }
            _ => {
                let items = l.borrow().clone();
                seq_method(&items, name, &args, "list")
            }
        }
    }

    fn dict_method(&mut self, recv: &Value, name: &str, args: Vec<Value>, kwargs: Vec<(String, Value)>) -> VResult<Value> {
        let Value::Dict(d) = recv else { unreachable!() };
        if name == "update" {
            nargs(name, &args, 0, 1)?;
            let mut fresh = d.borrow().clone();
            if let Some(src) = args.first() {
                self.dict_update(&mut fresh, src)?;
            }
            for (k, v) in kwargs {
                fresh.insert(Value::str(&k), v)?;
            }
            *d.borrow_mut() = fresh;
            return Ok(Value::None);
        }
        kw(name, kwargs, &[])?;
        match name {
            "get" => {
                nargs(name, &args, 1, 2)?;
                let v = d.borrow().get(&args[0])?.cloned();
                Ok(v.unwrap_or_else(|| args.get(1).cloned().unwrap_or(Value::None)))
            }
            "setdefault" => {
                nargs(name, &args, 1, 2)?;
                let existing = d.borrow().get(&args[0])?.cloned();
                match existing {
                    Some(v) => Ok(v),
                    None => {
                        let v = args.get(1).cloned().unwrap_or(Value::None);
                        d.borrow_mut().insert(args[0].clone(), v.clone())?;
                        Ok(v)
                    }
                }
            }
            "keys" | "values" | "items" => {
                nargs(name, &args, 0, 0)?;
                let kind = match name {
                    "keys" => ViewKind::Keys,
                    "values" => ViewKind::Values,
                    _ => ViewKind::Items,
                };
                Ok(Value::View(kind, d.clone()))
            }
            "pop" => {
                nargs(name, &args, 1, 2)?;
                let removed = d.borrow_mut().remove(&args[0])?;
                match (removed, args.get(1)) {
                    (Some(v), _) => Ok(v),
                    (None, Some(default)) => Ok(default.clone()),
                    (None, None) => Err(Exc::new(ErrorKind::KeyError, repr(&args[0]))),
                }
            }
            "popitem" => {
                nargs(name, &args, 0, 0)?;
                let item = d.borrow_mut().pop_last();
                match item {
                    Some((k, v)) => Ok(Value::tuple(alloc::vec![k, v])),
                    None => Err(Exc::new(ErrorKind::KeyError, "'popitem(): dictionary is empty'")),
                }
            }
            "clear" => {
                nargs(name, &args, 0, 0)?;
                d.borrow_mut().clear();
                Ok(Value::None)
            }
            "copy" => {
                nargs(name, &args, 0, 0)?;
                Ok(Value::dict(d.borrow().clone()))
            }
            _ => Err(no_attr(recv, name)),
        }
    }

    fn set_method(&mut self, recv: &Value, name: &str, args: Vec<Value>, kwargs: Vec<(String, Value)>) -> VResult<Value> {
        let Value::Set(s) = recv else { unreachable!() };
        kw(name, kwargs, &[])?;
        let mut others: Vec<Vec<Value>> = Vec::new();
        let takes_iterables = matches!(
            name,
            "union" | "intersection" | "difference" | "symmetric_difference" | "issubset" | "issuperset" | "isdisjoint"
                | "update" | "intersection_update" | "difference_update" | "symmetric_difference_update"
        );
        if takes_iterables {
            for a in &args {
                others.push(self.collect(a)?);
            }
        }
        let single = |others: &Vec<Vec<Value>>| -> VResult<Set> {
            if others.len() != 1 {
                return Err(Exc::type_error(format!("{name}() takes exactly one argument ({} given)", others.len())));
            }
            Set::from_values(others[0].iter().cloned())
        };
        let cur = s.borrow().clone();
        let result = match name {
            "add" => {
                nargs(name, &args, 1, 1)?;
                too_long(cur.len() + 1)?;
                s.borrow_mut().insert(args[0].clone())?;
                return Ok(Value::None);
            }
            "remove" => {
                nargs(name, &args, 1, 1)?;
                if !s.borrow_mut().remove(&args[0])? {
                    return Err(Exc::new(ErrorKind::KeyError, repr(&args[0])));
                }
                return Ok(Value::None);
            }
            "discard" => {
                nargs(name, &args, 1, 1)?;
                s.borrow_mut().remove(&args[0])?;
                return Ok(Value::None);
            }
            "pop" => {
                nargs(name, &args, 0, 0)?;
                let v = s.borrow_mut().pop_first();
                return v.ok_or_else(|| Exc::new(ErrorKind::KeyError, "'pop from an empty set'"));
            }
            "clear" => {
                nargs(name, &args, 0, 0)?;
                s.borrow_mut().clear();
                return Ok(Value::None);
            }
            "copy" => {
                nargs(name, &args, 0, 0)?;
                return Ok(Value::set(cur));
            }
            "issubset" | "issuperset" | "isdisjoint" => {
                let other = single(&others)?;
                let (a, b) = if name == "issuperset" { (&other, &cur) } else { (&cur, &other) };
                let mut all = true;
                let mut none = true;
                for v in a.items() {
                    if b.contains(v)? {
                        none = false;
                    } else {
                        all = false;
                    }
                }
                return Ok(Value::Bool(if name == "isdisjoint" { none } else { all }));
            }
            "union" | "update" => {
                let mut out = cur;
                for o in others {
                    for v in o {
                        out.insert(v)?;
                    }
                }
                too_long(out.len())?;
                out
            }
            "intersection" | "intersection_update" => {
                let mut out = cur;
                for o in others {
                    let o = Set::from_values(o)?;
                    let mut next = Set::new();
                    for v in out.items() {
                        if o.contains(v)? {
                            next.insert(v.clone())?;
                        }
                    }
                    out = next;
                }
                out
            }
            "difference" | "difference_update" => {
                let mut out = cur;
                for o in others {
                    for v in o {
                        out.remove(&v)?;
                    }
                }
                out
            }
            "symmetric_difference" | "symmetric_difference_update" => {
                let o = single(&others)?;
                let mut out = Set::new();
                for v in cur.items() {
                    if !o.contains(v)? {
                        out.insert(v.clone())?;
                    }
                }
                for v in o.items() {
                    if !cur.contains(v)? {
                        out.insert(v.clone())?;
                    }
                }
                out
            }
            _ => return Err(no_attr(recv, name)),
        };
        if name.ends_with("update") {
            *s.borrow_mut() = result;
            Ok(Value::None)
        } else {
            Ok(Value::set(result))
        }
    }

    fn str_method(&mut self, s: Rc<str>, name: &str, args: Vec<Value>, kwargs: Vec<(String, Value)>) -> VResult<Value> {
        let text: &str = &s;
        let out_str = |v: String| Value::Str(Rc::from(v));
        match name {
            "format" => {
                let kwargs: Vec<(String, Value)> = kwargs;
                return Ok(out_str(super::format::str_format(text, &args, &kwargs)?));
            }
            "split" | "rsplit" => {
                nargs(name, &args, 0, 2)?;
                let k = kw(name, kwargs, &["sep", "maxsplit"])?;
                let sep = args.first().cloned().or(k[0].clone()).unwrap_or(Value::None);
                let maxsplit = match args.get(1).or(k[1].as_ref()) {
                    Some(v) => int_arg(v, "")?.as_i64().unwrap_or(-1),
                    None => -1,
                };
                let right = name == "rsplit";
                let parts = match &sep {
                    Value::None => split_whitespace(text, maxsplit, right),
                    Value::Str(sep) if sep.is_empty() => return Err(Exc::value_error("empty separator")),
                    Value::Str(sep) => split_sep(text, sep, maxsplit, right),
                    other => return Err(Exc::type_error(format!("must be str or None, not {}", other.type_name()))),
                };
                return Ok(Value::list(parts));
            }
            "splitlines" => {
                nargs(name, &args, 0, 1)?;
                let k = kw(name, kwargs, &["keepends"])?;
                let keep = args.first().or(k[0].as_ref()).is_some_and(|v| v.truthy());
                return Ok(Value::list(splitlines(text, keep)));
            }
            _ => {}
        }
        kw(name, kwargs, &[])?;
        match name {
            "join" => {
                nargs(name, &args, 1, 1)?;
                let items = self.collect(&args[0])?;
                let mut out = String::new();
                for (i, it) in items.iter().enumerate() {
                    let Value::Str(p) = it else {
                        return Err(Exc::type_error(format!(
                            "sequence item {i}: expected str instance, {} found",
                            it.type_name()
                        )));
                    };
                    if i > 0 {
                        out.push_str(text);
                    }
                    out.push_str(p);
                    too_long(out.len())?;
                }
                Ok(out_str(out))
            }
            "strip" | "lstrip" | "rstrip" => {
                nargs(name, &args, 0, 1)?;
                let chars = match args.first() {
                    None | Some(Value::None) => None,
                    Some(v) => Some(str_arg(v, name)?),
                };
                Ok(out_str(strip_chars(text, chars, name != "rstrip", name != "lstrip")))
            }
            "upper" => {
                nargs(name, &args, 0, 0)?;
                Ok(out_str(text.to_uppercase()))
            }
            "lower" | "casefold" => {
                nargs(name, &args, 0, 0)?;
                Ok(out_str(text.to_lowercase()))
            }
            "title" => {
                nargs(name, &args, 0, 0)?;
                Ok(out_str(title(text)))
            }
            "capitalize" => {
                nargs(name, &args, 0, 0)?;
                let mut cs = text.chars();
                let mut out = String::new();
                if let Some(c) = cs.next() {
                    out.extend(c.to_uppercase());
                    out.push_str(&cs.as_str().to_lowercase());
                }
                Ok(out_str(out))
            }
            "swapcase" => {
                nargs(name, &args, 0, 0)?;
                let mut out = String::new();
                for c in text.chars() {
                    if c.is_uppercase() {
                        out.extend(c.to_lowercase());
                    } else if c.is_lowercase() {
                        out.extend(c.to_uppercase());
                    } else {
                        out.push(c);
                    }
                }
                Ok(out_str(out))
            }
            "replace" => {
                nargs(name, &args, 2, 3)?;
                let old = str_arg(&args[0], name)?;
                let new = str_arg(&args[1], name)?;
                let count = match args.get(2) {
                    Some(v) => int_arg(v, "")?.as_i64().unwrap_or(-1),
                    None => -1,
                };
                let n = if count < 0 { text.matches(old).count() + if old.is_empty() { 1 } else { 0 } } else { count as usize };
                too_long(text.len() + n.saturating_mul(new.len()))?;
                Ok(out_str(if count < 0 { text.replace(old, new) } else { text.replacen(old, new, count as usize) }))
            }
            "startswith" | "endswith" => {
                nargs(name, &args, 1, 3)?;
                let chars = chars_of(text);
                let (a, b) = char_range(chars.len(), args.get(1), args.get(2))?;
                let region: String = if a <= b { chars[a..b].iter().collect() } else { String::new() };
                let pats: Vec<Value> = match &args[0] {
                    Value::Tuple(t) => t.to_vec(),
                    v => alloc::vec![v.clone()],
                };
                if a > chars.len() {
                    return Ok(Value::Bool(false));
                }
                for p in pats {
                    let Value::Str(p) = &p else {
                        return Err(Exc::type_error(format!(
                            "{name} first arg must be str or a tuple of str, not {}",
                            p.type_name()
                        )));
                    };
                    let hit = if name == "startswith" { region.starts_with(&**p) } else { region.ends_with(&**p) };
                    if hit {
                        return Ok(Value::Bool(true));
                    }
                }
                Ok(Value::Bool(false))
            }
            "find" | "rfind" | "index" | "rindex" | "count" => {
                nargs(name, &args, 1, 3)?;
                let sub = str_arg(&args[0], name).map_err(|_| {
                    Exc::type_error(format!("must be str, not {}", args[0].type_name()))
                })?;
                let chars = chars_of(text);
                let (a, b) = char_range(chars.len(), args.get(1), args.get(2))?;
                let needle = chars_of(sub);
                if name == "count" {
                    if a > b || a > chars.len() {
                        return Ok(Value::int(0));
                    }
                    let region = &chars[a..b];
                    if needle.is_empty() {
                        return Ok(Value::int(region.len() as i64 + 1));
                    }
                    let mut n = 0;
                    let mut i = 0;
                    while i + needle.len() <= region.len() {
                        if region[i..i + needle.len()] == needle[..] {
                            n += 1;
                            i += needle.len();
                        } else {
                            i += 1;
                        }
                    }
                    return Ok(Value::int(n));
                }
                let found = if a > b || a > chars.len() {
                    None
                } else {
                    find_in(&chars[a..b], &needle, name.starts_with('r')).map(|i| i + a)
                };
                match found {
                    Some(i) => Ok(Value::int(i as i64)),
                    None if name.ends_with("find") => Ok(Value::int(-1)),
                    None => Err(Exc::value_error("substring not found")),
                }
            }
            "isdigit" | "isdecimal" | "isnumeric" => {
                nargs(name, &args, 0, 0)?;
                let ok = match name {
                    "isnumeric" => |c: char| c.is_numeric(),
                    _ => |c: char| c.is_ascii_digit() || (!c.is_ascii() && c.is_numeric() && c.to_digit(10).is_some()),
                };
                Ok(Value::Bool(!text.is_empty() && text.chars().all(ok)))
            }
            "isalpha" => {
                nargs(name, &args, 0, 0)?;
                Ok(Value::Bool(!text.is_empty() && text.chars().all(char::is_alphabetic)))
            }
            "isalnum" => {
                nargs(name, &args, 0, 0)?;
                Ok(Value::Bool(!text.is_empty() && text.chars().all(char::is_alphanumeric)))
            }
            "isspace" => {
                nargs(name, &args, 0, 0)?;
                Ok(Value::Bool(!text.is_empty() && text.chars().all(py_isspace)))
            }
            "isupper" | "islower" => {
                nargs(name, &args, 0, 0)?;
                let cased: Vec<char> = text.chars().filter(|c| is_cased(*c)).collect();
                let ok = if name == "isupper" {
                    cased.iter().all(|c| !c.is_lowercase())
                } else {
                    cased.iter().all(|c| !c.is_uppercase())
                };
                Ok(Value::Bool(!cased.is_empty() && ok))
            }
            "istitle" => {
                nargs(name, &args, 0, 0)?;
                Ok(Value::Bool(text.chars().any(is_cased) && title(text) == text))
            }
            "zfill" => {
                nargs(name, &args, 1, 1)?;
                let w = int_arg(&args[0], "")?.as_i64().unwrap_or(0).max(0) as usize;
                too_long(w)?;
                let len = str_len(text);
                if w <= len {
                    return Ok(Value::Str(s.clone()));
                }
                let (sign, body) = match text.chars().next() {
                    Some(c @ ('+' | '-')) => (Some(c), &text[1..]),
                    _ => (None, text),
                };
                let mut out = String::new();
                out.extend(sign);
                out.extend(core::iter::repeat_n('0', w - len));
                out.push_str(body);
                Ok(out_str(out))
            }
            "center" | "ljust" | "rjust" => {
                nargs(name, &args, 1, 2)?;
                let w = int_arg(&args[0], "")?.as_i64().unwrap_or(0).max(0) as usize;
                too_long(w)?;
                let fill = fill_char(args.get(1))?;
                let how = match name {
                    "ljust" => '<',
                    "rjust" => '>',
                    _ => '^',
                };
                Ok(out_str(pad_to(text, w, fill, how)))
            }
            "partition" | "rpartition" => {
                nargs(name, &args, 1, 1)?;
                let sep = str_arg(&args[0], name)?;
                if sep.is_empty() {
                    return Err(Exc::value_error("empty separator"));
                }
                let found = if name == "partition" { text.find(sep) } else { text.rfind(sep) };
                let parts = match found {
                    Some(i) => [&text[..i], sep, &text[i + sep.len()..]],
                    None if name == "partition" => [text, "", ""],
                    None => ["", "", text],
                };
                Ok(Value::tuple(parts.iter().map(|p| Value::str(p)).collect()))
            }
            "removeprefix" | "removesuffix" => {
                nargs(name, &args, 1, 1)?;
                let p = str_arg(&args[0], name)?;
                let r = if name == "removeprefix" { text.strip_prefix(p) } else { text.strip_suffix(p) };
                Ok(out_str(r.unwrap_or(text).to_string()))
            }
            _ => Err(no_attr(&Value::Str(s.clone()), name)),
        }
    }
}

fn seq_method(items: &[Value], name: &str, args: &[Value], what: &str) -> VResult<Value> {
    match name {
        "count" => {
            nargs(name, args, 1, 1)?;
            Ok(Value::int(items.iter().filter(|x| eq(x, &args[0])).count() as i64))
        }
        "index" => {
            nargs(name, args, 1, 3)?;
            let (a, b) = char_range(items.len(), args.get(1), args.get(2))?;
            let pos = if a < b { items[a..b].iter().position(|x| eq(x, &args[0])).map(|p| p + a) } else { None };
            match pos {
                Some(p) => Ok(Value::int(p as i64)),
                None if what == "list" => Err(Exc::value_error(format!("{} is not in list", repr(&args[0])))),
                None => Err(Exc::value_error(format!("{what}.index(x): x not in {what}"))),
            }
        }
        _ => Err(Exc::new(ErrorKind::AttributeError, format!("'{what}' object has no attribute '{name}'"))),
    }
}


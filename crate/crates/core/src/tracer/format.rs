//! Format-spec mini-language, `%`-formatting and `str.format`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::error::{Exc, VResult};
use super::render::{repr, to_str};
use super::value::{Dict, Value};
use crate::num::Int;
use crate::pyrepr::float_repr;

#[derive(Clone, Debug, Default)]
struct Spec {
    fill: Option<char>,
    align: Option<char>,
    sign: Option<char>,
    alt: bool,
    zero: bool,
    width: usize,
    grouping: Option<char>,
    precision: Option<usize>,
    ty: Option<char>,
}

fn bad_spec(spec: &str) -> Exc {
    Exc::value_error(format!("Invalid format specifier '{spec}'"))
}

fn parse_spec(spec: &str) -> VResult<Spec> {
    let c: Vec<char> = spec.chars().collect();
    let mut s = Spec::default();
    let mut i = 0;
    let is_align = |ch: char| matches!(ch, '<' | '>' | '^' | '=');
    if c.len() >= 2 && is_align(c[1]) {
        s.fill = Some(c[0]);
        s.align = Some(c[1]);
        i = 2;
    } else if !c.is_empty() && is_align(c[0]) {
        s.align = Some(c[0]);
        i = 1;
    }
    if i < c.len() && matches!(c[i], '+' | '-' | ' ') {
        s.sign = Some(c[i]);
        i += 1;
    }
    if i < c.len() && c[i] == '#' {
        s.alt = true;
        i += 1;
    }
    if i < c.len() && c[i] == '0' {
        s.zero = true;
        i += 1;
    }
    let start = i;
    while i < c.len() && c[i].is_ascii_digit() {
        i += 1;
    }
    if i > start {
        s.width = c[start..i].iter().collect::<String>().parse().map_err(|_| bad_spec(spec))?;
    }
    if i < c.len() && matches!(c[i], ',' | '_') {
        s.grouping = Some(c[i]);
        i += 1;
    }
    if i < c.len() && c[i] == '.' {
        i += 1;
        let start = i;
        while i < c.len() && c[i].is_ascii_digit() {
            i += 1;
        }
        if i == start {
            return Err(Exc::value_error("Format specifier missing precision"));
        }
        s.precision = Some(c[start..i].iter().collect::<String>().parse().map_err(|_| bad_spec(spec))?);
    }
    if i < c.len() {
        s.ty = Some(c[i]);
        i += 1;
    }
    if i != c.len() {
        return Err(bad_spec(spec));
    }
    Ok(s)
}

fn group_digits(digits: &str, sep: char, every: usize) -> String {
    let n = digits.len();
    let mut out = String::with_capacity(n + n / every);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (n - i) % every == 0 {
            out.push(sep);
        }
        out.push(ch);
    }
    out
}

/// Pads `body` (already signed) per width/fill/align. `sign_len` is the
/// length of the sign and prefix that `=` alignment keeps in front.
fn pad(s: &Spec, body: String, sign_len: usize, numeric: bool) -> String {
    let len = body.chars().count();
    if len >= s.width {
        return body;
    }
    let (fill, align) = if s.zero && s.align.is_none() && numeric {
        ('0', '=')
    } else {
        (s.fill.unwrap_or(if s.zero && numeric { '0' } else { ' ' }), s.align.unwrap_or(if numeric { '>' } else { '<' }))
    };
    let n = s.width - len;
    let fills = |k: usize| core::iter::repeat_n(fill, k).collect::<String>();
    match align {
        '<' => body + &fills(n),
        '^' => fills(n / 2) + &body + &fills(n - n / 2),
        '=' => {
            let (head, tail) = body.split_at(sign_len);
            String::from(head) + &fills(n) + tail
        }
        _ => fills(n) + &body,
    }
}

fn sign_prefix(s: &Spec, negative: bool) -> &'static str {
    if negative {
        "-"
    } else {
        match s.sign {
            Some('+') => "+",
            Some(' ') => " ",
            _ => "",
        }
    }
}

fn fmt_int(i: &Int, s: &Spec, spec: &str) -> VResult<String> {
    if s.precision.is_some() {
        return Err(Exc::value_error("Precision not allowed in integer format specifier"));
    }
    let (digits, prefix) = match s.ty {
        None | Some('d') | Some('n') => (i.magnitude_radix(10), ""),
        Some('b') => (i.magnitude_radix(2), "0b"),
        Some('o') => (i.magnitude_radix(8), "0o"),
        Some('x') => (i.magnitude_radix(16), "0x"),
        Some('X') => (i.magnitude_radix(16).to_uppercase(), "0X"),
        Some('c') => {
            let ch = i.as_i64().and_then(|v| u32::try_from(v).ok()).and_then(char::from_u32);
            let ch = ch.ok_or_else(|| Exc::new(super::ErrorKind::OverflowError, "%c arg not in range(0x110000)"))?;
            return Ok(pad(s, ch.to_string(), 0, false));
        }
        Some(_) => return Err(Exc::value_error(format!("Unknown format code '{}' for object of type 'int'", s.ty.unwrap_or(' ')))),
    };
    let _ = spec;
    let digits = match s.grouping {
        Some(g) if matches!(s.ty, None | Some('d')) => group_digits(&digits, g, 3),
        Some('_') => group_digits(&digits, '_', 4),
        Some(_) => return Err(Exc::value_error("Cannot specify ',' with this format code")),
        None => digits,
    };
    let head = String::from(sign_prefix(s, i.is_negative())) + if s.alt { prefix } else { "" };
    let n = head.len();
    Ok(pad(s, head + &digits, n, true))
}

/// Exponent form with at least two exponent digits: `1.5e+03`.
fn sci(x: f64, prec: usize, upper: bool) -> String {
    let r = format!("{:.*e}", prec, x);
    let (mant, exp) = r.split_once('e').unwrap_or((&r, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    let e = if upper { 'E' } else { 'e' };
    format!("{mant}{e}{}{:02}", if exp < 0 { '-' } else { '+' }, exp.unsigned_abs())
}

fn strip_trailing_zeros(s: &str) -> String {
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], &s[p..]),
        None => (s, ""),
    };
    let mant = if mant.contains('.') { mant.trim_end_matches('0').trim_end_matches('.') } else { mant };
    format!("{mant}{exp}")
}

/// `%g`-style: fixed or exponent depending on the decimal exponent.
fn general(x: f64, prec: usize, alt: bool, upper: bool) -> String {
    let p = prec.max(1);
    if x == 0.0 {
        let base = if alt { format!("{:.*}", p - 1, 0.0) } else { "0".to_string() };
        return base;
    }
    let e_form = format!("{:.*e}", p - 1, x);
    let exp: i32 = e_form.split_once('e').map(|(_, e)| e.parse().unwrap_or(0)).unwrap_or(0);
    let out = if exp >= -4 && exp < p as i32 {
        format!("{:.*}", (p as i32 - 1 - exp).max(0) as usize, x)
    } else {
        sci(x, p - 1, upper)
    };
    if alt {
        out
    } else {
        strip_trailing_zeros(&out)
    }
}

fn fmt_float(x: f64, s: &Spec) -> VResult<String> {
    let neg = x.is_sign_negative() && !x.is_nan();
    let a = libm::fabs(x);
    let upper = matches!(s.ty, Some('F' | 'E' | 'G'));
    let body = if a.is_infinite() || a.is_nan() {
        let t = if a.is_nan() { "nan" } else { "inf" };
        if upper { t.to_uppercase() } else { t.to_string() }
    } else {
        match s.ty {
            Some('f') | Some('F') => format!("{:.*}", s.precision.unwrap_or(6), a),
            Some('e') | Some('E') => sci(a, s.precision.unwrap_or(6), upper),
            Some('g') | Some('G') | Some('n') => general(a, s.precision.unwrap_or(6), s.alt, upper),
            Some('%') => format!("{:.*}%", s.precision.unwrap_or(6), a * 100.0),
            None => match s.precision {
                None => float_repr(a),
                Some(p) => {
                    let g = general(a, p, s.alt, false);
                    if g.contains(['.', 'e', 'n', 'i']) { g } else { g + ".0" }
                }
            },
            Some(t) => return Err(Exc::value_error(format!("Unknown format code '{t}' for object of type 'float'"))),
        }
    };
    let body = match s.grouping {
        Some(g) if !a.is_infinite() && !a.is_nan() => {
            let split = body.find(|c: char| !c.is_ascii_digit()).unwrap_or(body.len());
            group_digits(&body[..split], g, 3) + &body[split..]
        }
        _ => body,
    };
    let head = sign_prefix(s, neg);
    Ok(pad(s, String::from(head) + &body, head.len(), true))
}

/// `format(v, spec)`.
pub fn format_value(v: &Value, spec: &str) -> VResult<String> {
    if spec.is_empty() {
        return Ok(to_str(v));
    }
    let s = parse_spec(spec)?;
    match v {
        Value::Bool(b) if s.ty.is_none() => Ok(pad(&s, if *b { "True" } else { "False" }.into(), 0, false)),
        Value::Bool(_) | Value::Int(_) => {
            let i = v.as_int().unwrap_or_else(Int::zero);
            match s.ty {
                Some('e' | 'E' | 'f' | 'F' | 'g' | 'G' | '%') => {
                    let f = i.to_f64().ok_or_else(|| Exc::new(super::ErrorKind::OverflowError, "int too large to convert to float"))?;
                    fmt_float(f, &s)
                }
                _ => fmt_int(&i, &s, spec),
            }
        }
        Value::Float(f) => fmt_float(*f, &s),
        Value::Str(text) => {
            if !matches!(s.ty, None | Some('s')) {
                return Err(Exc::value_error(format!(
                    "Unknown format code '{}' for object of type 'str'",
                    s.ty.unwrap_or(' ')
                )));
            }
            if s.sign.is_some() {
                return Err(Exc::value_error("Sign not allowed in string format specifier"));
            }
            let body: String = match s.precision {
                Some(p) => text.chars().take(p).collect(),
                None => text.to_string(),
            };
            Ok(pad(&s, body, 0, false))
        }
        other => Err(Exc::type_error(format!(
            "unsupported format string passed to {}.__format__",
            other.type_name()
        ))),
    }
}

pub fn convert(v: &Value, conversion: Option<char>) -> Value {
    match conversion {
        Some('r') | Some('a') => Value::str(&repr(v)),
        Some('s') => Value::str(&to_str(v)),
        _ => v.clone(),
    }
}

/// `fmt % args`.
pub fn percent_format(fmt: &str, args: &Value) -> VResult<String> {
    let items: Vec<Value> = match args {
        Value::Tuple(t) => t.to_vec(),
        other => alloc::vec![other.clone()],
    };
    let mapping: Option<Dict> = match args {
        Value::Dict(d) => Some(d.borrow().clone()),
        _ => None,
    };
    let c: Vec<char> = fmt.chars().collect();
    let mut out = String::new();
    let mut next = 0usize;
    let mut i = 0;
    while i < c.len() {
        if c[i] != '%' {
            out.push(c[i]);
            i += 1;
            continue;
        }
        i += 1;
        let mut key: Option<String> = None;
        if i < c.len() && c[i] == '(' {
            let end = c[i..].iter().position(|ch| *ch == ')').map(|p| p + i).ok_or_else(|| Exc::value_error("incomplete format key"))?;
            key = Some(c[i + 1..end].iter().collect());
            i = end + 1;
        }
        let mut flags = String::new();
        while i < c.len() && matches!(c[i], '-' | '+' | ' ' | '0' | '#') {
            flags.push(c[i]);
            i += 1;
        }
        let mut width = String::new();
        while i < c.len() && c[i].is_ascii_digit() {
            width.push(c[i]);
            i += 1;
        }
        let mut precision: Option<String> = None;
        if i < c.len() && c[i] == '.' {
            i += 1;
            let mut p = String::new();
            while i < c.len() && c[i].is_ascii_digit() {
                p.push(c[i]);
                i += 1;
            }
            precision = Some(if p.is_empty() { "0".into() } else { p });
        }
        let Some(&ty) = c.get(i) else { return Err(Exc::value_error("incomplete format")) };
        i += 1;
        if ty == '%' {
            out.push('%');
            continue;
        }
        let arg = match (&key, &mapping) {
            (Some(k), Some(m)) => m
                .get(&Value::str(k))?
                .cloned()
                .ok_or_else(|| Exc::new(super::ErrorKind::KeyError, repr(&Value::str(k))))?,
            (Some(_), None) => return Err(Exc::type_error("format requires a mapping")),
            (None, _) => {
                let a = items.get(next).cloned().ok_or_else(|| Exc::type_error("not enough arguments for format string"))?;
                next += 1;
                a
            }
        };
        let mut spec = String::new();
        if flags.contains('-') {
            spec.push('<');
        } else if !matches!(ty, 's' | 'r' | 'a' | 'c') {
            spec.push('>');
        }
        if flags.contains('+') {
            spec.push('+');
        } else if flags.contains(' ') {
            spec.push(' ');
        }
        if flags.contains('#') {
            spec.push('#');
        }
        let zero = flags.contains('0') && !flags.contains('-') && !matches!(ty, 's' | 'r' | 'a' | 'c');
        if zero {
            spec.clear();
            if flags.contains('+') {
                spec.push('+');
            } else if flags.contains(' ') {
                spec.push(' ');
            }
            if flags.contains('#') {
                spec.push('#');
            }
            spec.push('0');
        }
        spec.push_str(&width);
        let piece = match ty {
            's' | 'r' | 'a' => {
                let text = if ty == 's' { to_str(&arg) } else { repr(&arg) };
                let text: String = match &precision {
                    Some(p) => text.chars().take(p.parse().unwrap_or(0)).collect(),
                    None => text,
                };
                format_value(&Value::str(&text), &spec)?
            }
            'd' | 'i' | 'u' => {
                let i = match &arg {
                    Value::Float(f) => Int::from_f64_trunc(*f).ok_or_else(|| Exc::new(super::ErrorKind::OverflowError, "cannot convert float"))?,
                    other => other.as_int().ok_or_else(|| {
                        Exc::type_error(format!("%{ty} format: a real number is required, not {}", other.type_name()))
                    })?,
                };
                format_value(&Value::Int(i), &spec)?
            }
            'x' | 'X' | 'o' => {
                let i = arg.as_int().ok_or_else(|| {
                    Exc::type_error(format!("%{ty} format: an integer is required, not {}", arg.type_name()))
                })?;
                spec.push(ty);
                format_value(&Value::Int(i), &spec)?
            }
            'f' | 'F' | 'e' | 'E' | 'g' | 'G' => {
                let f = arg.as_f64().ok_or_else(|| Exc::type_error(format!("must be real number, not {}", arg.type_name())))?;
                spec.push('.');
                spec.push_str(precision.as_deref().unwrap_or("6"));
                spec.push(ty);
                format_value(&Value::Float(f), &spec)?
            }
            'c' => match &arg {
                Value::Str(s) if s.chars().count() == 1 => format_value(&arg, &spec)?,
                other => {
                    let i = other.as_int().ok_or_else(|| Exc::type_error("%c requires int or char"))?;
                    let ch = i.as_i64().and_then(|v| u32::try_from(v).ok()).and_then(char::from_u32);
                    let ch = ch.ok_or_else(|| Exc::new(super::ErrorKind::OverflowError, "%c arg not in range(0x110000)"))?;
                    format_value(&Value::str(&ch.to_string()), &spec)?
                }
            },
            other => {
                return Err(Exc::value_error(format!(
                    "unsupported format character '{other}' (0x{:x}) at index {}",
                    other as u32,
                    i - 1
                )))
            }
        };
        out.push_str(&piece);
    }
    if mapping.is_none() && next < items.len() {
        return Err(Exc::type_error("not all arguments converted during string formatting"));
    }
    Ok(out)
}

/// `template.format(*args, **kwargs)` with plain positional/keyword fields.
pub fn str_format(template: &str, args: &[Value], kwargs: &[(String, Value)]) -> VResult<String> {
    let c: Vec<char> = template.chars().collect();
    let mut out = String::new();
    let mut auto = 0usize;
    let mut i = 0;
    while i < c.len() {
        match c[i] {
            '{' if c.get(i + 1) == Some(&'{') => {
                out.push('{');
                i += 2;
            }
            '}' if c.get(i + 1) == Some(&'}') => {
                out.push('}');
                i += 2;
            }
            '}' => return Err(Exc::value_error("Single '}' encountered in format string")),
            '{' => {
                let end = c[i..].iter().position(|ch| *ch == '}').map(|p| p + i).ok_or_else(|| {
                    Exc::value_error("expected '}' before end of string")
                })?;
                let field: String = c[i + 1..end].iter().collect();
                i = end + 1;
                let (head, spec) = match field.split_once(':') {
                    Some((h, s)) => (h, s),
                    None => (field.as_str(), ""),
                };
                let (name, conv) = match head.split_once('!') {
                    Some((n, cv)) => (n, cv.chars().next()),
                    None => (head, None),
                };
                let v = if name.is_empty() {
                    let v = args.get(auto).cloned().ok_or_else(|| {
                        Exc::new(super::ErrorKind::IndexError, format!("Replacement index {auto} out of range for positional args tuple"))
                    })?;
                    auto += 1;
                    v
                } else if let Ok(n) = name.parse::<usize>() {
                    args.get(n).cloned().ok_or_else(|| {
                        Exc::new(super::ErrorKind::IndexError, format!("Replacement index {n} out of range for positional args tuple"))
                    })?
                } else if name.chars().all(|ch| ch.is_alphanumeric() || ch == '_') {
                    kwargs
                        .iter()
                        .find(|(k, _)| k == name)
                        .map(|(_, v)| v.clone())
                        .ok_or_else(|| Exc::new(super::ErrorKind::KeyError, format!("'{name}'")))?
                } else {
                    return Err(Exc::new(super::ErrorKind::UnsupportedConstruct, "compound format field"));
                };
                out.push_str(&format_value(&convert(&v, conv), spec)?);
            }
            ch => {
                out.push(ch);
                i += 1;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(v: Value, spec: &str) -> String {
        format_value(&v, spec).unwrap()
    }

    #[test]
    fn specs() {
        assert_eq!(f(Value::Float(3.14159), ".2f"), "3.14");
        assert_eq!(f(Value::Float(2.5), ".0f"), "2");
        assert_eq!(f(Value::int(42), ">5"), "   42");
        assert_eq!(f(Value::int(42), "05"), "00042");
        assert_eq!(f(Value::int(-42), "05"), "-0042");
        assert_eq!(f(Value::int(1234567), ","), "1,234,567");
        assert_eq!(f(Value::int(255), "#x"), "0xff");
        assert_eq!(f(Value::int(5), "b"), "101");
        assert_eq!(f(Value::str("ab"), "^6"), "  ab  ");
        assert_eq!(f(Value::str("ab"), "*<4"), "ab**");
        assert_eq!(f(Value::Float(1234.5), "e"), "1.234500e+03");
        assert_eq!(f(Value::Float(0.00001234), "g"), "1.234e-05");
        assert_eq!(f(Value::Float(1234.5), "g"), "1234.5");
        assert_eq!(f(Value::Float(0.5), "%"), "50.000000%");
        assert_eq!(f(Value::Float(0.256), ".1%"), "25.6%");
        assert_eq!(f(Value::Float(1.0), ".3"), "1.0");
        assert_eq!(f(Value::Float(1.0), ""), "1.0");
        assert_eq!(f(Value::int(7), ".2f"), "7.00");
        assert_eq!(f(Value::Float(-0.5), "+.1f"), "-0.5");
        assert_eq!(f(Value::Float(3.0), "+.1f"), "+3.0");
    }

    #[test]
    fn percent() {
        let args = Value::tuple(alloc::vec![Value::str("x"), Value::int(3), Value::Float(2.0)]);
        assert_eq!(percent_format("%s=%d (%.1f)", &args).unwrap(), "x=3 (2.0)");
        assert_eq!(percent_format("%5.2f|%-4d|%03d%%", &Value::tuple(alloc::vec![Value::Float(3.14159), Value::int(7), Value::int(5)])).unwrap(), " 3.14|7   |005%");
        assert!(percent_format("%d %d", &Value::int(1)).is_err());
    }

    #[test]
    fn format_method() {
        let out = str_format("{} + {} = {:.1f} {{ok}} {0!r}", &[Value::str("a"), Value::int(2), Value::Float(3.0)], &[]).unwrap();
        assert_eq!(out, "a + 2 = 3.0 {ok} 'a'");
    }
}

//! Recursive-descent parser producing [`SyntaxTree`]s.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::*;
use super::lexer::{decode_escapes, tokenize, TokKind, Token};
use super::ParseError;

type PResult<T> = Result<T, ParseError>;

const KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import", "in",
    "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while", "with",
    "yield",
];

pub fn parse_source(text: &str) -> PResult<SyntaxTree> {
    let lexed = tokenize(text)?;
    let mut p = Parser { toks: lexed.tokens, pos: 0, next_id: 0, line_offset: 0 };
    let body = p.module()?;
    let line_count = super::source::count_lines(text);
    Ok(SyntaxTree { body, line_count, comments: lexed.comments, source_id: String::new() })
}

/// Parses a standalone expression (used for f-string fields and literals).
pub fn parse_expression(text: &str, line_offset: u32) -> PResult<Expr> {
    let lexed = tokenize(text)?;
    let mut p = Parser { toks: lexed.tokens, pos: 0, next_id: 0, line_offset };
    while p.eat_kind(&TokKind::Newline) {}
    let e = p.test_list()?;
    while p.eat_kind(&TokKind::Newline) {}
    if !p.at_kind(&TokKind::Eof) {
        return Err(p.error("unexpected trailing tokens"));
    }
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    next_id: StmtId,
    line_offset: u32,
}

fn unsupported(line: u32, construct: &str) -> ParseError {
    ParseError::Unsupported { line, construct: construct.to_string() }
}

impl Parser {
    fn tok(&self) -> &Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn line(&self) -> u32 {
        self.tok().line + self.line_offset
    }

    fn span(&self) -> Span {
        let t = self.tok();
        Span::new(t.line + self.line_offset, t.col)
    }

    fn advance(&mut self) -> Token {
        let t = self.tok().clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: &str) -> ParseError {
        let found = match &self.tok().kind {
            TokKind::Name(n) => format!("'{n}'"),
            TokKind::Op(o) => format!("'{o}'"),
            TokKind::Newline => "end of line".to_string(),
            TokKind::Indent => "indent".to_string(),
            TokKind::Dedent => "dedent".to_string(),
            TokKind::Eof => "end of input".to_string(),
            _ => "literal".to_string(),
        };
        ParseError::Syntax { line: self.line(), message: format!("{msg} (found {found})") }
    }

    fn at_kind(&self, k: &TokKind) -> bool {
        &self.tok().kind == k
    }

    fn eat_kind(&mut self, k: &TokKind) -> bool {
        if self.at_kind(k) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn at_op(&self, op: &str) -> bool {
        matches!(&self.tok().kind, TokKind::Op(o) if *o == op)
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.at_op(op) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &str) -> PResult<()> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{op}'")))
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(&self.tok().kind, TokKind::Name(n) if n == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{kw}'")))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match &self.tok().kind {
            TokKind::Name(n) if !KEYWORDS.contains(&n.as_str()) => {
                let n = n.clone();
                self.advance();
                Ok(n)
            }
            _ => Err(self.error("expected identifier")),
        }
    }

    fn new_id(&mut self) -> StmtId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    // ---- statements ----

    fn module(&mut self) -> PResult<Vec<Stmt>> {
        let mut body = Vec::new();
        loop {
            if self.eat_kind(&TokKind::Newline) {
                continue;
            }
            if self.at_kind(&TokKind::Eof) {
                break;
            }
            if self.at_kind(&TokKind::Indent) {
                return Err(ParseError::Syntax { line: self.line(), message: "unexpected indent".to_string() });
            }
            body.extend(self.statement()?);
        }
        Ok(body)
    }

    fn statement(&mut self) -> PResult<Vec<Stmt>> {
        let line = self.line();
        if let TokKind::Name(n) = &self.tok().kind {
            match n.as_str() {
                "def" => return Ok(alloc::vec![self.funcdef()?]),
                "if" => return Ok(alloc::vec![self.if_stmt(false)?]),
                "for" => return Ok(alloc::vec![self.for_stmt()?]),
                "while" => return Ok(alloc::vec![self.while_stmt()?]),
                "class" => return Err(unsupported(line, "class definition")),
                "try" => return Err(unsupported(line, "exception handler")),
                "with" => return Err(unsupported(line, "resource-manager block")),
                "async" => return Err(unsupported(line, "async")),
                "else" | "elif" | "except" | "finally" => return Err(self.error("invalid syntax")),
                _ => {}
            }
        }
        if self.at_op("@") {
            return Err(unsupported(line, "decorator"));
        }
        self.simple_stmts()
    }

    fn simple_stmts(&mut self) -> PResult<Vec<Stmt>> {
        let mut out = alloc::vec![self.simple_stmt()?];
        while self.eat_op(";") {
            if self.at_kind(&TokKind::Newline) {
                break;
            }
            out.push(self.simple_stmt()?);
        }
        if !self.eat_kind(&TokKind::Newline) && !self.at_kind(&TokKind::Eof) {
            return Err(self.error("invalid syntax"));
        }
        Ok(out)
    }

    fn stmt(&mut self, id: StmtId, span: Span, kind: StmtKind) -> Stmt {
        Stmt { id, span, kind }
    }

    fn simple_stmt(&mut self) -> PResult<Stmt> {
        let span = self.span();
        let line = span.line;
        let id = self.new_id();
        if let TokKind::Name(n) = &self.tok().kind {
            match n.as_str() {
                "pass" => {
                    self.advance();
                    return Ok(self.stmt(id, span, StmtKind::Pass));
                }
                "break" => {
                    self.advance();
                    return Ok(self.stmt(id, span, StmtKind::Break));
                }
                "continue" => {
                    self.advance();
                    return Ok(self.stmt(id, span, StmtKind::Continue));
                }
                "return" => {
                    self.advance();
                    let value = if self.at_kind(&TokKind::Newline) || self.at_op(";") || self.at_kind(&TokKind::Eof) {
                        None
                    } else {
                        Some(self.test_list()?)
                    };
                    return Ok(self.stmt(id, span, StmtKind::Return(value)));
                }
                "assert" => {
                    self.advance();
                    let test = self.test()?;
                    let msg = if self.eat_op(",") { Some(self.test()?) } else { None };
                    return Ok(self.stmt(id, span, StmtKind::Assert { test, msg }));
                }
                "from" => {
                    self.advance();
                    let mut module = self.ident()?;
                    while self.eat_op(".") {
                        module.push('.');
                        module.push_str(&self.ident()?);
                    }
                    if module != "typing" {
                        return Err(unsupported(line, &format!("import of '{module}'")));
                    }
                    self.expect_kw("import")?;
                    let paren = self.eat_op("(");
                    let mut names = Vec::new();
                    loop {
                        if self.eat_op("*") {
                            return Err(unsupported(line, "wildcard import"));
                        }
                        let name = self.ident()?;
                        let alias = if self.eat_kw("as") { Some(self.ident()?) } else { None };
                        names.push((name, alias));
                        if !self.eat_op(",") {
                            break;
                        }
                        if paren && self.at_op(")") {
                            break;
                        }
                    }
                    if paren {
                        self.expect_op(")")?;
                    }
                    return Ok(self.stmt(id, span, StmtKind::TypingImport { names }));
                }
                "import" => {
                    self.advance();
                    let module = self.ident().unwrap_or_default();
                    return Err(unsupported(line, &format!("import of '{module}'")));
                }
                "del" => return Err(unsupported(line, "del statement")),
                "global" | "nonlocal" => return Err(unsupported(line, "global declaration")),
                "raise" => return Err(unsupported(line, "raise statement")),
                "yield" => return Err(unsupported(line, "generator")),
                _ => {}
            }
        }
        let first = self.test_list_star()?;
        if self.at_op(":") {
            // annotated assignment
            self.advance();
            if !matches!(first.kind, ExprKind::Name(_)) {
                return Err(unsupported(line, "annotated assignment to non-name"));
            }
            let annotation = self.test()?;
            if !self.eat_op("=") {
                return Err(unsupported(line, "bare annotation"));
            }
            let value = self.test_list()?;
            return Ok(self.stmt(id, span, StmtKind::Assign { targets: alloc::vec![first], annotation: Some(annotation), value }));
        }
        if let TokKind::Op(op) = self.tok().kind.clone() {
            let aug = match op {
                "+=" => Some(BinOpKind::Add),
                "-=" => Some(BinOpKind::Sub),
                "*=" => Some(BinOpKind::Mul),
                "/=" => Some(BinOpKind::Div),
                "//=" => Some(BinOpKind::FloorDiv),
                "%=" => Some(BinOpKind::Mod),
                "**=" => Some(BinOpKind::Pow),
                "&=" => Some(BinOpKind::BitAnd),
                "|=" => Some(BinOpKind::BitOr),
                "^=" => Some(BinOpKind::BitXor),
                "<<=" => Some(BinOpKind::LShift),
                ">>=" => Some(BinOpKind::RShift),
                _ => None,
            };
            if let Some(op) = aug {
                self.advance();
                check_target(&first, false)?;
                let value = self.test_list()?;
                return Ok(self.stmt(id, span, StmtKind::AugAssign { target: first, op, value }));
            }
        }
        if self.at_op("=") {
            let mut items = alloc::vec![first];
            while self.eat_op("=") {
                items.push(self.test_list_star()?);
            }
            let value = items.pop().unwrap_or_else(|| unreachable_expr(span));
            for t in &items {
                check_target(t, true)?;
            }
            return Ok(self.stmt(id, span, StmtKind::Assign { targets: items, annotation: None, value }));
        }
        Ok(self.stmt(id, span, StmtKind::Expr(first)))
    }

    fn suite(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_op(":")?;
        if self.eat_kind(&TokKind::Newline) {
            if !self.eat_kind(&TokKind::Indent) {
                return Err(ParseError::Syntax { line: self.line(), message: "expected an indented block".to_string() });
            }
            let mut body = Vec::new();
            while !self.eat_kind(&TokKind::Dedent) {
                if self.at_kind(&TokKind::Eof) {
                    break;
                }
                if self.eat_kind(&TokKind::Newline) {
                    continue;
                }
                body.extend(self.statement()?);
            }
            Ok(body)
        } else {
            self.simple_stmts()
        }
    }

    fn funcdef(&mut self) -> PResult<Stmt> {
        let span = self.span();
        let id = self.new_id();
        self.expect_kw("def")?;
        let name = self.ident()?;
        self.expect_op("(")?;
        let mut params: Vec<Param> = Vec::new();
        while !self.at_op(")") {
            if self.at_op("*") || self.at_op("**") || self.at_op("/") {
                return Err(unsupported(span.line, "variadic or positional-only parameters"));
            }
            let pname = self.ident()?;
            let annotation = if self.eat_op(":") { Some(self.test()?) } else { None };
            let default = if self.eat_op("=") { Some(self.test()?) } else { None };
            if default.is_none() && params.iter().any(|p| p.default.is_some()) {
                return Err(ParseError::Syntax { line: span.line, message: "non-default argument follows default argument".to_string() });
            }
            if params.iter().any(|p| p.name == pname) {
                return Err(ParseError::Syntax { line: span.line, message: format!("duplicate argument '{pname}'") });
            }
            params.push(Param { name: pname, annotation, default });
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_op(")")?;
        let returns = if self.eat_op("->") { Some(self.test()?) } else { None };
        let mut body = self.suite()?;
        let mut docstring = None;
        if let Some(first) = body.first() {
            if let StmtKind::Expr(Expr { kind: ExprKind::Literal(Literal::Str(s)), .. }) = &first.kind {
                docstring = Some(s.clone());
                body.remove(0);
            }
        }
        Ok(Stmt { id, span, kind: StmtKind::FunctionDef(FunctionDef { name, params, returns, docstring, body }) })
    }

    fn if_stmt(&mut self, is_elif: bool) -> PResult<Stmt> {
        let span = self.span();
        let id = self.new_id();
        self.advance(); // `if` or `elif`
        let test = self.named_test()?;
        let body = self.suite()?;
        let orelse = if self.at_kw("elif") {
            alloc::vec![self.if_stmt(true)?]
        } else if self.eat_kw("else") {
            self.suite()?
        } else {
            Vec::new()
        };
        Ok(Stmt { id, span, kind: StmtKind::If { test, body, orelse, is_elif } })
    }

    fn for_stmt(&mut self) -> PResult<Stmt> {
        let span = self.span();
        let id = self.new_id();
        self.expect_kw("for")?;
        let target = self.target_list()?;
        check_target(&target, true)?;
        self.expect_kw("in")?;
        let iter = self.test_list()?;
        let body = self.suite()?;
        if self.at_kw("else") {
            return Err(unsupported(self.line(), "for-else"));
        }
        Ok(Stmt { id, span, kind: StmtKind::For { target, iter, body } })
    }

    fn while_stmt(&mut self) -> PResult<Stmt> {
        let span = self.span();
        let id = self.new_id();
        self.expect_kw("while")?;
        let test = self.named_test()?;
        let body = self.suite()?;
        if self.at_kw("else") {
            return Err(unsupported(self.line(), "while-else"));
        }
        Ok(Stmt { id, span, kind: StmtKind::While { test, body } })
    }

    fn named_test(&mut self) -> PResult<Expr> {
        self.test()
    }

    // ---- expressions ----

    fn test_list_star(&mut self) -> PResult<Expr> {
        if self.at_op("*") {
            return Err(unsupported(self.line(), "starred expression"));
        }
        self.test_list()
    }

    /// `a, b, c` without brackets becomes a tuple.
    fn test_list(&mut self) -> PResult<Expr> {
        let span = self.span();
        let first = self.test()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = alloc::vec![first];
        while self.eat_op(",") {
            if self.at_expr_end() {
                break;
            }
            items.push(self.test()?);
        }
        Ok(Expr::new(span, ExprKind::Tuple(items)))
    }

    fn at_expr_end(&self) -> bool {
        match &self.tok().kind {
            TokKind::Newline | TokKind::Eof => true,
            TokKind::Op(o) => matches!(*o, "=" | ")" | "]" | "}" | ":" | ";"),
            TokKind::Name(n) => n == "in",
            _ => false,
        }
    }

    fn target_list(&mut self) -> PResult<Expr> {
        let span = self.span();
        let first = self.bitor()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = alloc::vec![first];
        while self.eat_op(",") {
            if self.at_kw("in") || self.at_op("=") {
                break;
            }
            items.push(self.bitor()?);
        }
        Ok(Expr::new(span, ExprKind::Tuple(items)))
    }

    fn test(&mut self) -> PResult<Expr> {
        if self.at_kw("lambda") {
            return self.lambda();
        }
        let span = self.span();
        let body = self.or_test()?;
        if self.at_kw("if") {
            self.advance();
            let test = self.or_test()?;
            self.expect_kw("else")?;
            let orelse = self.test()?;
            return Ok(Expr::new(
                span,
                ExprKind::IfExp { test: Box::new(test), body: Box::new(body), orelse: Box::new(orelse) },
            ));
        }
        Ok(body)
    }

    fn test_nocond(&mut self) -> PResult<Expr> {
        if self.at_kw("lambda") {
            return self.lambda();
        }
        self.or_test()
    }

    fn lambda(&mut self) -> PResult<Expr> {
        let span = self.span();
        self.expect_kw("lambda")?;
        let mut params = Vec::new();
        while !self.at_op(":") {
            if self.at_op("*") || self.at_op("**") {
                return Err(unsupported(span.line, "variadic lambda parameters"));
            }
            params.push(self.ident()?);
            if self.at_op("=") {
                return Err(unsupported(span.line, "lambda default parameters"));
            }
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_op(":")?;
        let body = self.test()?;
        Ok(Expr::new(span, ExprKind::Lambda { params, body: Box::new(body) }))
    }

    fn or_test(&mut self) -> PResult<Expr> {
        let span = self.span();
        let first = self.and_test()?;
        if !self.at_kw("or") {
            return Ok(first);
        }
        let mut values = alloc::vec![first];
        while self.eat_kw("or") {
            values.push(self.and_test()?);
        }
        Ok(Expr::new(span, ExprKind::BoolOp { op: BoolOpKind::Or, values }))
    }

    fn and_test(&mut self) -> PResult<Expr> {
        let span = self.span();
        let first = self.not_test()?;
        if !self.at_kw("and") {
            return Ok(first);
        }
        let mut values = alloc::vec![first];
        while self.eat_kw("and") {
            values.push(self.not_test()?);
        }
        Ok(Expr::new(span, ExprKind::BoolOp { op: BoolOpKind::And, values }))
    }

    fn not_test(&mut self) -> PResult<Expr> {
        let span = self.span();
        if self.eat_kw("not") {
            let operand = self.not_test()?;
            return Ok(Expr::new(span, ExprKind::UnaryOp { op: UnaryOpKind::Not, operand: Box::new(operand) }));
        }
        self.comparison()
    }

    fn comp_op(&mut self) -> Option<CmpOp> {
        let op = match &self.tok().kind {
            TokKind::Op("<") => CmpOp::Lt,
            TokKind::Op("<=") => CmpOp::LtE,
            TokKind::Op(">") => CmpOp::Gt,
            TokKind::Op(">=") => CmpOp::GtE,
            TokKind::Op("==") => CmpOp::Eq,
            TokKind::Op("!=") => CmpOp::NotEq,
            TokKind::Name(n) if n == "in" => CmpOp::In,
            TokKind::Name(n) if n == "is" => {
                self.advance();
                if self.eat_kw("not") {
                    return Some(CmpOp::IsNot);
                }
                return Some(CmpOp::Is);
            }
            TokKind::Name(n) if n == "not" => {
                let next = self.toks.get(self.pos + 1).map(|t| &t.kind);
                if matches!(next, Some(TokKind::Name(m)) if m == "in") {
                    self.advance();
                    self.advance();
                    return Some(CmpOp::NotIn);
                }
                return None;
            }
            _ => return None,
        };
        self.advance();
        Some(op)
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let span = self.span();
        let left = self.bitor()?;
        let mut ops = Vec::new();
        while let Some(op) = self.comp_op() {
            ops.push((op, self.bitor()?));
        }
        if ops.is_empty() {
            return Ok(left);
        }
        Ok(Expr::new(span, ExprKind::Compare { left: Box::new(left), ops }))
    }

    fn binary(&mut self, next: fn(&mut Self) -> PResult<Expr>, ops: &[(&str, BinOpKind)]) -> PResult<Expr> {
        let span = self.span();
        let mut left = next(self)?;
        loop {
            let Some(op) = ops.iter().find(|(s, _)| self.at_op(s)).map(|(_, k)| *k) else {
                break;
            };
            self.advance();
            let right = next(self)?;
            left = Expr::new(span, ExprKind::BinOp { op, left: Box::new(left), right: Box::new(right) });
        }
        Ok(left)
    }

    fn bitor(&mut self) -> PResult<Expr> {
        self.binary(Self::bitxor, &[("|", BinOpKind::BitOr)])
    }

    fn bitxor(&mut self) -> PResult<Expr> {
        self.binary(Self::bitand, &[("^", BinOpKind::BitXor)])
    }

    fn bitand(&mut self) -> PResult<Expr> {
        self.binary(Self::shift, &[("&", BinOpKind::BitAnd)])
    }

    fn shift(&mut self) -> PResult<Expr> {
        self.binary(Self::arith, &[("<<", BinOpKind::LShift), (">>", BinOpKind::RShift)])
    }

    fn arith(&mut self) -> PResult<Expr> {
        self.binary(Self::term, &[("+", BinOpKind::Add), ("-", BinOpKind::Sub)])
    }

    fn term(&mut self) -> PResult<Expr> {
        self.binary(
            Self::factor,
            &[("*", BinOpKind::Mul), ("/", BinOpKind::Div), ("//", BinOpKind::FloorDiv), ("%", BinOpKind::Mod)],
        )
    }

    fn factor(&mut self) -> PResult<Expr> {
        let span = self.span();
        let op = if self.at_op("-") {
            Some(UnaryOpKind::Neg)
        } else if self.at_op("+") {
            Some(UnaryOpKind::Pos)
        } else if self.at_op("~") {
            Some(UnaryOpKind::Invert)
        } else {
            None
        };
        if let Some(op) = op {
            self.advance();
            let operand = self.factor()?;
            return Ok(Expr::new(span, ExprKind::UnaryOp { op, operand: Box::new(operand) }));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let span = self.span();
        let base = self.primary()?;
        if self.eat_op("**") {
            let exp = self.factor()?;
            return Ok(Expr::new(span, ExprKind::BinOp { op: BinOpKind::Pow, left: Box::new(base), right: Box::new(exp) }));
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let mut e = self.atom()?;
        loop {
            if self.at_op("(") {
                let line = self.line();
                let (args, kwargs) = self.call_args()?;
                e = match e.kind {
                    ExprKind::Name(func) => Expr::new(e.span, ExprKind::Call { func, args, kwargs }),
                    ExprKind::Attribute { value, attr } => {
                        Expr::new(e.span, ExprKind::MethodCall { receiver: value, method: attr, args, kwargs })
                    }
                    _ => return Err(unsupported(line, "call of a computed expression")),
                };
            } else if self.eat_op("[") {
                let index = self.subscript_list()?;
                self.expect_op("]")?;
                e = Expr::new(e.span, ExprKind::Subscript { value: Box::new(e), index: Box::new(index) });
            } else if self.eat_op(".") {
                let attr = self.ident()?;
                e = Expr::new(e.span, ExprKind::Attribute { value: Box::new(e), attr });
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn call_args(&mut self) -> PResult<(Vec<Expr>, Vec<(String, Expr)>)> {
        self.expect_op("(")?;
        let mut args = Vec::new();
        let mut kwargs: Vec<(String, Expr)> = Vec::new();
        while !self.at_op(")") {
            let line = self.line();
            if self.at_op("*") || self.at_op("**") {
                return Err(unsupported(line, "argument unpacking"));
            }
            let is_kw = matches!(&self.tok().kind, TokKind::Name(_))
                && matches!(self.toks.get(self.pos + 1).map(|t| &t.kind), Some(TokKind::Op("=")));
            if is_kw {
                let name = self.ident()?;
                self.expect_op("=")?;
                let v = self.test()?;
                if kwargs.iter().any(|(k, _)| *k == name) {
                    return Err(ParseError::Syntax { line, message: format!("keyword argument repeated: {name}") });
                }
                kwargs.push((name, v));
            } else {
                if !kwargs.is_empty() {
                    return Err(ParseError::Syntax { line, message: "positional argument follows keyword argument".to_string() });
                }
                let span = self.span();
                let v = self.test()?;
                if self.at_kw("for") {
                    let generators = self.comp_for()?;
                    args.push(Expr::new(span, ExprKind::GenExp { elt: Box::new(v), generators }));
                } else {
                    args.push(v);
                }
            }
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_op(")")?;
        Ok((args, kwargs))
    }

    fn subscript_list(&mut self) -> PResult<Expr> {
        let span = self.span();
        let first = self.subscript()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = alloc::vec![first];
        while self.eat_op(",") {
            if self.at_op("]") {
                break;
            }
            items.push(self.subscript()?);
        }
        Ok(Expr::new(span, ExprKind::Tuple(items)))
    }

    fn subscript(&mut self) -> PResult<Expr> {
        let span = self.span();
        let lower = if self.at_op(":") { None } else { Some(Box::new(self.test()?)) };
        if !self.at_op(":") {
            return lower.map(|b| *b).ok_or_else(|| self.error("expected subscript"));
        }
        self.advance();
        let upper = if self.at_op(":") || self.at_op("]") || self.at_op(",") { None } else { Some(Box::new(self.test()?)) };
        let step = if self.eat_op(":") {
            if self.at_op("]") || self.at_op(",") { None } else { Some(Box::new(self.test()?)) }
        } else {
            None
        };
        Ok(Expr::new(span, ExprKind::Slice { lower, upper, step }))
    }

    fn comp_for(&mut self) -> PResult<Vec<Comprehension>> {
        let mut gens = Vec::new();
        while self.eat_kw("for") {
            let target = self.target_list()?;
            check_target(&target, true)?;
            self.expect_kw("in")?;
            let iter = self.or_test()?;
            let mut ifs = Vec::new();
            while self.eat_kw("if") {
                ifs.push(self.test_nocond()?);
            }
            gens.push(Comprehension { target, iter, ifs });
        }
        Ok(gens)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let span = self.span();
        let line = span.line;
        let tok = self.tok().clone();
        match tok.kind {
            TokKind::Op("(") => {
                self.advance();
                if self.eat_op(")") {
                    return Ok(Expr::new(span, ExprKind::Tuple(Vec::new())));
                }
                if self.at_op("*") {
                    return Err(unsupported(line, "starred expression"));
                }
                let first = self.test()?;
                if self.at_kw("for") {
                    let generators = self.comp_for()?;
                    self.expect_op(")")?;
                    return Ok(Expr::new(span, ExprKind::GenExp { elt: Box::new(first), generators }));
                }
                if self.eat_op(")") {
                    return Ok(first);
                }
                let mut items = alloc::vec![first];
                while self.eat_op(",") {
                    if self.at_op(")") {
                        break;
                    }
                    items.push(self.test()?);
                }
                self.expect_op(")")?;
                Ok(Expr::new(span, ExprKind::Tuple(items)))
            }
            TokKind::Op("[") => {
                self.advance();
                if self.eat_op("]") {
                    return Ok(Expr::new(span, ExprKind::List(Vec::new())));
                }
                if self.at_op("*") {
                    return Err(unsupported(line, "starred expression"));
                }
                let first = self.test()?;
                if self.at_kw("for") {
                    let generators = self.comp_for()?;
                    self.expect_op("]")?;
                    return Ok(Expr::new(span, ExprKind::ListComp { elt: Box::new(first), generators }));
                }
                let mut items = alloc::vec![first];
                while self.eat_op(",") {
                    if self.at_op("]") {
                        break;
                    }
                    items.push(self.test()?);
                }
                self.expect_op("]")?;
                Ok(Expr::new(span, ExprKind::List(items)))
            }
            TokKind::Op("{") => {
                self.advance();
                if self.eat_op("}") {
                    return Ok(Expr::new(span, ExprKind::Dict(Vec::new())));
                }
                if self.at_op("**") || self.at_op("*") {
                    return Err(unsupported(line, "unpacking in display"));
                }
                let first = self.test()?;
                if self.eat_op(":") {
                    let v = self.test()?;
                    if self.at_kw("for") {
                        let generators = self.comp_for()?;
                        self.expect_op("}")?;
                        return Ok(Expr::new(
                            span,
                            ExprKind::DictComp { key: Box::new(first), value: Box::new(v), generators },
                        ));
                    }
                    let mut items = alloc::vec![(first, v)];
                    while self.eat_op(",") {
                        if self.at_op("}") {
                            break;
                        }
                        let k = self.test()?;
                        self.expect_op(":")?;
                        let v = self.test()?;
                        items.push((k, v));
                    }
                    self.expect_op("}")?;
                    return Ok(Expr::new(span, ExprKind::Dict(items)));
                }
                if self.at_kw("for") {
                    let generators = self.comp_for()?;
                    self.expect_op("}")?;
                    return Ok(Expr::new(span, ExprKind::SetComp { elt: Box::new(first), generators }));
                }
                let mut items = alloc::vec![first];
                while self.eat_op(",") {
                    if self.at_op("}") {
                        break;
                    }
                    items.push(self.test()?);
                }
                self.expect_op("}")?;
                Ok(Expr::new(span, ExprKind::Set(items)))
            }
            TokKind::Name(n) => {
                let kind = match n.as_str() {
                    "True" => ExprKind::Literal(Literal::Bool(true)),
                    "False" => ExprKind::Literal(Literal::Bool(false)),
                    "None" => ExprKind::Literal(Literal::None),
                    "yield" => return Err(unsupported(line, "generator")),
                    "await" => return Err(unsupported(line, "async")),
                    kw if KEYWORDS.contains(&kw) => return Err(self.error("invalid syntax")),
                    _ => ExprKind::Name(n.clone()),
                };
                self.advance();
                Ok(Expr::new(span, kind))
            }
            TokKind::Int(v) => {
                self.advance();
                Ok(Expr::new(span, ExprKind::Literal(Literal::Int(v))))
            }
            TokKind::Float(v) => {
                self.advance();
                Ok(Expr::new(span, ExprKind::Literal(Literal::Float(v))))
            }
            TokKind::Str(_) | TokKind::FStr { .. } => self.strings(),
            TokKind::Op("*") => Err(unsupported(line, "starred expression")),
            _ => Err(self.error("invalid syntax")),
        }
    }

    /// Adjacent string literals are concatenated; any f-string makes the result an f-string.
    fn strings(&mut self) -> PResult<Expr> {
        let span = self.span();
        let mut parts: Vec<FPart> = Vec::new();
        let mut any_f = false;
        loop {
            let tok = self.tok().clone();
            match tok.kind {
                TokKind::Str(s) => {
                    self.advance();
                    push_lit(&mut parts, &s);
                }
                TokKind::FStr { body, raw } => {
                    self.advance();
                    any_f = true;
                    for part in parse_fstring(&body, raw, tok.line + self.line_offset)? {
                        match part {
                            FPart::Lit(s) => push_lit(&mut parts, &s),
                            other => parts.push(other),
                        }
                    }
                }
                _ => break,
            }
        }
        if !any_f {
            let s = match parts.pop() {
                Some(FPart::Lit(s)) => s,
                _ => String::new(),
            };
            return Ok(Expr::new(span, ExprKind::Literal(Literal::Str(s))));
        }
        Ok(Expr::new(span, ExprKind::FString(parts)))
    }
}

fn push_lit(parts: &mut Vec<FPart>, s: &str) {
    if let Some(FPart::Lit(last)) = parts.last_mut() {
        last.push_str(s);
    } else {
        parts.push(FPart::Lit(s.to_string()));
    }
}

fn unreachable_expr(span: Span) -> Expr {
    Expr::new(span, ExprKind::Literal(Literal::None))
}

fn check_target(e: &Expr, allow_tuple: bool) -> PResult<()> {
    match &e.kind {
        ExprKind::Name(_) | ExprKind::Subscript { .. } => Ok(()),
        ExprKind::Tuple(items) | ExprKind::List(items) if allow_tuple => {
            for i in items {
                check_target(i, true)?;
            }
            Ok(())
        }
        ExprKind::Attribute { .. } => Err(unsupported(e.span.line, "attribute assignment")),
        _ => Err(ParseError::Syntax { line: e.span.line, message: "cannot assign to expression".to_string() }),
    }
}

fn parse_fstring(body: &str, raw: bool, line: u32) -> PResult<Vec<FPart>> {
    let chars: Vec<char> = body.chars().collect();
    let mut parts = Vec::new();
    let mut lit = String::new();
    let mut i = 0;
    let flush = |lit: &mut String, parts: &mut Vec<FPart>| -> PResult<()> {
        if !lit.is_empty() {
            let s = if raw { lit.clone() } else { decode_escapes(lit).map_err(|m| ParseError::Syntax { line, message: m })? };
            parts.push(FPart::Lit(s));
            lit.clear();
        }
        Ok(())
    };
    while i < chars.len() {
        let c = chars[i];
        if c == '{' && chars.get(i + 1) == Some(&'{') {
            lit.push('{');
            i += 2;
            continue;
        }
        if c == '}' {
            if chars.get(i + 1) == Some(&'}') {
                lit.push('}');
                i += 2;
                continue;
            }
            return Err(ParseError::Syntax { line, message: "f-string: single '}' is not allowed".to_string() });
        }
        if c != '{' {
            lit.push(c);
            i += 1;
            continue;
        }
        flush(&mut lit, &mut parts)?;
        i += 1;
        let start = i;
        let mut depth = 0usize;
        let mut quote: Option<char> = None;
        let mut conv_at = None;
        let mut spec_at = None;
        while i < chars.len() {
            let ch = chars[i];
            if let Some(q) = quote {
                if ch == q {
                    quote = None;
                }
            } else {
                match ch {
                    '\'' | '"' => quote = Some(ch),
                    '(' | '[' | '{' => depth += 1,
                    ')' | ']' => depth = depth.saturating_sub(1),
                    '}' if depth > 0 => depth -= 1,
                    '}' => break,
                    '!' if depth == 0 && chars.get(i + 1) != Some(&'=') && spec_at.is_none() => conv_at = Some(i),
                    ':' if depth == 0 && spec_at.is_none() => spec_at = Some(i),
                    '=' if depth == 0 && spec_at.is_none() && conv_at.is_none()
                        && chars.get(i + 1) != Some(&'=')
                        && !matches!(chars.get(i.wrapping_sub(1)), Some('=' | '!' | '<' | '>')) =>
                    {
                        return Err(unsupported(line, "self-documenting f-string field"));
                    }
                    _ => {}
                }
            }
            i += 1;
        }
        if i >= chars.len() {
            return Err(ParseError::Syntax { line, message: "f-string: expecting '}'".to_string() });
        }
        let end = i;
        i += 1;
        let expr_end = conv_at.or(spec_at).unwrap_or(end);
        let expr_text: String = chars[start..expr_end].iter().collect();
        if expr_text.trim().is_empty() {
            return Err(ParseError::Syntax { line, message: "f-string: empty expression not allowed".to_string() });
        }
        let conversion = match conv_at {
            Some(ci) => {
                let c = chars.get(ci + 1).copied();
                match c {
                    Some('r') | Some('s') | Some('a') => c,
                    _ => return Err(ParseError::Syntax { line, message: "f-string: invalid conversion character".to_string() }),
                }
            }
            None => None,
        };
        let spec = spec_at.map(|si| chars[si + 1..end].iter().collect::<String>());
        if let Some(s) = &spec {
            if s.contains('{') {
                return Err(unsupported(line, "nested f-string format specification"));
            }
        }
        let expr = parse_expression(&expr_text, line.saturating_sub(1))?;
        parts.push(FPart::Expr { expr, conversion, spec });
    }
    flush(&mut lit, &mut parts)?;
    Ok(parts)
}

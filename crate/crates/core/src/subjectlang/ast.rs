//! Syntax tree for the supported Python subset.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::num::Int;

/// Pre-order index of a statement inside its tree.
pub type StmtId = u32;

/// 1-based line, 0-based column.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntaxTree {
    pub body: Vec<Stmt>,
    /// Number of lines in the source the tree was parsed from.
    pub line_count: u32,
    /// `(line, column)` of every `#` comment.
    pub comments: Vec<(u32, u32)>,
    /// Id of the [`SourceUnit`](super::SourceUnit) the tree came from, if known.
    pub source_id: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub id: StmtId,
    pub span: Span,
    pub kind: StmtKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    FunctionDef(FunctionDef),
    /// `a = b = value`, `x: int = value`, `a, b = value`.
    Assign {
        targets: Vec<Expr>,
        annotation: Option<Expr>,
        value: Expr,
    },
    AugAssign {
        target: Expr,
        op: BinOpKind,
        value: Expr,
    },
    If {
        test: Expr,
        body: Vec<Stmt>,
        orelse: Vec<Stmt>,
        /// This node was written as `elif` inside its parent's `orelse`.
        is_elif: bool,
    },
    For {
        target: Expr,
        iter: Expr,
        body: Vec<Stmt>,
    },
    While {
        test: Expr,
        body: Vec<Stmt>,
    },
    Return(Option<Expr>),
    Break,
    Continue,
    Pass,
    Expr(Expr),
    Assert {
        test: Expr,
        msg: Option<Expr>,
    },
    /// `from typing import A, B as C`
    TypingImport {
        names: Vec<(String, Option<String>)>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<Param>,
    pub returns: Option<Expr>,
    pub docstring: Option<String>,
    pub body: Vec<Stmt>,
}

impl FunctionDef {
    pub fn required_arity(&self) -> usize {
        self.params.iter().filter(|p| p.default.is_none()).count()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub annotation: Option<Expr>,
    pub default: Option<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub span: Span,
    pub kind: ExprKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Literal {
    None,
    Bool(bool),
    Int(Int),
    Float(f64),
    Str(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOpKind {
    Add,
    Sub,
    Mul,
    Div,
    FloorDiv,
    Mod,
    Pow,
    BitAnd,
    BitOr,
    BitXor,
    LShift,
    RShift,
}

impl BinOpKind {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOpKind::Add => "+",
            BinOpKind::Sub => "-",
            BinOpKind::Mul => "*",
            BinOpKind::Div => "/",
            BinOpKind::FloorDiv => "//",
            BinOpKind::Mod => "%",
            BinOpKind::Pow => "**",
            BinOpKind::BitAnd => "&",
            BinOpKind::BitOr => "|",
            BinOpKind::BitXor => "^",
            BinOpKind::LShift => "<<",
            BinOpKind::RShift => ">>",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryOpKind {
    Neg,
    Pos,
    Not,
    Invert,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoolOpKind {
    And,
    Or,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    LtE,
    Gt,
    GtE,
    Eq,
    NotEq,
    In,
    NotIn,
    Is,
    IsNot,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::LtE => "<=",
            CmpOp::Gt => ">",
            CmpOp::GtE => ">=",
            CmpOp::Eq => "==",
            CmpOp::NotEq => "!=",
            CmpOp::In => "in",
            CmpOp::NotIn => "not in",
            CmpOp::Is => "is",
            CmpOp::IsNot => "is not",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comprehension {
    pub target: Expr,
    pub iter: Expr,
    pub ifs: Vec<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FPart {
    Lit(String),
    Expr {
        expr: Expr,
        conversion: Option<char>,
        spec: Option<String>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Literal(Literal),
    Name(String),
    FString(Vec<FPart>),
    List(Vec<Expr>),
    Tuple(Vec<Expr>),
    Set(Vec<Expr>),
    Dict(Vec<(Expr, Expr)>),
    Call {
        func: String,
        args: Vec<Expr>,
        kwargs: Vec<(String, Expr)>,
    },
    MethodCall {
        receiver: Box<Expr>,
        method: String,
        args: Vec<Expr>,
        kwargs: Vec<(String, Expr)>,
    },
    Attribute {
        value: Box<Expr>,
        attr: String,
    },
    BinOp {
        op: BinOpKind,
        left: Box<Expr>,
        right: Box<Expr>,
    },
    UnaryOp {
        op: UnaryOpKind,
        operand: Box<Expr>,
    },
    BoolOp {
        op: BoolOpKind,
        values: Vec<Expr>,
    },
    /// Chained comparison `a < b <= c`.
    Compare {
        left: Box<Expr>,
        ops: Vec<(CmpOp, Expr)>,
    },
    IfExp {
        test: Box<Expr>,
        body: Box<Expr>,
        orelse: Box<Expr>,
    },
    Subscript {
        value: Box<Expr>,
        index: Box<Expr>,
    },
    Slice {
        lower: Option<Box<Expr>>,
        upper: Option<Box<Expr>>,
        step: Option<Box<Expr>>,
    },
    ListComp {
        elt: Box<Expr>,
        generators: Vec<Comprehension>,
    },
    SetComp {
        elt: Box<Expr>,
        generators: Vec<Comprehension>,
    },
    GenExp {
        elt: Box<Expr>,
        generators: Vec<Comprehension>,
    },
    DictComp {
        key: Box<Expr>,
        value: Box<Expr>,
        generators: Vec<Comprehension>,
    },
    Lambda {
        params: Vec<String>,
        body: Box<Expr>,
    },
}

impl Expr {
    pub fn new(span: Span, kind: ExprKind) -> Self {
        Expr { span, kind }
    }
}

impl StmtKind {
    /// Node-kind name used in diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            StmtKind::FunctionDef(_) => "FunctionDef",
            StmtKind::Assign { targets, .. } => {
                if targets.iter().any(|t| matches!(t.kind, ExprKind::Tuple(_) | ExprKind::List(_))) {
                    "TupleAssign"
                } else {
                    "Assign"
                }
            }
            StmtKind::AugAssign { .. } => "AugAssign",
            StmtKind::If { .. } => "If",
            StmtKind::For { .. } => "For",
            StmtKind::While { .. } => "While",
            StmtKind::Return(_) => "Return",
            StmtKind::Break => "Break",
            StmtKind::Continue => "Continue",
            StmtKind::Pass => "Pass",
            StmtKind::Expr(_) => "ExprStmt",
            StmtKind::Assert { .. } => "Assert",
            StmtKind::TypingImport { .. } => "TypingImport",
        }
    }

    pub fn is_branching(&self) -> bool {
        matches!(self, StmtKind::If { .. } | StmtKind::For { .. } | StmtKind::While { .. })
    }
}

impl Stmt {
    /// Child statement blocks in source order.
    pub fn blocks(&self) -> Vec<&[Stmt]> {
        match &self.kind {
            StmtKind::FunctionDef(f) => alloc::vec![&f.body[..]],
            StmtKind::If { body, orelse, .. } => alloc::vec![&body[..], &orelse[..]],
            StmtKind::For { body, .. } | StmtKind::While { body, .. } => alloc::vec![&body[..]],
            _ => Vec::new(),
        }
    }

    /// Returns this statement and all statements nested inside it, pre-order.
    pub fn flatten(&self) -> Vec<&Stmt> {
        let mut out = Vec::new();
        fn go<'a>(s: &'a Stmt, out: &mut Vec<&'a Stmt>) {
            out.push(s);
            for b in s.blocks() {
                for c in b {
                    go(c, out);
                }
            }
        }
        go(self, &mut out);
        out
    }

    /// Largest statement id inside this subtree (inclusive).
    pub fn last_id(&self) -> StmtId {
        self.flatten().last().map(|s| s.id).unwrap_or(self.id)
    }
}

impl SyntaxTree {
    pub fn functions(&self) -> impl Iterator<Item = &FunctionDef> {
        self.body.iter().filter_map(|s| match &s.kind {
            StmtKind::FunctionDef(f) => Some(f),
            _ => None,
        })
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions().find(|f| f.name == name)
    }

    pub fn function_stmt(&self, name: &str) -> Option<&Stmt> {
        self.body
            .iter()
            .find(|s| matches!(&s.kind, StmtKind::FunctionDef(f) if f.name == name))
    }

    /// The only top-level function, if there is exactly one.
    pub fn sole_function(&self) -> Option<&FunctionDef> {
        let mut it = self.functions();
        let first = it.next()?;
        if it.next().is_some() {
            None
        } else {
            Some(first)
        }
    }

    /// All statements, pre-order.
    pub fn statements(&self) -> Vec<&Stmt> {
        self.body.iter().flat_map(|s| s.flatten()).collect()
    }

    pub fn stmt_by_id(&self, id: StmtId) -> Option<&Stmt> {
        self.statements().into_iter().find(|s| s.id == id)
    }

    /// Column of the comment on `line`, if any.
    pub fn comment_col(&self, line: u32) -> Option<u32> {
        self.comments.iter().find(|(l, _)| *l == line).map(|(_, c)| *c)
    }

    pub fn is_empty(&self) -> bool {
        self.body.is_empty()
    }
}

use serde::{Deserialize, Serialize};

use rustpython_parser::ast;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOpKind {
    Add,
    Sub,
    Mult,
    MatMult,
    Div,
    FloorDiv,
    Mod,
    Pow,
    LShift,
    RShift,
    BitOr,
    BitXor,
    BitAnd,
}

impl BinOpKind {
    pub const ALL: [BinOpKind; 13] = [
        BinOpKind::Add,
        BinOpKind::Sub,
        BinOpKind::Mult,
        BinOpKind::MatMult,
        BinOpKind::Div,
        BinOpKind::FloorDiv,
        BinOpKind::Mod,
        BinOpKind::Pow,
        BinOpKind::LShift,
        BinOpKind::RShift,
        BinOpKind::BitOr,
        BinOpKind::BitXor,
        BinOpKind::BitAnd,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOpKind::Add => "+",
            BinOpKind::Sub => "-",
            BinOpKind::Mult => "*",
            BinOpKind::MatMult => "@",
            BinOpKind::Div => "/",
            BinOpKind::FloorDiv => "//",
            BinOpKind::Mod => "%",
            BinOpKind::Pow => "**",
            BinOpKind::LShift => "<<",
            BinOpKind::RShift => ">>",
            BinOpKind::BitOr => "|",
            BinOpKind::BitXor => "^",
            BinOpKind::BitAnd => "&",
        }
    }

    fn label(self) -> &'static str {
        match self {
            BinOpKind::Add => "Add",
            BinOpKind::Sub => "Sub",
            BinOpKind::Mult => "Mult",
            BinOpKind::MatMult => "MatMult",
            BinOpKind::Div => "Div",
            BinOpKind::FloorDiv => "FloorDiv",
            BinOpKind::Mod => "Mod",
            BinOpKind::Pow => "Pow",
            BinOpKind::LShift => "LShift",
            BinOpKind::RShift => "RShift",
            BinOpKind::BitOr => "BitOr",
            BinOpKind::BitXor => "BitXor",
            BinOpKind::BitAnd => "BitAnd",
        }
    }
}

impl From<ast::Operator> for BinOpKind {
    fn from(op: ast::Operator) -> Self {
        use ast::Operator as O;
        match op {
            O::Add => BinOpKind::Add,
            O::Sub => BinOpKind::Sub,
            O::Mult => BinOpKind::Mult,
            O::MatMult => BinOpKind::MatMult,
            O::Div => BinOpKind::Div,
            O::FloorDiv => BinOpKind::FloorDiv,
            O::Mod => BinOpKind::Mod,
            O::Pow => BinOpKind::Pow,
            O::LShift => BinOpKind::LShift,
            O::RShift => BinOpKind::RShift,
            O::BitOr => BinOpKind::BitOr,
            O::BitXor => BinOpKind::BitXor,
            O::BitAnd => BinOpKind::BitAnd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnaryOpKind {
    Not,
    Neg,
    Pos,
    Invert,
}

impl From<ast::UnaryOp> for UnaryOpKind {
    fn from(op: ast::UnaryOp) -> Self {
        match op {
            ast::UnaryOp::Not => UnaryOpKind::Not,
            ast::UnaryOp::USub => UnaryOpKind::Neg,
            ast::UnaryOp::UAdd => UnaryOpKind::Pos,
            ast::UnaryOp::Invert => UnaryOpKind::Invert,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoolOpKind {
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompKind {
    List,
    Set,
    Dict,
    Generator,
}

/// Operation vocabulary of the graph builder.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpKind {
    /// Destructuring assignment (`a, b = value`).
    Assign,
    AugAssign(BinOpKind),
    BinOp(BinOpKind),
    UnaryOp(UnaryOpKind),
    BoolOp(BoolOpKind),
    Compare,
    /// Call with the callee's dotted name as written.
    Call(String),
    /// Attribute access (`obj.attr`), load or store.
    Attribute(String),
    SubscriptRead,
    SubscriptWrite,
    ListLit,
    TupleLit,
    SetLit,
    DictLit,
    Comprehension(CompKind),
    IfExp,
    /// Element produced by a `for` loop over an iterable.
    Iterate,
}

impl OpKind {
    /// Stable debug name, e.g. `Dict_Read` or `BinOp_Add`.
    pub fn name(&self) -> String {
        match self {
            OpKind::Assign => "Assign".into(),
            OpKind::AugAssign(b) => format!("AugAssign_{}", b.label()),
            OpKind::BinOp(b) => format!("BinOp_{}", b.label()),
            OpKind::UnaryOp(u) => format!("UnaryOp_{u:?}"),
            OpKind::BoolOp(b) => format!("BoolOp_{b:?}"),
            OpKind::Compare => "Compare".into(),
            OpKind::Call(n) => format!("Call_{n}"),
            OpKind::Attribute(a) => format!("Attribute_{a}"),
            OpKind::SubscriptRead => "Subscript_Read".into(),
            OpKind::SubscriptWrite => "Subscript_Write".into(),
            OpKind::ListLit => "List_Read".into(),
            OpKind::TupleLit => "Tuple_Read".into(),
            OpKind::SetLit => "Set_Read".into(),
            OpKind::DictLit => "Dict_Read".into(),
            OpKind::Comprehension(c) => format!("{c:?}Comp"),
            OpKind::IfExp => "IfExp".into(),
            OpKind::Iterate => "Iterate".into(),
        }
    }
}

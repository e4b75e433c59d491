//! Phrase table for operation nodes.

use crate::tdg::{BoolOpKind, CompKind, OpKind, UnaryOpKind};

/// Human phrase for an operation, used wherever a sentence names it.
pub fn op_phrase(op: &OpKind) -> String {
    match op {
        OpKind::Assign => "a tuple unpacking".into(),
        OpKind::AugAssign(b) => format!("a {}= operation", b.symbol()),
        OpKind::BinOp(b) => format!("a {} operation", b.symbol()),
        OpKind::UnaryOp(u) => match u {
            UnaryOpKind::Not => "a not operation".into(),
            UnaryOpKind::Neg => "a unary - operation".into(),
            UnaryOpKind::Pos => "a unary + operation".into(),
            UnaryOpKind::Invert => "a ~ operation".into(),
        },
        OpKind::BoolOp(BoolOpKind::And) => "an and operation".into(),
        OpKind::BoolOp(BoolOpKind::Or) => "an or operation".into(),
        OpKind::Compare => "a comparison operation".into(),
        OpKind::Call(name) => name.clone(),
        OpKind::Attribute(a) => format!("the attribute {a}"),
        OpKind::SubscriptRead => "a subscript operation".into(),
        OpKind::SubscriptWrite => "a subscript assignment".into(),
        OpKind::ListLit => "a list".into(),
        OpKind::TupleLit => "a tuple".into(),
        OpKind::SetLit => "a set".into(),
        OpKind::DictLit => "a dict".into(),
        OpKind::Comprehension(CompKind::List) => "a list comprehension".into(),
        OpKind::Comprehension(CompKind::Set) => "a set comprehension".into(),
        OpKind::Comprehension(CompKind::Dict) => "a dict comprehension".into(),
        OpKind::Comprehension(CompKind::Generator) => "a generator expression".into(),
        OpKind::IfExp => "a conditional expression".into(),
        OpKind::Iterate => "a for-loop iteration".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tdg::BinOpKind;

    #[test]
    fn table_examples() {
        assert_eq!(op_phrase(&OpKind::DictLit), "a dict");
        assert_eq!(op_phrase(&OpKind::BinOp(BinOpKind::Add)), "a + operation");
        assert_eq!(op_phrase(&OpKind::Call("open".into())), "open");
    }

    #[test]
    fn every_binop_has_a_distinct_phrase() {
        let mut seen = std::collections::HashSet::new();
        for b in BinOpKind::ALL {
            assert!(seen.insert(op_phrase(&OpKind::BinOp(b))));
            assert!(seen.insert(op_phrase(&OpKind::AugAssign(b))));
        }
    }
}

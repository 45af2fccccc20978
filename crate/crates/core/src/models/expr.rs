//! Formula-defined predictors.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! expr       := additive (cmp additive)*          cmp: < <= > >= == !=
//! additive   := term (('+' | '-') term)*
//! term       := unary (('*' | '/') unary)*
//! unary      := '-' unary | power
//! power      := primary ('^' unary)?              right-associative
//! primary    := number | xN | func '(' args ')' | '(' expr ')'
//! ```
//!
//! Variables are `x1..xp` (1-based). Functions: `step(u)` (1 when u >= 0),
//! `exp`, `log`, `abs`, `min(u, v)`, `max(u, v)`. Comparisons evaluate to 0
//! or 1. Unary minus binds looser than `^`, so `-2^2` is `-4`.

use std::fmt;

use crate::error::{Error, Result};
use crate::predictor::Predictor;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at position {position}")]
pub struct ExprError {
    pub kind: ExprErrorKind,
    /// Byte offset into the source.
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprErrorKind {
    UnexpectedChar(char),
    UnexpectedToken(String),
    UnexpectedEnd,
    InvalidNumber(String),
    UnknownFunction(String),
    UnknownIdentifier(String),
    VariableOutOfRange {
        index: usize,
        arity: usize,
    },
    WrongArgCount {
        function: String,
        expected: usize,
        found: usize,
    },
    Empty,
}

impl fmt::Display for ExprErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ExprErrorKind::UnexpectedToken(t) => write!(f, "unexpected token `{t}`"),
            ExprErrorKind::UnexpectedEnd => f.write_str("unexpected end of input"),
            ExprErrorKind::InvalidNumber(s) => write!(f, "invalid number `{s}`"),
            ExprErrorKind::UnknownFunction(s) => write!(f, "unknown function `{s}`"),
            ExprErrorKind::UnknownIdentifier(s) => write!(f, "unknown identifier `{s}`"),
            ExprErrorKind::VariableOutOfRange { index, arity } => {
                write!(f, "variable x{index} out of range for arity {arity}")
            }
            ExprErrorKind::WrongArgCount {
                function,
                expected,
                found,
            } => write!(
                f,
                "`{function}` takes {expected} argument(s), found {found}"
            ),
            ExprErrorKind::Empty => f.write_str("empty expression"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Step,
    Exp,
    Log,
    Abs,
    Min,
    Max,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "step" => Func::Step,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Step => "step",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arg_count(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based variable index.
    Var(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => *x.get(*i).ok_or(Error::ArityMismatch {
                expected: i + 1,
                found: x.len(),
            })?,
            Expr::Neg(e) => -e.eval(x)?,
            Expr::Binary(op, a, b) => {
                let a = a.eval(x)?;
                let b = b.eval(x)?;
                let truth = |c: bool| if c { 1.0 } else { 0.0 };
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(Error::Evaluation("division by zero".into()));
                        }
                        a / b
                    }
                    BinOp::Pow => a.powf(b),
                    BinOp::Lt => truth(a < b),
                    BinOp::Le => truth(a <= b),
                    BinOp::Gt => truth(a > b),
                    BinOp::Ge => truth(a >= b),
                    BinOp::Eq => truth(a == b),
                    BinOp::Ne => truth(a != b),
                }
            }
            Expr::Call(f, args) => {
                let u = args[0].eval(x)?;
                match f {
                    Func::Step => {
                        if u >= 0.0 {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    Func::Exp => u.exp(),
                    Func::Log => {
                        if u <= 0.0 {
                            return Err(Error::Evaluation(format!(
                                "log of non-positive value {u}"
                            )));
                        }
                        u.ln()
                    }
                    Func::Abs => u.abs(),
                    Func::Min => u.min(args[1].eval(x)?),
                    Func::Max => u.max(args[1].eval(x)?),
                }
            }
        };
        if !v.is_finite() {
            return Err(Error::Evaluation(format!("non-finite result in `{self}`")));
        }
        Ok(v)
    }

    /// Highest variable index used, zero-based.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(e) => e.max_var(),
            Expr::Binary(_, a, b) => a.max_var().max(b.max_var()),
            Expr::Call(_, args) => args.iter().filter_map(Expr::max_var).max(),
        }
    }
}

/// Fully parenthesised rendering that re-parses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(BinOp),
    LParen,
    RParen,
    Comma,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "{v}"),
            Tok::Ident(s) => f.write_str(s),
            Tok::Op(op) => f.write_str(op.symbol()),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::Comma => f.write_str(","),
        }
    }
}

fn err(kind: ExprErrorKind, position: usize) -> ExprError {
    ExprError { kind, position }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| err(ExprErrorKind::InvalidNumber(text.into()), start))?;
                out.push((Tok::Num(v), start));
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {}
        }
        let next = bytes.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            (b'<', Some(b'=')) => (Tok::Op(BinOp::Le), 2),
            (b'>', Some(b'=')) => (Tok::Op(BinOp::Ge), 2),
            (b'=', Some(b'=')) => (Tok::Op(BinOp::Eq), 2),
            (b'!', Some(b'=')) => (Tok::Op(BinOp::Ne), 2),
            (b'<', _) => (Tok::Op(BinOp::Lt), 1),
            (b'>', _) => (Tok::Op(BinOp::Gt), 1),
            (b'+', _) => (Tok::Op(BinOp::Add), 1),
            (b'-', _) => (Tok::Op(BinOp::Sub), 1),
            (b'*', _) => (Tok::Op(BinOp::Mul), 1),
            (b'/', _) => (Tok::Op(BinOp::Div), 1),
            (b'^', _) => (Tok::Op(BinOp::Pow), 1),
            (b'(', _) => (Tok::LParen, 1),
            (b')', _) => (Tok::RParen, 1),
            (b',', _) => (Tok::Comma, 1),
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(err(ExprErrorKind::UnexpectedChar(ch), start));
            }
        };
        out.push((tok, start));
        i += len;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    end: usize,
    arity: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.1)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn unexpected(&self) -> ExprError {
        match self.peek() {
            Some(t) => err(ExprErrorKind::UnexpectedToken(t.to_string()), self.offset()),
            None => err(ExprErrorKind::UnexpectedEnd, self.end),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ExprError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.additive()?;
        while let Some(Tok::Op(
            op @ (BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne),
        )) = self.peek().cloned()
        {
            self.pos += 1;
            let rhs = self.additive()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(op @ (BinOp::Add | BinOp::Sub))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ (BinOp::Mul | BinOp::Div))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek() == Some(&Tok::Op(BinOp::Sub)) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.peek() == Some(&Tok::Op(BinOp::Pow)) {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    let func = Func::from_name(&name)
                        .ok_or_else(|| err(ExprErrorKind::UnknownFunction(name.clone()), at))?;
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen)?;
                    if args.len() != func.arg_count() {
                        return Err(err(
                            ExprErrorKind::WrongArgCount {
                                function: name,
                                expected: func.arg_count(),
                                found: args.len(),
                            },
                            at,
                        ));
                    }
                    return Ok(Expr::Call(func, args));
                }
                self.variable(&name, at)
            }
            Some(_) => {
                self.pos -= 1;
                Err(self.unexpected())
            }
            None => Err(err(ExprErrorKind::UnexpectedEnd, self.end)),
        }
    }

    fn variable(&self, name: &str, at: usize) -> Result<Expr, ExprError> {
        let index = name
            .strip_prefix('x')
            .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|&i| i >= 1)
            .ok_or_else(|| err(ExprErrorKind::UnknownIdentifier(name.into()), at))?;
        if index > self.arity {
            return Err(err(
                ExprErrorKind::VariableOutOfRange {
                    index,
                    arity: self.arity,
                },
                at,
            ));
        }
        Ok(Expr::Var(index - 1))
    }
}

pub fn parse(source: &str, arity: usize) -> Result<Expr, ExprError> {
    let toks = lex(source)?;
    if toks.is_empty() {
        return Err(err(ExprErrorKind::Empty, 0));
    }
    let mut parser = Parser {
        toks: &toks,
        pos: 0,
        end: source.len(),
        arity,
    };
    let e = parser.expr()?;
    if parser.pos < toks.len() {
        return Err(parser.unexpected());
    }
    Ok(e)
}

/// A predictor defined by a formula over `x1..xp`.
#[derive(Debug, Clone)]
pub struct ExpressionModel {
    source: String,
    arity: usize,
    ast: Expr,
}

impl ExpressionModel {
    pub fn parse(source: &str, arity: usize) -> Result<Self> {
        let ast = parse(source, arity)?;
        Ok(ExpressionModel {
            source: source.to_string(),
            arity,
            ast,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }
}

pub fn parse_expression(source: &str, arity: usize) -> Result<ExpressionModel> {
    ExpressionModel::parse(source, arity)
}

impl Predictor for ExpressionModel {
    fn arity(&self) -> usize {
        self.arity
    }

    fn predict_row(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: row.len(),
            });
        }
        self.ast.eval(row)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eval(src: &str, x: &[f64]) -> f64 {
        parse(src, x.len().max(3))
            .unwrap()
            .eval(&[x, &[0.0; 3]].concat())
            .unwrap()
    }

    #[test]
    fn illustration_formula() {
        let m = ExpressionModel::parse("0.2*x1 - 5*x2 + 10*x2*step(x3)", 3).unwrap();
        let v = m.predict_row(&[1.0, 1.0, -0.5]).unwrap();
        assert!((v - (-4.8)).abs() < 1e-12);
        // step is closed at zero
        let v = m.predict_row(&[0.0, 1.0, 0.0]).unwrap();
        assert!((v - 5.0).abs() < 1e-12);
    }

    #[test]
    fn identity_and_power_associativity() {
        assert_eq!(
            ExpressionModel::parse("x1", 1)
                .unwrap()
                .predict_row(&[7.0])
                .unwrap(),
            7.0
        );
        let hand = Expr::Binary(
            BinOp::Pow,
            Box::new(Expr::Num(2.0)),
            Box::new(Expr::Binary(
                BinOp::Pow,
                Box::new(Expr::Num(3.0)),
                Box::new(Expr::Num(2.0)),
            )),
        );
        let parsed = parse("2^3^2", 0).unwrap();
        assert_eq!(parsed, hand);
        assert_eq!(parsed.eval(&[]).unwrap(), 512.0);
    }

    #[test]
    fn precedence() {
        assert_eq!(eval("1 + 2 * 3", &[]), 7.0);
        assert_eq!(eval("10 - 4 - 3", &[]), 3.0);
        assert_eq!(eval("-2^2", &[]), -4.0);
        assert_eq!(eval("2^-1", &[]), 0.5);
        assert_eq!(eval("1 + 1 == 2", &[]), 1.0);
        assert_eq!(eval("min(x1, 3) + max(x1, 3)", &[5.0]), 8.0);
    }

    #[test]
    fn positioned_errors() {
        let e = parse("1 + * 2", 1).unwrap_err();
        assert_eq!(e.position, 4);
        let e = parse("x3", 2).unwrap_err();
        assert_eq!(
            e.kind,
            ExprErrorKind::VariableOutOfRange { index: 3, arity: 2 }
        );
        let e = parse("  foo(1)", 1).unwrap_err();
        assert_eq!(e.kind, ExprErrorKind::UnknownFunction("foo".into()));
        assert_eq!(e.position, 2);
        let e = parse("(1 + 2", 1).unwrap_err();
        assert_eq!(e.kind, ExprErrorKind::UnexpectedEnd);
        assert_eq!(e.position, 6);
        assert_eq!(parse("", 1).unwrap_err().kind, ExprErrorKind::Empty);
        let e = parse("1 $ 2", 1).unwrap_err();
        assert_eq!(
            (e.kind, e.position),
            (ExprErrorKind::UnexpectedChar('$'), 2)
        );
    }

    #[test]
    fn evaluation_errors() {
        assert!(matches!(
            parse("1/x1", 1).unwrap().eval(&[0.0]),
            Err(Error::Evaluation(_))
        ));
        assert!(matches!(
            parse("log(x1)", 1).unwrap().eval(&[-1.0]),
            Err(Error::Evaluation(_))
        ));
        assert!(matches!(
            parse("exp(x1)", 1).unwrap().eval(&[1e6]),
            Err(Error::Evaluation(_))
        ));
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-5.0f64..5.0).prop_map(Expr::Num),
            (0usize..3).prop_map(Expr::Var),
        ];
        leaf.prop_recursive(4, 32, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (
                    prop_oneof![
                        Just(BinOp::Add),
                        Just(BinOp::Sub),
                        Just(BinOp::Mul),
                        Just(BinOp::Lt),
                        Just(BinOp::Ge),
                    ],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, a, b)| Expr::Binary(
                        op,
                        Box::new(a),
                        Box::new(b)
                    )),
                inner.clone().prop_map(|e| Expr::Call(Func::Step, vec![e])),
                inner.clone().prop_map(|e| Expr::Call(Func::Abs, vec![e])),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::Call(Func::Max, vec![a, b])),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_evaluation_equivalent(
            e in arb_expr(),
            pts in prop::collection::vec(prop::array::uniform3(-3.0f64..3.0), 100),
        ) {
            let printed = e.to_string();
            let again = parse(&printed, 3).unwrap();
            for x in &pts {
                let a = e.eval(x);
                let b = again.eval(x);
                match (a, b) {
                    (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0)),
                    (Err(_), Err(_)) => {}
                    (a, b) => prop_assert!(false, "{a:?} vs {b:?} for {printed}"),
                }
            }
        }
    }
}

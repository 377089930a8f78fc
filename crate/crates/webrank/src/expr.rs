//! Rational expression trees: parsing, printing, symbolic differentiation.
//!
//! Expressions are built over a fixed, ordered variable list and store
//! variables by index. The grammar is the usual one:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := ('-')? atom ('^' nonneg-int)?
//! atom   := identifier | integer | '(' expr ')'
//! ```
//!
//! Construction goes through smart constructors that do local constant
//! folding (`0 + e -> e`, `1 * e -> e`, constant arithmetic, ...), so
//! parsing and differentiation both produce lightly normalized trees and
//! `parse . print . parse = parse` holds structurally.

use crate::rational::{format_rational, rat_int, Rational};
use num::{One, Signed, Zero};
use std::fmt::Write as _;
use thiserror::Error;

/// A rational expression over an ordered variable list.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Expression {
    Const(Rational),
    /// Index into the variable list of the enclosing web.
    Var(usize),
    Neg(Box<Expression>),
    Add(Box<Expression>, Box<Expression>),
    Sub(Box<Expression>, Box<Expression>),
    Mul(Box<Expression>, Box<Expression>),
    Div(Box<Expression>, Box<Expression>),
    /// Nonnegative integer power.
    Pow(Box<Expression>, u32),
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected character '{ch}' at byte {pos}")]
    UnexpectedChar { pos: usize, ch: char },
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("expected {expected} at byte {pos}, found '{found}'")]
    UnexpectedToken {
        pos: usize,
        found: String,
        expected: &'static str,
    },
    #[error("unknown variable '{name}' at byte {pos}")]
    UnknownVariable { pos: usize, name: String },
    #[error("exponent at byte {pos} must be a nonnegative integer")]
    BadExponent { pos: usize },
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("division by zero while evaluating at the base point")]
    DivisionByZero,
}

// ---------------------------------------------------------------------------
// Smart constructors (local constant folding only).

pub fn econst(r: Rational) -> Expression {
    Expression::Const(r)
}

pub fn evar(index: usize) -> Expression {
    Expression::Var(index)
}

pub fn eneg(e: Expression) -> Expression {
    match e {
        Expression::Const(c) => Expression::Const(-c),
        Expression::Neg(inner) => *inner,
        other => Expression::Neg(Box::new(other)),
    }
}

pub fn eadd(a: Expression, b: Expression) -> Expression {
    match (a, b) {
        (Expression::Const(x), Expression::Const(y)) => Expression::Const(x + y),
        (Expression::Const(x), b) if x.is_zero() => b,
        (a, Expression::Const(y)) if y.is_zero() => a,
        (a, b) => Expression::Add(Box::new(a), Box::new(b)),
    }
}

pub fn esub(a: Expression, b: Expression) -> Expression {
    match (a, b) {
        (Expression::Const(x), Expression::Const(y)) => Expression::Const(x - y),
        (a, Expression::Const(y)) if y.is_zero() => a,
        (Expression::Const(x), b) if x.is_zero() => eneg(b),
        (a, b) => Expression::Sub(Box::new(a), Box::new(b)),
    }
}

pub fn emul(a: Expression, b: Expression) -> Expression {
    match (a, b) {
        (Expression::Const(x), Expression::Const(y)) => Expression::Const(x * y),
        (Expression::Const(x), _) | (_, Expression::Const(x)) if x.is_zero() => {
            Expression::Const(x)
        }
        (Expression::Const(x), b) if x.is_one() => b,
        (a, Expression::Const(y)) if y.is_one() => a,
        (a, b) => Expression::Mul(Box::new(a), Box::new(b)),
    }
}

pub fn ediv(a: Expression, b: Expression) -> Expression {
    match (a, b) {
        (Expression::Const(x), Expression::Const(y)) if !y.is_zero() => Expression::Const(x / y),
        (a, Expression::Const(y)) if y.is_one() => a,
        (a, b) => Expression::Div(Box::new(a), Box::new(b)),
    }
}

pub fn epow(e: Expression, k: u32) -> Expression {
    match (e, k) {
        (_, 0) => Expression::Const(rat_int(1)),
        (e, 1) => e,
        (Expression::Const(c), k) => {
            let mut acc = rat_int(1);
            for _ in 0..k {
                acc *= c.clone();
            }
            Expression::Const(acc)
        }
        (e, k) => Expression::Pow(Box::new(e), k),
    }
}

// ---------------------------------------------------------------------------
// Parsing.

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [String],
}

/// Parses an expression over the given variable list.
pub fn parse_expression(src: &str, vars: &[String]) -> Result<Expression, ParseError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        vars,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.unexpected("end of input"));
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        match self.src.get(self.pos) {
            None => ParseError::UnexpectedEnd,
            Some(&b) => ParseError::UnexpectedToken {
                pos: self.pos,
                found: (b as char).to_string(),
                expected,
            },
        }
    }

    fn expr(&mut self) -> Result<Expression, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = eadd(acc, self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = esub(acc, self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expression, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = emul(acc, self.factor()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    acc = ediv(acc, self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expression, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let atom = self.powered_atom()?;
            return Ok(eneg(atom));
        }
        self.powered_atom()
    }

    fn powered_atom(&mut self) -> Result<Expression, ParseError> {
        let atom = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            let digits = self.take_digits();
            if digits.is_empty() {
                return Err(ParseError::BadExponent { pos: start });
            }
            let k: u32 = digits
                .parse()
                .map_err(|_| ParseError::BadExponent { pos: start })?;
            return Ok(epow(atom, k));
        }
        Ok(atom)
    }

    fn take_digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn atom(&mut self) -> Result<Expression, ParseError> {
        match self.peek() {
            None => Err(ParseError::UnexpectedEnd),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.unexpected("')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b) if b.is_ascii_digit() => {
                let digits = self.take_digits();
                let n: num::BigInt = digits.parse().expect("digit run parses as integer");
                Ok(econst(Rational::from_integer(n)))
            }
            Some(b) if b.is_ascii_alphabetic() || b == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(evar(i)),
                    None => Err(ParseError::UnknownVariable { pos: start, name }),
                }
            }
            Some(ch) => Err(ParseError::UnexpectedChar {
                pos: self.pos,
                ch: ch as char,
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Printing.

fn precedence(e: &Expression) -> u8 {
    match e {
        Expression::Add(..) | Expression::Sub(..) => 1,
        Expression::Neg(..) => 2,
        Expression::Mul(..) | Expression::Div(..) => 3,
        Expression::Pow(..) => 4,
        Expression::Const(c) if c.is_negative() => 2,
        Expression::Const(..) | Expression::Var(..) => 5,
    }
}

/// Canonical text form over the given variable names; parses back to a
/// structurally identical tree.
pub fn serialize_expression(e: &Expression, vars: &[String]) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, vars);
    out
}

fn write_wrapped(out: &mut String, e: &Expression, vars: &[String], min_prec: u8) {
    if precedence(e) < min_prec {
        out.push('(');
        write_expr(out, e, vars);
        out.push(')');
    } else {
        write_expr(out, e, vars);
    }
}

fn write_expr(out: &mut String, e: &Expression, vars: &[String]) {
    match e {
        Expression::Const(c) => {
            let _ = write!(out, "{}", format_rational(c));
        }
        Expression::Var(i) => out.push_str(&vars[*i]),
        Expression::Neg(a) => {
            // The grammar binds '-' outside a powered atom only, so anything
            // looser than a power must be parenthesized to survive reparsing.
            out.push('-');
            write_wrapped(out, a, vars, 4);
        }
        Expression::Add(a, b) => {
            write_wrapped(out, a, vars, 1);
            out.push_str(" + ");
            write_wrapped(out, b, vars, 2);
        }
        Expression::Sub(a, b) => {
            write_wrapped(out, a, vars, 1);
            out.push_str(" - ");
            write_wrapped(out, b, vars, 2);
        }
        Expression::Mul(a, b) => {
            write_wrapped(out, a, vars, 3);
            out.push('*');
            write_wrapped(out, b, vars, 4);
        }
        Expression::Div(a, b) => {
            write_wrapped(out, a, vars, 3);
            out.push('/');
            write_wrapped(out, b, vars, 4);
        }
        Expression::Pow(a, k) => {
            write_wrapped(out, a, vars, 5);
            let _ = write!(out, "^{k}");
        }
    }
}

// ---------------------------------------------------------------------------
// Differentiation and evaluation.

/// Partial derivative with respect to variable `lambda`, with local folding.
pub fn differentiate(e: &Expression, lambda: usize) -> Expression {
    match e {
        Expression::Const(_) => econst(rat_int(0)),
        Expression::Var(i) => econst(rat_int(i64::from(*i == lambda))),
        Expression::Neg(a) => eneg(differentiate(a, lambda)),
        Expression::Add(a, b) => eadd(differentiate(a, lambda), differentiate(b, lambda)),
        Expression::Sub(a, b) => esub(differentiate(a, lambda), differentiate(b, lambda)),
        Expression::Mul(a, b) => eadd(
            emul(differentiate(a, lambda), (**b).clone()),
            emul((**a).clone(), differentiate(b, lambda)),
        ),
        Expression::Div(a, b) => ediv(
            esub(
                emul(differentiate(a, lambda), (**b).clone()),
                emul((**a).clone(), differentiate(b, lambda)),
            ),
            epow((**b).clone(), 2),
        ),
        Expression::Pow(a, k) => emul(
            emul(econst(rat_int(i64::from(*k))), epow((**a).clone(), k - 1)),
            differentiate(a, lambda),
        ),
    }
}

/// Plain evaluation at a rational point.
pub fn evaluate(e: &Expression, coords: &[Rational]) -> Result<Rational, EvalError> {
    match e {
        Expression::Const(c) => Ok(c.clone()),
        Expression::Var(i) => Ok(coords[*i].clone()),
        Expression::Neg(a) => Ok(-evaluate(a, coords)?),
        Expression::Add(a, b) => Ok(evaluate(a, coords)? + evaluate(b, coords)?),
        Expression::Sub(a, b) => Ok(evaluate(a, coords)? - evaluate(b, coords)?),
        Expression::Mul(a, b) => Ok(evaluate(a, coords)? * evaluate(b, coords)?),
        Expression::Div(a, b) => {
            let den = evaluate(b, coords)?;
            if den.is_zero() {
                return Err(EvalError::DivisionByZero);
            }
            Ok(evaluate(a, coords)? / den)
        }
        Expression::Pow(a, k) => {
            let base = evaluate(a, coords)?;
            let mut acc = rat_int(1);
            for _ in 0..*k {
                acc *= base.clone();
            }
            Ok(acc)
        }
    }
}

//! Arithmetic expressions in one variable `x`.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := ("-" | "+") unary | power
//! power  := atom ("^" unary)?
//! atom   := number | "x" | "pi" | "e" | func "(" expr ("," expr)* ")" | "(" expr ")"
//! func   := exp | log | ln | sqrt | abs | min | max
//! ```
//!
//! `Display` writes a fully parenthesized form that parses back to the same
//! tree.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arity(self) -> Option<usize> {
        match self {
            Func::Min | Func::Max => None,
            _ => Some(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Pi,
    E,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

pub fn parse_expression(source: &str) -> Result<Expr> {
    let mut p = Parser { src: source.as_bytes(), pos: 0 };
    p.skip_ws();
    if p.pos == p.src.len() {
        return Err(Error::Syntax { pos: 0, msg: "empty expression".into() });
    }
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(c) => Err(self.error(&format!("unexpected character `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let before = self.pos;
            digits(self);
            if self.pos == before {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| Error::Syntax { pos: start, msg: format!("malformed number `{text}`") })
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match name {
            "x" => return Ok(Expr::Var),
            "pi" => return Ok(Expr::Pi),
            "e" => return Ok(Expr::E),
            _ => {}
        }
        let Some(func) = Func::lookup(name) else {
            return Err(Error::UnknownIdentifier { pos: start, name: name.to_string() });
        };
        if !self.eat(b'(') {
            return Err(self.error(&format!("expected `(` after `{name}`")));
        }
        let mut args = vec![self.expr()?];
        while self.eat(b',') {
            args.push(self.expr()?);
        }
        if !self.eat(b')') {
            return Err(self.error("expected `)` or `,`"));
        }
        match func.arity() {
            Some(n) if args.len() != n => {
                Err(Error::Syntax { pos: start, msg: format!("`{name}` takes {n} argument") })
            }
            None if args.len() < 2 => {
                Err(Error::Syntax { pos: start, msg: format!("`{name}` takes at least 2 arguments") })
            }
            _ => Ok(Expr::Call(func, args)),
        }
    }
}

impl Expr {
    /// Evaluates at `x`; any non-finite intermediate is an error.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var => x,
            Expr::Pi => std::f64::consts::PI,
            Expr::E => std::f64::consts::E,
            Expr::Neg(e) => -e.eval(x)?,
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x)?, b.eval(x)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval(x)?;
                match f {
                    Func::Exp => a.exp(),
                    Func::Log => a.ln(),
                    Func::Sqrt => a.sqrt(),
                    Func::Abs => a.abs(),
                    Func::Min | Func::Max => {
                        let mut acc = a;
                        for e in &args[1..] {
                            let v = e.eval(x)?;
                            acc = if *f == Func::Min { acc.min(v) } else { acc.max(v) };
                        }
                        acc
                    }
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { x })
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var => f.write_str("x"),
            Expr::Pi => f.write_str("pi"),
            Expr::E => f.write_str("e"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {sym} {b})")
            }
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bimodal_example_value_at_zero() {
        let e = parse_expression("2048*(x-0.5)^2").unwrap();
        assert_eq!(e.eval(0.0).unwrap(), 512.0);
    }

    #[test]
    fn constant_is_constant() {
        let e = parse_expression("1").unwrap();
        for x in [0.0, 0.3, 1.0] {
            assert_eq!(e.eval(x).unwrap(), 1.0);
        }
    }

    #[test]
    fn eighth_power_at_one() {
        let e = parse_expression("(x-0.5)^8").unwrap();
        assert!((e.eval(1.0).unwrap() - 0.00390625).abs() < 1e-15);
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expression("-x^2 + 2^3^2 - 8/4/2").unwrap();
        // -(x^2) + 2^(3^2) - ((8/4)/2)
        assert_eq!(e.eval(3.0).unwrap(), -9.0 + 512.0 - 1.0);
        let e = parse_expression("2^-1").unwrap();
        assert_eq!(e.eval(0.0).unwrap(), 0.5);
    }

    #[test]
    fn functions_and_constants() {
        let e = parse_expression("exp(log(x)) + abs(-1) + min(x, 0.1, 5) + max(1, 2) + sqrt(4) + pi - e").unwrap();
        let want = 0.7 + 1.0 + 0.1 + 2.0 + 2.0 + std::f64::consts::PI - std::f64::consts::E;
        assert!((e.eval(0.7).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse_expression("1.5e-3").unwrap().eval(0.0).unwrap(), 1.5e-3);
        assert_eq!(parse_expression("2E2").unwrap().eval(0.0).unwrap(), 200.0);
        assert_eq!(parse_expression(".5").unwrap().eval(0.0).unwrap(), 0.5);
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_expression("2*(x-1") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("{other:?}"),
        }
        match parse_expression("1 + * 2") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expression("   "), Err(Error::Syntax { pos: 0, .. })));
        assert!(matches!(parse_expression("x y"), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse_expression("exp(1, 2)"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expression("min(1)"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn unknown_identifier() {
        match parse_expression("2*y + 1") {
            Err(Error::UnknownIdentifier { pos, name }) => {
                assert_eq!(pos, 2);
                assert_eq!(name, "y");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expression("sin(x)"), Err(Error::UnknownIdentifier { .. })));
    }

    #[test]
    fn domain_errors_are_reported() {
        let e = parse_expression("log(x)").unwrap();
        assert!(matches!(e.eval(0.0), Err(Error::NonFinite { .. })));
        assert!(matches!(e.eval(-1.0), Err(Error::NonFinite { .. })));
        let e = parse_expression("min(log(x - 2), 1)").unwrap();
        assert!(e.eval(0.5).is_err());
        let e = parse_expression("1/x").unwrap();
        assert!(e.eval(0.0).is_err());
    }

    #[test]
    fn display_round_trips() {
        for src in ["2048*(x-0.5)^2", "-x^-2", "max(x, 1e-300, 0.1)*exp(-(x-0.2)^2/0.005)", "1/3"] {
            let a = parse_expression(src).unwrap();
            let b = parse_expression(&a.to_string()).unwrap();
            assert_eq!(a, b, "{src}");
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn arb_expr() -> impl Strategy<Value = Expr> {
            let leaf = prop_oneof![(0.0f64..1e6).prop_map(Expr::Num), Just(Expr::Var), Just(Expr::Pi), Just(Expr::E),];
            leaf.prop_recursive(5, 48, 4, |inner| {
                let op = prop_oneof![
                    Just(BinOp::Add),
                    Just(BinOp::Sub),
                    Just(BinOp::Mul),
                    Just(BinOp::Div),
                    Just(BinOp::Pow)
                ];
                let unary = prop_oneof![Just(Func::Exp), Just(Func::Log), Just(Func::Sqrt), Just(Func::Abs)];
                prop_oneof![
                    inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                    (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| Expr::Bin(o, Box::new(a), Box::new(b))),
                    (unary, inner.clone()).prop_map(|(f, a)| Expr::Call(f, vec![a])),
                    prop::collection::vec(inner, 2..4).prop_map(|v| Expr::Call(Func::Max, v)),
                ]
            })
        }

        proptest! {
            #[test]
            fn parse_print_parse_is_identity(e in arb_expr()) {
                let printed = e.to_string();
                let back = parse_expression(&printed).unwrap();
                prop_assert_eq!(&back, &e);
                prop_assert_eq!(back.to_string(), printed);
            }

            #[test]
            fn evaluation_is_finite_or_error(e in arb_expr(), x in 0.0f64..=1.0) {
                if let Ok(v) = e.eval(x) {
                    prop_assert!(v.is_finite());
                }
            }
        }
    }
}

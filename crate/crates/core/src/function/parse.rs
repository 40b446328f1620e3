//! Recursive-descent parser for the expression mini-language.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := '-' factor | atom ('^' uint)?
//! atom   := number | 'x' | 'exp(' expr ')' | 'ln(' expr ')' | 'abs(' expr ')' | '(' expr ')'
//! ```
//!
//! Whitespace is insignificant. Numbers are unsigned decimals with an
//! optional exponent. Errors carry the byte offset of the offending token.

use crate::error::{Error, Result};

use super::expr::Expr;

pub fn parse_expression(text: &str) -> Result<Expr> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse { offset: self.pos, message: message.to_string() }
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

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let first = self.term()?;
        let mut terms = vec![first];
        loop {
            if self.eat(b'+') {
                terms.push(self.term()?);
            } else if self.eat(b'-') {
                terms.push(Expr::Neg(Box::new(self.term()?)));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Add(terms) })
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while self.eat(b'*') {
            let rhs = self.factor()?;
            lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.error("expected unsigned integer exponent"));
            }
            let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let p: u32 = digits.parse().map_err(|_| Error::Parse {
                offset: start,
                message: "exponent too large".into(),
            })?;
            return Ok(Expr::IntPow(Box::new(base), p));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let ident = &self.src[start..self.pos];
                let wrap: fn(Box<Expr>) -> Expr = match ident {
                    b"x" => return Ok(Expr::X),
                    b"exp" => Expr::Exp,
                    b"ln" => Expr::Ln,
                    b"abs" => Expr::Abs,
                    _ => {
                        self.pos = start;
                        return Err(self.error("unknown identifier"));
                    }
                };
                self.expect(b'(')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                Ok(wrap(Box::new(arg)))
            }
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut mantissa = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            mantissa += digits(self);
        }
        if mantissa == 0 {
            self.pos = start;
            return Err(self.error("malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
                return Err(self.error("malformed exponent"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| Error::Parse { offset: start, message: "malformed number".into() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_examples() {
        assert_eq!(parse_expression("x^2").unwrap(), Expr::X.powi(2));
        assert_eq!(
            parse_expression("exp(2*x)").unwrap(),
            Expr::Exp(Box::new(Expr::Mul(Box::new(Expr::Const(2.0)), Box::new(Expr::X))))
        );
        assert_eq!(parse_expression(" abs( x - 0.4 ) ").unwrap(), Expr::abs_shift(0.4));
        assert_eq!(parse_expression("1.5e-3").unwrap(), Expr::Const(1.5e-3));
        assert_eq!(parse_expression("-x^2").unwrap(), -(Expr::X.powi(2)));
    }

    #[test]
    fn reports_offsets() {
        assert_eq!(parse_expression("x^").unwrap_err(), Error::Parse {
            offset: 2,
            message: "expected unsigned integer exponent".into()
        });
        assert!(matches!(parse_expression("exp(x"), Err(Error::Parse { offset: 5, .. })));
        assert!(matches!(parse_expression("sin(x)"), Err(Error::Parse { offset: 0, .. })));
        assert!(matches!(parse_expression("x + "), Err(Error::Parse { offset: 4, .. })));
        assert!(matches!(parse_expression("2e"), Err(Error::Parse { offset: 1, .. })));
        assert!(matches!(parse_expression("x)"), Err(Error::Parse { offset: 1, .. })));
        assert!(matches!(parse_expression(""), Err(Error::Parse { offset: 0, .. })));
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            Just(Expr::X),
            (0.0f64..1e6).prop_map(Expr::Const),
            (0u32..4).prop_map(|p| Expr::Const(10f64.powi(-(p as i32) * 7))),
        ];
        leaf.prop_recursive(4, 32, 4, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Add),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
                inner.clone().prop_map(|e| -e),
                (inner.clone(), 0u32..5).prop_map(|(e, p)| e.powi(p)),
                inner.clone().prop_map(Expr::exp),
                inner.clone().prop_map(Expr::ln),
                inner.prop_map(Expr::abs),
            ]
        })
    }

    proptest! {
        #[test]
        fn canonical_printer_round_trips(e in arb_expr()) {
            let text = e.to_string();
            let back = parse_expression(&text).unwrap();
            prop_assert_eq!(back, e, "text = {}", text);
        }
    }
}

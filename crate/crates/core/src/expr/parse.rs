use super::ast::{Expr, Func};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(Tok, usize)> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            self.pos += 1;
            return Ok((t, start));
        }
        if c.is_ascii_digit() || c == b'.' {
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.') {
                self.pos += 1;
            }
            // exponent part: 1e-3, 2.5E4
            if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
                let save = self.pos;
                self.pos += 1;
                if self.pos < bytes.len() && (bytes[self.pos] == b'+' || bytes[self.pos] == b'-') {
                    self.pos += 1;
                }
                if self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                    while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                } else {
                    self.pos = save;
                }
            }
            let text = &self.src[start..self.pos];
            return text
                .parse::<f64>()
                .map(|v| (Tok::Num(v), start))
                .map_err(|_| Error::Syntax {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                });
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        Err(Error::Syntax {
            offset: start,
            message: format!("unexpected character `{}`", c as char),
        })
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    offset: usize,
    params: usize,
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<()> {
        let (t, o) = self.lexer.next()?;
        self.tok = t;
        self.offset = o;
        Ok(())
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            offset: self.offset,
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.tok {
                Tok::Plus => {
                    self.bump()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.tok {
                Tok::Star => {
                    self.bump()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.tok == Tok::Minus {
            self.bump()?;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let mut base = self.primary()?;
        while self.tok == Tok::Caret {
            self.bump()?;
            let negative = if self.tok == Tok::Minus {
                self.bump()?;
                true
            } else {
                false
            };
            let Tok::Num(n) = self.tok else {
                return self.syntax("exponent must be an integer literal");
            };
            if n.fract() != 0.0 || n.abs() > f64::from(i32::MAX) {
                return self.syntax("exponent must be an integer literal");
            }
            self.bump()?;
            let n = n as i32;
            base = Expr::Pow(Box::new(base), if negative { -n } else { n });
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Expr::Const(v))
            }
            Tok::LParen => {
                self.bump()?;
                let e = self.expr()?;
                if self.tok != Tok::RParen {
                    return self.syntax("expected `)`");
                }
                self.bump()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let at = self.offset;
                self.bump()?;
                if let Some(func) = Func::from_name(&name) {
                    if self.tok != Tok::LParen {
                        return self.syntax(format!("expected `(` after `{name}`"));
                    }
                    self.bump()?;
                    let arg = self.expr()?;
                    if self.tok != Tok::RParen {
                        return self.syntax("expected `)`");
                    }
                    self.bump()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                match name.as_str() {
                    "pi" => return Ok(Expr::Const(std::f64::consts::PI)),
                    "e" => return Ok(Expr::Const(std::f64::consts::E)),
                    _ => {}
                }
                if let Some(index) = name.strip_prefix('y').and_then(|d| d.parse::<usize>().ok()) {
                    if index < self.params {
                        return Ok(Expr::Param(index));
                    }
                }
                Err(Error::UnknownIdentifier { name, offset: at })
            }
            Tok::End => self.syntax("unexpected end of input"),
            other => self.syntax(format!("unexpected token {other:?}")),
        }
    }
}

/// Parses `src` allowing parameters `y0 .. y{params-1}`.
pub fn parse_with_params(src: &str, params: usize) -> Result<Expr> {
    if src.trim().is_empty() {
        return Err(Error::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let mut p = Parser {
        lexer: Lexer { src, pos: 0 },
        tok: Tok::End,
        offset: 0,
        params,
    };
    p.bump()?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return p.syntax("trailing input");
    }
    Ok(e)
}

/// Parses `src` with an unrestricted parameter count.
pub fn parse(src: &str) -> Result<Expr> {
    parse_with_params(src, usize::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(i: usize) -> Box<Expr> {
        Box::new(Expr::Param(i))
    }

    #[test]
    fn square_of_parameter() {
        assert_eq!(parse("y0^2").unwrap(), Expr::Pow(p(0), 2));
    }

    #[test]
    fn product_of_calls() {
        assert_eq!(
            parse("sin(y0)*cos(y1)").unwrap(),
            Expr::Mul(
                Box::new(Expr::Call(Func::Sin, p(0))),
                Box::new(Expr::Call(Func::Cos, p(1)))
            )
        );
    }

    #[test]
    fn incomplete_input_reports_offset() {
        match parse("y0 +") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn power_binds_tighter_than_negation() {
        assert_eq!(parse("-y0^2").unwrap(), Expr::Neg(Box::new(Expr::Pow(p(0), 2))));
    }

    #[test]
    fn precedence_of_sum_and_product() {
        assert_eq!(
            parse("y0 + 2*y1").unwrap(),
            Expr::Add(p(0), Box::new(Expr::Mul(Box::new(Expr::Const(2.0)), p(1))))
        );
    }

    #[test]
    fn unknown_identifiers() {
        assert!(matches!(parse("foo(y0)"), Err(Error::UnknownIdentifier { offset: 0, .. })));
        assert!(matches!(
            parse_with_params("y0 + y3", 2),
            Err(Error::UnknownIdentifier { offset: 5, .. })
        ));
    }

    #[test]
    fn fractional_exponent_rejected() {
        assert!(matches!(parse("y0^0.5"), Err(Error::Syntax { offset: 3, .. })));
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse("1.5e-3").unwrap(), Expr::Const(1.5e-3));
    }
}

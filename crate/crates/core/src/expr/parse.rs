use super::{BinaryOp, Expr, Scope, UnaryOp};
use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
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

fn syntax(offset: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { offset, message: message.into() }
}

fn tokenize(source: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let token = match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'+' => Token::Plus,
            b'-' => Token::Minus,
            b'*' => Token::Star,
            b'/' => Token::Slash,
            b'^' => Token::Caret,
            b'(' => Token::LParen,
            b')' => Token::RParen,
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
                let text = &source[start..i];
                let value: f64 = text
                    .parse()
                    .map_err(|_| syntax(start, format!("malformed number `{text}`")))?;
                if !value.is_finite() {
                    return Err(syntax(start, format!("number `{text}` out of range")));
                }
                tokens.push((Token::Number(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                tokens.push((Token::Ident(source[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = source[start..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character `{ch}`")));
            }
        };
        tokens.push((token, start));
        i += 1;
    }
    tokens.push((Token::End, source.len()));
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    scope: &'a Scope,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.advance();
            Ok(())
        } else {
            Err(syntax(self.offset(), format!("expected {what}")))
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Token::Plus => BinaryOp::Add,
                Token::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.product()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Token::Star => BinaryOp::Mul,
                Token::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Token::Minus {
            self.advance();
            let operand = self.unary()?;
            // A negated numeric literal is itself a literal, so `x^-2` keeps
            // an integer exponent.
            return Ok(match operand {
                Expr::Const(c) => Expr::Const(-c),
                other => Expr::Unary(UnaryOp::Neg, Box::new(other)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Token::Caret {
            self.advance();
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.advance() {
            Token::Number(v) => Ok(Expr::Const(v)),
            Token::LParen => {
                let inner = self.sum()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            Token::Ident(name) => {
                if *self.peek() == Token::LParen {
                    let op = UnaryOp::from_function_name(&name).ok_or_else(|| {
                        syntax(offset, format!("unknown function `{name}`"))
                    })?;
                    self.advance();
                    let arg = self.sum()?;
                    self.expect(Token::RParen, "`)` after function argument")?;
                    return Ok(Expr::Unary(op, Box::new(arg)));
                }
                if let Some(index) = self.scope.state_index(&name) {
                    Ok(Expr::Var { name: name.as_str().into(), index })
                } else if self.scope.is_param(&name) {
                    Ok(Expr::Param(name.as_str().into()))
                } else {
                    Err(ParseError::UnknownIdentifier { name, offset })
                }
            }
            Token::End => Err(syntax(offset, "unexpected end of input")),
            other => Err(syntax(offset, format!("unexpected token {other:?}"))),
        }
    }
}

/// Parse `source` against the names declared in `scope`.
pub fn parse_expression(source: &str, scope: &Scope) -> Result<Expr, ParseError> {
    let tokens = tokenize(source)?;
    if tokens.len() == 1 {
        return Err(syntax(0, "empty expression"));
    }
    let mut parser = Parser { tokens, pos: 0, scope };
    let expr = parser.sum()?;
    if *parser.peek() != Token::End {
        return Err(syntax(parser.offset(), "unexpected trailing input"));
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    #[test]
    fn parses_example_field() {
        let scope = Scope::new(&["x"], &["A"]);
        let e = parse_expression("x^2 - A^2", &scope).unwrap();
        let expected = bin(
            BinaryOp::Sub,
            bin(BinaryOp::Pow, Expr::var("x", 0), Expr::Const(2.0)),
            bin(BinaryOp::Pow, Expr::param("A"), Expr::Const(2.0)),
        );
        assert_eq!(e, expected);
        assert_eq!(parse_expression("x", &scope).unwrap(), Expr::var("x", 0));
    }

    #[test]
    fn unknown_identifier_names_offender() {
        let scope = Scope::new(&["x"], &["A"]);
        let err = parse_expression("x^2 - B^2", &scope).unwrap_err();
        assert_eq!(err, ParseError::UnknownIdentifier { name: "B".into(), offset: 6 });
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let scope = Scope::new(&["x"], &[] as &[&str]);
        assert_eq!(parse_expression("x + * 2", &scope).unwrap_err().offset(), 4);
        assert_eq!(parse_expression("(x + 2", &scope).unwrap_err().offset(), 6);
        assert_eq!(parse_expression("x $ 2", &scope).unwrap_err().offset(), 2);
        assert_eq!(parse_expression("x 2", &scope).unwrap_err().offset(), 2);
        assert_eq!(parse_expression("foo(x)", &scope).unwrap_err().offset(), 0);
        assert!(parse_expression("   ", &scope).is_err());
        assert!(parse_expression("1e400", &scope).is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        let scope = Scope::new(&["x"], &[] as &[&str]);
        let p = crate::system::ParameterSet::default();
        let eval = |s: &str, x: f64| parse_expression(s, &scope).unwrap().evaluate(&[x], &p).unwrap();
        assert_eq!(eval("-x^2", 3.0), -9.0);
        assert_eq!(eval("2^3^2", 0.0), 512.0);
        assert_eq!(eval("8/4/2", 0.0), 1.0);
        assert_eq!(eval("1 - 2 - 3", 0.0), -4.0);
        assert_eq!(eval("2*-x", 3.0), -6.0);
        assert_eq!(eval("2^-1", 0.0), 0.5);
        assert_eq!(eval("1.5e1 + .5", 0.0), 15.5);
        assert_eq!(eval("abs(-x) + sign(x)", -2.0), 1.0);
    }
}

//! Tiny expression grammar for custom coefficient fields in run configs.
//!
//! Supported: floating literals, the variables declared at parse time
//! (`x` for scalar fields, `x` and `y` for kernels, `u` for difference
//! kernels), `+ - * / ^` with integer exponents, parentheses, and the
//! functions `sqrt`, `coth`, `abs`, `min`, `max`. This keeps config files
//! portable: no user-supplied native callbacks.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Sqrt(Box<Expr>),
    Coth(Box<Expr>),
    Abs(Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Parse `text` over the given variable names (e.g. `&["x", "y"]`).
    pub fn parse(text: &str, vars: &[&str]) -> Result<Expr> {
        let tokens = lex(text)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            vars: vars.iter().map(|s| s.to_string()).collect(),
        };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Expr(format!(
                "unexpected trailing input at token {} in `{text}`",
                p.pos
            )));
        }
        Ok(e)
    }

    pub fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Expr::Num(c) => *c,
            Expr::Var(i) => vars[*i],
            Expr::Neg(a) => -a.eval(vars),
            Expr::Add(a, b) => a.eval(vars) + b.eval(vars),
            Expr::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Expr::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Expr::Div(a, b) => a.eval(vars) / b.eval(vars),
            Expr::Pow(a, n) => a.eval(vars).powi(*n),
            Expr::Sqrt(a) => a.eval(vars).sqrt(),
            Expr::Coth(a) => {
                let v = a.eval(vars);
                1.0 / v.tanh()
            }
            Expr::Abs(a) => a.eval(vars).abs(),
            Expr::Min(a, b) => a.eval(vars).min(b.eval(vars)),
            Expr::Max(a, b) => a.eval(vars).max(b.eval(vars)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
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
    Comma,
}

fn lex(text: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            ',' => {
                out.push(Tok::Comma);
                i += 1;
            }
            _ if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < bytes.len() {
                    let d = bytes[i] as char;
                    if d.is_ascii_digit() || d == '.' {
                        i += 1;
                    } else if (d == 'e' || d == 'E')
                        && i + 1 < bytes.len()
                        && ((bytes[i + 1] as char).is_ascii_digit()
                            || bytes[i + 1] == b'+'
                            || bytes[i + 1] == b'-')
                    {
                        i += 2;
                    } else {
                        break;
                    }
                }
                let s = &text[start..i];
                let v: f64 = s
                    .parse()
                    .map_err(|_| Error::Expr(format!("bad number `{s}`")))?;
                out.push(Tok::Num(v));
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push(Tok::Ident(text[start..i].to_string()));
            }
            _ => return Err(Error::Expr(format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
    vars: Vec<String>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        match self.bump() {
            Some(ref got) if *got == t => Ok(()),
            got => Err(Error::Expr(format!("expected {t:?}, got {got:?}"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if let Some(Tok::Minus) = self.peek() {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            let neg = if let Some(Tok::Minus) = self.peek() {
                self.pos += 1;
                true
            } else {
                false
            };
            match self.bump() {
                Some(Tok::Num(v)) if v.fract() == 0.0 && v.abs() < 1e9 => {
                    let n = v as i32;
                    return Ok(Expr::Pow(Box::new(base), if neg { -n } else { n }));
                }
                t => {
                    return Err(Error::Expr(format!(
                        "exponent must be an integer literal, got {t:?}"
                    )))
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if let Some(Tok::LParen) = self.peek() {
                    self.pos += 1;
                    let a = self.expr()?;
                    match name.as_str() {
                        "sqrt" | "coth" | "abs" => {
                            self.expect(Tok::RParen)?;
                            let a = Box::new(a);
                            Ok(match name.as_str() {
                                "sqrt" => Expr::Sqrt(a),
                                "coth" => Expr::Coth(a),
                                _ => Expr::Abs(a),
                            })
                        }
                        "min" | "max" => {
                            self.expect(Tok::Comma)?;
                            let b = self.expr()?;
                            self.expect(Tok::RParen)?;
                            Ok(if name == "min" {
                                Expr::Min(Box::new(a), Box::new(b))
                            } else {
                                Expr::Max(Box::new(a), Box::new(b))
                            })
                        }
                        _ => Err(Error::Expr(format!("unknown function `{name}`"))),
                    }
                } else if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    Ok(Expr::Var(i))
                } else {
                    Err(Error::Expr(format!(
                        "unknown variable `{name}` (allowed: {})",
                        self.vars.join(", ")
                    )))
                }
            }
            t => Err(Error::Expr(format!("unexpected token {t:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, x: f64) -> f64 {
        Expr::parse(src, &["x"]).unwrap().eval(&[x])
    }

    #[test]
    fn polynomials_and_precedence() {
        assert_eq!(ev("1 + 2*x - x^2", 3.0), 1.0 + 6.0 - 9.0);
        assert_eq!(ev("-x^2", 2.0), -4.0);
        assert_eq!(ev("(1 + x)^3", 1.0), 8.0);
        assert_eq!(ev("2/x", 4.0), 0.5);
    }

    #[test]
    fn functions() {
        assert_eq!(ev("sqrt(max(x, 0))", -1.0), 0.0);
        assert_eq!(ev("2*sqrt(abs(x))", -4.0), 4.0);
        let c = ev("coth(x)", 1.0);
        assert!((c - 1.0 / 1.0f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn two_variables() {
        let e = Expr::parse("x*(1-y) + y*(1-x)", &["x", "y"]).unwrap();
        assert_eq!(e.eval(&[0.25, 0.5]), 0.25 * 0.5 + 0.5 * 0.75);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Expr::parse("x +", &["x"]).is_err());
        assert!(Expr::parse("foo(x)", &["x"]).is_err());
        assert!(Expr::parse("x y", &["x"]).is_err());
        assert!(Expr::parse("z", &["x"]).is_err());
        assert!(Expr::parse("x^1.5", &["x"]).is_err());
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(ev("1e-3 + x", 0.0), 1e-3);
        assert_eq!(ev("2.5E+2", 0.0), 250.0);
    }
}

//! Text syntax for polynomials and polyvector fields, e.g. `x^2*y - 3/2*z` and
//! `x*dx^dy + 2*dy^dz`. Variables are named as in [`var_name`]; `∂` and `∧` are
//! accepted for `d` and `^` in wedge factors.

use super::types::*;
use crate::error::{Error, Result};
use crate::rational::{parse_q, Q};

struct Lexer<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
    dim: usize,
}

/// One factor of a term: a coefficient, a power of a variable or a wedge of `∂_i`.
enum Factor {
    Coeff(Q),
    Var(usize, u32),
    Wedge(Vec<usize>),
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, dim: usize) -> Self {
        Lexer { src, chars: src.char_indices().collect(), pos: 0, dim }
    }

    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at column {} of {:?}", self.pos + 1, self.src))
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn digits(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            s.push(c);
            self.pos += 1;
        }
        s
    }

    fn variable(&mut self) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        let mut name = String::new();
        while let Some(c) = self.peek().filter(|c| c.is_ascii_alphanumeric()) {
            name.push(c);
            self.pos += 1;
        }
        (0..self.dim).find(|&i| var_name(self.dim, i) == name).ok_or_else(|| {
            self.pos = start;
            self.err(&format!("unknown variable {name:?}"))
        })
    }

    fn factor(&mut self) -> Result<Factor> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let n = self.digits();
                let text = if self.eat('/') {
                    self.skip_ws();
                    let d = self.digits();
                    if d.is_empty() {
                        return Err(self.err("expected a denominator"));
                    }
                    format!("{n}/{d}")
                } else {
                    n
                };
                let q = parse_q(&text).map_err(|_| self.err("zero denominator"))?;
                Ok(Factor::Coeff(q))
            }
            Some('d') | Some('∂') => {
                let mut idx = vec![];
                loop {
                    self.skip_ws();
                    if !matches!(self.peek(), Some('d') | Some('∂')) {
                        return Err(self.err("expected a differential"));
                    }
                    self.pos += 1;
                    idx.push(self.variable()?);
                    if !(self.eat('^') || self.eat('∧')) {
                        break;
                    }
                }
                Ok(Factor::Wedge(idx))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let i = self.variable()?;
                let e = if self.eat('^') {
                    self.skip_ws();
                    let d = self.digits();
                    d.parse().map_err(|_| self.err("expected an exponent"))?
                } else {
                    1
                };
                Ok(Factor::Var(i, e))
            }
            _ => Err(self.err("expected a number, variable or differential")),
        }
    }

    /// `(coefficient, monomial, wedge)`; `None` for the wedge means a function term.
    fn term(&mut self) -> Result<(Q, Monomial, Option<Vec<usize>>)> {
        let mut c = Q::from_integer(1.into());
        let mut m = vec![0; self.dim];
        let mut wedge: Option<Vec<usize>> = None;
        loop {
            match self.factor()? {
                Factor::Coeff(x) => c *= x,
                Factor::Var(i, e) => m[i] += e,
                Factor::Wedge(idx) => {
                    if wedge.is_some() {
                        return Err(self.err("a term may contain only one wedge of differentials"));
                    }
                    wedge = Some(idx);
                }
            }
            if !self.eat('*') {
                self.skip_ws();
                if self.peek().is_some_and(|c| c.is_alphanumeric() || c == '∂') {
                    continue;
                }
                break;
            }
        }
        Ok((c, m, wedge))
    }

    fn expression(&mut self) -> Result<Vec<(Q, Monomial, Option<Vec<usize>>)>> {
        let mut out = vec![];
        let mut neg = self.eat('-');
        if !neg {
            self.eat('+');
        }
        loop {
            let (c, m, w) = self.term()?;
            out.push((if neg { -c } else { c }, m, w));
            if self.eat('+') {
                neg = false;
            } else if self.eat('-') {
                neg = true;
            } else {
                break;
            }
        }
        self.skip_ws();
        if self.pos < self.chars.len() {
            return Err(self.err("unexpected character"));
        }
        Ok(out)
    }
}

pub fn parse_poly(dim: usize, s: &str) -> Result<Poly> {
    let mut lx = Lexer::new(s, dim);
    let mut p = Poly::new();
    for (c, m, w) in lx.expression()? {
        if w.is_some() {
            return Err(Error::Parse(format!("differentials are not allowed in a polynomial: {s:?}")));
        }
        poly_add_term(&mut p, m, c);
    }
    Ok(p)
}

/// All terms must carry a wedge of the same length, which becomes the arity.
pub fn parse_polyvector(dim: usize, s: &str) -> Result<PolyVectorField> {
    let mut lx = Lexer::new(s, dim);
    let terms = lx.expression()?;
    let arity = terms.first().and_then(|t| t.2.as_ref()).map_or(0, Vec::len);
    let mut p = PolyVectorField::zero(dim, arity);
    for (c, m, w) in terms {
        let w = w.unwrap_or_default();
        if w.len() != arity {
            return Err(Error::Parse(format!("mixed arities in polyvector {s:?}")));
        }
        p.add_term(m, &w, c);
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    #[test]
    fn polynomials() {
        let p = parse_poly(2, "x^2*y - 3/2 y + 1").unwrap();
        let expected: Poly = [(vec![2, 1], q(1)), (vec![0, 1], qf(-3, 2)), (vec![0, 0], q(1))].into_iter().collect();
        assert_eq!(p, expected);
        assert!(parse_poly(2, "x + z").is_err());
        assert!(parse_poly(2, "x +").is_err());
        assert!(parse_poly(2, "dx").is_err());
    }

    #[test]
    fn bivectors() {
        let p = parse_polyvector(2, "dx^dy").unwrap();
        assert_eq!(p, PolyVectorField::term(2, vec![0, 0], &[0, 1], q(1)));
        let p = parse_polyvector(2, "x*∂y∧∂x").unwrap();
        assert_eq!(p, PolyVectorField::term(2, vec![1, 0], &[0, 1], q(-1)));
        let p = parse_polyvector(3, "x dy^dz + y*dx^dy").unwrap();
        assert_eq!(p.terms.len(), 2);
        assert!(parse_polyvector(2, "dx^dy + dx").is_err());
        assert!(parse_polyvector(2, "dx^dx").unwrap().is_zero());
    }

    #[test]
    fn error_positions() {
        let Err(Error::Parse(msg)) = parse_poly(2, "x*q") else { panic!() };
        assert!(msg.contains("column 3"), "{msg}");
    }
}

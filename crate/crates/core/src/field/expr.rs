//! Element syntax for field models: integers, series variables, `g` (the
//! primitive element of a finite ground field), `+ - * /`, integer powers
//! `^k` and parentheses. For example `1+t`, `-1/3`, `t*u^-2`, `g^3`.

use num_bigint::BigInt;

use super::{FieldElement, FieldError, FieldModel};
use crate::units::parse_bigint;

pub fn parse_element(model: &FieldModel, text: &str) -> Result<FieldElement, FieldError> {
    let mut p = ElemParser { model, text, pos: 0 };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(v)
}

struct ElemParser<'a> {
    model: &'a FieldModel,
    text: &'a str,
    pos: usize,
}

impl<'a> ElemParser<'a> {
    fn err(&self, msg: &str) -> FieldError {
        FieldError::Parse { text: self.text.to_string(), msg: format!("{msg} at offset {}", self.pos) }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<FieldElement, FieldError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = self.model.add(&acc, &self.term()?);
            } else if self.eat('-') {
                acc = self.model.sub(&acc, &self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<FieldElement, FieldError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                acc = self.model.mul(&acc, &self.factor()?);
            } else if self.eat('/') {
                acc = self.model.div(&acc, &self.factor()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<FieldElement, FieldError> {
        if self.eat('-') {
            let f = self.factor()?;
            return Ok(self.model.neg(&f));
        }
        let base = self.atom()?;
        if self.eat('^') {
            let neg = self.eat('-');
            let k = self.integer()?;
            let k = i64::try_from(&k).map_err(|_| self.err("exponent too large"))?;
            return self.model.pow(&base, if neg { -k } else { k });
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigInt, FieldError> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest.chars().take_while(|c| c.is_ascii_digit()).count();
        if len == 0 {
            return Err(self.err("expected an integer"));
        }
        let v = parse_bigint(&rest[..len]).ok_or_else(|| self.err("malformed integer"))?;
        self.pos += len;
        Ok(v)
    }

    fn atom(&mut self) -> Result<FieldElement, FieldError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(self.model.from_bigint(&n))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let rest = &self.text[self.pos..];
                let len = rest.chars().take_while(|c| c.is_ascii_alphabetic()).count();
                let name = &rest[..len];
                let start = self.pos;
                self.pos += len;
                if let Some(v) = self.model.variable(name) {
                    return Ok(v);
                }
                if name == "g" {
                    if let Some(g) = self.model.generator_element() {
                        return Ok(g);
                    }
                }
                self.pos = start;
                Err(self.err(&format!("unknown name '{name}' in {}", self.model.name())))
            }
            _ => Err(self.err("expected a number, a variable or '('")),
        }
    }
}

//! Recursive-descent parser for the textual pair grammar:
//!
//! ```text
//! expr     := term ("*" term)*
//! term     := "triv" | "E" | "Z" "(" rational ")" | "padic" "(" keyvals ")"
//!           | "ext" "(" nat "," expr ")" | "(" expr ")"
//! rational := integer | integer "/" integer
//! ```
//!
//! Every block is validated as soon as it is read so errors carry the byte
//! offset of the offending term.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::pair::{Ambient, DemuskinCase, FExponent, PAdicBlock, PairError, PairExpr};
use crate::units::{parse_bigint, PAdicUnit};

/// Parses and validates a pair expression.
pub fn parse_pair(text: &str, amb: &Ambient) -> Result<PairExpr, PairError> {
    let mut p = Parser { src: text, pos: 0, amb: *amb };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.syntax(format!("unexpected trailing input '{}'", &text[p.pos..])));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    amb: Ambient,
}

impl<'a> Parser<'a> {
    fn syntax(&self, msg: impl Into<String>) -> PairError {
        PairError::Syntax { pos: self.pos, msg: msg.into() }
    }

    fn invalid(&self, at: usize, msg: impl Into<String>) -> PairError {
        PairError::Validation { pos: Some(at), msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), PairError> {
        if self.eat(c) {
            Ok(())
        } else {
            let found = self.peek().map(|c| format!("'{c}'")).unwrap_or_else(|| "end of input".into());
            Err(self.syntax(format!("expected '{c}', found {found}")))
        }
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .char_indices()
            .find(|&(i, c)| !(c.is_ascii_alphabetic() || c == '_' || (i > 0 && c.is_ascii_digit())))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        if len == 0 {
            return None;
        }
        self.pos += len;
        Some(&rest[..len])
    }

    fn integer(&mut self) -> Result<BigInt, PairError> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let mut len = 0;
        if rest.starts_with(['-', '+']) {
            len = 1;
        }
        let digits = rest[len..].chars().take_while(|c| c.is_ascii_digit()).count();
        if digits == 0 {
            return Err(self.syntax("expected an integer"));
        }
        len += digits;
        let v = parse_bigint(&rest[..len]).ok_or_else(|| self.syntax("malformed integer"))?;
        self.pos += len;
        Ok(v)
    }

    fn nat_u64(&mut self, what: &str) -> Result<u64, PairError> {
        let at = self.pos;
        let v = self.integer()?;
        v.to_u64().ok_or_else(|| self.invalid(at, format!("{what} must be a non-negative machine integer, got {v}")))
    }

    fn expr(&mut self) -> Result<PairExpr, PairError> {
        let mut factors = vec![self.term()?];
        while self.eat('*') {
            factors.push(self.term()?);
        }
        Ok(if factors.len() == 1 { factors.pop().expect("one factor") } else { PairExpr::FreeProd(factors) })
    }

    fn term(&mut self) -> Result<PairExpr, PairError> {
        if self.eat('(') {
            let e = self.expr()?;
            self.expect(')')?;
            return Ok(e);
        }
        self.skip_ws();
        let start = self.pos;
        let Some(word) = self.ident() else {
            return Err(self.syntax("expected a term (triv, E, Z(..), padic(..), ext(..) or '(')"));
        };
        match word {
            "triv" => Ok(PairExpr::Trivial),
            "E" => {
                if self.amb.p != 2 {
                    return Err(self.invalid(start, format!("E requires p = 2, ambient p = {}", self.amb.p)));
                }
                Ok(PairExpr::E)
            }
            "Z" => {
                self.expect('(')?;
                let num = self.integer()?;
                let den = if self.eat('/') { self.integer()? } else { BigInt::from(1) };
                if den.is_zero() {
                    return Err(self.invalid(start, "zero denominator"));
                }
                self.expect(')')?;
                let u = PAdicUnit::from_rational(self.amb.p, &num, &den, self.amb.precision)
                    .map_err(|e| self.invalid(start, e.to_string()))?;
                Ok(PairExpr::Z(u))
            }
            "padic" => self.padic(start),
            "ext" => {
                self.expect('(')?;
                let at = self.pos;
                let m = self.nat_u64("extension rank")?;
                if m == 0 || m > u32::MAX as u64 {
                    return Err(self.invalid(at, format!("extension rank must be >= 1, got {m}")));
                }
                self.expect(',')?;
                let base = self.expr()?;
                self.expect(')')?;
                Ok(PairExpr::Ext(m as u32, Box::new(base)))
            }
            other => {
                self.pos = start;
                Err(self.syntax(format!("unknown term '{other}'")))
            }
        }
    }

    fn padic(&mut self, start: usize) -> Result<PairExpr, PairError> {
        self.expect('(')?;
        let mut n = None;
        let mut q = None;
        let mut case = None;
        let mut f = None;
        let mut s = None;
        if self.peek() != Some(')') {
            loop {
                let at = self.pos;
                let key = self.ident().ok_or_else(|| self.syntax("expected a key (n, q, case, f, s)"))?;
                self.expect('=')?;
                let dup = match key {
                    "n" => n.replace(self.nat_u64("n")?).is_some(),
                    "q" => q.replace(self.nat_u64("q")?).is_some(),
                    "s" => s.replace(self.nat_u64("s")?).is_some(),
                    "case" => {
                        let vat = self.pos;
                        let word = self.ident().ok_or_else(|| self.syntax("expected I, II, III or IV"))?;
                        let c: DemuskinCase = word.parse().map_err(|m: String| self.invalid(vat, m))?;
                        case.replace(c).is_some()
                    }
                    "f" => {
                        let v = if self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
                            let vat = self.pos;
                            match self.ident() {
                                Some("inf") => FExponent::Infinite,
                                _ => return Err(self.invalid(vat, "f must be an integer or 'inf'")),
                            }
                        } else {
                            let vat = self.pos;
                            let k = self.nat_u64("f")?;
                            FExponent::Finite(u32::try_from(k).map_err(|_| self.invalid(vat, "f too large"))?)
                        };
                        f.replace(v).is_some()
                    }
                    other => return Err(self.invalid(at, format!("unknown padic parameter '{other}'"))),
                };
                if dup {
                    return Err(self.invalid(at, format!("parameter '{key}' given twice")));
                }
                if !self.eat(',') {
                    break;
                }
            }
        }
        self.expect(')')?;

        let n = n.ok_or_else(|| self.invalid(start, "padic block requires n"))?;
        let n = u32::try_from(n).map_err(|_| self.invalid(start, "n too large"))?;
        let case = match case {
            Some(c) => c,
            None => match q {
                Some(q) if q != 2 => DemuskinCase::I,
                _ if self.amb.p == 2 && n % 2 == 1 => DemuskinCase::II,
                _ => return Err(self.invalid(start, "padic block requires case (cannot be inferred)")),
            },
        };
        let q = match (q, case) {
            (Some(q), _) => q,
            (None, DemuskinCase::I) => return Err(self.invalid(start, "case I block requires q")),
            (None, _) => 2,
        };
        let level = match s {
            Some(s) => Some(u32::try_from(s).map_err(|_| self.invalid(start, "s too large"))?),
            None if self.amb.p == 2 => Some(PAdicBlock::expected_level(case)),
            None => None,
        };
        let block = PAdicBlock { n, q, case, f, level };
        block.validate(self.amb.p).map_err(|m| self.invalid(start, m))?;
        Ok(PairExpr::PAdic(block))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amb(p: u64) -> Ambient {
        Ambient::new(p, 64).unwrap()
    }

    #[test]
    fn parses_free_product_with_extension() {
        let a = amb(2);
        let e = parse_pair("E * ext(1, Z(5))", &a).unwrap();
        let z5 = PairExpr::Z(a.unit(5, 1).unwrap());
        assert_eq!(e, PairExpr::FreeProd(vec![PairExpr::E, PairExpr::ext(1, z5)]));
    }

    #[test]
    fn parses_dyadic_block() {
        let e = parse_pair("padic(n=3, case=II, f=2, s=4)", &amb(2)).unwrap();
        assert_eq!(e, PairExpr::dyadic_block());
        assert_eq!(parse_pair("padic(n=3,f=2)", &amb(2)).unwrap(), e);
    }

    #[test]
    fn rejects_e_for_odd_prime() {
        match parse_pair("  E", &amb(3)) {
            Err(PairError::Validation { pos: Some(2), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_have_offsets() {
        match parse_pair("E * ", &amb(2)) {
            Err(PairError::Syntax { pos: 4, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_pair("ext(1 E)", &amb(2)), Err(PairError::Syntax { .. })));
        assert!(matches!(parse_pair("Z(2)", &amb(2)), Err(PairError::Validation { .. })));
        assert!(matches!(parse_pair("Z(1/2)", &amb(2)), Err(PairError::Validation { .. })));
        assert!(matches!(parse_pair("padic(n=3,n=3,f=2)", &amb(2)), Err(PairError::Validation { .. })));
    }

    #[test]
    fn rationals_and_parentheses() {
        let a = amb(2);
        let e = parse_pair("(Z(-1/3) * triv) * Z(5)", &a).unwrap();
        match e {
            PairExpr::FreeProd(fs) => {
                assert_eq!(fs.len(), 2);
                assert!(matches!(fs[0], PairExpr::FreeProd(_)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn render_round_trips() {
        let a = amb(2);
        for text in ["E * ext(1, Z(5))", "ext(2, padic(n=4,case=III,f=inf)) * Z(-1/3)", "(E * E) * triv"] {
            let e = parse_pair(text, &a).unwrap();
            assert_eq!(parse_pair(&e.render(), &a).unwrap(), e, "{text}");
        }
        let a3 = amb(3);
        let e = parse_pair("ext(3, padic(n=4, q=9) * Z(4))", &a3).unwrap();
        assert_eq!(parse_pair(&e.render(), &a3).unwrap(), e);
    }
}

//! Scalar expressions accepted wherever a config expects a number.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | '+' unary | power
//! power  := atom 'i'?               -- a trailing `i` multiplies by the imaginary unit
//! atom   := number | 'i' | 'pi' | 'inf' | 'sqrt' '(' expr ')' | '(' expr ')'
//! ```
//!
//! So `3i`, `1.5*sqrt(3)i`, `0.5-2i`, `pi/2` and `inf` all parse.

use num_complex::Complex64 as C64;

pub fn parse_complex(text: &str) -> Result<C64, String> {
    let src: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    if src.is_empty() {
        return Err("empty expression".into());
    }
    let mut p = Parser { src: &src, pos: 0 };
    let v = p.expr()?;
    if p.pos != src.len() {
        return Err(format!("unexpected `{}` in `{text}`", src[p.pos..].iter().collect::<String>()));
    }
    Ok(v)
}

/// Like [`parse_complex`] but rejects a nonzero imaginary part.
pub fn parse_real(text: &str) -> Result<f64, String> {
    let z = parse_complex(text)?;
    if z.im != 0.0 {
        return Err(format!("`{text}` must be real"));
    }
    Ok(z.re)
}

struct Parser<'a> {
    src: &'a [char],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, word: &str) -> bool {
        let w: Vec<char> = word.chars().collect();
        let end = self.pos + w.len();
        if end <= self.src.len() && self.src[self.pos..end].iter().zip(&w).all(|(a, b)| a.eq_ignore_ascii_case(b)) {
            self.pos = end;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<C64, String> {
        let mut v = self.term()?;
        loop {
            if self.eat("+") {
                v += self.term()?;
            } else if self.eat("-") {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<C64, String> {
        let mut v = self.unary()?;
        loop {
            if self.eat("*") {
                v *= self.unary()?;
            } else if self.eat("/") {
                v /= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<C64, String> {
        if self.eat("-") {
            Ok(-self.unary()?)
        } else if self.eat("+") {
            self.unary()
        } else {
            let v = self.atom()?;
            Ok(if self.eat("i") { v * C64::new(0.0, 1.0) } else { v })
        }
    }

    fn atom(&mut self) -> Result<C64, String> {
        if self.eat("sqrt(") {
            let v = self.expr()?;
            self.close()?;
            return Ok(v.sqrt());
        }
        if self.eat("(") {
            let v = self.expr()?;
            self.close()?;
            return Ok(v);
        }
        if self.eat("pi") {
            return Ok(C64::new(std::f64::consts::PI, 0.0));
        }
        if self.eat("inf") {
            return Ok(C64::new(f64::INFINITY, 0.0));
        }
        if self.eat("i") {
            return Ok(C64::new(0.0, 1.0));
        }
        self.number()
    }

    fn close(&mut self) -> Result<(), String> {
        if self.eat(")") {
            Ok(())
        } else {
            Err("missing `)`".into())
        }
    }

    fn number(&mut self) -> Result<C64, String> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        // exponent, but not the imaginary suffix
        if matches!(self.peek(), Some('e' | 'E')) && self.pos > start {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            let digits = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = save;
            }
        }
        let s: String = self.src[start..self.pos].iter().collect();
        if s.is_empty() {
            return Err(match self.peek() {
                Some(c) => format!("unexpected `{c}`"),
                None => "unexpected end of expression".into(),
            });
        }
        s.parse::<f64>().map(|x| C64::new(x, 0.0)).map_err(|e| format!("bad number `{s}`: {e}"))
    }
}

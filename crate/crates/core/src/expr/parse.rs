//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr  := term (("+"|"-") term)*
//! term  := unary (("*"|"/") unary)*
//! unary := "-" unary | power
//! power := atom ("^" ["-"] integer)?
//! atom  := rational | identifier | identifier "(" expr ("," expr)* ")"
//!        | "D" "(" identifier ("," identifier ("," integer)?)+ ")" | "(" expr ")"
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;

use super::atom::{Elementary, Jet};
use super::context::{Chart, Context, RewriteRule};
use super::symbol::Sym;
use super::{Expr, ExprError};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit())) {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let int_part = &src[start..i];
            let mut frac_part = "";
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                let fs = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                frac_part = &src[fs..i];
            }
            let mut exp10: i64 = 0;
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                let neg = j < bytes.len() && bytes[j] == b'-';
                if j < bytes.len() && (bytes[j] == b'-' || bytes[j] == b'+') {
                    j += 1;
                }
                let es = j;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j > es {
                    let v: i64 = src[es..j]
                        .parse()
                        .map_err(|_| ExprError::Syntax { pos: i, msg: "exponent too large".into() })?;
                    exp10 = if neg { -v } else { v };
                    i = j;
                }
            }
            let digits = format!("{int_part}{frac_part}");
            let mantissa: BigInt = digits.parse().map_err(|_| ExprError::Syntax { pos: start, msg: "bad number".into() })?;
            let scale = exp10 - frac_part.len() as i64;
            if scale.unsigned_abs() > 4096 {
                return Err(ExprError::Syntax { pos: start, msg: "exponent too large".into() });
            }
            let ten = BigInt::from(10u32);
            let v = if scale >= 0 {
                BigRational::from_integer(mantissa * num_traits::pow(ten, scale as usize))
            } else {
                BigRational::new(mantissa, num_traits::pow(ten, (-scale) as usize))
            };
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^(),=".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(ExprError::Syntax { pos: i, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    chart: Option<&'a Chart>,
    ctx: &'a Context,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.1)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax { pos: self.offset(), msg: msg.into() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn ident(&mut self) -> Result<(String, usize), ExprError> {
        match self.toks.get(self.pos) {
            Some((Tok::Ident(s), p)) => {
                let r = (s.clone(), *p);
                self.pos += 1;
                Ok(r)
            }
            _ => self.err("expected identifier"),
        }
    }

    fn integer(&mut self) -> Result<i64, ExprError> {
        match self.peek() {
            Some(Tok::Num(v)) if v.is_integer() => {
                let v = v.to_integer();
                self.pos += 1;
                i64::try_from(v).or_else(|_| self.err("integer too large"))
            }
            _ => self.err("expected integer"),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.unary()?;
            } else if self.peek() == Some(&Tok::Op('/')) {
                let at = self.offset();
                self.pos += 1;
                let d = self.unary()?;
                acc = acc.checked_div(&d).map_err(|_| ExprError::Syntax {
                    pos: at,
                    msg: "division by zero".into(),
                })?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let at = self.offset();
        let k = if self.eat('(') {
            let neg = self.eat('-');
            let k = self.integer()?;
            self.expect(')')?;
            if neg {
                -k
            } else {
                k
            }
        } else {
            let neg = self.eat('-');
            let k = self.integer()?;
            if neg {
                -k
            } else {
                k
            }
        };
        base.powi(k).map_err(|_| ExprError::Syntax { pos: at, msg: "zero raised to a negative power".into() })
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::rational(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(_)) => {
                let (name, at) = self.ident()?;
                if self.peek() == Some(&Tok::Op('(')) {
                    self.pos += 1;
                    return self.call(&name, at);
                }
                self.name(&name, at)
            }
            _ => self.err("expected expression"),
        }
    }

    fn name(&self, name: &str, at: usize) -> Result<Expr, ExprError> {
        let s = Sym::new(name);
        if self.ctx.params(&s).is_some() {
            return Ok(self.ctx.jet_value(&Jet::base(s)));
        }
        match self.chart {
            Some(ch) if !ch.is_symbol(name) => Err(ExprError::UnknownSymbol { name: name.to_string(), pos: at }),
            _ => Ok(Expr::symbol(&s)),
        }
    }

    fn args(&mut self) -> Result<Vec<Expr>, ExprError> {
        let mut args = vec![self.expr()?];
        while self.eat(',') {
            args.push(self.expr()?);
        }
        self.expect(')')?;
        Ok(args)
    }

    fn call(&mut self, name: &str, at: usize) -> Result<Expr, ExprError> {
        if name == "D" {
            let jet = self.jet_args()?;
            return Ok(self.ctx.jet_value(&jet));
        }
        if name == "exp" {
            let a = self.args()?;
            return match a.as_slice() {
                [x] => Ok(x.exp()),
                _ => Err(ExprError::Syntax { pos: at, msg: "exp takes one argument".into() }),
            };
        }
        if let Some(f) = Elementary::from_name(name) {
            let a = self.args()?;
            return match a.as_slice() {
                [x] => Ok(x.apply(f)),
                _ => Err(ExprError::Syntax { pos: at, msg: format!("{name} takes one argument") }),
            };
        }
        let s = Sym::new(name);
        if let Some(params) = self.ctx.params(&s) {
            let params = params.to_vec();
            let a = self.args()?;
            let ok = a.len() == params.len() && a.iter().zip(&params).all(|(e, p)| e.as_symbol() == Some(p));
            if !ok {
                return Err(ExprError::Syntax {
                    pos: at,
                    msg: format!("`{name}` can only be applied to its parameters"),
                });
            }
            return Ok(self.ctx.jet_value(&Jet::base(s)));
        }
        Err(ExprError::UnknownSymbol { name: name.to_string(), pos: at })
    }

    fn jet_args(&mut self) -> Result<Jet, ExprError> {
        let (f, at) = self.ident()?;
        let func = Sym::new(&f);
        let params = match self.ctx.params(&func) {
            Some(p) => p.to_vec(),
            None => return Err(ExprError::UnknownSymbol { name: f, pos: at }),
        };
        let mut orders = Vec::new();
        while self.eat(',') {
            let (v, vat) = self.ident()?;
            let v = Sym::new(&v);
            if !params.contains(&v) {
                return Err(ExprError::Syntax { pos: vat, msg: format!("`{v}` is not a parameter of `{f}`") });
            }
            let k = if self.peek() == Some(&Tok::Op(',')) && matches!(self.toks.get(self.pos + 1), Some((Tok::Num(_), _))) {
                self.pos += 1;
                self.integer()?
            } else {
                1
            };
            if k < 0 {
                return self.err("negative derivative order");
            }
            orders.push((v, k as u32));
        }
        self.expect(')')?;
        if orders.is_empty() {
            return self.err("D needs at least one variable");
        }
        Ok(Jet::new(func, orders))
    }
}

fn run<'a>(src: &str, chart: Option<&'a Chart>, ctx: &'a Context) -> Result<Parser<'a>, ExprError> {
    Ok(Parser { toks: tokenize(src)?, pos: 0, end: src.len(), chart, ctx })
}

/// Parse `src` over `chart`; every symbol must be a coordinate or constant
/// of the chart or a declared abstract function.
pub fn parse_expression(src: &str, chart: &Chart) -> Result<Expr, ExprError> {
    let mut p = run(src, Some(chart), chart.ctx())?;
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

/// Parse without a chart: every unknown identifier becomes a symbol.
pub fn parse_free(src: &str, ctx: &Context) -> Result<Expr, ExprError> {
    let mut p = run(src, None, ctx)?;
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

/// Parse `rule D(f, x, k) = rhs` (the leading `rule` keyword is optional).
/// The right-hand side is read without applying existing rules.
pub fn parse_rule(src: &str, ctx: &Context) -> Result<RewriteRule, ExprError> {
    let bare = ctx_without_rules(ctx);
    let mut p = run(src, None, &bare)?;
    if matches!(p.peek(), Some(Tok::Ident(s)) if s == "rule") {
        p.pos += 1;
    }
    match p.ident()? {
        (d, _) if d == "D" => {}
        (_, at) => return Err(ExprError::Syntax { pos: at, msg: "rule target must be D(...)".into() }),
    }
    p.expect('(')?;
    let target = p.jet_args()?;
    p.expect('=')?;
    let rhs = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(RewriteRule { target, rhs })
}

fn ctx_without_rules(ctx: &Context) -> Context {
    let mut c = Context::new();
    for (f, ps) in ctx.functions() {
        let names: Vec<&str> = ps.iter().map(|p| p.as_str()).collect();
        c.declare_function(f.as_str(), &names).expect("copied declaration");
    }
    c
}

//! Complex-valued arithmetic expressions over a fixed set of named variables.
//!
//! Grammar (usual precedence, `^` right-associative and binding tighter than
//! unary minus):
//!
//! ```text
//! expr  = term (("+" | "-") term)*
//! term  = unary (("*" | "/") unary)*
//! unary = "-" unary | power
//! power = atom ("^" unary)?
//! atom  = number | "i" | "pi" | name | name "(" expr ("," expr)* ")" | "(" expr ")"
//! ```
//!
//! Functions: `exp ln log sqrt sin cos tan abs re im conj floor step min max`.
//! `step(x)` is 1 for `re x ≥ 0` and 0 otherwise.

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExprError {
    #[error("unexpected character `{0}` at offset {1}")]
    Char(char, usize),
    #[error("unexpected end of expression")]
    End,
    #[error("unexpected token at offset {0}")]
    Token(usize),
    #[error("unknown variable `{0}` (allowed: {1})")]
    Variable(String, String),
    #[error("unknown function `{0}`")]
    Function(String),
    #[error("function `{0}` takes {1} argument(s)")]
    Arity(String, usize),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && (b[j] as char).is_ascii_digit() {
                    i = j;
                    while i < b.len() && (b[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v = text.parse().map_err(|_| ExprError::Char(c, start))?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Name(src[start..i].to_string()), start));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(ExprError::Char(src[i..].chars().next().unwrap_or(c), i));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Tan,
    Abs,
    Re,
    Im,
    Conj,
    Floor,
    Step,
    Min,
    Max,
}

impl Func {
    fn parse(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "exp" => (Func::Exp, 1),
            "ln" | "log" => (Func::Ln, 1),
            "sqrt" => (Func::Sqrt, 1),
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "tan" => (Func::Tan, 1),
            "abs" => (Func::Abs, 1),
            "re" => (Func::Re, 1),
            "im" => (Func::Im, 1),
            "conj" => (Func::Conj, 1),
            "floor" => (Func::Floor, 1),
            "step" => (Func::Step, 1),
            "min" => (Func::Min, 2),
            "max" => (Func::Max, 2),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone)]
enum Node {
    Const(Complex64),
    Var(usize),
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `a^b`, exact for integer exponents and real for nonnegative real bases.
fn pow(a: Complex64, b: Complex64) -> Complex64 {
    if b.im == 0.0 && b.re.fract() == 0.0 && b.re.abs() < 2_147_483_648.0 {
        if a.im == 0.0 {
            return real(a.re.powi(b.re as i32));
        }
        return a.powi(b.re as i32);
    }
    if a.im == 0.0 && a.re >= 0.0 && b.im == 0.0 {
        return real(a.re.powf(b.re));
    }
    if a == Complex64::new(0.0, 0.0) {
        return a;
    }
    (b * a.ln()).exp()
}

impl Node {
    fn eval(&self, vars: &[f64]) -> Complex64 {
        match self {
            Node::Const(c) => *c,
            Node::Var(i) => real(vars[*i]),
            Node::Neg(a) => -a.eval(vars),
            Node::Bin(op, a, b) => {
                let (x, y) = (a.eval(vars), b.eval(vars));
                match op {
                    '+' => x + y,
                    '-' => x - y,
                    '*' => x * y,
                    '/' => {
                        if x.im == 0.0 && y.im == 0.0 {
                            real(x.re / y.re)
                        } else {
                            x / y
                        }
                    }
                    _ => pow(x, y),
                }
            }
            Node::Call(f, args) => {
                let x = args[0].eval(vars);
                let real_only = x.im == 0.0;
                match f {
                    Func::Exp => if real_only { real(x.re.exp()) } else { x.exp() },
                    Func::Ln => if real_only && x.re >= 0.0 { real(x.re.ln()) } else { x.ln() },
                    Func::Sqrt => if real_only && x.re >= 0.0 { real(x.re.sqrt()) } else { x.sqrt() },
                    Func::Sin => if real_only { real(x.re.sin()) } else { x.sin() },
                    Func::Cos => if real_only { real(x.re.cos()) } else { x.cos() },
                    Func::Tan => if real_only { real(x.re.tan()) } else { x.tan() },
                    Func::Abs => real(x.norm()),
                    Func::Re => real(x.re),
                    Func::Im => real(x.im),
                    Func::Conj => x.conj(),
                    Func::Floor => real(x.re.floor()),
                    Func::Step => real(if x.re >= 0.0 { 1.0 } else { 0.0 }),
                    Func::Min => real(x.re.min(args[1].eval(vars).re)),
                    Func::Max => real(x.re.max(args[1].eval(vars).re)),
                }
            }
        }
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(usize::MAX, |t| t.1)
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
        } else if self.peek().is_none() {
            Err(ExprError::End)
        } else {
            Err(ExprError::Token(self.offset()))
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                '+'
            } else if self.eat('-') {
                '-'
            } else {
                return Ok(lhs);
            };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                '*'
            } else if self.eat('/') {
                '/'
            } else {
                return Ok(lhs);
            };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Node::Bin('^', Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let at = self.offset();
        match self.toks.get(self.pos).cloned() {
            None => Err(ExprError::End),
            Some((Tok::Num(v), _)) => {
                self.pos += 1;
                Ok(Node::Const(real(v)))
            }
            Some((Tok::Op('('), _)) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some((Tok::Name(name), _)) => {
                self.pos += 1;
                if self.eat('(') {
                    let (f, arity) = Func::parse(&name).ok_or_else(|| ExprError::Function(name.clone()))?;
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    if args.len() != arity {
                        return Err(ExprError::Arity(name, arity));
                    }
                    return Ok(Node::Call(f, args));
                }
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Node::Var(i));
                }
                match name.as_str() {
                    "i" => Ok(Node::Const(Complex64::new(0.0, 1.0))),
                    "pi" => Ok(Node::Const(real(std::f64::consts::PI))),
                    _ => Err(ExprError::Variable(name, self.vars.join(", "))),
                }
            }
            Some(_) => Err(ExprError::Token(at)),
        }
    }
}

/// A parsed expression; cheap to clone and safe to share across threads.
#[derive(Debug, Clone)]
pub struct Expr {
    root: Arc<Node>,
    arity: usize,
    source: String,
}

impl Expr {
    /// Parses `src` with variables bound positionally to `vars`.
    pub fn parse(src: &str, vars: &[&str]) -> Result<Self, ExprError> {
        let mut p = Parser {
            toks: lex(src)?,
            pos: 0,
            vars,
        };
        let root = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(ExprError::Token(p.offset()));
        }
        Ok(Expr {
            root: Arc::new(root),
            arity: vars.len(),
            source: src.to_string(),
        })
    }

    pub fn eval(&self, vars: &[f64]) -> Complex64 {
        debug_assert_eq!(vars.len(), self.arity);
        self.root.eval(vars)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, vars: &[&str], x: &[f64]) -> Complex64 {
        Expr::parse(s, vars).unwrap().eval(x)
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("1 + 2 * 3", &[], &[]), real(7.0));
        assert_eq!(ev("-2^2", &[], &[]), real(-4.0));
        assert_eq!(ev("2^3^2", &[], &[]), real(512.0));
        assert_eq!(ev("(1 + 2) * 3", &[], &[]), real(9.0));
        assert_eq!(ev("2e-1 * 10", &[], &[]), real(2.0));
    }

    #[test]
    fn variables_and_functions() {
        assert_eq!(ev("(-1)^n", &["n"], &[3.0]), real(-1.0));
        assert_eq!(ev("(-1)^n * (n + 1)", &["n"], &[4.0]), real(5.0));
        assert_eq!(ev("1/(m+1) * step(m - n)", &["m", "n"], &[3.0, 5.0]), real(0.0));
        assert_eq!(ev("2 + 3*i", &[], &[]), Complex64::new(2.0, 3.0));
        assert!((ev("exp(i*pi)", &[], &[]) - real(-1.0)).norm() < 1e-15);
        assert_eq!(ev("max(r, 0.5)", &["r"], &[0.25]), real(0.5));
    }

    #[test]
    fn errors() {
        assert!(matches!(Expr::parse("x + 1", &["n"]), Err(ExprError::Variable(..))));
        assert!(matches!(Expr::parse("foo(1)", &[]), Err(ExprError::Function(_))));
        assert_eq!(Expr::parse("1 +", &[]).unwrap_err(), ExprError::End);
        assert!(matches!(Expr::parse("1 2", &[]), Err(ExprError::Token(_))));
        assert!(matches!(Expr::parse("1 $ 2", &[]), Err(ExprError::Char('$', 2))));
        assert!(matches!(Expr::parse("min(1)", &[]), Err(ExprError::Arity(..))));
    }
}

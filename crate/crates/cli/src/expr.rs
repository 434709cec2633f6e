//! Closed-form initial data over `x`.
//!
//! Grammar: `+ - * / ^` (right associative), unary minus, parentheses,
//! numbers, `x`, `pi`, and the functions `sin cos abs exp sqrt ln min max`
//! plus `piecewise(lo, hi, inside, outside)`, which takes `inside` on the
//! closed interval `[lo, hi]`.

use std::fmt;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    X,
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Abs,
    Exp,
    Sqrt,
    Ln,
    Min,
    Max,
    Piecewise,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "abs" => (Func::Abs, 1),
            "exp" => (Func::Exp, 1),
            "sqrt" => (Func::Sqrt, 1),
            "ln" => (Func::Ln, 1),
            "min" => (Func::Min, 2),
            "max" => (Func::Max, 2),
            "piecewise" => (Func::Piecewise, 4),
            _ => return None,
        })
    }
}

/// A parsed expression together with its source text.
#[derive(Debug, Clone)]
pub struct Expr {
    source: String,
    root: Node,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self, CliError> {
        let mut p = Parser {
            src: source,
            chars: source.char_indices().collect(),
            pos: 0,
        };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Self {
            source: source.to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval(&self.root, x)
    }

    pub fn depends_on_x(&self) -> bool {
        uses_x(&self.root)
    }
}

fn uses_x(n: &Node) -> bool {
    match n {
        Node::Num(_) => false,
        Node::X => true,
        Node::Neg(a) => uses_x(a),
        Node::Bin(_, a, b) => uses_x(a) || uses_x(b),
        Node::Call(_, args) => args.iter().any(uses_x),
    }
}

fn eval(n: &Node, x: f64) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::X => x,
        Node::Neg(a) => -eval(a, x),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, x), eval(b, x));
            match op {
                Op::Add => a + b,
                Op::Sub => a - b,
                Op::Mul => a * b,
                Op::Div => a / b,
                Op::Pow => a.powf(b),
            }
        }
        Node::Call(f, args) => {
            let a = |i: usize| eval(&args[i], x);
            match f {
                Func::Sin => a(0).sin(),
                Func::Cos => a(0).cos(),
                Func::Abs => a(0).abs(),
                Func::Exp => a(0).exp(),
                Func::Sqrt => a(0).sqrt(),
                Func::Ln => a(0).ln(),
                Func::Min => a(0).min(a(1)),
                Func::Max => a(0).max(a(1)),
                Func::Piecewise => {
                    if (a(0)..=a(1)).contains(&x) {
                        a(2)
                    } else {
                        a(3)
                    }
                }
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> CliError {
        let column = self.pos + 1;
        CliError::Expr {
            expr: self.src.to_string(),
            column,
            msg: msg.to_string(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
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

    fn expr(&mut self) -> Result<Node, CliError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                Op::Add
            } else if self.eat('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Node, CliError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                Op::Mul
            } else if self.eat('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Node, CliError> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    // -x^2 parses as -(x^2); the exponent may carry its own sign
    fn power(&mut self) -> Result<Node, CliError> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Node::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, CliError> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of expression")),
        }
    }

    fn slice(&self, start: usize) -> &str {
        let a = self.chars[start].0;
        let b = self.chars.get(self.pos).map_or(self.src.len(), |c| c.0);
        &self.src[a..b]
    }

    fn number(&mut self) -> Result<Node, CliError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text = self.slice(start);
        text.parse()
            .map(Node::Num)
            .map_err(|_| self.error(&format!("bad number '{text}'")))
    }

    fn ident(&mut self) -> Result<Node, CliError> {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            self.pos += 1;
        }
        let name = self.slice(start).to_string();
        match name.as_str() {
            "x" => return Ok(Node::X),
            "pi" => return Ok(Node::Num(std::f64::consts::PI)),
            _ => {}
        }
        let Some((func, arity)) = Func::lookup(&name) else {
            self.pos = start;
            return Err(self.error(&format!("unknown identifier '{name}'")));
        };
        if !self.eat('(') {
            return Err(self.error(&format!("expected '(' after {name}")));
        }
        let mut args = vec![self.expr()?];
        while self.eat(',') {
            args.push(self.expr()?);
        }
        if !self.eat(')') {
            return Err(self.error("expected ')' or ','"));
        }
        if args.len() != arity {
            return Err(self.error(&format!(
                "{name} takes {arity} argument(s), got {}",
                args.len()
            )));
        }
        Ok(Node::Call(func, args))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: f64) -> f64 {
        Expr::parse(s).unwrap().eval(x)
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("1 + 2*3", 0.0), 7.0);
        assert_eq!(ev("2^3^2", 0.0), 512.0);
        assert_eq!(ev("-2^2", 0.0), -4.0);
        assert_eq!(ev("2^-1", 0.0), 0.5);
        assert_eq!(ev("(1+x)/2", 3.0), 2.0);
        assert_eq!(ev("1e-2*x", 100.0), 1.0);
    }

    #[test]
    fn functions() {
        assert_eq!(ev("abs(x - 0.5)", 0.25), 0.25);
        assert_eq!(ev("max(x, 1)", 0.2), 1.0);
        assert_eq!(ev("piecewise(0.25, 0.75, 8, 0)", 0.25), 8.0);
        assert_eq!(ev("piecewise(0.25, 0.75, 8, 0)", 0.8), 0.0);
        assert!((ev("cos(pi)", 0.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn errors_point_at_column() {
        match Expr::parse("1 + foo(x)") {
            Err(CliError::Expr { column, .. }) => assert_eq!(column, 5),
            other => panic!("{other:?}"),
        }
        assert!(Expr::parse("sin(x, 2)").is_err());
        assert!(Expr::parse("(1 + 2").is_err());
        assert!(Expr::parse("1 2").is_err());
    }

    #[test]
    fn constant_detection() {
        assert!(!Expr::parse("2*pi").unwrap().depends_on_x());
        assert!(Expr::parse("piecewise(0, 1, 1, x)").unwrap().depends_on_x());
    }
}

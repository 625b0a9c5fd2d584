use super::lexer::{lex, Tok, Token};
use super::{Ast, CommuteDecl, OracleDecl, ParseError, Program, BUILTINS};
use std::collections::HashSet;

/// Parses program text.
///
/// ```
/// use blenc::frontend::{parse, Ast};
///
/// let p = parse("oracle A : qubits=1; oracle B : qubits=1; H = A + 0.3 * B; H").unwrap();
/// let (name, h) = &p.bindings[0];
/// assert_eq!(name, "H");
/// assert_eq!(
///     *h,
///     Ast::Sum(vec![(1.0, Ast::Var("A".into())), (0.3, Ast::Var("B".into()))])
/// );
/// ```
pub fn parse(src: &str) -> Result<Program, ParseError> {
    let toks = lex(src)?;
    Parser {
        toks,
        pos: 0,
        oracles: Vec::new(),
        bound: Vec::new(),
    }
    .program()
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    oracles: Vec<OracleDecl>,
    bound: Vec<String>,
}

/// One summand while parsing an additive chain.
struct Term {
    coeff: f64,
    ast: Ast,
    explicit: bool,
}

const FUNCS: [&str; 4] = ["kron", "dsum", "adj", "Poly"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Syntax {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, ParseError> {
        if *self.peek() == want {
            Ok(self.next())
        } else {
            self.fail(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize), ParseError> {
        let (line, col) = self.here();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok((s, line, col))
            }
            t => self.fail(format!("expected identifier, found {}", describe(&t))),
        }
    }

    fn is_defined(&self, name: &str) -> bool {
        BUILTINS.contains(&name)
            || self.oracles.iter().any(|o| o.name == name)
            || self.bound.iter().any(|b| b == name)
    }

    fn declare(&mut self, name: &str, line: usize, col: usize) -> Result<(), ParseError> {
        // Builtins may be shadowed; user names may not be redeclared.
        let taken = self.oracles.iter().any(|o| o.name == name) || self.bound.iter().any(|b| b == name);
        if taken || FUNCS.contains(&name) || is_keyword(name) {
            return Err(ParseError::Duplicate {
                line,
                col,
                name: name.to_string(),
            });
        }
        Ok(())
    }

    fn program(mut self) -> Result<Program, ParseError> {
        let mut commutes: Vec<(CommuteDecl, usize, usize)> = Vec::new();
        let mut bindings = Vec::new();
        let mut main = None;
        while *self.peek() != Tok::Eof {
            if main.is_some() {
                return self.fail("the main expression must be the last statement");
            }
            match (self.peek().clone(), self.peek_at(1).clone()) {
                (Tok::Ident(k), Tok::Ident(_)) if k == "oracle" => self.oracle_decl()?,
                (Tok::Ident(k), Tok::Ident(_)) if k == "commute" => {
                    self.next();
                    let (l, ll, lc) = self.ident()?;
                    let (r, _, _) = self.ident()?;
                    self.expect(Tok::Semi, "`;`")?;
                    commutes.push((CommuteDecl { left: l, right: r }, ll, lc));
                }
                (Tok::Ident(name), Tok::Eq) => {
                    let (line, col) = self.here();
                    self.next();
                    self.next();
                    self.declare(&name, line, col)?;
                    let e = self.expr()?;
                    self.expect(Tok::Semi, "`;`")?;
                    self.bound.push(name.clone());
                    bindings.push((name, e));
                }
                _ => {
                    let e = self.expr()?;
                    if *self.peek() == Tok::Semi {
                        self.next();
                    }
                    main = Some(e);
                }
            }
        }
        let main = match main {
            Some(m) => m,
            None => match bindings.last() {
                Some((name, _)) => Ast::Var(name.clone()),
                None => return self.fail("program has no expression"),
            },
        };
        let mut out = Vec::new();
        for (c, line, col) in commutes {
            for name in [&c.left, &c.right] {
                if !self.is_defined(name) {
                    return Err(ParseError::Unknown {
                        line,
                        col,
                        name: name.clone(),
                    });
                }
            }
            out.push(c);
        }
        Ok(Program {
            oracles: self.oracles,
            commutes: out,
            bindings,
            main,
        })
    }

    fn oracle_decl(&mut self) -> Result<(), ParseError> {
        self.next();
        let (name, line, col) = self.ident()?;
        self.declare(&name, line, col)?;
        self.expect(Tok::Colon, "`:`")?;
        let mut decl = OracleDecl {
            name: name.clone(),
            n_qubits: 0,
            ancillas: 0,
            subnorm: 1.0,
            hermitian: false,
        };
        let mut seen = HashSet::new();
        loop {
            let (key, kl, kc) = self.ident()?;
            if !seen.insert(key.clone()) {
                return Err(ParseError::Syntax {
                    line: kl,
                    col: kc,
                    msg: format!("attribute `{key}` given twice"),
                });
            }
            self.expect(Tok::Eq, "`=`")?;
            match key.as_str() {
                "qubits" => decl.n_qubits = self.uint()?,
                "ancillas" => decl.ancillas = self.uint()?,
                "subnorm" => decl.subnorm = self.number()?,
                "hermitian" => {
                    let (v, _, _) = self.ident()?;
                    decl.hermitian = match v.as_str() {
                        "true" => true,
                        "false" => false,
                        _ => return self.fail("expected `true` or `false`"),
                    };
                }
                _ => {
                    return Err(ParseError::Syntax {
                        line: kl,
                        col: kc,
                        msg: format!("unknown oracle attribute `{key}`"),
                    })
                }
            }
            if *self.peek() == Tok::Comma {
                self.next();
            } else {
                break;
            }
        }
        self.expect(Tok::Semi, "`;`")?;
        if decl.n_qubits == 0 {
            return Err(ParseError::Syntax {
                line,
                col,
                msg: format!("oracle `{name}` needs qubits >= 1"),
            });
        }
        if !(decl.subnorm > 0.0 && decl.subnorm.is_finite()) {
            return Err(ParseError::Syntax {
                line,
                col,
                msg: format!("oracle `{name}` needs a positive subnorm"),
            });
        }
        self.oracles.push(decl);
        Ok(())
    }

    fn uint(&mut self) -> Result<usize, ParseError> {
        match self.peek().clone() {
            Tok::Num(_) => {
                let t = self.next();
                t.text.parse().map_err(|_| ParseError::Syntax {
                    line: t.line,
                    col: t.col,
                    msg: format!("expected a non-negative integer, found `{}`", t.text),
                })
            }
            t => self.fail(format!("expected integer, found {}", describe(&t))),
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let neg = if *self.peek() == Tok::Minus {
            self.next();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Num(v) => {
                self.next();
                Ok(if neg { -v } else { v })
            }
            t => self.fail(format!("expected number, found {}", describe(&t))),
        }
    }

    fn expr(&mut self) -> Result<Ast, ParseError> {
        let mut terms = Vec::new();
        let mut negate = false;
        if *self.peek() == Tok::Minus {
            self.next();
            negate = true;
        }
        loop {
            let mut t = self.term()?;
            if negate {
                t.coeff = -t.coeff;
                t.explicit = true;
            }
            terms.push(t);
            match self.peek() {
                Tok::Plus => negate = false,
                Tok::Minus => negate = true,
                _ => break,
            }
            self.next();
        }
        if terms.len() == 1 && !terms[0].explicit {
            return Ok(terms.pop().unwrap().ast);
        }
        Ok(Ast::Sum(terms.into_iter().map(|t| (t.coeff, t.ast)).collect()))
    }

    /// `scalar (('*'|'/') scalar)* '*' factor ('*' factor)*` or a plain
    /// product of factors.
    fn term(&mut self) -> Result<Term, ParseError> {
        let mut coeff = 1.0;
        let mut explicit = false;
        if let Tok::Num(v) = *self.peek() {
            self.next();
            coeff = v;
            explicit = true;
            loop {
                match self.peek() {
                    Tok::Star => {
                        self.next();
                        if let Tok::Num(v) = *self.peek() {
                            self.next();
                            coeff *= v;
                        } else {
                            break;
                        }
                    }
                    Tok::Slash => {
                        self.next();
                        match *self.peek() {
                            Tok::Num(v) => {
                                self.next();
                                coeff /= v;
                            }
                            _ => return self.fail("expected a number after `/`"),
                        }
                    }
                    _ => return self.fail("a scalar must multiply a matrix expression"),
                }
            }
        }
        let mut factors = vec![self.factor()?];
        loop {
            match self.peek() {
                Tok::Star => {
                    self.next();
                    if matches!(self.peek(), Tok::Num(_)) {
                        return self.fail("scalars must precede matrix operands");
                    }
                    factors.push(self.factor()?);
                }
                Tok::Slash => return self.fail("cannot divide a matrix"),
                _ => break,
            }
        }
        if !coeff.is_finite() {
            return self.fail("coefficient is not finite");
        }
        let ast = if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Ast::Prod(factors)
        };
        Ok(Term {
            coeff,
            ast,
            explicit,
        })
    }

    fn factor(&mut self) -> Result<Ast, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Tok::StarStar {
            return Ok(base);
        }
        self.next();
        let (line, col) = self.here();
        let n = self.uint()?;
        if n == 0 {
            return Err(ParseError::Syntax {
                line,
                col,
                msg: "exponent must be at least 1".into(),
            });
        }
        if *self.peek() == Tok::StarStar {
            return self.fail("chained `**` is not supported");
        }
        Ok(if n == 1 {
            base
        } else {
            Ast::Prod(vec![base; n])
        })
    }

    fn primary(&mut self) -> Result<Ast, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.next();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) if FUNCS.contains(&name.as_str()) && *self.peek_at(1) == Tok::LParen => {
                self.next();
                self.next();
                let out = match name.as_str() {
                    "adj" => Ast::Adj(Box::new(self.expr()?)),
                    "Poly" => {
                        let base = self.expr()?;
                        self.expect(Tok::Comma, "`,`")?;
                        self.expect(Tok::LBrack, "`[`")?;
                        let mut cs = vec![self.number()?];
                        while *self.peek() == Tok::Comma {
                            self.next();
                            cs.push(self.number()?);
                        }
                        self.expect(Tok::RBrack, "`]`")?;
                        Ast::Poly(Box::new(base), cs)
                    }
                    _ => {
                        let mut args = vec![self.expr()?];
                        while *self.peek() == Tok::Comma {
                            self.next();
                            args.push(self.expr()?);
                        }
                        if name == "kron" {
                            Ast::Tensor(args)
                        } else {
                            Ast::Choice(args)
                        }
                    }
                };
                self.expect(Tok::RParen, "`)`")?;
                Ok(out)
            }
            Tok::Ident(name) => {
                let (line, col) = self.here();
                if !self.is_defined(&name) {
                    return Err(ParseError::Unknown { line, col, name });
                }
                self.next();
                Ok(Ast::Var(name))
            }
            t => self.fail(format!("expected an expression, found {}", describe(&t))),
        }
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "oracle" | "commute" | "true" | "false")
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(v) => format!("`{v}`"),
        Tok::Eof => "end of input".into(),
        Tok::Eq => "`=`".into(),
        Tok::Semi => "`;`".into(),
        Tok::Colon => "`:`".into(),
        Tok::Comma => "`,`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::LBrack => "`[`".into(),
        Tok::RBrack => "`]`".into(),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::StarStar => "`**`".into(),
        Tok::Slash => "`/`".into(),
    }
}

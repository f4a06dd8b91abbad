use std::fmt;
use std::sync::Arc;

use chr_terms::{CmpOp, Comparison, Term, Var};
use thiserror::Error;

use crate::ast::*;
use crate::lexer::{tokenize, Tok, Token};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseError {
    pub fn at(line: usize, col: usize, message: String) -> ParseError {
        ParseError { line, col, message, expected: Vec::new() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

/// Parse an LA source file: rules and optional `goal` directives.
pub fn parse_la(text: &str) -> Result<(LaProgram, Vec<LaAtom>), ParseError> {
    let mut p = Parser::new(text)?;
    let mut prog = LaProgram::default();
    let mut goal = Vec::new();
    while !p.at_eof() {
        if p.at_goal_directive() {
            p.bump();
            goal.extend(p.la_atoms()?);
            p.expect(".")?;
        } else {
            prog.rules.push(p.la_rule()?);
        }
    }
    Ok((prog, goal))
}

/// Parse a CHR^rp source file: rules and optional `goal` directives.
pub fn parse_chrrp(text: &str) -> Result<(ChrProgram, Vec<BodyItem>), ParseError> {
    let mut p = Parser::new(text)?;
    let mut prog = ChrProgram::default();
    let mut goal = Vec::new();
    while !p.at_eof() {
        if p.at_goal_directive() {
            p.bump();
            let (line, col) = p.pos();
            let items = p.items()?;
            goal.extend(to_body(items, line, col)?);
            p.expect(".")?;
        } else {
            prog.rules.push(p.chr_rule()?);
        }
    }
    Ok((prog, goal))
}

enum Item {
    Term(Term),
    Cmp(Comparison),
}

fn to_body(items: Vec<Item>, line: usize, col: usize) -> Result<Vec<BodyItem>, ParseError> {
    let mut out = Vec::new();
    for it in items {
        match it {
            Item::Term(t) if t == Term::atom("true") => {}
            Item::Term(t) => out.push(BodyItem::Atom(user_atom(t, line, col)?)),
            Item::Cmp(c) if c.op == CmpOp::Eq => out.push(BodyItem::Tell(c.lhs, c.rhs)),
            Item::Cmp(c) => {
                return Err(ParseError::at(line, col, format!("comparison `{c}` is not allowed in a rule body or goal")))
            }
        }
    }
    Ok(out)
}

fn user_atom(t: Term, line: usize, col: usize) -> Result<Term, ParseError> {
    match &t {
        Term::App(_, _) if !t.is_arith_op() => Ok(t),
        _ => Err(ParseError::at(line, col, format!("`{t}` is not a user-defined atom"))),
    }
}

fn missing(vars: &[Var], scope: &[Var]) -> Vec<String> {
    vars.iter().filter(|v| !scope.contains(v)).map(|v| v.to_string()).collect()
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    anon: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Parser, ParseError> {
        Ok(Parser { toks: tokenize(text)?, pos: 0, anon: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn at_goal_directive(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == "goal") && !matches!(self.peek2(), Tok::Sym("@") | Tok::Sym("("))
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let (line, col) = self.pos();
        ParseError {
            line,
            col,
            message: format!("unexpected {}", self.peek().describe()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), ParseError> {
        if self.at_sym(s) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[&format!("`{s}`")]))
        }
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(&["rule name"])),
        }
    }

    fn expr(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = if self.at_sym("+") {
                "+"
            } else if self.at_sym("-") {
                "-"
            } else {
                return Ok(lhs);
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Term::app(op, vec![lhs, rhs]);
        }
    }

    fn product(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat("*") {
            let rhs = self.unary()?;
            lhs = Term::app("*", vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Term, ParseError> {
        if self.eat("-") {
            if let Tok::Int(n) = *self.peek() {
                self.bump();
                return Ok(Term::Int(-n));
            }
            let inner = self.unary()?;
            return Ok(Term::app("-", vec![inner]));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Term::Int(n))
            }
            Tok::Var(name) => {
                self.bump();
                if name == "_" {
                    self.anon += 1;
                    Ok(Term::var(&format!("_A{}", self.anon)))
                } else {
                    Ok(Term::var(&name))
                }
            }
            Tok::Ident(name) => {
                self.bump();
                let mut args = Vec::new();
                if self.eat("(") {
                    args.push(self.expr()?);
                    while self.eat(",") {
                        args.push(self.expr()?);
                    }
                    self.expect(")")?;
                }
                Ok(Term::App(Arc::from(name.as_str()), args))
            }
            Tok::Sym("[") => {
                self.bump();
                if self.eat("]") {
                    return Ok(Term::list(vec![]));
                }
                let mut items = vec![self.expr()?];
                while self.eat(",") {
                    items.push(self.expr()?);
                }
                let tail = if self.eat("|") { Some(self.expr()?) } else { None };
                self.expect("]")?;
                let mut t = tail.unwrap_or_else(|| Term::list(vec![]));
                for it in items.into_iter().rev() {
                    t = Term::app(CONS, vec![it, t]);
                }
                Ok(t)
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.expr()?;
                self.expect(")")?;
                Ok(t)
            }
            _ => Err(self.error(&["term"])),
        }
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        match self.peek() {
            Tok::Sym("<") => Some(CmpOp::Lt),
            Tok::Sym("=<") => Some(CmpOp::Le),
            Tok::Sym("=") => Some(CmpOp::Eq),
            Tok::Sym("\\=") => Some(CmpOp::Ne),
            _ => None,
        }
    }

    fn item(&mut self) -> Result<Item, ParseError> {
        let lhs = self.expr()?;
        if let Some(op) = self.cmp_op() {
            self.bump();
            let rhs = self.expr()?;
            return Ok(Item::Cmp(Comparison::new(op, lhs, rhs)));
        }
        Ok(Item::Term(lhs))
    }

    fn items(&mut self) -> Result<Vec<Item>, ParseError> {
        let mut out = vec![self.item()?];
        while self.eat(",") {
            out.push(self.item()?);
        }
        Ok(out)
    }

    fn la_atom(&mut self) -> Result<LaAtom, ParseError> {
        let (line, col) = self.pos();
        let t = self.expr()?;
        match t {
            Term::App(f, mut args) if &*f == "del" && args.len() == 1 => {
                Ok(LaAtom::neg(user_atom(args.pop().unwrap(), line, col)?))
            }
            t => Ok(LaAtom::pos(user_atom(t, line, col)?)),
        }
    }

    fn la_atoms(&mut self) -> Result<Vec<LaAtom>, ParseError> {
        let mut out = vec![self.la_atom()?];
        while self.eat(",") {
            out.push(self.la_atom()?);
        }
        Ok(out)
    }

    fn la_rule(&mut self) -> Result<LaRule, ParseError> {
        let (line, col) = self.pos();
        let name = self.ident()?;
        self.expect("@")?;
        let priority = self.expr()?;
        self.expect(":")?;
        let mut antecedents = Vec::new();
        loop {
            let (l, c) = self.pos();
            match self.item()? {
                Item::Cmp(cmp) => antecedents.push(Antecedent::Cmp(cmp)),
                Item::Term(Term::App(f, mut args)) if &*f == "del" && args.len() == 1 => {
                    antecedents.push(Antecedent::Neg(user_atom(args.pop().unwrap(), l, c)?))
                }
                Item::Term(t) => antecedents.push(Antecedent::Pos(user_atom(t, l, c)?)),
            }
            if !self.eat(",") {
                break;
            }
        }
        if !self.at_sym("=>") {
            return Err(self.error(&["`,`", "`=>`"]));
        }
        self.bump();
        let conclusion = self.la_atoms()?;
        self.expect(".")?;
        let rule = LaRule { name: Arc::from(name.as_str()), priority, antecedents, conclusion };
        check_la_scope(&rule, line, col)?;
        Ok(rule)
    }

    fn heads(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut out = Vec::new();
        loop {
            let (l, c) = self.pos();
            let t = self.expr()?;
            out.push(user_atom(t, l, c)?);
            if !self.eat(",") {
                return Ok(out);
            }
        }
    }

    fn chr_rule(&mut self) -> Result<ChrRule, ParseError> {
        let (line, col) = self.pos();
        let priority = self.expr()?;
        self.expect("::")?;
        let name = match (self.peek().clone(), self.peek2()) {
            (Tok::Ident(n), Tok::Sym("@")) => {
                self.bump();
                self.bump();
                Some(Arc::from(n.as_str()))
            }
            _ => None,
        };
        let first = self.heads()?;
        let (kept, removed) = if self.eat("\\") {
            let removed = self.heads()?;
            self.expect("<=>")?;
            (first, removed)
        } else if self.eat("<=>") {
            (Vec::new(), first)
        } else if self.eat("==>") {
            (first, Vec::new())
        } else {
            return Err(self.error(&["`,`", "`\\`", "`<=>`", "`==>`"]));
        };
        let (gl, gc) = self.pos();
        let first_items = self.items()?;
        let (guard_items, body_items) = if self.eat("|") {
            (first_items, self.items()?)
        } else {
            (Vec::new(), first_items)
        };
        self.expect(".")?;
        let mut guard = Vec::new();
        for it in guard_items {
            match it {
                Item::Cmp(c) => guard.push(c),
                Item::Term(t) if t == Term::atom("true") => {}
                Item::Term(t) => return Err(ParseError::at(gl, gc, format!("guard item `{t}` is not a comparison"))),
            }
        }
        let body = to_body(body_items, gl, gc)?;
        let rule = ChrRule { priority, name, kept, removed, guard, body };
        check_chr_scope(&rule, line, col)?;
        Ok(rule)
    }
}

const CONS: &str = "[|]";

fn check_la_scope(rule: &LaRule, line: usize, col: usize) -> Result<(), ParseError> {
    let mut bound: Vec<Var> = Vec::new();
    for a in &rule.antecedents {
        match a {
            Antecedent::Cmp(c) => {
                let miss = missing(&c.vars(), &bound);
                if !miss.is_empty() {
                    return Err(ParseError::at(
                        line,
                        col,
                        format!(
                            "scope error in rule {}: comparison `{c}` uses {} before any antecedent binds it",
                            rule.name,
                            miss.join(", ")
                        ),
                    ));
                }
            }
            Antecedent::Pos(t) | Antecedent::Neg(t) => t.collect_vars(&mut bound),
        }
    }
    for c in &rule.conclusion {
        let miss = missing(&c.atom.vars(), &bound);
        if !miss.is_empty() {
            return Err(ParseError::at(
                line,
                col,
                format!("scope error in rule {}: conclusion uses unbound {}", rule.name, miss.join(", ")),
            ));
        }
    }
    let miss = missing(&rule.priority.vars(), &bound);
    if !miss.is_empty() {
        return Err(ParseError::at(
            line,
            col,
            format!("priority scope error in rule {}: {} not bound by antecedents", rule.name, miss.join(", ")),
        ));
    }
    Ok(())
}

fn check_chr_scope(rule: &ChrRule, line: usize, col: usize) -> Result<(), ParseError> {
    let heads = rule.head_vars();
    let label = rule.name.as_deref().unwrap_or("(unnamed)").to_string();
    let miss = missing(&rule.priority.vars(), &heads);
    if !miss.is_empty() {
        return Err(ParseError::at(
            line,
            col,
            format!("priority scope error in rule {label}: {} not in heads", miss.join(", ")),
        ));
    }
    for g in &rule.guard {
        let miss = missing(&g.vars(), &heads);
        if !miss.is_empty() {
            return Err(ParseError::at(
                line,
                col,
                format!("scope error in rule {label}: guard `{g}` uses {} not in heads", miss.join(", ")),
            ));
        }
    }
    Ok(())
}
